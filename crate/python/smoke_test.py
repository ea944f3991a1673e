#!/usr/bin/env python3
"""Build the treestar_py extension, import it, and drive the main surface.

Run from anywhere: paths are resolved relative to the repository root.
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


def build_extension() -> Path:
    subprocess.run(["cargo", "build", "-p", "treestar-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "debug" / "libtreestar_py.so"
    if not lib.exists():
        raise SystemExit(f"extension not found at {lib}")
    return lib


def main() -> None:
    lib = build_extension()
    staging = Path(tempfile.mkdtemp(prefix="treestar-py-"))
    shutil.copy2(lib, staging / "treestar_py.so")
    sys.path.insert(0, str(staging))

    import treestar_py as ts

    # exact boundary traces
    subfix = ts.Automaton.from_file(str(FIXTURES / "subfix.aut"))
    assert subfix.trace("s") == "1/2"
    assert subfix.trace("t") == "0"
    assert subfix.trace("(1 - s)*(1 - s^-1)") == "1"
    # s fixes all of level 1; the level traces first drop at level 2
    assert subfix.level_trace("s", 1) == "1"
    assert subfix.level_trace("s", 2) == "1/2"

    # word arithmetic: s = (t, 1) and t is an involution, so s squares away
    assert subfix.words_equal("s*s", "1")
    assert not subfix.is_trivial("s")
    assert subfix.stabilizer_search("1") == "t*s*t"

    # kernel certificates
    assert subfix.verify_kernel("(1 - s)*(1 - t*s*t^-1)", power=1, max_level=6)
    kc = subfix.kernel_search()
    assert kc["case"] == "stabilizer-conjugate"
    assert kc["generators"] == ["s", "t*s*t^-1"]
    assert kc["conjugator"] == "t"
    assert subfix.verify_kernel(kc["element"], power=1, max_level=6)

    # boundary partition masses are exact
    parts = subfix.boundary_partition("s", depth=3)
    assert parts["fixed_mass"] == "1/2"
    assert parts["free_mass"] == "1/2"
    assert parts["residual_mass"] == "0"

    # the odometer: carries, norms, spectra on the unit circle
    odo = ts.Automaton.from_file(str(FIXTURES / "odo.aut"))
    assert odo.act("a", "11") == "21"
    assert odo.act("a", "22") == "11"
    assert odo.section("a", "21") == "1"
    norms = dict(odo.norm("a + a^-1", max_level=3))
    assert abs(norms[3] - 2.0) < 1e-6
    for re, im, _ in odo.spectrum("a", max_level=3):
        assert abs(re * re + im * im - 1.0) < 1e-9

    # tensor companions and their restricted supports
    t_odo = odo.tensor_extension()
    assert t_odo.state_names() == ["a", "a~"]
    assert t_odo.rist_witness("2") == "a~"

    # matrix recursion and the slice-wise expectation
    aleshin = ts.Automaton.from_file(str(FIXTURES / "aleshin.aut"))
    assert aleshin.phi("a") == "[[0, b], [c, 0]]"
    assert aleshin.conditional_expectation([(1, 2, "b")]) == "[[0, 1/2*b], [1/2*c, 0]]"

    # block diagnostics
    swap = ts.Automaton.from_file(str(FIXTURES / "swap.aut"))
    blocks = swap.wedderburn(n=1)
    assert blocks["blocks"] == [(1, 1), (1, 1)]
    assert blocks["algebra_dim"] == 2
    trend = odo.dimension_trend(max_level=3)
    assert trend["verdict"] == ts.VERDICT_BOUNDED
    assert trend["max_block_by_level"] == [(1, 1), (2, 1), (3, 1)]

    print("smoke test passed: traces, actions, kernels, recursion, blocks")


if __name__ == "__main__":
    main()
