//! Python bindings: one `Automaton` class carrying the whole surface.
//!
//! Words, vertices, and algebra expressions cross the boundary as strings
//! in the same syntax the command line accepts; exact scalars come back as
//! strings like "1/2" so nothing is rounded (feed them to
//! `fractions.Fraction` as needed). Numeric results are plain floats.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::path::Path;
use treestar::{
    algebra_closure, block_dimensions, boundary_partition, conditional_expectation, defaults,
    dimension_trend, freeness_report, kernel_search, norm_profile, parse_expression,
    recursion_matrix, spectrum_union, trace_element, verify_kernel, Automaton, LevelError,
    RecursionMatrix, Vertex,
};

fn domain<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, name = "Automaton")]
struct PyAutomaton {
    inner: Automaton,
}

impl PyAutomaton {
    fn vertex(&self, text: &str) -> PyResult<Vertex> {
        Vertex::parse(text, self.inner.alphabet()).map_err(domain)
    }
}

#[pymethods]
impl PyAutomaton {
    /// Load and validate an automaton definition file.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(PyAutomaton {
            inner: Automaton::from_file(Path::new(path)).map_err(domain)?,
        })
    }

    /// Parse and validate a definition given as TOML text.
    #[staticmethod]
    fn from_definition(text: &str) -> PyResult<Self> {
        Ok(PyAutomaton {
            inner: Automaton::from_definition(text).map_err(domain)?,
        })
    }

    #[getter]
    fn alphabet_size(&self) -> usize {
        self.inner.alphabet()
    }

    fn state_names(&self) -> Vec<String> {
        self.inner
            .states()
            .iter()
            .map(|s| s.name.clone())
            .collect()
    }

    fn render_definition(&self) -> String {
        self.inner.render_definition()
    }

    /// Binary automata only: adjoin the tensor companion of every state.
    fn tensor_extension(&self) -> PyResult<Self> {
        Ok(PyAutomaton {
            inner: self.inner.tensor_extension().map_err(domain)?,
        })
    }

    /// Image of a vertex under a word. Vertices are 1-based digit strings;
    /// "@" or "" is the root.
    fn act(&self, word: &str, vertex: &str) -> PyResult<String> {
        let w = self.inner.parse_word(word).map_err(domain)?;
        let v = self.vertex(vertex)?;
        Ok(self.inner.act(&w, &v).display(self.inner.alphabet()))
    }

    /// Section of a word at a target vertex: the element acting below the
    /// image once the word has carried some vertex there.
    fn section(&self, word: &str, vertex: &str) -> PyResult<String> {
        let w = self.inner.parse_word(word).map_err(domain)?;
        let v = self.vertex(vertex)?;
        Ok(self.inner.render_word(&self.inner.section(&w, &v)))
    }

    fn is_trivial(&self, word: &str) -> PyResult<bool> {
        let w = self.inner.parse_word(word).map_err(domain)?;
        Ok(self.inner.is_trivial(&w))
    }

    fn words_equal(&self, a: &str, b: &str) -> PyResult<bool> {
        let wa = self.inner.parse_word(a).map_err(domain)?;
        let wb = self.inner.parse_word(b).map_err(domain)?;
        Ok(self.inner.words_equal(&wa, &wb))
    }

    /// Exact boundary trace of an algebra expression, e.g. "1/2".
    fn trace(&self, expression: &str) -> PyResult<String> {
        let x = parse_expression(&self.inner, expression).map_err(domain)?;
        Ok(trace_element(&self.inner, &x).map_err(domain)?.to_string())
    }

    /// Exact level-n trace of a single word.
    fn level_trace(&self, word: &str, n: u32) -> PyResult<String> {
        let w = self.inner.parse_word(word).map_err(domain)?;
        Ok(treestar::level_trace(&self.inner, &w, n).to_string())
    }

    /// Operator norms of an expression at levels 0..=max_level.
    #[pyo3(signature = (expression, max_level=6, tol=defaults::POWER_TOL))]
    fn norm(&self, expression: &str, max_level: u32, tol: f64) -> PyResult<Vec<(u32, f64)>> {
        let x = parse_expression(&self.inner, expression).map_err(domain)?;
        let profile = norm_profile(&self.inner, &x, max_level, tol).map_err(domain)?;
        Ok(profile
            .entries
            .iter()
            .map(|(n, e)| (*n, e.value))
            .collect())
    }

    /// Union of the finite-level spectra as (re, im, multiplicity) rows.
    #[pyo3(signature = (expression, max_level=4, merge_tol=defaults::MERGE_TOL))]
    fn spectrum(
        &self,
        expression: &str,
        max_level: u32,
        merge_tol: f64,
    ) -> PyResult<Vec<(f64, f64, usize)>> {
        let x = parse_expression(&self.inner, expression).map_err(domain)?;
        let rep = spectrum_union(&self.inner, &x, max_level, merge_tol).map_err(domain)?;
        Ok(rep
            .eigenvalues
            .iter()
            .map(|(z, m)| (z.re, z.im, *m))
            .collect())
    }

    /// Rendered matrix form of an expression over the level-n blocks.
    #[pyo3(signature = (expression, n=1))]
    fn phi(&self, expression: &str, n: u32) -> PyResult<String> {
        let x = parse_expression(&self.inner, expression).map_err(domain)?;
        Ok(recursion_matrix(&self.inner, &x, n)
            .map_err(domain)?
            .render(&self.inner))
    }

    /// Conditional expectation of the level-n matrix with the given
    /// (i, j, expression) entries, 1-based, back onto the image of the
    /// matrix form; returns the rendered result.
    #[pyo3(signature = (entries, n=1, search_len=4))]
    fn conditional_expectation(
        &self,
        entries: Vec<(usize, usize, String)>,
        n: u32,
        search_len: usize,
    ) -> PyResult<String> {
        let dim = self.inner.level_size(n).ok_or(LevelError::TooLarge {
            d: self.inner.alphabet(),
            n,
            cap: self.inner.level_cap,
        })
        .map_err(domain)? as usize;
        let mut b = RecursionMatrix::zero(n, dim);
        for (i, j, text) in &entries {
            if !(1..=dim).contains(i) || !(1..=dim).contains(j) {
                return Err(PyValueError::new_err(format!(
                    "entry ({i}, {j}): coordinates must lie in 1..={dim}"
                )));
            }
            let x = parse_expression(&self.inner, text).map_err(domain)?;
            let cell = b.entry(i - 1, j - 1).add(&x, &self.inner);
            b.set_entry(i - 1, j - 1, cell);
        }
        let outcome = conditional_expectation(&self.inner, &b, search_len).map_err(domain)?;
        Ok(outcome.matrix.render(&self.inner))
    }

    /// Search for a certified kernel-element construction; returns a dict
    /// with the case name, generators, optional conjugator, and element.
    #[pyo3(signature = (max_len=4))]
    fn kernel_search<'py>(&self, py: Python<'py>, max_len: usize) -> PyResult<Bound<'py, PyDict>> {
        let c = kernel_search(&self.inner, max_len).map_err(domain)?;
        let out = PyDict::new(py);
        out.set_item("case", c.case.name())?;
        out.set_item(
            "generators",
            c.generators
                .iter()
                .map(|w| self.inner.render_word(w))
                .collect::<Vec<_>>(),
        )?;
        out.set_item(
            "conjugator",
            c.conjugator.as_ref().map(|w| self.inner.render_word(w)),
        )?;
        out.set_item("element", c.element.render(&self.inner))?;
        Ok(out)
    }

    /// Check that an expression vanishes in every level representation of
    /// the given tensor power, levels 0..=max_level.
    #[pyo3(signature = (expression, power=1, max_level=6))]
    fn verify_kernel(&self, expression: &str, power: usize, max_level: u32) -> PyResult<bool> {
        let x = parse_expression(&self.inner, expression).map_err(domain)?;
        verify_kernel(&self.inner, &x, power, max_level).map_err(domain)
    }

    /// First nontrivial word fixing the subtree at a vertex pointwise.
    #[pyo3(signature = (vertex, max_len=4))]
    fn stabilizer_search(&self, vertex: &str, max_len: usize) -> PyResult<Option<String>> {
        let v = self.vertex(vertex)?;
        Ok(self
            .inner
            .stabilizer_search(&v, max_len)
            .map(|w| self.inner.render_word(&w)))
    }

    /// First word acting trivially outside the subtree at a vertex.
    #[pyo3(signature = (vertex, max_len=4))]
    fn rist_witness(&self, vertex: &str, max_len: usize) -> PyResult<Option<String>> {
        let v = self.vertex(vertex)?;
        Ok(self
            .inner
            .rist_witness(&v, max_len)
            .map(|w| self.inner.render_word(&w)))
    }

    /// Split the boundary under a word into fixed subtrees, fixed-point-free
    /// subtrees, and an unresolved remainder; masses are exact strings.
    #[pyo3(signature = (word, depth=6))]
    fn boundary_partition<'py>(
        &self,
        py: Python<'py>,
        word: &str,
        depth: u32,
    ) -> PyResult<Bound<'py, PyDict>> {
        let w = self.inner.parse_word(word).map_err(domain)?;
        let p = boundary_partition(&self.inner, &w, depth);
        let d = self.inner.alphabet();
        let verts =
            |vs: &[Vertex]| -> Vec<String> { vs.iter().map(|v| v.display(d)).collect() };
        let out = PyDict::new(py);
        out.set_item("explored_depth", p.explored_depth)?;
        out.set_item("fixed_mass", p.fixed_mass.to_string())?;
        out.set_item("free_mass", p.free_mass.to_string())?;
        out.set_item("residual_mass", p.residual_mass.to_string())?;
        out.set_item("fixed_roots", verts(&p.fixed_roots))?;
        out.set_item("free_roots", verts(&p.free_roots))?;
        out.set_item("unresolved", verts(&p.unresolved))?;
        Ok(out)
    }

    /// Positive-trace witnesses against essential freeness among short
    /// elements.
    #[pyo3(signature = (max_length=3))]
    fn freeness_report<'py>(
        &self,
        py: Python<'py>,
        max_length: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let rep = freeness_report(&self.inner, max_length).map_err(domain)?;
        let out = PyDict::new(py);
        out.set_item("max_length", rep.max_length)?;
        out.set_item("checked_elements", rep.checked_elements)?;
        out.set_item(
            "witnesses",
            rep.witnesses
                .iter()
                .map(|(w, q)| (self.inner.render_word(w), q.to_string()))
                .collect::<Vec<_>>(),
        )?;
        Ok(out)
    }

    /// Block decomposition of the level-n matrix algebra: a dict with the
    /// sorted (d, m) pairs and the algebra and center dimensions.
    #[pyo3(signature = (n=1, max_ball=defaults::MAX_BALL, seed=defaults::POWER_SEED))]
    fn wedderburn<'py>(
        &self,
        py: Python<'py>,
        n: u32,
        max_ball: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let basis = algebra_closure(&self.inner, n, max_ball).map_err(domain)?;
        let rep = block_dimensions(&self.inner, &basis, seed).map_err(domain)?;
        let out = PyDict::new(py);
        out.set_item("n", rep.level)?;
        out.set_item("blocks", rep.blocks.clone())?;
        out.set_item("algebra_dim", rep.algebra_dim)?;
        out.set_item("center_dim", rep.center_dim)?;
        out.set_item("ball_radius", basis.ball_radius)?;
        Ok(out)
    }

    /// Largest block dimension per level with a boundedness verdict.
    #[pyo3(signature = (max_level=3, max_ball=defaults::MAX_BALL, seed=defaults::POWER_SEED))]
    fn dimension_trend<'py>(
        &self,
        py: Python<'py>,
        max_level: u32,
        max_ball: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let t = dimension_trend(&self.inner, max_level, max_ball, seed).map_err(domain)?;
        let out = PyDict::new(py);
        out.set_item("max_block_by_level", t.max_block_by_level.clone())?;
        out.set_item("verdict", &t.verdict)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Automaton({} states over alphabet of size {})",
            self.inner.states().len(),
            self.inner.alphabet()
        )
    }
}

#[pymodule]
fn treestar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAutomaton>()?;
    m.add("VERDICT_BOUNDED", treestar::VERDICT_BOUNDED)?;
    m.add("VERDICT_GROWING", treestar::VERDICT_GROWING)?;
    Ok(())
}
