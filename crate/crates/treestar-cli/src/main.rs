//! Command-line front end: parse automaton files and algebra expressions,
//! dispatch to the library, and emit plain, JSON, or CSV reports.
//!
//! Every run with fixed inputs and seed is byte-identical: all iteration in
//! the output path is over sorted or insertion-ordered data, and the only
//! randomness (block splitting) is seeded through `--seed`.

mod report;

use clap::{Parser, Subcommand};
use report::{CliError, Format, Report};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use treestar::{
    algebra_closure, block_dimensions, boundary_partition, conditional_expectation, defaults,
    dimension_trend, freeness_report, kernel_search, norm_profile, parse_expression,
    recursion_matrix, spectrum_union, trace_element, verify_kernel, AlgebraElement, Automaton,
    LevelError, RecursionMatrix, Vertex,
};

#[derive(Parser)]
#[command(
    name = "treestar",
    version,
    about = "Automaton groups on rooted trees: actions, norms, spectra, traces, \
             matrix recursions, kernel certificates, block diagnostics."
)]
struct Cli {
    /// Output format; csv is available for norm, spectrum, wedderburn, trend.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,

    /// Seed for the randomized block-splitting step.
    #[arg(long, global = true, default_value_t = defaults::POWER_SEED)]
    seed: u64,

    /// Convergence tolerance for iterative norm estimation.
    #[arg(long, global = true, default_value_t = defaults::POWER_TOL)]
    tol: f64,

    /// Deepest level for commands that sweep a level range
    /// (norm 6, spectrum 4, verify-kernel 6, trend 3 by default).
    #[arg(long, global = true)]
    max_level: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an automaton definition.
    Validate { file: PathBuf },
    /// Image of a vertex under a word, and the section at the image.
    Act {
        file: PathBuf,
        word: String,
        /// Vertex as 1-based letters, e.g. "12"; "@" or "" is the root.
        /// Dot-separated ("1.2") when the alphabet has more than 9 letters.
        vertex: String,
    },
    /// Operator norms of an element across levels 0..=max-level.
    Norm { file: PathBuf, expression: String },
    /// Union of the finite-level spectra up to max-level.
    Spectrum {
        file: PathBuf,
        expression: String,
        /// Cluster radius when merging eigenvalues across levels.
        #[arg(long, default_value_t = defaults::MERGE_TOL)]
        merge_tol: f64,
    },
    /// Exact boundary trace of an element.
    Trace { file: PathBuf, expression: String },
    /// Split the boundary under a word into fixed subtrees, fixed-point-free
    /// subtrees, and an unresolved remainder.
    Partition {
        file: PathBuf,
        word: String,
        #[arg(long, default_value_t = 6)]
        depth: u32,
    },
    /// Look for essential-freeness violations among short elements.
    FreeCheck {
        file: PathBuf,
        /// Longest word length inspected.
        #[arg(long, default_value_t = 3)]
        length: usize,
    },
    /// First nontrivial word fixing the subtree at a vertex pointwise.
    StabSearch {
        file: PathBuf,
        vertex: String,
        #[arg(long, default_value_t = 4)]
        length: usize,
    },
    /// Matrix form of an element over the level-n blocks.
    Phi {
        file: PathBuf,
        expression: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
    /// Conditional expectation of a level-n matrix onto the image of the
    /// matrix form.
    Expect {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Matrix entry as "i,j,expression" with 1-based coordinates; repeat
        /// the flag to fill several cells.
        #[arg(long = "entry")]
        entries: Vec<String>,
        /// Longest word tried when lifting an off-diagonal slice.
        #[arg(long, default_value_t = 4)]
        search_len: usize,
    },
    /// Search for a certified kernel-element construction.
    Kernel {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        length: usize,
    },
    /// Check that an element vanishes in every level representation of the
    /// given tensor power.
    VerifyKernel {
        file: PathBuf,
        expression: String,
        #[arg(long, default_value_t = 1)]
        power: usize,
    },
    /// Extend a binary automaton with the tensor companions of its states.
    Tensor {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: u32,
    },
    /// First word acting trivially outside the subtree at a vertex.
    Rist {
        file: PathBuf,
        vertex: String,
        #[arg(long, default_value_t = 4)]
        length: usize,
    },
    /// Block decomposition of the level-n matrix algebra.
    Wedderburn {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Largest generating ball radius tried before giving up.
        #[arg(long, default_value_t = defaults::MAX_BALL)]
        max_ball: usize,
    },
    /// Largest block dimension per level, with a boundedness verdict.
    Trend {
        file: PathBuf,
        #[arg(long, default_value_t = defaults::MAX_BALL)]
        max_ball: usize,
    },
}

fn supports_csv(command: &Command) -> bool {
    matches!(
        command,
        Command::Norm { .. }
            | Command::Spectrum { .. }
            | Command::Wedderburn { .. }
            | Command::Trend { .. }
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.format == Format::Csv && !supports_csv(&cli.command) {
        eprintln!("error: --format csv is only available for norm, spectrum, wedderburn, and trend");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(report) => {
            if cli.format != Format::Json {
                for w in &report.warnings {
                    eprintln!("warning: {w}");
                }
            }
            print!("{}", report.render(cli.format));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprint!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}

/// Loads and validates the automaton, honoring the level-cap override.
fn load(path: &Path) -> Result<Automaton, CliError> {
    let mut aut = Automaton::from_file(path)?;
    if let Ok(text) = std::env::var("TREESTAR_LEVEL_CAP") {
        aut.level_cap = text
            .parse::<u64>()
            .ok()
            .filter(|&cap| cap >= 1)
            .ok_or_else(|| {
                CliError::new(
                    "InvalidLevelCap",
                    format!("TREESTAR_LEVEL_CAP must be a positive integer, got `{text}`"),
                )
            })?;
    }
    Ok(aut)
}

fn parse_vertex(aut: &Automaton, text: &str) -> Result<Vertex, CliError> {
    Vertex::parse(text, aut.alphabet()).map_err(|e| CliError::new("InvalidVertex", e.to_string()))
}

fn parse_entry(
    aut: &Automaton,
    dim: usize,
    raw: &str,
) -> Result<(usize, usize, AlgebraElement), CliError> {
    let bad = || {
        CliError::new(
            "InvalidEntry",
            format!("entry `{raw}` must be `i,j,expression` with 1-based coordinates"),
        )
    };
    let mut parts = raw.splitn(3, ',');
    let i: usize = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(bad)?;
    let j: usize = parts
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(bad)?;
    let text = parts.next().ok_or_else(bad)?;
    if !(1..=dim).contains(&i) || !(1..=dim).contains(&j) {
        return Err(CliError::new(
            "InvalidEntry",
            format!("entry `{raw}`: coordinates must lie in 1..={dim}"),
        ));
    }
    Ok((i - 1, j - 1, parse_expression(aut, text)?))
}

/// The request block echoed into every JSON report.
fn request(cli: &Cli, sub: &str, file: &Path, params: Value) -> Value {
    let mut req = json!({
        "subcommand": sub,
        "automaton": file.display().to_string(),
        "format": cli.format.name(),
        "seed": cli.seed,
        "tol": cli.tol,
    });
    if let Value::Object(extra) = params {
        let target = req.as_object_mut().expect("request is an object");
        for (k, v) in extra {
            target.insert(k, v);
        }
    }
    req
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Validate { file } => cmd_validate(cli, file),
        Command::Act { file, word, vertex } => cmd_act(cli, file, word, vertex),
        Command::Norm { file, expression } => cmd_norm(cli, file, expression),
        Command::Spectrum {
            file,
            expression,
            merge_tol,
        } => cmd_spectrum(cli, file, expression, *merge_tol),
        Command::Trace { file, expression } => cmd_trace(cli, file, expression),
        Command::Partition { file, word, depth } => cmd_partition(cli, file, word, *depth),
        Command::FreeCheck { file, length } => cmd_free_check(cli, file, *length),
        Command::StabSearch {
            file,
            vertex,
            length,
        } => cmd_witness(cli, file, vertex, *length, WitnessKind::Stabilizer),
        Command::Phi {
            file,
            expression,
            n,
        } => cmd_phi(cli, file, expression, *n),
        Command::Expect {
            file,
            n,
            entries,
            search_len,
        } => cmd_expect(cli, file, *n, entries, *search_len),
        Command::Kernel { file, length } => cmd_kernel(cli, file, *length),
        Command::VerifyKernel {
            file,
            expression,
            power,
        } => cmd_verify_kernel(cli, file, expression, *power),
        Command::Tensor { file, times } => cmd_tensor(cli, file, *times),
        Command::Rist {
            file,
            vertex,
            length,
        } => cmd_witness(cli, file, vertex, *length, WitnessKind::Rist),
        Command::Wedderburn { file, n, max_ball } => cmd_wedderburn(cli, file, *n, *max_ball),
        Command::Trend { file, max_ball } => cmd_trend(cli, file, *max_ball),
    }
}

fn cmd_validate(cli: &Cli, file: &Path) -> Result<Report, CliError> {
    let aut = load(file)?;
    let names: Vec<&str> = aut.states().iter().map(|s| s.name.as_str()).collect();
    let plain = format!(
        "valid automaton: {} state(s) over an alphabet of size {}\nstates: {}\n",
        names.len(),
        aut.alphabet(),
        names.join(", ")
    );
    Ok(Report {
        request: request(cli, "validate", file, json!({})),
        results: json!({
            "valid": true,
            "alphabet_size": aut.alphabet(),
            "states": names,
        }),
        warnings: vec![],
        plain,
        csv: None,
    })
}

fn cmd_act(cli: &Cli, file: &Path, word: &str, vertex: &str) -> Result<Report, CliError> {
    let aut = load(file)?;
    let w = aut.parse_word(word)?;
    let v = parse_vertex(&aut, vertex)?;
    let d = aut.alphabet();
    let image_vertex = aut.act(&w, &v);
    // sections are target-indexed: the pair (image, section at the image)
    // is the decomposition acting on words below v
    let section = aut.render_word(&aut.section(&w, &image_vertex));
    let image = image_vertex.display(d);
    Ok(Report {
        request: request(
            cli,
            "act",
            file,
            json!({ "word": word, "vertex": v.display(d) }),
        ),
        results: json!({ "image": image, "section": section, "level": v.level() }),
        warnings: vec![],
        plain: format!("image: {image}\nsection: {section}\n"),
        csv: None,
    })
}

fn cmd_norm(cli: &Cli, file: &Path, expression: &str) -> Result<Report, CliError> {
    let aut = load(file)?;
    let x = parse_expression(&aut, expression)?;
    let max_level = cli.max_level.unwrap_or(6);
    let profile = norm_profile(&aut, &x, max_level, cli.tol)?;
    let mut plain = String::new();
    let mut csv = String::from("n,value\n");
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (n, e) in &profile.entries {
        plain.push_str(&format!("level {}: {}\n", n, e.value));
        csv.push_str(&format!("{},{}\n", n, e.value));
        rows.push(json!({
            "n": n,
            "value": e.value,
            "converged": e.converged,
            "iterations": e.iterations,
        }));
        if !e.converged {
            warnings.push(format!(
                "level {}: iteration cap hit after {} steps; the value is a lower estimate",
                n, e.iterations
            ));
        }
    }
    Ok(Report {
        request: request(
            cli,
            "norm",
            file,
            json!({ "expression": expression, "max_level": max_level }),
        ),
        results: json!({ "profile": rows }),
        warnings,
        plain,
        csv: Some(csv),
    })
}

fn cmd_spectrum(
    cli: &Cli,
    file: &Path,
    expression: &str,
    merge_tol: f64,
) -> Result<Report, CliError> {
    let aut = load(file)?;
    let x = parse_expression(&aut, expression)?;
    let max_level = cli.max_level.unwrap_or(4);
    let rep = spectrum_union(&aut, &x, max_level, merge_tol)?;
    let method = serde_json::to_value(rep.method).expect("method serializes");
    let method_name = method.as_str().expect("method is a string").to_owned();
    let mut plain = format!(
        "spectrum union over levels 0..={} ({} point(s), method {})\n",
        max_level,
        rep.eigenvalues.len(),
        method_name
    );
    let mut csv = String::from("re,im,multiplicity\n");
    let mut points = Vec::new();
    for (z, m) in &rep.eigenvalues {
        plain.push_str(&format!("{}{:+}i (multiplicity {})\n", z.re, z.im, m));
        csv.push_str(&format!("{},{},{}\n", z.re, z.im, m));
        points.push(json!({ "re": z.re, "im": z.im, "multiplicity": m }));
    }
    Ok(Report {
        request: request(
            cli,
            "spectrum",
            file,
            json!({
                "expression": expression,
                "max_level": max_level,
                "merge_tol": merge_tol,
            }),
        ),
        results: json!({ "max_level": max_level, "method": method_name, "points": points }),
        warnings: vec![],
        plain,
        csv: Some(csv),
    })
}

fn cmd_trace(cli: &Cli, file: &Path, expression: &str) -> Result<Report, CliError> {
    let aut = load(file)?;
    let x = parse_expression(&aut, expression)?;
    let value = trace_element(&aut, &x)?;
    Ok(Report {
        request: request(cli, "trace", file, json!({ "expression": expression })),
        results: json!({ "trace": value.to_string() }),
        warnings: vec![],
        plain: format!("{value}\n"),
        csv: None,
    })
}

fn cmd_partition(cli: &Cli, file: &Path, word: &str, depth: u32) -> Result<Report, CliError> {
    let aut = load(file)?;
    let w = aut.parse_word(word)?;
    let p = boundary_partition(&aut, &w, depth);
    let d = aut.alphabet();
    let display = |vs: &[Vertex]| -> Vec<String> { vs.iter().map(|v| v.display(d)).collect() };
    let plain = format!(
        "explored depth: {}\nfixed mass {}, subtree roots: {}\nfree mass {}, subtree roots: {}\nresidual mass {}, unresolved vertices: {}\n",
        p.explored_depth,
        p.fixed_mass,
        p.fixed_roots.len(),
        p.free_mass,
        p.free_roots.len(),
        p.residual_mass,
        p.unresolved.len(),
    );
    Ok(Report {
        request: request(
            cli,
            "partition",
            file,
            json!({ "word": word, "depth": depth }),
        ),
        results: json!({
            "explored_depth": p.explored_depth,
            "fixed_mass": p.fixed_mass.to_string(),
            "free_mass": p.free_mass.to_string(),
            "residual_mass": p.residual_mass.to_string(),
            "fixed_roots": display(&p.fixed_roots),
            "free_roots": display(&p.free_roots),
            "unresolved": display(&p.unresolved),
        }),
        warnings: vec![],
        plain,
        csv: None,
    })
}

fn cmd_free_check(cli: &Cli, file: &Path, length: usize) -> Result<Report, CliError> {
    let aut = load(file)?;
    let rep = freeness_report(&aut, length)?;
    let mut plain = format!(
        "checked {} distinct nontrivial element(s) of length <= {}\n",
        rep.checked_elements, rep.max_length
    );
    let mut witnesses = Vec::new();
    if rep.witnesses.is_empty() {
        plain.push_str("no positive-trace witnesses: consistent with an essentially free action\n");
    } else {
        for (w, q) in &rep.witnesses {
            plain.push_str(&format!("witness {}: trace {}\n", aut.render_word(w), q));
            witnesses.push(json!({ "word": aut.render_word(w), "trace": q.to_string() }));
        }
    }
    Ok(Report {
        request: request(cli, "free-check", file, json!({ "length": length })),
        results: json!({
            "max_length": rep.max_length,
            "checked_elements": rep.checked_elements,
            "witnesses": witnesses,
        }),
        warnings: vec![],
        plain,
        csv: None,
    })
}

enum WitnessKind {
    Stabilizer,
    Rist,
}

fn cmd_witness(
    cli: &Cli,
    file: &Path,
    vertex: &str,
    length: usize,
    kind: WitnessKind,
) -> Result<Report, CliError> {
    let aut = load(file)?;
    let v = parse_vertex(&aut, vertex)?;
    let d = aut.alphabet();
    let (sub, witness) = match kind {
        WitnessKind::Stabilizer => ("stab-search", aut.stabilizer_search(&v, length)),
        WitnessKind::Rist => ("rist", aut.rist_witness(&v, length)),
    };
    let rendered = witness.as_ref().map(|w| aut.render_word(w));
    let plain = match &rendered {
        Some(w) => format!("witness at {}: {}\n", v.display(d), w),
        None => format!("no witness at {} within length {}\n", v.display(d), length),
    };
    Ok(Report {
        request: request(
            cli,
            sub,
            file,
            json!({ "vertex": v.display(d), "length": length }),
        ),
        results: json!({ "vertex": v.display(d), "witness": rendered }),
        warnings: vec![],
        plain,
        csv: None,
    })
}

fn cmd_phi(cli: &Cli, file: &Path, expression: &str, n: u32) -> Result<Report, CliError> {
    let aut = load(file)?;
    let x = parse_expression(&aut, expression)?;
    let m = recursion_matrix(&aut, &x, n)?;
    let rendered = m.render(&aut);
    Ok(Report {
        request: request(
            cli,
            "phi",
            file,
            json!({ "expression": expression, "n": n }),
        ),
        results: json!({ "n": n, "dim": m.dim(), "matrix": rendered }),
        warnings: vec![],
        plain: format!("{rendered}\n"),
        csv: None,
    })
}

fn cmd_expect(
    cli: &Cli,
    file: &Path,
    n: u32,
    entries: &[String],
    search_len: usize,
) -> Result<Report, CliError> {
    let aut = load(file)?;
    let dim = aut.level_size(n).ok_or(LevelError::TooLarge {
        d: aut.alphabet(),
        n,
        cap: aut.level_cap,
    })? as usize;
    let mut b = RecursionMatrix::zero(n, dim);
    for raw in entries {
        let (i, j, x) = parse_entry(&aut, dim, raw)?;
        let cell = b.entry(i, j).add(&x, &aut);
        b.set_entry(i, j, cell);
    }
    let outcome = conditional_expectation(&aut, &b, search_len)?;
    let warnings: Vec<String> = outcome
        .exhausted
        .iter()
        .map(|(i, j, w)| {
            format!(
                "entry ({}, {}): no lift for `{}` within length {}; its contribution was dropped",
                i + 1,
                j + 1,
                w,
                search_len
            )
        })
        .collect();
    let rendered = outcome.matrix.render(&aut);
    Ok(Report {
        request: request(
            cli,
            "expect",
            file,
            json!({ "n": n, "entries": entries, "search_len": search_len }),
        ),
        results: json!({
            "n": n,
            "matrix": rendered,
            "exhausted": outcome
                .exhausted
                .iter()
                .map(|(i, j, w)| json!({ "i": i + 1, "j": j + 1, "word": w }))
                .collect::<Vec<_>>(),
        }),
        warnings,
        plain: format!("{rendered}\n"),
        csv: None,
    })
}

fn cmd_kernel(cli: &Cli, file: &Path, length: usize) -> Result<Report, CliError> {
    let aut = load(file)?;
    let c = kernel_search(&aut, length)?;
    let case_name = c.case.name();
    let generators: Vec<String> = c.generators.iter().map(|w| aut.render_word(w)).collect();
    let conjugator = c.conjugator.as_ref().map(|w| aut.render_word(w));
    let element = c.element.render(&aut);
    let plain = format!(
        "case: {}\ngenerators: {}\nconjugator: {}\nelement: {}\nterms: {}\n",
        case_name,
        generators.join(", "),
        conjugator.as_deref().unwrap_or("none"),
        element,
        c.element.support_size(),
    );
    Ok(Report {
        request: request(cli, "kernel", file, json!({ "length": length })),
        results: json!({
            "case": case_name,
            "generators": generators,
            "conjugator": conjugator,
            "element": element,
            "terms": c.element.support_size(),
        }),
        warnings: vec![],
        plain,
        csv: None,
    })
}

fn cmd_verify_kernel(
    cli: &Cli,
    file: &Path,
    expression: &str,
    power: usize,
) -> Result<Report, CliError> {
    let aut = load(file)?;
    let x = parse_expression(&aut, expression)?;
    let max_level = cli.max_level.unwrap_or(6);
    let verified = verify_kernel(&aut, &x, power, max_level)?;
    Ok(Report {
        request: request(
            cli,
            "verify-kernel",
            file,
            json!({ "expression": expression, "power": power, "max_level": max_level }),
        ),
        results: json!({ "verified": verified, "power": power, "max_level": max_level }),
        warnings: vec![],
        plain: format!("verified: {verified}\n"),
        csv: None,
    })
}

fn cmd_tensor(cli: &Cli, file: &Path, times: u32) -> Result<Report, CliError> {
    let mut aut = load(file)?;
    for _ in 0..times {
        aut = aut.tensor_extension()?;
    }
    let names: Vec<&str> = aut.states().iter().map(|s| s.name.as_str()).collect();
    let definition = aut.render_definition();
    Ok(Report {
        request: request(cli, "tensor", file, json!({ "times": times })),
        results: json!({ "times": times, "states": names, "definition": definition }),
        warnings: vec![],
        plain: definition.clone(),
        csv: None,
    })
}

fn cmd_wedderburn(cli: &Cli, file: &Path, n: u32, max_ball: usize) -> Result<Report, CliError> {
    let aut = load(file)?;
    let basis = algebra_closure(&aut, n, max_ball)?;
    let rep = block_dimensions(&aut, &basis, cli.seed)?;
    let blocks: Vec<String> = rep.blocks.iter().map(|(d, m)| format!("{d}x{m}")).collect();
    let plain = format!(
        "level {}: algebra dim {}, center dim {}, ball radius {}\nblocks: {}\n",
        rep.level,
        rep.algebra_dim,
        rep.center_dim,
        basis.ball_radius,
        blocks.join(", "),
    );
    let mut csv = String::from("n,d_i,m_i\n");
    for (d, m) in &rep.blocks {
        csv.push_str(&format!("{},{},{}\n", rep.level, d, m));
    }
    Ok(Report {
        request: request(
            cli,
            "wedderburn",
            file,
            json!({ "n": n, "max_ball": max_ball }),
        ),
        results: json!({
            "n": rep.level,
            "algebra_dim": rep.algebra_dim,
            "center_dim": rep.center_dim,
            "ball_radius": basis.ball_radius,
            "blocks": rep.blocks.iter().map(|(d, m)| json!({ "d": d, "m": m })).collect::<Vec<_>>(),
        }),
        warnings: vec![],
        plain,
        csv: Some(csv),
    })
}

fn cmd_trend(cli: &Cli, file: &Path, max_ball: usize) -> Result<Report, CliError> {
    let aut = load(file)?;
    let max_level = cli.max_level.unwrap_or(3);
    let t = dimension_trend(&aut, max_level, max_ball, cli.seed)?;
    let mut plain = String::new();
    let mut csv = String::from("n,max_d\n");
    let mut rows = Vec::new();
    for (n, dmax) in &t.max_block_by_level {
        plain.push_str(&format!("level {n}: max block dim {dmax}\n"));
        csv.push_str(&format!("{n},{dmax}\n"));
        rows.push(json!({ "n": n, "max_d": dmax }));
    }
    plain.push_str(&format!("verdict: {}\n", t.verdict));
    Ok(Report {
        request: request(
            cli,
            "trend",
            file,
            json!({ "max_level": max_level, "max_ball": max_ball }),
        ),
        results: json!({ "rows": rows, "verdict": t.verdict }),
        warnings: vec![],
        plain,
        csv: Some(csv),
    })
}
