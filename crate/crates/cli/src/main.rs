//! Command-line driver: every computation in the core crate exposed as a
//! reproducible report with text/JSON/CSV output and an exit-code contract:
//! `0` on success with all match flags true, `3` when a computed value
//! disagrees with its predicted value, `2` on usage errors. Known
//! discrepancy-by-design cases carry `"documented_open_question": true` so
//! CI can whitelist them while still failing loudly on new mismatches.

use std::io::Write;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tensormod_core::diagrams::{
    diagram_span_rank, enumerate_brauer_diagrams, enumerate_walled_diagrams, hom_space_dim,
    oo_sp_dimension_compare, DEFAULT_HOM_BUDGET,
};
use tensormod_core::exactlin::{read_matrix_text, Rational};
use tensormod_core::invariants::{
    gamma_ann_report, invariant_functionals, matching_functionals_rank, sigma_permutation_rank,
    tau_matrix_rank,
};
use tensormod_core::mackey::{
    block_interval_decomposition, density_solve, diag_as_commutator, finite_corank_quotient,
    grading_split, ideal_classify, verify_block_intervals, DensityInput, DiagonalSpec,
    MackeyElement, SplitGradedMatrix, TailBandMatrix,
};
use tensormod_core::partitions::factorial;
use tensormod_core::socle::{
    compare_with_stable_prediction, filtration, filtration_report_json, form_filtration,
};
use tensormod_core::tensorspace::{vector_from_json, Flavor as CoreFlavor, TensorTypeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Flavor {
    Gl,
    O,
    Sp,
}

impl From<Flavor> for CoreFlavor {
    fn from(f: Flavor) -> CoreFlavor {
        match f {
            Flavor::Gl => CoreFlavor::Gl,
            Flavor::O => CoreFlavor::O,
            Flavor::Sp => CoreFlavor::Sp,
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
struct OutputOpts {
    /// Emit the report as a single JSON object.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit the report as CSV (header row + value row).
    #[arg(long, global = true)]
    csv: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<std::path::PathBuf>,
}

#[derive(Parser, Debug)]
#[command(
    name = "tensormod",
    about = "Exact computations on finite-rank tensor spaces, diagram algebras and banded matrix algebras",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Invariant functional dimensions and spanning-family ranks.
    Invariants {
        #[arg(long, value_enum)]
        flavor: Flavor,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long = "N")]
        rank: usize,
    },
    /// Annihilator-invariant decomposition of the dual tensor space.
    GammaAnn {
        #[arg(long, value_enum)]
        flavor: Flavor,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long = "N")]
        rank: usize,
    },
    /// Contraction filtration, layers and stable predictions.
    Socle {
        #[arg(long, value_enum)]
        flavor: Flavor,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long = "N")]
        rank: usize,
    },
    /// Dimension of the equivariant map space between two tensor spaces.
    Homdim {
        #[arg(long, value_enum)]
        flavor: Flavor,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        n: usize,
        #[arg(long = "to-m", default_value_t = 0)]
        to_m: usize,
        #[arg(long = "to-n", default_value_t = 0)]
        to_n: usize,
        #[arg(long = "N")]
        rank: usize,
        /// Maximum dim(source)·dim(target) for the exact elimination.
        #[arg(long, value_name = "CELLS", default_value_t = DEFAULT_HOM_BUDGET)]
        budget: usize,
    },
    /// Brauer-side dimension tables, including the o-vs-sp comparison.
    Brauer {
        #[arg(long)]
        r: usize,
        #[arg(long = "N")]
        rank: usize,
        /// Restrict to one flavor (default compares o against sp).
        #[arg(long, value_enum)]
        flavor: Option<Flavor>,
        #[arg(long, value_name = "CELLS", default_value_t = DEFAULT_HOM_BUDGET)]
        budget: usize,
    },
    /// Banded-matrix algebra operations.
    Mackey {
        #[command(subcommand)]
        op: MackeyOp,
    },
    /// Match a column-finite action on finitely many vectors by a banded
    /// matrix.
    Density {
        /// Banded matrix JSON input.
        #[arg(long = "in", value_name = "FILE", conflicts_with = "matrix_in")]
        input: Option<std::path::PathBuf>,
        /// Truncated matrix in the `rows cols` / `row col num/den` text
        /// format.
        #[arg(long = "matrix-in", value_name = "FILE")]
        matrix_in: Option<std::path::PathBuf>,
        /// JSON file: array of vectors, each an array of num/den strings.
        #[arg(long, value_name = "FILE")]
        vectors: std::path::PathBuf,
    },
    /// Run a grid of jobs from a JSON-lines config file.
    Sweep {
        #[arg(long, value_name = "FILE")]
        config: std::path::PathBuf,
        /// Number of jobs to run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Subcommand, Debug)]
enum MackeyOp {
    /// Classify the smallest ideal containing a banded matrix.
    Classify {
        #[arg(long = "in", value_name = "FILE")]
        input: std::path::PathBuf,
    },
    /// Realize a prescribed diagonal as a commutator on a truncation.
    Commutator {
        /// Comma-separated leading diagonal values.
        #[arg(long, default_value = "")]
        prefix: String,
        /// Comma-separated repeating tail values.
        #[arg(long, default_value = "0")]
        cycle: String,
        #[arg(long)]
        trunc: usize,
    },
    /// Split a split-form matrix into graded parts against diag(1/2,-1/2).
    Grading {
        #[arg(long = "in", value_name = "FILE")]
        input: std::path::PathBuf,
    },
    /// Finite-corank quotient class of a banded matrix truncation.
    Quotient {
        #[arg(long = "in", value_name = "FILE")]
        input: std::path::PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        trunc: usize,
    },
    /// Greedy block-interval decomposition of a banded matrix truncation.
    Intervals {
        #[arg(long = "in", value_name = "FILE")]
        input: std::path::PathBuf,
        #[arg(long)]
        trunc: usize,
    },
}

/// Everything a finished job reports.
struct Report {
    job: serde_json::Value,
    body: serde_json::Value,
    all_match: bool,
    documented_open_question: bool,
}

impl Report {
    fn to_json(&self, duration_ms: u128) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("job".into(), self.job.clone());
        if let serde_json::Value::Object(body) = &self.body {
            for (k, v) in body {
                obj.insert(k.clone(), v.clone());
            }
        }
        obj.insert("match".into(), self.all_match.into());
        if self.documented_open_question {
            obj.insert("documented_open_question".into(), true.into());
        }
        obj.insert("duration_ms".into(), (duration_ms as u64).into());
        serde_json::Value::Object(obj)
    }
}

fn flavor_json(f: Flavor) -> &'static str {
    match f {
        Flavor::Gl => "gl",
        Flavor::O => "o",
        Flavor::Sp => "sp",
    }
}

fn run_invariants(flavor: Flavor, m: usize, n: usize, rank: usize) -> anyhow::Result<Report> {
    let core: CoreFlavor = flavor.into();
    let spec = TensorTypeSpec::new(core, rank, m, n)?;
    let job = serde_json::json!({
        "cmd": "invariants", "flavor": flavor_json(flavor), "m": m, "n": n, "N": rank,
    });
    match core {
        CoreFlavor::Gl => {
            let dim = invariant_functionals(&spec).space.dim() as u64;
            let predicted = if m == n { factorial(m) } else { 0 };
            let tau = if m == n {
                Some(tau_matrix_rank(&spec)? as u64)
            } else {
                None
            };
            let all_match = dim == predicted && tau.is_none_or(|t| t == factorial(m));
            let mut body = serde_json::json!({ "dim": dim, "predicted_dim": predicted });
            if let Some(t) = tau {
                body["tau_rank"] = t.into();
            }
            Ok(Report {
                job,
                body,
                all_match,
                documented_open_question: false,
            })
        }
        CoreFlavor::O | CoreFlavor::Sp => {
            let t = m;
            let dim = invariant_functionals(&spec).space.dim() as u64;
            let matching = matching_functionals_rank(&spec)? as u64;
            let predicted: u64 = if t.is_multiple_of(2) {
                (0..t / 2).map(|i| (2 * i + 1) as u64).product()
            } else {
                0
            };
            let sigma = if t.is_multiple_of(2) && t > 0 {
                Some(sigma_permutation_rank(&spec)? as u64)
            } else {
                None
            };
            let all_match = dim == predicted && matching == predicted;
            // the lone extra invariant at the o-flavor boundary d = t is the
            // determinant functional; flag it as documented
            let documented = !all_match
                && core == CoreFlavor::O
                && 2 * rank == t
                && dim == predicted + 1
                && matching == predicted;
            let mut body = serde_json::json!({
                "dim": dim,
                "matching_rank": matching,
                "predicted_dim": predicted,
            });
            if let Some(s) = sigma {
                body["sigma_rank"] = s.into();
            }
            Ok(Report {
                job,
                body,
                all_match,
                documented_open_question: documented,
            })
        }
    }
}

fn run_gamma_ann(
    flavor: Flavor,
    m: usize,
    n: usize,
    d: usize,
    rank: usize,
) -> anyhow::Result<Report> {
    let report = gamma_ann_report(flavor.into(), m, n, d, rank)?;
    let all_match = report.agrees_paper && report.dim_consistent;
    // mismatches explained by the matching-count reading of the spanning
    // family are the documented open question; anything else is a real red
    let documented = !report.agrees_paper && report.agrees_fft && report.dim_consistent;
    Ok(Report {
        job: serde_json::json!({
            "cmd": "gamma-ann", "flavor": flavor_json(flavor), "m": m, "n": n, "d": d, "N": rank,
        }),
        body: report.to_json(),
        all_match,
        documented_open_question: documented,
    })
}

fn run_socle(flavor: Flavor, m: usize, n: usize, rank: usize) -> anyhow::Result<Report> {
    let core: CoreFlavor = flavor.into();
    let spec = TensorTypeSpec::new(core, rank, m, n)?;
    let job = serde_json::json!({
        "cmd": "socle", "flavor": flavor_json(flavor), "m": m, "n": n, "N": rank,
    });
    let (f, comparison) = match core {
        CoreFlavor::Gl => {
            let f = filtration(&spec)?;
            let c = compare_with_stable_prediction(&f)?;
            (f, Some(c))
        }
        _ => (form_filtration(&spec)?, None),
    };
    let chain_ok = f.verify_chain();
    let stable_ok = f.verify_stability().is_ok();
    let exact_ok = f.verify_exactness_bookkeeping();
    let layers_ok = comparison.as_ref().is_none_or(|c| c.all_match);
    let mut body = filtration_report_json(&f, comparison.as_ref());
    body["chain_verified"] = chain_ok.into();
    body["stability_verified"] = stable_ok.into();
    body["exactness_verified"] = exact_ok.into();
    Ok(Report {
        job,
        body,
        all_match: chain_ok && stable_ok && exact_ok && layers_ok,
        documented_open_question: false,
    })
}

fn run_homdim(
    flavor: Flavor,
    m: usize,
    n: usize,
    to_m: usize,
    to_n: usize,
    rank: usize,
    budget: usize,
) -> anyhow::Result<Report> {
    let core: CoreFlavor = flavor.into();
    let source = TensorTypeSpec::new(core, rank, m, n)?;
    let target = TensorTypeSpec::new(core, rank, to_m, to_n)?;
    let hom = hom_space_dim(&source, &target, budget)?;
    let span = diagram_span_rank(&source, &target)?;
    let count = match core {
        CoreFlavor::Gl => enumerate_walled_diagrams(m, n, to_m, to_n)?.len(),
        _ => enumerate_brauer_diagrams(m, to_m)?.len(),
    };
    let all_match = hom == span;
    let documented = !all_match && core == CoreFlavor::O && hom == span + 1;
    Ok(Report {
        job: serde_json::json!({
            "cmd": "homdim", "flavor": flavor_json(flavor), "m": m, "n": n,
            "to_m": to_m, "to_n": to_n, "N": rank, "budget": budget,
        }),
        body: serde_json::json!({
            "hom_dim": hom,
            "diagram_span_rank": span,
            "diagram_count": count,
        }),
        all_match,
        documented_open_question: documented,
    })
}

fn run_brauer(
    r: usize,
    rank: usize,
    flavor: Option<Flavor>,
    budget: usize,
) -> anyhow::Result<Report> {
    match flavor {
        Some(f) if f != Flavor::Gl => {
            let core: CoreFlavor = f.into();
            let mut entries = Vec::new();
            let mut all = true;
            for a in 0..=r {
                for b in 0..=r {
                    if (a + b) % 2 != 0 {
                        continue;
                    }
                    let s = TensorTypeSpec::new(core, rank, a, 0)?;
                    let t = TensorTypeSpec::new(core, rank, b, 0)?;
                    let hom = hom_space_dim(&s, &t, budget)?;
                    let span = diagram_span_rank(&s, &t)?;
                    all &= hom == span;
                    entries.push(serde_json::json!({
                        "from": a, "to": b, "hom_dim": hom, "span_rank": span,
                    }));
                }
            }
            Ok(Report {
                job: serde_json::json!({
                    "cmd": "brauer", "flavor": flavor_json(f), "r": r, "N": rank,
                }),
                body: serde_json::json!({ "entries": entries }),
                all_match: all,
                documented_open_question: false,
            })
        }
        _ => {
            let report = oo_sp_dimension_compare(r, rank, budget)?;
            // at the boundary 2N = a+b the orthogonal side exceeds sp by the
            // determinant operator; exactly that mismatch is documented
            let documented = !report.all_equal
                && report.entries.iter().all(|e| {
                    e.dim_o == e.dim_sp
                        || (e.from_degree + e.to_degree == 2 * rank && e.dim_o == e.dim_sp + 1)
                });
            let all_match = report.all_equal;
            Ok(Report {
                job: serde_json::json!({ "cmd": "brauer", "r": r, "N": rank }),
                body: serde_json::to_value(&report)?,
                all_match,
                documented_open_question: documented,
            })
        }
    }
}

fn parse_rational_list(text: &str) -> anyhow::Result<Vec<Rational>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| tensormod_core::exactlin::parse_rational(t).map_err(|e| anyhow!("{e}")))
        .collect()
}

fn load_json(path: &std::path::Path) -> anyhow::Result<serde_json::Value> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("bad JSON in {}", path.display()))
}

fn matrix_to_json(m: &tensormod_core::exactlin::SparseMatrix) -> serde_json::Value {
    serde_json::to_value(m).expect("matrix serialization")
}

fn run_mackey(op: &MackeyOp) -> anyhow::Result<Report> {
    match op {
        MackeyOp::Classify { input } => {
            let band = TailBandMatrix::from_json(&load_json(input)?)?;
            let label = ideal_classify(&MackeyElement::Band(band));
            Ok(Report {
                job: serde_json::json!({
                    "cmd": "mackey-classify", "in": input.display().to_string(),
                }),
                body: serde_json::json!({ "label": label.to_string() }),
                all_match: true,
                documented_open_question: false,
            })
        }
        MackeyOp::Commutator {
            prefix,
            cycle,
            trunc,
        } => {
            let prefix = parse_rational_list(prefix)?;
            let mut cycle = parse_rational_list(cycle)?;
            if cycle.is_empty() {
                cycle.push(Rational::from_integer(0.into()));
            }
            let s = DiagonalSpec::new(prefix.clone(), cycle.clone())?;
            let (x, y, block) = diag_as_commutator(&s, *trunc)?;
            let comm = x.commutator(&y);
            let verified = (0..block).all(|i| {
                (0..block).all(|j| {
                    let expect = if i == j {
                        s.value(i)
                    } else {
                        Rational::from_integer(0.into())
                    };
                    comm.entry(i, j) == expect
                })
            });
            Ok(Report {
                job: serde_json::json!({
                    "cmd": "mackey-commutator", "trunc": trunc,
                    "prefix": prefix.iter().map(tensormod_core::exactlin::format_rational).collect::<Vec<_>>(),
                    "cycle": cycle.iter().map(tensormod_core::exactlin::format_rational).collect::<Vec<_>>(),
                }),
                body: serde_json::json!({
                    "x": matrix_to_json(&x),
                    "y": matrix_to_json(&y),
                    "verified_block": block,
                    "verified": verified,
                }),
                all_match: verified,
                documented_open_question: false,
            })
        }
        MackeyOp::Grading { input } => {
            let js = load_json(input)?;
            let flavor = match js["flavor"].as_str() {
                Some("o") => CoreFlavor::O,
                Some("sp") => CoreFlavor::Sp,
                other => return Err(anyhow!("bad flavor {other:?} in split matrix JSON")),
            };
            let block = |key: &str| -> anyhow::Result<tensormod_core::exactlin::SparseMatrix> {
                serde_json::from_value(js[key].clone()).with_context(|| format!("bad block {key}"))
            };
            let x = SplitGradedMatrix::new(flavor, block("a")?, block("b")?, block("c")?)?;
            let (minus, zero, plus) = grading_split(&x)?;
            Ok(Report {
                job: serde_json::json!({
                    "cmd": "mackey-grading", "in": input.display().to_string(),
                }),
                body: serde_json::json!({
                    "minus": matrix_to_json(&minus.assemble()),
                    "zero": matrix_to_json(&zero.assemble()),
                    "plus": matrix_to_json(&plus.assemble()),
                    "verified": true,
                }),
                all_match: true,
                documented_open_question: false,
            })
        }
        MackeyOp::Quotient { input, d, trunc } => {
            let band = TailBandMatrix::from_json(&load_json(input)?)?;
            let t = band.truncate(*trunc);
            let q = finite_corank_quotient(&t, *d)?;
            Ok(Report {
                job: serde_json::json!({
                    "cmd": "mackey-quotient", "in": input.display().to_string(),
                    "d": d, "trunc": trunc,
                }),
                body: serde_json::json!({
                    "head": matrix_to_json(&q.head),
                    "rows_beyond": matrix_to_json(&q.rows_beyond),
                    "cols_beyond": matrix_to_json(&q.cols_beyond),
                    "is_zero_class": q.is_zero(),
                }),
                all_match: true,
                documented_open_question: false,
            })
        }
        MackeyOp::Intervals { input, trunc } => {
            let band = TailBandMatrix::from_json(&load_json(input)?)?;
            let seq = block_interval_decomposition(&band, *trunc);
            let verified = verify_block_intervals(&band.truncate(*trunc), &seq);
            Ok(Report {
                job: serde_json::json!({
                    "cmd": "mackey-intervals", "in": input.display().to_string(), "trunc": trunc,
                }),
                body: serde_json::json!({ "sequence": seq, "verified": verified }),
                all_match: verified,
                documented_open_question: false,
            })
        }
    }
}

fn run_density(
    input: &Option<std::path::PathBuf>,
    matrix_in: &Option<std::path::PathBuf>,
    vectors: &std::path::Path,
) -> anyhow::Result<Report> {
    let x = match (input, matrix_in) {
        (Some(p), None) => DensityInput::Band(TailBandMatrix::from_json(&load_json(p)?)?),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read {}", p.display()))?;
            DensityInput::Truncated(read_matrix_text(&text)?)
        }
        _ => return Err(anyhow!("provide exactly one of --in or --matrix-in")),
    };
    let vecs_json = load_json(vectors)?;
    let arr = vecs_json
        .as_array()
        .ok_or_else(|| anyhow!("vectors file must hold a JSON array of vectors"))?;
    let vecs: Vec<Vec<Rational>> = arr
        .iter()
        .map(|v| vector_from_json(v).map_err(|e| anyhow!("{e}")))
        .collect::<anyhow::Result<_>>()?;
    let j = density_solve(&x, &vecs)?;
    let verified = vecs
        .iter()
        .all(|r| DensityInput::Band(j.clone()).apply_dense(r) == x.apply_dense(r));
    Ok(Report {
        job: serde_json::json!({ "cmd": "density", "vectors": vecs.len() }),
        body: serde_json::json!({
            "bandwidth": j.bandwidth(),
            "solution": j.to_json(),
            "verified": verified,
        }),
        all_match: verified,
        documented_open_question: false,
    })
}

/// One line of a sweep config: `{"cmd": "...", ...params}`.
fn run_sweep_job(line: &serde_json::Value) -> anyhow::Result<Report> {
    let cmd = line["cmd"]
        .as_str()
        .ok_or_else(|| anyhow!("sweep job needs a cmd field"))?;
    let flavor = || -> anyhow::Result<Flavor> {
        match line["flavor"].as_str() {
            Some("gl") => Ok(Flavor::Gl),
            Some("o") => Ok(Flavor::O),
            Some("sp") => Ok(Flavor::Sp),
            other => Err(anyhow!("bad flavor {other:?}")),
        }
    };
    let num = |key: &str| -> usize { line[key].as_u64().unwrap_or(0) as usize };
    let budget = || {
        if num("budget") == 0 {
            DEFAULT_HOM_BUDGET
        } else {
            num("budget")
        }
    };
    match cmd {
        "invariants" => run_invariants(flavor()?, num("m"), num("n"), num("N")),
        "gamma-ann" => run_gamma_ann(flavor()?, num("m"), num("n"), num("d"), num("N")),
        "socle" => run_socle(flavor()?, num("m"), num("n"), num("N")),
        "homdim" => run_homdim(
            flavor()?,
            num("m"),
            num("n"),
            num("to_m"),
            num("to_n"),
            num("N"),
            budget(),
        ),
        "brauer" => {
            let fl = match line["flavor"].as_str() {
                Some("o") => Some(Flavor::O),
                Some("sp") => Some(Flavor::Sp),
                _ => None,
            };
            run_brauer(num("r"), num("N"), fl, budget())
        }
        other => Err(anyhow!("unknown sweep cmd {other:?}")),
    }
}

fn run_sweep(config: &std::path::Path, jobs: usize) -> anyhow::Result<(Vec<String>, bool)> {
    let text = std::fs::read_to_string(config)
        .with_context(|| format!("cannot read {}", config.display()))?;
    let lines: Vec<serde_json::Value> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).with_context(|| format!("bad config line {l:?}")))
        .collect::<anyhow::Result<_>>()?;
    let n = lines.len();
    let results: Mutex<Vec<Option<(String, bool)>>> = Mutex::new(vec![None; n]);
    let next: Mutex<usize> = Mutex::new(0);
    let workers = jobs.max(1).min(n.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    if *guard >= n {
                        break;
                    }
                    let i = *guard;
                    *guard += 1;
                    i
                };
                let started = Instant::now();
                let outcome = match run_sweep_job(&lines[idx]) {
                    Ok(report) => {
                        let ok = report.all_match;
                        (
                            report.to_json(started.elapsed().as_millis()).to_string(),
                            ok,
                        )
                    }
                    Err(e) => (
                        serde_json::json!({
                            "job": lines[idx],
                            "error": e.to_string(),
                        })
                        .to_string(),
                        false,
                    ),
                };
                results.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });
    let collected = results.into_inner().unwrap();
    let mut out = Vec::with_capacity(n);
    let mut all_ok = true;
    for entry in collected {
        let (line, ok) = entry.expect("all jobs completed");
        all_ok &= ok;
        out.push(line);
    }
    Ok((out, all_ok))
}

/// Flatten a JSON object into CSV header/value rows (nested values are
/// serialized inline).
fn to_csv(v: &serde_json::Value) -> String {
    let mut header = Vec::new();
    let mut row = Vec::new();
    if let serde_json::Value::Object(map) = v {
        for (k, val) in map {
            header.push(k.clone());
            let cell = match val {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            row.push(format!("\"{}\"", cell.replace('"', "\"\"")));
        }
    }
    format!("{}\n{}\n", header.join(","), row.join(","))
}

fn render_text(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("render") + "\n"
}

fn emit(output: &OutputOpts, text: String) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version requests exit 0; real usage errors exit 2
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let started = Instant::now();
    let result: anyhow::Result<(String, bool)> = (|| match &cli.command {
        Command::Sweep { config, jobs } => {
            let (lines, all_ok) = run_sweep(config, *jobs)?;
            Ok((lines.join("\n") + "\n", all_ok))
        }
        other => {
            let report = match other {
                Command::Invariants { flavor, m, n, rank } => {
                    run_invariants(*flavor, *m, *n, *rank)?
                }
                Command::GammaAnn {
                    flavor,
                    m,
                    n,
                    d,
                    rank,
                } => run_gamma_ann(*flavor, *m, *n, *d, *rank)?,
                Command::Socle { flavor, m, n, rank } => run_socle(*flavor, *m, *n, *rank)?,
                Command::Homdim {
                    flavor,
                    m,
                    n,
                    to_m,
                    to_n,
                    rank,
                    budget,
                } => run_homdim(*flavor, *m, *n, *to_m, *to_n, *rank, *budget)?,
                Command::Brauer {
                    r,
                    rank,
                    flavor,
                    budget,
                } => run_brauer(*r, *rank, *flavor, *budget)?,
                Command::Mackey { op } => run_mackey(op)?,
                Command::Density {
                    input,
                    matrix_in,
                    vectors,
                } => run_density(input, matrix_in, vectors)?,
                Command::Sweep { .. } => unreachable!(),
            };
            let ok = report.all_match;
            let json = report.to_json(started.elapsed().as_millis());
            let text = if cli.output.json {
                json.to_string() + "\n"
            } else if cli.output.csv {
                to_csv(&json)
            } else {
                render_text(&json)
            };
            Ok((text, ok))
        }
    })();
    match result {
        Ok((text, all_ok)) => {
            if emit(&cli.output, text).is_err() {
                return ExitCode::from(2);
            }
            if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
