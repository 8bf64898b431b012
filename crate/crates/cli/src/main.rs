use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tjurina_core::detvar::{check_determinantal, minors, strata_report};
use tjurina_core::format::parse_presentation_file;
use tjurina_core::ideal::dimension_of;
use tjurina_core::modellab::{model_check, ModelSpec};
use tjurina_core::resolve::{parse_script_file, run_script, run_transform, TransformOptions};
use tjurina_core::smooth::smoothness_report;
use tjurina_core::tjurina::{lci_criteria, ChartIndex, Side};
use tjurina_core::{parse_poly, DetPresentation, GroebnerLimits, Polynomial, VarSet};

/// Determinantal singularities, Tjurina transforms and resolution scripts.
#[derive(Parser)]
#[command(name = "tjurina", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Cap on S-pairs per Gröbner computation.
    #[arg(long, global = true, default_value_t = 50_000)]
    max_pairs: usize,
    /// Cap on the degree of any basis element.
    #[arg(long, global = true, default_value_t = 40)]
    max_degree: u32,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// List the nonzero t×t minors.
    Minors {
        file: PathBuf,
        /// Minor size, defaults to the file's t.
        #[arg(long)]
        t: Option<usize>,
    },
    /// Expected codimension, strata dimensions and the chart criteria.
    Check { file: PathBuf },
    /// One chart of the Tjurina transform.
    Chart {
        file: PathBuf,
        /// Chart index set, 1-based and comma separated (empty for t = 1).
        #[arg(
            long = "I",
            value_name = "LIST",
            allow_hyphen_values = true,
            default_value = ""
        )]
        index: String,
        /// Use the transpose side.
        #[arg(long)]
        transpose: bool,
        /// Solve linear generators.
        #[arg(long)]
        eliminate: bool,
        /// Saturate by this polynomial in the remaining variables.
        #[arg(long, value_name = "POLY")]
        saturate: Option<String>,
    },
    /// Dimension of the determinantal variety.
    Dim { file: PathBuf },
    /// Jacobian criterion on a presentation, or on explicit generators.
    Smooth {
        file: Option<PathBuf>,
        /// Variable names, space separated (with --gen).
        #[arg(long)]
        vars: Option<String>,
        /// A generator; repeat for more.
        #[arg(long = "gen", value_name = "POLY")]
        gens: Vec<String>,
    },
    /// Run a resolution script.
    Resolve {
        script: PathBuf,
        /// Also write the structured report here.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Randomized property suite on the linear model.
    ModelCheck {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Skip the Gröbner check of the dimension formula.
        #[arg(long)]
        no_dimension: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &PathBuf) -> Result<DetPresentation> {
    parse_presentation_file(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.trim_matches(|c| c == '{' || c == '}')
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .with_context(|| format!("bad chart index `{s}`"))
        })
        .collect()
}

fn lines(ps: &[Polynomial]) -> Vec<String> {
    ps.iter().map(ToString::to_string).collect()
}

/// `Ok(true)` when every check the command makes passes.
fn run(cli: Cli) -> Result<bool> {
    let limits = GroebnerLimits {
        max_pairs: cli.global.max_pairs,
        max_degree: cli.global.max_degree,
    };
    let as_json = cli.global.json;
    match cli.command {
        Command::Minors { file, t } => {
            let p = load(&file)?;
            let t = t.unwrap_or(p.t());
            if t == 0 || t > p.m().min(p.n()) {
                bail!("t = {t} is out of range for a {}x{} matrix", p.m(), p.n());
            }
            let ms: Vec<Polynomial> = minors(p.matrix(), t)?
                .into_iter()
                .filter(|q| !q.is_zero())
                .collect();
            if as_json {
                println!("{}", json!({ "t": t, "minors": lines(&ms) }));
            } else {
                for q in &ms {
                    println!("{q}");
                }
            }
            Ok(true)
        }
        Command::Check { file } => {
            let p = load(&file)?;
            let det = check_determinantal(&p, &limits)?;
            let strata = strata_report(&p, &limits)?;
            let x2_nonempty = p.t() >= 2 && strata.dims[1] >= 0;
            // The criteria presuppose an EIDS, so they are only reported for
            // presentations of the expected codimension.
            let criteria = det.verdict.then(|| {
                lci_criteria(
                    p.m(),
                    p.n(),
                    p.t(),
                    p.ambient_dim(),
                    strata.dims[0],
                    x2_nonempty,
                )
            });
            if as_json {
                println!(
                    "{}",
                    json!({ "determinantal": det, "strata": strata, "criteria": criteria })
                );
            } else {
                println!(
                    "type ({}, {}, {}) in {} variables",
                    p.m(),
                    p.n(),
                    p.t(),
                    p.ambient_dim()
                );
                println!(
                    "codimension {} (expected {}): {}",
                    det.codim,
                    det.expected_codim,
                    if det.verdict {
                        "determinantal"
                    } else {
                        "NOT determinantal"
                    }
                );
                for (s, d) in strata.dims.iter().enumerate() {
                    println!("dim V({}x{} minors) = {d}", s + 1, s + 1);
                }
                println!(
                    "Tjurina transform is determinantal: {}",
                    strata.tilde_is_determinantal
                );
                println!(
                    "Tjurina transform equals its strict version: {}",
                    strata.tilde_equals_tjur
                );
                println!(
                    "transpose transform is determinantal: {}",
                    strata.transpose_tilde_is_determinantal
                );
                println!(
                    "transpose transform equals its strict version: {}",
                    strata.transpose_tilde_equals_tjur
                );
                if let Some(c) = &criteria {
                    println!(
                        "Tjurina transform is a complete intersection: {}",
                        c.tjur_lci
                    );
                    println!(
                        "transpose transform is a complete intersection: {}",
                        c.transpose_lci
                    );
                }
            }
            Ok(det.verdict)
        }
        Command::Chart {
            file,
            index,
            transpose,
            eliminate,
            saturate,
        } => {
            let p = load(&file)?;
            let side = if transpose { Side::Column } else { Side::Row };
            let chart = ChartIndex::new(&parse_list(&index)?, side)?;
            let opts = TransformOptions {
                eliminate,
                saturate_by: saturate,
                smoothness: true,
            };
            let r = run_transform(&p, &chart, &opts, &limits)?;
            let vars = r.chart.vars();
            let ledger: Vec<String> = r
                .chart
                .ledger()
                .iter()
                .map(|(v, g)| format!("{} = {}", vars.name(*v), &Polynomial::var(vars, *v) - g))
                .collect();
            if as_json {
                println!(
                    "{}",
                    json!({
                        "chart": chart.to_string(),
                        "vars": r.reduced_vars.names(),
                        "eliminated": ledger,
                        "generators": lines(&r.generators),
                        "smoothness": r.smoothness,
                    })
                );
            } else {
                println!("chart {chart} in ({})", r.reduced_vars.names().join(", "));
                for l in &ledger {
                    println!("eliminated {l}");
                }
                for g in &r.generators {
                    println!("0 = {g}");
                }
                if let Some(s) = &r.smoothness {
                    println!("{}", describe(s));
                }
            }
            Ok(true)
        }
        Command::Dim { file } => {
            let p = load(&file)?;
            let d = dimension_of(p.vars(), &p.ideal(), &limits)?;
            if as_json {
                println!("{}", json!({ "dim": d, "ambient": p.ambient_dim() }));
            } else {
                println!("{d}");
            }
            Ok(true)
        }
        Command::Smooth { file, vars, gens } => {
            let (vs, gs) = match (file, vars) {
                (Some(f), None) if gens.is_empty() => {
                    let p = load(&f)?;
                    (p.vars().clone(), p.ideal())
                }
                (None, Some(v)) if !gens.is_empty() => {
                    let vs = VarSet::new(v.split_whitespace())?;
                    let gs = gens
                        .iter()
                        .map(|g| parse_poly(g, &vs))
                        .collect::<Result<Vec<_>, _>>()?;
                    (vs, gs)
                }
                _ => bail!("give either a presentation file or --vars with at least one --gen"),
            };
            let r = smoothness_report(&vs, &gs, &limits)?;
            if as_json {
                println!("{}", serde_json::to_string(&r)?);
            } else {
                println!("{}", describe(&r));
            }
            Ok(true)
        }
        Command::Resolve { script, report } => {
            let s = parse_script_file(&script)
                .with_context(|| format!("reading {}", script.display()))?;
            let r = run_script(&s, &limits);
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&r)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if as_json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                print!("{r}");
            }
            Ok(r.passed())
        }
        Command::ModelCheck {
            m,
            n,
            t,
            seed,
            trials,
            no_dimension,
        } => {
            let spec = ModelSpec::new(m, n, t)?;
            let r = model_check(&spec, seed, trials, !no_dimension, &limits)?;
            if as_json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                println!("model ({m}, {n}, {t}), seed {seed}, {trials} trials");
                for p in &r.properties {
                    println!("{:<18} {} passed, {} failed", p.name, p.passed, p.failed);
                }
                if let Some(d) = &r.dimension {
                    println!(
                        "minor ideal dimension {} (formula {})",
                        d.computed, d.expected
                    );
                }
                println!("witness: {:?}", r.witness);
                println!(
                    "{}",
                    if r.all_passed() {
                        "all properties hold"
                    } else {
                        "FAILURES"
                    }
                );
            }
            Ok(r.all_passed())
        }
    }
}

fn describe(r: &tjurina_core::smooth::SmoothnessReport) -> String {
    use tjurina_core::smooth::Verdict;
    match &r.verdict {
        Verdict::Empty => "empty".into(),
        Verdict::Smooth => format!("smooth (dimension {})", r.dim),
        Verdict::SingularAt { points, complete } => {
            let pts: Vec<String> = points
                .iter()
                .map(|p| {
                    format!(
                        "({})",
                        p.iter()
                            .map(ToString::to_string)
                            .collect::<Vec<_>>()
                            .join(", ")
                    )
                })
                .collect();
            let extra = if *complete {
                ""
            } else {
                " plus irrational points"
            };
            format!("singular at {}{extra}", pts.join(" "))
        }
        Verdict::SingularPositiveDim { dim } => format!("singular locus of dimension {dim}"),
    }
}
