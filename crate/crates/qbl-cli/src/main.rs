//! Command-line front end: condition checks, Gaussian constants, inequality
//! probes, source splitting, blow-up counterexamples, and sandwich brackets.
//!
//! Exit codes: 0 = success or feasible/converged outcome; 1 = a mathematical
//! finding (violated condition, diverging constant, certified blow-up);
//! 2 = usage or input error. Reports are byte-deterministic for a fixed
//! argv and seed, independent of worker count.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use qbl_core::conditions::{check_dimension, DimensionStatus, LatticeConfig, Variant};
use qbl_core::datum::QuiverDatum;
use qbl_core::gaussian::{
    optimize_gaussian_constant, ratio_functions_from_argmax, sandwich_bounds, Method, OptStatus,
    OptimizerConfig,
};
use qbl_core::io::{read_datum_file, read_witness_file, serialize_datum};
use qbl_core::numerics::exact::{rat_frac, rat_from_f64, rat_int, rational_to_string, RatMatrix};
use qbl_core::verifier::{
    counterexample_from_witness, cross_boxes, ratio_boxes_chain, ratio_gaussian,
    ratio_monte_carlo, ratio_powerlaw, ParamSweep, TestFunction,
};

#[derive(Parser)]
#[command(name = "qbl", version, about = "Brascamp-Lieb data on bipartite quivers")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for all randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Gradient-norm tolerance for the optimizer.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Iteration cap per optimizer restart.
    #[arg(long, global = true)]
    max_iters: Option<usize>,

    /// Number of optimizer restarts (the first starts at the identity).
    #[arg(long, global = true)]
    restarts: Option<usize>,

    /// Write the report here instead of stdout (stdout gets the summary).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the scaling condition and a dimension condition.
    Check {
        datum: PathBuf,
        /// Which dimension count to search for violations.
        #[arg(long, value_enum)]
        variant: VariantArg,
        /// Cap on the candidate-subspace lattice per source.
        #[arg(long)]
        lattice_max: Option<usize>,
    },
    /// Compute the Gaussian constant by log-determinant maximization.
    Gaussian {
        datum: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Fp)]
        method: MethodArg,
    },
    /// Evaluate both sides of the inequality on a concrete function family.
    Verify {
        datum: PathBuf,
        #[arg(long, value_enum)]
        functions: FunctionsArg,
        /// Family parameter: chain breadth N (boxes, mc) or decay p (powerlaw).
        #[arg(long)]
        param: Option<f64>,
        /// Monte Carlo sample budget.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Split the datum into one subspace quiver per source.
    Split { datum: PathBuf },
    /// Grow a blow-up family from a dimension-condition witness.
    Counterexample {
        datum: PathBuf,
        /// Witness file: one subspace per source.
        #[arg(long)]
        witness: PathBuf,
        /// Outer radius sweep "A:B", log-spaced.
        #[arg(long = "R")]
        radius_range: String,
        /// Fixed inner radius in (0, 1].
        #[arg(long = "r", default_value_t = 1.0)]
        inner_radius: f64,
    },
    /// Bracket the shared-function constant by per-arrow constants.
    Sandwich { datum: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    PerArrow,
    Cd,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Grad,
    Fp,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionsArg {
    Gaussian,
    Boxes,
    Powerlaw,
    Mc,
}

/// A rendered report plus its one-line summary and the mapped exit code.
struct Outcome {
    report: String,
    summary: String,
    exit: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &outcome.report) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
                println!("{}", outcome.summary);
            } else {
                print!("{}", outcome.report);
            }
            ExitCode::from(outcome.exit)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Check { datum, variant, lattice_max } => {
            run_check(cli, datum, *variant, *lattice_max)
        }
        Command::Gaussian { datum, method } => run_gaussian(cli, datum, *method),
        Command::Verify { datum, functions, param, budget } => {
            run_verify(cli, datum, *functions, *param, *budget)
        }
        Command::Split { datum } => run_split(cli, datum),
        Command::Counterexample { datum, witness, radius_range, inner_radius } => {
            run_counterexample(cli, datum, witness, radius_range, *inner_radius)
        }
        Command::Sandwich { datum } => run_sandwich(cli, datum),
    }
}

fn load(path: &Path) -> anyhow::Result<QuiverDatum> {
    let datum = read_datum_file(path)?;
    datum.ensure_valid()?;
    Ok(datum)
}

fn optimizer_config(cli: &Cli, method: Method) -> OptimizerConfig {
    let mut config = OptimizerConfig { seed: cli.seed, method, ..OptimizerConfig::default() };
    if let Some(t) = cli.tol {
        config.tol_grad = t;
    }
    if let Some(m) = cli.max_iters {
        config.max_iters = m;
    }
    if let Some(r) = cli.restarts {
        config.restarts = r;
    }
    config
}

/// Quotes a CSV cell when it contains a delimiter or quote.
fn csv_cell(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn key_value_report(format: Format, title: &str, pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    match format {
        Format::Text => {
            out.push_str(title);
            out.push('\n');
            for (k, v) in pairs {
                out.push_str(&format!("{k}: {v}\n"));
            }
        }
        Format::Csv => {
            out.push_str("key,value\n");
            for (k, v) in pairs {
                out.push_str(&format!("{},{}\n", csv_cell(k), csv_cell(v)));
            }
        }
    }
    out
}

fn sweep_report(
    format: Format,
    title: &str,
    header: &[(&str, String)],
    rows: &[(String, f64, f64, f64)],
) -> String {
    let mut out = String::new();
    match format {
        Format::Text => {
            out.push_str(title);
            out.push('\n');
            for (k, v) in header {
                out.push_str(&format!("{k}: {v}\n"));
            }
            out.push_str("points:\n");
            for (param, lhs, rhs, ratio) in rows {
                out.push_str(&format!(
                    "parameter = {param}: lhs = {lhs:.6e}, rhs = {rhs:.6e}, ratio = {ratio:.6}\n"
                ));
            }
        }
        Format::Csv => {
            out.push_str("parameter,lhs,rhs,ratio\n");
            for (param, lhs, rhs, ratio) in rows {
                out.push_str(&format!("{param},{lhs:.6e},{rhs:.6e},{ratio:.6}\n"));
            }
        }
    }
    out
}

fn run_check(
    cli: &Cli,
    path: &Path,
    variant: VariantArg,
    lattice_max: Option<usize>,
) -> anyhow::Result<Outcome> {
    let datum = load(path)?;
    let variant = match variant {
        VariantArg::PerArrow => Variant::PerArrow,
        VariantArg::Cd => Variant::JointImage,
    };
    let mut config = LatticeConfig { seed: cli.seed, ..LatticeConfig::default() };
    if let Some(k) = lattice_max {
        config.max_lattice_size = k;
    }
    let report = check_dimension(&datum, variant, &config)?;

    let scaling = if report.scaling_ok { "ok" } else { "violated" };
    let mut pairs: Vec<(&str, String)> = vec![
        ("datum", path.display().to_string()),
        ("variant", variant.as_str().to_string()),
        (
            "scaling",
            format!(
                "{scaling} (lhs = {}, rhs = {})",
                rational_to_string(&report.scaling_lhs),
                rational_to_string(&report.scaling_rhs)
            ),
        ),
        ("status", report.dimension.as_str().to_string()),
    ];
    if let Some(witness) = &report.witness {
        pairs.push(("witness", witness.describe()));
    }
    if let Some((lhs, rhs)) = &report.witness_sides {
        pairs.push((
            "witness-sides",
            format!("lhs = {}, rhs = {}", rational_to_string(lhs), rational_to_string(rhs)),
        ));
    }
    pairs.push(("families-checked", report.families_checked.to_string()));
    pairs.push(("truncated", report.truncated.to_string()));

    let finding = !report.scaling_ok || report.dimension == DimensionStatus::Violated;
    let summary = if report.dimension == DimensionStatus::Violated {
        format!(
            "check {}: violated, witness {}",
            variant.as_str(),
            report.witness.as_ref().map(|w| w.describe()).unwrap_or_default()
        )
    } else if !report.scaling_ok {
        format!(
            "check {}: scaling violated (lhs = {}, rhs = {})",
            variant.as_str(),
            rational_to_string(&report.scaling_lhs),
            rational_to_string(&report.scaling_rhs)
        )
    } else {
        format!("check {}: {}", variant.as_str(), report.dimension.as_str())
    };
    Ok(Outcome {
        report: key_value_report(cli.format, "check report", &pairs),
        summary,
        exit: u8::from(finding),
    })
}

fn run_gaussian(cli: &Cli, path: &Path, method: MethodArg) -> anyhow::Result<Outcome> {
    let datum = load(path)?;
    let (method, method_name) = match method {
        MethodArg::Grad => (Method::GradientAscent, "grad"),
        MethodArg::Fp => (Method::FixedPoint, "fp"),
    };
    let config = optimizer_config(cli, method);
    let est = optimize_gaussian_constant(&datum, &config)?;

    let pairs: Vec<(&str, String)> = vec![
        ("datum", path.display().to_string()),
        ("method", method_name.to_string()),
        ("status", est.status.as_str().to_string()),
        ("constant", format!("{:.6}", est.value)),
        ("iterations", est.iterations.to_string()),
        ("gradient-norm", format!("{:.3e}", est.final_gradient_norm)),
        ("restarts", config.restarts.to_string()),
        ("scaling", if est.scaling_ok { "ok" } else { "violated" }.to_string()),
    ];
    let summary = format!("gaussian: constant {:.6} ({})", est.value, est.status.as_str());
    Ok(Outcome {
        report: key_value_report(cli.format, "gaussian report", &pairs),
        summary,
        exit: u8::from(est.status == OptStatus::Diverging),
    })
}

/// The exact box oracle covers one shape: three coordinates, two projections
/// onto adjacent pairs, exponent 4/3 on a single shared target.
fn projection_chain() -> QuiverDatum {
    QuiverDatum::new(
        vec![3],
        vec![2],
        vec![
            (0, 0, RatMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 1, 0]])),
            (0, 0, RatMatrix::from_i64_rows(&[&[0, 1, 0], &[0, 0, 1]])),
        ],
        vec![rat_frac(3, 4)],
    )
}

fn argmax_functions(
    datum: &QuiverDatum,
    config: &OptimizerConfig,
) -> anyhow::Result<(f64, Vec<TestFunction>)> {
    let est = optimize_gaussian_constant(datum, config)?;
    if est.status == OptStatus::Diverging {
        bail!("the Gaussian constant diverges; no extremizing functions exist");
    }
    let point = est.argmax.as_ref().ok_or_else(|| anyhow!("optimizer returned no point"))?;
    let forms = ratio_functions_from_argmax(datum, point)?;
    let functions = forms
        .into_iter()
        .map(|form| TestFunction::Gaussian { form })
        .collect();
    Ok((est.value, functions))
}

fn run_verify(
    cli: &Cli,
    path: &Path,
    functions: FunctionsArg,
    param: Option<f64>,
    budget: Option<usize>,
) -> anyhow::Result<Outcome> {
    let datum = load(path)?;
    match functions {
        FunctionsArg::Gaussian => {
            let config = optimizer_config(cli, Method::FixedPoint);
            let (constant, funcs) = argmax_functions(&datum, &config)?;
            let report = ratio_gaussian(&datum, &funcs)?;
            let pairs: Vec<(&str, String)> = vec![
                ("datum", path.display().to_string()),
                ("functions", "gaussian".to_string()),
                ("method", report.method.as_str().to_string()),
                ("lhs", format!("{:.6e}", report.lhs)),
                ("rhs", format!("{:.6e}", report.rhs)),
                ("ratio", format!("{:.6}", report.ratio)),
                ("constant", format!("{constant:.6}")),
            ];
            let violated = report.ratio > constant * (1.0 + 1e-6) + 1e-9;
            let summary =
                format!("verify gaussian: ratio {:.6} vs constant {constant:.6}", report.ratio);
            Ok(Outcome {
                report: key_value_report(cli.format, "verify report", &pairs),
                summary,
                exit: u8::from(violated),
            })
        }
        FunctionsArg::Boxes => {
            if datum != projection_chain() {
                bail!(
                    "the exact box oracle only covers the two-projection chain \
                     (three coordinates, adjacent pairs, p = 4/3)"
                );
            }
            let ns = match param {
                Some(x) => {
                    let n = rat_from_f64(x).ok_or_else(|| anyhow!("bad parameter {x}"))?;
                    vec![n]
                }
                None => vec![rat_int(10), rat_int(100), rat_int(1000), rat_int(10000)],
            };
            let mut rows = Vec::new();
            let mut exact_lines = Vec::new();
            for n in &ns {
                let chain = ratio_boxes_chain(n)?;
                rows.push((
                    rational_to_string(n),
                    chain.report.lhs,
                    chain.report.rhs,
                    chain.report.ratio,
                ));
                exact_lines.push(format!(
                    "N = {}: lhs = {}, area = {}, rhs^2 = {}",
                    rational_to_string(n),
                    rational_to_string(&chain.lhs_exact),
                    rational_to_string(&chain.area_exact),
                    rational_to_string(&chain.rhs_squared_exact)
                ));
            }
            let mut header: Vec<(&str, String)> = vec![
                ("datum", path.display().to_string()),
                ("functions", "boxes".to_string()),
                ("method", "exact-slice".to_string()),
            ];
            for line in &exact_lines {
                header.push(("exact", line.clone()));
            }
            let last = rows.last().unwrap();
            let summary = format!("verify boxes: ratio {:.6} at N = {}", last.3, last.0);
            Ok(Outcome {
                report: sweep_report(cli.format, "verify report", &header, &rows),
                summary,
                exit: 0,
            })
        }
        FunctionsArg::Powerlaw => {
            let b = scaling_pair(&datum).ok_or_else(|| {
                anyhow!(
                    "power-law functions need the two-scalings shape: one line source, \
                     two scalar arrows into a single p = 2 target"
                )
            })?;
            let p = param.unwrap_or(1.001);
            let report = ratio_powerlaw(b.0, b.1, p)?;
            let limit = 1.0 / (b.0 * b.1).abs().sqrt();
            let config = optimizer_config(cli, Method::FixedPoint);
            let constant = optimize_gaussian_constant(&datum, &config)?.value;
            let pairs: Vec<(&str, String)> = vec![
                ("datum", path.display().to_string()),
                ("functions", "powerlaw".to_string()),
                ("p", format!("{p:.6}")),
                ("b", format!("{}, {}", b.0, b.1)),
                ("lhs", format!("{:.6e}", report.lhs)),
                ("rhs", format!("{:.6e}", report.rhs)),
                ("ratio", format!("{:.6}", report.ratio)),
                ("limit-at-p-1", format!("{limit:.6}")),
                ("constant", format!("{constant:.6}")),
            ];
            // Exceeding the Gaussian optimum is the expected finding when
            // |b1| != |b2|: the general constant is strictly larger.
            let exceeds = report.ratio > constant * (1.0 + 1e-6) + 1e-9;
            let summary = format!("verify powerlaw: ratio {:.6} at p = {p:.6}", report.ratio);
            Ok(Outcome {
                report: key_value_report(cli.format, "verify report", &pairs),
                summary,
                exit: u8::from(exceeds),
            })
        }
        FunctionsArg::Mc => {
            let budget = budget.unwrap_or(1 << 16);
            let mut pairs: Vec<(&str, String)> = vec![
                ("datum", path.display().to_string()),
                ("functions", "mc".to_string()),
                ("budget", budget.to_string()),
                ("seed", cli.seed.to_string()),
            ];
            let (report, constant) = match param {
                Some(x) if datum == projection_chain() => {
                    // Cross-check the exact slice oracle by sampling the same
                    // box indicators.
                    let n = rat_from_f64(x).ok_or_else(|| anyhow!("bad parameter {x}"))?;
                    // The same cross-shaped indicator goes on both arrows.
                    let boxes = cross_boxes(&n);
                    let funcs: Vec<TestFunction> = datum
                        .arrows()
                        .iter()
                        .map(|_| TestFunction::BoxUnion { boxes: boxes.clone() })
                        .collect();
                    let exact = ratio_boxes_chain(&n)?;
                    pairs.push(("parameter", rational_to_string(&n)));
                    pairs.push(("exact-ratio", format!("{:.6}", exact.report.ratio)));
                    (ratio_monte_carlo(&datum, &funcs, budget, cli.seed)?, None)
                }
                _ => {
                    let config = optimizer_config(cli, Method::FixedPoint);
                    let (constant, funcs) = argmax_functions(&datum, &config)?;
                    pairs.push(("constant", format!("{constant:.6}")));
                    (ratio_monte_carlo(&datum, &funcs, budget, cli.seed)?, Some(constant))
                }
            };
            let stderr = report.stderr.unwrap_or(0.0);
            pairs.push(("method", report.method.as_str().to_string()));
            pairs.push(("lhs", format!("{:.6e}", report.lhs)));
            pairs.push(("rhs", format!("{:.6e}", report.rhs)));
            pairs.push(("ratio", format!("{:.6}", report.ratio)));
            pairs.push(("stderr", format!("{stderr:.6e}")));
            let violated = match constant {
                Some(c) => report.ratio > c * (1.0 + 1e-6) + 5.0 * stderr,
                None => false,
            };
            let summary = format!(
                "verify mc: ratio {:.6} (stderr {:.2e}, budget {budget})",
                report.ratio, stderr
            );
            Ok(Outcome {
                report: key_value_report(cli.format, "verify report", &pairs),
                summary,
                exit: u8::from(violated),
            })
        }
    }
}

/// The two scalar factors of a two-scalings datum, if the datum has that
/// shape: one 1-dimensional source, two 1x1 arrows, one p = 2 target.
fn scaling_pair(datum: &QuiverDatum) -> Option<(f64, f64)> {
    if datum.num_sources() != 1
        || datum.source_dim(0) != 1
        || datum.num_targets() != 1
        || datum.target_dim(0) != 1
        || datum.arrows().len() != 2
        || datum.inv_exponent(0) != &rat_frac(1, 2)
    {
        return None;
    }
    let b: Vec<f64> = datum.arrows().iter().map(|a| a.matrix.to_f64()[(0, 0)]).collect();
    Some((b[0], b[1]))
}

fn run_split(cli: &Cli, path: &Path) -> anyhow::Result<Outcome> {
    let datum = load(path)?;
    let parts = datum.split_sources()?;
    let report = match cli.format {
        Format::Text => {
            let mut out = String::new();
            out.push_str("split report\n");
            out.push_str(&format!("datum: {}\n", path.display()));
            out.push_str(&format!("parts: {}\n", parts.len()));
            for part in &parts {
                out.push_str(&format!(
                    "part {}: source {}, {} arrows\n",
                    part.source + 1,
                    part.source + 1,
                    part.datum.arrows().len()
                ));
                out.push_str(&serialize_datum(&part.datum));
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("part,source,dim,arrows\n");
            for part in &parts {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    part.source + 1,
                    part.source + 1,
                    part.datum.source_dim(0),
                    part.datum.arrows().len()
                ));
            }
            out
        }
    };
    Ok(Outcome {
        report,
        summary: format!("split: {} parts", parts.len()),
        exit: 0,
    })
}

fn parse_radius_range(s: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("radius range must look like A:B, got {s:?}"))?;
    let a: f64 = a.parse().with_context(|| format!("bad radius {a:?}"))?;
    let b: f64 = b.parse().with_context(|| format!("bad radius {b:?}"))?;
    if !(a >= 1.0 && b > a) {
        bail!("radius range needs 1 <= A < B, got {a}:{b}");
    }
    Ok((a, b))
}

fn run_counterexample(
    cli: &Cli,
    path: &Path,
    witness_path: &Path,
    radius_range: &str,
    inner_radius: f64,
) -> anyhow::Result<Outcome> {
    let datum = load(path)?;
    let family = read_witness_file(witness_path)?;
    let (lo, hi) = parse_radius_range(radius_range)?;
    let points = 9usize;
    let values: Vec<f64> = (0..points)
        .map(|k| {
            let t = k as f64 / (points - 1) as f64;
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        })
        .collect();
    let sweep = ParamSweep::OuterRadius { r_small: inner_radius, values };
    let growth = counterexample_from_witness(&datum, &family, &sweep)?;

    let blow_up = growth.expected_slope > rat_int(0);
    let status = if blow_up { "blow-up" } else { "bounded" };
    let header: Vec<(&str, String)> = vec![
        ("datum", path.display().to_string()),
        ("witness", witness_path.display().to_string()),
        ("sweep", format!("R in [{lo:.6e}, {hi:.6e}], {points} points, r = {inner_radius:.6}")),
        ("shrink", format!("{:.6}", growth.shrink)),
        (
            "containment",
            if growth.containment_verified { "verified" } else { "failed" }.to_string(),
        ),
        ("expected-slope", rational_to_string(&growth.expected_slope)),
        ("fitted-slope", format!("{:.6}", growth.fitted_slope)),
        ("status", status.to_string()),
    ];
    let rows: Vec<(String, f64, f64, f64)> = growth
        .points
        .iter()
        .map(|p| {
            (
                format!("{:.6e}", p.param),
                p.log_lhs.exp(),
                p.log_rhs.exp(),
                p.log_ratio().exp(),
            )
        })
        .collect();
    let summary = format!(
        "counterexample: {status}, fitted slope {:.6}, expected {}",
        growth.fitted_slope,
        rational_to_string(&growth.expected_slope)
    );
    Ok(Outcome {
        report: sweep_report(cli.format, "counterexample report", &header, &rows),
        summary,
        exit: u8::from(blow_up),
    })
}

fn run_sandwich(cli: &Cli, path: &Path) -> anyhow::Result<Outcome> {
    let datum = load(path)?;
    let config = optimizer_config(cli, Method::FixedPoint);
    let report = sandwich_bounds(&datum, &config)?;
    let alphas: Vec<String> = report.alphas.iter().map(usize::to_string).collect();
    let bracket_line = format!(
        "BL={:.6}, alpha=[{}], bracket=[{:.6},{:.6}]",
        report.bl_value,
        alphas.join(","),
        report.lower,
        report.upper
    );
    let mut pairs: Vec<(&str, String)> = vec![
        ("datum", path.display().to_string()),
        ("status", report.status.as_str().to_string()),
        ("parts", report.parts.len().to_string()),
    ];
    let part_lines: Vec<String> = report
        .parts
        .iter()
        .map(|p| {
            format!(
                "source {}, constant {:.6} ({})",
                p.source + 1,
                p.estimate.value,
                p.estimate.status.as_str()
            )
        })
        .collect();
    for line in &part_lines {
        pairs.push(("part", line.clone()));
    }
    pairs.push(("bl", format!("{:.6}", report.bl_value)));
    pairs.push(("alpha-power-product", format!("{:.6}", report.alpha_power_product)));
    pairs.push(("bracket", bracket_line.clone()));
    Ok(Outcome {
        report: key_value_report(cli.format, "sandwich report", &pairs),
        summary: bracket_line,
        exit: u8::from(report.status == OptStatus::Diverging),
    })
}
