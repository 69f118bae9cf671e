mod plot;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use psf_core::{
    contraction_ratio, iterate, orbit_verify, write_trace_csv, ContractionSettings, FamilyParams,
    FamilySpec, IterationResult, IterationSettings, OrbitPortrait, QuadraticDifferential,
    ResultSummary, Status,
};
use rayon::prelude::*;
use serde::Serialize;

const FORMATS: &str = r#"EXIT CODES
  0  success (converged / verified / contraction established)
  1  malformed input (unreadable file, bad JSON, invalid portrait or differential)
  2  MAX_ITER reached
  3  DEGENERATE or GEOMETRY_ABORT
  4  verification failed
  5  contraction inconclusive (ratio + error >= 1)

FILE FORMATS
  Complex numbers are [re, im]; a point of the sphere is [re, im] or "inf".

  Portrait (JSON):
    {"family": {"kind": "exp"} | {"kind": "pexp", "p": 2} | {"kind": "av2"},
     "k1": 1, "l": 1, "branch": [0, 0, 1], "eta": 1,
     "succ": [...]?, "critical_case": "PERIODIC_C" | "NONPERIODIC_C_AND_FC"?,
     "second_orbit": {"k1": 0, "l": 1, "branch": [1, 0], "succ": [...]?}?,
     "seed_lambda": [re, im]?}

  Parameters (JSON): {"kind": "exp", "lambda": [re, im]}
    | {"kind": "pexp", "p": 2, "lambda": [re, im]}
    | {"kind": "av2", "alpha": [re, im], "beta": [re, im]}
    A result file from `psf realize` is also accepted; its "params" field is used.

  Result (JSON): {"status": "CONVERGED" | "MAX_ITER" | "DEGENERATE" | "GEOMETRY_ABORT",
    "params": <parameters> | null, "steps": n, "final_gap": x, "message": "..."?}

  Trace (CSV): step, parameter columns (lambda_re, lambda_im or alpha_re, alpha_im,
    beta_re, beta_im), z<k>_re, z<k>_im per marked slot ("inf" for the point at
    infinity), min_gap, param_modulus, eta_n, displacement.

  Verification report (JSON): {"residual": x, "min_orbit_gap": x, "pass": bool,
    "orbit": [point, ...], "second_orbit": [point, ...]?, "message": "..."?}

  Differential (JSON): {"poles": [[re, im], ...], "coeffs": [[re, im], ...]}
    for the differential sum_j a_j / (z - p_j) dz^2.

  Contraction report (JSON): {"truncation", "norm": {"value", "error"},
    "push_norm", "push_norm_refined", "ratio", "ratio_refined",
    "truncation_discrepancy", "error", "margin", "conclusive"}

  Sweep table (CSV): branch, eta, status, parameter columns, steps, final_gap, message.
"#;

#[derive(Parser)]
#[command(
    name = "psf",
    version,
    about = "Realize post-singularly finite exponential-type maps by Thurston pullback"
)]
#[command(after_long_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct IterFlags {
    /// Stop when no marked point moves more than this (spherical metric)
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Abort when the minimum spherical gap drops below this
    #[arg(long, default_value_t = 1e-8)]
    min_gap_abort: f64,
}

impl IterFlags {
    fn settings(&self) -> anyhow::Result<IterationSettings> {
        let s = IterationSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            min_gap_abort: self.min_gap_abort,
            ..IterationSettings::default()
        };
        s.validate().map_err(|e| anyhow!("{e}"))?;
        Ok(s)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the pullback iteration on a portrait
    #[command(after_long_help = FORMATS)]
    Realize {
        portrait: PathBuf,
        #[command(flatten)]
        iter: IterFlags,
        /// Result JSON (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-step CSV trace
        #[arg(long)]
        trace: Option<PathBuf>,
        /// SVG of trajectories and |lambda_n|
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Check a parameter against a portrait by forward orbit iteration
    #[command(after_long_help = FORMATS)]
    Verify {
        portrait: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Realize a family of portraits obtained by varying one branch entry and eta
    #[command(after_long_help = FORMATS)]
    Sweep {
        template: PathBuf,
        /// Orbit index whose branch integer is varied (default k1 + l)
        #[arg(long)]
        branch_index: Option<usize>,
        /// Inclusive range a:b of branch integers; a > b is empty
        #[arg(long, allow_hyphen_values = true)]
        branch_range: Option<String>,
        /// Inclusive range a:b of eta; when absent eta follows the branch change
        #[arg(long, allow_hyphen_values = true)]
        eta_range: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        iter: IterFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure the contraction of the push-forward on a quadratic differential
    #[command(after_long_help = FORMATS)]
    Contract {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        differential: PathBuf,
        /// Preimage branches summed per side
        #[arg(long, default_value_t = 64)]
        truncation: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A nonzero exit with its reason.
struct Exit {
    code: u8,
    message: String,
}

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Self {
        Exit {
            code: 1,
            message: format!("{e:#}"),
        }
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::MaxIter => 2,
        Status::Degenerate | Status::GeometryAbort => 3,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_portrait(path: &Path) -> Result<OrbitPortrait, Exit> {
    let port: OrbitPortrait = serde_json::from_str(&read(path)?)
        .with_context(|| format!("parsing portrait {}", path.display()))?;
    let violations = port.validate();
    if !violations.is_empty() {
        let mut message = format!("invalid portrait {}:", path.display());
        for v in violations {
            message.push_str("\n  - ");
            message.push_str(&v);
        }
        return Err(Exit { code: 1, message });
    }
    Ok(port)
}

fn read_params(path: &Path) -> anyhow::Result<FamilyParams> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    let value = match value.get("params") {
        Some(inner) => inner.clone(),
        None => value,
    };
    if value.is_null() {
        bail!(
            "{} has no parameters (the run did not converge)",
            path.display()
        );
    }
    let params: FamilyParams = serde_json::from_value(value)
        .with_context(|| format!("parsing parameters {}", path.display()))?;
    params.validate().map_err(|e| anyhow!("{e}"))?;
    Ok(params)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn realize(
    portrait: &Path,
    iter: &IterFlags,
    out: Option<&Path>,
    trace: Option<&Path>,
    plot: Option<&Path>,
) -> Result<(), Exit> {
    let port = read_portrait(portrait)?;
    let settings = iter.settings()?;
    let result = iterate(&port, &settings);
    emit(out, &to_json(&ResultSummary::from_result(&result))?)?;
    if let Some(path) = trace {
        let file =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_trace_csv(&result.trace, std::io::BufWriter::new(file))
            .map_err(|e| anyhow!("{e}"))?;
    }
    if let Some(path) = plot {
        let title = format!("{} portrait {}", port.family.name(), portrait.display());
        fs::write(path, plot::trace_svg(&result.trace, &title))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    finish_realize(&port, &result, settings.tol)
}

fn finish_realize(port: &OrbitPortrait, result: &IterationResult, tol: f64) -> Result<(), Exit> {
    let code = status_code(result.status);
    if code != 0 {
        let message = format!(
            "{:?}{}",
            result.status,
            result
                .message
                .as_deref()
                .map(|m| format!(": {m}"))
                .unwrap_or_default()
        );
        return Err(Exit { code, message });
    }
    let params = result.params.expect("converged runs carry parameters");
    match orbit_verify(&params, port, 10.0 * tol) {
        Ok(r) if !r.pass => eprintln!(
            "psf: warning: orbit residual {:e} exceeds {:e} (the forward orbit amplifies the fixed-point error)",
            r.residual,
            10.0 * tol
        ),
        Err(e) => eprintln!("psf: warning: orbit verification failed: {e}"),
        Ok(_) => {}
    }
    Ok(())
}

fn verify(portrait: &Path, params: &Path, tol: f64, out: Option<&Path>) -> Result<(), Exit> {
    let port = read_portrait(portrait)?;
    let params = read_params(params)?;
    if params.spec() != port.family {
        return Err(Exit {
            code: 1,
            message: "parameters and portrait belong to different families".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(Exit {
            code: 1,
            message: "tol must be positive".into(),
        });
    }
    let report = orbit_verify(&params, &port, tol).map_err(|e| anyhow!("{e}"))?;
    emit(out, &to_json(&report)?)?;
    if report.pass {
        Ok(())
    } else {
        Err(Exit {
            code: 4,
            message: format!("residual {:e}, tolerance {tol:e}", report.residual),
        })
    }
}

fn parse_range(s: &str) -> anyhow::Result<Vec<i64>> {
    let (a, b) = match s.split_once(':') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), s.trim()),
    };
    let a: i64 = a
        .parse()
        .with_context(|| format!("bad range start in {s:?}"))?;
    let b: i64 = b
        .parse()
        .with_context(|| format!("bad range end in {s:?}"))?;
    Ok(if a > b { Vec::new() } else { (a..=b).collect() })
}

#[derive(Serialize)]
struct SweepRow {
    branch: i64,
    eta: i64,
    status: String,
    params: Vec<f64>,
    steps: usize,
    final_gap: Option<f64>,
    message: String,
}

fn param_header(family: FamilySpec) -> &'static [&'static str] {
    match family {
        FamilySpec::Av2 => &["alpha_re", "alpha_im", "beta_re", "beta_im"],
        _ => &["lambda_re", "lambda_im"],
    }
}

fn param_values(params: &FamilyParams) -> Vec<f64> {
    match *params {
        FamilyParams::Exp { lambda } | FamilyParams::Pexp { lambda, .. } => {
            vec![lambda.re, lambda.im]
        }
        FamilyParams::Av2 { alpha, beta } => vec![alpha.re, alpha.im, beta.re, beta.im],
    }
}

fn sweep_row(
    template: &OrbitPortrait,
    index: usize,
    branch: i64,
    eta: Option<i64>,
    settings: &IterationSettings,
) -> SweepRow {
    let mut port = template.clone();
    let old = port.branch[index];
    port.branch[index] = branch;
    port.eta = match eta {
        Some(e) => e,
        None => {
            let (k1, k2) = (template.k1, template.k2());
            let shift = |b: &[i64]| b[k2] - b[k1];
            if port.is_periodic_critical() {
                template.eta
            } else {
                let mut before = port.branch.clone();
                before[index] = old;
                template.eta + shift(&port.branch) - shift(&before)
            }
        }
    };
    let violations = port.validate();
    if !violations.is_empty() {
        return SweepRow {
            branch,
            eta: port.eta,
            status: "INVALID".into(),
            params: vec![],
            steps: 0,
            final_gap: None,
            message: violations.join("; "),
        };
    }
    let result = iterate(&port, settings);
    let summary = ResultSummary::from_result(&result);
    let status = serde_json::to_value(summary.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    SweepRow {
        branch,
        eta: port.eta,
        status,
        params: summary
            .params
            .as_ref()
            .map(param_values)
            .unwrap_or_default(),
        steps: summary.steps,
        final_gap: Some(summary.final_gap),
        message: summary.message.unwrap_or_default(),
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    template: &Path,
    branch_index: Option<usize>,
    branch_range: Option<&str>,
    eta_range: Option<&str>,
    jobs: usize,
    iter: &IterFlags,
    out: Option<&Path>,
) -> Result<(), Exit> {
    let template: OrbitPortrait = serde_json::from_str(&read(template)?)
        .with_context(|| format!("parsing template {}", template.display()))?;
    let settings = iter.settings()?;
    let index = branch_index.unwrap_or(template.k2());
    if index >= template.branch.len() {
        return Err(Exit {
            code: 1,
            message: format!(
                "branch index {index} outside the template's {} entries",
                template.branch.len()
            ),
        });
    }
    let branches = match branch_range {
        Some(r) => parse_range(r)?,
        None => vec![template.branch[index]],
    };
    let etas: Vec<Option<i64>> = match eta_range {
        Some(r) => parse_range(r)?.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let cases: Vec<(i64, Option<i64>)> = branches
        .iter()
        .flat_map(|&b| etas.iter().map(move |&e| (b, e)))
        .collect();
    if cases.len() > 10_000 {
        return Err(Exit {
            code: 1,
            message: format!("sweep of {} portraits exceeds 10000", cases.len()),
        });
    }
    if jobs == 0 {
        return Err(Exit {
            code: 1,
            message: "--jobs must be at least 1".into(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| anyhow!("{e}"))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cases
            .par_iter()
            .map(|&(b, e)| sweep_row(&template, index, b, e, &settings))
            .collect()
    });

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["branch", "eta", "status"];
    header.extend(param_header(template.family));
    header.extend(["steps", "final_gap", "message"]);
    w.write_record(&header).map_err(|e| anyhow!("{e}"))?;
    let width = param_header(template.family).len();
    for row in rows {
        let mut rec = vec![row.branch.to_string(), row.eta.to_string(), row.status];
        for i in 0..width {
            rec.push(row.params.get(i).map(|x| x.to_string()).unwrap_or_default());
        }
        rec.push(row.steps.to_string());
        rec.push(row.final_gap.map(|x| x.to_string()).unwrap_or_default());
        rec.push(row.message);
        w.write_record(&rec).map_err(|e| anyhow!("{e}"))?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("{e}"))?;
    emit(out, &String::from_utf8(bytes).map_err(|e| anyhow!("{e}"))?)?;
    Ok(())
}

fn contract(
    params: &Path,
    differential: &Path,
    truncation: usize,
    out: Option<&Path>,
) -> Result<(), Exit> {
    let params = read_params(params)?;
    let q: QuadraticDifferential = serde_json::from_str(&read(differential)?)
        .with_context(|| format!("parsing differential {}", differential.display()))?;
    let settings = ContractionSettings {
        truncation,
        ..ContractionSettings::default()
    };
    let report = contraction_ratio(&q, &params, &settings).map_err(|e| anyhow!("{e}"))?;
    emit(out, &to_json(&report)?)?;
    if report.conclusive {
        Ok(())
    } else {
        Err(Exit {
            code: 5,
            message: format!(
                "ratio {} with error {:e} does not establish contraction",
                report.ratio, report.error
            ),
        })
    }
}

fn run(cli: Cli) -> Result<(), Exit> {
    match cli.command {
        Command::Realize {
            portrait,
            iter,
            out,
            trace,
            plot,
        } => realize(
            &portrait,
            &iter,
            out.as_deref(),
            trace.as_deref(),
            plot.as_deref(),
        ),
        Command::Verify {
            portrait,
            params,
            tol,
            out,
        } => verify(&portrait, &params, tol, out.as_deref()),
        Command::Sweep {
            template,
            branch_index,
            branch_range,
            eta_range,
            jobs,
            iter,
            out,
        } => sweep(
            &template,
            branch_index,
            branch_range.as_deref(),
            eta_range.as_deref(),
            jobs,
            &iter,
            out.as_deref(),
        ),
        Command::Contract {
            params,
            differential,
            truncation,
            out,
        } => contract(&params, &differential, truncation, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(exit) => {
            eprintln!("psf: {}", exit.message);
            ExitCode::from(exit.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-2:2").unwrap(), vec![-2, -1, 0, 1, 2]);
        assert_eq!(parse_range("3").unwrap(), vec![3]);
        assert!(parse_range("1:0").unwrap().is_empty());
        assert!(parse_range("a:2").is_err());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            status_code(Status::Converged),
            status_code(Status::MaxIter),
            status_code(Status::Degenerate),
        ];
        assert_eq!(codes, [0, 2, 3]);
        assert_eq!(status_code(Status::GeometryAbort), 3);
    }

    #[test]
    fn eta_follows_branch() {
        let template = OrbitPortrait {
            k1: 1,
            l: 1,
            branch: vec![0, 0, 1],
            ..OrbitPortrait::exp_fixed(1)
        };
        let settings = IterationSettings {
            max_iter: 1,
            ..IterationSettings::default()
        };
        assert_eq!(sweep_row(&template, 2, -2, None, &settings).eta, -2);
        let zero = sweep_row(&template, 2, 0, None, &settings);
        assert_eq!(zero.status, "INVALID");
        assert_eq!(sweep_row(&template, 1, 1, None, &settings).eta, 0);
    }
}
