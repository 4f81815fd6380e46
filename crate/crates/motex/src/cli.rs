//! Command-line front end.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use motex_core::costs::check_theorem_hypotheses;
use motex_core::experiments::{refinement_study, StudyConfig, StudyRow};
use motex_core::lp::Tolerances;
use motex_core::measures::{check_convex_order, irreducible_decomposition, ComponentInterval, OrderFailure};
use motex_core::mot::{
    left_curtain, price_american, relaxed_program, solve_relaxed, verify_certificate, Clock, PriceOptions, SolveReport,
    DEFAULT_MAX_ATOMS, MASS_TOL, ORDER_TOL,
};
use motex_core::{CostSpec, DiscreteMeasure, Error as CoreError};
use serde::Serialize;

use crate::format::{num, yes_no};
use crate::io::{read_certificate, read_cost, read_measure, read_study, write_atomic};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_ORDERED: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;

/// Header of the study CSV.
pub const STUDY_HEADER: &str =
    "n,p_bar,p_c,p_c_is_exact,gap,overlap_mass,strict_convexity,diagonal_separated,runtime_ms";

const DEFAULT_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "motex",
    version,
    about = "Robust two-date American option bounds by martingale transport"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
struct Marginals {
    /// First-date marginal (CSV of `x,weight` lines)
    mu: PathBuf,
    /// Second-date marginal
    nu: PathBuf,
}

#[derive(Debug, clap::Args)]
struct SolverArgs {
    /// Duality-gap tolerance; the other solver tolerances scale with it
    #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
    tol: f64,
}

impl SolverArgs {
    fn tolerances(&self) -> anyhow::Result<Tolerances> {
        anyhow::ensure!(self.tol > 0.0 && self.tol.is_finite(), "--tol must be positive");
        Ok(Tolerances::default().scaled(self.tol / DEFAULT_GAP_TOL))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check convex order, list irreducible components and report hypotheses
    Check {
        #[command(flatten)]
        marginals: Marginals,
        /// Cost file, for the hypothesis report
        cost: Option<PathBuf>,
    },
    /// Price an American payoff: relaxed bound, exercise value and purity
    Price {
        #[command(flatten)]
        marginals: Marginals,
        cost: PathBuf,
        /// Enumerate pure strategies up to this many first-date atoms
        #[arg(long, default_value_t = DEFAULT_MAX_ATOMS)]
        max_enum: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Write the relaxed LP as triplets
        #[arg(long)]
        dump_lp: Option<PathBuf>,
        /// Seed for the restarts of the heuristic
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Write the superhedging certificate, or verify one with --verify
    Hedge {
        #[command(flatten)]
        marginals: Marginals,
        cost: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Certificate file to check against the optimal plan
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Left-curtain coupling as sparse `i,j,mass` triplets
    Curtain {
        #[command(flatten)]
        marginals: Marginals,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-refinement study from a JSON config
    Study {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn now_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

fn debug_enabled() -> bool {
    std::env::var("MOT_LOG").is_ok_and(|v| v.eq_ignore_ascii_case("debug"))
}

/// Parses arguments, runs the command and returns the exit code. Output goes
/// to `stdout`; diagnostics to standard error.
pub fn run<I, T>(args: I, stdout: &mut String) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<CoreError>() {
                Some(CoreError::NotInConvexOrder(_)) => EXIT_NOT_ORDERED,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn execute(command: Command, out: &mut String) -> anyhow::Result<i32> {
    match command {
        Command::Check { marginals, cost } => check(&marginals, cost.as_deref(), out),
        Command::Price {
            marginals,
            cost,
            max_enum,
            solver,
            out: path,
            format,
            dump_lp,
            seed,
            restarts,
        } => {
            let (mu, nu) = load_marginals(&marginals)?;
            let cost = read_cost(&cost, &mu, &nu)?;
            let options = PriceOptions {
                tol: solver.tolerances()?,
                max_enum,
                seed,
                restarts,
                ..PriceOptions::default()
            };
            price(
                &mu,
                &nu,
                &cost,
                &options,
                path.as_deref(),
                format,
                dump_lp.as_deref(),
                out,
            )
        }
        Command::Hedge {
            marginals,
            cost,
            solver,
            out: path,
            verify,
        } => {
            let (mu, nu) = load_marginals(&marginals)?;
            let cost = read_cost(&cost, &mu, &nu)?;
            hedge(
                &mu,
                &nu,
                &cost,
                solver.tolerances()?,
                path.as_deref(),
                verify.as_deref(),
                out,
            )
        }
        Command::Curtain {
            marginals,
            solver,
            out: path,
        } => {
            let (mu, nu) = load_marginals(&marginals)?;
            curtain(&mu, &nu, solver.tolerances()?, path.as_deref(), out)
        }
        Command::Study { config, out: path } => study(&config, path.as_deref(), out),
    }
}

fn load_marginals(m: &Marginals) -> anyhow::Result<(DiscreteMeasure, DiscreteMeasure)> {
    Ok((read_measure(&m.mu)?, read_measure(&m.nu)?))
}

fn interval_text(interval: &ComponentInterval) -> String {
    match interval {
        ComponentInterval::Complement => "identity".into(),
        ComponentInterval::Open { left, right } => format!("({},{})", num(*left), num(*right)),
    }
}

fn check(m: &Marginals, cost: Option<&Path>, out: &mut String) -> anyhow::Result<i32> {
    let (mu, nu) = load_marginals(m)?;
    let verdict = check_convex_order(&mu, &nu, ORDER_TOL);
    if let Some(failure) = verdict.failure {
        let detail = match failure {
            OrderFailure::Mass { mu, nu } => format!("reason=mass mu={} nu={}", num(mu), num(nu)),
            OrderFailure::Mean { mu, nu } => format!("reason=mean mu={} nu={}", num(mu), num(nu)),
            OrderFailure::Potential { x, u_mu, u_nu } => {
                format!(
                    "reason=potential witness={} u_mu={} u_nu={}",
                    num(x),
                    num(u_mu),
                    num(u_nu)
                )
            }
        };
        writeln!(out, "convex_order=no {detail}")?;
        return Ok(EXIT_NOT_ORDERED);
    }
    writeln!(out, "convex_order=yes")?;

    let parts = irreducible_decomposition(&mu, &nu, ORDER_TOL)?;
    writeln!(out, "components={}", parts.len())?;
    for p in &parts {
        writeln!(
            out,
            "component={} interval={} mass={} mu_atoms={} nu_atoms={}",
            p.index,
            interval_text(&p.interval),
            num(p.mu_part.mass()),
            p.mu_part.len(),
            p.nu_part.len()
        )?;
    }

    if let Some(path) = cost {
        let cost = read_cost(path, &mu, &nu)?;
        if !cost.is_american() {
            writeln!(out, "hypotheses=n/a components={}", cost.count())?;
            return Ok(EXIT_OK);
        }
        let h = check_theorem_hypotheses(&cost, &mu, &nu)?;
        let signs: Vec<String> = h.diagonal_signs.iter().map(i8::to_string).collect();
        writeln!(
            out,
            "strict_convexity={} diagonal_separated={} diagonal_signs={} nu_absolutely_continuous_origin={}",
            yes_no(h.strict_convexity),
            yes_no(h.diagonal_separated),
            signs.join(","),
            yes_no(h.nu_absolutely_continuous_origin)
        )?;
    }
    Ok(EXIT_OK)
}

fn dump_program(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    path: Option<&Path>,
) -> anyhow::Result<()> {
    let debug = debug_enabled();
    if path.is_none() && !debug {
        return Ok(());
    }
    let mut text = String::new();
    relaxed_program(mu, nu, cost)?.write_triplets(&mut text)?;
    if let Some(path) = path {
        write_atomic(path, &text)?;
    }
    if debug {
        eprint!("{text}");
    }
    Ok(())
}

fn summary_line(r: &SolveReport) -> String {
    let p_c = match (r.p_c, r.p_c_is_exact) {
        (Some(v), true) => format!("p_c={}", num(v)),
        (Some(v), false) => format!("p_c>={}", num(v)),
        (None, _) => "p_c=none".into(),
    };
    let gap = r.gap.map_or_else(|| "none".into(), num);
    format!(
        "p_bar={} {p_c} gap={gap} overlap={} pure={}",
        num(r.p_bar),
        num(r.overlap_mass),
        yes_no(r.pure)
    )
}

fn report_csv(r: &SolveReport) -> String {
    let opt = |v: Option<f64>| v.map_or_else(String::new, num);
    format!(
        "p_bar,p_c,p_c_is_exact,gap,overlap_mass,pure,strict_convexity,diagonal_separated,runtime_ms\n{},{},{},{},{},{},{},{},{}\n",
        num(r.p_bar),
        opt(r.p_c),
        r.p_c_is_exact,
        opt(r.gap),
        num(r.overlap_mass),
        r.pure,
        r.hypotheses.strict_convexity,
        r.hypotheses.diagonal_separated,
        num(r.timings_ms.total)
    )
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[allow(clippy::too_many_arguments)]
fn price(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    options: &PriceOptions,
    path: Option<&Path>,
    format: Format,
    dump_lp: Option<&Path>,
    out: &mut String,
) -> anyhow::Result<i32> {
    dump_program(mu, nu, cost, dump_lp)?;
    let report = price_american(mu, nu, cost, options, &WallClock(Instant::now()))?;
    if let Some(path) = path {
        let text = match format {
            Format::Json => to_json(&report)?,
            Format::Csv => report_csv(&report),
        };
        write_atomic(path, &text)?;
    }
    writeln!(out, "{}", summary_line(&report))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct HedgeFile<'a> {
    phi: &'a [f64],
    psi: &'a [f64],
    theta: &'a [Vec<f64>],
    dual_value: f64,
    p_bar: f64,
    slack: motex_core::mot::SlackReport,
}

fn hedge(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    tol: Tolerances,
    path: Option<&Path>,
    verify: Option<&Path>,
    out: &mut String,
) -> anyhow::Result<i32> {
    let relaxed = solve_relaxed(mu, nu, cost, tol)?;
    let scale = 1.0 + relaxed.value.abs();
    let dual = match verify {
        Some(cert) => read_certificate(cert)?,
        None => relaxed.dual.clone(),
    };
    let slack = verify_certificate(&relaxed.plan, &dual, cost)
        .with_context(|| "certificate does not match the marginals' grids")?;
    let dual_value = dual.value(mu, nu);

    if let Some(path) = path {
        let file = HedgeFile {
            phi: &dual.phi,
            psi: &dual.psi,
            theta: &dual.theta,
            dual_value,
            p_bar: relaxed.value,
            slack,
        };
        write_atomic(path, &to_json(&file)?)?;
    }
    let line = format!(
        "dual_value={} p_bar={} feasibility={} tightness={}",
        num(dual_value),
        num(relaxed.value),
        num(slack.feasibility),
        num(slack.tightness)
    );
    if verify.is_none() {
        writeln!(out, "{line}")?;
        return Ok(EXIT_OK);
    }
    let accepted = slack.feasibility <= tol.gap * scale
        && slack.tightness <= tol.gap * scale
        && (dual_value - relaxed.value).abs() <= tol.gap * scale;
    writeln!(
        out,
        "certificate={} {line}",
        if accepted { "accepted" } else { "rejected" }
    )?;
    Ok(if accepted { EXIT_OK } else { EXIT_REJECTED })
}

fn curtain(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    tol: Tolerances,
    path: Option<&Path>,
    out: &mut String,
) -> anyhow::Result<i32> {
    let result = left_curtain(mu, nu, tol)?;
    let support = result.plan.support(0, MASS_TOL);
    let mut text = String::from("i,j,mass\n");
    for (i, j, w) in &support {
        writeln!(text, "{i},{j},{}", num(*w))?;
    }
    writeln!(text, "# monotone={}", yes_no(result.report.monotone))?;
    if let Some(v) = result.report.violation {
        writeln!(
            text,
            "# violation x={} y1={} y2={} x_prime={} y_prime={}",
            num(v.x),
            num(v.y1),
            num(v.y2),
            num(v.x_prime),
            num(v.y_prime)
        )?;
    }
    match path {
        Some(path) => {
            write_atomic(path, &text)?;
            writeln!(
                out,
                "monotone={} support={}",
                yes_no(result.report.monotone),
                support.len()
            )?;
        }
        None => out.push_str(&text),
    }
    Ok(EXIT_OK)
}

pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut text = format!("{STUDY_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            num(r.p_bar),
            num(r.p_c),
            r.p_c_is_exact,
            num(r.gap),
            num(r.overlap_mass),
            r.strict_convexity,
            r.diagonal_separated,
            num(r.runtime_ms)
        );
    }
    text
}

fn study(config: &Path, path: Option<&Path>, out: &mut String) -> anyhow::Result<i32> {
    let file = read_study(config)?;
    let probe = DiscreteMeasure::dirac(0.0);
    let cost = file
        .cost
        .build(&probe, &probe)
        .with_context(|| format!("{}: cost", config.display()))?;
    let options = PriceOptions {
        seed: file.seed,
        ..PriceOptions::default()
    };
    let study = StudyConfig {
        mu_density: file.mu_density,
        nu_density: file.nu_density,
        cost,
        sizes: file.sizes,
        mu_size: file.mu_size,
        method: file.method,
        options,
    };
    let rows = refinement_study(&study, &WallClock(Instant::now()))?;
    let text = study_csv(&rows);
    match path {
        Some(path) => {
            write_atomic(path, &text)?;
            for r in &rows {
                writeln!(
                    out,
                    "n={} p_bar={} p_c={} gap={} overlap={} pure={}",
                    r.n,
                    num(r.p_bar),
                    num(r.p_c),
                    num(r.gap),
                    num(r.overlap_mass),
                    yes_no(r.overlap_mass <= options.purity_tol)
                )?;
            }
        }
        None => out.push_str(&text),
    }
    Ok(EXIT_OK)
}
