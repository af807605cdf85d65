use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use homrate::effective::{hbar_estimate, EstimateConfig, Method};
use homrate::engine::{default_dt, play_2d, IntegrateOptions, Record};
use homrate::experiments::config::parse_reals;
use homrate::experiments::{emit_report, rate_sweep, RateMethod, RunConfig};
use homrate::game::oracle::{isaacs_audit, IsaacsReport};
use homrate::game::{Example, GameSpec, PlanarGame};
use homrate::policies::{PolicyIISpec, PolicyISpec};
use homrate::solver::{solve_micro, InitialData, MicroGrid};
use homrate::torus::ProfileKind;
use homrate::{Error, Result};

#[derive(Parser)]
#[command(name = "homrate", version, about = "Homogenization-rate experiments for nonconvex Hamilton-Jacobi equations")]
struct Cli {
    /// Flat TOML file with defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form Hamiltonians of the example games.
    Hamiltonian {
        #[command(subcommand)]
        op: HamiltonianOp,
    },
    /// Compares the min-max and max-min oracles with the closed form.
    IsaacsCheck(IsaacsArgs),
    /// Plays one Player I strategy against one Player II control.
    Simulate(SimulateArgs),
    /// Sweeps ε and fits the rate of u^ε(1, 0).
    Rate(RateArgs),
    /// Estimates the effective Hamiltonian of the spatial example.
    Effective(EffectiveArgs),
    /// Solves the planar oscillatory problem with the monotone scheme.
    SolveMicro(MicroArgs),
}

#[derive(Subcommand)]
enum HamiltonianOp {
    Eval(EvalArgs),
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    example: Example,
    /// Comma-separated position.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Comma-separated momentum.
    #[arg(long, allow_hyphen_values = true)]
    p: String,
    #[arg(long)]
    profile: Option<ProfileKind>,
}

#[derive(Args)]
struct IsaacsArgs {
    #[arg(long)]
    example: Example,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 400)]
    res: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Bound on |p| for the samples.
    #[arg(long, default_value_t = 20.0)]
    p_max: f64,
    #[arg(long)]
    profile: Option<ProfileKind>,
    /// Per-sample CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    example: Example,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value = "highway")]
    policy_i: PolicyISpec,
    #[arg(long, default_value = "adversarial")]
    policy_ii: PolicyIISpec,
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Step size; ε/200 by default.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    profile: Option<ProfileKind>,
    /// Record every k-th step (mode switches are always recorded).
    #[arg(long, default_value_t = 100)]
    every: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long)]
    method: RateMethod,
    /// Comma-separated ε values.
    #[arg(long)]
    eps_list: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    profile: Option<ProfileKind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// PDE nodes per ε-cell.
    #[arg(long)]
    grid: Option<usize>,
    /// PDE x₁ spacing.
    #[arg(long)]
    h1: Option<f64>,
    /// PDE half-width.
    #[arg(long = "L")]
    half_width: Option<f64>,
}

#[derive(Args)]
struct EffectiveArgs {
    /// Comma-separated p₁,p₂,p₃.
    #[arg(long, allow_hyphen_values = true)]
    p: String,
    #[arg(long, default_value = "game")]
    method: Method,
    #[arg(long = "T", default_value_t = 100.0)]
    horizon: f64,
    #[arg(long)]
    profile: Option<ProfileKind>,
    /// Torus nodes per axis for the PDE method.
    #[arg(long, default_value_t = 40)]
    grid: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MicroArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    profile: Option<ProfileKind>,
    /// Nodes per ε-cell in x₂.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long = "L")]
    half_width: Option<f64>,
    #[arg(long)]
    h1: Option<f64>,
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long, default_value = "clamped")]
    initial: InitialData,
    /// Field as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Field as a little-endian binary dump.
    #[arg(long)]
    binary: Option<PathBuf>,
}

// stdout may be a closed pipe (`| head`); that is not an error
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

fn vector(s: &str, d: usize, what: &str) -> Result<Vec<f64>> {
    let v = parse_reals(s)?;
    if v.len() != d {
        return Err(Error::InvalidArgument(format!("{what} needs {d} components, got {}", v.len())));
    }
    Ok(v)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn base_config(path: Option<&Path>) -> Result<Option<RunConfig>> {
    path.map(RunConfig::load).transpose()
}

fn run(cli: Cli) -> Result<()> {
    let file = base_config(cli.config.as_deref())?;
    let has_file = file.is_some();
    let mut cfg = file.unwrap_or_default();
    match cli.command {
        Command::Hamiltonian {
            op: HamiltonianOp::Eval(a),
        } => {
            let profile = a.profile.unwrap_or(cfg.profile);
            let spec = match a.example {
                Example::Planar => GameSpec::new(a.example, profile.planar()),
                Example::Spatial => GameSpec::new(a.example, profile.spatial()),
            };
            let d = a.example.dim();
            let h = spec.hamiltonian(&vector(&a.x, d, "x")?, &vector(&a.p, d, "p")?)?;
            out!("{h:.16e}");
        }
        Command::IsaacsCheck(a) => {
            let profile = a.profile.unwrap_or(cfg.profile);
            let spec = match a.example {
                Example::Planar => GameSpec::new(a.example, profile.planar()),
                Example::Spatial => GameSpec::new(a.example, profile.spatial()),
            };
            let report = isaacs_audit(&spec, a.samples, a.res, a.seed.unwrap_or(cfg.seed), a.p_max)?;
            if let Some(path) = &a.out {
                write(path, &report.to_csv())?;
            }
            let violations = report.gap_violations().len();
            out!("samples                 {}", report.rows.len());
            out!("max |upper - lower|     {:.6e}", report.max_gap());
            out!("max closed-form error   {:.6e}", report.max_closed_form_error());
            out!(
                "gap violations          {violations} (gap > 2 x refinement delta + {:e})",
                IsaacsReport::ROUNDOFF_FLOOR
            );
            if violations > 0 {
                return Err(Error::AuditFailed(format!("{violations} samples violate the Isaacs gap bound")));
            }
        }
        Command::Simulate(a) => {
            if a.example != Example::Planar {
                return Err(Error::InvalidArgument("simulate supports the 2d example only".into()));
            }
            let profile = a.profile.unwrap_or(cfg.profile);
            let game = PlanarGame::new(profile.planar());
            let horizon = a.horizon.unwrap_or(cfg.horizon);
            let dt = a.dt.unwrap_or_else(|| default_dt(a.eps));
            let opts = IntegrateOptions::new(dt, horizon).recording(Record::Every(a.every));
            let tr = play_2d(&game, a.eps, a.policy_i, a.policy_ii, &opts)?;
            if let Some(path) = a.out.as_ref().or(cfg.out.as_ref()) {
                write(path, &tr.to_csv())?;
            }
            out!("running cost   {:.16e}", tr.running_cost);
            out!("terminal cost  {:.16e}", tr.terminal_cost);
            out!("total          {:.16e}", tr.total_cost());
            out!("total/sqrt(ε)  {:.6}", tr.total_cost() / a.eps.sqrt());
            out!("mode switches  {}", tr.mode_switches());
        }
        Command::Rate(a) => {
            if let Some(list) = &a.eps_list {
                cfg.eps = parse_reals(list)?;
            }
            if let Some(p) = a.profile {
                cfg.profile = p;
            } else if !has_file && a.method == RateMethod::Pde {
                cfg.profile = ProfileKind::Experiments;
            }
            if !has_file && a.eps_list.is_none() && a.method == RateMethod::Pde {
                cfg.eps = vec![0.25, 0.125, 0.0625];
            }
            cfg.seed = a.seed.unwrap_or(cfg.seed);
            cfg.horizon = a.horizon.unwrap_or(cfg.horizon);
            cfg.grid = a.grid.unwrap_or(cfg.grid);
            cfg.h1 = a.h1.unwrap_or(cfg.h1);
            cfg.half_width = a.half_width.or(cfg.half_width);
            cfg.out = a.out.or(cfg.out);
            cfg.plot = a.plot.or(cfg.plot);
            let report = rate_sweep(a.method, &cfg)?;
            if let Some(csv) = &cfg.out {
                emit_report(&report, csv, cfg.plot.as_deref())?;
            }
            for &(e, v) in &report.pairs {
                out!("ε = {e:.6e}  value = {v:.6e}  value/sqrt(ε) = {:.4}", v / e.sqrt());
            }
            for (e, msg) in &report.failures {
                out!("ε = {e:.6e}  failed: {msg}");
            }
            if let Some(fit) = report.fit {
                out!("slope {:.4}  intercept {:.4}  R² {:.5}", fit.slope, fit.intercept, fit.r_squared);
            }
            if !report.trimmed.is_empty() {
                out!("left out of the fit: {:?}", report.trimmed);
            }
        }
        Command::Effective(a) => {
            let p = vector(&a.p, 3, "p")?;
            let est = hbar_estimate(
                &[p[0], p[1], p[2]],
                a.method,
                &EstimateConfig {
                    profile: a.profile.unwrap_or(cfg.profile).spatial(),
                    horizon: a.horizon,
                    resolution: a.grid,
                    seed: a.seed.unwrap_or(cfg.seed),
                },
            )?;
            out!("hbar      {:.16e}", est.value);
            out!("residual  {:.6e}", est.residual);
        }
        Command::SolveMicro(a) => {
            let profile = a.profile.unwrap_or(if has_file { cfg.profile } else { ProfileKind::Experiments });
            let horizon = a.horizon.unwrap_or(cfg.horizon);
            let h1 = a.h1.unwrap_or(cfg.h1);
            let mut grid = MicroGrid::standard(horizon, h1, a.grid.unwrap_or(cfg.grid))?;
            if let Some(l) = a.half_width.or(cfg.half_width) {
                grid.half_width = l;
                grid.n1 = 2 * (l / h1).ceil() as usize;
            }
            let sol = solve_micro(profile.planar(), a.eps, horizon, &grid, &a.initial)?;
            if let Some(path) = a.out.as_ref().or(cfg.out.as_ref()) {
                sol.field.write_csv(path)?;
            }
            if let Some(path) = &a.binary {
                sol.field.write_binary(path)?;
            }
            out!("u(T, 0)   {:.16e}", sol.value);
            out!("steps     {}", sol.report.steps);
            out!("dt        {:.6e}", sol.report.dt);
            out!("theta     {:?}", sol.theta.theta);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_precondition() || matches!(e, Error::Parse(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
