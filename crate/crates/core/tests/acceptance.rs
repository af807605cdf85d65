//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! with the measured quantities, then asserts.

use std::process::Command;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use homrate::effective::{
    convexity_check, h_formula, hbar_estimate, hbar_formula_3d, EffectiveHTable, EstimateConfig, HbarEstimate, Method,
};
use homrate::engine::{default_dt, lower_value_estimate, play_2d, upper_value_estimate, IntegrateOptions};
use homrate::experiments::{rate_sweep, RateMethod, RateReport, RunConfig};
use homrate::game::oracle::isaacs_audit;
use homrate::game::{Example, GameSpec, PlanarGame};
use homrate::policies::{baseline_families, Phase, PolicyISpec};
use homrate::solver::scheme::{lf_step, Uniform};
use homrate::solver::{
    estimate_dissipation, solve_corrector_periodic, solve_hj, Axis, Grid, GameNodeHamiltonian, HopfLax, InitialData,
    ScalarField,
};
use homrate::torus::ProfileKind;

fn verdict(name: &str, ok: bool, detail: String) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{name}: {detail}");
}

fn paper_sweep(method: RateMethod) -> &'static RateReport {
    static UPPER: OnceLock<RateReport> = OnceLock::new();
    static LOWER: OnceLock<RateReport> = OnceLock::new();
    let cell = match method {
        RateMethod::GameUpper => &UPPER,
        RateMethod::GameLower => &LOWER,
        RateMethod::Pde => unreachable!("PDE sweeps use the experiments profile"),
    };
    cell.get_or_init(|| rate_sweep(method, &RunConfig::default()).expect("sweep runs"))
}

fn game_cfg() -> EstimateConfig {
    EstimateConfig {
        profile: ProfileKind::Paper.spatial(),
        horizon: 100.0,
        resolution: 0,
        seed: 0,
    }
}

#[test]
fn game_upper_rate_exponent() {
    let r = paper_sweep(RateMethod::GameUpper);
    let slope = r.slope().unwrap();
    let (_, max_ratio) = r.bracket().unwrap();
    verdict(
        "game-upper rate exponent",
        (slope - 0.5).abs() <= 0.05 && max_ratio <= 52.0 && r.failures.is_empty(),
        format!("slope {slope:.4} (0.5 ± 0.05), max value/sqrt(ε) {max_ratio:.3} (≤ 52), trimmed {:?}", r.trimmed),
    );
}

#[test]
fn game_lower_constant() {
    let r = paper_sweep(RateMethod::GameLower);
    let ratios: Vec<(f64, f64)> = r
        .pairs
        .iter()
        .filter(|(e, _)| *e <= 1.0 / 1764.0)
        .map(|(e, v)| (*e, v / e.sqrt()))
        .collect();
    let worst = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    verdict(
        "game-lower constant",
        ratios.len() == 4 && worst >= 1.0 / 35.0,
        format!("min value/sqrt(ε) over ε ≤ 1/1764 is {worst:.4} (≥ 1/35) on {} points", ratios.len()),
    );
}

#[test]
fn effective_hamiltonian_axis_values() {
    let mut worst = 0.0_f64;
    let mut detail = Vec::new();
    for gamma in [0.0, 0.5, 1.0, 2.0] {
        let est = hbar_estimate(&[gamma, 0.0, 0.0], Method::Game, &game_cfg()).unwrap().value;
        let target = h_formula(gamma);
        let tol = (0.05 * target).max(5.0);
        worst = worst.max((est - target).abs() / tol);
        detail.push(format!("H̄({gamma}e₁) = {est:.3} vs {target}"));
    }
    verdict("effective Hamiltonian on the axis", worst <= 1.0, detail.join(", "));
}

#[test]
fn effective_hamiltonian_decomposition_and_convexity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let p = [rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0)];
        let est = hbar_estimate(&p, Method::Game, &game_cfg()).unwrap().value;
        let target = hbar_formula_3d(&p);
        worst = worst.max((est - target).abs() / (0.1 * target).max(5.0));
    }
    let f = |p: &[f64]| hbar_formula_3d(&[p[0], p[1], p[2]]);
    let formula_sampled = convexity_check(&f, 3, 2.0, 1000, 11);
    let formula_table = EffectiveHTable::formula(EffectiveHTable::DEFAULT_BOX, EffectiveHTable::DEFAULT_POINTS)
        .unwrap()
        .convexity_violation(100_000, 11);
    let cfg = game_cfg();
    let table = EffectiveHTable::tabulate(2.0, 5, Method::Game, |p| -> homrate::Result<HbarEstimate> {
        hbar_estimate(p, Method::Game, &cfg)
    })
    .unwrap();
    let estimated = table.convexity_violation(100_000, 11);
    let range = table.range();
    verdict(
        "decomposition and convexity",
        worst <= 1.0 && formula_sampled <= 0.0 && formula_table <= 0.0 && estimated <= 0.1 * range,
        format!(
            "worst decomposition error {worst:.3} of budget, formula violation {formula_sampled:e} / {formula_table:e}, \
             estimated-table violation {estimated:.3} (≤ {:.1})",
            0.1 * range
        ),
    );
}

#[test]
fn isaacs_condition() {
    let spec = GameSpec::new(Example::Planar, ProfileKind::Paper.planar());
    let report = isaacs_audit(&spec, 100, 400, 17, 20.0).unwrap();
    let violations = report.gap_violations().len();
    let cf = report.max_closed_form_error();
    verdict(
        "Isaacs condition",
        violations == 0 && cf <= 5e-2,
        format!("max gap {:.3e}, {violations} gap violations, closed-form error {cf:.3e} (≤ 5e-2)", report.max_gap()),
    );
}

#[test]
fn pde_monotonicity() {
    let spec = GameSpec::new(Example::Planar, ProfileKind::Experiments.planar());
    let grid = Grid::unit_torus(2, 32).unwrap();
    let ham = GameNodeHamiltonian::new(&spec, &grid, 1.0).unwrap();
    let theta = estimate_dissipation(&ham, &[(-4.0, 4.0), (-4.0, 4.0)], 32).unwrap();
    let dt = theta.max_dt(&grid, 0.4);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = 0;
    for _ in 0..100 {
        // neighbour differences stay below 0.06·32 < 4
        let values: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(0.0..0.06)).collect();
        let u = ScalarField::new(grid.clone(), values, 0.0).unwrap();
        let base = lf_step(&u, &ham, &theta, dt).unwrap();
        let mut v = u.clone();
        v.values[rng.random_range(0..grid.len())] += rng.random_range(1e-4..0.02);
        let raised = lf_step(&v, &ham, &theta, dt).unwrap();
        if raised.values.iter().zip(&base.values).any(|(r, b)| r < b) {
            failures += 1;
        }
    }
    verdict("LF monotonicity", failures == 0, format!("{failures} of 100 perturbed fields lowered a node"));
}

#[test]
fn pde_eikonal_benchmark() {
    let n = 120;
    let grid = Grid::new(vec![Axis::symmetric(3.0, n).unwrap(), Axis::symmetric(3.0, n).unwrap()]).unwrap();
    let h = 6.0 / n as f64;
    let ham = Uniform::new(2, |p: &[f64]| (p[0] * p[0] + p[1] * p[1]).sqrt());
    let (u, _) = solve_hj(grid, &InitialData::Radial, &ham, 1.0, 3.0).unwrap();
    let hl = HopfLax::new(&|p: &[f64]| (p[0] * p[0] + p[1] * p[1]).sqrt(), 2, 3.0, 61, 2.0, 81).unwrap();
    let u0 = |x: &[f64]| InitialData::Radial.eval(x);
    let mut err = 0.0_f64;
    for (node, v) in u.values.iter().enumerate() {
        let x = u.grid.coords(node);
        if x[0].hypot(x[1]) <= 2.0 {
            err = err.max((v - hl.eval(&u0, 1.0, &x[..2]).unwrap()).abs());
        }
    }
    let at_origin = u.interpolate(&[0.0, 0.0]).unwrap();
    verdict(
        "eikonal benchmark against Hopf-Lax",
        err <= 3.0 * h.sqrt(),
        format!("max error {err:.4} on |x| ≤ 2 (≤ 3 sqrt(h) = {:.4}), u(1, 0) = {at_origin:.4}", 3.0 * h.sqrt()),
    );
}

#[test]
fn pde_uniform_corrector() {
    let ham = Uniform::new(2, |p: &[f64]| p[0] * p[0] + p[1] * p[1]);
    let r = solve_corrector_periodic(&ham, Grid::unit_torus(2, 16).unwrap(), &[1.0, 0.0], 10.0, 2.0).unwrap();
    verdict(
        "x-independent corrector",
        (r.estimate - 1.0).abs() <= 1e-6,
        format!("estimate {:.12} (1 ± 1e-6)", r.estimate),
    );
}

#[test]
fn pde_micro_rate() {
    let cfg = RunConfig {
        profile: ProfileKind::Experiments,
        eps: vec![0.25, 0.125, 0.0625],
        ..RunConfig::default()
    };
    let r = rate_sweep(RateMethod::Pde, &cfg).unwrap();
    let game = PlanarGame::new(ProfileKind::Experiments.planar());
    let (fam_i, fam_ii) = baseline_families(cfg.seed);
    let mut inside = true;
    let mut detail = Vec::new();
    for (&(eps, v), &h) in r.pairs.iter().zip(&r.spacing) {
        let upper = upper_value_estimate(&game, eps, &fam_ii, 1.0, default_dt(eps)).unwrap().value;
        let lower = lower_value_estimate(&game, eps, &fam_i, 1.0, default_dt(eps)).unwrap().value;
        let slack = 5.0 * h.sqrt();
        inside &= v >= lower - slack && v <= upper + slack;
        detail.push(format!("ε = {eps}: u = {v:.4} in [{lower:.4}, {upper:.4}] ± {slack:.3}"));
    }
    let positive = r.pairs.iter().all(|p| p.1 > 0.0);
    let decreasing = r.pairs.windows(2).all(|w| w[1].1 < w[0].1);
    let slope = r.slope().unwrap();
    verdict(
        "PDE micro rate (experiments profile)",
        positive && decreasing && (0.3..=0.8).contains(&slope) && inside,
        format!(
            "positive {positive}, decreasing {decreasing}, slope {slope:.4} in [0.3, 0.8]; {}",
            detail.join("; ")
        ),
    );
}

#[test]
fn highway_strategy_invariants() {
    let eps = 1e-4;
    let game = PlanarGame::new(ProfileKind::Paper.planar());
    let opts = IntegrateOptions::new(default_dt(eps), 1.0);
    let mut problems = Vec::new();
    for spec in baseline_families(5).1 {
        let tr = play_2d(&game, eps, PolicyISpec::Highway, spec, &opts).unwrap();
        let name = spec.name();
        // the integrator tracks σ₂ to round-off
        if tr.lo[1] < -1e-12 || tr.hi[1] > eps / 2.0 + 1e-12 {
            problems.push(format!("{name}: σ₂ in [{:e}, {:e}]", tr.lo[1], tr.hi[1]));
        }
        if tr.terminal_cost > 2.0 * eps.sqrt() {
            problems.push(format!("{name}: terminal {:e}", tr.terminal_cost));
        }
        let wait: f64 = tr.segments.iter().filter(|s| s.phase.is_wait()).map(|s| s.cost).sum();
        if wait > 1e-3 * eps.sqrt() {
            problems.push(format!("{name}: wait cost {wait:e}"));
        }
        for s in tr.segments.iter().filter(|s| matches!(s.phase, Phase::Climb | Phase::Descend)) {
            if s.cost > 50.0 * eps {
                problems.push(format!("{name}: {} cost {:e} at t = {}", s.phase.name(), s.cost, s.t0));
            }
        }
        if tr.running_cost < tr.diagnostics.e_measure {
            problems.push(format!("{name}: running {:e} < |E| {:e}", tr.running_cost, tr.diagnostics.e_measure));
        }
    }
    verdict(
        "highway strategy invariants at ε = 1e-4",
        problems.is_empty(),
        if problems.is_empty() { "all bounds hold for 4 Player II controls".into() } else { problems.join("; ") },
    );
}

fn cli_output(args: &[&str], file: &str) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join(file);
    let status = Command::new(env!("CARGO_BIN_EXE_homrate"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    std::fs::read(out).unwrap()
}

#[test]
fn seeded_commands_are_deterministic() {
    let runs: [(&[&str], &str); 4] = [
        (&["simulate", "--example", "2d", "--eps", "0.001", "--policy-ii", "random:7", "--T", "0.5"], "traj.csv"),
        (&["rate", "--method", "game-upper", "--eps-list", "0.015625,0.00390625,0.0009765625", "--seed", "3"], "rate.csv"),
        (&["isaacs-check", "--example", "2d", "--samples", "10", "--res", "50", "--seed", "5"], "isaacs.csv"),
        (&["solve-micro", "--eps", "0.25", "--grid", "32", "--h1", "0.25", "--T", "0.2"], "field.csv"),
    ];
    let mut differing = Vec::new();
    for (args, file) in runs {
        let a = cli_output(args, file);
        let b = cli_output(args, file);
        if a != b || a.is_empty() {
            differing.push(args[0]);
        }
    }
    verdict(
        "deterministic seeded output",
        differing.is_empty(),
        format!("4 commands run twice, byte-identical except {differing:?}"),
    );
}
