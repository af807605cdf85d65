//! Integration of the state equation `σ̇ = f(σ/ε, a, b)` under a pair of
//! policies, cost accounting, trajectory diagnostics and the game-based value
//! estimates.
//!
//! Value estimates are one-sided brackets over finite policy families, not
//! true suprema or infima over all measurable controls.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiments::fit::linear_fit;
use crate::game::{DifferentialGame, PlanarGame, SpatialGame};
use crate::policies::{
    corrector_family, ControlII, CorrectorPolicy, CorrectorRule, Phase, PolicyISpec, PolicyIISpec,
    StrategyI,
};

/// Which accepted steps are stored as samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Record {
    Off,
    /// Every `k`-th step, plus every mode switch and the final state.
    Every(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub horizon: f64,
    pub record: Record,
    /// `E` collects the times with `R(σ/ε, 0, 0) ≥ e_threshold`.
    pub e_threshold: f64,
}

impl IntegrateOptions {
    pub fn new(dt: f64, horizon: f64) -> Self {
        Self {
            dt,
            horizon,
            record: Record::Off,
            e_threshold: 1.0,
        }
    }

    pub fn recording(mut self, record: Record) -> Self {
        self.record = record;
        self
    }
}

/// Default step for the planar game at scale ε.
pub fn default_dt(eps: f64) -> f64 {
    eps / 200.0
}

/// State after an accepted step together with the actions used on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const D: usize> {
    pub t: f64,
    pub x: [f64; D],
    pub a: [f64; D],
    pub b: [f64; D],
    /// Running cost accumulated on `[0, t]`.
    pub running_cost: f64,
}

/// Running cost accrued while Player I stayed in one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSegment {
    pub phase: Phase,
    pub t0: f64,
    pub t1: f64,
    pub cost: f64,
}

/// Measures of the penalised set `E` and of the push-available sets `U₊`, `U₋`
/// (midpoint sampling), and the number of highway changes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryDiagnostics {
    pub e_measure: f64,
    pub u_plus: f64,
    pub u_minus: f64,
    pub switches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    pub eps: f64,
    pub dt: f64,
    pub horizon: f64,
    pub start: [f64; D],
    pub final_state: [f64; D],
    pub running_cost: f64,
    pub terminal_cost: f64,
    pub steps: usize,
    pub samples: Vec<Sample<D>>,
    pub segments: Vec<PhaseSegment>,
    pub diagnostics: TrajectoryDiagnostics,
    /// Largest `|σ̇|` seen.
    pub max_speed: f64,
    /// Componentwise bounding box of all visited states.
    pub lo: [f64; D],
    pub hi: [f64; D],
}

impl<const D: usize> Trajectory<D> {
    pub fn total_cost(&self) -> f64 {
        self.running_cost + self.terminal_cost
    }

    /// Number of completed mode switches of Player I.
    pub fn mode_switches(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    /// CSV with columns `t, x1.., a1.., b1.., running_cost`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let head: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=D).map(|k| format!("x{k}")))
            .chain((1..=D).map(|k| format!("a{k}")))
            .chain((1..=D).map(|k| format!("b{k}")))
            .chain(std::iter::once("running_cost".to_string()))
            .collect();
        s.push_str(&head.join(","));
        s.push('\n');
        for smp in &self.samples {
            let row: Vec<String> = std::iter::once(&smp.t)
                .chain(&smp.x)
                .chain(&smp.a)
                .chain(&smp.b)
                .chain(std::iter::once(&smp.running_cost))
                .map(|v| format!("{v:.16e}"))
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

struct StepOut<const D: usize> {
    x: [f64; D],
    cost: f64,
    a: [f64; D],
    b: [f64; D],
    speed: f64,
    in_e: bool,
    plus: bool,
    on_highway: bool,
    mid: [f64; D],
}

fn scaled<const D: usize>(x: &[f64; D], eps: f64) -> [f64; D] {
    x.map(|c| c / eps)
}

fn norm<const D: usize>(v: &[f64; D]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

struct Stepper<'a, const D: usize, G: DifferentialGame<D>> {
    game: &'a G,
    eps: f64,
    ii: &'a dyn ControlII<D>,
    e_threshold: f64,
}

impl<const D: usize, G: DifferentialGame<D>> Stepper<'_, D, G> {
    /// One explicit midpoint step with midpoint cost quadrature.
    fn step(&self, pi: &dyn StrategyI<D>, t: f64, x: &[f64; D], h: f64) -> StepOut<D> {
        let c0 = self.game.cell(&scaled(x, self.eps));
        let a0 = pi.action(t, x);
        let b0 = self.ii.action(t, x);
        let f0 = self.game.transition_in(&c0, &a0, &b0);
        let mut mid = *x;
        for k in 0..D {
            mid[k] += 0.5 * h * f0[k];
        }
        let tm = t + 0.5 * h;
        let cm = self.game.cell(&scaled(&mid, self.eps));
        let a = pi.action(tm, &mid);
        let b = self.ii.action(tm, &mid);
        let f1 = self.game.transition_in(&cm, &a, &b);
        let mut xn = *x;
        for k in 0..D {
            xn[k] += h * f1[k];
        }
        let idle_cost = self.game.running_cost_in(&cm, &[0.0; D], &[0.0; D]);
        StepOut {
            x: xn,
            cost: h * self.game.running_cost_in(&cm, &a, &b),
            a,
            b,
            speed: norm(&f0).max(norm(&f1)),
            in_e: idle_cost >= self.e_threshold,
            plus: self.game.positive_push(&cm),
            // inside some support: the spatial part of the cost drops below its maximum
            on_highway: idle_cost < 100.0,
            mid,
        }
    }
}

/// Integrates the state equation from `start` on `[0, horizon]`.
///
/// Mode switches of Player I are located by bisection to `dt·1e-3` (event
/// functions) or hit exactly (deadlines); each piece is integrated separately.
pub fn integrate<const D: usize, G: DifferentialGame<D>>(
    game: &G,
    eps: f64,
    player_i: &mut dyn StrategyI<D>,
    player_ii: &dyn ControlII<D>,
    start: [f64; D],
    opts: &IntegrateOptions,
) -> Result<Trajectory<D>> {
    let w = game.profile().width();
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
    }
    if !(opts.horizon >= 0.0 && opts.horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be finite and ≥ 0, got {}", opts.horizon)));
    }
    let dt_max = eps * w / 2.0;
    if !(opts.dt > 0.0) || opts.dt > dt_max * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "dt = {} does not resolve the bump: need 0 < dt ≤ ε·w/2 = {dt_max}",
            opts.dt
        )));
    }
    if start.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("start state is not finite".into()));
    }

    let stepper = Stepper {
        game,
        eps,
        ii: player_ii,
        e_threshold: opts.e_threshold,
    };
    let dt = opts.dt;
    let horizon = opts.horizon;
    let speed_cap = game.speed_bound() * (1.0 + 1e-9);
    let tol = dt * 1e-3;

    let mut t = 0.0;
    let mut x = start;
    let mut running = 0.0;
    let mut diag = TrajectoryDiagnostics::default();
    let mut highway: Option<bool> = None;
    let mut segments = Vec::new();
    let mut seg_start = 0.0;
    let mut seg_cost = 0.0;
    let mut max_speed: f64 = 0.0;
    let mut lo = start;
    let mut hi = start;
    let mut samples = Vec::new();
    let mut steps = 0usize;

    let record_every = match opts.record {
        Record::Off => None,
        Record::Every(k) => Some(k.max(1)),
    };
    if record_every.is_some() {
        samples.push(Sample {
            t: 0.0,
            x,
            a: player_i.action(0.0, &x),
            b: player_ii.action(0.0, &x),
            running_cost: 0.0,
        });
    }

    let close_segment = |segments: &mut Vec<PhaseSegment>, phase: Phase, t0: f64, t1: f64, cost: f64| {
        segments.push(PhaseSegment { phase, t0, t1, cost });
    };

    while t < horizon {
        // modes whose exit condition already holds end immediately
        let mut guard = 0;
        loop {
            let due_event = player_i.event(t, &x).is_some_and(|g| g >= 0.0);
            let due_deadline = player_i.deadline().is_some_and(|d| d <= t);
            if !(due_event || due_deadline) {
                break;
            }
            close_segment(&mut segments, player_i.phase(), seg_start, t, seg_cost);
            seg_start = t;
            seg_cost = 0.0;
            player_i.advance(t, &x);
            guard += 1;
            if guard > 8 {
                return Err(Error::PolicyInvariant {
                    t,
                    detail: "mode machine does not settle".into(),
                });
            }
        }
        player_i.check(t, &x)?;

        let mut h = dt.min(horizon - t);
        let mut deadline_hit = None;
        if let Some(d) = player_i.deadline() {
            if d - t <= h {
                h = d - t;
                deadline_hit = Some(d);
            }
        }
        let mut out = stepper.step(player_i, t, &x, h);
        let mut event_hit = false;
        if player_i.event(t, &x).is_some() && player_i.event(t + h, &out.x).is_some_and(|g| g >= 0.0) {
            let (mut a, mut b) = (0.0, h);
            while b - a > tol {
                let m = 0.5 * (a + b);
                let o = stepper.step(player_i, t, &x, m);
                if player_i.event(t + m, &o.x).is_some_and(|g| g >= 0.0) {
                    b = m;
                } else {
                    a = m;
                }
            }
            if b < h {
                h = b;
                out = stepper.step(player_i, t, &x, h);
                deadline_hit = None;
            }
            event_hit = true;
        }

        if out.x.iter().any(|c| !c.is_finite()) || !out.cost.is_finite() {
            return Err(Error::NonFinite(format!("state or cost at t = {t}")));
        }
        if out.speed > speed_cap {
            return Err(Error::NonFinite(format!(
                "speed {} exceeds the bound {} at t = {t}",
                out.speed,
                game.speed_bound()
            )));
        }
        max_speed = max_speed.max(out.speed);

        running += out.cost;
        seg_cost += out.cost;
        if out.in_e {
            diag.e_measure += h;
        } else if out.plus {
            diag.u_plus += h;
        } else {
            diag.u_minus += h;
        }
        if out.on_highway {
            if highway.is_some_and(|prev| prev != out.plus) {
                diag.switches += 1;
            }
            highway = Some(out.plus);
        }
        for k in 0..D {
            lo[k] = lo[k].min(out.x[k]).min(out.mid[k]);
            hi[k] = hi[k].max(out.x[k]).max(out.mid[k]);
        }

        t = match deadline_hit {
            Some(d) => d,
            None if horizon - (t + h) <= 1e-15 * horizon.max(1.0) => horizon,
            None => t + h,
        };
        x = out.x;
        steps += 1;

        let switched = event_hit || deadline_hit.is_some();
        if let Some(k) = record_every {
            if steps.is_multiple_of(k) || switched || t >= horizon {
                samples.push(Sample {
                    t,
                    x,
                    a: out.a,
                    b: out.b,
                    running_cost: running,
                });
            }
        }
        if switched {
            close_segment(&mut segments, player_i.phase(), seg_start, t, seg_cost);
            seg_start = t;
            seg_cost = 0.0;
            player_i.advance(t, &x);
        }
    }
    close_segment(&mut segments, player_i.phase(), seg_start, t, seg_cost);

    Ok(Trajectory {
        eps,
        dt,
        horizon,
        start,
        final_state: x,
        running_cost: running,
        terminal_cost: game.initial_data(&x),
        steps,
        samples,
        segments,
        diagnostics: diag,
        max_speed,
        lo,
        hi,
    })
}

/// Plays one pair of named policies in the planar game from the origin.
pub fn play_2d(
    game: &PlanarGame,
    eps: f64,
    policy_i: PolicyISpec,
    policy_ii: PolicyIISpec,
    opts: &IntegrateOptions,
) -> Result<Trajectory<2>> {
    let mut pi = policy_i.build(eps, game, opts.dt)?;
    let pii = policy_ii.build_2d(eps, game, opts.horizon)?;
    integrate(game, eps, pi.as_mut(), pii.as_ref(), [0.0, 0.0], opts)
}

/// Total cost of one member of a policy family.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberResult {
    pub name: String,
    pub running: f64,
    pub terminal: f64,
}

impl MemberResult {
    pub fn total(&self) -> f64 {
        self.running + self.terminal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueEstimate {
    pub value: f64,
    pub members: Vec<MemberResult>,
}

fn family_runs<F>(names: Vec<String>, run: F) -> Result<Vec<MemberResult>>
where
    F: Fn(usize) -> Result<Trajectory<2>> + Sync,
{
    (0..names.len())
        .into_par_iter()
        .map(|k| {
            let tr = run(k)?;
            Ok(MemberResult {
                name: names[k].clone(),
                running: tr.running_cost,
                terminal: tr.terminal_cost,
            })
        })
        .collect()
}

/// `max` over the Player II family of the cost paid by the highway strategy.
pub fn upper_value_estimate(
    game: &PlanarGame,
    eps: f64,
    family: &[PolicyIISpec],
    horizon: f64,
    dt: f64,
) -> Result<ValueEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("Player II family is empty".into()));
    }
    let opts = IntegrateOptions::new(dt, horizon);
    let members = family_runs(family.iter().map(|s| s.name()).collect(), |k| {
        play_2d(game, eps, PolicyISpec::Highway, family[k], &opts)
    })?;
    let value = members.iter().map(MemberResult::total).fold(f64::NEG_INFINITY, f64::max);
    Ok(ValueEstimate { value, members })
}

/// `min` over the Player I family of the cost against the adversarial control.
pub fn lower_value_estimate(
    game: &PlanarGame,
    eps: f64,
    family: &[PolicyISpec],
    horizon: f64,
    dt: f64,
) -> Result<ValueEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("Player I family is empty".into()));
    }
    let opts = IntegrateOptions::new(dt, horizon);
    let members = family_runs(family.iter().map(|s| s.name().to_string()).collect(), |k| {
        play_2d(game, eps, family[k], PolicyIISpec::Adversarial, &opts)
    })?;
    let value = members.iter().map(MemberResult::total).fold(f64::INFINITY, f64::min);
    Ok(ValueEstimate { value, members })
}

/// Game estimate of `H̄(p)` for the spatial example.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorEstimate {
    pub value: f64,
    /// Largest RMS residual of the affine fits, a proxy for the error.
    pub residual: f64,
    pub members: Vec<(String, f64)>,
}

/// Default step for the corrector game.
pub const CORRECTOR_DT: f64 = 1e-3;

/// Plays the corrector strategy for `p` against each member of the Player II
/// family on `[0, horizon]` with `J(t) = ∫R + p·σ(t)`, fits `J` affinely on
/// `[horizon/2, horizon]` and returns the smallest `-slope`.
pub fn corrector_value_game(
    game: &SpatialGame,
    p: &[f64; 3],
    horizon: f64,
    dt: f64,
    family: &[PolicyIISpec],
    rule: CorrectorRule,
) -> Result<CorrectorEstimate> {
    if !(horizon >= 10.0) {
        return Err(Error::Precondition(format!("corrector horizon must be ≥ 10, got {horizon}")));
    }
    if family.is_empty() {
        return Err(Error::InvalidArgument("Player II family is empty".into()));
    }
    let every = ((horizon / dt) / 4000.0).ceil().max(1.0) as usize;
    let opts = IntegrateOptions::new(dt, horizon).recording(Record::Every(every));
    let runs: Vec<(String, f64, f64)> = family
        .par_iter()
        .map(|spec| {
            let ii = spec.build_3d(1.0, horizon)?;
            let start = [0.0; 3];
            let mut pi = CorrectorPolicy::new(game, p, &start, dt, rule)?;
            let tr = integrate(game, 1.0, &mut pi, ii.as_ref(), start, &opts)?;
            let dot = |x: &[f64; 3]| p[0] * x[0] + p[1] * x[1] + p[2] * x[2];
            let j0 = dot(&start);
            let (ts, js): (Vec<f64>, Vec<f64>) = tr
                .samples
                .iter()
                .filter(|s| s.t >= horizon / 2.0)
                .map(|s| (s.t, s.running_cost + dot(&s.x) - j0))
                .unzip();
            let fit = linear_fit(&ts, &js)?;
            Ok((spec.name(), -fit.slope, fit.rms_residual))
        })
        .collect::<Result<_>>()?;
    let value = runs.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let residual = runs.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(CorrectorEstimate {
        value,
        residual,
        members: runs.into_iter().map(|(n, v, _)| (n, v)).collect(),
    })
}

/// [`corrector_value_game`] with the default family, rule and step.
pub fn corrector_value_default(game: &SpatialGame, p: &[f64; 3], horizon: f64, seed: u64) -> Result<CorrectorEstimate> {
    corrector_value_game(game, p, horizon, CORRECTOR_DT, &corrector_family(seed), CorrectorRule::BangBang)
}

/// Diagnostics of a planar trajectory; `threshold` defines `E`.
///
/// Recomputes `|E|`, `|U₊|`, `|U₋|` from stored samples when the threshold
/// differs from the one used during integration.
pub fn diagnostics(tr: &Trajectory<2>, game: &PlanarGame, threshold: f64) -> TrajectoryDiagnostics {
    if threshold == 1.0 || tr.samples.len() < 2 {
        return tr.diagnostics;
    }
    let mut d = TrajectoryDiagnostics {
        switches: tr.diagnostics.switches,
        ..Default::default()
    };
    for w in tr.samples.windows(2) {
        let h = w[1].t - w[0].t;
        let mid = [(w[0].x[0] + w[1].x[0]) / 2.0, (w[0].x[1] + w[1].x[1]) / 2.0];
        let cell = game.cell(&[mid[0] / tr.eps, mid[1] / tr.eps]);
        if game.running_cost_in(&cell, &[0.0; 2], &[0.0; 2]) >= threshold {
            d.e_measure += h;
        } else if game.positive_push(&cell) {
            d.u_plus += h;
        } else {
            d.u_minus += h;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{ConstantI, ConstantII, StayPolicy};
    use crate::torus::BumpProfile;
    use approx::assert_abs_diff_eq;

    fn planar() -> PlanarGame {
        PlanarGame::new(BumpProfile::new(0.01).unwrap())
    }

    #[test]
    fn stay_vs_zero_is_still() {
        let g = planar();
        let eps = 1e-2;
        let opts = IntegrateOptions::new(default_dt(eps), 1.0).recording(Record::Every(1));
        let tr = integrate(&g, eps, &mut StayPolicy, &ConstantII::<2>::zero(), [0.0; 2], &opts).unwrap();
        assert!(tr.samples.iter().all(|s| s.x == [0.0, 0.0]));
        assert_eq!(tr.total_cost(), 0.0);
        assert_eq!(tr.diagnostics.e_measure, 0.0);
        assert_eq!(tr.diagnostics.u_minus, 0.0);
        assert_abs_diff_eq!(tr.diagnostics.u_plus, 1.0, epsilon = 1e-12);
        assert_eq!(tr.samples.len(), tr.steps + 1);
    }

    #[test]
    fn constant_action_off_highway() {
        let g = planar();
        let eps = 1e-2;
        let opts = IntegrateOptions::new(default_dt(eps), 1.0);
        let tr = integrate(
            &g,
            eps,
            &mut ConstantI([1.0, 0.0]),
            &ConstantII::<2>::zero(),
            [0.0, eps / 4.0],
            &opts,
        )
        .unwrap();
        assert_abs_diff_eq!(tr.final_state[0], 2.0, epsilon = 1e-9);
        assert_eq!(tr.final_state[1], eps / 4.0);
        assert_abs_diff_eq!(tr.running_cost, 200.0, epsilon = 1e-9);
        assert_abs_diff_eq!(tr.diagnostics.e_measure, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_coarse_step() {
        let g = planar();
        let eps = 1e-2;
        let opts = IntegrateOptions::new(eps * 0.01, 1.0);
        let err = integrate(&g, eps, &mut StayPolicy, &ConstantII::<2>::zero(), [0.0; 2], &opts).unwrap_err();
        assert!(err.is_precondition());
    }

    #[test]
    fn midpoint_is_second_order() {
        // state feedback inside the homing ball gives a genuinely coupled ODE;
        // open-loop crossings of a smooth bump are integrated spectrally
        let g = PlanarGame::new(BumpProfile::new(0.125).unwrap());
        let eps = 0.25;
        let run = |dt: f64| {
            let opts = IntegrateOptions::new(dt, 0.37);
            let mut home = crate::policies::HomePolicy::new(eps).unwrap();
            integrate(&g, eps, &mut home, &ConstantII::<2>::push(), [0.03, 0.04], &opts).unwrap()
        };
        let dts = [1.0 / 512.0, 1.0 / 1024.0, 1.0 / 2048.0];
        let trs: Vec<_> = dts.iter().map(|&dt| run(dt)).collect();
        let c: Vec<f64> = trs.iter().map(|t| t.running_cost).collect();
        let ratio = (c[0] - c[1]) / (c[1] - c[2]);
        assert!((ratio - 4.0).abs() < 0.5, "cost Richardson ratio {ratio}");
        let x: Vec<f64> = trs.iter().map(|t| t.final_state[0]).collect();
        let ratio = (x[0] - x[1]) / (x[1] - x[2]);
        assert!((ratio - 4.0).abs() < 0.5, "state Richardson ratio {ratio}");
    }

    #[test]
    fn highway_cycle_respects_bounds() {
        let g = planar();
        let eps = 1e-3;
        let opts = IntegrateOptions::new(default_dt(eps), 0.2).recording(Record::Every(1));
        let tr = play_2d(&g, eps, PolicyISpec::Highway, PolicyIISpec::Push, &opts).unwrap();
        assert!(tr.lo[1] >= -1e-12 && tr.hi[1] <= eps / 2.0 + 1e-12, "{:?} {:?}", tr.lo, tr.hi);
        for seg in &tr.segments {
            if seg.phase.is_wait() {
                assert!(seg.cost <= 1e-9, "{seg:?}");
            }
            if seg.phase.is_transit() {
                assert!(seg.cost <= 50.0 * eps * (1.0 + 1e-9), "{seg:?}");
                if seg.t1 < tr.horizon {
                    assert_abs_diff_eq!(seg.t1 - seg.t0, eps / 4.0, epsilon = 1e-15);
                }
            }
        }
        // times between samples never exceed the speed bound
        for w in tr.samples.windows(2) {
            let dx = ((w[1].x[0] - w[0].x[0]).powi(2) + (w[1].x[1] - w[0].x[1]).powi(2)).sqrt();
            assert!(dx <= 3.0 * (w[1].t - w[0].t) * (1.0 + 1e-9));
        }
        let last = tr.samples.last().unwrap();
        assert_abs_diff_eq!(last.running_cost, tr.running_cost, epsilon = 1e-15);
        assert_eq!(last.t, 0.2);
    }

    #[test]
    fn climb_reaches_half_cell() {
        let g = planar();
        let eps = 1e-2;
        // reference integrator step ε·1e-4
        let opts = IntegrateOptions::new(eps * 1e-4, 0.2);
        let mut pi = crate::policies::HighwayPolicy::new(eps, &g, opts.dt).unwrap();
        let tr = integrate(&g, eps, &mut pi, &ConstantII::<2>::push(), [0.0; 2], &opts).unwrap();
        let climb = tr.segments.iter().find(|s| s.phase == Phase::Climb).unwrap();
        assert_abs_diff_eq!(climb.t1 - climb.t0, eps / 4.0, epsilon = 1e-15);
        assert!(tr.hi[1] <= eps / 2.0 + 1e-12);
        assert_abs_diff_eq!(tr.hi[1], eps / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn event_time_is_located() {
        let g = planar();
        let eps = 1e-2;
        let dt = default_dt(eps);
        let opts = IntegrateOptions::new(dt, 0.2);
        let mut pi = crate::policies::HighwayPolicy::new(eps, &g, dt).unwrap();
        integrate(&g, eps, &mut pi, &ConstantII::<2>::push(), [0.0; 2], &opts).unwrap();
        // pushed at unit speed on the highway: u0 reaches ε^{1/2} at t = ε^{1/2}
        assert!((pi.switch_times()[0] - eps.sqrt()).abs() <= dt * 1e-3 + 1e-15);
    }

    #[test]
    fn corrector_zero_momentum_is_free() {
        let g = SpatialGame::new(BumpProfile::new(0.01).unwrap());
        let est = corrector_value_default(&g, &[0.0; 3], 10.0, 1).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(corrector_value_default(&g, &[0.0; 3], 5.0, 1).unwrap_err().is_precondition());
    }

    #[test]
    fn corrector_literal_clamp_gives_half() {
        let g = SpatialGame::new(BumpProfile::new(0.01).unwrap());
        let est = corrector_value_game(
            &g,
            &[1.0, 0.0, 0.0],
            20.0,
            CORRECTOR_DT,
            &corrector_family(1),
            CorrectorRule::LiteralClamp,
        )
        .unwrap();
        assert_abs_diff_eq!(est.value, 100.0, epsilon = 1.0);
        let est = corrector_value_default(&g, &[1.0, 0.0, 0.0], 20.0, 1).unwrap();
        assert_abs_diff_eq!(est.value, 200.0, epsilon = 1.0);
    }
}
