//! Feedback realisations of the players' strategies and controls.
//!
//! A Player I strategy is a finite-state machine: it reads the current time and
//! state, emits an action, and changes mode either when an event function
//! crosses zero (a hitting time of the opponent-driven flow) or when a
//! scheduled deadline is reached. The engine locates both kinds of switching
//! times; the machine itself never looks ahead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{initial_data, DifferentialGame, PlanarGame, SpatialGame};
use crate::torus::{HighwayLattice, LineDir};

/// Mode label used for per-phase cost accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    WaitOutbound,
    Climb,
    WaitInbound,
    Descend,
    Idle,
    Homing,
    Approach,
    Cruise,
}

impl Phase {
    pub fn is_wait(self) -> bool {
        matches!(self, Phase::WaitOutbound | Phase::WaitInbound)
    }

    pub fn is_transit(self) -> bool {
        matches!(self, Phase::Climb | Phase::Descend)
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::WaitOutbound => "wait-outbound",
            Phase::Climb => "climb",
            Phase::WaitInbound => "wait-inbound",
            Phase::Descend => "descend",
            Phase::Idle => "idle",
            Phase::Homing => "homing",
            Phase::Approach => "approach",
            Phase::Cruise => "cruise",
        }
    }
}

/// Player I: a nonanticipative strategy realised as feedback with memory.
pub trait StrategyI<const D: usize>: Send {
    fn name(&self) -> String;
    fn phase(&self) -> Phase;
    fn action(&self, t: f64, sigma: &[f64; D]) -> [f64; D];

    /// The current mode ends when this becomes `≥ 0`.
    fn event(&self, _t: f64, _sigma: &[f64; D]) -> Option<f64> {
        None
    }

    /// The current mode ends at this time.
    fn deadline(&self) -> Option<f64> {
        None
    }

    /// Switch to the next mode; called at the located switching time.
    fn advance(&mut self, _t: f64, _sigma: &[f64; D]) {}

    /// Verifies the invariant of the current mode.
    fn check(&self, _t: f64, _sigma: &[f64; D]) -> Result<()> {
        Ok(())
    }
}

/// Player II: an open- or closed-loop control.
pub trait ControlII<const D: usize>: Send + Sync {
    fn name(&self) -> String;
    fn action(&self, t: f64, sigma: &[f64; D]) -> [f64; D];
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1/4], got {eps}")));
    }
    Ok(())
}

/// Player I's highway-switching strategy for the planar game.
///
/// Cycle: wait on the height-0 highway until `u0(σ) ≥ ε^{1/2}`, climb at unit
/// action for `ε/4` to the height-`ε/2` highway, wait until `σ₁` is back at 0,
/// descend for `ε/4`, repeat.
#[derive(Debug, Clone)]
pub struct HighwayPolicy {
    eps: f64,
    threshold: f64,
    /// Tolerated distance from the highway centre line before the drift
    /// correction kicks in.
    band: f64,
    dt: f64,
    phase: Phase,
    entered: f64,
    /// Sign of `σ₁` when the inbound wait started.
    inbound_sign: f64,
    switch_times: Vec<f64>,
}

impl HighwayPolicy {
    pub fn new(eps: f64, game: &PlanarGame, dt: f64) -> Result<Self> {
        check_eps(eps)?;
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            eps,
            threshold: eps.sqrt(),
            band: game.profile().width() * eps / 2.0,
            dt,
            phase: Phase::WaitOutbound,
            entered: 0.0,
            inbound_sign: 1.0,
            switch_times: Vec::new(),
        })
    }

    /// Mode entry times `t_1 < t_2 < …`.
    pub fn switch_times(&self) -> &[f64] {
        &self.switch_times
    }

    fn target_height(&self) -> f64 {
        match self.phase {
            Phase::WaitInbound => self.eps / 2.0,
            _ => 0.0,
        }
    }

    fn transit_duration(&self) -> f64 {
        self.eps / 4.0
    }
}

impl StrategyI<2> for HighwayPolicy {
    fn name(&self) -> String {
        "highway".into()
    }

    fn phase(&self) -> Phase {
        self.phase
    }

    fn action(&self, _t: f64, sigma: &[f64; 2]) -> [f64; 2] {
        match self.phase {
            Phase::Climb => [0.0, 1.0],
            Phase::Descend => [0.0, -1.0],
            _ => {
                let offset = sigma[1] - self.target_height();
                if offset.abs() > self.band {
                    [0.0, (-offset / (2.0 * self.dt)).clamp(-1.0, 1.0)]
                } else {
                    [0.0, 0.0]
                }
            }
        }
    }

    fn event(&self, _t: f64, sigma: &[f64; 2]) -> Option<f64> {
        match self.phase {
            Phase::WaitOutbound => Some(initial_data(sigma[0]) - self.threshold),
            Phase::WaitInbound => Some(-sigma[0] * self.inbound_sign),
            _ => None,
        }
    }

    fn deadline(&self) -> Option<f64> {
        self.phase.is_transit().then(|| self.entered + self.transit_duration())
    }

    fn advance(&mut self, t: f64, sigma: &[f64; 2]) {
        self.phase = match self.phase {
            Phase::WaitOutbound => Phase::Climb,
            Phase::Climb => {
                self.inbound_sign = if sigma[0] < 0.0 { -1.0 } else { 1.0 };
                Phase::WaitInbound
            }
            Phase::WaitInbound => Phase::Descend,
            _ => Phase::WaitOutbound,
        };
        self.entered = t;
        self.switch_times.push(t);
    }

    fn check(&self, t: f64, sigma: &[f64; 2]) -> Result<()> {
        if self.phase.is_wait() {
            let offset = (sigma[1] - self.target_height()).abs();
            // twice the correction band: the correction acts before this fires
            if offset > 2.0 * self.band {
                return Err(Error::PolicyInvariant {
                    t,
                    detail: format!(
                        "{} left its highway: σ₂ = {} (target {})",
                        self.phase.name(),
                        sigma[1],
                        self.target_height()
                    ),
                });
            }
        }
        Ok(())
    }
}

/// `a ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StayPolicy;

impl<const D: usize> StrategyI<D> for StayPolicy {
    fn name(&self) -> String {
        "stay".into()
    }

    fn phase(&self) -> Phase {
        Phase::Idle
    }

    fn action(&self, _t: f64, _sigma: &[f64; D]) -> [f64; D] {
        [0.0; D]
    }
}

/// Full-speed return to the origin, `a = -σ/max(|σ|, ε/4)`; the cap avoids
/// chattering once the state is within `ε/4` of home.
#[derive(Debug, Clone, Copy)]
pub struct HomePolicy {
    scale: f64,
}

impl HomePolicy {
    pub fn new(eps: f64) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self { scale: eps / 4.0 })
    }
}

impl<const D: usize> StrategyI<D> for HomePolicy {
    fn name(&self) -> String {
        "home".into()
    }

    fn phase(&self) -> Phase {
        Phase::Homing
    }

    fn action(&self, _t: f64, sigma: &[f64; D]) -> [f64; D] {
        let n = sigma.iter().map(|c| c * c).sum::<f64>().sqrt().max(self.scale);
        sigma.map(|c| -c / n)
    }
}

/// A constant action; used for calibration runs.
#[derive(Debug, Clone, Copy)]
pub struct ConstantI<const D: usize>(pub [f64; D]);

impl<const D: usize> StrategyI<D> for ConstantI<D> {
    fn name(&self) -> String {
        format!("constant{:?}", self.0)
    }

    fn phase(&self) -> Phase {
        Phase::Idle
    }

    fn action(&self, _t: f64, _sigma: &[f64; D]) -> [f64; D] {
        self.0
    }
}

/// Player II's control against which no Player I strategy beats `cε^{1/2}`:
/// push along the highway whenever the state is still near `x₁ = 0` or the
/// push would carry it further from `x₁ = 0`.
#[derive(Debug, Clone, Copy)]
pub struct AdversarialControl {
    eps: f64,
    threshold: f64,
    game: PlanarGame,
}

impl AdversarialControl {
    pub fn new(eps: f64, game: &PlanarGame) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self {
            eps,
            threshold: 2.0 * eps.sqrt(),
            game: *game,
        })
    }
}

impl ControlII<2> for AdversarialControl {
    fn name(&self) -> String {
        "adversarial".into()
    }

    fn action(&self, _t: f64, sigma: &[f64; 2]) -> [f64; 2] {
        if initial_data(sigma[0]) <= self.threshold {
            return [1.0, 0.0];
        }
        // the push is (Δφ, 0); it increases σ₁·f₁ iff σ₁Δφ > 0
        let delta = self.game.cell_at_height(sigma[1] / self.eps).delta();
        if sigma[0] * delta > 0.0 {
            [1.0, 0.0]
        } else {
            [0.0, 0.0]
        }
    }
}

/// A constant control; `b ≡ 0` and `b ≡ (1, …)` are the named members.
#[derive(Debug, Clone, Copy)]
pub struct ConstantII<const D: usize> {
    pub b: [f64; D],
    pub label: &'static str,
}

impl<const D: usize> ConstantII<D> {
    pub fn zero() -> Self {
        Self { b: [0.0; D], label: "zero" }
    }
}

impl ConstantII<2> {
    pub fn push() -> Self {
        Self { b: [1.0, 0.0], label: "push" }
    }
}

impl ConstantII<3> {
    pub fn push() -> Self {
        Self { b: [1.0; 3], label: "push" }
    }
}

impl<const D: usize> ControlII<D> for ConstantII<D> {
    fn name(&self) -> String {
        self.label.into()
    }

    fn action(&self, _t: f64, _sigma: &[f64; D]) -> [f64; D] {
        self.b
    }
}

/// Seeded open-loop bang-bang control: each coordinate of B that is free is
/// redrawn from {0, 1} on every interval `[kτ, (k+1)τ)`.
#[derive(Debug, Clone)]
pub struct RandomBangBang<const D: usize> {
    seed: u64,
    tau: f64,
    free: usize,
    bits: Vec<u8>,
}

impl<const D: usize> RandomBangBang<D> {
    /// `free` is the number of leading coordinates of B that vary (1 for the
    /// planar game, 3 for the spatial one).
    pub fn new(seed: u64, tau: f64, horizon: f64, free: usize) -> Result<Self> {
        if !(tau > 0.0) || !(horizon >= 0.0) || free == 0 || free > D {
            return Err(Error::InvalidArgument(format!(
                "bang-bang needs τ > 0, horizon ≥ 0 and 1 ≤ free ≤ {D}"
            )));
        }
        let intervals = (horizon / tau).ceil() as usize + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = (0..intervals * free).map(|_| rng.random_range(0..2u8)).collect();
        Ok(Self { seed, tau, free, bits })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl<const D: usize> ControlII<D> for RandomBangBang<D> {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn action(&self, t: f64, _sigma: &[f64; D]) -> [f64; D] {
        let k = ((t.max(0.0) / self.tau) as usize).min(self.bits.len() / self.free - 1);
        let mut b = [0.0; D];
        for (i, bi) in b.iter_mut().take(self.free).enumerate() {
            *bi = self.bits[k * self.free + i] as f64;
        }
        b
    }
}

/// Player I strategies for the planar game, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyISpec {
    Highway,
    Stay,
    Home,
}

impl PolicyISpec {
    pub fn build(self, eps: f64, game: &PlanarGame, dt: f64) -> Result<Box<dyn StrategyI<2>>> {
        Ok(match self {
            PolicyISpec::Highway => Box::new(HighwayPolicy::new(eps, game, dt)?),
            PolicyISpec::Stay => {
                check_eps(eps)?;
                Box::new(StayPolicy)
            }
            PolicyISpec::Home => Box::new(HomePolicy::new(eps)?),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            PolicyISpec::Highway => "highway",
            PolicyISpec::Stay => "stay",
            PolicyISpec::Home => "home",
        }
    }
}

impl std::str::FromStr for PolicyISpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "highway" => Ok(PolicyISpec::Highway),
            "stay" => Ok(PolicyISpec::Stay),
            "home" => Ok(PolicyISpec::Home),
            other => Err(Error::Parse(format!(
                "unknown Player I policy '{other}' (expected highway|stay|home)"
            ))),
        }
    }
}

/// Player II controls, selectable by name; `random:SEED` carries its seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyIISpec {
    Adversarial,
    Zero,
    Push,
    Random(u64),
}

impl PolicyIISpec {
    /// Planar control; `horizon` sizes the bang-bang schedule.
    pub fn build_2d(self, eps: f64, game: &PlanarGame, horizon: f64) -> Result<Box<dyn ControlII<2>>> {
        check_eps(eps)?;
        Ok(match self {
            PolicyIISpec::Adversarial => Box::new(AdversarialControl::new(eps, game)?),
            PolicyIISpec::Zero => Box::new(ConstantII::<2>::zero()),
            PolicyIISpec::Push => Box::new(ConstantII::<2>::push()),
            PolicyIISpec::Random(seed) => Box::new(RandomBangBang::<2>::new(seed, eps, horizon, 1)?),
        })
    }

    /// Spatial control with switching scale `tau`.
    pub fn build_3d(self, tau: f64, horizon: f64) -> Result<Box<dyn ControlII<3>>> {
        Ok(match self {
            PolicyIISpec::Adversarial => {
                return Err(Error::InvalidArgument(
                    "the adversarial control is defined for the planar game only".into(),
                ))
            }
            PolicyIISpec::Zero => Box::new(ConstantII::<3>::zero()),
            PolicyIISpec::Push => Box::new(ConstantII::<3>::push()),
            PolicyIISpec::Random(seed) => Box::new(RandomBangBang::<3>::new(seed, tau, horizon, 3)?),
        })
    }

    pub fn name(self) -> String {
        match self {
            PolicyIISpec::Adversarial => "adversarial".into(),
            PolicyIISpec::Zero => "zero".into(),
            PolicyIISpec::Push => "push".into(),
            PolicyIISpec::Random(seed) => format!("random:{seed}"),
        }
    }
}

impl std::str::FromStr for PolicyIISpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adversarial" => Ok(PolicyIISpec::Adversarial),
            "zero" => Ok(PolicyIISpec::Zero),
            "push" => Ok(PolicyIISpec::Push),
            _ => {
                if let Some(seed) = s.strip_prefix("random:") {
                    seed.parse()
                        .map(PolicyIISpec::Random)
                        .map_err(|_| Error::Parse(format!("bad seed in '{s}'")))
                } else if s == "random" {
                    Ok(PolicyIISpec::Random(0))
                } else {
                    Err(Error::Parse(format!(
                        "unknown Player II policy '{s}' (expected adversarial|zero|push|random:SEED)"
                    )))
                }
            }
        }
    }
}

/// The planar baseline families: Player I {highway, stay, home} and
/// Player II {adversarial, zero, push, random:seed}.
pub fn baseline_families(seed: u64) -> (Vec<PolicyISpec>, Vec<PolicyIISpec>) {
    (
        vec![PolicyISpec::Highway, PolicyISpec::Stay, PolicyISpec::Home],
        vec![
            PolicyIISpec::Adversarial,
            PolicyIISpec::Zero,
            PolicyIISpec::Push,
            PolicyIISpec::Random(seed),
        ],
    )
}

/// The Player II family used against the corrector strategy.
pub fn corrector_family(seed: u64) -> Vec<PolicyIISpec> {
    vec![PolicyIISpec::Zero, PolicyIISpec::Push, PolicyIISpec::Random(seed)]
}

/// How the corrector strategy moves along its highway.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectorRule {
    /// `a = -2 sgn(γ) e_i` if `|γ| > ½`, else 0: the minimiser of
    /// `100|a| + 200γ a·e_i` over the ball of radius 2.
    #[default]
    BangBang,
    /// `a = -sgn(γ) min(2, |γ|) e_i`.
    LiteralClamp,
}

/// `h(γ) = max(0, 400|γ| - 200)`.
#[inline]
fn h_of(gamma: f64) -> f64 {
    (400.0 * gamma.abs() - 200.0).max(0.0)
}

/// Player I's strategy for the long-time corrector of the spatial game with
/// momentum `p`: reach a highway along the axis `i` maximising `h(p_i)` whose
/// push cannot raise `p·σ`, then cruise along it.
#[derive(Debug, Clone)]
pub struct CorrectorPolicy {
    game: SpatialGame,
    dt: f64,
    axis: usize,
    cruise: [f64; 3],
    /// A point of the target highway and the axis of that highway.
    target: [f64; 3],
    line_axis: usize,
    phase: Phase,
}

impl CorrectorPolicy {
    /// Tolerance for having reached the highway centre line.
    pub const ARRIVAL_TOL: f64 = 1e-9;

    pub fn new(game: &SpatialGame, p: &[f64; 3], start: &[f64; 3], dt: f64, rule: CorrectorRule) -> Result<Self> {
        if p.iter().any(|c| !c.is_finite()) || !(dt > 0.0) {
            return Err(Error::InvalidArgument("corrector policy needs finite p and dt > 0".into()));
        }
        let axis = (0..3)
            .max_by(|&i, &j| h_of(p[i]).total_cmp(&h_of(p[j])).then(j.cmp(&i)))
            .unwrap_or(0);
        let gamma = p[axis];
        let mut cruise = [0.0; 3];
        let speed = match rule {
            CorrectorRule::BangBang => {
                if gamma.abs() > 0.5 {
                    2.0
                } else {
                    0.0
                }
            }
            CorrectorRule::LiteralClamp => gamma.abs().min(2.0),
        };
        cruise[axis] = -gamma.signum() * speed;
        if gamma == 0.0 {
            cruise[axis] = 0.0;
        }

        // a highway ℓ_k pushes along +e_k, its shift along -e_k; it is safe
        // when that push cannot increase p·σ
        let dir_of = |k: usize| LineDir::from_index(k).expect("axis index");
        let (target, line_axis) = if speed == 0.0 {
            let mut best: Option<(f64, [f64; 3], usize)> = None;
            for k in 0..3 {
                for shifted in [false, true] {
                    let safe = if shifted { p[k] >= 0.0 } else { p[k] <= 0.0 };
                    if !safe {
                        continue;
                    }
                    let q = HighwayLattice::nearest_point(start, dir_of(k), shifted);
                    let d = dist(start, &q);
                    if best.is_none_or(|(bd, _, _)| d < bd) {
                        best = Some((d, q, k));
                    }
                }
            }
            best.map(|(_, q, k)| (q, k)).unwrap_or((*start, axis))
        } else {
            (HighwayLattice::nearest_point(start, dir_of(axis), gamma >= 0.0), axis)
        };
        let phase = if dist(start, &target) <= Self::ARRIVAL_TOL {
            Phase::Cruise
        } else {
            Phase::Approach
        };
        Ok(Self {
            game: *game,
            dt,
            axis,
            cruise,
            target,
            line_axis,
            phase,
        })
    }

    /// Transverse offset from `sigma` to the target highway.
    fn offset(&self, sigma: &[f64; 3]) -> [f64; 3] {
        let mut v = [
            self.target[0] - sigma[0],
            self.target[1] - sigma[1],
            self.target[2] - sigma[2],
        ];
        v[self.line_axis] = 0.0;
        v
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    /// Action used once on the highway.
    pub fn cruise_action(&self) -> [f64; 3] {
        self.cruise
    }

    pub fn target(&self) -> [f64; 3] {
        self.target
    }
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dist(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

impl StrategyI<3> for CorrectorPolicy {
    fn name(&self) -> String {
        "corrector".into()
    }

    fn phase(&self) -> Phase {
        self.phase
    }

    fn action(&self, _t: f64, sigma: &[f64; 3]) -> [f64; 3] {
        match self.phase {
            Phase::Approach => {
                let v = self.offset(sigma);
                let n = norm3(&v);
                if n == 0.0 {
                    return [0.0; 3];
                }
                // the largest gain on the torus is 2(1 + 99); scaling by it
                // keeps one step from overshooting the line
                let max_gain = 2.0 * (1.0 + 99.0);
                let r = self.game.action_radius().min(n / (max_gain * self.dt));
                v.map(|c| c / n * r)
            }
            _ => self.cruise,
        }
    }

    fn event(&self, _t: f64, sigma: &[f64; 3]) -> Option<f64> {
        (self.phase == Phase::Approach).then(|| Self::ARRIVAL_TOL - norm3(&self.offset(sigma)))
    }

    fn advance(&mut self, _t: f64, _sigma: &[f64; 3]) {
        self.phase = Phase::Cruise;
    }
}
