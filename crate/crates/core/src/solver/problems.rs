//! The concrete problems: the oscillatory problem at scale ε, the periodic
//! corrector problem and the effective problem.

use super::grid::{Axis, Grid, ScalarField};
use super::scheme::{estimate_dissipation, evolve, DissipationBounds, EvolveOptions, EvolveReport, NodeHamiltonian, Shifted, Uniform};
use crate::error::{Error, Result};
use crate::experiments::fit::linear_fit;
use crate::game::{DifferentialGame, GameSpec, PlanarCell, PlanarGame, SpatialCell, SpatialGame};
use crate::torus::BumpProfile;

/// Initial data for the evolution problems.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `min(|x₁|, 1)`
    Clamped,
    /// `min(|x|, 1)`
    Radial,
    Zero,
    /// `p·x`
    Linear(Vec<f64>),
}

impl InitialData {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            InitialData::Clamped => x[0].abs().min(1.0),
            InitialData::Radial => x.iter().map(|c| c * c).sum::<f64>().sqrt().min(1.0),
            InitialData::Zero => 0.0,
            InitialData::Linear(p) => p.iter().zip(x).map(|(a, b)| a * b).sum(),
        }
    }

    /// Bound on every partial derivative.
    pub fn lipschitz(&self) -> f64 {
        match self {
            InitialData::Clamped | InitialData::Radial => 1.0,
            InitialData::Zero => 0.0,
            InitialData::Linear(p) => p.iter().fold(0.0, |m, c| m.max(c.abs())),
        }
    }
}

impl std::str::FromStr for InitialData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamped" => Ok(InitialData::Clamped),
            "radial" => Ok(InitialData::Radial),
            "zero" => Ok(InitialData::Zero),
            other => Err(Error::Parse(format!("unknown initial data '{other}' (expected clamped|radial|zero)"))),
        }
    }
}

enum Cells {
    Planar(PlanarGame, Vec<PlanarCell>),
    Spatial(SpatialGame, Vec<SpatialCell>),
}

/// A game Hamiltonian `H(x/ε, p)` sampled at the nodes of a grid.
pub struct GameNodeHamiltonian {
    cells: Cells,
    /// Nodes `0..distinct` already carry every coefficient value.
    distinct: usize,
}

impl GameNodeHamiltonian {
    pub fn new(spec: &GameSpec, grid: &Grid, eps: f64) -> Result<Self> {
        if grid.dim() != spec.dim() {
            return Err(Error::InvalidArgument(format!(
                "grid has dimension {}, game {}",
                grid.dim(),
                spec.dim()
            )));
        }
        let at = |node: usize| {
            let x = grid.coords(node);
            [x[0] / eps, x[1] / eps, x[2] / eps]
        };
        Ok(match spec {
            GameSpec::Planar(g) => Self {
                cells: Cells::Planar(*g, (0..grid.len()).map(|n| g.cell(&[0.0, at(n)[1]])).collect()),
                // the planar coefficients depend on x₂ only
                distinct: grid.strides()[0],
            },
            GameSpec::Spatial(g) => Self {
                cells: Cells::Spatial(*g, (0..grid.len()).map(|n| g.cell(&at(n))).collect()),
                distinct: grid.len(),
            },
        })
    }
}

impl NodeHamiltonian for GameNodeHamiltonian {
    fn dim(&self) -> usize {
        match &self.cells {
            Cells::Planar(..) => 2,
            Cells::Spatial(..) => 3,
        }
    }

    #[inline]
    fn eval(&self, node: usize, p: &[f64]) -> f64 {
        match &self.cells {
            Cells::Planar(g, c) => g.hamiltonian_in(&c[node], &[p[0], p[1]]),
            Cells::Spatial(g, c) => g.hamiltonian_in(&c[node], &[p[0], p[1], p[2]]),
        }
    }

    fn sample_nodes(&self, budget: usize) -> Vec<usize> {
        let stride = self.distinct.div_ceil(budget.max(1)).max(1);
        (0..self.distinct).step_by(stride).collect()
    }
}

/// Solves `u_t + H(x, Du) = 0` from `u0` on `grid` up to `horizon`, with
/// dissipation estimated on `|p_i| ≤ p_box` and an overflow abort there.
pub fn solve_hj<H: NodeHamiltonian + ?Sized>(
    grid: Grid,
    u0: &InitialData,
    ham: &H,
    horizon: f64,
    p_box: f64,
) -> Result<(ScalarField, EvolveReport)> {
    let d = grid.dim();
    let theta = estimate_dissipation(ham, &vec![(-p_box, p_box); d], 512)?;
    let mut field = ScalarField::from_fn(grid, 0.0, |x| u0.eval(x));
    let opts = EvolveOptions::new(horizon).with_p_limit(vec![p_box; d]);
    let report = evolve(&mut field, ham, &theta, &opts, |_| {})?;
    Ok((field, report))
}

/// Grid for the planar problem at scale ε: `x₁ ∈ [-L, L]` with `n1`
/// intervals and one periodic ε-cell in `x₂` with `n2` nodes.
///
/// The solution is exactly ε-periodic in `x₂` because neither `H(x/ε, ·)`
/// nor the initial data vary otherwise, so one cell suffices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroGrid {
    pub half_width: f64,
    pub n1: usize,
    pub n2: usize,
}

impl MicroGrid {
    /// Speed bound of the planar game.
    pub const SPEED: f64 = 3.0;
    /// Gradients of `u^ε` across the highways reach the off-highway cost
    /// scale, so the momentum box is wide; `|∂H/∂p| ≤ |f| ≤ 3` keeps θ small.
    pub const P_BOX: f64 = 200.0;

    /// `L = 2 + V·T`, `x₁` spacing `h1`, and `n2` nodes per cell.
    pub fn standard(horizon: f64, h1: f64, n2: usize) -> Result<Self> {
        if !(h1 > 0.0) {
            return Err(Error::InvalidArgument(format!("h1 must be positive, got {h1}")));
        }
        let half_width = 2.0 + Self::SPEED * horizon;
        let n1 = 2 * (half_width / h1).ceil() as usize;
        Ok(Self { half_width, n1, n2 })
    }

    pub fn h1(&self) -> f64 {
        2.0 * self.half_width / self.n1 as f64
    }

    pub fn h2(&self, eps: f64) -> f64 {
        eps / self.n2 as f64
    }

    /// The coarser of the two spacings in macroscopic units.
    pub fn max_spacing(&self, eps: f64) -> f64 {
        self.h1().max(self.h2(eps))
    }

    pub fn build(&self, eps: f64) -> Result<Grid> {
        Grid::new(vec![Axis::symmetric(self.half_width, self.n1)?, Axis::periodic(eps, self.n2)?])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroSolution {
    pub field: ScalarField,
    /// `u^ε(T, 0)`
    pub value: f64,
    pub theta: DissipationBounds,
    pub report: EvolveReport,
}

/// Solves the planar oscillatory problem `u_t + H(x/ε, Du) = 0`.
///
/// Refuses grids whose `x₂` spacing exceeds `ε·w/4` (the message names the
/// required `n2`) and domains with `L < 1 + V·T`.
pub fn solve_micro(
    profile: BumpProfile,
    eps: f64,
    horizon: f64,
    grid: &MicroGrid,
    u0: &InitialData,
) -> Result<MicroSolution> {
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1/4], got {eps}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("T must be finite and ≥ 0, got {horizon}")));
    }
    let w = profile.width();
    let required = (4.0 / w - 1e-9).ceil() as usize;
    if grid.n2 < required {
        return Err(Error::Precondition(format!(
            "grid does not resolve the bump: x₂ spacing ε/{} > ε·w/4; need N ≥ {required} nodes per cell",
            grid.n2
        )));
    }
    let reach = 1.0 + MicroGrid::SPEED * horizon;
    if grid.half_width < reach {
        return Err(Error::Precondition(format!(
            "domain half-width {} is inside the propagation cone; need L ≥ {reach}",
            grid.half_width
        )));
    }
    let g = grid.build(eps)?;
    let spec = GameSpec::Planar(PlanarGame::new(profile));
    let ham = GameNodeHamiltonian::new(&spec, &g, eps)?;
    let pb = MicroGrid::P_BOX;
    let theta = estimate_dissipation(&ham, &[(-pb, pb), (-pb, pb)], grid.n2)?;
    let mut field = ScalarField::from_fn(g, 0.0, |x| u0.eval(x));
    let opts = EvolveOptions::new(horizon).with_p_limit(vec![pb, pb]);
    let report = evolve(&mut field, &ham, &theta, &opts, |_| {})?;
    let value = field.interpolate(&[0.0, 0.0])?;
    Ok(MicroSolution {
        field,
        value,
        theta,
        report,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectorResult {
    /// Slope of `-mean(w)` on `[T/2, T]`, the estimate of `H̄(p)`.
    pub estimate: f64,
    /// RMS residual of the affine fit.
    pub residual: f64,
    pub steps: usize,
}

/// Solves `w_t + H(x, p + Dw) = 0`, `w(0) = 0` on a periodic grid and
/// extracts `H̄(p)` from the growth of the mean of `w`. Dissipation is
/// estimated on `|Dw_i| ≤ w_box`.
pub fn solve_corrector_periodic<H: NodeHamiltonian + ?Sized>(
    ham: &H,
    grid: Grid,
    p: &[f64],
    horizon: f64,
    w_box: f64,
) -> Result<CorrectorResult> {
    let d = grid.dim();
    if p.len() != d || ham.dim() != d {
        return Err(Error::InvalidArgument(format!("p has {} components, grid {d}", p.len())));
    }
    if grid.axes().iter().any(|a| !a.periodic) {
        return Err(Error::InvalidArgument("the corrector problem needs a periodic grid".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("T must be positive, got {horizon}")));
    }
    let shifted = Shifted {
        inner: ham,
        shift: p.to_vec(),
    };
    let theta = estimate_dissipation(&shifted, &vec![(-w_box, w_box); d], 4096)?;
    let mut field = ScalarField::from_fn(grid, 0.0, |_| 0.0);
    let n = field.values.len() as f64;
    let mut ts = Vec::new();
    let mut ms = Vec::new();
    let opts = EvolveOptions::new(horizon).with_p_limit(vec![w_box; d]);
    let report = evolve(&mut field, &shifted, &theta, &opts, |f| {
        if f.time >= horizon / 2.0 {
            ts.push(f.time);
            ms.push(-f.values.iter().sum::<f64>() / n);
        }
    })?;
    if ts.len() < 2 {
        ts.insert(0, 0.0);
        ms.insert(0, 0.0);
    }
    let fit = linear_fit(&ts, &ms)?;
    Ok(CorrectorResult {
        estimate: fit.slope,
        residual: fit.rms_residual,
        steps: report.steps,
    })
}

/// Momentum box for the game correctors.
pub const CORRECTOR_W_BOX: f64 = 200.0;

/// Corrector estimate of `H̄(p)` for one of the example games on the unit
/// torus with `n` nodes per axis; refuses `1/n > w/4`.
pub fn corrector_pde(spec: &GameSpec, p: &[f64], horizon: f64, n: usize) -> Result<CorrectorResult> {
    let w = spec.profile().width();
    let required = (4.0 / w - 1e-9).ceil() as usize;
    if n < required {
        return Err(Error::Precondition(format!(
            "torus grid does not resolve the bump: need N ≥ {required} nodes per axis, got {n}"
        )));
    }
    let grid = Grid::unit_torus(spec.dim(), n)?;
    let ham = GameNodeHamiltonian::new(spec, &grid, 1.0)?;
    solve_corrector_periodic(&ham, grid, p, horizon, CORRECTOR_W_BOX)
}

/// Solves `ū_t + H̄(Dū) = 0` with an x-independent `H̄` given on the box
/// `[-p_box, p_box]^d`, which must contain `Lip(u0) + 1`.
pub fn solve_effective(
    hbar: &(dyn Fn(&[f64]) -> f64 + Sync),
    p_box: f64,
    u0: &InitialData,
    horizon: f64,
    grid: Grid,
) -> Result<ScalarField> {
    if p_box < u0.lipschitz() + 1.0 {
        return Err(Error::Precondition(format!(
            "momentum box {p_box} must cover Lip(u0) + 1 = {}",
            u0.lipschitz() + 1.0
        )));
    }
    let ham = Uniform::new(grid.dim(), |p: &[f64]| hbar(p));
    Ok(solve_hj(grid, u0, &ham, horizon, p_box)?.0)
}

/// A grid in `x₁` only: `[-L, L]` with `n` intervals, times single-node
/// periodic axes for the remaining `d - 1` directions.
pub fn line_grid(d: usize, half_width: f64, n: usize) -> Result<Grid> {
    let mut axes = vec![Axis::symmetric(half_width, n)?];
    for _ in 1..d {
        axes.push(Axis::periodic(1.0, 1)?);
    }
    Grid::new(axes)
}
