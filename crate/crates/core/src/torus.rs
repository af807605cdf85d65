//! Periodic bump profiles and the highway lattice of the three-dimensional
//! example.
//!
//! The bump is `φ(x) = exp(1 - 1/(1 - s²))` with `s = (|x̄| - ρw) / ((1 - ρ)w)`
//! clipped at zero, where `x̄` is `x` wrapped to `[-1/2, 1/2)`, `w` the support
//! half-width and `ρ` an optional plateau fraction. With `ρ = 0` the maximum
//! is attained at a single point; the plateau makes the zero-cost set of the
//! example games a band of positive width, which grid solvers can resolve.

use crate::error::{Error, Result};

/// Wraps `x` to `[-1/2, 1/2)`.
#[inline]
pub fn wrap_centered(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

/// Smooth, even, ℤ-periodic cutoff with value 1 at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    width: f64,
    plateau: f64,
}

impl BumpProfile {
    /// Profile with support half-width `width` and no plateau.
    pub fn new(width: f64) -> Result<Self> {
        Self::with_plateau(width, 0.0)
    }

    /// Profile equal to 1 on `|x̄| ≤ plateau · width`.
    pub fn with_plateau(width: f64, plateau: f64) -> Result<Self> {
        if !(width > 0.0 && width < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "bump width must lie in (0, 1/2), got {width}"
            )));
        }
        if !(0.0..1.0).contains(&plateau) {
            return Err(Error::InvalidArgument(format!(
                "plateau fraction must lie in [0, 1), got {plateau}"
            )));
        }
        Ok(Self { width, plateau })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    /// Normalised radial coordinate in the transition region; `None` outside
    /// the support.
    #[inline]
    fn radial(&self, dist: f64) -> Option<f64> {
        let inner = self.plateau * self.width;
        let s = (dist - inner).max(0.0) / (self.width - inner);
        (s < 1.0).then_some(s)
    }

    /// Value of the bump at distance `dist ≥ 0` from its centre (no wrapping).
    #[inline]
    pub fn at_distance(&self, dist: f64) -> f64 {
        match self.radial(dist) {
            Some(0.0) => 1.0,
            Some(s) => (1.0 - 1.0 / (1.0 - s * s)).exp(),
            None => 0.0,
        }
    }

    /// Periodised bump `φ(x)`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.at_distance(wrap_centered(x).abs())
    }

    /// Analytic derivative `φ'(x)`.
    pub fn derivative(&self, x: f64) -> f64 {
        let xb = wrap_centered(x);
        match self.radial(xb.abs()) {
            Some(s) if s > 0.0 => {
                let q = 1.0 - s * s;
                let ds_dx = xb.signum() / ((1.0 - self.plateau) * self.width);
                -(1.0 - 1.0 / q).exp() * 2.0 * s / (q * q) * ds_dx
            }
            _ => 0.0,
        }
    }

    /// Sharp bound on `|φ'|`.
    ///
    /// `|d/ds exp(1 - 1/(1 - s²))|` peaks at `s⁴ = 1/3`.
    pub fn derivative_bound(&self) -> f64 {
        let u = 1.0 / 3f64.sqrt();
        let s = u.sqrt();
        let q = 1.0 - u;
        let peak = (1.0 - 1.0 / q).exp() * 2.0 * s / (q * q);
        peak / ((1.0 - self.plateau) * self.width)
    }
}

/// Named parameter sets for the bump profiles.
///
/// `Paper` reproduces the exact constants of the construction (width 1/100).
/// `Experiments` widens the support and adds a plateau so PDE grids can
/// resolve the ε-cell structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    Paper,
    Experiments,
}

impl ProfileKind {
    pub const EXPERIMENTS_PLATEAU: f64 = 0.5;

    pub fn planar(self) -> BumpProfile {
        match self {
            ProfileKind::Paper => BumpProfile::new(0.01).expect("valid width"),
            ProfileKind::Experiments => {
                BumpProfile::with_plateau(0.125, Self::EXPERIMENTS_PLATEAU).expect("valid width")
            }
        }
    }

    pub fn spatial(self) -> BumpProfile {
        match self {
            ProfileKind::Paper => BumpProfile::new(0.01).expect("valid width"),
            ProfileKind::Experiments => {
                BumpProfile::with_plateau(0.1, Self::EXPERIMENTS_PLATEAU).expect("valid width")
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Paper => "paper",
            ProfileKind::Experiments => "experiments",
        }
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(ProfileKind::Paper),
            "experiments" => Ok(ProfileKind::Experiments),
            other => Err(Error::Parse(format!(
                "unknown profile '{other}' (expected paper|experiments)"
            ))),
        }
    }
}

/// Direction of one of the three highway lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineDir {
    /// `ℓ1 = ℝ × {0} × {0}`
    X,
    /// `ℓ2 = {0} × ℝ × {1/4}`
    Y,
    /// `ℓ3 = {1/4} × {1/4} × ℝ`
    Z,
}

impl LineDir {
    pub const ALL: [LineDir; 3] = [LineDir::X, LineDir::Y, LineDir::Z];

    pub fn index(self) -> usize {
        match self {
            LineDir::X => 0,
            LineDir::Y => 1,
            LineDir::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// The two transverse coordinate indices and the line's offsets in them.
    #[inline]
    fn transverse(self) -> ([usize; 2], [f64; 2]) {
        match self {
            LineDir::X => ([1, 2], [0.0, 0.0]),
            LineDir::Y => ([0, 2], [0.0, 0.25]),
            LineDir::Z => ([0, 1], [0.25, 0.25]),
        }
    }
}

/// The lattice `𝓛 = ∪ ℓ_i + ℤ³` together with its shift `𝓛 + ½`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighwayLattice;

impl HighwayLattice {
    pub const SHIFT: [f64; 3] = [0.5, 0.5, 0.5];

    /// Transverse offset from `x` to the nearest translate of the line,
    /// expressed in the line's two transverse coordinates.
    #[inline]
    fn transverse_offset(x: &[f64; 3], dir: LineDir, shifted: bool) -> ([usize; 2], [f64; 2]) {
        let (idx, off) = dir.transverse();
        let shift = if shifted { 0.5 } else { 0.0 };
        let d0 = wrap_centered(x[idx[0]] - off[0] - shift);
        let d1 = wrap_centered(x[idx[1]] - off[1] - shift);
        (idx, [d0, d1])
    }

    /// Euclidean distance from `x` to `ℓ_dir + ℤ³`.
    #[inline]
    pub fn dist(x: &[f64; 3], dir: LineDir) -> f64 {
        let (_, d) = Self::transverse_offset(x, dir, false);
        d[0].hypot(d[1])
    }

    /// Euclidean distance from `x` to `ℓ_dir + ½ + ℤ³`.
    #[inline]
    pub fn dist_shifted(x: &[f64; 3], dir: LineDir) -> f64 {
        let (_, d) = Self::transverse_offset(x, dir, true);
        d[0].hypot(d[1])
    }

    /// Closest point to `x` on `ℓ_dir + ℤ³` (or on the shifted copy).
    pub fn nearest_point(x: &[f64; 3], dir: LineDir, shifted: bool) -> [f64; 3] {
        let (idx, d) = Self::transverse_offset(x, dir, shifted);
        let mut y = *x;
        y[idx[0]] -= d[0];
        y[idx[1]] -= d[1];
        y
    }
}

/// `(φ1, φ2, φ3)` at `x`: the bump of the distance to each line family.
#[inline]
pub fn phi_vec_3d(x: &[f64; 3], profile: &BumpProfile) -> [f64; 3] {
    LineDir::ALL.map(|dir| profile.at_distance(HighwayLattice::dist(x, dir)))
}

/// `(φ1, φ2, φ3)` at `x + ½`.
#[inline]
pub fn phi_vec_3d_shifted(x: &[f64; 3], profile: &BumpProfile) -> [f64; 3] {
    LineDir::ALL.map(|dir| profile.at_distance(HighwayLattice::dist_shifted(x, dir)))
}
