//! The two example games, their closed-form Hamiltonians and audits.
//!
//! Both games share the structure `R(x, a, b) = 100(1 - Φ(x)) + cost(a)` and a
//! transition whose Player II part only acts inside the highway supports, so
//! `R + p·f` separates into an `a`-part and a `b`-part. That separation is what
//! makes the Isaacs condition hold and what the closed forms exploit; the
//! oracle in [`oracle`] does not use it.

pub mod oracle;

use crate::error::{Error, Result};
use crate::torus::{phi_vec_3d, phi_vec_3d_shifted, BumpProfile};

pub use oracle::{
    coercivity_probe, hamiltonian_minmax_oracle, isaacs_audit, minmax_both, IsaacsReport,
    IsaacsRow, MinMaxOrder, OracleValues,
};

/// Clamped Lipschitz initial data `min{|x₁|, 1}` used by both examples.
#[inline]
pub fn initial_data(x1: f64) -> f64 {
    x1.abs().min(1.0)
}

#[inline]
fn dot<const D: usize>(p: &[f64; D], q: &[f64; D]) -> f64 {
    p.iter().zip(q).map(|(a, b)| a * b).sum()
}

#[inline]
fn norm<const D: usize>(p: &[f64; D]) -> f64 {
    dot(p, p).sqrt()
}

/// A zero-sum differential game on ℝ^D with ℤ^D-periodic data.
///
/// `Cell` caches the x-dependent coefficients so inner loops evaluate the
/// bump functions once per state.
pub trait DifferentialGame<const D: usize>: Sync + Send {
    type Cell: Copy + std::fmt::Debug;

    fn cell(&self, x: &[f64; D]) -> Self::Cell;
    fn running_cost_in(&self, cell: &Self::Cell, a: &[f64; D], b: &[f64; D]) -> f64;
    fn transition_in(&self, cell: &Self::Cell, a: &[f64; D], b: &[f64; D]) -> [f64; D];
    fn hamiltonian_in(&self, cell: &Self::Cell, p: &[f64; D]) -> f64;
    /// Whether the unshifted highway family is active at this cell; used to
    /// split non-penalised times into the `U₊`/`U₋` sets.
    fn positive_push(&self, cell: &Self::Cell) -> bool;

    fn action_radius(&self) -> f64;
    /// Upper bound on `|f|` over all states and actions.
    fn speed_bound(&self) -> f64;
    fn profile(&self) -> &BumpProfile;

    /// Discretisation of A: `res` radii times `res` (2D) or `res²` (3D) directions.
    fn action_grid(&self, res: usize) -> Vec<[f64; D]>;
    /// Uniform discretisation of B with `res` points per free coordinate.
    fn push_grid(&self, res: usize) -> Vec<[f64; D]>;

    fn running_cost(&self, x: &[f64; D], a: &[f64; D], b: &[f64; D]) -> f64 {
        self.running_cost_in(&self.cell(x), a, b)
    }

    fn transition(&self, x: &[f64; D], a: &[f64; D], b: &[f64; D]) -> [f64; D] {
        self.transition_in(&self.cell(x), a, b)
    }

    fn hamiltonian(&self, x: &[f64; D], p: &[f64; D]) -> f64 {
        self.hamiltonian_in(&self.cell(x), p)
    }

    fn initial_data(&self, x: &[f64; D]) -> f64 {
        initial_data(x[0])
    }
}

/// Coefficients of the planar game at one point of the unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarCell {
    /// `φ(x₂)`
    pub plus: f64,
    /// `φ(x₂ + ½)`
    pub minus: f64,
}

impl PlanarCell {
    #[inline]
    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.plus - self.minus
    }
}

/// The two-dimensional example: horizontal highways at heights `½ℤ` on which
/// Player II can push along `+e₁` (integer heights) or `-e₁` (half-integer).
///
/// A is the closed unit ball, B = [0, 1] × {0},
/// `R = 100(1 - φ(x₂) - φ(x₂+½)) + 100|a|²`, `f = 2a + b(φ(x₂) - φ(x₂+½))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarGame {
    profile: BumpProfile,
}

impl PlanarGame {
    pub fn new(profile: BumpProfile) -> Self {
        Self { profile }
    }

    /// `min_{|a| ≤ 1} 100|a|² + 2 p·a`
    #[inline]
    pub fn action_minimum(p_norm: f64) -> f64 {
        if p_norm <= 100.0 {
            -p_norm * p_norm / 100.0
        } else {
            100.0 - 2.0 * p_norm
        }
    }

    #[inline]
    pub fn cell_at_height(&self, x2: f64) -> PlanarCell {
        PlanarCell {
            plus: self.profile.eval(x2),
            minus: self.profile.eval(x2 + 0.5),
        }
    }
}

impl DifferentialGame<2> for PlanarGame {
    type Cell = PlanarCell;

    #[inline]
    fn cell(&self, x: &[f64; 2]) -> PlanarCell {
        self.cell_at_height(x[1])
    }

    #[inline]
    fn running_cost_in(&self, cell: &PlanarCell, a: &[f64; 2], _b: &[f64; 2]) -> f64 {
        100.0 * (1.0 - cell.total()) + 100.0 * (a[0] * a[0] + a[1] * a[1])
    }

    #[inline]
    fn transition_in(&self, cell: &PlanarCell, a: &[f64; 2], b: &[f64; 2]) -> [f64; 2] {
        let d = cell.delta();
        [2.0 * a[0] + b[0] * d, 2.0 * a[1] + b[1] * d]
    }

    #[inline]
    fn hamiltonian_in(&self, cell: &PlanarCell, p: &[f64; 2]) -> f64 {
        -100.0 * (1.0 - cell.total()) - Self::action_minimum(norm(p)) - (p[0] * cell.delta()).max(0.0)
    }

    fn positive_push(&self, cell: &PlanarCell) -> bool {
        cell.plus > 0.0
    }

    fn action_radius(&self) -> f64 {
        1.0
    }

    fn speed_bound(&self) -> f64 {
        3.0
    }

    fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    fn action_grid(&self, res: usize) -> Vec<[f64; 2]> {
        let r_max = self.action_radius();
        let mut out = Vec::with_capacity(res * res);
        for i in 0..res {
            let r = r_max * i as f64 / (res - 1) as f64;
            for j in 0..res {
                let th = std::f64::consts::TAU * j as f64 / res as f64;
                out.push([r * th.cos(), r * th.sin()]);
            }
        }
        out
    }

    fn push_grid(&self, res: usize) -> Vec<[f64; 2]> {
        (0..res).map(|k| [k as f64 / (res - 1) as f64, 0.0]).collect()
    }
}

/// Coefficients of the spatial game at one point of the unit cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialCell {
    pub plus: [f64; 3],
    pub minus: [f64; 3],
}

impl SpatialCell {
    /// `Φ(x) = φ(x) + φ(x + ½)`
    #[inline]
    pub fn total(&self) -> f64 {
        self.plus.iter().sum::<f64>() + self.minus.iter().sum::<f64>()
    }

    /// `φ̃(x) - φ̃(x + ½)`
    #[inline]
    pub fn delta(&self) -> [f64; 3] {
        [
            self.plus[0] - self.minus[0],
            self.plus[1] - self.minus[1],
            self.plus[2] - self.minus[2],
        ]
    }

    /// Speed multiplier `2(1 + 99Φ)` applied to Player I's action.
    #[inline]
    pub fn gain(&self) -> f64 {
        2.0 * (1.0 + 99.0 * self.total())
    }
}

/// The three-dimensional example on the highway lattice.
///
/// A is the closed ball of radius 2, B = [0, 1]³,
/// `R = 100(1 - Φ) + 100|a|`, `f = 2(1 + 99Φ)a + b ⊙ (φ̃(x) - φ̃(x+½))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGame {
    profile: BumpProfile,
}

impl SpatialGame {
    pub fn new(profile: BumpProfile) -> Self {
        Self { profile }
    }
}

impl DifferentialGame<3> for SpatialGame {
    type Cell = SpatialCell;

    #[inline]
    fn cell(&self, x: &[f64; 3]) -> SpatialCell {
        SpatialCell {
            plus: phi_vec_3d(x, &self.profile),
            minus: phi_vec_3d_shifted(x, &self.profile),
        }
    }

    #[inline]
    fn running_cost_in(&self, cell: &SpatialCell, a: &[f64; 3], _b: &[f64; 3]) -> f64 {
        100.0 * (1.0 - cell.total()) + 100.0 * norm(a)
    }

    #[inline]
    fn transition_in(&self, cell: &SpatialCell, a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
        let g = cell.gain();
        let d = cell.delta();
        [g * a[0] + b[0] * d[0], g * a[1] + b[1] * d[1], g * a[2] + b[2] * d[2]]
    }

    #[inline]
    fn hamiltonian_in(&self, cell: &SpatialCell, p: &[f64; 3]) -> f64 {
        let phi = cell.total();
        let d = cell.delta();
        let push: f64 = (0..3).map(|i| (p[i] * d[i]).max(0.0)).sum();
        -100.0 * (1.0 - phi) - (200.0 - 2.0 * cell.gain() * norm(p)).min(0.0) - push
    }

    fn positive_push(&self, cell: &SpatialCell) -> bool {
        cell.plus.iter().any(|&v| v > 0.0)
    }

    fn action_radius(&self) -> f64 {
        2.0
    }

    fn speed_bound(&self) -> f64 {
        // Φ ≤ 1 because the supports are disjoint
        2.0 * (1.0 + 99.0) * self.action_radius() + 3f64.sqrt()
    }

    fn profile(&self) -> &BumpProfile {
        &self.profile
    }

    fn action_grid(&self, res: usize) -> Vec<[f64; 3]> {
        let r_max = self.action_radius();
        let mut out = Vec::with_capacity(res * res * res);
        for i in 0..res {
            let r = r_max * i as f64 / (res - 1) as f64;
            for j in 0..res {
                let polar = std::f64::consts::PI * j as f64 / (res - 1) as f64;
                for k in 0..res {
                    let az = std::f64::consts::TAU * k as f64 / res as f64;
                    out.push([
                        r * polar.sin() * az.cos(),
                        r * polar.sin() * az.sin(),
                        r * polar.cos(),
                    ]);
                }
            }
        }
        out
    }

    fn push_grid(&self, res: usize) -> Vec<[f64; 3]> {
        let t = |k: usize| k as f64 / (res - 1) as f64;
        let mut out = Vec::with_capacity(res * res * res);
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    out.push([t(i), t(j), t(k)]);
                }
            }
        }
        out
    }
}

/// Which of the two example games.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    Planar,
    Spatial,
}

impl Example {
    pub fn dim(self) -> usize {
        match self {
            Example::Planar => 2,
            Example::Spatial => 3,
        }
    }
}

impl std::str::FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2d" | "2" => Ok(Example::Planar),
            "3d" | "3" => Ok(Example::Spatial),
            other => Err(Error::Parse(format!("unknown example '{other}' (expected 2d|3d)"))),
        }
    }
}

/// Either example game, with slice-based evaluation for callers that pick
/// the dimension at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GameSpec {
    Planar(PlanarGame),
    Spatial(SpatialGame),
}

fn fixed<const D: usize>(v: &[f64], what: &str) -> Result<[f64; D]> {
    let arr: [f64; D] = v.try_into().map_err(|_| {
        Error::InvalidArgument(format!("{what} has {} components, expected {D}", v.len()))
    })?;
    if arr.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} has non-finite components")));
    }
    Ok(arr)
}

impl GameSpec {
    pub fn new(example: Example, profile: BumpProfile) -> Self {
        match example {
            Example::Planar => GameSpec::Planar(PlanarGame::new(profile)),
            Example::Spatial => GameSpec::Spatial(SpatialGame::new(profile)),
        }
    }

    pub fn example(&self) -> Example {
        match self {
            GameSpec::Planar(_) => Example::Planar,
            GameSpec::Spatial(_) => Example::Spatial,
        }
    }

    pub fn dim(&self) -> usize {
        self.example().dim()
    }

    pub fn profile(&self) -> &BumpProfile {
        match self {
            GameSpec::Planar(g) => g.profile(),
            GameSpec::Spatial(g) => g.profile(),
        }
    }

    pub fn action_radius(&self) -> f64 {
        match self {
            GameSpec::Planar(g) => g.action_radius(),
            GameSpec::Spatial(g) => g.action_radius(),
        }
    }

    pub fn speed_bound(&self) -> f64 {
        match self {
            GameSpec::Planar(g) => g.speed_bound(),
            GameSpec::Spatial(g) => g.speed_bound(),
        }
    }

    /// Closed-form Hamiltonian `H(x, p)`.
    pub fn hamiltonian(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        Ok(match self {
            GameSpec::Planar(g) => g.hamiltonian(&fixed(x, "x")?, &fixed(p, "p")?),
            GameSpec::Spatial(g) => g.hamiltonian(&fixed(x, "x")?, &fixed(p, "p")?),
        })
    }

    pub fn running_cost(&self, x: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
        Ok(match self {
            GameSpec::Planar(g) => g.running_cost(&fixed(x, "x")?, &fixed(a, "a")?, &fixed(b, "b")?),
            GameSpec::Spatial(g) => {
                g.running_cost(&fixed(x, "x")?, &fixed(a, "a")?, &fixed(b, "b")?)
            }
        })
    }

    pub fn transition(&self, x: &[f64], a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        Ok(match self {
            GameSpec::Planar(g) => g
                .transition(&fixed(x, "x")?, &fixed(a, "a")?, &fixed(b, "b")?)
                .to_vec(),
            GameSpec::Spatial(g) => g
                .transition(&fixed(x, "x")?, &fixed(a, "a")?, &fixed(b, "b")?)
                .to_vec(),
        })
    }

    pub fn initial_data(&self, x: &[f64]) -> f64 {
        initial_data(x[0])
    }

    pub fn oracle(&self, x: &[f64], p: &[f64], res: usize) -> Result<OracleValues> {
        match self {
            GameSpec::Planar(g) => minmax_both(g, &fixed(x, "x")?, &fixed(p, "p")?, res),
            GameSpec::Spatial(g) => minmax_both(g, &fixed(x, "x")?, &fixed(p, "p")?, res),
        }
    }
}

/// Planar game with the given profile.
pub fn make_game_2d(profile: BumpProfile) -> PlanarGame {
    PlanarGame::new(profile)
}

/// Spatial game with the given profile.
pub fn make_game_3d(profile: BumpProfile) -> SpatialGame {
    SpatialGame::new(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn planar() -> PlanarGame {
        make_game_2d(BumpProfile::new(0.01).unwrap())
    }

    fn spatial() -> SpatialGame {
        make_game_3d(BumpProfile::new(0.01).unwrap())
    }

    #[test]
    fn planar_examples() {
        let g = planar();
        for b in [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]] {
            assert_eq!(g.running_cost(&[0.0, 0.0], &[0.0, 0.0], &b), 0.0);
        }
        assert_eq!(g.transition(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]), [1.0, 0.0]);
        assert_eq!(g.running_cost(&[0.0, 0.25], &[1.0, 0.0], &[0.0, 0.0]), 200.0);
        assert_eq!(g.initial_data(&[-0.3, 4.0]), 0.3);
        assert_eq!(g.initial_data(&[7.0, 0.0]), 1.0);
    }

    #[test]
    fn planar_hamiltonian_examples() {
        let g = planar();
        assert_eq!(g.hamiltonian(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert_eq!(g.hamiltonian(&[0.0, 0.25], &[0.0, 0.0]), -100.0);
        assert_abs_diff_eq!(g.hamiltonian(&[0.0, 0.0], &[10.0, 0.0]), -9.0, epsilon = 1e-12);
        assert_eq!(g.hamiltonian(&[0.0, 0.25], &[200.0, 0.0]), 200.0);
    }

    #[test]
    fn action_minimum_is_continuous_at_branch() {
        let lo = PlanarGame::action_minimum(100.0 - 1e-9);
        let hi = PlanarGame::action_minimum(100.0 + 1e-9);
        assert_abs_diff_eq!(lo, hi, epsilon = 1e-6);
        assert_eq!(PlanarGame::action_minimum(100.0), -100.0);
    }

    #[test]
    fn spatial_examples() {
        let g = spatial();
        let a = [0.3, -0.2, 0.1];
        let f = g.transition(&[0.0, 0.0, 0.0], &a, &[0.0, 0.0, 0.0]);
        for k in 0..3 {
            assert_abs_diff_eq!(f[k], 200.0 * a[k], epsilon = 1e-12);
        }
        assert_eq!(g.running_cost(&[0.0, 0.0, 0.0], &[0.0; 3], &[1.0, 1.0, 1.0]), 0.0);
        // oracle for the transition example: evaluate the definition directly
        let x = [0.5, 0.5, 0.5];
        let plus = phi_vec_3d(&x, g.profile());
        let minus = phi_vec_3d_shifted(&x, g.profile());
        let expected: Vec<f64> = (0..3).map(|i| plus[i] - minus[i]).collect();
        let f = g.transition(&x, &[0.0; 3], &[1.0, 1.0, 1.0]);
        assert_eq!(f.to_vec(), expected);
        assert_eq!(f, [-1.0, 0.0, 0.0]);
    }

    #[test]
    fn spatial_hamiltonian_examples() {
        let g = spatial();
        assert_eq!(g.hamiltonian(&[0.0; 3], &[0.0; 3]), 0.0);
        assert_eq!(g.hamiltonian(&[0.0; 3], &[1.0, 0.0, 0.0]), 199.0);
        assert_eq!(g.hamiltonian(&[0.4, 0.4, 0.0], &[0.0; 3]), -100.0);
    }

    #[test]
    fn bounds_on_cost_and_velocity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g2 = planar();
        let g3 = spatial();
        let ball = |rng: &mut ChaCha8Rng, r: f64, d: usize| -> Vec<f64> {
            loop {
                let v: Vec<f64> = (0..d).map(|_| rng.random_range(-r..r)).collect();
                if v.iter().map(|c| c * c).sum::<f64>() <= r * r {
                    return v;
                }
            }
        };
        for _ in 0..20_000 {
            let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let a: [f64; 2] = ball(&mut rng, 1.0, 2).try_into().unwrap();
            let b = [rng.random_range(0.0..1.0), 0.0];
            let r = g2.running_cost(&x, &a, &b);
            assert!((0.0..=200.0 + 100.0).contains(&r));
            assert!(norm(&g2.transition(&x, &a, &b)) <= 2.0 * 1.0 + 1.0 + 1e-12);

            let x = [
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ];
            let a: [f64; 3] = ball(&mut rng, 2.0, 3).try_into().unwrap();
            let b = [
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
                rng.random_range(0.0..1.0),
            ];
            let r = g3.running_cost(&x, &a, &b);
            assert!((0.0..=200.0 + 100.0 * 2.0).contains(&r));
            assert!(norm(&g3.transition(&x, &a, &b)) <= g3.speed_bound() + 1e-9);
        }
    }

    #[test]
    fn hamiltonians_are_periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g2 = planar();
        let g3 = make_game_3d(crate::torus::ProfileKind::Experiments.spatial());
        for _ in 0..1000 {
            let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let z = [rng.random_range(-4..=4) as f64, rng.random_range(-4..=4) as f64];
            let p = [rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)];
            let h = g2.hamiltonian(&x, &p);
            // shifting x by an integer perturbs its last bits, which the steep
            // bump flanks amplify; compare relative to |H|
            let shifted = g2.hamiltonian(&[x[0] + z[0], x[1] + z[1]], &p);
            assert!((shifted - h).abs() <= 1e-12 * h.abs().max(1.0), "{shifted} vs {h}");
            // the planar Hamiltonian never reads x₁
            assert_eq!(g2.hamiltonian(&[x[0] + 0.37, x[1]], &p), h);

            let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let z = rng.random_range(-4..=4) as f64;
            let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let h = g3.hamiltonian(&x, &p);
            let shifted = g3.hamiltonian(&[x[0] + z, x[1] - z, x[2] + 2.0 * z], &p);
            assert!((shifted - h).abs() <= 1e-12 * h.abs().max(1.0), "{shifted} vs {h}");
        }
    }

    #[test]
    fn spec_rejects_wrong_dimensions() {
        let spec = GameSpec::new(Example::Spatial, BumpProfile::new(0.01).unwrap());
        assert!(spec.hamiltonian(&[0.0, 0.0], &[0.0, 0.0, 0.0]).is_err());
        assert!(spec.hamiltonian(&[0.0, 0.0, f64::NAN], &[0.0, 0.0, 0.0]).is_err());
        assert_eq!(spec.hamiltonian(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap(), 199.0);
        assert!("4d".parse::<Example>().is_err());
    }
}
