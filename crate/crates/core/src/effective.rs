//! Effective Hamiltonian of the spatial example: closed forms, numerical
//! extraction, tables and convexity/decomposition audits.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::corrector_value_default;
use crate::error::{Error, Result};
use crate::game::{GameSpec, SpatialGame};
use crate::solver::corrector_pde;
use crate::torus::BumpProfile;

/// `h(γ) = max(0, 400|γ| - 200)`
pub fn h_formula(gamma: f64) -> f64 {
    (400.0 * gamma.abs() - 200.0).max(0.0)
}

/// `H̄(p) = max_i h(p_i)`
pub fn hbar_formula_3d(p: &[f64; 3]) -> f64 {
    p.iter().map(|&c| h_formula(c)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Formula,
    Game,
    Pde,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Formula => "formula",
            Method::Game => "game",
            Method::Pde => "pde",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "formula" => Ok(Method::Formula),
            "game" => Ok(Method::Game),
            "pde" => Ok(Method::Pde),
            other => Err(Error::Parse(format!("unknown method '{other}' (expected formula|game|pde)"))),
        }
    }
}

/// Settings for [`hbar_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConfig {
    pub profile: BumpProfile,
    pub horizon: f64,
    /// Torus nodes per axis for the PDE method.
    pub resolution: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbarEstimate {
    pub value: f64,
    /// Affine-fit residual, zero for the closed form.
    pub residual: f64,
}

/// `H̄(p) = -lim v^p(t, 0)/t`, read off the growth of the corrector.
pub fn hbar_estimate(p: &[f64; 3], method: Method, cfg: &EstimateConfig) -> Result<HbarEstimate> {
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(format!("p must be finite, got {p:?}")));
    }
    match method {
        Method::Formula => Ok(HbarEstimate {
            value: hbar_formula_3d(p),
            residual: 0.0,
        }),
        Method::Game => {
            let game = SpatialGame::new(cfg.profile);
            let est = corrector_value_default(&game, p, cfg.horizon, cfg.seed)?;
            Ok(HbarEstimate {
                value: est.value,
                residual: est.residual,
            })
        }
        Method::Pde => {
            let spec = GameSpec::Spatial(SpatialGame::new(cfg.profile));
            let r = corrector_pde(&spec, p, cfg.horizon, cfg.resolution)?;
            Ok(HbarEstimate {
                value: r.estimate,
                residual: r.residual,
            })
        }
    }
}

/// `H̄` on the grid `[-P, P]³` with `n` points per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHTable {
    pub p_box: f64,
    pub n: usize,
    pub provenance: Method,
    /// Row-major in `(p₁, p₂, p₃)`, `p₃` fastest.
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl EffectiveHTable {
    /// Box and resolution putting the kinks `|γ| = ½` on grid nodes.
    pub const DEFAULT_BOX: f64 = 3.0;
    pub const DEFAULT_POINTS: usize = 49;

    fn check_shape(p_box: f64, n: usize) -> Result<()> {
        if !(p_box > 0.0 && p_box.is_finite()) || n < 2 {
            return Err(Error::InvalidArgument(format!("table needs P > 0 and ≥ 2 points, got P = {p_box}, n = {n}")));
        }
        Ok(())
    }

    pub fn formula(p_box: f64, n: usize) -> Result<Self> {
        Self::tabulate(p_box, n, Method::Formula, |p| {
            Ok(HbarEstimate {
                value: hbar_formula_3d(p),
                residual: 0.0,
            })
        })
    }

    /// Runs `f` at every node in parallel.
    pub fn tabulate<F>(p_box: f64, n: usize, provenance: Method, f: F) -> Result<Self>
    where
        F: Fn(&[f64; 3]) -> Result<HbarEstimate> + Sync,
    {
        Self::check_shape(p_box, n)?;
        let shell = Self {
            p_box,
            n,
            provenance,
            values: Vec::new(),
            residuals: Vec::new(),
        };
        let est: Vec<HbarEstimate> = (0..n * n * n)
            .into_par_iter()
            .map(|k| f(&shell.point(k)))
            .collect::<Result<_>>()?;
        if let Some(k) = est.iter().position(|e| !e.value.is_finite()) {
            return Err(Error::NonFinite(format!("H̄ at {:?}", shell.point(k))));
        }
        Ok(Self {
            values: est.iter().map(|e| e.value).collect(),
            residuals: est.iter().map(|e| e.residual).collect(),
            ..shell
        })
    }

    pub fn estimated(p_box: f64, n: usize, method: Method, cfg: &EstimateConfig) -> Result<Self> {
        Self::tabulate(p_box, n, method, |p| hbar_estimate(p, method, cfg))
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.p_box + 2.0 * self.p_box * i as f64 / (self.n - 1) as f64
    }

    pub fn index(&self, k: usize) -> [usize; 3] {
        [k / (self.n * self.n), (k / self.n) % self.n, k % self.n]
    }

    pub fn flat(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n + i[1]) * self.n + i[2]
    }

    pub fn point(&self, k: usize) -> [f64; 3] {
        let i = self.index(k);
        [self.coord(i[0]), self.coord(i[1]), self.coord(i[2])]
    }

    pub fn range(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        hi - lo
    }

    /// Trilinear interpolation; points outside the box are refused.
    pub fn interpolate(&self, p: &[f64]) -> Result<f64> {
        if p.len() != 3 {
            return Err(Error::InvalidArgument(format!("p has {} components, expected 3", p.len())));
        }
        let h = 2.0 * self.p_box / (self.n - 1) as f64;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for k in 0..3 {
            if !(p[k].abs() <= self.p_box) {
                return Err(Error::MomentumOverflow {
                    axis: k + 1,
                    value: p[k].abs(),
                    limit: self.p_box,
                });
            }
            let s = (p[k] + self.p_box) / h;
            let i = (s.floor() as usize).min(self.n - 2);
            base[k] = i;
            frac[k] = s - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let mut w = 1.0;
            let mut idx = base;
            for k in 0..3 {
                if corner >> k & 1 == 1 {
                    idx[k] += 1;
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * self.values[self.flat(idx)];
            }
        }
        Ok(acc)
    }

    /// Worst midpoint violation over node pairs whose midpoint is a node:
    /// all pairs for small tables, `samples` random pairs otherwise.
    pub fn convexity_violation(&self, samples: usize, seed: u64) -> f64 {
        let len = self.values.len();
        let violation = |a: [usize; 3], b: [usize; 3]| -> Option<f64> {
            if (0..3).any(|k| !(a[k] + b[k]).is_multiple_of(2)) {
                return None;
            }
            let mid = [(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2];
            Some(self.values[self.flat(mid)] - 0.5 * (self.values[self.flat(a)] + self.values[self.flat(b)]))
        };
        let mut worst = f64::NEG_INFINITY;
        if len * len <= 4 * samples.max(1) {
            for i in 0..len {
                for j in i..len {
                    if let Some(v) = violation(self.index(i), self.index(j)) {
                        worst = worst.max(v);
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let a = self.index(rng.random_range(0..len));
                let mut b = a;
                for k in 0..3 {
                    let parity = a[k] % 2;
                    b[k] = parity + 2 * rng.random_range(0..(self.n - parity).div_ceil(2));
                }
                worst = worst.max(violation(a, b).unwrap_or(f64::NEG_INFINITY));
            }
        }
        worst
    }

    /// Header `p1,p2,p3,hbar,provenance,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p1,p2,p3,hbar,provenance,residual\n");
        for (k, (v, r)) in self.values.iter().zip(&self.residuals).enumerate() {
            let p = self.point(k);
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e}\n",
                p[0], p[1], p[2], v, self.provenance, r
            ));
        }
        out
    }
}

/// Worst `H̄((p+q)/2) - (H̄(p) + H̄(q))/2` over `samples` random pairs in
/// `[-P, P]^d`. Coordinates are multiples of `P/1024` with matching parity,
/// so midpoints are computed without rounding.
pub fn convexity_check(hbar: &dyn Fn(&[f64]) -> f64, dim: usize, p_box: f64, samples: usize, seed: u64) -> f64 {
    const STEPS: i64 = 1024;
    let unit = p_box / STEPS as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let (mut p, mut q, mut m) = ([0.0; 3], [0.0; 3], [0.0; 3]);
    for _ in 0..samples {
        for k in 0..dim {
            let a = rng.random_range(-STEPS..=STEPS);
            let b = a + 2 * rng.random_range(-(STEPS + a).div_euclid(2)..=(STEPS - a).div_euclid(2));
            p[k] = a as f64 * unit;
            q[k] = b as f64 * unit;
            m[k] = ((a + b) / 2) as f64 * unit;
        }
        let v = hbar(&m[..dim]) - 0.5 * (hbar(&p[..dim]) + hbar(&q[..dim]));
        worst = worst.max(v);
    }
    worst
}

/// Worst `|est(p) - max_i est(p_i e_i)|` over the samples.
pub fn decomposition_check<F>(samples: &[[f64; 3]], est: F) -> Result<f64>
where
    F: Fn(&[f64; 3]) -> Result<f64> + Sync,
{
    let gaps: Vec<f64> = samples
        .par_iter()
        .map(|p| {
            let whole = est(p)?;
            let mut axes = f64::NEG_INFINITY;
            for k in 0..3 {
                let mut e = [0.0; 3];
                e[k] = p[k];
                axes = axes.max(if e == *p { whole } else { est(&e)? });
            }
            Ok((whole - axes).abs())
        })
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ProfileKind;
    use proptest::prelude::*;

    #[test]
    fn h_values() {
        assert_eq!(h_formula(0.0), 0.0);
        assert_eq!(h_formula(1.0), 200.0);
        assert_eq!(h_formula(2.0), 600.0);
        assert_eq!(h_formula(-0.5), 0.0);
        assert_eq!(h_formula(0.5 - 1e-9), 0.0);
        assert!(h_formula(0.5 + 1e-9) > 0.0);
    }

    #[test]
    fn hbar_values() {
        assert_eq!(hbar_formula_3d(&[1.0, 1.0, 1.0]), 200.0);
        assert_eq!(hbar_formula_3d(&[0.0, 0.0, 0.5]), 0.0);
        assert_eq!(hbar_formula_3d(&[2.0, 0.0, 0.0]), 600.0);
    }

    proptest! {
        #[test]
        fn hbar_symmetries(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64) {
            let v = hbar_formula_3d(&[a, b, c]);
            prop_assert_eq!(v, hbar_formula_3d(&[c, a, b]));
            prop_assert_eq!(v, hbar_formula_3d(&[b, a, c]));
            prop_assert_eq!(v, hbar_formula_3d(&[-a, b, -c]));
            prop_assert_eq!(h_formula(a), h_formula(-a));
        }
    }

    #[test]
    fn formula_is_convex() {
        let f = |p: &[f64]| hbar_formula_3d(&[p[0], p[1], p[2]]);
        assert!(convexity_check(&f, 3, 3.0, 1000, 7) <= 0.0);
        let table = EffectiveHTable::formula(3.0, 49).unwrap();
        assert!(table.convexity_violation(100_000, 1) <= 0.0);
    }

    #[test]
    fn concave_is_detected() {
        let f = |p: &[f64]| -(p[0] * p[0] + p[1] * p[1]);
        assert!(convexity_check(&f, 2, 1.0, 200, 3) > 0.0);
    }

    #[test]
    fn formula_table_is_exact_on_nodes_and_kinks() {
        let t = EffectiveHTable::formula(3.0, 49).unwrap();
        for &p in &[[0.5, 0.0, 0.0], [1.0, -0.5, 0.25], [-2.0, 1.0, 3.0]] {
            assert_eq!(t.interpolate(&p).unwrap(), hbar_formula_3d(&p), "{p:?}");
        }
        // one axis dominates across this whole cell, so H̄ is linear there
        let p = [0.3, 0.7, -1.1];
        assert!((t.interpolate(&p).unwrap() - hbar_formula_3d(&p)).abs() < 1e-9);
        assert!(matches!(t.interpolate(&[3.5, 0.0, 0.0]), Err(Error::MomentumOverflow { axis: 1, .. })));
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let t = EffectiveHTable::formula(2.0, 3).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("p1,p2,p3,hbar,provenance,residual"));
        assert_eq!(lines.clone().count(), 27);
        assert!(lines.all(|l| l.split(',').nth(4) == Some("formula")));
    }

    #[test]
    fn decomposition_of_formula_is_exact() {
        let gap = decomposition_check(&[[1.0, 1.0, 1.0], [0.5, -2.0, 0.0], [0.0, 0.0, 1.0]], |p| Ok(hbar_formula_3d(p))).unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn game_estimate_at_zero_is_zero() {
        let cfg = EstimateConfig {
            profile: ProfileKind::Paper.spatial(),
            horizon: 10.0,
            resolution: 0,
            seed: 0,
        };
        assert_eq!(hbar_estimate(&[0.0; 3], Method::Game, &cfg).unwrap().value, 0.0);
    }
}
