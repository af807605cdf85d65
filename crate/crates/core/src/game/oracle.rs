//! Brute-force min-max evaluation of the Hamiltonians and the audits built
//! on it (Isaacs gap, closed-form agreement, coercivity).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DifferentialGame, GameSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinMaxOrder {
    /// `-min_a max_b`
    Upper,
    /// `-max_b min_a`
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValues {
    pub upper: f64,
    pub lower: f64,
}

/// Both orders of the discretised min-max of `R + p·f` over `A × B` in one
/// sweep of the payoff matrix.
pub fn minmax_both<const D: usize, G: DifferentialGame<D>>(
    game: &G,
    x: &[f64; D],
    p: &[f64; D],
    res: usize,
) -> Result<OracleValues> {
    if res < 2 {
        return Err(Error::InvalidArgument(format!("oracle resolution must be ≥ 2, got {res}")));
    }
    let cell = game.cell(x);
    let actions = game.action_grid(res);
    let pushes = game.push_grid(res);
    let mut col_min = vec![f64::INFINITY; pushes.len()];
    let mut min_row_max = f64::INFINITY;
    for a in &actions {
        let mut row_max = f64::NEG_INFINITY;
        for (b, cmin) in pushes.iter().zip(col_min.iter_mut()) {
            let f = game.transition_in(&cell, a, b);
            let mut payoff = game.running_cost_in(&cell, a, b);
            for k in 0..D {
                payoff += p[k] * f[k];
            }
            row_max = row_max.max(payoff);
            *cmin = cmin.min(payoff);
        }
        min_row_max = min_row_max.min(row_max);
    }
    let max_col_min = col_min.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(OracleValues {
        upper: -min_row_max,
        lower: -max_col_min,
    })
}

/// Discretised `-min_a max_b` (upper) or `-max_b min_a` (lower) Hamiltonian.
pub fn hamiltonian_minmax_oracle<const D: usize, G: DifferentialGame<D>>(
    game: &G,
    x: &[f64; D],
    p: &[f64; D],
    res: usize,
    order: MinMaxOrder,
) -> Result<f64> {
    let v = minmax_both(game, x, p, res)?;
    Ok(match order {
        MinMaxOrder::Upper => v.upper,
        MinMaxOrder::Lower => v.lower,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsaacsRow {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub closed_form: f64,
    pub coarse: OracleValues,
    pub refined: OracleValues,
}

impl IsaacsRow {
    pub fn gap(&self) -> f64 {
        (self.coarse.upper - self.coarse.lower).abs()
    }

    /// Change of the upper value between `res` and `2·res`.
    pub fn refinement_delta(&self) -> f64 {
        (self.coarse.upper - self.refined.upper).abs()
    }

    pub fn closed_form_error(&self) -> f64 {
        (self.closed_form - self.coarse.upper).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsaacsReport {
    pub res: usize,
    pub rows: Vec<IsaacsRow>,
}

impl IsaacsReport {
    /// Floating-point floor for the gap comparison: both orders come from the
    /// same payoff matrix, so an exact tie can still differ in the last bits.
    pub const ROUNDOFF_FLOOR: f64 = 1e-9;

    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(IsaacsRow::gap).fold(0.0, f64::max)
    }

    pub fn max_closed_form_error(&self) -> f64 {
        self.rows.iter().map(IsaacsRow::closed_form_error).fold(0.0, f64::max)
    }

    /// Rows whose gap exceeds twice their own refinement delta.
    pub fn gap_violations(&self) -> Vec<&IsaacsRow> {
        self.rows
            .iter()
            .filter(|r| r.gap() > 2.0 * r.refinement_delta() + Self::ROUNDOFF_FLOOR)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let d = self.rows.first().map_or(0, |r| r.x.len());
        let mut s = String::new();
        let cols: Vec<String> = (1..=d)
            .map(|k| format!("x{k}"))
            .chain((1..=d).map(|k| format!("p{k}")))
            .collect();
        s.push_str(&cols.join(","));
        s.push_str(",closed_form,upper,lower,upper_refined,lower_refined\n");
        for r in &self.rows {
            let nums: Vec<String> = r
                .x
                .iter()
                .chain(&r.p)
                .chain([
                    &r.closed_form,
                    &r.coarse.upper,
                    &r.coarse.lower,
                    &r.refined.upper,
                    &r.refined.lower,
                ])
                .map(|v| format!("{v:.16e}"))
                .collect();
            s.push_str(&nums.join(","));
            s.push('\n');
        }
        s
    }
}

/// Draws `samples` points `(x, p)` with `|p| ≤ p_max` and compares the
/// oracle at `res` and `2·res` with the closed form.
///
/// Half of the `x` samples are drawn inside the highway supports (where the
/// push term is active), the rest uniformly in the unit cell.
pub fn isaacs_audit(
    spec: &GameSpec,
    samples: usize,
    res: usize,
    seed: u64,
    p_max: f64,
) -> Result<IsaacsReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.dim();
    let w = spec.profile().width();
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        if i % 2 == 1 {
            // move into a support: a highway at height 0 or ½ (2D), or the
            // transverse neighbourhood of ℓ1 or ℓ1 + ½ (3D)
            let base = if rng.random_bool(0.5) { 0.0 } else { 0.5 };
            for c in x.iter_mut().skip(1) {
                *c = base + rng.random_range(-w..w) / (d - 1) as f64;
            }
        }
        let p = loop {
            let p: Vec<f64> = (0..d).map(|_| rng.random_range(-p_max..p_max)).collect();
            if p.iter().map(|c| c * c).sum::<f64>() <= p_max * p_max {
                break p;
            }
        };
        points.push((x, p));
    }
    use rayon::prelude::*;
    let rows = points
        .into_par_iter()
        .map(|(x, p)| {
            Ok(IsaacsRow {
                closed_form: spec.hamiltonian(&x, &p)?,
                coarse: spec.oracle(&x, &p, res)?,
                refined: spec.oracle(&x, &p, 2 * res)?,
                x,
                p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IsaacsReport { res, rows })
}

/// For each radius `r`, the minimum of the closed-form `H(x, p)` over a grid
/// of `x` in the unit cell and of directions with `|p| = r`.
pub fn coercivity_probe(spec: &GameSpec, radii: &[f64]) -> Result<Vec<f64>> {
    if radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radii must be positive and increasing".into()));
    }
    let (xs, dirs) = match spec.dim() {
        2 => {
            let n = 400;
            let xs: Vec<Vec<f64>> = (0..n).map(|k| vec![0.0, k as f64 / n as f64]).collect();
            let m = 64;
            let dirs: Vec<Vec<f64>> = (0..m)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / m as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect();
            (xs, dirs)
        }
        _ => {
            let n = 24;
            let mut xs = Vec::with_capacity(n * n * n);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        xs.push(vec![i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
                    }
                }
            }
            let (np, na) = (13, 24);
            let mut dirs = Vec::with_capacity(np * na);
            for i in 0..np {
                let polar = std::f64::consts::PI * i as f64 / (np - 1) as f64;
                for j in 0..na {
                    let az = std::f64::consts::TAU * j as f64 / na as f64;
                    dirs.push(vec![polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()]);
                }
            }
            (xs, dirs)
        }
    };
    radii
        .iter()
        .map(|&r| {
            let mut best = f64::INFINITY;
            for x in &xs {
                for dir in &dirs {
                    let p: Vec<f64> = dir.iter().map(|c| r * c).collect();
                    best = best.min(spec.hamiltonian(x, &p)?);
                }
            }
            Ok(best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_game_2d, make_game_3d, Example};
    use crate::torus::BumpProfile;
    use approx::assert_abs_diff_eq;

    fn paper() -> BumpProfile {
        BumpProfile::new(0.01).unwrap()
    }

    #[test]
    fn rejects_tiny_resolution() {
        let g = make_game_2d(paper());
        assert!(hamiltonian_minmax_oracle(&g, &[0.0, 0.0], &[0.0, 0.0], 1, MinMaxOrder::Upper).is_err());
    }

    #[test]
    fn planar_oracle_examples() {
        let g = make_game_2d(paper());
        let v = hamiltonian_minmax_oracle(&g, &[0.0, 0.0], &[0.0, 0.0], 50, MinMaxOrder::Upper).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 0.05);
        let v = hamiltonian_minmax_oracle(&g, &[0.0, 0.0], &[10.0, 0.0], 400, MinMaxOrder::Upper).unwrap();
        assert_abs_diff_eq!(v, -9.0, epsilon = 0.02);
        let v = hamiltonian_minmax_oracle(&g, &[0.0, 0.25], &[0.0, 0.0], 400, MinMaxOrder::Upper).unwrap();
        assert_abs_diff_eq!(v, -100.0, epsilon = 0.02);
    }

    #[test]
    fn spatial_oracle_matches_closed_form() {
        let g = make_game_3d(paper());
        // p = e₃: the optimal action -2e₃ is the south pole of the grid;
        // no push is available along ℓ1 in the third coordinate
        let v = minmax_both(&g, &[0.0; 3], &[0.0, 0.0, 1.0], 9).unwrap();
        assert_abs_diff_eq!(v.upper, 200.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v.lower, 200.0, epsilon = 1e-9);
        let v = minmax_both(&g, &[0.4, 0.4, 0.0], &[0.0; 3], 9).unwrap();
        assert_abs_diff_eq!(v.upper, -100.0, epsilon = 1e-12);
        let x = [0.3, 0.503, 0.498];
        let p = [-0.7, 0.4, 1.1];
        let v = minmax_both(&g, &x, &p, 21).unwrap();
        let closed = g.hamiltonian(&x, &p);
        // angular resolution π/20 on a fast highway: ~1% of the action term
        assert!((v.upper - closed).abs() < 0.01 * closed.abs(), "{} vs {}", v.upper, closed);
        assert!((v.upper - v.lower).abs() < 1e-9);
    }

    #[test]
    fn closed_form_error_shrinks_with_resolution() {
        let g = make_game_2d(paper());
        let probes: Vec<([f64; 2], [f64; 2])> = (0..20)
            .map(|k| {
                let t = k as f64;
                ([0.1 * t, 0.003 * t - 0.02], [3.0 * (t * 0.7).cos() * (1.0 + t), 2.0 * (t * 1.3).sin() * (1.0 + t)])
            })
            .collect();
        for (x, p) in probes {
            let closed = g.hamiltonian(&x, &p);
            let errs: Vec<f64> = [25, 100, 400]
                .iter()
                .map(|&res| (minmax_both(&g, &x, &p, res).unwrap().upper - closed).abs())
                .collect();
            assert!(errs[2] <= errs[0] + 1e-12, "{errs:?}");
            assert!(errs[2] <= 5e-2, "{errs:?}");
        }
    }

    #[test]
    fn isaacs_gap_on_small_sample() {
        let spec = GameSpec::new(Example::Planar, paper());
        let rep = isaacs_audit(&spec, 10, 60, 4, 20.0).unwrap();
        assert_eq!(rep.rows.len(), 10);
        assert!(rep.gap_violations().is_empty());
        assert!(rep.to_csv().lines().count() == 11);
    }

    #[test]
    fn coercivity_examples() {
        let spec = GameSpec::new(Example::Planar, paper());
        let radii = [150.0, 200.0, 400.0, 800.0];
        let mins = coercivity_probe(&spec, &radii).unwrap();
        assert!(mins[1] >= 200.0 - 300.0);
        assert!(mins.windows(2).all(|w| w[1] > w[0]), "{mins:?}");

        let spec = GameSpec::new(Example::Spatial, paper());
        let mins = coercivity_probe(&spec, &[200.0]).unwrap();
        let r = 200.0;
        assert!(mins[0] >= 4.0 * r - 200.0 - 3f64.sqrt() * r - 100.0, "{mins:?}");

        assert!(coercivity_probe(&spec, &[2.0, 1.0]).is_err());
    }
}
