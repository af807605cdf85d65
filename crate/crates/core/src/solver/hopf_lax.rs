//! Hopf–Lax formula for convex, x-independent Hamiltonians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Uniform grid of `m` points per axis on `[-r, r]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BoxGrid {
    d: usize,
    r: f64,
    m: usize,
}

impl BoxGrid {
    fn len(&self) -> usize {
        self.m.pow(self.d as u32)
    }

    fn index(&self, mut flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for slot in out.iter_mut().take(self.d) {
            *slot = flat % self.m;
            flat /= self.m;
        }
        out
    }

    fn coord(&self, i: usize) -> f64 {
        -self.r + 2.0 * self.r * i as f64 / (self.m - 1) as f64
    }

    fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.index(flat);
        let mut p = [0.0; 3];
        for k in 0..self.d {
            p[k] = self.coord(idx[k]);
        }
        p
    }
}

/// `u(t, x) = min_q { u0(x - t q) + t L(q) }` with `L` the discrete Legendre
/// transform of `H̄` over a momentum grid.
#[derive(Debug, Clone)]
pub struct HopfLax {
    dim: usize,
    velocities: Vec<[f64; 3]>,
    lagrangian: Vec<f64>,
}

impl HopfLax {
    /// Number of random midpoint triples probed by the convexity audit.
    pub const AUDIT_PAIRS: usize = 20_000;

    /// `H̄` on `[-p_max, p_max]^d` (`m_p` points per axis), velocities on
    /// `[-v_max, v_max]^d` (`m_q` points per axis). Fails with
    /// [`Error::NotConvex`] if a grid midpoint violates convexity.
    pub fn new(
        hbar: &dyn Fn(&[f64]) -> f64,
        dim: usize,
        p_max: f64,
        m_p: usize,
        v_max: f64,
        m_q: usize,
    ) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if m_p < 3 || m_q < 2 || !(p_max > 0.0) || !(v_max > 0.0) {
            return Err(Error::InvalidArgument("momentum and velocity grids need positive extent and ≥ 3 points".into()));
        }
        let pg = BoxGrid { d: dim, r: p_max, m: m_p };
        let qg = BoxGrid { d: dim, r: v_max, m: m_q };
        let mut ps = Vec::with_capacity(pg.len());
        let mut hs = Vec::with_capacity(pg.len());
        for flat in 0..pg.len() {
            let p = pg.point(flat);
            let h = hbar(&p[..dim]);
            if !h.is_finite() {
                return Err(Error::NonFinite(format!("H̄ at {:?}", &p[..dim])));
            }
            ps.push(p);
            hs.push(h);
        }
        audit_convexity(&pg, &hs)?;
        let mut velocities = Vec::with_capacity(qg.len());
        let mut lagrangian = Vec::with_capacity(qg.len());
        for flat in 0..qg.len() {
            let q = qg.point(flat);
            let l = ps
                .iter()
                .zip(&hs)
                .map(|(p, h)| p[0] * q[0] + p[1] * q[1] + p[2] * q[2] - h)
                .fold(f64::NEG_INFINITY, f64::max);
            velocities.push(q);
            lagrangian.push(l);
        }
        Ok(Self {
            dim,
            velocities,
            lagrangian,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The discrete Lagrangian at `q`, if `q` is a velocity grid point.
    pub fn lagrangian_at(&self, q: &[f64]) -> Option<f64> {
        self.velocities
            .iter()
            .position(|v| v[..self.dim].iter().zip(q).all(|(a, b)| (a - b).abs() < 1e-12))
            .map(|i| self.lagrangian[i])
    }

    pub fn eval(&self, u0: &dyn Fn(&[f64]) -> f64, t: f64, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::InvalidArgument(format!("x has {} components, expected {}", x.len(), self.dim)));
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("t must be ≥ 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(u0(x));
        }
        let mut y = [0.0; 3];
        let mut best = f64::INFINITY;
        for (q, l) in self.velocities.iter().zip(&self.lagrangian) {
            for k in 0..self.dim {
                y[k] = x[k] - t * q[k];
            }
            best = best.min(u0(&y[..self.dim]) + t * l);
        }
        Ok(best)
    }
}

fn audit_convexity(pg: &BoxGrid, hs: &[f64]) -> Result<()> {
    let scale = hs.iter().fold(1.0_f64, |m, h| m.max(h.abs()));
    let tol = 1e-9 * scale;
    let check = |a: [usize; 3], b: [usize; 3]| -> Result<()> {
        let mut mid = [0usize; 3];
        for k in 0..pg.d {
            if !(a[k] + b[k]).is_multiple_of(2) {
                return Ok(());
            }
            mid[k] = (a[k] + b[k]) / 2;
        }
        let flat = |i: [usize; 3]| (0..pg.d).rev().fold(0, |acc, k| acc * pg.m + i[k]);
        let (ha, hb, hm) = (hs[flat(a)], hs[flat(b)], hs[flat(mid)]);
        let excess = hm - 0.5 * (ha + hb);
        if excess > tol {
            return Err(Error::NotConvex(excess));
        }
        Ok(())
    };
    let n = pg.len();
    if n * n <= 4 * HopfLax::AUDIT_PAIRS {
        for i in 0..n {
            for j in i + 1..n {
                check(pg.index(i), pg.index(j))?;
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..HopfLax::AUDIT_PAIRS {
            let i = pg.index(rng.random_range(0..n));
            let mut j = i;
            // same parity so the midpoint is a grid point
            for k in 0..pg.d {
                let parity = i[k] % 2;
                j[k] = parity + 2 * rng.random_range(0..(pg.m - parity).div_ceil(2));
            }
            check(i, j)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eikonal_in_one_dimension() {
        let hl = HopfLax::new(&|p: &[f64]| p[0].abs(), 1, 3.0, 601, 2.0, 401).unwrap();
        let u0 = |x: &[f64]| x[0].abs().min(1.0);
        assert_abs_diff_eq!(hl.eval(&u0, 1.0, &[0.0]).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hl.eval(&u0, 1.0, &[1.5]).unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(hl.eval(&u0, 0.0, &[0.3]).unwrap(), 0.3, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_lagrangian() {
        // L(q) = q²/4 for H = p²
        let hl = HopfLax::new(&|p: &[f64]| p[0] * p[0], 1, 4.0, 801, 2.0, 21).unwrap();
        assert_abs_diff_eq!(hl.lagrangian_at(&[1.0]).unwrap(), 0.25, epsilon = 1e-4);
        assert_abs_diff_eq!(hl.lagrangian_at(&[0.0]).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_nonconvex() {
        let err = HopfLax::new(&|p: &[f64]| -p[0] * p[0], 1, 1.0, 21, 1.0, 5).unwrap_err();
        assert!(matches!(err, Error::NotConvex(_)));
        let err = HopfLax::new(&|p: &[f64]| (p[0].abs() - 1.0).abs() - p[1] * p[1], 2, 2.0, 17, 1.0, 3).unwrap_err();
        assert!(matches!(err, Error::NotConvex(_)));
    }
}
