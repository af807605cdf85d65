//! The global Lax–Friedrichs scheme
//! `u⁺ = u - dt·[H(x, (D⁻u + D⁺u)/2) - Σ θ_i (D_i⁺u - D_i⁻u)/2]`.

use rayon::prelude::*;

use super::grid::{Grid, ScalarField};
use crate::error::{Error, Result};

/// A Hamiltonian evaluated at the nodes of a fixed grid; implementors cache
/// the x-dependent coefficients per node.
pub trait NodeHamiltonian: Sync {
    /// Dimension of the momentum argument.
    fn dim(&self) -> usize;
    fn eval(&self, node: usize, p: &[f64]) -> f64;
    /// At most `budget` nodes that together see the full range of
    /// coefficients; used to estimate dissipation bounds.
    fn sample_nodes(&self, budget: usize) -> Vec<usize>;
}

/// An x-independent Hamiltonian.
pub struct Uniform<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Uniform<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> NodeHamiltonian for Uniform<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _node: usize, p: &[f64]) -> f64 {
        (self.f)(p)
    }

    fn sample_nodes(&self, _budget: usize) -> Vec<usize> {
        vec![0]
    }
}

/// Evaluates `H(x, p + shift)`; turns the corrector equation for
/// `v = p·x + w` into an equation for the periodic part `w`.
pub struct Shifted<'a, H: ?Sized> {
    pub inner: &'a H,
    pub shift: Vec<f64>,
}

impl<H: NodeHamiltonian + ?Sized> NodeHamiltonian for Shifted<'_, H> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eval(&self, node: usize, p: &[f64]) -> f64 {
        let mut q = [0.0; 3];
        for (k, qk) in q.iter_mut().enumerate().take(p.len()) {
            *qk = p[k] + self.shift[k];
        }
        self.inner.eval(node, &q[..p.len()])
    }

    fn sample_nodes(&self, budget: usize) -> Vec<usize> {
        self.inner.sample_nodes(budget)
    }
}

/// Per-axis bounds `θ_i ≥ |∂H/∂p_i|` on a momentum box.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationBounds {
    pub theta: Vec<f64>,
}

impl DissipationBounds {
    pub const SAFETY: f64 = 1.1;
    pub const THETA_MIN: f64 = 1e-6;

    /// Largest stable step, `cfl / Σ θ_i/h_i` over the non-trivial axes.
    pub fn max_dt(&self, grid: &Grid, cfl: f64) -> f64 {
        let rate: f64 = grid
            .axes()
            .iter()
            .zip(&self.theta)
            .filter(|(a, _)| !a.is_trivial())
            .map(|(a, t)| t / a.spacing)
            .sum();
        if rate > 0.0 {
            cfl / rate
        } else {
            f64::INFINITY
        }
    }
}

/// `θ_i = 1.1 · max |∂H/∂p_i|`, the derivative estimated by centred
/// differences at sampled nodes and at a uniform grid of momenta in `p_box`.
pub fn estimate_dissipation<H: NodeHamiltonian + ?Sized>(
    ham: &H,
    p_box: &[(f64, f64)],
    x_samples: usize,
) -> Result<DissipationBounds> {
    let d = ham.dim();
    if p_box.len() != d {
        return Err(Error::InvalidArgument(format!("momentum box has {} axes, expected {d}", p_box.len())));
    }
    if p_box.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::InvalidArgument("momentum box must be bounded".into()));
    }
    let per_axis: usize = match d {
        1 => 401,
        2 => 41,
        _ => 13,
    };
    let nodes = ham.sample_nodes(x_samples.max(1));
    let scale = p_box.iter().map(|&(lo, hi)| lo.abs().max(hi.abs())).fold(1.0, f64::max);
    let delta = 1e-6 * scale;
    let total = per_axis.pow(d as u32);
    let mut theta = vec![0.0_f64; d];
    let mut p = [0.0; 3];
    for &node in &nodes {
        for flat in 0..total {
            let mut r = flat;
            for k in 0..d {
                let (lo, hi) = p_box[k];
                let i = r % per_axis;
                r /= per_axis;
                p[k] = lo + (hi - lo) * i as f64 / (per_axis - 1) as f64;
            }
            for k in 0..d {
                let mut q = p;
                q[k] = p[k] + delta;
                let up = ham.eval(node, &q[..d]);
                q[k] = p[k] - delta;
                let down = ham.eval(node, &q[..d]);
                if !(up.is_finite() && down.is_finite()) {
                    return Err(Error::NonFinite(format!("H at node {node}, p = {:?}", &p[..d])));
                }
                theta[k] = theta[k].max((up - down).abs() / (2.0 * delta));
            }
        }
    }
    Ok(DissipationBounds {
        theta: theta
            .into_iter()
            .map(|t| (DissipationBounds::SAFETY * t).max(DissipationBounds::THETA_MIN))
            .collect(),
    })
}

/// Largest one-sided difference magnitude per axis seen in a step.
pub type GradientBounds = [f64; 3];

fn step_into<H: NodeHamiltonian + ?Sized>(
    src: &ScalarField,
    dst: &mut [f64],
    ham: &H,
    theta: &DissipationBounds,
    dt: f64,
) -> GradientBounds {
    let g = &src.grid;
    let d = g.dim();
    let u = &src.values;
    let strides = g.strides().to_vec();
    let axes = g.axes().to_vec();
    const CHUNK: usize = 4096;
    dst.par_chunks_mut(CHUNK)
        .enumerate()
        .map(|(c, out)| {
            let mut grad = [0.0_f64; 3];
            let base = c * CHUNK;
            let mut p = [0.0; 3];
            for (off, o) in out.iter_mut().enumerate() {
                let node = base + off;
                let mut rem = node;
                let uc = u[node];
                let mut diss = 0.0;
                for k in 0..d {
                    let s = strides[k];
                    let i = rem / s;
                    rem %= s;
                    let a = &axes[k];
                    if a.len == 1 {
                        p[k] = 0.0;
                        continue;
                    }
                    let (um, up) = if a.periodic {
                        let m = if i == 0 { node + (a.len - 1) * s } else { node - s };
                        let pl = if i + 1 == a.len { node - (a.len - 1) * s } else { node + s };
                        (u[m], u[pl])
                    } else if i == 0 {
                        let up = u[node + s];
                        (2.0 * uc - up, up)
                    } else if i + 1 == a.len {
                        let um = u[node - s];
                        (um, 2.0 * uc - um)
                    } else {
                        (u[node - s], u[node + s])
                    };
                    let dm = (uc - um) / a.spacing;
                    let dp = (up - uc) / a.spacing;
                    p[k] = 0.5 * (dm + dp);
                    diss += theta.theta[k] * 0.5 * (dp - dm);
                    grad[k] = grad[k].max(dm.abs()).max(dp.abs());
                }
                *o = uc - dt * (ham.eval(node, &p[..d]) - diss);
            }
            grad
        })
        .reduce(
            || [0.0; 3],
            |a, b| [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])],
        )
}

fn check_step(field: &ScalarField, ham_dim: usize, theta: &DissipationBounds, dt: f64, cfl: f64) -> Result<()> {
    let g = &field.grid;
    if ham_dim != g.dim() || theta.theta.len() != g.dim() {
        return Err(Error::InvalidArgument(format!(
            "grid has dimension {}, Hamiltonian {ham_dim}, dissipation {}",
            g.dim(),
            theta.theta.len()
        )));
    }
    let limit = theta.max_dt(g, cfl);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("dt = {dt} violates the CFL bound {limit}")));
    }
    Ok(())
}

/// CFL fraction used throughout.
pub const CFL: f64 = 0.4;

/// One explicit Lax–Friedrichs step. Non-periodic axes use linear
/// extrapolation into a ghost layer.
pub fn lf_step<H: NodeHamiltonian + ?Sized>(
    field: &ScalarField,
    ham: &H,
    theta: &DissipationBounds,
    dt: f64,
) -> Result<ScalarField> {
    check_step(field, ham.dim(), theta, dt, CFL)?;
    let mut out = vec![0.0; field.values.len()];
    step_into(field, &mut out, ham, theta, dt);
    let next = ScalarField {
        grid: field.grid.clone(),
        values: out,
        time: field.time + dt,
    };
    next.check_finite()?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub horizon: f64,
    pub cfl: f64,
    /// Abort when a one-sided difference along axis `i` exceeds `p_limit[i]`.
    pub p_limit: Option<Vec<f64>>,
}

impl EvolveOptions {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            cfl: CFL,
            p_limit: None,
        }
    }

    pub fn with_p_limit(mut self, limit: Vec<f64>) -> Self {
        self.p_limit = Some(limit);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveReport {
    pub steps: usize,
    pub dt: f64,
    pub max_gradient: GradientBounds,
}

/// Advances `field` by `opts.horizon` with equal steps at the CFL limit;
/// `observe` sees the field after every step.
pub fn evolve<H: NodeHamiltonian + ?Sized>(
    field: &mut ScalarField,
    ham: &H,
    theta: &DissipationBounds,
    opts: &EvolveOptions,
    mut observe: impl FnMut(&ScalarField),
) -> Result<EvolveReport> {
    if !(opts.horizon >= 0.0 && opts.horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be finite and ≥ 0, got {}", opts.horizon)));
    }
    if !(opts.cfl > 0.0 && opts.cfl <= 0.5) {
        return Err(Error::InvalidArgument(format!("CFL fraction must lie in (0, 1/2], got {}", opts.cfl)));
    }
    let dt_max = theta.max_dt(&field.grid, opts.cfl);
    let steps = if opts.horizon == 0.0 {
        0
    } else if dt_max.is_finite() {
        (opts.horizon / dt_max).ceil() as usize
    } else {
        1
    };
    let dt = if steps > 0 { opts.horizon / steps as f64 } else { 0.0 };
    if steps > 0 {
        check_step(field, ham.dim(), theta, dt, opts.cfl)?;
    }
    let t0 = field.time;
    let mut scratch = vec![0.0; field.values.len()];
    let mut max_gradient = [0.0_f64; 3];
    for n in 0..steps {
        let grad = step_into(field, &mut scratch, ham, theta, dt);
        std::mem::swap(&mut field.values, &mut scratch);
        field.time = t0 + (n + 1) as f64 * dt;
        if let Some(pos) = field.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("node {pos} at t = {}", field.time)));
        }
        for k in 0..field.grid.dim() {
            max_gradient[k] = max_gradient[k].max(grad[k]);
            if let Some(limit) = &opts.p_limit {
                if grad[k] > limit[k] {
                    return Err(Error::MomentumOverflow {
                        axis: k + 1,
                        value: grad[k],
                        limit: limit[k],
                    });
                }
            }
        }
        observe(field);
    }
    Ok(EvolveReport {
        steps,
        dt,
        max_gradient,
    })
}
