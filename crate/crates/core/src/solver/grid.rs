//! Tensor grids, grid functions and their file formats.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One coordinate axis: nodes `origin + k·spacing`, `k < len`.
///
/// A periodic axis of `len` nodes has period `len·spacing`; a single-node
/// periodic axis stands for a direction the solution does not depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub origin: f64,
    pub spacing: f64,
    pub len: usize,
    pub periodic: bool,
}

impl Axis {
    /// `n + 1` nodes on `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || n < 2 {
            return Err(Error::InvalidArgument(format!(
                "symmetric axis needs L > 0 and N ≥ 2, got L = {half_width}, N = {n}"
            )));
        }
        Ok(Self {
            origin: -half_width,
            spacing: 2.0 * half_width / n as f64,
            len: n + 1,
            periodic: false,
        })
    }

    /// `n` nodes covering one period `[0, period)`.
    pub fn periodic(period: f64, n: usize) -> Result<Self> {
        if !(period > 0.0) || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "periodic axis needs period > 0 and N ≥ 1, got {period}, {n}"
            )));
        }
        Ok(Self {
            origin: 0.0,
            spacing: period / n as f64,
            len: n,
            periodic: true,
        })
    }

    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.spacing
    }

    pub fn period(&self) -> f64 {
        self.len as f64 * self.spacing
    }

    /// Whether the axis carries no variation (a single periodic node).
    pub fn is_trivial(&self) -> bool {
        self.periodic && self.len == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidArgument(format!("grids have 1 to 3 axes, got {}", axes.len())));
        }
        if axes.iter().any(|a| a.len == 0 || !(a.spacing > 0.0) || !a.origin.is_finite()) {
            return Err(Error::InvalidArgument("every axis needs nodes and a positive spacing".into()));
        }
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len() - 1).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].len;
        }
        Ok(Self { axes, strides })
    }

    /// The unit torus `[0, 1)^d` with `n` nodes per axis.
    pub fn unit_torus(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![Axis::periodic(1.0, n)?; d])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major multi-index of a flat node index.
    pub fn multi_index(&self, mut node: usize) -> [usize; 3] {
        let mut m = [0; 3];
        for k in 0..self.dim() {
            m[k] = node / self.strides[k];
            node %= self.strides[k];
        }
        m
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        m.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> [f64; 3] {
        let m = self.multi_index(node);
        let mut x = [0.0; 3];
        for k in 0..self.dim() {
            x[k] = self.axes[k].coord(m[k]);
        }
        x
    }
}

/// Values on the nodes of a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl ScalarField {
    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let values = (0..grid.len()).map(|n| f(&grid.coords(n)[..d])).collect();
        Self { grid, values, time }
    }

    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(n) => Err(Error::NonFinite(format!("field value at node {n}"))),
            None => Ok(()),
        }
    }

    /// Multilinear interpolation. Periodic axes wrap; points outside a
    /// non-periodic axis are rejected.
    pub fn interpolate(&self, x: &[f64]) -> Result<f64> {
        let d = self.grid.dim();
        if x.len() != d {
            return Err(Error::InvalidArgument(format!("point has {} components, grid has {d}", x.len())));
        }
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut frac = [0.0; 3];
        for k in 0..d {
            let a = self.grid.axis(k);
            let s = (x[k] - a.origin) / a.spacing;
            if a.periodic {
                let n = a.len as f64;
                let s = s.rem_euclid(n);
                let i = (s.floor() as usize).min(a.len - 1);
                lo[k] = i;
                hi[k] = (i + 1) % a.len;
                frac[k] = s - i as f64;
            } else {
                let top = (a.len - 1) as f64;
                if !(s >= -1e-9 && s <= top + 1e-9) {
                    return Err(Error::InvalidArgument(format!(
                        "coordinate {} = {} outside [{}, {}]",
                        k + 1,
                        x[k],
                        a.origin,
                        a.coord(a.len - 1)
                    )));
                }
                let s = s.clamp(0.0, top);
                let i = (s.floor() as usize).min(a.len.saturating_sub(2));
                lo[k] = i;
                hi[k] = (i + 1).min(a.len - 1);
                frac[k] = s - i as f64;
            }
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut node = 0;
            for k in 0..d {
                let (i, wk) = if corner >> k & 1 == 1 {
                    (hi[k], frac[k])
                } else {
                    (lo[k], 1.0 - frac[k])
                };
                w *= wk;
                node += i * self.grid.strides()[k];
            }
            if w != 0.0 {
                acc += w * self.values[node];
            }
        }
        Ok(acc)
    }

    /// Largest `|Δu|/h` over neighbouring node pairs.
    pub fn lipschitz_audit(&self) -> f64 {
        let g = &self.grid;
        let mut worst: f64 = 0.0;
        for node in 0..g.len() {
            let m = g.multi_index(node);
            for k in 0..g.dim() {
                let a = g.axis(k);
                let next = if m[k] + 1 < a.len {
                    node + g.strides()[k]
                } else if a.periodic && a.len > 1 {
                    node + g.strides()[k] - a.len * g.strides()[k]
                } else {
                    continue;
                };
                worst = worst.max((self.values[next] - self.values[node]).abs() / a.spacing);
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// CSV with columns `i1, …, id, value`.
    pub fn to_csv(&self) -> String {
        let d = self.grid.dim();
        let mut s: String = (1..=d).map(|k| format!("i{k},")).collect();
        s.push_str("value\n");
        for (node, v) in self.values.iter().enumerate() {
            let m = self.grid.multi_index(node);
            for i in &m[..d] {
                s.push_str(&i.to_string());
                s.push(',');
            }
            s.push_str(&format!("{v:.16e}\n"));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Little-endian binary dump: `u64 d`, then per axis `u64 N, f64 origin,
    /// f64 spacing, u64 periodic`, then `f64 time`, then the row-major values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 32 * self.grid.dim() + 8 * self.values.len());
        out.extend_from_slice(&(self.grid.dim() as u64).to_le_bytes());
        for a in self.grid.axes() {
            out.extend_from_slice(&(a.len as u64).to_le_bytes());
            out.extend_from_slice(&a.origin.to_le_bytes());
            out.extend_from_slice(&a.spacing.to_le_bytes());
            out.extend_from_slice(&(a.periodic as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.time.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut word = || -> Result<[u8; 8]> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)
                .map_err(|_| Error::Parse("truncated field dump".into()))?;
            Ok(b)
        };
        let d = u64::from_le_bytes(word()?) as usize;
        if !(1..=3).contains(&d) {
            return Err(Error::Parse(format!("field dump has dimension {d}")));
        }
        let mut axes = Vec::with_capacity(d);
        for _ in 0..d {
            let len = u64::from_le_bytes(word()?) as usize;
            let origin = f64::from_le_bytes(word()?);
            let spacing = f64::from_le_bytes(word()?);
            let periodic = u64::from_le_bytes(word()?) != 0;
            axes.push(Axis {
                origin,
                spacing,
                len,
                periodic,
            });
        }
        let time = f64::from_le_bytes(word()?);
        let grid = Grid::new(axes).map_err(|e| Error::Parse(e.to_string()))?;
        let n = grid.len();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f64::from_le_bytes(word()?));
        }
        if !r.is_empty() {
            return Err(Error::Parse("trailing bytes after field dump".into()));
        }
        Ok(Self { grid, values, time })
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_field() -> ScalarField {
        let g = Grid::new(vec![Axis::symmetric(2.0, 8).unwrap(), Axis::periodic(0.5, 4).unwrap()]).unwrap();
        ScalarField::from_fn(g, 0.25, |x| x[0] + (x[1] * 4.0 * std::f64::consts::PI).sin())
    }

    #[test]
    fn indices_round_trip() {
        let f = sample_field();
        for n in 0..f.grid.len() {
            let m = f.grid.multi_index(n);
            assert_eq!(f.grid.flat_index(&m[..2]), n);
        }
        assert_eq!(f.grid.len(), 36);
    }

    #[test]
    fn interpolation_is_exact_for_linear_data_and_wraps() {
        let g = Grid::new(vec![Axis::symmetric(1.0, 10).unwrap(), Axis::symmetric(1.0, 4).unwrap()]).unwrap();
        let f = ScalarField::from_fn(g, 0.0, |x| 2.0 * x[0] - x[1] + 0.5);
        assert_abs_diff_eq!(f.interpolate(&[0.33, -0.71]).unwrap(), 2.0 * 0.33 + 0.71 + 0.5, epsilon = 1e-12);
        assert!(f.interpolate(&[1.5, 0.0]).is_err());
        let p = sample_field();
        let a = p.interpolate(&[0.3, 0.1]).unwrap();
        let b = p.interpolate(&[0.3, 0.6]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn lipschitz_audit_of_linear_field() {
        let g = Grid::new(vec![Axis::symmetric(1.0, 10).unwrap(), Axis::symmetric(1.0, 4).unwrap()]).unwrap();
        let f = ScalarField::from_fn(g, 0.0, |x| 3.0 * x[0] - x[1]);
        assert_abs_diff_eq!(f.lipschitz_audit(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn csv_layout() {
        let f = sample_field();
        let csv = f.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("i1,i2,value"));
        assert_eq!(csv.lines().count(), 37);
        let row: Vec<&str> = csv.lines().nth(6).unwrap().split(',').collect();
        assert_eq!(&row[..2], &["1", "1"]);
        assert_eq!(row[2].parse::<f64>().unwrap(), f.values[5]);
    }

    #[test]
    fn binary_round_trip() {
        let f = sample_field();
        let g = ScalarField::from_bytes(&f.to_bytes()).unwrap();
        assert_eq!(f, g);
        let bytes = f.to_bytes();
        assert!(ScalarField::from_bytes(&bytes[..bytes.len() - 3]).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        f.write_binary(&path).unwrap();
        assert_eq!(ScalarField::read_binary(&path).unwrap(), f);
    }
}
