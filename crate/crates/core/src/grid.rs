//! Uniform-grid representation of functions `u: R -> R^n` truncated to
//! `[-L, L]`.
//!
//! The spacing is always `1/m` for an integer `m`, so every unit interval
//! `[j, j + 1]` with integer `j` starts and ends on a grid point. Functions
//! are identically zero outside the represented domain.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid geometry: domain `[-half_length, half_length]`, spacing `1 / cells_per_unit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    half_length: usize,
    cells_per_unit: usize,
}

impl Grid {
    pub fn new(half_length: usize, cells_per_unit: usize) -> Result<Self> {
        if half_length == 0 {
            return Err(Error::Config("domain half-length must be a positive integer".into()));
        }
        if cells_per_unit == 0 {
            return Err(Error::Config("1/h must be a positive integer".into()));
        }
        Ok(Self {
            half_length,
            cells_per_unit,
        })
    }

    /// Builds a grid from real-valued `L` and `h`, rejecting anything that
    /// is not an integer `L` and an integer `1/h`.
    pub fn from_spacing(half_length: f64, h: f64) -> Result<Self> {
        let l = as_integer(half_length)
            .ok_or_else(|| Error::Config(format!("L = {half_length} is not a positive integer")))?;
        if !(h > 0.0) {
            return Err(Error::Config(format!("h = {h} must be positive")));
        }
        let m = as_integer(1.0 / h)
            .ok_or_else(|| Error::Config(format!("1/h = {} is not an integer", 1.0 / h)))?;
        Self::new(l, m)
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    pub fn cells_per_unit(&self) -> usize {
        self.cells_per_unit
    }

    pub fn h(&self) -> f64 {
        1.0 / self.cells_per_unit as f64
    }

    /// Number of grid points, `2 L m + 1`.
    pub fn len(&self) -> usize {
        2 * self.half_length * self.cells_per_unit + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Offset of `x = 0` in index space.
    pub fn origin(&self) -> usize {
        self.half_length * self.cells_per_unit
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.origin() as f64) / self.cells_per_unit as f64
    }

    /// Index of a grid-aligned coordinate, if `x` lies on the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let pos = x * self.cells_per_unit as f64 + self.origin() as f64;
        let rounded = pos.round();
        if (pos - rounded).abs() > 1e-9 * pos.abs().max(1.0) || rounded < 0.0 {
            return None;
        }
        let i = rounded as usize;
        (i < self.len()).then_some(i)
    }

    /// Index of the left end of the unit interval `[j, j + 1]`.
    pub fn unit_start(&self, j: i64) -> usize {
        (j + self.half_length as i64) as usize * self.cells_per_unit
    }

    /// Grid points in the closed window, as an inclusive index pair.
    pub fn window_indices(&self, w: &Window) -> Result<(usize, usize)> {
        let bad = || Error::BadWindow { a: w.a, b: w.b };
        let ia = self.index_of(w.a).ok_or_else(bad)?;
        let ib = self.index_of(w.b).ok_or_else(bad)?;
        Ok((ia, ib))
    }
}

fn as_integer(v: f64) -> Option<usize> {
    let r = v.round();
    (v.is_finite() && r >= 1.0 && (v - r).abs() <= 1e-9 * r).then_some(r as usize)
}

/// A closed interval `[a, b]` on which local norms are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub a: f64,
    pub b: f64,
}

impl Window {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::BadWindow { a, b });
        }
        Ok(Self { a, b })
    }

    /// The unit interval `[j, j + 1]`.
    pub fn unit(j: i64) -> Self {
        Self {
            a: j as f64,
            b: (j + 1) as f64,
        }
    }
}

/// Samples of a vector-valued function on a [`Grid`], row `i` holding `u(x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    components: usize,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        assert!(components >= 1, "a grid function needs at least one component");
        Self {
            grid,
            components,
            samples: vec![0.0; grid.len() * components],
        }
    }

    pub fn from_samples(grid: Grid, components: usize, samples: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(Error::Config("a grid function needs at least one component".into()));
        }
        if samples.len() != grid.len() * components {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len() * components,
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("samples must be finite".into()));
        }
        Ok(Self {
            grid,
            components,
            samples,
        })
    }

    /// Point samples of an `R^n`-valued closed form `f(x, out)`.
    pub fn sample<F>(grid: Grid, components: usize, mut f: F) -> Self
    where
        F: FnMut(f64, &mut [f64]),
    {
        let mut u = Self::zeros(grid, components);
        for i in 0..grid.len() {
            let x = grid.x(i);
            f(x, u.row_mut(i));
        }
        u
    }

    pub fn sample_scalar<F>(grid: Grid, mut f: F) -> Self
    where
        F: FnMut(f64) -> f64,
    {
        Self::sample(grid, 1, |x, out| out[0] = f(x))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.samples[i * self.components..(i + 1) * self.components]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.samples[i * self.components..(i + 1) * self.components]
    }

    pub fn value(&self, i: usize, c: usize) -> f64 {
        self.samples[i * self.components + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::GridMismatch(format!(
                "{:?} x {} vs {:?} x {}",
                self.grid, self.components, other.grid, other.components
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            components: self.components,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            grid: self.grid,
            components: self.components,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + s * b)
    }

    /// Shift by `k` grid points: `result(x) = u(x - k h)`, zero-filled.
    pub fn translate(&self, k: i64) -> Result<Self> {
        let n = self.grid.len();
        if k.unsigned_abs() as usize >= n - 1 {
            return Err(Error::ShiftOutOfRange { shift: k, points: n });
        }
        let mut out = Self::zeros(self.grid, self.components);
        let c = self.components;
        if k >= 0 {
            let k = k as usize;
            out.samples[k * c..].copy_from_slice(&self.samples[..(n - k) * c]);
        } else {
            let k = (-k) as usize;
            out.samples[..(n - k) * c].copy_from_slice(&self.samples[k * c..]);
        }
        Ok(out)
    }

    /// Central differences in the interior, one-sided at the two ends.
    pub fn derivative(&self) -> Self {
        let n = self.grid.len();
        let c = self.components;
        let m = self.grid.cells_per_unit as f64;
        let s = &self.samples;
        let mut d = vec![0.0; s.len()];
        for k in 0..c {
            d[k] = (s[c + k] - s[k]) * m;
            d[(n - 1) * c + k] = (s[(n - 1) * c + k] - s[(n - 2) * c + k]) * m;
        }
        let half_m = 0.5 * m;
        for i in 1..n - 1 {
            for k in 0..c {
                d[i * c + k] = (s[(i + 1) * c + k] - s[(i - 1) * c + k]) * half_m;
            }
        }
        Self {
            grid: self.grid,
            components: c,
            samples: d,
        }
    }

    /// Multiplies every component by the scalar field `w`.
    pub fn pointwise_multiply(&self, w: &GridFunction) -> Result<Self> {
        if w.grid != self.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, w.grid)));
        }
        if w.components != 1 {
            return Err(Error::GridMismatch(format!(
                "multiplier must be scalar, has {} components",
                w.components
            )));
        }
        let c = self.components;
        let samples = self
            .samples
            .chunks_exact(c)
            .zip(&w.samples)
            .flat_map(|(row, &wi)| row.iter().map(move |&v| v * wi))
            .collect();
        Ok(Self {
            grid: self.grid,
            components: c,
            samples,
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = String::from("x");
        for k in 1..=self.components {
            write!(header, ",u{k}").unwrap();
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for i in 0..self.grid.len() {
            line.clear();
            write!(line, "{}", fmt17(self.grid.x(i))).unwrap();
            for &v in self.row(i) {
                write!(line, ",{}", fmt17(v)).unwrap();
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads the CSV layout written by [`GridFunction::write_csv`]. The grid
    /// is inferred from the first and last abscissae and the row count.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or(Error::Csv {
            line: 1,
            msg: "empty file".into(),
        })??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols[0] != "x" {
            return Err(Error::Csv {
                line: 1,
                msg: format!("unexpected header {header:?}"),
            });
        }
        let n = cols.len() - 1;
        let mut xs = Vec::new();
        let mut samples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.trim().split(',');
            let parse = |f: Option<&str>| -> Result<f64> {
                f.ok_or_else(|| Error::Csv {
                    line: lineno + 2,
                    msg: "missing field".into(),
                })?
                .parse::<f64>()
                .map_err(|e| Error::Csv {
                    line: lineno + 2,
                    msg: e.to_string(),
                })
            };
            xs.push(parse(fields.next())?);
            for _ in 0..n {
                samples.push(parse(fields.next())?);
            }
        }
        if xs.len() < 3 {
            return Err(Error::Csv {
                line: 1,
                msg: "need at least three grid points".into(),
            });
        }
        let first = xs[0];
        let last = *xs.last().unwrap();
        if (first + last).abs() > 1e-9 {
            return Err(Error::Csv {
                line: 2,
                msg: "abscissae must be symmetric about zero".into(),
            });
        }
        let h = (last - first) / (xs.len() - 1) as f64;
        let grid = Grid::from_spacing(last, h)?;
        if grid.len() != xs.len() {
            return Err(Error::Csv {
                line: 2,
                msg: "row count does not match the inferred grid".into(),
            });
        }
        Self::from_samples(grid, n, samples)
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(4, 64).unwrap()
    }

    #[test]
    fn rejects_non_integer_spacing() {
        assert!(Grid::from_spacing(4.0, 0.3).is_err());
        assert!(Grid::from_spacing(4.5, 1.0 / 64.0).is_err());
        assert!(Grid::from_spacing(-1.0, 1.0 / 64.0).is_err());
        let g = Grid::from_spacing(16.0, 1.0 / 256.0).unwrap();
        assert_eq!(g.len(), 8193);
        assert_eq!(g.x(0), -16.0);
        assert_eq!(g.x(8192), 16.0);
    }

    #[test]
    fn zero_sample() {
        let u = GridFunction::sample_scalar(grid(), |_| 0.0);
        assert!(u.is_zero());
    }

    #[test]
    fn exponential_sample_is_symmetric_and_positive() {
        let g = Grid::new(8, 64).unwrap();
        let u = GridFunction::sample_scalar(g, |x| (0.25 * x.abs()).exp());
        let n = g.len();
        for i in 0..n {
            assert!(u.value(i, 0) > 0.0);
            assert_eq!(u.value(i, 0), u.value(n - 1 - i, 0));
        }
    }

    #[test]
    fn translate_identity_and_spike() {
        let g = grid();
        let u = GridFunction::sample_scalar(g, |x| (x * 1.7).sin());
        assert_eq!(u.translate(0).unwrap(), u);

        let mut spike = GridFunction::zeros(g, 1);
        spike.row_mut(g.origin())[0] = 1.0;
        let moved = spike.translate(64).unwrap();
        assert_eq!(moved.value(g.index_of(1.0).unwrap(), 0), 1.0);
        assert_eq!(moved.max_abs(), 1.0);
        let back = spike.translate(-64).unwrap();
        assert_eq!(back.value(g.index_of(-1.0).unwrap(), 0), 1.0);
    }

    #[test]
    fn translate_round_trip_on_interior() {
        let g = grid();
        let u = GridFunction::sample_scalar(g, |x| x.cos() + 0.1 * x);
        let k = 37;
        let w = u.translate(k).unwrap().translate(-k).unwrap();
        for i in k as usize..g.len() - k as usize {
            assert_eq!(w.value(i, 0), u.value(i, 0));
        }
    }

    #[test]
    fn translate_out_of_range() {
        let g = grid();
        let u = GridFunction::zeros(g, 1);
        assert!(matches!(
            u.translate(g.len() as i64),
            Err(Error::ShiftOutOfRange { .. })
        ));
        assert!(u.translate(-(g.len() as i64 - 1)).is_err());
    }

    #[test]
    fn derivative_of_constant_and_linear() {
        let g = grid();
        let c = GridFunction::sample_scalar(g, |_| 3.5).derivative();
        assert!(c.max_abs() == 0.0);
        let d = GridFunction::sample_scalar(g, |x| x).derivative();
        for i in 0..g.len() {
            assert!((d.value(i, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pointwise_multiply_cases() {
        let g = grid();
        let x = GridFunction::sample_scalar(g, |x| x);
        let one = GridFunction::sample_scalar(g, |_| 1.0);
        let zero = GridFunction::zeros(g, 1);
        assert_eq!(x.pointwise_multiply(&one).unwrap(), x);
        assert!(x.pointwise_multiply(&zero).unwrap().is_zero());
        let sq = x.pointwise_multiply(&x).unwrap();
        for i in 0..g.len() {
            assert_eq!(sq.value(i, 0), g.x(i) * g.x(i));
        }
        let other = GridFunction::zeros(Grid::new(4, 32).unwrap(), 1);
        assert!(x.pointwise_multiply(&other).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = Grid::new(1, 8).unwrap();
        let u = GridFunction::sample(g, 2, |x, out| {
            out[0] = (x * 0.3).exp() / 3.0;
            out[1] = -x.sin();
        });
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,u1,u2\n"));
        let back = GridFunction::read_csv(&buf[..]).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(GridFunction::read_csv(&b"y,u1\n0,0\n"[..]).is_err());
        assert!(GridFunction::read_csv(&b"x,u1\n-1,0\n0,abc\n1,0\n"[..]).is_err());
    }
}
