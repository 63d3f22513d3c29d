//! Local and global Sobolev norms on grid functions.
//!
//! Every integral is a trapezoid sum and every derivative is the central
//! difference from [`GridFunction::derivative`]. The weighted norm is
//! *defined* as the exponentially weighted l2-sum of unit-interval H1 norms,
//!
//! ```text
//! |u|_{-eta}^2 = sum_j exp(-2 eta |j|) |u|_{H1([j, j+1])}^2,
//! ```
//!
//! and the uniformly local norm is the maximum of the H1 norm over all
//! grid-aligned unit windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Window};

/// Exponent of the weighted space `H1_{-eta}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub eta: f64,
}

impl WeightedNormSpec {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::Config(format!("eta = {eta} must be finite and non-negative")));
        }
        Ok(Self { eta })
    }

    pub fn weight(&self, j: i64) -> f64 {
        (-2.0 * self.eta * j.unsigned_abs() as f64).exp()
    }
}

/// Pointwise `|u|^2 + |u'|^2`, summed over components.
fn energy_density(u: &GridFunction) -> Vec<f64> {
    let du = u.derivative();
    u.samples()
        .chunks_exact(u.components())
        .zip(du.samples().chunks_exact(u.components()))
        .map(|(a, b)| a.iter().map(|v| v * v).sum::<f64>() + b.iter().map(|v| v * v).sum::<f64>())
        .collect()
}

fn trapezoid(values: &[f64], ia: usize, ib: usize, h: f64) -> f64 {
    if ib <= ia {
        return 0.0;
    }
    let inner: f64 = values[ia + 1..ib].iter().sum();
    h * (inner + 0.5 * (values[ia] + values[ib]))
}

/// Cumulative trapezoid integral: `out[i] = int_{x_0}^{x_i} values`.
fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for pair in values.windows(2) {
        acc += 0.5 * h * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}

pub fn h1_norm_window(u: &GridFunction, w: &Window) -> Result<f64> {
    let (ia, ib) = u.grid().window_indices(w)?;
    let density = energy_density(u);
    Ok(trapezoid(&density, ia, ib, u.grid().h()).sqrt())
}

/// H1 inner product `int_w (u . v + u' . v')`.
pub fn h1_inner(u: &GridFunction, v: &GridFunction, w: &Window) -> Result<f64> {
    u.check_same_shape(v)?;
    let (ia, ib) = u.grid().window_indices(w)?;
    let du = u.derivative();
    let dv = v.derivative();
    let c = u.components();
    let density: Vec<f64> = (0..u.grid().len())
        .map(|i| {
            (0..c)
                .map(|k| u.value(i, k) * v.value(i, k) + du.value(i, k) * dv.value(i, k))
                .sum()
        })
        .collect();
    Ok(trapezoid(&density, ia, ib, u.grid().h()))
}

/// Squared H1 norms of `u` on every unit interval `[j, j+1]`, `j = -L..L-1`.
pub fn unit_window_energies(u: &GridFunction) -> Vec<f64> {
    let grid = u.grid();
    let density = energy_density(u);
    let m = grid.cells_per_unit();
    let h = grid.h();
    (0..2 * grid.half_length())
        .map(|k| trapezoid(&density, k * m, (k + 1) * m, h))
        .collect()
}

pub fn weighted_norm(u: &GridFunction, spec: WeightedNormSpec) -> f64 {
    let l = u.grid().half_length() as i64;
    unit_window_energies(u)
        .iter()
        .enumerate()
        .map(|(k, e)| spec.weight(k as i64 - l) * e)
        .sum::<f64>()
        .sqrt()
}

/// Supremum of the local H1 norm over unit windows `[y, y+1]` at every
/// grid-aligned offset `y` in `[-L, L-1]`.
pub fn uniform_norm(u: &GridFunction) -> f64 {
    let grid = u.grid();
    let density = energy_density(u);
    let cum = cumulative_trapezoid(&density, grid.h());
    let m = grid.cells_per_unit();
    let best = (0..grid.len() - m)
        .map(|i| cum[i + m] - cum[i])
        .fold(0.0_f64, f64::max);
    best.max(0.0).sqrt()
}

/// `sqrt(sum_j exp(-2 eta |j|))` over the unit intervals of `grid`; the
/// constant in `|u|_{-eta} <= uniform_norm(u) * C`.
pub fn weight_sum_sqrt(grid: Grid, spec: WeightedNormSpec) -> f64 {
    let l = grid.half_length() as i64;
    (-l..l).map(|j| spec.weight(j)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Grid {
        Grid::new(4, 256).unwrap()
    }

    #[test]
    fn constant_on_unit_window() {
        let u = GridFunction::sample_scalar(g(), |_| -2.5);
        let n = h1_norm_window(&u, &Window::unit(0)).unwrap();
        assert!((n - 2.5).abs() < 1e-12);
        assert_eq!(h1_norm_window(&GridFunction::zeros(g(), 1), &Window::unit(0)).unwrap(), 0.0);
    }

    #[test]
    fn linear_on_unit_window() {
        let u = GridFunction::sample_scalar(g(), |x| x);
        let n = h1_norm_window(&u, &Window::unit(0)).unwrap();
        // trapezoid error on int x^2 is h^2/6
        assert!((n - (4.0_f64 / 3.0).sqrt()).abs() < 1e-5, "{n}");
    }

    #[test]
    fn inner_product_cases() {
        let x = GridFunction::sample_scalar(g(), |x| x);
        let one = GridFunction::sample_scalar(g(), |_| 1.0);
        let w = Window::unit(0);
        let ip = h1_inner(&x, &one, &w).unwrap();
        assert!((ip - 0.5).abs() < 1e-12);
        let n = h1_norm_window(&x, &w).unwrap();
        assert!((h1_inner(&x, &x, &w).unwrap() - n * n).abs() < 1e-12);
        assert_eq!(h1_inner(&x, &GridFunction::zeros(g(), 1), &w).unwrap(), 0.0);
    }

    #[test]
    fn misaligned_window_rejected() {
        let x = GridFunction::sample_scalar(g(), |x| x);
        assert!(h1_norm_window(&x, &Window::new(0.0, 1.0 / 3.0).unwrap()).is_err());
        assert!(h1_norm_window(&x, &Window::new(0.0, 9.0).unwrap()).is_err());
        assert!(Window::new(1.0, 0.0).is_err());
    }

    #[test]
    fn weighted_norm_of_constant_without_weight() {
        let u = GridFunction::sample_scalar(g(), |_| 1.5);
        let spec = WeightedNormSpec::new(0.0).unwrap();
        let expected = 1.5 * (8.0_f64).sqrt();
        assert!((weighted_norm(&u, spec) - expected).abs() < 1e-12);
        assert_eq!(weighted_norm(&GridFunction::zeros(g(), 1), spec), 0.0);
    }

    #[test]
    fn weighted_norm_of_half_rate_exponential_converges_in_l() {
        // With weight exp(-2 eta |j|) and |u|^2 ~ exp(eta |x|), window j
        // contributes ~ exp(-eta |j|): a geometric tail.
        let eta = 0.5;
        let spec = WeightedNormSpec::new(eta).unwrap();
        let norms: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&l| {
                let grid = Grid::new(l, 64).unwrap();
                weighted_norm(&GridFunction::sample_scalar(grid, |x| (eta * x.abs() / 2.0).exp()), spec)
            })
            .collect();
        // geometric-series oracle for the tail beyond L: sum_{|j| >= L} e^{-eta |j|}
        let tail = |l: f64| 2.0 * (-eta * l).exp() / (1.0 - (-eta).exp());
        assert!(norms[2] * norms[2] - norms[1] * norms[1] < 4.0 * tail(16.0));
        assert!(norms[1] * norms[1] - norms[0] * norms[0] < 4.0 * tail(8.0));
        assert!(norms[2] < 5.0);
    }

    #[test]
    fn uniform_norm_cases() {
        let u = GridFunction::sample_scalar(g(), |_| -0.75);
        assert!((uniform_norm(&u) - 0.75).abs() < 1e-12);
        let v = GridFunction::sample_scalar(g(), |x| (3.0 * x).sin() * (-x * x).exp());
        assert!(uniform_norm(&v) >= h1_norm_window(&v, &Window::unit(0)).unwrap());
    }

    #[test]
    fn window_additivity_is_exact() {
        let v = GridFunction::sample_scalar(g(), |x| (2.0 * x).cos() + x);
        let ab = h1_norm_window(&v, &Window::new(-1.0, 0.5).unwrap()).unwrap();
        let bc = h1_norm_window(&v, &Window::new(0.5, 2.0).unwrap()).unwrap();
        let ac = h1_norm_window(&v, &Window::new(-1.0, 2.0).unwrap()).unwrap();
        assert!((ab * ab + bc * bc - ac * ac).abs() <= 1e-12 * ac * ac);
    }

    #[test]
    fn vector_valued_norm_sums_components() {
        let grid = g();
        let u = GridFunction::sample(grid, 2, |_, out| {
            out[0] = 3.0;
            out[1] = 4.0;
        });
        assert!((uniform_norm(&u) - 5.0).abs() < 1e-12);
    }
}
