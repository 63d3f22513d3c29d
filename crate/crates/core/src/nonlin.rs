//! Superposition nonlinearities.
//!
//! * `F(u) = u^2` componentwise, and the cut version `F_eps(u) = chi_eps(u)^2`.
//! * The pointwise cut-off `g(u) = u^2 T(|u| / delta)` with a transition `T`
//!   that is 1 on `[0, 1]` and 0 on `[2, inf)`. Its H1 Lipschitz constant is
//!   unbounded on rough inputs, which the sawtooth pair exhibits.

use std::fmt;
use std::sync::Arc;

use crate::cutoff::{apply_cutoff, derivative_candidate, CutoffConfig};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Window};
use crate::norms::{h1_norm_window, weighted_norm, WeightedNormSpec};
use crate::partition::smoothstep;

pub fn quadratic(u: &GridFunction) -> GridFunction {
    u.map(|v| v * v)
}

/// `F_eps(u) = chi_eps(u)^2`.
pub fn f_eps(u: &GridFunction, cfg: &CutoffConfig) -> Result<GridFunction> {
    Ok(quadratic(&apply_cutoff(u, cfg)?))
}

/// Derivative of `F_eps` at `u` in direction `v`. Scaling conjugates the
/// unit-scale derivative: `D F_eps(u) v = eps L(u / eps) v`.
pub fn f_eps_derivative(u: &GridFunction, v: &GridFunction, cfg: &CutoffConfig) -> Result<GridFunction> {
    let eps = cfg.epsilon;
    let unit = cfg.with_epsilon(1.0)?;
    Ok(derivative_candidate(&u.scale(1.0 / eps), v, &unit)?.scale(eps))
}

/// Threshold and transition profile of the pointwise cut-off.
#[derive(Clone)]
pub struct PointwiseCutoffSpec {
    pub delta: f64,
    transition: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl PointwiseCutoffSpec {
    /// Quintic transition `T(s) = 1 - S(s - 1)`.
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_transition(delta, |s| 1.0 - smoothstep(s - 1.0))
    }

    pub fn with_transition(delta: f64, transition: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Config(format!("delta = {delta} must be positive")));
        }
        Ok(Self {
            delta,
            transition: Arc::new(transition),
        })
    }

    pub fn transition(&self, s: f64) -> f64 {
        (self.transition)(s)
    }
}

impl fmt::Debug for PointwiseCutoffSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointwiseCutoffSpec")
            .field("delta", &self.delta)
            .finish_non_exhaustive()
    }
}

/// `g(u)(x) = u(x)^2 T(|u(x)| / delta)`, componentwise.
pub fn pointwise_cutoff_g(u: &GridFunction, spec: &PointwiseCutoffSpec) -> GridFunction {
    u.map(|v| v * v * spec.transition(v.abs() / spec.delta))
}

/// Parameters of the sawtooth pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SawtoothSpec {
    /// Inverse slope of the teeth.
    pub eps_saw: f64,
    /// Teeth have height `delta / 2`.
    pub delta: f64,
    /// Offset between the pair, `< delta / 2`.
    pub delta_prime: f64,
}

impl SawtoothSpec {
    pub fn new(eps_saw: f64, delta: f64, delta_prime: f64) -> Result<Self> {
        if !(eps_saw > 0.0 && delta > 0.0 && delta_prime > 0.0) {
            return Err(Error::Config("sawtooth parameters must be positive".into()));
        }
        if delta_prime >= delta / 2.0 {
            return Err(Error::Config(format!(
                "delta' = {delta_prime} must be below delta / 2 = {}",
                delta / 2.0
            )));
        }
        let s = Self {
            eps_saw,
            delta,
            delta_prime,
        };
        s.tooth_count()?;
        Ok(s)
    }

    /// Number of teeth on `[0, 1]`, `1 / (delta eps_saw)`.
    pub fn tooth_count(&self) -> Result<usize> {
        let t = 1.0 / (self.delta * self.eps_saw);
        let r = t.round();
        if r < 1.0 || (t - r).abs() > 1e-9 * r {
            return Err(Error::Config(format!(
                "1 / (delta eps_saw) = {t} is not a positive integer"
            )));
        }
        Ok(r as usize)
    }

    pub fn tooth_width(&self) -> f64 {
        self.delta * self.eps_saw
    }

    /// Finest-needed grid: `points_per_tooth` cells per tooth, so that tooth
    /// tips fall on grid points.
    pub fn grid(&self, half_length: usize, points_per_tooth: usize) -> Result<Grid> {
        if points_per_tooth < 8 || points_per_tooth % 2 != 0 {
            return Err(Error::Config("need an even number >= 8 of points per tooth".into()));
        }
        Grid::new(half_length, self.tooth_count()? * points_per_tooth)
    }

    /// Interior of the support where `v - u` is exactly `delta'` and its grid
    /// derivative vanishes.
    pub fn plateau_window(&self, grid: Grid) -> Result<Window> {
        let h = grid.h();
        Window::new(3.0 * h, 1.0 - 3.0 * h)
    }
}

/// The sawtooth `u` on `[0, 1]` (slopes `+-1/eps_saw`, values in
/// `[0, delta/2]`) and `v = u + delta' p`, where the plateau `p` is 1 on
/// `[2h, 1 - 2h]` with quintic ramps of width `2h`.
pub fn sawtooth(spec: &SawtoothSpec, grid: Grid) -> Result<(GridFunction, GridFunction)> {
    let width = spec.tooth_width();
    let h = grid.h();
    if h > width / 8.0 * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "grid spacing {h} does not resolve teeth of width {width} (need h <= width / 8)"
        )));
    }
    if grid.half_length() < 1 {
        return Err(Error::Config("the domain must contain [0, 1]".into()));
    }
    let teeth = spec.tooth_count()? as f64;
    let slope = 1.0 / spec.eps_saw;
    let u = GridFunction::sample_scalar(grid, |x| {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        // distance to the nearest tooth boundary, in x-units
        let t = (x * teeth).fract().min(1.0 - (x * teeth).fract()) / teeth;
        (slope * t).min(spec.delta / 2.0)
    });
    let ramp = 2.0 * h;
    let plateau = GridFunction::sample_scalar(grid, |x| {
        if !(0.0..=1.0).contains(&x) {
            0.0
        } else {
            smoothstep(x / ramp).min(smoothstep((1.0 - x) / ramp))
        }
    });
    let v = u.axpy(spec.delta_prime, &plateau)?;
    Ok((u, v))
}

/// `|F(u) - F(v)|_{-eta} / |u - v|_{-eta}`.
pub fn lipschitz_ratio<F>(f: F, u: &GridFunction, v: &GridFunction, eta: f64) -> Result<f64>
where
    F: Fn(&GridFunction) -> Result<GridFunction>,
{
    let spec = WeightedNormSpec::new(eta)?;
    let denom = weighted_norm(&u.sub(v)?, spec);
    if denom == 0.0 {
        return Err(Error::IdenticalInputs);
    }
    Ok(weighted_norm(&f(u)?.sub(&f(v)?)?, spec) / denom)
}

/// The same ratio measured in the H1 norm of a single window.
pub fn local_lipschitz_ratio<F>(f: F, u: &GridFunction, v: &GridFunction, window: &Window) -> Result<f64>
where
    F: Fn(&GridFunction) -> Result<GridFunction>,
{
    let denom = h1_norm_window(&u.sub(v)?, window)?;
    if denom == 0.0 {
        return Err(Error::IdenticalInputs);
    }
    Ok(h1_norm_window(&f(u)?.sub(&f(v)?)?, window)? / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::uniform_norm;

    fn spec16() -> SawtoothSpec {
        SawtoothSpec::new(1.0 / 16.0, 0.1, 0.02).unwrap()
    }

    #[test]
    fn quadratic_cases() {
        let g = Grid::new(2, 16).unwrap();
        assert!(quadratic(&GridFunction::zeros(g, 1)).is_zero());
        let c = quadratic(&GridFunction::sample_scalar(g, |_| -1.5));
        assert!(c.samples().iter().all(|&v| v == 2.25));
    }

    #[test]
    fn quadratic_of_half_rate_exponential_leaves_the_space() {
        let eta = 0.5;
        let spec = WeightedNormSpec::new(eta).unwrap();
        let norms: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&l| {
                let g = Grid::new(l, 32).unwrap();
                let u = GridFunction::sample_scalar(g, |x| (eta * x.abs() / 2.0).exp());
                weighted_norm(&quadratic(&u), spec)
            })
            .collect();
        // every window contributes O(1): the norm grows like sqrt(L)
        assert!(norms[1] > 1.3 * norms[0]);
        assert!(norms[2] > 1.3 * norms[1]);
    }

    #[test]
    fn pointwise_cutoff_regimes() {
        let g = Grid::new(1, 16).unwrap();
        let spec = PointwiseCutoffSpec::new(0.1).unwrap();
        let small = GridFunction::sample_scalar(g, |x| 0.09 * x.sin());
        assert_eq!(pointwise_cutoff_g(&small, &spec), quadratic(&small));
        let big = GridFunction::sample_scalar(g, |x| 0.21 + x * x);
        assert!(pointwise_cutoff_g(&big, &spec).is_zero());
        assert!(pointwise_cutoff_g(&GridFunction::zeros(g, 1), &spec).is_zero());
    }

    #[test]
    fn sawtooth_spec_validation() {
        assert!(SawtoothSpec::new(1.0 / 16.0, 0.1, 0.05).is_err());
        assert!(SawtoothSpec::new(0.3, 0.1, 0.02).is_err());
        let s = spec16();
        assert_eq!(s.tooth_count().unwrap(), 160);
        let coarse = Grid::new(1, 640).unwrap();
        assert!(sawtooth(&s, coarse).is_err());
    }

    #[test]
    fn sawtooth_shape() {
        let s = spec16();
        let g = s.grid(1, 8).unwrap();
        let (u, v) = sawtooth(&s, g).unwrap();
        assert!((u.max_abs() - 0.05).abs() < 1e-12);
        let du = u.derivative();
        // away from the tips the slope is exactly +-1/eps_saw
        let mut hits = 0;
        for i in 0..g.len() {
            let x = g.x(i);
            if x > 0.0 && x < 1.0 && du.value(i, 0) != 0.0 {
                assert!((du.value(i, 0).abs() - 16.0).abs() < 1e-9, "{x}");
                hits += 1;
            }
        }
        assert!(hits > 0);
        let d = v.sub(&u).unwrap();
        for i in 0..g.len() {
            let x = g.x(i);
            let p = d.value(i, 0);
            if x < 0.0 || x > 1.0 {
                assert_eq!(p, 0.0);
            } else if x >= 2.0 * g.h() - 1e-12 && x <= 1.0 - 2.0 * g.h() + 1e-12 {
                assert!((p - 0.02).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sawtooth_lower_bound_on_the_plateau() {
        let s = spec16();
        let g = s.grid(1, 32).unwrap();
        let (u, v) = sawtooth(&s, g).unwrap();
        let spec = PointwiseCutoffSpec::new(s.delta).unwrap();
        let w = s.plateau_window(g).unwrap();
        let num = h1_norm_window(
            &pointwise_cutoff_g(&u, &spec).sub(&pointwise_cutoff_g(&v, &spec)).unwrap(),
            &w,
        )
        .unwrap();
        let du_l2 = {
            let du = u.derivative();
            let (ia, ib) = g.window_indices(&w).unwrap();
            let h = g.h();
            let vals: Vec<f64> = (ia..=ib).map(|i| du.value(i, 0).powi(2)).collect();
            let inner: f64 = vals[1..vals.len() - 1].iter().sum();
            (h * (inner + 0.5 * (vals[0] + vals[vals.len() - 1]))).sqrt()
        };
        assert!(num >= 2.0 * s.delta_prime * du_l2);
        let denom = h1_norm_window(&u.sub(&v).unwrap(), &w).unwrap();
        assert!((denom - s.delta_prime * (w.b - w.a).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lipschitz_ratio_of_identity_is_one() {
        let g = Grid::new(4, 32).unwrap();
        let u = GridFunction::sample_scalar(g, |x| (-(x * x)).exp());
        let v = GridFunction::sample_scalar(g, |x| x.sin() * (-(x * x)).exp());
        let r = lipschitz_ratio(|w| Ok(w.clone()), &u, &v, 0.5).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert!(matches!(
            lipschitz_ratio(|w| Ok(w.clone()), &u, &u, 0.5),
            Err(Error::IdenticalInputs)
        ));
    }

    #[test]
    fn f_eps_small_ball_and_zero() {
        let g = Grid::new(6, 64).unwrap();
        let cfg = CutoffConfig::standard(0.25).unwrap();
        assert!(f_eps(&GridFunction::zeros(g, 1), &cfg).unwrap().is_zero());
        let mut u = GridFunction::sample_scalar(g, |x| (2.0 * x).cos() * (-(x * x) / 4.0).exp());
        u = u.scale(0.3 * 0.25 / uniform_norm(&u));
        let f = f_eps(&u, &cfg).unwrap();
        let q = quadratic(&u);
        for (a, b) in f.samples().iter().zip(q.samples()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn scaled_derivative_matches_small_ball_formula() {
        let g = Grid::new(6, 64).unwrap();
        let cfg = CutoffConfig::standard(0.5).unwrap();
        let mut u = GridFunction::sample_scalar(g, |x| x.sin() * (-(x * x) / 4.0).exp());
        u = u.scale(0.1 / uniform_norm(&u));
        let v = GridFunction::sample_scalar(g, |x| (-(x - 1.0).powi(2)).exp());
        let d = f_eps_derivative(&u, &v, &cfg).unwrap();
        let expect = u.zip_with(&v, |a, b| 2.0 * a * b).unwrap();
        for (a, b) in d.samples().iter().zip(expect.samples()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
