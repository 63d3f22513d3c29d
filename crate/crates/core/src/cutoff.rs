//! The partition-of-unity cut-off
//!
//! ```text
//! [chi(u)](x) = int chi_bar(rho_y(u)) theta(x - y) u(x) dy,
//! rho_y(u)    = |theta(. - y) u|_{H1},
//! chi_eps(u)  = eps chi(u / eps),
//! ```
//!
//! and its first derivative. Since `u(x)` factors out of the `y`-integral,
//! `chi(u) = w u` with the scalar multiplier
//! `w(x) = int chi_bar(rho_y(u)) theta(x - y) dy`.
//!
//! The `y`-grid is the `x`-grid (optionally strided) extended to
//! `[-L - 2, L + 2]`. With `theta(x - y)` tabulated at integer offsets, both
//! `rho` and `w` are discrete correlations against a fixed kernel and are
//! evaluated with FFTs. Products `theta u` are differentiated with the
//! product rule, using the closed-form `theta'` and the grid derivative of
//! `u`.

use crate::conv::{convolve, correlate_sum, Kernel};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::partition::PartitionPair;

/// Margin of the `y`-grid beyond the domain on each side, in units.
const Y_MARGIN: usize = 2;

#[derive(Clone, Debug)]
pub struct CutoffConfig {
    pub pair: PartitionPair,
    /// Cut-off scale; `1` gives the unscaled operator.
    pub epsilon: f64,
    /// Quadrature step of the `y`-integral; `None` uses the grid spacing.
    pub y_spacing: Option<f64>,
}

impl CutoffConfig {
    pub fn new(pair: PartitionPair, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("epsilon = {epsilon} must be positive")));
        }
        Ok(Self {
            pair,
            epsilon,
            y_spacing: None,
        })
    }

    pub fn standard(epsilon: f64) -> Result<Self> {
        Self::new(PartitionPair::standard(), epsilon)
    }

    pub fn with_y_spacing(mut self, h_y: f64) -> Result<Self> {
        if !(h_y > 0.0 && h_y <= 0.25) {
            return Err(Error::Config(format!(
                "y spacing {h_y} must lie in (0, 1/4] to resolve the generator"
            )));
        }
        self.y_spacing = Some(h_y);
        Ok(self)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let mut c = Self::new(self.pair.clone(), epsilon)?;
        c.y_spacing = self.y_spacing;
        Ok(c)
    }

    /// `y`-grid stride in grid points. The `y` spacing must be a multiple of
    /// `h` that divides 1, which keeps the quadrature of `theta` exact.
    fn stride(&self, grid: Grid) -> Result<usize> {
        let m = grid.cells_per_unit();
        let Some(h_y) = self.y_spacing else {
            return Ok(1);
        };
        let s = h_y * m as f64;
        let r = s.round();
        if (s - r).abs() > 1e-9 * r.max(1.0) || r < 1.0 || m % (r as usize) != 0 {
            return Err(Error::Config(format!(
                "y spacing {h_y} is not a multiple of h = 1/{m} dividing 1"
            )));
        }
        Ok(r as usize)
    }
}

/// `rho_y(u)` on the `y`-grid `y_k = y_start + k * y_spacing`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoField {
    pub y_start: f64,
    pub y_spacing: f64,
    pub values: Vec<f64>,
}

impl RhoField {
    pub fn y(&self, k: usize) -> f64 {
        self.y_start + k as f64 * self.y_spacing
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v))
    }
}

/// `theta(d h)` and derivatives tabulated over the integer offsets `d` where
/// the generator can be nonzero.
struct ThetaTables {
    /// `theta^2`
    sq: Kernel,
    /// `theta'^2`
    slope_sq: Kernel,
    /// `2 theta theta'`
    cross: Kernel,
    /// `theta`
    plain: Kernel,
}

impl ThetaTables {
    fn new(pair: &PartitionPair, grid: Grid) -> Self {
        let m = grid.cells_per_unit() as f64;
        let (lo, hi) = pair.theta_support;
        let first = (lo * m).floor() as i64;
        let last = (hi * m).ceil() as i64;
        let offsets = first..=last;
        let theta: Vec<f64> = offsets.clone().map(|d| pair.theta.value(d as f64 / m)).collect();
        let slope: Vec<f64> = offsets.map(|d| pair.theta.slope(d as f64 / m)).collect();
        let make = |values: Vec<f64>| Kernel { first, values };
        Self {
            sq: make(theta.iter().map(|t| t * t).collect()),
            slope_sq: make(slope.iter().map(|t| t * t).collect()),
            cross: make(theta.iter().zip(&slope).map(|(t, s)| 2.0 * t * s).collect()),
            plain: make(theta),
        }
    }
}

/// Layout shared by all fields of one evaluation.
struct Layout {
    grid: Grid,
    stride: usize,
    /// `y_k = x_{k - shift}`
    shift: i64,
    /// Number of `y` points at unit stride.
    y_len: usize,
}

impl Layout {
    fn new(grid: Grid, cfg: &CutoffConfig) -> Result<Self> {
        let m = grid.cells_per_unit();
        Ok(Self {
            grid,
            stride: cfg.stride(grid)?,
            shift: (Y_MARGIN * m) as i64,
            y_len: grid.len() + 2 * Y_MARGIN * m,
        })
    }

    fn y_spacing(&self) -> f64 {
        self.stride as f64 * self.grid.h()
    }

    fn y_start(&self) -> f64 {
        -((self.grid.half_length() + Y_MARGIN) as f64)
    }

    /// Trapezoid weights of the domain.
    fn quadrature_weight(&self, i: usize) -> f64 {
        let h = self.grid.h();
        if i == 0 || i + 1 == self.grid.len() {
            0.5 * h
        } else {
            h
        }
    }
}

/// Squared `rho` at every unit-stride `y` point.
fn rho_squared(u: &GridFunction, tables: &ThetaTables, layout: &Layout) -> Vec<f64> {
    let du = u.derivative();
    let c = u.components();
    let n = layout.grid.len();
    let mut energy = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    let mut mixed = Vec::with_capacity(n);
    for i in 0..n {
        let wt = layout.quadrature_weight(i);
        let (mut uu, mut dd, mut ud) = (0.0, 0.0, 0.0);
        for k in 0..c {
            let a = u.value(i, k);
            let b = du.value(i, k);
            uu += a * a;
            dd += b * b;
            ud += a * b;
        }
        energy.push(wt * (uu + dd));
        mass.push(wt * uu);
        mixed.push(wt * ud);
    }
    // |theta u|^2 + |theta' u + theta u'|^2
    //   = theta^2 (u^2 + u'^2) + theta'^2 u^2 + 2 theta theta' u u'
    let mut sq = correlate_sum(
        &[
            (&tables.sq, &energy),
            (&tables.slope_sq, &mass),
            (&tables.cross, &mixed),
        ],
        layout.shift,
        layout.y_len,
    );
    // rho_y is exactly zero when u vanishes on the support of theta_y;
    // clear the transform's round-off there.
    let mut support_count = Vec::with_capacity(n + 1);
    support_count.push(0usize);
    for &e in &energy {
        support_count.push(support_count.last().unwrap() + usize::from(e != 0.0));
    }
    let first = tables.sq.first;
    let last = first + tables.sq.values.len() as i64 - 1;
    for (k, v) in sq.iter_mut().enumerate() {
        let lo = (k as i64 - layout.shift + first).clamp(0, n as i64) as usize;
        let hi = (k as i64 - layout.shift + last + 1).clamp(0, n as i64) as usize;
        if support_count[hi] == support_count[lo] {
            *v = 0.0;
        } else {
            *v = v.max(0.0);
        }
    }
    sq
}

/// `<theta_y u, theta_y v>_{H1}` at every unit-stride `y` point.
fn rho_pairing(u: &GridFunction, v: &GridFunction, tables: &ThetaTables, layout: &Layout) -> Vec<f64> {
    let du = u.derivative();
    let dv = v.derivative();
    let c = u.components();
    let n = layout.grid.len();
    let mut energy = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    let mut mixed = Vec::with_capacity(n);
    for i in 0..n {
        let wt = layout.quadrature_weight(i);
        let (mut uv, mut dd, mut sym) = (0.0, 0.0, 0.0);
        for k in 0..c {
            let (a, b) = (u.value(i, k), v.value(i, k));
            let (da, db) = (du.value(i, k), dv.value(i, k));
            uv += a * b;
            dd += da * db;
            sym += 0.5 * (a * db + da * b);
        }
        energy.push(wt * (uv + dd));
        mass.push(wt * uv);
        mixed.push(wt * sym);
    }
    correlate_sum(
        &[
            (&tables.sq, &energy),
            (&tables.slope_sq, &mass),
            (&tables.cross, &mixed),
        ],
        layout.shift,
        layout.y_len,
    )
}

/// `out(x) = h_y sum_k coeff_k theta(x - y_k)` over the strided `y` points.
fn theta_average(coeff_at: impl Fn(usize) -> f64, tables: &ThetaTables, layout: &Layout) -> Vec<f64> {
    let h_y = layout.y_spacing();
    let coeffs: Vec<f64> = (0..layout.y_len)
        .map(|k| if k % layout.stride == 0 { h_y * coeff_at(k) } else { 0.0 })
        .collect();
    convolve(&tables.plain, &coeffs, layout.shift, layout.grid.len())
}

pub fn rho_field(u: &GridFunction, cfg: &CutoffConfig) -> Result<RhoField> {
    let layout = Layout::new(u.grid(), cfg)?;
    let tables = ThetaTables::new(&cfg.pair, u.grid());
    let sq = rho_squared(u, &tables, &layout);
    Ok(RhoField {
        y_start: layout.y_start(),
        y_spacing: layout.y_spacing(),
        values: sq.iter().step_by(layout.stride).map(|v| v.sqrt()).collect(),
    })
}

fn multiplier_values(rho: &[f64], cfg: &CutoffConfig, tables: &ThetaTables, layout: &Layout) -> Vec<f64> {
    let chi_bar = &cfg.pair.chi_bar;
    theta_average(|k| chi_bar.value(rho[k]), tables, layout)
}

fn scalar_field(grid: Grid, values: Vec<f64>) -> GridFunction {
    GridFunction::from_samples(grid, 1, values).expect("field length matches its grid")
}

/// The scalar field `w(x) = int chi_bar(rho_y(u)) theta(x - y) dy`.
pub fn multiplier(u: &GridFunction, cfg: &CutoffConfig) -> Result<GridFunction> {
    let layout = Layout::new(u.grid(), cfg)?;
    let tables = ThetaTables::new(&cfg.pair, u.grid());
    let rho: Vec<f64> = rho_squared(u, &tables, &layout).iter().map(|v| v.sqrt()).collect();
    Ok(scalar_field(u.grid(), multiplier_values(&rho, cfg, &tables, &layout)))
}

/// `chi_eps(u) = eps chi(u / eps) = w(u / eps) u`.
pub fn apply_cutoff(u: &GridFunction, cfg: &CutoffConfig) -> Result<GridFunction> {
    let w = multiplier(&u.scale(1.0 / cfg.epsilon), cfg)?;
    u.pointwise_multiply(&w)
}

fn require_unscaled(cfg: &CutoffConfig) -> Result<()> {
    if cfg.epsilon != 1.0 {
        return Err(Error::Config(format!(
            "derivative machinery works at epsilon = 1, got {}",
            cfg.epsilon
        )));
    }
    Ok(())
}

/// Pieces of the linearisation of `chi` at `u`: `chi^1(u) v = a(v) u + w v`.
struct Linearisation {
    layout: Layout,
    tables: ThetaTables,
    rho: Vec<f64>,
    w: Vec<f64>,
}

impl Linearisation {
    fn new(u: &GridFunction, cfg: &CutoffConfig) -> Result<Self> {
        let layout = Layout::new(u.grid(), cfg)?;
        let tables = ThetaTables::new(&cfg.pair, u.grid());
        let rho: Vec<f64> = rho_squared(u, &tables, &layout).iter().map(|v| v.sqrt()).collect();
        let w = multiplier_values(&rho, cfg, &tables, &layout);
        Ok(Self { layout, tables, rho, w })
    }

    fn apply(&self, u: &GridFunction, v: &GridFunction, cfg: &CutoffConfig) -> Result<GridFunction> {
        u.check_same_shape(v)?;
        let chi_bar = &cfg.pair.chi_bar;
        // the first term only lives where chi_bar' != 0, i.e. rho in (1, 2)
        let active = self.rho.iter().any(|&r| chi_bar.slope(r) != 0.0);
        let a = if active {
            let pairing = rho_pairing(u, v, &self.tables, &self.layout);
            theta_average(
                |k| {
                    let s = chi_bar.slope(self.rho[k]);
                    if s == 0.0 {
                        0.0
                    } else {
                        s * pairing[k] / self.rho[k]
                    }
                },
                &self.tables,
                &self.layout,
            )
        } else {
            vec![0.0; u.grid().len()]
        };
        let c = u.components();
        let mut out = GridFunction::zeros(u.grid(), c);
        for i in 0..u.grid().len() {
            let row = out.row_mut(i);
            for k in 0..c {
                row[k] = a[i] * u.value(i, k) + self.w[i] * v.value(i, k);
            }
        }
        Ok(out)
    }
}

/// `[chi^1(u) v](x) = (int chi_bar'(rho_y) D rho_y(u) v theta(x - y) dy) u(x)
///                  + (int chi_bar(rho_y) theta(x - y) dy) v(x)`,
/// with `D rho_y(u) v = <theta_y u, theta_y v>_{H1} / rho_y(u)`.
pub fn chi_one(u: &GridFunction, v: &GridFunction, cfg: &CutoffConfig) -> Result<GridFunction> {
    require_unscaled(cfg)?;
    u.check_same_shape(v)?;
    Linearisation::new(u, cfg)?.apply(u, v, cfg)
}

/// Candidate derivative of `u -> chi(u)^2`: `L(u) v = 2 chi(u) (chi^1(u) v)`,
/// componentwise for vector-valued `u`.
pub fn derivative_candidate(u: &GridFunction, v: &GridFunction, cfg: &CutoffConfig) -> Result<GridFunction> {
    require_unscaled(cfg)?;
    u.check_same_shape(v)?;
    let lin = Linearisation::new(u, cfg)?;
    let dchi = lin.apply(u, v, cfg)?;
    let w = scalar_field(u.grid(), lin.w.clone());
    let chi = u.pointwise_multiply(&w)?;
    chi.zip_with(&dchi, |a, b| 2.0 * a * b)
}

/// Reusable linearisation at a fixed base point, for probing `chi^1(u)`
/// along many directions.
pub struct ChiOne<'a> {
    u: &'a GridFunction,
    cfg: &'a CutoffConfig,
    lin: Linearisation,
}

impl<'a> ChiOne<'a> {
    pub fn at(u: &'a GridFunction, cfg: &'a CutoffConfig) -> Result<Self> {
        require_unscaled(cfg)?;
        Ok(Self {
            u,
            cfg,
            lin: Linearisation::new(u, cfg)?,
        })
    }

    pub fn apply(&self, v: &GridFunction) -> Result<GridFunction> {
        self.lin.apply(self.u, v, self.cfg)
    }
}
