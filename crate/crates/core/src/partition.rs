//! The smooth cut bump and the partition-of-unity generator.
//!
//! Both profiles are assembled from the quintic smoothstep
//! `S(t) = 6t^5 - 15t^4 + 10t^3`, which is C2 at its joins and has
//! `max S' = S'(1/2) = 15/8`.
//!
//! * bump: `chi_bar(x) = 1 - S(|x| - 1)`, equal to 1 on `|x| <= 1` and 0 on
//!   `|x| >= 2`, slope bounded by 15/8.
//! * generator: `theta(x) = R(x) - R(x - 1)` with the ramp
//!   `R(x) = S(2x + 1/2)` rising on `(-1/4, 1/4)`. The integer translates
//!   telescope, so `sum_j theta(x - j) = 1` holds identically.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Quintic smoothstep, clamped to `[0, 1]` outside the unit interval.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

pub fn smoothstep_slope(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let s = t * (1.0 - t);
        30.0 * s * s
    }
}

/// A scalar profile given by closed forms for its value and its slope.
#[derive(Clone)]
pub struct Profile {
    value: ScalarFn,
    slope: ScalarFn,
}

impl Profile {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        slope: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            slope: Arc::new(slope),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        (self.slope)(x)
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Profile")
    }
}

pub fn build_chi_bar() -> Profile {
    Profile::new(
        |x: f64| 1.0 - smoothstep(x.abs() - 1.0),
        |x: f64| -x.signum() * smoothstep_slope(x.abs() - 1.0),
    )
}

fn ramp(x: f64) -> f64 {
    smoothstep(2.0 * x + 0.5)
}

fn ramp_slope(x: f64) -> f64 {
    2.0 * smoothstep_slope(2.0 * x + 0.5)
}

pub fn build_theta() -> Profile {
    Profile::new(
        |x| ramp(x) - ramp(x - 1.0),
        |x| ramp_slope(x) - ramp_slope(x - 1.0),
    )
}

/// Bump and generator used by the cut-off, with their certified constants.
#[derive(Clone, Debug)]
pub struct PartitionPair {
    pub chi_bar: Profile,
    pub theta: Profile,
    /// Largest `|chi_bar'|` found by dense sampling at construction.
    pub chi_bar_slope_max: f64,
    /// `theta` vanishes outside this interval.
    pub theta_support: (f64, f64),
}

impl PartitionPair {
    pub fn new(chi_bar: Profile, theta: Profile, theta_support: (f64, f64)) -> Self {
        let chi_bar_slope_max = slope_scan(&chi_bar, -3.0, 3.0, 1e-4);
        Self {
            chi_bar,
            theta,
            chi_bar_slope_max,
            theta_support,
        }
    }

    pub fn standard() -> Self {
        Self::new(build_chi_bar(), build_theta(), (-0.25, 1.25))
    }
}

impl Default for PartitionPair {
    fn default() -> Self {
        Self::standard()
    }
}

/// Maximum of the closed-form slope and of all difference quotients on a
/// uniform sample of `[a, b]`. The difference quotients catch profiles whose
/// reported slope misses a jump.
fn slope_scan(p: &Profile, a: f64, b: f64, step: f64) -> f64 {
    let n = ((b - a) / step).round() as usize;
    let mut best = 0.0_f64;
    let mut prev = p.value(a);
    for i in 0..=n {
        let x = a + i as f64 * step;
        let v = p.value(x);
        best = best.max(p.slope(x).abs());
        if i > 0 {
            best = best.max(((v - prev) / step).abs());
        }
        prev = v;
    }
    best
}

/// Measured constants of a certified pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub slope_max: f64,
    pub partition_defect: f64,
    pub theta_min_on_unit: f64,
    pub theta_max_on_unit: f64,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CertificationError {
    #[error("certification step {0} is too coarse (need <= 1e-4)")]
    CoarseStep(f64),
    #[error("bump slope {0} exceeds the bound 2")]
    Slope(f64),
    #[error("bump is {value} at x = {x}, expected {expected}")]
    BumpPlateau { x: f64, value: f64, expected: f64 },
    #[error("bump leaves [0, 1] at x = {x} (value {value})")]
    BumpRange { x: f64, value: f64 },
    #[error("generator is negative at x = {x} (value {value})")]
    Negative { x: f64, value: f64 },
    #[error("generator support {0:?} is not inside (-1/4, 5/4)")]
    SupportDeclared((f64, f64)),
    #[error("generator is nonzero ({value}) at x = {x}, outside its support")]
    Support { x: f64, value: f64 },
    #[error("partition of unity defect {defect} at x = {x}")]
    Partition { x: f64, defect: f64 },
    #[error("generator value {value} at x = {x} leaves [1/2, 1] on the unit interval")]
    UnitRange { x: f64, value: f64 },
}

const DEFECT_TOL: f64 = 1e-12;

/// Dense-sample every invariant of `pair` at step `h_cert`.
pub fn certify(pair: &PartitionPair, h_cert: f64) -> Result<Certification, CertificationError> {
    if !(h_cert > 0.0 && h_cert <= 1e-4) {
        return Err(CertificationError::CoarseStep(h_cert));
    }
    let grid = |a: f64, b: f64| {
        let n = ((b - a) / h_cert).round() as usize;
        (0..=n).map(move |i| a + i as f64 * h_cert)
    };

    let slope_max = slope_scan(&pair.chi_bar, -3.0, 3.0, h_cert);
    if slope_max > 2.0 {
        return Err(CertificationError::Slope(slope_max));
    }
    for x in grid(-3.0, 3.0) {
        let value = pair.chi_bar.value(x);
        if !(0.0..=1.0).contains(&value) {
            return Err(CertificationError::BumpRange { x, value });
        }
        let expected = if x.abs() < 1.0 {
            Some(1.0)
        } else if x.abs() > 2.0 {
            Some(0.0)
        } else {
            None
        };
        if let Some(expected) = expected {
            if (value - expected).abs() > DEFECT_TOL {
                return Err(CertificationError::BumpPlateau { x, value, expected });
            }
        }
    }

    let (lo, hi) = pair.theta_support;
    if lo < -0.25 || hi > 1.25 || lo >= hi {
        return Err(CertificationError::SupportDeclared(pair.theta_support));
    }
    for x in grid(-1.0, 2.0) {
        let value = pair.theta.value(x);
        if value < 0.0 {
            return Err(CertificationError::Negative { x, value });
        }
        if (x <= lo || x >= hi) && value != 0.0 {
            return Err(CertificationError::Support { x, value });
        }
    }

    let mut partition_defect = 0.0_f64;
    for x in grid(-0.5, 1.5) {
        let sum: f64 = (-3..=3).map(|j| pair.theta.value(x - j as f64)).sum();
        let defect = (sum - 1.0).abs();
        if defect > DEFECT_TOL {
            return Err(CertificationError::Partition { x, defect });
        }
        partition_defect = partition_defect.max(defect);
    }

    let mut theta_min_on_unit = f64::INFINITY;
    let mut theta_max_on_unit = f64::NEG_INFINITY;
    for x in grid(0.0, 1.0) {
        let value = pair.theta.value(x);
        if !(0.5..=1.0).contains(&value) {
            return Err(CertificationError::UnitRange { x, value });
        }
        theta_min_on_unit = theta_min_on_unit.min(value);
        theta_max_on_unit = theta_max_on_unit.max(value);
    }

    Ok(Certification {
        slope_max,
        partition_defect,
        theta_min_on_unit,
        theta_max_on_unit,
    })
}
