//! Seeded sample generators that instantiate the "for all u" quantifiers.
//!
//! Random samples are band-limited sums of sinusoids, smoothly windowed into
//! a support interval (default `[-L + 4, L - 4]`). `amplitude` is the
//! maximum of `|u|`; `roughness` is the maximum of the grid derivative
//! `|u'|`. Both are met to within 10%, or generation fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::nonlin::{sawtooth, SawtoothSpec};
use crate::norms::uniform_norm;
use crate::partition::smoothstep;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    SmoothRandom,
    RoughRandom,
    /// The sawtooth of a [`SawtoothSpec`]; amplitude and roughness follow
    /// from its parameters.
    Sawtooth { eps_saw: f64, delta: f64, delta_prime: f64 },
    /// `amplitude * exp(rate |x|) * (1 + noise / 2)`.
    ExponentialGrowth { rate: f64 },
    /// Smooth samples rescaled to `uniform_norm(u) == amplitude`.
    SmallBall,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFamily {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub amplitude: f64,
    pub roughness: f64,
    pub seed: u64,
    /// Support of the random samples; `None` means `[-L + 4, L - 4]`.
    #[serde(default)]
    pub support: Option<(f64, f64)>,
}

/// Derived, reproducible RNG for sample `index` of a family.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Smooth window equal to 1 on the middle of `[a, b]` and 0 outside.
fn window(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    let ramp = ((b - a) / 4.0).min(1.0);
    move |x| smoothstep((x - a) / ramp).min(smoothstep((b - x) / ramp))
}

struct Waves {
    freqs: Vec<f64>,
    phases: Vec<f64>,
    weights: Vec<f64>,
}

impl Waves {
    fn draw(rng: &mut ChaCha8Rng, count: usize, low: f64) -> Self {
        let mut freqs = Vec::with_capacity(count);
        let mut phases = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for _ in 0..count {
            freqs.push(rng.gen_range(low..=1.0));
            phases.push(rng.gen_range(0.0..std::f64::consts::TAU));
            let w: f64 = rng.gen_range(0.5..1.0);
            weights.push(if rng.gen_bool(0.5) { w } else { -w });
        }
        Self {
            freqs,
            phases,
            weights,
        }
    }

    fn eval(&self, omega: f64, x: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.phases)
            .zip(&self.weights)
            .map(|((f, p), w)| w * (f * omega * x + p).sin())
            .sum()
    }
}

impl SampleFamily {
    pub fn new(kind: FamilyKind, amplitude: f64, roughness: f64, seed: u64) -> Self {
        Self {
            kind,
            amplitude,
            roughness,
            seed,
            support: None,
        }
    }

    pub fn with_support(mut self, a: f64, b: f64) -> Self {
        self.support = Some((a, b));
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    fn support_on(&self, grid: Grid) -> Result<(f64, f64)> {
        let l = grid.half_length() as f64;
        let (a, b) = self.support.unwrap_or((-l + 4.0, l - 4.0));
        if !(a < b) || a < -l || b > l {
            return Err(Error::Config(format!(
                "sample support [{a}, {b}] does not fit the domain [-{l}, {l}]"
            )));
        }
        Ok((a, b))
    }

    /// Sample number `index`.
    pub fn generate(&self, grid: Grid, index: u64) -> Result<GridFunction> {
        let mut rng = sample_rng(self.seed, index);
        match self.kind {
            FamilyKind::SmoothRandom => self.band_limited(grid, &mut rng, 4, 0.25),
            FamilyKind::RoughRandom => self.band_limited(grid, &mut rng, 8, 0.5),
            FamilyKind::SmallBall => {
                let u = self.band_limited(grid, &mut rng, 4, 0.25)?;
                let n = uniform_norm(&u);
                Ok(u.scale(self.amplitude / n))
            }
            FamilyKind::ExponentialGrowth { rate } => {
                let waves = Waves::draw(&mut rng, 3, 0.25);
                let a = self.amplitude;
                Ok(GridFunction::sample_scalar(grid, |x| {
                    a * (rate * x.abs()).exp() * (1.0 + 0.5 * waves.eval(1.0, x) / 3.0)
                }))
            }
            FamilyKind::Sawtooth {
                eps_saw,
                delta,
                delta_prime,
            } => {
                let spec = SawtoothSpec::new(eps_saw, delta, delta_prime)?;
                Ok(sawtooth(&spec, grid)?.0)
            }
        }
    }

    fn band_limited(&self, grid: Grid, rng: &mut ChaCha8Rng, count: usize, low: f64) -> Result<GridFunction> {
        let (a, b) = self.support_on(grid)?;
        let win = window(a, b);
        let waves = Waves::draw(rng, count, low);
        let amp = self.amplitude;
        let target = self.roughness;
        if !(amp > 0.0 && target > 0.0) {
            return Err(Error::Config("amplitude and roughness must be positive".into()));
        }
        let nyquist_safe = std::f64::consts::PI / (4.0 * grid.h());
        let build = |omega: f64| {
            let raw = GridFunction::sample_scalar(grid, |x| win(x) * waves.eval(omega, x));
            let peak = raw.max_abs();
            raw.scale(amp / peak)
        };
        let rough = |omega: f64| {
            let u = build(omega);
            (u.derivative().max_abs(), u)
        };
        // bracket a crossing of the target, then bisect on the frequency scale
        let mut hi = (target / amp).min(nyquist_safe);
        let (mut d_hi, mut u) = rough(hi);
        while d_hi < target && hi < nyquist_safe {
            hi = (hi * 1.5).min(nyquist_safe);
            (d_hi, u) = rough(hi);
        }
        let mut lo = hi / 1.5;
        let mut d_lo = rough(lo).0;
        while d_lo > target && lo > 1e-3 {
            lo /= 1.5;
            d_lo = rough(lo).0;
        }
        if d_lo <= target && target <= d_hi {
            for _ in 0..60 {
                if (d_hi - target).abs() <= 0.01 * target {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let (d_mid, u_mid) = rough(mid);
                if d_mid < target {
                    lo = mid;
                } else {
                    hi = mid;
                    d_hi = d_mid;
                    u = u_mid;
                }
            }
        }
        let d = u.derivative().max_abs();
        if (d - target).abs() > 0.1 * target {
            return Err(Error::Config(format!(
                "roughness {target} at amplitude {amp} is not reachable on h = {} (got {d})",
                grid.h()
            )));
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed_and_index() {
        let g = Grid::new(8, 64).unwrap();
        let f = SampleFamily::new(FamilyKind::RoughRandom, 0.5, 10.0, 7);
        assert_eq!(f.generate(g, 3).unwrap(), f.generate(g, 3).unwrap());
        assert_ne!(f.generate(g, 3).unwrap(), f.generate(g, 4).unwrap());
    }

    #[test]
    fn declared_scales_are_respected() {
        let g = Grid::new(8, 256).unwrap();
        for (kind, amp, rough) in [
            (FamilyKind::SmoothRandom, 1.0, 3.0),
            (FamilyKind::RoughRandom, 0.2, 20.0),
            (FamilyKind::RoughRandom, 2.0, 150.0),
        ] {
            let f = SampleFamily::new(kind, amp, rough, 11);
            for i in 0..5 {
                let u = f.generate(g, i).unwrap();
                assert!((u.max_abs() - amp).abs() <= 1e-12 * amp);
                let d = u.derivative().max_abs();
                assert!((d - rough).abs() <= 0.1 * rough, "{kind:?} {d}");
            }
        }
    }

    #[test]
    fn samples_live_in_the_support() {
        let g = Grid::new(8, 64).unwrap();
        let u = SampleFamily::new(FamilyKind::SmoothRandom, 1.0, 2.0, 1)
            .generate(g, 0)
            .unwrap();
        for i in 0..g.len() {
            if g.x(i).abs() >= 4.0 {
                assert_eq!(u.value(i, 0), 0.0);
            }
        }
    }

    #[test]
    fn small_ball_hits_target_norm() {
        let g = Grid::new(8, 64).unwrap();
        let f = SampleFamily::new(FamilyKind::SmallBall, 0.3, 2.0, 5);
        let u = f.generate(g, 0).unwrap();
        assert!((uniform_norm(&u) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn unreachable_roughness_is_an_error() {
        let g = Grid::new(8, 16).unwrap();
        let f = SampleFamily::new(FamilyKind::RoughRandom, 0.01, 1000.0, 5);
        assert!(f.generate(g, 0).is_err());
    }

    #[test]
    fn family_round_trips_through_json() {
        let f = SampleFamily::new(FamilyKind::ExponentialGrowth { rate: 0.25 }, 0.1, 1.0, 9);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"kind\":\"exponential-growth\""));
        let back: SampleFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
