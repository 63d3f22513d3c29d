//! The five verification suites. Each sample is a pure function of
//! `(config, seed, index)`; results are collected in index order, so the
//! worker pool never changes a report.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::{Config, Suite};
use super::families::{sample_rng, FamilyKind, SampleFamily};
use super::report::{digest, fit_loglog, Basis, Case, Check, ExperimentReport, Table};
use super::svg::{LogLogPlot, Series};
use crate::cutoff::{apply_cutoff, derivative_candidate, rho_field, ChiOne, CutoffConfig};
use crate::error::Result;
use crate::grid::{Grid, GridFunction};
use crate::nonlin::{
    f_eps, local_lipschitz_ratio, lipschitz_ratio, pointwise_cutoff_g, quadratic, sawtooth, PointwiseCutoffSpec,
    SawtoothSpec,
};
use crate::norms::{uniform_norm, weight_sum_sqrt, weighted_norm, WeightedNormSpec};
use crate::partition::{certify, PartitionPair};

/// Step of the dense partition certification.
pub const CERTIFY_STEP: f64 = 1e-4;

pub struct SuiteOutput {
    pub report: ExperimentReport,
    pub table: Table,
    pub plot: Option<(String, LogLogPlot)>,
}

pub fn run_suite(suite: Suite, cfg: &Config) -> Result<SuiteOutput> {
    let start = Instant::now();
    let mut out = match suite {
        Suite::Certify => suite_certify(cfg),
        Suite::Lemma => suite_lemma_properties(cfg),
        Suite::H2 => suite_h2_scaling(cfg),
        Suite::Sawtooth => suite_sawtooth_contrast(cfg),
        Suite::Derivative => suite_derivative(cfg),
    }?;
    out.report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Independent seed for the experiment named `label`.
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let bytes = h.finalize();
    u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"))
}

/// Digest of the experiment-defining part of `cfg`; the output location
/// is not part of it.
pub fn config_digest(cfg: &Config) -> String {
    let mut c = cfg.clone();
    c.out_dir = Default::default();
    digest(&c)
}

fn new_report(suite: Suite, cfg: &Config) -> ExperimentReport {
    ExperimentReport::new(suite.name(), cfg.seed, config_digest(cfg))
}

fn finish(report: ExperimentReport) -> SuiteOutput {
    let table = Table::from_cases(&report.cases);
    SuiteOutput {
        report,
        table,
        plot: None,
    }
}

fn norm_spec(eta: f64) -> Result<WeightedNormSpec> {
    WeightedNormSpec::new(eta)
}

/// Rescale `u` so that `uniform_norm(u) == target`.
fn with_uniform_norm(u: &GridFunction, target: f64) -> GridFunction {
    let n = uniform_norm(u);
    if n == 0.0 {
        u.clone()
    } else {
        u.scale(target / n)
    }
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        (rng.gen_range(lo.ln()..hi.ln())).exp()
    }
}

/// Family `i % len` of `pool`, reseeded for the experiment `label`.
fn pick(pool: &[SampleFamily], seed: u64, label: &str, i: usize) -> SampleFamily {
    let fam = pool[i % pool.len()];
    SampleFamily {
        seed: sub_seed(seed ^ fam.seed, label),
        ..fam
    }
}

fn certified_pair() -> Result<PartitionPair> {
    let pair = PartitionPair::standard();
    certify(&pair, CERTIFY_STEP)?;
    Ok(pair)
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------- certify

pub fn suite_certify(cfg: &Config) -> Result<SuiteOutput> {
    let mut report = new_report(Suite::Certify, cfg);
    let pair = PartitionPair::standard();
    let points = (2.0 / CERTIFY_STEP).round() as usize + 1;
    let d = digest(&("standard-pair", CERTIFY_STEP));
    report.count("certification points", points);
    match certify(&pair, CERTIFY_STEP) {
        Ok(c) => {
            report.push(
                Case::new("partition-defect", d.clone())
                    .value("defect", c.partition_defect)
                    .value("points", points as f64)
                    .check(Check::at_most("defect", 1e-12, Basis::Analytic)),
            );
            report.push(
                Case::new("chi-bar-slope", d.clone())
                    .value("slope_max", c.slope_max)
                    .check(Check::near("slope_max", 1.875, 1e-6, Basis::Analytic)),
            );
            report.push(
                Case::new("chi-bar-slope-bound", d.clone())
                    .value("slope_max", c.slope_max)
                    .check(Check::at_most("slope_max", 2.0, Basis::Theorem)),
            );
            report.push(
                Case::new("theta-min-on-unit", d.clone())
                    .value("theta_min", c.theta_min_on_unit)
                    .check(Check::at_least("theta_min", 0.5, Basis::Theorem)),
            );
            report.push(
                Case::new("theta-max-on-unit", d)
                    .value("theta_max", c.theta_max_on_unit)
                    .check(Check::at_most("theta_max", 1.0, Basis::Theorem)),
            );
        }
        Err(e) => {
            let mut case = Case::new("certification", d).note(e.to_string());
            case.pass = false;
            report.push(case);
        }
    }
    Ok(finish(report))
}

// ---------------------------------------------------------------- lemma

pub fn suite_lemma_properties(cfg: &Config) -> Result<SuiteOutput> {
    let mut report = new_report(Suite::Lemma, cfg);
    let pair = certified_pair()?;
    well_definedness(cfg, &pair, &mut report)?;
    equivariance(cfg, &pair, &mut report)?;
    small_ball(cfg, &pair, &mut report)?;
    uniform_bound(cfg, &pair, &mut report)?;
    lipschitz_sampling(cfg, &pair, &mut report)?;
    roughness_scaling(cfg, &pair, &mut report)?;
    Ok(finish(report))
}

/// χ of `e^{η|x|/2}` has a weighted norm that settles as L grows; its
/// square does not.
fn well_definedness(cfg: &Config, pair: &PartitionPair, report: &mut ExperimentReport) -> Result<()> {
    let cut = CutoffConfig::new(pair.clone(), 1.0)?;
    let spec = norm_spec(cfg.eta)?;
    let lengths = [8usize, 16, 32];
    let rate = cfg.eta / 2.0;
    let mut chi = Vec::new();
    let mut square = Vec::new();
    for &l in &lengths {
        let grid = Grid::from_spacing(l as f64, cfg.h)?;
        let u = GridFunction::sample_scalar(grid, |x| (rate * x.abs()).exp());
        chi.push(weighted_norm(&apply_cutoff(&u, &cut)?, spec));
        square.push(weighted_norm(&quadratic(&u), spec));
    }
    report.count("well-definedness domains", lengths.len());
    // Beyond L = 16 the uniform bound 8 caps every unit-window contribution.
    let tail: f64 = (16..32).map(|j| 2.0 * spec.weight(j)).sum::<f64>().sqrt() * 8.0;
    let d = digest(&("exp-growth", rate, cfg.h, lengths));
    report.push(
        Case::new("well-defined/chi-converges", d.clone())
            .value("chi_L8", chi[0])
            .value("chi_L16", chi[1])
            .value("chi_L32", chi[2])
            .value("change_16_to_32", (chi[2] - chi[1]).abs())
            .check(Check::at_most("change_16_to_32", tail, Basis::Theorem)),
    );
    report.push(
        Case::new("well-defined/square-diverges", d)
            .value("square_L8", square[0])
            .value("square_L16", square[1])
            .value("square_L32", square[2])
            .value("growth_16_to_32", square[2] / square[1])
            .check(Check::at_least("growth_16_to_32", 1.35, Basis::Analytic))
            .note("each unit window contributes O(1), so the norm grows like sqrt(L)"),
    );

    // Random exponentially growing samples at the configured L.
    let grid = cfg.grid()?;
    let n = 5;
    let fam = SampleFamily::new(
        FamilyKind::ExponentialGrowth { rate },
        1.0,
        1.0,
        sub_seed(cfg.seed, "well-defined"),
    );
    let norms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let u = fam.generate(grid, i as u64)?;
            Ok(weighted_norm(&apply_cutoff(&u, &cut)?, spec))
        })
        .collect::<Result<_>>()?;
    report.count("well-definedness samples", n);
    report.push(
        Case::new("well-defined/random-growth", digest(&(fam, n)))
            .value("max_weighted_norm", max_of(norms.iter().copied()))
            .value("bound", 8.0 * weight_sum_sqrt(grid, spec))
            .check(Check::at_most(
                "max_weighted_norm",
                8.0 * weight_sum_sqrt(grid, spec),
                Basis::Theorem,
            )),
    );
    Ok(())
}

fn lemma_cutoffs(cfg: &Config, pair: &PartitionPair) -> Result<Vec<CutoffConfig>> {
    cfg.lemma_epsilon_list
        .iter()
        .map(|&e| CutoffConfig::new(pair.clone(), e))
        .collect()
}

fn equivariance(cfg: &Config, pair: &PartitionPair, report: &mut ExperimentReport) -> Result<()> {
    let grid = cfg.grid()?;
    let spec = norm_spec(cfg.eta)?;
    let cuts = lemma_cutoffs(cfg, pair)?;
    let shifts = [1i64, 17, 256];
    let n = cfg.samples.equivariance;
    let seed = sub_seed(cfg.seed, "equivariance");
    let l = grid.half_length() as f64;
    let reach = shifts.iter().max().copied().unwrap_or(0) as f64 * grid.h();
    let errs: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let cut = &cuts[i % cuts.len()];
            let fam = pick(&cfg.families, seed, "equivariance", i).with_support(-l + 4.0, l - 4.0 - reach);
            let target = cut.epsilon * log_uniform(&mut rng, 0.1, 10.0);
            let u = with_uniform_norm(&fam.generate(grid, i as u64)?, target);
            let chi_u = apply_cutoff(&u, cut)?;
            let mut out = [0.0; 3];
            for (slot, &k) in out.iter_mut().zip(&shifts) {
                let lhs = chi_u.translate(k)?;
                let rhs = apply_cutoff(&u.translate(k)?, cut)?;
                let scale = weighted_norm(&rhs, spec).max(f64::MIN_POSITIVE);
                *slot = weighted_norm(&lhs.sub(&rhs)?, spec) / scale;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    report.count("equivariance samples", n);
    for (s, &k) in shifts.iter().enumerate() {
        report.push(
            Case::new(format!("equivariance/shift-{k}"), digest(&(seed, n, k)))
                .value("max_relative_discrepancy", max_of(errs.iter().map(|e| e[s])))
                .check(Check::at_most("max_relative_discrepancy", 1e-8, Basis::Theorem)),
        );
    }
    Ok(())
}

fn small_ball(cfg: &Config, pair: &PartitionPair, report: &mut ExperimentReport) -> Result<()> {
    let grid = cfg.grid()?;
    let n = cfg.samples.small_ball;
    for cut in lemma_cutoffs(cfg, pair)? {
        let eps = cut.epsilon;
        let seed = sub_seed(cfg.seed, &format!("small-ball/{eps}"));
        let rows: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, i as u64);
                let scale = if i == 0 { 1.0 } else { log_uniform(&mut rng, 0.01, 1.0) };
                let base = pick(&cfg.families, seed, "small-ball", i);
                let amplitude = 0.3 * eps * scale;
                let fam = SampleFamily {
                    kind: FamilyKind::SmallBall,
                    amplitude,
                    roughness: base.roughness / base.amplitude * amplitude,
                    ..base
                };
                let u = fam.generate(grid, i as u64)?;
                let defect = apply_cutoff(&u, &cut)?.sub(&u)?.max_abs();
                Ok((uniform_norm(&u) / eps, defect))
            })
            .collect::<Result<_>>()?;
        report.count("small-ball samples", n);
        report.push(
            Case::new(format!("small-ball/eps-{eps}"), digest(&(seed, n, eps)))
                .value("max_norm_over_eps", max_of(rows.iter().map(|r| r.0)))
                .value("max_pointwise_defect", max_of(rows.iter().map(|r| r.1)))
                .check(Check::at_most("max_pointwise_defect", 1e-10, Basis::Theorem)),
        );
    }
    Ok(())
}

fn uniform_bound(cfg: &Config, pair: &PartitionPair, report: &mut ExperimentReport) -> Result<()> {
    let grid = cfg.grid()?;
    let n = cfg.samples.uniform_bound;
    let mut pool = cfg.families.clone();
    pool.push(SampleFamily::new(
        FamilyKind::ExponentialGrowth { rate: cfg.eta / 2.0 },
        1.0,
        1.0,
        3,
    ));
    for cut in lemma_cutoffs(cfg, pair)? {
        let eps = cut.epsilon;
        let seed = sub_seed(cfg.seed, &format!("uniform-bound/{eps}"));
        let ratios: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = sample_rng(seed, i as u64);
                let target = eps * log_uniform(&mut rng, 1.0, 100.0);
                let fam = pick(&pool, seed, "uniform-bound", i);
                let u = with_uniform_norm(&fam.generate(grid, i as u64)?, target);
                Ok(uniform_norm(&apply_cutoff(&u, &cut)?) / eps)
            })
            .collect::<Result<_>>()?;
        report.count("uniform-bound samples", n);
        let violations = ratios.iter().filter(|&&r| r > 8.0).count();
        report.push(
            Case::new(format!("uniform-bound/eps-{eps}"), digest(&(seed, n, eps)))
                .value("max_norm_over_eps", max_of(ratios.iter().copied()))
                .value("violations", violations as f64)
                .check(Check::at_most("max_norm_over_eps", 8.0, Basis::Theorem)),
        );
    }
    Ok(())
}

fn lipschitz_pair(
    fam: SampleFamily,
    grid: Grid,
    i: usize,
    target: f64,
    rel: f64,
    seed: u64,
) -> Result<(GridFunction, GridFunction)> {
    let u = with_uniform_norm(&fam.generate(grid, i as u64)?, target);
    let p = SampleFamily {
        kind: FamilyKind::SmoothRandom,
        amplitude: 1.0,
        roughness: 4.0,
        seed,
        ..fam
    }
    .generate(grid, i as u64)?;
    let v = u.add(&with_uniform_norm(&p, target * rel))?;
    Ok((u, v))
}

/// Sampled Lipschitz ratios of χ on the configured grid; reported only.
fn lipschitz_sampling(cfg: &Config, pair: &PartitionPair, report: &mut ExperimentReport) -> Result<()> {
    let grid = cfg.grid()?;
    let cut = CutoffConfig::new(pair.clone(), 1.0)?;
    let n = cfg.samples.lipschitz;
    let seed = sub_seed(cfg.seed, "lipschitz");
    let ratios: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let target = log_uniform(&mut rng, 0.1, 10.0);
            let rel = log_uniform(&mut rng, 1e-3, 1.0);
            let fam = pick(&cfg.families, seed, "lipschitz", i);
            let (u, v) = lipschitz_pair(fam, grid, i, target, rel, seed ^ 1)?;
            lipschitz_ratio(|w| apply_cutoff(w, &cut), &u, &v, cfg.eta)
        })
        .collect::<Result<_>>()?;
    report.count("lipschitz pairs", n);
    report.push(
        Case::new("lipschitz/sampled-max", digest(&(seed, n)))
            .value("max_ratio", max_of(ratios.iter().copied()))
            .value("pairs", n as f64)
            .note("sampled maximum over the census, not a supremum"),
    );
    Ok(())
}

/// Maximum sampled ratios of χ and of the pointwise cutoff g for one
/// roughness envelope `r` on the fine roughness grid.
pub fn roughness_maxima(cfg: &Config, pair: &PartitionPair, r: f64) -> Result<(f64, f64)> {
    let rc = &cfg.roughness;
    let grid = Grid::from_spacing(rc.half_length as f64, rc.h)?;
    let cut = CutoffConfig::new(pair.clone(), 1.0)?;
    let g = PointwiseCutoffSpec::new(rc.delta_g)?;
    let n = cfg.samples.lipschitz;
    let seed = sub_seed(cfg.seed, &format!("roughness/{r}"));
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let amp = log_uniform(&mut rng, rc.amplitude.0, rc.amplitude.1);
            let rel = log_uniform(&mut rng, 1e-3, 1e-1);
            let u = SampleFamily::new(FamilyKind::RoughRandom, amp, r, seed)
                .with_support(rc.support.0, rc.support.1)
                .generate(grid, i as u64)?;
            let pa = amp * rel;
            let p = SampleFamily::new(FamilyKind::SmoothRandom, pa, 4.0 * pa, seed ^ 1)
                .with_support(rc.support.0, rc.support.1)
                .generate(grid, i as u64)?;
            let v = u.add(&p)?;
            let chi = lipschitz_ratio(|w| apply_cutoff(w, &cut), &u, &v, cfg.eta)?;
            let gr = lipschitz_ratio(|w| Ok(pointwise_cutoff_g(w, &g)), &u, &v, cfg.eta)?;
            Ok((chi, gr))
        })
        .collect::<Result<_>>()?;
    Ok((max_of(rows.iter().map(|r| r.0)), max_of(rows.iter().map(|r| r.1))))
}

fn roughness_scaling(cfg: &Config, pair: &PartitionPair, report: &mut ExperimentReport) -> Result<()> {
    let envelopes = &cfg.roughness.envelopes;
    let maxima: Vec<(f64, f64)> = envelopes
        .iter()
        .map(|&r| roughness_maxima(cfg, pair, r))
        .collect::<Result<_>>()?;
    report.count("roughness pairs", envelopes.len() * cfg.samples.lipschitz);
    for (&r, &(chi, g)) in envelopes.iter().zip(&maxima) {
        report.push(
            Case::new(format!("roughness/envelope-{r}"), digest(&(cfg.seed, &cfg.roughness, r)))
                .value("max_ratio_chi", chi)
                .value("max_ratio_g", g),
        );
    }
    let (lo, hi) = (
        maxima.first().copied().unwrap_or((f64::NAN, f64::NAN)),
        maxima.last().copied().unwrap_or((f64::NAN, f64::NAN)),
    );
    let d = digest(&(cfg.seed, &cfg.roughness));
    report.push(
        Case::new("roughness/chi-growth", d.clone())
            .value("growth", hi.0 / lo.0)
            .check(Check::at_most("growth", 2.0, Basis::Theorem))
            .note("max ratio at the largest envelope over the max at the smallest"),
    );
    report.push(
        Case::new("roughness/g-growth", d)
            .value("growth", hi.1 / lo.1)
            .check(Check::at_least("growth", 50.0, Basis::Analytic)),
    );
    Ok(())
}

// ---------------------------------------------------------------- H2 scaling

pub struct ScalingPoint {
    pub epsilon: f64,
    pub delta0: f64,
    pub delta1: f64,
}

/// Sampled `δ₀(ε)` and `δ₁(ε)` for one scale.
pub fn h2_point(cfg: &Config, pair: &PartitionPair, eps: f64) -> Result<ScalingPoint> {
    let grid = cfg.grid()?;
    let spec = norm_spec(cfg.eta)?;
    let cut = CutoffConfig::new(pair.clone(), eps)?;
    let n = cfg.samples.h2_per_eps;
    let seed = sub_seed(cfg.seed, &format!("h2/{eps}"));
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            // amplitudes straddle the cut-off scale, where the maxima live
            let target = eps * log_uniform(&mut rng, 0.1, 10.0);
            let rel = log_uniform(&mut rng, 1e-3, 1.0);
            let fam = pick(&cfg.families, seed, "h2", i);
            let (u, v) = lipschitz_pair(fam, grid, i, target, rel, seed ^ 1)?;
            let d0 = weighted_norm(&f_eps(&u, &cut)?, spec);
            let d1 = lipschitz_ratio(|w| f_eps(w, &cut), &u, &v, cfg.eta)?;
            Ok((d0, d1))
        })
        .collect::<Result<_>>()?;
    Ok(ScalingPoint {
        epsilon: eps,
        delta0: max_of(rows.iter().map(|r| r.0)),
        delta1: max_of(rows.iter().map(|r| r.1)),
    })
}

pub fn suite_h2_scaling(cfg: &Config) -> Result<SuiteOutput> {
    let mut report = new_report(Suite::H2, cfg);
    let pair = certified_pair()?;
    let grid = cfg.grid()?;
    let spec = norm_spec(cfg.eta)?;
    let points: Vec<ScalingPoint> = cfg
        .epsilon_list
        .iter()
        .map(|&e| h2_point(cfg, &pair, e))
        .collect::<Result<_>>()?;
    report.count("h2 samples", points.len() * cfg.samples.h2_per_eps);

    // |F^ε(u)| is bounded through |χ_ε(u)|_u <= 8ε and the weight sum.
    let c1 = 8.0 * weight_sum_sqrt(grid, spec);
    let mut table = Table::new(&[
        "epsilon",
        "delta0",
        "delta1",
        "delta0_over_eps2",
        "delta1_over_eps",
        "samples",
    ]);
    for p in &points {
        table.push(vec![
            p.epsilon.into(),
            p.delta0.into(),
            p.delta1.into(),
            (p.delta0 / p.epsilon.powi(2)).into(),
            (p.delta1 / p.epsilon).into(),
            (cfg.samples.h2_per_eps as f64).into(),
        ]);
        report.push(
            Case::new(format!("h2/consistency-eps-{}", p.epsilon), digest(&(cfg.seed, p.epsilon)))
                .value("delta0", p.delta0)
                .value("delta1", p.delta1)
                .value("c1", c1)
                .value("margin", p.delta0 / (p.delta1 * c1 * p.epsilon))
                .check(Check::at_most("margin", 1.0, Basis::Analytic))
                .note("delta0 <= delta1 * C1 * eps"),
        );
    }
    let eps: Vec<f64> = points.iter().map(|p| p.epsilon).collect();
    let d0: Vec<f64> = points.iter().map(|p| p.delta0).collect();
    let d1: Vec<f64> = points.iter().map(|p| p.delta1).collect();
    let f0 = fit_loglog("delta0", &eps, &d0);
    let f1 = fit_loglog("delta1", &eps, &d1);
    let d = digest(&(cfg.seed, &cfg.epsilon_list, &cfg.families));
    for (f, target, tol) in [(&f0, 2.0, 0.1), (&f1, 1.0, 0.2)] {
        report.push(
            Case::new(format!("h2/{}-exponent", f.quantity), d.clone())
                .value("exponent", f.exponent)
                .value("r_squared", f.r_squared)
                .check(Check::near("exponent", target, tol, Basis::Theorem)),
        );
        report.push(
            Case::new(format!("h2/{}-fit-quality", f.quantity), d.clone())
                .value("r_squared", f.r_squared)
                .check(Check::at_least("r_squared", 0.98, Basis::Empirical)),
        );
    }
    let plot = LogLogPlot {
        title: "Sampled H2 constants".into(),
        x_label: "epsilon".into(),
        y_label: "sampled maximum".into(),
        series: vec![
            Series::new("delta0", eps.clone(), d0).with_fit(f0.exponent, f0.intercept),
            Series::new("delta1", eps, d1).with_fit(f1.exponent, f1.intercept),
        ],
    };
    report.fitted_slopes = vec![f0, f1];
    Ok(SuiteOutput {
        report,
        table,
        plot: Some(("h2_scaling.svg".into(), plot)),
    })
}

// ---------------------------------------------------------------- sawtooth

pub struct SawtoothRow {
    pub eps_saw: f64,
    /// Ratios on the plateau window, where `v - u` is the constant δ'.
    pub ratio_g: f64,
    pub ratio_f_eps: f64,
    /// Ratios in the weighted norm over the whole domain.
    pub ratio_g_weighted: f64,
    pub ratio_f_eps_weighted: f64,
}

/// Points per tooth of the sawtooth grids: `h = δ eps_saw / 32`.
pub const SAWTOOTH_RESOLUTION: usize = 32;

pub fn sawtooth_row(spec: &SawtoothSpec, cut: &CutoffConfig, eta: f64) -> Result<SawtoothRow> {
    let grid = spec.grid(2, SAWTOOTH_RESOLUTION)?;
    let (u, v) = sawtooth(spec, grid)?;
    let window = spec.plateau_window(grid)?;
    let g = PointwiseCutoffSpec::new(spec.delta)?;
    let gf = |w: &GridFunction| Ok(pointwise_cutoff_g(w, &g));
    let ff = |w: &GridFunction| f_eps(w, cut);
    Ok(SawtoothRow {
        eps_saw: spec.eps_saw,
        ratio_g: local_lipschitz_ratio(gf, &u, &v, &window)?,
        ratio_f_eps: local_lipschitz_ratio(ff, &u, &v, &window)?,
        ratio_g_weighted: lipschitz_ratio(gf, &u, &v, eta)?,
        ratio_f_eps_weighted: lipschitz_ratio(ff, &u, &v, eta)?,
    })
}

pub fn suite_sawtooth_contrast(cfg: &Config) -> Result<SuiteOutput> {
    let mut report = new_report(Suite::Sawtooth, cfg);
    let pair = certified_pair()?;
    let cut = CutoffConfig::new(pair, 1.0)?;
    let specs: Vec<SawtoothSpec> = cfg
        .eps_saw
        .iter()
        .map(|&e| SawtoothSpec::new(e, cfg.delta, cfg.delta_prime))
        .collect::<Result<_>>()?;
    let rows: Vec<SawtoothRow> = specs
        .par_iter()
        .map(|s| sawtooth_row(s, &cut, cfg.eta))
        .collect::<Result<_>>()?;
    report.count("sawtooth pairs", rows.len());

    let mut table = Table::new(&[
        "eps_saw",
        "ratio_g",
        "ratio_f_eps",
        "ratio_g_weighted",
        "ratio_f_eps_weighted",
        "bound_g",
    ]);
    for r in &rows {
        let bound = 1.9 / r.eps_saw;
        table.push(vec![
            r.eps_saw.into(),
            r.ratio_g.into(),
            r.ratio_f_eps.into(),
            r.ratio_g_weighted.into(),
            r.ratio_f_eps_weighted.into(),
            bound.into(),
        ]);
        let d = digest(&(r.eps_saw, cfg.delta, cfg.delta_prime, SAWTOOTH_RESOLUTION));
        report.push(
            Case::new(format!("sawtooth/g-eps-saw-{}", r.eps_saw), d.clone())
                .value("ratio_g", r.ratio_g)
                .value("ratio_g_weighted", r.ratio_g_weighted)
                .value("ratio_g_times_eps_saw", r.ratio_g * r.eps_saw)
                .check(Check::at_least("ratio_g", bound, Basis::Theorem)),
        );
        report.push(
            Case::new(format!("sawtooth/f-eps-saw-{}", r.eps_saw), d)
                .value("ratio_f_eps", r.ratio_f_eps)
                .value("ratio_f_eps_weighted", r.ratio_f_eps_weighted),
        );
    }
    if let Some(reference) = rows.iter().max_by(|a, b| a.eps_saw.total_cmp(&b.eps_saw)) {
        let fs = rows.iter().map(|r| r.ratio_f_eps);
        let d = digest(&(&cfg.eps_saw, cfg.delta, cfg.delta_prime));
        report.push(
            Case::new("sawtooth/f-eps-bounded", d.clone())
                .value("max_over_reference", max_of(fs.clone()) / reference.ratio_f_eps)
                .check(Check::at_most("max_over_reference", 2.0, Basis::Theorem))
                .note("no roughness blow-up: every f_eps ratio stays within 2x of the coarsest sawtooth"),
        );
        report.push(
            Case::new("sawtooth/f-eps-spread", d)
                .value("max_over_min", max_of(fs.clone()) / min_of(fs))
                .note("two-sided spread; the f_eps ratio decays as the teeth sharpen"),
        );
    }
    let inv: Vec<f64> = rows.iter().map(|r| 1.0 / r.eps_saw).collect();
    let plot = LogLogPlot {
        title: "Sawtooth contrast".into(),
        x_label: "1 / eps_saw".into(),
        y_label: "Lipschitz ratio on the plateau".into(),
        series: vec![
            Series::new("g", inv.clone(), rows.iter().map(|r| r.ratio_g).collect()),
            Series::new("f_eps", inv.clone(), rows.iter().map(|r| r.ratio_f_eps).collect()),
            Series::new("1.9 / eps_saw", inv.clone(), inv.iter().map(|x| 1.9 * x).collect()).dashed(),
        ],
    };
    Ok(SuiteOutput {
        report,
        table,
        plot: Some(("sawtooth.svg".into(), plot)),
    })
}

// ---------------------------------------------------------------- derivative

/// `[r(τ)/τ for τ in taus]` with `r(τ) = |F(u+τv) - F(u) - τ L(u)v|_{-η}`.
pub fn gateaux_remainders(
    u: &GridFunction,
    v: &GridFunction,
    cut: &CutoffConfig,
    eta: f64,
    taus: &[f64],
) -> Result<Vec<f64>> {
    let spec = norm_spec(eta)?;
    let fu = f_eps(u, cut)?;
    let lv = derivative_candidate(u, v, cut)?;
    taus.iter()
        .map(|&t| {
            let fp = f_eps(&u.axpy(t, v)?, cut)?;
            Ok(weighted_norm(&fp.sub(&fu)?.sub(&lv.scale(t))?, spec) / t)
        })
        .collect()
}

pub const GATEAUX_STEPS: [f64; 3] = [1e-1, 1e-2, 1e-3];

pub fn suite_derivative(cfg: &Config) -> Result<SuiteOutput> {
    let mut report = new_report(Suite::Derivative, cfg);
    let pair = certified_pair()?;
    let cut = CutoffConfig::new(pair, 1.0)?;
    let grid = cfg.grid()?;
    let spec = norm_spec(cfg.eta)?;
    let l = grid.half_length() as f64;

    // L(0) = 0
    let seed = sub_seed(cfg.seed, "derivative/zero");
    let zero = GridFunction::zeros(grid, 1);
    let n_zero = 10;
    let defects: Vec<f64> = (0..n_zero)
        .into_par_iter()
        .map(|i| {
            let v = with_uniform_norm(&pick(&cfg.families, seed, "zero", i).generate(grid, i as u64)?, 1.0);
            Ok(weighted_norm(&derivative_candidate(&zero, &v, &cut)?, spec))
        })
        .collect::<Result<_>>()?;
    report.count("L(0) directions", n_zero);
    report.push(
        Case::new("derivative/L-at-zero", digest(&(seed, n_zero)))
            .value("max_norm", max_of(defects))
            .check(Check::at_most("max_norm", 1e-12, Basis::Theorem)),
    );

    // Gateaux remainders, alternating inactive and active cut-off.
    let seed = sub_seed(cfg.seed, "derivative/gateaux");
    let n = cfg.samples.derivative_pairs;
    let rows: Vec<(bool, f64, Vec<f64>, String)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let active = i % 2 == 1;
            let target = if active {
                log_uniform(&mut rng, 0.5, 5.0)
            } else {
                log_uniform(&mut rng, 0.03, 0.25)
            };
            let u = with_uniform_norm(&pick(&cfg.families, seed, "u", i).generate(grid, i as u64)?, target);
            let v = with_uniform_norm(&pick(&cfg.families, seed, "v", i + 1).generate(grid, i as u64)?, 1.0);
            let rho = rho_field(&u, &cut)?.max();
            let r = gateaux_remainders(&u, &v, &cut, cfg.eta, &GATEAUX_STEPS)?;
            Ok((active, rho, r, digest(&(seed, i, target))))
        })
        .collect::<Result<_>>()?;
    report.count("gateaux pairs", n);
    for (i, (active, rho, r, d)) in rows.into_iter().enumerate() {
        let ratio = if r[0] == 0.0 { 0.0 } else { r[2] / r[0] };
        report.push(
            Case::new(format!("gateaux/pair-{i}"), d)
                .value("rho_max", rho)
                .value("r_over_tau_1e-1", r[0])
                .value("r_over_tau_1e-2", r[1])
                .value("r_over_tau_1e-3", r[2])
                .value("decay", ratio)
                .check(Check::at_most("decay", 0.1, Basis::Empirical))
                .note(if active { "active cut-off" } else { "inactive cut-off" }),
        );
    }

    operator_bound(cfg, &cut, grid, &mut report)?;

    // Continuity of u -> L(u)v along shrinking perturbations in H¹_{-ζ}.
    let zspec = norm_spec(cfg.zeta)?;
    let seed = sub_seed(cfg.seed, "derivative/continuity");
    let steps = [1e-1, 1e-2, 1e-3, 1e-4];
    for (k, fam) in cfg.families.iter().enumerate() {
        let fam = SampleFamily {
            seed: sub_seed(seed ^ fam.seed, "u"),
            ..*fam
        };
        let u = with_uniform_norm(&fam.generate(grid, k as u64)?, 1.5);
        let p = with_uniform_norm(
            &SampleFamily::new(FamilyKind::SmoothRandom, 1.0, 4.0, seed).generate(grid, k as u64)?,
            1.0,
        );
        let v = with_uniform_norm(
            &SampleFamily::new(FamilyKind::RoughRandom, 1.0, 20.0, seed ^ 1)
                .with_support(-l + 4.0, l - 4.0)
                .generate(grid, k as u64)?,
            1.0,
        );
        let lv = derivative_candidate(&u, &v, &cut)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &s in &steps {
            let u2 = u.axpy(s, &p)?;
            xs.push(weighted_norm(&p.scale(s), zspec));
            ys.push(weighted_norm(&lv.sub(&derivative_candidate(&u2, &v, &cut)?)?, spec));
        }
        let fit = fit_loglog(&format!("continuity-{k}"), &xs, &ys);
        report.push(
            Case::new(format!("continuity/sample-{k}"), digest(&(seed, k)))
                .value("first", ys[0])
                .value("last", ys[ys.len() - 1])
                .value("shrink", ys[ys.len() - 1] / ys[0])
                .value("slope", fit.exponent)
                .check(Check::at_most("shrink", 1e-2, Basis::Empirical))
                .note("slope is a diagnostic"),
        );
        report.fitted_slopes.push(fit);
    }
    report.count("continuity samples", cfg.families.len());
    Ok(finish(report))
}

/// Probe-based estimate of the operator norm of χ¹(u) on H¹_{-η}: the
/// largest ratio over a fixed set of directions.
fn operator_bound(cfg: &Config, cut: &CutoffConfig, grid: Grid, report: &mut ExperimentReport) -> Result<()> {
    let spec = norm_spec(cfg.eta)?;
    let l = grid.half_length() as f64;
    let seed = sub_seed(cfg.seed, "derivative/operator");
    let probes: Vec<GridFunction> = (0..12usize)
        .map(|i| {
            if i < 6 {
                pick(&cfg.families, seed, "probe", i).generate(grid, i as u64)
            } else {
                let c = -(l - 6.0) + (2.0 * (l - 6.0)) * (i - 6) as f64 / 5.0;
                SampleFamily::new(FamilyKind::SmoothRandom, 1.0, 6.0, seed)
                    .with_support(c - 1.5, c + 1.5)
                    .generate(grid, i as u64)
            }
        })
        .collect::<Result<_>>()?;
    let n = cfg.samples.operator_bases.max(2);
    let rows: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let base = pick(&cfg.families, seed, "base", i).generate(grid, i as u64)?;
            let target = 3.0 * i as f64 / (n - 1) as f64;
            let rb = rho_field(&base, cut)?.max();
            let u = base.scale(target / rb);
            let op = ChiOne::at(&u, cut)?;
            let mut est = 0.0f64;
            for v in &probes {
                est = est.max(weighted_norm(&op.apply(v)?, spec) / weighted_norm(v, spec));
            }
            Ok((rho_field(&u, cut)?.max(), est))
        })
        .collect::<Result<_>>()?;
    report.count("operator bases", n);
    report.count("operator probes", probes.len());
    let d = digest(&(seed, n));
    report.push(
        Case::new("chi-one/identity-at-zero", d.clone())
            .value("estimate", rows[0].1)
            .check(Check::near("estimate", 1.0, 1e-12, Basis::Analytic)),
    );
    let ests = rows.iter().map(|r| r.1);
    report.push(
        Case::new("chi-one/operator-estimates", d)
            .value("rho_max", max_of(rows.iter().map(|r| r.0)))
            .value("min_estimate", min_of(ests.clone()))
            .value("max_estimate", max_of(ests.clone()))
            .value("relative_spread", (max_of(ests.clone()) - min_of(ests.clone())) / min_of(ests))
            .note("probe maxima are lower estimates of the operator norm"),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sub_seeds_differ_by_label() {
        assert_eq!(sub_seed(1, "a"), sub_seed(1, "a"));
        assert_ne!(sub_seed(1, "a"), sub_seed(1, "b"));
        assert_ne!(sub_seed(1, "a"), sub_seed(2, "a"));
    }

    #[test]
    fn certify_suite_passes() {
        let out = suite_certify(&Config::default()).unwrap();
        assert!(out.report.pass);
        assert_eq!(out.report.cases.len(), 5);
    }

    #[test]
    fn sawtooth_suite_on_one_spec() {
        let cfg = Config {
            eps_saw: vec![1.0 / 16.0],
            ..Config::default()
        };
        let out = suite_sawtooth_contrast(&cfg).unwrap();
        assert_eq!(out.table.rows.len(), 1);
        let g = out.report.cases.iter().find(|c| c.name.starts_with("sawtooth/g")).unwrap();
        assert!(g.pass, "{g:?}");
    }

    #[test]
    fn gateaux_remainder_is_quadratic_when_inactive() {
        let g = Grid::new(8, 64).unwrap();
        let cut = CutoffConfig::standard(1.0).unwrap();
        let u = GridFunction::sample_scalar(g, |x| 0.01 * (-x * x).exp());
        let v = GridFunction::sample_scalar(g, |x| (x).sin() * (-x * x / 4.0).exp());
        let r = gateaux_remainders(&u, &v, &cut, 0.5, &[1e-2, 1e-3]).unwrap();
        // F(u) = u² exactly here, so r(τ)/τ = τ |v²|
        assert!((r[1] / r[0] - 0.1).abs() < 1e-6);
    }
}
