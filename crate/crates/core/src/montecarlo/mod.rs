//! Seeded replication of `Tr(A^p)`, standardization and normality
//! diagnostics, and variance-ratio convergence against the closed forms.
//!
//! Normality is measured by the Kolmogorov-Smirnov distance of standardized
//! samples to the standard normal, together with sample skewness and excess
//! kurtosis.

mod moments;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::ensembles::{EnsembleKind, MatrixRealization};
use crate::error::{Error, Result};
use crate::limits::{
    exact_moments, limit_var_symmetric_circulant_with, limit_variance_ratio, EvenBranchExponent,
    LimitValue, EXACT_VARIANCE_BUDGET,
};
use crate::spectra::{trace_power, TraceSample};

pub use moments::MomentAccumulator;

/// Upper bound on the estimated floating-point work of one experiment.
pub const EXPERIMENT_BUDGET: f64 = 1e13;

/// Replicate count below which a report carries a warning.
pub const MIN_DIAGNOSTIC_REPLICATES: usize = 100;

/// Growing power `p(n) = max(2, floor(c ln n / ln ln n))`, rounded down to an
/// even number for the reverse circulant and Hankel kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthSchedule {
    pub coefficient: f64,
}

impl Default for GrowthSchedule {
    fn default() -> Self {
        GrowthSchedule { coefficient: 0.5 }
    }
}

impl GrowthSchedule {
    pub fn new(coefficient: f64) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "growth coefficient must lie in (0, 1), got {coefficient}"
            )));
        }
        Ok(GrowthSchedule { coefficient })
    }

    pub fn power_for(&self, kind: EnsembleKind, n: usize) -> Result<u32> {
        if n < 3 {
            return Err(Error::InvalidDimension(format!(
                "growth schedule needs n >= 3, got {n}"
            )));
        }
        let ln = (n as f64).ln();
        let raw = (self.coefficient * ln / ln.ln()).floor().max(2.0) as u32;
        Ok(match kind {
            EnsembleKind::ReverseCirculant | EnsembleKind::Hankel => (raw - raw % 2).max(2),
            _ => raw,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: EnsembleKind,
    pub n: usize,
    pub p: u32,
    pub replicates: usize,
    pub seed: u64,
    pub growth: Option<GrowthSchedule>,
}

impl ExperimentConfig {
    pub fn new(kind: EnsembleKind, n: usize, p: u32, replicates: usize, seed: u64) -> Result<Self> {
        let config = ExperimentConfig {
            kind,
            n,
            p,
            replicates,
            seed,
            growth: None,
        };
        config.validate()?;
        Ok(config)
    }

    /// Configuration whose power is taken from `schedule` at this `n`.
    pub fn with_growth(
        kind: EnsembleKind,
        n: usize,
        schedule: GrowthSchedule,
        replicates: usize,
        seed: u64,
    ) -> Result<Self> {
        let schedule = GrowthSchedule::new(schedule.coefficient)?;
        let config = ExperimentConfig {
            kind,
            n,
            p: schedule.power_for(kind, n)?,
            replicates,
            seed,
            growth: Some(schedule),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidDimension("n must be at least 1".into()));
        }
        if self.p == 0 {
            return Err(Error::InvalidArgument("p must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("replicates must be at least 1".into()));
        }
        if matches!(self.kind, EnsembleKind::ReverseCirculant | EnsembleKind::Hankel)
            && self.p % 2 == 1
        {
            return Err(Error::InvalidArgument(format!(
                "{} experiments require an even power p, got {}",
                self.kind, self.p
            )));
        }
        if let Some(schedule) = self.growth {
            let expected = schedule.power_for(self.kind, self.n)?;
            if expected != self.p {
                return Err(Error::InvalidArgument(format!(
                    "p = {} disagrees with the growth schedule value {expected}",
                    self.p
                )));
            }
        }
        let cost = self.replicates as f64 * replicate_cost(self.kind, self.n, self.p);
        if cost > EXPERIMENT_BUDGET {
            return Err(Error::Resource(format!(
                "estimated work {cost:e} exceeds the budget {EXPERIMENT_BUDGET:e}"
            )));
        }
        Ok(())
    }
}

/// Rough flop count of one trace evaluation.
fn replicate_cost(kind: EnsembleKind, n: usize, p: u32) -> f64 {
    let n = n as f64;
    let fft = |len: f64| 5.0 * len * len.max(2.0).log2();
    match kind {
        EnsembleKind::Circulant | EnsembleKind::SymmetricCirculant => fft(n) + n * p as f64,
        EnsembleKind::ReverseCirculant if p.is_multiple_of(2) => fft(n) + n * p as f64,
        EnsembleKind::ReverseCirculant => n * (p as f64 / 2.0 + 1.0) * fft(n),
        EnsembleKind::Hankel => n * (p as f64 / 2.0 + 1.0) * fft(4.0 * n),
    }
}

/// One trace per replicate; replicate `r` draws its input from stream `r`.
pub fn run_replicates(config: &ExperimentConfig) -> Result<Vec<TraceSample>> {
    config.validate()?;
    (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let real = MatrixRealization::sample(config.kind, config.n, config.seed, r as u64)?;
            trace_power(&real, config.p)
        })
        .collect()
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    thread_local! {
        static NORMAL: Normal = Normal::new(0.0, 1.0).expect("unit normal");
    }
    NORMAL.with(|d| d.cdf(x))
}

/// `sup_x |F_N(x) - Phi(x)|`, evaluated on both sides of every sample point.
pub fn ks_statistic(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = standard_normal_cdf(x);
            ((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

pub fn standardize(values: &[f64], mean: f64, sd: f64) -> Vec<f64> {
    values.iter().map(|x| (x - mean) / sd).collect()
}

/// Same diagnostics with the exact mean and variance in place of the sample
/// estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactStandardization {
    pub mean: f64,
    pub variance: f64,
    pub variance_ratio: f64,
    pub ks_statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub config: ExperimentConfig,
    pub replicates: usize,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub variance_ratio: f64,
    pub limit_ratio: Option<LimitValue>,
    pub ks_statistic: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub exact: Option<ExactStandardization>,
    pub warnings: Vec<String>,
}

impl CltReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Whether [`summarize_with`] should try the exact-moment oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SummaryOptions {
    pub exact_moments: bool,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions { exact_moments: true }
    }
}

fn raw_values(samples: &[TraceSample]) -> Vec<f64> {
    samples.iter().map(|s| s.value).collect()
}

/// `n^{p+1}`, the variance scale of `Tr(A^p)`.
pub fn variance_scale(n: usize, p: u32) -> f64 {
    (n as f64).powi(p as i32 + 1)
}

fn exact_expansion_feasible(kind: EnsembleKind, n: usize, p: u32) -> bool {
    let free = match kind {
        EnsembleKind::Circulant | EnsembleKind::SymmetricCirculant => p - 1,
        EnsembleKind::ReverseCirculant if p.is_multiple_of(2) => p - 1,
        _ => p,
    };
    p <= 8 && (n as f64).powi(free as i32) <= EXACT_VARIANCE_BUDGET
}

pub fn summarize(samples: &[TraceSample], config: &ExperimentConfig) -> Result<CltReport> {
    summarize_with(samples, config, SummaryOptions::default())
}

pub fn summarize_with(
    samples: &[TraceSample],
    config: &ExperimentConfig,
    options: SummaryOptions,
) -> Result<CltReport> {
    if samples.len() < 2 {
        return Err(Error::DegenerateStatistics(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let values = raw_values(samples);
    let acc = MomentAccumulator::from_slice(&values);
    let variance = acc.variance();
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::DegenerateStatistics("sample variance is zero".into()));
    }
    let mut warnings = Vec::new();
    if samples.len() < MIN_DIAGNOSTIC_REPLICATES {
        warnings.push(format!(
            "{} replicates is below the {MIN_DIAGNOSTIC_REPLICATES} needed for meaningful diagnostics",
            samples.len()
        ));
    }
    let scale = variance_scale(config.n, config.p);
    let limit_ratio = match limit_variance_ratio(config.kind, config.p) {
        Ok(v) => Some(v),
        Err(Error::UnsupportedLimit(_)) => None,
        Err(e) => return Err(e),
    };
    let exact = if options.exact_moments && exact_expansion_feasible(config.kind, config.n, config.p)
    {
        let m = exact_moments(config.kind, config.n, config.p)?;
        let (mean, var) = (m.mean as f64, m.variance as f64);
        Some(ExactStandardization {
            mean,
            variance: var,
            variance_ratio: var / scale,
            ks_statistic: ks_statistic(&standardize(&values, mean, var.sqrt())),
        })
    } else {
        None
    };
    Ok(CltReport {
        config: *config,
        replicates: samples.len(),
        sample_mean: acc.mean(),
        sample_variance: variance,
        variance_ratio: variance / scale,
        limit_ratio,
        ks_statistic: ks_statistic(&standardize(&values, acc.mean(), variance.sqrt())),
        skewness: acc.skewness(),
        excess_kurtosis: acc.excess_kurtosis(),
        exact,
        warnings,
    })
}

/// Standardized samples as a one-column CSV.
pub fn standardized_csv(samples: &[TraceSample]) -> Result<String> {
    let values = raw_values(samples);
    let acc = MomentAccumulator::from_slice(&values);
    if samples.len() < 2 || acc.variance().is_nan() || acc.variance() <= 0.0 {
        return Err(Error::DegenerateStatistics(
            "cannot standardize fewer than 2 distinct samples".into(),
        ));
    }
    let mut out = String::from("standardized\n");
    for z in standardize(&values, acc.mean(), acc.variance().sqrt()) {
        out.push_str(&format!("{z:?}\n"));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRow {
    pub n: usize,
    pub replicates: usize,
    pub variance_ratio: f64,
    pub standard_error: f64,
    pub limit_ratio: Option<f64>,
    pub relative_gap: Option<f64>,
    /// Symmetric circulant, even `p`: the `2^{m-k}` reading of the limit.
    pub alt_limit_ratio: Option<f64>,
    pub alt_relative_gap: Option<f64>,
    pub exact_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceTable {
    pub kind: EnsembleKind,
    pub p: u32,
    pub rows: Vec<VarianceRow>,
    /// Set when no closed-form limit exists for this kind and power.
    pub limit_note: Option<String>,
    /// Whether the relative gaps decrease along the grid.
    pub gaps_decreasing: Option<bool>,
}

impl VarianceTable {
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let mut out = String::from(
            "n,replicates,variance_ratio,standard_error,limit_ratio,relative_gap,\
             alt_limit_ratio,alt_relative_gap,exact_ratio\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:?},{:?},{},{},{},{},{}\n",
                r.n,
                r.replicates,
                r.variance_ratio,
                r.standard_error,
                cell(r.limit_ratio),
                cell(r.relative_gap),
                cell(r.alt_limit_ratio),
                cell(r.alt_relative_gap),
                cell(r.exact_ratio),
            ));
        }
        out
    }
}

pub fn variance_convergence(
    kind: EnsembleKind,
    p: u32,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<VarianceTable> {
    variance_convergence_with(kind, p, n_grid, replicates, seed, false)
}

/// Sample variance ratios `Var / n^{p+1}` along `n_grid`, next to the
/// closed-form limit where one exists and, optionally, the exact ratio.
pub fn variance_convergence_with(
    kind: EnsembleKind,
    p: u32,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
    with_exact: bool,
) -> Result<VarianceTable> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n grid must be non-empty and strictly ascending".into(),
        ));
    }
    if replicates < 4 {
        return Err(Error::InvalidArgument(
            "variance estimates need at least 4 replicates".into(),
        ));
    }
    let (limit, limit_note) = match limit_variance_ratio(kind, p) {
        Ok(v) => (Some(v.value), None),
        Err(e @ Error::UnsupportedLimit(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let alt = if kind == EnsembleKind::SymmetricCirculant && p.is_multiple_of(2) {
        Some(limit_var_symmetric_circulant_with(p, EvenBranchExponent::Single)?.value)
    } else {
        None
    };
    let gap = |ratio: f64, target: Option<f64>| target.map(|t| (ratio - t).abs() / t);
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let config = ExperimentConfig::new(kind, n, p, replicates, seed)?;
        let values = raw_values(&run_replicates(&config)?);
        let acc = MomentAccumulator::from_slice(&values);
        let scale = variance_scale(n, p);
        let ratio = acc.variance() / scale;
        let exact_ratio = if with_exact && exact_expansion_feasible(kind, n, p) {
            Some(exact_moments(kind, n, p)?.variance as f64 / scale)
        } else {
            None
        };
        rows.push(VarianceRow {
            n,
            replicates,
            variance_ratio: ratio,
            standard_error: acc.variance_standard_error() / scale,
            limit_ratio: limit,
            relative_gap: gap(ratio, limit),
            alt_limit_ratio: alt,
            alt_relative_gap: gap(ratio, alt),
            exact_ratio,
        });
    }
    let gaps: Vec<f64> = rows.iter().filter_map(|r| r.relative_gap).collect();
    let gaps_decreasing = (gaps.len() == rows.len())
        .then(|| gaps.windows(2).all(|w| w[1] <= w[0]));
    Ok(VarianceTable {
        kind,
        p,
        rows,
        limit_note,
        gaps_decreasing,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEstimate {
    pub value: f64,
    /// Zero for exact values.
    pub standard_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundVerdict {
    pub kind: EnsembleKind,
    pub n: usize,
    pub p: u32,
    pub bound: Option<f64>,
    pub estimate: VarianceEstimate,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// `n^{p+1} / (12p)^p` for the circulant kinds and `n^{p+1} / (3p)^{p+1}` for
/// the reverse circulant and Hankel kinds (even `p`).
pub fn variance_lower_bound(kind: EnsembleKind, n: usize, p: u32) -> Option<f64> {
    if p < 2 {
        return None;
    }
    let scale = variance_scale(n, p);
    let pf = p as f64;
    match kind {
        EnsembleKind::Circulant | EnsembleKind::SymmetricCirculant => {
            Some(scale / (12.0 * pf).powi(p as i32))
        }
        EnsembleKind::ReverseCirculant | EnsembleKind::Hankel if p.is_multiple_of(2) => {
            Some(scale / (3.0 * pf).powi(p as i32 + 1))
        }
        _ => None,
    }
}

/// Passes when `estimate >= bound (1 - 3 se / estimate)`; otherwise flags,
/// since the bounds are asymptotic in `n`.
pub fn lower_bound_check(
    kind: EnsembleKind,
    n: usize,
    p: u32,
    estimate: VarianceEstimate,
) -> LowerBoundVerdict {
    let bound = variance_lower_bound(kind, n, p);
    let (verdict, note) = match bound {
        None if p < 2 => (Verdict::Pass, Some("no bound is stated for p < 2".to_string())),
        None => (
            Verdict::Pass,
            Some(format!("no bound is stated for odd p with {kind}")),
        ),
        Some(b) => {
            let slack = if estimate.value > 0.0 {
                1.0 - 3.0 * estimate.standard_error / estimate.value
            } else {
                1.0
            };
            if estimate.value >= b * slack {
                (Verdict::Pass, None)
            } else {
                (
                    Verdict::Flag,
                    Some(format!("estimate {} is below the bound {b}", estimate.value)),
                )
            }
        }
    };
    LowerBoundVerdict {
        kind,
        n,
        p,
        bound,
        estimate,
        verdict,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::gaussian_stream;

    #[test]
    fn replicates_are_deterministic() {
        let config = ExperimentConfig::new(EnsembleKind::Hankel, 16, 2, 1, 5).unwrap();
        assert_eq!(run_replicates(&config).unwrap(), run_replicates(&config).unwrap());
        let config = ExperimentConfig::new(EnsembleKind::Circulant, 16, 3, 50, 5).unwrap();
        let a = run_replicates(&config).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| run_replicates(&config).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn circulant_first_power_is_scaled_first_draw() {
        let n = 12;
        let config = ExperimentConfig::new(EnsembleKind::Circulant, n, 1, 20, 9).unwrap();
        for (r, s) in run_replicates(&config).unwrap().iter().enumerate() {
            let x0 = gaussian_stream(9, r as u64).next().unwrap();
            assert!((s.value - n as f64 * x0).abs() < 1e-9 * n as f64);
        }
    }

    #[test]
    fn circulant_first_power_is_centered() {
        let n = 4;
        let config = ExperimentConfig::new(EnsembleKind::Circulant, n, 1, 100_000, 1).unwrap();
        let mean = run_replicates(&config)
            .unwrap()
            .iter()
            .map(|s| s.value / n as f64)
            .sum::<f64>()
            / 1e5;
        assert!(mean.abs() < 5.0 / 1e5f64.sqrt());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::new(EnsembleKind::ReverseCirculant, 16, 3, 10, 0).is_err());
        assert!(ExperimentConfig::new(EnsembleKind::Hankel, 16, 1, 10, 0).is_err());
        assert!(ExperimentConfig::new(EnsembleKind::Circulant, 16, 3, 0, 0).is_err());
        assert!(ExperimentConfig::new(EnsembleKind::Circulant, 0, 3, 10, 0).is_err());
        assert!(matches!(
            ExperimentConfig::new(EnsembleKind::Hankel, 1 << 20, 8, 10_000, 0),
            Err(Error::Resource(_))
        ));
        let mut bad = ExperimentConfig::new(EnsembleKind::Circulant, 64, 2, 10, 0).unwrap();
        bad.growth = Some(GrowthSchedule::default());
        bad.p = 5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn growth_schedule() {
        let s = GrowthSchedule::default();
        assert_eq!(s.power_for(EnsembleKind::Circulant, 64).unwrap(), 2);
        assert_eq!(s.power_for(EnsembleKind::Circulant, 1 << 20).unwrap(), 2);
        assert_eq!(s.power_for(EnsembleKind::Circulant, 1 << 26).unwrap(), 3);
        assert_eq!(s.power_for(EnsembleKind::Hankel, 1 << 26).unwrap(), 2);
        let big = GrowthSchedule::new(0.9).unwrap();
        let p = big.power_for(EnsembleKind::Circulant, 1 << 20).unwrap();
        assert_eq!(p, 4);
        assert_eq!(big.power_for(EnsembleKind::Hankel, 1 << 20).unwrap(), 4);
        let p_rc = big.power_for(EnsembleKind::ReverseCirculant, 100_000_000).unwrap();
        assert_eq!(p_rc % 2, 0);
        assert!(GrowthSchedule::new(1.0).is_err());
        assert!(s.power_for(EnsembleKind::Circulant, 2).is_err());
        let cfg =
            ExperimentConfig::with_growth(EnsembleKind::Hankel, 64, big, 10, 1).unwrap();
        assert_eq!(cfg.p % 2, 0);
    }

    #[test]
    fn ks_is_calibrated() {
        let n = 1000;
        let mut stats: Vec<f64> = (0..100)
            .map(|t| {
                let sample: Vec<f64> = gaussian_stream(77, t).take(n).collect();
                ks_statistic(&sample) * (n as f64).sqrt()
            })
            .collect();
        stats.sort_by(f64::total_cmp);
        let median = 0.5 * (stats[49] + stats[50]);
        assert!(median > 0.83 / 1.5 && median < 0.83 * 1.5, "median {median}");
        let sample: Vec<f64> = gaussian_stream(3, 0).take(10_000).collect();
        assert!(ks_statistic(&sample) < 1.95 / 100.0);
    }

    #[test]
    fn ks_edge_cases() {
        assert!((ks_statistic(&[0.0]) - 0.5).abs() < 1e-15);
        assert!(ks_statistic(&[50.0, 60.0]) > 0.999);
    }

    #[test]
    fn summary_requires_two_samples() {
        let config = ExperimentConfig::new(EnsembleKind::Circulant, 8, 2, 1, 0).unwrap();
        let samples = run_replicates(&config).unwrap();
        assert!(matches!(
            summarize(&samples, &config),
            Err(Error::DegenerateStatistics(_))
        ));
    }

    #[test]
    fn summary_fields() {
        let config = ExperimentConfig::new(EnsembleKind::Circulant, 16, 2, 50, 2).unwrap();
        let samples = run_replicates(&config).unwrap();
        let report = summarize(&samples, &config).unwrap();
        assert_eq!(report.replicates, 50);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.sample_variance > 0.0);
        assert!((0.0..=1.0).contains(&report.ks_statistic));
        assert_eq!(report.limit_ratio.as_ref().unwrap().value, 2.0);
        let exact = report.exact.unwrap();
        // E Tr(C^2) = n #{k : 2k = 0 mod n}
        assert_eq!(exact.mean, 32.0);
        let again = summarize(&samples, &config).unwrap();
        assert_eq!(again.to_json().unwrap(), summarize(&samples, &config).unwrap().to_json().unwrap());
        let hankel = ExperimentConfig::new(EnsembleKind::Hankel, 16, 2, 10, 2).unwrap();
        let report = summarize(&run_replicates(&hankel).unwrap(), &hankel).unwrap();
        assert!(report.limit_ratio.is_none());
    }

    #[test]
    fn circulant_first_power_ratio_is_one() {
        let table = variance_convergence(EnsembleKind::Circulant, 1, &[8, 16, 32], 64, 4).unwrap();
        for row in &table.rows {
            assert_eq!(row.limit_ratio, Some(1.0));
        }
        // Var(n x_0) / n^2 = Var(x_0): the sample variance of the first draws
        for row in &table.rows {
            let draws: Vec<f64> = (0..64).map(|r| gaussian_stream(4, r).next().unwrap()).collect();
            let v = MomentAccumulator::from_slice(&draws).variance();
            assert!((row.variance_ratio - v).abs() < 1e-12);
        }
    }

    #[test]
    fn reverse_circulant_square_ratio() {
        let table =
            variance_convergence(EnsembleKind::ReverseCirculant, 2, &[128], 10_000, 8).unwrap();
        let row = &table.rows[0];
        assert!((row.variance_ratio - 2.0).abs() < 3.0 * row.standard_error, "{row:?}");
    }

    #[test]
    fn hankel_table_has_no_limit() {
        let table = variance_convergence_with(EnsembleKind::Hankel, 2, &[8, 16], 20, 1, true).unwrap();
        assert!(table.limit_note.is_some());
        assert!(table.rows.iter().all(|r| r.limit_ratio.is_none() && r.exact_ratio.is_some()));
        assert!(table.gaps_decreasing.is_none());
        let csv = table.to_csv();
        assert!(csv.lines().nth(1).unwrap().contains(",,,,"));
        assert!(variance_convergence(EnsembleKind::Hankel, 2, &[16, 8], 20, 1).is_err());
    }

    #[test]
    fn lower_bounds() {
        let exact = |kind, n, p| VarianceEstimate {
            value: exact_moments(kind, n, p).unwrap().variance as f64,
            standard_error: 0.0,
        };
        let v = lower_bound_check(EnsembleKind::Circulant, 64, 2, exact(EnsembleKind::Circulant, 64, 2));
        assert_eq!(v.verdict, Verdict::Pass);
        let v = lower_bound_check(
            EnsembleKind::ReverseCirculant,
            64,
            2,
            exact(EnsembleKind::ReverseCirculant, 64, 2),
        );
        assert_eq!(v.verdict, Verdict::Pass);
        let v = lower_bound_check(
            EnsembleKind::Hankel,
            8,
            1,
            VarianceEstimate {
                value: 0.0,
                standard_error: 0.0,
            },
        );
        assert_eq!(v.verdict, Verdict::Pass);
        assert!(v.note.is_some());
        let v = lower_bound_check(
            EnsembleKind::Circulant,
            64,
            2,
            VarianceEstimate {
                value: 1.0,
                standard_error: 0.1,
            },
        );
        assert_eq!(v.verdict, Verdict::Flag);
    }
}
