use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, Stream};
use crate::stabilization::least_squares;

use super::run::ReplicationTable;

/// Standard normal CDF, `Φ(x) = erfc(-x/√2) / 2`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov statistic against `Φ`.
pub fn ks_to_normal(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let p = normal_cdf(x);
        d = d.max((((i + 1) as f64) / m - p).abs()).max((p - i as f64 / m).abs());
    }
    Ok(d)
}

/// `y ≈ e^{intercept} x^{slope}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares on `(ln x, ln y)`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("xs and ys differ in length"));
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 points, got {}", xs.len())));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::invalid(format!("power-law fit needs positive values, got {v}")));
    }
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let (slope, intercept, r_squared) = least_squares(&pts);
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Centers by the sample mean and scales by the standard deviation with
/// divisor `M`; a constant sample maps to all zeros.
pub fn self_normalize(xs: &[f64]) -> Vec<f64> {
    let m = mean(xs);
    let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    if sd > 0.0 {
        xs.iter().map(|x| (x - m) / sd).collect()
    } else {
        vec![0.0; xs.len()]
    }
}

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Percentile bootstrap 95% interval for the unbiased variance.
pub fn bootstrap_variance_ci(xs: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    let mut rng = Stream::new(seed);
    let m = xs.len();
    let mut buf = vec![0.0; m];
    let mut vars: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = xs[rng.below(m as u64) as usize];
            }
            variance(&buf)
        })
        .collect();
    vars.sort_by(f64::total_cmp);
    let lo = ((0.025 * resamples as f64).floor() as usize).min(resamples - 1);
    let hi = ((0.975 * resamples as f64).ceil() as usize).saturating_sub(1).min(resamples - 1);
    (vars[lo], vars[hi])
}

/// Lane separating bootstrap streams from replication streams.
const BOOTSTRAP_LANE: u64 = 0xb007_57a9;

/// Per-cell statistics of `f_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub body: String,
    pub d: usize,
    pub k: usize,
    pub model: String,
    /// `n` (binomial) or `t` (Poisson).
    pub cell: f64,
    pub mean: f64,
    pub var: f64,
    pub var_ci_lo: f64,
    pub var_ci_hi: f64,
    pub ks: f64,
    pub m_effective: usize,
    pub degenerate_count: usize,
}

/// `f_k` values of the non-degenerate replications of cell `c`.
pub fn cell_values(table: &ReplicationTable, c: usize, k: usize) -> Vec<f64> {
    table.cells[c]
        .records
        .iter()
        .filter_map(|r| r.f_vector.as_ref().map(|f| f[k] as f64))
        .collect()
}

/// Summary of every cell for face dimension `k`. Bootstrap resampling for
/// cell `c` uses the stream `derive_seed(derive_seed(master, LANE, 0), c, k)`.
pub fn summarize(table: &ReplicationTable, k: usize) -> Result<Vec<SummaryStats>> {
    if k >= table.d {
        return Err(Error::invalid(format!("face dimension {k} out of range 0..{}", table.d)));
    }
    let boot_root = derive_seed(table.master_seed, BOOTSTRAP_LANE, 0);
    table
        .cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let xs = cell_values(table, c, k);
            if xs.len() < 2 {
                return Err(Error::InsufficientData(format!(
                    "cell {} has {} non-degenerate replications",
                    cell.param,
                    xs.len()
                )));
            }
            let (lo, hi) = bootstrap_variance_ci(&xs, BOOTSTRAP_RESAMPLES, derive_seed(boot_root, c as u64, k as u64));
            Ok(SummaryStats {
                body: table.body_name().into(),
                d: table.d,
                k,
                model: table.model.name().into(),
                cell: cell.param,
                mean: mean(&xs),
                var: variance(&xs),
                var_ci_lo: lo,
                var_ci_hi: hi,
                ks: ks_to_normal(&self_normalize(&xs))?,
                m_effective: xs.len(),
                degenerate_count: cell.records.len() - xs.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub cell: f64,
    pub ks: f64,
    /// `ks · √cell`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub k: usize,
    pub rows: Vec<CltRow>,
    /// `max / min` of the normalized sequence.
    pub ratio: f64,
    pub band: f64,
    /// Set when `ratio` exceeds `band`.
    pub flagged: bool,
    pub normalization: String,
}

pub const NORMALIZATION_NOTE: &str =
    "centered by the sample mean and scaled by the sample standard deviation (divisor M)";

/// KS distance per cell and the sequence `KS·√cell`, flagged when its
/// max/min ratio exceeds `band`.
pub fn clt_report(table: &ReplicationTable, k: usize, band: f64) -> Result<CltReport> {
    if table.cells.len() < 2 {
        return Err(Error::InsufficientData("need at least 2 cells".into()));
    }
    let mut rows = Vec::new();
    for (c, cell) in table.cells.iter().enumerate() {
        let xs = cell_values(table, c, k);
        if xs.len() < 2 {
            return Err(Error::InsufficientData(format!("cell {} has too few replications", cell.param)));
        }
        if variance(&xs) == 0.0 {
            return Err(Error::InsufficientData(format!(
                "f_{k} has zero variance in cell {}; standardization is undefined",
                cell.param
            )));
        }
        let ks = ks_to_normal(&self_normalize(&xs))?;
        rows.push(CltRow {
            cell: cell.param,
            ks,
            normalized: ks * cell.param.sqrt(),
        });
    }
    let max = rows.iter().map(|r| r.normalized).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.normalized).fold(f64::INFINITY, f64::min);
    let ratio = max / min;
    Ok(CltReport {
        k,
        rows,
        ratio,
        band,
        flagged: !(ratio <= band),
        normalization: NORMALIZATION_NOTE.into(),
    })
}

/// Power-law fit of the variance against the cell parameter.
pub fn variance_scaling(stats: &[SummaryStats]) -> Result<PowerLawFit> {
    let xs: Vec<f64> = stats.iter().map(|s| s.cell).collect();
    let ys: Vec<f64> = stats.iter().map(|s| s.var).collect();
    fit_power_law(&xs, &ys)
}
