//! Distances between samples and reference laws, plus chi-square helpers.

use statrs::function::erf::erf;

use crate::error::{invalid, Error, Result};

/// Finite reals kept in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample values must be finite"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Right-continuous empirical CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }
}

impl TryFrom<Vec<f64>> for EmpiricalSample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

/// Sup distance between two empirical CDFs.
pub fn ks_two_sample(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (xa, xb) = (a.values(), b.values());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Sup distance between an empirical CDF and a continuous reference CDF,
/// taking both one-sided gaps at every sample point.
pub fn ks_vs_cdf<F: Fn(f64) -> f64>(a: &EmpiricalSample, cdf: F) -> f64 {
    let m = a.len() as f64;
    a.values()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let f = cdf(x);
            ((j + 1) as f64 / m - f).max(f - j as f64 / m)
        })
        .fold(0.0, f64::max)
}

/// Wasserstein-1 distance between two empirical laws, `∫|F_a - F_b| dx`.
///
/// On equal sizes this is the mean absolute difference of matched order
/// statistics; on unequal sizes it is the exact distance between the two
/// step-function quantile curves.
pub fn wasserstein1(a: &EmpiricalSample, b: &EmpiricalSample) -> f64 {
    let (xa, xb) = (a.values(), b.values());
    if xa.len() == xb.len() {
        return xa.iter().zip(xb).map(|(p, q)| (p - q).abs()).sum::<f64>() / xa.len() as f64;
    }
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut prev = xa[0].min(xb[0]);
    let mut total = 0.0;
    while i < xa.len() || j < xb.len() {
        let x = match (xa.get(i), xb.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        total += (i as f64 / na - j as f64 / nb).abs() * (x - prev);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        prev = x;
    }
    total
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// CDF of `|N(0, t)|`: `2 Φ(x / sqrt t) - 1` for `x >= 0`.
pub fn half_normal_cdf(x: f64, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("half-normal variance must be positive, got {t}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(erf(x / (2.0 * t).sqrt()))
}

/// Rayleigh CDF `1 - exp(-x²/2)`.
pub fn rayleigh_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x * x / 2.0).exp_m1()
    }
}

/// Pearson statistic against equal expected counts.
pub fn chi_square_uniform(counts: &[usize]) -> Result<f64> {
    if counts.len() < 2 {
        return Err(invalid("chi-square needs at least two cells"));
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(invalid("chi-square needs a positive total"));
    }
    let expected = total as f64 / counts.len() as f64;
    Ok(counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum())
}

/// Pearson statistic `Σ (o - e)² / e`.
pub fn chi_square_statistic(observed: &[f64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(invalid("chi-square needs matching cell vectors of length >= 2"));
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return Err(invalid("expected counts must be positive"));
    }
    Ok(observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum())
}

/// Two-sample homogeneity statistic over shared cells, with its degrees of
/// freedom. Cells empty in both samples are dropped.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> Result<(f64, usize)> {
    if a.len() != b.len() {
        return Err(invalid("cell vectors differ in length"));
    }
    let (na, nb): (usize, usize) = (a.iter().sum(), b.iter().sum());
    if na == 0 || nb == 0 {
        return Err(Error::EmptySample);
    }
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    let mut cells = 0;
    for (&x, &y) in a.iter().zip(b) {
        let row = (x + y) as f64;
        if row == 0.0 {
            continue;
        }
        cells += 1;
        let ea = row * na as f64 / total;
        let eb = row * nb as f64 / total;
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if cells < 2 {
        return Err(invalid("need at least two occupied cells"));
    }
    Ok((stat, cells - 1))
}

/// Merges adjacent cells of two count vectors, left to right, until each
/// merged cell holds at least `min_total` counts across both samples. A
/// short remainder joins the last merged cell.
pub fn pool_sparse_cells(a: &[usize], b: &[usize], min_total: usize) -> (Vec<usize>, Vec<usize>) {
    let (mut pa, mut pb) = (Vec::new(), Vec::new());
    let (mut x, mut y) = (0, 0);
    for (&u, &v) in a.iter().zip(b) {
        x += u;
        y += v;
        if x + y >= min_total {
            pa.push(x);
            pb.push(y);
            x = 0;
            y = 0;
        }
    }
    if x + y > 0 {
        match (pa.last_mut(), pb.last_mut()) {
            (Some(p), Some(q)) => {
                *p += x;
                *q += y;
            }
            _ => {
                pa.push(x);
                pb.push(y);
            }
        }
    }
    (pa, pb)
}

/// Merges adjacent cells from the right until every expected count reaches
/// `min_expected`. Returns pooled (observed, expected).
pub fn pool_tail_cells(
    observed: &[f64],
    expected: &[f64],
    min_expected: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut obs: Vec<f64> = Vec::new();
    let mut exp: Vec<f64> = Vec::new();
    let (mut acc_o, mut acc_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected).rev() {
        acc_o += o;
        acc_e += e;
        if acc_e >= min_expected {
            obs.push(acc_o);
            exp.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(o), Some(e)) => {
                *o += acc_o;
                *e += acc_e;
            }
            _ => {
                obs.push(acc_o);
                exp.push(acc_e);
            }
        }
    }
    obs.reverse();
    exp.reverse();
    (obs, exp)
}

const CHI2_CRIT_001: [f64; 30] = [
    10.828, 13.816, 16.266, 18.467, 20.515, 22.458, 24.322, 26.124, 27.877, 29.588, 31.264,
    32.909, 34.528, 36.123, 37.697, 39.252, 40.790, 42.312, 43.820, 45.315, 46.797, 48.268,
    49.728, 51.179, 52.620, 54.052, 55.476, 56.892, 58.301, 59.703,
];

/// Upper 0.1% point of the chi-square law. Tabulated up to 30 degrees of
/// freedom, Wilson–Hilferty beyond.
pub fn chi_square_critical_001(df: usize) -> f64 {
    assert!(df > 0, "degrees of freedom must be positive");
    if df <= CHI2_CRIT_001.len() {
        return CHI2_CRIT_001[df - 1];
    }
    let k = df as f64;
    let z = 3.090_232_306_167_813;
    let c = 2.0 / (9.0 * k);
    k * (1.0 - c + z * c.sqrt()).powi(3)
}
