//! Continuum objects: reduced trees with random edge lengths, stationary
//! Poisson marks and their transition kernel, the half-normal mixing
//! variable, the tail estimator of the cut intensity, and quadrature oracles
//! for pair survival.

mod line_breaking;
mod marks;
pub mod quadrature;

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal};

pub use line_breaking::sample_block_sizes;
pub use marks::{
    block_frequencies, evolve_marks, init_marks, partition_from_marks, survival_probability, Atom,
    MarkSet, SamplePartition,
};

use crate::error::{invalid, Result};
use crate::random_trees::ReducedTree;

/// A draw of the cut intensity for age `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingVariable {
    pub r: f64,
    pub t: f64,
}

impl MixingVariable {
    pub fn sample<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<Self> {
        Ok(Self { r: sample_reflected_bm(t, rng)?, t })
    }
}

/// `|sqrt(t) Z|`, redrawn on the null event `Z = 0`.
pub fn sample_reflected_bm<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let r = (t.sqrt() * z).abs();
        if r > 0.0 {
            return Ok(r);
        }
    }
}

/// Reduced tree spanned by `i` random leaves of the continuum tree.
///
/// The shape grows leaf by leaf: leaf `k + 1` subdivides a uniform existing
/// edge, which makes the final binary shape uniform. Lengths are
/// `S * (E_1, .., E_m) / sum(E)` with `E_j` unit exponentials and
/// `S^2 ~ chi^2(2(i - 1))`. Node `k < i` carries label `k + 1`; node `i + j`
/// is the `j`-th branch point.
pub fn sample_reduced_tree<R: Rng + ?Sized>(i: usize, rng: &mut R) -> Result<ReducedTree> {
    if i < 2 {
        return Err(invalid(format!("need at least two leaves, got {i}")));
    }
    let mut edges = Vec::with_capacity(2 * i - 3);
    edges.push((0usize, 1usize));
    for leaf in 2..i {
        let branch = i + leaf - 2;
        let e = rng.random_range(0..edges.len());
        let (a, b) = edges[e];
        edges[e] = (a, branch);
        edges.push((branch, b));
        edges.push((branch, leaf));
    }
    let chi = ChiSquared::new(2.0 * (i - 1) as f64).expect("positive degrees of freedom");
    let total = loop {
        let s2: f64 = chi.sample(rng);
        if s2 > 0.0 {
            break s2.sqrt();
        }
    };
    let weights: Vec<f64> = (0..edges.len())
        .map(|_| loop {
            let w: f64 = Exp1.sample(rng);
            if w > 0.0 {
                break w;
            }
        })
        .collect();
    let sum: f64 = weights.iter().sum();
    let lengths = weights.iter().map(|w| total * w / sum).collect();
    ReducedTree::new(i, 2 * i - 2, edges, lengths)
}

/// Mean of `sqrt(2 / (pi m_k k^2))` over ranks `k` in `window` (1-based).
///
/// `masses` must be decreasing but need not sum to one, so exact tail
/// sequences can be fed in directly; pass `MassPartition::as_slice` for
/// simulated partitions.
pub fn estimate_r(masses: &[f64], window: RangeInclusive<usize>) -> Result<f64> {
    let (lo, hi) = window.into_inner();
    if lo == 0 || lo > hi {
        return Err(invalid(format!("empty or zero-based rank window {lo}..={hi}")));
    }
    if masses.windows(2).any(|w| w[0] < w[1]) {
        return Err(invalid("masses must be ranked in decreasing order"));
    }
    let mut sum = 0.0;
    for k in lo..=hi {
        let m = masses.get(k - 1).copied().unwrap_or(0.0);
        if m <= 0.0 {
            return Err(invalid(format!("no mass at rank {k} (partition has {} blocks)", masses.len())));
        }
        sum += (2.0 / (PI * m * (k * k) as f64)).sqrt();
    }
    Ok(sum / (hi - lo + 1) as f64)
}

fn joint_survival(r: f64, len: f64, delta: f64) -> f64 {
    let births = if delta == 0.0 || r == 0.0 { 0.0 } else { 1.0 - survival_probability(r, delta) };
    (-r * len * (1.0 + births)).exp()
}

/// Probability that a path of length `len` carries no mark at time `s` nor
/// at `s + delta`, under stationary marks of intensity `r`.
pub fn pair_joint_survival(r: f64, len: f64, delta: f64) -> Result<f64> {
    let ok = r.is_finite() && r > 0.0 && len.is_finite() && len > 0.0 && delta >= 0.0;
    if !ok {
        return Err(invalid(format!("bad arguments r={r}, len={len}, delta={delta}")));
    }
    Ok(joint_survival(r, len, delta))
}

fn half_normal_density(r: f64, t: f64) -> f64 {
    (2.0 / (t * PI)).sqrt() * (-r * r / (2.0 * t)).exp()
}

/// Truncation box and tolerance for the mixture integrals. Beyond `8 sqrt(t)`
/// the half-normal weight is below 2e-15; beyond 10 the Rayleigh weight is
/// `exp(-50)`.
const LENGTH_CUTOFF: f64 = 10.0;
const RATE_CUTOFF_SDS: f64 = 8.0;
const QUAD_TOL: f64 = 1e-10;

/// Probability that two random leaves share a block at both `s` and
/// `s + delta`, mixed over the leaf distance and the half-normal intensity.
pub fn mixed_pair_prob(t: f64, delta: f64) -> Result<f64> {
    mixed_pair_quadrature(t, delta).map(|q| q.value)
}

/// [`mixed_pair_prob`] with its error estimate and evaluation count.
pub fn mixed_pair_quadrature(t: f64, delta: f64) -> Result<quadrature::Quadrature> {
    if !(t.is_finite() && t > 0.0) || !(delta.is_finite() && delta >= 0.0) {
        return Err(invalid(format!("bad arguments t={t}, delta={delta}")));
    }
    let q = quadrature::integrate_2d(
        |r, len| joint_survival(r, len, delta) * len * (-len * len / 2.0).exp() * half_normal_density(r, t),
        (0.0, RATE_CUTOFF_SDS * t.sqrt()),
        (0.0, LENGTH_CUTOFF),
        QUAD_TOL,
    );
    Ok(q)
}

/// `E[exp(-s / 2R_t)]`: the chance that a given mark (or urn ball) present
/// at age `t` is still there `s` rescaled steps later.
pub fn mixed_survival(t: f64, s: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) || !(s.is_finite() && s >= 0.0) {
        return Err(invalid(format!("bad arguments t={t}, s={s}")));
    }
    let q = quadrature::integrate(
        |r| {
            let keep = if s == 0.0 { 1.0 } else if r == 0.0 { 0.0 } else { survival_probability(r, s) };
            keep * half_normal_density(r, t)
        },
        0.0,
        RATE_CUTOFF_SDS * t.sqrt(),
        QUAD_TOL,
    );
    Ok(q.value)
}

/// Upper tail `P(Z > a)` of a standard normal.
fn normal_sf(a: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(a / std::f64::consts::SQRT_2)
}

/// Closed-form inner integral used to check the quadrature:
/// `int_0^inf l exp(-a l - l^2/2) dl = 1 - a sqrt(2 pi) exp(a^2/2) P(Z > a)`.
pub fn rayleigh_laplace(a: f64) -> f64 {
    if a > 30.0 {
        // Asymptotic series; the direct form cancels catastrophically here.
        let a2 = a * a;
        return (1.0 - 3.0 / a2 + 15.0 / (a2 * a2)) / a2;
    }
    1.0 - a * (2.0 * PI).sqrt() * (a * a / 2.0).exp() * normal_sf(a)
}
