//! Validation statistics: tie-aware Spearman correlation, phi coefficient,
//! rank-biserial correlation, and the Mann-Whitney U test.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::util::average_ranks;

/// Counts of a 2x2 contingency table. `n11` counts pairs where both binary
/// variables are 1, `n10` where the first is 1 and the second 0, and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContingencyTable2x2 {
    pub n11: u64,
    pub n10: u64,
    pub n01: u64,
    pub n00: u64,
}

impl ContingencyTable2x2 {
    pub fn new(n11: u64, n10: u64, n01: u64, n00: u64) -> Self {
        ContingencyTable2x2 { n11, n10, n01, n00 }
    }
}

/// Continuous observations paired with binary group labels
/// (1 = heterogeneous by convention).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledValues {
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl LabeledValues {
    pub fn new(values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if values.len() != labels.len() {
            return Err(Error::InvalidConfig(format!(
                "{} values but {} labels",
                values.len(),
                labels.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidConfig(format!(
                "label {bad} is not binary"
            )));
        }
        Ok(LabeledValues { values, labels })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    fn group_sizes(&self) -> (usize, usize) {
        let n1 = self.labels.iter().filter(|&&l| l == 1).count();
        (n1, self.labels.len() - n1)
    }
}

fn has_ties(values: &[f64]) -> bool {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.windows(2).any(|w| w[0] == w[1])
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}

/// Spearman rank correlation of two paired sequences.
///
/// Tie-free inputs use the closed form `1 - 6 sum(d_i^2) / (n (n^2 - 1))`;
/// inputs with ties fall back to the Pearson correlation of average ranks.
/// The two routes agree to machine precision on tie-free data.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(
            "need at least two paired observations".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue);
    }

    let rx = average_ranks(x);
    let ry = average_ranks(y);
    if has_ties(x) || has_ties(y) {
        return pearson(&rx, &ry);
    }
    let n = x.len() as f64;
    let sum_d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0)))
}

/// Phi coefficient of a 2x2 contingency table:
/// `(n11 n00 - n10 n01) / sqrt(n1. n0. n.1 n.0)`.
pub fn phi(t: &ContingencyTable2x2) -> Result<f64> {
    let (n11, n10, n01, n00) = (t.n11 as f64, t.n10 as f64, t.n01 as f64, t.n00 as f64);
    let row1 = n11 + n10;
    let row0 = n01 + n00;
    let col1 = n11 + n01;
    let col0 = n10 + n00;
    if row1 == 0.0 || row0 == 0.0 || col1 == 0.0 || col0 == 0.0 {
        return Err(Error::UndefinedCorrelation("zero marginal".into()));
    }
    Ok((n11 * n00 - n10 * n01) / (row1 * row0 * col1 * col0).sqrt())
}

/// Rank-biserial correlation, reported in both circulating conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankBiserial {
    /// `R1/n1 - R0/n0`: the mean-rank difference, not bounded by 1.
    pub mean_rank_diff: f64,
    /// `2 (R1/n1 - R0/n0) / (n1 + n0)`, the standard coefficient in
    /// [-1, 1]; equals `1 - 2 U0 / (n1 n0)`.
    pub normalized: f64,
}

/// Rank-biserial correlation between a continuous variable and a binary
/// grouping, with pooled average ranks.
pub fn rank_biserial(data: &LabeledValues) -> Result<RankBiserial> {
    let (n1, n0) = data.group_sizes();
    if n1 == 0 {
        return Err(Error::EmptyGroup(1));
    }
    if n0 == 0 {
        return Err(Error::EmptyGroup(0));
    }
    let ranks = average_ranks(data.values());
    let r1: f64 = ranks
        .iter()
        .zip(data.labels())
        .filter(|(_, &l)| l == 1)
        .map(|(r, _)| r)
        .sum();
    let r0: f64 = ranks.iter().sum::<f64>() - r1;
    let mean_rank_diff = r1 / n1 as f64 - r0 / n0 as f64;
    Ok(RankBiserial {
        mean_rank_diff,
        normalized: 2.0 * mean_rank_diff / (n1 + n0) as f64,
    })
}

/// How the Mann-Whitney p-value should be obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MwuModeRequest {
    /// Exact when `n1 + n0 <= 12` and the pooled values are tie-free,
    /// normal approximation otherwise.
    #[default]
    Auto,
    Exact,
    NormalApprox,
}

/// Which route actually produced the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MwuMode {
    Exact,
    NormalApprox,
}

/// Mann-Whitney U statistic of the label-1 group with its two-sided
/// p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MwuResult {
    pub u_statistic: f64,
    pub p_value: f64,
    pub mode: MwuMode,
}

const EXACT_AUTO_LIMIT: usize = 12;
const EXACT_HARD_LIMIT: usize = 20;

/// Two-sided Mann-Whitney U test of the two labelled groups.
///
/// The reported statistic is `U1 = R1 - n1 (n1 + 1) / 2` for the label-1
/// group. Exact mode enumerates the permutation null distribution over the
/// observed (possibly tied) ranks; the normal approximation uses the
/// tie-corrected variance with a 0.5 continuity correction.
pub fn mann_whitney_u(data: &LabeledValues, mode: MwuModeRequest) -> Result<MwuResult> {
    let (n1, n0) = data.group_sizes();
    if n1 == 0 {
        return Err(Error::EmptyGroup(1));
    }
    if n0 == 0 {
        return Err(Error::EmptyGroup(0));
    }
    let n = n1 + n0;
    let ranks = average_ranks(data.values());
    let r1: f64 = ranks
        .iter()
        .zip(data.labels())
        .filter(|(_, &l)| l == 1)
        .map(|(r, _)| r)
        .sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;

    let tied = has_ties(data.values());
    let exact = match mode {
        MwuModeRequest::Auto => n <= EXACT_AUTO_LIMIT && !tied,
        MwuModeRequest::Exact => {
            if n > EXACT_HARD_LIMIT {
                return Err(Error::InvalidConfig(format!(
                    "exact mode enumerates C({n}, {n1}) arrangements; limited to {EXACT_HARD_LIMIT} observations"
                )));
            }
            true
        }
        MwuModeRequest::NormalApprox => false,
    };

    let p_value = if exact {
        exact_two_sided_p(&ranks, n1, u1)
    } else {
        normal_two_sided_p(&ranks, n1, n0, u1)
    };
    Ok(MwuResult {
        u_statistic: u1,
        p_value,
        mode: if exact {
            MwuMode::Exact
        } else {
            MwuMode::NormalApprox
        },
    })
}

/// Enumerates every assignment of `n1` of the observed ranks to group 1 and
/// counts how extreme the observed U is on both sides.
fn exact_two_sided_p(ranks: &[f64], n1: usize, u_observed: f64) -> f64 {
    let n = ranks.len();
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let mut le = 0u64;
    let mut ge = 0u64;
    let mut total = 0u64;
    let eps = 1e-9;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let mut rank_sum = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            rank_sum += ranks[i];
            bits &= bits - 1;
        }
        let u = rank_sum - offset;
        total += 1;
        if u <= u_observed + eps {
            le += 1;
        }
        if u >= u_observed - eps {
            ge += 1;
        }
    }
    let p = 2.0 * (le.min(ge) as f64) / total as f64;
    p.min(1.0)
}

fn normal_two_sided_p(ranks: &[f64], n1: usize, n0: usize, u1: f64) -> f64 {
    let n = (n1 + n0) as f64;
    let (n1, n0) = (n1 as f64, n0 as f64);
    let mean = n1 * n0 / 2.0;

    // Tie correction: sum of (t^3 - t) over tie groups of the pooled sample.
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let variance = n1 * n0 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((u1 - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
}
