//! Two-sided Wilcoxon signed-rank test for paired samples.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Largest number of non-zero differences for which the null distribution
/// is enumerated exactly.
pub const EXACT_LIMIT: usize = 25;
pub const MIN_PAIRS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    pub p_value: f64,
    /// sum of the ranks of positive differences `a - b`
    pub w_plus: f64,
    pub w_minus: f64,
    /// pairs with a non-zero difference
    pub n_effective: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WilcoxonError {
    LengthMismatch { left: usize, right: usize },
    TooFewPairs { n: usize },
    NotFinite,
}

impl fmt::Display for WilcoxonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WilcoxonError::LengthMismatch { left, right } => {
                write!(f, "paired samples differ in length ({left} vs {right})")
            }
            WilcoxonError::TooFewPairs { n } => {
                write!(f, "need at least {MIN_PAIRS} pairs, got {n}")
            }
            WilcoxonError::NotFinite => f.write_str("samples contain a non-finite value"),
        }
    }
}

impl core::error::Error for WilcoxonError {}

/// Tests whether the paired differences `a[i] - b[i]` are symmetric about 0.
///
/// Zero differences are dropped and tied magnitudes get midranks. Up to
/// [`EXACT_LIMIT`] remaining pairs the p-value comes from the exact null
/// distribution (which accounts for the midranks); beyond that a normal
/// approximation with tie and continuity corrections is used.
pub fn paired_wilcoxon(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, WilcoxonError> {
    if a.len() != b.len() {
        return Err(WilcoxonError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.len() < MIN_PAIRS {
        return Err(WilcoxonError::TooFewPairs { n: a.len() });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(WilcoxonError::NotFinite);
    }
    let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(WilcoxonResult { p_value: 1.0, w_plus: 0.0, w_minus: 0.0, n_effective: 0, exact: true });
    }
    d.sort_by(|x, y| libm::fabs(*x).total_cmp(&libm::fabs(*y)));

    // doubled midranks keep everything integral
    let mut rank2 = vec![0u64; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && libm::fabs(d[j + 1]) == libm::fabs(d[i]) {
            j += 1;
        }
        let r = (i + 1 + j + 1) as u64;
        rank2[i..=j].fill(r);
        ties.push((j - i + 1) as f64);
        i = j + 1;
    }
    let w2_plus: u64 = d.iter().zip(&rank2).filter(|(x, _)| **x > 0.0).map(|(_, r)| r).sum();
    let total2 = (n * (n + 1)) as u64;
    let w_plus = w2_plus as f64 / 2.0;
    let w_minus = (total2 - w2_plus) as f64 / 2.0;

    let (p, exact) = if n <= EXACT_LIMIT {
        (exact_p(&rank2, w2_plus), true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = ties.iter().map(|t| t * t * t - t).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let z = (libm::fabs(w_plus - mean) - 0.5).max(0.0) / libm::sqrt(var);
        (libm::erfc(z / core::f64::consts::SQRT_2), false)
    };
    Ok(WilcoxonResult { p_value: p.min(1.0), w_plus, w_minus, n_effective: n, exact })
}

/// Two-sided p-value from the exact null distribution of the doubled
/// statistic: every sign pattern is equally likely.
fn exact_p(rank2: &[u64], w2: u64) -> f64 {
    let total: u64 = rank2.iter().sum();
    let mut counts = vec![0f64; total as usize + 1];
    counts[0] = 1.0;
    let mut reach = 0usize;
    for &r in rank2 {
        let r = r as usize;
        for k in (0..=reach).rev() {
            if counts[k] != 0.0 {
                counts[k + r] += counts[k];
            }
        }
        reach += r;
    }
    let all = libm::pow(2.0, rank2.len() as f64);
    let lower: f64 = counts[..=w2 as usize].iter().sum::<f64>() / all;
    let upper: f64 = counts[w2 as usize..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}
