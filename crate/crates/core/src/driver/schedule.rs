//! Accuracy parameters, the outer sampling schedule, the threshold sweep and
//! packing sizes.

use serde::{Deserialize, Serialize};

use super::DriverError;

/// Solves `(1+x)³/(1−x) = 1+ε` for `x` by bisection on `(0, min(1, ε))`.
pub fn solve_epsilon_prime(epsilon: f64) -> Result<f64, DriverError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(DriverError::InvalidEpsilon(epsilon));
    }
    let f = |x: f64| (1.0 + x).powi(3) / (1.0 - x) - (1.0 + epsilon);
    // f(0) = -ε < 0 and f(ε/4) >= 0 for ε <= 1, so the root lies below ε/4.
    let (mut lo, mut hi) = (0.0f64, epsilon / 4.0);
    while hi - lo > 1e-15 * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(hi).abs() < f(lo).abs() { hi } else { lo })
}

/// `ε`, `ε'`, the trial count `k` of a tree test and its threshold `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub k: u64,
    pub theta: f64,
}

impl EpsilonSchedule {
    /// `k = ⌈128 ln n / ε'²⌉`.
    pub fn new(epsilon: f64, n: usize) -> Result<Self, DriverError> {
        let epsilon_prime = solve_epsilon_prime(epsilon)?;
        let ln_n = (n.max(2) as f64).ln();
        let k = (128.0 * ln_n / (epsilon_prime * epsilon_prime)).ceil() as u64;
        Ok(Self::with_trials(epsilon, epsilon_prime, k))
    }

    /// A schedule with an explicit trial count.
    pub fn with_trials(epsilon: f64, epsilon_prime: f64, k: u64) -> Self {
        let k = k.max(1);
        let kf = k as f64;
        EpsilonSchedule { epsilon, epsilon_prime, k, theta: kf / 2.0 + epsilon_prime * kf / 8.0 }
    }

    /// Largest integer count that passes `Σ Y ≤ θ`.
    pub fn threshold_count(&self) -> u64 {
        self.theta.floor() as u64
    }

    /// `20 ln n / ε'²`, the unit of the outer schedule.
    pub fn base(&self, n: usize) -> f64 {
        20.0 * (n.max(2) as f64).ln() / (self.epsilon_prime * self.epsilon_prime)
    }
}

/// One outer iteration: `λ` is assumed in `[x_lo, x_hi]` and `H_i` keeps each
/// unit edge with probability `p = 2^-i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterStep {
    pub i: u32,
    pub x_lo: f64,
    pub x_hi: f64,
    pub p: f64,
}

/// `X_0 = 1`, `X_{i+1} = 2^i · 20 ln n/ε'²`; iterations continue while the
/// previous upper end is at most `nW`.
pub fn outer_schedule(n: usize, max_weight: u64, sched: &EpsilonSchedule) -> Vec<OuterStep> {
    let base = sched.base(n);
    let limit = n as f64 * max_weight.max(1) as f64;
    let mut steps = Vec::new();
    let mut x_lo = 1.0;
    for i in 0u32.. {
        let x_hi = base * (i as f64).exp2();
        steps.push(OuterStep { i, x_lo, x_hi, p: (-(i as f64)).exp2() });
        if x_hi > limit {
            break;
        }
        x_lo = x_hi;
    }
    steps
}

/// `γ = x_lo, (1+ε')x_lo, …` while `γ ≤ ((1+ε')/(1−ε'))·x_hi`.
pub fn gamma_sweep(x_lo: f64, x_hi: f64, epsilon_prime: f64) -> Vec<f64> {
    let stop = (1.0 + epsilon_prime) / (1.0 - epsilon_prime) * x_hi;
    let mut gammas = vec![x_lo];
    let mut g = x_lo;
    loop {
        g *= 1.0 + epsilon_prime;
        if g > stop {
            break;
        }
        gammas.push(g);
    }
    gammas
}

/// Default refusal threshold of [`PackingPolicy::Paper`].
pub const PAPER_COUNT_CAP: u64 = 10_000;

/// How many trees to pack in `H_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum PackingPolicy {
    /// `⌈96((1+ε')·20 ln n/ε'² + 1)⁷ ln³ m⌉`, refused above `cap`.
    Paper {
        cap: u64,
    },
    /// `⌈c_pack · λ̂ · ln n⌉` with `λ̂ = min((1+ε')·20 ln n/ε'², lambda_cap)`.
    Karger {
        c_pack: f64,
        lambda_cap: f64,
    },
    Fixed {
        count: usize,
    },
}

impl Default for PackingPolicy {
    fn default() -> Self {
        PackingPolicy::Karger { c_pack: 2.0, lambda_cap: 1.0 }
    }
}

impl PackingPolicy {
    pub fn paper() -> Self {
        PackingPolicy::Paper { cap: PAPER_COUNT_CAP }
    }

    /// Trees for a sample with `n` vertices and `m_multi` unit edges.
    pub fn count(&self, n: usize, m_multi: u64, sched: &EpsilonSchedule) -> Result<usize, DriverError> {
        let ln_n = (n.max(2) as f64).ln();
        let count = match *self {
            PackingPolicy::Paper { cap } => {
                let lambda = (1.0 + sched.epsilon_prime) * sched.base(n);
                let ln_m = (m_multi.max(1) as f64).ln();
                let raw = (96.0 * (lambda + 1.0).powi(7) * ln_m.powi(3)).ceil();
                if raw.is_nan() || raw > cap as f64 {
                    return Err(DriverError::PackingTooLarge { count: raw, cap });
                }
                raw as usize
            }
            PackingPolicy::Karger { c_pack, lambda_cap } => {
                let lambda = ((1.0 + sched.epsilon_prime) * sched.base(n)).min(lambda_cap);
                (c_pack * lambda * ln_n).ceil() as usize
            }
            PackingPolicy::Fixed { count } => count,
        };
        Ok(count.max(1))
    }
}
