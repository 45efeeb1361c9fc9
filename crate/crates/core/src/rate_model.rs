//! Achievable rates, the exclusivity-penalized rate, assignment recovery and QoS.

use crate::error::{Error, Result};
use crate::scenario::{rician_power_variance, ChannelTensor, Scenario};
use std::f64::consts::LN_2;

/// Power threshold below which an entry counts as unassigned (W).
pub const TAU_P: f64 = 1e-9;

pub fn dist2(r: [f64; 3], rk: [f64; 3]) -> f64 {
    (r[0] - rk[0]).powi(2) + (r[1] - rk[1]).powi(2) + (r[2] - rk[2]).powi(2)
}

pub fn rate(p: f64, h: f64, r: [f64; 3], rk: [f64; 3], b: f64) -> f64 {
    b * (h * p / dist2(r, rk)).ln_1p() / LN_2
}

/// Rate of user `k` on one subcarrier with cross-user power inflated by `xi`;
/// all powers reach receiver `k` through its own gain `h_k`.
pub fn penalized_rate(p_row: &[f64], k: usize, theta_k: f64, h_k: f64, xi: f64, b: f64) -> f64 {
    let others: f64 = p_row
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != k)
        .map(|(_, p)| p)
        .sum();
    b * (h_k * p_row[k] / (xi * h_k * others + theta_k)).ln_1p() / LN_2
}

/// Upper bound on the expected rate obtained by moving the expectation inside the log.
pub fn expected_rate_upper(p: f64, eh: f64, r: [f64; 3], rk: [f64; 3], b: f64) -> f64 {
    rate(p, eh, r, rk, b)
}

/// Ceiling on the Jensen gap of `expected_rate_upper` for unit-mean Rician fading.
pub fn expected_rate_gap_bound(kappa: f64, b: f64) -> f64 {
    b * rician_power_variance(kappa) / LN_2
}

/// Combined powers and recovered assignment, indexed `[(k * n_f + i) * n_t + n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPlan {
    pub k: usize,
    pub n_f: usize,
    pub n_t: usize,
    pub p_tilde: Vec<f64>,
    pub s: Vec<bool>,
    /// Squared-distance bounds, indexed `[k * n_t + n]`.
    pub theta: Vec<f64>,
}

impl AllocationPlan {
    pub fn zeros(k: usize, n_f: usize, n_t: usize) -> AllocationPlan {
        AllocationPlan {
            k,
            n_f,
            n_t,
            p_tilde: vec![0.0; k * n_f * n_t],
            s: vec![false; k * n_f * n_t],
            theta: vec![0.0; k * n_t],
        }
    }

    pub fn idx(&self, k: usize, i: usize, n: usize) -> usize {
        (k * self.n_f + i) * self.n_t + n
    }

    pub fn p(&self, k: usize, i: usize, n: usize) -> f64 {
        self.p_tilde[self.idx(k, i, n)]
    }

    pub fn slot_power(&self, n: usize) -> f64 {
        let mut total = 0.0;
        for k in 0..self.k {
            for i in 0..self.n_f {
                total += self.p(k, i, n);
            }
        }
        total
    }
}

/// Threshold combined powers into the binary assignment.
pub fn recover_assignment(
    p_tilde: &[f64],
    k_users: usize,
    n_f: usize,
    n_t: usize,
) -> Result<Vec<bool>> {
    let idx = |k: usize, i: usize, n: usize| (k * n_f + i) * n_t + n;
    let mut s = vec![false; p_tilde.len()];
    for n in 0..n_t {
        for i in 0..n_f {
            let mut owner: Option<usize> = None;
            for k in 0..k_users {
                if p_tilde[idx(k, i, n)] > TAU_P {
                    if let Some(a) = owner {
                        return Err(Error::Exclusivity { i, n, a, b: k });
                    }
                    owner = Some(k);
                    s[idx(k, i, n)] = true;
                }
            }
        }
    }
    Ok(s)
}

/// Count (i, n) pairs with more than one user above the threshold.
pub fn shared_pairs(p_tilde: &[f64], k_users: usize, n_f: usize, n_t: usize) -> usize {
    let mut count = 0;
    for n in 0..n_t {
        for i in 0..n_f {
            let active = (0..k_users)
                .filter(|k| p_tilde[(k * n_f + i) * n_t + n] > TAU_P)
                .count();
            if active > 1 {
                count += 1;
            }
        }
    }
    count
}

/// Realized per-user rate of slot `n` (bit/s), summed over assigned subcarriers.
pub fn user_slot_rate(
    sc: &Scenario,
    alloc: &AllocationPlan,
    gains: &ChannelTensor,
    gain_slot: usize,
    r: [f64; 3],
    k: usize,
    n: usize,
) -> f64 {
    let b = sc.constants.b;
    (0..alloc.n_f)
        .filter(|&i| alloc.s[alloc.idx(k, i, n)])
        .map(|i| {
            rate(
                alloc.p(k, i, n),
                gains.h(k, i, gain_slot),
                r,
                sc.user_pos(k),
                b,
            )
        })
        .sum()
}

/// Per-(k, n) QoS table, indexed `[k * n_t + n]`.
pub fn qos_satisfied(
    sc: &Scenario,
    alloc: &AllocationPlan,
    positions: &[[f64; 3]],
    gains: &ChannelTensor,
    r_req: &[f64],
) -> Vec<bool> {
    let mut out = Vec::with_capacity(alloc.k * alloc.n_t);
    for k in 0..alloc.k {
        for n in 0..alloc.n_t {
            let rk = user_slot_rate(sc, alloc, gains, n, positions[n], k, n);
            out.push(rk >= r_req[k]);
        }
    }
    out
}
