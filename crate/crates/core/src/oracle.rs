//! Brute-force reference solver for tiny instances: depth-first enumeration of
//! gridded accelerations, subcarrier owners and power levels, with the exact
//! constraint checks of the planning problem.

use crate::error::{Error, Result};
use crate::physics::{aero_power, ledger_step};
use crate::problem::{PlanningProblem, CHECK_TOL};
use crate::rate_model::{dist2, AllocationPlan};
use std::collections::BTreeMap;
use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleGrid {
    /// Levels per acceleration axis over [-a_max, a_max].
    pub accel_levels: usize,
    /// Power levels per subcarrier over [0, P_max].
    pub power_levels: usize,
    /// Largest admissible state-action space.
    pub cap: f64,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid {
            accel_levels: 7,
            power_levels: 5,
            cap: 1e7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best sum over slots, subcarriers and users of log2(1 + SNR).
    pub objective: f64,
    pub r: Vec<[f64; 3]>,
    pub alloc: AllocationPlan,
    /// Bound on how far the continuous optimum can exceed `objective`.
    pub gap: f64,
    pub leaves: u64,
}

/// Size of the enumerated space, (G^3 K^F P^F)^N.
pub fn action_space_size(prob: &PlanningProblem, grid: &OracleGrid) -> f64 {
    let g = grid.accel_levels as f64;
    let per = g.powi(3)
        * (prob.k() as f64).powi(prob.n_f() as i32)
        * (grid.power_levels as f64).powi(prob.n_f() as i32);
    per.powi(prob.n_h as i32)
}

struct Alloc {
    owner: Vec<usize>,
    power: Vec<f64>,
    total: f64,
}

struct Search<'a> {
    prob: &'a PlanningProblem,
    accels: Vec<[f64; 3]>,
    allocs: Vec<Alloc>,
    best: f64,
    best_path: Vec<([f64; 3], usize)>,
    path: Vec<([f64; 3], usize)>,
    rejected: BTreeMap<&'static str, u64>,
    leaves: u64,
}

impl<'a> Search<'a> {
    fn reject(&mut self, family: &'static str) {
        *self.rejected.entry(family).or_insert(0) += 1;
    }

    fn dfs(&mut self, j: usize, r_prev: [f64; 3], v_prev: [f64; 3], q: f64, acc: f64) {
        let prob = self.prob;
        let sc = &prob.sc;
        let l = &sc.limits;
        let dt = sc.delta_t;
        if j == prob.n_h {
            self.leaves += 1;
            if q < l.q_end - CHECK_TOL * l.q_max.max(1.0) {
                self.reject("battery_boundary");
            } else if acc > self.best {
                self.best = acc;
                self.best_path = self.path.clone();
            }
            return;
        }
        for ai in 0..self.accels.len() {
            let a = self.accels[ai];
            let v = [
                v_prev[0] + a[0] * dt,
                v_prev[1] + a[1] * dt,
                v_prev[2] + a[2] * dt,
            ];
            if v[0].hypot(v[1]) > l.v_max_xy * (1.0 + 1e-12) {
                self.reject("speed_xy");
                continue;
            }
            if v[2].abs() > l.v_max_z * (1.0 + 1e-12) {
                self.reject("speed_z");
                continue;
            }
            let r = [
                r_prev[0] + v[0] * dt,
                r_prev[1] + v[1] * dt,
                r_prev[2] + v[2] * dt,
            ];
            if r[2] < l.z_min || r[2] > l.z_max {
                self.reject("altitude");
                continue;
            }
            if prob.pins.xy_origin && (r[0] != 0.0 || r[1] != 0.0) {
                self.reject("pin");
                continue;
            }
            if let Some(z) = &prob.pins.z {
                if (r[2] - z[j]).abs() > 1e-9 {
                    self.reject("pin");
                    continue;
                }
            }
            let base = aero_power(v, &sc.derived, &sc.aero) + sc.constants.p_static;
            let d2: Vec<f64> = (0..prob.k()).map(|k| dist2(r, prob.user(k))).collect();
            for ci in 0..self.allocs.len() {
                let al = &self.allocs[ci];
                if let Some(s) = &prob.pins.assignment {
                    let clash = (0..prob.n_f()).any(|i| {
                        al.power[i] > 0.0 && !s[(al.owner[i] * prob.n_f() + i) * prob.n_h + j]
                    });
                    if clash {
                        continue;
                    }
                }
                let cons = base + al.total / sc.constants.eps_pa;
                let step = match ledger_step(sc, q, cons, r[2], true) {
                    Ok(s) => s,
                    Err(_) => {
                        self.reject("energy_available");
                        continue;
                    }
                };
                let mut gain = 0.0;
                let mut rates = vec![0.0; prob.k()];
                for i in 0..prob.n_f() {
                    let k = al.owner[i];
                    let bits = (prob.h(k, i, j) * al.power[i] / d2[k]).ln_1p() / LN_2;
                    gain += bits;
                    rates[k] += sc.constants.b * bits;
                }
                let qos_ok = (0..prob.k()).all(|k| {
                    let need = prob.qos(k, j);
                    need <= 0.0 || rates[k] >= need * (1.0 - CHECK_TOL)
                });
                if !qos_ok {
                    self.reject("qos");
                    continue;
                }
                self.path.push((r, ci));
                self.dfs(j + 1, r, v, step.q_next, acc + gain);
                self.path.pop();
            }
        }
    }
}

fn accel_grid(a_max: f64, levels: usize) -> Vec<[f64; 3]> {
    let vals: Vec<f64> = if levels <= 1 {
        vec![0.0]
    } else {
        (0..levels)
            .map(|m| -a_max + 2.0 * a_max * m as f64 / (levels - 1) as f64)
            .collect()
    };
    let mut out = Vec::new();
    for &x in &vals {
        for &y in &vals {
            for &z in &vals {
                if (x * x + y * y + z * z).sqrt() <= a_max * (1.0 + 1e-12) {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out
}

fn alloc_grid(k: usize, n_f: usize, levels: usize, p_max: f64) -> Vec<Alloc> {
    let step = if levels > 1 {
        p_max / (levels - 1) as f64
    } else {
        0.0
    };
    let mut out = Vec::new();
    let combos = (k * levels).pow(n_f as u32);
    for mut code in 0..combos {
        let mut owner = vec![0; n_f];
        let mut power = vec![0.0; n_f];
        let mut redundant = false;
        for i in 0..n_f {
            let c = code % (k * levels);
            code /= k * levels;
            owner[i] = c / levels;
            power[i] = (c % levels) as f64 * step;
            // an idle subcarrier has no owner worth distinguishing
            redundant |= power[i] == 0.0 && owner[i] != 0;
        }
        let total: f64 = power.iter().sum();
        if !redundant && total <= p_max * (1.0 + 1e-12) {
            out.push(Alloc {
                owner,
                power,
                total,
            });
        }
    }
    out
}

/// Bound on the loss from gridding. Position errors grow as e_a dt^2 n(n+1)/2
/// with e_a = sqrt(3) times the acceleration spacing; each active rate term
/// changes by at most 2/(d ln 2) per metre. When the energy budget cannot bind
/// every slot runs at full power and the power grid costs nothing; otherwise
/// one power step per term is charged.
pub fn discretization_gap(prob: &PlanningProblem, grid: &OracleGrid) -> f64 {
    let sc = &prob.sc;
    let l = &sc.limits;
    let dt = sc.delta_t;
    let h_a = if grid.accel_levels > 1 {
        2.0 * l.a_max / (grid.accel_levels - 1) as f64
    } else {
        l.a_max
    };
    let e_a = 3f64.sqrt() * h_a;
    let d_min = (0..prob.k())
        .map(|k| (l.z_min - prob.user(k)[2]).abs())
        .fold(f64::INFINITY, f64::min)
        .max(1e-9);
    let lip = 2.0 / (d_min * LN_2);
    let worst_use = prob.t_max() * dt * prob.n_h as f64;
    let energy_free = prob.start.q - worst_use >= l.q_end.max(0.0);
    let p_step = if grid.power_levels > 1 {
        sc.constants.p_max / (grid.power_levels - 1) as f64
    } else {
        sc.constants.p_max
    };
    let mut gap = 0.0;
    for j in 0..prob.n_h {
        let n = (j + 1) as f64;
        let pos = e_a * dt * dt * n * (n + 1.0) / 2.0;
        gap += prob.n_f() as f64 * lip * pos;
        if !energy_free {
            for i in 0..prob.n_f() {
                let h = (0..prob.k()).map(|k| prob.h(k, i, j)).fold(0.0, f64::max);
                gap += h * p_step / (d_min * d_min * LN_2);
            }
        }
    }
    gap
}

pub fn solve_oracle(prob: &PlanningProblem, grid: &OracleGrid) -> Result<OracleResult> {
    let size = action_space_size(prob, grid);
    if !(size <= grid.cap) {
        return Err(Error::OracleCap {
            size,
            cap: grid.cap,
        });
    }
    let sc = &prob.sc;
    let mut s = Search {
        prob,
        accels: accel_grid(sc.limits.a_max, grid.accel_levels),
        allocs: alloc_grid(prob.k(), prob.n_f(), grid.power_levels, sc.constants.p_max),
        best: f64::NEG_INFINITY,
        best_path: Vec::new(),
        path: Vec::new(),
        rejected: BTreeMap::new(),
        leaves: 0,
    };
    s.dfs(0, prob.start.r_prev, prob.start.v_prev, prob.start.q, 0.0);
    if s.best_path.len() != prob.n_h {
        let family = s
            .rejected
            .iter()
            .max_by_key(|(_, c)| **c)
            .map(|(f, _)| f.to_string())
            .unwrap_or_else(|| "energy_available".to_string());
        return Err(Error::infeasible(family));
    }
    let mut alloc = AllocationPlan::zeros(prob.k(), prob.n_f(), prob.n_h);
    let mut r = Vec::with_capacity(prob.n_h);
    for (j, &(rj, ci)) in s.best_path.iter().enumerate() {
        let al = &s.allocs[ci];
        for i in 0..prob.n_f() {
            if al.power[i] > 0.0 {
                let idx = alloc.idx(al.owner[i], i, j);
                alloc.p_tilde[idx] = al.power[i];
                alloc.s[idx] = true;
            }
        }
        for k in 0..prob.k() {
            alloc.theta[k * prob.n_h + j] = dist2(rj, prob.user(k));
        }
        r.push(rj);
    }
    Ok(OracleResult {
        objective: s.best,
        r,
        alloc,
        gap: discretization_gap(prob, grid),
        leaves: s.leaves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_channels, Scenario};

    fn tiny() -> PlanningProblem {
        let mut sc = Scenario::table_one(1, 2, 4);
        sc.constants.n_f = 1;
        sc.delta_t = 1.0;
        let sc = sc.rederive().unwrap();
        let ch = generate_channels(&sc);
        PlanningProblem::offline(&sc, &ch).unwrap()
    }

    #[test]
    fn accel_grid_stays_in_ball_and_has_zero() {
        let g = accel_grid(2.0, 7);
        assert!(g
            .iter()
            .all(|a| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt() <= 2.0 + 1e-12));
        assert!(g.contains(&[0.0, 0.0, 0.0]));
    }

    #[test]
    fn best_plan_is_feasible_and_matches_objective() {
        let prob = tiny();
        let res = solve_oracle(&prob, &OracleGrid::default()).unwrap();
        let ev = prob.evaluate(&res.r, &res.alloc).unwrap();
        assert!((ev.objective - res.objective).abs() <= 1e-9 * res.objective.abs());
        assert!(res.gap > 0.0);
    }

    #[test]
    fn zero_power_grid_gives_zero_throughput() {
        let mut prob = tiny();
        prob.qos.iter_mut().for_each(|q| *q = 0.0);
        let grid = OracleGrid {
            power_levels: 1,
            ..OracleGrid::default()
        };
        let res = solve_oracle(&prob, &grid).unwrap();
        assert_eq!(res.objective, 0.0);
    }

    #[test]
    fn infeasible_final_battery_is_reported() {
        let mut prob = tiny();
        prob.sc.limits.q_end = prob.sc.limits.q_max;
        match solve_oracle(&prob, &OracleGrid::default()) {
            Err(Error::Infeasible { family }) => assert_eq!(family, "battery_boundary"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cap_is_enforced() {
        let prob = tiny();
        let grid = OracleGrid {
            cap: 10.0,
            ..OracleGrid::default()
        };
        assert!(matches!(
            solve_oracle(&prob, &grid),
            Err(Error::OracleCap { .. })
        ));
    }
}
