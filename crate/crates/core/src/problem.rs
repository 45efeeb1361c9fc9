//! One planning horizon: gains, start state, QoS targets, pins, the constraints
//! shared by every convex subproblem, and exact evaluation of candidate plans.

use crate::convex_core::expr::{LinExpr, Smooth};
use crate::convex_core::layout::VariableLayout;
use crate::convex_core::program::ConvexProgram;
use crate::error::{Error, Result};
use crate::physics::{aero_power, ledger_step, level_coefficient, planning_c2, sigmoid};
use crate::rate_model::{dist2, penalized_rate, recover_assignment, shared_pairs, AllocationPlan};
use crate::scenario::{ChannelTensor, Scenario};
use std::f64::consts::LN_2;

/// Smoothing of Euclidean norms, in units of the limit each norm is scaled by.
/// The smoothed norm overestimates, so the limits tighten by a relative 5e-7.
pub const NORM_EPS: f64 = 1e-3;
/// Relative slack used when checking plans against hard limits.
pub const CHECK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartState {
    /// Position before the first planned slot.
    pub r_prev: [f64; 3],
    /// Velocity of the slot before the first planned slot.
    pub v_prev: [f64; 3],
    /// Battery level at the start of the first planned slot (J).
    pub q: f64,
}

/// Variables held fixed by the baselines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pins {
    pub xy_origin: bool,
    pub z: Option<Vec<f64>>,
    /// Fixed assignment, indexed `[(k * n_f + i) * n_h + j]`.
    pub assignment: Option<Vec<bool>>,
}

#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub sc: Scenario,
    /// Absolute index of the first planned slot.
    pub n0: usize,
    pub n_h: usize,
    /// Planning gains, indexed `[(k * n_f + i) * n_h + j]`.
    pub gains: Vec<f64>,
    pub start: StartState,
    /// Rate floor per user and slot (bit/s), indexed `[k * n_h + j]`.
    pub qos: Vec<f64>,
    pub pins: Pins,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub iteration: usize,
    pub bound: f64,
    pub incumbent: f64,
    pub vertices: usize,
}

/// Exact evaluation of positions and powers over a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub v: Vec<[f64; 3]>,
    /// Battery at slot boundaries, length n_h + 1.
    pub q: Vec<f64>,
    /// Consumed power per slot.
    pub t: Vec<f64>,
    /// Sum over slots, subcarriers and users of log2(1 + SINR) with the penalty.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub n0: usize,
    pub r: Vec<[f64; 3]>,
    pub v: Vec<[f64; 3]>,
    /// Powers and assignment over the horizon (`n_t` of the plan is the horizon length).
    pub alloc: AllocationPlan,
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    pub objective: f64,
    pub convergence: Vec<ConvergenceRecord>,
    pub iterations: usize,
    /// Shared (i, n) pairs before the exclusivity repair.
    pub raw_shared: usize,
}

impl Plan {
    pub fn sum_rate_bps(&self, b: f64) -> f64 {
        b * self.objective
    }
}

impl PlanningProblem {
    pub fn new(
        sc: &Scenario,
        n0: usize,
        gains: Vec<f64>,
        start: StartState,
    ) -> Result<PlanningProblem> {
        if n0 >= sc.n_t {
            return Err(Error::Dimension(format!(
                "start slot {n0} outside horizon {}",
                sc.n_t
            )));
        }
        let n_h = sc.n_t - n0;
        if gains.len() != sc.k() * sc.n_f() * n_h {
            return Err(Error::Dimension("gain count does not match horizon".into()));
        }
        let mut qos = Vec::with_capacity(sc.k() * n_h);
        for k in 0..sc.k() {
            qos.extend(std::iter::repeat_n(sc.limits.r_req[k], n_h));
        }
        Ok(PlanningProblem {
            sc: sc.clone(),
            n0,
            n_h,
            gains,
            start,
            qos,
            pins: Pins::default(),
        })
    }

    /// Full horizon with non-causal gains.
    pub fn offline(sc: &Scenario, ch: &ChannelTensor) -> Result<PlanningProblem> {
        let (k, f, n) = (sc.k(), sc.n_f(), sc.n_t);
        check_channels(sc, ch)?;
        let mut g = Vec::with_capacity(k * f * n);
        for kk in 0..k {
            for i in 0..f {
                for j in 0..n {
                    g.push(ch.h(kk, i, j));
                }
            }
        }
        let start = StartState {
            r_prev: sc.r_init,
            v_prev: [0.0; 3],
            q: sc.limits.q0,
        };
        PlanningProblem::new(sc, 0, g, start)
    }

    /// Remaining horizon from `n0`: realized gains now, means afterwards.
    pub fn online(
        sc: &Scenario,
        ch: &ChannelTensor,
        n0: usize,
        start: StartState,
    ) -> Result<PlanningProblem> {
        check_channels(sc, ch)?;
        let (k, f) = (sc.k(), sc.n_f());
        let n_h = sc.n_t.saturating_sub(n0);
        let mut g = Vec::with_capacity(k * f * n_h);
        for kk in 0..k {
            for i in 0..f {
                for j in 0..n_h {
                    g.push(if j == 0 {
                        ch.h(kk, i, n0)
                    } else {
                        ch.mean(kk, i)
                    });
                }
            }
        }
        PlanningProblem::new(sc, n0, g, start)
    }

    pub fn k(&self) -> usize {
        self.sc.k()
    }

    pub fn n_f(&self) -> usize {
        self.sc.n_f()
    }

    pub fn h(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gains[(k * self.n_f() + i) * self.n_h + j]
    }

    pub fn qos(&self, k: usize, j: usize) -> f64 {
        self.qos[k * self.n_h + j]
    }

    pub fn user(&self, k: usize) -> [f64; 3] {
        self.sc.user_pos(k)
    }

    /// Number of lifted rate coordinates.
    pub fn n_chi(&self) -> usize {
        self.k() * self.n_f() * self.n_h
    }

    /// Index of chi for (k, i, j), slot-major.
    pub fn chi_index(&self, k: usize, i: usize, j: usize) -> usize {
        (j * self.k() + k) * self.n_f() + i
    }

    pub fn layout(&self, sca: bool) -> VariableLayout {
        VariableLayout::new(self.k(), self.n_f(), self.n_h, sca)
    }

    pub fn p_ref(&self) -> f64 {
        self.sc.derived.hover_power()
    }

    pub fn e_ref(&self) -> f64 {
        (self.p_ref() * self.sc.delta_t).max(1e-6)
    }

    pub fn reach_xy(&self, j: usize) -> f64 {
        self.sc.limits.v_max_xy * self.sc.delta_t * (j + 1) as f64
    }

    pub fn z_range(&self, j: usize) -> (f64, f64) {
        let l = &self.sc.limits;
        let dz = l.v_max_z * self.sc.delta_t * (j + 1) as f64;
        let z = self.start.r_prev[2];
        ((z - dz).max(l.z_min), (z + dz).min(l.z_max))
    }

    /// Bounds on the squared distance to user k over the positions reachable in slot j.
    pub fn theta_bounds(&self, k: usize, j: usize) -> (f64, f64) {
        let u = self.user(k);
        let r = self.start.r_prev;
        let dxy = (r[0] - u[0]).hypot(r[1] - u[1]);
        let reach = self.reach_xy(j);
        let (zlo, zhi) = self.z_range(j);
        let lo = (dxy - reach).max(0.0).powi(2) + (zlo - u[2]).powi(2);
        let hi = (dxy + reach).powi(2) + (zhi - u[2]).powi(2);
        (lo, hi * (1.0 + 1e-6) + 1.0)
    }

    pub fn theta_ref(&self, k: usize) -> f64 {
        dist2(self.start.r_prev, self.user(k)).max(1.0)
    }

    /// Largest power the platform can draw in one slot.
    pub fn t_max(&self) -> f64 {
        let d = &self.sc.derived;
        let l = &self.sc.limits;
        self.sc.constants.p_max / self.sc.constants.eps_pa
            + d.rho1 * d.mu_hover()
            + d.w_weight * l.v_max_z
            + d.rho2 * l.v_max_xy.powi(3)
            + self.sc.constants.p_static
    }

    /// Velocity component of slot j as an affine expression of the positions.
    pub fn vel(&self, lay: &VariableLayout, j: usize, axis: usize) -> LinExpr {
        let inv = 1.0 / self.sc.delta_t;
        let e = LinExpr::var(lay.r(j, axis)).scaled(inv);
        if j == 0 {
            e.plus(-self.start.r_prev[axis] * inv)
        } else {
            e.term(lay.r(j - 1, axis), -inv)
        }
    }

    fn dvel(&self, lay: &VariableLayout, j: usize, axis: usize) -> LinExpr {
        let v = self.vel(lay, j, axis);
        if j == 0 {
            v.plus(-self.start.v_prev[axis])
        } else {
            v.sub(&self.vel(lay, j - 1, axis))
        }
    }

    /// Battery level at the start of slot j.
    pub fn q_at(&self, lay: &VariableLayout, j: usize) -> LinExpr {
        if j == 0 {
            LinExpr::constant(self.start.q)
        } else {
            LinExpr::var(lay.q_next(j - 1))
        }
    }

    /// Harvest credit q[j+1] - q[j] + t[j] Delta_T - C2 Delta_T.
    pub fn credit(&self, lay: &VariableLayout, j: usize) -> LinExpr {
        let dt = self.sc.delta_t;
        let c2 = planning_c2(&self.sc.derived, &self.sc.solar);
        LinExpr::var(lay.q_next(j))
            .sub(&self.q_at(lay, j))
            .term(lay.t(j), dt)
            .plus(-c2 * dt)
    }

    /// Constraints and boxes common to the projection and SCA programs:
    /// battery floor, acceleration, speeds, altitude, power budget, distance
    /// bounds, speed bound, terminal energy and pins.
    pub fn add_shared(&self, lay: &VariableLayout, prog: &mut ConvexProgram) {
        let sc = &self.sc;
        let l = &sc.limits;
        let dt = sc.delta_t;
        let pmax = sc.constants.p_max;
        let eref = self.e_ref();
        let (kk, ff) = (self.k(), self.n_f());
        for j in 0..self.n_h {
            // energy available
            let mut g = LinExpr::var(lay.t(j)).scaled(dt).sub(&self.q_at(lay, j));
            g = g.scaled(1.0 / eref);
            prog.add_ineq("energy_available", Smooth::affine(g));
            // acceleration
            let s = 1.0 / (l.a_max * dt);
            let rows: Vec<LinExpr> = (0..3).map(|a| self.dvel(lay, j, a).scaled(s)).collect();
            prog.add_ineq(
                "acceleration",
                Smooth::affine(LinExpr::constant(-1.0)).with_norm(1.0, rows, NORM_EPS),
            );
            // speed xy
            let sv = 1.0 / l.v_max_xy;
            let rows: Vec<LinExpr> = (0..2).map(|a| self.vel(lay, j, a).scaled(sv)).collect();
            prog.add_ineq(
                "speed_xy",
                Smooth::affine(LinExpr::constant(-1.0)).with_norm(1.0, rows, NORM_EPS),
            );
            // speed z
            let vz = self.vel(lay, j, 2).scaled(1.0 / l.v_max_z);
            prog.add_ineq("speed_z", Smooth::affine(vz.clone().plus(-1.0)));
            prog.add_ineq("speed_z", Smooth::affine(vz.scaled(-1.0).plus(-1.0)));
            // power budget
            let mut g = LinExpr::constant(-1.0);
            for k in 0..kk {
                for i in 0..ff {
                    g.push(lay.p(k, i, j), 1.0 / pmax);
                }
            }
            prog.add_ineq("power_budget", Smooth::affine(g));
            // distance
            for k in 0..kk {
                let u = self.user(k);
                let th = self.theta_ref(k);
                let mut f = Smooth::affine(LinExpr::var(lay.theta(k, j)).scaled(-1.0 / th));
                for a in 0..3 {
                    f.add_scalar(
                        1.0 / th,
                        crate::convex_core::expr::Func::Square,
                        LinExpr::var(lay.r(j, a)).plus(-u[a]),
                    );
                }
                prog.add_ineq("distance", f);
            }
            // speed bound
            let rows: Vec<LinExpr> = (0..2).map(|a| self.vel(lay, j, a).scaled(sv)).collect();
            prog.add_ineq(
                "speed_bound",
                Smooth::affine(LinExpr::var(lay.vbar(j)).scaled(-sv))
                    .with_norm(1.0, rows, NORM_EPS),
            );

            // boxes
            for k in 0..kk {
                for i in 0..ff {
                    prog.set_bounds(lay.p(k, i, j), 0.0, pmax);
                }
                let (lo, hi) = self.theta_bounds(k, j);
                prog.set_bounds(lay.theta(k, j), lo, hi);
            }
            let reach = self.reach_xy(j);
            for a in 0..2 {
                let c = self.start.r_prev[a];
                prog.set_bounds(lay.r(j, a), c - reach, c + reach);
            }
            let (zlo, zhi) = self.z_range(j);
            prog.set_bounds(lay.r(j, 2), zlo, zhi);
            prog.set_bounds(lay.vbar(j), 0.0, l.v_max_xy);
            prog.set_bounds(lay.t(j), 0.0, self.t_max());
            let qlo = if j + 1 == self.n_h {
                l.q_end.max(0.0)
            } else {
                0.0
            };
            prog.set_bounds(lay.q_next(j), qlo, l.q_max);
        }
        self.add_pins(lay, prog);
    }

    fn add_pins(&self, lay: &VariableLayout, prog: &mut ConvexProgram) {
        for j in 0..self.n_h {
            if self.pins.xy_origin {
                prog.pin(lay.r(j, 0), 0.0);
                prog.pin(lay.r(j, 1), 0.0);
            }
            if let Some(z) = &self.pins.z {
                prog.pin(lay.r(j, 2), z[j]);
            }
            if let Some(s) = &self.pins.assignment {
                for k in 0..self.k() {
                    for i in 0..self.n_f() {
                        if !s[(k * self.n_f() + i) * self.n_h + j] {
                            prog.pin(lay.p(k, i, j), 0.0);
                        }
                    }
                }
            }
        }
    }

    /// Per-slot assignment chosen at the start position with an equal power
    /// split: most users meeting their rate floor first, then largest log2 sum.
    /// Enumerates all owner tuples when there are at most 4096, else greedy.
    pub fn matched_assignment(&self) -> Vec<bool> {
        let (kk, ff) = (self.k(), self.n_f());
        let per = self.sc.constants.p_max / ff as f64;
        let b = self.sc.constants.b;
        let mut s = vec![false; kk * ff * self.n_h];
        let combos = (kk as f64).powi(ff as i32);
        for j in 0..self.n_h {
            let snr =
                |k: usize, i: usize| self.h(k, i, j) * per / dist2(self.start.r_prev, self.user(k));
            let score = |owner: &[usize]| {
                let mut rates = vec![0.0; kk];
                let mut sum = 0.0;
                for (i, &k) in owner.iter().enumerate() {
                    let bits = snr(k, i).ln_1p() / LN_2;
                    rates[k] += b * bits;
                    sum += bits;
                }
                let met = (0..kk).filter(|&k| rates[k] >= self.qos(k, j)).count();
                (met, sum)
            };
            let best: Vec<usize> = if combos <= 4096.0 {
                let mut best = (vec![0; ff], (0, f64::NEG_INFINITY));
                for mut code in 0..combos as usize {
                    let owner: Vec<usize> = (0..ff)
                        .map(|_| {
                            let k = code % kk;
                            code /= kk;
                            k
                        })
                        .collect();
                    let sc = score(&owner);
                    if sc.0 > best.1 .0 || (sc.0 == best.1 .0 && sc.1 > best.1 .1) {
                        best = (owner, sc);
                    }
                }
                best.0
            } else {
                (0..ff)
                    .map(|i| {
                        (0..kk)
                            .max_by(|&a, &c| snr(a, i).total_cmp(&snr(c, i)))
                            .unwrap()
                    })
                    .collect()
            };
            for (i, &k) in best.iter().enumerate() {
                s[(k * ff + i) * self.n_h + j] = true;
            }
        }
        s
    }

    /// Subcarrier owner used by start points: the pinned owner, else round-robin.
    fn owner(&self, i: usize, j: usize) -> Option<usize> {
        match &self.pins.assignment {
            Some(s) => (0..self.k()).find(|&k| s[(k * self.n_f() + i) * self.n_h + j]),
            None => Some((i + j + self.n0) % self.k()),
        }
    }

    /// Decelerate-and-hover trajectory with an exclusive equal power split.
    /// Fills positions, speed bounds, powers, consumption, distance bounds and
    /// battery levels; other entries stay zero.
    pub fn hover_start(&self, lay: &VariableLayout) -> Vec<f64> {
        self.start_point(lay, false)
    }

    /// Like `hover_start`, but the vertical speed ramps up at half the
    /// acceleration limit and brakes in time to hold at z_max.
    pub fn climb_start(&self, lay: &VariableLayout) -> Vec<f64> {
        self.start_point(lay, true)
    }

    fn start_point(&self, lay: &VariableLayout, climb: bool) -> Vec<f64> {
        let sc = &self.sc;
        let l = &sc.limits;
        let dt = sc.delta_t;
        let mut x = vec![0.0; lay.len()];
        let mut r = self.start.r_prev;
        let v0 = self.start.v_prev;
        let speed0 = (v0[0] * v0[0] + v0[1] * v0[1] + v0[2] * v0[2]).sqrt();
        let c2 = planning_c2(&sc.derived, &sc.solar);
        let mut q = self.start.q;
        let mut vz_last = v0[2];
        for j in 0..self.n_h {
            let mut v = [0.0; 3];
            if speed0 > 0.0 {
                let s = (speed0 - 0.5 * l.a_max * dt * (j + 1) as f64).max(0.0) / speed0;
                for a in 0..3 {
                    v[a] = v0[a] * s;
                }
            }
            if climb {
                let a = 0.5 * l.a_max;
                let vz_prev = if j == 0 { v0[2] } else { vz_last };
                let rem = (l.z_max - r[2]).max(0.0);
                let up = (vz_prev + a * dt)
                    .min(l.v_max_z * (1.0 - 1e-6))
                    .min((a * rem).sqrt())
                    .min(rem / dt);
                v[2] = up.max(vz_prev - a * dt);
            }
            let mut rn = [r[0] + v[0] * dt, r[1] + v[1] * dt, r[2] + v[2] * dt];
            if self.pins.xy_origin {
                rn[0] = 0.0;
                rn[1] = 0.0;
            }
            if let Some(z) = &self.pins.z {
                rn[2] = z[j];
            }
            let (zlo, zhi) = self.z_range(j);
            rn[2] = rn[2].clamp(zlo, zhi);
            if self.pins.z.is_none() {
                // keep off the altitude box so the start is interior
                let m = (0.05 * l.a_max * dt * dt).min(0.25 * (zhi - zlo));
                rn[2] = rn[2].clamp(zlo + m, zhi - m);
            }
            let v = [
                (rn[0] - r[0]) / dt,
                (rn[1] - r[1]) / dt,
                (rn[2] - r[2]) / dt,
            ];
            vz_last = v[2];
            r = rn;
            for a in 0..3 {
                x[lay.r(j, a)] = r[a];
            }
            let sxy = v[0].hypot(v[1]);
            x[lay.vbar(j)] = smoothed_speed(sxy, l.v_max_xy);
            let aero = aero_power(v, &sc.derived, &sc.aero);
            let base = aero + sc.constants.p_static;
            let budget = (sc.constants.eps_pa * (q / dt - base)).min(sc.constants.p_max);
            let total = 0.5 * budget.max(1e-6 * sc.constants.p_max);
            let per = total / self.n_f() as f64;
            let mut ptot = 0.0;
            for i in 0..self.n_f() {
                let owner = self.owner(i, j);
                for k in 0..self.k() {
                    let p = if Some(k) == owner { per } else { 0.0 };
                    x[lay.p(k, i, j)] = p;
                    ptot += p;
                }
            }
            let t = (ptot / sc.constants.eps_pa + base) * (1.0 + 1e-9) + 1e-6;
            x[lay.t(j)] = t;
            for k in 0..self.k() {
                let (lo, hi) = self.theta_bounds(k, j);
                let d = dist2(r, self.user(k));
                x[lay.theta(k, j)] = (d * (1.0 + 1e-6) + 1e-6).clamp(lo, hi);
            }
            let gain = 0.5 * sc.derived.c1 * dt * sigmoid(r[2], &sc.solar);
            q = (q - t * dt + c2 * dt + gain - 1e-10 * (l.q_max + 1.0)).min(l.q_max * (1.0 - 1e-9));
            x[lay.q_next(j)] = q;
        }
        x
    }

    /// Positions and powers from a decision vector.
    pub fn extract(&self, lay: &VariableLayout, x: &[f64]) -> (Vec<[f64; 3]>, AllocationPlan) {
        let mut r = Vec::with_capacity(self.n_h);
        let mut alloc = AllocationPlan::zeros(self.k(), self.n_f(), self.n_h);
        for j in 0..self.n_h {
            r.push([x[lay.r(j, 0)], x[lay.r(j, 1)], x[lay.r(j, 2)]]);
            for k in 0..self.k() {
                alloc.theta[k * self.n_h + j] = x[lay.theta(k, j)];
                for i in 0..self.n_f() {
                    let idx = alloc.idx(k, i, j);
                    alloc.p_tilde[idx] = x[lay.p(k, i, j)].max(0.0);
                }
            }
        }
        (r, alloc)
    }

    /// Penalized log2 sum at exact distances.
    pub fn objective_at(&self, r: &[[f64; 3]], p: &AllocationPlan) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n_h {
            for i in 0..self.n_f() {
                let row: Vec<f64> = (0..self.k()).map(|k| p.p(k, i, j)).collect();
                for k in 0..self.k() {
                    let d = dist2(r[j], self.user(k));
                    total += penalized_rate(&row, k, d, self.h(k, i, j), self.sc.xi, 1.0);
                }
            }
        }
        total
    }

    /// Per-user rate of slot j with the penalty (bit/s).
    pub fn user_rate(&self, r: [f64; 3], p: &AllocationPlan, k: usize, j: usize) -> f64 {
        let d = dist2(r, self.user(k));
        (0..self.n_f())
            .map(|i| {
                let row: Vec<f64> = (0..self.k()).map(|kk| p.p(kk, i, j)).collect();
                penalized_rate(&row, k, d, self.h(k, i, j), self.sc.xi, self.sc.constants.b)
            })
            .sum()
    }

    /// Check every constraint of the original problem with the true aerodynamic
    /// model and the planning harvest bound; returns the exact ledger and objective.
    pub fn evaluate(&self, r: &[[f64; 3]], p: &AllocationPlan) -> Result<Evaluation> {
        let sc = &self.sc;
        let l = &sc.limits;
        let dt = sc.delta_t;
        let tol = CHECK_TOL;
        let mut v = Vec::with_capacity(self.n_h);
        let mut q = vec![self.start.q];
        let mut t = Vec::with_capacity(self.n_h);
        let mut prev_r = self.start.r_prev;
        let mut prev_v = self.start.v_prev;
        for j in 0..self.n_h {
            let vj = [
                (r[j][0] - prev_r[0]) / dt,
                (r[j][1] - prev_r[1]) / dt,
                (r[j][2] - prev_r[2]) / dt,
            ];
            let dv = ((vj[0] - prev_v[0]).powi(2)
                + (vj[1] - prev_v[1]).powi(2)
                + (vj[2] - prev_v[2]).powi(2))
            .sqrt();
            let amax = l.a_max * dt;
            if dv > amax * (1.0 + tol) + 1e-9 {
                return Err(Error::infeasible("acceleration").at_slot(self.n0 + j));
            }
            if vj[0].hypot(vj[1]) > l.v_max_xy * (1.0 + tol) {
                return Err(Error::infeasible("speed_xy").at_slot(self.n0 + j));
            }
            if vj[2].abs() > l.v_max_z * (1.0 + tol) {
                return Err(Error::infeasible("speed_z").at_slot(self.n0 + j));
            }
            let zs = tol * (l.z_max - l.z_min);
            if r[j][2] < l.z_min - zs || r[j][2] > l.z_max + zs {
                return Err(Error::infeasible("altitude").at_slot(self.n0 + j));
            }
            if self.pins.xy_origin && (r[j][0].abs() > 1e-9 || r[j][1].abs() > 1e-9) {
                return Err(Error::infeasible("pin").at_slot(self.n0 + j));
            }
            let ptot = p.slot_power(j);
            if ptot > sc.constants.p_max * (1.0 + tol) {
                return Err(Error::infeasible("power_budget").at_slot(self.n0 + j));
            }
            if p.p_tilde.iter().any(|&x| x < 0.0) {
                return Err(Error::infeasible("power_sign").at_slot(self.n0 + j));
            }
            let cons = ptot / sc.constants.eps_pa
                + aero_power(vj, &sc.derived, &sc.aero)
                + sc.constants.p_static;
            let qn = *q.last().unwrap();
            let step = ledger_step(sc, qn, cons, r[j][2], true)
                .map_err(|_| Error::infeasible("energy_available").at_slot(self.n0 + j))?;
            for k in 0..self.k() {
                let need = self.qos(k, j);
                if need > 0.0 && self.user_rate(r[j], p, k, j) < need * (1.0 - tol) {
                    return Err(Error::infeasible("qos").at_slot(self.n0 + j));
                }
            }
            q.push(step.q_next);
            t.push(cons);
            v.push(vj);
            prev_r = r[j];
            prev_v = vj;
        }
        let q_last = *q.last().unwrap();
        if q_last < l.q_end - tol * l.q_max.max(1.0) {
            return Err(Error::infeasible("battery_boundary"));
        }
        Ok(Evaluation {
            v,
            q,
            t,
            objective: self.objective_at(r, p),
        })
    }

    /// Evaluate exactly and package as a plan; the assignment is recovered by threshold.
    pub fn make_plan(&self, r: Vec<[f64; 3]>, mut alloc: AllocationPlan) -> Result<Plan> {
        let ev = self.evaluate(&r, &alloc)?;
        let raw_shared = shared_pairs(&alloc.p_tilde, alloc.k, alloc.n_f, alloc.n_t);
        alloc.s = recover_assignment(&alloc.p_tilde, alloc.k, alloc.n_f, alloc.n_t)?;
        for k in 0..alloc.k {
            for j in 0..alloc.n_t {
                alloc.theta[k * alloc.n_t + j] = dist2(r[j], self.user(k));
            }
        }
        Ok(Plan {
            n0: self.n0,
            r,
            v: ev.v,
            alloc,
            q: ev.q,
            t: ev.t,
            objective: ev.objective,
            convergence: Vec::new(),
            iterations: 0,
            raw_shared,
        })
    }

    /// Largest per-subcarrier owner by power; used to repair shared subcarriers.
    pub fn dominant_assignment(&self, alloc: &AllocationPlan) -> Vec<bool> {
        let mut s = vec![false; alloc.p_tilde.len()];
        for j in 0..self.n_h {
            for i in 0..self.n_f() {
                let mut best: Option<(usize, f64)> = None;
                for k in 0..self.k() {
                    let pk = alloc.p(k, i, j);
                    if best.is_none_or(|(_, b)| pk > b) {
                        best = Some((k, pk));
                    }
                }
                if let Some((k, _)) = best {
                    s[alloc.idx(k, i, j)] = true;
                }
            }
        }
        if let Some(pinned) = &self.pins.assignment {
            return pinned.clone();
        }
        s
    }

    /// Zero every power outside the assignment `s`.
    pub fn restrict(&self, alloc: &AllocationPlan, s: &[bool]) -> AllocationPlan {
        let mut out = alloc.clone();
        for (p, &keep) in out.p_tilde.iter_mut().zip(s) {
            if !keep {
                *p = 0.0;
            }
        }
        out
    }

    /// Copy of the problem with the assignment pinned.
    pub fn with_assignment(&self, s: Vec<bool>) -> PlanningProblem {
        let mut p = self.clone();
        p.pins.assignment = Some(s);
        p
    }

    /// Keep the dominant user per subcarrier and evaluate; `raw_shared` counts the
    /// shared pairs before the repair.
    pub fn exclusive_plan(&self, r: Vec<[f64; 3]>, alloc: &AllocationPlan) -> Result<Plan> {
        let raw = shared_pairs(&alloc.p_tilde, alloc.k, alloc.n_f, alloc.n_t);
        let s = self.dominant_assignment(alloc);
        let mut plan = self.make_plan(r, self.restrict(alloc, &s))?;
        plan.raw_shared = raw;
        Ok(plan)
    }

    /// Level-flight coefficient floor over the admissible speeds.
    pub fn mu_floor(&self) -> f64 {
        level_coefficient(self.sc.limits.v_max_xy, self.sc.derived.v_h)
    }

    /// Upper bound on the lifted coordinate for (k, i, j) from the reachable distances.
    pub fn chi_cap(&self, k: usize, i: usize, j: usize) -> f64 {
        let pinned_zero = self
            .pins
            .assignment
            .as_ref()
            .is_some_and(|s| !s[(k * self.n_f() + i) * self.n_h + j]);
        if pinned_zero {
            return 1.0;
        }
        let (lo, _) = self.theta_bounds(k, j);
        1.0 + self.h(k, i, j) * self.sc.constants.p_max / lo
    }

    /// QoS floor on sum_i log2(chi) for (k, j).
    pub fn qos_log2(&self, k: usize, j: usize) -> f64 {
        self.qos(k, j) / self.sc.constants.b
    }

    pub fn log2(x: f64) -> f64 {
        x.ln() / LN_2
    }
}

/// Smallest speed bound compatible with the smoothed norm, plus a margin.
pub fn smoothed_speed(s: f64, v_max: f64) -> f64 {
    v_max * ((s / v_max).powi(2) + NORM_EPS * NORM_EPS).sqrt() + 1e-6 * v_max
}

fn check_channels(sc: &Scenario, ch: &ChannelTensor) -> Result<()> {
    if ch.k != sc.k() || ch.n_f != sc.n_f() || ch.n_t != sc.n_t {
        return Err(Error::Dimension(
            "channel tensor does not match scenario".into(),
        ));
    }
    Ok(())
}
