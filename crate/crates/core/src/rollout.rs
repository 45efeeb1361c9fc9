//! Slot-by-slot execution of plans against realized channels, the online
//! rolling-horizon driver, the two baselines and the constraint audit.

use crate::error::{Error, Result};
use crate::physics::{aero_power, ledger_step, solar_power_actual};
use crate::polyblock::{sca_opts, solve_offline, solve_online_optimal};
use crate::problem::{ConvergenceRecord, Plan, PlanningProblem, StartState, CHECK_TOL};
use crate::rate_model::{dist2, rate, TAU_P};
use crate::sca::solve_sca;
use crate::scenario::{keyed_rng, stream, ChannelTensor, Scenario, SolverOptions};
use rand::seq::SliceRandom;
use std::time::Instant;

/// Bisection steps used when relaxing QoS after an infeasible re-plan.
const RELAX_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planner {
    Offline,
    OnlineOptimal,
    OnlineSca,
    Baseline1,
    Baseline2,
}

impl Planner {
    pub const ALL: [Planner; 5] = [
        Planner::Offline,
        Planner::OnlineOptimal,
        Planner::OnlineSca,
        Planner::Baseline1,
        Planner::Baseline2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Planner::Offline => "offline",
            Planner::OnlineOptimal => "online-opt",
            Planner::OnlineSca => "online-sca",
            Planner::Baseline1 => "baseline1",
            Planner::Baseline2 => "baseline2",
        }
    }

    pub fn parse(s: &str) -> Option<Planner> {
        Planner::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// Planner used inside the online loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnlinePlanner {
    Optimal,
    Sca,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub n: usize,
    /// Realized gains, indexed `[k * n_f + i]`.
    pub gains: Vec<f64>,
    /// Executed powers, indexed `[k * n_f + i]`.
    pub p: Vec<f64>,
    pub s: Vec<bool>,
    pub r: [f64; 3],
    pub v: [f64; 3],
    /// Realized rate per user (bit/s).
    pub rates: Vec<f64>,
    pub p_harvest: f64,
    /// Transmit power drawn from the battery, sum p / eps.
    pub p_tx: f64,
    pub p_aero: f64,
    pub p_static: f64,
    /// Energy lost to the capacity clamp (J).
    pub overflow: f64,
    /// Fraction of the rate requirement enforced in this slot (1 unless relaxed).
    pub qos_scale: f64,
}

impl SlotRecord {
    pub fn consumed(&self) -> f64 {
        self.p_tx + self.p_aero + self.p_static
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutTrace {
    pub planner: Planner,
    pub k: usize,
    pub n_f: usize,
    pub slots: Vec<SlotRecord>,
    /// Battery at slot boundaries, length N_T + 1.
    pub q: Vec<f64>,
    /// Outer iterations summed over every plan computed.
    pub iterations: usize,
    /// Convergence history of the first plan.
    pub convergence: Vec<ConvergenceRecord>,
    /// Shared subcarriers before repair, summed over plans.
    pub raw_shared: usize,
    pub replans: usize,
    pub runtime_s: f64,
}

impl RolloutTrace {
    pub fn sum_rate_bits(&self, dt: f64) -> f64 {
        self.slots.iter().map(|s| s.sum_rate() * dt).sum()
    }

    /// Average system throughput in bit/s/Hz.
    pub fn throughput(&self, w_bw: f64) -> f64 {
        let total: f64 = self.slots.iter().map(|s| s.sum_rate()).sum();
        total / (self.slots.len() as f64 * w_bw)
    }

    /// Mean sum rate per slot (bit/s).
    pub fn mean_rate_bps(&self) -> f64 {
        let total: f64 = self.slots.iter().map(|s| s.sum_rate()).sum();
        total / self.slots.len() as f64
    }

    /// (user, slot) pairs below the full rate requirement.
    pub fn qos_violations(&self, r_req: &[f64]) -> usize {
        self.slots
            .iter()
            .map(|s| {
                s.rates
                    .iter()
                    .zip(r_req)
                    .filter(|(r, req)| **r < **req * (1.0 - CHECK_TOL))
                    .count()
            })
            .sum()
    }

    pub fn relaxed_slots(&self) -> usize {
        self.slots.iter().filter(|s| s.qos_scale < 1.0).count()
    }
}

struct Executor<'a> {
    sc: &'a Scenario,
    ch: &'a ChannelTensor,
    r: [f64; 3],
    v: [f64; 3],
    q: Vec<f64>,
    slots: Vec<SlotRecord>,
}

impl<'a> Executor<'a> {
    fn new(sc: &'a Scenario, ch: &'a ChannelTensor) -> Self {
        Executor {
            sc,
            ch,
            r: sc.r_init,
            v: [0.0; 3],
            q: vec![sc.limits.q0],
            slots: Vec::new(),
        }
    }

    fn state(&self) -> StartState {
        StartState {
            r_prev: self.r,
            v_prev: self.v,
            q: *self.q.last().unwrap(),
        }
    }

    /// Execute slot `j` of `plan` as absolute slot `plan.n0 + j`.
    fn step(&mut self, plan: &Plan, j: usize, qos_scale: f64) -> Result<()> {
        let sc = self.sc;
        let n = plan.n0 + j;
        let (kk, ff) = (sc.k(), sc.n_f());
        let dt = sc.delta_t;
        let r = plan.r[j];
        let v = [
            (r[0] - self.r[0]) / dt,
            (r[1] - self.r[1]) / dt,
            (r[2] - self.r[2]) / dt,
        ];
        let mut gains = Vec::with_capacity(kk * ff);
        let mut p = Vec::with_capacity(kk * ff);
        let mut s = Vec::with_capacity(kk * ff);
        let mut rates = vec![0.0; kk];
        for k in 0..kk {
            for i in 0..ff {
                let h = self.ch.h(k, i, n);
                let pk = plan.alloc.p(k, i, j);
                let on = plan.alloc.s[plan.alloc.idx(k, i, j)];
                gains.push(h);
                p.push(pk);
                s.push(on);
                if on {
                    rates[k] += rate(pk, h, r, sc.user_pos(k), sc.constants.b);
                }
            }
        }
        let p_tx = p.iter().sum::<f64>() / sc.constants.eps_pa;
        let p_aero = aero_power(v, &sc.derived, &sc.aero);
        let p_static = sc.constants.p_static;
        let q_n = *self.q.last().unwrap();
        let st = ledger_step(sc, q_n, p_tx + p_aero + p_static, r[2], false)
            .map_err(|e| e.at_slot(n))?;
        self.q.push(st.q_next);
        self.slots.push(SlotRecord {
            n,
            gains,
            p,
            s,
            r,
            v,
            rates,
            p_harvest: st.harvested,
            p_tx,
            p_aero,
            p_static,
            overflow: st.overflow,
            qos_scale,
        });
        self.r = r;
        self.v = v;
        Ok(())
    }

    fn finish(
        self,
        planner: Planner,
        plans: &[&Plan],
        replans: usize,
        started: Instant,
    ) -> RolloutTrace {
        RolloutTrace {
            planner,
            k: self.sc.k(),
            n_f: self.sc.n_f(),
            slots: self.slots,
            q: self.q,
            iterations: plans.iter().map(|p| p.iterations).sum(),
            convergence: plans
                .first()
                .map(|p| p.convergence.clone())
                .unwrap_or_default(),
            raw_shared: plans.iter().map(|p| p.raw_shared).sum(),
            replans,
            runtime_s: started.elapsed().as_secs_f64(),
        }
    }
}

fn execute_whole(
    sc: &Scenario,
    ch: &ChannelTensor,
    plan: &Plan,
    planner: Planner,
    started: Instant,
) -> Result<RolloutTrace> {
    let mut ex = Executor::new(sc, ch);
    for j in 0..plan.r.len() {
        ex.step(plan, j, 1.0)?;
    }
    Ok(ex.finish(planner, &[plan], 1, started))
}

/// Solve once with the full channel tensor and execute verbatim.
pub fn run_offline(
    sc: &Scenario,
    ch: &ChannelTensor,
    opts: &SolverOptions,
) -> Result<RolloutTrace> {
    let started = Instant::now();
    let prob = PlanningProblem::offline(sc, ch)?;
    let plan = solve_offline(&prob, opts)?;
    execute_whole(sc, ch, &plan, Planner::Offline, started)
}

fn plan_once(prob: &PlanningProblem, planner: OnlinePlanner, opts: &SolverOptions) -> Result<Plan> {
    match planner {
        OnlinePlanner::Optimal => solve_online_optimal(prob, opts),
        OnlinePlanner::Sca => solve_sca(prob, &sca_opts(opts)),
    }
}

/// Re-plan; on infeasibility scale every rate requirement of the horizon by the
/// largest feasible common fraction found by bisection.
fn plan_relaxed(
    prob: &PlanningProblem,
    planner: OnlinePlanner,
    opts: &SolverOptions,
) -> Result<(Plan, f64)> {
    let err = match plan_once(prob, planner, opts) {
        Ok(p) => return Ok((p, 1.0)),
        Err(e) if e.is_infeasible() => e,
        Err(e) => return Err(e.at_slot(prob.n0)),
    };
    let scaled = |phi: f64| {
        let mut p = prob.clone();
        for (q, base) in p.qos.iter_mut().zip(&prob.qos) {
            *q = base * phi;
        }
        p
    };
    let mut best = match plan_once(&scaled(0.0), planner, opts) {
        Ok(p) => (p, 0.0),
        Err(_) => return Err(err.at_slot(prob.n0)),
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..RELAX_STEPS {
        let mid = 0.5 * (lo + hi);
        match plan_once(&scaled(mid), planner, opts) {
            Ok(p) => {
                lo = mid;
                best = (p, mid);
            }
            Err(_) => hi = mid,
        }
    }
    Ok(best)
}

/// Rolling horizon: reveal the current gains, re-plan over the rest of the
/// horizon with mean gains for future slots, execute, advance with the actual
/// harvest. Re-plans every `replan_every` slots.
pub fn run_online(
    sc: &Scenario,
    ch: &ChannelTensor,
    planner: OnlinePlanner,
    opts: &SolverOptions,
) -> Result<RolloutTrace> {
    let started = Instant::now();
    let every = opts.replan_every.max(1);
    let mut ex = Executor::new(sc, ch);
    let mut plans: Vec<Plan> = Vec::new();
    let mut current: Option<(Plan, f64)> = None;
    for n in 0..sc.n_t {
        if n % every == 0 || current.is_none() {
            let prob = PlanningProblem::online(sc, ch, n, ex.state())?;
            let (plan, phi) = plan_relaxed(&prob, planner, opts)?;
            plans.push(plan.clone());
            current = Some((plan, phi));
        }
        let (plan, phi) = current.as_ref().unwrap();
        ex.step(plan, n - plan.n0, *phi)?;
    }
    let kind = match planner {
        OnlinePlanner::Optimal => Planner::OnlineOptimal,
        OnlinePlanner::Sca => Planner::OnlineSca,
    };
    let refs: Vec<&Plan> = plans.iter().collect();
    let replans = plans.len();
    Ok(ex.finish(kind, &refs, replans, started))
}

/// Offline solve with the horizontal position pinned to the origin.
pub fn run_baseline1(
    sc: &Scenario,
    ch: &ChannelTensor,
    opts: &SolverOptions,
) -> Result<RolloutTrace> {
    let started = Instant::now();
    if sc.r_init[0] != 0.0 || sc.r_init[1] != 0.0 {
        return Err(Error::invalid(
            "r_init",
            "baseline 1 needs the UAV to start over the origin",
        ));
    }
    let mut prob = PlanningProblem::offline(sc, ch)?;
    prob.pins.xy_origin = true;
    let plan = solve_offline(&prob, opts)?;
    execute_whole(sc, ch, &plan, Planner::Baseline1, started)
}

/// Altitude profile of baseline 2: accelerate at half the limit up to the
/// vertical speed limit, brake in time to stop at min(L_up, z_max), then hold.
pub fn climb_profile(sc: &Scenario) -> Vec<f64> {
    let l = &sc.limits;
    let dt = sc.delta_t;
    let a = 0.5 * l.a_max;
    let vmax = l.v_max_z * (1.0 - 1e-6);
    let target = sc.solar.l_up.min(l.z_max);
    let mut z = sc.r_init[2];
    let mut v: f64 = 0.0;
    let mut out = Vec::with_capacity(sc.n_t);
    for _ in 0..sc.n_t {
        let rem = target - z;
        let mut next = if rem > 0.0 {
            (v + a * dt).min(vmax).min((a * rem).sqrt()).min(rem / dt)
        } else {
            0.0
        };
        next = next.max(v - 1.8 * a * dt).max(0.0);
        z = (z + next * dt).min(l.z_max);
        v = next;
        out.push(z);
    }
    out
}

/// Random subcarrier owners for baseline 2, indexed `[(k * n_f + i) * n_t + n]`.
/// Every user owns at least one subcarrier per slot when N_F >= K.
pub fn random_assignment(sc: &Scenario, seed: u64) -> Vec<bool> {
    let (kk, ff, nt) = (sc.k(), sc.n_f(), sc.n_t);
    let mut s = vec![false; kk * ff * nt];
    for n in 0..nt {
        let mut rng = keyed_rng(seed, stream::ASSIGNMENT, n as u64);
        let mut order: Vec<usize> = (0..ff).collect();
        order.shuffle(&mut rng);
        let mut owners: Vec<usize> = (0..ff).map(|i| i % kk).collect();
        owners.shuffle(&mut rng);
        for (slot, &i) in order.iter().enumerate() {
            let k = if ff >= kk && slot < kk {
                slot
            } else {
                owners[slot]
            };
            s[(k * ff + i) * nt + n] = true;
        }
    }
    s
}

/// Climb to a fixed altitude with a random fixed assignment, then optimize
/// the horizontal path and powers offline.
pub fn run_baseline2(
    sc: &Scenario,
    ch: &ChannelTensor,
    seed: u64,
    opts: &SolverOptions,
) -> Result<RolloutTrace> {
    let started = Instant::now();
    let mut prob = PlanningProblem::offline(sc, ch)?;
    prob.pins.z = Some(climb_profile(sc));
    prob.pins.assignment = Some(random_assignment(sc, seed));
    let plan = solve_offline(&prob, opts)?;
    execute_whole(sc, ch, &plan, Planner::Baseline2, started)
}

pub fn run(
    planner: Planner,
    sc: &Scenario,
    ch: &ChannelTensor,
    seed: u64,
    opts: &SolverOptions,
) -> Result<RolloutTrace> {
    match planner {
        Planner::Offline => run_offline(sc, ch, opts),
        Planner::OnlineOptimal => run_online(sc, ch, OnlinePlanner::Optimal, opts),
        Planner::OnlineSca => run_online(sc, ch, OnlinePlanner::Sca, opts),
        Planner::Baseline1 => run_baseline1(sc, ch, opts),
        Planner::Baseline2 => run_baseline2(sc, ch, seed, opts),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// None for horizon-level constraints.
    pub slot: Option<usize>,
    pub family: &'static str,
    pub detail: String,
}

/// Check every constraint of the original problem at the executed values.
/// Empty report means the trace is feasible.
pub fn audit_plan(trace: &RolloutTrace, sc: &Scenario, ch: &ChannelTensor) -> Vec<Violation> {
    let mut out = Vec::new();
    let l = &sc.limits;
    let c = &sc.constants;
    let dt = sc.delta_t;
    let tol = CHECK_TOL;
    let qtol = tol * l.q_max.max(1.0);
    let mut flag = |slot: Option<usize>, family: &'static str, detail: String| {
        out.push(Violation {
            slot,
            family,
            detail,
        });
    };
    if trace.q.len() != trace.slots.len() + 1 || trace.slots.len() != sc.n_t {
        flag(
            None,
            "battery_boundary",
            format!("trace covers {} of {} slots", trace.slots.len(), sc.n_t),
        );
        return out;
    }
    if (trace.q[0] - l.q0).abs() > qtol {
        flag(
            None,
            "battery_boundary",
            format!("initial battery {} J, expected {}", trace.q[0], l.q0),
        );
    }
    if *trace.q.last().unwrap() < l.q_end - qtol {
        flag(
            None,
            "battery_boundary",
            format!(
                "final battery {} J below {}",
                trace.q.last().unwrap(),
                l.q_end
            ),
        );
    }
    for (n, &q) in trace.q.iter().enumerate() {
        if q < -qtol || q > l.q_max + qtol {
            flag(
                Some(n),
                "battery_range",
                format!("battery {q} J outside [0, {}]", l.q_max),
            );
        }
    }
    let mut r_prev = sc.r_init;
    let mut v_prev = [0.0; 3];
    let (kk, ff) = (sc.k(), sc.n_f());
    for (n, s) in trace.slots.iter().enumerate() {
        let slot = Some(n);
        let step = [
            r_prev[0] + s.v[0] * dt - s.r[0],
            r_prev[1] + s.v[1] * dt - s.r[1],
            r_prev[2] + s.v[2] * dt - s.r[2],
        ];
        let scale = 1.0 + l.v_max_xy * dt;
        if step.iter().any(|e| e.abs() > tol * scale) {
            flag(
                slot,
                "kinematics",
                format!("position update off by {step:?}"),
            );
        }
        let dv = dist2(s.v, v_prev).sqrt();
        if dv > l.a_max * dt * (1.0 + tol) + 1e-9 {
            flag(
                slot,
                "acceleration",
                format!("velocity change {dv} exceeds {}", l.a_max * dt),
            );
        }
        let vxy = s.v[0].hypot(s.v[1]);
        if vxy > l.v_max_xy * (1.0 + tol) {
            flag(slot, "speed_xy", format!("horizontal speed {vxy}"));
        }
        if s.v[2].abs() > l.v_max_z * (1.0 + tol) {
            flag(slot, "speed_z", format!("vertical speed {}", s.v[2]));
        }
        let zs = tol * (l.z_max - l.z_min).max(1.0);
        if s.r[2] < l.z_min - zs || s.r[2] > l.z_max + zs {
            flag(slot, "altitude", format!("altitude {}", s.r[2]));
        }
        if s.p.iter().any(|&p| p < 0.0) {
            flag(slot, "power_sign", "negative power".into());
        }
        let ptot: f64 = s.p.iter().sum();
        if ptot > c.p_max * (1.0 + tol) {
            flag(
                slot,
                "power_budget",
                format!("total power {ptot} W exceeds {}", c.p_max),
            );
        }
        for i in 0..ff {
            let owners = (0..kk).filter(|&k| s.s[k * ff + i]).count();
            let active = (0..kk).filter(|&k| s.p[k * ff + i] > TAU_P).count();
            if owners > 1 || active > 1 {
                flag(
                    slot,
                    "exclusive_subcarrier",
                    format!("subcarrier {i} shared"),
                );
            }
            for k in 0..kk {
                if s.p[k * ff + i] > TAU_P && !s.s[k * ff + i] {
                    flag(
                        slot,
                        "assignment",
                        format!("power on unassigned subcarrier {i} of user {k}"),
                    );
                }
            }
        }
        let need = s.consumed() * dt;
        if need > trace.q[n] + qtol {
            flag(
                slot,
                "energy_available",
                format!("slot needs {need} J, battery holds {}", trace.q[n]),
            );
        }
        let harvest = solar_power_actual(s.r[2], &sc.solar);
        let raw = trace.q[n] + (harvest - s.consumed()) * dt;
        let expect = raw.min(l.q_max);
        let ledger_tol = 1e-9 * trace.q[n].abs().max(l.q_max).max(1.0);
        if (trace.q[n + 1] - expect).abs() > ledger_tol
            || (s.p_harvest - harvest).abs() > 1e-9 * harvest.max(1.0)
        {
            flag(
                slot,
                "battery_ledger",
                format!("battery {} J, ledger gives {expect}", trace.q[n + 1]),
            );
        }
        for k in 0..kk {
            let got: f64 = (0..ff)
                .filter(|&i| s.s[k * ff + i])
                .map(|i| rate(s.p[k * ff + i], ch.h(k, i, s.n), s.r, sc.user_pos(k), c.b))
                .sum();
            let req = l.r_req[k] * s.qos_scale;
            if got < req * (1.0 - tol) {
                flag(slot, "qos", format!("user {k} rate {got} below {req}"));
            }
        }
        r_prev = s.r;
        v_prev = s.v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::generate_channels;

    fn desk(k: usize, n_f: usize, n_t: usize) -> (Scenario, ChannelTensor) {
        let mut sc = Scenario::table_one(k, n_t, 5);
        sc.constants.n_f = n_f;
        let sc = sc.rederive().unwrap();
        let ch = generate_channels(&sc);
        (sc, ch)
    }

    fn quick() -> SolverOptions {
        SolverOptions {
            max_polyblock_iters: 30,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn planner_names_round_trip() {
        for p in Planner::ALL {
            assert_eq!(Planner::parse(p.name()), Some(p));
        }
        assert_eq!(Planner::parse("greedy"), None);
    }

    #[test]
    fn offline_trace_passes_audit_and_conserves_energy() {
        let (sc, ch) = desk(1, 2, 2);
        let tr = run_offline(&sc, &ch, &quick()).unwrap();
        assert!(audit_plan(&tr, &sc, &ch).is_empty());
        for (n, s) in tr.slots.iter().enumerate() {
            let lhs = tr.q[n + 1] - tr.q[n];
            let rhs = (s.p_harvest - s.consumed()) * sc.delta_t - s.overflow;
            assert!((lhs - rhs).abs() <= 1e-9 * tr.q[n].max(1.0));
        }
    }

    #[test]
    fn single_slot_online_matches_planner_objective() {
        let (sc, ch) = desk(1, 1, 1);
        let opts = quick();
        let tr = run_online(&sc, &ch, OnlinePlanner::Sca, &opts).unwrap();
        let prob = PlanningProblem::online(&sc, &ch, 0, tr_start(&sc)).unwrap();
        let plan = solve_sca(&prob, &sca_opts(&opts)).unwrap();
        let got = tr.slots[0].sum_rate();
        assert!((got - plan.sum_rate_bps(sc.constants.b)).abs() <= 1e-9 * got);
    }

    fn tr_start(sc: &Scenario) -> StartState {
        StartState {
            r_prev: sc.r_init,
            v_prev: [0.0; 3],
            q: sc.limits.q0,
        }
    }

    #[test]
    fn audit_flags_corruption() {
        let (sc, ch) = desk(1, 1, 2);
        let tr = run_offline(&sc, &ch, &quick()).unwrap();
        let mut bad = tr.clone();
        bad.q[1] = sc.limits.q_max * 2.0;
        let fams: Vec<_> = audit_plan(&bad, &sc, &ch)
            .iter()
            .map(|v| v.family)
            .collect();
        assert!(fams.contains(&"battery_range"));
        let mut bad = tr.clone();
        bad.slots[0].p[0] = sc.constants.p_max * 1.5;
        let fams: Vec<_> = audit_plan(&bad, &sc, &ch)
            .iter()
            .map(|v| v.family)
            .collect();
        assert!(fams.contains(&"power_budget"));
    }

    #[test]
    fn baseline_one_stays_over_origin() {
        let (sc, ch) = desk(1, 1, 2);
        let tr = run_baseline1(&sc, &ch, &quick()).unwrap();
        assert!(tr.slots.iter().all(|s| s.v[0] == 0.0 && s.v[1] == 0.0));
        assert!(audit_plan(&tr, &sc, &ch).is_empty());
    }

    #[test]
    fn climb_respects_limits_and_holds() {
        let mut sc = Scenario::table_one(1, 400, 1);
        sc.delta_t = 0.5;
        sc.limits.z_max = 150.0;
        let sc = sc.rederive().unwrap();
        let z = climb_profile(&sc);
        let mut prev_z = sc.r_init[2];
        let mut prev_v = 0.0;
        for &zn in &z {
            let v = (zn - prev_z) / sc.delta_t;
            assert!(v >= 0.0 && v <= sc.limits.v_max_z);
            assert!((v - prev_v).abs() <= sc.limits.a_max * sc.delta_t + 1e-12);
            prev_z = zn;
            prev_v = v;
        }
        assert!((z.last().unwrap() - 150.0).abs() < 1e-9);
    }

    #[test]
    fn random_assignment_is_exclusive_and_covers_users() {
        let (sc, _) = desk(2, 3, 4);
        let s = random_assignment(&sc, 9);
        let (kk, ff, nt) = (2, 3, 4);
        for n in 0..nt {
            for i in 0..ff {
                assert_eq!((0..kk).filter(|&k| s[(k * ff + i) * nt + n]).count(), 1);
            }
            for k in 0..kk {
                assert!((0..ff).any(|i| s[(k * ff + i) * nt + n]));
            }
        }
        assert_eq!(s, random_assignment(&sc, 9));
    }
}
