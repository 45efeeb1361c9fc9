//! Successive convex approximation for the lifted planning problem.
//!
//! Each subproblem replaces the concave parts by tangents at the current point:
//! the interference log in the objective and QoS rows, the speed and curvature
//! lower bounds of the level-flight lifting, and the log of the harvest variable.
//! Every subproblem is an inner approximation, so iterates stay feasible and the
//! true objective never increases.

use crate::convex_core::barrier::{solve_min, strictly_feasible};
use crate::convex_core::expr::{Func, LinExpr, Smooth};
use crate::convex_core::layout::VariableLayout;
use crate::convex_core::program::ConvexProgram;
use crate::error::{Error, Result};
use crate::physics::sigmoid;
use crate::problem::{smoothed_speed, ConvergenceRecord, Plan, PlanningProblem};
use crate::rate_model::{dist2, AllocationPlan};
use std::f64::consts::LN_2;

/// Allowed increase of the true objective between iterates.
pub const MONOTONE_TOL: f64 = 1e-9;
/// Barrier duality gap for each subproblem; below `MONOTONE_TOL` so the
/// descent guarantee survives inexact solves.
pub const SUB_GAP: f64 = 1e-10;
const SQRT_EPS2: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOptions {
    pub eps3: f64,
    pub max_iters: usize,
}

impl Default for ScaOptions {
    fn default() -> Self {
        ScaOptions {
            eps3: 0.01,
            max_iters: 100,
        }
    }
}

/// Current linearization point and history of the true objective (minimized).
#[derive(Debug, Clone)]
pub struct ScaState {
    pub x: Vec<f64>,
    pub iteration: usize,
    pub history: Vec<f64>,
}

fn harvest_cap(prob: &PlanningProblem) -> f64 {
    prob.sc.derived.c1 * prob.sc.delta_t
}

fn speed_bounds(prob: &PlanningProblem) -> (f64, f64, f64) {
    let vxy = prob.sc.limits.v_max_xy;
    let vh4 = prob.sc.derived.v_h.powi(4);
    let gamma_max = (vxy.powi(4) + 4.0 * vh4) * 1.01;
    let b_max = (vxy * vxy * 1.01 + (gamma_max + SQRT_EPS2).sqrt()).sqrt() * 1.01 + 1e-3;
    (vxy, gamma_max, b_max)
}

/// Fill the full SCA decision vector from a trajectory and powers, with every
/// lifted variable set just inside its constraint.
pub fn point_from(prob: &PlanningProblem, r: &[[f64; 3]], alloc: &AllocationPlan) -> Vec<f64> {
    let sc = &prob.sc;
    let d = &sc.derived;
    let l = &sc.limits;
    let dt = sc.delta_t;
    let lay = prob.layout(true);
    let (vxy, _, _) = speed_bounds(prob);
    let vh4 = d.v_h.powi(4);
    let c2 = crate::physics::planning_c2(d, &sc.solar);
    let mut x = vec![0.0; lay.len()];
    let mut prev = prob.start.r_prev;
    let mut q = prob.start.q;
    for j in 0..prob.n_h {
        let v = [
            (r[j][0] - prev[0]) / dt,
            (r[j][1] - prev[1]) / dt,
            (r[j][2] - prev[2]) / dt,
        ];
        prev = r[j];
        for a in 0..3 {
            x[lay.r(j, a)] = r[j][a];
        }
        let s2 = v[0] * v[0] + v[1] * v[1];
        x[lay.vbar(j)] = smoothed_speed(s2.sqrt(), vxy);
        let lv = (s2 - 1e-3 * vxy * vxy).max(-vxy * vxy * (1.0 - 1e-6));
        let gamma = (lv * lv + 4.0 * vh4) * (1.0 - 1e-6);
        let b = (lv + (gamma + SQRT_EPS2).sqrt()).sqrt() * (1.0 - 1e-6);
        let mu = (1.0 + 1e-6) / b;
        x[lay.l(j)] = lv;
        x[lay.gamma(j)] = gamma;
        x[lay.b(j)] = b;
        x[lay.mu(j)] = mu;
        let mut ptot = 0.0;
        for k in 0..prob.k() {
            let (lo, _) = prob.theta_bounds(k, j);
            for i in 0..prob.n_f() {
                // unused entries sit just above zero, far below the penalty's reach
                let floor = (1e-9 * sc.constants.p_max)
                    .min(1e-6 * lo / (sc.xi * prob.h(k, i, j) * prob.k() as f64).max(1e-300));
                let pinned_zero = prob
                    .pins
                    .assignment
                    .as_ref()
                    .is_some_and(|s| !s[(k * prob.n_f() + i) * prob.n_h + j]);
                let p = if pinned_zero {
                    0.0
                } else {
                    alloc.p(k, i, j).max(floor)
                };
                x[lay.p(k, i, j)] = p;
                ptot += p;
            }
            let (lo, hi) = prob.theta_bounds(k, j);
            let dd = dist2(r[j], prob.user(k));
            x[lay.theta(k, j)] = (dd * (1.0 + 1e-6) + 1e-6).clamp(lo, hi);
        }
        let vbar = x[lay.vbar(j)];
        let t = (ptot / sc.constants.eps_pa
            + d.rho1 * mu
            + d.w_weight * v[2]
            + d.rho2 * vbar.powi(3)
            + sc.constants.p_static)
            * (1.0 + 1e-9)
            + 1e-6;
        x[lay.t(j)] = t;
        let full = harvest_cap(prob) * sigmoid(r[j][2], &sc.solar);
        x[lay.varpi(j)] = if harvest_cap(prob) > 0.0 {
            (0.75 * full).max(f64::MIN_POSITIVE)
        } else {
            0.5e-12 * prob.e_ref()
        };
        q = (q - t * dt + c2 * dt + 0.5 * full - 1e-10 * (l.q_max + 1.0))
            .min(l.q_max * (1.0 - 1e-9));
        x[lay.q_next(j)] = q;
    }
    x
}

/// Hover-based start lifted to the SCA variables.
/// Falls back to climbing when hovering cannot meet the energy constraints.
pub fn initial_point(prob: &PlanningProblem) -> Vec<f64> {
    let lay = prob.layout(false);
    let (r, alloc) = prob.extract(&lay, &prob.hover_start(&lay));
    if prob.evaluate(&r, &alloc).is_err() {
        let (rc, ac) = prob.extract(&lay, &prob.climb_start(&lay));
        if prob.evaluate(&rc, &ac).is_ok() || prob.pins.z.is_none() {
            return point_from(prob, &rc, &ac);
        }
    }
    point_from(prob, &r, &alloc)
}

fn slot_vel(prob: &PlanningProblem, lay: &VariableLayout, x: &[f64], j: usize) -> [f64; 3] {
    let mut v = [0.0; 3];
    for (a, va) in v.iter_mut().enumerate() {
        *va = prob.vel(lay, j, a).eval(x);
    }
    v
}

/// Interference-plus-distance term xi * H_k * sum_{j != k} p_j + theta_k.
fn interference(
    prob: &PlanningProblem,
    lay: &VariableLayout,
    k: usize,
    i: usize,
    j: usize,
) -> LinExpr {
    let h = prob.h(k, i, j);
    let mut e = LinExpr::var(lay.theta(k, j));
    for kk in 0..prob.k() {
        if kk != k {
            e.push(lay.p(kk, i, j), prob.sc.xi * h);
        }
    }
    e
}

/// -log2 of the signal-plus-interference term, plus the tangent of log2 of the
/// interference term at `x_m`. Normalized by theta_ref inside both logs.
fn rate_surrogate(
    prob: &PlanningProblem,
    lay: &VariableLayout,
    x_m: &[f64],
    k: usize,
    i: usize,
    j: usize,
) -> Result<Smooth> {
    let th = prob.theta_ref(k);
    let g = interference(prob, lay, k, i, j);
    let f = g.clone().term(lay.p(k, i, j), prob.h(k, i, j));
    let gm = g.eval(x_m);
    if !(gm > 0.0) {
        return Err(Error::Degenerate(format!(
            "interference term {gm} at slot {j}"
        )));
    }
    let mut e = g.scaled(1.0 / (gm * LN_2));
    e = e.plus((gm / th).ln() / LN_2 - 1.0 / LN_2);
    Ok(Smooth::affine(e).with(1.0 / LN_2, Func::NegLog, f.scaled(1.0 / th)))
}

/// True objective being minimized: minus the penalized log2 sum at the theta variables.
pub fn true_objective(prob: &PlanningProblem, x: &[f64]) -> f64 {
    let lay = prob.layout(true);
    let mut total = 0.0;
    for j in 0..prob.n_h {
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                let g = interference(prob, &lay, k, i, j).eval(x);
                let f = g + prob.h(k, i, j) * x[lay.p(k, i, j)];
                total -= (f / g).ln() / LN_2;
            }
        }
    }
    total
}

pub fn build_sca_subproblem(prob: &PlanningProblem, x_m: &[f64]) -> Result<ConvexProgram> {
    let lay = prob.layout(true);
    if x_m.len() != lay.len() {
        return Err(Error::Dimension(format!(
            "linearization point has {} entries, layout needs {}",
            x_m.len(),
            lay.len()
        )));
    }
    let sc = &prob.sc;
    let d = &sc.derived;
    let pref = prob.p_ref();
    let eref = prob.e_ref();
    let (vxy, gamma_max, b_max) = speed_bounds(prob);
    let vh4 = d.v_h.powi(4);
    let cap = harvest_cap(prob);
    let mut prog = ConvexProgram::new(lay.len());
    prob.add_shared(&lay, &mut prog);

    let mut obj = Smooth::default();
    for j in 0..prob.n_h {
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                let s = rate_surrogate(prob, &lay, x_m, k, i, j)?;
                obj.affine.add_scaled(&s.affine, 1.0);
                obj.atoms.extend(s.atoms);
            }
        }
    }
    prog.objective = obj;

    for j in 0..prob.n_h {
        // consumption with the lifted level-flight coefficient
        let mut e = LinExpr::constant(sc.constants.p_static)
            .term(lay.t(j), -1.0)
            .term(lay.mu(j), d.rho1);
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                e.push(lay.p(k, i, j), 1.0 / sc.constants.eps_pa);
            }
        }
        e.add_scaled(&prob.vel(&lay, j, 2), d.w_weight);
        let mut g = Smooth::affine(e).with(d.rho2, Func::CubePos, LinExpr::var(lay.vbar(j)));
        g.scale(1.0 / pref);
        prog.add_ineq("consumption", g);

        // mu >= 1/b
        let mut g = Smooth::affine(LinExpr::var(lay.mu(j)).scaled(-1.0)).with(
            1.0,
            Func::Recip,
            LinExpr::var(lay.b(j)),
        );
        g.scale(1.0 / d.mu_hover());
        prog.add_ineq("level_coeff", g);

        // b^2 <= l + sqrt(gamma)
        let mut g = Smooth::affine(LinExpr::var(lay.l(j)).scaled(-1.0))
            .with(1.0, Func::Square, LinExpr::var(lay.b(j)))
            .with(
                1.0,
                Func::NegSqrt { eps2: SQRT_EPS2 },
                LinExpr::var(lay.gamma(j)),
            );
        g.scale(1.0 / (2.0 * d.v_h * d.v_h));
        prog.add_ineq("level_lift", g);

        // l <= |v_xy|^2, tangent at v_m
        let vm = slot_vel(prob, &lay, x_m, j);
        let mut e = LinExpr::var(lay.l(j)).plus(vm[0] * vm[0] + vm[1] * vm[1]);
        for (a, &va) in vm.iter().take(2).enumerate() {
            e.add_scaled(&prob.vel(&lay, j, a), -2.0 * va);
        }
        prog.add_ineq("speed_lift", Smooth::affine(e.scaled(1.0 / (vxy * vxy))));

        // gamma <= l^2 + 4 V_h^4, tangent at l_m
        let lm = x_m[lay.l(j)];
        let e = LinExpr::var(lay.gamma(j))
            .term(lay.l(j), -2.0 * lm)
            .plus(lm * lm - 4.0 * vh4);
        prog.add_ineq("gamma_lift", Smooth::affine(e.scaled(1.0 / (4.0 * vh4))));

        // harvest credit below the harvest variable
        let e = prob.credit(&lay, j).term(lay.varpi(j), -1.0);
        prog.add_ineq("harvest_credit", Smooth::affine(e.scaled(1.0 / eref)));

        // ln varpi <= ln(C1 Delta) + ln sigma(z), tangent of ln varpi at varpi_m
        if cap > 0.0 {
            let wm = x_m[lay.varpi(j)];
            if !(wm > 0.0) {
                return Err(Error::Degenerate(format!(
                    "harvest variable {wm} at slot {j}"
                )));
            }
            let kc = sc.solar.k_c;
            let e = LinExpr::var(lay.varpi(j))
                .scaled(1.0 / wm)
                .plus(wm.ln() - 1.0 - cap.ln());
            let g = Smooth::affine(e).with(
                1.0,
                Func::Softplus,
                LinExpr::var(lay.r(j, 2))
                    .scaled(-kc)
                    .plus(kc * sc.solar.alpha),
            );
            prog.add_ineq("harvest", g);
            prog.set_bounds(lay.varpi(j), 0.0, cap * (1.0 + 1e-9));
        } else {
            prog.set_bounds(lay.varpi(j), 0.0, 1e-12 * eref);
        }

        // QoS with the same surrogate as the objective
        for k in 0..prob.k() {
            let need = prob.qos_log2(k, j);
            if need <= 0.0 {
                continue;
            }
            let mut g = Smooth::affine(LinExpr::constant(need));
            for i in 0..prob.n_f() {
                let s = rate_surrogate(prob, &lay, x_m, k, i, j)?;
                g.affine.add_scaled(&s.affine, 1.0);
                g.atoms.extend(s.atoms);
            }
            g.scale(1.0 / need.max(1.0));
            prog.add_ineq("qos", g);
        }

        prog.set_bounds(lay.mu(j), 0.0, 2.0 * d.mu_hover());
        prog.set_bounds(lay.b(j), 0.0, b_max);
        prog.set_bounds(lay.l(j), -vxy * vxy, vxy * vxy * 1.01);
        prog.set_bounds(lay.gamma(j), 0.0, gamma_max);
    }
    Ok(prog)
}

/// Coordinates watched by the stopping rule: powers, velocities, harvest,
/// distance bounds and squared speeds, each divided by its natural scale so no
/// block dominates the norm.
fn watched(prob: &PlanningProblem, x: &[f64]) -> Vec<f64> {
    let lay = prob.layout(true);
    let l = &prob.sc.limits;
    let pmax = prob.sc.constants.p_max;
    let cap = harvest_cap(prob).max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for j in 0..prob.n_h {
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                out.push(x[lay.p(k, i, j)] / pmax);
            }
            out.push(x[lay.theta(k, j)] / prob.theta_ref(k));
        }
        let v = slot_vel(prob, &lay, x, j);
        out.extend([v[0] / l.v_max_xy, v[1] / l.v_max_xy, v[2] / l.v_max_z]);
        out.push(x[lay.varpi(j)] / cap);
        out.push(x[lay.l(j)] / (l.v_max_xy * l.v_max_xy));
    }
    out
}

fn rel_change(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Iterate subproblems from `x0` until the watched coordinates settle.
pub fn sca_solve(prob: &PlanningProblem, x0: Vec<f64>, opts: &ScaOptions) -> Result<ScaState> {
    let mut x = x0;
    let probe = build_sca_subproblem(prob, &x)?;
    if !strictly_feasible(&probe, &x) {
        // phase I on the first subproblem; its solution is a valid start
        let res = solve_min(&probe, SUB_GAP, Some(&x))?;
        x = res.point;
    }
    let mut state = ScaState {
        history: vec![true_objective(prob, &x)],
        x,
        iteration: 0,
    };
    while state.iteration < opts.max_iters {
        let prog = build_sca_subproblem(prob, &state.x)?;
        let res = solve_min(&prog, SUB_GAP, Some(&state.x))?;
        let before = *state.history.last().unwrap();
        let after = true_objective(prob, &res.point);
        if after > before + MONOTONE_TOL {
            return Err(Error::NonMonotone { before, after });
        }
        let change = rel_change(&watched(prob, &state.x), &watched(prob, &res.point));
        state.x = res.point;
        state.iteration += 1;
        state.history.push(after);
        if change <= opts.eps3 {
            break;
        }
    }
    Ok(state)
}

/// Pin the dominant user per subcarrier and re-solve once; falls back to
/// zeroing the minority powers when the pinned subproblem has no interior.
pub fn repair(prob: &PlanningProblem, state: &ScaState) -> Result<Plan> {
    let lay = prob.layout(true);
    let (r, alloc) = prob.extract(&lay, &state.x);
    let s = prob.dominant_assignment(&alloc);
    let pinned = prob.with_assignment(s.clone());
    let mut warm = state.x.clone();
    for j in 0..prob.n_h {
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                if !s[alloc.idx(k, i, j)] {
                    warm[lay.p(k, i, j)] = 0.0;
                }
            }
        }
    }
    let solved = build_sca_subproblem(&pinned, &warm)
        .and_then(|prog| solve_min(&prog, SUB_GAP, Some(&warm)));
    let mut plan = match solved {
        Ok(res) => {
            let (r2, a2) = pinned.extract(&lay, &res.point);
            match pinned.make_plan(r2, pinned.restrict(&a2, &s)) {
                Ok(p) => p,
                Err(_) => prob.exclusive_plan(r.clone(), &alloc)?,
            }
        }
        Err(_) => prob.exclusive_plan(r.clone(), &alloc)?,
    };
    plan.raw_shared =
        crate::rate_model::shared_pairs(&alloc.p_tilde, alloc.k, alloc.n_f, alloc.n_t);
    Ok(plan)
}

fn finish(prob: &PlanningProblem, state: &ScaState) -> Result<Plan> {
    let mut plan = repair(prob, state)?;
    plan.iterations = state.iteration;
    plan.convergence = state
        .history
        .iter()
        .enumerate()
        .map(|(m, &f)| ConvergenceRecord {
            iteration: m,
            bound: f64::NAN,
            incumbent: -f,
            vertices: 0,
        })
        .collect();
    Ok(plan)
}

/// SCA planner from the hover start.
pub fn solve_sca(prob: &PlanningProblem, opts: &ScaOptions) -> Result<Plan> {
    let state = sca_solve(prob, initial_point(prob), opts)?;
    finish(prob, &state)
}

/// SCA started from an existing plan.
pub fn polish(prob: &PlanningProblem, start: &Plan, opts: &ScaOptions) -> Result<Plan> {
    let state = sca_solve(prob, point_from(prob, &start.r, &start.alloc), opts)?;
    finish(prob, &state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_core::program::check_gradients;
    use crate::scenario::{generate_channels, Scenario};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn desk(k: usize, n_f: usize, n_t: usize) -> PlanningProblem {
        let mut sc = Scenario::table_one(k, n_t, 3);
        sc.constants.n_f = n_f;
        let sc = sc.rederive().unwrap();
        let ch = generate_channels(&sc);
        PlanningProblem::offline(&sc, &ch).unwrap()
    }

    #[test]
    fn initial_point_is_interior() {
        let prob = desk(2, 2, 3);
        let x = initial_point(&prob);
        let prog = build_sca_subproblem(&prob, &x).unwrap();
        let (worst, fam) = prog.max_violation(&x);
        let lay = prob.layout(true);
        let edge: Vec<_> = (0..x.len())
            .filter(|&i| !(x[i] > prog.lower[i] && x[i] < prog.upper[i]))
            .map(|i| lay.decode(i))
            .collect();
        assert!(strictly_feasible(&prog, &x), "{fam} {worst} {edge:?}");
    }

    #[test]
    fn surrogate_is_tight_and_above_objective() {
        let prob = desk(2, 2, 2);
        let x = initial_point(&prob);
        let prog = build_sca_subproblem(&prob, &x).unwrap();
        let at = prog.objective.value(&x).unwrap();
        assert!((at - true_objective(&prob, &x)).abs() < 1e-9 * at.abs().max(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lay = prob.layout(true);
        for _ in 0..200 {
            let mut y = x.clone();
            for j in 0..prob.n_h {
                for k in 0..prob.k() {
                    for i in 0..prob.n_f() {
                        y[lay.p(k, i, j)] = rng.gen_range(0.0..prob.sc.constants.p_max);
                    }
                    y[lay.theta(k, j)] *= rng.gen_range(0.5..2.0);
                }
            }
            let s = prog.objective.value(&y).unwrap();
            assert!(s >= true_objective(&prob, &y) - 1e-9 * s.abs().max(1.0));
        }
    }

    #[test]
    fn harvest_and_speed_tangents_are_inner() {
        // ln varpi <= ln varpi_m + (varpi - varpi_m)/varpi_m and |v|^2, l^2 above their tangents
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let wm: f64 = rng.gen_range(1e-6..10.0);
            let w: f64 = rng.gen_range(1e-6..10.0);
            assert!(w.ln() <= wm.ln() + (w - wm) / wm + 1e-12);
            let (a, b): (f64, f64) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            assert!(a * a >= 2.0 * b * a - b * b - 1e-9);
        }
    }

    #[test]
    fn subproblem_gradients_match() {
        let prob = desk(2, 2, 3);
        let x = initial_point(&prob);
        let prog = build_sca_subproblem(&prob, &x).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let y: Vec<f64> = (0..prog.n_vars)
                .map(|i| {
                    let (lo, hi) = (prog.lower[i], prog.upper[i]);
                    lo + (hi - lo) * rng.gen_range(0.05..0.95)
                })
                .collect();
            let bad = check_gradients(&prog, &y, 1e-5);
            assert!(bad.is_empty(), "{bad:?}");
        }
    }

    #[test]
    fn sca_descends_and_plan_is_exclusive() {
        let prob = desk(2, 2, 3);
        let opts = ScaOptions::default();
        let state = sca_solve(&prob, initial_point(&prob), &opts).unwrap();
        for w in state.history.windows(2) {
            assert!(w[1] <= w[0] + MONOTONE_TOL);
        }
        let plan = finish(&prob, &state).unwrap();
        assert!(plan.objective > 0.0);
        crate::rate_model::recover_assignment(&plan.alloc.p_tilde, 2, 2, 3).unwrap();
    }
}
