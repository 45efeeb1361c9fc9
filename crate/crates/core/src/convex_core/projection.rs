//! Feasibility program behind the polyblock projection.
//!
//! For a vertex chi and a scaling lambda the lifted rate targets are
//! chi_hat = 1 + lambda (chi - 1); the program asks for a plan whose every
//! penalized SINR reaches chi_hat - 1. The energy model is a convex outer
//! approximation (convex minorant of the level-flight term, concave majorant of
//! the harvest sigmoid), so feasibility here is necessary for feasibility of the
//! exact problem.

use super::expr::{Func, LinExpr, Smooth};
use super::layout::VariableLayout;
use super::program::ConvexProgram;
use crate::error::{Error, Result};
use crate::physics::{LevelEnvelope, SigmoidEnvelope};
use crate::problem::PlanningProblem;
use std::sync::Arc;

/// Targets at or below this are treated as absent rate rows.
pub const CHI_FLOOR: f64 = 1e-12;

pub fn build_projection_program(
    prob: &PlanningProblem,
    chi: &[f64],
    lambda_bar: f64,
) -> Result<ConvexProgram> {
    if chi.len() != prob.n_chi() {
        return Err(Error::Dimension(format!(
            "vertex has {} rate coordinates, horizon needs {}",
            chi.len(),
            prob.n_chi()
        )));
    }
    if !(0.0..=1.0).contains(&lambda_bar) {
        return Err(Error::invalid("lambda_bar", "must lie in [0, 1]"));
    }
    let lay = prob.layout(false);
    let mut prog = ConvexProgram::new(lay.len());
    prob.add_shared(&lay, &mut prog);
    add_energy_relaxation(prob, &lay, &mut prog);
    for j in 0..prob.n_h {
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                let c = chi[prob.chi_index(k, i, j)];
                let target = lambda_bar * (c - 1.0);
                if target <= CHI_FLOOR {
                    continue;
                }
                prog.add_ineq("rate_target", rate_row(prob, &lay, k, i, j, target));
            }
        }
    }
    Ok(prog)
}

/// target * (xi * sum_{j != k} H p_j + theta_k) - H p_k <= 0, scaled.
fn rate_row(
    prob: &PlanningProblem,
    lay: &VariableLayout,
    k: usize,
    i: usize,
    j: usize,
    target: f64,
) -> Smooth {
    let h = prob.h(k, i, j);
    let s = 1.0 / (target * prob.theta_ref(k));
    let mut e = LinExpr::var(lay.theta(k, j)).scaled(target * s);
    for kk in 0..prob.k() {
        if kk != k {
            e.push(lay.p(kk, i, j), target * prob.sc.xi * h * s);
        }
    }
    e.push(lay.p(k, i, j), -h * s);
    Smooth::affine(e)
}

/// Relaxed consumption and harvest rows.
fn add_energy_relaxation(prob: &PlanningProblem, lay: &VariableLayout, prog: &mut ConvexProgram) {
    let sc = &prob.sc;
    let d = &sc.derived;
    let l = &sc.limits;
    let dt = sc.delta_t;
    let pref = prob.p_ref();
    let eref = prob.e_ref();
    let level = Arc::new(LevelEnvelope::new(d.v_h, l.v_max_xy));
    let harvest = Arc::new(SigmoidEnvelope::new(&sc.solar, l.z_min, l.z_max));
    for j in 0..prob.n_h {
        let mut e = LinExpr::constant(sc.constants.p_static).term(lay.t(j), -1.0);
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                e.push(lay.p(k, i, j), 1.0 / sc.constants.eps_pa);
            }
        }
        e.add_scaled(&prob.vel(lay, j, 2), d.w_weight);
        let g = Smooth::affine(e)
            .with(
                d.rho1,
                Func::Level(level.clone()),
                LinExpr::var(lay.vbar(j)),
            )
            .with(d.rho2, Func::CubePos, LinExpr::var(lay.vbar(j)));
        let mut g = g;
        g.scale(1.0 / pref);
        prog.add_ineq("consumption", g);

        let mut g = Smooth::affine(prob.credit(lay, j)).with(
            d.c1 * dt,
            Func::NegEnvelope(harvest.clone()),
            LinExpr::var(lay.r(j, 2)),
        );
        g.scale(1.0 / eref);
        prog.add_ineq("harvest", g);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_core::barrier::solve_feasibility;
    use crate::convex_core::program::check_gradients;
    use crate::scenario::{generate_channels, Scenario};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn desk(k: usize, n_f: usize, n_t: usize) -> PlanningProblem {
        let mut sc = Scenario::table_one(k, n_t, 11);
        sc.constants.n_f = n_f;
        let sc = sc.rederive().unwrap();
        let ch = generate_channels(&sc);
        PlanningProblem::offline(&sc, &ch).unwrap()
    }

    fn chi_top(prob: &PlanningProblem) -> Vec<f64> {
        let mut chi = vec![1.0; prob.n_chi()];
        for j in 0..prob.n_h {
            for k in 0..prob.k() {
                for i in 0..prob.n_f() {
                    chi[prob.chi_index(k, i, j)] = prob.chi_cap(k, i, j);
                }
            }
        }
        chi
    }

    #[test]
    fn single_slot_tally() {
        let prob = desk(1, 1, 1);
        let prog = build_projection_program(&prob, &chi_top(&prob), 0.5).unwrap();
        let c = prog.family_counts();
        let want = [
            ("consumption", 1),
            ("energy_available", 1),
            ("harvest", 1),
            ("acceleration", 1),
            ("speed_xy", 1),
            ("speed_z", 2),
            ("power_budget", 1),
            ("distance", 1),
            ("speed_bound", 1),
            ("rate_target", 1),
        ];
        assert_eq!(c.len(), want.len());
        for (f, n) in want {
            assert_eq!(c[f], n, "{f}");
        }
        // p, r (3), vbar, t, theta, q: all boxed
        assert_eq!(prog.n_vars, 8);
        assert!(prog.lower.iter().chain(&prog.upper).all(|b| b.is_finite()));
        assert!(prog.eq.is_empty());
    }

    #[test]
    fn zero_scaling_is_feasible_and_drops_rate_rows() {
        let prob = desk(2, 2, 2);
        let prog = build_projection_program(&prob, &chi_top(&prob), 0.0).unwrap();
        assert!(!prog.family_counts().contains_key("rate_target"));
        let f = solve_feasibility(&prog, 1e-9, None).unwrap();
        assert!(f.feasible);
        let lay = prob.layout(false);
        let hover = prob.hover_start(&lay);
        assert!(prog.max_violation(&hover).0 <= 0.0);
    }

    #[test]
    fn chi_below_one_is_slack() {
        let prob = desk(1, 1, 1);
        let prog = build_projection_program(&prob, &[0.5], 1.0).unwrap();
        assert!(!prog.family_counts().contains_key("rate_target"));
    }

    #[test]
    fn feasibility_is_monotone_in_lambda() {
        let prob = desk(1, 2, 2);
        let chi = chi_top(&prob);
        let mut last = true;
        for step in 0..=10 {
            let lam = step as f64 / 10.0;
            let prog = build_projection_program(&prob, &chi, lam).unwrap();
            let f = solve_feasibility(&prog, 1e-9, None).unwrap();
            assert!(last || !f.feasible, "feasible again at {lam}");
            last = f.feasible;
        }
        assert!(!last);
    }

    #[test]
    fn oracle_gradients_match() {
        let prob = desk(2, 2, 3);
        let prog = build_projection_program(&prob, &chi_top(&prob), 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x: Vec<f64> = (0..prog.n_vars)
                .map(|i| {
                    let (lo, hi) = (prog.lower[i], prog.upper[i]);
                    lo + (hi - lo) * rng.gen_range(0.05..0.95)
                })
                .collect();
            let bad = check_gradients(&prog, &x, 1e-5);
            assert!(bad.is_empty(), "{bad:?}");
        }
    }

    #[test]
    fn rejects_wrong_dimension() {
        let prob = desk(1, 1, 2);
        assert!(matches!(
            build_projection_program(&prob, &[2.0], 0.5),
            Err(Error::Dimension(_))
        ));
    }
}
