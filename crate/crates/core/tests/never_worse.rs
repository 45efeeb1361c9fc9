use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavopt::polyblock::{iterate, solve_offline};
use uavopt::problem::PlanningProblem;
use uavopt::rate_model::AllocationPlan;
use uavopt::scenario::{generate_channels, Scenario, SolverOptions};

fn tiny(seed: u64) -> PlanningProblem {
    let mut sc = Scenario::table_one(1, 2, seed);
    sc.constants.n_f = 1;
    sc.delta_t = 1.0;
    let sc = sc.rederive().unwrap();
    let ch = generate_channels(&sc);
    PlanningProblem::offline(&sc, &ch).unwrap()
}

/// Random accelerations inside the ball and random powers up to the limit.
fn sample(prob: &PlanningProblem, rng: &mut ChaCha8Rng) -> (Vec<[f64; 3]>, AllocationPlan) {
    let l = &prob.sc.limits;
    let dt = prob.sc.delta_t;
    let mut r = prob.start.r_prev;
    let mut v = prob.start.v_prev;
    let mut path = Vec::new();
    let mut alloc = AllocationPlan::zeros(prob.k(), prob.n_f(), prob.n_h);
    for j in 0..prob.n_h {
        let a = loop {
            let a = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            if a[0] * a[0] + a[1] * a[1] + a[2] * a[2] <= 1.0 {
                break a.map(|x| x * l.a_max);
            }
        };
        for i in 0..3 {
            v[i] += a[i] * dt;
            r[i] += v[i] * dt;
        }
        path.push(r);
        let idx = alloc.idx(0, 0, j);
        alloc.p_tilde[idx] = rng.gen_range(0.0..prob.sc.constants.p_max);
        alloc.s[idx] = true;
    }
    (path, alloc)
}

#[test]
fn optimal_plan_beats_random_feasible_samples() {
    let opts = SolverOptions::default();
    for seed in 0..2 {
        let prob = tiny(seed);
        let plan = solve_offline(&prob, &opts).unwrap();
        let ub = iterate(&prob, &opts).unwrap().upper_bound;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut feasible = 0;
        for _ in 0..1000 {
            let (r, alloc) = sample(&prob, &mut rng);
            if let Ok(ev) = prob.evaluate(&r, &alloc) {
                feasible += 1;
                assert!(
                    ev.objective <= plan.objective + 1e-9,
                    "sample {} beats plan {}",
                    ev.objective,
                    plan.objective
                );
                assert!(ev.objective <= ub + 1e-9);
            }
        }
        assert!(feasible > 100, "only {feasible} feasible samples");
    }
}
