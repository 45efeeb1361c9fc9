use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavopt::convex_core::projection::build_projection_program;
use uavopt::convex_core::{check_gradients, ConvexProgram};
use uavopt::oracle::{solve_oracle, OracleGrid};
use uavopt::physics::{solar_power_actual, solar_power_bound};
use uavopt::polyblock::{iterate, sca_opts, solve_offline};
use uavopt::problem::PlanningProblem;
use uavopt::rate_model::{expected_rate_gap_bound, expected_rate_upper, rate, shared_pairs};
use uavopt::rollout::{audit_plan, run, run_offline, Planner, RolloutTrace};
use uavopt::sca::{
    build_sca_subproblem, initial_point, sca_solve, solve_sca, true_objective, MONOTONE_TOL,
};
use uavopt::scenario::{generate_channels, load_config, rician_power, Scenario, SolverOptions};

type Res<T> = Result<T, Box<dyn std::error::Error>>;
type Outcome = Res<(bool, String)>;

fn config(name: &str, seed: u64) -> Res<(Scenario, SolverOptions)> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    let (mut sc, opts) = load_config(&std::fs::read_to_string(path)?)?;
    sc.seed = seed;
    Ok((sc.rederive()?, opts))
}

fn within(x: f64, want: f64, rel: f64) -> bool {
    (x / want - 1.0).abs() <= rel
}

fn c1_constants() -> Outcome {
    let d = Scenario::table_one(4, 10, 1).derived;
    let (c, f0, m, g, rho, a) = (3.0e8, 700e6, 4.0, 9.8, 1.225, 0.18);
    let w: f64 = m * g;
    let esg = 0.4 * 1.0 * 1367.0;
    let hand = [
        ("zeta", (c / (4.0 * PI * f0)).powi(2), d.zeta, 1.1632e-3),
        ("V_h", (w / (2.0 * rho * a)).sqrt(), d.v_h, 9.428),
        (
            "hover",
            w.powf(1.5) / (2.0 * rho * a).sqrt(),
            d.hover_power(),
            369.7,
        ),
        ("C2", esg * (-0.01f64 * 700.0).exp(), d.c2, 0.4987),
        (
            "E",
            (esg * (1.0 - (-7.0f64).exp()) * 0.02 / (1.0 + (-0.05f64 * (1600.0 - 1351.0)).exp()))
                .ln(),
            d.e_const,
            2.391,
        ),
    ];
    let mut ok = true;
    let mut msg = Vec::new();
    for (name, h, lib, frozen) in hand {
        let pass = within(lib, h, 1e-3) && within(lib, frozen, 1e-3);
        ok &= pass;
        msg.push(format!("{name}={lib:.5}"));
    }
    Ok((ok, msg.join(" ")))
}

fn c2_solar_bound() -> Outcome {
    let sc = Scenario::table_one(1, 1, 1);
    let bad = (0..10_000)
        .map(|j| 3200.0 * j as f64 / 9999.0)
        .filter(|&z| {
            solar_power_bound(z, &sc.derived, &sc.solar) > solar_power_actual(z, &sc.solar)
        })
        .count();
    Ok((bad == 0, format!("{bad} violations on 10000 points")))
}

fn c3_exclusivity(desk: &SolverOptions, sca_runs: &mut Vec<Vec<f64>>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut shared = 0;
    let mut raw = (0, 0);
    let mut missing = 0;
    for seed in 0..20 {
        let k = rng.gen_range(1..=2);
        let n_f = rng.gen_range(k..=2);
        let n_t = rng.gen_range(1..=4);
        let mut sc = Scenario::table_one(k, n_t, seed);
        sc.constants.n_f = n_f;
        for r in &mut sc.limits.r_req {
            *r *= n_f as f64 / 64.0;
        }
        let sc = sc.rederive()?;
        let prob = PlanningProblem::offline(&sc, &generate_channels(&sc))?;
        let out = iterate(&prob, desk)?;
        match &out.incumbent {
            Some(p) => {
                shared += shared_pairs(&p.alloc.p_tilde, k, n_f, n_t);
                raw.0 += p.raw_shared;
            }
            None => missing += 1,
        }
        let so = sca_opts(desk);
        let plan = solve_sca(&prob, &so)?;
        shared += shared_pairs(&plan.alloc.p_tilde, k, n_f, n_t);
        raw.1 += plan.raw_shared;
        sca_runs.push(sca_solve(&prob, initial_point(&prob), &so)?.history);
    }
    Ok((
        shared == 0 && missing == 0,
        format!(
            "{shared} shared pairs in final plans; {missing} runs without incumbent; before repair polyblock {} sca {}",
            raw.0, raw.1
        ),
    ))
}

fn c4_oracle() -> Outcome {
    let opts = SolverOptions::default();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut sc = Scenario::table_one(1, 2, seed);
        sc.constants.n_f = 1;
        sc.delta_t = 1.0;
        let sc = sc.rederive()?;
        let prob = PlanningProblem::offline(&sc, &generate_channels(&sc))?;
        let plan = solve_offline(&prob, &opts)?;
        let out = iterate(&prob, &opts)?;
        let eps_gap = out.upper_bound - out.incumbent.map_or(0.0, |p| p.objective);
        let orc = solve_oracle(&prob, &OracleGrid::default())?;
        let tol = eps_gap.max(orc.gap);
        let diff = (plan.objective - orc.objective).abs();
        ok &= diff <= tol;
        worst = worst.max(diff / tol);
    }
    Ok((
        ok,
        format!("worst |plan - oracle| / tolerance = {worst:.3}"),
    ))
}

fn c5_chain(traces: &mut Vec<(Scenario, RolloutTrace)>) -> Outcome {
    const SLACK: f64 = 1e-4;
    let mut fails = Vec::new();
    let mut audits = 0;
    for seed in 0..10 {
        let (sc, opts) = config("desk.toml", seed)?;
        let ch = generate_channels(&sc);
        let mut bits = Vec::new();
        for planner in Planner::ALL {
            let tr = run(planner, &sc, &ch, seed, &opts)?;
            audits += audit_plan(&tr, &sc, &ch).len();
            bits.push(tr.sum_rate_bits(sc.delta_t));
            traces.push((sc.clone(), tr));
        }
        let (off, on, sca, b1, b2) = (bits[0], bits[1], bits[2], bits[3], bits[4]);
        let ge = |a: f64, b: f64| a >= b * (1.0 - SLACK);
        if !(ge(off, on) && ge(on, sca) && ge(off, b1) && ge(off, b2)) {
            fails.push(format!("seed {seed} {bits:?}"));
        }
    }
    let mut collapse: f64 = 0.0;
    for seed in 0..3 {
        let (mut sc, opts) = config("desk.toml", seed)?;
        sc.constants.kappa = f64::INFINITY;
        let ch = generate_channels(&sc);
        let off = run(Planner::Offline, &sc, &ch, seed, &opts)?.sum_rate_bits(sc.delta_t);
        let on = run(Planner::OnlineOptimal, &sc, &ch, seed, &opts)?.sum_rate_bits(sc.delta_t);
        collapse = collapse.max((on - off).abs() / off.abs().max(1e-300));
    }
    let ok = fails.is_empty() && audits == 0 && collapse <= 1e-6;
    Ok((
        ok,
        format!("chain failures {fails:?}; audit violations {audits}; deterministic collapse rel diff {collapse:.2e}"),
    ))
}

fn c6_expected_rate() -> Outcome {
    let sc = Scenario::table_one(1, 1, 1);
    let (b, kappa, eh) = (sc.constants.b, sc.constants.kappa, sc.mean_gain());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ok = true;
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..20 {
        let p = rng.gen_range(0.01..sc.constants.p_max);
        let r = [0.0, 0.0, rng.gen_range(100.0..1600.0)];
        let ang = rng.gen_range(0.0..2.0 * PI);
        let rad = rng.gen_range(0.0..800.0);
        let rk = [rad * ang.cos(), rad * ang.sin(), 0.0];
        let draws: Vec<f64> = (0..10_000)
            .map(|_| rate(p, eh * rician_power(kappa, &mut rng), r, rk, b))
            .collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let sd =
            (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt();
        let upper = expected_rate_upper(p, eh, r, rk, b);
        let bound = expected_rate_gap_bound(kappa, b);
        let pass = mean <= upper && upper - mean <= bound + 3.0 * sd;
        ok &= pass;
        worst = worst.min(bound + 3.0 * sd - (upper - mean));
    }
    let bound = b * (2.0 * kappa + 1.0) / (LN_2 * (kappa + 1.0).powi(2));
    Ok((
        ok,
        format!("gap bound {bound:.1} b/s, smallest margin {worst:.1} b/s"),
    ))
}

fn c7_sca(sca_runs: &[Vec<f64>]) -> Outcome {
    let monotone = sca_runs
        .iter()
        .all(|h| h.windows(2).all(|w| w[1] <= w[0] + MONOTONE_TOL));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tangent_ok = true;
    let mut minorant_bad = 0;
    let mut ratios = Vec::new();
    for seed in 0..3 {
        let (sc, opts) = config("desk.toml", seed)?;
        let prob = PlanningProblem::offline(&sc, &generate_channels(&sc))?;
        let x = initial_point(&prob);
        let prog = build_sca_subproblem(&prob, &x)?;
        let at = prog.objective.value(&x).unwrap();
        tangent_ok &= (at - true_objective(&prob, &x)).abs() <= 1e-9 * at.abs().max(1.0);
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
            if s < true_objective(&prob, &y) - 1e-9 * s.abs().max(1.0) {
                minorant_bad += 1;
            }
        }
        let st = sca_solve(&prob, x, &sca_opts(&opts))?;
        let pb = iterate(&prob, &opts)?;
        ratios.push((st.iteration, pb.iterations));
    }
    let fifth = ratios.iter().all(|&(s, p)| 5 * s <= p);
    Ok((
        monotone && tangent_ok && minorant_bad == 0 && fifth,
        format!(
            "{} runs monotone={monotone}; tangency={tangent_ok}; minorant violations {minorant_bad}; (sca, polyblock) iterations {ratios:?}",
            sca_runs.len()
        ),
    ))
}

fn c8_energy(traces: &[(Scenario, RolloutTrace)]) -> Outcome {
    let mut bad = Vec::new();
    for (sc, tr) in traces {
        let l = &sc.limits;
        let tag = format!("{} seed {}", tr.planner.name(), sc.seed);
        if tr.q[0] != l.q0 {
            bad.push(format!("{tag}: q[1]"));
        }
        if tr.q.iter().any(|&q| !(0.0..=l.q_max).contains(&q)) {
            bad.push(format!("{tag}: range"));
        }
        if *tr.q.last().unwrap() < l.q_end {
            bad.push(format!("{tag}: final"));
        }
        for (j, s) in tr.slots.iter().enumerate() {
            let want = tr.q[j] + (s.p_harvest - s.consumed()) * sc.delta_t - s.overflow;
            if (tr.q[j + 1] - want).abs() > 1e-9 * tr.q[j].abs().max(1.0) {
                bad.push(format!("{tag}: ledger slot {}", j + 1));
            }
        }
    }
    Ok((
        bad.is_empty(),
        format!("{} traces, failures {bad:?}", traces.len()),
    ))
}

fn c9_cloud(traces: &mut Vec<(Scenario, RolloutTrace)>) -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for seed in 0..3 {
        let (sc, opts) = config("cloud.toml", seed)?;
        let tr = run_offline(&sc, &generate_channels(&sc), &opts)?;
        let z: Vec<f64> = tr.slots.iter().map(|s| s.r[2]).collect();
        let last = *z.last().unwrap();
        let peak = z[..z.len() - 1]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        ok &= peak >= sc.solar.l_up && last < sc.solar.l_low;
        msg.push(format!("seed {seed} peak {peak:.1} final {last:.1}"));
        traces.push((sc, tr));
    }
    Ok((ok, msg.join("; ")))
}

fn sample_gradients(prog: &ConvexProgram, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let oracles = 1 + prog.ineq.len();
    let mut bad = 0;
    for _ in 0..10 {
        let y: Vec<f64> = (0..prog.n_vars)
            .map(|i| {
                let (lo, hi) = (prog.lower[i], prog.upper[i]);
                lo + (hi - lo) * rng.gen_range(0.05..0.95)
            })
            .collect();
        bad += check_gradients(prog, &y, 1e-5).len();
    }
    (bad, 10 * oracles)
}

fn c10_gradients() -> Outcome {
    let (sc, _) = config("desk.toml", 0)?;
    let prob = PlanningProblem::offline(&sc, &generate_channels(&sc))?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut chi = vec![0.0; prob.n_chi()];
    for k in 0..prob.k() {
        for i in 0..prob.n_f() {
            for j in 0..prob.n_h {
                chi[prob.chi_index(k, i, j)] = 0.5 * prob.chi_cap(k, i, j);
            }
        }
    }
    let pinned = prob.with_assignment(prob.matched_assignment());
    let programs = [
        ("projection", build_projection_program(&prob, &chi, 0.5)?),
        ("sca", build_sca_subproblem(&prob, &initial_point(&prob))?),
        (
            "pinned sca",
            build_sca_subproblem(&pinned, &initial_point(&pinned))?,
        ),
    ];
    let mut ok = true;
    let mut msg = Vec::new();
    for (name, prog) in &programs {
        let (bad, total) = sample_gradients(prog, &mut rng);
        ok &= bad == 0;
        msg.push(format!("{name} {}/{total}", total - bad));
    }
    Ok((ok, msg.join(", ")))
}

fn main() -> ExitCode {
    let desk = match config("desk.toml", 0) {
        Ok((_, opts)) => opts,
        Err(e) => {
            eprintln!("cannot load desk.toml: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut sca_runs = Vec::new();
    let mut traces = Vec::new();
    let mut all = true;
    let mut report = |n: usize, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let (ok, msg) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        all &= ok;
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {n}: {verdict} ({msg}) [{:.1} s]",
            t.elapsed().as_secs_f64()
        );
    };
    report(1, &mut c1_constants);
    report(2, &mut c2_solar_bound);
    report(3, &mut || c3_exclusivity(&desk, &mut sca_runs));
    report(4, &mut c4_oracle);
    report(5, &mut || c5_chain(&mut traces));
    report(6, &mut c6_expected_rate);
    report(7, &mut || c7_sca(&sca_runs));
    report(9, &mut || c9_cloud(&mut traces));
    report(8, &mut || c8_energy(&traces));
    report(10, &mut c10_gradients);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
