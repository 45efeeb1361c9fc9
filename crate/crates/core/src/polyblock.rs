//! Monotonic optimization by outer polyblock approximation.
//!
//! The search runs over the lifted rate coordinates chi (one per user,
//! subcarrier and slot). Each vertex carries, besides chi, the auxiliary
//! coordinates of the lifted energy model at their initial values; those
//! coordinates coincide with the base point, so they never spawn children.
//! Projections are found by bisection on the ray from the base point (all
//! ones) to the vertex, using the convex feasibility program of
//! `convex_core::projection`.

use crate::convex_core::barrier::{solve_feasibility, Feasibility};
use crate::convex_core::projection::{build_projection_program, CHI_FLOOR};
use crate::error::{Error, Result};
use crate::problem::{ConvergenceRecord, Plan, PlanningProblem};
use crate::rate_model::AllocationPlan;
use crate::sca::{self, ScaOptions};
use crate::scenario::SolverOptions;

/// Phase-I tolerance of each projection feasibility test.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub chi: Vec<f64>,
    /// Per-slot (mu, varpi, tau) of the lifted energy model.
    pub aux: Vec<f64>,
}

impl Vertex {
    pub fn objective(&self) -> f64 {
        self.chi.iter().map(|&c| PlanningProblem::log2(c)).sum()
    }

    fn dominated_by(&self, other: &Vertex) -> bool {
        self.chi.iter().zip(&other.chi).all(|(a, b)| a <= b)
    }

    fn norm(&self) -> f64 {
        self.chi
            .iter()
            .chain(&self.aux)
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Polyblock {
    pub vertices: Vec<Vertex>,
    pub cap: usize,
}

/// Outcome of one projection: `lo` is certified feasible by `point`, no
/// relaxation point lies beyond `hi`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub lo: f64,
    pub hi: f64,
    pub point: Vec<f64>,
    pub feasibility_tests: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    Gap,
    Exhausted,
    Budget,
}

#[derive(Debug, Clone)]
pub struct PolyblockOutcome {
    pub incumbent: Option<Plan>,
    pub upper_bound: f64,
    pub iterations: usize,
    pub convergence: Vec<ConvergenceRecord>,
    pub termination: Termination,
}

/// Initial vertex: chi = 1 + H P_max per coordinate, aux at hover values.
pub fn init_polyblock(prob: &PlanningProblem, cap: usize) -> Polyblock {
    let mut chi = vec![1.0; prob.n_chi()];
    for j in 0..prob.n_h {
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                chi[prob.chi_index(k, i, j)] = 1.0 + prob.h(k, i, j) * prob.sc.constants.p_max;
            }
        }
    }
    let d = &prob.sc.derived;
    let mut aux = Vec::with_capacity(3 * prob.n_h);
    for _ in 0..prob.n_h {
        aux.extend([d.mu_hover(), d.e_const.exp(), d.e_const]);
    }
    Polyblock {
        vertices: vec![Vertex { chi, aux }],
        cap,
    }
}

/// Clip every vertex to the reachable-distance cap of each coordinate.
pub fn tighten(prob: &PlanningProblem, pb: &mut Polyblock) {
    for v in &mut pb.vertices {
        for j in 0..prob.n_h {
            for k in 0..prob.k() {
                for i in 0..prob.n_f() {
                    let d = prob.chi_index(k, i, j);
                    v.chi[d] = v.chi[d].min(prob.chi_cap(k, i, j));
                }
            }
        }
    }
}

/// QoS screen: a vertex whose box cannot meet some rate floor holds no feasible point.
pub fn passes_qos(prob: &PlanningProblem, v: &Vertex) -> bool {
    for j in 0..prob.n_h {
        for k in 0..prob.k() {
            let need = prob.qos_log2(k, j);
            if need <= 0.0 {
                continue;
            }
            let have: f64 = (0..prob.n_f())
                .map(|i| PlanningProblem::log2(v.chi[prob.chi_index(k, i, j)]))
                .sum();
            if have < need * (1.0 - 1e-12) {
                return false;
            }
        }
    }
    true
}

/// Largest scaling at which `x` itself meets every rate row of vertex `chi`.
fn supported_lambda(prob: &PlanningProblem, chi: &[f64], x: &[f64]) -> f64 {
    let lay = prob.layout(false);
    let mut lam = 1.0f64;
    for j in 0..prob.n_h {
        for k in 0..prob.k() {
            for i in 0..prob.n_f() {
                let c = chi[prob.chi_index(k, i, j)] - 1.0;
                if c <= CHI_FLOOR {
                    continue;
                }
                let h = prob.h(k, i, j);
                let mut interf = x[lay.theta(k, j)];
                for kk in 0..prob.k() {
                    if kk != k {
                        interf += prob.sc.xi * h * x[lay.p(kk, i, j)];
                    }
                }
                let sinr = h * x[lay.p(k, i, j)] / interf;
                lam = lam.min(sinr / c);
            }
        }
    }
    lam.max(0.0)
}

fn strictly_ok(f: &Feasibility) -> bool {
    f.feasible && f.slack < 0.0
}

/// Bisection for the projection of `chi` along the ray from the base point.
/// `x0` must be strictly feasible for the program without rate rows.
pub fn project(prob: &PlanningProblem, chi: &[f64], eps2: f64, x0: &[f64]) -> Result<Projection> {
    let mut lo = (supported_lambda(prob, chi, x0) * (1.0 - 1e-9)).min(1.0);
    let mut point = x0.to_vec();
    let mut hi = 1.0;
    let mut tests = 0;
    let mut probe = |lam: f64, warm: &[f64]| -> Result<Feasibility> {
        tests += 1;
        solve_feasibility(
            &build_projection_program(prob, chi, lam)?,
            FEAS_TOL,
            Some(warm),
        )
    };
    if lo < 1.0 {
        let f = probe(1.0, &point)?;
        if strictly_ok(&f) {
            lo = 1.0;
            point = f.point;
        }
    }
    while hi - lo > eps2 {
        let mid = 0.5 * (lo + hi);
        let f = probe(mid, &point)?;
        if strictly_ok(&f) {
            lo = supported_lambda(prob, chi, &f.point).clamp(mid, 1.0) * (1.0 - 1e-12);
            lo = lo.max(mid);
            point = f.point;
        } else {
            hi = mid;
        }
    }
    if lo >= 1.0 {
        hi = 1.0;
    }
    Ok(Projection {
        lo,
        hi,
        point,
        feasibility_tests: tests,
    })
}

/// Point on the ray at scaling `lam`.
fn ray_point(v: &Vertex, lam: f64) -> Vec<f64> {
    v.chi.iter().map(|&c| 1.0 + lam * (c - 1.0)).collect()
}

/// Replace `v` by its children at the cut point `phi`; drop improper children.
pub fn spawn_children(pb: &mut Polyblock, idx: usize, phi: &[f64]) -> Result<()> {
    let v = pb.vertices.swap_remove(idx);
    let mut fresh = Vec::new();
    for (d, &p) in phi.iter().enumerate() {
        if v.chi[d] - p <= 1e-12 * v.chi[d].abs().max(1.0) {
            continue;
        }
        let mut c = v.clone();
        c.chi[d] = p;
        fresh.push(c);
    }
    for c in fresh {
        if pb.vertices.iter().any(|w| c.dominated_by(w)) {
            continue;
        }
        pb.vertices.push(c);
    }
    if pb.vertices.len() > pb.cap {
        return Err(Error::VertexCap(pb.cap));
    }
    Ok(())
}

/// Best vertex by objective; ties go to the lowest index.
pub fn select(pb: &Polyblock) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in pb.vertices.iter().enumerate() {
        let f = v.objective();
        if best.is_none_or(|(_, b)| f > b) {
            best = Some((i, f));
        }
    }
    best.map(|(i, _)| i)
}

/// Exclusive exact plan from a projection point, trying reduced powers when the
/// relaxed energy model was too optimistic.
fn incumbent_from(prob: &PlanningProblem, x: &[f64]) -> Option<Plan> {
    let lay = prob.layout(false);
    let (r, alloc) = prob.extract(&lay, x);
    let s = prob.dominant_assignment(&alloc);
    let base = prob.restrict(&alloc, &s);
    // first try filling each slot's power budget, then shrink
    let mut filled = base.clone();
    for j in 0..prob.n_h {
        let tot = base.slot_power(j);
        if tot > 0.0 {
            let f = prob.sc.constants.p_max / tot;
            for k in 0..prob.k() {
                for i in 0..prob.n_f() {
                    let idx = filled.idx(k, i, j);
                    filled.p_tilde[idx] *= f;
                }
            }
        }
    }
    let tries = [
        (&filled, 1.0),
        (&base, 1.0),
        (&base, 0.9),
        (&base, 0.5),
        (&base, 0.1),
    ];
    for (src, scale) in tries {
        let mut a: AllocationPlan = src.clone();
        for p in &mut a.p_tilde {
            *p *= scale;
        }
        if let Ok(mut plan) = prob.make_plan(r.clone(), a) {
            plan.raw_shared =
                crate::rate_model::shared_pairs(&alloc.p_tilde, alloc.k, alloc.n_f, alloc.n_t);
            return Some(plan);
        }
    }
    None
}

/// Outer approximation loop.
pub fn iterate(prob: &PlanningProblem, opts: &SolverOptions) -> Result<PolyblockOutcome> {
    let base = build_projection_program(prob, &vec![1.0; prob.n_chi()], 0.0)?;
    let lay = prob.layout(false);
    let f0 = solve_feasibility(&base, FEAS_TOL, Some(&prob.hover_start(&lay)))?;
    if !strictly_ok(&f0) {
        return Err(Error::infeasible(f0.worst_family));
    }
    let x0 = f0.point;
    let mut pb = init_polyblock(prob, opts.vertex_cap);
    tighten(prob, &mut pb);
    pb.vertices.retain(|v| passes_qos(prob, v));

    let mut incumbent: Option<Plan> = incumbent_from(prob, &x0);
    let mut records = Vec::new();
    let mut it = 0;
    let mut upper = f64::INFINITY;
    let termination = loop {
        let inc = incumbent
            .as_ref()
            .map_or(f64::NEG_INFINITY, |p| p.objective);
        pb.vertices.retain(|v| v.objective() > inc);
        let Some(idx) = select(&pb) else {
            upper = upper.min(inc);
            break Termination::Exhausted;
        };
        upper = pb.vertices[idx].objective();
        if it >= opts.max_polyblock_iters {
            break Termination::Budget;
        }
        it += 1;
        let v = pb.vertices[idx].clone();
        let proj = project(prob, &v.chi, opts.eps2, &x0)?;
        if let Some(cand) = incumbent_from(prob, &proj.point) {
            if incumbent
                .as_ref()
                .is_none_or(|p| cand.objective > p.objective)
            {
                incumbent = Some(cand);
            }
        }
        let inc = incumbent
            .as_ref()
            .map_or(f64::NEG_INFINITY, |p| p.objective);
        records.push(ConvergenceRecord {
            iteration: it,
            bound: upper,
            incumbent: inc,
            vertices: pb.vertices.len(),
        });
        let phi_lo = ray_point(&v, proj.lo);
        let diff: f64 = v
            .chi
            .iter()
            .zip(&phi_lo)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if diff <= opts.eps1 * v.norm() {
            break Termination::Converged;
        }
        if upper - inc <= opts.eps1 * upper.abs() {
            break Termination::Gap;
        }
        spawn_children(&mut pb, idx, &ray_point(&v, proj.hi))?;
        pb.vertices.retain(|w| passes_qos(prob, w));
    };
    Ok(PolyblockOutcome {
        incumbent,
        upper_bound: upper,
        iterations: it,
        convergence: records,
        termination,
    })
}

pub fn sca_opts(opts: &SolverOptions) -> ScaOptions {
    ScaOptions {
        eps3: opts.eps3,
        max_iters: opts.max_sca_iters,
    }
}

/// Polyblock search followed by SCA refinement from the incumbent and from the
/// hover start; the best exactly evaluated plan wins.
pub fn solve_optimal(prob: &PlanningProblem, opts: &SolverOptions) -> Result<Plan> {
    let out = iterate(prob, opts)?;
    let so = sca_opts(opts);
    let mut cands: Vec<Plan> = Vec::new();
    if let Some(inc) = &out.incumbent {
        if let Ok(p) = sca::polish(prob, inc, &so) {
            cands.push(p);
        }
        cands.push(inc.clone());
    }
    if prob.pins.assignment.is_none() {
        let matched = prob.with_assignment(prob.matched_assignment());
        if let Ok(p) = sca::solve_sca(&matched, &so) {
            if let Ok(q) = sca::polish(prob, &p, &so) {
                cands.push(q);
            }
            cands.push(p);
        }
    }
    match sca::solve_sca(prob, &so) {
        Ok(p) => cands.push(p),
        Err(e) if cands.is_empty() => return Err(e),
        Err(_) => {}
    }
    let mut best = cands
        .into_iter()
        .max_by(|a, b| a.objective.total_cmp(&b.objective))
        .ok_or_else(|| Error::infeasible("qos"))?;
    best.convergence = out.convergence;
    best.iterations = out.iterations;
    Ok(best)
}

pub fn solve_offline(prob: &PlanningProblem, opts: &SolverOptions) -> Result<Plan> {
    solve_optimal(prob, opts)
}

pub fn solve_online_optimal(prob: &PlanningProblem, opts: &SolverOptions) -> Result<Plan> {
    solve_optimal(prob, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_channels, Scenario};

    fn desk(k: usize, n_f: usize, n_t: usize) -> PlanningProblem {
        let mut sc = Scenario::table_one(k, n_t, 21);
        sc.constants.n_f = n_f;
        let sc = sc.rederive().unwrap();
        let ch = generate_channels(&sc);
        PlanningProblem::offline(&sc, &ch).unwrap()
    }

    #[test]
    fn children_replace_vertex_and_drop_improper() {
        let mut pb = Polyblock {
            vertices: vec![
                Vertex {
                    chi: vec![4.0, 4.0],
                    aux: vec![],
                },
                Vertex {
                    chi: vec![5.0, 1.5],
                    aux: vec![],
                },
            ],
            cap: 10,
        };
        spawn_children(&mut pb, 0, &[2.0, 2.0]).unwrap();
        // (2, 4) kept; (4, 2) kept; nothing dominated by (5, 1.5)
        let mut got: Vec<Vec<f64>> = pb.vertices.iter().map(|v| v.chi.clone()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, vec![vec![2.0, 4.0], vec![4.0, 2.0], vec![5.0, 1.5]]);
        spawn_children(&mut pb, 1, &[4.0, 1.0]).unwrap();
        // (4, 1) is below (5, 1.5)
        assert_eq!(pb.vertices.len(), 2);
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let mut pb = Polyblock {
            vertices: vec![Vertex {
                chi: vec![4.0, 4.0, 4.0],
                aux: vec![],
            }],
            cap: 2,
        };
        assert!(matches!(
            spawn_children(&mut pb, 0, &[2.0, 2.0, 2.0]),
            Err(Error::VertexCap(2))
        ));
    }

    #[test]
    fn selection_prefers_lowest_index_on_ties() {
        let pb = Polyblock {
            vertices: vec![
                Vertex {
                    chi: vec![2.0, 8.0],
                    aux: vec![],
                },
                Vertex {
                    chi: vec![8.0, 2.0],
                    aux: vec![],
                },
            ],
            cap: 10,
        };
        assert_eq!(select(&pb), Some(0));
    }

    #[test]
    fn projection_brackets_the_boundary() {
        let prob = desk(1, 1, 2);
        let pb = {
            let mut p = init_polyblock(&prob, 100);
            tighten(&prob, &mut p);
            p
        };
        let lay = prob.layout(false);
        let base = build_projection_program(&prob, &[1.0, 1.0], 0.0).unwrap();
        let x0 = solve_feasibility(&base, FEAS_TOL, Some(&prob.hover_start(&lay)))
            .unwrap()
            .point;
        let chi = &pb.vertices[0].chi;
        let pr = project(&prob, chi, 0.01, &x0).unwrap();
        assert!(pr.lo <= pr.hi && pr.hi - pr.lo <= 0.01 + 1e-12);
        let at_lo = build_projection_program(&prob, chi, pr.lo).unwrap();
        assert!(at_lo.is_feasible(&pr.point, 1e-9));
        if pr.hi < 1.0 {
            let f = solve_feasibility(
                &build_projection_program(&prob, chi, pr.hi).unwrap(),
                FEAS_TOL,
                None,
            )
            .unwrap();
            assert!(!(f.feasible && f.slack < 0.0));
        }
    }

    #[test]
    fn bounds_are_monotone_and_bracket_the_plan() {
        let prob = desk(1, 1, 2);
        let opts = SolverOptions {
            max_polyblock_iters: 60,
            ..SolverOptions::default()
        };
        let out = iterate(&prob, &opts).unwrap();
        for w in out.convergence.windows(2) {
            assert!(w[1].bound <= w[0].bound + 1e-9);
            assert!(w[1].incumbent >= w[0].incumbent - 1e-12);
        }
        let inc = out.incumbent.unwrap();
        assert!(inc.objective <= out.upper_bound + 1e-9);
    }
}
