//! Log-barrier Newton method with a phase-I feasibility stage.

use super::expr::{add_outer, LinExpr, Smooth};
use super::linalg::solve_spd_banded;
use super::program::ConvexProgram;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct BarrierOptions {
    /// Stop when m/t falls below this.
    pub gap_tol: f64,
    /// Centering stops when the Newton decrement squared over two falls below this.
    pub newton_tol: f64,
    pub mu: f64,
    pub max_newton: usize,
    pub t0: f64,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        BarrierOptions {
            gap_tol: 1e-9,
            newton_tol: 1e-8,
            mu: 10.0,
            max_newton: 4000,
            t0: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Feasibility {
    pub feasible: bool,
    pub point: Vec<f64>,
    /// Phase-I slack at the returned point.
    pub slack: f64,
    /// Certified lower bound on the optimal slack.
    pub lower_bound: f64,
    pub worst_family: String,
    pub newton_steps: usize,
}

#[derive(Debug, Clone)]
pub struct MinResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub gap: f64,
    pub newton_steps: usize,
}

enum Param {
    /// Equalities fix single variables; the rest are free.
    Pinned {
        free: Vec<usize>,
        slot: Vec<Option<usize>>,
        base: Vec<f64>,
    },
    /// x = x0 + Z y with orthonormal Z.
    Affine { x0: DVector<f64>, z: DMatrix<f64> },
}

fn build_param(prog: &ConvexProgram) -> Result<Param> {
    let n = prog.n_vars;
    let single = prog
        .eq
        .iter()
        .all(|r| r.terms.iter().filter(|t| t.1 != 0.0).count() <= 1);
    if single {
        let mut fixed: Vec<Option<f64>> = vec![None; n];
        for row in &prog.eq {
            match row.terms.iter().find(|t| t.1 != 0.0) {
                None => {
                    if row.constant.abs() > 1e-9 {
                        return Err(Error::infeasible("equality"));
                    }
                }
                Some(&(i, c)) => {
                    let v = -row.constant / c;
                    if let Some(old) = fixed[i] {
                        if (old - v).abs() > 1e-9 * (1.0 + old.abs()) {
                            return Err(Error::infeasible("equality"));
                        }
                    }
                    fixed[i] = Some(v);
                }
            }
        }
        let mut free = Vec::new();
        let mut slot = vec![None; n];
        let mut base = vec![0.0; n];
        for i in 0..n {
            match fixed[i] {
                Some(v) => {
                    let span = (prog.upper[i] - prog.lower[i]).abs().min(1.0 + v.abs());
                    if v < prog.lower[i] - 1e-9 * span || v > prog.upper[i] + 1e-9 * span {
                        return Err(Error::infeasible("box"));
                    }
                    base[i] = v;
                }
                None => {
                    slot[i] = Some(free.len());
                    free.push(i);
                }
            }
        }
        return Ok(Param::Pinned { free, slot, base });
    }
    let m = prog.eq.len();
    let mut a = DMatrix::<f64>::zeros(m, n);
    let mut b = DVector::<f64>::zeros(m);
    for (r, row) in prog.eq.iter().enumerate() {
        for &(i, c) in &row.terms {
            a[(r, i)] += c;
        }
        b[r] = -row.constant;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = 1e-12 * smax.max(1.0) * (n.max(m) as f64);
    let x0 = svd
        .solve(&b, tol)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    if (&a * &x0 - &b).norm() > 1e-8 * (1.0 + b.norm()) {
        return Err(Error::infeasible("equality"));
    }
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    // Null space from the full right singular basis of A^T A.
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let nullity = n - rank;
    let mut z = DMatrix::<f64>::zeros(n, nullity);
    for (c, &i) in order.iter().take(nullity).enumerate() {
        z.set_column(c, &eig.eigenvectors.column(i));
    }
    Ok(Param::Affine { x0, z })
}

struct Core<'a> {
    prog: &'a ConvexProgram,
    param: Param,
    dim: usize,
    /// (variable, lower, upper) for sides handled as barrier terms.
    boxes: Vec<(usize, f64, f64)>,
    bw: usize,
    m: usize,
    with_obj: bool,
}

impl<'a> Core<'a> {
    fn new(prog: &'a ConvexProgram, with_obj: bool) -> Result<Core<'a>> {
        let param = build_param(prog)?;
        let (dim, boxes, bw) = match &param {
            Param::Pinned { free, slot, .. } => {
                let boxes: Vec<(usize, f64, f64)> = free
                    .iter()
                    .filter(|&&i| prog.lower[i].is_finite() || prog.upper[i].is_finite())
                    .map(|&i| (i, prog.lower[i], prog.upper[i]))
                    .collect();
                let mut bw = 0;
                let mut span = |vars: &[usize]| {
                    let idx: Vec<usize> = vars.iter().filter_map(|&i| slot[i]).collect();
                    if let (Some(lo), Some(hi)) = (idx.iter().min(), idx.iter().max()) {
                        bw = bw.max(hi - lo);
                    }
                };
                // the objective enters without an outer product, so only its atoms couple
                if with_obj {
                    for a in prog.objective.atom_supports() {
                        span(&a);
                    }
                }
                for c in &prog.ineq {
                    span(&c.g.support());
                }
                (free.len(), boxes, bw)
            }
            Param::Affine { z, .. } => {
                let boxes: Vec<(usize, f64, f64)> = (0..prog.n_vars)
                    .filter(|&i| prog.lower[i].is_finite() || prog.upper[i].is_finite())
                    .map(|i| (i, prog.lower[i], prog.upper[i]))
                    .collect();
                (z.ncols(), boxes, z.ncols().saturating_sub(1))
            }
        };
        let m = prog.ineq.len()
            + boxes
                .iter()
                .map(|b| b.1.is_finite() as usize + b.2.is_finite() as usize)
                .sum::<usize>();
        Ok(Core {
            prog,
            param,
            dim,
            boxes,
            bw,
            m,
            with_obj,
        })
    }

    fn x_of(&self, y: &[f64]) -> Vec<f64> {
        match &self.param {
            Param::Pinned { free, base, .. } => {
                let mut x = base.clone();
                for (k, &i) in free.iter().enumerate() {
                    x[i] = y[k];
                }
                x
            }
            Param::Affine { x0, z } => (x0 + z * DVector::from_column_slice(y)).as_slice().to_vec(),
        }
    }

    fn y_of(&self, x: &[f64]) -> Vec<f64> {
        match &self.param {
            Param::Pinned { free, .. } => free.iter().map(|&i| x[i]).collect(),
            Param::Affine { x0, z } => (z.transpose() * (DVector::from_column_slice(x) - x0))
                .as_slice()
                .to_vec(),
        }
    }

    /// Barrier objective; None outside the strict interior.
    fn phi(&self, x: &[f64], t: f64) -> Option<f64> {
        let mut v = 0.0;
        if self.with_obj {
            v += t * self.prog.objective.value(x)?;
        }
        for c in &self.prog.ineq {
            let g = c.g.value(x)?;
            if !(g < 0.0) {
                return None;
            }
            v -= (-g).ln();
        }
        for &(i, lo, hi) in &self.boxes {
            if lo.is_finite() {
                let d = x[i] - lo;
                if !(d > 0.0) {
                    return None;
                }
                v -= d.ln();
            }
            if hi.is_finite() {
                let d = hi - x[i];
                if !(d > 0.0) {
                    return None;
                }
                v -= d.ln();
            }
        }
        v.is_finite().then_some(v)
    }

    /// Gradient and Hessian of the barrier objective in reduced coordinates.
    fn derivatives(&self, x: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
        match &self.param {
            Param::Pinned { slot, .. } => {
                let n = self.dim;
                let mut g = vec![0.0; n];
                let mut h = vec![0.0; n * n];
                let map = |i: usize| slot[i];
                self.accumulate(x, t, &mut g, &mut h, n, &map);
                (g, h)
            }
            Param::Affine { z, .. } => {
                let n = self.prog.n_vars;
                let mut gx = vec![0.0; n];
                let mut hx = vec![0.0; n * n];
                let map = |i: usize| Some(i);
                self.accumulate(x, t, &mut gx, &mut hx, n, &map);
                let gy = z.transpose() * DVector::from_column_slice(&gx);
                let hm = DMatrix::from_row_slice(n, n, &hx);
                let hy = z.transpose() * hm * z;
                let d = self.dim;
                let mut out = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        out[i * d + j] = hy[(i, j)];
                    }
                }
                (gy.as_slice().to_vec(), out)
            }
        }
    }

    fn accumulate(
        &self,
        x: &[f64],
        t: f64,
        g: &mut [f64],
        h: &mut [f64],
        n: usize,
        map: &dyn Fn(usize) -> Option<usize>,
    ) {
        let mut sp: Vec<(usize, f64)> = Vec::new();
        let remap = |sp: &[(usize, f64)]| -> Vec<(usize, f64)> {
            sp.iter()
                .filter_map(|&(i, a)| map(i).map(|j| (j, a)))
                .collect()
        };
        if self.with_obj {
            self.prog.objective.gradient(x, &mut sp);
            for (j, a) in remap(&sp) {
                g[j] += t * a;
            }
            self.prog.objective.add_hessian_with(x, t, h, n, map);
        }
        for c in &self.prog.ineq {
            let gv = c.g.value(x).unwrap_or(-1.0);
            let inv = 1.0 / (-gv);
            c.g.gradient(x, &mut sp);
            let u = remap(&sp);
            for &(j, a) in &u {
                g[j] += inv * a;
            }
            add_outer(h, n, &u, inv * inv);
            c.g.add_hessian_with(x, inv, h, n, map);
        }
        for &(i, lo, hi) in &self.boxes {
            let Some(j) = map(i) else { continue };
            if lo.is_finite() {
                let d = x[i] - lo;
                g[j] -= 1.0 / d;
                h[j * n + j] += 1.0 / (d * d);
            }
            if hi.is_finite() {
                let d = hi - x[i];
                g[j] += 1.0 / d;
                h[j * n + j] += 1.0 / (d * d);
            }
        }
    }

    fn solve_newton(&self, g: &[f64], mut h: Vec<f64>) -> Option<Vec<f64>> {
        let mut rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        if solve_spd_banded(&mut h, self.dim, self.bw, &mut rhs) {
            Some(rhs)
        } else {
            None
        }
    }

    /// Barrier path following from a strictly interior point.
    /// `hook(x, t, centered)` returns true to stop early.
    fn run(
        &self,
        x0: &[f64],
        opts: &BarrierOptions,
        hook: &mut dyn FnMut(&[f64], f64, bool) -> bool,
    ) -> Result<(Vec<f64>, f64, usize)> {
        let mut y = self.y_of(x0);
        let mut x = self.x_of(&y);
        let mut t = opts.t0;
        let mut steps = 0usize;
        if self.phi(&x, t).is_none() {
            return Err(Error::Degenerate(
                "barrier start is not strictly interior".into(),
            ));
        }
        if self.dim == 0 {
            return Ok((x, t, 0));
        }
        loop {
            loop {
                let f0 = self.phi(&x, t).expect("iterate stays interior");
                let (g, h) = self.derivatives(&x, t);
                let Some(dy) = self.solve_newton(&g, h) else {
                    break;
                };
                let slope: f64 = g.iter().zip(&dy).map(|(a, b)| a * b).sum();
                // below the resolution of phi no step can be verified
                if -slope / 2.0 <= opts.newton_tol.max(64.0 * f64::EPSILON * f0.abs()) {
                    break;
                }
                let mut alpha = 1.0;
                let mut accepted = false;
                while alpha > 1e-16 {
                    let yt: Vec<f64> = y.iter().zip(&dy).map(|(a, b)| a + alpha * b).collect();
                    let xt = self.x_of(&yt);
                    if let Some(ft) = self.phi(&xt, t) {
                        if ft <= f0 + 0.01 * alpha * slope {
                            y = yt;
                            x = xt;
                            accepted = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    break;
                }
                steps += 1;
                if steps > opts.max_newton {
                    return Err(Error::IterationLimit("barrier Newton".into()));
                }
                if hook(&x, t, false) {
                    return Ok((x, t, steps));
                }
            }
            if hook(&x, t, true) {
                return Ok((x, t, steps));
            }
            if !self.with_obj || self.m as f64 / t <= opts.gap_tol {
                return Ok((x, t, steps));
            }
            t *= opts.mu;
        }
    }

    fn default_start(&self, warm: Option<&[f64]>) -> Vec<f64> {
        let prog = self.prog;
        let mut x: Vec<f64> = match warm {
            Some(w) => w.to_vec(),
            None => (0..prog.n_vars)
                .map(|i| {
                    let (lo, hi) = (prog.lower[i], prog.upper[i]);
                    match (lo.is_finite(), hi.is_finite()) {
                        (true, true) => 0.5 * (lo + hi),
                        (true, false) => lo + 1.0,
                        (false, true) => hi - 1.0,
                        _ => 0.0,
                    }
                })
                .collect(),
        };
        if let Param::Affine { .. } = self.param {
            let y = self.y_of(&x);
            return self.x_of(&y);
        }
        for &(i, lo, hi) in &self.boxes {
            let v = x[i];
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => {
                    let span = hi - lo;
                    let m = 1e-6 * span;
                    if !(v > lo && v < hi) {
                        x[i] = if v.is_nan() {
                            0.5 * (lo + hi)
                        } else {
                            v.clamp(lo + m, hi - m)
                        };
                    }
                }
                (true, false) => {
                    if !(v > lo) {
                        x[i] = lo + 1e-6 * lo.abs().max(1.0);
                    }
                }
                (false, true) if !(v < hi) => {
                    x[i] = hi - 1e-6 * hi.abs().max(1.0);
                }
                _ => {}
            }
        }
        self.x_of(&self.y_of(&x))
    }
}

fn worst_family(prog: &ConvexProgram, x: &[f64]) -> String {
    prog.max_violation(x).1
}

/// Strict interior test (inequalities < 0, boxes strict, equalities within 1e-9).
pub fn strictly_feasible(prog: &ConvexProgram, x: &[f64]) -> bool {
    if prog.eq.iter().any(|r| r.eval(x).abs() > 1e-9) {
        return false;
    }
    let pinned: Vec<bool> = {
        let mut p = vec![false; prog.n_vars];
        for r in &prog.eq {
            if r.terms.len() == 1 {
                p[r.terms[0].0] = true;
            }
        }
        p
    };
    for i in 0..prog.n_vars {
        if pinned[i] {
            continue;
        }
        if !(x[i] > prog.lower[i] && x[i] < prog.upper[i]) {
            return false;
        }
    }
    prog.ineq
        .iter()
        .all(|c| c.g.value(x).map(|v| v < 0.0).unwrap_or(false))
}

/// Phase-I program: minimize s subject to g_j(x) <= s and s >= -1.
fn phase_one_program(prog: &ConvexProgram, boxes_as_rows: bool) -> ConvexProgram {
    let n = prog.n_vars;
    let mut aug = ConvexProgram::new(n + 1);
    aug.objective = Smooth::affine(LinExpr::var(n));
    for c in &prog.ineq {
        let mut g = c.g.clone();
        g.affine.push(n, -1.0);
        aug.add_ineq(&c.family, g);
    }
    for r in &prog.eq {
        aug.eq.push(r.clone());
    }
    if boxes_as_rows {
        for i in 0..n {
            let (lo, hi) = (prog.lower[i], prog.upper[i]);
            let span = if lo.is_finite() && hi.is_finite() && hi > lo {
                hi - lo
            } else {
                1.0
            };
            if lo.is_finite() {
                aug.add_ineq(
                    "box",
                    Smooth::affine(
                        LinExpr::constant(lo / span)
                            .term(i, -1.0 / span)
                            .term(n, -1.0),
                    ),
                );
            }
            if hi.is_finite() {
                aug.add_ineq(
                    "box",
                    Smooth::affine(
                        LinExpr::constant(-hi / span)
                            .term(i, 1.0 / span)
                            .term(n, -1.0),
                    ),
                );
            }
        }
    } else {
        aug.lower[..n].copy_from_slice(&prog.lower);
        aug.upper[..n].copy_from_slice(&prog.upper);
    }
    aug.lower[n] = -1.0;
    aug
}

/// Phase-I feasibility. `deep` keeps centering until a centered point has s < 0,
/// which yields a better-conditioned start for a following minimization.
pub fn feasibility_with(
    prog: &ConvexProgram,
    tol: f64,
    warm: Option<&[f64]>,
    deep: bool,
) -> Result<Feasibility> {
    let n = prog.n_vars;
    let base = Core::new(prog, false)?;
    let affine = matches!(base.param, Param::Affine { .. });
    let x0 = base.default_start(warm);
    let mut gmax = f64::NEG_INFINITY;
    for c in &prog.ineq {
        let v =
            c.g.value(&x0)
                .ok_or_else(|| Error::Degenerate(format!("{} undefined at start", c.family)))?;
        gmax = gmax.max(v);
    }
    if affine {
        for i in 0..n {
            let (lo, hi) = (prog.lower[i], prog.upper[i]);
            let span = if lo.is_finite() && hi.is_finite() && hi > lo {
                hi - lo
            } else {
                1.0
            };
            if lo.is_finite() {
                gmax = gmax.max((lo - x0[i]) / span);
            }
            if hi.is_finite() {
                gmax = gmax.max((x0[i] - hi) / span);
            }
        }
    }
    if gmax < 0.0 && strictly_feasible(prog, &x0) {
        return Ok(Feasibility {
            feasible: true,
            slack: gmax,
            lower_bound: f64::NEG_INFINITY,
            worst_family: worst_family(prog, &x0),
            point: x0,
            newton_steps: 0,
        });
    }
    let aug = phase_one_program(prog, affine);
    let core = Core::new(&aug, true)?;
    let mut start = x0.clone();
    start.push(gmax.max(-0.5) + 1.0);
    let opts = BarrierOptions {
        gap_tol: tol.max(1e-12) * 0.1,
        ..BarrierOptions::default()
    };
    let m = core.m as f64;
    let mut verdict: Option<bool> = None;
    let mut lower_bound = f64::NEG_INFINITY;
    let mut hook = |x: &[f64], t: f64, centered: bool| -> bool {
        let s = x[n];
        if s < 0.0 && (!deep || centered) {
            verdict = Some(true);
            return true;
        }
        if centered {
            lower_bound = lower_bound.max(s - m / t);
            if lower_bound > tol {
                verdict = Some(false);
                return true;
            }
        }
        false
    };
    let (x, _t, steps) = core.run(&start, &opts, &mut hook)?;
    let s = x[n];
    let feasible = verdict.unwrap_or(s <= tol);
    let point = x[..n].to_vec();
    Ok(Feasibility {
        feasible,
        slack: s,
        lower_bound,
        worst_family: worst_family(prog, &point),
        point,
        newton_steps: steps,
    })
}

pub fn solve_feasibility(
    prog: &ConvexProgram,
    tol: f64,
    warm: Option<&[f64]>,
) -> Result<Feasibility> {
    feasibility_with(prog, tol, warm, false)
}

pub fn solve_min_with(
    prog: &ConvexProgram,
    opts: &BarrierOptions,
    warm: Option<&[f64]>,
) -> Result<MinResult> {
    let core = Core::new(prog, true)?;
    let mut pre_steps = 0;
    let start = match warm {
        Some(w) if strictly_feasible(prog, w) => w.to_vec(),
        _ => {
            let f = feasibility_with(prog, 1e-9, warm, true)?;
            pre_steps = f.newton_steps;
            if !f.feasible || !strictly_feasible(prog, &f.point) {
                return Err(Error::infeasible(f.worst_family));
            }
            f.point
        }
    };
    let mut hook = |_: &[f64], _: f64, _: bool| false;
    let (x, t, steps) = core.run(&start, opts, &mut hook)?;
    let value = prog
        .objective
        .value(&x)
        .ok_or_else(|| Error::Degenerate("objective undefined at solution".into()))?;
    Ok(MinResult {
        point: x,
        value,
        gap: core.m as f64 / t,
        newton_steps: steps + pre_steps,
    })
}

pub fn solve_min(prog: &ConvexProgram, tol: f64, warm: Option<&[f64]>) -> Result<MinResult> {
    let opts = BarrierOptions {
        gap_tol: tol,
        ..BarrierOptions::default()
    };
    solve_min_with(prog, &opts, warm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_core::expr::Func;

    #[test]
    fn box_only_is_centered() {
        let mut p = ConvexProgram::new(2);
        p.set_bounds(0, -1.0, 3.0);
        p.set_bounds(1, 2.0, 4.0);
        let f = solve_feasibility(&p, 1e-9, None).unwrap();
        assert!(f.feasible);
        assert_eq!(f.point, vec![1.0, 3.0]);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut p = ConvexProgram::new(1);
        p.add_ineq("lo", Smooth::affine(LinExpr::constant(1.0).term(0, -1.0)));
        p.add_ineq("hi", Smooth::affine(LinExpr::var(0)));
        let f = solve_feasibility(&p, 1e-9, None).unwrap();
        assert!(!f.feasible);
        assert!(f.slack >= 0.5);
        assert!(f.lower_bound > 0.0);
    }

    #[test]
    fn box_projection_of_quadratic() {
        let mut p = ConvexProgram::new(3);
        let target = [2.0, -0.3, 0.4];
        for i in 0..3 {
            p.set_bounds(i, 0.0, 1.0);
            p.objective
                .add_scalar(1.0, Func::Square, LinExpr::var(i).plus(-target[i]));
        }
        let r = solve_min(&p, 1e-10, None).unwrap();
        let want = [1.0, 0.0, 0.4];
        for i in 0..3 {
            assert!((r.point[i] - want[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn monotone_log_hits_upper_bound() {
        let pmax = 15.85;
        let mut p = ConvexProgram::new(1);
        p.set_bounds(0, 0.0, pmax);
        p.objective
            .add_scalar(1.0, Func::NegLog, LinExpr::var(0).plus(1.0));
        let r = solve_min(&p, 1e-10, None).unwrap();
        assert!((r.point[0] - pmax).abs() < 1e-6);
    }

    #[test]
    fn pinned_and_general_equalities() {
        let mut p = ConvexProgram::new(3);
        for i in 0..3 {
            p.set_bounds(i, -5.0, 5.0);
            p.objective.add_scalar(1.0, Func::Square, LinExpr::var(i));
        }
        p.pin(0, 1.0);
        let r = solve_min(&p, 1e-10, None).unwrap();
        assert!((r.point[0] - 1.0).abs() < 1e-12);
        assert!(r.point[1].abs() < 1e-6);

        let mut q = ConvexProgram::new(2);
        for i in 0..2 {
            q.set_bounds(i, -5.0, 5.0);
            q.objective.add_scalar(1.0, Func::Square, LinExpr::var(i));
        }
        q.add_eq(LinExpr::var(0).term(1, 1.0).plus(-2.0));
        let r = solve_min(&q, 1e-10, None).unwrap();
        assert!((r.point[0] - 1.0).abs() < 1e-5);
        assert!((r.point[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn norm_ball_feasibility() {
        let mut p = ConvexProgram::new(2);
        for i in 0..2 {
            p.set_bounds(i, -10.0, 10.0);
        }
        p.add_ineq(
            "ball",
            Smooth::affine(LinExpr::constant(-1.0)).with_norm(
                1.0,
                vec![LinExpr::var(0).plus(-4.0), LinExpr::var(1).plus(-4.0)],
                1e-9,
            ),
        );
        let f = solve_feasibility(&p, 1e-9, Some(&[0.0, 0.0])).unwrap();
        assert!(f.feasible);
        assert!(strictly_feasible(&p, &f.point));
    }
}
