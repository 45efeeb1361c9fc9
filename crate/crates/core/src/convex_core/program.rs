//! Convex program container and derivative checks.

use super::expr::{LinExpr, Smooth};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct Constraint {
    pub g: Smooth,
    pub family: String,
}

/// minimize f(x) s.t. g_j(x) <= 0, eq(x) = 0, lower <= x <= upper.
#[derive(Debug, Clone)]
pub struct ConvexProgram {
    pub n_vars: usize,
    pub objective: Smooth,
    pub ineq: Vec<Constraint>,
    /// Affine rows required to vanish.
    pub eq: Vec<LinExpr>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConvexProgram {
    pub fn new(n_vars: usize) -> ConvexProgram {
        ConvexProgram {
            n_vars,
            objective: Smooth::default(),
            ineq: Vec::new(),
            eq: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    pub fn add_ineq(&mut self, family: &str, g: Smooth) {
        self.ineq.push(Constraint {
            g,
            family: family.to_string(),
        });
    }

    pub fn add_eq(&mut self, row: LinExpr) {
        self.eq.push(row);
    }

    /// Pin one variable to a value.
    pub fn pin(&mut self, i: usize, value: f64) {
        self.eq.push(LinExpr::var(i).plus(-value));
    }

    pub fn set_bounds(&mut self, i: usize, lo: f64, hi: f64) {
        self.lower[i] = lo;
        self.upper[i] = hi;
    }

    pub fn family_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for c in &self.ineq {
            *m.entry(c.family.clone()).or_insert(0) += 1;
        }
        m
    }

    /// Largest constraint value (box and equality residuals included) and its family.
    pub fn max_violation(&self, x: &[f64]) -> (f64, String) {
        let mut worst = (f64::NEG_INFINITY, String::new());
        for c in &self.ineq {
            let v = c.g.value(x).unwrap_or(f64::INFINITY);
            if v > worst.0 {
                worst = (v, c.family.clone());
            }
        }
        for i in 0..self.n_vars {
            let span = (self.upper[i] - self.lower[i]).abs();
            let scale = if span.is_finite() && span > 0.0 {
                span
            } else {
                1.0
            };
            let v = ((self.lower[i] - x[i]) / scale).max((x[i] - self.upper[i]) / scale);
            if v > worst.0 {
                worst = (v, "box".to_string());
            }
        }
        for row in &self.eq {
            let v = row.eval(x).abs();
            if v > worst.0 {
                worst = (v, "equality".to_string());
            }
        }
        worst
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        self.max_violation(x).0 <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientMismatch {
    /// None for the objective.
    pub constraint: Option<usize>,
    pub family: String,
    pub rel_error: f64,
}

fn rel_gradient_error(f: &Smooth, x: &[f64]) -> Option<f64> {
    let an = f.gradient_dense(x);
    let mut fd = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = f64::EPSILON.cbrt() * x[i].abs().max(1.0);
        let mut at = |s: f64| {
            xp[i] = x[i] + s * h;
            let v = f.value(&xp);
            xp[i] = x[i];
            v
        };
        let (p1, m1, p2, m2) = (at(1.0)?, at(-1.0)?, at(2.0)?, at(-2.0)?);
        fd[i] = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    }
    let diff: f64 = an
        .iter()
        .zip(&fd)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = an.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
    Some(diff / scale)
}

/// Central-difference check of every oracle at `x`; returns the failures.
pub fn check_gradients(prog: &ConvexProgram, x: &[f64], rel_tol: f64) -> Vec<GradientMismatch> {
    let mut out = Vec::new();
    let mut check = |f: &Smooth, constraint: Option<usize>, family: &str| {
        let err = rel_gradient_error(f, x).unwrap_or(f64::INFINITY);
        if !(err <= rel_tol) {
            out.push(GradientMismatch {
                constraint,
                family: family.to_string(),
                rel_error: err,
            });
        }
    };
    check(&prog.objective, None, "objective");
    for (j, c) in prog.ineq.iter().enumerate() {
        check(&c.g, Some(j), &c.family);
    }
    out
}
