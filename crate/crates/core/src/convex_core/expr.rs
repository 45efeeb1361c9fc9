//! Sparse affine expressions and smooth convex terms built from them.

use crate::physics::{LevelEnvelope, SigmoidEnvelope};
use std::sync::Arc;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn var(i: usize) -> LinExpr {
        LinExpr {
            terms: vec![(i, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant(c: f64) -> LinExpr {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(mut self, i: usize, c: f64) -> LinExpr {
        self.push(i, c);
        self
    }

    pub fn plus(mut self, c: f64) -> LinExpr {
        self.constant += c;
        self
    }

    pub fn push(&mut self, i: usize, c: f64) {
        if c == 0.0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.0 == i) {
            t.1 += c;
        } else {
            self.terms.push((i, c));
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, s: f64) {
        for &(i, c) in &other.terms {
            self.push(i, c * s);
        }
        self.constant += other.constant * s;
    }

    pub fn scaled(&self, s: f64) -> LinExpr {
        LinExpr {
            terms: self.terms.iter().map(|&(i, c)| (i, c * s)).collect(),
            constant: self.constant * s,
        }
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(i, c)| acc + c * x[i])
    }
}

/// Scalar convex function with value, slope and curvature.
#[derive(Debug, Clone)]
pub enum Func {
    Square,
    /// max(u, 0)^3
    CubePos,
    /// ln(1 + e^u)
    Softplus,
    /// -ln u on u > 0
    NegLog,
    /// 1/u on u > 0
    Recip,
    /// -sqrt(u + eps2)
    NegSqrt {
        eps2: f64,
    },
    Exp,
    /// Negated concave sigmoid majorant.
    NegEnvelope(Arc<SigmoidEnvelope>),
    /// Convex minorant of the level-flight coefficient.
    Level(Arc<LevelEnvelope>),
}

impl Func {
    /// (f, f', f'') or None outside the domain.
    pub fn eval(&self, u: f64) -> Option<(f64, f64, f64)> {
        if !u.is_finite() {
            return None;
        }
        match self {
            Func::Square => Some((u * u, 2.0 * u, 2.0)),
            Func::CubePos => {
                if u > 0.0 {
                    Some((u * u * u, 3.0 * u * u, 6.0 * u))
                } else {
                    Some((0.0, 0.0, 0.0))
                }
            }
            Func::Softplus => {
                let v = if u > 30.0 {
                    u + (-u).exp()
                } else if u < -30.0 {
                    u.exp()
                } else {
                    u.exp().ln_1p()
                };
                let s = if u >= 0.0 {
                    1.0 / (1.0 + (-u).exp())
                } else {
                    let e = u.exp();
                    e / (1.0 + e)
                };
                Some((v, s, s * (1.0 - s)))
            }
            Func::NegLog => (u > 0.0).then(|| (-u.ln(), -1.0 / u, 1.0 / (u * u))),
            Func::Recip => (u > 0.0).then(|| (1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u))),
            Func::NegSqrt { eps2 } => {
                let w = u + eps2;
                (w > 0.0).then(|| {
                    let r = w.sqrt();
                    (-r, -0.5 / r, 0.25 / (w * r))
                })
            }
            Func::Exp => {
                let e = u.exp();
                e.is_finite().then_some((e, e, e))
            }
            Func::NegEnvelope(env) => {
                let (v, d1, d2) = env.eval(u);
                Some((-v, -d1, -d2))
            }
            Func::Level(env) => Some(env.eval(u)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Atom {
    /// weight * f(arg)
    Scalar { weight: f64, f: Func, arg: LinExpr },
    /// weight * sqrt(sum rows^2 + eps^2)
    Norm {
        weight: f64,
        rows: Vec<LinExpr>,
        eps: f64,
    },
}

/// Affine part plus a nonnegative combination of convex atoms.
#[derive(Debug, Clone, Default)]
pub struct Smooth {
    pub affine: LinExpr,
    pub atoms: Vec<Atom>,
}

impl Smooth {
    pub fn affine(e: LinExpr) -> Smooth {
        Smooth {
            affine: e,
            atoms: Vec::new(),
        }
    }

    pub fn with(mut self, weight: f64, f: Func, arg: LinExpr) -> Smooth {
        self.atoms.push(Atom::Scalar { weight, f, arg });
        self
    }

    pub fn with_norm(mut self, weight: f64, rows: Vec<LinExpr>, eps: f64) -> Smooth {
        self.atoms.push(Atom::Norm { weight, rows, eps });
        self
    }

    pub fn add_scalar(&mut self, weight: f64, f: Func, arg: LinExpr) {
        self.atoms.push(Atom::Scalar { weight, f, arg });
    }

    /// Multiply the whole function by s > 0.
    pub fn scale(&mut self, s: f64) {
        self.affine = self.affine.scaled(s);
        for a in &mut self.atoms {
            match a {
                Atom::Scalar { weight, .. } | Atom::Norm { weight, .. } => *weight *= s,
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> Option<f64> {
        let mut v = self.affine.eval(x);
        for a in &self.atoms {
            match a {
                Atom::Scalar { weight, f, arg } => {
                    v += weight * f.eval(arg.eval(x))?.0;
                }
                Atom::Norm { weight, rows, eps } => {
                    let s: f64 = rows.iter().map(|r| r.eval(x).powi(2)).sum();
                    v += weight * (s + eps * eps).sqrt();
                }
            }
        }
        v.is_finite().then_some(v)
    }

    /// Sparse gradient; indices may repeat.
    pub fn gradient(&self, x: &[f64], out: &mut Vec<(usize, f64)>) {
        out.clear();
        out.extend(self.affine.terms.iter().copied());
        for a in &self.atoms {
            match a {
                Atom::Scalar { weight, f, arg } => {
                    if let Some((_, d1, _)) = f.eval(arg.eval(x)) {
                        let c = weight * d1;
                        if c != 0.0 {
                            out.extend(arg.terms.iter().map(|&(i, a)| (i, a * c)));
                        }
                    }
                }
                Atom::Norm { weight, rows, eps } => {
                    let ys: Vec<f64> = rows.iter().map(|r| r.eval(x)).collect();
                    let nrm = (ys.iter().map(|y| y * y).sum::<f64>() + eps * eps).sqrt();
                    for (r, y) in rows.iter().zip(&ys) {
                        let c = weight * y / nrm;
                        out.extend(r.terms.iter().map(|&(i, a)| (i, a * c)));
                    }
                }
            }
        }
    }

    pub fn gradient_dense(&self, x: &[f64]) -> Vec<f64> {
        let mut sp = Vec::new();
        self.gradient(x, &mut sp);
        let mut g = vec![0.0; x.len()];
        for (i, v) in sp {
            g[i] += v;
        }
        g
    }

    /// Add scale * Hessian into the row-major n x n matrix `h`.
    pub fn add_hessian(&self, x: &[f64], scale: f64, h: &mut [f64], n: usize) {
        self.add_hessian_with(x, scale, h, n, &|i| Some(i));
    }

    /// As `add_hessian`, with variables renumbered by `map` (None drops a variable).
    pub fn add_hessian_with(
        &self,
        x: &[f64],
        scale: f64,
        h: &mut [f64],
        n: usize,
        map: &dyn Fn(usize) -> Option<usize>,
    ) {
        let remap = |u: &[(usize, f64)]| -> Vec<(usize, f64)> {
            u.iter()
                .filter_map(|&(i, a)| map(i).map(|j| (j, a)))
                .collect()
        };
        for a in &self.atoms {
            match a {
                Atom::Scalar { weight, f, arg } => {
                    if let Some((_, _, d2)) = f.eval(arg.eval(x)) {
                        let c = scale * weight * d2;
                        if c != 0.0 {
                            add_outer(h, n, &remap(&arg.terms), c);
                        }
                    }
                }
                Atom::Norm { weight, rows, eps } => {
                    let ys: Vec<f64> = rows.iter().map(|r| r.eval(x)).collect();
                    let nrm = (ys.iter().map(|y| y * y).sum::<f64>() + eps * eps).sqrt();
                    let c = scale * weight;
                    for r in rows {
                        add_outer(h, n, &remap(&r.terms), c / nrm);
                    }
                    let mut u: Vec<(usize, f64)> = Vec::new();
                    for (r, y) in rows.iter().zip(&ys) {
                        u.extend(r.terms.iter().map(|&(i, a)| (i, a * y)));
                    }
                    add_outer(h, n, &remap(&u), -c / (nrm * nrm * nrm));
                }
            }
        }
    }

    /// Variables this function touches.
    /// Variables of each nonlinear atom; the Hessian couples only within these.
    pub fn atom_supports(&self) -> Vec<Vec<usize>> {
        self.atoms
            .iter()
            .map(|a| match a {
                Atom::Scalar { arg, .. } => arg.terms.iter().map(|t| t.0).collect(),
                Atom::Norm { rows, .. } => rows
                    .iter()
                    .flat_map(|r| r.terms.iter().map(|t| t.0))
                    .collect(),
            })
            .collect()
    }

    pub fn support(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.affine.terms.iter().map(|t| t.0).collect();
        for a in &self.atoms {
            match a {
                Atom::Scalar { arg, .. } => v.extend(arg.terms.iter().map(|t| t.0)),
                Atom::Norm { rows, .. } => {
                    for r in rows {
                        v.extend(r.terms.iter().map(|t| t.0));
                    }
                }
            }
        }
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// h += c * u u^T for sparse u (repeated indices allowed).
pub fn add_outer(h: &mut [f64], n: usize, u: &[(usize, f64)], c: f64) {
    for &(i, a) in u {
        let row = &mut h[i * n..(i + 1) * n];
        let ca = c * a;
        for &(j, b) in u {
            row[j] += ca * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: &Func, u: f64) {
        let (_, d1, d2) = f.eval(u).unwrap();
        let h = 1e-5 * u.abs().max(1.0);
        let fp = f.eval(u + h).unwrap();
        let fm = f.eval(u - h).unwrap();
        let g = (fp.0 - fm.0) / (2.0 * h);
        let c = (fp.1 - fm.1) / (2.0 * h);
        assert!(
            (g - d1).abs() <= 1e-6 * d1.abs().max(1.0),
            "{f:?} slope at {u}"
        );
        assert!(
            (c - d2).abs() <= 1e-6 * d2.abs().max(1.0),
            "{f:?} curvature at {u}"
        );
    }

    #[test]
    fn scalar_derivatives() {
        for u in [-3.0, -0.5, 0.7, 2.0, 10.0] {
            fd_check(&Func::Square, u);
            fd_check(&Func::Softplus, u);
            fd_check(&Func::Exp, u);
        }
        for u in [0.3, 1.0, 4.0] {
            fd_check(&Func::CubePos, u);
            fd_check(&Func::NegLog, u);
            fd_check(&Func::Recip, u);
            fd_check(&Func::NegSqrt { eps2: 1e-18 }, u);
        }
    }

    #[test]
    fn softplus_is_overflow_safe() {
        let (v, s, _) = Func::Softplus.eval(800.0).unwrap();
        assert_eq!(v, 800.0);
        assert_eq!(s, 1.0);
        let (v, _, _) = Func::Softplus.eval(-800.0).unwrap();
        assert_eq!(v, 0.0);
        assert!((Func::Softplus.eval(0.0).unwrap().0 - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn domain_violations() {
        assert!(Func::NegLog.eval(0.0).is_none());
        assert!(Func::Recip.eval(-1.0).is_none());
        let g = Smooth::default().with(1.0, Func::NegLog, LinExpr::var(0));
        assert!(g.value(&[-1.0]).is_none());
    }

    #[test]
    fn norm_hessian_matches_differences() {
        let g = Smooth::default().with_norm(
            2.0,
            vec![LinExpr::var(0).term(1, -1.0), LinExpr::var(1).plus(0.5)],
            1e-3,
        );
        let x = [0.3, -0.8];
        let mut h = vec![0.0; 4];
        g.add_hessian(&x, 1.0, &mut h, 2);
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += 1e-6;
            xm[j] -= 1e-6;
            let gp = g.gradient_dense(&xp);
            let gm = g.gradient_dense(&xm);
            for i in 0..2 {
                let fd = (gp[i] - gm[i]) / 2e-6;
                assert!((fd - h[i * 2 + j]).abs() < 1e-5);
            }
        }
    }
}
