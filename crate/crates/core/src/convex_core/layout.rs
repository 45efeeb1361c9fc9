//! Index map of the decision vector, slot-major so Newton systems stay banded.
//!
//! Velocities are not stored: v[n] = (r[n] - r[n-1]) / Delta_T is an affine
//! expression of the positions, which also makes the displacement rule exact.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    PTilde {
        k: usize,
        i: usize,
        n: usize,
    },
    Pos {
        n: usize,
        axis: usize,
    },
    VBar(usize),
    T(usize),
    Theta {
        k: usize,
        n: usize,
    },
    /// Battery level at the end of slot n.
    QNext(usize),
    Varpi(usize),
    Mu(usize),
    B(usize),
    L(usize),
    Gamma(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableLayout {
    pub k: usize,
    pub n_f: usize,
    pub n_h: usize,
    pub sca: bool,
    block: usize,
}

impl VariableLayout {
    pub fn new(k: usize, n_f: usize, n_h: usize, sca: bool) -> VariableLayout {
        let block = k * n_f + 3 + 1 + 1 + k + 1 + if sca { 5 } else { 0 };
        VariableLayout {
            k,
            n_f,
            n_h,
            sca,
            block,
        }
    }

    pub fn len(&self) -> usize {
        self.block * self.n_h
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block(&self) -> usize {
        self.block
    }

    fn base(&self, n: usize) -> usize {
        debug_assert!(n < self.n_h);
        n * self.block
    }

    pub fn p(&self, k: usize, i: usize, n: usize) -> usize {
        self.base(n) + k * self.n_f + i
    }

    pub fn r(&self, n: usize, axis: usize) -> usize {
        self.base(n) + self.k * self.n_f + axis
    }

    pub fn vbar(&self, n: usize) -> usize {
        self.base(n) + self.k * self.n_f + 3
    }

    pub fn t(&self, n: usize) -> usize {
        self.vbar(n) + 1
    }

    pub fn theta(&self, k: usize, n: usize) -> usize {
        self.t(n) + 1 + k
    }

    pub fn q_next(&self, n: usize) -> usize {
        self.t(n) + 1 + self.k
    }

    fn extra(&self, n: usize, j: usize) -> usize {
        assert!(self.sca, "variable only exists in the SCA layout");
        self.q_next(n) + 1 + j
    }

    pub fn varpi(&self, n: usize) -> usize {
        self.extra(n, 0)
    }

    pub fn mu(&self, n: usize) -> usize {
        self.extra(n, 1)
    }

    pub fn b(&self, n: usize) -> usize {
        self.extra(n, 2)
    }

    pub fn l(&self, n: usize) -> usize {
        self.extra(n, 3)
    }

    pub fn gamma(&self, n: usize) -> usize {
        self.extra(n, 4)
    }

    pub fn decode(&self, idx: usize) -> Option<Var> {
        if idx >= self.len() {
            return None;
        }
        let n = idx / self.block;
        let mut o = idx % self.block;
        let kf = self.k * self.n_f;
        if o < kf {
            return Some(Var::PTilde {
                k: o / self.n_f,
                i: o % self.n_f,
                n,
            });
        }
        o -= kf;
        if o < 3 {
            return Some(Var::Pos { n, axis: o });
        }
        o -= 3;
        match o {
            0 => return Some(Var::VBar(n)),
            1 => return Some(Var::T(n)),
            _ => {}
        }
        o -= 2;
        if o < self.k {
            return Some(Var::Theta { k: o, n });
        }
        o -= self.k;
        Some(match o {
            0 => Var::QNext(n),
            1 => Var::Varpi(n),
            2 => Var::Mu(n),
            3 => Var::B(n),
            4 => Var::L(n),
            _ => Var::Gamma(n),
        })
    }

    pub fn encode(&self, v: Var) -> usize {
        match v {
            Var::PTilde { k, i, n } => self.p(k, i, n),
            Var::Pos { n, axis } => self.r(n, axis),
            Var::VBar(n) => self.vbar(n),
            Var::T(n) => self.t(n),
            Var::Theta { k, n } => self.theta(k, n),
            Var::QNext(n) => self.q_next(n),
            Var::Varpi(n) => self.varpi(n),
            Var::Mu(n) => self.mu(n),
            Var::B(n) => self.b(n),
            Var::L(n) => self.l(n),
            Var::Gamma(n) => self.gamma(n),
        }
    }
}
