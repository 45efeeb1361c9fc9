//! Solar harvesting, aerodynamic power and battery ledger arithmetic.

use crate::error::{Error, Result};
use crate::scenario::{AeroParams, DerivedConstants, Scenario, SolarParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavKinematics {
    pub r: [f64; 3],
    pub v: [f64; 3],
}

/// Piecewise solar output under a cloud layer.
pub fn solar_power_actual(z: f64, solar: &SolarParams) -> f64 {
    let esg = solar.eta * solar.s * solar.g;
    if z >= solar.l_up {
        esg
    } else if z >= solar.l_low {
        esg * (-solar.beta_c * (solar.l_up - z)).exp()
    } else {
        esg * (-solar.beta_c * (solar.l_up - solar.l_low)).exp()
    }
}

/// Logistic 1/(1+e^{-k(z-alpha)}) without overflow.
pub fn sigmoid(z: f64, solar: &SolarParams) -> f64 {
    let u = solar.k_c * (z - solar.alpha);
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Derivative of `sigmoid` in z.
pub fn sigmoid_dz(z: f64, solar: &SolarParams) -> f64 {
    let s = sigmoid(z, solar);
    solar.k_c * s * (1.0 - s)
}

/// Sigmoid lower bound used for planning.
///
/// The plain sigmoid form exceeds the flat below-cloud output by C1*sigma(z), so
/// the constant term is lowered by C1*sigma(L_low) to keep the bound valid there.
pub fn solar_power_bound(z: f64, derived: &DerivedConstants, solar: &SolarParams) -> f64 {
    derived.c1 * sigmoid(z, solar) + planning_c2(derived, solar)
}

/// Constant term of the planning bound.
pub fn planning_c2(derived: &DerivedConstants, solar: &SolarParams) -> f64 {
    derived.c2 - derived.c1 * sigmoid(solar.l_low, solar)
}

/// h(s) = 1/sqrt(s^2 + sqrt(s^4 + 4 V_h^4)); level power is rho1 * h(s).
pub fn level_coefficient(speed_xy: f64, v_h: f64) -> f64 {
    let s2 = speed_xy * speed_xy;
    1.0 / (s2 + (s2 * s2 + 4.0 * v_h.powi(4)).sqrt()).sqrt()
}

pub fn level_power(speed_xy: f64, derived: &DerivedConstants) -> f64 {
    derived.rho1 * level_coefficient(speed_xy, derived.v_h)
}

pub fn vertical_power(vz: f64, derived: &DerivedConstants) -> f64 {
    derived.w_weight * vz
}

pub fn drag_power(speed_xy: f64, derived: &DerivedConstants) -> f64 {
    derived.rho2 * speed_xy.powi(3)
}

pub fn aero_power(v: [f64; 3], derived: &DerivedConstants, _aero: &AeroParams) -> f64 {
    let s = v[0].hypot(v[1]);
    level_power(s, derived) + vertical_power(v[2], derived) + drag_power(s, derived)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerStep {
    pub q_next: f64,
    /// Harvested power over the slot (W).
    pub harvested: f64,
    /// Energy discarded by the capacity clamp (J).
    pub overflow: f64,
}

/// Advance the battery by one slot; harvest uses the bound or the actual curve.
pub fn ledger_step(
    sc: &Scenario,
    q_n: f64,
    consumed_power: f64,
    z: f64,
    use_bound: bool,
) -> Result<LedgerStep> {
    let dt = sc.delta_t;
    let need = consumed_power * dt;
    if need > q_n + 1e-9 * q_n.max(1.0) {
        return Err(Error::BatteryDepleted { need, have: q_n });
    }
    let harvested = if use_bound {
        solar_power_bound(z, &sc.derived, &sc.solar)
    } else {
        solar_power_actual(z, &sc.solar)
    };
    let raw = q_n + (harvested - consumed_power) * dt;
    let q_next = raw.min(sc.limits.q_max);
    Ok(LedgerStep {
        q_next,
        harvested,
        overflow: raw - q_next,
    })
}

/// Least concave majorant of the sigmoid on [z_lo, z_hi]: a line from z_lo up to
/// the tangency point, the sigmoid itself beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmoidEnvelope {
    solar: SolarParams,
    z_lo: f64,
    s_lo: f64,
    z_t: f64,
    slope: f64,
    linear_tail: bool,
}

impl SigmoidEnvelope {
    pub fn new(solar: &SolarParams, z_lo: f64, z_hi: f64) -> SigmoidEnvelope {
        let s_lo = sigmoid(z_lo, solar);
        let mut env = SigmoidEnvelope {
            solar: solar.clone(),
            z_lo,
            s_lo,
            z_t: z_lo,
            slope: sigmoid_dz(z_lo, solar),
            linear_tail: false,
        };
        if solar.k_c == 0.0 || z_lo >= solar.alpha {
            return env;
        }
        let gap = |z: f64| sigmoid_dz(z, solar) * (z - z_lo) - (sigmoid(z, solar) - s_lo);
        if gap(z_hi) > 0.0 {
            env.z_t = z_hi;
            env.slope = (sigmoid(z_hi, solar) - s_lo) / (z_hi - z_lo);
            env.linear_tail = true;
            return env;
        }
        let (mut a, mut b) = (solar.alpha, z_hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if gap(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        env.z_t = 0.5 * (a + b);
        env.slope = sigmoid_dz(env.z_t, solar);
        env
    }

    /// Value, first and second derivative.
    pub fn eval(&self, z: f64) -> (f64, f64, f64) {
        if z <= self.z_t || self.linear_tail {
            (self.s_lo + self.slope * (z - self.z_lo), self.slope, 0.0)
        } else {
            let s = sigmoid(z, &self.solar);
            let k = self.solar.k_c;
            (
                s,
                k * s * (1.0 - s),
                k * k * s * (1.0 - s) * (1.0 - 2.0 * s),
            )
        }
    }

    pub fn tangent_point(&self) -> f64 {
        self.z_t
    }
}

/// h(s) with first and second derivative in s.
pub fn level_coefficient_derivs(s: f64, v_h: f64) -> (f64, f64, f64) {
    let s2 = s * s;
    let r = (s2 * s2 + 4.0 * v_h.powi(4)).sqrt();
    let w = s2 + r;
    let w1 = 2.0 * s + 2.0 * s * s2 / r;
    let w2 = 2.0 + 6.0 * s2 / r - 4.0 * s2 * s2 * s2 / (r * r * r);
    let h = w.powf(-0.5);
    let h1 = -0.5 * w.powf(-1.5) * w1;
    let h2 = 0.75 * w.powf(-2.5) * w1 * w1 - 0.5 * w.powf(-1.5) * w2;
    (h, h1, h2)
}

/// Greatest convex minorant of the level coefficient h(s) on [0, s_max]: a line
/// from s = 0 down to the tangency point, h itself beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelEnvelope {
    v_h: f64,
    h0: f64,
    s_t: f64,
    slope: f64,
    linear_tail: bool,
}

impl LevelEnvelope {
    pub fn new(v_h: f64, s_max: f64) -> LevelEnvelope {
        let h0 = level_coefficient(0.0, v_h);
        let gap = |s: f64| {
            let (h, h1, _) = level_coefficient_derivs(s, v_h);
            h - h0 - h1 * s
        };
        if s_max <= 0.0 {
            return LevelEnvelope {
                v_h,
                h0,
                s_t: 0.0,
                slope: 0.0,
                linear_tail: false,
            };
        }
        if gap(s_max) > 0.0 {
            let slope = (level_coefficient(s_max, v_h) - h0) / s_max;
            return LevelEnvelope {
                v_h,
                h0,
                s_t: s_max,
                slope,
                linear_tail: true,
            };
        }
        let (mut a, mut b) = (1e-9 * v_h, s_max);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if gap(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let s_t = 0.5 * (a + b);
        let slope = level_coefficient_derivs(s_t, v_h).1;
        LevelEnvelope {
            v_h,
            h0,
            s_t,
            slope,
            linear_tail: false,
        }
    }

    /// Value, first and second derivative; arguments below zero use the line.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        if s <= self.s_t || self.linear_tail {
            (self.h0 + self.slope * s, self.slope, 0.0)
        } else {
            level_coefficient_derivs(s, self.v_h)
        }
    }

    pub fn tangent_point(&self) -> f64 {
        self.s_t
    }
}
