//! Problem instance, derived constants, user placement and channel draws.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

const JOULES_PER_WH: f64 = 3600.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalConstants {
    pub c: f64,
    pub f0: f64,
    pub w_bw: f64,
    pub n_f: usize,
    pub b: f64,
    pub n0: f64,
    pub eps_pa: f64,
    pub p_static: f64,
    pub p_max: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolarParams {
    pub eta: f64,
    pub s: f64,
    pub g: f64,
    pub beta_c: f64,
    pub l_low: f64,
    pub l_up: f64,
    pub k_c: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AeroParams {
    pub m: f64,
    pub g: f64,
    pub rho: f64,
    pub a: f64,
    pub c_d0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitsParams {
    pub v_max_xy: f64,
    pub v_max_z: f64,
    pub a_max: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub q_max: f64,
    pub q0: f64,
    pub q_end: f64,
    pub r_req: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    pub zeta: f64,
    pub w_weight: f64,
    pub v_h: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub c1: f64,
    pub c2: f64,
    pub e_const: f64,
}

impl DerivedConstants {
    pub fn hover_power(&self) -> f64 {
        self.rho1 / (2.0f64.sqrt() * self.v_h)
    }

    /// Level-flight coefficient at hover, 1/(sqrt(2) V_h).
    pub fn mu_hover(&self) -> f64 {
        1.0 / (2.0f64.sqrt() * self.v_h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub constants: PhysicalConstants,
    pub solar: SolarParams,
    pub aero: AeroParams,
    pub limits: LimitsParams,
    pub derived: DerivedConstants,
    pub users: Vec<[f64; 2]>,
    pub n_t: usize,
    pub delta_t: f64,
    pub r_init: [f64; 3],
    pub xi: f64,
    pub seed: u64,
}

/// Solver knobs carried alongside a scenario in config files.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub vertex_cap: usize,
    pub max_polyblock_iters: usize,
    pub max_sca_iters: usize,
    pub replan_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps1: 0.01,
            eps2: 0.01,
            eps3: 0.01,
            vertex_cap: 100_000,
            max_polyblock_iters: 2000,
            max_sca_iters: 100,
            replan_every: 1,
        }
    }
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

pub fn derive_constants(
    constants: &PhysicalConstants,
    solar: &SolarParams,
    aero: &AeroParams,
    limits: &LimitsParams,
    delta_t: f64,
) -> Result<DerivedConstants> {
    positive("c", constants.c)?;
    positive("f0", constants.f0)?;
    positive("m", aero.m)?;
    positive("g", aero.g)?;
    positive("rho", aero.rho)?;
    positive("A", aero.a)?;
    positive("C_D0", aero.c_d0)?;
    positive("Delta_T", delta_t)?;
    let zeta = (constants.c / (4.0 * PI * constants.f0)).powi(2);
    let w_weight = aero.m * aero.g;
    let v_h = (w_weight / (2.0 * aero.rho * aero.a)).sqrt();
    let rho1 = w_weight * w_weight / (2.0f64.sqrt() * aero.rho * aero.a);
    let rho2 = aero.c_d0 * aero.rho * aero.a / 8.0;
    let esg = solar.eta * solar.s * solar.g;
    let atten = (-solar.beta_c * (solar.l_up - solar.l_low)).exp();
    let c1 = esg * (1.0 - atten);
    let c2 = esg * atten;
    let e_const = (c1 * delta_t / (1.0 + (-solar.k_c * (limits.z_max - solar.alpha)).exp())).ln();
    Ok(DerivedConstants {
        zeta,
        w_weight,
        v_h,
        rho1,
        rho2,
        c1,
        c2,
        e_const,
    })
}

impl Scenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        constants: PhysicalConstants,
        solar: SolarParams,
        aero: AeroParams,
        limits: LimitsParams,
        users: Vec<[f64; 2]>,
        n_t: usize,
        delta_t: f64,
        r_init: [f64; 3],
        xi: f64,
        seed: u64,
    ) -> Result<Scenario> {
        let derived = derive_constants(&constants, &solar, &aero, &limits, delta_t)?;
        let sc = Scenario {
            constants,
            solar,
            aero,
            limits,
            derived,
            users,
            n_t,
            delta_t,
            r_init,
            xi,
            seed,
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Recompute derived constants after editing component parameters.
    pub fn rederive(mut self) -> Result<Scenario> {
        self.constants.b = self.constants.w_bw / self.constants.n_f as f64;
        self.derived = derive_constants(
            &self.constants,
            &self.solar,
            &self.aero,
            &self.limits,
            self.delta_t,
        )?;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.constants;
        let l = &self.limits;
        let s = &self.solar;
        if self.users.is_empty() {
            return Err(Error::invalid("users", "at least one user required"));
        }
        if c.n_f == 0 {
            return Err(Error::invalid("N_F", "must be at least 1"));
        }
        if self.n_t == 0 {
            return Err(Error::invalid("N_T", "must be at least 1"));
        }
        positive("W_bw", c.w_bw)?;
        positive("N0", c.n0)?;
        if ((c.b * c.n_f as f64) - c.w_bw).abs() > 1e-9 * c.w_bw {
            return Err(Error::invalid("B", "B * N_F must equal W_bw"));
        }
        if !(c.eps_pa > 0.0 && c.eps_pa < 1.0) {
            return Err(Error::invalid("eps_pa", "must lie in (0, 1)"));
        }
        if !(c.p_static >= 0.0) {
            return Err(Error::invalid("P_static", "must be nonnegative"));
        }
        if !(c.p_max >= 0.0 && c.p_max.is_finite()) {
            return Err(Error::invalid("P_max", "must be nonnegative"));
        }
        if !(c.kappa >= 0.0) {
            return Err(Error::invalid("kappa", "must be nonnegative"));
        }
        if !(s.l_low < s.l_up) {
            return Err(Error::invalid("L_low", "must be below L_up"));
        }
        if !(s.beta_c >= 0.0) {
            return Err(Error::invalid("beta_c", "must be nonnegative"));
        }
        if !(s.k_c >= 0.0) {
            return Err(Error::invalid("k_c", "must be nonnegative"));
        }
        if !(s.alpha >= 0.0) {
            return Err(Error::invalid("alpha", "must be nonnegative"));
        }
        if !(s.eta >= 0.0 && s.s >= 0.0 && s.g >= 0.0) {
            return Err(Error::invalid(
                "eta",
                "solar parameters must be nonnegative",
            ));
        }
        positive("V_max_xy", l.v_max_xy)?;
        positive("V_max_z", l.v_max_z)?;
        positive("a_max", l.a_max)?;
        if !(l.z_min > 0.0 && l.z_min < l.z_max) {
            return Err(Error::invalid("z_min", "need 0 < z_min < z_max"));
        }
        positive("q_max", l.q_max)?;
        if !(l.q0 >= 0.0 && l.q0 <= l.q_max) {
            return Err(Error::invalid("q0", "need 0 <= q0 <= q_max"));
        }
        if !(l.q_end >= 0.0 && l.q_end <= l.q_max) {
            return Err(Error::invalid("q_end", "need 0 <= q_end <= q_max"));
        }
        if l.r_req.len() != self.users.len() {
            return Err(Error::invalid(
                "R_req_k",
                format!(
                    "expected {} entries, got {}",
                    self.users.len(),
                    l.r_req.len()
                ),
            ));
        }
        if l.r_req.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::invalid("R_req_k", "rates must be nonnegative"));
        }
        let z0 = self.r_init[2];
        if !(z0 >= l.z_min && z0 <= l.z_max) {
            return Err(Error::invalid("r_init", "altitude outside [z_min, z_max]"));
        }
        if !(self.xi >= 1.0) {
            return Err(Error::invalid("xi", "must be at least 1"));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.users.len()
    }

    pub fn n_f(&self) -> usize {
        self.constants.n_f
    }

    pub fn user_pos(&self, k: usize) -> [f64; 3] {
        [self.users[k][0], self.users[k][1], 0.0]
    }

    /// Mean effective gain, with unit-mean small-scale fading.
    pub fn mean_gain(&self) -> f64 {
        self.derived.zeta / (self.constants.n0 * self.constants.b)
    }

    /// Table-I parameters with `k` users placed in an 800 m disc.
    pub fn table_one(k: usize, n_t: usize, seed: u64) -> Scenario {
        let constants = PhysicalConstants {
            c: 3.0e8,
            f0: 700e6,
            w_bw: 5e6,
            n_f: 64,
            b: 5e6 / 64.0,
            n0: dbm_to_w(-174.0),
            eps_pa: 0.5,
            p_static: 5.0,
            p_max: dbm_to_w(42.0),
            kappa: db_to_linear(6.0),
        };
        let solar = SolarParams {
            eta: 0.4,
            s: 1.0,
            g: 1367.0,
            beta_c: 0.01,
            l_low: 700.0,
            l_up: 1400.0,
            k_c: 0.05,
            alpha: 1351.0,
        };
        let aero = AeroParams {
            m: 4.0,
            g: 9.8,
            rho: 1.225,
            a: 0.18,
            c_d0: 0.08,
        };
        let limits = LimitsParams {
            v_max_xy: 10.0,
            v_max_z: 4.0,
            a_max: 2.0,
            z_min: 100.0,
            z_max: 1600.0,
            q_max: 222.0 * JOULES_PER_WH,
            q0: 111.0 * JOULES_PER_WH,
            q_end: 55.0 * JOULES_PER_WH,
            r_req: vec![50e6 / k as f64; k],
        };
        let users = place_users_in_disc(k, 800.0, seed);
        Scenario::new(
            constants,
            solar,
            aero,
            limits,
            users,
            n_t,
            0.02,
            [0.0, 0.0, 100.0],
            1e6,
            seed,
        )
        .expect("Table-I parameters are valid")
    }
}

/// Domains separate the independent random streams derived from one seed.
pub mod stream {
    pub const CHANNEL: u64 = 1;
    pub const USERS: u64 = 2;
    pub const ASSIGNMENT: u64 = 3;
}

/// Counter-keyed generator: the stream depends only on (seed, domain, index).
pub fn keyed_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

pub fn place_users_in_disc(k: usize, radius: f64, seed: u64) -> Vec<[f64; 2]> {
    (0..k)
        .map(|j| {
            let mut rng = keyed_rng(seed, stream::USERS, j as u64);
            let r = radius * rng.gen::<f64>().sqrt();
            let phi = 2.0 * PI * rng.gen::<f64>();
            [r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

/// One Rician |h|^2 sample with unit mean.
pub fn rician_power<R: Rng>(kappa: f64, rng: &mut R) -> f64 {
    if kappa.is_infinite() {
        return 1.0;
    }
    let los = (kappa / (kappa + 1.0)).sqrt();
    let sigma = (0.5 / (kappa + 1.0)).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let a = los + sigma * re;
    let b = sigma * im;
    a * a + b * b
}

/// Closed-form variance of unit-mean Rician power.
pub fn rician_power_variance(kappa: f64) -> f64 {
    if kappa.is_infinite() {
        return 0.0;
    }
    (2.0 * kappa + 1.0) / ((kappa + 1.0) * (kappa + 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    pub k: usize,
    pub n_f: usize,
    pub n_t: usize,
    /// Effective gains, indexed `[(k * n_f + i) * n_t + n]`.
    pub gains: Vec<f64>,
    /// Mean effective gains, indexed `[k * n_f + i]`.
    pub mean_gain: Vec<f64>,
}

impl ChannelTensor {
    pub fn h(&self, k: usize, i: usize, n: usize) -> f64 {
        self.gains[(k * self.n_f + i) * self.n_t + n]
    }

    pub fn mean(&self, k: usize, i: usize) -> f64 {
        self.mean_gain[k * self.n_f + i]
    }

    pub fn constant(k: usize, n_f: usize, n_t: usize, value: f64) -> ChannelTensor {
        ChannelTensor {
            k,
            n_f,
            n_t,
            gains: vec![value; k * n_f * n_t],
            mean_gain: vec![value; k * n_f],
        }
    }
}

pub fn channel_index(sc: &Scenario, k: usize, i: usize, n: usize) -> u64 {
    ((k * sc.n_f() + i) * sc.n_t + n) as u64
}

pub fn generate_channels(sc: &Scenario) -> ChannelTensor {
    let (k_users, n_f, n_t) = (sc.k(), sc.n_f(), sc.n_t);
    let mean = sc.mean_gain();
    let mut gains = Vec::with_capacity(k_users * n_f * n_t);
    for k in 0..k_users {
        for i in 0..n_f {
            for n in 0..n_t {
                let mut rng = keyed_rng(sc.seed, stream::CHANNEL, channel_index(sc, k, i, n));
                gains.push(mean * rician_power(sc.constants.kappa, &mut rng));
            }
        }
    }
    ChannelTensor {
        k: k_users,
        n_f,
        n_t,
        gains,
        mean_gain: vec![mean; k_users * n_f],
    }
}

// ---------------------------------------------------------------- config

type Table = toml::Table;

fn section<'a>(root: &'a Table, name: &str) -> Result<&'a Table> {
    root.get(name)
        .ok_or_else(|| Error::MissingField(name.to_string()))?
        .as_table()
        .ok_or_else(|| Error::invalid(name, "expected a section"))
}

fn as_f64(field: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::invalid(field, "expected a number")),
    }
}

fn opt_f64(t: &Table, field: &str) -> Result<Option<f64>> {
    t.get(field).map(|v| as_f64(field, v)).transpose()
}

fn req_f64(t: &Table, field: &str) -> Result<f64> {
    opt_f64(t, field)?.ok_or_else(|| Error::MissingField(field.to_string()))
}

fn req_usize(t: &Table, field: &str) -> Result<usize> {
    match t.get(field) {
        Some(toml::Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
        Some(_) => Err(Error::invalid(field, "expected a nonnegative integer")),
        None => Err(Error::MissingField(field.to_string())),
    }
}

/// Power in W from `field` or `field_dbm`.
fn power_w(t: &Table, field: &str) -> Result<f64> {
    if let Some(v) = opt_f64(t, field)? {
        return Ok(v);
    }
    if let Some(v) = opt_f64(t, &format!("{field}_dbm"))? {
        return Ok(dbm_to_w(v));
    }
    Err(Error::MissingField(field.to_string()))
}

/// Energy in J from `field` or `field_wh`.
fn energy_j(t: &Table, field: &str) -> Result<f64> {
    if let Some(v) = opt_f64(t, field)? {
        return Ok(v);
    }
    if let Some(v) = opt_f64(t, &format!("{field}_wh"))? {
        return Ok(v * JOULES_PER_WH);
    }
    Err(Error::MissingField(field.to_string()))
}

fn f64_list(field: &str, v: &toml::Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::invalid(field, "expected an array"))?
        .iter()
        .map(|x| as_f64(field, x))
        .collect()
}

fn parse_users(t: &Table, seed: u64) -> Result<Vec<[f64; 2]>> {
    if let Some(pos) = t.get("positions") {
        let arr = pos
            .as_array()
            .ok_or_else(|| Error::invalid("positions", "expected an array of [x, y]"))?;
        return arr
            .iter()
            .map(|p| {
                let xy = f64_list("positions", p)?;
                if xy.len() != 2 {
                    return Err(Error::invalid("positions", "each entry must be [x, y]"));
                }
                Ok([xy[0], xy[1]])
            })
            .collect();
    }
    let k = req_usize(t, "K")?;
    let radius = opt_f64(t, "radius")?.unwrap_or(800.0);
    Ok(place_users_in_disc(k, radius, seed))
}

pub fn load_config(text: &str) -> Result<(Scenario, SolverOptions)> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let phys = section(&root, "physical")?;
    let sol = section(&root, "solar")?;
    let aer = section(&root, "aero")?;
    let lim = section(&root, "limits")?;
    let hor = section(&root, "horizon")?;
    let usr = section(&root, "users")?;
    let empty = Table::new();
    let slv = match root.get("solver") {
        Some(v) => v
            .as_table()
            .ok_or_else(|| Error::invalid("solver", "expected a section"))?,
        None => &empty,
    };

    let w_bw = req_f64(phys, "W_bw")?;
    let n_f = req_usize(phys, "N_F")?;
    let n0 = if let Some(v) = opt_f64(phys, "N0")? {
        v
    } else if let Some(v) = opt_f64(phys, "N0_dbm")? {
        dbm_to_w(v)
    } else {
        return Err(Error::MissingField("N0".into()));
    };
    let kappa = if let Some(v) = opt_f64(phys, "kappa")? {
        v
    } else if let Some(v) = opt_f64(phys, "kappa_db")? {
        db_to_linear(v)
    } else {
        return Err(Error::MissingField("kappa".into()));
    };
    if n_f == 0 {
        return Err(Error::invalid("N_F", "must be at least 1"));
    }
    let constants = PhysicalConstants {
        c: opt_f64(phys, "c")?.unwrap_or(3.0e8),
        f0: req_f64(phys, "f0")?,
        w_bw,
        n_f,
        b: w_bw / n_f as f64,
        n0,
        eps_pa: req_f64(phys, "eps_pa")?,
        p_static: power_w(phys, "P_static")?,
        p_max: power_w(phys, "P_max")?,
        kappa,
    };
    let solar = SolarParams {
        eta: req_f64(sol, "eta")?,
        s: req_f64(sol, "S")?,
        g: req_f64(sol, "G")?,
        beta_c: req_f64(sol, "beta_c")?,
        l_low: req_f64(sol, "L_low")?,
        l_up: req_f64(sol, "L_up")?,
        k_c: req_f64(sol, "k_c")?,
        alpha: req_f64(sol, "alpha")?,
    };
    let aero = AeroParams {
        m: req_f64(aer, "m")?,
        g: req_f64(aer, "g")?,
        rho: req_f64(aer, "rho")?,
        a: req_f64(aer, "A")?,
        c_d0: req_f64(aer, "C_D0")?,
    };
    let seed = match slv.get("seed") {
        Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(_) => return Err(Error::invalid("seed", "expected a nonnegative integer")),
        None => 0,
    };
    let users = parse_users(usr, seed)?;
    let r_req = if let Some(v) = lim.get("R_req_k") {
        f64_list("R_req_k", v)?
    } else if let Some(total) = opt_f64(lim, "R_req_total")? {
        vec![total / users.len().max(1) as f64; users.len()]
    } else {
        return Err(Error::MissingField("R_req_k".into()));
    };
    let limits = LimitsParams {
        v_max_xy: req_f64(lim, "V_max_xy")?,
        v_max_z: req_f64(lim, "V_max_z")?,
        a_max: req_f64(lim, "a_max")?,
        z_min: req_f64(lim, "z_min")?,
        z_max: req_f64(lim, "z_max")?,
        q_max: energy_j(lim, "q_max")?,
        q0: energy_j(lim, "q0")?,
        q_end: energy_j(lim, "q_end")?,
        r_req,
    };
    let n_t = req_usize(hor, "N_T")?;
    let delta_t = req_f64(hor, "Delta_T")?;
    let r_init = match hor.get("r_init") {
        Some(v) => {
            let r = f64_list("r_init", v)?;
            if r.len() != 3 {
                return Err(Error::invalid("r_init", "expected [x, y, z]"));
            }
            [r[0], r[1], r[2]]
        }
        None => [0.0, 0.0, limits.z_min],
    };
    let xi = opt_f64(slv, "xi")?.unwrap_or(1e6);

    let d = SolverOptions::default();
    let get_usize = |name: &str, default: usize| -> Result<usize> {
        if slv.contains_key(name) {
            req_usize(slv, name)
        } else {
            Ok(default)
        }
    };
    let opts = SolverOptions {
        eps1: opt_f64(slv, "eps1")?.unwrap_or(d.eps1),
        eps2: opt_f64(slv, "eps2")?.unwrap_or(d.eps2),
        eps3: opt_f64(slv, "eps3")?.unwrap_or(d.eps3),
        vertex_cap: get_usize("vertex_cap", d.vertex_cap)?,
        max_polyblock_iters: get_usize("max_polyblock_iters", d.max_polyblock_iters)?,
        max_sca_iters: get_usize("max_sca_iters", d.max_sca_iters)?,
        replan_every: get_usize("replan_every", d.replan_every)?.max(1),
    };
    let sc = Scenario::new(
        constants, solar, aero, limits, users, n_t, delta_t, r_init, xi, seed,
    )?;
    Ok((sc, opts))
}

pub fn load_scenario(text: &str) -> Result<Scenario> {
    load_config(text).map(|(sc, _)| sc)
}

/// Serialize a scenario back to the config format.
pub fn to_config(sc: &Scenario, opts: &SolverOptions) -> String {
    let c = &sc.constants;
    let s = &sc.solar;
    let a = &sc.aero;
    let l = &sc.limits;
    let list = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let users = sc
        .users
        .iter()
        .map(|u| format!("[{:?}, {:?}]", u[0], u[1]))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "[physical]\nc = {:?}\nf0 = {:?}\nW_bw = {:?}\nN_F = {}\nN0 = {:?}\neps_pa = {:?}\nP_static = {:?}\nP_max = {:?}\nkappa = {}\n\n\
         [solar]\neta = {:?}\nS = {:?}\nG = {:?}\nbeta_c = {:?}\nL_low = {:?}\nL_up = {:?}\nk_c = {:?}\nalpha = {:?}\n\n\
         [aero]\nm = {:?}\ng = {:?}\nrho = {:?}\nA = {:?}\nC_D0 = {:?}\n\n\
         [limits]\nV_max_xy = {:?}\nV_max_z = {:?}\na_max = {:?}\nz_min = {:?}\nz_max = {:?}\nq_max = {:?}\nq0 = {:?}\nq_end = {:?}\nR_req_k = [{}]\n\n\
         [horizon]\nN_T = {}\nDelta_T = {:?}\nr_init = [{}]\n\n\
         [users]\npositions = [{}]\n\n\
         [solver]\nxi = {:?}\nseed = {}\neps1 = {:?}\neps2 = {:?}\neps3 = {:?}\nvertex_cap = {}\nmax_polyblock_iters = {}\nmax_sca_iters = {}\nreplan_every = {}\n",
        c.c, c.f0, c.w_bw, c.n_f, c.n0, c.eps_pa, c.p_static, c.p_max,
        if c.kappa.is_infinite() { "inf".to_string() } else { format!("{:?}", c.kappa) },
        s.eta, s.s, s.g, s.beta_c, s.l_low, s.l_up, s.k_c, s.alpha,
        a.m, a.g, a.rho, a.a, a.c_d0,
        l.v_max_xy, l.v_max_z, l.a_max, l.z_min, l.z_max, l.q_max, l.q0, l.q_end, list(&l.r_req),
        sc.n_t, sc.delta_t, list(&sc.r_init),
        users,
        sc.xi, sc.seed, opts.eps1, opts.eps2, opts.eps3, opts.vertex_cap,
        opts.max_polyblock_iters, opts.max_sca_iters, opts.replan_every,
    )
}
