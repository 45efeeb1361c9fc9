use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use uavopt::oracle::{solve_oracle, OracleGrid};
use uavopt::problem::PlanningProblem;
use uavopt::rate_model::TAU_P;
use uavopt::rollout::{audit_plan, run, Planner, RolloutTrace, SlotRecord};
use uavopt::scenario::{
    dbm_to_w, generate_channels, load_config, place_users_in_disc, Scenario, SolverOptions,
};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "uavopt",
    version,
    about = "Trajectory and resource planning for a solar-powered UAV base station"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one planner and write trace, allocation, summary and convergence files.
    Solve(SolveArgs),
    /// Run planners over a parameter axis and seeds into sweep.csv.
    Sweep(SweepArgs),
    /// Exhaustive search over gridded decisions for tiny instances.
    Oracle(OracleArgs),
    /// Re-check a written trace against every constraint.
    Audit(AuditArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    eps2: Option<f64>,
    #[arg(long)]
    eps3: Option<f64>,
    #[arg(long)]
    replan_every: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    planner: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    PMaxDbm,
    K,
    QEndWh,
    S,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::PMaxDbm => "p_max_dbm",
            Axis::K => "k",
            Axis::QEndWh => "q_end_wh",
            Axis::S => "s",
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    axis: Axis,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    planners: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 7)]
    accel_levels: usize,
    #[arg(long, default_value_t = 5)]
    power_levels: usize,
    #[arg(long, default_value_t = 1e7)]
    cap: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    common: Common,
    /// Directory written by `solve`.
    #[arg(long)]
    dir: PathBuf,
}

/// Error carrying the exit status it should map to.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

fn classify(e: uavopt::Error) -> Exit {
    let code = if e.is_infeasible() || matches!(root(&e), uavopt::Error::BatteryDepleted { .. }) {
        EXIT_INFEASIBLE
    } else {
        EXIT_INTERNAL
    };
    Exit(code, anyhow!(e))
}

fn root(e: &uavopt::Error) -> &uavopt::Error {
    match e {
        uavopt::Error::AtSlot { source, .. } => root(source),
        other => other,
    }
}

fn internal(e: anyhow::Error) -> Exit {
    Exit(EXIT_INTERNAL, e)
}

fn load(common: &Common) -> Result<(Scenario, SolverOptions), Exit> {
    let text = fs::read_to_string(&common.config)
        .with_context(|| format!("reading {}", common.config.display()))
        .map_err(|e| Exit(EXIT_USAGE, e))?;
    let (mut sc, mut opts) = load_config(&text).map_err(|e| Exit(EXIT_USAGE, anyhow!(e)))?;
    if let Some(s) = common.seed {
        sc.seed = s;
    }
    if let Some(x) = common.xi {
        sc.xi = x;
    }
    if let Some(v) = common.eps1 {
        opts.eps1 = v;
    }
    if let Some(v) = common.eps2 {
        opts.eps2 = v;
    }
    if let Some(v) = common.eps3 {
        opts.eps3 = v;
    }
    if let Some(v) = common.replan_every {
        opts.replan_every = v.max(1);
    }
    let sc = sc.rederive().map_err(|e| Exit(EXIT_USAGE, anyhow!(e)))?;
    Ok((sc, opts))
}

fn parse_planner(name: &str) -> Result<Planner, Exit> {
    Planner::parse(name).ok_or_else(|| {
        let names: Vec<&str> = Planner::ALL.iter().map(|p| p.name()).collect();
        Exit(
            EXIT_USAGE,
            anyhow!(
                "unknown planner `{name}`; expected one of {}",
                names.join(", ")
            ),
        )
    })
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize, Deserialize, Clone, PartialEq, Debug)]
struct Relaxed {
    n: usize,
    scale: f64,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
struct Summary {
    planner: String,
    seed: u64,
    n_t: usize,
    k: usize,
    n_f: usize,
    throughput_bps_per_hz: f64,
    mean_sum_rate_bps: f64,
    total_bits: f64,
    qos_violations: usize,
    relaxed_slots: Vec<Relaxed>,
    iterations: usize,
    replans: usize,
    raw_shared_pairs: usize,
    final_battery_j: f64,
    audit_violations: usize,
    runtime_s: f64,
}

fn summarize(tr: &RolloutTrace, sc: &Scenario, audit: usize) -> Summary {
    Summary {
        planner: tr.planner.name().to_string(),
        seed: sc.seed,
        n_t: sc.n_t,
        k: sc.k(),
        n_f: sc.n_f(),
        throughput_bps_per_hz: tr.throughput(sc.constants.w_bw),
        mean_sum_rate_bps: tr.mean_rate_bps(),
        total_bits: tr.sum_rate_bits(sc.delta_t),
        qos_violations: tr.qos_violations(&sc.limits.r_req),
        relaxed_slots: tr
            .slots
            .iter()
            .filter(|s| s.qos_scale < 1.0)
            .map(|s| Relaxed {
                n: s.n + 1,
                scale: s.qos_scale,
            })
            .collect(),
        iterations: tr.iterations,
        replans: tr.replans,
        raw_shared_pairs: tr.raw_shared,
        final_battery_j: *tr.q.last().unwrap(),
        audit_violations: audit,
        runtime_s: tr.runtime_s,
    }
}

fn write_trace(dir: &Path, tr: &RolloutTrace, sc: &Scenario) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("trace.csv"))?;
    w.write_record([
        "n",
        "x",
        "y",
        "z",
        "vx",
        "vy",
        "vz",
        "q_J",
        "p_harvest_W",
        "p_aero_W",
        "p_tx_W",
        "sum_rate_bps",
    ])?;
    let r0 = sc.r_init;
    let mut row = vec!["0".to_string()];
    row.extend(
        [
            r0[0], r0[1], r0[2], 0.0, 0.0, 0.0, tr.q[0], 0.0, 0.0, 0.0, 0.0,
        ]
        .map(num),
    );
    w.write_record(&row)?;
    for (j, s) in tr.slots.iter().enumerate() {
        let mut row = vec![(s.n + 1).to_string()];
        row.extend(
            [
                s.r[0],
                s.r[1],
                s.r[2],
                s.v[0],
                s.v[1],
                s.v[2],
                tr.q[j + 1],
                s.p_harvest,
                s.p_aero,
                s.p_tx,
                s.sum_rate(),
            ]
            .map(num),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("alloc.csv"))?;
    w.write_record(["n", "i", "k", "p_W"])?;
    for s in &tr.slots {
        for i in 0..tr.n_f {
            for k in 0..tr.k {
                let idx = k * tr.n_f + i;
                if s.s[idx] {
                    w.write_record([
                        (s.n + 1).to_string(),
                        i.to_string(),
                        k.to_string(),
                        num(s.p[idx]),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("convergence.csv"))?;
    w.write_record(["iteration", "bound", "incumbent", "vertices"])?;
    for c in &tr.convergence {
        w.write_record([
            c.iteration.to_string(),
            num(c.bound),
            num(c.incumbent),
            c.vertices.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<(), Exit> {
    let planner = parse_planner(&a.planner)?;
    let (sc, opts) = load(&a.common)?;
    let ch = generate_channels(&sc);
    let tr = run(planner, &sc, &ch, sc.seed, &opts).map_err(classify)?;
    let audit = audit_plan(&tr, &sc, &ch);
    for v in &audit {
        eprintln!(
            "audit: slot {:?} {} {}",
            v.slot.map(|n| n + 1),
            v.family,
            v.detail
        );
    }
    fs::create_dir_all(&a.out).map_err(|e| internal(e.into()))?;
    write_trace(&a.out, &tr, &sc).map_err(internal)?;
    let summary = summarize(&tr, &sc, audit.len());
    let json = serde_json::to_string_pretty(&summary).map_err(|e| internal(e.into()))?;
    fs::write(a.out.join("summary.json"), json + "\n").map_err(|e| internal(e.into()))?;
    println!(
        "{} seed {}: {} bit/s/Hz, {} QoS violations, {} iterations",
        planner.name(),
        sc.seed,
        summary.throughput_bps_per_hz,
        summary.qos_violations,
        summary.iterations
    );
    if audit.is_empty() {
        Ok(())
    } else {
        Err(Exit(
            EXIT_INTERNAL,
            anyhow!("trace fails the constraint audit"),
        ))
    }
}

fn apply_axis(base: &Scenario, axis: Axis, value: f64) -> uavopt::Result<Scenario> {
    let mut sc = base.clone();
    match axis {
        Axis::PMaxDbm => sc.constants.p_max = dbm_to_w(value),
        Axis::K => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(uavopt::Error::invalid(
                    "K",
                    "sweep values must be positive integers",
                ));
            }
            let k = value as usize;
            let radius = base
                .users
                .iter()
                .map(|u| u[0].hypot(u[1]))
                .fold(0.0, f64::max)
                .max(1.0);
            let total: f64 = base.limits.r_req.iter().sum();
            sc.users = place_users_in_disc(k, radius, base.seed);
            sc.limits.r_req = vec![total / k as f64; k];
        }
        Axis::QEndWh => sc.limits.q_end = value * 3600.0,
        Axis::S => sc.solar.s = value,
    }
    sc.rederive()
}

const SWEEP_HEADER: [&str; 11] = [
    "axis",
    "value",
    "planner",
    "seed",
    "status",
    "throughput_bps_per_hz",
    "mean_sum_rate_bps",
    "qos_violations",
    "iterations",
    "runtime_s",
    "error",
];

/// Sweep rows keyed by (value, planner, seed).
type RowKey = (String, String, u64);

fn read_done(path: &Path) -> Result<(Vec<Vec<String>>, BTreeSet<RowKey>)> {
    let mut rows = Vec::new();
    let mut done = BTreeSet::new();
    if !path.exists() {
        return Ok((rows, done));
    }
    let mut r = csv::Reader::from_path(path)?;
    for rec in r.records() {
        let rec = rec?;
        let row: Vec<String> = rec.iter().map(str::to_string).collect();
        if row.len() != SWEEP_HEADER.len() {
            continue;
        }
        let seed: u64 = row[3].parse().unwrap_or(u64::MAX);
        done.insert((row[1].clone(), row[2].clone(), seed));
        rows.push(row);
    }
    Ok((rows, done))
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Exit> {
    let (base, opts) = load(&a.common)?;
    let planners: Vec<Planner> = a
        .planners
        .iter()
        .map(|p| parse_planner(p))
        .collect::<Result<_, _>>()?;
    fs::create_dir_all(&a.out).map_err(|e| internal(e.into()))?;
    let path = a.out.join("sweep.csv");
    let (mut rows, done) = read_done(&path).map_err(internal)?;
    let mut jobs = Vec::new();
    for &v in &a.values {
        for &p in &planners {
            for &s in &a.seeds {
                if !done.contains(&(num(v), p.name().to_string(), s)) {
                    jobs.push((v, p, s));
                }
            }
        }
    }
    let file_exists = path.exists();
    let writer = {
        let f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| internal(e.into()))?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(f);
        if !file_exists {
            w.write_record(SWEEP_HEADER)
                .map_err(|e| internal(e.into()))?;
            w.flush().map_err(|e| internal(e.into()))?;
        }
        Mutex::new(w)
    };
    let threads = std::env::var("UAVOPT_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| internal(e.into()))?;
    let axis = a.axis;
    let new_rows: Vec<Vec<String>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(v, p, seed)| {
                let mut row = vec![
                    axis.name().to_string(),
                    num(v),
                    p.name().to_string(),
                    seed.to_string(),
                ];
                let outcome = apply_axis(&base, axis, v).and_then(|mut sc| {
                    sc.seed = seed;
                    let ch = generate_channels(&sc);
                    run(p, &sc, &ch, seed, &opts).map(|tr| (tr, sc))
                });
                match outcome {
                    Ok((tr, sc)) => row.extend([
                        "ok".to_string(),
                        num(tr.throughput(sc.constants.w_bw)),
                        num(tr.mean_rate_bps()),
                        tr.qos_violations(&sc.limits.r_req).to_string(),
                        tr.iterations.to_string(),
                        num(tr.runtime_s),
                        String::new(),
                    ]),
                    Err(e) => row.extend([
                        "failed".to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                        e.to_string(),
                    ]),
                }
                let mut w = writer.lock().unwrap();
                // a failed write only loses resumability of this row
                let _ = w
                    .write_record(&row)
                    .and_then(|_| w.flush().map_err(Into::into));
                row
            })
            .collect()
    });
    drop(writer);
    rows.extend(new_rows);
    rows.sort_by(|x, y| {
        let key = |r: &Vec<String>| {
            (
                r[1].parse::<f64>().unwrap_or(f64::NAN),
                r[2].clone(),
                r[3].parse::<u64>().unwrap_or(0),
            )
        };
        let (a, b) = (key(x), key(y));
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    });
    let mut w = csv::Writer::from_path(&path).map_err(|e| internal(e.into()))?;
    w.write_record(SWEEP_HEADER)
        .map_err(|e| internal(e.into()))?;
    for r in &rows {
        w.write_record(r).map_err(|e| internal(e.into()))?;
    }
    w.flush().map_err(|e| internal(e.into()))?;
    let failed = rows.iter().filter(|r| r[4] != "ok").count();
    println!("{} rows, {} failed", rows.len(), failed);
    Ok(())
}

#[derive(Serialize)]
struct OracleOut {
    objective: f64,
    sum_rate_bps: f64,
    discretization_gap: f64,
    leaves: u64,
    positions: Vec<[f64; 3]>,
    /// (slot, subcarrier, user, power W) for assigned entries.
    powers: Vec<(usize, usize, usize, f64)>,
}

fn cmd_oracle(a: &OracleArgs) -> Result<(), Exit> {
    let (sc, _) = load(&a.common)?;
    let ch = generate_channels(&sc);
    let prob = PlanningProblem::offline(&sc, &ch).map_err(classify)?;
    let grid = OracleGrid {
        accel_levels: a.accel_levels,
        power_levels: a.power_levels,
        cap: a.cap,
    };
    let res = solve_oracle(&prob, &grid).map_err(classify)?;
    let mut powers = Vec::new();
    for j in 0..prob.n_h {
        for i in 0..prob.n_f() {
            for k in 0..prob.k() {
                let idx = res.alloc.idx(k, i, j);
                if res.alloc.s[idx] {
                    powers.push((j + 1, i, k, res.alloc.p_tilde[idx]));
                }
            }
        }
    }
    let out = OracleOut {
        objective: res.objective,
        sum_rate_bps: res.objective * sc.constants.b,
        discretization_gap: res.gap,
        leaves: res.leaves,
        positions: res.r.clone(),
        powers,
    };
    fs::create_dir_all(&a.out).map_err(|e| internal(e.into()))?;
    let json = serde_json::to_string_pretty(&out).map_err(|e| internal(e.into()))?;
    fs::write(a.out.join("oracle.json"), json + "\n").map_err(|e| internal(e.into()))?;
    println!(
        "oracle objective {} (gap {}) over {} leaves",
        res.objective, res.gap, res.leaves
    );
    Ok(())
}

fn read_trace(dir: &Path, sc: &Scenario) -> Result<(RolloutTrace, u64)> {
    let summary: Summary = serde_json::from_str(&fs::read_to_string(dir.join("summary.json"))?)?;
    let planner =
        Planner::parse(&summary.planner).ok_or_else(|| anyhow!("unknown planner in summary"))?;
    let (kk, ff) = (sc.k(), sc.n_f());
    let mut q = Vec::new();
    let mut slots = Vec::new();
    let mut r = csv::Reader::from_path(dir.join("trace.csv"))?;
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> { Ok(rec[i].parse::<f64>()?) };
        let n: usize = rec[0].parse()?;
        q.push(f(7)?);
        if n == 0 {
            continue;
        }
        let scale = summary
            .relaxed_slots
            .iter()
            .find(|x| x.n == n)
            .map_or(1.0, |x| x.scale);
        slots.push(SlotRecord {
            n: n - 1,
            gains: Vec::new(),
            p: vec![0.0; kk * ff],
            s: vec![false; kk * ff],
            r: [f(1)?, f(2)?, f(3)?],
            v: [f(4)?, f(5)?, f(6)?],
            rates: vec![0.0; kk],
            p_harvest: f(8)?,
            p_tx: f(10)?,
            p_aero: f(9)?,
            p_static: sc.constants.p_static,
            overflow: 0.0,
            qos_scale: scale,
        });
    }
    let mut r = csv::Reader::from_path(dir.join("alloc.csv"))?;
    for rec in r.records() {
        let rec = rec?;
        let n: usize = rec[0].parse()?;
        let i: usize = rec[1].parse()?;
        let k: usize = rec[2].parse()?;
        let p: f64 = rec[3].parse()?;
        let slot = slots
            .get_mut(n.wrapping_sub(1))
            .ok_or_else(|| anyhow!("alloc row for slot {n} outside trace"))?;
        if i >= ff || k >= kk {
            bail!("alloc row ({n}, {i}, {k}) outside the scenario");
        }
        slot.p[k * ff + i] = p;
        slot.s[k * ff + i] = p > TAU_P || slot.s[k * ff + i];
    }
    Ok((
        RolloutTrace {
            planner,
            k: kk,
            n_f: ff,
            slots,
            q,
            iterations: summary.iterations,
            convergence: Vec::new(),
            raw_shared: summary.raw_shared_pairs,
            replans: summary.replans,
            runtime_s: summary.runtime_s,
        },
        summary.seed,
    ))
}

fn cmd_audit(a: &AuditArgs) -> Result<(), Exit> {
    let (mut sc, _) = load(&a.common)?;
    let (tr, seed) = read_trace(&a.dir, &sc).map_err(|e| Exit(EXIT_USAGE, e))?;
    if a.common.seed.is_none() {
        sc.seed = seed;
    }
    let ch = generate_channels(&sc);
    let report = audit_plan(&tr, &sc, &ch);
    for v in &report {
        println!("slot {:?} {} {}", v.slot.map(|n| n + 1), v.family, v.detail);
    }
    if report.is_empty() {
        println!("no violations");
        Ok(())
    } else {
        let fams: BTreeSet<&str> = report.iter().map(|v| v.family).collect();
        let fams: Vec<&str> = fams.into_iter().collect();
        Err(Exit(
            EXIT_INFEASIBLE,
            anyhow!("violated: {}", fams.join(", ")),
        ))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match &cli.cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Audit(a) => cmd_audit(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
