//! Run specifications, the experiment driver and the self-test suite behind
//! the `moment-lab` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::closed_forms::{
    evaluate, oneswap_residue_check, twoswap_residue_check, MomentReport, ResidueCheck, REPORT_SCHEMA_VERSION,
};
use crate::decomposer::{classify, verify_product_identity, AccumulateOptions, MomentConfig, MomentTables, Quadruple};
use crate::error::{Error, Result};
use crate::farey::FareyArcs;
use crate::shift_arith::{tau_symmetry_check, tau_table, ShiftQuadruple, DEFAULT_MIN_SHIFT};
use crate::special::{chi, zeta};
use crate::weights::{chi_mellin_identity_check, BumpParams, BumpWeight, MellinConvention, DEFAULT_MELLIN_SCALE};

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_X_EXP: f64 = 1.5;
pub const DEFAULT_Q_EXP: f64 = 0.4;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SHIFTS: [f64; 4] = [0.05, 0.11, 0.17, 0.29];
pub const DEFAULT_T_LADDER: [f64; 3] = [100.0, 200.0, 400.0];

/// Tolerances of the invariant checks performed during a run.
pub const BRUTE_FORCE_TOL: f64 = 1e-12;
pub const RESIDUE_TOL: f64 = 1e-8;
pub const DUPLICATE_TOL: f64 = 0.01;

/// Exit statuses of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

// ---------------------------------------------------------------------------
// Specification

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ShiftValue {
    Real(f64),
    Pair([f64; 2]),
    Text(String),
}

impl ShiftValue {
    fn to_complex(&self) -> std::result::Result<Complex64, String> {
        match self {
            ShiftValue::Real(x) => Ok(Complex64::new(*x, 0.0)),
            ShiftValue::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
            ShiftValue::Text(s) => {
                Complex64::from_str(&s.replace(' ', "")).map_err(|_| format!("cannot parse shift {s:?}"))
            }
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    t: Option<OneOrMany>,
    x: Option<u64>,
    q: Option<u64>,
    x_exp: Option<f64>,
    q_exp: Option<f64>,
    epsilon: Option<f64>,
    shifts: Option<Vec<ShiftValue>>,
    min_shift: Option<f64>,
    mellin_scale: Option<f64>,
    psi_support: Option<[f64; 2]>,
    psi_sharpness: Option<f64>,
    out_dir: Option<PathBuf>,
    csv: Option<String>,
    brute_force: Option<bool>,
    identity_checks: Option<bool>,
    residue_checks: Option<bool>,
    duplicate_diagnostics: Option<bool>,
    seed: Option<u64>,
    workers: Option<usize>,
    threads: Option<usize>,
}

/// A validated experiment: the configurations plus output and check settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub configs: Vec<MomentConfig>,
    pub out_dir: PathBuf,
    pub csv_name: String,
    /// Also run the brute-force double loop and require agreement with the
    /// bucket total.
    pub brute_force: bool,
    /// Fail on product-identity or phase-bound violations and on a
    /// brute-force mismatch.
    pub identity_checks: bool,
    /// Run the one- and two-swap contour checks at seeded t samples.
    pub residue_checks: bool,
    /// Warn when duplicate and edge mass exceeds 1% of the off-diagonal sum.
    pub duplicate_diagnostics: bool,
    pub seed: u64,
    /// Configurations evaluated concurrently.
    pub workers: usize,
    /// Decomposer threads per configuration.
    pub threads: usize,
}

fn spec_error(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// ⌈t^exp⌉, ignoring rounding noise when t^exp is an integer.
pub fn ladder_value(t: f64, exp: f64) -> u64 {
    let v = t.powf(exp);
    let r = v.round();
    if (v - r).abs() <= 1e-9 * r.max(1.0) {
        r as u64
    } else {
        v.ceil() as u64
    }
}

/// Parses one scalar of the key=value format.
fn scalar(text: &str) -> Value {
    let t = text.trim();
    if let Ok(v) = t.parse::<u64>() {
        return Value::from(v);
    }
    if let Ok(v) = t.parse::<f64>() {
        return Value::from(v);
    }
    match t {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => Value::String(t.to_string()),
    }
}

const LIST_KEYS: [&str; 3] = ["t", "shifts", "psi_support"];

fn key_value_to_json(text: &str) -> Result<Value> {
    let mut map = serde_json::Map::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| spec_error(format!("line {}: expected key = value, got {raw:?}", lineno + 1)))?;
        let key = key.trim();
        let value = if value.contains(',') || LIST_KEYS.contains(&key) && key != "t" {
            Value::Array(value.split(',').map(scalar).collect())
        } else {
            scalar(value)
        };
        if map.insert(key.to_string(), value).is_some() {
            return Err(spec_error(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }
    Ok(Value::Object(map))
}

impl RunSpec {
    /// Parses JSON (text starting with `{`) or flat `key = value` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| spec_error(format!("spec JSON: {e}")))?
        } else {
            key_value_to_json(text)?
        };
        let raw: RawSpec = serde_json::from_value(value).map_err(|e| spec_error(format!("spec: {e}")))?;
        Self::from_raw(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| spec_error(format!("cannot read spec {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn from_raw(raw: RawSpec) -> Result<Self> {
        let ts = match raw.t {
            None => DEFAULT_T_LADDER.to_vec(),
            Some(OneOrMany::One(t)) => vec![t],
            Some(OneOrMany::Many(ts)) => ts,
        };
        if ts.is_empty() {
            return Err(spec_error("t lists no values"));
        }
        let shifts = match raw.shifts {
            None => {
                let [a, b, g, d] = DEFAULT_SHIFTS;
                ShiftQuadruple::real(a, b, g, d)
            }
            Some(v) if v.len() == 4 => {
                let z: Vec<Complex64> =
                    v.iter().map(ShiftValue::to_complex).collect::<std::result::Result<_, _>>().map_err(spec_error)?;
                ShiftQuadruple::new(z[0], z[1], z[2], z[3])
            }
            Some(v) => return Err(spec_error(format!("shifts needs 4 values, got {}", v.len()))),
        };
        let x_exp = raw.x_exp.unwrap_or(DEFAULT_X_EXP);
        let q_exp = raw.q_exp.unwrap_or(DEFAULT_Q_EXP);
        let mut bump = BumpParams::default();
        if let Some([lo, hi]) = raw.psi_support {
            bump.t_lo = lo;
            bump.t_hi = hi;
        }
        if let Some(k) = raw.psi_sharpness {
            bump.sharpness = k;
        }
        let mut configs = Vec::with_capacity(ts.len());
        for t in ts {
            if !(t.is_finite() && t > 1.0) {
                return Err(spec_error(format!("T must be finite and > 1, got {t}")));
            }
            let mut cfg = MomentConfig::new(
                t,
                raw.x.unwrap_or_else(|| ladder_value(t, x_exp)),
                raw.q.unwrap_or_else(|| ladder_value(t, q_exp)),
                raw.epsilon.unwrap_or(DEFAULT_EPSILON),
                shifts,
            );
            cfg.bump = bump;
            cfg.mellin_scale = raw.mellin_scale.unwrap_or(DEFAULT_MELLIN_SCALE);
            cfg.min_shift = raw.min_shift.unwrap_or(DEFAULT_MIN_SHIFT);
            cfg.validate().map_err(|e| spec_error(format!("config T={t}: {e}")))?;
            configs.push(cfg);
        }
        let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        let workers = raw.workers.unwrap_or(cores.min(configs.len())).clamp(1, configs.len());
        let threads = raw.threads.unwrap_or((cores / workers).max(1));
        if threads == 0 {
            return Err(spec_error("threads must be at least 1"));
        }
        let csv_name = raw.csv.unwrap_or_else(|| "summary.csv".into());
        if csv_name.is_empty() || csv_name.contains('/') {
            return Err(spec_error(format!("csv must be a plain file name, got {csv_name:?}")));
        }
        Ok(Self {
            configs,
            out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from("moment-lab-out")),
            csv_name,
            brute_force: raw.brute_force.unwrap_or(false),
            identity_checks: raw.identity_checks.unwrap_or(true),
            residue_checks: raw.residue_checks.unwrap_or(true),
            duplicate_diagnostics: raw.duplicate_diagnostics.unwrap_or(true),
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            workers,
            threads,
        })
    }
}

// ---------------------------------------------------------------------------
// Runs

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSample {
    pub kind: ContourKind,
    pub t: f64,
    pub check: ResidueCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    OneSwap,
    TwoSwap,
}

/// What one configuration produced; written as its JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigOutcome {
    pub schema_version: u32,
    pub index: usize,
    pub seed: u64,
    pub report: Option<MomentReport>,
    pub contour_checks: Vec<ContourSample>,
    /// Invariant checks that did not hold.
    pub failures: Vec<String>,
    /// Diagnostics outside their nominal range; these do not fail the run.
    pub warnings: Vec<String>,
    /// Wall-clock time; kept out of the CSV so reruns compare bitwise.
    pub runtime_seconds: f64,
    /// Numeric or evaluation error that stopped this configuration.
    pub error: Option<String>,
}

impl ConfigOutcome {
    pub fn status(&self) -> &'static str {
        if self.error.is_some() {
            "error"
        } else if !self.failures.is_empty() {
            "invariant-failure"
        } else if self.report.as_ref().is_some_and(|r| r.diagonal_only) {
            "diagonal-only"
        } else {
            "ok"
        }
    }
}

/// Result of [`run`]: every outcome in configuration order plus the files
/// written.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcomes: Vec<ConfigOutcome>,
    pub report_paths: Vec<PathBuf>,
    pub csv_path: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.outcomes.iter().all(|o| o.error.is_none() && o.failures.is_empty()) {
            EXIT_OK
        } else {
            EXIT_INVARIANT
        }
    }
}

fn config_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Evaluates one configuration of a spec; never panics on numeric failure.
pub fn run_config(spec: &RunSpec, index: usize) -> ConfigOutcome {
    let cfg = &spec.configs[index];
    let seed = config_seed(spec.seed, index);
    let mut outcome = ConfigOutcome {
        schema_version: REPORT_SCHEMA_VERSION,
        index,
        seed,
        report: None,
        contour_checks: Vec::new(),
        failures: Vec::new(),
        warnings: Vec::new(),
        runtime_seconds: 0.0,
        error: None,
    };
    let start = std::time::Instant::now();
    let opts = AccumulateOptions { threads: spec.threads, ..AccumulateOptions::default() };
    let report = match evaluate(cfg, opts, spec.brute_force) {
        Ok(r) => r,
        Err(e) => {
            outcome.error = Some(e.to_string());
            outcome.runtime_seconds = start.elapsed().as_secs_f64();
            return outcome;
        }
    };
    if let (Some(dec), Some(d)) = (&report.decomposition, &report.discrepancies) {
        if spec.identity_checks {
            if dec.product_identity_failures > 0 {
                outcome.failures.push(format!("product identity failed on {} terms", dec.product_identity_failures));
            }
            if dec.phase_bound_violations > 0 {
                outcome
                    .failures
                    .push(format!("phase expansion bound violated on {} terms", dec.phase_bound_violations));
            }
            if let Some(bf) = d.brute_force {
                if !(bf.abs <= BRUTE_FORCE_TOL * bf.predicted.norm()) {
                    outcome.failures.push(format!("bucket total differs from brute force by {:e} (relative)", bf.rel));
                }
            }
        }
        if spec.duplicate_diagnostics && !(d.duplicate_edge_fraction < DUPLICATE_TOL) {
            outcome
                .warnings
                .push(format!("duplicate + edge mass is {:.4} of the off-diagonal sum", d.duplicate_edge_fraction));
        }
    }
    if spec.residue_checks && !report.diagonal_only {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (cfg.bump.t_lo, cfg.bump.t_hi);
        for _ in 0..2 {
            let t = rng.gen_range(lo..hi);
            for kind in [ContourKind::OneSwap, ContourKind::TwoSwap] {
                let check = match kind {
                    ContourKind::OneSwap => oneswap_residue_check(cfg, t),
                    ContourKind::TwoSwap => twoswap_residue_check(cfg, t),
                };
                match check {
                    Ok(check) => {
                        if !(check.rel_error <= RESIDUE_TOL) {
                            outcome
                                .failures
                                .push(format!("{kind:?} contour check at t={t}: relative error {:e}", check.rel_error));
                        }
                        outcome.contour_checks.push(ContourSample { kind, t, check });
                    }
                    Err(e) => outcome.failures.push(format!("{kind:?} contour check at t={t}: {e}")),
                }
            }
        }
    }
    outcome.report = Some(report);
    outcome.runtime_seconds = start.elapsed().as_secs_f64();
    outcome
}

/// Evaluates every configuration, `spec.workers` at a time, then writes one
/// JSON report per configuration and the CSV summary.
pub fn run(spec: &RunSpec, mut progress: impl FnMut(&ConfigOutcome)) -> Result<RunSummary> {
    fs::create_dir_all(&spec.out_dir)?;
    let n = spec.configs.len();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ConfigOutcome>>> = Mutex::new(vec![None; n]);
    let (tx, rx) = std::sync::mpsc::channel::<usize>();
    std::thread::scope(|scope| {
        for _ in 0..spec.workers.min(n) {
            let tx = tx.clone();
            let (next, slots) = (&next, &slots);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let outcome = run_config(spec, i);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(outcome);
                let _ = tx.send(i);
            });
        }
        drop(tx);
        for i in rx {
            let guard = slots.lock().expect("no worker panics while holding the lock");
            if let Some(o) = &guard[i] {
                progress(o);
            }
        }
    });
    let outcomes: Vec<ConfigOutcome> = slots
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|o| o.expect("every configuration was evaluated"))
        .collect();
    let mut report_paths = Vec::with_capacity(n);
    for o in &outcomes {
        let path = spec.out_dir.join(format!("report_{:03}.json", o.index));
        fs::write(&path, serde_json::to_string_pretty(o)? + "\n")?;
        report_paths.push(path);
    }
    let csv_path = spec.out_dir.join(&spec.csv_name);
    write_csv(&csv_path, &outcomes)?;
    Ok(RunSummary { outcomes, report_paths, csv_path })
}

pub const CSV_COLUMNS: [&str; 39] = [
    "index",
    "status",
    "t",
    "x",
    "q",
    "epsilon",
    "tau",
    "diagonal_re",
    "diagonal_im",
    "offdiag_re",
    "offdiag_im",
    "brute_force_re",
    "brute_force_im",
    "sd_any_re",
    "sd_any_im",
    "tii_both_re",
    "tii_both_im",
    "sd_literal_re",
    "sd_literal_im",
    "tii_literal_re",
    "tii_literal_im",
    "boundary_re",
    "boundary_im",
    "oneswap_re",
    "oneswap_im",
    "oneswap_printed_re",
    "oneswap_printed_im",
    "twoswap_re",
    "twoswap_im",
    "rel_sd",
    "rel_tii",
    "rel_sd_literal",
    "rel_tii_literal",
    "rel_offdiag",
    "duplicate_edge_fraction",
    "terms",
    "product_identity_failures",
    "contour_max_rel",
    "message",
];

fn csv_row(o: &ConfigOutcome) -> Vec<String> {
    fn num(x: f64) -> String {
        format!("{x}")
    }
    fn pair(z: Option<Complex64>) -> [String; 2] {
        match z {
            Some(z) => [num(z.re), num(z.im)],
            None => [String::new(), String::new()],
        }
    }
    let mut row = vec![o.index.to_string(), o.status().to_string()];
    let cfg = o.report.as_ref().map(|r| &r.config);
    row.extend(match cfg {
        Some(c) => [num(c.t), c.x.to_string(), c.q.to_string(), num(c.epsilon), num(c.tau())],
        None => Default::default(),
    });
    let r = o.report.as_ref();
    let dec = r.and_then(|r| r.decomposition.as_ref());
    let d = r.and_then(|r| r.discrepancies.as_ref());
    row.extend(pair(r.map(|r| r.diagonal)));
    row.extend(pair(dec.map(|x| x.total())));
    row.extend(pair(r.and_then(|r| r.brute_force)));
    row.extend(pair(d.map(|d| d.semi_diagonal.empirical)));
    row.extend(pair(d.map(|d| d.type_ii.empirical)));
    row.extend(pair(d.map(|d| d.semi_diagonal_literal.empirical)));
    row.extend(pair(d.map(|d| d.type_ii_literal.empirical)));
    row.extend(pair(dec.map(|x| x.boundary.sum())));
    row.extend(pair(r.and_then(|r| r.oneswap.map(|o| o.total))));
    row.extend(pair(r.and_then(|r| r.oneswap_as_printed)));
    row.extend(pair(r.and_then(|r| r.twoswap)));
    let rel = |f: fn(&crate::closed_forms::Discrepancies) -> f64| d.map(|d| num(f(d))).unwrap_or_default();
    row.push(rel(|d| d.semi_diagonal.rel));
    row.push(rel(|d| d.type_ii.rel));
    row.push(rel(|d| d.semi_diagonal_literal.rel));
    row.push(rel(|d| d.type_ii_literal.rel));
    row.push(rel(|d| d.off_diagonal.rel));
    row.push(rel(|d| d.duplicate_edge_fraction));
    row.push(dec.map(|x| x.term_count().to_string()).unwrap_or_default());
    row.push(dec.map(|x| x.product_identity_failures.to_string()).unwrap_or_default());
    row.push(o.contour_checks.iter().map(|c| c.check.rel_error).reduce(f64::max).map(num).unwrap_or_default());
    let mut messages: Vec<String> = o.error.iter().cloned().collect();
    messages.extend(o.failures.iter().cloned());
    messages.extend(o.warnings.iter().map(|w| format!("warning: {w}")));
    row.push(messages.join("; "));
    row
}

fn write_csv(path: &Path, outcomes: &[ConfigOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    let map = |e: csv::Error| Error::Numeric(format!("csv: {e}"));
    w.write_record(CSV_COLUMNS).map_err(map)?;
    for o in outcomes {
        w.write_record(csv_row(o)).map_err(map)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Self-test

/// Deliberate corruption for testing that the self-test notices it.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FaultInjection {
    /// Added to ζ(s) for ℜs ≥ 1/2, as a corrupted constant in the
    /// Euler–Maclaurin tail would.
    pub zeta_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckGroup {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub groups: Vec<CheckGroup>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.passed)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.groups.iter().filter(|g| !g.passed).map(|g| g.name.as_str()).collect()
    }
}

fn group(name: &str, result: Result<(bool, String)>) -> CheckGroup {
    match result {
        Ok((passed, detail)) => CheckGroup { name: name.into(), passed, detail },
        Err(e) => CheckGroup { name: name.into(), passed: false, detail: format!("error: {e}") },
    }
}

fn check_tau_symmetry() -> Result<(bool, String)> {
    let mut worst = 0f64;
    for (a, b) in [(0.05, 0.29), (0.3, -0.1)] {
        let (a, b) = (Complex64::new(a, 0.2), Complex64::new(b, -0.4));
        worst = worst.max(tau_symmetry_check(&tau_table(5000, a, b)?, &tau_table(5000, b, a)?)?);
    }
    Ok((worst <= 1e-13, format!("max relative |τ_ab − τ_ba| = {worst:e}")))
}

fn check_zeta(fault: FaultInjection) -> Result<(bool, String)> {
    let z = |s: Complex64| -> Result<Complex64> {
        let v = zeta(s)?;
        Ok(if s.re >= 0.5 { v + fault.zeta_offset } else { v })
    };
    let z2 = (z(Complex64::new(2.0, 0.0))? - PI * PI / 6.0).norm();
    let chi_half = (chi(Complex64::new(0.5, 0.0))? - 1.0).norm();
    let mut worst = 0f64;
    for i in 0..10 {
        for j in 0..10 {
            let s = Complex64::new(-1.0 + 3.0 * (i as f64 + 0.37) / 10.0, -30.0 + 60.0 * (j as f64 + 0.5) / 10.0);
            worst = worst.max((z(s)? - chi(s)? * z(Complex64::new(1.0, 0.0) - s)?).norm());
        }
    }
    Ok((
        z2 <= 1e-12 && chi_half <= 1e-12 && worst <= 1e-10,
        format!(
            "|ζ(2) − π²/6| = {z2:e}, |χ(1/2) − 1| = {chi_half:e}, functional-equation residual {worst:e} on 100 points"
        ),
    ))
}

fn check_farey_tiling() -> Result<(bool, String)> {
    let q = 20;
    let arcs = FareyArcs::new(q)?;
    let list = arcs.arcs();
    let mut bad = 0usize;
    for w in list.windows(2) {
        if w[0].hi != w[1].lo || w[0].center.det(w[1].center) != -1 {
            bad += 1;
        }
    }
    let boundary_ok =
        arcs.boundary().hi == list[0].lo && list.last().is_some_and(|a| a.center.num == 1 && a.center.den == 1);
    let mut misplaced = 0usize;
    for n in 1..=400u64 {
        for m in 1..=n {
            let arc = arcs.locate_with_boundary(m, n);
            if !arc.contains(m, n) {
                misplaced += 1;
            }
        }
    }
    Ok((
        bad == 0 && boundary_ok && misplaced == 0,
        format!("Q={q}: {} arcs, {bad} bad joints, {misplaced} misplaced ratios m/n with n ≤ 400", list.len()),
    ))
}

fn check_product_identity(seed: u64) -> Result<(bool, String)> {
    let cfg = MomentConfig::new(200.0, 20_000, 10, 0.1, ShiftQuadruple::real(0.05, 0.11, 0.17, 0.29));
    let tables = MomentTables::new(&cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut failed) = (0usize, 0usize);
    while checked < 10_000 {
        let m = rng.gen_range(1..=cfg.x);
        let window: Vec<u64> = tables.window(m).collect();
        if window.is_empty() {
            continue;
        }
        let n = window[rng.gen_range(0..window.len())];
        let dm = tables.divisors().of(m as usize);
        let dn = tables.divisors().of(n as usize);
        let m1 = dm[rng.gen_range(0..dm.len())] as u64;
        let n1 = dn[rng.gen_range(0..dn.len())] as u64;
        let term = classify(Quadruple::new(m1, m / m1, n1, n / n1), tables.arcs());
        if !verify_product_identity(&term) {
            failed += 1;
        }
        checked += 1;
    }
    Ok((failed == 0, format!("{checked} random terms, {failed} failures")))
}

fn check_chi_mellin() -> Result<(bool, String)> {
    let psi = BumpWeight::default();
    let mut worst = 0f64;
    for s in [Complex64::new(0.3, 0.0), Complex64::new(0.5, 0.5), Complex64::new(0.7, 0.0)] {
        let (lhs, rhs) = chi_mellin_identity_check(s, &psi, MellinConvention::Shifted)?;
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    let (lhs, rhs) = chi_mellin_identity_check(Complex64::new(0.5, 0.5), &psi, MellinConvention::AsPrinted)?;
    let printed = (lhs - rhs).norm() / rhs.norm();
    Ok((
        worst <= 1e-6,
        format!("max relative gap {worst:e} at s ∈ {{0.3, 0.5+0.5i, 0.7}} with v^(s−1); with v^s the gap is {printed:.3} (not checked)"),
    ))
}

fn check_contours() -> Result<(bool, String)> {
    let cfg = MomentConfig::new(200.0, 2000, 5, 0.1, ShiftQuadruple::real(0.05, 0.11, 0.17, 0.29));
    let one = oneswap_residue_check(&cfg, 1.5)?;
    let two = twoswap_residue_check(&cfg, 1.5)?;
    Ok((
        one.rel_error <= RESIDUE_TOL && two.rel_error <= RESIDUE_TOL,
        format!("one-swap {:e}, two-swap {:e} (relative)", one.rel_error, two.rel_error),
    ))
}

/// The fast invariant suite.
pub fn selftest(seed: u64, fault: FaultInjection) -> SelftestReport {
    let groups = vec![
        group("tau-symmetry", check_tau_symmetry()),
        group("zeta-functional-equation", check_zeta(fault)),
        group("farey-tiling", check_farey_tiling()),
        group("product-identity", check_product_identity(seed)),
        group("chi-mellin-identity", check_chi_mellin()),
        group("residue-contours", check_contours()),
    ];
    SelftestReport { groups }
}
