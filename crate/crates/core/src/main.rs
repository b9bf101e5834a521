use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use moment_lab::cli::{self, FaultInjection, RunSpec, EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK};
use moment_lab::closed_forms::{
    oneswap_residue_check, sq_bruteforce, sq_formula, sq_symmetrized_bruteforce, sq_zeta_ratio, twoswap_residue_check,
};
use moment_lab::decomposer::MomentConfig;
use moment_lab::shift_arith::{ShiftQuadruple, DEFAULT_MIN_SHIFT};
use moment_lab::weights::{MellinWeight, DEFAULT_MELLIN_SCALE};

#[derive(Parser)]
#[command(
    name = "moment-lab",
    version,
    about = "Discrete circle method experiments for the shifted fourth moment of zeta"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every configuration of a spec file and write reports.
    Run {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run the fast invariant suite.
    Selftest {
        #[arg(long, default_value_t = cli::DEFAULT_SEED)]
        seed: u64,
        /// Add this constant to zeta on the right half-plane.
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_zeta_fault: f64,
    },
    /// Compare S_Q(xi,eta) + S_Q(eta,xi) with its zeta-ratio closed form.
    Sq {
        #[arg(long, allow_hyphen_values = true)]
        xi: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        eta: Complex64,
        #[arg(long)]
        q: u64,
        /// Zeros of the Mellin weight; defaults to xi and eta.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        zeros: Option<Vec<Complex64>>,
        #[arg(long, default_value_t = DEFAULT_MELLIN_SCALE)]
        mellin_scale: f64,
    },
    /// Compare both contour integrals with their residue sums at one t.
    ResidueCheck {
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
              default_values_t = cli::DEFAULT_SHIFTS.map(|x| Complex64::new(x, 0.0)))]
        shifts: Vec<Complex64>,
        #[arg(long = "big-t", default_value_t = 200.0)]
        big_t: f64,
        #[arg(long, default_value_t = 2000)]
        x: u64,
    },
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn run(spec: PathBuf) -> i32 {
    let spec = match RunSpec::from_file(&spec) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let start = Instant::now();
    let summary = cli::run(&spec, |o| {
        let t = o.report.as_ref().map_or(f64::NAN, |r| r.config.t);
        eprintln!(
            "[{:>7.1}s] config {} (T = {t}): {} in {:.2}s",
            start.elapsed().as_secs_f64(),
            o.index,
            o.status(),
            o.runtime_seconds
        );
        for msg in o.error.iter().chain(&o.failures) {
            eprintln!("    {msg}");
        }
        for msg in &o.warnings {
            eprintln!("    warning: {msg}");
        }
    });
    match summary {
        Ok(s) => {
            println!("wrote {} reports and {}", s.report_paths.len(), s.csv_path.display());
            s.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INVARIANT
        }
    }
}

fn selftest(seed: u64, fault: f64) -> i32 {
    let start = Instant::now();
    let report = cli::selftest(seed, FaultInjection { zeta_offset: fault });
    for g in &report.groups {
        println!("{} {:<26} {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail);
    }
    eprintln!("selftest finished in {:.1}s", start.elapsed().as_secs_f64());
    if report.passed() {
        EXIT_OK
    } else {
        println!("failing groups: {}", report.failing().join(", "));
        EXIT_INVARIANT
    }
}

fn sq(xi: Complex64, eta: Complex64, q: u64, zeros: Option<Vec<Complex64>>, scale: f64) -> i32 {
    let zeros = zeros.unwrap_or_else(|| vec![xi, eta]);
    let out = (|| -> moment_lab::Result<serde_json::Value> {
        let phi = MellinWeight::new(scale, &zeros)?;
        let one_sided = sq_bruteforce(xi, eta, q, &phi)?;
        let brute = sq_symmetrized_bruteforce(xi, eta, q, &phi)?;
        let formula = sq_formula(xi, eta, q, &phi, DEFAULT_MIN_SHIFT)?;
        let ratio = sq_zeta_ratio(xi, eta, DEFAULT_MIN_SHIFT)?;
        Ok(json!({
            "xi": xi, "eta": eta, "q": q, "zeros": zeros, "mellin_scale": scale,
            "sq": one_sided, "symmetrized": brute, "formula": formula, "zeta_ratio": ratio,
            "abs_error": (brute - formula).norm(), "rel_error": (brute - formula).norm() / formula.norm(),
        }))
    })();
    match out {
        Ok(v) => {
            print_json(&v);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn residue_check(t: f64, shifts: Vec<Complex64>, big_t: f64, x: u64) -> i32 {
    if shifts.len() != 4 {
        eprintln!("error: --shifts needs 4 values, got {}", shifts.len());
        return EXIT_CONFIG;
    }
    let s = ShiftQuadruple::new(shifts[0], shifts[1], shifts[2], shifts[3]);
    let cfg = MomentConfig::new(big_t, x, 1, cli::DEFAULT_EPSILON, s);
    let out = (|| -> moment_lab::Result<(serde_json::Value, bool)> {
        let one = oneswap_residue_check(&cfg, t)?;
        let two = twoswap_residue_check(&cfg, t)?;
        let ok = one.rel_error <= cli::RESIDUE_TOL && two.rel_error <= cli::RESIDUE_TOL;
        Ok((
            json!({ "t": t, "big_t": big_t, "x": x, "shifts": shifts, "oneswap": one, "twoswap": two, "passed": ok }),
            ok,
        ))
    })();
    match out {
        Ok((v, ok)) => {
            print_json(&v);
            if ok {
                EXIT_OK
            } else {
                EXIT_INVARIANT
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match args.command {
        Command::Run { spec } => run(spec),
        Command::Selftest { seed, inject_zeta_fault } => selftest(seed, inject_zeta_fault),
        Command::Sq { xi, eta, q, zeros, mellin_scale } => sq(xi, eta, q, zeros, mellin_scale),
        Command::ResidueCheck { t, shifts, big_t, x } => residue_check(t, shifts, big_t, x),
    };
    ExitCode::from(code as u8)
}
