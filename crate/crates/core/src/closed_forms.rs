//! Main-term formulas (diagonal, S_Q, one-swap, two-swap), the brute-force
//! oracles they are compared against, and the per-configuration report.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accum::ComplexSum;
use crate::decomposer::{accumulate, AccumulateOptions, DecompositionReport, MomentConfig, MomentTables};
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::shift_arith::{guard, mobius_table, ArithTable, ShiftQuadruple};
use crate::special::zeta;
use crate::weights::{BumpWeight, MellinWeight};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn t_integral<F: FnMut(f64) -> Complex64>(bump: &BumpWeight, mut f: F) -> Result<Complex64> {
    let (lo, hi) = bump.support();
    let r = quad::integrate(
        |t| f(t) * bump.psi(t),
        lo,
        hi,
        QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, ..QuadOptions::default() }.pieces(4),
    )?;
    Ok(r.value)
}

fn real_pow(base: f64, e: Complex64) -> Complex64 {
    (e * base.ln()).exp()
}

// ---------------------------------------------------------------------------
// Diagonal and brute-force off-diagonal

/// ψ̂(0) Σ_{n≤X} τ_{α,β}(n) τ_{γ,δ}(n) / n.
pub fn diagonal_sum(tables: &MomentTables) -> Result<Complex64> {
    let psi0 = tables.bump().psi_hat(0.0)?;
    Ok(diagonal_sum_with(tables.tau_ab(), tables.tau_gd(), psi0))
}

/// The diagonal sum for explicit tables and ψ̂(0).
pub fn diagonal_sum_with(tau_ab: &ArithTable, tau_gd: &ArithTable, psi0: Complex64) -> Complex64 {
    let mut acc = ComplexSum::default();
    let limit = tau_ab.limit().min(tau_gd.limit());
    for n in 1..=limit {
        acc.add(tau_ab[n] * tau_gd[n] / n as f64);
    }
    acc.value() * psi0
}

/// Direct double loop over the window 0 < |m − n| < m/τ, m ≤ X.
pub fn brute_force_offdiagonal(tables: &MomentTables) -> Result<Complex64> {
    let x = tables.config().x;
    let mut acc = ComplexSum::default();
    for m in 1..=x {
        let tm = tables.tau_ab()[m as usize];
        for n in tables.window(m) {
            acc.add(tm * tables.tau_gd()[n as usize] * tables.pair_weight(m, n)?);
        }
    }
    Ok(acc.value())
}

// ---------------------------------------------------------------------------
// S_Q(ξ, η)

/// Samples φ(k/Q) for k ≤ K together with the squarefree divisors of every
/// k, so that coprime-pair sums cost O(K log K).
#[derive(Debug, Clone)]
pub struct SqSampler {
    q: u64,
    phi: Vec<f64>,
    ln: Vec<f64>,
    // squarefree divisors d of k with sign μ(d), flattened
    offsets: Vec<usize>,
    divisors: Vec<(u32, i8)>,
}

/// Relative size of |φ| below which the coprime sums are truncated.
pub const SQ_PHI_TOL: f64 = 1e-13;

impl SqSampler {
    pub fn new(q: u64, phi: &MellinWeight) -> Result<Self> {
        Self::with_tolerance(q, phi, SQ_PHI_TOL)
    }

    pub fn with_tolerance(q: u64, phi: &MellinWeight, tol: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("Q must be at least 1".into()));
        }
        let reach = phi.support_bound(tol)?;
        let k_max = ((reach * q as f64).ceil() as usize).max(1);
        if k_max > 50_000_000 {
            return Err(Error::InvalidArgument(format!("S_Q cutoff {k_max} is too large")));
        }
        let mut vals = vec![0.0; k_max + 1];
        for (k, v) in vals.iter_mut().enumerate().skip(1) {
            *v = phi.phi(k as f64 / q as f64)?;
        }
        let mu = mobius_table(k_max as i64)?;
        let mut counts = vec![0usize; k_max + 2];
        for d in 1..=k_max {
            if mu[d] != 0 {
                for k in (d..=k_max).step_by(d) {
                    counts[k + 1] += 1;
                }
            }
        }
        for k in 1..=k_max + 1 {
            counts[k] += counts[k - 1];
        }
        let mut fill = counts.clone();
        let mut divisors = vec![(0u32, 0i8); counts[k_max + 1]];
        for d in 1..=k_max {
            if mu[d] != 0 {
                for k in (d..=k_max).step_by(d) {
                    divisors[fill[k]] = (d as u32, mu[d]);
                    fill[k] += 1;
                }
            }
        }
        let ln = (0..=k_max).map(|k| if k == 0 { 0.0 } else { (k as f64).ln() }).collect();
        Ok(Self { q, phi: vals, ln, offsets: counts, divisors })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn cutoff(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi_at(&self, k: usize) -> f64 {
        self.phi[k]
    }

    fn weights(&self, xi: Complex64) -> Vec<Complex64> {
        let e = -(xi + 1.0);
        (0..self.phi.len())
            .map(|k| if k == 0 { Complex64::new(0.0, 0.0) } else { (e * self.ln[k]).exp() * self.phi[k] })
            .collect()
    }

    /// Σ_{1≤M≤N, (M,N)=1} φ(M/Q) φ(N/Q) M^{−1−ξ} N^{−1−η}.
    pub fn sum(&self, xi: Complex64, eta: Complex64) -> Complex64 {
        let a = self.weights(xi);
        let b = self.weights(eta);
        self.sum_weights(&a, &b)
    }

    /// S_Q(ξ,η) + S_Q(η,ξ).
    pub fn symmetrized(&self, xi: Complex64, eta: Complex64) -> Complex64 {
        let a = self.weights(xi);
        let b = self.weights(eta);
        self.sum_weights(&a, &b) + self.sum_weights(&b, &a)
    }

    fn sum_weights(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        // running[d] = Σ_{M ≤ N, d | M} a(M); the coprime inner sum at N is
        // Σ_{d | N} μ(d) running[d].
        let k_max = self.cutoff();
        let mut running = vec![Complex64::new(0.0, 0.0); k_max + 1];
        let mut acc = ComplexSum::default();
        for n in 1..=k_max {
            let mut inner = Complex64::new(0.0, 0.0);
            for &(d, mu) in &self.divisors[self.offsets[n]..self.offsets[n + 1]] {
                let r = &mut running[d as usize];
                *r += a[n];
                inner += *r * mu as f64;
            }
            acc.add(inner * b[n]);
        }
        acc.value()
    }
}

/// S_Q(ξ, η) by the direct coprime-pair sum.
pub fn sq_bruteforce(xi: Complex64, eta: Complex64, q: u64, phi: &MellinWeight) -> Result<Complex64> {
    Ok(SqSampler::new(q, phi)?.sum(xi, eta))
}

/// S_Q(ξ, η) + S_Q(η, ξ).
pub fn sq_symmetrized_bruteforce(xi: Complex64, eta: Complex64, q: u64, phi: &MellinWeight) -> Result<Complex64> {
    Ok(SqSampler::new(q, phi)?.symmetrized(xi, eta))
}

/// ζ(1+ξ) ζ(1+η) / ζ(2+ξ+η).
pub fn sq_zeta_ratio(xi: Complex64, eta: Complex64, min_shift: f64) -> Result<Complex64> {
    guard("xi", xi, min_shift)?;
    guard("eta", eta, min_shift)?;
    guard("xi+eta", xi + eta, min_shift)?;
    guard("1+xi+eta", xi + eta + 1.0, min_shift)?;
    Ok(zeta(xi + 1.0)? * zeta(eta + 1.0)? / zeta(xi + eta + 2.0)?)
}

/// φ(1/Q)² + ζ(1+ξ) ζ(1+η) / ζ(2+ξ+η).
pub fn sq_formula(xi: Complex64, eta: Complex64, q: u64, phi: &MellinWeight, min_shift: f64) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::InvalidArgument("Q must be at least 1".into()));
    }
    let p = phi.phi(1.0 / q as f64)?;
    Ok(sq_zeta_ratio(xi, eta, min_shift)? + p * p)
}

// ---------------------------------------------------------------------------
// One-swap terms

/// Power of t carried by the one-swap t-integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OneSwapPower {
    /// (tT/2π)^{−α−γ}; the form under which the X-power terms cancel against
    /// the two-swap ones.
    Corrected,
    /// t^{−1−α−γ}, as written in the final semi-diagonal display.
    AsPrinted,
}

/// The four one-swap terms in the order: shifts as given, (α,γ)↔(β,δ),
/// γ↔δ, and both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSwapTerms {
    pub terms: [Complex64; 4],
    pub total: Complex64,
}

/// The four shift quadruples the one-swap terms are evaluated at.
pub fn oneswap_variants(s: &ShiftQuadruple) -> [ShiftQuadruple; 4] {
    let sw = s.swapped_second();
    [*s, s.interchanged_pairs(), sw, sw.interchanged_pairs()]
}

/// One term: ζ(1−γ+δ)ζ(1−α+β)/ζ(2−α+β−γ+δ) times ∫ψ(t) w(t) B(t) dt with
/// B(t) = ζ(1+β+δ)ζ(1−α−γ) − Z Y^{−β−δ}/(β+δ) + Z Y^{−α−γ}/(α+γ),
/// Y = 2πX/(tT), Z = ζ(1−α+β−γ+δ).
pub fn oneswap_term(
    s: &ShiftQuadruple,
    t_scale: f64,
    x: f64,
    bump: &BumpWeight,
    min_shift: f64,
    power: OneSwapPower,
) -> Result<Complex64> {
    let ShiftQuadruple { alpha: a, beta: b, gamma: g, delta: d } = *s;
    let ag = guard("alpha+gamma", a + g, min_shift)?;
    let bd = guard("beta+delta", b + d, min_shift)?;
    guard("alpha-beta", a - b, min_shift)?;
    guard("gamma-delta", g - d, min_shift)?;
    let diff = guard("alpha-beta+gamma-delta", ag - bd, min_shift)?;
    guard("1+alpha-beta+gamma-delta", diff + 1.0, min_shift)?;
    let pref = zeta(ONE - g + d)? * zeta(ONE - a + b)? / zeta(2.0 - diff)?;
    let z0 = zeta(bd + 1.0)? * zeta(ONE - ag)?;
    let z1 = zeta(ONE - diff)?;
    let integral = t_integral(bump, |t| {
        let y = 2.0 * PI * x / (t * t_scale);
        let w = match power {
            OneSwapPower::Corrected => real_pow(t * t_scale / (2.0 * PI), -ag),
            OneSwapPower::AsPrinted => real_pow(t, -ag - 1.0),
        };
        w * (z0 - z1 * real_pow(y, -bd) / bd + z1 * real_pow(y, -ag) / ag)
    })?;
    Ok(pref * integral)
}

fn oneswap_with(cfg: &MomentConfig, power: OneSwapPower) -> Result<OneSwapTerms> {
    let bump = BumpWeight::new(cfg.bump)?;
    let mut terms = [Complex64::new(0.0, 0.0); 4];
    for (slot, s) in terms.iter_mut().zip(oneswap_variants(&cfg.shifts)) {
        *slot = oneswap_term(&s, cfg.t, cfg.x as f64, &bump, cfg.min_shift, power)?;
    }
    Ok(OneSwapTerms { terms, total: (terms[0] + terms[1]) + (terms[2] + terms[3]) })
}

/// Sum of the four one-swap terms.
pub fn oneswap_closed_form(cfg: &MomentConfig) -> Result<OneSwapTerms> {
    oneswap_with(cfg, OneSwapPower::Corrected)
}

/// The same four terms with the t-power exactly as printed.
pub fn oneswap_closed_form_as_printed(cfg: &MomentConfig) -> Result<OneSwapTerms> {
    oneswap_with(cfg, OneSwapPower::AsPrinted)
}

/// One-swap total with each ζ-ratio ζ(1+ξ)ζ(1+η)/ζ(2+ξ+η), ξ = δ−γ, η = β−α,
/// replaced by the explicit symmetrized coprime sum S_Q(ξ,η) + S_Q(η,ξ).
pub fn oneswap_presummed(cfg: &MomentConfig, sampler: &SqSampler) -> Result<OneSwapTerms> {
    let bump = BumpWeight::new(cfg.bump)?;
    let mut terms = [Complex64::new(0.0, 0.0); 4];
    for (slot, v) in terms.iter_mut().zip(oneswap_variants(&cfg.shifts)) {
        let term = oneswap_term(&v, cfg.t, cfg.x as f64, &bump, cfg.min_shift, OneSwapPower::Corrected)?;
        let (xi, eta) = (v.delta - v.gamma, v.beta - v.alpha);
        *slot = term / sq_zeta_ratio(xi, eta, cfg.min_shift)? * sampler.symmetrized(xi, eta);
    }
    Ok(OneSwapTerms { terms, total: (terms[0] + terms[1]) + (terms[2] + terms[3]) })
}

/// Scale B of the entire regularizer exp(s²/B²) used in the contour checks.
pub const CONTOUR_REGULARIZER: f64 = 4.0;
/// Truncation height of the contour checks.
pub const CONTOUR_HEIGHT: f64 = 60.0;

/// Outcome of a contour-versus-residue comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueCheck {
    /// Right-line integral minus left-line integral.
    pub contour: Complex64,
    /// Sum of the residues crossed.
    pub residues: Complex64,
    pub right_line: Complex64,
    pub left_line: Complex64,
    pub left_abscissa: f64,
    pub rel_error: f64,
}

fn regularizer(s: Complex64) -> Complex64 {
    (s * s / (CONTOUR_REGULARIZER * CONTOUR_REGULARIZER)).exp()
}

fn contour_difference<F: Fn(Complex64) -> Result<Complex64>>(
    f: F,
    right: f64,
    left: f64,
    residues: Complex64,
) -> Result<ResidueCheck> {
    let line = |c: f64| -> Result<Complex64> {
        let mut failure = None;
        let r = quad::vertical_line(
            |s| match f(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            },
            c,
            CONTOUR_HEIGHT,
            QuadOptions { abs_tol: 1e-11 * residues.norm().max(1e-300), rel_tol: 0.0, ..QuadOptions::default() }
                .pieces(48),
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(r.value),
        }
    };
    let right_line = line(right)?;
    let left_line = line(left)?;
    let contour = right_line - left_line;
    Ok(ResidueCheck {
        contour,
        residues,
        right_line,
        left_line,
        left_abscissa: left,
        rel_error: (contour - residues).norm() / residues.norm(),
    })
}

fn left_abscissa(poles: &[Complex64]) -> f64 {
    let lowest = poles.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    if lowest > -0.45 {
        -0.5
    } else {
        lowest - 0.25
    }
}

/// Checks the shift of (1/2πi)∫ ζ(s+1+β+δ) ζ(1−s−α−γ) Y^s G(s) ds/s,
/// Y = 2πX/(tT), from ℜs = 2 to ℜs = −1/2 against the residues at
/// s = 0, −α−γ, −β−δ. G(s) = exp(s²/B²) makes both lines converge absolutely
/// and enters each residue as G(pole).
pub fn oneswap_residue_check(cfg: &MomentConfig, t: f64) -> Result<ResidueCheck> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    let ShiftQuadruple { alpha: a, beta: b, gamma: g, delta: d } = cfg.shifts;
    let ag = guard("alpha+gamma", a + g, cfg.min_shift)?;
    let bd = guard("beta+delta", b + d, cfg.min_shift)?;
    guard("alpha-beta+gamma-delta", ag - bd, cfg.min_shift)?;
    let y = 2.0 * PI * cfg.x as f64 / (t * cfg.t);
    let z1 = zeta(ONE + bd - ag)?;
    let residues = zeta(bd + 1.0)? * zeta(ONE - ag)? - z1 * real_pow(y, -bd) * regularizer(-bd) / bd
        + z1 * real_pow(y, -ag) * regularizer(-ag) / ag;
    let f = |s: Complex64| -> Result<Complex64> {
        Ok(zeta(s + 1.0 + bd)? * zeta(ONE - s - ag)? * real_pow(y, s) * regularizer(s) / s)
    };
    contour_difference(f, 2.0, left_abscissa(&[-ag, -bd]), residues)
}

/// The two-swap analogue at M = N = 1 and fixed t:
/// (1/2πi)∫ ζ(1−s−α−γ) ζ(1−s−β−δ) Y^s G(s) ds/s with Y = 4π²X/(tT)²,
/// shifted from ℜs = 2 past s = 0, −α−γ, −β−δ.
pub fn twoswap_residue_check(cfg: &MomentConfig, t: f64) -> Result<ResidueCheck> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    let ShiftQuadruple { alpha: a, beta: b, gamma: g, delta: d } = cfg.shifts;
    let ag = guard("alpha+gamma", a + g, cfg.min_shift)?;
    let bd = guard("beta+delta", b + d, cfg.min_shift)?;
    guard("alpha-beta+gamma-delta", ag - bd, cfg.min_shift)?;
    let y = 4.0 * PI * PI * cfg.x as f64 / (t * cfg.t).powi(2);
    // ζ(1−s−α−γ) ~ −1/(s+α+γ)
    let residues = zeta(ONE - ag)? * zeta(ONE - bd)?
        + zeta(ONE + ag - bd)? * real_pow(y, -ag) * regularizer(-ag) / ag
        + zeta(ONE + bd - ag)? * real_pow(y, -bd) * regularizer(-bd) / bd;
    let f = |s: Complex64| -> Result<Complex64> {
        Ok(zeta(ONE - s - ag)? * zeta(ONE - s - bd)? * real_pow(y, s) * regularizer(s) / s)
    };
    contour_difference(f, 2.0, left_abscissa(&[-ag, -bd]), residues)
}

// ---------------------------------------------------------------------------
// Two-swap terms

// X^{−(α+γ)} (tT/2π)^{(α+γ)−(β+δ)} ζ(1+(α+γ)−(β+δ)) ζ(1+α−β) ζ(1+γ−δ)
//   / ((α+γ) ζ(2+(α+γ)−(β+δ)));
// the X^{−β−δ} term is this with (α,γ) ↔ (β,δ).
fn twoswap_same_side(s: &ShiftQuadruple) -> Result<(Complex64, Complex64, Complex64)> {
    let ShiftQuadruple { alpha: a, beta: b, gamma: g, delta: d } = *s;
    let u = a + g;
    let w = b + d;
    let e = u - w;
    let coef = zeta(ONE + e)? * zeta(ONE + (a - b))? * zeta(ONE + (g - d))? / (u * zeta(e + 2.0)?);
    Ok((coef, u, e))
}

// X^{−(α+δ)} (tT/2π)^{(α+δ)−(β+γ)} ζ(1−γ+δ) ζ(1+(α+δ)−(β+γ)) ζ(1+α−β)
//   / ((α+δ) ζ(2+(α+δ)−(β+γ)));
// the X^{−β−γ} term is this with (α,γ) ↔ (β,δ).
fn twoswap_cross_side(s: &ShiftQuadruple) -> Result<(Complex64, Complex64, Complex64)> {
    let ShiftQuadruple { alpha: a, beta: b, gamma: g, delta: d } = *s;
    let u = a + d;
    let w = b + g;
    let e = u - w;
    let coef = zeta(ONE + (d - g))? * zeta(ONE + e)? * zeta(ONE + (a - b))? / (u * zeta(e + 2.0)?);
    Ok((coef, u, e))
}

/// ∫ ψ(t) [five-term bracket] dt. Every symmetric combination is formed in
/// an order-independent way so that the (α,γ) ↔ (β,δ) interchange gives a
/// bitwise identical result.
pub fn twoswap_closed_form(cfg: &MomentConfig) -> Result<Complex64> {
    let s = cfg.shifts;
    for (name, v) in s.required_combinations() {
        guard(name, v, cfg.min_shift)?;
    }
    let ShiftQuadruple { alpha: a, beta: b, gamma: g, delta: d } = s;
    let u = a + g;
    let w = b + d;
    let sigma = u + w;
    guard("alpha+beta+gamma+delta-1", sigma - 1.0, cfg.min_shift)?;
    let lead = (zeta(ONE - u)? * zeta(ONE - w)?) * (zeta(ONE - (b + g))? * zeta(ONE - (a + d))?) / zeta(2.0 - sigma)?;
    let i = s.interchanged_pairs();
    let parts = [twoswap_same_side(&s)?, twoswap_same_side(&i)?, twoswap_cross_side(&s)?, twoswap_cross_side(&i)?];
    let x = cfg.x as f64;
    let bump = BumpWeight::new(cfg.bump)?;
    let term = |p: &(Complex64, Complex64, Complex64), scale: f64| -> Complex64 {
        let (coef, xe, te) = *p;
        coef * real_pow(x, -xe) * real_pow(scale, te)
    };
    t_integral(&bump, |t| {
        let scale = t * cfg.t / (2.0 * PI);
        lead * real_pow(scale, -sigma)
            + (term(&parts[0], scale) + term(&parts[1], scale))
            + (term(&parts[2], scale) + term(&parts[3], scale))
    })
}

// ---------------------------------------------------------------------------
// Report

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// An empirical value next to its prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub empirical: Complex64,
    pub predicted: Complex64,
    pub abs: f64,
    /// abs / |predicted|.
    pub rel: f64,
}

impl Discrepancy {
    pub fn new(empirical: Complex64, predicted: Complex64) -> Self {
        let abs = (empirical - predicted).norm();
        Self { empirical, predicted, abs, rel: abs / predicted.norm() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancies {
    /// Terms semi-diagonal under either pairing against the one-swap total.
    pub semi_diagonal: Discrepancy,
    /// Terms of type II under both pairings against the two-swap total.
    pub type_ii: Discrepancy,
    /// Semi-diagonal classes of the m₁/n₁ pairing alone against one-swap.
    pub semi_diagonal_literal: Discrepancy,
    /// Type II class of the m₁/n₁ pairing alone against two-swap.
    pub type_ii_literal: Discrepancy,
    /// The whole off-diagonal sum against one-swap plus two-swap.
    pub off_diagonal: Discrepancy,
    /// Bucket total against the brute-force double loop, when computed.
    pub brute_force: Option<Discrepancy>,
    /// |duplicate + edge| / |off-diagonal total|.
    pub duplicate_edge_fraction: f64,
}

/// Everything computed for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub schema_version: u32,
    pub config: MomentConfig,
    pub tau: f64,
    pub warnings: Vec<String>,
    pub diagonal_only: bool,
    pub diagonal: Complex64,
    pub brute_force: Option<Complex64>,
    pub decomposition: Option<DecompositionReport>,
    pub oneswap: Option<OneSwapTerms>,
    pub oneswap_as_printed: Option<Complex64>,
    pub twoswap: Option<Complex64>,
    pub discrepancies: Option<Discrepancies>,
}

impl MomentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Bundles the closed forms with an already accumulated decomposition.
/// `decomposition` must be `None` exactly when the configuration is
/// diagonal-only.
pub fn assemble_report(
    tables: &MomentTables,
    decomposition: Option<DecompositionReport>,
    brute_force: Option<Complex64>,
) -> Result<MomentReport> {
    let cfg = tables.config().clone();
    let warnings = cfg.validate()?;
    let diagonal = diagonal_sum(tables)?;
    let diagonal_only = cfg.is_diagonal_only();
    let mut report = MomentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tau: cfg.tau(),
        config: cfg,
        warnings,
        diagonal_only,
        diagonal,
        brute_force: None,
        decomposition: None,
        oneswap: None,
        oneswap_as_printed: None,
        twoswap: None,
        discrepancies: None,
    };
    if diagonal_only {
        return Ok(report);
    }
    let dec = decomposition
        .ok_or_else(|| Error::InvalidArgument("off-diagonal configuration needs a decomposition".into()))?;
    let one = oneswap_closed_form(&report.config)?;
    let printed = oneswap_closed_form_as_printed(&report.config)?;
    let two = twoswap_closed_form(&report.config)?;
    let literal_sd = dec.classes.semi_diagonal_h1.sum() + dec.classes.semi_diagonal_h2.sum();
    report.discrepancies = Some(Discrepancies {
        semi_diagonal: Discrepancy::new(dec.semi_diagonal_any.sum(), one.total),
        type_ii: Discrepancy::new(dec.type_ii_both.sum(), two),
        semi_diagonal_literal: Discrepancy::new(literal_sd, one.total),
        type_ii_literal: Discrepancy::new(dec.classes.type_ii.sum(), two),
        off_diagonal: Discrepancy::new(dec.total(), one.total + two),
        brute_force: brute_force.map(|b| Discrepancy::new(dec.total(), b)),
        duplicate_edge_fraction: dec.duplicate_edge_fraction(),
    });
    report.brute_force = brute_force;
    report.oneswap = Some(one);
    report.oneswap_as_printed = Some(printed.total);
    report.twoswap = Some(two);
    report.decomposition = Some(dec);
    Ok(report)
}

/// Builds the tables, runs the decomposer (and optionally the brute-force
/// loop) and assembles the report.
pub fn evaluate(cfg: &MomentConfig, opts: AccumulateOptions, with_brute_force: bool) -> Result<MomentReport> {
    cfg.validate()?;
    let tables = MomentTables::new(cfg)?;
    if cfg.is_diagonal_only() {
        return assemble_report(&tables, None, None);
    }
    let dec = accumulate(&tables, opts)?;
    let brute = if with_brute_force { Some(brute_force_offdiagonal(&tables)?) } else { None };
    assemble_report(&tables, Some(dec), brute)
}
