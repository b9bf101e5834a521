//! The discrete circle method made executable: enumerate the off-diagonal
//! quadruples (m₁, m₂, n₁, n₂), attach each to a Farey arc, compute
//! h₁ = m₁N − n₁M and h₂ = m₂M − n₂N, and accumulate class sums.
//!
//! A term of the off-diagonal sum has amplitude
//! m₁^{−α} m₂^{−β} n₁^{−γ} n₂^{−δ} / √(m₁m₂n₁n₂) · ψ̂((T/2π) log(n₁n₂ / m₁m₂)),
//! which summed over factorizations reproduces
//! τ_{α,β}(m) τ_{γ,δ}(n) / √(mn) · ψ̂((T/2π) log(n/m)) exactly.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accum::ComplexSum;
use crate::error::{Error, Result};
use crate::farey::{FareyArc, FareyArcs};
use crate::shift_arith::{self, ArithTable, DivisorLists, ShiftQuadruple, DEFAULT_MIN_SHIFT};
use crate::weights::{BumpParams, BumpWeight, DEFAULT_MELLIN_SCALE};

/// Grid spacing of the ψ̂ cache used for bulk evaluation.
pub const PSI_HAT_STEP: f64 = 1e-3;

/// One configuration of the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentConfig {
    /// Height scale T.
    pub t: f64,
    /// Length X of the Dirichlet polynomials.
    pub x: u64,
    /// Farey order Q.
    pub q: u64,
    /// Off-diagonal cutoff exponent: τ = T^{1−ε}.
    pub epsilon: f64,
    pub shifts: ShiftQuadruple,
    pub bump: BumpParams,
    /// Scale A of the Mellin weight φ.
    pub mellin_scale: f64,
    pub min_shift: f64,
}

impl MomentConfig {
    pub fn new(t: f64, x: u64, q: u64, epsilon: f64, shifts: ShiftQuadruple) -> Self {
        Self {
            t,
            x,
            q,
            epsilon,
            shifts,
            bump: BumpParams::default(),
            mellin_scale: DEFAULT_MELLIN_SCALE,
            min_shift: DEFAULT_MIN_SHIFT,
        }
    }

    pub fn tau(&self) -> f64 {
        self.t.powf(1.0 - self.epsilon)
    }

    /// No m ≤ X admits a nonzero |m − n| < m/τ.
    pub fn is_diagonal_only(&self) -> bool {
        (self.x as f64) <= self.tau()
    }

    /// Checks everything the decomposer relies on; returns soft warnings.
    pub fn validate_structure(&self) -> Result<Vec<String>> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.t.is_finite() && self.t > 1.0) {
            return bad(format!("T must be finite and > 1, got {}", self.t));
        }
        if self.x == 0 || self.q == 0 {
            return bad(format!("X and Q must be positive, got X={} Q={}", self.x, self.q));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if self.x > u32::MAX as u64 {
            return bad(format!("X = {} exceeds the divisor-table range", self.x));
        }
        if (self.x as u128) * (self.q as u128) >= 1u128 << 62 {
            return bad(format!("X·Q = {}·{} overflows the exact h arithmetic", self.x, self.q));
        }
        if !(self.mellin_scale > 0.0 && self.mellin_scale.is_finite()) {
            return bad(format!("Mellin scale must be positive, got {}", self.mellin_scale));
        }
        if !(self.min_shift > 0.0) {
            return bad(format!("min_shift must be positive, got {}", self.min_shift));
        }
        if self.shifts.as_array().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return bad("shifts must be finite".into());
        }
        BumpWeight::new(self.bump)?;
        let mut warnings = Vec::new();
        let tau = self.tau();
        let q2 = (self.q * self.q) as f64;
        if q2 > tau / 10.0 {
            warnings
                .push(format!("Q² = {q2} exceeds τ/10 = {:.3}; companion containment may fail more often", tau / 10.0));
        }
        if self.is_diagonal_only() {
            warnings.push(format!("X = {} ≤ τ = {tau:.3}: off-diagonal set is empty", self.x));
        }
        Ok(warnings)
    }

    /// Full validation including the pole guard on the shift combinations
    /// the closed forms divide by.
    pub fn validate(&self) -> Result<Vec<String>> {
        let warnings = self.validate_structure()?;
        self.shifts.check_nondegenerate(self.min_shift)?;
        Ok(warnings)
    }
}

/// Largest d ≥ 0 with d < m/τ.
pub fn window_halfwidth(m: u64, tau: f64) -> u64 {
    let bound = m as f64 / tau;
    let mut d = bound.ceil().max(0.0) as u64;
    while d > 0 && !((d as f64) < bound) {
        d -= 1;
    }
    while ((d + 1) as f64) < bound {
        d += 1;
    }
    d
}

/// (T/2π) log(n/m), the ψ̂ argument of the pair (m, n).
pub fn phase(t: f64, m: u64, n: u64) -> f64 {
    let x = (n as f64 - m as f64) / m as f64;
    t / (2.0 * PI) * x.ln_1p()
}

/// Tables shared by the decomposer and the brute-force oracles.
#[derive(Debug, Clone)]
pub struct MomentTables {
    cfg: MomentConfig,
    tau: f64,
    arcs: FareyArcs,
    divisors: DivisorLists,
    powers: [Vec<Complex64>; 4],
    tau_ab: ArithTable,
    tau_gd: ArithTable,
    bump: BumpWeight,
}

impl MomentTables {
    pub fn new(cfg: &MomentConfig) -> Result<Self> {
        cfg.validate_structure()?;
        let tau = cfg.tau();
        let x = cfg.x as usize;
        let s = cfg.shifts;
        // every ψ̂ argument of the exact and two-fraction phases stays well
        // inside T/(2πτ) plus a margin for the expansion error
        let v_max = cfg.t / (2.0 * PI * tau) * 1.5 + 0.5;
        Ok(Self {
            cfg: cfg.clone(),
            tau,
            arcs: FareyArcs::new(cfg.q)?,
            divisors: DivisorLists::new(cfg.x as i64)?,
            powers: [
                shift_arith::power_table(x, s.alpha),
                shift_arith::power_table(x, s.beta),
                shift_arith::power_table(x, s.gamma),
                shift_arith::power_table(x, s.delta),
            ],
            tau_ab: shift_arith::tau_table(cfg.x as i64, s.alpha, s.beta)?,
            tau_gd: shift_arith::tau_table(cfg.x as i64, s.gamma, s.delta)?,
            bump: BumpWeight::new(cfg.bump)?.with_cache(v_max, PSI_HAT_STEP)?,
        })
    }

    pub fn config(&self) -> &MomentConfig {
        &self.cfg
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn arcs(&self) -> &FareyArcs {
        &self.arcs
    }

    pub fn divisors(&self) -> &DivisorLists {
        &self.divisors
    }

    pub fn tau_ab(&self) -> &ArithTable {
        &self.tau_ab
    }

    pub fn tau_gd(&self) -> &ArithTable {
        &self.tau_gd
    }

    pub fn bump(&self) -> &BumpWeight {
        &self.bump
    }

    /// ψ̂((T/2π) log(n/m)) / √(mn).
    pub fn pair_weight(&self, m: u64, n: u64) -> Result<Complex64> {
        let hat = self.bump.psi_hat(phase(self.cfg.t, m, n))?;
        Ok(hat / ((m as f64) * (n as f64)).sqrt())
    }

    /// m₁^{−α} m₂^{−β} n₁^{−γ} n₂^{−δ}.
    pub fn shift_factor(&self, q: &Quadruple) -> Complex64 {
        let [pa, pb, pg, pd] = &self.powers;
        pa[q.m1 as usize] * pb[q.m2 as usize] * pg[q.n1 as usize] * pd[q.n2 as usize]
    }

    /// The window of n around m, excluding n = m.
    pub fn window(&self, m: u64) -> impl Iterator<Item = u64> {
        let w = window_halfwidth(m, self.tau);
        let lo = m.saturating_sub(w).max(1);
        let hi = (m + w).min(self.cfg.x);
        (lo..=hi).filter(move |&n| n != m)
    }

    /// Quadruples with m = m₁m₂ in `ms`, in enumeration order.
    pub fn quadruples_in(&self, ms: std::ops::RangeInclusive<u64>) -> impl Iterator<Item = Quadruple> + '_ {
        ms.flat_map(move |m| {
            self.window(m).flat_map(move |n| {
                self.divisors.of(m as usize).iter().flat_map(move |&m1| {
                    self.divisors.of(n as usize).iter().map(move |&n1| {
                        let (m1, n1) = (m1 as u64, n1 as u64);
                        Quadruple { m1, m2: m / m1, n1, n2: n / n1 }
                    })
                })
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quadruple {
    pub m1: u64,
    pub m2: u64,
    pub n1: u64,
    pub n2: u64,
}

impl Quadruple {
    pub fn new(m1: u64, m2: u64, n1: u64, n2: u64) -> Self {
        Self { m1, m2, n1, n2 }
    }

    pub fn m(&self) -> u64 {
        self.m1 * self.m2
    }

    pub fn n(&self) -> u64 {
        self.n1 * self.n2
    }

    /// (n₁, n₂, m₁, m₂): the same term read from the other polynomial.
    pub fn reflected(&self) -> Self {
        Self::new(self.n1, self.n2, self.m1, self.m2)
    }

    /// (m₁, m₂, n₂, n₁): pair m₁ with n₂ instead of n₁.
    pub fn cross_paired(&self) -> Self {
        Self::new(self.m1, self.m2, self.n2, self.n1)
    }
}

/// Every off-diagonal quadruple of the configuration: m₁m₂ ≤ X, n₁n₂ ≤ X and
/// 0 < |m₁m₂ − n₁n₂| < m₁m₂/τ.
pub fn enumerate_offdiagonal(tables: &MomentTables) -> impl Iterator<Item = Quadruple> + '_ {
    tables.quadruples_in(1..=tables.cfg.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TermClass {
    Diagonal,
    /// h₁ = 0 ≠ h₂.
    SemiDiagonalH1,
    /// h₂ = 0 ≠ h₁.
    SemiDiagonalH2,
    TypeII,
}

impl TermClass {
    pub const ALL: [TermClass; 4] =
        [TermClass::Diagonal, TermClass::SemiDiagonalH1, TermClass::SemiDiagonalH2, TermClass::TypeII];

    fn from_h(h1: i64, h2: i64) -> Self {
        match (h1 == 0, h2 == 0) {
            (true, true) => TermClass::Diagonal,
            (true, false) => TermClass::SemiDiagonalH1,
            (false, true) => TermClass::SemiDiagonalH2,
            (false, false) => TermClass::TypeII,
        }
    }

    pub fn is_semi_diagonal(self) -> bool {
        matches!(self, TermClass::SemiDiagonalH1 | TermClass::SemiDiagonalH2)
    }
}

/// Which ratio was placed on the arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// m₁/n₁ ≤ 1 used as is.
    Direct,
    /// n₁/m₁ < 1 used, with the roles (α,β,γ,δ) → (γ,δ,α,β).
    Reflected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifiedTerm {
    pub quad: Quadruple,
    /// The quadruple in the orientation that was classified.
    pub oriented: Quadruple,
    pub orientation: Orientation,
    pub arc: FareyArc,
    pub h1: i64,
    pub h2: i64,
    pub class: TermClass,
    /// n₂/m₂ lies in the arc of m₁/n₁ (the arc of 1/1 taken symmetric about 1).
    pub companion_in_arc: bool,
    /// |h₁| within the exact half-width of the arc on the side of m₁/n₁.
    pub h1_within_arc: bool,
    /// |h₁| ≤ n₁/(N + N″), the left half-width applied on both sides.
    pub h1_within_left_bound: bool,
}

impl ClassifiedTerm {
    pub fn is_boundary(&self) -> bool {
        self.arc.is_boundary()
    }
}

fn companion_in_arc(arc: &FareyArc, q: &Quadruple, order: u64) -> bool {
    let (num, den) = (q.n2, q.m2);
    if arc.right.is_none() {
        // the arc of 1/1 continues past 1 in the reflected orientation:
        // [Q/(Q+1), (Q+1)/Q)
        let x = num as u128;
        let y = den as u128;
        let qq = order as u128;
        return x * (qq + 1) >= qq * y && x * qq < (qq + 1) * y;
    }
    arc.contains(num, den)
}

/// Orients, locates and tags one quadruple.
pub fn classify(quad: Quadruple, arcs: &FareyArcs) -> ClassifiedTerm {
    let (oriented, orientation) =
        if quad.m1 <= quad.n1 { (quad, Orientation::Direct) } else { (quad.reflected(), Orientation::Reflected) };
    let arc = *arcs.locate_with_boundary(oriented.m1, oriented.n1);
    let (mm, nn) = (arc.center.num as i128, arc.center.den as i128);
    let h1 = oriented.m1 as i128 * nn - oriented.n1 as i128 * mm;
    let h2 = oriented.m2 as i128 * mm - oriented.n2 as i128 * nn;
    let n1 = oriented.n1 as i128;
    let h1_within_arc = match h1.cmp(&0) {
        std::cmp::Ordering::Greater => arc.right.is_some() && h1 * (arc.hi.den as i128) < n1,
        std::cmp::Ordering::Less => -h1 * (arc.lo.den as i128) <= n1,
        std::cmp::Ordering::Equal => true,
    };
    let h1_within_left_bound = h1.abs() * (arc.lo.den as i128) <= n1;
    let (h1, h2) = (h1 as i64, h2 as i64);
    ClassifiedTerm {
        quad,
        oriented,
        orientation,
        arc,
        h1,
        h2,
        class: TermClass::from_h(h1, h2),
        companion_in_arc: companion_in_arc(&arc, &oriented, arcs.order()),
        h1_within_arc,
        h1_within_left_bound,
    }
}

/// MN(m₁m₂ − n₁n₂) = h₁m₂M + h₂m₁N − h₁h₂, checked exactly.
pub fn verify_product_identity(t: &ClassifiedTerm) -> bool {
    let o = t.oriented;
    let (mm, nn) = (t.arc.center.num as i128, t.arc.center.den as i128);
    let (h1, h2) = (t.h1 as i128, t.h2 as i128);
    let lhs = mm * nn * (o.m1 as i128 * o.m2 as i128 - o.n1 as i128 * o.n2 as i128);
    let rhs = h1 * o.m2 as i128 * mm + h2 * o.m1 as i128 * nn - h1 * h2;
    lhs == rhs
}

/// ln(n₁n₂/m₁m₂) of the oriented term against its two-fraction expansion
/// −(h₁/(m₁N) + h₂/(m₂M)). Returns `(exact, approx, bound)` where `bound`
/// majorizes |exact − approx|. `None` on the boundary arc (M = 0).
pub fn phase_expansion(t: &ClassifiedTerm) -> Option<(f64, f64, f64)> {
    if t.is_boundary() {
        return None;
    }
    let o = t.oriented;
    let (mm, nn) = (t.arc.center.num as f64, t.arc.center.den as f64);
    let (m1, m2) = (o.m1 as f64, o.m2 as f64);
    let (h1, h2) = (t.h1 as f64, t.h2 as f64);
    let m = o.m() as f64;
    let x = (m - o.n() as f64) / m;
    let exact = (-x).ln_1p();
    let approx = -(h1 / (m1 * nn) + h2 / (m2 * mm));
    let cross = (h1 * h2).abs() / (m1 * m2 * mm * nn);
    let bound = cross + x * x / (2.0 * (1.0 - x.abs())) + 1e-15 * (1.0 + approx.abs());
    Some((exact, approx, bound))
}

/// Sums, counts and masses of one class of terms.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(from = "TallyView", into = "TallyView")]
pub struct Tally {
    sum: ComplexSum,
    approx: ComplexSum,
    count: u64,
    abs_mass: f64,
}

#[derive(Serialize, Deserialize)]
struct TallyView {
    sum: Complex64,
    approx_sum: Complex64,
    count: u64,
    abs_mass: f64,
}

impl From<Tally> for TallyView {
    fn from(t: Tally) -> Self {
        Self { sum: t.sum(), approx_sum: t.approx_sum(), count: t.count, abs_mass: t.abs_mass }
    }
}

impl From<TallyView> for Tally {
    fn from(v: TallyView) -> Self {
        let mut t = Tally { count: v.count, abs_mass: v.abs_mass, ..Tally::default() };
        t.sum.add(v.sum);
        t.approx.add(v.approx_sum);
        t
    }
}

// Equality of the observable values; the compensation split is not part of
// the serialized form.
impl PartialEq for Tally {
    fn eq(&self, other: &Self) -> bool {
        self.sum() == other.sum()
            && self.approx_sum() == other.approx_sum()
            && self.count == other.count
            && self.abs_mass == other.abs_mass
    }
}

impl Tally {
    fn add(&mut self, w: Complex64, approx: Complex64) {
        self.sum.add(w);
        self.approx.add(approx);
        self.count += 1;
        self.abs_mass += w.norm();
    }

    fn merge(&mut self, other: &Self) {
        self.sum.merge(&other.sum);
        self.approx.merge(&other.approx);
        self.count += other.count;
        self.abs_mass += other.abs_mass;
    }

    /// Exact-phase sum.
    pub fn sum(&self) -> Complex64 {
        self.sum.value()
    }

    /// Sum with ψ̂ evaluated at the two-fraction phase (exact phase on the
    /// boundary arc, where the expansion is undefined).
    pub fn approx_sum(&self) -> Complex64 {
        self.approx.value()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Σ |term|.
    pub fn abs_mass(&self) -> f64 {
        self.abs_mass
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassTallies {
    pub diagonal: Tally,
    pub semi_diagonal_h1: Tally,
    pub semi_diagonal_h2: Tally,
    pub type_ii: Tally,
}

impl ClassTallies {
    pub fn get(&self, class: TermClass) -> &Tally {
        match class {
            TermClass::Diagonal => &self.diagonal,
            TermClass::SemiDiagonalH1 => &self.semi_diagonal_h1,
            TermClass::SemiDiagonalH2 => &self.semi_diagonal_h2,
            TermClass::TypeII => &self.type_ii,
        }
    }

    fn get_mut(&mut self, class: TermClass) -> &mut Tally {
        match class {
            TermClass::Diagonal => &mut self.diagonal,
            TermClass::SemiDiagonalH1 => &mut self.semi_diagonal_h1,
            TermClass::SemiDiagonalH2 => &mut self.semi_diagonal_h2,
            TermClass::TypeII => &mut self.type_ii,
        }
    }

    fn merge(&mut self, other: &Self) {
        for c in TermClass::ALL {
            self.get_mut(c).merge(other.get(c));
        }
    }

    /// Sum of the four exact-phase class sums.
    pub fn total(&self) -> Complex64 {
        let mut s = ComplexSum::default();
        for c in TermClass::ALL {
            s.add(self.get(c).sum());
        }
        s.value()
    }

    pub fn count(&self) -> u64 {
        TermClass::ALL.iter().map(|&c| self.get(c).count).sum()
    }
}

/// Per-class sums and diagnostics of one decomposition run. Reports form a
/// commutative monoid under [`merge`](Self::merge) up to rounding; merging
/// in a fixed order is bitwise deterministic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// Classes under the m₁/n₁ pairing.
    pub classes: ClassTallies,
    /// Classes under the m₁/n₂ pairing.
    pub cross_classes: ClassTallies,
    /// Semi-diagonal under at least one pairing.
    pub semi_diagonal_any: Tally,
    /// Type II under both pairings.
    pub type_ii_both: Tally,
    /// Semi-diagonal under both pairings: the terms a four-term one-swap
    /// count would see twice.
    pub duplicate: Tally,
    /// Terms whose companion ratio n₂/m₂ leaves the arc of m₁/n₁.
    pub edge: Tally,
    /// Terms on the boundary arc around 0/1 (ratio below 1/(Q+1)).
    pub boundary: Tally,
    pub reflected: u64,
    /// Distinct (m, n) pairs visited.
    pub pairs: u64,
    pub product_identity_failures: u64,
    pub h1_arc_violations: u64,
    /// Terms with |h₁| > n₁/(N+N″) (possible only right of M/N).
    pub h1_left_bound_exceedances: u64,
    pub max_phase_gap: f64,
    pub max_cross_term: f64,
    pub phase_bound_violations: u64,
    /// max |h₂|·Q/m₂ over type II terms.
    pub max_h2_scaled: f64,
}

impl DecompositionReport {
    pub fn merge(&mut self, o: &Self) {
        self.classes.merge(&o.classes);
        self.cross_classes.merge(&o.cross_classes);
        self.semi_diagonal_any.merge(&o.semi_diagonal_any);
        self.type_ii_both.merge(&o.type_ii_both);
        self.duplicate.merge(&o.duplicate);
        self.edge.merge(&o.edge);
        self.boundary.merge(&o.boundary);
        self.reflected += o.reflected;
        self.pairs += o.pairs;
        self.product_identity_failures += o.product_identity_failures;
        self.h1_arc_violations += o.h1_arc_violations;
        self.h1_left_bound_exceedances += o.h1_left_bound_exceedances;
        self.max_phase_gap = self.max_phase_gap.max(o.max_phase_gap);
        self.max_cross_term = self.max_cross_term.max(o.max_cross_term);
        self.phase_bound_violations += o.phase_bound_violations;
        self.max_h2_scaled = self.max_h2_scaled.max(o.max_h2_scaled);
    }

    /// Exact-phase off-diagonal total, the sum of the four class buckets.
    pub fn total(&self) -> Complex64 {
        self.classes.total()
    }

    pub fn term_count(&self) -> u64 {
        self.classes.count()
    }

    /// |duplicate + edge contribution| / |total|.
    pub fn duplicate_edge_fraction(&self) -> f64 {
        let total = self.total().norm();
        if total == 0.0 {
            return 0.0;
        }
        (self.duplicate.sum() + self.edge.sum()).norm() / total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccumulateOptions {
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
    /// Also accumulate the two-fraction phase sums and expansion errors.
    pub approx_phase: bool,
    /// Also classify under the m₁/n₂ pairing.
    pub cross_pairing: bool,
}

impl Default for AccumulateOptions {
    fn default() -> Self {
        Self { threads: 0, approx_phase: true, cross_pairing: true }
    }
}

impl AccumulateOptions {
    pub fn single_threaded() -> Self {
        Self { threads: 1, ..Self::default() }
    }
}

/// Fixed partition of 1..=X into chunks of roughly equal work (the window
/// around m has width ∝ m), independent of the thread count.
fn chunks(x: u64) -> Vec<std::ops::RangeInclusive<u64>> {
    let k = 256.min(x) as f64;
    let mut out = Vec::new();
    let mut start = 1u64;
    for i in 1..=k as u64 {
        let end = if i as f64 == k { x } else { ((x as f64) * (i as f64 / k).sqrt()).round() as u64 };
        if end >= start {
            out.push(start..=end);
            start = end + 1;
        }
    }
    out
}

fn accumulate_range(
    tables: &MomentTables,
    ms: std::ops::RangeInclusive<u64>,
    opts: AccumulateOptions,
) -> Result<DecompositionReport> {
    let mut rep = DecompositionReport::default();
    let t = tables.cfg.t;
    let scale = t / (2.0 * PI);
    let q = tables.cfg.q as f64;
    for m in ms {
        for n in tables.window(m) {
            rep.pairs += 1;
            let pw = tables.pair_weight(m, n)?;
            for &m1 in tables.divisors.of(m as usize) {
                for &n1 in tables.divisors.of(n as usize) {
                    let (m1, n1) = (m1 as u64, n1 as u64);
                    let quad = Quadruple { m1, m2: m / m1, n1, n2: n / n1 };
                    let sf = tables.shift_factor(&quad);
                    let w = sf * pw;
                    let ct = classify(quad, &tables.arcs);
                    let mut approx_w = w;
                    if opts.approx_phase {
                        if let Some((exact, approx, bound)) = phase_expansion(&ct) {
                            let gap = (exact - approx).abs();
                            rep.max_phase_gap = rep.max_phase_gap.max(gap);
                            let o = ct.oriented;
                            let cross = (ct.h1 as f64 * ct.h2 as f64).abs()
                                / (o.m1 as f64 * o.m2 as f64 * ct.arc.center.num as f64 * ct.arc.center.den as f64);
                            rep.max_cross_term = rep.max_cross_term.max(cross);
                            if gap > bound {
                                rep.phase_bound_violations += 1;
                            }
                            // back to the original orientation: log(n/m) flips sign
                            let v = match ct.orientation {
                                Orientation::Direct => scale * approx,
                                Orientation::Reflected => -scale * approx,
                            };
                            let hat = tables.bump.psi_hat(v)?;
                            approx_w = sf * hat / ((m as f64) * (n as f64)).sqrt();
                        }
                    }
                    rep.classes.get_mut(ct.class).add(w, approx_w);
                    if ct.orientation == Orientation::Reflected {
                        rep.reflected += 1;
                    }
                    if !verify_product_identity(&ct) {
                        rep.product_identity_failures += 1;
                    }
                    if !ct.h1_within_arc {
                        rep.h1_arc_violations += 1;
                    }
                    if !ct.h1_within_left_bound {
                        rep.h1_left_bound_exceedances += 1;
                    }
                    if ct.class == TermClass::TypeII {
                        let h2s = ct.h2.unsigned_abs() as f64 * q / ct.oriented.m2 as f64;
                        rep.max_h2_scaled = rep.max_h2_scaled.max(h2s);
                    }
                    if ct.is_boundary() {
                        rep.boundary.add(w, approx_w);
                    }
                    if !ct.companion_in_arc {
                        rep.edge.add(w, approx_w);
                    }
                    if opts.cross_pairing {
                        let cc = classify(quad.cross_paired(), &tables.arcs);
                        rep.cross_classes.get_mut(cc.class).add(w, approx_w);
                        let sd = ct.class.is_semi_diagonal();
                        let sd_cross = cc.class.is_semi_diagonal();
                        if sd || sd_cross {
                            rep.semi_diagonal_any.add(w, approx_w);
                        }
                        if sd && sd_cross {
                            rep.duplicate.add(w, approx_w);
                        }
                        if ct.class == TermClass::TypeII && cc.class == TermClass::TypeII {
                            rep.type_ii_both.add(w, approx_w);
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Runs the decomposition; `progress` (if given) receives the number of
/// finished m values.
pub fn accumulate_with_progress(
    tables: &MomentTables,
    opts: AccumulateOptions,
    progress: Option<&AtomicU64>,
) -> Result<DecompositionReport> {
    if tables.cfg.is_diagonal_only() {
        return Ok(DecompositionReport::default());
    }
    let parts = chunks(tables.cfg.x);
    let threads = match opts.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(parts.len())
    .max(1);
    let results: Mutex<Vec<Option<Result<DecompositionReport>>>> = Mutex::new((0..parts.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= parts.len() {
                    break;
                }
                let range = parts[i].clone();
                let width = range.end() - range.start() + 1;
                let r = accumulate_range(tables, range, opts);
                if let Some(p) = progress {
                    p.fetch_add(width, Ordering::Relaxed);
                }
                results.lock().expect("no worker panicked")[i] = Some(r);
            });
        }
    });
    let mut total = DecompositionReport::default();
    for r in results.into_inner().expect("no worker panicked") {
        total.merge(&r.expect("every chunk was processed")?);
    }
    Ok(total)
}

pub fn accumulate(tables: &MomentTables, opts: AccumulateOptions) -> Result<DecompositionReport> {
    accumulate_with_progress(tables, opts, None)
}
