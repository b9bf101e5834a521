//! Sieved arithmetic tables: shifted divisor functions τ_{a,b}(n), the
//! divisor count, the Möbius function and per-n divisor lists.

use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default lower bound on the modulus of any shift combination that appears
/// as a pole distance in the closed forms.
pub const DEFAULT_MIN_SHIFT: f64 = 1e-6;

/// The four shifts (α, β, γ, δ): α, β enter the first Dirichlet polynomial,
/// γ, δ the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftQuadruple {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
}

impl ShiftQuadruple {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Self {
        Self { alpha, beta, gamma, delta }
    }

    pub fn real(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        let c = |x| Complex64::new(x, 0.0);
        Self::new(c(alpha), c(beta), c(gamma), c(delta))
    }

    pub fn as_array(&self) -> [Complex64; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    /// (α,β,γ,δ) → (γ,δ,α,β): the roles of the two polynomials exchanged.
    pub fn swapped_roles(&self) -> Self {
        Self::new(self.gamma, self.delta, self.alpha, self.beta)
    }

    /// (α,γ) ↔ (β,δ).
    pub fn interchanged_pairs(&self) -> Self {
        Self::new(self.beta, self.alpha, self.delta, self.gamma)
    }

    /// γ ↔ δ.
    pub fn swapped_second(&self) -> Self {
        Self::new(self.alpha, self.beta, self.delta, self.gamma)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.alpha.conj(), self.beta.conj(), self.gamma.conj(), self.delta.conj())
    }

    /// All 81 combinations ε₁α+ε₂β+ε₃γ+ε₄δ with εᵢ ∈ {−1,0,1}, including 0.
    pub fn eligible_set(&self) -> Vec<Complex64> {
        let s = self.as_array();
        let mut out = Vec::with_capacity(81);
        for code in 0..81u32 {
            let mut c = code;
            let mut acc = Complex64::new(0.0, 0.0);
            for x in s {
                let eps = (c % 3) as f64 - 1.0;
                c /= 3;
                acc += x * eps;
            }
            out.push(acc);
        }
        out
    }

    /// Distinct nonzero eligible values, one representative per ± pair.
    pub fn nonzero_eligible_pairs(&self, min_modulus: f64) -> Vec<Complex64> {
        let mut reps: Vec<Complex64> = Vec::new();
        for v in self.eligible_set() {
            if v.norm() < min_modulus {
                continue;
            }
            let dup = reps.iter().any(|r| (*r - v).norm() < min_modulus || (*r + v).norm() < min_modulus);
            if !dup {
                reps.push(v);
            }
        }
        reps
    }

    /// The combinations that occur as explicit denominators or as distances
    /// of ζ arguments to the pole in the one- and two-swap closed forms.
    pub fn required_combinations(&self) -> Vec<(&'static str, Complex64)> {
        let Self { alpha: a, beta: b, gamma: g, delta: d } = *self;
        vec![
            ("alpha+gamma", a + g),
            ("beta+delta", b + d),
            ("alpha+delta", a + d),
            ("beta+gamma", b + g),
            ("alpha-beta", a - b),
            ("gamma-delta", g - d),
            ("alpha-beta+gamma-delta", (a + g) - (b + d)),
            ("alpha-beta-gamma+delta", (a + d) - (b + g)),
        ]
    }

    /// Rejects shifts for which some closed form sits on (or within
    /// `min_shift` of) a pole.
    pub fn check_nondegenerate(&self, min_shift: f64) -> Result<()> {
        for (name, v) in self.required_combinations() {
            if !(v.norm() >= min_shift) {
                return Err(Error::DegenerateShift { name: name.to_string(), modulus: v.norm(), min: min_shift });
            }
        }
        Ok(())
    }
}

/// Guard used by the closed forms for single combinations.
pub fn guard(name: &str, v: Complex64, min_shift: f64) -> Result<Complex64> {
    if v.norm() < min_shift || !v.norm().is_finite() {
        return Err(Error::DegenerateShift { name: name.to_string(), modulus: v.norm(), min: min_shift });
    }
    Ok(v)
}

/// `n^{-a}` for n = 0..=limit (entry 0 is zero).
pub fn power_table(limit: usize, a: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); limit + 1];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = if n == 1 { Complex64::new(1.0, 0.0) } else { (-a * (n as f64).ln()).exp() };
    }
    out
}

/// Values of an arithmetic function on 1..=limit.
#[derive(Debug, Clone)]
pub struct ArithTable {
    limit: usize,
    values: Vec<Complex64>,
    shifts: (Complex64, Complex64),
}

impl ArithTable {
    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn shifts(&self) -> (Complex64, Complex64) {
        self.shifts
    }

    /// Values for n = 1..=limit.
    pub fn values(&self) -> &[Complex64] {
        &self.values[1..]
    }

    pub fn get(&self, n: usize) -> Option<Complex64> {
        (1..=self.limit).contains(&n).then(|| self.values[n])
    }
}

impl Index<usize> for ArithTable {
    type Output = Complex64;

    fn index(&self, n: usize) -> &Complex64 {
        assert!(n >= 1 && n <= self.limit, "index {n} outside 1..={}", self.limit);
        &self.values[n]
    }
}

fn check_limit(x: i64) -> Result<usize> {
    if x < 1 {
        return Err(Error::InvalidArgument(format!("table limit must be >= 1, got {x}")));
    }
    Ok(x as usize)
}

/// τ_{a,b}(n) = Σ_{de=n} d^{−a} e^{−b} for n ≤ X.
pub fn tau_table(x: i64, a: Complex64, b: Complex64) -> Result<ArithTable> {
    let limit = check_limit(x)?;
    let pa = power_table(limit, a);
    let pb = power_table(limit, b);
    let mut values = vec![Complex64::new(0.0, 0.0); limit + 1];
    for d in 1..=limit {
        let wd = pa[d];
        for e in 1..=limit / d {
            values[d * e] += wd * pb[e];
        }
    }
    Ok(ArithTable { limit, values, shifts: (a, b) })
}

/// Möbius μ(n) for n = 0..=X via a linear sieve (entry 0 is 0).
pub fn mobius_table(x: i64) -> Result<Vec<i8>> {
    let limit = check_limit(x)?;
    let mut mu = vec![0i8; limit + 1];
    let mut composite = vec![false; limit + 1];
    let mut primes: Vec<usize> = Vec::new();
    mu[1] = 1;
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > limit {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    Ok(mu)
}

/// Divisor count d(n) for n = 0..=X (entry 0 is 0).
pub fn divisor_count_table(x: i64) -> Result<Vec<u32>> {
    let limit = check_limit(x)?;
    let mut d = vec![0u32; limit + 1];
    for k in 1..=limit {
        for m in (k..=limit).step_by(k) {
            d[m] += 1;
        }
    }
    Ok(d)
}

/// Euler totient for n = 0..=X (entry 0 is 0).
pub fn totient_table(x: i64) -> Result<Vec<u64>> {
    let limit = check_limit(x)?;
    let mut phi: Vec<u64> = (0..=limit as u64).collect();
    for p in 2..=limit {
        if phi[p] == p as u64 {
            for m in (p..=limit).step_by(p) {
                phi[m] -= phi[m] / p as u64;
            }
        }
    }
    Ok(phi)
}

/// Sorted divisor lists for every n ≤ X, stored contiguously.
#[derive(Debug, Clone)]
pub struct DivisorLists {
    offsets: Vec<u32>,
    divisors: Vec<u32>,
}

impl DivisorLists {
    pub fn new(x: i64) -> Result<Self> {
        let limit = check_limit(x)?;
        if limit > u32::MAX as usize / 2 {
            return Err(Error::InvalidArgument(format!("divisor table limit {limit} too large")));
        }
        let counts = divisor_count_table(x)?;
        let mut offsets = Vec::with_capacity(limit + 2);
        offsets.push(0u32);
        let mut acc = 0u32;
        for c in counts.iter() {
            acc += *c;
            offsets.push(acc);
        }
        let mut fill: Vec<u32> = offsets[..limit + 1].to_vec();
        let mut divisors = vec![0u32; acc as usize];
        for k in 1..=limit {
            for m in (k..=limit).step_by(k) {
                divisors[fill[m] as usize] = k as u32;
                fill[m] += 1;
            }
        }
        Ok(Self { offsets, divisors })
    }

    pub fn limit(&self) -> usize {
        self.offsets.len() - 2
    }

    pub fn of(&self, n: usize) -> &[u32] {
        &self.divisors[self.offsets[n] as usize..self.offsets[n + 1] as usize]
    }

    pub fn total(&self) -> usize {
        self.divisors.len()
    }
}

/// max_n |τ_{a,b}(n) − τ_{b,a}(n)|, relative to max(1, |τ_{a,b}(n)|).
pub fn tau_symmetry_check(table_ab: &ArithTable, table_ba: &ArithTable) -> Result<f64> {
    if table_ab.limit() != table_ba.limit() {
        return Err(Error::InvalidArgument(format!(
            "table limits differ: {} vs {}",
            table_ab.limit(),
            table_ba.limit()
        )));
    }
    Ok(table_ab
        .values()
        .iter()
        .zip(table_ba.values())
        .map(|(x, y)| (x - y).norm() / x.norm().max(1.0))
        .fold(0.0, f64::max))
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tau_examples() {
        let t = tau_table(12, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(t[12], c(6.0, 0.0));
        let t = tau_table(5, c(0.3, -0.1), c(0.2, 0.7)).unwrap();
        assert_eq!(t[1], c(1.0, 0.0));
        let t = tau_table(2, c(0.1, 0.0), c(0.0, 0.0)).unwrap();
        // 2^{-0.1} + 1
        assert!((t[2].re - 1.933_032_991_536_807_4).abs() < 1e-12);
        assert!(matches!(tau_table(0, c(0.0, 0.0), c(0.0, 0.0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(tau_table(-3, c(0.0, 0.0), c(0.0, 0.0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tau_zero_shift_is_divisor_count() {
        let x = 5000;
        let t = tau_table(x, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        let d = divisor_count_table(x).unwrap();
        for n in 1..=x as usize {
            assert_eq!(t[n].re, d[n] as f64);
            assert_eq!(t[n].im, 0.0);
        }
    }

    #[test]
    fn tau_at_primes() {
        let x = 3000;
        let (a, b) = (c(0.13, 0.4), c(-0.2, 0.05));
        let t = tau_table(x, a, b).unwrap();
        let d = divisor_count_table(x).unwrap();
        for p in (2..=x as usize).filter(|&n| d[n] == 2) {
            let lp = (p as f64).ln();
            let expect = (-a * lp).exp() + (-b * lp).exp();
            assert!((t[p] - expect).norm() <= 1e-13 * expect.norm());
        }
    }

    #[test]
    fn tau_multiplicative() {
        let x = 20_000usize;
        let t = tau_table(x as i64, c(0.1, 0.3), c(0.25, -0.2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 200 {
            let m = rng.gen_range(2..150usize);
            let n = rng.gen_range(2..=x / m);
            if gcd(m as u64, n as u64) != 1 {
                continue;
            }
            let lhs = t[m * n];
            let rhs = t[m] * t[n];
            assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm(), "m={m} n={n}");
            checked += 1;
        }
    }

    #[test]
    fn symmetry_check() {
        let ab = tau_table(100, c(0.1, 0.0), c(0.2, 0.0)).unwrap();
        let ba = tau_table(100, c(0.2, 0.0), c(0.1, 0.0)).unwrap();
        assert!(tau_symmetry_check(&ab, &ba).unwrap() <= 1e-12);
        let z = tau_table(10, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(tau_symmetry_check(&z, &z).unwrap(), 0.0);
        let ab = tau_table(1000, c(0.0, 0.05), c(0.0, -0.05)).unwrap();
        let ba = tau_table(1000, c(0.0, -0.05), c(0.0, 0.05)).unwrap();
        assert!(tau_symmetry_check(&ab, &ba).unwrap() <= 1e-12);
        let other = tau_table(99, c(0.1, 0.0), c(0.2, 0.0)).unwrap();
        assert!(matches!(tau_symmetry_check(&ab, &other), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mobius_values() {
        let mu = mobius_table(100).unwrap();
        assert_eq!(mu[1], 1);
        assert_eq!(mu[12], 0);
        assert_eq!(mu[30], -1);
        assert_eq!(mu[97], -1);
        assert_eq!(mu[6], 1);
        assert!(mobius_table(0).is_err());
    }

    #[test]
    fn mobius_floor_identity() {
        for x in [1i64, 2, 10, 997, 10_000] {
            let mu = mobius_table(x).unwrap();
            let s: i64 = (1..=x).map(|n| mu[n as usize] as i64 * (x / n)).sum();
            assert_eq!(s, 1, "X = {x}");
        }
    }

    #[test]
    fn divisor_lists_match_counts() {
        let dl = DivisorLists::new(360).unwrap();
        assert_eq!(dl.of(12), &[1, 2, 3, 4, 6, 12]);
        assert_eq!(dl.of(1), &[1]);
        let d = divisor_count_table(360).unwrap();
        for n in 1..=360 {
            assert_eq!(dl.of(n).len() as u32, d[n]);
            assert!(dl.of(n).iter().all(|k| n % *k as usize == 0));
        }
        assert_eq!(dl.limit(), 360);
    }

    #[test]
    fn eligible_set_closed_under_negation() {
        let s = ShiftQuadruple::new(c(0.05, 0.1), c(0.11, 0.0), c(0.17, -0.3), c(0.23, 0.0));
        let e = s.eligible_set();
        assert_eq!(e.len(), 81);
        for v in &e {
            assert!(e.iter().any(|w| (*w + *v).norm() < 1e-15));
        }
        assert!(e.iter().any(|v| v.norm() == 0.0));
        let reps = s.nonzero_eligible_pairs(1e-12);
        assert_eq!(reps.len(), 40);
    }

    #[test]
    fn degenerate_shifts_rejected() {
        let good = ShiftQuadruple::real(0.05, 0.11, 0.17, 0.29);
        assert!(good.check_nondegenerate(DEFAULT_MIN_SHIFT).is_ok());
        // an arithmetic progression makes α+δ = β+γ
        let progression = ShiftQuadruple::real(0.05, 0.11, 0.17, 0.23);
        match progression.check_nondegenerate(DEFAULT_MIN_SHIFT) {
            Err(Error::DegenerateShift { name, .. }) => assert_eq!(name, "alpha-beta-gamma+delta"),
            other => panic!("expected degenerate shift, got {other:?}"),
        }
        let zero = ShiftQuadruple::real(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(zero.check_nondegenerate(1e-6), Err(Error::DegenerateShift { .. })));
        let coalesced = ShiftQuadruple::real(0.1, 0.1, 0.2, 0.3);
        assert!(matches!(coalesced.check_nondegenerate(1e-6), Err(Error::DegenerateShift { .. })));
    }
}
