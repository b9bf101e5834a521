//! Riemann zeta, Gamma and the functional-equation factor χ on complex
//! arguments.
//!
//! ζ is evaluated by Euler–Maclaurin summation with Bernoulli corrections
//! through B₂₄; Γ by the Lanczos (g = 7, n = 9) approximation with the
//! reflection formula on the left half-plane; χ(s) = 2^s π^{s−1} sin(πs/2) Γ(1−s)
//! so that ζ(s) = χ(s) ζ(1−s).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute distance below which an argument is treated as sitting on a pole.
pub const POLE_EPS: f64 = 1e-14;

/// Bernoulli correction order used by [`zeta`].
pub const EM_ORDER: usize = 12;

// B_{2k} / (2k)! for k = 1..=12.
const BERNOULLI_OVER_FACTORIAL: [f64; EM_ORDER] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
    854513.0 / 138.0 / 1124000727777607680000.0,
    -236364091.0 / 2730.0 / 620448401733239439360000.0,
];

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Number of explicit terms summed before the Euler–Maclaurin tail.
pub fn em_cutoff(s: Complex64) -> usize {
    30usize.max((10.0 + s.im.abs()).ceil() as usize)
}

/// Riemann zeta function.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    if (s - 1.0).norm() < POLE_EPS {
        return Err(Error::pole("zeta", s));
    }
    if s.re < 0.0 {
        // Left of the strip the explicit sum cancels heavily; reflect.
        return Ok(chi(s)? * zeta_em(1.0 - s, em_cutoff(s)));
    }
    Ok(zeta_em(s, em_cutoff(s)))
}

/// Real-argument convenience wrapper.
pub fn zeta_re(s: f64) -> Result<f64> {
    zeta(Complex64::new(s, 0.0)).map(|z| z.re)
}

/// Euler–Maclaurin evaluation with an explicit cutoff `n`; no pole check.
pub(crate) fn zeta_em(s: Complex64, n: usize) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..n {
        sum += (-s * (k as f64).ln()).exp();
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp(); // N^{-s}
    sum += n_pow * nf / (s - 1.0) + n_pow * 0.5;

    // term_k = B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-s-2k+1}
    let mut rising = s;
    let mut pow = n_pow / nf;
    for (k, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        sum += rising * pow * *coef;
        let j = (2 * k + 1) as f64;
        rising *= (s + j) * (s + j + 1.0);
        pow /= nf * nf;
    }
    sum
}

fn near_nonpositive_integer(s: Complex64) -> bool {
    s.re <= 0.5 && (s - s.re.round()).norm() < POLE_EPS
}

/// Gamma function.
pub fn gamma(s: Complex64) -> Result<Complex64> {
    if near_nonpositive_integer(s) {
        return Err(Error::pole("gamma", s));
    }
    Ok(gamma_unchecked(s))
}

fn gamma_unchecked(s: Complex64) -> Complex64 {
    if s.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi / ((s * PI).sin() * gamma_unchecked(1.0 - s));
    }
    let z = s - 1.0;
    let mut x = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * ((z + 0.5) * t.ln() - t).exp() * x
}

/// Functional-equation factor: ζ(s) = χ(s) ζ(1−s).
pub fn chi(s: Complex64) -> Result<Complex64> {
    if s.re > 0.5 {
        // χ(s)χ(1−s) = 1; the left form has no cancelling Γ poles.
        if s.re.round() as i64 % 2 == 1 && (s - s.re.round()).norm() < POLE_EPS {
            return Err(Error::pole("chi", s));
        }
        return Ok(1.0 / chi_left(1.0 - s));
    }
    Ok(chi_left(s))
}

fn chi_left(s: Complex64) -> Complex64 {
    let two_pow = (s * 2f64.ln()).exp();
    let pi_pow = ((s - 1.0) * PI.ln()).exp();
    two_pow * pi_pow * (s * (PI / 2.0)).sin() * gamma_unchecked(1.0 - s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Stirling series for ln Γ at large argument, pulled back with the
    /// recurrence Γ(z) = Γ(z+n) / (z(z+1)…(z+n−1)).
    fn gamma_oracle(z: Complex64) -> Complex64 {
        let shift = 30;
        let mut prod = Complex64::new(1.0, 0.0);
        for k in 0..shift {
            prod *= z + k as f64;
        }
        let w = z + shift as f64;
        let w2 = w * w;
        let series = 1.0 / (12.0 * w) - 1.0 / (360.0 * w * w2) + 1.0 / (1260.0 * w * w2 * w2)
            - 1.0 / (1680.0 * w * w2 * w2 * w2)
            + 1.0 / (1188.0 * w * w2 * w2 * w2 * w2);
        let ln_g = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series;
        ln_g.exp() / prod
    }

    /// Alternating (Dirichlet eta) series with Borwein's acceleration:
    /// ζ(s) = η(s) / (1 − 2^{1−s}), independent of the Euler–Maclaurin route.
    fn zeta_borwein(s: Complex64) -> Complex64 {
        let n = 60usize;
        // d_k = n Σ_{i=0}^{k} (n+i−1)! 4^i / ((n−i)! (2i)!)
        let mut d = vec![0f64; n + 1];
        let mut term = 1.0 / n as f64; // i = 0 term of the sum divided by n
        let mut acc = term;
        d[0] = n as f64 * acc;
        for i in 1..=n {
            let fi = i as f64;
            let fnn = n as f64;
            term *= (fnn + fi - 1.0) * (fnn - fi + 1.0) * 4.0 / ((2.0 * fi - 1.0) * (2.0 * fi));
            acc += term;
            d[i] = fnn * acc;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * (d[k] - d[n]) * (-s * ((k + 1) as f64).ln()).exp();
        }
        let eta = -sum / d[n];
        eta / (1.0 - (Complex64::new(2f64.ln(), 0.0) * (1.0 - s)).exp())
    }

    #[test]
    fn classical_values() {
        let z2 = zeta(c(2.0, 0.0)).unwrap();
        assert!((z2.re - PI * PI / 6.0).abs() < 1e-12);
        assert!(z2.im.abs() < 1e-15);
        let z0 = zeta(c(0.0, 0.0)).unwrap();
        assert!((z0.re + 0.5).abs() < 1e-12);
        assert!((zeta_re(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-12);
        assert!((zeta_re(-1.0).unwrap() + 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_against_doubled_cutoff_oracle() {
        for s in [c(1.2, 0.0), c(0.5, 14.134725), c(0.0, 3.0), c(3.5, -40.0), c(0.1, 49.0)] {
            let direct = zeta(s).unwrap();
            let oracle = zeta_em(s, 2 * em_cutoff(s) + 17);
            assert!((direct - oracle).norm() <= 1e-12 * oracle.norm().max(1.0), "s = {s}: {direct} vs {oracle}");
        }
    }

    #[test]
    fn zeta_against_eta_series() {
        for s in [c(1.2, 0.0), c(0.3, 0.2), c(2.0, 5.0), c(0.7, -12.0), c(-0.5, 1.0)] {
            let a = zeta(s).unwrap();
            let b = zeta_borwein(s);
            assert!((a - b).norm() < 1e-11 * b.norm().max(1.0), "s = {s}: {a} vs {b}");
        }
    }

    #[test]
    fn zeta_pole() {
        assert!(matches!(zeta(c(1.0, 0.0)), Err(Error::Pole { .. })));
        assert!(zeta(c(1.0 + 1e-6, 0.0)).is_ok());
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(c(1.0, 0.0)).unwrap() - 1.0).norm() < 1e-13);
        assert!((gamma(c(0.5, 0.0)).unwrap().re - PI.sqrt()).abs() < 1e-13);
        assert!((gamma(c(5.0, 0.0)).unwrap().re - 24.0).abs() < 1e-11);
        for z in [c(2.0, 3.0), c(0.7, -4.5), c(-2.3, 1.1), c(10.5, 20.0)] {
            let g = gamma(z).unwrap();
            let o = gamma_oracle(z);
            assert!((g - o).norm() <= 1e-12 * o.norm(), "z = {z}: {g} vs {o}");
        }
        assert!(matches!(gamma(c(0.0, 0.0)), Err(Error::Pole { .. })));
        assert!(matches!(gamma(c(-3.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn chi_values() {
        assert!((chi(c(0.5, 0.0)).unwrap() - 1.0).norm() < 1e-12);
        let s = c(0.3, 0.2);
        let inv = chi(s).unwrap() * chi(1.0 - s).unwrap();
        assert!((inv - 1.0).norm() < 1e-12);
        let resid = zeta(c(0.3, 0.0)).unwrap() - chi(c(0.3, 0.0)).unwrap() * zeta(c(0.7, 0.0)).unwrap();
        assert!(resid.norm() <= 1e-10);
        assert!(matches!(chi(c(1.0, 0.0)), Err(Error::Pole { .. })));
        assert!(matches!(chi(c(3.0, 0.0)), Err(Error::Pole { .. })));
        // ζ(2) = χ(2) ζ(−1)
        let two = chi(c(2.0, 0.0)).unwrap() * zeta(c(-1.0, 0.0)).unwrap();
        assert!((two.re - PI * PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn functional_equation_grid() {
        let mut worst = 0f64;
        for i in 0..10 {
            for j in 0..10 {
                let s = c(-1.0 + 3.0 * (i as f64 + 0.37) / 10.0, -30.0 + 60.0 * (j as f64 + 0.5) / 10.0);
                let r = zeta(s).unwrap() - chi(s).unwrap() * zeta(1.0 - s).unwrap();
                worst = worst.max(r.norm());
            }
        }
        assert!(worst <= 1e-10, "worst residual {worst:e}");
    }

    #[test]
    fn conjugate_symmetry() {
        for s in [c(0.5, 7.0), c(2.5, -3.0), c(-0.9, 25.0)] {
            let a = zeta(s.conj()).unwrap();
            let b = zeta(s).unwrap().conj();
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
    }

    #[test]
    fn laurent_expansion_at_one() {
        let euler_gamma = 0.577_215_664_901_532_9;
        let mut prev = f64::INFINITY;
        for d in [1e-2, 1e-4, 1e-6] {
            let z = zeta(c(1.0 + d, 0.0)).unwrap();
            let dev = (d * z.re - 1.0).abs();
            assert!(dev < prev);
            // (s−1)ζ(s) = 1 + γ(s−1) + O((s−1)²)
            assert!((dev - euler_gamma * d).abs() < 0.1 * d);
            prev = dev;
        }
    }
}
