//! The two smooth weights.
//!
//! [`BumpWeight`] is the compactly supported ψ with Fourier transform
//! ψ̂(v) = ∫ ψ(u) e(uv) du, e(x) = exp(2πix). [`MellinWeight`] is the smoothed
//! cutoff φ, defined through its Mellin transform
//! φ̃(s) = s⁻¹ exp(s²/A²) Π_ξ (1 − s²/ξ²), which has residue 1 at s = 0 and
//! vanishes at ±ξ for every listed ξ.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::special;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpParams {
    pub t_lo: f64,
    pub t_hi: f64,
    /// ψ(t) = exp(−k / ((t − t_lo)(t_hi − t))) on the support.
    pub sharpness: f64,
}

impl Default for BumpParams {
    fn default() -> Self {
        Self { t_lo: 1.0, t_hi: 2.0, sharpness: 1.0 }
    }
}

#[derive(Debug, Clone)]
struct HatCache {
    step: f64,
    v_max: f64,
    values: Vec<Complex64>,
}

/// ψ with a cached grid of ψ̂ samples for bulk evaluation.
#[derive(Debug, Clone)]
pub struct BumpWeight {
    params: BumpParams,
    cache: Option<HatCache>,
}

impl Default for BumpWeight {
    fn default() -> Self {
        Self::new(BumpParams::default()).expect("default bump parameters are valid")
    }
}

impl BumpWeight {
    pub fn new(params: BumpParams) -> Result<Self> {
        if !(params.t_lo > 0.0 && params.t_hi > params.t_lo && params.sharpness > 0.0) {
            return Err(Error::InvalidArgument(format!("bad bump parameters {params:?}")));
        }
        Ok(Self { params, cache: None })
    }

    /// Eagerly tabulates ψ̂ on `[0, v_max]` with the given spacing.
    pub fn with_cache(mut self, v_max: f64, step: f64) -> Result<Self> {
        if !(v_max > 0.0 && step > 0.0 && v_max / step < 1e8) {
            return Err(Error::InvalidArgument(format!("bad cache grid v_max={v_max} step={step}")));
        }
        // extra nodes so that every point below v_max has a full stencil
        let n = (v_max / step).ceil() as usize + 4;
        let mut values = Vec::with_capacity(n);
        for k in 0..n {
            values.push(self.psi_hat_direct(k as f64 * step)?);
        }
        self.cache = Some(HatCache { step, v_max, values });
        Ok(self)
    }

    pub fn params(&self) -> BumpParams {
        self.params
    }

    pub fn support(&self) -> (f64, f64) {
        (self.params.t_lo, self.params.t_hi)
    }

    pub fn cached_range(&self) -> Option<f64> {
        self.cache.as_ref().map(|c| c.v_max)
    }

    pub fn psi(&self, t: f64) -> f64 {
        let BumpParams { t_lo, t_hi, sharpness } = self.params;
        if t <= t_lo || t >= t_hi {
            return 0.0;
        }
        (-sharpness / ((t - t_lo) * (t_hi - t))).exp()
    }

    /// ψ̂(v) by adaptive quadrature of the defining integral.
    pub fn psi_hat_direct(&self, v: f64) -> Result<Complex64> {
        let (lo, hi) = self.support();
        let pieces = 2 + (v.abs() * (hi - lo) * 2.0).ceil() as usize;
        let r = quad::integrate(
            |u| Complex64::from_polar(self.psi(u), 2.0 * PI * u * v),
            lo,
            hi,
            QuadOptions::abs(1e-15).pieces(pieces),
        )?;
        Ok(r.value)
    }

    /// ψ̂(v): cubic interpolation inside the cached range, direct quadrature
    /// outside it.
    pub fn psi_hat(&self, v: f64) -> Result<Complex64> {
        match self.interpolate(v) {
            Some(z) => Ok(z),
            None => self.psi_hat_direct(v),
        }
    }

    fn interpolate(&self, v: f64) -> Option<Complex64> {
        let cache = self.cache.as_ref()?;
        let a = v.abs();
        if a > cache.v_max {
            return None;
        }
        let x = a / cache.step;
        let i = x.floor() as usize;
        let f = x - i as f64;
        // six-point Lagrange stencil on grid points i−2 ..= i+3; negative
        // grid points mirror positive ones through conjugation
        let node = |k: isize| {
            let v = &cache.values[k.unsigned_abs()];
            if k < 0 {
                v.conj()
            } else {
                *v
            }
        };
        let mut z = Complex64::new(0.0, 0.0);
        for j in -2isize..=3 {
            let mut w = 1.0;
            for m in -2isize..=3 {
                if m != j {
                    w *= (f - m as f64) / (j - m) as f64;
                }
            }
            z += node(i as isize + j) * w;
        }
        // ψ real ⇒ ψ̂(−v) = conj ψ̂(v)
        Some(if v < 0.0 { z.conj() } else { z })
    }

    /// ∫ ψ(t) t^{−s} dt over the support.
    pub fn mellin(&self, s: Complex64) -> Result<Complex64> {
        let (lo, hi) = self.support();
        Ok(quad::integrate(|t| self.psi(t) * (-s * t.ln()).exp(), lo, hi, QuadOptions::abs(1e-15).pieces(4))?.value)
    }

    /// Smallest v beyond which |ψ̂| stays below `tol` on a probe grid.
    pub fn hat_decay_point(&self, tol: f64) -> Result<f64> {
        let mut last_big = 0.0;
        let mut v = 0.0;
        while v < 2000.0 {
            if self.psi_hat_direct(v)?.norm() > tol {
                last_big = v;
            }
            if v - last_big > 20.0 {
                break;
            }
            v += 0.25;
        }
        Ok(last_big + 0.25)
    }
}

/// Which power of v multiplies 2ℜψ̂(v) in the χ–Mellin identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MellinConvention {
    /// ∫ 2ℜψ̂(v) v^s dv, the form written next to the semi-diagonal contour shift.
    AsPrinted,
    /// ∫ 2ℜψ̂(v) v^{s−1} dv, the form used in the type-II (v₁, v₂) integrals.
    Shifted,
}

/// Both sides of ∫₀^∞ 2ℜψ̂(v) v^{p} dv = χ(1−s) ∫ ψ(t) t^{−s} dt, each by its own
/// quadrature; `p = s` or `s − 1` according to `convention`.
pub fn chi_mellin_identity_check(
    s: Complex64,
    psi: &BumpWeight,
    convention: MellinConvention,
) -> Result<(Complex64, Complex64)> {
    if !(s.re > 0.0 && s.re < 1.0) {
        return Err(Error::InvalidArgument(format!("chi-Mellin check needs 0 < Re s < 1, got {s}")));
    }
    let exponent = match convention {
        MellinConvention::AsPrinted => s,
        MellinConvention::Shifted => s - 1.0,
    };
    let cos_hat = |v: f64| -> Result<f64> { Ok(2.0 * psi.psi_hat_direct(v)?.re) };

    // [0, 1] after v = u^p with p·(Re exponent + 1) = 1 removes the endpoint singularity.
    let p = 1.0 / (exponent.re + 1.0);
    let mut failure = None;
    let head = quad::integrate(
        |u| {
            if u == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let v = u.powf(p);
            let w = match cos_hat(v) {
                Ok(w) => w,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            // v^{exponent} dv = p u^{p(exponent+1) − 1} du
            p * w * ((exponent + 1.0) * p * u.ln() - u.ln()).exp()
        },
        0.0,
        1.0,
        QuadOptions::abs(1e-10).pieces(4),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let v_end = psi.hat_decay_point(1e-15)?.max(2.0);
    let mut failure = None;
    let tail = quad::integrate(
        |v| {
            let w = match cos_hat(v) {
                Ok(w) => w,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            w * (exponent * v.ln()).exp()
        },
        1.0,
        v_end,
        QuadOptions::abs(1e-10).pieces((v_end * 3.0) as usize),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let lhs = head.value + tail.value;
    let rhs = special::chi(1.0 - s)? * psi.mellin(s)?;
    Ok((lhs, rhs))
}

/// Default Gaussian scale A.
pub const DEFAULT_MELLIN_SCALE: f64 = 2.0;

/// φ defined through φ̃(s) = s⁻¹ exp(s²/A²) Π_ξ (1 − s²/ξ²).
#[derive(Debug, Clone)]
pub struct MellinWeight {
    scale: f64,
    zeros: Vec<Complex64>,
    height: f64,
    nodes: Vec<f64>,
    node_values: Vec<Complex64>,
    step: f64,
}

impl MellinWeight {
    /// `zeros` lists one representative per ± pair; conjugates are added so
    /// that φ is real.
    pub fn new(scale: f64, zeros: &[Complex64]) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("Mellin scale must be positive, got {scale}")));
        }
        let mut set: Vec<Complex64> = Vec::new();
        for z in zeros {
            if z.norm() < 1e-12 {
                return Err(Error::InvalidArgument("zero set may not contain 0".into()));
            }
            for cand in [*z, z.conj()] {
                if !set.iter().any(|w| (*w - cand).norm() < 1e-14 || (*w + cand).norm() < 1e-14) {
                    set.push(cand);
                }
            }
        }
        let height = 30f64.max(10.0 * scale);
        let nodes = quad::trapezoid_nodes(height, 0.02);
        let step = nodes[1] - nodes[0];
        let mut w = Self { scale, zeros: set, height, nodes, node_values: Vec::new(), step };
        w.node_values = w.nodes.iter().map(|t| w.phi_tilde_unchecked(Complex64::new(1.0, *t))).collect();
        Ok(w)
    }

    /// Zeros at every nonzero eligible combination of the shifts.
    pub fn for_eligible(scale: f64, shifts: &crate::shift_arith::ShiftQuadruple) -> Result<Self> {
        Self::new(scale, &shifts.nonzero_eligible_pairs(1e-12))
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn contour_height(&self) -> f64 {
        self.height
    }

    fn phi_tilde_unchecked(&self, s: Complex64) -> Complex64 {
        let s2 = s * s;
        let mut v = (s2 / (self.scale * self.scale)).exp() / s;
        for z in &self.zeros {
            v *= 1.0 - s2 / (z * z);
        }
        v
    }

    pub fn phi_tilde(&self, s: Complex64) -> Result<Complex64> {
        if s.norm() < special::POLE_EPS {
            return Err(Error::pole("phi_tilde", s));
        }
        Ok(self.phi_tilde_unchecked(s))
    }

    /// φ(y) as a complex number; the imaginary part is quadrature residue.
    pub fn phi_complex(&self, y: f64) -> Result<Complex64> {
        if !(y > 0.0) {
            return Err(Error::InvalidArgument(format!("phi needs y > 0, got {y}")));
        }
        let ly = y.ln();
        // y^{−1−it} = y^{-1} e^{−it ln y}; rotate along the uniform nodes
        let mut rot = Complex64::from_polar(1.0 / y, -self.nodes[0] * ly);
        let step_rot = Complex64::from_polar(1.0, -self.step * ly);
        let mut acc = Complex64::new(0.0, 0.0);
        let last = self.nodes.len() - 1;
        for (k, fv) in self.node_values.iter().enumerate() {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            acc += fv * rot * w;
            rot *= step_rot;
        }
        Ok(acc * (self.step / (2.0 * PI)))
    }

    pub fn phi(&self, y: f64) -> Result<f64> {
        Ok(self.phi_complex(y)?.re)
    }

    /// y beyond which |φ(y)| ≤ tol, from |φ(y)| ≤ y^{−c} (1/2π)∫|φ̃(c+it)| dt.
    pub fn support_bound(&self, tol: f64) -> Result<f64> {
        let mut best = f64::INFINITY;
        for c in 1..=24 {
            let c = c as f64;
            let r = quad::integrate(
                |t| Complex64::new(self.phi_tilde_unchecked(Complex64::new(c, t)).norm(), 0.0),
                -self.height - c,
                self.height + c,
                QuadOptions { abs_tol: 0.0, rel_tol: 1e-6, ..QuadOptions::default() }.pieces(64),
            )?;
            let bound = r.value.re / (2.0 * PI);
            let y = (bound / tol).powf(1.0 / c);
            if y.is_finite() {
                best = best.min(y);
            }
        }
        Ok(best.max(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn psi_values() {
        let w = BumpWeight::default();
        assert_eq!(w.psi(0.5), 0.0);
        assert_eq!(w.psi(2.0), 0.0);
        assert_eq!(w.psi(1.0), 0.0);
        assert!((w.psi(1.5) - (-4f64).exp()).abs() < 1e-16);
        assert!((w.psi(1.5) - 0.018_315_638_888_734_18).abs() < 1e-15);
    }

    #[test]
    fn psi_hat_basic() {
        let w = BumpWeight::default();
        let h0 = w.psi_hat(0.0).unwrap();
        assert!(h0.re > 0.0 && h0.im.abs() < 1e-16);
        let a = w.psi_hat(3.7).unwrap();
        let b = w.psi_hat(-3.7).unwrap();
        assert!((a.conj() - b).norm() <= 1e-13);
    }

    /// Composite Simpson on 4·10⁵ panels as an independent oracle.
    fn simpson_hat(w: &BumpWeight, v: f64) -> Complex64 {
        let n = 400_000;
        let h = 1.0 / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=n {
            let u = 1.0 + k as f64 * h;
            let wt = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += Complex64::from_polar(w.psi(u), 2.0 * PI * u * v) * wt;
        }
        acc * (h / 3.0)
    }

    #[test]
    fn psi_hat_against_independent_quadrature() {
        let w = BumpWeight::default();
        for v in [0.0, 0.37, 10.0, 25.5] {
            let a = w.psi_hat_direct(v).unwrap();
            let b = simpson_hat(&w, v);
            assert!((a - b).norm() <= 1e-12, "v = {v}: {a} vs {b}");
        }
    }

    #[test]
    fn cache_interpolation_accuracy() {
        let w = BumpWeight::default().with_cache(8.0, 1e-3).unwrap();
        for v in [0.0, 0.0004, 1.23456, -2.5001, 7.9999, -0.7] {
            let a = w.psi_hat(v).unwrap();
            let b = w.psi_hat_direct(v).unwrap();
            assert!((a - b).norm() <= 1e-12, "v = {v}: {:e}", (a - b).norm());
        }
        // outside the grid falls back to quadrature
        assert_eq!(w.psi_hat(9.5).unwrap(), w.psi_hat_direct(9.5).unwrap());
    }

    #[test]
    fn psi_hat_fourth_power_envelope() {
        let w = BumpWeight::default();
        let fit: f64 = (0..=80)
            .map(|k| 10.0 + 0.25 * k as f64)
            .map(|v| w.psi_hat_direct(v).unwrap().norm() * v.powi(4))
            .fold(0.0, f64::max);
        for k in 0..=280 {
            let v = 30.0 + 0.25 * k as f64;
            assert!(w.psi_hat_direct(v).unwrap().norm() * v.powi(4) <= fit);
        }
    }

    #[test]
    fn parseval() {
        let w = BumpWeight::default();
        let lhs = quad::integrate_real(|t| w.psi(t).powi(2), 1.0, 2.0, QuadOptions::abs(1e-16).pieces(4)).unwrap();
        let v_end = w.hat_decay_point(1e-14).unwrap();
        let rhs = 2.0
            * quad::integrate_real(
                |v| w.psi_hat_direct(v).unwrap().norm_sqr(),
                0.0,
                v_end,
                QuadOptions::abs(1e-14).pieces(64),
            )
            .unwrap();
        assert!((lhs - rhs).abs() <= 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn chi_mellin_shifted_convention_holds() {
        let w = BumpWeight::default();
        for s in [c(0.3, 0.0), c(0.7, 0.0), c(0.5, 0.5)] {
            let (l, r) = chi_mellin_identity_check(s, &w, MellinConvention::Shifted).unwrap();
            assert!((l - r).norm() <= 1e-6, "s = {s}: {l} vs {r}");
        }
    }

    #[test]
    fn chi_mellin_window() {
        let w = BumpWeight::default();
        for s in [c(0.0, 0.0), c(1.0, 0.0), c(-0.2, 1.0)] {
            assert!(matches!(
                chi_mellin_identity_check(s, &w, MellinConvention::AsPrinted),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn phi_tilde_residue_and_zeros() {
        let zeros = [c(0.2, 0.0), c(0.35, 0.1), c(-0.6, 0.0)];
        let w = MellinWeight::new(2.0, &zeros).unwrap();
        for eps in [1e-3, 1e-5] {
            let s = c(eps, 0.0);
            let r = s * w.phi_tilde(s).unwrap();
            assert!((r - 1.0).norm() < 10.0 * eps);
        }
        for z in zeros {
            assert!(w.phi_tilde(z).unwrap().norm() <= 1e-14);
            assert!(w.phi_tilde(-z).unwrap().norm() <= 1e-14);
        }
        assert!(matches!(w.phi_tilde(c(0.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn phi_tilde_vertical_decay() {
        let w = MellinWeight::new(2.0, &[c(0.2, 0.0), c(0.3, 0.0)]).unwrap();
        for t in [20.0, 25.0, 40.0, -20.0] {
            assert!(w.phi_tilde(c(1.0, t)).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn phi_is_a_smoothed_cutoff() {
        let w = MellinWeight::new(2.0, &[]).unwrap();
        assert!((w.phi(0.01).unwrap() - 1.0).abs() <= 1e-3);
        assert!(w.phi(100.0).unwrap().abs() <= 1e-6);
        let (a, b, d) = (w.phi(0.5).unwrap(), w.phi(1.0).unwrap(), w.phi(2.0).unwrap());
        assert!(a > b && b > d);
        // without zeros φ(y) = erfc(A ln y / 2) / 2, so φ(1) = 1/2
        assert!((b - 0.5).abs() < 1e-12);
        assert!(matches!(w.phi(0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(w.phi(-1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn phi_with_zeros_matches_direct_contour_quadrature() {
        let w = MellinWeight::new(2.0, &[c(0.2, 0.0), c(0.3, 0.05)]).unwrap();
        for y in [0.05, 0.8, 1.0, 3.0, 40.0] {
            let fast = w.phi_complex(y).unwrap();
            let slow = quad::vertical_line(
                |s| w.phi_tilde(s).unwrap() * (-s * y.ln()).exp(),
                1.0,
                w.contour_height(),
                // the integrand reaches ~1e4 near |t| ≈ 5, where summed
                // Kronrod error estimates floor near 1e-9 from roundoff;
                // 4000 fixed 15-point panels are exact far beyond that
                QuadOptions { abs_tol: 1e-3, rel_tol: 0.0, ..QuadOptions::default() }.pieces(4000),
            )
            .unwrap()
            .value;
            // φ reaches several hundred for small y, and cancellation in an
            // integrand of size ~1e4 leaves both routes near 1e-10 relative
            let scale = slow.norm().max(1.0);
            assert!((fast - slow).norm() < 2e-9 * scale, "y = {y}: {fast} vs {slow}");
            assert!(fast.im.abs() <= 2e-9 * scale);
        }
    }

    #[test]
    fn phi_support_bound_is_conservative() {
        let w = MellinWeight::new(2.0, &[c(0.2, 0.0), c(0.3, 0.0)]).unwrap();
        let y = w.support_bound(1e-12).unwrap();
        assert!(y > 1.0 && y < 1e6);
        for k in 0..20 {
            let yy = y * (1.0 + 0.5 * k as f64);
            assert!(w.phi(yy).unwrap().abs() <= 1e-12);
        }
    }
}
