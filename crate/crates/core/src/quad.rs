//! Adaptive Gauss–Kronrod quadrature (7/15-point pairs) for complex-valued
//! integrands, plus helpers for vertical-line contour integrals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Initial uniform split of `[a, b]`; helps oscillatory integrands.
    pub initial_pieces: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 0.0, max_intervals: 20_000, initial_pieces: 1 }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    pub fn pieces(mut self, n: usize) -> Self {
        self.initial_pieces = n.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = half * XGK[j];
        let pair = f(center - x) + f(center + x);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).norm())
}

/// Globally adaptive integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, evals: 0 });
    }
    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let pieces = opts.initial_pieces;
    let width = (b - a) / pieces as f64;
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        let (value, error) = kronrod(&mut f, lo, hi);
        total += value;
        err += error;
        heap.push(Segment { a: lo, b: hi, value, error });
    }
    let mut evals = 15 * pieces;
    loop {
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            // the running sums drift; confirm against a fresh total
            err = heap.iter().map(|s| s.error).sum();
            if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
                break;
            }
        }
        if heap.len() % 512 == 0 {
            err = heap.iter().map(|s| s.error).sum();
            total = heap.iter().fold(Complex64::new(0.0, 0.0), |acc, s| acc + s.value);
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] did not converge: error estimate {err:e} after {evals} evaluations"
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Numeric(format!("quadrature on [{a}, {b}] hit interval resolution near {mid}")));
        }
        let (v1, e1) = kronrod(&mut f, worst.a, mid);
        let (v2, e2) = kronrod(&mut f, mid, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the incremental updates.
    let value = heap.iter().fold(Complex64::new(0.0, 0.0), |acc, s| acc + s.value);
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error, evals })
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, opts).map(|r| r.value.re)
}

/// `(1/2πi) ∫_{c−iH}^{c+iH} f(s) ds`, computed as `(1/2π) ∫_{−H}^{H} f(c+it) dt`.
pub fn vertical_line<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    c: f64,
    height: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    let r = integrate(|t| f(Complex64::new(c, t)), -height, height, opts)?;
    Ok(QuadResult {
        value: r.value / (2.0 * std::f64::consts::PI),
        error: r.error / (2.0 * std::f64::consts::PI),
        evals: r.evals,
    })
}

/// Uniform trapezoid nodes `t_k = −H + k h` covering `[−H, H]`.
pub fn trapezoid_nodes(height: f64, step: f64) -> Vec<f64> {
    let n = (2.0 * height / step).ceil() as usize;
    let h = 2.0 * height / n as f64;
    (0..=n).map(|k| -height + h * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| Complex64::new(x * x * x, 2.0 * x), 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - Complex64::new(4.0, 4.0)).norm() < 1e-14);
    }

    #[test]
    fn oscillatory_exponential() {
        // ∫_0^1 e^{i 40 x} dx = (e^{40i} − 1)/(40i)
        let r = integrate(|x| Complex64::new(0.0, 40.0 * x).exp(), 0.0, 1.0, QuadOptions::abs(1e-13)).unwrap();
        let exact = (Complex64::new(0.0, 40.0).exp() - 1.0) / Complex64::new(0.0, 40.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate_real(|x| x.sqrt().recip(), 0.0, 1.0, QuadOptions::abs(1e-10)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn vertical_line_gaussian() {
        // (1/2πi) ∫_{(0)} e^{s²} ds = (1/2π) ∫ e^{−t²} dt = 1/(2√π)
        let r = vertical_line(|s| (s * s).exp(), 0.0, 12.0, QuadOptions::abs(1e-14)).unwrap();
        assert!((r.value.re - 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 0.0, max_intervals: 4, initial_pieces: 1 };
        assert!(matches!(integrate(|x| Complex64::new((1.0 / x).sin(), 0.0), 1e-6, 1.0, opts), Err(Error::Numeric(_))));
    }
}
