//! Farey sequences, mediant arcs and arc location.
//!
//! Arcs are half-open rational intervals `[lo, hi)` bounded by the mediants
//! of a fraction with its two neighbours in ℱ_Q. The arc of `1/1` is closed
//! on the right at exactly 1, and ratios below `1/(Q+1)` fall in a boundary
//! arc around `0/1` that is not part of the public tiling.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// A reduced fraction `M/N` with `0 ≤ M ≤ N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct FareyFraction {
    pub num: u64,
    pub den: u64,
}

impl FareyFraction {
    pub const ZERO: Self = Self { num: 0, den: 1 };
    pub const ONE: Self = Self { num: 1, den: 1 };

    pub fn new(num: u64, den: u64) -> Self {
        Self { num, den }
    }

    pub fn mediant(self, other: Self) -> Self {
        Self::new(self.num + other.num, self.den + other.den)
    }

    pub fn ratio(self) -> Ratio<u64> {
        Ratio::new_raw(self.num, self.den)
    }

    /// `self.num·other.den − self.den·other.num`.
    pub fn det(self, other: Self) -> i128 {
        self.num as i128 * other.den as i128 - self.den as i128 * other.num as i128
    }
}

impl fmt::Display for FareyFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FareyArc {
    pub center: FareyFraction,
    /// `None` only for the boundary arc around `0/1`.
    pub left: Option<FareyFraction>,
    /// `None` only for the arc of `1/1`.
    pub right: Option<FareyFraction>,
    pub lo: FareyFraction,
    pub hi: FareyFraction,
}

impl FareyArc {
    pub fn is_boundary(&self) -> bool {
        self.center.num == 0
    }

    /// Whether `m/n` lies in the arc (closed at 1 for the arc of `1/1`).
    pub fn contains(&self, m: u64, n: u64) -> bool {
        let x = Ratio::new_raw(m, n);
        if x < self.lo.ratio() {
            return false;
        }
        match x.cmp(&self.hi.ratio()) {
            Ordering::Less => true,
            Ordering::Equal => self.right.is_none(),
            Ordering::Greater => false,
        }
    }

    /// Denominator of the left mediant, `N + N″`.
    pub fn left_mediant_den(&self) -> u64 {
        self.lo.den
    }
}

/// Ascending ℱ_Q by the next-term recurrence.
pub fn farey_sequence(q: u64) -> Result<Vec<FareyFraction>> {
    if q == 0 {
        return Err(Error::InvalidArgument("Farey order must be at least 1".into()));
    }
    let mut out = vec![FareyFraction::ZERO];
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, q);
    while c <= q {
        out.push(FareyFraction::new(c, d));
        let k = (q + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
        if a == 1 && b == 1 {
            break;
        }
    }
    Ok(out)
}

/// One arc per fraction `M/N` with `1 ≤ M ≤ N ≤ Q`, in ascending order.
pub fn build_arcs(q: u64) -> Result<Vec<FareyArc>> {
    let seq = farey_sequence(q)?;
    let arcs = (1..seq.len())
        .map(|i| {
            let center = seq[i];
            let left = seq[i - 1];
            let right = seq.get(i + 1).copied();
            FareyArc {
                center,
                left: Some(left),
                right,
                lo: center.mediant(left),
                hi: right.map_or(FareyFraction::ONE, |r| center.mediant(r)),
            }
        })
        .collect();
    Ok(arcs)
}

/// Arc table for one Farey order, with fast location of rationals.
#[derive(Debug, Clone)]
pub struct FareyArcs {
    q: u64,
    arcs: Vec<FareyArc>,
    boundary: FareyArc,
}

impl FareyArcs {
    pub fn new(q: u64) -> Result<Self> {
        let arcs = build_arcs(q)?;
        let first = FareyFraction::new(1, q);
        let boundary = FareyArc {
            center: FareyFraction::ZERO,
            left: None,
            right: Some(first),
            lo: FareyFraction::ZERO,
            hi: FareyFraction::ZERO.mediant(first),
        };
        Ok(Self { q, arcs, boundary })
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn arcs(&self) -> &[FareyArc] {
        &self.arcs
    }

    pub fn boundary(&self) -> &FareyArc {
        &self.boundary
    }

    /// The arc containing `m/n`; ratios below `1/(Q+1)` are out of range.
    pub fn locate(&self, m: u64, n: u64) -> Result<&FareyArc> {
        if m == 0 || n == 0 || m > n {
            return Err(Error::OutOfRange { m, n, q: self.q });
        }
        let arc = self.locate_with_boundary(m, n);
        if arc.is_boundary() {
            return Err(Error::OutOfRange { m, n, q: self.q });
        }
        Ok(arc)
    }

    /// Like [`locate`](Self::locate) but maps `(0, 1/(Q+1))` to the
    /// boundary arc. Requires `0 < m ≤ n`.
    pub fn locate_with_boundary(&self, m: u64, n: u64) -> &FareyArc {
        debug_assert!(m > 0 && m <= n);
        let center = match bracket(m, n, self.q) {
            Bracket::Exact(f) => f,
            Bracket::Between(l, r) => {
                // x sits strictly between consecutive terms; the mediant splits
                // the two arcs and belongs to the right one
                let med = l.mediant(r);
                if (m as u128) * (med.den as u128) < (n as u128) * (med.num as u128) {
                    l
                } else {
                    r
                }
            }
        };
        if center.num == 0 {
            return &self.boundary;
        }
        let idx = self
            .arcs
            .binary_search_by(|a| a.center.ratio().cmp(&center.ratio()))
            .expect("Stern–Brocot descent yields a member of the Farey sequence");
        &self.arcs[idx]
    }
}

enum Bracket {
    Exact(FareyFraction),
    Between(FareyFraction, FareyFraction),
}

/// Consecutive terms of ℱ_Q around `m/n ∈ (0, 1]` by Stern–Brocot descent,
/// taking runs of equal turns in one step.
fn bracket(m: u64, n: u64, q: u64) -> Bracket {
    let (m, n) = (m as u128, n as u128);
    let q = q as u128;
    let (mut ln, mut ld) = (0u128, 1u128);
    let (mut rn, mut rd) = (1u128, 1u128);
    if m == n {
        return Bracket::Exact(FareyFraction::ONE);
    }
    loop {
        let (mn, md) = (ln + rn, ld + rd);
        if md > q {
            break;
        }
        // sign of x − mediant
        match (m * md).cmp(&(n * mn)) {
            Ordering::Equal => return Bracket::Exact(FareyFraction::new(mn as u64, md as u64)),
            Ordering::Less => {
                // largest k with x < (k·l + r) and k·ld + rd ≤ Q
                let a = m * ld - n * ln;
                let b = n * rn - m * rd;
                let k = ((b - 1) / a).min((q - rd) / ld);
                rn += k * ln;
                rd += k * ld;
            }
            Ordering::Greater => {
                let a = m * ld - n * ln;
                let b = n * rn - m * rd;
                let k = ((a - 1) / b).min((q - ld) / rd);
                ln += k * rn;
                ld += k * rd;
            }
        }
    }
    Bracket::Between(FareyFraction::new(ln as u64, ld as u64), FareyFraction::new(rn as u64, rd as u64))
}
