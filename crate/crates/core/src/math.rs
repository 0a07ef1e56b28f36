//! Scalar special functions and small numeric helpers shared across the crate.
//!
//! All transcendentals go through `libm` so that results are identical with
//! and without the `std` feature.

use alloc::vec::Vec;

/// Euler gamma function Γ(x).
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Natural log of |Γ(x)|.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Error function erf(x).
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    let mut r = 1.0;
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            r *= base;
        }
        base *= base;
        k >>= 1;
    }
    r
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn hypot_slice(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// Euclidean distance between two points of equal dimension.
#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Volume of the unit ball in `d` dimensions, π^{d/2}/Γ(d/2+1).
pub fn unit_ball_volume(d: usize) -> f64 {
    powf(core::f64::consts::PI, d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0)
}

/// Surface area of the unit sphere S^{d-1}, 2π^{d/2}/Γ(d/2).
pub fn unit_sphere_area(d: usize) -> f64 {
    2.0 * powf(core::f64::consts::PI, d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Sum a slice with pairwise (cascade) reduction. Deterministic for a fixed
/// input order and noticeably more accurate than the naive left fold on the
/// long node sums produced by tensor quadrature.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

/// Accumulator wrapper: collects terms, reduces pairwise.
#[derive(Debug, Clone, Default)]
pub struct SumAcc {
    terms: Vec<f64>,
}

impl SumAcc {
    pub fn new() -> Self {
        Self { terms: Vec::new() }
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.terms.push(x);
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.terms)
    }
}

/// Bessel function J0 by the classical rational approximations
/// (Abramowitz & Stegun 9.4.1 and 9.4.3); absolute error below 5e-8.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = abs(x);
    if ax < 3.0 {
        let t = x * x / 9.0;
        1.0 + t
            * (-2.2499997
                + t * (1.2656208
                    + t * (-0.3163866 + t * (0.0444479 + t * (-0.0039444 + t * 0.0002100)))))
    } else {
        let z = 3.0 / ax;
        let f0 = 0.79788456
            + z * (-0.00000077
                + z * (-0.00552740
                    + z * (-0.00009512
                        + z * (0.00137237 + z * (-0.00072805 + z * 0.00014476)))));
        let theta = ax - 0.78539816
            + z * (-0.04166397
                + z * (-0.00003954
                    + z * (0.00262573
                        + z * (-0.00054125 + z * (-0.00029333 + z * 0.00013558)))));
        f0 * cos(theta) / sqrt(ax)
    }
}

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0 * x,
        _ => {
            let mut hm = 1.0;
            let mut h = 2.0 * x;
            for k in 1..n {
                let next = 2.0 * x * h - 2.0 * (k as f64) * hm;
                hm = h;
                h = next;
            }
            h
        }
    }
}

/// Multi-indices α with |α| = m in `d` variables, lexicographic order,
/// together with the multinomial weight m!/α!.
pub fn multi_indices(d: usize, m: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut idx = alloc::vec![0usize; d];
    fn rec(idx: &mut Vec<usize>, pos: usize, rem: usize, out: &mut Vec<(Vec<usize>, f64)>) {
        if pos + 1 == idx.len() {
            idx[pos] = rem;
            let weight = multinomial(idx);
            out.push((idx.clone(), weight));
            return;
        }
        for k in 0..=rem {
            idx[pos] = k;
            rec(idx, pos + 1, rem - k, out);
        }
    }
    rec(&mut idx, 0, m, &mut out);
    out
}

fn multinomial(alpha: &[usize]) -> f64 {
    let m: usize = alpha.iter().sum();
    let mut num = ln_gamma(m as f64 + 1.0);
    for &a in alpha {
        num -= ln_gamma(a as f64 + 1.0);
    }
    libm::round(exp(num))
}
