//! Deterministic numerical integration.
//!
//! Three integrators cover everything the crate needs: tensorized
//! Gauss-Legendre on cubes, a desingularized double-cube integrator for
//! kernels `|x-y|^{-e}` (difference coordinates, orthant/cone splitting, and
//! a Gauss-Jacobi rule that absorbs the radial power analytically), and an
//! adaptive 1-D rule for radial profiles with an optional rational map for
//! infinite tails. Error estimates always come from comparing order `n`
//! against order `n + 4`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::math;

/// Default per-axis order used by the higher-level modules.
pub const DEFAULT_ORDER: usize = 24;

/// Value plus a refinement-based error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ErrorEstimate {
    pub value: f64,
    pub stderr: f64,
}

impl ErrorEstimate {
    pub fn exact(value: f64) -> Self {
        ErrorEstimate { value, stderr: 0.0 }
    }
}

/// Gauss-Legendre rule on the reference interval (-1, 1).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Nodes and weights by Newton iteration on the Legendre recurrence.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("quadrature order must be >= 1"));
        }
        let n = order;
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-like initial guess
            let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if math::abs(dx) < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x.abs();
            nodes[n - 1 - i] = x.abs();
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
            let (_, d) = legendre_and_derivative(n, 0.0);
            weights[n / 2] = 2.0 / (d * d);
        }
        Ok(QuadratureRule { order: n, nodes, weights })
    }

    /// Nodes mapped to the interval `[lo, hi]` with scaled weights.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = (hi - lo) / 2.0;
        let mid = (hi + lo) / 2.0;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    if n == 1 {
        return (x, 1.0);
    }
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}

/// Gauss-Jacobi rule for `int_0^1 t^beta f(t) dt`, `beta > -1`.
///
/// The Jacobi-matrix coefficients are closed-form; nodes and weights come
/// from the Golub-Welsch eigenproblem solved by a QL sweep with implicit
/// shifts that tracks the first row of the eigenvector matrix.
#[derive(Debug, Clone)]
pub struct Jacobi01Rule {
    pub order: usize,
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Jacobi01Rule {
    pub fn new(order: usize, beta: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("quadrature order must be >= 1"));
        }
        if !(beta > -1.0) {
            return Err(Error::invalid("jacobi weight exponent must exceed -1"));
        }
        let n = order;
        // weight (1+x)^beta on (-1,1): Jacobi parameters a = 0, b = beta
        let a = 0.0;
        let b = beta;
        let mut diag = alloc::vec![0.0; n];
        let mut off = alloc::vec![0.0; n];
        for k in 0..n {
            let kf = k as f64;
            let denom = (2.0 * kf + a + b) * (2.0 * kf + a + b + 2.0);
            diag[k] = if k == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / denom
            };
            if k >= 1 {
                let num = 4.0 * kf * (kf + a) * (kf + b) * (kf + a + b);
                let den = (2.0 * kf + a + b) * (2.0 * kf + a + b)
                    * (2.0 * kf + a + b + 1.0)
                    * (2.0 * kf + a + b - 1.0);
                off[k - 1] = math::sqrt(num / den);
            }
        }
        let mut first_row = alloc::vec![0.0; n];
        first_row[0] = 1.0;
        tridiag_ql_first_row(&mut diag, &mut off, &mut first_row)?;
        // mu0 = int_{-1}^{1} (1+x)^beta dx = 2^{beta+1}/(beta+1)
        let mu0 = math::powf(2.0, beta + 1.0) / (beta + 1.0);
        let mut pairs: Vec<(f64, f64)> = diag
            .iter()
            .zip(&first_row)
            .map(|(x, z)| (*x, mu0 * z * z))
            .collect();
        pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        // map x in (-1,1) to t = (1+x)/2 and absorb t^beta = ((1+x)/2)^beta
        let scale = math::powf(2.0, -beta - 1.0);
        let nodes = pairs.iter().map(|(x, _)| (1.0 + x) / 2.0).collect();
        let weights = pairs.iter().map(|(_, w)| w * scale).collect();
        Ok(Jacobi01Rule { order: n, beta, nodes, weights })
    }
}

/// QL with implicit shifts on a symmetric tridiagonal matrix; `z` is
/// maintained as the first row of the accumulated eigenvector matrix.
fn tridiag_ql_first_row(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = math::abs(d[m]) + math::abs(d[m + 1]);
                if math::abs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Internal(alloc::format!(
                    "tridiagonal QL failed to converge at row {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let bb = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Tensorized Gauss-Legendre integral of `f` over the cube, with the error
/// estimated from the order `n` vs `n + 4` difference.
pub fn integrate_cube<F>(f: F, q: &Cube, rule: &QuadratureRule) -> Result<ErrorEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    let coarse = tensor_cube(&f, q, rule)?;
    let fine_rule = QuadratureRule::gauss_legendre(rule.order + 4)?;
    let fine = tensor_cube(&f, q, &fine_rule)?;
    Ok(ErrorEstimate { value: fine, stderr: math::abs(fine - coarse) })
}

fn tensor_cube<F>(f: &F, q: &Cube, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let d = q.dim();
    let n = rule.order;
    let half = q.side / 2.0;
    let total = n.pow(d as u32);
    let mut x = alloc::vec![0.0; d];
    let mut acc = math::SumAcc::new();
    for flat in 0..total {
        let mut rem = flat;
        let mut w = 1.0;
        for axis in 0..d {
            let j = rem % n;
            rem /= n;
            x[axis] = q.center[axis] + half * rule.nodes[j];
            w *= half * rule.weights[j];
        }
        let v = f(&x);
        if !v.is_finite() {
            return Err(Error::Evaluation { node: x.clone() });
        }
        acc.push(w * v);
    }
    Ok(acc.total())
}

/// Parameters for the double-cube kernel integrator.
#[derive(Debug, Clone, Copy)]
pub struct PairKernelSpec {
    /// Kernel exponent `e` in `|x-y|^{-e}`.
    pub exponent: f64,
    /// Analytic vanishing order of `F` on the diagonal (0 or 2).
    pub vanishing: u32,
    /// Blow-up guard: error out when the desingularized integrand at the
    /// node nearest the diagonal exceeds this multiple of its median size.
    pub blowup_cap: f64,
}

impl PairKernelSpec {
    pub fn new(exponent: f64, vanishing: u32) -> Self {
        PairKernelSpec { exponent, vanishing, blowup_cap: 20.0 }
    }
}

/// `iint_{Q x Q} F(x, y) |x-y|^{-e} dx dy` by difference coordinates.
///
/// The difference `w = y - x` is split over orthants and, within each
/// orthant, over the cones where one component dominates. In cone
/// coordinates `w = t * dir`, the radial factor `t^{d-1-e+v}` is handed to
/// a Gauss-Jacobi rule while `F / t^v` stays bounded by assumption. `F` is
/// symmetrized internally, so swapping the argument roles cannot change the
/// result.
pub fn cube_pair_kernel<F>(
    f: F,
    q: &Cube,
    spec: PairKernelSpec,
    rule: &QuadratureRule,
) -> Result<ErrorEstimate>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let beta = q.dim() as f64 - 1.0 - spec.exponent + spec.vanishing as f64;
    if !(beta > -1.0) {
        return Err(Error::invalid(
            "kernel exponent too strong for the stated vanishing order",
        ));
    }
    let coarse = pair_kernel_fixed(&f, q, spec, rule.order)?;
    let fine = pair_kernel_fixed(&f, q, spec, rule.order + 4)?;
    Ok(ErrorEstimate { value: fine, stderr: math::abs(fine - coarse) })
}

fn pair_kernel_fixed<F>(f: &F, q: &Cube, spec: PairKernelSpec, n: usize) -> Result<f64>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let d = q.dim();
    let e = spec.exponent;
    let v = spec.vanishing as f64;
    let beta = d as f64 - 1.0 - e + v;
    let t_rule = Jacobi01Rule::new(n, beta)?;
    let gl = QuadratureRule::gauss_legendre(n)?;
    let l = q.side;
    // x = corner + L xi, y = corner + L (xi + w); overall scale L^{2d - e}
    let scale = math::powf(l, 2.0 * d as f64 - e);
    let mut corner = alloc::vec![0.0; d];
    for axis in 0..d {
        corner[axis] = q.lower(axis);
    }

    let n_zeta = n.pow((d - 1) as u32);
    let n_xi = n.pow(d as u32);
    let mut acc = math::SumAcc::new();
    // accumulated |layer| per radial node, ascending in t
    let mut layer_mag = alloc::vec![0.0f64; n];

    let mut w = alloc::vec![0.0; d];
    let mut x = alloc::vec![0.0; d];
    let mut y = alloc::vec![0.0; d];

    for orthant in 0..(1usize << d) {
        for cone in 0..d {
            for (ti_idx, (&t, &tw)) in t_rule.nodes.iter().zip(&t_rule.weights).enumerate() {
                let mut t_layer = math::SumAcc::new();
                for zflat in 0..n_zeta {
                    // direction vector: component `cone` is 1, others are
                    // zeta in [0,1]
                    let mut rem = zflat;
                    let mut zw = 1.0;
                    let mut norm2 = 1.0;
                    for axis in 0..d {
                        let dir = if axis == cone {
                            1.0
                        } else {
                            let j = rem % n;
                            rem /= n;
                            let z = 0.5 + 0.5 * gl.nodes[j];
                            zw *= 0.5 * gl.weights[j];
                            norm2 += z * z;
                            z
                        };
                        let sign = if orthant >> axis & 1 == 1 { -1.0 } else { 1.0 };
                        w[axis] = sign * dir * t;
                    }
                    let kernel_dir = math::powf(math::sqrt(norm2), -e);
                    // inner xi integral over the clipped box
                    let mut xi_acc = math::SumAcc::new();
                    for xflat in 0..n_xi {
                        let mut rem2 = xflat;
                        let mut xw = 1.0;
                        for axis in 0..d {
                            let j = rem2 % n;
                            rem2 /= n;
                            let len = 1.0 - math::abs(w[axis]);
                            if len <= 0.0 {
                                xw = 0.0;
                                break;
                            }
                            let lo = if w[axis] >= 0.0 { 0.0 } else { -w[axis] };
                            let xi = lo + len * (0.5 + 0.5 * gl.nodes[j]);
                            xw *= 0.5 * len * gl.weights[j];
                            x[axis] = corner[axis] + l * xi;
                            y[axis] = corner[axis] + l * (xi + w[axis]);
                        }
                        if xw == 0.0 {
                            continue;
                        }
                        let raw = 0.5 * (f(&x, &y) + f(&y, &x));
                        if !raw.is_finite() {
                            return Err(Error::Evaluation { node: x.clone() });
                        }
                        xi_acc.push(xw * raw);
                    }
                    let desing = xi_acc.total() / math::powf(t, v);
                    t_layer.push(zw * kernel_dir * desing);
                }
                let layer = t_layer.total();
                layer_mag[ti_idx] += math::abs(layer);
                acc.push(tw * layer);
            }
        }
    }
    // The desingularized integrand must stay bounded toward the diagonal:
    // blow-up at the node pair nearest t = 0 means the stated vanishing
    // order does not hold.
    if spec.vanishing > 0
        && n >= 2
        && layer_mag[0] > spec.blowup_cap * (layer_mag[1] + f64::MIN_POSITIVE)
    {
        return Err(Error::Singularity(alloc::format!(
            "integrand at the diagonal-nearest node is {:.3e} against {:.3e} at the next; \
             the stated vanishing order does not hold",
            layer_mag[0],
            layer_mag[1]
        )));
    }
    Ok(scale * acc.total())
}

/// Gagliardo-type singular pair integral
/// `iint_{Q x Q} G(x, y) / |x-y|^{d + 2 sigma} dx dy`, `sigma in (0,1)`,
/// for `G` vanishing at least quadratically on the diagonal.
pub fn integrate_singular_pair<G>(
    g: G,
    q: &Cube,
    sigma: f64,
    rule: &QuadratureRule,
) -> Result<ErrorEstimate>
where
    G: Fn(&[f64], &[f64]) -> f64,
{
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::invalid("sigma must lie in (0, 1)"));
    }
    let spec = PairKernelSpec::new(q.dim() as f64 + 2.0 * sigma, 2);
    cube_pair_kernel(g, q, spec, rule)
}

/// Adaptive 1-D integral of `g` over `(a, b)`; `b = None` means `+infinity`
/// via the rational map `r = a + t/(1-t)`.
pub fn integrate_radial<G>(g: G, a: f64, b: Option<f64>, rule: &QuadratureRule) -> Result<ErrorEstimate>
where
    G: Fn(f64) -> f64,
{
    match b {
        Some(bv) => {
            if !(bv > a) {
                return Err(Error::invalid("integration range needs b > a"));
            }
            adaptive_1d(&g, a, bv, rule)
        }
        None => {
            let mapped = |t: f64| {
                let u = 1.0 - t;
                g(a + t / u) / (u * u)
            };
            adaptive_1d(&mapped, 0.0, 1.0, rule)
        }
    }
}

const ADAPTIVE_RTOL: f64 = 1e-12;
const ADAPTIVE_ATOL: f64 = 1e-15;
const MAX_PANELS: usize = 4000;

fn adaptive_1d<G>(g: &G, a: f64, b: f64, rule: &QuadratureRule) -> Result<ErrorEstimate>
where
    G: Fn(f64) -> f64,
{
    let fine_rule = QuadratureRule::gauss_legendre(rule.order + 4)?;
    let eval = |lo: f64, hi: f64| -> Result<(f64, f64)> {
        let mut coarse = math::SumAcc::new();
        for (x, w) in rule.mapped(lo, hi) {
            let v = g(x);
            if !v.is_finite() {
                return Err(Error::Evaluation { node: alloc::vec![x] });
            }
            coarse.push(w * v);
        }
        let mut fine = math::SumAcc::new();
        for (x, w) in fine_rule.mapped(lo, hi) {
            let v = g(x);
            if !v.is_finite() {
                return Err(Error::Evaluation { node: alloc::vec![x] });
            }
            fine.push(w * v);
        }
        let f = fine.total();
        Ok((f, math::abs(f - coarse.total())))
    };

    struct Panel {
        lo: f64,
        hi: f64,
        value: f64,
        err: f64,
    }
    let (v0, e0) = eval(a, b)?;
    let mut panels = alloc::vec![Panel { lo: a, hi: b, value: v0, err: e0 }];
    loop {
        let total: f64 = math::pairwise_sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
        let toterr: f64 = panels.iter().map(|p| p.err).sum();
        let target = ADAPTIVE_ATOL + ADAPTIVE_RTOL * math::abs(total);
        if toterr <= target {
            return Ok(ErrorEstimate { value: total, stderr: toterr });
        }
        if panels.len() >= MAX_PANELS {
            if toterr > 1e6 * target.max(1e-300) || !total.is_finite() {
                return Err(Error::Divergence(alloc::format!(
                    "no convergence after {MAX_PANELS} panels (err {toterr:.3e})"
                )));
            }
            return Ok(ErrorEstimate { value: total, stderr: toterr });
        }
        // split the worst panel
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .unwrap();
        let Panel { lo, hi, .. } = panels.swap_remove(worst);
        if hi - lo < (b - a) * 1e-13 {
            return Err(Error::Divergence(alloc::format!(
                "refinement stalled on panel [{lo:.6e}, {hi:.6e}] without convergence"
            )));
        }
        let mid = 0.5 * (lo + hi);
        let (vl, el) = eval(lo, mid)?;
        let (vr, er) = eval(mid, hi)?;
        panels.push(Panel { lo, hi: mid, value: vl, err: el });
        panels.push(Panel { lo: mid, hi, value: vr, err: er });
    }
}
