//! Fractional Sobolev semi-norms, Riesz energies, Hardy functionals, the
//! ball-representation of homogeneous kernels, and the pointwise partition
//! identity used by IMS-type localization.

use alloc::vec::Vec;

use crate::density::{Density, DensityKind, TrialFunction};
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::math;
use crate::quadrature::{
    self, ErrorEstimate, Jacobi01Rule, PairKernelSpec, QuadratureRule,
};

const PI: f64 = core::f64::consts::PI;

/// Decomposition `s = m + sigma` with the multi-index weight table.
#[derive(Debug, Clone)]
pub struct SemiNormParams {
    pub s: f64,
    pub d: usize,
    pub m: usize,
    pub sigma: f64,
    /// Multi-indices with |alpha| = m and weights m!/alpha!.
    pub indices: Vec<(Vec<usize>, f64)>,
}

impl SemiNormParams {
    pub fn new(s: f64, d: usize) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::invalid("s must be positive"));
        }
        let m = math::floor(s) as usize;
        let sigma = s - m as f64;
        // snap floating noise onto integer s
        let (m, sigma) = if sigma < 1e-12 {
            (m, 0.0)
        } else if sigma > 1.0 - 1e-12 {
            (m + 1, 0.0)
        } else {
            (m, sigma)
        };
        Ok(SemiNormParams { s, d, m, sigma, indices: math::multi_indices(d, m) })
    }
}

/// `c_{d,sigma} = 2^{2 sigma - 1} pi^{-d/2} Gamma((d+2 sigma)/2) / |Gamma(-sigma)|`.
pub fn fractional_constant(d: usize, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::invalid("sigma must lie in (0, 1)"));
    }
    let num = math::powf(2.0, 2.0 * sigma - 1.0) * math::gamma((d as f64 + 2.0 * sigma) / 2.0);
    let abs_gamma_neg = math::exp(math::ln_gamma(-sigma));
    Ok(num / (math::powf(PI, d as f64 / 2.0) * abs_gamma_neg))
}

/// Sharp Hardy constant
/// `C_{d,s} = 2^{2s} (Gamma((d+2s)/4) / Gamma((d-2s)/4))^2`, `0 < s < d/2`.
pub fn hardy_constant(d: usize, s: f64) -> Result<f64> {
    if !(s > 0.0 && 2.0 * s < d as f64) {
        return Err(Error::invalid("hardy constant needs 0 < s < d/2"));
    }
    let df = d as f64;
    let ratio = math::exp(math::ln_gamma((df + 2.0 * s) / 4.0) - math::ln_gamma((df - 2.0 * s) / 4.0));
    Ok(math::powf(2.0, 2.0 * s) * ratio * ratio)
}

/// A function with enough classical derivatives for cube semi-norms.
pub trait SeminormFn {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn partial(&self, x: &[f64], alpha: &[usize]) -> Result<f64>;
}

impl SeminormFn for TrialFunction {
    fn dim(&self) -> usize {
        TrialFunction::dim(self)
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
    fn partial(&self, x: &[f64], alpha: &[usize]) -> Result<f64> {
        TrialFunction::partial(self, x, alpha)
    }
}

/// The coordinate function `u(x) = x_axis`, handy as a semi-norm oracle.
#[derive(Debug, Clone, Copy)]
pub struct CoordinateFn {
    pub dim: usize,
    pub axis: usize,
}

impl SeminormFn for CoordinateFn {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        x[self.axis]
    }
    fn partial(&self, x: &[f64], alpha: &[usize]) -> Result<f64> {
        let order: usize = alpha.iter().sum();
        Ok(match order {
            0 => x[self.axis],
            1 if alpha[self.axis] == 1 => 1.0,
            _ => 0.0,
        })
    }
}

/// Cube semi-norm `||u||^2_{Hdot^s(Q)}`: integer part as weighted squares of
/// derivatives, fractional part as the weighted Gagliardo double integral.
pub fn hs_seminorm_cube<F: SeminormFn>(
    u: &F,
    q: &Cube,
    s: f64,
    rule: &QuadratureRule,
) -> Result<ErrorEstimate> {
    let params = SemiNormParams::new(s, q.dim())?;
    if u.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: u.dim() });
    }
    let mut value = 0.0;
    let mut stderr = 0.0;
    if params.sigma == 0.0 {
        for (alpha, weight) in &params.indices {
            let est = quadrature::integrate_cube(
                |x| {
                    let v = u.partial(x, alpha).unwrap_or(f64::NAN);
                    v * v
                },
                q,
                rule,
            )?;
            value += weight * est.value;
            stderr += weight * est.stderr;
        }
    } else {
        let c = fractional_constant(q.dim(), params.sigma)?;
        for (alpha, weight) in &params.indices {
            // fail fast on unsupported derivative orders
            u.partial(&q.center, alpha)?;
            let est = quadrature::integrate_singular_pair(
                |x, y| {
                    let vx = u.partial(x, alpha).unwrap_or(f64::NAN);
                    let vy = u.partial(y, alpha).unwrap_or(f64::NAN);
                    (vx - vy) * (vx - vy)
                },
                q,
                params.sigma,
                rule,
            )?;
            value += c * weight * est.value;
            stderr += c * weight * est.stderr;
        }
    }
    Ok(ErrorEstimate { value, stderr })
}

/// Full-space kinetic form `<u, (-Delta)^s u>`.
///
/// Gaussians go through the closed Fourier modulus and a radial quadrature.
/// Bumps support integer `s in {0, 1}` through derivatives and fractional
/// `s in (0, 1)` through a radial Fourier-Bessel transform; anything else
/// is a capability error directing to cube semi-norms.
pub fn hs_fullspace(u: &TrialFunction, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::invalid("s must be nonnegative"));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let d = u.dim();
    let df = d as f64;
    let rule = QuadratureRule::gauss_legendre(24)?;
    match u {
        TrialFunction::Gaussian { width, .. } => {
            // |u-hat(p)|^2 = (w^2/pi)^{d/2} exp(-w^2 p^2)
            let w = *width;
            let amp = math::powf(w * w / PI, df / 2.0);
            let sd = math::unit_sphere_area(d);
            // substitute p = t/w to keep the integrand scale-free
            let est = quadrature::integrate_radial(
                |t| math::powf(t, 2.0 * s + df - 1.0) * math::exp(-t * t),
                0.0,
                Some(14.0),
                &rule,
            )?;
            Ok(amp * sd * est.value * math::powf(w, -2.0 * s - df))
        }
        TrialFunction::BumpCompact { center, radius, power } => {
            let snap = libm::round(s);
            if math::abs(s - snap) < 1e-12 && snap == 1.0 {
                // integer s = 1: Dirichlet integral of the radial gradient
                let a = bump_amplitude(d, *radius, *power);
                let r0 = *radius;
                let p = *power as f64;
                let sd = math::unit_sphere_area(d);
                let est = quadrature::integrate_radial(
                    |r| {
                        let t = 1.0 - r * r / (r0 * r0);
                        let g = a * p * math::powf(t.max(0.0), p - 1.0) * 2.0 * r / (r0 * r0);
                        g * g * math::powf(r, df - 1.0)
                    },
                    0.0,
                    Some(r0),
                    &rule,
                )?;
                return Ok(sd * est.value);
            }
            if s < 1.0 {
                return bump_fractional_kinetic(d, *radius, *power, s, center.len());
            }
            Err(Error::Capability(
                "bump kinetic forms support s = 1 and s in (0,1); use cube semi-norms otherwise"
                    .into(),
            ))
        }
    }
}

fn bump_amplitude(d: usize, radius: f64, power: u32) -> f64 {
    let df = d as f64;
    let q = 2.0 * power as f64;
    let norm2 = math::powf(radius, df)
        * math::powf(PI, df / 2.0)
        * math::exp(math::ln_gamma(q + 1.0) - math::ln_gamma(q + 1.0 + df / 2.0));
    1.0 / math::sqrt(norm2)
}

/// `int |p|^{2s} |u-hat|^2` for a radial compactly supported profile via the
/// d-dimensional radial Fourier kernel (cos, J0, sinc).
fn bump_fractional_kinetic(d: usize, radius: f64, power: u32, s: f64, _dim: usize) -> Result<f64> {
    let df = d as f64;
    let a = bump_amplitude(d, radius, power);
    let p_exp = power as f64;
    let profile = move |r: f64| {
        let t = 1.0 - r * r / (radius * radius);
        if t <= 0.0 {
            0.0
        } else {
            a * math::powf(t, p_exp)
        }
    };
    if d > 3 {
        return Err(Error::Capability("bump fractional kinetic supports d <= 3".into()));
    }
    if power < 2 {
        return Err(Error::Capability(
            "bump fractional kinetic needs power >= 2 for an integrable transform tail".into(),
        ));
    }
    let omega = move |z: f64| -> f64 {
        match d {
            1 => math::cos(z),
            2 => math::bessel_j0(z),
            _ => {
                if math::abs(z) < 1e-8 {
                    1.0 - z * z / 6.0
                } else {
                    math::sin(z) / z
                }
            }
        }
    };
    let sd = math::unit_sphere_area(d);
    let panel_rule = QuadratureRule::gauss_legendre(16)?;
    // u-hat(p) = (2 pi)^{-d/2} |S^{d-1}| F(p), F(p) = int u(r) Omega(pr) r^{d-1} dr;
    // composite panels sized to the oscillation length resolve Omega(pr)
    let f_of_p = |p: f64| -> f64 {
        let panels = 2 + (p * radius / PI) as usize;
        let h = radius / panels as f64;
        let mut acc = math::SumAcc::new();
        for i in 0..panels {
            for (r, w) in panel_rule.mapped(h * i as f64, h * (i + 1) as f64) {
                acc.push(w * profile(r) * omega(p * r) * math::powf(r, df - 1.0));
            }
        }
        acc.total()
    };
    let prefactor = sd * math::powf(2.0 * PI, -df) * sd * sd;
    let rule = QuadratureRule::gauss_legendre(24)?;
    // integrate in octaves until the tail is negligible
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = 8.0 / radius;
    for _ in 0..24 {
        let est = quadrature::integrate_radial(
            |p| math::powf(p, 2.0 * s + df - 1.0) * f_of_p(p) * f_of_p(p),
            lo,
            Some(hi),
            &rule,
        )?;
        total += est.value;
        if math::abs(est.value) < 1e-10 * math::abs(total) {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    Ok(prefactor * total)
}

/// Riesz interaction energy `iint rho(x) rho(y) |x-y|^{-gamma} dx dy`.
pub fn riesz_energy(rho: &Density, gamma: f64) -> Result<ErrorEstimate> {
    let d = rho.dim;
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma must be positive"));
    }
    if gamma >= d as f64 {
        return Err(Error::Divergence(alloc::format!(
            "riesz kernel |x-y|^-{gamma} is not locally integrable in d = {d}"
        )));
    }
    match &rho.kind {
        DensityKind::GaussianMixture(parts) => {
            let mut value = 0.0;
            let mut stderr = 0.0;
            for (i, a) in parts.iter().enumerate() {
                for b in parts.iter().skip(i) {
                    let sym = if core::ptr::eq(a, b) { 1.0 } else { 2.0 };
                    let tau2 = a.width * a.width + b.width * b.width;
                    let m = math::dist(&a.center, &b.center);
                    let est = gaussian_pair_riesz(d, gamma, tau2, m)?;
                    value += sym * a.weight * b.weight * est.value;
                    stderr += sym * a.weight * b.weight * est.stderr;
                }
            }
            Ok(ErrorEstimate { value, stderr })
        }
        DensityKind::IndicatorMixture(parts) => {
            if parts.len() != 1 {
                return Err(Error::Capability(
                    "riesz energy for indicator mixtures supports a single box".into(),
                ));
            }
            let rule = QuadratureRule::gauss_legendre(16)?;
            let (w, q) = &parts[0];
            let spec = PairKernelSpec::new(gamma, 0);
            let est = quadrature::cube_pair_kernel(|_, _| 1.0, q, spec, &rule)?;
            Ok(ErrorEstimate { value: w * w * est.value, stderr: w * w * est.stderr })
        }
        DensityKind::GridSampled(_) => Err(Error::Capability(
            "riesz energy is available for gaussian and single-box indicator densities".into(),
        )),
    }
}

/// `E|Z|^{-gamma}` for `Z ~ N(mu, tau^2 I_d)`, `m = |mu|`, via the 1-D
/// exponential-representation integral
/// `Gamma(gamma/2)^{-1} int_0^inf t^{gamma/2-1} (1+2 t tau^2)^{-d/2}
///  exp(-t m^2/(1+2 t tau^2)) dt`.
///
/// After rescaling `t = theta/(m^2+1)` the boundary layer has unit width;
/// the head is a Gauss-Jacobi integral with weight `theta^{gamma/2-1}` and
/// the inverted tail one with weight `v^{(d-gamma)/2-1}`, both smooth.
fn gaussian_pair_riesz(d: usize, gamma: f64, tau2: f64, m: f64) -> Result<ErrorEstimate> {
    let df = d as f64;
    let c0 = m * m + 1.0;
    let head_fn = move |theta: f64| -> f64 {
        let t = theta / c0;
        let denom = 1.0 + 2.0 * t * tau2;
        math::powf(denom, -df / 2.0) * math::exp(-t * m * m / denom)
    };
    let tail_fn = move |v: f64| -> f64 {
        // theta = 1/v branch folded analytically
        let arg = v * c0 + 2.0 * tau2;
        math::powf(c0, df / 2.0) * math::powf(arg, -df / 2.0) * math::exp(-m * m / arg)
    };
    let eval = |n: usize| -> Result<f64> {
        let head_rule = Jacobi01Rule::new(n, gamma / 2.0 - 1.0)?;
        let tail_rule = Jacobi01Rule::new(n, (df - gamma) / 2.0 - 1.0)?;
        let head: f64 =
            head_rule.nodes.iter().zip(&head_rule.weights).map(|(t, w)| w * head_fn(*t)).sum();
        let tail: f64 =
            tail_rule.nodes.iter().zip(&tail_rule.weights).map(|(v, w)| w * tail_fn(*v)).sum();
        Ok(head + tail)
    };
    let coarse = eval(32)?;
    let fine = eval(44)?;
    let scale = math::powf(c0, -gamma / 2.0) / math::gamma(gamma / 2.0);
    Ok(ErrorEstimate { value: scale * fine, stderr: scale * math::abs(fine - coarse) })
}

/// Exact pairwise Riesz interaction of two radial unit-mass profiles with
/// centers `dist` apart and disjoint supports.
///
/// Uses nested spherical averages: both radial shells are integrated against
/// the angular distance kernel, which is smooth when the supports do not
/// touch the singularity.
pub fn cross_riesz_radial<F1, F2>(
    profile1: F1,
    support1: f64,
    profile2: F2,
    support2: f64,
    dist: f64,
    gamma: f64,
    d: usize,
) -> Result<f64>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    if !(dist > support1 + support2) {
        return Err(Error::precondition(
            "cross riesz term requires disjoint supports (dist > r1 + r2)",
        ));
    }
    let df = d as f64;
    let radial = QuadratureRule::gauss_legendre(24)?;
    let angular = QuadratureRule::gauss_legendre(24)?;
    let sd = math::unit_sphere_area(d);
    let sd2 = if d >= 2 { math::unit_sphere_area(d - 1) } else { 0.0 };

    // angular average of |v|^{-gamma} over directions of a shell of radius t
    // seen from a point at distance rho
    let kernel_avg = |rho: f64, t: f64| -> f64 {
        if t == 0.0 {
            return math::powf(rho, -gamma);
        }
        match d {
            1 => {
                0.5 * (math::powf(math::abs(rho - t), -gamma)
                    + math::powf(rho + t, -gamma))
            }
            _ => {
                let mut acc = math::SumAcc::new();
                for (theta, w) in angular.mapped(0.0, PI) {
                    let q2 = rho * rho + t * t - 2.0 * rho * t * math::cos(theta);
                    let ang =
                        if d == 2 { 1.0 } else { math::powf(math::sin(theta), df - 2.0) };
                    acc.push(w * ang * math::powf(q2, -gamma / 2.0));
                }
                sd2 * acc.total() / sd
            }
        }
    };
    // potential of profile1 at distance rho from its center
    let potential = |rho: f64| -> f64 {
        let mut acc = math::SumAcc::new();
        for (t, w) in radial.mapped(0.0, support1) {
            let shell = profile1(t) * sd * math::powf(t, df - 1.0);
            acc.push(w * shell * kernel_avg(rho, t));
        }
        acc.total()
    };
    // integrate profile2 shells against the potential
    let mut acc = math::SumAcc::new();
    for (t, w) in radial.mapped(0.0, support2) {
        let shell = profile2(t) * sd * math::powf(t, df - 1.0);
        if d == 1 {
            let val = 0.5 * (potential(dist - t) + potential(dist + t));
            acc.push(w * shell * val);
        } else {
            let mut ang_acc = math::SumAcc::new();
            for (theta, wq) in angular.mapped(0.0, PI) {
                let rho = math::sqrt(
                    dist * dist + t * t - 2.0 * dist * t * math::cos(theta),
                );
                let ang = if d == 2 { 1.0 } else { math::powf(math::sin(theta), df - 2.0) };
                ang_acc.push(wq * ang * potential(rho));
            }
            acc.push(w * shell * sd2 * ang_acc.total() / sd);
        }
    }
    Ok(acc.total())
}

/// `int |u(x)|^2 |x|^{-2s} dx`, requires `2s < d`.
///
/// Integrated in origin-centered spherical coordinates; the radial weight
/// `r^{d-1-2s}` is flattened exactly by the substitution `r = rho^kappa`,
/// `kappa = 1/(d - 2s)`.
pub fn hardy_functional(u: &TrialFunction, s: f64) -> Result<f64> {
    let d = u.dim();
    let df = d as f64;
    if !(s > 0.0 && 2.0 * s < df) {
        return Err(Error::invalid("hardy functional needs 0 < 2s < d"));
    }
    let m = math::hypot_slice(u.center());
    let r_max = match u {
        TrialFunction::Gaussian { width, .. } => m + 16.0 * width,
        TrialFunction::BumpCompact { radius, .. } => m + radius,
    };
    let rule = QuadratureRule::gauss_legendre(24)?;
    let angular = QuadratureRule::gauss_legendre(48)?;
    let sd2 = if d >= 2 { math::unit_sphere_area(d - 1) } else { 0.0 };
    // |u|^2 averaged over the sphere of radius r about the origin
    let shell_avg = |r: f64| -> f64 {
        if d == 1 {
            let a = u.eval(&[r]);
            let b = u.eval(&[-r]);
            return a * a + b * b;
        }
        let mut acc = math::SumAcc::new();
        for (theta, w) in angular.mapped(0.0, PI) {
            // point at distance q from the trial center
            let q2 = (r * r + m * m - 2.0 * r * m * math::cos(theta)).max(0.0);
            let v = eval_radial(u, math::sqrt(q2));
            let ang = if d == 2 { 1.0 } else { math::powf(math::sin(theta), df - 2.0) };
            acc.push(w * ang * v * v);
        }
        sd2 * acc.total()
    };
    let kappa = 1.0 / (df - 2.0 * s);
    let rho_max = math::powf(r_max, 1.0 / kappa);
    let est = quadrature::integrate_radial(
        |rho| kappa * shell_avg(math::powf(rho, kappa)),
        0.0,
        Some(rho_max),
        &rule,
    )?;
    Ok(est.value)
}

fn eval_radial(u: &TrialFunction, r: f64) -> f64 {
    let mut x = alloc::vec![0.0; u.dim()];
    x.clone_from_slice(u.center());
    x[0] += r;
    u.eval(&x)
}

/// Volume of the intersection of two radius-R balls at center distance t.
pub fn ball_intersection_volume(d: usize, t: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !(t >= 0.0) {
        return Err(Error::invalid("need radius > 0 and t >= 0"));
    }
    if t >= 2.0 * radius {
        return Ok(0.0);
    }
    Ok(match d {
        1 => 2.0 * radius - t,
        2 => {
            2.0 * radius * radius * math::acos(t / (2.0 * radius))
                - t / 2.0 * math::sqrt(4.0 * radius * radius - t * t)
        }
        3 => PI / 12.0 * (4.0 * radius + t) * (2.0 * radius - t) * (2.0 * radius - t),
        _ => {
            // lens as twice the spherical cap above height t/2
            let rule = QuadratureRule::gauss_legendre(24)?;
            let vd1 = math::unit_ball_volume(d - 1);
            let df1 = (d - 1) as f64;
            2.0 * quadrature::integrate_radial(
                |h| vd1 * math::powf((radius * radius - h * h).max(0.0), df1 / 2.0),
                t / 2.0,
                Some(radius),
                &rule,
            )?
            .value
        }
    })
}

/// `J(t) = int_0^inf I_d(t, R) R^{-(d+gamma+1)} dR` of the ball
/// representation of `|x-y|^{-gamma}`.
///
/// The substitution `R = t/(2v)` maps the range onto `(0, 1]` and exposes
/// the weight `v^{gamma-1}`; the remaining factor `I_d(2v, 1)` is the
/// normalized lens profile.
fn fdll_j(d: usize, gamma: f64, t: f64) -> Result<ErrorEstimate> {
    let eval = |n: usize| -> Result<f64> {
        let rule = Jacobi01Rule::new(n, gamma - 1.0)?;
        let mut acc = math::SumAcc::new();
        for (v, w) in rule.nodes.iter().zip(&rule.weights) {
            acc.push(w * ball_intersection_volume(d, 2.0 * v, 1.0)?);
        }
        Ok(acc.total())
    };
    let coarse = eval(48)?;
    let fine = eval(56)?;
    let scale = math::powf(t / 2.0, -gamma);
    Ok(ErrorEstimate { value: scale * fine, stderr: scale * math::abs(fine - coarse) })
}

/// Normalization constant of the ball representation, from `c J(t) = t^{-gamma}`
/// at `t = 1`, with a scaling-invariance residual check at `t = 2`.
pub fn fdll_constant(d: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < d as f64) {
        return Err(Error::invalid("fdll constant needs 0 < gamma < d"));
    }
    let j1 = fdll_j(d, gamma, 1.0)?;
    if !(j1.value > 0.0) || !j1.value.is_finite() {
        return Err(Error::Divergence("ball-representation integral did not converge".into()));
    }
    let j2 = fdll_j(d, gamma, 2.0)?;
    let invariant = math::powf(2.0, gamma) * j2.value;
    let residual = math::abs(invariant - j1.value) / j1.value;
    if residual > 1e-6 {
        return Err(Error::Internal(alloc::format!(
            "t-independence residual {residual:.3e} exceeds 1e-6"
        )));
    }
    Ok(1.0 / j1.value)
}

/// `c_{d,gamma} J(t)`; equals `t^{-gamma}` within quadrature tolerance.
pub fn fdll_reconstruct(d: usize, gamma: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("t must be positive"));
    }
    let c = fdll_constant(d, gamma)?;
    Ok(c * fdll_j(d, gamma, t)?.value)
}

/// Residual of the pointwise partition identity
/// `|chi(x)u(x) - chi(y)u(y)|^2 + |eta(x)u(x) - eta(y)u(y)|^2 - |u(x)-u(y)|^2
///  = [(chi(x)-chi(y))^2 + (eta(x)-eta(y))^2] Re[conj(u(x)) u(y)]`,
/// with `eta = sqrt(1 - chi^2)`. Complex values are passed as (re, im).
pub fn loss_identity_residual(
    chi_x: f64,
    chi_y: f64,
    u_x: (f64, f64),
    u_y: (f64, f64),
) -> Result<f64> {
    for c in [chi_x, chi_y] {
        if !(-1.0..=1.0).contains(&c) {
            return Err(Error::precondition(alloc::format!(
                "chi = {c} leaves no admissible eta with chi^2 + eta^2 = 1"
            )));
        }
    }
    let eta_x = math::sqrt(1.0 - chi_x * chi_x);
    let eta_y = math::sqrt(1.0 - chi_y * chi_y);
    let sq = |re: f64, im: f64| re * re + im * im;
    let lhs = sq(chi_x * u_x.0 - chi_y * u_y.0, chi_x * u_x.1 - chi_y * u_y.1)
        + sq(eta_x * u_x.0 - eta_y * u_y.0, eta_x * u_x.1 - eta_y * u_y.1)
        - sq(u_x.0 - u_y.0, u_x.1 - u_y.1);
    let re_prod = u_x.0 * u_y.0 + u_x.1 * u_y.1;
    let rhs = ((chi_x - chi_y) * (chi_x - chi_y) + (eta_x - eta_y) * (eta_x - eta_y)) * re_prod;
    Ok(lhs - rhs)
}

/// The five functionals entering the interpolation quotients.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub hardy: Option<f64>,
    pub riesz: f64,
    pub l2: f64,
    pub lp: f64,
}

impl EnergyBreakdown {
    /// Assemble the functionals of a trial function at parameters (d, s).
    /// The Hardy term is present when `2s < d`, the Riesz term requires it.
    pub fn compute(u: &TrialFunction, s: f64) -> Result<Self> {
        let d = u.dim();
        let kinetic = hs_fullspace(u, s)?;
        let hardy = if 2.0 * s < d as f64 { Some(hardy_functional(u, s)?) } else { None };
        let riesz = riesz_energy(&u.power_density(1.0)?, 2.0 * s)?.value;
        let lp = u.lp_integral(2.0 * (1.0 + 2.0 * s / d as f64))?;
        Ok(EnergyBreakdown { kinetic, hardy, riesz, l2: 1.0, lp })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::GaussianComponent;

    fn gl(n: usize) -> QuadratureRule {
        QuadratureRule::gauss_legendre(n).unwrap()
    }

    #[test]
    fn fractional_constant_oracles() {
        // d=1, sigma=1/2: Gamma(-1/2) = -2 sqrt(pi) gives 1/(2 pi)
        let c = fractional_constant(1, 0.5).unwrap();
        assert!((c - 1.0 / (2.0 * PI)).abs() < 1e-14, "{c}");
        // d=3, sigma=1/2: 1/(2 pi^2)
        let c3 = fractional_constant(3, 0.5).unwrap();
        assert!((c3 - 1.0 / (2.0 * PI * PI)).abs() < 1e-14, "{c3}");
        // positivity across the range
        for sigma in [0.05, 0.3, 0.7, 0.95] {
            for d in 1..=3 {
                assert!(fractional_constant(d, sigma).unwrap() > 0.0);
            }
        }
        assert!(fractional_constant(1, 1.0).is_err());
    }

    #[test]
    fn hardy_constant_oracles() {
        let c = hardy_constant(3, 1.0).unwrap();
        assert!((c - 0.25).abs() < 1e-12, "{c}");
        // d=2, s=1/2: 2 (Gamma(3/4)/Gamma(1/4))^2
        let c2 = hardy_constant(2, 0.5).unwrap();
        let expect = 2.0 * math::powi(math::gamma(0.75) / math::gamma(0.25), 2);
        assert!((c2 - expect).abs() < 1e-13);
        // Kato: d=3, s=1/2 gives 2/pi
        let kato = hardy_constant(3, 0.5).unwrap();
        assert!((kato - 2.0 / PI).abs() < 1e-13, "{kato}");
        // limit s -> 0+ is 1 (the formula's gamma ratio tends to 1)
        assert!((hardy_constant(3, 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert!(hardy_constant(2, 1.0).is_err());
    }

    #[test]
    fn seminorm_constant_function_vanishes() {
        // a very wide gaussian is near-constant on a small cube
        let u = TrialFunction::gaussian(alloc::vec![0.0], 1e4).unwrap();
        let q = Cube::from_bounds(0.0, 1.0, 1).unwrap();
        for s in [0.25, 0.5, 1.0] {
            let v = hs_seminorm_cube(&u, &q, s, &gl(12)).unwrap();
            assert!(v.value.abs() < 1e-10, "s={s}: {}", v.value);
        }
    }

    #[test]
    fn seminorm_linear_function_s1() {
        // u(x) = x on [0,1] emulated by the derivative of nothing: use the
        // identity through a gaussian? No: checked directly on the gradient
        // path with a synthetic trial is not available, so use s=1 on a
        // narrow gaussian against the full-space value instead.
        let u = TrialFunction::unit_gaussian(1);
        let q = Cube::from_bounds(-9.0, 9.0, 1).unwrap();
        let v = hs_seminorm_cube(&u, &q, 1.0, &gl(40)).unwrap();
        let full = hs_fullspace(&u, 1.0).unwrap();
        assert!((v.value - full).abs() < 1e-8, "{} vs {full}", v.value);
    }

    #[test]
    fn gaussian_kinetic_gamma_oracle() {
        for (d, s) in [(1usize, 0.25), (2, 0.5), (3, 1.0), (3, 0.5)] {
            let u = TrialFunction::unit_gaussian(d);
            let v = hs_fullspace(&u, s).unwrap();
            let exact = math::gamma(s + d as f64 / 2.0) / math::gamma(d as f64 / 2.0);
            assert!(
                (v - exact).abs() < 1e-6 * exact,
                "(d,s)=({d},{s}): {v} vs {exact}"
            );
        }
    }

    #[test]
    fn kinetic_dilation_covariance() {
        let d = 3;
        let u = TrialFunction::unit_gaussian(d);
        for s in [0.5, 1.0] {
            let base = hs_fullspace(&u, s).unwrap();
            for lam in [0.5, 2.0] {
                let v = u.scaled(lam, &alloc::vec![0.0; d]).unwrap();
                let scaled = hs_fullspace(&v, s).unwrap();
                assert!(
                    (scaled - math::powf(lam, 2.0 * s) * base).abs() < 1e-9 * scaled.abs(),
                    "lam={lam} s={s}"
                );
            }
        }
    }

    #[test]
    fn bump_kinetic_s1_matches_cube_seminorm() {
        let u = TrialFunction::bump(alloc::vec![0.0], 1.0, 3).unwrap();
        let full = hs_fullspace(&u, 1.0).unwrap();
        let q = Cube::from_bounds(-1.0, 1.0, 1).unwrap();
        let cube = hs_seminorm_cube(&u, &q, 1.0, &gl(40)).unwrap();
        assert!((full - cube.value).abs() < 1e-8 * full, "{full} vs {}", cube.value);
    }

    #[test]
    fn bump_fractional_kinetic_parseval_limit() {
        // s -> 0 recovers the L2 norm (=1)
        for d in [1usize, 3] {
            let u = TrialFunction::bump(alloc::vec![0.0; d], 1.0, 3).unwrap();
            let v = match &u {
                TrialFunction::BumpCompact { radius, power, .. } => {
                    bump_fractional_kinetic(d, *radius, *power, 1e-6, d).unwrap()
                }
                _ => unreachable!(),
            };
            assert!((v - 1.0).abs() < 1e-4, "d={d}: {v}");
        }
    }

    #[test]
    fn bump_fractional_kinetic_below_hoelder_bound() {
        // ||u||^2_{Hdot^sigma} <= T_1^sigma on the unit-L2 family by
        // Hoelder in Fourier space
        let u = TrialFunction::bump(alloc::vec![0.0, 0.0, 0.0], 1.0, 3).unwrap();
        let t1 = hs_fullspace(&u, 1.0).unwrap();
        for sigma in [0.25, 0.5, 0.75] {
            let v = hs_fullspace(&u, sigma).unwrap();
            assert!(v > 0.0 && v <= math::powf(t1, sigma) + 1e-7, "sigma={sigma}: {v} vs {t1}");
        }
    }

    #[test]
    fn coordinate_seminorm_oracles() {
        // u(x) = x on [0,1]: s = 1 gives 1 exactly
        let u = CoordinateFn { dim: 1, axis: 0 };
        let q = Cube::from_bounds(0.0, 1.0, 1).unwrap();
        let v1 = hs_seminorm_cube(&u, &q, 1.0, &gl(8)).unwrap();
        assert!((v1.value - 1.0).abs() < 1e-13, "{}", v1.value);
        // s = 1/4: c_{1,1/4} * 8/15
        let v = hs_seminorm_cube(&u, &q, 0.25, &gl(24)).unwrap();
        let exact = fractional_constant(1, 0.25).unwrap() * 8.0 / 15.0;
        assert!((v.value - exact).abs() < 1e-5 * exact, "{} vs {exact}", v.value);
        // doubling the order moves the value by less than 1e-6
        let v2 = hs_seminorm_cube(&u, &q, 0.25, &gl(48)).unwrap();
        assert!((v.value - v2.value).abs() < 1e-6, "{} vs {}", v.value, v2.value);
    }

    #[test]
    fn riesz_uniform_interval_oracle() {
        let rho = Density::uniform(Cube::from_bounds(0.0, 1.0, 1).unwrap());
        let est = riesz_energy(&rho, 0.5).unwrap();
        assert!((est.value - 8.0 / 3.0).abs() < 1e-11, "{}", est.value);
    }

    #[test]
    fn riesz_gaussian_concentric_oracle() {
        // E|Z|^{-gamma} = (2 tau^2)^{-gamma/2} Gamma((d-gamma)/2)/Gamma(d/2)
        for (d, gamma) in [(1usize, 0.5), (2, 1.0), (3, 1.0), (3, 2.0)] {
            let u = TrialFunction::unit_gaussian(d);
            let rho = u.power_density(1.0).unwrap();
            let est = riesz_energy(&rho, gamma).unwrap();
            let exact = math::powf(2.0, -gamma / 2.0)
                * math::gamma((d as f64 - gamma) / 2.0)
                / math::gamma(d as f64 / 2.0);
            assert!(
                (est.value - exact).abs() < 1e-9 * exact,
                "(d,gamma)=({d},{gamma}): {} vs {exact}",
                est.value
            );
        }
    }

    #[test]
    fn riesz_far_field_limit() {
        // two narrow unit gaussians at distance L: cross term ~ L^{-gamma}
        let d = 3;
        let l = 100.0;
        let width = 1.0;
        let rho = Density::gaussian_mixture(
            d,
            alloc::vec![
                GaussianComponent {
                    weight: 1.0,
                    center: alloc::vec![0.0, 0.0, 0.0],
                    width: width / math::sqrt(2.0),
                },
                GaussianComponent {
                    weight: 1.0,
                    center: alloc::vec![l, 0.0, 0.0],
                    width: width / math::sqrt(2.0),
                },
            ],
        )
        .unwrap();
        let gamma = 2.0;
        let est = riesz_energy(&rho, gamma).unwrap();
        // two self terms, each (2 tau^2)^{-1} Gamma(1/2)/Gamma(3/2) at tau^2 = w^2
        let tau2 = width * width;
        let self_term = 2.0 * math::powf(2.0 * tau2, -1.0) * math::gamma(0.5) / math::gamma(1.5);
        let cross = est.value - self_term;
        let expect = 2.0 * math::powf(l, -gamma);
        assert!(
            (cross - expect).abs() < 1e-3 * expect,
            "cross {cross} vs {expect}"
        );
    }

    #[test]
    fn riesz_scaling_homogeneity() {
        // rho_lambda(x) = lambda^d rho(lambda x) multiplies the energy by
        // lambda^gamma; realized through the width of the squared gaussian
        let d = 2;
        let gamma = 1.0;
        let u = TrialFunction::unit_gaussian(d);
        let base = riesz_energy(&u.power_density(1.0).unwrap(), gamma).unwrap().value;
        let lam = 2.0;
        let v = u.scaled(lam, &alloc::vec![0.0; d]).unwrap();
        let scaled = riesz_energy(&v.power_density(1.0).unwrap(), gamma).unwrap().value;
        assert!((scaled - lam * base).abs() < 1e-9 * scaled.abs());
    }

    #[test]
    fn riesz_rejects_divergent_gamma() {
        let rho = TrialFunction::unit_gaussian(1).power_density(1.0).unwrap();
        assert!(matches!(riesz_energy(&rho, 1.0), Err(Error::Divergence(_))));
    }

    #[test]
    fn cross_riesz_far_field() {
        // two unit-mass bumps: the interaction approaches dist^{-gamma}
        let u = TrialFunction::bump(alloc::vec![0.0, 0.0, 0.0], 1.0, 3).unwrap();
        let (p, support) = u.radial_square_profile(1.0);
        let r0 = support.unwrap();
        let gamma = 2.0;
        let d = 3;
        let dist = 50.0;
        let v = cross_riesz_radial(&p, r0, &p, r0, dist, gamma, d).unwrap();
        let expect = math::powf(dist, -gamma);
        assert!((v - expect).abs() < 1e-3 * expect, "{v} vs {expect}");
        // overlap rejected
        assert!(cross_riesz_radial(&p, r0, &p, r0, 1.5, gamma, d).is_err());
    }

    #[test]
    fn hardy_functional_gaussian_oracle() {
        // d=3, s=1 at the origin: 2
        let u = TrialFunction::unit_gaussian(3);
        let v = hardy_functional(&u, 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
        // closed form check across parameters:
        // Gamma((d-2s)/2)/Gamma(d/2) * w^{-2s}
        for (d, s) in [(3usize, 0.5), (2, 0.5), (1, 0.25)] {
            let u = TrialFunction::unit_gaussian(d);
            let v = hardy_functional(&u, s).unwrap();
            let exact = math::gamma((d as f64 - 2.0 * s) / 2.0) / math::gamma(d as f64 / 2.0);
            assert!(
                (v - exact).abs() < 1e-8 * exact,
                "(d,s)=({d},{s}): {v} vs {exact}"
            );
        }
    }

    #[test]
    fn hardy_functional_support_outside_unit_ball() {
        // kernel <= 1 on the support, so the value is at most ||u||^2
        let u = TrialFunction::bump(alloc::vec![3.0, 0.0, 0.0], 1.0, 3).unwrap();
        let v = hardy_functional(&u, 1.0).unwrap();
        assert!(v <= 1.0 + 1e-10, "{v}");
        assert!(v > 0.0);
    }

    #[test]
    fn hardy_functional_translation_decay() {
        let mut prev = f64::INFINITY;
        for shift in [0.0, 2.0, 5.0, 10.0] {
            let u = TrialFunction::gaussian(alloc::vec![shift, 0.0, 0.0], 1.0).unwrap();
            let v = hardy_functional(&u, 1.0).unwrap();
            assert!(v < prev + 1e-12, "shift={shift}");
            prev = v;
        }
        assert!(prev < 0.02);
    }

    #[test]
    fn hardy_inequality_gap_positive() {
        // kinetic - C_{d,s} hardy >= 0 on gaussians; unit gaussian at
        // (3, 1) has gap exactly 1
        let u = TrialFunction::unit_gaussian(3);
        let gap = hs_fullspace(&u, 1.0).unwrap()
            - hardy_constant(3, 1.0).unwrap() * hardy_functional(&u, 1.0).unwrap();
        assert!((gap - 1.0).abs() < 1e-6, "{gap}");
        for (d, s) in [(3usize, 0.5), (2, 0.5)] {
            for w in [0.3, 1.0, 3.0] {
                let u = TrialFunction::gaussian(alloc::vec![0.0; d], w).unwrap();
                let gap = hs_fullspace(&u, s).unwrap()
                    - hardy_constant(d, s).unwrap() * hardy_functional(&u, s).unwrap();
                assert!(gap > -1e-9, "(d,s,w)=({d},{s},{w}): {gap}");
            }
        }
    }

    #[test]
    fn ball_intersection_volumes() {
        // t = 0 recovers the full ball
        for d in 1..=4usize {
            let v = ball_intersection_volume(d, 0.0, 1.0).unwrap();
            assert!((v - math::unit_ball_volume(d)).abs() < 1e-9, "d={d}");
            assert_eq!(ball_intersection_volume(d, 2.0, 1.0).unwrap(), 0.0);
        }
        // d=4 quadrature agrees with the recursion at d=3 scaled sanity:
        // half-distance lens is positive and below the ball volume
        let v = ball_intersection_volume(3, 1.0, 1.0).unwrap();
        assert!((v - PI * 5.0 / 12.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn fdll_constant_closed_form_1d() {
        // d=1, gamma=1/2: J(t) = (8 sqrt2/3) t^{-1/2}, c = 3/(8 sqrt2)
        let c = fdll_constant(1, 0.5).unwrap();
        let exact = 3.0 / (8.0 * math::sqrt(2.0));
        assert!((c - exact).abs() < 1e-9, "{c} vs {exact}");
    }

    #[test]
    fn fdll_reconstructs_kernel() {
        for (d, gamma) in [(1usize, 0.5), (2, 1.0), (3, 1.0), (3, 2.0)] {
            for t in [0.5, 1.0, 2.0, 4.0] {
                let v = fdll_reconstruct(d, gamma, t).unwrap();
                let exact = math::powf(t, -gamma);
                assert!(
                    (v - exact).abs() < 1e-4 * exact,
                    "(d,gamma,t)=({d},{gamma},{t}): {v} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn loss_identity_exact() {
        // chi = 1 and x = y cases are trivially zero
        assert_eq!(loss_identity_residual(1.0, 1.0, (0.3, 0.1), (0.7, -0.2)).unwrap(), 0.0);
        let r = loss_identity_residual(0.4, 0.4, (0.5, 0.5), (0.5, 0.5)).unwrap();
        assert!(r.abs() < 1e-15);
        // raised-cosine chi at distinct points, complex u
        let chi = |t: f64| (0.5 * (1.0 + math::cos(PI * t.clamp(0.0, 1.0)))).min(1.0);
        let u = |t: f64| (math::exp(-t * t), math::sin(t) * math::exp(-t * t));
        for (x, y) in [(0.1, 0.9), (0.3, 0.35), (0.0, 1.0), (0.42, 0.87)] {
            let r = loss_identity_residual(chi(x), chi(y), u(x), u(y)).unwrap();
            assert!(r.abs() < 1e-12, "x={x} y={y}: {r}");
        }
        assert!(loss_identity_residual(1.2, 0.0, (1.0, 0.0), (1.0, 0.0)).is_err());
    }

    #[test]
    fn energy_breakdown_unit_gaussian() {
        let u = TrialFunction::unit_gaussian(3);
        let e = EnergyBreakdown::compute(&u, 1.0).unwrap();
        assert!((e.kinetic - 1.5).abs() < 1e-6);
        assert!((e.hardy.unwrap() - 2.0).abs() < 1e-8);
        assert!((e.riesz - 1.0).abs() < 1e-9);
        assert!((e.l2 - 1.0).abs() < 1e-12);
        assert!((e.lp - math::powf(PI, -1.0) * math::powf(0.6, 1.5)).abs() < 1e-12);
        // hardy gap invariant
        let c = hardy_constant(3, 1.0).unwrap();
        assert!(e.kinetic - c * e.hardy.unwrap() >= -1e-9);
    }

    #[test]
    fn superadditivity_over_partition() {
        // sum of cube seminorms is below the full-space form
        let u = TrialFunction::unit_gaussian(1);
        let root = Cube::from_bounds(-6.0, 6.0, 1).unwrap();
        let cubes = root.subdivide(4 as u32).unwrap();
        for s in [0.5, 1.0] {
            let mut total = 0.0;
            for q in &cubes {
                total += hs_seminorm_cube(&u, q, s, &gl(20)).unwrap().value;
            }
            let full = hs_fullspace(&u, s).unwrap();
            assert!(total <= full + 1e-8, "s={s}: {total} vs {full}");
            assert!(total > 0.2 * full);
        }
    }

    #[test]
    fn seminorm_dilation_covariance() {
        // normalized scaling: ||u_lam||^2_{Hdot^s(Q/lam)} = lam^{2s} ||u||^2_{Hdot^s(Q)}
        let u = TrialFunction::unit_gaussian(1);
        let q = Cube::from_bounds(-2.0, 2.0, 1).unwrap();
        let lam = 2.0;
        let q_scaled = Cube::from_bounds(-1.0, 1.0, 1).unwrap();
        for s in [0.5, 1.0] {
            let base = hs_seminorm_cube(&u, &q, s, &gl(24)).unwrap().value;
            let v = u.scaled(lam, &[0.0]).unwrap();
            let scaled = hs_seminorm_cube(&v, &q_scaled, s, &gl(24)).unwrap().value;
            assert!(
                (scaled - math::powf(lam, 2.0 * s) * base).abs() < 1e-8 * scaled.abs(),
                "s={s}: {scaled} vs {}",
                math::powf(lam, 2.0 * s) * base
            );
        }
    }

    #[test]
    fn fourier_interpolation_inequality_on_gaussians() {
        // ||U||_{Hdot^s}^theta ||U||_{L2}^{1-theta} >= ||U||_{Hdot^{theta s}}
        let s = 1.0;
        for d in [1usize, 3] {
            let u = TrialFunction::unit_gaussian(d);
            let hs = hs_fullspace(&u, s).unwrap();
            for theta in [0.25, 0.5, 0.75] {
                let lhs = math::powf(hs, theta);
                let rhs = hs_fullspace(&u, theta * s).unwrap();
                assert!(lhs >= rhs - 1e-9, "d={d} theta={theta}: {lhs} vs {rhs}");
            }
        }
    }
}
