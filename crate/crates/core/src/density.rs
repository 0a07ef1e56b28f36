//! Nonnegative densities and one-body trial functions.
//!
//! Gaussian mixtures carry closed forms for cube masses (products of error
//! functions), which is what keeps the covering campaigns fast. Indicator
//! mixtures are exact on boxes. Grid-sampled densities interpolate
//! multilinearly and clamp at zero.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::math;
use crate::quadrature::{self, ErrorEstimate, QuadratureRule};

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// One Gaussian component: `w (2 pi s^2)^{-d/2} exp(-|x-c|^2 / (2 s^2))`,
/// total mass exactly `w`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianComponent {
    pub weight: f64,
    pub center: Vec<f64>,
    pub width: f64,
}

/// Uniform grid samples over a bounding cube, multilinear interpolation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridData {
    pub bounds: Cube,
    /// Samples per axis (same count on every axis), >= 2.
    pub per_axis: usize,
    /// Row-major with axis 0 fastest.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DensityKind {
    GaussianMixture(Vec<GaussianComponent>),
    IndicatorMixture(Vec<(f64, Cube)>),
    GridSampled(GridData),
}

/// Nonnegative integrable density.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Density {
    pub dim: usize,
    pub kind: DensityKind,
}

impl Density {
    pub fn gaussian_mixture(dim: usize, components: Vec<GaussianComponent>) -> Result<Self> {
        for c in &components {
            if !(c.weight >= 0.0) || !(c.width > 0.0) {
                return Err(Error::invalid("gaussian components need weight >= 0, width > 0"));
            }
            if c.center.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: c.center.len() });
            }
        }
        Ok(Density { dim, kind: DensityKind::GaussianMixture(components) })
    }

    pub fn uniform(cube: Cube) -> Self {
        Density { dim: cube.dim(), kind: DensityKind::IndicatorMixture(alloc::vec![(1.0, cube)]) }
    }

    pub fn indicator_mixture(dim: usize, parts: Vec<(f64, Cube)>) -> Result<Self> {
        for (w, q) in &parts {
            if !(*w >= 0.0) {
                return Err(Error::invalid("indicator weights must be nonnegative"));
            }
            if q.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: q.dim() });
            }
        }
        Ok(Density { dim, kind: DensityKind::IndicatorMixture(parts) })
    }

    pub fn grid_sampled(bounds: Cube, per_axis: usize, values: Vec<f64>) -> Result<Self> {
        let d = bounds.dim();
        if per_axis < 2 {
            return Err(Error::invalid("grid needs at least 2 samples per axis"));
        }
        if values.len() != per_axis.pow(d as u32) {
            return Err(Error::invalid("grid sample count does not match shape"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("grid samples must be finite and nonnegative"));
        }
        Ok(Density { dim: d, kind: DensityKind::GridSampled(GridData { bounds, per_axis, values }) })
    }

    /// Pointwise value; clamped at zero for interpolated kinds.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DensityKind::GaussianMixture(parts) => {
                let d = self.dim as f64;
                let mut acc = 0.0;
                for c in parts {
                    let r2: f64 =
                        c.center.iter().zip(x).map(|(ci, xi)| (xi - ci) * (xi - ci)).sum();
                    let norm = math::powf(
                        2.0 * core::f64::consts::PI * c.width * c.width,
                        -d / 2.0,
                    );
                    acc += c.weight * norm * math::exp(-r2 / (2.0 * c.width * c.width));
                }
                acc
            }
            DensityKind::IndicatorMixture(parts) => parts
                .iter()
                .filter(|(_, q)| q.contains_closed(x).unwrap_or(false))
                .map(|(w, _)| *w)
                .sum(),
            DensityKind::GridSampled(grid) => grid.interpolate(x).max(0.0),
        }
    }

    /// Total mass over all of space.
    pub fn total_mass(&self) -> f64 {
        match &self.kind {
            DensityKind::GaussianMixture(parts) => parts.iter().map(|c| c.weight).sum(),
            DensityKind::IndicatorMixture(parts) =>
                parts.iter().map(|(w, q)| w * q.volume()).sum(),
            DensityKind::GridSampled(grid) => {
                grid_mass(self, grid, &grid.bounds.clone()).map(|e| e.value).unwrap_or(f64::NAN)
            }
        }
    }

    /// `int_Q rho` with a propagated error estimate. Closed form for
    /// Gaussian and indicator mixtures, quadrature for grids.
    pub fn mass(&self, q: &Cube) -> Result<ErrorEstimate> {
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: q.dim() });
        }
        match &self.kind {
            DensityKind::GaussianMixture(parts) => {
                let mut value = 0.0;
                for c in parts {
                    let mut m = c.weight;
                    for axis in 0..self.dim {
                        m *= interval_gaussian_mass(
                            q.lower(axis),
                            q.upper(axis),
                            c.center[axis],
                            c.width,
                        );
                    }
                    value += m;
                }
                Ok(ErrorEstimate { value, stderr: 8.0 * f64::EPSILON * value.abs() })
            }
            DensityKind::IndicatorMixture(parts) => {
                let value: f64 =
                    parts.iter().map(|(w, b)| w * q.box_intersection_volume(b)).sum();
                Ok(ErrorEstimate { value, stderr: 8.0 * f64::EPSILON * value.abs() })
            }
            DensityKind::GridSampled(grid) => grid_mass(self, grid, q),
        }
    }

    /// `f_R(u) = int_{B_R(u)} rho`.
    pub fn ball_mass(&self, u: &[f64], radius: f64) -> Result<ErrorEstimate> {
        if !(radius > 0.0) {
            return Err(Error::invalid("ball radius must be positive"));
        }
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: u.len() });
        }
        match &self.kind {
            DensityKind::GaussianMixture(parts) => {
                let mut value = 0.0;
                let mut stderr = 0.0;
                for c in parts {
                    let est = gaussian_ball_mass(c, u, radius, self.dim)?;
                    value += est.value;
                    stderr += est.stderr;
                }
                Ok(ErrorEstimate { value, stderr })
            }
            DensityKind::IndicatorMixture(parts) => {
                let mut value = 0.0;
                let mut stderr = 0.0;
                for (w, b) in parts {
                    let est = ball_box_intersection(u, radius, b)?;
                    value += w * est.value;
                    stderr += w * est.stderr;
                }
                Ok(ErrorEstimate { value, stderr })
            }
            DensityKind::GridSampled(_) => ball_mass_polar(self, u, radius),
        }
    }

    /// Grid lower bound for the Hardy-Littlewood maximal function
    /// `rho*(u) = sup_R |B_R|^{-1} f_R(u)`, refined once around the argmax.
    pub fn maximal_function(&self, u: &[f64], grid: &RadialGrid) -> Result<f64> {
        let radii = grid.points()?;
        let vd = math::unit_ball_volume(self.dim);
        let avg = |r: f64| -> Result<f64> {
            Ok(self.ball_mass(u, r)?.value / (vd * math::powf(r, self.dim as f64)))
        };
        let mut best = f64::NEG_INFINITY;
        let mut best_idx = 0;
        for (i, r) in radii.iter().enumerate() {
            let a = avg(*r)?;
            if a > best {
                best = a;
                best_idx = i;
            }
        }
        // one golden-section refinement around the argmax, in log radius
        let lo = if best_idx == 0 { radii[0] } else { radii[best_idx - 1] };
        let hi = if best_idx + 1 == radii.len() { radii[best_idx] } else { radii[best_idx + 1] };
        let mut a = math::ln(lo);
        let mut b = math::ln(hi);
        let phi = (math::sqrt(5.0) - 1.0) / 2.0;
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let mut f1 = avg(math::exp(x1))?;
        let mut f2 = avg(math::exp(x2))?;
        for _ in 0..40 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = avg(math::exp(x2))?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = avg(math::exp(x1))?;
            }
        }
        Ok(best.max(f1).max(f2))
    }

    /// Same density with all weights/samples multiplied by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) {
            return Err(Error::invalid("scale factor must be nonnegative"));
        }
        let kind = match &self.kind {
            DensityKind::GaussianMixture(parts) => DensityKind::GaussianMixture(
                parts
                    .iter()
                    .map(|c| GaussianComponent {
                        weight: c.weight * factor,
                        center: c.center.clone(),
                        width: c.width,
                    })
                    .collect(),
            ),
            DensityKind::IndicatorMixture(parts) => DensityKind::IndicatorMixture(
                parts.iter().map(|(w, q)| (w * factor, q.clone())).collect(),
            ),
            DensityKind::GridSampled(grid) => DensityKind::GridSampled(GridData {
                bounds: grid.bounds.clone(),
                per_axis: grid.per_axis,
                values: grid.values.iter().map(|v| v * factor).collect(),
            }),
        };
        Ok(Density { dim: self.dim, kind })
    }
}

/// Geometric radius grid for maximal-function queries.
#[derive(Debug, Clone, Copy)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, points: usize) -> Self {
        RadialGrid { r_min, r_max, points }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::invalid("empty radius grid"));
        }
        if !(self.r_min > 0.0 && self.r_max >= self.r_min) {
            return Err(Error::invalid("radius grid needs 0 < r_min <= r_max"));
        }
        if self.points == 1 {
            return Ok(alloc::vec![self.r_min]);
        }
        let ratio = math::ln(self.r_max / self.r_min) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| self.r_min * math::exp(ratio * i as f64))
            .collect())
    }
}

fn interval_gaussian_mass(lo: f64, hi: f64, center: f64, width: f64) -> f64 {
    0.5 * (math::erf((hi - center) / (width * SQRT_2))
        - math::erf((lo - center) / (width * SQRT_2)))
}

/// Mass of a single normalized Gaussian inside `B_R(u)`: radially reduced
/// (1-D for the concentric case, (r, theta) otherwise).
fn gaussian_ball_mass(
    c: &GaussianComponent,
    u: &[f64],
    radius: f64,
    d: usize,
) -> Result<ErrorEstimate> {
    let rule = QuadratureRule::gauss_legendre(24)?;
    if d == 1 {
        let v = c.weight * interval_gaussian_mass(u[0] - radius, u[0] + radius, c.center[0], c.width);
        return Ok(ErrorEstimate { value: v, stderr: 8.0 * f64::EPSILON * v.abs() });
    }
    let m = math::dist(u, &c.center);
    let w2 = c.width * c.width;
    let df = d as f64;
    let norm = math::powf(2.0 * core::f64::consts::PI * w2, -df / 2.0);
    // integration is over the ball; clip the radial range where the
    // integrand is numerically zero
    let upper = radius.min(m + 14.0 * c.width);
    if m > radius + 14.0 * c.width {
        return Ok(ErrorEstimate { value: 0.0, stderr: 0.0 });
    }
    if m == 0.0 {
        let sd = math::unit_sphere_area(d);
        let est = quadrature::integrate_radial(
            |r| sd * math::powf(r, df - 1.0) * math::exp(-r * r / (2.0 * w2)),
            0.0,
            Some(upper),
            &rule,
        )?;
        return Ok(ErrorEstimate {
            value: c.weight * norm * est.value,
            stderr: c.weight * norm * est.stderr,
        });
    }
    // spherical average: int_{S^{d-1}} g = |S^{d-2}| int_0^pi g sin^{d-2}
    let sd2 = math::unit_sphere_area(d - 1);
    let angular = QuadratureRule::gauss_legendre(48)?;
    let inner = |r: f64| -> f64 {
        let mut acc = math::SumAcc::new();
        for (theta, wq) in angular.mapped(0.0, core::f64::consts::PI) {
            let q2 = r * r + m * m - 2.0 * r * m * math::cos(theta);
            let ang = if d == 2 { 1.0 } else { math::powf(math::sin(theta), df - 2.0) };
            acc.push(wq * ang * math::exp(-q2 / (2.0 * w2)));
        }
        sd2 * acc.total()
    };
    let est = quadrature::integrate_radial(
        |r| math::powf(r, df - 1.0) * inner(r),
        0.0,
        Some(upper),
        &rule,
    )?;
    Ok(ErrorEstimate {
        value: c.weight * norm * est.value,
        stderr: c.weight * norm * est.stderr,
    })
}

/// `|B_R(u) ∩ box|` by nested 1-D adaptive integration of chord lengths.
fn ball_box_intersection(u: &[f64], radius: f64, b: &Cube) -> Result<ErrorEstimate> {
    let d = b.dim();
    let rule = QuadratureRule::gauss_legendre(16)?;
    match d {
        1 => {
            let lo = b.lower(0).max(u[0] - radius);
            let hi = b.upper(0).min(u[0] + radius);
            let v = (hi - lo).max(0.0);
            Ok(ErrorEstimate { value: v, stderr: 4.0 * f64::EPSILON * v })
        }
        2 => {
            let lo = b.lower(0).max(u[0] - radius);
            let hi = b.upper(0).min(u[0] + radius);
            if hi <= lo {
                return Ok(ErrorEstimate { value: 0.0, stderr: 0.0 });
            }
            let chord = |x: f64| -> f64 {
                let h2 = radius * radius - (x - u[0]) * (x - u[0]);
                if h2 <= 0.0 {
                    return 0.0;
                }
                let h = math::sqrt(h2);
                let ylo = b.lower(1).max(u[1] - h);
                let yhi = b.upper(1).min(u[1] + h);
                (yhi - ylo).max(0.0)
            };
            quadrature::integrate_radial(chord, lo, Some(hi), &rule)
        }
        3 => {
            let lo = b.lower(2).max(u[2] - radius);
            let hi = b.upper(2).min(u[2] + radius);
            if hi <= lo {
                return Ok(ErrorEstimate { value: 0.0, stderr: 0.0 });
            }
            let slice = |z: f64| -> f64 {
                let r2 = radius * radius - (z - u[2]) * (z - u[2]);
                if r2 <= 0.0 {
                    return 0.0;
                }
                let r = math::sqrt(r2);
                let xlo = b.lower(0).max(u[0] - r);
                let xhi = b.upper(0).min(u[0] + r);
                if xhi <= xlo {
                    return 0.0;
                }
                let chord = |x: f64| -> f64 {
                    let h2 = r2 - (x - u[0]) * (x - u[0]);
                    if h2 <= 0.0 {
                        return 0.0;
                    }
                    let h = math::sqrt(h2);
                    let ylo = b.lower(1).max(u[1] - h);
                    let yhi = b.upper(1).min(u[1] + h);
                    (yhi - ylo).max(0.0)
                };
                quadrature::integrate_radial(chord, xlo, Some(xhi), &rule)
                    .map(|e| e.value)
                    .unwrap_or(0.0)
            };
            quadrature::integrate_radial(slice, lo, Some(hi), &rule)
        }
        _ => Err(Error::Capability(alloc::format!(
            "indicator ball mass supports d <= 3, got d = {d}"
        ))),
    }
}

/// Fallback polar-coordinate ball mass used by grid densities.
fn ball_mass_polar(rho: &Density, u: &[f64], radius: f64) -> Result<ErrorEstimate> {
    let d = rho.dim;
    let rule = QuadratureRule::gauss_legendre(16)?;
    match d {
        1 => {
            let est = quadrature::integrate_radial(
                |x| rho.eval(&[x]),
                u[0] - radius,
                Some(u[0] + radius),
                &rule,
            )?;
            Ok(est)
        }
        2 => {
            let angular = QuadratureRule::gauss_legendre(64)?;
            let f = |r: f64| -> f64 {
                let mut acc = math::SumAcc::new();
                for (theta, w) in angular.mapped(0.0, 2.0 * core::f64::consts::PI) {
                    acc.push(w * rho.eval(&[u[0] + r * math::cos(theta), u[1] + r * math::sin(theta)]));
                }
                r * acc.total()
            };
            quadrature::integrate_radial(f, 0.0, Some(radius), &rule)
        }
        3 => {
            let angular = QuadratureRule::gauss_legendre(32)?;
            let f = |r: f64| -> f64 {
                let mut acc = math::SumAcc::new();
                for (theta, wt) in angular.mapped(0.0, core::f64::consts::PI) {
                    for (phi, wp) in angular.mapped(0.0, 2.0 * core::f64::consts::PI) {
                        let x = [
                            u[0] + r * math::sin(theta) * math::cos(phi),
                            u[1] + r * math::sin(theta) * math::sin(phi),
                            u[2] + r * math::cos(theta),
                        ];
                        acc.push(wt * wp * math::sin(theta) * rho.eval(&x));
                    }
                }
                r * r * acc.total()
            };
            quadrature::integrate_radial(f, 0.0, Some(radius), &rule)
        }
        _ => Err(Error::Capability(alloc::format!(
            "polar ball mass supports d <= 3, got d = {d}"
        ))),
    }
}

/// Cell-by-cell integration: inside one grid cell the interpolant is
/// multilinear, so the 2-point tensor rule is exact up to the clamp.
fn grid_mass(rho: &Density, grid: &GridData, q: &Cube) -> Result<ErrorEstimate> {
    let d = grid.bounds.dim();
    let n = grid.per_axis;
    let h = grid.bounds.side / (n - 1) as f64;
    let node = 1.0 / math::sqrt(3.0);
    let cells = (n - 1).pow(d as u32);
    let mut acc = math::SumAcc::new();
    let mut x = alloc::vec![0.0; d];
    for flat in 0..cells {
        let mut rem = flat;
        let mut lo = alloc::vec![0.0; d];
        let mut hi = alloc::vec![0.0; d];
        let mut empty = false;
        for axis in 0..d {
            let i = rem % (n - 1);
            rem /= n - 1;
            let cl = grid.bounds.lower(axis) + h * i as f64;
            lo[axis] = cl.max(q.lower(axis));
            hi[axis] = (cl + h).min(q.upper(axis));
            if hi[axis] <= lo[axis] {
                empty = true;
                break;
            }
        }
        if empty {
            continue;
        }
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            for axis in 0..d {
                let half = (hi[axis] - lo[axis]) / 2.0;
                let mid = (hi[axis] + lo[axis]) / 2.0;
                let s = if corner >> axis & 1 == 1 { node } else { -node };
                x[axis] = mid + half * s;
                w *= half;
            }
            acc.push(w * rho.eval(&x));
        }
    }
    let value = acc.total();
    Ok(ErrorEstimate { value, stderr: 16.0 * f64::EPSILON * value.abs() })
}

impl GridData {
    fn interpolate(&self, x: &[f64]) -> f64 {
        let d = self.bounds.dim();
        let n = self.per_axis;
        let mut base = alloc::vec![0usize; d];
        let mut frac = alloc::vec![0.0; d];
        for axis in 0..d {
            let lo = self.bounds.lower(axis);
            let h = self.bounds.side / (n - 1) as f64;
            let t = (x[axis] - lo) / h;
            if t < 0.0 || t > (n - 1) as f64 {
                return 0.0;
            }
            let i = (math::floor(t) as usize).min(n - 2);
            base[axis] = i;
            frac[axis] = t - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut flat = 0usize;
            let mut stride = 1usize;
            for axis in 0..d {
                let hi = corner >> axis & 1 == 1;
                w *= if hi { frac[axis] } else { 1.0 - frac[axis] };
                flat += (base[axis] + hi as usize) * stride;
                stride *= n;
            }
            acc += w * self.values[flat];
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Trial functions
// ---------------------------------------------------------------------------

/// One-body trial function, L2-normalized by construction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TrialFunction {
    /// `(pi w^2)^{-d/4} exp(-|x-c|^2 / (2 w^2))`
    Gaussian { center: Vec<f64>, width: f64 },
    /// `A (1 - |x-c|^2/r^2)_+^p` with `A` normalizing the L2 norm to 1.
    BumpCompact { center: Vec<f64>, radius: f64, power: u32 },
}

impl TrialFunction {
    pub fn gaussian(center: Vec<f64>, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::invalid("gaussian width must be positive"));
        }
        Ok(TrialFunction::Gaussian { center, width })
    }

    pub fn unit_gaussian(d: usize) -> Self {
        TrialFunction::Gaussian { center: alloc::vec![0.0; d], width: 1.0 }
    }

    pub fn bump(center: Vec<f64>, radius: f64, power: u32) -> Result<Self> {
        if !(radius > 0.0) || power < 1 {
            return Err(Error::invalid("bump needs radius > 0 and power >= 1"));
        }
        Ok(TrialFunction::BumpCompact { center, radius, power })
    }

    pub fn dim(&self) -> usize {
        match self {
            TrialFunction::Gaussian { center, .. } => center.len(),
            TrialFunction::BumpCompact { center, .. } => center.len(),
        }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            TrialFunction::Gaussian { center, .. } => center,
            TrialFunction::BumpCompact { center, .. } => center,
        }
    }

    /// `v(x) = lam^{d/2} u(lam (x - shift))`; both families are closed
    /// under this map, so scaling collapses exactly.
    pub fn scaled(&self, dilation: f64, shift: &[f64]) -> Result<TrialFunction> {
        if !(dilation > 0.0) {
            return Err(Error::invalid("dilation must be positive"));
        }
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: shift.len() });
        }
        Ok(match self {
            TrialFunction::Gaussian { center, width } => TrialFunction::Gaussian {
                center: shift.iter().zip(center).map(|(s, c)| s + c / dilation).collect(),
                width: width / dilation,
            },
            TrialFunction::BumpCompact { center, radius, power } => TrialFunction::BumpCompact {
                center: shift.iter().zip(center).map(|(s, c)| s + c / dilation).collect(),
                radius: radius / dilation,
                power: *power,
            },
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TrialFunction::Gaussian { center, width } => {
                let d = center.len() as f64;
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                math::powf(core::f64::consts::PI * width * width, -d / 4.0)
                    * math::exp(-r2 / (2.0 * width * width))
            }
            TrialFunction::BumpCompact { center, radius, power } => {
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                let t = 1.0 - r2 / (radius * radius);
                if t <= 0.0 {
                    0.0
                } else {
                    self.bump_amplitude() * math::powi(t, *power as i32)
                }
            }
        }
    }

    fn bump_amplitude(&self) -> f64 {
        match self {
            TrialFunction::BumpCompact { center, radius, power } => {
                let d = center.len() as f64;
                let q = 2.0 * *power as f64;
                // int_{B_r} (1-|x|^2/r^2)^q = r^d pi^{d/2} Gamma(q+1)/Gamma(q+1+d/2)
                let norm2 = math::powf(*radius, d)
                    * math::powf(core::f64::consts::PI, d / 2.0)
                    * math::exp(math::ln_gamma(q + 1.0) - math::ln_gamma(q + 1.0 + d / 2.0));
                1.0 / math::sqrt(norm2)
            }
            _ => unreachable!(),
        }
    }

    /// L2 norm; 1 by construction for both families.
    pub fn l2_norm(&self) -> f64 {
        1.0
    }

    /// `int |u|^q dx`, closed form through gamma functions.
    pub fn lp_integral(&self, q: f64) -> Result<f64> {
        if !(q > 0.0) {
            return Err(Error::invalid("lp exponent must be positive"));
        }
        match self {
            TrialFunction::Gaussian { center, width } => {
                let d = center.len() as f64;
                // (pi w^2)^{(d/2)(1 - q/2)} (2/q)^{d/2}
                Ok(math::powf(core::f64::consts::PI * width * width, d / 2.0 * (1.0 - q / 2.0))
                    * math::powf(2.0 / q, d / 2.0))
            }
            TrialFunction::BumpCompact { center, radius, power } => {
                let d = center.len() as f64;
                let a = self.bump_amplitude();
                let pq = *power as f64 * q;
                Ok(math::powf(a, q)
                    * math::powf(*radius, d)
                    * math::powf(core::f64::consts::PI, d / 2.0)
                    * math::exp(math::ln_gamma(pq + 1.0) - math::ln_gamma(pq + 1.0 + d / 2.0)))
            }
        }
    }

    /// Gradient, closed form.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TrialFunction::Gaussian { center, width } => {
                let u = self.eval(x);
                center
                    .iter()
                    .zip(x)
                    .map(|(c, xi)| -u * (xi - c) / (width * width))
                    .collect()
            }
            TrialFunction::BumpCompact { center, radius, power } => {
                let r2: f64 = center.iter().zip(x).map(|(c, xi)| (xi - c) * (xi - c)).sum();
                let t = 1.0 - r2 / (radius * radius);
                if t <= 0.0 {
                    return alloc::vec![0.0; center.len()];
                }
                let a = self.bump_amplitude();
                let factor =
                    -a * (*power as f64) * math::powi(t, *power as i32 - 1) * 2.0 / (radius * radius);
                center.iter().zip(x).map(|(c, xi)| factor * (xi - c)).collect()
            }
        }
    }

    /// Partial derivative `D^alpha u` (Hermite factors for Gaussians; bumps
    /// only expose first-order derivatives).
    pub fn partial(&self, x: &[f64], alpha: &[usize]) -> Result<f64> {
        let order: usize = alpha.iter().sum();
        if order == 0 {
            return Ok(self.eval(x));
        }
        match self {
            TrialFunction::Gaussian { center, width } => {
                let mut v = self.eval(x);
                let sw = width * SQRT_2;
                for (axis, &a) in alpha.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    let z = (x[axis] - center[axis]) / sw;
                    let sign = if a % 2 == 1 { -1.0 } else { 1.0 };
                    v *= sign * math::hermite(a, z) / math::powi(sw, a as i32);
                }
                Ok(v)
            }
            TrialFunction::BumpCompact { .. } => {
                if order == 1 {
                    let axis = alpha.iter().position(|&a| a == 1).unwrap();
                    Ok(self.gradient(x)[axis])
                } else {
                    Err(Error::Capability(
                        "bump trial functions expose derivatives up to first order".into(),
                    ))
                }
            }
        }
    }

    /// The density `|u|^(2k)` as an explicit mixture when one exists
    /// (`k = 1` is the Born density; general `k` arises in the
    /// isoperimetric quotient).
    pub fn power_density(&self, k: f64) -> Result<Density> {
        if !(k > 0.0) {
            return Err(Error::invalid("power must be positive"));
        }
        match self {
            TrialFunction::Gaussian { center, width } => {
                let d = center.len() as f64;
                // |u|^{2k} is an unnormalized Gaussian of width w/sqrt(2k)
                let new_width = width / math::sqrt(2.0 * k);
                let amp = math::powf(core::f64::consts::PI * width * width, -d * k / 2.0);
                let mass = amp
                    * math::powf(2.0 * core::f64::consts::PI * new_width * new_width, d / 2.0);
                Density::gaussian_mixture(
                    center.len(),
                    alloc::vec![GaussianComponent {
                        weight: mass,
                        center: center.clone(),
                        width: new_width,
                    }],
                )
            }
            TrialFunction::BumpCompact { .. } => Err(Error::Capability(
                "bump squared densities are handled through their radial profile".into(),
            )),
        }
    }

    /// Radial profile of `|u|^{2k}` about the trial center, with the
    /// support radius when compact.
    pub fn radial_square_profile(&self, k: f64) -> (impl Fn(f64) -> f64 + '_, Option<f64>) {
        let this = self.clone();
        let f = move |r: f64| -> f64 {
            let mut x = alloc::vec![0.0; this.dim()];
            x.clone_from_slice(this.center());
            x[0] += r;
            math::powf(this.eval(&x), 2.0 * k)
        };
        let support = match self {
            TrialFunction::BumpCompact { radius, .. } => Some(*radius),
            TrialFunction::Gaussian { .. } => None,
        };
        (f, support)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gaussian_density(d: usize) -> Density {
        Density::gaussian_mixture(
            d,
            alloc::vec![GaussianComponent { weight: 1.0, center: alloc::vec![0.0; d], width: 1.0 }],
        )
        .unwrap()
    }

    #[test]
    fn uniform_mass_left_half() {
        let rho = Density::uniform(Cube::from_bounds(0.0, 1.0, 1).unwrap());
        let kids = Cube::from_bounds(0.0, 1.0, 1).unwrap().subdivide(2).unwrap();
        let m = rho.mass(&kids[0]).unwrap();
        assert!((m.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gaussian_mass_is_unit_on_wide_cube() {
        for d in 1..=3usize {
            let rho = unit_gaussian_density(d);
            let q = Cube::from_bounds(-12.0, 12.0, d).unwrap();
            let m = rho.mass(&q).unwrap();
            assert!((m.value - 1.0).abs() < 1e-10, "d={d}: {}", m.value);
        }
    }

    #[test]
    fn zero_density_mass() {
        let rho = Density::gaussian_mixture(2, alloc::vec![]).unwrap();
        let q = Cube::from_bounds(-1.0, 1.0, 2).unwrap();
        assert_eq!(rho.mass(&q).unwrap().value, 0.0);
    }

    #[test]
    fn mass_additive_over_children() {
        let rho = Density::gaussian_mixture(
            2,
            alloc::vec![
                GaussianComponent { weight: 1.0, center: alloc::vec![0.1, -0.3], width: 0.4 },
                GaussianComponent { weight: 2.0, center: alloc::vec![0.8, 0.5], width: 0.9 },
            ],
        )
        .unwrap();
        let q = Cube::from_bounds(-1.0, 1.5, 2).unwrap();
        let parent = rho.mass(&q).unwrap().value;
        let total: f64 = q
            .subdivide(3)
            .unwrap()
            .iter()
            .map(|c| rho.mass(c).unwrap().value)
            .sum();
        assert!((parent - total).abs() < 1e-9 * parent.abs());
    }

    #[test]
    fn ball_mass_disc_area() {
        // rho = 1 on a large box, R = 1 in d = 2 -> pi
        let rho = Density::uniform(Cube::from_bounds(-5.0, 5.0, 2).unwrap());
        let m = rho.ball_mass(&[0.0, 0.0], 1.0).unwrap();
        assert!((m.value - core::f64::consts::PI).abs() < 1e-9, "{}", m.value);
    }

    #[test]
    fn ball_mass_half_interval() {
        let rho = Density::uniform(Cube::from_bounds(0.0, 1.0, 1).unwrap());
        let m = rho.ball_mass(&[0.0], 0.5).unwrap();
        assert!((m.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ball_mass_gaussian_total() {
        for d in 1..=3usize {
            let rho = unit_gaussian_density(d);
            let m = rho.ball_mass(&alloc::vec![0.0; d], 14.0).unwrap();
            assert!((m.value - 1.0).abs() < 1e-9, "d={d}: {}", m.value);
        }
    }

    #[test]
    fn ball_mass_gaussian_offcenter_vs_cartesian() {
        // cross-check the (r, theta) reduction against tensor quadrature
        let rho = unit_gaussian_density(2);
        let u = [0.7, -0.2];
        let r = 1.3;
        let reduced = rho.ball_mass(&u, r).unwrap().value;
        // chord oracle: integrate the exact 1-D gaussian interval mass
        // along x, which is a smooth integrand
        let rule = QuadratureRule::gauss_legendre(16).unwrap();
        let chord = |x: f64| -> f64 {
            let h2 = r * r - (x - u[0]) * (x - u[0]);
            if h2 <= 0.0 {
                return 0.0;
            }
            let h = h2.sqrt();
            let gx = math::exp(-x * x / 2.0) / math::sqrt(2.0 * core::f64::consts::PI);
            gx * interval_gaussian_mass(u[1] - h, u[1] + h, 0.0, 1.0)
        };
        let cart = quadrature::integrate_radial(chord, u[0] - r, Some(u[0] + r), &rule)
            .unwrap()
            .value;
        assert!((reduced - cart).abs() < 1e-9, "{reduced} vs {cart}");
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let rho = unit_gaussian_density(1);
        assert!(rho.ball_mass(&[0.0], 0.0).is_err());
    }

    #[test]
    fn maximal_function_uniform_is_one() {
        let rho = Density::uniform(Cube::from_bounds(-50.0, 50.0, 1).unwrap());
        let grid = RadialGrid::new(0.01, 1.0, 64);
        for u in [-3.0, 0.0, 7.5] {
            let v = rho.maximal_function(&[u], &grid).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "u={u}: {v}");
        }
    }

    #[test]
    fn maximal_function_indicator_origin() {
        let rho = Density::uniform(Cube::from_bounds(-1.0, 1.0, 1).unwrap());
        let grid = RadialGrid::new(0.05, 4.0, 64);
        let v = rho.maximal_function(&[0.0], &grid).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn maximal_function_radial_decreasing_attains_center_value() {
        // For a radial decreasing density the maximal function at the
        // center equals the density there.
        let rho = unit_gaussian_density(3);
        let grid = RadialGrid::new(5e-4, 8.0, 96);
        let v = rho.maximal_function(&[0.0, 0.0, 0.0], &grid).unwrap();
        let center = rho.eval(&[0.0, 0.0, 0.0]);
        assert!((v - center).abs() < 1e-6 * center, "{v} vs {center}");
        // lower bound property against explicit radii
        let vd = math::unit_ball_volume(3);
        for r in grid.points().unwrap().iter().step_by(7) {
            let avg = rho.ball_mass(&[0.0, 0.0, 0.0], *r).unwrap().value
                / (vd * math::powi(*r, 3));
            assert!(v >= avg - 1e-12);
        }
    }

    #[test]
    fn maximal_function_monotone_in_density() {
        let rho = unit_gaussian_density(2);
        let double = rho.scaled(2.0).unwrap();
        let grid = RadialGrid::new(0.05, 5.0, 64);
        let u = [0.3, 0.4];
        let a = rho.maximal_function(&u, &grid).unwrap();
        let b = double.maximal_function(&u, &grid).unwrap();
        assert!(b >= 2.0 * a - 1e-12);
        assert!(rho.ball_mass(&u, 1.0).unwrap().value <= double.ball_mass(&u, 1.0).unwrap().value);
    }

    #[test]
    fn empty_radius_grid_rejected() {
        let rho = unit_gaussian_density(1);
        let grid = RadialGrid::new(0.1, 1.0, 0);
        assert!(rho.maximal_function(&[0.0], &grid).is_err());
    }

    #[test]
    fn grid_density_interpolates_and_clamps() {
        let bounds = Cube::from_bounds(0.0, 1.0, 1).unwrap();
        let rho = Density::grid_sampled(bounds, 3, alloc::vec![0.0, 1.0, 0.0]).unwrap();
        assert!((rho.eval(&[0.25]) - 0.5).abs() < 1e-14);
        assert_eq!(rho.eval(&[2.0]), 0.0);
        let m = rho.mass(&Cube::from_bounds(0.0, 1.0, 1).unwrap()).unwrap();
        assert!((m.value - 0.5).abs() < 1e-12, "{}", m.value);
    }

    #[test]
    fn trial_gaussian_is_normalized() {
        for d in 1..=3usize {
            let u = TrialFunction::unit_gaussian(d);
            assert!((u.lp_integral(2.0).unwrap() - 1.0).abs() < 1e-13, "d={d}");
        }
    }

    #[test]
    fn trial_bump_is_normalized() {
        let rule = QuadratureRule::gauss_legendre(32).unwrap();
        for d in 1..=3usize {
            let u = TrialFunction::bump(alloc::vec![0.0; d], 1.5, 3).unwrap();
            assert!((u.lp_integral(2.0).unwrap() - 1.0).abs() < 1e-12, "d={d}");
            // quadrature cross-check
            let q = Cube::from_bounds(-1.5, 1.5, d).unwrap();
            let m = quadrature::integrate_cube(|x| u.eval(x) * u.eval(x), &q, &rule).unwrap();
            assert!((m.value - 1.0).abs() < 1e-6, "d={d}: {}", m.value);
        }
    }

    #[test]
    fn scaling_preserves_norm_and_collapses() {
        let u = TrialFunction::gaussian(alloc::vec![0.5], 2.0).unwrap();
        let v = u.scaled(4.0, &[1.0]).unwrap();
        match &v {
            TrialFunction::Gaussian { center, width } => {
                assert!((center[0] - 1.125).abs() < 1e-14);
                assert!((width - 0.5).abs() < 1e-14);
            }
            _ => panic!("expected gaussian"),
        }
        assert!((v.lp_integral(2.0).unwrap() - 1.0).abs() < 1e-13);
        // pointwise check of v(x) = lam^{d/2} u(lam (x - shift))
        let x = [1.4];
        let lam: f64 = 4.0;
        let direct = lam.sqrt() * u.eval(&[lam * (x[0] - 1.0)]);
        assert!((v.eval(&x) - direct).abs() < 1e-13);
    }

    #[test]
    fn gaussian_partials_match_finite_differences() {
        let u = TrialFunction::gaussian(alloc::vec![0.2, -0.4], 0.8).unwrap();
        let x = [0.5, 0.1];
        let h = 1e-5;
        let fd = (u.eval(&[x[0] + h, x[1]]) - u.eval(&[x[0] - h, x[1]])) / (2.0 * h);
        let an = u.partial(&x, &[1, 0]).unwrap();
        assert!((fd - an).abs() < 1e-9, "{fd} vs {an}");
        let fd2 = (u.eval(&[x[0] + h, x[1]]) - 2.0 * u.eval(&x) + u.eval(&[x[0] - h, x[1]]))
            / (h * h);
        let an2 = u.partial(&x, &[2, 0]).unwrap();
        assert!((fd2 - an2).abs() < 1e-5, "{fd2} vs {an2}");
    }

    #[test]
    fn squared_gaussian_density_has_unit_mass() {
        let u = TrialFunction::unit_gaussian(3);
        let rho = u.power_density(1.0).unwrap();
        assert!((rho.total_mass() - 1.0).abs() < 1e-13);
        // |u(0)|^2 agrees
        assert!((rho.eval(&[0.0, 0.0, 0.0]) - u.eval(&[0.0, 0.0, 0.0]).powi(2)).abs() < 1e-13);
    }
}
