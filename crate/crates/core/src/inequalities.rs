//! Quotient evaluators and experiment drivers: interpolation quotients,
//! trial-state bounds on the coupled many-body constant, the explicit
//! constant pipeline, local uncertainty gaps, the assembled lower-bound
//! chain, and the indirect-energy (Lieb-Oxford style) checks.

use alloc::format;
use alloc::vec::Vec;

use crate::covering;
use crate::density::TrialFunction;
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::math;
use crate::optimize;
use crate::quadrature::{self, QuadratureRule};
use crate::report::InequalityReport;
use crate::seminorm::{self, SeminormFn};

/// Evaluated quotient with its parameters.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuotientResult {
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    pub d: usize,
    pub s: f64,
    pub lambda: Option<f64>,
    pub n_particles: Option<u64>,
    pub tol: f64,
}

impl QuotientResult {
    fn new(numerator: f64, denominator: f64, d: usize, s: f64, tol: f64) -> Result<Self> {
        if !(denominator > 0.0) {
            return Err(Error::invalid("quotient denominator must be positive"));
        }
        Ok(QuotientResult {
            numerator,
            denominator,
            quotient: numerator / denominator,
            d,
            s,
            lambda: None,
            n_particles: None,
            tol,
        })
    }
}

/// `int |grad u|^q dx` for radial trial functions, by radial quadrature.
fn gradient_lq_integral(u: &TrialFunction, q: f64) -> Result<f64> {
    let d = u.dim();
    let df = d as f64;
    let r_max = match u {
        TrialFunction::Gaussian { width, .. } => 16.0 * width,
        TrialFunction::BumpCompact { radius, .. } => *radius,
    };
    let rule = QuadratureRule::gauss_legendre(24)?;
    let center = u.center().to_vec();
    let sd = math::unit_sphere_area(d);
    let est = quadrature::integrate_radial(
        |r| {
            let mut x = center.clone();
            x[0] += r;
            let g = math::hypot_slice(&u.gradient(&x));
            math::powf(g, q) * math::powf(r, df - 1.0)
        },
        0.0,
        Some(r_max),
        &rule,
    )?;
    Ok(sd * est.value)
}

fn riesz_of_square(u: &TrialFunction, power: f64, gamma: f64) -> Result<crate::ErrorEstimate> {
    seminorm::riesz_energy(&u.power_density(power)?, gamma)
}

/// Gagliardo-Nirenberg quotient `kinetic / int |u|^{2(1+2s/d)}` at unit L2
/// norm; any trial function gives an upper bound on the sharp constant.
pub fn gn_quotient(u: &TrialFunction, s: f64) -> Result<QuotientResult> {
    let d = u.dim();
    let kinetic = seminorm::hs_fullspace(u, s)?;
    let lp = u.lp_integral(2.0 * (1.0 + 2.0 * s / d as f64))?;
    QuotientResult::new(kinetic, lp, d, s, 1e-9 * kinetic.abs())
}

/// Interpolation quotient `kinetic^{1-2s/d} riesz^{2s/d} / lp`, `0 < s < d/2`.
pub fn lt_interpolation_quotient(u: &TrialFunction, s: f64) -> Result<QuotientResult> {
    let d = u.dim();
    let beta = 2.0 * s / d as f64;
    if !(s > 0.0 && beta < 1.0) {
        return Err(Error::Divergence(format!(
            "interpolation quotient needs 0 < s < d/2 (got s={s}, d={d})"
        )));
    }
    let kinetic = seminorm::hs_fullspace(u, s)?;
    let riesz = riesz_of_square(u, 1.0, 2.0 * s)?;
    let lp = u.lp_integral(2.0 * (1.0 + beta))?;
    let numerator = math::powf(kinetic, 1.0 - beta) * math::powf(riesz.value, beta);
    let tol = numerator * (1e-9 + beta * riesz.stderr / riesz.value.max(1e-300));
    QuotientResult::new(numerator, lp, d, s, tol)
}

/// Hardy-subtracted interpolation quotient
/// `(kinetic - C_{d,s} hardy)^{1-2s/d} riesz^{2s/d} / lp`.
pub fn hlt_interpolation_quotient(u: &TrialFunction, s: f64) -> Result<QuotientResult> {
    let d = u.dim();
    let beta = 2.0 * s / d as f64;
    if !(s > 0.0 && beta < 1.0) {
        return Err(Error::Divergence(format!(
            "interpolation quotient needs 0 < s < d/2 (got s={s}, d={d})"
        )));
    }
    let kinetic = seminorm::hs_fullspace(u, s)?;
    let hardy = seminorm::hardy_functional(u, s)?;
    let gap = kinetic - seminorm::hardy_constant(d, s)? * hardy;
    let gap_tol = 1e-8 * kinetic.abs().max(1.0);
    if gap < -gap_tol {
        return Err(Error::Internal(format!(
            "hardy gap {gap:.3e} is negative beyond tolerance; inconsistent quadrature"
        )));
    }
    let gap = gap.max(0.0);
    let riesz = riesz_of_square(u, 1.0, 2.0 * s)?;
    let lp = u.lp_integral(2.0 * (1.0 + beta))?;
    let numerator = math::powf(gap, 1.0 - beta) * math::powf(riesz.value, beta);
    QuotientResult::new(numerator, lp, d, s, numerator * 1e-8 + gap_tol)
}

/// Isoperimetric-type quotient
/// `(int |grad u|^{2s})^{1-2s/d} (riesz of |u|^{2s})^{2s/d} / int |u|^{2s(1+2s/d)}`
/// for `d >= 2` and `1/2 <= s < d/2`.
pub fn iso_quotient(u: &TrialFunction, s: f64) -> Result<QuotientResult> {
    let d = u.dim();
    let beta = 2.0 * s / d as f64;
    if d < 2 || !(s >= 0.5 && beta < 1.0) {
        return Err(Error::invalid(format!(
            "isoperimetric quotient needs d >= 2 and 1/2 <= s < d/2 (got s={s}, d={d})"
        )));
    }
    let grad = gradient_lq_integral(u, 2.0 * s)?;
    let riesz = riesz_of_square(u, s, 2.0 * s)?;
    let lp = u.lp_integral(2.0 * s * (1.0 + beta))?;
    let numerator = math::powf(grad, 1.0 - beta) * math::powf(riesz.value, beta);
    let tol = numerator * (1e-8 + beta * riesz.stderr / riesz.value.max(1e-300));
    QuotientResult::new(numerator, lp, d, s, tol)
}

/// Product-state energy quotient
/// `[N kinetic + lambda (N(N-1)/2) riesz] / [N^{1+2s/d} lp]`,
/// an upper bound on the coupled many-body constant.
pub fn product_state_quotient(
    u: &TrialFunction,
    n: u64,
    lambda: f64,
    s: f64,
) -> Result<QuotientResult> {
    if n < 2 {
        return Err(Error::invalid("product-state quotient needs N >= 2"));
    }
    if !(lambda >= 0.0) {
        return Err(Error::invalid("lambda must be nonnegative"));
    }
    let d = u.dim();
    let beta = 2.0 * s / d as f64;
    if !(beta < 1.0) {
        return Err(Error::Divergence("riesz energy diverges for 2s >= d".into()));
    }
    let kinetic = seminorm::hs_fullspace(u, s)?;
    let riesz = riesz_of_square(u, 1.0, 2.0 * s)?;
    let lp = u.lp_integral(2.0 * (1.0 + beta))?;
    let nf = n as f64;
    let numerator = nf * kinetic + lambda * nf * (nf - 1.0) / 2.0 * riesz.value;
    let denominator = math::powf(nf, 1.0 + beta) * lp;
    let mut out = QuotientResult::new(
        numerator,
        denominator,
        d,
        s,
        (nf * kinetic * 1e-9 + lambda * nf * nf * riesz.stderr) / denominator,
    )?;
    out.lambda = Some(lambda);
    out.n_particles = Some(n);
    Ok(out)
}

/// The closed form and an independent grid infimum of
/// `inf_{t>0} (1 + t/2) t^{-2s/d} = (1-2s/d)^{-1+2s/d} (d/4s)^{2s/d}`.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MuOptimizedRatio {
    pub closed_form: f64,
    pub grid_infimum: f64,
    pub argmin: f64,
}

pub fn mu_optimized_ratio(s: f64, d: usize) -> Result<MuOptimizedRatio> {
    let beta = 2.0 * s / d as f64;
    if !(s > 0.0 && beta < 1.0) {
        return Err(Error::invalid("mu optimization needs 0 < 2s < d"));
    }
    let closed_form =
        math::powf(1.0 - beta, -1.0 + beta) * math::powf(d as f64 / (4.0 * s), beta);
    let objective = |ln_t: f64| {
        let t = math::exp(ln_t);
        (1.0 + t / 2.0) * math::powf(t, -beta)
    };
    let (ln_t, grid_infimum) = optimize::grid_golden_min(objective, -14.0, 14.0, 2049, 80)?;
    Ok(MuOptimizedRatio { closed_form, grid_infimum, argmin: math::exp(ln_t) })
}

/// Inputs of the explicit-constant pipeline (the s = 1, d = 3 chain built
/// from the Sobolev and Poincare-Sobolev constants and the covering
/// constant `a`).
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PipelineConfig {
    pub c_sobolev: f64,
    pub c_poincare: f64,
    pub a: f64,
    pub grid: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let pi = core::f64::consts::PI;
        PipelineConfig {
            c_sobolev: 0.75 * math::powf(2.0 * pi * pi, 2.0 / 3.0),
            c_poincare: 27.0
                / (16.0
                    * math::powi(1.0 + math::powf(3.0, 2.0 / 3.0), 2)
                    * math::powf(2.0 * pi, 4.0 / 3.0)),
            a: 4.0 + math::sqrt(186.0) / 3.0,
            grid: 1024,
        }
    }
}

/// Maximize `C(eps) = min{(1-eps) C_P, C_S} / Lambda_0(eps)^{2/3}` with
/// `Lambda_0 = a (1 + 6 C_P (1/eps - 1))` over `eps in (0, 1)`.
/// Returns `(C*, eps*)`.
pub fn explicit_constant_pipeline(cfg: &PipelineConfig) -> Result<(f64, f64)> {
    if !(cfg.c_sobolev > 0.0 && cfg.c_poincare > 0.0 && cfg.a > 0.0) {
        return Err(Error::invalid("pipeline constants must be positive"));
    }
    let c = |eps: f64| -> f64 {
        let lambda0 = cfg.a * (1.0 + 6.0 * cfg.c_poincare * (1.0 / eps - 1.0));
        ((1.0 - eps) * cfg.c_poincare).min(cfg.c_sobolev) / math::powf(lambda0, 2.0 / 3.0)
    };
    let (eps_star, c_star) =
        optimize::grid_golden_max(c, 1e-9, 1.0 - 1e-9, cfg.grid.max(3), 90)?;
    Ok((c_star, eps_star))
}

/// Local uncertainty gap on a cube at a candidate constant:
/// `gap = ||u||^2_{Hdot^s(Q)} - [ (1/C) X - C Y ]` with
/// `X = int_Q |u|^{2(1+2s/d)} / (int_Q |u|^2)^{2s/d}` and
/// `Y = |Q|^{-2s/d} int_Q |u|^2`.
pub fn local_uncertainty_gap<F: SeminormFn>(
    u: &F,
    q: &Cube,
    s: f64,
    c_candidate: f64,
    rule: &QuadratureRule,
) -> Result<InequalityReport> {
    if !(c_candidate > 0.0) {
        return Err(Error::invalid("candidate constant must be positive"));
    }
    let (x, y, _l2, xy_tol) = uncertainty_terms(u, q, s, rule)?;
    let semi = seminorm::hs_seminorm_cube(u, q, s, rule)?;
    let rhs = x / c_candidate - c_candidate * y;
    let tol = semi.stderr + xy_tol / c_candidate + c_candidate * xy_tol;
    Ok(InequalityReport::new("local-uncertainty", semi.value, rhs, tol))
}

fn uncertainty_terms<F: SeminormFn>(
    u: &F,
    q: &Cube,
    s: f64,
    rule: &QuadratureRule,
) -> Result<(f64, f64, f64, f64)> {
    let d = q.dim() as f64;
    let beta = 2.0 * s / d;
    let l2 = quadrature::integrate_cube(|p| u.value(p) * u.value(p), q, rule)?;
    if !(l2.value > 1e-280) {
        return Err(Error::invalid("u vanishes on the cube"));
    }
    let lp = quadrature::integrate_cube(
        |p| math::powf(math::abs(u.value(p)), 2.0 * (1.0 + beta)),
        q,
        rule,
    )?;
    let x = lp.value / math::powf(l2.value, beta);
    let y = math::powf(q.volume(), -beta) * l2.value;
    let tol = (lp.stderr + lp.value * beta * l2.stderr / l2.value) / math::powf(l2.value, beta)
        + math::powf(q.volume(), -beta) * l2.stderr;
    Ok((x, y, l2.value, tol))
}

/// Smallest admissible constant for the gap above:
/// the positive root of `S = X/C - C Y`.
pub fn minimal_uncertainty_constant(semi: f64, x: f64, y: f64) -> f64 {
    (-semi + math::sqrt(semi * semi + 4.0 * x * y)) / (2.0 * y)
}

/// Configuration of the assembled lower-bound experiment.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssemblyConfig {
    pub k: u32,
    pub max_depth: u32,
    /// Uncertainty constant; `None` calibrates it from the partition.
    pub uncertainty_c: Option<f64>,
    /// Half-side of the root cube in units of the trial width.
    pub support_widths: f64,
    pub rule_order: usize,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig {
            k: 2,
            max_depth: 40,
            uncertainty_c: None,
            support_widths: 12.0,
            rule_order: 16,
        }
    }
}

/// Three-level verification record of the assembled bound.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssemblyReport {
    /// Threshold suggested by the proof recipe, `a (1 + 2 d^s C / lambda)`.
    pub lambda_paper: f64,
    /// Threshold actually used (capped by the available mass).
    pub lambda_used: f64,
    pub c_used: f64,
    pub lhs: f64,
    pub assembled: f64,
    pub final_form: f64,
    pub leaves: usize,
    pub tol: f64,
    pub chain: [InequalityReport; 2],
}

impl AssemblyReport {
    pub fn all_satisfied(&self) -> bool {
        self.chain.iter().all(|r| r.satisfied)
    }
}

/// Product-state energy against the covering-assembled lower bound and its
/// final closed form:
/// physical energy >= sum over leaves of (uncertainty + exclusion terms)
/// >= `(C Lambda^{2s/d})^{-1} int rho^{1+2s/d} + coefficient * weighted mass`.
pub fn lt_assembly_experiment(
    u: &TrialFunction,
    n: u64,
    lambda: f64,
    s: f64,
    cfg: &AssemblyConfig,
) -> Result<AssemblyReport> {
    if n < 2 {
        return Err(Error::invalid("assembly experiment needs N >= 2"));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid("assembly experiment needs lambda > 0"));
    }
    let d = u.dim();
    let df = d as f64;
    let beta = 2.0 * s / df;
    if !(beta < 1.0) {
        return Err(Error::Divergence("assembly needs 2s < d".into()));
    }
    let width = match u {
        TrialFunction::Gaussian { width, .. } => *width,
        TrialFunction::BumpCompact { radius, .. } => *radius,
    };
    let nf = n as f64;
    let rho = u.power_density(1.0)?.scaled(nf)?;
    let q0 = Cube::new(u.center().to_vec(), 2.0 * cfg.support_widths * width)?;
    let m0 = rho.mass(&q0)?;
    let alpha = beta;
    let a = covering::covering_constant_a(cfg.k, d, alpha)?;
    let rule = QuadratureRule::gauss_legendre(cfg.rule_order)?;

    let lambda_for = |c: f64| a * (1.0 + 2.0 * math::powf(df, s) * c / lambda);
    let cap = 0.995 * m0.value;

    // calibrate the uncertainty constant on the partition when not given
    let c_used = match cfg.uncertainty_c {
        Some(c) => c,
        None => {
            let provisional = lambda_for(1.0).min(cap);
            let part = covering::build_covering(&rho, &q0, provisional, cfg.k, cfg.max_depth)?;
            let mut worst: f64 = 1.0;
            for leaf in &part.leaves {
                if leaf.mass < 1e-12 * nf {
                    continue;
                }
                let semi = seminorm::hs_seminorm_cube(u, &leaf.cube, s, &rule)?;
                let (x, y, _, _) = match uncertainty_terms(u, &leaf.cube, s, &rule) {
                    Ok(t) => t,
                    Err(_) => continue,
                };
                worst = worst.max(minimal_uncertainty_constant(semi.value, x, y));
            }
            1.05 * worst
        }
    };

    let lambda_paper = lambda_for(c_used);
    let lambda_used = lambda_paper.min(cap);
    let partition = covering::build_covering(&rho, &q0, lambda_used, cfg.k, cfg.max_depth)?;

    // physical energy of the product state
    let kinetic = seminorm::hs_fullspace(u, s)?;
    let riesz = riesz_of_square(u, 1.0, 2.0 * s)?;
    let lhs = nf * kinetic + lambda * nf * (nf - 1.0) / 2.0 * riesz.value;
    let mut tol = nf * kinetic * 1e-9 + lambda * nf * nf / 2.0 * riesz.stderr;

    // per-leaf assembled terms
    let two_ds = 2.0 * math::powf(df, s);
    let mut assembled_terms = Vec::with_capacity(partition.leaves.len());
    let mut rho_lp_total = 0.0;
    let mut weighted_mass = 0.0;
    for leaf in &partition.leaves {
        let m_q = leaf.mass;
        let vol = partition.volume_at_depth(leaf.cube.depth);
        let excl = (m_q * m_q - m_q) / (two_ds * math::powf(vol, beta));
        let y = math::powf(vol, -beta) * m_q;
        weighted_mass += m_q / (two_ds * math::powf(vol, beta));
        // the uncertainty gain X_Q is dropped on numerically empty leaves
        // (0/0 hazard); this only lowers the assembled bound
        let x = if m_q < 1e-13 * nf {
            0.0
        } else {
            let lp_q = quadrature::integrate_cube(
                |p| math::powf(math::abs(u.eval(p)), 2.0 * (1.0 + beta)),
                &leaf.cube,
                &rule,
            )?;
            let rho_lp = math::powf(nf, 1.0 + beta) * lp_q.value;
            rho_lp_total += rho_lp;
            tol += math::powf(nf, 1.0 + beta) * lp_q.stderr / math::powf(m_q, beta)
                + (c_used + lambda) * math::powf(vol, -beta) * leaf.mass_err * 4.0;
            rho_lp / math::powf(m_q, beta)
        };
        assembled_terms.push(x / c_used - c_used * y + lambda * excl);
    }
    let assembled = math::pairwise_sum(&assembled_terms);
    let final_form = rho_lp_total / (c_used * math::powf(lambda_used, beta))
        + (lambda * lambda_used / a - two_ds * c_used - lambda) * weighted_mass;

    let chain = [
        InequalityReport::new("energy >= assembled", lhs, assembled, tol),
        InequalityReport::new("assembled >= final-form", assembled, final_form, tol),
    ];
    Ok(AssemblyReport {
        lambda_paper,
        lambda_used,
        c_used,
        lhs,
        assembled,
        final_form,
        leaves: partition.leaves.len(),
        tol,
        chain,
    })
}

/// Separated trial-state quotient: N translated copies of a compact
/// profile at centers `R y_i`, exact pairwise interaction plus the coarse
/// `(N(N-1)/2) (R dmin)^{-2s}`-style bound for comparison.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeparatedQuotient {
    pub quotient: QuotientResult,
    pub exact_interaction: f64,
    pub coarse_interaction: f64,
    pub coarse_quotient: f64,
    pub profile_gn: f64,
}

pub fn separated_trial_quotient(
    profile: &TrialFunction,
    n: u64,
    r: f64,
    lambda: f64,
    s: f64,
    centers: &[Vec<f64>],
) -> Result<SeparatedQuotient> {
    let d = profile.dim();
    let radius = match profile {
        TrialFunction::BumpCompact { radius, .. } => *radius,
        TrialFunction::Gaussian { .. } => {
            return Err(Error::Capability(
                "separated trial states need a compactly supported profile".into(),
            ))
        }
    };
    if centers.len() != n as usize || n == 0 {
        return Err(Error::invalid("need one center per particle"));
    }
    if !(r > 0.0) || radius > r / 3.0 {
        return Err(Error::precondition(format!(
            "profile support {radius} exceeds R/3 = {}",
            r / 3.0
        )));
    }
    let mut min_dist = f64::INFINITY;
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            min_dist = min_dist.min(math::dist(&centers[i], &centers[j]));
        }
    }
    if centers.len() > 1 && !(min_dist > 2.0 / 3.0) {
        return Err(Error::precondition(
            "support balls B(c_i R, R/3) overlap; need |c_i - c_j| > 2/3",
        ));
    }
    let kinetic = seminorm::hs_fullspace(profile, s)?;
    let lp = profile.lp_integral(2.0 * (1.0 + 2.0 * s / d as f64))?;
    let (square, support) = profile.radial_square_profile(1.0);
    let support = support.expect("bump profiles are compact");
    let gamma = 2.0 * s;
    let mut exact_interaction = 0.0;
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            let dist = r * math::dist(&centers[i], &centers[j]);
            exact_interaction += lambda
                * seminorm::cross_riesz_radial(&square, support, &square, support, dist, gamma, d)?;
        }
    }
    let nf = n as f64;
    let coarse_interaction = if n > 1 {
        lambda * nf * (nf - 1.0) / 2.0
            * math::powf(r * (min_dist - 2.0 / 3.0), -gamma)
    } else {
        0.0
    };
    let numerator = nf * kinetic + exact_interaction;
    let denominator = nf * lp;
    let mut quotient = QuotientResult::new(
        numerator,
        denominator,
        d,
        s,
        numerator * 1e-8,
    )?;
    quotient.lambda = Some(lambda);
    quotient.n_particles = Some(n);
    let profile_gn = kinetic / lp;
    Ok(SeparatedQuotient {
        quotient,
        exact_interaction,
        coarse_interaction,
        coarse_quotient: (nf * kinetic + coarse_interaction) / denominator,
        profile_gn,
    })
}

/// One row of the coupling-scaling sweep.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaScalingRow {
    pub lambda: f64,
    pub best_quotient: f64,
    pub best_n: u64,
}

/// Fitted scaling law of the minimized product-state quotient.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub rows: Vec<LambdaScalingRow>,
}

/// For each coupling, minimize the product-state quotient over the particle
/// number (the trial width drops out by scale invariance) and fit
/// `log quotient` against `log lambda`. The slope approximates `2s/d`.
pub fn lambda_scaling_experiment(
    s: f64,
    d: usize,
    lambda_grid: &[f64],
) -> Result<LambdaScalingFit> {
    let beta = 2.0 * s / d as f64;
    if !(beta < 1.0) {
        return Err(Error::invalid("scaling experiment needs 2s < d"));
    }
    if lambda_grid.len() < 2 {
        return Err(Error::invalid("scaling fit needs at least two couplings"));
    }
    let u = TrialFunction::unit_gaussian(d);
    let kinetic = seminorm::hs_fullspace(&u, s)?;
    let riesz = riesz_of_square(&u, 1.0, 2.0 * s)?.value;
    let lp = u.lp_integral(2.0 * (1.0 + beta))?;
    let mut rows = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        if !(lambda > 0.0) {
            return Err(Error::invalid("couplings must be positive"));
        }
        let quotient_at = |nf: f64| -> f64 {
            (nf * kinetic + lambda * nf * (nf - 1.0) / 2.0 * riesz)
                / (math::powf(nf, 1.0 + beta) * lp)
        };
        // continuous optimum of the large-N form, then scan nearby integers
        let n_star = 2.0 * beta * kinetic / ((1.0 - beta) * lambda * riesz);
        let lo = (n_star - 3.0).max(2.0) as u64;
        let hi = (n_star + 4.0).max(6.0) as u64;
        let mut best = (2u64, quotient_at(2.0));
        for n in lo..=hi {
            let v = quotient_at(n as f64);
            if v < best.1 {
                best = (n, v);
            }
        }
        rows.push(LambdaScalingRow { lambda, best_quotient: best.1, best_n: best.0 });
    }
    let xs: Vec<f64> = rows.iter().map(|r| math::ln(r.lambda)).collect();
    let ys: Vec<f64> = rows.iter().map(|r| math::ln(r.best_quotient)).collect();
    let (slope, intercept) = optimize::linear_fit(&xs, &ys)?;
    Ok(LambdaScalingFit { slope, intercept, rows })
}

/// Pointwise indirect-energy chain on a grid of balls, for product states:
/// with `p = int_{B_R(v)} |u|^2`, the pair counter is
/// `g = (N(N-1)/2) p^2`, the expected count is `f = N p`, and
/// `g - f^2/2 + f/2 = (N/2) p (1-p)` exactly.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiebOxfordReport {
    pub max_identity_residual: f64,
    pub chain_satisfied: bool,
    pub grid_points: usize,
    /// Smallest maximal-inequality constant making the final bound hold.
    pub minimal_m: f64,
    pub final_report: InequalityReport,
}

pub fn lieb_oxford_chain_check(
    u: &TrialFunction,
    n: u64,
    gamma: f64,
    radii: &[f64],
    centers: &[Vec<f64>],
    m_input: f64,
) -> Result<LiebOxfordReport> {
    let d = u.dim();
    let df = d as f64;
    if radii.is_empty() || centers.is_empty() {
        return Err(Error::invalid("empty ball grid"));
    }
    if !(gamma > 0.0 && gamma < df) {
        return Err(Error::invalid("need 0 < gamma < d"));
    }
    let nf = n as f64;
    let rho1 = u.power_density(1.0)?;
    let mut max_residual: f64 = 0.0;
    let mut chain_ok = true;
    for v in centers {
        for &r in radii {
            let p = rho1.ball_mass(v, r)?.value.clamp(0.0, 1.0);
            let f = nf * p;
            let g = nf * (nf - 1.0) / 2.0 * p * p;
            let residual = g - 0.5 * f * f + 0.5 * f - 0.5 * nf * p * (1.0 - p);
            max_residual = max_residual.max(math::abs(residual));
            let floor = 0.5 * f * f - 0.5 * f;
            let floor2 = 0.5 * f * f - 0.5 * f.min(f * f);
            if g < floor - 1e-12 || g < floor2 - 1e-12 {
                chain_ok = false;
            }
        }
    }
    // final bound: (N(N-1)/2) riesz >= (1/2) N^2 riesz - coef(M) int rho^{1+gamma/d}
    let riesz = seminorm::riesz_energy(&rho1, gamma)?;
    let lp = u.lp_integral(2.0 * (1.0 + gamma / df))?;
    let c_dg = seminorm::fdll_constant(d, gamma)?;
    let b1 = math::unit_ball_volume(d);
    let coef_unit =
        df * c_dg / (2.0 * gamma * (df - gamma)) * math::powf(b1, 1.0 + gamma / df);
    let rho_lp = math::powf(nf, 1.0 + gamma / df) * lp;
    let minimal_m = 0.5 * nf * riesz.value / (coef_unit * rho_lp);
    let lhs = nf * (nf - 1.0) / 2.0 * riesz.value;
    let rhs = 0.5 * nf * nf * riesz.value - m_input * coef_unit * rho_lp;
    let final_report = InequalityReport::new(
        "lieb-oxford-final",
        lhs,
        rhs,
        nf * nf * riesz.stderr + 1e-10 * math::abs(rhs),
    );
    Ok(LiebOxfordReport {
        max_identity_residual: max_residual,
        chain_satisfied: chain_ok,
        grid_points: radii.len() * centers.len(),
        minimal_m,
        final_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = core::f64::consts::PI;

    #[test]
    fn gn_quotient_gaussian_oracle() {
        // d=3, s=1: (3/2) / (pi^{-1} (3/5)^{3/2})
        let u = TrialFunction::unit_gaussian(3);
        let q = gn_quotient(&u, 1.0).unwrap();
        let exact = 1.5 / (math::powf(PI, -1.0) * math::powf(0.6, 1.5));
        assert!((q.quotient - exact).abs() < 1e-6 * exact, "{} vs {exact}", q.quotient);
        assert!((exact - 10.1397).abs() < 1e-3);
    }

    #[test]
    fn gn_quotient_is_width_flat() {
        // the quotient at unit L2 norm is scale invariant
        let base = gn_quotient(&TrialFunction::unit_gaussian(2), 0.5).unwrap().quotient;
        for w in [0.25, 1.7, 5.0] {
            let u = TrialFunction::gaussian(alloc::vec![0.0, 0.0], w).unwrap();
            let q = gn_quotient(&u, 0.5).unwrap().quotient;
            assert!((q - base).abs() < 1e-8 * base, "w={w}");
        }
    }

    #[test]
    fn lt_quotient_value_and_invariance() {
        let u = TrialFunction::unit_gaussian(3);
        let q = lt_interpolation_quotient(&u, 1.0).unwrap();
        // kinetic = 3/2, riesz = 1, lp = pi^{-1}(3/5)^{3/2}
        let exact = math::powf(1.5, 1.0 / 3.0) / (math::powf(PI, -1.0) * math::powf(0.6, 1.5));
        assert!((q.quotient - exact).abs() < 1e-7 * exact, "{} vs {exact}", q.quotient);
        for lam in [0.5, 2.0, 7.0] {
            let v = u.scaled(lam, &[0.0, 0.0, 0.0]).unwrap();
            let qv = lt_interpolation_quotient(&v, 1.0).unwrap();
            assert!(
                (qv.quotient - q.quotient).abs() < 1e-8 * q.quotient,
                "lam={lam}: {} vs {}",
                qv.quotient,
                q.quotient
            );
        }
    }

    #[test]
    fn lt_quotient_rejects_supercritical() {
        let u = TrialFunction::unit_gaussian(3);
        assert!(matches!(
            lt_interpolation_quotient(&u, 2.0),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn hlt_gap_and_ordering() {
        let u = TrialFunction::unit_gaussian(3);
        let hlt = hlt_interpolation_quotient(&u, 1.0).unwrap();
        let lt = lt_interpolation_quotient(&u, 1.0).unwrap();
        assert!(hlt.quotient <= lt.quotient + 1e-12);
        // gap = 3/2 - (1/4)*2 = 1, so numerator = 1^{1/3} * riesz^{2/3}
        let exact = 1.0 / (math::powf(PI, -1.0) * math::powf(0.6, 1.5));
        assert!((hlt.quotient - exact).abs() < 1e-5 * exact, "{} vs {exact}", hlt.quotient);
        // far from the origin the hardy term fades
        let far = TrialFunction::gaussian(alloc::vec![60.0, 0.0, 0.0], 1.0).unwrap();
        let hlt_far = hlt_interpolation_quotient(&far, 1.0).unwrap();
        let lt_far = lt_interpolation_quotient(&far, 1.0).unwrap();
        assert!((hlt_far.quotient - lt_far.quotient).abs() < 1e-3 * lt_far.quotient);
    }

    #[test]
    fn hlt_translation_path_positive() {
        for shift in [0.0, 0.7, 1.9, 4.2] {
            let u = TrialFunction::gaussian(alloc::vec![shift, 0.0, 0.0], 1.0).unwrap();
            let q = hlt_interpolation_quotient(&u, 0.5).unwrap();
            assert!(q.quotient > 0.0 && q.quotient.is_finite(), "shift={shift}");
        }
    }

    #[test]
    fn iso_quotient_matches_lt_at_s1_d3() {
        let u = TrialFunction::unit_gaussian(3);
        let iso = iso_quotient(&u, 1.0).unwrap();
        let lt = lt_interpolation_quotient(&u, 1.0).unwrap();
        assert!(
            (iso.quotient - lt.quotient).abs() < 1e-8 * lt.quotient,
            "{} vs {}",
            iso.quotient,
            lt.quotient
        );
    }

    #[test]
    fn iso_quotient_d2_and_invariance() {
        let u = TrialFunction::unit_gaussian(2);
        let q = iso_quotient(&u, 0.5).unwrap();
        assert!(q.quotient > 0.0 && q.quotient.is_finite());
        for lam in [0.5, 2.0, 7.0] {
            let v = u.scaled(lam, &[0.0, 0.0]).unwrap();
            let qv = iso_quotient(&v, 0.5).unwrap();
            assert!((qv.quotient - q.quotient).abs() < 1e-8 * q.quotient, "lam={lam}");
        }
        assert!(iso_quotient(&TrialFunction::unit_gaussian(1), 0.5).is_err());
    }

    #[test]
    fn product_state_identity_at_zero_coupling() {
        let u = TrialFunction::unit_gaussian(3);
        let gn = gn_quotient(&u, 1.0).unwrap().quotient;
        for n in [2u64, 5, 17] {
            let q = product_state_quotient(&u, n, 0.0, 1.0).unwrap();
            let expect = math::powf(n as f64, -2.0 / 3.0) * gn;
            assert!(
                (q.quotient - expect).abs() < 1e-13 * expect,
                "n={n}: {} vs {expect}",
                q.quotient
            );
        }
        assert!(product_state_quotient(&u, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn product_state_interacting_bound_finite() {
        let u = TrialFunction::unit_gaussian(3);
        let mut best = f64::INFINITY;
        for n in 2..40u64 {
            let q = product_state_quotient(&u, n, 1.0, 1.0).unwrap();
            best = best.min(q.quotient);
        }
        assert!(best > 0.0 && best < 12.0, "{best}");
    }

    #[test]
    fn mu_ratio_oracles() {
        let r = mu_optimized_ratio(1.0, 3).unwrap();
        let exact = math::powf(3.0, 1.0 / 3.0) * math::powf(0.75, 2.0 / 3.0);
        assert!((r.closed_form - exact).abs() < 1e-12);
        assert!((exact - 1.19055).abs() < 1e-5);
        assert!((r.closed_form - r.grid_infimum).abs() < 1e-6 * r.closed_form);

        let r2 = mu_optimized_ratio(0.25, 1).unwrap();
        assert!((r2.closed_form - math::sqrt(2.0)).abs() < 1e-12);
        assert!((r2.closed_form - r2.grid_infimum).abs() < 1e-6 * r2.closed_form);

        // beta -> 0 limit tends to 1
        let r3 = mu_optimized_ratio(1e-6, 3).unwrap();
        assert!((r3.closed_form - 1.0).abs() < 1e-4);

        assert!(mu_optimized_ratio(2.0, 3).is_err());
    }

    #[test]
    fn pipeline_monotonicity_and_suboptimal_eps() {
        let cfg = PipelineConfig::default();
        let (c_star, eps_star) = explicit_constant_pipeline(&cfg).unwrap();
        assert!(c_star > 0.0 && eps_star > 0.0 && eps_star < 1.0);
        // doubling C_P strictly increases the optimum
        let cfg2 = PipelineConfig { c_poincare: 2.0 * cfg.c_poincare, ..cfg };
        let (c2, _) = explicit_constant_pipeline(&cfg2).unwrap();
        assert!(c2 > c_star);
        // a fixed eps = 0.5 is suboptimal
        let lambda0 = cfg.a * (1.0 + 6.0 * cfg.c_poincare);
        let c_half =
            ((0.5 * cfg.c_poincare).min(cfg.c_sobolev)) / math::powf(lambda0, 2.0 / 3.0);
        assert!(c_half < c_star);
    }

    #[test]
    fn local_uncertainty_constant_function_algebra() {
        // nearly constant u on the unit cube: satisfied iff C >= 1
        let u = TrialFunction::gaussian(alloc::vec![0.0], 5e3).unwrap();
        let q = Cube::from_bounds(0.0, 1.0, 1).unwrap();
        let rule = QuadratureRule::gauss_legendre(12).unwrap();
        let good = local_uncertainty_gap(&u, &q, 0.5, 1.2, &rule).unwrap();
        assert!(good.satisfied, "{good:?}");
        let bad = local_uncertainty_gap(&u, &q, 0.5, 0.8, &rule).unwrap();
        assert!(!bad.satisfied, "{bad:?}");
    }

    #[test]
    fn local_uncertainty_dilation_flag_invariance() {
        let u = TrialFunction::unit_gaussian(1);
        let q = Cube::from_bounds(-1.5, 1.5, 1).unwrap();
        let rule = QuadratureRule::gauss_legendre(16).unwrap();
        for c in [0.5, 1.0, 3.0] {
            let base = local_uncertainty_gap(&u, &q, 0.5, c, &rule).unwrap();
            let lam = 2.0;
            let v = u.scaled(lam, &[0.0]).unwrap();
            let qs = Cube::from_bounds(-0.75, 0.75, 1).unwrap();
            let scaled = local_uncertainty_gap(&v, &qs, 0.5, c, &rule).unwrap();
            assert_eq!(base.satisfied, scaled.satisfied, "c={c}");
        }
    }

    #[test]
    fn minimal_constant_solves_gap() {
        let (s, x, y) = (0.7, 2.0, 0.3);
        let c = minimal_uncertainty_constant(s, x, y);
        assert!((s - (x / c - c * y)).abs() < 1e-12);
    }

    #[test]
    fn separated_quotient_limits() {
        let profile = TrialFunction::bump(alloc::vec![0.0, 0.0, 0.0], 1.0, 3).unwrap();
        let centers: Vec<Vec<f64>> = alloc::vec![
            alloc::vec![0.0, 0.0, 0.0],
            alloc::vec![1.1, 0.0, 0.0],
            alloc::vec![0.0, 1.1, 0.0],
        ];
        // N = 1 reduces to the profile quotient
        let single = separated_trial_quotient(&profile, 1, 12.0, 1.0, 1.0, &centers[..1]).unwrap();
        let gn = gn_quotient(&profile, 1.0).unwrap().quotient;
        assert!((single.quotient.quotient - gn).abs() < 1e-10 * gn);
        // lambda = 0 reduces to the profile quotient for any R
        for r in [9.0, 30.0] {
            let q = separated_trial_quotient(&profile, 3, r, 0.0, 1.0, &centers).unwrap();
            assert!((q.quotient.quotient - gn).abs() < 1e-10 * gn, "r={r}");
        }
        // interaction decreases with separation and stays below the coarse bound
        let q1 = separated_trial_quotient(&profile, 3, 10.0, 1.0, 1.0, &centers).unwrap();
        let q2 = separated_trial_quotient(&profile, 3, 40.0, 1.0, 1.0, &centers).unwrap();
        assert!(q1.exact_interaction > q2.exact_interaction);
        assert!(q1.exact_interaction <= q1.coarse_interaction);
        // overlapping supports rejected
        let close: Vec<Vec<f64>> =
            alloc::vec![alloc::vec![0.0, 0.0, 0.0], alloc::vec![0.5, 0.0, 0.0]];
        assert!(separated_trial_quotient(&profile, 2, 10.0, 1.0, 1.0, &close).is_err());
    }

    #[test]
    fn lambda_scaling_slope_near_beta() {
        let grid = optimize::geometric_grid(1e-4, 1e-1, 10).unwrap();
        let fit = lambda_scaling_experiment(1.0, 3, &grid).unwrap();
        let beta = 2.0 / 3.0;
        assert!(
            (fit.slope - beta).abs() < 0.1 * beta,
            "slope {} vs {beta}",
            fit.slope
        );
        assert!(lambda_scaling_experiment(1.0, 3, &grid[..1]).is_err());
    }

    #[test]
    fn coupling_envelope_monotone_and_concave() {
        // the minimum over the trial family of product-state quotients is a
        // minimum of increasing affine functions of lambda, hence the
        // computed upper envelope is nondecreasing and concave
        let u = TrialFunction::unit_gaussian(3);
        let grid = optimize::geometric_grid(0.05, 1.0, 8).unwrap();
        let envelope: Vec<f64> = grid
            .iter()
            .map(|&lam| {
                (2..80u64)
                    .map(|n| product_state_quotient(&u, n, lam, 1.0).unwrap().quotient)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        for w in envelope.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "envelope must be nondecreasing: {w:?}");
        }
        let slopes: Vec<f64> = envelope
            .windows(2)
            .zip(grid.windows(2))
            .map(|(e, l)| (e[1] - e[0]) / (l[1] - l[0]))
            .collect();
        for w in slopes.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "discrete slopes must be nonincreasing: {w:?}");
        }
    }

    #[test]
    fn lieb_oxford_identity_and_endpoints() {
        let u = TrialFunction::unit_gaussian(3);
        let radii = alloc::vec![0.3, 1.0, 3.0, 50.0];
        let centers: Vec<Vec<f64>> =
            alloc::vec![alloc::vec![0.0, 0.0, 0.0], alloc::vec![0.8, -0.3, 0.2]];
        let rep = lieb_oxford_chain_check(&u, 4, 1.0, &radii, &centers, 2.0).unwrap();
        assert!(rep.max_identity_residual < 1e-12, "{}", rep.max_identity_residual);
        assert!(rep.chain_satisfied);
        assert!(rep.minimal_m > 0.0);
        // with M at least the minimal value the final bound is satisfied
        let rep2 =
            lieb_oxford_chain_check(&u, 4, 1.0, &radii, &centers, rep.minimal_m * 1.01).unwrap();
        assert!(rep2.final_report.satisfied);
        let rep3 =
            lieb_oxford_chain_check(&u, 4, 1.0, &radii, &centers, rep.minimal_m * 0.5).unwrap();
        assert!(!rep3.final_report.satisfied);
    }

    #[test]
    fn assembly_chain_smoke() {
        let u = TrialFunction::unit_gaussian(3);
        let cfg = AssemblyConfig { rule_order: 10, ..AssemblyConfig::default() };
        let rep = lt_assembly_experiment(&u, 5, 1.0, 1.0, &cfg).unwrap();
        assert!(rep.all_satisfied(), "{rep:?}");
        assert!(rep.lambda_used <= rep.lambda_paper);
        assert!(rep.leaves >= 8);
        assert!(rep.lhs > rep.assembled && rep.assembled > rep.final_form - rep.tol);
    }
}
