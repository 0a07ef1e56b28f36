//! Seeded verification campaigns. Each campaign is deterministic for a
//! fixed seed and returns a summary the CLI and the acceptance suite share.

use anyhow::{anyhow, Result};
use fraclt_core::covering::{self, CoveringPartition};
use fraclt_core::density::{Density, GaussianComponent, TrialFunction};
use fraclt_core::geometry::Cube;
use fraclt_core::inequalities::{self, AssemblyConfig};
use fraclt_core::math;
use fraclt_core::seminorm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// One covering-campaign run: a random mixture at one (d, k) pair,
/// checked against every stated guarantee.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringRunRow {
    pub run: usize,
    pub d: usize,
    pub k: u32,
    pub lambda: f64,
    pub leaves: usize,
    pub max_depth: u32,
    pub leaf_mass_ok: bool,
    pub exclusion_ok: bool,
    pub weak_exclusion_ok: bool,
    pub families_ok: bool,
    pub center_ok: bool,
}

impl CoveringRunRow {
    pub fn all_ok(&self) -> bool {
        self.leaf_mass_ok
            && self.exclusion_ok
            && self.weak_exclusion_ok
            && self.families_ok
            && self.center_ok
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoveringCampaignSummary {
    pub runs: usize,
    pub total_cases: usize,
    pub passed_cases: usize,
    pub rows: Vec<CoveringRunRow>,
}

impl CoveringCampaignSummary {
    pub fn all_passed(&self) -> bool {
        self.passed_cases == self.total_cases
    }
}

fn random_mixture(rng: &mut ChaCha8Rng, d: usize) -> Density {
    let n_comp = rng.gen_range(1..=4usize);
    let comps: Vec<GaussianComponent> = (0..n_comp)
        .map(|_| GaussianComponent {
            weight: rng.gen_range(0.5..3.0),
            center: (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            width: rng.gen_range(0.05..1.0),
        })
        .collect();
    Density::gaussian_mixture(d, comps).expect("valid random mixture")
}

/// Random Gaussian-mixture coverings over d in {1,2,3} and k in {2,3},
/// verifying leaf masses, both exclusion functionals at alpha = 2s/d for
/// s in {1/4, 1/2, 1} (q in {1, 2} for the weak form), the family
/// invariants, and the odd-k center property.
pub fn covering_campaign(runs: usize, seed: u64) -> Result<CoveringCampaignSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s_values = [0.25, 0.5, 1.0];
    let q_values = [1.0, 2.0];
    let mut rows = Vec::new();
    for run in 0..runs {
        for d in 1..=3usize {
            let rho = random_mixture(&mut rng, d);
            let total = rho.total_mass();
            let lambda = rng.gen_range(0.25..0.7) * total;
            for k in [2u32, 3] {
                let q0 = Cube::from_bounds(-8.0, 8.0, d).map_err(|e| anyhow!("{e}"))?;
                let p = covering::build_covering(&rho, &q0, lambda, k, 40)
                    .map_err(|e| anyhow!("covering failed: {e}"))?;
                let row = check_partition(&p, run, d, k, lambda, &s_values, &q_values)?;
                rows.push(row);
            }
        }
    }
    let total_cases = rows.len();
    let passed_cases = rows.iter().filter(|r| r.all_ok()).count();
    Ok(CoveringCampaignSummary { runs, total_cases, passed_cases, rows })
}

fn check_partition(
    p: &CoveringPartition,
    run: usize,
    d: usize,
    k: u32,
    lambda: f64,
    s_values: &[f64],
    q_values: &[f64],
) -> Result<CoveringRunRow> {
    let leaf_mass_ok = p.leaves.iter().all(|l| l.mass + l.mass_err < lambda);
    let mut exclusion_ok = true;
    let mut weak_ok = true;
    let mut families_ok = !p.families.is_empty();
    for &s in s_values {
        let alpha = 2.0 * s / d as f64;
        let a = covering::covering_constant_a(k, d, alpha).map_err(|e| anyhow!("{e}"))?;
        let rep = covering::exclusion_functional(p, alpha, a).map_err(|e| anyhow!("{e}"))?;
        exclusion_ok &= rep.satisfied;
        for fam_total in
            covering::exclusion_functional_by_family(p, alpha, a).map_err(|e| anyhow!("{e}"))?
        {
            families_ok &= fam_total >= -rep.tol.max(1e-12);
        }
        for &q in q_values {
            let b =
                covering::covering_constant_b(k, d, alpha, q, lambda).map_err(|e| anyhow!("{e}"))?;
            let wrep =
                covering::weak_exclusion_functional(p, alpha, q, b).map_err(|e| anyhow!("{e}"))?;
            weak_ok &= wrep.satisfied;
        }
    }
    // structural family invariants
    let kd = (k as usize).pow(d as u32);
    let mut assigned = vec![0usize; p.leaves.len()];
    for fam in &p.families {
        let n_min = fam
            .members
            .iter()
            .filter(|&&i| {
                let v = p.volume_at_depth(p.leaves[i].cube.depth);
                (v - fam.min_volume).abs() < 1e-9 * fam.min_volume
            })
            .count();
        families_ok &= n_min == kd;
        families_ok &= fam.smallest_mass >= lambda - 1e-9 * lambda;
        let mut by_depth = std::collections::BTreeMap::new();
        for &i in &fam.members {
            *by_depth.entry(p.leaves[i].cube.depth).or_insert(0usize) += 1;
            assigned[i] += 1;
        }
        let deepest = fam.members.iter().map(|&i| p.leaves[i].cube.depth).max().unwrap();
        for (depth, count) in by_depth {
            if depth == deepest {
                families_ok &= count == kd;
            } else {
                families_ok &= count <= kd - 1;
            }
        }
    }
    families_ok &= assigned.iter().all(|&c| c == 1);
    // odd-k center property
    let center_ok = if k % 2 == 1 {
        let central = p
            .leaves
            .iter()
            .filter(|l| math::dist(&l.cube.center, &p.root.center) < 1e-12 * p.root.side)
            .count();
        central == 1
            && p.leaves.iter().all(|l| {
                math::dist(&l.cube.center, &p.root.center) < 1e-12 * p.root.side
                    || l.cube.distance_to_point(&p.root.center)
                        >= l.cube.side / 2.0 - 1e-12 * p.root.side
            })
    } else {
        true
    };
    let max_depth = p.leaves.iter().map(|l| l.cube.depth).max().unwrap_or(0);
    Ok(CoveringRunRow {
        run,
        d,
        k,
        lambda,
        leaves: p.leaves.len(),
        max_depth,
        leaf_mass_ok,
        exclusion_ok,
        weak_exclusion_ok: weak_ok,
        families_ok,
        center_ok,
    })
}

/// Random partition pairs and complex samples against the pointwise
/// partition identity; returns the largest residual seen.
pub fn loss_identity_campaign(samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        // raised-cosine step between two random radii
        let r0 = rng.gen_range(0.2..1.0);
        let r1 = r0 + rng.gen_range(0.2..1.0);
        let chi = |t: f64| -> f64 {
            if t <= r0 {
                1.0
            } else if t >= r1 {
                0.0
            } else {
                0.5 * (1.0 + (std::f64::consts::PI * (t - r0) / (r1 - r0)).cos())
            }
        };
        let x = rng.gen_range(0.0..2.0);
        let y = rng.gen_range(0.0..2.0);
        let u = |t: f64| -> (f64, f64) {
            let mag = (-t * t / 2.0).exp();
            let phase = 1.7 * t;
            (mag * phase.cos(), mag * phase.sin())
        };
        let r = seminorm::loss_identity_residual(chi(x), chi(y), u(x), u(y))
            .map_err(|e| anyhow!("{e}"))?;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct AssemblyCampaignRow {
    pub n: u64,
    pub width: f64,
    pub lambda_used: f64,
    pub lambda_paper: f64,
    pub c_used: f64,
    pub lhs: f64,
    pub assembled: f64,
    pub final_form: f64,
    pub satisfied: bool,
}

/// Seeded assembled-bound configurations at (d, s) = (3, 1), lambda = 1.
pub fn assembly_campaign(seed: u64, configs: usize) -> Result<Vec<AssemblyCampaignRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_choices = [5u64, 10, 20];
    let mut rows = Vec::new();
    for i in 0..configs {
        let n = n_choices[i % n_choices.len()];
        let width = rng.gen_range(0.6..1.8);
        let u = TrialFunction::gaussian(vec![0.0, 0.0, 0.0], width).map_err(|e| anyhow!("{e}"))?;
        let cfg = AssemblyConfig { rule_order: 10, ..AssemblyConfig::default() };
        let rep = inequalities::lt_assembly_experiment(&u, n, 1.0, 1.0, &cfg)
            .map_err(|e| anyhow!("{e}"))?;
        rows.push(AssemblyCampaignRow {
            n,
            width,
            lambda_used: rep.lambda_used,
            lambda_paper: rep.lambda_paper,
            c_used: rep.c_used,
            lhs: rep.lhs,
            assembled: rep.assembled,
            final_form: rep.final_form,
            satisfied: rep.all_satisfied(),
        });
    }
    Ok(rows)
}

/// Hardy-gap sweep over an origin-centered family of gaussians and bumps.
#[derive(Debug, Clone, Serialize)]
pub struct HardyGapRow {
    pub d: usize,
    pub s: f64,
    pub family_member: String,
    pub kinetic: f64,
    pub hardy: f64,
    pub gap: f64,
}

pub fn hardy_gap_family(d: usize, s: f64, members: usize) -> Result<Vec<HardyGapRow>> {
    let mut rows = Vec::new();
    let constant = seminorm::hardy_constant(d, s).map_err(|e| anyhow!("{e}"))?;
    let n_bumps = if members >= 10 { members / 5 } else { 0 };
    let n_gauss = members - n_bumps;
    for i in 0..n_gauss {
        // widths spread geometrically over two decades
        let w = 0.1 * (100.0f64).powf(i as f64 / (n_gauss.max(2) - 1) as f64);
        let u = TrialFunction::gaussian(vec![0.0; d], w).map_err(|e| anyhow!("{e}"))?;
        let kinetic = seminorm::hs_fullspace(&u, s).map_err(|e| anyhow!("{e}"))?;
        let hardy = seminorm::hardy_functional(&u, s).map_err(|e| anyhow!("{e}"))?;
        rows.push(HardyGapRow {
            d,
            s,
            family_member: format!("gauss(s={w:.4})"),
            kinetic,
            hardy,
            gap: kinetic - constant * hardy,
        });
    }
    for i in 0..n_bumps {
        let r = 0.5 * (16.0f64).powf(i as f64 / n_bumps.max(2) as f64);
        let u = TrialFunction::bump(vec![0.0; d], r, 3).map_err(|e| anyhow!("{e}"))?;
        let kinetic = seminorm::hs_fullspace(&u, s).map_err(|e| anyhow!("{e}"))?;
        let hardy = seminorm::hardy_functional(&u, s).map_err(|e| anyhow!("{e}"))?;
        rows.push(HardyGapRow {
            d,
            s,
            family_member: format!("bump(r={r:.4},p=3)"),
            kinetic,
            hardy,
            gap: kinetic - constant * hardy,
        });
    }
    Ok(rows)
}

/// Deterministic well-separated center list for separated trial states:
/// scaled integer lattice points ordered by norm, pairwise distance > 1.
pub fn default_centers(d: usize, n: usize) -> Vec<Vec<f64>> {
    let spacing = 1.1;
    let mut points: Vec<Vec<i64>> = Vec::new();
    let radius = 4i64;
    let mut cursor = vec![-radius; d];
    loop {
        points.push(cursor.clone());
        let mut axis = 0;
        loop {
            cursor[axis] += 1;
            if cursor[axis] <= radius {
                break;
            }
            cursor[axis] = -radius;
            axis += 1;
            if axis == d {
                points.sort_by_key(|p| (p.iter().map(|x| x * x).sum::<i64>(), p.clone()));
                return points
                    .into_iter()
                    .take(n)
                    .map(|p| p.iter().map(|&x| x as f64 * spacing).collect())
                    .collect();
            }
        }
    }
}
