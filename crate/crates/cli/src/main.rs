//! Command-line front end: covering runs, quotient evaluation, constant
//! tables, and verification campaigns.
//!
//! Exit codes: 0 on success, 1 when a verified inequality fails, 2 on
//! configuration or precondition errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand};
use fraclt_core::covering;
use fraclt_core::density::TrialFunction;
use fraclt_core::inequalities::{self, PipelineConfig};
use fraclt_core::optimize;
use fraclt_core::report::InequalityReport;
use fraclt_core::seminorm;
use serde::Serialize;

use fraclt_cli::campaign;
use fraclt_cli::config::{self, FileConfig};
use fraclt_cli::expr;
use fraclt_cli::report::{write_sweep_csv, PartitionExport, Report};

#[derive(Parser)]
#[command(name = "fraclt", version, about = "Adaptive coverings, fractional semi-norms, and functional-inequality experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Output directory for report.json and friends
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// TOML config file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Campaign seed
    #[arg(long)]
    seed: Option<u64>,
    /// Per-axis quadrature order (defaults to FRAC_LT_QUAD_ORDER or 24)
    #[arg(long)]
    order: Option<usize>,
}

impl CommonOpts {
    fn seed(&self, file: Option<u64>) -> u64 {
        self.seed.or(file).unwrap_or(config::DEFAULT_SEED)
    }

    fn order(&self) -> usize {
        self.order.unwrap_or_else(config::env_quad_order)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a mass-threshold covering and verify its exclusion bounds
    Covering {
        #[command(flatten)]
        common: CommonOpts,
        /// Density expression, e.g. "gauss(w=1,c=[0,0,0],s=0.5)"
        #[arg(long)]
        density: Option<String>,
        /// Root cube as [lo,hi]^d (defaults to the density's natural box)
        #[arg(long)]
        domain: Option<String>,
        /// Mass threshold
        #[arg(long)]
        lambda: Option<f64>,
        /// Subdivision arity
        #[arg(long)]
        k: Option<u32>,
        /// Weight exponent of the exclusion functionals
        #[arg(long)]
        alpha: Option<f64>,
        /// Offset of the weak exclusion bracket
        #[arg(long)]
        q: Option<f64>,
        /// Ambient dimension when the density does not pin it down
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        max_depth: Option<u32>,
    },
    /// Evaluate an interpolation / trial-state quotient
    Quotient {
        /// One of: gn | lt | hlt | iso | product | separated
        kind: String,
        #[command(flatten)]
        common: CommonOpts,
        /// Trial function expression, e.g. "gauss(s=1)"
        #[arg(long)]
        trial: Option<String>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        s: Option<f64>,
        /// Interaction coupling (product / separated)
        #[arg(long)]
        lambda: Option<f64>,
        /// Particle number (product / separated)
        #[arg(long)]
        n: Option<u64>,
        /// Separation scale (separated)
        #[arg(long)]
        r: Option<f64>,
        /// Width sweep lo:hi:count writing sweep.csv
        #[arg(long)]
        widths: Option<String>,
    },
    /// Print closed-form constants; --check asserts golden values
    Constants {
        #[command(flatten)]
        common: CommonOpts,
        /// Assert the golden values and exit nonzero on mismatch
        #[arg(long)]
        check: bool,
        /// Print the Hardy constant for (--d, --s)
        #[arg(long)]
        hardy: bool,
        /// Print the ball-representation constant for (--d, --gamma)
        #[arg(long)]
        fdll: bool,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Run a verification campaign
    Verify {
        /// One of: covering-campaign | lambda-scaling | loss-identity |
        /// lieb-oxford | assembly
        campaign: String,
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        configs: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Covering { common, density, domain, lambda, k, alpha, q, d, max_depth } => {
            cmd_covering(common, density, domain, lambda, k, alpha, q, d, max_depth)
        }
        Command::Quotient { kind, common, trial, d, s, lambda, n, r, widths } => {
            cmd_quotient(kind, common, trial, d, s, lambda, n, r, widths)
        }
        Command::Constants { common, check, hardy, fdll, d, s, gamma } => {
            cmd_constants(common, check, hardy, fdll, d, s, gamma)
        }
        Command::Verify { campaign, common, runs, samples, d, s, gamma, n, configs } => {
            cmd_verify(campaign, common, runs, samples, d, s, gamma, n, configs)
        }
    }
}

#[derive(Serialize)]
struct CoveringConfigEcho {
    density: String,
    domain: String,
    lambda: f64,
    k: u32,
    alpha: f64,
    q: f64,
    d: usize,
    max_depth: u32,
}

#[derive(Serialize)]
struct CoveringResults {
    leaves: usize,
    max_leaf_depth: u32,
    constant_a: f64,
    constant_b: f64,
    families: usize,
    center_cube_property: Option<bool>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_covering(
    common: CommonOpts,
    density: Option<String>,
    domain: Option<String>,
    lambda: Option<f64>,
    k: Option<u32>,
    alpha: Option<f64>,
    q: Option<f64>,
    d: Option<usize>,
    max_depth: Option<u32>,
) -> Result<ExitCode> {
    let file: FileConfig = config::load_file(common.config.as_deref())?;
    let density_expr = density
        .or(file.covering.density.clone())
        .ok_or_else(|| anyhow!("missing --density (or [covering] density in the config file)"))?;
    let lambda = lambda
        .or(file.covering.lambda)
        .ok_or_else(|| anyhow!("missing --lambda (or [covering] lambda in the config file)"))?;
    let k = k.or(file.covering.k).unwrap_or(2);
    let alpha_given = alpha.or(file.covering.alpha);
    let q = q.or(file.covering.q).unwrap_or(0.0);
    let d = d.or(file.covering.d);
    let max_depth = max_depth.or(file.covering.max_depth).unwrap_or(40);
    let domain = domain.or(file.covering.domain.clone());

    let rho = expr::parse_density(&density_expr, d)?;
    let dim = rho.dim;
    let alpha = alpha_given.unwrap_or(2.0 / dim as f64);
    let root = match &domain {
        Some(spec) => {
            let v = expr::parse_density(&format!("uniform(cube={spec})"), None)?;
            expr::default_domain(&v)?
        }
        None => expr::default_domain(&rho)?,
    };
    if root.dim() != dim {
        bail!("domain dimension {} does not match the density ({dim})", root.dim());
    }

    let partition = covering::build_covering(&rho, &root, lambda, k, max_depth)
        .map_err(|e| anyhow!("{e}"))?;
    let a = covering::covering_constant_a(k, dim, alpha).map_err(|e| anyhow!("{e}"))?;
    let b = covering::covering_constant_b(k, dim, alpha, q, lambda).map_err(|e| anyhow!("{e}"))?;
    let mut verdicts = vec![
        covering::exclusion_functional(&partition, alpha, a).map_err(|e| anyhow!("{e}"))?,
        covering::weak_exclusion_functional(&partition, alpha, q, b)
            .map_err(|e| anyhow!("{e}"))?,
    ];
    let worst_leaf = partition.leaves.iter().map(|l| l.mass).fold(0.0f64, f64::max);
    verdicts.push(InequalityReport::new("leaf-mass-below-threshold", lambda, worst_leaf, 0.0));

    let center_cube_property = if k % 2 == 1 {
        Some(
            partition
                .leaves
                .iter()
                .filter(|l| {
                    fraclt_core::math::dist(&l.cube.center, &partition.root.center)
                        < 1e-12 * partition.root.side
                })
                .count()
                == 1,
        )
    } else {
        None
    };
    let results = CoveringResults {
        leaves: partition.leaves.len(),
        max_leaf_depth: partition.leaves.iter().map(|l| l.cube.depth).max().unwrap_or(0),
        constant_a: a,
        constant_b: b,
        families: partition.families.len(),
        center_cube_property,
    };
    let echo = CoveringConfigEcho {
        density: density_expr,
        domain: format!("[{}, {}]^{dim}", root.lower(0), root.upper(0)),
        lambda,
        k,
        alpha,
        q,
        d: dim,
        max_depth,
    };
    let report = Report::new(
        "covering",
        echo,
        common.order(),
        common.seed(None),
        results,
        verdicts,
    );
    let path = report.write(&common.out)?;
    PartitionExport::from_partition(&partition).write(&common.out)?;
    println!("covering report: {}", path.display());
    Ok(exit_by_verdicts(report.all_satisfied))
}

#[derive(Serialize)]
struct QuotientConfigEcho {
    kind: String,
    trial: String,
    d: usize,
    s: f64,
    lambda: Option<f64>,
    n: Option<u64>,
    r: Option<f64>,
    widths: Option<String>,
}

#[derive(Serialize)]
struct QuotientResults {
    quotient: inequalities::QuotientResult,
    kinetic: f64,
    hardy: Option<f64>,
    riesz: Option<f64>,
    l2: f64,
    lp: f64,
    exact_interaction: Option<f64>,
    coarse_interaction: Option<f64>,
    profile_gn: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_quotient(
    kind: String,
    common: CommonOpts,
    trial: Option<String>,
    d: Option<usize>,
    s: Option<f64>,
    lambda: Option<f64>,
    n: Option<u64>,
    r: Option<f64>,
    widths: Option<String>,
) -> Result<ExitCode> {
    let file: FileConfig = config::load_file(common.config.as_deref())?;
    let trial_expr =
        trial.or(file.quotient.trial.clone()).unwrap_or_else(|| "gauss(s=1)".to_string());
    let d = d.or(file.quotient.d);
    let s = s.or(file.quotient.s).ok_or_else(|| anyhow!("missing --s"))?;
    let lambda = lambda.or(file.quotient.lambda);
    let n = n.or(file.quotient.n);
    let r = r.or(file.quotient.r);
    let widths = widths.or(file.quotient.widths.clone());

    let u = expr::parse_trial(&trial_expr, d)?;
    let dim = u.dim();
    let eval = |u: &TrialFunction| -> Result<inequalities::QuotientResult> {
        match kind.as_str() {
            "gn" => inequalities::gn_quotient(u, s).map_err(|e| anyhow!("{e}")),
            "lt" => inequalities::lt_interpolation_quotient(u, s).map_err(|e| anyhow!("{e}")),
            "hlt" => inequalities::hlt_interpolation_quotient(u, s).map_err(|e| anyhow!("{e}")),
            "iso" => inequalities::iso_quotient(u, s).map_err(|e| anyhow!("{e}")),
            "product" => inequalities::product_state_quotient(
                u,
                n.unwrap_or(2),
                lambda.unwrap_or(0.0),
                s,
            )
            .map_err(|e| anyhow!("{e}")),
            "separated" => {
                bail!("the separated quotient is evaluated through its own path")
            }
            other => bail!("unknown quotient kind `{other}`"),
        }
    };

    let (quotient, separated) = if kind == "separated" {
        let n = n.ok_or_else(|| anyhow!("separated quotient needs --n"))?;
        let r = r.ok_or_else(|| anyhow!("separated quotient needs --r"))?;
        let centers = campaign::default_centers(dim, n as usize);
        let sq = inequalities::separated_trial_quotient(
            &u,
            n,
            r,
            lambda.unwrap_or(1.0),
            s,
            &centers,
        )
        .map_err(|e| anyhow!("{e}"))?;
        (sq.quotient, Some(sq))
    } else {
        (eval(&u)?, None)
    };

    // energy breakdown alongside the quotient when the family allows it
    let kinetic = seminorm::hs_fullspace(&u, s).map_err(|e| anyhow!("{e}"))?;
    let hardy = if 2.0 * s < dim as f64 { seminorm::hardy_functional(&u, s).ok() } else { None };
    let riesz = u
        .power_density(1.0)
        .and_then(|rho| seminorm::riesz_energy(&rho, 2.0 * s))
        .map(|e| e.value)
        .ok();
    let lp = u.lp_integral(2.0 * (1.0 + 2.0 * s / dim as f64)).map_err(|e| anyhow!("{e}"))?;

    // width sweep
    let mut sweep_rows: Vec<Vec<f64>> = Vec::new();
    if let Some(spec) = &widths {
        for w in config::parse_sweep(spec)? {
            let member = TrialFunction::gaussian(u.center().to_vec(), w)
                .map_err(|e| anyhow!("{e}"))?;
            let q = eval(&member)?;
            sweep_rows.push(vec![w, q.numerator, q.denominator, q.quotient]);
        }
        write_sweep_csv(&common.out, &["width", "numerator", "denominator", "quotient"], &sweep_rows)?;
    }

    let results = QuotientResults {
        quotient,
        kinetic,
        hardy,
        riesz,
        l2: 1.0,
        lp,
        exact_interaction: separated.as_ref().map(|s| s.exact_interaction),
        coarse_interaction: separated.as_ref().map(|s| s.coarse_interaction),
        profile_gn: separated.as_ref().map(|s| s.profile_gn),
    };
    let echo = QuotientConfigEcho {
        kind: kind.clone(),
        trial: trial_expr,
        d: dim,
        s,
        lambda,
        n,
        r,
        widths,
    };
    let report = Report::new("quotient", echo, common.order(), common.seed(None), results, vec![]);
    let path = report.write(&common.out)?;
    println!("quotient report: {}", path.display());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ConstantRow {
    name: String,
    parameters: String,
    value: f64,
    formula: String,
}

fn cmd_constants(
    common: CommonOpts,
    check: bool,
    hardy: bool,
    fdll: bool,
    d: Option<usize>,
    s: Option<f64>,
    gamma: Option<f64>,
) -> Result<ExitCode> {
    let mut rows: Vec<ConstantRow> = Vec::new();
    let mut verdicts: Vec<InequalityReport> = Vec::new();

    if hardy {
        let d = d.ok_or_else(|| anyhow!("--hardy needs --d"))?;
        let s = s.ok_or_else(|| anyhow!("--hardy needs --s"))?;
        let v = seminorm::hardy_constant(d, s).map_err(|e| anyhow!("{e}"))?;
        rows.push(hardy_row(d, s, v));
    }
    if fdll {
        let d = d.ok_or_else(|| anyhow!("--fdll needs --d"))?;
        let gamma = gamma.ok_or_else(|| anyhow!("--fdll needs --gamma"))?;
        let v = seminorm::fdll_constant(d, gamma).map_err(|e| anyhow!("{e}"))?;
        rows.push(ConstantRow {
            name: "ball representation c_{d,gamma}".into(),
            parameters: format!("d={d}, gamma={gamma}"),
            value: v,
            formula: "1 / (t^gamma J(t)), J(t) = int I_d(t,R) dR/R^{d+gamma+1}".into(),
        });
        let recon = seminorm::fdll_reconstruct(d, gamma, 2.0).map_err(|e| anyhow!("{e}"))?;
        verdicts.push(InequalityReport::new(
            "fdll-reconstruction-residual-below-1e-6",
            1e-6,
            (recon * 2.0f64.powf(gamma) - 1.0).abs(),
            0.0,
        ));
    }
    if !hardy && !fdll {
        // the default table
        let d3s1 = seminorm::hardy_constant(3, 1.0).map_err(|e| anyhow!("{e}"))?;
        rows.push(hardy_row(3, 1.0, d3s1));
        let c12 = seminorm::fractional_constant(1, 0.5).map_err(|e| anyhow!("{e}"))?;
        rows.push(ConstantRow {
            name: "fractional form constant c_{d,sigma}".into(),
            parameters: "d=1, sigma=1/2".into(),
            value: c12,
            formula: "2^{2 sigma - 1} pi^{-d/2} Gamma((d+2 sigma)/2)/|Gamma(-sigma)|".into(),
        });
        let a = covering::covering_constant_a(2, 3, 2.0 / 3.0).map_err(|e| anyhow!("{e}"))?;
        rows.push(ConstantRow {
            name: "covering constant a".into(),
            parameters: "k=2, d=3, alpha=2/3".into(),
            value: a,
            formula: "(k^d/2)(1 + sqrt(1 + (1-k^{-d})/(k^{d alpha}-1)))".into(),
        });
        let b = covering::covering_constant_b(2, 3, 2.0 / 3.0, 1.0, 100.0)
            .map_err(|e| anyhow!("{e}"))?;
        rows.push(ConstantRow {
            name: "weak covering constant b".into(),
            parameters: "k=2, d=3, alpha=2/3, q=1, Lambda=100".into(),
            value: b,
            formula: "(1 - q k^d/Lambda)(k^{d alpha}-1)/(k^{d alpha}+k^d-2)".into(),
        });
        let (c_star, eps_star) = inequalities::explicit_constant_pipeline(&PipelineConfig::default())
            .map_err(|e| anyhow!("{e}"))?;
        rows.push(ConstantRow {
            name: "explicit pipeline constant C*".into(),
            parameters: format!("s=1, d=3, eps*={eps_star:.6}"),
            value: c_star,
            formula: "max_eps min{(1-eps) C_P, C_S} / (a(1+6 C_P(1/eps-1)))^{2/3}".into(),
        });
        let mu = inequalities::mu_optimized_ratio(1.0, 3).map_err(|e| anyhow!("{e}"))?;
        rows.push(ConstantRow {
            name: "coupling-optimized ratio C_1/C".into(),
            parameters: "d=3, s=1".into(),
            value: mu.closed_form,
            formula: "(1-2s/d)^{-1+2s/d} (d/4s)^{2s/d}".into(),
        });
    }
    if check {
        let d3s1 = seminorm::hardy_constant(3, 1.0).map_err(|e| anyhow!("{e}"))?;
        verdicts.push(InequalityReport::new(
            "hardy(3,1) = 1/4",
            1e-12,
            (d3s1 - 0.25).abs(),
            0.0,
        ));
        let a = covering::covering_constant_a(2, 3, 2.0 / 3.0).map_err(|e| anyhow!("{e}"))?;
        verdicts.push(InequalityReport::new(
            "a(2,3,2/3) = 4 + sqrt(186)/3",
            1e-12,
            (a - (4.0 + 186.0f64.sqrt() / 3.0)).abs(),
            0.0,
        ));
        let (c_star, _) = inequalities::explicit_constant_pipeline(&PipelineConfig::default())
            .map_err(|e| anyhow!("{e}"))?;
        verdicts.push(InequalityReport::new("pipeline C* >= 0.0023835", c_star, 0.0023835, 0.0));
        verdicts.push(InequalityReport::new("pipeline C* <= 0.0023845", 0.0023845, c_star, 0.0));
        let mu = inequalities::mu_optimized_ratio(1.0, 3).map_err(|e| anyhow!("{e}"))?;
        verdicts.push(InequalityReport::new(
            "mu ratio closed form matches grid infimum",
            1e-6 * mu.closed_form,
            (mu.closed_form - mu.grid_infimum).abs(),
            0.0,
        ));
    }

    for row in &rows {
        println!("{:<38} {:<34} {:>18.12}   [{}]", row.name, row.parameters, row.value, row.formula);
    }
    let all = verdicts.iter().all(|v| v.satisfied);
    for v in &verdicts {
        println!("check {:<44} {}", v.name, if v.satisfied { "ok" } else { "FAILED" });
    }
    #[derive(Serialize)]
    struct Echo {
        check: bool,
    }
    let report = Report::new(
        "constants",
        Echo { check },
        common.order(),
        common.seed(None),
        rows,
        verdicts,
    );
    report.write(&common.out)?;
    Ok(exit_by_verdicts(all))
}

fn hardy_row(d: usize, s: f64, value: f64) -> ConstantRow {
    ConstantRow {
        name: "hardy constant".into(),
        parameters: format!("d={d}, s={s}"),
        value,
        formula: "2^{2s} (Gamma((d+2s)/4)/Gamma((d-2s)/4))^2".into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    which: String,
    common: CommonOpts,
    runs: Option<usize>,
    samples: Option<usize>,
    d: Option<usize>,
    s: Option<f64>,
    gamma: Option<f64>,
    n: Option<u64>,
    configs: Option<usize>,
) -> Result<ExitCode> {
    let file: FileConfig = config::load_file(common.config.as_deref())?;
    let seed = common.seed(file.verify.seed);
    let runs = runs.or(file.verify.runs).unwrap_or(100);
    let samples = samples.or(file.verify.samples).unwrap_or(1000);
    let d = d.or(file.verify.d);
    let s = s.or(file.verify.s);

    #[derive(Serialize)]
    struct Echo {
        campaign: String,
        runs: usize,
        samples: usize,
        d: Option<usize>,
        s: Option<f64>,
    }
    let echo = Echo { campaign: which.clone(), runs, samples, d, s };

    match which.as_str() {
        "covering-campaign" => {
            let summary = campaign::covering_campaign(runs, seed)?;
            let verdict = InequalityReport::new(
                "all covering cases pass",
                summary.passed_cases as f64,
                summary.total_cases as f64,
                0.0,
            );
            println!(
                "covering campaign: {}/{} cases passed",
                summary.passed_cases, summary.total_cases
            );
            let ok = summary.all_passed();
            let report =
                Report::new("verify", echo, common.order(), seed, summary, vec![verdict]);
            report.write(&common.out)?;
            Ok(exit_by_verdicts(ok))
        }
        "lambda-scaling" => {
            let d = d.ok_or_else(|| anyhow!("lambda-scaling needs --d"))?;
            let s = s.ok_or_else(|| anyhow!("lambda-scaling needs --s"))?;
            let grid = optimize::geometric_grid(1e-4, 1e-1, 10).map_err(|e| anyhow!("{e}"))?;
            let fit = inequalities::lambda_scaling_experiment(s, d, &grid)
                .map_err(|e| anyhow!("{e}"))?;
            let beta = 2.0 * s / d as f64;
            let verdicts = vec![
                InequalityReport::new("slope >= 0.9 (2s/d)", fit.slope, 0.9 * beta, 0.0),
                InequalityReport::new("slope <= 1.1 (2s/d)", 1.1 * beta, fit.slope, 0.0),
            ];
            println!("fitted slope {:.6} (target {beta:.6})", fit.slope);
            let ok = verdicts.iter().all(|v| v.satisfied);
            let rows: Vec<Vec<f64>> = fit
                .rows
                .iter()
                .map(|r| vec![r.lambda, r.best_quotient, r.best_n as f64])
                .collect();
            write_sweep_csv(&common.out, &["lambda", "best_quotient", "best_n"], &rows)?;
            let report = Report::new("verify", echo, common.order(), seed, fit, verdicts);
            report.write(&common.out)?;
            Ok(exit_by_verdicts(ok))
        }
        "loss-identity" => {
            let worst = campaign::loss_identity_campaign(samples, seed)?;
            let verdict =
                InequalityReport::new("max residual below 1e-12", 1e-12, worst, 0.0);
            println!("loss identity: max residual {worst:.3e} over {samples} samples");
            let ok = verdict.satisfied;
            #[derive(Serialize)]
            struct R {
                max_residual: f64,
                samples: usize,
            }
            let report = Report::new(
                "verify",
                echo,
                common.order(),
                seed,
                R { max_residual: worst, samples },
                vec![verdict],
            );
            report.write(&common.out)?;
            Ok(exit_by_verdicts(ok))
        }
        "lieb-oxford" => {
            let d = d.unwrap_or(3);
            let gamma = gamma.unwrap_or(1.0);
            let n = n.unwrap_or(4);
            let u = TrialFunction::unit_gaussian(d);
            let radii = optimize::geometric_grid(0.05, 20.0, 24).map_err(|e| anyhow!("{e}"))?;
            let centers = campaign::default_centers(d, 5);
            let rep = inequalities::lieb_oxford_chain_check(&u, n, gamma, &radii, &centers, 0.0)
                .map_err(|e| anyhow!("{e}"))?;
            let minimal = rep.minimal_m;
            let rep = inequalities::lieb_oxford_chain_check(
                &u,
                n,
                gamma,
                &radii,
                &centers,
                1.01 * minimal,
            )
            .map_err(|e| anyhow!("{e}"))?;
            let verdicts = vec![
                InequalityReport::new(
                    "pointwise chain identity below 1e-12",
                    1e-12,
                    rep.max_identity_residual,
                    0.0,
                ),
                rep.final_report.clone(),
            ];
            println!(
                "lieb-oxford: identity residual {:.3e}, minimal admissible M {:.6}",
                rep.max_identity_residual, minimal
            );
            let ok = rep.chain_satisfied && verdicts.iter().all(|v| v.satisfied);
            let report = Report::new("verify", echo, common.order(), seed, rep, verdicts);
            report.write(&common.out)?;
            Ok(exit_by_verdicts(ok))
        }
        "assembly" => {
            let rows = campaign::assembly_campaign(seed, configs.unwrap_or(10))?;
            let ok = rows.iter().all(|r| r.satisfied);
            let verdict = InequalityReport::new(
                "all assembly chains hold",
                rows.iter().filter(|r| r.satisfied).count() as f64,
                rows.len() as f64,
                0.0,
            );
            println!(
                "assembly: {}/{} configurations satisfied",
                rows.iter().filter(|r| r.satisfied).count(),
                rows.len()
            );
            let report = Report::new("verify", echo, common.order(), seed, rows, vec![verdict]);
            report.write(&common.out)?;
            Ok(exit_by_verdicts(ok))
        }
        other => bail!("unknown campaign `{other}`"),
    }
}

fn exit_by_verdicts(all_satisfied: bool) -> ExitCode {
    if all_satisfied {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
