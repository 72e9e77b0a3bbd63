//! One function per subcommand: parse the config, run the check, and
//! return the outcome with its JSON report and optional CSV series.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use fqx_core::almost_periodic::{bohr_coefficient_quadrature, BohrEstimate};
use fqx_core::error::Result;
use fqx_core::experiments::{
    alignment_harness, poisson_check, squared_mass_harness, AlignmentOptions,
};
use fqx_core::kronecker::{self, SolveOptions};
use fqx_core::schwartz::{
    convolution_bound_certificate, translation_bound_certificate, TestFunction,
};
use fqx_core::{KroneckerInstance, Point};

use crate::config::*;

pub struct Outcome {
    pub pass: bool,
    pub report: Value,
    pub csv: Option<Vec<(f64, f64)>>,
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

fn seeded_points(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let coords: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..radius)).collect();
        let p = Point::new(coords).expect("finite");
        if p.norm() <= radius {
            out.push(p);
        }
    }
    out
}

pub fn poisson(config: PoissonConfig) -> Result<Outcome> {
    let report = poisson_check(&config.spec, &config.test_functions, &config.label, config.threshold)?;
    Ok(Outcome { pass: report.pass, report: to_value(&report), csv: None })
}

pub fn growth(config: GrowthConfig) -> Result<Outcome> {
    let mu = config.source.resolve()?;
    let report = mu.growth_exponent(&config.radii)?;
    let csv = report
        .radii
        .iter()
        .zip(report.variations.iter())
        .map(|(&r, &v)| (r, v))
        .collect();
    Ok(Outcome { pass: true, report: to_value(&report), csv: Some(csv) })
}

pub fn translation_bound(config: TranslationBoundConfig) -> Result<Outcome> {
    let mu = config.source.resolve()?;
    let report = mu.translation_bound_estimate_with_pitch(config.ball_radius, config.grid_pitch)?;
    Ok(Outcome { pass: true, report: to_value(&report), csv: None })
}

pub fn bohr(config: BohrConfig) -> Result<Outcome> {
    let omega = Point::new(config.omega.clone())?;
    let center = match &config.center {
        Some(c) => Point::new(c.clone())?,
        None => Point::zero(config.polynomial.dim())?,
    };
    let closed = config.polynomial.bohr_coefficient(&omega, config.radius, &center)?;
    let mut report = json!({ "closed_form": to_value(&closed) });
    let mut pass = true;
    if config.quadrature_check {
        let polynomial = config.polynomial.clone();
        let quadrature: BohrEstimate = bohr_coefficient_quadrature(
            &move |t| polynomial.evaluate(t),
            &omega,
            config.radius,
            &center,
            1e-8,
        )?;
        let disagreement = (closed.value - quadrature.value).norm();
        let tolerance = quadrature.error_bound + 1e-7;
        pass = disagreement <= tolerance;
        report["quadrature"] = to_value(&quadrature);
        report["routes_agree"] = json!(pass);
        report["route_disagreement"] = json!(disagreement);
    }
    Ok(Outcome { pass, report, csv: None })
}

pub fn parseval(config: ParsevalConfig) -> Result<Outcome> {
    let center = match &config.center {
        Some(c) => Point::new(c.clone())?,
        None => Point::zero(config.polynomial.dim())?,
    };
    let series = config.polynomial.parseval_check(&config.radii, &center)?;
    let pass = series
        .samples
        .iter()
        .all(|s| (s.mean_square - series.limit).abs() <= s.error_bound + 1e-12);
    let csv = series.samples.iter().map(|s| (s.radius, s.mean_square)).collect();
    Ok(Outcome { pass, report: to_value(&series), csv: Some(csv) })
}

pub fn almost_periods(config: AlmostPeriodsConfig) -> Result<Outcome> {
    let report =
        config
            .polynomial
            .almost_periods(config.epsilon, config.scan_range, config.scan_pitch)?;
    let pass = !report.periods.is_empty();
    Ok(Outcome { pass, report: to_value(&report), csv: None })
}

pub fn kronecker_solve(config: KroneckerSolveConfig) -> Result<Outcome> {
    let mut options = SolveOptions { seed: config.seed, ..Default::default() };
    if let Some(budget) = config.max_evaluations {
        options.max_evaluations = budget;
    }
    if let Some(scan) = config.scan {
        options.scan = scan;
    }
    let solution = kronecker::solve_with(&config.instance, &options);
    Ok(Outcome { pass: solution.satisfied, report: to_value(&solution), csv: None })
}

pub fn kronecker_certify(config: KroneckerCertifyConfig) -> Result<Outcome> {
    let expansion = kronecker::power_expansion(&config.instance, config.q)?;
    let check = kronecker::certificate_check(&expansion, config.independent);
    let pass = if config.independent { check.passes } else { check.deficit > 0.0 };
    let report = json!({
        "n": expansion.n,
        "q": expansion.q,
        "entry_count": expansion.entries.len(),
        "merged_count": expansion.merged.len(),
        "collisions": expansion.collisions,
        "multinomial_total": expansion.multinomial_total,
        "check": to_value(&check),
    });
    Ok(Outcome { pass, report, csv: None })
}

/// Canonical independent instance for the flag form `--N n --q q`:
/// square roots of the first primes with zero targets.
pub fn canonical_certify(n: usize, q: u32) -> Result<Outcome> {
    const ROOTS: [f64; 8] = [
        std::f64::consts::SQRT_2,
        1.7320508075688772,
        2.23606797749979,
        2.6457513110645907,
        3.3166247903554,
        3.605551275463989,
        4.123105625617661,
        4.358898943540674,
    ];
    if n == 0 || n > ROOTS.len() {
        return Err(fqx_core::Error::Config(format!("N must be 1..={}, got {n}", ROOTS.len())));
    }
    let instance = KroneckerInstance::one_d(&ROOTS[..n], &vec![0.0; n], 1e-2)?;
    kronecker_certify(KroneckerCertifyConfig { instance, q, independent: true })
}

pub fn kronecker_relations(config: KroneckerRelationsConfig) -> Result<Outcome> {
    let check = match config.height {
        Some(h) => kronecker::relation_check_with_height(&config.instance, h)?,
        None => kronecker::relation_check(&config.instance)?,
    };
    Ok(Outcome { pass: check.solvable, report: to_value(&check), csv: None })
}

pub fn theorem2(config: Theorem2Config) -> Result<Outcome> {
    let (inner, outer) = config.plateau.unwrap_or((1.0, 2.0));
    let plateau = TestFunction::plateau(config.spec.dim(), inner, outer)?;
    let usable = config.spec.window_radius() - outer - 0.5;
    let centers = seeded_points(config.spec.dim(), config.center_count, usable, config.seed);
    let report = squared_mass_harness(
        &config.spec,
        &plateau,
        &centers,
        &config.r_schedule,
        &config.label,
        config.chain_tolerance,
    )?;
    let csv = report
        .tempered
        .radii
        .iter()
        .zip(report.tempered.mass_sums.iter())
        .map(|(&r, &v)| (r, v))
        .collect();
    Ok(Outcome { pass: report.pass, report: to_value(&report), csv: Some(csv) })
}

pub fn theorem3(config: Theorem3Config) -> Result<Outcome> {
    let mut options = AlignmentOptions {
        solver_epsilon: config.solver_epsilon,
        solver: SolveOptions { seed: config.seed, ..Default::default() },
        ..Default::default()
    };
    if let Some(h) = config.relation_height {
        options.relation_height = h;
    }
    if let Some(budget) = config.solver_budget {
        options.solver.max_evaluations = budget;
    }
    let report = alignment_harness(&config.spec, config.eta, &options, &config.label)?;
    Ok(Outcome { pass: report.pass, report: to_value(&report), csv: None })
}

pub fn prop2(config: Prop2Config) -> Result<Outcome> {
    let (mu, mu_hat) = config.resolve_pair()?;
    let usable = (mu.window_radius() - 1.5).max(1.0);
    let centers = seeded_points(mu.dim(), config.trial_center_count, usable, config.seed);
    let report = translation_bound_certificate(&mu, &mu_hat, &centers)?;
    Ok(Outcome { pass: report.all_hold, report: to_value(&report), csv: None })
}

pub fn prop3(config: Prop3Config) -> Result<Outcome> {
    let mu = config.source.resolve()?;
    let phi = match &config.test_function {
        Some(f) => f.clone(),
        None => TestFunction::standard_gaussian(mu.dim(), 1.0)?,
    };
    let usable = (mu.window_radius() - 2.0).max(1.0);
    let samples = seeded_points(mu.dim(), config.sample_count, usable, config.seed);
    let report = convolution_bound_certificate(&mu, &phi, &samples)?;
    Ok(Outcome { pass: report.holds, report: to_value(&report), csv: None })
}
