//! JSON configuration schemas, one per subcommand. Shared data types
//! deserialize through their canonical forms in `fqx_core`.

use serde::Deserialize;

use fqx_core::error::{Error, Result};
use fqx_core::{AtomicMeasure, KroneckerInstance, LatticeCombSpec, TestFunction, TrigPolynomial};

/// Either an explicit atomic measure or a lattice-comb spec to realize.
#[derive(Deserialize)]
pub struct MeasureSource {
    #[serde(default)]
    pub measure: Option<AtomicMeasure>,
    #[serde(default)]
    pub spec: Option<LatticeCombSpec>,
}

impl MeasureSource {
    pub fn resolve(&self) -> Result<AtomicMeasure> {
        match (&self.measure, &self.spec) {
            (Some(m), None) => Ok(m.clone()),
            (None, Some(s)) => s.realize_measure(),
            _ => Err(Error::Config(
                "provide exactly one of \"measure\" or \"spec\"".into(),
            )),
        }
    }
}

fn default_threshold() -> f64 {
    1e-8
}

fn default_label() -> String {
    "spec".into()
}

#[derive(Deserialize)]
pub struct PoissonConfig {
    pub spec: LatticeCombSpec,
    pub test_functions: Vec<TestFunction>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_label")]
    pub label: String,
}

#[derive(Deserialize)]
pub struct GrowthConfig {
    #[serde(flatten)]
    pub source: MeasureSource,
    pub radii: Vec<f64>,
}

#[derive(Deserialize)]
pub struct TranslationBoundConfig {
    #[serde(flatten)]
    pub source: MeasureSource,
    pub ball_radius: f64,
    #[serde(default)]
    pub grid_pitch: Option<f64>,
}

#[derive(Deserialize)]
pub struct BohrConfig {
    pub polynomial: TrigPolynomial,
    pub omega: Vec<f64>,
    pub radius: f64,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    /// Also average by quadrature and report the agreement.
    #[serde(default)]
    pub quadrature_check: bool,
}

#[derive(Deserialize)]
pub struct ParsevalConfig {
    pub polynomial: TrigPolynomial,
    pub radii: Vec<f64>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

#[derive(Deserialize)]
pub struct AlmostPeriodsConfig {
    pub polynomial: TrigPolynomial,
    pub epsilon: f64,
    pub scan_range: f64,
    pub scan_pitch: f64,
}

#[derive(Deserialize)]
pub struct KroneckerSolveConfig {
    pub instance: KroneckerInstance,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub max_evaluations: Option<u64>,
    #[serde(default)]
    pub scan: Option<bool>,
}

#[derive(Deserialize)]
pub struct KroneckerCertifyConfig {
    pub instance: KroneckerInstance,
    pub q: u32,
    #[serde(default)]
    pub independent: bool,
}

#[derive(Deserialize)]
pub struct KroneckerRelationsConfig {
    pub instance: KroneckerInstance,
    #[serde(default)]
    pub height: Option<i64>,
}

fn default_center_count() -> usize {
    1000
}

fn default_r_schedule() -> Vec<f64> {
    vec![200.0, 400.0, 800.0]
}

fn default_chain_tolerance() -> f64 {
    0.05
}

#[derive(Deserialize)]
pub struct Theorem2Config {
    pub spec: LatticeCombSpec,
    /// Plateau radii; identically 1 on the unit ball by default.
    #[serde(default)]
    pub plateau: Option<(f64, f64)>,
    #[serde(default = "default_center_count")]
    pub center_count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_r_schedule")]
    pub r_schedule: Vec<f64>,
    #[serde(default = "default_chain_tolerance")]
    pub chain_tolerance: f64,
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_eta() -> f64 {
    0.4
}

fn default_solver_epsilon() -> f64 {
    0.125
}

#[derive(Deserialize)]
pub struct Theorem3Config {
    pub spec: LatticeCombSpec,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_solver_epsilon")]
    pub solver_epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub relation_height: Option<i64>,
    /// Search budget per ball; obstructed balls exhaust it.
    #[serde(default)]
    pub solver_budget: Option<u64>,
    #[serde(default = "default_label")]
    pub label: String,
}

fn default_probe_count() -> usize {
    100
}

#[derive(Deserialize)]
pub struct Prop2Config {
    #[serde(default)]
    pub spec: Option<LatticeCombSpec>,
    #[serde(default)]
    pub measure: Option<AtomicMeasure>,
    #[serde(default)]
    pub measure_hat: Option<AtomicMeasure>,
    #[serde(default = "default_probe_count")]
    pub trial_center_count: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Prop2Config {
    pub fn resolve_pair(&self) -> Result<(AtomicMeasure, AtomicMeasure)> {
        match (&self.spec, &self.measure, &self.measure_hat) {
            (Some(s), None, None) => Ok((s.realize_measure()?, s.fourier_measure()?)),
            (None, Some(m), Some(h)) => Ok((m.clone(), h.clone())),
            _ => Err(Error::Config(
                "provide either \"spec\" or both \"measure\" and \"measure_hat\"".into(),
            )),
        }
    }
}

#[derive(Deserialize)]
pub struct Prop3Config {
    #[serde(flatten)]
    pub source: MeasureSource,
    #[serde(default)]
    pub test_function: Option<TestFunction>,
    #[serde(default = "default_probe_count")]
    pub sample_count: usize,
    #[serde(default)]
    pub seed: u64,
}
