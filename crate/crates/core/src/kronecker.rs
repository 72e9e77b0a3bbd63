//! Inhomogeneous Kronecker approximation: given vectors `x_1..x_N` and
//! targets `theta_1..theta_N`, find `t` with every `<x_j, t> - theta_j`
//! within `eps` of an integer.
//!
//! Two backends: an exact linear solve when the vectors are linearly
//! independent over the reals with `N <= d`, and a seeded search (scan plus
//! gradient ascent on `|f|^2` for `f(t) = 1 + sum exp(2 pi i (<x_j,t> -
//! theta_j))`) otherwise. Solvability of dependent instances is decided by
//! the integer relations of the vectors: a relation `sum m_j x_j = 0` whose
//! phase sum `sum m_j theta_j` is not an integer is an obstruction, and the
//! exact power-expansion certificate realizes `sup |f| = N + 1` as the
//! integer identity `sum C_{m_1..m_N} = (N+1)^q`.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact;
use crate::geometry::Point;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Inputs an f64 coordinate counts as "exactly rational" below this reduced
/// height; anything taller is treated as a float approximation of an
/// irrational and handled heuristically.
const EXACT_HEIGHT_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct KroneckerInstance {
    dim: usize,
    vectors: Vec<Point>,
    targets: Vec<f64>,
    tolerance: f64,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    targets: Vec<f64>,
    eps: f64,
}

impl TryFrom<InstanceJson> for KroneckerInstance {
    type Error = Error;
    fn try_from(j: InstanceJson) -> Result<Self> {
        KroneckerInstance::new(
            j.dim,
            j.vectors
                .into_iter()
                .map(Point::new)
                .collect::<Result<Vec<_>>>()?,
            j.targets,
            j.eps,
        )
    }
}

impl From<KroneckerInstance> for InstanceJson {
    fn from(i: KroneckerInstance) -> InstanceJson {
        InstanceJson {
            dim: i.dim,
            vectors: i.vectors.iter().map(|v| v.coords().to_vec()).collect(),
            targets: i.targets,
            eps: i.tolerance,
        }
    }
}

impl KroneckerInstance {
    pub fn new(dim: usize, vectors: Vec<Point>, targets: Vec<f64>, tolerance: f64) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Config("at least one vector is required".into()));
        }
        if vectors.len() != targets.len() {
            return Err(Error::Config(format!(
                "{} vectors but {} targets",
                vectors.len(),
                targets.len()
            )));
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Config(format!("tolerance must be positive, got {tolerance}")));
        }
        for v in &vectors {
            if v.dim() != dim {
                return Err(Error::Config("vector dimension mismatch".into()));
            }
            if v.norm() == 0.0 {
                return Err(Error::Config("vectors must be nonzero".into()));
            }
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("targets must be finite".into()));
        }
        Ok(KroneckerInstance { dim, vectors, targets, tolerance })
    }

    pub fn one_d(frequencies: &[f64], targets: &[f64], tolerance: f64) -> Result<Self> {
        KroneckerInstance::new(
            1,
            frequencies.iter().map(|&x| Point::one_d(x)).collect(),
            targets.to_vec(),
            tolerance,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Point] {
        &self.vectors
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// `f(t) = 1 + sum_j exp(2 pi i (<x_j, t> - theta_j))`.
    pub fn objective(&self, t: &Point) -> Complex64 {
        let mut f = Complex64::new(1.0, 0.0);
        for (x, theta) in self.vectors.iter().zip(self.targets.iter()) {
            f += Complex64::from_polar(1.0, TAU * (x.dot(t) - theta));
        }
        f
    }

    /// Nearest integers and absolute residuals of `<x_j, t> - theta_j`,
    /// recomputed from scratch.
    pub fn residuals_at(&self, t: &Point) -> (Vec<i64>, Vec<f64>) {
        let mut integers = Vec::with_capacity(self.vectors.len());
        let mut residuals = Vec::with_capacity(self.vectors.len());
        for (x, theta) in self.vectors.iter().zip(self.targets.iter()) {
            let raw = x.dot(t) - theta;
            let p = raw.round();
            integers.push(p as i64);
            residuals.push((raw - p).abs());
        }
        (integers, residuals)
    }

    fn max_residual(&self, t: &Point) -> f64 {
        let mut worst = 0.0f64;
        for (x, theta) in self.vectors.iter().zip(self.targets.iter()) {
            let raw = x.dot(t) - theta;
            let r = (raw - raw.round()).abs();
            if r > worst {
                worst = r;
                if worst >= self.tolerance {
                    return worst;
                }
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveBackend {
    ExactLinear,
    Search,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KroneckerSolution {
    pub t: Point,
    pub integer_parts: Vec<i64>,
    pub residuals: Vec<f64>,
    /// Every residual below the instance tolerance.
    pub satisfied: bool,
    pub backend: SolveBackend,
    /// `|f(t)|` at the returned point.
    pub objective: f64,
    pub evaluations: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolveOptions {
    pub seed: u64,
    pub starts_per_round: u32,
    pub max_evaluations: u64,
    /// Enables the deterministic 1-d scan (the workhorse for d = 1).
    pub scan: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { seed: 0, starts_per_round: 64, max_evaluations: 40_000_000, scan: true }
    }
}

/// Solves with default options. The search backend is sized for desk
/// scale (N <= 8, eps >= 1e-4); harder instances return a best-effort
/// result with `satisfied` false once the budget runs out.
pub fn solve(instance: &KroneckerInstance) -> KroneckerSolution {
    solve_with(instance, &SolveOptions::default())
}

pub fn solve_with(instance: &KroneckerInstance, options: &SolveOptions) -> KroneckerSolution {
    if let Some(exact) = exact_linear_solve(instance) {
        return exact;
    }
    search_solve(instance, options)
}

/// Backend (a): when the vectors are linearly independent over R with
/// `N <= d` (rank detected with pivot threshold 1e-10), the system
/// `<x_j, t> = theta_j` has the minimum-norm solution
/// `t = X^T (X X^T)^{-1} theta`.
fn exact_linear_solve(instance: &KroneckerInstance) -> Option<KroneckerSolution> {
    let n = instance.vectors.len();
    let d = instance.dim;
    if n > d {
        return None;
    }
    // Gram matrix of the rows.
    let mut gram = vec![vec![0.0f64; n]; n];
    for (i, row) in gram.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = instance.vectors[i].dot(&instance.vectors[j]);
        }
    }
    let scale = (0..n).map(|i| gram[i][i]).fold(0.0f64, f64::max).max(1e-300);
    let mut augmented: Vec<Vec<f64>> = gram
        .iter()
        .zip(instance.targets.iter())
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| {
                augmented[a][col]
                    .abs()
                    .partial_cmp(&augmented[b][col].abs())
                    .unwrap()
            })
            .unwrap();
        if augmented[pivot_row][col].abs() <= 1e-10 * scale {
            return None; // rank-deficient: vectors dependent over R
        }
        augmented.swap(col, pivot_row);
        let pivot_values: Vec<f64> = augmented[col][col..=n].to_vec();
        for (row, row_data) in augmented.iter_mut().enumerate() {
            if row != col {
                let factor = row_data[col] / pivot_values[0];
                for (cell, pv) in row_data[col..=n].iter_mut().zip(pivot_values.iter()) {
                    *cell -= factor * pv;
                }
            }
        }
    }
    let coefficients: Vec<f64> = (0..n).map(|i| augmented[i][n] / augmented[i][i]).collect();
    let mut t = vec![0.0f64; d];
    for (c, x) in coefficients.iter().zip(instance.vectors.iter()) {
        for (axis, v) in x.coords().iter().enumerate() {
            t[axis] += c * v;
        }
    }
    let t = Point::new(t).ok()?;
    let (integer_parts, residuals) = instance.residuals_at(&t);
    let satisfied = residuals.iter().all(|&r| r < instance.tolerance);
    Some(KroneckerSolution {
        objective: instance.objective(&t).norm(),
        t,
        integer_parts,
        residuals,
        satisfied,
        backend: SolveBackend::ExactLinear,
        evaluations: 0,
    })
}

/// Backend (b): deterministic scan (d = 1) plus seeded multistart gradient
/// ascent on `|f|^2`, in rounds over growing boxes, until the residual
/// target is met or the evaluation budget is exhausted.
fn search_solve(instance: &KroneckerInstance, options: &SolveOptions) -> KroneckerSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let eps = instance.tolerance;
    let mut evaluations: u64 = 0;
    let mut best_t = Point::zero(instance.dim).expect("valid dim");
    let mut best_defect = instance.max_residual(&best_t);
    evaluations += 1;

    let max_rate = instance.vectors.iter().map(Point::norm).fold(0.0f64, f64::max);
    let scan_step = eps / (2.0 * max_rate);
    let consider = |t: Point, defect: f64, best_t: &mut Point, best_defect: &mut f64| {
        if defect < *best_defect
            || (defect == *best_defect && t.lex_cmp(best_t) == std::cmp::Ordering::Less)
        {
            *best_defect = defect;
            *best_t = t;
        }
    };

    let mut scanned_to = 0.0f64;
    let mut box_half = 32.0f64;
    for _round in 0..24 {
        if best_defect < eps || evaluations >= options.max_evaluations {
            break;
        }
        // Deterministic scan of the fresh segment (d = 1 only).
        if options.scan && instance.dim == 1 {
            let steps = ((box_half - scanned_to) / scan_step).ceil() as u64;
            'scan: for k in 0..steps {
                for sign in [1.0f64, -1.0] {
                    let t_val = sign * (scanned_to + k as f64 * scan_step);
                    let t = Point::one_d(t_val);
                    let defect = instance.max_residual(&t);
                    evaluations += 1;
                    consider(t, defect, &mut best_t, &mut best_defect);
                    if best_defect < eps || evaluations >= options.max_evaluations {
                        break 'scan;
                    }
                }
            }
            scanned_to = box_half;
        }
        if best_defect < eps || evaluations >= options.max_evaluations {
            break;
        }
        // Multistart ascent.
        for _ in 0..options.starts_per_round {
            let start = Point::new(
                (0..instance.dim)
                    .map(|_| rng.random_range(-box_half..box_half))
                    .collect(),
            )
            .expect("finite start");
            let (polished, used) = ascend(instance, start);
            evaluations += used;
            let defect = instance.max_residual(&polished);
            evaluations += 1;
            consider(polished, defect, &mut best_t, &mut best_defect);
            if best_defect < eps || evaluations >= options.max_evaluations {
                break;
            }
        }
        box_half *= 4.0;
    }

    // Polish the best candidate.
    let (polished, used) = ascend(instance, best_t.clone());
    evaluations += used;
    let polished_defect = instance.max_residual(&polished);
    consider(polished, polished_defect, &mut best_t, &mut best_defect);

    let (integer_parts, residuals) = instance.residuals_at(&best_t);
    let satisfied = residuals.iter().all(|&r| r < eps);
    KroneckerSolution {
        objective: instance.objective(&best_t).norm(),
        t: best_t,
        integer_parts,
        residuals,
        satisfied,
        backend: SolveBackend::Search,
        evaluations,
    }
}

/// Gradient ascent with backtracking on `F(t) = |f(t)|^2`;
/// `dF/dt_k = -4 pi sum_j x_jk Im(conj(f) z_j)`.
fn ascend(instance: &KroneckerInstance, start: Point) -> (Point, u64) {
    let mut t = start.coords().to_vec();
    let mut evaluations = 0u64;
    let value = |coords: &[f64]| -> f64 {
        let p = Point::new(coords.to_vec()).expect("finite");
        instance.objective(&p).norm_sqr()
    };
    let mut current = value(&t);
    evaluations += 1;
    let rate_scale: f64 = instance.vectors.iter().map(Point::norm).sum::<f64>().max(1e-12);
    let mut step = 0.05 / rate_scale;
    for _ in 0..200 {
        // Gradient.
        let p = Point::new(t.clone()).expect("finite");
        let f = instance.objective(&p);
        let mut grad = vec![0.0f64; instance.dim];
        for (x, theta) in instance.vectors.iter().zip(instance.targets.iter()) {
            let z = Complex64::from_polar(1.0, TAU * (x.dot(&p) - theta));
            let weight = -2.0 * TAU * (f.conj() * z).im;
            for (axis, v) in x.coords().iter().enumerate() {
                grad[axis] += weight * v;
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let mut advanced = false;
        for _ in 0..30 {
            let trial: Vec<f64> = t.iter().zip(grad.iter()).map(|(a, g)| a + step * g).collect();
            let trial_value = value(&trial);
            evaluations += 1;
            if trial_value > current + 1e-15 {
                t = trial;
                current = trial_value;
                step *= 1.6;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    (Point::new(t).expect("finite"), evaluations)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupEstimate {
    /// Lower bound on `sup |f|`, the objective at the best point found.
    pub value: f64,
    pub at: Point,
    pub residuals: Vec<f64>,
    pub satisfied: bool,
}

/// Lower bound on `sup_t |f(t)|` via the search backend. For instances
/// whose targets are all integers the supremum `N + 1` sits at `t = 0`;
/// in general the bound reflects the best phase alignment found.
pub fn sup_estimate(instance: &KroneckerInstance, options: &SolveOptions) -> SupEstimate {
    let solution = solve_with(instance, options);
    SupEstimate {
        value: solution.objective,
        at: solution.t,
        residuals: solution.residuals,
        satisfied: solution.satisfied,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationViolation {
    pub relation: Vec<i64>,
    pub phase_sum: f64,
    pub distance_to_integer: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationMode {
    /// Exact rational null space of small-height inputs.
    ExactRational,
    /// Bounded-height search; relations may be incomplete.
    Heuristic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationCheck {
    pub mode: RelationMode,
    pub height_cap: Option<i64>,
    /// Integer relations `m` with `sum m_j x_j = 0`.
    pub relations: Vec<Vec<i64>>,
    /// Relations whose phase sum is not an integer: obstructions to
    /// solvability for every eps.
    pub violations: Vec<RelationViolation>,
    pub solvable: bool,
    /// Set when a phase sum was classified by the 1e-9 tolerance rather
    /// than exact rational arithmetic.
    pub numeric_tolerance_used: bool,
    /// False when the heuristic search may have missed relations.
    pub complete: bool,
}

/// Finds integer relations among the vectors and checks the solvability
/// criterion: every relation's phase sum must be an integer.
pub fn relation_check(instance: &KroneckerInstance) -> Result<RelationCheck> {
    relation_check_with_height(instance, 30)
}

pub fn relation_check_with_height(instance: &KroneckerInstance, height: i64) -> Result<RelationCheck> {
    let rationals: Option<Vec<Vec<BigRational>>> = instance
        .vectors
        .iter()
        .map(|v| {
            v.coords()
                .iter()
                .map(|&c| {
                    let r = exact::rational_from_f64(c).ok()?;
                    if exact::rational_height(&r) <= BigUint::from(EXACT_HEIGHT_LIMIT) {
                        Some(r)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let (mode, relations, complete, height_cap) = match rationals {
        Some(vectors) => {
            // Matrix with the vectors as columns: d rows, N columns.
            let n = vectors.len();
            let matrix: Vec<Vec<BigRational>> = (0..instance.dim)
                .map(|row| (0..n).map(|col| vectors[col][row].clone()).collect())
                .collect();
            let kernel = exact::integer_kernel(&matrix);
            let mut relations = Vec::with_capacity(kernel.len());
            for vector in kernel {
                let as_i64: Option<Vec<i64>> = vector.iter().map(|b| b.to_i64()).collect();
                match as_i64 {
                    Some(v) => relations.push(v),
                    None => {
                        return Err(Error::Config(
                            "kernel coefficients exceed i64; inputs are too tall for exact mode".into(),
                        ))
                    }
                }
            }
            (RelationMode::ExactRational, relations, true, None)
        }
        None => {
            let relations = bounded_height_relations(instance, height);
            (RelationMode::Heuristic, relations, false, Some(height))
        }
    };

    let mut violations = Vec::new();
    let mut numeric_tolerance_used = false;
    for relation in &relations {
        // Exact dyadic phase sum.
        let mut acc = BigRational::zero();
        for (&m, &theta) in relation.iter().zip(instance.targets.iter()) {
            acc += BigRational::from(BigInt::from(m)) * exact::rational_from_f64(theta)?;
        }
        if acc.is_integer() {
            continue;
        }
        let as_float = acc.to_f64().unwrap_or(f64::NAN);
        let distance = (as_float - as_float.round()).abs();
        let tall_targets = instance.targets.iter().any(|&theta| {
            exact::rational_from_f64(theta)
                .map(|r| exact::rational_height(&r) > BigUint::from(EXACT_HEIGHT_LIMIT))
                .unwrap_or(true)
        });
        if tall_targets {
            numeric_tolerance_used = true;
            if distance <= 1e-9 {
                continue;
            }
        }
        violations.push(RelationViolation {
            relation: relation.clone(),
            phase_sum: as_float,
            distance_to_integer: distance,
        });
    }
    let solvable = violations.is_empty();
    Ok(RelationCheck {
        mode,
        height_cap,
        relations,
        violations,
        solvable,
        numeric_tolerance_used,
        complete,
    })
}

/// Primitive integer relations with coefficients bounded by `height`,
/// found by direct enumeration. Duplicate directions (negations, integer
/// multiples) are skipped.
fn bounded_height_relations(instance: &KroneckerInstance, height: i64) -> Vec<Vec<i64>> {
    let n = instance.vectors.len();
    // Keep the enumeration near 10^7 candidates.
    let mut h = height.max(1);
    while (2 * h + 1).pow(n as u32) > 30_000_000 && h > 1 {
        h -= 1;
    }
    let scale: f64 = instance.vectors.iter().map(Point::norm).fold(0.0, f64::max);
    let tol = 1e-9 * scale.max(1.0) * h as f64;
    let mut relations: Vec<Vec<i64>> = Vec::new();
    let mut m = vec![-h; n];
    'enumerate: loop {
        // First nonzero coefficient positive: one representative per line.
        if let Some(first) = m.iter().find(|&&c| c != 0) {
            if *first > 0 {
                let mut residual = vec![0.0f64; instance.dim];
                for (coeff, x) in m.iter().zip(instance.vectors.iter()) {
                    for (axis, v) in x.coords().iter().enumerate() {
                        residual[axis] += *coeff as f64 * v;
                    }
                }
                let norm = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
                if norm < tol {
                    let g = m.iter().fold(0i64, |acc, &c| gcd_i64(acc, c.abs()));
                    if g == 1 {
                        relations.push(m.clone());
                    }
                }
            }
        }
        for slot in m.iter_mut() {
            *slot += 1;
            if *slot <= h {
                continue 'enumerate;
            }
            *slot = -h;
        }
        break;
    }
    relations.sort();
    relations
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd_i64(b, a % b)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpansionEntry {
    pub exponents: Vec<u32>,
    pub frequency: Point,
    /// Exact multinomial coefficient, decimal form.
    pub multinomial: String,
    pub phase: f64,
    #[serde(with = "crate::serde_util::complex_pair")]
    pub coefficient: Complex64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MergedTerm {
    pub frequency: Point,
    #[serde(with = "crate::serde_util::complex_pair")]
    pub coefficient: Complex64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerExpansion {
    pub n: usize,
    pub q: u32,
    pub entries: Vec<ExpansionEntry>,
    /// Entries after summing coefficients at coincident frequencies.
    pub merged: Vec<MergedTerm>,
    pub collisions: bool,
    /// Exact `sum C_{m_1..m_N}` over all entries, decimal form.
    pub multinomial_total: String,
}

/// Expands `f(t)^q` into `sum_s alpha_s exp(2 pi i <beta_s, t>)` with exact
/// integer multinomials: entries are exponent tuples `(m_1..m_N)` with
/// `sum m_j <= q`, frequencies `beta = sum m_j x_j`, phases
/// `phi = sum m_j theta_j`, and coefficients `C exp(-2 pi i phi)`.
pub fn power_expansion(instance: &KroneckerInstance, q: u32) -> Result<PowerExpansion> {
    let n = instance.vectors.len();
    let cap: u64 = 10_000_000;
    let estimated = (q as u64 + 1).checked_pow(n as u32).unwrap_or(u64::MAX);
    if estimated > cap {
        return Err(Error::ResourceCap { needed: estimated, cap });
    }
    let mut entries = Vec::new();
    let mut total = BigUint::zero();
    let mut exponents = vec![0u32; n];
    'enumerate: loop {
        let used: u32 = exponents.iter().sum();
        if used <= q {
            let coefficient_int = exact::multinomial(q, &exponents)?;
            let mut frequency = vec![0.0f64; instance.dim];
            let mut phase = 0.0f64;
            for ((&m, x), &theta) in exponents
                .iter()
                .zip(instance.vectors.iter())
                .zip(instance.targets.iter())
            {
                for (axis, v) in x.coords().iter().enumerate() {
                    frequency[axis] += m as f64 * v;
                }
                phase += m as f64 * theta;
            }
            let c = coefficient_int.to_f64().unwrap_or(f64::INFINITY);
            let alpha = c * Complex64::from_polar(1.0, -TAU * phase);
            total += &coefficient_int;
            entries.push(ExpansionEntry {
                exponents: exponents.clone(),
                frequency: Point::new(frequency)?,
                multinomial: coefficient_int.to_string(),
                phase,
                coefficient: alpha,
            });
        }
        for slot in exponents.iter_mut() {
            *slot += 1;
            if *slot <= q {
                continue 'enumerate;
            }
            *slot = 0;
        }
        break;
    }
    // Merge coefficients at exactly coincident frequencies.
    let mut merged_map: std::collections::BTreeMap<Vec<u64>, (Point, Complex64)> =
        std::collections::BTreeMap::new();
    for e in &entries {
        merged_map
            .entry(e.frequency.bit_key())
            .and_modify(|(_, c)| *c += e.coefficient)
            .or_insert((e.frequency.clone(), e.coefficient));
    }
    let collisions = merged_map.len() != entries.len();
    let zero_tol = total.to_f64().unwrap_or(f64::MAX) * 1e-12;
    let mut merged: Vec<MergedTerm> = merged_map
        .into_values()
        .filter(|(_, c)| c.norm() > zero_tol)
        .map(|(frequency, coefficient)| MergedTerm { frequency, coefficient })
        .collect();
    merged.sort_by(|a, b| a.frequency.lex_cmp(&b.frequency));
    Ok(PowerExpansion {
        n,
        q,
        entries,
        merged,
        collisions,
        multinomial_total: total.to_string(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateCheck {
    /// `sum |alpha_s|` after collision merging.
    pub sum_abs: f64,
    /// Exact integer sum when no collisions occurred, decimal form.
    pub exact_sum: Option<String>,
    /// `(N+1)^q`, decimal form.
    pub target: String,
    pub collisions: bool,
    /// Shortfall `(N+1)^q - sum_abs` when collisions cancel mass.
    pub deficit: f64,
    pub passes: bool,
}

/// Checks the expansion against the identity `sum |alpha_s| = (N+1)^q`.
/// For independent instances the check is exact integer arithmetic; with
/// collisions the merged sum falls strictly short and is reported as a
/// deficit.
pub fn certificate_check(expansion: &PowerExpansion, independent: bool) -> CertificateCheck {
    let target = BigUint::from(expansion.n as u32 + 1).pow(expansion.q);
    let total: BigUint = expansion
        .multinomial_total
        .parse()
        .expect("decimal integer produced by power_expansion");
    let sum_abs: f64 = expansion.merged.iter().map(|m| m.coefficient.norm()).sum();
    if independent && !expansion.collisions {
        let passes = total == target;
        CertificateCheck {
            sum_abs,
            exact_sum: Some(total.to_string()),
            target: target.to_string(),
            collisions: false,
            deficit: 0.0,
            passes,
        }
    } else {
        let target_f = target.to_f64().unwrap_or(f64::MAX);
        CertificateCheck {
            sum_abs,
            exact_sum: None,
            target: target.to_string(),
            collisions: expansion.collisions,
            deficit: target_f - sum_abs,
            passes: false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_backend_single_frequency() {
        let inst = KroneckerInstance::one_d(&[1.0], &[0.25], 1e-9).unwrap();
        let sol = solve(&inst);
        assert_eq!(sol.backend, SolveBackend::ExactLinear);
        assert!(sol.satisfied);
        assert_abs_diff_eq!(sol.t.coords()[0], 0.25, epsilon = 1e-14);
        assert_eq!(sol.integer_parts, vec![0]);
        assert!(sol.residuals[0] < 1e-14);
    }

    #[test]
    fn exact_backend_full_rank_2d() {
        let inst = KroneckerInstance::new(
            2,
            vec![
                Point::new(vec![1.0, 0.0]).unwrap(),
                Point::new(vec![0.0, 1.0]).unwrap(),
            ],
            vec![0.3, 0.7],
            1e-9,
        )
        .unwrap();
        let sol = solve(&inst);
        assert_eq!(sol.backend, SolveBackend::ExactLinear);
        assert!(sol.satisfied);
        assert_abs_diff_eq!(sol.t.coords()[0], 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(sol.t.coords()[1], 0.7, epsilon = 1e-14);
    }

    #[test]
    fn search_backend_solves_golden_pair() {
        let inst = KroneckerInstance::one_d(&[1.0, 2.0f64.sqrt()], &[0.5, 0.5], 1e-2).unwrap();
        let sol = solve(&inst);
        assert_eq!(sol.backend, SolveBackend::Search);
        assert!(sol.satisfied, "residuals {:?}", sol.residuals);
        // Verified post hoc by direct evaluation.
        let (_, recomputed) = inst.residuals_at(&sol.t);
        for (a, b) in sol.residuals.iter().zip(recomputed.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        assert!(recomputed.iter().all(|&r| r < 1e-2));
    }

    #[test]
    fn residuals_recompute_to_stored_values() {
        let inst =
            KroneckerInstance::one_d(&[3.0f64.sqrt(), 5.0f64.sqrt()], &[0.2, 0.8], 5e-2).unwrap();
        let sol = solve(&inst);
        let (ints, rs) = inst.residuals_at(&sol.t);
        assert_eq!(ints, sol.integer_parts);
        for (a, b) in rs.iter().zip(sol.residuals.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn objective_reaches_alignment_bound_on_independent_instances() {
        let eps = 1e-2;
        let inst = KroneckerInstance::one_d(&[2.0f64.sqrt(), 3.0f64.sqrt()], &[0.3, 0.6], eps).unwrap();
        let sol = solve(&inst);
        assert!(sol.satisfied);
        let n = inst.len() as f64;
        let bound = (n + 1.0) * (1.0 - 2.0 * std::f64::consts::PI.powi(2) * eps * eps);
        assert!(sol.objective >= bound, "objective {} bound {bound}", sol.objective);
    }

    #[test]
    fn sup_estimate_matches_known_cases() {
        // theta = 0: sup |f| = 2 at t = 0.
        let inst = KroneckerInstance::one_d(&[1.0], &[0.0], 1e-6).unwrap();
        let est = sup_estimate(&inst, &SolveOptions::default());
        assert_abs_diff_eq!(est.value, 2.0, epsilon = 1e-9);

        // Dependent cancellation: f(t) = 1 identically.
        let inst = KroneckerInstance::one_d(&[1.0, 1.0], &[0.0, 0.5], 1e-2).unwrap();
        let opts = SolveOptions { max_evaluations: 30_000, ..Default::default() };
        let est = sup_estimate(&inst, &opts);
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-9);
        assert!(!est.satisfied);
    }

    #[test]
    fn relation_check_solvable_dependent_instance() {
        let inst = KroneckerInstance::one_d(&[1.0, 2.0], &[0.25, 0.5], 1e-3).unwrap();
        let check = relation_check(&inst).unwrap();
        assert_eq!(check.mode, RelationMode::ExactRational);
        assert_eq!(check.relations, vec![vec![2, -1]]);
        assert!(check.solvable);
        // And indeed t = 0.25 solves exactly.
        let sol = solve(&inst);
        assert!(sol.satisfied);
    }

    #[test]
    fn relation_check_detects_obstruction() {
        let inst = KroneckerInstance::one_d(&[1.0, 2.0], &[0.25, 0.3], 1e-2).unwrap();
        let check = relation_check(&inst).unwrap();
        assert!(!check.solvable);
        assert_eq!(check.violations.len(), 1);
        assert_eq!(check.violations[0].relation, vec![2, -1]);
        assert_abs_diff_eq!(check.violations[0].distance_to_integer, 0.2, epsilon = 1e-9);
        // The solver must fail: 2 r1 - r2 >= 0.2 forces max residual >= 1/15.
        let opts = SolveOptions { max_evaluations: 300_000, ..Default::default() };
        let sol = solve_with(&inst, &opts);
        assert!(!sol.satisfied);
        assert!(sol.residuals.iter().cloned().fold(0.0f64, f64::max) >= 0.2 / 3.0 - 1e-9);
    }

    #[test]
    fn irrational_inputs_use_heuristic_mode() {
        let inst = KroneckerInstance::one_d(&[1.0, 2.0f64.sqrt()], &[0.1, 0.2], 1e-2).unwrap();
        let check = relation_check(&inst).unwrap();
        assert_eq!(check.mode, RelationMode::Heuristic);
        assert!(!check.complete);
        assert!(check.relations.is_empty());
        assert!(check.solvable);
    }

    #[test]
    fn heuristic_mode_still_finds_planted_relations() {
        // x2 = 2 x1 with irrational x1: relation (2, -1) at height 2.
        let s = 2.0f64.sqrt();
        let inst = KroneckerInstance::one_d(&[s, 2.0 * s], &[0.1, 0.7], 1e-2).unwrap();
        let check = relation_check(&inst).unwrap();
        assert_eq!(check.mode, RelationMode::Heuristic);
        assert_eq!(check.relations, vec![vec![2, -1]]);
        // 2 * 0.1 - 0.7 = -0.5, not an integer: obstruction.
        assert!(!check.solvable);
    }

    #[test]
    fn power_expansion_single_frequency_squared() {
        let inst = KroneckerInstance::one_d(&[1.0], &[0.0], 1e-2).unwrap();
        let exp = power_expansion(&inst, 2).unwrap();
        assert_eq!(exp.entries.len(), 3);
        let coefficients: Vec<&str> =
            exp.entries.iter().map(|e| e.multinomial.as_str()).collect();
        assert_eq!(coefficients, vec!["1", "2", "1"]);
        let sum_abs: f64 = exp.merged.iter().map(|m| m.coefficient.norm()).sum();
        assert_abs_diff_eq!(sum_abs, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn power_expansion_two_frequencies_linear() {
        let inst = KroneckerInstance::one_d(&[1.0, 2.0f64.sqrt()], &[0.0, 0.0], 1e-2).unwrap();
        let exp = power_expansion(&inst, 1).unwrap();
        let sum_abs: f64 = exp.merged.iter().map(|m| m.coefficient.norm()).sum();
        assert_abs_diff_eq!(sum_abs, 3.0, epsilon = 1e-12);
        assert!(!exp.collisions);
    }

    #[test]
    fn dependent_instance_cancels_to_one() {
        // f(t) = 1 + e(t) - e(t) = 1: merged mass 1 for every q.
        let inst = KroneckerInstance::new(
            1,
            vec![Point::one_d(1.0), Point::one_d(1.0)],
            vec![0.0, 0.5],
            1e-2,
        )
        .unwrap();
        for q in 1..=4u32 {
            let exp = power_expansion(&inst, q).unwrap();
            assert!(exp.collisions);
            let sum_abs: f64 = exp.merged.iter().map(|m| m.coefficient.norm()).sum();
            assert_abs_diff_eq!(sum_abs, 1.0, epsilon = 1e-9);
            let check = certificate_check(&exp, false);
            assert!(!check.passes);
            let target: f64 = 3.0f64.powi(q as i32);
            assert_abs_diff_eq!(check.deficit, target - 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn certificate_exact_values() {
        let inst = KroneckerInstance::one_d(
            &[2.0f64.sqrt(), 3.0f64.sqrt(), 5.0f64.sqrt()],
            &[0.1, 0.2, 0.3],
            1e-2,
        )
        .unwrap();
        let exp = power_expansion(&inst, 4).unwrap();
        let check = certificate_check(&exp, true);
        assert!(check.passes);
        assert_eq!(check.exact_sum.as_deref(), Some("256"));
        assert_eq!(check.target, "256");

        let exp0 = power_expansion(&inst, 0).unwrap();
        let check0 = certificate_check(&exp0, true);
        assert_eq!(check0.target, "1");
        assert!(check0.passes);
    }

    #[test]
    fn entry_count_is_bounded() {
        let inst = KroneckerInstance::one_d(
            &[2.0f64.sqrt(), 3.0f64.sqrt()],
            &[0.0, 0.0],
            1e-2,
        )
        .unwrap();
        for q in 0..=5u32 {
            let exp = power_expansion(&inst, q).unwrap();
            assert!(exp.entries.len() as u64 <= (q as u64 + 1).pow(2));
        }
    }

    #[test]
    fn expansion_cap_is_enforced() {
        let inst = KroneckerInstance::one_d(
            &[1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7],
            &[0.0; 8],
            1e-2,
        )
        .unwrap();
        assert!(matches!(
            power_expansion(&inst, 9),
            Err(Error::ResourceCap { .. })
        ));
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = KroneckerInstance::one_d(&[1.0, 2.0f64.sqrt()], &[0.5, 0.25], 1e-2).unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        assert!(json.contains("\"eps\":0.01"));
        let back: KroneckerInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
