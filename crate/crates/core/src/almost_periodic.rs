//! Finite trigonometric polynomials (absolutely convergent Dirichlet series
//! with finitely many terms), their Bohr mean Fourier coefficients, the
//! Parseval identity for ball averages, and epsilon-almost-period detection.
//!
//! Every ball average of a trigonometric polynomial has a closed form
//! through the kernels of `crate::special`; the quadrature route in
//! [`bohr_coefficient_quadrature`] stays independent of it and is used as a
//! cross-check.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::AtomicMeasure;
use crate::quad;
use crate::schwartz::{unit_ball_volume, TestFunction};
use crate::special::{ball_kernel, ball_kernel_tail_constant, BESSEL_ABS_ERR};

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrigTerm {
    #[serde(rename = "omega")]
    pub frequency: Point,
    #[serde(rename = "a", with = "crate::serde_util::complex_pair")]
    pub coefficient: Complex64,
}

/// A finite Dirichlet series `sum a_w exp(2 pi i <x, w>)` with pairwise
/// distinct frequencies (exact duplicates merge at construction).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TrigJson", into = "TrigJson")]
pub struct TrigPolynomial {
    dim: usize,
    terms: Vec<TrigTerm>,
}

#[derive(Serialize, Deserialize)]
struct TrigJson {
    dim: usize,
    terms: Vec<TrigTerm>,
}

impl TryFrom<TrigJson> for TrigPolynomial {
    type Error = Error;
    fn try_from(j: TrigJson) -> Result<Self> {
        TrigPolynomial::new(j.dim, j.terms.into_iter().map(|t| (t.frequency, t.coefficient)).collect())
    }
}

impl From<TrigPolynomial> for TrigJson {
    fn from(p: TrigPolynomial) -> TrigJson {
        TrigJson { dim: p.dim, terms: p.terms }
    }
}

impl TrigPolynomial {
    pub fn new(dim: usize, terms: Vec<(Point, Complex64)>) -> Result<Self> {
        if dim == 0 || dim > crate::geometry::MAX_DIM {
            return Err(Error::Config(format!("dimension must be 1..=3, got {dim}")));
        }
        let mut merged: BTreeMap<Vec<u64>, (Point, Complex64)> = BTreeMap::new();
        for (frequency, coefficient) in terms {
            if frequency.dim() != dim {
                return Err(Error::Config("frequency dimension mismatch".into()));
            }
            if !(coefficient.re.is_finite() && coefficient.im.is_finite()) {
                return Err(Error::Config("non-finite coefficient".into()));
            }
            merged
                .entry(frequency.bit_key())
                .and_modify(|(_, c)| *c += coefficient)
                .or_insert((frequency, coefficient));
        }
        let mut terms: Vec<TrigTerm> = merged
            .into_values()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(frequency, coefficient)| TrigTerm { frequency, coefficient })
            .collect();
        terms.sort_by(|a, b| a.frequency.lex_cmp(&b.frequency));
        Ok(TrigPolynomial { dim, terms })
    }

    /// One-dimensional convenience constructor.
    pub fn one_d(terms: &[(f64, Complex64)]) -> Result<Self> {
        TrigPolynomial::new(
            1,
            terms.iter().map(|&(w, a)| (Point::one_d(w), a)).collect(),
        )
    }

    /// The polynomial `sum_gamma b_gamma phi(gamma - shift) e^{2 pi i <t, gamma>}`
    /// associated with a spectral measure and a windowing test function.
    pub fn windowed_by(
        mu_hat: &AtomicMeasure,
        phi: &TestFunction,
        shift: &Point,
    ) -> Result<Self> {
        if mu_hat.dim() != phi.dim() || shift.dim() != mu_hat.dim() {
            return Err(Error::Config("dimension mismatch".into()));
        }
        let mut terms = Vec::new();
        for atom in mu_hat.atoms() {
            let weight = phi.evaluate(&atom.location.sub(shift));
            let coefficient = atom.mass * weight;
            if coefficient.norm() > 0.0 {
                terms.push((atom.location.clone(), coefficient));
            }
        }
        TrigPolynomial::new(mu_hat.dim(), terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn evaluate(&self, x: &Point) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            acc += t.coefficient * Complex64::from_polar(1.0, TAU * x.dot(&t.frequency));
        }
        acc
    }

    pub fn coefficient_sum_abs(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm()).sum()
    }

    pub fn sum_sq_coefficients(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm_sqr()).sum()
    }

    /// Exact ball average of `D(t) e^{-2 pi i <t, omega>}` over `B(x, R)`,
    /// with the analytic cross-term bound on its distance from the limit
    /// coefficient.
    pub fn bohr_coefficient(&self, omega: &Point, radius: f64, center: &Point) -> Result<BohrEstimate> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("averaging radius must be positive, got {radius}")));
        }
        if omega.dim() != self.dim || center.dim() != self.dim {
            return Err(Error::Config("dimension mismatch".into()));
        }
        let a_d = ball_kernel_tail_constant(self.dim);
        let mut value = Complex64::new(0.0, 0.0);
        let mut error_bound = 0.0f64;
        for t in &self.terms {
            let delta = t.frequency.sub(omega);
            let gap = delta.norm();
            let z = TAU * radius * gap;
            let kernel = ball_kernel(self.dim, z);
            value += t.coefficient * Complex64::from_polar(1.0, TAU * center.dot(&delta)) * kernel;
            if gap > 0.0 {
                error_bound += t.coefficient.norm() * (a_d / z).min(1.0);
            }
        }
        if self.dim == 2 {
            error_bound += BESSEL_ABS_ERR * self.coefficient_sum_abs();
        }
        Ok(BohrEstimate {
            value,
            averaging_radius: radius,
            center: center.clone(),
            error_bound,
        })
    }

    /// Mean of `|D|^2` over `B(x, R)` for each R in the schedule, with
    /// analytic cross-term bounds, the limit `sum |a|^2`, the largest
    /// observed `|mean - limit| * R`, and the `c + k/R` extrapolation.
    pub fn parseval_check(&self, r_schedule: &[f64], center: &Point) -> Result<ParsevalSeries> {
        if r_schedule.is_empty() {
            return Err(Error::Config("empty radius schedule".into()));
        }
        for pair in r_schedule.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Config("radius schedule must be increasing".into()));
            }
        }
        let a_d = ball_kernel_tail_constant(self.dim);
        let limit = self.sum_sq_coefficients();
        let mut samples = Vec::with_capacity(r_schedule.len());
        for &radius in r_schedule {
            if !(radius > 0.0) {
                return Err(Error::Config("radii must be positive".into()));
            }
            let mut mean = 0.0f64;
            let mut error_bound = 0.0f64;
            for (j, tj) in self.terms.iter().enumerate() {
                for (k, tk) in self.terms.iter().enumerate() {
                    let delta = tj.frequency.sub(&tk.frequency);
                    let gap = delta.norm();
                    if j == k || gap == 0.0 {
                        mean += (tj.coefficient * tk.coefficient.conj()).re;
                        continue;
                    }
                    let z = TAU * radius * gap;
                    let kernel = ball_kernel(self.dim, z);
                    let cross = tj.coefficient
                        * tk.coefficient.conj()
                        * Complex64::from_polar(1.0, TAU * center.dot(&delta));
                    mean += (cross * kernel).re;
                    error_bound += cross.norm() * (a_d / z).min(1.0);
                }
            }
            if self.dim == 2 {
                let s = self.coefficient_sum_abs();
                error_bound += BESSEL_ABS_ERR * s * s;
            }
            samples.push(ParsevalSample { radius, mean_square: mean, error_bound });
        }
        let o_constant = samples
            .iter()
            .map(|s| (s.mean_square - limit).abs() * s.radius)
            .fold(0.0f64, f64::max);
        let extrapolated = extrapolate_in_reciprocal_radius(&samples).unwrap_or(limit);
        Ok(ParsevalSeries { samples, limit, o_constant, extrapolated })
    }

    /// The sufficient almost-period criterion
    /// `sum |a_w| |e^{2 pi i <tau, w>} - 1|`, an upper bound for
    /// `sup_x |D(x + tau) - D(x)|`.
    pub fn translation_defect(&self, tau: &Point) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let phase = Complex64::from_polar(1.0, TAU * tau.dot(&t.frequency));
                t.coefficient.norm() * (phase - Complex64::new(1.0, 0.0)).norm()
            })
            .sum()
    }

    /// Scans translations over `[-scan_range, scan_range]^d`, accepting tau
    /// whenever the sufficient criterion stays below epsilon, then refining
    /// each accepted cluster by local minimization of the criterion.
    ///
    /// The reported inclusion length only certifies density within the scan
    /// range; nothing is claimed beyond it.
    pub fn almost_periods(
        &self,
        epsilon: f64,
        scan_range: f64,
        scan_pitch: f64,
    ) -> Result<AlmostPeriodReport> {
        if !(epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(scan_range > 0.0 && scan_pitch > 0.0 && scan_pitch < scan_range) {
            return Err(Error::Config("need 0 < scan_pitch < scan_range".into()));
        }
        if self.dim == 1 {
            return self.almost_periods_1d(epsilon, scan_range, scan_pitch);
        }
        // d >= 2: accepted grid points, covering radius over the scan grid.
        let steps = (scan_range / scan_pitch).floor() as i64;
        let mut periods = Vec::new();
        let mut idx = vec![-steps; self.dim];
        'grid: loop {
            let tau = Point::new(idx.iter().map(|k| *k as f64 * scan_pitch).collect())?;
            if self.translation_defect(&tau) < epsilon {
                periods.push(tau);
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot <= steps {
                    continue 'grid;
                }
                *slot = -steps;
            }
            break;
        }
        let mut max_gap = 0.0f64;
        let mut probe = vec![-steps; self.dim];
        'cover: loop {
            let p = Point::new(probe.iter().map(|k| *k as f64 * scan_pitch * 4.0).collect())?;
            if p.norm() <= scan_range {
                let nearest = periods
                    .iter()
                    .map(|q| q.dist(&p))
                    .fold(f64::INFINITY, f64::min);
                if nearest.is_finite() {
                    max_gap = max_gap.max(nearest);
                } else {
                    max_gap = 2.0 * scan_range;
                }
            }
            for slot in probe.iter_mut() {
                *slot += 4;
                if *slot <= steps {
                    continue 'cover;
                }
                *slot = -steps;
            }
            break;
        }
        Ok(AlmostPeriodReport {
            epsilon,
            scan_range,
            scan_pitch,
            max_gap,
            inclusion_length: max_gap,
            periods,
        })
    }

    fn almost_periods_1d(
        &self,
        epsilon: f64,
        scan_range: f64,
        scan_pitch: f64,
    ) -> Result<AlmostPeriodReport> {
        let steps = (scan_range / scan_pitch).floor() as i64;
        let defect_at = |t: f64| self.translation_defect(&Point::one_d(t));
        let mut periods: Vec<Point> = Vec::new();
        let mut run_start: Option<i64> = None;
        for k in -steps..=steps {
            let tau = k as f64 * scan_pitch;
            let accepted = defect_at(tau) < epsilon;
            if accepted && run_start.is_none() {
                run_start = Some(k);
            }
            let run_ends = run_start.is_some() && (!accepted || k == steps);
            if run_ends {
                let start = run_start.take().unwrap();
                let end = if accepted { k } else { k - 1 };
                // Refine to the defect minimum inside the accepted run.
                let mut lo = start as f64 * scan_pitch - scan_pitch;
                let mut hi = end as f64 * scan_pitch + scan_pitch;
                for _ in 0..60 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if defect_at(m1) <= defect_at(m2) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let refined = 0.5 * (lo + hi);
                let tau_star = if defect_at(refined) < epsilon {
                    refined
                } else {
                    0.5 * (start + end) as f64 * scan_pitch
                };
                periods.push(Point::one_d(tau_star));
            }
        }
        // Fewer than two periods: the gap degenerates to the scan range
        // itself and the caller interprets.
        let max_gap = if periods.len() >= 2 {
            periods
                .windows(2)
                .map(|w| w[1].coords()[0] - w[0].coords()[0])
                .fold(0.0f64, f64::max)
        } else {
            scan_range
        };
        Ok(AlmostPeriodReport {
            epsilon,
            scan_range,
            scan_pitch,
            max_gap,
            inclusion_length: max_gap,
            periods,
        })
    }
}

fn extrapolate_in_reciprocal_radius(samples: &[ParsevalSample]) -> Option<f64> {
    if samples.len() < 2 {
        return samples.last().map(|s| s.mean_square);
    }
    // Least squares for mean(R) = c + k / R.
    let n = samples.len() as f64;
    let (mut su, mut sy, mut suu, mut suy) = (0.0, 0.0, 0.0, 0.0);
    for s in samples {
        let u = 1.0 / s.radius;
        su += u;
        sy += s.mean_square;
        suu += u * u;
        suy += u * s.mean_square;
    }
    let denom = n * suu - su * su;
    if denom.abs() < 1e-300 {
        return samples.last().map(|s| s.mean_square);
    }
    let k = (n * suy - su * sy) / denom;
    Some((sy - k * su) / n)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BohrEstimate {
    #[serde(with = "crate::serde_util::complex_pair")]
    pub value: Complex64,
    pub averaging_radius: f64,
    pub center: Point,
    pub error_bound: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ParsevalSample {
    pub radius: f64,
    pub mean_square: f64,
    pub error_bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParsevalSeries {
    pub samples: Vec<ParsevalSample>,
    /// `sum |a_w|^2`.
    pub limit: f64,
    /// Largest observed `|mean(R) - limit| * R` over the schedule.
    pub o_constant: f64,
    /// Least-squares `c` from `mean(R) = c + k/R`.
    pub extrapolated: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlmostPeriodReport {
    pub epsilon: f64,
    pub scan_range: f64,
    pub scan_pitch: f64,
    pub periods: Vec<Point>,
    pub max_gap: f64,
    /// Empirical inclusion length, certified only within the scan range.
    pub inclusion_length: f64,
}

/// Bohr coefficient of an arbitrary evaluable by quadrature averaging over
/// `B(center, R)`; the reported bound is the quadrature error alone.
pub fn bohr_coefficient_quadrature(
    f: &dyn Fn(&Point) -> Complex64,
    omega: &Point,
    radius: f64,
    center: &Point,
    abs_tol: f64,
) -> Result<BohrEstimate> {
    let weighted = |t: &Point| f(t) * Complex64::from_polar(1.0, -TAU * t.dot(omega));
    let (value, err) = quad::ball_average_complex(&weighted, center, radius, abs_tol)?;
    Ok(BohrEstimate {
        value,
        averaging_radius: radius,
        center: center.clone(),
        error_bound: err,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeRow {
    pub frequency: Point,
    #[serde(with = "crate::serde_util::complex_pair")]
    pub bohr_value: Complex64,
    #[serde(with = "crate::serde_util::complex_pair")]
    pub expected: Complex64,
    pub error_bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvolutionCoefficients {
    pub term_count: usize,
    pub samples_compared: usize,
    pub max_route_disagreement: f64,
    pub route_tolerance: f64,
    pub rows: Vec<ProbeRow>,
    pub all_within: bool,
}

/// Checks that the Bohr coefficients of `t -> (mu * phi_hat)(t)` equal
/// `b_gamma phi(gamma)`, evaluating the function two independent ways:
/// as the trigonometric polynomial built from `mu_hat` and `phi`, and by
/// direct convolution of `mu` with the quadrature transform of `phi`.
/// Disagreement of the routes beyond the combined tolerance is an error,
/// signalling a broken transform convention.
pub fn convolution_fourier_coefficients(
    mu: &AtomicMeasure,
    mu_hat: &AtomicMeasure,
    phi: &TestFunction,
    probes: &[Point],
    averaging_radius: f64,
) -> Result<ConvolutionCoefficients> {
    let support = phi.support_radius().ok_or_else(|| {
        Error::Config("convolution coefficients need a compactly supported test function".into())
    })?;
    if mu_hat.window_radius() < support {
        return Err(Error::Config(format!(
            "spectral window {} must contain the support radius {support}",
            mu_hat.window_radius()
        )));
    }
    let gate = mu.translation_growth_check()?;
    if !gate.bounded {
        return Err(Error::NotTranslationBounded(
            "convolution coefficients require a translation bounded measure".into(),
        ));
    }
    let polynomial = TrigPolynomial::windowed_by(mu_hat, phi, &Point::zero(mu.dim())?)?;

    // Route agreement at deterministic sample points well inside the window.
    let reach = (mu.window_radius() / 4.0).min(2.5);
    let offsets = [0.0, 0.37, -0.61, 1.13, -1.87];
    let quad_tol = 1e-9;
    let mut max_disagreement = 0.0f64;
    let mut samples_compared = 0usize;
    let mut tail_budget = 0.0f64;
    for &o in &offsets {
        let t = Point::new(vec![o * reach; mu.dim()])?;
        let via_polynomial = polynomial.evaluate(&t);
        let mut via_convolution = Complex64::new(0.0, 0.0);
        for atom in mu.atoms() {
            via_convolution += atom.mass * phi.fourier(&t.sub(&atom.location), quad_tol)?;
        }
        let c_hat = phi.transform_decay_constant()?;
        let d = mu.dim() as i32;
        let dist = (mu.window_radius() - t.norm()).max(1.0);
        let density = (mu.len() as f64 + 1.0)
            / (unit_ball_volume(mu.dim()) * mu.window_radius().powi(d));
        let max_mass = mu.atoms().iter().map(|a| a.mass.norm()).fold(0.0f64, f64::max);
        let tail = max_mass * density * d as f64 * unit_ball_volume(mu.dim()) * c_hat / dist;
        tail_budget = tail_budget.max(tail);
        max_disagreement = max_disagreement.max((via_polynomial - via_convolution).norm());
        samples_compared += 1;
    }
    let route_tolerance = mu.len() as f64 * quad_tol + tail_budget + 1e-9;
    if max_disagreement > route_tolerance {
        return Err(Error::ConventionMismatch(format!(
            "trigonometric-polynomial and convolution routes disagree by {max_disagreement:e} (tolerance {route_tolerance:e})"
        )));
    }

    let origin = Point::zero(mu.dim())?;
    let mut rows = Vec::with_capacity(probes.len());
    let mut all_within = true;
    for probe in probes {
        let est = polynomial.bohr_coefficient(probe, averaging_radius, &origin)?;
        let expected = mu_hat.mass_at(probe) * phi.evaluate(probe);
        let within = (est.value - expected).norm() <= est.error_bound + 1e-9;
        all_within &= within;
        rows.push(ProbeRow {
            frequency: probe.clone(),
            bohr_value: est.value,
            expected,
            error_bound: est.error_bound,
            within_bound: within,
        });
    }
    Ok(ConvolutionCoefficients {
        term_count: polynomial.terms().len(),
        samples_compared,
        max_route_disagreement: max_disagreement,
        route_tolerance,
        rows,
        all_within,
    })
}
