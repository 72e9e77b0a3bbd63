//! Schwartz-class test functions with computable Fourier transforms and
//! norms, measure-function convolution, and the two certificates that tie
//! translation boundedness to transform data: the autocorrelation-bump
//! certificate for nonnegative measures and the convolution sup bound
//! `sup |mu * phi| <= (d+1) C1 C2` for translation-bounded measures.
//!
//! In d >= 2 the compactly supported families are products of 1-d factors.
//! The product keeps the contract (identically 1 on the inner ball,
//! supported in the outer ball) while making transforms and decay constants
//! certifiable one axis at a time; it tightens the plateau precondition to
//! `inner < outer / sqrt(d)`.

pub mod profile;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::AtomicMeasure;
use crate::quad;

use profile::{AutocorrFactor, BumpFactor, PlateauFactor};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Volume of the unit ball in dimension d.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// A generalized Gaussian `c exp(-pi a |y - center|^2) exp(2 pi i <mod, y>)`.
/// Closed under the Fourier transform, which is what the round-trip tests
/// exercise.
#[derive(Clone, Debug)]
pub struct GaussianParams {
    pub amplitude: Complex64,
    pub scale: f64,
    pub center: Point,
    pub modulation: Point,
}

impl GaussianParams {
    pub fn evaluate(&self, y: &Point) -> Complex64 {
        let q = y.dist(&self.center);
        let phase = TAU * self.modulation.dot(y);
        self.amplitude
            * (-std::f64::consts::PI * self.scale * q * q).exp()
            * Complex64::from_polar(1.0, phase)
    }

    /// Analytic transform under the kernel `exp(-2 pi i <t, y>)`:
    /// scale inverts, center and modulation trade places (with a sign), and
    /// the amplitude picks up `a^(-d/2) exp(2 pi i <mod, center>)`.
    pub fn transform(&self) -> GaussianParams {
        let d = self.center.dim() as f64;
        let amp = self.amplitude
            * self.scale.powf(-d / 2.0)
            * Complex64::from_polar(1.0, TAU * self.modulation.dot(&self.center));
        GaussianParams {
            amplitude: amp,
            scale: 1.0 / self.scale,
            center: self.modulation.clone(),
            modulation: self.center.scale(-1.0),
        }
    }
}

/// The three test-function families.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TestFunctionJson", into = "TestFunctionJson")]
pub enum TestFunction {
    /// `exp(-pi a |y - center|^2) exp(2 pi i <modulation, y>)`; entire
    /// Schwartz, analytic transform.
    Gaussian { scale: f64, center: Point, modulation: Point },
    /// Smooth, identically 1 on `B(0, inner)`, supported in `B(0, outer)`.
    Plateau { dim: usize, inner_radius: f64, outer_radius: f64 },
    /// Autocorrelation `psi * psi~` of a standard bump supported in
    /// `B(0, 1)`; supported in `B(0, 2)` with nonnegative transform.
    BumpAutocorrelation { dim: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum TestFunctionJson {
    Gaussian {
        dim: usize,
        scale: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        modulation: Option<Vec<f64>>,
    },
    Plateau { dim: usize, inner_radius: f64, outer_radius: f64 },
    Autocorr { dim: usize },
}

impl TryFrom<TestFunctionJson> for TestFunction {
    type Error = Error;
    fn try_from(j: TestFunctionJson) -> Result<Self> {
        match j {
            TestFunctionJson::Gaussian { dim, scale, center, modulation } => {
                let center = Point::new(center.unwrap_or_else(|| vec![0.0; dim]))?;
                let modulation = Point::new(modulation.unwrap_or_else(|| vec![0.0; dim]))?;
                if center.dim() != dim || modulation.dim() != dim {
                    return Err(Error::Config("gaussian parameter dimensions disagree".into()));
                }
                TestFunction::gaussian(scale, center, modulation)
            }
            TestFunctionJson::Plateau { dim, inner_radius, outer_radius } => {
                TestFunction::plateau(dim, inner_radius, outer_radius)
            }
            TestFunctionJson::Autocorr { dim } => TestFunction::bump_autocorrelation(dim),
        }
    }
}

impl From<TestFunction> for TestFunctionJson {
    fn from(t: TestFunction) -> TestFunctionJson {
        match t {
            TestFunction::Gaussian { scale, center, modulation } => TestFunctionJson::Gaussian {
                dim: center.dim(),
                scale,
                center: Some(center.coords().to_vec()),
                modulation: Some(modulation.coords().to_vec()),
            },
            TestFunction::Plateau { dim, inner_radius, outer_radius } => {
                TestFunctionJson::Plateau { dim, inner_radius, outer_radius }
            }
            TestFunction::BumpAutocorrelation { dim } => TestFunctionJson::Autocorr { dim },
        }
    }
}

impl TestFunction {
    pub fn gaussian(scale: f64, center: Point, modulation: Point) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("gaussian scale must be positive, got {scale}")));
        }
        if center.dim() != modulation.dim() {
            return Err(Error::Config("gaussian parameter dimensions disagree".into()));
        }
        Ok(TestFunction::Gaussian { scale, center, modulation })
    }

    pub fn standard_gaussian(dim: usize, scale: f64) -> Result<Self> {
        TestFunction::gaussian(scale, Point::zero(dim)?, Point::zero(dim)?)
    }

    pub fn plateau(dim: usize, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if dim == 0 || dim > crate::geometry::MAX_DIM {
            return Err(Error::Config(format!("dimension must be 1..=3, got {dim}")));
        }
        if !(inner_radius > 0.0 && outer_radius.is_finite()) {
            return Err(Error::Config("plateau radii must be positive and finite".into()));
        }
        let limit = outer_radius / (dim as f64).sqrt();
        if inner_radius >= limit {
            return Err(Error::Config(format!(
                "plateau needs inner < outer/sqrt(d) = {limit} (product construction), got inner {inner_radius}"
            )));
        }
        Ok(TestFunction::Plateau { dim, inner_radius, outer_radius })
    }

    pub fn bump_autocorrelation(dim: usize) -> Result<Self> {
        if dim == 0 || dim > crate::geometry::MAX_DIM {
            return Err(Error::Config(format!("dimension must be 1..=3, got {dim}")));
        }
        Ok(TestFunction::BumpAutocorrelation { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Gaussian { center, .. } => center.dim(),
            TestFunction::Plateau { dim, .. } | TestFunction::BumpAutocorrelation { dim } => *dim,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Gaussian { scale, .. } => format!("gaussian(a={scale})"),
            TestFunction::Plateau { inner_radius, outer_radius, .. } => {
                format!("plateau({inner_radius},{outer_radius})")
            }
            TestFunction::BumpAutocorrelation { .. } => "autocorr".to_string(),
        }
    }

    /// Radius of a ball containing the support, `None` for Gaussians.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            TestFunction::Gaussian { .. } => None,
            TestFunction::Plateau { outer_radius, .. } => Some(*outer_radius),
            TestFunction::BumpAutocorrelation { .. } => Some(2.0),
        }
    }

    fn gaussian_params(&self) -> Option<GaussianParams> {
        match self {
            TestFunction::Gaussian { scale, center, modulation } => Some(GaussianParams {
                amplitude: Complex64::new(1.0, 0.0),
                scale: *scale,
                center: center.clone(),
                modulation: modulation.clone(),
            }),
            _ => None,
        }
    }

    fn plateau_factor(&self) -> Option<PlateauFactor> {
        match self {
            TestFunction::Plateau { dim, inner_radius, outer_radius } => Some(PlateauFactor {
                inner: *inner_radius,
                outer: *outer_radius / (*dim as f64).sqrt(),
            }),
            _ => None,
        }
    }

    fn autocorr_factor(&self) -> Option<AutocorrFactor> {
        match self {
            TestFunction::BumpAutocorrelation { dim } => Some(AutocorrFactor {
                base: BumpFactor { radius: 1.0 / (*dim as f64).sqrt() },
            }),
            _ => None,
        }
    }

    /// Pointwise value.
    pub fn evaluate(&self, y: &Point) -> Complex64 {
        debug_assert_eq!(y.dim(), self.dim());
        match self {
            TestFunction::Gaussian { .. } => self.gaussian_params().unwrap().evaluate(y),
            TestFunction::Plateau { .. } => {
                let f = self.plateau_factor().unwrap();
                let v = y.coords().iter().map(|&t| f.eval(t)).product::<f64>();
                Complex64::new(v, 0.0)
            }
            TestFunction::BumpAutocorrelation { .. } => {
                let f = self.autocorr_factor().unwrap();
                let v = y
                    .coords()
                    .iter()
                    .map(|&t| f.eval(t).unwrap_or(f64::NAN))
                    .product::<f64>();
                Complex64::new(v, 0.0)
            }
        }
    }

    /// Fourier transform under the kernel `exp(-2 pi i <t, y>)`: analytic
    /// for Gaussians, per-axis quadrature (absolute error `abs_tol`) for
    /// the compactly supported families.
    pub fn fourier(&self, x: &Point, abs_tol: f64) -> Result<Complex64> {
        debug_assert_eq!(x.dim(), self.dim());
        match self {
            TestFunction::Gaussian { .. } => {
                Ok(self.gaussian_params().unwrap().transform().evaluate(x))
            }
            TestFunction::Plateau { dim, .. } => {
                let f = self.plateau_factor().unwrap();
                let bound = (2.0 * f.outer).max(1.0);
                let tol_factor = abs_tol / (*dim as f64 * bound.powi(*dim as i32 - 1));
                let mut value = 1.0;
                for &u in x.coords() {
                    let q = quad::integrate(
                        |t| f.eval(t) * (TAU * u * t).cos(),
                        -f.outer,
                        f.outer,
                        tol_factor,
                    )?;
                    value *= q.value;
                }
                Ok(Complex64::new(value, 0.0))
            }
            TestFunction::BumpAutocorrelation { dim, .. } => {
                let f = self.autocorr_factor().unwrap();
                let bound: f64 = 1.0;
                let tol_factor = abs_tol / (*dim as f64 * bound);
                let mut value = 1.0;
                for &u in x.coords() {
                    value *= f.transform(u, tol_factor)?;
                }
                Ok(Complex64::new(value, 0.0))
            }
        }
    }

    /// Transform by direct per-axis quadrature of the function itself; the
    /// independent route used to validate `fourier`. For Gaussians the axis
    /// integrals truncate where the factor is below 1e-18.
    pub fn fourier_quadrature(&self, x: &Point, abs_tol: f64) -> Result<Complex64> {
        match self {
            TestFunction::Gaussian { scale, center, modulation } => {
                let reach = (18.0 * std::f64::consts::LN_10 / (std::f64::consts::PI * scale)).sqrt();
                let mut value = Complex64::new(1.0, 0.0);
                for axis in 0..self.dim() {
                    let c = center.coords()[axis];
                    let m = modulation.coords()[axis];
                    let u = x.coords()[axis];
                    let q = quad::integrate_complex(
                        |t| {
                            let g = (-std::f64::consts::PI * scale * (t - c) * (t - c)).exp();
                            g * Complex64::from_polar(1.0, TAU * (m - u) * t)
                        },
                        c - reach,
                        c + reach,
                        abs_tol / self.dim() as f64,
                    )?;
                    value *= q.value;
                }
                Ok(value)
            }
            TestFunction::Plateau { .. } => self.fourier(x, abs_tol),
            TestFunction::BumpAutocorrelation { dim } => {
                let f = self.autocorr_factor().unwrap();
                let mut value = 1.0;
                for &u in x.coords() {
                    value *= f.transform_direct(u, abs_tol / *dim as f64)?;
                }
                Ok(Complex64::new(value, 0.0))
            }
        }
    }

    /// Schwartz norm `N_m = sup max{1,|t|^m} max_{|k| <= m} |D^k phi(t)|`
    /// for m in {0, 1, 2}: analytic derivatives for Gaussians, central
    /// finite differences (step 1e-5, error estimate reported) for the
    /// compactly supported families.
    pub fn schwartz_norm(&self, m: usize) -> Result<SchwartzNorm> {
        if m > 2 {
            return Err(Error::Config(format!("norms are implemented for m <= 2, got {m}")));
        }
        match self {
            TestFunction::Gaussian { .. } => self.gaussian_norm(m),
            _ => self.product_norm_fd(m),
        }
    }

    fn gaussian_norm(&self, m: usize) -> Result<SchwartzNorm> {
        let (scale, center, modulation) = match self {
            TestFunction::Gaussian { scale, center, modulation } => (scale, center, modulation),
            _ => unreachable!(),
        };
        let dim = self.dim();
        let a = *scale;
        let pi = std::f64::consts::PI;
        // Envelope that dominates max{1,|t|^m} max_k |D^k phi| radially from
        // the center; used to pick the grid box.
        let s0 = center.norm();
        let amp = |s: f64| -> f64 {
            let rate = TAU * a * (s + s0) + TAU * modulation.norm();
            (1.0 + rate + rate * rate + TAU * a) * (1.0f64).max((s + s0).powi(m as i32))
        };
        let mut reach = 1.0f64;
        while amp(reach) * (-pi * a * reach * reach).exp() > 1e-16 && reach < 1e3 {
            reach += 0.5;
        }
        let value_at = |y: &Point| -> f64 {
            let g = (-pi * a * y.dist(center) * y.dist(center)).exp();
            let u: Vec<Complex64> = (0..dim)
                .map(|j| {
                    Complex64::new(
                        -TAU * a * (y.coords()[j] - center.coords()[j]),
                        TAU * modulation.coords()[j],
                    )
                })
                .collect();
            let mut best = 1.0f64; // k = 0 gives |phi| scaled by g below.
            if m >= 1 {
                for uj in &u {
                    best = best.max(uj.norm());
                }
            }
            if m >= 2 {
                for (j, uj) in u.iter().enumerate() {
                    for (l, ul) in u.iter().enumerate() {
                        let second = if j == l {
                            uj * ul - Complex64::new(TAU * a, 0.0)
                        } else {
                            uj * ul
                        };
                        best = best.max(second.norm());
                    }
                }
            }
            let weight = 1.0f64.max(y.norm().powi(m as i32));
            weight * best * g
        };
        let pitch = match dim {
            1 => 1e-3,
            2 => 5e-3,
            _ => 2e-2,
        };
        let (value, _argmax) = grid_max(dim, center, reach, pitch, &value_at);
        Ok(SchwartzNorm { m, value, grid_pitch: pitch, fd_step: None, error_estimate: 0.0 })
    }

    fn product_norm_fd(&self, m: usize) -> Result<SchwartzNorm> {
        let dim = self.dim();
        let h = 1e-5;
        let (factor_eval, half_width): (Box<dyn Fn(f64) -> f64>, f64) = match self {
            TestFunction::Plateau { .. } => {
                let f = self.plateau_factor().unwrap();
                (Box::new(move |t| f.eval(t)), f.outer)
            }
            TestFunction::BumpAutocorrelation { .. } => {
                let f = self.autocorr_factor().unwrap();
                (
                    Box::new(move |t| f.eval(t).unwrap_or(f64::NAN)),
                    f.support_radius(),
                )
            }
            _ => unreachable!(),
        };
        let pitch = match dim {
            1 => 1e-3,
            2 => 1e-2,
            _ => 5e-2,
        };
        // |D^k phi| is even in every coordinate, so the positive orthant
        // suffices. Per-axis tables share one axis grid.
        let n = (half_width / pitch).ceil() as usize + 1;
        let axis: Vec<f64> = (0..=n).map(|i| i as f64 * pitch).collect();
        let mut table = Vec::with_capacity(axis.len());
        for &g in &axis {
            let f0 = factor_eval(g);
            let fp = factor_eval(g + h);
            let fm = factor_eval(g - h);
            table.push([f0, (fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)]);
        }
        let mut best = 0.0f64;
        let mut idx = vec![0usize; dim];
        loop {
            let mut radius_sq = 0.0;
            for &i in &idx {
                radius_sq += axis[i] * axis[i];
            }
            let weight = 1.0f64.max(radius_sq.sqrt().powi(m as i32));
            // Enumerate derivative levels per axis with total order <= m.
            let mut levels = vec![0usize; dim];
            let mut dmax = 0.0f64;
            loop {
                let total: usize = levels.iter().sum();
                if total <= m {
                    let mut prod = 1.0f64;
                    for (axis_i, &lv) in idx.iter().zip(levels.iter()) {
                        prod *= table[*axis_i][lv].abs();
                    }
                    dmax = dmax.max(prod);
                }
                let mut carry = 0;
                loop {
                    levels[carry] += 1;
                    if levels[carry] <= m {
                        break;
                    }
                    levels[carry] = 0;
                    carry += 1;
                    if carry == dim {
                        break;
                    }
                }
                if carry == dim {
                    break;
                }
            }
            best = best.max(weight * dmax);
            let mut carry = 0;
            loop {
                idx[carry] += 1;
                if idx[carry] < axis.len() {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
                if carry == dim {
                    break;
                }
            }
            if carry == dim {
                break;
            }
        }
        // Third-derivative scale drives the FD error; probe it on the axis.
        let mut third = 0.0f64;
        let probe = |t: f64| -> f64 {
            match self {
                TestFunction::Plateau { .. } => {
                    self.plateau_factor().unwrap().jet(t).derivative(3).abs()
                }
                TestFunction::BumpAutocorrelation { .. } => {
                    // Young-style pointwise bound via the base bump.
                    let f = self.autocorr_factor().unwrap();
                    let b = f.base;
                    b.jet(t).derivative(3).abs() * b.derivative_l1_norm(0).unwrap_or(1.0)
                }
                _ => 0.0,
            }
        };
        let mut t = 0.0;
        while t <= half_width {
            third = third.max(probe(t));
            t += half_width / 64.0;
        }
        let mut error_estimate = h * h / 6.0 * third + f64::EPSILON / h;
        if matches!(self, TestFunction::BumpAutocorrelation { .. }) {
            // Factor values come from quadrature at 1e-12 absolute; the
            // second difference amplifies that noise by 4 / h^2.
            error_estimate += 4.0 * 1e-12 / (h * h);
        }
        Ok(SchwartzNorm {
            m,
            value: best,
            grid_pitch: pitch,
            fd_step: Some(h),
            error_estimate,
        })
    }

    /// Upper bound `C` with `|phi(t)| <= C max{1, |t|}^(-d-1)`.
    pub fn decay_constant(&self) -> Result<f64> {
        let dim = self.dim();
        let power = dim as i32 + 1;
        match self {
            TestFunction::Gaussian { scale, center, .. } => Ok(radial_gaussian_decay_sup(
                1.0,
                *scale,
                center.norm(),
                power,
            )),
            TestFunction::Plateau { outer_radius, .. } => {
                Ok(1.0f64.max(*outer_radius).powi(power))
            }
            TestFunction::BumpAutocorrelation { .. } => {
                let peak = self.autocorr_factor().unwrap().peak()?;
                Ok(peak.powi(dim as i32) * 2.0f64.powi(power))
            }
        }
    }

    /// Upper bound `C` with `|phi_hat(x)| <= C max{1, |x|}^(-d-1)`, from
    /// per-factor derivative L1 norms for the compact families and the
    /// analytic transform for Gaussians.
    pub fn transform_decay_constant(&self) -> Result<f64> {
        let dim = self.dim();
        let power = dim as i32 + 1;
        match self {
            TestFunction::Gaussian { scale, modulation, .. } => {
                let d = dim as f64;
                Ok(radial_gaussian_decay_sup(
                    scale.powf(-d / 2.0),
                    1.0 / scale,
                    modulation.norm(),
                    power,
                ))
            }
            _ => {
                let k = power as usize;
                let (m0, mk) = match self {
                    TestFunction::Plateau { .. } => {
                        let f = self.plateau_factor().unwrap();
                        (f.derivative_l1_norm(0)?, f.derivative_l1_norm(k)?)
                    }
                    TestFunction::BumpAutocorrelation { .. } => {
                        let f = self.autocorr_factor().unwrap();
                        (f.derivative_l1_norm(0)?, f.derivative_l1_norm(k)?)
                    }
                    _ => unreachable!(),
                };
                // Per-factor envelope e(u) <= min(M0, Mk / (2 pi u)^k) gives
                // sup e(u) (1+u)^k <= max(2^k M0, Mk / pi^k), one factor per
                // axis.
                let per_factor = (2.0f64.powi(power) * m0)
                    .max(mk / std::f64::consts::PI.powi(power));
                Ok(per_factor.powi(dim as i32))
            }
        }
    }
}

/// Sup over s >= 0 of `amp exp(-pi a (s - s0)^2) max(1, s)^power`, inflated
/// 5% so it stays a valid upper bound despite the grid.
fn radial_gaussian_decay_sup(amp: f64, a: f64, s0: f64, power: i32) -> f64 {
    let pi = std::f64::consts::PI;
    let mut reach = s0 + 1.0;
    while (1.0f64).max(reach.powi(power)) * (-pi * a * (reach - s0) * (reach - s0)).exp() > 1e-18
        && reach < 1e4
    {
        reach += 0.5;
    }
    let eval = |s: f64| amp * (-pi * a * (s - s0) * (s - s0)).exp() * 1.0f64.max(s.powi(power));
    let mut best = 0.0f64;
    let mut arg = 0.0f64;
    let n = 20_000;
    for i in 0..=n {
        let s = reach * i as f64 / n as f64;
        let v = eval(s);
        if v > best {
            best = v;
            arg = s;
        }
    }
    let fine = 200;
    let lo = (arg - reach / n as f64).max(0.0);
    let hi = arg + reach / n as f64;
    for i in 0..=fine {
        let s = lo + (hi - lo) * i as f64 / fine as f64;
        best = best.max(eval(s));
    }
    best * 1.05
}

/// Grid maximum over the box `center +- reach` with one refinement pass.
fn grid_max(
    dim: usize,
    center: &Point,
    reach: f64,
    pitch: f64,
    value_at: &dyn Fn(&Point) -> f64,
) -> (f64, Point) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = center.clone();
    let scan = |origin: &Point, half: f64, step: f64, best: &mut f64, arg: &mut Point| {
        let n = (2.0 * half / step).ceil() as usize;
        let mut idx = vec![0usize; dim];
        loop {
            let coords: Vec<f64> = (0..dim)
                .map(|j| origin.coords()[j] - half + idx[j] as f64 * step)
                .collect();
            let p = Point::new(coords).expect("finite grid point");
            let v = value_at(&p);
            if v > *best {
                *best = v;
                *arg = p;
            }
            let mut carry = 0;
            loop {
                idx[carry] += 1;
                if idx[carry] <= n {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
                if carry == dim {
                    break;
                }
            }
            if carry == dim {
                break;
            }
        }
    };
    scan(center, reach, pitch.max(reach / 2000.0), &mut best, &mut arg);
    let refined_origin = arg.clone();
    scan(&refined_origin, pitch, pitch / 8.0, &mut best, &mut arg);
    (best, arg)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchwartzNorm {
    pub m: usize,
    pub value: f64,
    pub grid_pitch: f64,
    pub fd_step: Option<f64>,
    pub error_estimate: f64,
}

/// `(mu * phi)(x) = sum_lambda a_lambda phi(x - lambda)` over the window.
pub fn convolve_measure(mu: &AtomicMeasure, phi: &TestFunction, x: &Point) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for atom in mu.atoms() {
        acc += atom.mass * phi.evaluate(&x.sub(&atom.location));
    }
    acc
}

/// Estimated contribution of atoms beyond the window, from the decay
/// constant of `phi` and the in-window atom density.
pub fn convolution_tail_bound(mu: &AtomicMeasure, phi: &TestFunction, x: &Point) -> Result<f64> {
    let d = mu.dim();
    let w = mu.window_radius();
    let c2 = phi.decay_constant()?;
    let vd = unit_ball_volume(d);
    let density = (mu.len() as f64 + 1.0) / (vd * w.powi(d as i32));
    let max_mass = mu
        .atoms()
        .iter()
        .map(|a| a.mass.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let dist = (w - x.norm()).max(1.0);
    Ok(max_mass * density * d as f64 * vd * c2 / dist)
}

/// Certificate that `sup |mu * phi| <= (d + 1) C1 C2` with C1 the measured
/// translation-growth constant of `mu` and C2 the decay constant of `phi`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvolutionBoundCertificate {
    pub c1: f64,
    pub c2: f64,
    pub bound: f64,
    pub observed_sup: f64,
    pub argmax: Point,
    pub sample_count: usize,
    pub tail_bound_max: f64,
    pub margin: f64,
    pub holds: bool,
}

pub fn convolution_bound_certificate(
    mu: &AtomicMeasure,
    phi: &TestFunction,
    sample_points: &[Point],
) -> Result<ConvolutionBoundCertificate> {
    if phi.dim() != mu.dim() {
        return Err(Error::Config("test function dimension mismatch".into()));
    }
    if sample_points.is_empty() {
        return Err(Error::Config("certificate needs at least one sample point".into()));
    }
    let growth = mu.translation_growth_check()?;
    if !growth.bounded {
        return Err(Error::NotTranslationBounded(format!(
            "sup-variation growth exponent {:?} exceeds the dimension",
            growth.exponent
        )));
    }
    let d = mu.dim();
    let c1 = measured_growth_constant(mu)?;
    let c2 = phi.decay_constant()?;
    let mut observed = 0.0f64;
    let mut argmax = sample_points[0].clone();
    let mut tail_max = 0.0f64;
    for p in sample_points {
        let v = convolve_measure(mu, phi, p).norm();
        tail_max = tail_max.max(convolution_tail_bound(mu, phi, p)?);
        if v > observed {
            observed = v;
            argmax = p.clone();
        }
    }
    let bound = (d as f64 + 1.0) * c1 * c2;
    Ok(ConvolutionBoundCertificate {
        c1,
        c2,
        bound,
        observed_sup: observed,
        argmax,
        sample_count: sample_points.len(),
        tail_bound_max: tail_max,
        margin: bound - observed,
        holds: observed <= bound,
    })
}

/// `C1` with `|mu_x|(B(0, r)) <= C1 max(1, r)^d`, measured over a geometric
/// radius grid through the exact (d = 1) or grid (d >= 2) sup scans.
pub fn measured_growth_constant(mu: &AtomicMeasure) -> Result<f64> {
    let d = mu.dim();
    let limit = (mu.window_radius() - mu.margin()) / 2.0;
    let mut c1 = 0.0f64;
    let mut r = 0.5;
    let mut used = 0;
    while r <= limit {
        let sup = mu.translation_bound_estimate(r)?.sup_estimate;
        c1 = c1.max(sup / 1.0f64.max(r).powi(d as i32));
        r *= 2.0;
        used += 1;
    }
    if used == 0 {
        return Err(Error::Config(format!(
            "window {} too small to measure a growth constant",
            mu.window_radius()
        )));
    }
    Ok(c1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CenterCheck {
    pub center: Point,
    pub lhs: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Certificate that a nonnegative measure with spectral data is translation
/// bounded: `mu(B(t, r)) <= max|phi| |mu_hat|(B(0, 2)) / eta` for all t,
/// with `(eta, r, x0)` found from the transform of the autocorrelation bump.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TranslationBoundCertificate {
    pub eta: f64,
    pub r: f64,
    pub x0: Point,
    pub max_phi: f64,
    pub hat_mu_ball_mass: f64,
    pub bound: f64,
    pub lipschitz: f64,
    pub grid_pitch: f64,
    pub centers_checked: usize,
    pub min_margin: f64,
    pub all_hold: bool,
    pub worst_center: Point,
}

pub fn translation_bound_certificate(
    mu: &AtomicMeasure,
    mu_hat: &AtomicMeasure,
    trial_centers: &[Point],
) -> Result<TranslationBoundCertificate> {
    let dim = mu.dim();
    if mu_hat.dim() != dim {
        return Err(Error::Config("measure pair dimensions disagree".into()));
    }
    if trial_centers.is_empty() {
        return Err(Error::Config("certificate needs trial centers".into()));
    }
    for atom in mu.atoms() {
        if atom.mass.re < -1e-12 || atom.mass.im.abs() > 1e-12 * (1.0 + atom.mass.re.abs()) {
            return Err(Error::Config(format!(
                "certificate requires nonnegative masses, found {} at {:?}",
                atom.mass,
                atom.location.coords()
            )));
        }
    }
    if mu_hat.window_radius() < 2.0 {
        return Err(Error::Config(
            "spectral window must contain B(0, 2), the support of the bump autocorrelation".into(),
        ));
    }
    let factor = AutocorrFactor { base: BumpFactor { radius: 1.0 / (dim as f64).sqrt() } };
    let pitch = 0.005;
    let reach = 1.0f64;
    let n = (reach / pitch).ceil() as usize;
    // Axis table of the per-factor transform |psi_hat|^2; the product grid
    // search below reuses it on every axis.
    let mut axis = Vec::with_capacity(n + 1);
    for i in 0..=n {
        axis.push(factor.transform(i as f64 * pitch, 1e-11)?);
    }
    let peak_hat: f64 = axis[0].powi(dim as i32);
    if !(peak_hat > 0.0) {
        return Err(Error::Prerequisite(
            "transform of the bump autocorrelation is not positive at 0; quadrature is broken".into(),
        ));
    }
    // The transform peaks at the origin (the bump is nonnegative); the grid
    // search is a guard against a broken transform, not a real search.
    let mut max_idx = 0usize;
    for (i, v) in axis.iter().enumerate() {
        if v.powi(dim as i32) > axis[max_idx].powi(dim as i32) {
            max_idx = i;
        }
    }
    if max_idx != 0 {
        return Err(Error::Prerequisite(format!(
            "transform maximizer drifted off the origin (index {max_idx}); quadrature is broken"
        )));
    }
    let x0 = Point::zero(dim)?;
    let eta = peak_hat / 2.0;
    // Lipschitz slack: |grad phi_hat| <= 2 pi * support radius * ||phi||_1,
    // and ||phi||_1 = phi_hat(0) for nonnegative phi.
    let lipschitz = TAU * 2.0 * peak_hat;
    let slack = lipschitz * pitch * (dim as f64).sqrt();
    // Largest grid radius on which the transform provably exceeds eta: the
    // product grid is scanned once (values are even per axis), tracking the
    // smallest |x| where the slack-adjusted value dips to eta.
    let mut dip_radius = f64::INFINITY;
    let mut idx = vec![0usize; dim];
    loop {
        let mut norm_sq = 0.0;
        let mut value = 1.0;
        for &i in &idx {
            let g = i as f64 * pitch;
            norm_sq += g * g;
            value *= axis[i];
        }
        if value - slack <= eta {
            dip_radius = dip_radius.min(norm_sq.sqrt());
        }
        let mut carry = 0;
        loop {
            idx[carry] += 1;
            if idx[carry] <= n {
                break;
            }
            idx[carry] = 0;
            carry += 1;
            if carry == dim {
                break;
            }
        }
        if carry == dim {
            break;
        }
    }
    // Everything strictly inside the first dip (minus one grid cell) is
    // certified above eta.
    let r = if dip_radius.is_finite() {
        dip_radius - pitch * (dim as f64).sqrt()
    } else {
        reach
    };
    if !(r > 0.0) {
        return Err(Error::Prerequisite(
            "no radius with transform above eta; quadrature is broken".into(),
        ));
    }
    let max_phi = factor.peak()?.powi(dim as i32);
    let hat_mass = mu_hat.variation_on_ball(&Point::zero(dim)?, 2.0)?.value;
    let bound = max_phi * hat_mass / eta;
    let mut min_margin = f64::INFINITY;
    let mut all_hold = true;
    let mut worst = trial_centers[0].clone();
    for t in trial_centers {
        let lhs = mu.variation_on_ball(t, r)?.value;
        let margin = bound - lhs;
        if margin < min_margin {
            min_margin = margin;
            worst = t.clone();
        }
        if lhs > bound * (1.0 + 1e-12) {
            all_hold = false;
        }
    }
    Ok(TranslationBoundCertificate {
        eta,
        r,
        x0,
        max_phi,
        hat_mu_ball_mass: hat_mass,
        bound,
        lipschitz,
        grid_pitch: pitch,
        centers_checked: trial_centers.len(),
        min_margin,
        all_hold,
        worst_center: worst,
    })
}
