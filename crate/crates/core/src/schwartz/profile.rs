//! One-dimensional smooth profiles built from `exp(-1/s)` glue: the smooth
//! step, plateau factors, compactly supported bumps, and bump
//! autocorrelations. Multidimensional test functions are products of these
//! factors, which keeps their transforms and derivative norms certifiable
//! one axis at a time.

use crate::error::Result;
use crate::jet::Jet;
use crate::quad;

/// Below this distance from the glue edges the profile is flat to far
/// beyond double precision (values under exp(-200)), so jets short-circuit.
const EDGE_GUARD: f64 = 0.005;

/// `h(s) = exp(-1/s)` for s > 0, else 0.
fn glue(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for s <= 0, 1 for s >= 1.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = glue(s);
        a / (a + glue(1.0 - s))
    }
}

/// Jet of the smooth step at `s`, derivatives up to fourth order.
pub fn smooth_step_jet(s: f64) -> Jet {
    if s <= EDGE_GUARD {
        return Jet::constant(if s <= 0.0 { 0.0 } else { smooth_step(s) });
    }
    if s >= 1.0 - EDGE_GUARD {
        return Jet::constant(if s >= 1.0 { 1.0 } else { smooth_step(s) });
    }
    let sj = Jet::variable(s);
    let a = sj.recip().scale(-1.0).exp();
    let one_minus = Jet::constant(1.0).sub(&sj);
    let b = one_minus.recip().scale(-1.0).exp();
    a.div(&a.add(&b))
}

/// 1-d plateau profile: 1 on `[-inner, inner]`, 0 outside `(-outer, outer)`,
/// smooth-step glue in between.
#[derive(Clone, Copy, Debug)]
pub struct PlateauFactor {
    pub inner: f64,
    pub outer: f64,
}

impl PlateauFactor {
    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= self.inner {
            1.0
        } else if a >= self.outer {
            0.0
        } else {
            smooth_step((self.outer - a) / (self.outer - self.inner))
        }
    }

    /// Jet in `t`; `t = 0` sits in the flat plateau so one-sidedness of
    /// `|t|` never matters where derivatives are nonzero.
    pub fn jet(&self, t: f64) -> Jet {
        let a = t.abs();
        if a <= self.inner {
            return Jet::constant(1.0);
        }
        if a >= self.outer {
            return Jet::constant(0.0);
        }
        let width = self.outer - self.inner;
        let u = (self.outer - a) / width;
        let rate = -t.signum() / width;
        smooth_step_jet(u).compose_affine(rate)
    }

    /// `L1` norm of the k-th derivative, k <= 4. An upper bound: the
    /// quadrature error is added on top.
    pub fn derivative_l1_norm(&self, k: usize) -> Result<f64> {
        if k == 0 {
            let band = quad::integrate(smooth_step, 0.0, 1.0, 1e-11)?;
            let width = self.outer - self.inner;
            return Ok(2.0 * (self.inner + width * band.value) + 2.0 * width * band.abs_error);
        }
        let width = self.outer - self.inner;
        let band = quad::integrate(
            |s| smooth_step_jet(s).derivative(k).abs(),
            0.0,
            1.0,
            1e-9,
        )?;
        Ok(2.0 * width.powi(1 - k as i32) * (band.value + band.abs_error))
    }
}

/// 1-d standard bump `exp(-1/(1 - (t/radius)^2))` supported in
/// `(-radius, radius)`.
#[derive(Clone, Copy, Debug)]
pub struct BumpFactor {
    pub radius: f64,
}

impl BumpFactor {
    pub fn eval(&self, t: f64) -> f64 {
        let u = t / self.radius;
        let w = 1.0 - u * u;
        if w <= 0.0 {
            0.0
        } else {
            (-1.0 / w).exp()
        }
    }

    pub fn jet(&self, t: f64) -> Jet {
        let u = t / self.radius;
        let w0 = 1.0 - u * u;
        if w0 <= EDGE_GUARD {
            return Jet::constant(self.eval(t));
        }
        let uj = Jet::variable(u);
        let w = Jet::constant(1.0).sub(&uj.mul(&uj));
        let value = w.recip().scale(-1.0).exp();
        value.compose_affine(1.0 / self.radius)
    }

    pub fn integral(&self) -> Result<f64> {
        let q = quad::integrate(|t| self.eval(t), -self.radius, self.radius, 1e-12)?;
        Ok(q.value)
    }

    pub fn square_integral(&self) -> Result<f64> {
        let q = quad::integrate(
            |t| {
                let v = self.eval(t);
                v * v
            },
            -self.radius,
            self.radius,
            1e-12,
        )?;
        Ok(q.value)
    }

    pub fn derivative_l1_norm(&self, k: usize) -> Result<f64> {
        let q = quad::integrate(
            |t| self.jet(t).derivative(k).abs(),
            -self.radius,
            self.radius,
            1e-9,
        )?;
        Ok(q.value + q.abs_error)
    }

    /// Real Fourier transform `2 int_0^r psi(t) cos(2 pi u t) dt`.
    pub fn transform(&self, u: f64, abs_tol: f64) -> Result<f64> {
        let q = quad::integrate(
            |t| self.eval(t) * (2.0 * std::f64::consts::PI * u * t).cos(),
            -self.radius,
            self.radius,
            abs_tol,
        )?;
        Ok(q.value)
    }
}

/// Autocorrelation `a(u) = int psi(u - s) psi(s) ds` of a 1-d bump; real,
/// even, supported in `(-2 radius, 2 radius)`, with `a_hat = |psi_hat|^2`.
#[derive(Clone, Copy, Debug)]
pub struct AutocorrFactor {
    pub base: BumpFactor,
}

impl AutocorrFactor {
    pub fn support_radius(&self) -> f64 {
        2.0 * self.base.radius
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let r = self.base.radius;
        let lo = (-r).max(u - r);
        let hi = r.min(u + r);
        if lo >= hi {
            return Ok(0.0);
        }
        let q = quad::integrate(|s| self.base.eval(u - s) * self.base.eval(s), lo, hi, 1e-12)?;
        Ok(q.value)
    }

    /// Peak value `a(0) = ||psi||_2^2`, which dominates `|a|` everywhere.
    pub fn peak(&self) -> Result<f64> {
        self.base.square_integral()
    }

    /// Transform through the identity `a_hat(u) = psi_hat(u)^2 >= 0`.
    pub fn transform(&self, u: f64, abs_tol: f64) -> Result<f64> {
        let f = self.base.transform(u, abs_tol)?;
        Ok(f * f)
    }

    /// Transform by direct quadrature of the autocorrelation itself; the
    /// independent route used to validate [`AutocorrFactor::transform`].
    pub fn transform_direct(&self, u: f64, abs_tol: f64) -> Result<f64> {
        let reach = self.support_radius();
        let q = quad::integrate(
            |t| {
                self.eval(t).unwrap_or(f64::NAN)
                    * (2.0 * std::f64::consts::PI * u * t).cos()
            },
            -reach,
            reach,
            abs_tol,
        )?;
        Ok(q.value)
    }

    /// Young's inequality bound `||a^(k)||_1 <= ||psi^(k)||_1 ||psi||_1`.
    pub fn derivative_l1_norm(&self, k: usize) -> Result<f64> {
        Ok(self.base.derivative_l1_norm(k)? * self.base.derivative_l1_norm(0)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn smooth_step_boundary_values() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(2.0), 1.0);
        assert_abs_diff_eq!(smooth_step(0.5), 0.5, epsilon = 1e-15);
        assert!(smooth_step(0.3) > 0.0 && smooth_step(0.3) < 0.5);
    }

    #[test]
    fn smooth_step_jet_matches_finite_differences() {
        let s = 0.37;
        let j = smooth_step_jet(s);
        let h = 1e-5;
        let fd1 = (smooth_step(s + h) - smooth_step(s - h)) / (2.0 * h);
        let fd2 = (smooth_step(s + h) - 2.0 * smooth_step(s) + smooth_step(s - h)) / (h * h);
        assert_abs_diff_eq!(j.value(), smooth_step(s), epsilon = 1e-15);
        assert_abs_diff_eq!(j.derivative(1), fd1, epsilon = 1e-7);
        assert_abs_diff_eq!(j.derivative(2), fd2, epsilon = 1e-4);
    }

    #[test]
    fn plateau_factor_values() {
        let p = PlateauFactor { inner: 1.0, outer: 2.0 };
        assert_eq!(p.eval(0.5), 1.0);
        assert_eq!(p.eval(-1.0), 1.0);
        assert_eq!(p.eval(2.5), 0.0);
        let mid = p.eval(1.5);
        assert!(mid > 0.0 && mid < 1.0);
        assert_eq!(p.eval(1.5), p.eval(-1.5));
    }

    #[test]
    fn plateau_derivative_norms_scale_with_bandwidth() {
        let wide = PlateauFactor { inner: 1.0, outer: 2.0 };
        let narrow = PlateauFactor { inner: 1.0, outer: 1.5 };
        let w1 = wide.derivative_l1_norm(1).unwrap();
        let n1 = narrow.derivative_l1_norm(1).unwrap();
        // First-derivative L1 mass is 2 regardless of band width (it is the
        // total rise and fall), up to quadrature slack.
        assert_abs_diff_eq!(w1, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(n1, 2.0, epsilon = 1e-6);
        // Second derivative concentrates as the band narrows.
        let w2 = wide.derivative_l1_norm(2).unwrap();
        let n2 = narrow.derivative_l1_norm(2).unwrap();
        assert!(n2 > w2);
    }

    #[test]
    fn bump_is_supported_in_open_interval() {
        let b = BumpFactor { radius: 1.0 };
        assert_eq!(b.eval(1.0), 0.0);
        assert_eq!(b.eval(-1.2), 0.0);
        assert_abs_diff_eq!(b.eval(0.0), (-1.0f64).exp(), epsilon = 1e-15);
        // Known value of the standard bump integral on (-1, 1).
        assert_abs_diff_eq!(b.integral().unwrap(), 0.443993816168, epsilon = 1e-9);
    }

    #[test]
    fn autocorr_is_even_with_peak_at_zero() {
        let a = AutocorrFactor { base: BumpFactor { radius: 1.0 } };
        let p = a.peak().unwrap();
        assert_abs_diff_eq!(a.eval(0.0).unwrap(), p, epsilon = 1e-12);
        assert_abs_diff_eq!(a.eval(0.7).unwrap(), a.eval(-0.7).unwrap(), epsilon = 1e-12);
        assert!(a.eval(0.7).unwrap() < p);
        assert_eq!(a.eval(2.0).unwrap(), 0.0);
    }

    #[test]
    fn autocorr_transform_routes_agree_and_are_nonnegative() {
        let a = AutocorrFactor { base: BumpFactor { radius: 1.0 } };
        for &u in &[0.0, 0.3, 0.9, 1.7, 3.2] {
            let via_identity = a.transform(u, 1e-11).unwrap();
            let direct = a.transform_direct(u, 1e-8).unwrap();
            assert!(via_identity >= 0.0);
            assert_abs_diff_eq!(via_identity, direct, epsilon = 1e-6);
        }
        // At zero the transform is (int psi)^2.
        let i = a.base.integral().unwrap();
        assert_abs_diff_eq!(a.transform(0.0, 1e-11).unwrap(), i * i, epsilon = 1e-10);
    }
}
