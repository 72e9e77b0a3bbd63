//! Truncated Taylor series ("jets") for exact derivatives of the smooth
//! glue functions, up to fourth order. Coefficients are Taylor coefficients
//! `c[k] = f^(k)(x) / k!`.

#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub c: [f64; 5],
}

impl Jet {
    pub fn constant(value: f64) -> Jet {
        Jet { c: [value, 0.0, 0.0, 0.0, 0.0] }
    }

    /// The identity function at `x`.
    pub fn variable(x: f64) -> Jet {
        Jet { c: [x, 1.0, 0.0, 0.0, 0.0] }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// `f^(k)(x)`, k <= 4.
    pub fn derivative(&self, k: usize) -> f64 {
        const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];
        self.c[k] * FACT[k]
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(other.c.iter()) {
            *a += b;
        }
        Jet { c }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let mut c = self.c;
        for (a, b) in c.iter_mut().zip(other.c.iter()) {
            *a -= b;
        }
        Jet { c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut c = self.c;
        for v in &mut c {
            *v *= s;
        }
        Jet { c }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let mut c = [0.0; 5];
        for i in 0..5 {
            for j in 0..5 - i {
                c[i + j] += self.c[i] * other.c[j];
            }
        }
        Jet { c }
    }

    /// Power-series division; the divisor's constant term must be nonzero.
    pub fn div(&self, other: &Jet) -> Jet {
        let mut c = [0.0; 5];
        for k in 0..5 {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= other.c[j] * c[k - j];
            }
            c[k] = acc / other.c[0];
        }
        Jet { c }
    }

    pub fn recip(&self) -> Jet {
        Jet::constant(1.0).div(self)
    }

    /// `exp` via the recurrence `e_k = (1/k) sum_{j=1..k} j u_j e_{k-j}`.
    pub fn exp(&self) -> Jet {
        let mut c = [0.0; 5];
        c[0] = self.c[0].exp();
        for k in 1..5 {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = acc / k as f64;
        }
        Jet { c }
    }

    /// Rescales the inner variable: if `self` is the jet of `f` at `u0` and
    /// `u = rate * t + const`, returns the jet of `t -> f(u(t))`.
    pub fn compose_affine(&self, rate: f64) -> Jet {
        let mut c = self.c;
        let mut power = 1.0;
        for v in c.iter_mut().skip(1) {
            power *= rate;
            *v *= power;
        }
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exp_of_variable_matches_known_derivatives() {
        let x = 0.7f64;
        let j = Jet::variable(x).exp();
        for k in 0..5 {
            assert_abs_diff_eq!(j.derivative(k), x.exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn reciprocal_derivatives() {
        // f(x) = 1/x: f^(k)(x) = (-1)^k k! x^(-k-1).
        let x = 1.3f64;
        let j = Jet::variable(x).recip();
        for k in 0..5 {
            let fact: f64 = (1..=k).product::<usize>() as f64;
            let expected = (-1.0f64).powi(k as i32) * fact * x.powi(-(k as i32) - 1);
            assert_abs_diff_eq!(j.derivative(k), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn composite_exp_of_negative_reciprocal() {
        // h(s) = exp(-1/s); h'(s) = h(s)/s^2. Compare at s = 0.5 against
        // central differences of the closed form.
        let s = 0.5f64;
        let h = Jet::variable(s).recip().scale(-1.0).exp();
        let f = |t: f64| (-1.0 / t).exp();
        let step = 1e-4;
        let fd1 = (f(s + step) - f(s - step)) / (2.0 * step);
        let fd2 = (f(s + step) - 2.0 * f(s) + f(s - step)) / (step * step);
        assert_abs_diff_eq!(h.value(), f(s), epsilon = 1e-15);
        assert_abs_diff_eq!(h.derivative(1), fd1, epsilon = 1e-6);
        assert_abs_diff_eq!(h.derivative(2), fd2, epsilon = 1e-4);
    }

    #[test]
    fn affine_composition_scales_derivatives() {
        let u = 0.4f64;
        let rate = -2.5f64;
        let base = Jet::variable(u).exp();
        let composed = base.compose_affine(rate);
        for k in 0..5 {
            assert_abs_diff_eq!(
                composed.derivative(k),
                u.exp() * rate.powi(k as i32),
                epsilon = 1e-10
            );
        }
    }
}
