//! Adaptive quadrature on Gauss–Kronrod 7-15 panels, plus averages over
//! Euclidean balls built from nested 1-d rules.
//!
//! Panels split worst-error-first until the absolute target is met; failure
//! to converge is an error carrying the achieved tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// 15-point Kronrod abscissae on [-1, 1] (positive half, descending).
/// Published table values, kept at full precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Kronrod weights matching `XGK`.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Embedded 7-point Gauss weights (for XGK indices 1, 3, 5, 7).
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_PANELS: usize = 4096;

#[derive(Clone, Copy, Debug)]
pub struct ComplexQuadrature {
    pub value: Complex64,
    pub abs_error: f64,
    pub panels: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod_panel(f: &mut impl FnMut(f64) -> Complex64, a: f64, b: f64) -> Panel {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = Complex64::new(0.0, 0.0);
    let mut gauss = Complex64::new(0.0, 0.0);
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let contribution = if x == 0.0 {
            f(mid)
        } else {
            f(mid - half * x) + f(mid + half * x)
        };
        kronrod += wk * contribution;
        // Odd Kronrod indices (including the center node at 7) are the
        // embedded 7-point Gauss nodes.
        if i % 2 == 1 {
            gauss += WG[i / 2] * contribution;
        }
    }
    let value = kronrod * half;
    let error = (kronrod - gauss).norm() * half.abs();
    Panel { a, b, value, error }
}

/// Adaptive integral of a complex-valued integrand over `[a, b]`.
pub fn integrate_complex(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<ComplexQuadrature> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Config("quadrature bounds must be finite".into()));
    }
    if a == b {
        return Ok(ComplexQuadrature { value: Complex64::new(0.0, 0.0), abs_error: 0.0, panels: 0 });
    }
    let mut heap = BinaryHeap::new();
    heap.push(kronrod_panel(&mut f, a, b));
    let mut panels = 1usize;
    loop {
        let total_error: f64 = heap.iter().map(|p| p.error).sum();
        if total_error <= abs_tol {
            let value = heap.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
            return Ok(ComplexQuadrature { value, abs_error: total_error, panels });
        }
        if panels >= MAX_PANELS {
            return Err(Error::Quadrature { achieved: total_error, target: abs_tol });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval at floating-point resolution; accept what we have.
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        heap.push(kronrod_panel(&mut f, worst.a, mid));
        heap.push(kronrod_panel(&mut f, mid, worst.b));
        panels += 1;
    }
}

/// Adaptive integral of a real integrand over `[a, b]`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    let r = integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, abs_tol)?;
    Ok(Quadrature { value: r.value.re, abs_error: r.abs_error, panels: r.panels })
}

/// Average of `f` over the ball `B(center, radius)`, with the reported
/// error already normalized by the ball volume. Supports d in {1, 2, 3}
/// through nested 1-d rules in polar / spherical coordinates.
pub fn ball_average_complex(
    f: &dyn Fn(&Point) -> Complex64,
    center: &Point,
    radius: f64,
    abs_tol: f64,
) -> Result<(Complex64, f64)> {
    if !(radius > 0.0) {
        return Err(Error::Config(format!("averaging radius must be positive, got {radius}")));
    }
    let dim = center.dim();
    let c = center.coords();
    match dim {
        1 => {
            let volume = 2.0 * radius;
            let r = integrate_complex(
                |t| f(&Point::one_d(t)),
                c[0] - radius,
                c[0] + radius,
                abs_tol * volume * 0.9,
            )?;
            Ok((r.value / volume, r.abs_error / volume))
        }
        2 => {
            let volume = std::f64::consts::PI * radius * radius;
            let inner_tol = abs_tol * volume / (8.0 * radius);
            let outer = integrate_complex(
                |rho| {
                    let ring = integrate_complex(
                        |theta| {
                            let p = Point::new(vec![
                                c[0] + rho * theta.cos(),
                                c[1] + rho * theta.sin(),
                            ])
                            .expect("finite");
                            f(&p)
                        },
                        0.0,
                        2.0 * std::f64::consts::PI,
                        inner_tol,
                    )
                    .map(|q| q.value)
                    .unwrap_or(Complex64::new(f64::NAN, 0.0));
                    ring * rho
                },
                0.0,
                radius,
                abs_tol * volume * 0.5,
            )?;
            if !outer.value.re.is_finite() {
                return Err(Error::Quadrature { achieved: f64::INFINITY, target: abs_tol });
            }
            Ok((outer.value / volume, outer.abs_error / volume + abs_tol * 0.5))
        }
        3 => {
            let volume = 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
            let tol_phi = abs_tol * volume / 24.0;
            let tol_theta = tol_phi / 4.0;
            let outer = integrate_complex(
                |rho| {
                    let shell = integrate_complex(
                        |phi| {
                            let circle = integrate_complex(
                                |theta| {
                                    let p = Point::new(vec![
                                        c[0] + rho * phi.sin() * theta.cos(),
                                        c[1] + rho * phi.sin() * theta.sin(),
                                        c[2] + rho * phi.cos(),
                                    ])
                                    .expect("finite");
                                    f(&p)
                                },
                                0.0,
                                2.0 * std::f64::consts::PI,
                                tol_theta,
                            )
                            .map(|q| q.value)
                            .unwrap_or(Complex64::new(f64::NAN, 0.0));
                            circle * phi.sin()
                        },
                        0.0,
                        std::f64::consts::PI,
                        tol_phi,
                    )
                    .map(|q| q.value)
                    .unwrap_or(Complex64::new(f64::NAN, 0.0));
                    shell * rho * rho
                },
                0.0,
                radius,
                abs_tol * volume * 0.5,
            )?;
            if !outer.value.re.is_finite() {
                return Err(Error::Quadrature { achieved: f64::INFINITY, target: abs_tol });
            }
            Ok((outer.value / volume, outer.abs_error / volume + abs_tol * 0.5))
        }
        _ => Err(Error::Config(format!("unsupported dimension {dim}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12).unwrap();
        // Antiderivative x^4/4 - x^2 + x evaluated on [-1, 3].
        assert_abs_diff_eq!(q.value, 16.0, epsilon = 1e-10);
    }

    #[test]
    fn gaussian_integral_matches_erf_free_form() {
        // int exp(-pi t^2) over R is 1; truncation at 6 is below 1e-15.
        let q = integrate(|x| (-std::f64::consts::PI * x * x).exp(), -6.0, 6.0, 1e-13).unwrap();
        assert_abs_diff_eq!(q.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let q = integrate_complex(
            |x| Complex64::from_polar(1.0, -40.0 * x),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap();
        // int exp(-40 i x) dx = (1 - exp(-40 i)) / (40 i).
        let expected = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -40.0))
            / Complex64::new(0.0, 40.0);
        assert_abs_diff_eq!(q.value.re, expected.re, epsilon = 1e-11);
        assert_abs_diff_eq!(q.value.im, expected.im, epsilon = 1e-11);
    }

    #[test]
    fn non_convergence_is_reported() {
        // An oscillation far beyond the panel budget cannot reach 1e-12.
        let r = integrate(|x: f64| (1.0e6 * x).sin(), 0.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn ball_average_of_constant_is_constant() {
        for dim in 1..=3usize {
            let center = Point::zero(dim).unwrap();
            let (v, err) = ball_average_complex(
                &|_| Complex64::new(2.5, -1.0),
                &center,
                1.3,
                1e-9,
            )
            .unwrap();
            assert_abs_diff_eq!(v.re, 2.5, epsilon = 1e-8);
            assert_abs_diff_eq!(v.im, -1.0, epsilon = 1e-8);
            assert!(err <= 1e-8, "err {err}");
        }
    }

    #[test]
    fn ball_average_of_plane_wave_matches_kernel_d1() {
        // Average of exp(2 pi i omega t) over [x-R, x+R] is
        // exp(2 pi i omega x) sin(2 pi R omega) / (2 pi R omega).
        let omega = 0.7;
        let x = 0.3;
        let big_r = 5.0;
        let (v, _) = ball_average_complex(
            &|p| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * omega * p.coords()[0]),
            &Point::one_d(x),
            big_r,
            1e-11,
        )
        .unwrap();
        let z = 2.0 * std::f64::consts::PI * big_r * omega;
        let expected = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * omega * x)
            * (z.sin() / z);
        assert_abs_diff_eq!(v.re, expected.re, epsilon = 1e-9);
        assert_abs_diff_eq!(v.im, expected.im, epsilon = 1e-9);
    }
}
