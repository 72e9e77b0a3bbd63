//! Bessel functions J0, J1 and the averaging kernels of Euclidean balls.
//!
//! The Bessel evaluations use the classical rational approximations of
//! Abramowitz & Stegun 9.4; their absolute error is comfortably below
//! [`BESSEL_ABS_ERR`], which callers fold into their analytic error budgets.

/// Conservative absolute error bound for `bessel_j0` / `bessel_j1`.
pub const BESSEL_ABS_ERR: f64 = 1e-6;

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let p1 = 57568490574.0
            + y * (-13362590354.0
                + y * (651619640.7
                    + y * (-11214424.18 + y * (77392.33017 + y * (-184.9052456)))));
        let p2 = 57568490411.0
            + y * (1029532985.0
                + y * (9494680.718 + y * (59272.64853 + y * (267.8532712 + y))));
        p1 / p2
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 0.785398164;
        let p1 = 1.0
            + y * (-0.1098628627e-2
                + y * (0.2734510407e-4 + y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
        let p2 = -0.1562499995e-1
            + y * (0.1430488765e-3
                + y * (-0.6911147651e-5 + y * (0.7621095161e-6 + y * (-0.934935152e-7))));
        (std::f64::consts::FRAC_2_PI / ax).sqrt() * (xx.cos() * p1 - z * xx.sin() * p2)
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let p1 = x
            * (72362614232.0
                + y * (-7895059235.0
                    + y * (242396853.1
                        + y * (-2972611.439 + y * (15704.48260 + y * (-30.16036606))))));
        let p2 = 144725228442.0
            + y * (2300535178.0
                + y * (18583304.74 + y * (99447.43394 + y * (376.9991397 + y))));
        p1 / p2
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 2.356194491;
        let p1 = 1.0
            + y * (0.183105e-2
                + y * (-0.3516396496e-4 + y * (0.2457520174e-5 + y * (-0.240337019e-6))));
        let p2 = 0.04687499995
            + y * (-0.2002690873e-3
                + y * (0.8449199096e-5 + y * (-0.88228987e-6 + y * 0.105787412e-6)));
        let ans = (std::f64::consts::FRAC_2_PI / ax).sqrt() * (xx.cos() * p1 - z * xx.sin() * p2);
        if x < 0.0 {
            -ans
        } else {
            ans
        }
    }
}

/// Normalized averaging kernel of the unit-ball family in dimension `dim`:
/// the mean of `exp(i <t, w>)` over `t` in a ball of radius `R`, evaluated
/// at `z = R |w|`.
///
/// - d = 1: `sin z / z`
/// - d = 2: `2 J1(z) / z`
/// - d = 3: `3 (sin z - z cos z) / z^3`
pub fn ball_kernel(dim: usize, z: f64) -> f64 {
    let z = z.abs();
    match dim {
        1 => {
            if z < 1e-4 {
                1.0 - z * z / 6.0 + z.powi(4) / 120.0
            } else {
                z.sin() / z
            }
        }
        2 => {
            if z < 1e-4 {
                1.0 - z * z / 8.0 + z.powi(4) / 192.0
            } else {
                2.0 * bessel_j1(z) / z
            }
        }
        3 => {
            if z < 1e-3 {
                1.0 - z * z / 10.0 + z.powi(4) / 280.0
            } else {
                3.0 * (z.sin() - z * z.cos()) / (z * z * z)
            }
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// `A_d` such that `|ball_kernel(d, z)| <= min(1, A_d / z)` for all z > 0.
///
/// - d = 1: `|sin z / z| <= 1/z`.
/// - d = 2: `|J1| <= 0.5819`, so `|2 J1(z)/z| <= 1.17/z`.
/// - d = 3: `|sin z - z cos z| <= 1 + z <= 2z` for `z >= 1` gives `6/z^2`,
///   and the kernel is at most 1 below that.
pub fn ball_kernel_tail_constant(dim: usize) -> f64 {
    match dim {
        1 => 1.0,
        2 => 1.17,
        3 => 6.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}
