//! Exact integer and rational arithmetic: multinomial coefficients and the
//! saturated integer kernel of a rational matrix. Nothing here touches
//! floating point; these are the certificate paths.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Coefficient of `z_1^m_1 ... z_n^m_n` in `(1 + z_1 + ... + z_n)^q`:
/// the multinomial `q! / (m_1! ... m_n! (q - sum)!)`.
pub fn multinomial(q: u32, parts: &[u32]) -> Result<BigUint> {
    let used: u32 = parts.iter().sum();
    if used > q {
        return Err(Error::Config(format!("multinomial parts sum {used} exceeds q = {q}")));
    }
    let mut remaining = q;
    let mut acc = BigUint::one();
    for &m in parts {
        acc *= binomial(remaining, m);
        remaining -= m;
    }
    Ok(acc)
}

fn binomial(n: u32, k: u32) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// The exact rational carried by an f64 (every finite double is dyadic).
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::Config(format!("{x} has no rational representation")))
}

/// Height of a reduced rational: max(|numerator|, denominator). Decides
/// whether an f64 input counts as "exactly rational" for certificate work
/// or as a float approximation of an irrational.
pub fn rational_height(x: &BigRational) -> BigUint {
    let n = x.numer().abs().to_biguint().expect("abs");
    let d = x.denom().abs().to_biguint().expect("abs");
    n.max(d)
}

/// Basis of the full integer kernel `{m in Z^N : A m = 0}` of a rational
/// `d x N` matrix, computed by unimodular column reduction; the basis is
/// saturated (it generates every integer kernel vector), each vector is
/// primitive with positive leading entry, and the list is sorted.
pub fn integer_kernel(matrix: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    let rows = matrix.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = matrix[0].len();
    if cols == 0 {
        return Vec::new();
    }
    // Row-wise denominator clearing preserves the kernel.
    let mut work: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| {
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, x| num_integer::lcm(acc, x.denom().clone()));
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect()
        })
        .collect();
    let mut unimodular: Vec<Vec<BigInt>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();

    let mut pivot = 0usize;
    for row in 0..rows {
        if pivot >= cols {
            break;
        }
        loop {
            // Smallest nonzero entry in this row among active columns.
            let mut best: Option<usize> = None;
            for j in pivot..cols {
                if !work[row][j].is_zero()
                    && best.is_none_or(|b| work[row][j].abs() < work[row][b].abs())
                {
                    best = Some(j);
                }
            }
            let Some(jmin) = best else { break };
            if jmin != pivot {
                swap_columns(&mut work, jmin, pivot);
                unimodular.swap(jmin, pivot);
            }
            let mut reduced_all = true;
            for j in pivot + 1..cols {
                if work[row][j].is_zero() {
                    continue;
                }
                let quotient = &work[row][j] / &work[row][pivot];
                if !quotient.is_zero() {
                    for row_data in work.iter_mut() {
                        let delta = &quotient * &row_data[pivot];
                        row_data[j] -= delta;
                    }
                    let pivot_col = unimodular[pivot].clone();
                    for (u, p) in unimodular[j].iter_mut().zip(pivot_col.iter()) {
                        *u -= &quotient * p;
                    }
                }
                if !work[row][j].is_zero() {
                    reduced_all = false;
                }
            }
            if reduced_all {
                pivot += 1;
                break;
            }
        }
    }

    let mut kernel: Vec<Vec<BigInt>> = unimodular[pivot..].to_vec();
    for vector in &mut kernel {
        normalize_sign(vector);
    }
    kernel.sort();
    kernel
}

fn swap_columns(matrix: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in matrix.iter_mut() {
        row.swap(a, b);
    }
}

fn normalize_sign(vector: &mut [BigInt]) {
    if let Some(first) = vector.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            for v in vector.iter_mut() {
                *v = -v.clone();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn multinomials_of_squared_trinomial() {
        // (1 + z)^2: coefficients 1, 2, 1.
        assert_eq!(multinomial(2, &[0]).unwrap(), BigUint::from(1u32));
        assert_eq!(multinomial(2, &[1]).unwrap(), BigUint::from(2u32));
        assert_eq!(multinomial(2, &[2]).unwrap(), BigUint::from(1u32));
        // (1 + z1 + z2)^3: coefficient of z1 z2 is 3!/1!1!1! = 6.
        assert_eq!(multinomial(3, &[1, 1]).unwrap(), BigUint::from(6u32));
        assert!(multinomial(2, &[3]).is_err());
    }

    #[test]
    fn multinomial_row_sums_are_powers() {
        // sum over all exponent tuples of the multinomial is (n+1)^q.
        for n in 1..=4usize {
            for q in 0..=6u32 {
                let mut total = BigUint::zero();
                let mut stack = vec![(vec![0u32; n], 0usize)];
                // enumerate m in {0..q}^n with sum <= q
                let mut tuples = Vec::new();
                while let Some((m, axis)) = stack.pop() {
                    if axis == n {
                        tuples.push(m);
                        continue;
                    }
                    let used: u32 = m.iter().sum();
                    for v in 0..=(q - used) {
                        let mut next = m.clone();
                        next[axis] = v;
                        stack.push((next, axis + 1));
                    }
                }
                for m in tuples {
                    total += multinomial(q, &m).unwrap();
                }
                let expected = BigUint::from(n as u32 + 1).pow(q);
                assert_eq!(total, expected, "n {n} q {q}");
            }
        }
    }

    #[test]
    fn dyadic_rationals_round_trip() {
        let r = rational_from_f64(0.25).unwrap();
        assert_eq!(r, rat(1, 4));
        assert_eq!(rational_height(&r).to_u64(), Some(4));
        // 0.3 is not 3/10 in binary; its height is astronomical.
        let r3 = rational_from_f64(0.3).unwrap();
        assert!(rational_height(&r3) > BigUint::from(1_000_000u64));
    }

    #[test]
    fn kernel_of_one_by_two_matrix() {
        // m1 * 1 + m2 * 2 = 0 has kernel generated by (2, -1).
        let kernel = integer_kernel(&[vec![rat(1, 1), rat(2, 1)]]);
        assert_eq!(kernel.len(), 1);
        assert_eq!(kernel[0], vec![BigInt::from(2), BigInt::from(-1)]);
    }

    #[test]
    fn kernel_is_saturated_not_just_spanning() {
        // Rows: x1 = (2, 0), x2 = (0, 3), x3 = (2, 3) as columns of a 2x3
        // matrix; kernel is generated by (1, 1, -1), not a multiple.
        let kernel = integer_kernel(&[
            vec![rat(2, 1), rat(0, 1), rat(2, 1)],
            vec![rat(0, 1), rat(3, 1), rat(3, 1)],
        ]);
        assert_eq!(kernel.len(), 1);
        assert_eq!(kernel[0], vec![BigInt::from(1), BigInt::from(1), BigInt::from(-1)]);
    }

    #[test]
    fn kernel_handles_rational_entries() {
        // (1/2) m1 + (1/3) m2 = 0 -> 3 m1 + 2 m2 = 0 -> (2, -3).
        let kernel = integer_kernel(&[vec![rat(1, 2), rat(1, 3)]]);
        assert_eq!(kernel.len(), 1);
        assert_eq!(kernel[0], vec![BigInt::from(2), BigInt::from(-3)]);
    }

    #[test]
    fn full_rank_matrix_has_trivial_kernel() {
        let kernel = integer_kernel(&[
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 1)],
        ]);
        assert!(kernel.is_empty());
    }

    #[test]
    fn kernel_vectors_annihilate_the_matrix() {
        let matrix = vec![
            vec![rat(6, 1), rat(10, 1), rat(15, 1), rat(7, 1)],
            vec![rat(2, 1), rat(4, 1), rat(6, 1), rat(2, 1)],
        ];
        let kernel = integer_kernel(&matrix);
        assert_eq!(kernel.len(), 2);
        for vector in &kernel {
            for row in &matrix {
                let mut acc = BigRational::zero();
                for (x, m) in row.iter().zip(vector.iter()) {
                    acc += x * BigRational::from(m.clone());
                }
                assert!(acc.is_zero());
            }
        }
    }
}
