//! Points of R^d for d in {1, 2, 3}.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A point of R^d with finite coordinates, d in {1, 2, 3}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::Config(format!(
                "point dimension must be 1..={MAX_DIM}, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(format!("non-finite coordinate in {coords:?}")));
        }
        Ok(Point { coords })
    }

    /// 1-d convenience constructor.
    pub fn one_d(x: f64) -> Self {
        Point::new(vec![x]).expect("finite scalar")
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Point::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(other.coords.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Point {
        Point {
            coords: self.coords.iter().map(|c| c * factor).collect(),
        }
    }

    /// Total lexicographic order used for deterministic tie-breaking.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.coords.iter().zip(other.coords.iter()) {
            match a.partial_cmp(b).expect("finite coordinates") {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.coords.len().cmp(&other.coords.len())
    }

    /// Exact bitwise location key, used to merge coincident atoms.
    pub fn bit_key(&self) -> Vec<u64> {
        // Normalize -0.0 to 0.0 so the two compare equal as keys.
        self.coords
            .iter()
            .map(|c| (if *c == 0.0 { 0.0f64 } else { *c }).to_bits())
            .collect()
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.coords
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Point::new(vec![]).is_err());
        assert!(Point::new(vec![0.0; 4]).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(Point::new(vec![1.0, 2.0, 3.0]).is_ok());
    }

    #[test]
    fn norms_and_distances() {
        let p = Point::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(p.norm(), 5.0);
        let q = Point::zero(2).unwrap();
        assert_eq!(p.dist(&q), 5.0);
        assert_eq!(p.dot(&p), 25.0);
    }

    #[test]
    fn lex_order_is_total_on_finite_points() {
        let a = Point::new(vec![1.0, 2.0]).unwrap();
        let b = Point::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
        assert_eq!(b.lex_cmp(&a), Ordering::Greater);
        assert_eq!(a.lex_cmp(&a), Ordering::Equal);
    }

    #[test]
    fn serde_round_trip_as_bare_array() {
        let p = Point::new(vec![0.5, -1.5]).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[0.5,-1.5]");
        let back: Point = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
