//! Full-rank lattices, dual lattices, and the realization of finite
//! lattice-comb specifications into atomic-measure pairs `(mu, mu_hat)` with
//! closed-form ground truth.
//!
//! A comb specification is a finite list of shifted lattices, each carrying
//! finitely many exponential modes `(beta, alpha)`. Its measure deposits
//! mass `sum_s beta_s exp(2 pi i <x, alpha_s>)` at every point `x` of each
//! shifted lattice, and its Fourier transform is again an atomic measure,
//! supported on shifted dual lattices. The closed form used here is checked
//! against an independent Poisson-summation oracle in the experiments
//! module before the harnesses rely on it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::AtomicMeasure;

/// Default cap on enumerated atoms per realization.
pub const DEFAULT_ATOM_CAP: u64 = 10_000_000;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A full-rank lattice of R^d, d in {1, 2, 3}, spanned by `basis`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "LatticeJson", into = "LatticeJson")]
pub struct Lattice {
    dim: usize,
    /// Basis vectors, each of length `dim`.
    basis: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct LatticeJson(Vec<Vec<f64>>);

impl TryFrom<LatticeJson> for Lattice {
    type Error = Error;
    fn try_from(j: LatticeJson) -> Result<Self> {
        let dim = j.0.len();
        Lattice::new(dim, j.0)
    }
}

impl From<Lattice> for LatticeJson {
    fn from(l: Lattice) -> LatticeJson {
        LatticeJson(l.basis)
    }
}

impl Lattice {
    pub fn new(dim: usize, basis: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 || dim > crate::geometry::MAX_DIM {
            return Err(Error::Config(format!("lattice dimension must be 1..=3, got {dim}")));
        }
        if basis.len() != dim || basis.iter().any(|v| v.len() != dim) {
            return Err(Error::Config(format!(
                "basis must be a {dim}x{dim} matrix of basis vectors"
            )));
        }
        if basis.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Config("non-finite basis entry".into()));
        }
        let lattice = Lattice { dim, basis };
        let det = lattice.det();
        let scale: f64 = lattice
            .basis
            .iter()
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
            .product();
        let threshold = 1e-12 * scale;
        if det.abs() <= threshold {
            return Err(Error::SingularBasis { det: det.abs(), threshold });
        }
        Ok(lattice)
    }

    /// 1-d lattice `step * Z`.
    pub fn scaled_integers(step: f64) -> Result<Self> {
        Lattice::new(1, vec![vec![step]])
    }

    /// Z^d with the standard basis.
    pub fn hypercubic(dim: usize) -> Result<Self> {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Lattice::new(dim, basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_vectors(&self) -> &[Vec<f64>] {
        &self.basis
    }

    fn det(&self) -> f64 {
        let b = &self.basis;
        match self.dim {
            1 => b[0][0],
            2 => b[0][0] * b[1][1] - b[0][1] * b[1][0],
            3 => {
                b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
                    - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                    + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0])
            }
            _ => unreachable!("dimension validated"),
        }
    }

    /// Covolume `|det|`, always recomputed from the basis.
    pub fn covolume(&self) -> f64 {
        self.det().abs()
    }

    /// The dual lattice: vectors with integer inner products against every
    /// lattice vector. Its basis is the inverse transpose of `basis`, so
    /// `<u_i, v_j> = delta_ij`.
    pub fn dual(&self) -> Result<Lattice> {
        let inv = self.basis_inverse();
        // Row i of the inverse of the matrix whose rows are the basis
        // vectors... we need u_i = column i of inv(V) where V has the basis
        // vectors as rows. Columns of inv are exactly those.
        let dual_basis: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| inv[j][i]).collect())
            .collect();
        Lattice::new(self.dim, dual_basis)
    }

    /// Inverse of the matrix whose rows are the basis vectors.
    fn basis_inverse(&self) -> Vec<Vec<f64>> {
        let b = &self.basis;
        let det = self.det();
        match self.dim {
            1 => vec![vec![1.0 / b[0][0]]],
            2 => vec![
                vec![b[1][1] / det, -b[0][1] / det],
                vec![-b[1][0] / det, b[0][0] / det],
            ],
            3 => {
                let c = |i: usize, j: usize| -> f64 {
                    let (r0, r1) = match i {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let (c0, c1) = match j {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    let minor = b[r0][c0] * b[r1][c1] - b[r0][c1] * b[r1][c0];
                    let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
                    sign * minor
                };
                // inv = adj^T / det; adj[i][j] = cofactor(j, i).
                (0..3)
                    .map(|i| (0..3).map(|j| c(j, i) / det).collect())
                    .collect()
            }
            _ => unreachable!(),
        }
    }

    /// All points `x = sum k_i v_i + shift` with `|x| <= radius`, together
    /// with their pure lattice part `sum k_i v_i`.
    ///
    /// Enumerates integer coordinates inside the axis-aligned box determined
    /// by the dual basis norms and filters by Euclidean norm.
    pub fn points_in_ball(
        &self,
        shift: &Point,
        radius: f64,
        cap: u64,
    ) -> Result<Vec<(Point, Point)>> {
        if shift.dim() != self.dim {
            return Err(Error::Config("shift dimension mismatch".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("enumeration radius must be positive, got {radius}")));
        }
        // k_i = <u_i, x - shift> with u_i the dual basis, so
        // |k_i| <= |u_i| * radius once |x| <= radius.
        let dual = self.dual()?;
        let reach = radius + shift.norm();
        let bounds: Vec<i64> = dual
            .basis
            .iter()
            .map(|u| {
                let norm = u.iter().map(|c| c * c).sum::<f64>().sqrt();
                (norm * reach + 1.0).floor() as i64
            })
            .collect();
        let mut estimated: u64 = 1;
        for &m in &bounds {
            estimated = estimated.saturating_mul((2 * m + 1) as u64);
        }
        if estimated > cap {
            return Err(Error::ResourceCap { needed: estimated, cap });
        }
        let mut out = Vec::new();
        let mut k = bounds.iter().map(|&m| -m).collect::<Vec<i64>>();
        'outer: loop {
            let mut coords = shift.coords().to_vec();
            let mut lattice_part = vec![0.0; self.dim];
            for (ki, v) in k.iter().zip(self.basis.iter()) {
                for (axis, c) in v.iter().enumerate() {
                    let contrib = *ki as f64 * c;
                    coords[axis] += contrib;
                    lattice_part[axis] += contrib;
                }
            }
            let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm <= radius {
                out.push((Point::new(coords)?, Point::new(lattice_part)?));
            }
            for axis in 0..self.dim {
                k[axis] += 1;
                if k[axis] <= bounds[axis] {
                    continue 'outer;
                }
                k[axis] = -bounds[axis];
            }
            break;
        }
        Ok(out)
    }

    /// Length of the shortest nonzero lattice vector, by enumeration out to
    /// twice the longest basis vector.
    pub fn shortest_vector_norm(&self) -> Result<f64> {
        let reach = self
            .basis
            .iter()
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0f64, f64::max)
            * 2.0;
        let origin = Point::zero(self.dim)?;
        let points = self.points_in_ball(&origin, reach, DEFAULT_ATOM_CAP)?;
        points
            .iter()
            .map(|(p, _)| p.norm())
            .filter(|n| *n > 1e-12)
            .fold(None, |acc: Option<f64>, n| Some(acc.map_or(n, |a| a.min(n))))
            .ok_or_else(|| Error::Config("no nonzero lattice vector in reach".into()))
    }
}

/// One exponential mode `beta * exp(2 pi i <x, alpha>)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeMode {
    #[serde(with = "crate::serde_util::complex_pair")]
    pub beta: Complex64,
    pub alpha: Point,
}

/// A shifted lattice with its finite list of modes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "TermJson", into = "TermJson")]
pub struct ShiftedLatticeTerm {
    pub lattice: Lattice,
    pub shift: Point,
    pub modes: Vec<LatticeMode>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    basis: Vec<Vec<f64>>,
    shift: Vec<f64>,
    modes: Vec<LatticeMode>,
}

impl TryFrom<TermJson> for ShiftedLatticeTerm {
    type Error = Error;
    fn try_from(t: TermJson) -> Result<Self> {
        let dim = t.basis.len();
        ShiftedLatticeTerm::new(Lattice::new(dim, t.basis)?, Point::new(t.shift)?, t.modes)
    }
}

impl From<ShiftedLatticeTerm> for TermJson {
    fn from(t: ShiftedLatticeTerm) -> TermJson {
        TermJson {
            basis: t.lattice.basis.clone(),
            shift: t.shift.coords().to_vec(),
            modes: t.modes,
        }
    }
}

impl ShiftedLatticeTerm {
    pub fn new(lattice: Lattice, shift: Point, modes: Vec<LatticeMode>) -> Result<Self> {
        if shift.dim() != lattice.dim() {
            return Err(Error::Config("shift dimension mismatch".into()));
        }
        if modes.is_empty() {
            return Err(Error::Config("a lattice term needs at least one mode".into()));
        }
        for m in &modes {
            if m.alpha.dim() != lattice.dim() {
                return Err(Error::Config("mode frequency dimension mismatch".into()));
            }
            if !(m.beta.re.is_finite() && m.beta.im.is_finite()) {
                return Err(Error::Config("non-finite mode coefficient".into()));
            }
        }
        Ok(ShiftedLatticeTerm { lattice, shift, modes })
    }
}

/// A finite union of shifted lattice terms restricted to `B(0, W)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct LatticeCombSpec {
    dim: usize,
    window_radius: f64,
    terms: Vec<ShiftedLatticeTerm>,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    dim: usize,
    window: f64,
    terms: Vec<ShiftedLatticeTerm>,
}

impl TryFrom<SpecJson> for LatticeCombSpec {
    type Error = Error;
    fn try_from(s: SpecJson) -> Result<Self> {
        LatticeCombSpec::new(s.dim, s.window, s.terms)
    }
}

impl From<LatticeCombSpec> for SpecJson {
    fn from(s: LatticeCombSpec) -> SpecJson {
        SpecJson {
            dim: s.dim,
            window: s.window_radius,
            terms: s.terms,
        }
    }
}

impl LatticeCombSpec {
    pub fn new(dim: usize, window_radius: f64, terms: Vec<ShiftedLatticeTerm>) -> Result<Self> {
        if !(window_radius > 0.0 && window_radius.is_finite()) {
            return Err(Error::Config(format!(
                "window radius must be positive, got {window_radius}"
            )));
        }
        for t in &terms {
            if t.lattice.dim() != dim {
                return Err(Error::Config("all terms must share the comb dimension".into()));
            }
        }
        Ok(LatticeCombSpec { dim, window_radius, terms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window_radius(&self) -> f64 {
        self.window_radius
    }

    pub fn terms(&self) -> &[ShiftedLatticeTerm] {
        &self.terms
    }

    /// The measure: mass `sum_s beta_s exp(2 pi i <x, alpha_s>)` at every
    /// enumerated point `x` of each shifted lattice; coincident points merge
    /// by summation.
    pub fn realize_measure(&self) -> Result<AtomicMeasure> {
        self.realize_measure_in_window(self.window_radius)
    }

    pub fn realize_measure_in_window(&self, window: f64) -> Result<AtomicMeasure> {
        let mut atoms = Vec::new();
        for term in &self.terms {
            for (location, _) in term.lattice.points_in_ball(&term.shift, window, DEFAULT_ATOM_CAP)? {
                let mut mass = Complex64::new(0.0, 0.0);
                for mode in &term.modes {
                    mass += mode.beta * Complex64::from_polar(1.0, TAU * location.dot(&mode.alpha));
                }
                atoms.push((location, mass));
            }
        }
        AtomicMeasure::new(self.dim, window, atoms)
    }

    /// The Fourier transform as an atomic measure on the spectral window:
    /// for each term `(L, lambda)` and mode `(beta, alpha)`, atoms at
    /// `alpha + gamma` for `gamma` in the dual lattice `L*`, with mass
    /// `beta / covol(L) * exp(-2 pi i <lambda, gamma>)`.
    ///
    /// The closed form follows the forward kernel `exp(-2 pi i <t, y>)` and
    /// is validated against the Poisson oracle rather than trusted.
    pub fn fourier_measure(&self) -> Result<AtomicMeasure> {
        self.fourier_measure_in_window(self.window_radius)
    }

    pub fn fourier_measure_in_window(&self, window: f64) -> Result<AtomicMeasure> {
        let mut atoms = Vec::new();
        for term in &self.terms {
            let dual = term.lattice.dual()?;
            let covol_inv = 1.0 / term.lattice.covolume();
            for mode in &term.modes {
                for (location, gamma) in dual.points_in_ball(&mode.alpha, window, DEFAULT_ATOM_CAP)? {
                    let phase = -TAU * term.shift.dot(&gamma);
                    let mass = mode.beta * covol_inv * Complex64::from_polar(1.0, phase);
                    atoms.push((location, mass));
                }
            }
        }
        AtomicMeasure::new(self.dim, window, atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn comb_spec(step: f64, shift: f64, modes: Vec<(Complex64, f64)>, window: f64) -> LatticeCombSpec {
        let term = ShiftedLatticeTerm::new(
            Lattice::scaled_integers(step).unwrap(),
            Point::one_d(shift),
            modes
                .into_iter()
                .map(|(beta, alpha)| LatticeMode { beta, alpha: Point::one_d(alpha) })
                .collect(),
        )
        .unwrap();
        LatticeCombSpec::new(1, window, vec![term]).unwrap()
    }

    #[test]
    fn dual_of_scaled_integers() {
        let l = Lattice::scaled_integers(2.0).unwrap();
        let dual = l.dual().unwrap();
        assert_abs_diff_eq!(dual.basis_vectors()[0][0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dual.covolume(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn identity_basis_is_self_dual() {
        for dim in 1..=3 {
            let l = Lattice::hypercubic(dim).unwrap();
            let dual = l.dual().unwrap();
            for (u, v) in dual.basis_vectors().iter().zip(l.basis_vectors()) {
                for (a, b) in u.iter().zip(v.iter()) {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn sheared_basis_dual_is_inverse_transpose() {
        // det 1 implies dual covolume 1.
        let l = Lattice::new(2, vec![vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let dual = l.dual().unwrap();
        assert_abs_diff_eq!(dual.covolume(), 1.0, epsilon = 1e-14);
        // <u_i, v_j> = delta_ij.
        for (i, u) in dual.basis_vectors().iter().enumerate() {
            for (j, v) in l.basis_vectors().iter().enumerate() {
                let dot: f64 = u.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn covolume_product_with_dual_is_one() {
        let bases = vec![
            Lattice::new(2, vec![vec![1.5, 0.25], vec![-0.5, 2.0]]).unwrap(),
            Lattice::new(3, vec![
                vec![1.0, 0.2, 0.0],
                vec![0.0, 1.4, 0.3],
                vec![0.5, 0.0, 0.8],
            ])
            .unwrap(),
        ];
        for l in bases {
            let product = l.covolume() * l.dual().unwrap().covolume();
            assert!((product - 1.0).abs() < 1e-12, "product {product}");
        }
    }

    #[test]
    fn double_dual_generates_the_same_lattice() {
        let l = Lattice::new(2, vec![vec![1.5, 0.25], vec![-0.5, 2.0]]).unwrap();
        let dd = l.dual().unwrap().dual().unwrap();
        // Change of basis between l and its double dual must be an integer
        // matrix of determinant +-1; here it is in fact near identity, but
        // only integrality is asserted.
        let dual = l.dual().unwrap();
        let mut change = vec![vec![0.0; 2]; 2];
        for (i, w) in dd.basis_vectors().iter().enumerate() {
            for (j, u) in dual.basis_vectors().iter().enumerate() {
                change[i][j] = w.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            }
        }
        let mut det = change[0][0] * change[1][1] - change[0][1] * change[1][0];
        for row in &change {
            for c in row {
                assert!((c - c.round()).abs() < 1e-10, "non-integer change of basis {c}");
            }
        }
        det = det.round();
        assert!(det.abs() == 1.0, "det {det}");
    }

    #[test]
    fn singular_basis_is_rejected() {
        let err = Lattice::new(2, vec![vec![1.0, 2.0], vec![0.5, 1.0]]);
        assert!(matches!(err, Err(Error::SingularBasis { .. })));
    }

    #[test]
    fn unit_comb_realizes_unit_masses() {
        let spec = comb_spec(1.0, 0.0, vec![(Complex64::new(1.0, 0.0), 0.0)], 10.5);
        let mu = spec.realize_measure().unwrap();
        assert_eq!(mu.len(), 21);
        for atom in mu.atoms() {
            assert_abs_diff_eq!(atom.mass.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(atom.mass.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn modulated_comb_masses_are_unit_phases() {
        let spec = comb_spec(1.0, 0.0, vec![(Complex64::new(1.0, 0.0), 0.3)], 5.5);
        let mu = spec.realize_measure().unwrap();
        for atom in mu.atoms() {
            let n = atom.location.coords()[0];
            let expected = Complex64::from_polar(1.0, TAU * 0.3 * n);
            assert_abs_diff_eq!(atom.mass.re, expected.re, epsilon = 1e-12);
            assert_abs_diff_eq!(atom.mass.im, expected.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn opposite_modes_cancel_to_empty_measure() {
        let spec = comb_spec(
            1.0,
            0.0,
            vec![
                (Complex64::new(1.0, 0.0), 0.0),
                (Complex64::new(-1.0, 0.0), 0.0),
            ],
            5.5,
        );
        let mu = spec.realize_measure().unwrap();
        assert!(mu.is_empty());
    }

    #[test]
    fn unit_comb_spectrum_is_self_dual() {
        let spec = comb_spec(1.0, 0.0, vec![(Complex64::new(1.0, 0.0), 0.0)], 5.5);
        let hat = spec.fourier_measure().unwrap();
        assert_eq!(hat.len(), 11);
        for atom in hat.atoms() {
            let k = atom.location.coords()[0];
            assert_abs_diff_eq!(k, k.round(), epsilon = 1e-12);
            assert_abs_diff_eq!(atom.mass.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(atom.mass.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn modulated_comb_spectrum_is_shifted() {
        let spec = comb_spec(1.0, 0.0, vec![(Complex64::new(1.0, 0.0), 0.3)], 5.5);
        let hat = spec.fourier_measure().unwrap();
        for atom in hat.atoms() {
            let g = atom.location.coords()[0] - 0.3;
            assert_abs_diff_eq!(g, g.round(), epsilon = 1e-12);
            assert_abs_diff_eq!(atom.mass.re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn shifted_comb_spectrum_alternates_sign() {
        let spec = comb_spec(1.0, 0.5, vec![(Complex64::new(1.0, 0.0), 0.0)], 5.5);
        let hat = spec.fourier_measure().unwrap();
        for atom in hat.atoms() {
            let k = atom.location.coords()[0].round() as i64;
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(atom.mass.re, expected, epsilon = 1e-12);
            assert_abs_diff_eq!(atom.mass.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fourier_is_linear_over_terms() {
        let term_a = ShiftedLatticeTerm::new(
            Lattice::scaled_integers(1.0).unwrap(),
            Point::one_d(0.0),
            vec![LatticeMode { beta: Complex64::new(1.0, 0.0), alpha: Point::one_d(0.0) }],
        )
        .unwrap();
        let term_b = ShiftedLatticeTerm::new(
            Lattice::scaled_integers(2.0).unwrap(),
            Point::one_d(0.5),
            vec![LatticeMode { beta: Complex64::new(0.0, 1.0), alpha: Point::one_d(0.25) }],
        )
        .unwrap();
        let both = LatticeCombSpec::new(1, 6.5, vec![term_a.clone(), term_b.clone()])
            .unwrap()
            .fourier_measure()
            .unwrap();
        let a = LatticeCombSpec::new(1, 6.5, vec![term_a]).unwrap().fourier_measure().unwrap();
        let b = LatticeCombSpec::new(1, 6.5, vec![term_b]).unwrap().fourier_measure().unwrap();
        for atom in both.atoms() {
            let merged = a.mass_at(&atom.location) + b.mass_at(&atom.location);
            assert_abs_diff_eq!(atom.mass.re, merged.re, epsilon = 1e-12);
            assert_abs_diff_eq!(atom.mass.im, merged.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_mode_spectrum_gap_is_shortest_dual_vector() {
        let l = Lattice::new(2, vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let term = ShiftedLatticeTerm::new(
            l.clone(),
            Point::zero(2).unwrap(),
            vec![LatticeMode { beta: Complex64::new(1.0, 0.0), alpha: Point::new(vec![0.1, 0.2]).unwrap() }],
        )
        .unwrap();
        let spec = LatticeCombSpec::new(2, 4.5, vec![term]).unwrap();
        let hat = spec.fourier_measure().unwrap();
        let mut min_gap = f64::INFINITY;
        for (i, a) in hat.atoms().iter().enumerate() {
            for b in hat.atoms().iter().skip(i + 1) {
                min_gap = min_gap.min(a.location.dist(&b.location));
            }
        }
        let shortest = l.dual().unwrap().shortest_vector_norm().unwrap();
        assert_abs_diff_eq!(min_gap, shortest, epsilon = 1e-10);
        assert_abs_diff_eq!(shortest, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let l = Lattice::scaled_integers(0.001).unwrap();
        let err = l.points_in_ball(&Point::one_d(0.0), 1e6, 1000);
        assert!(matches!(err, Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = comb_spec(
            2.0,
            0.5,
            vec![(Complex64::new(1.0, -1.0), 0.3)],
            8.0,
        );
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"basis\":[[2.0]]"));
        assert!(json.contains("\"beta\":[1.0,-1.0]"));
        let back: LatticeCombSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
