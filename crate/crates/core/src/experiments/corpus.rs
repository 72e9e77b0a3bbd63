//! The bundled lattice-comb corpus used by the harnesses and the CLI
//! examples: four 1-d combs and the unit square lattice.

use num_complex::Complex64;

use crate::error::Result;
use crate::geometry::Point;
use crate::lattice::{Lattice, LatticeCombSpec, LatticeMode, ShiftedLatticeTerm};

fn comb(step: f64, shift: f64, alpha: f64, window: f64) -> Result<LatticeCombSpec> {
    let term = ShiftedLatticeTerm::new(
        Lattice::scaled_integers(step)?,
        Point::one_d(shift),
        vec![LatticeMode { beta: Complex64::new(1.0, 0.0), alpha: Point::one_d(alpha) }],
    )?;
    LatticeCombSpec::new(1, window, vec![term])
}

/// Unit masses on Z.
pub fn unit_comb(window: f64) -> Result<LatticeCombSpec> {
    comb(1.0, 0.0, 0.0, window)
}

/// Unit masses on 2Z.
pub fn scaled_comb(window: f64) -> Result<LatticeCombSpec> {
    comb(2.0, 0.0, 0.0, window)
}

/// Unit masses on Z + 1/2.
pub fn shifted_comb(window: f64) -> Result<LatticeCombSpec> {
    comb(1.0, 0.5, 0.0, window)
}

/// Masses `exp(2 pi i 0.3 n)` on Z.
pub fn modulated_comb(window: f64) -> Result<LatticeCombSpec> {
    comb(1.0, 0.0, 0.3, window)
}

/// Unit masses on Z^2.
pub fn square_lattice(window: f64) -> Result<LatticeCombSpec> {
    let term = ShiftedLatticeTerm::new(
        Lattice::hypercubic(2)?,
        Point::zero(2)?,
        vec![LatticeMode { beta: Complex64::new(1.0, 0.0), alpha: Point::zero(2)? }],
    )?;
    LatticeCombSpec::new(2, window, vec![term])
}

/// The whole corpus with stable labels.
pub fn all(window: f64) -> Result<Vec<(&'static str, LatticeCombSpec)>> {
    Ok(vec![
        ("unit_comb", unit_comb(window)?),
        ("scaled_comb", scaled_comb(window)?),
        ("shifted_comb", shifted_comb(window)?),
        ("modulated_comb", modulated_comb(window)?),
        ("square_lattice", square_lattice(window)?),
    ])
}
