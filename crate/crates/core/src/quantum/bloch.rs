use super::DensityOperator;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::tol;

/// `(x, y, z)` with `rho = (I + x X + y Y + z Z)/2`.
pub fn bloch_from_density(rho: &DensityOperator) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::NotQubit(rho.dim()));
    }
    let m = rho.matrix();
    let off = m[(0, 1)];
    Ok([2.0 * off.re, -2.0 * off.im, (m[(0, 0)] - m[(1, 1)]).re])
}

/// Inverse of [`bloch_from_density`]; lengths up to `1 + tol::NORM` are accepted.
pub fn density_from_bloch(v: [f64; 3]) -> Result<DensityOperator> {
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite);
    }
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if len > 1.0 + tol::NORM {
        return Err(Error::BlochOutOfBall(len));
    }
    let m = ComplexMatrix::from_rows(vec![
        vec![C64::new((1.0 + v[2]) / 2.0, 0.0), C64::new(v[0], -v[1]) / 2.0],
        vec![C64::new(v[0], v[1]) / 2.0, C64::new((1.0 - v[2]) / 2.0, 0.0)],
    ])?;
    DensityOperator::new(m)
}
