//! Restriction and prolongation between consecutive polynomial degrees.
//!
//! In Legendre modal coordinates restriction is truncation and prolongation
//! zero-padding; the nodal matrices are `ρ_i = V_i Î V_{i+1}^{-1}` and
//! `π_{i+1} = V_{i+1} Î^T V_i^{-1}` with Vandermonde matrices at the
//! Gauss–Legendre points of each degree.

use crate::error::{Error, Result};
use crate::polynomial;
use crate::RMat;

#[derive(Debug, Clone)]
pub struct TransferOperators {
    /// `restrict[i]` maps degree `i + 1` to degree `i`, shape `(i+1) x (i+2)`.
    pub restrict: Vec<RMat>,
    /// `prolong[i]` maps degree `i` to degree `i + 1`, shape `(i+2) x (i+1)`.
    pub prolong: Vec<RMat>,
    /// `vandermonde[i]` at the degree-`i` points.
    pub vandermonde: Vec<RMat>,
}

impl TransferOperators {
    pub fn finest(&self) -> usize {
        self.restrict.len()
    }

    /// Matrix taking degree `level` to `level - 1`.
    pub fn rho(&self, level: usize) -> &RMat {
        &self.restrict[level - 1]
    }

    /// Matrix taking degree `level - 1` to `level`.
    pub fn pi(&self, level: usize) -> &RMat {
        &self.prolong[level - 1]
    }
}

/// Transfers for all degrees `0..=p` at Gauss–Legendre points.
pub fn build_transfers(p: usize) -> Result<TransferOperators> {
    if p < 1 {
        return Err(Error::param("p", "p-multigrid needs at least degree 1"));
    }
    let vandermonde: Vec<RMat> = (0..=p)
        .map(|i| polynomial::vandermonde(&polynomial::gauss_legendre_points(i + 1)))
        .collect();
    let inverses = vandermonde
        .iter()
        .map(|v| {
            v.clone()
                .try_inverse()
                .ok_or_else(|| Error::Singular("Legendre Vandermonde matrix".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut restrict = Vec::with_capacity(p);
    let mut prolong = Vec::with_capacity(p);
    for i in 0..p {
        let truncate = RMat::from_fn(i + 1, i + 2, |r, c| if r == c { 1.0 } else { 0.0 });
        restrict.push(&vandermonde[i] * &truncate * &inverses[i + 1]);
        prolong.push(&vandermonde[i + 1] * truncate.transpose() * &inverses[i]);
    }
    Ok(TransferOperators {
        restrict,
        prolong,
        vandermonde,
    })
}
