//! Ladder-operator construction of the canonical observables.
//!
//! On one dof with length scale `ℓ`:
//! `x = ℓ/√2 (a + a†)` and `p = iħ/(ℓ√2) (a† − a)`,
//! with `a|n⟩ = √n |n−1⟩` truncated to the lowest `n_levels` states.

use std::sync::Arc;

use faer::{c64, Mat, MatRef};

use crate::basis::BasisSpec;
use crate::error::Result;
use crate::operator::{Hermiticity, Operator};

/// Truncated lowering operator on a single dof.
pub fn lowering_factor(n_levels: usize) -> Mat<c64> {
    Mat::from_fn(n_levels, n_levels, |i, j| {
        if j == i + 1 {
            c64::new((j as f64).sqrt(), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// Single-dof position matrix (real, symmetric, tridiagonal, zero diagonal).
pub fn position_factor(n_levels: usize, length_scale: f64) -> Mat<c64> {
    let s = length_scale / std::f64::consts::SQRT_2;
    Mat::from_fn(n_levels, n_levels, |i, j| {
        if i + 1 == j || j + 1 == i {
            c64::new(s * (i.max(j) as f64).sqrt(), 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// Single-dof momentum matrix (imaginary, hermitian, tridiagonal).
pub fn momentum_factor(n_levels: usize, length_scale: f64, hbar: f64) -> Mat<c64> {
    let s = hbar / (length_scale * std::f64::consts::SQRT_2);
    Mat::from_fn(n_levels, n_levels, |i, j| {
        // ⟨i|a†|j⟩ = √(j+1) δ_{i,j+1},  ⟨i|a|j⟩ = √j δ_{i+1,j}
        if i == j + 1 {
            c64::new(0.0, s * (i as f64).sqrt())
        } else if j == i + 1 {
            c64::new(0.0, -s * (j as f64).sqrt())
        } else {
            c64::new(0.0, 0.0)
        }
    })
}

/// Kronecker product of one factor per dof (dof 0 leftmost).
pub fn kron_all(factors: &[MatRef<'_, c64>]) -> Mat<c64> {
    let mut acc = Mat::<c64>::identity(1, 1);
    for f in factors {
        let mut next = Mat::zeros(acc.nrows() * f.nrows(), acc.ncols() * f.ncols());
        faer::linalg::kron::kron(next.as_mut(), acc.as_ref(), *f);
        acc = next;
    }
    acc
}

/// Places a single-dof factor on `dof`, identity elsewhere.
pub fn embed(basis: &BasisSpec, dof: usize, factor: MatRef<'_, c64>) -> Mat<c64> {
    let n = basis.n_levels();
    let eye = Mat::<c64>::identity(n, n);
    let factors: Vec<MatRef<'_, c64>> = (0..basis.n_dofs())
        .map(|d| if d == dof { factor } else { eye.as_ref() })
        .collect();
    kron_all(&factors)
}

pub fn position_operator(basis: &Arc<BasisSpec>, dof: usize) -> Result<Operator> {
    basis.check_dof(dof)?;
    let f = position_factor(basis.n_levels(), basis.length_scale(dof));
    Ok(Operator::from_parts(
        basis.clone(),
        embed(basis, dof, f.as_ref()),
        Hermiticity::Hermitian,
    ))
}

pub fn momentum_operator(basis: &Arc<BasisSpec>, dof: usize) -> Result<Operator> {
    basis.check_dof(dof)?;
    let f = momentum_factor(basis.n_levels(), basis.length_scale(dof), basis.hbar());
    Ok(Operator::from_parts(
        basis.clone(),
        embed(basis, dof, f.as_ref()),
        Hermiticity::Hermitian,
    ))
}

pub fn lowering_operator(basis: &Arc<BasisSpec>, dof: usize) -> Result<Operator> {
    basis.check_dof(dof)?;
    let f = lowering_factor(basis.n_levels());
    Ok(Operator::from_parts(
        basis.clone(),
        embed(basis, dof, f.as_ref()),
        Hermiticity::General,
    ))
}
