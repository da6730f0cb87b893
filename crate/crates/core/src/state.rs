//! Normalized state vectors, expectation values and uncertainties.

use std::sync::Arc;

use faer::{c64, Col};

use crate::basis::BasisSpec;
use crate::error::{invalid, Error, Result};
use crate::ladder::kron_all;
use crate::operator::Operator;

pub const NORM_TOLERANCE: f64 = 1e-12;

/// Coherent states whose probability above the truncation exceeds this are
/// rejected.
pub const COHERENT_TAIL_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<BasisSpec>,
    amplitudes: Col<c64>,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized.
    pub fn new(basis: Arc<BasisSpec>, amplitudes: Col<c64>) -> Result<Self> {
        if amplitudes.nrows() != basis.dimension() {
            return Err(Error::BasisMismatch);
        }
        let norm = amplitudes.norm_l2();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Unnormalized { norm });
        }
        Ok(Self { basis, amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(basis: Arc<BasisSpec>, amplitudes: Col<c64>) -> Result<Self> {
        if amplitudes.nrows() != basis.dimension() {
            return Err(Error::BasisMismatch);
        }
        let norm = amplitudes.norm_l2();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Unnormalized { norm });
        }
        let amplitudes = amplitudes.map(|z| z / norm);
        Ok(Self { basis, amplitudes })
    }

    pub(crate) fn from_parts(basis: Arc<BasisSpec>, amplitudes: Col<c64>) -> Self {
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &Col<c64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm_l2()
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &Self) -> Result<c64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(self.amplitudes.adjoint() * &other.amplitudes)
    }
}

/// Product Fock state `|n₀, n₁, …⟩`.
pub fn fock_state(basis: &Arc<BasisSpec>, levels: &[usize]) -> Result<QuantumState> {
    if levels.len() != basis.n_dofs() {
        return Err(invalid(
            "levels",
            format!("expected {} entries, got {}", basis.n_dofs(), levels.len()),
        ));
    }
    if let Some(&bad) = levels.iter().find(|&&l| l >= basis.n_levels()) {
        return Err(invalid(
            "levels",
            format!("level {bad} is outside a {}-level basis", basis.n_levels()),
        ));
    }
    let mut amps = Col::zeros(basis.dimension());
    amps[basis.index_of(levels)] = c64::new(1.0, 0.0);
    Ok(QuantumState::from_parts(basis.clone(), amps))
}

/// Coherent amplitudes on one dof, with the probability lost above the
/// truncation.
fn coherent_factor(n_levels: usize, alpha: c64) -> (Col<c64>, f64) {
    let mean = alpha.norm_sqr();
    let mut amps = Col::zeros(n_levels);
    let mut c = c64::new((-0.5 * mean).exp(), 0.0);
    let mut kept = 0.0;
    for n in 0..n_levels {
        amps[n] = c;
        kept += c.norm_sqr();
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    // sum the discarded Poisson tail directly rather than as 1 − kept
    let mut tail = 0.0;
    let mut n = n_levels;
    loop {
        let w = c.norm_sqr();
        tail += w;
        if (n as f64) > mean && w <= tail * 1e-17 || w == 0.0 {
            break;
        }
        c = c * alpha / ((n + 1) as f64).sqrt();
        n += 1;
    }
    let norm = kept.sqrt();
    (amps.map(|z| z / norm), tail)
}

/// Coherent state `|α⟩` on one dof, vacuum on the others, renormalized after
/// truncation.
pub fn coherent_state(basis: &Arc<BasisSpec>, dof: usize, alpha: c64) -> Result<QuantumState> {
    basis.check_dof(dof)?;
    let mut alphas = vec![c64::new(0.0, 0.0); basis.n_dofs()];
    alphas[dof] = alpha;
    product_coherent_state(basis, &alphas)
}

/// Product of coherent states, one amplitude per dof.
pub fn product_coherent_state(basis: &Arc<BasisSpec>, alphas: &[c64]) -> Result<QuantumState> {
    if alphas.len() != basis.n_dofs() {
        return Err(invalid(
            "alphas",
            format!("expected {} entries, got {}", basis.n_dofs(), alphas.len()),
        ));
    }
    let mut factors = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if !(alpha.re.is_finite() && alpha.im.is_finite()) {
            return Err(invalid("alpha", "must be finite"));
        }
        let (amps, tail) = coherent_factor(basis.n_levels(), alpha);
        if tail > COHERENT_TAIL_THRESHOLD {
            return Err(Error::CoherentTail {
                mean_number: alpha.norm_sqr(),
                tail,
                threshold: COHERENT_TAIL_THRESHOLD,
            });
        }
        factors.push(amps.as_mat().to_owned());
    }
    let refs: Vec<_> = factors.iter().map(|f| f.as_ref()).collect();
    let full = kron_all(&refs);
    let amps = Col::from_fn(full.nrows(), |i| full[(i, 0)]);
    QuantumState::normalized(basis.clone(), amps)
}

/// `⟨ψ|A|ψ⟩`.
pub fn expectation(state: &QuantumState, op: &Operator) -> Result<c64> {
    if state.basis() != op.basis() {
        return Err(Error::BasisMismatch);
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized { norm });
    }
    let a_psi = op.matrix() * &state.amplitudes;
    Ok(state.amplitudes.adjoint() * &a_psi)
}

/// `√(⟨A²⟩ − ⟨A⟩²)` for hermitian `A`, with `⟨A²⟩ = ‖Aψ‖²`.
pub fn uncertainty(state: &QuantumState, op: &Operator) -> Result<f64> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    if state.basis() != op.basis() {
        return Err(Error::BasisMismatch);
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized { norm });
    }
    let a_psi = op.matrix() * &state.amplitudes;
    let mean: c64 = state.amplitudes.adjoint() * &a_psi;
    let second = a_psi.squared_norm_l2();
    Ok((second - mean.re * mean.re).max(0.0).sqrt())
}
