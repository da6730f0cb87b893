//! Exact propagation through the eigendecomposition of a Hamiltonian.
//!
//! The time-evolution operator is `U_t = exp(+iHt/ħ)` and observables evolve
//! as `A(t) = U_t A U_t†`. With this convention the Schrödinger-picture state
//! is `U_t†|ψ⟩ = exp(−iHt/ħ)|ψ⟩`, so both pictures give the same
//! expectation values.
//!
//! Eigenvectors are phase-fixed so their largest-magnitude component is real
//! and positive. Within a degenerate eigenspace the eigenvectors themselves
//! are not reproducible across solvers, but every propagated quantity is.

use std::sync::Arc;

use faer::{c64, Col, Mat, Side};

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::operator::{commutator, Hermiticity, Operator, HERMITICITY_TOLERANCE};
use crate::series::{validate_grid, TimeSeries};
use crate::state::{QuantumState, NORM_TOLERANCE};

#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    basis: Arc<BasisSpec>,
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<c64>,
    hbar: f64,
}

impl SpectralPropagator {
    pub fn new(h: &Operator) -> Result<Self> {
        if h.hermiticity() != Hermiticity::Hermitian || h.hermiticity_defect() > HERMITICITY_TOLERANCE {
            return Err(Error::NotHermitian);
        }
        let evd = h
            .matrix()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let eigenvalues: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
        if eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigensolver("non-finite eigenvalue".into()));
        }
        let mut eigenvectors = evd.U().to_owned();
        fix_phases(&mut eigenvectors);
        Ok(Self {
            basis: h.basis().clone(),
            eigenvalues,
            eigenvectors,
            hbar: h.basis().hbar(),
        })
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> faer::MatRef<'_, c64> {
        self.eigenvectors.as_ref()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `‖VΛV† − H‖_F / ‖H‖_F`.
    pub fn reconstruction_error(&self, h: &Operator) -> f64 {
        let v = &self.eigenvectors;
        let vl = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        let rebuilt = &vl * v.adjoint();
        let scale = h.frobenius_norm();
        let diff = (&rebuilt - h.matrix()).norm_l2();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }

    /// `max |V†V − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.adjoint() * v;
        let n = gram.nrows();
        (&gram - Mat::<c64>::identity(n, n)).norm_max()
    }

    fn phases(&self, t: f64, sign: f64) -> Vec<c64> {
        self.eigenvalues
            .iter()
            .map(|&l| c64::cis(sign * l * t / self.hbar))
            .collect()
    }

    /// `U_t = V diag(exp(iλt/ħ)) V†`.
    pub fn unitary(&self, t: f64) -> Mat<c64> {
        let ph = self.phases(t, 1.0);
        let v = &self.eigenvectors;
        let vd = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * ph[j]);
        &vd * v.adjoint()
    }

    fn check_basis(&self, basis: &Arc<BasisSpec>) -> Result<()> {
        if Arc::ptr_eq(&self.basis, basis) || *self.basis == **basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    /// `A` expressed in the eigenbasis, reusable across many times.
    pub fn to_eigenbasis(&self, a: &Operator) -> Result<EigenbasisOperator> {
        self.check_basis(a.basis())?;
        let v = &self.eigenvectors;
        let inner = v.adjoint() * a.matrix();
        Ok(EigenbasisOperator {
            matrix: &inner * v,
            hermiticity: a.hermiticity(),
        })
    }

    /// `U_t A U_t†` for an operator already in the eigenbasis.
    pub fn evolve_eigenbasis(&self, a: &EigenbasisOperator, t: f64) -> Result<Operator> {
        if !t.is_finite() {
            return Err(Error::NonFinite { t });
        }
        let ph = self.phases(t, 1.0);
        let m = &a.matrix;
        let rotated = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * ph[i] * ph[j].conj());
        let v = &self.eigenvectors;
        let left = v * &rotated;
        Ok(Operator::from_parts(
            self.basis.clone(),
            &left * v.adjoint(),
            a.hermiticity,
        ))
    }

    /// `exp(−iHt/ħ)|ψ⟩`, expanded as `V diag(exp(−iλt/ħ)) V†ψ`.
    pub fn evolve_state(&self, psi: &QuantumState, t: f64) -> Result<QuantumState> {
        self.check_basis(psi.basis())?;
        let c = self.eigenvectors.adjoint() * psi.amplitudes();
        self.state_from_coefficients(&c, t)
    }

    fn state_from_coefficients(&self, c: &Col<c64>, t: f64) -> Result<QuantumState> {
        if !t.is_finite() {
            return Err(Error::NonFinite { t });
        }
        let ph = self.phases(t, -1.0);
        let rotated = Col::from_fn(c.nrows(), |k| c[k] * ph[k]);
        Ok(QuantumState::from_parts(
            self.basis.clone(),
            &self.eigenvectors * &rotated,
        ))
    }
}

/// An operator transformed into the eigenbasis of a propagator.
#[derive(Debug, Clone)]
pub struct EigenbasisOperator {
    matrix: Mat<c64>,
    hermiticity: Hermiticity,
}

fn fix_phases(v: &mut Mat<c64>) {
    for j in 0..v.ncols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..v.nrows() {
            let a = v[(i, j)].norm();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if best_abs > 0.0 {
            let z = v[(best, j)];
            let phase = z.conj() / z.norm();
            for i in 0..v.nrows() {
                v[(i, j)] *= phase;
            }
            v[(best, j)] = c64::new(v[(best, j)].re, 0.0);
        }
    }
}

pub fn make_propagator(h: &Operator) -> Result<SpectralPropagator> {
    SpectralPropagator::new(h)
}

/// `A(t) = U_t A U_t†`.
pub fn heisenberg_evolve(prop: &SpectralPropagator, a: &Operator, t: f64) -> Result<Operator> {
    let eig = prop.to_eigenbasis(a)?;
    prop.evolve_eigenbasis(&eig, t)
}

pub fn schrodinger_evolve(prop: &SpectralPropagator, psi: &QuantumState, t: f64) -> Result<QuantumState> {
    prop.evolve_state(psi, t)
}

/// Instantaneous Heisenberg derivative `(i/ħ)[H, A]`.
pub fn heisenberg_rhs(h: &Operator, a: &Operator) -> Result<Operator> {
    let hbar = h.basis().hbar();
    Ok(commutator(h, a)?.scale_complex(c64::new(0.0, 1.0 / hbar)))
}

/// Observable sampled along a Schrödinger trajectory, optionally with its
/// uncertainty in a `delta_<name>` channel.
pub struct Observable<'a> {
    pub name: String,
    pub operator: &'a Operator,
    pub with_uncertainty: bool,
}

impl<'a> Observable<'a> {
    pub fn mean(name: impl Into<String>, operator: &'a Operator) -> Self {
        Self {
            name: name.into(),
            operator,
            with_uncertainty: false,
        }
    }

    pub fn with_spread(name: impl Into<String>, operator: &'a Operator) -> Self {
        Self {
            name: name.into(),
            operator,
            with_uncertainty: true,
        }
    }
}

/// Real parts of `⟨ψ(t)|A|ψ(t)⟩` on `times`, one channel per observable.
pub fn sample_expectations(
    prop: &SpectralPropagator,
    psi0: &QuantumState,
    observables: &[Observable<'_>],
    times: &[f64],
) -> Result<TimeSeries> {
    validate_grid(times)?;
    prop.check_basis(psi0.basis())?;
    for o in observables {
        prop.check_basis(o.operator.basis())?;
        if o.with_uncertainty && !o.operator.is_hermitian() {
            return Err(Error::NotHermitian);
        }
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized { norm });
    }
    let c = prop.eigenvectors.adjoint() * psi0.amplitudes();
    let mut means = vec![Vec::with_capacity(times.len()); observables.len()];
    let mut spreads = vec![Vec::with_capacity(times.len()); observables.len()];
    for &t in times {
        let psi = prop.state_from_coefficients(&c, t)?;
        let amps = psi.amplitudes();
        for (k, o) in observables.iter().enumerate() {
            let a_psi = o.operator.matrix() * amps;
            let mean: c64 = amps.adjoint() * &a_psi;
            means[k].push(mean.re);
            if o.with_uncertainty {
                let second = a_psi.squared_norm_l2();
                spreads[k].push((second - mean.re * mean.re).max(0.0).sqrt());
            }
        }
    }
    let mut series = TimeSeries::new(times.to_vec())?;
    for ((o, m), s) in observables.iter().zip(means).zip(spreads) {
        series.push_channel(o.name.clone(), m)?;
        if o.with_uncertainty {
            series.push_channel(format!("delta_{}", o.name), s)?;
        }
    }
    Ok(series)
}

/// Real parts of `⟨ψ₀|A(t)|ψ₀⟩` with `A(t)` propagated as a full matrix.
pub fn sample_heisenberg_expectations(
    prop: &SpectralPropagator,
    psi0: &QuantumState,
    observables: &[Observable<'_>],
    times: &[f64],
) -> Result<TimeSeries> {
    validate_grid(times)?;
    let eig: Vec<_> = observables
        .iter()
        .map(|o| prop.to_eigenbasis(o.operator))
        .collect::<Result<_>>()?;
    let mut series = TimeSeries::new(times.to_vec())?;
    for (o, e) in observables.iter().zip(&eig) {
        let mut values = Vec::with_capacity(times.len());
        for &t in times {
            let at = prop.evolve_eigenbasis(e, t)?;
            values.push(crate::state::expectation(psi0, &at)?.re);
        }
        series.push_channel(o.name.clone(), values)?;
    }
    Ok(series)
}
