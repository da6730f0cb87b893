//! Dense operators on a truncated basis.

use std::fmt;
use std::sync::Arc;

use faer::{c64, Mat, MatRef};

use crate::basis::{BasisSpec, InteriorBlock};
use crate::error::{Error, Result};

/// Relative tolerance used when a hermiticity claim is validated.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

/// Symmetry class of an operator, tracked through algebraic operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hermiticity {
    Hermitian,
    AntiHermitian,
    General,
}

impl Hermiticity {
    fn combine_linear(self, other: Self) -> Self {
        if self == other {
            self
        } else {
            Self::General
        }
    }

    fn times_imaginary(self) -> Self {
        match self {
            Self::Hermitian => Self::AntiHermitian,
            Self::AntiHermitian => Self::Hermitian,
            Self::General => Self::General,
        }
    }
}

#[derive(Clone)]
pub struct Operator {
    basis: Arc<BasisSpec>,
    matrix: Mat<c64>,
    hermiticity: Hermiticity,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("dimension", &self.dim())
            .field("hermiticity", &self.hermiticity)
            .finish()
    }
}

impl Operator {
    /// Wraps a matrix, validating the hermiticity claim.
    pub fn new(basis: Arc<BasisSpec>, matrix: Mat<c64>, hermiticity: Hermiticity) -> Result<Self> {
        let dim = basis.dimension();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::BasisMismatch);
        }
        let op = Self {
            basis,
            matrix,
            hermiticity,
        };
        let defect = match hermiticity {
            Hermiticity::Hermitian => op.hermiticity_defect(),
            Hermiticity::AntiHermitian => op.anti_hermiticity_defect(),
            Hermiticity::General => 0.0,
        };
        if defect > HERMITICITY_TOLERANCE {
            return Err(Error::NotHermitian);
        }
        Ok(op)
    }

    pub(crate) fn from_parts(basis: Arc<BasisSpec>, matrix: Mat<c64>, hermiticity: Hermiticity) -> Self {
        debug_assert_eq!(matrix.nrows(), basis.dimension());
        Self {
            basis,
            matrix,
            hermiticity,
        }
    }

    pub fn identity(basis: &Arc<BasisSpec>) -> Self {
        let n = basis.dimension();
        Self::from_parts(basis.clone(), Mat::identity(n, n), Hermiticity::Hermitian)
    }

    pub fn zeros(basis: &Arc<BasisSpec>) -> Self {
        let n = basis.dimension();
        Self::from_parts(basis.clone(), Mat::zeros(n, n), Hermiticity::Hermitian)
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> Mat<c64> {
        self.matrix
    }

    pub fn hermiticity(&self) -> Hermiticity {
        self.hermiticity
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity == Hermiticity::Hermitian
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.matrix[(row, col)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.norm_max()
    }

    /// `max|A − A†| / max|A|` (zero for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        self.symmetry_defect(1.0)
    }

    /// `max|A + A†| / max|A|`.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        self.symmetry_defect(-1.0)
    }

    fn symmetry_defect(&self, sign: f64) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                let d = self.matrix[(i, j)] - self.matrix[(j, i)].conj() * sign;
                worst = worst.max(d.norm());
            }
        }
        worst / scale
    }

    fn check_same_basis(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || self.basis == other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Self::from_parts(
            self.basis.clone(),
            &self.matrix + &other.matrix,
            self.hermiticity.combine_linear(other.hermiticity),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Self::from_parts(
            self.basis.clone(),
            &self.matrix - &other.matrix,
            self.hermiticity.combine_linear(other.hermiticity),
        ))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(
            self.basis.clone(),
            self.matrix.map(|z| z * factor),
            self.hermiticity,
        )
    }

    pub fn scale_complex(&self, factor: c64) -> Self {
        let hermiticity = if factor.im == 0.0 {
            self.hermiticity
        } else if factor.re == 0.0 {
            self.hermiticity.times_imaginary()
        } else {
            Hermiticity::General
        };
        Self::from_parts(
            self.basis.clone(),
            self.matrix.map(|z| z * factor),
            hermiticity,
        )
    }

    /// Plain matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Self::from_parts(
            self.basis.clone(),
            &self.matrix * &other.matrix,
            Hermiticity::General,
        ))
    }

    /// `(AB + BA) / 2`, hermitian when both factors are.
    pub fn symmetrized_product(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        let hermiticity = if self.is_hermitian() && other.is_hermitian() {
            Hermiticity::Hermitian
        } else {
            Hermiticity::General
        };
        Ok(Self::from_parts(
            self.basis.clone(),
            (&ab + &ba).map(|z| z * 0.5),
            hermiticity,
        ))
    }

    /// Integer power by repeated left multiplication (`A^0 = I`).
    pub fn pow(&self, exponent: u32) -> Self {
        let mut out = Self::identity(&self.basis).matrix;
        for _ in 0..exponent {
            out = &self.matrix * &out;
        }
        let hermiticity = match self.hermiticity {
            Hermiticity::Hermitian => Hermiticity::Hermitian,
            Hermiticity::AntiHermitian if exponent % 2 == 0 => Hermiticity::Hermitian,
            Hermiticity::AntiHermitian => Hermiticity::AntiHermitian,
            Hermiticity::General => Hermiticity::General,
        };
        Self::from_parts(self.basis.clone(), out, hermiticity)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(
            self.basis.clone(),
            self.matrix.adjoint().to_owned(),
            self.hermiticity,
        )
    }

    /// Restriction to the lowest `m_levels` states of every dof.
    pub fn interior_project(&self, block: &InteriorBlock) -> Result<Self> {
        block.validate_for(&self.basis)?;
        let m = block.m_levels();
        if m == self.basis.n_levels() {
            return Ok(self.clone());
        }
        let sub = self.basis.restricted(m);
        let keep: Vec<usize> = (0..sub.dimension())
            .map(|k| self.basis.index_of(&sub.levels_of(k)))
            .collect();
        let matrix = Mat::from_fn(keep.len(), keep.len(), |i, j| self.matrix[(keep[i], keep[j])]);
        Ok(Self::from_parts(sub, matrix, self.hermiticity))
    }
}

/// `AB − BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_same_basis(b)?;
    let ab = &a.matrix * &b.matrix;
    let ba = &b.matrix * &a.matrix;
    use Hermiticity::*;
    let hermiticity = match (a.hermiticity, b.hermiticity) {
        (Hermitian, Hermitian) | (AntiHermitian, AntiHermitian) => AntiHermitian,
        (Hermitian, AntiHermitian) | (AntiHermitian, Hermitian) => Hermitian,
        _ => General,
    };
    Ok(Operator::from_parts(a.basis.clone(), &ab - &ba, hermiticity))
}

/// `‖L − R‖_F / ‖R‖_F`, falling back to the absolute error when `R = 0`.
pub fn relative_frobenius_error(lhs: &Operator, rhs: &Operator) -> Result<f64> {
    lhs.check_same_basis(rhs)?;
    let diff = (&lhs.matrix - &rhs.matrix).norm_l2();
    let scale = rhs.frobenius_norm();
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Relative Frobenius error between the interior blocks of two operators.
pub fn interior_error(lhs: &Operator, rhs: &Operator, block: &InteriorBlock) -> Result<f64> {
    relative_frobenius_error(&lhs.interior_project(block)?, &rhs.interior_project(block)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::make_basis;
    use crate::ladder::{momentum_operator, position_operator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(n: usize) -> Arc<BasisSpec> {
        make_basis(n, 1, 1.0, &[1.0], &[1.0]).unwrap()
    }

    fn random_hermitian(basis: &Arc<BasisSpec>, rng: &mut ChaCha8Rng) -> Operator {
        let n = basis.dimension();
        let raw = Mat::from_fn(n, n, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = Mat::from_fn(n, n, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5);
        Operator::new(basis.clone(), h, Hermiticity::Hermitian).unwrap()
    }

    #[test]
    fn self_commutator_vanishes() {
        let b = basis(16);
        let x = position_operator(&b, 0).unwrap();
        let c = commutator(&x, &x).unwrap();
        assert_eq!(c.max_abs(), 0.0);
        assert_eq!(c.hermiticity(), Hermiticity::AntiHermitian);
    }

    #[test]
    fn canonical_commutator_on_interior() {
        let b = basis(64);
        let x = position_operator(&b, 0).unwrap();
        let p = momentum_operator(&b, 0).unwrap();
        let c = commutator(&x, &p).unwrap();
        let block = InteriorBlock::new(32).unwrap();
        let inner = c.interior_project(&block).unwrap();
        for i in 0..32 {
            for j in 0..32 {
                let expected = if i == j { c64::new(0.0, 1.0) } else { c64::new(0.0, 0.0) };
                assert!((inner.get(i, j) - expected).norm() < 1e-10);
            }
        }
        // the truncation artifact sits on the top state only
        assert!((c.get(63, 63) - c64::new(0.0, -63.0)).norm() < 1e-10);
    }

    #[test]
    fn square_commutator_on_interior() {
        let b = basis(64);
        let x = position_operator(&b, 0).unwrap();
        let p = momentum_operator(&b, 0).unwrap();
        let lhs = commutator(&x.pow(2), &p).unwrap();
        let rhs = x.scale_complex(c64::new(0.0, 2.0));
        let block = InteriorBlock::new(32).unwrap();
        assert!(interior_error(&lhs, &rhs, &block).unwrap() < 1e-10);
    }

    #[test]
    fn projection_edge_cases() {
        let b = basis(8);
        let x = position_operator(&b, 0).unwrap();
        let full = x.interior_project(&InteriorBlock::new(8).unwrap()).unwrap();
        assert_eq!(full.matrix(), x.matrix());
        let one = x.pow(2).interior_project(&InteriorBlock::new(1).unwrap()).unwrap();
        assert_eq!(one.dim(), 1);
        assert_eq!(one.get(0, 0), x.pow(2).get(0, 0));
        assert!(x.interior_project(&InteriorBlock::new(9).unwrap()).is_err());
    }

    #[test]
    fn two_dof_projection_keeps_tensor_structure() {
        let b = make_basis(6, 2, 1.0, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        let x1 = position_operator(&b, 1).unwrap();
        let proj = x1.interior_project(&InteriorBlock::new(3).unwrap()).unwrap();
        let b3 = make_basis(3, 2, 1.0, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        let direct = position_operator(&b3, 1).unwrap();
        assert_eq!(proj.matrix(), direct.matrix());
    }

    #[test]
    fn distinct_dofs_commute_exactly() {
        let b = make_basis(12, 2, 1.0, &[1.0, 2.0], &[1.0, 0.5]).unwrap();
        let x0 = position_operator(&b, 0).unwrap();
        let p1 = momentum_operator(&b, 1).unwrap();
        assert!(commutator(&x0, &p1).unwrap().frobenius_norm() <= 1e-12);
    }

    #[test]
    fn hermiticity_claim_validated() {
        let b = basis(4);
        let m = Mat::from_fn(4, 4, |i, j| c64::new((i * 4 + j) as f64, 0.0));
        assert_eq!(
            Operator::new(b.clone(), m.clone(), Hermiticity::Hermitian).unwrap_err(),
            Error::NotHermitian
        );
        assert!(Operator::new(b, m, Hermiticity::General).is_ok());
    }

    #[test]
    fn basis_mismatch_rejected() {
        let x = position_operator(&basis(4), 0).unwrap();
        let y = position_operator(&basis(5), 0).unwrap();
        assert_eq!(commutator(&x, &y).unwrap_err(), Error::BasisMismatch);
    }

    #[test]
    fn commutator_antisymmetry_is_exact() {
        let b = basis(12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let a = random_hermitian(&b, &mut rng);
            let c = random_hermitian(&b, &mut rng);
            let ab = commutator(&a, &c).unwrap();
            let ba = commutator(&c, &a).unwrap();
            assert_eq!(ab.matrix(), ba.scale(-1.0).matrix());
        }
    }

    #[test]
    fn jacobi_identity() {
        let b = basis(16);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let a = random_hermitian(&b, &mut rng);
            let bb = random_hermitian(&b, &mut rng);
            let c = random_hermitian(&b, &mut rng);
            let t1 = commutator(&a, &commutator(&bb, &c).unwrap()).unwrap();
            let t2 = commutator(&bb, &commutator(&c, &a).unwrap()).unwrap();
            let t3 = commutator(&c, &commutator(&a, &bb).unwrap()).unwrap();
            let sum = t1.add(&t2).unwrap().add(&t3).unwrap();
            let bound = 1e-10 * a.frobenius_norm() * bb.frobenius_norm() * c.frobenius_norm();
            assert!(sum.frobenius_norm() <= bound);
        }
    }

    #[test]
    fn flags_follow_algebra() {
        let b = basis(8);
        let x = position_operator(&b, 0).unwrap();
        let p = momentum_operator(&b, 0).unwrap();
        let c = commutator(&x, &p).unwrap();
        assert_eq!(c.hermiticity(), Hermiticity::AntiHermitian);
        assert!(c.anti_hermiticity_defect() <= HERMITICITY_TOLERANCE);
        let h = c.scale_complex(c64::new(0.0, 1.0));
        assert!(h.is_hermitian());
        assert!(h.hermiticity_defect() <= HERMITICITY_TOLERANCE);
        assert!(x.symmetrized_product(&p).unwrap().is_hermitian());
        assert_eq!(x.mul(&p).unwrap().hermiticity(), Hermiticity::General);
        assert_eq!(c.pow(2).hermiticity(), Hermiticity::Hermitian);
    }
}
