//! Polynomial Hamiltonians for each scenario family.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::{invalid, Error, Result};
use crate::operator::Operator;
use crate::poly::{evaluate_polynomial, Monomial, Polynomial, Var};

/// Highest polynomial degree the builders will produce.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// `A = ½ B × r`
    #[default]
    Symmetric,
    /// `A = (−B y, 0, 0)`; recognised but not supported.
    Landau,
}

/// Uniform electromagnetic fields acting on a charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub charge: f64,
    #[serde(default)]
    pub magnetic: [f64; 3],
    #[serde(default)]
    pub electric: [f64; 3],
    #[serde(default)]
    pub gauge: Gauge,
}

impl FieldConfig {
    pub fn new(charge: f64, magnetic: [f64; 3], electric: [f64; 3]) -> Self {
        Self {
            charge,
            magnetic,
            electric,
            gauge: Gauge::Symmetric,
        }
    }

    /// Symmetric-gauge vector potential as one polynomial per dof,
    /// `Aᵢ = ½ (B × r)ᵢ`. A 2-dof basis is the plane `z = 0`.
    pub fn vector_potential(&self, n_dofs: usize) -> Result<Vec<Polynomial>> {
        if self.gauge != Gauge::Symmetric {
            return Err(invalid("gauge", "only the symmetric gauge is supported"));
        }
        let b = self.magnetic;
        let r = |i: usize| -> Result<Polynomial> {
            if i < n_dofs {
                Polynomial::var(n_dofs, i, Var::Q)
            } else {
                Ok(Polynomial::zero(n_dofs))
            }
        };
        let comp = |j: usize, k: usize| -> Result<Polynomial> {
            // ½ (B_j r_k − B_k r_j)
            r(k)?.scale(0.5 * b[j]).sub(&r(j)?.scale(0.5 * b[k]))
        };
        let a = [comp(1, 2)?, comp(2, 0)?, comp(0, 1)?];
        Ok(a.into_iter().take(n_dofs).collect())
    }

    fn validate(&self, n_dofs: usize) -> Result<()> {
        if self.gauge != Gauge::Symmetric {
            return Err(invalid("gauge", "only the symmetric gauge is supported"));
        }
        let finite = self.charge.is_finite()
            && self.magnetic.iter().chain(&self.electric).all(|v| v.is_finite());
        if !finite {
            return Err(invalid("fields", "all field components must be finite"));
        }
        match n_dofs {
            2 => {
                if self.magnetic[0] != 0.0 || self.magnetic[1] != 0.0 {
                    return Err(invalid("magnetic", "planar scenarios need B along z"));
                }
                if self.electric[2] != 0.0 {
                    return Err(invalid("electric", "planar scenarios need E in the plane"));
                }
                Ok(())
            }
            3 => Ok(()),
            n => Err(invalid("n_dofs", format!("EM scenarios need 2 or 3 dofs, got {n}"))),
        }
    }
}

/// Which family a Hamiltonian belongs to, with the parameters needed to
/// interpret it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianKind {
    Potential { expansion_point: f64 },
    /// Coordinate `q` is the displacement `r − r0`.
    GravityTaylor { gmm: f64, r0: f64, order: usize },
    Electromagnetic { fields: FieldConfig },
    RotatingFrame { omega: f64, centrifugal_factor: f64 },
    Generic,
}

#[derive(Debug, Clone)]
pub struct PolyHamiltonian {
    basis: Arc<BasisSpec>,
    poly: Polynomial,
    kind: HamiltonianKind,
}

impl PolyHamiltonian {
    pub fn new(basis: Arc<BasisSpec>, poly: Polynomial, kind: HamiltonianKind) -> Result<Self> {
        if poly.n_dofs() != basis.n_dofs() {
            return Err(Error::BasisMismatch);
        }
        Ok(Self { basis, poly, kind })
    }

    pub fn generic(basis: Arc<BasisSpec>, poly: Polynomial) -> Result<Self> {
        Self::new(basis, poly, HamiltonianKind::Generic)
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn kind(&self) -> &HamiltonianKind {
        &self.kind
    }

    pub fn n_dofs(&self) -> usize {
        self.basis.n_dofs()
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree()
    }

    pub fn evaluate(&self) -> Result<Operator> {
        evaluate_polynomial(&self.poly, &self.basis)
    }

    /// Term-by-term derivative; the result is a generic polynomial on the
    /// same basis.
    pub fn formal_partial(&self, dof: usize, var: Var) -> Result<Self> {
        self.basis.check_dof(dof)?;
        Ok(Self {
            basis: self.basis.clone(),
            poly: self.poly.formal_partial(dof, var),
            kind: HamiltonianKind::Generic,
        })
    }

    /// Canonical right-hand side `(∂H/∂pⱼ, −∂H/∂qⱼ)` for every dof.
    pub fn hamilton_field(&self) -> (Vec<Polynomial>, Vec<Polynomial>) {
        let n = self.n_dofs();
        let dq = (0..n).map(|j| self.poly.formal_partial(j, Var::P)).collect();
        let dp = (0..n)
            .map(|j| self.poly.formal_partial(j, Var::Q).scale(-1.0))
            .collect();
        (dq, dp)
    }

    pub fn to_text(&self) -> String {
        self.poly.to_text()
    }

    pub fn fields(&self) -> Option<&FieldConfig> {
        match &self.kind {
            HamiltonianKind::Electromagnetic { fields } => Some(fields),
            _ => None,
        }
    }
}

pub fn formal_partial(h: &PolyHamiltonian, dof: usize, var: Var) -> Result<PolyHamiltonian> {
    h.formal_partial(dof, var)
}

pub fn evaluate(h: &PolyHamiltonian) -> Result<Operator> {
    h.evaluate()
}

fn kinetic(n_dofs: usize, dof: usize, mass: f64) -> Monomial {
    debug_assert!(dof < n_dofs);
    Monomial::new(0.5 / mass, &[(dof, Var::P, 2)])
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        return Err(invalid(
            "order",
            format!("polynomial degree {degree} exceeds the cap of {MAX_DEGREE}"),
        ));
    }
    Ok(())
}

/// `H = p²/2m + Σₙ cₙ (q − x₀)ⁿ` on a 1-dof basis, with `cₙ = V⁽ⁿ⁾(x₀)/n!`.
///
/// The shifted powers are expanded binomially into powers of `q`.
pub fn build_potential_hamiltonian(
    basis: &Arc<BasisSpec>,
    potential_coeffs: &[f64],
    expansion_point: f64,
) -> Result<PolyHamiltonian> {
    if basis.n_dofs() != 1 {
        return Err(invalid("basis", "potential Hamiltonians need a 1-dof basis"));
    }
    if let Some(c) = potential_coeffs.iter().find(|c| !c.is_finite()) {
        return Err(invalid("potential_coeffs", format!("non-finite coefficient {c}")));
    }
    if !expansion_point.is_finite() {
        return Err(invalid("expansion_point", "must be finite"));
    }
    check_degree(potential_coeffs.len().saturating_sub(1))?;
    let mut terms = vec![kinetic(1, 0, basis.mass(0))];
    for (n, &c) in potential_coeffs.iter().enumerate() {
        // (q − x₀)ⁿ = Σₖ C(n,k) qᵏ (−x₀)^(n−k)
        let mut binom = 1.0;
        for k in 0..=n {
            let coeff = c * binom * (-expansion_point).powi((n - k) as i32);
            terms.push(Monomial::new(coeff, &[(0, Var::Q, k as u32)]));
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
    }
    PolyHamiltonian::new(
        basis.clone(),
        Polynomial::from_terms(1, terms)?,
        HamiltonianKind::Potential { expansion_point },
    )
}

/// Taylor expansion of `−G m M / r` about `r0` in the displacement
/// `q = r − r0`, plus `p²/2m`:
/// `V = −GmM Σₙ (−q)ⁿ / r0ⁿ⁺¹`.
pub fn build_gravity_taylor(
    basis: &Arc<BasisSpec>,
    g: f64,
    big_mass: f64,
    mass: f64,
    r0: f64,
    order: usize,
) -> Result<PolyHamiltonian> {
    if basis.n_dofs() != 1 {
        return Err(invalid("basis", "the radial reduction needs a 1-dof basis"));
    }
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(invalid("r0", format!("must be positive, got {r0}")));
    }
    if order < 1 {
        return Err(invalid("order", "must be at least 1"));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid("mass", format!("must be positive, got {mass}")));
    }
    if !(g.is_finite() && big_mass.is_finite()) {
        return Err(invalid("g", "coupling must be finite"));
    }
    check_degree(order)?;
    let gmm = g * mass * big_mass;
    let mut terms = vec![kinetic(1, 0, mass)];
    for n in 0..=order {
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        terms.push(Monomial::new(
            sign * gmm / r0.powi(n as i32 + 1),
            &[(0, Var::Q, n as u32)],
        ));
    }
    PolyHamiltonian::new(
        basis.clone(),
        Polynomial::from_terms(1, terms)?,
        HamiltonianKind::GravityTaylor { gmm, r0, order },
    )
}

/// Kinetic momentum `πᵢ = pᵢ − q Aᵢ(r)` as polynomials.
pub fn kinetic_momentum_polys(fields: &FieldConfig, n_dofs: usize) -> Result<Vec<Polynomial>> {
    let a = fields.vector_potential(n_dofs)?;
    (0..n_dofs)
        .map(|i| Polynomial::var(n_dofs, i, Var::P)?.sub(&a[i].scale(fields.charge)))
        .collect()
}

/// `H = Σᵢ (pᵢ − q Aᵢ)²/2m − q E·r` in the symmetric gauge.
pub fn build_em_hamiltonian(basis: &Arc<BasisSpec>, fields: &FieldConfig) -> Result<PolyHamiltonian> {
    let n = basis.n_dofs();
    fields.validate(n)?;
    let pis = kinetic_momentum_polys(fields, n)?;
    let mut h = Polynomial::zero(n);
    for (i, pi) in pis.iter().enumerate() {
        h = h.add(&pi.pow(2)?.scale(0.5 / basis.mass(i)))?;
        let e = fields.electric[i];
        if e != 0.0 {
            h = h.sub(&Polynomial::var(n, i, Var::Q)?.scale(fields.charge * e))?;
        }
    }
    PolyHamiltonian::new(
        basis.clone(),
        h,
        HamiltonianKind::Electromagnetic {
            fields: fields.clone(),
        },
    )
}

/// `πᵢ` evaluated as an operator; equals `m` times the velocity operator.
pub fn kinetic_momentum_operator(h_em: &PolyHamiltonian, dof: usize) -> Result<Operator> {
    let fields = h_em
        .fields()
        .ok_or_else(|| Error::WrongHamiltonian("kinetic momentum needs an electromagnetic Hamiltonian".into()))?;
    h_em.basis().check_dof(dof)?;
    let pis = kinetic_momentum_polys(fields, h_em.n_dofs())?;
    evaluate_polynomial(&pis[dof], h_em.basis())
}

/// Rotating-frame Hamiltonian
/// `H = [(p₁ + mωq₂)² + (p₂ − mωq₁)²]/2m − κ·mω²(q₁² + q₂²)`.
///
/// With `κ = ½` this is `p²/2m − ω L_z`, whose equations of motion are
/// exactly the Coriolis plus centrifugal law `r̈ = −2ω×ṙ − ω×(ω×r)`.
/// Any other `κ` adds a residual harmonic force `(2κ − 1) mω² r`.
pub fn build_rotating_frame_with_factor(
    basis: &Arc<BasisSpec>,
    omega: f64,
    centrifugal_factor: f64,
) -> Result<PolyHamiltonian> {
    if basis.n_dofs() != 2 {
        return Err(invalid("basis", "the rotating frame needs a 2-dof basis"));
    }
    let m = basis.mass(0);
    if (basis.mass(1) - m).abs() > 1e-12 * m {
        return Err(invalid("masses", "the rotating frame needs equal masses"));
    }
    if !(omega.is_finite() && centrifugal_factor.is_finite()) {
        return Err(invalid("omega", "must be finite"));
    }
    let q1 = Polynomial::var(2, 0, Var::Q)?;
    let q2 = Polynomial::var(2, 1, Var::Q)?;
    let a = Polynomial::var(2, 0, Var::P)?.add(&q2.scale(m * omega))?;
    let b = Polynomial::var(2, 1, Var::P)?.sub(&q1.scale(m * omega))?;
    let trap = q1.pow(2)?.add(&q2.pow(2)?)?.scale(centrifugal_factor * m * omega * omega);
    let h = a.pow(2)?.add(&b.pow(2)?)?.scale(0.5 / m).sub(&trap)?;
    PolyHamiltonian::new(
        basis.clone(),
        h,
        HamiltonianKind::RotatingFrame {
            omega,
            centrifugal_factor,
        },
    )
}

/// Rotating-frame Hamiltonian that reproduces the Coriolis and centrifugal
/// pseudo-forces, i.e. `κ = ½` in [`build_rotating_frame_with_factor`].
pub fn build_rotating_frame(basis: &Arc<BasisSpec>, omega: f64) -> Result<PolyHamiltonian> {
    build_rotating_frame_with_factor(basis, omega, 0.5)
}

/// Rotating-frame velocity polynomials `v₁ = (p₁ + mωq₂)/m`, `v₂ = (p₂ − mωq₁)/m`.
pub fn rotating_velocity_polys(mass: f64, omega: f64) -> Result<[Polynomial; 2]> {
    let q1 = Polynomial::var(2, 0, Var::Q)?;
    let q2 = Polynomial::var(2, 1, Var::Q)?;
    let v1 = Polynomial::var(2, 0, Var::P)?.add(&q2.scale(mass * omega))?.scale(1.0 / mass);
    let v2 = Polynomial::var(2, 1, Var::P)?.sub(&q1.scale(mass * omega))?.scale(1.0 / mass);
    Ok([v1, v2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{make_basis, InteriorBlock};
    use crate::ladder::{momentum_operator, position_operator};
    use crate::operator::{commutator, interior_error};
    use faer::c64;

    fn b1(n: usize) -> Arc<BasisSpec> {
        make_basis(n, 1, 1.0, &[1.0], &[1.0]).unwrap()
    }

    fn b2(n: usize, ell: f64) -> Arc<BasisSpec> {
        make_basis(n, 2, 1.0, &[1.0, 1.0], &[ell, ell]).unwrap()
    }

    fn heisenberg(h: &Operator, a: &Operator) -> Operator {
        let hbar = h.basis().hbar();
        commutator(h, a).unwrap().scale_complex(c64::new(0.0, 1.0 / hbar))
    }

    #[test]
    fn harmonic_terms() {
        let (m, w) = (2.0, 0.5);
        let b = make_basis(8, 1, 1.0, &[m], &[1.0]).unwrap();
        let h = build_potential_hamiltonian(&b, &[0.0, 0.0, 0.5 * m * w * w], 0.0).unwrap();
        let poly = h.poly();
        assert_eq!(poly.terms().len(), 2);
        assert_eq!(poly.coefficient_of(&[(0, Var::P, 2)]), 0.5 / m);
        assert_eq!(poly.coefficient_of(&[(0, Var::Q, 2)]), 0.5 * m * w * w);
    }

    #[test]
    fn empty_potential_is_free_particle() {
        let h = build_potential_hamiltonian(&b1(8), &[], 0.0).unwrap();
        assert_eq!(h.poly().terms().len(), 1);
        assert_eq!(h.poly().coefficient_of(&[(0, Var::P, 2)]), 0.5);
    }

    #[test]
    fn cubic_transcription_and_shift() {
        let (alpha, beta) = (1.2, 0.3);
        let h = build_potential_hamiltonian(&b1(8), &[0.0, 0.0, 0.5 * alpha, beta / 3.0], 0.0).unwrap();
        assert_eq!(h.poly().terms().len(), 3);
        assert_eq!(h.poly().coefficient_of(&[(0, Var::Q, 3)]), beta / 3.0);
        // (q − 1)² = q² − 2q + 1
        let shifted = build_potential_hamiltonian(&b1(8), &[0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(shifted.poly().coefficient_of(&[(0, Var::Q, 1)]), -2.0);
        assert_eq!(shifted.poly().coefficient_of(&[]), 1.0);
    }

    #[test]
    fn potential_builder_guards() {
        assert!(build_potential_hamiltonian(&b1(8), &[f64::NAN], 0.0).is_err());
        assert!(build_potential_hamiltonian(&b2(4, 1.0), &[1.0], 0.0).is_err());
        assert!(build_potential_hamiltonian(&b1(8), &[0.0; 10], 0.0).is_err());
    }

    #[test]
    fn gravity_taylor_coefficients() {
        let (g, big, m, r0) = (2.0, 3.0, 0.5, 4.0);
        let gmm = g * big * m;
        let h1 = build_gravity_taylor(&b1(8), g, big, m, r0, 1).unwrap();
        assert_eq!(h1.poly().coefficient_of(&[]), -gmm / r0);
        assert_eq!(h1.poly().coefficient_of(&[(0, Var::Q, 1)]), gmm / (r0 * r0));
        let h2 = build_gravity_taylor(&b1(8), g, big, m, r0, 2).unwrap();
        assert_eq!(h2.poly().coefficient_of(&[(0, Var::Q, 2)]), -gmm / r0.powi(3));
        assert!(build_gravity_taylor(&b1(8), g, big, m, 0.0, 2).is_err());
        assert!(build_gravity_taylor(&b1(8), g, big, m, 1.0, 0).is_err());
    }

    fn force_error(order: usize, max_displacement: f64) -> f64 {
        // −∂H/∂q of the expansion vs the exact −GmM/r² force
        let (gmm, r0) = (1.0, 10.0);
        let h = build_gravity_taylor(&b1(8), 1.0, 1.0, 1.0, r0, order).unwrap();
        let force = h.poly().formal_partial(0, Var::Q).scale(-1.0);
        let mut worst = 0.0f64;
        for k in -100..=100 {
            let s = max_displacement * r0 * k as f64 / 100.0;
            let exact = -gmm / (r0 + s).powi(2);
            let approx = force.eval(&[s], &[0.0]);
            worst = worst.max(((approx - exact) / exact).abs());
        }
        worst
    }

    #[test]
    fn gravity_taylor_force_accuracy() {
        // order 2 truncates the force after its linear term: relative error ≈ 3ε²
        assert!(force_error(2, 0.005) < 1e-4);
        let at_one_percent = force_error(2, 0.01);
        assert!(at_one_percent > 2.9e-4 && at_one_percent < 3.1e-4, "{at_one_percent}");
        assert!(force_error(3, 0.01) < 1e-4);
    }

    #[test]
    fn symmetric_gauge_curl() {
        let f = FieldConfig::new(1.0, [0.3, -0.7, 1.9], [0.0; 3]);
        let a = f.vector_potential(3).unwrap();
        let d = |i: usize, j: usize| a[j].formal_partial(i, Var::Q);
        let curl = [d(1, 2).sub(&d(2, 1)).unwrap(), d(2, 0).sub(&d(0, 2)).unwrap(), d(0, 1).sub(&d(1, 0)).unwrap()];
        for k in 0..3 {
            assert_eq!(curl[k], Polynomial::constant(3, f.magnetic[k]));
        }
    }

    #[test]
    fn em_expansion_matches_hand_expansion() {
        // (p − qA)²/2m with A = ½B(−y, x): cross term −(qB/2m)(x p_y − y p_x), trap (q²B²/8m)(x² + y²)
        let (qc, bz, m) = (0.7, 1.3, 2.0);
        let b = make_basis(6, 2, 1.0, &[m, m], &[1.0, 1.0]).unwrap();
        let h = build_em_hamiltonian(&b, &FieldConfig::new(qc, [0.0, 0.0, bz], [0.0; 3])).unwrap();
        let p = h.poly();
        let cross = qc * bz / (2.0 * m);
        let trap = qc * qc * bz * bz / (8.0 * m);
        assert!((p.coefficient_of(&[(0, Var::Q, 1), (1, Var::P, 1)]) + cross).abs() < 1e-15);
        assert!((p.coefficient_of(&[(1, Var::Q, 1), (0, Var::P, 1)]) - cross).abs() < 1e-15);
        assert!((p.coefficient_of(&[(0, Var::Q, 2)]) - trap).abs() < 1e-15);
        assert!((p.coefficient_of(&[(1, Var::Q, 2)]) - trap).abs() < 1e-15);
        assert_eq!(p.coefficient_of(&[(0, Var::P, 2)]), 0.5 / m);
        assert_eq!(p.terms().len(), 6);
        assert!(!p.has_mixed_same_dof());
    }

    #[test]
    fn em_without_magnetic_field() {
        let b = b2(6, 1.0);
        let h = build_em_hamiltonian(&b, &FieldConfig::new(2.0, [0.0; 3], [0.5, 0.0, 0.0])).unwrap();
        assert_eq!(h.poly().coefficient_of(&[(0, Var::Q, 1)]), -1.0);
        assert_eq!(h.poly().terms().len(), 3);
        let pi = kinetic_momentum_operator(&h, 1).unwrap();
        assert_eq!(pi.matrix(), momentum_operator(&b, 1).unwrap().matrix());
    }

    #[test]
    fn em_guards() {
        let b = b2(6, 1.0);
        let mut f = FieldConfig::new(1.0, [1.0, 0.0, 0.0], [0.0; 3]);
        assert!(build_em_hamiltonian(&b, &f).is_err());
        f.magnetic = [0.0, 0.0, 1.0];
        f.gauge = Gauge::Landau;
        assert!(build_em_hamiltonian(&b, &f).is_err());
        let rot = build_rotating_frame(&b, 0.5).unwrap();
        assert!(matches!(kinetic_momentum_operator(&rot, 0), Err(Error::WrongHamiltonian(_))));
    }

    #[test]
    fn kinetic_momentum_in_symmetric_gauge() {
        // A₁ = −B q₂/2 ⇒ π₁ = p₁ + (q_c B/2) q₂
        let (qc, bz) = (0.8, 1.5);
        let b = b2(8, 1.0);
        let h = build_em_hamiltonian(&b, &FieldConfig::new(qc, [0.0, 0.0, bz], [0.0; 3])).unwrap();
        let pi1 = kinetic_momentum_operator(&h, 0).unwrap();
        let expected = momentum_operator(&b, 0)
            .unwrap()
            .add(&position_operator(&b, 1).unwrap().scale(qc * bz / 2.0))
            .unwrap();
        assert!((&pi1.matrix() - &expected.matrix()).norm_max() < 1e-15);
    }

    #[test]
    fn em_velocity_and_kinetic_commutator() {
        let (qc, bz) = (1.0, 1.0);
        let b = b2(32, 2f64.sqrt());
        let block = InteriorBlock::new(16).unwrap();
        let h = build_em_hamiltonian(&b, &FieldConfig::new(qc, [0.0, 0.0, bz], [0.2, -0.1, 0.0])).unwrap();
        let hop = h.evaluate().unwrap();
        let pi1 = kinetic_momentum_operator(&h, 0).unwrap();
        let pi2 = kinetic_momentum_operator(&h, 1).unwrap();
        let v = heisenberg(&hop, &position_operator(&b, 0).unwrap());
        assert!(interior_error(&v, &pi1, &block).unwrap() < 1e-10);
        let c = commutator(&pi1, &pi2).unwrap();
        let expected = Operator::identity(&b).scale_complex(c64::new(0.0, qc * bz));
        assert!(interior_error(&c, &expected, &block).unwrap() < 1e-10);
    }

    #[test]
    fn rotating_frame_expansion() {
        let (m, w) = (1.5, 0.5);
        let b = make_basis(6, 2, 1.0, &[m, m], &[1.0, 1.0]).unwrap();
        // as transcribed (κ = 1): q₁² coefficient mω²/2 − mω²
        let printed = build_rotating_frame_with_factor(&b, w, 1.0).unwrap();
        assert!((printed.poly().coefficient_of(&[(0, Var::Q, 2)]) + 0.5 * m * w * w).abs() < 1e-15);
        // κ = ½: the harmonic terms cancel, leaving p²/2m − ωL_z
        let h = build_rotating_frame(&b, w).unwrap();
        assert_eq!(h.poly().coefficient_of(&[(0, Var::Q, 2)]), 0.0);
        assert!((h.poly().coefficient_of(&[(1, Var::Q, 1), (0, Var::P, 1)]) - w).abs() < 1e-15);
        assert!((h.poly().coefficient_of(&[(0, Var::Q, 1), (1, Var::P, 1)]) + w).abs() < 1e-15);
        let free = build_rotating_frame(&b, 0.0).unwrap();
        assert_eq!(free.poly().terms().len(), 2);
        let uneven = make_basis(6, 2, 1.0, &[1.0, 2.0], &[1.0, 1.0]).unwrap();
        assert!(build_rotating_frame(&uneven, w).is_err());
    }

    #[test]
    fn rotating_velocity_operator() {
        let w = 0.5;
        let b = b2(24, 1.0);
        let h = build_rotating_frame(&b, w).unwrap().evaluate().unwrap();
        let [v1, _] = rotating_velocity_polys(1.0, w).unwrap();
        let lhs = heisenberg(&h, &position_operator(&b, 0).unwrap());
        let rhs = evaluate_polynomial(&v1, &b).unwrap();
        assert!(interior_error(&lhs, &rhs, &InteriorBlock::new(12).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn builders_evaluate_hermitian() {
        let b = b2(10, 1.0);
        let em = build_em_hamiltonian(&b, &FieldConfig::new(1.0, [0.0, 0.0, 2.0], [1.0, 0.5, 0.0])).unwrap();
        let rot = build_rotating_frame(&b, 0.7).unwrap();
        let pot = build_potential_hamiltonian(&b1(12), &[0.1, 0.2, 0.3, 0.4, 0.05], 0.3).unwrap();
        let grav = build_gravity_taylor(&b1(12), 1.0, 1.0, 1.0, 5.0, 6).unwrap();
        for h in [em, rot, pot, grav] {
            assert!(h.evaluate().unwrap().hermiticity_defect() <= 1e-12);
        }
    }

    #[test]
    fn harmonic_derivative_evaluates_to_scaled_position() {
        let (m, w) = (1.0, 1.3);
        let b = b1(16);
        let h = build_potential_hamiltonian(&b, &[0.0, 0.0, 0.5 * m * w * w], 0.0).unwrap();
        let dv = h.formal_partial(0, Var::Q).unwrap().evaluate().unwrap();
        let x = position_operator(&b, 0).unwrap().scale(m * w * w);
        assert!((&dv.matrix() - &x.matrix()).norm_max() < 1e-15);
    }
}
