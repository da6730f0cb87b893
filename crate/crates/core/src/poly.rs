//! Polynomials in canonical coordinates `qᵢ, pᵢ` with real coefficients.
//!
//! Symbolically the variables commute; the operator meaning of a monomial is
//! fixed at evaluation time. Factors on distinct dofs commute as operators,
//! so only a monomial mixing `q` and `p` of the same dof needs an ordering
//! rule, and for those the Weyl (fully symmetric) ordering is used:
//!
//! `W(qᵃ pᵇ) = 2⁻ᵃ Σₖ C(a,k) q^(a−k) pᵇ qᵏ`.
//!
//! Under Weyl ordering commutators with `q` or `p` reduce exactly to formal
//! derivatives, so mixed terms do not spoil the canonical equations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::{invalid, Error, Result};
use crate::ladder::{kron_all, momentum_factor, position_factor};
use crate::operator::{Hermiticity, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    Q,
    P,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::Q => "q",
            Var::P => "p",
        })
    }
}

/// Exponents of `q` and `p` on one dof.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DofPowers {
    pub dof: usize,
    pub q: u32,
    pub p: u32,
}

/// Product of powers, sorted by dof, one entry per dof with a nonzero power.
pub type PowerKey = Vec<DofPowers>;

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub powers: PowerKey,
}

impl Monomial {
    /// Aggregates repeated factors: `(dof, var, exponent)` triples.
    pub fn new(coefficient: f64, factors: &[(usize, Var, u32)]) -> Self {
        let mut map: BTreeMap<usize, (u32, u32)> = BTreeMap::new();
        for &(dof, var, exp) in factors {
            let slot = map.entry(dof).or_default();
            match var {
                Var::Q => slot.0 += exp,
                Var::P => slot.1 += exp,
            }
        }
        Self {
            coefficient,
            powers: map
                .into_iter()
                .filter(|(_, (q, p))| q + p > 0)
                .map(|(dof, (q, p))| DofPowers { dof, q, p })
                .collect(),
        }
    }

    pub fn constant(coefficient: f64) -> Self {
        Self {
            coefficient,
            powers: Vec::new(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().map(|d| d.q + d.p).sum()
    }

    pub fn power(&self, dof: usize, var: Var) -> u32 {
        self.powers
            .iter()
            .find(|d| d.dof == dof)
            .map_or(0, |d| match var {
                Var::Q => d.q,
                Var::P => d.p,
            })
    }

    /// True when `q` and `p` of the same dof appear together.
    pub fn mixed_same_dof(&self) -> bool {
        self.powers.iter().any(|d| d.q > 0 && d.p > 0)
    }

    fn max_dof(&self) -> Option<usize> {
        self.powers.last().map(|d| d.dof)
    }
}

/// A polynomial kept in canonical form: like terms merged, zeros dropped,
/// terms sorted by (degree, powers).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n_dofs: usize,
    terms: Vec<Monomial>,
}

fn sort_key(m: &Monomial) -> (u32, &PowerKey) {
    (m.degree(), &m.powers)
}

impl Polynomial {
    pub fn zero(n_dofs: usize) -> Self {
        Self {
            n_dofs,
            terms: Vec::new(),
        }
    }

    pub fn constant(n_dofs: usize, value: f64) -> Self {
        Self::from_terms(n_dofs, vec![Monomial::constant(value)]).expect("constant has no dofs")
    }

    /// The single variable `qᵢ` or `pᵢ`.
    pub fn var(n_dofs: usize, dof: usize, var: Var) -> Result<Self> {
        Self::from_terms(n_dofs, vec![Monomial::new(1.0, &[(dof, var, 1)])])
    }

    pub fn from_terms(n_dofs: usize, terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            if let Some(d) = t.max_dof() {
                if d >= n_dofs {
                    return Err(Error::DofOutOfRange { index: d, n_dofs });
                }
            }
            if !t.coefficient.is_finite() {
                return Err(invalid("coefficient", format!("non-finite value {}", t.coefficient)));
            }
        }
        let mut merged: BTreeMap<PowerKey, f64> = BTreeMap::new();
        for t in terms {
            *merged.entry(t.powers).or_insert(0.0) += t.coefficient;
        }
        let mut terms: Vec<Monomial> = merged
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(powers, coefficient)| Monomial {
                coefficient,
                powers,
            })
            .collect();
        terms.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)));
        Ok(Self { n_dofs, terms })
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn has_mixed_same_dof(&self) -> bool {
        self.terms.iter().any(Monomial::mixed_same_dof)
    }

    pub fn depends_on(&self, dof: usize, var: Var) -> bool {
        self.terms.iter().any(|t| t.power(dof, var) > 0)
    }

    /// Coefficient of the monomial with exactly the given factors.
    pub fn coefficient_of(&self, factors: &[(usize, Var, u32)]) -> f64 {
        let key = Monomial::new(1.0, factors).powers;
        self.terms
            .iter()
            .find(|t| t.powers == key)
            .map_or(0.0, |t| t.coefficient)
    }

    fn same_dofs(&self, other: &Self) -> Result<()> {
        if self.n_dofs == other.n_dofs {
            Ok(())
        } else {
            Err(invalid(
                "n_dofs",
                format!("polynomials over {} and {} dofs", self.n_dofs, other.n_dofs),
            ))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dofs(other)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Self::from_terms(self.n_dofs, terms)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial {
                coefficient: t.coefficient * factor,
                powers: t.powers.clone(),
            })
            .collect();
        Self::from_terms(self.n_dofs, terms).expect("scaling keeps dofs in range")
    }

    /// Commutative (symbolic) product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_dofs(other)?;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = Vec::new();
                for d in a.powers.iter().chain(&b.powers) {
                    factors.push((d.dof, Var::Q, d.q));
                    factors.push((d.dof, Var::P, d.p));
                }
                terms.push(Monomial::new(a.coefficient * b.coefficient, &factors));
            }
        }
        Self::from_terms(self.n_dofs, terms)
    }

    pub fn pow(&self, exponent: u32) -> Result<Self> {
        let mut out = Self::constant(self.n_dofs, 1.0);
        for _ in 0..exponent {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Term-by-term derivative treating every variable as an ordinary real
    /// number: `∂(c·xⁿ·rest)/∂x = c·n·xⁿ⁻¹·rest`.
    pub fn formal_partial(&self, dof: usize, var: Var) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|t| {
                let n = t.power(dof, var);
                if n == 0 {
                    return None;
                }
                let powers = t
                    .powers
                    .iter()
                    .map(|d| {
                        let mut d = *d;
                        if d.dof == dof {
                            match var {
                                Var::Q => d.q -= 1,
                                Var::P => d.p -= 1,
                            }
                        }
                        d
                    })
                    .filter(|d| d.q + d.p > 0)
                    .collect();
                Some(Monomial {
                    coefficient: t.coefficient * n as f64,
                    powers,
                })
            })
            .collect();
        Self::from_terms(self.n_dofs, terms).expect("derivative keeps dofs in range")
    }

    /// Numeric value at a classical phase-space point.
    pub fn eval(&self, q: &[f64], p: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.powers.iter().fold(t.coefficient, |acc, d| {
                    acc * q[d.dof].powi(d.q as i32) * p[d.dof].powi(d.p as i32)
                })
            })
            .sum()
    }

    /// Canonical text: a `dofs N` header, then one term per line with the
    /// coefficient at 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("dofs {}\n", self.n_dofs);
        for t in &self.terms {
            out.push_str(&format!("{:.16e}", t.coefficient));
            for d in &t.powers {
                for (var, exp) in [(Var::Q, d.q), (Var::P, d.p)] {
                    match exp {
                        0 => {}
                        1 => out.push_str(&format!(" {var}{}", d.dof)),
                        e => out.push_str(&format!(" {var}{}^{e}", d.dof)),
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_dofs = None;
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |reason: String| Error::PolyParse {
                line: line_no,
                reason,
            };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            if n_dofs.is_none() {
                if head != "dofs" {
                    return Err(err("expected `dofs N` header".into()));
                }
                let n: usize = tokens
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("`dofs` needs a positive integer".into()))?;
                if n == 0 {
                    return Err(err("`dofs` needs a positive integer".into()));
                }
                n_dofs = Some(n);
                continue;
            }
            let coefficient: f64 = head
                .parse()
                .map_err(|_| err(format!("bad coefficient `{head}`")))?;
            let mut factors = Vec::new();
            for tok in tokens {
                factors.push(parse_factor(tok).ok_or_else(|| err(format!("bad factor `{tok}`")))?);
            }
            terms.push(Monomial::new(coefficient, &factors));
        }
        let n_dofs = n_dofs.ok_or(Error::PolyParse {
            line: 0,
            reason: "missing `dofs N` header".into(),
        })?;
        Self::from_terms(n_dofs, terms).map_err(|e| Error::PolyParse {
            line: 0,
            reason: e.to_string(),
        })
    }
}

fn parse_factor(tok: &str) -> Option<(usize, Var, u32)> {
    let var = match tok.as_bytes().first()? {
        b'q' => Var::Q,
        b'p' => Var::P,
        _ => return None,
    };
    let rest = &tok[1..];
    let (dof, exp) = match rest.split_once('^') {
        Some((d, e)) => (d.parse().ok()?, e.parse().ok()?),
        None => (rest.parse().ok()?, 1),
    };
    Some((dof, var, exp))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn identity(n: usize) -> Mat<c64> {
    Mat::identity(n, n)
}

/// Cached single-dof powers of `q` and `p`.
struct FactorCache {
    q: Vec<Vec<Mat<c64>>>,
    p: Vec<Vec<Mat<c64>>>,
    base_q: Vec<Mat<c64>>,
    base_p: Vec<Mat<c64>>,
}

impl FactorCache {
    fn new(basis: &BasisSpec) -> Self {
        let n = basis.n_levels();
        let base_q: Vec<_> = (0..basis.n_dofs())
            .map(|d| position_factor(n, basis.length_scale(d)))
            .collect();
        let base_p: Vec<_> = (0..basis.n_dofs())
            .map(|d| momentum_factor(n, basis.length_scale(d), basis.hbar()))
            .collect();
        Self {
            q: vec![vec![identity(n)]; basis.n_dofs()],
            p: vec![vec![identity(n)]; basis.n_dofs()],
            base_q,
            base_p,
        }
    }

    fn power(&mut self, dof: usize, var: Var, exp: u32) -> &Mat<c64> {
        let (table, base) = match var {
            Var::Q => (&mut self.q[dof], &self.base_q[dof]),
            Var::P => (&mut self.p[dof], &self.base_p[dof]),
        };
        while table.len() <= exp as usize {
            let next = base * table.last().expect("power table starts with identity");
            table.push(next);
        }
        &table[exp as usize]
    }

    /// Single-dof factor `W(qᵃ pᵇ)`.
    fn factor(&mut self, dof: usize, a: u32, b: u32) -> Mat<c64> {
        if a == 0 {
            return self.power(dof, Var::P, b).clone();
        }
        if b == 0 {
            return self.power(dof, Var::Q, a).clone();
        }
        let pb = self.power(dof, Var::P, b).clone();
        let n = pb.nrows();
        let mut acc = Mat::<c64>::zeros(n, n);
        for k in 0..=a {
            let left = self.power(dof, Var::Q, a - k).clone();
            let right = self.power(dof, Var::Q, k);
            let term = &(&left * &pb) * right;
            let w = binomial(a, k) / 2f64.powi(a as i32);
            acc += term.map(|z| z * w);
        }
        acc
    }
}

/// Matrix realization on a tensor-product basis.
///
/// Hermitian by construction: distinct-dof factors are hermitian and commute,
/// mixed same-dof factors are Weyl ordered.
pub fn evaluate_polynomial(poly: &Polynomial, basis: &Arc<BasisSpec>) -> Result<Operator> {
    if poly.n_dofs() != basis.n_dofs() {
        return Err(Error::BasisMismatch);
    }
    let n = basis.n_levels();
    let dim = basis.dimension();
    let mut cache = FactorCache::new(basis);
    let eye = identity(n);
    let mut acc = Mat::<c64>::zeros(dim, dim);
    for t in poly.terms() {
        let owned: Vec<Option<Mat<c64>>> = (0..basis.n_dofs())
            .map(|d| {
                t.powers
                    .iter()
                    .find(|f| f.dof == d)
                    .map(|f| cache.factor(d, f.q, f.p))
            })
            .collect();
        let refs: Vec<_> = owned
            .iter()
            .map(|f| f.as_ref().map_or(eye.as_ref(), |m| m.as_ref()))
            .collect();
        let k = kron_all(&refs);
        let c = t.coefficient;
        acc += k.map(|z| z * c);
    }
    Ok(Operator::from_parts(basis.clone(), acc, Hermiticity::Hermitian))
}

/// Evaluation with arbitrary full-space operators substituted for `qᵢ, pᵢ`
/// (e.g. Heisenberg-evolved observables). The result is projected onto its
/// hermitian part, which is exact for hermitian substitutions.
pub fn evaluate_with(poly: &Polynomial, q_ops: &[Operator], p_ops: &[Operator]) -> Result<Operator> {
    if q_ops.len() != poly.n_dofs() || p_ops.len() != poly.n_dofs() {
        return Err(Error::BasisMismatch);
    }
    let basis = q_ops[0].basis().clone();
    let mut acc = Operator::zeros(&basis);
    for t in poly.terms() {
        let mut term = Operator::identity(&basis);
        for d in &t.powers {
            let factor = if d.q > 0 && d.p > 0 {
                let pb = p_ops[d.dof].pow(d.p);
                let mut f = Operator::zeros(&basis);
                for k in 0..=d.q {
                    let piece = q_ops[d.dof]
                        .pow(d.q - k)
                        .mul(&pb)?
                        .mul(&q_ops[d.dof].pow(k))?;
                    f = f.add(&piece.scale(binomial(d.q, k) / 2f64.powi(d.q as i32)))?;
                }
                f
            } else if d.q > 0 {
                q_ops[d.dof].pow(d.q)
            } else {
                p_ops[d.dof].pow(d.p)
            };
            term = term.mul(&factor)?;
        }
        acc = acc.add(&term.scale(t.coefficient))?;
    }
    let adj = acc.adjoint();
    let sym = acc.add(&adj)?.scale(0.5);
    Ok(Operator::from_parts(basis, sym.into_matrix(), Hermiticity::Hermitian))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::make_basis;
    use crate::ladder::{momentum_operator, position_operator};
    use crate::operator::{commutator, interior_error};
    use crate::basis::InteriorBlock;
    use proptest::prelude::*;

    fn q(d: usize) -> (usize, Var, u32) {
        (d, Var::Q, 1)
    }

    #[test]
    fn canonical_merging() {
        let p = Polynomial::from_terms(
            2,
            vec![
                Monomial::new(1.0, &[q(0), (1, Var::P, 1)]),
                Monomial::new(2.0, &[(1, Var::P, 1), q(0)]),
                Monomial::new(-3.0, &[q(0), (1, Var::P, 1)]),
                Monomial::constant(5.0),
            ],
        )
        .unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].coefficient, 5.0);
    }

    #[test]
    fn derivative_rules() {
        let kinetic = Polynomial::from_terms(1, vec![Monomial::new(0.5, &[(0, Var::P, 2)])]).unwrap();
        let d = kinetic.formal_partial(0, Var::P);
        assert_eq!(d, Polynomial::var(1, 0, Var::P).unwrap());
        assert!(Polynomial::constant(1, 3.0).formal_partial(0, Var::Q).is_zero());
        let (alpha, beta) = (1.5, -0.25);
        let v = Polynomial::from_terms(
            1,
            vec![
                Monomial::new(0.5 * alpha, &[(0, Var::Q, 2)]),
                Monomial::new(beta / 3.0, &[(0, Var::Q, 3)]),
            ],
        )
        .unwrap();
        let dv = v.formal_partial(0, Var::Q);
        assert_eq!(dv.coefficient_of(&[(0, Var::Q, 1)]), alpha);
        assert!((dv.coefficient_of(&[(0, Var::Q, 2)]) - beta).abs() < 1e-16);
    }

    #[test]
    fn text_format_is_stable() {
        let p = Polynomial::from_terms(
            2,
            vec![
                Monomial::new(0.5, &[(0, Var::P, 2)]),
                Monomial::new(-0.125, &[q(0), (1, Var::P, 1)]),
            ],
        )
        .unwrap();
        assert_eq!(
            p.to_text(),
            "dofs 2\n5.0000000000000000e-1 p0^2\n-1.2500000000000000e-1 q0 p1\n"
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = Polynomial::from_text("dofs 1\n1.0 q0\n2.0 x0\n").unwrap_err();
        assert_eq!(
            err,
            Error::PolyParse {
                line: 3,
                reason: "bad factor `x0`".into()
            }
        );
        assert!(Polynomial::from_text("1.0 q0\n").is_err());
        assert!(Polynomial::from_text("dofs 1\n1.0 q3\n").is_err());
    }

    #[test]
    fn zero_polynomial_evaluates_to_zero() {
        let b = make_basis(6, 1, 1.0, &[1.0], &[1.0]).unwrap();
        let op = evaluate_polynomial(&Polynomial::zero(1), &b).unwrap();
        assert_eq!(op.max_abs(), 0.0);
    }

    #[test]
    fn weyl_ordering_of_qp() {
        // W(qp) = (qp + pq)/2
        let b = make_basis(10, 1, 1.0, &[1.0], &[1.0]).unwrap();
        let poly = Polynomial::from_terms(1, vec![Monomial::new(1.0, &[q(0), (0, Var::P, 1)])]).unwrap();
        let op = evaluate_polynomial(&poly, &b).unwrap();
        let x = position_operator(&b, 0).unwrap();
        let p = momentum_operator(&b, 0).unwrap();
        let expected = x.symmetrized_product(&p).unwrap();
        assert!((&op.matrix() - &expected.matrix()).norm_max() < 1e-14);
        assert!(op.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn weyl_commutators_are_formal_derivatives() {
        // (i/ħ)[W(q²p²), q] = W(∂/∂p (q²p²)) on the interior
        let b = make_basis(40, 1, 0.7, &[1.0], &[1.0]).unwrap();
        let poly = Polynomial::from_terms(1, vec![Monomial::new(1.0, &[(0, Var::Q, 2), (0, Var::P, 2)])]).unwrap();
        let h = evaluate_polynomial(&poly, &b).unwrap();
        let x = position_operator(&b, 0).unwrap();
        let lhs = commutator(&h, &x).unwrap().scale_complex(c64::new(0.0, 1.0 / 0.7));
        let rhs = evaluate_polynomial(&poly.formal_partial(0, Var::P), &b).unwrap();
        let block = InteriorBlock::new(20).unwrap();
        assert!(interior_error(&lhs, &rhs, &block).unwrap() < 1e-10);
    }

    #[test]
    fn substituted_evaluation_agrees_with_kron_evaluation() {
        let b = make_basis(8, 2, 1.0, &[1.0, 1.0], &[1.0, 0.8]).unwrap();
        let poly = Polynomial::from_terms(
            2,
            vec![
                Monomial::new(0.3, &[(0, Var::Q, 2), (1, Var::P, 1)]),
                Monomial::new(-0.7, &[(1, Var::Q, 1), (1, Var::P, 1)]),
                Monomial::constant(1.0),
            ],
        )
        .unwrap();
        let qs = [position_operator(&b, 0).unwrap(), position_operator(&b, 1).unwrap()];
        let ps = [momentum_operator(&b, 0).unwrap(), momentum_operator(&b, 1).unwrap()];
        let a = evaluate_polynomial(&poly, &b).unwrap();
        let c = evaluate_with(&poly, &qs, &ps).unwrap();
        assert!((&a.matrix() - &c.matrix()).norm_max() < 1e-13);
    }

    #[test]
    fn classical_evaluation() {
        let poly = Polynomial::from_text("dofs 2\n2.0 q0^2 p1\n-1.0 q1\n0.5\n").unwrap();
        assert_eq!(poly.eval(&[3.0, 4.0], &[0.0, 0.5]), 2.0 * 9.0 * 0.5 - 4.0 + 0.5);
    }

    fn arb_monomial() -> impl Strategy<Value = Monomial> {
        (
            // small integers keep every coefficient operation exact
            (-10i32..10).prop_map(f64::from),
            proptest::collection::vec((0usize..2, prop_oneof![Just(Var::Q), Just(Var::P)], 0u32..3), 0..4),
        )
            .prop_map(|(c, f)| Monomial::new(c, &f))
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec(arb_monomial(), 0..6)
            .prop_map(|t| Polynomial::from_terms(2, t).unwrap())
    }

    fn arb_var() -> impl Strategy<Value = (usize, Var)> {
        (0usize..2, prop_oneof![Just(Var::Q), Just(Var::P)])
    }

    fn arb_real_poly() -> impl Strategy<Value = Polynomial> {
        proptest::collection::vec(
            (
                -1e6f64..1e6,
                proptest::collection::vec((0usize..2, prop_oneof![Just(Var::Q), Just(Var::P)], 0u32..4), 0..4),
            )
                .prop_map(|(c, f)| Monomial::new(c, &f)),
            0..8,
        )
        .prop_map(|t| Polynomial::from_terms(2, t).unwrap())
    }

    proptest! {
        #[test]
        fn text_roundtrip(p in arb_real_poly()) {
            prop_assert_eq!(Polynomial::from_text(&p.to_text()).unwrap(), p);
        }

        #[test]
        fn partial_is_linear((dof, var) in arb_var(), a in arb_poly(), b in arb_poly(), k in -4i32..4) {
            // integer-power-of-two scaling keeps coefficient arithmetic exact
            let s = 2f64.powi(k);
            let lhs = a.scale(s).add(&b).unwrap().formal_partial(dof, var);
            let rhs = a.formal_partial(dof, var).scale(s).add(&b.formal_partial(dof, var)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mixed_partials_commute(a in arb_poly(), (d1, v1) in arb_var(), (d2, v2) in arb_var()) {
            let x = a.formal_partial(d1, v1).formal_partial(d2, v2);
            let y = a.formal_partial(d2, v2).formal_partial(d1, v1);
            prop_assert_eq!(x, y);
        }
    }
}
