//! Declarative operator expressions resolved against a Hamiltonian.

use std::collections::HashMap;
use std::fmt;

use crate::c64;
use crate::error::Result;
use crate::evolution::SpectralPropagator;
use crate::hamiltonians::PolyHamiltonian;
use crate::ladder::{momentum_operator, position_operator};
use crate::operator::{commutator, Operator};
use crate::poly::{evaluate_polynomial, Polynomial};

#[derive(Debug, Clone, PartialEq)]
pub enum Recipe {
    Identity,
    Position(usize),
    Momentum(usize),
    Hamiltonian,
    Poly(Polynomial),
    Scale { re: f64, im: f64, of: Box<Recipe> },
    Sum(Vec<Recipe>),
    Product(Box<Recipe>, Box<Recipe>),
    Commutator(Box<Recipe>, Box<Recipe>),
    /// `(i/ħ)[H, A]`.
    HeisenbergRhs(Box<Recipe>),
    /// `U_t A U_t†` at the sample time.
    Evolved(Box<Recipe>),
}

impl Recipe {
    pub fn q(dof: usize) -> Self {
        Recipe::Position(dof)
    }

    pub fn p(dof: usize) -> Self {
        Recipe::Momentum(dof)
    }

    pub fn scaled(self, factor: f64) -> Self {
        Recipe::Scale {
            re: factor,
            im: 0.0,
            of: Box::new(self),
        }
    }

    pub fn times_complex(self, factor: c64) -> Self {
        Recipe::Scale {
            re: factor.re,
            im: factor.im,
            of: Box::new(self),
        }
    }

    pub fn rhs(self) -> Self {
        Recipe::HeisenbergRhs(Box::new(self))
    }

    pub fn evolved(self) -> Self {
        Recipe::Evolved(Box::new(self))
    }

    pub fn commutator(a: Recipe, b: Recipe) -> Self {
        Recipe::Commutator(Box::new(a), Box::new(b))
    }

    pub fn product(a: Recipe, b: Recipe) -> Self {
        Recipe::Product(Box::new(a), Box::new(b))
    }

    pub fn plus(self, other: Recipe) -> Self {
        match self {
            Recipe::Sum(mut terms) => {
                terms.push(other);
                Recipe::Sum(terms)
            }
            first => Recipe::Sum(vec![first, other]),
        }
    }

    pub fn uses_evolution(&self) -> bool {
        match self {
            Recipe::Evolved(_) => true,
            Recipe::Scale { of, .. } | Recipe::HeisenbergRhs(of) => of.uses_evolution(),
            Recipe::Sum(terms) => terms.iter().any(Recipe::uses_evolution),
            Recipe::Product(a, b) | Recipe::Commutator(a, b) => a.uses_evolution() || b.uses_evolution(),
            _ => false,
        }
    }
}

fn fmt_scalar(re: f64, im: f64) -> String {
    match (re, im) {
        (r, i) if i == 0.0 => format!("{r}"),
        (r, i) if r == 0.0 => format!("{i}i"),
        (r, i) => format!("({r}{i:+}i)"),
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recipe::Identity => write!(f, "I"),
            Recipe::Position(d) => write!(f, "q{d}"),
            Recipe::Momentum(d) => write!(f, "p{d}"),
            Recipe::Hamiltonian => write!(f, "H"),
            Recipe::Poly(poly) => {
                let body: Vec<String> = poly
                    .to_text()
                    .lines()
                    .skip(1)
                    .map(|l| l.replacen(' ', "*", 1))
                    .collect();
                if body.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "W({})", body.join(" + "))
                }
            }
            Recipe::Scale { re, im, of } => write!(f, "{}*{of}", fmt_scalar(*re, *im)),
            Recipe::Sum(terms) => {
                let parts: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            Recipe::Product(a, b) => write!(f, "{a}·{b}"),
            Recipe::Commutator(a, b) => write!(f, "[{a}, {b}]"),
            Recipe::HeisenbergRhs(a) => write!(f, "(i/ħ)[H, {a}]"),
            Recipe::Evolved(a) => write!(f, "{a}(t)"),
        }
    }
}

/// Resolution state for one Hamiltonian: the evaluated `H`, an optional
/// propagator, and a per-time cache keyed by the recipe text.
pub struct RecipeContext<'a> {
    hamiltonian: &'a PolyHamiltonian,
    h: Operator,
    propagator: Option<SpectralPropagator>,
    cache: HashMap<String, Operator>,
    time: f64,
}

impl<'a> RecipeContext<'a> {
    pub fn new(hamiltonian: &'a PolyHamiltonian) -> Result<Self> {
        Ok(Self {
            hamiltonian,
            h: hamiltonian.evaluate()?,
            propagator: None,
            cache: HashMap::new(),
            time: 0.0,
        })
    }

    pub fn hamiltonian_operator(&self) -> &Operator {
        &self.h
    }

    pub fn set_time(&mut self, t: f64) {
        if t != self.time {
            self.time = t;
            self.cache.clear();
        }
    }

    fn propagator(&mut self) -> Result<&SpectralPropagator> {
        if self.propagator.is_none() {
            self.propagator = Some(SpectralPropagator::new(&self.h)?);
        }
        Ok(self.propagator.as_ref().expect("initialised above"))
    }

    pub fn resolve(&mut self, recipe: &Recipe) -> Result<Operator> {
        let key = recipe.to_string();
        if let Some(op) = self.cache.get(&key) {
            return Ok(op.clone());
        }
        let basis = self.hamiltonian.basis().clone();
        let op = match recipe {
            Recipe::Identity => Operator::identity(&basis),
            Recipe::Position(d) => position_operator(&basis, *d)?,
            Recipe::Momentum(d) => momentum_operator(&basis, *d)?,
            Recipe::Hamiltonian => self.h.clone(),
            Recipe::Poly(poly) => evaluate_polynomial(poly, &basis)?,
            Recipe::Scale { re, im, of } => self.resolve(of)?.scale_complex(c64::new(*re, *im)),
            Recipe::Sum(terms) => {
                let mut acc = Operator::zeros(&basis);
                for t in terms {
                    acc = acc.add(&self.resolve(t)?)?;
                }
                acc
            }
            Recipe::Product(a, b) => {
                let a = self.resolve(a)?;
                a.mul(&self.resolve(b)?)?
            }
            Recipe::Commutator(a, b) => {
                let a = self.resolve(a)?;
                commutator(&a, &self.resolve(b)?)?
            }
            Recipe::HeisenbergRhs(a) => {
                let a = self.resolve(a)?;
                crate::evolution::heisenberg_rhs(&self.h, &a)?
            }
            Recipe::Evolved(a) => {
                let a = self.resolve(a)?;
                if self.time == 0.0 {
                    a
                } else {
                    let t = self.time;
                    crate::evolution::heisenberg_evolve(self.propagator()?, &a, t)?
                }
            }
        };
        self.cache.insert(key, op.clone());
        Ok(op)
    }
}
