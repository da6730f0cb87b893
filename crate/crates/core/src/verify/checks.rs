//! Builders for every operator identity in the suite.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::basis::{make_basis, BasisSpec, InteriorBlock};
use crate::c64;
use crate::ehrenfest::ehrenfest_check;
use crate::error::{invalid, Result};
use crate::evolution::heisenberg_rhs;
use crate::hamiltonians::{
    build_em_hamiltonian, build_gravity_taylor, build_potential_hamiltonian, build_rotating_frame,
    kinetic_momentum_polys, rotating_velocity_polys, FieldConfig, PolyHamiltonian, MAX_DEGREE,
};
use crate::ladder::momentum_operator;
use crate::operator::interior_error;
use crate::poly::{evaluate_polynomial, Monomial, Polynomial, Var};
use crate::series::linspace;
use crate::state::{coherent_state, expectation, fock_state, QuantumState};

use super::anchors;
use super::recipe::{Recipe, RecipeContext};
use super::{CheckResult, VerifyConfig};

/// Operator identity `lhs = rhs` on an interior block, optionally at several
/// times along the Heisenberg flow of the check's Hamiltonian.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: String,
    pub group: &'static str,
    pub anchor: &'static str,
    pub hamiltonian: PolyHamiltonian,
    pub lhs: Recipe,
    pub rhs: Recipe,
    pub block: InteriorBlock,
    pub tolerance: f64,
    pub times: Vec<f64>,
    pub parameters: BTreeMap<String, Value>,
    pub note: Option<String>,
}

impl IdentityCheck {
    pub fn run(&self) -> Result<CheckResult> {
        let mut ctx = RecipeContext::new(&self.hamiltonian)?;
        self.run_in(&mut ctx)
    }

    fn run_in(&self, ctx: &mut RecipeContext<'_>) -> Result<CheckResult> {
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance", "must be positive"));
        }
        let times = if self.times.is_empty() { vec![0.0] } else { self.times.clone() };
        let mut worst = 0.0f64;
        for &t in &times {
            ctx.set_time(t);
            let lhs = ctx.resolve(&self.lhs)?;
            let rhs = ctx.resolve(&self.rhs)?;
            let e = interior_error(&lhs, &rhs, &self.block)?;
            worst = if e.is_nan() { f64::NAN } else { worst.max(e) };
        }
        ctx.set_time(0.0);
        Ok(self.result(worst, times))
    }

    fn result(&self, measured_error: f64, times: Vec<f64>) -> CheckResult {
        let basis = self.hamiltonian.basis();
        let mut parameters = self.parameters.clone();
        parameters.insert("n_levels".into(), json!(basis.n_levels()));
        parameters.insert("n_dofs".into(), json!(basis.n_dofs()));
        parameters.insert("hbar".into(), json!(basis.hbar()));
        parameters.insert("masses".into(), json!(basis.masses()));
        parameters.insert("length_scales".into(), json!(basis.length_scales()));
        parameters.insert("m_levels".into(), json!(self.block.m_levels()));
        parameters.insert("times".into(), json!(times));
        CheckResult::new(
            &self.name,
            self.group,
            self.anchor,
            self.lhs.to_string(),
            self.rhs.to_string(),
            measured_error,
            self.tolerance,
            parameters,
            self.note.clone(),
        )
    }
}

/// Runs checks in order, sharing resolved operators between consecutive
/// checks on the same Hamiltonian.
pub fn run_identity_checks(checks: &[IdentityCheck]) -> Result<Vec<CheckResult>> {
    let mut out = Vec::with_capacity(checks.len());
    let mut start = 0;
    while start < checks.len() {
        let h = &checks[start].hamiltonian;
        let mut end = start + 1;
        while end < checks.len() && same_hamiltonian(&checks[end].hamiltonian, h) {
            end += 1;
        }
        let mut ctx = RecipeContext::new(h)?;
        for c in &checks[start..end] {
            out.push(c.run_in(&mut ctx)?);
        }
        start = end;
    }
    Ok(out)
}

fn same_hamiltonian(a: &PolyHamiltonian, b: &PolyHamiltonian) -> bool {
    a.basis() == b.basis() && a.poly() == b.poly()
}

fn tol(cfg: &VerifyConfig, default: f64) -> f64 {
    cfg.tolerance.unwrap_or(default)
}

fn params(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn basis_1d(n: usize, hbar: f64, mass: f64, ell: f64) -> Result<Arc<BasisSpec>> {
    make_basis(n, 1, hbar, &[mass], &[ell])
}

fn i_hbar(hbar: f64, factor: f64) -> c64 {
    c64::new(0.0, hbar * factor)
}

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const NEWTON_TOLERANCE: f64 = 1e-9;
pub const LORENTZ_TOLERANCE: f64 = 1e-10;
pub const ELECTRIC_ONLY_TOLERANCE: f64 = 1e-11;
pub const ROTATING_TOLERANCE: f64 = 1e-10;
pub const HAMILTON_TOLERANCE: f64 = 1e-9;
pub const DEVIATION_TOLERANCE: f64 = 1e-10;

/// `[qⁿ, p] = iħ n qⁿ⁻¹` for `n = 1..=n_max`, plus the shifted forms
/// `[(q − b)ⁿ, p] = iħ n (q − b)ⁿ⁻¹` and `[(p − a)ⁿ, q] = −iħ n (p − a)ⁿ⁻¹`.
pub fn power_commutator_checks(cfg: &VerifyConfig, n_max: u32) -> Result<Vec<IdentityCheck>> {
    if n_max as usize > MAX_DEGREE {
        return Err(invalid("n_max", format!("exceeds the degree cap {MAX_DEGREE}")));
    }
    let hbar = 1.0;
    let basis = basis_1d(cfg.levels_1d, hbar, 1.0, 1.0)?;
    let h = build_potential_hamiltonian(&basis, &[0.0, 0.0, 0.5], 0.0)?;
    let block = InteriorBlock::from_fraction(&basis, cfg.interior_fraction, n_max as usize)?;
    let q = Polynomial::var(1, 0, Var::Q)?;
    let p = Polynomial::var(1, 0, Var::P)?;
    let mut checks = Vec::new();
    for n in 1..=n_max {
        checks.push(IdentityCheck {
            name: format!("power_commutator_n{n}"),
            group: "power_commutator",
            anchor: anchors::POWER_COMMUTATOR,
            hamiltonian: h.clone(),
            lhs: Recipe::commutator(Recipe::Poly(q.pow(n)?), Recipe::p(0)),
            rhs: Recipe::Poly(q.pow(n - 1)?).times_complex(i_hbar(hbar, n as f64)),
            block,
            tolerance: tol(cfg, POWER_TOLERANCE),
            times: vec![],
            parameters: params(&[("n", json!(n))]),
            note: None,
        });
    }
    let (a, b) = (0.3, -0.2);
    let q_shift = q.sub(&Polynomial::constant(1, b))?;
    let p_shift = p.sub(&Polynomial::constant(1, a))?;
    for n in 1..=n_max.min(4) {
        checks.push(IdentityCheck {
            name: format!("shifted_power_commutator_q_n{n}"),
            group: "power_commutator",
            anchor: anchors::SHIFTED_POWERS,
            hamiltonian: h.clone(),
            lhs: Recipe::commutator(Recipe::Poly(q_shift.pow(n)?), Recipe::p(0)),
            rhs: Recipe::Poly(q_shift.pow(n - 1)?).times_complex(i_hbar(hbar, n as f64)),
            block,
            tolerance: tol(cfg, POWER_TOLERANCE),
            times: vec![],
            parameters: params(&[("n", json!(n)), ("shift", json!(b))]),
            note: None,
        });
        checks.push(IdentityCheck {
            name: format!("shifted_power_commutator_p_n{n}"),
            group: "power_commutator",
            anchor: anchors::SHIFTED_POWERS,
            hamiltonian: h.clone(),
            lhs: Recipe::commutator(Recipe::Poly(p_shift.pow(n)?), Recipe::q(0)),
            rhs: Recipe::Poly(p_shift.pow(n - 1)?).times_complex(i_hbar(hbar, -(n as f64))),
            block,
            tolerance: tol(cfg, POWER_TOLERANCE),
            times: vec![],
            parameters: params(&[("n", json!(n)), ("shift", json!(a))]),
            note: None,
        });
    }
    Ok(checks)
}

/// Potential Hamiltonian `p²/2m + ½αq² + (β/3)q³` with `ℓ = √(ħ/(m√α))`.
pub fn cubic_hamiltonian(n_levels: usize, hbar: f64, mass: f64, alpha: f64, beta: f64) -> Result<PolyHamiltonian> {
    let omega = (alpha / mass).sqrt();
    let ell = (hbar / (mass * omega)).sqrt();
    let basis = basis_1d(n_levels, hbar, mass, ell)?;
    build_potential_hamiltonian(&basis, &[0.0, 0.0, 0.5 * alpha, beta / 3.0], 0.0)
}

/// `m (i/ħ)[H, (i/ħ)[H, x(t)]] = −V′(x(t))`, at every time in `times`.
pub fn newton_check(
    name: String,
    anchor: &'static str,
    h: &PolyHamiltonian,
    cfg: &VerifyConfig,
    times: Vec<f64>,
) -> Result<IdentityCheck> {
    let force = h.poly().formal_partial(0, Var::Q).scale(-1.0);
    let mass = h.basis().mass(0);
    let block = InteriorBlock::from_fraction(h.basis(), cfg.interior_fraction, h.degree() as usize)?;
    let evolve = |r: Recipe| if times.is_empty() { r } else { r.evolved() };
    Ok(IdentityCheck {
        name,
        group: "newton",
        anchor,
        hamiltonian: h.clone(),
        lhs: evolve(Recipe::q(0)).rhs().rhs().scaled(mass),
        rhs: evolve(Recipe::Poly(force)),
        block,
        tolerance: tol(cfg, NEWTON_TOLERANCE),
        times,
        parameters: params(&[("potential", json!(h.to_text()))]),
        note: None,
    })
}

pub fn newton_checks(cfg: &VerifyConfig) -> Result<Vec<IdentityCheck>> {
    let n = cfg.levels_1d;
    let grid = linspace(0.0, cfg.newton_t_final, cfg.newton_samples);
    let mut checks = Vec::new();

    let cubic = cubic_hamiltonian(n, 1.0, 1.0, 1.0, cfg.cubic_beta)?;
    let v = cubic.poly().sub(&Polynomial::var(1, 0, Var::P)?.pow(2)?.scale(0.5))?;
    let dv = v.formal_partial(0, Var::Q);
    let block = InteriorBlock::from_fraction(cubic.basis(), cfg.interior_fraction, 3)?;
    checks.push(IdentityCheck {
        name: "newton_velocity".into(),
        group: "newton",
        anchor: anchors::MOMENTUM_RELATION,
        hamiltonian: cubic.clone(),
        lhs: Recipe::q(0).rhs(),
        rhs: Recipe::p(0),
        block,
        tolerance: tol(cfg, NEWTON_TOLERANCE),
        times: vec![],
        parameters: params(&[("potential", json!(v.to_text()))]),
        note: None,
    });
    checks.push(IdentityCheck {
        name: "newton_force".into(),
        group: "newton",
        anchor: anchors::FORCE_RELATION,
        hamiltonian: cubic.clone(),
        lhs: Recipe::p(0).rhs(),
        rhs: Recipe::Poly(dv.scale(-1.0)),
        block,
        tolerance: tol(cfg, NEWTON_TOLERANCE),
        times: vec![],
        parameters: params(&[("potential", json!(v.to_text()))]),
        note: None,
    });

    let free = build_potential_hamiltonian(&basis_1d(n, 1.0, 1.0, 1.0)?, &[], 0.0)?;
    checks.push(newton_check("newton_free".into(), anchors::NEWTON, &free, cfg, vec![])?);

    for &hbar in &cfg.hbar_values {
        let harmonic = cubic_hamiltonian(n, hbar, 1.0, 1.0, 0.0)?;
        checks.push(newton_check(
            format!("newton_harmonic_hbar_{hbar}"),
            anchors::HARMONIC,
            &harmonic,
            cfg,
            grid.clone(),
        )?);
    }
    for &hbar in &cfg.hbar_values {
        let h = cubic_hamiltonian(n, hbar, 1.0, 1.0, cfg.cubic_beta)?;
        let mut c = newton_check(format!("newton_cubic_hbar_{hbar}"), anchors::NEWTON, &h, cfg, grid.clone())?;
        c.parameters.insert("beta".into(), json!(cfg.cubic_beta));
        checks.push(c);
    }

    let (g, big, m, r0, order) = (1.0, 1.0, 1.0, 10.0, 6);
    let gravity = build_gravity_taylor(&basis_1d(n, 1.0, m, 1.0)?, g, big, m, r0, order)?;
    let v = gravity.poly().sub(&Polynomial::var(1, 0, Var::P)?.pow(2)?.scale(0.5 / m))?;
    let gparams = params(&[("r0", json!(r0)), ("order", json!(order)), ("gmm", json!(g * big * m))]);
    let mut c = newton_check("newton_gravity_taylor".into(), anchors::GRAVITY, &gravity, cfg, vec![])?;
    c.parameters.extend(gparams.clone());
    c.note = Some("coordinate is the radial displacement r − r0".into());
    checks.push(c);
    checks.push(IdentityCheck {
        name: "potential_commutator".into(),
        group: "newton",
        anchor: anchors::POTENTIAL_COMMUTATOR,
        hamiltonian: gravity.clone(),
        lhs: Recipe::commutator(Recipe::Poly(v.clone()), Recipe::p(0)),
        rhs: Recipe::Poly(v.formal_partial(0, Var::Q)).times_complex(i_hbar(1.0, 1.0)),
        block: InteriorBlock::from_fraction(gravity.basis(), cfg.interior_fraction, order)?,
        tolerance: tol(cfg, NEWTON_TOLERANCE),
        times: vec![],
        parameters: gparams,
        note: None,
    });
    Ok(checks)
}

/// Planar charge in uniform fields; `ℓ = √(2ħ/|qB|)` matches the basis to
/// the Landau length, or `ℓ = 1` without a magnetic field.
pub fn em_hamiltonian(n_levels: usize, hbar: f64, mass: f64, fields: &FieldConfig) -> Result<PolyHamiltonian> {
    let qb = (fields.charge * fields.magnetic[2]).abs();
    let ell = if qb > 0.0 { (2.0 * hbar / qb).sqrt() } else { 1.0 };
    let basis = make_basis(n_levels, 2, hbar, &[mass, mass], &[ell, ell])?;
    build_em_hamiltonian(&basis, fields)
}

/// Velocity, kinetic-momentum commutator, and Lorentz-law checks.
pub fn lorentz_checks_for(
    cfg: &VerifyConfig,
    label: &str,
    fields: &FieldConfig,
    tolerance: f64,
    with_commutators: bool,
) -> Result<Vec<IdentityCheck>> {
    let (hbar, mass) = (1.0, 1.0);
    let h = em_hamiltonian(cfg.levels_2d, hbar, mass, fields)?;
    let block = InteriorBlock::from_fraction(h.basis(), cfg.interior_fraction, 2)?;
    let pis = kinetic_momentum_polys(fields, 2)?;
    let (qc, bz, e) = (fields.charge, fields.magnetic[2], fields.electric);
    let p = params(&[
        ("charge", json!(qc)),
        ("magnetic", json!(fields.magnetic)),
        ("electric", json!(fields.electric)),
        ("gauge", json!("symmetric")),
    ]);
    let mk = |name: String, anchor: &'static str, lhs: Recipe, rhs: Recipe| IdentityCheck {
        name,
        group: "lorentz",
        anchor,
        hamiltonian: h.clone(),
        lhs,
        rhs,
        block,
        tolerance,
        times: vec![],
        parameters: p.clone(),
        note: None,
    };
    let mut checks = Vec::new();
    if with_commutators {
        checks.push(mk(
            format!("{label}_ccr_same_dof"),
            anchors::CCR,
            Recipe::commutator(Recipe::q(0), Recipe::p(0)),
            Recipe::Identity.times_complex(i_hbar(hbar, 1.0)),
        ));
        checks.push(mk(
            format!("{label}_ccr_cross_dof"),
            anchors::CCR,
            Recipe::commutator(Recipe::q(0), Recipe::p(1)),
            Recipe::Sum(vec![]),
        ));
        checks.push(mk(
            format!("{label}_kinetic_commutator"),
            anchors::KINETIC_COMMUTATOR,
            Recipe::commutator(Recipe::Poly(pis[0].clone()), Recipe::Poly(pis[1].clone())),
            Recipe::Identity.times_complex(i_hbar(hbar, qc * bz)),
        ));
    }
    for i in 0..2 {
        checks.push(mk(
            format!("{label}_velocity_{i}"),
            anchors::EM_VELOCITY,
            Recipe::q(i).rhs(),
            Recipe::Poly(pis[i].scale(1.0 / mass)),
        ));
    }
    // (v × B)₀ = v₁B_z, (v × B)₁ = −v₀B_z
    let force = |i: usize| {
        let (j, sign) = if i == 0 { (1, 1.0) } else { (0, -1.0) };
        Recipe::q(j)
            .rhs()
            .scaled(sign * qc * bz)
            .plus(Recipe::Identity.scaled(qc * e[i]))
    };
    for i in 0..2 {
        checks.push(mk(
            format!("{label}_force_{i}"),
            anchors::LORENTZ,
            Recipe::q(i).rhs().rhs().scaled(mass),
            force(i),
        ));
    }
    Ok(checks)
}

pub fn lorentz_checks(cfg: &VerifyConfig) -> Result<Vec<IdentityCheck>> {
    let mut checks = lorentz_checks_for(
        cfg,
        "lorentz",
        &FieldConfig::new(1.0, [0.0, 0.0, 1.0], [0.0; 3]),
        tol(cfg, LORENTZ_TOLERANCE),
        true,
    )?;
    checks.extend(lorentz_checks_for(
        cfg,
        "lorentz_crossed",
        &FieldConfig::new(1.0, [0.0, 0.0, 1.0], [0.5, 0.0, 0.0]),
        tol(cfg, LORENTZ_TOLERANCE),
        false,
    )?);
    checks.extend(lorentz_checks_for(
        cfg,
        "lorentz_electric",
        &FieldConfig::new(1.0, [0.0; 3], [1.0, -0.5, 0.0]),
        tol(cfg, ELECTRIC_ONLY_TOLERANCE),
        false,
    )?);
    Ok(checks)
}

/// Position velocities and the Coriolis plus centrifugal law in a frame
/// rotating at `omega`.
pub fn rotating_checks_for(cfg: &VerifyConfig, omega: f64) -> Result<Vec<IdentityCheck>> {
    let (hbar, mass) = (1.0, 1.0);
    let basis = make_basis(cfg.levels_2d, 2, hbar, &[mass, mass], &[1.0, 1.0])?;
    let h = build_rotating_frame(&basis, omega)?;
    let block = InteriorBlock::from_fraction(&basis, cfg.interior_fraction, 2)?;
    let v = rotating_velocity_polys(mass, omega)?;
    let p = params(&[("omega", json!(omega)), ("centrifugal_factor", json!(0.5))]);
    let mk = |name: String, anchor: &'static str, lhs: Recipe, rhs: Recipe| IdentityCheck {
        name,
        group: "rotating",
        anchor,
        hamiltonian: h.clone(),
        lhs,
        rhs,
        block,
        tolerance: tol(cfg, ROTATING_TOLERANCE),
        times: vec![],
        parameters: p.clone(),
        note: None,
    };
    let mut checks = Vec::new();
    for i in 0..2 {
        checks.push(mk(
            format!("rotating_velocity_{i}"),
            anchors::ROTATING_VELOCITY,
            Recipe::q(i).rhs(),
            Recipe::Poly(v[i].clone()),
        ));
    }
    // m r̈ = −2m ω×v − m ω×(ω×r) with ω = ω ẑ:
    // m v̇₀ = 2mω v₁ + mω² r₀,  m v̇₁ = −2mω v₀ + mω² r₁
    for i in 0..2 {
        let (j, sign) = if i == 0 { (1, 1.0) } else { (0, -1.0) };
        checks.push(mk(
            format!("rotating_acceleration_{i}"),
            anchors::ROTATING,
            Recipe::q(i).rhs().rhs().scaled(mass),
            Recipe::q(j)
                .rhs()
                .scaled(sign * 2.0 * mass * omega)
                .plus(Recipe::q(i).scaled(mass * omega * omega)),
        ));
    }
    Ok(checks)
}

pub fn rotating_checks(cfg: &VerifyConfig) -> Result<Vec<IdentityCheck>> {
    rotating_checks_for(cfg, cfg.rotating_omega)
}

/// Random 2-dof polynomial Hamiltonian: `4..=8` monomials with coefficients
/// uniform in `[−1, 1]`, distinct monomials of total degree `1..=max_degree`, one variable kind
/// per dof, and at least one term coupling the two dofs.
pub fn random_hamiltonian(basis: &Arc<BasisSpec>, seed: u64, max_degree: u32) -> Result<PolyHamiltonian> {
    if basis.n_dofs() != 2 {
        return Err(invalid("basis", "random Hamiltonians use 2 dofs"));
    }
    if max_degree < 2 {
        return Err(invalid("max_degree", "need degree at least 2 for coupling"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { Var::Q } else { Var::P };
    let n_terms = rng.gen_range(4..=8);
    let mut terms = Vec::with_capacity(n_terms);
    let mut seen = Vec::with_capacity(n_terms);
    for k in 0..n_terms {
        let (e0, e1, k0, k1) = loop {
            let e0 = rng.gen_range(0..=max_degree);
            let e1 = rng.gen_range(0..=max_degree);
            let (k0, k1) = (kind(&mut rng), kind(&mut rng));
            let total = e0 + e1;
            let coupled = e0 > 0 && e1 > 0;
            let key = (if e0 > 0 { Some(k0) } else { None }, e0, if e1 > 0 { Some(k1) } else { None }, e1);
            if total >= 1 && total <= max_degree && (k > 0 || coupled) && !seen.contains(&key) {
                seen.push(key);
                break (e0, e1, k0, k1);
            }
        };
        let coefficient = rng.gen_range(-1.0..=1.0);
        let factors: Vec<(usize, Var, u32)> = [(0, k0, e0), (1, k1, e1)].into_iter().filter(|f| f.2 > 0).collect();
        terms.push(Monomial::new(coefficient, &factors));
    }
    PolyHamiltonian::generic(basis.clone(), Polynomial::from_terms(2, terms)?)
}

/// `(i/ħ)[H, qⱼ] = ∂H/∂pⱼ` and `(i/ħ)[H, pⱼ] = −∂H/∂qⱼ` for every dof.
pub fn hamilton_checks_for(cfg: &VerifyConfig, label: &str, h: &PolyHamiltonian) -> Result<Vec<IdentityCheck>> {
    let block = InteriorBlock::from_fraction(h.basis(), cfg.interior_fraction, h.degree() as usize)?;
    let note = h
        .poly()
        .has_mixed_same_dof()
        .then(|| "same-dof q·p products evaluated in Weyl order".to_string());
    let mut checks = Vec::new();
    for j in 0..h.n_dofs() {
        for (var, target, sign) in [(Var::Q, Var::P, 1.0), (Var::P, Var::Q, -1.0)] {
            let lhs = match var {
                Var::Q => Recipe::q(j),
                Var::P => Recipe::p(j),
            };
            let name = match var {
                Var::Q => format!("{label}_q{j}"),
                Var::P => format!("{label}_p{j}"),
            };
            checks.push(IdentityCheck {
                name,
                group: "hamilton",
                anchor: anchors::HAMILTON,
                hamiltonian: h.clone(),
                lhs: lhs.rhs(),
                rhs: Recipe::Poly(h.poly().formal_partial(j, target).scale(sign)),
                block,
                tolerance: tol(cfg, HAMILTON_TOLERANCE),
                times: vec![],
                parameters: params(&[("hamiltonian", json!(h.to_text()))]),
                note: note.clone(),
            });
        }
    }
    Ok(checks)
}

pub fn hamilton_checks(cfg: &VerifyConfig) -> Result<Vec<IdentityCheck>> {
    let n = cfg.levels_hamilton;
    let basis = make_basis(n, 2, 1.0, &[1.0, 1.0], &[1.0, 1.0])?;
    let mut checks = Vec::new();
    let separable = Polynomial::from_terms(
        2,
        vec![
            Monomial::new(0.5, &[(0, Var::P, 2)]),
            Monomial::new(0.5, &[(1, Var::P, 2)]),
            Monomial::new(0.3, &[(0, Var::Q, 2)]),
            Monomial::new(0.1, &[(0, Var::Q, 3)]),
            Monomial::new(-0.2, &[(0, Var::Q, 1), (1, Var::Q, 2)]),
        ],
    )?;
    checks.extend(hamilton_checks_for(cfg, "hamilton_potential", &PolyHamiltonian::generic(basis.clone(), separable)?)?);
    let constant = PolyHamiltonian::generic(basis.clone(), Polynomial::constant(2, 1.5))?;
    checks.extend(hamilton_checks_for(cfg, "hamilton_constant", &constant)?);
    for k in 0..cfg.n_random_hamiltonians {
        let seed = cfg.seed.wrapping_add(k as u64);
        let h = random_hamiltonian(&basis, seed, 4)?;
        let mut group = hamilton_checks_for(cfg, &format!("hamilton_seed_{seed}"), &h)?;
        for c in &mut group {
            c.parameters.insert("seed".into(), json!(seed));
        }
        checks.extend(group);
    }
    Ok(checks)
}

/// States used by the state-level checks: Fock states, coherent states,
/// and fixed superpositions, all well inside the basis.
pub fn assorted_states(basis: &Arc<BasisSpec>) -> Result<Vec<(String, QuantumState)>> {
    let mut out = Vec::new();
    for n in [0usize, 1, 3] {
        out.push((format!("fock_{n}"), fock_state(basis, &[n])?));
    }
    for (re, im) in [(0.5, 0.0), (1.0, -0.5), (-1.2, 0.8), (0.0, 1.5)] {
        out.push((format!("coherent_{re}_{im}"), coherent_state(basis, 0, c64::new(re, im))?));
    }
    let dim = basis.dimension();
    let superpositions: [&[(usize, c64)]; 3] = [
        &[(0, c64::new(1.0, 0.0)), (1, c64::new(1.0, 0.0))],
        &[(0, c64::new(0.6, 0.0)), (2, c64::new(0.0, 0.8))],
        &[(1, c64::new(1.0, 0.0)), (2, c64::new(-0.5, 0.5)), (5, c64::new(0.3, 0.0))],
    ];
    for (k, sup) in superpositions.iter().enumerate() {
        let mut amps = faer::Col::<c64>::zeros(dim);
        for &(i, a) in sup.iter() {
            amps[i] = a;
        }
        out.push((format!("superposition_{k}"), QuantumState::normalized(basis.clone(), amps)?));
    }
    Ok(out)
}

/// `⟨V′(x)⟩ − V′(⟨x⟩) = β(Δx)²` and `d⟨p⟩/dt = −⟨V′(x)⟩` over assorted states.
pub fn ehrenfest_checks(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let (alpha, beta) = (1.0, 0.5);
    let h = cubic_hamiltonian(cfg.levels_1d, 1.0, 1.0, alpha, beta)?;
    let states = assorted_states(h.basis())?;
    let names: Vec<&str> = states.iter().map(|(n, _)| n.as_str()).collect();
    let tolerance = tol(cfg, DEVIATION_TOLERANCE);

    let mut worst_identity = 0.0f64;
    for (_, psi) in &states {
        let r = ehrenfest_check(psi, &h)?;
        let e = r.identity_error().unwrap_or(f64::NAN);
        worst_identity = if e.is_nan() { f64::NAN } else { worst_identity.max(e) };
    }

    let hop = h.evaluate()?;
    let pdot = heisenberg_rhs(&hop, &momentum_operator(h.basis(), 0)?)?;
    let force = evaluate_polynomial(&h.poly().formal_partial(0, Var::Q), h.basis())?;
    let mut worst_theorem = 0.0f64;
    for (_, psi) in &states {
        let lhs = expectation(psi, &pdot)?.re;
        let rhs = -expectation(psi, &force)?.re;
        worst_theorem = worst_theorem.max((lhs - rhs).abs());
    }

    let p = params(&[
        ("alpha", json!(alpha)),
        ("beta", json!(beta)),
        ("states", json!(names)),
        ("n_levels", json!(h.basis().n_levels())),
        ("hbar", json!(h.basis().hbar())),
    ]);
    Ok(vec![
        CheckResult::new(
            "ehrenfest_theorem",
            "ehrenfest",
            anchors::EHRENFEST,
            "⟨(i/ħ)[H, p]⟩".into(),
            "−⟨V′(x)⟩".into(),
            worst_theorem,
            tolerance,
            p.clone(),
            Some("absolute error, worst over states".into()),
        ),
        CheckResult::new(
            "ehrenfest_deviation",
            "ehrenfest",
            anchors::DEVIATION,
            "⟨V′(x)⟩ − V′(⟨x⟩)".into(),
            "β(Δx)²".into(),
            worst_identity,
            tolerance,
            p,
            Some("absolute error, worst over states".into()),
        ),
    ])
}
