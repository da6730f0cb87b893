//! Gap between expectation-value dynamics and classical trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::PolyHamiltonian;
use crate::ladder::position_operator;
use crate::poly::{evaluate_polynomial, Var};
use crate::series::TimeSeries;
use crate::state::{expectation, uncertainty, QuantumState};

/// `⟨V′(x)⟩` against `V′(⟨x⟩)` for one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub mean_force: f64,
    pub classical_force_at_mean: f64,
    /// `mean_force − classical_force_at_mean`.
    pub residual: f64,
    /// `β (Δx)²` when `V′ = γ + αx + βx²`; `None` for higher degree.
    pub predicted_residual: Option<f64>,
    pub delta_x: f64,
    pub mean_x: f64,
}

impl DeviationReport {
    pub fn identity_error(&self) -> Option<f64> {
        self.predicted_residual.map(|p| (self.residual - p).abs())
    }
}

pub fn ehrenfest_check(state: &QuantumState, h: &PolyHamiltonian) -> Result<DeviationReport> {
    if h.n_dofs() != 1 {
        return Err(Error::WrongHamiltonian(format!(
            "the deviation identity needs a 1-dof Hamiltonian, got {} dofs",
            h.n_dofs()
        )));
    }
    if state.basis() != h.basis() {
        return Err(Error::BasisMismatch);
    }
    let force = h.poly().formal_partial(0, Var::Q);
    if force.depends_on(0, Var::P) {
        return Err(Error::WrongHamiltonian("the potential must not depend on p".into()));
    }
    let x = position_operator(h.basis(), 0)?;
    let mean_x = expectation(state, &x)?.re;
    let delta_x = uncertainty(state, &x)?;
    let mean_force = expectation(state, &evaluate_polynomial(&force, h.basis())?)?.re;
    let classical_force_at_mean = force.eval(&[mean_x], &[0.0]);
    let predicted_residual = (force.degree() <= 2)
        .then(|| force.coefficient_of(&[(0, Var::Q, 2)]) * delta_x * delta_x);
    Ok(DeviationReport {
        mean_force,
        classical_force_at_mean,
        residual: mean_force - classical_force_at_mean,
        predicted_residual,
        delta_x,
        mean_x,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelGap {
    pub quantum: String,
    pub classical: String,
    pub max_abs_gap: f64,
    pub time_of_max: f64,
    pub rms_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceMetrics {
    pub max_abs_gap: f64,
    pub time_of_max: f64,
    pub rms_gap: f64,
    pub channels: Vec<ChannelGap>,
}

fn paired<'a>(quantum: &'a TimeSeries, classical: &'a TimeSeries, q: &str, c: &str) -> Result<(&'a [f64], &'a [f64])> {
    let get = |s: &'a TimeSeries, name: &str| {
        s.channel(name)
            .ok_or_else(|| Error::InvalidGrid(format!("missing channel {name}")))
    };
    Ok((get(quantum, q)?, get(classical, c)?))
}

/// Absolute gap per sample for each `(quantum, classical)` channel pair.
pub fn gap_channels(quantum: &TimeSeries, classical: &TimeSeries, pairs: &[(&str, &str)]) -> Result<Vec<Vec<f64>>> {
    if quantum.times() != classical.times() {
        return Err(Error::InvalidGrid("quantum and classical grids differ".into()));
    }
    pairs
        .iter()
        .map(|(q, c)| {
            let (a, b) = paired(quantum, classical, q, c)?;
            Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect())
        })
        .collect()
}

pub fn compare_trajectories(
    quantum: &TimeSeries,
    classical: &TimeSeries,
    pairs: &[(&str, &str)],
) -> Result<DivergenceMetrics> {
    let gaps = gap_channels(quantum, classical, pairs)?;
    let times = quantum.times();
    let mut channels = Vec::with_capacity(pairs.len());
    let (mut max_all, mut t_all, mut sq_all, mut count) = (0.0f64, times[0], 0.0, 0usize);
    for ((q, c), g) in pairs.iter().zip(&gaps) {
        let (mut max, mut t_max, mut sq) = (0.0f64, times[0], 0.0);
        for (k, &v) in g.iter().enumerate() {
            if v > max {
                max = v;
                t_max = times[k];
            }
            sq += v * v;
        }
        if max > max_all {
            max_all = max;
            t_all = t_max;
        }
        sq_all += sq;
        count += g.len();
        channels.push(ChannelGap {
            quantum: q.to_string(),
            classical: c.to_string(),
            max_abs_gap: max,
            time_of_max: t_max,
            rms_gap: (sq / g.len() as f64).sqrt().min(max),
        });
    }
    let rms_gap = if count > 0 { (sq_all / count as f64).sqrt().min(max_all) } else { 0.0 };
    Ok(DivergenceMetrics {
        max_abs_gap: max_all,
        time_of_max: t_all,
        rms_gap,
        channels,
    })
}

/// True when every first derivative of `H` is at most linear, so the
/// equations of motion are linear in the observables and expectation values
/// follow the classical trajectory exactly.
pub fn linear_scenario_exactness(h: &PolyHamiltonian) -> bool {
    (0..h.n_dofs()).all(|j| {
        [Var::Q, Var::P]
            .into_iter()
            .all(|v| h.poly().formal_partial(j, v).degree() <= 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::make_basis;
    use crate::c64;
    use crate::classical::{integrate_newton, IntegratorConfig};
    use crate::evolution::{make_propagator, sample_expectations, Observable};
    use crate::hamiltonians::{build_em_hamiltonian, build_potential_hamiltonian, build_rotating_frame, FieldConfig};
    use crate::series::linspace;
    use crate::state::{coherent_state, fock_state};
    use proptest::prelude::*;

    fn b1(n: usize, ell: f64) -> std::sync::Arc<crate::basis::BasisSpec> {
        make_basis(n, 1, 1.0, &[1.0], &[ell]).unwrap()
    }

    #[test]
    fn harmonic_residual_vanishes() {
        let b = b1(32, 1.0);
        let h = build_potential_hamiltonian(&b, &[0.3, -0.2, 0.7], 0.0).unwrap();
        for psi in [
            fock_state(&b, &[3]).unwrap(),
            coherent_state(&b, 0, c64::new(0.4, -1.1)).unwrap(),
        ] {
            let r = ehrenfest_check(&psi, &h).unwrap();
            assert!(r.residual.abs() < 1e-10);
            assert_eq!(r.predicted_residual, Some(0.0));
        }
    }

    #[test]
    fn quadratic_force_residual() {
        // vacuum of ℓ = 1/√2 has Δx = ½; V′ = αx + 2x² ⇒ residual 2·¼
        let b = b1(32, std::f64::consts::FRAC_1_SQRT_2);
        let alpha = 1.3;
        let h = build_potential_hamiltonian(&b, &[0.0, 0.0, alpha / 2.0, 2.0 / 3.0], 0.0).unwrap();
        let r = ehrenfest_check(&fock_state(&b, &[0]).unwrap(), &h).unwrap();
        assert!((r.delta_x - 0.5).abs() < 1e-14);
        assert!((r.residual - 0.5).abs() < 1e-10);
        assert!(r.identity_error().unwrap() < 1e-10);
        assert_eq!(r.residual, r.mean_force - r.classical_force_at_mean);
    }

    #[test]
    fn residual_shrinks_with_width() {
        let mut last = f64::INFINITY;
        for ell in [1.0, 0.5, 0.25, 0.1, 0.02] {
            let b = b1(16, ell);
            let h = build_potential_hamiltonian(&b, &[0.0, 0.0, 0.5, 1.0], 0.0).unwrap();
            let r = ehrenfest_check(&fock_state(&b, &[0]).unwrap(), &h).unwrap();
            assert!(r.residual < last);
            last = r.residual;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn higher_degree_has_no_prediction() {
        let b = b1(32, 1.0);
        let h = build_potential_hamiltonian(&b, &[0.0, 0.0, 0.5, 0.0, 0.1], 0.0).unwrap();
        let r = ehrenfest_check(&coherent_state(&b, 0, c64::new(1.0, 0.0)).unwrap(), &h).unwrap();
        assert!(r.predicted_residual.is_none());
        assert!(r.residual > 0.0);
    }

    #[test]
    fn rejects_multi_dof() {
        let b = make_basis(4, 2, 1.0, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        let h = build_rotating_frame(&b, 0.5).unwrap();
        let psi = fock_state(&b, &[0, 0]).unwrap();
        assert!(matches!(ehrenfest_check(&psi, &h), Err(Error::WrongHamiltonian(_))));
    }

    #[test]
    fn identical_series_have_no_gap() {
        let mut s = TimeSeries::new(linspace(0.0, 1.0, 5)).unwrap();
        s.push_channel("x", vec![0.0, 1.0, 0.5, -2.0, 3.0]).unwrap();
        let m = compare_trajectories(&s, &s, &[("x", "x")]).unwrap();
        assert_eq!((m.max_abs_gap, m.rms_gap), (0.0, 0.0));
        let other = TimeSeries::new(linspace(0.0, 2.0, 5)).unwrap();
        assert!(matches!(compare_trajectories(&s, &other, &[]), Err(Error::InvalidGrid(_))));
        assert!(compare_trajectories(&s, &s, &[("x", "y")]).is_err());
    }

    #[test]
    fn metrics_locate_peak() {
        let mut a = TimeSeries::new(vec![0.0, 1.0, 2.0]).unwrap();
        let mut b = a.clone();
        a.push_channel("x", vec![0.0, 3.0, 1.0]).unwrap();
        b.push_channel("x", vec![0.0, 0.0, 0.0]).unwrap();
        let m = compare_trajectories(&a, &b, &[("x", "x")]).unwrap();
        assert_eq!(m.max_abs_gap, 3.0);
        assert_eq!(m.time_of_max, 1.0);
        assert!((m.rms_gap - (10.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exactness_classification() {
        let b = b1(8, 1.0);
        assert!(linear_scenario_exactness(&build_potential_hamiltonian(&b, &[0.0, 0.0, 0.5], 0.0).unwrap()));
        assert!(!linear_scenario_exactness(&build_potential_hamiltonian(&b, &[0.0, 0.0, 0.5, 0.1], 0.0).unwrap()));
        let b2 = make_basis(4, 2, 1.0, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        let em = build_em_hamiltonian(&b2, &FieldConfig::new(1.0, [0.0, 0.0, 1.0], [0.5, 0.0, 0.0])).unwrap();
        assert!(linear_scenario_exactness(&em));
        assert!(linear_scenario_exactness(&build_rotating_frame(&b2, 0.5).unwrap()));
    }

    fn harmonic_gap(alpha: c64) -> f64 {
        let b = b1(64, 1.0);
        let h = build_potential_hamiltonian(&b, &[0.0, 0.0, 0.5], 0.0).unwrap();
        let prop = make_propagator(&h.evaluate().unwrap()).unwrap();
        let psi = coherent_state(&b, 0, alpha).unwrap();
        let x = position_operator(&b, 0).unwrap();
        let grid = linspace(0.0, 10.0, 51);
        let q = sample_expectations(&prop, &psi, &[Observable::mean("q0", &x)], &grid).unwrap();
        let x0 = std::f64::consts::SQRT_2 * alpha.re;
        let v0 = std::f64::consts::SQRT_2 * alpha.im;
        let cfg = IntegratorConfig::rk4(1e-3, 10.0).with_samples(51);
        let c = integrate_newton(|x| x, 1.0, x0, v0, &cfg).unwrap();
        compare_trajectories(&q, &c, &[("q0", "q0")]).unwrap().max_abs_gap
    }

    #[test]
    fn harmonic_coherent_state_is_classical() {
        assert!(harmonic_gap(c64::new(1.2, -0.7)) < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn deviation_identity_holds_for_any_state(
            re in proptest::collection::vec(-1.0f64..1.0, 24),
            im in proptest::collection::vec(-1.0f64..1.0, 24),
            beta in -3.0f64..3.0,
        ) {
            let b = b1(24, 0.8);
            let h = build_potential_hamiltonian(&b, &[0.1, 0.2, 0.35, beta / 3.0], 0.0).unwrap();
            let amps = faer::Col::from_fn(24, |k| c64::new(re[k], im[k]));
            prop_assume!(amps.norm_l2() > 1e-3);
            let psi = QuantumState::normalized(b.clone(), amps).unwrap();
            let r = ehrenfest_check(&psi, &h).unwrap();
            prop_assert!(r.identity_error().unwrap() <= 1e-10 * (1.0 + beta.abs()));
            let shifted = build_potential_hamiltonian(&b, &[5.0, -1.0, 0.35, beta / 3.0], 0.0).unwrap();
            let r2 = ehrenfest_check(&psi, &shifted).unwrap();
            prop_assert!((r2.residual - r.residual).abs() <= 1e-10 * (1.0 + r.mean_force.abs()));
        }

        #[test]
        fn linear_scenarios_track_classical(r in 0.0f64..2.0, phi in 0.0f64..std::f64::consts::TAU) {
            prop_assert!(harmonic_gap(c64::from_polar(r, phi)) <= 1e-8);
        }
    }
}
