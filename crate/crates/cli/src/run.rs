//! `run`: quantum expectation values against a classical oracle on one grid.

use std::f64::consts::SQRT_2;
use std::path::{Path, PathBuf};

use heisenlab::classical::{
    integrate_hamilton, integrate_lorentz, integrate_newton, integrate_rotating, ClassicalState, IntegratorConfig,
};
use heisenlab::ehrenfest::{compare_trajectories, ehrenfest_check, linear_scenario_exactness};
use heisenlab::evolution::{make_propagator, sample_expectations, schrodinger_evolve, Observable};
use heisenlab::hamiltonians::{
    build_em_hamiltonian, build_gravity_taylor, build_potential_hamiltonian, build_rotating_frame_with_factor,
    kinetic_momentum_operator, PolyHamiltonian,
};
use heisenlab::state::{fock_state, product_coherent_state, QuantumState};
use heisenlab::verify::checks::hamilton_checks_for;
use heisenlab::verify::{run_identity_checks, CheckResult, VerifyConfig};
use heisenlab::{
    c64, linspace, make_basis, momentum_operator, position_operator, DeviationReport, DivergenceMetrics, Polynomial,
    TimeSeries,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scenario::{InitialState, Scenario, System};
use crate::{ensure_dir, write_atomic, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedDeviation {
    pub t: f64,
    #[serde(flatten)]
    pub report: DeviationReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub csv: String,
    pub plots: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    /// SHA-256 of the scenario echo below, defaults and overrides applied.
    pub config_hash: String,
    pub scenario: Scenario,
    pub n_dofs: usize,
    pub n_levels: usize,
    pub length_scale: f64,
    pub classical_oracle: String,
    pub linear_scenario_exactness: bool,
    /// Largest position gap over every dof and sample.
    pub max_gap: f64,
    pub divergence: DivergenceMetrics,
    pub deviation: Vec<TimedDeviation>,
    /// Taylor-series trajectory against the full inverse-square force.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taylor_truncation_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckResult>>,
    pub expectations_met: bool,
    pub passed: bool,
    pub outputs: Outputs,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub plots: bool,
}

pub fn config_hash(scenario: &Scenario) -> String {
    let bytes = serde_json::to_vec(scenario).expect("scenario serialises");
    hex::encode(Sha256::digest(bytes))
}

pub fn build_hamiltonian(s: &Scenario) -> Result<PolyHamiltonian, CliError> {
    let n = s.n_dofs()?;
    let ell = s.length_scale();
    let basis = make_basis(s.levels()?, n, s.hbar, &vec![s.mass; n], &vec![ell; n])?;
    let h = match &s.system {
        System::Potential {
            coefficients,
            expansion_point,
        } => build_potential_hamiltonian(&basis, coefficients, *expansion_point)?,
        System::GravityTaylor {
            g,
            central_mass,
            r0,
            order,
        } => build_gravity_taylor(&basis, *g, *central_mass, s.mass, *r0, *order)?,
        System::Em { fields } => build_em_hamiltonian(&basis, fields)?,
        System::Rotating {
            omega,
            centrifugal_factor,
        } => build_rotating_frame_with_factor(&basis, *omega, *centrifugal_factor)?,
        System::GenericHamiltonian { polynomial } => {
            PolyHamiltonian::generic(basis, Polynomial::from_text(polynomial)?)?
        }
    };
    Ok(h)
}

/// Initial state and its phase-space means `(q, p)`.
pub fn initial_state(s: &Scenario, h: &PolyHamiltonian) -> Result<(QuantumState, Vec<f64>, Vec<f64>), CliError> {
    let basis = h.basis();
    let n = basis.n_dofs();
    match &s.initial {
        InitialState::Coherent(amps) => {
            let alphas: Vec<c64> = amps.iter().map(|&a| a.into()).collect();
            let psi = product_coherent_state(basis, &alphas)?;
            let q = (0..n).map(|i| SQRT_2 * basis.length_scale(i) * alphas[i].re).collect();
            let p = (0..n)
                .map(|i| SQRT_2 * basis.hbar() / basis.length_scale(i) * alphas[i].im)
                .collect();
            Ok((psi, q, p))
        }
        InitialState::Fock(levels) => Ok((fock_state(basis, levels)?, vec![0.0; n], vec![0.0; n])),
    }
}

struct Classical {
    oracle: &'static str,
    series: TimeSeries,
    /// `(csv column, classical channel)` pairs beyond positions and momenta.
    extra: Vec<(String, String)>,
    truncation_gap: Option<f64>,
}

fn power_series_derivative(coefficients: &[f64], x0: f64) -> impl Fn(f64) -> f64 + '_ {
    move |x| {
        let d = x - x0;
        coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, c)| acc * d + k as f64 * c)
    }
}

fn classical(s: &Scenario, h: &PolyHamiltonian, q: &[f64], p: &[f64]) -> Result<Classical, CliError> {
    let cfg = IntegratorConfig::new(s.integrator.method, s.integrator.dt, s.time.t_final).with_samples(s.time.n_samples);
    let m = s.mass;
    let plain = |oracle, series| Classical {
        oracle,
        series,
        extra: vec![],
        truncation_gap: None,
    };
    Ok(match &s.system {
        System::Potential {
            coefficients,
            expansion_point,
        } => {
            let dv = power_series_derivative(coefficients, *expansion_point);
            plain("newton", integrate_newton(dv, m, q[0], p[0] / m, &cfg)?)
        }
        System::GravityTaylor {
            g,
            central_mass,
            r0,
            order,
        } => {
            let gmm = g * central_mass * m;
            // V′(q) = −GmM Σₙ n (−1)ⁿ qⁿ⁻¹ / r0ⁿ⁺¹
            let taylor = |x: f64| {
                -gmm * (1..=*order)
                    .map(|n| {
                        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                        n as f64 * sign * x.powi(n as i32 - 1) / r0.powi(n as i32 + 1)
                    })
                    .sum::<f64>()
            };
            let mut series = integrate_newton(taylor, m, q[0], p[0] / m, &cfg)?;
            let exact = integrate_newton(|x| gmm / (r0 + x).powi(2), m, q[0], p[0] / m, &cfg)?;
            let exact_q = exact.channel("q0").expect("newton channel").to_vec();
            let gap = series
                .channel("q0")
                .expect("newton channel")
                .iter()
                .zip(&exact_q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            series.push_channel("newtonian_q0", exact_q)?;
            Classical {
                oracle: "newton",
                series,
                extra: vec![("newtonian_q_0".into(), "newtonian_q0".into())],
                truncation_gap: Some(gap),
            }
        }
        System::Em { fields } => {
            let a = fields.vector_potential(2)?;
            let r = [q[0], q[1]];
            let v0 = [
                (p[0] - fields.charge * a[0].eval(&r, &[0.0; 2])) / m,
                (p[1] - fields.charge * a[1].eval(&r, &[0.0; 2])) / m,
                0.0,
            ];
            let mut series = integrate_lorentz(
                fields.charge,
                m,
                fields.electric,
                fields.magnetic,
                [q[0], q[1], 0.0],
                v0,
                &cfg,
            )?;
            // canonical momenta in the gauge of the Hamiltonian
            let mut canonical = vec![Vec::with_capacity(series.len()); 2];
            for k in 0..series.len() {
                let rk = [series.channel("q0").unwrap()[k], series.channel("q1").unwrap()[k]];
                for (i, col) in canonical.iter_mut().enumerate() {
                    let pi = series.channel(&format!("pi{i}")).unwrap()[k];
                    col.push(pi + fields.charge * a[i].eval(&rk, &[0.0; 2]));
                }
            }
            let mut out = TimeSeries::new(series.times().to_vec())?;
            for i in 0..2 {
                out.push_channel(format!("q{i}"), series.channel(&format!("q{i}")).unwrap().to_vec())?;
            }
            for (i, col) in canonical.into_iter().enumerate() {
                out.push_channel(format!("p{i}"), col)?;
            }
            for i in 0..2 {
                out.push_channel(format!("pi{i}"), series.channel(&format!("pi{i}")).unwrap().to_vec())?;
            }
            series = out;
            Classical {
                oracle: "lorentz",
                series,
                extra: vec![],
                truncation_gap: None,
            }
        }
        System::Rotating {
            omega,
            centrifugal_factor,
        } if *centrifugal_factor == 0.5 => {
            let v0 = [(p[0] + m * omega * q[1]) / m, (p[1] - m * omega * q[0]) / m];
            plain("rotating_frame", integrate_rotating(*omega, m, [q[0], q[1]], v0, &cfg)?)
        }
        System::Rotating { .. } | System::GenericHamiltonian { .. } => plain(
            "hamilton",
            integrate_hamilton(h, &ClassicalState::new(q.to_vec(), p.to_vec())?, &cfg)?,
        ),
    })
}

fn column<'a>(series: &'a TimeSeries, name: &str) -> Result<&'a [f64], CliError> {
    series.channel(name).ok_or_else(|| CliError::MissingChannel(name.to_string()))
}

/// Simulates both sides and assembles the CSV series and the report; the
/// report's `outputs` are left empty.
pub fn simulate(s: &Scenario) -> Result<(TimeSeries, RunReport), CliError> {
    s.validate()?;
    let h = build_hamiltonian(s)?;
    let basis = h.basis().clone();
    let n = basis.n_dofs();
    let is_em = matches!(s.system, System::Em { .. });
    let (psi0, q0, p0) = initial_state(s, &h)?;

    let prop = make_propagator(&h.evaluate()?)?;
    let mut ops = Vec::new();
    for i in 0..n {
        ops.push((format!("q_{i}"), position_operator(&basis, i)?, true));
        ops.push((format!("p_{i}"), momentum_operator(&basis, i)?, false));
        if is_em {
            ops.push((format!("pi_{i}"), kinetic_momentum_operator(&h, i)?, false));
        }
    }
    let observables: Vec<Observable> = ops
        .iter()
        .map(|(name, op, spread)| {
            if *spread {
                Observable::with_spread(name.clone(), op)
            } else {
                Observable::mean(name.clone(), op)
            }
        })
        .collect();
    let grid = linspace(0.0, s.time.t_final, s.time.n_samples);
    let quantum = sample_expectations(&prop, &psi0, &observables, &grid)?;
    let cl = classical(s, &h, &q0, &p0)?;

    let mut csv = TimeSeries::new(grid.clone())?;
    let mut add = |name: String, values: Vec<f64>| csv.push_channel(name, values);
    let kinds: &[&str] = if is_em { &["q", "p", "pi"] } else { &["q", "p"] };
    for k in kinds {
        for i in 0..n {
            add(format!("mean_{k}_{i}"), column(&quantum, &format!("{k}_{i}"))?.to_vec())?;
        }
    }
    for i in 0..n {
        add(format!("delta_q_{i}"), column(&quantum, &format!("delta_q_{i}"))?.to_vec())?;
    }
    for k in kinds {
        for i in 0..n {
            add(format!("classical_{k}_{i}"), column(&cl.series, &format!("{k}{i}"))?.to_vec())?;
        }
    }
    for (col, ch) in &cl.extra {
        add(col.clone(), column(&cl.series, ch)?.to_vec())?;
    }
    let gaps: Vec<Vec<f64>> = (0..n)
        .map(|i| -> Result<Vec<f64>, CliError> {
            let a = column(&csv, &format!("mean_q_{i}"))?;
            let b = column(&csv, &format!("classical_q_{i}"))?;
            Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect())
        })
        .collect::<Result<_, _>>()?;
    let max_gap = gaps.iter().flatten().cloned().fold(0.0, f64::max);
    for (i, g) in gaps.into_iter().enumerate() {
        csv.push_channel(format!("gap_{i}"), g)?;
    }

    let names: Vec<(String, String)> = kinds
        .iter()
        .flat_map(|k| (0..n).map(move |i| (format!("mean_{k}_{i}"), format!("classical_{k}_{i}"))))
        .collect();
    let pairs: Vec<(&str, &str)> = names.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let divergence = compare_trajectories(&csv, &csv, &pairs)?;

    let mut deviation = Vec::new();
    if matches!(s.system, System::Potential { .. } | System::GravityTaylor { .. }) {
        let stride = ((grid.len() - 1) / 10).max(1);
        for (k, &t) in grid.iter().enumerate() {
            if k % stride == 0 || k + 1 == grid.len() {
                let psi = schrodinger_evolve(&prop, &psi0, t)?;
                deviation.push(TimedDeviation {
                    t,
                    report: ehrenfest_check(&psi, &h)?,
                });
            }
        }
    }

    let checks = if s.checks {
        let cfg = VerifyConfig {
            interior_fraction: s.basis.interior_fraction,
            tolerance: s.check_tolerance,
            ..VerifyConfig::default()
        };
        Some(run_identity_checks(&hamilton_checks_for(&cfg, &s.name, &h)?)?)
    } else {
        None
    };

    let expectations_met = s.expect.max_gap_below.map_or(true, |b| max_gap < b)
        && s.expect.max_gap_above.map_or(true, |a| max_gap > a);
    let checks_ok = checks.as_ref().map_or(true, |c| c.iter().all(|r| r.passed));
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(s),
        scenario: s.clone(),
        n_dofs: n,
        n_levels: basis.n_levels(),
        length_scale: s.length_scale(),
        classical_oracle: cl.oracle.to_string(),
        linear_scenario_exactness: linear_scenario_exactness(&h),
        max_gap,
        divergence,
        deviation,
        taylor_truncation_gap: cl.truncation_gap,
        checks,
        expectations_met,
        passed: expectations_met && checks_ok,
        outputs: Outputs::default(),
    };
    Ok((csv, report))
}

pub fn csv_name(s: &Scenario) -> String {
    format!("{}.csv", s.name)
}

pub fn report_name(s: &Scenario) -> String {
    format!("{}.report.json", s.name)
}

/// Simulates, then writes the CSV, optional plots and the JSON report.
pub fn run(s: &Scenario, opts: &RunOptions) -> Result<(RunReport, PathBuf), CliError> {
    let (csv, mut report) = simulate(s)?;
    ensure_dir(&opts.out_dir)?;
    report.outputs.csv = csv_name(s);
    write_atomic(&opts.out_dir.join(&report.outputs.csv), csv.to_csv_string().as_bytes())?;
    if opts.plots {
        report.outputs.plots = crate::plot::emit_plots(&report, &csv, &opts.out_dir)?;
    }
    let path = opts.out_dir.join(report_name(s));
    write_report(&report, &path)?;
    Ok((report, path))
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(report).expect("report serialises");
    json.push('\n');
    write_atomic(path, json.as_bytes())
}
