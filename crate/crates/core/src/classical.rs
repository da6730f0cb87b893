//! Classical reference trajectories.
//!
//! Every integrator samples onto `linspace(0, t_final, n_samples)`. Between
//! samples it takes equal substeps no longer than `dt`, so the quantum and
//! classical series share one grid without interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hamiltonians::PolyHamiltonian;
use crate::poly::{Polynomial, Var};
use crate::series::{linspace, TimeSeries};

pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    VelocityVerlet,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::VelocityVerlet => "velocity_verlet",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_final: f64,
    /// Output samples including both endpoints; `None` records every step.
    #[serde(default)]
    pub n_samples: Option<usize>,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

impl IntegratorConfig {
    pub fn new(method: Method, dt: f64, t_final: f64) -> Self {
        Self {
            method,
            dt,
            t_final,
            n_samples: None,
        }
    }

    pub fn rk4(dt: f64, t_final: f64) -> Self {
        Self::new(Method::Rk4, dt, t_final)
    }

    pub fn with_samples(mut self, n_samples: usize) -> Self {
        self.n_samples = Some(n_samples);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(invalid("t_final", format!("must be positive, got {}", self.t_final)));
        }
        if self.dt > self.t_final {
            return Err(invalid("dt", "must not exceed t_final"));
        }
        if let Some(n) = self.n_samples {
            if n < 2 {
                return Err(invalid("n_samples", "need at least 2 samples"));
            }
        }
        Ok(())
    }

    /// Output grid.
    pub fn grid(&self) -> Vec<f64> {
        let n = self
            .n_samples
            .unwrap_or_else(|| (self.t_final / self.dt - 1e-9).ceil() as usize + 1);
        linspace(0.0, self.t_final, n)
    }

    fn require_rk4(&self, reason: &str) -> Result<()> {
        match self.method {
            Method::Rk4 => Ok(()),
            m => Err(Error::UnsupportedIntegrator {
                method: m.name(),
                reason: reason.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl ClassicalState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(invalid("state", "q and p need the same length"));
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(invalid("state", "entries must be finite"));
        }
        Ok(Self { q, p, t: 0.0 })
    }
}

fn rk4_step<F: Fn(&[f64], &mut [f64])>(f: &F, y: &mut [f64], h: f64) {
    let n = y.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    f(y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(&tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(&tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(&tmp, &mut k4);
    for i in 0..n {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Steps `y` across the grid and records `observe(y)` at every sample.
fn drive<S, O>(cfg: &IntegratorConfig, mut y: Vec<f64>, mut step: S, names: &[String], observe: O) -> Result<TimeSeries>
where
    S: FnMut(&mut [f64], f64),
    O: Fn(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    let grid = cfg.grid();
    let mut columns = vec![Vec::with_capacity(grid.len()); names.len()];
    let record = |y: &[f64], columns: &mut Vec<Vec<f64>>| {
        for (c, v) in columns.iter_mut().zip(observe(y)) {
            c.push(v);
        }
    };
    record(&y, &mut columns);
    for w in grid.windows(2) {
        let span = w[1] - w[0];
        let n_sub = ((span / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
        let h = span / n_sub as f64;
        for k in 0..n_sub {
            step(&mut y, h);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    t: w[0] + h * (k + 1) as f64,
                });
            }
        }
        record(&y, &mut columns);
    }
    let mut series = TimeSeries::new(grid)?;
    for (name, c) in names.iter().zip(columns) {
        series.push_channel(name.clone(), c)?;
    }
    Ok(series)
}

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}{i}"))
}

/// `m ẍ = −V′(x)`; channels `q0`, `p0`.
pub fn integrate_newton<F: Fn(f64) -> f64>(
    potential_derivative: F,
    mass: f64,
    x0: f64,
    v0: f64,
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid("mass", format!("must be positive, got {mass}")));
    }
    let labels = vec!["q0".to_string(), "p0".to_string()];
    let observe = |y: &[f64]| vec![y[0], mass * y[1]];
    match cfg.method {
        Method::Rk4 => {
            let f = |y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -potential_derivative(y[0]) / mass;
            };
            drive(cfg, vec![x0, v0], |y, h| rk4_step(&f, y, h), &labels, observe)
        }
        Method::VelocityVerlet => {
            let accel = |x: f64| -potential_derivative(x) / mass;
            drive(
                cfg,
                vec![x0, v0],
                |y, h| {
                    let a0 = accel(y[0]);
                    y[0] += h * y[1] + 0.5 * h * h * a0;
                    y[1] += 0.5 * h * (a0 + accel(y[0]));
                },
                &labels,
                observe,
            )
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `m v̇ = q (E + v × B)`.
///
/// Channels: positions `q0..q2`, canonical momenta `p0..p2` in the symmetric
/// gauge `A = ½ B × r`, and kinetic momenta `pi0..pi2 = m v`.
pub fn integrate_lorentz(
    charge: f64,
    mass: f64,
    e: [f64; 3],
    b: [f64; 3],
    r0: [f64; 3],
    v0: [f64; 3],
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    cfg.require_rk4("the Lorentz force depends on velocity")?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid("mass", format!("must be positive, got {mass}")));
    }
    let f = |y: &[f64], dy: &mut [f64]| {
        let v = [y[3], y[4], y[5]];
        let vxb = cross(v, b);
        for i in 0..3 {
            dy[i] = v[i];
            dy[3 + i] = charge / mass * (e[i] + vxb[i]);
        }
    };
    let labels: Vec<String> = names("q", 3).chain(names("p", 3)).chain(names("pi", 3)).collect();
    let observe = |y: &[f64]| {
        let r = [y[0], y[1], y[2]];
        let bxr = cross(b, r);
        let mut out = r.to_vec();
        out.extend((0..3).map(|i| mass * y[3 + i] + 0.5 * charge * bxr[i]));
        out.extend((0..3).map(|i| mass * y[3 + i]));
        out
    };
    let y0 = r0.iter().chain(&v0).copied().collect();
    drive(cfg, y0, |y, h| rk4_step(&f, y, h), &labels, observe)
}

/// `r̈ = −2 ω × ṙ − ω × (ω × r)` with `ω` along `z`, in the plane.
///
/// Channels: `q0, q1`, velocities `v0, v1`, and the canonical momenta
/// `p0 = m v0 − mω q1`, `p1 = m v1 + mω q0`.
pub fn integrate_rotating(
    omega: f64,
    mass: f64,
    r0: [f64; 2],
    v0: [f64; 2],
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    cfg.require_rk4("the Coriolis force depends on velocity")?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(invalid("mass", format!("must be positive, got {mass}")));
    }
    let w2 = omega * omega;
    let f = |y: &[f64], dy: &mut [f64]| {
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = 2.0 * omega * y[3] + w2 * y[0];
        dy[3] = -2.0 * omega * y[2] + w2 * y[1];
    };
    let labels: Vec<String> = names("q", 2).chain(names("v", 2)).chain(names("p", 2)).collect();
    let observe = |y: &[f64]| {
        vec![
            y[0],
            y[1],
            y[2],
            y[3],
            mass * y[2] - mass * omega * y[1],
            mass * y[3] + mass * omega * y[0],
        ]
    };
    drive(cfg, vec![r0[0], r0[1], v0[0], v0[1]], |y, h| rk4_step(&f, y, h), &labels, observe)
}

fn is_separable(field_q: &[Polynomial], field_p: &[Polynomial]) -> bool {
    let n = field_q.len();
    (0..n).all(|i| {
        (0..n).all(|j| !field_q[i].depends_on(j, Var::Q) && !field_p[i].depends_on(j, Var::P))
    })
}

/// `q̇ⱼ = ∂H/∂pⱼ`, `ṗⱼ = −∂H/∂qⱼ` from the formal derivatives of `H`;
/// channels `q0.., p0..`.
///
/// Velocity Verlet (leapfrog) is accepted only when `H` separates into
/// `T(p) + V(q)`.
pub fn integrate_hamilton(h: &PolyHamiltonian, state0: &ClassicalState, cfg: &IntegratorConfig) -> Result<TimeSeries> {
    let n = h.n_dofs();
    if state0.q.len() != n || state0.p.len() != n {
        return Err(invalid("state0", format!("expected {n} coordinates")));
    }
    let (field_q, field_p) = h.hamilton_field();
    let labels: Vec<String> = names("q", n).chain(names("p", n)).collect();
    let observe = |y: &[f64]| y.to_vec();
    let y0: Vec<f64> = state0.q.iter().chain(&state0.p).copied().collect();
    match cfg.method {
        Method::Rk4 => {
            let f = |y: &[f64], dy: &mut [f64]| {
                let (q, p) = y.split_at(n);
                for j in 0..n {
                    dy[j] = field_q[j].eval(q, p);
                    dy[n + j] = field_p[j].eval(q, p);
                }
            };
            drive(cfg, y0, |y, dt| rk4_step(&f, y, dt), &labels, observe)
        }
        Method::VelocityVerlet => {
            if !is_separable(&field_q, &field_p) {
                return Err(Error::UnsupportedIntegrator {
                    method: Method::VelocityVerlet.name(),
                    reason: "leapfrog needs a Hamiltonian of the form T(p) + V(q)".into(),
                });
            }
            let zeros = vec![0.0; n];
            drive(
                cfg,
                y0,
                |y, dt| {
                    let (q, p) = y.split_at_mut(n);
                    for j in 0..n {
                        p[j] += 0.5 * dt * field_p[j].eval(q, &zeros);
                    }
                    for j in 0..n {
                        q[j] += dt * field_q[j].eval(&zeros, p);
                    }
                    for j in 0..n {
                        p[j] += 0.5 * dt * field_p[j].eval(q, &zeros);
                    }
                },
                &labels,
                observe,
            )
        }
    }
}

/// `H(q(t), p(t))` along a series with `q*`/`p*` channels.
pub fn energy_along(h: &PolyHamiltonian, series: &TimeSeries) -> Result<Vec<f64>> {
    let n = h.n_dofs();
    let get = |name: String| {
        series
            .channel(&name)
            .ok_or_else(|| Error::InvalidGrid(format!("missing channel {name}")))
    };
    let qs: Vec<&[f64]> = names("q", n).map(get).collect::<Result<_>>()?;
    let ps: Vec<&[f64]> = names("p", n).map(get).collect::<Result<_>>()?;
    Ok((0..series.len())
        .map(|k| {
            let q: Vec<f64> = qs.iter().map(|c| c[k]).collect();
            let p: Vec<f64> = ps.iter().map(|c| c[k]).collect();
            h.poly().eval(&q, &p)
        })
        .collect())
}
