//! Explicit Runge–Kutta integration of a [`Flow`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, Expr};
use crate::field::{Chart, Flow};

/// Abort once `‖x‖∞` exceeds this.
pub const BLOW_UP_NORM: f64 = 1e12;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(rename = "rk4-fixed", alias = "rk4")]
    Rk4,
    #[serde(rename = "rk45-adaptive", alias = "rk45")]
    Rk45,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4-fixed",
            Method::Rk45 => "rk45-adaptive",
        })
    }
}

impl FromStr for Method {
    type Err = IntegrateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" | "rk4-fixed" => Ok(Method::Rk4),
            "rk45" | "rk45-adaptive" => Ok(Method::Rk45),
            _ => Err(IntegrateError::InvalidConfig(format!("unknown method `{s}`"))),
        }
    }
}

/// `dt` is the fixed step for RK4 and the initial step for RK45.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_tol")]
    pub atol: f64,
    #[serde(default = "default_tol")]
    pub rtol: f64,
    pub t_max: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_steps() -> usize {
    10_000_000
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_max: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            dt,
            atol: default_tol(),
            rtol: default_tol(),
            t_max,
            max_steps: default_max_steps(),
        }
    }

    pub fn rk45(atol: f64, rtol: f64, t_max: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            dt: default_dt(),
            atol,
            rtol,
            t_max,
            max_steps: default_max_steps(),
        }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |m: &str| Err(IntegrateError::InvalidConfig(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.atol > 0.0 && self.rtol > 0.0) {
            return bad("atol and rtol must be positive");
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return bad("t_max must be finite and non-negative");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state has dimension {got}, field has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("exceeded {max_steps} steps at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },
    #[error("evaluation failed at step {step} (t = {t}): {source}")]
    Domain {
        step: usize,
        t: f64,
        #[source]
        source: EvalError,
    },
    #[error("solution blew up at step {step} (t = {t}, |x| = {norm:e})")]
    BlowUp { step: usize, t: f64, norm: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub label: String,
    pub method: Method,
    pub dt: f64,
    pub atol: f64,
    pub rtol: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub min_step: f64,
    pub max_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub meta: TrajectoryMeta,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Values of coordinate `i` along the trajectory.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("observation failed at step {step}: {source}")]
pub struct ObserveError {
    pub step: usize,
    #[source]
    pub source: EvalError,
}

/// `f` evaluated at every state.
pub fn observe(traj: &Trajectory, f: &Expr, chart: &Chart) -> Result<Vec<f64>, ObserveError> {
    let code = chart.compile(f).map_err(|source| ObserveError { step: 0, source })?;
    traj.states
        .iter()
        .enumerate()
        .map(|(step, x)| code.eval(x).map_err(|source| ObserveError { step, source }))
        .collect()
}

/// Composite Simpson rule on a uniform grid with an even number of intervals.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let m = values.len() - 1;
    assert!(m % 2 == 0, "Simpson needs an even number of intervals");
    let mut acc = values[0] + values[m];
    for (i, v) in values.iter().enumerate().take(m).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Running integral by the trapezoid rule with the end-point derivative
/// correction `−h²/12 (f'_{k+1} − f'_k)`, fourth-order on any grid.
pub fn cumulative_corrected_trapezoid(times: &[f64], f: &[f64], df: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(acc);
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        acc += 0.5 * h * (f[k] + f[k - 1]) - h * h / 12.0 * (df[k] - df[k - 1]);
        out.push(acc);
    }
    out
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

struct Stepper<'a, F: Flow + ?Sized> {
    flow: &'a F,
    evaluations: usize,
    step: usize,
}

impl<F: Flow + ?Sized> Stepper<'_, F> {
    fn eval(&mut self, t: f64, x: &[f64], out: &mut [f64]) -> Result<(), IntegrateError> {
        self.evaluations += 1;
        self.flow
            .velocity(x, out)
            .map_err(|source| IntegrateError::Domain { step: self.step, t, source })
    }
}

fn axpy(x: &[f64], h: f64, terms: &[(f64, &[f64])], out: &mut [f64]) {
    for i in 0..x.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = x[i] + h * acc;
    }
}

fn rk4_step<F: Flow + ?Sized>(st: &mut Stepper<F>, t: f64, x: &[f64], h: f64) -> Result<Vec<f64>, IntegrateError> {
    let n = x.len();
    let (mut k1, mut k2, mut k3, mut k4, mut y) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    st.eval(t, x, &mut k1)?;
    axpy(x, 0.5 * h, &[(1.0, &k1)], &mut y);
    st.eval(t + 0.5 * h, &y, &mut k2)?;
    axpy(x, 0.5 * h, &[(1.0, &k2)], &mut y);
    st.eval(t + 0.5 * h, &y, &mut k3)?;
    axpy(x, h, &[(1.0, &k3)], &mut y);
    st.eval(t + h, &y, &mut k4)?;
    axpy(x, h / 6.0, &[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)], &mut y);
    Ok(y)
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step: `(x_new, error estimate)`.
fn dopri_step<F: Flow + ?Sized>(st: &mut Stepper<F>, t: f64, x: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>), IntegrateError> {
    let n = x.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut y = vec![0.0; n];
    st.eval(t, x, &mut k[0])?;
    for stage in 1..7 {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, a) in A[stage - 1].iter().enumerate().take(stage) {
                acc += a * k[j][i];
            }
            y[i] = x[i] + h * acc;
        }
        let (_, rest) = k.split_at_mut(stage);
        st.eval(t + C[stage] * h, &y, &mut rest[0])?;
    }
    // stage 7 was evaluated at the 5th-order solution, which is `y`
    let mut err = vec![0.0; n];
    for (i, e) in err.iter_mut().enumerate() {
        *e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
    }
    Ok((y, err))
}

/// One classical RK4 step of length `h`: an approximation of the time-`h`
/// flow map.
pub fn flow_step<F: Flow + ?Sized>(flow: &F, x: &[f64], h: f64) -> Result<Vec<f64>, EvalError> {
    let mut st = Stepper {
        flow,
        evaluations: 0,
        step: 0,
    };
    rk4_step(&mut st, 0.0, x, h).map_err(|e| match e {
        IntegrateError::Domain { source, .. } => source,
        other => unreachable!("{other}"),
    })
}

pub fn integrate<F: Flow + ?Sized>(flow: &F, x0: &[f64], cfg: &IntegratorConfig, label: &str) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    if x0.len() != flow.dim() {
        return Err(IntegrateError::Dimension {
            expected: flow.dim(),
            got: x0.len(),
        });
    }
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.to_vec()],
        meta: TrajectoryMeta {
            label: label.to_string(),
            method: cfg.method,
            dt: cfg.dt,
            atol: cfg.atol,
            rtol: cfg.rtol,
            seed: None,
        },
        diagnostics: Diagnostics::default(),
    };
    if cfg.t_max == 0.0 {
        return Ok(traj);
    }
    let mut st = Stepper {
        flow,
        evaluations: 0,
        step: 0,
    };
    let result = match cfg.method {
        Method::Rk4 => run_rk4(&mut st, &mut traj, cfg),
        Method::Rk45 => run_rk45(&mut st, &mut traj, cfg),
    };
    traj.diagnostics.evaluations = st.evaluations;
    result.map(|_| traj)
}

fn push(traj: &mut Trajectory, step: usize, t: f64, h: f64, x: Vec<f64>) -> Result<(), IntegrateError> {
    let norm = inf_norm(&x);
    if !norm.is_finite() || norm > BLOW_UP_NORM {
        return Err(IntegrateError::BlowUp { step, t, norm });
    }
    let d = &mut traj.diagnostics;
    d.accepted += 1;
    d.min_step = if d.accepted == 1 { h } else { d.min_step.min(h) };
    d.max_step = d.max_step.max(h);
    traj.times.push(t);
    traj.states.push(x);
    Ok(())
}

fn run_rk4<F: Flow + ?Sized>(st: &mut Stepper<F>, traj: &mut Trajectory, cfg: &IntegratorConfig) -> Result<(), IntegrateError> {
    let steps = (cfg.t_max / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    if steps > cfg.max_steps {
        return Err(IntegrateError::MaxSteps {
            max_steps: cfg.max_steps,
            t: 0.0,
        });
    }
    let mut t = 0.0;
    for k in 1..=steps {
        st.step = k;
        let t_next = if k == steps { cfg.t_max } else { k as f64 * cfg.dt };
        let x = rk4_step(st, t, traj.last(), t_next - t)?;
        push(traj, k, t_next, t_next - t, x)?;
        t = t_next;
    }
    Ok(())
}

fn run_rk45<F: Flow + ?Sized>(st: &mut Stepper<F>, traj: &mut Trajectory, cfg: &IntegratorConfig) -> Result<(), IntegrateError> {
    let mut t = 0.0;
    let mut h = cfg.dt.min(cfg.t_max);
    let mut prev_err = 1e-4f64;
    let mut attempts = 0usize;
    while t < cfg.t_max {
        attempts += 1;
        if attempts > cfg.max_steps {
            return Err(IntegrateError::MaxSteps { max_steps: cfg.max_steps, t });
        }
        let last_step = t + h >= cfg.t_max;
        if last_step {
            h = cfg.t_max - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(IntegrateError::StepUnderflow { t, h });
        }
        st.step = traj.len();
        let x = traj.last().to_vec();
        let (y, e) = dopri_step(st, t, &x, h)?;
        let scale = cfg.atol + cfg.rtol * inf_norm(&x).max(inf_norm(&y));
        let err = e.iter().fold(0.0f64, |a, v| a.max(v.abs())) / scale;
        if !err.is_finite() {
            traj.diagnostics.rejected += 1;
            h *= MIN_FACTOR;
            continue;
        }
        if err <= 1.0 {
            let t_new = if last_step { cfg.t_max } else { t + h };
            push(traj, traj.len(), t_new, h, y)?;
            t = t_new;
            let err = err.max(1e-10);
            let factor = SAFETY * err.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0);
            h *= factor.clamp(MIN_FACTOR, MAX_FACTOR);
            prev_err = err;
        } else {
            traj.diagnostics.rejected += 1;
            h *= (SAFETY * err.powf(-1.0 / 5.0)).clamp(MIN_FACTOR, 1.0);
        }
    }
    Ok(())
}

/// Integrates several initial states on separate threads; output order
/// follows `x0s`.
pub fn integrate_many<F: Flow + ?Sized>(flow: &F, x0s: &[Vec<f64>], cfg: &IntegratorConfig, label: &str) -> Vec<Result<Trajectory, IntegrateError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = x0s.iter().map(|x0| scope.spawn(move || integrate(flow, x0, cfg, label))).collect();
        handles.into_iter().map(|h| h.join().expect("integration thread panicked")).collect()
    })
}
