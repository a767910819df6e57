//! Fixed-step classical RK4 for the first-order form
//!
//! ```text
//! θ̇_i = ω_i
//! ω̇_i = (−d_i ω_i + Ω_i + Σ_j a_ij sin(θ_j − θ_i)) / m_i
//! ```
//!
//! together with the trajectory monitors (phase diameter, frequency spread,
//! Ẽ, D, the weighted sum θ_s + ω_s, the a-priori frequency bound) and
//! frequency-synchronization detection.

use serde::Serialize;

use crate::certificate::Certifier;
use crate::energy::{dissipation, energy_tilde};
use crate::error::{Error, Result};
use crate::model::{State, SwingSystem};

/// Spread level below which the decay-rate fit stops (log of values near
/// machine zero is noise).
pub const RATE_FLOOR: f64 = 1e-12;

/// Writes the vector field at `(theta, omega)` into `dtheta`, `domega`.
pub fn rhs_into(
    s: &SwingSystem,
    theta: &[f64],
    omega: &[f64],
    dtheta: &mut [f64],
    domega: &mut [f64],
) {
    dtheta.copy_from_slice(omega);
    domega.copy_from_slice(s.power());
    for &(i, j, a) in s.graph().edges() {
        let f = a * (theta[j] - theta[i]).sin();
        domega[i] += f;
        domega[j] -= f;
    }
    for i in 0..theta.len() {
        domega[i] = (domega[i] - s.damping()[i] * omega[i]) / s.inertia()[i];
    }
}

pub fn rhs(s: &SwingSystem, x: &State) -> (Vec<f64>, Vec<f64>) {
    let n = s.n();
    let mut dtheta = vec![0.0; n];
    let mut domega = vec![0.0; n];
    rhs_into(s, &x.theta, &x.omega, &mut dtheta, &mut domega);
    (dtheta, domega)
}

/// Per-oscillator a-priori bound `|ω_i(0)| + (|Ω_i| + Σ_j a_ij) / d_i`.
pub fn freq_bound(s: &SwingSystem, x0: &State) -> Vec<f64> {
    (0..s.n())
        .map(|i| {
            let pull: f64 = s.graph().row(i).iter().sum();
            x0.omega[i].abs() + (s.power()[i].abs() + pull) / s.damping()[i]
        })
        .collect()
}

/// Reusable RK4 scratch space.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k: [Vec<f64>; 8],
    theta: Vec<f64>,
    omega: Vec<f64>,
}

impl Rk4 {
    pub fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            theta: vec![0.0; n],
            omega: vec![0.0; n],
        }
    }

    /// Advances `x` by one step of size `dt`.
    pub fn step(&mut self, s: &SwingSystem, x: &mut State, dt: f64) {
        let n = x.n();
        let [k1t, k1w, k2t, k2w, k3t, k3w, k4t, k4w] = &mut self.k;
        rhs_into(s, &x.theta, &x.omega, k1t, k1w);
        for i in 0..n {
            self.theta[i] = x.theta[i] + 0.5 * dt * k1t[i];
            self.omega[i] = x.omega[i] + 0.5 * dt * k1w[i];
        }
        rhs_into(s, &self.theta, &self.omega, k2t, k2w);
        for i in 0..n {
            self.theta[i] = x.theta[i] + 0.5 * dt * k2t[i];
            self.omega[i] = x.omega[i] + 0.5 * dt * k2w[i];
        }
        rhs_into(s, &self.theta, &self.omega, k3t, k3w);
        for i in 0..n {
            self.theta[i] = x.theta[i] + dt * k3t[i];
            self.omega[i] = x.omega[i] + dt * k3w[i];
        }
        rhs_into(s, &self.theta, &self.omega, k4t, k4w);
        let h6 = dt / 6.0;
        for i in 0..n {
            x.theta[i] += h6 * (k1t[i] + 2.0 * k2t[i] + 2.0 * k3t[i] + k4t[i]);
            x.omega[i] += h6 * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i]);
        }
    }
}

fn step_count(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("{dt} must be finite and > 0")));
    }
    if !(horizon.is_finite() && horizon >= dt) {
        return Err(Error::invalid(
            "horizon",
            format!("{horizon} must be >= dt"),
        ));
    }
    Ok((horizon / dt).round() as usize)
}

/// Steps `x0` forward `steps` times, calling `observe(k, t, state)` after
/// every step (and once for the initial state with `k = 0`). Returns the
/// final state.
pub fn run<F>(s: &SwingSystem, x0: &State, dt: f64, steps: usize, mut observe: F) -> Result<State>
where
    F: FnMut(usize, f64, &State),
{
    s.check_state(x0)?;
    let mut x = x0.clone();
    let mut rk = Rk4::new(s.n());
    observe(0, 0.0, &x);
    for k in 1..=steps {
        rk.step(s, &mut x, dt);
        let t = k as f64 * dt;
        if !x.is_finite() {
            return Err(Error::BlowUp { t });
        }
        observe(k, t, &x);
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Keep every k-th step in the recorded trajectory.
    pub record_every: usize,
    /// `ε` used for the Ẽ monitor channel.
    pub eps: f64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 200.0,
            record_every: 100,
            eps: 1.0,
        }
    }
}

/// Monitor channels at one recorded instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorSample {
    pub diameter: f64,
    pub spread: f64,
    pub etilde: f64,
    pub dissipation: f64,
    /// `θ_s + ω_s`.
    pub conserved: f64,
}

/// Extremes of the monitors over every step, not only recorded ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorSummary {
    pub max_diameter: f64,
    /// `max_t |(θ_s + ω_s)(t) − (θ_s + ω_s)(0)|`.
    pub max_conservation_drift: f64,
    /// `max_{t,i} (|ω_i(t)| − B_i)`; nonpositive when the bound holds.
    pub max_freq_bound_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub monitors: Vec<MonitorSample>,
    /// `max_{i,j} |ω_i − ω_j|` at every step, index `k` is time `k·dt`.
    pub spread: Vec<f64>,
    pub freq_bound: Vec<f64>,
    pub summary: MonitorSummary,
}

impl Trajectory {
    pub fn horizon(&self) -> f64 {
        (self.spread.len() - 1) as f64 * self.dt
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }
}

pub fn integrate(s: &SwingSystem, x0: &State, cfg: &IntegrationConfig) -> Result<Trajectory> {
    let steps = step_count(cfg.dt, cfg.horizon)?;
    let stride = cfg.record_every.max(1);
    let bound = freq_bound(s, x0);
    let conserved_at = |x: &State| {
        let w = s.weighted_sums(x);
        w.theta_s + w.omega_s
    };
    let c0 = conserved_at(x0);

    let mut times = Vec::with_capacity(steps / stride + 2);
    let mut states = Vec::with_capacity(steps / stride + 2);
    let mut monitors = Vec::with_capacity(steps / stride + 2);
    let mut spread = Vec::with_capacity(steps + 1);
    let mut summary = MonitorSummary {
        max_diameter: 0.0,
        max_conservation_drift: 0.0,
        max_freq_bound_excess: f64::NEG_INFINITY,
    };

    run(s, x0, cfg.dt, steps, |k, t, x| {
        let diameter = x.phase_diameter();
        let sp = x.frequency_spread();
        let conserved = conserved_at(x);
        spread.push(sp);
        summary.max_diameter = summary.max_diameter.max(diameter);
        summary.max_conservation_drift = summary.max_conservation_drift.max((conserved - c0).abs());
        for (w, b) in x.omega.iter().zip(&bound) {
            summary.max_freq_bound_excess = summary.max_freq_bound_excess.max(w.abs() - b);
        }
        if k % stride == 0 || k == steps {
            times.push(t);
            states.push(x.clone());
            monitors.push(MonitorSample {
                diameter,
                spread: sp,
                etilde: energy_tilde(s, x, cfg.eps),
                dissipation: dissipation(x),
                conserved,
            });
        }
    })?;

    Ok(Trajectory {
        dt: cfg.dt,
        times,
        states,
        monitors,
        spread,
        freq_bound: bound,
        summary,
    })
}

/// Least-squares line through `(x, y)`; returns `(slope, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some((slope, r2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncReport {
    pub synced: bool,
    pub tol: f64,
    pub horizon: f64,
    /// First time after which the spread stays below `tol` up to the horizon.
    pub t_sync: Option<f64>,
    /// Slope of the least-squares fit of `log spread` over the decay window.
    pub rate: Option<f64>,
    pub r_squared: Option<f64>,
    /// Same fit restricted to local maxima of the spread (the envelope of an
    /// oscillatory decay).
    pub envelope_rate: Option<f64>,
    pub envelope_r_squared: Option<f64>,
    /// Fit window `[start, end]`.
    pub fit_window: Option<(f64, f64)>,
    pub final_spread: f64,
    /// `θ_i − θ_j` at the horizon.
    pub final_phase_gaps: Vec<Vec<f64>>,
}

/// Detects sustained frequency synchronization below `tol`.
pub fn detect_sync(tr: &Trajectory, tol: f64) -> SyncReport {
    let spread = &tr.spread;
    let last = spread.len() - 1;
    let dt = tr.dt;
    let t_sync_step = match spread.iter().rposition(|&v| v >= tol || v.is_nan()) {
        None => Some(0),
        Some(k) if k < last => Some(k + 1),
        Some(_) => None,
    };
    let theta = &tr.final_state().theta;
    let final_phase_gaps = theta
        .iter()
        .map(|a| theta.iter().map(|b| a - b).collect())
        .collect();
    let mut report = SyncReport {
        synced: t_sync_step.is_some(),
        tol,
        horizon: tr.horizon(),
        t_sync: t_sync_step.map(|k| k as f64 * dt),
        rate: None,
        r_squared: None,
        envelope_rate: None,
        envelope_r_squared: None,
        fit_window: None,
        final_spread: spread[last],
        final_phase_gaps,
    };
    let Some(k_sync) = t_sync_step else {
        return report;
    };
    let start = k_sync / 2;
    let end = (start..=last)
        .find(|&k| spread[k] < RATE_FLOOR)
        .unwrap_or(last);
    let (ts, logs): (Vec<f64>, Vec<f64>) = (start..=end)
        .filter(|&k| spread[k] > 0.0)
        .map(|k| (k as f64 * dt, spread[k].ln()))
        .unzip();
    if let Some((slope, r2)) = linear_fit(&ts, &logs) {
        report.rate = Some(slope);
        report.r_squared = Some(r2);
        report.fit_window = Some((start as f64 * dt, end as f64 * dt));
    }
    let (pt, pl): (Vec<f64>, Vec<f64>) = (start.max(1)..end)
        .filter(|&k| spread[k] > 0.0 && spread[k] >= spread[k - 1] && spread[k] > spread[k + 1])
        .map(|k| (k as f64 * dt, spread[k].ln()))
        .unzip();
    if let Some((slope, r2)) = linear_fit(&pt, &pl) {
        report.envelope_rate = Some(slope);
        report.envelope_r_squared = Some(r2);
    }
    report
}

/// Lightweight outcome of a simulation used by grid scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyncOutcome {
    pub synced: bool,
    pub t_sync: Option<f64>,
    pub max_diameter: f64,
    pub final_spread: f64,
    pub blowup: bool,
}

/// Integrates without storing the trajectory and reports synchronization.
pub fn simulate_sync(
    s: &SwingSystem,
    x0: &State,
    dt: f64,
    horizon: f64,
    tol: f64,
) -> Result<SyncOutcome> {
    let steps = step_count(dt, horizon)?;
    let mut last_above: Option<usize> = None;
    let mut max_diameter: f64 = 0.0;
    let mut final_spread = 0.0;
    let outcome = run(s, x0, dt, steps, |k, _, x| {
        let sp = x.frequency_spread();
        if sp >= tol || sp.is_nan() {
            last_above = Some(k);
        }
        max_diameter = max_diameter.max(x.phase_diameter());
        final_spread = sp;
    });
    match outcome {
        Ok(_) => {
            let t_sync = match last_above {
                None => Some(0.0),
                Some(k) if k < steps => Some((k + 1) as f64 * dt),
                Some(_) => None,
            };
            Ok(SyncOutcome {
                synced: t_sync.is_some(),
                t_sync,
                max_diameter,
                final_spread,
                blowup: false,
            })
        }
        Err(Error::BlowUp { .. }) => Ok(SyncOutcome {
            synced: false,
            t_sync: None,
            max_diameter,
            final_spread: f64::NAN,
            blowup: true,
        }),
        Err(e) => Err(e),
    }
}

/// Result of checking the energy differential inequality along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyInequalityCheck {
    /// `max_t [(Ẽ(t+dt) − Ẽ(t))/dt + C̃ℓ D(t) − K √Ẽ(t)]` over steps with
    /// phase diameter ≤ D₀.
    pub max_excess: f64,
    pub steps_checked: usize,
    pub max_diameter: f64,
    /// True if the phase diameter ever reached D₀.
    pub diameter_tripped: bool,
}

/// Monitors `dẼ/dt + C̃ℓ D ≤ K √Ẽ`, `K = 2√2 max{ε,1} ‖Ω̂‖ / √C₀`, with a
/// forward-difference derivative, on the micro system of `cert`.
pub fn check_energy_inequality(
    cert: &Certifier,
    x0: &State,
    dt: f64,
    horizon: f64,
) -> Result<Option<EnergyInequalityCheck>> {
    let (Some(eps), Some(k), Some(forcing)) =
        (cert.eps(), cert.constants(), cert.forcing_coefficient())
    else {
        return Ok(None);
    };
    let steps = step_count(dt, horizon)?;
    let s = cert.micro_system();
    let x0 = cert.micro_state(x0);
    let d0 = cert.d0();
    let mut out = EnergyInequalityCheck {
        max_excess: f64::NEG_INFINITY,
        steps_checked: 0,
        max_diameter: 0.0,
        diameter_tripped: false,
    };
    let mut prev: Option<(f64, f64, bool)> = None;
    run(s, &x0, dt, steps, |_, _, x| {
        let e = energy_tilde(s, x, eps);
        let diameter = x.phase_diameter();
        out.max_diameter = out.max_diameter.max(diameter);
        if diameter >= d0 {
            out.diameter_tripped = true;
        }
        if let Some((e_prev, d_prev, inside)) = prev {
            if inside {
                let lhs = (e - e_prev) / dt + k.c_ell_tilde * d_prev;
                let rhs = forcing * e_prev.max(0.0).sqrt();
                out.max_excess = out.max_excess.max(lhs - rhs);
                out.steps_checked += 1;
            }
        }
        prev = Some((e, dissipation(x), diameter <= d0));
    })?;
    Ok(Some(out))
}
