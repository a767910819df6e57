//! Sufficient conditions for convergence to a phase-locked state.
//!
//! Three hypotheses are evaluated in order:
//!
//! * **H1** the coupling graph is connected (gives `L* > 0`);
//! * **H2** the parametric inequality
//!   `a_u² n² (2 m_u + λ) < d_l² (2 R₀ a_l L* n − λ)` with `R₀ = sin D₀ / D₀`,
//!   which is equivalent to a nonempty admissible interval for `ε`;
//! * **H3** for the chosen `ε`,
//!   `max{√Ẽ(0), 2√2 C₁ max{ε,1} ‖Ω̂‖ / (C̃ℓ √C₀)} < (√C₀ / 2) D₀`.
//!
//! All inequalities are strict and evaluated without slack; the report
//! carries signed margins instead. The system is always reduced to its
//! zero-sum micro form first, so `‖Ω̂‖` is the norm of the micro
//! frequencies and initial frequencies are shifted by the drift `Ω_c`.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::energy::energy_tilde;
use crate::error::{Error, Result};
use crate::model::{norm, ParamSummary, State, SwingSystem};

/// Relative offset of the automatic `ε` inside its admissible interval.
pub const AUTO_EPS_OFFSET: f64 = 0.01;

/// How `ε` is picked for H3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsChoice {
    /// `lo + 0.01 (hi − lo)`.
    Auto,
    /// A fixed value, which must fall inside the admissible interval.
    Value(f64),
    /// `lo + f (hi − lo)` for `f` in `(0, 1)`.
    Relative(f64),
}

impl EpsChoice {
    pub fn label(&self) -> String {
        match self {
            EpsChoice::Auto => "auto".to_string(),
            EpsChoice::Value(v) => format!("{v}"),
            EpsChoice::Relative(f) => format!("rel{f}"),
        }
    }

    fn resolve(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            EpsChoice::Auto => lo + AUTO_EPS_OFFSET * (hi - lo),
            EpsChoice::Value(v) => v,
            EpsChoice::Relative(f) => lo + f * (hi - lo),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct H2Check {
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub c0: f64,
    pub c1: f64,
    pub c_ell: f64,
    pub c_ell_tilde: f64,
}

/// `R₀ = sin D₀ / D₀`.
pub fn sinc_ratio(d0: f64) -> f64 {
    d0.sin() / d0
}

fn check_d0(d0: f64) -> Result<()> {
    if d0.is_finite() && d0 > 0.0 && d0 < PI {
        Ok(())
    } else {
        Err(Error::D0OutOfRange(d0))
    }
}

pub fn check_h2(p: &ParamSummary, l_star: f64, n: usize, d0: f64) -> Result<H2Check> {
    check_d0(d0)?;
    let n = n as f64;
    let r0 = sinc_ratio(d0);
    let lhs = p.a_u * p.a_u * n * n * (2.0 * p.m_u + p.lambda);
    let rhs = p.d_l * p.d_l * (2.0 * r0 * p.a_l * l_star * n - p.lambda);
    Ok(H2Check {
        pass: lhs < rhs,
        lhs,
        rhs,
    })
}

/// Raw interval endpoints; `None` when `2 R₀ a_l L* n − λ ≤ 0`, where the
/// lower end has no meaning.
fn raw_interval(p: &ParamSummary, l_star: f64, n: usize, d0: f64) -> Option<(f64, f64)> {
    let n = n as f64;
    let gain = 2.0 * sinc_ratio(d0) * p.a_l * l_star * n - p.lambda;
    (gain > 0.0).then(|| {
        (
            p.a_u * p.a_u * n * n / (p.d_l * gain),
            p.d_l / (2.0 * p.m_u + p.lambda),
        )
    })
}

/// Admissible open interval `(lo, hi)` for `ε`.
pub fn epsilon_interval(p: &ParamSummary, l_star: f64, n: usize, d0: f64) -> Result<(f64, f64)> {
    if !check_h2(p, l_star, n, d0)?.pass {
        return Err(Error::EmptyEpsilonInterval);
    }
    raw_interval(p, l_star, n, d0).ok_or(Error::EmptyEpsilonInterval)
}

pub fn constants(p: &ParamSummary, l_star: f64, n: usize, d0: f64, eps: f64) -> Result<Constants> {
    let (lo, hi) = epsilon_interval(p, l_star, n, d0)?;
    if !(eps > lo && eps < hi) {
        return Err(Error::EpsilonOutOfInterval { eps, lo, hi });
    }
    let nf = n as f64;
    let r0 = sinc_ratio(d0);
    let c0 = (p.m_l / 2.0).min(eps * p.d_l * (1.0 - 2.0 * eps * p.m_u / p.d_l));
    let c1 = (1.5 * p.m_u).max(eps * p.d_u * (1.0 + 2.0 * eps * p.m_u / p.d_l));
    let c_ell = (p.d_l - 2.0 * eps * p.m_u)
        .min(2.0 * eps * r0 * p.a_l * l_star * nf - p.a_u * p.a_u * nf * nf / p.d_l);
    Ok(Constants {
        c0,
        c1,
        c_ell,
        c_ell_tilde: c_ell - eps * p.lambda,
    })
}

/// `Ẽ(0)` with `θ_c` the plain phase mean.
pub fn initial_energy(s: &SwingSystem, x0: &State, eps: f64) -> f64 {
    energy_tilde(s, x0, eps)
}

/// Full verdict for one initial state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub d0: f64,
    pub r0: f64,
    pub lambda: Option<f64>,
    pub l_star: Option<f64>,
    /// Drift removed by the micro reduction.
    pub omega_c: f64,
    /// `‖Ω̂‖`.
    pub omega_norm: f64,
    pub h1_pass: bool,
    pub h2_pass: bool,
    pub h3_pass: bool,
    pub h2_lhs: Option<f64>,
    pub h2_rhs: Option<f64>,
    pub eps_lo: Option<f64>,
    pub eps_hi: Option<f64>,
    pub eps_policy: String,
    pub eps: Option<f64>,
    pub c0: Option<f64>,
    pub c1: Option<f64>,
    pub c_ell: Option<f64>,
    pub c_ell_tilde: Option<f64>,
    pub e_tilde_0: Option<f64>,
    /// `√Ẽ(0)`.
    pub energy_term: Option<f64>,
    /// `2√2 C₁ max{ε,1} ‖Ω̂‖ / (C̃ℓ √C₀)`.
    pub forcing_term: Option<f64>,
    pub lhs_h3: Option<f64>,
    /// `(√C₀ / 2) D₀`.
    pub rhs_h3: Option<f64>,
    pub margin: Option<f64>,
    pub note: Option<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.h1_pass && self.h2_pass && self.h3_pass
    }
}

/// State-independent part of the certificate for a fixed `(system, D₀, ε)`.
///
/// Building one of these once and calling [`Certifier::check`] per state is
/// how grid scans evaluate many initial conditions cheaply.
#[derive(Debug, Clone)]
pub struct Certifier {
    micro: SwingSystem,
    omega_c: f64,
    omega_norm: f64,
    d0: f64,
    policy: EpsChoice,
    summary: Option<ParamSummary>,
    l_star: Option<f64>,
    h2: Option<H2Check>,
    interval: Option<(f64, f64)>,
    eps: Option<f64>,
    constants: Option<Constants>,
    forcing_term: Option<f64>,
    note: Option<String>,
}

impl Certifier {
    pub fn new(s: &SwingSystem, d0: f64, policy: EpsChoice) -> Result<Self> {
        check_d0(d0)?;
        if let EpsChoice::Relative(f) = policy {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::invalid(
                    "eps",
                    format!("relative position {f} not in (0, 1)"),
                ));
            }
        }
        if let EpsChoice::Value(v) = policy {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("eps", format!("{v} must be finite and > 0")));
            }
        }
        let (micro, omega_c) = s.macro_micro();
        let omega_norm = norm(micro.power());
        let mut c = Certifier {
            micro,
            omega_c,
            omega_norm,
            d0,
            policy,
            summary: None,
            l_star: None,
            h2: None,
            interval: None,
            eps: None,
            constants: None,
            forcing_term: None,
            note: None,
        };
        c.l_star = s.graph().l_star().ok();
        let Some(l_star) = c.l_star else {
            c.note = Some("H1 failed: graph not connected".into());
            return Ok(c);
        };
        let p = match s.param_summary() {
            Ok(p) => p,
            Err(_) => {
                // n = 1: connected but edgeless, nothing to certify
                c.note = Some("no edges".into());
                return Ok(c);
            }
        };
        let n = s.n();
        let h2 = check_h2(&p, l_star, n, d0)?;
        c.h2 = Some(h2);
        c.interval = raw_interval(&p, l_star, n, d0);
        if !h2.pass {
            c.note = Some("H2 failed: empty epsilon interval".into());
            c.summary = Some(p);
            return Ok(c);
        }
        let (lo, hi) = c.interval.expect("H2 implies a positive gain");
        let eps = policy.resolve(lo, hi);
        c.eps = Some(eps);
        match constants(&p, l_star, n, d0, eps) {
            Ok(k) => {
                c.forcing_term = Some(
                    2.0 * SQRT_2 * k.c1 * eps.max(1.0) * omega_norm / (k.c_ell_tilde * k.c0.sqrt()),
                );
                c.constants = Some(k);
            }
            Err(e) => c.note = Some(format!("H3 not evaluated: {e}")),
        }
        c.summary = Some(p);
        Ok(c)
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn policy(&self) -> EpsChoice {
        self.policy
    }

    pub fn h1_pass(&self) -> bool {
        self.l_star.is_some()
    }

    pub fn h2_pass(&self) -> bool {
        self.h2.is_some_and(|h| h.pass)
    }

    pub fn eps(&self) -> Option<f64> {
        self.eps
    }

    pub fn interval(&self) -> Option<(f64, f64)> {
        self.interval
    }

    pub fn constants(&self) -> Option<Constants> {
        self.constants
    }

    /// True when H3 can pass for at least some initial state.
    pub fn admissible(&self) -> bool {
        self.constants.is_some()
    }

    pub fn micro_system(&self) -> &SwingSystem {
        &self.micro
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    /// `2√2 max{ε,1} ‖Ω̂‖ / √C₀`, the forcing coefficient of the energy
    /// differential inequality.
    pub fn forcing_coefficient(&self) -> Option<f64> {
        let eps = self.eps?;
        let k = self.constants?;
        Some(2.0 * SQRT_2 * eps.max(1.0) * self.omega_norm / k.c0.sqrt())
    }

    /// `(√C₀ / 2) D₀`.
    pub fn bound(&self) -> Option<f64> {
        self.constants.map(|k| 0.5 * k.c0.sqrt() * self.d0)
    }

    /// Largest `‖Ω̂‖` for which the forcing term of H3 stays below the bound.
    pub fn forcing_threshold(&self) -> Option<f64> {
        let eps = self.eps?;
        let k = self.constants?;
        Some(self.bound()? * k.c_ell_tilde * k.c0.sqrt() / (2.0 * SQRT_2 * k.c1 * eps.max(1.0)))
    }

    /// Micro-frame initial state: frequencies shifted by `−Ω_c`.
    pub fn micro_state(&self, x0: &State) -> State {
        State::new(
            x0.theta.clone(),
            x0.omega.iter().map(|w| w - self.omega_c).collect(),
        )
    }

    /// Fast path used by scans: H1–H3 verdict only.
    pub fn passes(&self, x0: &State) -> bool {
        let (Some(eps), Some(bound), Some(forcing)) = (self.eps, self.bound(), self.forcing_term)
        else {
            return false;
        };
        let e0 = energy_tilde(&self.micro, &self.micro_state(x0), eps);
        e0 >= 0.0 && e0.sqrt().max(forcing) < bound
    }

    pub fn check(&self, x0: &State) -> CertificateReport {
        let r0 = sinc_ratio(self.d0);
        let mut report = CertificateReport {
            d0: self.d0,
            r0,
            lambda: self.summary.as_ref().map(|p| p.lambda),
            l_star: self.l_star,
            omega_c: self.omega_c,
            omega_norm: self.omega_norm,
            h1_pass: self.h1_pass(),
            h2_pass: self.h2_pass(),
            h3_pass: false,
            h2_lhs: self.h2.map(|h| h.lhs),
            h2_rhs: self.h2.map(|h| h.rhs),
            eps_lo: self.interval.map(|i| i.0),
            eps_hi: self.interval.map(|i| i.1),
            eps_policy: self.policy.label(),
            eps: self.eps,
            c0: self.constants.map(|k| k.c0),
            c1: self.constants.map(|k| k.c1),
            c_ell: self.constants.map(|k| k.c_ell),
            c_ell_tilde: self.constants.map(|k| k.c_ell_tilde),
            e_tilde_0: None,
            energy_term: None,
            forcing_term: self.forcing_term,
            lhs_h3: None,
            rhs_h3: self.bound(),
            margin: None,
            note: self.note.clone(),
        };
        let (Some(eps), Some(bound), Some(forcing)) = (self.eps, self.bound(), self.forcing_term)
        else {
            return report;
        };
        let e0 = energy_tilde(&self.micro, &self.micro_state(x0), eps);
        report.e_tilde_0 = Some(e0);
        if e0 < 0.0 {
            report.note = Some("negative initial energy".into());
            return report;
        }
        let energy_term = e0.sqrt();
        let lhs = energy_term.max(forcing);
        report.energy_term = Some(energy_term);
        report.lhs_h3 = Some(lhs);
        report.margin = Some(bound - lhs);
        report.h3_pass = lhs < bound;
        report
    }
}

/// Evaluates H1–H3 for `x0`. Hypothesis failures are verdicts, not errors;
/// only malformed input (D₀ outside `(0, π)`, bad ε, wrong state length)
/// is an error.
pub fn certify(s: &SwingSystem, x0: &State, d0: f64, eps: EpsChoice) -> Result<CertificateReport> {
    s.check_state(x0)?;
    Ok(Certifier::new(s, d0, eps)?.check(x0))
}
