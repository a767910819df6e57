//! System-file ingestion and CSV/JSON emission.
//!
//! A system file is JSON:
//!
//! ```json
//! {"n": 2, "m": [0.12, 0.13], "d": [0.33, 0.37], "omega": [1e-5, -1e-5],
//!  "coupling": [[0, 0.2], [0.2, 0]]}
//! ```
//!
//! With an optional `"random"` block (plus `"seed"`), any of `m`, `d`,
//! `omega`, `coupling` that are absent are drawn instead; see [`RandomBlock`].
//!
//! Floating-point values in CSV output use 17 significant digits.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::certificate::EpsChoice;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::model::SwingSystem;
use crate::roa::{RandomSpec, RoaMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBlock {
    pub m_range: [f64; 2],
    pub d_range: [f64; 2],
    pub coupling_value: f64,
    /// Norm of the drawn zero-sum `Ω`. When absent, `Ω` is scaled to half
    /// the H3 forcing threshold at `D₀ = π/4` with automatic `ε`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_norm: Option<f64>,
}

impl RandomBlock {
    pub fn standard() -> Self {
        let spec = RandomSpec::default();
        Self {
            m_range: [spec.m_range.0, spec.m_range.1],
            d_range: [spec.d_range.0, spec.d_range.1],
            coupling_value: spec.coupling_value,
            omega_norm: None,
        }
    }

    pub fn spec(&self, n: usize) -> RandomSpec {
        RandomSpec {
            n,
            m_range: (self.m_range[0], self.m_range[1]),
            d_range: (self.d_range[0], self.d_range[1]),
            coupling_value: self.coupling_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomBlock>,
}

/// Combination used to scale drawn forcing when none is given.
pub const DEFAULT_FORCING_COMBO: (f64, EpsChoice) = (FRAC_PI_4, EpsChoice::Auto);

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid("system file", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system file serializes")
    }

    pub fn from_system(s: &SwingSystem) -> Self {
        Self {
            n: s.n(),
            m: Some(s.inertia().to_vec()),
            d: Some(s.damping().to_vec()),
            omega: Some(s.power().to_vec()),
            coupling: Some(s.graph().rows()),
            seed: None,
            random: None,
        }
    }

    /// Seeded random instance written out with every field explicit.
    pub fn generate(n: usize, seed: u64, random: RandomBlock) -> Result<Self> {
        let file = SystemFile {
            n,
            m: None,
            d: None,
            omega: None,
            coupling: None,
            seed: Some(seed),
            random: Some(random),
        };
        let system = file.to_system()?;
        Ok(SystemFile {
            seed: Some(seed),
            random: file.random.map(|mut r| {
                r.omega_norm = Some(crate::model::norm(system.power()));
                r
            }),
            ..Self::from_system(&system)
        })
    }

    /// Validates the file and builds the system, drawing absent fields when a
    /// `random` block is present.
    pub fn to_system(&self) -> Result<SwingSystem> {
        let n = self.n;
        if n == 0 {
            return Err(Error::invalid("n", "must be >= 1"));
        }
        let required = |name: &str| Error::invalid(name, "missing (and no \"random\" block)");
        let Some(random) = &self.random else {
            let m = self.m.clone().ok_or_else(|| required("m"))?;
            let d = self.d.clone().ok_or_else(|| required("d"))?;
            let omega = self.omega.clone().ok_or_else(|| required("omega"))?;
            let coupling = self.coupling.as_ref().ok_or_else(|| required("coupling"))?;
            return build(n, m, d, omega, coupling);
        };
        let spec = random.spec(n);
        let seed = self.seed.unwrap_or(0);
        let (m_draw, d_draw, dir) = spec.draw(seed)?;
        let m = self.m.clone().unwrap_or(m_draw);
        let d = self.d.clone().unwrap_or(d_draw);
        let coupling = match &self.coupling {
            Some(c) => c.clone(),
            None => WeightedGraph::complete(n, random.coupling_value)?.rows(),
        };
        let omega = match (&self.omega, random.omega_norm) {
            (Some(o), _) => o.clone(),
            (None, Some(norm)) => dir.iter().map(|v| v * norm).collect(),
            (None, None) => {
                let unforced = build(n, m.clone(), d.clone(), vec![0.0; n], &coupling)?;
                let (d0, eps) = DEFAULT_FORCING_COMBO;
                let threshold = crate::certificate::Certifier::new(&unforced, d0, eps)?
                    .forcing_threshold()
                    .unwrap_or(0.0);
                let norm = crate::roa::FORCING_MARGIN * threshold;
                dir.iter().map(|v| v * norm).collect()
            }
        };
        build(n, m, d, omega, &coupling)
    }
}

fn build(
    n: usize,
    m: Vec<f64>,
    d: Vec<f64>,
    omega: Vec<f64>,
    coupling: &[Vec<f64>],
) -> Result<SwingSystem> {
    if coupling.len() != n {
        return Err(Error::invalid(
            "coupling",
            format!("has {} rows, expected n = {n}", coupling.len()),
        ));
    }
    let graph = WeightedGraph::from_rows(coupling)?;
    SwingSystem::new(m, d, omega, graph)
}

pub fn parse_system(text: &str) -> Result<SwingSystem> {
    SystemFile::parse(text)?.to_system()
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_header(n: usize) -> String {
    let mut h = String::from("t");
    for i in 1..=n {
        write!(h, ",theta_{i}").unwrap();
    }
    for i in 1..=n {
        write!(h, ",omega_{i}").unwrap();
    }
    h.push_str(",diam,spread,etilde,diss,conserved");
    h
}

pub fn trajectory_csv(tr: &Trajectory) -> String {
    let n = tr.states.first().map_or(0, |s| s.n());
    let mut out = trajectory_header(n);
    out.push('\n');
    for ((t, x), m) in tr.times.iter().zip(&tr.states).zip(&tr.monitors) {
        out.push_str(&fmt_num(*t));
        for v in x.theta.iter().chain(&x.omega) {
            out.push(',');
            out.push_str(&fmt_num(*v));
        }
        for v in [m.diameter, m.spread, m.etilde, m.dissipation, m.conserved] {
            out.push(',');
            out.push_str(&fmt_num(v));
        }
        out.push('\n');
    }
    out
}

/// One row per cell: `theta1,theta2,<cert columns>,sim_sync,t_sync`.
///
/// Certificate columns hold `1`/`0`. In a certificate-only map the
/// simulation columns are empty; `t_sync` is empty for cells that never
/// synchronized and `blowup` for cells whose integration diverged.
pub fn roa_csv(map: &RoaMap) -> String {
    let mut out = String::from("theta1,theta2");
    for c in &map.combos {
        out.push(',');
        out.push_str(&c.label);
    }
    out.push_str(",sim_sync,t_sync\n");
    for cell in &map.cells {
        out.push_str(&fmt_num(cell.theta[0]));
        out.push(',');
        out.push_str(&fmt_num(cell.theta[1]));
        for &b in &cell.certified {
            out.push_str(if b { ",1" } else { ",0" });
        }
        match cell.sim {
            None => out.push_str(",,"),
            Some(s) => {
                out.push_str(if s.synced { ",1," } else { ",0," });
                if s.blowup {
                    out.push_str("blowup");
                } else if let Some(t) = s.t_sync {
                    out.push_str(&fmt_num(t));
                }
            }
        }
        out.push('\n');
    }
    out
}
