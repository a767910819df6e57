//! Swing-equation systems `m_i θ̈_i + d_i θ̇_i = Ω_i + Σ_j a_ij sin(θ_j − θ_i)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Oscillator parameters plus the coupling graph. Phases are unwrapped
/// reals, never reduced modulo 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct SwingSystem {
    inertia: Vec<f64>,
    damping: Vec<f64>,
    power: Vec<f64>,
    graph: WeightedGraph,
}

/// Extremal and fluctuation summaries of the parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSummary {
    pub a_u: f64,
    pub a_l: f64,
    pub d_u: f64,
    pub d_l: f64,
    pub m_u: f64,
    pub m_l: f64,
    /// `sqrt(tr D̂²)/sqrt(n) + 2 sqrt(tr M̂²)/sqrt(n)`.
    pub lambda: f64,
    pub d_hat: Vec<f64>,
    pub m_hat: Vec<f64>,
}

/// Phases and frequencies at one instant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct State {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSums {
    /// Plain mean of the phases.
    pub theta_c: f64,
    /// `Σ d_i θ_i`.
    pub theta_s: f64,
    /// `Σ m_i ω_i`.
    pub omega_s: f64,
    /// Plain mean of the frequencies.
    pub omega_c: f64,
}

fn check_vector(field: &str, v: &[f64], n: usize, positive: bool) -> Result<()> {
    if v.len() != n {
        return Err(Error::invalid(
            field,
            format!("has {} entries, expected {n}", v.len()),
        ));
    }
    for (i, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::invalid(field, format!("entry {i} is not finite")));
        }
        if positive && x <= 0.0 {
            return Err(Error::invalid(
                field,
                format!("entry {i} = {x} must be > 0"),
            ));
        }
    }
    Ok(())
}

impl SwingSystem {
    pub fn new(
        inertia: Vec<f64>,
        damping: Vec<f64>,
        power: Vec<f64>,
        graph: WeightedGraph,
    ) -> Result<Self> {
        let n = graph.n();
        check_vector("m", &inertia, n, true)?;
        check_vector("d", &damping, n, true)?;
        check_vector("omega", &power, n, false)?;
        Ok(Self {
            inertia,
            damping,
            power,
            graph,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn inertia(&self) -> &[f64] {
        &self.inertia
    }

    pub fn damping(&self) -> &[f64] {
        &self.damping
    }

    /// Natural frequencies (power injections) `Ω`.
    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn with_power(&self, power: Vec<f64>) -> Result<Self> {
        Self::new(
            self.inertia.clone(),
            self.damping.clone(),
            power,
            self.graph.clone(),
        )
    }

    pub fn param_summary(&self) -> Result<ParamSummary> {
        let edges = self.graph.edges();
        if edges.is_empty() {
            return Err(Error::NoEdges);
        }
        let (a_l, a_u) = min_max(edges.iter().map(|e| e.2));
        let (d_l, d_u) = min_max(self.damping.iter().copied());
        let (m_l, m_u) = min_max(self.inertia.iter().copied());
        let d_hat = fluctuation(&self.damping);
        let m_hat = fluctuation(&self.inertia);
        let sqrt_n = (self.n() as f64).sqrt();
        let lambda = norm(&d_hat) / sqrt_n + 2.0 * norm(&m_hat) / sqrt_n;
        Ok(ParamSummary {
            a_u,
            a_l,
            d_u,
            d_l,
            m_u,
            m_l,
            lambda,
            d_hat,
            m_hat,
        })
    }

    /// Collective drift `Ω_c = ΣΩ_i / Σd_i`.
    pub fn drift(&self) -> f64 {
        self.power.iter().sum::<f64>() / self.damping.iter().sum::<f64>()
    }

    /// Returns the zero-sum micro system `Ω̂_i = Ω_i − d_i Ω_c` and `Ω_c`.
    pub fn macro_micro(&self) -> (SwingSystem, f64) {
        let omega_c = self.drift();
        let power = self
            .power
            .iter()
            .zip(&self.damping)
            .map(|(p, d)| p - d * omega_c)
            .collect();
        let micro = SwingSystem {
            power,
            ..self.clone()
        };
        (micro, omega_c)
    }

    pub fn weighted_sums(&self, x: &State) -> WeightedSums {
        let n = self.n() as f64;
        WeightedSums {
            theta_c: x.theta.iter().sum::<f64>() / n,
            theta_s: dot(&self.damping, &x.theta),
            omega_s: dot(&self.inertia, &x.omega),
            omega_c: x.omega.iter().sum::<f64>() / n,
        }
    }

    pub fn check_state(&self, x: &State) -> Result<()> {
        check_vector("theta", &x.theta, self.n(), false)?;
        check_vector("omega", &x.omega, self.n(), false)
    }
}

impl State {
    pub fn new(theta: Vec<f64>, omega: Vec<f64>) -> Self {
        Self { theta, omega }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n], vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(&self.omega).all(|x| x.is_finite())
    }

    pub fn theta_mean(&self) -> f64 {
        self.theta.iter().sum::<f64>() / self.n() as f64
    }

    /// `max_{i,j} |θ_i − θ_j|`.
    pub fn phase_diameter(&self) -> f64 {
        let (lo, hi) = min_max(self.theta.iter().copied());
        hi - lo
    }

    /// `max_{i,j} |ω_i − ω_j|`.
    pub fn frequency_spread(&self) -> f64 {
        let (lo, hi) = min_max(self.omega.iter().copied());
        hi - lo
    }
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    })
}

fn fluctuation(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
