//! Region-of-attraction grid scans for two-oscillator systems.
//!
//! Each grid cell is an initial phase pair `(θ₁, θ₂)` taken at the cell
//! center, with initial frequencies derived from the phases by
//! [`init_frequencies`]. A scan evaluates the certificate for every
//! `(D₀, ε)` combination and, optionally, simulates the cell to see whether
//! it actually synchronizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certificate::{Certifier, EpsChoice};
use crate::dynamics::{simulate_sync, SyncOutcome};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::model::{norm, State, SwingSystem};

/// `ω_i(0) = (Ω_i + Σ_j a_ij sin(θ_j(0) − θ_i(0))) / d_i`, i.e. the state
/// starts with zero acceleration apart from the inertial term.
pub fn init_frequencies(s: &SwingSystem, theta0: &[f64]) -> State {
    let g = s.graph();
    let omega = (0..s.n())
        .map(|i| {
            let pull: f64 = g
                .row(i)
                .iter()
                .zip(theta0)
                .map(|(a, tj)| a * (tj - theta0[i]).sin())
                .sum();
            (s.power()[i] + pull) / s.damping()[i]
        })
        .collect();
    State::new(theta0.to_vec(), omega)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EpsPolicy {
    Auto,
    Explicit(Vec<f64>),
    /// Positions in `(0, 1)` inside each admissible interval.
    Relative(Vec<f64>),
}

impl EpsPolicy {
    pub fn choices(&self) -> Vec<EpsChoice> {
        match self {
            EpsPolicy::Auto => vec![EpsChoice::Auto],
            EpsPolicy::Explicit(v) => v.iter().map(|&e| EpsChoice::Value(e)).collect(),
            EpsPolicy::Relative(v) => v.iter().map(|&f| EpsChoice::Relative(f)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimParams {
    pub dt: f64,
    pub horizon: f64,
    pub tol: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 200.0,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSpec {
    pub theta_range: [(f64, f64); 2],
    pub resolution: usize,
    pub d0_list: Vec<f64>,
    pub eps_policy: EpsPolicy,
    /// Seed of the parameter draw, carried into output metadata.
    pub seed: Option<u64>,
    pub sim: SimParams,
    /// Worker cap; `None` uses the global rayon pool.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            theta_range: [(0.0, std::f64::consts::PI); 2],
            resolution: 100,
            d0_list: vec![std::f64::consts::FRAC_PI_4],
            eps_policy: EpsPolicy::Auto,
            seed: None,
            sim: SimParams::default(),
            threads: None,
        }
    }
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::invalid("resolution", "must be >= 2"));
        }
        for (lo, hi) in self.theta_range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(
                    "theta_range",
                    format!("({lo}, {hi}) is not an interval"),
                ));
            }
        }
        for &d0 in &self.d0_list {
            if !(d0 > 0.0 && d0 < std::f64::consts::PI) {
                return Err(Error::D0OutOfRange(d0));
            }
        }
        Ok(())
    }

    /// Cell-center coordinates along one axis.
    pub fn axis(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.theta_range[k];
        let h = (hi - lo) / self.resolution as f64;
        (0..self.resolution)
            .map(|i| lo + (i as f64 + 0.5) * h)
            .collect()
    }

    fn run_parallel<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            Some(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map(|pool| pool.install(job))
                .map_err(|e| Error::Unsupported(format!("thread pool: {e}"))),
            None => Ok(job()),
        }
    }
}

/// One `(D₀, ε)` certificate configuration of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertCombo {
    /// CSV column name.
    pub label: String,
    pub d0: f64,
    pub eps_policy: String,
    pub eps: Option<f64>,
    pub eps_lo: Option<f64>,
    pub eps_hi: Option<f64>,
    pub h2_pass: bool,
    /// H2 holds and `ε` is inside its interval.
    pub admissible: bool,
    pub forcing_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub theta: [f64; 2],
    /// One verdict per combo, same order as [`RoaMap::combos`].
    pub certified: Vec<bool>,
    pub sim: Option<SyncOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoaMap {
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub combos: Vec<CertCombo>,
    /// Row-major: index `i1 * resolution + i2`.
    pub cells: Vec<CellRecord>,
}

impl RoaMap {
    pub fn resolution(&self) -> usize {
        self.axis1.len()
    }

    pub fn cell(&self, i1: usize, i2: usize) -> &CellRecord {
        &self.cells[i1 * self.resolution() + i2]
    }

    pub fn certified_count(&self, combo: usize) -> usize {
        self.cells.iter().filter(|c| c.certified[combo]).count()
    }

    pub fn simulated_count(&self) -> Option<usize> {
        self.cells
            .iter()
            .map(|c| c.sim.map(|s| s.synced as usize))
            .sum()
    }

    /// Cells certified under some combo that failed to synchronize.
    pub fn soundness_violations(&self) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.certified.iter().any(|&b| b) && c.sim.is_some_and(|s| !s.synced))
            .map(|(k, _)| k)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Cert,
    Sim,
    Both,
}

fn combo_label(d0: f64, choice: &EpsChoice) -> String {
    format!("cert_{d0:.6}_{}", choice.label())
}

fn build_certifiers(s: &SwingSystem, spec: &ScanSpec) -> Result<Vec<Certifier>> {
    let mut out = Vec::new();
    for &d0 in &spec.d0_list {
        for choice in spec.eps_policy.choices() {
            out.push(Certifier::new(s, d0, choice)?);
        }
    }
    Ok(out)
}

fn describe(c: &Certifier) -> CertCombo {
    CertCombo {
        label: combo_label(c.d0(), &c.policy()),
        d0: c.d0(),
        eps_policy: c.policy().label(),
        eps: c.eps(),
        eps_lo: c.interval().map(|i| i.0),
        eps_hi: c.interval().map(|i| i.1),
        h2_pass: c.h2_pass(),
        admissible: c.admissible(),
        forcing_threshold: c.forcing_threshold(),
    }
}

pub fn scan(s: &SwingSystem, spec: &ScanSpec, mode: ScanMode) -> Result<RoaMap> {
    spec.validate()?;
    if s.n() != 2 {
        return Err(Error::Unsupported(format!(
            "grid scans need exactly 2 oscillators, got {}",
            s.n()
        )));
    }
    let certifiers = if mode == ScanMode::Sim {
        Vec::new()
    } else {
        build_certifiers(s, spec)?
    };
    let simulate = mode != ScanMode::Cert;
    let sim = spec.sim;
    if simulate {
        // surface bad dt/horizon once instead of per cell
        simulate_sync(s, &State::zeros(2), sim.dt, sim.dt, sim.tol)?;
    }
    let axis1 = spec.axis(0);
    let axis2 = spec.axis(1);
    let res = spec.resolution;
    let cells = spec.run_parallel(|| {
        (0..res * res)
            .into_par_iter()
            .map(|k| {
                let theta = [axis1[k / res], axis2[k % res]];
                let x0 = init_frequencies(s, &theta);
                let certified = certifiers.iter().map(|c| c.passes(&x0)).collect();
                let sim = simulate.then(|| {
                    simulate_sync(s, &x0, sim.dt, sim.horizon, sim.tol).unwrap_or(SyncOutcome {
                        synced: false,
                        t_sync: None,
                        max_diameter: f64::NAN,
                        final_spread: f64::NAN,
                        blowup: true,
                    })
                });
                CellRecord {
                    theta,
                    certified,
                    sim,
                }
            })
            .collect::<Vec<_>>()
    })?;
    Ok(RoaMap {
        axis1,
        axis2,
        combos: certifiers.iter().map(describe).collect(),
        cells,
    })
}

pub fn scan_certified(s: &SwingSystem, spec: &ScanSpec) -> Result<RoaMap> {
    scan(s, spec, ScanMode::Cert)
}

pub fn scan_simulated(s: &SwingSystem, spec: &ScanSpec) -> Result<RoaMap> {
    scan(s, spec, ScanMode::Sim)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComboStats {
    pub label: String,
    pub d0: f64,
    pub eps: Option<f64>,
    pub admissible: bool,
    pub certified: usize,
    /// `certified / simulated-synced`.
    pub conservativeness: Option<f64>,
}

/// A pair of combos whose certified sets are not nested the expected way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestingViolation {
    /// `"eps"` (smaller ε should contain larger) or `"d0"` (larger D₀
    /// should contain smaller).
    pub axis: String,
    pub inner: String,
    pub outer: String,
    /// Cells certified by `inner` but not by `outer`.
    pub cells: usize,
    /// Whether both combos use the same ε value.
    pub same_eps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionStats {
    pub cells: usize,
    pub simulated_synced: Option<usize>,
    pub combos: Vec<ComboStats>,
    pub nesting_violations: Vec<NestingViolation>,
    pub soundness_violations: usize,
}

fn not_contained(map: &RoaMap, inner: usize, outer: usize) -> usize {
    map.cells
        .iter()
        .filter(|c| c.certified[inner] && !c.certified[outer])
        .count()
}

pub fn region_stats(map: &RoaMap) -> RegionStats {
    let simulated = map.simulated_count();
    let combos = map
        .combos
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let certified = map.certified_count(k);
            ComboStats {
                label: c.label.clone(),
                d0: c.d0,
                eps: c.eps,
                admissible: c.admissible,
                certified,
                conservativeness: simulated
                    .filter(|&n| n > 0)
                    .map(|n| certified as f64 / n as f64),
            }
        })
        .collect();

    let mut nesting_violations = Vec::new();
    let admissible: Vec<usize> = (0..map.combos.len())
        .filter(|&k| map.combos[k].admissible)
        .collect();

    // ε direction: same D₀, sorted by ε
    let mut by_d0: Vec<Vec<usize>> = Vec::new();
    for &k in &admissible {
        match by_d0
            .iter_mut()
            .find(|g| map.combos[g[0]].d0 == map.combos[k].d0)
        {
            Some(g) => g.push(k),
            None => by_d0.push(vec![k]),
        }
    }
    for group in &mut by_d0 {
        group.sort_by(|&a, &b| map.combos[a].eps.partial_cmp(&map.combos[b].eps).unwrap());
        for w in group.windows(2) {
            let cells = not_contained(map, w[1], w[0]);
            if cells > 0 {
                nesting_violations.push(NestingViolation {
                    axis: "eps".into(),
                    inner: map.combos[w[1]].label.clone(),
                    outer: map.combos[w[0]].label.clone(),
                    cells,
                    same_eps: false,
                });
            }
        }
    }

    // D₀ direction: same ε policy, sorted by D₀
    let mut by_policy: Vec<Vec<usize>> = Vec::new();
    for &k in &admissible {
        match by_policy
            .iter_mut()
            .find(|g| map.combos[g[0]].eps_policy == map.combos[k].eps_policy)
        {
            Some(g) => g.push(k),
            None => by_policy.push(vec![k]),
        }
    }
    for group in &mut by_policy {
        group.sort_by(|&a, &b| map.combos[a].d0.partial_cmp(&map.combos[b].d0).unwrap());
        for w in group.windows(2) {
            let cells = not_contained(map, w[0], w[1]);
            if cells > 0 {
                nesting_violations.push(NestingViolation {
                    axis: "d0".into(),
                    inner: map.combos[w[0]].label.clone(),
                    outer: map.combos[w[1]].label.clone(),
                    cells,
                    same_eps: map.combos[w[0]].eps == map.combos[w[1]].eps,
                });
            }
        }
    }

    RegionStats {
        cells: map.cells.len(),
        simulated_synced: simulated,
        combos,
        nesting_violations,
        soundness_violations: map.soundness_violations().len(),
    }
}

/// Distribution of seeded random instances: uniform inertia and damping,
/// uniform coupling on the complete graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomSpec {
    pub n: usize,
    pub m_range: (f64, f64),
    pub d_range: (f64, f64),
    pub coupling_value: f64,
}

impl Default for RandomSpec {
    /// Two oscillators, `m ∈ (0.10, 0.15)`, `d ∈ (0.30, 0.40)`, `a₁₂ = 0.2`.
    fn default() -> Self {
        Self {
            n: 2,
            m_range: (0.10, 0.15),
            d_range: (0.30, 0.40),
            coupling_value: 0.2,
        }
    }
}

/// Fraction of the tightest forcing threshold used for the drawn `Ω`.
pub const FORCING_MARGIN: f64 = 0.5;

/// A drawn instance and the norm its zero-sum forcing was scaled to.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub system: SwingSystem,
    pub omega_norm: f64,
}

impl RandomSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("random.n", "need at least 2 oscillators"));
        }
        for (name, (lo, hi)) in [
            ("random.m_range", self.m_range),
            ("random.d_range", self.d_range),
        ] {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("({lo}, {hi}) must satisfy 0 < lo < hi"),
                ));
            }
        }
        if !(self.coupling_value > 0.0 && self.coupling_value.is_finite()) {
            return Err(Error::invalid(
                "random.coupling_value",
                "must be finite and > 0",
            ));
        }
        Ok(())
    }

    /// Draws `m`, `d` and a unit-norm zero-sum direction for `Ω`, in that
    /// order, from one ChaCha8 stream.
    pub fn draw(&self, seed: u64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut uniform = |(lo, hi): (f64, f64), k: usize| -> Vec<f64> {
            (0..k).map(|_| rng.random_range(lo..hi)).collect()
        };
        let m = uniform(self.m_range, self.n);
        let d = uniform(self.d_range, self.n);
        let mut dir = uniform((-1.0, 1.0), self.n);
        let mean = dir.iter().sum::<f64>() / self.n as f64;
        dir.iter_mut().for_each(|v| *v -= mean);
        let len = norm(&dir);
        if len > 0.0 {
            dir.iter_mut().for_each(|v| *v /= len);
        }
        Ok((m, d, dir))
    }

    /// Seeded instance whose forcing is scaled to [`FORCING_MARGIN`] times the
    /// smallest H3 forcing threshold over `combos`; zero forcing when no combo
    /// is admissible.
    pub fn instance(&self, seed: u64, combos: &[(f64, EpsChoice)]) -> Result<RandomInstance> {
        let (m, d, dir) = self.draw(seed)?;
        let graph = WeightedGraph::complete(self.n, self.coupling_value)?;
        let unforced = SwingSystem::new(m, d, vec![0.0; self.n], graph)?;
        let mut threshold = f64::INFINITY;
        for &(d0, eps) in combos {
            if let Some(t) = Certifier::new(&unforced, d0, eps)?.forcing_threshold() {
                threshold = threshold.min(t);
            }
        }
        let omega_norm = if threshold.is_finite() {
            FORCING_MARGIN * threshold
        } else {
            0.0
        };
        let system = unforced.with_power(dir.iter().map(|v| v * omega_norm).collect())?;
        Ok(RandomInstance { system, omega_norm })
    }
}
