//! Potential, energy functionals and dissipation rate.
//!
//! With `θ_c` the plain phase mean:
//!
//! ```text
//! f(θ)   = Σ_k Ω_k θ_k + ½ Σ_{k,l} a_kl cos(θ_k − θ_l)
//! E[θ,ω] = ε Σ d_i θ_i² + 2ε Σ m_i θ_i ω_i + Σ m_i ω_i²
//! Ẽ[θ,ω] = E[θ − θ_c, ω]
//! D[θ,ω] = ‖ω‖² + ‖θ − θ_c‖²
//! ```

use crate::model::{State, SwingSystem};

pub fn potential(s: &SwingSystem, theta: &[f64]) -> f64 {
    let g = s.graph();
    let n = s.n();
    let mut linear = 0.0;
    let mut coupling = 0.0;
    for k in 0..n {
        linear += s.power()[k] * theta[k];
        for l in 0..n {
            coupling += g.weight(k, l) * (theta[k] - theta[l]).cos();
        }
    }
    linear + 0.5 * coupling
}

/// `∂f/∂θ_i = Ω_i + Σ_j a_ij sin(θ_j − θ_i)`.
pub fn grad_potential(s: &SwingSystem, theta: &[f64]) -> Vec<f64> {
    let g = s.graph();
    (0..s.n())
        .map(|i| {
            let row = g.row(i);
            let pull: f64 = row
                .iter()
                .zip(theta)
                .map(|(a, tj)| a * (tj - theta[i]).sin())
                .sum();
            s.power()[i] + pull
        })
        .collect()
}

fn quadratic_form(s: &SwingSystem, x: &State, eps: f64, shift: f64) -> f64 {
    let mut position = 0.0;
    let mut cross = 0.0;
    let mut kinetic = 0.0;
    for i in 0..s.n() {
        let th = x.theta[i] - shift;
        let w = x.omega[i];
        position += s.damping()[i] * th * th;
        cross += s.inertia()[i] * th * w;
        kinetic += s.inertia()[i] * w * w;
    }
    eps * position + 2.0 * eps * cross + kinetic
}

pub fn energy_e(s: &SwingSystem, x: &State, eps: f64) -> f64 {
    quadratic_form(s, x, eps, 0.0)
}

pub fn energy_tilde(s: &SwingSystem, x: &State, eps: f64) -> f64 {
    quadratic_form(s, x, eps, x.theta_mean())
}

pub fn dissipation(x: &State) -> f64 {
    let c = x.theta_mean();
    let fluct: f64 = x.theta.iter().map(|t| (t - c) * (t - c)).sum();
    let kinetic: f64 = x.omega.iter().map(|w| w * w).sum();
    kinetic + fluct
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use proptest::prelude::*;

    fn random_system(n: usize, vals: &[f64]) -> SwingSystem {
        let mut w = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                let a = if vals[k] < 0.3 { 0.0 } else { vals[k] };
                w[i * n + j] = a;
                w[j * n + i] = a;
                k += 1;
            }
        }
        let m = (0..n).map(|i| 0.1 + 0.05 * vals[i]).collect();
        let d = (0..n).map(|i| 0.3 + 0.1 * vals[n + i]).collect();
        let p = (0..n).map(|i| vals[2 * n + i] - 0.5).collect();
        SwingSystem::new(m, d, p, WeightedGraph::from_flat(n, w).unwrap()).unwrap()
    }

    #[test]
    fn potential_at_uniform_phase() {
        let g = WeightedGraph::complete(3, 0.4).unwrap();
        let s = SwingSystem::new(vec![1.0; 3], vec![1.0; 3], vec![0.0; 3], g).unwrap();
        // Σ a_kl over ordered pairs = 6 * 0.4
        assert!((potential(&s, &[0.7; 3]) - 0.5 * 2.4).abs() < 1e-15);
        assert!(grad_potential(&s, &[0.7; 3]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_oscillator_gradient() {
        let s = SwingSystem::new(
            vec![0.1, 0.1],
            vec![0.3, 0.4],
            vec![0.01, -0.01],
            WeightedGraph::pair(0.2).unwrap(),
        )
        .unwrap();
        let g = grad_potential(&s, &[0.3, 1.1]);
        assert!((g[0] - (0.01 + 0.2 * (1.1f64 - 0.3).sin())).abs() < 1e-15);
        assert!((g[1] - (-0.01 + 0.2 * (0.3f64 - 1.1).sin())).abs() < 1e-15);
    }

    #[test]
    fn energy_examples() {
        let s = SwingSystem::new(
            vec![0.1, 0.2],
            vec![0.3, 0.4],
            vec![0.0, 0.0],
            WeightedGraph::pair(0.2).unwrap(),
        )
        .unwrap();
        assert_eq!(energy_e(&s, &State::zeros(2), 0.5), 0.0);
        let x = State::new(vec![1.0, -2.0], vec![0.0, 0.0]);
        assert!((energy_e(&s, &x, 0.5) - 0.5 * (0.3 + 1.6)).abs() < 1e-15);
        let sync = State::new(vec![0.4, 0.4], vec![1.0, -2.0]);
        assert!((energy_tilde(&s, &sync, 0.5) - (0.1 + 0.8)).abs() < 1e-15);
        assert_eq!(
            dissipation(&State::new(vec![2.0, 2.0], vec![0.0, 0.0])),
            0.0
        );
        let v = State::new(vec![1.0 + 0.3, 1.0 - 0.3], vec![0.5, 0.0]);
        assert!((dissipation(&v) - (0.18 + 0.25)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn translation_invariance_with_zero_sum(
            vals in proptest::collection::vec(0.0f64..1.0, 40),
            n in 2usize..7,
            c in -10.0f64..10.0,
        ) {
            let (s, _) = random_system(n, &vals).macro_micro();
            let theta: Vec<f64> = vals[3 * n..4 * n].iter().map(|v| 6.0 * v - 3.0).collect();
            let shifted: Vec<f64> = theta.iter().map(|t| t + c).collect();
            let f0 = potential(&s, &theta);
            prop_assert!((potential(&s, &shifted) - f0).abs() < 1e-10 * (1.0 + f0.abs()));
        }

        #[test]
        fn potential_matches_pair_sum(
            vals in proptest::collection::vec(0.0f64..1.0, 40),
            n in 1usize..7,
        ) {
            let s = random_system(n, &vals);
            let theta: Vec<f64> = vals[3 * n..4 * n].iter().map(|v| 6.0 * v - 3.0).collect();
            // unordered-pair form: Σ_{k<l} a_kl cos(θ_k − θ_l)
            let mut oracle: f64 = s.power().iter().zip(&theta).map(|(p, t)| p * t).sum();
            for &(k, l, a) in s.graph().edges() {
                oracle += a * (theta[k] - theta[l]).cos();
            }
            prop_assert!((potential(&s, &theta) - oracle).abs() < 1e-12);
        }

        #[test]
        fn dissipation_matches_direct_sum(
            theta in proptest::collection::vec(-3.0f64..3.0, 1..9),
            seed in proptest::collection::vec(-3.0f64..3.0, 9),
        ) {
            let n = theta.len();
            let x = State::new(theta.clone(), seed[..n].to_vec());
            let mean = theta.iter().sum::<f64>() / n as f64;
            let mut oracle = 0.0;
            for i in 0..n {
                oracle += (theta[i] - mean).powi(2) + seed[i].powi(2);
            }
            prop_assert!((dissipation(&x) - oracle).abs() < 1e-12);
        }
    }
}
