//! Amplitude amplification and estimation around a state-preparation circuit
//! `A` with a marked ("good") subspace.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Circuit, Program, C64};

/// Success probabilities below this are treated as unamplifiable.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
/// Growth factor of the unknown-probability schedule.
pub const SCHEDULE_GROWTH: f64 = 1.2;
/// Widest evaluation register simulated by amplitude estimation.
pub const MAX_EVALUATION_QUBITS: usize = 20;

/// Basis states whose bits under `mask` equal `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodSubspace {
    pub mask: usize,
    pub value: usize,
}

impl GoodSubspace {
    /// Good when every listed qubit reads zero on a `width`-qubit register.
    pub fn zeros(width: usize, qubits: &[usize]) -> Self {
        let mask = qubits.iter().fold(0, |m, &q| m | (1usize << (width - 1 - q)));
        Self { mask, value: 0 }
    }

    pub fn contains(&self, index: usize) -> bool {
        index & self.mask == self.value
    }

    pub fn probability(&self, amps: &[C64]) -> f64 {
        amps.iter().enumerate().filter(|(i, _)| self.contains(*i)).map(|(_, a)| a.norm_sqr()).sum()
    }
}

/// Expected cost of the exponential-schedule search for an unknown success
/// probability `p`, in invocations of `A` or `A†`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScheduleCost {
    pub expected_invocations: f64,
    pub expected_rounds: f64,
}

/// Each round draws `j` uniformly from `0..M`, applies `j` Grover iterations
/// (`2j + 1` invocations) and measures; `M` grows by [`SCHEDULE_GROWTH`] per
/// failed round up to `1/√PROBABILITY_FLOOR`.
pub fn schedule_cost(p: f64) -> Result<ScheduleCost> {
    if !(p >= PROBABILITY_FLOOR) {
        return Err(Error::Unamplifiable { probability: p, floor: PROBABILITY_FLOOR });
    }
    if p >= 1.0 - 1e-12 {
        return Ok(ScheduleCost { expected_invocations: 1.0, expected_rounds: 1.0 });
    }
    let theta = p.sqrt().asin();
    let cap = 1.0 / PROBABILITY_FLOOR.sqrt();
    let mut m = 1.0f64;
    let mut survive = 1.0;
    let mut cost = 0.0;
    let mut rounds = 0.0;
    while survive > 1e-15 {
        let big_m = m.ceil();
        // mean over j of sin²((2j+1)θ)
        let success = 0.5 - (4.0 * big_m * theta).sin() / (4.0 * big_m * (2.0 * theta).sin());
        cost += survive * big_m;
        rounds += survive;
        survive *= 1.0 - success;
        m = (m * SCHEDULE_GROWTH).min(cap);
    }
    Ok(ScheduleCost { expected_invocations: cost, expected_rounds: rounds })
}

/// Iterations maximizing the good-state probability, `⌊π/(4θ)⌋`.
pub fn optimal_iterations(p: f64) -> usize {
    let theta = p.clamp(0.0, 1.0).sqrt().asin();
    if theta <= 0.0 {
        return 0;
    }
    (PI / (4.0 * theta)).floor() as usize
}

/// Statevector simulation of `Q^j A|0⟩` with `Q = −A S₀ A† S_χ`.
pub struct Grover {
    forward: Program,
    backward: Program,
    width: usize,
    pub good: GoodSubspace,
}

impl Grover {
    pub fn new(a: &Circuit, good: GoodSubspace) -> Self {
        Self { forward: Program::compile(a), backward: Program::compile(&a.adjoint()), width: a.width(), good }
    }

    pub fn prepare(&self) -> Vec<C64> {
        let mut amps = vec![C64::default(); 1 << self.width];
        amps[0] = C64::new(1.0, 0.0);
        self.forward.run(&mut amps);
        amps
    }

    pub fn iterate(&self, amps: &mut [C64]) {
        for (i, a) in amps.iter_mut().enumerate() {
            if self.good.contains(i) {
                *a = -*a;
            }
        }
        self.backward.run(amps);
        amps[0] = -amps[0];
        self.forward.run(amps);
        for a in amps.iter_mut() {
            *a = -*a;
        }
    }

    pub fn run(&self, iterations: usize) -> Vec<C64> {
        let mut amps = self.prepare();
        for _ in 0..iterations {
            self.iterate(&mut amps);
        }
        amps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationMode {
    /// Most likely phase-estimation outcome.
    Exact,
    /// One outcome drawn from the phase-estimation distribution.
    Sampled,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmplitudeEstimate {
    pub estimate: f64,
    pub true_value: f64,
    pub evaluation_qubits: usize,
    /// Invocations of `A` or `A†`, including the controlled Grover powers.
    pub invocations: u64,
    pub outcome: usize,
}

/// Evaluation qubits for additive error `beta`: `⌈log₂(1/β)⌉ + 2`.
pub fn evaluation_qubits(beta: f64) -> Result<usize> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidConfig(format!("beta must lie in (0, 1), got {beta}")));
    }
    let m = (1.0 / beta).log2().ceil() as usize + 2;
    if m > MAX_EVALUATION_QUBITS {
        return Err(Error::EstimationDepth { needed: m, cap: MAX_EVALUATION_QUBITS });
    }
    Ok(m)
}

/// Distribution of the `m`-qubit phase-estimation outcome for the Grover
/// iterate with rotation angle `θ` (`|a| = sin θ`). The prepared state is an
/// equal mixture of the eigenvectors with phases `±2θ`.
pub fn estimation_distribution(theta: f64, m: usize) -> Vec<f64> {
    let big_m = 1usize << m;
    let mf = big_m as f64;
    let kernel = |omega: f64, y: usize| -> f64 {
        // |(1/M) Σ_j e^{2πi j (ω − y/M)}|²
        let delta = omega - y as f64 / mf;
        let s = (PI * delta).sin();
        if s.abs() < 1e-15 {
            1.0
        } else {
            ((PI * mf * delta).sin() / (mf * s)).powi(2)
        }
    };
    let omega = theta / PI;
    (0..big_m).map(|y| 0.5 * kernel(omega, y) + 0.5 * kernel(1.0 - omega, y)).collect()
}

/// Estimate `|a| = sin θ` with `m` evaluation qubits.
pub fn estimate_from_theta<R: Rng + ?Sized>(theta: f64, m: usize, mode: EstimationMode, rng: &mut R) -> AmplitudeEstimate {
    let dist = estimation_distribution(theta, m);
    let outcome = match mode {
        EstimationMode::Exact => {
            dist.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0)
        }
        EstimationMode::Sampled => {
            let total: f64 = dist.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut pick = dist.len() - 1;
            for (i, p) in dist.iter().enumerate() {
                if u < *p {
                    pick = i;
                    break;
                }
                u -= p;
            }
            pick
        }
    };
    let big_m = 1usize << m;
    let estimate = (PI * outcome as f64 / big_m as f64).sin().abs();
    AmplitudeEstimate {
        estimate,
        true_value: theta.sin(),
        evaluation_qubits: m,
        invocations: 2 * (big_m as u64 - 1) + 1,
        outcome,
    }
}

/// Amplitude estimation of the good component of `A|0⟩` to additive error `beta`.
pub fn amplitude_estimation<R: Rng + ?Sized>(
    a: &Circuit,
    good: GoodSubspace,
    beta: f64,
    mode: EstimationMode,
    rng: &mut R,
) -> Result<AmplitudeEstimate> {
    let m = evaluation_qubits(beta)?;
    let g = Grover::new(a, good);
    let p = good.probability(&g.prepare()).clamp(0.0, 1.0);
    Ok(estimate_from_theta(p.sqrt().asin(), m, mode, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::Gate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schedule_cost_scales_as_inverse_sqrt() {
        let c1 = schedule_cost(1e-3).unwrap().expected_invocations;
        let c2 = schedule_cost(5e-4).unwrap().expected_invocations;
        let ratio = c2 / c1;
        assert!((ratio - 2f64.sqrt()).abs() < 0.25 * 2f64.sqrt(), "{ratio}");
        assert!(matches!(schedule_cost(1e-13), Err(Error::Unamplifiable { .. })));
        assert_eq!(schedule_cost(1.0).unwrap().expected_invocations, 1.0);
    }

    #[test]
    fn schedule_matches_monte_carlo() {
        // Direct simulation of the randomized schedule on the closed-form
        // success probability sin²((2j+1)θ).
        let p: f64 = 0.01;
        let theta = p.sqrt().asin();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trials = 20_000;
        let mut total = 0.0;
        for _ in 0..trials {
            let mut m = 1.0f64;
            loop {
                let j = rng.gen_range(0..m.ceil() as usize);
                total += (2 * j + 1) as f64;
                if rng.gen::<f64>() < (((2 * j + 1) as f64) * theta).sin().powi(2) {
                    break;
                }
                m *= SCHEDULE_GROWTH;
            }
        }
        let mc = total / trials as f64;
        let exact = schedule_cost(p).unwrap().expected_invocations;
        assert!((mc - exact).abs() / exact < 0.05, "{mc} vs {exact}");
    }

    #[test]
    fn grover_boosts_marked_state() {
        // A = H⊗H⊗H, good = |000⟩ with p = 1/8.
        let mut a = Circuit::new(3);
        for q in 0..3 {
            a.push(Gate::h(q)).unwrap();
        }
        let good = GoodSubspace::zeros(3, &[0, 1, 2]);
        let g = Grover::new(&a, good);
        let j = optimal_iterations(1.0 / 8.0);
        assert_eq!(j, 2);
        let amps = g.run(j);
        let theta = (1.0f64 / 8.0).sqrt().asin();
        let want = (5.0 * theta).sin().powi(2);
        assert!(want > 0.94);
        assert!((good.probability(&amps) - want).abs() < 1e-12);
    }

    #[test]
    fn estimation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut h = Circuit::new(1);
        h.push(Gate::h(0)).unwrap();
        let one = GoodSubspace { mask: 1, value: 1 };
        let e = amplitude_estimation(&h, one, 0.05, EstimationMode::Exact, &mut rng).unwrap();
        assert!((e.estimate - std::f64::consts::FRAC_1_SQRT_2).abs() <= 0.05);
        assert_eq!(e.evaluation_qubits, 7);

        let empty = Circuit::new(1);
        let e = amplitude_estimation(&empty, one, 0.05, EstimationMode::Exact, &mut rng).unwrap();
        assert_eq!(e.estimate, 0.0);

        let dist = estimation_distribution(0.3, 6);
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(matches!(evaluation_qubits(1e-9), Err(Error::EstimationDepth { .. })));
        assert!(evaluation_qubits(0.0).is_err());
    }

    #[test]
    fn sampled_estimates_meet_beta_with_high_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let beta = 0.05;
        let m = evaluation_qubits(beta).unwrap();
        let theta = 0.37f64;
        let hits = (0..400)
            .filter(|_| (estimate_from_theta(theta, m, EstimationMode::Sampled, &mut rng).estimate - theta.sin()).abs() <= beta)
            .count();
        assert!(hits as f64 / 400.0 >= 8.0 / (PI * PI));
    }
}
