use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Layout, QueryCount, Register};
use super::gate::{Gate, C64};
use super::sim::{apply_gate_in_place, Program};
use crate::error::{Error, Result};

/// Normalization tolerance enforced on every state handed out.
pub const NORM_TOL: f64 = 1e-12;
/// Default probability floor below which a projection is refused.
pub const DEFAULT_PROBABILITY_FLOOR: f64 = 1e-300;

/// Normalized amplitude vector over named registers (most-significant first).
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    layout: Layout,
    amplitudes: Vec<C64>,
}

/// Renormalized post-measurement state together with the outcome probability.
#[derive(Clone, Debug)]
pub struct ProjectionOutcome {
    pub post_state: QuantumState,
    pub probability: f64,
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

impl QuantumState {
    pub fn zero(layout: Layout) -> Self {
        Self::basis(layout, 0)
    }

    pub fn basis(layout: Layout, index: usize) -> Self {
        let dim = 1usize << layout.width();
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { layout, amplitudes }
    }

    /// Accepts amplitudes normalized to within `1e-9` and renormalizes them.
    pub fn from_amplitudes(layout: Layout, amplitudes: Vec<C64>) -> Result<Self> {
        let dim = 1usize << layout.width();
        if amplitudes.len() != dim {
            return Err(Error::WidthMismatch { expected: layout.width(), got: amplitudes.len().trailing_zeros() as usize });
        }
        let n = norm_sqr(&amplitudes);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm_sqr: n });
        }
        let mut s = Self { layout, amplitudes };
        s.renormalize();
        Ok(s)
    }

    /// Builds a state from an unnormalized vector by scaling it to unit norm.
    pub fn normalized(layout: Layout, mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm_sqr(&amplitudes).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized { norm_sqr: n * n });
        }
        for a in amplitudes.iter_mut() {
            *a /= n;
        }
        Self::from_amplitudes(layout, amplitudes)
    }

    fn renormalize(&mut self) {
        let n = norm_sqr(&self.amplitudes).sqrt();
        for a in self.amplitudes.iter_mut() {
            *a /= n;
        }
    }

    pub fn width(&self) -> usize {
        self.layout.width()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn registers(&self) -> &[Register] {
        &self.layout.registers
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn apply_gate(&self, gate: &Gate) -> Result<QuantumState> {
        let mut out = self.clone();
        apply_gate_in_place(self.width(), gate, &mut out.amplitudes)?;
        Ok(out)
    }

    /// Runs `circuit`; returns the output state and the oracle queries it used.
    pub fn run(&self, circuit: &Circuit) -> Result<(QuantumState, QueryCount)> {
        if circuit.width() != self.width() {
            return Err(Error::WidthMismatch { expected: self.width(), got: circuit.width() });
        }
        let mut out = self.clone();
        Program::compile(circuit).run(&mut out.amplitudes);
        out.renormalize();
        Ok((out, circuit.queries()))
    }

    /// Unnormalized amplitudes after running `circuit` on `|0…0⟩` over `layout`.
    pub fn run_raw(layout: Layout, circuit: &Circuit) -> Result<Vec<C64>> {
        let s = Self::zero(layout);
        Ok(s.run(circuit)?.0.amplitudes)
    }

    /// Mask/value pair selecting basis states where `qubits` read `outcome`.
    fn selector(&self, qubits: &[usize], outcome: &[bool]) -> Result<(usize, usize)> {
        let w = self.width();
        if qubits.len() != outcome.len() {
            return Err(Error::WidthMismatch { expected: qubits.len(), got: outcome.len() });
        }
        let (mut mask, mut val) = (0usize, 0usize);
        for (&q, &b) in qubits.iter().zip(outcome) {
            if q >= w {
                return Err(Error::IndexOutOfRange { index: q, width: w });
            }
            let bit = 1usize << (w - 1 - q);
            if mask & bit != 0 {
                return Err(Error::OverlappingQubits(q));
            }
            mask |= bit;
            if b {
                val |= bit;
            }
        }
        Ok((mask, val))
    }

    /// Squared norm of the component where `qubits` read `outcome`.
    pub fn outcome_probability(&self, qubits: &[usize], outcome: &[bool]) -> Result<f64> {
        let (mask, val) = self.selector(qubits, outcome)?;
        Ok(self.amplitudes.iter().enumerate().filter(|(i, _)| i & mask == val).map(|(_, a)| a.norm_sqr()).sum())
    }

    pub fn project(&self, qubits: &[usize], outcome: &[bool]) -> Result<ProjectionOutcome> {
        self.project_with_floor(qubits, outcome, DEFAULT_PROBABILITY_FLOOR)
    }

    pub fn project_with_floor(&self, qubits: &[usize], outcome: &[bool], floor: f64) -> Result<ProjectionOutcome> {
        let (mask, val) = self.selector(qubits, outcome)?;
        let mut amps = self.amplitudes.clone();
        let mut p = 0.0;
        for (i, a) in amps.iter_mut().enumerate() {
            if i & mask == val {
                p += a.norm_sqr();
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        if p < floor || p == 0.0 {
            return Err(Error::ZeroProbability { probability: p, floor });
        }
        let mut post_state = QuantumState { layout: self.layout.clone(), amplitudes: amps };
        post_state.renormalize();
        Ok(ProjectionOutcome { post_state, probability: p })
    }

    /// Project the named registers onto the given basis values and drop them.
    /// Returns the renormalized state on the remaining registers.
    pub fn project_out(&self, fixed: &[(&str, usize)], floor: f64) -> Result<ProjectionOutcome> {
        let mut qubits = Vec::new();
        let mut outcome = Vec::new();
        for (name, value) in fixed {
            let r = self.layout.range(name)?;
            let wr = r.len();
            for (j, q) in r.enumerate() {
                qubits.push(q);
                outcome.push((value >> (wr - 1 - j)) & 1 == 1);
            }
        }
        let po = self.project_with_floor(&qubits, &outcome, floor)?;
        let keep: Vec<Register> =
            self.layout.registers.iter().filter(|r| !fixed.iter().any(|(n, _)| *n == r.name)).cloned().collect();
        let keep_layout = Layout::new(keep)?;
        let (mask, val) = po.post_state.selector(&qubits, &outcome)?;
        let w = self.width();
        let kept_qubits: Vec<usize> = (0..w).filter(|q| !qubits.contains(q)).collect();
        let mut reduced = vec![C64::new(0.0, 0.0); 1usize << kept_qubits.len()];
        for (i, a) in po.post_state.amplitudes.iter().enumerate() {
            if i & mask != val {
                continue;
            }
            let mut j = 0usize;
            for &q in &kept_qubits {
                j = (j << 1) | ((i >> (w - 1 - q)) & 1);
            }
            reduced[j] = *a;
        }
        let post_state = QuantumState::from_amplitudes(keep_layout, reduced)?;
        Ok(ProjectionOutcome { post_state, probability: po.probability })
    }

    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        if self.width() != other.width() {
            return Err(Error::WidthMismatch { expected: self.width(), got: other.width() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }
}

/// `|⟨a|b⟩|²`
pub fn fidelity(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    a.fidelity(b)
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    registers: Vec<Register>,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for QuantumState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            registers: self.layout.registers.clone(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = StateJson::deserialize(d)?;
        let layout = Layout::new(j.registers).map_err(serde::de::Error::custom)?;
        let amps = j.amplitudes.iter().map(|[r, i]| C64::new(*r, *i)).collect();
        QuantumState::from_amplitudes(layout, amps).map_err(serde::de::Error::custom)
    }
}
