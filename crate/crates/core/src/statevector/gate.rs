use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, QueryCount};

pub type C64 = Complex64;

/// A control condition on one qubit: the gate fires when the qubit reads `on`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub on: bool,
}

impl Control {
    pub fn one(qubit: usize) -> Self {
        Self { qubit, on: true }
    }

    pub fn zero(qubit: usize) -> Self {
        Self { qubit, on: false }
    }
}

/// Row-major dense operator on `2^k` amplitudes, serialized as `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseOp {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl DenseOp {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let z = m[(r, c)];
                entries.push([z.re, z.im]);
            }
        }
        Self { dim, entries }
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            let [re, im] = self.entries[r * self.dim + c];
            C64::new(re, im)
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }
}

/// How an opaque sub-circuit contributes to the oracle query counters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Charge {
    /// Sum the counters of the wrapped circuit.
    Inherit,
    /// The wrapped circuit *is* the state-preparation oracle: one use of U.
    Query,
    /// A stand-in whose per-use cost is declared explicitly.
    Fixed(QueryCount),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBlock {
    pub label: String,
    pub circuit: Circuit,
    pub charge: Charge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Z,
    S,
    Sdg,
    Rz(f64),
    Ry(f64),
    /// diag(1, e^{iθ})
    Phase(f64),
    /// Scalar e^{iθ}; with controls this is a multi-controlled phase.
    GlobalPhase(f64),
    Unitary(Arc<DenseOp>),
    Oracle { block: Arc<OracleBlock>, adjoint: bool },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<Control>,
}

impl Gate {
    fn single(kind: GateKind, target: usize) -> Self {
        Self { kind, targets: vec![target], controls: Vec::new() }
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }
    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }
    pub fn z(q: usize) -> Self {
        Self::single(GateKind::Z, q)
    }
    pub fn s(q: usize) -> Self {
        Self::single(GateKind::S, q)
    }
    pub fn sdg(q: usize) -> Self {
        Self::single(GateKind::Sdg, q)
    }
    pub fn rz(theta: f64, q: usize) -> Self {
        Self::single(GateKind::Rz(theta), q)
    }
    pub fn ry(theta: f64, q: usize) -> Self {
        Self::single(GateKind::Ry(theta), q)
    }
    pub fn phase(theta: f64, q: usize) -> Self {
        Self::single(GateKind::Phase(theta), q)
    }
    pub fn global_phase(theta: f64) -> Self {
        Self { kind: GateKind::GlobalPhase(theta), targets: Vec::new(), controls: Vec::new() }
    }

    pub fn unitary(m: &DMatrix<C64>, targets: Vec<usize>) -> Self {
        Self { kind: GateKind::Unitary(Arc::new(DenseOp::from_matrix(m))), targets, controls: Vec::new() }
    }

    pub fn oracle(block: Arc<OracleBlock>, targets: Vec<usize>) -> Self {
        Self { kind: GateKind::Oracle { block, adjoint: false }, targets, controls: Vec::new() }
    }

    pub fn with_control(mut self, c: Control) -> Self {
        self.controls.push(c);
        self
    }

    pub fn with_controls<I: IntoIterator<Item = Control>>(mut self, cs: I) -> Self {
        self.controls.extend(cs);
        self
    }

    /// Number of target qubits this kind acts on.
    pub fn arity(&self) -> usize {
        match &self.kind {
            GateKind::GlobalPhase(_) => 0,
            GateKind::Unitary(op) => op.num_qubits(),
            GateKind::Oracle { block, .. } => block.circuit.width(),
            _ => 1,
        }
    }

    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            GateKind::H => GateKind::H,
            GateKind::X => GateKind::X,
            GateKind::Z => GateKind::Z,
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::GlobalPhase(t) => GateKind::GlobalPhase(-t),
            GateKind::Unitary(op) => {
                GateKind::Unitary(Arc::new(DenseOp::from_matrix(&op.to_matrix().adjoint())))
            }
            GateKind::Oracle { block, adjoint } => {
                GateKind::Oracle { block: block.clone(), adjoint: !adjoint }
            }
        };
        Self { kind, targets: self.targets.clone(), controls: self.controls.clone() }
    }

    /// Oracle queries charged for one application of this gate.
    pub fn queries(&self) -> QueryCount {
        match &self.kind {
            GateKind::Oracle { block, adjoint } => {
                let q = match &block.charge {
                    Charge::Inherit => block.circuit.queries(),
                    Charge::Query => QueryCount { u: 1, udag: 0 },
                    Charge::Fixed(q) => *q,
                };
                if *adjoint {
                    q.swapped()
                } else {
                    q
                }
            }
            _ => QueryCount::default(),
        }
    }

    /// 2x2 matrix of a single-qubit kind, `None` for the others.
    pub fn matrix2(kind: &GateKind) -> Option<[C64; 4]> {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let m = match kind {
            GateKind::H => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                [h, h, h, -h]
            }
            GateKind::X => [z, o, o, z],
            GateKind::Z => [o, z, z, -o],
            GateKind::S => [o, z, z, C64::i()],
            GateKind::Sdg => [o, z, z, -C64::i()],
            GateKind::Rz(t) => [C64::from_polar(1.0, -t / 2.0), z, z, C64::from_polar(1.0, t / 2.0)],
            GateKind::Ry(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]
            }
            GateKind::Phase(t) => [o, z, z, C64::from_polar(1.0, *t)],
            _ => return None,
        };
        Some(m)
    }

    /// Elementary-gate cost in the one/two-qubit model: a gate with `c`
    /// controls is counted as a `(c+1)`-qubit Toffoli-style ladder of
    /// `max(1, 2c - 1)` two-qubit steps when `c > 1`.
    pub fn elementary_cost(&self) -> usize {
        match &self.kind {
            GateKind::Oracle { block, .. } => {
                let inner = block.circuit.elementary_gate_count();
                inner * if self.controls.is_empty() { 1 } else { 2 * self.controls.len() + 1 }
            }
            GateKind::GlobalPhase(_) if self.controls.is_empty() => 0,
            GateKind::Unitary(op) => {
                let k = op.num_qubits();
                (1usize << (2 * k)).max(1) * (1 + self.controls.len())
            }
            _ => {
                let c = self.controls.len();
                if c <= 1 {
                    1
                } else {
                    2 * c - 1
                }
            }
        }
    }
}
