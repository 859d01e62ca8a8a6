//! Flattening of nested circuits into primitive operations and their
//! application to dense amplitude vectors.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::circuit::Circuit;
use super::gate::{Control, Gate, GateKind, C64};
use crate::error::{Error, Result};

/// Default limit for [`dense_unitary`].
pub const DEFAULT_DENSE_CAP: usize = 14;

#[derive(Clone, Debug)]
enum Op {
    Mat2([C64; 4]),
    Scalar(C64),
    Dense(Arc<DMatrix<C64>>),
}

/// A primitive operation with resolved bit masks.
#[derive(Clone, Debug)]
pub struct FlatGate {
    op: Op,
    /// Bit positions (LSB = 0) of the targets, most significant target first.
    bits: Vec<usize>,
    ctrl_mask: usize,
    ctrl_val: usize,
}

/// Flattened, ready-to-run form of a circuit.
#[derive(Clone, Debug)]
pub struct Program {
    width: usize,
    ops: Vec<FlatGate>,
}

impl Program {
    pub fn compile(circuit: &Circuit) -> Self {
        let width = circuit.width();
        let map: Vec<usize> = (0..width).collect();
        let mut ops = Vec::new();
        emit_circuit(circuit, &map, &[], false, width, &mut ops);
        Self { width, ops }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn run(&self, amps: &mut [C64]) {
        for g in &self.ops {
            apply_flat(g, amps);
        }
    }
}

fn emit_circuit(c: &Circuit, map: &[usize], ctrls: &[Control], adjoint: bool, width: usize, out: &mut Vec<FlatGate>) {
    if adjoint {
        for g in c.gates().iter().rev() {
            emit_gate(&g.inverse(), map, ctrls, width, out);
        }
    } else {
        for g in c.gates() {
            emit_gate(g, map, ctrls, width, out);
        }
    }
}

fn emit_gate(g: &Gate, map: &[usize], ctrls: &[Control], width: usize, out: &mut Vec<FlatGate>) {
    let mut all_ctrls: Vec<Control> = ctrls.to_vec();
    all_ctrls.extend(g.controls.iter().map(|c| Control { qubit: map[c.qubit], on: c.on }));
    let bit = |q: usize| width - 1 - q;
    match &g.kind {
        GateKind::Oracle { block, adjoint } => {
            let inner_map: Vec<usize> = g.targets.iter().map(|&t| map[t]).collect();
            emit_circuit(&block.circuit, &inner_map, &all_ctrls, *adjoint, width, out);
        }
        kind => {
            let (mut mask, mut val) = (0usize, 0usize);
            for c in &all_ctrls {
                let b = 1usize << bit(c.qubit);
                mask |= b;
                if c.on {
                    val |= b;
                }
            }
            let bits: Vec<usize> = g.targets.iter().map(|&t| bit(map[t])).collect();
            let op = match kind {
                GateKind::GlobalPhase(t) => Op::Scalar(C64::from_polar(1.0, *t)),
                GateKind::Unitary(d) => Op::Dense(Arc::new(d.to_matrix())),
                k => Op::Mat2(Gate::matrix2(k).expect("single-qubit kind")),
            };
            out.push(FlatGate { op, bits, ctrl_mask: mask, ctrl_val: val });
        }
    }
}

fn apply_flat(g: &FlatGate, amps: &mut [C64]) {
    let (mask, val) = (g.ctrl_mask, g.ctrl_val);
    match &g.op {
        Op::Scalar(p) => {
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask == val {
                    *a *= p;
                }
            }
        }
        Op::Mat2(m) => {
            let t = 1usize << g.bits[0];
            let dim = amps.len();
            // Enumerate indices with the target bit clear.
            let mut i = 0;
            while i < dim {
                if i & t != 0 {
                    i += t;
                    continue;
                }
                if i & mask == val {
                    let a = amps[i];
                    let b = amps[i | t];
                    amps[i] = m[0] * a + m[1] * b;
                    amps[i | t] = m[2] * a + m[3] * b;
                }
                i += 1;
            }
        }
        Op::Dense(m) => {
            let k = g.bits.len();
            let sub = 1usize << k;
            let tmask: usize = g.bits.iter().map(|&b| 1usize << b).sum();
            let offsets: Vec<usize> = (0..sub)
                .map(|local| {
                    g.bits.iter().enumerate().fold(0usize, |acc, (j, &b)| {
                        if local >> (k - 1 - j) & 1 == 1 {
                            acc | (1 << b)
                        } else {
                            acc
                        }
                    })
                })
                .collect();
            let mut buf = vec![C64::new(0.0, 0.0); sub];
            for base in 0..amps.len() {
                if base & tmask != 0 || base & mask != val {
                    continue;
                }
                for (j, off) in offsets.iter().enumerate() {
                    buf[j] = amps[base | off];
                }
                for (r, off) in offsets.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (c, b) in buf.iter().enumerate() {
                        acc += m[(r, c)] * b;
                    }
                    amps[base | off] = acc;
                }
            }
        }
    }
}

/// Apply a single gate in place to an amplitude vector of the given width.
pub fn apply_gate_in_place(width: usize, gate: &Gate, amps: &mut [C64]) -> Result<()> {
    let mut c = Circuit::new(width);
    c.push(gate.clone())?;
    Program::compile(&c).run(amps);
    Ok(())
}

/// Dense matrix of `circuit`, one simulated column per basis state.
pub fn dense_unitary(circuit: &Circuit, cap: usize) -> Result<DMatrix<C64>> {
    let w = circuit.width();
    if w > cap {
        return Err(Error::DenseCapExceeded { width: w, cap });
    }
    let dim = 1usize << w;
    let prog = Program::compile(circuit);
    let cols: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[j] = C64::new(1.0, 0.0);
            prog.run(&mut v);
            v
        })
        .collect();
    Ok(DMatrix::from_fn(dim, dim, |r, c| cols[c][r]))
}

/// Top-left `2^s x 2^s` block of `circuit` where the first `ancillas` qubits
/// are projected onto `|0…0⟩` on both sides. Only the needed columns are simulated.
pub fn dense_block(circuit: &Circuit, ancillas: usize, cap: usize) -> Result<DMatrix<C64>> {
    let w = circuit.width();
    if w > cap {
        return Err(Error::DenseCapExceeded { width: w, cap });
    }
    if ancillas > w {
        return Err(Error::WidthMismatch { expected: w, got: ancillas });
    }
    let s = w - ancillas;
    let dim = 1usize << w;
    let sdim = 1usize << s;
    let prog = Program::compile(circuit);
    let cols: Vec<Vec<C64>> = (0..sdim)
        .into_par_iter()
        .map(|j| {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            v[j] = C64::new(1.0, 0.0);
            prog.run(&mut v);
            v.truncate(sdim);
            v
        })
        .collect();
    Ok(DMatrix::from_fn(sdim, sdim, |r, c| cols[c][r]))
}
