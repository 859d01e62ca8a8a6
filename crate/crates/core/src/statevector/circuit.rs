use std::ops::{Add, AddAssign, Mul};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::gate::{Charge, Control, Gate, GateKind, OracleBlock};
use crate::error::{Error, Result};

/// Uses of the state-preparation oracle `U` and of its adjoint, controlled or not.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCount {
    pub u: u64,
    pub udag: u64,
}

impl QueryCount {
    pub fn total(&self) -> u64 {
        self.u + self.udag
    }

    pub fn swapped(self) -> Self {
        Self { u: self.udag, udag: self.u }
    }
}

impl Add for QueryCount {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { u: self.u + o.u, udag: self.udag + o.udag }
    }
}

impl AddAssign for QueryCount {
    fn add_assign(&mut self, o: Self) {
        self.u += o.u;
        self.udag += o.udag;
    }
}

impl Mul<u64> for QueryCount {
    type Output = Self;
    fn mul(self, k: u64) -> Self {
        Self { u: self.u * k, udag: self.udag * k }
    }
}

/// A named group of consecutive qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub width: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, width: usize) -> Self {
        Self { name: name.into(), width }
    }
}

/// Ordered registers, most-significant first. Qubit `0` is the leading
/// qubit of the first register.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub registers: Vec<Register>,
}

impl Layout {
    pub fn new(registers: Vec<Register>) -> Result<Self> {
        for (i, r) in registers.iter().enumerate() {
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::RegisterMismatch(format!("duplicate register name `{}`", r.name)));
            }
        }
        Ok(Self { registers })
    }

    pub fn anonymous(width: usize) -> Self {
        Self { registers: vec![Register::new("q", width)] }
    }

    pub fn width(&self) -> usize {
        self.registers.iter().map(|r| r.width).sum()
    }

    pub fn range(&self, name: &str) -> Result<std::ops::Range<usize>> {
        let mut start = 0;
        for r in &self.registers {
            if r.name == name {
                return Ok(start..start + r.width);
            }
            start += r.width;
        }
        Err(Error::RegisterMismatch(format!("no register named `{name}`")))
    }

    pub fn qubits(&self, name: &str) -> Result<Vec<usize>> {
        Ok(self.range(name)?.collect())
    }

    pub fn qubit(&self, name: &str) -> Result<usize> {
        let r = self.range(name)?;
        if r.len() != 1 {
            return Err(Error::RegisterMismatch(format!("register `{name}` is not a single qubit")));
        }
        Ok(r.start)
    }
}

/// Ordered gate list over a fixed number of qubits, with oracle query counters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    width: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    registers: Vec<Register>,
    gates: Vec<Gate>,
    queries: QueryCount,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Self { width, registers: Vec::new(), gates: Vec::new(), queries: QueryCount::default() }
    }

    pub fn with_layout(layout: &Layout) -> Self {
        Self { registers: layout.registers.clone(), ..Self::new(layout.width()) }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn layout(&self) -> Layout {
        if self.registers.is_empty() {
            Layout::anonymous(self.width)
        } else {
            Layout { registers: self.registers.clone() }
        }
    }

    pub fn queries(&self) -> QueryCount {
        self.queries
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    fn validate(&self, gate: &Gate) -> Result<()> {
        if gate.targets.len() != gate.arity() {
            return Err(Error::WidthMismatch { expected: gate.arity(), got: gate.targets.len() });
        }
        let mut seen = vec![false; self.width];
        let all = gate.targets.iter().copied().chain(gate.controls.iter().map(|c| c.qubit));
        for q in all {
            if q >= self.width {
                return Err(Error::IndexOutOfRange { index: q, width: self.width });
            }
            if seen[q] {
                return Err(Error::OverlappingQubits(q));
            }
            seen[q] = true;
        }
        if let GateKind::Unitary(op) = &gate.kind {
            if !op.dim.is_power_of_two() || op.entries.len() != op.dim * op.dim {
                return Err(Error::InvalidConfig("dense gate is not 2^k x 2^k".into()));
            }
        }
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        self.validate(&gate)?;
        self.queries += gate.queries();
        self.gates.push(gate);
        Ok(self)
    }

    /// Inline every gate of `other` (same width).
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.width != self.width {
            return Err(Error::WidthMismatch { expected: self.width, got: other.width });
        }
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(self)
    }

    /// Inline `other`, sending its qubit `i` to `map[i]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<&mut Self> {
        if map.len() != other.width {
            return Err(Error::WidthMismatch { expected: other.width, got: map.len() });
        }
        for g in &other.gates {
            let mut g = g.clone();
            for t in g.targets.iter_mut() {
                *t = map[*t];
            }
            for c in g.controls.iter_mut() {
                c.qubit = map[c.qubit];
            }
            self.push(g)?;
        }
        Ok(self)
    }

    /// Add `other` as a single opaque gate acting on `map`.
    pub fn push_block(
        &mut self,
        label: &str,
        other: &Circuit,
        map: &[usize],
        charge: Charge,
        controls: &[Control],
    ) -> Result<&mut Self> {
        let block = Arc::new(OracleBlock { label: label.to_string(), circuit: other.clone(), charge });
        self.push(Gate::oracle(block, map.to_vec()).with_controls(controls.iter().copied()))
    }

    /// Same as [`push_block`](Self::push_block) with the adjoint of `other`.
    pub fn push_block_adjoint(
        &mut self,
        label: &str,
        other: &Circuit,
        map: &[usize],
        charge: Charge,
        controls: &[Control],
    ) -> Result<&mut Self> {
        let block = Arc::new(OracleBlock { label: label.to_string(), circuit: other.clone(), charge });
        let g = Gate { kind: GateKind::Oracle { block, adjoint: true }, targets: map.to_vec(), controls: controls.to_vec() };
        self.push(g)
    }

    /// Wrap a synthesized circuit so that each use counts as one oracle query.
    pub fn as_oracle(&self, label: &str) -> Circuit {
        let mut c = Circuit { width: self.width, registers: self.registers.clone(), gates: Vec::new(), queries: QueryCount::default() };
        let map: Vec<usize> = (0..self.width).collect();
        c.push_block(label, self, &map, Charge::Query, &[]).expect("identity map is valid");
        c
    }

    pub fn adjoint(&self) -> Circuit {
        let gates: Vec<Gate> = self.gates.iter().rev().map(Gate::inverse).collect();
        Circuit { width: self.width, registers: self.registers.clone(), gates, queries: self.queries.swapped() }
    }

    /// Add `control` to every gate. The control qubit must be idle in `self`.
    pub fn controlled(&self, control: Control) -> Result<Circuit> {
        if control.qubit >= self.width {
            return Err(Error::IndexOutOfRange { index: control.qubit, width: self.width });
        }
        let mut out = Circuit { width: self.width, registers: self.registers.clone(), gates: Vec::new(), queries: QueryCount::default() };
        for g in &self.gates {
            out.push(g.clone().with_control(control))?;
        }
        Ok(out)
    }

    /// Copy of `self` placed on `map` inside a wider circuit.
    pub fn embed(&self, width: usize, map: &[usize]) -> Result<Circuit> {
        let mut c = Circuit::new(width);
        c.append_mapped(self, map)?;
        Ok(c)
    }

    pub fn set_layout(&mut self, layout: &Layout) -> Result<()> {
        if layout.width() != self.width {
            return Err(Error::WidthMismatch { expected: self.width, got: layout.width() });
        }
        self.registers = layout.registers.clone();
        Ok(())
    }

    /// One/two-qubit gate estimate with multi-controlled gates expanded logically.
    pub fn elementary_gate_count(&self) -> usize {
        self.gates.iter().map(Gate::elementary_cost).sum()
    }
}
