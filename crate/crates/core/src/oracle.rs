//! State-preparation oracles synthesized from classical amplitude vectors.
//!
//! Entry `k` (zero-based) of the vector is the amplitude of basis state
//! `|k⟩`, so the one-based index `k = 1..N` maps to `binary(k - 1)`.
//! Vectors whose length is not a power of two are padded with zeros.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{Circuit, Control, Gate, C64};

/// Input tolerance on `Σ|c_k|² = 1`.
pub const INPUT_NORM_TOL: f64 = 1e-9;

/// Gate budget of [`rotation_cascade`] for a vector padded to `2^n` entries.
pub fn gate_budget(padded_len: usize) -> usize {
    2 * padded_len
}

/// Normalized complex amplitudes `c_k = x_k + i y_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct AmplitudeVector {
    entries: Vec<C64>,
}

impl TryFrom<Vec<[f64; 2]>> for AmplitudeVector {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

impl From<AmplitudeVector> for Vec<[f64; 2]> {
    fn from(a: AmplitudeVector) -> Self {
        a.entries.iter().map(|z| [z.re, z.im]).collect()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorFile {
    Bare(Vec<[f64; 2]>),
    Wrapped { amplitudes: Vec<[f64; 2]> },
}

impl AmplitudeVector {
    /// Rejects vectors off unit norm by more than [`INPUT_NORM_TOL`], then
    /// renormalizes exactly.
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig("empty amplitude vector".into()));
        }
        if let Some(z) = entries.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(if z.re.is_finite() { z.im } else { z.re }));
        }
        let n: f64 = entries.iter().map(|z| z.norm_sqr()).sum();
        if (n - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr: n });
        }
        let s = n.sqrt();
        Ok(Self { entries: entries.into_iter().map(|z| z / s).collect() })
    }

    /// Scales `entries` to unit norm first.
    pub fn normalize(entries: Vec<C64>) -> Result<Self> {
        let n: f64 = entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized { norm_sqr: n * n });
        }
        Self::new(entries.into_iter().map(|z| z / n).collect())
    }

    pub fn from_parts(re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::InvalidConfig(format!("{} real parts but {} imaginary parts", re.len(), im.len())));
        }
        Self::new(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
    }

    /// Uniform random entries in the unit square, normalized.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<C64> = (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            if let Ok(a) = Self::normalize(v) {
                return a;
            }
        }
    }

    pub fn random_real<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<C64> = (0..len).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
            if let Ok(a) = Self::normalize(v) {
                return a;
            }
        }
    }

    /// `[[re, im], ...]` or `{"amplitudes": [[re, im], ...]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let rows = match serde_json::from_str::<VectorFile>(s)? {
            VectorFile::Bare(v) => v,
            VectorFile::Wrapped { amplitudes } => amplitudes,
        };
        Self::try_from(rows)
    }

    /// Rows of `re,im`. A non-numeric first row is taken as a header.
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(s.as_bytes());
        let mut out = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::InvalidConfig(format!("row {} has {} fields, expected re,im", i + 1, rec.len())));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(re), Ok(im)) => out.push(C64::new(re, im)),
                _ if i == 0 => continue,
                _ => return Err(Error::InvalidConfig(format!("row {} is not numeric", i + 1))),
            }
        }
        Self::new(out)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// Address width `n = max(1, ⌈log₂ N⌉)`.
    pub fn num_qubits(&self) -> usize {
        (self.entries.len().next_power_of_two().trailing_zeros() as usize).max(1)
    }

    /// Entries zero-padded to `2^n`.
    pub fn padded(&self) -> Vec<C64> {
        let mut v = self.entries.clone();
        v.resize(1 << self.num_qubits(), C64::new(0.0, 0.0));
        v
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.re).collect()
    }

    pub fn imag_parts(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.im).collect()
    }

    pub fn conj(&self) -> Self {
        Self { entries: self.entries.iter().map(|z| z.conj()).collect() }
    }

    /// `c_k ↦ i·conj(c_k)`, which swaps real and imaginary parts.
    pub fn swap_parts(&self) -> Self {
        Self { entries: self.entries.iter().map(|z| C64::new(z.im, z.re)).collect() }
    }
}

fn controls_for(prefix: usize, len: usize) -> Vec<Control> {
    (0..len).map(|q| Control { qubit: q, on: (prefix >> (len - 1 - q)) & 1 == 1 }).collect()
}

const ANGLE_EPS: f64 = 1e-15;

/// Uniformly controlled `Ry` tree for the magnitudes followed by `Rz` and
/// controlled phases on the last qubit. Exact including the global phase.
pub fn rotation_cascade(c: &AmplitudeVector) -> Circuit {
    let amps = c.padded();
    let n = c.num_qubits();
    let mut circ = Circuit::new(n);
    // Squared norms of every prefix block, level by level.
    for level in 0..n {
        let block = 1usize << (n - level);
        for prefix in 0..(1usize << level) {
            let start = prefix * block;
            let half = block / 2;
            let left: f64 = amps[start..start + half].iter().map(|z| z.norm_sqr()).sum();
            let right: f64 = amps[start + half..start + block].iter().map(|z| z.norm_sqr()).sum();
            if left + right == 0.0 {
                continue;
            }
            let theta = 2.0 * right.sqrt().atan2(left.sqrt());
            if theta.abs() > ANGLE_EPS {
                circ.push(Gate::ry(theta, level).with_controls(controls_for(prefix, level))).expect("valid cascade gate");
            }
        }
    }
    for prefix in 0..(1usize << (n - 1)) {
        let a0 = amps[2 * prefix].arg();
        let a1 = amps[2 * prefix + 1].arg();
        let ctrls = controls_for(prefix, n - 1);
        if (a1 - a0).abs() > ANGLE_EPS {
            circ.push(Gate::rz(a1 - a0, n - 1).with_controls(ctrls.clone())).expect("valid cascade gate");
        }
        let g = 0.5 * (a0 + a1);
        if g.abs() > ANGLE_EPS {
            circ.push(Gate::global_phase(g).with_controls(ctrls)).expect("valid cascade gate");
        }
    }
    circ
}

/// The state-preparation oracle `U` with `U|0…0⟩ = Σ c_k |k⟩`, wrapped so
/// that each application is counted as one query.
pub fn synthesize_state_prep(c: &AmplitudeVector) -> Circuit {
    rotation_cascade(c).as_oracle("U")
}

/// Adds `control` to every gate of `u`. The control qubit must be idle in `u`.
pub fn controlled(u: &Circuit, control: Control) -> Result<Circuit> {
    u.controlled(control)
}
