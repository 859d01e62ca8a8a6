//! Block-encodings whose spectra contain the real or imaginary parts of the
//! amplitudes prepared by a state-preparation oracle.
//!
//! Register layout of the eigenstate preparer `W` is `[ad, da, b]`: an
//! address register and a data register of the oracle's width and a single
//! flag qubit. The Hermitizing combiner adds one leading ancilla `be`.

use serde::{Deserialize, Serialize};

use crate::dense::{self, CMatrix};
use crate::error::{Error, Result};
use crate::statevector::{dense_block, Charge, Circuit, Control, Gate, Layout, QuantumState, Register, DEFAULT_DENSE_CAP};

pub const ADDRESS: &str = "ad";
pub const DATA: &str = "da";
pub const FLAG: &str = "b";
pub const BE_ANCILLA: &str = "be";

/// Which part of the amplitudes the encoded spectrum carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmplitudePart {
    Real,
    Imag,
}

impl std::str::FromStr for AmplitudePart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Self::Real),
            "imag" => Ok(Self::Imag),
            other => Err(Error::InvalidConfig(format!("unknown part `{other}` (expected real|imag)"))),
        }
    }
}

/// A unitary whose top-left block (ancillas in `|0…0⟩`) equals `A / alpha`
/// up to `epsilon` in spectral norm. Ancillas are the leading qubits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockEncoding {
    pub circuit: Circuit,
    pub alpha: f64,
    pub ancillas: usize,
    pub epsilon: f64,
    pub system_width: usize,
}

impl BlockEncoding {
    pub fn new(circuit: Circuit, alpha: f64, ancillas: usize, epsilon: f64) -> Result<Self> {
        if ancillas > circuit.width() {
            return Err(Error::WidthMismatch { expected: circuit.width(), got: ancillas });
        }
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
        }
        let system_width = circuit.width() - ancillas;
        Ok(Self { circuit, alpha, ancillas, epsilon, system_width })
    }

    pub fn width(&self) -> usize {
        self.circuit.width()
    }

    /// `alpha · (⟨0|^a ⊗ I) U (|0⟩^a ⊗ I)`
    pub fn extract_block(&self) -> Result<CMatrix> {
        self.extract_block_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn extract_block_with_cap(&self, cap: usize) -> Result<CMatrix> {
        Ok(dense_block(&self.circuit, self.ancillas, cap)?.scale(self.alpha))
    }
}

/// Free-function form of [`BlockEncoding::extract_block`].
pub fn extract_block(be: &BlockEncoding) -> Result<CMatrix> {
    be.extract_block()
}

/// Eigenvalues of an encoded Hermitian block, with multiplicity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmplitudeSpectrum {
    pub values: Vec<f64>,
    pub kind: AmplitudePart,
}

impl AmplitudeSpectrum {
    pub fn of(be: &BlockEncoding, kind: AmplitudePart) -> Result<Self> {
        let block = be.extract_block()?;
        Ok(Self { values: dense::hermitian_eigenvalues(&block, 1e-9)?, kind })
    }

    /// Multiset inclusion of `targets` within `tol`.
    pub fn contains(&self, targets: &[f64], tol: f64) -> bool {
        dense::multiset_contains(&self.values, targets, tol)
    }
}

/// `[ad, da, b]` for an oracle on `n` qubits.
pub fn w_layout(n: usize) -> Layout {
    Layout::new(vec![Register::new(ADDRESS, n), Register::new(DATA, n), Register::new(FLAG, 1)]).expect("distinct names")
}

/// `[be, ad, da, b]`
pub fn gtilde_layout(n: usize) -> Layout {
    Layout::new(vec![
        Register::new(BE_ANCILLA, 1),
        Register::new(ADDRESS, n),
        Register::new(DATA, n),
        Register::new(FLAG, 1),
    ])
    .expect("distinct names")
}

fn check_oracle(u: &Circuit) -> Result<usize> {
    let n = u.width();
    if n == 0 {
        return Err(Error::RegisterMismatch("state-preparation oracle acts on no qubits".into()));
    }
    Ok(n)
}

/// Eigenstate preparer: `W|k⟩|0⟩|0⟩ = |k⟩((|c⟩+|k⟩)|0⟩ + (|c⟩−|k⟩)|1⟩)/2`.
/// With [`AmplitudePart::Imag`] an `S` on the flag replaces `|k⟩` by `i|k⟩`.
pub fn build_w(u: &Circuit, kind: AmplitudePart) -> Result<Circuit> {
    let n = check_oracle(u)?;
    let layout = w_layout(n);
    let da: Vec<usize> = layout.qubits(DATA)?;
    let b = layout.qubit(FLAG)?;
    let mut w = Circuit::with_layout(&layout);
    w.append_mapped(u, &da)?;
    w.push(Gate::h(b))?;
    if kind == AmplitudePart::Imag {
        w.push(Gate::s(b))?;
    }
    let udag = u.adjoint().embed(layout.width(), &da)?.controlled(Control::one(b))?;
    w.append(&udag)?;
    for (i, &d) in da.iter().enumerate() {
        w.push(Gate::x(d).with_controls([Control::one(i), Control::one(b)]))?;
    }
    w.push(Gate::h(b))?;
    Ok(w)
}

/// `I − 2|0⟩⟨0|` on the data register and flag.
fn push_reflection(c: &mut Circuit, qubits: &[usize]) -> Result<()> {
    c.push(Gate::global_phase(std::f64::consts::PI).with_controls(qubits.iter().map(|&q| Control::zero(q))))?;
    Ok(())
}

/// `G = W S₀ W† Z_b`.
pub fn build_g(u: &Circuit, kind: AmplitudePart) -> Result<Circuit> {
    let n = check_oracle(u)?;
    let w = build_w(u, kind)?;
    let layout = w_layout(n);
    let all: Vec<usize> = (0..layout.width()).collect();
    let b = layout.qubit(FLAG)?;
    let mut refl: Vec<usize> = layout.qubits(DATA)?;
    refl.push(b);
    let mut g = Circuit::with_layout(&layout);
    g.push(Gate::z(b))?;
    g.push_block_adjoint("W", &w, &all, Charge::Inherit, &[])?;
    push_reflection(&mut g, &refl)?;
    g.push_block("W", &w, &all, Charge::Inherit, &[])?;
    Ok(g)
}

/// One-ancilla encoding of `−(G+G†)/2`: on the ancilla branch `0` it runs `G`
/// and on branch `1` it runs `G†`, sharing a single `W S₀ W†` so the oracle is
/// used four times in total.
pub fn build_gtilde(u: &Circuit, kind: AmplitudePart) -> Result<BlockEncoding> {
    let n = check_oracle(u)?;
    let w = build_w(u, kind)?;
    let layout = gtilde_layout(n);
    let be = layout.qubit(BE_ANCILLA)?;
    let b = layout.qubit(FLAG)?;
    let wmap: Vec<usize> = (1..layout.width()).collect();
    let mut refl: Vec<usize> = layout.qubits(DATA)?;
    refl.push(b);
    let mut c = Circuit::with_layout(&layout);
    c.push(Gate::h(be))?;
    c.push(Gate::z(b).with_control(Control::zero(be)))?;
    c.push_block_adjoint("W", &w, &wmap, Charge::Inherit, &[])?;
    push_reflection(&mut c, &refl)?;
    c.push_block("W", &w, &wmap, Charge::Inherit, &[])?;
    c.push(Gate::z(b).with_control(Control::one(be)))?;
    c.push(Gate::h(be))?;
    c.push(Gate::global_phase(std::f64::consts::PI))?;
    BlockEncoding::new(c, 1.0, 1, 0.0)
}

/// `W|k−1⟩_ad|0⟩_da,b` for `1 ≤ k ≤ 2^n`, an eigenvector of the encoded
/// block with eigenvalue `Re c_k` (or `Im c_k`).
pub fn eigenstate_for_k(u: &Circuit, k: usize, kind: AmplitudePart) -> Result<QuantumState> {
    let n = check_oracle(u)?;
    let dim = 1usize << n;
    if k == 0 || k > dim {
        return Err(Error::KOutOfRange { k, n: dim });
    }
    let w = build_w(u, kind)?;
    let layout = w_layout(n);
    // |k−1⟩ on the address register sits above 2n+1−n = n+1 low bits.
    let start = QuantumState::basis(layout, (k - 1) << (n + 1));
    Ok(start.run(&w)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{mat_vec, normal_eigenvalues, multiset_contains_complex};
    use crate::oracle::{synthesize_state_prep, AmplitudeVector};
    use crate::statevector::{dense_unitary, QueryCount, C64};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn oracle(v: &[C64]) -> (AmplitudeVector, Circuit) {
        let a = AmplitudeVector::new(v.to_vec()).unwrap();
        let u = synthesize_state_prep(&a);
        (a, u)
    }

    /// `((|c⟩ + p|k⟩)|0⟩ + (|c⟩ − p|k⟩)|1⟩)/2` on `[da, b]`, `p = 1` or `i`.
    fn eigen_formula(cv: &[C64], k: usize, p: C64) -> Vec<C64> {
        let dim = cv.len();
        let mut out = vec![c(0.0, 0.0); 2 * dim];
        for j in 0..dim {
            out[2 * j] += cv[j] / 2.0;
            out[2 * j + 1] += cv[j] / 2.0;
        }
        out[2 * k] += p / 2.0;
        out[2 * k + 1] -= p / 2.0;
        out
    }

    fn with_address(k: usize, n: usize, local: &[C64]) -> Vec<C64> {
        let mut full = vec![c(0.0, 0.0); 1 << (2 * n + 1)];
        let off = k << (n + 1);
        full[off..off + local.len()].copy_from_slice(local);
        full
    }

    #[test]
    fn w_matches_closed_form_for_every_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = AmplitudeVector::random(4, &mut rng);
        let u = synthesize_state_prep(&a);
        for (kind, p) in [(AmplitudePart::Real, c(1.0, 0.0)), (AmplitudePart::Imag, c(0.0, 1.0))] {
            for k in 0..4 {
                let got = eigenstate_for_k(&u, k + 1, kind).unwrap();
                let want = with_address(k, 2, &eigen_formula(&a.padded(), k, p));
                for (x, y) in got.amplitudes().iter().zip(&want) {
                    assert!((x - y).norm() < 1e-12, "k={k} {kind:?}");
                }
            }
        }
        // ⟨k,k,0|W|k,0,0⟩ = (1 + c_k)/2
        let w = eigenstate_for_k(&u, 3, AmplitudePart::Real).unwrap();
        let idx = (2 << 3) | (2 << 1);
        assert!((w.amplitude(idx) - (c(1.0, 0.0) + a.entries()[2]) / 2.0).norm() < 1e-12);
    }

    #[test]
    fn w_collapses_for_basis_input() {
        let (_, u) = oracle(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = eigenstate_for_k(&u, 1, AmplitudePart::Real).unwrap();
        // |0⟩_ad |0⟩_da |0⟩_b
        assert!((s.amplitude(0) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn g_eigenvalues_for_basis_input() {
        let (_, u) = oracle(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let g = dense_unitary(&build_g(&u, AmplitudePart::Real).unwrap(), DEFAULT_DENSE_CAP).unwrap();
        assert!(dense::unitarity_residual(&g) < 1e-10);
        let ev = normal_eigenvalues(&g);
        assert!(multiset_contains_complex(&ev, &[c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)], 1e-9));
        // Restricted to the k = 1 subspace the eigenvalue is −1.
        let v = eigenstate_for_k(&u, 1, AmplitudePart::Real).unwrap();
        let gv = mat_vec(&g, v.amplitudes());
        for (x, y) in gv.iter().zip(v.amplitudes()) {
            assert!((x + y).norm() < 1e-9);
        }
    }

    #[test]
    fn g_eigenvectors_follow_psi_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = AmplitudeVector::random(4, &mut rng);
        let u = synthesize_state_prep(&a);
        let g = dense_unitary(&build_g(&u, AmplitudePart::Real).unwrap(), DEFAULT_DENSE_CAP).unwrap();
        let cv = a.padded();
        for k in 0..4 {
            let x = cv[k].re;
            let alpha = ((1.0 + x) / 2.0).sqrt();
            let beta = ((1.0 - x) / 2.0).sqrt();
            // Ψ_k0 = (|c⟩+|k⟩)|0⟩/(2α), Ψ_k1 = (|c⟩−|k⟩)|1⟩/(2β)
            let both = eigen_formula(&cv, k, c(1.0, 0.0));
            let psi0: Vec<C64> = both.iter().enumerate().map(|(i, z)| if i % 2 == 0 { z / alpha } else { c(0.0, 0.0) }).collect();
            let psi1: Vec<C64> = both.iter().enumerate().map(|(i, z)| if i % 2 == 1 { z / beta } else { c(0.0, 0.0) }).collect();
            for sign in [1.0, -1.0] {
                let local: Vec<C64> = psi0.iter().zip(&psi1).map(|(p, q)| (p + c(0.0, sign) * q) / 2f64.sqrt()).collect();
                let v = with_address(k, 2, &local);
                let lambda = c(-x, sign * (1.0 - x * x).sqrt());
                let gv = mat_vec(&g, &v);
                let res: f64 = gv.iter().zip(&v).map(|(p, q)| (p - lambda * q).norm_sqr()).sum::<f64>().sqrt();
                assert!(res < 1e-9, "k={k} sign={sign} residual {res}");
            }
        }
    }

    #[test]
    fn gtilde_spectrum_and_queries() {
        let (_, u) = oracle(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let be = build_gtilde(&u, AmplitudePart::Real).unwrap();
        assert_eq!(be.circuit.queries(), QueryCount { u: 2, udag: 2 });
        assert_eq!(be.circuit.queries().total(), 4);
        let block = be.extract_block().unwrap();
        assert!(dense::hermiticity_residual(&block) < 1e-10);
        let spec = AmplitudeSpectrum::of(&be, AmplitudePart::Real).unwrap();
        assert!(spec.contains(&[1.0, 0.0], 1e-9));

        let (_, ui) = oracle(&[c(0.0, 1.0), c(0.0, 0.0)]);
        let bei = build_gtilde(&ui, AmplitudePart::Imag).unwrap();
        let spec = AmplitudeSpectrum::of(&bei, AmplitudePart::Imag).unwrap();
        assert!(spec.contains(&[1.0, 0.0], 1e-9));
    }

    #[test]
    fn eigenstate_is_eigenvector_of_block() {
        let (a, u) = oracle(&[c(0.3, 0.4), c(-0.5, 0.1), c(0.2, -0.6), c(0.0, 0.3)]);
        let a = AmplitudeVector::normalize(a.entries().to_vec()).unwrap();
        let u2 = synthesize_state_prep(&a);
        assert_eq!(u.width(), u2.width());
        for kind in [AmplitudePart::Real, AmplitudePart::Imag] {
            let be = build_gtilde(&u2, kind).unwrap();
            let block = be.extract_block().unwrap();
            for k in 0..4 {
                let v = eigenstate_for_k(&u2, k + 1, kind).unwrap();
                let want = if kind == AmplitudePart::Real { a.entries()[k].re } else { a.entries()[k].im };
                let bv = mat_vec(&block, v.amplitudes());
                let res: f64 = bv.iter().zip(v.amplitudes()).map(|(p, q)| (p - q * want).norm_sqr()).sum::<f64>().sqrt();
                assert!(res < 1e-9);
            }
        }
        assert!(matches!(eigenstate_for_k(&u2, 0, AmplitudePart::Real), Err(Error::KOutOfRange { .. })));
        assert!(matches!(eigenstate_for_k(&u2, 5, AmplitudePart::Real), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn zero_amplitude_gives_null_eigenvalue() {
        let (_, u) = oracle(&[c(0.6, 0.0), c(0.0, 0.8)]);
        let be = build_gtilde(&u, AmplitudePart::Real).unwrap();
        let block = be.extract_block().unwrap();
        let v = eigenstate_for_k(&u, 2, AmplitudePart::Real).unwrap();
        let bv = mat_vec(&block, v.amplitudes());
        assert!(bv.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn uniform_superposition_of_eigenstates_is_normalized() {
        let (_, u) = oracle(&[c(0.5, 0.5), c(0.5, -0.5)]);
        let mut sum = vec![c(0.0, 0.0); 8];
        for k in 1..=2 {
            let v = eigenstate_for_k(&u, k, AmplitudePart::Real).unwrap();
            for (s, z) in sum.iter_mut().zip(v.amplitudes()) {
                *s += z / 2f64.sqrt();
            }
        }
        let n: f64 = sum.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_block() {
        let be = BlockEncoding::new(Circuit::new(3), 1.0, 1, 0.0).unwrap();
        let b = be.extract_block().unwrap();
        assert!((b - CMatrix::identity(4, 4)).norm() < 1e-15);
    }
}
