//! Nonlinear transformation of complex amplitudes on a dense statevector
//! simulator.
//!
//! Given a state-preparation circuit `U` with `U|0⟩ = Σ c_k |k⟩`, the
//! crate builds block-encodings whose spectra are `Re c_k` and `Im c_k`,
//! applies polynomials to them with quantum singular value transformation,
//! and recombines the results into a state proportional to
//! `Σ (P(Re c_k) + Q(Im c_k)) |k⟩`.

pub mod amplify;
pub mod block_encoding;
pub mod dense;
pub mod error;
pub mod experiment;
pub mod ntca;
pub mod oracle;
pub mod poly;
pub mod qnn;
pub mod qsvt;
pub mod statevector;

pub use error::{Error, Result};
