//! Small dense linear-algebra helpers used by the oracles and checks.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::statevector::C64;

pub type CMatrix = DMatrix<C64>;

/// Max-abs entry of `m - m†`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-abs entry of `U†U - I`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    let d = m.adjoint() * m - CMatrix::identity(m.nrows(), m.ncols());
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix, tol: f64) -> Result<(Vec<f64>, CMatrix)> {
    let r = hermiticity_residual(m);
    if r > tol {
        return Err(Error::NonHermitian(r));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(m: &CMatrix, tol: f64) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m, tol)?.0)
}

/// Eigenvalues of a normal matrix through a generic Hermitian combination of
/// its Hermitian and anti-Hermitian parts. Each eigenvalue is read off as the
/// Rayleigh quotient of a joint eigenvector.
pub fn normal_eigenvalues(m: &CMatrix) -> Vec<C64> {
    let h1 = (m + m.adjoint()).scale(0.5);
    let h2 = (m - m.adjoint()).map(|z| z * C64::new(0.0, -0.5));
    let t = std::f64::consts::E / 7.0;
    let comb = &h1 + h2.scale(t);
    let eig = SymmetricEigen::new(comb);
    let v = eig.eigenvectors;
    (0..v.ncols())
        .map(|j| {
            let col = v.column(j);
            (col.adjoint() * m * col)[(0, 0)]
        })
        .collect()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Whether every target can be paired with a distinct value within `tol`.
/// Targets are matched in ascending order against the nearest unused value.
pub fn multiset_contains(values: &[f64], targets: &[f64], tol: f64) -> bool {
    let mut used = vec![false; values.len()];
    let mut sorted = targets.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().all(|t| {
        let best = values
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()));
        match best {
            Some((i, v)) if (v - t).abs() <= tol => {
                used[i] = true;
                true
            }
            _ => false,
        }
    })
}

/// Complex variant of [`multiset_contains`].
pub fn multiset_contains_complex(values: &[C64], targets: &[C64], tol: f64) -> bool {
    let mut used = vec![false; values.len()];
    targets.iter().all(|t| {
        let best = values
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - t).norm().total_cmp(&(b.1 - t).norm()));
        match best {
            Some((i, v)) if (v - t).norm() <= tol => {
                used[i] = true;
                true
            }
            _ => false,
        }
    })
}

pub fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (m * DVector::from_column_slice(v)).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_eigenvalues_of_rotation() {
        // Rotation by 0.4: eigenvalues e^{±0.4i}.
        let (s, c) = 0.4f64.sin_cos();
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)]);
        let ev = normal_eigenvalues(&m);
        let want = [C64::from_polar(1.0, 0.4), C64::from_polar(1.0, -0.4)];
        assert!(multiset_contains_complex(&ev, &want, 1e-12));
    }

    #[test]
    fn multiset_respects_multiplicity() {
        assert!(multiset_contains(&[0.1, 0.1, 0.5], &[0.1, 0.1], 1e-12));
        assert!(!multiset_contains(&[0.1, 0.5], &[0.1, 0.1], 1e-12));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(hermitian_eigen(&m, 1e-9), Err(Error::NonHermitian(_))));
        assert!((spectral_norm(&m) - 1.0).abs() < 1e-12);
    }
}
