//! Small dense-matrix helpers shared across the crate: Hermitian
//! eigendecompositions with descending eigenvalue order, positive-semidefinite
//! square roots, and the Uhlmann fidelity.

use nalgebra::{Matrix2, Matrix3, Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// (m + m†)/2, discarding the anti-Hermitian part accumulated by roundoff.
pub(crate) fn hermitize4(m: &Matrix4<C64>) -> Matrix4<C64> {
    (m + m.adjoint()) * re(0.5)
}

/// Largest entry modulus of a complex matrix.
pub(crate) fn max_abs<R, C, S>(m: &nalgebra::Matrix<C64, R, C, S>) -> f64
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::Storage<C64, R, C>,
{
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

macro_rules! herm_helpers {
    ($eig:ident, $sqrt:ident, $fid:ident, $n:literal, $mat:ty) => {
        /// Real eigenvalues of a Hermitian matrix, sorted descending.
        pub(crate) fn $eig(m: &$mat) -> [f64; $n] {
            let eig = SymmetricEigen::new(*m);
            let mut vals = [0.0; $n];
            for (dst, src) in vals.iter_mut().zip(eig.eigenvalues.iter()) {
                *dst = *src;
            }
            vals.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
            vals
        }

        /// Square root of a Hermitian PSD matrix. Eigenvalues that dip below
        /// zero through roundoff are clipped to zero before the root.
        pub(crate) fn $sqrt(m: &$mat) -> $mat {
            let eig = SymmetricEigen::new(*m);
            let d = eig.eigenvalues.map(|x| re(x.max(0.0).sqrt()));
            &eig.eigenvectors * <$mat>::from_diagonal(&d) * eig.eigenvectors.adjoint()
        }

        /// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2 of two Hermitian
        /// PSD unit-trace matrices.
        pub(crate) fn $fid(a: &$mat, b: &$mat) -> f64 {
            let ra = $sqrt(a);
            let inner = ra * b * ra;
            let eig = SymmetricEigen::new(hermitize_generic(&inner));
            let tr: f64 = eig.eigenvalues.iter().map(|x| x.max(0.0).sqrt()).sum();
            (tr * tr).min(1.0)
        }
    };
}

fn hermitize_generic<D, S>(m: &nalgebra::SquareMatrix<C64, D, S>) -> nalgebra::OMatrix<C64, D, D>
where
    D: nalgebra::DimName,
    S: nalgebra::Storage<C64, D, D>,
    nalgebra::DefaultAllocator: nalgebra::allocator::Allocator<D, D>,
{
    (m.clone_owned() + m.adjoint()) * re(0.5)
}

herm_helpers!(eigvals_desc2, sqrt_psd2, fidelity2, 2, Matrix2<C64>);
herm_helpers!(eigvals_desc4, sqrt_psd4, fidelity4, 4, Matrix4<C64>);

/// 2-norm condition number of a real 3x3 matrix.
pub(crate) fn condition3(m: &Matrix3<f64>) -> f64 {
    let sv = m.svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// 2-norm condition number of a real 4x4 matrix.
pub(crate) fn condition4(m: &Matrix4<f64>) -> f64 {
    let sv = m.svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
