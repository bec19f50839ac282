//! Process representations of a qubit channel and their conversions.
//!
//! A channel E is carried in any of four equivalent forms:
//!
//! * [`KrausSet`] — operators {K_k} with E(ρ) = Σ K_k ρ K_k†,
//! * [`ChiMatrix`] — the Hermitian coefficient matrix of E in the fixed
//!   operator basis {I, τ₁, τ₂, τ₃}: E(ρ) = Σ χ_mn τ_m ρ τ_n†,
//! * [`PauliTransferMatrix`] — the real 4x4 matrix acting on (1, S₁, S₂, S₃),
//! * [`ChoiMatrix`] — the state (E ⊗ id)|Φ⁺><Φ⁺|, positive semidefinite
//!   exactly when E is completely positive.
//!
//! All conversions are exact linear bijections. The eigenvalues of χ are
//! invariant under unitary rotations before and after the channel and
//! classify the decoherence type; the Bloch map extracted from the transfer
//! matrix describes the image ellipsoid of the Poincaré sphere.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, re};
use crate::qstate::{operator_basis, DensityMatrix, StokesVector};

/// Tolerance on Σ K†K = I for a trace-preserving Kraus set.
pub const TRACE_PRESERVING_TOL: f64 = 1e-10;
/// Hermiticity tolerance for χ and Choi matrices.
pub const PROCESS_HERMITICITY_TOL: f64 = 1e-10;

/// Operator-sum description of a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    ops: Vec<Matrix2<C64>>,
}

impl KrausSet {
    /// Validates trace preservation: Σ K†K = I within 1e-10.
    pub fn new(ops: Vec<Matrix2<C64>>) -> Result<Self> {
        let sum: Matrix2<C64> = ops.iter().map(|k| k.adjoint() * k).sum();
        let residual = (sum - Matrix2::identity()).norm();
        if residual > TRACE_PRESERVING_TOL {
            return Err(Error::NotTracePreserving(residual));
        }
        Ok(Self { ops })
    }

    pub fn operators(&self) -> &[Matrix2<C64>] {
        &self.ops
    }

    /// Operators with Frobenius norm above 1e-12; an n-mode channel occupies
    /// n of the tracked temporal modes.
    pub fn nonzero_count(&self) -> usize {
        self.ops.iter().filter(|k| k.norm() > 1e-12).count()
    }

    /// E(ρ) = Σ K ρ K† on a raw matrix.
    pub fn apply_raw(&self, m: &Matrix2<C64>) -> Matrix2<C64> {
        self.ops.iter().map(|k| k * m * k.adjoint()).sum()
    }

    /// E(ρ) on a state.
    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::new_clipped(&self.apply_raw(rho.matrix()))
            .expect("a trace-preserving channel maps states to states")
    }

    /// Expansion in the τ basis: K_j = Σ_m a_jm τ_m, χ = Σ_j a_j a_j†.
    pub fn to_chi(&self) -> ChiMatrix {
        let tau = operator_basis();
        let mut chi = Matrix4::<C64>::zeros();
        for k in &self.ops {
            let mut a = [C64::default(); 4];
            for (coeff, t) in a.iter_mut().zip(tau.iter()) {
                *coeff = (t.adjoint() * k).trace() * re(0.5);
            }
            for m in 0..4 {
                for n in 0..4 {
                    chi[(m, n)] += a[m] * a[n].conj();
                }
            }
        }
        ChiMatrix::new(chi).expect("operator-sum expansion is Hermitian")
    }
}

/// χ matrix of a channel in the basis {I, τ₁, τ₂, τ₃}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiMatrix {
    m: Matrix4<C64>,
}

impl ChiMatrix {
    /// Validates Hermiticity within 1e-10. Positivity and unit trace hold
    /// only for physical(ized) matrices and are separate queries.
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let residual = crate::linalg::max_abs(&(m - m.adjoint()));
        if residual > PROCESS_HERMITICITY_TOL {
            return Err(Error::NotHermitian(residual));
        }
        // Store the exactly Hermitian part so downstream eigensolves are clean.
        Ok(Self {
            m: linalg::hermitize4(&m),
        })
    }

    /// The identity process: χ = diag(1, 0, 0, 0).
    pub fn identity() -> Self {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = re(1.0);
        Self { m }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// E(ρ) = Σ χ_mn τ_m ρ τ_n on a raw matrix. The result is only a state
    /// when χ is physical; use [`ChiMatrix::apply`] for validated output.
    pub fn apply_raw(&self, rho: &Matrix2<C64>) -> Matrix2<C64> {
        let tau = operator_basis();
        let mut out = Matrix2::zeros();
        for m in 0..4 {
            for n in 0..4 {
                if self.m[(m, n)].norm_sqr() == 0.0 {
                    continue;
                }
                out += (tau[m] * rho * tau[n]) * self.m[(m, n)];
            }
        }
        out
    }

    /// E(ρ) applied to a state, validated (clipping roundoff negativity).
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::new_clipped(&self.apply_raw(rho.matrix()))
    }

    /// Eigenvalues sorted descending; their sum is trace(χ).
    pub fn eigenvalues(&self) -> [f64; 4] {
        linalg::eigvals_desc4(&self.m)
    }

    /// r_ij = ½ tr(τ_i E(τ_j)).
    pub fn to_ptm(&self) -> PauliTransferMatrix {
        let tau = operator_basis();
        let mut r = Matrix4::<f64>::zeros();
        for j in 0..4 {
            let image = self.apply_raw(&tau[j]);
            for i in 0..4 {
                r[(i, j)] = ((tau[i] * image).trace() * re(0.5)).re;
            }
        }
        PauliTransferMatrix { r }
    }

    /// Basis change to the Choi state (E ⊗ id)|Φ⁺><Φ⁺|; exact bijection that
    /// preserves eigenvalues, so χ is PSD iff the Choi matrix is.
    pub fn to_choi(&self) -> ChoiMatrix {
        let b = choi_basis();
        ChoiMatrix {
            m: linalg::hermitize4(&(b * self.m * b.adjoint())),
        }
    }

    /// Bloch map (M, t): rows 1-3 of the transfer matrix.
    pub fn bloch_map(&self) -> BlochMap {
        self.to_ptm().bloch_map()
    }

    /// Singular values of the Bloch map, sorted descending: the principal
    /// radii of the image of the unit Poincaré sphere.
    pub fn ellipsoid_radii(&self) -> [f64; 3] {
        self.bloch_map().radii()
    }

    /// Frobenius distance of E(I/2) from I/2.
    pub fn unitality_residual(&self) -> f64 {
        let half = Matrix2::identity() * re(0.5);
        (self.apply_raw(&half) - half).norm()
    }

    /// True when E(I/2) stays within `tol` (Frobenius) of I/2.
    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_residual() <= tol
    }

    /// True when the smallest eigenvalue is above -tol.
    pub fn is_completely_positive(&self, tol: f64) -> bool {
        self.eigenvalues()[3] >= -tol
    }

    /// Frobenius distance of Σ χ_mn τ_n τ_m from the identity; zero exactly
    /// for trace-preserving processes. The artificial-counts ML search does
    /// not enforce trace preservation, so this is its quality diagnostic.
    pub fn tp_residual(&self) -> f64 {
        let tau = operator_basis();
        let mut sum = Matrix2::<C64>::zeros();
        for m in 0..4 {
            for n in 0..4 {
                sum += (tau[n] * tau[m]) * self.m[(m, n)];
            }
        }
        (sum - Matrix2::identity()).norm()
    }
}

/// Columns of the χ → Choi basis change: (τ_m ⊗ I)|Φ⁺> as 4-vectors.
fn choi_basis() -> Matrix4<C64> {
    let tau = operator_basis();
    let rsqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    Matrix4::from_fn(|row, col| {
        // Row-major vec of τ_col scaled by 1/√2: component |jk> picks τ[j,k].
        tau[col][(row / 2, row % 2)] * re(rsqrt2)
    })
}

/// Real 4x4 transfer matrix acting on the extended Stokes vector
/// (1, S₁, S₂, S₃). Row 0 is (1, 0, 0, 0) for trace-preserving maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTransferMatrix {
    r: Matrix4<f64>,
}

impl PauliTransferMatrix {
    pub fn new(r: Matrix4<f64>) -> Self {
        Self { r }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.r
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        (self.r[(0, 0)] - 1.0).abs() <= tol
            && self.r[(0, 1)].abs() <= tol
            && self.r[(0, 2)].abs() <= tol
            && self.r[(0, 3)].abs() <= tol
    }

    /// Exact inverse of [`ChiMatrix::to_ptm`], through the Choi form:
    /// C = ¼ Σ_ij r_ij (τ_i ⊗ τ_jᵀ).
    pub fn to_chi(&self) -> ChiMatrix {
        let tau = operator_basis();
        let mut choi = Matrix4::<C64>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                choi += tau[i].kronecker(&tau[j].transpose()) * re(0.25 * self.r[(i, j)]);
            }
        }
        ChoiMatrix {
            m: linalg::hermitize4(&choi),
        }
        .to_chi()
    }

    /// Affine Bloch action: linear block and translation column.
    pub fn bloch_map(&self) -> BlochMap {
        let linear = Matrix3::from_fn(|i, j| self.r[(i + 1, j + 1)]);
        let translation = Vector3::new(self.r[(1, 0)], self.r[(2, 0)], self.r[(3, 0)]);
        BlochMap {
            linear,
            translation,
        }
    }
}

/// Choi state of the channel, trace 1 for trace-preserving χ of trace 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiMatrix {
    m: Matrix4<C64>,
}

impl ChoiMatrix {
    pub fn new(m: Matrix4<C64>) -> Result<Self> {
        let residual = crate::linalg::max_abs(&(m - m.adjoint()));
        if residual > PROCESS_HERMITICITY_TOL {
            return Err(Error::NotHermitian(residual));
        }
        Ok(Self {
            m: linalg::hermitize4(&m),
        })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        linalg::eigvals_desc4(&self.m)
    }

    /// Inverse basis change back to the χ form.
    pub fn to_chi(&self) -> ChiMatrix {
        let b = choi_basis();
        ChiMatrix {
            m: linalg::hermitize4(&(b.adjoint() * self.m * b)),
        }
    }
}

/// Affine action S ↦ M·S + t on Stokes vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochMap {
    pub linear: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl BlochMap {
    pub fn apply(&self, s: &StokesVector) -> StokesVector {
        StokesVector::from_vector(self.linear * s.as_vector() + self.translation)
    }

    /// Singular values of the linear block, descending.
    pub fn radii(&self) -> [f64; 3] {
        let mut sv = [0.0; 3];
        let svd = self.linear.svd(false, false);
        for (dst, src) in sv.iter_mut().zip(svd.singular_values.iter()) {
            *dst = *src;
        }
        sv.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
        sv
    }
}

/// (tr sqrt(sqrt(χ₁) χ₂ sqrt(χ₁)))² after normalizing both traces to 1.
/// Negative eigenvalues within tolerance are clipped to zero before the
/// square roots. Symmetric, in [0, 1], and 1 only on equal arguments.
pub fn process_fidelity(a: &ChiMatrix, b: &ChiMatrix) -> Result<f64> {
    let (ta, tb) = (a.trace(), b.trace());
    if ta <= 0.0 || tb <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "process fidelity needs positive traces (got {ta:.3e}, {tb:.3e})"
        )));
    }
    let na = a.m / re(ta);
    let nb = b.m / re(tb);
    Ok(linalg::fidelity4(&na, &nb))
}
