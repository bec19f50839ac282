//! Polarization-state representations.
//!
//! A qubit polarization state is carried either as a point of the Poincaré
//! ball ([`StokesVector`]) or as a 2x2 density matrix ([`DensityMatrix`]) in
//! the {|h>, |v>} basis. The two are related through the fixed operator basis
//! returned by [`operator_basis`]: ρ = (I + S₁τ₁ + S₂τ₂ + S₃τ₃)/2, with
//! `τ₁ = diag(1,-1)`, `τ₂ = [[0,1],[1,0]]`, `τ₃ = [[0,-i],[i,0]]` so that the
//! Stokes index i always pairs with τᵢ (S₁ ↔ h/v, S₂ ↔ ±45°, S₃ ↔ circular).
//!
//! Global phases of pure states are physically meaningless; equality of
//! states is always judged through their density matrices.

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64 as C64;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, c, re};

/// Entrywise Hermiticity tolerance for density matrices.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace-one tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalue floor: eigenvalues above -PSD_TOL count as non-negative.
pub const PSD_TOL: f64 = 1e-10;
/// Slack on the degree of polarization of a physical state.
pub const DOP_TOL: f64 = 1e-9;

/// The operator basis {I, τ₁, τ₂, τ₃} aligned with the Stokes axes.
pub fn operator_basis() -> [Matrix2<C64>; 4] {
    [
        Matrix2::identity(),
        Matrix2::new(re(1.0), re(0.0), re(0.0), re(-1.0)),
        Matrix2::new(re(0.0), re(1.0), re(1.0), re(0.0)),
        Matrix2::new(re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)),
    ]
}

/// A point in (or on) the Poincaré ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    /// Linear horizontal/vertical component.
    pub s1: f64,
    /// Linear ±45° component.
    pub s2: f64,
    /// Circular component.
    pub s3: f64,
}

impl StokesVector {
    pub fn new(s1: f64, s2: f64, s3: f64) -> Self {
        Self { s1, s2, s3 }
    }

    /// D = sqrt(S₁² + S₂² + S₃²); 1 for pure states, < 1 for partially
    /// polarized ones.
    pub fn degree_of_polarization(&self) -> f64 {
        self.as_vector().norm()
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.s1, self.s2, self.s3)
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// ρ = (I + Σ Sᵢτᵢ)/2. Fails if the point lies outside the ball.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let d = self.degree_of_polarization();
        if d > 1.0 + DOP_TOL {
            return Err(Error::UnphysicalStokes(d));
        }
        let tau = operator_basis();
        let m = (tau[0] + tau[1] * re(self.s1) + tau[2] * re(self.s2) + tau[3] * re(self.s3))
            * re(0.5);
        // Clip the tiny negative eigenvalue a boundary state can acquire
        // through roundoff, keeping construction infallible inside the ball.
        DensityMatrix::new(m)
            .or_else(|_| DensityMatrix::new_clipped(&m))
    }
}

/// A 2x2 Hermitian, unit-trace, positive-semidefinite matrix in the
/// {|h>, |v>} basis. Construction validates all three invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    m: Matrix2<C64>,
}

impl DensityMatrix {
    pub fn new(m: Matrix2<C64>) -> Result<Self> {
        let herm = crate::linalg::max_abs(&(m - m.adjoint()));
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "Hermiticity residual {herm:.3e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let eigs = linalg::eigvals_desc2(&m);
        if eigs[1] < -PSD_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {:.3e}",
                eigs[1]
            )));
        }
        Ok(Self { m })
    }

    /// Hermitize, clip negative eigenvalues to zero and renormalize. Used to
    /// absorb roundoff from operations that are PSD in exact arithmetic.
    pub(crate) fn new_clipped(m: &Matrix2<C64>) -> Result<Self> {
        let h = (m + m.adjoint()) * re(0.5);
        let eig = nalgebra::SymmetricEigen::new(h);
        let clipped = eig.eigenvalues.map(|x| x.max(0.0));
        let tr: f64 = clipped.iter().sum();
        if tr <= 0.0 {
            return Err(Error::InvalidDensity("non-positive trace".into()));
        }
        let d = Matrix2::from_diagonal(&clipped.map(|x| re(x / tr)));
        Ok(Self {
            m: eig.eigenvectors * d * eig.eigenvectors.adjoint(),
        })
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.m
    }

    /// I/2, the fully depolarized state at the center of the ball.
    pub fn maximally_mixed() -> Self {
        Self {
            m: Matrix2::identity() * re(0.5),
        }
    }

    /// Sᵢ = tr(τᵢ ρ); exact inverse of [`StokesVector::to_density`].
    pub fn to_stokes(&self) -> StokesVector {
        let tau = operator_basis();
        StokesVector::new(
            (tau[1] * self.m).trace().re,
            (tau[2] * self.m).trace().re,
            (tau[3] * self.m).trace().re,
        )
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        linalg::eigvals_desc2(&self.m)
    }

    /// Uhlmann fidelity (tr sqrt(sqrt(ρ₁) ρ₂ sqrt(ρ₁)))²; 1 iff equal,
    /// 0 for orthogonal states, symmetric in its arguments.
    pub fn fidelity(&self, other: &Self) -> f64 {
        linalg::fidelity2(&self.m, &other.m)
    }
}

/// A normalized two-component amplitude vector. The global phase carries no
/// physical meaning and is left unconstrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amplitudes: Vector2<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vector2<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &Vector2<C64> {
        &self.amplitudes
    }

    /// |ψ><ψ| as a validated density matrix.
    pub fn density(&self) -> DensityMatrix {
        let m = self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::new_clipped(&m).expect("outer product of a unit vector is a state")
    }

    /// |<self|other>|².
    pub fn overlap(&self, other: &Self) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// The six canonical polarization states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    /// Horizontal, (1, 0).
    H,
    /// Vertical, (0, 1).
    V,
    /// +45°, (1, 1)/√2.
    P,
    /// -45°, (-1, 1)/√2.
    M,
    /// Right circular, (1, i)/√2.
    R,
    /// Left circular, (i, 1)/√2.
    L,
}

impl StateLabel {
    pub const ALL: [StateLabel; 6] = [
        StateLabel::H,
        StateLabel::V,
        StateLabel::P,
        StateLabel::M,
        StateLabel::R,
        StateLabel::L,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StateLabel::H => "h",
            StateLabel::V => "v",
            StateLabel::P => "p",
            StateLabel::M => "m",
            StateLabel::R => "r",
            StateLabel::L => "l",
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h" => Ok(StateLabel::H),
            "v" => Ok(StateLabel::V),
            "p" => Ok(StateLabel::P),
            "m" => Ok(StateLabel::M),
            "r" => Ok(StateLabel::R),
            "l" => Ok(StateLabel::L),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// The canonical state for a label:
/// h=(1,0), v=(0,1), p=(1,1)/√2, m=(-1,1)/√2, r=(1,i)/√2, l=(i,1)/√2.
pub fn canonical_state(label: StateLabel) -> PureState {
    let rsqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let amps = match label {
        StateLabel::H => Vector2::new(re(1.0), re(0.0)),
        StateLabel::V => Vector2::new(re(0.0), re(1.0)),
        StateLabel::P => Vector2::new(re(rsqrt2), re(rsqrt2)),
        StateLabel::M => Vector2::new(re(-rsqrt2), re(rsqrt2)),
        StateLabel::R => Vector2::new(re(rsqrt2), c(0.0, rsqrt2)),
        StateLabel::L => Vector2::new(c(0.0, rsqrt2), re(rsqrt2)),
    };
    PureState::new(amps).expect("canonical states are normalized")
}
