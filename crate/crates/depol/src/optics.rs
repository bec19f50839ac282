//! Jones optics and the polarization ⊗ temporal-mode model of birefringent
//! crystals.
//!
//! A crystal of length L and index difference Δn delays the wave packet of
//! one linear polarization by t = L·Δn/c. When t exceeds the photon
//! coherence time the delayed and undelayed packets occupy orthogonal
//! temporal modes; this module models that regime exactly, tracking the
//! polarization jointly with three discrete time bins {t₀, t₁, t₂} — enough
//! for any train of two crystals. Wave plates act on the polarization alone
//! and never couple different time bins.
//!
//! Jones conventions (fast axis horizontal at zero angle, global phases
//! dropped): H(α) = [[cos2α, sin2α], [sin2α, -cos2α]] and
//! Q(φ) = R(φ)·diag(1, i)·R(-φ). The crystal phases are calibrated per
//! scheme so that the zero-angle channel is exactly the identity:
//! scheme I uses δ₁ = δ₂ = 0, scheme II uses δ₁ = -π/2 on the first crystal
//! to cancel Q(0) = diag(1, i).

use nalgebra::{Matrix2, Matrix3, Matrix6};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{c, re};
use crate::process::KrausSet;
use crate::qstate::DensityMatrix;

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Retardance of a wave plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateKind {
    Half,
    Quarter,
}

/// A wave plate with its fast axis at `angle` radians from horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePlate {
    pub kind: PlateKind,
    pub angle: f64,
}

impl WavePlate {
    pub fn half(angle: f64) -> Self {
        Self {
            kind: PlateKind::Half,
            angle,
        }
    }

    pub fn quarter(angle: f64) -> Self {
        Self {
            kind: PlateKind::Quarter,
            angle,
        }
    }

    pub fn jones(&self) -> Matrix2<C64> {
        match self.kind {
            PlateKind::Half => hwp_jones(self.angle),
            PlateKind::Quarter => qwp_jones(self.angle),
        }
    }
}

/// H(α) = [[cos2α, sin2α], [sin2α, -cos2α]]; unitary with H(α)² = I.
pub fn hwp_jones(angle: f64) -> Matrix2<C64> {
    let (s, co) = (2.0 * angle).sin_cos();
    Matrix2::new(re(co), re(s), re(s), re(-co))
}

fn rotation(angle: f64) -> Matrix2<C64> {
    let (s, co) = angle.sin_cos();
    Matrix2::new(re(co), re(s), re(-s), re(co))
}

/// Q(φ) = R(φ)·diag(1, i)·R(-φ); Q(0) = diag(1, i).
pub fn qwp_jones(angle: f64) -> Matrix2<C64> {
    let retarder = Matrix2::new(re(1.0), re(0.0), re(0.0), c(0.0, 1.0));
    rotation(angle) * retarder * rotation(-angle)
}

/// The polarization axis a crystal delays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayedAxis {
    Horizontal,
    Vertical,
}

/// A birefringent crystal: geometry plus the sub-walk-off phase its delayed
/// branch acquires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalSpec {
    pub delayed_axis: DelayedAxis,
    /// Crystal length, millimetres.
    pub length_mm: f64,
    /// Refractive index difference Δn.
    pub index_difference: f64,
    /// Phase e^{iδ} applied to the delayed branch.
    pub birefringent_phase: f64,
}

impl CrystalSpec {
    pub fn new(
        delayed_axis: DelayedAxis,
        length_mm: f64,
        index_difference: f64,
        birefringent_phase: f64,
    ) -> Result<Self> {
        if !length_mm.is_finite() || length_mm <= 0.0 {
            return Err(Error::InvalidCrystal(format!(
                "length {length_mm} mm must be positive"
            )));
        }
        if !index_difference.is_finite() || index_difference <= 0.0 {
            return Err(Error::InvalidCrystal(format!(
                "index difference {index_difference} must be positive"
            )));
        }
        Ok(Self {
            delayed_axis,
            length_mm,
            index_difference,
            birefringent_phase,
        })
    }

    /// Temporal walk-off t = L·Δn/c in seconds.
    pub fn walkoff_time(&self) -> f64 {
        self.length_mm * 1e-3 * self.index_difference / SPEED_OF_LIGHT
    }

    /// Complete separation requires t strictly greater than the coherence
    /// time of the wave packet.
    pub fn check_complete_walkoff(&self, coherence_time: f64) -> bool {
        self.walkoff_time() > coherence_time
    }
}

const TIME_MODES: usize = 3;

/// Index of |pol, t_k> in the 6-dimensional product space.
fn mode_index(pol: usize, t: usize) -> usize {
    pol * TIME_MODES + t
}

/// Jones ⊗ I₃: wave plates act identically on every time bin.
fn plate_operator(jones: &Matrix2<C64>) -> Matrix6<C64> {
    jones.kronecker(&Matrix3::identity())
}

/// The crystal operator: the delayed polarization moves one bin later and
/// picks up e^{iδ}; the other polarization passes untouched. Amplitude
/// already in the last bin of the delayed branch has nowhere to go — the
/// operator annihilates it, and callers must check for that first.
fn crystal_operator(axis: DelayedAxis, phase: f64) -> Matrix6<C64> {
    let delayed = match axis {
        DelayedAxis::Horizontal => 0,
        DelayedAxis::Vertical => 1,
    };
    let passing = 1 - delayed;
    let ph = C64::from_polar(1.0, phase);
    let mut m = Matrix6::zeros();
    for t in 0..TIME_MODES {
        m[(mode_index(passing, t), mode_index(passing, t))] = re(1.0);
    }
    for t in 0..TIME_MODES - 1 {
        m[(mode_index(delayed, t + 1), mode_index(delayed, t))] = ph;
    }
    m
}

/// Joint state of polarization and the three temporal modes: a 6x6 density
/// matrix indexed |pol, t> with pol ∈ {h, v}, t ∈ {t₀, t₁, t₂}.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalPolState {
    m: Matrix6<C64>,
}

impl TemporalPolState {
    pub fn new(m: Matrix6<C64>) -> Result<Self> {
        let herm = crate::linalg::max_abs(&(m - m.adjoint()));
        if herm > 1e-12 {
            return Err(Error::InvalidDensity(format!(
                "Hermiticity residual {herm:.3e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let eig = nalgebra::SymmetricEigen::new(m);
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { m })
    }

    /// A polarization state parked in the earliest time bin t₀.
    pub fn from_polarization(rho: &DensityMatrix) -> Self {
        let mut t0 = Matrix3::<C64>::zeros();
        t0[(0, 0)] = re(1.0);
        Self {
            m: rho.matrix().kronecker(&t0),
        }
    }

    pub fn matrix(&self) -> &Matrix6<C64> {
        &self.m
    }

    /// (Jones ⊗ I) conjugation; trace preserved exactly.
    pub fn apply_plate(&self, plate: &WavePlate) -> Self {
        let op = plate_operator(&plate.jones());
        Self {
            m: op * self.m * op.adjoint(),
        }
    }

    /// Shift the delayed polarization one time bin later. Errors when that
    /// would push population past t₂ (the train is not representable here).
    pub fn apply_crystal(&self, crystal: &CrystalSpec) -> Result<Self> {
        let delayed = match crystal.delayed_axis {
            DelayedAxis::Horizontal => 0,
            DelayedAxis::Vertical => 1,
        };
        let last = mode_index(delayed, TIME_MODES - 1);
        if self.m[(last, last)].re > 1e-12 {
            return Err(Error::ModeOverflow);
        }
        let op = crystal_operator(crystal.delayed_axis, crystal.birefringent_phase);
        Ok(Self {
            m: op * self.m * op.adjoint(),
        })
    }

    /// Partial trace over the temporal modes: what a detector blind to
    /// arrival time sees.
    pub fn polarization(&self) -> DensityMatrix {
        let mut rho = Matrix2::<C64>::zeros();
        for p in 0..2 {
            for q in 0..2 {
                for t in 0..TIME_MODES {
                    rho[(p, q)] += self.m[(mode_index(p, t), mode_index(q, t))];
                }
            }
        }
        DensityMatrix::new_clipped(&rho).expect("partial trace of a state is a state")
    }
}

/// One of the two depolarizer layouts, with its control angle in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelScheme {
    /// Half-wave plates at ±θ/2 around the first (v-delaying) crystal,
    /// followed by the perpendicular (h-delaying) crystal.
    SchemeI { theta: f64 },
    /// v-delaying crystal, quarter-wave plate at φ, h-delaying crystal.
    SchemeII { phi: f64 },
}

impl ChannelScheme {
    pub fn scheme_i(theta: f64) -> Self {
        ChannelScheme::SchemeI { theta }
    }

    pub fn scheme_ii(phi: f64) -> Self {
        ChannelScheme::SchemeII { phi }
    }

    pub fn control_angle(&self) -> f64 {
        match self {
            ChannelScheme::SchemeI { theta } => *theta,
            ChannelScheme::SchemeII { phi } => *phi,
        }
    }

    /// The 6x6 train operator on polarization ⊗ time, built element by
    /// element in beam order.
    fn train_operator(&self) -> Matrix6<C64> {
        match *self {
            ChannelScheme::SchemeI { theta } => {
                let first = crystal_operator(DelayedAxis::Vertical, 0.0);
                let second = crystal_operator(DelayedAxis::Horizontal, 0.0);
                second
                    * plate_operator(&hwp_jones(-theta / 2.0))
                    * first
                    * plate_operator(&hwp_jones(theta / 2.0))
            }
            ChannelScheme::SchemeII { phi } => {
                let first = crystal_operator(DelayedAxis::Vertical, -std::f64::consts::FRAC_PI_2);
                let second = crystal_operator(DelayedAxis::Horizontal, 0.0);
                second * plate_operator(&qwp_jones(phi)) * first
            }
        }
    }

    /// Kraus operators K_k = (I ⊗ <t_k|) U (I ⊗ |t₀>) for k = 0, 1, 2.
    /// Tracing the undetected time bin turns the unitary train into an
    /// operator sum; Σ K†K = I because the train never leaks past t₂.
    pub fn kraus(&self) -> KrausSet {
        let u = self.train_operator();
        let ops = (0..TIME_MODES)
            .map(|k| {
                Matrix2::from_fn(|i, j| u[(mode_index(i, k), mode_index(j, 0))])
            })
            .collect();
        KrausSet::new(ops).expect("two-crystal trains fit in three temporal modes")
    }

    /// χ matrix of the channel.
    pub fn chi(&self) -> crate::process::ChiMatrix {
        self.kraus().to_chi()
    }
}

/// Kraus set of a scheme at its control angle.
pub fn channel_kraus(scheme: &ChannelScheme) -> KrausSet {
    scheme.kraus()
}
