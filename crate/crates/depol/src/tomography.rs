//! State and process reconstruction from count data.
//!
//! The chain mirrors the experimental analysis:
//!
//! 1. [`qst_linear`] inverts six-projector counts into Stokes parameters;
//!    shot noise can push the result outside the physical ball.
//! 2. [`qst_ml`] searches the Cholesky-parametrized density matrices
//!    ρ(T) = T†T / tr(T†T) for the minimum of
//!    L(T) = Σ (N·pᵢ(T) − nᵢ)² / (2·N·pᵢ(T)), which is physical by
//!    construction.
//! 3. [`qpt_linear_full`] (four inputs, affine Bloch map) or
//!    [`qpt_linear_unital`] (three inputs, linear map) assemble an
//!    unconstrained Hermitian χ from input/output Stokes pairs.
//! 4. [`chi_ml_physical`] projects that χ onto the physical set: the χ is
//!    read as a four-dimensional Choi state, sixteen artificial projection
//!    probabilities are computed from it, scaled into artificial counts, and
//!    a d = 4 Cholesky ML search fits a legal state to them. The result is a
//!    close physical fit rather than the exact likelihood optimum over
//!    channels; its trace-preservation defect is reported by
//!    [`crate::process::ChiMatrix::tp_residual`].
//!
//! [`reconstruct_process`] runs the whole pipeline end to end from a channel
//! scheme and a seed, deterministically.

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{c, re};
use crate::measurement::{canonical_six_set, canonical_sixteen_set, simulate_counts, CountRecord};
use crate::optics::ChannelScheme;
use crate::optim;
use crate::process::{ChiMatrix, PauliTransferMatrix};
use crate::qstate::{DensityMatrix, StokesVector};
use crate::rng;

/// Condition-number ceiling for tomography input configurations.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Stopping parameters of the maximum-likelihood searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLSettings {
    /// Iteration budget of the likelihood search.
    pub max_iterations: usize,
    /// Relative likelihood-change tolerance.
    pub convergence_tol: f64,
    /// Floor applied to model probabilities inside the likelihood.
    pub probability_floor: f64,
}

impl MLSettings {
    pub fn new(max_iterations: usize, convergence_tol: f64, probability_floor: f64) -> Result<Self> {
        if max_iterations == 0 || convergence_tol <= 0.0 || probability_floor <= 0.0 {
            return Err(Error::InvalidArgument(
                "ML settings must all be positive".into(),
            ));
        }
        Ok(Self {
            max_iterations,
            convergence_tol,
            probability_floor,
        })
    }

    /// Defaults for the d = 2 state search.
    pub fn for_state() -> Self {
        Self {
            max_iterations: 5_000,
            convergence_tol: 1e-10,
            probability_floor: 1e-12,
        }
    }

    /// Defaults for the d = 4 process search.
    pub fn for_process() -> Self {
        Self {
            max_iterations: 20_000,
            convergence_tol: 1e-10,
            probability_floor: 1e-12,
        }
    }
}

impl Default for MLSettings {
    fn default() -> Self {
        Self::for_process()
    }
}

/// Real parameter vector of an upper-triangular factor T: the d diagonal
/// entries followed by (re, im) pairs for each entry above the diagonal in
/// row-major order, d² reals in total. ρ(T) = T†T / tr(T†T) is Hermitian,
/// positive semidefinite and unit trace for every parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyParams {
    values: Vec<f64>,
}

impl CholeskyParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len != 4 && len != 16 {
            return Err(Error::InvalidArgument(format!(
                "parameter vector length {len} is not d² for d in {{2, 4}}"
            )));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        if self.values.len() == 4 {
            2
        } else {
            4
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// ρ(T) for d = 2.
    pub fn density2(&self) -> Matrix2<C64> {
        assert_eq!(self.dim(), 2);
        density_from_params2(&self.values)
    }

    /// ρ(T) for d = 4.
    pub fn density4(&self) -> Matrix4<C64> {
        assert_eq!(self.dim(), 4);
        density_from_params4(&self.values)
    }
}

fn upper_tri2(v: &[f64]) -> Matrix2<C64> {
    Matrix2::new(re(v[0]), c(v[2], v[3]), re(0.0), re(v[1]))
}

fn density_from_params2(v: &[f64]) -> Matrix2<C64> {
    let t = upper_tri2(v);
    let m = t.adjoint() * t;
    let tr = m.trace().re;
    if tr <= 0.0 {
        Matrix2::identity() * re(0.5)
    } else {
        m / re(tr)
    }
}

fn upper_tri4(v: &[f64]) -> Matrix4<C64> {
    let mut t = Matrix4::zeros();
    for i in 0..4 {
        t[(i, i)] = re(v[i]);
    }
    let mut k = 4;
    for i in 0..4 {
        for j in (i + 1)..4 {
            t[(i, j)] = c(v[k], v[k + 1]);
            k += 2;
        }
    }
    t
}

fn density_from_params4(v: &[f64]) -> Matrix4<C64> {
    let t = upper_tri4(v);
    let m = t.adjoint() * t;
    let tr = m.trace().re;
    if tr <= 0.0 {
        Matrix4::identity() * re(0.25)
    } else {
        m / re(tr)
    }
}

/// Clip eigenvalues below `floor` up to it and renormalize to unit trace:
/// the physical matrix nearest in spirit to a possibly illegal estimate.
macro_rules! clip_to_physical {
    ($name:ident, $mat:ty) => {
        fn $name(m: &$mat, floor: f64) -> $mat {
            let h = (m + m.adjoint()) * re(0.5);
            let eig = nalgebra::SymmetricEigen::new(h);
            let clipped = eig.eigenvalues.map(|x| x.max(floor));
            let total: f64 = clipped.iter().sum();
            let d = <$mat>::from_diagonal(&clipped.map(|x| re(x / total)));
            &eig.eigenvectors * d * eig.eigenvectors.adjoint()
        }
    };
}

clip_to_physical!(clip_physical2, Matrix2<C64>);
clip_to_physical!(clip_physical4, Matrix4<C64>);

/// Parameters whose ρ(T) reproduces the given positive-definite matrix:
/// T = L† with L the lower Cholesky factor.
macro_rules! params_from_pd {
    ($name:ident, $mat:ty, $dim:literal) => {
        fn $name(m: &$mat, floor: f64) -> Vec<f64> {
            let mut attempt = *m;
            for _ in 0..4 {
                if let Some(chol) = nalgebra::Cholesky::new(attempt) {
                    let t = chol.l().adjoint();
                    let mut v = Vec::with_capacity($dim * $dim);
                    for i in 0..$dim {
                        v.push(t[(i, i)].re);
                    }
                    for i in 0..$dim {
                        for j in (i + 1)..$dim {
                            v.push(t[(i, j)].re);
                            v.push(t[(i, j)].im);
                        }
                    }
                    return v;
                }
                attempt += <$mat>::identity() * re(floor.max(1e-14) * 10.0);
            }
            // Last resort: the diagonal square root.
            let mut v = vec![0.0; $dim * $dim];
            for i in 0..$dim {
                v[i] = m[(i, i)].re.max(floor).sqrt();
            }
            v
        }
    };
}

params_from_pd!(params_from_pd2, Matrix2<C64>, 2);
params_from_pd!(params_from_pd4, Matrix4<C64>, 4);

/// The symmetric matrix F with xᵀFx = f(x) for a quadratic f, recovered
/// exactly through the polarization identity.
fn quadratic_form(n: usize, f: impl Fn(&[f64]) -> f64) -> nalgebra::DMatrix<f64> {
    let mut form = nalgebra::DMatrix::zeros(n, n);
    let mut basis = vec![0.0; n];
    let mut diag = vec![0.0; n];
    for q in 0..n {
        basis[q] = 1.0;
        diag[q] = f(&basis);
        basis[q] = 0.0;
        form[(q, q)] = diag[q];
    }
    for q1 in 0..n {
        for q2 in (q1 + 1)..n {
            basis[q1] = 1.0;
            basis[q2] = 1.0;
            let both = f(&basis);
            basis[q1] = 0.0;
            basis[q2] = 0.0;
            let cross = 0.5 * (both - diag[q1] - diag[q2]);
            form[(q1, q2)] = cross;
            form[(q2, q1)] = cross;
        }
    }
    form
}

/// Quadratic form of params ↦ tr(op·T†T) for d = 2.
fn operator_form2(op: &Matrix2<C64>) -> nalgebra::DMatrix<f64> {
    quadratic_form(4, |v| {
        let t = upper_tri2(v);
        (op * (t.adjoint() * t)).trace().re
    })
}

/// Quadratic form of params ↦ tr(op·T†T) for d = 4.
fn operator_form4(op: &Matrix4<C64>) -> nalgebra::DMatrix<f64> {
    quadratic_form(16, |v| {
        let t = upper_tri4(v);
        (op * (t.adjoint() * t)).trace().re
    })
}

/// Counts for one input state, covering the canonical six-projector set.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyEntry {
    pub input: StokesVector,
    pub records: Vec<CountRecord>,
}

/// QST data for a list of known input states.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyInput {
    pub entries: Vec<TomographyEntry>,
}

impl TomographyInput {
    pub fn new(entries: Vec<TomographyEntry>) -> Self {
        Self { entries }
    }
}

/// How output states are estimated from counts inside process tomography.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QstEstimator {
    /// Direct linear inversion; exact on noiseless data.
    Linear,
    /// Maximum-likelihood search; always physical.
    MaxLikelihood,
}

/// Counts in canonical order with their exposures.
fn six_counts(records: &[CountRecord]) -> Result<([f64; 6], [f64; 6])> {
    let mut counts = [0.0; 6];
    let mut exposures = [0.0; 6];
    for (i, label) in crate::qstate::StateLabel::ALL.iter().enumerate() {
        let rec = records
            .iter()
            .find(|r| r.label == label.as_str())
            .ok_or_else(|| {
                Error::InvalidArgument(format!("missing counts for projector `{label}`"))
            })?;
        if rec.counts < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "negative counts for projector `{label}`"
            )));
        }
        counts[i] = rec.counts;
        exposures[i] = rec.exposure;
    }
    Ok((counts, exposures))
}

/// Linear QST: Sᵢ = (n⁺ − n⁻)/(n⁺ + n⁻) per basis pair, and the raw matrix
/// (I + Σ Sᵢτᵢ)/2 — Hermitian and unit trace but possibly not positive.
pub fn qst_linear(records: &[CountRecord]) -> Result<(StokesVector, Matrix2<C64>)> {
    let (n, _) = six_counts(records)?;
    let mut s = [0.0; 3];
    for (axis, name) in ["h/v", "p/m", "r/l"].iter().enumerate() {
        let plus = n[2 * axis];
        let minus = n[2 * axis + 1];
        let total = plus + minus;
        if total <= 0.0 {
            return Err(Error::DegenerateData(name.to_string()));
        }
        s[axis] = (plus - minus) / total;
    }
    let stokes = StokesVector::new(s[0], s[1], s[2]);
    let tau = crate::qstate::operator_basis();
    let m = (tau[0] + tau[1] * re(s[0]) + tau[2] * re(s[1]) + tau[3] * re(s[2])) * re(0.5);
    Ok((stokes, m))
}

/// Outcome of a state ML search, with the likelihood trace for diagnostics.
#[derive(Debug, Clone)]
pub struct StateMlReport {
    pub density: DensityMatrix,
    pub likelihood: f64,
    /// Best likelihood after each iteration; non-increasing.
    pub likelihood_trace: Vec<f64>,
    pub iterations: usize,
}

/// Maximum-likelihood QST over the Cholesky parametrization, initialized at
/// the clipped linear estimate.
pub fn qst_ml(records: &[CountRecord], settings: &MLSettings) -> Result<DensityMatrix> {
    qst_ml_detailed(records, settings).map(|r| r.density)
}

pub fn qst_ml_detailed(records: &[CountRecord], settings: &MLSettings) -> Result<StateMlReport> {
    let (counts, exposures) = six_counts(records)?;
    let (_, linear) = qst_linear(records)?;
    let x0 = params_from_pd2(
        &clip_physical2(&linear, settings.probability_floor),
        settings.probability_floor,
    );

    let set = canonical_six_set();
    let problem = optim::MlProblem {
        forms: set
            .projectors()
            .iter()
            .map(|p| operator_form2(p.operator()))
            .collect(),
        trace_form: operator_form2(&Matrix2::identity()),
        counts: counts.to_vec(),
        exposures: exposures.to_vec(),
        floor: settings.probability_floor,
    };
    let out = optim::minimize(
        &problem,
        &x0,
        settings.max_iterations,
        settings.convergence_tol,
    );
    let density = DensityMatrix::new_clipped(&density_from_params2(&out.x))
        .expect("Cholesky parametrization yields states");
    if !out.converged {
        return Err(Error::StateSearchDiverged {
            best: density,
            iterations: out.iterations,
        });
    }
    Ok(StateMlReport {
        density,
        likelihood: out.value,
        likelihood_trace: out.trace,
        iterations: out.iterations,
    })
}

fn estimate_output(
    records: &[CountRecord],
    estimator: QstEstimator,
    settings: &MLSettings,
) -> Result<StokesVector> {
    match estimator {
        QstEstimator::Linear => Ok(qst_linear(records)?.0),
        QstEstimator::MaxLikelihood => Ok(qst_ml(records, settings)?.to_stokes()),
    }
}

/// Full single-qubit QPT from four input states that do not lie on a common
/// plane of the Poincaré sphere: solves the affine map S ↦ M·S + t and
/// converts it to an (unconstrained Hermitian) χ.
pub fn qpt_linear_full(
    data: &TomographyInput,
    estimator: QstEstimator,
    settings: &MLSettings,
) -> Result<ChiMatrix> {
    if data.entries.len() != 4 {
        return Err(Error::InvalidArgument(format!(
            "full QPT needs exactly 4 input states, got {}",
            data.entries.len()
        )));
    }
    let outputs = data
        .entries
        .iter()
        .map(|e| estimate_output(&e.records, estimator, settings))
        .collect::<Result<Vec<_>>>()?;

    // Rows (S_k, 1); singular exactly when the inputs are coplanar.
    let a = Matrix4::<f64>::from_fn(|k, j| {
        let s = data.entries[k].input;
        match j {
            0 => s.s1,
            1 => s.s2,
            2 => s.s3,
            _ => 1.0,
        }
    });
    let cond = crate::linalg::condition4(&a);
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::IllConditionedInputs(cond));
    }
    let lu = a.lu();
    let mut r = Matrix4::<f64>::zeros();
    r[(0, 0)] = 1.0;
    for axis in 0..3 {
        let b = Vector4::from_fn(|k, _| outputs[k].as_vector()[axis]);
        let x = lu
            .solve(&b)
            .ok_or(Error::IllConditionedInputs(f64::INFINITY))?;
        r[(axis + 1, 1)] = x[0];
        r[(axis + 1, 2)] = x[1];
        r[(axis + 1, 3)] = x[2];
        r[(axis + 1, 0)] = x[3];
    }
    Ok(PauliTransferMatrix::new(r).to_chi())
}

/// Unital-channel QPT from three linearly independent input states: solves
/// S' = M·S with zero translation.
pub fn qpt_linear_unital(
    data: &TomographyInput,
    estimator: QstEstimator,
    settings: &MLSettings,
) -> Result<ChiMatrix> {
    if data.entries.len() != 3 {
        return Err(Error::InvalidArgument(format!(
            "unital QPT needs exactly 3 input states, got {}",
            data.entries.len()
        )));
    }
    let outputs = data
        .entries
        .iter()
        .map(|e| estimate_output(&e.records, estimator, settings))
        .collect::<Result<Vec<_>>>()?;

    let s_in = Matrix3::<f64>::from_fn(|i, k| data.entries[k].input.as_vector()[i]);
    let cond = crate::linalg::condition3(&s_in);
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::IllConditionedInputs(cond));
    }
    let s_out = Matrix3::<f64>::from_fn(|i, k| outputs[k].as_vector()[i]);
    let inv = s_in
        .try_inverse()
        .ok_or(Error::IllConditionedInputs(f64::INFINITY))?;
    let m = s_out * inv;

    let mut r = Matrix4::<f64>::zeros();
    r[(0, 0)] = 1.0;
    for i in 0..3 {
        for j in 0..3 {
            r[(i + 1, j + 1)] = m[(i, j)];
        }
    }
    Ok(PauliTransferMatrix::new(r).to_chi())
}

/// Outcome of the process physicalization, with its quality diagnostics.
#[derive(Debug, Clone)]
pub struct ProcessMlReport {
    pub chi: ChiMatrix,
    /// ‖Σ χ_mn τ_n τ_m − I‖: how far the fit is from trace preservation,
    /// which the search does not enforce.
    pub tp_residual: f64,
    pub likelihood: f64,
    pub likelihood_trace: Vec<f64>,
    pub iterations: usize,
}

/// Project a linearly reconstructed χ onto the physical set through the
/// artificial-counts Choi-state ML search. `exposure` sets the artificial
/// count scale (the measurement-time stand-in).
pub fn chi_ml_physical(
    chi_linear: &ChiMatrix,
    exposure: f64,
    settings: &MLSettings,
) -> Result<ChiMatrix> {
    chi_ml_physical_detailed(chi_linear, exposure, settings).map(|r| r.chi)
}

pub fn chi_ml_physical_detailed(
    chi_linear: &ChiMatrix,
    exposure: f64,
    settings: &MLSettings,
) -> Result<ProcessMlReport> {
    if exposure <= 0.0 {
        return Err(Error::InvalidArgument("exposure must be positive".into()));
    }
    // 1. The χ as a four-dimensional state, trace-normalized.
    let choi = chi_linear.to_choi();
    let tr = choi.trace();
    if tr <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "χ has non-positive trace {tr:.3e}"
        )));
    }
    let rho_linear = choi.matrix() / re(tr);

    // 2-3. Sixteen artificial probabilities, negatives floored at zero, then
    // scaled into artificial counts.
    let set = canonical_sixteen_set();
    let counts: Vec<f64> = set
        .probabilities(&rho_linear)
        .into_iter()
        .map(|p| exposure * p.max(0.0))
        .collect();

    // 4. The d = 4 state search, started from the clipped linear state.
    let x0 = params_from_pd4(
        &clip_physical4(&rho_linear, settings.probability_floor),
        settings.probability_floor,
    );
    let problem = optim::MlProblem {
        forms: set.operators().iter().map(operator_form4).collect(),
        trace_form: operator_form4(&Matrix4::identity()),
        counts,
        exposures: vec![exposure; 16],
        floor: settings.probability_floor,
    };
    let out = optim::minimize(
        &problem,
        &x0,
        settings.max_iterations,
        settings.convergence_tol,
    );

    // 5. Back to the χ form; the search state is unit trace already.
    let chi_of = |params: &[f64]| -> ChiMatrix {
        let rho = density_from_params4(params);
        let chi = crate::process::ChoiMatrix::new(rho)
            .expect("parametrized states are Hermitian")
            .to_chi();
        let tr = chi.trace();
        ChiMatrix::new(chi.matrix() / re(tr)).expect("basis change preserves Hermiticity")
    };
    let chi = chi_of(&out.x);
    if !out.converged {
        return Err(Error::ProcessSearchDiverged {
            best: Box::new(chi),
            iterations: out.iterations,
        });
    }
    Ok(ProcessMlReport {
        tp_residual: chi.tp_residual(),
        chi,
        likelihood: out.value,
        likelihood_trace: out.trace,
        iterations: out.iterations,
    })
}

/// Input-state count for each reconstruction mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionMode {
    /// Three inputs, unitality assumed.
    Unital3,
    /// Four inputs, affine map solved in full.
    Full4,
}

impl ReconstructionMode {
    pub fn input_count(&self) -> usize {
        match self {
            ReconstructionMode::Unital3 => 3,
            ReconstructionMode::Full4 => 4,
        }
    }
}

/// Simulate the full experiment and reconstruct the process matrix:
/// channel → outputs → Poisson counts → ML QST per input → linear QPT →
/// artificial-counts physicalization. Deterministic for a fixed seed; input
/// k draws from the child stream `child_seed(seed, k)`.
pub fn reconstruct_process(
    scheme: &ChannelScheme,
    inputs: &[StokesVector],
    exposure: f64,
    seed: u64,
    mode: ReconstructionMode,
    settings: &MLSettings,
) -> Result<ChiMatrix> {
    if inputs.len() != mode.input_count() {
        return Err(Error::InvalidArgument(format!(
            "{:?} needs {} input states, got {}",
            mode,
            mode.input_count(),
            inputs.len()
        )));
    }
    if exposure <= 0.0 {
        return Err(Error::InvalidArgument("exposure must be positive".into()));
    }
    let chi_theory = scheme.chi();
    let set = canonical_six_set();
    let entries = inputs
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let rho_in = s.to_density()?;
            let rho_out = chi_theory.apply(&rho_in)?;
            Ok(TomographyEntry {
                input: *s,
                records: simulate_counts(&rho_out, &set, exposure, rng::child_seed(seed, k as u64)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let data = TomographyInput::new(entries);
    let chi_linear = match mode {
        ReconstructionMode::Unital3 => {
            qpt_linear_unital(&data, QstEstimator::MaxLikelihood, settings)?
        }
        ReconstructionMode::Full4 => {
            qpt_linear_full(&data, QstEstimator::MaxLikelihood, settings)?
        }
    };
    chi_ml_physical(&chi_linear, exposure, settings)
}

/// The three mutually unbiased input states used for scheme II tomography.
pub fn mub_inputs() -> [StokesVector; 3] {
    [
        StokesVector::new((1.0f64 / 3.0).sqrt(), 0.0, -(2.0f64 / 3.0).sqrt()),
        StokesVector::new((1.0f64 / 3.0).sqrt(), (0.5f64).sqrt(), (1.0f64 / 6.0).sqrt()),
        StokesVector::new((1.0f64 / 3.0).sqrt(), -(0.5f64).sqrt(), (1.0f64 / 6.0).sqrt()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::expected_counts;
    use crate::process::process_fidelity;
    use crate::qstate::{canonical_state, StateLabel};

    fn ideal_records(counts: [f64; 6]) -> Vec<CountRecord> {
        StateLabel::ALL
            .iter()
            .zip(counts)
            .map(|(l, n)| CountRecord {
                label: l.as_str().to_string(),
                counts: n,
                exposure: 25_000.0,
            })
            .collect()
    }

    fn stokes_of(label: StateLabel) -> StokesVector {
        canonical_state(label).density().to_stokes()
    }

    #[test]
    fn linear_qst_examples() {
        let (s, _) = qst_linear(&ideal_records([
            25_000.0, 0.0, 12_500.0, 12_500.0, 12_500.0, 12_500.0,
        ]))
        .unwrap();
        assert!((s.s1 - 1.0).abs() < 1e-12 && s.s2.abs() < 1e-12 && s.s3.abs() < 1e-12);

        let (s, _) = qst_linear(&ideal_records([1.0; 6].map(|x| x * 4000.0))).unwrap();
        assert!(s.degree_of_polarization() < 1e-12);

        let (s, _) = qst_linear(&ideal_records([
            20_000.0, 5_000.0, 12_500.0, 12_500.0, 12_500.0, 12_500.0,
        ]))
        .unwrap();
        assert!((s.s1 - 0.6).abs() < 1e-12);
    }

    #[test]
    fn linear_qst_degenerate_pair() {
        let err = qst_linear(&ideal_records([0.0, 0.0, 1.0, 1.0, 1.0, 1.0]));
        assert!(matches!(err, Err(Error::DegenerateData(p)) if p == "h/v"));
    }

    #[test]
    fn linear_qst_missing_projector() {
        let mut records = ideal_records([1.0; 6]);
        records.remove(3);
        assert!(matches!(
            qst_linear(&records),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cholesky_params_always_physical() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..200 {
            let values: Vec<f64> = (0..4).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let rho = CholeskyParams::new(values).unwrap().density2();
            assert!(DensityMatrix::new_clipped(&rho).is_ok());
            assert!((rho.trace().re - 1.0).abs() < 1e-12);

            let values: Vec<f64> = (0..16).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let rho = CholeskyParams::new(values).unwrap().density4();
            let eigs = crate::linalg::eigvals_desc4(&rho);
            assert!(eigs[3] > -1e-12 && (rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ml_qst_recovers_ideal_h() {
        let report = qst_ml_detailed(
            &ideal_records([25_000.0, 0.0, 12_500.0, 12_500.0, 12_500.0, 12_500.0]),
            &MLSettings::for_state(),
        )
        .unwrap();
        let f = report
            .density
            .fidelity(&canonical_state(StateLabel::H).density());
        assert!(f >= 1.0 - 1e-4, "fidelity {f}");
        for pair in report.likelihood_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn ml_qst_physicalizes_illegal_linear_estimate() {
        // S = (0.8, 0.8, 0): D > 1, the linear matrix has a negative eigenvalue.
        let records = ideal_records([
            22_500.0, 2_500.0, 22_500.0, 2_500.0, 12_500.0, 12_500.0,
        ]);
        let (_, linear) = qst_linear(&records).unwrap();
        assert!(crate::linalg::eigvals_desc2(&linear)[1] < 0.0);
        let rho = qst_ml(&records, &MLSettings::for_state()).unwrap();
        assert!(rho.to_stokes().degree_of_polarization() <= 1.0 + 1e-9);
    }

    #[test]
    fn ml_qst_agrees_with_physical_linear_estimate() {
        // A well-conditioned interior state: ML should not move it.
        let rho = StokesVector::new(0.4, 0.1, -0.3).to_density().unwrap();
        let records = expected_counts(&rho, &canonical_six_set(), 25_000.0);
        let (_, linear) = qst_linear(&records).unwrap();
        assert!(crate::linalg::eigvals_desc2(&linear)[1] > 0.01);
        let ml = qst_ml(&records, &MLSettings::for_state()).unwrap();
        let f = ml.fidelity(&DensityMatrix::new_clipped(&linear).unwrap());
        assert!(f >= 0.999, "fidelity {f}");
    }

    #[test]
    fn ml_qst_monte_carlo_accuracy() {
        let truth = StokesVector::new(0.35, -0.2, 0.41).to_density().unwrap();
        let set = canonical_six_set();
        let mut total = 0.0;
        let n = 100;
        for seed in 0..n {
            let records = simulate_counts(&truth, &set, 25_000.0, seed);
            let rho = qst_ml(&records, &MLSettings::for_state()).unwrap();
            total += rho.fidelity(&truth);
        }
        let mean = total / n as f64;
        assert!(mean >= 0.999, "mean fidelity {mean}");
    }

    #[test]
    fn noiseless_qpt_identity() {
        let set = canonical_six_set();
        let identity = ChiMatrix::identity();
        let labels4 = [StateLabel::H, StateLabel::V, StateLabel::P, StateLabel::R];
        let data = TomographyInput::new(
            labels4
                .iter()
                .map(|&l| {
                    let s = stokes_of(l);
                    TomographyEntry {
                        input: s,
                        records: expected_counts(
                            &s.to_density().unwrap(),
                            &set,
                            25_000.0,
                        ),
                    }
                })
                .collect(),
        );
        let chi = qpt_linear_full(&data, QstEstimator::Linear, &MLSettings::for_state()).unwrap();
        assert!((chi.matrix() - identity.matrix()).norm() < 1e-10);

        let labels3 = [StateLabel::H, StateLabel::P, StateLabel::R];
        let data = TomographyInput::new(
            labels3
                .iter()
                .map(|&l| {
                    let s = stokes_of(l);
                    TomographyEntry {
                        input: s,
                        records: expected_counts(&s.to_density().unwrap(), &set, 25_000.0),
                    }
                })
                .collect(),
        );
        let chi = qpt_linear_unital(&data, QstEstimator::Linear, &MLSettings::for_state()).unwrap();
        assert!((chi.matrix() - identity.matrix()).norm() < 1e-10);
    }

    fn noiseless_data(scheme: &ChannelScheme, labels: &[StateLabel]) -> TomographyInput {
        let chi = scheme.chi();
        let set = canonical_six_set();
        TomographyInput::new(
            labels
                .iter()
                .map(|&l| {
                    let s = stokes_of(l);
                    let out = chi.apply(&s.to_density().unwrap()).unwrap();
                    TomographyEntry {
                        input: s,
                        records: expected_counts(&out, &set, 25_000.0),
                    }
                })
                .collect(),
        )
    }

    #[test]
    fn noiseless_full_qpt_matches_theory_ellipsoid() {
        let scheme = ChannelScheme::scheme_i(67.5f64.to_radians());
        let data = noiseless_data(
            &scheme,
            &[StateLabel::H, StateLabel::V, StateLabel::P, StateLabel::R],
        );
        let chi = qpt_linear_full(&data, QstEstimator::Linear, &MLSettings::for_state()).unwrap();
        let radii = chi.ellipsoid_radii();
        assert!((radii[0] - 0.70).abs() < 0.02);
        assert!((radii[1] - 0.15).abs() < 0.02);
        assert!((radii[2] - 0.15).abs() < 0.02);
    }

    #[test]
    fn coplanar_inputs_rejected() {
        let scheme = ChannelScheme::scheme_i(0.3);
        let data = noiseless_data(
            &scheme,
            &[StateLabel::H, StateLabel::V, StateLabel::P, StateLabel::M],
        );
        assert!(matches!(
            qpt_linear_full(&data, QstEstimator::Linear, &MLSettings::for_state()),
            Err(Error::IllConditionedInputs(_))
        ));
    }

    #[test]
    fn unital_qpt_magic_angle_radii() {
        let magic1 = (1.0 / 2f64.sqrt()).atan();
        let data = noiseless_data(
            &ChannelScheme::scheme_i(magic1),
            &[StateLabel::H, StateLabel::P, StateLabel::R],
        );
        let chi = qpt_linear_unital(&data, QstEstimator::Linear, &MLSettings::for_state()).unwrap();
        let radii = chi.ellipsoid_radii();
        assert!((radii[0] - 2.0 / 3.0).abs() < 1e-9);
        assert!((radii[1] - 2.0 / 3.0).abs() < 1e-9);
        assert!((radii[2] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn unital_qpt_mub_inputs_any_angle() {
        let set = canonical_six_set();
        for k in 0..8 {
            let phi = 0.21 * k as f64;
            let scheme = ChannelScheme::scheme_ii(phi);
            let chi_theory = scheme.chi();
            let data = TomographyInput::new(
                mub_inputs()
                    .iter()
                    .map(|s| {
                        let out = chi_theory.apply(&s.to_density().unwrap()).unwrap();
                        TomographyEntry {
                            input: *s,
                            records: expected_counts(&out, &set, 25_000.0),
                        }
                    })
                    .collect(),
            );
            let chi =
                qpt_linear_unital(&data, QstEstimator::Linear, &MLSettings::for_state()).unwrap();
            assert!(
                (chi.matrix() - chi_theory.matrix()).norm() < 1e-8,
                "phi = {phi}"
            );
        }
    }

    #[test]
    fn physicalization_keeps_physical_chi() {
        let chi = ChannelScheme::scheme_i(45f64.to_radians()).chi();
        let out = chi_ml_physical(&chi, 25_000.0, &MLSettings::for_process()).unwrap();
        let f = process_fidelity(&chi, &out).unwrap();
        assert!(f >= 0.99, "fidelity {f}");
    }

    #[test]
    fn physicalization_fixes_negative_eigenvalue() {
        let chi = ChannelScheme::scheme_i(45f64.to_radians()).chi();
        // Push one eigenvalue to -0.02 by mixing in a deficit direction.
        let eig = nalgebra::SymmetricEigen::new(*chi.matrix());
        let mut vals = eig.eigenvalues;
        vals[3] = -0.02;
        let total: f64 = vals.iter().sum();
        let perturbed = ChiMatrix::new(
            eig.eigenvectors
                * Matrix4::from_diagonal(&vals.map(|x| re(x / total)))
                * eig.eigenvectors.adjoint(),
        )
        .unwrap();
        assert!(!perturbed.is_completely_positive(1e-6));
        let fixed = chi_ml_physical(&perturbed, 25_000.0, &MLSettings::for_process()).unwrap();
        assert!(fixed.is_completely_positive(1e-8));
        assert!((fixed.trace() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn physicalization_insensitive_to_count_scale() {
        let chi = ChannelScheme::scheme_ii(0.9).chi();
        let lo = chi_ml_physical(&chi, 25.0, &MLSettings::for_process()).unwrap();
        let hi = chi_ml_physical(&chi, 2.5e7, &MLSettings::for_process()).unwrap();
        let f = process_fidelity(&lo, &hi).unwrap();
        assert!(f >= 0.99, "fidelity {f}");
    }

    #[test]
    fn reconstruction_matches_theory_at_isotropic_point() {
        let magic2 = 2f64.sqrt().atan();
        let scheme = ChannelScheme::scheme_i(magic2);
        let inputs = [
            stokes_of(StateLabel::H),
            stokes_of(StateLabel::P),
            stokes_of(StateLabel::R),
        ];
        let chi = reconstruct_process(
            &scheme,
            &inputs,
            25_000.0,
            11,
            ReconstructionMode::Unital3,
            &MLSettings::for_process(),
        )
        .unwrap();
        let f = process_fidelity(&chi, &scheme.chi()).unwrap();
        assert!(f >= 0.97, "fidelity {f}");
    }

    #[test]
    fn reconstruction_scheme_ii_disk_spectrum() {
        let scheme = ChannelScheme::scheme_ii(45f64.to_radians());
        let chi = reconstruct_process(
            &scheme,
            &mub_inputs(),
            25_000.0,
            5,
            ReconstructionMode::Unital3,
            &MLSettings::for_process(),
        )
        .unwrap();
        let eigs = chi.eigenvalues();
        let expected = [0.5, 0.25, 0.25, 0.0];
        for (e, x) in eigs.iter().zip(expected) {
            assert!((e - x).abs() < 0.02, "{eigs:?}");
        }
    }

    #[test]
    fn reconstruction_identity_high_exposure() {
        let scheme = ChannelScheme::scheme_i(0.0);
        let inputs = [
            stokes_of(StateLabel::H),
            stokes_of(StateLabel::P),
            stokes_of(StateLabel::R),
        ];
        let chi = reconstruct_process(
            &scheme,
            &inputs,
            2.5e6,
            3,
            ReconstructionMode::Unital3,
            &MLSettings::for_process(),
        )
        .unwrap();
        let f = process_fidelity(&chi, &ChiMatrix::identity()).unwrap();
        assert!(f >= 0.999, "fidelity {f}");
    }

    #[test]
    fn wrong_input_count_rejected() {
        let err = reconstruct_process(
            &ChannelScheme::scheme_i(0.4),
            &[stokes_of(StateLabel::H)],
            25_000.0,
            1,
            ReconstructionMode::Unital3,
            &MLSettings::for_process(),
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
