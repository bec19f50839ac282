//! Projective measurements and photon-count simulation.
//!
//! State tomography measures the six canonical projectors h, v, p, m, r, l —
//! three complete bases. Each projector setting accumulates coincidence
//! counts that are Poisson distributed around exposure·probability, with the
//! exposure being the expected number of events per basis. Counts are stored
//! as `f64`: simulated data is always integral, while the noiseless path
//! ([`expected_counts`]) and the artificial counts of the process ML search
//! keep their exact fractional values.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qstate::{canonical_state, DensityMatrix, StateLabel};
use crate::rng;

/// A labelled rank-1 projector.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    label: String,
    op: Matrix2<C64>,
}

impl Projector {
    /// Validates Hermiticity, idempotence (P² = P within 1e-12) and unit
    /// trace.
    pub fn new(label: impl Into<String>, op: Matrix2<C64>) -> Result<Self> {
        let label = label.into();
        let herm = crate::linalg::max_abs(&(op - op.adjoint()));
        if herm > 1e-12 {
            return Err(Error::InvalidProjector(
                label,
                format!("Hermiticity residual {herm:.3e}"),
            ));
        }
        let idem = crate::linalg::max_abs(&(op * op - op));
        if idem > 1e-12 {
            return Err(Error::InvalidProjector(
                label,
                format!("idempotence residual {idem:.3e}"),
            ));
        }
        let tr = op.trace().re;
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProjector(label, format!("trace {tr} is not 1")));
        }
        Ok(Self { label, op })
    }

    pub fn onto(label: impl Into<String>, state: &crate::qstate::PureState) -> Self {
        let op = state.amplitudes() * state.amplitudes().adjoint();
        Self::new(label, op).expect("|ψ><ψ| of a unit vector is a projector")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn operator(&self) -> &Matrix2<C64> {
        &self.op
    }

    /// Born probability tr(Pρ), real within roundoff.
    pub fn probability(&self, rho: &DensityMatrix) -> f64 {
        (self.op * rho.matrix()).trace().re
    }
}

/// An ordered list of projectors measured one after the other.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSet {
    items: Vec<Projector>,
}

impl ProjectorSet {
    pub fn new(items: Vec<Projector>) -> Self {
        Self { items }
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// The six canonical projectors in the order h, v, p, m, r, l. Partner pairs
/// resolve the identity: P_h + P_v = P_p + P_m = P_r + P_l = I.
pub fn canonical_six_set() -> ProjectorSet {
    ProjectorSet::new(
        StateLabel::ALL
            .iter()
            .map(|&label| Projector::onto(label.as_str(), &canonical_state(label)))
            .collect(),
    )
}

/// One projector setting with its accumulated counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub label: String,
    /// Number of events; integral for simulated data, fractional for
    /// noiseless expected counts.
    pub counts: f64,
    /// Expected events per complete basis at this setting.
    pub exposure: f64,
}

/// Draw one Poisson count per projector, each with mean exposure·tr(Pρ).
/// Pure given (inputs, seed): identical calls reproduce identical records.
pub fn simulate_counts(
    rho: &DensityMatrix,
    set: &ProjectorSet,
    exposure: f64,
    seed: u64,
) -> Vec<CountRecord> {
    assert!(exposure > 0.0, "exposure must be positive");
    let mut rng = rng::seeded(seed);
    set.projectors()
        .iter()
        .map(|p| {
            let mean = exposure * p.probability(rho).max(0.0);
            CountRecord {
                label: p.label().to_string(),
                counts: rng::poisson(&mut rng, mean) as f64,
                exposure,
            }
        })
        .collect()
}

/// The noiseless limit: counts equal to exposure·probability exactly.
pub fn expected_counts(rho: &DensityMatrix, set: &ProjectorSet, exposure: f64) -> Vec<CountRecord> {
    assert!(exposure > 0.0, "exposure must be positive");
    set.projectors()
        .iter()
        .map(|p| CountRecord {
            label: p.label().to_string(),
            counts: exposure * p.probability(rho).max(0.0),
            exposure,
        })
        .collect()
}

/// Sixteen labelled rank-1 projectors on the two-qubit space, spanning the
/// 16-dimensional operator space.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitProjectorSet {
    labels: Vec<String>,
    ops: Vec<Matrix4<C64>>,
}

impl TwoQubitProjectorSet {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operators(&self) -> &[Matrix4<C64>] {
        &self.ops
    }

    /// Born probabilities against a 4-dimensional state.
    pub fn probabilities(&self, rho: &Matrix4<C64>) -> Vec<f64> {
        self.ops.iter().map(|p| (p * rho).trace().re).collect()
    }

    /// 2-norm condition number of the Gram matrix tr(Π_i Π_j); finite iff
    /// the set is informationally complete.
    pub fn gram_condition(&self) -> f64 {
        let n = self.ops.len();
        let gram = nalgebra::DMatrix::<f64>::from_fn(n, n, |i, j| {
            (self.ops[i] * self.ops[j]).trace().re
        });
        let sv = gram.svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// The canonical informationally complete set {h, v, p, r} ⊗ {h, v, p, r},
/// ordered with the first factor slowest: hh, hv, hp, hr, vh, ...
pub fn canonical_sixteen_set() -> TwoQubitProjectorSet {
    let singles = [StateLabel::H, StateLabel::V, StateLabel::P, StateLabel::R];
    let mut labels = Vec::with_capacity(16);
    let mut ops = Vec::with_capacity(16);
    for a in singles {
        let pa = Projector::onto(a.as_str(), &canonical_state(a));
        for b in singles {
            let pb = Projector::onto(b.as_str(), &canonical_state(b));
            labels.push(format!("{a}{b}"));
            ops.push(pa.operator().kronecker(pb.operator()));
        }
    }
    TwoQubitProjectorSet { labels, ops }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};
    use crate::qstate::StokesVector;

    #[test]
    fn canonical_projector_matrices() {
        let set = canonical_six_set();
        let p_h = set.projectors()[0].operator();
        assert!((p_h - Matrix2::new(re(1.0), re(0.0), re(0.0), re(0.0))).norm() < 1e-14);
        // |r><r| = ½ [[1, -i], [i, 1]].
        let p_r = set.projectors()[4].operator();
        let expect = Matrix2::new(re(0.5), c(0.0, -0.5), c(0.0, 0.5), re(0.5));
        assert!((p_r - expect).norm() < 1e-14);
    }

    #[test]
    fn partner_pairs_resolve_identity() {
        let set = canonical_six_set();
        for pair in set.projectors().chunks(2) {
            let sum = pair[0].operator() + pair[1].operator();
            assert!((sum - Matrix2::identity()).norm() < 1e-12);
        }
    }

    #[test]
    fn born_probabilities() {
        let set = canonical_six_set();
        let h = canonical_state(StateLabel::H).density();
        assert!((set.projectors()[0].probability(&h) - 1.0).abs() < 1e-12);
        assert!((set.projectors()[2].probability(&h) - 0.5).abs() < 1e-12);
        // ρ = ½(I + τ₁/3): the isotropically depolarized |h>; P_h sees 2/3.
        let rho = StokesVector::new(1.0 / 3.0, 0.0, 0.0).to_density().unwrap();
        assert!((set.projectors()[0].probability(&rho) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pair_probabilities_sum_to_one() {
        let set = canonical_six_set();
        let rho = StokesVector::new(0.2, -0.4, 0.55).to_density().unwrap();
        for pair in set.projectors().chunks(2) {
            let total = pair[0].probability(&rho) + pair[1].probability(&rho);
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_projector_rejected() {
        let almost = Matrix2::new(re(0.9), re(0.0), re(0.0), re(0.1));
        assert!(Projector::new("x", almost).is_err());
    }

    #[test]
    fn simulation_is_seed_deterministic() {
        let rho = StokesVector::new(0.3, 0.1, -0.2).to_density().unwrap();
        let set = canonical_six_set();
        let a = simulate_counts(&rho, &set, 25_000.0, 42);
        let b = simulate_counts(&rho, &set, 25_000.0, 42);
        assert_eq!(a, b);
        let c = simulate_counts(&rho, &set, 25_000.0, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_probability_never_counts() {
        let h = canonical_state(StateLabel::H).density();
        let set = canonical_six_set();
        for seed in 0..20 {
            let records = simulate_counts(&h, &set, 25_000.0, seed);
            assert_eq!(records[1].label, "v");
            assert_eq!(records[1].counts, 0.0);
        }
    }

    #[test]
    fn counts_fluctuate_around_the_mean() {
        // 100 seeds of a mean-25000 count: the sample mean is within
        // 3·sqrt(25000/100) of the truth.
        let h = canonical_state(StateLabel::H).density();
        let set = canonical_six_set();
        let n = 100;
        let total: f64 = (0..n)
            .map(|seed| simulate_counts(&h, &set, 25_000.0, seed)[0].counts)
            .sum();
        let mean = total / n as f64;
        assert!((mean - 25_000.0).abs() < 3.0 * (25_000.0f64 / n as f64).sqrt());
    }

    #[test]
    fn variance_matches_poisson_mean() {
        // 1000 seeds on a probability-1/2 projector at exposure 25000.
        let h = canonical_state(StateLabel::H).density();
        let set = canonical_six_set();
        let n = 1000;
        let samples: Vec<f64> = (0..n)
            .map(|seed| simulate_counts(&h, &set, 25_000.0, seed)[2].counts)
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var / 12_500.0 - 1.0).abs() < 0.10, "variance {var}");
    }

    #[test]
    fn expected_counts_are_exact() {
        let rho = StokesVector::new(0.6, 0.0, 0.0).to_density().unwrap();
        let records = expected_counts(&rho, &canonical_six_set(), 25_000.0);
        assert!((records[0].counts - 20_000.0).abs() < 1e-9);
        assert!((records[1].counts - 5_000.0).abs() < 1e-9);
    }

    #[test]
    fn sixteen_set_structure() {
        let set = canonical_sixteen_set();
        assert_eq!(set.operators().len(), 16);
        assert_eq!(set.labels()[0], "hh");
        let p_h = Matrix2::new(re(1.0), re(0.0), re(0.0), re(0.0));
        assert!((set.operators()[0] - p_h.kronecker(&p_h)).norm() < 1e-14);

        // The set must span the operator space: finite Gram condition.
        // Direct computation gives 108.24; cross-checked against the tensor
        // structure cond(G₁ ⊗ G₁) = cond(G₁)².
        let cond = set.gram_condition();
        assert!(cond.is_finite() && (cond - 108.2407613).abs() < 1e-6, "condition {cond}");
        let singles = [StateLabel::H, StateLabel::V, StateLabel::P, StateLabel::R];
        let g1 = nalgebra::Matrix4::<f64>::from_fn(|i, j| {
            canonical_state(singles[i]).overlap(&canonical_state(singles[j]))
        });
        let sv = g1.svd(false, false).singular_values;
        let c1 = sv.max() / sv.min();
        assert!((cond - c1 * c1).abs() < 1e-6 * cond);

        let mixed = Matrix4::identity() * re(0.25);
        for p in set.probabilities(&mixed) {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }
}
