//! Combining two child estimates into a parent state.
//!
//! A parent on `m + 1` qubits is assembled as
//! `β0 |0⟩⊗|ψ̂0⟩ + β1 |1⟩⊗|ψ̂1⟩`. The coefficient pair is found by scoring
//! every point of a Bloch-sphere net with the Frobenius estimator, all
//! candidates sharing the same measured outcomes.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::frobenius::{
    estimate_with_means, FrobeniusError, FrobeniusPlan, OutcomeSource, PreparedOutcomes,
    SigmaSampling,
};
use crate::pauli::{Pauli, PauliLabel};
use crate::seed::stream;
use crate::state::{pauli_matrix_element, Prefix, StateError, StateVector, ZERO_WEIGHT};

#[derive(Debug, Error)]
pub enum GluingError {
    #[error("net resolution {0} must lie in (0, 2]")]
    InvalidResolution(f64),
    #[error("children have {left} and {right} qubits")]
    ChildMismatch { left: usize, right: usize },
    #[error("parent has {got} qubits, expected {expected}")]
    ParentMismatch { expected: usize, got: usize },
    #[error("amplitude pair has zero norm")]
    ZeroNorm,
    #[error("net is empty")]
    EmptyNet,
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A normalized pair `(β0, β1)` with the global phase fixed so that `β0` is
/// real and nonnegative (or `β1` is, when `β0 = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudePair {
    b0: Complex64,
    b1: Complex64,
}

impl AmplitudePair {
    pub fn new(b0: Complex64, b1: Complex64) -> Result<Self, GluingError> {
        let norm = (b0.norm_sqr() + b1.norm_sqr()).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(GluingError::ZeroNorm);
        }
        let (b0, b1) = (b0 / norm, b1 / norm);
        let anchor = if b0.norm() > 1e-15 { b0 } else { b1 };
        let phase = anchor.conj() / anchor.norm();
        let (mut b0, mut b1) = (b0 * phase, b1 * phase);
        if b0.norm() <= 1e-15 {
            b0 = Complex64::new(0.0, 0.0);
            b1 = Complex64::new(b1.norm(), 0.0);
        } else {
            b0 = Complex64::new(b0.re, 0.0);
        }
        Ok(Self { b0, b1 })
    }

    /// `β0 = cos(θ/2)`, `β1 = e^{iφ} sin(θ/2)`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self::new(
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        )
        .expect("unit norm")
    }

    pub fn zero() -> Self {
        Self::from_angles(0.0, 0.0)
    }

    pub fn one() -> Self {
        Self::from_angles(PI, 0.0)
    }

    /// `(1/√2, 1/√2)`.
    pub fn balanced() -> Self {
        Self::from_angles(PI / 2.0, 0.0)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let s = StateVector::haar_random(1, rng);
        Self::new(s.amplitudes()[0], s.amplitudes()[1]).expect("unit norm")
    }

    pub fn b0(&self) -> Complex64 {
        self.b0
    }

    pub fn b1(&self) -> Complex64 {
        self.b1
    }

    /// Bloch angles `(θ, φ)` with `φ ∈ [0, 2π)`.
    pub fn angles(&self) -> (f64, f64) {
        let theta = 2.0 * self.b1.norm().atan2(self.b0.re);
        let phi = if self.b1.norm() > 0.0 {
            self.b1.arg().rem_euclid(TAU)
        } else {
            0.0
        };
        (theta, phi)
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &AmplitudePair) -> f64 {
        (self.b0.conj() * other.b0 + self.b1.conj() * other.b1)
            .norm_sqr()
            .min(1.0)
    }

    /// Euclidean distance between Bloch vectors, `2 sqrt(1 - F)`.
    pub fn chordal_distance(&self, other: &AmplitudePair) -> f64 {
        2.0 * (1.0 - self.fidelity(other)).max(0.0).sqrt()
    }
}

/// `β0 |0⟩⊗|ψ̂0⟩ + β1 |1⟩⊗|ψ̂1⟩`, renormalized.
pub fn candidate_state(
    pair: &AmplitudePair,
    child0: &StateVector,
    child1: &StateVector,
) -> Result<StateVector, GluingError> {
    if child0.qubits() != child1.qubits() {
        return Err(GluingError::ChildMismatch {
            left: child0.qubits(),
            right: child1.qubits(),
        });
    }
    let amps = child0
        .amplitudes()
        .iter()
        .map(|a| pair.b0 * a)
        .chain(child1.amplitudes().iter().map(|a| pair.b1 * a))
        .collect();
    Ok(StateVector::normalized(amps)?)
}

/// The best gluing pair for known children, computed from the true parent.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalCoefficients {
    pub pair: AmplitudePair,
    /// Branch weights `w_b` of the parent.
    pub weights: [f64; 2],
    /// `c_b = ⟨ψ_b|ψ̂_b⟩`, zero for a branch of weight zero.
    pub overlaps: [Complex64; 2],
    /// Set when `s = Σ w_b |c_b|²` vanishes; `pair` is then `(1, 0)`.
    pub degenerate: bool,
}

impl OptimalCoefficients {
    /// `s = Σ w_b |c_b|²`, the fidelity of the glued state with the parent.
    pub fn glued_fidelity(&self) -> f64 {
        self.weights[0] * self.overlaps[0].norm_sqr() + self.weights[1] * self.overlaps[1].norm_sqr()
    }
}

/// `ᾱ_b = sqrt(w_b) c_b* / sqrt(s)`. Needs the true parent, so it is an
/// oracle for tests and diagnostics, never part of reconstruction.
pub fn optimal_coefficients(
    parent: &StateVector,
    child0: &StateVector,
    child1: &StateVector,
) -> Result<OptimalCoefficients, GluingError> {
    if child0.qubits() != child1.qubits() {
        return Err(GluingError::ChildMismatch {
            left: child0.qubits(),
            right: child1.qubits(),
        });
    }
    if parent.qubits() != child0.qubits() + 1 {
        return Err(GluingError::ParentMismatch {
            expected: child0.qubits() + 1,
            got: parent.qubits(),
        });
    }
    let mut weights = [0.0; 2];
    let mut overlaps = [Complex64::new(0.0, 0.0); 2];
    for (b, child) in [child0, child1].into_iter().enumerate() {
        let node = parent.condition_on_prefix(Prefix::new(1, b))?;
        weights[b] = node.weight;
        if let Some(cond) = node.conditional {
            overlaps[b] = cond.inner(child)?;
        }
    }
    let s = weights[0] * overlaps[0].norm_sqr() + weights[1] * overlaps[1].norm_sqr();
    if s < ZERO_WEIGHT {
        return Ok(OptimalCoefficients {
            pair: AmplitudePair::zero(),
            weights,
            overlaps,
            degenerate: true,
        });
    }
    let coef = |b: usize| weights[b].sqrt() * overlaps[b].conj() / s.sqrt();
    Ok(OptimalCoefficients {
        pair: AmplitudePair::new(coef(0), coef(1))?,
        weights,
        overlaps,
        degenerate: false,
    })
}

/// Points covering the Bloch sphere to within a chordal resolution.
#[derive(Clone, Debug)]
pub struct BlochNet {
    resolution: f64,
    angles: Vec<(f64, f64)>,
    points: Vec<AmplitudePair>,
}

/// `|net| ≤ NET_SIZE_CONSTANT / ε*²` for `ε* ≤ 1`.
pub const NET_SIZE_CONSTANT: f64 = 20.0;

/// Latitude rings spaced `π/R ≤ ε*` apart, each holding
/// `max(1, ceil(2π sin θ / ε*))` equally spaced points; the geodesic
/// covering radius is then at most `ε*`, and the chordal one no larger.
/// Both poles are rings of one point.
pub fn build_net(resolution: f64) -> Result<BlochNet, GluingError> {
    if !(resolution > 0.0 && resolution <= 2.0) {
        return Err(GluingError::InvalidResolution(resolution));
    }
    let rings = (PI / resolution).ceil() as usize;
    let mut angles = Vec::new();
    for i in 0..=rings {
        let theta = PI * i as f64 / rings as f64;
        let count = if i == 0 || i == rings {
            1
        } else {
            ((TAU * theta.sin() / resolution).ceil() as usize).max(1)
        };
        for k in 0..count {
            angles.push((theta, TAU * k as f64 / count as f64));
        }
    }
    let points = angles
        .iter()
        .map(|&(t, p)| AmplitudePair::from_angles(t, p))
        .collect();
    Ok(BlochNet {
        resolution,
        angles,
        points,
    })
}

/// Default ratio between net resolution and `sqrt(ε*)`.
pub const DEFAULT_NET_SCALE: f64 = 1.0;

/// The net used for a search at accuracy `ε*`: chordal resolution
/// `scale · sqrt(ε*)`, capped at 2. A resolution `h` costs at most `h/2` in
/// infidelity distance, the same order as the estimator's `sqrt(ε*)`.
pub fn net_for_accuracy(eps_star: f64, scale: f64) -> Result<BlochNet, GluingError> {
    build_net((scale * eps_star.sqrt()).min(2.0))
}

impl BlochNet {
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[AmplitudePair] {
        &self.points
    }

    pub fn angles(&self) -> &[(f64, f64)] {
        &self.angles
    }

    /// Index and chordal distance of the closest point.
    pub fn nearest(&self, pair: &AmplitudePair) -> (usize, f64) {
        self.points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.chordal_distance(pair)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    /// Largest nearest-point distance over `samples` Haar-random pairs.
    pub fn audit<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> f64 {
        (0..samples)
            .map(|_| self.nearest(&AmplitudePair::random(rng)).1)
            .fold(0.0, f64::max)
    }
}

/// Outcome of a net search.
#[derive(Clone, Debug)]
pub struct CoeffSearch {
    pub pair: AmplitudePair,
    pub net_index: usize,
    /// Estimated infidelity distance `D̂/√2` per net point.
    pub scores: Vec<f64>,
}

impl CoeffSearch {
    /// Writes `net_index,theta,phi,d_hat` rows.
    pub fn write_csv<W: Write>(&self, net: &BlochNet, w: W) -> Result<(), GluingError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["net_index", "theta", "phi", "d_hat"])?;
        for (i, (&(theta, phi), score)) in net.angles().iter().zip(&self.scores).enumerate() {
            out.write_record([i.to_string(), theta.to_string(), phi.to_string(), score.to_string()])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Per block of the plan, the Hermitian 2×2 matrix
/// `M_ab = ⟨a|P_0|b⟩ ⟨ψ̂_a|P'|ψ̂_b⟩` with `P = P_0 ⊗ P'`, so that a
/// candidate's expectation is `Re β† M β` without building the state.
struct GlueTable {
    blocks: Vec<[[Complex64; 2]; 2]>,
}

impl GlueTable {
    fn new(prepared: &PreparedOutcomes, child0: &StateVector, child1: &StateVector) -> Self {
        let children = [child0.amplitudes(), child1.amplitudes()];
        let zero = Complex64::new(0.0, 0.0);
        let blocks = prepared
            .labels()
            .map(|label| {
                let (head, tail) = label.letters().split_first().expect("parent has ≥ 1 qubit");
                let tail = PauliLabel::new(tail.to_vec());
                let head = single_qubit_matrix(*head);
                let mut m = [[zero; 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        if head[a][b] != zero {
                            m[a][b] = head[a][b] * pauli_matrix_element(children[a], children[b], &tail);
                        }
                    }
                }
                m
            })
            .collect();
        Self { blocks }
    }

    fn means(&self, pair: &AmplitudePair, out: &mut Vec<f64>) {
        let beta = [pair.b0, pair.b1];
        out.clear();
        out.extend(self.blocks.iter().map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    acc += beta[a].conj() * beta[b] * m[a][b];
                }
            }
            acc.re
        }));
    }
}

fn single_qubit_matrix(p: Pauli) -> [[Complex64; 2]; 2] {
    let c = |re, im| Complex64::new(re, im);
    match p {
        Pauli::I => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        Pauli::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        Pauli::Y => [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        Pauli::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

/// Reads the planned outcomes from `source` and searches the net.
pub fn find_coeffs(
    child0: &StateVector,
    child1: &StateVector,
    plan: &FrobeniusPlan,
    source: &mut dyn OutcomeSource,
    net: &BlochNet,
    sampling: SigmaSampling,
    seed: u64,
) -> Result<CoeffSearch, GluingError> {
    let prepared = PreparedOutcomes::collect(plan, source)?;
    find_coeffs_prepared(child0, child1, plan, &prepared, net, sampling, seed)
}

/// Scores every net point against the same prepared outcomes and returns
/// the smallest estimate, lowest index first on ties. Candidate `i` draws
/// its `σ` samples from the stream `(seed, "find-coeffs", i)`.
pub fn find_coeffs_prepared(
    child0: &StateVector,
    child1: &StateVector,
    plan: &FrobeniusPlan,
    prepared: &PreparedOutcomes,
    net: &BlochNet,
    sampling: SigmaSampling,
    seed: u64,
) -> Result<CoeffSearch, GluingError> {
    if child0.qubits() != child1.qubits() {
        return Err(GluingError::ChildMismatch {
            left: child0.qubits(),
            right: child1.qubits(),
        });
    }
    if prepared.qubits() != child0.qubits() + 1 {
        return Err(GluingError::ParentMismatch {
            expected: child0.qubits() + 1,
            got: prepared.qubits(),
        });
    }
    if net.is_empty() {
        return Err(GluingError::EmptyNet);
    }
    let table = GlueTable::new(prepared, child0, child1);
    let mut means = Vec::with_capacity(table.blocks.len());
    let mut scores = Vec::with_capacity(net.len());
    for (i, pair) in net.points().iter().enumerate() {
        table.means(pair, &mut means);
        let mut rng = stream(seed, "find-coeffs", i as u64);
        let est = estimate_with_means(plan, prepared, &means, sampling, &mut rng)?;
        scores.push(est.infidelity_distance());
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    Ok(CoeffSearch {
        pair: net.points()[best],
        net_index: best,
        scores,
    })
}
