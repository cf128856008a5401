//! Dense statevector simulation.
//!
//! Amplitudes are stored in the computational basis with the first qubit as
//! the most significant bit of the index. A measured bit value 0 reads as the
//! outcome `+1` and bit value 1 as `-1`, for every axis.
//!
//! Besides sampling (the stand-in for a device), this module holds the exact
//! oracles used to score reconstructions and to simulate known candidate
//! states: Pauli expectations, fidelity, distances and prefix conditioning.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::pauli::{Axis, MeasurementBasis, OutcomeBits, Pauli, PauliLabel};

/// Tolerance on the squared norm of a state.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Weights below this are treated as exactly zero.
pub const ZERO_WEIGHT: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("amplitude count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("squared norm {0} is not 1")]
    NotNormalized(f64),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("prefix of length {prefix} on a {qubits}-qubit state")]
    PrefixTooLong { prefix: usize, qubits: usize },
    #[error("suffix basis has {got} axes, expected {expected}")]
    BasisLength { expected: usize, got: usize },
    #[error("label has {got} letters, expected {expected}")]
    LabelLength { expected: usize, got: usize },
    #[error("Rademacher mean {0} outside [-1, 1]")]
    MeanOutOfRange(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// A bit string `x` naming a node of the prefix tree; bit 0 of the string is
/// the most significant bit of `bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Prefix {
    len: usize,
    bits: usize,
}

impl Prefix {
    pub fn new(len: usize, bits: usize) -> Self {
        debug_assert!(len >= usize::BITS as usize || bits >> len == 0);
        Self { len, bits }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn child(&self, bit: usize) -> Prefix {
        Prefix::new(self.len + 1, (self.bits << 1) | (bit & 1))
    }

    /// All prefixes of length `len`, in increasing order.
    pub fn all(len: usize) -> impl Iterator<Item = Prefix> {
        (0..(1usize << len)).map(move |bits| Prefix::new(len, bits))
    }

    /// `-` for the empty prefix, the bit string otherwise.
    pub fn to_token(&self) -> String {
        if self.is_empty() {
            "-".to_string()
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len).rev() {
            write!(f, "{}", (self.bits >> i) & 1)?;
        }
        Ok(())
    }
}

impl FromStr for Prefix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" || s.is_empty() {
            return Ok(Prefix::empty());
        }
        let mut bits = 0usize;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(format!("invalid prefix bit {c:?}")),
                };
        }
        Ok(Prefix::new(s.len(), bits))
    }
}

/// A normalized pure state on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amps: Vec<Complex64>) -> Result<Self, StateError> {
        let qubits = qubits_for_len(amps.len())?;
        let norm = squared_norm(&amps);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self { qubits, amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self, StateError> {
        let qubits = qubits_for_len(amps.len())?;
        let norm = squared_norm(&amps).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(StateError::ZeroNorm);
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(Self { qubits, amps })
    }

    /// The 0-qubit state, a single amplitude 1.
    pub fn scalar() -> Self {
        Self {
            qubits: 0,
            amps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { qubits, amps }
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus(qubits: usize) -> Self {
        let d = 1usize << qubits;
        let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        Self {
            qubits,
            amps: vec![a; d],
        }
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`; the Bell state for two qubits.
    pub fn ghz(qubits: usize) -> Self {
        if qubits == 0 {
            return Self::scalar();
        }
        let d = 1usize << qubits;
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[d - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self { qubits, amps }
    }

    /// Uniformly (Haar) random pure state: i.i.d. complex Gaussian
    /// amplitudes, normalized.
    pub fn haar_random<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> Self {
        if qubits == 0 {
            return Self::scalar();
        }
        loop {
            let amps: Vec<Complex64> = (0..1usize << qubits)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            if let Ok(s) = Self::normalized(amps) {
                return s;
            }
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, StateError> {
        self.same_dim(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn same_dim(&self, other: &StateVector) -> Result<(), StateError> {
        if self.qubits != other.qubits {
            return Err(StateError::DimensionMismatch {
                left: self.qubits,
                right: other.qubits,
            });
        }
        Ok(())
    }

    /// Probability weight `p_x` of a prefix and the renormalized conditional
    /// state on the remaining qubits.
    pub fn condition_on_prefix(&self, prefix: Prefix) -> Result<NodeDecomposition, StateError> {
        if prefix.len() > self.qubits {
            return Err(StateError::PrefixTooLong {
                prefix: prefix.len(),
                qubits: self.qubits,
            });
        }
        let rest = self.qubits - prefix.len();
        let start = prefix.bits() << rest;
        let block = &self.amps[start..start + (1 << rest)];
        let weight = squared_norm(block);
        let conditional = if weight < ZERO_WEIGHT {
            None
        } else {
            let scale = 1.0 / weight.sqrt();
            Some(StateVector {
                qubits: rest,
                amps: block.iter().map(|a| a * scale).collect(),
            })
        };
        Ok(NodeDecomposition {
            prefix,
            weight,
            conditional,
        })
    }

    /// Amplitudes after rotating every qubit from position `first` on so
    /// that its `axis` eigenbasis maps onto the computational basis.
    fn rotated(&self, first: usize, basis: &MeasurementBasis) -> Vec<Complex64> {
        let mut amps = self.amps.clone();
        for (offset, axis) in basis.axes().iter().enumerate() {
            let q = first + offset;
            match axis {
                Axis::Z => {}
                Axis::X => apply_single(&mut amps, self.qubits, q, &HADAMARD),
                Axis::Y => apply_single(&mut amps, self.qubits, q, &Y_TO_Z),
            }
        }
        amps
    }

    /// Joint Born probabilities over basis indices when the first
    /// `prefix_len` qubits are measured in the computational basis and the
    /// rest in `suffix_basis`.
    pub fn outcome_distribution(
        &self,
        prefix_len: usize,
        suffix_basis: &MeasurementBasis,
    ) -> Result<Vec<f64>, StateError> {
        if prefix_len > self.qubits {
            return Err(StateError::PrefixTooLong {
                prefix: prefix_len,
                qubits: self.qubits,
            });
        }
        let expected = self.qubits - prefix_len;
        if suffix_basis.len() != expected {
            return Err(StateError::BasisLength {
                expected,
                got: suffix_basis.len(),
            });
        }
        Ok(self
            .rotated(prefix_len, suffix_basis)
            .iter()
            .map(|a| a.norm_sqr())
            .collect())
    }

    /// One copy: computational-basis prefix of length `prefix_len`, product
    /// basis on the rest.
    pub fn sample_measurement<R: Rng + ?Sized>(
        &self,
        prefix_len: usize,
        suffix_basis: &MeasurementBasis,
        rng: &mut R,
    ) -> Result<(Prefix, OutcomeBits), StateError> {
        let probs = self.outcome_distribution(prefix_len, suffix_basis)?;
        let index = OutcomeSampler::new(&probs).sample(rng);
        let rest = self.qubits - prefix_len;
        Ok((
            Prefix::new(prefix_len, index >> rest),
            OutcomeBits::from_index(rest, index & ((1 << rest) - 1)),
        ))
    }

    /// `⟨ψ|P|ψ⟩`, clamped to `[-1, 1]`.
    pub fn pauli_expectation(&self, label: &PauliLabel) -> Result<f64, StateError> {
        if label.len() != self.qubits {
            return Err(StateError::LabelLength {
                expected: self.qubits,
                got: label.len(),
            });
        }
        Ok(pauli_expectation_raw(&self.amps, label).clamp(-1.0, 1.0))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<(), StateError> {
        for a in &self.amps {
            writeln!(w, "{:.17e} {:.17e}", a.re, a.im)?;
        }
        Ok(())
    }

    /// Reads `real imag` pairs, one amplitude per line. Blank lines and `#`
    /// comments are skipped; the result is renormalized.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self, StateError> {
        let mut amps = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let parse = |tok: Option<&str>| -> Result<f64, StateError> {
                tok.ok_or_else(|| StateError::Parse {
                    line: i + 1,
                    message: "expected `real imag`".into(),
                })?
                .parse::<f64>()
                .map_err(|e| StateError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            };
            let mut it = body.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty());
            let re = parse(it.next())?;
            let im = parse(it.next())?;
            amps.push(Complex64::new(re, im));
        }
        Self::normalized(amps)
    }

    pub fn load(path: &Path) -> Result<Self, StateError> {
        let f = std::fs::File::open(path)?;
        Self::read_text(std::io::BufReader::new(f))
    }

    pub fn save(&self, path: &Path) -> Result<(), StateError> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// The weight and conditional state of one prefix-tree node.
#[derive(Clone, Debug)]
pub struct NodeDecomposition {
    pub prefix: Prefix,
    pub weight: f64,
    /// `None` when the prefix has zero probability.
    pub conditional: Option<StateVector>,
}

/// Inverse-CDF sampler over a small discrete distribution.
#[derive(Clone, Debug)]
pub struct OutcomeSampler {
    cdf: Vec<f64>,
}

impl OutcomeSampler {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p.max(0.0);
                acc
            })
            .collect();
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        Self { cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        if self.cdf.len() <= 16 {
            self.cdf.iter().position(|&c| u < c).unwrap_or(self.cdf.len() - 1)
        } else {
            self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
        }
    }
}

/// Fidelity `|⟨ψ|φ⟩|²`.
pub fn exact_fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64, StateError> {
    Ok(psi.inner(phi)?.norm_sqr().clamp(0.0, 1.0))
}

/// Frobenius norm of the projector difference, `sqrt(2(1 - F))`.
pub fn exact_frobenius(psi: &StateVector, phi: &StateVector) -> Result<f64, StateError> {
    Ok((2.0 * (1.0 - exact_fidelity(psi, phi)?)).max(0.0).sqrt())
}

/// `sqrt(1 - F)`, the Frobenius distance divided by `√2`.
pub fn infidelity_distance(psi: &StateVector, phi: &StateVector) -> Result<f64, StateError> {
    Ok((1.0 - exact_fidelity(psi, phi)?).max(0.0).sqrt())
}

/// A `±1` draw with the given mean.
pub fn rademacher_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<i8, StateError> {
    if !(-1.0..=1.0).contains(&mean) {
        return Err(StateError::MeanOutOfRange(mean));
    }
    let p = 0.5 * (1.0 + mean);
    Ok(if rng.random::<f64>() < p { 1 } else { -1 })
}

pub(crate) fn pauli_expectation_raw(amps: &[Complex64], label: &PauliLabel) -> f64 {
    pauli_matrix_element(amps, amps, label).re
}

/// `⟨bra|P|ket⟩` for equal-length amplitude vectors.
pub fn pauli_matrix_element(bra: &[Complex64], ket: &[Complex64], label: &PauliLabel) -> Complex64 {
    let (flip, phase) = label.masks();
    let ys = label.count(Pauli::Y) % 4;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, a) in ket.iter().enumerate() {
        let term = bra[k ^ flip].conj() * a;
        if (k & phase).count_ones() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    // i^{#Y}
    match ys {
        0 => acc,
        1 => acc * Complex64::new(0.0, 1.0),
        2 => -acc,
        _ => acc * Complex64::new(0.0, -1.0),
    }
}

type Gate = [[Complex64; 2]; 2];

const HADAMARD: Gate = [
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(FRAC_1_SQRT_2, 0.0)],
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(-FRAC_1_SQRT_2, 0.0)],
];

// H · S†: maps |+i⟩ to |0⟩ and |-i⟩ to |1⟩.
const Y_TO_Z: Gate = [
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, -FRAC_1_SQRT_2)],
    [Complex64::new(FRAC_1_SQRT_2, 0.0), Complex64::new(0.0, FRAC_1_SQRT_2)],
];

fn apply_single(amps: &mut [Complex64], qubits: usize, q: usize, g: &Gate) {
    let stride = 1usize << (qubits - 1 - q);
    let d = amps.len();
    let mut base = 0;
    while base < d {
        for i in base..base + stride {
            let a0 = amps[i];
            let a1 = amps[i + stride];
            amps[i] = g[0][0] * a0 + g[0][1] * a1;
            amps[i + stride] = g[1][0] * a0 + g[1][1] * a1;
        }
        base += 2 * stride;
    }
}

fn squared_norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn qubits_for_len(len: usize) -> Result<usize, StateError> {
    if len == 0 || !len.is_power_of_two() {
        return Err(StateError::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Dense `d × d` matrix of a Pauli label, built by Kronecker products.
    fn dense_pauli(label: &PauliLabel) -> Vec<Vec<Complex64>> {
        let one = |p: Pauli| -> [[Complex64; 2]; 2] {
            match p {
                Pauli::I => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
                Pauli::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
                Pauli::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
                Pauli::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
            }
        };
        let mut m = vec![vec![c(1., 0.)]];
        for &p in label.letters() {
            let g = one(p);
            let d = m.len();
            let mut next = vec![vec![c(0., 0.); 2 * d]; 2 * d];
            for i in 0..d {
                for j in 0..d {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[2 * i + a][2 * j + b] = m[i][j] * g[a][b];
                        }
                    }
                }
            }
            m = next;
        }
        m
    }

    #[test]
    fn haar_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(StateVector::haar_random(0, &mut rng), StateVector::scalar());
        let a = StateVector::haar_random(3, &mut ChaCha8Rng::seed_from_u64(5));
        let b = StateVector::haar_random(3, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert!((squared_norm(a.amplitudes()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_first_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trials = 10_000;
        let mean: f64 = (0..trials)
            .map(|_| StateVector::haar_random(3, &mut rng).amplitudes()[0].norm_sqr())
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 0.125).abs() < 0.01, "{mean}");
    }

    #[test]
    fn conditioning_examples() {
        let bell = StateVector::ghz(2);
        let node = bell.condition_on_prefix("0".parse().unwrap()).unwrap();
        assert!((node.weight - 0.5).abs() < 1e-15);
        let cond = node.conditional.unwrap();
        assert!((exact_fidelity(&cond, &StateVector::basis(1, 0)).unwrap() - 1.0).abs() < 1e-12);

        // |1⟩ ⊗ |+⟩
        let s = StateVector::new(vec![c(0., 0.), c(0., 0.), c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)]).unwrap();
        let node = s.condition_on_prefix("0".parse().unwrap()).unwrap();
        assert_eq!(node.weight, 0.0);
        assert!(node.conditional.is_none());
        assert!(s.condition_on_prefix("000".parse().unwrap()).is_err());
    }

    #[test]
    fn prefix_weights_sum_to_one() {
        let psi = StateVector::haar_random(5, &mut ChaCha8Rng::seed_from_u64(3));
        for len in 0..=5 {
            let total: f64 = Prefix::all(len)
                .map(|x| psi.condition_on_prefix(x).unwrap().weight)
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        // p_x = p_x0 + p_x1
        for x in Prefix::all(2) {
            let p = psi.condition_on_prefix(x).unwrap().weight;
            let p0 = psi.condition_on_prefix(x.child(0)).unwrap().weight;
            let p1 = psi.condition_on_prefix(x.child(1)).unwrap().weight;
            assert!((p - p0 - p1).abs() < 1e-14);
        }
    }

    #[test]
    fn conditional_states_retensor_to_parent() {
        let psi = StateVector::haar_random(4, &mut ChaCha8Rng::seed_from_u64(8));
        for x in Prefix::all(2) {
            let node = psi.condition_on_prefix(x).unwrap();
            let parent = node.conditional.unwrap();
            let mut rebuilt = Vec::new();
            for b in 0..2 {
                let child = psi.condition_on_prefix(x.child(b)).unwrap();
                let amp = (child.weight / node.weight).sqrt();
                rebuilt.extend(child.conditional.unwrap().amplitudes().iter().map(|a| a * amp));
            }
            for (r, p) in rebuilt.iter().zip(parent.amplitudes()) {
                assert!((r - p).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn sampling_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let zero = StateVector::basis(1, 0);
        let z = MeasurementBasis::computational(1);
        for _ in 0..100 {
            let (_, out) = zero.sample_measurement(0, &z, &mut rng).unwrap();
            assert_eq!(out.bits(), &[1]);
        }
        let x: MeasurementBasis = "X".parse().unwrap();
        let draws = 10_000;
        let plus = (0..draws)
            .filter(|_| zero.sample_measurement(0, &x, &mut rng).unwrap().1.bits()[0] == 1)
            .count();
        assert!((plus as f64 / draws as f64 - 0.5).abs() < 0.02);

        let bell = StateVector::ghz(2);
        let mut ones = 0;
        for _ in 0..draws {
            let (prefix, out) = bell.sample_measurement(1, &z, &mut rng).unwrap();
            let expected = if prefix.bits() == 0 { 1 } else { -1 };
            assert_eq!(out.bits(), &[expected]);
            ones += prefix.bits();
        }
        assert!((ones as f64 / draws as f64 - 0.5).abs() < 0.02);
        assert!(bell.sample_measurement(1, &"XX".parse().unwrap(), &mut rng).is_err());
    }

    #[test]
    fn eigenstates_rotate_to_plus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let plus_i = StateVector::new(vec![c(FRAC_1_SQRT_2, 0.), c(0., FRAC_1_SQRT_2)]).unwrap();
        let plus = StateVector::plus(1);
        for _ in 0..50 {
            assert_eq!(plus_i.sample_measurement(0, &"Y".parse().unwrap(), &mut rng).unwrap().1.bits(), &[1]);
            assert_eq!(plus.sample_measurement(0, &"X".parse().unwrap(), &mut rng).unwrap().1.bits(), &[1]);
        }
    }

    #[test]
    fn expectation_examples_and_dense_oracle() {
        let zero = StateVector::basis(1, 0);
        assert_eq!(zero.pauli_expectation(&"Z".parse().unwrap()).unwrap(), 1.0);
        assert_eq!(zero.pauli_expectation(&"X".parse().unwrap()).unwrap(), 0.0);
        assert!(zero.pauli_expectation(&"XX".parse().unwrap()).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let psi = StateVector::haar_random(3, &mut rng);
            for k in 0..64 {
                let label = PauliLabel::from_index(3, k).unwrap();
                let m = dense_pauli(&label);
                let a = psi.amplitudes();
                let mut dense = c(0., 0.);
                for i in 0..8 {
                    for j in 0..8 {
                        dense += a[i].conj() * m[i][j] * a[j];
                    }
                }
                assert!(dense.im.abs() < 1e-10);
                let fast = psi.pauli_expectation(&label).unwrap();
                assert!((fast - dense.re).abs() < 1e-10, "{label}: {fast} vs {}", dense.re);
            }
        }
    }

    #[test]
    fn distance_examples() {
        let zero = StateVector::basis(1, 0);
        let one = StateVector::basis(1, 1);
        assert_eq!(exact_fidelity(&zero, &zero).unwrap(), 1.0);
        assert_eq!(exact_frobenius(&zero, &zero).unwrap(), 0.0);
        assert_eq!(exact_fidelity(&zero, &one).unwrap(), 0.0);
        assert!((exact_frobenius(&zero, &one).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(exact_fidelity(&zero, &StateVector::basis(2, 0)).is_err());

        // dense projector-difference oracle
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let a = StateVector::haar_random(2, &mut rng);
            let b = StateVector::haar_random(2, &mut rng);
            let (x, y) = (a.amplitudes(), b.amplitudes());
            let mut fro2 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    fro2 += (x[i] * x[j].conj() - y[i] * y[j].conj()).norm_sqr();
                }
            }
            let d = exact_frobenius(&a, &b).unwrap();
            assert!((d - fro2.sqrt()).abs() < 1e-10);
            let f = exact_fidelity(&a, &b).unwrap();
            assert!((d * d - (2.0 - 2.0 * f)).abs() < 1e-12);
            assert!((infidelity_distance(&a, &b).unwrap() * 2f64.sqrt() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn rademacher_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!((0..1000).all(|_| rademacher_sample(1.0, &mut rng).unwrap() == 1));
        assert!(rademacher_sample(1.5, &mut rng).is_err());
        let mean = |m: f64, n: usize, rng: &mut ChaCha8Rng| {
            (0..n).map(|_| rademacher_sample(m, rng).unwrap() as f64).sum::<f64>() / n as f64
        };
        assert!(mean(0.0, 10_000, &mut rng).abs() < 0.05);
        assert!((mean(-0.6, 100_000, &mut rng) + 0.6).abs() < 0.01);
    }

    #[test]
    fn text_roundtrip() {
        let psi = StateVector::haar_random(2, &mut ChaCha8Rng::seed_from_u64(1));
        let mut buf = Vec::new();
        psi.write_text(&mut buf).unwrap();
        let back = StateVector::read_text(&buf[..]).unwrap();
        for (a, b) in psi.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(StateVector::read_text(&b"1 0\n0 0\n0 0\n"[..]).is_err());
        assert!(StateVector::read_text(&b"# ghz\n1 0\n\n0 0\n0 0\n1 0\n"[..]).is_ok());
    }

    #[test]
    fn prefix_tokens() {
        let p: Prefix = "0110".parse().unwrap();
        assert_eq!(p.bits(), 6);
        assert_eq!(p.to_string(), "0110");
        assert_eq!(Prefix::empty().to_token(), "-");
        assert_eq!("-".parse::<Prefix>().unwrap(), Prefix::empty());
        assert_eq!(p.child(1).to_string(), "01101");
    }
}
