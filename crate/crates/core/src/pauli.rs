//! Pauli labels, product measurement bases, and observable evaluation.
//!
//! A [`PauliLabel`] names an `m`-qubit observable as a word over `{I,X,Y,Z}`.
//! Letter 0 acts on the first qubit, which is the most significant bit of a
//! computational-basis index. Labels are also indexed `0..4^m` in base 4
//! (`I=0, X=1, Y=2, Z=3`, first letter most significant), so a uniformly
//! sampled coordinate of a `4^m`-vector and a uniformly sampled label are the
//! same thing.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("invalid Pauli letter {0:?}")]
    InvalidLetter(char),
    #[error("invalid basis axis {0:?}")]
    InvalidAxis(char),
    #[error("length mismatch: label has {label} letters, basis {basis}, outcome {outcome}")]
    LengthMismatch {
        label: usize,
        basis: usize,
        outcome: usize,
    },
    #[error("basis measures qubit {position} along {basis} but the label has {label}")]
    BasisMismatch {
        position: usize,
        label: Pauli,
        basis: Axis,
    },
    #[error("label index {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: u64, qubits: usize },
    #[error("outcome bits must be +1 or -1, got {0}")]
    InvalidOutcome(i8),
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn digit(self) -> u64 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn from_digit(d: u64) -> Pauli {
        Pauli::ALL[(d & 3) as usize]
    }

    pub fn axis(self) -> Option<Axis> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(Axis::X),
            Pauli::Y => Some(Axis::Y),
            Pauli::Z => Some(Axis::Z),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Measurement axis of one qubit in a Pauli basis measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }

    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// How identity positions of a label are measured when it is lifted to a
/// full product basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum IdentityFill {
    #[default]
    Z,
    Random,
}

/// An `m`-qubit Pauli observable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PauliLabel {
    letters: Vec<Pauli>,
}

impl PauliLabel {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(m: usize) -> Self {
        Self {
            letters: vec![Pauli::I; m],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Qubit positions where the label is not the identity.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(i, _)| i)
    }

    /// Bit masks over computational-basis indices: `(flip, phase)` where
    /// `flip` marks X/Y positions and `phase` marks Y/Z positions.
    pub fn masks(&self) -> (usize, usize) {
        let m = self.len();
        let mut flip = 0usize;
        let mut phase = 0usize;
        for (q, p) in self.letters.iter().enumerate() {
            let bit = 1usize << (m - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase)
    }

    /// Index mask of the support, for parity evaluation on basis indices.
    pub fn support_mask(&self) -> usize {
        let (flip, phase) = self.masks();
        flip | phase
    }

    pub fn count(&self, letter: Pauli) -> usize {
        self.letters.iter().filter(|p| **p == letter).count()
    }

    /// Base-4 index in `0..4^m`.
    pub fn index(&self) -> u64 {
        self.letters.iter().fold(0u64, |acc, p| acc * 4 + p.digit())
    }

    pub fn from_index(m: usize, index: u64) -> Result<Self, PauliError> {
        if m < 32 && index >= 1u64 << (2 * m) {
            return Err(PauliError::IndexOutOfRange { index, qubits: m });
        }
        let mut letters = vec![Pauli::I; m];
        let mut k = index;
        for slot in letters.iter_mut().rev() {
            *slot = Pauli::from_digit(k);
            k >>= 2;
        }
        Ok(Self { letters })
    }

    /// Uniform over all `4^m` labels.
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let letters = (0..m)
            .map(|_| Pauli::from_digit(rng.random_range(0..4u64)))
            .collect();
        Self { letters }
    }

    /// The product basis measuring every support qubit along its own axis
    /// and every identity qubit according to `fill`.
    pub fn lift<R: Rng + ?Sized>(&self, fill: IdentityFill, rng: &mut R) -> MeasurementBasis {
        let axes = self
            .letters
            .iter()
            .map(|p| match (p.axis(), fill) {
                (Some(a), _) => a,
                (None, IdentityFill::Z) => Axis::Z,
                (None, IdentityFill::Random) => [Axis::X, Axis::Y, Axis::Z][rng.random_range(0..3)],
            })
            .collect();
        MeasurementBasis { axes }
    }

    /// [`lift`](Self::lift) with the deterministic Z fill.
    pub fn lift_z(&self) -> MeasurementBasis {
        MeasurementBasis {
            axes: self
                .letters
                .iter()
                .map(|p| p.axis().unwrap_or(Axis::Z))
                .collect(),
        }
    }

    /// Text form used in files: the letters, or `_` for the 0-qubit label.
    pub fn to_token(&self) -> String {
        if self.is_empty() {
            "_".to_string()
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliLabel {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "_" {
            return Ok(Self::default());
        }
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(PauliError::InvalidLetter(c)),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { letters })
    }
}

/// A Pauli product basis: one axis per qubit, no identities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct MeasurementBasis {
    axes: Vec<Axis>,
}

impl MeasurementBasis {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    pub fn computational(m: usize) -> Self {
        Self {
            axes: vec![Axis::Z; m],
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn to_token(&self) -> String {
        if self.is_empty() {
            "_".to_string()
        } else {
            self.to_string()
        }
    }
}

impl fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axes {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for MeasurementBasis {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "_" {
            return Ok(Self::default());
        }
        let axes = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'X' => Ok(Axis::X),
                'Y' => Ok(Axis::Y),
                'Z' => Ok(Axis::Z),
                _ => Err(PauliError::InvalidAxis(c)),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { axes })
    }
}

/// Per-qubit `±1` results of one product-basis measurement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct OutcomeBits {
    bits: Vec<i8>,
}

impl OutcomeBits {
    pub fn new(bits: Vec<i8>) -> Result<Self, PauliError> {
        if let Some(&b) = bits.iter().find(|b| **b != 1 && **b != -1) {
            return Err(PauliError::InvalidOutcome(b));
        }
        Ok(Self { bits })
    }

    /// Outcomes encoded in the low `m` bits of a basis index: bit value 0
    /// reads `+1`, bit value 1 reads `-1`, first qubit most significant.
    pub fn from_index(m: usize, index: usize) -> Self {
        let bits = (0..m)
            .map(|q| if (index >> (m - 1 - q)) & 1 == 0 { 1 } else { -1 })
            .collect();
        Self { bits }
    }

    pub fn bits(&self) -> &[i8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Compact `+`/`-` string, `_` when empty.
    pub fn to_token(&self) -> String {
        if self.is_empty() {
            return "_".to_string();
        }
        self.bits
            .iter()
            .map(|b| if *b > 0 { '+' } else { '-' })
            .collect()
    }

    pub fn from_token(s: &str) -> Result<Self, PauliError> {
        if s == "_" {
            return Ok(Self::default());
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(PauliError::InvalidOutcome(0)),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { bits })
    }
}

/// Lifts `label` to a product basis; free-function form of
/// [`PauliLabel::lift`].
pub fn lift_to_basis<R: Rng + ?Sized>(
    label: &PauliLabel,
    fill: IdentityFill,
    rng: &mut R,
) -> MeasurementBasis {
    label.lift(fill, rng)
}

/// Value of the observable `label` read off a product-basis outcome: the
/// product of the outcome bits over the label's support (`+1` for the
/// identity).
pub fn evaluate_observable(
    label: &PauliLabel,
    basis: &MeasurementBasis,
    outcome: &OutcomeBits,
) -> Result<i8, PauliError> {
    if label.len() != basis.len() || basis.len() != outcome.len() {
        return Err(PauliError::LengthMismatch {
            label: label.len(),
            basis: basis.len(),
            outcome: outcome.len(),
        });
    }
    let mut sign = 1i8;
    for position in label.support() {
        let letter = label.letters[position];
        let axis = basis.axes[position];
        if letter.axis() != Some(axis) {
            return Err(PauliError::BasisMismatch {
                position,
                label: letter,
                basis: axis,
            });
        }
        sign *= outcome.bits[position];
    }
    Ok(sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn label(s: &str) -> PauliLabel {
        s.parse().unwrap()
    }

    #[test]
    fn lift_fills_identities_with_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(label("XIZ").lift(IdentityFill::Z, &mut rng).to_string(), "XZZ");
        assert_eq!(label("III").lift(IdentityFill::Z, &mut rng).to_string(), "ZZZ");
        assert_eq!(label("Y").lift(IdentityFill::Random, &mut rng).to_string(), "Y");
        assert_eq!(label("XIZ").lift_z(), label("XIZ").lift(IdentityFill::Z, &mut rng));
    }

    #[test]
    fn random_fill_keeps_support_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = label("IXIYZI");
        for _ in 0..50 {
            let b = l.lift(IdentityFill::Random, &mut rng);
            for q in l.support() {
                assert_eq!(Some(b.axes()[q]), l.letters()[q].axis());
            }
        }
    }

    #[test]
    fn observable_value_is_product_over_support() {
        let out = OutcomeBits::new(vec![-1, 1, -1]).unwrap();
        assert_eq!(evaluate_observable(&label("XIZ"), &"XZZ".parse().unwrap(), &out), Ok(1));
        let out = OutcomeBits::new(vec![-1, -1, -1]).unwrap();
        assert_eq!(evaluate_observable(&label("III"), &"ZZZ".parse().unwrap(), &out), Ok(1));
        assert_eq!(evaluate_observable(&label("IIZ"), &"ZZZ".parse().unwrap(), &out), Ok(-1));
    }

    #[test]
    fn basis_mismatch_is_rejected() {
        let out = OutcomeBits::new(vec![1, 1]).unwrap();
        let err = evaluate_observable(&label("XZ"), &"ZZ".parse().unwrap(), &out).unwrap_err();
        assert_eq!(
            err,
            PauliError::BasisMismatch {
                position: 0,
                label: Pauli::X,
                basis: Axis::Z
            }
        );
        assert!(matches!(
            evaluate_observable(&label("XZ"), &"XZZ".parse().unwrap(), &out),
            Err(PauliError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn index_roundtrip_and_order() {
        assert_eq!(label("").index(), 0);
        assert_eq!(label("Z").index(), 3);
        assert_eq!(label("XI").index(), 4);
        assert_eq!(PauliLabel::from_index(2, 4).unwrap(), label("XI"));
        assert!(PauliLabel::from_index(1, 4).is_err());
        for k in 0..64 {
            assert_eq!(PauliLabel::from_index(3, k).unwrap().index(), k);
        }
    }

    #[test]
    fn random_label_edge_cases() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        assert!(PauliLabel::random(0, &mut a).is_empty());
        assert!(PauliLabel::random(0, &mut b).is_empty());
        assert_eq!(PauliLabel::random(5, &mut a), PauliLabel::random(5, &mut b));
    }

    #[test]
    fn random_label_is_uniform_on_one_qubit() {
        // chi-square against uniform over {I,X,Y,Z}; 3 dof, 0.999 quantile 16.27
        let mut rng = ChaCha8Rng::seed_from_u64(40_000);
        let mut counts = [0usize; 4];
        let draws = 40_000;
        for _ in 0..draws {
            counts[PauliLabel::random(1, &mut rng).index() as usize] += 1;
        }
        let expected = draws as f64 / 4.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}");
        for c in counts {
            assert!((c as f64 / draws as f64 - 0.25).abs() <= 0.01);
        }
    }

    #[test]
    fn text_tokens_roundtrip() {
        assert_eq!(label("_"), PauliLabel::default());
        assert_eq!(PauliLabel::default().to_token(), "_");
        assert!("XQ".parse::<PauliLabel>().is_err());
        let bits = OutcomeBits::from_index(3, 0b101);
        assert_eq!(bits.bits(), &[-1, 1, -1]);
        assert_eq!(OutcomeBits::from_token(&bits.to_token()).unwrap(), bits);
    }

    #[test]
    fn masks_follow_msb_first_order() {
        let (flip, phase) = label("XYZI").masks();
        assert_eq!(flip, 0b1100);
        assert_eq!(phase, 0b0110);
        assert_eq!(label("XYZI").support_mask(), 0b1110);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn arb_label(max: usize) -> impl Strategy<Value = PauliLabel> {
            prop::collection::vec(0u64..4, 0..max)
                .prop_map(|d| PauliLabel::new(d.into_iter().map(Pauli::from_digit).collect()))
        }

        proptest! {
            #[test]
            fn value_ignores_off_support_bits(l in arb_label(8), seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let basis = l.lift(IdentityFill::Random, &mut rng);
                let m = l.len();
                let idx = rng.random_range(0..(1usize << m));
                let out = OutcomeBits::from_index(m, idx);
                let v = evaluate_observable(&l, &basis, &out).unwrap();
                prop_assert!(v == 1 || v == -1);
                let off = !l.support_mask() & ((1usize << m) - 1);
                let scrambled = OutcomeBits::from_index(m, idx ^ (rng.random_range(0..(1usize << m)) & off));
                prop_assert_eq!(evaluate_observable(&l, &basis, &scrambled).unwrap(), v);
            }

            #[test]
            fn full_support_lift_is_identity(d in prop::collection::vec(1u64..4, 0..8)) {
                let l = PauliLabel::new(d.into_iter().map(Pauli::from_digit).collect());
                let b = l.lift_z();
                let back: Vec<Pauli> = b.axes().iter().map(|a| a.pauli()).collect();
                prop_assert_eq!(back, l.letters().to_vec());
            }
        }
    }
}
