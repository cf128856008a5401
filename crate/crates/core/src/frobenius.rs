//! Frobenius distance estimation between an unknown state, seen only
//! through Pauli observable outcomes, and a classically known candidate.
//!
//! With `d = 2^m` and `v_P = ½(Tr(ρP) − Tr(σP))`, the distance satisfies
//! `‖ρ − σ‖_F = 2√d · sqrt(E_P[v_P²])` over uniformly random labels `P`.
//! Each query of the Rademacher estimator is answered with `Z`, which is the
//! `ρ` outcome when the planned coin is 0 and the negated `σ` outcome when it
//! is 1, so `E[Z] = v_P`. Labels and coins are fixed when the plan is made.
//!
//! The `ρ` side is read once into per-segment sums ([`PreparedOutcomes`]);
//! each candidate `σ` then only costs one expectation and a few binomial
//! draws per block, which lets one outcome set score a whole net of
//! candidates.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::pauli::{IdentityFill, PauliError, PauliLabel};
use crate::rademacher::{
    choose_indices, default_base_samples, BlockSums, IndexPlan, LevelAccumulator, LevelPlan,
    RademacherError,
};
use crate::seed::{splitmix64, SimRng};
use crate::state::{OutcomeSampler, StateError, StateVector};

#[derive(Debug, Error)]
pub enum FrobeniusError {
    #[error("target error {gamma} must lie in (0, {max})")]
    InvalidGamma { gamma: f64, max: f64 },
    #[error("failure probability {0} must lie in (0, 1)")]
    InvalidDelta(f64),
    #[error("repetition count must be at least 1")]
    NoRepetitions,
    #[error("{0} qubits exceed the supported label range")]
    TooManyQubits(usize),
    #[error("no outcome for query (rep {rep}, level {level}, slot {slot}, sample {sample})")]
    MissingOutcome {
        rep: usize,
        level: usize,
        slot: usize,
        sample: usize,
    },
    #[error("candidate has {got} qubits, plan measures {expected}")]
    QubitMismatch { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Rademacher(#[from] RademacherError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// How `m0` is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaseSamples {
    /// `ceil(2000 ln(1/α))`, rounded up to a multiple of 4.
    Default,
    Fixed(usize),
}

impl BaseSamples {
    pub fn resolve(self, alpha: f64) -> usize {
        match self {
            BaseSamples::Default => default_base_samples(alpha),
            BaseSamples::Fixed(m0) => m0,
        }
    }
}

/// How many independent repetitions feed the median.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Repetitions {
    Fixed(usize),
    /// [`median_repetitions`] at the failure target
    /// [`failure_target`]`(d, γ, δ)`.
    Formula,
}

/// How the `σ` half of each query is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SigmaSampling {
    /// A Rademacher draw with mean `Tr(σP)` per query.
    #[default]
    Faithful,
    /// The exact `Tr(σP)` in place of the draw.
    VarianceReduced,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrobeniusConfig {
    pub base_samples: BaseSamples,
    pub repetitions: Repetitions,
    pub sigma: SigmaSampling,
    pub identity_fill: IdentityFill,
}

impl Default for FrobeniusConfig {
    fn default() -> Self {
        Self {
            base_samples: BaseSamples::Default,
            repetitions: Repetitions::Fixed(15),
            sigma: SigmaSampling::Faithful,
            identity_fill: IdentityFill::Z,
        }
    }
}

/// `(γ/d)^10 δ`.
pub fn failure_target(dim: f64, gamma: f64, delta: f64) -> f64 {
    (gamma / dim).powi(10) * delta
}

/// Smallest odd `K ≥ 18 ln(d / (γ · failure)) / (2 (1/2 − 1/3)²)`.
pub fn median_repetitions(dim: f64, gamma: f64, failure: f64) -> usize {
    let gap: f64 = 0.5 - 1.0 / 3.0;
    let k = (18.0 * (dim / (gamma * failure)).ln() / (2.0 * gap * gap)).ceil().max(1.0) as usize;
    if k % 2 == 0 {
        k + 1
    } else {
        k
    }
}

/// `α = γ / (2√d)` and its validity checks.
pub fn accuracy_for(qubits: usize, gamma: f64) -> Result<f64, FrobeniusError> {
    let sqrt_d = (qubits as f64 / 2.0).exp2();
    let max = 2.0 * sqrt_d;
    if !(gamma > 0.0 && gamma < max) {
        return Err(FrobeniusError::InvalidGamma { gamma, max });
    }
    Ok(gamma / max)
}

/// Identifies one `(rep, j, t)` block of a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId {
    pub rep: usize,
    pub level: usize,
    pub slot: usize,
}

/// The fixed query schedule for one dimension, accuracy and confidence.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusPlan {
    qubits: usize,
    gamma: f64,
    levels: LevelPlan,
    reps: Vec<IndexPlan>,
    coin_key: u64,
}

/// Query counts of a plan, computable without materializing it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanSize {
    pub repetitions: usize,
    pub queries_per_repetition: usize,
    pub blocks_per_repetition: usize,
}

impl PlanSize {
    pub fn total_queries(&self) -> u128 {
        self.repetitions as u128 * self.queries_per_repetition as u128
    }
}

/// Counts what [`make_plan`] would produce.
pub fn plan_size(
    qubits: usize,
    gamma: f64,
    delta: f64,
    config: &FrobeniusConfig,
) -> Result<PlanSize, FrobeniusError> {
    let (levels, k) = schedule(qubits, gamma, delta, config)?;
    Ok(PlanSize {
        repetitions: k,
        queries_per_repetition: levels.total_queries(),
        blocks_per_repetition: levels.block_count(),
    })
}

fn schedule(
    qubits: usize,
    gamma: f64,
    delta: f64,
    config: &FrobeniusConfig,
) -> Result<(LevelPlan, usize), FrobeniusError> {
    if qubits > 31 {
        return Err(FrobeniusError::TooManyQubits(qubits));
    }
    let alpha = accuracy_for(qubits, gamma)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(FrobeniusError::InvalidDelta(delta));
    }
    let levels = LevelPlan::new(alpha, config.base_samples.resolve(alpha))?;
    let dim = (qubits as f64).exp2();
    let k = match config.repetitions {
        Repetitions::Fixed(0) => return Err(FrobeniusError::NoRepetitions),
        Repetitions::Fixed(k) => k,
        Repetitions::Formula => median_repetitions(dim, gamma, failure_target(dim, gamma, delta)),
    };
    Ok((levels, k))
}

/// Draws every label and fixes the coin stream; nothing here looks at any
/// state.
pub fn make_plan<R: Rng + ?Sized>(
    qubits: usize,
    gamma: f64,
    delta: f64,
    config: &FrobeniusConfig,
    rng: &mut R,
) -> Result<FrobeniusPlan, FrobeniusError> {
    let (levels, k) = schedule(qubits, gamma, delta, config)?;
    let coordinates = 1u64 << (2 * qubits);
    let reps = (0..k)
        .map(|_| choose_indices(levels.clone(), coordinates, rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FrobeniusPlan {
        qubits,
        gamma,
        levels,
        reps,
        coin_key: rng.random(),
    })
}

impl FrobeniusPlan {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.levels.alpha()
    }

    pub fn levels(&self) -> &LevelPlan {
        &self.levels
    }

    pub fn repetitions(&self) -> usize {
        self.reps.len()
    }

    pub fn repetition(&self, rep: usize) -> &IndexPlan {
        &self.reps[rep]
    }

    pub fn size(&self) -> PlanSize {
        PlanSize {
            repetitions: self.reps.len(),
            queries_per_repetition: self.levels.total_queries(),
            blocks_per_repetition: self.levels.block_count(),
        }
    }

    /// Queries per repetition; also the number of `σ` draws per repetition.
    pub fn queries_per_repetition(&self) -> usize {
        self.levels.total_queries()
    }

    pub fn total_queries(&self) -> usize {
        self.reps.len() * self.levels.total_queries()
    }

    pub fn samples_in(&self, block: BlockId) -> usize {
        self.levels.levels()[block.level].samples_per_index
    }

    /// Every block with its label, repetition-major then level-major.
    pub fn blocks(&self) -> impl Iterator<Item = (BlockId, PauliLabel)> + '_ {
        self.reps.iter().enumerate().flat_map(move |(rep, plan)| {
            plan.blocks().map(move |(level, slot, k)| {
                (
                    BlockId { rep, level, slot },
                    PauliLabel::from_index(self.qubits, k).expect("index drawn below 4^m"),
                )
            })
        })
    }

    pub fn label(&self, block: BlockId) -> PauliLabel {
        let k = self.reps[block.rep].indices(block.level)[block.slot];
        PauliLabel::from_index(self.qubits, k).expect("index drawn below 4^m")
    }

    /// The coins of a block: `true` means the query is answered from `σ`.
    pub fn coins(&self, block: BlockId) -> CoinStream {
        let key = splitmix64(
            self.coin_key
                ^ splitmix64(((block.rep as u64) << 40) ^ ((block.level as u64) << 32) ^ block.slot as u64),
        );
        CoinStream {
            key,
            word: 0,
            bits: 0,
            used: 64,
        }
    }

    /// Writes one `rep j t a PAULI coin` line per query.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<(), FrobeniusError> {
        writeln!(
            w,
            "# frobenius-plan qubits={} gamma={} alpha={} m0={} reps={}",
            self.qubits,
            self.gamma,
            self.alpha(),
            self.levels.base_samples(),
            self.reps.len()
        )?;
        for (id, label) in self.blocks() {
            let token = label.to_token();
            let mut coins = self.coins(id);
            for a in 0..self.samples_in(id) {
                writeln!(w, "{} {} {} {} {} {}", id.rep, id.level, id.slot, a, token, coins.next_coin() as u8)?;
            }
        }
        Ok(())
    }
}

/// Counter-based fair bits, reproducible from the plan alone.
#[derive(Clone, Debug)]
pub struct CoinStream {
    key: u64,
    word: u64,
    bits: u64,
    used: u32,
}

impl CoinStream {
    pub fn next_coin(&mut self) -> bool {
        if self.used == 64 {
            self.bits = splitmix64(self.key.wrapping_add(self.word));
            self.word += 1;
            self.used = 0;
        }
        let bit = (self.bits >> self.used) & 1 == 1;
        self.used += 1;
        bit
    }

    /// Consumes `n` coins and returns how many were `true`.
    pub fn count_ones(&mut self, mut n: usize) -> u64 {
        let mut ones = 0u64;
        while n > 0 {
            if self.used == 64 {
                self.bits = splitmix64(self.key.wrapping_add(self.word));
                self.word += 1;
                self.used = 0;
            }
            let take = n.min((64 - self.used) as usize) as u32;
            let chunk = self.bits >> self.used;
            let chunk = if take == 64 { chunk } else { chunk & ((1u64 << take) - 1) };
            ones += chunk.count_ones() as u64;
            self.used += take;
            n -= take as usize;
        }
        ones
    }
}

/// `Z = x_rho` when the coin is 0, `-x_sigma` when it is 1.
pub fn combine_samples(x_rho: i8, x_sigma: i8, coin: bool) -> i8 {
    if coin {
        -x_sigma
    } else {
        x_rho
    }
}

/// Answers planned Pauli queries, one fresh copy per answer.
pub trait OutcomeSource {
    /// Fills `out` (length `m_j`) with the `±1` outcomes of measuring
    /// `label` for the queries of `block`.
    fn answer_block(
        &mut self,
        block: BlockId,
        label: &PauliLabel,
        out: &mut [i8],
    ) -> Result<(), FrobeniusError>;
}

/// Measures copies of a known pure state in the lifted product basis of
/// each label and reads the observable off the outcome bits.
pub struct SimulatedSource<'a> {
    state: &'a StateVector,
    fill: IdentityFill,
    rng: SimRng,
    copies: u64,
}

impl<'a> SimulatedSource<'a> {
    pub fn new(state: &'a StateVector, fill: IdentityFill, rng: SimRng) -> Self {
        Self {
            state,
            fill,
            rng,
            copies: 0,
        }
    }

    pub fn copies_used(&self) -> u64 {
        self.copies
    }
}

impl OutcomeSource for SimulatedSource<'_> {
    fn answer_block(
        &mut self,
        _block: BlockId,
        label: &PauliLabel,
        out: &mut [i8],
    ) -> Result<(), FrobeniusError> {
        let basis = label.lift(self.fill, &mut self.rng);
        let sampler = OutcomeSampler::new(&self.state.outcome_distribution(0, &basis)?);
        let mask = label.support_mask();
        for o in out.iter_mut() {
            let idx = sampler.sample(&mut self.rng);
            *o = if (idx & mask).count_ones() % 2 == 0 { 1 } else { -1 };
        }
        self.copies += out.len() as u64;
        Ok(())
    }
}

/// A materialized outcome log; replays as an [`OutcomeSource`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecordedOutcomes {
    blocks: HashMap<BlockId, Vec<i8>>,
}

impl RecordedOutcomes {
    /// Runs every query of `plan` against `source` and keeps the answers.
    pub fn record(plan: &FrobeniusPlan, source: &mut dyn OutcomeSource) -> Result<Self, FrobeniusError> {
        let mut blocks = HashMap::new();
        for (id, label) in plan.blocks() {
            let mut buf = vec![0i8; plan.samples_in(id)];
            source.answer_block(id, &label, &mut buf)?;
            blocks.insert(id, buf);
        }
        Ok(Self { blocks })
    }

    /// Sets one answer; 0 marks it missing.
    pub fn set(&mut self, block: BlockId, sample: usize, len: usize, value: i8) {
        let row = self.blocks.entry(block).or_insert_with(|| vec![0; len]);
        row[sample] = value;
    }

    pub fn remove(&mut self, block: BlockId, sample: usize) {
        if let Some(row) = self.blocks.get_mut(&block) {
            row[sample] = 0;
        }
    }

    /// The plan lines with the answer appended: `rep j t a PAULI coin value`.
    pub fn write_text<W: Write>(&self, plan: &FrobeniusPlan, mut w: W) -> Result<(), FrobeniusError> {
        for (id, label) in plan.blocks() {
            let token = label.to_token();
            let mut coins = plan.coins(id);
            let row = self.blocks.get(&id);
            for a in 0..plan.samples_in(id) {
                let value = row.map(|r| r[a]).unwrap_or(0);
                let coin = coins.next_coin() as u8;
                if value != 0 {
                    writeln!(w, "{} {} {} {} {} {} {}", id.rep, id.level, id.slot, a, token, coin, value)?;
                }
            }
        }
        Ok(())
    }

    /// Reads an outcome log written by [`write_text`](Self::write_text).
    /// Labels and coins in the file are checked against the plan.
    pub fn read_text<R: BufRead>(plan: &FrobeniusPlan, r: R) -> Result<Self, FrobeniusError> {
        let mut out = Self::default();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| FrobeniusError::Parse { line: i + 1, message };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 {
                return Err(err("expected `rep j t a PAULI coin value`".into()));
            }
            let num = |s: &str| s.parse::<usize>().map_err(|e| err(e.to_string()));
            let id = BlockId {
                rep: num(f[0])?,
                level: num(f[1])?,
                slot: num(f[2])?,
            };
            let a = num(f[3])?;
            if id.rep >= plan.repetitions()
                || id.level > plan.levels().top_level()
                || id.slot >= plan.levels().levels()[id.level].index_count
                || a >= plan.samples_in(id)
            {
                return Err(err("query outside the plan".into()));
            }
            if f[4].parse::<PauliLabel>()? != plan.label(id) {
                return Err(err("label disagrees with the plan".into()));
            }
            let value = match f[6] {
                "1" | "+1" => 1,
                "-1" => -1,
                other => return Err(err(format!("invalid outcome {other:?}"))),
            };
            out.set(id, a, plan.samples_in(id), value);
        }
        Ok(out)
    }
}

impl OutcomeSource for RecordedOutcomes {
    fn answer_block(
        &mut self,
        block: BlockId,
        _label: &PauliLabel,
        out: &mut [i8],
    ) -> Result<(), FrobeniusError> {
        let missing = |sample| FrobeniusError::MissingOutcome {
            rep: block.rep,
            level: block.level,
            slot: block.slot,
            sample,
        };
        let row = self.blocks.get(&block).ok_or_else(|| missing(0))?;
        for (a, o) in out.iter_mut().enumerate() {
            match row.get(a) {
                Some(&v) if v != 0 => *o = v,
                _ => return Err(missing(a)),
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct PreparedBlock {
    level: usize,
    label: PauliLabel,
    /// Sum of `ρ` outcomes over coin-0 queries, per segment.
    rho: Vec<f64>,
    /// Number of coin-1 queries per segment.
    sigma_count: Vec<u64>,
}

/// The `ρ` half of every query, reduced to what the estimator reads.
#[derive(Clone, Debug)]
pub struct PreparedOutcomes {
    qubits: usize,
    reps: Vec<Vec<PreparedBlock>>,
}

impl PreparedOutcomes {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn block_count(&self) -> usize {
        self.reps.iter().map(Vec::len).sum()
    }

    /// Block labels, repetition-major.
    pub fn labels(&self) -> impl Iterator<Item = &PauliLabel> + '_ {
        self.reps.iter().flatten().map(|b| &b.label)
    }

    pub fn collect(plan: &FrobeniusPlan, source: &mut dyn OutcomeSource) -> Result<Self, FrobeniusError> {
        let mut reps: Vec<Vec<PreparedBlock>> = vec![Vec::new(); plan.repetitions()];
        let mut buf = Vec::new();
        for (id, label) in plan.blocks() {
            buf.clear();
            buf.resize(plan.samples_in(id), 0);
            source.answer_block(id, &label, &mut buf)?;
            let mut coins = plan.coins(id);
            let coin_bits: Vec<bool> = (0..buf.len()).map(|_| coins.next_coin()).collect();
            let segments = plan.levels().segments(id.level);
            let mut rho = Vec::with_capacity(segments.len());
            let mut sigma_count = Vec::with_capacity(segments.len());
            for seg in segments {
                let mut s = 0i64;
                let mut c = 0u64;
                for a in seg {
                    if coin_bits[a] {
                        c += 1;
                    } else {
                        s += buf[a] as i64;
                    }
                }
                rho.push(s as f64);
                sigma_count.push(c);
            }
            reps[id.rep].push(PreparedBlock {
                level: id.level,
                label,
                rho,
                sigma_count,
            });
        }
        Ok(Self {
            qubits: plan.qubits(),
            reps,
        })
    }

    /// Same distribution as [`collect`](Self::collect) over a
    /// [`SimulatedSource`] of `state`: each copy's observable outcome is an
    /// independent `±1` with mean `Tr(ρP)`, so a segment's coin-0 sum is
    /// drawn as one binomial.
    pub fn sample_pure<R: Rng + ?Sized>(
        plan: &FrobeniusPlan,
        state: &StateVector,
        rng: &mut R,
    ) -> Result<Self, FrobeniusError> {
        if state.qubits() != plan.qubits() {
            return Err(FrobeniusError::QubitMismatch {
                expected: plan.qubits(),
                got: state.qubits(),
            });
        }
        let mut reps: Vec<Vec<PreparedBlock>> = vec![Vec::new(); plan.repetitions()];
        for (id, label) in plan.blocks() {
            let p = (0.5 * (1.0 + state.pauli_expectation(&label)?)).clamp(0.0, 1.0);
            let mut coins = plan.coins(id);
            let segments = plan.levels().segments(id.level);
            let mut rho = Vec::with_capacity(segments.len());
            let mut sigma_count = Vec::with_capacity(segments.len());
            for seg in segments {
                let len = seg.len() as u64;
                let c1 = coins.count_ones(seg.len());
                let c0 = len - c1;
                let plus = if c0 == 0 {
                    0
                } else {
                    Binomial::new(c0, p).expect("p in [0,1]").sample(rng)
                };
                rho.push(2.0 * plus as f64 - c0 as f64);
                sigma_count.push(c1);
            }
            reps[id.rep].push(PreparedBlock {
                level: id.level,
                label,
                rho,
                sigma_count,
            });
        }
        Ok(Self {
            qubits: plan.qubits(),
            reps,
        })
    }
}

/// A distance estimate and the per-repetition norm estimates behind it.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceEstimate {
    /// `D̂ = 2√d · median_r q̂_r`.
    pub frobenius: f64,
    pub norm_estimates: Vec<f64>,
}

impl DistanceEstimate {
    /// `D̂ / √2`, comparable to `sqrt(1 - F)` for pure states.
    pub fn infidelity_distance(&self) -> f64 {
        self.frobenius / std::f64::consts::SQRT_2
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Scores a known candidate `σ` against prepared `ρ` outcomes. All `σ`
/// randomness comes from `rng`.
pub fn estimate_with_candidate<R: Rng + ?Sized>(
    plan: &FrobeniusPlan,
    prepared: &PreparedOutcomes,
    sigma: &StateVector,
    sampling: SigmaSampling,
    rng: &mut R,
) -> Result<DistanceEstimate, FrobeniusError> {
    if sigma.qubits() != prepared.qubits {
        return Err(FrobeniusError::QubitMismatch {
            expected: prepared.qubits,
            got: sigma.qubits(),
        });
    }
    let means = prepared
        .labels()
        .map(|l| sigma.pauli_expectation(l))
        .collect::<Result<Vec<_>, _>>()?;
    estimate_with_means(plan, prepared, &means, sampling, rng)
}

/// Like [`estimate_with_candidate`], with `Tr(σP)` supplied per block in
/// [`PreparedOutcomes::labels`] order.
pub fn estimate_with_means<R: Rng + ?Sized>(
    plan: &FrobeniusPlan,
    prepared: &PreparedOutcomes,
    means: &[f64],
    sampling: SigmaSampling,
    rng: &mut R,
) -> Result<DistanceEstimate, FrobeniusError> {
    assert_eq!(means.len(), prepared.block_count(), "one mean per prepared block");
    let mut means = means.iter();
    let mut segs = Vec::new();
    let mut norm_estimates = Vec::with_capacity(prepared.reps.len());
    for blocks in &prepared.reps {
        let mut acc = LevelAccumulator::new(plan.levels());
        for b in blocks {
            let mean = means.next().expect("length checked").clamp(-1.0, 1.0);
            let p = 0.5 * (1.0 + mean);
            segs.clear();
            for (rho, &count) in b.rho.iter().zip(&b.sigma_count) {
                let y = match sampling {
                    SigmaSampling::Faithful => {
                        if count == 0 {
                            0.0
                        } else {
                            let plus = Binomial::new(count, p).expect("p in [0,1]").sample(rng);
                            2.0 * plus as f64 - count as f64
                        }
                    }
                    SigmaSampling::VarianceReduced => count as f64 * mean,
                };
                segs.push(rho - y);
            }
            acc.push(b.level, &BlockSums::from_segments(&segs))?;
        }
        norm_estimates.push(acc.finish()?);
    }
    let mut sorted = norm_estimates.clone();
    let q = median(&mut sorted);
    Ok(DistanceEstimate {
        frobenius: 2.0 * (plan.dim() as f64).sqrt() * q,
        norm_estimates,
    })
}

/// Runs the whole scheme: answers every planned query from `rho`, then
/// scores `sigma`.
pub fn estimate_distance<R: Rng + ?Sized>(
    plan: &FrobeniusPlan,
    rho: &mut dyn OutcomeSource,
    sigma: &StateVector,
    sampling: SigmaSampling,
    rng: &mut R,
) -> Result<DistanceEstimate, FrobeniusError> {
    let prepared = PreparedOutcomes::collect(plan, rho)?;
    estimate_with_candidate(plan, &prepared, sigma, sampling, rng)
}
