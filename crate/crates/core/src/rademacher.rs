//! Estimating `sqrt(E_k[v_k^2])` for a hidden `v ∈ [-1,1]^N` from
//! nonadaptive Rademacher queries.
//!
//! Indices are split into levels `j = 0..=J`. Level `j` samples `T_j` indices
//! uniformly and queries each `m_j = 4^j m0` times. Inside a block of `m_j`
//! samples the first two quarters feed a product of independent means (an
//! unbiased estimate of `v_k^2`), and nested windows starting at `m_j/2`
//! decide which level the index belongs to. The two parts read disjoint
//! samples; the last quarter is never read.

use std::io::{BufRead, Write};
use std::ops::Range;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::state::rademacher_sample;

#[derive(Debug, Error)]
pub enum RademacherError {
    #[error("accuracy {0} must lie in (0, 1)")]
    InvalidAlpha(f64),
    #[error("coordinate count must be at least 1")]
    NoCoordinates,
    #[error("base sample count must be at least 4, got {0}")]
    InvalidBaseSamples(usize),
    #[error("block (level {level}, slot {slot}) has {got} samples, expected {expected}")]
    SampleCount {
        level: usize,
        slot: usize,
        expected: usize,
        got: usize,
    },
    #[error("level {level} received {got} blocks, plan has {expected}")]
    BlockCount {
        level: usize,
        expected: usize,
        got: usize,
    },
    #[error("block names level {0}, beyond the plan")]
    UnknownLevel(usize),
    #[error("block (level {level}, slot {slot}) queries index {got}, plan has {expected}")]
    IndexMismatch {
        level: usize,
        slot: usize,
        expected: u64,
        got: u64,
    },
    #[error("samples must be +1 or -1, got {0}")]
    InvalidSample(i64),
    #[error("coordinate {index} has |v| > 1 ({value})")]
    OutOfRange { index: usize, value: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// `floor(x)` tolerant of representation error just below an integer.
fn robust_floor(x: f64) -> f64 {
    (x * (1.0 + 1e-12)).floor()
}

/// Default base sample count `ceil(2000 ln(1/α))`, rounded up to a
/// multiple of 4.
pub fn default_base_samples(alpha: f64) -> usize {
    round_up_to_4((2000.0 * (1.0 / alpha).ln()).ceil().max(4.0) as usize)
}

pub(crate) fn round_up_to_4(m: usize) -> usize {
    m.div_ceil(4) * 4
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Level {
    /// `T_j`
    pub index_count: usize,
    /// `m_j`
    pub samples_per_index: usize,
}

/// The `(J, m0, T_j, m_j)` schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPlan {
    alpha: f64,
    base_samples: usize,
    levels: Vec<Level>,
}

impl LevelPlan {
    /// `base_samples` is rounded up to a multiple of 4.
    pub fn new(alpha: f64, base_samples: usize) -> Result<Self, RademacherError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(RademacherError::InvalidAlpha(alpha));
        }
        if base_samples < 4 {
            return Err(RademacherError::InvalidBaseSamples(base_samples));
        }
        let m0 = round_up_to_4(base_samples);
        let top = robust_floor((1.0 / alpha).log2()) as usize;
        let inv_sq = (1.0 / alpha).powi(2);
        let levels = (0..=top)
            .map(|j| {
                let four_j = 4f64.powi(j as i32);
                Level {
                    index_count: (robust_floor(inv_sq / four_j) as usize).max(1),
                    samples_per_index: (1usize << (2 * j)) * m0,
                }
            })
            .collect();
        Ok(Self {
            alpha,
            base_samples: m0,
            levels,
        })
    }

    pub fn with_default_base(alpha: f64) -> Result<Self, RademacherError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(RademacherError::InvalidAlpha(alpha));
        }
        Self::new(alpha, default_base_samples(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `J`
    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    /// `m0`
    pub fn base_samples(&self) -> usize {
        self.base_samples
    }

    /// `n0 = m0 / 4`, the smallest check window.
    pub fn check_base(&self) -> usize {
        self.base_samples / 4
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, j: usize) -> Result<Level, RademacherError> {
        self.levels
            .get(j)
            .copied()
            .ok_or(RademacherError::UnknownLevel(j))
    }

    pub fn block_count(&self) -> usize {
        self.levels.iter().map(|l| l.index_count).sum()
    }

    /// `Σ_j T_j m_j`
    pub fn total_queries(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.index_count * l.samples_per_index)
            .sum()
    }

    /// Sample ranges of a level-`j` block that the estimator reads, in
    /// order: the two estimation quarters, then the increments of the
    /// nested check windows for `b = 0..=j`.
    pub fn segments(&self, j: usize) -> Vec<Range<usize>> {
        let m = self.levels[j].samples_per_index;
        let n0 = self.check_base();
        let half = m / 2;
        let mut out = vec![0..m / 4, m / 4..half];
        let mut start = half;
        for b in 0..=j {
            let end = half + (1usize << (2 * b)) * n0;
            out.push(start..end);
            start = end;
        }
        out
    }
}

/// A level plan together with the sampled index of every block.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexPlan {
    levels: LevelPlan,
    coordinates: u64,
    indices: Vec<Vec<u64>>,
}

/// Samples `k_{j,t}` uniformly from `[N]` for every block of the schedule.
/// The result never depends on any sample value.
pub fn choose_indices<R: Rng + ?Sized>(
    levels: LevelPlan,
    coordinates: u64,
    rng: &mut R,
) -> Result<IndexPlan, RademacherError> {
    if coordinates == 0 {
        return Err(RademacherError::NoCoordinates);
    }
    let indices = levels
        .levels()
        .iter()
        .map(|l| {
            (0..l.index_count)
                .map(|_| rng.random_range(0..coordinates))
                .collect()
        })
        .collect();
    Ok(IndexPlan {
        levels,
        coordinates,
        indices,
    })
}

impl IndexPlan {
    pub fn levels(&self) -> &LevelPlan {
        &self.levels
    }

    pub fn coordinates(&self) -> u64 {
        self.coordinates
    }

    /// Indices of level `j`, by slot.
    pub fn indices(&self, j: usize) -> &[u64] {
        &self.indices[j]
    }

    /// `(level, slot, index)` for every block, level-major.
    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.indices
            .iter()
            .enumerate()
            .flat_map(|(j, ks)| ks.iter().enumerate().map(move |(t, &k)| (j, t, k)))
    }
}

/// The `m_j` answers to one query index.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryBlock {
    pub level: usize,
    pub slot: usize,
    pub index: u64,
    pub samples: Vec<i8>,
}

impl QueryBlock {
    /// Window sums over the ranges of [`LevelPlan::segments`]; nothing
    /// outside them is read.
    pub fn sums(&self, plan: &LevelPlan) -> Result<BlockSums, RademacherError> {
        let level = plan.level(self.level)?;
        if self.samples.len() != level.samples_per_index {
            return Err(RademacherError::SampleCount {
                level: self.level,
                slot: self.slot,
                expected: level.samples_per_index,
                got: self.samples.len(),
            });
        }
        let segs: Vec<f64> = plan
            .segments(self.level)
            .into_iter()
            .map(|r| self.samples[r].iter().map(|&s| s as f64).sum())
            .collect();
        Ok(BlockSums::from_segments(&segs))
    }

    pub fn est_v_squared(&self, plan: &LevelPlan) -> Result<f64, RademacherError> {
        let sums = self.sums(plan)?;
        Ok(est_v_squared(&sums, plan.levels()[self.level].samples_per_index))
    }

    pub fn level_check(&self, plan: &LevelPlan) -> Result<bool, RademacherError> {
        let sums = self.sums(plan)?;
        Ok(level_check(&sums, self.level, plan.check_base()))
    }
}

/// Everything the estimator needs from one block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSums {
    pub first_quarter: f64,
    pub second_quarter: f64,
    /// Sum over the check window of size `4^b n0`, for `b = 0..=j`.
    pub check: Vec<f64>,
}

impl BlockSums {
    /// From per-segment sums laid out as in [`LevelPlan::segments`].
    pub fn from_segments(segments: &[f64]) -> Self {
        let mut acc = 0.0;
        let check = segments[2..]
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect();
        Self {
            first_quarter: segments[0],
            second_quarter: segments[1],
            check,
        }
    }
}

/// `μ(1) μ(2)`: product of the means of the first and second quarters.
pub fn est_v_squared(sums: &BlockSums, samples_per_index: usize) -> f64 {
    let quarter = (samples_per_index / 4) as f64;
    (sums.first_quarter / quarter) * (sums.second_quarter / quarter)
}

/// True iff the first `b` whose window mean exceeds `2^{-b}` in absolute
/// value is `level`.
pub fn level_check(sums: &BlockSums, level: usize, check_base: usize) -> bool {
    first_crossing(&sums.check, check_base) == Some(level)
}

fn first_crossing(window_sums: &[f64], check_base: usize) -> Option<usize> {
    window_sums.iter().enumerate().find_map(|(b, s)| {
        let n = ((1usize << (2 * b)) * check_base) as f64;
        let threshold = 0.5f64.powi(b as i32);
        ((s / n).abs() > threshold).then_some(b)
    })
}

/// Per-level reduction of truncated, level-gated block estimates.
#[derive(Clone, Debug)]
pub struct LevelAccumulator<'a> {
    plan: &'a LevelPlan,
    totals: Vec<f64>,
    counts: Vec<usize>,
}

impl<'a> LevelAccumulator<'a> {
    pub fn new(plan: &'a LevelPlan) -> Self {
        let k = plan.levels().len();
        Self {
            plan,
            totals: vec![0.0; k],
            counts: vec![0; k],
        }
    }

    pub fn push(&mut self, level: usize, sums: &BlockSums) -> Result<(), RademacherError> {
        let l = self.plan.level(level)?;
        self.counts[level] += 1;
        if level_check(sums, level, self.plan.check_base()) {
            let cap = 16.0 * 0.25f64.powi(level as i32);
            let u = est_v_squared(sums, l.samples_per_index).min(cap);
            self.totals[level] += u;
        }
        Ok(())
    }

    /// `sqrt(max(0, Σ_j r̂_j))`.
    pub fn finish(self) -> Result<f64, RademacherError> {
        let mut total = 0.0;
        for (j, l) in self.plan.levels().iter().enumerate() {
            if self.counts[j] != l.index_count {
                return Err(RademacherError::BlockCount {
                    level: j,
                    expected: l.index_count,
                    got: self.counts[j],
                });
            }
            total += self.totals[j] / l.index_count as f64;
        }
        Ok(total.max(0.0).sqrt())
    }
}

/// The estimate `q̂` from one block per planned `(j, t)`.
pub fn build_estimator(plan: &IndexPlan, blocks: &[QueryBlock]) -> Result<f64, RademacherError> {
    let levels = plan.levels();
    let mut acc = LevelAccumulator::new(levels);
    for block in blocks {
        let expected = plan
            .indices
            .get(block.level)
            .ok_or(RademacherError::UnknownLevel(block.level))?
            .get(block.slot)
            .copied();
        match expected {
            Some(k) if k == block.index => {}
            Some(k) => {
                return Err(RademacherError::IndexMismatch {
                    level: block.level,
                    slot: block.slot,
                    expected: k,
                    got: block.index,
                })
            }
            None => {
                return Err(RademacherError::BlockCount {
                    level: block.level,
                    expected: levels.levels()[block.level].index_count,
                    got: block.slot + 1,
                })
            }
        }
        acc.push(block.level, &block.sums(levels)?)?;
    }
    acc.finish()
}

/// Answers every planned query of `plan` with Rademacher draws of mean
/// `v[k]`.
pub fn simulate_blocks<R: Rng + ?Sized>(
    plan: &IndexPlan,
    v: &[f64],
    rng: &mut R,
) -> Result<Vec<QueryBlock>, RademacherError> {
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| x.abs() > 1.0) {
        return Err(RademacherError::OutOfRange { index, value });
    }
    plan.blocks()
        .map(|(j, t, k)| {
            let m = plan.levels.levels()[j].samples_per_index;
            let mean = v[k as usize];
            let samples = (0..m)
                .map(|_| rademacher_sample(mean, rng).expect("mean checked above"))
                .collect();
            Ok(QueryBlock {
                level: j,
                slot: t,
                index: k,
                samples,
            })
        })
        .collect()
}

/// The level `L(x)` assigned to a coordinate of mean `x`: the first `b ≤ J`
/// whose nested window mean exceeds `2^{-b}`, or `J + 1` if none does.
/// Window sums are drawn exactly through binomial increments.
pub fn level_of<R: Rng + ?Sized>(x: f64, plan: &LevelPlan, rng: &mut R) -> usize {
    let p = (0.5 * (1.0 + x)).clamp(0.0, 1.0);
    let n0 = plan.check_base() as u64;
    let mut drawn = 0u64;
    let mut sum = 0i64;
    for b in 0..=plan.top_level() {
        let window = (1u64 << (2 * b)) * n0;
        let fresh = window - drawn;
        let plus = Binomial::new(fresh, p).expect("p in [0,1]").sample(rng) as i64;
        sum += 2 * plus - fresh as i64;
        drawn = window;
        if (sum as f64 / window as f64).abs() > 0.5f64.powi(b as i32) {
            return b;
        }
    }
    plan.top_level() + 1
}

/// `sqrt(mean(v_k^2))`.
pub fn oracle_mean_square(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Writes blocks as `j t k m_j` header lines, each followed by a row of
/// `±1` samples.
pub fn write_blocks<W: Write>(mut w: W, blocks: &[QueryBlock]) -> Result<(), RademacherError> {
    for b in blocks {
        writeln!(w, "{} {} {} {}", b.level, b.slot, b.index, b.samples.len())?;
        let row: Vec<String> = b.samples.iter().map(|s| s.to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

pub fn read_blocks<R: BufRead>(r: R) -> Result<Vec<QueryBlock>, RademacherError> {
    let lines: Vec<String> = r
        .lines()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .collect();
    let parse_err = |line: usize, message: String| RademacherError::Parse { line, message };
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim().is_empty() || lines[i].starts_with('#') {
            i += 1;
            continue;
        }
        let head: Vec<&str> = lines[i].split_whitespace().collect();
        if head.len() != 4 {
            return Err(parse_err(i + 1, "expected `j t k m_j`".into()));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|e| parse_err(i + 1, e.to_string()));
        let (level, slot, index, m) = (num(head[0])?, num(head[1])?, num(head[2])?, num(head[3])?);
        let row = lines
            .get(i + 1)
            .ok_or_else(|| parse_err(i + 2, "missing sample row".into()))?;
        let samples = row
            .split_whitespace()
            .map(|s| match s.parse::<i64>() {
                Ok(1) => Ok(1i8),
                Ok(-1) => Ok(-1i8),
                Ok(v) => Err(RademacherError::InvalidSample(v)),
                Err(e) => Err(parse_err(i + 2, e.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if samples.len() as u64 != m {
            return Err(parse_err(i + 2, format!("expected {m} samples, found {}", samples.len())));
        }
        out.push(QueryBlock {
            level: level as usize,
            slot: slot as usize,
            index,
            samples,
        });
        i += 2;
    }
    Ok(out)
}
