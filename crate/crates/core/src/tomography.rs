//! Nonadaptive pure-state tomography over the binary prefix tree.
//!
//! [`build_measurement_set`] fixes, for every level `ℓ` and grid accuracy
//! `ε'`, a Frobenius plan on the last `n − ℓ` qubits and a replica count.
//! Every copy measures the first `ℓ` qubits in the computational basis and
//! the rest in the lifted basis of its label; the outcome is binned by the
//! observed prefix. [`reconstruct`] then glues estimates bottom-up, each
//! node using the smallest `ε'` whose bin answers every planned query.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::frobenius::{
    plan_size, make_plan, BaseSamples, BlockId, FrobeniusConfig, FrobeniusError, FrobeniusPlan,
    OutcomeSource, PreparedOutcomes, Repetitions, SigmaSampling,
};
use crate::gluing::{candidate_state, find_coeffs_prepared, net_for_accuracy, AmplitudePair, GluingError};
use crate::pauli::{evaluate_observable, IdentityFill, MeasurementBasis, OutcomeBits, PauliError, PauliLabel};
use crate::seed::{derive_seed, splitmix64, SimRng};
use crate::state::{OutcomeSampler, Prefix, StateError, StateVector};

#[derive(Debug, Error)]
pub enum TomographyError {
    #[error("accuracy {0} must lie in (0, 1]")]
    InvalidEpsilon(f64),
    #[error("failure probability {0} must lie in (0, 1)")]
    InvalidDelta(f64),
    #[error("budget constant {0} must be at least 1")]
    InvalidBudget(f64),
    #[error("need at least one qubit")]
    NoQubits,
    #[error("state has {got} qubits, plan expects {expected}")]
    QubitMismatch { expected: usize, got: usize },
    #[error("entry {0} is outside the plan")]
    UnknownEntry(u64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    Gluing(#[from] GluingError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Tunable constants of the scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// `C` in `R = ceil(C (ε'/ε) 2^ℓ n^p)`.
    pub budget: f64,
    /// `p` in the replica count.
    pub poly_exponent: f64,
    /// Frobenius target error at grid point `ε'` is `gamma_scale · sqrt(ε')`.
    pub gamma_scale: f64,
    /// Net resolution at `ε'` is `net_scale · sqrt(ε')`.
    pub net_scale: f64,
    pub frobenius: FrobeniusConfig,
    /// Run at internal accuracy `2ε/n²` instead of `ε`.
    pub rescale_accuracy: bool,
}

impl Constants {
    /// Scaled-down defaults that make `n ≤ 3` runs take seconds.
    pub fn desk() -> Self {
        Self {
            budget: 2.0,
            poly_exponent: 2.0,
            gamma_scale: 0.5,
            net_scale: 1.0,
            frobenius: FrobeniusConfig {
                base_samples: BaseSamples::Fixed(16),
                repetitions: Repetitions::Fixed(5),
                sigma: SigmaSampling::Faithful,
                identity_fill: IdentityFill::Z,
            },
            rescale_accuracy: false,
        }
    }

    /// The literal counts: `C = 1`, `n²`, `m0 = 2000 ln(1/α)`, median
    /// count from the failure-target formula.
    pub fn paper() -> Self {
        Self {
            budget: 1.0,
            poly_exponent: 2.0,
            gamma_scale: 1.0,
            net_scale: 1.0,
            frobenius: FrobeniusConfig {
                base_samples: BaseSamples::Default,
                repetitions: Repetitions::Formula,
                sigma: SigmaSampling::Faithful,
                identity_fill: IdentityFill::Z,
            },
            rescale_accuracy: false,
        }
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::desk()
    }
}

/// `{ε, 2ε, 4ε, …} ∩ (0, 1]`.
pub fn accuracy_grid(eps: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut e = eps;
    while e <= 1.0 + 1e-12 {
        grid.push(e.min(1.0));
        e *= 2.0;
    }
    grid
}

/// The accuracy the plan is built for: `ε`, or `2ε/n²` when rescaling.
pub fn internal_accuracy(n: usize, eps: f64, constants: &Constants) -> f64 {
    if constants.rescale_accuracy {
        2.0 * eps / (n * n) as f64
    } else {
        eps
    }
}

/// `ceil(C (ε'/ε) 2^ℓ n^p)`.
pub fn replica_count(n: usize, level: usize, eps_prime: f64, eps: f64, constants: &Constants) -> u64 {
    (constants.budget * (eps_prime / eps) * (level as f64).exp2() * (n as f64).powf(constants.poly_exponent))
        .ceil()
        .max(1.0) as u64
}

/// Failure budget handed to each Frobenius plan: `1e-4 · ε'³ · δ`.
pub fn cell_failure(eps_prime: f64, delta: f64) -> f64 {
    1e-4 * eps_prime.powi(3) * delta
}

fn validate(n: usize, eps: f64, delta: f64, constants: &Constants) -> Result<(), TomographyError> {
    if n == 0 {
        return Err(TomographyError::NoQubits);
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(TomographyError::InvalidEpsilon(eps));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TomographyError::InvalidDelta(delta));
    }
    if !(constants.budget >= 1.0) {
        return Err(TomographyError::InvalidBudget(constants.budget));
    }
    Ok(())
}

/// Copy counts of one `(ℓ, ε')` cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSize {
    pub level: usize,
    pub eps_prime: f64,
    /// Distinct queries `|P_{ℓ,ε'}|`.
    pub slots: u128,
    pub replicas: u64,
}

impl CellSize {
    pub fn copies(&self) -> u128 {
        self.slots * self.replicas as u128
    }
}

/// Per-cell counts of the plan [`build_measurement_set`] would build,
/// without drawing any label; usable at sizes that cannot be materialized.
pub fn plan_accounting(
    n: usize,
    eps: f64,
    delta: f64,
    constants: &Constants,
) -> Result<Vec<CellSize>, TomographyError> {
    validate(n, eps, delta, constants)?;
    let eps_int = internal_accuracy(n, eps, constants);
    let mut cells = Vec::new();
    for level in (0..n).rev() {
        for &eps_prime in &accuracy_grid(eps_int) {
            let size = plan_size(
                n - level,
                constants.gamma_scale * eps_prime.sqrt(),
                cell_failure(eps_prime, delta),
                &constants.frobenius,
            )?;
            cells.push(CellSize {
                level,
                eps_prime,
                slots: size.total_queries(),
                replicas: replica_count(n, level, eps_prime, eps_int, constants),
            });
        }
    }
    Ok(cells)
}

pub fn total_copies(cells: &[CellSize]) -> u128 {
    cells.iter().map(CellSize::copies).sum()
}

/// Slot offsets of a Frobenius plan, in block order.
#[derive(Clone, Debug, PartialEq)]
struct SlotLayout {
    per_rep: usize,
    level_offsets: Vec<usize>,
    samples: Vec<usize>,
    reps: usize,
}

impl SlotLayout {
    fn new(plan: &FrobeniusPlan) -> Self {
        let mut level_offsets = Vec::new();
        let mut samples = Vec::new();
        let mut acc = 0;
        for level in plan.levels().levels() {
            level_offsets.push(acc);
            samples.push(level.samples_per_index);
            acc += level.index_count * level.samples_per_index;
        }
        Self {
            per_rep: acc,
            level_offsets,
            samples,
            reps: plan.repetitions(),
        }
    }

    fn slots(&self) -> usize {
        self.per_rep * self.reps
    }

    fn offset(&self, block: BlockId) -> usize {
        block.rep * self.per_rep + self.level_offsets[block.level] + block.slot * self.samples[block.level]
    }

    /// Inverse of [`offset`](Self::offset): the block and sample of a slot.
    fn locate(&self, slot: usize) -> (BlockId, usize) {
        let rep = slot / self.per_rep;
        let rem = slot % self.per_rep;
        let level = self.level_offsets.partition_point(|&o| o <= rem) - 1;
        let within = rem - self.level_offsets[level];
        let m = self.samples[level];
        (
            BlockId {
                rep,
                level,
                slot: within / m,
            },
            within % m,
        )
    }
}

/// One `(ℓ, ε')` cell of a measurement plan.
#[derive(Clone, Debug)]
pub struct Cell {
    pub level: usize,
    pub eps_prime: f64,
    pub frobenius: FrobeniusPlan,
    pub replicas: u64,
    layout: SlotLayout,
}

impl Cell {
    pub fn slots(&self) -> usize {
        self.layout.slots()
    }

    pub fn copies(&self) -> u64 {
        self.slots() as u64 * self.replicas
    }
}

/// The full nonadaptive measurement multiset.
#[derive(Clone, Debug)]
pub struct MeasurementPlan {
    n: usize,
    eps: f64,
    eps_internal: f64,
    delta: f64,
    constants: Constants,
    grid: Vec<f64>,
    cells: Vec<Cell>,
    lift_key: u64,
}

/// Draws every Frobenius plan for `ℓ = n−1, …, 0` and `ε'` ascending.
pub fn build_measurement_set<R: Rng + ?Sized>(
    n: usize,
    eps: f64,
    delta: f64,
    constants: &Constants,
    rng: &mut R,
) -> Result<MeasurementPlan, TomographyError> {
    validate(n, eps, delta, constants)?;
    let eps_internal = internal_accuracy(n, eps, constants);
    let grid = accuracy_grid(eps_internal);
    let mut cells = Vec::new();
    for level in (0..n).rev() {
        for &eps_prime in &grid {
            let frobenius = make_plan(
                n - level,
                constants.gamma_scale * eps_prime.sqrt(),
                cell_failure(eps_prime, delta),
                &constants.frobenius,
                rng,
            )?;
            let layout = SlotLayout::new(&frobenius);
            cells.push(Cell {
                level,
                eps_prime,
                replicas: replica_count(n, level, eps_prime, eps_internal, constants),
                frobenius,
                layout,
            });
        }
    }
    Ok(MeasurementPlan {
        n,
        eps,
        eps_internal,
        delta,
        constants: *constants,
        grid,
        cells,
        lift_key: rng.random(),
    })
}

impl MeasurementPlan {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eps_internal(&self) -> f64 {
        self.eps_internal
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn total_copies(&self) -> u64 {
        self.cells.iter().map(Cell::copies).sum()
    }

    pub fn accounting(&self) -> Vec<CellSize> {
        self.cells
            .iter()
            .map(|c| CellSize {
                level: c.level,
                eps_prime: c.eps_prime,
                slots: c.slots() as u128,
                replicas: c.replicas,
            })
            .collect()
    }

    /// Cells of one level, `ε'` ascending.
    pub fn level_cells(&self, level: usize) -> impl Iterator<Item = (usize, &Cell)> + '_ {
        self.cells.iter().enumerate().filter(move |(_, c)| c.level == level)
    }

    /// The lifted suffix basis of a block. With the `Z` fill this is a
    /// function of the label alone; with the random fill it is drawn from
    /// the plan's own key, so it is still fixed before any measurement.
    pub fn basis(&self, cell: usize, block: BlockId, label: &PauliLabel) -> MeasurementBasis {
        match self.constants.frobenius.identity_fill {
            IdentityFill::Z => label.lift_z(),
            IdentityFill::Random => {
                let key = splitmix64(
                    self.lift_key
                        ^ splitmix64(((cell as u64) << 48) ^ ((block.rep as u64) << 40) ^ ((block.level as u64) << 32) ^ block.slot as u64),
                );
                label.lift(IdentityFill::Random, &mut SimRng::seed_from_u64(key))
            }
        }
    }

    /// Writes one `ℓ ε' rep j t a LABEL BASIS r` line per copy, in entry
    /// order, after a `#` header.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<(), TomographyError> {
        writeln!(
            w,
            "# measurement-plan n={} eps={} eps_internal={} delta={} copies={}",
            self.n,
            self.eps,
            self.eps_internal,
            self.delta,
            self.total_copies()
        )?;
        for (ci, cell) in self.cells.iter().enumerate() {
            for (id, label) in cell.frobenius.blocks() {
                let basis = self.basis(ci, id, &label);
                let (lt, bt) = (label.to_token(), basis.to_token());
                for a in 0..cell.frobenius.samples_in(id) {
                    for r in 0..cell.replicas {
                        writeln!(
                            w,
                            "{} {} {} {} {} {} {} {} {}",
                            cell.level, cell.eps_prime, id.rep, id.level, id.slot, a, lt, bt, r
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Cell, slot and replica of an entry id.
    fn locate_entry(&self, entry: u64) -> Result<(usize, usize, u64), TomographyError> {
        let mut start = 0u64;
        for (ci, cell) in self.cells.iter().enumerate() {
            let end = start + cell.copies();
            if entry < end {
                let within = entry - start;
                return Ok((ci, (within / cell.replicas) as usize, within % cell.replicas));
            }
            start = end;
        }
        Err(TomographyError::UnknownEntry(entry))
    }
}

/// Binned outcomes of one cell: the first value seen per (prefix, slot).
#[derive(Clone, Debug, PartialEq)]
pub struct CellLog {
    slots: usize,
    values: Vec<i8>,
    covered: Vec<usize>,
    hits: Vec<u64>,
}

impl CellLog {
    fn new(level: usize, slots: usize) -> Self {
        let prefixes = 1usize << level;
        Self {
            slots,
            values: vec![0; prefixes * slots],
            covered: vec![0; prefixes],
            hits: vec![0; prefixes],
        }
    }

    fn record(&mut self, prefix: usize, slot: usize, value: i8) {
        self.hits[prefix] += 1;
        let v = &mut self.values[prefix * self.slots + slot];
        if *v == 0 {
            *v = value;
            self.covered[prefix] += 1;
        }
    }

    /// Outcomes that landed on `prefix`, replicas included.
    pub fn hits(&self, prefix: usize) -> u64 {
        self.hits[prefix]
    }

    /// Whether every slot has at least one outcome for `prefix`.
    pub fn is_covered(&self, prefix: usize) -> bool {
        self.covered[prefix] == self.slots
    }

    pub fn covered_slots(&self, prefix: usize) -> usize {
        self.covered[prefix]
    }

    pub fn value(&self, prefix: usize, slot: usize) -> Option<i8> {
        match self.values[prefix * self.slots + slot] {
            0 => None,
            v => Some(v),
        }
    }
}

/// All binned outcomes of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeLog {
    cells: Vec<CellLog>,
    copies: u64,
}

impl OutcomeLog {
    pub fn empty(plan: &MeasurementPlan) -> Self {
        Self {
            cells: plan.cells.iter().map(|c| CellLog::new(c.level, c.slots())).collect(),
            copies: 0,
        }
    }

    pub fn cells(&self) -> &[CellLog] {
        &self.cells
    }

    /// Copies measured to produce this log.
    pub fn copies_used(&self) -> u64 {
        self.copies
    }

    /// Bins one raw record, evaluating the observable from its bits.
    pub fn push_record(&mut self, plan: &MeasurementPlan, record: &OutcomeRecord) -> Result<(), TomographyError> {
        let (ci, slot, _) = plan.locate_entry(record.entry)?;
        let cell = &plan.cells[ci];
        if record.prefix.len() != cell.level {
            return Err(TomographyError::Parse {
                line: 0,
                message: format!("entry {} expects a prefix of length {}", record.entry, cell.level),
            });
        }
        let (block, _) = cell.layout.locate(slot);
        let label = cell.frobenius.label(block);
        let basis = plan.basis(ci, block, &label);
        let value = evaluate_observable(&label, &basis, &record.bits)?;
        self.cells[ci].record(record.prefix.bits(), slot, value);
        self.copies += 1;
        Ok(())
    }

    /// Rebuilds a log from raw records.
    pub fn from_records<I>(plan: &MeasurementPlan, records: I) -> Result<Self, TomographyError>
    where
        I: IntoIterator<Item = OutcomeRecord>,
    {
        let mut log = Self::empty(plan);
        for r in records {
            log.push_record(plan, &r)?;
        }
        Ok(log)
    }
}

/// One measured copy: entry id, computational prefix and suffix bits.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeRecord {
    pub entry: u64,
    pub prefix: Prefix,
    pub bits: OutcomeBits,
}

impl OutcomeRecord {
    pub fn to_line(&self) -> String {
        format!("{} {} {}", self.entry, self.prefix.to_token(), self.bits.to_token())
    }

    pub fn parse(line: &str, lineno: usize) -> Result<Self, TomographyError> {
        let err = |message: String| TomographyError::Parse { line: lineno, message };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err("expected `entry prefix bits`".into()));
        }
        Ok(Self {
            entry: f[0].parse().map_err(|e: std::num::ParseIntError| err(e.to_string()))?,
            prefix: f[1].parse().map_err(err)?,
            bits: OutcomeBits::from_token(f[2]).map_err(|e| err(e.to_string()))?,
        })
    }
}

/// Reads `entry prefix bits` lines, skipping `#` comments.
pub fn read_records<R: BufRead>(r: R) -> Result<Vec<OutcomeRecord>, TomographyError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        out.push(OutcomeRecord::parse(body, i + 1)?);
    }
    Ok(out)
}

/// Measures one copy of `psi` per plan entry and bins the outcomes.
pub fn execute_plan<R: Rng + ?Sized>(
    plan: &MeasurementPlan,
    psi: &StateVector,
    rng: &mut R,
) -> Result<OutcomeLog, TomographyError> {
    execute_inner(plan, psi, rng, None)
}

/// Like [`execute_plan`], also passing every raw record to `sink`.
pub fn execute_plan_recording<R: Rng + ?Sized>(
    plan: &MeasurementPlan,
    psi: &StateVector,
    rng: &mut R,
    sink: &mut dyn FnMut(OutcomeRecord) -> Result<(), TomographyError>,
) -> Result<OutcomeLog, TomographyError> {
    execute_inner(plan, psi, rng, Some(sink))
}

fn execute_inner<R: Rng + ?Sized>(
    plan: &MeasurementPlan,
    psi: &StateVector,
    rng: &mut R,
    mut sink: Option<&mut dyn FnMut(OutcomeRecord) -> Result<(), TomographyError>>,
) -> Result<OutcomeLog, TomographyError> {
    if psi.qubits() != plan.n {
        return Err(TomographyError::QubitMismatch {
            expected: plan.n,
            got: psi.qubits(),
        });
    }
    let mut log = OutcomeLog::empty(plan);
    let mut entry = 0u64;
    for (ci, cell) in plan.cells.iter().enumerate() {
        let m = plan.n - cell.level;
        let suffix_mask = (1usize << m) - 1;
        for (id, label) in cell.frobenius.blocks() {
            let basis = plan.basis(ci, id, &label);
            let sampler = OutcomeSampler::new(&psi.outcome_distribution(cell.level, &basis)?);
            let support = label.support_mask();
            let base = cell.layout.offset(id);
            for a in 0..cell.frobenius.samples_in(id) {
                for _ in 0..cell.replicas {
                    let idx = sampler.sample(rng);
                    let prefix = idx >> m;
                    let suffix = idx & suffix_mask;
                    let value = if (suffix & support).count_ones() % 2 == 0 { 1 } else { -1 };
                    log.cells[ci].record(prefix, base + a, value);
                    if let Some(s) = sink.as_mut() {
                        s(OutcomeRecord {
                            entry,
                            prefix: Prefix::new(cell.level, prefix),
                            bits: OutcomeBits::from_index(m, suffix),
                        })?;
                    }
                    entry += 1;
                }
            }
        }
    }
    log.copies = entry;
    Ok(log)
}

/// Answers a cell's queries from one prefix bin.
struct BinSource<'a> {
    log: &'a CellLog,
    layout: &'a SlotLayout,
    prefix: usize,
}

impl OutcomeSource for BinSource<'_> {
    fn answer_block(&mut self, block: BlockId, _label: &PauliLabel, out: &mut [i8]) -> Result<(), FrobeniusError> {
        let base = self.layout.offset(block);
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.log.value(self.prefix, base + a).ok_or(FrobeniusError::MissingOutcome {
                rep: block.rep,
                level: block.level,
                slot: block.slot,
                sample: a,
            })?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Ok,
    /// No grid accuracy had full coverage; glued with `(1/√2, 1/√2)`.
    Fallback,
}

impl NodeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Ok => "ok",
            NodeStatus::Fallback => "fallback",
        }
    }
}

/// The estimate at one tree node.
#[derive(Clone, Debug)]
pub struct NodeEstimate {
    pub prefix: Prefix,
    pub state: StateVector,
    pub status: NodeStatus,
    /// Grid accuracy whose outcomes were used, if any.
    pub eps_prime: Option<f64>,
    pub pair: Option<AmplitudePair>,
    /// Outcomes (replicas included) that landed on this prefix at this level.
    pub hits: u64,
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub state: StateVector,
    /// Internal nodes, level `n−1` first; leaves are omitted.
    pub nodes: Vec<NodeEstimate>,
}

impl Reconstruction {
    pub fn fallback_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.status == NodeStatus::Fallback).count()
    }
}

/// Bottom-up reconstruction. Node `x` draws its candidate randomness from
/// `(seed, "node", index)` with the index enumerating nodes in tree order.
pub fn reconstruct(plan: &MeasurementPlan, log: &OutcomeLog, seed: u64) -> Result<Reconstruction, TomographyError> {
    let n = plan.n;
    let sampling = plan.constants.frobenius.sigma;
    let mut children: Vec<StateVector> = vec![StateVector::scalar(); 1 << n];
    let mut nodes = Vec::new();
    for level in (0..n).rev() {
        let cells: Vec<(usize, &Cell)> = plan.level_cells(level).collect();
        let mut current = Vec::with_capacity(1 << level);
        for x in 0..(1usize << level) {
            let prefix = Prefix::new(level, x);
            let (c0, c1) = (&children[2 * x], &children[2 * x + 1]);
            let hits = cells.iter().map(|(ci, _)| log.cells[*ci].hits(x)).sum();
            let chosen = cells.iter().find(|(ci, _)| log.cells[*ci].is_covered(x));
            let node = match chosen {
                Some(&(ci, cell)) => {
                    let mut source = BinSource {
                        log: &log.cells[ci],
                        layout: &cell.layout,
                        prefix: x,
                    };
                    let prepared = PreparedOutcomes::collect(&cell.frobenius, &mut source)?;
                    let net = net_for_accuracy(cell.eps_prime, plan.constants.net_scale)?;
                    let node_seed = derive_seed(seed, "node", ((1u64 << level) - 1) + x as u64);
                    let found = find_coeffs_prepared(c0, c1, &cell.frobenius, &prepared, &net, sampling, node_seed)?;
                    NodeEstimate {
                        prefix,
                        state: candidate_state(&found.pair, c0, c1)?,
                        status: NodeStatus::Ok,
                        eps_prime: Some(cell.eps_prime),
                        pair: Some(found.pair),
                        hits,
                    }
                }
                None => NodeEstimate {
                    prefix,
                    state: candidate_state(&AmplitudePair::balanced(), c0, c1)?,
                    status: NodeStatus::Fallback,
                    eps_prime: None,
                    pair: None,
                    hits,
                },
            };
            current.push(node.state.clone());
            nodes.push(node);
        }
        children = current;
    }
    Ok(Reconstruction {
        state: children.pop().expect("root"),
        nodes,
    })
}
