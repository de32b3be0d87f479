//! The verification loop: random training regressions, network training,
//! model-guided coverage closure, failure-directed bug hunting and the
//! random-versus-model comparison experiment.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ann::{self, default_hidden, Network, NetworkConfig, SparseVec, TrainingSet};
use crate::coverage::{BinRef, CoverageDatabase, CoverageModel, CoverageModelDesc};
use crate::dut::{Dut, DutKind, PortRef, ResponseVector, StimulusVector, TestStatus};
use crate::error::{Error, Result};
use crate::reporting::{CellReport, ConvergenceCurve, ExperimentReport, ExperimentSettings, SeedOutcome};
use crate::stimulus::{
    derive_seed, mux_select, random_stimulus, Constraint, ConstraintSet, Phase, Prng, StimulusSource,
};

/// Parameter budget above which the engine refuses to build a network.
pub const MAX_NETWORK_PARAMETERS: usize = 20_000_000;

const INIT_SEED_SALT: u64 = 1;
const BIN_ORDER_SALT: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinOrder {
    /// Lowest uncovered id first.
    #[default]
    Lowest,
    Random,
}

/// How a coverage goal is turned into a stimulus by the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoalEncoding {
    /// Forward the goal bin's one-hot vector and use the prediction as is.
    Direct,
    /// For a cross bin, each input port sampled by a standalone member
    /// coverpoint takes its value from the prediction for that member's bin;
    /// remaining ports come from the cross bin's own prediction.
    #[default]
    Decomposed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Random,
    Ann,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Ann => "ann",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Method::Random),
            "ann" => Ok(Method::Ann),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Optional network overrides; unset fields take the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_layers: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_seed: Option<u64>,
}

impl NetworkOverrides {
    /// `[n_in, hidden..., n_out]` with the configured or default hidden
    /// layer, seeded from `base_seed` unless an init seed is given.
    pub fn build(&self, n_in: usize, n_out: usize, base_seed: u64) -> Result<NetworkConfig> {
        let hidden = self
            .hidden_layers
            .clone()
            .unwrap_or_else(|| vec![default_hidden(n_in, n_out)]);
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(n_in);
        sizes.extend(hidden);
        sizes.push(n_out);
        let params: usize = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        if params > MAX_NETWORK_PARAMETERS {
            return Err(Error::Config(format!(
                "network {sizes:?} has {params} parameters, limit {MAX_NETWORK_PARAMETERS}"
            )));
        }
        let seed = self.init_seed.unwrap_or_else(|| derive_seed(base_seed, INIT_SEED_SALT));
        let mut config = NetworkConfig::new(sizes, seed);
        if let Some(lr) = self.learning_rate {
            config.learning_rate = lr;
        }
        if let Some(epochs) = self.epochs {
            config.epochs = epochs;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Random transactions in the training phase; `None` means
    /// `min(4 · bins, 2000)`.
    pub train_transactions: Option<usize>,
    pub iteration_cap: usize,
    pub retrain_interval: usize,
    pub per_bin_model_attempts: usize,
    pub goal: f64,
    pub base_seed: u64,
    pub bin_order: BinOrder,
    pub goal_encoding: GoalEncoding,
    pub network: NetworkOverrides,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            train_transactions: None,
            iteration_cap: 5000,
            retrain_interval: 64,
            per_bin_model_attempts: 3,
            goal: 1.0,
            base_seed: 0,
            bin_order: BinOrder::Lowest,
            goal_encoding: GoalEncoding::Decomposed,
            network: NetworkOverrides::default(),
        }
    }
}

impl EngineConfig {
    pub fn with_seed(seed: u64) -> Self {
        EngineConfig {
            base_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iteration_cap == 0 {
            return Err(Error::Config("iteration cap must be positive".into()));
        }
        if self.retrain_interval == 0 {
            return Err(Error::Config("retrain interval must be positive".into()));
        }
        if self.per_bin_model_attempts == 0 {
            return Err(Error::Config("per-bin model attempts must be positive".into()));
        }
        if !(self.goal > 0.0 && self.goal <= 1.0) {
            return Err(Error::Config(format!("goal {} outside (0, 1]", self.goal)));
        }
        Ok(())
    }

    pub fn train_transactions_for(&self, bins: usize) -> usize {
        self.train_transactions.unwrap_or_else(|| (4 * bins).min(2000))
    }
}

/// A DUT together with the coverage model and constraints it is verified
/// against.
pub struct Testbench {
    pub dut: Box<dyn Dut>,
    pub model: Arc<CoverageModel>,
    pub constraints: ConstraintSet,
}

impl Testbench {
    pub fn new(dut: Box<dyn Dut>, model: Arc<CoverageModel>, constraints: ConstraintSet) -> Self {
        Testbench {
            dut,
            model,
            constraints,
        }
    }

    /// Default coverage model, full-range constraints.
    pub fn standard(kind: DutKind, width: u32) -> Result<Self> {
        let dut = kind.build(width)?;
        let model = Arc::new(CoverageModel::default_model(kind, dut.spec())?);
        let constraints = ConstraintSet::full_range(dut.spec());
        Ok(Self::new(dut, model, constraints))
    }

    pub fn with_model(kind: DutKind, width: u32, desc: &CoverageModelDesc) -> Result<Self> {
        let dut = kind.build(width)?;
        let model = Arc::new(CoverageModel::build(desc, dut.spec())?);
        let constraints = ConstraintSet::full_range(dut.spec());
        Ok(Self::new(dut, model, constraints))
    }

    /// Optional custom coverage model and per-port constraints by name.
    pub fn configured(
        kind: DutKind,
        width: u32,
        model: Option<&CoverageModelDesc>,
        constraints: &BTreeMap<String, Constraint>,
    ) -> Result<Self> {
        let dut = kind.build(width)?;
        let model = Arc::new(match model {
            Some(desc) => CoverageModel::build(desc, dut.spec())?,
            None => CoverageModel::default_model(kind, dut.spec())?,
        });
        let constraints =
            ConstraintSet::from_named(dut.spec(), constraints.iter().map(|(k, c)| (k.as_str(), c.clone())))?;
        Ok(Self::new(dut, model, constraints))
    }

    pub fn input_bits(&self) -> usize {
        self.dut.spec().input_bits()
    }

    pub fn bins(&self) -> usize {
        self.model.total_bins()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub iteration: u64,
    pub phase: Phase,
    pub source: StimulusSource,
    pub stimulus: StimulusVector,
    pub response: ResponseVector,
    pub status: TestStatus,
    pub newly_hit: Vec<usize>,
    pub coverage: f64,
}

#[derive(Debug, Clone)]
pub struct ClosureResult {
    pub converged: bool,
    pub test_iterations: u64,
    pub total_iterations: u64,
    pub records: Vec<RunRecord>,
    pub final_coverage: f64,
    pub bin_hits: Vec<u64>,
    /// Holes left when the test phase began.
    pub holes_at_test_start: usize,
    pub network: Option<Network>,
}

impl ClosureResult {
    pub fn curve(&self) -> ConvergenceCurve {
        ConvergenceCurve::from_records(&self.records)
    }
}

/// One transaction applied: the bins it landed in and its status.
struct Applied {
    bins: Vec<usize>,
    status: TestStatus,
}

/// Mutable state of one run.
struct Session<'a> {
    tb: &'a Testbench,
    db: CoverageDatabase,
    prng: Prng,
    records: Vec<RunRecord>,
}

impl<'a> Session<'a> {
    fn new(tb: &'a Testbench, seed: u64) -> Self {
        Session {
            tb,
            db: CoverageDatabase::new(tb.model.clone()),
            prng: Prng::new(seed),
            records: Vec::new(),
        }
    }

    fn iteration(&self) -> u64 {
        self.records.len() as u64
    }

    fn random_stimulus(&mut self) -> StimulusVector {
        random_stimulus(&self.tb.constraints, &mut self.prng)
    }

    fn apply(&mut self, phase: Phase, source: StimulusSource, stimulus: StimulusVector) -> Result<Applied> {
        let (response, status) = self.tb.dut.transact(&stimulus)?;
        let bins = self.tb.model.locate(&stimulus, &response)?;
        let newly_hit = self.db.record(&bins);
        self.records.push(RunRecord {
            iteration: self.iteration(),
            phase,
            source,
            stimulus,
            response,
            status,
            newly_hit,
            coverage: self.db.coverage_fraction(),
        });
        Ok(Applied { bins, status })
    }

    fn goal_met(&self, goal: f64) -> bool {
        self.db.coverage_fraction() >= goal
    }

    /// Adds one `(one-hot(bin), input bits)` pair per occupied bin.
    fn harvest(&self, set: &mut TrainingSet, bins: &[usize]) -> Result<()> {
        let stimulus = &self.records.last().expect("a transaction was applied").stimulus;
        let bits = self.tb.dut.spec().encode_bits(stimulus);
        let iteration = self.iteration() - 1;
        for &bin in bins {
            set.push(SparseVec::one_hot(self.tb.bins(), bin), bits.clone(), iteration)?;
        }
        Ok(())
    }
}

/// Output of the random training phase.
pub struct TrainingData {
    pub set: TrainingSet,
    pub db: CoverageDatabase,
    pub records: Vec<RunRecord>,
    /// Stimulus generator state after the phase.
    pub prng: Prng,
}

fn collect_into(session: &mut Session, set: &mut TrainingSet, transactions: usize) -> Result<()> {
    for _ in 0..transactions {
        let source = mux_select(Phase::Train, false, false);
        let stimulus = session.random_stimulus();
        let applied = session.apply(Phase::Train, source, stimulus)?;
        session.harvest(set, &applied.bins)?;
    }
    Ok(())
}

/// Runs the random training regressions and labels every transaction.
pub fn collect_training_data(tb: &Testbench, config: &EngineConfig) -> Result<TrainingData> {
    config.validate()?;
    let mut session = Session::new(tb, config.base_seed);
    let mut set = TrainingSet::new(tb.bins(), tb.input_bits());
    collect_into(&mut session, &mut set, config.train_transactions_for(tb.bins()))?;
    Ok(TrainingData {
        set,
        db: session.db,
        records: session.records,
        prng: session.prng,
    })
}

fn finish(session: Session, test_iterations: u64, holes: usize, goal: f64, network: Option<Network>) -> ClosureResult {
    ClosureResult {
        converged: session.goal_met(goal),
        test_iterations,
        total_iterations: session.records.len() as u64,
        final_coverage: session.db.coverage_fraction(),
        bin_hits: session.db.hits().to_vec(),
        holes_at_test_start: holes,
        records: session.records,
        network,
    }
}

/// Plain constrained-random regression until the goal or the cap.
pub fn run_random_to_closure(tb: &Testbench, config: &EngineConfig) -> Result<ClosureResult> {
    config.validate()?;
    let session = Session::new(tb, config.base_seed);
    random_loop(session, config)
}

/// As [`run_random_to_closure`], continuing from an existing database.
pub fn run_random_from(tb: &Testbench, db: CoverageDatabase, config: &EngineConfig) -> Result<ClosureResult> {
    config.validate()?;
    let mut session = Session::new(tb, config.base_seed);
    session.db = db;
    random_loop(session, config)
}

fn random_loop(mut session: Session, config: &EngineConfig) -> Result<ClosureResult> {
    let holes = session.db.total_bins() - session.db.covered_bins();
    let mut test_iterations = 0u64;
    while !session.goal_met(config.goal) && (test_iterations as usize) < config.iteration_cap {
        let source = mux_select(Phase::Test, false, false);
        let stimulus = session.random_stimulus();
        session.apply(Phase::Test, source, stimulus)?;
        test_iterations += 1;
    }
    Ok(finish(session, test_iterations, holes, config.goal, None))
}

/// The network's stimulus for one coverage goal.
pub fn goal_stimulus(net: &Network, tb: &Testbench, bin: usize, encoding: GoalEncoding) -> Result<StimulusVector> {
    let spec = tb.dut.spec();
    let direct = ann::predict_stimulus_sparse(net, &SparseVec::one_hot(tb.bins(), bin), spec)?;
    if encoding == GoalEncoding::Direct {
        return Ok(direct);
    }
    let BinRef::Cross { cross, member_bins } = tb.model.bin_ref(bin)? else {
        return Ok(direct);
    };
    let mut values = direct.0;
    let members = &tb.model.crosses()[cross].members;
    for (&cp, &local) in members.iter().zip(&member_bins) {
        let PortRef::Input(port) = tb.model.coverpoints()[cp].source else {
            continue;
        };
        if let Some(id) = tb.model.coverpoint_bin_id(cp, local) {
            let member = ann::predict_stimulus_sparse(net, &SparseVec::one_hot(tb.bins(), id), spec)?;
            values[port] = member.0[port];
        }
    }
    Ok(StimulusVector(values))
}

/// Optional starting point for [`run_ml_from`].
pub struct MlStart {
    pub data: TrainingData,
    /// A trained network; when absent one is built and trained on
    /// `data.set`.
    pub network: Option<Network>,
}

/// Training phase, network training, then model-guided closure.
pub fn run_ml_to_closure(tb: &Testbench, config: &EngineConfig) -> Result<ClosureResult> {
    config.validate()?;
    if config.train_transactions_for(tb.bins()) == 0 {
        return Err(Error::Config(
            "the training phase needs at least one transaction".into(),
        ));
    }
    let data = collect_training_data(tb, config)?;
    run_ml_from(tb, config, MlStart { data, network: None })
}

/// Model-guided closure from a given training phase and, optionally, an
/// already trained network.
pub fn run_ml_from(tb: &Testbench, config: &EngineConfig, start: MlStart) -> Result<ClosureResult> {
    config.validate()?;
    let MlStart { data, network } = start;
    let mut set = data.set;
    let mut session = Session::new(tb, config.base_seed);
    session.prng = data.prng;
    session.db = data.db;
    session.records = data.records;

    let mut net = match network {
        Some(net) => net,
        None => {
            if set.is_empty() {
                return Err(Error::Config("training set is empty".into()));
            }
            let nc = config.network.build(tb.bins(), tb.input_bits(), config.base_seed)?;
            let mut net = Network::init(&nc)?;
            net.train(&set)?;
            net
        }
    };
    if net.input_len() != tb.bins() || net.output_len() != tb.input_bits() {
        return Err(Error::Structural(format!(
            "network maps {} -> {}, testbench needs {} -> {}",
            net.input_len(),
            net.output_len(),
            tb.bins(),
            tb.input_bits()
        )));
    }

    let holes = session.db.total_bins() - session.db.covered_bins();
    let mut attempts = vec![config.per_bin_model_attempts; tb.bins()];
    let mut order_rng = Prng::new(derive_seed(config.base_seed, BIN_ORDER_SALT));
    let mut test_iterations = 0u64;
    let mut eligible = Vec::new();
    while !session.goal_met(config.goal) && (test_iterations as usize) < config.iteration_cap {
        eligible.clear();
        eligible.extend(session.db.uncovered_iter().filter(|&b| attempts[b] > 0));
        let target = match config.bin_order {
            BinOrder::Lowest => eligible.first().copied(),
            BinOrder::Random if eligible.is_empty() => None,
            BinOrder::Random => Some(eligible[order_rng.below(eligible.len())]),
        };
        let source = mux_select(Phase::Test, true, target.is_none());
        let stimulus = match (source, target) {
            (StimulusSource::Model, Some(bin)) => goal_stimulus(&net, tb, bin, config.goal_encoding)?,
            _ => session.random_stimulus(),
        };
        let applied = session.apply(Phase::Test, source, stimulus)?;
        if let Some(bin) = target {
            if !session.db.is_covered(bin) {
                attempts[bin] -= 1;
            }
        }
        session.harvest(&mut set, &applied.bins)?;
        test_iterations += 1;
        if test_iterations.is_multiple_of(config.retrain_interval as u64) && !session.goal_met(config.goal) {
            net.train(&set)?;
        }
    }
    Ok(finish(session, test_iterations, holes, config.goal, Some(net)))
}

/// Index of the highest score; ties go to the lowest index.
pub fn select_candidate(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone)]
pub struct BugHuntResult {
    /// Failures seen during the test phase.
    pub failures_found: usize,
    pub failing_stimuli: Vec<StimulusVector>,
    pub records: Vec<RunRecord>,
    /// Failures seen while harvesting classifier training data.
    pub training_failures: usize,
}

fn status_label(status: TestStatus) -> f64 {
    match status {
        TestStatus::Fail => 1.0,
        TestStatus::Pass => 0.0,
    }
}

/// Trains a pass/fail classifier on random transactions, then repeatedly
/// applies the most failure-prone of `pool` random candidates.
pub fn run_failure_directed(
    tb: &Testbench,
    config: &EngineConfig,
    iterations: usize,
    pool: usize,
) -> Result<BugHuntResult> {
    config.validate()?;
    if iterations == 0 || pool == 0 {
        return Err(Error::Config("iterations and pool must be positive".into()));
    }
    let spec = tb.dut.spec();
    let n_bits = tb.input_bits();
    let mut session = Session::new(tb, config.base_seed);
    let mut set = TrainingSet::new(n_bits, 1);
    let mut training_failures = 0;
    for _ in 0..config.train_transactions_for(tb.bins()) {
        let stimulus = session.random_stimulus();
        let bits = spec.encode_bits(&stimulus);
        let applied = session.apply(Phase::Train, StimulusSource::Random, stimulus)?;
        training_failures += usize::from(applied.status == TestStatus::Fail);
        set.push_dense(&bits, &[status_label(applied.status)], session.iteration() - 1)?;
    }
    if set.is_empty() {
        return Err(Error::Config(
            "the training phase needs at least one transaction".into(),
        ));
    }
    let nc = config.network.build(n_bits, 1, config.base_seed)?;
    let mut net = Network::init(&nc)?;
    net.train(&set)?;

    let mut failing_stimuli = Vec::new();
    let mut candidates = Vec::with_capacity(pool);
    let mut scores = Vec::with_capacity(pool);
    for t in 1..=iterations {
        candidates.clear();
        scores.clear();
        for _ in 0..pool {
            let c = session.random_stimulus();
            scores.push(net.forward(&spec.encode_bits(&c))?[0]);
            candidates.push(c);
        }
        let pick = select_candidate(&scores).expect("pool is non-empty");
        let stimulus = candidates.swap_remove(pick);
        let bits = spec.encode_bits(&stimulus);
        let applied = session.apply(Phase::Test, StimulusSource::Model, stimulus)?;
        if applied.status == TestStatus::Fail {
            failing_stimuli.push(session.records.last().unwrap().stimulus.clone());
        }
        set.push_dense(&bits, &[status_label(applied.status)], session.iteration() - 1)?;
        if t.is_multiple_of(config.retrain_interval) {
            net.train(&set)?;
        }
    }
    Ok(BugHuntResult {
        failures_found: failing_stimuli.len(),
        failing_stimuli,
        records: session.records,
        training_failures,
    })
}

/// Same budget, pure random stimulus, no training phase.
pub fn run_random_bughunt(tb: &Testbench, config: &EngineConfig, iterations: usize) -> Result<BugHuntResult> {
    config.validate()?;
    let mut session = Session::new(tb, config.base_seed);
    let mut failing_stimuli = Vec::new();
    for _ in 0..iterations {
        let stimulus = session.random_stimulus();
        let applied = session.apply(Phase::Test, StimulusSource::Random, stimulus)?;
        if applied.status == TestStatus::Fail {
            failing_stimuli.push(session.records.last().unwrap().stimulus.clone());
        }
    }
    Ok(BugHuntResult {
        failures_found: failing_stimuli.len(),
        failing_stimuli,
        records: session.records,
        training_failures: 0,
    })
}

/// Seed of run `seed_index` at `width`.
pub fn experiment_seed(base_seed: u64, width: u32, seed_index: usize) -> u64 {
    base_seed
        .wrapping_add(u64::from(width) * 1000)
        .wrapping_add(seed_index as u64)
}

/// Inputs of [`compare_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub dut: DutKind,
    pub widths: Vec<u32>,
    pub seeds_per_width: usize,
    pub coverage_model: Option<CoverageModelDesc>,
    pub constraints: BTreeMap<String, Constraint>,
    pub engine: EngineConfig,
}

fn run_method(tb: &Testbench, method: Method, config: &EngineConfig) -> Result<ClosureResult> {
    match method {
        Method::Random => run_random_to_closure(tb, config),
        Method::Ann => run_ml_to_closure(tb, config),
    }
}

/// Random and model-guided closure over every (width, seed) pair. Runs are
/// independent and execute on the rayon pool; results are keyed by
/// (width, method, seed index).
pub fn compare_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.widths.is_empty() {
        return Err(Error::Config("at least one width is required".into()));
    }
    if spec.seeds_per_width == 0 {
        return Err(Error::Config("seeds per width must be positive".into()));
    }
    spec.engine.validate()?;
    let benches = spec
        .widths
        .iter()
        .map(|&w| Testbench::configured(spec.dut, w, spec.coverage_model.as_ref(), &spec.constraints))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, Method, usize)> = (0..spec.widths.len())
        .flat_map(|w| {
            [Method::Random, Method::Ann]
                .into_iter()
                .flat_map(move |m| (0..spec.seeds_per_width).map(move |s| (w, m, s)))
        })
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(w, method, s)| {
            let seed = experiment_seed(spec.engine.base_seed, spec.widths[w], s);
            let config = EngineConfig {
                base_seed: seed,
                ..spec.engine.clone()
            };
            let result = run_method(&benches[w], method, &config)?;
            Ok(SeedOutcome::from_result(s, seed, &result))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    let mut it = outcomes.into_iter();
    for &width in &spec.widths {
        for method in [Method::Random, Method::Ann] {
            let seeds: Vec<SeedOutcome> = it.by_ref().take(spec.seeds_per_width).collect();
            cells.push(CellReport::new(width, method, seeds));
        }
    }
    Ok(ExperimentReport::new(
        ExperimentSettings {
            dut: spec.dut,
            widths: spec.widths.clone(),
            seeds_per_width: spec.seeds_per_width,
            coverage_model: spec.coverage_model.clone(),
            constraints: spec.constraints.clone(),
            engine: spec.engine.clone(),
        },
        cells,
    ))
}
