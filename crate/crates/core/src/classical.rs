//! Oracle-only classical explorers.
//!
//! Explorers are generic over [`AdjacencyOracle`] and start from nothing but
//! the label of s. A run ends at the query budget, on reaching t, or on the
//! first cycle: an edge to an already-discovered vertex other than the one
//! the current vertex was reached by. A sentinel answer at a vertex reached
//! through an edge means fewer than d distinct neighbors, i.e. a multi-edge,
//! which is a cycle of length two.

use crate::graph::permute::derive_key;
use crate::graph::{build_graph, AdjacencyOracle, Backend, GraphError, MeterSnapshot, OracleSession, SunflowerGraph};
use crate::params::GraphParams;
use crate::stats::{wilson, Z95};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use std::str::FromStr;

const TAG_EXPLORE: u64 = 0x4558_504c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    RandomEmbedding,
    /// Baseline, not part of the lower-bound model.
    RandomWalk,
    /// Baseline, not part of the lower-bound model.
    BreadthFirst,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::RandomEmbedding => "random-embedding",
            Strategy::RandomWalk => "random-walk",
            Strategy::BreadthFirst => "breadth-first",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random-embedding" => Ok(Strategy::RandomEmbedding),
            "random-walk" => Ok(Strategy::RandomWalk),
            "breadth-first" => Ok(Strategy::BreadthFirst),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorerConfig {
    pub strategy: Strategy,
    /// Max O_{G,1} calls.
    pub budget: u64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationOutcome {
    pub found_t: bool,
    pub found_cycle: bool,
    pub queries_used: u64,
    pub discovered: u64,
    pub guessed_hits: u64,
    pub meters: MeterSnapshot,
}

impl ExplorationOutcome {
    pub fn success(&self) -> bool {
        self.found_t || self.found_cycle
    }
}

/// q = ⌊(d−1)^{c n}⌋, at least 1.
pub fn budget_for(d: usize, n: usize, c: f64) -> u64 {
    ((d as f64 - 1.0).powf(c * n as f64).floor() as u64).max(1)
}

fn explorer_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, &[TAG_EXPLORE]));
    rng.set_stream(trial);
    rng
}

struct Walker<'a, O: AdjacencyOracle> {
    oracle: &'a O,
    budget: u64,
    used: u64,
    floor: u64,
    /// Tree edge each discovered vertex was reached by.
    parent: HashMap<u64, Option<u64>>,
    found_t: bool,
    found_cycle: bool,
}

enum Step {
    New(u64),
    Known(u64),
    Stop,
}

impl<'a, O: AdjacencyOracle> Walker<'a, O> {
    fn new(oracle: &'a O, budget: u64) -> Self {
        let s = oracle.start();
        let mut parent = HashMap::new();
        parent.insert(s, None);
        let found_t = oracle.is_target(s);
        Walker { oracle, budget, used: 0, floor: oracle.sentinel_floor(), parent, found_t, found_cycle: false }
    }

    fn done(&self) -> bool {
        self.found_t || self.found_cycle || self.used >= self.budget
    }

    /// Queries neighbor k of v and classifies the answer.
    fn query(&mut self, v: u64, k: usize) -> Step {
        self.used += 1;
        let w = self.oracle.neighbor(v, k);
        if w >= self.floor {
            self.found_cycle = true;
            return Step::Stop;
        }
        if let Some(&p) = self.parent.get(&w) {
            let back_edge = self.parent[&v] == Some(w) || p == Some(v);
            if !back_edge {
                self.found_cycle = true;
                return Step::Stop;
            }
            return Step::Known(w);
        }
        self.parent.insert(w, Some(v));
        if self.oracle.is_target(w) {
            self.found_t = true;
            return Step::Stop;
        }
        Step::New(w)
    }

    fn outcome(&self, meters: MeterSnapshot) -> ExplorationOutcome {
        ExplorationOutcome {
            found_t: self.found_t,
            found_cycle: self.found_cycle,
            queries_used: self.used,
            discovered: self.parent.len() as u64,
            guessed_hits: 0,
            meters,
        }
    }
}

/// Frontier expansion; children of each vertex in uniformly random order, or in index order.
fn expand<'a, O: AdjacencyOracle, R: Rng>(oracle: &'a O, budget: u64, shuffle: bool, rng: &mut R) -> Walker<'a, O> {
    let d = oracle.degree();
    let mut w = Walker::new(oracle, budget);
    let mut frontier = VecDeque::from([oracle.start()]);
    while let Some(v) = frontier.pop_front() {
        let mut order: Vec<usize> = (1..=d).collect();
        if shuffle {
            order.shuffle(rng);
        }
        for k in order {
            if w.done() {
                return w;
            }
            match w.query(v, k) {
                Step::New(x) => frontier.push_back(x),
                Step::Known(_) => {}
                Step::Stop => return w,
            }
        }
    }
    w
}

fn random_walk<'a, O: AdjacencyOracle, R: Rng>(oracle: &'a O, budget: u64, rng: &mut R) -> Walker<'a, O> {
    let d = oracle.degree();
    let mut w = Walker::new(oracle, budget);
    let mut cur = oracle.start();
    while !w.done() {
        let k = rng.random_range(1..=d);
        match w.query(cur, k) {
            Step::New(x) | Step::Known(x) => cur = x,
            Step::Stop => break,
        }
    }
    w
}

/// One trial against any oracle.
pub fn explore<O: AdjacencyOracle, R: Rng>(oracle: &O, strategy: Strategy, budget: u64, rng: &mut R) -> ExplorationOutcome {
    let w = match strategy {
        Strategy::RandomEmbedding => expand(oracle, budget, true, rng),
        Strategy::BreadthFirst => expand(oracle, budget, false, rng),
        Strategy::RandomWalk => random_walk(oracle, budget, rng),
    };
    w.outcome(MeterSnapshot::default())
}

/// `cfg.trials` independent trials, each on its own meter session.
pub fn run_explorer(g: &SunflowerGraph, cfg: &ExplorerConfig) -> Vec<ExplorationOutcome> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let session = OracleSession::new(g);
            let mut rng = explorer_rng(cfg.seed, t);
            let mut out = explore(&session, cfg.strategy, cfg.budget, &mut rng);
            out.meters = session.finish();
            out
        })
        .collect()
}

/// Fraction of uniformly guessed labels whose first neighbor query is answered.
pub fn guess_hit_rate<O: AdjacencyOracle, R: Rng>(oracle: &O, guesses: u64, rng: &mut R) -> f64 {
    let space = 1u64 << oracle.label_bits();
    let floor = oracle.sentinel_floor();
    let hits = (0..guesses).filter(|_| oracle.neighbor(rng.random_range(0..space), 1) < floor).count();
    hits as f64 / guesses as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub strategy: String,
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub q: u64,
    pub trials: u64,
    pub successes: u64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub d: usize,
    pub c: f64,
    pub strategy: Strategy,
    pub trials: u64,
    pub seed: u64,
}

/// Lower-bound instance: m = n+1, N_aux = N_G².
pub fn lower_bound_params(d: usize, n: usize, seed: u64) -> Result<GraphParams, GraphError> {
    let base = GraphParams::new(d as u64, n as u64 + 1, n as u64, 0, seed)?;
    let g = base.graph_vertices();
    Ok(base.with_n_aux(g.saturating_mul(g))?)
}

pub fn estimate_success(cfg: &SweepConfig, ns: &[usize]) -> Result<Vec<RateRow>, GraphError> {
    ns.iter()
        .map(|&n| {
            let p = lower_bound_params(cfg.d, n, cfg.seed)?;
            let g = build_graph(p, Backend::Implicit)?;
            let q = budget_for(cfg.d, n, cfg.c);
            let ecfg = ExplorerConfig { strategy: cfg.strategy, budget: q, trials: cfg.trials, seed: cfg.seed };
            let successes = run_explorer(&g, &ecfg).iter().filter(|o| o.success()).count() as u64;
            let (lo, hi) = wilson(successes, cfg.trials, Z95);
            Ok(RateRow {
                strategy: cfg.strategy.name().to_string(),
                d: cfg.d,
                m: p.m(),
                n,
                q,
                trials: cfg.trials,
                successes,
                wilson_low: lo,
                wilson_high: hi,
            })
        })
        .collect()
}

/// Labels an explorer has legitimately seen: s plus every non-sentinel answer.
pub fn audit_visible(oracle_calls: &[(u64, u64)], start: u64, floor: u64) -> bool {
    let mut seen: HashSet<u64> = HashSet::from([start]);
    for &(query, answer) in oracle_calls {
        if !seen.contains(&query) {
            return false;
        }
        if answer < floor {
            seen.insert(answer);
        }
    }
    true
}
