//! The sampling-based quantum pathfinding algorithm at the matrix-polynomial level.
//!
//! The prepared state lives in the symmetric subspace, so its measurement
//! distribution is a mass per supervertex, uniform over members. Sampling is
//! done from that distribution; every classical step afterwards (neighbor
//! expansion, f_t, BFS, path check) goes through a metered oracle session.
//! Quantum query counts come from the cost model in [`query_cost`].

use crate::filtering::{apply_filter, robustness_bound, FilterError, FilterSpec};
use crate::graph::permute::derive_key;
use crate::graph::{AdjacencyOracle, Coord, GraphError, MeterSnapshot, OracleSession, SunflowerGraph};
use crate::hamiltonian::{build_h, EffectiveHamiltonian};
use crate::params::GraphParams;
use crate::spectral::{factor_spectrum, psi1_squared, SpectrumReport};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::str::FromStr;

const TAG_TRIAL: u64 = 0x54_5249_414c;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("no mass on some odd-indexed root; N_s is unbounded")]
    DegenerateDistribution,
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph and setup disagree on (d, m, n)")]
    Mismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    Filtered,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ideal" => Ok(Mode::Ideal),
            "filtered" => Ok(Mode::Filtered),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementDistribution {
    pub mode: Mode,
    n: usize,
    sizes: Vec<u64>,
    /// Mass per supervertex, index `layer * n + tree`; sums to 1.
    pub probs: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl MeasurementDistribution {
    pub fn from_amplitudes(mode: Mode, params: &GraphParams, amps: &[f64]) -> Result<Self, SimError> {
        let total: f64 = amps.iter().map(|a| a * a).sum();
        let probs: Vec<f64> = amps.iter().map(|a| a * a / total).collect();
        let sampler = WeightedIndex::new(&probs).map_err(|_| SimError::DegenerateDistribution)?;
        Ok(MeasurementDistribution {
            mode,
            n: params.n(),
            sizes: (0..params.m()).map(|j| params.layer_size(j)).collect(),
            probs,
            sampler,
        })
    }

    /// Min mass over roots of odd (1-based) trees.
    pub fn p_min(&self) -> f64 {
        (0..self.n).step_by(2).map(|i| self.probs[i]).fold(f64::INFINITY, f64::min)
    }

    pub fn sample_coord<R: Rng>(&self, rng: &mut R) -> Coord {
        let sv = self.sampler.sample(rng);
        let layer = sv / self.n;
        let member = rng.random_range(0..self.sizes[layer]);
        Coord { tree: sv % self.n, layer, member }
    }

    pub fn sample_vertex<R: Rng>(&self, g: &SunflowerGraph, rng: &mut R) -> u64 {
        g.label_at(self.sample_coord(rng))
    }

    pub fn total_variation(&self, other: &MeasurementDistribution) -> f64 {
        0.5 * self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// N_s = ⌈ln(n/(2β)) / (−ln(1 − p_min))⌉.
pub fn choose_ns(dist: &MeasurementDistribution, beta: f64) -> Result<usize, SimError> {
    let p = dist.p_min();
    if !(p > 0.0) {
        return Err(SimError::DegenerateDistribution);
    }
    let num = (dist.n as f64 / (2.0 * beta)).ln();
    Ok(((num / -(-p).ln_1p()).ceil() as usize).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    /// Adjacency-list queries per use of the block encoding.
    pub c_be: u64,
    /// 2ℓ.
    pub filter_degree: u64,
    pub r_aa: u64,
    pub n_s: u64,
    /// N_s · R_AA · 2ℓ · c_BE.
    pub state_prep: u64,
    /// d · N_s.
    pub neighbor_expansion: u64,
    /// Exact count in a run; the (d+1)·N_s bound in a formula ledger.
    pub ft_queries: u64,
    pub quantum_model_total: u64,
    /// Oracle calls actually made in a run; zero in a formula ledger.
    pub actual: MeterSnapshot,
    pub classical_actual_total: u64,
    pub eps: f64,
    pub eps_prime: f64,
    pub eps_a: f64,
    pub varsigma: f64,
}

/// ‖Π₀ e_s‖ from the closed form |Ψ₁|²·2/n.
pub fn start_overlap(d: usize, m: usize, n: usize) -> f64 {
    (psi1_squared(d, m) * 2.0 / n as f64).sqrt()
}

/// Formula-side ledger; f_t is charged at its (d+1)·N_s bound.
pub fn query_cost(params: &GraphParams, spec: &FilterSpec, n_s: usize) -> QueryLedger {
    let d = params.d() as u64;
    let overlap = start_overlap(params.d(), params.m(), params.n());
    let mut l = ledger_skeleton(d, spec, n_s, overlap);
    l.ft_queries = (d + 1) * n_s as u64;
    l.quantum_model_total = l.state_prep + l.neighbor_expansion + l.ft_queries;
    l
}

fn ledger_skeleton(d: u64, spec: &FilterSpec, n_s: usize, overlap: f64) -> QueryLedger {
    let c_be = 2 * d + 3;
    let r_aa = ((2.0 / spec.eps_prime).ln() / overlap).ceil() as u64;
    let filter_degree = 2 * spec.ell as u64;
    let n_s = n_s as u64;
    QueryLedger {
        c_be,
        filter_degree,
        r_aa,
        n_s,
        state_prep: n_s * r_aa * filter_degree * c_be,
        neighbor_expansion: d * n_s,
        ft_queries: 0,
        quantum_model_total: 0,
        actual: MeterSnapshot::default(),
        classical_actual_total: 0,
        eps: spec.eps,
        eps_prime: spec.eps_prime,
        eps_a: spec.eps_a,
        varsigma: robustness_bound(spec.ell, spec.eps_a, spec.alpha),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetupOptions {
    /// Failure budget; success is targeted at 1 − β.
    pub beta: f64,
    /// Defaults to d².
    pub alpha: Option<f64>,
    /// Defaults to p_min·‖Π₀e_s‖/4.
    pub eps: Option<f64>,
    /// Defaults to 1/(4mn).
    pub eps_prime: Option<f64>,
    pub eps_a: f64,
    /// Overrides the union-bound sample count.
    pub n_s: Option<usize>,
}

impl Default for SetupOptions {
    fn default() -> Self {
        SetupOptions { beta: 1.0 / 3.0, alpha: None, eps: None, eps_prime: None, eps_a: 1e-9, n_s: None }
    }
}

/// Everything a batch of trials shares.
#[derive(Debug, Clone)]
pub struct QuantumSetup {
    pub params: GraphParams,
    pub h: EffectiveHamiltonian,
    pub report: SpectrumReport,
    pub spec: FilterSpec,
    pub ideal: MeasurementDistribution,
    pub filtered: MeasurementDistribution,
    pub n_s: usize,
    pub options: SetupOptions,
}

impl QuantumSetup {
    pub fn new(params: GraphParams, options: SetupOptions) -> Result<Self, SimError> {
        let h = build_h(&params);
        let report = factor_spectrum(&h);
        let (d, m, n) = (params.d(), params.m(), params.n());
        let alpha = options.alpha.unwrap_or((d * d) as f64);
        let overlap = start_overlap(d, m, n);
        let ideal = MeasurementDistribution::from_amplitudes(Mode::Ideal, &params, &report.modes.eta_odd)?;
        let p_min = ideal.p_min();
        let eps = options.eps.unwrap_or(p_min * overlap / 4.0);
        let eps_prime = options.eps_prime.unwrap_or(1.0 / (4.0 * (m * n) as f64));
        let spec = FilterSpec::for_gap(report.delta, alpha, eps, options.eps_a, eps_prime)?;
        let filtered = MeasurementDistribution::from_amplitudes(Mode::Filtered, &params, &apply_filter(&h, &spec))?;
        let n_s = match options.n_s {
            Some(k) => k,
            None => choose_ns(&ideal, options.beta)?,
        };
        Ok(QuantumSetup { params, h, report, spec, ideal, filtered, n_s, options })
    }

    pub fn distribution(&self, mode: Mode) -> &MeasurementDistribution {
        match mode {
            Mode::Ideal => &self.ideal,
            Mode::Filtered => &self.filtered,
        }
    }

    pub fn formula_ledger(&self) -> QueryLedger {
        query_cost(&self.params, &self.spec, self.n_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    pub success: bool,
    pub path: Vec<u64>,
    pub hops: usize,
    pub ledger: QueryLedger,
    pub seed: u64,
    pub trial: u64,
    pub unique_samples: usize,
}

/// Per-trial stream of the batch generator.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, &[TAG_TRIAL]));
    rng.set_stream(trial);
    rng
}

fn bfs_path(adj: &BTreeMap<u64, BTreeSet<u64>>, s: u64, t: u64) -> Option<Vec<u64>> {
    if !adj.contains_key(&s) {
        return None;
    }
    let mut parent: BTreeMap<u64, u64> = BTreeMap::new();
    let mut queue = VecDeque::from([s]);
    parent.insert(s, s);
    while let Some(v) = queue.pop_front() {
        if v == t {
            let mut path = vec![t];
            let mut cur = t;
            while cur != s {
                cur = parent[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[&v] {
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(v);
                queue.push_back(w);
            }
        }
    }
    None
}

/// One execution of the algorithm against `g`.
pub fn run_algorithm1(
    g: &SunflowerGraph,
    setup: &QuantumSetup,
    mode: Mode,
    seed: u64,
    trial: u64,
) -> Result<PathResult, SimError> {
    let p = g.params();
    if (p.d(), p.m(), p.n()) != (setup.params.d(), setup.params.m(), setup.params.n()) {
        return Err(SimError::Mismatch);
    }
    let d = p.d();
    let mut rng = trial_rng(seed, trial);
    let dist = setup.distribution(mode);
    let samples: BTreeSet<u64> = (0..setup.n_s).map(|_| dist.sample_vertex(g, &mut rng)).collect();

    let session = OracleSession::new(g);
    let floor = session.sentinel_floor();
    let mut adj: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for &v in &samples {
        adj.entry(v).or_default();
        for k in 1..=d {
            let w = session.neighbor(v, k);
            if w < floor {
                adj.entry(v).or_default().insert(w);
                adj.entry(w).or_default().insert(v);
            }
        }
    }
    let target = adj.keys().copied().find(|&v| session.is_target(v));
    let path = target.and_then(|t| bfs_path(&adj, session.start(), t)).unwrap_or_default();
    let verified = !path.is_empty() && path.windows(2).all(|w| session.multiplicity(w[0], w[1]) >= 1);
    let actual = session.finish();

    let overlap = start_overlap(p.d(), p.m(), p.n());
    let mut ledger = ledger_skeleton(d as u64, &setup.spec, setup.n_s, overlap);
    ledger.ft_queries = actual.indicator;
    ledger.quantum_model_total = ledger.state_prep + ledger.neighbor_expansion + ledger.ft_queries;
    ledger.actual = actual;
    ledger.classical_actual_total = actual.neighbor + actual.multiplicity + actual.indicator;
    let (success, path) = if verified { (true, path) } else { (false, Vec::new()) };
    Ok(PathResult {
        success,
        hops: path.len().saturating_sub(1),
        path,
        ledger,
        seed,
        trial,
        unique_samples: samples.len(),
    })
}

/// Trials `0..trials` in parallel; results in trial order.
pub fn run_batch(
    g: &SunflowerGraph,
    setup: &QuantumSetup,
    mode: Mode,
    seed: u64,
    trials: u64,
) -> Result<Vec<PathResult>, SimError> {
    (0..trials).into_par_iter().map(|t| run_algorithm1(g, setup, mode, seed, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, Backend, LabelKind};

    fn setup(d: u64, m: u64, n: u64) -> (GraphParams, QuantumSetup) {
        let p = GraphParams::new(d, m, n, 0, 21).unwrap();
        (p, QuantumSetup::new(p, SetupOptions::default()).unwrap())
    }

    #[test]
    fn ideal_distribution_values() {
        let (_, s) = setup(3, 5, 8);
        let total: f64 = s.ideal.probs.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        for i in 0..8 {
            if i % 2 == 0 {
                assert!((s.ideal.probs[i] - 0.125).abs() < 1e-15);
            } else {
                assert_eq!(s.ideal.probs[i], 0.0);
            }
        }
        assert_eq!(choose_ns(&s.ideal, 1.0 / 3.0).unwrap(), 19);
        assert_eq!(s.n_s, 19);
    }

    #[test]
    fn ns_grows_as_beta_shrinks() {
        let (_, s) = setup(3, 5, 8);
        let a = choose_ns(&s.ideal, 0.1).unwrap();
        let b = choose_ns(&s.ideal, 1e-6).unwrap();
        assert!(b > a && a > 19);
    }

    #[test]
    fn degenerate_distribution_rejected() {
        let p = GraphParams::new(3, 5, 8, 0, 0).unwrap();
        let mut amps = vec![0.0; 40];
        amps[1] = 1.0;
        let d = MeasurementDistribution::from_amplitudes(Mode::Ideal, &p, &amps).unwrap();
        assert!(matches!(choose_ns(&d, 0.3), Err(SimError::DegenerateDistribution)));
    }

    #[test]
    fn empirical_root_frequencies() {
        let (p, s) = setup(3, 5, 8);
        let g = build_graph(p, Backend::Implicit).unwrap();
        let mut rng = trial_rng(3, 0);
        let draws = 100_000;
        let mut hits = [0u64; 8];
        for _ in 0..draws {
            let LabelKind::Vertex(v) = g.classify(s.ideal.sample_vertex(&g, &mut rng)) else { panic!() };
            let c = g.coord_of(v);
            if c.layer == 0 {
                hits[c.tree] += 1;
            }
        }
        for (i, &h) in hits.iter().enumerate() {
            let pr = s.ideal.probs[i];
            let sigma = (draws as f64 * pr * (1.0 - pr)).sqrt();
            assert!((h as f64 - draws as f64 * pr).abs() <= 3.0 * sigma + 1e-9);
        }
    }

    #[test]
    fn formula_ledger_arithmetic() {
        let (p, s) = setup(3, 5, 8);
        let l = s.formula_ledger();
        assert_eq!(l.c_be, 9);
        let r_aa = ((2.0 * 160.0f64).ln() / 0.125f64.sqrt()).ceil() as u64;
        assert_eq!(l.r_aa, r_aa);
        assert_eq!(l.state_prep, 19 * r_aa * 2 * s.spec.ell as u64 * 9);
        assert_eq!(l.quantum_model_total, l.state_prep + 3 * 19 + 4 * 19);
        assert_eq!(query_cost(&p, &s.spec, 19), l);
    }

    #[test]
    fn trial_is_deterministic_and_metered() {
        let (p, s) = setup(3, 5, 8);
        let g = build_graph(p, Backend::Explicit).unwrap();
        let a = run_algorithm1(&g, &s, Mode::Ideal, 5, 3).unwrap();
        assert_eq!(g.meters(), a.ledger.actual);
        let b = run_algorithm1(&g, &s, Mode::Ideal, 5, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ledger.actual.neighbor, 3 * a.unique_samples as u64);
        if a.success {
            assert_eq!(a.path[0], g.s_label());
            assert_eq!(*a.path.last().unwrap(), g.t_label());
        }
    }

    #[test]
    fn filtered_close_to_ideal() {
        let (_, s) = setup(3, 5, 8);
        let overlap = start_overlap(3, 5, 8);
        let tv = s.filtered.total_variation(&s.ideal);
        assert!(tv <= 2.0 * s.spec.bound() / overlap);
    }

    #[test]
    fn bfs_prefers_short_paths() {
        let mut adj: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for (a, b) in [(1, 2), (2, 3), (3, 4), (1, 5), (5, 4)] {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        assert_eq!(bfs_path(&adj, 1, 4).unwrap(), vec![1, 5, 4]);
        assert!(bfs_path(&adj, 9, 4).is_none());
    }
}
