use crate::config::{ExpansionPart, RunConfig};
use crate::error::CliError;
use crate::output::emit;
use serde::Serialize;
use std::path::Path;
use std::time::Instant;
use sunflower::classical::{budget_for, estimate_success, SweepConfig};
use sunflower::expansion::{bipartite_check, default_sizes, expansion_report};
use sunflower::filtering::{apply_filter, filter_bound, robustness_bound, FilterSpec};
use sunflower::graph::{build_graph, supervertex_census, Backend, GraphArtifact, GraphError, SunflowerGraph};
use sunflower::qsim::{run_batch, QuantumSetup, SetupOptions};
use sunflower::spectral::spectral_gap;
use sunflower::stats::{wilson, Z95};
use sunflower::GraphParams;

fn params(cfg: &RunConfig) -> Result<GraphParams, CliError> {
    Ok(GraphParams::new(cfg.d, cfg.m, cfg.n, cfg.naux.unwrap_or(0), cfg.seed)?)
}

fn setup_options(cfg: &RunConfig) -> SetupOptions {
    SetupOptions { beta: cfg.beta, alpha: cfg.alpha, eps: cfg.eps, eps_prime: cfg.eps_prime, eps_a: cfg.eps_a, n_s: cfg.n_s }
}

/// Accepts a bare artifact or the envelope written by `generate`.
pub fn load_graph(path: &Path) -> Result<SunflowerGraph, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(CliError::ArtifactNotFound(path.display().to_string())),
        Err(e) => return Err(GraphError::Io(e).into()),
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| GraphError::Format(e.to_string()))?;
    let inner = value.get("artifact").map(|a| a.to_string()).unwrap_or(text);
    Ok(GraphArtifact::from_json(&inner)?.rebuild()?)
}

fn graph_for(cfg: &RunConfig) -> Result<SunflowerGraph, CliError> {
    match &cfg.graph {
        Some(p) => load_graph(p),
        None => Ok(build_graph(params(cfg)?, cfg.backend)?),
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    config: &'a RunConfig,
    artifact: serde_json::Value,
}

pub fn generate(cfg: &RunConfig) -> Result<(), CliError> {
    let g = build_graph(params(cfg)?, cfg.backend)?;
    let artifact: serde_json::Value =
        serde_json::from_str(&GraphArtifact::from_graph(&g).to_json()).expect("artifact serializes");
    let env = Envelope { schema_version: crate::output::RESULT_SCHEMA, config: cfg, artifact };
    let text = serde_json::to_string(&env).expect("envelope serializes");
    match &cfg.out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?,
        None => println!("{text}"),
    }
    let p = g.params();
    eprintln!(
        "graph: d={} m={} n={} vertices={} label_bits={} s={} t={}",
        p.d(),
        p.m(),
        p.n(),
        p.graph_vertices(),
        p.label_bits(),
        g.s_label(),
        g.t_label()
    );
    if let Ok(c) = supervertex_census(&g) {
        eprintln!("census: {} supervertex pairs, matches closed form: {}", c.rows().len(), c.matches_closed_form());
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumRow {
    l: usize,
    j: usize,
    mu: f64,
    lambda: f64,
    residual: f64,
}

#[derive(Serialize)]
struct SpectrumSummary {
    delta: f64,
    delta_m_n2: f64,
    zero_count: usize,
    start_overlap_sq: f64,
    max_dense_deviation: f64,
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let t0 = Instant::now();
    let p = params(cfg)?;
    let h = sunflower::hamiltonian::build_h(&p);
    let r = sunflower::spectral::factor_spectrum(&h);
    let rows: Vec<SpectrumRow> =
        r.pairs.iter().map(|e| SpectrumRow { l: e.l, j: e.j, mu: e.mu, lambda: e.lambda, residual: e.residual }).collect();
    let gap = spectral_gap(&r);
    let summary = SpectrumSummary {
        delta: gap.delta,
        delta_m_n2: gap.normalized,
        zero_count: r.zero_count,
        start_overlap_sq: r.start_overlap_sq(),
        max_dense_deviation: r.check_against_dense(&h).max_eigenvalue_deviation,
    };
    eprintln!("gap {:.6e}, zero modes {}, overlap² {:.6}", summary.delta, summary.zero_count, summary.start_overlap_sq);
    emit(cfg, &rows, &summary, t0.elapsed())
}

#[derive(Serialize)]
struct FilterRow {
    ell: usize,
    delta: f64,
    alpha: f64,
    bound: f64,
    error: f64,
    varsigma: f64,
}

#[derive(Serialize)]
struct FilterSummary {
    gap: f64,
    delta: f64,
    alpha: f64,
    chosen_ell: usize,
    eps: f64,
}

pub fn filter(cfg: &RunConfig) -> Result<(), CliError> {
    let t0 = Instant::now();
    let setup = QuantumSetup::new(params(cfg)?, setup_options(cfg))?;
    let target = setup.report.projected_start();
    let (delta, alpha) = (setup.spec.delta, setup.spec.alpha);
    let rows = (1..=cfg.ell_max)
        .map(|ell| {
            let spec = FilterSpec::with_degree(ell, delta, alpha)?;
            let v = apply_filter(&setup.h, &spec);
            let error = v.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            Ok(FilterRow { ell, delta, alpha, bound: filter_bound(ell, delta), error, varsigma: robustness_bound(ell, cfg.eps_a, alpha) })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let summary = FilterSummary { gap: setup.report.delta, delta, alpha, chosen_ell: setup.spec.ell, eps: setup.spec.eps };
    eprintln!("delta {:.6e}, chosen ell {} for eps {:.3e}", delta, summary.chosen_ell, summary.eps);
    emit(cfg, &rows, &summary, t0.elapsed())
}

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    success: bool,
    hops: usize,
    unique_samples: usize,
    neighbor: u64,
    multiplicity: u64,
    indicator: u64,
    state_prep: u64,
    quantum_model_total: u64,
    classical_actual_total: u64,
}

#[derive(Serialize)]
struct QuantumSummary {
    successes: u64,
    trials: u64,
    rate: f64,
    wilson_low: f64,
    wilson_high: f64,
    n_s: usize,
    filter_ell: usize,
    formula_ledger: sunflower::qsim::QueryLedger,
}

pub fn quantum(cfg: &RunConfig) -> Result<(), CliError> {
    let t0 = Instant::now();
    let g = graph_for(cfg)?;
    let setup = QuantumSetup::new(*g.params(), setup_options(cfg))?;
    let results = run_batch(&g, &setup, cfg.mode, cfg.seed, cfg.trials)?;
    let rows: Vec<TrialRow> = results
        .iter()
        .map(|r| TrialRow {
            trial: r.trial,
            success: r.success,
            hops: r.hops,
            unique_samples: r.unique_samples,
            neighbor: r.ledger.actual.neighbor,
            multiplicity: r.ledger.actual.multiplicity,
            indicator: r.ledger.actual.indicator,
            state_prep: r.ledger.state_prep,
            quantum_model_total: r.ledger.quantum_model_total,
            classical_actual_total: r.ledger.classical_actual_total,
        })
        .collect();
    let successes = results.iter().filter(|r| r.success).count() as u64;
    let (lo, hi) = wilson(successes, cfg.trials, Z95);
    let summary = QuantumSummary {
        successes,
        trials: cfg.trials,
        rate: successes as f64 / cfg.trials.max(1) as f64,
        wilson_low: lo,
        wilson_high: hi,
        n_s: setup.n_s,
        filter_ell: setup.spec.ell,
        formula_ledger: setup.formula_ledger(),
    };
    eprintln!("success {}/{} (95% interval {:.3}..{:.3}), N_s = {}", successes, cfg.trials, lo, hi, setup.n_s);
    emit(cfg, &rows, &summary, t0.elapsed())
}

fn sweep(cfg: &RunConfig) -> SweepConfig {
    SweepConfig { d: cfg.d as usize, c: cfg.budget_exponent, strategy: cfg.strategy, trials: cfg.trials, seed: cfg.seed }
}

pub fn classical(cfg: &RunConfig) -> Result<(), CliError> {
    let t0 = Instant::now();
    let rows = estimate_success(&sweep(cfg), &cfg.ns)?;
    for r in &rows {
        eprintln!("n={} q={} success {}/{}", r.n, r.q, r.successes, r.trials);
    }
    emit(cfg, &rows, &(), t0.elapsed())
}

#[derive(Serialize)]
struct ExpansionRow {
    d: usize,
    m: usize,
    n: usize,
    gap: f64,
    gap_polylog: f64,
    size: usize,
    samples: u64,
    min_ratio: f64,
    mean_ratio: f64,
}

#[derive(Serialize)]
struct BipartiteRow {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "D")]
    d: usize,
    draws: u64,
    delta: f64,
    pass_fraction_i: f64,
    pass_fraction_ii: Option<f64>,
    pass_fraction_i_strict: f64,
    pass_fraction_ii_strict: Option<f64>,
    wilson_low_i: f64,
    wilson_high_i: f64,
}

pub fn expansion(cfg: &RunConfig) -> Result<(), CliError> {
    let t0 = Instant::now();
    match cfg.part {
        ExpansionPart::Graph => {
            let g = graph_for(cfg)?;
            let sizes = cfg.sizes.clone().unwrap_or_else(|| default_sizes(g.params().graph_vertices()));
            let rep = expansion_report(&g, cfg.subsets, &sizes, cfg.seed)?;
            let rows: Vec<ExpansionRow> = rep
                .sizes
                .iter()
                .map(|s| ExpansionRow {
                    d: rep.d,
                    m: rep.m,
                    n: rep.n,
                    gap: rep.gap.gap,
                    gap_polylog: rep.gap.gap_polylog,
                    size: s.size,
                    samples: s.samples,
                    min_ratio: s.min_ratio,
                    mean_ratio: s.mean_ratio,
                })
                .collect();
            eprintln!("gap {:.6} ({:?}), min ratio {:.4}, guaranteed {}", rep.gap.gap, rep.gap.method, rep.min_ratio, rep.guaranteed);
            emit(cfg, &rows, &rep, t0.elapsed())
        }
        ExpansionPart::Bipartite => {
            let rows = cfg
                .bipartite_n
                .iter()
                .map(|&n| {
                    let s = bipartite_check(n, cfg.bipartite_d, cfg.draws, cfg.check, cfg.seed)?;
                    Ok(BipartiteRow {
                        n,
                        d: s.d,
                        draws: s.draws,
                        delta: s.delta,
                        pass_fraction_i: s.pass_fraction_i,
                        pass_fraction_ii: s.pass_fraction_ii,
                        pass_fraction_i_strict: s.pass_fraction_i_strict,
                        pass_fraction_ii_strict: s.pass_fraction_ii_strict,
                        wilson_low_i: s.wilson_i.0,
                        wilson_high_i: s.wilson_i.1,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            emit(cfg, &rows, &(), t0.elapsed())
        }
    }
}

#[derive(Serialize)]
struct SeparationRow {
    n: usize,
    m: usize,
    q: u64,
    classical_successes: u64,
    classical_rate: f64,
    classical_low: f64,
    classical_high: f64,
    /// (d−1)^{−(1/2−2c)n}, the lower-bound decay without its constant.
    classical_bound_scale: f64,
    quantum_successes: u64,
    quantum_rate: f64,
    quantum_low: f64,
    quantum_high: f64,
    quantum_model_total: u64,
}

/// Quantum runs use the implicit backend so that every n in the grid fits.
pub fn separation(cfg: &RunConfig) -> Result<(), CliError> {
    let t0 = Instant::now();
    let d = cfg.d as usize;
    let mut rows = vec![];
    for &n in &cfg.ns {
        let c = estimate_success(&sweep(cfg), &[n])?.remove(0);
        let p = GraphParams::new(cfg.d, n as u64 + 1, n as u64, 0, cfg.seed)?;
        let g = build_graph(p, Backend::Implicit)?;
        let setup = QuantumSetup::new(p, setup_options(cfg))?;
        let wins = run_batch(&g, &setup, cfg.mode, cfg.seed, cfg.trials)?.iter().filter(|r| r.success).count() as u64;
        let (qlo, qhi) = wilson(wins, cfg.trials, Z95);
        let q = budget_for(d, n, cfg.budget_exponent);
        rows.push(SeparationRow {
            n,
            m: n + 1,
            q,
            classical_successes: c.successes,
            classical_rate: c.successes as f64 / c.trials as f64,
            classical_low: c.wilson_low,
            classical_high: c.wilson_high,
            classical_bound_scale: (d as f64 - 1.0).powf(-(0.5 - 2.0 * cfg.budget_exponent) * n as f64),
            quantum_successes: wins,
            quantum_rate: wins as f64 / cfg.trials as f64,
            quantum_low: qlo,
            quantum_high: qhi,
            quantum_model_total: setup.formula_ledger().quantum_model_total,
        });
        eprintln!("n={n}: classical {}/{} with q={q}, quantum {}/{}", c.successes, c.trials, wins, cfg.trials);
    }
    emit(cfg, &rows, &(), t0.elapsed())
}
