use sunflower::classical::{run_explorer, ExplorerConfig, Strategy};
use sunflower::graph::{build_graph, Backend, GraphArtifact};
use sunflower::qsim::{run_batch, Mode, QuantumSetup, SetupOptions};
use sunflower::GraphParams;

fn params() -> GraphParams {
    GraphParams::new(3, 5, 8, 0, 99).unwrap()
}

#[test]
fn batch_meters_reconcile_with_ledgers() {
    let g = build_graph(params(), Backend::Explicit).unwrap();
    let setup = QuantumSetup::new(params(), SetupOptions::default()).unwrap();
    let results = run_batch(&g, &setup, Mode::Ideal, 5, 64).unwrap();
    let summed: u64 = results.iter().map(|r| r.ledger.classical_actual_total).sum();
    let m = g.meters();
    assert_eq!(m.neighbor + m.multiplicity + m.indicator, summed);
    for r in &results {
        assert_eq!(r.ledger.actual.neighbor, 3 * r.unique_samples as u64);
        assert!(r.ledger.ft_queries <= 4 * setup.n_s as u64);
    }
}

#[test]
fn success_grows_with_sample_count() {
    let g = build_graph(params(), Backend::Explicit).unwrap();
    let mut rates = vec![];
    for n_s in [2usize, 6, 19, 60] {
        let setup = QuantumSetup::new(params(), SetupOptions { n_s: Some(n_s), ..SetupOptions::default() }).unwrap();
        let wins = run_batch(&g, &setup, Mode::Ideal, 3, 400).unwrap().iter().filter(|r| r.success).count();
        rates.push(wins);
    }
    assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
    assert!(rates[3] >= 390);
}

#[test]
fn backends_agree_on_structure_free_quantities() {
    for backend in [Backend::Explicit, Backend::Implicit] {
        let g = build_graph(params(), backend).unwrap();
        let setup = QuantumSetup::new(params(), SetupOptions::default()).unwrap();
        let r = run_batch(&g, &setup, Mode::Filtered, 1, 200).unwrap();
        let rate = r.iter().filter(|x| x.success).count() as f64 / 200.0;
        assert!(rate > 0.7, "{backend:?}: {rate}");
    }
}

#[test]
fn artifact_round_trip_keeps_oracle_answers() {
    let g = build_graph(params().with_n_aux(50).unwrap(), Backend::Explicit).unwrap();
    let json = GraphArtifact::from_graph(&g).to_json();
    let back = GraphArtifact::from_json(&json).unwrap().rebuild().unwrap();
    assert_eq!(back.s_label(), g.s_label());
    assert_eq!(back.t_label(), g.t_label());
    let cfg = ExplorerConfig { strategy: Strategy::BreadthFirst, budget: 500, trials: 3, seed: 2 };
    assert_eq!(run_explorer(&g, &cfg), run_explorer(&back, &cfg));
}
