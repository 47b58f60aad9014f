use contactlab::experiment::{generate, scan, train_nfis, train_som, ExperimentConfig, RuleTarget, ScanConfig};
use contactlab::geometry::{Block, ContactState};
use contactlab::pipeline::{evaluate, GeometricOracle, Scene, SomOnFeatures};
use contactlab::som::SomGrid;

#[test]
fn som_json_round_trip_keeps_predictions() {
    let cfg = ExperimentConfig::default();
    let scene = cfg.load_scene().unwrap();
    let g = generate(&scene, &cfg.dataset, 11).unwrap();
    let run = train_som(&g.dataset, &cfg.som, 11).unwrap();
    let json = serde_json::to_string(&run.grid).unwrap();
    let back: SomGrid = serde_json::from_str(&json).unwrap();
    assert_eq!(back, run.grid);
    let a = evaluate(&SomOnFeatures(&run.grid), &g.dataset.check).unwrap();
    let b = evaluate(&SomOnFeatures(&back), &g.dataset.check).unwrap();
    assert_eq!(a, b);
}

#[test]
fn oracle_is_perfect_on_generated_data() {
    let cfg = ExperimentConfig::default();
    let scene = cfg.load_scene().unwrap();
    let g = generate(&scene, &cfg.dataset, 3).unwrap();
    assert_eq!(evaluate(&GeometricOracle::default(), &g.dataset.train).unwrap().accuracy, 1.0);
    assert_eq!(evaluate(&GeometricOracle::default(), &g.dataset.check).unwrap().accuracy, 1.0);
}

/// Two pairs sliding edge to edge for the whole run: a single contact
/// state, which both surrogates learn exactly, so fusion never disagrees.
#[test]
fn single_state_scene_never_disagrees() {
    let blocks = vec![
        Block::rectangle(0, 0.0, 0.0, 3.0, 1.0).unwrap(),
        Block::rectangle(1, 0.0, 1.0, 1.0, 2.0).unwrap(),
        Block::rectangle(2, 6.0, 0.0, 9.0, 1.0).unwrap(),
        Block::rectangle(3, 6.0, 1.0, 7.0, 2.0).unwrap(),
    ];
    let scene = Scene::new(blocks, vec![[0.0, 0.0], [0.02, 0.0], [0.0, 0.0], [0.025, 0.0]], 80, 1.0)
        .unwrap()
        .with_pairs(vec![[0, 1], [2, 3]])
        .unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.som.epochs = 30;
    cfg.nfis.epochs = 5;
    let g = generate(&scene, &cfg.dataset, 1).unwrap();
    assert!(g.dataset.train.iter().all(|s| s.label == ContactState::EdgeEdge));
    let nfis = train_nfis(&g.dataset, &cfg.subclust, &cfg.nfis, RuleTarget::Count(4)).unwrap();
    assert_eq!(nfis.metrics.check_accuracy, 1.0);
    let som = train_som(&g.dataset, &cfg.som, 1).unwrap();
    let out = scan(&scene, &ScanConfig { windows: 25, ..ScanConfig::default() }, &som.grid, &nfis.model, 9).unwrap();
    assert_eq!(out.windows, 25);
    assert_eq!(out.disagreements, 0);
    for line in out.reports_csv.lines().skip(1) {
        assert!(line.ends_with(",false"), "{line}");
    }
}

#[test]
fn default_experiment_beats_chance_by_a_wide_margin() {
    let cfg = ExperimentConfig::default();
    let scene = cfg.load_scene().unwrap();
    for seed in [1, 2, 3] {
        let g = generate(&scene, &cfg.dataset, seed).unwrap();
        let run = train_nfis(&g.dataset, &cfg.subclust, &cfg.nfis, RuleTarget::Count(13)).unwrap();
        assert_eq!(run.model.rule_count(), 13);
        assert!(run.metrics.check_accuracy >= 0.8, "seed {seed}: {}", run.metrics.check_accuracy);
        let som = train_som(&g.dataset, &cfg.som, seed).unwrap();
        assert!(som.train.accuracy >= 0.8, "seed {seed}: {}", som.train.accuracy);
    }
}
