use contactlab::anfis::{GaussianMf, TskModel, TskRule};
use contactlab::geometry::{classify_contact, min_separation, Block, ContactState, Point, DEFAULT_TOL};
use contactlab::pipeline::{extract_features, gravity_features, simulate, Scene};
use contactlab::scaling::Standardization;
use contactlab::som::{SomGrid, SomSchedule};
use proptest::prelude::*;

/// Convex quad from four sorted angles on an ellipse, shifted by `offset`.
fn quad(id: i64, angles: [f64; 4], ra: f64, rb: f64, offset: (f64, f64)) -> Option<Block> {
    let mut a = angles;
    a.sort_by(f64::total_cmp);
    let pts: Vec<Point> = a.iter().map(|&t| Point::new(offset.0 + ra * t.cos(), offset.1 + rb * t.sin())).collect();
    Block::new(id, pts).ok()
}

fn quad_strategy(id: i64) -> impl Strategy<Value = Block> {
    (prop::array::uniform4(0.0..std::f64::consts::TAU), 0.3..2.0f64, 0.3..2.0f64, (-6.0..6.0f64, -6.0..6.0f64))
        .prop_filter_map("degenerate quad", move |(angles, ra, rb, off)| quad(id, angles, ra, rb, off))
}

fn rule_strategy(d: usize) -> impl Strategy<Value = TskRule> {
    (prop::collection::vec((-3.0..3.0f64, 0.2..3.0f64), d), prop::collection::vec(-5.0..5.0f64, d + 1)).prop_map(
        |(mfs, p)| {
            let mfs = mfs.into_iter().map(|(c, s)| GaussianMf::new(c, s).unwrap()).collect();
            TskRule::new(mfs, p).unwrap()
        },
    )
}

fn model_strategy() -> impl Strategy<Value = (TskModel, Vec<f64>)> {
    (1usize..5).prop_flat_map(|d| {
        (prop::collection::vec(rule_strategy(d), 1..8), prop::collection::vec(-10.0..10.0f64, d))
            .prop_map(|(rules, x)| (TskModel::new(rules).unwrap(), x))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn contact_is_symmetric(a in quad_strategy(0), b in quad_strategy(1)) {
        let ab = classify_contact(&a, &b, DEFAULT_TOL);
        let ba = classify_contact(&b, &a, DEFAULT_TOL);
        prop_assert_eq!(ab.is_ok(), ba.is_ok());
        if let (Ok(x), Ok(y)) = (ab, ba) {
            prop_assert_eq!(x, y);
        }
        prop_assert!((min_separation(&a, &b) - min_separation(&b, &a)).abs() < 1e-12);
    }

    #[test]
    fn separated_pairs_stay_separated_under_rigid_motion(
        a in quad_strategy(0),
        b in quad_strategy(1),
        angle in 0.0..std::f64::consts::TAU,
        dx in -50.0..50.0f64,
        dy in -50.0..50.0f64,
    ) {
        let sep = min_separation(&a, &b);
        prop_assume!(sep > 1e-3);
        let off = Point::new(dx, dy);
        let (ta, tb) = (a.transformed(angle, off), b.transformed(angle, off));
        prop_assert!((min_separation(&ta, &tb) - sep).abs() < 1e-9);
        prop_assert_eq!(classify_contact(&ta, &tb, DEFAULT_TOL), Ok(ContactState::None));
    }

    #[test]
    fn stacked_rectangles_touch_edge_to_edge(
        x0 in -5.0..5.0f64, w in 0.5..3.0f64, h in 0.5..3.0f64, shift in -0.4..0.4f64,
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let a = Block::rectangle(0, x0, 0.0, x0 + w, h).unwrap();
        let b = Block::rectangle(1, x0 + shift * w, h, x0 + (1.0 + shift) * w, 2.0 * h).unwrap();
        prop_assert_eq!(classify_contact(&a, &b, DEFAULT_TOL), Ok(ContactState::EdgeEdge));
        let o = Point::new(1.0, -2.0);
        prop_assert_eq!(
            classify_contact(&a.transformed(angle, o), &b.transformed(angle, o), DEFAULT_TOL),
            Ok(ContactState::EdgeEdge)
        );
    }

    #[test]
    fn output_is_a_convex_combination((model, x) in model_strategy()) {
        let y = model.infer(&x).unwrap();
        let fs: Vec<f64> = model.rules().iter().map(|r| r.consequent_eval(&x).unwrap()).collect();
        let lo = fs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = 1e-12 * (lo.abs() + hi.abs() + 1.0);
        prop_assert!(y >= lo - slack && y <= hi + slack, "{} not in [{}, {}]", y, lo, hi);
    }

    #[test]
    fn model_json_round_trip((model, x) in model_strategy()) {
        let json = serde_json::to_string(&model).unwrap();
        let back: TskModel = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.infer(&x).unwrap().to_bits(), model.infer(&x).unwrap().to_bits());
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn block_json_round_trip(a in quad_strategy(3)) {
        let json = serde_json::to_string(&a).unwrap();
        let back: Block = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn standardization_inverts(rows in prop::collection::vec(prop::collection::vec(-100.0..100.0f64, 3), 2..20)) {
        let s = Standardization::fit(&rows);
        for r in &rows {
            let back = s.invert(&s.apply(r));
            for (u, v) in back.iter().zip(r) {
                prop_assert!((u - v).abs() <= 1e-9 * (1.0 + v.abs()));
            }
        }
    }

    #[test]
    fn som_weights_stay_in_data_box(
        data in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 4..30),
        seed in any::<u64>(),
    ) {
        let mut grid = SomGrid::random_init(3, 3, &data, seed).unwrap();
        grid.train(&data, &SomSchedule::for_grid(3, 3, 20), seed ^ 1).unwrap();
        for k in 0..2 {
            let lo = data.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
            let hi = data.iter().map(|x| x[k]).fold(f64::NEG_INFINITY, f64::max);
            for w in grid.weights() {
                prop_assert!(w[k] >= lo - 1e-12 && w[k] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn gravity_features_are_centroids(a in quad_strategy(0), b in quad_strategy(1)) {
        let g = gravity_features(&extract_features(&a, &b).unwrap()).unwrap();
        let (ca, cb) = (a.centroid(), b.centroid());
        for (u, v) in g.iter().zip([ca.x, ca.y, cb.x, cb.y]) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }
}

#[test]
fn reversed_scene_retraces_its_path() {
    let a = Block::rectangle(0, 0.0, 0.0, 2.0, 1.0).unwrap();
    let b = Block::rectangle(1, -1.5, 1.0, -0.5, 2.0).unwrap();
    let scene = Scene::new(vec![a, b], vec![[0.0, 0.0], [0.07, 0.0]], 30, 0.5).unwrap();
    let forward = simulate(&scene).unwrap();
    let last = scene.steps - 1;
    let back = simulate(&scene.reversed_from(last)).unwrap();
    for k in 0..scene.steps {
        let (f, r) = (&forward.frames[last - k], &back.frames[k]);
        for (x, y) in f.blocks.iter().zip(&r.blocks) {
            for (p, q) in x.vertices().iter().zip(y.vertices()) {
                assert!(p.distance(*q) < 1e-9, "frame {k}: {p:?} vs {q:?}");
            }
        }
        assert_eq!(f.states, r.states, "frame {k}");
    }
}

#[test]
fn interpenetration_is_reported() {
    let a = Block::rectangle(0, 0.0, 0.0, 1.0, 1.0).unwrap();
    let b = Block::rectangle(1, 0.5, 0.5, 1.5, 1.5).unwrap();
    assert!(classify_contact(&a, &b, DEFAULT_TOL).is_err());
}
