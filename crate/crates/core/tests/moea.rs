use proptest::prelude::*;
use uecn_core::deploy::{self, DeployOptions};
use uecn_core::model::{generate_scenario, Scenario, ScenarioConfig};
use uecn_core::moea::*;

fn point(x1: usize, f1: f64, f2: f64) -> Evaluation {
    Evaluation {
        x: DecisionVector { x1, x2: 1.0 },
        f: ObjectivePoint {
            f1,
            f2,
            feasible: true,
            constraint_violation: 0.0,
        },
    }
}

fn six_nodes(seed: u64, packet_bits: f64) -> Scenario {
    let cfg = ScenarioConfig {
        n_usns: 6,
        packet_size_bits: packet_bits,
        ..Default::default()
    };
    generate_scenario(&cfg, seed).unwrap()
}

// Non-dominated set of random points: sort by f1 and keep strict f2 records.
fn random_front(raw: &[(f64, f64)]) -> Vec<Evaluation> {
    let mut pts: Vec<(f64, f64)> = raw.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = Vec::new();
    let mut best = f64::INFINITY;
    for (i, (f1, f2)) in pts.into_iter().enumerate() {
        if f2 < best {
            best = f2;
            out.push(point(i + 1, f1, f2));
        }
    }
    out
}

#[test]
fn evaluation_matches_a_fresh_deployment() {
    for seed in 1..6 {
        let s = six_nodes(seed, 1e8);
        let c: Vec<usize> = (0..6).collect();
        for x1 in 1..=6 {
            let e = evaluate(&s, &c, DecisionVector { x1, x2: 2.5 }, &DeployOptions::default());
            let d = deploy::deploy(&s, &c, x1, 2.5, &DeployOptions::default()).unwrap();
            assert_eq!(e.x.x1, d.x1);
            assert_eq!(e.f.f1, d.makespan());
            assert_eq!(e.f.f2, d.total_energy());
            assert_eq!(e.f.feasible, d.feasible());
        }
    }
}

#[test]
fn moead_front_is_not_dominated_by_grid() {
    for seed in 1..4 {
        let s = six_nodes(seed, 1e8);
        let c: Vec<usize> = (0..6).collect();
        let levels = power_levels(16, s.links.max_power());
        let opts = DeployOptions::default();
        let grid = grid_evaluations(&s, &c, &levels, &opts);
        assert_eq!(grid.len(), 96);
        let cfg = MoeadConfig {
            x2_levels: Some(levels.clone()),
            ..Default::default()
        };
        let run = moead_run(&s, &c, &cfg, seed).unwrap();
        assert!(!run.archive.is_empty());
        assert!(run.archive.is_mutually_nondominated());
        for a in &run.archive.entries {
            let fa = a.f.as_array();
            assert!(!grid.iter().any(|g| g.f.feasible && dominates(&g.f.as_array(), &fa)));
        }
        let fa: Vec<[f64; 2]> = run.archive.entries.iter().map(|e| e.f.as_array()).collect();
        let fg: Vec<[f64; 2]> = pareto_filter(&grid).iter().map(|e| e.f.as_array()).collect();
        let r = hypervolume_reference(&[&fa, &fg]);
        assert!(hypervolume(&fa, r) >= 0.9 * hypervolume(&fg, r));
    }
}

// Reports how often adding AUVs fails to shorten the makespan at a fixed
// transmit power. Hover points on far singletons make this common, so the
// rate is printed rather than bounded.
#[test]
fn makespan_against_auv_count_report() {
    for packet_bits in [1e6, 1e8] {
        let (mut columns, mut violating) = (0, 0);
        for seed in 1..=5 {
            let s = six_nodes(seed, packet_bits);
            let c: Vec<usize> = (0..6).collect();
            let grid = grid_evaluations(&s, &c, &power_levels(8, s.links.max_power()), &DeployOptions::default());
            for j in 0..8 {
                let col: Vec<&Evaluation> = (0..6).map(|i| &grid[i * 8 + j]).collect();
                if !col.iter().all(|e| e.f.feasible) {
                    continue;
                }
                columns += 1;
                violating += col.windows(2).any(|w| w[1].f.f1 > w[0].f.f1 * (1.0 + 1e-12)) as usize;
            }
        }
        println!("packet {packet_bits:e} bits: {violating}/{columns} power columns with a makespan increase in x1");
        assert!(columns > 0);
    }
}

#[test]
fn energy_efficiency_matches_linear_scan() {
    let front = random_front(&[(300.0, 9e6), (280.0, 1.2e7), (350.0, 5e6), (420.0, 4.9e6), (260.0, 3e7)]);
    let pick = energy_efficiency_select(&front).unwrap();
    let mut best = &front[0];
    for e in &front[1..] {
        if e.f.f2 / e.f.f1 < best.f.f2 / best.f.f1 {
            best = e;
        }
    }
    assert_eq!(pick, *best);
}

proptest! {
    #[test]
    fn selections_ignore_entry_order(
        raw in prop::collection::vec((1.0f64..1e3, 1.0f64..1e7), 1..20),
        rot in 0usize..20,
    ) {
        let front = random_front(&raw);
        let mut shuffled = front.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        prop_assert_eq!(knee_select(&front), knee_select(&shuffled));
        prop_assert_eq!(energy_efficiency_select(&front), energy_efficiency_select(&shuffled));
    }

    #[test]
    fn selected_points_come_from_the_front(raw in prop::collection::vec((1.0f64..1e3, 1.0f64..1e7), 1..20)) {
        let front = random_front(&raw);
        prop_assert!(front.contains(&knee_select(&front).unwrap()));
        let ee = energy_efficiency_select(&front).unwrap();
        let ratio = ee.f.f2 / ee.f.f1;
        prop_assert!(front.iter().all(|e| e.f.f2 / e.f.f1 >= ratio));
    }

    #[test]
    fn archive_of_random_points_is_nondominated(raw in prop::collection::vec((1.0f64..1e3, 1.0f64..1e7), 0..40)) {
        let mut a = ParetoArchive::new(Vec::new());
        let pts: Vec<Evaluation> = raw.iter().enumerate().map(|(i, &(f1, f2))| point(i + 1, f1, f2)).collect();
        for p in &pts {
            a.offer(*p);
        }
        prop_assert!(a.is_mutually_nondominated());
        for p in &pts {
            let covered = a.entries.iter().any(|e| e.f.as_array() == p.f.as_array() || dominates(&e.f.as_array(), &p.f.as_array()));
            prop_assert!(covered);
        }
        let filtered = pareto_filter(&pts);
        prop_assert_eq!(filtered.len(), a.len());
    }

    #[test]
    fn hypervolume_grows_with_added_points(
        raw in prop::collection::vec((1.0f64..1e3, 1.0f64..1e3), 1..20),
        extra in (1.0f64..1e3, 1.0f64..1e3),
    ) {
        let pts: Vec<[f64; 2]> = raw.iter().map(|&(a, b)| [a, b]).collect();
        let mut more = pts.clone();
        more.push([extra.0, extra.1]);
        let r = [1100.0, 1100.0];
        prop_assert!(hypervolume(&more, r) >= hypervolume(&pts, r));
    }
}
