//! Layout integration tests: crossing improvement statistics, occupancy,
//! sparseness, and termination bounds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qtopo_core::layout::{
    best_layout, count_crossings, count_crossings_f64, layout, LayoutParams, LayoutState,
};
use qtopo_core::topology::{make_grid, make_line, TopologyGraph};

fn random_degree4_graph(rng: &mut ChaCha8Rng, n: usize) -> TopologyGraph {
    let mut g = TopologyGraph::empty(n).unwrap();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let _ = g.add_edge(u, v);
    }
    for _ in 0..2 * n {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            let _ = g.add_edge(a, b);
        }
    }
    g
}

fn benchmark_graphs() -> Vec<(String, TopologyGraph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6EA9);
    let mut cycle8 = TopologyGraph::empty(8).unwrap();
    for v in 0..8 {
        cycle8.add_edge(v, (v + 1) % 8).unwrap();
    }
    vec![
        ("line10".into(), make_line(10)),
        ("grid3x3".into(), make_grid(3, 3)),
        ("cycle8".into(), cycle8),
        ("rand12".into(), random_degree4_graph(&mut rng, 12)),
        ("rand16".into(), random_degree4_graph(&mut rng, 16)),
    ]
}

fn median(mut values: Vec<usize>) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
    }
}

/// Median final crossings over 20 seeds must not exceed the median crossing
/// count of the seeded circular initial placements.
#[test]
fn relaxation_does_not_worsen_median_crossings() {
    let params = LayoutParams::default();
    for (name, g) in benchmark_graphs() {
        let edges = g.edges();
        let mut initial = Vec::new();
        let mut finals = Vec::new();
        for seed in 0..20 {
            let state = LayoutState::initial(&g, seed, params.clone());
            initial.push(count_crossings_f64(&state.positions, &edges));
            finals.push(layout(&g, seed, &params).crossing_count);
        }
        assert!(
            median(finals.clone()) <= median(initial.clone()),
            "{name}: final median {:?} vs initial median {:?}",
            median(finals),
            median(initial)
        );
    }
}

#[test]
fn occupancy_bijection_on_degree4_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEE);
    let g = random_degree4_graph(&mut rng, 24);
    for seed in 0..6 {
        let l = layout(&g, seed, &LayoutParams::default());
        let distinct: std::collections::HashSet<_> = l.coords.iter().collect();
        assert_eq!(distinct.len(), g.num_vertices(), "seed {seed}");
        assert_eq!(count_crossings(&l, &g), l.crossing_count);
    }
}

#[test]
fn termination_respects_iteration_budget() {
    let params = LayoutParams {
        max_iters: 120,
        ..LayoutParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x7E2);
    let g = random_degree4_graph(&mut rng, 30);
    let l = layout(&g, 3, &params);
    // two phases, each bounded by max_iters
    assert!(l.iterations_used <= 2 * params.max_iters);
    let distinct: std::collections::HashSet<_> = l.coords.iter().collect();
    assert_eq!(distinct.len(), 30);
}

/// Raising the repulsion multiplier spreads qubits farther apart on the grid.
#[test]
fn sparse_mode_increases_nearest_neighbor_distance() {
    let g = make_grid(3, 3);
    let mean_nn = |sparse: f64| -> f64 {
        let params = LayoutParams {
            sparse,
            ..LayoutParams::default()
        };
        let mut total = 0.0;
        let mut count = 0;
        for seed in 0..10 {
            let l = layout(&g, seed, &params);
            for (i, &(r1, c1)) in l.coords.iter().enumerate() {
                let nn = l
                    .coords
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &(r2, c2))| (((r1 - r2).pow(2) + (c1 - c2).pow(2)) as f64).sqrt())
                    .fold(f64::INFINITY, f64::min);
                total += nn;
                count += 1;
            }
        }
        total / count as f64
    };
    let dense = mean_nn(1.0);
    let sparse = mean_nn(3.0);
    assert!(
        sparse > dense,
        "sparse {sparse:.3} should exceed dense {dense:.3}"
    );
}

/// Multi-restart contract: the best of k seeds is at least as good as each
/// individual run.
#[test]
fn restarts_take_the_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = random_degree4_graph(&mut rng, 14);
    let params = LayoutParams::default();
    let seeds: Vec<u64> = (100..110).collect();
    let best = best_layout(&g, &seeds, &params);
    for &s in &seeds {
        assert!(best.crossing_count <= layout(&g, s, &params).crossing_count);
    }
}
