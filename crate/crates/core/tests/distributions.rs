mod common;

use std::collections::HashMap;

use proptest::prelude::*;

use hypdiam_core::graph::{all_matchings, graph_diameter, is_connected, sample_configuration_model};
use hypdiam_core::harness::class_chi_square;
use hypdiam_core::peeling::{explore, phase_statistics, StepKind};
use hypdiam_core::seeds::derive_seed;
use hypdiam_core::stats::{chi_square, ks_two_sample};

use common::exact_class_probabilities;

#[test]
fn genus_two_matchings_are_uniform() {
    let all = all_matchings(6);
    let index: HashMap<Vec<u32>, usize> = all.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut counts = vec![0u64; 15];
    for t in 0..15_000 {
        let g = sample_configuration_model(2, derive_seed(11, 2, t)).unwrap();
        counts[index[g.matching()]] += 1;
    }
    let chi = chi_square(&counts, &[1000.0; 15]).unwrap();
    assert!(chi.p_value >= 1e-3, "p = {}", chi.p_value);
}

#[test]
fn peeling_matching_is_uniform_at_genus_three() {
    let probs = exact_class_probabilities(3);
    let observed: Vec<Vec<u8>> = (0..5000)
        .map(|t| {
            let trace = explore(3, derive_seed(12, 3, t), 2.0, 0.4, 3).unwrap();
            trace.final_graph().unwrap().canonical_adjacency().unwrap()
        })
        .collect();
    let p = class_chi_square(&probs, &observed).unwrap();
    assert!(p >= 1e-3, "p = {p}");
}

#[test]
fn peeling_graph_diameters_match_configuration_model() {
    let genus = 64;
    let peeled: Vec<f64> = (0..400)
        .filter_map(|t| {
            let trace = explore(genus, derive_seed(13, genus, t), 2.0, 0.4, 3).unwrap();
            graph_diameter(&trace.final_graph().unwrap()).map(f64::from)
        })
        .collect();
    let sampled: Vec<f64> = (0..400)
        .filter_map(|t| graph_diameter(&sample_configuration_model(genus, derive_seed(14, genus, t)).unwrap()).map(f64::from))
        .collect();
    let ks = ks_two_sample(&peeled, &sampled, 1e-3).unwrap();
    assert!(!ks.reject, "{ks:?}");
}

#[test]
fn genus_three_connectivity_rate() {
    let probs: f64 = all_matchings(12)
        .into_iter()
        .filter(|m| is_connected(&hypdiam_core::graph::PantsGraph::from_matching(3, m.clone()).unwrap()))
        .count() as f64
        / 10395.0;
    let hits = (0..4000)
        .filter(|&t| is_connected(&explore(3, derive_seed(15, 3, t), 2.0, 0.4, 3).unwrap().final_graph().unwrap()))
        .count() as f64;
    let sd = (4000.0 * probs * (1.0 - probs)).sqrt();
    assert!((hits - 4000.0 * probs).abs() <= 4.0 * sd, "{hits} vs {}", 4000.0 * probs);
}

#[test]
fn phase_one_events_are_rare_at_large_genus() {
    let report = phase_statistics(1026, 4.0 * 1025f64.ln().ln(), 0.4, 3, 200, 0).unwrap();
    assert_eq!(report.phase1_events, 0);
    assert!(report.phase1_bound < 1e-7);
    assert_eq!(report.phase2_events, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exploration_invariants(genus in 3u64..60, seed in any::<u64>(), ell in 1.0f64..8.0) {
        let t = explore(genus, seed, ell, 0.4, 3).unwrap();
        prop_assert_eq!(t.steps.len() as u64, 3 * genus - 3);
        prop_assert_eq!(*t.boundary_sizes.last().unwrap(), 0);
        prop_assert!(t.final_graph().is_ok());
        let step_bound = 2.0 * t.c_ell + ell / 4.0 + 1e-9;
        let mut clean = true;
        for (i, s) in t.steps.iter().enumerate() {
            clean &= !s.was_bad && s.kind == StepKind::Normal;
            if !clean {
                break;
            }
            prop_assert_eq!(t.boundary_sizes[i + 1], i + 4);
            prop_assert!(t.r_at[i + 1].unwrap() - t.r_at[i].unwrap() <= step_bound);
        }
        for r in t.r_at.iter().flatten() {
            prop_assert!(*r >= 0.0);
        }
        prop_assert!(t.r_at[0].unwrap() <= t.c_ell + ell / 4.0);
    }

    #[test]
    fn relabeling_preserves_graph_diameter(genus in 2u64..30, seed in any::<u64>(), shift in 0usize..100) {
        let g = sample_configuration_model(genus, seed).unwrap();
        let n = g.num_vertices();
        let perm: Vec<usize> = (0..n).map(|v| (v + shift) % n).collect();
        let rot: Vec<usize> = (0..n).map(|v| (v + shift) % 3).collect();
        let r = g.relabeled(&perm, &rot).unwrap();
        prop_assert_eq!(graph_diameter(&g), graph_diameter(&r));
    }
}
