mod common;

use common::*;
use hers_core::baseline::{lazy_greedy, lazy_greedy_segment};
use hers_core::hierarchy::{build_hierarchy, build_hierarchy_with, MergeHierarchy};
use hers_core::image_io::{self, Direction};
use hers_core::{affinity, AffinityMap, EdgeProbMap, Execution, LabelMap, PixelGraph};
use proptest::prelude::*;

fn arb_affinity() -> impl Strategy<Value = AffinityMap> {
    (1usize..10, 2usize..10).prop_flat_map(|(h, w)| {
        proptest::collection::vec(
            prop_oneof![Just(0.0f32), Just(1.0f32), 0.0f32..=1.0],
            8 * h * w,
        )
        .prop_filter_map("needs a positive in-frame value", move |data| {
            let map = AffinityMap::new(h, w, data).ok()?;
            map.as_slice().iter().any(|&v| v > 0.0).then_some(map)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hierarchy_is_deterministic_and_policy_independent(map in arb_affinity()) {
        let graph = PixelGraph::from_affinity(&map).unwrap();
        let (a, sa) = build_hierarchy_with(&graph, Execution::Sequential).unwrap();
        let (b, sb) = build_hierarchy_with(&graph, Execution::Parallel).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(sa, sb);
        prop_assert_eq!(a.to_bytes(), build_hierarchy(&graph).unwrap().to_bytes());
    }

    #[test]
    fn swapping_paired_channels_keeps_edge_weights(map in arb_affinity()) {
        // each directed value p -> q trades places with q -> p
        let (h, w) = (map.height(), map.width());
        let swapped = AffinityMap::from_fn(h, w, |r, c, d| {
            let (dr, dc) = d.offset();
            map.get((r as isize + dr) as usize, (c as isize + dc) as usize, d.mirror())
        }).unwrap();
        let g = PixelGraph::from_affinity(&map).unwrap();
        let gs = PixelGraph::from_affinity(&swapped).unwrap();
        for e in 0..g.edge_count() {
            prop_assert_eq!(g.weight(e), gs.weight(e));
        }
    }

    #[test]
    fn lazy_greedy_outputs_are_valid(map in arb_affinity(), frac in 0.0f64..=1.0) {
        let graph = PixelGraph::from_affinity(&map).unwrap();
        let n = graph.node_count();
        let k = 1 + ((n - 1) as f64 * frac) as usize;
        let out = lazy_greedy(&graph, k).unwrap();
        prop_assert_eq!(out.labels.k(), k);
        prop_assert_eq!(out.selected.len(), n - k);
        prop_assert!(is_dense(&out.labels));
        prop_assert!(labels_are_8_connected(&out.labels));
    }

    #[test]
    fn aff8_round_trip(map in arb_affinity()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.aff8");
        image_io::write_affinity(&map, &p).unwrap();
        prop_assert_eq!(image_io::read_affinity(&p).unwrap(), map);
    }

    #[test]
    fn label_files_are_always_dense(raw in proptest::collection::vec(0u16..40, 12), csv in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(if csv { "l.csv" } else { "l.pgm" });
        if csv {
            let text: String = raw
                .chunks(4)
                .map(|r| r.iter().map(u16::to_string).collect::<Vec<_>>().join(",") + "\n")
                .collect();
            std::fs::write(&p, text).unwrap();
        } else {
            let mut bytes = b"P5\n4 3\n65535\n".to_vec();
            for v in &raw {
                bytes.extend(v.to_be_bytes());
            }
            std::fs::write(&p, bytes).unwrap();
        }
        let m = image_io::read_labels(&p).unwrap();
        prop_assert!(is_dense(&m));
        prop_assert_eq!(m, LabelMap::from_raw(3, 4, &raw).unwrap());
    }
}

#[test]
fn both_solvers_span_at_k_one() {
    let image = synthetic_scene(20, 30, 11);
    let map = affinity::gaussian_affinity(&image, affinity::auto_sigma(&image));
    let graph = PixelGraph::from_affinity(&map).unwrap();
    let h = build_hierarchy(&graph).unwrap();
    assert_eq!(lazy_greedy_segment(&graph, 1).unwrap(), h.extract(1, 20, 30).unwrap());
}

#[test]
fn lazy_greedy_grows_a_dominant_region() {
    // Without a balancing term the greedy order favors edges next to already
    // heavy nodes, so its partitions are far less balanced than Borůvka's.
    let image = synthetic_scene(32, 32, 5);
    let map = affinity::gaussian_affinity(&image, affinity::auto_sigma(&image));
    let graph = PixelGraph::from_affinity(&map).unwrap();
    let largest = |m: &LabelMap| {
        let mut sizes = vec![0usize; m.k()];
        m.labels().iter().for_each(|&l| sizes[l as usize] += 1);
        *sizes.iter().max().unwrap()
    };
    let k = 64;
    let hers = build_hierarchy(&graph).unwrap().extract(k, 32, 32).unwrap();
    let lazy = lazy_greedy_segment(&graph, k).unwrap();
    assert!(largest(&lazy) > largest(&hers), "lazy {} vs hers {}", largest(&lazy), largest(&hers));
}

#[test]
fn edge_probabilities_steer_the_partition() {
    // Flat image: without boundary cues the split at k = 2 is arbitrary. A
    // vertical ridge of boundary probability makes it fall on the ridge.
    let (h, w) = (10, 12);
    let image = hers_core::RgbImage::from_fn(h, w, |_, _| [0.5; 3]).unwrap();
    let map = affinity::gaussian_affinity(&image, affinity::GaussianParams::new(0.1).unwrap());
    let probs = EdgeProbMap::new(
        h,
        w,
        (0..h * w).map(|i| if i % w == 5 || i % w == 6 { 1.0 } else { 0.0 }).collect(),
    )
    .unwrap();
    let steered = affinity::apply_edge_probs(&map, &probs, 1e-3).unwrap();
    assert!(steered.get(0, 5, Direction::E) < steered.get(0, 0, Direction::E));
    let hier = build_hierarchy(&PixelGraph::from_affinity(&steered).unwrap()).unwrap();
    let seg = hier.extract(2, h, w).unwrap();
    let left = seg.get(0, 0);
    for r in 0..h {
        for c in 0..w {
            let expect_left = c <= 5;
            assert_eq!(seg.get(r, c) == left, expect_left, "pixel ({r}, {c})");
        }
    }
}

#[test]
fn hierarchy_survives_file_round_trip() {
    let image = synthetic_scene(16, 24, 2);
    let map = affinity::gaussian_affinity(&image, affinity::auto_sigma(&image));
    let h = build_hierarchy(&PixelGraph::from_affinity(&map).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("h.hrs1");
    hers_core::hierarchy::write_hierarchy(&h, &p).unwrap();
    let back: MergeHierarchy = hers_core::hierarchy::read_hierarchy(&p).unwrap();
    for k in [1, 5, 50, 384] {
        assert_eq!(back.extract(k, 16, 24).unwrap(), h.extract(k, 16, 24).unwrap());
    }
}
