use std::path::PathBuf;

use share_core::graph::{InteractionGraph, LoadOptions, SocialGraph};
use share_core::homophily::graph_homophily;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn micro_fixture_matches_hand_values() {
    let r = InteractionGraph::load(&fixture("micro_interactions.txt"), LoadOptions::default()).unwrap();
    let s = SocialGraph::load(&fixture("micro_social.txt"), &r.user_index_map()).unwrap();
    assert_eq!((r.num_users(), r.num_items(), s.num_edges()), (6, 8, 7));

    let table = graph_homophily(&s, &r, 50);
    let id = |name: &str| r.user_index(name).unwrap();
    // u4 has no training items, so every edge touching it scores 0
    let expected = [
        ("u0", "u1", 2.0 / 4.0),
        ("u0", "u2", 0.0),
        ("u0", "u3", 3.0 / 4.0),
        ("u1", "u3", 3.0 / 4.0),
        ("u2", "u5", 1.0 / 4.0),
        ("u3", "u4", 0.0),
        ("u4", "u5", 0.0),
    ];
    for (a, b, h) in expected {
        let got = table.ratio(id(a), id(b)).unwrap();
        assert!((got - h).abs() < 1e-12, "{a}-{b}: {got} vs {h}");
    }
    assert!((table.graph_ratio - 2.25 / 7.0).abs() < 1e-12);
    assert_eq!(table.h_min, 0.0);
    assert_eq!(table.h_max, 0.75);
    assert_eq!(table.histogram.iter().map(|b| b.count).sum::<usize>(), 7);
}
