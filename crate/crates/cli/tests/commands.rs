mod common;

use std::fs;

use common::*;
use share_cli::commands::*;
use share_core::trainer::Strategy;

#[test]
fn analyze_fixture_matches_hand_values() {
    let dir = tempfile::tempdir().unwrap();
    let s = settings(&[]);
    let r = cmd_analyze(&fixture("micro_interactions.txt"), &fixture("micro_social.txt"), &s, dir.path()).unwrap();
    assert_eq!((r.users, r.items, r.social_edges, r.relations), (6, 8, 7, 14));
    assert!((r.graph_homophily - 2.25 / 7.0).abs() < 1e-12);
    assert_eq!((r.h_min, r.h_max), (0.0, 0.75));

    let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 1 + 50);
    let edges = fs::read_to_string(dir.path().join("edge_homophily.csv")).unwrap();
    assert!(edges.lines().any(|l| l == "u0,u3,0.75"));
    assert!(dir.path().join("manifest.txt").exists());
}

#[test]
fn analyze_rejects_empty_social() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    fs::write(&empty, "# nobody\nghost1 ghost2\n").unwrap();
    let err = cmd_analyze(&fixture("micro_interactions.txt"), &empty, &settings(&[]), &dir.path().join("o"));
    assert!(err.is_err());
}

#[test]
fn synth_targets_verified_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let (ri, si) = small_source(dir.path());
    let s = quick(&[("targets", "0,0.05,0.1,0.2,0.99")]);
    let a = cmd_synth(&ri, Some(&si), &s, &dir.path().join("a")).unwrap();
    assert_eq!(a.rows.len(), 4);
    assert_eq!(a.failures.len(), 1);
    assert_eq!(a.failures[0].0, 0.99);
    assert_eq!(a.rows[0].achieved, 0.0);
    for r in &a.rows {
        assert!((r.verified - r.target).abs() <= 0.02, "{r:?}");
        assert!((r.verified - r.achieved).abs() < 1e-12);
        assert!((50..=60).contains(&r.users));
    }
    let csv = fs::read_to_string(dir.path().join("a/synth.csv")).unwrap();
    assert!(csv.contains("0.99,unreachable"));

    let b = cmd_synth(&ri, Some(&si), &s, &dir.path().join("b")).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(fs::read(&x.social).unwrap(), fs::read(&y.social).unwrap());
        assert_eq!(fs::read(&x.interactions).unwrap(), fs::read(&y.interactions).unwrap());
    }
}

#[test]
fn sweep_grid_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    let (ri, si) = small_source(dir.path());
    let s = quick(&[("targets", "0.05,0.1,0.2,0.4"), ("strategies", "vanilla,share"), ("repeats", "3")]);
    let rows = cmd_sweep(&ri, Some(&si), &s, &dir.path().join("sweep")).unwrap();
    assert_eq!(rows.len(), 24);
    let csv = fs::read_to_string(dir.path().join("sweep/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 24);
    let summary = fs::read_to_string(dir.path().join("sweep/sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 8);
    assert_eq!(rows.iter().filter(|r| r.strategy == Strategy::Vanilla).count(), 12);
}

#[test]
fn sweep_parallel_cells_match_sequential() {
    let dir = tempfile::tempdir().unwrap();
    let (ri, si) = small_source(dir.path());
    let seq = quick(&[("targets", "0.1"), ("strategies", "share"), ("repeats", "2")]);
    let par = quick(&[("targets", "0.1"), ("strategies", "share"), ("repeats", "2"), ("parallel_cells", "2")]);
    let a = cmd_sweep(&ri, Some(&si), &seq, &dir.path().join("a")).unwrap();
    let b = cmd_sweep(&ri, Some(&si), &par, &dir.path().join("b")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_zeta_lambda_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (ri, si) = small_source(dir.path());
    let syn = cmd_synth(&ri, Some(&si), &quick(&[("targets", "0.1")]), &dir.path().join("syn")).unwrap();
    let r = &syn.rows[0];
    let s = quick(&[("zeta_grid", "0.2,0.8"), ("lambda_grid", "0,0.1,1"), ("repeats", "1")]);
    let rows = cmd_sweep(&r.interactions, Some(&r.social), &s, &dir.path().join("grid")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|x| x.target.is_none() && x.strategy == Strategy::Share));
}

#[test]
fn ablate_emits_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (ri, si) = small_source(dir.path());
    let syn = cmd_synth(&ri, Some(&si), &quick(&[("targets", "0.1")]), &dir.path().join("syn")).unwrap();
    let r = &syn.rows[0];
    let rows = cmd_ablate(&r.interactions, &r.social, &quick(&[("repeats", "2")]), &dir.path().join("abl")).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.variant.as_str()).collect();
    assert_eq!(names, ["share", "no-sgr", "no-hra", "no-sw", "cut-only", "add-only"]);
    assert!(rows.iter().all(|r| r.runs.len() == 2));
    let csv = fs::read_to_string(dir.path().join("abl/ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn vanilla_train_keeps_social_graph() {
    let dir = tempfile::tempdir().unwrap();
    let (ri, si) = small_source(dir.path());
    let syn = cmd_synth(&ri, Some(&si), &quick(&[("targets", "0.05")]), &dir.path().join("syn")).unwrap();
    let r = &syn.rows[0];
    let out = dir.path().join("train");
    let rep = cmd_train(&r.interactions, &r.social, &quick(&[("strategy", "vanilla")]), &out).unwrap();
    assert_eq!(rep.outcome.history.rewire_events(), 0);
    assert_eq!(fs::read_to_string(out.join("rewire.csv")).unwrap().lines().count(), 1);
    assert!(rep.outcome.history.epochs.iter().all(|e| e.l_cl == 0.0));
    assert_eq!(
        fs::read_to_string(out.join("social_best.txt")).unwrap(),
        fs::read_to_string(out.join("social_final.txt")).unwrap()
    );
    let split = share_core::graph::InteractionGraph::load(&out.join("interactions_split.txt"), Default::default()).unwrap();
    let users = split.user_index_map();
    let original = share_core::graph::SocialGraph::load(&r.social, &users).unwrap();
    let best = share_core::graph::SocialGraph::load(&out.join("social_best.txt"), &users).unwrap();
    assert_eq!(original.num_edges(), best.num_edges());
}

#[test]
fn eval_reproduces_train_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let (ri, si) = small_source(dir.path());
    let syn = cmd_synth(&ri, Some(&si), &quick(&[("targets", "0.1")]), &dir.path().join("syn")).unwrap();
    let r = &syn.rows[0];
    let s = quick(&[]);
    let out = dir.path().join("train");
    let rep = cmd_train(&r.interactions, &r.social, &s, &out).unwrap();
    let ev = cmd_eval(
        &out.join("interactions_split.txt"),
        &out.join("social_best.txt"),
        &out.join("checkpoint.bin"),
        &s,
        &dir.path().join("eval"),
    )
    .unwrap();
    assert_eq!(ev, rep.test);
}

#[test]
fn train_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (ri, si) = small_source(dir.path());
    let syn = cmd_synth(&ri, Some(&si), &quick(&[("targets", "0.1")]), &dir.path().join("syn")).unwrap();
    let r = &syn.rows[0];
    let s = quick(&[]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cmd_train(&r.interactions, &r.social, &s, &a).unwrap();
    cmd_train(&r.interactions, &r.social, &s, &b).unwrap();
    for f in ["history.csv", "checkpoint.bin", "rewire.csv", "social_best.txt", "metrics.txt", "manifest.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}
