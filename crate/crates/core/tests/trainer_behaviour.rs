use share_core::diff::write_checkpoint;
use share_core::graph::{InteractionGraph, SocialGraph};
use share_core::synthetic::{community_dataset, CommunityConfig};
use share_core::trainer::{train, Ablations, Strategy, TrainConfig};
use share_core::Error;

fn data() -> (InteractionGraph, SocialGraph) {
    let cfg = CommunityConfig {
        users: 60,
        items: 120,
        communities: 4,
        groups_per_community: 2,
        core_items: 8,
        interactions_per_user: (2, 6),
        avg_degree: 6.0,
        ..CommunityConfig::default()
    };
    let (r, s) = community_dataset(&cfg).unwrap();
    (r.split([0.8, 0.1, 0.1], 1).unwrap(), s)
}

fn config(strategy: Strategy, epochs: usize) -> TrainConfig {
    TrainConfig {
        strategy,
        epochs,
        batch_size: 256,
        dim: 8,
        warmup_epoch: 3,
        patience: 1000,
        learning_rate: 0.01,
        ..TrainConfig::default()
    }
}

#[test]
fn rewiring_events_follow_closed_form() {
    let (r, s) = data();
    for strategy in Strategy::ALL {
        let cfg = config(strategy, 5);
        let out = train(&cfg, &r, &s).unwrap();
        let n = out.history.batches_per_epoch;
        assert!(n > 1, "want several batches per epoch");
        assert_eq!(
            out.history.rewire_events(),
            strategy.expected_events(5, n, cfg.warmup_epoch),
            "{strategy}"
        );
        assert_eq!(out.history.epochs.iter().map(|e| e.rewire_events).sum::<usize>(), out.history.rewire_events());
        assert_eq!(out.history.rewire_csv().lines().count(), out.history.rewire_events() + 1);
    }
}

#[test]
fn warmup_beyond_run_means_no_rewiring() {
    let (r, s) = data();
    let cfg = TrainConfig { warmup_epoch: 10, ..config(Strategy::Share, 5) };
    let out = train(&cfg, &r, &s).unwrap();
    assert_eq!(out.history.rewire_events(), 0);
    assert_eq!(out.final_social, s);
}

#[test]
fn vanilla_keeps_graph_and_skips_contrastive_term() {
    let (r, s) = data();
    let out = train(&config(Strategy::Vanilla, 4), &r, &s).unwrap();
    assert_eq!(out.final_social, s);
    assert!(out.history.epochs.iter().all(|e| e.l_cl == 0.0));
}

#[test]
fn zero_lambda_without_rewiring_is_vanilla() {
    let (r, s) = data();
    let vanilla = train(&config(Strategy::Vanilla, 4), &r, &s).unwrap();
    let cfg = TrainConfig {
        lambda: 0.0,
        ablations: Ablations::single("no_sgr").unwrap(),
        ..config(Strategy::Share, 4)
    };
    let ablated = train(&cfg, &r, &s).unwrap();
    assert_eq!(vanilla.history.to_csv(), ablated.history.to_csv());
    assert_eq!(vanilla.best, ablated.best);
}

#[test]
fn ablation_effects() {
    let (r, s) = data();
    let no_hra = TrainConfig { ablations: Ablations::single("no_hra").unwrap(), ..config(Strategy::Share, 4) };
    let out = train(&no_hra, &r, &s).unwrap();
    assert!(out.history.epochs.iter().all(|e| e.l_cl == 0.0));
    assert!(out.history.rewire_events() > 0);

    let no_sw = TrainConfig { ablations: Ablations::single("no_sw").unwrap(), ..config(Strategy::Share, 4) };
    let out = train(&no_sw, &r, &s).unwrap();
    assert!(out.final_social.edges().iter().all(|e| e.2 == 1.0));

    let cut_only = TrainConfig { ablations: Ablations::single("cut_only").unwrap(), ..config(Strategy::Share, 4) };
    let out = train(&cut_only, &r, &s).unwrap();
    let last = out.history.rewires.last().unwrap();
    assert!(last.added_edges.is_empty());
    assert_eq!(out.final_social.num_edges(), s.num_edges() - last.m);

    let with_hra = train(&config(Strategy::Share, 4), &r, &s).unwrap();
    assert!(with_hra.history.epochs.iter().any(|e| e.l_cl > 0.0));

    let conflict = TrainConfig {
        ablations: Ablations { no_sgr: true, cut_only: true, ..Ablations::none() },
        ..config(Strategy::Share, 4)
    };
    assert!(matches!(train(&conflict, &r, &s), Err(Error::Config(_))));
}

#[test]
fn identical_runs_are_bit_identical() {
    let (r, s) = data();
    let cfg = config(Strategy::Share, 5);
    let a = train(&cfg, &r, &s).unwrap();
    let b = train(&cfg, &r, &s).unwrap();
    assert_eq!(a.history.to_csv(), b.history.to_csv());
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    write_checkpoint(&a.best, &mut ca).unwrap();
    write_checkpoint(&b.best, &mut cb).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn patience_cuts_the_run_short() {
    let (r, s) = data();
    let cfg = TrainConfig { patience: 0, learning_rate: 1e-6, ..config(Strategy::Vanilla, 30) };
    let out = train(&cfg, &r, &s).unwrap();
    assert!(out.stopped_early);
    assert!(out.history.epochs.len() < 30);
    assert!(out.best_epoch <= out.history.epochs.len());
}

#[test]
fn diverging_run_reports_non_finite_loss() {
    let (r, s) = data();
    let cfg = TrainConfig { learning_rate: 1e200, ..config(Strategy::Vanilla, 20) };
    match train(&cfg, &r, &s) {
        Err(Error::NonFinite(msg)) => assert!(msg.contains("epoch")),
        other => panic!("expected a non-finite error, got {:?}", other.map(|o| o.best_epoch)),
    }
}
