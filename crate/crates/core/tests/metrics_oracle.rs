use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use share_core::eval::{evaluate, metrics_at_k, rank_items, top_k, user_metrics};
use share_core::matrix::Matrix;
use share_core::Real;

/// Textbook definitions: relevance vector over the cutoff, DCG against the
/// DCG of the relevance vector sorted descending.
fn reference(ranking: &[usize], relevant: &[usize], k: usize) -> (f64, f64, f64) {
    let rel: Vec<f64> = ranking
        .iter()
        .take(k)
        .map(|v| if relevant.contains(v) { 1.0 } else { 0.0 })
        .collect();
    let hits: f64 = rel.iter().sum();
    let dcg: f64 = rel.iter().enumerate().map(|(i, r)| r / (i as f64 + 2.0).log2()).sum();
    let mut ideal = vec![1.0; relevant.len()];
    ideal.resize(ideal.len().max(k), 0.0);
    let idcg: f64 = ideal.iter().take(k).enumerate().map(|(i, r)| r / (i as f64 + 2.0).log2()).sum();
    (hits / relevant.len() as f64, hits / k as f64, dcg / idcg)
}

#[test]
fn metrics_agree_with_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.gen_range(1..60);
        let mut ranking: Vec<usize> = (0..n).collect();
        ranking.shuffle(&mut rng);
        let mut relevant: Vec<usize> = (0..n + 5).filter(|_| rng.gen_bool(0.2)).collect();
        if relevant.is_empty() {
            relevant.push(rng.gen_range(0..n + 5));
        }
        let (r, p, g) = user_metrics(&ranking, &relevant, 10).unwrap();
        let (er, ep, eg) = reference(&ranking, &relevant, 10);
        assert!((r - er).abs() < 1e-12 && (p - ep).abs() < 1e-12 && (g - eg).abs() < 1e-12);
    }
}

#[test]
fn aggregate_is_mean_over_users_with_relevant_items() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rankings: Vec<Vec<usize>> = (0..30)
        .map(|_| {
            let mut r: Vec<usize> = (0..20).collect();
            r.shuffle(&mut rng);
            r
        })
        .collect();
    let relevant: Vec<Vec<usize>> = (0..30)
        .map(|u| if u % 4 == 0 { vec![] } else { (0..20).filter(|_| rng.gen_bool(0.3)).collect() })
        .collect();
    let report = metrics_at_k(&rankings, &relevant, 10, false);
    let kept: Vec<(f64, f64, f64)> = rankings
        .iter()
        .zip(&relevant)
        .filter(|(_, rel)| !rel.is_empty())
        .map(|(r, rel)| reference(r, rel, 10))
        .collect();
    let mean = |f: fn(&(f64, f64, f64)) -> f64| kept.iter().map(f).sum::<f64>() / kept.len() as f64;
    assert_eq!(report.users, kept.len());
    assert!((report.recall - mean(|t| t.0)).abs() < 1e-12);
    assert!((report.precision - mean(|t| t.1)).abs() < 1e-12);
    assert!((report.ndcg - mean(|t| t.2)).abs() < 1e-12);
}

#[test]
fn partial_selection_matches_full_sort() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.gen_range(1..40);
        // coarse scores force many ties
        let items = Matrix::from_vec(n, 1, (0..n).map(|_| rng.gen_range(0..5) as Real).collect());
        let users = Matrix::from_vec(1, 1, vec![1.0]);
        let exclude: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.2)).collect();
        let full = rank_items(0, &users, &items, &exclude);
        let scores: Vec<Real> = items.as_slice().to_vec();
        let k = rng.gen_range(1..=12);
        assert_eq!(top_k(&scores, &exclude, k), full.iter().copied().take(k).collect::<Vec<_>>());
    }
}

#[test]
fn evaluation_never_ranks_excluded_items() {
    // items 0 and 1 score highest but are excluded; 2 is the only relevant one
    let users = Matrix::from_rows(&[vec![1.0]]);
    let items = Matrix::from_rows(&[vec![9.0], vec![8.0], vec![1.0], vec![2.0]]);
    let r = evaluate(&users, &items, &[vec![0, 1]], &[vec![2]], 1);
    assert_eq!(r.recall, 0.0);
    let r = evaluate(&users, &items, &[vec![0, 1]], &[vec![2]], 2);
    assert_eq!(r.recall, 1.0);
}
