#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use share_core::backbone::Triple;
use share_core::graph::{InteractionGraph, SocialGraph};

pub struct Micro {
    pub interactions: InteractionGraph,
    pub social: SocialGraph,
    pub batch: Vec<Triple>,
    pub dim: usize,
    pub layers: usize,
}

/// Random instance with m, n <= 10, d <= 8, L <= 2. Every user has at least
/// one item and at least one item it has not seen.
pub fn micro(seed: u64) -> Micro {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(3..=10);
    let n = rng.gen_range(3..=10);
    let mut edges = Vec::new();
    for u in 0..m {
        let mut any = false;
        for v in 0..n - 1 {
            if rng.gen_bool(0.35) {
                edges.push((u, v, 1.0));
                any = true;
            }
        }
        if !any {
            edges.push((u, rng.gen_range(0..n - 1), 1.0));
        }
    }
    let interactions = InteractionGraph::from_edges(m, n, &edges).unwrap();
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if rng.gen_bool(0.4) {
                pairs.push((i, j));
            }
        }
    }
    let social = SocialGraph::from_weighted(
        m,
        &pairs.iter().map(|&(i, j)| (i, j, rng.gen_range(0.1..1.0))).collect::<Vec<_>>(),
    );
    let batch = (0..rng.gen_range(1..=8))
        .map(|_| {
            let (u, v, _) = edges[rng.gen_range(0..edges.len())];
            let items = interactions.train_items(u);
            let free: Vec<usize> = (0..n).filter(|w| items.binary_search(w).is_err()).collect();
            (u, v, free[rng.gen_range(0..free.len())])
        })
        .collect();
    Micro {
        interactions,
        social,
        batch,
        dim: rng.gen_range(1..=8),
        layers: rng.gen_range(1..=2),
    }
}

/// Dense copy of a sparse-ish 0/1 interaction matrix.
pub fn dense_r(r: &InteractionGraph) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; r.num_items()]; r.num_users()];
    for (u, v) in r.train_edges() {
        out[u][v] = 1.0;
    }
    out
}

pub fn dense_s(s: &SocialGraph) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; s.num_users()]; s.num_users()];
    for &(i, j, w) in s.edges() {
        out[i][j] = w;
        out[j][i] = w;
    }
    out
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| row.iter().zip(b).map(|(x, brow)| x * brow[c]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|c| a.iter().map(|r| r[c]).collect()).collect()
}
