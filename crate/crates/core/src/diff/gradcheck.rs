use rand::Rng;

use super::{EmbeddingState, Gradients};
use crate::rng::{self, Stream};
use crate::Real;

/// Denominator floor of the relative error. Below it both gradients are
/// round-off around a true zero and the ratio carries no information.
pub const GRAD_FLOOR: f64 = 1e-9;

/// Compares analytic gradients against fourth-order central differences on
/// randomly chosen coordinates and returns the largest relative error
/// `|g_fd - g_an| / max(GRAD_FLOOR, |g_fd| + |g_an|)`.
pub fn finite_diff_check<F>(
    state: &EmbeddingState,
    grads: &Gradients,
    mut loss: F,
    probes: usize,
    h: f64,
    seed: u64,
) -> f64
where
    F: FnMut(&EmbeddingState) -> f64,
{
    let mut grad_tables = vec![&grads.user, &grads.item];
    if let Some(g) = &grads.encoder_item {
        grad_tables.push(g);
    }
    let sizes: Vec<usize> = state.params().iter().map(|p| p.value.as_slice().len()).collect();
    let total: usize = sizes.iter().sum();
    let mut rng = rng::stream(seed, Stream::Probe);
    let mut probe = state.clone();
    let mut worst = 0.0f64;

    for _ in 0..probes {
        let mut flat = rng.gen_range(0..total);
        let mut table = 0;
        while flat >= sizes[table] {
            flat -= sizes[table];
            table += 1;
        }
        let original = probe.params()[table].value.as_slice()[flat];

        let mut at = |offset: f64| {
            probe.params_mut()[table].value.as_mut_slice()[flat] = original + (offset * h) as Real;
            loss(&probe)
        };
        // paired differences so an unaffected coordinate gives exactly 0
        let near = at(1.0) - at(-1.0);
        let far = at(2.0) - at(-2.0);
        let numeric = (8.0 * near - far) / (12.0 * h);
        probe.params_mut()[table].value.as_mut_slice()[flat] = original;
        let analytic = grad_tables[table].as_slice()[flat] as f64;
        let rel = (numeric - analytic).abs() / (numeric.abs() + analytic.abs()).max(GRAD_FLOOR);
        worst = worst.max(rel);
    }
    worst
}
