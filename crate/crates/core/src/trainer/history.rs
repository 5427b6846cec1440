use std::fmt::Write as _;

use crate::rewire::RewireReport;

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean over the epoch's batches.
    pub l_rec: f64,
    pub l_cl: f64,
    pub val_recall: f64,
    pub val_precision: f64,
    pub val_ndcg: f64,
    /// Counts of the last rewiring of this epoch, zero without one.
    pub cut: usize,
    pub add: usize,
    pub rewire_events: usize,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Every rewiring, in order, tagged with its epoch.
    pub rewires: Vec<RewireReport>,
    pub batches_per_epoch: usize,
}

impl TrainHistory {
    pub fn rewire_events(&self) -> usize {
        self.rewires.len()
    }

    /// Everything except wall time, so that identical runs give identical
    /// bytes.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,l_rec,l_cl,val_recall,val_precision,val_ndcg,cut_count,add_count,rewire_events\n");
        for r in &self.epochs {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.epoch, r.l_rec, r.l_cl, r.val_recall, r.val_precision, r.val_ndcg, r.cut, r.add, r.rewire_events
            );
        }
        s
    }

    pub fn timing_csv(&self) -> String {
        let mut s = String::from("epoch,seconds\n");
        for r in &self.epochs {
            let _ = writeln!(s, "{},{:.6}", r.epoch, r.wall_seconds);
        }
        s
    }

    /// One `epoch,cut_count,add_count` row per rewiring.
    pub fn rewire_csv(&self) -> String {
        let mut s = format!("{}\n", RewireReport::csv_header());
        for r in &self.rewires {
            s.push_str(&r.csv_row());
            s.push('\n');
        }
        s
    }
}

/// True iff no validation metric has exceeded its running best for
/// `max(patience, 1)` consecutive epochs. The first epoch always counts as
/// an improvement.
pub fn early_stop(history: &TrainHistory, patience: usize) -> bool {
    stalled_epochs(&history.epochs) >= patience.max(1)
}

/// Epochs since the last one where any metric set a new best.
pub fn stalled_epochs(epochs: &[EpochRecord]) -> usize {
    let mut best = [f64::NEG_INFINITY; 3];
    let mut stalled = 0;
    for r in epochs {
        let now = [r.val_recall, r.val_precision, r.val_ndcg];
        let improved = now.iter().zip(&best).any(|(n, b)| n > b);
        for (b, n) in best.iter_mut().zip(now) {
            *b = b.max(n);
        }
        stalled = if improved { 0 } else { stalled + 1 };
    }
    stalled
}
