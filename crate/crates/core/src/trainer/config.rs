use std::fmt;
use std::str::FromStr;

use crate::backbone::BackboneKind;
use crate::error::{Error, Result};
use crate::rewire::RewireOptions;

/// When social graph rewiring runs during training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// First batch of every epoch from the warm-up epoch on.
    Share,
    /// Every batch from the warm-up epoch on.
    MultiSgr,
    /// First batch of every epoch from epoch 1.
    NoWarmup,
    /// Never; the contrastive term is off as well.
    Vanilla,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Share, Strategy::MultiSgr, Strategy::NoWarmup, Strategy::Vanilla];

    /// Whether batch `batch` (1-based) of epoch `epoch` (1-based) rewires.
    pub fn rewires_at(self, epoch: usize, batch: usize, warmup: usize) -> bool {
        match self {
            Strategy::Share => epoch >= warmup && batch == 1,
            Strategy::MultiSgr => epoch >= warmup,
            Strategy::NoWarmup => batch == 1,
            Strategy::Vanilla => false,
        }
    }

    /// Number of rewiring events over `epochs` epochs of `batches` batches.
    pub fn expected_events(self, epochs: usize, batches: usize, warmup: usize) -> usize {
        let gated = (epochs + 1).saturating_sub(warmup.max(1));
        match self {
            Strategy::Share => gated,
            Strategy::MultiSgr => gated * batches,
            Strategy::NoWarmup => epochs,
            Strategy::Vanilla => 0,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Share => "share",
            Strategy::MultiSgr => "multi-sgr",
            Strategy::NoWarmup => "no-warmup",
            Strategy::Vanilla => "vanilla",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "share" => Ok(Strategy::Share),
            "multi-sgr" | "multisgr" => Ok(Strategy::MultiSgr),
            "no-warmup" | "nowarmup" => Ok(Strategy::NoWarmup),
            "vanilla" => Ok(Strategy::Vanilla),
            other => Err(Error::Config(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Where contrastive negatives come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NegativeMode {
    /// Other users of the same batch.
    Batch,
    /// Every other user.
    Exact,
}

impl fmt::Display for NegativeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NegativeMode::Batch => "batch",
            NegativeMode::Exact => "exact",
        })
    }
}

impl FromStr for NegativeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "batch" => Ok(NegativeMode::Batch),
            "exact" | "all" => Ok(NegativeMode::Exact),
            other => Err(Error::Config(format!("unknown negative mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ablations {
    pub no_sgr: bool,
    pub no_hra: bool,
    pub no_sw: bool,
    pub cut_only: bool,
    pub add_only: bool,
}

impl Ablations {
    pub const NAMES: [&'static str; 5] = ["no_sgr", "no_hra", "no_sw", "cut_only", "add_only"];

    pub fn none() -> Self {
        Ablations::default()
    }

    /// A single named switch.
    pub fn single(name: &str) -> Result<Self> {
        let mut a = Ablations::default();
        a.set(name)?;
        Ok(a)
    }

    /// Comma-separated switch names; empty or `none` means no switches.
    pub fn parse_list(list: &str) -> Result<Self> {
        let mut a = Ablations::default();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if name != "none" {
                a.set(name)?;
            }
        }
        a.validate()?;
        Ok(a)
    }

    pub fn set(&mut self, name: &str) -> Result<()> {
        let key = name.trim().to_ascii_lowercase().replace('-', "_");
        let key = key.strip_prefix("w/o_").or_else(|| key.strip_prefix("without_")).map_or(key.clone(), |k| format!("no_{k}"));
        match key.as_str() {
            "no_sgr" => self.no_sgr = true,
            "no_hra" => self.no_hra = true,
            "no_sw" => self.no_sw = true,
            "cut_only" => self.cut_only = true,
            "add_only" => self.add_only = true,
            _ => return Err(Error::Config(format!("unknown ablation {name:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.no_sgr && (self.cut_only || self.add_only) {
            return Err(Error::Config("no_sgr cannot be combined with cut_only or add_only".into()));
        }
        if self.cut_only && self.add_only {
            return Err(Error::Config("cut_only and add_only are mutually exclusive".into()));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        *self == Ablations::default()
    }

    /// Enabled switch names in canonical order, or `none`.
    pub fn label(&self) -> String {
        let flags = [self.no_sgr, self.no_hra, self.no_sw, self.cut_only, self.add_only];
        let on: Vec<&str> = Self::NAMES.iter().zip(flags).filter(|(_, f)| *f).map(|(n, _)| *n).collect();
        if on.is_empty() {
            "none".into()
        } else {
            on.join(",")
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub backbone: BackboneKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dim: usize,
    pub layers: usize,
    pub encoder_layers: usize,
    pub zeta: f64,
    pub lambda: f64,
    pub tau: f64,
    pub l2: f64,
    pub strategy: Strategy,
    /// First epoch (1-based) at which gated rewiring may run.
    pub warmup_epoch: usize,
    pub ablations: Ablations,
    pub seed: u64,
    pub patience: usize,
    pub negatives: NegativeMode,
    /// Give the encoder its own item table instead of sharing the backbone's.
    pub separate_encoder: bool,
    /// Per-user candidate limit when adding edges; `None` scans all pairs.
    pub candidate_cap: Option<usize>,
    /// Cutoff for validation metrics.
    pub eval_k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            backbone: BackboneKind::LightGcnSocial,
            epochs: 100,
            batch_size: 2048,
            learning_rate: 1e-3,
            dim: 64,
            layers: 2,
            encoder_layers: 2,
            zeta: 0.5,
            lambda: 0.01,
            tau: 0.1,
            l2: 1e-4,
            strategy: Strategy::Share,
            warmup_epoch: 10,
            ablations: Ablations::none(),
            seed: 0,
            patience: 50,
            negatives: NegativeMode::Batch,
            separate_encoder: false,
            candidate_cap: None,
            eval_k: 10,
        }
    }
}

/// What a validated config actually runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pipeline {
    /// Rewiring switches, or `None` when the graph is never rewired.
    pub rewire: Option<RewireOptions>,
    /// Effective contrastive weight.
    pub lambda: f64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if self.dim == 0 || self.layers == 0 || self.encoder_layers == 0 {
            return bad("dim, layers and encoder layers must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..=1.0).contains(&self.zeta) {
            return bad(format!("zeta must lie in [0, 1], got {}", self.zeta));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad(format!("l2 must be non-negative, got {}", self.l2));
        }
        if self.warmup_epoch == 0 {
            return bad("warm-up epoch is 1-based".into());
        }
        if self.eval_k == 0 {
            return bad("evaluation cutoff must be at least 1".into());
        }
        self.ablations.validate()
    }
}

/// Resolves strategy and ablation switches into the pipeline that runs.
pub fn apply_ablations(config: &TrainConfig) -> Result<Pipeline> {
    config.validate()?;
    let a = config.ablations;
    let vanilla = config.strategy == Strategy::Vanilla;
    let rewire = (!vanilla && !a.no_sgr).then_some(RewireOptions {
        cut: !a.add_only,
        add: !a.cut_only,
        unit_weights: a.no_sw,
        candidate_cap: config.candidate_cap,
    });
    let lambda = if vanilla || a.no_hra { 0.0 } else { config.lambda };
    Ok(Pipeline { rewire, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_counts() {
        assert_eq!(Strategy::Share.expected_events(5, 3, 10), 0);
        assert_eq!(Strategy::Share.expected_events(12, 3, 10), 3);
        assert_eq!(Strategy::MultiSgr.expected_events(12, 3, 10), 9);
        assert_eq!(Strategy::NoWarmup.expected_events(12, 3, 10), 12);
        assert_eq!(Strategy::Vanilla.expected_events(12, 3, 10), 0);
        let counted = (1..=12)
            .flat_map(|k| (1..=3).map(move |n| (k, n)))
            .filter(|&(k, n)| Strategy::Share.rewires_at(k, n, 10))
            .count();
        assert_eq!(counted, 3);
    }

    #[test]
    fn ablation_conflicts() {
        assert!(Ablations::parse_list("no_sgr,cut_only").is_err());
        assert!(Ablations::parse_list("no_sgr,add_only").is_err());
        assert!(Ablations::parse_list("no-hra, no_sw").is_ok());
        assert!(Ablations::parse_list("bogus").is_err());
        assert_eq!(Ablations::parse_list("w/o-sgr").unwrap().label(), "no_sgr");
        assert_eq!(Ablations::parse_list("").unwrap().label(), "none");
    }

    #[test]
    fn pipeline_switches() {
        let mut c = TrainConfig::default();
        let p = apply_ablations(&c).unwrap();
        assert_eq!(p.rewire, Some(RewireOptions::default()));
        assert_eq!(p.lambda, 0.01);

        c.strategy = Strategy::Vanilla;
        let p = apply_ablations(&c).unwrap();
        assert!(p.rewire.is_none());
        assert_eq!(p.lambda, 0.0);

        c.strategy = Strategy::Share;
        c.ablations = Ablations::single("no_hra").unwrap();
        assert_eq!(apply_ablations(&c).unwrap().lambda, 0.0);
        c.ablations = Ablations::single("cut_only").unwrap();
        assert!(!apply_ablations(&c).unwrap().rewire.unwrap().add);
        c.ablations = Ablations::single("add_only").unwrap();
        assert!(!apply_ablations(&c).unwrap().rewire.unwrap().cut);
        c.ablations = Ablations::single("no_sw").unwrap();
        assert!(apply_ablations(&c).unwrap().rewire.unwrap().unit_weights);
    }

    #[test]
    fn strategy_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
    }

    #[test]
    fn rejects_bad_values() {
        let c = TrainConfig { zeta: 1.5, ..TrainConfig::default() };
        assert!(c.validate().is_err());
        let c = TrainConfig { tau: 0.0, ..TrainConfig::default() };
        assert!(c.validate().is_err());
    }
}
