//! Run settings: defaults, then a `key = value` config file, then flags.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use share_core::backbone::BackboneKind;
use share_core::homophily::DEFAULT_BINS;
use share_core::synthetic::CommunityConfig;
use share_core::trainer::{Ablations, NegativeMode, Strategy, TrainConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub train: TrainConfig,
    /// Minimum rating kept when loading interactions.
    pub threshold: Option<f64>,
    /// Histogram bins over [0, 1] for `analyze`.
    pub bins: usize,
    /// Train/validation/test ratios for inputs without a split column.
    pub split: [f64; 3],
    /// Homophily levels for synthesis and sweeps.
    pub targets: Vec<f64>,
    /// Runs per cell; seeds are `seed, seed + 1, ...`.
    pub repeats: usize,
    pub strategies: Vec<Strategy>,
    pub zeta_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// Inclusive user-count range of synthetic sub-graphs.
    pub users: (usize, usize),
    /// Mean social degree of synthetic sub-graphs; `None` copies the input
    /// social graph, or 10 without one.
    pub avg_degree: Option<f64>,
    pub tolerance: f64,
    pub generator: CommunityConfig,
    pub threads: Option<usize>,
    pub parallel_cells: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            train: TrainConfig::default(),
            threshold: None,
            bins: DEFAULT_BINS,
            split: [0.8, 0.1, 0.1],
            targets: vec![0.05, 0.10, 0.20, 0.40],
            repeats: 5,
            strategies: vec![Strategy::Vanilla, Strategy::Share],
            zeta_grid: Vec::new(),
            lambda_grid: Vec::new(),
            users: (590, 600),
            avg_degree: None,
            tolerance: 0.02,
            generator: CommunityConfig::default(),
            threads: None,
            parallel_cells: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| anyhow!("bad value {value:?} for {key}: {e}"))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => bail!("bad value {value:?} for {key}: expected a boolean"),
    }
}

impl Settings {
    /// Defaults, then `config` (if any), then `overrides` in order.
    pub fn resolve(config: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(path) = config {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            s.apply_text(&text)
                .with_context(|| format!("in config {}", path.display()))?;
        }
        for (k, v) in overrides {
            s.set(k, v)?;
        }
        s.train.validate()?;
        if s.bins == 0 {
            bail!("bins must be at least 1");
        }
        Ok(s)
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", no + 1))?;
            self.set(k.trim(), v.trim())
                .with_context(|| format!("line {}", no + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.train;
        let g = &mut self.generator;
        match key.replace('-', "_").as_str() {
            "backbone" => t.backbone = value.parse::<BackboneKind>().map_err(|e| anyhow!(e))?,
            "epochs" => t.epochs = parse(key, value)?,
            "batch" | "batch_size" => t.batch_size = parse(key, value)?,
            "lr" | "learning_rate" => t.learning_rate = parse(key, value)?,
            "dim" => t.dim = parse(key, value)?,
            "layers" => t.layers = parse(key, value)?,
            "encoder_layers" => t.encoder_layers = parse(key, value)?,
            "zeta" => t.zeta = parse(key, value)?,
            "lambda" => t.lambda = parse(key, value)?,
            "tau" => t.tau = parse(key, value)?,
            "l2" => t.l2 = parse(key, value)?,
            "strategy" => t.strategy = value.parse()?,
            "warmup" | "warmup_epoch" => t.warmup_epoch = parse(key, value)?,
            "ablation" | "ablations" => t.ablations = Ablations::parse_list(value)?,
            "seed" => t.seed = parse(key, value)?,
            "patience" => t.patience = parse(key, value)?,
            "negatives" => t.negatives = value.parse::<NegativeMode>()?,
            "separate_encoder" => t.separate_encoder = parse_bool(key, value)?,
            "candidate_cap" => {
                t.candidate_cap = match value.trim() {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "eval_k" | "k" => t.eval_k = parse(key, value)?,
            "threshold" => {
                self.threshold = match value.trim() {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "bins" => self.bins = parse(key, value)?,
            "split" => {
                let r: Vec<f64> = list(key, value)?;
                self.split = <[f64; 3]>::try_from(r).map_err(|_| anyhow!("split needs three ratios"))?;
            }
            "targets" => self.targets = list(key, value)?,
            "repeats" | "seeds" => self.repeats = parse(key, value)?,
            "strategies" => self.strategies = list(key, value)?,
            "zeta_grid" => self.zeta_grid = list(key, value)?,
            "lambda_grid" => self.lambda_grid = list(key, value)?,
            "users" => {
                let r: Vec<usize> = list(key, value)?;
                self.users = match r.as_slice() {
                    [n] => (*n, *n),
                    [lo, hi] => (*lo, *hi),
                    _ => bail!("users takes one count or a `lo,hi` range"),
                };
            }
            "avg_degree" => self.avg_degree = Some(parse(key, value)?),
            "tolerance" => self.tolerance = parse(key, value)?,
            "threads" => self.threads = Some(parse(key, value)?),
            "parallel_cells" => self.parallel_cells = parse(key, value)?,
            "gen_users" => g.users = parse(key, value)?,
            "gen_items" => g.items = parse(key, value)?,
            "gen_communities" => g.communities = parse(key, value)?,
            "gen_groups" => g.groups_per_community = parse(key, value)?,
            "gen_core_items" => g.core_items = parse(key, value)?,
            "gen_core_adoption" => g.core_adoption = parse(key, value)?,
            "gen_personal" => {
                let r: Vec<usize> = list(key, value)?;
                g.interactions_per_user = match r.as_slice() {
                    [lo, hi] => (*lo, *hi),
                    _ => bail!("gen_personal takes a `lo,hi` range"),
                };
            }
            "gen_in_community" => g.in_community = parse(key, value)?,
            "gen_zipf" => g.zipf_exponent = parse(key, value)?,
            "gen_avg_degree" => g.avg_degree = parse(key, value)?,
            "gen_social_homophily" => g.social_homophily = parse(key, value)?,
            other => bail!("unknown setting {other:?}"),
        }
        Ok(())
    }

    /// Seeds of the repeated runs.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.repeats as u64).map(|k| self.train.seed + k).collect()
    }

    /// Every setting as `key = value`, readable back by [`Settings::apply_text`].
    pub fn to_text(&self) -> String {
        let t = &self.train;
        let g = &self.generator;
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("backbone", t.backbone.to_string());
        kv("epochs", t.epochs.to_string());
        kv("batch", t.batch_size.to_string());
        kv("lr", t.learning_rate.to_string());
        kv("dim", t.dim.to_string());
        kv("layers", t.layers.to_string());
        kv("encoder_layers", t.encoder_layers.to_string());
        kv("zeta", t.zeta.to_string());
        kv("lambda", t.lambda.to_string());
        kv("tau", t.tau.to_string());
        kv("l2", t.l2.to_string());
        kv("strategy", t.strategy.to_string());
        kv("warmup", t.warmup_epoch.to_string());
        kv("ablation", t.ablations.label());
        kv("seed", t.seed.to_string());
        kv("patience", t.patience.to_string());
        kv("negatives", t.negatives.to_string());
        kv("separate_encoder", t.separate_encoder.to_string());
        kv("candidate_cap", opt(t.candidate_cap.map(|c| c.to_string())));
        kv("eval_k", t.eval_k.to_string());
        kv("threshold", opt(self.threshold.map(|x| x.to_string())));
        kv("bins", self.bins.to_string());
        kv("split", join(&self.split));
        kv("targets", join(&self.targets));
        kv("repeats", self.repeats.to_string());
        kv("strategies", join(&self.strategies));
        kv("zeta_grid", join(&self.zeta_grid));
        kv("lambda_grid", join(&self.lambda_grid));
        kv("users", format!("{},{}", self.users.0, self.users.1));
        if let Some(d) = self.avg_degree {
            kv("avg_degree", d.to_string());
        }
        kv("tolerance", self.tolerance.to_string());
        kv("gen_users", g.users.to_string());
        kv("gen_items", g.items.to_string());
        kv("gen_communities", g.communities.to_string());
        kv("gen_groups", g.groups_per_community.to_string());
        kv("gen_core_items", g.core_items.to_string());
        kv("gen_core_adoption", g.core_adoption.to_string());
        kv("gen_personal", format!("{},{}", g.interactions_per_user.0, g.interactions_per_user.1));
        kv("gen_in_community", g.in_community.to_string());
        kv("gen_zipf", g.zipf_exponent.to_string());
        kv("gen_avg_degree", g.avg_degree.to_string());
        kv("gen_social_homophily", g.social_homophily.to_string());
        s
    }
}
