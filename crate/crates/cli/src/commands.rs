//! One function per subcommand. Each writes its artifacts under `out` and
//! returns a summary for callers that want numbers rather than files.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{error, info};
use rayon::prelude::*;
use share_core::diff::{read_checkpoint, write_checkpoint};
use share_core::eval::MetricsReport;
use share_core::graph::{InteractionGraph, LoadOptions, SocialGraph, Split};
use share_core::homophily::{graph_homophily, DEFAULT_BINS};
use share_core::synthetic::{community_dataset, synthesize_subgraph, SubgraphConfig};
use share_core::trainer::{evaluate_split, train, Ablations, Strategy, TrainConfig, TrainOutcome};

use crate::manifest::Manifest;
use crate::settings::Settings;

fn create_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn load_interactions(path: &Path, settings: &Settings) -> Result<InteractionGraph> {
    InteractionGraph::load(path, LoadOptions { rating_threshold: settings.threshold })
        .with_context(|| format!("loading interactions from {}", path.display()))
}

pub fn load_social(path: &Path, interactions: &InteractionGraph) -> Result<SocialGraph> {
    SocialGraph::load(path, &interactions.user_index_map())
        .with_context(|| format!("loading social graph from {}", path.display()))
}

/// Splits with the run seed unless the input already carries a split.
pub fn ensure_split(interactions: InteractionGraph, settings: &Settings, seed: u64) -> Result<InteractionGraph> {
    if interactions.count(Split::Val) + interactions.count(Split::Test) > 0 {
        return Ok(interactions);
    }
    Ok(interactions.split(settings.split, seed)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeReport {
    pub users: usize,
    pub items: usize,
    pub feedback: usize,
    pub social_edges: usize,
    /// Directed relation count, two per undirected edge.
    pub relations: usize,
    pub graph_homophily: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl AnalyzeReport {
    pub fn to_text(&self) -> String {
        format!(
            "users={}\nitems={}\nfeedback={}\nsocial_edges={}\nrelations={}\nH_s={:.6}\nh_min={}\nh_max={}\n",
            self.users, self.items, self.feedback, self.social_edges, self.relations, self.graph_homophily, self.h_min, self.h_max
        )
    }
}

pub fn cmd_analyze(interactions_path: &Path, social_path: &Path, settings: &Settings, out: &Path) -> Result<AnalyzeReport> {
    create_dir(out)?;
    let r = load_interactions(interactions_path, settings)?;
    let s = load_social(social_path, &r)?;
    if s.num_edges() == 0 {
        bail!("{} has no social edges between known users", social_path.display());
    }
    let table = graph_homophily(&s, &r, settings.bins);
    let report = AnalyzeReport {
        users: r.num_users(),
        items: r.num_items(),
        feedback: r.edges().len(),
        social_edges: s.num_edges(),
        relations: 2 * s.num_edges(),
        graph_homophily: table.graph_ratio,
        h_min: table.h_min,
        h_max: table.h_max,
    };

    let ids = r.user_ids();
    let mut edges = String::from("user_i,user_j,h\n");
    for &(i, j, h) in &table.edges {
        let _ = writeln!(edges, "{},{},{}", ids[i], ids[j], h);
    }
    write_file(&out.join("edge_homophily.csv"), &edges)?;
    write_file(&out.join("histogram.csv"), &table.histogram_csv())?;
    write_file(&out.join("report.txt"), &report.to_text())?;
    let mut m = Manifest::new("analyze");
    m.input("interactions", interactions_path)?.input("social", social_path)?;
    m.write(out, settings)?;
    Ok(report)
}

/// Writes a planted-community dataset as `interactions.txt` and `social.txt`.
pub fn cmd_generate(settings: &Settings, out: &Path) -> Result<(PathBuf, PathBuf)> {
    create_dir(out)?;
    let mut cfg = settings.generator.clone();
    cfg.seed = settings.train.seed;
    let (r, s) = community_dataset(&cfg)?;
    let (ri, si) = (out.join("interactions.txt"), out.join("social.txt"));
    r.write(&ri)?;
    s.write(&si, r.user_ids())?;
    let mut m = Manifest::new("generate");
    m.note("users", r.num_users()).note("items", r.num_items()).note("social_edges", s.num_edges());
    m.write(out, settings)?;
    Ok((ri, si))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthRow {
    pub target: f64,
    pub achieved: f64,
    /// Recomputed from the written graph, independently of the generator.
    pub verified: f64,
    pub users: usize,
    pub edges: usize,
    pub interactions: PathBuf,
    pub social: PathBuf,
}

fn target_dir(out: &Path, target: f64) -> PathBuf {
    out.join(format!("h{target:.2}"))
}

fn subgraph_config(settings: &Settings, target: f64, source_social: Option<&SocialGraph>) -> SubgraphConfig {
    let mut cfg = SubgraphConfig::new(target, settings.users, settings.train.seed);
    cfg.tolerance = settings.tolerance;
    match (settings.avg_degree, source_social) {
        (Some(d), _) => cfg.avg_degree = d,
        (None, Some(s)) => cfg = cfg.matching_degree(s),
        (None, None) => {}
    }
    cfg
}

#[derive(Clone, Debug, Default)]
pub struct SynthOutcome {
    pub rows: Vec<SynthRow>,
    /// Targets that could not be reached, with the reason.
    pub failures: Vec<(f64, String)>,
}

/// One homophily-controlled sub-graph per target, each under `h<target>/`.
/// A target that cannot be reached is logged and skipped.
pub fn cmd_synth(interactions_path: &Path, social_path: Option<&Path>, settings: &Settings, out: &Path) -> Result<SynthOutcome> {
    create_dir(out)?;
    let source = load_interactions(interactions_path, settings)?;
    let social = social_path.map(|p| load_social(p, &source)).transpose()?;
    let mut outcome = SynthOutcome::default();
    for &target in &settings.targets {
        let g = match synthesize_subgraph(&source, &subgraph_config(settings, target, social.as_ref())) {
            Ok(g) => g,
            Err(e) => {
                error!("H_s target {target}: {e}");
                outcome.failures.push((target, e.to_string()));
                continue;
            }
        };
        let dir = target_dir(out, target);
        create_dir(&dir)?;
        let (ri, si) = (dir.join("interactions.txt"), dir.join("social.txt"));
        g.interactions.write(&ri)?;
        g.social.write(&si, g.interactions.user_ids())?;
        let verified = graph_homophily(&g.social, &g.interactions, DEFAULT_BINS).graph_ratio;
        info!("H_s target {target}: achieved {:.4} over {} users", g.achieved, g.interactions.num_users());
        outcome.rows.push(SynthRow {
            target,
            achieved: g.achieved,
            verified,
            users: g.interactions.num_users(),
            edges: g.social.num_edges(),
            interactions: ri,
            social: si,
        });
    }
    let mut csv = String::from("target,status,achieved,verified,users,edges\n");
    for r in &outcome.rows {
        let _ = writeln!(csv, "{},ok,{},{},{},{}", r.target, r.achieved, r.verified, r.users, r.edges);
    }
    for (t, _) in &outcome.failures {
        let _ = writeln!(csv, "{t},unreachable,,,,");
    }
    write_file(&out.join("synth.csv"), &csv)?;
    let mut m = Manifest::new("synth");
    m.input("interactions", interactions_path)?;
    if let Some(p) = social_path {
        m.input("social", p)?;
    }
    m.write(out, settings)?;
    Ok(outcome)
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub outcome: TrainOutcome,
    pub test: MetricsReport,
}

fn write_checkpoint_file(path: &Path, outcome: &TrainOutcome) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write_checkpoint(&outcome.best, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Trains, evaluates the best checkpoint on the test split, and writes the
/// split data, history, rewiring log, checkpoint, graphs and metrics.
pub fn cmd_train(interactions_path: &Path, social_path: &Path, settings: &Settings, out: &Path) -> Result<TrainReport> {
    create_dir(out)?;
    let raw = load_interactions(interactions_path, settings)?;
    let social = load_social(social_path, &raw)?;
    let r = ensure_split(raw, settings, settings.train.seed)?;
    let outcome = train(&settings.train, &r, &social)?;
    let test = evaluate_split(&settings.train, &r, &outcome.best_social, &outcome.best, Split::Test);

    r.write(&out.join("interactions_split.txt"))?;
    write_file(&out.join("history.csv"), &outcome.history.to_csv())?;
    write_file(&out.join("timing.csv"), &outcome.history.timing_csv())?;
    write_file(&out.join("rewire.csv"), &outcome.history.rewire_csv())?;
    write_checkpoint_file(&out.join("checkpoint.bin"), &outcome)?;
    outcome.best_social.write(&out.join("social_best.txt"), r.user_ids())?;
    outcome.final_social.write(&out.join("social_final.txt"), r.user_ids())?;
    let mut text = test.to_text();
    let _ = writeln!(text, "best_epoch={}", outcome.best_epoch);
    let _ = writeln!(text, "epochs_run={}", outcome.history.epochs.len());
    let _ = writeln!(text, "rewire_events={}", outcome.history.rewire_events());
    write_file(&out.join("metrics.txt"), &text)?;

    let mut m = Manifest::new("train");
    m.input("interactions", interactions_path)?.input("social", social_path)?;
    m.note("best_epoch", outcome.best_epoch);
    m.write(out, settings)?;
    Ok(TrainReport { outcome, test })
}

/// Test metrics of a saved checkpoint. `interactions` should be the split
/// file written by `train`.
pub fn cmd_eval(interactions_path: &Path, social_path: &Path, checkpoint: &Path, settings: &Settings, out: &Path) -> Result<MetricsReport> {
    create_dir(out)?;
    let r = load_interactions(interactions_path, settings)?;
    if r.count(Split::Test) == 0 {
        bail!("{} has no test interactions; pass the split file written by `train`", interactions_path.display());
    }
    let s = load_social(social_path, &r)?;
    let file = File::open(checkpoint).with_context(|| format!("opening {}", checkpoint.display()))?;
    let state = read_checkpoint(std::io::BufReader::new(file))?;
    if state.users().rows() != r.num_users() || state.items().rows() != r.num_items() {
        bail!(
            "checkpoint holds {}x{} tables but the data has {} users and {} items",
            state.users().rows(),
            state.items().rows(),
            r.num_users(),
            r.num_items()
        );
    }
    let report = evaluate_split(&settings.train, &r, &s, &state, Split::Test);
    write_file(&out.join("eval.txt"), &report.to_text())?;
    write_file(&out.join("eval.csv"), &report.to_csv())?;
    let mut m = Manifest::new("eval");
    m.input("interactions", interactions_path)?
        .input("social", social_path)?
        .input("checkpoint", checkpoint)?;
    m.write(out, settings)?;
    Ok(report)
}

/// Test metrics of one finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub recall: f64,
    pub precision: f64,
    pub ndcg: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

fn run_once(config: &TrainConfig, raw: &InteractionGraph, social: &SocialGraph, settings: &Settings) -> Result<RunResult> {
    let r = ensure_split(raw.clone(), settings, config.seed)?;
    let outcome = train(config, &r, social)?;
    let test = evaluate_split(config, &r, &outcome.best_social, &outcome.best, Split::Test);
    Ok(RunResult {
        seed: config.seed,
        recall: test.recall,
        precision: test.precision,
        ndcg: test.ndcg,
        best_epoch: outcome.best_epoch,
        epochs_run: outcome.history.epochs.len(),
    })
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub variant: String,
    pub runs: Vec<RunResult>,
}

impl AblationRow {
    pub fn ndcg(&self) -> (f64, f64) {
        mean_std(&self.runs.iter().map(|r| r.ndcg).collect::<Vec<_>>())
    }

    pub fn recall(&self) -> (f64, f64) {
        mean_std(&self.runs.iter().map(|r| r.recall).collect::<Vec<_>>())
    }

    pub fn precision(&self) -> (f64, f64) {
        mean_std(&self.runs.iter().map(|r| r.precision).collect::<Vec<_>>())
    }
}

/// Full SHaRe plus each single ablation, over the same seeds.
pub fn cmd_ablate(interactions_path: &Path, social_path: &Path, settings: &Settings, out: &Path) -> Result<Vec<AblationRow>> {
    create_dir(out)?;
    let raw = load_interactions(interactions_path, settings)?;
    let social = load_social(social_path, &raw)?;
    let variants: Vec<(String, Ablations)> = std::iter::once(("share".to_string(), Ablations::none()))
        .chain(Ablations::NAMES.iter().map(|n| (n.replace('_', "-"), Ablations::single(n).expect("known name"))))
        .collect();
    let jobs: Vec<(usize, TrainConfig)> = variants
        .iter()
        .enumerate()
        .flat_map(|(k, (_, a))| {
            settings.seeds().into_iter().map(move |seed| {
                let cfg = TrainConfig {
                    ablations: *a,
                    strategy: if settings.train.strategy == Strategy::Vanilla { Strategy::Share } else { settings.train.strategy },
                    seed,
                    ..settings.train.clone()
                };
                (k, cfg)
            })
        })
        .collect();
    let results = run_jobs(settings.parallel_cells, &jobs, |(_, cfg)| run_once(cfg, &raw, &social, settings))?;

    let mut rows: Vec<AblationRow> = variants
        .iter()
        .map(|(name, _)| AblationRow {
            variant: name.clone(),
            runs: Vec::new(),
        })
        .collect();
    for ((k, _), res) in jobs.iter().zip(results) {
        rows[*k].runs.push(res);
    }

    let mut csv = String::from("variant,runs,recall_mean,recall_std,precision_mean,precision_std,ndcg_mean,ndcg_std\n");
    let mut table = format!("{:<10} {:>10} {:>10} {:>10}\n", "variant", "recall@k", "prec@k", "ndcg@k");
    for row in &rows {
        let (rm, rs) = row.recall();
        let (pm, ps) = row.precision();
        let (nm, ns) = row.ndcg();
        let _ = writeln!(csv, "{},{},{rm},{rs},{pm},{ps},{nm},{ns}", row.variant, row.runs.len());
        let _ = writeln!(table, "{:<10} {:>10.5} {:>10.5} {:>10.5}", row.variant, rm, pm, nm);
    }
    write_file(&out.join("ablation.csv"), &csv)?;
    write_file(&out.join("ablation.txt"), &table)?;
    let mut m = Manifest::new("ablate");
    m.input("interactions", interactions_path)?.input("social", social_path)?;
    m.write(out, settings)?;
    Ok(rows)
}

/// Runs `f` over `jobs`, on `threads` workers when more than one. Results
/// keep job order.
fn run_jobs<J: Sync, T: Send>(threads: usize, jobs: &[J], f: impl Fn(&J) -> Result<T> + Sync) -> Result<Vec<T>> {
    if threads <= 1 {
        return jobs.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(|| jobs.par_iter().map(&f).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Requested homophily of the synthetic dataset, `None` for the input data.
    pub target: Option<f64>,
    pub achieved: f64,
    pub strategy: Strategy,
    pub zeta: f64,
    pub lambda: f64,
    pub run: RunResult,
}

impl SweepRow {
    fn cell(&self) -> (Option<u64>, Strategy, u64, u64) {
        (self.target.map(f64::to_bits), self.strategy, self.zeta.to_bits(), self.lambda.to_bits())
    }
}

struct SweepData {
    target: Option<f64>,
    achieved: f64,
    interactions: InteractionGraph,
    social: SocialGraph,
}

/// Grid over datasets x strategies x zeta x lambda x seeds.
///
/// Without zeta/lambda grids the datasets are synthetic sub-graphs at each
/// target and every strategy in `strategies` runs. With a grid the input
/// data is used as is under the configured strategy.
pub fn cmd_sweep(interactions_path: &Path, social_path: Option<&Path>, settings: &Settings, out: &Path) -> Result<Vec<SweepRow>> {
    create_dir(out)?;
    let source = load_interactions(interactions_path, settings)?;
    let social = social_path.map(|p| load_social(p, &source)).transpose()?;
    let grid = !settings.zeta_grid.is_empty() || !settings.lambda_grid.is_empty();

    let data: Vec<SweepData> = if grid {
        let Some(social) = social.clone() else {
            bail!("a zeta/lambda sweep needs --social");
        };
        let achieved = graph_homophily(&social, &source, DEFAULT_BINS).graph_ratio;
        vec![SweepData {
            target: None,
            achieved,
            interactions: source,
            social,
        }]
    } else {
        settings
            .targets
            .iter()
            .map(|&t| {
                let g = synthesize_subgraph(&source, &subgraph_config(settings, t, social.as_ref()))
                    .with_context(|| format!("synthesizing H_s = {t}"))?;
                Ok(SweepData {
                    target: Some(t),
                    achieved: g.achieved,
                    interactions: g.interactions,
                    social: g.social,
                })
            })
            .collect::<Result<_>>()?
    };
    let strategies = if grid { vec![settings.train.strategy] } else { settings.strategies.clone() };
    let zetas = if settings.zeta_grid.is_empty() { vec![settings.train.zeta] } else { settings.zeta_grid.clone() };
    let lambdas = if settings.lambda_grid.is_empty() { vec![settings.train.lambda] } else { settings.lambda_grid.clone() };

    let mut jobs = Vec::new();
    for (d, _) in data.iter().enumerate() {
        for &strategy in &strategies {
            for &zeta in &zetas {
                for &lambda in &lambdas {
                    for seed in settings.seeds() {
                        let cfg = TrainConfig {
                            strategy,
                            zeta,
                            lambda,
                            seed,
                            ..settings.train.clone()
                        };
                        jobs.push((d, cfg));
                    }
                }
            }
        }
    }
    info!("sweep: {} runs over {} datasets", jobs.len(), data.len());
    let results = run_jobs(settings.parallel_cells, &jobs, |(d, cfg)| {
        run_once(cfg, &data[*d].interactions, &data[*d].social, settings)
    })?;
    let rows: Vec<SweepRow> = jobs
        .iter()
        .zip(results)
        .map(|((d, cfg), run)| SweepRow {
            target: data[*d].target,
            achieved: data[*d].achieved,
            strategy: cfg.strategy,
            zeta: cfg.zeta,
            lambda: cfg.lambda,
            run,
        })
        .collect();

    let fmt_target = |t: Option<f64>| t.map_or(String::new(), |t| t.to_string());
    let mut csv = String::from("h_target,h_achieved,strategy,zeta,lambda,seed,recall,precision,ndcg,best_epoch,epochs_run\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_target(r.target),
            r.achieved,
            r.strategy,
            r.zeta,
            r.lambda,
            r.run.seed,
            r.run.recall,
            r.run.precision,
            r.run.ndcg,
            r.run.best_epoch,
            r.run.epochs_run
        );
    }
    write_file(&out.join("sweep.csv"), &csv)?;

    let mut summary = String::from("h_target,h_achieved,strategy,zeta,lambda,runs,recall_mean,recall_std,precision_mean,precision_std,ndcg_mean,ndcg_std\n");
    let mut seen = Vec::new();
    for r in &rows {
        if seen.contains(&r.cell()) {
            continue;
        }
        seen.push(r.cell());
        let cell: Vec<&SweepRow> = rows.iter().filter(|x| x.cell() == r.cell()).collect();
        let stat = |f: fn(&RunResult) -> f64| mean_std(&cell.iter().map(|x| f(&x.run)).collect::<Vec<_>>());
        let (rm, rs) = stat(|x| x.recall);
        let (pm, ps) = stat(|x| x.precision);
        let (nm, ns) = stat(|x| x.ndcg);
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{rm},{rs},{pm},{ps},{nm},{ns}",
            fmt_target(r.target),
            r.achieved,
            r.strategy,
            r.zeta,
            r.lambda,
            cell.len()
        );
    }
    write_file(&out.join("sweep_summary.csv"), &summary)?;
    let mut m = Manifest::new("sweep");
    m.input("interactions", interactions_path)?;
    if let Some(p) = social_path {
        m.input("social", p)?;
    }
    m.note("runs", rows.len());
    m.write(out, settings)?;
    Ok(rows)
}
