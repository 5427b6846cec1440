//! Synthetic data.
//!
//! [`synthesize_subgraph`] samples a few hundred users from a source dataset
//! and builds a social graph among them whose graph-wise homophily hits a
//! requested value. [`community_dataset`] produces a source dataset with
//! planted preference communities for when no real data is at hand.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{InteractionGraph, SocialGraph};
use crate::homophily::jaccard;
use crate::par;
use crate::rng::{self, Stream};

/// Settings for [`synthesize_subgraph`].
#[derive(Clone, Debug, PartialEq)]
pub struct SubgraphConfig {
    pub target: f64,
    /// Inclusive range for the number of sampled users.
    pub users: (usize, usize),
    /// Mean number of social neighbors per sampled user.
    pub avg_degree: f64,
    /// Largest accepted `|achieved - target|`.
    pub tolerance: f64,
    pub seed: u64,
}

impl SubgraphConfig {
    pub fn new(target: f64, users: (usize, usize), seed: u64) -> Self {
        SubgraphConfig {
            target,
            users,
            avg_degree: 10.0,
            tolerance: 0.02,
            seed,
        }
    }

    /// Uses the mean degree of `social` as the edge budget.
    pub fn matching_degree(mut self, social: &SocialGraph) -> Self {
        if social.num_users() > 0 {
            self.avg_degree = 2.0 * social.num_edges() as f64 / social.num_users() as f64;
        }
        self
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticGraph {
    pub social: SocialGraph,
    pub interactions: InteractionGraph,
    /// Source indices of the sampled users, in their new index order.
    pub users: Vec<usize>,
    pub achieved: f64,
}

/// Samples a user subset, induces its interactions, and mixes high- and
/// low-homophily candidate pairs until the running mean of edge ratios sits
/// at the target.
///
/// Candidate pairs are split at the target into a low pool (`h <= target`)
/// and a high pool (`h > target`), each shuffled with the seed. Each step
/// takes the next pair from whichever pool leaves the running mean closer to
/// the target, until the edge budget `round(avg_degree * users / 2)` is met.
pub fn synthesize_subgraph(source: &InteractionGraph, config: &SubgraphConfig) -> Result<SyntheticGraph> {
    let (lo, hi) = config.users;
    if lo > hi || lo < 2 {
        return Err(Error::Config(format!("invalid user range [{lo}, {hi}]")));
    }
    if !(0.0..=1.0).contains(&config.target) {
        return Err(Error::Config(format!("target {} outside [0, 1]", config.target)));
    }
    let mut rng = rng::stream(config.seed, Stream::Synth);

    let eligible: Vec<usize> = (0..source.num_users())
        .filter(|&u| !source.train_items(u).is_empty())
        .collect();
    let count = rng.gen_range(lo..=hi);
    if count > eligible.len() {
        return Err(Error::Config(format!(
            "need {count} users with training interactions, source has {}",
            eligible.len()
        )));
    }
    let mut picked: Vec<usize> = index::sample(&mut rng, eligible.len(), count)
        .into_iter()
        .map(|k| eligible[k])
        .collect();
    picked.sort_unstable();
    let interactions = source.induced(&picked)?;

    let sets = interactions.train_item_sets();
    let rows: Vec<Vec<(usize, usize, f64)>> = par::map_indices(count, |i| {
        ((i + 1)..count)
            .map(|j| (i, j, jaccard(&sets[i], &sets[j])))
            .collect()
    });
    let (mut low, mut high): (Vec<_>, Vec<_>) = rows
        .into_iter()
        .flatten()
        .partition(|&(_, _, h)| h <= config.target);
    low.shuffle(&mut rng);
    high.shuffle(&mut rng);

    let total_pairs = low.len() + high.len();
    let budget = ((config.avg_degree * count as f64 / 2.0).round() as usize).clamp(1, total_pairs);

    let (mut chosen, mut achieved) = mix_pools(&low, &high, budget, config.target);
    if (achieved - config.target).abs() > config.tolerance {
        // too few strong pairs in random order: spend the strongest first
        high.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        (chosen, achieved) = mix_pools(&low, &high, budget, config.target);
    }
    if (achieved - config.target).abs() > config.tolerance {
        let best = if achieved < config.target {
            // ceiling: the `budget` strongest pairs
            let mut hs: Vec<f64> = low.iter().chain(&high).map(|p| p.2).collect();
            hs.sort_by(|a, b| b.total_cmp(a));
            hs[..budget].iter().sum::<f64>() / budget as f64
        } else {
            achieved
        };
        return Err(Error::UnreachableTarget {
            target: config.target,
            best,
        });
    }
    Ok(SyntheticGraph {
        social: SocialGraph::from_pairs(count, &chosen),
        interactions,
        users: picked,
        achieved,
    })
}

/// Greedy walk over both pools keeping the running mean nearest `target`.
fn mix_pools(low: &[(usize, usize, f64)], high: &[(usize, usize, f64)], budget: usize, target: f64) -> (Vec<(usize, usize)>, f64) {
    let mut chosen = Vec::with_capacity(budget);
    let (mut sum, mut li, mut hi) = (0.0f64, 0usize, 0usize);
    while chosen.len() < budget {
        let n = chosen.len() as f64 + 1.0;
        let gap = |e: &(usize, usize, f64)| ((sum + e.2) / n - target).abs();
        let take_high = match (low.get(li).map(gap), high.get(hi).map(gap)) {
            (Some(a), Some(b)) => b < a,
            (None, Some(_)) => true,
            (Some(_), None) => false,
            (None, None) => break,
        };
        let e = if take_high {
            hi += 1;
            high[hi - 1]
        } else {
            li += 1;
            low[li - 1]
        };
        sum += e.2;
        chosen.push((e.0, e.1));
    }
    let achieved = if chosen.is_empty() { 0.0 } else { sum / chosen.len() as f64 };
    (chosen, achieved)
}

/// Planted-community interaction and social data.
///
/// Items are partitioned evenly into communities and users are spread over
/// communities round-robin. Within a community users are split into taste
/// groups; each group owns a core of community items that members adopt
/// independently with probability `core_adoption`. On top of the core every
/// user draws a personal set, mostly from its community with a Zipf-like
/// popularity skew and otherwise uniformly from the whole catalogue. Social
/// ties connect same-community users with probability `social_homophily`,
/// otherwise a uniformly random user.
#[derive(Clone, Debug, PartialEq)]
pub struct CommunityConfig {
    pub users: usize,
    pub items: usize,
    pub communities: usize,
    pub groups_per_community: usize,
    pub core_items: usize,
    pub core_adoption: f64,
    /// Inclusive range of personal interactions per user, beyond the core.
    pub interactions_per_user: (usize, usize),
    pub in_community: f64,
    pub zipf_exponent: f64,
    pub avg_degree: f64,
    pub social_homophily: f64,
    pub seed: u64,
}

impl Default for CommunityConfig {
    fn default() -> Self {
        CommunityConfig {
            users: 1200,
            items: 1600,
            communities: 8,
            groups_per_community: 4,
            core_items: 20,
            core_adoption: 0.95,
            interactions_per_user: (3, 12),
            in_community: 0.8,
            zipf_exponent: 1.0,
            avg_degree: 12.0,
            social_homophily: 0.3,
            seed: 0,
        }
    }
}

pub fn community_dataset(config: &CommunityConfig) -> Result<(InteractionGraph, SocialGraph)> {
    let c = config.communities.max(1);
    if config.items < c || config.users < 2 {
        return Err(Error::Config("community dataset needs items >= communities and users >= 2".into()));
    }
    let (kmin, kmax) = config.interactions_per_user;
    let per_comm = config.items / c;
    if kmin > kmax || config.core_items + kmax > per_comm {
        return Err(Error::Config(format!(
            "{} core plus {kmin}..={kmax} personal items must fit within {per_comm} community items",
            config.core_items
        )));
    }
    let mut rng = rng::stream(config.seed, Stream::Generator);

    let groups = config.groups_per_community.max(1);
    let community_of: Vec<usize> = (0..config.users).map(|u| u % c).collect();
    let group_of: Vec<usize> = (0..config.users).map(|u| (u / c) % groups).collect();
    let cores: Vec<Vec<usize>> = (0..c * groups)
        .map(|g| {
            let base = (g / groups) * per_comm;
            index::sample(&mut rng, per_comm, config.core_items)
                .into_iter()
                .map(|k| base + k)
                .collect()
        })
        .collect();
    let popularity: Vec<f64> = (0..per_comm)
        .map(|r| 1.0 / ((r + 1) as f64).powf(config.zipf_exponent))
        .collect();
    let zipf = WeightedIndex::new(&popularity).map_err(|e| Error::Config(e.to_string()))?;

    let mut edges = Vec::new();
    for u in 0..config.users {
        let comm = community_of[u];
        let mut items: Vec<usize> = cores[comm * groups + group_of[u]]
            .iter()
            .copied()
            .filter(|_| rng.gen::<f64>() < config.core_adoption)
            .collect();
        let k = items.len() + rng.gen_range(kmin..=kmax);
        while items.len() < k {
            let v = if rng.gen::<f64>() < config.in_community {
                comm * per_comm + zipf.sample(&mut rng)
            } else {
                rng.gen_range(0..config.items)
            };
            if !items.contains(&v) {
                items.push(v);
            }
        }
        edges.extend(items.into_iter().map(|v| (u, v, 1.0)));
    }
    let interactions = InteractionGraph::from_edges(config.users, config.items, &edges)?;

    let members: Vec<Vec<usize>> = (0..c)
        .map(|k| (0..config.users).filter(|&u| community_of[u] == k).collect())
        .collect();
    let target_edges = (config.avg_degree * config.users as f64 / 2.0).round() as usize;
    let mut pairs = Vec::with_capacity(target_edges);
    let mut seen = std::collections::HashSet::new();
    let mut attempts = 0usize;
    while pairs.len() < target_edges && attempts < 50 * target_edges.max(1) {
        attempts += 1;
        let i = rng.gen_range(0..config.users);
        let j = if rng.gen::<f64>() < config.social_homophily {
            *members[community_of[i]].choose(&mut rng).unwrap()
        } else {
            rng.gen_range(0..config.users)
        };
        if i != j && seen.insert((i.min(j), i.max(j))) {
            pairs.push((i, j));
        }
    }
    Ok((interactions, SocialGraph::from_pairs(config.users, &pairs)))
}
