use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::sparse::Csr;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split tag {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interaction {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
    pub split: Split,
}

/// Bipartite user-item graph with per-edge split tags.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionGraph {
    num_users: usize,
    num_items: usize,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    edges: Vec<Interaction>,
    train_items: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Drop interactions whose rating is below this value.
    pub rating_threshold: Option<f64>,
}

impl InteractionGraph {
    /// Builds a graph from index triples; every edge starts in the training
    /// split. Duplicate pairs keep the maximum rating.
    pub fn from_edges(num_users: usize, num_items: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let tagged: Vec<Interaction> = edges
            .iter()
            .map(|&(user, item, rating)| Interaction {
                user,
                item,
                rating,
                split: Split::Train,
            })
            .collect();
        Self::from_interactions(num_users, num_items, tagged)
    }

    pub fn from_interactions(num_users: usize, num_items: usize, edges: Vec<Interaction>) -> Result<Self> {
        let user_ids = (0..num_users).map(|u| u.to_string()).collect();
        let item_ids = (0..num_items).map(|v| v.to_string()).collect();
        Self::with_ids(user_ids, item_ids, edges)
    }

    pub fn with_ids(user_ids: Vec<String>, item_ids: Vec<String>, edges: Vec<Interaction>) -> Result<Self> {
        let num_users = user_ids.len();
        let num_items = item_ids.len();
        for e in &edges {
            if e.user >= num_users || e.item >= num_items {
                return Err(Error::Config(format!(
                    "interaction ({}, {}) outside {num_users}x{num_items}",
                    e.user, e.item
                )));
            }
        }
        let edges = dedup_keep_max(edges);
        let mut g = InteractionGraph {
            num_users,
            num_items,
            user_ids,
            item_ids,
            edges,
            train_items: Vec::new(),
        };
        g.rebuild_train_sets();
        Ok(g)
    }

    /// Reads `user item [rating [split]]` lines. Blank lines and `#` comments
    /// are ignored, and a leading header row (non-numeric rating) is skipped.
    pub fn load(path: &Path, options: LoadOptions) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut user_index: HashMap<String, usize> = HashMap::new();
        let mut item_index: HashMap<String, usize> = HashMap::new();
        let mut user_ids = Vec::new();
        let mut item_ids = Vec::new();
        let mut raw = Vec::new();
        let mut seen_data = false;

        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message,
            };
            if fields.len() < 2 || fields.len() > 4 {
                return Err(parse_err(format!("expected 2-4 fields, found {}", fields.len())));
            }
            let rating = match fields.get(2) {
                None => 1.0,
                Some(s) => match s.parse::<f64>() {
                    Ok(r) if r.is_finite() => r,
                    Ok(_) => return Err(parse_err(format!("non-finite rating {s:?}"))),
                    Err(_) if !seen_data && fields.len() == 3 => {
                        // header row such as "userID artistID weight"
                        seen_data = true;
                        continue;
                    }
                    Err(_) => return Err(parse_err(format!("invalid rating {s:?}"))),
                },
            };
            let split = match fields.get(3) {
                None => Split::Train,
                Some(s) => s.parse::<Split>().map_err(parse_err)?,
            };
            seen_data = true;
            let user = intern(&mut user_index, &mut user_ids, fields[0]);
            let item = intern(&mut item_index, &mut item_ids, fields[1]);
            raw.push(Interaction {
                user,
                item,
                rating,
                split,
            });
        }

        let mut edges = dedup_keep_max(raw);
        if let Some(threshold) = options.rating_threshold {
            edges.retain(|e| e.rating >= threshold);
        }
        if edges.is_empty() {
            return Err(Error::EmptyGraph(format!(
                "no interactions left in {} after filtering",
                path.display()
            )));
        }
        let mut g = InteractionGraph {
            num_users: user_ids.len(),
            num_items: item_ids.len(),
            user_ids,
            item_ids,
            edges,
            train_items: Vec::new(),
        };
        g.rebuild_train_sets();
        Ok(g)
    }

    /// Writes `user item rating split` lines using the original identifiers.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        for e in &self.edges {
            writeln!(
                w,
                "{} {} {} {}",
                self.user_ids[e.user], self.item_ids[e.item], e.rating, e.split
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Assigns split tags by shuffling the edges with the seed and cutting the
    /// shuffled order at the cumulative ratios.
    pub fn split(mut self, ratios: [f64; 3], seed: u64) -> Result<Self> {
        let sum: f64 = ratios.iter().sum();
        if ratios.iter().any(|r| !(*r >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRatios(ratios));
        }
        if self.edges.is_empty() {
            return Err(Error::EmptyGraph("cannot split an empty interaction graph".into()));
        }
        let total = self.edges.len();
        let mut order: Vec<usize> = (0..total).collect();
        order.shuffle(&mut rng::stream(seed, Stream::Split));

        let n_train = ((ratios[0] * total as f64).round() as usize).min(total);
        let n_val = ((ratios[1] * total as f64).round() as usize).min(total - n_train);
        for (rank, &idx) in order.iter().enumerate() {
            self.edges[idx].split = if rank < n_train {
                Split::Train
            } else if rank < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
        self.rebuild_train_sets();
        Ok(self)
    }

    fn rebuild_train_sets(&mut self) {
        let mut sets = vec![Vec::new(); self.num_users];
        for e in self.edges.iter().filter(|e| e.split == Split::Train) {
            sets[e.user].push(e.item);
        }
        for s in &mut sets {
            s.sort_unstable();
        }
        self.train_items = sets;
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn edges(&self) -> &[Interaction] {
        &self.edges
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.user_ids.iter().position(|u| u == id)
    }

    pub fn user_index_map(&self) -> HashMap<&str, usize> {
        self.user_ids
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect()
    }

    /// Sorted training items of `user`.
    pub fn train_items(&self, user: usize) -> &[usize] {
        &self.train_items[user]
    }

    pub fn train_item_sets(&self) -> &[Vec<usize>] {
        &self.train_items
    }

    /// Sorted items of each user in the given split.
    pub fn items_by_user(&self, split: Split) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.num_users];
        for e in self.edges.iter().filter(|e| e.split == split) {
            sets[e.user].push(e.item);
        }
        for s in &mut sets {
            s.sort_unstable();
        }
        sets
    }

    pub fn count(&self, split: Split) -> usize {
        self.edges.iter().filter(|e| e.split == split).count()
    }

    pub fn train_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .filter(|e| e.split == Split::Train)
            .map(|e| (e.user, e.item))
            .collect()
    }

    /// Binary user x item matrix of the training split.
    pub fn train_matrix(&self) -> Csr {
        let triplets: Vec<(usize, usize, Real)> = self
            .train_edges()
            .into_iter()
            .map(|(u, v)| (u, v, 1.0))
            .collect();
        Csr::from_triplets(self.num_users, self.num_items, &triplets)
    }

    /// Restricts the graph to `users` (in the given order), re-indexing users
    /// and keeping only items that still have an interaction. Split tags are
    /// preserved.
    pub fn induced(&self, users: &[usize]) -> Result<Self> {
        let mut new_user = vec![usize::MAX; self.num_users];
        for (k, &u) in users.iter().enumerate() {
            new_user[u] = k;
        }
        let mut new_item = vec![usize::MAX; self.num_items];
        let mut item_ids = Vec::new();
        let mut kept = Vec::new();
        for e in &self.edges {
            let nu = new_user[e.user];
            if nu == usize::MAX {
                continue;
            }
            if new_item[e.item] == usize::MAX {
                new_item[e.item] = item_ids.len();
                item_ids.push(self.item_ids[e.item].clone());
            }
            kept.push(Interaction {
                user: nu,
                item: new_item[e.item],
                ..*e
            });
        }
        let user_ids = users.iter().map(|&u| self.user_ids[u].clone()).collect();
        InteractionGraph::with_ids(user_ids, item_ids, kept)
    }
}

fn intern(index: &mut HashMap<String, usize>, ids: &mut Vec<String>, key: &str) -> usize {
    if let Some(&i) = index.get(key) {
        return i;
    }
    let i = ids.len();
    index.insert(key.to_string(), i);
    ids.push(key.to_string());
    i
}

fn dedup_keep_max(edges: Vec<Interaction>) -> Vec<Interaction> {
    let mut slot: HashMap<(usize, usize), usize> = HashMap::with_capacity(edges.len());
    let mut out: Vec<Interaction> = Vec::with_capacity(edges.len());
    for e in edges {
        match slot.get(&(e.user, e.item)) {
            Some(&k) => {
                if e.rating > out[k].rating {
                    out[k] = e;
                }
            }
            None => {
                slot.insert((e.user, e.item), out.len());
                out.push(e);
            }
        }
    }
    out
}
