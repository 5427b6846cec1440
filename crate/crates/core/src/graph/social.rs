use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::sparse::Csr;
use crate::Real;

/// Undirected, optionally weighted user-user graph.
///
/// Edges are stored once as `(i, j, w)` with `i < j`, sorted by `(i, j)`;
/// symmetry and the absence of self-loops hold by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SocialGraph {
    num_users: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl SocialGraph {
    pub fn empty(num_users: usize) -> Self {
        SocialGraph {
            num_users,
            edges: Vec::new(),
        }
    }

    /// Unweighted graph from arbitrary pairs: both directions are merged and
    /// self-loops dropped.
    pub fn from_pairs(num_users: usize, pairs: &[(usize, usize)]) -> Self {
        let weighted: Vec<(usize, usize, f64)> = pairs.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::from_weighted(num_users, &weighted)
    }

    /// Weighted graph from arbitrary triples. When a pair appears more than
    /// once the largest weight wins.
    pub fn from_weighted(num_users: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut canon: Vec<(usize, usize, f64)> = edges
            .iter()
            .filter(|&&(i, j, _)| i != j)
            .map(|&(i, j, w)| {
                assert!(i < num_users && j < num_users, "edge ({i}, {j}) out of range");
                (i.min(j), i.max(j), w)
            })
            .collect();
        canon.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(b.2.total_cmp(&a.2)));
        canon.dedup_by(|later, first| later.0 == first.0 && later.1 == first.1);
        SocialGraph {
            num_users,
            edges: canon,
        }
    }

    /// Reads `user user [weight]` lines, resolving ids through the interaction
    /// graph's user index. Unresolvable ids are skipped and counted.
    pub fn load(path: &Path, users: &HashMap<&str, usize>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        let mut unknown = 0usize;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("expected 2-3 fields, found {}", fields.len()),
                });
            }
            let weight = match fields.get(2) {
                None => 1.0,
                // header rows ("userID friendID") fall through as unknown ids
                Some(s) => s.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("invalid weight {s:?}"),
                })?,
            };
            match (users.get(fields[0]), users.get(fields[1])) {
                (Some(&i), Some(&j)) => pairs.push((i, j, weight)),
                _ => unknown += 1,
            }
        }
        if unknown > 0 {
            warn!(
                "{}: skipped {unknown} relation lines with unknown user ids",
                path.display()
            );
        }
        let g = Self::from_weighted(users.len(), &pairs);
        if g.num_edges() == 0 {
            return Err(Error::EmptyGraph(format!(
                "no resolvable social relations in {}",
                path.display()
            )));
        }
        Ok(g)
    }

    /// Writes one line per undirected edge. Weights are emitted only when the
    /// graph is not uniformly weighted 1.
    pub fn write(&self, path: &Path, user_ids: &[String]) -> Result<()> {
        let weighted = self.edges.iter().any(|e| e.2 != 1.0);
        let mut w = BufWriter::new(fs::File::create(path)?);
        for &(i, j, wt) in &self.edges {
            if weighted {
                writeln!(w, "{} {} {}", user_ids[i], user_ids[j], wt)?;
            } else {
                writeln!(w, "{} {}", user_ids[i], user_ids[j])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Undirected edges `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(i, j, _)| (i, j))
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.weight(i, j).is_some()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .ok()
            .map(|k| self.edges[k].2)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == u || e.1 == u).count()
    }

    /// Neighbor lists `(neighbor, weight)`, sorted by neighbor.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_users];
        for &(i, j, w) in &self.edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        for list in &mut adj {
            list.sort_by_key(|e| e.0);
        }
        adj
    }

    /// Symmetric weighted adjacency matrix.
    pub fn to_csr(&self) -> Csr {
        let mut triplets = Vec::with_capacity(2 * self.edges.len());
        for &(i, j, w) in &self.edges {
            triplets.push((i, j, w as Real));
            triplets.push((j, i, w as Real));
        }
        Csr::from_triplets(self.num_users, self.num_users, &triplets)
    }

    pub fn with_unit_weights(&self) -> Self {
        SocialGraph {
            num_users: self.num_users,
            edges: self.edges.iter().map(|&(i, j, _)| (i, j, 1.0)).collect(),
        }
    }

    pub fn weight_stats(&self) -> Option<(f64, f64, f64)> {
        if self.edges.is_empty() {
            return None;
        }
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for e in &self.edges {
            lo = lo.min(e.2);
            hi = hi.max(e.2);
            sum += e.2;
        }
        Some((lo, hi, sum / self.edges.len() as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&'static str]) -> HashMap<&'static str, usize> {
        names.iter().enumerate().map(|(i, &n)| (n, i)).collect()
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn symmetrize_and_drop_self_loops() {
        let f = write_tmp("a b\nb a\na a\n");
        let g = SocialGraph::load(f.path(), &ids(&["a", "b"])).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0)]);
        assert!(g.contains(1, 0));
    }

    #[test]
    fn path_graph_degree() {
        let f = write_tmp("a b\nb c\n");
        let g = SocialGraph::load(f.path(), &ids(&["a", "b", "c"])).unwrap();
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn unknown_ids_are_skipped() {
        let f = write_tmp("a b\na zzz\nqq rr\n");
        let g = SocialGraph::load(f.path(), &ids(&["a", "b"])).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn zero_resolvable_edges_is_an_error() {
        let f = write_tmp("x y\na a\n");
        let r = SocialGraph::load(f.path(), &ids(&["a", "b"]));
        assert!(matches!(r, Err(Error::EmptyGraph(_))));
    }

    #[test]
    fn csr_is_symmetric() {
        let g = SocialGraph::from_weighted(4, &[(0, 1, 0.5), (2, 1, 0.25), (3, 0, 1.0)]);
        let s = g.to_csr();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(s.get(i, j), s.get(j, i));
            }
        }
        assert_eq!(s.get(1, 2), 0.25);
    }

    #[test]
    fn write_then_load_round_trips() {
        let names = ["a", "b", "c", "d"];
        let user_ids: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let g = SocialGraph::from_pairs(4, &[(0, 1), (3, 2), (1, 3)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        g.write(&path, &user_ids).unwrap();
        let back = SocialGraph::load(&path, &ids(&names)).unwrap();
        assert_eq!(back, g);

        let w = SocialGraph::from_weighted(4, &[(0, 1, 0.125), (2, 3, 0.75)]);
        w.write(&path, &user_ids).unwrap();
        assert_eq!(SocialGraph::load(&path, &ids(&names)).unwrap(), w);
    }
}
