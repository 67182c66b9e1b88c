use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directed acyclic graph over named nodes. Parent lists are kept sorted by node index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    parents: Vec<Vec<usize>>,
}

/// Serialized form: node names plus `(parent, child)` edge list.
#[derive(Serialize, Deserialize)]
struct DagDoc {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
}

impl Serialize for Dag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DagDoc {
            nodes: self.nodes.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(p, c)| (self.nodes[p].clone(), self.nodes[c].clone()))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = DagDoc::deserialize(d)?;
        let edges: Vec<(&str, &str)> = doc
            .edges
            .iter()
            .map(|(p, c)| (p.as_str(), c.as_str()))
            .collect();
        Dag::from_edges(doc.nodes.clone(), &edges).map_err(serde::de::Error::custom)
    }
}

impl Dag {
    pub fn empty(nodes: Vec<String>) -> Self {
        let n = nodes.len();
        Dag {
            nodes,
            parents: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(nodes: Vec<String>, edges: &[(&str, &str)]) -> Result<Self> {
        let mut dag = Dag::empty(nodes);
        for (p, c) in edges {
            let pi = dag
                .index(p)
                .ok_or_else(|| Error::Data(format!("edge references unknown node `{p}`")))?;
            let ci = dag
                .index(c)
                .ok_or_else(|| Error::Data(format!("edge references unknown node `{c}`")))?;
            if pi == ci {
                return Err(Error::Data(format!("self-loop on `{p}`")));
            }
            if dag.has_edge(pi, ci) {
                continue;
            }
            if dag.reaches(ci, pi) {
                return Err(Error::Data(format!("edge `{p}` -> `{c}` closes a cycle")));
            }
            dag.add_edge(pi, ci);
        }
        Ok(dag)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn parents_of(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child].binary_search(&parent).is_ok()
    }

    pub fn add_edge(&mut self, parent: usize, child: usize) {
        if let Err(pos) = self.parents[child].binary_search(&parent) {
            self.parents[child].insert(pos, parent);
        }
    }

    pub fn remove_edge(&mut self, parent: usize, child: usize) {
        if let Ok(pos) = self.parents[child].binary_search(&parent) {
            self.parents[child].remove(pos);
        }
    }

    /// All `(parent, child)` pairs, ordered by child then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect();
        out.sort_by_key(|&(p, c)| (c, p));
        out
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Whether a directed path `from` ->* `to` exists.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        // Walk parent links backwards from `to`.
        let mut seen = vec![false; self.len()];
        let mut stack = vec![to];
        while let Some(n) = stack.pop() {
            for &p in &self.parents[n] {
                if p == from {
                    return true;
                }
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        false
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).rev().collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Nodes with no parents, in node order.
    pub fn roots(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.parents[i].is_empty())
            .collect()
    }

    /// Undirected edge set `{min, max}`.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        let mut s: Vec<(usize, usize)> = self
            .edges()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}
