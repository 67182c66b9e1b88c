//! Greedy hill climbing over DAGs with add / delete / reverse moves under BIC.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dag::Dag;
use super::score::{config_count, ScoreCache};
use crate::error::{Error, Result};
use crate::table::DiscreteTable;

/// Minimum score gain for a move to count as an improvement.
const MIN_GAIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StructureConfig {
    pub max_parents: usize,
    pub max_iters: usize,
    /// Extra runs from seeded random DAGs; the best-scoring result wins.
    pub restarts: usize,
    pub seed: u64,
    /// Families whose CPT would exceed this many cells are illegal.
    pub max_cpt_cells: u64,
}

impl Default for StructureConfig {
    fn default() -> Self {
        StructureConfig {
            max_parents: 4,
            max_iters: 1000,
            restarts: 0,
            seed: 0,
            max_cpt_cells: 1 << 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    Add,
    Delete,
    Reverse,
}

/// A search move on edge `parent -> child` (for `Reverse`, the edge before reversal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub parent: usize,
    pub child: usize,
}

impl Move {
    pub fn apply(&self, dag: &mut Dag) {
        match self.kind {
            MoveKind::Add => dag.add_edge(self.parent, self.child),
            MoveKind::Delete => dag.remove_edge(self.parent, self.child),
            MoveKind::Reverse => {
                dag.remove_edge(self.parent, self.child);
                dag.add_edge(self.child, self.parent);
            }
        }
    }
}

/// Accepted moves of the winning run, with the total score after each.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrace {
    pub start: Dag,
    pub start_score: f64,
    pub moves: Vec<Move>,
    pub scores: Vec<f64>,
}

struct Climber<'a> {
    table: &'a DiscreteTable,
    cfg: &'a StructureConfig,
    cache: ScoreCache,
}

impl Climber<'_> {
    fn fits(&self, child: usize, parents: &[usize]) -> bool {
        parents.len() <= self.cfg.max_parents
            && config_count(self.table, parents)
                .and_then(|q| q.checked_mul(self.table.variables[child].card() as u64))
                .is_some_and(|cells| cells <= self.cfg.max_cpt_cells)
    }

    fn with(parents: &[usize], extra: usize) -> Vec<usize> {
        let mut v = parents.to_vec();
        if let Err(pos) = v.binary_search(&extra) {
            v.insert(pos, extra);
        }
        v
    }

    fn without(parents: &[usize], gone: usize) -> Vec<usize> {
        parents.iter().copied().filter(|&p| p != gone).collect()
    }

    /// Score change of a legal move, or `None` if the move is illegal.
    fn delta(&mut self, dag: &mut Dag, m: Move) -> Option<f64> {
        let (p, c) = (m.parent, m.child);
        let table = self.table;
        match m.kind {
            MoveKind::Add => {
                if dag.has_edge(p, c) || dag.reaches(c, p) {
                    return None;
                }
                let old = dag.parents_of(c).to_vec();
                let new = Self::with(&old, p);
                if !self.fits(c, &new) {
                    return None;
                }
                Some(self.cache.family(table, c, &new) - self.cache.family(table, c, &old))
            }
            MoveKind::Delete => {
                if !dag.has_edge(p, c) {
                    return None;
                }
                let old = dag.parents_of(c).to_vec();
                let new = Self::without(&old, p);
                Some(self.cache.family(table, c, &new) - self.cache.family(table, c, &old))
            }
            MoveKind::Reverse => {
                if !dag.has_edge(p, c) {
                    return None;
                }
                dag.remove_edge(p, c);
                let cyclic = dag.reaches(p, c);
                dag.add_edge(p, c);
                if cyclic {
                    return None;
                }
                let old_c = dag.parents_of(c).to_vec();
                let old_p = dag.parents_of(p).to_vec();
                let new_c = Self::without(&old_c, p);
                let new_p = Self::with(&old_p, c);
                if !self.fits(p, &new_p) {
                    return None;
                }
                Some(
                    self.cache.family(table, c, &new_c) - self.cache.family(table, c, &old_c)
                        + self.cache.family(table, p, &new_p)
                        - self.cache.family(table, p, &old_p),
                )
            }
        }
    }

    fn climb(&mut self, start: Dag) -> (Dag, SearchTrace) {
        let n = start.len();
        let mut dag = start.clone();
        let mut score = self.cache.total(self.table, &dag);
        let mut trace = SearchTrace {
            start,
            start_score: score,
            moves: Vec::new(),
            scores: Vec::new(),
        };
        for _ in 0..self.cfg.max_iters {
            let mut best: Option<(f64, Move)> = None;
            // Enumeration order is the tie-break: (kind, parent, child) ascending.
            for kind in [MoveKind::Add, MoveKind::Delete, MoveKind::Reverse] {
                for parent in 0..n {
                    for child in 0..n {
                        if parent == child {
                            continue;
                        }
                        let m = Move {
                            kind,
                            parent,
                            child,
                        };
                        if let Some(d) = self.delta(&mut dag, m) {
                            if best.is_none_or(|(b, _)| d > b) {
                                best = Some((d, m));
                            }
                        }
                    }
                }
            }
            match best {
                Some((gain, m)) if gain > MIN_GAIN => {
                    m.apply(&mut dag);
                    let next = score + gain;
                    assert!(next > score, "accepted move must strictly increase BIC");
                    score = next;
                    trace.moves.push(m);
                    trace.scores.push(score);
                }
                _ => break,
            }
        }
        (dag, trace)
    }
}

fn random_dag(table: &DiscreteTable, cfg: &StructureConfig, rng: &mut ChaCha8Rng) -> Dag {
    let n = table.n_vars();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut dag = Dag::empty(table.variables.iter().map(|v| v.name.clone()).collect());
    for i in 1..n {
        let child = order[i];
        for &parent in &order[..i] {
            if rng.gen_bool(0.3) {
                let mut ps = dag.parents_of(child).to_vec();
                ps.push(parent);
                ps.sort_unstable();
                let ok = ps.len() <= cfg.max_parents
                    && config_count(table, &ps)
                        .and_then(|q| q.checked_mul(table.variables[child].card() as u64))
                        .is_some_and(|c| c <= cfg.max_cpt_cells);
                if ok {
                    dag.add_edge(parent, child);
                }
            }
        }
    }
    dag
}

/// Learns a DAG over the table's variables and returns the winning run's trace.
pub fn learn_structure_traced(
    table: &DiscreteTable,
    cfg: &StructureConfig,
) -> Result<(Dag, SearchTrace)> {
    if table.n_vars() == 0 || table.n_rows() == 0 {
        return Err(Error::Data(
            "structure learning needs at least one column and one row".into(),
        ));
    }
    let mut climber = Climber {
        table,
        cfg,
        cache: ScoreCache::new(),
    };
    let empty = Dag::empty(table.variables.iter().map(|v| v.name.clone()).collect());
    let (mut best_dag, mut best_trace) = climber.climb(empty);
    let mut best_score = *best_trace.scores.last().unwrap_or(&best_trace.start_score);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.restarts {
        let start = random_dag(table, cfg, &mut rng);
        let (dag, trace) = climber.climb(start);
        let score = *trace.scores.last().unwrap_or(&trace.start_score);
        if score > best_score + MIN_GAIN {
            best_dag = dag;
            best_trace = trace;
            best_score = score;
        }
    }
    Ok((best_dag, best_trace))
}

pub fn learn_structure(table: &DiscreteTable, cfg: &StructureConfig) -> Result<Dag> {
    learn_structure_traced(table, cfg).map(|(d, _)| d)
}
