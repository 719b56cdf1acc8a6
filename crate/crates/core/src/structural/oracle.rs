//! Independent subtyping decision by term automata.
//!
//! Each type becomes a state in a finite graph whose nodes are the records
//! reachable by unfolding and projecting. Subtyping is then the greatest
//! simulation on that graph, found by deleting pairs until nothing changes.
//! No assumption sets and no recursion over pairs are involved.

use std::collections::{BTreeMap, HashMap};

use super::types::{Record, StructuralType};
use crate::syntax::Label;

type StateId = usize;

#[derive(Debug, Clone, Default)]
struct State {
    fields: BTreeMap<Label, StateId>,
    methods: BTreeMap<Label, (Vec<StateId>, StateId)>,
}

/// Canonical term graph over a set of closed, contractive types.
#[derive(Debug, Default)]
pub struct TermGraph {
    states: Vec<State>,
    index: HashMap<Record, StateId>,
}

impl TermGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Adds `ty` and everything reachable from it; returns its state.
    pub fn add(&mut self, ty: &StructuralType) -> StateId {
        let record = ty.head_record();
        if let Some(&id) = self.index.get(&record) {
            return id;
        }
        let id = self.states.len();
        self.states.push(State::default());
        self.index.insert(record.clone(), id);
        let mut state = State::default();
        for (label, field) in &record.fields {
            state.fields.insert(label.clone(), self.add(field));
        }
        for (label, method) in &record.methods {
            let params = method.params.iter().map(|p| self.add(p)).collect();
            let ret = self.add(&method.ret);
            state.methods.insert(label.clone(), (params, ret));
        }
        self.states[id] = state;
        id
    }
}

/// Greatest simulation over a term graph.
#[derive(Debug)]
pub struct SimulationOracle {
    graph: TermGraph,
    related: Vec<bool>,
}

impl SimulationOracle {
    pub fn new<'t>(types: impl IntoIterator<Item = &'t StructuralType>) -> Self {
        let mut graph = TermGraph::new();
        for ty in types {
            graph.add(ty);
        }
        let related = greatest_simulation(&graph);
        SimulationOracle { graph, related }
    }

    /// Answers `s <: t`. Types not seen at construction are added, which
    /// forces the simulation to be recomputed.
    pub fn query(&mut self, s: &StructuralType, t: &StructuralType) -> bool {
        let before = self.graph.len();
        let (p, q) = (self.graph.add(s), self.graph.add(t));
        if self.graph.len() != before {
            self.related = greatest_simulation(&self.graph);
        }
        self.related[p * self.graph.len() + q]
    }

    /// The state of `ty`, adding it if needed. Valid until the next addition.
    pub fn state(&mut self, ty: &StructuralType) -> usize {
        let before = self.graph.len();
        let id = self.graph.add(ty);
        if self.graph.len() != before {
            self.related = greatest_simulation(&self.graph);
        }
        id
    }

    /// `p <: q` for states returned by [`SimulationOracle::state`].
    pub fn relates(&self, p: usize, q: usize) -> bool {
        self.related[p * self.graph.len() + q]
    }

    pub fn state_count(&self) -> usize {
        self.graph.len()
    }
}

/// `related[p * n + q]` holds when state `p` is simulated as a subtype of `q`.
fn greatest_simulation(graph: &TermGraph) -> Vec<bool> {
    let n = graph.len();
    let states = &graph.states;
    let mut related = vec![false; n * n];

    // Start from every pair whose labels and arities line up locally.
    for (p, sp) in states.iter().enumerate() {
        for (q, sq) in states.iter().enumerate() {
            let fields_ok = sq.fields.keys().all(|l| sp.fields.contains_key(l));
            let methods_ok = sq.methods.iter().all(|(l, (params, _))| {
                sp.methods
                    .get(l)
                    .is_some_and(|(have, _)| have.len() == params.len())
            });
            related[p * n + q] = fields_ok && methods_ok;
        }
    }

    loop {
        let mut changed = false;
        for p in 0..n {
            for q in 0..n {
                if !related[p * n + q] {
                    continue;
                }
                let (sp, sq) = (&states[p], &states[q]);
                let fields_ok = sq
                    .fields
                    .iter()
                    .all(|(l, &fq)| related[sp.fields[l] * n + fq]);
                let methods_ok = fields_ok
                    && sq.methods.iter().all(|(l, (params_q, ret_q))| {
                        let (params_p, ret_p) = &sp.methods[l];
                        params_q
                            .iter()
                            .zip(params_p)
                            .all(|(&a, &b)| related[a * n + b])
                            && related[ret_p * n + ret_q]
                    });
                if !methods_ok {
                    related[p * n + q] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return related;
        }
    }
}

/// Decides `s <: t` by building the term graph of both types and computing
/// the greatest simulation.
pub fn oracle_subtype(s: &StructuralType, t: &StructuralType) -> bool {
    SimulationOracle::new([s, t]).query(s, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> StructuralType {
        s.parse().unwrap()
    }

    #[test]
    fn top_against_top() {
        assert!(oracle_subtype(&StructuralType::top(), &StructuralType::top()));
    }

    #[test]
    fn point_pair_is_rejected() {
        assert!(!oracle_subtype(&t("μX.{c: {}, x: {}; eq(X): X}"), &t("μX.{x: {}; eq(X): X}")));
    }

    #[test]
    fn equal_trees_share_states() {
        let mut g = TermGraph::new();
        let a = g.add(&t("μX.{f: X}"));
        let b = g.add(&t("{f: μX.{f: X}}"));
        // Both unfold to the same record term.
        assert_eq!(a, b);
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn batch_and_single_queries_agree() {
        let types: Vec<StructuralType> = ["{}", "{f: {}}", "μX.{m(X): X}", "μX.{f: {}; m(X): X}"]
            .iter()
            .map(|s| t(s))
            .collect();
        let mut batch = SimulationOracle::new(&types);
        for a in &types {
            for b in &types {
                assert_eq!(batch.query(a, b), oracle_subtype(a, b), "{a} <: {b}");
            }
        }
    }
}
