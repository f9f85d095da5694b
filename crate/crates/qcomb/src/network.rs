//! Directed acyclic graphs of comb-valued nodes, wired output-to-input, and
//! their compilation to a single comb by linking nodes in a topological order.

use std::collections::{BTreeMap, BTreeSet};

use crate::combs::{Comb, CombKind, Tooth};
use crate::link::link_chain;
use crate::operators::LabeledOperator;
use crate::spaces::SpaceTuple;
use crate::QcombError;

/// A wire from one node's output space to another node's input space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub from_node: String,
    pub from_label: String,
    pub to_node: String,
    pub to_label: String,
}

impl Wire {
    pub fn new(
        from_node: impl Into<String>,
        from_label: impl Into<String>,
        to_node: impl Into<String>,
        to_label: impl Into<String>,
    ) -> Self {
        Wire {
            from_node: from_node.into(),
            from_label: from_label.into(),
            to_node: to_node.into(),
            to_label: to_label.into(),
        }
    }
}

/// A DAG of combs. Node ids are arbitrary strings; iteration order and
/// topological tie-breaks are lexicographic in the id, so compilation is
/// deterministic.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    pub nodes: BTreeMap<String, Comb>,
    pub wires: Vec<Wire>,
}

impl NetworkGraph {
    pub fn new(nodes: BTreeMap<String, Comb>, wires: Vec<Wire>) -> Self {
        NetworkGraph { nodes, wires }
    }

    /// Input labels of `node` not fed by any wire, in tooth order.
    pub fn free_inputs(&self, node: &str) -> Vec<String> {
        let wired: BTreeSet<&String> = self
            .wires
            .iter()
            .filter(|w| w.to_node == node)
            .map(|w| &w.to_label)
            .collect();
        let comb = &self.nodes[node];
        comb.teeth
            .iter()
            .flat_map(|t| t.input.labels())
            .filter(|l| !wired.contains(l))
            .collect()
    }

    /// Output labels of `node` not feeding any wire, in tooth order.
    pub fn free_outputs(&self, node: &str) -> Vec<String> {
        let wired: BTreeSet<&String> = self
            .wires
            .iter()
            .filter(|w| w.from_node == node)
            .map(|w| &w.from_label)
            .collect();
        let comb = &self.nodes[node];
        comb.teeth
            .iter()
            .flat_map(|t| t.output.labels())
            .filter(|l| !wired.contains(l))
            .collect()
    }
}

/// Check wires (existing endpoints, single use, matching dimensions) and
/// acyclicity.
pub fn validate_graph(g: &NetworkGraph) -> Result<(), QcombError> {
    let mut used_out: BTreeSet<(String, String)> = BTreeSet::new();
    let mut used_in: BTreeSet<(String, String)> = BTreeSet::new();
    for w in &g.wires {
        let from = g
            .nodes
            .get(&w.from_node)
            .ok_or_else(|| QcombError::WireError(format!("unknown node `{}`", w.from_node)))?;
        let to = g
            .nodes
            .get(&w.to_node)
            .ok_or_else(|| QcombError::WireError(format!("unknown node `{}`", w.to_node)))?;
        let d_from = from
            .teeth
            .iter()
            .find_map(|t| t.output.dim_of(&w.from_label))
            .ok_or_else(|| {
                QcombError::WireError(format!(
                    "`{}` is not an output label of node `{}`",
                    w.from_label, w.from_node
                ))
            })?;
        let d_to = to
            .teeth
            .iter()
            .find_map(|t| t.input.dim_of(&w.to_label))
            .ok_or_else(|| {
                QcombError::WireError(format!(
                    "`{}` is not an input label of node `{}`",
                    w.to_label, w.to_node
                ))
            })?;
        if d_from != d_to {
            return Err(QcombError::WireError(format!(
                "wire ({},{}) -> ({},{}) connects dims {} and {}",
                w.from_node, w.from_label, w.to_node, w.to_label, d_from, d_to
            )));
        }
        if !used_out.insert((w.from_node.clone(), w.from_label.clone())) {
            return Err(QcombError::WireError(format!(
                "output ({},{}) feeds more than one wire",
                w.from_node, w.from_label
            )));
        }
        if !used_in.insert((w.to_node.clone(), w.to_label.clone())) {
            return Err(QcombError::WireError(format!(
                "input ({},{}) fed by more than one wire",
                w.to_node, w.to_label
            )));
        }
    }
    sequential_order(g).map(|_| ())
}

/// Topological order of the nodes, lexicographic tie-break by node id.
pub fn sequential_order(g: &NetworkGraph) -> Result<Vec<String>, QcombError> {
    let mut indeg: BTreeMap<&String, usize> = g.nodes.keys().map(|k| (k, 0usize)).collect();
    let mut succ: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
    for w in &g.wires {
        if !g.nodes.contains_key(&w.from_node) || !g.nodes.contains_key(&w.to_node) {
            return Err(QcombError::WireError("wire references unknown node".into()));
        }
        // Self-loops are cycles too; count them so Kahn never emits the node.
        *indeg.get_mut(&w.to_node).unwrap() += 1;
        succ.entry(&w.from_node).or_default().push(&w.to_node);
    }
    let mut ready: BTreeSet<&String> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&k, _)| k)
        .collect();
    let mut order = Vec::with_capacity(g.nodes.len());
    while let Some(&next) = ready.iter().next() {
        ready.remove(next);
        order.push(next.clone());
        if let Some(ss) = succ.get(next) {
            for &s in ss {
                let d = indeg.get_mut(s).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(s);
                }
            }
        }
    }
    if order.len() < g.nodes.len() {
        let remaining: BTreeSet<&String> =
            indeg.iter().filter(|(_, &d)| d > 0).map(|(&k, _)| k).collect();
        // Every remaining node has a remaining predecessor, so walking
        // predecessors must revisit a node; that loop is a cycle.
        let mut pred: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
        for w in &g.wires {
            pred.entry(&w.to_node).or_default().push(&w.from_node);
        }
        let mut path: Vec<String> = Vec::new();
        let mut cur = *remaining.iter().next().unwrap();
        loop {
            if let Some(pos) = path.iter().position(|p| p == cur) {
                let mut cycle = path.split_off(pos);
                cycle.reverse();
                return Err(QcombError::CycleFound(cycle));
            }
            path.push(cur.clone());
            cur = pred
                .get(cur)
                .and_then(|ps| ps.iter().find(|p| remaining.contains(**p)))
                .expect("remaining node has a remaining predecessor");
        }
    }
    Ok(order)
}

/// Link all nodes together in sequential order. Each internal wire is
/// relabeled to one shared label so the link product contracts it; the result
/// carries one tooth per node holding that node's free inputs and outputs.
pub fn compile(g: &NetworkGraph) -> Result<Comb, QcombError> {
    validate_graph(g)?;
    let order = sequential_order(g)?;

    // Free labels must be globally unique or the chain would contract them.
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for id in &order {
        for l in g.free_inputs(id).into_iter().chain(g.free_outputs(id)) {
            if !seen.insert(l.clone()) {
                return Err(QcombError::WireError(format!(
                    "free label `{l}` appears on more than one node"
                )));
            }
        }
    }

    let mut ops: BTreeMap<&String, LabeledOperator> =
        order.iter().map(|id| (id, g.nodes[id].op.clone())).collect();
    for (k, w) in g.wires.iter().enumerate() {
        let shared = format!("~w{k}");
        let from_op = ops.get_mut(&w.from_node).unwrap();
        *from_op = from_op.relabel(&w.from_label, &shared)?;
        let to_op = ops.get_mut(&w.to_node).unwrap();
        *to_op = to_op.relabel(&w.to_label, &shared)?;
    }
    let chain: Vec<LabeledOperator> = order.iter().map(|id| ops[id].clone()).collect();
    let op = link_chain(&chain)?;

    let mut teeth = Vec::with_capacity(order.len());
    for id in &order {
        let comb = &g.nodes[id];
        let free_in = g.free_inputs(id);
        let free_out = g.free_outputs(id);
        let mut input = SpaceTuple::empty();
        for t in &comb.teeth {
            input = input.concat(&t.input.restricted_to(&free_in))?;
        }
        let mut output = SpaceTuple::empty();
        for t in &comb.teeth {
            output = output.concat(&t.output.restricted_to(&free_out))?;
        }
        teeth.push(Tooth::new(input, output));
    }
    let kind = if g.nodes.values().all(|c| c.kind == CombKind::Deterministic) {
        CombKind::Deterministic
    } else {
        CombKind::Probabilistic
    };
    Comb::new(teeth, op, kind)
}
