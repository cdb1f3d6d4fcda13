//! Qualitative verification of finite Markov chains. Probability values
//! never enter the answers here: almost-sure and non-zero satisfaction
//! depend only on the topology of the chain, through its bottom strongly
//! connected components.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::automata::{ltl_to_dpw, Dpw};
use crate::error::RvError;
use crate::ltl::LtlFormula;
use crate::model::{Distribution, Mc};

/// The bottom strongly connected components of the chain: components no
/// edge leaves. Each component is sorted ascending and the list is ordered
/// by least member. Reachability from the initial state is not considered.
pub fn bsccs(mc: &Mc) -> Vec<Vec<usize>> {
    bottom_components(&mc.rows)
}

fn bottom_components(rows: &[Distribution]) -> Vec<Vec<usize>> {
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let nodes: Vec<NodeIndex> = (0..rows.len()).map(|_| graph.add_node(())).collect();
    for (v, row) in rows.iter().enumerate() {
        for (w, _) in row {
            graph.add_edge(nodes[v], nodes[*w], ());
        }
    }
    let mut out = Vec::new();
    for component in tarjan_scc(&graph) {
        let mut members: Vec<usize> = component.iter().map(|n| n.index()).collect();
        members.sort_unstable();
        let closed = members
            .iter()
            .all(|&v| rows[v].iter().all(|(w, _)| members.binary_search(w).is_ok()));
        if closed {
            out.push(members);
        }
    }
    out.sort();
    out
}

fn reachable(rows: &[Distribution], init: usize) -> Vec<bool> {
    let mut seen = vec![false; rows.len()];
    let mut queue = vec![init];
    seen[init] = true;
    while let Some(v) = queue.pop() {
        for (w, _) in &rows[v] {
            if !seen[*w] {
                seen[*w] = true;
                queue.push(*w);
            }
        }
    }
    seen
}

/// The minimum priority of each bottom component reachable from `init`.
fn reachable_bottom_minima(rows: &[Distribution], init: usize, prio: &[u32]) -> Vec<u32> {
    let seen = reachable(rows, init);
    bottom_components(rows)
        .into_iter()
        .filter(|component| seen[component[0]])
        .map(|component| component.into_iter().map(|v| prio[v]).min().unwrap())
        .collect()
}

/// Almost-sure satisfaction of a min-even parity objective: with
/// probability one a run settles in some reachable bottom component and
/// visits all of it infinitely often, so the condition holds almost surely
/// exactly when every such component has an even minimum priority.
pub fn mc_as_parity(mc: &Mc, prio: &[u32]) -> bool {
    assert_eq!(prio.len(), mc.state_count(), "one priority per state");
    reachable_bottom_minima(&mc.rows, mc.init, prio)
        .iter()
        .all(|m| m.is_multiple_of(2))
}

/// The product of a chain with a deterministic parity automaton: states
/// are (chain state, automaton state) pairs, and each carries the
/// automaton's priority.
struct ChainProduct {
    rows: Vec<Distribution>,
    prio: Vec<u32>,
    init: usize,
}

fn dpw_product(mc: &Mc, dpw: &Dpw) -> ChainProduct {
    let letters: Vec<usize> =
        (0..mc.state_count()).map(|v| dpw.letter_of(&mc.labels[v])).collect();
    let mut index = std::collections::BTreeMap::new();
    index.insert((mc.init, dpw.initial), 0usize);
    let mut queue = vec![(mc.init, dpw.initial)];
    let mut rows = Vec::new();
    let mut prio = Vec::new();
    let mut at = 0;
    while at < queue.len() {
        let (v, q) = queue[at];
        at += 1;
        let next_q = dpw.delta[q][letters[v]];
        let mut row = Vec::with_capacity(mc.rows[v].len());
        for (w, p) in &mc.rows[v] {
            let key = (*w, next_q);
            let id = *index.entry(key).or_insert_with(|| {
                queue.push(key);
                queue.len() - 1
            });
            row.push((id, p.clone()));
        }
        row.sort_by_key(|(id, _)| *id);
        rows.push(row);
        prio.push(dpw.priority[q]);
    }
    ChainProduct { rows, prio, init: 0 }
}

/// Does the chain satisfy `f` almost surely?
pub fn mc_as_ltl(mc: &Mc, f: &LtlFormula, state_cap: usize) -> Result<bool, RvError> {
    let dpw = ltl_to_dpw(f, state_cap)?;
    let product = dpw_product(mc, &dpw);
    Ok(reachable_bottom_minima(&product.rows, product.init, &product.prio)
        .iter()
        .all(|m| m.is_multiple_of(2)))
}

/// Does the chain satisfy `f` with positive probability? This holds
/// exactly when some reachable bottom component of the automaton product
/// is accepting, which is the negation of almost-sure satisfaction of
/// `!f`.
pub fn mc_nz_ltl(mc: &Mc, f: &LtlFormula, state_cap: usize) -> Result<bool, RvError> {
    let dpw = ltl_to_dpw(f, state_cap)?;
    let product = dpw_product(mc, &dpw);
    Ok(reachable_bottom_minima(&product.rows, product.init, &product.prio)
        .iter()
        .any(|m| m.is_multiple_of(2)))
}
