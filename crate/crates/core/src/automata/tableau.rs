//! Tableau translation from LTL to nondeterministic Büchi automata.
//!
//! States are "atoms": locally consistent truth assignments to the
//! formula's closure (its set of subformulas). An atom fixes the letter it
//! reads, namely its proposition bits; its successors are the atoms that
//! honor the next-step obligations of the `X` and `U` nodes. Eventual
//! fulfilment of every until is enforced with a generalized Büchi
//! condition, degeneralized by the usual counter construction, and the
//! result is trimmed to states that can still contribute to an accepting
//! run.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::RvError;
use crate::ltl::LtlFormula;

use super::Nbw;

// Enumerating atoms walks every subset of the free closure bits, so the
// exponent needs a hard ceiling regardless of the caller's state cap.
const MAX_FREE_BITS: usize = 24;

/// One node of the closure, with child indices resolved.
#[derive(Clone, Copy)]
enum ClosureNode {
    True,
    Prop(usize),
    Not(usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
}

struct Closure {
    nodes: Vec<ClosureNode>,
    root: usize,
    aps: Vec<String>,
    /// Closure ids whose truth value is a free choice: propositions, next
    /// and until nodes. Everything else is derived.
    free: Vec<usize>,
    untils: Vec<usize>,
}

fn build_closure(f: &LtlFormula) -> Closure {
    fn walk(
        f: &LtlFormula,
        index: &mut BTreeMap<LtlFormula, usize>,
        nodes: &mut Vec<ClosureNode>,
        ap_index: &BTreeMap<String, usize>,
    ) -> usize {
        if let Some(&id) = index.get(f) {
            return id;
        }
        let node = match f {
            LtlFormula::True => ClosureNode::True,
            LtlFormula::Prop(name) => ClosureNode::Prop(ap_index[name]),
            LtlFormula::Not(a) => ClosureNode::Not(walk(a, index, nodes, ap_index)),
            LtlFormula::Or(a, b) => ClosureNode::Or(
                walk(a, index, nodes, ap_index),
                walk(b, index, nodes, ap_index),
            ),
            LtlFormula::Next(a) => ClosureNode::Next(walk(a, index, nodes, ap_index)),
            LtlFormula::Until(a, b) => ClosureNode::Until(
                walk(a, index, nodes, ap_index),
                walk(b, index, nodes, ap_index),
            ),
        };
        nodes.push(node);
        let id = nodes.len() - 1;
        index.insert(f.clone(), id);
        id
    }

    let aps: Vec<String> = f.propositions().into_iter().collect();
    let ap_index: BTreeMap<String, usize> =
        aps.iter().enumerate().map(|(i, ap)| (ap.clone(), i)).collect();
    let mut index = BTreeMap::new();
    let mut nodes = Vec::new();
    let root = walk(f, &mut index, &mut nodes, &ap_index);
    let mut free = Vec::new();
    let mut untils = Vec::new();
    for (id, node) in nodes.iter().enumerate() {
        match node {
            ClosureNode::Prop(_) | ClosureNode::Next(_) => free.push(id),
            ClosureNode::Until(..) => {
                free.push(id);
                untils.push(id);
            }
            _ => {}
        }
    }
    Closure { nodes, root, aps, free, untils }
}

struct Atom {
    vals: Vec<bool>,
    letter: usize,
}

/// Fills in derived truth values from the free bits and checks the until
/// expansion locally: `a U b` true requires `b` or `a` now, and `b` true
/// forces `a U b` true.
fn make_atom(closure: &Closure, free_mask: u64) -> Option<Atom> {
    let mut vals = vec![false; closure.nodes.len()];
    let mut free_bit = 0;
    let mut letter = 0usize;
    for (id, node) in closure.nodes.iter().enumerate() {
        vals[id] = match node {
            ClosureNode::True => true,
            ClosureNode::Not(a) => !vals[*a],
            ClosureNode::Or(a, b) => vals[*a] || vals[*b],
            ClosureNode::Prop(ap) => {
                let v = free_mask >> free_bit & 1 == 1;
                free_bit += 1;
                if v {
                    letter |= 1 << ap;
                }
                v
            }
            ClosureNode::Next(_) | ClosureNode::Until(..) => {
                let v = free_mask >> free_bit & 1 == 1;
                free_bit += 1;
                v
            }
        };
    }
    for &u in &closure.untils {
        let ClosureNode::Until(a, b) = closure.nodes[u] else { unreachable!() };
        if vals[b] && !vals[u] {
            return None;
        }
        if vals[u] && !vals[b] && !vals[a] {
            return None;
        }
    }
    Some(Atom { vals, letter })
}

/// An atom transition is legal when every `X g` of the source matches `g`
/// in the target and every until satisfies its one-step expansion.
fn edge_allowed(closure: &Closure, from: &Atom, to: &Atom) -> bool {
    for (id, node) in closure.nodes.iter().enumerate() {
        match *node {
            ClosureNode::Next(a) => {
                if from.vals[id] != to.vals[a] {
                    return false;
                }
            }
            ClosureNode::Until(a, b) => {
                let expanded = from.vals[b] || (from.vals[a] && to.vals[id]);
                if from.vals[id] != expanded {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}

/// Translates a normalized formula into a Büchi automaton whose language is
/// exactly the set of infinite words satisfying it.
pub fn ltl_to_nbw(f: &LtlFormula, state_cap: usize) -> Result<Nbw, RvError> {
    let closure = build_closure(f);
    if closure.free.len() > MAX_FREE_BITS {
        return Err(RvError::Resource(format!(
            "formula has {} independent closure bits, limit is {MAX_FREE_BITS}",
            closure.free.len()
        )));
    }

    let mut atoms = Vec::new();
    for mask in 0..1u64 << closure.free.len() {
        if let Some(atom) = make_atom(&closure, mask) {
            atoms.push(atom);
        }
    }

    let counters = closure.untils.len().max(1);
    if atoms.len().saturating_mul(counters) > state_cap {
        return Err(RvError::Resource(format!(
            "tableau needs {} states, cap is {state_cap}",
            atoms.len() * counters
        )));
    }

    // Membership of an atom in the generalized Büchi set of until `u`:
    // either the until is not pending or it is fulfilled right now.
    let in_gba_set = |atom: &Atom, u: usize| -> bool {
        let ClosureNode::Until(_, b) = closure.nodes[u] else { unreachable!() };
        !atom.vals[u] || atom.vals[b]
    };

    // Degeneralize with a counter: from level k, move to level k+1 once the
    // source atom lies in set k. Visiting (atom in set 0, level 0)
    // infinitely often then forces every set to be visited infinitely
    // often.
    let state_id = |atom: usize, level: usize| atom * counters + level;
    let n = atoms.len() * counters;
    let letter_count = 1usize << closure.aps.len();
    let mut delta = vec![vec![Vec::new(); letter_count]; n];
    let mut accepting = vec![false; n];
    let mut initial = Vec::new();

    for (i, atom) in atoms.iter().enumerate() {
        if atom.vals[closure.root] {
            initial.push(state_id(i, 0));
        }
        for level in 0..counters {
            let advance = closure.untils.is_empty() || in_gba_set(atom, closure.untils[level]);
            let next_level = if advance { (level + 1) % counters } else { level };
            for (j, target) in atoms.iter().enumerate() {
                if edge_allowed(&closure, atom, target) {
                    delta[state_id(i, level)][atom.letter].push(state_id(j, next_level));
                }
            }
        }
        if closure.untils.is_empty() || in_gba_set(atom, closure.untils[0]) {
            accepting[state_id(i, 0)] = true;
        }
    }

    let nbw = Nbw { aps: closure.aps, initial, accepting, delta };
    Ok(trim(&nbw))
}

/// Restricts an NBW to its live states: those reachable from an initial
/// state and able to reach an accepting state that lies on a cycle. States
/// outside this set can never contribute to an accepting run.
fn trim(nbw: &Nbw) -> Nbw {
    let n = nbw.state_count();
    let mut reachable = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &q in &nbw.initial {
        if !reachable[q] {
            reachable[q] = true;
            queue.push_back(q);
        }
    }
    while let Some(q) = queue.pop_front() {
        for row in &nbw.delta[q] {
            for &r in row {
                if !reachable[r] {
                    reachable[r] = true;
                    queue.push_back(r);
                }
            }
        }
    }

    let mut graph = DiGraph::<(), ()>::new();
    let node_ids: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    let mut has_self_loop = vec![false; n];
    for q in 0..n {
        let mut successors = BTreeSet::new();
        for row in &nbw.delta[q] {
            successors.extend(row.iter().copied());
        }
        for r in successors {
            if q == r {
                has_self_loop[q] = true;
            }
            graph.add_edge(node_ids[q], node_ids[r], ());
        }
    }

    let mut on_accepting_cycle = vec![false; n];
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || has_self_loop[scc[0].index()];
        if cyclic && scc.iter().any(|ix| nbw.accepting[ix.index()]) {
            // Every state of a cyclic SCC holding an accepting state can
            // revisit that state forever.
            for ix in &scc {
                on_accepting_cycle[ix.index()] = true;
            }
        }
    }

    let mut live = on_accepting_cycle;
    let mut queue: VecDeque<usize> = (0..n).filter(|&q| live[q]).collect();
    let mut predecessors = vec![Vec::new(); n];
    for q in 0..n {
        for row in &nbw.delta[q] {
            for &r in row {
                predecessors[r].push(q);
            }
        }
    }
    while let Some(q) = queue.pop_front() {
        for &p in &predecessors[q] {
            if !live[p] {
                live[p] = true;
                queue.push_back(p);
            }
        }
    }

    let keep: Vec<usize> = (0..n).filter(|&q| reachable[q] && live[q]).collect();
    let mut renumber = vec![usize::MAX; n];
    for (new, &old) in keep.iter().enumerate() {
        renumber[old] = new;
    }
    let letter_count = 1usize << nbw.aps.len();
    let mut delta = vec![vec![Vec::new(); letter_count]; keep.len()];
    for &old in &keep {
        for (letter, row) in delta[renumber[old]].iter_mut().enumerate() {
            *row = nbw.delta[old][letter]
                .iter()
                .filter(|&&r| renumber[r] != usize::MAX)
                .map(|&r| renumber[r])
                .collect();
        }
    }
    Nbw {
        aps: nbw.aps.clone(),
        initial: nbw
            .initial
            .iter()
            .filter(|&&q| renumber[q] != usize::MAX)
            .map(|&q| renumber[q])
            .collect(),
        accepting: keep.iter().map(|&q| nbw.accepting[q]).collect(),
        delta,
    }
}
