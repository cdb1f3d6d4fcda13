//! Safra-tree determinization from Büchi to parity.
//!
//! A deterministic state is an ordered tree of named, labelled nodes. The
//! root label tracks every NBW state reachable on the input so far; a child
//! refines its parent with the runs that visited an accepting state at some
//! point since the child was created. Processing one letter spawns a child
//! for each node's accepting part, applies the powerset step to every
//! label, restores the invariants (sibling labels disjoint, every label a
//! proper superset of its children's union, labels nonempty), and then
//! renames the surviving nodes order-preservingly onto 1..m.
//!
//! Two kinds of event can happen to a pre-existing node during a step. It
//! can die (its label empties), or it can flash (its label equals its
//! children's union, so all its runs saw an accepting state since the node
//! last flashed; the children are discarded). The emitted priority is the
//! best event of the step: 2f for the smallest flashing name f, 2e-1 for
//! the smallest dying name e, and a neutral odd ceiling when nothing
//! happened. A word is accepted exactly when the smallest priority seen
//! infinitely often is even, which makes the result a min-even parity
//! automaton.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::RvError;

use super::{Dpw, Nbw};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    name: u32,
    label: BTreeSet<usize>,
    children: Vec<Node>,
}

type Tree = Option<Node>;

/// Spawns, for every pre-existing node with accepting states in its label,
/// a youngest child holding exactly those states. Temporary names are
/// handed out in depth-first order, above every existing name, so the
/// final rename keeps new nodes younger than all survivors.
fn spawn(node: &mut Node, accepting: &[bool], next_temp: &mut u32) {
    let acc: BTreeSet<usize> =
        node.label.iter().copied().filter(|&q| accepting[q]).collect();
    let existing = node.children.len();
    if !acc.is_empty() {
        node.children.push(Node { name: *next_temp, label: acc, children: Vec::new() });
        *next_temp += 1;
    }
    for child in &mut node.children[..existing] {
        spawn(child, accepting, next_temp);
    }
}

fn powerset(node: &mut Node, nbw: &Nbw, letter: usize) {
    let mut next = BTreeSet::new();
    for &q in &node.label {
        next.extend(nbw.delta[q][letter].iter().copied());
    }
    node.label = next;
    for child in &mut node.children {
        powerset(child, nbw, letter);
    }
}

fn remove_states(node: &mut Node, drop: &BTreeSet<usize>) {
    node.label.retain(|q| !drop.contains(q));
    for child in &mut node.children {
        remove_states(child, drop);
    }
}

/// Restores sibling disjointness: a state claimed by an older sibling is
/// removed from every younger sibling's whole subtree.
fn horizontal_merge(node: &mut Node) {
    let mut claimed = BTreeSet::new();
    for child in &mut node.children {
        remove_states(child, &claimed);
        claimed.extend(child.label.iter().copied());
        horizontal_merge(child);
    }
}

/// Records the names of a dying subtree. Only names from before the step
/// (at most `max_old`) count as events; a node spawned and emptied within
/// the same step never existed as far as acceptance is concerned.
fn record_deaths(node: &Node, max_old: u32, min_dead: &mut Option<u32>) {
    if node.name <= max_old {
        *min_dead = Some(min_dead.map_or(node.name, |m| m.min(node.name)));
    }
    for child in &node.children {
        record_deaths(child, max_old, min_dead);
    }
}

/// Removes empty-labelled subtrees. Labels are contained in their parents'
/// labels throughout the step, so an empty node's whole subtree is empty.
fn remove_empty(node: &mut Node, max_old: u32, min_dead: &mut Option<u32>) {
    node.children.retain_mut(|child| {
        if child.label.is_empty() {
            record_deaths(child, max_old, min_dead);
            false
        } else {
            remove_empty(child, max_old, min_dead);
            true
        }
    });
}

/// Flashes nodes whose label is exhausted by their children: every run
/// tracked by such a node visited an accepting state since the node's
/// children started forming, so the children are cleared and the event is
/// recorded. Only pre-existing nodes can flash, because nodes spawned this
/// step are leaves.
fn vertical_merge(node: &mut Node, min_flash: &mut Option<u32>) {
    let union: BTreeSet<usize> =
        node.children.iter().flat_map(|c| c.label.iter().copied()).collect();
    if !node.children.is_empty() && union == node.label {
        node.children.clear();
        *min_flash = Some(min_flash.map_or(node.name, |m| m.min(node.name)));
    } else {
        for child in &mut node.children {
            vertical_merge(child, min_flash);
        }
    }
}

fn collect_names(node: &Node, out: &mut Vec<u32>) {
    out.push(node.name);
    for child in &node.children {
        collect_names(child, out);
    }
}

fn apply_rename(node: &mut Node, map: &BTreeMap<u32, u32>) {
    node.name = map[&node.name];
    for child in &mut node.children {
        apply_rename(child, map);
    }
}

fn max_name(node: &Node) -> u32 {
    let mut names = Vec::new();
    collect_names(node, &mut names);
    names.into_iter().max().unwrap()
}

/// One deterministic transition: returns the successor tree and the
/// priority of the step.
fn step(tree: &Tree, nbw: &Nbw, letter: usize, neutral: u32) -> (Tree, u32) {
    let Some(root) = tree else {
        return (None, neutral);
    };
    let mut root = root.clone();
    let max_old = max_name(&root);

    let mut next_temp = max_old + 1;
    spawn(&mut root, &nbw.accepting, &mut next_temp);
    powerset(&mut root, nbw, letter);
    horizontal_merge(&mut root);

    let mut min_dead = None;
    let mut min_flash = None;
    if root.label.is_empty() {
        record_deaths(&root, max_old, &mut min_dead);
        let e = min_dead.expect("the root predates the step");
        return (None, 2 * e - 1);
    }
    remove_empty(&mut root, max_old, &mut min_dead);
    vertical_merge(&mut root, &mut min_flash);

    let mut names = Vec::new();
    collect_names(&root, &mut names);
    names.sort_unstable();
    let rename: BTreeMap<u32, u32> =
        names.iter().enumerate().map(|(i, &n)| (n, i as u32 + 1)).collect();
    apply_rename(&mut root, &rename);

    let prio = match (min_dead, min_flash) {
        (None, None) => neutral,
        (Some(e), None) => 2 * e - 1,
        (None, Some(f)) => 2 * f,
        (Some(e), Some(f)) => (2 * e - 1).min(2 * f),
    };
    (Some(root), prio)
}

/// Determinizes an NBW into a parity automaton over the same alphabet and
/// language. The deterministic state space is explored breadth-first; each
/// state pairs a Safra tree with the priority of the transition that
/// entered it, and priorities are compressed at the end.
pub fn determinize_to_dpw(nbw: &Nbw, state_cap: usize) -> Result<Dpw, RvError> {
    let neutral = 2 * nbw.state_count() as u32 + 1;
    let letter_count = nbw.letter_count();

    let initial_tree: Tree = if nbw.initial.is_empty() {
        None
    } else {
        Some(Node {
            name: 1,
            label: nbw.initial.iter().copied().collect(),
            children: Vec::new(),
        })
    };
    let initial = (initial_tree, neutral);

    let mut ids: BTreeMap<(Tree, u32), usize> = BTreeMap::new();
    let mut order: Vec<(Tree, u32)> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(initial.clone(), 0);
    order.push(initial.clone());
    queue.push_back(initial);

    let mut delta: Vec<Vec<usize>> = Vec::new();
    while let Some(state) = queue.pop_front() {
        let mut row = Vec::with_capacity(letter_count);
        for letter in 0..letter_count {
            let next = step(&state.0, nbw, letter, neutral);
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = ids.len();
                    if id >= state_cap {
                        return Err(RvError::Resource(format!(
                            "determinization exceeded the cap of {state_cap} states"
                        )));
                    }
                    ids.insert(next.clone(), id);
                    order.push(next.clone());
                    queue.push_back(next);
                    id
                }
            };
            row.push(id);
        }
        delta.push(row);
    }

    let mut priority: Vec<u32> = order.iter().map(|(_, p)| *p).collect();
    compress_priorities(&mut priority);
    Ok(Dpw { aps: nbw.aps.clone(), initial: 0, delta, priority })
}

/// Renumbers priorities onto a dense range starting at 0 or 1, preserving
/// parity and relative order. Adjacent used priorities of equal parity
/// collapse into one value.
fn compress_priorities(priority: &mut [u32]) {
    let used: BTreeSet<u32> = priority.iter().copied().collect();
    let mut map = BTreeMap::new();
    let mut next = 0;
    let mut last_parity = None;
    for p in used {
        match last_parity {
            None => next = p % 2,
            Some(parity) if parity != p % 2 => next += 1,
            Some(_) => {}
        }
        last_parity = Some(p % 2);
        map.insert(p, next);
    }
    for p in priority.iter_mut() {
        *p = map[p];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::ltl_to_nbw;
    use crate::ltl::{parse_ltl, LassoWord, PropSet};

    fn letter(spec: &str) -> PropSet {
        spec.split_whitespace().map(str::to_owned).collect()
    }

    fn dpw_for(text: &str) -> Dpw {
        let f = parse_ltl(text).unwrap();
        determinize_to_dpw(&ltl_to_nbw(&f, 1 << 20).unwrap(), 1 << 20).unwrap()
    }

    #[test]
    fn eventually_p_is_recognized() {
        let d = dpw_for("F p");
        assert!(!d.accepts_lasso(&LassoWord::new(vec![], vec![letter("")])));
        assert!(d.accepts_lasso(&LassoWord::new(vec![letter("")], vec![letter("p"), letter("")])));
        assert!(d.accepts_lasso(&LassoWord::new(vec![letter("p")], vec![letter("")])));
    }

    #[test]
    fn repeated_p_is_recognized() {
        let d = dpw_for("G F p");
        assert!(!d.accepts_lasso(&LassoWord::new(vec![letter("p")], vec![letter("")])));
        assert!(d.accepts_lasso(&LassoWord::new(vec![], vec![letter("p"), letter("")])));
    }

    #[test]
    fn determinism_and_totality_hold() {
        let d = dpw_for("p U q");
        assert_eq!(d.delta.len(), d.priority.len());
        for row in &d.delta {
            assert_eq!(row.len(), d.letter_count());
            for &target in row {
                assert!(target < d.delta.len());
            }
        }
    }

    #[test]
    fn priorities_are_compressed() {
        let d = dpw_for("G F p");
        let max = *d.priority.iter().max().unwrap();
        let used: BTreeSet<u32> = d.priority.iter().copied().collect();
        for p in used.iter().copied() {
            assert!(p <= max);
        }
        // Dense range: every value between the extremes is used.
        for p in *used.first().unwrap()..=max {
            assert!(used.contains(&p), "priority {p} unused in {used:?}");
        }
        assert!(*used.first().unwrap() <= 1);
    }

    #[test]
    fn empty_language_becomes_an_odd_sink() {
        let d = dpw_for("p & !p");
        assert!(!d.accepts_lasso(&LassoWord::new(vec![], vec![letter("p")])));
        assert!(!d.accepts_lasso(&LassoWord::new(vec![], vec![letter("")])));
    }

    #[test]
    fn cap_is_enforced() {
        let f = parse_ltl("G F p & G F q").unwrap();
        let nbw = ltl_to_nbw(&f, 1 << 20).unwrap();
        match determinize_to_dpw(&nbw, 1) {
            Err(RvError::Resource(_)) => {}
            other => panic!("expected resource error, got {other:?}"),
        }
    }
}
