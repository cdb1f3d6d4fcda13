//! Qualitative verification of finite MDPs with a single controller. The
//! queries here ask whether some strategy satisfies a conjunction of
//! parity objectives, each demanded either almost surely or with positive
//! probability. As in the chain case, answers depend only on transition
//! supports, never on the exact probabilities.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::automata::{ltl_to_dpw, Dpw};
use crate::error::RvError;
use crate::ltl::LtlFormula;
use crate::model::{Mdp, McStateInfo};

/// How a parity objective must be met.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomMode {
    AlmostSure,
    NonZero,
}

/// One conjunct of an MDP query: a min-even parity objective given by a
/// priority per state, satisfied either almost surely or with positive
/// probability.
#[derive(Clone, Debug)]
pub struct QualAtom {
    pub mode: AtomMode,
    pub prio: Vec<u32>,
}

impl QualAtom {
    pub fn almost_sure(prio: Vec<u32>) -> Self {
        QualAtom { mode: AtomMode::AlmostSure, prio }
    }

    pub fn non_zero(prio: Vec<u32>) -> Self {
        QualAtom { mode: AtomMode::NonZero, prio }
    }
}

/// An end component: a set of states together with, per state, the
/// controller choices whose support stays inside the set, such that the
/// induced graph is strongly connected. `choices` runs parallel to
/// `states` and holds indices into `Mdp::choices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mec {
    pub states: Vec<usize>,
    pub choices: Vec<Vec<usize>>,
}

fn mask_of(set: &[usize], n: usize) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &s in set {
        mask[s] = true;
    }
    mask
}

fn internal_choices(mdp: &Mdp, s: usize, mask: &[bool]) -> Vec<usize> {
    mdp.choices[s]
        .iter()
        .enumerate()
        .filter(|(_, c)| c.dist.iter().all(|(w, _)| mask[*w]))
        .map(|(k, _)| k)
        .collect()
}

/// Maximal end components inside each seed set. Seeds must be disjoint.
fn mecs_within(mdp: &Mdp, seeds: Vec<Vec<usize>>) -> Vec<Mec> {
    let n = mdp.state_count();
    let mut stack = seeds;
    let mut out = Vec::new();
    while let Some(mut set) = stack.pop() {
        // Drop states with no choice staying inside until that stabilizes.
        loop {
            let mask = mask_of(&set, n);
            let keep: Vec<usize> = set
                .iter()
                .copied()
                .filter(|&s| !internal_choices(mdp, s, &mask).is_empty())
                .collect();
            if keep.len() == set.len() {
                break;
            }
            set = keep;
        }
        if set.is_empty() {
            continue;
        }
        let mask = mask_of(&set, n);
        let mut graph: DiGraph<(), ()> = DiGraph::new();
        let nodes: Vec<_> = set.iter().map(|_| graph.add_node(())).collect();
        let local: std::collections::BTreeMap<usize, usize> =
            set.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        for (k, &s) in set.iter().enumerate() {
            for c in internal_choices(mdp, s, &mask) {
                for (w, _) in &mdp.choices[s][c].dist {
                    graph.add_edge(nodes[k], nodes[local[w]], ());
                }
            }
        }
        let comps = tarjan_scc(&graph);
        if comps.len() == 1 {
            let choices = set.iter().map(|&s| internal_choices(mdp, s, &mask)).collect();
            out.push(Mec { states: set, choices });
        } else {
            for comp in comps {
                let mut sub: Vec<usize> = comp.iter().map(|x| set[x.index()]).collect();
                sub.sort_unstable();
                stack.push(sub);
            }
        }
    }
    out.sort_by(|a, b| a.states.cmp(&b.states));
    out
}

/// The maximal end components of the MDP, ordered by least state.
pub fn mec_decomposition(mdp: &Mdp) -> Vec<Mec> {
    mecs_within(mdp, vec![(0..mdp.state_count()).collect()])
}

/// The almost-sure reachability region: states from which some strategy
/// reaches the target with probability one. Computed as the greatest set
/// `Y` such that within `Y` every state can reach the target with positive
/// probability using only choices whose support stays in `Y`.
pub fn mdp_as_reach(mdp: &Mdp, target: &[bool]) -> Vec<bool> {
    let n = mdp.state_count();
    let mut y = vec![true; n];
    loop {
        let mut x = target.to_vec();
        loop {
            let mut grew = false;
            for s in 0..n {
                if x[s] {
                    continue;
                }
                let fine = mdp.choices[s].iter().any(|c| {
                    c.dist.iter().all(|(w, _)| y[*w]) && c.dist.iter().any(|(w, _)| x[*w])
                });
                if fine {
                    x[s] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if x == y {
            return y;
        }
        y = x;
    }
}

/// States reachable from `from` with positive probability while staying in
/// `allowed` almost surely, i.e. via choices whose whole support remains
/// inside `allowed`.
fn positive_reach_within(mdp: &Mdp, allowed: &[bool], from: usize) -> Vec<bool> {
    let mut seen = vec![false; mdp.state_count()];
    if !allowed[from] {
        return seen;
    }
    seen[from] = true;
    let mut queue = vec![from];
    while let Some(s) = queue.pop() {
        for c in &mdp.choices[s] {
            if !c.dist.iter().all(|(w, _)| allowed[*w]) {
                continue;
            }
            for (w, _) in &c.dist {
                if !seen[*w] {
                    seen[*w] = true;
                    queue.push(*w);
                }
            }
        }
    }
    seen
}

/// Splits a parity objective into its implied request/response pairs:
/// whenever an odd priority `d` recurs, some priority below `d` must recur
/// too. A run satisfies min-even parity exactly when it honors every pair.
fn streett_pairs(prio: &[u32]) -> Vec<(Vec<bool>, Vec<bool>)> {
    let max = prio.iter().copied().max().unwrap_or(0);
    let mut out = Vec::new();
    for d in (1..=max).filter(|d| d % 2 == 1) {
        let request: Vec<bool> = prio.iter().map(|&p| p == d).collect();
        if !request.contains(&true) {
            continue;
        }
        let response: Vec<bool> = prio.iter().map(|&p| p < d).collect();
        out.push((request, response));
    }
    out
}

/// The union of end components on which every request/response pair can be
/// honored by visiting the whole component forever: a component violating
/// a pair can only be saved by shrinking away the requesting states.
fn good_ec_union(mdp: &Mdp, pairs: &[(Vec<bool>, Vec<bool>)]) -> (Vec<bool>, Vec<Mec>) {
    let mut good = vec![false; mdp.state_count()];
    let mut comps = Vec::new();
    let mut stack = mec_decomposition(mdp);
    while let Some(m) = stack.pop() {
        let violated = pairs.iter().find(|(request, response)| {
            m.states.iter().any(|&s| request[s]) && !m.states.iter().any(|&s| response[s])
        });
        match violated {
            None => {
                for &s in &m.states {
                    good[s] = true;
                }
                comps.push(m);
            }
            Some((request, _)) => {
                let survivors: Vec<usize> =
                    m.states.iter().copied().filter(|&s| !request[s]).collect();
                if !survivors.is_empty() {
                    stack.extend(mecs_within(mdp, vec![survivors]));
                }
            }
        }
    }
    comps.sort_by(|a, b| a.states.cmp(&b.states));
    (good, comps)
}

/// A satisfiability certificate: the almost-sure winning region the
/// strategy never leaves, and the end components it settles in or dips
/// into for the positive-probability conjuncts.
#[derive(Clone, Debug)]
pub struct MdpWitness {
    pub region: Vec<usize>,
    pub components: Vec<Mec>,
}

/// Decides whether one strategy can satisfy all atoms at once, and if so
/// sketches how. The almost-sure atoms hold together exactly when the
/// controller can almost surely reach an end component jointly good for
/// all of them; each positive-probability atom additionally needs, inside
/// that almost-sure region, a reachable component jointly good for it and
/// all almost-sure atoms. Branching once at the start covers every
/// positive atom with its own slice of probability.
pub fn mdp_satisfies(mdp: &Mdp, atoms: &[QualAtom]) -> Option<MdpWitness> {
    for atom in atoms {
        assert_eq!(atom.prio.len(), mdp.state_count(), "one priority per state");
    }
    let as_pairs: Vec<(Vec<bool>, Vec<bool>)> = atoms
        .iter()
        .filter(|a| a.mode == AtomMode::AlmostSure)
        .flat_map(|a| streett_pairs(&a.prio))
        .collect();
    let (good_as, comps_as) = good_ec_union(mdp, &as_pairs);
    let region = mdp_as_reach(mdp, &good_as);
    if !region[mdp.init] {
        return None;
    }
    let reach = positive_reach_within(mdp, &region, mdp.init);

    let mut components = comps_as;
    for atom in atoms.iter().filter(|a| a.mode == AtomMode::NonZero) {
        let mut pairs = as_pairs.clone();
        pairs.extend(streett_pairs(&atom.prio));
        let (good_z, comps_z) = good_ec_union(mdp, &pairs);
        if !good_z.iter().zip(&reach).any(|(g, r)| *g && *r) {
            return None;
        }
        components.extend(
            comps_z.into_iter().filter(|m| m.states.iter().any(|&s| reach[s])),
        );
    }
    components.sort_by(|a, b| a.states.cmp(&b.states));
    components.dedup_by(|a, b| a.states == b.states);

    let region_states = (0..mdp.state_count()).filter(|&s| region[s]).collect();
    Some(MdpWitness { region: region_states, components })
}

/// Lifts the MDP over a deterministic parity automaton that reads each
/// state's label. Returns the product and the induced priority vector.
fn dpw_product(mdp: &Mdp, dpw: &Dpw) -> (Mdp, Vec<u32>) {
    let letters: Vec<usize> =
        (0..mdp.state_count()).map(|v| dpw.letter_of(&mdp.labels[v])).collect();
    let mut index = std::collections::BTreeMap::new();
    index.insert((mdp.init, dpw.initial), 0usize);
    let mut queue = vec![(mdp.init, dpw.initial)];
    let mut choices = Vec::new();
    let mut labels = Vec::new();
    let mut info = Vec::new();
    let mut prio = Vec::new();
    let mut at = 0;
    while at < queue.len() {
        let (v, q) = queue[at];
        at += 1;
        let next_q = dpw.delta[q][letters[v]];
        let mut here = Vec::with_capacity(mdp.choices[v].len());
        for choice in &mdp.choices[v] {
            let mut dist = Vec::with_capacity(choice.dist.len());
            for (w, p) in &choice.dist {
                let key = (*w, next_q);
                let id = *index.entry(key).or_insert_with(|| {
                    queue.push(key);
                    queue.len() - 1
                });
                dist.push((id, p.clone()));
            }
            dist.sort_by_key(|(id, _)| *id);
            here.push(crate::model::MdpChoice { tag: choice.tag.clone(), dist });
        }
        choices.push(here);
        labels.push(mdp.labels[v].clone());
        info.push(McStateInfo {
            game_state: mdp.info[v].game_state,
            memory: mdp.info[v].memory.clone(),
        });
        prio.push(dpw.priority[q]);
    }
    (Mdp { init: 0, choices, labels, info }, prio)
}

/// Can the controller satisfy `f` almost surely?
pub fn mdp_as_ltl(mdp: &Mdp, f: &LtlFormula, state_cap: usize) -> Result<bool, RvError> {
    let dpw = ltl_to_dpw(f, state_cap)?;
    let (product, prio) = dpw_product(mdp, &dpw);
    Ok(mdp_satisfies(&product, &[QualAtom::almost_sure(prio)]).is_some())
}

/// Can the controller satisfy `f` with positive probability?
pub fn mdp_nz_ltl(mdp: &Mdp, f: &LtlFormula, state_cap: usize) -> Result<bool, RvError> {
    let dpw = ltl_to_dpw(f, state_cap)?;
    let (product, prio) = dpw_product(mdp, &dpw);
    Ok(mdp_satisfies(&product, &[QualAtom::non_zero(prio)]).is_some())
}
