//! Synchronous products of an arena with deterministic parity word
//! automata. Each automaton reads the label of the current state, so a
//! product state pairs a game state with one automaton state per tracked
//! formula, and each product state carries one priority per automaton.

use std::collections::BTreeMap;

use super::{Csg, Csga};
use crate::automata::{letter_index, ltl_to_dpw, Dpw};
use crate::error::RvError;
use crate::ltl::{LtlFormula, PropSet};

/// Origin of a product state: the underlying game state and the current
/// state of every tracked automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductStateInfo {
    pub game_state: usize,
    pub automata: Vec<usize>,
}

/// An arena whose states additionally track a vector of deterministic
/// parity automata. `prios[a][v]` is the priority automaton `a` assigns to
/// product state `v`; a run satisfies formula `a` under min-even parity
/// exactly when the least priority seen infinitely often is even.
#[derive(Clone, Debug)]
pub struct Cspg {
    pub arena: Csga,
    pub labels: Vec<PropSet>,
    pub info: Vec<ProductStateInfo>,
    pub prios: Vec<Vec<u32>>,
}

impl Cspg {
    pub fn state_count(&self) -> usize {
        self.arena.state_count()
    }
}

/// Builds the reachable product of an arena with the given automata. The
/// availability structure is inherited from the base state of each product
/// state; automata advance deterministically on the base state's label, so
/// all successors of a product state agree on the automaton components.
pub fn product_with_automata(arena: &Csga, labels: &[PropSet], dpws: &[Dpw]) -> Cspg {
    let letters: Vec<Vec<usize>> = dpws
        .iter()
        .map(|dpw| {
            (0..arena.state_count()).map(|s| letter_index(&dpw.aps, &labels[s])).collect()
        })
        .collect();

    let start: (usize, Vec<usize>) =
        (arena.init, dpws.iter().map(|dpw| dpw.initial).collect());
    let mut index: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
    index.insert(start.clone(), 0);
    let mut queue = vec![start];

    let mut available = Vec::new();
    let mut transitions = BTreeMap::new();
    let mut out_labels = Vec::new();
    let mut info = Vec::new();
    let mut prios: Vec<Vec<u32>> = vec![Vec::new(); dpws.len()];

    let mut at = 0;
    while at < queue.len() {
        let (s, qs) = queue[at].clone();

        let next_qs: Vec<usize> = qs
            .iter()
            .enumerate()
            .map(|(a, &q)| dpws[a].delta[q][letters[a][s]])
            .collect();

        for dir in arena.directions(s) {
            let mut dist = Vec::new();
            for (target, prob) in arena.transition(s, &dir) {
                let key = (*target, next_qs.clone());
                let id = *index.entry(key.clone()).or_insert_with(|| {
                    queue.push(key);
                    queue.len() - 1
                });
                dist.push((id, prob.clone()));
            }
            dist.sort_by_key(|(id, _)| *id);
            transitions.insert((at, dir), dist);
        }

        available.push(arena.available[s].clone());
        out_labels.push(labels[s].clone());
        for (a, &q) in qs.iter().enumerate() {
            prios[a].push(dpws[a].priority[q]);
        }
        info.push(ProductStateInfo { game_state: s, automata: qs });
        at += 1;
    }

    let states = info
        .iter()
        .map(|i| {
            let qs = i.automata.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
            format!("{}|{}", arena.states[i.game_state], qs)
        })
        .collect();

    Cspg {
        arena: Csga {
            players: arena.players.clone(),
            states,
            init: 0,
            actions: arena.actions.clone(),
            available,
            transitions,
        },
        labels: out_labels,
        info,
        prios,
    }
}

/// Compiles one automaton per player goal plus one for the query formula
/// (last), then builds the product. The cap bounds each determinization.
pub fn build_parity_game(g: &Csg, phi: &LtlFormula, state_cap: usize) -> Result<Cspg, RvError> {
    let mut dpws = Vec::with_capacity(g.goals.len() + 1);
    for goal in &g.goals {
        dpws.push(ltl_to_dpw(goal, state_cap)?);
    }
    dpws.push(ltl_to_dpw(phi, state_cap)?);
    Ok(product_with_automata(&g.arena, &g.labels, &dpws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::DEFAULT_DPW_STATE_CAP;
    use crate::ltl::parse_ltl;
    use crate::model::examples::communication_game;
    use crate::model::parse_ratio;

    fn example() -> Csg {
        communication_game(3, &parse_ratio("1/2").unwrap())
    }

    #[test]
    fn an_empty_automaton_vector_copies_the_arena() {
        let g = example();
        let prod = product_with_automata(&g.arena, &g.labels, &[]);
        assert_eq!(prod.state_count(), g.arena.state_count());
        assert!(prod.prios.is_empty());
        for v in 0..prod.state_count() {
            assert_eq!(prod.info[v].game_state, v);
            assert_eq!(prod.arena.available[v], g.arena.available[v]);
        }
        assert_eq!(
            prod.arena.transition(0, &vec![0, 0]),
            g.arena.transition(0, &vec![0, 0])
        );
    }

    #[test]
    fn successors_share_one_automaton_advance() {
        let g = example();
        let dpw = ltl_to_dpw(&parse_ltl("F psi").unwrap(), DEFAULT_DPW_STATE_CAP).unwrap();
        let prod = product_with_automata(&g.arena, &g.labels, std::slice::from_ref(&dpw));
        for ((v, _), dist) in &prod.arena.transitions {
            let qs: Vec<Vec<usize>> = dist
                .iter()
                .map(|(w, _)| prod.info[*w].automata.clone())
                .collect();
            assert!(qs.windows(2).all(|pair| pair[0] == pair[1]));
            let letter = dpw.letter_of(&prod.labels[*v]);
            let expect = dpw.delta[prod.info[*v].automata[0]][letter];
            assert!(qs.iter().all(|q| q[0] == expect));
        }
    }

    #[test]
    fn priorities_mirror_the_automaton_states() {
        let g = example();
        let dpw = ltl_to_dpw(&parse_ltl("F psi").unwrap(), DEFAULT_DPW_STATE_CAP).unwrap();
        let prod = product_with_automata(&g.arena, &g.labels, std::slice::from_ref(&dpw));
        for v in 0..prod.state_count() {
            assert_eq!(prod.prios[0][v], dpw.priority[prod.info[v].automata[0]]);
        }
    }

    #[test]
    fn the_query_automaton_comes_last() {
        let g = example();
        let prod = build_parity_game(&g, &parse_ltl("G !psi").unwrap(), 10_000).unwrap();
        assert_eq!(prod.prios.len(), 3);
        // The goal is reachability, so some product state must be winning
        // for it while the safety query automaton rejects there.
        let psi_states: Vec<usize> = (0..prod.state_count())
            .filter(|&v| prod.labels[v].contains("psi"))
            .collect();
        assert!(!psi_states.is_empty());
    }

    #[test]
    fn labels_carry_over_from_the_base_state() {
        let g = example();
        let dpw = ltl_to_dpw(&parse_ltl("F psi").unwrap(), DEFAULT_DPW_STATE_CAP).unwrap();
        let prod = product_with_automata(&g.arena, &g.labels, &[dpw]);
        for v in 0..prod.state_count() {
            assert_eq!(prod.labels[v], g.labels[prod.info[v].game_state]);
        }
    }
}
