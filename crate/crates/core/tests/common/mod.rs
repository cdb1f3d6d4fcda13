//! Shared generators and fixtures for the integration suites. Everything
//! is driven by a seeded RNG so failures reproduce exactly.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num::{BigRational, One};
use rand::Rng;
use rv_core::congame::arena_from_table;
use rv_core::{Csg, Csga, Direction, Distribution, LassoWord, LtlFormula, PropSet, StrategyTransducer};

pub fn letters(spec: &str) -> PropSet {
    spec.split_whitespace().map(str::to_owned).collect()
}

/// A random core-grammar formula with at most `budget` nodes over the
/// propositions `props`.
pub fn gen_formula(rng: &mut impl Rng, budget: usize, props: &[&str]) -> LtlFormula {
    let leaf = |rng: &mut dyn FnMut(usize) -> usize| -> LtlFormula {
        let pick = rng(props.len() + 1);
        if pick == props.len() {
            LtlFormula::True
        } else {
            LtlFormula::prop(props[pick])
        }
    };
    if budget <= 1 {
        return leaf(&mut |n| rng.gen_range(0..n));
    }
    match rng.gen_range(0..6) {
        0 => leaf(&mut |n| rng.gen_range(0..n)),
        1 => LtlFormula::negate(gen_formula(rng, budget - 1, props)),
        2 => LtlFormula::next(gen_formula(rng, budget - 1, props)),
        3 | 4 => {
            let split = rng.gen_range(1..budget);
            LtlFormula::until(
                gen_formula(rng, split, props),
                gen_formula(rng, budget - split, props),
            )
        }
        _ => {
            let split = rng.gen_range(1..budget);
            LtlFormula::or(
                gen_formula(rng, split, props),
                gen_formula(rng, budget - split, props),
            )
        }
    }
}

fn random_priorities(rng: &mut impl Rng, n: usize, top: u32) -> Vec<u32> {
    (0..n).map(|_| rng.gen_range(0..=top)).collect()
}

/// Up to `cap` distinct successor states, at least one.
fn random_support(rng: &mut impl Rng, n: usize, cap: usize) -> Vec<usize> {
    let want = rng.gen_range(1..=cap.min(n));
    let mut picked = Vec::new();
    while picked.len() < want {
        let t = rng.gen_range(0..n);
        if !picked.contains(&t) {
            picked.push(t);
        }
    }
    picked
}

/// A random turn-based deterministic parity game: per state one of the two
/// players owns the move and picks among up to three deterministic edges.
pub fn gen_turn_based(rng: &mut impl Rng, max_states: usize, top_prio: u32) -> (Csga, Vec<u32>) {
    let n = rng.gen_range(2..=max_states);
    let mut choices = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(1..=3);
        let owner_two = rng.gen::<bool>();
        choices.push(if owner_two { (1, k) } else { (k, 1) });
        rows.push((0..k).map(|_| vec![rng.gen_range(0..n)]).collect());
    }
    let prios = random_priorities(rng, n, top_prio);
    (arena_from_table(&choices, &rows, 0), prios)
}

/// A random stochastic arena where only player 1 ever has a choice, so
/// the game collapses to a Markov decision process.
pub fn gen_one_controller(rng: &mut impl Rng, max_states: usize) -> (Csga, Vec<u32>) {
    let n = rng.gen_range(2..=max_states);
    let mut choices = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(1..=3);
        choices.push((k, 1));
        rows.push((0..k).map(|_| random_support(rng, n, 3)).collect());
    }
    let prios = random_priorities(rng, n, 5);
    (arena_from_table(&choices, &rows, 0), prios)
}

/// A random arena where nobody has a choice: a plain Markov chain with
/// uniform branching.
pub fn gen_chain(rng: &mut impl Rng, max_states: usize) -> (Csga, Vec<u32>) {
    let n = rng.gen_range(2..=max_states);
    let choices = vec![(1, 1); n];
    let rows = (0..n).map(|_| vec![random_support(rng, n, 3)]).collect::<Vec<_>>();
    let prios = random_priorities(rng, n, 5);
    (arena_from_table(&choices, &rows, 0), prios)
}

/// A random lasso word with prefix length up to 4 and cycle length 1 to 4
/// over the given propositions.
pub fn gen_lasso(rng: &mut impl Rng, props: &[&str]) -> LassoWord {
    let letter = |rng: &mut dyn FnMut() -> bool| -> PropSet {
        props.iter().filter(|_| rng()).map(|p| (*p).to_owned()).collect()
    };
    let prefix_len = rng.gen_range(0..=4);
    let cycle_len = rng.gen_range(1..=4);
    let prefix = (0..prefix_len).map(|_| letter(&mut || rng.gen())).collect();
    let cycle = (0..cycle_len).map(|_| letter(&mut || rng.gen())).collect();
    LassoWord::new(prefix, cycle)
}

fn extend_cartesian<T: Clone>(acc: Vec<Vec<T>>, options: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(acc.len() * options.len());
    for base in &acc {
        for option in options {
            let mut next = base.clone();
            next.push(option.clone());
            out.push(next);
        }
    }
    out
}

fn uniform_over(mut support: Vec<usize>) -> Distribution {
    support.sort_unstable();
    let share = BigRational::new(1.into(), (support.len() as i64).into());
    support.into_iter().map(|t| (t, share.clone())).collect()
}

/// A random labelled game: `players` players with up to two actions each,
/// at most `max_states` states, supports of size one or two, labels over
/// `{p, q}`, and a reachability or safety goal on `p` per player.
pub fn gen_csg(rng: &mut impl Rng, players: usize, max_states: usize) -> Csg {
    let n = rng.gen_range(1..=max_states);
    let mut available = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let per_player = (0..players)
            .map(|_| match rng.gen_range(0..3) {
                0 => vec![0],
                1 => vec![1],
                _ => vec![0, 1],
            })
            .collect::<Vec<_>>();
        available.push(per_player);
        let mut letter = PropSet::new();
        if rng.gen() {
            letter.insert("p".to_owned());
        }
        if rng.gen() {
            letter.insert("q".to_owned());
        }
        labels.push(letter);
    }
    let mut transitions = BTreeMap::new();
    for (s, row) in available.iter().enumerate() {
        let mut dirs: Vec<Direction> = vec![Vec::new()];
        for actions in row {
            dirs = extend_cartesian(dirs, actions);
        }
        for dir in dirs {
            let support = random_support(rng, n, 2);
            transitions.insert((s, dir), uniform_over(support));
        }
    }
    let goals = (0..players)
        .map(|_| {
            if rng.gen() {
                LtlFormula::eventually(LtlFormula::prop("p"))
            } else {
                LtlFormula::always(LtlFormula::prop("p"))
            }
        })
        .collect();
    Csg {
        arena: Csga {
            players: (0..players).map(|i| format!("P{i}")).collect(),
            states: (0..n).map(|s| format!("s{s}")).collect(),
            init: 0,
            actions: (0..players).map(|_| vec!["a".to_owned(), "b".to_owned()]).collect(),
            available,
            transitions,
        },
        labels,
        goals,
    }
}

/// A memoryless transducer that plays `map[s]` deterministically at `s`.
pub fn memoryless(g: &Csg, map: &[usize]) -> StrategyTransducer {
    StrategyTransducer {
        states: vec!["q0".to_owned()],
        init: 0,
        delta: vec![vec![0; g.arena.states.len()]],
        tau: vec![map.iter().map(|&a| vec![(a, BigRational::one())]).collect()],
    }
}

/// Every deterministic memoryless choice map of one player: each entry
/// assigns an available action to every state.
pub fn all_choice_maps(g: &Csg, player: usize) -> Vec<Vec<usize>> {
    let mut maps: Vec<Vec<usize>> = vec![Vec::new()];
    for s in 0..g.arena.states.len() {
        maps = extend_cartesian(maps, &g.arena.available[s][player]);
    }
    maps
}

/// Every pure memoryless profile of the game, one transducer per player.
pub fn all_pure_profiles(g: &Csg) -> Vec<Vec<StrategyTransducer>> {
    let mut picks: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    for i in 0..g.arena.players.len() {
        picks = extend_cartesian(picks, &all_choice_maps(g, i));
    }
    picks
        .into_iter()
        .map(|maps| maps.iter().map(|m| memoryless(g, m)).collect())
        .collect()
}

/// A uniformly random pure memoryless profile.
pub fn random_profile(rng: &mut impl Rng, g: &Csg) -> Vec<StrategyTransducer> {
    (0..g.arena.players.len())
        .map(|i| {
            let map = (0..g.arena.states.len())
                .map(|s| {
                    let row = &g.arena.available[s][i];
                    row[rng.gen_range(0..row.len())]
                })
                .collect::<Vec<_>>();
            memoryless(g, &map)
        })
        .collect()
}

/// The same game with fresh positive probabilities on every edge; the
/// supports are untouched.
pub fn reweight(rng: &mut impl Rng, g: &Csg) -> Csg {
    let mut out = g.clone();
    for dist in out.arena.transitions.values_mut() {
        if dist.len() == 1 {
            dist[0].1 = BigRational::one();
            continue;
        }
        let weights: Vec<i64> = dist.iter().map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = weights.iter().sum();
        for (entry, w) in dist.iter_mut().zip(weights) {
            entry.1 = BigRational::new(w.into(), total.into());
        }
    }
    out
}
