//! Almost-sure winning regions of two-player concurrent stochastic parity
//! games. Player 1 picks an action, player 2 picks one simultaneously, and
//! the joint direction samples a successor; player 1 wins a run when the
//! least priority seen infinitely often is even, and wins a state when
//! some strategy makes that happen with probability one against every
//! opponent strategy.
//!
//! Winning here can genuinely require infinite memory: player 1 may have
//! to mix in risky actions with ever-shrinking probabilities, adapted to
//! how often the opponent has played each response. The solver accounts
//! for such strategies through a relaxed reachability step that lets
//! player 1 lean on actions whose support may, with vanishing probability,
//! detour through states that can always recover to the target.
//!
//! The module also ships an independent classical solver for the
//! turn-based deterministic fragment, used as a test oracle.

use std::collections::BTreeMap;

use crate::automata::ltl_to_dpw;
use crate::error::RvError;
use crate::ltl::LtlFormula;
use crate::model::{coalition_arena, product_with_automata, Csg, Csga};

/// A two-player arena flattened for fast support lookups:
/// `support[s][i1][i2]` lists successor states of the direction made of
/// the `i1`-th available action of player 1 and the `i2`-th of player 2.
struct View {
    n: usize,
    support: Vec<Vec<Vec<Vec<usize>>>>,
}

impl View {
    fn new(arena: &Csga) -> View {
        assert_eq!(arena.player_count(), 2, "a two-player arena is required");
        let n = arena.state_count();
        let mut support = Vec::with_capacity(n);
        for s in 0..n {
            let mut per_a1 = Vec::new();
            for &a1 in &arena.available[s][0] {
                let mut per_a2 = Vec::new();
                for &a2 in &arena.available[s][1] {
                    let dist = arena.transition(s, &vec![a1, a2]);
                    per_a2.push(dist.iter().map(|(w, _)| *w).collect());
                }
                per_a1.push(per_a2);
            }
            support.push(per_a1);
        }
        View { n, support }
    }
}

fn count(set: &[bool]) -> usize {
    set.iter().filter(|&&b| b).count()
}

/// One step of the relaxed almost-sure reachability predecessor. Player 1
/// needs a nonempty core of actions that surely stay in `y` or the target,
/// may thicken it with actions that can additionally slip into `van`
/// (played with vanishing probability), and must be able to answer every
/// opponent action with some chance of progress.
fn apre_van(
    view: &View,
    s: usize,
    y: &[bool],
    x: &[bool],
    tgt: &[bool],
    van: &[bool],
) -> bool {
    let a1_count = view.support[s].len();
    let a2_count = view.support[s][0].len();
    let mut usable = vec![false; a1_count];
    let mut core = false;
    for (i1, entry) in usable.iter_mut().enumerate() {
        let main = (0..a2_count)
            .all(|i2| view.support[s][i1][i2].iter().all(|&w| y[w] || tgt[w]));
        let relaxed = main
            || (0..a2_count)
                .all(|i2| view.support[s][i1][i2].iter().all(|&w| y[w] || tgt[w] || van[w]));
        core |= main;
        *entry = relaxed;
    }
    if !core {
        return false;
    }
    (0..a2_count).all(|i2| {
        (0..a1_count).any(|i1| {
            usable[i1] && view.support[s][i1][i2].iter().any(|&w| x[w] || tgt[w] || van[w])
        })
    })
}

/// States in `zone` from which player 1 reaches `tgt` almost surely,
/// granting the vanishing detours through `van`. Greatest fixpoint over
/// the shrinking candidate set, least fixpoint for progress inside it.
fn as_reach_van(view: &View, zone: &[bool], tgt: &[bool], van: &[bool]) -> Vec<bool> {
    let mut y: Vec<bool> = zone.to_vec();
    loop {
        let mut x = vec![false; view.n];
        for s in 0..view.n {
            x[s] = zone[s] && tgt[s];
        }
        loop {
            let mut grew = false;
            for s in 0..view.n {
                if zone[s] && !x[s] && apre_van(view, s, &y, &x, tgt, van) {
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

/// Plain almost-sure reachability over the whole arena.
fn plain_as_reach(view: &View, tgt: &[bool]) -> Vec<bool> {
    let all = vec![true; view.n];
    let none = vec![false; view.n];
    as_reach_van(view, &all, tgt, &none)
}

fn union(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x || *y).collect()
}

/// Solves the parity game restricted to `zone`, treating `t` as immediate
/// wins handled by the enclosing recursion level: the result is the set of
/// zone states from which player 1 can almost surely keep the run in the
/// zone with an even least recurring priority, or leave into `t`.
fn solve(view: &View, prio: &[u32], zone: Vec<bool>, t: &[bool]) -> Vec<bool> {
    if count(&zone) == 0 {
        return zone;
    }
    let m = (0..view.n).filter(|&s| zone[s]).map(|s| prio[s]).min().unwrap();
    let pm: Vec<bool> = (0..view.n).map(|s| zone[s] && prio[s] == m).collect();
    let sub_zone: Vec<bool> = (0..view.n).map(|s| zone[s] && !pm[s]).collect();

    let core = if m % 2 == 0 {
        // The least priority is even: shrink a candidate set until player 1
        // can almost surely keep reaching states that either re-visit the
        // minimal priority without losing ground or win the subgame above.
        let mut y = zone.clone();
        loop {
            let jack: Vec<bool> = (0..view.n)
                .map(|s| {
                    pm[s]
                        && y[s]
                        && view.support[s].iter().any(|per_a2| {
                            per_a2
                                .iter()
                                .all(|spt| spt.iter().all(|&w| y[w] || t[w]))
                        })
                })
                .collect();
            let sub_t = union(t, &jack);
            let w_sub = solve(view, prio, sub_zone.clone(), &sub_t);
            let tgt = union(&sub_t, &w_sub);
            let van = plain_as_reach(view, &tgt);
            let r = as_reach_van(view, &zone, &tgt, &van);
            if r == y {
                break r;
            }
            y = r;
        }
    } else {
        // The least priority is odd: player 1 must win the subgame that
        // avoids it, or almost surely reach such a win.
        let w_sub = solve(view, prio, sub_zone, t);
        let tgt = union(t, &w_sub);
        let van = plain_as_reach(view, &tgt);
        as_reach_van(view, &zone, &tgt, &van)
    };

    // States outside the secured core are not necessarily lost: the
    // opponent may only be able to hold them by serving player 1 an even
    // cycle, as any escape would run into the core. Credit the core as
    // immediate wins and solve the leftover against it.
    if core == zone || count(&core) == 0 {
        return core;
    }
    let rest_zone: Vec<bool> = (0..view.n).map(|s| zone[s] && !core[s]).collect();
    let rest_t = union(t, &core);
    let rest = solve(view, prio, rest_zone, &rest_t);
    union(&core, &rest)
}

/// The set of states from which player 1 wins the min-even parity
/// condition almost surely. The arena must have exactly two players.
pub fn as_winning_region(arena: &Csga, prio: &[u32]) -> Vec<bool> {
    assert_eq!(prio.len(), arena.state_count(), "one priority per state");
    let view = View::new(arena);
    let zone = vec![true; view.n];
    let t = vec![false; view.n];
    solve(&view, prio, zone, &t)
}

/// Can the coalition, acting together against everyone else, almost surely
/// enforce the goal from the initial state?
pub fn is_winnable(
    g: &Csg,
    coalition: &[usize],
    goal: &LtlFormula,
    state_cap: usize,
) -> Result<bool, RvError> {
    let coal = coalition_arena(&g.arena, coalition)?;
    let dpw = ltl_to_dpw(goal, state_cap)?;
    let prod = product_with_automata(&coal, &g.labels, std::slice::from_ref(&dpw));
    let region = as_winning_region(&prod.arena, &prod.prios[0]);
    Ok(region[prod.arena.init])
}

/// A classical recursive solver for turn-based deterministic parity games,
/// kept entirely separate from the stochastic machinery so the two can
/// check each other. The arena must give at most one player a real choice
/// per state, and every distribution must be a point mass; anything else
/// is rejected.
pub fn zielonka_oracle(arena: &Csga, prio: &[u32]) -> Result<Vec<bool>, RvError> {
    if arena.player_count() != 2 {
        return Err(RvError::InvalidInput("two players are required".into()));
    }
    if prio.len() != arena.state_count() {
        return Err(RvError::InvalidInput("one priority per state is required".into()));
    }
    let n = arena.state_count();
    let mut owner = vec![0u8; n];
    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for s in 0..n {
        let c1 = arena.available[s][0].len();
        let c2 = arena.available[s][1].len();
        if c1 > 1 && c2 > 1 {
            return Err(RvError::InvalidInput(format!(
                "state {s} gives both players a choice, the oracle is turn-based only"
            )));
        }
        owner[s] = if c2 > 1 { 1 } else { 0 };
        for dir in arena.directions(s) {
            let dist = arena.transition(s, &dir);
            if dist.len() != 1 {
                return Err(RvError::InvalidInput(format!(
                    "state {s} has a stochastic transition, the oracle is deterministic only"
                )));
            }
            edges[s].push(dist[0].0);
        }
        edges[s].sort_unstable();
        edges[s].dedup();
    }

    fn attractor(
        edges: &[Vec<usize>],
        owner: &[u8],
        within: &[bool],
        seed: &[bool],
        who: u8,
    ) -> Vec<bool> {
        let n = edges.len();
        let mut attr: Vec<bool> = (0..n).map(|s| within[s] && seed[s]).collect();
        loop {
            let mut grew = false;
            for s in 0..n {
                if !within[s] || attr[s] {
                    continue;
                }
                let succs: Vec<usize> =
                    edges[s].iter().copied().filter(|&w| within[w]).collect();
                let pulled = if owner[s] == who {
                    succs.iter().any(|&w| attr[w])
                } else {
                    !succs.is_empty() && succs.iter().all(|&w| attr[w])
                };
                if pulled {
                    attr[s] = true;
                    grew = true;
                }
            }
            if !grew {
                return attr;
            }
        }
    }

    fn zielonka(
        edges: &[Vec<usize>],
        owner: &[u8],
        prio: &[u32],
        game: Vec<bool>,
    ) -> (Vec<bool>, Vec<bool>) {
        let n = edges.len();
        if count(&game) == 0 {
            return (vec![false; n], vec![false; n]);
        }
        let m = (0..n).filter(|&s| game[s]).map(|s| prio[s]).min().unwrap();
        let side = (m % 2) as u8;
        let seed: Vec<bool> = (0..n).map(|s| game[s] && prio[s] == m).collect();
        let a = attractor(edges, owner, &game, &seed, side);
        let rest: Vec<bool> = (0..n).map(|s| game[s] && !a[s]).collect();
        let (w0, w1) = zielonka(edges, owner, prio, rest);
        let theirs = if side == 0 { w1 } else { w0 };
        if count(&theirs) == 0 {
            let whole = game;
            return if side == 0 {
                (whole, vec![false; n])
            } else {
                (vec![false; n], whole)
            };
        }
        let b = attractor(edges, owner, &game, &theirs, 1 - side);
        let rest2: Vec<bool> = (0..n).map(|s| game[s] && !b[s]).collect();
        let (w0b, w1b) = zielonka(edges, owner, prio, rest2);
        if side == 0 {
            (w0b, union(&w1b, &b))
        } else {
            (union(&w0b, &b), w1b)
        }
    }

    let game = vec![true; n];
    let (w0, _) = zielonka(&edges, &owner, prio, game);
    Ok(w0)
}

/// Builds a two-player arena from a compact table for tests and oracles:
/// per state, the available action counts and, per direction in
/// lexicographic order, the successor support with uniform probabilities.
pub fn arena_from_table(
    choices: &[(usize, usize)],
    rows: &[Vec<Vec<usize>>],
    init: usize,
) -> Csga {
    use num::BigRational;
    let n = choices.len();
    assert_eq!(rows.len(), n);
    let max1 = choices.iter().map(|c| c.0).max().unwrap();
    let max2 = choices.iter().map(|c| c.1).max().unwrap();
    let mut transitions = BTreeMap::new();
    let mut available = Vec::with_capacity(n);
    for s in 0..n {
        let (c1, c2) = choices[s];
        assert_eq!(rows[s].len(), c1 * c2, "one row per direction at state {s}");
        let mut k = 0;
        for a1 in 0..c1 {
            for a2 in 0..c2 {
                let support = &rows[s][k];
                k += 1;
                assert!(!support.is_empty());
                let share = BigRational::new(1.into(), (support.len() as i64).into());
                let mut targets: Vec<usize> = support.clone();
                targets.sort_unstable();
                targets.dedup();
                assert_eq!(targets.len(), support.len(), "duplicate successor at state {s}");
                let dist = targets.into_iter().map(|w| (w, share.clone())).collect();
                transitions.insert((s, vec![a1, a2]), dist);
            }
        }
        available.push(vec![(0..c1).collect(), (0..c2).collect()]);
    }
    Csga {
        players: vec!["one".to_owned(), "two".to_owned()],
        states: (0..n).map(|s| format!("v{s}")).collect(),
        init,
        actions: vec![
            (0..max1).map(|a| format!("a{a}")).collect(),
            (0..max2).map(|b| format!("b{b}")).collect(),
        ],
        available,
        transitions,
    }
}
