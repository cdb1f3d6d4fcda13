//! Differential validation of the concurrent stochastic parity solver
//! against independent implementations on the fragments where those
//! exist: a classical recursive solver for turn-based deterministic
//! games, the MDP machinery when only one player has choices, and the
//! Markov chain analysis when nobody does.

mod common;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rv_core::congame::as_winning_region;
use rv_core::model::{Mc, McStateInfo, Mdp, MdpChoice};
use rv_core::qualmc::mc_as_parity;
use rv_core::qualmdp::{mdp_satisfies, QualAtom};
use rv_core::{zielonka_oracle, Csga};

fn one_controller_mdp(arena: &Csga, init: usize) -> Mdp {
    let n = arena.state_count();
    let mut choices = Vec::with_capacity(n);
    for s in 0..n {
        assert_eq!(arena.available[s][1].len(), 1, "player 2 must be trivial");
        let a2 = arena.available[s][1][0];
        let row = arena.available[s][0]
            .iter()
            .map(|&a1| MdpChoice {
                tag: vec![a1],
                dist: arena.transition(s, &vec![a1, a2]).clone(),
            })
            .collect();
        choices.push(row);
    }
    Mdp {
        init,
        choices,
        labels: vec![Default::default(); n],
        info: (0..n).map(|s| McStateInfo { game_state: s, memory: Vec::new() }).collect(),
    }
}

fn chain_mc(arena: &Csga, init: usize) -> Mc {
    let n = arena.state_count();
    let mut rows = Vec::with_capacity(n);
    let mut dir_support = Vec::with_capacity(n);
    for s in 0..n {
        let dirs = arena.directions(s);
        assert_eq!(dirs.len(), 1, "the arena must have no choices");
        rows.push(arena.transition(s, &dirs[0]).clone());
        dir_support.push(dirs);
    }
    Mc {
        init,
        rows,
        labels: vec![Default::default(); n],
        info: (0..n).map(|s| McStateInfo { game_state: s, memory: Vec::new() }).collect(),
        dir_support,
    }
}

#[test]
fn agrees_with_the_classical_solver_on_turn_based_games() {
    let mut rng = StdRng::seed_from_u64(0x7a21);
    for case in 0..200 {
        let (arena, prio) = common::gen_turn_based(&mut rng, 8, 5);
        let fast = as_winning_region(&arena, &prio);
        let slow = zielonka_oracle(&arena, &prio).unwrap();
        assert_eq!(fast, slow, "case {case}: priorities {prio:?}");
    }
}

#[test]
fn agrees_with_the_classical_solver_on_larger_games() {
    let mut rng = StdRng::seed_from_u64(0x3d5b);
    for case in 0..150 {
        let (arena, prio) = common::gen_turn_based(&mut rng, 12, 5);
        let fast = as_winning_region(&arena, &prio);
        let slow = zielonka_oracle(&arena, &prio).unwrap();
        assert_eq!(fast, slow, "case {case}: priorities {prio:?}");
    }
}

#[test]
fn agrees_with_the_decision_process_analysis_when_alone() {
    let mut rng = StdRng::seed_from_u64(0x51ee);
    for case in 0..80 {
        let (arena, prio) = common::gen_one_controller(&mut rng, 7);
        let region = as_winning_region(&arena, &prio);
        for (s, &won) in region.iter().enumerate() {
            let mdp = one_controller_mdp(&arena, s);
            let there = mdp_satisfies(&mdp, &[QualAtom::almost_sure(prio.clone())]).is_some();
            assert_eq!(won, there, "case {case}, state {s}: priorities {prio:?}");
        }
    }
}

#[test]
fn agrees_with_the_chain_analysis_when_nobody_chooses() {
    let mut rng = StdRng::seed_from_u64(0xc4a1);
    for case in 0..80 {
        let (arena, prio) = common::gen_chain(&mut rng, 7);
        let region = as_winning_region(&arena, &prio);
        for (s, &won) in region.iter().enumerate() {
            let mc = chain_mc(&arena, s);
            assert_eq!(won, mc_as_parity(&mc, &prio), "case {case}, state {s}");
        }
    }
}
