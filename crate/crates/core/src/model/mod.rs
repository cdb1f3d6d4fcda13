//! Game-model data types: concurrent stochastic arenas and games, strategy
//! transducers, validation, and the coalition-arena view. The product
//! constructions (induced Markov chains, induced MDPs, parity products)
//! live in [`induced`] and [`product`].
//!
//! All probabilities are exact rationals. Every collection is ordered, so
//! construction and iteration are deterministic.

pub mod examples;
mod induced;
mod product;

pub use induced::{induced_markov_chain, induced_mdp, Mc, McStateInfo, Mdp, MdpChoice};
pub use product::{build_parity_game, product_with_automata, Cspg, ProductStateInfo};

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Zero};

use crate::error::RvError;
use crate::ltl::{LtlFormula, PropSet};

/// A joint action: one action index per player, in player order. Slices of
/// a direction (for a coalition) use the same representation.
pub type Direction = Vec<usize>;

/// A sparse probability distribution: (target, probability) pairs with
/// strictly increasing targets and positive probabilities summing to one.
/// Targets are state indices in transition rows and action indices in
/// strategy tables.
pub type Distribution = Vec<(usize, BigRational)>;

/// Parses an exact rational from `"num/den"` or plain integer text.
pub fn parse_ratio(text: &str) -> Result<BigRational, RvError> {
    let bad = |why: &str| RvError::InvalidInput(format!("bad rational '{text}': {why}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text.trim(), "1"),
    };
    let num = num.parse().map_err(|_| bad("numerator is not an integer"))?;
    let den: num::BigInt = den.parse().map_err(|_| bad("denominator is not an integer"))?;
    if den.is_zero() {
        return Err(bad("denominator is zero"));
    }
    Ok(BigRational::new(num, den))
}

/// A concurrent stochastic game arena: all players pick one available
/// action simultaneously and the joint direction fixes a distribution over
/// successor states.
#[derive(Clone, Debug)]
pub struct Csga {
    pub players: Vec<String>,
    pub states: Vec<String>,
    pub init: usize,
    /// Global action names per player.
    pub actions: Vec<Vec<String>>,
    /// `available[s][i]` lists player `i`'s actions at state `s`, sorted
    /// ascending. Never empty.
    pub available: Vec<Vec<Vec<usize>>>,
    /// One entry per state and available direction.
    pub transitions: BTreeMap<(usize, Direction), Distribution>,
}

impl Csga {
    pub fn player_count(&self) -> usize {
        self.players.len()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// All available directions at a state, in lexicographic order.
    pub fn directions(&self, s: usize) -> Vec<Direction> {
        let mut out = vec![Vec::new()];
        for choices in &self.available[s] {
            let mut next = Vec::with_capacity(out.len() * choices.len());
            for partial in &out {
                for &a in choices {
                    let mut dir = partial.clone();
                    dir.push(a);
                    next.push(dir);
                }
            }
            out = next;
        }
        out
    }

    /// The transition distribution of an available direction.
    pub fn transition(&self, s: usize, dir: &Direction) -> &Distribution {
        self.transitions
            .get(&(s, dir.clone()))
            .unwrap_or_else(|| panic!("no transition at state {s} for direction {dir:?}"))
    }
}

/// A concurrent stochastic game: an arena plus a labeling and one LTL goal
/// per player.
#[derive(Clone, Debug)]
pub struct Csg {
    pub arena: Csga,
    pub labels: Vec<PropSet>,
    pub goals: Vec<LtlFormula>,
}

/// A finite-state probabilistic strategy for one player: a deterministic
/// memory update over observed game states and a distribution over the
/// player's available actions per (memory, state) pair.
#[derive(Clone, Debug)]
pub struct StrategyTransducer {
    pub states: Vec<String>,
    pub init: usize,
    /// `delta[q][s]` is the next memory state after observing `s`.
    pub delta: Vec<Vec<usize>>,
    /// `tau[q][s]` is the action distribution played at `s` with memory
    /// `q`; its support must respect the arena's availability.
    pub tau: Vec<Vec<Distribution>>,
}

/// A single validation finding with a human-readable location.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "{}: {}", self.location, self.message)
    }
}

fn check_distribution(
    dist: &Distribution,
    target_count: usize,
    location: &str,
    out: &mut Vec<Diagnostic>,
) {
    let diag = |message: String| Diagnostic { location: location.to_owned(), message };
    if dist.is_empty() {
        out.push(diag("empty distribution".into()));
        return;
    }
    let mut sum = BigRational::zero();
    let mut last: Option<usize> = None;
    for (target, prob) in dist {
        if *target >= target_count {
            out.push(diag(format!("target index {target} out of range")));
        }
        if last.is_some_and(|l| l >= *target) {
            out.push(diag("targets must be strictly increasing".into()));
        }
        last = Some(*target);
        if *prob <= BigRational::zero() || *prob > BigRational::one() {
            out.push(diag(format!("probability {prob} outside (0, 1]")));
        }
        sum += prob;
    }
    if !sum.is_one() {
        out.push(diag(format!("probabilities sum to {sum}, expected 1")));
    }
}

/// Checks every structural invariant of a game; an empty result means the
/// model is well-formed. Violations carry their location, so all findings
/// can be reported at once.
pub fn validate_model(g: &Csg) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let arena = &g.arena;
    fn diag_into(out: &mut Vec<Diagnostic>, location: String, message: String) {
        out.push(Diagnostic { location, message });
    }
    macro_rules! diag {
        ($loc:expr, $msg:expr) => {
            diag_into(&mut out, $loc, $msg)
        };
    }

    if arena.players.is_empty() {
        diag!("players".into(), "at least one player is required".into());
    }
    if arena.states.is_empty() {
        diag!("states".into(), "at least one state is required".into());
        return out;
    }
    if arena.init >= arena.states.len() {
        diag!("init".into(), format!("state index {} out of range", arena.init));
    }
    if arena.actions.len() != arena.players.len() {
        diag!("actions".into(), "one action list per player is required".into());
        return out;
    }
    for (i, actions) in arena.actions.iter().enumerate() {
        if actions.is_empty() {
            diag!(format!("actions[{}]", arena.players[i]), "empty action set".into());
        }
    }
    if arena.available.len() != arena.states.len() {
        diag!("available".into(), "one availability row per state is required".into());
        return out;
    }
    if g.labels.len() != arena.states.len() {
        diag!("labels".into(), "one label set per state is required".into());
    }
    if g.goals.len() != arena.players.len() {
        diag!("goals".into(), "one goal per player is required".into());
    }

    for (s, row) in arena.available.iter().enumerate() {
        let state = &arena.states[s];
        if row.len() != arena.players.len() {
            diag!(format!("available[{state}]"), "one entry per player is required".into());
            return out;
        }
        for (i, avail) in row.iter().enumerate() {
            let location = format!("available[{state}][{}]", arena.players[i]);
            if avail.is_empty() {
                diag!(location.clone(), "no available actions".into());
            }
            let mut last: Option<usize> = None;
            for &a in avail {
                if a >= arena.actions[i].len() {
                    diag!(location.clone(), format!("action index {a} out of range"));
                }
                if last.is_some_and(|l| l >= a) {
                    diag!(location.clone(), "actions must be strictly increasing".into());
                }
                last = Some(a);
            }
        }
    }

    for s in 0..arena.states.len() {
        let state = &arena.states[s];
        for dir in arena.directions(s) {
            match arena.transitions.get(&(s, dir.clone())) {
                None => diag!(
                    format!("transitions[{state}]"),
                    format!("missing distribution for direction {}", direction_name(arena, &dir))
                ),
                Some(dist) => {
                    let location =
                        format!("transitions[{state}][{}]", direction_name(arena, &dir));
                    check_distribution(dist, arena.states.len(), &location, &mut out);
                }
            }
        }
    }
    for (s, dir) in arena.transitions.keys() {
        let known = *s < arena.states.len()
            && dir.len() == arena.players.len()
            && dir
                .iter()
                .enumerate()
                .all(|(i, &a)| arena.available[*s][i].contains(&a));
        if !known {
            diag!(
                "transitions".into(),
                format!("entry for unavailable direction {dir:?} at state index {s}")
            );
        }
    }
    out
}

fn direction_name(arena: &Csga, dir: &Direction) -> String {
    dir.iter()
        .enumerate()
        .map(|(i, &a)| arena.actions[i][a].as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// Checks one player's transducer against the arena.
pub fn validate_transducer(
    g: &Csg,
    player: usize,
    t: &StrategyTransducer,
    out: &mut Vec<Diagnostic>,
) {
    let arena = &g.arena;
    let who = &arena.players[player];
    let diag = |location: String, message: String| Diagnostic { location, message };
    if t.states.is_empty() {
        out.push(diag(format!("strategy[{who}]"), "at least one memory state is required".into()));
        return;
    }
    if t.init >= t.states.len() {
        out.push(diag(
            format!("strategy[{who}].init"),
            format!("memory index {} out of range", t.init),
        ));
    }
    if t.delta.len() != t.states.len() || t.tau.len() != t.states.len() {
        out.push(diag(format!("strategy[{who}]"), "one delta and tau row per memory state".into()));
        return;
    }
    for q in 0..t.states.len() {
        let memory = &t.states[q];
        if t.delta[q].len() != arena.states.len() || t.tau[q].len() != arena.states.len() {
            out.push(diag(
                format!("strategy[{who}][{memory}]"),
                "one entry per game state is required".into(),
            ));
            return;
        }
        for s in 0..arena.states.len() {
            let state = &arena.states[s];
            if t.delta[q][s] >= t.states.len() {
                out.push(diag(
                    format!("strategy[{who}].delta[{memory}][{state}]"),
                    format!("memory index {} out of range", t.delta[q][s]),
                ));
            }
            let location = format!("strategy[{who}].tau[{memory}][{state}]");
            check_distribution(&t.tau[q][s], arena.actions[player].len(), &location, out);
            for (action, _) in &t.tau[q][s] {
                if *action < arena.actions[player].len()
                    && !arena.available[s][player].contains(action)
                {
                    out.push(Diagnostic {
                        location: location.clone(),
                        message: format!(
                            "support violates availability: action {} not available",
                            arena.actions[player][*action]
                        ),
                    });
                }
            }
        }
    }
}

/// Checks a full profile (one transducer per player, in player order).
pub fn validate_profile(g: &Csg, profile: &[StrategyTransducer]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if profile.len() != g.arena.players.len() {
        out.push(Diagnostic {
            location: "profile".into(),
            message: format!(
                "expected {} strategies, got {}",
                g.arena.players.len(),
                profile.len()
            ),
        });
        return out;
    }
    for (i, t) in profile.iter().enumerate() {
        validate_transducer(g, i, t, &mut out);
    }
    out
}

/// The slice of a direction belonging to the given players.
pub fn direction_slice(dir: &[usize], players: &[usize]) -> Direction {
    players.iter().map(|&i| dir[i]).collect()
}

/// Reassembles a full direction from a coalition slice and the
/// complementary slice.
pub fn compose_direction(
    player_count: usize,
    coalition: &[usize],
    coalition_slice: &[usize],
    rest: &[usize],
    rest_slice: &[usize],
) -> Direction {
    let mut dir = vec![usize::MAX; player_count];
    for (&i, &a) in coalition.iter().zip(coalition_slice) {
        dir[i] = a;
    }
    for (&i, &a) in rest.iter().zip(rest_slice) {
        dir[i] = a;
    }
    debug_assert!(dir.iter().all(|&a| a != usize::MAX));
    dir
}

/// The players not in `coalition`, ascending.
pub fn complement_players(player_count: usize, coalition: &[usize]) -> Vec<usize> {
    (0..player_count).filter(|i| !coalition.contains(i)).collect()
}

/// Regroups an arena into a two-player view: player 0 plays the
/// coalition's direction slices, player 1 the complementary slices. States
/// are preserved with their indices. When the coalition is everyone,
/// player 1 gets a single no-op action.
pub fn coalition_arena(arena: &Csga, coalition: &[usize]) -> Result<Csga, RvError> {
    if coalition.is_empty() {
        return Err(RvError::InvalidInput("coalition must be nonempty".into()));
    }
    let sorted: Vec<usize> = {
        let set: std::collections::BTreeSet<usize> = coalition.iter().copied().collect();
        if set.len() != coalition.len() || set.iter().any(|&i| i >= arena.player_count()) {
            return Err(RvError::InvalidInput(format!(
                "coalition {coalition:?} is not a set of player indices"
            )));
        }
        set.into_iter().collect()
    };
    let rest = complement_players(arena.player_count(), &sorted);

    // Global action sets of the merged sides: every slice that is available
    // somewhere, sorted.
    let slices_at = |s: usize, players: &[usize]| -> Vec<Direction> {
        let mut out = vec![Vec::new()];
        for &i in players {
            let mut next = Vec::new();
            for partial in &out {
                for &a in &arena.available[s][i] {
                    let mut slice = partial.clone();
                    slice.push(a);
                    next.push(slice);
                }
            }
            out = next;
        }
        out
    };
    let global_slices = |players: &[usize]| -> Vec<Direction> {
        let mut all: Vec<Direction> = (0..arena.state_count())
            .flat_map(|s| slices_at(s, players))
            .collect();
        all.sort();
        all.dedup();
        all
    };
    let slice_name = |players: &[usize], slice: &Direction| -> String {
        if players.is_empty() {
            return "noop".to_owned();
        }
        players
            .iter()
            .zip(slice)
            .map(|(&i, &a)| arena.actions[i][a].as_str())
            .collect::<Vec<_>>()
            .join("+")
    };

    let own_slices = global_slices(&sorted);
    let opp_slices = global_slices(&rest);
    let own_index: BTreeMap<&Direction, usize> =
        own_slices.iter().enumerate().map(|(k, v)| (v, k)).collect();
    let opp_index: BTreeMap<&Direction, usize> =
        opp_slices.iter().enumerate().map(|(k, v)| (v, k)).collect();

    let mut available = Vec::with_capacity(arena.state_count());
    let mut transitions = BTreeMap::new();
    for s in 0..arena.state_count() {
        let own_here: Vec<usize> = slices_at(s, &sorted).iter().map(|sl| own_index[sl]).collect();
        let opp_here: Vec<usize> = slices_at(s, &rest).iter().map(|sl| opp_index[sl]).collect();
        for &a1 in &own_here {
            for &a2 in &opp_here {
                let dir = compose_direction(
                    arena.player_count(),
                    &sorted,
                    &own_slices[a1],
                    &rest,
                    &opp_slices[a2],
                );
                let dist = arena.transition(s, &dir).clone();
                transitions.insert((s, vec![a1, a2]), dist);
            }
        }
        let mut own_sorted = own_here;
        own_sorted.sort_unstable();
        let mut opp_sorted = opp_here;
        opp_sorted.sort_unstable();
        available.push(vec![own_sorted, opp_sorted]);
    }

    let coalition_name = sorted
        .iter()
        .map(|&i| arena.players[i].as_str())
        .collect::<Vec<_>>()
        .join("+");
    let rest_name = if rest.is_empty() {
        "nobody".to_owned()
    } else {
        rest.iter().map(|&i| arena.players[i].as_str()).collect::<Vec<_>>().join("+")
    };
    Ok(Csga {
        players: vec![coalition_name, rest_name],
        states: arena.states.clone(),
        init: arena.init,
        actions: vec![
            own_slices.iter().map(|sl| slice_name(&sorted, sl)).collect(),
            if rest.is_empty() {
                vec!["noop".to_owned()]
            } else {
                opp_slices.iter().map(|sl| slice_name(&rest, sl)).collect()
            },
        ],
        available,
        transitions,
    })
}
