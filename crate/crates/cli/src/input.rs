//! JSON file formats accepted on the command line and their conversion
//! into core types. Files refer to players, states, and actions by name;
//! conversion resolves every name to an index and rejects the first
//! reference it cannot place. Structural soundness beyond that (transition
//! totality, distribution weights, availability) is left to the core
//! validators so that `rv validate` can report all findings at once.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use rv_core::model::parse_ratio;
use rv_core::{parse_ltl, Csg, Csga, Distribution, PropSet, RvError, StrategyTransducer};

/// A game model as written on disk.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    players: Vec<String>,
    states: Vec<String>,
    init: String,
    /// Global action names per player.
    actions: Vec<Vec<String>>,
    /// `available[state][player]` lists the action names usable there.
    available: Vec<Vec<Vec<String>>>,
    transitions: Vec<TransitionRow>,
    /// Atomic propositions holding at each state.
    labels: Vec<Vec<String>>,
    /// One LTL goal per player.
    goals: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionRow {
    state: String,
    /// One action name per player, in player order.
    profile: Vec<String>,
    /// Successor state name to probability, as a fraction string.
    dist: BTreeMap<String, String>,
}

/// One player's strategy as written on disk: named memory states, a
/// deterministic memory update `delta[memory][game state]`, and action
/// distributions `tau[memory][game state][action]` with fraction weights.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyEntry {
    states: Vec<String>,
    init: String,
    delta: BTreeMap<String, BTreeMap<String, String>>,
    tau: BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, RvError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RvError::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| RvError::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<Csg, RvError> {
    read_json::<ModelFile>(path)?.into_game()
}

/// Loads a full strategy profile: one entry per player, in player order.
pub fn load_profile(g: &Csg, path: &Path) -> Result<Vec<StrategyTransducer>, RvError> {
    let entries: Vec<StrategyEntry> = read_json(path)?;
    if entries.len() != g.arena.player_count() {
        return Err(RvError::Profile(format!(
            "expected one strategy per player ({}), got {}",
            g.arena.player_count(),
            entries.len()
        )));
    }
    entries
        .iter()
        .enumerate()
        .map(|(i, entry)| transducer_for(g, i, entry))
        .collect()
}

/// Loads the strategies a coalition switches to, in coalition order.
pub fn load_deviation(
    g: &Csg,
    coalition: &[usize],
    path: &Path,
) -> Result<Vec<StrategyTransducer>, RvError> {
    let entries: Vec<StrategyEntry> = read_json(path)?;
    if entries.len() != coalition.len() {
        return Err(RvError::Profile(format!(
            "expected one strategy per coalition member ({}), got {}",
            coalition.len(),
            entries.len()
        )));
    }
    coalition
        .iter()
        .zip(&entries)
        .map(|(&i, entry)| transducer_for(g, i, entry))
        .collect()
}

/// Resolves a comma-separated list of player names to indices.
pub fn parse_coalition(g: &Csg, text: &str) -> Result<Vec<usize>, RvError> {
    let mut members = Vec::new();
    for piece in text.split(',') {
        let name = piece.trim();
        if name.is_empty() {
            return Err(RvError::InvalidInput(
                "empty player name in coalition list".to_owned(),
            ));
        }
        let i = g
            .arena
            .players
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| RvError::InvalidInput(format!("unknown player '{name}'")))?;
        members.push(i);
    }
    Ok(members)
}

fn ensure_unique(names: &[String], what: &str) -> Result<(), RvError> {
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(RvError::Model(format!("duplicate {what} '{name}'")));
        }
    }
    Ok(())
}

impl ModelFile {
    pub fn into_game(self) -> Result<Csg, RvError> {
        let bad = RvError::Model;
        ensure_unique(&self.players, "player")?;
        ensure_unique(&self.states, "state")?;
        let n = self.players.len();
        if self.actions.len() != n {
            return Err(bad(format!("actions lists {} players, model has {n}", self.actions.len())));
        }
        for (i, acts) in self.actions.iter().enumerate() {
            ensure_unique(acts, &format!("action for player '{}'", self.players[i]))?;
        }
        if self.available.len() != self.states.len() {
            return Err(bad(format!(
                "available covers {} states, model has {}",
                self.available.len(),
                self.states.len()
            )));
        }
        if self.labels.len() != self.states.len() {
            return Err(bad(format!(
                "labels cover {} states, model has {}",
                self.labels.len(),
                self.states.len()
            )));
        }
        if self.goals.len() != n {
            return Err(bad(format!("goals list {} players, model has {n}", self.goals.len())));
        }

        let state_index = |name: &str| {
            self.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| RvError::Model(format!("unknown state '{name}'")))
        };
        let action_index = |player: usize, name: &str| {
            self.actions[player]
                .iter()
                .position(|a| a == name)
                .ok_or_else(|| {
                    RvError::Model(format!(
                        "unknown action '{name}' for player '{}'",
                        self.players[player]
                    ))
                })
        };

        let init = state_index(&self.init)?;

        let mut available = Vec::with_capacity(self.states.len());
        for (s, row) in self.available.iter().enumerate() {
            if row.len() != n {
                return Err(bad(format!(
                    "available at state '{}' lists {} players, model has {n}",
                    self.states[s],
                    row.len()
                )));
            }
            let mut per_player = Vec::with_capacity(n);
            for (i, names) in row.iter().enumerate() {
                let mut acts = names
                    .iter()
                    .map(|a| action_index(i, a))
                    .collect::<Result<Vec<_>, _>>()?;
                acts.sort_unstable();
                acts.dedup();
                per_player.push(acts);
            }
            available.push(per_player);
        }

        let mut transitions = BTreeMap::new();
        for row in &self.transitions {
            let s = state_index(&row.state)?;
            if row.profile.len() != n {
                return Err(bad(format!(
                    "transition at '{}' lists {} actions, model has {n} players",
                    row.state,
                    row.profile.len()
                )));
            }
            let dir = row
                .profile
                .iter()
                .enumerate()
                .map(|(i, a)| action_index(i, a))
                .collect::<Result<Vec<_>, _>>()?;
            let mut dist: Distribution = Vec::with_capacity(row.dist.len());
            for (target, weight) in &row.dist {
                dist.push((state_index(target)?, parse_ratio(weight)?));
            }
            // the file orders entries by name; the core orders by index
            dist.sort_by_key(|&(t, _)| t);
            if transitions.insert((s, dir), dist).is_some() {
                return Err(bad(format!(
                    "duplicate transition at '{}' under profile [{}]",
                    row.state,
                    row.profile.join(", ")
                )));
            }
        }

        let labels = self
            .labels
            .iter()
            .map(|props| props.iter().cloned().collect::<PropSet>())
            .collect();
        let goals = self
            .goals
            .iter()
            .map(|text| parse_ltl(text))
            .collect::<Result<Vec<_>, _>>()?;

        Ok(Csg {
            arena: Csga {
                players: self.players,
                states: self.states,
                init,
                actions: self.actions,
                available,
                transitions,
            },
            labels,
            goals,
        })
    }
}

fn transducer_for(
    g: &Csg,
    player: usize,
    entry: &StrategyEntry,
) -> Result<StrategyTransducer, RvError> {
    let who = &g.arena.players[player];
    let fail = |msg: String| RvError::Profile(format!("strategy for player '{who}': {msg}"));
    if entry.states.is_empty() {
        return Err(fail("no memory states".to_owned()));
    }
    for (i, q) in entry.states.iter().enumerate() {
        if entry.states[..i].contains(q) {
            return Err(fail(format!("duplicate memory state '{q}'")));
        }
    }
    let memory_index = |name: &str| {
        entry
            .states
            .iter()
            .position(|q| q == name)
            .ok_or_else(|| fail(format!("unknown memory state '{name}'")))
    };
    let init = memory_index(&entry.init)?;

    // reject rows keyed by names the tables cannot mean
    for q in entry.delta.keys().chain(entry.tau.keys()) {
        memory_index(q)?;
    }
    for row in entry.delta.values() {
        for s in row.keys() {
            if !g.arena.states.contains(s) {
                return Err(fail(format!("unknown game state '{s}'")));
            }
        }
    }
    for row in entry.tau.values() {
        for s in row.keys() {
            if !g.arena.states.contains(s) {
                return Err(fail(format!("unknown game state '{s}'")));
            }
        }
    }

    let mut delta = Vec::with_capacity(entry.states.len());
    let mut tau = Vec::with_capacity(entry.states.len());
    for q in &entry.states {
        let drow = entry
            .delta
            .get(q)
            .ok_or_else(|| fail(format!("no delta row for memory state '{q}'")))?;
        let trow = entry
            .tau
            .get(q)
            .ok_or_else(|| fail(format!("no tau row for memory state '{q}'")))?;
        let mut dq = Vec::with_capacity(g.arena.state_count());
        let mut tq = Vec::with_capacity(g.arena.state_count());
        for s_name in &g.arena.states {
            let next = drow.get(s_name).ok_or_else(|| {
                fail(format!("no successor for memory '{q}' at state '{s_name}'"))
            })?;
            dq.push(memory_index(next)?);
            let dist_map = trow.get(s_name).ok_or_else(|| {
                fail(format!("no action distribution for memory '{q}' at state '{s_name}'"))
            })?;
            let mut dist: Distribution = Vec::with_capacity(dist_map.len());
            for (action, weight) in dist_map {
                let a = g.arena.actions[player]
                    .iter()
                    .position(|x| x == action)
                    .ok_or_else(|| fail(format!("unknown action '{action}'")))?;
                dist.push((a, parse_ratio(weight)?));
            }
            dist.sort_by_key(|&(a, _)| a);
            tq.push(dist);
        }
        delta.push(dq);
        tau.push(tq);
    }

    Ok(StrategyTransducer { states: entry.states.clone(), init, delta, tau })
}
