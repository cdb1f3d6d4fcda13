//! Decision procedures for equilibrium and core queries.
//!
//! All queries share one pipeline: the game is multiplied with one
//! deterministic parity automaton per goal (plus one for the specification
//! formula), turning every LTL question into a parity question on a single
//! product. Stability against unilateral deviations is then captured by
//! *punishing regions*: the states where the other players can jointly keep
//! a given player from achieving its goal almost surely. A profile can hold
//! a loser down exactly when its play never gives that loser a one-action
//! escape from the punishing region, so searching for equilibria reduces to
//! sweeping over candidate winner sets and model checking a pruned
//! one-controller process in each round.
//!
//! Verdicts come back as [`QueryVerdict`]: a yes/no answer plus optional
//! evidence such as the supported winner set or a blocking coalition.
//! Witnesses never spell out strategies; equilibria may need infinite
//! memory, so the evidence names the regions and the restricted process a
//! controller can be read off from instead.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, One};
use serde::Serialize;

use crate::automata::DEFAULT_DPW_STATE_CAP;
use crate::congame::{as_winning_region, is_winnable};
use crate::error::RvError;
use crate::ltl::{evaluate_on_lasso, LassoWord, LtlFormula, PropSet};
use crate::model::{
    build_parity_game, coalition_arena, complement_players, induced_markov_chain, induced_mdp,
    validate_model, Csg, Csga, Cspg, Direction, McStateInfo, Mdp, MdpChoice, StrategyTransducer,
};
use crate::qualmc::mc_as_ltl;
use crate::qualmdp::{mdp_as_ltl, mdp_nz_ltl, mdp_satisfies, QualAtom};

/// How the specification formula must be satisfied. Player goals are always
/// read almost surely; this mode applies to the formula of the query only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SatMode {
    /// Satisfied with probability one.
    AlmostSure,
    /// Satisfied with positive probability.
    NonZero,
}

/// Knobs shared by every query.
#[derive(Clone, Debug)]
pub struct RvOptions {
    pub mode: SatMode,
    /// State cap handed to the automaton pipeline.
    pub max_dpw_states: usize,
}

impl Default for RvOptions {
    fn default() -> Self {
        RvOptions { mode: SatMode::AlmostSure, max_dpw_states: DEFAULT_DPW_STATE_CAP }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

/// Size of the one-controller process a finding was checked on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictionSummary {
    pub states: usize,
    pub choices: usize,
}

/// Evidence attached to a verdict. Which fields are present depends on the
/// query and on the branch that produced the answer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Supported winner set: players whose goals hold almost surely under
    /// the found behaviour.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winners: Option<Vec<String>>,
    /// Players held inside their punishing regions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub punished: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restriction: Option<RestrictionSummary>,
    /// A single player responsible for a negative answer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub player: Option<String>,
    /// A coalition responsible for a negative answer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coalition: Option<Vec<String>>,
}

/// Outcome of a query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueryVerdict {
    pub answer: Answer,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl QueryVerdict {
    fn yes(witness: Option<Witness>) -> Self {
        QueryVerdict { answer: Answer::Yes, witness }
    }

    fn no(witness: Option<Witness>) -> Self {
        QueryVerdict { answer: Answer::No, witness }
    }

    pub fn is_yes(&self) -> bool {
        self.answer == Answer::Yes
    }
}

fn ensure_valid(g: &Csg) -> Result<(), RvError> {
    let diags = validate_model(g);
    if diags.is_empty() {
        return Ok(());
    }
    let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
    Err(RvError::Model(text.join("; ")))
}

fn player_names(g: &Csg, players: &[usize]) -> Vec<String> {
    players.iter().map(|&i| g.arena.players[i].clone()).collect()
}

/// All subsets of `pool`, ordered by size and lexicographically within a
/// size. Queries sweep subsets in this order so witnesses are reproducible.
fn subsets_small_first(pool: &[usize]) -> Vec<Vec<usize>> {
    assert!(pool.len() < usize::BITS as usize);
    let mut out: Vec<Vec<usize>> = (0..1usize << pool.len())
        .map(|mask| {
            pool.iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &i)| i)
                .collect()
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

fn subsets_large_first(pool: &[usize]) -> Vec<Vec<usize>> {
    let mut out = subsets_small_first(pool);
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    out
}

/// Conjunction of the goals of the given players. The slice must be
/// nonempty.
fn goal_conjunction(g: &Csg, players: &[usize]) -> LtlFormula {
    let mut it = players.iter();
    let first = g.goals[*it.next().expect("nonempty coalition")].clone();
    it.fold(first, |acc, &i| LtlFormula::and(acc, g.goals[i].clone()))
}

/// Shifting every priority up by one complements a deterministic min-even
/// parity condition exactly.
fn complemented(prio: &[u32]) -> Vec<u32> {
    prio.iter().map(|&p| p + 1).collect()
}

/// Transfers a priority vector over product states onto a process whose
/// states remember their product state.
fn atom_on(mdp: &Mdp, atom: &QualAtom) -> QualAtom {
    QualAtom {
        mode: atom.mode,
        prio: mdp.info.iter().map(|inf| atom.prio[inf.game_state]).collect(),
    }
}

/// The atom the specification formula contributes to a query. The plain
/// reading uses the formula's own priorities; the negated reading (used by
/// the universally quantified queries) complements them and swaps the
/// demand through the duality "not almost-sure f" = "non-zero not-f".
fn spec_atom(gp: &Cspg, mode: SatMode, negated: bool) -> QualAtom {
    let prio = &gp.prios[gp.arena.player_count()];
    match (negated, mode) {
        (false, SatMode::AlmostSure) => QualAtom::almost_sure(prio.clone()),
        (false, SatMode::NonZero) => QualAtom::non_zero(prio.clone()),
        (true, SatMode::AlmostSure) => QualAtom::non_zero(complemented(prio)),
        (true, SatMode::NonZero) => QualAtom::almost_sure(complemented(prio)),
    }
}

/// The punishing region of player `j` in a parity product: the states
/// where the remaining players can jointly keep `j` from achieving its
/// objective almost surely, whatever `j` does. By determinacy of
/// concurrent parity games under almost-sure winning this is the exact
/// complement of the region `j` can win single-handedly.
pub fn punishing_region(gp: &Cspg, j: usize) -> Result<Vec<bool>, RvError> {
    let solo = coalition_arena(&gp.arena, &[j])?;
    Ok(as_winning_region(&solo, &gp.prios[j]).into_iter().map(|w| !w).collect())
}

/// Result of pruning a parity product down to punishment-closed play.
#[derive(Clone, Debug)]
pub struct PunishmentRestriction {
    /// Product states that survived, indexed like the input product.
    pub kept: Vec<bool>,
    /// Surviving directions per product state; empty for dropped states.
    pub kept_dirs: Vec<Vec<Direction>>,
    /// The surviving choices merged into a one-controller process, with
    /// each state remembering its product state. `None` when the initial
    /// state itself was cut.
    pub mdp: Option<Mdp>,
}

impl PunishmentRestriction {
    pub fn summary(&self) -> RestrictionSummary {
        RestrictionSummary {
            states: self.kept.iter().filter(|&&k| k).count(),
            choices: self.kept_dirs.iter().map(Vec::len).sum(),
        }
    }
}

/// Cuts a parity product down to the play that keeps every player in
/// `losers` punishable. A state survives when it lies in all their
/// punishing regions; a direction survives when no single player in
/// `losers` can redirect it outside its own punishing region by changing
/// only its own action. Removing directions can strand states, so removal
/// is iterated to a fixpoint. `puns` must hold the punishing region of
/// every listed player.
pub fn restrict_to_punishment(
    gp: &Cspg,
    losers: &[usize],
    puns: &BTreeMap<usize, Vec<bool>>,
) -> Result<PunishmentRestriction, RvError> {
    let n_states = gp.state_count();
    for &j in losers {
        match puns.get(&j) {
            Some(pun) if pun.len() == n_states => {}
            Some(_) => {
                return Err(RvError::InvalidInput(format!(
                    "punishing region for player {j} has the wrong length"
                )))
            }
            None => {
                return Err(RvError::InvalidInput(format!(
                    "missing punishing region for player {j}"
                )))
            }
        }
    }

    let mut kept: Vec<bool> =
        (0..n_states).map(|v| losers.iter().all(|&j| puns[&j][v])).collect();

    // Security of a direction is judged against the original punishing
    // regions and does not change as states are dropped.
    let secure: Vec<Vec<Direction>> = (0..n_states)
        .map(|v| {
            if !kept[v] {
                return Vec::new();
            }
            gp.arena
                .directions(v)
                .into_iter()
                .filter(|dir| {
                    losers.iter().all(|&j| {
                        let pun = &puns[&j];
                        gp.arena.available[v][j].iter().all(|&alt| {
                            let mut var = dir.clone();
                            var[j] = alt;
                            gp.arena.transition(v, &var).iter().all(|(w, _)| pun[*w])
                        })
                    })
                })
                .collect()
        })
        .collect();

    let mut kept_dirs: Vec<Vec<Direction>> = vec![Vec::new(); n_states];
    loop {
        let mut changed = false;
        for v in 0..n_states {
            if !kept[v] {
                kept_dirs[v].clear();
                continue;
            }
            let dirs: Vec<Direction> = secure[v]
                .iter()
                .filter(|dir| gp.arena.transition(v, dir).iter().all(|(w, _)| kept[*w]))
                .cloned()
                .collect();
            if dirs.is_empty() {
                kept[v] = false;
                changed = true;
            }
            kept_dirs[v] = dirs;
        }
        if !changed {
            break;
        }
    }

    let mdp = kept[gp.arena.init].then(|| {
        let mut remap = vec![usize::MAX; n_states];
        let mut count = 0;
        for v in 0..n_states {
            if kept[v] {
                remap[v] = count;
                count += 1;
            }
        }
        let mut choices = Vec::with_capacity(count);
        let mut labels = Vec::with_capacity(count);
        let mut info = Vec::with_capacity(count);
        for v in 0..n_states {
            if !kept[v] {
                continue;
            }
            choices.push(
                kept_dirs[v]
                    .iter()
                    .map(|dir| MdpChoice {
                        tag: dir.clone(),
                        dist: gp
                            .arena
                            .transition(v, dir)
                            .iter()
                            .map(|(w, pr)| (remap[*w], pr.clone()))
                            .collect(),
                    })
                    .collect(),
            );
            labels.push(gp.labels[v].clone());
            info.push(McStateInfo { game_state: v, memory: Vec::new() });
        }
        Mdp { init: remap[gp.arena.init], choices, labels, info }
    });

    Ok(PunishmentRestriction { kept, kept_dirs, mdp })
}

/// Is the profile a Nash equilibrium? A profile fails exactly when some
/// player whose goal is not met almost surely could meet it almost surely
/// by deviating alone.
pub fn membership(
    g: &Csg,
    profile: &[StrategyTransducer],
    opts: &RvOptions,
) -> Result<QueryVerdict, RvError> {
    ensure_valid(g)?;
    let n = g.arena.player_count();
    let mc = induced_markov_chain(g, profile)?;
    let mut winners = Vec::new();
    for i in 0..n {
        if mc_as_ltl(&mc, &g.goals[i], opts.max_dpw_states)? {
            winners.push(i);
            continue;
        }
        let fixed: BTreeMap<usize, StrategyTransducer> =
            (0..n).filter(|&j| j != i).map(|j| (j, profile[j].clone())).collect();
        let solo = induced_mdp(g, &fixed)?;
        if mdp_as_ltl(&solo, &g.goals[i], opts.max_dpw_states)? {
            let witness =
                Witness { player: Some(g.arena.players[i].clone()), ..Default::default() };
            return Ok(QueryVerdict::no(Some(witness)));
        }
    }
    let witness = Witness { winners: Some(player_names(g, &winners)), ..Default::default() };
    Ok(QueryVerdict::yes(Some(witness)))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quantifier {
    Exists,
    ForAll,
}

/// Shared sweep of the two Nash queries. Candidate winner sets are tried
/// from largest to smallest; for each, the complement is held in its
/// punishing regions and the pruned process is checked for a behaviour
/// that wins for every candidate and treats the specification formula as
/// demanded. For the existential query a hit is a "yes", for the
/// universal query it is a counterexample.
fn nash_sweep(
    g: &Csg,
    phi: &LtlFormula,
    opts: &RvOptions,
    quant: Quantifier,
) -> Result<QueryVerdict, RvError> {
    ensure_valid(g)?;
    let n = g.arena.player_count();
    let gp = build_parity_game(g, phi, opts.max_dpw_states)?;
    let spec = spec_atom(&gp, opts.mode, quant == Quantifier::ForAll);

    let mut puns: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
    let everyone: Vec<usize> = (0..n).collect();
    for losers in subsets_small_first(&everyone) {
        for &j in &losers {
            if let Entry::Vacant(slot) = puns.entry(j) {
                slot.insert(punishing_region(&gp, j)?);
            }
        }
        let restriction = restrict_to_punishment(&gp, &losers, &puns)?;
        let Some(mdp) = &restriction.mdp else { continue };

        let winners = complement_players(n, &losers);
        let mut atoms = vec![atom_on(mdp, &spec)];
        for &i in &winners {
            atoms.push(atom_on(mdp, &QualAtom::almost_sure(gp.prios[i].clone())));
        }
        if mdp_satisfies(mdp, &atoms).is_some() {
            let witness = Witness {
                winners: Some(player_names(g, &winners)),
                punished: Some(player_names(g, &losers)),
                restriction: Some(restriction.summary()),
                ..Default::default()
            };
            return Ok(match quant {
                Quantifier::Exists => QueryVerdict::yes(Some(witness)),
                Quantifier::ForAll => QueryVerdict::no(Some(witness)),
            });
        }
    }
    Ok(match quant {
        Quantifier::Exists => QueryVerdict::no(None),
        Quantifier::ForAll => QueryVerdict::yes(None),
    })
}

/// Does some Nash equilibrium satisfy the specification formula?
pub fn e_nash(g: &Csg, phi: &LtlFormula, opts: &RvOptions) -> Result<QueryVerdict, RvError> {
    nash_sweep(g, phi, opts, Quantifier::Exists)
}

/// Do all Nash equilibria satisfy the specification formula? Answered by
/// searching for an equilibrium satisfying its negation.
pub fn a_nash(g: &Csg, phi: &LtlFormula, opts: &RvOptions) -> Result<QueryVerdict, RvError> {
    nash_sweep(g, phi, opts, Quantifier::ForAll)
}

/// Does the game have any Nash equilibrium at all?
pub fn non_emptiness(g: &Csg, opts: &RvOptions) -> Result<QueryVerdict, RvError> {
    e_nash(g, &LtlFormula::True, opts)
}

/// Shared sweep of the two core queries. A candidate winner set `a` is
/// feasible when full cooperation can satisfy the specification formula as
/// demanded, the goals of `a` almost surely, and leave everyone outside
/// `a` short of almost-sure satisfaction; it is stable when no coalition
/// of outsiders can win all its goals on its own. The core is nonempty for
/// the formula exactly when some candidate is feasible and stable.
fn core_sweep(
    g: &Csg,
    phi: &LtlFormula,
    opts: &RvOptions,
    quant: Quantifier,
) -> Result<QueryVerdict, RvError> {
    ensure_valid(g)?;
    let n = g.arena.player_count();
    let gp = build_parity_game(g, phi, opts.max_dpw_states)?;
    let coop = restrict_to_punishment(&gp, &[], &BTreeMap::new())?
        .mdp
        .expect("an unrestricted product keeps its initial state");
    let spec = spec_atom(&gp, opts.mode, quant == Quantifier::ForAll);

    let mut winnable: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
    let everyone: Vec<usize> = (0..n).collect();
    for a in subsets_large_first(&everyone) {
        let mut atoms = vec![atom_on(&coop, &spec)];
        for i in 0..n {
            let atom = if a.binary_search(&i).is_ok() {
                QualAtom::almost_sure(gp.prios[i].clone())
            } else {
                QualAtom::non_zero(complemented(&gp.prios[i]))
            };
            atoms.push(atom_on(&coop, &atom));
        }
        if mdp_satisfies(&coop, &atoms).is_none() {
            continue;
        }

        let outside = complement_players(n, &a);
        let mut blocked = false;
        for b in subsets_small_first(&outside) {
            if b.is_empty() {
                continue;
            }
            let entry = match winnable.get(&b) {
                Some(&w) => w,
                None => {
                    let w =
                        is_winnable(g, &b, &goal_conjunction(g, &b), opts.max_dpw_states)?;
                    winnable.insert(b.clone(), w);
                    w
                }
            };
            if entry {
                blocked = true;
                break;
            }
        }
        if !blocked {
            let witness =
                Witness { winners: Some(player_names(g, &a)), ..Default::default() };
            return Ok(match quant {
                Quantifier::Exists => QueryVerdict::yes(Some(witness)),
                Quantifier::ForAll => QueryVerdict::no(Some(witness)),
            });
        }
    }
    Ok(match quant {
        Quantifier::Exists => QueryVerdict::no(None),
        Quantifier::ForAll => QueryVerdict::yes(None),
    })
}

/// Does some member of the core satisfy the specification formula?
pub fn e_core(g: &Csg, phi: &LtlFormula, opts: &RvOptions) -> Result<QueryVerdict, RvError> {
    core_sweep(g, phi, opts, Quantifier::Exists)
}

/// Do all members of the core satisfy the specification formula? Answered
/// by searching the core for a counterexample satisfying the negation.
pub fn a_core(g: &Csg, phi: &LtlFormula, opts: &RvOptions) -> Result<QueryVerdict, RvError> {
    core_sweep(g, phi, opts, Quantifier::ForAll)
}

/// Is the profile in the core, i.e. free of beneficial group deviations?
/// A group of players whose goals the profile misses blocks it exactly
/// when the group could cooperatively guarantee all their goals almost
/// surely against every behaviour of the rest.
pub fn core_membership(
    g: &Csg,
    profile: &[StrategyTransducer],
    opts: &RvOptions,
) -> Result<QueryVerdict, RvError> {
    ensure_valid(g)?;
    let n = g.arena.player_count();
    let mc = induced_markov_chain(g, profile)?;
    let mut winners = Vec::new();
    let mut losers = Vec::new();
    for i in 0..n {
        if mc_as_ltl(&mc, &g.goals[i], opts.max_dpw_states)? {
            winners.push(i);
        } else {
            losers.push(i);
        }
    }
    for b in subsets_small_first(&losers) {
        if b.is_empty() {
            continue;
        }
        if is_winnable(g, &b, &goal_conjunction(g, &b), opts.max_dpw_states)? {
            let witness =
                Witness { coalition: Some(player_names(g, &b)), ..Default::default() };
            return Ok(QueryVerdict::no(Some(witness)));
        }
    }
    let witness = Witness { winners: Some(player_names(g, &winners)), ..Default::default() };
    Ok(QueryVerdict::yes(Some(witness)))
}

/// Is the given joint strategy a beneficial deviation for the coalition?
/// It is when every coalition member currently misses its goal, and after
/// the coalition switches, no behaviour of the remaining players leaves
/// any member's goal unmet with positive probability.
pub fn beneficial_deviation(
    g: &Csg,
    profile: &[StrategyTransducer],
    coalition: &[usize],
    deviation: &[StrategyTransducer],
    opts: &RvOptions,
) -> Result<QueryVerdict, RvError> {
    ensure_valid(g)?;
    let n = g.arena.player_count();
    if coalition.is_empty() {
        return Err(RvError::InvalidInput("deviating coalition must be nonempty".into()));
    }
    let set: BTreeSet<usize> = coalition.iter().copied().collect();
    if set.len() != coalition.len() || set.iter().any(|&i| i >= n) {
        return Err(RvError::InvalidInput(format!(
            "coalition {coalition:?} is not a set of player indices"
        )));
    }
    if deviation.len() != coalition.len() {
        return Err(RvError::InvalidInput(
            "the deviation needs one transducer per coalition member".into(),
        ));
    }

    let mc = induced_markov_chain(g, profile)?;
    let fixed: BTreeMap<usize, StrategyTransducer> =
        coalition.iter().copied().zip(deviation.iter().cloned()).collect();
    let adversarial = induced_mdp(g, &fixed)?;
    for &i in &set {
        if mc_as_ltl(&mc, &g.goals[i], opts.max_dpw_states)? {
            let witness =
                Witness { player: Some(g.arena.players[i].clone()), ..Default::default() };
            return Ok(QueryVerdict::no(Some(witness)));
        }
        let spoiler = LtlFormula::negate(g.goals[i].clone());
        if mdp_nz_ltl(&adversarial, &spoiler, opts.max_dpw_states)? {
            let witness =
                Witness { player: Some(g.arena.players[i].clone()), ..Default::default() };
            return Ok(QueryVerdict::no(Some(witness)));
        }
    }
    let sorted: Vec<usize> = set.into_iter().collect();
    let witness = Witness { coalition: Some(player_names(g, &sorted)), ..Default::default() };
    Ok(QueryVerdict::yes(Some(witness)))
}

/// A memoryless profile that plays the first available action everywhere.
fn first_action_profile(g: &Csg) -> Vec<StrategyTransducer> {
    (0..g.arena.player_count())
        .map(|i| StrategyTransducer {
            states: vec!["q".to_owned()],
            init: 0,
            delta: vec![vec![0; g.arena.state_count()]],
            tau: vec![(0..g.arena.state_count())
                .map(|s| vec![(g.arena.available[s][i][0], BigRational::one())])
                .collect()],
        })
        .collect()
}

/// A proposition name not used by the process labels or the formula.
fn fresh_prop(k: &Mdp, phi: &LtlFormula) -> String {
    let mut taken: BTreeSet<String> = phi.propositions();
    for label in &k.labels {
        taken.extend(label.iter().cloned());
    }
    let mut name = "mark".to_owned();
    while taken.contains(&name) {
        name.push('x');
    }
    name
}

fn point(target: usize) -> Vec<(usize, BigRational)> {
    vec![(target, BigRational::one())]
}

/// Wraps a decision process into a one-player game whose fixed profile
/// stays out of the process: from a fresh start the single player either
/// retires to an unlabeled sink or enters the process, and its goal
/// requires entering and then satisfying `phi`. The profile that retires
/// is an equilibrium exactly when no controller inside the process
/// achieves `phi` almost surely, so membership on the wrapped game decides
/// almost-sure satisfaction in the process.
pub fn membership_reduction(k: &Mdp, phi: &LtlFormula) -> (Csg, Vec<StrategyTransducer>) {
    let kn = k.state_count();
    assert!(k.choices.iter().all(|c| !c.is_empty()), "every process state needs a choice");
    let mark = fresh_prop(k, phi);
    let max_choices = k.choices.iter().map(Vec::len).max().unwrap_or(0);

    let mut states = vec!["start".to_owned(), "sink".to_owned()];
    states.extend((0..kn).map(|v| format!("k{v}")));
    let mut actions = vec!["out".to_owned(), "enter".to_owned()];
    actions.extend((0..max_choices).map(|c| format!("m{c}")));

    let mut available = vec![vec![vec![0, 1]], vec![vec![0]]];
    available.extend((0..kn).map(|v| vec![(0..k.choices[v].len()).map(|c| 2 + c).collect()]));

    let mut transitions = BTreeMap::new();
    transitions.insert((0, vec![0]), point(1));
    transitions.insert((0, vec![1]), point(2 + k.init));
    transitions.insert((1, vec![0]), point(1));
    for v in 0..kn {
        for (c, choice) in k.choices[v].iter().enumerate() {
            let dist = choice.dist.iter().map(|(w, pr)| (2 + w, pr.clone())).collect();
            transitions.insert((2 + v, vec![2 + c]), dist);
        }
    }

    let mut labels = vec![PropSet::new(), PropSet::new()];
    labels.extend(k.labels.iter().cloned());
    labels[2 + k.init].insert(mark.clone());

    let goal = LtlFormula::next(LtlFormula::and(phi.clone(), LtlFormula::prop(mark)));
    let g = Csg {
        arena: Csga {
            players: vec!["one".to_owned()],
            states,
            init: 0,
            actions: vec![actions],
            available,
            transitions,
        },
        labels,
        goals: vec![goal],
    };
    let profile = first_action_profile(&g);
    (g, profile)
}

/// Wraps a decision process into a two-player trap: if the first player
/// cooperates, the second player's switch steers the play between a fixed
/// word satisfying `phi` and one falsifying it; if the first player bails
/// out, the play falls into the process with the first player at the
/// controls. The returned deviation (the second player switching) is
/// beneficial exactly when no controller of the process reaches `phi`
/// with positive probability. The two words must satisfy and falsify
/// `phi` respectively.
pub fn deviation_reduction(
    k: &Mdp,
    phi: &LtlFormula,
    word_phi: &LassoWord,
    word_not_phi: &LassoWord,
) -> (Csg, Vec<StrategyTransducer>, Vec<usize>, Vec<StrategyTransducer>) {
    debug_assert!(evaluate_on_lasso(phi, word_phi));
    debug_assert!(!evaluate_on_lasso(phi, word_not_phi));
    assert!(!word_phi.cycle.is_empty() && !word_not_phi.cycle.is_empty());
    let kn = k.state_count();
    assert!(k.choices.iter().all(|c| !c.is_empty()), "every process state needs a choice");
    let max_choices = k.choices.iter().map(Vec::len).max().unwrap_or(0);

    let chain_phi: Vec<PropSet> =
        word_phi.prefix.iter().chain(&word_phi.cycle).cloned().collect();
    let chain_not: Vec<PropSet> =
        word_not_phi.prefix.iter().chain(&word_not_phi.cycle).cloned().collect();
    let c1 = 1;
    let c2 = c1 + chain_phi.len();
    let k0 = c2 + chain_not.len();

    let mut states = vec!["start".to_owned()];
    states.extend((0..chain_phi.len()).map(|i| format!("w{i}")));
    states.extend((0..chain_not.len()).map(|i| format!("v{i}")));
    states.extend((0..kn).map(|v| format!("k{v}")));

    let mut actions_one = vec!["out".to_owned(), "enter".to_owned()];
    actions_one.extend((0..max_choices).map(|c| format!("m{c}")));
    let actions_two = vec!["keep".to_owned(), "flip".to_owned()];

    let mut available = vec![vec![vec![0, 1], vec![0, 1]]];
    available.extend(vec![vec![vec![0], vec![0]]; chain_phi.len() + chain_not.len()]);
    available.extend(
        (0..kn).map(|v| vec![(0..k.choices[v].len()).map(|c| 2 + c).collect(), vec![0]]),
    );

    let chain_step = |start: usize, len: usize, i: usize, prefix_len: usize| {
        if i + 1 < len {
            start + i + 1
        } else {
            start + prefix_len
        }
    };
    let mut transitions = BTreeMap::new();
    transitions.insert((0, vec![0, 0]), point(c1));
    transitions.insert((0, vec![0, 1]), point(c2));
    transitions.insert((0, vec![1, 0]), point(k0 + k.init));
    transitions.insert((0, vec![1, 1]), point(k0 + k.init));
    for i in 0..chain_phi.len() {
        let next = chain_step(c1, chain_phi.len(), i, word_phi.prefix.len());
        transitions.insert((c1 + i, vec![0, 0]), point(next));
    }
    for i in 0..chain_not.len() {
        let next = chain_step(c2, chain_not.len(), i, word_not_phi.prefix.len());
        transitions.insert((c2 + i, vec![0, 0]), point(next));
    }
    for v in 0..kn {
        for (c, choice) in k.choices[v].iter().enumerate() {
            let dist = choice.dist.iter().map(|(w, pr)| (k0 + w, pr.clone())).collect();
            transitions.insert((k0 + v, vec![2 + c, 0]), dist);
        }
    }

    let mut labels = vec![PropSet::new()];
    labels.extend(chain_phi);
    labels.extend(chain_not);
    labels.extend(k.labels.iter().cloned());

    let goal_one = LtlFormula::next(phi.clone());
    let goal_two = LtlFormula::negate(LtlFormula::next(phi.clone()));
    let g = Csg {
        arena: Csga {
            players: vec!["one".to_owned(), "two".to_owned()],
            states,
            init: 0,
            actions: vec![actions_one, actions_two],
            available,
            transitions,
        },
        labels,
        goals: vec![goal_one, goal_two],
    };
    let profile = first_action_profile(&g);
    let mut switched = profile[1].clone();
    switched.tau[0][0] = vec![(1, BigRational::one())];
    (g, profile, vec![1], vec![switched])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;
    use crate::model::examples::{communication_game, servers_game};
    use crate::model::parse_ratio;

    fn example() -> Csg {
        communication_game(3, &parse_ratio("1/2").unwrap())
    }

    fn opts() -> RvOptions {
        RvOptions::default()
    }

    fn nz_opts() -> RvOptions {
        RvOptions { mode: SatMode::NonZero, ..RvOptions::default() }
    }

    fn phi(text: &str) -> LtlFormula {
        parse_ltl(text).unwrap()
    }

    /// Memoryless profile choosing `pick(player, state)` with probability
    /// one everywhere.
    fn pointwise(g: &Csg, pick: impl Fn(usize, usize) -> usize) -> Vec<StrategyTransducer> {
        (0..g.arena.player_count())
            .map(|i| StrategyTransducer {
                states: vec!["q".to_owned()],
                init: 0,
                delta: vec![vec![0; g.arena.state_count()]],
                tau: vec![(0..g.arena.state_count())
                    .map(|s| vec![(pick(i, s), BigRational::one())])
                    .collect()],
            })
            .collect()
    }

    fn winners_of(v: &QueryVerdict) -> Vec<String> {
        v.witness.as_ref().unwrap().winners.clone().unwrap()
    }

    #[test]
    fn membership_accepts_the_handshake_profile() {
        let g = example();
        let v = membership(&g, &pointwise(&g, |_, _| 0), &opts()).unwrap();
        assert!(v.is_yes());
        assert_eq!(winners_of(&v), ["S", "R"]);
    }

    #[test]
    fn membership_accepts_mutual_idling() {
        let g = example();
        let v = membership(&g, &pointwise(&g, |_, _| 1), &opts()).unwrap();
        assert!(v.is_yes());
        assert!(winners_of(&v).is_empty());
    }

    #[test]
    fn membership_rejects_one_sided_effort() {
        let g = example();
        let v = membership(&g, &pointwise(&g, |i, _| i), &opts()).unwrap();
        assert!(!v.is_yes());
        assert_eq!(v.witness.unwrap().player.unwrap(), "R");
    }

    #[test]
    fn verdict_serialization_is_stable() {
        let g = example();
        let v = membership(&g, &pointwise(&g, |_, _| 0), &opts()).unwrap();
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"answer":"yes","witness":{"winners":["S","R"]}}"#
        );
    }

    #[test]
    fn e_nash_finds_the_cooperative_equilibrium() {
        let g = example();
        let v = e_nash(&g, &phi("F psi"), &opts()).unwrap();
        assert!(v.is_yes());
        assert_eq!(winners_of(&v), ["S", "R"]);
        assert!(non_emptiness(&g, &opts()).unwrap().is_yes());
    }

    #[test]
    fn e_nash_supports_the_empty_winner_set() {
        let g = example();
        let v = e_nash(&g, &phi("G ! psi"), &opts()).unwrap();
        assert!(v.is_yes());
        let w = v.witness.unwrap();
        assert!(w.winners.unwrap().is_empty());
        assert_eq!(w.punished.unwrap(), ["S", "R"]);
    }

    #[test]
    fn a_nash_spots_the_idle_equilibrium() {
        let g = example();
        let v = a_nash(&g, &phi("F psi"), &opts()).unwrap();
        assert!(!v.is_yes());
        let w = v.witness.unwrap();
        assert!(w.winners.unwrap().is_empty());
        assert_eq!(w.punished.unwrap(), ["S", "R"]);
    }

    #[test]
    fn a_nash_accepts_the_trivial_property() {
        let g = example();
        let v = a_nash(&g, &LtlFormula::True, &opts()).unwrap();
        assert!(v.is_yes());
        assert!(v.witness.is_none());
    }

    fn coin_game() -> Csg {
        let half = parse_ratio("1/2").unwrap();
        let mut transitions = BTreeMap::new();
        transitions
            .insert((0, vec![0]), vec![(1, half.clone()), (2, BigRational::one() - half)]);
        transitions.insert((1, vec![0]), point(1));
        transitions.insert((2, vec![0]), point(2));
        let mut labels = vec![PropSet::new(); 3];
        labels[1].insert("h".to_owned());
        Csg {
            arena: Csga {
                players: vec!["one".to_owned()],
                states: vec!["flip".to_owned(), "heads".to_owned(), "tails".to_owned()],
                init: 0,
                actions: vec![vec!["go".to_owned()]],
                available: vec![vec![vec![0]]; 3],
                transitions,
            },
            labels,
            goals: vec![LtlFormula::True],
        }
    }

    #[test]
    fn the_mode_governs_the_specification_only() {
        let g = coin_game();
        let f = phi("F h");
        assert!(!e_nash(&g, &f, &opts()).unwrap().is_yes());
        assert!(e_nash(&g, &f, &nz_opts()).unwrap().is_yes());
        assert!(!a_nash(&g, &f, &opts()).unwrap().is_yes());
        assert!(a_nash(&g, &f, &nz_opts()).unwrap().is_yes());
    }

    #[test]
    fn e_core_accepts_the_trivial_property() {
        let g = example();
        let v = e_core(&g, &LtlFormula::True, &opts()).unwrap();
        assert!(v.is_yes());
        assert_eq!(winners_of(&v), ["S", "R"]);
    }

    #[test]
    fn e_core_rejects_enforced_silence() {
        let g = example();
        assert!(!e_core(&g, &phi("G ! psi"), &opts()).unwrap().is_yes());
    }

    #[test]
    fn a_core_reflects_pareto_optimality() {
        let g = example();
        assert!(a_core(&g, &phi("F psi"), &opts()).unwrap().is_yes());
    }

    #[test]
    fn core_membership_rejects_idling() {
        let g = example();
        let v = core_membership(&g, &pointwise(&g, |_, _| 1), &opts()).unwrap();
        assert!(!v.is_yes());
        assert_eq!(v.witness.unwrap().coalition.unwrap(), ["S", "R"]);
    }

    #[test]
    fn core_membership_accepts_the_handshake() {
        let g = example();
        let v = core_membership(&g, &pointwise(&g, |_, _| 0), &opts()).unwrap();
        assert!(v.is_yes());
        assert_eq!(winners_of(&v), ["S", "R"]);
    }

    #[test]
    fn core_membership_rejects_one_sided_effort() {
        let g = example();
        let v = core_membership(&g, &pointwise(&g, |i, _| i), &opts()).unwrap();
        assert!(!v.is_yes());
        assert_eq!(v.witness.unwrap().coalition.unwrap(), ["S", "R"]);
    }

    #[test]
    fn deviating_together_helps_the_idlers() {
        let g = example();
        let idle = pointwise(&g, |_, _| 1);
        let comm = pointwise(&g, |_, _| 0);
        let v = beneficial_deviation(&g, &idle, &[0, 1], &comm, &opts()).unwrap();
        assert!(v.is_yes());
        assert_eq!(v.witness.unwrap().coalition.unwrap(), ["S", "R"]);
    }

    #[test]
    fn winners_have_nothing_to_gain() {
        let g = example();
        let comm = pointwise(&g, |_, _| 0);
        let idle = pointwise(&g, |_, _| 1);
        let v =
            beneficial_deviation(&g, &comm, &[1], &[idle[1].clone()], &opts()).unwrap();
        assert!(!v.is_yes());
        assert_eq!(v.witness.unwrap().player.unwrap(), "R");
    }

    #[test]
    fn deviating_alone_gets_punished() {
        let g = example();
        let idle = pointwise(&g, |_, _| 1);
        let comm = pointwise(&g, |_, _| 0);
        let v =
            beneficial_deviation(&g, &idle, &[1], &[comm[1].clone()], &opts()).unwrap();
        assert!(!v.is_yes());
        assert_eq!(v.witness.unwrap().player.unwrap(), "R");
    }

    #[test]
    fn deviation_input_is_validated() {
        let g = example();
        let idle = pointwise(&g, |_, _| 1);
        assert!(beneficial_deviation(&g, &idle, &[], &[], &opts()).is_err());
        assert!(beneficial_deviation(&g, &idle, &[0, 1], &[idle[0].clone()], &opts())
            .is_err());
    }

    #[test]
    fn unpunishable_players_have_empty_regions() {
        let mut g = example();
        g.goals = vec![LtlFormula::True, LtlFormula::True];
        let gp = build_parity_game(&g, &LtlFormula::True, opts().max_dpw_states).unwrap();
        let pun = punishing_region(&gp, 0).unwrap();
        assert!(pun.iter().all(|&p| !p));

        g.goals = vec![LtlFormula::ff(), LtlFormula::ff()];
        let gp = build_parity_game(&g, &LtlFormula::True, opts().max_dpw_states).unwrap();
        let pun = punishing_region(&gp, 0).unwrap();
        assert!(pun.iter().all(|&p| p));
    }

    #[test]
    fn the_punishing_region_tracks_progress() {
        let g = example();
        let gp = build_parity_game(&g, &LtlFormula::True, opts().max_dpw_states).unwrap();
        let pun = punishing_region(&gp, 0).unwrap();
        assert!(pun[gp.arena.init]);
        for (v, &kept) in pun.iter().enumerate() {
            if gp.info[v].game_state == 3 {
                assert!(!kept, "goal satisfaction cannot be punished");
            }
        }
    }

    #[test]
    fn the_restriction_cuts_the_last_advance() {
        let g = example();
        let gp = build_parity_game(&g, &LtlFormula::True, opts().max_dpw_states).unwrap();
        let mut puns = BTreeMap::new();
        puns.insert(0, punishing_region(&gp, 0).unwrap());
        puns.insert(1, punishing_region(&gp, 1).unwrap());
        let r = restrict_to_punishment(&gp, &[0, 1], &puns).unwrap();
        assert!(r.kept[gp.arena.init]);
        assert!(r.mdp.is_some());
        for v in 0..gp.state_count() {
            if !r.kept[v] {
                continue;
            }
            let s = gp.info[v].game_state;
            assert!(s < 3, "the goal state cannot stay punishing");
            if s == 2 {
                assert_eq!(r.kept_dirs[v], vec![vec![1, 1]]);
            } else {
                assert!(r.kept_dirs[v].contains(&vec![0, 0]));
                assert_eq!(r.kept_dirs[v].len(), 4);
            }
        }
    }

    #[test]
    fn no_losers_means_full_cooperation() {
        let g = example();
        let gp = build_parity_game(&g, &LtlFormula::True, opts().max_dpw_states).unwrap();
        let r = restrict_to_punishment(&gp, &[], &BTreeMap::new()).unwrap();
        let mdp = r.mdp.unwrap();
        assert_eq!(mdp.state_count(), gp.state_count());
        assert!(mdp.choices.iter().all(|c| c.len() == 4));
    }

    #[test]
    fn unpunishable_losers_empty_the_restriction() {
        let mut g = example();
        g.goals = vec![LtlFormula::True, LtlFormula::True];
        let gp = build_parity_game(&g, &LtlFormula::True, opts().max_dpw_states).unwrap();
        let mut puns = BTreeMap::new();
        puns.insert(0, punishing_region(&gp, 0).unwrap());
        let r = restrict_to_punishment(&gp, &[0], &puns).unwrap();
        assert!(r.kept.iter().all(|&k| !k));
        assert!(r.mdp.is_none());
    }

    #[test]
    fn resent_messages_make_every_equilibrium_deliver() {
        let g = servers_game(&parse_ratio("1/2").unwrap());
        let both = LtlFormula::and(g.goals[0].clone(), g.goals[1].clone());
        let v = e_nash(&g, &both, &opts()).unwrap();
        assert!(v.is_yes());
        assert_eq!(winners_of(&v), ["S1", "S2"]);
        assert!(a_nash(&g, &both, &opts()).unwrap().is_yes());
    }

    fn tiny_process(reach: bool) -> Mdp {
        let step = |targets: Vec<(usize, BigRational)>| MdpChoice { tag: Vec::new(), dist: targets };
        let mut labels = vec![PropSet::new(); 3];
        if reach {
            labels[2].insert("p".to_owned());
        }
        Mdp {
            init: 0,
            choices: vec![
                vec![step(point(1)), step(point(0))],
                vec![step(point(2))],
                vec![step(point(2))],
            ],
            labels,
            info: (0..3).map(|v| McStateInfo { game_state: v, memory: Vec::new() }).collect(),
        }
    }

    fn coin_process() -> Mdp {
        let half = parse_ratio("1/2").unwrap();
        let mut labels = vec![PropSet::new(); 3];
        labels[1].insert("p".to_owned());
        Mdp {
            init: 0,
            choices: vec![
                vec![MdpChoice {
                    tag: Vec::new(),
                    dist: vec![(1, half.clone()), (2, BigRational::one() - half)],
                }],
                vec![MdpChoice { tag: Vec::new(), dist: point(1) }],
                vec![MdpChoice { tag: Vec::new(), dist: point(2) }],
            ],
            labels,
            info: (0..3).map(|v| McStateInfo { game_state: v, memory: Vec::new() }).collect(),
        }
    }

    #[test]
    fn the_membership_wrapper_mirrors_process_checking() {
        let f = phi("F p");
        let (g, profile) = membership_reduction(&tiny_process(true), &f);
        assert!(!membership(&g, &profile, &opts()).unwrap().is_yes());

        let (g, profile) = membership_reduction(&tiny_process(false), &f);
        assert!(membership(&g, &profile, &opts()).unwrap().is_yes());

        // Reaching the mark only half the time is not an improvement.
        let (g, profile) = membership_reduction(&coin_process(), &f);
        assert!(membership(&g, &profile, &opts()).unwrap().is_yes());
    }

    #[test]
    fn the_deviation_wrapper_mirrors_process_checking() {
        let f = phi("F p");
        let mut hit = PropSet::new();
        hit.insert("p".to_owned());
        let word_yes = LassoWord::new(Vec::new(), vec![hit]);
        let word_no = LassoWord::new(Vec::new(), vec![PropSet::new()]);

        let (g, profile, coalition, switch) =
            deviation_reduction(&tiny_process(true), &f, &word_yes, &word_no);
        let v = beneficial_deviation(&g, &profile, &coalition, &switch, &opts()).unwrap();
        assert!(!v.is_yes());

        let (g, profile, coalition, switch) =
            deviation_reduction(&tiny_process(false), &f, &word_yes, &word_no);
        let v = beneficial_deviation(&g, &profile, &coalition, &switch, &opts()).unwrap();
        assert!(v.is_yes());

        // Positive exposure is already enough to spoil the deviation.
        let (g, profile, coalition, switch) =
            deviation_reduction(&coin_process(), &f, &word_yes, &word_no);
        let v = beneficial_deviation(&g, &profile, &coalition, &switch, &opts()).unwrap();
        assert!(!v.is_yes());
    }
}
