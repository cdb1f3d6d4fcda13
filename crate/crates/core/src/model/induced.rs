//! Products of a game with strategy transducers: the finite Markov chain
//! induced by a full profile, and the MDP induced by fixing a subset of
//! the players and merging the rest into a single controller.

use std::collections::BTreeMap;

use num::{BigRational, Zero};

use super::{validate_transducer, Csg, Direction, Distribution, StrategyTransducer};
use crate::error::RvError;
use crate::ltl::PropSet;

/// Where a product state came from: the underlying game state and the
/// memory vector of the composed transducers (in ascending player order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct McStateInfo {
    pub game_state: usize,
    pub memory: Vec<usize>,
}

/// A finite Markov chain, annotated with the game directions that carry
/// positive probability at each state so that later passes can reason
/// about which joint actions the chain actually uses.
#[derive(Clone, Debug)]
pub struct Mc {
    pub init: usize,
    /// `rows[v]` is the sparse successor distribution of state `v`.
    pub rows: Vec<Distribution>,
    pub labels: Vec<PropSet>,
    pub info: Vec<McStateInfo>,
    /// Directions of the source game played with positive probability at
    /// each state, sorted.
    pub dir_support: Vec<Vec<Direction>>,
}

impl Mc {
    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    /// The directions contributing positive mass to the edge `(v, w)`.
    pub fn edge_directions(&self, v: usize, w: usize, g: &Csg) -> Vec<Direction> {
        let s = self.info[v].game_state;
        let t = self.info[w].game_state;
        self.dir_support[v]
            .iter()
            .filter(|dir| g.arena.transition(s, dir).iter().any(|(u, _)| *u == t))
            .cloned()
            .collect()
    }
}

/// One controller choice of an MDP state: the direction slice the free
/// players pick, and the resulting successor distribution.
#[derive(Clone, Debug)]
pub struct MdpChoice {
    pub tag: Direction,
    pub dist: Distribution,
}

/// A finite Markov decision process with a single controller. States keep
/// a back-reference to where they came from; choice tags keep the
/// direction slice they stand for.
#[derive(Clone, Debug)]
pub struct Mdp {
    pub init: usize,
    pub choices: Vec<Vec<MdpChoice>>,
    pub labels: Vec<PropSet>,
    pub info: Vec<McStateInfo>,
}

impl Mdp {
    pub fn state_count(&self) -> usize {
        self.choices.len()
    }
}

fn profile_error(diags: Vec<super::Diagnostic>) -> Option<RvError> {
    diags.first().map(|d| RvError::Profile(d.to_string()))
}

/// Folds sparse distributions together: `acc += weight * dist`.
fn accumulate(acc: &mut BTreeMap<usize, BigRational>, weight: &BigRational, dist: &Distribution) {
    for (target, prob) in dist {
        let slot = acc.entry(*target).or_insert_with(BigRational::zero);
        *slot += weight * prob;
    }
}

/// The Markov chain obtained by letting every player follow their
/// transducer. Chain states are pairs of a game state and a joint memory
/// vector; only the part reachable from the initial pair is built.
pub fn induced_markov_chain(g: &Csg, profile: &[StrategyTransducer]) -> Result<Mc, RvError> {
    if profile.len() != g.arena.player_count() {
        return Err(RvError::Profile(format!(
            "expected {} strategies, got {}",
            g.arena.player_count(),
            profile.len()
        )));
    }
    let mut diags = Vec::new();
    for (i, t) in profile.iter().enumerate() {
        validate_transducer(g, i, t, &mut diags);
    }
    if let Some(err) = profile_error(diags) {
        return Err(err);
    }

    let start = (g.arena.init, profile.iter().map(|t| t.init).collect::<Vec<_>>());
    let mut index: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
    index.insert(start.clone(), 0);
    let mut queue = vec![start];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut info = Vec::new();
    let mut dir_support = Vec::new();

    let mut at = 0;
    while at < queue.len() {
        let (s, memory) = queue[at].clone();
        at += 1;

        // All players update their memory on the observed state, so every
        // successor of this chain state shares one memory vector.
        let next_memory: Vec<usize> =
            memory.iter().enumerate().map(|(i, &q)| profile[i].delta[q][s]).collect();

        let mut used: Vec<Direction> = vec![Vec::new()];
        let mut weights: Vec<BigRational> = vec![num::one()];
        for (i, t) in profile.iter().enumerate() {
            let mut next_used = Vec::new();
            let mut next_weights = Vec::new();
            for (dir, weight) in used.iter().zip(&weights) {
                for (action, prob) in &t.tau[memory[i]][s] {
                    let mut longer = dir.clone();
                    longer.push(*action);
                    next_used.push(longer);
                    next_weights.push(weight * prob);
                }
            }
            used = next_used;
            weights = next_weights;
        }

        let mut successors: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (dir, weight) in used.iter().zip(&weights) {
            accumulate(&mut successors, weight, g.arena.transition(s, dir));
        }

        let mut row: Distribution = Vec::with_capacity(successors.len());
        for (target, prob) in successors {
            let key = (target, next_memory.clone());
            let id = *index.entry(key.clone()).or_insert_with(|| {
                queue.push(key);
                queue.len() - 1
            });
            row.push((id, prob));
        }
        row.sort_by_key(|(id, _)| *id);

        rows.push(row);
        labels.push(g.labels[s].clone());
        info.push(McStateInfo { game_state: s, memory });
        dir_support.push(used);
    }

    Ok(Mc { init: 0, rows, labels, info, dir_support })
}

/// The MDP obtained by fixing transducers for the players in `fixed` and
/// merging everyone else into one controller. The controller's choices are
/// direction slices over the free players, ascending; with every player
/// fixed it has a single empty choice and the MDP is the induced chain.
pub fn induced_mdp(
    g: &Csg,
    fixed: &BTreeMap<usize, StrategyTransducer>,
) -> Result<Mdp, RvError> {
    let n = g.arena.player_count();
    if let Some(&i) = fixed.keys().find(|&&i| i >= n) {
        return Err(RvError::Profile(format!("fixed player index {i} out of range")));
    }
    let mut diags = Vec::new();
    for (&i, t) in fixed {
        validate_transducer(g, i, t, &mut diags);
    }
    if let Some(err) = profile_error(diags) {
        return Err(err);
    }
    let fixed_players: Vec<usize> = fixed.keys().copied().collect();
    let free_players: Vec<usize> = (0..n).filter(|i| !fixed.contains_key(i)).collect();

    let start = (g.arena.init, fixed.values().map(|t| t.init).collect::<Vec<_>>());
    let mut index: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
    index.insert(start.clone(), 0);
    let mut queue = vec![start];
    let mut choices = Vec::new();
    let mut labels = Vec::new();
    let mut info = Vec::new();

    let mut at = 0;
    while at < queue.len() {
        let (s, memory) = queue[at].clone();
        at += 1;

        let next_memory: Vec<usize> = memory
            .iter()
            .zip(&fixed_players)
            .map(|(&q, &i)| fixed[&i].delta[q][s])
            .collect();

        // The fixed players' sampled slices with their joint weights.
        let mut slices: Vec<(Direction, BigRational)> = vec![(Vec::new(), num::one())];
        for (k, &i) in fixed_players.iter().enumerate() {
            let mut next = Vec::new();
            for (slice, weight) in &slices {
                for (action, prob) in &fixed[&i].tau[memory[k]][s] {
                    let mut longer = slice.clone();
                    longer.push(*action);
                    next.push((longer, weight * prob));
                }
            }
            slices = next;
        }

        // Controller choices: one per joint slice of the free players.
        let mut free_slices: Vec<Direction> = vec![Vec::new()];
        for &i in &free_players {
            let mut next = Vec::new();
            for partial in &free_slices {
                for &a in &g.arena.available[s][i] {
                    let mut longer = partial.clone();
                    longer.push(a);
                    next.push(longer);
                }
            }
            free_slices = next;
        }
        free_slices.sort();

        let mut here = Vec::with_capacity(free_slices.len());
        for tag in free_slices {
            let mut successors: BTreeMap<usize, BigRational> = BTreeMap::new();
            for (slice, weight) in &slices {
                let dir =
                    super::compose_direction(n, &fixed_players, slice, &free_players, &tag);
                accumulate(&mut successors, weight, g.arena.transition(s, &dir));
            }
            let mut dist: Distribution = Vec::with_capacity(successors.len());
            for (target, prob) in successors {
                let key = (target, next_memory.clone());
                let id = *index.entry(key.clone()).or_insert_with(|| {
                    queue.push(key);
                    queue.len() - 1
                });
                dist.push((id, prob));
            }
            dist.sort_by_key(|(id, _)| *id);
            here.push(MdpChoice { tag, dist });
        }

        choices.push(here);
        labels.push(g.labels[s].clone());
        info.push(McStateInfo { game_state: s, memory });
    }

    Ok(Mdp { init: 0, choices, labels, info })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::examples::communication_game;
    use crate::model::parse_ratio;
    use num::One;

    fn half() -> BigRational {
        parse_ratio("1/2").unwrap()
    }

    fn constant_strategy(g: &Csg, action: usize) -> StrategyTransducer {
        let states = g.arena.state_count();
        StrategyTransducer {
            states: vec!["q".to_owned()],
            init: 0,
            delta: vec![vec![0; states]],
            tau: vec![vec![vec![(action, BigRational::one())]; states]],
        }
    }

    fn assert_rows_sum_to_one(rows: &[Distribution]) {
        for row in rows {
            let sum: BigRational = row.iter().map(|(_, p)| p.clone()).sum();
            assert!(sum.is_one(), "row sums to {sum}");
        }
    }

    #[test]
    fn always_communicating_walks_the_chain_with_restarts() {
        let g = communication_game(3, &half());
        let profile = vec![constant_strategy(&g, 0), constant_strategy(&g, 0)];
        let mc = induced_markov_chain(&g, &profile).unwrap();
        assert_eq!(mc.state_count(), 4);
        assert_rows_sum_to_one(&mc.rows);
        for v in 0..3 {
            assert_eq!(mc.info[v].game_state, v);
            assert_eq!(mc.rows[v], vec![(0, half()), (v + 1, half())]);
            assert_eq!(mc.dir_support[v], vec![vec![0, 0]]);
        }
        assert_eq!(mc.rows[3], vec![(3, BigRational::one())]);
        assert!(mc.labels[3].contains("psi"));
    }

    #[test]
    fn always_idling_never_leaves_the_start() {
        let g = communication_game(3, &half());
        let profile = vec![constant_strategy(&g, 1), constant_strategy(&g, 1)];
        let mc = induced_markov_chain(&g, &profile).unwrap();
        assert_eq!(mc.state_count(), 1);
        assert_eq!(mc.rows[0], vec![(0, BigRational::one())]);
        assert_eq!(mc.dir_support[0], vec![vec![1, 1]]);
    }

    #[test]
    fn mixing_scales_the_advance_probability() {
        let g = communication_game(3, &half());
        let mixer = StrategyTransducer {
            states: vec!["q".to_owned()],
            init: 0,
            delta: vec![vec![0; 4]],
            tau: vec![vec![vec![(0, half()), (1, half())]; 4]],
        };
        let profile = vec![mixer, constant_strategy(&g, 0)];
        let mc = induced_markov_chain(&g, &profile).unwrap();
        // Communication happens half the time, and then advances half the
        // time, so the advance mass is a quarter.
        let quarter = parse_ratio("1/4").unwrap();
        assert_eq!(mc.rows[0], vec![(0, parse_ratio("3/4").unwrap()), (1, quarter)]);
        assert_eq!(mc.dir_support[0], vec![vec![0, 0], vec![1, 0]]);
        assert_rows_sum_to_one(&mc.rows);
    }

    #[test]
    fn memory_states_split_the_product() {
        let g = communication_game(3, &half());
        // The sender alternates between communicating and idling.
        let alternator = StrategyTransducer {
            states: vec!["even".to_owned(), "odd".to_owned()],
            init: 0,
            delta: vec![vec![1; 4], vec![0; 4]],
            tau: vec![
                vec![vec![(0, BigRational::one())]; 4],
                vec![vec![(1, BigRational::one())]; 4],
            ],
        };
        let profile = vec![alternator, constant_strategy(&g, 0)];
        let mc = induced_markov_chain(&g, &profile).unwrap();
        assert_eq!(mc.state_count(), 8);
        assert_rows_sum_to_one(&mc.rows);
        // Odd memories burn one step in place.
        for v in 0..mc.state_count() {
            if mc.info[v].memory == vec![1, 0] {
                assert_eq!(mc.rows[v].len(), 1);
                let (w, p) = &mc.rows[v][0];
                assert!(p.is_one());
                assert_eq!(mc.info[*w].game_state, mc.info[v].game_state);
            }
        }
    }

    #[test]
    fn edge_directions_filter_by_target_support() {
        let g = communication_game(3, &half());
        let mixer = StrategyTransducer {
            states: vec!["q".to_owned()],
            init: 0,
            delta: vec![vec![0; 4]],
            tau: vec![vec![vec![(0, half()), (1, half())]; 4]],
        };
        let profile = vec![mixer, constant_strategy(&g, 0)];
        let mc = induced_markov_chain(&g, &profile).unwrap();
        // Only communication can move the token forward.
        assert_eq!(mc.edge_directions(0, 1, &g), vec![vec![0, 0]]);
        // Both used directions can keep it at the start.
        assert_eq!(mc.edge_directions(0, 0, &g), vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn a_short_profile_is_rejected() {
        let g = communication_game(3, &half());
        let err = induced_markov_chain(&g, &[constant_strategy(&g, 0)]).unwrap_err();
        assert!(matches!(err, RvError::Profile(_)));
    }

    #[test]
    fn fixing_an_idler_freezes_the_mdp() {
        let g = communication_game(3, &half());
        let mut fixed = BTreeMap::new();
        fixed.insert(1, constant_strategy(&g, 1));
        let mdp = induced_mdp(&g, &fixed).unwrap();
        assert_eq!(mdp.state_count(), 1);
        assert_eq!(mdp.choices[0].len(), 2);
        for choice in &mdp.choices[0] {
            assert_eq!(choice.dist, vec![(0, BigRational::one())]);
        }
    }

    #[test]
    fn fixing_nobody_merges_all_players() {
        let g = communication_game(3, &half());
        let mdp = induced_mdp(&g, &BTreeMap::new()).unwrap();
        assert_eq!(mdp.state_count(), 4);
        assert_eq!(mdp.choices[0].len(), 4);
        assert_eq!(mdp.choices[0][0].tag, vec![0, 0]);
        assert_eq!(mdp.choices[0][0].dist, vec![(0, half()), (1, half())]);
        assert_eq!(mdp.choices[0][3].tag, vec![1, 1]);
        assert_eq!(mdp.choices[0][3].dist, vec![(0, BigRational::one())]);
    }

    #[test]
    fn fixing_everybody_reduces_to_the_chain() {
        let g = communication_game(3, &half());
        let mut fixed = BTreeMap::new();
        fixed.insert(0, constant_strategy(&g, 0));
        fixed.insert(1, constant_strategy(&g, 0));
        let mdp = induced_mdp(&g, &fixed).unwrap();
        let mc = induced_markov_chain(
            &g,
            &[constant_strategy(&g, 0), constant_strategy(&g, 0)],
        )
        .unwrap();
        assert_eq!(mdp.state_count(), mc.state_count());
        for v in 0..mdp.state_count() {
            assert_eq!(mdp.choices[v].len(), 1);
            assert_eq!(mdp.choices[v][0].tag, Vec::<usize>::new());
            assert_eq!(mdp.choices[v][0].dist, mc.rows[v]);
        }
    }
}
