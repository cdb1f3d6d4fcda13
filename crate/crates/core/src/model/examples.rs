//! Small ready-made games, handy for demos, benchmarks and tests.

use num::{BigRational, One, Zero};

use super::{Csg, Csga};
use crate::ltl::LtlFormula;

/// A two-player handshake over a lossy channel. A sender and a receiver
/// each choose to communicate or idle; a transmission step succeeds only
/// when both communicate, and then still fails with probability `p`,
/// dropping the protocol back to the start. After `n` successful steps the
/// run reaches an absorbing state labeled `psi`. Both players' goal is to
/// reach it.
pub fn communication_game(n: usize, p: &BigRational) -> Csg {
    assert!(n >= 1, "the protocol needs at least one step");
    assert!(
        *p >= BigRational::zero() && *p < BigRational::one(),
        "failure probability must lie in [0, 1)"
    );
    let states: Vec<String> = (0..=n).map(|k| format!("s{k}")).collect();
    let actions = vec![
        vec!["c_S".to_owned(), "i_S".to_owned()],
        vec!["c_R".to_owned(), "i_R".to_owned()],
    ];
    let available = vec![vec![vec![0, 1], vec![0, 1]]; n + 1];

    let mut transitions = std::collections::BTreeMap::new();
    let stay = |k: usize| vec![(k, BigRational::one())];
    for k in 0..n {
        let advance = if p.is_zero() {
            vec![(k + 1, BigRational::one())]
        } else {
            vec![(0, p.clone()), (k + 1, BigRational::one() - p)]
        };
        transitions.insert((k, vec![0, 0]), advance);
        transitions.insert((k, vec![0, 1]), stay(k));
        transitions.insert((k, vec![1, 0]), stay(k));
        transitions.insert((k, vec![1, 1]), stay(k));
    }
    for dir in [vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]] {
        transitions.insert((n, dir), stay(n));
    }

    let mut labels = vec![crate::ltl::PropSet::new(); n + 1];
    labels[n].insert("psi".to_owned());

    let goal = LtlFormula::eventually(LtlFormula::prop("psi"));
    Csg {
        arena: Csga {
            players: vec!["S".to_owned(), "R".to_owned()],
            states,
            init: 0,
            actions,
            available,
            transitions,
        },
        labels,
        goals: vec![goal.clone(), goal],
    }
}

/// Two servers exchanging a single message type over one-slot inboxes. A
/// send places the message in the peer's inbox but fails with probability
/// `p`; a server whose inbox holds a message must pop it; an idle server
/// does nothing. Labels record the events of the step that entered the
/// state, and each server's goal demands that whatever it sends the peer
/// eventually pops.
pub fn servers_game(p: &BigRational) -> Csg {
    assert!(
        *p > BigRational::zero() && *p < BigRational::one(),
        "delivery failure probability must lie in (0, 1)"
    );
    // A state is (inbox of S1, inbox of S2, events of the last step); the
    // events are "S1 sent", "S2 sent", "S1 popped", "S2 popped". Actions
    // are indexed send = 0, pop = 1, idle = 2, and a full inbox forces the
    // pop.
    type ServerState = (u8, u8, [bool; 4]);
    let avail_of = |b: u8| if b == 0 { vec![0usize, 2] } else { vec![1] };

    let start: ServerState = (0, 0, [false; 4]);
    let mut index: std::collections::BTreeMap<ServerState, usize> =
        std::collections::BTreeMap::new();
    index.insert(start, 0);
    let mut states = vec![start];
    let mut transitions = std::collections::BTreeMap::new();
    let mut at = 0;
    while at < states.len() {
        let (b1, b2, _) = states[at];
        for &a1 in &avail_of(b1) {
            for &a2 in &avail_of(b2) {
                let flags = [a1 == 0, a2 == 0, a1 == 1, a2 == 1];
                let base1 = if a1 == 1 { 0 } else { b1 };
                let base2 = if a2 == 1 { 0 } else { b2 };
                let mut outcomes = vec![(base1, base2, BigRational::one())];
                if a1 == 0 {
                    outcomes = outcomes
                        .into_iter()
                        .flat_map(|(x, y, pr)| {
                            assert_eq!(y, 0, "a full inbox is popped before delivery");
                            vec![
                                (x, y + 1, pr.clone() * (BigRational::one() - p)),
                                (x, y, pr * p.clone()),
                            ]
                        })
                        .collect();
                }
                if a2 == 0 {
                    outcomes = outcomes
                        .into_iter()
                        .flat_map(|(x, y, pr)| {
                            assert_eq!(x, 0, "a full inbox is popped before delivery");
                            vec![
                                (x + 1, y, pr.clone() * (BigRational::one() - p)),
                                (x, y, pr * p.clone()),
                            ]
                        })
                        .collect();
                }
                let mut dist: std::collections::BTreeMap<usize, BigRational> =
                    std::collections::BTreeMap::new();
                for (x, y, pr) in outcomes {
                    let target = (x, y, flags);
                    let v = *index.entry(target).or_insert_with(|| {
                        states.push(target);
                        states.len() - 1
                    });
                    *dist.entry(v).or_insert_with(BigRational::zero) += pr;
                }
                transitions.insert((at, vec![a1, a2]), dist.into_iter().collect::<Vec<_>>());
            }
        }
        at += 1;
    }

    let names: Vec<String> = states
        .iter()
        .map(|(b1, b2, f)| {
            let mut name = format!("n{b1}{b2}");
            for (flag, tag) in f.iter().zip(["s1", "s2", "p1", "p2"]) {
                if *flag {
                    name.push('_');
                    name.push_str(tag);
                }
            }
            name
        })
        .collect();
    let labels: Vec<crate::ltl::PropSet> = states
        .iter()
        .map(|(_, _, f)| {
            let mut set = crate::ltl::PropSet::new();
            for (flag, prop) in f.iter().zip(["snd1", "snd2", "pop1", "pop2"]) {
                if *flag {
                    set.insert(prop.to_owned());
                }
            }
            set
        })
        .collect();
    let available = states
        .iter()
        .map(|(b1, b2, _)| vec![avail_of(*b1), avail_of(*b2)])
        .collect();
    let goal = |snd: &str, pop: &str| {
        LtlFormula::always(LtlFormula::implies(
            LtlFormula::prop(snd),
            LtlFormula::eventually(LtlFormula::prop(pop)),
        ))
    };

    Csg {
        arena: Csga {
            players: vec!["S1".to_owned(), "S2".to_owned()],
            states: names,
            init: 0,
            actions: vec![
                vec!["snd".to_owned(), "pop".to_owned(), "idle".to_owned()],
                vec!["snd".to_owned(), "pop".to_owned(), "idle".to_owned()],
            ],
            available,
            transitions,
        },
        labels,
        goals: vec![goal("snd1", "pop2"), goal("snd2", "pop1")],
    }
}
