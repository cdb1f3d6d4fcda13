//! Compilation of LTL formulas into deterministic parity word automata.
//!
//! The pipeline is formula to nondeterministic Büchi automaton (tableau in
//! [`tableau`]) to deterministic parity automaton (Safra trees in
//! [`determinize`]). Acceptance everywhere is min even: a run is accepting
//! exactly when the smallest priority it visits infinitely often is even.
//!
//! Alphabets are the subsets of the formula's own propositions, encoded as
//! bitmask letters. Consumers with richer labelings restrict their labels
//! to an automaton's propositions through [`Dpw::letter_of`].

mod determinize;
mod tableau;

pub use determinize::determinize_to_dpw;
pub use tableau::ltl_to_nbw;

use crate::error::RvError;
use crate::ltl::{LassoWord, LtlFormula, PropSet};

/// Default cap on constructed automaton states.
pub const DEFAULT_DPW_STATE_CAP: usize = 1_000_000;

/// Nondeterministic Büchi word automaton. A letter is a bitmask over
/// `aps`: bit `i` set means proposition `aps[i]` holds.
#[derive(Clone, Debug)]
pub struct Nbw {
    pub aps: Vec<String>,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
    /// `delta[state][letter]` lists the successor states.
    pub delta: Vec<Vec<Vec<usize>>>,
}

impl Nbw {
    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn letter_count(&self) -> usize {
        1 << self.aps.len()
    }
}

/// Deterministic parity word automaton with min-even acceptance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dpw {
    pub aps: Vec<String>,
    pub initial: usize,
    /// `delta[state][letter]` is the unique successor; total by
    /// construction.
    pub delta: Vec<Vec<usize>>,
    pub priority: Vec<u32>,
}

pub(crate) fn letter_index(aps: &[String], props: &PropSet) -> usize {
    aps.iter()
        .enumerate()
        .fold(0, |mask, (i, ap)| if props.contains(ap) { mask | 1 << i } else { mask })
}

impl Dpw {
    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn letter_count(&self) -> usize {
        1 << self.aps.len()
    }

    /// The letter read under a labeling. Propositions the automaton does
    /// not track are ignored.
    pub fn letter_of(&self, props: &PropSet) -> usize {
        letter_index(&self.aps, props)
    }

    /// Runs the automaton on `prefix . cycle^ω` until a (state, cycle
    /// position) pair repeats; the repeating segment is exactly the set of
    /// states visited infinitely often, so the word is accepted iff the
    /// segment's minimum priority is even.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        assert!(!w.cycle.is_empty(), "lasso cycle must be nonempty");
        let mut state = self.initial;
        for props in &w.prefix {
            state = self.delta[state][self.letter_of(props)];
        }
        let cycle: Vec<usize> = w.cycle.iter().map(|props| self.letter_of(props)).collect();
        let mut first_seen = std::collections::BTreeMap::new();
        let mut trace = Vec::new();
        let mut phase = 0;
        loop {
            if let Some(&start) = first_seen.get(&(state, phase)) {
                let min = trace[start..].iter().map(|&q: &usize| self.priority[q]).min();
                return min.expect("loop is nonempty") % 2 == 0;
            }
            first_seen.insert((state, phase), trace.len());
            trace.push(state);
            state = self.delta[state][cycle[phase]];
            phase = (phase + 1) % cycle.len();
        }
    }

    /// The automaton for the complement language: same structure, every
    /// priority shifted up by one, which flips the parity of whatever is
    /// seen infinitely often.
    pub fn complement(&self) -> Dpw {
        let mut out = self.clone();
        for p in &mut out.priority {
            *p += 1;
        }
        out
    }

    /// Largest priority in use.
    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }

    /// Renders the automaton in the HOA v1 text format for inspection with
    /// external omega-automata tooling.
    pub fn to_hoa(&self, name: Option<&str>) -> String {
        use std::fmt::Write;
        let colors = self.max_priority() + 1;
        let mut out = String::new();
        writeln!(out, "HOA: v1").unwrap();
        if let Some(name) = name {
            writeln!(out, "name: \"{}\"", name.escape_default()).unwrap();
        }
        writeln!(out, "States: {}", self.state_count()).unwrap();
        writeln!(out, "Start: {}", self.initial).unwrap();
        write!(out, "AP: {}", self.aps.len()).unwrap();
        for ap in &self.aps {
            write!(out, " \"{}\"", ap.escape_default()).unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "acc-name: parity min even {colors}").unwrap();
        writeln!(out, "Acceptance: {} {}", colors, parity_acceptance(colors)).unwrap();
        writeln!(out, "properties: deterministic complete state-acc").unwrap();
        writeln!(out, "--BODY--").unwrap();
        for q in 0..self.state_count() {
            writeln!(out, "State: {} {{{}}}", q, self.priority[q]).unwrap();
            for letter in 0..self.letter_count() {
                writeln!(out, "[{}] {}", letter_expr(letter, self.aps.len()), self.delta[q][letter])
                    .unwrap();
            }
        }
        writeln!(out, "--END--").unwrap();
        out
    }
}

/// The canonical HOA acceptance formula for min-even parity with the given
/// number of colors, e.g. `Inf(0) | (Fin(1) & (Inf(2) | Fin(3)))`.
fn parity_acceptance(colors: u32) -> String {
    fn level(c: u32, colors: u32) -> String {
        let last = c + 1 == colors;
        match (c.is_multiple_of(2), last) {
            (true, true) => format!("Inf({c})"),
            (false, true) => format!("Fin({c})"),
            (true, false) => format!("Inf({c}) | ({})", level(c + 1, colors)),
            (false, false) => format!("Fin({c}) & ({})", level(c + 1, colors)),
        }
    }
    level(0, colors)
}

fn letter_expr(letter: usize, ap_count: usize) -> String {
    if ap_count == 0 {
        return "t".to_owned();
    }
    (0..ap_count)
        .map(|i| if letter >> i & 1 == 1 { format!("{i}") } else { format!("!{i}") })
        .collect::<Vec<_>>()
        .join(" & ")
}

/// Compiles a formula to a deterministic parity automaton for its models.
pub fn ltl_to_dpw(f: &LtlFormula, state_cap: usize) -> Result<Dpw, RvError> {
    let nbw = ltl_to_nbw(f, state_cap)?;
    determinize_to_dpw(&nbw, state_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse_ltl;

    fn letter(spec: &str) -> PropSet {
        spec.split_whitespace().map(str::to_owned).collect()
    }

    fn lasso(prefix: &[&str], cycle: &[&str]) -> LassoWord {
        LassoWord::new(
            prefix.iter().map(|s| letter(s)).collect(),
            cycle.iter().map(|s| letter(s)).collect(),
        )
    }

    fn dpw(text: &str) -> Dpw {
        ltl_to_dpw(&parse_ltl(text).unwrap(), DEFAULT_DPW_STATE_CAP).unwrap()
    }

    #[test]
    fn truth_accepts_everything() {
        let d = dpw("true");
        assert!(d.accepts_lasso(&lasso(&[], &[""])));
        assert!(d.accepts_lasso(&lasso(&["p"], &["q", ""])));
    }

    #[test]
    fn tautology_is_universal() {
        let d = dpw("p | !p");
        for w in [lasso(&[], &["p"]), lasso(&[], &[""]), lasso(&["p"], &["", "p"])] {
            assert!(d.accepts_lasso(&w));
        }
    }

    #[test]
    fn contradiction_is_empty() {
        let d = dpw("p & !p");
        for w in [lasso(&[], &["p"]), lasso(&[], &[""])] {
            assert!(!d.accepts_lasso(&w));
        }
    }

    #[test]
    fn next_looks_one_step_ahead() {
        let d = dpw("X p");
        assert!(d.accepts_lasso(&lasso(&["", "p"], &[""])));
        assert!(!d.accepts_lasso(&lasso(&["p"], &[""])));
    }

    #[test]
    fn until_requires_a_witness() {
        let d = dpw("p U q");
        assert!(d.accepts_lasso(&lasso(&["p"], &["q"])));
        assert!(!d.accepts_lasso(&lasso(&["p"], &[""])));
        assert!(!d.accepts_lasso(&lasso(&["p", ""], &["q"])));
    }

    #[test]
    fn persistence_needs_a_stable_suffix() {
        let d = dpw("F G p");
        assert!(d.accepts_lasso(&lasso(&[""], &["p"])));
        assert!(!d.accepts_lasso(&lasso(&[], &["p", ""])));
    }

    #[test]
    fn foreign_propositions_are_ignored() {
        let d = dpw("F p");
        assert!(d.accepts_lasso(&lasso(&[], &["p r"])));
        assert!(!d.accepts_lasso(&lasso(&[], &["r"])));
    }

    #[test]
    fn complement_flips_acceptance() {
        let d = dpw("F p");
        let c = d.complement();
        for w in [lasso(&[], &[""]), lasso(&[], &["p"]), lasso(&["p"], &[""])] {
            assert_eq!(c.accepts_lasso(&w), !d.accepts_lasso(&w));
        }
        let back = c.complement();
        for w in [lasso(&[], &[""]), lasso(&[], &["p"])] {
            assert_eq!(back.accepts_lasso(&w), d.accepts_lasso(&w));
        }
    }

    #[test]
    fn hoa_output_is_well_formed() {
        let d = dpw("F p");
        let hoa = d.to_hoa(Some("F p"));
        assert!(hoa.starts_with("HOA: v1\n"));
        assert!(hoa.contains(&format!("States: {}", d.state_count())));
        assert!(hoa.contains("acc-name: parity min even"));
        assert!(hoa.contains("AP: 1 \"p\""));
        assert!(hoa.trim_end().ends_with("--END--"));
        let transition_lines = hoa.lines().filter(|l| l.starts_with('[')).count();
        assert_eq!(transition_lines, d.state_count() * d.letter_count());
    }

    #[test]
    fn parity_formulas_match_the_format_spec() {
        assert_eq!(parity_acceptance(1), "Inf(0)");
        assert_eq!(parity_acceptance(2), "Inf(0) | (Fin(1))");
        assert_eq!(
            parity_acceptance(5),
            "Inf(0) | (Fin(1) & (Inf(2) | (Fin(3) & (Inf(4)))))"
        );
    }

    #[test]
    fn resource_cap_propagates() {
        let f = parse_ltl("G F p & G F q").unwrap();
        match ltl_to_dpw(&f, 2) {
            Err(RvError::Resource(_)) => {}
            other => panic!("expected resource error, got {other:?}"),
        }
    }
}
