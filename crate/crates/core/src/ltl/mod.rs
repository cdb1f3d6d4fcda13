//! LTL formulas in a minimal core grammar, with exact evaluation on
//! ultimately periodic words.
//!
//! The core grammar is `true`, propositions, negation, disjunction, next
//! and until. Everything else (`false`, conjunction, implication, `F`, `G`)
//! is rewritten into the core grammar by the smart constructors and the
//! parser, so downstream algorithms only ever see six node kinds.
//!
//! [`evaluate_on_lasso`] decides satisfaction on a lasso word directly from
//! the semantics, independently of the automata pipeline. It is the oracle
//! the automaton translation is cross-validated against.

mod parse;

pub use parse::parse_ltl;

use std::collections::BTreeSet;
use std::fmt;

/// A set of atomic propositions. Used both as a state label and as a letter
/// of an automaton alphabet.
pub type PropSet = BTreeSet<String>;

/// An LTL formula in the core grammar.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LtlFormula {
    True,
    Prop(String),
    Not(Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
}

impl LtlFormula {
    /// An atomic proposition.
    pub fn prop(name: impl Into<String>) -> Self {
        LtlFormula::Prop(name.into())
    }

    /// Negation. Double negations collapse, so derived forms such as `G p`
    /// normalize to a unique tree.
    pub fn negate(f: LtlFormula) -> Self {
        match f {
            LtlFormula::Not(inner) => *inner,
            other => LtlFormula::Not(Box::new(other)),
        }
    }

    /// Disjunction.
    pub fn or(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::Or(Box::new(a), Box::new(b))
    }

    /// Conjunction, rewritten through De Morgan: `a & b` is `!(!a | !b)`.
    pub fn and(a: LtlFormula, b: LtlFormula) -> Self {
        Self::negate(Self::or(Self::negate(a), Self::negate(b)))
    }

    /// Implication, rewritten to `!a | b`.
    pub fn implies(a: LtlFormula, b: LtlFormula) -> Self {
        Self::or(Self::negate(a), b)
    }

    /// The next-step operator.
    pub fn next(f: LtlFormula) -> Self {
        LtlFormula::Next(Box::new(f))
    }

    /// The until operator.
    pub fn until(a: LtlFormula, b: LtlFormula) -> Self {
        LtlFormula::Until(Box::new(a), Box::new(b))
    }

    /// `F f`, rewritten to `true U f`.
    pub fn eventually(f: LtlFormula) -> Self {
        Self::until(LtlFormula::True, f)
    }

    /// `G f`, rewritten to `!F !f`.
    pub fn always(f: LtlFormula) -> Self {
        Self::negate(Self::eventually(Self::negate(f)))
    }

    /// The constant false, represented as `!true`.
    pub fn ff() -> Self {
        Self::negate(LtlFormula::True)
    }

    /// Number of nodes in the core-grammar tree.
    pub fn size(&self) -> usize {
        match self {
            LtlFormula::True | LtlFormula::Prop(_) => 1,
            LtlFormula::Not(a) | LtlFormula::Next(a) => 1 + a.size(),
            LtlFormula::Or(a, b) | LtlFormula::Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// The proposition names occurring in the formula.
    pub fn propositions(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        self.collect_props(&mut set);
        set
    }

    fn collect_props(&self, into: &mut BTreeSet<String>) {
        match self {
            LtlFormula::True => {}
            LtlFormula::Prop(name) => {
                into.insert(name.clone());
            }
            LtlFormula::Not(a) | LtlFormula::Next(a) => a.collect_props(into),
            LtlFormula::Or(a, b) | LtlFormula::Until(a, b) => {
                a.collect_props(into);
                b.collect_props(into);
            }
        }
    }
}

// Binding strengths used when rendering, loosest first. The core tree has
// no conjunction or implication nodes, but the levels keep the table
// aligned with the parser.
const PREC_UNTIL: u8 = 0;
const PREC_OR: u8 = 2;
const PREC_UNARY: u8 = 4;
const PREC_ATOM: u8 = 5;

impl LtlFormula {
    fn write(&self, out: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = match self {
            LtlFormula::True | LtlFormula::Prop(_) => PREC_ATOM,
            LtlFormula::Not(a) if **a == LtlFormula::True => PREC_ATOM,
            LtlFormula::Not(_) | LtlFormula::Next(_) => PREC_UNARY,
            LtlFormula::Until(a, _) if **a == LtlFormula::True => PREC_UNARY,
            LtlFormula::Or(..) => PREC_OR,
            LtlFormula::Until(..) => PREC_UNTIL,
        };
        if prec < min_prec {
            out.write_str("(")?;
            self.write(out, 0)?;
            return out.write_str(")");
        }
        match self {
            LtlFormula::True => out.write_str("true"),
            LtlFormula::Prop(name) => out.write_str(name),
            LtlFormula::Not(a) if **a == LtlFormula::True => out.write_str("false"),
            // !(true U x) displays as G applied to the negation of x.
            LtlFormula::Not(a) => {
                if let LtlFormula::Until(l, r) = &**a {
                    if **l == LtlFormula::True {
                        out.write_str("G ")?;
                        return Self::negate((**r).clone()).write(out, PREC_UNARY);
                    }
                }
                out.write_str("!")?;
                a.write(out, PREC_UNARY)
            }
            LtlFormula::Next(a) => {
                out.write_str("X ")?;
                a.write(out, PREC_UNARY)
            }
            LtlFormula::Or(a, b) => {
                a.write(out, PREC_OR)?;
                out.write_str(" | ")?;
                b.write(out, PREC_OR + 1)
            }
            LtlFormula::Until(a, b) if **a == LtlFormula::True => {
                out.write_str("F ")?;
                b.write(out, PREC_UNARY)
            }
            LtlFormula::Until(a, b) => {
                a.write(out, PREC_UNTIL + 1)?;
                out.write_str(" U ")?;
                b.write(out, PREC_UNTIL)
            }
        }
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(out, 0)
    }
}

/// An ultimately periodic infinite word `prefix . cycle^ω` over proposition
/// sets. The cycle must be nonempty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<PropSet>,
    pub cycle: Vec<PropSet>,
}

impl LassoWord {
    pub fn new(prefix: Vec<PropSet>, cycle: Vec<PropSet>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        LassoWord { prefix, cycle }
    }

    /// The letter at a position of the denoted infinite word.
    pub fn letter(&self, pos: usize) -> &PropSet {
        if pos < self.prefix.len() {
            &self.prefix[pos]
        } else {
            &self.cycle[(pos - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Moves the first cycle letter into the prefix. The denoted infinite
    /// word is unchanged.
    pub fn rotate(&self) -> Self {
        let mut prefix = self.prefix.clone();
        let mut cycle = self.cycle.clone();
        prefix.push(cycle[0].clone());
        cycle.rotate_left(1);
        LassoWord { prefix, cycle }
    }
}

/// Decides whether the infinite word denoted by `w` satisfies `f` at
/// position 0.
///
/// Positions past the prefix fold back into the cycle, so every subformula
/// has a truth value at each of the `|prefix| + |cycle|` folded positions.
/// Values are computed bottom-up; an until is the least fixpoint of its
/// one-step expansion on the folded word, reached by backward sweeps until
/// nothing changes. Starting from all-false makes the fixpoint least, which
/// matches the finite-witness reading of until.
pub fn evaluate_on_lasso(f: &LtlFormula, w: &LassoWord) -> bool {
    assert!(!w.cycle.is_empty(), "lasso cycle must be nonempty");
    eval_positions(f, w)[0]
}

fn eval_positions(f: &LtlFormula, w: &LassoWord) -> Vec<bool> {
    let wrap = w.prefix.len();
    let n = wrap + w.cycle.len();
    let succ = |t: usize| if t + 1 < n { t + 1 } else { wrap };
    match f {
        LtlFormula::True => vec![true; n],
        LtlFormula::Prop(name) => (0..n).map(|t| w.letter(t).contains(name)).collect(),
        LtlFormula::Not(a) => eval_positions(a, w).iter().map(|v| !v).collect(),
        LtlFormula::Or(a, b) => {
            let va = eval_positions(a, w);
            let vb = eval_positions(b, w);
            (0..n).map(|t| va[t] || vb[t]).collect()
        }
        LtlFormula::Next(a) => {
            let va = eval_positions(a, w);
            (0..n).map(|t| va[succ(t)]).collect()
        }
        LtlFormula::Until(a, b) => {
            let va = eval_positions(a, w);
            let vb = eval_positions(b, w);
            let mut val = vec![false; n];
            loop {
                let mut changed = false;
                for t in (0..n).rev() {
                    let v = vb[t] || (va[t] && val[succ(t)]);
                    if v != val[t] {
                        val[t] = v;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            val
        }
    }
}
