//! Rendering of deterministic parity word automata in the HOA v1
//! exchange format, with state-based min-even parity acceptance.

use std::fmt::Write;

use rv_core::Dpw;

pub fn render(dpw: &Dpw, name: &str) -> String {
    let sets = dpw.priority.iter().copied().max().unwrap_or(0) + 1;
    let mut out = String::new();
    out.push_str("HOA: v1\n");
    let _ = writeln!(out, "name: {name:?}");
    let _ = writeln!(out, "States: {}", dpw.state_count());
    let _ = writeln!(out, "Start: {}", dpw.initial);
    let _ = write!(out, "AP: {}", dpw.aps.len());
    for ap in &dpw.aps {
        let _ = write!(out, " {ap:?}");
    }
    out.push('\n');
    let _ = writeln!(out, "acc-name: parity min even {sets}");
    let _ = writeln!(out, "Acceptance: {sets} {}", parity_condition(sets));
    out.push_str("properties: trans-labels explicit-labels state-acc deterministic complete\n");
    out.push_str("--BODY--\n");
    for s in 0..dpw.state_count() {
        let _ = writeln!(out, "State: {s} {{{}}}", dpw.priority[s]);
        for (letter, target) in dpw.delta[s].iter().enumerate() {
            let _ = writeln!(out, "[{}] {target}", guard(dpw.aps.len(), letter));
        }
    }
    out.push_str("--END--\n");
    out
}

/// The min-even condition over `sets` priorities, innermost first:
/// `Inf(0) | (Fin(1) & (Inf(2) | ...))`.
fn parity_condition(sets: u32) -> String {
    let last = sets - 1;
    let mut acc =
        if last.is_multiple_of(2) { format!("Inf({last})") } else { format!("Fin({last})") };
    for i in (0..last).rev() {
        acc = if i.is_multiple_of(2) {
            format!("Inf({i}) | ({acc})")
        } else {
            format!("Fin({i}) & ({acc})")
        };
    }
    acc
}

/// The boolean guard selecting exactly one alphabet letter. Bit `i` of the
/// letter corresponds to atomic proposition number `i`.
fn guard(ap_count: usize, letter: usize) -> String {
    if ap_count == 0 {
        return "t".to_owned();
    }
    (0..ap_count)
        .map(|i| if letter >> i & 1 == 1 { format!("{i}") } else { format!("!{i}") })
        .collect::<Vec<_>>()
        .join("&")
}
