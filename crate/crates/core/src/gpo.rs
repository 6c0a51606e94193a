//! The Generalized Prefer-Opposite generator.
//!
//! From the current state `c` the algorithm prefers the state obtained by
//! shifting and appending the complement of `f(c)`, falling back to the
//! plain FSR successor whenever the preferred state has already appeared.
//! It stops when the initial state is reached again.
//!
//! With a feedback function in standard form (no dependence on `x_0`) and a
//! non-leaf initial state, the run revisits the initial state before any
//! other repeat, so the emitted bits form one full period. Preference
//! functions need no separate treatment here: a binary preference function
//! is equivalent to a standard feedback function, so standard functions
//! subsume them.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::function::FeedbackFunction;
use crate::sequence::PeriodicSequence;
use crate::state::RegisterState;
use crate::DEFAULT_MAX_ORDER;

/// Outcome of an unchecked run, which accepts any feedback function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GpoOutcome {
    /// The initial state was revisited; the bits are one full period.
    Periodic(PeriodicSequence),
    /// The step bound (2^(n+1)) fired before the initial state came back:
    /// the output is ultimately periodic but not periodic.
    NonPeriodicGuard { emitted: Vec<u8> },
}

/// A completed run with its state visit order, for instrumentation.
#[derive(Debug, Clone)]
pub struct GpoTrace {
    pub sequence: PeriodicSequence,
    /// States in first-visit order; the run returns to `states[0]`.
    pub states: Vec<u32>,
}

fn check_inputs(f: &FeedbackFunction, u: &RegisterState) -> Result<()> {
    u.check_order(f.order())?;
    if !f.is_standard() {
        return Err(Error::NonStandardFunction);
    }
    if is_leaf(f, u) {
        return Err(Error::LeafInitialState {
            state: u.to_string(),
        });
    }
    Ok(())
}

/// Leaf test without building the graph: for a standard `f`, the state `u`
/// has a predecessor iff `g` of its first n-1 bits equals its last bit.
fn is_leaf(f: &FeedbackFunction, u: &RegisterState) -> bool {
    f.eval_index(u.bits() >> 1) != (u.bits() & 1) as u8
}

/// Runs the GPO Algorithm on a standard feedback function and a non-leaf
/// initial state, returning one period of the output.
pub fn gpo_generate(f: &FeedbackFunction, u: RegisterState) -> Result<PeriodicSequence> {
    Ok(gpo_generate_trace(f, u)?.sequence)
}

/// Like [`gpo_generate`], also reporting the state visit order.
pub fn gpo_generate_trace(f: &FeedbackFunction, u: RegisterState) -> Result<GpoTrace> {
    check_inputs(f, &u)?;
    let (bits, states) = run_loop(f, u.bits(), &mut Vec::new());
    let sequence = PeriodicSequence::new(bits)
        .expect("run emits at least one bit")
        .with_declared_order(f.order());
    Ok(GpoTrace { sequence, states })
}

/// Permissive entry point: accepts any feedback function and any initial
/// state. The run is bounded at 2^(n+1) steps to detect non-termination.
pub fn gpo_generate_unchecked(f: &FeedbackFunction, u: RegisterState) -> Result<GpoOutcome> {
    u.check_order(f.order())?;
    let n = f.order();
    let mask = ((1u64 << n) - 1) as u32;
    let bound = 1usize << (n + 1);
    let mut visited = vec![false; 1 << n];
    let mut bits = Vec::new();
    let mut c = u.bits();
    loop {
        visited[c as usize] = true;
        bits.push((c >> (n - 1)) as u8);
        if bits.len() > bound {
            return Ok(GpoOutcome::NonPeriodicGuard { emitted: bits });
        }
        let y = f.eval_index(c);
        let shifted = (c << 1) & mask;
        let preferred = shifted | u32::from(1 - y);
        let next = if !visited[preferred as usize] {
            preferred
        } else {
            shifted | u32::from(y)
        };
        if next == u.bits() {
            break;
        }
        c = next;
    }
    let sequence = PeriodicSequence::new(bits)
        .expect("run emits at least one bit")
        .with_declared_order(n);
    Ok(GpoOutcome::Periodic(sequence))
}

/// The shared generation loop. `forced` holds the joining states of a GJPO
/// run; whenever the plain FSR successor of the current state is in the set,
/// that successor is taken and the entry is consumed.
pub(crate) fn run_loop(
    f: &FeedbackFunction,
    start: u32,
    forced: &mut Vec<u32>,
) -> (Vec<u8>, Vec<u32>) {
    let n = f.order();
    let mask = ((1u64 << n) - 1) as u32;
    let mut visited = vec![false; 1 << n];
    let mut bits = Vec::new();
    let mut states = Vec::new();
    let mut c = start;
    loop {
        visited[c as usize] = true;
        states.push(c);
        bits.push((c >> (n - 1)) as u8);
        // A standard function with a non-leaf start revisits the start
        // before any other state repeats, so the loop is bounded by 2^n.
        debug_assert!(bits.len() <= 1 << n);
        let y = f.eval_index(c);
        let shifted = (c << 1) & mask;
        let fsucc = shifted | u32::from(y);
        let next = if let Some(pos) = forced.iter().position(|&w| w == fsucc) {
            forced.swap_remove(pos);
            fsucc
        } else {
            let preferred = shifted | u32::from(1 - y);
            if !visited[preferred as usize] {
                preferred
            } else {
                fsucc
            }
        };
        if next == start {
            break;
        }
        c = next;
    }
    (bits, states)
}

/// True iff the state graph of `f` has exactly one component and `u` lies on
/// its cycle, which is exactly when the GPO output is de Bruijn.
pub fn gpo_guarantees_de_bruijn(f: &FeedbackFunction, u: RegisterState) -> Result<bool> {
    u.check_order(f.order())?;
    if !f.is_standard() {
        return Err(Error::NonStandardFunction);
    }
    let g = crate::graph::StateGraph::build(f)?;
    Ok(g.unique_cycle_check() && g.is_on_cycle(u.bits()))
}

/// All n-stage windows of `s` whose first n-1 bits occur twice per period,
/// where n is the nonlinear complexity. These are exactly the valid initial
/// states for reproducing `s`.
pub fn initial_state_candidates(s: &PeriodicSequence) -> Result<Vec<RegisterState>> {
    let n = s.nonlinear_complexity();
    if n < 2 {
        return Err(Error::ComplexityTooLow { nlc: n });
    }
    let census = window_census(s, n - 1);
    let len = s.period();
    let mut out = Vec::new();
    for j in 0..len {
        let prefix = window_at(s, j, n - 1);
        if census[&prefix].len() == 2 {
            out.push(RegisterState::new(n, window_at(s, j, n)).unwrap());
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Builds a standard feedback function and an initial state from which the
/// GPO Algorithm reproduces `s` (up to rotation). Unseen n-1 windows get 0.
pub fn reverse_engineer(s: &PeriodicSequence) -> Result<(FeedbackFunction, RegisterState)> {
    reverse_engineer_with(s, 0)
}

/// As [`reverse_engineer`], with a chosen fill bit for windows that never
/// occur in the sequence (those values are arbitrary).
pub fn reverse_engineer_with(
    s: &PeriodicSequence,
    fill: u8,
) -> Result<(FeedbackFunction, RegisterState)> {
    let n = s.nonlinear_complexity();
    if n < 2 {
        return Err(Error::ComplexityTooLow { nlc: n });
    }
    if n > DEFAULT_MAX_ORDER {
        return Err(Error::OrderOutOfRange {
            order: n,
            max: DEFAULT_MAX_ORDER,
        });
    }
    let len = s.period();

    // The anchor is the smallest n-1 window occurring twice; rotate the
    // sequence so it starts at the anchor's first occurrence.
    let census = window_census(s, n - 1);
    let (anchor, positions) = census
        .iter()
        .filter(|(_, pos)| pos.len() == 2)
        .min_by_key(|(w, _)| **w)
        .map(|(w, pos)| (*w, pos.clone()))
        .expect("some n-1 window occurs twice when the complexity is n");
    let start = positions[0];
    let mut rotated: Vec<u8> = Vec::with_capacity(len);
    for i in 0..len {
        rotated.push(s.bits()[(start + i) % len]);
    }

    let bit_at = |i: usize| rotated[i % len];
    let window = |pos: usize| -> u32 {
        let mut v = 0u32;
        for i in 0..n - 1 {
            v = (v << 1) | u32::from(bit_at(pos + i));
        }
        v
    };

    let half = 1usize << (n - 1);
    let mut g = vec![fill; half];
    let mut assigned = vec![false; half];

    // The anchor window determines the initial state: the state formed by
    // the anchor and its first-occurrence bit. g at the anchor takes that
    // bit, so the run follows the sequence at the anchor's second visit.
    let a = bit_at(n - 1);
    g[anchor as usize] = a;
    assigned[anchor as usize] = true;
    let u_bits = (anchor << 1) | u32::from(a);

    // Everywhere else: the complement of the next bit at a window's first
    // occurrence, the next bit itself at its second (the two agree).
    for j in 1..len {
        let w = window(j) as usize;
        if w == anchor as usize {
            continue;
        }
        let next = bit_at(j + n - 1);
        if !assigned[w] {
            g[w] = 1 - next;
            assigned[w] = true;
        } else {
            debug_assert_eq!(g[w], next, "window recurred with the same next bit");
        }
    }

    let table: Vec<u8> = (0..1usize << n).map(|v| g[v & (half - 1)]).collect();
    let f = FeedbackFunction::from_truth_table(n, table)?;
    Ok((f, RegisterState::new(n, u_bits).unwrap()))
}

fn window_at(s: &PeriodicSequence, pos: usize, k: usize) -> u32 {
    let len = s.period();
    let mut v = 0u32;
    for i in 0..k {
        v = (v << 1) | u32::from(s.bits()[(pos + i) % len]);
    }
    v
}

fn window_census(s: &PeriodicSequence, k: usize) -> HashMap<u32, Vec<usize>> {
    let mut census: HashMap<u32, Vec<usize>> = HashMap::new();
    for j in 0..s.period() {
        census.entry(window_at(s, j, k)).or_default().push(j);
    }
    census
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::StateGraph;

    fn f(spec: &str, n: usize) -> FeedbackFunction {
        FeedbackFunction::parse(spec, n).unwrap()
    }

    fn st(text: &str) -> RegisterState {
        RegisterState::from_bit_str(text).unwrap()
    }

    #[test]
    fn prefer_one_order_4() {
        let s = gpo_generate(&f("0", 4), st("0000")).unwrap();
        assert_eq!(s.bit_string(), "0000111101100101");
        assert_eq!(s.declared_order(), Some(4));
        assert!(s.is_de_bruijn(4));
        assert_eq!(s.nonlinear_complexity(), 4);
    }

    #[test]
    fn lifted_order_6_golden_run() {
        // Base function of order 4, lifted by shifting every index up by 2.
        let lifted = f("1 + x2 + x4 + x5 + x3*x4 + x3*x5 + x4*x5 + x3*x4*x5", 6);
        let s = gpo_generate(&lifted, st("000010")).unwrap();
        assert_eq!(
            s.bit_string(),
            "0000101000111011001011011100111111010010000001100010011010101111"
        );
        assert!(s.is_de_bruijn(6));
    }

    #[test]
    fn leaf_initial_state_is_rejected() {
        let err = gpo_generate(&f("x1 + x2*x3", 4), st("0110")).unwrap_err();
        assert_eq!(
            err,
            Error::LeafInitialState {
                state: "0110".into()
            }
        );
    }

    #[test]
    fn non_standard_function_is_rejected() {
        let err = gpo_generate(&f("x0", 3), st("000")).unwrap_err();
        assert_eq!(err, Error::NonStandardFunction);
    }

    #[test]
    fn prefer_same_style_run_is_de_bruijn() {
        let s = gpo_generate(&f("x3 + 1", 4), st("0101")).unwrap();
        assert!(s.is_de_bruijn(4));
    }

    #[test]
    fn guarantee_predicate_examples() {
        assert!(gpo_guarantees_de_bruijn(&f("0", 4), st("0000")).unwrap());
        assert!(!gpo_guarantees_de_bruijn(&f("x1 + x2*x3", 4), st("1110")).unwrap());
        // Off-cycle initial state on a single-component graph.
        assert!(!gpo_guarantees_de_bruijn(&f("0", 4), st("1000")).unwrap());
    }

    #[test]
    fn unchecked_product_function_matches_prefer_one() {
        // The all-variables product sends 0^n along the same run as f = 0.
        let product = f("x0*x1*x2*x3", 4);
        assert!(!product.is_standard());
        let out = gpo_generate_unchecked(&product, st("0000")).unwrap();
        match out {
            GpoOutcome::Periodic(s) => assert_eq!(s.bit_string(), "0000111101100101"),
            other => panic!("expected periodic output, got {other:?}"),
        }
    }

    #[test]
    fn unchecked_guard_fires_on_leaf_start() {
        // A leaf start is never revisited, so the guard stops the run.
        let out = gpo_generate_unchecked(&f("x1 + x2*x3", 4), st("0110")).unwrap();
        match out {
            GpoOutcome::NonPeriodicGuard { emitted } => {
                assert_eq!(emitted.len(), (1 << 5) + 1);
            }
            other => panic!("expected guard, got {other:?}"),
        }
    }

    #[test]
    fn lifted_product_is_not_de_bruijn() {
        // Lifting x0*x1*x2 to order 5 leaves 1^5 unreachable from 0^5.
        let lifted = f("x2*x3*x4", 5);
        let out = gpo_generate_unchecked(&lifted, st("00000")).unwrap();
        match out {
            GpoOutcome::Periodic(s) => assert!(!s.is_de_bruijn(5)),
            other => panic!("expected periodic output, got {other:?}"),
        }
    }

    #[test]
    fn lift_preserves_de_bruijn_generation() {
        // Any standard order-3 function that yields de Bruijn output keeps
        // doing so after lifting to order 5.
        let mut found = 0;
        for raw in 0u16..16 {
            let table: Vec<u8> = (0..8).map(|i| ((raw >> (i % 4)) & 1) as u8).collect();
            let f3 = FeedbackFunction::from_truth_table(3, table).unwrap();
            if !f3.is_standard() {
                continue;
            }
            let g3 = StateGraph::build(&f3).unwrap();
            if !g3.unique_cycle_check() {
                continue;
            }
            found += 1;
            // Lift: shift the table dependence to the last three variables.
            let lifted_table: Vec<u8> = (0..32).map(|v| f3.truth_table()[v & 7]).collect();
            let f5 = FeedbackFunction::from_truth_table(5, lifted_table).unwrap();
            let g5 = StateGraph::build(&f5).unwrap();
            assert!(g5.unique_cycle_check());
            for &u in &g5.components()[0].cycle {
                let s = gpo_generate(&f5, g5.state(u)).unwrap();
                assert!(s.is_de_bruijn(5));
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn visit_order_property_exhaustive_small_orders() {
        // Whenever a two-child state other than the start is appended, both
        // of its children have already been visited.
        for n in [3usize, 4] {
            let half = 1usize << (n - 1);
            for raw in 0u32..(1 << half) {
                let table: Vec<u8> = (0..1 << n).map(|v| ((raw >> (v & (half - 1))) & 1) as u8).collect();
                let f = FeedbackFunction::from_truth_table(n, table).unwrap();
                for ub in 0..(1u32 << n) {
                    let u = RegisterState::new(n, ub).unwrap();
                    let Ok(trace) = gpo_generate_trace(&f, u) else {
                        continue;
                    };
                    let mut seen = vec![false; 1 << n];
                    for (idx, &v) in trace.states.iter().enumerate() {
                        if idx > 0 {
                            let has_children = f.eval_index(v >> 1) == (v & 1) as u8;
                            if has_children {
                                let c0 = v >> 1;
                                let c1 = c0 | (1 << (n - 1)) as u32;
                                assert!(seen[c0 as usize] && seen[c1 as usize]);
                            }
                        }
                        seen[v as usize] = true;
                    }
                }
            }
        }
    }

    #[test]
    fn run_never_enters_other_cycles() {
        // Starting on one cycle, the run visits no state of any other
        // component's cycle.
        for n in [3usize, 4] {
            let half = 1usize << (n - 1);
            for raw in 0u32..(1 << half) {
                let table: Vec<u8> = (0..1 << n).map(|v| ((raw >> (v & (half - 1))) & 1) as u8).collect();
                let f = FeedbackFunction::from_truth_table(n, table).unwrap();
                let g = StateGraph::build(&f).unwrap();
                if g.components().len() < 2 {
                    continue;
                }
                for comp in g.components() {
                    let u = g.state(comp.cycle[0]);
                    let trace = gpo_generate_trace(&f, u).unwrap();
                    for &v in &trace.states {
                        assert!(!(g.is_on_cycle(v) && g.component_of(v) != comp.id));
                    }
                }
            }
        }
    }

    #[test]
    fn first_revisit_is_the_initial_state() {
        // The run stops when the start state comes back; until then no state
        // repeats, so the trace is duplicate-free and one period long.
        for ub in [0b1110u32, 0b1101, 0b0000] {
            let func = f("x1 + x2*x3", 4);
            let u = RegisterState::new(4, ub).unwrap();
            let trace = gpo_generate_trace(&func, u).unwrap();
            let mut sorted = trace.states.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), trace.states.len());
            assert_eq!(trace.sequence.period(), trace.states.len());
        }
    }

    #[test]
    fn reverse_round_trip_prefer_one() {
        let s = PeriodicSequence::from_bit_str("0000111101100101").unwrap();
        let (rf, ru) = reverse_engineer(&s).unwrap();
        assert!(rf.is_standard());
        let out = gpo_generate(&rf, ru).unwrap();
        assert!(out.shift_equivalent(&s));
    }

    #[test]
    fn reverse_round_trip_short_sequence() {
        let s = PeriodicSequence::from_bit_str("0011101").unwrap();
        let (rf, ru) = reverse_engineer(&s).unwrap();
        // The initial state starts with a twice-occurring 2-window.
        let prefix = (ru.bit(0), ru.bit(1));
        let mut count = 0;
        for j in 0..7 {
            let w = (s.bits()[j], s.bits()[(j + 1) % 7]);
            if w == prefix {
                count += 1;
            }
        }
        assert_eq!(count, 2);
        let out = gpo_generate(&rf, ru).unwrap();
        assert!(out.shift_equivalent(&s));
    }

    #[test]
    fn reverse_rejects_low_complexity() {
        let s = PeriodicSequence::from_bit_str("01").unwrap();
        assert_eq!(
            reverse_engineer(&s).unwrap_err(),
            Error::ComplexityTooLow { nlc: 1 }
        );
        let c = PeriodicSequence::from_bit_str("0000").unwrap();
        assert_eq!(
            reverse_engineer(&c).unwrap_err(),
            Error::ComplexityTooLow { nlc: 0 }
        );
    }

    #[test]
    fn candidate_states_for_short_sequence() {
        let s = PeriodicSequence::from_bit_str("0011101").unwrap();
        let got = initial_state_candidates(&s).unwrap();
        let got: Vec<String> = got.iter().map(|s| s.to_string()).collect();
        // All windows whose 2-bit prefix recurs; those with prefix 11 are
        // 111 and 110.
        assert!(got.contains(&"111".to_string()));
        assert!(got.contains(&"110".to_string()));
        assert!(!got.contains(&"001".to_string()));
        assert_eq!(got.len(), 6);
    }

    #[test]
    fn candidates_of_de_bruijn_sequence_are_all_states() {
        let s = PeriodicSequence::from_bit_str("0000111101100101").unwrap();
        let got = initial_state_candidates(&s).unwrap();
        assert_eq!(got.len(), 16);
    }

    #[test]
    fn candidates_reject_pair_sequence() {
        let s = PeriodicSequence::from_bit_str("01").unwrap();
        assert!(initial_state_candidates(&s).is_err());
    }
}
