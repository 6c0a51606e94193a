use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::state::{RegisterState, HARD_MAX_ORDER};

/// Algebraic normal form: an XOR of monomials, each monomial an AND of
/// variables. The empty monomial stands for the constant 1; an empty term
/// set is the constant 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anf {
    terms: BTreeSet<Vec<usize>>,
}

impl Anf {
    pub fn zero() -> Self {
        Anf {
            terms: BTreeSet::new(),
        }
    }

    pub fn one() -> Self {
        let mut terms = BTreeSet::new();
        terms.insert(Vec::new());
        Anf { terms }
    }

    /// XOR-inserts a monomial: duplicates cancel over GF(2).
    pub fn toggle_term(&mut self, vars: &[usize]) {
        let mut vars: Vec<usize> = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        if !self.terms.remove(&vars) {
            self.terms.insert(vars);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.terms.iter()
    }

    pub fn max_variable(&self) -> Option<usize> {
        self.terms
            .iter()
            .filter_map(|t| t.iter().copied().max())
            .max()
    }

    /// Evaluates the ANF at the point packed as in [`RegisterState`]
    /// (`x_0` most significant).
    pub fn eval(&self, order: usize, point: u32) -> u8 {
        let mut acc = 0u8;
        for term in &self.terms {
            let mut prod = 1u8;
            for &i in term {
                prod &= ((point >> (order - 1 - i)) & 1) as u8;
            }
            acc ^= prod;
        }
        acc
    }

    /// Returns a copy with every variable index shifted up by `offset`.
    pub fn shift_variables(&self, offset: usize) -> Anf {
        let terms = self
            .terms
            .iter()
            .map(|t| t.iter().map(|i| i + offset).collect())
            .collect();
        Anf { terms }
    }
}

impl fmt::Display for Anf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|term| {
                if term.is_empty() {
                    "1".to_string()
                } else {
                    term.iter()
                        .map(|i| format!("x{i}"))
                        .collect::<Vec<_>>()
                        .join("*")
                }
            })
            .collect();
        write!(f, "{}", rendered.join(" + "))
    }
}

/// A Boolean feedback function of `order` variables, stored as a truth table
/// indexed by the packed state value (`x_0` most significant). The optional
/// ANF is kept for display only; the table is the normative form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackFunction {
    order: usize,
    table: Vec<u8>,
    source_form: Option<Anf>,
}

impl FeedbackFunction {
    pub fn from_truth_table(order: usize, table: Vec<u8>) -> Result<Self> {
        if order == 0 || order > HARD_MAX_ORDER {
            return Err(Error::OrderOutOfRange {
                order,
                max: HARD_MAX_ORDER,
            });
        }
        if table.len() != 1usize << order {
            return Err(Error::Syntax(format!(
                "truth table length {} does not match order {order}",
                table.len()
            )));
        }
        debug_assert!(table.iter().all(|&b| b <= 1));
        Ok(FeedbackFunction {
            order,
            table,
            source_form: None,
        })
    }

    pub fn from_anf(anf: Anf, order: usize) -> Result<Self> {
        if order == 0 || order > HARD_MAX_ORDER {
            return Err(Error::OrderOutOfRange {
                order,
                max: HARD_MAX_ORDER,
            });
        }
        if let Some(max) = anf.max_variable() {
            if max >= order {
                return Err(Error::VariableOutOfRange { index: max, order });
            }
        }
        let table = (0..1u32 << order).map(|v| anf.eval(order, v)).collect();
        Ok(FeedbackFunction {
            order,
            table,
            source_form: Some(anf),
        })
    }

    /// Parses an ANF expression: `term ('+' term)*` with
    /// `term = '0' | '1' | factor ('*' factor)*` and `factor = 'x' digits`.
    pub fn parse(text: &str, order: usize) -> Result<Self> {
        let anf = parse_anf(text)?;
        FeedbackFunction::from_anf(anf, order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn truth_table(&self) -> &[u8] {
        &self.table
    }

    pub fn source_form(&self) -> Option<&Anf> {
        self.source_form.as_ref()
    }

    /// Table lookup at a packed state value.
    #[inline]
    pub fn eval_index(&self, v: u32) -> u8 {
        self.table[v as usize]
    }

    /// Evaluates the function at a register state of the same order.
    pub fn eval(&self, s: &RegisterState) -> Result<u8> {
        s.check_order(self.order)?;
        Ok(self.eval_index(s.bits()))
    }

    /// The FSR transition: drop `s_0`, append `f(s)`.
    pub fn successor(&self, s: &RegisterState) -> Result<RegisterState> {
        s.check_order(self.order)?;
        Ok(RegisterState::new(self.order, self.successor_index(s.bits())).unwrap())
    }

    #[inline]
    pub fn successor_index(&self, v: u32) -> u32 {
        let mask = ((1u64 << self.order) - 1) as u32;
        ((v << 1) & mask) | u32::from(self.eval_index(v))
    }

    /// True when the value never depends on `x_0`.
    pub fn is_standard(&self) -> bool {
        let high = 1usize << (self.order - 1);
        (0..high).all(|v| self.table[v] == self.table[v | high])
    }

    /// True when `f = x_0 + g(x_1, ..., x_{n-1})`.
    pub fn is_nonsingular(&self) -> bool {
        let high = 1usize << (self.order - 1);
        (0..high).all(|v| self.table[v] != self.table[v | high])
    }

    /// Packs the truth table into bytes (bit `v % 8` of byte `v / 8`) and
    /// renders it as lowercase hex.
    pub fn truth_table_hex(&self) -> String {
        let mut bytes = vec![0u8; self.table.len().div_ceil(8)];
        for (v, &bit) in self.table.iter().enumerate() {
            bytes[v / 8] |= bit << (v % 8);
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for FeedbackFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source_form {
            Some(anf) => write!(f, "{anf}"),
            None => write!(f, "<table:{}>", self.truth_table_hex()),
        }
    }
}

fn parse_anf(text: &str) -> Result<Anf> {
    let mut anf = Anf::zero();
    let mut any_term = false;
    for term in text.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(Error::Syntax("empty term in ANF expression".into()));
        }
        any_term = true;
        if term == "0" {
            continue;
        }
        if term == "1" {
            anf.toggle_term(&[]);
            continue;
        }
        let mut vars = Vec::new();
        for factor in term.split('*') {
            let factor = factor.trim();
            let rest = factor
                .strip_prefix('x')
                .ok_or_else(|| Error::Syntax(format!("expected variable, found '{factor}'")))?;
            if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::Syntax(format!("bad variable index in '{factor}'")));
            }
            let index: usize = rest
                .parse()
                .map_err(|_| Error::Syntax(format!("bad variable index in '{factor}'")))?;
            vars.push(index);
        }
        anf.toggle_term(&vars);
    }
    if !any_term {
        return Err(Error::Syntax("empty ANF expression".into()));
    }
    Ok(anf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn st(text: &str) -> RegisterState {
        RegisterState::from_bit_str(text).unwrap()
    }

    #[test]
    fn parses_example_function() {
        // x1 + x2*x3 of order 4: the truth table must match direct evaluation.
        let f = FeedbackFunction::parse("x1 + x2*x3", 4).unwrap();
        assert_eq!(f.order(), 4);
        for v in 0u32..16 {
            let x = |i: usize| (v >> (3 - i)) & 1;
            let expect = (x(1) ^ (x(2) & x(3))) as u8;
            assert_eq!(f.eval_index(v), expect, "at v={v:04b}");
        }
        assert!(f.is_standard());
        assert_eq!(f.to_string(), "x1 + x2*x3");
    }

    #[test]
    fn constant_zero_function() {
        let f = FeedbackFunction::parse("0", 4).unwrap();
        assert!(f.truth_table().iter().all(|&b| b == 0));
        assert_eq!(f.eval(&st("0110")).unwrap(), 0);
        assert!(f.is_standard());
        assert!(!f.is_nonsingular());
    }

    #[test]
    fn nonsingular_non_standard() {
        let f = FeedbackFunction::parse("x0 + x1", 2).unwrap();
        assert!(f.is_nonsingular());
        assert!(!f.is_standard());
    }

    #[test]
    fn eval_matches_figure_edges() {
        let f = FeedbackFunction::parse("x1 + x2*x3", 4).unwrap();
        assert_eq!(f.eval(&st("1110")).unwrap(), 1);
        assert_eq!(f.successor(&st("1110")).unwrap(), st("1101"));
        assert_eq!(f.eval(&st("0000")).unwrap(), 0);
        assert_eq!(f.successor(&st("1000")).unwrap(), st("0000"));
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let f = FeedbackFunction::parse("0", 4).unwrap();
        let s = st("010");
        assert_eq!(
            f.eval(&s),
            Err(Error::OrderMismatch {
                expected: 4,
                found: 3
            })
        );
    }

    #[test]
    fn variable_out_of_range() {
        assert_eq!(
            FeedbackFunction::parse("x4", 4),
            Err(Error::VariableOutOfRange { index: 4, order: 4 })
        );
    }

    #[test]
    fn syntax_errors() {
        assert!(FeedbackFunction::parse("", 3).is_err());
        assert!(FeedbackFunction::parse("x1 +", 3).is_err());
        assert!(FeedbackFunction::parse("y1", 3).is_err());
        assert!(FeedbackFunction::parse("x", 3).is_err());
    }

    #[test]
    fn duplicate_terms_cancel() {
        let f = FeedbackFunction::parse("x1 + x1", 3).unwrap();
        assert!(f.truth_table().iter().all(|&b| b == 0));
        let g = FeedbackFunction::parse("1 + 1 + x2", 3).unwrap();
        assert_eq!(g.to_string(), "x2");
    }

    #[test]
    fn fixed_point_of_constant_zero() {
        let f = FeedbackFunction::parse("0", 5).unwrap();
        let zero = RegisterState::new(5, 0).unwrap();
        assert_eq!(f.successor(&zero).unwrap(), zero);
    }

    proptest! {
        // The successor drops the first bit: low n-1 bits of the input equal
        // the high n-1 bits of the output.
        #[test]
        fn successor_window_overlap(order in 2usize..=8, raw_v in any::<u32>(), raw_t in any::<u64>()) {
            let v = raw_v & ((1u32 << order) - 1);
            let table: Vec<u8> = (0..1usize << order).map(|i| ((raw_t >> (i % 64)) & 1) as u8).collect();
            let f = FeedbackFunction::from_truth_table(order, table).unwrap();
            let next = f.successor_index(v);
            let mask = (1u32 << (order - 1)) - 1;
            prop_assert_eq!(v & mask, next >> 1);
        }

        // Standard functions ignore the first bit.
        #[test]
        fn standard_function_ignores_conjugation(order in 2usize..=8, raw_g in any::<u64>(), raw_v in any::<u32>()) {
            let half = 1usize << (order - 1);
            let table: Vec<u8> = (0..2 * half).map(|i| ((raw_g >> (i % half % 64)) & 1) as u8).collect();
            let f = FeedbackFunction::from_truth_table(order, table).unwrap();
            prop_assert!(f.is_standard());
            let v = raw_v & ((1u32 << order) - 1);
            let s = RegisterState::new(order, v).unwrap();
            prop_assert_eq!(f.eval(&s).unwrap(), f.eval(&s.conjugate()).unwrap());
        }
    }
}
