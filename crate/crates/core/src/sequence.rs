use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// One period of a binary sequence. Constructors reduce the stored bits to
/// the least period, so rotation equality is well-defined.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicSequence {
    bits: Vec<u8>,
    declared_order: Option<usize>,
}

impl PeriodicSequence {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptySequence);
        }
        debug_assert!(bits.iter().all(|&b| b <= 1));
        let bits = reduce_to_least_period(bits);
        Ok(PeriodicSequence {
            bits,
            declared_order: None,
        })
    }

    pub fn from_bit_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let mut bits = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => {
                    return Err(Error::Syntax(format!(
                        "invalid sequence character '{other}'"
                    )));
                }
            }
        }
        PeriodicSequence::new(bits)
    }

    pub fn with_declared_order(mut self, order: usize) -> Self {
        self.declared_order = Some(order);
        self
    }

    pub fn declared_order(&self) -> Option<usize> {
        self.declared_order
    }

    pub fn period(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|b| char::from(b'0' + b)).collect()
    }

    /// The lexicographically least rotation. Idempotent, and equal for all
    /// rotations of the same sequence.
    pub fn rotation_canonical(&self) -> PeriodicSequence {
        let start = booth_least_rotation(&self.bits);
        let mut rotated = Vec::with_capacity(self.bits.len());
        rotated.extend_from_slice(&self.bits[start..]);
        rotated.extend_from_slice(&self.bits[..start]);
        PeriodicSequence {
            bits: rotated,
            declared_order: self.declared_order,
        }
    }

    /// Shift-equivalence: equality up to cyclic rotation.
    pub fn shift_equivalent(&self, other: &PeriodicSequence) -> bool {
        self.period() == other.period()
            && self.rotation_canonical().bits == other.rotation_canonical().bits
    }

    /// The least `k` such that, reading the sequence cyclically, every
    /// length-`k` window determines the bit that follows it. This coincides
    /// with the least order of an FSR generating the sequence: a `k`-stage
    /// FSR exists exactly when the next bit is a function of the previous
    /// `k` bits at every cyclic position.
    pub fn nonlinear_complexity(&self) -> usize {
        if self.bits.iter().all(|&b| b == self.bits[0]) {
            return 0;
        }
        let n = self.bits.len();
        for k in 1..=n {
            if self.windows_determine_next(k) {
                return k;
            }
        }
        // Length-n windows are the n rotations of a least-period-n string,
        // all distinct, so the loop always returns by k = n.
        unreachable!("length-{n} windows are always consistent");
    }

    fn windows_determine_next(&self, k: usize) -> bool {
        let n = self.bits.len();
        let mut doubled = self.bits.clone();
        doubled.extend_from_within(..);
        let mut seen: HashMap<&[u8], u8> = HashMap::with_capacity(n);
        for i in 0..n {
            let window = &doubled[i..i + k];
            let next = doubled[i + k];
            match seen.get(window) {
                Some(&b) if b != next => return false,
                Some(_) => {}
                None => {
                    seen.insert(window, next);
                }
            }
        }
        true
    }

    /// True iff the period is `2^n` and the `2^n` cyclic n-bit windows are
    /// pairwise distinct.
    pub fn is_de_bruijn(&self, n: usize) -> bool {
        if n == 0 || n >= usize::BITS as usize {
            return false;
        }
        let size = 1usize << n;
        if self.bits.len() != size {
            return false;
        }
        self.duplicate_window(n).is_none()
    }

    /// Returns a duplicated cyclic n-window if one exists (diagnostics for
    /// the de Bruijn check).
    pub fn duplicate_window(&self, n: usize) -> Option<String> {
        let size = 1usize << n;
        let mask = (size - 1) as u64;
        let mut seen = vec![false; size];
        let mut v: u64 = 0;
        for i in 0..n {
            v = (v << 1) | u64::from(self.bits[i % self.bits.len()]);
        }
        for i in 0..self.bits.len() {
            if seen[(v & mask) as usize] {
                return Some(window_string(v & mask, n));
            }
            seen[(v & mask) as usize] = true;
            let next = self.bits[(i + n) % self.bits.len()];
            v = ((v << 1) | u64::from(next)) & mask;
        }
        None
    }
}

fn window_string(v: u64, n: usize) -> String {
    (0..n)
        .map(|i| char::from(b'0' + ((v >> (n - 1 - i)) & 1) as u8))
        .collect()
}

impl fmt::Display for PeriodicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit_string())
    }
}

fn reduce_to_least_period(bits: Vec<u8>) -> Vec<u8> {
    let n = bits.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| bits[i] == bits[i - d]) {
            return bits[..d].to_vec();
        }
    }
    bits
}

/// Booth's least-rotation algorithm: index of the lexicographically smallest
/// rotation in O(n).
fn booth_least_rotation(bits: &[u8]) -> usize {
    let n = bits.len();
    let mut doubled = bits.to_vec();
    doubled.extend_from_within(..);
    let mut fail = vec![-1i64; doubled.len()];
    let mut k: i64 = 0;
    for j in 1..doubled.len() as i64 {
        let sj = doubled[j as usize];
        let mut i = fail[(j - k - 1) as usize];
        while i != -1 && sj != doubled[(k + i + 1) as usize] {
            if sj < doubled[(k + i + 1) as usize] {
                k = j - i - 1;
            }
            i = fail[i as usize];
        }
        if i == -1 && sj != doubled[(k + i + 1) as usize] {
            if sj < doubled[(k + i + 1) as usize] {
                k = j;
            }
            fail[(j - k) as usize] = -1;
        } else {
            fail[(j - k) as usize] = i + 1;
        }
    }
    k as usize % n
}
