use std::fmt;

use crate::error::{Error, Result};

/// Largest register order representable by the packed `u32` state encoding.
pub const HARD_MAX_ORDER: usize = 30;

/// An n-stage register state.
///
/// Bit `i` of the display string holds `s_i` with `s_0` leftmost, so the
/// packed value is `sum s_i * 2^(n-1-i)`: `s_0` is the most significant bit
/// and `s_{n-1}` the least significant one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegisterState {
    order: usize,
    bits: u32,
}

impl RegisterState {
    pub fn new(order: usize, bits: u32) -> Result<Self> {
        if order == 0 || order > HARD_MAX_ORDER {
            return Err(Error::OrderOutOfRange {
                order,
                max: HARD_MAX_ORDER,
            });
        }
        if u64::from(bits) >= 1u64 << order {
            return Err(Error::Syntax(format!(
                "state value {bits} does not fit in {order} bits"
            )));
        }
        Ok(RegisterState { order, bits })
    }

    /// Parses a state from a 0/1 string, `s_0` first.
    pub fn from_bit_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Syntax("empty state literal".into()));
        }
        let mut bits = 0u32;
        for ch in text.chars() {
            let b = match ch {
                '0' => 0,
                '1' => 1,
                other => {
                    return Err(Error::Syntax(format!("invalid state character '{other}'")));
                }
            };
            bits = (bits << 1) | b;
        }
        RegisterState::new(text.len(), bits)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// The state with the last bit `s_{n-1}` complemented.
    pub fn companion(&self) -> Self {
        RegisterState {
            order: self.order,
            bits: self.bits ^ 1,
        }
    }

    /// The state with the first bit `s_0` complemented.
    pub fn conjugate(&self) -> Self {
        RegisterState {
            order: self.order,
            bits: self.bits ^ (1 << (self.order - 1)),
        }
    }

    /// Bit `s_i` of the state.
    pub fn bit(&self, i: usize) -> u8 {
        debug_assert!(i < self.order);
        ((self.bits >> (self.order - 1 - i)) & 1) as u8
    }

    pub(crate) fn check_order(&self, expected: usize) -> Result<()> {
        if self.order != expected {
            return Err(Error::OrderMismatch {
                expected,
                found: self.order,
            });
        }
        Ok(())
    }
}

impl fmt::Display for RegisterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.order {
            write!(f, "{}", self.bit(i))?;
        }
        Ok(())
    }
}
