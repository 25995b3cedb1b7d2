//! Fixed-width bit strings with MSb-first text form and LSb-0 indexing.
//!
//! All encoding, decoding and instruction semantics are written in terms of
//! [`BitString`] and the six numeric helpers on it (`uint_value`,
//! `sint_value`, `from_uint`, `from_sint`, `zero_extend`, `sign_extend`).
//! Widths are capped at 64 bits and nothing is ever truncated implicitly:
//! every narrowing is an explicit [`BitString::slice`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub const MAX_WIDTH: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("bit string width {0} outside 1..=64")]
    InvalidWidth(u32),
    #[error("invalid bit digit {0:?} (only '0' and '1' allowed)")]
    InvalidDigit(char),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("value {value} does not fit in {width} bits")]
    Range { value: i128, width: u32 },
}

pub type Result<T> = std::result::Result<T, BitsError>;

/// A bit vector of `width` bits (1..=64). Bit 0 is the least significant.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    width: u32,
    bits: u64,
}

fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn check_width(width: u32) -> Result<()> {
    if (1..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(BitsError::InvalidWidth(width))
    }
}

impl BitString {
    /// Builds a bit string from raw bits. Bits above `width` must be clear.
    pub fn new(width: u32, bits: u64) -> Result<Self> {
        check_width(width)?;
        if bits & !mask(width) != 0 {
            return Err(BitsError::Range {
                value: bits as i128,
                width,
            });
        }
        Ok(Self { width, bits })
    }

    pub fn zeros(width: u32) -> Result<Self> {
        Self::new(width, 0)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Raw bits as an unsigned integer (same as `uint_value(width)`).
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Bit `i` under LSb-0 numbering.
    pub fn bit(&self, i: u32) -> Result<bool> {
        if i >= self.width {
            return Err(BitsError::Precondition(format!(
                "bit index {i} out of range for width {}",
                self.width
            )));
        }
        Ok(self.bits >> i & 1 == 1)
    }

    pub fn with_bit(mut self, i: u32, value: bool) -> Result<Self> {
        self.bit(i)?;
        if value {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
        Ok(self)
    }

    /// `b[high:low]`, inclusive on both ends.
    pub fn slice(&self, high: u32, low: u32) -> Result<Self> {
        if high < low || high >= self.width {
            return Err(BitsError::Precondition(format!(
                "slice [{high}:{low}] invalid for width {}",
                self.width
            )));
        }
        let width = high - low + 1;
        Ok(Self {
            width,
            bits: (self.bits >> low) & mask(width),
        })
    }

    /// Unsigned value of the least significant `n` bits.
    pub fn uint_value(&self, n: u32) -> Result<u64> {
        if n > self.width {
            return Err(BitsError::Precondition(format!(
                "uint_value of {n} bits from a {}-bit string",
                self.width
            )));
        }
        if n == 0 {
            return Ok(0);
        }
        Ok(self.bits & mask(n))
    }

    /// Two's-complement value of the least significant `n` bits.
    pub fn sint_value(&self, n: u32) -> Result<i64> {
        if n == 0 || n > self.width {
            return Err(BitsError::Precondition(format!(
                "sint_value of {n} bits from a {}-bit string",
                self.width
            )));
        }
        let raw = self.bits & mask(n);
        let shift = 64 - n;
        Ok(((raw << shift) as i64) >> shift)
    }

    /// `n`-bit unsigned representation of `value`.
    pub fn from_uint(value: u64, n: u32) -> Result<Self> {
        check_width(n)?;
        if value & !mask(n) != 0 {
            return Err(BitsError::Range {
                value: value as i128,
                width: n,
            });
        }
        Ok(Self {
            width: n,
            bits: value,
        })
    }

    /// `n`-bit two's-complement representation of `value`.
    pub fn from_sint(value: i64, n: u32) -> Result<Self> {
        check_width(n)?;
        let min = -(1i128 << (n - 1));
        let max = (1i128 << (n - 1)) - 1;
        if (value as i128) < min || (value as i128) > max {
            return Err(BitsError::Range {
                value: value as i128,
                width: n,
            });
        }
        Ok(Self {
            width: n,
            bits: (value as u64) & mask(n),
        })
    }

    pub fn zero_extend(&self, n: u32) -> Result<Self> {
        check_width(n)?;
        if n < self.width {
            return Err(BitsError::Precondition(format!(
                "cannot zero-extend {} bits to {n}",
                self.width
            )));
        }
        Ok(Self {
            width: n,
            bits: self.bits,
        })
    }

    pub fn sign_extend(&self, n: u32) -> Result<Self> {
        check_width(n)?;
        if n < self.width {
            return Err(BitsError::Precondition(format!(
                "cannot sign-extend {} bits to {n}",
                self.width
            )));
        }
        let value = self.sint_value(self.width)?;
        Ok(Self {
            width: n,
            bits: (value as u64) & mask(n),
        })
    }

    /// `hi :: lo`; `hi` lands in the most significant bits.
    pub fn concat(&self, lo: &BitString) -> Result<Self> {
        let width = self.width + lo.width;
        if width > MAX_WIDTH {
            return Err(BitsError::Range {
                value: width as i128,
                width: MAX_WIDTH,
            });
        }
        let hi = if lo.width >= 64 { 0 } else { self.bits << lo.width };
        Ok(Self {
            width,
            bits: hi | lo.bits,
        })
    }

    pub fn not(&self) -> Self {
        Self {
            width: self.width,
            bits: !self.bits & mask(self.width),
        }
    }

    fn same_width(&self, other: &BitString, op: &str) -> Result<()> {
        if self.width != other.width {
            return Err(BitsError::Precondition(format!(
                "{op} of {}-bit and {}-bit strings",
                self.width, other.width
            )));
        }
        Ok(())
    }

    pub fn and(&self, other: &BitString) -> Result<Self> {
        self.same_width(other, "AND")?;
        Ok(Self {
            width: self.width,
            bits: self.bits & other.bits,
        })
    }

    pub fn or(&self, other: &BitString) -> Result<Self> {
        self.same_width(other, "OR")?;
        Ok(Self {
            width: self.width,
            bits: self.bits | other.bits,
        })
    }

    pub fn xor(&self, other: &BitString) -> Result<Self> {
        self.same_width(other, "XOR")?;
        Ok(Self {
            width: self.width,
            bits: self.bits ^ other.bits,
        })
    }

    /// Left shift within a widened result: `b << k` has width `width + k`.
    pub fn shl(&self, k: u32) -> Result<Self> {
        self.concat(&Self::zeros(k)?)
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    /// Parses MSb-first text such as `"00000101"`.
    fn from_str(s: &str) -> Result<Self> {
        let width = s.chars().count() as u32;
        check_width(width)?;
        let mut bits = 0u64;
        for c in s.chars() {
            bits = bits << 1
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(BitsError::InvalidDigit(other)),
                };
        }
        Ok(Self { width, bits })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.width).rev() {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString<{}>({})", self.width, self)
    }
}
