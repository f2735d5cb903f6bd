//! Fixed-width two's-complement values, 1 to 128 bits.

use std::fmt;

/// Widest supported signal. Wider declarations are rejected by the front end,
/// which keeps every intermediate of every operator within `u128`/`i128`.
pub const MAX_WIDTH: u32 = 128;

/// Bit mask covering the low `width` bits.
#[inline]
pub fn mask(width: u32) -> u128 {
    debug_assert!(width >= 1 && width <= MAX_WIDTH);
    if width == MAX_WIDTH {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

/// A signal value: `width` payload bits plus a signedness flag that selects
/// the interpretation (zero- vs sign-extension) when the value feeds an
/// operator. The payload is always kept masked to `width` bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVec {
    value: u128,
    width: u32,
    signed: bool,
}

impl BitVec {
    pub fn new(value: u128, width: u32, signed: bool) -> Self {
        BitVec {
            value: value & mask(width),
            width,
            signed,
        }
    }

    pub fn zero(width: u32, signed: bool) -> Self {
        BitVec {
            value: 0,
            width,
            signed,
        }
    }

    /// Raw payload bits (always `< 2^width`).
    #[inline]
    pub fn value(&self) -> u128 {
        self.value
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn is_signed(&self) -> bool {
        self.signed
    }

    /// Payload extended to the full 128 bits: sign-extended for signed
    /// values, zero-extended otherwise. Two's-complement addition,
    /// subtraction and multiplication on these extended patterns followed by
    /// masking yield the exact modular result for either signedness.
    #[inline]
    pub fn extended_bits(&self) -> u128 {
        if self.signed && self.width < MAX_WIDTH && (self.value >> (self.width - 1)) & 1 == 1 {
            self.value | !mask(self.width)
        } else {
            self.value
        }
    }

    /// Numeric interpretation as a signed integer.
    #[inline]
    pub fn to_i128(&self) -> i128 {
        self.extended_bits() as i128
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.signed {
            write!(f, "SInt<{}>({})", self.width, self.to_i128())
        } else {
            write!(f, "UInt<{}>({})", self.width, self.value)
        }
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.signed {
            write!(f, "{}", self.to_i128())
        } else {
            write!(f, "{}", self.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_on_construction() {
        let v = BitVec::new(0x1ff, 8, false);
        assert_eq!(v.value(), 0xff);
    }

    #[test]
    fn sign_extension() {
        // 4-bit 0b1101 = -3
        let v = BitVec::new(0b1101, 4, true);
        assert_eq!(v.to_i128(), -3);
        assert_eq!(v.extended_bits(), (-3i128) as u128);
        let u = BitVec::new(0b1101, 4, false);
        assert_eq!(u.to_i128(), 13);
    }

    #[test]
    fn full_width() {
        let v = BitVec::new(u128::MAX, 128, true);
        assert_eq!(v.to_i128(), -1);
        assert_eq!(mask(128), u128::MAX);
        assert_eq!(mask(1), 1);
    }
}
