//! Scalar operator semantics shared by every kernel level and the oracle.
//!
//! Operation types fall into three classes: reducible (binary) operations are
//! folded pairwise in operand order, unary operations are applied by the map
//! operator, and select operations consume the whole operand list at once.

use super::bitvec::BitVec;
use super::KernelError;
use crate::dfg::Opcode;

/// Unary map operator: computes unary opcodes, passes everything else through
/// unchanged.
#[inline]
pub fn op_u(op: Opcode, v: BitVec, params: &[u32], out_width: u32, out_signed: bool) -> BitVec {
    if op.is_unary() {
        unary_value(op, v, params, out_width, out_signed)
    } else {
        v
    }
}

/// Pairwise reduce operator: combines the running value with the next map
/// temporary for reducible opcodes, takes the right (newest) value otherwise.
#[inline]
pub fn op_r(op: Opcode, acc: BitVec, v: BitVec, out_width: u32, out_signed: bool) -> BitVec {
    if op.is_binary() {
        binary_value(op, acc, v, out_width, out_signed)
    } else {
        v
    }
}

/// Select operator acting on the full operand fiber.
#[inline]
pub fn op_s(
    op: Opcode,
    operands: &[BitVec],
    out_width: u32,
    out_signed: bool,
) -> BitVec {
    select_value(op, operands, out_width, out_signed)
}

/// Evaluate one operation. `operands` must match the opcode's arity (for
/// `MuxChain`, the chain length recorded in `params`). The result is masked
/// to `out_width`.
pub fn apply_op(
    op: Opcode,
    operands: &[BitVec],
    params: &[u32],
    out_width: u32,
    out_signed: bool,
) -> Result<BitVec, KernelError> {
    let expect = op.arity_with_params(params);
    if operands.len() != expect {
        return Err(KernelError::ArityMismatch {
            opcode: op.name(),
            expected: expect,
            got: operands.len(),
        });
    }
    Ok(match op {
        op if op.is_unary() => unary_value(op, operands[0], params, out_width, out_signed),
        op if op.is_select() => select_value(op, operands, out_width, out_signed),
        op => binary_value(op, operands[0], operands[1], out_width, out_signed),
    })
}

/// Zero/sign-extend `v` per its own signedness and mask to the result width.
#[inline]
fn resize(v: BitVec, out_width: u32, out_signed: bool) -> BitVec {
    BitVec::new(v.extended_bits(), out_width, out_signed)
}

pub fn unary_value(
    op: Opcode,
    a: BitVec,
    params: &[u32],
    out_width: u32,
    out_signed: bool,
) -> BitVec {
    let bits = match op {
        Opcode::Not => !a.value(),
        Opcode::Neg => (-a.to_i128()) as u128,
        // Result width is operand width + shift amount, so shifting the raw
        // extended pattern loses nothing.
        Opcode::Shl => {
            let n = params[0].min(127);
            a.extended_bits() << n
        }
        Opcode::Shr => {
            let n = params[0].min(127) as i32;
            (a.to_i128() >> n) as u128
        }
        Opcode::Bits => a.value() >> params[1].min(127),
        Opcode::Head => a.value() >> (a.width() - params[0]),
        Opcode::Tail => a.value(),
        Opcode::Pad | Opcode::AsUInt | Opcode::AsSInt | Opcode::Cvt => a.extended_bits(),
        _ => unreachable!("not a unary opcode: {:?}", op),
    };
    BitVec::new(bits, out_width, out_signed)
}

pub fn binary_value(
    op: Opcode,
    a: BitVec,
    b: BitVec,
    out_width: u32,
    out_signed: bool,
) -> BitVec {
    let bits = match op {
        Opcode::Add => a.extended_bits().wrapping_add(b.extended_bits()),
        Opcode::Sub => a.extended_bits().wrapping_sub(b.extended_bits()),
        Opcode::Mul => a.extended_bits().wrapping_mul(b.extended_bits()),
        // Division and remainder by zero yield 0.
        Opcode::Div => {
            if b.value() == 0 {
                0
            } else if a.is_signed() {
                (a.to_i128() / b.to_i128()) as u128
            } else {
                a.value() / b.value()
            }
        }
        Opcode::Rem => {
            if b.value() == 0 {
                0
            } else if a.is_signed() {
                (a.to_i128() % b.to_i128()) as u128
            } else {
                a.value() % b.value()
            }
        }
        Opcode::And => a.extended_bits() & b.extended_bits(),
        Opcode::Or => a.extended_bits() | b.extended_bits(),
        Opcode::Xor => a.extended_bits() ^ b.extended_bits(),
        Opcode::Eq => (a.extended_bits() == b.extended_bits()) as u128,
        Opcode::Neq => (a.extended_bits() != b.extended_bits()) as u128,
        Opcode::Lt => cmp(a, b, |o| o.is_lt()) as u128,
        Opcode::Leq => cmp(a, b, |o| o.is_le()) as u128,
        Opcode::Gt => cmp(a, b, |o| o.is_gt()) as u128,
        Opcode::Geq => cmp(a, b, |o| o.is_ge()) as u128,
        Opcode::Dshl => a.extended_bits() << b.value().min(127) as u32,
        Opcode::Dshr => {
            let n = b.value().min(127) as i32;
            if a.is_signed() {
                (a.to_i128() >> n) as u128
            } else {
                a.value() >> n
            }
        }
        Opcode::Cat => (a.value() << b.width()) | b.value(),
        _ => unreachable!("not a binary opcode: {:?}", op),
    };
    BitVec::new(bits, out_width, out_signed)
}

#[inline]
fn cmp(a: BitVec, b: BitVec, f: impl Fn(std::cmp::Ordering) -> bool) -> bool {
    if a.is_signed() {
        f(a.to_i128().cmp(&b.to_i128()))
    } else {
        f(a.value().cmp(&b.value()))
    }
}

/// Select class: mux reads operand 0 as the selector and picks operand 1
/// (nonzero) or operand 2 (zero); a mux chain scans its (selector, value)
/// pairs in operand order and takes the first value whose selector is
/// nonzero, falling back to the trailing default.
pub fn select_value(op: Opcode, operands: &[BitVec], out_width: u32, out_signed: bool) -> BitVec {
    let chosen = match op {
        Opcode::Mux => {
            if operands[0].value() != 0 {
                operands[1]
            } else {
                operands[2]
            }
        }
        Opcode::MuxChain => {
            let pairs = (operands.len() - 1) / 2;
            let mut chosen = operands[operands.len() - 1];
            for i in 0..pairs {
                if operands[2 * i].value() != 0 {
                    chosen = operands[2 * i + 1];
                    break;
                }
            }
            chosen
        }
        _ => unreachable!("not a select opcode: {:?}", op),
    };
    resize(chosen, out_width, out_signed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(v: u128, w: u32) -> BitVec {
        BitVec::new(v, w, false)
    }

    fn s(v: i128, w: u32) -> BitVec {
        BitVec::new(v as u128, w, true)
    }

    #[test]
    fn mul_of_one_and_four_is_four() {
        let r = apply_op(Opcode::Mul, &[u(1, 4), u(4, 4)], &[], 8, false).unwrap();
        assert_eq!(r.value(), 4);
    }

    #[test]
    fn mux_takes_high_on_one() {
        let r = apply_op(Opcode::Mux, &[u(1, 1), u(7, 4), u(2, 4)], &[], 4, false).unwrap();
        assert_eq!(r.value(), 7);
        let r = apply_op(Opcode::Mux, &[u(0, 1), u(7, 4), u(2, 4)], &[], 4, false).unwrap();
        assert_eq!(r.value(), 2);
    }

    #[test]
    fn sub_wraps_two_complement() {
        // 2 - 5 at width 4 = -3 mod 16 = 13
        let r = apply_op(Opcode::Sub, &[u(2, 4), u(5, 4)], &[], 4, false).unwrap();
        assert_eq!(r.value(), 13);
    }

    #[test]
    fn muxchain_first_match() {
        // Hand-evaluated nesting: mux(s0=0, v0=9, mux(s1=1, v1=5, default=3)) = 5.
        let ops = [u(0, 1), u(9, 4), u(1, 1), u(5, 4), u(3, 4)];
        let r = apply_op(Opcode::MuxChain, &ops, &[2], 4, false).unwrap();
        assert_eq!(r.value(), 5);
        // No selector fires: default.
        let ops = [u(0, 1), u(9, 4), u(0, 1), u(5, 4), u(3, 4)];
        let r = apply_op(Opcode::MuxChain, &ops, &[2], 4, false).unwrap();
        assert_eq!(r.value(), 3);
    }

    #[test]
    fn division_by_zero_is_zero() {
        let r = apply_op(Opcode::Div, &[u(9, 4), u(0, 4)], &[], 4, false).unwrap();
        assert_eq!(r.value(), 0);
        let r = apply_op(Opcode::Rem, &[s(-7, 4), s(0, 4)], &[], 4, true).unwrap();
        assert_eq!(r.value(), 0);
    }

    #[test]
    fn signed_arithmetic() {
        // -3 * 5 at out width 8 (4+4): -15
        let r = apply_op(Opcode::Mul, &[s(-3, 4), s(5, 4)], &[], 8, true).unwrap();
        assert_eq!(r.to_i128(), -15);
        // -7 / 2 truncates toward zero: -3
        let r = apply_op(Opcode::Div, &[s(-7, 4), s(2, 4)], &[], 5, true).unwrap();
        assert_eq!(r.to_i128(), -3);
        // -7 % 2 keeps the dividend sign: -1
        let r = apply_op(Opcode::Rem, &[s(-7, 4), s(2, 4)], &[], 2, true).unwrap();
        assert_eq!(r.to_i128(), -1);
        // lt is a signed compare: -3 < 2
        let r = apply_op(Opcode::Lt, &[s(-3, 4), s(2, 4)], &[], 1, false).unwrap();
        assert_eq!(r.value(), 1);
    }

    #[test]
    fn shifts_and_bit_ops() {
        let r = apply_op(Opcode::Shl, &[s(-2, 3)], &[2], 5, true).unwrap();
        assert_eq!(r.to_i128(), -8);
        let r = apply_op(Opcode::Shr, &[s(-8, 5)], &[2], 3, true).unwrap();
        assert_eq!(r.to_i128(), -2);
        // shr past the width clamps to a 1-bit result: sign bit for SInt.
        let r = apply_op(Opcode::Shr, &[s(-8, 5)], &[9], 1, true).unwrap();
        assert_eq!(r.to_i128(), -1);
        let r = apply_op(Opcode::Bits, &[u(0b1101_0110, 8)], &[5, 2], 4, false).unwrap();
        assert_eq!(r.value(), 0b0101);
        let r = apply_op(Opcode::Head, &[u(0b1101_0110, 8)], &[3], 3, false).unwrap();
        assert_eq!(r.value(), 0b110);
        let r = apply_op(Opcode::Tail, &[u(0b1101_0110, 8)], &[3], 5, false).unwrap();
        assert_eq!(r.value(), 0b10110);
        let r = apply_op(Opcode::Cat, &[u(0b101, 3), u(0b01, 2)], &[], 5, false).unwrap();
        assert_eq!(r.value(), 0b10101);
        // dshl sign-extends before shifting: SInt<2>(-1) << 0 at width 3 is -1.
        let r = apply_op(Opcode::Dshl, &[s(-1, 2), u(0, 1)], &[], 3, true).unwrap();
        assert_eq!(r.to_i128(), -1);
        let r = apply_op(Opcode::Dshl, &[s(-1, 2), u(1, 1)], &[], 3, true).unwrap();
        assert_eq!(r.to_i128(), -2);
        // dshr by amounts beyond the width drains to zero / sign.
        let r = apply_op(Opcode::Dshr, &[u(0xff, 8), u(200, 8)], &[], 8, false).unwrap();
        assert_eq!(r.value(), 0);
    }

    #[test]
    fn pad_and_casts() {
        let r = apply_op(Opcode::Pad, &[s(-3, 4)], &[8], 8, true).unwrap();
        assert_eq!(r.to_i128(), -3);
        assert_eq!(r.value(), 0xfd);
        let r = apply_op(Opcode::AsUInt, &[s(-3, 4)], &[], 4, false).unwrap();
        assert_eq!(r.value(), 13);
        let r = apply_op(Opcode::AsSInt, &[u(13, 4)], &[], 4, true).unwrap();
        assert_eq!(r.to_i128(), -3);
        let r = apply_op(Opcode::Cvt, &[u(13, 4)], &[], 5, true).unwrap();
        assert_eq!(r.to_i128(), 13);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        assert!(apply_op(Opcode::Add, &[u(1, 4)], &[], 5, false).is_err());
        assert!(apply_op(Opcode::Mux, &[u(1, 1), u(1, 4)], &[], 4, false).is_err());
    }
}
