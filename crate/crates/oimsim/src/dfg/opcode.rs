//! Operation vocabulary shared by the front end, the graph passes, the
//! tensor layout and the kernels.
//!
//! Tag numbers are part of the serialized tensor format and must stay stable.

use crate::kernel::bitvec::MAX_WIDTH;
use serde::{Deserialize, Serialize};

/// One tag per supported FIRRTL primitive, plus `Mux` and the fused
/// `MuxChain`, which only graph optimization creates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Opcode {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    And,
    Or,
    Xor,
    Eq,
    Neq,
    Lt,
    Leq,
    Gt,
    Geq,
    Dshl,
    Dshr,
    Cat,
    Not,
    Neg,
    Shl,
    Shr,
    Bits,
    Head,
    Tail,
    Pad,
    AsUInt,
    AsSInt,
    Cvt,
    Mux,
    MuxChain,
}

pub const NUM_OPCODES: usize = 30;

pub const ALL_OPCODES: [Opcode; NUM_OPCODES] = [
    Opcode::Add,
    Opcode::Sub,
    Opcode::Mul,
    Opcode::Div,
    Opcode::Rem,
    Opcode::And,
    Opcode::Or,
    Opcode::Xor,
    Opcode::Eq,
    Opcode::Neq,
    Opcode::Lt,
    Opcode::Leq,
    Opcode::Gt,
    Opcode::Geq,
    Opcode::Dshl,
    Opcode::Dshr,
    Opcode::Cat,
    Opcode::Not,
    Opcode::Neg,
    Opcode::Shl,
    Opcode::Shr,
    Opcode::Bits,
    Opcode::Head,
    Opcode::Tail,
    Opcode::Pad,
    Opcode::AsUInt,
    Opcode::AsSInt,
    Opcode::Cvt,
    Opcode::Mux,
    Opcode::MuxChain,
];

impl Opcode {
    #[inline]
    pub fn tag(self) -> u32 {
        self as u32
    }

    pub fn from_tag(tag: u32) -> Option<Opcode> {
        ALL_OPCODES.get(tag as usize).copied()
    }

    /// FIRRTL spelling, used by the parser, the printer and diagnostics.
    pub fn name(self) -> &'static str {
        match self {
            Opcode::Add => "add",
            Opcode::Sub => "sub",
            Opcode::Mul => "mul",
            Opcode::Div => "div",
            Opcode::Rem => "rem",
            Opcode::And => "and",
            Opcode::Or => "or",
            Opcode::Xor => "xor",
            Opcode::Eq => "eq",
            Opcode::Neq => "neq",
            Opcode::Lt => "lt",
            Opcode::Leq => "leq",
            Opcode::Gt => "gt",
            Opcode::Geq => "geq",
            Opcode::Dshl => "dshl",
            Opcode::Dshr => "dshr",
            Opcode::Cat => "cat",
            Opcode::Not => "not",
            Opcode::Neg => "neg",
            Opcode::Shl => "shl",
            Opcode::Shr => "shr",
            Opcode::Bits => "bits",
            Opcode::Head => "head",
            Opcode::Tail => "tail",
            Opcode::Pad => "pad",
            Opcode::AsUInt => "asUInt",
            Opcode::AsSInt => "asSInt",
            Opcode::Cvt => "cvt",
            Opcode::Mux => "mux",
            Opcode::MuxChain => "muxchain",
        }
    }

    pub fn from_name(name: &str) -> Option<Opcode> {
        ALL_OPCODES.iter().copied().find(|op| op.name() == name)
    }

    /// Number of data operands, `None` for the variadic `MuxChain`.
    pub fn fixed_arity(self) -> Option<usize> {
        match self {
            Opcode::MuxChain => None,
            Opcode::Mux => Some(3),
            op if op.is_unary() => Some(1),
            _ => Some(2),
        }
    }

    /// Arity with the static-parameter sidecar available; `MuxChain` stores
    /// its pair count as its single parameter.
    pub fn arity_with_params(self, params: &[u32]) -> usize {
        match self.fixed_arity() {
            Some(n) => n,
            None => 2 * params[0] as usize + 1,
        }
    }

    /// Number of static parameters carried on the node rather than as data
    /// operands (bit positions, pad amounts, shift constants, chain length).
    pub fn param_count(self) -> usize {
        match self {
            Opcode::Shl | Opcode::Shr | Opcode::Head | Opcode::Tail | Opcode::Pad => 1,
            Opcode::Bits => 2,
            Opcode::MuxChain => 1,
            _ => 0,
        }
    }

    /// Select operations consume their whole operand fiber at once instead of
    /// being folded pairwise.
    #[inline]
    pub fn is_select(self) -> bool {
        matches!(self, Opcode::Mux | Opcode::MuxChain)
    }

    #[inline]
    pub fn is_unary(self) -> bool {
        matches!(
            self,
            Opcode::Not
                | Opcode::Neg
                | Opcode::Shl
                | Opcode::Shr
                | Opcode::Bits
                | Opcode::Head
                | Opcode::Tail
                | Opcode::Pad
                | Opcode::AsUInt
                | Opcode::AsSInt
                | Opcode::Cvt
        )
    }

    #[inline]
    pub fn is_binary(self) -> bool {
        self.fixed_arity() == Some(2)
    }

    /// Result width and signedness for the given operand types, following the
    /// FIRRTL width rules. Also validates operand counts, parameter counts,
    /// signedness agreement and the 128-bit width ceiling.
    pub fn infer_type(
        self,
        operands: &[(u32, bool)],
        params: &[u32],
    ) -> Result<(u32, bool), String> {
        if let Some(n) = self.fixed_arity() {
            if operands.len() != n {
                return Err(format!(
                    "{} expects {} operand(s), got {}",
                    self.name(),
                    n,
                    operands.len()
                ));
            }
        } else if operands.len() < 3 || operands.len() % 2 == 0 {
            return Err(format!(
                "{} expects an odd operand count of at least 3, got {}",
                self.name(),
                operands.len()
            ));
        }
        if params.len() != self.param_count() {
            return Err(format!(
                "{} expects {} parameter(s), got {}",
                self.name(),
                self.param_count(),
                params.len()
            ));
        }

        let same_sign = |a: (u32, bool), b: (u32, bool)| -> Result<(), String> {
            if a.1 != b.1 {
                Err(format!(
                    "{} requires operands of the same signedness",
                    self.name()
                ))
            } else {
                Ok(())
            }
        };

        let ty = match self {
            Opcode::Add | Opcode::Sub => {
                same_sign(operands[0], operands[1])?;
                (operands[0].0.max(operands[1].0) + 1, operands[0].1)
            }
            Opcode::Mul => {
                same_sign(operands[0], operands[1])?;
                (operands[0].0 + operands[1].0, operands[0].1)
            }
            Opcode::Div => {
                same_sign(operands[0], operands[1])?;
                let (w, s) = operands[0];
                (if s { w + 1 } else { w }, s)
            }
            Opcode::Rem => {
                same_sign(operands[0], operands[1])?;
                (operands[0].0.min(operands[1].0), operands[0].1)
            }
            Opcode::And | Opcode::Or | Opcode::Xor => {
                same_sign(operands[0], operands[1])?;
                (operands[0].0.max(operands[1].0), false)
            }
            Opcode::Eq | Opcode::Neq | Opcode::Lt | Opcode::Leq | Opcode::Gt | Opcode::Geq => {
                same_sign(operands[0], operands[1])?;
                (1, false)
            }
            Opcode::Dshl => {
                let (w, s) = operands[0];
                let (sw, ss) = operands[1];
                if ss {
                    return Err("dshl shift amount must be unsigned".into());
                }
                // 2^sw - 1 extra bits; anything with sw >= 8 blows the ceiling.
                if sw >= 8 {
                    return Err(format!(
                        "dshl result width {} + 2^{} - 1 exceeds {}",
                        w, sw, MAX_WIDTH
                    ));
                }
                (w + (1u32 << sw) - 1, s)
            }
            Opcode::Dshr => {
                if operands[1].1 {
                    return Err("dshr shift amount must be unsigned".into());
                }
                operands[0]
            }
            Opcode::Cat => (operands[0].0 + operands[1].0, false),
            Opcode::Not => (operands[0].0, false),
            Opcode::Neg => (operands[0].0 + 1, true),
            Opcode::Shl => (operands[0].0 + params[0], operands[0].1),
            Opcode::Shr => (operands[0].0.saturating_sub(params[0]).max(1), operands[0].1),
            Opcode::Bits => {
                let (w, _) = operands[0];
                let (hi, lo) = (params[0], params[1]);
                if lo > hi || hi >= w {
                    return Err(format!(
                        "bits({}, {}) out of range for width {}",
                        hi, lo, w
                    ));
                }
                (hi - lo + 1, false)
            }
            Opcode::Head => {
                let (w, _) = operands[0];
                let n = params[0];
                if n < 1 || n > w {
                    return Err(format!("head({}) out of range for width {}", n, w));
                }
                (n, false)
            }
            Opcode::Tail => {
                let (w, _) = operands[0];
                let n = params[0];
                if n >= w {
                    return Err(format!("tail({}) out of range for width {}", n, w));
                }
                (w - n, false)
            }
            Opcode::Pad => (operands[0].0.max(params[0]), operands[0].1),
            Opcode::AsUInt => (operands[0].0, false),
            Opcode::AsSInt => (operands[0].0, true),
            Opcode::Cvt => {
                let (w, s) = operands[0];
                (if s { w } else { w + 1 }, true)
            }
            Opcode::Mux => {
                let sel = operands[0];
                if sel.1 || sel.0 != 1 {
                    return Err("mux selector must be UInt<1>".into());
                }
                same_sign(operands[1], operands[2])?;
                (operands[1].0.max(operands[2].0), operands[1].1)
            }
            Opcode::MuxChain => {
                let pairs = params[0] as usize;
                if operands.len() != 2 * pairs + 1 {
                    return Err(format!(
                        "muxchain with {} pairs expects {} operands, got {}",
                        pairs,
                        2 * pairs + 1,
                        operands.len()
                    ));
                }
                let mut width = 0u32;
                let sign = operands[1].1;
                for i in 0..pairs {
                    let sel = operands[2 * i];
                    if sel.1 || sel.0 != 1 {
                        return Err("muxchain selector must be UInt<1>".into());
                    }
                    let val = operands[2 * i + 1];
                    if val.1 != sign {
                        return Err("muxchain values must share signedness".into());
                    }
                    width = width.max(val.0);
                }
                let dflt = operands[operands.len() - 1];
                if dflt.1 != sign {
                    return Err("muxchain values must share signedness".into());
                }
                (width.max(dflt.0), sign)
            }
        };

        if ty.0 > MAX_WIDTH {
            return Err(format!(
                "{} result width {} exceeds the {}-bit limit",
                self.name(),
                ty.0,
                MAX_WIDTH
            ));
        }
        Ok(ty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_are_stable() {
        // Frozen: these numbers appear in serialized tensors.
        assert_eq!(Opcode::Add.tag(), 0);
        assert_eq!(Opcode::Geq.tag(), 13);
        assert_eq!(Opcode::Cat.tag(), 16);
        assert_eq!(Opcode::Cvt.tag(), 27);
        assert_eq!(Opcode::Mux.tag(), 28);
        assert_eq!(Opcode::MuxChain.tag(), 29);
        for (i, op) in ALL_OPCODES.iter().enumerate() {
            assert_eq!(Opcode::from_tag(i as u32), Some(*op));
        }
        assert_eq!(Opcode::from_tag(NUM_OPCODES as u32), None);
    }

    #[test]
    fn firrtl_width_rules() {
        let u = |w| (w, false);
        let s = |w| (w, true);
        assert_eq!(Opcode::Add.infer_type(&[u(8), u(4)], &[]), Ok((9, false)));
        assert_eq!(Opcode::Sub.infer_type(&[s(4), s(4)], &[]), Ok((5, true)));
        assert_eq!(Opcode::Mul.infer_type(&[u(8), u(3)], &[]), Ok((11, false)));
        assert_eq!(Opcode::Div.infer_type(&[s(8), s(4)], &[]), Ok((9, true)));
        assert_eq!(Opcode::Div.infer_type(&[u(8), u(4)], &[]), Ok((8, false)));
        assert_eq!(Opcode::Rem.infer_type(&[u(8), u(4)], &[]), Ok((4, false)));
        assert_eq!(Opcode::And.infer_type(&[s(8), s(4)], &[]), Ok((8, false)));
        assert_eq!(Opcode::Lt.infer_type(&[u(8), u(4)], &[]), Ok((1, false)));
        assert_eq!(Opcode::Dshl.infer_type(&[u(8), u(3)], &[]), Ok((15, false)));
        assert_eq!(Opcode::Dshr.infer_type(&[s(8), u(3)], &[]), Ok((8, true)));
        assert_eq!(Opcode::Cat.infer_type(&[s(8), u(4)], &[]), Ok((12, false)));
        assert_eq!(Opcode::Not.infer_type(&[s(8)], &[]), Ok((8, false)));
        assert_eq!(Opcode::Neg.infer_type(&[u(8)], &[]), Ok((9, true)));
        assert_eq!(Opcode::Shl.infer_type(&[s(8)], &[3]), Ok((11, true)));
        assert_eq!(Opcode::Shr.infer_type(&[u(8)], &[12]), Ok((1, false)));
        assert_eq!(Opcode::Bits.infer_type(&[u(8)], &[7, 4]), Ok((4, false)));
        assert_eq!(Opcode::Head.infer_type(&[u(8)], &[2]), Ok((2, false)));
        assert_eq!(Opcode::Tail.infer_type(&[u(9)], &[1]), Ok((8, false)));
        assert_eq!(Opcode::Pad.infer_type(&[s(4)], &[8]), Ok((8, true)));
        assert_eq!(Opcode::Pad.infer_type(&[s(8)], &[4]), Ok((8, true)));
        assert_eq!(Opcode::Cvt.infer_type(&[u(8)], &[]), Ok((9, true)));
        assert_eq!(Opcode::Cvt.infer_type(&[s(8)], &[]), Ok((8, true)));
        assert_eq!(
            Opcode::Mux.infer_type(&[u(1), s(8), s(4)], &[]),
            Ok((8, true))
        );
    }

    #[test]
    fn width_rule_errors() {
        assert!(Opcode::Add.infer_type(&[(8, false), (8, true)], &[]).is_err());
        assert!(Opcode::Add.infer_type(&[(128, false), (8, false)], &[]).is_err());
        assert!(Opcode::Bits.infer_type(&[(8, false)], &[8, 0]).is_err());
        assert!(Opcode::Bits.infer_type(&[(8, false)], &[2, 3]).is_err());
        assert!(Opcode::Tail.infer_type(&[(8, false)], &[8]).is_err());
        assert!(Opcode::Head.infer_type(&[(8, false)], &[0]).is_err());
        assert!(Opcode::Mux.infer_type(&[(2, false), (8, false), (8, false)], &[]).is_err());
        assert!(Opcode::Dshl.infer_type(&[(8, false), (8, false)], &[]).is_err());
        assert!(Opcode::Dshl.infer_type(&[(8, false), (3, true)], &[]).is_err());
    }
}
