//! In-memory tensor representation and validation.
//!
//! Two concrete layouts are supported. Format B keeps rank order
//! [I, S, N, O, R]: an uncompressed I rank whose payloads count the
//! operations per layer, compressed coordinate-only S (output slot), N
//! (opcode) and R (operand slot) ranks, and an implicit O rank. Format C
//! swizzles to [I, N, S, O, R]: the N rank becomes uncompressed over
//! layers x opcodes with payloads counting the operations per (layer,
//! opcode) group, which also makes the I payloads redundant. The one-hot N
//! and R fibers never need payloads, and S never needs them because the
//! opcode determines each operation's operand count — except for the fused
//! variadic mux chain, whose chain length lives in the static-parameter
//! sidecar.

use super::OimError;
use crate::dfg::{Opcode, NUM_OPCODES};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OimFormat {
    B,
    C,
}

impl OimFormat {
    pub fn letter(self) -> char {
        match self {
            OimFormat::B => 'B',
            OimFormat::C => 'C',
        }
    }
}

/// Per-rank storage description. An uncompressed rank encodes coordinates
/// implicitly by array position (`cbits` = 0); a zero `pbits` means the rank
/// carries no payload array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankDescriptor {
    pub name: String,
    pub compressed: bool,
    pub cbits: u32,
    pub pbits: u32,
}

/// Smallest machine width in {8, 16, 32, 64} that can hold `max`.
pub fn fit_bits(max: u64) -> u32 {
    for bits in [8u32, 16, 32, 64] {
        if bits == 64 || max < (1u64 << bits) {
            return bits;
        }
    }
    unreachable!()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterEntry {
    pub name: String,
    pub current: u32,
    pub next: u32,
    pub reset: Option<u32>,
    pub init: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantEntry {
    pub slot: u32,
    pub value: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IoMap {
    pub inputs: Vec<(String, u32)>,
    pub outputs: Vec<(String, u32)>,
}

impl IoMap {
    pub fn input_slot(&self, name: &str) -> Option<u32> {
        self.inputs.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    pub fn output_slot(&self, name: &str) -> Option<u32> {
        self.outputs.iter().find(|(n, _)| n == name).map(|(_, s)| *s)
    }
}

/// The loaded tensor plus its static sidecars; immutable once built, shared
/// read-only by any number of kernel instances.
#[derive(Debug, Clone, PartialEq)]
pub struct OimTensor {
    pub format: OimFormat,
    pub ranks: Vec<RankDescriptor>,
    pub num_layers: u32,
    pub num_slots: u32,
    pub num_opcodes: u32,

    /// Format B: operations per layer (I-rank payloads).
    pub i_payload: Vec<u32>,
    /// Format B: opcode per operation (N-rank coordinates).
    pub n_coord: Vec<u32>,
    /// Format C: operations per (layer, opcode), row-major over layers.
    pub n_payload: Vec<u32>,
    /// Output slot per operation (S-rank coordinates).
    pub s_coord: Vec<u32>,
    /// Operand slots, flattened in operand order (R-rank coordinates).
    pub r_coord: Vec<u32>,

    /// Static parameters per operation, CSR-style: operation `i` owns
    /// `p_data[p_offset[i]..p_offset[i+1]]`.
    pub p_offset: Vec<u32>,
    pub p_data: Vec<u32>,

    /// Width and signedness per slot.
    pub widths: Vec<u32>,
    pub signs: Vec<bool>,
    pub registers: Vec<RegisterEntry>,
    pub constants: Vec<ConstantEntry>,
    pub io: IoMap,
    pub observed: Vec<(String, u32)>,
}

/// One operation in rank-agnostic form, used to compare layouts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DecodedOp {
    pub layer: u32,
    pub opcode: u32,
    pub out_slot: u32,
    pub operands: Vec<u32>,
    pub params: Vec<u32>,
}

impl OimTensor {
    pub fn total_ops(&self) -> usize {
        self.s_coord.len()
    }

    /// Operation count per layer, independent of format.
    pub fn layer_op_counts(&self) -> Vec<usize> {
        match self.format {
            OimFormat::B => self.i_payload.iter().map(|&c| c as usize).collect(),
            OimFormat::C => (0..self.num_layers as usize)
                .map(|i| {
                    self.n_payload[i * NUM_OPCODES..(i + 1) * NUM_OPCODES]
                        .iter()
                        .map(|&c| c as usize)
                        .sum()
                })
                .collect(),
        }
    }

    pub fn max_layer_ops(&self) -> usize {
        self.layer_op_counts().into_iter().max().unwrap_or(0)
    }

    pub fn params_of(&self, op: usize) -> &[u32] {
        &self.p_data[self.p_offset[op] as usize..self.p_offset[op + 1] as usize]
    }

    /// Per-layer (opcode, group length) lists with empty groups skipped; the
    /// IU kernel's skip lists.
    pub fn layer_groups(&self) -> Vec<Vec<(u32, u32)>> {
        assert_eq!(self.format, OimFormat::C);
        (0..self.num_layers as usize)
            .map(|i| {
                (0..NUM_OPCODES)
                    .filter_map(|t| {
                        let count = self.n_payload[i * NUM_OPCODES + t];
                        (count > 0).then_some((t as u32, count))
                    })
                    .collect()
            })
            .collect()
    }

    /// Arity of operation `op` with opcode tag `tag`.
    fn arity_at(&self, op: usize, tag: u32) -> Result<usize, String> {
        let opcode = Opcode::from_tag(tag).ok_or_else(|| format!("opcode tag {tag} out of range"))?;
        Ok(opcode.arity_with_params(self.params_of(op)))
    }

    /// Flatten back to (layer, opcode, out slot, operands, params) tuples.
    pub fn decode(&self) -> Result<Vec<DecodedOp>, String> {
        let mut ops = Vec::with_capacity(self.total_ops());
        let mut op = 0usize;
        let mut r = 0usize;
        let mut emit = |op: usize, r: &mut usize, layer: u32, tag: u32| -> Result<(), String> {
            let arity = self.arity_at(op, tag)?;
            if *r + arity > self.r_coord.len() {
                return Err("R coordinate array too short".into());
            }
            ops.push(DecodedOp {
                layer,
                opcode: tag,
                out_slot: self.s_coord[op],
                operands: self.r_coord[*r..*r + arity].to_vec(),
                params: self.params_of(op).to_vec(),
            });
            *r += arity;
            Ok(())
        };
        match self.format {
            OimFormat::B => {
                for (layer, &count) in self.i_payload.iter().enumerate() {
                    for _ in 0..count {
                        let tag = self.n_coord[op];
                        emit(op, &mut r, layer as u32, tag)?;
                        op += 1;
                    }
                }
            }
            OimFormat::C => {
                for layer in 0..self.num_layers as usize {
                    for tag in 0..NUM_OPCODES {
                        let count = self.n_payload[layer * NUM_OPCODES + tag];
                        for _ in 0..count {
                            emit(op, &mut r, layer as u32, tag as u32)?;
                            op += 1;
                        }
                    }
                }
            }
        }
        if op != self.total_ops() || r != self.r_coord.len() {
            return Err("rank array lengths inconsistent".into());
        }
        Ok(ops)
    }
}

/// Check every structural invariant; returns human-readable diagnostics
/// (empty means valid).
pub fn validate_oim(t: &OimTensor) -> Vec<String> {
    let mut diags = Vec::new();
    let mut check = |cond: bool, msg: String| {
        if !cond {
            diags.push(msg);
        }
    };

    let total = t.total_ops();
    check(
        t.num_opcodes as usize == NUM_OPCODES,
        format!("num_opcodes is {}, expected {}", t.num_opcodes, NUM_OPCODES),
    );
    check(
        t.widths.len() == t.num_slots as usize,
        format!("widths has {} entries for {} slots", t.widths.len(), t.num_slots),
    );
    check(
        t.signs.len() == t.num_slots as usize,
        format!("signs has {} entries for {} slots", t.signs.len(), t.num_slots),
    );
    for (i, &w) in t.widths.iter().enumerate() {
        check(
            (1..=crate::kernel::MAX_WIDTH).contains(&w),
            format!("slot {i} width {w} out of range"),
        );
    }

    match t.format {
        OimFormat::B => {
            check(
                t.i_payload.len() == t.num_layers as usize,
                format!(
                    "I payload has {} entries for {} layers",
                    t.i_payload.len(),
                    t.num_layers
                ),
            );
            check(t.n_payload.is_empty(), "format B must not carry N payloads".into());
            let sum: u64 = t.i_payload.iter().map(|&c| c as u64).sum();
            check(
                sum == total as u64,
                format!("sum of I payloads {} != S coordinate count {}", sum, total),
            );
            check(
                t.n_coord.len() == total,
                format!("N coordinates {} != operation count {}", t.n_coord.len(), total),
            );
        }
        OimFormat::C => {
            check(
                t.n_payload.len() == t.num_layers as usize * NUM_OPCODES,
                format!(
                    "N payload has {} entries for {} layers x {} opcodes",
                    t.n_payload.len(),
                    t.num_layers,
                    NUM_OPCODES
                ),
            );
            check(t.i_payload.is_empty(), "format C must not carry I payloads".into());
            check(t.n_coord.is_empty(), "format C must not carry N coordinates".into());
            let sum: u64 = t.n_payload.iter().map(|&c| c as u64).sum();
            check(
                sum == total as u64,
                format!("sum of N payloads {} != S coordinate count {}", sum, total),
            );
        }
    }

    check(
        t.p_offset.len() == total + 1,
        format!("P offsets has {} entries for {} operations", t.p_offset.len(), total),
    );
    if t.p_offset.len() == total + 1 {
        check(t.p_offset[0] == 0, "P offsets must start at 0".into());
        check(
            t.p_offset.windows(2).all(|w| w[0] <= w[1]),
            "P offsets must be monotone".into(),
        );
        check(
            *t.p_offset.last().unwrap() as usize == t.p_data.len(),
            "last P offset must equal P data length".into(),
        );
    }

    for (i, &s) in t.s_coord.iter().enumerate() {
        check(s < t.num_slots, format!("S coordinate of op {i} ({s}) >= num_slots"));
    }
    for (i, &r) in t.r_coord.iter().enumerate() {
        check(r < t.num_slots, format!("R coordinate {i} ({r}) >= num_slots"));
    }

    // Decode checks opcode ranges, per-op parameter counts and the closed
    // form len(R) = sum of arities.
    if diags.is_empty() {
        match t.decode() {
            Ok(ops) => {
                for (i, op) in ops.iter().enumerate() {
                    let opcode = Opcode::from_tag(op.opcode).unwrap();
                    check(
                        op.params.len() == opcode.param_count()
                            || (opcode == Opcode::MuxChain && op.params.len() == 1),
                        format!("op {i} has {} params, expected {}", op.params.len(), opcode.param_count()),
                    );
                    if opcode == Opcode::MuxChain {
                        check(
                            op.params.first().map(|&k| k >= 2).unwrap_or(false),
                            format!("op {i} mux chain must have at least 2 links"),
                        );
                    }
                }
            }
            Err(msg) => diags.push(msg),
        }
    }

    // Minimal-width rule for the rank descriptors.
    let expected = expected_descriptors(t);
    check(
        t.ranks == expected,
        format!("rank descriptors {:?} do not match expected {:?}", t.ranks, expected),
    );

    for reg in &t.registers {
        check(
            reg.current < t.num_slots && reg.next < t.num_slots,
            format!("register `{}` slots out of range", reg.name),
        );
        if let Some(r) = reg.reset {
            check(r < t.num_slots, format!("register `{}` reset slot out of range", reg.name));
        }
    }
    for c in &t.constants {
        check(c.slot < t.num_slots, format!("constant slot {} out of range", c.slot));
    }
    for (name, slot) in t.io.inputs.iter().chain(t.io.outputs.iter()) {
        check(*slot < t.num_slots, format!("io `{name}` slot out of range"));
    }
    for (name, slot) in &t.observed {
        check(*slot < t.num_slots, format!("observed `{name}` slot out of range"));
    }

    diags
}

/// The rank descriptors implied by the stored arrays: coordinate and payload
/// widths are the smallest machine width that fits each array's maximum.
pub fn expected_descriptors(t: &OimTensor) -> Vec<RankDescriptor> {
    let max = |v: &[u32]| v.iter().copied().max().unwrap_or(0) as u64;
    let desc = |name: &str, compressed: bool, cbits: u32, pbits: u32| RankDescriptor {
        name: name.to_string(),
        compressed,
        cbits,
        pbits,
    };
    match t.format {
        OimFormat::B => vec![
            desc("I", false, 0, fit_bits(max(&t.i_payload))),
            desc("S", true, fit_bits(max(&t.s_coord)), 0),
            desc("N", true, fit_bits(max(&t.n_coord)), 0),
            desc("O", false, 0, 0),
            desc("R", true, fit_bits(max(&t.r_coord)), 0),
        ],
        OimFormat::C => vec![
            desc("I", false, 0, 0),
            desc("N", false, 0, fit_bits(max(&t.n_payload))),
            desc("S", true, fit_bits(max(&t.s_coord)), 0),
            desc("O", false, 0, 0),
            desc("R", true, fit_bits(max(&t.r_coord)), 0),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_bits_rounds_to_machine_widths() {
        assert_eq!(fit_bits(0), 8);
        assert_eq!(fit_bits(255), 8);
        assert_eq!(fit_bits(256), 16);
        assert_eq!(fit_bits(65535), 16);
        assert_eq!(fit_bits(65536), 32);
        assert_eq!(fit_bits(u32::MAX as u64 + 1), 64);
    }
}
