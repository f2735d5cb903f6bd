//! Flat value-slot assignment. Sources and node outputs share one dense slot
//! space; consumers reference producer slots directly across any layer gap,
//! so no pass-through copies are ever materialized.

use super::graph::{SourceKind, ValueRef};
use super::levelize::LayeredGraph;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegSlots {
    pub name: String,
    /// Slot holding the committed register value during a cycle.
    pub current: u32,
    /// Slot whose end-of-cycle value becomes the next register value.
    pub next: u32,
    /// Slot of the synchronous reset signal, if any.
    pub reset: Option<u32>,
    pub init: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotAssignment {
    pub num_slots: usize,
    /// Slot per graph source, indexed by source id.
    pub source_slot: Vec<u32>,
    /// Slot per graph node, indexed by node id.
    pub node_slot: Vec<u32>,
    /// Width and signedness per slot.
    pub widths: Vec<u32>,
    pub signs: Vec<bool>,
    pub registers: Vec<RegSlots>,
    pub constants: Vec<(u32, u128)>,
    pub inputs: Vec<(String, u32)>,
    pub outputs: Vec<(String, u32)>,
    /// Named signals observable for waveforms, mapped to their slots.
    pub observed: Vec<(String, u32)>,
}

impl SlotAssignment {
    pub fn slot_of(&self, r: ValueRef) -> u32 {
        match r {
            ValueRef::Source(s) => self.source_slot[s],
            ValueRef::Node(n) => self.node_slot[n],
        }
    }
}

/// Assign one slot to every source and every node, in (sources, then layer
/// order) sequence.
pub fn assign_slots(lg: &LayeredGraph) -> SlotAssignment {
    let g = &lg.graph;
    let mut widths = Vec::new();
    let mut signs = Vec::new();
    let mut next_slot = 0u32;
    let mut take = |w: u32, s: bool| -> u32 {
        let slot = next_slot;
        next_slot += 1;
        widths.push(w);
        signs.push(s);
        slot
    };

    let mut source_slot = Vec::with_capacity(g.sources.len());
    let mut constants = Vec::new();
    for src in &g.sources {
        let slot = take(src.width, src.signed);
        if let SourceKind::Constant(v) = src.kind {
            constants.push((slot, v));
        }
        source_slot.push(slot);
    }

    let mut node_slot = vec![0u32; g.nodes.len()];
    for layer in &lg.layers {
        for &id in layer {
            node_slot[id] = take(g.nodes[id].width, g.nodes[id].signed);
        }
    }

    let slot_of = |r: ValueRef| -> u32 {
        match r {
            ValueRef::Source(s) => source_slot[s],
            ValueRef::Node(n) => node_slot[n],
        }
    };

    let registers = g
        .registers
        .iter()
        .map(|reg| RegSlots {
            name: g.sources[reg.source].name.clone(),
            current: source_slot[reg.source],
            next: slot_of(reg.next),
            reset: reg.reset.map(slot_of),
            init: reg.init,
        })
        .collect();

    SlotAssignment {
        num_slots: next_slot as usize,
        widths,
        signs,
        registers,
        constants,
        inputs: g
            .inputs
            .iter()
            .map(|(n, s)| (n.clone(), source_slot[*s]))
            .collect(),
        outputs: g
            .outputs
            .iter()
            .map(|(n, r)| (n.clone(), slot_of(*r)))
            .collect(),
        observed: g
            .observed
            .iter()
            .map(|(n, r)| (n.clone(), slot_of(*r)))
            .collect(),
        source_slot,
        node_slot,
    }
}

/// How many pass-through copies a strict layer-to-layer construction would
/// need for this graph: every value must be re-materialized in each layer
/// between its producer and its furthest consumer (sinks consume after the
/// last layer). Shared slots make all of them unnecessary.
pub fn naive_identity_count(lg: &LayeredGraph) -> u64 {
    let g = &lg.graph;
    let depth = lg.depth() as i64;

    // Furthest consumer layer per producer; -1 marks "unconsumed".
    let mut max_source_use = vec![-1i64; g.sources.len()];
    let mut max_node_use = vec![-1i64; g.nodes.len()];
    for layer in 0..lg.layers.len() {
        for &id in &lg.layers[layer] {
            for &op in &g.nodes[id].operands {
                match op {
                    ValueRef::Source(s) => {
                        max_source_use[s] = max_source_use[s].max(layer as i64)
                    }
                    ValueRef::Node(p) => max_node_use[p] = max_node_use[p].max(layer as i64),
                }
            }
        }
    }
    for r in g.sink_refs() {
        match r {
            ValueRef::Source(s) => max_source_use[s] = max_source_use[s].max(depth),
            ValueRef::Node(p) => max_node_use[p] = max_node_use[p].max(depth),
        }
    }

    let mut copies = 0i64;
    for &max_use in &max_source_use {
        // Sources live one layer before layer 0.
        copies += max_use.max(0);
    }
    for (id, &max_use) in max_node_use.iter().enumerate() {
        if max_use >= 0 {
            copies += (max_use - lg.layer_of(id) as i64 - 1).max(0);
        }
    }
    copies as u64
}
