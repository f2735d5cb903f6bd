//! Graph optimization passes. Each pass is a pure graph-to-graph function;
//! the pipeline order is constant propagation, copy propagation, mux-chain
//! fusion, copy propagation again, then dead code elimination.

use super::graph::{DataflowGraph, Node, Source, SourceKind, ValueRef};
use super::opcode::Opcode;
use super::NodeId;
use crate::kernel::ops::apply_op;
use crate::kernel::BitVec;
use std::collections::HashMap;

/// Run the standard pass pipeline. With `keep_signals` every pass is skipped
/// so that all named signals keep their own value slots for waveform
/// observation. Returns per-pass listings when `dump` is set.
pub fn run_passes(
    graph: DataflowGraph,
    optimize: bool,
    keep_signals: bool,
    dump: bool,
) -> (DataflowGraph, Vec<(String, String)>) {
    let mut dumps = Vec::new();
    if keep_signals || !optimize {
        return (graph, dumps);
    }
    let mut g = graph;
    let passes: [(&str, fn(&DataflowGraph) -> DataflowGraph); 5] = [
        ("constant-propagate", constant_propagate),
        ("copy-propagate", copy_propagate),
        ("fuse-mux-chains", fuse_mux_chains),
        ("copy-propagate", copy_propagate),
        ("dead-code-eliminate", dead_code_eliminate),
    ];
    if dump {
        dumps.push(("input".to_string(), g.render()));
    }
    for (name, pass) in passes {
        g = pass(&g);
        if dump {
            dumps.push((name.to_string(), g.render()));
        }
    }
    (g, dumps)
}

// ---------------------------------------------------------------------------
// Shared rebuild machinery

/// Chase redirects until a kept node or a source is reached. Redirect targets
/// always have smaller node ids, so this terminates.
fn chase(redirect: &[Option<ValueRef>], mut r: ValueRef) -> ValueRef {
    while let ValueRef::Node(id) = r {
        match redirect[id] {
            Some(next) => r = next,
            None => break,
        }
    }
    r
}

/// Rebuild a graph given per-node redirects (node collapsed to another
/// value), replacements (node rewritten in place, operands still in the old
/// id space) and explicit drops (nodes known to have no remaining consumers).
fn rebuild(
    g: &DataflowGraph,
    sources: Vec<Source>,
    redirect: &[Option<ValueRef>],
    mut replace: HashMap<NodeId, Node>,
    dropped: &[bool],
) -> DataflowGraph {
    let mut new_id: Vec<Option<NodeId>> = vec![None; g.nodes.len()];
    let mut nodes: Vec<Node> = Vec::with_capacity(g.nodes.len());

    let resolve = |new_id: &[Option<NodeId>], r: ValueRef| -> ValueRef {
        match chase(redirect, r) {
            ValueRef::Source(s) => ValueRef::Source(s),
            ValueRef::Node(n) => {
                ValueRef::Node(new_id[n].expect("operands precede their consumers"))
            }
        }
    };

    for (id, node) in g.nodes.iter().enumerate() {
        if redirect[id].is_some() || dropped[id] {
            continue;
        }
        let mut node = replace.remove(&id).unwrap_or_else(|| node.clone());
        for op in &mut node.operands {
            *op = resolve(&new_id, *op);
        }
        new_id[id] = Some(nodes.len());
        nodes.push(node);
    }

    let resolve_opt = |r: ValueRef| -> Option<ValueRef> {
        match chase(redirect, r) {
            ValueRef::Source(s) => Some(ValueRef::Source(s)),
            ValueRef::Node(n) => new_id[n].map(ValueRef::Node),
        }
    };

    DataflowGraph {
        sources,
        nodes,
        registers: g
            .registers
            .iter()
            .map(|reg| {
                let mut reg = reg.clone();
                reg.next = resolve_opt(reg.next).expect("register next stays live");
                reg.reset = reg.reset.map(|r| resolve_opt(r).expect("reset stays live"));
                reg
            })
            .collect(),
        inputs: g.inputs.clone(),
        outputs: g
            .outputs
            .iter()
            .map(|(n, r)| (n.clone(), resolve_opt(*r).expect("output stays live")))
            .collect(),
        observed: g
            .observed
            .iter()
            .filter_map(|(n, r)| resolve_opt(*r).map(|r| (n.clone(), r)))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Constant propagation

/// Fold nodes whose operands are all constants, resolve muxes with known
/// selectors, and apply the annihilator identities `and(x, 0) = 0` and
/// `mul(x, 0) = 0`. Iterates to a fixpoint. Division by a constant zero folds
/// to 0, matching the runtime semantics.
pub fn constant_propagate(g: &DataflowGraph) -> DataflowGraph {
    let mut sources = g.sources.clone();
    let mut interned: HashMap<(u128, u32, bool), usize> = HashMap::new();
    for (i, s) in sources.iter().enumerate() {
        if let SourceKind::Constant(v) = s.kind {
            interned.entry((v, s.width, s.signed)).or_insert(i);
        }
    }

    let mut nodes: Vec<Node> = g.nodes.clone();
    let mut redirect: Vec<Option<ValueRef>> = vec![None; nodes.len()];

    let mut intern = |sources: &mut Vec<Source>, v: BitVec| -> ValueRef {
        let key = (v.value(), v.width(), v.is_signed());
        let id = *interned.entry(key).or_insert_with(|| {
            sources.push(Source {
                name: format!("_k{}", sources.len()),
                width: v.width(),
                signed: v.is_signed(),
                kind: SourceKind::Constant(v.value()),
            });
            sources.len() - 1
        });
        ValueRef::Source(id)
    };

    let const_of = |sources: &[Source], r: ValueRef| -> Option<BitVec> {
        if let ValueRef::Source(s) = r {
            if let SourceKind::Constant(v) = sources[s].kind {
                return Some(BitVec::new(v, sources[s].width, sources[s].signed));
            }
        }
        None
    };

    loop {
        let mut changed = false;
        for id in 0..nodes.len() {
            if redirect[id].is_some() {
                continue;
            }
            let resolved: Vec<ValueRef> = nodes[id]
                .operands
                .iter()
                .map(|r| chase(&redirect, *r))
                .collect();
            let consts: Vec<Option<BitVec>> =
                resolved.iter().map(|r| const_of(&sources, *r)).collect();
            let node = &nodes[id];

            if consts.iter().all(|c| c.is_some()) {
                let operands: Vec<BitVec> = consts.iter().map(|c| c.unwrap()).collect();
                let v = apply_op(node.opcode, &operands, &node.params, node.width, node.signed)
                    .expect("typed graph");
                redirect[id] = Some(intern(&mut sources, v));
                changed = true;
                continue;
            }

            match node.opcode {
                Opcode::Mux => {
                    if let Some(sel) = consts[0] {
                        // Known selector: the mux becomes a pad of the taken
                        // branch (exact, including implicit extension).
                        let branch = if sel.value() != 0 {
                            resolved[1]
                        } else {
                            resolved[2]
                        };
                        let (width, signed) = (node.width, node.signed);
                        nodes[id] = Node {
                            opcode: Opcode::Pad,
                            operands: vec![branch],
                            params: vec![width],
                            width,
                            signed,
                        };
                        changed = true;
                    }
                }
                Opcode::And | Opcode::Mul => {
                    if consts
                        .iter()
                        .any(|c| c.map(|v| v.value() == 0).unwrap_or(false))
                    {
                        let zero = BitVec::zero(node.width, node.signed);
                        redirect[id] = Some(intern(&mut sources, zero));
                        changed = true;
                    }
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }

    let dropped = vec![false; nodes.len()];
    let staged = DataflowGraph {
        nodes,
        ..g.clone()
    };
    rebuild(&staged, sources, &redirect, HashMap::new(), &dropped)
}

// ---------------------------------------------------------------------------
// Copy propagation

/// Whether a node passes its operand through bit-for-bit at the same width
/// and signedness.
fn is_identity(g: &DataflowGraph, node: &Node) -> bool {
    if node.operands.len() != 1 {
        return false;
    }
    let (w, s) = g.value_type(node.operands[0]);
    let same = node.width == w && node.signed == s;
    same && match node.opcode {
        Opcode::Pad => node.params[0] <= w,
        Opcode::AsUInt => !s,
        Opcode::AsSInt => s,
        Opcode::Cvt => s,
        Opcode::Bits => !s && node.params[0] == w - 1 && node.params[1] == 0,
        Opcode::Head => !s && node.params[0] == w,
        Opcode::Tail => !s && node.params[0] == 0,
        Opcode::Shl | Opcode::Shr => node.params[0] == 0,
        _ => false,
    }
}

/// Collapse pass-through chains (same-width pads, no-op casts and their
/// compositions), rewiring all uses to the root producer.
pub fn copy_propagate(g: &DataflowGraph) -> DataflowGraph {
    let mut redirect: Vec<Option<ValueRef>> = vec![None; g.nodes.len()];
    for (id, node) in g.nodes.iter().enumerate() {
        if is_identity(g, node) {
            redirect[id] = Some(chase(&redirect, node.operands[0]));
        }
    }
    let dropped = vec![false; g.nodes.len()];
    rebuild(g, g.sources.clone(), &redirect, HashMap::new(), &dropped)
}

// ---------------------------------------------------------------------------
// Mux-chain fusion

/// Fuse maximal linear priority chains of muxes (each mux's low input is the
/// next mux, with that mux used nowhere else) of length >= 2 into a single
/// variadic mux-chain node with operands
/// `[sel0, val0, sel1, val1, ..., default]`.
pub fn fuse_mux_chains(g: &DataflowGraph) -> DataflowGraph {
    let n = g.nodes.len();
    let mut uses = vec![0usize; n];
    let mut count = |r: ValueRef| {
        if let ValueRef::Node(id) = r {
            uses[id] += 1;
        }
    };
    for node in &g.nodes {
        for &op in &node.operands {
            count(op);
        }
    }
    for r in g.sink_refs() {
        count(r);
    }

    // A mux is absorbable when its single use is as the low input of another
    // mux; such nodes extend their consumer's chain instead of rooting one.
    let low_of_mux = |id: usize| -> Option<usize> {
        let node = &g.nodes[id];
        if node.opcode != Opcode::Mux {
            return None;
        }
        match node.operands[2] {
            ValueRef::Node(low) if g.nodes[low].opcode == Opcode::Mux && uses[low] == 1 => {
                Some(low)
            }
            _ => None,
        }
    };
    let mut absorbable = vec![false; n];
    for id in 0..n {
        if let Some(low) = low_of_mux(id) {
            absorbable[low] = true;
        }
    }

    let mut replace: HashMap<NodeId, Node> = HashMap::new();
    let mut dropped = vec![false; n];
    for root in 0..n {
        if g.nodes[root].opcode != Opcode::Mux || absorbable[root] {
            continue;
        }
        let mut chain = vec![root];
        let mut cur = root;
        while let Some(low) = low_of_mux(cur) {
            chain.push(low);
            cur = low;
        }
        if chain.len() < 2 {
            continue;
        }
        let mut operands = Vec::with_capacity(2 * chain.len() + 1);
        for &m in &chain {
            operands.push(g.nodes[m].operands[0]);
            operands.push(g.nodes[m].operands[1]);
        }
        operands.push(g.nodes[cur].operands[2]);
        for &m in &chain[1..] {
            dropped[m] = true;
        }
        replace.insert(
            root,
            Node {
                opcode: Opcode::MuxChain,
                operands,
                params: vec![chain.len() as u32],
                width: g.nodes[root].width,
                signed: g.nodes[root].signed,
            },
        );
    }

    let redirect = vec![None; n];
    rebuild(g, g.sources.clone(), &redirect, replace, &dropped)
}

// ---------------------------------------------------------------------------
// Dead code elimination

/// Drop nodes not reachable backwards from the sinks, plus constant sources
/// that end up unreferenced. Inputs and registers always stay.
pub fn dead_code_eliminate(g: &DataflowGraph) -> DataflowGraph {
    let mut live = vec![false; g.nodes.len()];
    let mut stack: Vec<NodeId> = Vec::new();
    for r in g.sink_refs() {
        if let ValueRef::Node(id) = r {
            if !live[id] {
                live[id] = true;
                stack.push(id);
            }
        }
    }
    while let Some(id) = stack.pop() {
        for &op in &g.nodes[id].operands {
            if let ValueRef::Node(p) = op {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
    }

    // Which sources stay referenced by live nodes or sinks?
    let mut src_used = vec![false; g.sources.len()];
    let mut mark = |r: ValueRef| {
        if let ValueRef::Source(s) = r {
            src_used[s] = true;
        }
    };
    for (id, node) in g.nodes.iter().enumerate() {
        if live[id] {
            for &op in &node.operands {
                mark(op);
            }
        }
    }
    for r in g.sink_refs() {
        mark(r);
    }

    let mut src_map: Vec<Option<usize>> = vec![None; g.sources.len()];
    let mut sources = Vec::new();
    for (i, s) in g.sources.iter().enumerate() {
        let keep = !matches!(s.kind, SourceKind::Constant(_)) || src_used[i];
        if keep {
            src_map[i] = Some(sources.len());
            sources.push(s.clone());
        }
    }

    let mut node_map: Vec<Option<NodeId>> = vec![None; g.nodes.len()];
    let mut nodes = Vec::new();
    for (id, node) in g.nodes.iter().enumerate() {
        if !live[id] {
            continue;
        }
        let mut node = node.clone();
        for op in &mut node.operands {
            *op = remap(&src_map, &node_map, *op).expect("live operand");
        }
        node_map[id] = Some(nodes.len());
        nodes.push(node);
    }

    DataflowGraph {
        sources,
        nodes,
        registers: g
            .registers
            .iter()
            .map(|reg| {
                let mut reg = reg.clone();
                reg.source = src_map[reg.source].expect("registers stay");
                reg.next = remap(&src_map, &node_map, reg.next).expect("next stays");
                reg.reset = reg.reset.map(|r| remap(&src_map, &node_map, r).expect("reset stays"));
                reg
            })
            .collect(),
        inputs: g
            .inputs
            .iter()
            .map(|(n, s)| (n.clone(), src_map[*s].expect("inputs stay")))
            .collect(),
        outputs: g
            .outputs
            .iter()
            .map(|(n, r)| (n.clone(), remap(&src_map, &node_map, *r).expect("outputs stay")))
            .collect(),
        observed: g
            .observed
            .iter()
            .filter_map(|(n, r)| remap(&src_map, &node_map, *r).map(|r| (n.clone(), r)))
            .collect(),
    }
}

fn remap(
    src_map: &[Option<usize>],
    node_map: &[Option<NodeId>],
    r: ValueRef,
) -> Option<ValueRef> {
    match r {
        ValueRef::Source(s) => src_map[s].map(ValueRef::Source),
        ValueRef::Node(n) => node_map[n].map(ValueRef::Node),
    }
}
