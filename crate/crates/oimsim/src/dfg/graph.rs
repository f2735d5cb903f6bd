//! Dataflow graph: one node per primitive-op/mux application, with sources
//! for inputs, registers and constants.

use super::opcode::Opcode;
use super::{DfgError, NodeId, SourceId};
use crate::firrtl::{NetExpr, Netlist, SignalKind};
use std::collections::HashMap;
use std::fmt::Write;

/// Reference to a value: a source signal or the output of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueRef {
    Source(SourceId),
    Node(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Source {
    pub name: String,
    pub width: u32,
    pub signed: bool,
    pub kind: SourceKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Input,
    Register,
    Constant(u128),
}

/// Operand order is significant and preserved by every pass; for
/// non-commutative operations it is the evaluation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub opcode: Opcode,
    pub operands: Vec<ValueRef>,
    pub params: Vec<u32>,
    pub width: u32,
    pub signed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphRegister {
    pub source: SourceId,
    pub next: ValueRef,
    pub reset: Option<ValueRef>,
    pub init: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DataflowGraph {
    pub sources: Vec<Source>,
    /// Topologically ordered: a node's operands are sources or nodes with a
    /// smaller id.
    pub nodes: Vec<Node>,
    pub registers: Vec<GraphRegister>,
    pub inputs: Vec<(String, SourceId)>,
    pub outputs: Vec<(String, ValueRef)>,
    /// Name map for waveform observation: every named netlist signal that
    /// still resolves to a live value. Passes prune entries whose value they
    /// eliminate.
    pub observed: Vec<(String, ValueRef)>,
}

impl DataflowGraph {
    pub fn value_type(&self, r: ValueRef) -> (u32, bool) {
        match r {
            ValueRef::Source(s) => (self.sources[s].width, self.sources[s].signed),
            ValueRef::Node(n) => (self.nodes[n].width, self.nodes[n].signed),
        }
    }

    /// Sink references: output ports, register next values and register
    /// resets. Everything not reachable backwards from these is dead.
    pub fn sink_refs(&self) -> Vec<ValueRef> {
        let mut refs: Vec<ValueRef> = self.outputs.iter().map(|(_, r)| *r).collect();
        for reg in &self.registers {
            refs.push(reg.next);
            if let Some(r) = reg.reset {
                refs.push(r);
            }
        }
        refs
    }

    /// Human-readable listing for pass dumps.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sources.iter().enumerate() {
            let kind = match s.kind {
                SourceKind::Input => "input".to_string(),
                SourceKind::Register => "reg".to_string(),
                SourceKind::Constant(v) => format!("const {v}"),
            };
            let _ = writeln!(out, "s{i} {kind} {} : {}", s.name, ty_str(s.width, s.signed));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            let ops: Vec<String> = n.operands.iter().map(|r| ref_str(*r)).collect();
            let params = if n.params.is_empty() {
                String::new()
            } else {
                format!(
                    " [{}]",
                    n.params
                        .iter()
                        .map(|p| p.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            };
            let _ = writeln!(
                out,
                "n{i} = {}({}){params} : {}",
                n.opcode.name(),
                ops.join(", "),
                ty_str(n.width, n.signed)
            );
        }
        for (name, r) in &self.outputs {
            let _ = writeln!(out, "output {name} = {}", ref_str(*r));
        }
        for reg in &self.registers {
            let reset = match reg.reset {
                Some(r) => format!(" reset={} init={}", ref_str(r), reg.init),
                None => String::new(),
            };
            let _ = writeln!(
                out,
                "reg {} next={}{}",
                self.sources[reg.source].name,
                ref_str(reg.next),
                reset
            );
        }
        out
    }
}

fn ty_str(width: u32, signed: bool) -> String {
    format!("{}<{width}>", if signed { "SInt" } else { "UInt" })
}

fn ref_str(r: ValueRef) -> String {
    match r {
        ValueRef::Source(s) => format!("s{s}"),
        ValueRef::Node(n) => format!("n{n}"),
    }
}

/// Lower a netlist into a dataflow graph: expression trees are flattened to
/// one node per operation, pure aliases resolve to their producer, and
/// combinational cycles are rejected.
pub fn build_graph(netlist: &Netlist) -> Result<DataflowGraph, DfgError> {
    let n = netlist.signals.len();

    // Sources, in signal order.
    let mut sources = Vec::new();
    let mut resolved: Vec<Option<ValueRef>> = vec![None; n];
    for (id, sig) in netlist.signals.iter().enumerate() {
        let kind = match sig.kind {
            SignalKind::Input => Some(SourceKind::Input),
            SignalKind::Register => Some(SourceKind::Register),
            SignalKind::Constant(v) => Some(SourceKind::Constant(v)),
            _ => None,
        };
        if let Some(kind) = kind {
            let sid = sources.len();
            sources.push(Source {
                name: sig.name.clone(),
                width: sig.width,
                signed: sig.signed,
                kind,
            });
            resolved[id] = Some(ValueRef::Source(sid));
        }
    }

    // Kahn topological order over combinational signals; leftovers form a
    // combinational loop.
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); n]; // signal -> signals it reads
    let mut rdeps: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = Vec::new();
    for (id, sig) in netlist.signals.iter().enumerate() {
        if resolved[id].is_some() {
            continue; // sources need no evaluation
        }
        let expr = netlist.assignments[id]
            .as_ref()
            .expect("elaboration guarantees a driver");
        // Register next-values are evaluated at commit, not here; only
        // combinational targets participate in the ordering.
        if sig.kind == SignalKind::Register {
            continue;
        }
        collect_refs(expr, &mut deps[id]);
        pending.push(id);
    }
    let mut indegree = vec![0usize; n];
    for &id in &pending {
        for &d in &deps[id] {
            if resolved[d].is_none() && netlist.signals[d].kind != SignalKind::Register {
                indegree[id] += 1;
                rdeps[d].push(id);
            }
        }
    }
    let mut order: Vec<usize> = Vec::with_capacity(pending.len());
    let mut ready: Vec<usize> = pending.iter().copied().filter(|&i| indegree[i] == 0).collect();
    while let Some(id) = ready.pop() {
        order.push(id);
        for &user in &rdeps[id] {
            indegree[user] -= 1;
            if indegree[user] == 0 {
                ready.push(user);
            }
        }
    }
    if order.len() != pending.len() {
        return Err(DfgError::CombinationalLoop {
            cycle: find_cycle(netlist, &pending, &deps, &indegree),
        });
    }

    let mut builder = Builder {
        nodes: Vec::new(),
        resolved,
    };
    for id in order {
        let expr = netlist.assignments[id].as_ref().unwrap();
        let r = builder.lower(expr);
        builder.resolved[id] = Some(r);
    }

    // Register metadata: next values lower after everything else resolved.
    let mut registers = Vec::new();
    for reg in &netlist.registers {
        let expr = netlist.assignments[reg.signal].as_ref().unwrap();
        let next = builder.lower(expr);
        let reset = reg.reset.map(|rid| {
            builder.resolved[rid].expect("reset signal resolves combinationally")
        });
        let source = match builder.resolved[reg.signal].unwrap() {
            ValueRef::Source(s) => s,
            ValueRef::Node(_) => unreachable!("registers are sources"),
        };
        registers.push(GraphRegister {
            source,
            next,
            reset,
            init: reg.init,
        });
    }

    let inputs = netlist
        .inputs
        .iter()
        .map(|&id| {
            let sid = match builder.resolved[id].unwrap() {
                ValueRef::Source(s) => s,
                _ => unreachable!(),
            };
            (netlist.signals[id].name.clone(), sid)
        })
        .collect();
    let outputs = netlist
        .outputs
        .iter()
        .map(|&id| {
            (
                netlist.signals[id].name.clone(),
                builder.resolved[id].unwrap(),
            )
        })
        .collect();

    // Every named data signal, for waveform observation.
    let observed = netlist
        .signals
        .iter()
        .enumerate()
        .filter(|(_, s)| !matches!(s.kind, SignalKind::Constant(_)))
        .map(|(id, s)| (s.name.clone(), builder.resolved[id].unwrap()))
        .collect();

    Ok(DataflowGraph {
        sources,
        nodes: builder.nodes,
        registers,
        inputs,
        outputs,
        observed,
    })
}

fn collect_refs(expr: &NetExpr, out: &mut Vec<usize>) {
    match expr {
        NetExpr::Ref(id) => out.push(*id),
        NetExpr::Prim { args, .. } => {
            for a in args {
                collect_refs(a, out);
            }
        }
    }
}

fn find_cycle(
    netlist: &Netlist,
    pending: &[usize],
    deps: &[Vec<usize>],
    indegree: &[usize],
) -> Vec<String> {
    // Walk unresolved dependencies from any stuck signal until one repeats.
    let stuck: Vec<usize> = pending.iter().copied().filter(|&i| indegree[i] > 0).collect();
    let in_stuck: std::collections::HashSet<usize> = stuck.iter().copied().collect();
    let mut path = Vec::new();
    let mut seen = HashMap::new();
    let mut cur = stuck[0];
    loop {
        if let Some(&at) = seen.get(&cur) {
            let cycle: Vec<String> = path[at..]
                .iter()
                .map(|&id: &usize| netlist.signals[id].name.clone())
                .collect();
            return cycle;
        }
        seen.insert(cur, path.len());
        path.push(cur);
        cur = *deps[cur]
            .iter()
            .find(|d| in_stuck.contains(d))
            .expect("stuck signal has a stuck dependency");
    }
}

struct Builder {
    nodes: Vec<Node>,
    resolved: Vec<Option<ValueRef>>,
}

impl Builder {
    fn lower(&mut self, expr: &NetExpr) -> ValueRef {
        match expr {
            NetExpr::Ref(id) => self.resolved[*id].expect("topological order"),
            NetExpr::Prim {
                op,
                args,
                params,
                width,
                signed,
            } => {
                let operands: Vec<ValueRef> = args.iter().map(|a| self.lower(a)).collect();
                let id = self.nodes.len();
                self.nodes.push(Node {
                    opcode: *op,
                    operands,
                    params: params.clone(),
                    width: *width,
                    signed: *signed,
                });
                ValueRef::Node(id)
            }
        }
    }
}
