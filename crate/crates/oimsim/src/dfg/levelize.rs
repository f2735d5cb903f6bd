//! ASAP levelization: layer(n) = 1 + max(layer of operand producers), with
//! sources conceptually one layer before the first.

use super::graph::{DataflowGraph, ValueRef};
use super::NodeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredGraph {
    pub graph: DataflowGraph,
    /// Node ids per layer; the outer index is the layer coordinate. Within a
    /// layer, nodes are ordered by (opcode tag, original id) so that formats
    /// grouping by operation type fall out of the build order.
    pub layers: Vec<Vec<NodeId>>,
    layer_index: Vec<usize>,
}

impl LayeredGraph {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_of(&self, node: NodeId) -> usize {
        self.layer_index[node]
    }
}

/// Slice the graph into dependency layers.
pub fn levelize(graph: DataflowGraph) -> LayeredGraph {
    let mut layer = vec![0usize; graph.nodes.len()];
    let mut depth = 0usize;
    for (id, node) in graph.nodes.iter().enumerate() {
        let mut l = 0usize;
        for &op in &node.operands {
            if let ValueRef::Node(p) = op {
                debug_assert!(p < id, "operands precede consumers");
                l = l.max(layer[p] + 1);
            }
        }
        layer[id] = l;
        depth = depth.max(l + 1);
    }
    if graph.nodes.is_empty() {
        depth = 0;
    }

    let mut layers: Vec<Vec<NodeId>> = vec![Vec::new(); depth];
    for (id, &l) in layer.iter().enumerate() {
        layers[l].push(id);
    }
    for ids in &mut layers {
        ids.sort_by_key(|&id| (graph.nodes[id].opcode.tag(), id));
    }

    LayeredGraph {
        graph,
        layers,
        layer_index: layer,
    }
}
