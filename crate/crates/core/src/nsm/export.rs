//! Node/edge records for a computation tree, and a Graphviz rendering.
//!
//! Node record: `id`, `depth`, `counter`, non-zero `registers`, `status`.
//! Edge record: `parent`, `child`, `choice`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{ComputationTree, NodeId, NodeStatus};
use crate::machine::{RegisterIndex, RegisterValue};
use crate::scalar::Weight;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub depth: u64,
    pub counter: usize,
    pub registers: BTreeMap<RegisterIndex, RegisterValue>,
    pub status: NodeStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeRecord {
    pub parent: NodeId,
    pub child: NodeId,
    pub choice: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeRecords {
    pub node_count: usize,
    pub truncated: bool,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<EdgeRecord>,
}

pub fn records<W: Weight>(tree: &ComputationTree<W>) -> TreeRecords {
    let nodes = tree
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| NodeRecord {
            id: NodeId(i),
            depth: n.depth,
            counter: n.config.counter(),
            registers: n.config.registers().clone(),
            status: n.status,
        })
        .collect();
    let edges = tree
        .nodes()
        .iter()
        .enumerate()
        .flat_map(|(i, n)| {
            n.children.iter().map(move |&(choice, child)| EdgeRecord {
                parent: NodeId(i),
                child,
                choice,
            })
        })
        .collect();
    TreeRecords {
        node_count: tree.node_count(),
        truncated: tree.truncated(),
        nodes,
        edges,
    }
}

fn register_list(registers: &BTreeMap<RegisterIndex, RegisterValue>) -> String {
    registers
        .iter()
        .map(|(r, v)| format!("R{r}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Graphviz `digraph` with one statement per node and per edge.
pub fn to_dot<W: Weight>(tree: &ComputationTree<W>) -> String {
    let records = records(tree);
    let mut out = String::from("digraph computation_tree {\n");
    let _ = writeln!(
        out,
        "  graph [node_count={}, truncated={}];",
        records.node_count, records.truncated
    );
    for n in &records.nodes {
        let shape = match n.status {
            NodeStatus::Expanded => "ellipse",
            NodeStatus::LeafHalted => "box",
            NodeStatus::Frontier => "diamond",
        };
        let regs = register_list(&n.registers);
        let _ = writeln!(
            out,
            "  n{} [label=\"{} | {}\", depth={}, counter={}, registers=\"{}\", status=\"{}\", shape={}];",
            n.id.0,
            regs,
            n.counter,
            n.depth,
            n.counter,
            regs,
            n.status.as_str(),
            shape
        );
    }
    for e in &records.edges {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\", choice={}];",
            e.parent.0, e.child.0, e.choice, e.choice
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{Instruction, Program, ProgramLine, Registers};
    use crate::nsm::build_tree;

    #[test]
    fn two_way_branch_export() {
        let p: Program = Program::new(vec![ProgramLine::uniform(vec![
            Instruction::Inc(0),
            Instruction::Inc(1),
        ])
        .unwrap()]);
        let t = build_tree(&p, &Registers::new(), 1, 10);
        let r = records(&t);
        assert_eq!((r.nodes.len(), r.edges.len()), (3, 2));
        assert_eq!(
            r.edges[1],
            EdgeRecord {
                parent: NodeId(0),
                child: NodeId(2),
                choice: 1
            }
        );
        let dot = to_dot(&t);
        assert!(dot.starts_with("digraph computation_tree {"));
        assert!(dot.contains("n0 -> n2 [label=\"1\", choice=1];"));
        assert!(dot.contains("n1 [label=\"R0=1 | 1\""));
    }
}
