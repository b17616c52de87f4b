//! Non-deterministic machines: the computation tree and its analyses.
//!
//! Every line with `m` instructions spawns `m` copies of the machine. The tree
//! of all copies is built breadth-first under a depth bound and a node
//! budget; equal configurations on different paths stay distinct nodes.

pub mod export;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::{apply_instruction, Acceptance, AcceptancePolicy, Configuration, Program, Registers};
use crate::scalar::Weight;
use crate::trace::{Trace, TraceStep};

pub use crate::trace::replay_trace;

/// Successors of a running configuration, one per choice, in choice order.
pub fn expand<W: Weight>(program: &Program<W>, config: &Configuration) -> Result<Vec<Configuration>> {
    let line = program.line(config.counter()).ok_or(Error::AlreadyHalted {
        counter: config.counter(),
    })?;
    Ok(line
        .choices()
        .iter()
        .map(|c| apply_instruction(config, c.instruction))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeStatus {
    Expanded,
    LeafHalted,
    /// Not expanded because of the depth bound or the node budget.
    Frontier,
}

impl NodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeStatus::Expanded => "expanded",
            NodeStatus::LeafHalted => "leaf-halted",
            NodeStatus::Frontier => "frontier",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub config: Configuration,
    pub depth: u64,
    /// Parent and the choice index leading here; `None` for the root.
    pub parent: Option<(NodeId, usize)>,
    /// `(choice, child)` pairs in choice order.
    pub children: Vec<(usize, NodeId)>,
    pub status: NodeStatus,
}

#[derive(Clone, Debug)]
pub struct ComputationTree<W = num_rational::BigRational> {
    nodes: Vec<TreeNode>,
    program: Program<W>,
    truncated: bool,
}

impl<W: Weight> ComputationTree<W> {
    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> Option<&TreeNode> {
        self.nodes.get(id.0)
    }

    /// Nodes in breadth-first order; a node's id is its position.
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn program(&self) -> &Program<W> {
        &self.program
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn count(&self, status: NodeStatus) -> usize {
        self.nodes.iter().filter(|n| n.status == status).count()
    }

    /// Halting summary of the materialized tree.
    pub fn halting_report(&self) -> HaltingReport {
        let leaves = self.nodes.iter().filter(|n| n.status == NodeStatus::LeafHalted);
        let leaf_count = BigUint::from(leaves.clone().count());
        if self.truncated {
            HaltingReport::SomeRunning {
                live_frontier: BigUint::from(self.count(NodeStatus::Frontier)),
                halted_leaves: leaf_count,
            }
        } else {
            HaltingReport::AllHalted {
                max_depth: leaves.map(|n| n.depth).max().unwrap_or(0),
                leaf_count,
            }
        }
    }

    /// The root-to-node path as an executed trace.
    pub fn extract_trace(&self, id: NodeId) -> Result<Trace> {
        if id.0 >= self.nodes.len() {
            return Err(Error::NodeNotInTree(id.0));
        }
        let mut steps = Vec::new();
        let mut current = id;
        while let Some((parent, choice)) = self.nodes[current.0].parent {
            let line = self.nodes[parent.0].config.counter();
            let instruction = self
                .program
                .line(line)
                .and_then(|l| l.instruction(choice))
                .expect("tree edges follow program choices");
            steps.push(TraceStep {
                line,
                choice,
                instruction,
            });
            current = parent;
        }
        steps.reverse();
        Ok(Trace::new(steps))
    }
}

/// Breadth-first construction of the computation tree from `inputs`.
///
/// Running nodes at `depth_bound`, or reached once the tree holds
/// `node_budget` nodes, become [`NodeStatus::Frontier`].
pub fn build_tree<W: Weight>(
    program: &Program<W>,
    inputs: &Registers,
    depth_bound: u64,
    node_budget: usize,
) -> ComputationTree<W> {
    let node_budget = node_budget.max(1);
    let mut nodes = vec![TreeNode {
        config: Configuration::initial(inputs),
        depth: 0,
        parent: None,
        children: Vec::new(),
        status: NodeStatus::Frontier,
    }];
    let mut truncated = false;
    let mut budget_hit = false;
    let mut cursor = 0;
    while cursor < nodes.len() {
        let (config, depth) = (nodes[cursor].config.clone(), nodes[cursor].depth);
        let status = match program.line(config.counter()) {
            None => NodeStatus::LeafHalted,
            Some(_) if depth >= depth_bound => NodeStatus::Frontier,
            Some(line) => {
                budget_hit |= nodes.len() + line.width() > node_budget;
                if budget_hit {
                    NodeStatus::Frontier
                } else {
                    for (choice, c) in line.choices().iter().enumerate() {
                        let id = NodeId(nodes.len());
                        nodes.push(TreeNode {
                            config: apply_instruction(&config, c.instruction),
                            depth: depth + 1,
                            parent: Some((NodeId(cursor), choice)),
                            children: Vec::new(),
                            status: NodeStatus::Frontier,
                        });
                        nodes[cursor].children.push((choice, id));
                    }
                    NodeStatus::Expanded
                }
            }
        };
        truncated |= status == NodeStatus::Frontier;
        nodes[cursor].status = status;
        cursor += 1;
    }
    ComputationTree {
        nodes,
        program: program.clone(),
        truncated,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HaltingReport {
    /// Every path halts within the horizon.
    AllHalted { max_depth: u64, leaf_count: BigUint },
    /// Some paths are still running at the horizon.
    SomeRunning {
        live_frontier: BigUint,
        halted_leaves: BigUint,
    },
}

impl HaltingReport {
    pub fn all_halted(&self) -> bool {
        matches!(self, HaltingReport::AllHalted { .. })
    }
}

/// Decides whether every branch halts within `fuel` steps.
///
/// Paths are counted with multiplicity, so the counts equal the leaf and
/// frontier counts of the full tree cut at depth `fuel`; internally equal
/// configurations at the same depth are merged to keep this tractable.
pub fn universal_halting<W: Weight>(program: &Program<W>, inputs: &Registers, fuel: u64) -> HaltingReport {
    let mut layer: HashMap<Configuration, BigUint> = HashMap::new();
    layer.insert(Configuration::initial(inputs), BigUint::one());
    let mut halted = BigUint::zero();
    let mut max_depth = 0;
    let mut depth = 0;
    loop {
        let mut running = HashMap::new();
        for (config, paths) in layer {
            if config.is_halted(program) {
                halted += paths;
                max_depth = depth;
            } else {
                running.insert(config, paths);
            }
        }
        if running.is_empty() {
            return HaltingReport::AllHalted {
                max_depth,
                leaf_count: halted,
            };
        }
        if depth == fuel {
            return HaltingReport::SomeRunning {
                live_frontier: running.values().sum(),
                halted_leaves: halted,
            };
        }
        let mut next: HashMap<Configuration, BigUint> = HashMap::new();
        for (config, paths) in running {
            for child in expand(program, &config).expect("running configuration") {
                *next.entry(child).or_default() += &paths;
            }
        }
        layer = next;
        depth += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LeafSearch {
    /// First accepting leaf in breadth-first, then choice, order.
    Found { node: NodeId, trace: Trace },
    /// The tree is complete and no leaf accepts.
    NotFound,
    /// No accepting leaf among materialized nodes, but the tree is truncated.
    Inconclusive,
}

impl LeafSearch {
    pub fn trace(&self) -> Option<&Trace> {
        match self {
            LeafSearch::Found { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

pub fn exists_accepting_leaf<W: Weight>(tree: &ComputationTree<W>, policy: &AcceptancePolicy) -> LeafSearch {
    let hit = tree.nodes.iter().position(|n| {
        n.status == NodeStatus::LeafHalted && policy.evaluate(&n.config, true) == Acceptance::Accept
    });
    match hit {
        Some(i) => LeafSearch::Found {
            node: NodeId(i),
            trace: tree.extract_trace(NodeId(i)).expect("node is in tree"),
        },
        None if tree.truncated => LeafSearch::Inconclusive,
        None => LeafSearch::NotFound,
    }
}

/// Free-function form of [`ComputationTree::extract_trace`].
pub fn extract_trace<W: Weight>(tree: &ComputationTree<W>, leaf: NodeId) -> Result<Trace> {
    tree.extract_trace(leaf)
}
