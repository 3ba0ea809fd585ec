//! Finite event trees, predictable strategies and the discrete-time wealth integral.
//!
//! A path through the tree is identified with its leaf, and the information
//! available at time `t` is the partition of paths by their time-`t` node.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// User-facing node identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("node {0} has no valid parent")]
    OrphanNode(NodeId),
    #[error("tree has no root node at time 0")]
    MissingRoot,
    #[error("tree has more than one root ({0} and {1})")]
    MultipleRoots(NodeId, NodeId),
    #[error("node {node} at time {time} has parent at time {parent_time}")]
    TimeSkew {
        node: NodeId,
        time: usize,
        parent_time: usize,
    },
    #[error("node {node} has time {time} beyond horizon {horizon}")]
    BeyondHorizon {
        node: NodeId,
        time: usize,
        horizon: usize,
    },
    #[error("interior node {0} has no children")]
    ChildlessInterior(NodeId),
    #[error("node {0} has a non-finite price")]
    NonFinitePrice(NodeId),
    #[error("unknown leaf {0}")]
    UnknownLeaf(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("strategy has no value for node {0}")]
    MissingStrategyNode(NodeId),
    #[error("strategy value at node {0} is not an interior node")]
    StrategyOnLeaf(NodeId),
    #[error("non-finite value at node {0}")]
    NonFiniteValue(NodeId),
    #[error("claim has no payoff for leaf {0}")]
    MissingPayoff(NodeId),
    #[error("claim payoff given for non-leaf node {0}")]
    PayoffOnNonLeaf(NodeId),
}

/// Unvalidated node record as read from input.
#[derive(Clone, Debug, PartialEq)]
pub struct RawNode {
    pub id: NodeId,
    pub time: usize,
    pub parent: Option<NodeId>,
    pub price: f64,
}

#[derive(Clone, Debug)]
struct Node {
    id: NodeId,
    time: usize,
    parent: Option<usize>,
    price: f64,
    children: Vec<usize>,
}

/// A validated finite event tree carrying a scalar price at every node.
///
/// Nodes are stored sorted by `(time, id)`, so index 0 is the root and the
/// leaves occupy the tail of the node array.
#[derive(Clone, Debug)]
pub struct EventTree {
    horizon: usize,
    nodes: Vec<Node>,
    index: HashMap<NodeId, usize>,
    leaves: Vec<usize>,
    interior: Vec<usize>,
}

impl EventTree {
    /// Validates a raw node list and derives the child and leaf indices.
    pub fn new(horizon: usize, raw: Vec<RawNode>) -> Result<Self, TreeError> {
        if horizon == 0 {
            return Err(TreeError::ZeroHorizon);
        }
        let mut raw = raw;
        raw.sort_by_key(|n| (n.time, n.id));

        let mut index = HashMap::with_capacity(raw.len());
        for (i, n) in raw.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(TreeError::DuplicateId(n.id));
            }
        }

        let mut root: Option<NodeId> = None;
        let mut nodes = Vec::with_capacity(raw.len());
        for n in &raw {
            if !n.price.is_finite() {
                return Err(TreeError::NonFinitePrice(n.id));
            }
            if n.time > horizon {
                return Err(TreeError::BeyondHorizon {
                    node: n.id,
                    time: n.time,
                    horizon,
                });
            }
            let parent = match n.parent {
                None => {
                    if n.time != 0 {
                        return Err(TreeError::OrphanNode(n.id));
                    }
                    if let Some(r) = root {
                        return Err(TreeError::MultipleRoots(r, n.id));
                    }
                    root = Some(n.id);
                    None
                }
                Some(pid) => {
                    let &p = index.get(&pid).ok_or(TreeError::OrphanNode(n.id))?;
                    let parent_time = raw[p].time;
                    if parent_time + 1 != n.time {
                        return Err(TreeError::TimeSkew {
                            node: n.id,
                            time: n.time,
                            parent_time,
                        });
                    }
                    Some(p)
                }
            };
            nodes.push(Node {
                id: n.id,
                time: n.time,
                parent,
                price: n.price,
                children: Vec::new(),
            });
        }
        if root.is_none() {
            return Err(TreeError::MissingRoot);
        }

        for i in 0..nodes.len() {
            if let Some(p) = nodes[i].parent {
                nodes[p].children.push(i);
            }
        }

        let mut leaves = Vec::new();
        let mut interior = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.time == horizon {
                leaves.push(i);
            } else if n.children.is_empty() {
                return Err(TreeError::ChildlessInterior(n.id));
            } else {
                interior.push(i);
            }
        }

        Ok(Self {
            horizon,
            nodes,
            index,
            leaves,
            interior,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.nodes[0].id
    }

    /// Leaf ids in `(time, id)` order, i.e. ascending id.
    pub fn leaves(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.leaves.iter().map(|&i| self.nodes[i].id)
    }

    /// Non-terminal node ids in `(time, id)` order.
    pub fn interior(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.interior.iter().map(|&i| self.nodes[i].id)
    }

    /// All node ids in `(time, id)` order.
    pub fn node_ids(&self) -> impl ExactSizeIterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.index
            .get(&id)
            .is_some_and(|&i| self.nodes[i].time == self.horizon)
    }

    pub fn price(&self, id: NodeId) -> Result<f64, TreeError> {
        self.idx(id).map(|i| self.nodes[i].price)
    }

    pub fn time(&self, id: NodeId) -> Result<usize, TreeError> {
        self.idx(id).map(|i| self.nodes[i].time)
    }

    pub fn parent(&self, id: NodeId) -> Result<Option<NodeId>, TreeError> {
        self.idx(id)
            .map(|i| self.nodes[i].parent.map(|p| self.nodes[p].id))
    }

    pub fn children(&self, id: NodeId) -> Result<Vec<NodeId>, TreeError> {
        let i = self.idx(id)?;
        Ok(self.nodes[i].children.iter().map(|&c| self.nodes[c].id).collect())
    }

    /// Largest absolute price over all nodes.
    pub fn max_abs_price(&self) -> f64 {
        self.nodes.iter().map(|n| n.price.abs()).fold(0.0, f64::max)
    }

    /// Ordered node list from the root to `leaf`, of length `horizon + 1`.
    pub fn path_of(&self, leaf: NodeId) -> Result<Vec<NodeId>, TreeError> {
        let i = self.leaf_idx(leaf)?;
        Ok(self.path_indices(i).into_iter().map(|j| self.nodes[j].id).collect())
    }

    /// Terminal value `(H·S)_T` of the wealth integral along the path ending at `leaf`.
    pub fn wealth(&self, strategy: &Strategy, leaf: NodeId) -> Result<f64, TreeError> {
        self.wealth_at(strategy, leaf, self.horizon)
    }

    /// Partial integral `(H·S)_t = Σ_{u ≤ t} H_u ΔS_u` along the path ending at `leaf`.
    pub fn wealth_at(&self, strategy: &Strategy, leaf: NodeId, t: usize) -> Result<f64, TreeError> {
        let i = self.leaf_idx(leaf)?;
        let path = self.path_indices(i);
        let mut total = 0.0;
        for w in path.windows(2).take(t) {
            let (from, to) = (&self.nodes[w[0]], &self.nodes[w[1]]);
            let h = strategy
                .get(from.id)
                .ok_or(TreeError::MissingStrategyNode(from.id))?;
            total += h * (to.price - from.price);
        }
        Ok(total)
    }

    /// Leaves whose path passes through `node`.
    pub fn leaves_under(&self, node: NodeId) -> Result<Vec<NodeId>, TreeError> {
        let start = self.idx(node)?;
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            if n.children.is_empty() {
                out.push(n.id);
            } else {
                stack.extend(n.children.iter().rev());
            }
        }
        out.sort();
        Ok(out)
    }

    /// The time-`t + 1` node on the path to `leaf` that follows `node`, or
    /// `None` if the path does not pass through `node`.
    pub fn successor_towards(&self, node: NodeId, leaf: NodeId) -> Result<Option<NodeId>, TreeError> {
        let n = self.idx(node)?;
        let l = self.leaf_idx(leaf)?;
        let path = self.path_indices(l);
        let t = self.nodes[n].time;
        if path.get(t) != Some(&n) {
            return Ok(None);
        }
        Ok(path.get(t + 1).map(|&j| self.nodes[j].id))
    }

    pub(crate) fn idx(&self, id: NodeId) -> Result<usize, TreeError> {
        self.index.get(&id).copied().ok_or(TreeError::UnknownNode(id))
    }

    fn leaf_idx(&self, id: NodeId) -> Result<usize, TreeError> {
        match self.index.get(&id) {
            Some(&i) if self.nodes[i].time == self.horizon => Ok(i),
            _ => Err(TreeError::UnknownLeaf(id)),
        }
    }

    pub(crate) fn path_indices(&self, leaf_idx: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.horizon + 1);
        let mut cur = Some(leaf_idx);
        while let Some(i) = cur {
            path.push(i);
            cur = self.nodes[i].parent;
        }
        path.reverse();
        path
    }

    pub(crate) fn leaf_indices(&self) -> &[usize] {
        &self.leaves
    }

    pub(crate) fn interior_indices(&self) -> &[usize] {
        &self.interior
    }

    pub(crate) fn id_at(&self, idx: usize) -> NodeId {
        self.nodes[idx].id
    }

    pub(crate) fn price_at(&self, idx: usize) -> f64 {
        self.nodes[idx].price
    }

    pub(crate) fn children_at(&self, idx: usize) -> &[usize] {
        &self.nodes[idx].children
    }

    pub(crate) fn parent_at(&self, idx: usize) -> Option<usize> {
        self.nodes[idx].parent
    }

    pub fn raw_nodes(&self) -> Vec<RawNode> {
        self.nodes
            .iter()
            .map(|n| RawNode {
                id: n.id,
                time: n.time,
                parent: n.parent.map(|p| self.nodes[p].id),
                price: n.price,
            })
            .collect()
    }
}

/// Predictable trading strategy: the position held over the period following
/// each non-terminal node.
#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    values: BTreeMap<NodeId, f64>,
}

impl Strategy {
    /// Builds a strategy defined on exactly the interior nodes of `tree`.
    pub fn new(tree: &EventTree, values: BTreeMap<NodeId, f64>) -> Result<Self, TreeError> {
        if let Some(missing) = tree.interior().find(|id| !values.contains_key(id)) {
            return Err(TreeError::MissingStrategyNode(missing));
        }
        for (&id, v) in &values {
            if !tree.contains(id) {
                return Err(TreeError::UnknownNode(id));
            }
            if tree.is_leaf(id) {
                return Err(TreeError::StrategyOnLeaf(id));
            }
            if !v.is_finite() {
                return Err(TreeError::NonFiniteValue(id));
            }
        }
        Ok(Self { values })
    }

    pub fn zero(tree: &EventTree) -> Self {
        Self::constant(tree, 0.0)
    }

    pub fn constant(tree: &EventTree, value: f64) -> Self {
        Self {
            values: tree.interior().map(|id| (id, value)).collect(),
        }
    }

    pub fn get(&self, node: NodeId) -> Option<f64> {
        self.values.get(&node).copied()
    }

    pub fn values(&self) -> &BTreeMap<NodeId, f64> {
        &self.values
    }

    /// Pointwise `self + other`.
    pub fn add(&self, other: &Strategy) -> Strategy {
        self.combine(other, |a, b| a + b)
    }

    pub fn scale(&self, c: f64) -> Strategy {
        Strategy {
            values: self.values.iter().map(|(&k, &v)| (k, c * v)).collect(),
        }
    }

    fn combine(&self, other: &Strategy, op: impl Fn(f64, f64) -> f64) -> Strategy {
        Strategy {
            values: self
                .values
                .iter()
                .map(|(&k, &v)| (k, op(v, other.get(k).unwrap_or(0.0))))
                .collect(),
        }
    }
}

/// Terminal claim, one payoff per leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct Claim {
    payoffs: BTreeMap<NodeId, f64>,
}

impl Claim {
    pub fn new(tree: &EventTree, payoffs: BTreeMap<NodeId, f64>) -> Result<Self, TreeError> {
        for (&id, v) in &payoffs {
            if !tree.is_leaf(id) {
                return Err(TreeError::PayoffOnNonLeaf(id));
            }
            if !v.is_finite() {
                return Err(TreeError::NonFiniteValue(id));
            }
        }
        if let Some(missing) = tree.leaves().find(|id| !payoffs.contains_key(id)) {
            return Err(TreeError::MissingPayoff(missing));
        }
        Ok(Self { payoffs })
    }

    pub fn constant(tree: &EventTree, c: f64) -> Self {
        Self::from_fn(tree, |_| c)
    }

    /// Payoff as a function of the terminal price.
    pub fn from_terminal_price(tree: &EventTree, payoff: impl Fn(f64) -> f64) -> Self {
        Self {
            payoffs: tree
                .leaf_indices()
                .iter()
                .map(|&i| (tree.id_at(i), payoff(tree.price_at(i))))
                .collect(),
        }
    }

    pub fn from_fn(tree: &EventTree, mut payoff: impl FnMut(NodeId) -> f64) -> Self {
        Self {
            payoffs: tree.leaves().map(|id| (id, payoff(id))).collect(),
        }
    }

    /// Indicator of a single leaf.
    pub fn indicator(tree: &EventTree, leaf: NodeId) -> Self {
        Self::from_fn(tree, |id| if id == leaf { 1.0 } else { 0.0 })
    }

    /// Terminal wealth `(H·S)_T` of a strategy as a claim.
    pub fn wealth_of(tree: &EventTree, strategy: &Strategy) -> Result<Self, TreeError> {
        let payoffs = tree
            .leaves()
            .map(|id| tree.wealth(strategy, id).map(|w| (id, w)))
            .collect::<Result<_, _>>()?;
        Ok(Self { payoffs })
    }

    pub fn get(&self, leaf: NodeId) -> Option<f64> {
        self.payoffs.get(&leaf).copied()
    }

    pub fn payoffs(&self) -> &BTreeMap<NodeId, f64> {
        &self.payoffs
    }

    pub fn max_abs(&self) -> f64 {
        self.payoffs.values().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Claim {
        Claim {
            payoffs: self.payoffs.iter().map(|(&k, &v)| (k, f(v))).collect(),
        }
    }

    pub fn zip_with(&self, other: &Claim, f: impl Fn(f64, f64) -> f64) -> Claim {
        Claim {
            payoffs: self
                .payoffs
                .iter()
                .map(|(&k, &v)| (k, f(v, other.get(k).unwrap_or(0.0))))
                .collect(),
        }
    }

    /// True if the claim is zero on every leaf of `leaves`.
    pub fn vanishes_on(&self, leaves: &BTreeSet<NodeId>) -> bool {
        leaves.iter().all(|l| self.get(*l) == Some(0.0))
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn raw(id: u64, time: usize, parent: Option<u64>, price: f64) -> RawNode {
        RawNode {
            id: NodeId(id),
            time,
            parent: parent.map(NodeId),
            price,
        }
    }

    /// One-period three-child tree: root 0 at price 1, leaves 1, 2, 3 at 0.5, 1, 2.
    pub fn g3() -> EventTree {
        EventTree::new(
            1,
            vec![
                raw(0, 0, None, 1.0),
                raw(1, 1, Some(0), 0.5),
                raw(2, 1, Some(0), 1.0),
                raw(3, 1, Some(0), 2.0),
            ],
        )
        .unwrap()
    }

    /// Two-period binary tree with up factor 2 and down factor 0.5.
    pub fn binary2() -> EventTree {
        EventTree::new(
            2,
            vec![
                raw(0, 0, None, 1.0),
                raw(1, 1, Some(0), 0.5),
                raw(2, 1, Some(0), 2.0),
                raw(3, 2, Some(1), 0.25),
                raw(4, 2, Some(1), 1.0),
                raw(5, 2, Some(2), 1.0),
                raw(6, 2, Some(2), 4.0),
            ],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn smallest_tree_is_valid() {
        let t = EventTree::new(
            1,
            vec![raw(0, 0, None, 1.0), raw(1, 1, Some(0), 2.0), raw(2, 1, Some(0), 0.5)],
        )
        .unwrap();
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.root(), NodeId(0));
        assert_eq!(t.children(NodeId(0)).unwrap(), vec![NodeId(1), NodeId(2)]);
    }

    #[test]
    fn g3_has_three_leaves() {
        let t = g3();
        assert_eq!(t.leaves().collect::<Vec<_>>(), vec![NodeId(1), NodeId(2), NodeId(3)]);
        assert_eq!(t.interior().collect::<Vec<_>>(), vec![NodeId(0)]);
    }

    #[test]
    fn rejects_time_skew() {
        let err = EventTree::new(
            2,
            vec![raw(0, 0, None, 1.0), raw(1, 2, Some(0), 1.0)],
        )
        .unwrap_err();
        assert!(matches!(err, TreeError::TimeSkew { .. }));
    }

    #[test]
    fn rejects_structural_errors() {
        assert_eq!(
            EventTree::new(1, vec![raw(0, 0, None, 1.0), raw(0, 1, Some(0), 1.0)]).unwrap_err(),
            TreeError::DuplicateId(NodeId(0))
        );
        assert_eq!(
            EventTree::new(1, vec![raw(0, 0, None, 1.0), raw(1, 1, Some(9), 1.0)]).unwrap_err(),
            TreeError::OrphanNode(NodeId(1))
        );
        assert_eq!(
            EventTree::new(1, vec![raw(0, 0, None, 1.0), raw(1, 1, None, 1.0)]).unwrap_err(),
            TreeError::OrphanNode(NodeId(1))
        );
        assert_eq!(
            EventTree::new(
                2,
                vec![raw(0, 0, None, 1.0), raw(1, 1, Some(0), 1.0), raw(2, 1, Some(0), 1.0), raw(3, 2, Some(1), 1.0)]
            )
            .unwrap_err(),
            TreeError::ChildlessInterior(NodeId(2))
        );
        assert_eq!(
            EventTree::new(1, vec![raw(0, 0, None, 1.0), raw(1, 1, Some(0), f64::NAN)]).unwrap_err(),
            TreeError::NonFinitePrice(NodeId(1))
        );
        assert_eq!(
            EventTree::new(1, vec![raw(1, 1, Some(0), 1.0)]).unwrap_err(),
            TreeError::OrphanNode(NodeId(1))
        );
        assert_eq!(EventTree::new(0, vec![raw(0, 0, None, 1.0)]).unwrap_err(), TreeError::ZeroHorizon);
    }

    #[test]
    fn path_of_leaf() {
        let t = g3();
        assert_eq!(t.path_of(NodeId(3)).unwrap(), vec![NodeId(0), NodeId(3)]);
        assert_eq!(t.path_of(NodeId(7)).unwrap_err(), TreeError::UnknownLeaf(NodeId(7)));
        assert_eq!(t.path_of(NodeId(0)).unwrap_err(), TreeError::UnknownLeaf(NodeId(0)));

        let b = binary2();
        for leaf in b.leaves() {
            let path = b.path_of(leaf).unwrap();
            assert_eq!(path.len(), 3);
            let times: Vec<_> = path.iter().map(|&n| b.time(n).unwrap()).collect();
            assert_eq!(times, vec![0, 1, 2]);
        }
    }

    #[test]
    fn wealth_by_hand() {
        let t = g3();
        let h = Strategy::constant(&t, 2.0 / 3.0);
        assert!((t.wealth(&h, NodeId(3)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.wealth(&h, NodeId(1)).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        let zero = Strategy::zero(&t);
        for leaf in t.leaves() {
            assert_eq!(t.wealth(&zero, leaf).unwrap(), 0.0);
        }
        assert_eq!(t.wealth(&h, NodeId(0)).unwrap_err(), TreeError::UnknownLeaf(NodeId(0)));
    }

    #[test]
    fn strategy_must_cover_interior() {
        let t = binary2();
        let partial: BTreeMap<_, _> = [(NodeId(0), 1.0)].into_iter().collect();
        assert_eq!(
            Strategy::new(&t, partial).unwrap_err(),
            TreeError::MissingStrategyNode(NodeId(1))
        );
        let on_leaf: BTreeMap<_, _> = [(NodeId(0), 1.0), (NodeId(1), 1.0), (NodeId(2), 1.0), (NodeId(3), 1.0)]
            .into_iter()
            .collect();
        assert_eq!(Strategy::new(&t, on_leaf).unwrap_err(), TreeError::StrategyOnLeaf(NodeId(3)));
    }

    #[test]
    fn partial_wealth_two_periods() {
        let t = binary2();
        let values = [(NodeId(0), 1.0), (NodeId(1), -2.0), (NodeId(2), 3.0)].into_iter().collect();
        let h = Strategy::new(&t, values).unwrap();
        // leaf 6: 1·(2−1) + 3·(4−2) = 7
        assert_eq!(t.wealth_at(&h, NodeId(6), 1).unwrap(), 1.0);
        assert_eq!(t.wealth(&h, NodeId(6)).unwrap(), 7.0);
        // leaf 3: 1·(0.5−1) − 2·(0.25−0.5) = 0
        assert_eq!(t.wealth(&h, NodeId(3)).unwrap(), 0.0);
    }

    #[test]
    fn successor_and_subtree() {
        let t = binary2();
        assert_eq!(t.successor_towards(NodeId(0), NodeId(5)).unwrap(), Some(NodeId(2)));
        assert_eq!(t.successor_towards(NodeId(1), NodeId(5)).unwrap(), None);
        assert_eq!(t.leaves_under(NodeId(2)).unwrap(), vec![NodeId(5), NodeId(6)]);
    }
}
