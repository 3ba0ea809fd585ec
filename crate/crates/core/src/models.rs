//! Path measures on an event tree, the martingale property, polar sets and
//! the family seminorms, plus seeded instance generators.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hedge::Instance;
use crate::tree::{Claim, EventTree, NodeId, RawNode, TreeError};

/// Tolerance on `Σ w = 1` for model weights.
pub const PROB_TOLERANCE: f64 = 1e-12;

/// Default relative tolerance for martingale residuals.
pub const MARTINGALE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("model {model}: weight for leaf {leaf} is negative or not finite")]
    InvalidWeight { model: String, leaf: NodeId },
    #[error("model {model}: weight given for non-leaf node {node}")]
    WeightOnNonLeaf { model: String, node: NodeId },
    #[error("model {model}: weights sum to {sum}, not 1")]
    NotNormalized { model: String, sum: f64 },
    #[error("model family is empty")]
    EmptyFamily,
    #[error("model {model} is not a martingale measure (worst residual {residual:e} at node {node})")]
    NotMartingale {
        model: String,
        node: NodeId,
        residual: f64,
    },
    #[error("interval [{lo}, {hi}] does not contain 1 in its interior")]
    InfeasibleInterval { lo: f64, hi: f64 },
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("every martingale measure charges the forbidden set")]
    NoViableModel,
}

/// A probability measure on the paths (leaves) of a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    name: String,
    weights: BTreeMap<NodeId, f64>,
}

impl Model {
    /// Leaves absent from `weights` get weight zero.
    pub fn new(
        tree: &EventTree,
        name: impl Into<String>,
        weights: BTreeMap<NodeId, f64>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        for (&id, &w) in &weights {
            if !tree.is_leaf(id) {
                return Err(ModelError::WeightOnNonLeaf {
                    model: name,
                    node: id,
                });
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(ModelError::InvalidWeight { model: name, leaf: id });
            }
        }
        let mut weights = weights;
        for leaf in tree.leaves() {
            weights.entry(leaf).or_insert(0.0);
        }
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(ModelError::NotNormalized { model: name, sum });
        }
        Ok(Self { name, weights })
    }

    pub fn point_mass(tree: &EventTree, name: impl Into<String>, leaf: NodeId) -> Result<Self, ModelError> {
        Self::new(tree, name, [(leaf, 1.0)].into_iter().collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn weight(&self, leaf: NodeId) -> f64 {
        self.weights.get(&leaf).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &BTreeMap<NodeId, f64> {
        &self.weights
    }

    /// Leaves with strictly positive weight.
    pub fn support(&self) -> BTreeSet<NodeId> {
        self.weights
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .map(|(&id, _)| id)
            .collect()
    }
}

/// A nonempty finite family of models on one tree.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFamily {
    models: Vec<Model>,
}

impl ModelFamily {
    /// Builds a family, checking every model is a martingale measure at the default tolerance.
    pub fn new(tree: &EventTree, models: Vec<Model>) -> Result<Self, ModelError> {
        let family = Self::new_unchecked(models)?;
        family.check_martingale(tree, MARTINGALE_TOLERANCE)?;
        Ok(family)
    }

    /// Builds a family without the martingale check.
    pub fn new_unchecked(models: Vec<Model>) -> Result<Self, ModelError> {
        if models.is_empty() {
            return Err(ModelError::EmptyFamily);
        }
        Ok(Self { models })
    }

    pub fn check_martingale(&self, tree: &EventTree, tol: f64) -> Result<(), ModelError> {
        for m in &self.models {
            let report = is_martingale_measure(tree, m, tol);
            if !report.is_martingale {
                let worst = report.worst().expect("failing report has a residual");
                return Err(ModelError::NotMartingale {
                    model: m.name.clone(),
                    node: worst.node,
                    residual: worst.residual,
                });
            }
        }
        Ok(())
    }

    pub fn models(&self) -> &[Model] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn with(&self, model: Model) -> Self {
        let mut models = self.models.clone();
        models.push(model);
        Self { models }
    }
}

/// Mass of the atom of paths through `node`. The root carries the whole
/// (normalised) measure and reports exactly 1.
pub fn node_mass(tree: &EventTree, model: &Model, node: NodeId) -> Result<f64, ModelError> {
    if node == tree.root() {
        return Ok(1.0);
    }
    Ok(tree
        .leaves_under(node)?
        .into_iter()
        .map(|l| model.weight(l))
        .sum())
}

/// Node masses indexed like the tree's internal node array.
pub(crate) fn masses(tree: &EventTree, model: &Model) -> Vec<f64> {
    let mut mass = vec![0.0; tree.len()];
    for &l in tree.leaf_indices() {
        mass[l] = model.weight(tree.id_at(l));
    }
    for i in (0..tree.len()).rev() {
        if let Some(p) = tree.parent_at(i) {
            mass[p] += mass[i];
        }
    }
    mass
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeResidual {
    pub node: NodeId,
    pub mass: f64,
    /// `|Σ_c mass(c)·(S_c − S_n)|` over the children of the node.
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleReport {
    pub is_martingale: bool,
    /// One entry per non-terminal node with positive mass.
    pub residuals: Vec<NodeResidual>,
}

impl MartingaleReport {
    pub fn worst(&self) -> Option<&NodeResidual> {
        self.residuals
            .iter()
            .filter(|r| !r.passed)
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// Checks `E[ΔS_{t+1} | F_t] = 0` at every non-terminal node of positive mass.
///
/// A node passes when its residual is at most `tol · mass · (1 + max|S|)`.
pub fn is_martingale_measure(tree: &EventTree, model: &Model, tol: f64) -> MartingaleReport {
    let mass = masses(tree, model);
    let scale = 1.0 + tree.max_abs_price();
    let mut residuals = Vec::new();
    for &n in tree.interior_indices() {
        if mass[n] <= 0.0 {
            continue;
        }
        let s = tree.price_at(n);
        let residual = tree
            .children_at(n)
            .iter()
            .map(|&c| mass[c] * (tree.price_at(c) - s))
            .sum::<f64>()
            .abs();
        residuals.push(NodeResidual {
            node: tree.id_at(n),
            mass: mass[n],
            residual,
            passed: residual <= tol * mass[n] * scale,
        });
    }
    MartingaleReport {
        is_martingale: residuals.iter().all(|r| r.passed),
        residuals,
    }
}

/// Conditional transition probabilities out of `node`, defined only where
/// the node has positive mass.
pub fn transition(tree: &EventTree, model: &Model, node: NodeId) -> Result<Option<Vec<(NodeId, f64)>>, ModelError> {
    let mass = masses(tree, model);
    let n = tree.idx(node)?;
    if mass[n] <= 0.0 || tree.children_at(n).is_empty() {
        return Ok(None);
    }
    Ok(Some(
        tree.children_at(n)
            .iter()
            .map(|&c| (tree.id_at(c), mass[c] / mass[n]))
            .collect(),
    ))
}

/// Split of the leaves into the polar set and the quasi-sure support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarReport {
    pub polar_leaves: BTreeSet<NodeId>,
    pub qs_support: BTreeSet<NodeId>,
}

/// A leaf is polar iff every model gives it weight exactly zero.
pub fn polar_set(tree: &EventTree, family: &ModelFamily) -> PolarReport {
    let (qs_support, polar_leaves) = tree
        .leaves()
        .partition(|&l| family.models().iter().any(|m| m.weight(l) > 0.0));
    PolarReport {
        polar_leaves,
        qs_support,
    }
}

pub fn expectation(model: &Model, claim: &Claim) -> f64 {
    claim
        .payoffs()
        .iter()
        .map(|(&l, &v)| model.weight(l) * v)
        .sum()
}

/// `E_P[|f|]`.
pub fn seminorm(model: &Model, claim: &Claim) -> f64 {
    claim
        .payoffs()
        .iter()
        .map(|(&l, &v)| model.weight(l) * v.abs())
        .sum()
}

/// `sup_P E_P[|f|]` over the family.
pub fn l1_norm(family: &ModelFamily, claim: &Claim) -> f64 {
    family
        .models()
        .iter()
        .map(|m| seminorm(m, claim))
        .fold(0.0, f64::max)
}

/// Extreme points of the martingale transitions out of a node at price `s`
/// with children at `prices`: point masses on children at exactly `s` and
/// two-point laws on pairs straddling `s`.
fn extreme_transitions(s: f64, prices: &[f64], allowed: &[bool]) -> Vec<Vec<f64>> {
    let k = prices.len();
    let mut out = Vec::new();
    for i in 0..k {
        if allowed[i] && prices[i] == s {
            let mut q = vec![0.0; k];
            q[i] = 1.0;
            out.push(q);
        }
    }
    for i in 0..k {
        for j in 0..k {
            if allowed[i] && allowed[j] && prices[i] < s && s < prices[j] {
                let width = prices[j] - prices[i];
                let mut q = vec![0.0; k];
                q[i] = (prices[j] - s) / width;
                q[j] = (s - prices[i]) / width;
                out.push(q);
            }
        }
    }
    out
}

/// Random mixture of a random nonempty subset of the extreme transitions.
fn sample_transition(rng: &mut ChaCha8Rng, extremes: &[Vec<f64>]) -> Vec<f64> {
    let k = extremes[0].len();
    let mut chosen: Vec<usize> = (0..extremes.len()).filter(|_| rng.gen_bool(0.5)).collect();
    if chosen.is_empty() {
        chosen.push(rng.gen_range(0..extremes.len()));
    }
    let mix: Vec<f64> = chosen.iter().map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = mix.iter().sum();
    let mut q = vec![0.0; k];
    for (&e, &m) in chosen.iter().zip(&mix) {
        for (qi, ei) in q.iter_mut().zip(&extremes[e]) {
            *qi += m / total * ei;
        }
    }
    q
}

/// Samples one path measure whose transitions only use children flagged `viable`.
fn sample_model(tree: &EventTree, viable: &[bool], rng: &mut ChaCha8Rng, name: String) -> Result<Model, ModelError> {
    let mut mass = vec![0.0; tree.len()];
    mass[0] = 1.0;
    for i in 0..tree.len() {
        let children = tree.children_at(i);
        if children.is_empty() || mass[i] <= 0.0 {
            continue;
        }
        let prices: Vec<f64> = children.iter().map(|&c| tree.price_at(c)).collect();
        let allowed: Vec<bool> = children.iter().map(|&c| viable[c]).collect();
        let extremes = extreme_transitions(tree.price_at(i), &prices, &allowed);
        debug_assert!(!extremes.is_empty(), "viable node without martingale transition");
        let q = sample_transition(rng, &extremes);
        for (&c, qc) in children.iter().zip(q) {
            mass[c] = mass[i] * qc;
        }
    }
    let weights = tree
        .leaf_indices()
        .iter()
        .map(|&l| (tree.id_at(l), mass[l]))
        .collect();
    Model::new(tree, name, weights)
}

/// Marks nodes whose subtree carries a martingale measure avoiding `forbidden`.
fn viability(tree: &EventTree, forbidden: &BTreeSet<NodeId>) -> Vec<bool> {
    let mut viable = vec![false; tree.len()];
    for i in (0..tree.len()).rev() {
        let children = tree.children_at(i);
        viable[i] = if children.is_empty() {
            !forbidden.contains(&tree.id_at(i))
        } else {
            let prices: Vec<f64> = children.iter().map(|&c| tree.price_at(c)).collect();
            let allowed: Vec<bool> = children.iter().map(|&c| viable[c]).collect();
            !extreme_transitions(tree.price_at(i), &prices, &allowed).is_empty()
        };
    }
    viable
}

/// Recombining-free `branching`-ary tree with `S_0 = 1` and child ratios on an
/// evenly spaced grid of `branching` points spanning `[lo, hi]`.
pub fn interval_tree(horizon: usize, lo: f64, hi: f64, branching: usize) -> Result<EventTree, ModelError> {
    if !(lo.is_finite() && hi.is_finite() && lo < 1.0 && 1.0 < hi) {
        return Err(ModelError::InfeasibleInterval { lo, hi });
    }
    if lo <= 0.0 {
        return Err(ModelError::InvalidParameter(format!("interval lower end {lo} must be positive")));
    }
    if branching < 2 {
        return Err(ModelError::InvalidParameter("branching must be at least 2".into()));
    }
    if horizon == 0 {
        return Err(ModelError::InvalidParameter("horizon must be at least 1".into()));
    }
    let ratios: Vec<f64> = (0..branching)
        .map(|i| match i {
            0 => lo,
            i if i == branching - 1 => hi,
            i => lo + (hi - lo) * i as f64 / (branching - 1) as f64,
        })
        .collect();

    let mut raw = vec![RawNode {
        id: NodeId(0),
        time: 0,
        parent: None,
        price: 1.0,
    }];
    let mut frontier = vec![0usize];
    for t in 1..=horizon {
        let mut next = Vec::with_capacity(frontier.len() * branching);
        for &p in &frontier {
            for r in &ratios {
                let id = raw.len();
                raw.push(RawNode {
                    id: NodeId(id as u64),
                    time: t,
                    parent: Some(raw[p].id),
                    price: raw[p].price * r,
                });
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(EventTree::new(horizon, raw)?)
}

/// At-the-money call `(S_T − S_0)⁺`, the claim attached to generated instances.
pub fn atm_call(tree: &EventTree) -> Claim {
    let s0 = tree.price(tree.root()).expect("root exists");
    Claim::from_terminal_price(tree, |s| (s - s0).max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntervalParams {
    pub horizon: usize,
    pub lo: f64,
    pub hi: f64,
    pub branching: usize,
    pub models: usize,
    pub seed: u64,
}

/// Interval-increment instance: `S_{t+1}/S_t` ranges over a grid in `[lo, hi]`
/// and the family holds `models` sampled martingale measures.
pub fn gen_interval_instance(params: &IntervalParams) -> Result<Instance, ModelError> {
    let tree = interval_tree(params.horizon, params.lo, params.hi, params.branching)?;
    gen_nullset_instance(tree, &BTreeSet::new(), params.models, params.seed)
}

/// Samples `models` martingale measures on `tree` that put no mass on `forbidden`.
pub fn gen_nullset_instance(
    tree: EventTree,
    forbidden: &BTreeSet<NodeId>,
    models: usize,
    seed: u64,
) -> Result<Instance, ModelError> {
    if models == 0 {
        return Err(ModelError::InvalidParameter("model count must be at least 1".into()));
    }
    if let Some(&bad) = forbidden.iter().find(|&&l| !tree.is_leaf(l)) {
        return Err(TreeError::UnknownLeaf(bad).into());
    }
    let viable = viability(&tree, forbidden);
    if !viable[0] {
        return Err(ModelError::NoViableModel);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampled = (0..models)
        .map(|k| sample_model(&tree, &viable, &mut rng, format!("P{k}")))
        .collect::<Result<Vec<_>, _>>()?;
    let family = ModelFamily::new(&tree, sampled)?;
    let claim = atm_call(&tree);
    Ok(Instance::new(tree, family, claim).expect("generated instance is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::fixtures::{binary2, g3};

    fn p0(tree: &EventTree) -> Model {
        Model::new(
            tree,
            "P0",
            [(NodeId(1), 1.0 / 3.0), (NodeId(2), 0.5), (NodeId(3), 1.0 / 6.0)].into_iter().collect(),
        )
        .unwrap()
    }

    #[test]
    fn node_mass_examples() {
        let t = g3();
        let p = p0(&t);
        assert_eq!(node_mass(&t, &p, NodeId(0)).unwrap(), 1.0);
        assert_eq!(node_mass(&t, &p, NodeId(2)).unwrap(), 0.5);
        let pm = Model::point_mass(&t, "pm", NodeId(2)).unwrap();
        assert_eq!(node_mass(&t, &pm, NodeId(3)).unwrap(), 0.0);
        assert!(matches!(node_mass(&t, &p, NodeId(9)), Err(ModelError::Tree(TreeError::UnknownNode(_)))));
    }

    #[test]
    fn martingale_examples() {
        let t = g3();
        let r = is_martingale_measure(&t, &p0(&t), MARTINGALE_TOLERANCE);
        assert!(r.is_martingale);
        assert!(r.max_residual() < 1e-15);

        let third = 1.0 / 3.0;
        let uniform = Model::new(&t, "U", t.leaves().map(|l| (l, third)).collect()).unwrap();
        let r = is_martingale_measure(&t, &uniform, MARTINGALE_TOLERANCE);
        assert!(!r.is_martingale);
        assert!((r.worst().unwrap().residual - 1.0 / 6.0).abs() < 1e-15);

        let pm = Model::point_mass(&t, "pm", NodeId(2)).unwrap();
        assert!(is_martingale_measure(&t, &pm, MARTINGALE_TOLERANCE).is_martingale);
    }

    #[test]
    fn model_validation() {
        let t = g3();
        let bad = Model::new(&t, "bad", [(NodeId(1), 0.5)].into_iter().collect());
        assert!(matches!(bad, Err(ModelError::NotNormalized { .. })));
        let neg = Model::new(&t, "neg", [(NodeId(1), -0.5), (NodeId(3), 1.5)].into_iter().collect());
        assert!(matches!(neg, Err(ModelError::InvalidWeight { .. })));
        let inner = Model::new(&t, "x", [(NodeId(0), 1.0)].into_iter().collect());
        assert!(matches!(inner, Err(ModelError::WeightOnNonLeaf { .. })));
        assert_eq!(ModelFamily::new_unchecked(vec![]).unwrap_err(), ModelError::EmptyFamily);
    }

    #[test]
    fn polar_set_examples() {
        let t = g3();
        let fam = ModelFamily::new(&t, vec![p0(&t)]).unwrap();
        assert!(polar_set(&t, &fam).polar_leaves.is_empty());

        let pm = ModelFamily::new(&t, vec![Model::point_mass(&t, "pm", NodeId(2)).unwrap()]).unwrap();
        let r = polar_set(&t, &pm);
        assert_eq!(r.polar_leaves, [NodeId(1), NodeId(3)].into_iter().collect());
        assert_eq!(r.qs_support, [NodeId(2)].into_iter().collect());

        let two = Model::new(&t, "two", [(NodeId(1), 2.0 / 3.0), (NodeId(3), 1.0 / 3.0)].into_iter().collect()).unwrap();
        let fam = pm.with(two);
        assert!(polar_set(&t, &fam).polar_leaves.is_empty());
    }

    #[test]
    fn expectation_and_norms() {
        let t = g3();
        let p = p0(&t);
        let c = Claim::constant(&t, -2.5);
        assert!((expectation(&p, &c) + 2.5).abs() < 1e-15);
        assert!((seminorm(&p, &c) - 2.5).abs() < 1e-15);

        let f = Claim::indicator(&t, NodeId(3));
        assert!((expectation(&p, &f) - 1.0 / 6.0).abs() < 1e-15);
        let fam = ModelFamily::new(&t, vec![p.clone(), Model::point_mass(&t, "top", NodeId(3)).unwrap()]);
        // the point mass on the top leaf is not a martingale measure
        assert!(matches!(fam, Err(ModelError::NotMartingale { .. })));
        let fam = ModelFamily::new_unchecked(vec![p, Model::point_mass(&t, "top", NodeId(3)).unwrap()]).unwrap();
        assert_eq!(l1_norm(&fam, &f), 1.0);
        assert!((l1_norm(&fam, &c) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn transition_kernel() {
        let t = binary2();
        let m = Model::new(
            &t,
            "half",
            [(NodeId(3), 2.0 / 9.0), (NodeId(4), 4.0 / 9.0), (NodeId(5), 2.0 / 9.0), (NodeId(6), 1.0 / 9.0)]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let k = transition(&t, &m, NodeId(1)).unwrap().unwrap();
        assert!((k[0].1 - 1.0 / 3.0).abs() < 1e-12);
        let pm = Model::point_mass(&t, "pm", NodeId(4)).unwrap();
        assert!(transition(&t, &pm, NodeId(2)).unwrap().is_none());
    }

    #[test]
    fn interval_generator_binomial() {
        let inst = gen_interval_instance(&IntervalParams {
            horizon: 1,
            lo: 0.5,
            hi: 2.0,
            branching: 2,
            models: 1,
            seed: 0,
        })
        .unwrap();
        let m = &inst.family().models()[0];
        let leaves: Vec<_> = inst.tree().leaves().collect();
        assert_eq!(inst.tree().price(leaves[0]).unwrap(), 0.5);
        assert!((m.weight(leaves[0]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.weight(leaves[1]) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn interval_generator_rejects_bad_interval() {
        for (lo, hi) in [(0.9, 1.0), (1.0, 2.0), (1.1, 2.0)] {
            let err = interval_tree(1, lo, hi, 3).unwrap_err();
            assert!(matches!(err, ModelError::InfeasibleInterval { .. }));
        }
    }

    #[test]
    fn interval_generator_is_deterministic() {
        let p = IntervalParams {
            horizon: 2,
            lo: 0.5,
            hi: 2.0,
            branching: 2,
            models: 3,
            seed: 11,
        };
        let a = gen_interval_instance(&p).unwrap();
        let b = gen_interval_instance(&p).unwrap();
        assert_eq!(a.family(), b.family());
        assert_eq!(a.tree().raw_nodes(), b.tree().raw_nodes());
    }

    #[test]
    fn nullset_generator_examples() {
        let m = gen_nullset_instance(g3(), &[NodeId(2)].into_iter().collect(), 1, 0).unwrap();
        let w = m.family().models()[0].weights().clone();
        assert!((w[&NodeId(1)] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(w[&NodeId(2)], 0.0);
        assert!((w[&NodeId(3)] - 1.0 / 3.0).abs() < 1e-15);

        let m = gen_nullset_instance(g3(), &[NodeId(1), NodeId(3)].into_iter().collect(), 2, 5).unwrap();
        for model in m.family().models() {
            assert_eq!(model.weight(NodeId(2)), 1.0);
        }

        let up = EventTree::new(
            1,
            vec![
                RawNode { id: NodeId(0), time: 0, parent: None, price: 1.0 },
                RawNode { id: NodeId(1), time: 1, parent: Some(NodeId(0)), price: 1.5 },
                RawNode { id: NodeId(2), time: 1, parent: Some(NodeId(0)), price: 2.0 },
            ],
        )
        .unwrap();
        assert_eq!(
            gen_nullset_instance(up, &BTreeSet::new(), 1, 0).unwrap_err(),
            ModelError::NoViableModel
        );
    }

    #[test]
    fn nullset_generator_respects_deep_forbidden_sets() {
        // ratios {0.5, 1.25, 2}; leaf 10 is the down move out of node 3 (price 2),
        // so node 3 loses its only downward child and must carry no mass
        let tree = interval_tree(2, 0.5, 2.0, 3).unwrap();
        assert_eq!(tree.price(NodeId(10)).unwrap(), 1.0);
        let forbidden: BTreeSet<_> = [NodeId(10)].into_iter().collect();
        let inst = gen_nullset_instance(tree, &forbidden, 4, 3).unwrap();
        for m in inst.family().models() {
            for leaf in [10, 11, 12] {
                assert_eq!(m.weight(NodeId(leaf)), 0.0);
            }
        }
        // in the binary tree the down node only keeps an upward child
        let forbidden: BTreeSet<_> = [NodeId(3)].into_iter().collect();
        assert_eq!(
            gen_nullset_instance(binary2(), &forbidden, 1, 0).unwrap_err(),
            ModelError::NoViableModel
        );
    }
}
