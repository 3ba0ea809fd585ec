//! Primal superhedging LP, its dual over polar-respecting martingale measures,
//! and the duality report comparing both with the family's model supremum.
//!
//! Leaves in the polar set carry no primal constraint and no dual variable:
//! superhedging only has to hold quasi-surely. Uniform integrability of the
//! claim is automatic for finite claims on finite trees, so it is not modelled.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lp::{self, Bounds, LinearProgram, LpError, LpStatus, Relation, Scalar, Sense};
use crate::models::{self, polar_set, ModelError, ModelFamily, PolarReport, MARTINGALE_TOLERANCE};
use crate::tree::{Claim, EventTree, NodeId, Strategy, TreeError};

/// Tolerance used when checking a freshly computed plan.
pub const PLAN_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HedgeError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("every leaf is polar; the model family carries no mass")]
    EmptySupport,
    #[error("inconsistent instance: {0}")]
    Inconsistent(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

/// Tree, model family and claim, with the polar split precomputed.
#[derive(Clone, Debug)]
pub struct Instance {
    tree: EventTree,
    family: ModelFamily,
    claim: Claim,
    polar: PolarReport,
}

impl Instance {
    pub fn new(tree: EventTree, family: ModelFamily, claim: Claim) -> Result<Self, HedgeError> {
        for m in family.models() {
            if let Some(&bad) = m.weights().keys().find(|&&l| !tree.is_leaf(l)) {
                return Err(ModelError::WeightOnNonLeaf {
                    model: m.name().to_string(),
                    node: bad,
                }
                .into());
            }
        }
        family.check_martingale(&tree, MARTINGALE_TOLERANCE)?;
        let claim = Claim::new(&tree, claim.payoffs().clone())?;
        let polar = polar_set(&tree, &family);
        if polar.qs_support.is_empty() {
            return Err(HedgeError::EmptySupport);
        }
        Ok(Self {
            tree,
            family,
            claim,
            polar,
        })
    }

    /// Same tree and family with a different claim.
    pub fn with_claim(&self, claim: Claim) -> Result<Self, HedgeError> {
        let claim = Claim::new(&self.tree, claim.payoffs().clone())?;
        Ok(Self {
            claim,
            ..self.clone()
        })
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    pub fn claim(&self) -> &Claim {
        &self.claim
    }

    pub fn polar(&self) -> &PolarReport {
        &self.polar
    }

    /// `1 + max(|S| over nodes, |f| over leaves)`.
    pub fn scale(&self) -> f64 {
        1.0 + self.tree.max_abs_price().max(self.claim.max_abs())
    }
}

/// Index layout shared by the float and exact hedge programs.
#[derive(Clone, Debug)]
pub(crate) struct HedgeLayout {
    /// Internal indices of supported leaves, ascending id.
    pub support: Vec<usize>,
    /// Internal indices of interior nodes: the strategy variables.
    pub strategy: Vec<usize>,
    /// Interior nodes with at least one supported leaf below.
    pub charged: Vec<usize>,
}

impl HedgeLayout {
    pub fn new(tree: &EventTree, polar: &PolarReport) -> Self {
        let support: Vec<usize> = tree
            .leaf_indices()
            .iter()
            .copied()
            .filter(|&l| polar.qs_support.contains(&tree.id_at(l)))
            .collect();
        let mut charged_flag = vec![false; tree.len()];
        for &l in &support {
            let mut cur = tree.parent_at(l);
            while let Some(p) = cur {
                if charged_flag[p] {
                    break;
                }
                charged_flag[p] = true;
                cur = tree.parent_at(p);
            }
        }
        let strategy = tree.interior_indices().to_vec();
        let charged = strategy.iter().copied().filter(|&n| charged_flag[n]).collect();
        Self {
            support,
            strategy,
            charged,
        }
    }

    /// For each supported leaf, the `(interior node, price increment)` pairs along its path.
    fn increments<T: Scalar>(&self, tree: &EventTree, prices: &[T]) -> Vec<Vec<(usize, T)>> {
        self.support
            .iter()
            .map(|&l| {
                tree.path_indices(l)
                    .windows(2)
                    .map(|w| (w[0], prices[w[1]].clone() - prices[w[0]].clone()))
                    .collect()
            })
            .collect()
    }

    /// `min x` s.t. `x + Σ_n H_n ΔS_n(ω) ≥ f(ω)` for every supported leaf `ω`.
    ///
    /// `prices` is indexed by internal node index, `payoffs` parallel to `support`.
    pub fn primal_program<T: Scalar>(&self, tree: &EventTree, prices: &[T], payoffs: &[T]) -> LinearProgram<T> {
        let column: BTreeMap<usize, usize> = self.strategy.iter().enumerate().map(|(k, &n)| (n, k + 1)).collect();
        let nvars = 1 + self.strategy.len();
        let mut objective = vec![T::zero(); nvars];
        objective[0] = T::one();
        let mut lp = LinearProgram::new(Sense::Minimize, objective);
        for (steps, f) in self.increments(tree, prices).into_iter().zip(payoffs) {
            let mut row = vec![T::zero(); nvars];
            row[0] = T::one();
            for (n, ds) in steps {
                row[column[&n]] = ds;
            }
            lp.add_constraint(row, Relation::Ge, f.clone());
        }
        lp
    }

    /// `max Σ q f` over `q ≥ 0` on the support with `Σ q = 1` and zero
    /// conditional drift at every charged interior node.
    pub fn dual_program<T: Scalar>(&self, tree: &EventTree, prices: &[T], payoffs: &[T]) -> LinearProgram<T> {
        let k = self.support.len();
        let mut lp = LinearProgram::new(Sense::Maximize, payoffs.to_vec()).with_bounds(vec![Bounds::non_negative(); k]);
        lp.add_constraint(vec![T::one(); k], Relation::Eq, T::one());
        let row_of: BTreeMap<usize, usize> = self.charged.iter().enumerate().map(|(r, &n)| (n, r)).collect();
        let mut rows = vec![vec![T::zero(); k]; self.charged.len()];
        for (col, steps) in self.increments(tree, prices).into_iter().enumerate() {
            for (n, ds) in steps {
                rows[row_of[&n]][col] = ds;
            }
        }
        for row in rows {
            lp.add_constraint(row, Relation::Eq, T::zero());
        }
        lp
    }
}

fn float_parts(instance: &Instance) -> (HedgeLayout, Vec<f64>, Vec<f64>) {
    let tree = instance.tree();
    let layout = HedgeLayout::new(tree, instance.polar());
    let prices: Vec<f64> = (0..tree.len()).map(|i| tree.price_at(i)).collect();
    let payoffs: Vec<f64> = layout
        .support
        .iter()
        .map(|&l| instance.claim().get(tree.id_at(l)).expect("claim covers leaves"))
        .collect();
    (layout, prices, payoffs)
}

/// The primal program with its column and row labels.
#[derive(Clone, Debug)]
pub struct PrimalLp {
    pub program: LinearProgram<f64>,
    /// Column `k + 1` holds the position at `strategy_nodes[k]`; column 0 is the capital.
    pub strategy_nodes: Vec<NodeId>,
    /// Row `r` is the superhedging constraint at `leaves[r]`.
    pub leaves: Vec<NodeId>,
}

#[derive(Clone, Debug)]
pub struct DualLp {
    pub program: LinearProgram<f64>,
    /// Column `k` is the weight of `leaves[k]`.
    pub leaves: Vec<NodeId>,
    /// Row 0 is normalisation; row `r + 1` is the drift constraint at `nodes[r]`.
    pub nodes: Vec<NodeId>,
}

pub fn build_primal(instance: &Instance) -> PrimalLp {
    let (layout, prices, payoffs) = float_parts(instance);
    let tree = instance.tree();
    PrimalLp {
        program: layout.primal_program(tree, &prices, &payoffs),
        strategy_nodes: layout.strategy.iter().map(|&n| tree.id_at(n)).collect(),
        leaves: layout.support.iter().map(|&l| tree.id_at(l)).collect(),
    }
}

pub fn build_dual(instance: &Instance) -> DualLp {
    let (layout, prices, payoffs) = float_parts(instance);
    let tree = instance.tree();
    DualLp {
        program: layout.dual_program(tree, &prices, &payoffs),
        leaves: layout.support.iter().map(|&l| tree.id_at(l)).collect(),
        nodes: layout.charged.iter().map(|&n| tree.id_at(n)).collect(),
    }
}

/// Initial capital and strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct HedgePlan {
    pub price: f64,
    pub strategy: Strategy,
}

/// Outcome of checking `x + (H·S)_T ≥ f` on the quasi-sure support.
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub ok: bool,
    /// Supported leaf with the largest shortfall `f − x − (H·S)_T`.
    pub worst_leaf: NodeId,
    pub worst_shortfall: f64,
}

/// Checks the plan on every supported leaf, allowing `tol · scale` of slack.
pub fn verify_superhedge(instance: &Instance, plan: &HedgePlan, tol: f64) -> Result<Verification, HedgeError> {
    let tree = instance.tree();
    let mut worst: Option<(NodeId, f64)> = None;
    for &leaf in &instance.polar().qs_support {
        let w = tree.wealth(&plan.strategy, leaf)?;
        let f = instance.claim().get(leaf).expect("claim covers leaves");
        let shortfall = f - plan.price - w;
        if worst.is_none_or(|(_, s)| shortfall > s) {
            worst = Some((leaf, shortfall));
        }
    }
    let (worst_leaf, worst_shortfall) = worst.ok_or(HedgeError::EmptySupport)?;
    Ok(Verification {
        ok: worst_shortfall <= tol * instance.scale(),
        worst_leaf,
        worst_shortfall,
    })
}

/// Minimal superhedging capital together with a strategy attaining it.
pub fn superhedge(instance: &Instance) -> Result<HedgePlan, HedgeError> {
    superhedge_with_tol(instance, lp::DEFAULT_EPSILON)
}

pub fn superhedge_with_tol(instance: &Instance, epsilon: f64) -> Result<HedgePlan, HedgeError> {
    let primal = build_primal(instance);
    let sol = lp::solve(&primal.program, epsilon)?;
    match sol.status {
        LpStatus::Optimal => {}
        // x = max f with H = 0 is always feasible
        LpStatus::Infeasible => {
            return Err(HedgeError::Inconsistent("superhedging program reported infeasible".into()))
        }
        LpStatus::Unbounded => {
            return Err(HedgeError::Inconsistent(
                "superhedging price is −∞: the support admits arbitrage, so the family is not made of martingale measures"
                    .into(),
            ))
        }
    }
    let values = primal
        .strategy_nodes
        .iter()
        .zip(&sol.primal[1..])
        .map(|(&n, &h)| (n, h))
        .collect();
    let plan = HedgePlan {
        price: sol.primal[0],
        strategy: Strategy::new(instance.tree(), values)?,
    };
    let check = verify_superhedge(instance, &plan, PLAN_TOLERANCE)?;
    if !check.ok {
        return Err(HedgeError::NumericalFailure(format!(
            "optimal plan misses leaf {} by {:e}",
            check.worst_leaf, check.worst_shortfall
        )));
    }
    Ok(plan)
}

/// Optimal value and measure of the dual program.
pub fn dual_price(instance: &Instance, epsilon: f64) -> Result<(f64, BTreeMap<NodeId, f64>), HedgeError> {
    let dual = build_dual(instance);
    let sol = lp::solve(&dual.program, epsilon)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(HedgeError::Inconsistent(
                "no martingale measure lives on the quasi-sure support".into(),
            ))
        }
        LpStatus::Unbounded => {
            return Err(HedgeError::Inconsistent("dual program reported unbounded".into()))
        }
    }
    let mut measure: BTreeMap<NodeId, f64> = instance.tree().leaves().map(|l| (l, 0.0)).collect();
    for (&leaf, &q) in dual.leaves.iter().zip(&sol.primal) {
        measure.insert(leaf, q);
    }
    Ok((sol.objective, measure))
}

/// `max_P E_P[f]` over the family and the name of a maximising model.
pub fn model_sup(instance: &Instance) -> (f64, String) {
    let mut best: Option<(f64, &str)> = None;
    for m in instance.family().models() {
        let e = models::expectation(m, instance.claim());
        if best.is_none_or(|(b, _)| e > b) {
            best = Some((e, m.name()));
        }
    }
    let (v, name) = best.expect("family is nonempty");
    (v, name.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub primal_price: f64,
    pub dual_price: f64,
    pub model_sup: f64,
    pub model_sup_model: String,
    pub optimal_strategy: Strategy,
    /// Weight per leaf; polar leaves carry zero.
    pub optimal_dual_measure: BTreeMap<NodeId, f64>,
    /// `dual_price − model_sup`.
    pub gap: f64,
}

pub fn duality_report(instance: &Instance) -> Result<DualityReport, HedgeError> {
    duality_report_with_tol(instance, lp::DEFAULT_EPSILON)
}

pub fn duality_report_with_tol(instance: &Instance, epsilon: f64) -> Result<DualityReport, HedgeError> {
    let plan = superhedge_with_tol(instance, epsilon)?;
    let (dual, measure) = dual_price(instance, epsilon)?;
    let (sup, name) = model_sup(instance);
    let slack = 2.0 * epsilon * instance.scale();
    if (plan.price - dual).abs() > slack {
        return Err(HedgeError::NumericalFailure(format!(
            "primal price {} and dual price {} disagree",
            plan.price, dual
        )));
    }
    if sup > dual + slack {
        return Err(HedgeError::Inconsistent(format!(
            "model {name} prices the claim at {sup}, above the dual price {dual}"
        )));
    }
    Ok(DualityReport {
        primal_price: plan.price,
        dual_price: dual,
        model_sup: sup,
        model_sup_model: name,
        optimal_strategy: plan.strategy,
        optimal_dual_measure: measure,
        gap: dual - sup,
    })
}

/// Whether `W` can be dominated quasi-surely by the terminal wealth of some
/// strategy started from zero capital, i.e. its superhedging price is `≤ 0`.
pub fn in_cone(instance: &Instance, w: &Claim) -> Result<bool, HedgeError> {
    in_cone_with_tol(instance, w, lp::DEFAULT_EPSILON)
}

pub fn in_cone_with_tol(instance: &Instance, w: &Claim, epsilon: f64) -> Result<bool, HedgeError> {
    let probe = instance.with_claim(w.clone())?;
    let plan = superhedge_with_tol(&probe, epsilon)?;
    Ok(plan.price <= epsilon * probe.scale())
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::models::Model;
    use crate::tree::fixtures::g3;

    const EPS: f64 = 1e-12;

    #[test]
    fn gap3_primal_program() {
        let p = build_primal(&gap3());
        assert_eq!(p.program.num_vars(), 2);
        assert_eq!(p.leaves, vec![NodeId(1), NodeId(2), NodeId(3)]);
        let rows: Vec<(Vec<f64>, f64)> = p
            .program
            .constraints
            .iter()
            .map(|c| (c.coefficients.clone(), c.rhs))
            .collect();
        assert_eq!(
            rows,
            vec![(vec![1.0, -0.5], 0.0), (vec![1.0, 0.0], 0.0), (vec![1.0, 1.0], 1.0)]
        );
        assert!(p.program.constraints.iter().all(|c| c.relation == Relation::Ge));
    }

    #[test]
    fn polar_leaf_drops_its_row() {
        let t = g3();
        let m = Model::new(&t, "Pn", [(NodeId(1), 2.0 / 3.0), (NodeId(3), 1.0 / 3.0)].into_iter().collect()).unwrap();
        let fam = ModelFamily::new(&t, vec![m]).unwrap();
        let inst = Instance::new(t.clone(), fam, Claim::indicator(&t, NodeId(3))).unwrap();
        let p = build_primal(&inst);
        assert_eq!(p.program.num_constraints(), 2);
        assert_eq!(p.leaves, vec![NodeId(1), NodeId(3)]);
        let d = build_dual(&inst);
        assert_eq!(d.program.num_vars(), 2);
    }

    #[test]
    fn gap3_superhedge() {
        let plan = superhedge(&gap3()).unwrap();
        assert!((plan.price - 1.0 / 3.0).abs() < EPS);
        assert!((plan.strategy.get(NodeId(0)).unwrap() - 2.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn binomial_call_replicates() {
        let plan = superhedge(&binomial()).unwrap();
        assert!((plan.price - 1.0 / 3.0).abs() < EPS);
        assert!((plan.strategy.get(NodeId(0)).unwrap() - 2.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn constant_claim_costs_its_value() {
        let inst = gap3().with_claim(Claim::constant(&g3(), 2.5)).unwrap();
        let plan = superhedge(&inst).unwrap();
        assert!((plan.price - 2.5).abs() < EPS);
        let zero = gap3().with_claim(Claim::constant(&g3(), 0.0)).unwrap();
        let r = duality_report(&zero).unwrap();
        assert!(r.primal_price.abs() < EPS && r.dual_price.abs() < EPS && r.model_sup == 0.0);
    }

    #[test]
    fn gap3_dual() {
        let d = build_dual(&gap3());
        assert_eq!(d.program.constraints[1].coefficients, vec![-0.5, 0.0, 1.0]);
        let (v, q) = dual_price(&gap3(), lp::DEFAULT_EPSILON).unwrap();
        assert!((v - 1.0 / 3.0).abs() < EPS);
        assert!((q[&NodeId(1)] - 2.0 / 3.0).abs() < EPS);
        assert!(q[&NodeId(2)].abs() < EPS);
        assert!((q[&NodeId(3)] - 1.0 / 3.0).abs() < EPS);

        let one = gap3().with_claim(Claim::constant(&g3(), 1.0)).unwrap();
        assert!((dual_price(&one, lp::DEFAULT_EPSILON).unwrap().0 - 1.0).abs() < EPS);

        let (v, q) = dual_price(&binomial(), lp::DEFAULT_EPSILON).unwrap();
        assert!((v - 1.0 / 3.0).abs() < EPS);
        assert!((q[&NodeId(1)] - 1.0 / 3.0).abs() < EPS);
        assert!((q[&NodeId(2)] - 2.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn model_sup_examples() {
        let (v, name) = model_sup(&gap3());
        assert!((v - 1.0 / 6.0).abs() < EPS);
        assert_eq!(name, "P0");

        let t = g3();
        let other = Model::new(&t, "P1", [(NodeId(1), 2.0 / 3.0), (NodeId(3), 1.0 / 3.0)].into_iter().collect()).unwrap();
        let fam = ModelFamily::new(&t, vec![p0(&t), other]).unwrap();
        let inst = Instance::new(t.clone(), fam, Claim::indicator(&t, NodeId(3))).unwrap();
        let (v, name) = model_sup(&inst);
        assert!((v - 1.0 / 3.0).abs() < EPS);
        assert_eq!(name, "P1");

        let c = gap3().with_claim(Claim::constant(&t, -4.0)).unwrap();
        assert!((model_sup(&c).0 + 4.0).abs() < EPS);
    }

    #[test]
    fn duality_report_examples() {
        let r = duality_report(&gap3()).unwrap();
        assert!((r.primal_price - 1.0 / 3.0).abs() < EPS);
        assert!((r.dual_price - 1.0 / 3.0).abs() < EPS);
        assert!((r.model_sup - 1.0 / 6.0).abs() < EPS);
        assert!((r.gap - 1.0 / 6.0).abs() < EPS);

        let r = duality_report(&binomial()).unwrap();
        assert!((r.primal_price - 1.0 / 3.0).abs() < EPS);
        assert!((r.model_sup - 1.0 / 3.0).abs() < EPS);
        assert!(r.gap.abs() < EPS);
    }

    #[test]
    fn verify_examples() {
        let inst = gap3();
        let t = inst.tree().clone();
        let good = HedgePlan {
            price: 1.0 / 3.0,
            strategy: Strategy::constant(&t, 2.0 / 3.0),
        };
        assert!(verify_superhedge(&inst, &good, PLAN_TOLERANCE).unwrap().ok);

        let short = HedgePlan {
            price: 1.0 / 6.0,
            strategy: Strategy::constant(&t, 2.0 / 3.0),
        };
        let v = verify_superhedge(&inst, &short, PLAN_TOLERANCE).unwrap();
        assert!(!v.ok);
        assert_eq!(v.worst_leaf, NodeId(3));
        assert!((v.worst_shortfall - 1.0 / 6.0).abs() < EPS);

        let cash = HedgePlan {
            price: inst.claim().payoffs().values().cloned().fold(f64::MIN, f64::max),
            strategy: Strategy::zero(&t),
        };
        assert!(verify_superhedge(&inst, &cash, 0.0).unwrap().ok);
    }

    #[test]
    fn cone_membership() {
        let inst = gap3();
        let t = inst.tree().clone();
        assert!(in_cone(&inst, &Claim::constant(&t, 0.0)).unwrap());

        let member = Claim::wealth_of(&t, &Strategy::constant(&t, 1.0))
            .unwrap()
            .zip_with(&Claim::indicator(&t, NodeId(1)), |w, k| w - k);
        assert!(in_cone(&inst, &member).unwrap());
        assert!(!in_cone(&inst, &Claim::indicator(&t, NodeId(3))).unwrap());
    }

    #[test]
    fn positive_claim_on_flat_path_is_not_in_cone() {
        use crate::tree::fixtures::raw;
        // the middle path never moves, so no strategy earns anything on it
        let t = EventTree::new(
            2,
            vec![
                raw(0, 0, None, 1.0),
                raw(1, 1, Some(0), 0.5),
                raw(2, 1, Some(0), 1.0),
                raw(3, 1, Some(0), 2.0),
                raw(4, 2, Some(1), 0.5),
                raw(5, 2, Some(2), 1.0),
                raw(6, 2, Some(3), 2.0),
            ],
        )
        .unwrap();
        let m = Model::new(&t, "P", [(NodeId(4), 0.4), (NodeId(5), 0.4), (NodeId(6), 0.2)].into_iter().collect()).unwrap();
        let inst = Instance::new(t.clone(), ModelFamily::new(&t, vec![m]).unwrap(), Claim::constant(&t, 0.0)).unwrap();
        let eps = Claim::from_fn(&t, |l| if l == NodeId(5) { 1e-3 } else { 0.0 });
        assert!(!in_cone(&inst, &eps).unwrap());
    }

    #[test]
    fn point_mass_family_leaves_one_row() {
        let t = g3();
        let fam = ModelFamily::new(&t, vec![Model::point_mass(&t, "pm", NodeId(2)).unwrap()]).unwrap();
        let inst = Instance::new(t.clone(), fam, Claim::indicator(&t, NodeId(3))).unwrap();
        assert_eq!(build_primal(&inst).program.num_constraints(), 1);
        // the top leaf is polar, so the indicator costs nothing
        let r = duality_report(&inst).unwrap();
        assert!(r.primal_price.abs() < EPS && r.dual_price.abs() < EPS);
    }

    #[test]
    fn non_martingale_family_rejected() {
        let t = g3();
        let third = 1.0 / 3.0;
        let u = Model::new(&t, "U", t.leaves().map(|l| (l, third)).collect()).unwrap();
        let fam = ModelFamily::new_unchecked(vec![u]).unwrap();
        assert!(matches!(
            Instance::new(t.clone(), fam, Claim::constant(&t, 1.0)),
            Err(HedgeError::Model(ModelError::NotMartingale { .. }))
        ));
    }
}
