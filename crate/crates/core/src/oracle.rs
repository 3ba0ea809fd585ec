//! Exact rational reference solver and brute-force probes used to certify the
//! floating-point path on small instances.
//!
//! `exact_solve` enumerates candidate vertices: every square system formed by
//! the equality rows and a subset of the inequality hyperplanes is solved in
//! exact arithmetic, and the best feasible solution wins. Unboundedness is
//! decided by the same enumeration over the extreme rays of the recession cone.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hedge::{self, DualityReport, HedgeError, HedgeLayout, Instance};
use crate::lp::{self, LinearProgram, Relation, Sense};
use crate::models::{self, PolarReport};
use crate::tree::{Claim, EventTree, NodeId, Strategy};

pub type ExactLp = LinearProgram<BigRational>;

/// Default limit on `#variables + #constraints` for `exact_solve`.
pub const DEFAULT_CAP: usize = 24;

/// Agreement tolerance between float and exact prices, relative to scale.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("program has {size} variables plus constraints, above the cap of {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("invalid number {0:?}")]
    BadNumber(String),
    #[error(transparent)]
    Hedge(#[from] HedgeError),
    #[error("inconsistent instance: {0}")]
    Inconsistent(String),
}

/// Parses decimal text (`-12.5e-3`) or a fraction (`7/3`) into an exact rational.
pub fn parse_exact(text: &str) -> Result<BigRational, OracleError> {
    let bad = || OracleError::BadNumber(text.to_string());
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let shift = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, shift.unsigned_abs() as usize);
    let mut value = if shift >= 0 {
        BigRational::from_integer(all * pow)
    } else {
        BigRational::new(all, pow)
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Exact image of a finite double.
pub fn exact_from_f64(v: f64) -> BigRational {
    BigRational::from_f64(v).expect("finite value")
}

pub fn to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub status: ExactStatus,
    pub value: Option<BigRational>,
    /// One optimal vertex; which one is not part of the contract under degeneracy.
    pub point: Option<Vec<BigRational>>,
}

type Row = Vec<BigRational>;

/// Reduced row echelon form; returns the pivot column of each nonzero row.
fn rref(rows: &mut Vec<Row>, width: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..width {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Solves a square system `[A | b]`; `None` when singular.
fn solve_square(mut system: Vec<Row>, n: usize) -> Option<Vec<BigRational>> {
    let pivots = rref(&mut system, n);
    if pivots.len() < n {
        return None;
    }
    Some(system.into_iter().map(|row| row[n].clone()).collect())
}

/// Null space basis of the rows (each of length `n`).
fn null_space(mut rows: Vec<Row>, n: usize) -> Vec<Vec<BigRational>> {
    let pivots = rref(&mut rows, n);
    let pivot_set: BTreeSet<usize> = pivots.iter().copied().collect();
    (0..n)
        .filter(|c| !pivot_set.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); n];
            v[free] = BigRational::one();
            for (row, &p) in rows.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            v
        })
        .collect()
}

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// Lexicographic `k`-subsets of `0..n`.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Solves an exact program by vertex enumeration, refusing programs whose
/// `#variables + #constraints` exceeds `cap`.
pub fn exact_solve(lp: &ExactLp, cap: usize) -> Result<ExactSolution, OracleError> {
    lp.check_shape().map_err(|e| OracleError::Malformed(e.to_string()))?;
    let n = lp.num_vars();
    let size = n + lp.num_constraints();
    if size > cap {
        return Err(OracleError::TooLarge { size, cap });
    }
    let sign = if lp.sense == Sense::Maximize { -BigRational::one() } else { BigRational::one() };
    let cost: Vec<BigRational> = lp.objective.iter().map(|c| c * &sign).collect();

    // equalities as [a | b]; inequalities as a·x ≥ b
    let mut eqs: Vec<Row> = Vec::new();
    let mut ineqs: Vec<(Row, BigRational)> = Vec::new();
    for con in &lp.constraints {
        match con.relation {
            Relation::Eq => {
                let mut row = con.coefficients.clone();
                row.push(con.rhs.clone());
                eqs.push(row);
            }
            Relation::Ge => ineqs.push((con.coefficients.clone(), con.rhs.clone())),
            Relation::Le => ineqs.push((con.coefficients.iter().map(|v| -v.clone()).collect(), -con.rhs.clone())),
        }
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        let unit = |s: BigRational| {
            let mut row = vec![BigRational::zero(); n];
            row[j] = s;
            row
        };
        if let Some(l) = &b.lower {
            ineqs.push((unit(BigRational::one()), l.clone()));
        }
        if let Some(u) = &b.upper {
            ineqs.push((unit(-BigRational::one()), -u.clone()));
        }
    }

    // Directions along which every constraint is constant form the lineality
    // space; pin one coordinate per direction so the polyhedron is pointed.
    let normals: Vec<Row> = eqs
        .iter()
        .map(|r| r[..n].to_vec())
        .chain(ineqs.iter().map(|(a, _)| a.clone()))
        .collect();
    let lineality = null_space(normals, n);
    let lineality_improves = lineality.iter().any(|d| !dot(&cost, d).is_zero());
    for d in &lineality {
        // the free column of d is its unique unit entry
        let free = (0..n).find(|&j| d[j].is_one() && lineality.iter().filter(|o| !o[j].is_zero()).count() == 1);
        let free = free.expect("null space basis has a unit coordinate");
        let mut row = vec![BigRational::zero(); n + 1];
        row[free] = BigRational::one();
        eqs.push(row);
    }

    let pivots = rref(&mut eqs, n + 1);
    if pivots.last() == Some(&n) {
        return Ok(infeasible());
    }
    let k = n - eqs.len();

    let mut best: Option<(BigRational, Vec<BigRational>)> = None;
    for_each_subset(ineqs.len(), k, |chosen| {
        let mut system = eqs.clone();
        for &i in chosen {
            let mut row = ineqs[i].0.clone();
            row.push(ineqs[i].1.clone());
            system.push(row);
        }
        let Some(x) = solve_square(system, n) else {
            return;
        };
        if ineqs.iter().any(|(a, b)| dot(a, &x) < *b) {
            return;
        }
        let value = dot(&cost, &x);
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, x));
        }
    });
    let Some((value, point)) = best else {
        return Ok(infeasible());
    };
    if lineality_improves || improving_ray_exists(&eqs, &ineqs, &cost, n, k) {
        return Ok(ExactSolution {
            status: ExactStatus::Unbounded,
            value: None,
            point: Some(point),
        });
    }
    Ok(ExactSolution {
        status: ExactStatus::Optimal,
        value: Some(value * sign),
        point: Some(point),
    })
}

fn infeasible() -> ExactSolution {
    ExactSolution {
        status: ExactStatus::Infeasible,
        value: None,
        point: None,
    }
}

/// Looks for an extreme ray `d` of the recession cone with `c·d < 0`.
fn improving_ray_exists(eqs: &[Row], ineqs: &[(Row, BigRational)], cost: &[BigRational], n: usize, k: usize) -> bool {
    if k == 0 {
        return false;
    }
    let mut found = false;
    for_each_subset(ineqs.len(), k - 1, |chosen| {
        if found {
            return;
        }
        let rows: Vec<Row> = eqs
            .iter()
            .map(|r| r[..n].to_vec())
            .chain(chosen.iter().map(|&i| ineqs[i].0.clone()))
            .collect();
        let basis = null_space(rows, n);
        if basis.len() != 1 {
            return;
        }
        let d = &basis[0];
        for dir in [d.clone(), d.iter().map(|v| -v.clone()).collect::<Vec<_>>()] {
            if dot(cost, &dir).is_negative() && ineqs.iter().all(|(a, _)| !dot(a, &dir).is_negative()) {
                found = true;
            }
        }
    });
    found
}

/// An instance held in exact arithmetic, sharing the tree structure of the float one.
#[derive(Clone, Debug)]
pub struct ExactInstance {
    tree: EventTree,
    /// Indexed by internal node index.
    prices: Vec<BigRational>,
    models: Vec<(String, BTreeMap<NodeId, BigRational>)>,
    claim: BTreeMap<NodeId, BigRational>,
}

impl ExactInstance {
    /// Exact image of a float instance (each double is converted without rounding).
    pub fn from_instance(instance: &Instance) -> Self {
        let tree = instance.tree().clone();
        let prices = (0..tree.len()).map(|i| exact_from_f64(tree.price_at(i))).collect();
        let models = instance
            .family()
            .models()
            .iter()
            .map(|m| {
                let w = m.weights().iter().map(|(&l, &v)| (l, exact_from_f64(v))).collect();
                (m.name().to_string(), w)
            })
            .collect();
        let claim = instance
            .claim()
            .payoffs()
            .iter()
            .map(|(&l, &v)| (l, exact_from_f64(v)))
            .collect();
        Self {
            tree,
            prices,
            models,
            claim,
        }
    }

    /// Builds from exact node prices, model weights and payoffs on a validated tree.
    pub fn from_parts(
        tree: EventTree,
        prices: &BTreeMap<NodeId, BigRational>,
        models: Vec<(String, BTreeMap<NodeId, BigRational>)>,
        claim: BTreeMap<NodeId, BigRational>,
    ) -> Result<Self, OracleError> {
        let prices = tree
            .node_ids()
            .map(|id| {
                prices
                    .get(&id)
                    .cloned()
                    .ok_or_else(|| OracleError::Malformed(format!("no exact price for node {id}")))
            })
            .collect::<Result<_, _>>()?;
        if let Some(missing) = tree.leaves().find(|l| !claim.contains_key(l)) {
            return Err(OracleError::Malformed(format!("no exact payoff for leaf {missing}")));
        }
        if models.is_empty() {
            return Err(OracleError::Malformed("no models".into()));
        }
        Ok(Self {
            tree,
            prices,
            models,
            claim,
        })
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    /// A leaf is polar iff every model gives it exactly zero weight.
    pub fn polar(&self) -> PolarReport {
        let (qs_support, polar_leaves) = self
            .tree
            .leaves()
            .partition(|l| self.models.iter().any(|(_, w)| w.get(l).is_some_and(|v| v.is_positive())));
        PolarReport {
            polar_leaves,
            qs_support,
        }
    }

    /// Exact `1 + max(|S|, |f|)`.
    pub fn scale(&self) -> BigRational {
        let m = self
            .prices
            .iter()
            .chain(self.claim.values())
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigRational::zero);
        BigRational::one() + m
    }

    fn layout_parts(&self) -> (HedgeLayout, Vec<BigRational>) {
        let layout = HedgeLayout::new(&self.tree, &self.polar());
        let payoffs = layout
            .support
            .iter()
            .map(|&l| self.claim[&self.tree.id_at(l)].clone())
            .collect();
        (layout, payoffs)
    }

    pub fn primal_program(&self) -> ExactLp {
        let (layout, payoffs) = self.layout_parts();
        layout.primal_program(&self.tree, &self.prices, &payoffs)
    }

    pub fn dual_program(&self) -> ExactLp {
        let (layout, payoffs) = self.layout_parts();
        layout.dual_program(&self.tree, &self.prices, &payoffs)
    }
}

/// Exact counterpart of the duality report.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactReport {
    pub primal_price: BigRational,
    pub dual_price: BigRational,
    pub model_sup: BigRational,
    pub model_sup_model: String,
    pub strategy: BTreeMap<NodeId, BigRational>,
    pub dual_measure: BTreeMap<NodeId, BigRational>,
    pub gap: BigRational,
}

pub fn exact_report(instance: &ExactInstance, cap: usize) -> Result<ExactReport, OracleError> {
    let tree = instance.tree();
    let (layout, payoffs) = instance.layout_parts();

    let primal = exact_solve(&layout.primal_program(tree, &instance.prices, &payoffs), cap)?;
    let (primal_price, point) = match primal {
        ExactSolution {
            status: ExactStatus::Optimal,
            value: Some(v),
            point: Some(p),
        } => (v, p),
        other => {
            return Err(OracleError::Inconsistent(format!(
                "superhedging program is {:?}",
                other.status
            )))
        }
    };
    let strategy = layout
        .strategy
        .iter()
        .zip(&point[1..])
        .map(|(&n, h)| (tree.id_at(n), h.clone()))
        .collect();

    let dual = exact_solve(&layout.dual_program(tree, &instance.prices, &payoffs), cap)?;
    let (dual_price, q) = match dual {
        ExactSolution {
            status: ExactStatus::Optimal,
            value: Some(v),
            point: Some(p),
        } => (v, p),
        other => return Err(OracleError::Inconsistent(format!("dual program is {:?}", other.status))),
    };
    let mut dual_measure: BTreeMap<NodeId, BigRational> = tree.leaves().map(|l| (l, BigRational::zero())).collect();
    for (&l, v) in layout.support.iter().zip(q) {
        dual_measure.insert(tree.id_at(l), v);
    }

    let mut best: Option<(BigRational, &str)> = None;
    for (name, w) in &instance.models {
        let e = instance
            .claim
            .iter()
            .fold(BigRational::zero(), |acc, (l, f)| acc + w.get(l).cloned().unwrap_or_default() * f);
        if best.as_ref().is_none_or(|(b, _)| e > *b) {
            best = Some((e, name));
        }
    }
    let (model_sup, name) = best.expect("models nonempty");
    Ok(ExactReport {
        gap: dual_price.clone() - model_sup.clone(),
        primal_price,
        dual_price,
        model_sup,
        model_sup_model: name.to_string(),
        strategy,
        dual_measure,
    })
}

#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub float: DualityReport,
    pub exact: ExactReport,
    /// Largest of the primal, dual and model-supremum deviations.
    pub max_deviation: f64,
    pub agrees: bool,
}

/// Prices an instance along the float path and the exact path and compares.
pub fn cross_check(instance: &Instance, epsilon: f64) -> Result<CrossCheck, OracleError> {
    let exact = exact_report(&ExactInstance::from_instance(instance), DEFAULT_CAP)?;
    let float = hedge::duality_report_with_tol(instance, epsilon)?;
    let max_deviation = [
        (float.primal_price, &exact.primal_price),
        (float.dual_price, &exact.dual_price),
        (float.model_sup, &exact.model_sup),
    ]
    .into_iter()
    .map(|(f, e)| (f - to_f64(e)).abs())
    .fold(0.0, f64::max);
    Ok(CrossCheck {
        agrees: max_deviation <= CROSS_CHECK_TOLERANCE * instance.scale(),
        float,
        exact,
        max_deviation,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("sequence is not convergent: step {step} is {distance:e} from the limit under model {model}")]
    NotConvergent {
        step: usize,
        model: String,
        distance: f64,
    },
    #[error("sequence element {0} is not in the cone")]
    MemberOutsideCone(usize),
    #[error(transparent)]
    Hedge(#[from] HedgeError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosednessReport {
    pub steps: usize,
    /// Largest `E_P|W^n − W| · 2^n` over steps and models; at most 1 by contract.
    pub max_scaled_distance: f64,
    pub limit_in_cone: bool,
}

/// Checks a sequence converging geometrically to `limit` in every seminorm:
/// `E_P|W^n − W| ≤ 2^{−n}` for `n = 1, 2, …`. Each element must be certified
/// in the cone, and the report says whether the limit is.
pub fn closedness_check(instance: &Instance, sequence: &[Claim], limit: &Claim) -> Result<ClosednessReport, ProbeError> {
    let mut max_scaled = 0.0_f64;
    for (k, w) in sequence.iter().enumerate() {
        let step = k + 1;
        let bound = 0.5_f64.powi(step as i32);
        let diff = w.zip_with(limit, |a, b| a - b);
        for m in instance.family().models() {
            let distance = models::seminorm(m, &diff);
            if distance > bound * (1.0 + 1e-12) {
                return Err(ProbeError::NotConvergent {
                    step,
                    model: m.name().to_string(),
                    distance,
                });
            }
            max_scaled = max_scaled.max(distance / bound);
        }
        if !hedge::in_cone(instance, w)? {
            return Err(ProbeError::MemberOutsideCone(step));
        }
    }
    Ok(ClosednessReport {
        steps: sequence.len(),
        max_scaled_distance: max_scaled,
        limit_in_cone: hedge::in_cone(instance, limit)?,
    })
}

fn random_strategy(tree: &EventTree, rng: &mut ChaCha8Rng, scale: f64) -> Strategy {
    let values = tree.interior().map(|n| (n, rng.gen_range(-scale..=scale))).collect();
    Strategy::new(tree, values).expect("covers interior")
}

fn random_nonnegative(tree: &EventTree, rng: &mut ChaCha8Rng) -> Claim {
    Claim::from_fn(tree, |_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) })
}

/// Builds a random cone member `W = (H·S)_T − K` and a sequence
/// `W^n = ((H + 2^{−n}G_n)·S)_T − (K + 2^{−n}J_n)` with `J_n ≥ 0`, scaled so
/// that `E_P|W^n − W| ≤ 2^{−n}` under every model, then runs `closedness_check`.
/// Values on polar leaves are scrambled, since claims are only defined quasi-surely.
pub fn closedness_probe(instance: &Instance, n_steps: usize, seed: u64) -> Result<ClosednessReport, ProbeError> {
    let tree = instance.tree();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = random_strategy(tree, &mut rng, 2.0);
    let k = random_nonnegative(tree, &mut rng);
    let limit = Claim::wealth_of(tree, &h)
        .map_err(HedgeError::from)?
        .zip_with(&k, |w, k| w - k);

    let polar = &instance.polar().polar_leaves;
    let mut sequence = Vec::with_capacity(n_steps);
    for step in 1..=n_steps {
        let g = random_strategy(tree, &mut rng, 1.0);
        let j = random_nonnegative(tree, &mut rng);
        let direction = Claim::wealth_of(tree, &g)
            .map_err(HedgeError::from)?
            .zip_with(&j, |w, j| w - j);
        let norm = models::l1_norm(instance.family(), &direction);
        // shrink so the perturbation is at most 2^{-n} in every seminorm
        let c = 0.5_f64.powi(step as i32) / norm.max(1.0) * 0.999;
        let hn = h.add(&g.scale(c));
        let kn = k.zip_with(&j, |a, b| a + c * b);
        let mut wn = Claim::wealth_of(tree, &hn)
            .map_err(HedgeError::from)?
            .zip_with(&kn, |w, k| w - k);
        if !polar.is_empty() {
            let noise = Claim::from_fn(tree, |l| if polar.contains(&l) { rng.gen_range(-5.0..5.0) } else { 0.0 });
            wn = wn.zip_with(&noise, |a, b| a + b);
        }
        sequence.push(wn);
    }
    closedness_check(instance, &sequence, &limit)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundednessReport {
    /// `max_{P,t} (E_P|(H·S)_t| − E_P|(H·S)_T|)`; non-positive for martingale models.
    pub contraction_excess: f64,
    /// `max_{P,t} (E_P|H_t ΔS_t| − 2 E_P|(H·S)_T|)`.
    pub increment_excess: f64,
    /// `max_P |E_P[(H·S)_T]|`; zero for martingale models.
    pub max_mean_wealth: f64,
}

/// Evaluates the contraction and zero-mean properties of the wealth integral
/// of `strategy` under every model of the instance.
pub fn boundedness_probe(instance: &Instance, strategy: &Strategy) -> Result<BoundednessReport, HedgeError> {
    let tree = instance.tree();
    let horizon = tree.horizon();
    let leaves: Vec<NodeId> = tree.leaves().collect();
    // partial[t][leaf]
    let partial: Vec<Vec<f64>> = (0..=horizon)
        .map(|t| leaves.iter().map(|&l| tree.wealth_at(strategy, l, t)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let mut report = BoundednessReport {
        contraction_excess: f64::NEG_INFINITY,
        increment_excess: f64::NEG_INFINITY,
        max_mean_wealth: 0.0,
    };
    for m in instance.family().models() {
        let w: Vec<f64> = leaves.iter().map(|&l| m.weight(l)).collect();
        let abs_mean = |t: usize| -> f64 { partial[t].iter().zip(&w).map(|(v, p)| p * v.abs()).sum() };
        let terminal = abs_mean(horizon);
        for t in 1..=horizon {
            report.contraction_excess = report.contraction_excess.max(abs_mean(t) - terminal);
            let inc: f64 = partial[t]
                .iter()
                .zip(&partial[t - 1])
                .zip(&w)
                .map(|((a, b), p)| p * (a - b).abs())
                .sum();
            report.increment_excess = report.increment_excess.max(inc - 2.0 * terminal);
        }
        let mean: f64 = partial[horizon].iter().zip(&w).map(|(v, p)| p * v).sum();
        report.max_mean_wealth = report.max_mean_wealth.max(mean.abs());
    }
    Ok(report)
}

/// Runs `lp::solve` and `exact_solve` on the same float program and reports
/// whether they agree in status and, when optimal, in value within `tol · scale`.
pub fn agree_on(lp_float: &LinearProgram<f64>, tol: f64) -> Result<bool, OracleError> {
    let exact = exact_solve(&lp_float.to_exact(), DEFAULT_CAP)?;
    let float = lp::solve(lp_float, lp::DEFAULT_EPSILON).map_err(|e| OracleError::Malformed(e.to_string()))?;
    let status_match = matches!(
        (exact.status, float.status),
        (ExactStatus::Optimal, lp::LpStatus::Optimal)
            | (ExactStatus::Infeasible, lp::LpStatus::Infeasible)
            | (ExactStatus::Unbounded, lp::LpStatus::Unbounded)
    );
    if !status_match {
        return Ok(false);
    }
    Ok(match exact.value {
        Some(v) => {
            let v = to_f64(&v);
            (v - float.objective).abs() <= tol * (1.0 + v.abs())
        }
        None => true,
    })
}
