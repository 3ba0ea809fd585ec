//! Dense linear programs and a two-phase simplex solver with Bland's rule.
//!
//! Dual values follow the sensitivity convention `y_i = ∂ optimum / ∂ b_i`,
//! so for a minimisation a `≥` row carries `y_i ≥ 0` and a `≤` row `y_i ≤ 0`
//! (signs flip for maximisation).

use std::fmt::Debug;
use std::ops::Neg;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num};
use thiserror::Error;

/// Scalar field an LP can be stated over (`f64` or exact rationals).
pub trait Scalar: Clone + Debug + PartialOrd + Num + Neg<Output = Self> {}

impl<T: Clone + Debug + PartialOrd + Num + Neg<Output = T>> Scalar for T {}

pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const PIVOT_TOLERANCE: f64 = 1e-10;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coefficients: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

/// Variable bounds; `None` is an infinite bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

impl<T: Scalar> Bounds<T> {
    pub fn free() -> Self {
        Self { lower: None, upper: None }
    }

    pub fn non_negative() -> Self {
        Self {
            lower: Some(T::zero()),
            upper: None,
        }
    }

    pub fn between(lower: T, upper: T) -> Self {
        Self {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("constraint {row} has {got} coefficients, expected {expected}")]
    RowLength { row: usize, got: usize, expected: usize },
    #[error("{0} bounds given for {1} variables")]
    BoundsLength(usize, usize),
    #[error("non-finite data in {0}")]
    NonFinite(String),
    #[error("variable {0} has lower bound above upper bound")]
    EmptyBounds(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T = f64> {
    pub sense: Sense,
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub bounds: Vec<Bounds<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    /// Program with free variables and no constraints.
    pub fn new(sense: Sense, objective: Vec<T>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            bounds: vec![Bounds::free(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_constraint(&mut self, coefficients: Vec<T>, relation: Relation, rhs: T) -> &mut Self {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<Bounds<T>>) -> Self {
        self.bounds = bounds;
        self
    }

    /// Checks row lengths and bound consistency.
    pub fn check_shape(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::BoundsLength(self.bounds.len(), n));
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(LpError::RowLength {
                    row,
                    got: c.coefficients.len(),
                    expected: n,
                });
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                if l > u {
                    return Err(LpError::EmptyBounds(j));
                }
            }
        }
        Ok(())
    }

    /// Converts the data into another scalar field.
    pub fn map_scalars<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LinearProgram<U> {
        LinearProgram {
            sense: self.sense,
            objective: self.objective.iter().map(&f).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coefficients: c.coefficients.iter().map(&f).collect(),
                    relation: c.relation,
                    rhs: f(&c.rhs),
                })
                .collect(),
            bounds: self
                .bounds
                .iter()
                .map(|b| Bounds {
                    lower: b.lower.as_ref().map(&f),
                    upper: b.upper.as_ref().map(&f),
                })
                .collect(),
        }
    }
}

impl LinearProgram<f64> {
    /// Exact rational image of the float data (every finite double is a dyadic rational).
    pub fn to_exact(&self) -> LinearProgram<BigRational> {
        self.map_scalars(|&v| BigRational::from_f64(v).expect("finite LP data"))
    }

    fn check_finite(&self) -> Result<(), LpError> {
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("objective".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() || c.coefficients.iter().any(|v| !v.is_finite()) {
                return Err(LpError::NonFinite(format!("constraint {i}")));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_some_and(f64::is_nan) || b.upper.is_some_and(f64::is_nan) {
                return Err(LpError::NonFinite(format!("bounds of variable {j}")));
            }
        }
        Ok(())
    }

    /// Normalises infinite float bounds to `None`.
    fn normalized_bounds(&self) -> Vec<(Option<f64>, Option<f64>)> {
        self.bounds
            .iter()
            .map(|b| {
                (
                    b.lower.filter(|v| v.is_finite()),
                    b.upper.filter(|v| v.is_finite()),
                )
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.complementarity)
    }
}

/// Evidence for a non-optimal status.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Row multipliers `y` (sign-consistent with each relation) such that
    /// `max_{x in box} (Σ y_i a_i)·x < Σ y_i b_i`, which no feasible point can satisfy.
    Farkas(Vec<f64>),
    /// A feasible point plus a recession direction along which the objective improves without bound.
    Ray { point: Vec<f64>, direction: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub dual: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = lower + x'`
    Shift { col: usize, lower: f64 },
    /// `x = upper − x'`
    Flip { col: usize, upper: f64 },
    /// `x = x⁺ − x⁻`
    Split { pos: usize, neg: usize },
}

/// `min c·x, A x = b, x ≥ 0, b ≥ 0` built from a general program.
struct StandardForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    vars: Vec<VarMap>,
    /// For each standard row, the original constraint it came from and the sign applied.
    row_origin: Vec<Option<(usize, f64)>>,
}

impl StandardForm {
    fn build(lp: &LinearProgram<f64>, rows: &[usize]) -> Self {
        let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
        let bounds = lp.normalized_bounds();

        let mut ncols = 0;
        let mut vars = Vec::with_capacity(lp.num_vars());
        let mut upper_rows = Vec::new();
        for (j, &(lower, upper)) in bounds.iter().enumerate() {
            let map = match (lower, upper) {
                (Some(l), u) => {
                    if let Some(u) = u {
                        upper_rows.push((j, ncols, u - l));
                    }
                    VarMap::Shift { col: ncols, lower: l }
                }
                (None, Some(u)) => VarMap::Flip { col: ncols, upper: u },
                (None, None) => {
                    ncols += 1;
                    VarMap::Split {
                        pos: ncols - 1,
                        neg: ncols,
                    }
                }
            };
            ncols += 1;
            vars.push(map);
        }
        let structural = ncols;
        let slack_count = rows
            .iter()
            .filter(|&&i| lp.constraints[i].relation != Relation::Eq)
            .count()
            + upper_rows.len();
        let width = structural + slack_count;

        let mut c = vec![0.0; width];
        for (j, map) in vars.iter().enumerate() {
            let cj = sign * lp.objective[j];
            match *map {
                VarMap::Shift { col, .. } => c[col] = cj,
                VarMap::Flip { col, .. } => c[col] = -cj,
                VarMap::Split { pos, neg } => {
                    c[pos] = cj;
                    c[neg] = -cj;
                }
            }
        }

        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut row_origin = Vec::new();
        let mut slack = structural;
        for &i in rows {
            let con = &lp.constraints[i];
            let mut row = vec![0.0; width];
            let mut rhs = con.rhs;
            for (j, map) in vars.iter().enumerate() {
                let aij = con.coefficients[j];
                match *map {
                    VarMap::Shift { col, lower } => {
                        row[col] = aij;
                        rhs -= aij * lower;
                    }
                    VarMap::Flip { col, upper } => {
                        row[col] = -aij;
                        rhs -= aij * upper;
                    }
                    VarMap::Split { pos, neg } => {
                        row[pos] = aij;
                        row[neg] = -aij;
                    }
                }
            }
            match con.relation {
                Relation::Le => {
                    row[slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            let s = if rhs < 0.0 { -1.0 } else { 1.0 };
            a.push(row.into_iter().map(|v| s * v).collect());
            b.push(s * rhs);
            row_origin.push(Some((i, s)));
        }
        for (_, col, width_ub) in upper_rows {
            let mut row = vec![0.0; width];
            row[col] = 1.0;
            row[slack] = 1.0;
            slack += 1;
            a.push(row);
            b.push(width_ub);
            row_origin.push(None);
        }

        Self {
            a,
            b,
            c,
            vars,
            row_origin,
        }
    }

    fn recover(&self, xs: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|map| match *map {
                VarMap::Shift { col, lower } => lower + xs[col],
                VarMap::Flip { col, upper } => upper - xs[col],
                VarMap::Split { pos, neg } => xs[pos] - xs[neg],
            })
            .collect()
    }

    fn recover_direction(&self, ds: &[f64]) -> Vec<f64> {
        self.vars
            .iter()
            .map(|map| match *map {
                VarMap::Shift { col, .. } => ds[col],
                VarMap::Flip { col, .. } => -ds[col],
                VarMap::Split { pos, neg } => ds[pos] - ds[neg],
            })
            .collect()
    }
}

/// Dense tableau over `[A | I_art]` with an explicit reduced-cost row.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
    structural: usize,
    pivots: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let m = sf.a.len();
        let n = sf.c.len();
        let rows = sf
            .a
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let mut full = row.clone();
                full.extend((0..m).map(|k| if k == r { 1.0 } else { 0.0 }));
                full
            })
            .collect();
        Self {
            rows,
            rhs: sf.b.clone(),
            basis: (n..n + m).collect(),
            reduced: vec![0.0; n + m],
            structural: n,
            pivots: 0,
        }
    }

    fn width(&self) -> usize {
        self.reduced.len()
    }

    /// Sets the reduced-cost row for column costs `cost`.
    fn price_out(&mut self, cost: &[f64]) {
        let mut d = cost.to_vec();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        self.reduced = d;
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
                self.rhs[k] -= f * pivot_rhs;
                if self.rhs[k] < 0.0 && self.rhs[k] > -PIVOT_TOLERANCE {
                    self.rhs[k] = 0.0;
                }
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.reduced[col] = 0.0;
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    /// Runs simplex iterations with Bland's rule over columns `< allowed`.
    fn run(&mut self, allowed: usize) -> Result<PhaseOutcome, LpError> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::NumericalFailure("pivot limit exceeded".into()));
            }
            let Some(col) = (0..allowed).find(|&j| self.reduced[j] < -PIVOT_TOLERANCE) else {
                return Ok(PhaseOutcome::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a <= PIVOT_TOLERANCE {
                    continue;
                }
                let ratio = self.rhs[r] / a;
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if ratio < bratio && !tie || tie && self.basis[r] < self.basis[br] {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match best {
                None => return Ok(PhaseOutcome::Unbounded(col)),
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }

    fn basic_solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.width()];
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs[r];
        }
        x
    }
}

/// Solves a program with the two-phase simplex method and certifies the result.
///
/// On `Optimal` the primal and dual residuals and the complementarity gap are
/// all at most `epsilon`, otherwise `NumericalFailure` is returned. All-zero
/// constraint rows are the only rows removed before solving.
pub fn solve(lp: &LinearProgram<f64>, epsilon: f64) -> Result<LpSolution, LpError> {
    lp.check_shape()?;
    lp.check_finite()?;
    let m = lp.num_constraints();

    let mut kept = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coefficients.iter().any(|&v| v != 0.0) {
            kept.push(i);
            continue;
        }
        let ok = match c.relation {
            Relation::Le => 0.0 <= c.rhs + epsilon,
            Relation::Ge => 0.0 >= c.rhs - epsilon,
            Relation::Eq => c.rhs.abs() <= epsilon,
        };
        if !ok {
            // 0 rel b is violated: the row alone certifies infeasibility
            let mut y = vec![0.0; m];
            y[i] = if c.rhs > 0.0 { 1.0 } else { -1.0 };
            return Ok(non_optimal(lp, LpStatus::Infeasible, Certificate::Farkas(y)));
        }
    }

    let sf = StandardForm::build(lp, &kept);
    let rows = sf.a.len();
    let mut tab = Tableau::new(&sf);
    let width = tab.width();
    let structural = tab.structural;

    // phase one: minimise the sum of artificials
    let mut cost1 = vec![0.0; width];
    cost1[structural..].iter_mut().for_each(|v| *v = 1.0);
    tab.price_out(&cost1);
    tab.run(structural)?;
    let infeasibility: f64 = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(&b, _)| b >= structural)
        .map(|(_, &v)| v)
        .sum();
    let b_scale = 1.0 + sf.b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if infeasibility > epsilon * b_scale {
        // y_r = 1 − d_art(r) solves the phase-one dual: A'y ≤ 0, b'y > 0
        let y_std: Vec<f64> = (0..rows).map(|r| 1.0 - tab.reduced[structural + r]).collect();
        let mut y = vec![0.0; m];
        for (r, origin) in sf.row_origin.iter().enumerate() {
            if let Some((i, s)) = origin {
                y[*i] = s * y_std[r];
            }
        }
        return Ok(non_optimal(lp, LpStatus::Infeasible, Certificate::Farkas(y)));
    }

    // drive remaining artificials out of the basis where possible
    for r in 0..rows {
        if tab.basis[r] >= structural {
            if let Some(col) = (0..structural).find(|&j| tab.rows[r][j].abs() > PIVOT_TOLERANCE) {
                tab.pivot(r, col);
            }
        }
    }

    let mut cost2 = sf.c.clone();
    cost2.resize(width, 0.0);
    tab.price_out(&cost2);
    match tab.run(structural)? {
        PhaseOutcome::Unbounded(col) => {
            let xs = tab.basic_solution();
            let mut ds = vec![0.0; width];
            ds[col] = 1.0;
            for (r, &b) in tab.basis.iter().enumerate() {
                ds[b] = -tab.rows[r][col];
            }
            let point = sf.recover(&xs[..structural]);
            let direction = sf.recover_direction(&ds[..structural]);
            let mut sol = non_optimal(lp, LpStatus::Unbounded, Certificate::Ray { point, direction });
            sol.primal = sf.recover(&xs[..structural]);
            Ok(sol)
        }
        PhaseOutcome::Optimal => {
            let xs = tab.basic_solution();
            let x = sf.recover(&xs[..structural]);
            // y_std = c_B B⁻¹ = −(reduced cost of the artificial column)
            let mut y = vec![0.0; m];
            let sense = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
            for (r, origin) in sf.row_origin.iter().enumerate() {
                if let Some((i, s)) = origin {
                    y[*i] = sense * s * -tab.reduced[structural + r];
                }
            }
            let (residuals, objective, dual_objective) = certify(lp, &x, &y);
            if residuals.max() > epsilon {
                return Err(LpError::NumericalFailure(format!(
                    "residuals {residuals:?} exceed tolerance {epsilon:e}"
                )));
            }
            let gap = (objective - dual_objective).abs();
            if gap > epsilon * (1.0 + objective.abs()) {
                return Err(LpError::NumericalFailure(format!(
                    "primal {objective} and dual {dual_objective} objectives disagree"
                )));
            }
            Ok(LpSolution {
                status: LpStatus::Optimal,
                primal: x,
                dual: y,
                objective,
                dual_objective,
                residuals,
                certificate: None,
            })
        }
    }
}

fn non_optimal(lp: &LinearProgram<f64>, status: LpStatus, certificate: Certificate) -> LpSolution {
    let objective = match (status, lp.sense) {
        (LpStatus::Infeasible, Sense::Minimize) | (LpStatus::Unbounded, Sense::Maximize) => f64::INFINITY,
        _ => f64::NEG_INFINITY,
    };
    LpSolution {
        status,
        primal: Vec::new(),
        dual: Vec::new(),
        objective,
        dual_objective: objective,
        residuals: Residuals::default(),
        certificate: Some(certificate),
    }
}

/// Primal/dual residuals, primal objective and dual objective of a candidate pair.
pub fn certify(lp: &LinearProgram<f64>, x: &[f64], y: &[f64]) -> (Residuals, f64, f64) {
    let bounds = lp.normalized_bounds();
    // work in minimisation form
    let sense = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let c: Vec<f64> = lp.objective.iter().map(|v| sense * v).collect();
    let ym: Vec<f64> = y.iter().map(|v| sense * v).collect();

    let mut res = Residuals::default();
    let mut dual_obj = 0.0;
    let mut z = c.clone();
    for (i, con) in lp.constraints.iter().enumerate() {
        let ax: f64 = con.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
        let slack = ax - con.rhs;
        let violation = match con.relation {
            Relation::Le => slack.max(0.0),
            Relation::Ge => (-slack).max(0.0),
            Relation::Eq => slack.abs(),
        };
        res.primal = res.primal.max(violation);
        let yi = ym[i];
        let sign_violation = match con.relation {
            Relation::Le => yi.max(0.0),
            Relation::Ge => (-yi).max(0.0),
            Relation::Eq => 0.0,
        };
        res.dual = res.dual.max(sign_violation);
        if con.relation != Relation::Eq {
            res.complementarity = res.complementarity.max((yi * slack).abs());
        }
        dual_obj += yi * con.rhs;
        for (zj, a) in z.iter_mut().zip(&con.coefficients) {
            *zj -= yi * a;
        }
    }
    for (j, &(lower, upper)) in bounds.iter().enumerate() {
        if let Some(l) = lower {
            res.primal = res.primal.max(l - x[j]);
        }
        if let Some(u) = upper {
            res.primal = res.primal.max(x[j] - u);
        }
        let zj = z[j];
        if zj > 0.0 {
            match lower {
                Some(l) => {
                    dual_obj += zj * l;
                    res.complementarity = res.complementarity.max(zj * (x[j] - l).abs());
                }
                None => res.dual = res.dual.max(zj),
            }
        } else if zj < 0.0 {
            match upper {
                Some(u) => {
                    dual_obj += zj * u;
                    res.complementarity = res.complementarity.max(-zj * (u - x[j]).abs());
                }
                None => res.dual = res.dual.max(-zj),
            }
        }
    }
    let objective: f64 = lp.objective.iter().zip(x).map(|(a, v)| a * v).sum();
    (res, objective, sense * dual_obj)
}

/// Checks a Farkas certificate: sign-consistent multipliers with
/// `max_{x in box} g·x < y·b`, where `g = Σ y_i a_i`.
pub fn farkas_holds(lp: &LinearProgram<f64>, y: &[f64], tol: f64) -> bool {
    let n = lp.num_vars();
    let mut g = vec![0.0; n];
    let mut yb = 0.0;
    for (con, &yi) in lp.constraints.iter().zip(y) {
        let sign_ok = match con.relation {
            Relation::Le => yi <= tol,
            Relation::Ge => yi >= -tol,
            Relation::Eq => true,
        };
        if !sign_ok {
            return false;
        }
        for (gj, a) in g.iter_mut().zip(&con.coefficients) {
            *gj += yi * a;
        }
        yb += yi * con.rhs;
    }
    let mut sup = 0.0;
    for (gj, (lower, upper)) in g.iter().zip(lp.normalized_bounds()) {
        if gj.abs() <= tol {
            continue;
        }
        let bound = if *gj > 0.0 { upper } else { lower };
        match bound {
            Some(v) => sup += gj * v,
            None => return false,
        }
    }
    sup < yb - tol
}

/// Checks an unboundedness ray: the point is feasible, the direction is in the
/// recession cone and strictly improves the objective.
pub fn ray_holds(lp: &LinearProgram<f64>, point: &[f64], direction: &[f64], tol: f64) -> bool {
    let (res, _, _) = certify(lp, point, &vec![0.0; lp.num_constraints()]);
    if res.primal > tol {
        return false;
    }
    for con in &lp.constraints {
        let ad: f64 = con.coefficients.iter().zip(direction).map(|(a, d)| a * d).sum();
        let ok = match con.relation {
            Relation::Le => ad <= tol,
            Relation::Ge => ad >= -tol,
            Relation::Eq => ad.abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    for (d, (lower, upper)) in direction.iter().zip(lp.normalized_bounds()) {
        if lower.is_some() && *d < -tol || upper.is_some() && *d > tol {
            return false;
        }
    }
    let cd: f64 = lp.objective.iter().zip(direction).map(|(c, d)| c * d).sum();
    match lp.sense {
        Sense::Minimize => cd < -tol,
        Sense::Maximize => cd > tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var(sense: Sense) -> LinearProgram {
        LinearProgram::new(sense, vec![1.0])
    }

    #[test]
    fn single_lower_bound_row() {
        let mut lp = one_var(Sense::Minimize);
        lp.add_constraint(vec![1.0], Relation::Ge, 3.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 3.0).abs() < 1e-12);
        assert!((sol.dual[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = one_var(Sense::Minimize);
        lp.add_constraint(vec![1.0], Relation::Ge, 3.0);
        lp.add_constraint(vec![1.0], Relation::Le, 2.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let Some(Certificate::Farkas(y)) = &sol.certificate else {
            panic!("missing certificate")
        };
        assert!(farkas_holds(&lp, y, 1e-9));
    }

    #[test]
    fn unbounded_with_ray() {
        let mut lp = one_var(Sense::Minimize);
        lp.add_constraint(vec![1.0], Relation::Le, 2.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
        let Some(Certificate::Ray { point, direction }) = &sol.certificate else {
            panic!("missing ray")
        };
        assert!(ray_holds(&lp, point, direction, 1e-9));
    }

    #[test]
    fn maximisation_with_bounds() {
        // max 3x + 2y, x + y ≤ 4, x + 3y ≤ 6, 0 ≤ x ≤ 3, y ≥ 0  →  x=3, y=1, value 11
        let mut lp = LinearProgram::new(Sense::Maximize, vec![3.0, 2.0])
            .with_bounds(vec![Bounds::between(0.0, 3.0), Bounds::non_negative()]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Le, 4.0);
        lp.add_constraint(vec![1.0, 3.0], Relation::Le, 6.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 11.0).abs() < 1e-9);
        assert!((sol.primal[0] - 3.0).abs() < 1e-9);
        assert!((sol.primal[1] - 1.0).abs() < 1e-9);
        // first row binds with shadow price 2, second is slack
        assert!((sol.dual[0] - 2.0).abs() < 1e-9);
        assert!(sol.dual[1].abs() < 1e-9);
        assert!((sol.dual_objective - 11.0).abs() < 1e-9);
    }

    #[test]
    fn zero_rows_are_dropped_or_certified() {
        let mut lp = one_var(Sense::Minimize);
        lp.add_constraint(vec![1.0], Relation::Ge, 1.0);
        lp.add_constraint(vec![0.0], Relation::Le, 5.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.dual.len(), 2);
        assert_eq!(sol.dual[1], 0.0);

        lp.add_constraint(vec![0.0], Relation::Eq, 1.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let Some(Certificate::Farkas(y)) = &sol.certificate else {
            panic!()
        };
        assert!(farkas_holds(&lp, y, 1e-9));
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 stated twice, min x − y with x, y ≥ 0 → −1
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, -1.0])
            .with_bounds(vec![Bounds::non_negative(), Bounds::non_negative()]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![-0.75, 150.0, -0.02, 6.0])
            .with_bounds(vec![Bounds::non_negative(); 4]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn upper_only_and_fixed_variables() {
        // max x + y with x ≤ 2 (no lower bound), y fixed at 1.5, x + y ≥ −10
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]).with_bounds(vec![
            Bounds { lower: None, upper: Some(2.0) },
            Bounds::between(1.5, 1.5),
        ]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Ge, -10.0);
        let sol = solve(&lp, DEFAULT_EPSILON).unwrap();
        assert!((sol.objective - 3.5).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let mut lp = one_var(Sense::Minimize);
        lp.add_constraint(vec![1.0, 2.0], Relation::Ge, 3.0);
        assert!(matches!(solve(&lp, DEFAULT_EPSILON), Err(LpError::RowLength { .. })));
        let mut lp = one_var(Sense::Minimize);
        lp.add_constraint(vec![f64::NAN], Relation::Ge, 3.0);
        assert!(matches!(solve(&lp, DEFAULT_EPSILON), Err(LpError::NonFinite(_))));
    }
}
