//! Exact rational linear programming.
//!
//! Dense two-phase primal simplex with Bland's rule for both the entering and
//! the leaving variable, so results are reproducible bit for bit. Every optimal
//! outcome carries row duals and reduced costs that [`verify_optimal`] checks
//! independently of the solver.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{dot, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBound {
    pub fn nonnegative() -> Self {
        Self {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Self {
            lower: None,
            upper: None,
        }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        Self {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn fixed(value: Rational) -> Self {
        Self::between(value.clone(), value)
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub sense: RowSense,
    pub rhs: Rational,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: String,
        found: usize,
        expected: usize,
    },
}

/// Optimal primal/dual pair. `dual[i]` is the sensitivity of the optimal value
/// to the right-hand side of constraint `i`; `reduced_costs = c - Aᵀ·dual`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub value: Rational,
    pub primal: Vec<Rational>,
    pub dual: Vec<Rational>,
    pub reduced_costs: Vec<Rational>,
}

/// A feasible point and a recession direction along which the objective
/// improves without bound.
#[derive(Debug, Clone, PartialEq)]
pub struct UnboundedRay {
    pub point: Vec<Rational>,
    pub direction: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(OptimalSolution),
    Infeasible,
    Unbounded(UnboundedRay),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal(_) => LpStatus::Optimal,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded(_) => LpStatus::Unbounded,
        }
    }

    pub fn optimal(&self) -> Option<&OptimalSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_optimal(self) -> Option<OptimalSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    /// A program over `num_vars` nonnegative variables with a zero objective.
    pub fn new(direction: Direction, num_vars: usize) -> Self {
        Self {
            direction,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![VarBound::nonnegative(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, var: usize, coeff: Rational) {
        self.objective[var] = coeff;
    }

    pub fn set_bound(&mut self, var: usize, bound: VarBound) {
        self.bounds[var] = bound;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, sense: RowSense, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    pub fn add_sparse_constraint(
        &mut self,
        terms: &[(usize, Rational)],
        sense: RowSense,
        rhs: Rational,
    ) {
        let mut coeffs = vec![Rational::zero(); self.num_vars()];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.add_constraint(coeffs, sense, rhs);
    }

    fn check_dimensions(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::DimensionMismatch {
                what: "bounds".into(),
                found: self.bounds.len(),
                expected: n,
            });
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::DimensionMismatch {
                    what: format!("constraint {i}"),
                    found: c.coeffs.len(),
                    expected: n,
                });
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }
}

// x_j = offset + Σ sign·y_k over the listed standard-form columns.
struct VarMap {
    offset: Rational,
    cols: Vec<(usize, bool)>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    obj: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for x in self.rows[r].iter_mut() {
                if !x.is_zero() {
                    *x *= &inv;
                }
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..=self.width)
            .filter(|&k| !pivot_row[k].is_zero())
            .collect();
        let eliminate = |row: &mut Vec<Rational>| {
            if row[c].is_zero() {
                return;
            }
            let f = row[c].clone();
            for &k in &nz {
                let delta = &f * &pivot_row[k];
                row[k] -= &delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs Bland-rule iterations on the current objective row. Returns
    /// `Some(col)` if column `col` proves unboundedness.
    fn optimize(&mut self, allowed: &[bool]) -> Option<usize> {
        loop {
            let entering = (0..self.width).find(|&j| allowed[j] && self.obj[j].is_negative())?;
            let mut leaving: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][entering];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &leaving {
                    None => true,
                    Some((best_r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*best_r])
                    }
                };
                if better {
                    leaving = Some((r, ratio));
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, entering),
                None => return Some(entering),
            }
        }
    }
}

/// Solves a linear program exactly.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome, LpError> {
    lp.check_dimensions()?;
    let n = lp.num_vars();

    // Variable substitution to y >= 0.
    let mut maps = Vec::with_capacity(n);
    let mut ny = 0usize;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &lp.bounds {
        let map = match (&b.lower, &b.upper) {
            (Some(l), u) => {
                let col = ny;
                ny += 1;
                if let Some(u) = u {
                    bound_rows.push((col, u - l));
                }
                VarMap {
                    offset: l.clone(),
                    cols: vec![(col, true)],
                }
            }
            (None, Some(u)) => {
                let col = ny;
                ny += 1;
                VarMap {
                    offset: u.clone(),
                    cols: vec![(col, false)],
                }
            }
            (None, None) => {
                let col = ny;
                ny += 2;
                VarMap {
                    offset: Rational::zero(),
                    cols: vec![(col, true), (col + 1, false)],
                }
            }
        };
        maps.push(map);
    }

    // Standard-form rows: (coefficients over y, slack coefficient, rhs).
    struct StdRow {
        coeffs: Vec<Rational>,
        slack: i8,
        rhs: Rational,
    }
    let mut std_rows: Vec<StdRow> = Vec::new();
    for c in &lp.constraints {
        let mut coeffs = vec![Rational::zero(); ny];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if !maps[j].offset.is_zero() {
                rhs -= a * &maps[j].offset;
            }
            for &(col, pos) in &maps[j].cols {
                if pos {
                    coeffs[col] += a;
                } else {
                    coeffs[col] -= a;
                }
            }
        }
        let slack = match c.sense {
            RowSense::Le => 1,
            RowSense::Ge => -1,
            RowSense::Eq => 0,
        };
        std_rows.push(StdRow { coeffs, slack, rhs });
    }
    for (col, cap) in &bound_rows {
        let mut coeffs = vec![Rational::zero(); ny];
        coeffs[*col] = Rational::one();
        std_rows.push(StdRow {
            coeffs,
            slack: 1,
            rhs: cap.clone(),
        });
    }

    let m = std_rows.len();
    let num_orig_rows = lp.constraints.len();
    let slack_cols: Vec<Option<usize>> = {
        let mut next = ny;
        std_rows
            .iter()
            .map(|r| {
                if r.slack != 0 {
                    next += 1;
                    Some(next - 1)
                } else {
                    None
                }
            })
            .collect()
    };
    let n_slack = slack_cols.iter().filter(|s| s.is_some()).count();
    let mut row_sign = vec![true; m];
    let mut init_col = vec![0usize; m];
    let mut artificial_rows = Vec::new();
    for (i, r) in std_rows.iter_mut().enumerate() {
        if r.rhs.is_negative() {
            row_sign[i] = false;
            r.rhs = -&r.rhs;
            for x in r.coeffs.iter_mut() {
                if !x.is_zero() {
                    *x = -&*x;
                }
            }
            r.slack = -r.slack;
        }
        if r.slack == 1 {
            init_col[i] = slack_cols[i].unwrap();
        } else {
            artificial_rows.push(i);
        }
    }
    let first_art = ny + n_slack;
    for (k, &i) in artificial_rows.iter().enumerate() {
        init_col[i] = first_art + k;
    }
    let width = first_art + artificial_rows.len();

    let mut rows = Vec::with_capacity(m);
    for (i, r) in std_rows.into_iter().enumerate() {
        let mut row = r.coeffs;
        row.resize(width + 1, Rational::zero());
        if let Some(s) = slack_cols[i] {
            row[s] = Rational::integer(r.slack as i64);
        }
        if init_col[i] >= first_art {
            row[init_col[i]] = Rational::one();
        }
        row[width] = r.rhs;
        rows.push(row);
    }

    let mut tab = Tableau {
        rows,
        obj: vec![Rational::zero(); width + 1],
        basis: init_col.clone(),
        width,
    };

    // Phase 1.
    if !artificial_rows.is_empty() {
        for &i in &artificial_rows {
            for k in 0..=width {
                if k < first_art && !tab.rows[i][k].is_zero() {
                    let v = tab.rows[i][k].clone();
                    tab.obj[k] -= &v;
                }
            }
            let v = tab.rows[i][width].clone();
            tab.obj[width] -= &v;
        }
        let allowed: Vec<bool> = (0..width).map(|_| true).collect();
        if tab.optimize(&allowed).is_some() {
            unreachable!("phase one objective is bounded below by zero");
        }
        if !tab.obj[width].is_zero() {
            return Ok(LpOutcome::Infeasible);
        }
        for r in 0..m {
            if tab.basis[r] >= first_art {
                if let Some(c) = (0..first_art).find(|&c| !tab.rows[r][c].is_zero()) {
                    tab.pivot(r, c);
                }
            }
        }
    }

    // Phase 2 objective in terms of y (minimization).
    let mut cost = vec![Rational::zero(); width];
    for (j, map) in maps.iter().enumerate() {
        let c = match lp.direction {
            Direction::Minimize => lp.objective[j].clone(),
            Direction::Maximize => -&lp.objective[j],
        };
        if c.is_zero() {
            continue;
        }
        for &(col, pos) in &map.cols {
            cost[col] = if pos { c.clone() } else { -&c };
        }
    }
    let mut obj = vec![Rational::zero(); width + 1];
    obj[..width].clone_from_slice(&cost);
    for r in 0..m {
        let cb = &cost[tab.basis[r]];
        if cb.is_zero() {
            continue;
        }
        for k in 0..=width {
            if !tab.rows[r][k].is_zero() {
                let delta = cb * &tab.rows[r][k];
                obj[k] -= &delta;
            }
        }
    }
    tab.obj = obj;
    let allowed: Vec<bool> = (0..width).map(|j| j < first_art).collect();
    let unbounded_col = tab.optimize(&allowed);

    let mut y = vec![Rational::zero(); width];
    for r in 0..m {
        y[tab.basis[r]] = tab.rhs(r).clone();
    }
    let to_x = |y: &[Rational], with_offset: bool| -> Vec<Rational> {
        maps.iter()
            .map(|map| {
                let mut v = if with_offset {
                    map.offset.clone()
                } else {
                    Rational::zero()
                };
                for &(col, pos) in &map.cols {
                    if pos {
                        v += &y[col];
                    } else {
                        v -= &y[col];
                    }
                }
                v
            })
            .collect()
    };
    let primal = to_x(&y, true);

    if let Some(col) = unbounded_col {
        let mut dy = vec![Rational::zero(); width];
        dy[col] = Rational::one();
        for r in 0..m {
            dy[tab.basis[r]] = -&tab.rows[r][col];
        }
        return Ok(LpOutcome::Unbounded(UnboundedRay {
            point: primal,
            direction: to_x(&dy, false),
        }));
    }

    let dual: Vec<Rational> = (0..num_orig_rows)
        .map(|i| {
            let mut v = Rational::zero();
            for r in 0..m {
                let cb = &cost[tab.basis[r]];
                let t = &tab.rows[r][init_col[i]];
                if !cb.is_zero() && !t.is_zero() {
                    v += cb * t;
                }
            }
            if !row_sign[i] {
                v = -v;
            }
            match lp.direction {
                Direction::Minimize => v,
                Direction::Maximize => -v,
            }
        })
        .collect();
    let reduced_costs: Vec<Rational> = (0..n)
        .map(|j| {
            let mut d = lp.objective[j].clone();
            for (c, yi) in lp.constraints.iter().zip(&dual) {
                if !c.coeffs[j].is_zero() && !yi.is_zero() {
                    d -= &c.coeffs[j] * yi;
                }
            }
            d
        })
        .collect();
    let value = lp.objective_value(&primal);
    Ok(LpOutcome::Optimal(OptimalSolution {
        value,
        primal,
        dual,
        reduced_costs,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("primal infeasible at {0}")]
    PrimalInfeasible(String),
    #[error("dual sign violated at {0}")]
    DualSign(String),
    #[error("complementary slackness violated at {0}")]
    Slackness(String),
    #[error("objective mismatch: primal {primal}, dual {dual}")]
    ObjectiveMismatch { primal: Rational, dual: Rational },
    #[error("ray check failed: {0}")]
    Ray(String),
}

fn row_activity(c: &Constraint, x: &[Rational]) -> Rational {
    dot(&c.coeffs, x)
}

fn satisfies(sense: RowSense, lhs: &Rational, rhs: &Rational) -> bool {
    match sense {
        RowSense::Le => lhs <= rhs,
        RowSense::Eq => lhs == rhs,
        RowSense::Ge => lhs >= rhs,
    }
}

fn check_primal(lp: &LinearProgram, x: &[Rational]) -> Result<(), CertificateError> {
    for (j, (xj, b)) in x.iter().zip(&lp.bounds).enumerate() {
        if b.lower.as_ref().is_some_and(|l| xj < l) || b.upper.as_ref().is_some_and(|u| xj > u) {
            return Err(CertificateError::PrimalInfeasible(format!("bound of x{j}")));
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if !satisfies(c.sense, &row_activity(c, x), &c.rhs) {
            return Err(CertificateError::PrimalInfeasible(format!("row {i}")));
        }
    }
    Ok(())
}

/// Independent optimality check: primal feasibility, dual sign conditions,
/// complementary slackness and equality of primal and dual objectives.
pub fn verify_optimal(lp: &LinearProgram, sol: &OptimalSolution) -> Result<(), CertificateError> {
    let x = &sol.primal;
    check_primal(lp, x)?;
    let min = lp.direction == Direction::Minimize;
    for (i, (c, y)) in lp.constraints.iter().zip(&sol.dual).enumerate() {
        let ok = match (c.sense, min) {
            (RowSense::Eq, _) => true,
            (RowSense::Ge, true) | (RowSense::Le, false) => !y.is_negative(),
            (RowSense::Le, true) | (RowSense::Ge, false) => !y.is_positive(),
        };
        if !ok {
            return Err(CertificateError::DualSign(format!("row {i}")));
        }
        if !y.is_zero() && row_activity(c, x) != c.rhs {
            return Err(CertificateError::Slackness(format!("row {i}")));
        }
    }
    let mut dual_value = dot(
        &lp.constraints
            .iter()
            .map(|c| c.rhs.clone())
            .collect::<Vec<_>>(),
        &sol.dual,
    );
    for j in 0..lp.num_vars() {
        let mut d = lp.objective[j].clone();
        for (c, y) in lp.constraints.iter().zip(&sol.dual) {
            d -= &c.coeffs[j] * y;
        }
        if d != sol.reduced_costs[j] {
            return Err(CertificateError::DualSign(format!("reduced cost of x{j}")));
        }
        if d.is_zero() {
            continue;
        }
        // A nonzero reduced cost must push against an active bound.
        let wants_lower = d.is_positive() == min;
        let bound = if wants_lower {
            &lp.bounds[j].lower
        } else {
            &lp.bounds[j].upper
        };
        match bound {
            Some(v) if *v == x[j] => dual_value += &d * v,
            _ => return Err(CertificateError::Slackness(format!("x{j}"))),
        }
    }
    let primal_value = lp.objective_value(x);
    if primal_value != sol.value || dual_value != primal_value {
        return Err(CertificateError::ObjectiveMismatch {
            primal: primal_value,
            dual: dual_value,
        });
    }
    Ok(())
}

/// Checks that `ray.point` is feasible and `ray.direction` is an improving
/// recession direction.
pub fn verify_unbounded(lp: &LinearProgram, ray: &UnboundedRay) -> Result<(), CertificateError> {
    check_primal(lp, &ray.point)?;
    let d = &ray.direction;
    for (j, (dj, b)) in d.iter().zip(&lp.bounds).enumerate() {
        if (b.lower.is_some() && dj.is_negative()) || (b.upper.is_some() && dj.is_positive()) {
            return Err(CertificateError::Ray(format!(
                "direction leaves bound of x{j}"
            )));
        }
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if !satisfies(c.sense, &row_activity(c, d), &Rational::zero()) {
            return Err(CertificateError::Ray(format!("direction leaves row {i}")));
        }
    }
    let slope = lp.objective_value(d);
    let improving = match lp.direction {
        Direction::Minimize => slope.is_negative(),
        Direction::Maximize => slope.is_positive(),
    };
    if !improving {
        return Err(CertificateError::Ray("objective does not improve".into()));
    }
    Ok(())
}

/// The Lagrangian dual. Finite bounds other than `x >= 0` are first moved
/// into explicit rows; the dual variables follow the row order, bound rows last.
pub fn dual_program(lp: &LinearProgram) -> LinearProgram {
    let n = lp.num_vars();
    let mut rows: Vec<Constraint> = lp.constraints.clone();
    let mut sign_free = vec![false; n];
    for (j, b) in lp.bounds.iter().enumerate() {
        let plain = b.lower.as_ref().is_some_and(|l| l.is_zero()) && b.upper.is_none();
        if plain {
            continue;
        }
        sign_free[j] = true;
        let unit = |j: usize| {
            let mut e = vec![Rational::zero(); n];
            e[j] = Rational::one();
            e
        };
        if let Some(l) = &b.lower {
            rows.push(Constraint {
                coeffs: unit(j),
                sense: RowSense::Ge,
                rhs: l.clone(),
            });
        }
        if let Some(u) = &b.upper {
            rows.push(Constraint {
                coeffs: unit(j),
                sense: RowSense::Le,
                rhs: u.clone(),
            });
        }
    }
    let min = lp.direction == Direction::Minimize;
    let mut dual = LinearProgram::new(
        if min {
            Direction::Maximize
        } else {
            Direction::Minimize
        },
        rows.len(),
    );
    for (i, r) in rows.iter().enumerate() {
        dual.objective[i] = r.rhs.clone();
        dual.bounds[i] = match (r.sense, min) {
            (RowSense::Eq, _) => VarBound::free(),
            (RowSense::Ge, true) | (RowSense::Le, false) => VarBound::nonnegative(),
            (RowSense::Le, true) | (RowSense::Ge, false) => VarBound {
                lower: None,
                upper: Some(Rational::zero()),
            },
        };
    }
    for j in 0..n {
        let coeffs: Vec<Rational> = rows.iter().map(|r| r.coeffs[j].clone()).collect();
        let sense = if sign_free[j] {
            RowSense::Eq
        } else if min {
            RowSense::Le
        } else {
            RowSense::Ge
        };
        dual.add_constraint(coeffs, sense, lp.objective[j].clone());
    }
    dual
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qvec};

    #[test]
    fn max_x_bounded_by_three() {
        let mut lp = LinearProgram::new(Direction::Maximize, 1);
        lp.set_objective(0, q(1, 1));
        lp.set_bound(0, VarBound::free());
        lp.add_constraint(qvec(&[1]), RowSense::Le, q(3, 1));
        let out = solve(&lp).unwrap();
        let sol = out.optimal().expect("optimal");
        assert_eq!(sol.value, q(3, 1));
        assert_eq!(sol.dual, qvec(&[1]));
        verify_optimal(&lp, sol).unwrap();
    }

    #[test]
    fn max_x_unbounded_with_ray() {
        let mut lp = LinearProgram::new(Direction::Maximize, 1);
        lp.set_objective(0, q(1, 1));
        lp.set_bound(0, VarBound::free());
        lp.add_constraint(qvec(&[1]), RowSense::Ge, q(0, 1));
        match solve(&lp).unwrap() {
            LpOutcome::Unbounded(ray) => {
                assert!(ray.direction[0].is_positive());
                verify_unbounded(&lp, &ray).unwrap();
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(Direction::Minimize, 1);
        lp.set_bound(0, VarBound::free());
        lp.add_constraint(qvec(&[1]), RowSense::Ge, q(1, 1));
        lp.add_constraint(qvec(&[1]), RowSense::Le, q(0, 1));
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let mut lp = LinearProgram::new(Direction::Minimize, 2);
        lp.add_constraint(qvec(&[1]), RowSense::Ge, q(1, 1));
        assert!(matches!(solve(&lp), Err(LpError::DimensionMismatch { .. })));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance.
        let mut lp = LinearProgram::new(Direction::Minimize, 4);
        for (j, c) in [q(-3, 4), q(20, 1), q(-1, 2), q(6, 1)]
            .into_iter()
            .enumerate()
        {
            lp.set_objective(j, c);
        }
        lp.add_constraint(
            vec![q(1, 4), q(-8, 1), q(-1, 1), q(9, 1)],
            RowSense::Le,
            q(0, 1),
        );
        lp.add_constraint(
            vec![q(1, 2), q(-12, 1), q(-1, 2), q(3, 1)],
            RowSense::Le,
            q(0, 1),
        );
        lp.add_constraint(qvec(&[0, 0, 1, 0]), RowSense::Le, q(1, 1));
        let out = solve(&lp).unwrap();
        let sol = out.optimal().unwrap();
        assert_eq!(sol.value, q(-5, 4));
        verify_optimal(&lp, sol).unwrap();
    }

    #[test]
    fn bounded_and_shifted_variables() {
        // min x - y, 1 <= x <= 4, y <= 2, x + y >= 2
        let mut lp = LinearProgram::new(Direction::Minimize, 2);
        lp.set_objective(0, q(1, 1));
        lp.set_objective(1, q(-1, 1));
        lp.set_bound(0, VarBound::between(q(1, 1), q(4, 1)));
        lp.set_bound(
            1,
            VarBound {
                lower: None,
                upper: Some(q(2, 1)),
            },
        );
        lp.add_constraint(qvec(&[1, 1]), RowSense::Ge, q(2, 1));
        let sol = solve(&lp).unwrap().into_optimal().unwrap();
        assert_eq!(sol.value, q(-1, 1));
        verify_optimal(&lp, &sol).unwrap();
        let dual = solve(&dual_program(&lp)).unwrap().into_optimal().unwrap();
        assert_eq!(dual.value, sol.value);
    }
}
