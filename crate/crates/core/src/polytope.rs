//! The polytope of normalized, order-positive martingale functionals.
//!
//! Every element is written `q = Lᵀλ` with `λ ≥ 0` over the rows of a test
//! matrix `L`. For state-based orders the rows are Diracs, so `λ` is `q`
//! restricted to the non-polar states; for expectation orders `λ` is a conic
//! decomposition over the priors. The constraints on `λ` are `Σ q = 1` and
//! `q·g = 0` (linear markets) or `q·g ≤ 0` (cone markets) for every generator.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::nullspace;
use crate::lp::{self, Direction, LinearProgram, RowSense, VarBound};
use crate::market::{ConeMode, Payoff, ValidatedMarket};
use crate::order::OrderStructure;
use crate::rational::{dot, Rational};

/// Largest state space for which [`MartingalePolytope::vertices`] runs.
pub const VERTEX_ENUMERATION_CAP: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("the martingale polytope is empty")]
    EmptyPolytope,
    #[error("vertex enumeration is limited to {cap} states, got {states}")]
    TooLarge { states: usize, cap: usize },
}

/// Maximizer of a linear functional over the polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPoint {
    pub value: Rational,
    pub measure: Vec<Rational>,
    pub weights: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MartingalePolytope {
    num_states: usize,
    rows: Vec<Vec<Rational>>,
    mode: ConeMode,
    /// Per generator, its value under each row: `(L g)_k`.
    generator_rows: Vec<Vec<Rational>>,
    /// `L·1`.
    row_mass: Vec<Rational>,
    state_based: bool,
}

fn dirac_rows(n: usize, set: &[usize]) -> Vec<Vec<Rational>> {
    set.iter()
        .map(|&s| {
            let mut row = vec![Rational::zero(); n];
            row[s] = Rational::one();
            row
        })
        .collect()
}

/// The polytope of martingale functionals that are absolutely continuous
/// with respect to the order.
pub fn martingale_polytope(market: &ValidatedMarket, ord: &OrderStructure) -> MartingalePolytope {
    MartingalePolytope::from_rows(market, ord.test_matrix().to_vec(), ord.is_state_based())
}

impl MartingalePolytope {
    fn from_rows(market: &ValidatedMarket, rows: Vec<Vec<Rational>>, state_based: bool) -> Self {
        let generator_rows = market
            .generators()
            .iter()
            .map(|g| rows.iter().map(|r| dot(r, &g.payoff)).collect())
            .collect();
        let row_mass = rows.iter().map(|r| r.iter().sum()).collect();
        Self {
            num_states: market.num_states(),
            rows,
            mode: market.mode(),
            generator_rows,
            row_mass,
            state_based,
        }
    }

    /// Martingale probability measures supported in `set`.
    pub fn supported_on(market: &ValidatedMarket, set: &[usize]) -> Self {
        Self::from_rows(market, dirac_rows(market.num_states(), set), true)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Rows of the parametrisation `q = Lᵀλ`.
    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn is_state_based(&self) -> bool {
        self.state_based
    }

    pub fn measure_of(&self, weights: &[Rational]) -> Vec<Rational> {
        let mut q = vec![Rational::zero(); self.num_states];
        for (w, row) in weights.iter().zip(&self.rows) {
            if w.is_zero() {
                continue;
            }
            for (acc, v) in q.iter_mut().zip(row) {
                if !v.is_zero() {
                    *acc += w * v;
                }
            }
        }
        q
    }

    /// LP over `λ` with the polytope constraints and the given objective.
    pub fn program(&self, direction: Direction, objective: Vec<Rational>) -> LinearProgram {
        let k = self.rows.len();
        let mut prog = LinearProgram::new(direction, k);
        for (j, c) in objective.into_iter().enumerate() {
            prog.set_objective(j, c);
        }
        prog.add_constraint(self.row_mass.clone(), RowSense::Eq, Rational::one());
        let sense = match self.mode {
            ConeMode::Linear => RowSense::Eq,
            ConeMode::Cone => RowSense::Le,
        };
        for g in &self.generator_rows {
            if g.iter().all(|v| v.is_zero()) {
                continue;
            }
            prog.add_constraint(g.clone(), sense, Rational::zero());
        }
        prog
    }

    fn run(&self, direction: Direction, objective: Vec<Rational>) -> Option<SupportPoint> {
        let sol = lp::solve(&self.program(direction, objective))
            .expect("polytope programs are well formed")
            .into_optimal()?;
        Some(SupportPoint {
            value: sol.value,
            measure: self.measure_of(&sol.primal),
            weights: sol.primal,
        })
    }

    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        self.run(Direction::Maximize, vec![Rational::zero(); self.rows.len()])
            .map(|p| p.measure)
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    /// `sup q·x` over the polytope; `None` when it is empty.
    pub fn maximize(&self, x: &[Rational]) -> Option<SupportPoint> {
        let objective = self.rows.iter().map(|r| dot(r, x)).collect();
        self.run(Direction::Maximize, objective)
    }

    pub fn minimize(&self, x: &[Rational]) -> Option<SupportPoint> {
        let objective = self.rows.iter().map(|r| dot(r, x)).collect();
        self.run(Direction::Minimize, objective)
    }

    /// Largest weight any element can put on row `k` of its decomposition.
    pub fn max_row_weight(&self, k: usize) -> Option<SupportPoint> {
        let mut objective = vec![Rational::zero(); self.rows.len()];
        objective[k] = Rational::one();
        self.run(Direction::Maximize, objective)
    }

    /// Largest mass an element can put on `state`.
    pub fn max_state_mass(&self, state: usize) -> Option<SupportPoint> {
        self.maximize(&Payoff::dirac(self.num_states, state))
    }

    /// Exact membership test.
    pub fn contains(&self, q: &[Rational]) -> bool {
        if q.len() != self.num_states
            || q.iter().any(|v| v.is_negative())
            || !q.iter().sum::<Rational>().is_one()
        {
            return false;
        }
        // Find λ ≥ 0 with Lᵀλ = q; the martingale constraints then follow from q.
        let k = self.rows.len();
        let mut prog = LinearProgram::new(Direction::Minimize, k);
        for s in 0..self.num_states {
            let coeffs = self.rows.iter().map(|r| r[s].clone()).collect();
            prog.add_constraint(coeffs, RowSense::Eq, q[s].clone());
        }
        let Some(sol) = lp::solve(&prog).ok().and_then(|o| o.into_optimal()) else {
            return false;
        };
        self.generator_rows.iter().all(|g| {
            let v = dot(g, &sol.primal);
            match self.mode {
                ConeMode::Linear => v.is_zero(),
                ConeMode::Cone => !v.is_positive(),
            }
        })
    }

    /// Extreme points, sorted lexicographically.
    pub fn vertices(&self) -> Result<Vec<Vec<Rational>>, PolytopeError> {
        if self.num_states > VERTEX_ENUMERATION_CAP {
            return Err(PolytopeError::TooLarge {
                states: self.num_states,
                cap: VERTEX_ENUMERATION_CAP,
            });
        }
        let k = self.rows.len();
        // Homogenised cone over (λ, t): equalities Σ mass·λ = t and, in
        // linear markets, (Lg)·λ = 0; inequalities λ ≥ 0, t ≥ 0, and in cone
        // markets −(Lg)·λ ≥ 0.
        let mut equalities: Vec<Vec<Rational>> = Vec::new();
        let mut eq = self.row_mass.clone();
        eq.push(-Rational::one());
        equalities.push(eq);
        let mut inequalities: Vec<Vec<Rational>> = (0..=k)
            .map(|i| {
                let mut e = vec![Rational::zero(); k + 1];
                e[i] = Rational::one();
                e
            })
            .collect();
        for g in &self.generator_rows {
            let mut row: Vec<Rational> = g.clone();
            row.push(Rational::zero());
            match self.mode {
                ConeMode::Linear => equalities.push(row),
                ConeMode::Cone => inequalities.push(row.into_iter().map(|v| -v).collect()),
            }
        }
        let basis = nullspace(&equalities, k + 1);
        let reduced: Vec<Vec<Rational>> = inequalities
            .iter()
            .map(|a| basis.iter().map(|b| dot(a, b)).collect())
            .collect();
        let rays = double_description(&reduced, basis.len());
        let mut points: Vec<Vec<Rational>> = Vec::new();
        for y in rays {
            let x: Vec<Rational> = (0..=k)
                .map(|i| basis.iter().zip(&y).map(|(b, yi)| &b[i] * yi).sum())
                .collect();
            let t = &x[k];
            if !t.is_positive() {
                continue;
            }
            let lambda: Vec<Rational> = x[..k].iter().map(|v| v / t).collect();
            let q = self.measure_of(&lambda);
            if !points.contains(&q) {
                points.push(q);
            }
        }
        points.sort();
        if !self.state_based {
            points = drop_non_extreme(points);
        }
        Ok(points)
    }
}

/// Keeps the points that are not convex combinations of the others.
fn drop_non_extreme(points: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    let keep: Vec<bool> = (0..points.len())
        .map(|i| {
            let others: Vec<&Vec<Rational>> = points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, p)| p)
                .collect();
            !in_convex_hull(&points[i], &others)
        })
        .collect();
    points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// Whether `x` is a convex combination of `points`.
pub fn in_convex_hull(x: &[Rational], points: &[&Vec<Rational>]) -> bool {
    convex_weights(x, points).is_some()
}

/// Convex weights expressing `x` through `points`, if any.
pub fn convex_weights(x: &[Rational], points: &[&Vec<Rational>]) -> Option<Vec<Rational>> {
    if points.is_empty() {
        return None;
    }
    let mut prog = LinearProgram::new(Direction::Minimize, points.len());
    prog.add_constraint(
        vec![Rational::one(); points.len()],
        RowSense::Eq,
        Rational::one(),
    );
    for (s, xs) in x.iter().enumerate() {
        prog.add_constraint(
            points.iter().map(|p| p[s].clone()).collect(),
            RowSense::Eq,
            xs.clone(),
        );
    }
    for j in 0..points.len() {
        prog.set_bound(j, VarBound::nonnegative());
    }
    lp::solve(&prog).ok()?.into_optimal().map(|s| s.primal)
}

fn normalize(mut v: Vec<Rational>) -> Vec<Rational> {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        let scale = first.abs().recip();
        for x in v.iter_mut() {
            *x *= &scale;
        }
    }
    v
}

/// Extreme rays of the pointed cone `{y ∈ ℝ^d : A y ≥ 0}` (Motzkin's double
/// description method). Returns an empty list when the cone is `{0}`.
fn double_description(a: &[Vec<Rational>], d: usize) -> Vec<Vec<Rational>> {
    // Start from the whole space: d lines, no rays.
    let mut lines: Vec<Vec<Rational>> = (0..d)
        .map(|i| {
            let mut e = vec![Rational::zero(); d];
            e[i] = Rational::one();
            e
        })
        .collect();
    // Each ray carries the set of processed constraints it makes tight.
    let mut rays: Vec<(Vec<Rational>, Vec<usize>)> = Vec::new();
    for (idx, row) in a.iter().enumerate() {
        if let Some(pos) = lines.iter().position(|l| !dot(row, l).is_zero()) {
            let mut l0 = lines.remove(pos);
            let mut v0 = dot(row, &l0);
            if v0.is_negative() {
                l0 = l0.into_iter().map(|x| -x).collect();
                v0 = -v0;
            }
            let project = |v: &[Rational]| -> Vec<Rational> {
                let f = dot(row, v) / &v0;
                v.iter().zip(&l0).map(|(x, y)| x - &(&f * y)).collect()
            };
            lines = lines.iter().map(|l| project(l)).collect();
            for (r, tight) in rays.iter_mut() {
                *r = normalize(project(r));
                tight.push(idx);
            }
            // l0 is tight on every earlier constraint (it was a line).
            rays.push((normalize(l0), (0..idx).collect()));
            continue;
        }
        let values: Vec<Rational> = rays.iter().map(|(r, _)| dot(row, r)).collect();
        let mut next: Vec<(Vec<Rational>, Vec<usize>)> = Vec::new();
        for (i, (r, tight)) in rays.iter().enumerate() {
            if values[i].is_positive() {
                next.push((r.clone(), tight.clone()));
            } else if values[i].is_zero() {
                let mut t = tight.clone();
                t.push(idx);
                next.push((r.clone(), t));
            }
        }
        let pos: Vec<usize> = (0..rays.len())
            .filter(|&i| values[i].is_positive())
            .collect();
        let neg: Vec<usize> = (0..rays.len())
            .filter(|&i| values[i].is_negative())
            .collect();
        let lin_dim = lines.len();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<usize> = rays[p]
                    .1
                    .iter()
                    .copied()
                    .filter(|c| rays[n].1.contains(c))
                    .collect();
                if common.len() + 2 + lin_dim < d {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|o| o == p || o == n || !common.iter().all(|c| rays[o].1.contains(c)));
                if !adjacent {
                    continue;
                }
                let vp = &values[p];
                let vn = &values[n];
                let combo: Vec<Rational> = rays[n]
                    .0
                    .iter()
                    .zip(&rays[p].0)
                    .map(|(xn, xp)| &(vp * xn) - &(vn * xp))
                    .collect();
                let mut t = common;
                t.push(idx);
                next.push((normalize(combo), t));
            }
        }
        rays = next;
    }
    debug_assert!(lines.is_empty(), "cone must be pointed");
    rays.into_iter().map(|(r, _)| r).collect()
}
