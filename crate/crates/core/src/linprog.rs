//! Dense two-phase primal simplex returning basic (vertex) optimal solutions.
//!
//! Bland's rule is used for both the entering and the leaving variable, so the
//! method terminates on degenerate programs. Sizes here are tens of rows.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// maximize c x  s.t.  A_le x <= b_le,  A_eq x = b_eq,  x >= 0,
/// x_j = 0 for j in `fixed_zero`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<F> {
    pub objective: Vec<F>,
    pub le_rows: Vec<(Vec<F>, F)>,
    pub eq_rows: Vec<(Vec<F>, F)>,
    /// Columns removed from the program (held at 0).
    pub fixed_zero: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<F> {
    pub x: Vec<F>,
    pub value: F,
    /// Structural columns in the final basis, in row order.
    pub basis: Vec<usize>,
    /// Number of constraint rows after removing redundant equalities.
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<F> {
    Optimal(LpSolution<F>),
    Infeasible,
    Unbounded,
}

impl<F: Scalar> LinearProgram<F> {
    pub fn new(objective: Vec<F>) -> Self {
        LinearProgram {
            objective,
            le_rows: Vec::new(),
            eq_rows: Vec::new(),
            fixed_zero: BTreeSet::new(),
        }
    }

    pub fn columns(&self) -> usize {
        self.objective.len()
    }

    pub fn rows(&self) -> usize {
        self.le_rows.len() + self.eq_rows.len()
    }

    pub fn add_le(&mut self, coeffs: Vec<F>, rhs: F) -> &mut Self {
        self.le_rows.push((coeffs, rhs));
        self
    }

    pub fn add_eq(&mut self, coeffs: Vec<F>, rhs: F) -> &mut Self {
        self.eq_rows.push((coeffs, rhs));
        self
    }

    pub fn fix_zero(&mut self, column: usize) -> &mut Self {
        self.fixed_zero.insert(column);
        self
    }

    pub fn objective_at(&self, x: &[F]) -> F {
        self.objective.iter().zip(x).map(|(&c, &v)| c * v).sum()
    }

    /// Largest violation of any constraint (including bounds and fixings) at `x`.
    pub fn max_violation(&self, x: &[F]) -> F {
        let dot = |row: &[F]| -> F { row.iter().zip(x).map(|(&a, &v)| a * v).sum() };
        let mut worst = F::zero();
        for (row, b) in &self.le_rows {
            worst = worst.max(dot(row) - *b);
        }
        for (row, b) in &self.eq_rows {
            worst = worst.max((dot(row) - *b).abs());
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(-v);
            if self.fixed_zero.contains(&j) {
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    fn check_dimensions(&self) -> Result<()> {
        let n = self.columns();
        let all = self.le_rows.iter().chain(&self.eq_rows);
        for (i, (row, b)) in all.enumerate() {
            if row.len() != n {
                return Err(Error::OutOfRange(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.len()
                )));
            }
            if !b.is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::OutOfRange(format!("row {i} has a non-finite entry")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutOfRange("non-finite objective".into()));
        }
        if let Some(&j) = self.fixed_zero.iter().find(|&&j| j >= n) {
            return Err(Error::OutOfRange(format!("fixed column {j} out of range")));
        }
        Ok(())
    }
}

struct Tableau<F> {
    /// m rows of width `width + 1`; the last entry is the right-hand side.
    rows: Vec<Vec<F>>,
    basis: Vec<usize>,
    width: usize,
    tol: F,
    last_pivot: (usize, usize),
}

const MAX_PIVOTS: usize = 100_000;

impl<F: Scalar> Tableau<F> {
    fn rhs(&self, i: usize) -> F {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != F::zero() {
                for (v, &q) in row.iter_mut().zip(&pivot_row) {
                    *v = *v - f * q;
                }
                row[c] = F::zero();
            }
        }
        self.basis[r] = c;
        self.last_pivot = (r, c);
    }

    /// Maximizes `cost` over columns allowed by `allowed`.
    /// Returns false when the objective is unbounded.
    fn optimize(&mut self, cost: &[F], allowed: &dyn Fn(usize) -> bool) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in 0..self.width {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let z: F = self
                    .rows
                    .iter()
                    .zip(&self.basis)
                    .map(|(row, &b)| cost[b] * row[j])
                    .sum();
                if cost[j] - z > self.tol {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return Ok(true) };
            let mut leaving: Option<(usize, F)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a <= self.tol {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                leaving = match leaving {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - self.tol
                            || (ratio <= best + self.tol && self.basis[i] < self.basis[r])
                        {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
            let Some((r, _)) = leaving else { return Ok(false) };
            self.pivot(r, c);
        }
        let (row, column) = self.last_pivot;
        Err(Error::Numerical {
            row,
            column,
            value: self.rows[row][column].to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Solves `lp` to an optimal basic feasible solution.
pub fn solve_extreme_point<F: Scalar>(lp: &LinearProgram<F>) -> Result<LpOutcome<F>> {
    lp.check_dimensions()?;
    let tol = F::lp_tol();
    let n = lp.columns();
    let active: Vec<usize> = (0..n).filter(|j| !lp.fixed_zero.contains(j)).collect();
    let n_active = active.len();
    let n_le = lp.le_rows.len();
    let m = lp.rows();

    // column layout: active structurals | slacks (one per <= row) | artificials
    let slack0 = n_active;
    let art0 = n_active + n_le;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut n_art = 0;
    let mut art_rows = Vec::new();
    for (i, (coeffs, b)) in lp.le_rows.iter().chain(&lp.eq_rows).enumerate() {
        let flip = *b < F::zero();
        let sign = if flip { -F::one() } else { F::one() };
        let mut row: Vec<F> = active.iter().map(|&j| coeffs[j] * sign).collect();
        row.resize(art0, F::zero());
        if i < n_le {
            row[slack0 + i] = sign;
        }
        rows.push((row, *b * sign, i < n_le && !flip));
        if !(i < n_le && !flip) {
            art_rows.push(i);
            n_art += 1;
        }
    }
    let width = art0 + n_art;
    let mut tableau_rows = Vec::with_capacity(m);
    let mut next_art = art0;
    for (i, (mut row, b, slack_basic)) in rows.into_iter().enumerate() {
        row.resize(width, F::zero());
        if slack_basic {
            basis.push(slack0 + i);
        } else {
            row[next_art] = F::one();
            basis.push(next_art);
            next_art += 1;
        }
        row.push(b);
        tableau_rows.push(row);
    }
    let mut t = Tableau {
        rows: tableau_rows,
        basis,
        width,
        tol,
        last_pivot: (0, 0),
    };

    if n_art > 0 {
        let mut cost = vec![F::zero(); width];
        for c in cost.iter_mut().skip(art0) {
            *c = -F::one();
        }
        t.optimize(&cost, &|_| true)?;
        let infeasibility: F = (0..t.rows.len())
            .filter(|&i| t.basis[i] >= art0)
            .map(|i| t.rhs(i))
            .sum();
        if infeasibility > tol * F::of_usize(m.max(1)) {
            return Ok(LpOutcome::Infeasible);
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art0 {
                let col = (0..art0)
                    .filter(|j| !t.basis.contains(j))
                    .max_by(|&a, &b| {
                        t.rows[i][a]
                            .abs()
                            .partial_cmp(&t.rows[i][b].abs())
                            .expect("finite tableau")
                            .then(b.cmp(&a))
                    });
                match col {
                    Some(c) if t.rows[i][c].abs() > tol => t.pivot(i, c),
                    _ => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![F::zero(); width];
    for (k, &j) in active.iter().enumerate() {
        cost[k] = lp.objective[j];
    }
    if !t.optimize(&cost, &|j| j < art0)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut x = vec![F::zero(); n];
    let mut structural = Vec::new();
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n_active {
            x[active[b]] = t.rhs(i).max(F::zero());
            structural.push(active[b]);
        }
    }
    let residual = lp.max_violation(&x);
    if residual > F::lit(1e-7).max(tol * F::lit(100.0)) {
        let (row, column) = t.last_pivot;
        return Err(Error::Numerical {
            row,
            column,
            value: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(LpOutcome::Optimal(LpSolution {
        value: lp.objective_at(&x),
        x,
        basis: structural,
        rows: t.rows.len(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &LinearProgram<f64>) -> LpSolution<f64> {
        match solve_extreme_point(lp).unwrap() {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn single_upper_bound() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![1.0], 1.0);
        let s = optimal(&lp);
        assert!((s.x[0] - 1.0).abs() < 1e-12);
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![-1.0], -2.0).add_le(vec![1.0], 1.0);
        assert_eq!(solve_extreme_point(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.add_le(vec![-1.0, 1.0], 1.0);
        assert_eq!(solve_extreme_point(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn equalities_and_fixing() {
        // max x0 + 2 x1 + 3 x2, x0 + x1 + x2 = 1, x2 fixed to 0
        let mut lp = LinearProgram::new(vec![1.0, 2.0, 3.0]);
        lp.add_eq(vec![1.0, 1.0, 1.0], 1.0).fix_zero(2);
        let s = optimal(&lp);
        assert_eq!(s.x, vec![0.0, 1.0, 0.0]);
        assert_eq!(s.basis, vec![1]);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, 1.0], 1.0).add_eq(vec![2.0, 2.0], 2.0);
        let s = optimal(&lp);
        assert!((s.value - 1.0).abs() < 1e-12);
        assert_eq!(s.rows, 1);
    }

    #[test]
    fn degenerate_program_terminates() {
        // classic cycling example for Dantzig's rule (Beale)
        let mut lp = LinearProgram::new(vec![0.75, -150.0, 0.02, -6.0]);
        lp.add_le(vec![0.25, -60.0, -0.04, 9.0], 0.0)
            .add_le(vec![0.5, -90.0, -0.02, 3.0], 0.0)
            .add_le(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = optimal(&lp);
        assert!((s.value - 0.05).abs() < 1e-9);
    }

    #[test]
    fn rejects_ragged_rows() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_le(vec![1.0], 1.0);
        assert!(solve_extreme_point(&lp).is_err());
    }
}
