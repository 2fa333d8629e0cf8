//! The polytope of diagonal-invariant self-joinings with prescribed face
//! independence, explored by exact linear programming.
//!
//! Variables are the tensor entries. Constraints: one equality
//! `v(g t) = v(t)` per generator and tuple, and `marginal_F = μ^m` for every
//! `m`-face `F` (the latter also fixes the total mass).

use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::joining::{product_joining, subsets, sup_distance, JoiningTensor, MeasureTensor, Shape};
use crate::rational::{abs_diff, Rational};
use crate::simplex::{LpResult, Tableau};
use crate::space::ActionGenerators;

pub const MAX_ORDER: usize = 4;
pub const MAX_ENTRIES: usize = 65536;

#[derive(Clone, Debug)]
pub struct PolytopeSpec {
    action: ActionGenerators,
    order: usize,
    independence_level: usize,
}

impl PolytopeSpec {
    pub fn new(action: ActionGenerators, order: usize, independence_level: usize) -> Result<Self> {
        if order < 2 {
            return invalid("order must be at least 2");
        }
        if independence_level < 1 || independence_level >= order {
            return invalid(format!(
                "independence level must lie in 1..{order}, got {independence_level}"
            ));
        }
        if order > MAX_ORDER {
            return Err(Error::ResourceLimit(format!(
                "order {order} exceeds {MAX_ORDER}"
            )));
        }
        let atoms = action.space().atom_count();
        let size = (0..order).try_fold(1usize, |acc, _| acc.checked_mul(atoms));
        if size.is_none_or(|s| s > MAX_ENTRIES) {
            return Err(Error::ResourceLimit(format!(
                "{atoms}^{order} entries exceed {MAX_ENTRIES}"
            )));
        }
        Ok(Self {
            action,
            order,
            independence_level,
        })
    }

    pub fn action(&self) -> &ActionGenerators {
        &self.action
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn independence_level(&self) -> usize {
        self.independence_level
    }

    pub fn tensor_size(&self) -> usize {
        self.action.space().atom_count().pow(self.order as u32)
    }

    fn factors(&self) -> Vec<Arc<crate::space::FiniteSpace>> {
        vec![Arc::clone(self.action.space()); self.order]
    }

    fn constraints(&self) -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let atoms = self.action.space().atom_count();
        let shape = Shape::new(vec![atoms; self.order]);
        let n = shape.len();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for g in self.action.generators() {
            for (i, t) in shape.tuples().enumerate() {
                let image: Vec<usize> = t.iter().map(|&x| g.apply(x)).collect();
                let j = shape.index(&image);
                if j == i {
                    continue;
                }
                let mut row = vec![Rational::zero(); n];
                row[j] += Rational::from_integer(1.into());
                row[i] -= Rational::from_integer(1.into());
                a.push(row);
                b.push(Rational::zero());
            }
        }
        let weights = self.action.space().weights();
        for face in subsets(self.order, self.independence_level) {
            let face_shape = Shape::new(vec![atoms; face.len()]);
            let mut rows = vec![vec![Rational::zero(); n]; face_shape.len()];
            for (i, t) in shape.tuples().enumerate() {
                let sub: Vec<usize> = face.iter().map(|&c| t[c]).collect();
                rows[face_shape.index(&sub)][i] = Rational::from_integer(1.into());
            }
            for (u, row) in face_shape.tuples().zip(rows) {
                a.push(row);
                b.push(u.iter().map(|&x| &weights[x]).product());
            }
        }
        (a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub optimum: Rational,
    pub witness: Option<JoiningTensor>,
}

/// A polytope with a precomputed feasible basis; every objective starts
/// from the same basis, so results do not depend on call order.
#[derive(Clone, Debug)]
pub struct JoiningPolytope {
    spec: PolytopeSpec,
    tableau: Option<Tableau>,
}

impl JoiningPolytope {
    pub fn new(spec: PolytopeSpec) -> Result<Self> {
        let (a, b) = spec.constraints();
        let tableau = Tableau::feasible(&a, &b, spec.tensor_size())?;
        Ok(Self { spec, tableau })
    }

    pub fn spec(&self) -> &PolytopeSpec {
        &self.spec
    }

    pub fn is_feasible(&self) -> bool {
        self.tableau.is_some()
    }

    fn witness(&self, x: Vec<Rational>) -> JoiningTensor {
        let measure =
            MeasureTensor::new(self.spec.factors(), x).expect("feasible point is a measure");
        JoiningTensor::new(measure).expect("face constraints fix the edges")
    }

    fn solve(&self, objective: &[Rational], maximize: bool) -> Result<LpOutcome> {
        if objective.len() != self.spec.tensor_size() {
            return invalid(format!(
                "objective has {} entries, tensor has {}",
                objective.len(),
                self.spec.tensor_size()
            ));
        }
        let Some(tab) = &self.tableau else {
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                optimum: Rational::zero(),
                witness: None,
            });
        };
        let result = if maximize {
            tab.maximize(objective)?
        } else {
            tab.minimize(objective)?
        };
        match result {
            LpResult::Optimal { value, x } => Ok(LpOutcome {
                status: LpStatus::Optimal,
                optimum: value,
                witness: Some(self.witness(x)),
            }),
            LpResult::Unbounded => unreachable!("entries of a probability tensor are bounded"),
        }
    }

    pub fn maximize(&self, objective: &[Rational]) -> Result<LpOutcome> {
        self.solve(objective, true)
    }

    pub fn minimize(&self, objective: &[Rational]) -> Result<LpOutcome> {
        self.solve(objective, false)
    }
}

/// Maximizes `objective · v` over the polytope.
pub fn optimize(spec: &PolytopeSpec, objective: &[Rational]) -> Result<LpOutcome> {
    JoiningPolytope::new(spec.clone())?.maximize(objective)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivialityCertificate {
    pub trivial: bool,
    pub witness: Option<JoiningTensor>,
    pub max_deviation: Rational,
}

/// Maximizes and minimizes every coordinate. The polytope is the single
/// point `μⁿ` iff every optimum equals the `μⁿ` entry; otherwise the
/// computed vertex farthest from `μⁿ` is returned.
pub fn certify_triviality(spec: &PolytopeSpec) -> Result<TrivialityCertificate> {
    let polytope = JoiningPolytope::new(spec.clone())?;
    let product = product_joining(&spec.factors())?;
    let n = spec.tensor_size();
    let runs: Vec<(usize, bool)> = (0..n).flat_map(|i| [(i, true), (i, false)]).collect();
    let outcomes: Vec<LpOutcome> = runs
        .par_iter()
        .map(|&(i, maximize)| {
            let mut objective = vec![Rational::zero(); n];
            objective[i] = Rational::from_integer(1.into());
            polytope.solve(&objective, maximize)
        })
        .collect::<Result<_>>()?;

    let mut trivial = true;
    let mut best: Option<(Rational, JoiningTensor)> = None;
    for (&(i, _), outcome) in runs.iter().zip(outcomes) {
        if outcome.status == LpStatus::Infeasible {
            return Err(Error::PreconditionViolation(
                "polytope is empty, which cannot happen for a measure-preserving action".into(),
            ));
        }
        if abs_diff(&outcome.optimum, &product.entries()[i]).is_zero() {
            continue;
        }
        trivial = false;
        let witness = outcome.witness.expect("optimal outcome carries a witness");
        let d = sup_distance(&witness, &product)?;
        if best.as_ref().is_none_or(|(bd, _)| d > *bd) {
            best = Some((d, witness));
        }
    }
    Ok(match best {
        Some((d, w)) => TrivialityCertificate {
            trivial,
            witness: Some(w),
            max_deviation: d,
        },
        None => TrivialityCertificate {
            trivial,
            witness: None,
            max_deviation: Rational::zero(),
        },
    })
}
