//! Multiple-mixing correlations along offset vectors, the offset
//! self-joinings they define, and relative (fiber-averaged) mixing for skew
//! products.

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::joining::{JoiningTensor, MeasureTensor, Shape};
use crate::rational::{abs_diff, exact_sqrt, Rational};
use crate::skew::{as_automorphism, SkewProduct};
use crate::space::{same_space, Automorphism, MeasurableSet};

/// Positive offsets `k_1, …, k_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OffsetVector(Vec<u64>);

impl OffsetVector {
    pub fn new(offsets: Vec<u64>) -> Result<Self> {
        if offsets.contains(&0) {
            return invalid("offsets must be positive");
        }
        Ok(Self(offsets))
    }

    pub fn offsets(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Partial sums `k_1, k_1 + k_2, …`.
    pub fn cumulative(&self) -> Vec<u64> {
        self.0
            .iter()
            .scan(0, |acc, &k| {
                *acc += k;
                Some(*acc)
            })
            .collect()
    }
}

/// `μ(A_0 ∩ t^{k_1}A_1 ∩ t^{k_1+k_2}A_2 ∩ …)`, images under powers of `t`.
pub fn correlation(t: &Automorphism, sets: &[MeasurableSet], k: &OffsetVector) -> Result<Rational> {
    if sets.len() != k.len() + 1 {
        return invalid(format!(
            "{} sets need {} offsets, got {}",
            sets.len(),
            sets.len().saturating_sub(1),
            k.len()
        ));
    }
    if sets.iter().any(|s| !same_space(s.space(), t.space())) {
        return invalid("sets must live on the automorphism's space");
    }
    let mut acc = sets[0].clone();
    for (set, s) in sets[1..].iter().zip(k.cumulative()) {
        acc = acc.intersect(&set.image(&t.power(s as i64))?)?;
    }
    Ok(acc.measure())
}

/// `max_{k ∈ {1..k_range}^n} |correlation(t, sets, k) − Π μ(A_i)|`.
pub fn mixing_deviation_sweep(
    t: &Automorphism,
    sets: &[MeasurableSet],
    k_range: u64,
) -> Result<Rational> {
    if k_range < 1 {
        return invalid("sweep range must be at least 1");
    }
    if sets.is_empty() {
        return invalid("need at least one set");
    }
    let n = sets.len() - 1;
    let product: Rational = sets.iter().map(MeasurableSet::measure).product();
    if n == 0 {
        return Ok(abs_diff(&sets[0].measure(), &product));
    }
    let shape = Shape::new(vec![k_range as usize; n]);
    let deviations: Vec<Rational> = (0..shape.len())
        .into_par_iter()
        .map(|i| {
            let k = OffsetVector(shape.tuple(i).into_iter().map(|x| x as u64 + 1).collect());
            correlation(t, sets, &k).map(|c| abs_diff(&c, &product))
        })
        .collect::<Result<_>>()?;
    Ok(deviations.into_iter().max().unwrap_or_else(Rational::zero))
}

/// Order `n+1` self-joining `ν(z_0, …, z_n) = λ(z_0)` when
/// `z_i = r^{−(k_1+…+k_i)} z_0`, else 0. Pairing it with an indicator
/// product reproduces [`correlation`].
pub fn offset_joining(r: &Automorphism, k: &OffsetVector) -> JoiningTensor {
    let space = r.space();
    let powers: Vec<Automorphism> = k
        .cumulative()
        .iter()
        .map(|&s| r.power(-(s as i64)))
        .collect();
    let factors = vec![Arc::clone(space); k.len() + 1];
    let entries = (0..space.atom_count()).map(|z0| {
        let tuple = std::iter::once(z0)
            .chain(powers.iter().map(|p| p.apply(z0)))
            .collect::<Vec<_>>();
        (tuple, space.weight(z0).clone())
    });
    let measure = MeasureTensor::from_sparse(factors, entries.collect::<Vec<_>>())
        .expect("a graph measure has mass one");
    JoiningTensor::new(measure).expect("powers of r preserve the measure")
}

/// `∫ Π_i χ_{C_i}(z_i) dν`.
pub fn pair_with_indicators(v: &MeasureTensor, sets: &[MeasurableSet]) -> Result<Rational> {
    if sets.len() != v.order() {
        return invalid("one set per tensor factor");
    }
    Ok(v.nonzero()
        .filter(|(t, _)| t.iter().zip(sets).all(|(&z, s)| s.contains(z)))
        .map(|(_, val)| val)
        .sum())
}

/// Conditional expectation onto base functions:
/// `(πf)(x) = Σ_y f(x, y) μ_fiber(y)`.
pub fn fiber_projection(r: &SkewProduct, f: &[Rational]) -> Result<Vec<Rational>> {
    let (nb, nf) = (r.base().atom_count(), r.fiber().atom_count());
    if f.len() != nb * nf {
        return invalid(format!(
            "function has {} values, expected {}",
            f.len(),
            nb * nf
        ));
    }
    Ok(f.chunks(nf)
        .map(|row| {
            row.iter()
                .zip(r.fiber().weights())
                .map(|(v, w)| v * w)
                .sum()
        })
        .collect())
}

/// Squared `L²(μ_base)` deviation, with an exact root when one exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct L2Deviation {
    pub squared: Rational,
}

impl L2Deviation {
    pub fn exact(&self) -> Option<Rational> {
        exact_sqrt(&self.squared)
    }

    pub fn to_f64(&self) -> f64 {
        crate::rational::to_f64(&self.squared).sqrt()
    }
}

fn horizontal(r: &SkewProduct, b: &MeasurableSet) -> Result<MeasurableSet> {
    if !same_space(b.space(), r.fiber()) {
        return invalid("horizontal sets are given by fiber subsets");
    }
    let nf = r.fiber().atom_count();
    MeasurableSet::new(
        r.joint_space(),
        (0..r.base().atom_count()).flat_map(|x| b.atoms().map(move |y| x * nf + y)),
    )
}

fn vertical(r: &SkewProduct, a: &MeasurableSet) -> Result<MeasurableSet> {
    if !same_space(a.space(), r.base()) {
        return invalid("vertical sets are given by base subsets");
    }
    let nf = r.fiber().atom_count();
    MeasurableSet::new(
        r.joint_space(),
        a.atoms().flat_map(|x| (0..nf).map(move |y| x * nf + y)),
    )
}

/// Distance in `L²(μ_base)` between `π χ_{H_0 ∩ R^{k_1}H_1 ∩ …}` and the
/// constant `Π μ(B_i)`, for horizontal sets `H_i = X × B_i`.
pub fn relative_mixing_deviation(
    r: &SkewProduct,
    horizontal_sets: &[MeasurableSet],
    k: &OffsetVector,
) -> Result<L2Deviation> {
    let sets: Vec<MeasurableSet> = horizontal_sets
        .iter()
        .map(|b| horizontal(r, b))
        .collect::<Result<_>>()?;
    if sets.len() != k.len() + 1 {
        return invalid("need one more set than offsets");
    }
    let map = as_automorphism(r);
    let mut acc = sets[0].clone();
    for (set, s) in sets[1..].iter().zip(k.cumulative()) {
        acc = acc.intersect(&set.image(&map.power(s as i64))?)?;
    }
    let target: Rational = horizontal_sets.iter().map(MeasurableSet::measure).product();
    let projected = fiber_projection(r, &acc.indicator())?;
    let squared = projected
        .iter()
        .zip(r.base().weights())
        .map(|(v, w)| {
            let d = v - &target;
            w * &d * &d
        })
        .sum();
    Ok(L2Deviation { squared })
}

/// `λ(V_0 ∩ R^{k_1}(V_1 ∩ H_1) ∩ … ∩ R^{k_1+…+k_m}(V_m ∩ H_m))` with
/// vertical sets from base subsets and horizontal sets from fiber subsets.
pub fn mixed_set_correlation(
    r: &SkewProduct,
    vertical_sets: &[MeasurableSet],
    horizontal_sets: &[MeasurableSet],
    k: &OffsetVector,
) -> Result<Rational> {
    if vertical_sets.len() != horizontal_sets.len() + 1 || horizontal_sets.len() != k.len() {
        return invalid("need m+1 vertical sets, m horizontal sets and m offsets");
    }
    let map = as_automorphism(r);
    let mut acc = vertical(r, &vertical_sets[0])?;
    for ((v, h), s) in vertical_sets[1..]
        .iter()
        .zip(horizontal_sets)
        .zip(k.cumulative())
    {
        let cell = vertical(r, v)?.intersect(&horizontal(r, h)?)?;
        acc = acc.intersect(&cell.image(&map.power(s as i64))?)?;
    }
    Ok(acc.measure())
}

/// All-ones function on base × fiber.
pub fn constant_one(r: &SkewProduct) -> Vec<Rational> {
    vec![Rational::one(); r.base().atom_count() * r.fiber().atom_count()]
}
