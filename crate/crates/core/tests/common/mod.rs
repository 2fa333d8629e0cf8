//! Test-only generators. Nothing here calls into the code paths the tests
//! check: couplings are built by the north-west corner rule directly.
#![allow(dead_code)]

use std::sync::Arc;

use joinlab::joining::{MeasureTensor, Shape};
use joinlab::rational::{int, ratio};
use joinlab::{Automorphism, FiniteSpace, Rational};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_space<R: Rng>(rng: &mut R, atoms: usize) -> Arc<FiniteSpace> {
    let raw: Vec<i64> = (0..atoms).map(|_| rng.gen_range(1..6)).collect();
    let total: i64 = raw.iter().sum();
    FiniteSpace::new(raw.iter().map(|&w| ratio(w, total)).collect()).unwrap()
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

pub fn random_uniform_automorphism<R: Rng>(rng: &mut R, space: &Arc<FiniteSpace>) -> Automorphism {
    Automorphism::new(space.clone(), random_permutation(rng, space.atom_count())).unwrap()
}

/// North-west corner coupling of `a` and `b` visiting atoms in the given orders.
fn nw_corner(a: &[Rational], b: &[Rational], oa: &[usize], ob: &[usize]) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![Rational::zero(); b.len()]; a.len()];
    let (mut i, mut j) = (0, 0);
    let mut ra = a[oa[0]].clone();
    let mut rb = b[ob[0]].clone();
    while i < a.len() && j < b.len() {
        let m = if ra < rb { ra.clone() } else { rb.clone() };
        out[oa[i]][ob[j]] += &m;
        ra -= &m;
        rb -= &m;
        if ra.is_zero() {
            i += 1;
            if i < a.len() {
                ra = a[oa[i]].clone();
            }
        }
        if rb.is_zero() {
            j += 1;
            if j < b.len() {
                rb = b[ob[j]].clone();
            }
        }
    }
    out
}

/// Random coupling `c[s][t]` with row sums `a` and column sums `b`: a convex
/// mixture of a few north-west corner couplings.
pub fn random_coupling<R: Rng>(rng: &mut R, a: &[Rational], b: &[Rational]) -> Vec<Vec<Rational>> {
    let pieces = rng.gen_range(1..4);
    let raw: Vec<i64> = (0..pieces).map(|_| rng.gen_range(1..5)).collect();
    let total: i64 = raw.iter().sum();
    let mut out = vec![vec![Rational::zero(); b.len()]; a.len()];
    for &w in &raw {
        let lambda = ratio(w, total);
        let c = nw_corner(
            a,
            b,
            &random_permutation(rng, a.len()),
            &random_permutation(rng, b.len()),
        );
        for (orow, crow) in out.iter_mut().zip(c) {
            for (o, v) in orow.iter_mut().zip(crow) {
                *o += &lambda * v;
            }
        }
    }
    out
}

pub fn product_weights(spaces: &[Arc<FiniteSpace>]) -> Vec<Rational> {
    let mut w = vec![Rational::one()];
    for s in spaces {
        w = w
            .iter()
            .flat_map(|x| s.weights().iter().map(move |y| x * y))
            .collect();
    }
    w
}

/// Random measure on `rest[..d] × source × rest[d..]` whose `d` edge is the
/// source measure and whose complementary face is the product measure.
pub fn random_class_m_tensor<R: Rng>(
    rng: &mut R,
    source: &Arc<FiniteSpace>,
    rest: &[Arc<FiniteSpace>],
    d: usize,
) -> MeasureTensor {
    let b = product_weights(rest);
    let c = random_coupling(rng, source.weights(), &b);
    let rest_shape = Shape::new(rest.iter().map(|s| s.atom_count()).collect());
    let mut factors = rest.to_vec();
    factors.insert(d, source.clone());
    let mut entries = Vec::new();
    for (y, row) in c.iter().enumerate() {
        for (r, v) in row.iter().enumerate() {
            let mut t = rest_shape.tuple(r);
            t.insert(d, y);
            entries.push((t, v.clone()));
        }
    }
    MeasureTensor::from_sparse(factors, entries).unwrap()
}

/// Random Markov kernel `kernel[t][s]` from `source` to `target`.
pub fn random_kernel<R: Rng>(
    rng: &mut R,
    source: &Arc<FiniteSpace>,
    target: &Arc<FiniteSpace>,
) -> Vec<Vec<Rational>> {
    let c = random_coupling(rng, source.weights(), target.weights());
    (0..target.atom_count())
        .map(|t| {
            (0..source.atom_count())
                .map(|s| &c[s][t] / target.weight(t))
                .collect()
        })
        .collect()
}

pub fn zero_vec(n: usize) -> Vec<Rational> {
    vec![int(0); n]
}
