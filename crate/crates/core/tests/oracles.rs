//! Independent oracles for the polytope solver: brute-force vertex
//! enumeration and character (Fourier) analysis on `Z₂`.

mod common;

use joinlab::joining::{product_joining, Shape};
use joinlab::polytope::{certify_triviality, optimize, LpStatus, PolytopeSpec};
use joinlab::rational::{int, ratio};
use joinlab::torus::{full_action, Z2kContext};
use joinlab::{ActionGenerators, Automorphism, FiniteSpace, Rational};
use num_traits::{One, Signed, Zero};

/// Unique solution of `A x = b` restricted to `cols`, if any.
fn solve_on(a: &[Vec<Rational>], b: &[Rational], cols: &[usize]) -> Option<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            cols.iter()
                .map(|&c| row[c].clone())
                .chain([rhs.clone()])
                .collect()
        })
        .collect();
    let k = cols.len();
    let mut r = 0;
    for c in 0..k {
        let p = (r..m.len()).find(|&i| !m[i][c].is_zero())?;
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pr = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, q) in row.iter_mut().zip(&pr) {
                    *v -= &f * q;
                }
            }
        }
        r += 1;
    }
    if m[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| m[i][k].clone()).collect())
}

/// 2-face marginal constraints of an order-3 tensor over uniform `Z₂`.
fn pairwise_constraints() -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let shape = Shape::new(vec![2, 2, 2]);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for face in [[0, 1], [0, 2], [1, 2]] {
        for u in 0..2 {
            for w in 0..2 {
                a.push(
                    shape
                        .tuples()
                        .map(|t| {
                            if t[face[0]] == u && t[face[1]] == w {
                                int(1)
                            } else {
                                int(0)
                            }
                        })
                        .collect(),
                );
                b.push(ratio(1, 4));
            }
        }
    }
    (a, b)
}

#[test]
fn parity_optimum_matches_vertex_enumeration() {
    let (a, b) = pairwise_constraints();
    let mut best: Option<Rational> = None;
    for mask in 1u32..256 {
        let cols: Vec<usize> = (0..8).filter(|i| (mask >> i) & 1 == 1).collect();
        if let Some(x) = solve_on(&a, &b, &cols) {
            if x.iter().all(|v| !v.is_negative()) {
                let value = cols
                    .iter()
                    .zip(&x)
                    .find(|(c, _)| **c == 0)
                    .map_or(int(0), |(_, v)| v.clone());
                if best.as_ref().is_none_or(|bv| value > *bv) {
                    best = Some(value);
                }
            }
        }
    }
    let oracle = best.expect("μ³ is feasible");
    assert_eq!(oracle, ratio(1, 4));

    let u2 = FiniteSpace::uniform(2);
    let action = ActionGenerators::new(u2.clone(), vec![Automorphism::identity(u2)]).unwrap();
    let spec = PolytopeSpec::new(action, 3, 2).unwrap();
    let mut objective = vec![int(0); 8];
    objective[0] = int(1);
    let out = optimize(&spec, &objective).unwrap();
    assert_eq!(out.status, LpStatus::Optimal);
    assert_eq!(out.optimum, oracle);
    assert!(out.optimum > ratio(1, 8));
}

/// On Z₂ with the shift, the only character triple with every component
/// nonzero is (1,1,1), which the shift maps to its negative; so the
/// invariant pairwise-independent polytope is the single point μ³.
#[test]
fn k1_order3_polytope_is_a_point() {
    let ctx = Z2kContext::new(1).unwrap();
    let spec = PolytopeSpec::new(full_action(&ctx), 3, 2).unwrap();
    let mu3 = product_joining(&vec![ctx.space().clone(); 3]).unwrap();
    for i in 0..8 {
        let mut objective = vec![int(0); 8];
        objective[i] = int(1);
        let max = optimize(&spec, &objective).unwrap().optimum;
        let neg: Vec<Rational> = objective.iter().map(|v| -v).collect();
        let min = -optimize(&spec, &neg).unwrap().optimum;
        assert_eq!(max, mu3.entries()[i]);
        assert_eq!(min, mu3.entries()[i]);
    }
    assert!(certify_triviality(&spec).unwrap().trivial);
}

#[test]
fn zero_objective_always_feasible() {
    for k in 1..=2 {
        let ctx = Z2kContext::new(k).unwrap();
        for (order, m) in [(2, 1), (3, 1), (3, 2)] {
            let spec = PolytopeSpec::new(full_action(&ctx), order, m).unwrap();
            let out = optimize(&spec, &vec![int(0); spec.tensor_size()]).unwrap();
            assert_eq!(out.status, LpStatus::Optimal);
            assert_eq!(out.optimum, int(0));
        }
    }
}
