//! Finite probability spaces and their measure-preserving permutations.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use crate::rational::{inv_pow2, Rational};

/// A finite probability space: atoms `0..n` with strictly positive exact
/// weights summing to one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteSpace {
    weights: Vec<Rational>,
}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.weights.iter().map(crate::rational::to_canonical))
            .finish()
    }
}

impl FiniteSpace {
    pub fn new(weights: Vec<Rational>) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return invalid("a space needs at least one atom");
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return invalid(format!("weight of atom {i} is not positive"));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return invalid(format!(
                "weights sum to {}, expected 1",
                crate::rational::to_canonical(&total)
            ));
        }
        Ok(Arc::new(Self { weights }))
    }

    pub fn uniform(n: usize) -> Arc<Self> {
        assert!(n > 0, "uniform space needs at least one atom");
        let w = Rational::new(1.into(), n.into());
        Arc::new(Self {
            weights: vec![w; n],
        })
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, atom: usize) -> &Rational {
        &self.weights[atom]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        self.weights.iter().all(|w| w == &self.weights[0])
    }
}

pub(crate) fn same_space(a: &Arc<FiniteSpace>, b: &Arc<FiniteSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Product of spaces. Atoms are tuples in lexicographic order with the first
/// factor most significant.
pub fn product_space(spaces: &[Arc<FiniteSpace>]) -> Result<Arc<FiniteSpace>> {
    match spaces {
        [] => invalid("product of an empty list of spaces"),
        [single] => Ok(Arc::clone(single)),
        _ => {
            let mut weights = vec![Rational::one()];
            for space in spaces {
                weights = weights
                    .iter()
                    .flat_map(|w| space.weights.iter().map(move |v| w * v))
                    .collect();
            }
            Ok(Arc::new(FiniteSpace { weights }))
        }
    }
}

/// True iff `perm` is a bijection of the atoms that keeps every weight.
pub fn is_measure_preserving(perm: &[usize], space: &FiniteSpace) -> Result<bool> {
    check_bijection(perm, space.atom_count())?;
    Ok(perm
        .iter()
        .enumerate()
        .all(|(i, &j)| space.weights[i] == space.weights[j]))
}

fn check_bijection(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return invalid(format!(
            "permutation has length {}, space has {n} atoms",
            perm.len()
        ));
    }
    let mut seen = vec![false; n];
    for &j in perm {
        if j >= n || std::mem::replace(&mut seen[j], true) {
            return invalid(format!("{perm:?} is not a bijection of 0..{n}"));
        }
    }
    Ok(())
}

/// A measure-preserving permutation of a [`FiniteSpace`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    space: Arc<FiniteSpace>,
    perm: Vec<usize>,
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Automorphism{:?}", self.perm)
    }
}

impl Automorphism {
    pub fn new(space: Arc<FiniteSpace>, perm: Vec<usize>) -> Result<Self> {
        if !is_measure_preserving(&perm, &space)? {
            return invalid(format!("{perm:?} does not preserve the measure"));
        }
        Ok(Self { space, perm })
    }

    pub(crate) fn new_unchecked(space: Arc<FiniteSpace>, perm: Vec<usize>) -> Self {
        debug_assert!(is_measure_preserving(&perm, &space).unwrap_or(false));
        Self { space, perm }
    }

    pub fn identity(space: Arc<FiniteSpace>) -> Self {
        let perm = (0..space.atom_count()).collect();
        Self { space, perm }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn apply(&self, atom: usize) -> usize {
        self.perm[atom]
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &j) in self.perm.iter().enumerate() {
            inv[j] = i;
        }
        Self {
            space: Arc::clone(&self.space),
            perm: inv,
        }
    }

    /// `self^exp`; negative exponents use the inverse.
    pub fn power(&self, exp: i64) -> Self {
        let base = if exp < 0 {
            self.inverse()
        } else {
            self.clone()
        };
        let mut e = exp.unsigned_abs();
        let mut result = Self::identity(Arc::clone(&self.space));
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.then_unchecked(&sq);
            }
            sq = sq.then_unchecked(&sq);
            e >>= 1;
        }
        result
    }

    /// `self ∘ other`, i.e. apply `other` first.
    fn then_unchecked(&self, other: &Self) -> Self {
        Self {
            space: Arc::clone(&self.space),
            perm: other.perm.iter().map(|&j| self.perm[j]).collect(),
        }
    }

    /// Number of cycles of the permutation.
    pub fn orbit_count(&self) -> usize {
        let mut seen = vec![false; self.perm.len()];
        let mut cycles = 0;
        for start in 0..self.perm.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
            }
        }
        cycles
    }

    /// A permutation of a finite space is ergodic iff it is a single cycle.
    pub fn is_ergodic(&self) -> bool {
        self.orbit_count() == 1
    }
}

/// `a ∘ b`.
pub fn compose(a: &Automorphism, b: &Automorphism) -> Result<Automorphism> {
    if !same_space(&a.space, &b.space) {
        return invalid("cannot compose automorphisms of different spaces");
    }
    Ok(a.then_unchecked(b))
}

/// Halmos distance over the family of singletons `A_i = {i - 1}`:
///
/// `ρ(P,R) = Σ_i 2^{-i} ( μ(P A_i Δ R A_i) + μ(P⁻¹A_i Δ R⁻¹A_i) )`.
pub fn halmos_distance(p: &Automorphism, r: &Automorphism) -> Result<Rational> {
    if !same_space(&p.space, &r.space) {
        return invalid("halmos distance between automorphisms of different spaces");
    }
    let (p_inv, r_inv) = (p.inverse(), r.inverse());
    let mut total = Rational::zero();
    for atom in 0..p.perm.len() {
        let singleton_delta = |a: usize, b: usize| {
            if a == b {
                Rational::zero()
            } else {
                p.space.weight(a) + p.space.weight(b)
            }
        };
        let term = singleton_delta(p.perm[atom], r.perm[atom])
            + singleton_delta(p_inv.perm[atom], r_inv.perm[atom]);
        if !term.is_zero() {
            total += term * inv_pow2(atom as u32 + 1);
        }
    }
    Ok(total)
}

/// Generators of a finitely generated action on one space.
#[derive(Clone, Debug)]
pub struct ActionGenerators {
    space: Arc<FiniteSpace>,
    generators: Vec<Automorphism>,
}

impl ActionGenerators {
    pub fn new(space: Arc<FiniteSpace>, generators: Vec<Automorphism>) -> Result<Self> {
        if generators.is_empty() {
            return invalid("an action needs at least one generator");
        }
        if let Some(i) = generators
            .iter()
            .position(|g| !same_space(&g.space, &space))
        {
            return invalid(format!("generator {i} acts on a different space"));
        }
        Ok(Self { space, generators })
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn generators(&self) -> &[Automorphism] {
        &self.generators
    }

    /// Every element of the generated group, breadth-first from the identity.
    pub fn group_elements(&self) -> Vec<Automorphism> {
        let id = Automorphism::identity(Arc::clone(&self.space));
        let mut seen: HashSet<Vec<usize>> = HashSet::from([id.perm.clone()]);
        let mut order = vec![id.clone()];
        let mut queue = VecDeque::from([id]);
        while let Some(elem) = queue.pop_front() {
            for g in &self.generators {
                let next = g.then_unchecked(&elem);
                if seen.insert(next.perm.clone()) {
                    order.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        order
    }
}

/// A subset of the atoms of a space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MeasurableSet {
    space: Arc<FiniteSpace>,
    members: Vec<bool>,
}

impl fmt::Debug for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

impl MeasurableSet {
    pub fn new(space: Arc<FiniteSpace>, atoms: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = space.atom_count();
        let mut members = vec![false; n];
        for a in atoms {
            if a >= n {
                return invalid(format!("atom {a} outside 0..{n}"));
            }
            members[a] = true;
        }
        Ok(Self { space, members })
    }

    pub fn empty(space: Arc<FiniteSpace>) -> Self {
        let n = space.atom_count();
        Self {
            space,
            members: vec![false; n],
        }
    }

    pub fn full(space: Arc<FiniteSpace>) -> Self {
        let n = space.atom_count();
        Self {
            space,
            members: vec![true; n],
        }
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members[atom]
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn measure(&self) -> Rational {
        self.atoms().map(|a| self.space.weight(a)).sum()
    }

    /// `t(self)`.
    pub fn image(&self, t: &Automorphism) -> Result<Self> {
        if !same_space(&self.space, &t.space) {
            return invalid("set and automorphism live on different spaces");
        }
        let mut members = vec![false; self.members.len()];
        for a in self.atoms() {
            members[t.apply(a)] = true;
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            members,
        })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        if !same_space(&self.space, &other.space) {
            return invalid("intersection of sets on different spaces");
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a && *b)
                .collect(),
        })
    }

    /// Indicator function as exact rationals.
    pub fn indicator(&self) -> Vec<Rational> {
        self.members
            .iter()
            .map(|&m| if m { Rational::one() } else { Rational::zero() })
            .collect()
    }
}
