//! Skew products `R(x, y) = (S x, R_x y)` over a finite base, their cocycle
//! products and the rigidity / relative-mixing statistics along them.

use std::sync::Arc;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, precondition, Result};
use crate::markov::{dist_w, koopman, theta};
use crate::rational::Rational;
use crate::space::{
    compose, halmos_distance, product_space, same_space, Automorphism, FiniteSpace, MeasurableSet,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewProduct {
    base: Arc<FiniteSpace>,
    fiber: Arc<FiniteSpace>,
    base_map: Automorphism,
    cocycle: Vec<Automorphism>,
}

impl SkewProduct {
    /// `cocycle[x]` is the fiber automorphism `R_x`.
    pub fn new(
        base_map: Automorphism,
        fiber: Arc<FiniteSpace>,
        cocycle: Vec<Automorphism>,
    ) -> Result<Self> {
        let base = Arc::clone(base_map.space());
        if cocycle.len() != base.atom_count() {
            return invalid(format!(
                "cocycle has {} fiber maps, base has {} atoms",
                cocycle.len(),
                base.atom_count()
            ));
        }
        if let Some(x) = cocycle.iter().position(|r| !same_space(r.space(), &fiber)) {
            return invalid(format!("fiber map at base atom {x} acts on another space"));
        }
        Ok(Self {
            base,
            fiber,
            base_map,
            cocycle,
        })
    }

    /// `S × Id`.
    pub fn product_with_identity(base_map: Automorphism, fiber: Arc<FiniteSpace>) -> Self {
        let id = Automorphism::identity(Arc::clone(&fiber));
        let n = base_map.space().atom_count();
        Self::new(base_map, fiber, vec![id; n]).expect("shapes agree")
    }

    pub fn base(&self) -> &Arc<FiniteSpace> {
        &self.base
    }

    pub fn fiber(&self) -> &Arc<FiniteSpace> {
        &self.fiber
    }

    pub fn base_map(&self) -> &Automorphism {
        &self.base_map
    }

    pub fn fiber_map(&self, x: usize) -> &Automorphism {
        &self.cocycle[x]
    }

    pub fn cocycle(&self) -> &[Automorphism] {
        &self.cocycle
    }

    pub fn joint_space(&self) -> Arc<FiniteSpace> {
        product_space(&[Arc::clone(&self.base), Arc::clone(&self.fiber)]).expect("nonempty")
    }
}

/// The automorphism `(x, y) ↦ (S x, R_x y)` of base × fiber.
pub fn as_automorphism(r: &SkewProduct) -> Automorphism {
    let f = r.fiber.atom_count();
    let perm = (0..r.base.atom_count())
        .flat_map(|x| {
            let sx = r.base_map.apply(x);
            let rx = &r.cocycle[x];
            (0..f).map(move |y| sx * f + rx.apply(y))
        })
        .collect();
    Automorphism::new_unchecked(r.joint_space(), perm)
}

/// `C(x, p) = R_{S^{p−1}x} ∘ … ∘ R_{Sx} ∘ R_x`, with `C(x, 0) = Id`.
pub fn cocycle_product(r: &SkewProduct, x: usize, p: u64) -> Automorphism {
    let mut acc = Automorphism::identity(Arc::clone(&r.fiber));
    let mut point = x;
    for _ in 0..p {
        acc = compose(&r.cocycle[point], &acc).expect("same fiber");
        point = r.base_map.apply(point);
    }
    acc
}

/// `J⁻¹(S × Id)J` for `J = (Id, J_x)`: the cocycle `R_x = J_{Sx}⁻¹ ∘ J_x`.
pub fn coboundary_extension(s: &Automorphism, j_family: &[Automorphism]) -> Result<SkewProduct> {
    let fiber = match j_family.first() {
        Some(j) => Arc::clone(j.space()),
        None => return invalid("J-family is empty"),
    };
    if j_family.len() != s.space().atom_count() {
        return invalid("J-family must have one fiber map per base atom");
    }
    let cocycle = (0..j_family.len())
        .map(|x| compose(&j_family[s.apply(x)].inverse(), &j_family[x]))
        .collect::<Result<_>>()?;
    SkewProduct::new(s.clone(), fiber, cocycle)
}

/// The skew product with `R_x = T^{n(x)}`; requires `Σ n(x) μ(x) = 0`.
pub fn power_skew(s: &Automorphism, t: &Automorphism, n_fun: &[i64]) -> Result<SkewProduct> {
    let base = s.space();
    if n_fun.len() != base.atom_count() {
        return invalid("exponent function must have one value per base atom");
    }
    let mean: Rational = n_fun
        .iter()
        .enumerate()
        .map(|(x, &n)| base.weight(x) * Rational::from_integer(n.into()))
        .sum();
    if !mean.is_zero() {
        return precondition(format!(
            "exponent function has mean {}, expected 0",
            crate::rational::to_canonical(&mean)
        ));
    }
    let cocycle = n_fun.iter().map(|&n| t.power(n)).collect();
    SkewProduct::new(s.clone(), Arc::clone(t.space()), cocycle)
}

/// `μ{x ∈ A : S^p x ∈ A, ρ(C(x,p), Id) < 1/n_param}`.
pub fn rigidity_statistic(
    r: &SkewProduct,
    a: &MeasurableSet,
    n_param: u64,
    p: u64,
) -> Result<Rational> {
    if n_param < 1 || p < 1 {
        return invalid("rigidity statistic needs N ≥ 1 and p ≥ 1");
    }
    if !same_space(a.space(), &r.base) {
        return invalid("set is not on the base space");
    }
    let sp = r.base_map.power(p as i64);
    let id = Automorphism::identity(Arc::clone(&r.fiber));
    let bound = Rational::new(1.into(), n_param.into());
    let mut total = Rational::zero();
    for x in a.atoms() {
        if a.contains(sp.apply(x)) && halmos_distance(&cocycle_product(r, x, p), &id)? < bound {
            total += r.base.weight(x);
        }
    }
    Ok(total)
}

/// `μ{x : dist_w(koopman(C(x,p)), Θ) < eps}`.
pub fn relative_mixing_fraction(r: &SkewProduct, p: u64, eps: &Rational) -> Result<Rational> {
    if p < 1 || eps <= &Rational::zero() {
        return invalid("relative mixing fraction needs p ≥ 1 and eps > 0");
    }
    let th = theta(Arc::clone(&r.fiber));
    let mut total = Rational::zero();
    for x in 0..r.base.atom_count() {
        if &dist_w(&koopman(&cocycle_product(r, x, p)), &th)? < eps {
            total += r.base.weight(x);
        }
    }
    Ok(total)
}

/// `∫ (1/N) Σ_{p=1}^{N} (μ(C(x,p)A ∩ B) − μ(A)μ(B))² dμ(x)`.
pub fn relative_weak_mixing_average(
    r: &SkewProduct,
    a: &MeasurableSet,
    b: &MeasurableSet,
    n_horizon: u64,
) -> Result<Rational> {
    if n_horizon < 1 {
        return invalid("horizon must be at least 1");
    }
    if !same_space(a.space(), &r.fiber) || !same_space(b.space(), &r.fiber) {
        return invalid("sets must live on the fiber");
    }
    let product = a.measure() * b.measure();
    let mut total = Rational::zero();
    for x in 0..r.base.atom_count() {
        let mut c = Automorphism::identity(Arc::clone(&r.fiber));
        let mut point = x;
        let mut inner = Rational::zero();
        for _ in 0..n_horizon {
            c = compose(&r.cocycle[point], &c)?;
            point = r.base_map.apply(point);
            let d = a.image(&c)?.intersect(b)?.measure() - &product;
            inner += &d * &d;
        }
        total += r.base.weight(x) * inner;
    }
    Ok(total / Rational::from_integer(n_horizon.into()))
}

/// `R ×_X R : (x, y, y') ↦ (S x, R_x y, R_x y')` on base × fiber × fiber.
pub fn relative_product(r: &SkewProduct) -> Automorphism {
    let f = r.fiber.atom_count();
    let space = product_space(&[
        Arc::clone(&r.base),
        Arc::clone(&r.fiber),
        Arc::clone(&r.fiber),
    ])
    .expect("nonempty");
    let mut perm = Vec::with_capacity(space.atom_count());
    for x in 0..r.base.atom_count() {
        let sx = r.base_map.apply(x);
        let rx = &r.cocycle[x];
        for y in 0..f {
            for y2 in 0..f {
                perm.push((sx * f + rx.apply(y)) * f + rx.apply(y2));
            }
        }
    }
    Automorphism::new_unchecked(space, perm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    IidCocycle,
    RandomCoboundary,
}

/// Uniformly random measure-preserving permutation: a shuffle inside each
/// class of equal-weight atoms.
pub fn random_automorphism<R: rand::Rng + ?Sized>(
    space: &Arc<FiniteSpace>,
    rng: &mut R,
) -> Automorphism {
    let n = space.atom_count();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut classes: Vec<(Rational, Vec<usize>)> = Vec::new();
    for i in 0..n {
        match classes.iter_mut().find(|(w, _)| w == space.weight(i)) {
            Some((_, members)) => members.push(i),
            None => classes.push((space.weight(i).clone(), vec![i])),
        }
    }
    for (_, members) in &classes {
        let mut images = members.clone();
        images.shuffle(rng);
        for (&src, &dst) in members.iter().zip(&images) {
            perm[src] = dst;
        }
    }
    Automorphism::new_unchecked(Arc::clone(space), perm)
}

/// Seeded random extension of `s`. The generator is ChaCha8 seeded with
/// `seed`, so the result is a fixed function of its inputs.
pub fn sample_random_extension(
    s: &Automorphism,
    fiber: &Arc<FiniteSpace>,
    seed: u64,
    mode: SampleMode,
) -> SkewProduct {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family: Vec<Automorphism> = (0..s.space().atom_count())
        .map(|_| random_automorphism(fiber, &mut rng))
        .collect();
    match mode {
        SampleMode::IidCocycle => SkewProduct::new(s.clone(), Arc::clone(fiber), family),
        SampleMode::RandomCoboundary => coboundary_extension(s, &family),
    }
    .expect("shapes agree by construction")
}

/// Strictly increasing sequence of positive times `p_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RigiditySequence(Vec<u64>);

impl RigiditySequence {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.first().is_some_and(|&v| v == 0) || values.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("rigidity sequence must be strictly increasing positive integers");
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }
}

impl SkewProduct {
    /// Convenience: whether every cocycle product over `p` steps is the identity.
    pub fn returns_identity_at(&self, p: u64) -> bool {
        (0..self.base.atom_count()).all(|x| cocycle_product(self, x, p).is_identity())
    }
}
