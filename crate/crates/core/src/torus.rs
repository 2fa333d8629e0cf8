//! The group `Z₂^k` with Haar measure: coordinate permutations, shifts, the
//! order-4 measure η supported on `d = a + b + c`, and character transforms.
//!
//! Atom `i` is the bit-vector `(x_0, …, x_{k−1})` with `x_0` the most
//! significant bit of `i`, so atoms are in lexicographic order.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use crate::joining::{JoiningTensor, MeasureTensor, Shape};
use crate::rational::{inv_pow2, Rational};
use crate::space::{ActionGenerators, Automorphism, FiniteSpace};

pub const MAX_K: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Z2kContext {
    k: u32,
    space: Arc<FiniteSpace>,
}

impl Z2kContext {
    pub fn new(k: u32) -> Result<Self> {
        if !(1..=MAX_K).contains(&k) {
            return invalid(format!("k must lie in 1..={MAX_K}, got {k}"));
        }
        Ok(Self {
            k,
            space: FiniteSpace::uniform(1 << k),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn atom_count(&self) -> usize {
        1 << self.k
    }

    /// Bit `i` of the atom.
    pub fn bit(&self, atom: usize, i: usize) -> usize {
        (atom >> (self.k as usize - 1 - i)) & 1
    }

    pub fn atom_from_bits(&self, bits: &[usize]) -> Result<usize> {
        if bits.len() != self.k as usize || bits.iter().any(|&b| b > 1) {
            return invalid(format!("expected {} bits, got {bits:?}", self.k));
        }
        Ok(bits.iter().fold(0, |acc, &b| (acc << 1) | b))
    }

    pub fn bits(&self, atom: usize) -> Vec<usize> {
        (0..self.k as usize).map(|i| self.bit(atom, i)).collect()
    }
}

/// `T_σ`: component `i` of the image is `x_{σ(i)}`. With this convention
/// `T_σ ∘ T_τ = T_{τ∘σ}`.
pub fn permutation_automorphism(ctx: &Z2kContext, sigma: &[usize]) -> Result<Automorphism> {
    let k = ctx.k as usize;
    let mut seen = vec![false; k];
    if sigma.len() != k
        || sigma
            .iter()
            .any(|&s| s >= k || std::mem::replace(&mut seen[s], true))
    {
        return invalid(format!("{sigma:?} is not a permutation of 0..{k}"));
    }
    let perm = (0..ctx.atom_count())
        .map(|x| sigma.iter().fold(0, |acc, &s| (acc << 1) | ctx.bit(x, s)))
        .collect();
    Automorphism::new(Arc::clone(&ctx.space), perm)
}

/// `S_α(x) = x + α` (componentwise mod 2, i.e. xor).
pub fn shift_automorphism(ctx: &Z2kContext, alpha: &[usize]) -> Result<Automorphism> {
    let a = ctx.atom_from_bits(alpha)?;
    let perm = (0..ctx.atom_count()).map(|x| x ^ a).collect();
    Automorphism::new(Arc::clone(&ctx.space), perm)
}

/// Adjacent transpositions `T_{(i i+1)}` followed by the basis shifts `S_{e_i}`.
pub fn full_action(ctx: &Z2kContext) -> ActionGenerators {
    let k = ctx.k as usize;
    let mut gens = Vec::with_capacity(2 * k - 1);
    for i in 0..k.saturating_sub(1) {
        let mut sigma: Vec<usize> = (0..k).collect();
        sigma.swap(i, i + 1);
        gens.push(permutation_automorphism(ctx, &sigma).expect("valid transposition"));
    }
    for i in 0..k {
        let mut e = vec![0; k];
        e[i] = 1;
        gens.push(shift_automorphism(ctx, &e).expect("valid basis vector"));
    }
    ActionGenerators::new(Arc::clone(&ctx.space), gens).expect("same space")
}

/// `η(a, b, c, d) = 2^{−3k}` when `d = a + b + c`, else 0.
pub fn eta_measure(ctx: &Z2kContext) -> JoiningTensor {
    let n = ctx.atom_count();
    let w = inv_pow2(3 * ctx.k);
    let entries = (0..n).flat_map(|a| {
        let w = w.clone();
        (0..n).flat_map(move |b| {
            let w = w.clone();
            (0..n).map(move |c| (vec![a, b, c, a ^ b ^ c], w.clone()))
        })
    });
    let measure =
        MeasureTensor::from_sparse(vec![Arc::clone(&ctx.space); 4], entries.collect::<Vec<_>>())
            .expect("η has mass one");
    JoiningTensor::new(measure).expect("η has uniform edges")
}

fn character_sign(chars: &[usize], tuple: &[usize]) -> bool {
    chars
        .iter()
        .zip(tuple)
        .map(|(a, t)| (a & t).count_ones())
        .sum::<u32>()
        % 2
        == 1
}

/// `Σ_t v(t) Π_i (−1)^{a_i · t_i}`.
pub fn character_coefficient(v: &MeasureTensor, chars: &[usize]) -> Result<Rational> {
    if chars.len() != v.order() {
        return invalid(format!(
            "{} characters for an order-{} tensor",
            chars.len(),
            v.order()
        ));
    }
    if let Some(i) = (0..chars.len()).find(|&i| chars[i] >= v.factors()[i].atom_count()) {
        return invalid(format!(
            "character index {} out of range on factor {i}",
            chars[i]
        ));
    }
    let mut total = Rational::zero();
    for (t, val) in v.nonzero() {
        if character_sign(chars, &t) {
            total -= val;
        } else {
            total += val;
        }
    }
    Ok(total)
}

/// Inverse character transform:
/// `v(t) = 2^{−nk} Σ_a coeff(a) Π_i (−1)^{a_i·t_i}`.
pub fn fourier_joining(
    ctx: &Z2kContext,
    order: usize,
    coefficients: &BTreeMap<Vec<usize>, Rational>,
) -> Result<JoiningTensor> {
    if order == 0 {
        return invalid("order must be positive");
    }
    let zero_tuple = vec![0; order];
    if coefficients.get(&zero_tuple).is_none_or(|c| !c.is_one()) {
        return invalid("coefficient of the trivial character must be 1");
    }
    let n = ctx.atom_count();
    for chars in coefficients.keys() {
        if chars.len() != order || chars.iter().any(|&a| a >= n) {
            return invalid(format!(
                "character tuple {chars:?} does not fit order {order}"
            ));
        }
    }
    let shape = Shape::new(vec![n; order]);
    let scale = inv_pow2(order as u32 * ctx.k);
    let mut entries = Vec::with_capacity(shape.len());
    for t in shape.tuples() {
        let mut acc = Rational::zero();
        for (chars, c) in coefficients {
            if character_sign(chars, &t) {
                acc -= c;
            } else {
                acc += c;
            }
        }
        let value = acc * &scale;
        if value.is_negative() {
            return invalid(format!("coefficients give a negative mass at {t:?}"));
        }
        entries.push(value);
    }
    JoiningTensor::from_entries(vec![Arc::clone(&ctx.space); order], entries)
}
