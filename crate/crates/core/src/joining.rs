//! Measures on products of finite spaces: joinings, their marginals,
//! invariance and independence defects, the pairing with Markov operators,
//! pushforwards and disintegration over a base.
//!
//! Entries are stored densely in lexicographic tuple order (first factor
//! most significant), matching [`crate::space::product_space`].

use std::ops::Deref;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, precondition, Result};
use crate::markov::MarkovOperator;
use crate::rational::{abs_diff, Rational};
use crate::skew::SkewProduct;
use crate::space::{product_space, same_space, ActionGenerators, FiniteSpace};

/// Row-major index arithmetic over a list of axis lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    dims: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Shape {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let len = dims.iter().product();
        Self { dims, strides, len }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.strides).map(|(t, s)| t * s).sum()
    }

    pub fn tuple(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        self.write_tuple(&mut index, &mut out);
        out
    }

    fn write_tuple(&self, index: &mut usize, out: &mut [usize]) {
        for (slot, s) in out.iter_mut().zip(&self.strides) {
            *slot = *index / s;
            *index %= s;
        }
    }

    /// All tuples in lexicographic order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len).map(|i| self.tuple(i))
    }
}

/// A probability measure on a product of finite spaces. Single-factor
/// marginals are unconstrained; see [`JoiningTensor`] for the joining
/// invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureTensor {
    factors: Vec<Arc<FiniteSpace>>,
    shape: Shape,
    entries: Vec<Rational>,
}

impl MeasureTensor {
    pub fn new(factors: Vec<Arc<FiniteSpace>>, entries: Vec<Rational>) -> Result<Self> {
        if factors.is_empty() {
            return invalid("a tensor needs at least one factor");
        }
        let shape = Shape::new(factors.iter().map(|f| f.atom_count()).collect());
        if entries.len() != shape.len() {
            return invalid(format!(
                "tensor has {} entries, factors need {}",
                entries.len(),
                shape.len()
            ));
        }
        if entries.iter().any(Signed::is_negative) {
            return invalid("tensor has a negative entry");
        }
        let mass: Rational = entries.iter().sum();
        if !mass.is_one() {
            return invalid(format!(
                "tensor mass is {}, expected 1",
                crate::rational::to_canonical(&mass)
            ));
        }
        Ok(Self {
            factors,
            shape,
            entries,
        })
    }

    /// Builds from sparse `(tuple, value)` pairs; missing tuples are zero.
    pub fn from_sparse(
        factors: Vec<Arc<FiniteSpace>>,
        entries: impl IntoIterator<Item = (Vec<usize>, Rational)>,
    ) -> Result<Self> {
        let shape = Shape::new(factors.iter().map(|f| f.atom_count()).collect());
        let mut dense = vec![Rational::zero(); shape.len()];
        for (tuple, value) in entries {
            if tuple.len() != shape.dims().len()
                || tuple.iter().zip(shape.dims()).any(|(t, d)| t >= d)
            {
                return invalid(format!("tuple {tuple:?} outside the tensor shape"));
            }
            dense[shape.index(&tuple)] += value;
        }
        Self::new(factors, dense)
    }

    fn from_parts_unchecked(factors: Vec<Arc<FiniteSpace>>, entries: Vec<Rational>) -> Self {
        let shape = Shape::new(factors.iter().map(|f| f.atom_count()).collect());
        debug_assert_eq!(entries.len(), shape.len());
        Self {
            factors,
            shape,
            entries,
        }
    }

    pub fn factors(&self) -> &[Arc<FiniteSpace>] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn entry(&self, tuple: &[usize]) -> &Rational {
        &self.entries[self.shape.index(tuple)]
    }

    /// Nonzero entries with their tuples, in lexicographic order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Vec<usize>, &Rational)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (self.shape.tuple(i), v))
    }

    /// Sums out every coordinate not in `coords` (nonempty, strictly increasing).
    pub fn marginal(&self, coords: &[usize]) -> Result<MeasureTensor> {
        if coords.is_empty() {
            return invalid("marginal onto an empty coordinate set");
        }
        if coords.windows(2).any(|w| w[0] >= w[1]) {
            return invalid(format!(
                "coordinates {coords:?} are not strictly increasing"
            ));
        }
        if coords.last().is_some_and(|&c| c >= self.order()) {
            return invalid(format!(
                "coordinates {coords:?} exceed order {}",
                self.order()
            ));
        }
        let factors: Vec<_> = coords
            .iter()
            .map(|&c| Arc::clone(&self.factors[c]))
            .collect();
        let out_shape = Shape::new(factors.iter().map(|f| f.atom_count()).collect());
        let mut out = vec![Rational::zero(); out_shape.len()];
        let mut tuple = vec![0; self.order()];
        let mut sub = vec![0; coords.len()];
        for (i, v) in self.entries.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            self.shape.write_tuple(&mut { i }, &mut tuple);
            for (s, &c) in sub.iter_mut().zip(coords) {
                *s = tuple[c];
            }
            out[out_shape.index(&sub)] += v;
        }
        Ok(Self::from_parts_unchecked(factors, out))
    }

    /// Pushes the measure through one kernel per factor. Each operator's
    /// source must be the corresponding factor; the transition from `y` to
    /// `z` is `μ_target(z)·kernel[z][y] / μ_source(y)`.
    pub fn push(&self, ops: &[MarkovOperator]) -> Result<MeasureTensor> {
        if ops.len() != self.order() {
            return invalid(format!(
                "push needs {} operators, got {}",
                self.order(),
                ops.len()
            ));
        }
        if let Some(i) = (0..ops.len()).find(|&i| !same_space(ops[i].source(), &self.factors[i])) {
            return invalid(format!("operator {i} does not act on factor {i}"));
        }
        let mut factors = self.factors.clone();
        let mut entries = self.entries.clone();
        for (axis, op) in ops.iter().enumerate() {
            if is_identity_op(op) {
                continue;
            }
            let dims: Vec<usize> = factors.iter().map(|f| f.atom_count()).collect();
            entries = contract_axis(&entries, &dims, axis, &transition_matrix(op));
            factors[axis] = Arc::clone(op.target());
        }
        Ok(Self::from_parts_unchecked(factors, entries))
    }
}

fn is_identity_op(op: &MarkovOperator) -> bool {
    same_space(op.source(), op.target())
        && (0..op.source().atom_count()).all(|i| op.entry(i, i).is_one())
}

/// `transition[y][z] = μ_t(z) kernel[z][y] / μ_s(y)`; rows sum to one.
fn transition_matrix(op: &MarkovOperator) -> Vec<Vec<Rational>> {
    let (ns, nt) = (op.source().atom_count(), op.target().atom_count());
    (0..ns)
        .map(|y| {
            let inv = Rational::one() / op.source().weight(y);
            (0..nt)
                .map(|z| op.target().weight(z) * op.entry(z, y) * &inv)
                .collect()
        })
        .collect()
}

/// Replaces axis `axis` of a dense tensor by the image under
/// `out[.., z, ..] = Σ_y in[.., y, ..]·m[y][z]`.
fn contract_axis(
    entries: &[Rational],
    dims: &[usize],
    axis: usize,
    m: &[Vec<Rational>],
) -> Vec<Rational> {
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let (n_in, n_out) = (dims[axis], m.first().map_or(0, Vec::len));
    let mut out = vec![Rational::zero(); outer * n_out * inner];
    for o in 0..outer {
        for y in 0..n_in {
            let row = &m[y];
            for i in 0..inner {
                let v = &entries[(o * n_in + y) * inner + i];
                if v.is_zero() {
                    continue;
                }
                for (z, w) in row.iter().enumerate() {
                    if !w.is_zero() {
                        out[(o * n_out + z) * inner + i] += v * w;
                    }
                }
            }
        }
    }
    out
}

/// Max entrywise `|a − b|` over tensors of identical shape.
pub fn sup_distance(a: &MeasureTensor, b: &MeasureTensor) -> Result<Rational> {
    if a.factors.len() != b.factors.len()
        || a.factors
            .iter()
            .zip(&b.factors)
            .any(|(x, y)| !same_space(x, y))
    {
        return invalid("sup distance between tensors on different factors");
    }
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| abs_diff(x, y))
        .max()
        .unwrap_or_else(Rational::zero))
}

/// A measure on a product whose every single-factor marginal equals that
/// factor's measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoiningTensor(MeasureTensor);

impl Deref for JoiningTensor {
    type Target = MeasureTensor;

    fn deref(&self) -> &MeasureTensor {
        &self.0
    }
}

impl JoiningTensor {
    pub fn new(measure: MeasureTensor) -> Result<Self> {
        for i in 0..measure.order() {
            let edge = measure.marginal(&[i])?;
            if edge.entries() != measure.factors[i].weights() {
                return invalid(format!("marginal onto factor {i} differs from its measure"));
            }
        }
        Ok(Self(measure))
    }

    pub fn from_entries(factors: Vec<Arc<FiniteSpace>>, entries: Vec<Rational>) -> Result<Self> {
        Self::new(MeasureTensor::new(factors, entries)?)
    }

    pub(crate) fn new_unchecked(measure: MeasureTensor) -> Self {
        debug_assert!(Self::new(measure.clone()).is_ok());
        Self(measure)
    }

    pub fn as_measure(&self) -> &MeasureTensor {
        &self.0
    }

    pub fn into_measure(self) -> MeasureTensor {
        self.0
    }

    /// Marginals of a joining are joinings.
    pub fn marginal(&self, coords: &[usize]) -> Result<JoiningTensor> {
        Ok(Self(self.0.marginal(coords)?))
    }
}

/// The product measure `μ_0 ⊗ … ⊗ μ_{n−1}`.
pub fn product_joining(spaces: &[Arc<FiniteSpace>]) -> Result<JoiningTensor> {
    let prod = product_space(spaces)?;
    Ok(JoiningTensor(MeasureTensor::from_parts_unchecked(
        spaces.to_vec(),
        prod.weights().to_vec(),
    )))
}

/// The order-`n` diagonal self-joining `Δ(y,…,y) = μ(y)`.
pub fn diagonal_joining(space: &Arc<FiniteSpace>, order: usize) -> Result<JoiningTensor> {
    if order == 0 {
        return invalid("diagonal joining of order 0");
    }
    let factors = vec![Arc::clone(space); order];
    let measure = MeasureTensor::from_sparse(
        factors,
        (0..space.atom_count()).map(|y| (vec![y; order], space.weight(y).clone())),
    )?;
    Ok(JoiningTensor(measure))
}

/// `max_{g,t} |v(g t_0, …, g t_{n−1}) − v(t)|` over the generators.
pub fn diagonal_invariance_defect(v: &MeasureTensor, gens: &ActionGenerators) -> Result<Rational> {
    if let Some(i) = v.factors.iter().position(|f| !same_space(f, gens.space())) {
        return invalid(format!("factor {i} is not the action's space"));
    }
    let mut worst = Rational::zero();
    let mut tuple = vec![0; v.order()];
    for g in gens.generators() {
        for (i, val) in v.entries.iter().enumerate() {
            v.shape.write_tuple(&mut { i }, &mut tuple);
            for t in tuple.iter_mut() {
                *t = g.apply(*t);
            }
            let d = abs_diff(&v.entries[v.shape.index(&tuple)], val);
            if d > worst {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// All strictly increasing `m`-subsets of `0..n`, lexicographically.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < m - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, &mut Vec::new(), &mut out);
    out
}

/// Max over all `m`-faces of the sup-distance between the face marginal and
/// the product of its factor measures.
pub fn face_independence_defect(v: &MeasureTensor, m: usize) -> Result<Rational> {
    if m < 1 || m >= v.order() {
        return invalid(format!(
            "face size {m} outside 1..{} for an order-{} tensor",
            v.order(),
            v.order()
        ));
    }
    let mut worst = Rational::zero();
    for face in subsets(v.order(), m) {
        let marg = v.marginal(&face)?;
        let prod = product_joining(marg.factors())?;
        let d = sup_distance(&marg, &prod)?;
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

fn complement(order: usize, distinguished: usize) -> Vec<usize> {
    (0..order).filter(|&i| i != distinguished).collect()
}

/// Membership in the class of measures whose distinguished edge is `μ` and
/// whose complementary face is the product measure.
pub fn in_class_m(v: &MeasureTensor, distinguished: usize) -> Result<bool> {
    if v.order() < 2 {
        return invalid("class membership needs order at least 2");
    }
    if distinguished >= v.order() {
        return invalid(format!(
            "distinguished index {distinguished} outside 0..{}",
            v.order()
        ));
    }
    let edge = v.marginal(&[distinguished])?;
    if edge.entries() != v.factors[distinguished].weights() {
        return Ok(false);
    }
    let rest = v.marginal(&complement(v.order(), distinguished))?;
    Ok(rest == *product_joining(rest.factors())?)
}

/// The Markov operator paired with a joining: source is the distinguished
/// factor, target is the product of the others, and
/// `kernel[r][y] = v(y, r) / μ_rest(r)`. Requires the complementary face to
/// be the product measure (always true at order 2).
pub fn operator_from_joining(v: &JoiningTensor, distinguished: usize) -> Result<MarkovOperator> {
    if v.order() < 2 || distinguished >= v.order() {
        return invalid(format!(
            "distinguished index {distinguished} invalid for order {}",
            v.order()
        ));
    }
    let rest_coords = complement(v.order(), distinguished);
    let rest = v.marginal(&rest_coords)?;
    let rest_space = product_space(rest.factors())?;
    if rest.entries() != rest_space.weights() {
        return precondition("complementary face is not the product measure");
    }
    let source = Arc::clone(&v.factors[distinguished]);
    let ns = source.atom_count();
    let mut kernel = vec![Rational::zero(); rest_space.atom_count() * ns];
    let mut tuple = vec![0; v.order()];
    for (i, val) in v.entries.iter().enumerate() {
        if val.is_zero() {
            continue;
        }
        v.shape.write_tuple(&mut { i }, &mut tuple);
        let y = tuple[distinguished];
        let r = rest_coords
            .iter()
            .fold(0, |acc, &c| acc * v.factors[c].atom_count() + tuple[c]);
        kernel[r * ns + y] = val / rest_space.weight(r);
    }
    Ok(MarkovOperator::from_flat_unchecked(
        source, rest_space, kernel,
    ))
}

/// Order-2 joining `v(y, t) = μ_target(t)·kernel[t][y]` over (source, target).
pub fn joining_from_operator(p: &MarkovOperator) -> JoiningTensor {
    joining_from_operator_into(p, &[Arc::clone(p.target())], 0)
        .expect("target is its own single factor")
}

/// Inverse of [`operator_from_joining`]: the target is split back into
/// `rest_factors` and the source is placed at `distinguished`.
pub fn joining_from_operator_into(
    p: &MarkovOperator,
    rest_factors: &[Arc<FiniteSpace>],
    distinguished: usize,
) -> Result<JoiningTensor> {
    let target = product_space(rest_factors)?;
    if !same_space(&target, p.target()) {
        return invalid("rest factors do not multiply to the operator's target");
    }
    if distinguished > rest_factors.len() {
        return invalid("distinguished position beyond the tensor order");
    }
    let mut factors = rest_factors.to_vec();
    factors.insert(distinguished, Arc::clone(p.source()));
    let shape = Shape::new(factors.iter().map(|f| f.atom_count()).collect());
    let rest_shape = Shape::new(rest_factors.iter().map(|f| f.atom_count()).collect());
    let mut entries = vec![Rational::zero(); shape.len()];
    let mut tuple = vec![0; factors.len()];
    for r in 0..target.atom_count() {
        let rest_tuple = rest_shape.tuple(r);
        for y in 0..p.source().atom_count() {
            let k = p.entry(r, y);
            if k.is_zero() {
                continue;
            }
            tuple[..distinguished].copy_from_slice(&rest_tuple[..distinguished]);
            tuple[distinguished] = y;
            tuple[distinguished + 1..].copy_from_slice(&rest_tuple[distinguished..]);
            entries[shape.index(&tuple)] = target.weight(r) * k;
        }
    }
    Ok(JoiningTensor::new_unchecked(
        MeasureTensor::from_parts_unchecked(factors, entries),
    ))
}

/// Pushes a joining through one Markov operator per factor.
pub fn push_joining(v: &JoiningTensor, ops: &[MarkovOperator]) -> Result<JoiningTensor> {
    Ok(JoiningTensor::new_unchecked(v.0.push(ops)?))
}

/// Sup-distance of `(T_j × T_{1,j} × … )ν` to the product joining for
/// `j = 1..=j_max`. Coordinate 0 is distinguished; `distinguished(j)`
/// supplies `T_j` and `fiber(j, i)` supplies `T_{i,j}` for `i ≥ 1`.
///
/// The push is defined for every joining. Convergence to the product is
/// only guaranteed for the class M; use
/// [`lemma33_convergence_trace_checked`] to enforce that.
pub fn lemma33_convergence_trace<D, F>(
    v: &JoiningTensor,
    distinguished: D,
    fiber: F,
    j_max: u32,
) -> Result<Vec<Rational>>
where
    D: Fn(u32) -> MarkovOperator,
    F: Fn(u32, usize) -> MarkovOperator,
{
    (1..=j_max)
        .map(|j| {
            let ops: Vec<MarkovOperator> = std::iter::once(distinguished(j))
                .chain((1..v.order()).map(|i| fiber(j, i)))
                .collect();
            let pushed = push_joining(v, &ops)?;
            let prod = product_joining(pushed.factors())?;
            sup_distance(&pushed, &prod)
        })
        .collect()
}

/// [`lemma33_convergence_trace`] restricted to the class M with coordinate
/// 0 distinguished.
pub fn lemma33_convergence_trace_checked<D, F>(
    v: &JoiningTensor,
    distinguished: D,
    fiber: F,
    j_max: u32,
) -> Result<Vec<Rational>>
where
    D: Fn(u32) -> MarkovOperator,
    F: Fn(u32, usize) -> MarkovOperator,
{
    if !in_class_m(v, 0)? {
        return precondition("measure is not in the class M with distinguished coordinate 0");
    }
    lemma33_convergence_trace(v, distinguished, fiber, j_max)
}

/// Conditional fiber measures indexed by base tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivariantField {
    base_spaces: Vec<Arc<FiniteSpace>>,
    fiber_spaces: Vec<Arc<FiniteSpace>>,
    base_coords: Vec<usize>,
    assignment: Vec<MeasureTensor>,
}

impl EquivariantField {
    /// `assignment` is indexed by base tuples in lexicographic order.
    /// `base_coords` records where the base factors sit in the joint layout
    /// used by [`EquivariantField::reassemble`].
    pub fn new(
        base_spaces: Vec<Arc<FiniteSpace>>,
        fiber_spaces: Vec<Arc<FiniteSpace>>,
        base_coords: Vec<usize>,
        assignment: Vec<MeasureTensor>,
    ) -> Result<Self> {
        let base_len: usize = base_spaces.iter().map(|s| s.atom_count()).product();
        if base_spaces.is_empty() || fiber_spaces.is_empty() {
            return invalid("field needs base and fiber factors");
        }
        if base_coords.len() != base_spaces.len()
            || base_coords.windows(2).any(|w| w[0] >= w[1])
            || base_coords
                .last()
                .is_some_and(|&c| c >= base_spaces.len() + fiber_spaces.len())
        {
            return invalid("base coordinates do not fit the joint layout");
        }
        if assignment.len() != base_len {
            return invalid(format!(
                "field has {} fiber measures, base has {base_len} tuples",
                assignment.len()
            ));
        }
        for (i, t) in assignment.iter().enumerate() {
            if t.order() != fiber_spaces.len()
                || t.factors()
                    .iter()
                    .zip(&fiber_spaces)
                    .any(|(a, b)| !same_space(a, b))
            {
                return invalid(format!("fiber measure {i} has the wrong factors"));
            }
        }
        Ok(Self {
            base_spaces,
            fiber_spaces,
            base_coords,
            assignment,
        })
    }

    pub fn base_spaces(&self) -> &[Arc<FiniteSpace>] {
        &self.base_spaces
    }

    pub fn fiber_spaces(&self) -> &[Arc<FiniteSpace>] {
        &self.fiber_spaces
    }

    pub fn base_shape(&self) -> Shape {
        Shape::new(self.base_spaces.iter().map(|s| s.atom_count()).collect())
    }

    pub fn at(&self, base_tuple: &[usize]) -> &MeasureTensor {
        &self.assignment[self.base_shape().index(base_tuple)]
    }

    /// `v(x, y) = μ^m(x)·field(x)(y)` in the original joint layout.
    pub fn reassemble(&self) -> MeasureTensor {
        let order = self.base_spaces.len() + self.fiber_spaces.len();
        let fiber_coords: Vec<usize> = (0..order)
            .filter(|c| !self.base_coords.contains(c))
            .collect();
        let mut factors: Vec<Arc<FiniteSpace>> = Vec::with_capacity(order);
        let (mut b, mut f) = (self.base_spaces.iter(), self.fiber_spaces.iter());
        for c in 0..order {
            let next = if self.base_coords.contains(&c) {
                b.next()
            } else {
                f.next()
            };
            factors.push(Arc::clone(next.expect("layout sized above")));
        }
        let shape = Shape::new(factors.iter().map(|s| s.atom_count()).collect());
        let base_weights = product_space(&self.base_spaces).expect("nonempty");
        let mut entries = vec![Rational::zero(); shape.len()];
        let base_shape = self.base_shape();
        let mut tuple = vec![0; order];
        for (xi, fiber) in self.assignment.iter().enumerate() {
            let x = base_shape.tuple(xi);
            for (y, val) in fiber.nonzero() {
                for (&c, &xv) in self.base_coords.iter().zip(&x) {
                    tuple[c] = xv;
                }
                for (&c, &yv) in fiber_coords.iter().zip(&y) {
                    tuple[c] = yv;
                }
                entries[shape.index(&tuple)] = base_weights.weight(xi) * val;
            }
        }
        MeasureTensor::from_parts_unchecked(factors, entries)
    }
}

/// Conditional measures of `v` given the coordinates `base_coords`. The base
/// marginal must equal the product of the base factor measures.
pub fn disintegrate(v: &MeasureTensor, base_coords: &[usize]) -> Result<EquivariantField> {
    if base_coords.is_empty() || base_coords.len() >= v.order() {
        return invalid("base coordinates must be a nonempty proper subset");
    }
    let base = v.marginal(base_coords)?;
    let base_product = product_space(base.factors())?;
    if base.entries() != base_product.weights() {
        return precondition("base marginal is not the product of the base measures");
    }
    let fiber_coords: Vec<usize> = (0..v.order())
        .filter(|c| !base_coords.contains(c))
        .collect();
    let fiber_spaces: Vec<_> = fiber_coords
        .iter()
        .map(|&c| Arc::clone(&v.factors[c]))
        .collect();
    let fiber_shape = Shape::new(fiber_spaces.iter().map(|s| s.atom_count()).collect());
    let mut raw = vec![vec![Rational::zero(); fiber_shape.len()]; base_product.atom_count()];
    let mut tuple = vec![0; v.order()];
    for (i, val) in v.entries.iter().enumerate() {
        if val.is_zero() {
            continue;
        }
        v.shape.write_tuple(&mut { i }, &mut tuple);
        let x = base_coords
            .iter()
            .fold(0, |acc, &c| acc * v.factors[c].atom_count() + tuple[c]);
        let y = fiber_coords
            .iter()
            .fold(0, |acc, &c| acc * v.factors[c].atom_count() + tuple[c]);
        raw[x][y] = val / base_product.weight(x);
    }
    let fiber_product = product_space(&fiber_spaces)?;
    let assignment = raw
        .into_iter()
        .map(|entries| {
            if entries.iter().all(Zero::is_zero) {
                // zero-mass base tuple
                MeasureTensor::from_parts_unchecked(
                    fiber_spaces.clone(),
                    fiber_product.weights().to_vec(),
                )
            } else {
                MeasureTensor::from_parts_unchecked(fiber_spaces.clone(), entries)
            }
        })
        .collect();
    EquivariantField::new(
        base.factors().to_vec(),
        fiber_spaces,
        base_coords.to_vec(),
        assignment,
    )
}

/// Forward pushforward by one fiber automorphism per factor.
fn push_by_permutations(t: &MeasureTensor, perms: &[&crate::space::Automorphism]) -> MeasureTensor {
    let mut out = vec![Rational::zero(); t.entries.len()];
    let mut tuple = vec![0; t.order()];
    for (i, val) in t.entries.iter().enumerate() {
        if val.is_zero() {
            continue;
        }
        t.shape.write_tuple(&mut { i }, &mut tuple);
        for (slot, p) in tuple.iter_mut().zip(perms) {
            *slot = p.apply(*slot);
        }
        out[t.shape.index(&tuple)] = val.clone();
    }
    MeasureTensor::from_parts_unchecked(t.factors.clone(), out)
}

/// `max_x sup-dist( field(S x_0, …), (R_{x_0} ⊗ … ⊗ R_{x_{m−1}}) field(x) )`.
pub fn equivariance_defect(
    field: &EquivariantField,
    skew: &SkewProduct,
    m: usize,
) -> Result<Rational> {
    if field.base_spaces.len() != m || field.fiber_spaces.len() != m {
        return invalid(format!("field must have {m} base and {m} fiber factors"));
    }
    if field
        .base_spaces
        .iter()
        .any(|s| !same_space(s, skew.base()))
        || field
            .fiber_spaces
            .iter()
            .any(|s| !same_space(s, skew.fiber()))
    {
        return invalid("field spaces do not match the skew product");
    }
    let shape = field.base_shape();
    let mut worst = Rational::zero();
    for (xi, measure) in field.assignment.iter().enumerate() {
        let x = shape.tuple(xi);
        let sx: Vec<usize> = x.iter().map(|&a| skew.base_map().apply(a)).collect();
        let perms: Vec<_> = x.iter().map(|&a| skew.fiber_map(a)).collect();
        let pushed = push_by_permutations(measure, &perms);
        let d = sup_distance(field.at(&sx), &pushed)?;
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}
