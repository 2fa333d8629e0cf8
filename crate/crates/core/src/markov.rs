//! Measure-intertwining stochastic kernels between finite spaces.
//!
//! Kernels are indexed `[target atom][source atom]` and act on functions by
//! `(Pf)(t) = Σ_s kernel[t][s] f(s)`. Every row sums to one and
//! `Σ_t μ_target(t) kernel[t][s] = μ_source(s)`.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use crate::rational::{abs_diff, Rational};
use crate::space::{same_space, Automorphism, FiniteSpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovOperator {
    source: Arc<FiniteSpace>,
    target: Arc<FiniteSpace>,
    kernel: Vec<Rational>,
}

impl MarkovOperator {
    /// Validates nonnegativity, row-stochasticity and measure intertwining.
    pub fn new(
        source: Arc<FiniteSpace>,
        target: Arc<FiniteSpace>,
        kernel: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let (ns, nt) = (source.atom_count(), target.atom_count());
        if kernel.len() != nt || kernel.iter().any(|row| row.len() != ns) {
            return invalid(format!("kernel must be {nt} x {ns}"));
        }
        let flat: Vec<Rational> = kernel.into_iter().flatten().collect();
        let op = Self {
            source,
            target,
            kernel: flat,
        };
        op.validate()?;
        Ok(op)
    }

    pub(crate) fn from_flat_unchecked(
        source: Arc<FiniteSpace>,
        target: Arc<FiniteSpace>,
        kernel: Vec<Rational>,
    ) -> Self {
        let op = Self {
            source,
            target,
            kernel,
        };
        debug_assert!(op.validate().is_ok());
        op
    }

    fn validate(&self) -> Result<()> {
        let (ns, nt) = (self.source.atom_count(), self.target.atom_count());
        if self.kernel.iter().any(|k| k.is_negative()) {
            return invalid("kernel has a negative entry");
        }
        for t in 0..nt {
            let row: Rational = self.kernel[t * ns..(t + 1) * ns].iter().sum();
            if !row.is_one() {
                return invalid(format!("kernel row {t} does not sum to 1"));
            }
        }
        for s in 0..ns {
            let pushed: Rational = (0..nt)
                .map(|t| self.target.weight(t) * &self.kernel[t * ns + s])
                .sum();
            if &pushed != self.source.weight(s) {
                return invalid(format!(
                    "kernel does not intertwine the measures at atom {s}"
                ));
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Arc<FiniteSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteSpace> {
        &self.target
    }

    pub fn entry(&self, target: usize, source: usize) -> &Rational {
        &self.kernel[target * self.source.atom_count() + source]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.kernel
            .chunks(self.source.atom_count())
            .map(<[Rational]>::to_vec)
            .collect()
    }

    /// `(Pf)(t) = Σ_s kernel[t][s] f(s)`.
    pub fn apply(&self, f: &[Rational]) -> Result<Vec<Rational>> {
        let ns = self.source.atom_count();
        if f.len() != ns {
            return invalid(format!(
                "function has {} values, source has {ns} atoms",
                f.len()
            ));
        }
        Ok(self
            .kernel
            .chunks(ns)
            .map(|row| row.iter().zip(f).map(|(k, v)| k * v).sum())
            .collect())
    }

    /// `self · other`: apply `other` to a function first, then `self`.
    pub fn then(&self, other: &MarkovOperator) -> Result<MarkovOperator> {
        if !same_space(&self.source, &other.target) {
            return invalid("operator product needs other.target == self.source");
        }
        let (ni, nk, nj) = (
            self.target.atom_count(),
            self.source.atom_count(),
            other.source.atom_count(),
        );
        let mut out = vec![Rational::zero(); ni * nj];
        for i in 0..ni {
            for k in 0..nk {
                let a = &self.kernel[i * nk + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..nj {
                    let b = &other.kernel[k * nj + j];
                    if !b.is_zero() {
                        out[i * nj + j] += a * b;
                    }
                }
            }
        }
        Ok(Self::from_flat_unchecked(
            Arc::clone(&other.source),
            Arc::clone(&self.target),
            out,
        ))
    }

    /// `self^k` for a square operator, `k ≥ 0`.
    pub fn power(&self, k: u32) -> Result<MarkovOperator> {
        if !same_space(&self.source, &self.target) {
            return invalid("power of a non-square operator");
        }
        let mut result = identity(Arc::clone(&self.source));
        let mut sq = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.then(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.then(&sq)?;
            }
        }
        Ok(result)
    }

    /// Tensor product acting on the product spaces (lexicographic layout).
    pub fn tensor(&self, other: &MarkovOperator) -> MarkovOperator {
        let source = crate::space::product_space(&[self.source.clone(), other.source.clone()])
            .expect("nonempty");
        let target = crate::space::product_space(&[self.target.clone(), other.target.clone()])
            .expect("nonempty");
        let (ns1, ns2) = (self.source.atom_count(), other.source.atom_count());
        let (nt1, nt2) = (self.target.atom_count(), other.target.atom_count());
        let mut kernel = Vec::with_capacity(ns1 * ns2 * nt1 * nt2);
        for t1 in 0..nt1 {
            for t2 in 0..nt2 {
                for s1 in 0..ns1 {
                    for s2 in 0..ns2 {
                        kernel.push(&self.kernel[t1 * ns1 + s1] * &other.kernel[t2 * ns2 + s2]);
                    }
                }
            }
        }
        Self::from_flat_unchecked(source, target, kernel)
    }
}

pub fn identity(space: Arc<FiniteSpace>) -> MarkovOperator {
    koopman(&Automorphism::identity(space))
}

/// Koopman operator `(Pf)(x) = f(t(x))`.
pub fn koopman(t: &Automorphism) -> MarkovOperator {
    let n = t.space().atom_count();
    let mut kernel = vec![Rational::zero(); n * n];
    for x in 0..n {
        kernel[x * n + t.apply(x)] = Rational::one();
    }
    MarkovOperator::from_flat_unchecked(Arc::clone(t.space()), Arc::clone(t.space()), kernel)
}

/// Projection onto constants: every row equals the measure.
pub fn theta(space: Arc<FiniteSpace>) -> MarkovOperator {
    let n = space.atom_count();
    let kernel = (0..n)
        .flat_map(|_| space.weights().iter().cloned())
        .collect();
    MarkovOperator::from_flat_unchecked(Arc::clone(&space), space, kernel)
}

/// Max entrywise kernel difference.
pub fn dist_w(p: &MarkovOperator, q: &MarkovOperator) -> Result<Rational> {
    if !same_space(&p.source, &q.source) || !same_space(&p.target, &q.target) {
        return invalid("dist_w between operators on different spaces");
    }
    Ok(p.kernel
        .iter()
        .zip(&q.kernel)
        .map(|(a, b)| abs_diff(a, b))
        .max()
        .unwrap_or_else(Rational::zero))
}

/// `c·p + (1−c)·q`.
pub fn affine_combination(
    c: &Rational,
    p: &MarkovOperator,
    q: &MarkovOperator,
) -> Result<MarkovOperator> {
    if c.is_negative() || c > &Rational::one() {
        return invalid("combination weight must lie in [0, 1]");
    }
    if !same_space(&p.source, &q.source) || !same_space(&p.target, &q.target) {
        return invalid("affine combination of operators on different spaces");
    }
    let d = Rational::one() - c;
    let kernel = p
        .kernel
        .iter()
        .zip(&q.kernel)
        .map(|(a, b)| c * a + &d * b)
        .collect();
    Ok(MarkovOperator::from_flat_unchecked(
        Arc::clone(&p.source),
        Arc::clone(&p.target),
        kernel,
    ))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeResult {
    pub best_k: u32,
    pub best_eps: Rational,
    pub best_distance: Rational,
}

/// Closest approach of the powers `koopman(s)^k`, `1 ≤ k ≤ k_max`, to
/// `εI + (1−ε)Θ` over the grid. Ties go to the smallest `k`, then the
/// smallest `ε`.
pub fn weak_closure_probe(
    s: &Automorphism,
    eps_grid: &[Rational],
    k_max: u32,
) -> Result<ProbeResult> {
    if eps_grid.is_empty() {
        return invalid("empty epsilon grid");
    }
    if k_max < 1 {
        return invalid("k_max must be at least 1");
    }
    if let Some(e) = eps_grid
        .iter()
        .find(|e| !e.is_positive() || *e >= &Rational::one())
    {
        return invalid(format!(
            "grid value {} outside (0, 1)",
            crate::rational::to_canonical(e)
        ));
    }
    let space = Arc::clone(s.space());
    let id = identity(Arc::clone(&space));
    let th = theta(Arc::clone(&space));
    let mut grid: Vec<&Rational> = eps_grid.iter().collect();
    grid.sort();
    grid.dedup();
    let targets: Vec<MarkovOperator> = grid
        .iter()
        .map(|e| affine_combination(e, &id, &th))
        .collect::<Result<_>>()?;

    let step = koopman(s);
    let mut current = id.clone();
    let mut best: Option<ProbeResult> = None;
    for k in 1..=k_max {
        current = current.then(&step)?;
        for (eps, target) in grid.iter().zip(&targets) {
            let d = dist_w(&current, target)?;
            if best.as_ref().is_none_or(|b| d < b.best_distance) {
                best = Some(ProbeResult {
                    best_k: k,
                    best_eps: (*eps).clone(),
                    best_distance: d,
                });
            }
        }
    }
    Ok(best.expect("grid and k range are nonempty"))
}
