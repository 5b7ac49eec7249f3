//! The tensor Hopf algebra `H⊗H` with `(H⊗H)_n = ⊕_{i+j=n} H_i⊗H_j`, the
//! pullback `(m_H)*: φ ↦ φ∘m_H`, the bilinear map `β(φ,ψ) = m_B∘(φ⊗ψ)`, and
//! the identities relating them to convolution.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use super::FindimError;
use crate::charalg::{CharError, Functional};
use crate::ck::butcher::random_rational;
use crate::coeff::Coeff;
use crate::hopf::{Degree, HopfAlgebra, HopfError, LinComb, TensorSum, Truncation};

/// `H⊗H` with componentwise product and `Δ(a⊗b) = Σ (a'⊗b')⊗(a''⊗b'')`.
pub struct TensorSquare<H: HopfAlgebra> {
    inner: Arc<H>,
}

impl<H: HopfAlgebra> TensorSquare<H> {
    pub fn new(inner: Arc<H>) -> Arc<Self> {
        Arc::new(TensorSquare { inner })
    }

    pub fn inner(&self) -> &Arc<H> {
        &self.inner
    }
}

fn tensor<E: Ord + Clone>(x: &LinComb<E>, y: &LinComb<E>) -> LinComb<(E, E)> {
    let mut out = LinComb::zero();
    for (a, ca) in x.iter() {
        for (b, cb) in y.iter() {
            out.add_term((a.clone(), b.clone()), ca * cb);
        }
    }
    out
}

impl<H: HopfAlgebra> HopfAlgebra for TensorSquare<H> {
    type Elem = (H::Elem, H::Elem);

    fn name(&self) -> String {
        format!("tensor:{}", self.inner.name())
    }

    fn degree(&self, e: &Self::Elem) -> Degree {
        self.inner.degree(&e.0) + self.inner.degree(&e.1)
    }

    fn degrees_up_to(&self, cutoff: Degree) -> Vec<Degree> {
        let ds = self.inner.degrees_up_to(cutoff);
        let set: BTreeSet<Degree> = ds
            .iter()
            .flat_map(|a| ds.iter().map(move |b| *a + *b))
            .filter(|d| *d <= cutoff)
            .collect();
        set.into_iter().collect()
    }

    fn basis_of_degree(&self, d: Degree) -> Vec<Self::Elem> {
        let mut out = Vec::new();
        for a in self.inner.degrees_up_to(d) {
            let right = self.inner.basis_of_degree(d - a);
            if right.is_empty() {
                continue;
            }
            for l in self.inner.basis_of_degree(a) {
                for r in &right {
                    out.push((l.clone(), r.clone()));
                }
            }
        }
        out
    }

    /// Products in `H⊗H` up to degree `T` only involve products in `H` up to `T`.
    fn top_degree(&self) -> Option<Degree> {
        self.inner.top_degree()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn unit(&self) -> LinComb<Self::Elem> {
        let u = self.inner.unit();
        tensor(&u, &u)
    }

    fn counit(&self, e: &Self::Elem) -> BigRational {
        self.inner.counit(&e.0) * self.inner.counit(&e.1)
    }

    fn product(&self, a: &Self::Elem, b: &Self::Elem) -> Option<LinComb<Self::Elem>> {
        let l = self.inner.product(&a.0, &b.0)?;
        let r = self.inner.product(&a.1, &b.1)?;
        Some(tensor(&l, &r))
    }

    fn has_product(&self) -> bool {
        self.inner.has_product()
    }

    fn coproduct(&self, e: &Self::Elem) -> TensorSum<Self::Elem> {
        let mut out = TensorSum::zero();
        let da = self.inner.coproduct(&e.0);
        let db = self.inner.coproduct(&e.1);
        for ((a1, a2), ca) in da.iter() {
            for ((b1, b2), cb) in db.iter() {
                out.add_term(((a1.clone(), b1.clone()), (a2.clone(), b2.clone())), ca * cb);
            }
        }
        out
    }

    fn supplied_antipode(&self, e: &Self::Elem) -> Option<LinComb<Self::Elem>> {
        let l = self.inner.supplied_antipode(&e.0)?;
        let r = self.inner.supplied_antipode(&e.1)?;
        Some(tensor(&l, &r))
    }

    fn elem_id(&self, e: &Self::Elem) -> String {
        format!("{}|{}", self.inner.elem_id(&e.0), self.inner.elem_id(&e.1))
    }

    fn parse_elem(&self, id: &str) -> Option<Self::Elem> {
        let (l, r) = id.split_once('|')?;
        Some((self.inner.parse_elem(l)?, self.inner.parse_elem(r)?))
    }
}

/// `H⊗H` truncated at the same cutoff as `trunc`.
pub fn tensor_truncation<H: HopfAlgebra>(
    trunc: &Arc<Truncation<H>>,
) -> Result<Arc<Truncation<TensorSquare<H>>>, HopfError> {
    Truncation::new(TensorSquare::new(trunc.hopf().clone()), trunc.cutoff())
}

fn check_cutoff<H: HopfAlgebra, S: Coeff>(
    f: &Functional<H, S>,
    tt: &Truncation<TensorSquare<H>>,
) -> Result<(), FindimError> {
    if f.cutoff() != tt.cutoff() {
        return Err(CharError::Mismatch(f.cutoff().to_string(), tt.cutoff().to_string()).into());
    }
    Ok(())
}

/// `(m_H)*(φ)(a⊗b) = φ(ab)`.
pub fn precompose_mult<H: HopfAlgebra, S: Coeff>(
    phi: &Functional<H, S>,
    tt: &Arc<Truncation<TensorSquare<H>>>,
) -> Result<Functional<TensorSquare<H>, S>, FindimError> {
    check_cutoff(phi, tt)?;
    let h = tt.hopf().inner();
    let values = tt
        .basis()
        .iter()
        .map(|(a, b)| {
            let p = h.product(a, b).ok_or(FindimError::NoProduct)?;
            Ok(p.iter().fold(S::zero(), |acc, (e, c)| acc + phi.at(e).scale(c)))
        })
        .collect::<Result<Vec<S>, FindimError>>()?;
    Ok(Functional::from_values(tt, values))
}

/// `β(φ,ψ)(a⊗b) = φ(a)ψ(b)`.
pub fn beta<H: HopfAlgebra, S: Coeff>(
    phi: &Functional<H, S>,
    psi: &Functional<H, S>,
    tt: &Arc<Truncation<TensorSquare<H>>>,
) -> Result<Functional<TensorSquare<H>, S>, FindimError> {
    check_cutoff(phi, tt)?;
    check_cutoff(psi, tt)?;
    Ok(Functional::from_fn(tt, |(a, b)| phi.at(a) * psi.at(b)))
}

/// `ξ ∘ Δ` for a functional `ξ` on `H⊗H`: the convolution re-derived from `β`.
fn precompose_coproduct<H: HopfAlgebra, S: Coeff>(
    xi: &Functional<TensorSquare<H>, S>,
    trunc: &Arc<Truncation<H>>,
) -> Functional<H, S> {
    Functional::from_fn(trunc, |e| {
        trunc
            .hopf()
            .coproduct(e)
            .iter()
            .fold(S::zero(), |acc, ((l, r), c)| acc + xi.at(&(l.clone(), r.clone())).scale(c))
    })
}

/// Random rational values on every basis element; with `augmented`, the
/// degree-0 block is zero.
pub fn random_functional<H: HopfAlgebra, R: Rng>(
    rng: &mut R,
    trunc: &Arc<Truncation<H>>,
    augmented: bool,
) -> Functional<H, BigRational> {
    let zero = trunc.degree_zero();
    let values = (0..trunc.dim())
        .map(|i| {
            if augmented && zero.contains(&i) {
                BigRational::zero()
            } else {
                random_rational(rng, 3, 5)
            }
        })
        .collect();
    Functional::from_values(trunc, values)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MultifaltReport {
    pub instance: String,
    pub samples: usize,
    /// `(φ₁◊ψ₁)⋆(φ₂◊ψ₂) = (φ₁⋆φ₂)◊(ψ₁⋆ψ₂)`.
    pub multifalt_failures: usize,
    /// `φ⋆ψ = β(φ,ψ)∘Δ`.
    pub beta_delta_failures: usize,
    /// `(m_H)*(φ⋆ψ) = (m_H)*φ ⋆ (m_H)*ψ`; skipped without a product.
    pub morphism_failures: usize,
    pub morphism_checked: bool,
    /// `β(φ,1)⋆β(1,φ) = β(φ,φ) = β(1,φ)⋆β(φ,1)`.
    pub commuting_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl MultifaltReport {
    pub fn pass(&self) -> bool {
        self.multifalt_failures == 0
            && self.beta_delta_failures == 0
            && self.morphism_failures == 0
            && self.commuting_failures == 0
    }
}

pub type Quadruple<H, S> = [Functional<H, S>; 4];

/// Checks the appendix identities on every quadruple `(φ₁, ψ₁, φ₂, ψ₂)`.
pub fn multifalt_check<H: HopfAlgebra, S: Coeff>(
    tt: &Arc<Truncation<TensorSquare<H>>>,
    quads: &[Quadruple<H, S>],
    tol: f64,
) -> Result<MultifaltReport, FindimError> {
    let mut report = MultifaltReport {
        instance: tt.hopf().name(),
        samples: quads.len(),
        morphism_checked: tt.hopf().has_product(),
        ..Default::default()
    };
    let note = |r: &mut MultifaltReport, s: usize, what: &str| {
        r.witness.get_or_insert_with(|| format!("sample {s}: {what}"));
    };
    for (s, [p1, q1, p2, q2]) in quads.iter().enumerate() {
        let trunc = p1.truncation();
        let lhs = beta(p1, q1, tt)?.convolve(&beta(p2, q2, tt)?)?;
        let rhs = beta(&p1.convolve(p2)?, &q1.convolve(q2)?, tt)?;
        if !lhs.approx_eq(&rhs, tol) {
            report.multifalt_failures += 1;
            note(&mut report, s, "multifalt");
        }
        for (a, b) in [(p1, q1), (p2, q2)] {
            let direct = a.convolve(b)?;
            let via_beta = precompose_coproduct(&beta(a, b, tt)?, trunc);
            if !direct.approx_eq(&via_beta, tol) {
                report.beta_delta_failures += 1;
                note(&mut report, s, "β∘Δ");
            }
        }
        if report.morphism_checked {
            let lhs = precompose_mult(&p1.convolve(p2)?, tt)?;
            let rhs = precompose_mult(p1, tt)?.convolve(&precompose_mult(p2, tt)?)?;
            if !lhs.approx_eq(&rhs, tol) {
                report.morphism_failures += 1;
                note(&mut report, s, "(m_H)* morphism");
            }
        }
        let unit = Functional::unit(trunc);
        let left = beta(p1, &unit, tt)?;
        let right = beta(&unit, p1, tt)?;
        let both = beta(p1, p1, tt)?;
        if !left.convolve(&right)?.approx_eq(&both, tol) || !right.convolve(&left)?.approx_eq(&both, tol) {
            report.commuting_failures += 1;
            note(&mut report, s, "commuting pair");
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    /// `φ` is an infinitesimal character.
    pub p1: bool,
    /// `exp(φ)∘m_H = β(exp φ, exp φ)`.
    pub p2: bool,
    /// `exp(φ)` is a character.
    pub p3: bool,
}

impl EquivalenceReport {
    /// `P2 ⇔ P3`, and `P1 ⇒ P3`; together these give `P1 ⇒ (P2 ⇔ P3)`.
    pub fn pattern_holds(&self) -> bool {
        self.p2 == self.p3 && (!self.p1 || self.p3)
    }

    /// `P1 ⇔ P3`, expected on connected instances.
    pub fn full_equivalence(&self) -> bool {
        self.p1 == self.p3
    }
}

/// Evaluates P1, P2, P3 for `φ`, whose degree-0 part must make `exp⋆` terminate.
pub fn exp_character_equivalence<H: HopfAlgebra, S: Coeff>(
    phi: &Functional<H, S>,
    tt: &Arc<Truncation<TensorSquare<H>>>,
    tol: f64,
) -> Result<EquivalenceReport, FindimError> {
    let e = phi.exp_star()?;
    Ok(EquivalenceReport {
        p1: phi.is_infinitesimal_tol(tol),
        p2: precompose_mult(&e, tt)?.approx_eq(&beta(&e, &e, tt)?, tol),
        p3: e.is_character_tol(tol),
    })
}
