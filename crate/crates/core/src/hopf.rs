//! Graded Hopf algebras presented by a basis and rational structure constants.
//!
//! An instance only has to answer local questions (degree of a basis element,
//! product of two basis elements, coproduct of one). [`Truncation`] turns an
//! instance and a degree cutoff into dense index tables that the convolution
//! calculus in [`crate::charalg`] runs on.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::sync::{Arc, OnceLock};

use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::par::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HopfError {
    #[error("instance `{0}` has no product")]
    NoProduct(String),
    #[error("instance is not connected and supplies no antipode for `{0}`")]
    NoAntipode(String),
    #[error("reduced coproduct is only defined on positive degrees (got `{0}`)")]
    DegreeZero(String),
    #[error("`{elem}` of degree {degree} lies outside the truncation at {cutoff}")]
    OutsideTruncation {
        elem: String,
        degree: Degree,
        cutoff: Degree,
    },
    #[error("unknown basis id `{0}`")]
    UnknownId(String),
    #[error("negative degree {0}")]
    NegativeDegree(Degree),
    #[error("{0}")]
    Invalid(String),
}

/// A nonnegative rational degree. Integer gradings have denominator 1.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Degree(pub Rational64);

impl Degree {
    pub const ZERO: Degree = Degree(Rational64::new_raw(0, 1));

    pub fn int(n: i64) -> Self {
        Degree(Rational64::from_integer(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Degree(Rational64::new(n, d))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().ok()?;
                let d: i64 = d.trim().parse().ok()?;
                (d != 0).then(|| Degree::frac(n, d))
            }
            None => s.parse().ok().map(Degree::int),
        }
    }
}

impl std::ops::Add for Degree {
    type Output = Degree;
    fn add(self, rhs: Degree) -> Degree {
        Degree(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Degree {
    type Output = Degree;
    fn sub(self, rhs: Degree) -> Degree {
        Degree(self.0 - rhs.0)
    }
}

impl Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

impl Serialize for Degree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            s.serialize_i64(*self.0.numer())
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

/// A finite rational linear combination of basis elements, zero terms dropped.
#[derive(Clone, PartialEq, Eq)]
pub struct LinComb<E: Ord>(BTreeMap<E, BigRational>);

impl<E: Ord + Clone> LinComb<E> {
    pub fn zero() -> Self {
        LinComb(BTreeMap::new())
    }

    pub fn basis(e: E) -> Self {
        Self::term(e, BigRational::one())
    }

    pub fn term(e: E, c: BigRational) -> Self {
        let mut l = Self::zero();
        l.add_term(e, c);
        l
    }

    pub fn add_term(&mut self, e: E, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.0.entry(e.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&e);
        }
    }

    pub fn add_scaled(&mut self, other: &LinComb<E>, c: &BigRational) {
        for (e, v) in &other.0 {
            self.add_term(e.clone(), v * c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeff(&self, e: &E) -> BigRational {
        self.0.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&E, &BigRational)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<E: Ord + Clone> FromIterator<(E, BigRational)> for LinComb<E> {
    fn from_iter<I: IntoIterator<Item = (E, BigRational)>>(iter: I) -> Self {
        let mut l = LinComb::zero();
        for (e, c) in iter {
            l.add_term(e, c);
        }
        l
    }
}

impl<E: Ord + Debug> Debug for LinComb<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

/// An element of `H ⊗ H` written in the tensor basis.
pub type TensorSum<E> = LinComb<(E, E)>;

/// A graded Hopf algebra (or, when [`HopfAlgebra::product`] returns `None`,
/// a graded coalgebra) over `Q`.
pub trait HopfAlgebra: Send + Sync {
    type Elem: Clone + Ord + Eq + Hash + Debug + Send + Sync;

    /// Stable instance name used in dumps.
    fn name(&self) -> String;

    fn degree(&self, e: &Self::Elem) -> Degree;

    /// All degrees carried by basis elements, ascending, up to `cutoff`.
    fn degrees_up_to(&self, cutoff: Degree) -> Vec<Degree>;

    fn basis_of_degree(&self, d: Degree) -> Vec<Self::Elem>;

    /// Highest degree carried by the basis, for finite instances.
    fn top_degree(&self) -> Option<Degree> {
        None
    }

    fn is_connected(&self) -> bool;

    fn unit(&self) -> LinComb<Self::Elem>;

    fn counit(&self, e: &Self::Elem) -> BigRational;

    /// `None` when the instance carries only a coalgebra structure, or when
    /// the product leaves a finite instance (its degree exceeds `top_degree`).
    fn product(&self, a: &Self::Elem, b: &Self::Elem) -> Option<LinComb<Self::Elem>>;

    fn has_product(&self) -> bool {
        true
    }

    fn coproduct(&self, e: &Self::Elem) -> TensorSum<Self::Elem>;

    /// An antipode table supplied with the instance data.
    fn supplied_antipode(&self, _e: &Self::Elem) -> Option<LinComb<Self::Elem>> {
        None
    }

    fn elem_id(&self, e: &Self::Elem) -> String;

    fn parse_elem(&self, id: &str) -> Option<Self::Elem>;
}

impl<H: HopfAlgebra + ?Sized> HopfAlgebra for Arc<H> {
    type Elem = H::Elem;
    fn name(&self) -> String {
        (**self).name()
    }
    fn degree(&self, e: &Self::Elem) -> Degree {
        (**self).degree(e)
    }
    fn degrees_up_to(&self, cutoff: Degree) -> Vec<Degree> {
        (**self).degrees_up_to(cutoff)
    }
    fn basis_of_degree(&self, d: Degree) -> Vec<Self::Elem> {
        (**self).basis_of_degree(d)
    }
    fn top_degree(&self) -> Option<Degree> {
        (**self).top_degree()
    }
    fn is_connected(&self) -> bool {
        (**self).is_connected()
    }
    fn unit(&self) -> LinComb<Self::Elem> {
        (**self).unit()
    }
    fn counit(&self, e: &Self::Elem) -> BigRational {
        (**self).counit(e)
    }
    fn product(&self, a: &Self::Elem, b: &Self::Elem) -> Option<LinComb<Self::Elem>> {
        (**self).product(a, b)
    }
    fn has_product(&self) -> bool {
        (**self).has_product()
    }
    fn coproduct(&self, e: &Self::Elem) -> TensorSum<Self::Elem> {
        (**self).coproduct(e)
    }
    fn supplied_antipode(&self, e: &Self::Elem) -> Option<LinComb<Self::Elem>> {
        (**self).supplied_antipode(e)
    }
    fn elem_id(&self, e: &Self::Elem) -> String {
        (**self).elem_id(e)
    }
    fn parse_elem(&self, id: &str) -> Option<Self::Elem> {
        (**self).parse_elem(id)
    }
}

/// Extends the product bilinearly to linear combinations.
pub fn mul_lincomb<H: HopfAlgebra + ?Sized>(
    h: &H,
    a: &LinComb<H::Elem>,
    b: &LinComb<H::Elem>,
) -> Result<LinComb<H::Elem>, HopfError> {
    let mut out = LinComb::zero();
    for (x, cx) in a.iter() {
        for (y, cy) in b.iter() {
            let p = h.product(x, y).ok_or_else(|| HopfError::NoProduct(h.name()))?;
            out.add_scaled(&p, &(cx * cy));
        }
    }
    Ok(out)
}

/// `Δ(h) - h⊗1 - 1⊗h` for a connected instance; empty on the unit.
pub fn reduced_coproduct<H: HopfAlgebra + ?Sized>(
    h: &H,
    e: &H::Elem,
) -> Result<TensorSum<H::Elem>, HopfError> {
    let unit = connected_unit(h)?;
    if &unit == e {
        return Ok(LinComb::zero());
    }
    if h.degree(e).is_zero() {
        return Err(HopfError::DegreeZero(h.elem_id(e)));
    }
    let mut d = h.coproduct(e);
    d.add_term((e.clone(), unit.clone()), -BigRational::one());
    d.add_term((unit, e.clone()), -BigRational::one());
    Ok(d)
}

fn connected_unit<H: HopfAlgebra + ?Sized>(h: &H) -> Result<H::Elem, HopfError> {
    if !h.is_connected() {
        return Err(HopfError::Invalid(format!("{} is not connected", h.name())));
    }
    let u = h.unit();
    let first = u.iter().next().map(|(e, c)| (e.clone(), c.is_one()));
    match first {
        Some((e, true)) if u.len() == 1 => Ok(e),
        _ => Err(HopfError::Invalid("connected unit must be a basis element".into())),
    }
}

/// An element of `H^{⊗n}`, keyed by the tuple of tensor legs.
pub type MultiTensor<E> = LinComb<Vec<E>>;

/// The `n`-fold coproduct `Δ^n := (id ⊗ Δ^{n-1}) ∘ Δ`, `Δ^1 = Δ`, producing
/// `n + 1` tensor legs.
pub fn iterated_coproduct<H: HopfAlgebra + ?Sized>(
    h: &H,
    e: &H::Elem,
    n: usize,
) -> MultiTensor<H::Elem> {
    assert!(n >= 1, "iterated coproduct needs n >= 1");
    let mut out = LinComb::zero();
    for ((l, r), c) in h.coproduct(e).iter() {
        if n == 1 {
            out.add_term(vec![l.clone(), r.clone()], c.clone());
        } else {
            for (tail, c2) in iterated_coproduct(h, r, n - 1).iter() {
                let mut legs = Vec::with_capacity(n + 1);
                legs.push(l.clone());
                legs.extend(tail.iter().cloned());
                out.add_term(legs, c * c2);
            }
        }
    }
    out
}

/// The same tensor as [`iterated_coproduct`], built by always splitting the
/// leftmost leg: `(Δ ⊗ id^{⊗(n-1)}) ∘ Δ^{n-1}`.
pub fn iterated_coproduct_left<H: HopfAlgebra + ?Sized>(
    h: &H,
    e: &H::Elem,
    n: usize,
) -> MultiTensor<H::Elem> {
    assert!(n >= 1);
    if n == 1 {
        return h
            .coproduct(e)
            .iter()
            .map(|((l, r), c)| (vec![l.clone(), r.clone()], c.clone()))
            .collect();
    }
    let mut out = LinComb::zero();
    for (legs, c) in iterated_coproduct_left(h, e, n - 1).iter() {
        for ((a, b), c2) in h.coproduct(&legs[0]).iter() {
            let mut v = Vec::with_capacity(n + 1);
            v.push(a.clone());
            v.push(b.clone());
            v.extend(legs[1..].iter().cloned());
            out.add_term(v, c * c2);
        }
    }
    out
}

type SparseRow = Vec<(usize, BigRational)>;
/// `(a, b, a·b)` for basis pairs whose product stays inside the truncation.
type ProductTable = Vec<(usize, usize, SparseRow)>;

/// Dense index tables for the basis of degree `<= cutoff`.
pub struct Truncation<H: HopfAlgebra> {
    hopf: Arc<H>,
    cutoff: Degree,
    basis: Vec<H::Elem>,
    ids: Vec<String>,
    degrees: Vec<Degree>,
    index: HashMap<H::Elem, usize>,
    /// Ranges of basis indices per distinct degree, ascending.
    blocks: Vec<(Degree, std::ops::Range<usize>)>,
    counit: Vec<BigRational>,
    unit: SparseRow,
    coproducts: Vec<Vec<(usize, usize, BigRational)>>,
    products: OnceLock<Result<ProductTable, HopfError>>,
    antipode: OnceLock<Result<Vec<SparseRow>, HopfError>>,
}

impl<H: HopfAlgebra> Debug for Truncation<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Truncation")
            .field("instance", &self.hopf.name())
            .field("cutoff", &self.cutoff)
            .field("dim", &self.basis.len())
            .finish()
    }
}

impl<H: HopfAlgebra> Truncation<H> {
    pub fn new(hopf: Arc<H>, cutoff: Degree) -> Result<Arc<Self>, HopfError> {
        Self::new_with(hopf, cutoff, Execution::default())
    }

    pub fn new_with(hopf: Arc<H>, cutoff: Degree, exec: Execution) -> Result<Arc<Self>, HopfError> {
        if cutoff < Degree::ZERO {
            return Err(HopfError::NegativeDegree(cutoff));
        }
        let mut basis = Vec::new();
        let mut blocks = Vec::new();
        for d in hopf.degrees_up_to(cutoff) {
            if d < Degree::ZERO {
                return Err(HopfError::NegativeDegree(d));
            }
            let mut elems: Vec<(String, H::Elem)> = hopf
                .basis_of_degree(d)
                .into_iter()
                .map(|e| (hopf.elem_id(&e), e))
                .collect();
            elems.sort_by(|a, b| a.0.cmp(&b.0));
            let start = basis.len();
            basis.extend(elems.into_iter().map(|(_, e)| e));
            blocks.push((d, start..basis.len()));
        }
        let ids: Vec<String> = basis.iter().map(|e| hopf.elem_id(e)).collect();
        let degrees: Vec<Degree> = basis.iter().map(|e| hopf.degree(e)).collect();
        let index: HashMap<H::Elem, usize> =
            basis.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let lookup = |e: &H::Elem| -> Result<usize, HopfError> {
            index.get(e).copied().ok_or_else(|| HopfError::OutsideTruncation {
                elem: hopf.elem_id(e),
                degree: hopf.degree(e),
                cutoff,
            })
        };
        let counit = basis.iter().map(|e| hopf.counit(e)).collect();
        let unit = hopf
            .unit()
            .iter()
            .map(|(e, c)| Ok((lookup(e)?, c.clone())))
            .collect::<Result<Vec<_>, HopfError>>()?;
        let coproducts = par::map_range(basis.len(), exec, |i| {
            hopf.coproduct(&basis[i])
                .iter()
                .map(|((l, r), c)| Ok((lookup(l)?, lookup(r)?, c.clone())))
                .collect::<Result<Vec<_>, HopfError>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        Ok(Arc::new(Truncation {
            hopf,
            cutoff,
            basis,
            ids,
            degrees,
            index,
            blocks,
            counit,
            unit,
            coproducts,
            products: OnceLock::new(),
            antipode: OnceLock::new(),
        }))
    }

    pub fn hopf(&self) -> &Arc<H> {
        &self.hopf
    }

    pub fn cutoff(&self) -> Degree {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[H::Elem] {
        &self.basis
    }

    pub fn elem(&self, i: usize) -> &H::Elem {
        &self.basis[i]
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn degree(&self, i: usize) -> Degree {
        self.degrees[i]
    }

    pub fn index_of(&self, e: &H::Elem) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn index_of_id(&self, id: &str) -> Option<usize> {
        self.hopf.parse_elem(id).and_then(|e| self.index_of(&e))
    }

    pub fn blocks(&self) -> &[(Degree, std::ops::Range<usize>)] {
        &self.blocks
    }

    /// Indices of the degree-0 block.
    pub fn degree_zero(&self) -> std::ops::Range<usize> {
        match self.blocks.first() {
            Some((d, r)) if d.is_zero() => r.clone(),
            _ => 0..0,
        }
    }

    pub fn counit(&self) -> &[BigRational] {
        &self.counit
    }

    pub fn unit_row(&self) -> &[(usize, BigRational)] {
        &self.unit
    }

    pub fn coproduct(&self, i: usize) -> &[(usize, usize, BigRational)] {
        &self.coproducts[i]
    }

    /// Smallest positive degree present, if any.
    pub fn min_positive_degree(&self) -> Option<Degree> {
        self.blocks.iter().map(|b| b.0).find(|d| !d.is_zero())
    }

    /// Every ordered pair `(a, b)` with `deg a + deg b <= cutoff` and its product.
    pub fn products(&self) -> Result<&[(usize, usize, SparseRow)], HopfError> {
        self.products
            .get_or_init(|| self.build_products())
            .as_deref()
            .map_err(Clone::clone)
    }

    fn build_products(&self) -> Result<Vec<(usize, usize, SparseRow)>, HopfError> {
        if !self.hopf.has_product() {
            return Err(HopfError::NoProduct(self.hopf.name()));
        }
        let mut out = Vec::new();
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                if self.degrees[a] + self.degrees[b] > self.cutoff {
                    continue;
                }
                let Some(p) = self.hopf.product(&self.basis[a], &self.basis[b]) else {
                    continue;
                };
                let row = p
                    .iter()
                    .map(|(e, c)| {
                        self.index_of(e).map(|i| (i, c.clone())).ok_or_else(|| {
                            HopfError::OutsideTruncation {
                                elem: self.hopf.elem_id(e),
                                degree: self.hopf.degree(e),
                                cutoff: self.cutoff,
                            }
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                out.push((a, b, row));
            }
        }
        Ok(out)
    }

    /// The antipode on every basis element, as sparse rows.
    ///
    /// Uses the instance's table when supplied; otherwise, for connected
    /// instances, the recursion `S(1) = 1`, `S(h) = -h - Σ S(h') h''` over the
    /// reduced coproduct, processed in ascending degree.
    pub fn antipode(&self) -> Result<&[SparseRow], HopfError> {
        self.antipode
            .get_or_init(|| self.build_antipode())
            .as_deref()
            .map_err(Clone::clone)
    }

    fn build_antipode(&self) -> Result<Vec<SparseRow>, HopfError> {
        let h = &*self.hopf;
        let unit = if h.is_connected() {
            Some(connected_unit(h)?)
        } else {
            None
        };
        let mut rows: Vec<LinComb<H::Elem>> = Vec::with_capacity(self.dim());
        for (i, e) in self.basis.iter().enumerate() {
            if let Some(s) = h.supplied_antipode(e) {
                rows.push(s);
                continue;
            }
            let Some(unit) = &unit else {
                return Err(HopfError::NoAntipode(self.ids[i].clone()));
            };
            if e == unit {
                rows.push(LinComb::basis(e.clone()));
                continue;
            }
            let mut s = LinComb::term(e.clone(), -BigRational::one());
            for ((l, r), c) in reduced_coproduct(h, e)?.iter() {
                let li = self.index_of(l).expect("coproduct legs are inside the truncation");
                let prod = mul_lincomb(h, &rows[li], &LinComb::basis(r.clone()))?;
                s.add_scaled(&prod, &-c.clone());
            }
            rows.push(s);
        }
        rows.into_iter()
            .map(|l| {
                l.iter()
                    .map(|(e, c)| {
                        self.index_of(e).map(|i| (i, c.clone())).ok_or_else(|| {
                            HopfError::OutsideTruncation {
                                elem: h.elem_id(e),
                                degree: h.degree(e),
                                cutoff: self.cutoff,
                            }
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Antipode of a basis element as a linear combination.
    pub fn antipode_of(&self, e: &H::Elem) -> Result<LinComb<H::Elem>, HopfError> {
        let i = self
            .index_of(e)
            .ok_or_else(|| HopfError::UnknownId(self.hopf.elem_id(e)))?;
        Ok(self.antipode()?[i]
            .iter()
            .map(|(j, c)| (self.basis[*j].clone(), c.clone()))
            .collect())
    }

    pub fn same_as(&self, other: &Truncation<H>) -> bool {
        std::ptr::eq(self, other)
            || (self.cutoff == other.cutoff && self.hopf.name() == other.hopf.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub status: CheckStatus,
    pub checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub instance: String,
    pub max_degree: Degree,
    pub basis_size: usize,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn status(&self, axiom: &str) -> Option<CheckStatus> {
        self.checks.iter().find(|c| c.axiom == axiom).map(|c| c.status)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

struct Tally {
    axiom: &'static str,
    checked: usize,
    witness: Option<String>,
    applicable: bool,
}

impl Tally {
    fn new(axiom: &'static str) -> Self {
        Tally {
            axiom,
            checked: 0,
            witness: None,
            applicable: true,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn fail(&mut self, witness: String) {
        if self.witness.is_none() {
            self.witness = Some(witness);
        }
    }

    fn finish(self) -> AxiomCheck {
        let status = if !self.applicable {
            CheckStatus::NotApplicable
        } else if self.witness.is_some() {
            CheckStatus::Fail
        } else {
            CheckStatus::Pass
        };
        AxiomCheck {
            axiom: self.axiom,
            status,
            checked: self.checked,
            witness: self.witness,
        }
    }
}

fn show<H: HopfAlgebra + ?Sized>(h: &H, l: &LinComb<H::Elem>) -> String {
    let parts: Vec<String> = l
        .iter()
        .map(|(e, c)| format!("{}*{}", crate::coeff::format_rational(c), h.elem_id(e)))
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// Checks the bialgebra and Hopf axioms on every basis element of degree
/// `<= max_degree`, with exact rational arithmetic.
///
/// Axioms not applicable to the instance (antipode and product checks on a
/// bare coalgebra) are reported as `not-applicable`.
pub fn verify_axioms<H: HopfAlgebra>(hopf: &Arc<H>, max_degree: Degree) -> AxiomReport {
    let h = &**hopf;
    let degrees = h.degrees_up_to(max_degree);
    let basis: Vec<H::Elem> = degrees.iter().flat_map(|d| h.basis_of_degree(*d)).collect();
    let mut checks = Vec::new();

    // index monoid: finitely many degrees, closed under addition inside the window
    let mut monoid = Tally::new("index-monoid");
    let window = h.top_degree().map_or(max_degree, |t| t.min(max_degree));
    let realized: BTreeSet<Degree> = degrees.iter().copied().collect();
    if !realized.contains(&Degree::ZERO) {
        monoid.fail("degree 0 not realized".into());
    }
    for a in &realized {
        for b in &realized {
            let s = *a + *b;
            if s <= window {
                monoid.record(realized.contains(&s), || format!("{a} + {b} = {s} not realized"));
            }
        }
    }
    for e in &basis {
        monoid.record(h.degree(e) >= Degree::ZERO, || format!("negative degree on {}", h.elem_id(e)));
    }
    checks.push(monoid.finish());

    let mut connected = Tally::new("connectedness");
    if h.is_connected() {
        let zero: Vec<_> = basis.iter().filter(|e| h.degree(e).is_zero()).collect();
        connected.record(zero.len() == 1, || format!("{} basis elements in degree 0", zero.len()));
        connected.record(connected_unit(h).is_ok(), || "unit is not the degree-0 basis element".into());
        for e in &basis {
            if !h.degree(e).is_zero() {
                connected.record(h.counit(e).is_zero(), || {
                    format!("counit nonzero on {}", h.elem_id(e))
                });
            }
        }
    } else {
        connected.applicable = false;
    }
    checks.push(connected.finish());

    let mut grading_co = Tally::new("coproduct-grading");
    for e in &basis {
        let d = h.degree(e);
        for ((l, r), _) in h.coproduct(e).iter() {
            grading_co.record(h.degree(l) + h.degree(r) == d, || {
                format!(
                    "Δ({}) has term {}⊗{} of degree {}",
                    h.elem_id(e),
                    h.elem_id(l),
                    h.elem_id(r),
                    h.degree(l) + h.degree(r)
                )
            });
        }
    }
    checks.push(grading_co.finish());

    let mut coassoc = Tally::new("coassociativity");
    for e in &basis {
        let right = iterated_coproduct(h, e, 2);
        let left = iterated_coproduct_left(h, e, 2);
        coassoc.record(left == right, || {
            let mut diff = left.clone();
            diff.add_scaled(&right, &-BigRational::one());
            let (legs, c) = diff.iter().next().expect("nonzero difference");
            let ids: Vec<String> = legs.iter().map(|x| h.elem_id(x)).collect();
            format!(
                "on {}: (Δ⊗id)Δ - (id⊗Δ)Δ has coefficient {} at {}",
                h.elem_id(e),
                crate::coeff::format_rational(c),
                ids.join("⊗")
            )
        });
    }
    checks.push(coassoc.finish());

    let mut counit = Tally::new("counit");
    for e in &basis {
        let mut left = LinComb::zero();
        let mut right = LinComb::zero();
        for ((l, r), c) in h.coproduct(e).iter() {
            left.add_term(r.clone(), c * h.counit(l));
            right.add_term(l.clone(), c * h.counit(r));
        }
        let id = LinComb::basis(e.clone());
        counit.record(left == id, || format!("(ε⊗id)Δ({}) = {}", h.elem_id(e), show(h, &left)));
        counit.record(right == id, || format!("(id⊗ε)Δ({}) = {}", h.elem_id(e), show(h, &right)));
    }
    checks.push(counit.finish());

    let mut grading_prod = Tally::new("product-grading");
    let mut unit_law = Tally::new("unit");
    let mut compat = Tally::new("bialgebra-compatibility");
    if h.has_product() {
        let unit = h.unit();
        for e in &basis {
            let b = LinComb::basis(e.clone());
            match (mul_lincomb(h, &unit, &b), mul_lincomb(h, &b, &unit)) {
                (Ok(l), Ok(r)) => {
                    unit_law.record(l == b && r == b, || format!("1·{0} or {0}·1 differs", h.elem_id(e)))
                }
                _ => unit_law.fail(format!("product with unit undefined on {}", h.elem_id(e))),
            }
        }
        for a in &basis {
            for b in &basis {
                let d = h.degree(a) + h.degree(b);
                if d > max_degree || h.top_degree().is_some_and(|t| d > t) {
                    continue;
                }
                let Some(p) = h.product(a, b) else {
                    grading_prod.fail(format!("{}·{} undefined", h.elem_id(a), h.elem_id(b)));
                    continue;
                };
                for (t, _) in p.iter() {
                    grading_prod.record(h.degree(t) == d, || {
                        format!("{}·{} has term {} of degree {}", h.elem_id(a), h.elem_id(b), h.elem_id(t), h.degree(t))
                    });
                }
                // Δ(ab) = Δ(a)Δ(b)
                let mut lhs = LinComb::zero();
                for (t, c) in p.iter() {
                    lhs.add_scaled(&h.coproduct(t), c);
                }
                let mut rhs = LinComb::zero();
                let mut defined = true;
                'outer: for ((a1, a2), ca) in h.coproduct(a).iter() {
                    for ((b1, b2), cb) in h.coproduct(b).iter() {
                        match (h.product(a1, b1), h.product(a2, b2)) {
                            (Some(x), Some(y)) => {
                                for (xe, xc) in x.iter() {
                                    for (ye, yc) in y.iter() {
                                        rhs.add_term((xe.clone(), ye.clone()), ca * cb * xc * yc);
                                    }
                                }
                            }
                            _ => {
                                defined = false;
                                break 'outer;
                            }
                        }
                    }
                }
                compat.record(defined && lhs == rhs, || {
                    format!("Δ({0}·{1}) ≠ Δ({0})Δ({1})", h.elem_id(a), h.elem_id(b))
                });
            }
        }
    } else {
        grading_prod.applicable = false;
        unit_law.applicable = false;
        compat.applicable = false;
    }
    checks.push(grading_prod.finish());
    checks.push(unit_law.finish());
    checks.push(compat.finish());

    let mut anti_left = Tally::new("antipode-left");
    let mut anti_right = Tally::new("antipode-right");
    if !h.has_product() {
        anti_left.applicable = false;
        anti_right.applicable = false;
    } else {
        match Truncation::new(hopf.clone(), max_degree) {
            Err(e) => {
                anti_left.fail(format!("truncation unavailable: {e}"));
                anti_right.fail(format!("truncation unavailable: {e}"));
            }
            Ok(tr) => {
                let unit = h.unit();
                for e in &basis {
                    let mut expected = LinComb::zero();
                    expected.add_scaled(&unit, &h.counit(e));
                    let mut left = LinComb::zero();
                    let mut right = LinComb::zero();
                    let mut failure = None;
                    for ((l, r), c) in h.coproduct(e).iter() {
                        let terms = tr.antipode_of(l).and_then(|sl| {
                            let sr = tr.antipode_of(r)?;
                            let a = mul_lincomb(h, &sl, &LinComb::basis(r.clone()))?;
                            let b = mul_lincomb(h, &LinComb::basis(l.clone()), &sr)?;
                            Ok((a, b))
                        });
                        match terms {
                            Ok((a, b)) => {
                                left.add_scaled(&a, c);
                                right.add_scaled(&b, c);
                            }
                            Err(err) => {
                                failure = Some(err.to_string());
                                break;
                            }
                        }
                    }
                    if let Some(f) = failure {
                        anti_left.fail(format!("on {}: {f}", h.elem_id(e)));
                        anti_right.fail(format!("on {}: {f}", h.elem_id(e)));
                        continue;
                    }
                    anti_left.record(left == expected, || {
                        format!("m(S⊗id)Δ({}) = {}", h.elem_id(e), show(h, &left))
                    });
                    anti_right.record(right == expected, || {
                        format!("m(id⊗S)Δ({}) = {}", h.elem_id(e), show(h, &right))
                    });
                }
            }
        }
    }
    checks.push(anti_left.finish());
    checks.push(anti_right.finish());

    AxiomReport {
        instance: h.name(),
        max_degree,
        basis_size: basis.len(),
        checks,
    }
}
