//! The convolution algebra `Hom(H, B)` at a finite degree cutoff.
//!
//! Every operation is exact on basis elements of degree `<= cutoff` and makes
//! no claim above it. Because the coproduct respects the grading, none of the
//! operations ever needs a value above the cutoff.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::{Coeff, CoeffError, DEFAULT_TOL};
use crate::hopf::{Degree, HopfAlgebra, HopfError, Truncation};
use crate::par::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharError {
    #[error("functionals live on different truncations ({0} vs {1})")]
    Mismatch(String, String),
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("argument is not a character")]
    NotCharacter,
    #[error("argument is not an infinitesimal character")]
    NotInfinitesimal,
    #[error("degree-0 part is not nilpotent; the exponential series does not terminate")]
    NotNilpotent,
    #[error("degree-0 part must agree with the counit")]
    WrongDegreeZero,
    #[error(transparent)]
    Hopf(#[from] HopfError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("malformed dump: {0}")]
    Dump(String),
}

/// A `B`-valued linear functional on the degree-`<= cutoff` part of `H`.
pub struct Functional<H: HopfAlgebra, S: Coeff> {
    trunc: Arc<Truncation<H>>,
    values: Vec<S>,
}

impl<H: HopfAlgebra, S: Coeff> Clone for Functional<H, S> {
    fn clone(&self) -> Self {
        Functional {
            trunc: self.trunc.clone(),
            values: self.values.clone(),
        }
    }
}

impl<H: HopfAlgebra, S: Coeff> fmt::Debug for Functional<H, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_zero() {
                m.entry(&self.trunc.id(i), v);
            }
        }
        m.finish()
    }
}

impl<H: HopfAlgebra, S: Coeff> PartialEq for Functional<H, S> {
    fn eq(&self, other: &Self) -> bool {
        self.trunc.same_as(&other.trunc) && self.values == other.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharacterKind {
    Character,
    Infinitesimal,
    UnitGroupElement,
    General,
}

impl<H: HopfAlgebra, S: Coeff> Functional<H, S> {
    pub fn zero(trunc: &Arc<Truncation<H>>) -> Self {
        Functional {
            trunc: trunc.clone(),
            values: vec![S::zero(); trunc.dim()],
        }
    }

    /// The convolution unit `u_B ∘ ε`.
    pub fn unit(trunc: &Arc<Truncation<H>>) -> Self {
        Functional {
            trunc: trunc.clone(),
            values: trunc.counit().iter().map(S::from_rational).collect(),
        }
    }

    pub fn from_values(trunc: &Arc<Truncation<H>>, values: Vec<S>) -> Self {
        assert_eq!(values.len(), trunc.dim(), "one value per basis element");
        Functional {
            trunc: trunc.clone(),
            values,
        }
    }

    pub fn from_fn(trunc: &Arc<Truncation<H>>, f: impl FnMut(&H::Elem) -> S) -> Self {
        Functional {
            trunc: trunc.clone(),
            values: trunc.basis().iter().map(f).collect(),
        }
    }

    pub fn truncation(&self) -> &Arc<Truncation<H>> {
        &self.trunc
    }

    pub fn cutoff(&self) -> Degree {
        self.trunc.cutoff()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, i: usize) -> &S {
        &self.values[i]
    }

    pub fn set(&mut self, i: usize, v: S) {
        self.values[i] = v;
    }

    /// Value on a basis element; zero for elements outside the truncation.
    pub fn at(&self, e: &H::Elem) -> S {
        self.trunc
            .index_of(e)
            .map(|i| self.values[i].clone())
            .unwrap_or_else(S::zero)
    }

    pub fn at_id(&self, id: &str) -> Option<S> {
        self.trunc.index_of_id(id).map(|i| self.values[i].clone())
    }

    /// Indices with nonzero value.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| !self.values[i].is_zero()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    fn check_same(&self, other: &Self) -> Result<(), CharError> {
        if self.trunc.same_as(&other.trunc) {
            Ok(())
        } else {
            Err(CharError::Mismatch(
                format!("{}@{}", self.trunc.hopf().name(), self.cutoff()),
                format!("{}@{}", other.trunc.hopf().name(), other.cutoff()),
            ))
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self, CharError> {
        self.check_same(other)?;
        Ok(Functional {
            trunc: self.trunc.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, CharError> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CharError> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        self.map(|v| v.scale(r))
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Functional {
            trunc: self.trunc.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Converts every value with `f`, e.g. from rationals to floats.
    pub fn map_to<T: Coeff>(&self, f: impl Fn(&S) -> T) -> Functional<H, T> {
        Functional {
            trunc: self.trunc.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.trunc.same_as(&other.trunc)
            && self.values.iter().zip(&other.values).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Largest `norm(self(h) - other(h))` over the basis.
    pub fn max_diff(&self, other: &Self) -> Result<f64, CharError> {
        let d = self.sub(other)?;
        d.values
            .iter()
            .map(|v| v.norm().map_err(CharError::from))
            .try_fold(0.0f64, |m, n| Ok(m.max(n?)))
    }

    /// True when the two functionals agree on every basis element of degree `<= d`.
    pub fn agrees_up_to(&self, other: &Self, d: Degree, tol: f64) -> bool {
        self.trunc.same_as(&other.trunc)
            && (0..self.values.len())
                .filter(|&i| self.trunc.degree(i) <= d)
                .all(|i| self.values[i].approx_eq(&other.values[i], tol))
    }

    /// `(φ⋆ψ)(h) = Σ φ(h₁) ψ(h₂)` over the coproduct of `h`.
    pub fn convolve(&self, other: &Self) -> Result<Self, CharError> {
        self.convolve_with(other, Execution::default())
    }

    pub fn convolve_with(&self, other: &Self, exec: Execution) -> Result<Self, CharError> {
        self.check_same(other)?;
        let tr = &self.trunc;
        let values = par::map_range(tr.dim(), exec, |i| {
            let mut acc = S::zero();
            for (l, r, c) in tr.coproduct(i) {
                let (a, b) = (&self.values[*l], &other.values[*r]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                if c.is_one() {
                    acc.mul_acc(a, b);
                } else {
                    acc.mul_acc(&a.scale(c), b);
                }
            }
            acc
        });
        Ok(Functional {
            trunc: tr.clone(),
            values,
        })
    }

    /// The commutator `φ⋆ψ - ψ⋆φ`.
    pub fn bracket(&self, other: &Self) -> Result<Self, CharError> {
        self.convolve(other)?.sub(&other.convolve(self)?)
    }

    fn unit_value(&self) -> S {
        let mut v = S::zero();
        for (i, c) in self.trunc.unit_row() {
            v = v + self.values[*i].scale(c);
        }
        v
    }

    /// `φ(ab) = φ(a)φ(b)` on every pair with `deg a + deg b <= cutoff`, and `φ(1) = 1`.
    pub fn is_character(&self) -> bool {
        self.is_character_tol(DEFAULT_TOL)
    }

    /// Largest violation of multiplicativity: `max |φ(ab) - φ(a)φ(b)|` over
    /// products inside the truncation, together with `|φ(1) - 1|`.
    pub fn character_defect(&self) -> Result<f64, CharError> {
        let products = self.trunc.products()?;
        let unit = self.unit_value() - S::one();
        let defects = par::map_range(products.len(), Execution::default(), |k| {
            let (a, b, row) = &products[k];
            (self.eval_row(row) - self.values[*a].clone() * self.values[*b].clone()).norm()
        });
        defects.into_iter().try_fold(unit.norm()?, |m, d| Ok(m.max(d?)))
    }

    pub fn is_character_tol(&self, tol: f64) -> bool {
        let Ok(products) = self.trunc.products() else {
            return false;
        };
        if !self.unit_value().approx_eq(&S::one(), tol) {
            return false;
        }
        par::find_first(products.len(), Execution::default(), |k| {
            let (a, b, row) = &products[k];
            let lhs = self.eval_row(row);
            let rhs = self.values[*a].clone() * self.values[*b].clone();
            (!lhs.approx_eq(&rhs, tol)).then_some(())
        })
        .is_none()
    }

    /// `φ(ab) = ε(b)φ(a) + ε(a)φ(b)` on every pair with `deg a + deg b <= cutoff`.
    pub fn is_infinitesimal(&self) -> bool {
        self.is_infinitesimal_tol(DEFAULT_TOL)
    }

    pub fn is_infinitesimal_tol(&self, tol: f64) -> bool {
        let Ok(products) = self.trunc.products() else {
            return false;
        };
        let eps = self.trunc.counit();
        par::find_first(products.len(), Execution::default(), |k| {
            let (a, b, row) = &products[k];
            let lhs = self.eval_row(row);
            let rhs = self.values[*a].scale(&eps[*b]) + self.values[*b].scale(&eps[*a]);
            (!lhs.approx_eq(&rhs, tol)).then_some(())
        })
        .is_none()
    }

    fn eval_row(&self, row: &[(usize, BigRational)]) -> S {
        let mut v = S::zero();
        for (i, c) in row {
            v = v + self.values[*i].scale(c);
        }
        v
    }

    pub fn classify(&self, tol: f64) -> CharacterKind {
        if self.is_character_tol(tol) {
            CharacterKind::Character
        } else if self.is_infinitesimal_tol(tol) {
            CharacterKind::Infinitesimal
        } else if self.unit_inverse().is_ok() {
            CharacterKind::UnitGroupElement
        } else {
            CharacterKind::General
        }
    }

    /// The group inverse of a character, `φ ∘ S`.
    pub fn char_inverse(&self) -> Result<Self, CharError> {
        if !self.is_character() {
            return Err(CharError::NotCharacter);
        }
        self.compose_antipode()
    }

    /// `φ ∘ S` for any functional.
    pub fn compose_antipode(&self) -> Result<Self, CharError> {
        let rows = self.trunc.antipode()?;
        Ok(Functional {
            trunc: self.trunc.clone(),
            values: rows.iter().map(|row| self.eval_row(row)).collect(),
        })
    }

    /// Two-sided `⋆`-inverse, solved degree by degree.
    ///
    /// In each degree block the unknowns `ψ(r)` appear only through coproduct
    /// terms `l ⊗ r` with `deg l = 0`, so each block is a linear system whose
    /// matrix depends on `φ` restricted to `H₀`. For connected `H` the matrix is
    /// `φ(1)·I`.
    pub fn unit_inverse(&self) -> Result<Self, CharError> {
        let tr = &self.trunc;
        let eps = tr.counit();
        let mut psi = vec![S::zero(); tr.dim()];
        for (_, range) in tr.blocks() {
            let n = range.len();
            let start = range.start;
            let mut matrix = vec![vec![S::zero(); n]; n];
            let mut rhs = Vec::with_capacity(n);
            for (row, h) in range.clone().enumerate() {
                let mut b = S::from_rational(&eps[h]);
                for (l, r, c) in tr.coproduct(h) {
                    if range.contains(r) {
                        matrix[row][r - start] =
                            matrix[row][r - start].clone() + self.values[*l].scale(c);
                    } else {
                        b = b - (self.values[*l].clone() * psi[*r].clone()).scale(c);
                    }
                }
                rhs.push(b);
            }
            let x = solve_linear(matrix, rhs)?;
            for (k, v) in x.into_iter().enumerate() {
                psi[start + k] = v;
            }
        }
        Ok(Functional {
            trunc: tr.clone(),
            values: psi,
        })
    }

    /// `φ^{⋆k}` for `k >= 1`.
    pub fn power(&self, k: usize) -> Result<Self, CharError> {
        assert!(k >= 1);
        let mut p = self.clone();
        for _ in 1..k {
            p = p.convolve(self)?;
        }
        Ok(p)
    }

    /// Restriction to `Hom(H₀, B)` as a standalone vector indexed like the degree-0 block.
    fn degree_zero_nilpotent(&self, tol: f64) -> Result<bool, CharError> {
        let zero = self.trunc.degree_zero();
        let tr = &self.trunc;
        let conv0 = |a: &[S], b: &[S]| -> Vec<S> {
            zero.clone()
                .map(|i| {
                    let mut acc = S::zero();
                    for (l, r, c) in tr.coproduct(i) {
                        acc.mul_acc(&a[*l - zero.start].scale(c), &b[*r - zero.start]);
                    }
                    acc
                })
                .collect()
        };
        let base: Vec<S> = self.values[zero.clone()].to_vec();
        let mut p = base.clone();
        for _ in 0..zero.len() {
            if p.iter().all(|v| v.approx_eq(&S::zero(), tol)) {
                return Ok(true);
            }
            p = conv0(&p, &base);
        }
        Ok(p.iter().all(|v| v.approx_eq(&S::zero(), tol)))
    }

    /// An upper bound on the nilpotency index of `φ`, given that `φ|H₀` is nilpotent.
    fn nilpotency_bound(&self) -> usize {
        let tr = &self.trunc;
        let layers = match tr.min_positive_degree() {
            Some(d) => (tr.cutoff().0 / d.0).to_integer() as usize,
            None => 0,
        };
        let d0 = tr.degree_zero().len().max(1);
        if tr.hopf().is_connected() {
            layers + 1
        } else {
            d0 * (layers + 1) + 1
        }
    }

    /// Sums `Σ_{k>=1} coeff(k) φ^{⋆k}`; `φ` must be nilpotent.
    fn nilpotent_series(&self, coeff: impl Fn(usize) -> BigRational) -> Result<Self, CharError> {
        let mut sum = Functional::zero(&self.trunc);
        let mut power = self.clone();
        for k in 1..=self.nilpotency_bound() {
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power.scale_rational(&coeff(k)))?;
            power = power.convolve(self)?;
        }
        Ok(sum)
    }

    /// `exp⋆(φ) = Σ φ^{⋆n}/n!`, finite per basis element because `φ` is nilpotent.
    pub fn exp_star(&self) -> Result<Self, CharError> {
        let tr = &self.trunc;
        if tr.hopf().is_connected() {
            if !self.unit_value().approx_eq(&S::zero(), DEFAULT_TOL) {
                return Err(CharError::NotNilpotent);
            }
        } else if !self.degree_zero_nilpotent(DEFAULT_TOL)? {
            return Err(CharError::NotNilpotent);
        }
        let mut fact = BigInt::one();
        let inv_fact: Vec<BigRational> = (0..=self.nilpotency_bound())
            .map(|k| {
                if k > 0 {
                    fact *= k;
                }
                BigRational::new(BigInt::one(), fact.clone())
            })
            .collect();
        let series = self.nilpotent_series(|k| inv_fact[k].clone())?;
        Functional::unit(tr).add(&series)
    }

    /// `log⋆(ψ) = Σ (-1)^{n+1} (ψ - e)^{⋆n} / n` for `ψ` whose degree-0 part is the counit's.
    pub fn log_star(&self) -> Result<Self, CharError> {
        let tr = &self.trunc;
        let unit = Functional::unit(tr);
        let delta = self.sub(&unit)?;
        if delta.values[tr.degree_zero()]
            .iter()
            .any(|v| !v.approx_eq(&S::zero(), DEFAULT_TOL))
        {
            return Err(CharError::WrongDegreeZero);
        }
        delta.nilpotent_series(|k| {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            BigRational::new(BigInt::from(sign), BigInt::from(k))
        })
    }

    /// `log⋆(exp⋆(x) ⋆ exp⋆(y))` for infinitesimal characters `x`, `y`.
    pub fn bch(&self, other: &Self) -> Result<Self, CharError> {
        if !self.is_infinitesimal() || !other.is_infinitesimal() {
            return Err(CharError::NotInfinitesimal);
        }
        self.exp_star()?.convolve(&other.exp_star()?)?.log_star()
    }

    /// Serializes as `{instance, cutoff, entries: [{basis_id, degree, value}]}`,
    /// entries sorted by `(degree, basis_id)`.
    pub fn to_dump(&self) -> Value {
        let tr = &self.trunc;
        let entries: Vec<Value> = (0..tr.dim())
            .map(|i| {
                json!({
                    "basis_id": tr.id(i),
                    "degree": tr.degree(i),
                    "value": self.values[i].to_json(),
                })
            })
            .collect();
        json!({
            "instance": tr.hopf().name(),
            "cutoff": tr.cutoff(),
            "entries": entries,
        })
    }

    /// Reads a dump onto `trunc`; absent entries are zero.
    pub fn from_dump(trunc: &Arc<Truncation<H>>, dump: &Value) -> Result<Self, CharError> {
        let err = |m: &str| CharError::Dump(m.to_string());
        let instance = dump.get("instance").and_then(Value::as_str).ok_or_else(|| err("missing instance"))?;
        if instance != trunc.hopf().name() {
            return Err(CharError::Dump(format!(
                "dump is for `{instance}`, expected `{}`",
                trunc.hopf().name()
            )));
        }
        let cutoff = dump.get("cutoff").and_then(parse_degree_value).ok_or_else(|| err("missing cutoff"))?;
        if cutoff != trunc.cutoff() {
            return Err(CharError::Dump(format!("dump cutoff {cutoff} != {}", trunc.cutoff())));
        }
        let entries = dump.get("entries").and_then(Value::as_array).ok_or_else(|| err("missing entries"))?;
        let mut f = Functional::zero(trunc);
        for e in entries {
            let id = e.get("basis_id").and_then(Value::as_str).ok_or_else(|| err("entry without basis_id"))?;
            let i = trunc.index_of_id(id).ok_or_else(|| HopfError::UnknownId(id.to_string()))?;
            let v = e.get("value").ok_or_else(|| err("entry without value"))?;
            f.values[i] = S::from_json(v)?;
        }
        Ok(f)
    }
}

pub fn parse_degree_value(v: &Value) -> Option<Degree> {
    match v {
        Value::Number(n) => n.as_i64().map(Degree::int),
        Value::String(s) => Degree::parse(s),
        _ => None,
    }
}

/// A basis of the rational infinitesimal characters on `trunc`: the
/// nullspace of the linear conditions `φ(ab) = ε(a)φ(b) + ε(b)φ(a)` over every
/// product pair in the truncation, computed exactly.
pub fn infinitesimal_basis<H: HopfAlgebra>(
    trunc: &Arc<Truncation<H>>,
) -> Result<Vec<Functional<H, BigRational>>, CharError> {
    let n = trunc.dim();
    let eps = trunc.counit();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for (a, b, prod) in trunc.products()? {
        let mut row = vec![BigRational::zero(); n];
        for (i, c) in prod {
            row[*i] += c;
        }
        row[*a] -= &eps[*b];
        row[*b] -= &eps[*a];
        if row.iter().any(|c| !c.is_zero()) {
            rows.push(row);
        }
    }
    // reduced row echelon form
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        for v in rows[rank].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row[col..n].iter_mut().zip(&pivot_row[col..n]) {
                    *x -= p * &f;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    Ok(free
        .iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -rows[r][f].clone();
            }
            Functional::from_values(trunc, v)
        })
        .collect())
}

/// Gaussian elimination over a commutative coefficient algebra. Pivots must be
/// invertible; among the candidates the one with the largest norm is used.
pub fn solve_linear<S: Coeff>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>, CharError> {
    let n = b.len();
    for col in 0..n {
        let mut best: Option<(usize, f64, S)> = None;
        for (row, a_row) in a.iter().enumerate().skip(col) {
            let v = &a_row[col];
            if v.is_zero() {
                continue;
            }
            if let Ok(inv) = v.try_inverse() {
                let score = v.norm().unwrap_or(1.0);
                if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
                    best = Some((row, score, inv));
                }
            }
        }
        let (p, _, inv) = best.ok_or_else(|| {
            CharError::NotInvertible(format!("singular degree block (column {col})"))
        })?;
        a.swap(col, p);
        b.swap(col, p);
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() * inv.clone();
            let pivot_row = a[col].clone();
            for (x, p) in a[row][col..n].iter_mut().zip(&pivot_row[col..n]) {
                *x = x.clone() - factor.clone() * p.clone();
            }
            b[row] = b[row].clone() - factor * b[col].clone();
        }
    }
    Ok((0..n).map(|i| b[i].clone() * a[i][i].try_inverse().expect("pivot")).collect())
}
