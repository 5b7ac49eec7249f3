//! Evaluation of B-series on polynomial vector fields.
//!
//! Elementary differentials are computed exactly over the rationals by
//! symbolic differentiation; only the final combination with the character
//! values happens in the coefficient algebra.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;
use thiserror::Error;

use super::butcher::CkFunctional;
use super::tree::RootedTree;
use crate::coeff::{parse_rational, Coeff, CoeffError};

pub const MAX_VARS: usize = 3;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("vector field descriptor is not polynomial: {0}")]
    NotPolynomial(String),
    #[error("at most {MAX_VARS} variables are supported (got {0})")]
    TooManyVariables(usize),
    #[error("dimension mismatch: field has {field} components, point has {point}")]
    Dimension { field: usize, point: usize },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// A polynomial in `n` variables with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigRational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars);
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c * BigInt::from(e[var]));
        }
        out
    }

    pub fn eval(&self, y: &[BigRational]) -> BigRational {
        let mut sum = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (yi, &k) in y.iter().zip(e) {
                for _ in 0..k {
                    t *= yi;
                }
            }
            sum += t;
        }
        sum
    }

    pub fn eval_f64(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = crate::coeff::rational_to_f64(c);
                for (yi, &k) in y.iter().zip(e) {
                    t *= yi.powi(k as i32);
                }
                t
            })
            .sum()
    }
}

/// A polynomial vector field `f: Q^n -> Q^n`, `n <= 3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyField {
    components: Vec<Polynomial>,
}

impl PolyField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self, FieldError> {
        let n = components.len();
        if n > MAX_VARS {
            return Err(FieldError::TooManyVariables(n));
        }
        if components.iter().any(|p| p.nvars != n) {
            return Err(FieldError::NotPolynomial("component arity differs from dimension".into()));
        }
        Ok(PolyField { components })
    }

    /// The scalar field `y' = c y^k`.
    pub fn monomial_1d(c: BigRational, k: u32) -> Self {
        PolyField {
            components: vec![Polynomial::from_terms(1, [(vec![k], c)])],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    /// Reads `{"components": [[[coeff, [e1, e2, ...]], ...], ...]}`.
    pub fn from_json(v: &Value) -> Result<Self, FieldError> {
        let bad = |m: &str| FieldError::NotPolynomial(m.to_string());
        let comps = v
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing components array"))?;
        let n = comps.len();
        if n > MAX_VARS {
            return Err(FieldError::TooManyVariables(n));
        }
        let mut out = Vec::with_capacity(n);
        for comp in comps {
            let terms = comp.as_array().ok_or_else(|| bad("component is not a term list"))?;
            let mut p = Polynomial::zero(n);
            for term in terms {
                let pair = term.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("term is not [coeff, exponents]"))?;
                let c = parse_rational(&pair[0])?;
                let exps = pair[1]
                    .as_array()
                    .filter(|e| e.len() == n)
                    .ok_or_else(|| bad("exponent vector has wrong length"))?
                    .iter()
                    .map(|x| x.as_u64().and_then(|k| u32::try_from(k).ok()))
                    .collect::<Option<Vec<u32>>>()
                    .ok_or_else(|| bad("exponents must be nonnegative integers"))?;
                p.add_term(exps, c);
            }
            out.push(p);
        }
        Self::new(out)
    }

    pub fn eval(&self, y: &[BigRational]) -> Vec<BigRational> {
        self.components.iter().map(|p| p.eval(y)).collect()
    }

    pub fn eval_f64(&self, y: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval_f64(y)).collect()
    }
}

/// Elementary differentials `F(τ)(y)`: `F(•) = f(y)`,
/// `F([τ₁…τ_m]) = f^{(m)}(y)[F(τ₁), …, F(τ_m)]`.
pub struct ElementaryDifferentials<'a> {
    field: &'a PolyField,
    y: Vec<BigRational>,
    derivs: HashMap<(usize, Vec<usize>), Polynomial>,
    memo: HashMap<RootedTree, Vec<BigRational>>,
}

impl<'a> ElementaryDifferentials<'a> {
    pub fn new(field: &'a PolyField, y: &[BigRational]) -> Result<Self, FieldError> {
        if y.len() != field.dim() {
            return Err(FieldError::Dimension {
                field: field.dim(),
                point: y.len(),
            });
        }
        Ok(ElementaryDifferentials {
            field,
            y: y.to_vec(),
            derivs: HashMap::new(),
            memo: HashMap::new(),
        })
    }

    /// `∂_{j1} … ∂_{jm} f_i`, with `js` sorted since partials commute.
    fn partial(&mut self, i: usize, mut js: Vec<usize>) -> Polynomial {
        js.sort_unstable();
        if let Some(p) = self.derivs.get(&(i, js.clone())) {
            return p.clone();
        }
        let p = match js.split_last() {
            None => self.field.components[i].clone(),
            Some((last, rest)) => self.partial(i, rest.to_vec()).derivative(*last),
        };
        self.derivs.insert((i, js), p.clone());
        p
    }

    pub fn of(&mut self, t: &RootedTree) -> Vec<BigRational> {
        if let Some(v) = self.memo.get(t) {
            return v.clone();
        }
        let n = self.field.dim();
        let child_vals: Vec<Vec<BigRational>> = t.children().iter().map(|c| self.of(c)).collect();
        let m = child_vals.len();
        let mut out = vec![BigRational::zero(); n];
        for (i, out_i) in out.iter_mut().enumerate() {
            // sum over index tuples (j1..jm) in [0, n)^m
            let mut idx = vec![0usize; m];
            loop {
                let weight = idx
                    .iter()
                    .zip(&child_vals)
                    .fold(BigRational::one(), |acc, (&j, v)| acc * &v[j]);
                if !weight.is_zero() {
                    let p = self.partial(i, idx.clone());
                    if !p.is_zero() {
                        *out_i += p.eval(&self.y) * weight;
                    }
                }
                let mut k = 0;
                while k < m {
                    idx[k] += 1;
                    if idx[k] < n {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == m {
                    break;
                }
            }
        }
        self.memo.insert(t.clone(), out.clone());
        out
    }
}

/// `y0 + Σ_{|τ| <= cutoff} h^{|τ|} / σ(τ) · a(τ) · F(τ)(y0)`, scaled by `a(∅)`
/// on the `y0` term.
pub fn bseries_eval<S: Coeff>(
    a: &CkFunctional<S>,
    field: &PolyField,
    y0: &[BigRational],
    h: &BigRational,
    cutoff: usize,
) -> Result<Vec<S>, FieldError> {
    let mut diffs = ElementaryDifferentials::new(field, y0)?;
    let tr = a.truncation();
    let mut out: Vec<S> = y0
        .iter()
        .map(|y| S::from_rational(y) * a.at(&super::tree::Forest::empty()))
        .collect();
    for i in 0..tr.dim() {
        let Some(t) = tr.elem(i).as_tree() else { continue };
        if t.order() > cutoff || a.get(i).is_zero() {
            continue;
        }
        let mut w = BigRational::one() / BigRational::from_integer(t.symmetry());
        for _ in 0..t.order() {
            w *= h;
        }
        for (o, fi) in out.iter_mut().zip(diffs.of(t)) {
            if fi.is_zero() {
                continue;
            }
            let coef = S::from_rational(&(fi * &w));
            o.mul_acc(a.get(i), &coef);
        }
    }
    Ok(out)
}
