//! Runge–Kutta methods as characters of the Connes–Kreimer Hopf algebra.

use std::collections::HashMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::instance::CkHopf;
use super::tree::{Forest, RootedTree};
use crate::charalg::{CharError, Functional};
use crate::coeff::{Coeff, CoeffError, DEFAULT_TOL};
use crate::hopf::Truncation;

pub type CkFunctional<S> = Functional<CkHopf, S>;

#[derive(Debug, Error)]
pub enum TableauError {
    #[error("tableau is malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coefficients `(A, b, c)` of an `s`-stage Runge–Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau<S> {
    pub a: Vec<Vec<S>>,
    pub b: Vec<S>,
    pub c: Vec<S>,
}

impl<S: Coeff> ButcherTableau<S> {
    pub fn new(a: Vec<Vec<S>>, b: Vec<S>, c: Vec<S>) -> Result<Self, TableauError> {
        let s = b.len();
        if s == 0 {
            return Err(TableauError::Malformed("no stages".into()));
        }
        if a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(TableauError::Malformed(format!("A must be {s}x{s}")));
        }
        if c.len() != s {
            return Err(TableauError::Malformed(format!("c must have {s} entries")));
        }
        Ok(ButcherTableau { a, b, c })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Reads `{"A": [[...]], "b": [...], "c": [...]}`; `c` defaults to the row sums of `A`.
    pub fn from_json(v: &Value) -> Result<Self, TableauError> {
        let err = |m: &str| TableauError::Malformed(m.to_string());
        let vec_of = |v: &Value| -> Result<Vec<S>, TableauError> {
            v.as_array()
                .ok_or_else(|| err("expected an array"))?
                .iter()
                .map(|x| S::from_json(x).map_err(TableauError::from))
                .collect()
        };
        let a = v
            .get("A")
            .and_then(Value::as_array)
            .ok_or_else(|| err("missing A"))?
            .iter()
            .map(vec_of)
            .collect::<Result<Vec<_>, _>>()?;
        let b = vec_of(v.get("b").ok_or_else(|| err("missing b"))?)?;
        let c = match v.get("c") {
            Some(c) => vec_of(c)?,
            None => a
                .iter()
                .map(|row| row.iter().cloned().fold(S::zero(), |x, y| x + y))
                .collect(),
        };
        Self::new(a, b, c)
    }

    pub fn from_json_str(s: &str) -> Result<Self, TableauError> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    /// Rows where `c_i != Σ_j a_ij`. These are warnings, not errors.
    pub fn lint(&self) -> Vec<String> {
        self.a
            .iter()
            .zip(&self.c)
            .enumerate()
            .filter_map(|(i, (row, ci))| {
                let sum = row.iter().cloned().fold(S::zero(), |x, y| x + y);
                (!sum.approx_eq(ci, DEFAULT_TOL))
                    .then(|| format!("stage {i}: c = {:?} but row sum is {:?}", ci, sum))
            })
            .collect()
    }

    pub fn is_explicit(&self) -> bool {
        self.a
            .iter()
            .enumerate()
            .all(|(i, row)| row[i..].iter().all(Zero::is_zero))
    }

    /// Internal stage weights `Φ_i(τ)`: `Φ_i(•) = 1`,
    /// `Φ_i([τ₁…τ_m]) = Π_k Σ_j a_ij Φ_j(τ_k)`.
    fn stage_weights(&self, t: &RootedTree, memo: &mut HashMap<RootedTree, Vec<S>>) -> Vec<S> {
        if let Some(w) = memo.get(t) {
            return w.clone();
        }
        let s = self.stages();
        let mut w = vec![S::one(); s];
        for child in t.children() {
            let cw = self.stage_weights(child, memo);
            for (i, wi) in w.iter_mut().enumerate() {
                let mut sum = S::zero();
                for (aij, cj) in self.a[i].iter().zip(&cw) {
                    sum.mul_acc(aij, cj);
                }
                *wi = wi.clone() * sum;
            }
        }
        memo.insert(t.clone(), w.clone());
        w
    }

    /// Elementary weight `Σ_i b_i Φ_i(τ)`.
    pub fn elementary_weight(&self, t: &RootedTree) -> S {
        self.elementary_weight_memo(t, &mut HashMap::new())
    }

    fn elementary_weight_memo(&self, t: &RootedTree, memo: &mut HashMap<RootedTree, Vec<S>>) -> S {
        let w = self.stage_weights(t, memo);
        let mut sum = S::zero();
        for (bi, wi) in self.b.iter().zip(&w) {
            sum.mul_acc(bi, wi);
        }
        sum
    }
}

/// Named tableaux used across tests, examples and the CLI.
pub mod tableaux {
    use super::ButcherTableau;
    use crate::coeff::{rat, Coeff};

    fn q<S: Coeff>(n: i64, d: i64) -> S {
        S::from_rational(&rat(n, d))
    }

    pub fn explicit_euler<S: Coeff>() -> ButcherTableau<S> {
        ButcherTableau::new(vec![vec![q(0, 1)]], vec![q(1, 1)], vec![q(0, 1)]).unwrap()
    }

    pub fn implicit_midpoint<S: Coeff>() -> ButcherTableau<S> {
        ButcherTableau::new(vec![vec![q(1, 2)]], vec![q(1, 1)], vec![q(1, 2)]).unwrap()
    }

    pub fn explicit_midpoint<S: Coeff>() -> ButcherTableau<S> {
        ButcherTableau::new(
            vec![vec![q(0, 1), q(0, 1)], vec![q(1, 2), q(0, 1)]],
            vec![q(0, 1), q(1, 1)],
            vec![q(0, 1), q(1, 2)],
        )
        .unwrap()
    }

    pub fn classical_rk4<S: Coeff>() -> ButcherTableau<S> {
        let z = || q(0, 1);
        ButcherTableau::new(
            vec![
                vec![z(), z(), z(), z()],
                vec![q(1, 2), z(), z(), z()],
                vec![z(), q(1, 2), z(), z()],
                vec![z(), z(), q(1, 1), z()],
            ],
            vec![q(1, 6), q(1, 3), q(1, 3), q(1, 6)],
            vec![z(), q(1, 2), q(1, 2), q(1, 1)],
        )
        .unwrap()
    }
}

fn multiplicative<S: Coeff>(
    trunc: &Arc<Truncation<CkHopf>>,
    tree_value: impl Fn(&RootedTree) -> S,
) -> CkFunctional<S> {
    let mut cache: HashMap<RootedTree, S> = HashMap::new();
    let values = trunc
        .basis()
        .iter()
        .map(|f| {
            f.trees().iter().fold(S::one(), |acc, t| {
                let v = cache.entry(t.clone()).or_insert_with(|| tree_value(t)).clone();
                acc * v
            })
        })
        .collect();
    Functional::from_values(trunc, values)
}

/// The character with the given values on trees, extended multiplicatively to forests.
pub fn character_from_trees<S: Coeff>(
    trunc: &Arc<Truncation<CkHopf>>,
    tree_value: impl Fn(&RootedTree) -> S,
) -> CkFunctional<S> {
    multiplicative(trunc, tree_value)
}

/// The infinitesimal character with the given values on trees (zero on the
/// empty forest and on forests with two or more trees).
pub fn infinitesimal_from_trees<S: Coeff>(
    trunc: &Arc<Truncation<CkHopf>>,
    tree_value: impl Fn(&RootedTree) -> S,
) -> CkFunctional<S> {
    Functional::from_fn(trunc, |f: &Forest| f.as_tree().map(&tree_value).unwrap_or_else(S::zero))
}

/// `δ`: one on `•`, zero on every other forest.
pub fn leaf_delta<S: Coeff>(trunc: &Arc<Truncation<CkHopf>>) -> CkFunctional<S> {
    infinitesimal_from_trees(trunc, |t| if t.order() == 1 { S::one() } else { S::zero() })
}

/// B-series coefficients of a Runge–Kutta method.
pub fn rk_character<S: Coeff>(t: &ButcherTableau<S>, trunc: &Arc<Truncation<CkHopf>>) -> CkFunctional<S> {
    let mut memo = HashMap::new();
    let mut weights: HashMap<RootedTree, S> = HashMap::new();
    for f in trunc.basis() {
        if let Some(tree) = f.as_tree() {
            let w = t.elementary_weight_memo(tree, &mut memo);
            weights.insert(tree.clone(), w);
        }
    }
    multiplicative(trunc, |tree| weights[tree].clone())
}

/// The exact-flow character `exp⋆(δ)`.
pub fn exact_flow_character<S: Coeff>(trunc: &Arc<Truncation<CkHopf>>) -> CkFunctional<S> {
    leaf_delta::<S>(trunc)
        .exp_star()
        .expect("δ vanishes on the unit")
}

/// Composition of B-series methods: `compose(a, b)` is "step with `a`, then step with `b`".
pub fn compose<S: Coeff>(a: &CkFunctional<S>, b: &CkFunctional<S>) -> Result<CkFunctional<S>, CharError> {
    if !a.is_character() || !b.is_character() {
        return Err(CharError::NotCharacter);
    }
    a.convolve(b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    pub order: usize,
    pub first_violation_tree: Option<String>,
    pub lhs: Option<Value>,
    pub rhs: Option<Value>,
}

/// Largest `p <= max_order` with `a(τ) = e(τ)` for every tree with `|τ| <= p`.
pub fn order_of<S: Coeff>(t: &ButcherTableau<S>, max_order: usize) -> OrderReport {
    order_of_tol(t, max_order, DEFAULT_TOL)
}

pub fn order_of_tol<S: Coeff>(t: &ButcherTableau<S>, max_order: usize, tol: f64) -> OrderReport {
    let trunc = super::instance::ck_truncation(max_order);
    let a = rk_character(t, &trunc);
    let e = exact_flow_character::<S>(&trunc);
    for i in 0..trunc.dim() {
        let forest = trunc.elem(i);
        let Some(tree) = forest.as_tree() else { continue };
        if !a.get(i).approx_eq(e.get(i), tol) {
            return OrderReport {
                order: tree.order() - 1,
                first_violation_tree: Some(tree.to_string()),
                lhs: Some(a.get(i).to_json()),
                rhs: Some(e.get(i).to_json()),
            };
        }
    }
    OrderReport {
        order: max_order,
        first_violation_tree: None,
        lhs: None,
        rhs: None,
    }
}

/// A random rational in `[-range, range]` with denominator at most `max_den`.
pub fn random_rational<R: Rng>(rng: &mut R, range: i64, max_den: i64) -> BigRational {
    let d = rng.gen_range(1..=max_den);
    crate::coeff::rat(rng.gen_range(-range * d..=range * d), d)
}

pub fn random_character<R: Rng>(rng: &mut R, trunc: &Arc<Truncation<CkHopf>>) -> CkFunctional<BigRational> {
    let vals: HashMap<RootedTree, BigRational> = trunc
        .basis()
        .iter()
        .filter_map(Forest::as_tree)
        .map(|t| (t.clone(), random_rational(rng, 3, 5)))
        .collect();
    character_from_trees(trunc, |t| vals[t].clone())
}

pub fn random_infinitesimal<R: Rng>(rng: &mut R, trunc: &Arc<Truncation<CkHopf>>) -> CkFunctional<BigRational> {
    let vals: HashMap<RootedTree, BigRational> = trunc
        .basis()
        .iter()
        .filter_map(Forest::as_tree)
        .map(|t| (t.clone(), random_rational(rng, 3, 5)))
        .collect();
    infinitesimal_from_trees(trunc, |t| vals[t].clone())
}

/// Random values on every forest, zero on the empty forest: generally not infinitesimal.
pub fn random_augmentation<R: Rng>(rng: &mut R, trunc: &Arc<Truncation<CkHopf>>) -> CkFunctional<BigRational> {
    Functional::from_fn(trunc, |f: &Forest| {
        if f.is_empty() {
            BigRational::zero()
        } else {
            random_rational(rng, 3, 5)
        }
    })
}

/// `a(∅) = 1` and zero on all trees: the B-series of the identity map.
pub fn identity_character<S: Coeff>(trunc: &Arc<Truncation<CkHopf>>) -> CkFunctional<S> {
    Functional::unit(trunc)
}

pub fn gamma_rational(t: &RootedTree) -> BigRational {
    BigRational::from_integer(t.factorial())
}

pub fn sigma_rational(t: &RootedTree) -> BigRational {
    BigRational::from_integer(t.symmetry())
}


#[cfg(test)]
mod tests {
    use super::tableaux::*;
    use super::*;
    use crate::ck::instance::ck_truncation;
    use crate::coeff::{int, rat};

    fn tree(s: &str) -> RootedTree {
        RootedTree::parse(s).unwrap()
    }

    #[test]
    fn euler_weights() {
        let e = explicit_euler::<BigRational>();
        assert_eq!(e.elementary_weight(&tree("[]")), int(1));
        assert_eq!(e.elementary_weight(&tree("[[]]")), int(0));
        assert!(e.lint().is_empty());
        assert!(e.is_explicit());
        assert!(!implicit_midpoint::<BigRational>().is_explicit());
    }

    #[test]
    fn lowest_weight_is_sum_of_b() {
        let t = classical_rk4::<BigRational>();
        assert_eq!(t.elementary_weight(&tree("[]")), int(1));
        let m = implicit_midpoint::<BigRational>();
        assert_eq!(m.elementary_weight(&tree("[[]]")), rat(1, 2));
    }

    #[test]
    fn orders() {
        let r = order_of(&explicit_euler::<BigRational>(), 3);
        assert_eq!(r.order, 1);
        assert_eq!(r.first_violation_tree.as_deref(), Some("[[]]"));
        assert_eq!(order_of(&implicit_midpoint::<BigRational>(), 3).order, 2);
        assert_eq!(order_of(&explicit_midpoint::<BigRational>(), 4).order, 2);
        let rk4 = order_of(&classical_rk4::<BigRational>(), 5);
        assert_eq!(rk4.order, 4);
        assert_eq!(rk4.first_violation_tree.map(|t| RootedTree::parse(&t).unwrap().order()), Some(5));
        // float tableau takes the tolerant path
        assert_eq!(order_of(&classical_rk4::<f64>(), 5).order, 4);
    }

    #[test]
    fn tableau_json() {
        let t = ButcherTableau::<BigRational>::from_json_str(
            r#"{"A": [["0","0"],["1/2","0"]], "b": ["0", 1], "c": ["0", "1/2"]}"#,
        )
        .unwrap();
        assert_eq!(t, explicit_midpoint());
        let lint = ButcherTableau::<BigRational>::from_json_str(r#"{"A": [["1"]], "b": ["1"], "c": ["0"]}"#)
            .unwrap()
            .lint();
        assert_eq!(lint.len(), 1);
        assert!(ButcherTableau::<BigRational>::from_json_str(r#"{"A": [["1", "2"]], "b": ["1"]}"#).is_err());
        assert!(ButcherTableau::<BigRational>::from_json_str(r#"{"A": [["x"]], "b": ["1"]}"#).is_err());
    }

    #[test]
    fn rk_character_is_character() {
        let tr = ck_truncation(5);
        for a in [
            rk_character(&classical_rk4::<BigRational>(), &tr),
            rk_character(&implicit_midpoint::<BigRational>(), &tr),
        ] {
            assert!(a.is_character());
        }
    }

    #[test]
    fn compose_with_unit_and_inverse() {
        let tr = ck_truncation(5);
        let a = rk_character(&explicit_midpoint::<BigRational>(), &tr);
        let unit = identity_character(&tr);
        assert_eq!(compose(&a, &unit).unwrap(), a);
        assert_eq!(compose(&a, &a.char_inverse().unwrap()).unwrap(), unit);
        assert!(compose(&a, &leaf_delta(&tr)).is_err());
    }
}
