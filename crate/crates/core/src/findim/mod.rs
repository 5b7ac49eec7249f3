//! Finite-dimensional coalgebras given by structure constants.
//!
//! `Δ(e_i) = Σ ν_i^{jk} e_j ⊗ e_k`. The convolution algebra `Hom(C, B)` is then
//! `B^d` with `(α⋆β)_i = Σ ν_i^{jk} α_j β_k`; [`norms`] holds the Banach-norm
//! and κ machinery on top of that, [`tensor`] the tensor-square apparatus
//! (`(m_H)*`, `β`, the multiplicativity identities).
//!
//! A coalgebra may optionally carry a product, a unit and an antipode, which
//! makes it a [`HopfAlgebra`] usable by the rest of the crate. Basis elements
//! may carry non-negative rational degrees; an optional `top_degree` marks
//! where products stop being defined (for truncated polynomial algebras).

pub mod norms;
pub mod tensor;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;
use thiserror::Error;

use crate::charalg::parse_degree_value;
use crate::coeff::parse_rational;
use crate::hopf::{Degree, HopfAlgebra, LinComb, TensorSum};

pub use norms::{
    banach_norm_check, convolve_findim, epsilon_vector, gn_iterated_check, k_norm, kappa, kappa_check,
    BanachReport, GnReport, KappaReport, NormConstants,
};
pub use tensor::{
    beta, exp_character_equivalence, multifalt_check, precompose_mult, random_functional, tensor_truncation,
    EquivalenceReport, MultifaltReport, TensorSquare,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FindimError {
    #[error("invalid coalgebra description: {0}")]
    Invalid(String),
    #[error("cannot read `{path}`: {msg}")]
    Io { path: String, msg: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("instance has no product")]
    NoProduct,
    #[error("norm unsupported: {0}")]
    NormUnsupported(String),
    #[error(transparent)]
    Char(#[from] crate::charalg::CharError),
}

type SparseRow = Vec<(usize, BigRational)>;

/// A coalgebra with basis `e_0 … e_{d-1}`, optionally a bialgebra/Hopf algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteCoalgebra {
    name: String,
    ids: Vec<String>,
    degrees: Vec<Degree>,
    counit: Vec<BigRational>,
    /// `nu[i]` lists `(j, k, ν_i^{jk})` with nonzero coefficients.
    nu: Vec<Vec<(usize, usize, BigRational)>>,
    /// `product[a][b]`; `None` entries are undefined (above `top_degree`).
    product: Option<Vec<Vec<Option<SparseRow>>>>,
    unit: Option<SparseRow>,
    antipode: Option<Vec<SparseRow>>,
    top_degree: Option<Degree>,
}

fn invalid(msg: impl Into<String>) -> FindimError {
    FindimError::Invalid(msg.into())
}

fn index_of(v: &Value, dim: usize, what: &str) -> Result<usize, FindimError> {
    let i = v
        .as_u64()
        .ok_or_else(|| invalid(format!("{what}: index {v} is not a non-negative integer")))? as usize;
    if i >= dim {
        return Err(invalid(format!("{what}: index {i} out of range for dim {dim}")));
    }
    Ok(i)
}

fn rational(v: &Value, what: &str) -> Result<BigRational, FindimError> {
    parse_rational(v).map_err(|e| invalid(format!("{what}: {e}")))
}

fn vector(v: &Value, dim: usize, what: &str) -> Result<Vec<BigRational>, FindimError> {
    let arr = v.as_array().ok_or_else(|| invalid(format!("{what} must be an array")))?;
    if arr.len() != dim {
        return Err(invalid(format!("{what} has length {}, expected {dim}", arr.len())));
    }
    arr.iter().map(|x| rational(x, what)).collect()
}

fn sparse(v: &[BigRational]) -> SparseRow {
    v.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.clone()))
        .collect()
}

/// Per-index rows of `(j, k, value)` entries.
type TripleRows = Vec<Vec<(usize, usize, BigRational)>>;

/// Parses `[[i, j, k, value], ...]` into per-`i` rows of `(j, k, value)`.
fn triples(v: &Value, dim: usize, what: &str) -> Result<TripleRows, FindimError> {
    let arr = v.as_array().ok_or_else(|| invalid(format!("{what} must be an array")))?;
    let mut acc: Vec<HashMap<(usize, usize), BigRational>> = vec![HashMap::new(); dim];
    for entry in arr {
        let e = entry
            .as_array()
            .filter(|e| e.len() == 4)
            .ok_or_else(|| invalid(format!("{what} entries must be [i, j, k, value]")))?;
        let i = index_of(&e[0], dim, what)?;
        let j = index_of(&e[1], dim, what)?;
        let k = index_of(&e[2], dim, what)?;
        *acc[i].entry((j, k)).or_insert_with(BigRational::zero) += rational(&e[3], what)?;
    }
    Ok(acc
        .into_iter()
        .map(|m| {
            let mut row: Vec<_> = m.into_iter().filter(|(_, c)| !c.is_zero()).map(|((j, k), c)| (j, k, c)).collect();
            row.sort_by_key(|t| (t.0, t.1));
            row
        })
        .collect())
}

impl FiniteCoalgebra {
    /// Parses the JSON description
    /// `{dim, nu: [[i,j,k,value]...], counit: [...], antipode?: matrix}` with
    /// 0-based indices. Optional fields: `name`, `ids`, `degrees`,
    /// `top_degree`, `product: [[a,b,c,value]...]` (`e_a e_b = Σ value e_c`),
    /// `unit: [...]`. `antipode[i][j]` is the coefficient of `e_j` in `S(e_i)`.
    ///
    /// Only structural validity is checked here; the coalgebra and Hopf
    /// axioms are the business of [`crate::hopf::verify_axioms`].
    pub fn from_json(v: &Value) -> Result<Self, FindimError> {
        let obj = v.as_object().ok_or_else(|| invalid("top level must be an object"))?;
        let dim = obj
            .get("dim")
            .and_then(Value::as_u64)
            .filter(|d| *d >= 1)
            .ok_or_else(|| invalid("`dim` must be a positive integer"))? as usize;
        let name = match obj.get("name") {
            None => "findim".to_string(),
            Some(n) => n.as_str().ok_or_else(|| invalid("`name` must be a string"))?.to_string(),
        };
        let ids: Vec<String> = match obj.get("ids") {
            None => (0..dim).map(|i| format!("e{i}")).collect(),
            Some(a) => {
                let a = a.as_array().filter(|a| a.len() == dim).ok_or_else(|| invalid("`ids` must list one id per basis element"))?;
                a.iter()
                    .map(|x| x.as_str().map(str::to_string).ok_or_else(|| invalid("ids must be strings")))
                    .collect::<Result<_, _>>()?
            }
        };
        let distinct: BTreeSet<&String> = ids.iter().collect();
        if distinct.len() != dim {
            return Err(invalid("ids must be distinct"));
        }
        if let Some(bad) = ids.iter().find(|s| s.is_empty() || s.contains('|')) {
            return Err(invalid(format!("id `{bad}` must be non-empty and free of `|`")));
        }
        let degrees: Vec<Degree> = match obj.get("degrees") {
            None => vec![Degree::ZERO; dim],
            Some(a) => {
                let a = a.as_array().filter(|a| a.len() == dim).ok_or_else(|| invalid("`degrees` must list one degree per basis element"))?;
                a.iter()
                    .map(|x| parse_degree_value(x).ok_or_else(|| invalid(format!("bad degree {x}"))))
                    .collect::<Result<_, _>>()?
            }
        };
        if let Some(d) = degrees.iter().find(|d| **d < Degree::ZERO) {
            return Err(invalid(format!("negative degree {d}")));
        }
        let top_degree = match obj.get("top_degree") {
            None => None,
            Some(x) => Some(parse_degree_value(x).ok_or_else(|| invalid(format!("bad top_degree {x}")))?),
        };
        let nu = triples(obj.get("nu").ok_or_else(|| invalid("missing `nu`"))?, dim, "nu")?;
        let counit = vector(obj.get("counit").ok_or_else(|| invalid("missing `counit`"))?, dim, "counit")?;
        let product = match obj.get("product") {
            None => None,
            Some(p) => {
                let rows = triples(p, dim, "product")?;
                let mut table = vec![vec![None; dim]; dim];
                for a in 0..dim {
                    for b in 0..dim {
                        let defined = top_degree.is_none_or(|t| degrees[a] + degrees[b] <= t);
                        if defined {
                            table[a][b] = Some(Vec::new());
                        }
                    }
                }
                for (a, row) in rows.into_iter().enumerate() {
                    for (b, c, v) in row {
                        let cell = table[a][b].as_mut().ok_or_else(|| {
                            invalid(format!("product e{a}·e{b} given above top_degree"))
                        })?;
                        cell.push((c, v));
                    }
                }
                Some(table)
            }
        };
        let unit = match obj.get("unit") {
            None => None,
            Some(u) => Some(sparse(&vector(u, dim, "unit")?)),
        };
        if product.is_some() != unit.is_some() {
            return Err(invalid("`product` and `unit` must be given together"));
        }
        let antipode = match obj.get("antipode") {
            None => None,
            Some(m) => {
                let rows = m.as_array().filter(|r| r.len() == dim).ok_or_else(|| invalid("`antipode` must be a dim×dim matrix"))?;
                Some(
                    rows.iter()
                        .map(|r| vector(r, dim, "antipode row").map(|v| sparse(&v)))
                        .collect::<Result<_, _>>()?,
                )
            }
        };
        if antipode.is_some() && product.is_none() {
            return Err(invalid("an antipode needs a product"));
        }
        Ok(FiniteCoalgebra {
            name,
            ids,
            degrees,
            counit,
            nu,
            product,
            unit,
            antipode,
            top_degree,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self, FindimError> {
        let v: Value = serde_json::from_str(s).map_err(|e| invalid(format!("not JSON: {e}")))?;
        Self::from_json(&v)
    }

    pub fn load(path: &Path) -> Result<Self, FindimError> {
        let s = std::fs::read_to_string(path).map_err(|e| FindimError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::from_json_str(&s)
    }

    pub fn dim(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn counit_vector(&self) -> &[BigRational] {
        &self.counit
    }

    /// `(j, k, ν_i^{jk})` for the nonzero structure constants of `Δ(e_i)`.
    pub fn nu(&self, i: usize) -> &[(usize, usize, BigRational)] {
        &self.nu[i]
    }

    /// `max_{i,j,k} |ν_i^{jk}|`.
    pub fn max_abs_nu(&self) -> BigRational {
        self.nu
            .iter()
            .flatten()
            .map(|(_, _, c)| if c < &BigRational::zero() { -c.clone() } else { c.clone() })
            .fold(BigRational::zero(), |a, b| if b > a { b } else { a })
    }
}

impl HopfAlgebra for FiniteCoalgebra {
    type Elem = usize;

    fn name(&self) -> String {
        self.name.clone()
    }

    fn degree(&self, e: &usize) -> Degree {
        self.degrees[*e]
    }

    fn degrees_up_to(&self, cutoff: Degree) -> Vec<Degree> {
        let set: BTreeSet<Degree> = self.degrees.iter().copied().filter(|d| *d <= cutoff).collect();
        set.into_iter().collect()
    }

    fn basis_of_degree(&self, d: Degree) -> Vec<usize> {
        (0..self.dim()).filter(|i| self.degrees[*i] == d).collect()
    }

    fn top_degree(&self) -> Option<Degree> {
        self.top_degree
    }

    /// Connected when degree 0 is spanned by a single element that is the unit.
    fn is_connected(&self) -> bool {
        let zero: Vec<usize> = self.basis_of_degree(Degree::ZERO);
        match (&self.unit, zero.as_slice()) {
            (Some(u), [z]) => u.len() == 1 && u[0].0 == *z && u[0].1.is_one(),
            _ => false,
        }
    }

    /// For a bare coalgebra (no product) the unit is not meaningful; the
    /// counit-dual element is returned so that `Hom(C, B)` still has its
    /// convolution unit `ε`.
    fn unit(&self) -> LinComb<usize> {
        match &self.unit {
            Some(u) => u.iter().cloned().collect(),
            None => LinComb::zero(),
        }
    }

    fn counit(&self, e: &usize) -> BigRational {
        self.counit[*e].clone()
    }

    fn product(&self, a: &usize, b: &usize) -> Option<LinComb<usize>> {
        let row = self.product.as_ref()?[*a][*b].as_ref()?;
        Some(row.iter().cloned().collect())
    }

    fn has_product(&self) -> bool {
        self.product.is_some()
    }

    fn coproduct(&self, e: &usize) -> TensorSum<usize> {
        self.nu[*e].iter().map(|(j, k, c)| ((*j, *k), c.clone())).collect()
    }

    fn supplied_antipode(&self, e: &usize) -> Option<LinComb<usize>> {
        self.antipode.as_ref().map(|s| s[*e].iter().cloned().collect())
    }

    fn elem_id(&self, e: &usize) -> String {
        self.ids[*e].clone()
    }

    fn parse_elem(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }
}

/// The finite coalgebras shipped with the crate, as data files.
pub mod shipped {
    use super::*;

    pub const TRIVIAL: &str = include_str!("../../data/findim/trivial.json");
    pub const GROUP_PRIMITIVE: &str = include_str!("../../data/findim/group_primitive.json");
    pub const Z3_FUNCTIONS: &str = include_str!("../../data/findim/z3_functions.json");
    pub const MATRIX2: &str = include_str!("../../data/findim/matrix2.json");

    fn load(s: &str) -> Arc<FiniteCoalgebra> {
        Arc::new(FiniteCoalgebra::from_json_str(s).expect("shipped instance parses"))
    }

    /// One group-like element `e`: `Δe = e⊗e`.
    pub fn trivial() -> Arc<FiniteCoalgebra> {
        load(TRIVIAL)
    }

    /// `g` group-like of degree 0, `x` primitive of degree 1 (`Δx = x⊗g + g⊗x`),
    /// with the product of `Q[x]` truncated at degree 1.
    pub fn group_primitive() -> Arc<FiniteCoalgebra> {
        load(GROUP_PRIMITIVE)
    }

    /// Functions on `Z/3`: `Δδ_k = Σ_{i+j=k} δ_i⊗δ_j`, pointwise product,
    /// `S(δ_k) = δ_{-k}`. Not connected.
    pub fn z3_functions() -> Arc<FiniteCoalgebra> {
        load(Z3_FUNCTIONS)
    }

    /// The matrix coalgebra `Δe_{ij} = Σ_k e_{ik}⊗e_{kj}`, `ε(e_{ij}) = δ_{ij}`. No product.
    pub fn matrix2() -> Arc<FiniteCoalgebra> {
        load(MATRIX2)
    }

    /// All shipped instances.
    pub fn all() -> Vec<Arc<FiniteCoalgebra>> {
        vec![trivial(), group_primitive(), z3_functions(), matrix2()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::{verify_axioms, CheckStatus};

    #[test]
    fn shipped_instances_pass_axioms() {
        for c in shipped::all() {
            let report = verify_axioms(&c, Degree::int(6));
            assert!(report.all_pass(), "{}: {:?}", c.name(), report);
            let expect = if c.has_product() { CheckStatus::Pass } else { CheckStatus::NotApplicable };
            assert_eq!(report.status("antipode-left"), Some(expect));
            assert_eq!(report.status("coassociativity"), Some(CheckStatus::Pass));
        }
    }

    #[test]
    fn connectedness() {
        assert!(shipped::trivial().is_connected());
        assert!(shipped::group_primitive().is_connected());
        assert!(!shipped::z3_functions().is_connected());
        assert!(!shipped::matrix2().is_connected());
    }

    #[test]
    fn corrupted_descriptions_are_rejected() {
        for bad in [
            "not json",
            "{}",
            r#"{"dim": 2, "nu": [[0,0,0,1]], "counit": [1]}"#,
            r#"{"dim": 1, "nu": [[0,0,1,1]], "counit": [1]}"#,
            r#"{"dim": 1, "nu": [[0,0,0,"x"]], "counit": [1]}"#,
            r#"{"dim": 1, "nu": [[0,0,0,1]], "counit": [1], "product": [[0,0,0,1]]}"#,
            r#"{"dim": 1, "nu": [[0,0,0,1]], "counit": [1], "degrees": [-1]}"#,
            include_str!("../../data/findim/corrupted.json"),
        ] {
            assert!(FiniteCoalgebra::from_json_str(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn broken_coassociativity_is_reported() {
        let c = Arc::new(
            FiniteCoalgebra::from_json_str(r#"{"dim": 2, "nu": [[0,0,0,1],[1,1,1,1],[1,0,1,1]], "counit": [1, 0]}"#)
                .unwrap(),
        );
        let report = verify_axioms(&c, Degree::int(0));
        assert_eq!(report.status("coassociativity"), Some(CheckStatus::Fail));
    }

    #[test]
    fn rational_values_and_ids() {
        let c = FiniteCoalgebra::from_json_str(
            r#"{"dim": 1, "ids": ["u"], "nu": [[0,0,0,"1"]], "counit": ["1/1"]}"#,
        )
        .unwrap();
        assert_eq!(c.parse_elem("u"), Some(0));
        assert_eq!(c.max_abs_nu(), BigRational::one());
    }
}
