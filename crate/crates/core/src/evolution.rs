//! The left-logarithmic initial value problem `η'(t) = η(t) ⋆ γ(t)`,
//! `η(0) = e`, in a truncated character group.
//!
//! At a finite cutoff this is a linear ODE on `B^dim`; the degree-`n`
//! component of `η⋆γ` only involves components of degree `<= n`, so the
//! system is block-triangular. It is integrated with fixed-step classical RK4
//! in `f64`. Curves are piecewise polynomial in `t` with rational
//! coefficients; steps are split at piece boundaries so that each RK4 step
//! sees a polynomial right-hand side.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::charalg::{parse_degree_value, CharError, Functional};
use crate::coeff::{parse_rational, rational_to_f64, DEFAULT_TOL};
use crate::hopf::{Degree, HopfAlgebra, HopfError, Truncation};
use crate::par::Execution;

/// Steps used by [`evol_one`] when none are given.
pub const DEFAULT_STEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("steps must be at least 1")]
    ZeroSteps,
    #[error("time {0} lies outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error(transparent)]
    Char(#[from] CharError),
}

fn invalid(msg: impl Into<String>) -> EvolutionError {
    EvolutionError::InvalidCurve(msg.into())
}

/// `γ(t) = Σ_k c_k t^k` on `(start, end]`.
pub struct CurvePiece<H: HopfAlgebra> {
    pub start: BigRational,
    pub end: BigRational,
    /// `coeffs[k]` is the functional multiplying `t^k`.
    pub coeffs: Vec<Functional<H, BigRational>>,
    coeffs_f64: Vec<Functional<H, f64>>,
}

impl<H: HopfAlgebra> Clone for CurvePiece<H> {
    fn clone(&self) -> Self {
        CurvePiece {
            start: self.start.clone(),
            end: self.end.clone(),
            coeffs: self.coeffs.clone(),
            coeffs_f64: self.coeffs_f64.clone(),
        }
    }
}

impl<H: HopfAlgebra> CurvePiece<H> {
    fn new(start: BigRational, end: BigRational, coeffs: Vec<Functional<H, BigRational>>) -> Self {
        let coeffs_f64 = coeffs.iter().map(|c| c.map_to(rational_to_f64)).collect();
        CurvePiece {
            start,
            end,
            coeffs,
            coeffs_f64,
        }
    }

    fn eval(&self, trunc: &Arc<Truncation<H>>, t: f64) -> Functional<H, f64> {
        let mut acc = Functional::zero(trunc);
        for c in self.coeffs_f64.iter().rev() {
            acc = acc.scale(&t).add(c).expect("same truncation");
        }
        acc
    }
}

/// A piecewise-polynomial curve `[0, 1] → g(H, B)` of infinitesimal characters.
pub struct CurveSpec<H: HopfAlgebra> {
    trunc: Arc<Truncation<H>>,
    pieces: Vec<CurvePiece<H>>,
    /// Run parameters carried by the JSON file.
    pub t1: BigRational,
    pub steps: usize,
}

impl<H: HopfAlgebra> Clone for CurveSpec<H> {
    fn clone(&self) -> Self {
        CurveSpec {
            trunc: self.trunc.clone(),
            pieces: self.pieces.clone(),
            t1: self.t1.clone(),
            steps: self.steps,
        }
    }
}

/// The `cutoff` field of a curve file, needed to build the truncation first.
pub fn curve_cutoff(v: &Value) -> Result<Degree, EvolutionError> {
    v.get("cutoff")
        .and_then(parse_degree_value)
        .ok_or_else(|| invalid("missing or malformed `cutoff`"))
}

impl<H: HopfAlgebra> CurveSpec<H> {
    /// Builds a curve from pieces `(end, coeffs)` with ascending ends, the last
    /// being 1. Every coefficient functional must be an infinitesimal
    /// character; since `γ(t)` is linear in them, this is exactly the
    /// condition that `γ(t)` is infinitesimal for every `t`.
    pub fn new(
        trunc: &Arc<Truncation<H>>,
        pieces: Vec<(BigRational, Vec<Functional<H, BigRational>>)>,
    ) -> Result<Self, EvolutionError> {
        if pieces.is_empty() {
            return Err(invalid("no pieces"));
        }
        let mut start = BigRational::zero();
        let mut out = Vec::with_capacity(pieces.len());
        for (end, coeffs) in pieces {
            if end <= start {
                return Err(invalid("piece boundaries must be strictly increasing"));
            }
            for (k, c) in coeffs.iter().enumerate() {
                if !c.truncation().same_as(trunc) {
                    return Err(invalid("coefficient on a different truncation"));
                }
                if !c.is_infinitesimal() {
                    return Err(invalid(format!(
                        "coefficient of t^{k} is not an infinitesimal character"
                    )));
                }
            }
            out.push(CurvePiece::new(start.clone(), end.clone(), coeffs));
            start = end;
        }
        if !start.is_one() {
            return Err(invalid("pieces must end at t = 1"));
        }
        Ok(CurveSpec {
            trunc: trunc.clone(),
            pieces: out,
            t1: BigRational::one(),
            steps: DEFAULT_STEPS,
        })
    }

    /// `γ(t) = c` on all of `[0, 1]`.
    pub fn constant(c: &Functional<H, BigRational>) -> Result<Self, EvolutionError> {
        Self::new(c.truncation(), vec![(BigRational::one(), vec![c.clone()])])
    }

    /// `γ(t) = Σ_k c_k t^k` on all of `[0, 1]`.
    pub fn polynomial(trunc: &Arc<Truncation<H>>, coeffs: Vec<Functional<H, BigRational>>) -> Result<Self, EvolutionError> {
        Self::new(trunc, vec![(BigRational::one(), coeffs)])
    }

    /// Parses `{cutoff, terms: [{basis_id, poly: [c0, c1, ...]}], t1, steps}`.
    /// Instead of `terms`, a piecewise curve may give
    /// `pieces: [{to, terms}, ...]` with ascending `to` ending at 1; each
    /// piece's polynomial is in the global time `t`.
    pub fn from_json(trunc: &Arc<Truncation<H>>, v: &Value) -> Result<Self, EvolutionError> {
        let cutoff = curve_cutoff(v)?;
        if cutoff != trunc.cutoff() {
            return Err(invalid(format!("curve cutoff {cutoff} != truncation cutoff {}", trunc.cutoff())));
        }
        let parse_terms = |terms: &Value| -> Result<Vec<Functional<H, BigRational>>, EvolutionError> {
            let terms = terms.as_array().ok_or_else(|| invalid("`terms` must be an array"))?;
            let mut coeffs: Vec<Functional<H, BigRational>> = Vec::new();
            for term in terms {
                let id = term
                    .get("basis_id")
                    .and_then(Value::as_str)
                    .ok_or_else(|| invalid("term without `basis_id`"))?;
                let i = trunc
                    .index_of_id(id)
                    .ok_or_else(|| invalid(format!("unknown basis id `{id}` at this cutoff")))?;
                let poly = term
                    .get("poly")
                    .and_then(Value::as_array)
                    .ok_or_else(|| invalid(format!("term `{id}` without `poly` array")))?;
                for (k, c) in poly.iter().enumerate() {
                    let c = parse_rational(c).map_err(|e| invalid(format!("term `{id}`: {e}")))?;
                    while coeffs.len() <= k {
                        coeffs.push(Functional::zero(trunc));
                    }
                    let cur = coeffs[k].get(i).clone();
                    coeffs[k].set(i, cur + c);
                }
            }
            Ok(coeffs)
        };
        let pieces = match (v.get("terms"), v.get("pieces")) {
            (Some(t), None) => vec![(BigRational::one(), parse_terms(t)?)],
            (None, Some(p)) => p
                .as_array()
                .ok_or_else(|| invalid("`pieces` must be an array"))?
                .iter()
                .map(|piece| {
                    let to = piece
                        .get("to")
                        .ok_or_else(|| invalid("piece without `to`"))
                        .and_then(|x| parse_rational(x).map_err(|e| invalid(e.to_string())))?;
                    let terms = piece.get("terms").ok_or_else(|| invalid("piece without `terms`"))?;
                    Ok((to, parse_terms(terms)?))
                })
                .collect::<Result<Vec<_>, EvolutionError>>()?,
            _ => return Err(invalid("give exactly one of `terms` and `pieces`")),
        };
        let mut curve = Self::new(trunc, pieces)?;
        if let Some(t1) = v.get("t1") {
            curve.t1 = parse_rational(t1).map_err(|e| invalid(format!("t1: {e}")))?;
        }
        if let Some(s) = v.get("steps") {
            curve.steps = s.as_u64().ok_or_else(|| invalid("`steps` must be a non-negative integer"))? as usize;
        }
        Ok(curve)
    }

    pub fn truncation(&self) -> &Arc<Truncation<H>> {
        &self.trunc
    }

    pub fn pieces(&self) -> &[CurvePiece<H>] {
        &self.pieces
    }

    /// `γ(t)`, taking the piece whose interval `(start, end]` contains `t`.
    pub fn eval(&self, t: f64) -> Functional<H, f64> {
        let piece = self
            .pieces
            .iter()
            .find(|p| t <= rational_to_f64(&p.end))
            .unwrap_or_else(|| self.pieces.last().expect("at least one piece"));
        piece.eval(&self.trunc, t)
    }

    /// True when every piece is constant in `t`.
    pub fn is_piecewise_constant(&self) -> bool {
        self.pieces.iter().all(|p| p.coeffs.iter().skip(1).all(Functional::is_zero))
    }

    /// The curve with every coefficient `c_k` replaced by `f(k, c_k)`; the
    /// result is validated like any other curve.
    pub fn map_coefficients(&self, mut f: impl FnMut(usize, &Functional<H, BigRational>) -> Functional<H, BigRational>) -> Result<Self, EvolutionError> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| (p.end.clone(), p.coeffs.iter().enumerate().map(|(k, c)| f(k, c)).collect()))
            .collect();
        let mut out = Self::new(&self.trunc, pieces)?;
        out.t1 = self.t1.clone();
        out.steps = self.steps;
        Ok(out)
    }

    /// The curve `u ↦ (1-s)·γ(s + (1-s)u)` on `[0, 1]`: its evolution is the
    /// evolution of `γ` over `[s, 1]`, started at the identity.
    pub fn shifted(&self, s: &BigRational) -> Result<Self, EvolutionError> {
        if s < &BigRational::zero() || s >= &BigRational::one() {
            return Err(EvolutionError::TimeOutOfRange(rational_to_f64(s)));
        }
        let len = BigRational::one() - s;
        let pieces = self
            .pieces
            .iter()
            .filter(|p| &p.end > s)
            .map(|p| {
                let end = (p.end.clone() - s) / &len;
                // c_j' = len · Σ_{k>=j} c_k C(k,j) s^{k-j} len^j
                let n = p.coeffs.len();
                let coeffs = (0..n)
                    .map(|j| {
                        let mut acc = Functional::zero(&self.trunc);
                        for k in j..n {
                            let w = BigRational::from_integer(binomial(k, j))
                                * num_traits::pow(s.clone(), k - j)
                                * num_traits::pow(len.clone(), j + 1);
                            acc = acc.add(&p.coeffs[k].scale_rational(&w)).expect("same truncation");
                        }
                        acc
                    })
                    .collect();
                (end, coeffs)
            })
            .collect();
        Self::new(&self.trunc, pieces)
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Grid points `0 = t_0 < … < t_m = t1`: the uniform grid with `steps`
/// intervals, with piece boundaries inside `(0, t1)` inserted.
fn time_grid<H: HopfAlgebra>(curve: &CurveSpec<H>, t1: f64, steps: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=steps).map(|k| t1 * k as f64 / steps as f64).collect();
    for p in &curve.pieces {
        let b = rational_to_f64(&p.end);
        if b > 0.0 && b < t1 && !grid.iter().any(|g| (g - b).abs() <= 1e-15) {
            grid.push(b);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid
}

/// `η(t1)` for `η' = η⋆γ`, `η(0) = e`, by classical RK4 with `steps` uniform
/// steps (split at piece boundaries).
pub fn evolve<H: HopfAlgebra>(curve: &CurveSpec<H>, t1: f64, steps: usize) -> Result<Functional<H, f64>, EvolutionError> {
    evolve_with(curve, t1, steps, Execution::default())
}

pub fn evolve_with<H: HopfAlgebra>(
    curve: &CurveSpec<H>,
    t1: f64,
    steps: usize,
    exec: Execution,
) -> Result<Functional<H, f64>, EvolutionError> {
    if steps == 0 {
        return Err(EvolutionError::ZeroSteps);
    }
    if !(0.0..=1.0).contains(&t1) {
        return Err(EvolutionError::TimeOutOfRange(t1));
    }
    let trunc = &curve.trunc;
    let mut eta = Functional::<H, f64>::unit(trunc);
    let grid = time_grid(curve, t1, steps);
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        if h <= 0.0 {
            continue;
        }
        // the piece containing the whole step
        let mid = t + h / 2.0;
        let piece = curve
            .pieces
            .iter()
            .find(|p| mid <= rational_to_f64(&p.end))
            .unwrap_or_else(|| curve.pieces.last().expect("at least one piece"));
        let f = |s: f64, y: &Functional<H, f64>| -> Result<Functional<H, f64>, CharError> {
            y.convolve_with(&piece.eval(trunc, s), exec)
        };
        let k1 = f(t, &eta)?;
        let k2 = f(mid, &eta.add(&k1.scale(&(h / 2.0)))?)?;
        let k3 = f(mid, &eta.add(&k2.scale(&(h / 2.0)))?)?;
        let k4 = f(t + h, &eta.add(&k3.scale(&h))?)?;
        let incr = k1.add(&k2.scale(&2.0))?.add(&k3.scale(&2.0))?.add(&k4)?.scale(&(h / 6.0));
        eta = eta.add(&incr)?;
    }
    Ok(eta)
}

#[derive(Debug, Clone)]
pub struct EvolOne<H: HopfAlgebra> {
    pub eta: Functional<H, f64>,
    /// The split point `s` used for the flow-property check.
    pub split: BigRational,
    /// `max |Evol(γ)(1) - Evol(γ)(s) ⋆ Evol(shifted γ)(1)|`.
    pub flow_error: f64,
}

/// `Evol(γ)(1)`, together with a numerical check of the flow property
/// `Evol(γ)(1) = Evol(γ)(s) ⋆ Evol(γ(s + ·))(1)` at `s = 1/2`.
pub fn evol_one<H: HopfAlgebra>(curve: &CurveSpec<H>, steps: usize) -> Result<EvolOne<H>, EvolutionError> {
    let s = BigRational::new(1.into(), 2.into());
    let eta = evolve(curve, 1.0, steps)?;
    let half_steps = steps.div_ceil(2);
    let first = evolve(curve, rational_to_f64(&s), half_steps)?;
    let second = evolve(&curve.shifted(&s)?, 1.0, half_steps)?;
    let flow_error = eta.max_diff(&first.convolve(&second)?)?;
    Ok(EvolOne {
        eta,
        split: s,
        flow_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub steps: usize,
    /// Max-abs error against the exact solution when known, otherwise against
    /// the run with twice as many steps.
    pub error: f64,
    /// `log2(error_prev / error)`; absent on the first row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    /// `"exact"` for curves with a closed-form solution, else `"richardson"`.
    pub reference: &'static str,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Slope of the last row.
    pub fn final_slope(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.slope)
    }
}

/// The exact `η(t1)` for a piecewise-constant curve: the ordered product of
/// `exp⋆((b_i - a_i)·c_i)` over the pieces meeting `[0, t1]`.
pub fn piecewise_constant_solution<H: HopfAlgebra>(
    curve: &CurveSpec<H>,
    t1: &BigRational,
) -> Result<Option<Functional<H, BigRational>>, EvolutionError> {
    if !curve.is_piecewise_constant() {
        return Ok(None);
    }
    let mut eta = Functional::unit(&curve.trunc);
    for p in &curve.pieces {
        if &p.start >= t1 {
            break;
        }
        let end = if &p.end < t1 { p.end.clone() } else { t1.clone() };
        let len = end - &p.start;
        if let Some(c) = p.coeffs.first() {
            eta = eta.convolve(&c.scale_rational(&len).exp_star()?)?;
        }
    }
    Ok(Some(eta))
}

/// Runs [`evolve`] at `steps · 2^k` for `k < levels` and tabulates errors and
/// observed orders.
pub fn convergence_table<H: HopfAlgebra>(
    curve: &CurveSpec<H>,
    t1: &BigRational,
    base_steps: usize,
    levels: usize,
) -> Result<ConvergenceTable, EvolutionError> {
    let t1f = rational_to_f64(t1);
    let exact = piecewise_constant_solution(curve, t1)?.map(|e| e.map_to(rational_to_f64));
    let counts: Vec<usize> = (0..levels).map(|k| base_steps << k).collect();
    let mut runs = Vec::with_capacity(levels + 1);
    for &n in &counts {
        runs.push(evolve(curve, t1f, n)?);
    }
    let (reference, errors): (&'static str, Vec<f64>) = match &exact {
        Some(e) => ("exact", runs.iter().map(|r| r.max_diff(e)).collect::<Result<_, _>>()?),
        None => {
            let finest = evolve(curve, t1f, base_steps << levels)?;
            runs.push(finest);
            (
                "richardson",
                runs.windows(2).map(|w| w[0].max_diff(&w[1])).collect::<Result<_, _>>()?,
            )
        }
    };
    let rows = counts
        .iter()
        .zip(&errors)
        .enumerate()
        .map(|(k, (&steps, &error))| ConvergenceRow {
            steps,
            error,
            slope: (k > 0).then(|| (errors[k - 1] / error).log2()),
        })
        .collect();
    Ok(ConvergenceTable { reference, rows })
}

/// `is_character` at the default float tolerance.
pub fn is_character_f64<H: HopfAlgebra>(eta: &Functional<H, f64>) -> bool {
    eta.is_character_tol(DEFAULT_TOL)
}

impl From<HopfError> for EvolutionError {
    fn from(e: HopfError) -> Self {
        EvolutionError::Char(e.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ck::butcher::leaf_delta;
    use crate::ck::ck_truncation;
    use crate::coeff::rat;

    #[test]
    fn zero_curve_gives_unit() {
        let tr = ck_truncation(4);
        let c = CurveSpec::constant(&Functional::zero(&tr)).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(evolve(&c, t, 7).unwrap(), Functional::unit(&tr));
        }
        assert_eq!(evol_one(&c, 10).unwrap().eta, Functional::unit(&tr));
    }

    #[test]
    fn errors() {
        let tr = ck_truncation(3);
        let c = CurveSpec::constant(&leaf_delta(&tr)).unwrap();
        assert_eq!(evolve(&c, 1.0, 0), Err(EvolutionError::ZeroSteps));
        assert!(matches!(evolve(&c, 1.5, 3), Err(EvolutionError::TimeOutOfRange(_))));
        let mut bad = Functional::zero(&tr);
        bad.set(tr.index_of_id("[][]").unwrap(), rat(1, 1));
        assert!(matches!(CurveSpec::constant(&bad), Err(EvolutionError::InvalidCurve(_))));
    }

    #[test]
    fn linear_curve_integrates_to_half_exponential() {
        // γ(t) = t·δ commutes with itself, so η(1) = exp(δ/2).
        let tr = ck_truncation(5);
        let d = leaf_delta::<BigRational>(&tr);
        let c = CurveSpec::polynomial(&tr, vec![Functional::zero(&tr), d.clone()]).unwrap();
        let eta = evolve(&c, 1.0, 200).unwrap();
        let exact = d.scale_rational(&rat(1, 2)).exp_star().unwrap().map_to(rational_to_f64);
        assert!(eta.max_diff(&exact).unwrap() < 1e-9);
        assert!(is_character_f64(&eta));
    }

    #[test]
    fn shifted_curve_substitution() {
        let tr = ck_truncation(2);
        let d = leaf_delta::<BigRational>(&tr);
        // γ(t) = δ + 2tδ; shifted at s = 1/2: (1/2)(δ + 2(1/2 + u/2)δ) = δ + (u/2)δ
        let c = CurveSpec::polynomial(&tr, vec![d.clone(), d.scale_rational(&rat(2, 1))]).unwrap();
        let sh = c.shifted(&rat(1, 2)).unwrap();
        assert_eq!(sh.pieces()[0].coeffs[0], d);
        assert_eq!(sh.pieces()[0].coeffs[1], d.scale_rational(&rat(1, 2)));
    }

    #[test]
    fn flow_property() {
        let tr = ck_truncation(4);
        let d = leaf_delta::<BigRational>(&tr);
        let c = CurveSpec::polynomial(&tr, vec![d.clone(), Functional::zero(&tr), d]).unwrap();
        let r = evol_one(&c, 64).unwrap();
        assert!(r.flow_error < 1e-10, "{}", r.flow_error);
    }
}
