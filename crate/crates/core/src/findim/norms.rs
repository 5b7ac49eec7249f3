//! Convolution on `B^d`, the Banach norm `‖α‖_K = K·max_i‖α_i‖`, the iterated
//! estimate `p_∞(ψ_1⋆⋯⋆ψ_n) ≤ (KM)^n`, and the isomorphism
//! `κ: B ⊗ Hom(C, K) → Hom(C, B)`, `κ(b⊗φ) = (x ↦ φ(x) b)`.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use super::{FindimError, FiniteCoalgebra};
use crate::ck::butcher::random_rational;
use crate::coeff::{format_rational, rational_to_f64, Coeff};
use crate::hopf::iterated_coproduct;
use crate::par::{self, Execution};

/// `K = d²·max(max|ν_i^{jk}|, 1)`, and the base-algebra constant `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormConstants {
    pub k: BigRational,
    /// `M = 1` for rationals and floats with the absolute value, since
    /// `|x_1⋯x_n| ≤ 1` whenever every `|x_i| ≤ 1`.
    pub m: BigRational,
}

impl NormConstants {
    pub fn of(c: &FiniteCoalgebra) -> Self {
        let d = BigRational::from_integer((c.dim() * c.dim()).into());
        let max = c.max_abs_nu().max(BigRational::one());
        NormConstants {
            k: d * max,
            m: BigRational::one(),
        }
    }

    pub fn k_f64(&self) -> f64 {
        rational_to_f64(&self.k)
    }
}

fn check_dim(c: &FiniteCoalgebra, got: usize) -> Result<(), FindimError> {
    if got != c.dim() {
        return Err(FindimError::DimensionMismatch {
            expected: c.dim(),
            got,
        });
    }
    Ok(())
}

/// `(α⋆β)_i = Σ_{j,k} ν_i^{jk} α_j β_k`.
pub fn convolve_findim<S: Coeff>(c: &FiniteCoalgebra, a: &[S], b: &[S]) -> Result<Vec<S>, FindimError> {
    check_dim(c, a.len())?;
    check_dim(c, b.len())?;
    Ok((0..c.dim())
        .map(|i| {
            let mut acc = S::zero();
            for (j, k, nu) in c.nu(i) {
                acc.mul_acc(&a[*j].scale(nu), &b[*k]);
            }
            acc
        })
        .collect())
}

/// The convolution unit: the counit as a `B`-vector.
pub fn epsilon_vector<S: Coeff>(c: &FiniteCoalgebra) -> Vec<S> {
    c.counit_vector().iter().map(S::from_rational).collect()
}

/// `‖α‖_K = K·max_i ‖α_i‖`.
pub fn k_norm<S: Coeff>(c: &FiniteCoalgebra, a: &[S]) -> Result<f64, FindimError> {
    check_dim(c, a.len())?;
    let k = NormConstants::of(c).k_f64();
    let mut max = 0.0f64;
    for v in a {
        let n = v.norm().map_err(|e| FindimError::NormUnsupported(e.to_string()))?;
        max = max.max(n);
    }
    Ok(k * max)
}

/// Relative slack for comparing norms that were rounded to `f64`.
const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct BanachReport {
    pub instance: String,
    pub k: String,
    pub samples: usize,
    /// `max ‖α⋆β‖_K / (‖α‖_K‖β‖_K)` over samples with a nonzero denominator.
    pub max_ratio: f64,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl BanachReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `‖α⋆β‖_K ≤ ‖α‖_K ‖β‖_K` on every pair.
pub fn banach_norm_check<S: Coeff>(
    c: &FiniteCoalgebra,
    pairs: &[(Vec<S>, Vec<S>)],
    exec: Execution,
) -> Result<BanachReport, FindimError> {
    let results = par::map_slice(pairs, exec, |(a, b)| -> Result<(f64, bool), FindimError> {
        let lhs = k_norm(c, &convolve_findim(c, a, b)?)?;
        let rhs = k_norm(c, a)? * k_norm(c, b)?;
        let ok = lhs <= rhs * (1.0 + NORM_SLACK);
        let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
        Ok((ratio, ok))
    });
    let mut max_ratio = 0.0f64;
    let mut violations = 0;
    let mut witness = None;
    for (idx, r) in results.into_iter().enumerate() {
        let (ratio, ok) = r?;
        max_ratio = max_ratio.max(ratio);
        if !ok {
            violations += 1;
            witness.get_or_insert_with(|| format!("sample {idx}: ratio {ratio}"));
        }
    }
    Ok(BanachReport {
        instance: crate::hopf::HopfAlgebra::name(c),
        k: format_rational(&NormConstants::of(c).k),
        samples: pairs.len(),
        max_ratio,
        violations,
        witness,
    })
}

fn random_vector<R: Rng>(rng: &mut R, d: usize, range: i64) -> Vec<BigRational> {
    (0..d).map(|_| random_rational(rng, range, 7)).collect()
}

/// Seeded sample pairs: dense random vectors, sparse adversarial pairs that
/// isolate a single structure constant `ν_i^{jk}`, and the `ε` pair.
pub fn banach_samples(c: &FiniteCoalgebra, count: usize, seed: u64) -> Vec<(Vec<BigRational>, Vec<BigRational>)> {
    let d = c.dim();
    let targets: Vec<(usize, usize)> = (0..d).flat_map(|i| c.nu(i).iter().map(|(j, k, _)| (*j, *k))).collect();
    (0..count)
        .map(|s| {
            let mut rng = par::sample_rng(seed, s as u64);
            match s % 4 {
                0 => (epsilon_vector(c), epsilon_vector(c)),
                1 if !targets.is_empty() => {
                    let (j, k) = targets[rng.gen_range(0..targets.len())];
                    let mut a = vec![BigRational::zero(); d];
                    let mut b = vec![BigRational::zero(); d];
                    a[j] = random_rational(&mut rng, 9, 3);
                    b[k] = random_rational(&mut rng, 9, 3);
                    (a, b)
                }
                _ => (random_vector(&mut rng, d, 5), random_vector(&mut rng, d, 5)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GnReport {
    pub instance: String,
    pub k: String,
    pub m: String,
    pub n_max: usize,
    pub samples: usize,
    /// `max p_∞(ψ_1⋆⋯⋆ψ_n) / (KM)^n`.
    pub max_ratio: f64,
    /// `max p_∞(ψ_1⋆⋯⋆ψ_n) / (K^{n-1} M^n)`, the sharper form of the estimate.
    pub max_sharp_ratio: f64,
    pub violations: usize,
    /// Samples where repeated convolution and the iterated coproduct disagree.
    pub path_mismatches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl GnReport {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.path_mismatches == 0
    }
}

fn max_abs(v: &[BigRational]) -> BigRational {
    v.iter().map(Signed::abs).fold(BigRational::zero(), |a, b| a.max(b))
}

/// For `n = 1..=n_max` and `samples` seeded draws of `ψ_1 … ψ_n` with
/// `q_∞(ψ_l) ≤ 1`, checks `p_∞(ψ_1⋆⋯⋆ψ_n) ≤ (KM)^n` with `M = 1` (exact
/// rationals, `p = q = |·|`). The product is computed twice: by repeated
/// [`convolve_findim`] and by evaluating `ψ_1⊗⋯⊗ψ_n` on the iterated
/// coproduct `Δ^{n-1}(e_i)`; both must agree exactly.
pub fn gn_iterated_check(
    c: &FiniteCoalgebra,
    n_max: usize,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> GnReport {
    let consts = NormConstants::of(c);
    let d = c.dim();
    let iterated: Vec<Vec<_>> = (2..=n_max.max(1))
        .map(|n| (0..d).map(|i| iterated_coproduct(c, &i, n - 1)).collect())
        .collect();
    let outcomes = par::map_range(samples, exec, |s| {
        let mut rng = par::sample_rng(seed, s as u64);
        let mut out = Vec::new();
        for n in 1..=n_max {
            let psis: Vec<Vec<BigRational>> = (0..n).map(|_| random_vector(&mut rng, d, 1)).collect();
            let mut primary = psis[0].clone();
            for p in &psis[1..] {
                primary = convolve_findim(c, &primary, p).expect("dimensions agree");
            }
            let independent: Vec<BigRational> = if n == 1 {
                psis[0].clone()
            } else {
                iterated[n - 2]
                    .iter()
                    .map(|t| {
                        t.iter()
                            .map(|(legs, coef)| {
                                legs.iter().zip(&psis).fold(coef.clone(), |acc, (leg, psi)| acc * &psi[*leg])
                            })
                            .fold(BigRational::zero(), |a, b| a + b)
                    })
                    .collect()
            };
            let p = max_abs(&primary);
            let bound = num_traits::pow(consts.k.clone() * &consts.m, n);
            let sharp = num_traits::pow(consts.k.clone(), n - 1) * num_traits::pow(consts.m.clone(), n);
            out.push((n, primary == independent, p <= bound, rational_to_f64(&(p.clone() / bound)), rational_to_f64(&(p / sharp))));
        }
        out
    });
    let mut report = GnReport {
        instance: crate::hopf::HopfAlgebra::name(c),
        k: format_rational(&consts.k),
        m: format_rational(&consts.m),
        n_max,
        samples,
        max_ratio: 0.0,
        max_sharp_ratio: 0.0,
        violations: 0,
        path_mismatches: 0,
        witness: None,
    };
    for (s, rows) in outcomes.into_iter().enumerate() {
        for (n, same, ok, ratio, sharp) in rows {
            report.max_ratio = report.max_ratio.max(ratio);
            report.max_sharp_ratio = report.max_sharp_ratio.max(sharp);
            if !same {
                report.path_mismatches += 1;
                report.witness.get_or_insert_with(|| format!("sample {s}, n = {n}: paths disagree"));
            }
            if !ok {
                report.violations += 1;
                report.witness.get_or_insert_with(|| format!("sample {s}, n = {n}: ratio {ratio}"));
            }
        }
    }
    report
}

/// `κ(b⊗φ) = (e_i ↦ φ(e_i)·b)` for `φ` in dual-basis coordinates.
pub fn kappa<S: Coeff>(b: &S, phi: &[BigRational]) -> Vec<S> {
    phi.iter().map(|p| b.scale(p)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaReport {
    pub instance: String,
    pub coefficient_dim: usize,
    pub unit_ok: bool,
    pub basis_pairs: usize,
    pub basis_failures: usize,
    pub random_samples: usize,
    pub random_failures: usize,
    pub rank: usize,
    pub expected_rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl KappaReport {
    pub fn pass(&self) -> bool {
        self.unit_ok && self.basis_failures == 0 && self.random_failures == 0 && self.rank == self.expected_rank
    }
}

/// Rank over `Q` by Gaussian elimination.
pub fn rational_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let f = row[col].clone() / &pivot_row[col];
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= p * &f;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Verifies that `κ` is a unital algebra isomorphism
/// `B ⊗ Hom(C, Q) → Hom(C, B)`:
/// - `κ(1⊗ε)` is the convolution unit;
/// - `κ((b₁⊗φ)(b₂⊗ψ)) = κ(b₁⊗φ) ⋆ κ(b₂⊗ψ)` on every pair of basis tensors
///   `b_p ⊗ e^i` (with `⋆_A` the scalar convolution on `Hom(C, Q)`) and on
///   `samples` seeded random pairs;
/// - the matrix of `κ` in these bases has full rank `dim B · d`.
pub fn kappa_check<S: Coeff>(c: &FiniteCoalgebra, samples: usize, seed: u64) -> KappaReport {
    let d = c.dim();
    let basis_b = S::field_basis();
    let m = basis_b.len();
    let dual = |i: usize| -> Vec<BigRational> {
        (0..d).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()
    };
    let mut report = KappaReport {
        instance: crate::hopf::HopfAlgebra::name(c),
        coefficient_dim: m,
        unit_ok: kappa(&S::one(), c.counit_vector()) == epsilon_vector::<S>(c),
        basis_pairs: 0,
        basis_failures: 0,
        random_samples: samples,
        random_failures: 0,
        rank: 0,
        expected_rank: m * d,
        witness: None,
    };
    let multiplicative = |b1: &S, phi: &[BigRational], b2: &S, psi: &[BigRational]| -> bool {
        let star_a = convolve_findim(c, phi, psi).expect("dimensions agree");
        let lhs = kappa(&(b1.clone() * b2.clone()), &star_a);
        let rhs = convolve_findim(c, &kappa(b1, phi), &kappa(b2, psi)).expect("dimensions agree");
        lhs.iter().zip(&rhs).all(|(x, y)| x.approx_eq(y, crate::coeff::DEFAULT_TOL))
    };
    for (p, bp) in basis_b.iter().enumerate() {
        for i in 0..d {
            for (q, bq) in basis_b.iter().enumerate() {
                for j in 0..d {
                    report.basis_pairs += 1;
                    if !multiplicative(bp, &dual(i), bq, &dual(j)) {
                        report.basis_failures += 1;
                        report.witness.get_or_insert_with(|| {
                            format!("b{p}⊗e^{}, b{q}⊗e^{}", c.ids()[i], c.ids()[j])
                        });
                    }
                }
            }
        }
    }
    for s in 0..samples {
        let mut rng = par::sample_rng(seed, s as u64);
        let rand_b = |rng: &mut rand_chacha::ChaCha8Rng| {
            basis_b
                .iter()
                .fold(S::zero(), |acc, b| acc + b.scale(&random_rational(rng, 4, 5)))
        };
        let b1 = rand_b(&mut rng);
        let b2 = rand_b(&mut rng);
        let phi = random_vector(&mut rng, d, 4);
        let psi = random_vector(&mut rng, d, 4);
        if !multiplicative(&b1, &phi, &b2, &psi) {
            report.random_failures += 1;
            report.witness.get_or_insert_with(|| format!("random sample {s}"));
        }
    }
    let rows: Vec<Vec<BigRational>> = basis_b
        .iter()
        .flat_map(|b| (0..d).map(move |i| (b.clone(), i)))
        .map(|(b, i)| kappa(&b, &dual(i)).iter().flat_map(Coeff::field_coords).collect())
        .collect();
    report.rank = rational_rank(rows);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, TruncPoly};
    use crate::findim::shipped;

    #[test]
    fn group_primitive_convolution_formula() {
        let c = shipped::group_primitive();
        // basis order: g, x
        let a = vec![int(2), int(3)];
        let b = vec![int(5), int(7)];
        let ab = convolve_findim(&c, &a, &b).unwrap();
        assert_eq!(ab[0], int(10));
        assert_eq!(ab[1], int(3 * 5 + 2 * 7));
        assert_eq!(convolve_findim(&c, &epsilon_vector(&c), &a).unwrap(), a);
        assert!(matches!(
            convolve_findim(&c, &a, &[int(1)]),
            Err(FindimError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn constants() {
        assert_eq!(NormConstants::of(&shipped::group_primitive()).k, int(4));
        assert_eq!(NormConstants::of(&shipped::matrix2()).k, int(16));
    }

    #[test]
    fn banach_on_epsilon_pair() {
        let c = shipped::z3_functions();
        let e = epsilon_vector::<BigRational>(&c);
        let r = banach_norm_check(&c, &[(e.clone(), e)], Execution::Sequential).unwrap();
        assert!(r.pass() && r.max_ratio <= 1.0);
    }

    #[test]
    fn banach_over_truncated_polynomials() {
        let c = shipped::group_primitive();
        let a = vec![TruncPoly::<3>::from_ints(&[1, 1, 0]), TruncPoly::from_ints(&[0, 2, -1])];
        let r = banach_norm_check(&c, &[(a.clone(), a)], Execution::Sequential).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn gn_zero_and_small() {
        let c = shipped::matrix2();
        let r = gn_iterated_check(&c, 3, 10, 1, Execution::Sequential);
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn kappa_two_dim_grid() {
        let c = shipped::group_primitive();
        let r = kappa_check::<TruncPoly<2>>(&c, 5, 0);
        assert_eq!(r.basis_pairs, 16);
        assert!(r.pass(), "{r:?}");
        assert_eq!(r.rank, 4);
    }

    #[test]
    fn rank_oracle() {
        assert_eq!(rational_rank(vec![vec![int(1), int(2)], vec![int(2), int(4)]]), 1);
        assert_eq!(rational_rank(vec![vec![int(0), int(1)], vec![int(1), int(0)]]), 2);
    }
}
