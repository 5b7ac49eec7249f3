//! Polynomial Hopf algebras `Q[x_0, …, x_{r-1}]` with primitive generators of
//! positive rational degree — graded by an index monoid rather than by `N`.
//!
//! `Δ(x^a) = Σ_{k ≤ a} Π_i C(a_i, k_i) x^k ⊗ x^{a-k}`, `S(x^a) = (-1)^{|a|} x^a`.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::hopf::{Degree, HopfAlgebra, LinComb, TensorSum};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitivePolynomial {
    gens: Vec<Degree>,
}

fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

impl PrimitivePolynomial {
    /// Generators of the given strictly positive degrees.
    pub fn new(gens: Vec<Degree>) -> Option<Arc<Self>> {
        (!gens.is_empty() && gens.iter().all(|d| *d > Degree::ZERO)).then(|| Arc::new(PrimitivePolynomial { gens }))
    }

    /// Parses a comma-separated degree list such as `1/2,1/3`.
    pub fn parse(spec: &str) -> Option<Arc<Self>> {
        let gens = spec.split(',').map(|s| Degree::parse(s.trim())).collect::<Option<Vec<_>>>()?;
        Self::new(gens)
    }

    pub fn generators(&self) -> &[Degree] {
        &self.gens
    }

    /// All exponent vectors of degree `<= cutoff`.
    fn monomials_up_to(&self, cutoff: Degree) -> Vec<Vec<u32>> {
        fn rec(gens: &[Degree], i: usize, left: Degree, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if i == gens.len() {
                out.push(cur.clone());
                return;
            }
            let mut left = left;
            let mut e = 0;
            loop {
                cur.push(e);
                rec(gens, i + 1, left, cur, out);
                cur.pop();
                if left < gens[i] {
                    break;
                }
                left = left - gens[i];
                e += 1;
            }
        }
        let mut out = Vec::new();
        if cutoff >= Degree::ZERO {
            rec(&self.gens, 0, cutoff, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl HopfAlgebra for PrimitivePolynomial {
    type Elem = Vec<u32>;

    fn name(&self) -> String {
        let gens: Vec<String> = self.gens.iter().map(ToString::to_string).collect();
        format!("poly:{}", gens.join(","))
    }

    fn degree(&self, e: &Vec<u32>) -> Degree {
        e.iter()
            .zip(&self.gens)
            .fold(Degree::ZERO, |acc, (k, g)| Degree(acc.0 + g.0 * i64::from(*k)))
    }

    fn degrees_up_to(&self, cutoff: Degree) -> Vec<Degree> {
        let set: BTreeSet<Degree> = self.monomials_up_to(cutoff).iter().map(|e| self.degree(e)).collect();
        set.into_iter().collect()
    }

    fn basis_of_degree(&self, d: Degree) -> Vec<Vec<u32>> {
        self.monomials_up_to(d).into_iter().filter(|e| self.degree(e) == d).collect()
    }

    fn is_connected(&self) -> bool {
        true
    }

    fn unit(&self) -> LinComb<Vec<u32>> {
        LinComb::basis(vec![0; self.gens.len()])
    }

    fn counit(&self, e: &Vec<u32>) -> BigRational {
        if e.iter().all(|k| *k == 0) {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    }

    fn product(&self, a: &Vec<u32>, b: &Vec<u32>) -> Option<LinComb<Vec<u32>>> {
        Some(LinComb::basis(a.iter().zip(b).map(|(x, y)| x + y).collect()))
    }

    fn coproduct(&self, e: &Vec<u32>) -> TensorSum<Vec<u32>> {
        let mut out: Vec<(Vec<u32>, Vec<u32>, BigInt)> = vec![(Vec::new(), Vec::new(), BigInt::one())];
        for &a in e {
            out = out
                .into_iter()
                .flat_map(|(l, r, c)| {
                    (0..=a).map(move |k| {
                        let mut l = l.clone();
                        let mut r = r.clone();
                        l.push(k);
                        r.push(a - k);
                        (l, r, &c * binomial(a, k))
                    })
                })
                .collect();
        }
        out.into_iter().map(|(l, r, c)| ((l, r), BigRational::from_integer(c))).collect()
    }

    fn elem_id(&self, e: &Vec<u32>) -> String {
        let parts: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, k)| **k > 0)
            .map(|(i, k)| if *k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    fn parse_elem(&self, id: &str) -> Option<Vec<u32>> {
        let mut e = vec![0; self.gens.len()];
        if id == "1" {
            return Some(e);
        }
        for part in id.split('*') {
            let (var, pow) = match part.split_once('^') {
                Some((v, p)) => (v, p.parse().ok()?),
                None => (part, 1),
            };
            let i: usize = var.strip_prefix('x')?.parse().ok()?;
            *e.get_mut(i)? += pow;
        }
        Some(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charalg::Functional;
    use crate::hopf::{verify_axioms, Truncation};

    fn half_third() -> Arc<PrimitivePolynomial> {
        PrimitivePolynomial::parse("1/2,1/3").unwrap()
    }

    #[test]
    fn rational_degrees() {
        let h = half_third();
        let ds = h.degrees_up_to(Degree::int(1));
        let shown: Vec<String> = ds.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["0", "1/3", "1/2", "2/3", "5/6", "1"]);
        assert_eq!(h.basis_of_degree(Degree::int(1)), vec![vec![0, 3], vec![2, 0]]);
        assert_eq!(h.parse_elem("x0^2*x1"), Some(vec![2, 1]));
        assert_eq!(h.elem_id(&vec![2, 1]), "x0^2*x1");
    }

    #[test]
    fn axioms_hold() {
        let report = verify_axioms(&half_third(), Degree::int(2));
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn exp_of_generator_functional_is_a_character() {
        let tr = Truncation::new(half_third(), Degree::int(2)).unwrap();
        let delta = Functional::from_fn(&tr, |e: &Vec<u32>| match e.as_slice() {
            [1, 0] => crate::coeff::int(2),
            [0, 1] => crate::coeff::rat(-1, 3),
            _ => BigRational::zero(),
        });
        assert!(delta.is_infinitesimal());
        let e = delta.exp_star().unwrap();
        assert!(e.is_character());
        // exp(δ)(x0^a x1^b) = 2^a (-1/3)^b; x0^2 x1^2 has degree 5/3
        assert_eq!(e.at(&vec![2, 2]), crate::coeff::rat(4, 9));
        assert_eq!(e.log_star().unwrap(), delta);
    }
}
