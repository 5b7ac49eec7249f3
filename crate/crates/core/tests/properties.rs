//! Property tests: algebraic laws on generated inputs, with exact rational
//! values so that failures shrink to small counterexamples.

use std::sync::Arc;

use hopfchar::charalg::Functional;
use hopfchar::ck::butcher::{character_from_trees, infinitesimal_from_trees};
use hopfchar::ck::{ck_truncation, gen_trees, CkHopf, Forest, RootedTree};
use hopfchar::coeff::{rat, Coeff};
use hopfchar::findim::{convolve_findim, k_norm, shipped};
use hopfchar::{Degree, TruncPoly, Truncation};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

const CUTOFF: usize = 4;
/// Number of rooted trees with at most `CUTOFF` nodes.
const TREES: usize = 8;

fn rational() -> impl Strategy<Value = BigRational> {
    (-12i64..=12, 1i64..=5).prop_map(|(n, d)| rat(n, d))
}

fn tree_values() -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec(rational(), TREES)
}

fn trunc() -> Arc<Truncation<CkHopf>> {
    ck_truncation(CUTOFF)
}

fn tree_index(t: &RootedTree) -> usize {
    gen_trees(CUTOFF).iter().position(|u| u == t).expect("tree within the cutoff")
}

fn character(vals: &[BigRational]) -> Functional<CkHopf, BigRational> {
    character_from_trees(&trunc(), |t| vals[tree_index(t)].clone())
}

fn infinitesimal(vals: &[BigRational]) -> Functional<CkHopf, BigRational> {
    infinitesimal_from_trees(&trunc(), |t| vals[tree_index(t)].clone())
}

/// Arbitrary values on every forest (not a character in general).
fn any_functional(vals: &[BigRational]) -> Functional<CkHopf, BigRational> {
    let tr = trunc();
    Functional::from_values(&tr, (0..tr.dim()).map(|i| vals[i % vals.len()].clone()).collect())
}

/// A random rooted tree from a parent array (`parent[i] < i`).
fn random_tree() -> impl Strategy<Value = Vec<usize>> {
    (1usize..=7).prop_flat_map(|n| (1..n).map(|i| 0..i).collect::<Vec<_>>())
}

fn build_tree(parents: &[usize], reverse_children: bool) -> RootedTree {
    let n = parents.len() + 1;
    let mut children = vec![Vec::new(); n];
    for (i, &p) in parents.iter().enumerate() {
        children[p].push(i + 1);
    }
    fn go(v: usize, children: &[Vec<usize>], rev: bool) -> RootedTree {
        let mut kids: Vec<RootedTree> = children[v].iter().map(|&c| go(c, children, rev)).collect();
        if rev {
            kids.reverse();
        }
        RootedTree::from_children(kids)
    }
    go(0, &children, reverse_children)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn exp_log_are_inverse(d in tree_values(), a in tree_values()) {
        let delta = infinitesimal(&d);
        let e = delta.exp_star().unwrap();
        prop_assert!(e.is_character());
        prop_assert_eq!(e.log_star().unwrap(), delta);
        let ch = character(&a);
        let l = ch.log_star().unwrap();
        prop_assert!(l.is_infinitesimal());
        prop_assert_eq!(l.exp_star().unwrap(), ch);
    }

    #[test]
    fn bch_realizes_the_group_product(x in tree_values(), y in tree_values()) {
        let (x, y) = (infinitesimal(&x), infinitesimal(&y));
        let z = x.bch(&y).unwrap();
        prop_assert!(z.is_infinitesimal());
        prop_assert_eq!(z.exp_star().unwrap(), x.exp_star().unwrap().convolve(&y.exp_star().unwrap()).unwrap());
    }

    #[test]
    fn inverses(a in tree_values(), b in tree_values()) {
        let (a, b) = (character(&a), character(&b));
        let unit = Functional::unit(&trunc());
        let ai = a.char_inverse().unwrap();
        prop_assert_eq!(a.convolve(&ai).unwrap(), unit.clone());
        prop_assert_eq!(&ai, &a.unit_inverse().unwrap());
        let ab_inv = a.convolve(&b).unwrap().char_inverse().unwrap();
        prop_assert_eq!(ab_inv, b.char_inverse().unwrap().convolve(&ai).unwrap());
    }

    #[test]
    fn character_inverse_is_precomposition_with_the_antipode(a in tree_values()) {
        let tr = trunc();
        let a = character(&a);
        let expect = Functional::from_fn(&tr, |f: &Forest| {
            tr.antipode_of(f).unwrap().iter().fold(BigRational::zero(), |acc, (g, c)| acc + a.at(g) * c)
        });
        prop_assert_eq!(a.char_inverse().unwrap(), expect);
    }

    #[test]
    fn convolution_is_bilinear_and_associative(
        x in prop::collection::vec(rational(), 5),
        y in prop::collection::vec(rational(), 5),
        z in prop::collection::vec(rational(), 5),
        s in rational(),
    ) {
        let (x, y, z) = (any_functional(&x), any_functional(&y), any_functional(&z));
        prop_assert_eq!(
            x.convolve(&y).unwrap().convolve(&z).unwrap(),
            x.convolve(&y.convolve(&z).unwrap()).unwrap()
        );
        prop_assert_eq!(
            x.add(&y.scale(&s)).unwrap().convolve(&z).unwrap(),
            x.convolve(&z).unwrap().add(&y.convolve(&z).unwrap().scale(&s)).unwrap()
        );
        let unit = Functional::unit(&trunc());
        prop_assert_eq!(x.convolve(&unit).unwrap(), x.clone());
    }

    #[test]
    fn dumps_round_trip(v in prop::collection::vec(rational(), 5), f in prop::collection::vec(-1e6f64..1e6, 5)) {
        let tr = trunc();
        let a = any_functional(&v);
        prop_assert_eq!(Functional::from_dump(&tr, &a.to_dump()).unwrap(), a);
        let b = Functional::<CkHopf, f64>::from_values(&tr, (0..tr.dim()).map(|i| f[i % f.len()]).collect());
        let text = serde_json::to_string(&b.to_dump()).unwrap();
        let back = Functional::<CkHopf, f64>::from_dump(&tr, &serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, b);
    }

    #[test]
    fn tree_canonical_form(parents in random_tree()) {
        let t = build_tree(&parents, false);
        prop_assert_eq!(build_tree(&parents, true), t.clone());
        prop_assert_eq!(RootedTree::parse(&t.to_string()), Some(t.clone()));
        prop_assert_eq!(t.order(), parents.len() + 1);
        prop_assert!(gen_trees(t.order()).contains(&t));
    }

    #[test]
    fn truncated_polynomial_inverse(c in prop::collection::vec(rational(), 3)) {
        let p = TruncPoly::<3>::from_slice(&c);
        match p.try_inverse() {
            Ok(q) => {
                prop_assert!(!c[0].is_zero());
                prop_assert_eq!(p * q, TruncPoly::<3>::one());
            }
            Err(_) => prop_assert!(c[0].is_zero()),
        }
    }

    #[test]
    fn banach_inequality_on_findim(
        which in 0usize..4,
        a in prop::collection::vec(rational(), 4),
        b in prop::collection::vec(rational(), 4),
    ) {
        let c = shipped::all()[which].clone();
        let (a, b) = (&a[..c.dim()], &b[..c.dim()]);
        let ab = convolve_findim(&c, a, b).unwrap();
        let lhs = k_norm(&c, &ab).unwrap();
        let rhs = k_norm(&c, a).unwrap() * k_norm(&c, b).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{} > {}", lhs, rhs);
    }

    #[test]
    fn degree_round_trip(n in -50i64..50, d in 1i64..12) {
        let deg = Degree::frac(n, d);
        prop_assert_eq!(Degree::parse(&deg.to_string()), Some(deg));
    }
}
