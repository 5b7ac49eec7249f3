use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::tree::{forests_of_degree, trees_of_order, Forest, RootedTree};
use crate::hopf::{Degree, HopfAlgebra, LinComb, TensorSum, Truncation};

/// The Connes–Kreimer Hopf algebra: the free commutative algebra on rooted
/// trees, graded by node count, with
/// `Δ(τ) = τ⊗1 + Σ_σ (τ∖σ)⊗σ` over root-containing connected subtrees `σ`
/// (including `σ = τ`); `τ∖σ` is the forest of pieces cut away.
///
/// Trees, forests and tree coproducts are enumerated lazily and cached; all
/// caches are filled idempotently, so concurrent readers are fine.
#[derive(Default)]
pub struct CkHopf {
    trees: RwLock<Vec<Arc<Vec<RootedTree>>>>,
    forests: RwLock<HashMap<usize, Arc<Vec<Forest>>>>,
    tree_coproducts: RwLock<HashMap<RootedTree, Arc<TensorSum<Forest>>>>,
}

impl CkHopf {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    /// Trees with exactly `n` nodes, sorted.
    pub fn trees_of_order(&self, n: usize) -> Arc<Vec<RootedTree>> {
        if let Some(t) = self.trees.read().unwrap().get(n) {
            return t.clone();
        }
        let mut cache = self.trees.write().unwrap();
        while cache.len() <= n {
            let k = cache.len();
            let level = if k <= 1 {
                trees_of_order(k)
            } else {
                let mut next: Vec<RootedTree> = cache[k - 1].iter().flat_map(RootedTree::graftings).collect();
                next.sort();
                next.dedup();
                next
            };
            cache.push(Arc::new(level));
        }
        cache[n].clone()
    }

    /// Trees with `1..=max_order` nodes in `(order, canonical)` order.
    pub fn trees_up_to(&self, max_order: usize) -> Vec<RootedTree> {
        (1..=max_order).flat_map(|n| self.trees_of_order(n).to_vec()).collect()
    }

    pub fn forests_of_degree(&self, n: usize) -> Arc<Vec<Forest>> {
        if let Some(f) = self.forests.read().unwrap().get(&n) {
            return f.clone();
        }
        let trees = self.trees_up_to(n);
        let f = Arc::new(forests_of_degree(n, &trees));
        self.forests.write().unwrap().entry(n).or_insert(f).clone()
    }

    /// Pairs `(τ∖σ, σ)` for every root-containing connected subtree `σ` of `t`,
    /// with multiplicity.
    pub fn admissible_cuts(t: &RootedTree) -> Vec<(Vec<RootedTree>, RootedTree)> {
        let mut partial: Vec<(Vec<RootedTree>, Vec<RootedTree>)> = vec![(Vec::new(), Vec::new())];
        for child in t.children() {
            let sub = Self::admissible_cuts(child);
            let mut next = Vec::with_capacity(partial.len() * (sub.len() + 1));
            for (pruned, kept) in &partial {
                // remove the whole child
                let mut p = pruned.clone();
                p.push(child.clone());
                next.push((p, kept.clone()));
                for (sp, st) in &sub {
                    let mut p = pruned.clone();
                    p.extend(sp.iter().cloned());
                    let mut k = kept.clone();
                    k.push(st.clone());
                    next.push((p, k));
                }
            }
            partial = next;
        }
        partial
            .into_iter()
            .map(|(p, k)| (p, RootedTree::from_children(k)))
            .collect()
    }

    pub fn tree_coproduct(&self, t: &RootedTree) -> Arc<TensorSum<Forest>> {
        if let Some(c) = self.tree_coproducts.read().unwrap().get(t) {
            return c.clone();
        }
        let mut d = TensorSum::zero();
        d.add_term((Forest::single(t.clone()), Forest::empty()), BigRational::one());
        for (pruned, trunk) in Self::admissible_cuts(t) {
            d.add_term((Forest::new(pruned), Forest::single(trunk)), BigRational::one());
        }
        let d = Arc::new(d);
        self.tree_coproducts
            .write()
            .unwrap()
            .entry(t.clone())
            .or_insert(d)
            .clone()
    }
}

/// `(a⊗b)(c⊗d) = ac⊗bd` extended bilinearly.
pub fn tensor_mul(x: &TensorSum<Forest>, y: &TensorSum<Forest>) -> TensorSum<Forest> {
    let mut out = TensorSum::zero();
    for ((a, b), cx) in x.iter() {
        for ((c, d), cy) in y.iter() {
            out.add_term((a.mul(c), b.mul(d)), cx * cy);
        }
    }
    out
}

impl HopfAlgebra for CkHopf {
    type Elem = Forest;

    fn name(&self) -> String {
        "ck".into()
    }

    fn degree(&self, e: &Forest) -> Degree {
        Degree::int(e.degree() as i64)
    }

    fn degrees_up_to(&self, cutoff: Degree) -> Vec<Degree> {
        let top = cutoff.0.floor().to_integer();
        (0..=top.max(-1)).map(Degree::int).collect()
    }

    fn basis_of_degree(&self, d: Degree) -> Vec<Forest> {
        if !d.0.is_integer() || d < Degree::ZERO {
            return Vec::new();
        }
        self.forests_of_degree(d.0.to_integer() as usize).to_vec()
    }

    fn is_connected(&self) -> bool {
        true
    }

    fn unit(&self) -> LinComb<Forest> {
        LinComb::basis(Forest::empty())
    }

    fn counit(&self, e: &Forest) -> BigRational {
        if e.is_empty() {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    }

    fn product(&self, a: &Forest, b: &Forest) -> Option<LinComb<Forest>> {
        Some(LinComb::basis(a.mul(b)))
    }

    fn coproduct(&self, e: &Forest) -> TensorSum<Forest> {
        let mut acc = TensorSum::basis((Forest::empty(), Forest::empty()));
        for t in e.trees() {
            acc = tensor_mul(&acc, &self.tree_coproduct(t));
        }
        acc
    }

    fn elem_id(&self, e: &Forest) -> String {
        e.to_string()
    }

    fn parse_elem(&self, id: &str) -> Option<Forest> {
        Forest::parse(id)
    }
}

/// Convenience: the CK instance truncated at integer degree `cutoff`.
pub fn ck_truncation(cutoff: usize) -> Arc<Truncation<CkHopf>> {
    Truncation::new(CkHopf::new(), Degree::int(cutoff as i64)).expect("CK coproduct stays in the truncation")
}
