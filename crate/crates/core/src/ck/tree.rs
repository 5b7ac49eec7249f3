use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

/// A rooted tree in canonical form: children are kept sorted, so two trees
/// are isomorphic iff they are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootedTree {
    order: usize,
    children: Vec<RootedTree>,
}

impl RootedTree {
    /// The single-node tree `•`.
    pub fn leaf() -> Self {
        RootedTree {
            order: 1,
            children: Vec::new(),
        }
    }

    /// Grafts `children` onto a new root.
    pub fn from_children(mut children: Vec<RootedTree>) -> Self {
        children.sort();
        RootedTree {
            order: 1 + children.iter().map(|c| c.order).sum::<usize>(),
            children,
        }
    }

    /// The chain with `n` nodes.
    pub fn chain(n: usize) -> Self {
        assert!(n >= 1);
        (1..n).fold(Self::leaf(), |t, _| Self::from_children(vec![t]))
    }

    /// Root with `n` leaves attached.
    pub fn bushy(n: usize) -> Self {
        Self::from_children(vec![Self::leaf(); n])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn children(&self) -> &[RootedTree] {
        &self.children
    }

    /// Parses a parenthesis string such as `[[],[]]`.
    pub fn parse(s: &str) -> Option<Self> {
        let bytes: Vec<u8> = s.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let (t, rest) = parse_tree(&bytes)?;
        rest.is_empty().then_some(t)
    }

    /// Every tree obtained by attaching one new leaf to some node.
    pub fn graftings(&self) -> Vec<RootedTree> {
        let mut out = Vec::new();
        let mut with_leaf = self.children.clone();
        with_leaf.push(Self::leaf());
        out.push(Self::from_children(with_leaf));
        for i in 0..self.children.len() {
            if i > 0 && self.children[i] == self.children[i - 1] {
                continue;
            }
            for g in self.children[i].graftings() {
                let mut ch = self.children.clone();
                ch[i] = g;
                out.push(Self::from_children(ch));
            }
        }
        out
    }

    /// Tree factorial: `γ(•) = 1`, `γ(τ) = |τ| Π γ(children)`.
    pub fn factorial(&self) -> BigInt {
        self.children
            .iter()
            .fold(BigInt::from(self.order), |acc, c| acc * c.factorial())
    }

    /// Symmetry coefficient: size of the automorphism group.
    pub fn symmetry(&self) -> BigInt {
        let mut s = BigInt::one();
        let mut i = 0;
        while i < self.children.len() {
            let mut j = i;
            while j < self.children.len() && self.children[j] == self.children[i] {
                j += 1;
            }
            let m = j - i;
            let sym = self.children[i].symmetry();
            for k in 1..=m {
                s *= k;
                s *= &sym;
            }
            i = j;
        }
        s
    }
}

fn parse_tree(s: &[u8]) -> Option<(RootedTree, &[u8])> {
    let mut rest = s.strip_prefix(b"[")?;
    let mut children = Vec::new();
    loop {
        if let Some(r) = rest.strip_prefix(b"]") {
            return Some((RootedTree::from_children(children), r));
        }
        if !children.is_empty() {
            rest = rest.strip_prefix(b",")?;
        }
        let (c, r) = parse_tree(rest)?;
        children.push(c);
        rest = r;
    }
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A commutative monomial of trees. The empty forest is the unit of `H_CK`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Forest(Vec<RootedTree>);

impl Forest {
    pub fn empty() -> Self {
        Forest(Vec::new())
    }

    pub fn new(mut trees: Vec<RootedTree>) -> Self {
        trees.sort();
        Forest(trees)
    }

    pub fn single(t: RootedTree) -> Self {
        Forest(vec![t])
    }

    pub fn trees(&self) -> &[RootedTree] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_tree(&self) -> Option<&RootedTree> {
        match self.0.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(RootedTree::order).sum()
    }

    /// Multiset union.
    pub fn mul(&self, other: &Forest) -> Forest {
        let mut t = self.0.clone();
        t.extend(other.0.iter().cloned());
        Forest::new(t)
    }

    /// Parses `1` (the empty forest) or a concatenation of tree strings.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "1" {
            return Some(Forest::empty());
        }
        let bytes: Vec<u8> = s.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        let mut rest = bytes.as_slice();
        let mut trees = Vec::new();
        while !rest.is_empty() {
            let (t, r) = parse_tree(rest)?;
            trees.push(t);
            rest = r;
        }
        (!trees.is_empty()).then(|| Forest::new(trees))
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for t in &self.0 {
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// All trees with exactly `n` nodes, grown by grafting leaves onto the trees
/// with `n - 1` nodes and deduplicating canonical forms. Sorted.
pub fn trees_of_order(n: usize) -> Vec<RootedTree> {
    let mut level: BTreeSet<RootedTree> = BTreeSet::new();
    if n == 0 {
        return Vec::new();
    }
    level.insert(RootedTree::leaf());
    for _ in 1..n {
        level = level.iter().flat_map(RootedTree::graftings).collect();
    }
    level.into_iter().collect()
}

/// All trees with `1..=max_order` nodes, ordered by `(order, canonical form)`.
pub fn gen_trees(max_order: usize) -> Vec<RootedTree> {
    let mut out = Vec::new();
    let mut level: BTreeSet<RootedTree> = BTreeSet::new();
    for n in 1..=max_order {
        level = if n == 1 {
            std::iter::once(RootedTree::leaf()).collect()
        } else {
            level.iter().flat_map(RootedTree::graftings).collect()
        };
        out.extend(level.iter().cloned());
    }
    out
}

/// All forests with total degree `n`, given the trees of order `<= n` in sorted order.
pub fn forests_of_degree(n: usize, trees: &[RootedTree]) -> Vec<Forest> {
    fn rec(
        remaining: usize,
        start: usize,
        trees: &[RootedTree],
        cur: &mut Vec<RootedTree>,
        out: &mut Vec<Forest>,
    ) {
        if remaining == 0 {
            out.push(Forest::new(cur.clone()));
            return;
        }
        for i in start..trees.len() {
            let o = trees[i].order();
            if o > remaining {
                continue;
            }
            cur.push(trees[i].clone());
            rec(remaining - o, i, trees, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 0, trees, &mut Vec::new(), &mut out);
    out.sort();
    out
}
