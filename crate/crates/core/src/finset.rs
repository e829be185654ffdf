//! Named finite sets, total maps between them, coproducts, pushouts of
//! injective cospans, and pullback-square checking.
//!
//! Element order is load-bearing: it fixes the basis ordering of ℝ^X for
//! every matrix downstream, so `FinSet` equality is label-sequence equality,
//! not set equality. Pushout and coproduct apexes are labeled by a fixed
//! deterministic scheme so composite processes print identically across runs.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// An ordered finite set of distinct labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinSet {
    labels: Vec<String>,
}

impl FinSet {
    /// Panics on duplicate labels; external inputs are checked before this.
    pub fn new(labels: Vec<String>) -> Self {
        let mut seen = HashSet::new();
        for l in &labels {
            assert!(seen.insert(l.clone()), "duplicate label {l:?} in finite set");
        }
        FinSet { labels }
    }

    pub fn from_strs(labels: &[&str]) -> Self {
        Self::new(labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn empty() -> Self {
        FinSet { labels: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(","))
    }
}

/// A total map of finite sets, stored as indices into the codomain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinMap {
    dom: FinSet,
    cod: FinSet,
    table: Vec<usize>,
}

impl FinMap {
    /// Panics if the table length or an index is out of range.
    pub fn from_indices(dom: FinSet, cod: FinSet, table: Vec<usize>) -> Self {
        assert_eq!(table.len(), dom.len(), "table length != domain size");
        assert!(table.iter().all(|&i| i < cod.len()), "table index out of codomain");
        FinMap { dom, cod, table }
    }

    /// Builds from `dom label -> cod label` pairs; must be total.
    pub fn from_pairs(dom: FinSet, cod: FinSet, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut table = vec![None; dom.len()];
        for (from, to) in pairs {
            let d = dom
                .index_of(from)
                .ok_or_else(|| Error::Semantic(format!("unknown domain label {from:?}")))?;
            let c = cod
                .index_of(to)
                .ok_or_else(|| Error::Semantic(format!("unknown codomain label {to:?}")))?;
            if table[d].replace(c).is_some() {
                return Err(Error::Semantic(format!("label {from:?} mapped twice")));
            }
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| Error::Semantic(format!("label {:?} unmapped", dom.label(i)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(FinMap { dom, cod, table })
    }

    pub fn identity(s: &FinSet) -> Self {
        FinMap { dom: s.clone(), cod: s.clone(), table: (0..s.len()).collect() }
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn apply_idx(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn apply_label(&self, label: &str) -> Option<&str> {
        self.dom.index_of(label).map(|i| self.cod.label(self.table[i]))
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn image_indices(&self) -> HashSet<usize> {
        self.table.iter().copied().collect()
    }
}

impl fmt::Display for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, &t) in self.table.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}->{}", self.dom.label(i), self.cod.label(t))?;
        }
        write!(f, "]")
    }
}

/// g ∘ f. Requires f.cod and g.dom to be the same ordered set.
pub fn compose_maps(g: &FinMap, f: &FinMap) -> Result<FinMap> {
    if f.cod != g.dom {
        return Err(Error::CodMismatch(format!(
            "cod {} of inner map != dom {} of outer map",
            f.cod, g.dom
        )));
    }
    Ok(FinMap {
        dom: f.dom.clone(),
        cod: g.cod.clone(),
        table: f.table.iter().map(|&i| g.table[i]).collect(),
    })
}

pub fn is_injective(f: &FinMap) -> bool {
    let mut seen = HashSet::new();
    f.table.iter().all(|&i| seen.insert(i))
}

pub fn is_surjective(f: &FinMap) -> bool {
    f.image_indices().len() == f.cod.len()
}

fn fresh_label(base: &str, used: &HashSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let mut k = 2usize;
    loop {
        let candidate = format!("{base}#{k}");
        if !used.contains(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

/// Coproduct A + B. A's elements come first; colliding B labels pick up a
/// "#2", "#3", ... suffix. Returns (apex, inl, inr).
pub fn coproduct(a: &FinSet, b: &FinSet) -> (FinSet, FinMap, FinMap) {
    let mut used: HashSet<String> = a.labels.iter().cloned().collect();
    let mut labels = a.labels.clone();
    for l in &b.labels {
        let fresh = fresh_label(l, &used);
        used.insert(fresh.clone());
        labels.push(fresh);
    }
    let apex = FinSet { labels };
    let inl = FinMap { dom: a.clone(), cod: apex.clone(), table: (0..a.len()).collect() };
    let inr = FinMap {
        dom: b.clone(),
        cod: apex.clone(),
        table: (a.len()..a.len() + b.len()).collect(),
    };
    (apex, inl, inr)
}

/// [f, g]: A + B → Z for a coproduct apex whose elements are A's then B's.
pub fn copair(apex: &FinSet, f: &FinMap, g: &FinMap) -> Result<FinMap> {
    if f.cod != g.cod {
        return Err(Error::CodMismatch(format!("copair codomains {} vs {}", f.cod, g.cod)));
    }
    if apex.len() != f.dom.len() + g.dom.len() {
        return Err(Error::ShapeMismatch(format!(
            "copair domain {} does not split as {} + {}",
            apex.len(),
            f.dom.len(),
            g.dom.len()
        )));
    }
    let mut table = f.table.clone();
    table.extend_from_slice(&g.table);
    Ok(FinMap { dom: apex.clone(), cod: f.cod.clone(), table })
}

/// Pushout of a cospan X ←o— T —i′→ Y along its shared foot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutResult {
    pub apex: FinSet,
    /// X → apex
    pub left_leg: FinMap,
    /// Y → apex
    pub right_leg: FinMap,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // smaller index wins so class representatives are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Pushout X +_T Y of o: T→X, i′: T→Y, both injective.
///
/// Apex classes that contain an X element keep the least such X label (in
/// X's order) and come first, ordered by that least element; Y-only classes
/// follow in Y's order and keep their least Y label. Collisions are
/// suffix-disambiguated exactly like `coproduct`.
pub fn pushout(o: &FinMap, i_prime: &FinMap) -> Result<PushoutResult> {
    if o.dom != i_prime.dom {
        return Err(Error::FootMismatch(format!("{} vs {}", o.dom, i_prime.dom)));
    }
    if !is_injective(o) {
        return Err(Error::NonInjectiveLeg(format!("left leg {o}")));
    }
    if !is_injective(i_prime) {
        return Err(Error::NonInjectiveLeg(format!("right leg {i_prime}")));
    }
    let x = &o.cod;
    let y = &i_prime.cod;
    let nx = x.len();
    let mut uf = UnionFind::new(nx + y.len());
    for t in 0..o.dom.len() {
        uf.union(o.table[t], nx + i_prime.table[t]);
    }
    // roots in 0..nx are X classes in X order; the rest are Y-only classes
    let mut roots: Vec<usize> = Vec::new();
    for v in 0..nx + y.len() {
        if uf.find(v) == v {
            roots.push(v);
        }
    }
    let class_of = |uf: &mut UnionFind, v: usize, roots: &[usize]| {
        let r = uf.find(v);
        roots.iter().position(|&q| q == r).expect("root present")
    };
    let mut used = HashSet::new();
    let mut labels = Vec::with_capacity(roots.len());
    for &r in &roots {
        let base = if r < nx { x.label(r) } else { y.label(r - nx) };
        let fresh = fresh_label(base, &used);
        used.insert(fresh.clone());
        labels.push(fresh);
    }
    let apex = FinSet { labels };
    let left = FinMap {
        dom: x.clone(),
        cod: apex.clone(),
        table: (0..nx).map(|v| class_of(&mut uf, v, &roots)).collect(),
    };
    let right = FinMap {
        dom: y.clone(),
        cod: apex.clone(),
        table: (0..y.len()).map(|v| class_of(&mut uf, nx + v, &roots)).collect(),
    };
    debug_assert!(is_injective(&left) && is_injective(&right));
    Ok(PushoutResult { apex, left_leg: left, right_leg: right })
}

/// Decides whether the square
///
/// ```text
///        i
///    S ─────▶ X
///    │        │
///  f │        │ p
///    ▼        ▼
///    S′ ────▶ X′
///        i′
/// ```
///
/// commutes and is a pullback: every pair (s′, x) with i′(s′) = p(x) must be
/// hit by exactly one s ∈ S.
pub fn check_pullback_square(f: &FinMap, i: &FinMap, p: &FinMap, i_prime: &FinMap) -> Result<bool> {
    if i.dom != f.dom || i.cod != p.dom || f.cod != i_prime.dom || p.cod != i_prime.cod {
        return Err(Error::ShapeMismatch(format!(
            "square corners disagree: i: {}→{}, f: {}→{}, p: {}→{}, i′: {}→{}",
            i.dom, i.cod, f.dom, f.cod, p.dom, p.cod, i_prime.dom, i_prime.cod
        )));
    }
    for s in 0..f.dom.len() {
        if p.table[i.table[s]] != i_prime.table[f.table[s]] {
            return Ok(false);
        }
    }
    for s_prime in 0..i_prime.dom.len() {
        for x in 0..p.dom.len() {
            if i_prime.table[s_prime] == p.table[x] {
                let hits = (0..f.dom.len())
                    .filter(|&s| f.table[s] == s_prime && i.table[s] == x)
                    .count();
                if hits != 1 {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The bijection b with b ∘ q_from = q_to, for two surjections out of the
/// same set that identify exactly the same elements. This is how canonical
/// apex bijections (associators, unitors, and the tensor/composition
/// interchanger) are produced: both colimits are quotients of one disjoint
/// union, so matching quotient maps induce the iso.
pub fn induced_bijection(q_from: &FinMap, q_to: &FinMap) -> Result<FinMap> {
    if q_from.dom != q_to.dom {
        return Err(Error::ShapeMismatch(format!(
            "quotient maps have different domains: {} vs {}",
            q_from.dom, q_to.dom
        )));
    }
    if !is_surjective(q_from) || !is_surjective(q_to) {
        return Err(Error::NotSurjective("quotient map must be onto".into()));
    }
    let mut table = vec![None; q_from.cod.len()];
    for z in 0..q_from.dom.len() {
        let a = q_from.table[z];
        let b = q_to.table[z];
        if let Some(prev) = table[a].replace(b) {
            if prev != b {
                return Err(Error::ShapeMismatch(format!(
                    "maps identify different elements at {}",
                    q_from.dom.label(z)
                )));
            }
        }
    }
    let table: Vec<usize> = table.into_iter().map(|t| t.expect("onto")).collect();
    let candidate = FinMap { dom: q_from.cod.clone(), cod: q_to.cod.clone(), table };
    if !is_injective(&candidate) || !is_surjective(&candidate) {
        return Err(Error::ShapeMismatch("induced map is not a bijection".into()));
    }
    Ok(candidate)
}
