//! Linear relations over the rationals: composition, direct sums, and the
//! square-inclusion check. This side of the bridge is strict: composition is
//! associative on the nose and the direct-sum interchange map is the
//! identity, so everything is decided by canonical-subspace equality.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{apply, block_permutation, direct_sum_matrix, RatMatrix, Rational, Subspace};

/// A linear relation R ⊆ V ⊕ W, stored as a canonical subspace of the
/// concatenated coordinates (V block first, then W block).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinRel {
    src_dim: usize,
    tgt_dim: usize,
    graph: Subspace,
}

impl LinRel {
    pub fn new(src_dim: usize, tgt_dim: usize, graph: Subspace) -> Result<Self> {
        if graph.ambient_dim() != src_dim + tgt_dim {
            return Err(Error::DimensionMismatch(format!(
                "graph lives in dim {}, expected {} + {}",
                graph.ambient_dim(),
                src_dim,
                tgt_dim
            )));
        }
        Ok(LinRel { src_dim, tgt_dim, graph })
    }

    pub fn src_dim(&self) -> usize {
        self.src_dim
    }

    pub fn tgt_dim(&self) -> usize {
        self.tgt_dim
    }

    pub fn graph(&self) -> &Subspace {
        &self.graph
    }
}

/// The identity relation {(v, v)} on an n-dimensional space.
pub fn id_rel(n: usize) -> LinRel {
    let mut rows = RatMatrix::zeros(n, 2 * n);
    for i in 0..n {
        rows.set(i, i, Rational::one());
        rows.set(i, n + i, Rational::one());
    }
    LinRel { src_dim: n, tgt_dim: n, graph: Subspace::span(2 * n, &rows) }
}

/// The graph {(v, Mv)} of a linear map.
pub fn rel_from_matrix(m: &RatMatrix) -> LinRel {
    let (rows, cols) = (m.rows(), m.cols());
    let mut basis = RatMatrix::zeros(cols, cols + rows);
    for j in 0..cols {
        basis.set(j, j, Rational::one());
        for i in 0..rows {
            basis.set(j, cols + i, m.get(i, j).clone());
        }
    }
    LinRel { src_dim: cols, tgt_dim: rows, graph: Subspace::span(cols + rows, &basis) }
}

/// Relational composite {(v₁, v₃) : ∃v₂ related through both}: embed
/// R ⊕ (all of V₃) and (all of V₁) ⊕ S into V₁⊕V₂⊕V₃, intersect, and
/// project the middle block away.
pub fn compose_rel(r: &LinRel, s: &LinRel) -> Result<LinRel> {
    if r.tgt_dim != s.src_dim {
        return Err(Error::DimensionMismatch(format!(
            "composing {}→{} with {}→{}",
            r.src_dim, r.tgt_dim, s.src_dim, s.tgt_dim
        )));
    }
    let (n1, n2, n3) = (r.src_dim, r.tgt_dim, s.tgt_dim);
    let ambient = n1 + n2 + n3;

    let mut left = Vec::new();
    for i in 0..r.graph.dim() {
        let row = r.graph.basis().row(i);
        let mut v = vec![Rational::zero(); ambient];
        v[..n1 + n2].clone_from_slice(row);
        left.push(v);
    }
    for k in 0..n3 {
        let mut v = vec![Rational::zero(); ambient];
        v[n1 + n2 + k] = Rational::one();
        left.push(v);
    }

    let mut right = Vec::new();
    for i in 0..s.graph.dim() {
        let row = s.graph.basis().row(i);
        let mut v = vec![Rational::zero(); ambient];
        v[n1..].clone_from_slice(row);
        right.push(v);
    }
    for k in 0..n1 {
        let mut v = vec![Rational::zero(); ambient];
        v[k] = Rational::one();
        right.push(v);
    }

    let embed = |rows: Vec<Vec<Rational>>| {
        if rows.is_empty() {
            Subspace::zero(ambient)
        } else {
            Subspace::span(ambient, &RatMatrix::from_rows(rows))
        }
    };
    let meet = embed(left).intersect(&embed(right))?;

    let mut proj = RatMatrix::zeros(n1 + n3, ambient);
    for k in 0..n1 {
        proj.set(k, k, Rational::one());
    }
    for k in 0..n3 {
        proj.set(n1 + k, n1 + n2 + k, Rational::one());
    }
    Ok(LinRel { src_dim: n1, tgt_dim: n3, graph: apply(&proj, &meet)? })
}

/// The permutation matrix sending concatenated-graph coordinates
/// (V₁, W₁, V₂, W₂) to the direct-sum convention (V₁, V₂, W₁, W₂). Every
/// reordering between the two conventions goes through here.
pub fn tuple_shuffle(v1: usize, w1: usize, v2: usize, w2: usize) -> RatMatrix {
    block_permutation(&[v1, w1, v2, w2], &[0, 2, 1, 3])
}

/// R₁ ⊕ R₂ = {(v₁, v₂, w₁, w₂) : (v₁, w₁) ∈ R₁, (v₂, w₂) ∈ R₂}.
pub fn direct_sum_rel(r1: &LinRel, r2: &LinRel) -> LinRel {
    let stacked = direct_sum_matrix(r1.graph.basis(), r2.graph.basis());
    let shuffle = tuple_shuffle(r1.src_dim, r1.tgt_dim, r2.src_dim, r2.tgt_dim);
    let ambient = r1.src_dim + r1.tgt_dim + r2.src_dim + r2.tgt_dim;
    let graph = apply(&shuffle, &Subspace::span(ambient, &stacked))
        .expect("shuffle is square of the right size");
    LinRel { src_dim: r1.src_dim + r2.src_dim, tgt_dim: r1.tgt_dim + r2.tgt_dim, graph }
}

/// (f ⊕ g) R ⊆ S, the 2-morphism condition between linear relations.
pub fn check_square(f: &RatMatrix, g: &RatMatrix, r: &LinRel, s: &LinRel) -> Result<bool> {
    if f.cols() != r.src_dim || g.cols() != r.tgt_dim {
        return Err(Error::DimensionMismatch(format!(
            "f: {}×{}, g: {}×{} against source relation {}→{}",
            f.rows(),
            f.cols(),
            g.rows(),
            g.cols(),
            r.src_dim,
            r.tgt_dim
        )));
    }
    if f.rows() != s.src_dim || g.rows() != s.tgt_dim {
        return Err(Error::DimensionMismatch(format!(
            "f: {}×{}, g: {}×{} against target relation {}→{}",
            f.rows(),
            f.cols(),
            g.rows(),
            g.cols(),
            s.src_dim,
            s.tgt_dim
        )));
    }
    let mapped = apply(&direct_sum_matrix(f, g), &r.graph)?;
    s.graph.contains(&mapped)
}
