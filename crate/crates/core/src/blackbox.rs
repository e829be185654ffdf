//! Black-boxing: the steady-state boundary relation of an open process.
//!
//! Steady states of (X, H) driven by inflows I at the inputs and outflows O
//! at the outputs solve Hv + i_*I − o_*O = 0. Reading off the boundary data
//! Π(v, I, O) = (i^*v, I, o^*v, O) turns the solution space into a linear
//! relation from ℝ^S ⊕ ℝ^S to ℝ^T ⊕ ℝ^T, forgetting everything internal.
//! That assignment is functorial for gluing and tensoring, and coarse
//! grainings become square inclusions; this module computes the relation and
//! decides each of those compatibilities exactly. No sign constraints are
//! imposed: the relation is the full solution subspace, and nonequilibrium
//! steady states are simply its points with nonzero flow.

use num::One;

use crate::coarse::{validate_morphism, OpenMarkovMorphism};
use crate::error::{Error, Result};
use crate::exactlin::{apply, block_permutation, direct_sum_matrix, kernel, RatMatrix, Rational};
use crate::finset::FinMap;
use crate::linrel::{check_square, compose_rel, direct_sum_rel, LinRel};
use crate::markov::{compose_open, pullback_matrix, pushforward_matrix, tensor_open, OpenMarkov};

/// The boundary relation of M: all (input probabilities, inflows, output
/// probabilities, outflows) realized by steady states. Computed kernel-first
/// on [H | i_* | −o_*], then projected to the boundary.
pub fn black_box(m: &OpenMarkov) -> LinRel {
    let i_push = pushforward_matrix(m.i());
    let o_push = pushforward_matrix(m.o());
    let system = m
        .h()
        .hcat(&i_push)
        .and_then(|b| b.hcat(&o_push.scale(&-Rational::one())))
        .expect("block rows all have |X| entries");
    let steady = kernel(&system);

    let (nx, ns, nt) = (m.states().len(), m.inputs().len(), m.outputs().len());
    let i_pull = pullback_matrix(m.i());
    let o_pull = pullback_matrix(m.o());
    let mut readout = RatMatrix::zeros(2 * ns + 2 * nt, nx + ns + nt);
    for s in 0..ns {
        for x in 0..nx {
            readout.set(s, x, i_pull.get(s, x).clone());
        }
        readout.set(ns + s, nx + s, Rational::one());
    }
    for t in 0..nt {
        for x in 0..nx {
            readout.set(2 * ns + t, x, o_pull.get(t, x).clone());
        }
        readout.set(2 * ns + nt + t, nx + ns + t, Rational::one());
    }
    let graph = apply(&readout, &steady).expect("readout matches kernel ambient");
    LinRel::new(2 * ns, 2 * nt, graph).expect("dimensions add up by construction")
}

/// What black-boxing does to a boundary map: f_* ⊕ f_*.
pub fn black_box_map(f: &FinMap) -> RatMatrix {
    let push = pushforward_matrix(f);
    direct_sum_matrix(&push, &push)
}

/// Black-boxing turns gluing into relation composition; the two sides are
/// computed along fully independent paths (6-state kernel vs. intersection
/// of two smaller relations), so their equality is a real check.
pub fn check_functoriality(m: &OpenMarkov, n: &OpenMarkov) -> Result<bool> {
    let composite = compose_open(m, n)?;
    let glued = black_box(&composite);
    let chained = compose_rel(&black_box(m), &black_box(n))?;
    Ok(glued == chained)
}

/// Black-boxing sends a morphism of open processes to a containment of
/// relations: (■f ⊕ ■g) ■(source) ⊆ ■(target).
pub fn check_blackbox_2morphism(m: &OpenMarkovMorphism) -> Result<bool> {
    if !validate_morphism(m)? {
        return Err(Error::InvalidMorphism(
            "black-boxing a 2-morphism requires a valid morphism".into(),
        ));
    }
    check_square(
        &black_box_map(m.f()),
        &black_box_map(m.g()),
        &black_box(m.source()),
        &black_box(m.target()),
    )
}

/// The permutation aligning the boundary coordinates of ■(M ⊗ N), which come
/// blocked as (pin₁,pin₂,I₁,I₂,pout₁,pout₂,O₁,O₂), with the direct-sum
/// convention (pin₁,I₁,pin₂,I₂,pout₁,O₁,pout₂,O₂).
pub fn tensor_boundary_shuffle(s1: usize, s2: usize, t1: usize, t2: usize) -> RatMatrix {
    block_permutation(&[s1, s2, s1, s2, t1, t2, t1, t2], &[0, 2, 1, 3, 4, 6, 5, 7])
}

/// Black-boxing turns tensoring into direct sum, up to the fixed boundary
/// shuffle above.
pub fn check_tensor_preservation(m: &OpenMarkov, n: &OpenMarkov) -> Result<bool> {
    let tensored = black_box(&tensor_open(m, n)?);
    let summed = direct_sum_rel(&black_box(m), &black_box(n));
    let shuffle = tensor_boundary_shuffle(
        m.inputs().len(),
        n.inputs().len(),
        m.outputs().len(),
        n.outputs().len(),
    );
    let aligned = apply(&shuffle, tensored.graph())?;
    Ok(aligned == *summed.graph())
}

/// Every point of the relation balances total inflow against total outflow:
/// generator columns sum to zero, so summing the steady-state equation over
/// all states leaves ΣI = ΣO.
pub fn conserves_flow(m: &OpenMarkov) -> bool {
    let rel = black_box(m);
    let (ns, nt) = (m.inputs().len(), m.outputs().len());
    let basis = rel.graph().basis();
    (0..basis.rows()).all(|r| {
        let row = basis.row(r);
        let inflow: Rational = row[ns..2 * ns].iter().cloned().sum();
        let outflow: Rational = row[2 * ns + nt..].iter().cloned().sum();
        inflow == outflow
    })
}
