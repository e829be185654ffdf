//! Markov processes with boundaries and the gluing operations between them.
//!
//! A `MarkovProcess` is a finite state set X with an infinitesimal stochastic
//! generator H acting on ℝ^X (entry H[i][j] is the rate from state j to
//! state i). An `OpenMarkov` adds injections S → X ← T marking input and
//! output states. Open processes compose end to end by pushout of state
//! spaces, run in parallel by coproduct, and have identities with zero
//! generator; those three operations are the whole horizontal structure, and
//! everything here is exact.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlin::{direct_sum_matrix, RatMatrix, Rational};
use crate::finset::{
    compose_maps, copair, coproduct, induced_bijection, is_injective, pushout, FinMap, FinSet,
};

/// A finite-state continuous-time Markov process (X, H).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkovProcess {
    states: FinSet,
    h: RatMatrix,
}

/// True iff H is square with nonnegative off-diagonal entries and columns
/// summing to zero, exactly.
pub fn validate_infinitesimal_stochastic(h: &RatMatrix) -> Result<bool> {
    if h.rows() != h.cols() {
        return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let n = h.rows();
    for j in 0..n {
        let mut sum = Rational::zero();
        for i in 0..n {
            if i != j && h.get(i, j).is_negative() {
                return Ok(false);
            }
            sum += h.get(i, j);
        }
        if !sum.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

impl MarkovProcess {
    pub fn new(states: FinSet, h: RatMatrix) -> Result<Self> {
        if h.rows() != states.len() || h.cols() != states.len() {
            return Err(Error::DimensionMismatch(format!(
                "generator is {}x{} over {} states",
                h.rows(),
                h.cols(),
                states.len()
            )));
        }
        if !validate_infinitesimal_stochastic(&h)? {
            return Err(Error::NotInfinitesimalStochastic(format!("over states {states}")));
        }
        Ok(MarkovProcess { states, h })
    }

    /// Builds the generator from labeled edges `(from, to, rate)`.
    ///
    /// Off-diagonal H[i][j] is the sum of the rates of all edges j→i
    /// (parallel edges add, zero rates are dropped); diagonals are forced so
    /// each column sums to zero. Self-loops and negative rates are rejected.
    pub fn from_edges(states: FinSet, edges: &[(String, String, Rational)]) -> Result<Self> {
        let n = states.len();
        let mut h = RatMatrix::zeros(n, n);
        for (from, to, rate) in edges {
            let j = states
                .index_of(from)
                .ok_or_else(|| Error::Semantic(format!("unknown state {from:?} in edge")))?;
            let i = states
                .index_of(to)
                .ok_or_else(|| Error::Semantic(format!("unknown state {to:?} in edge")))?;
            if i == j {
                return Err(Error::Semantic(format!("self-loop on state {from:?}")));
            }
            if rate.is_negative() {
                return Err(Error::Semantic(format!(
                    "negative rate {} on edge {from:?} -> {to:?}",
                    rate
                )));
            }
            h.set(i, j, h.get(i, j) + rate);
        }
        for j in 0..n {
            let off: Rational = (0..n).filter(|&i| i != j).map(|i| h.get(i, j).clone()).sum();
            h.set(j, j, -off);
        }
        MarkovProcess::new(states, h)
    }

    pub fn states(&self) -> &FinSet {
        &self.states
    }

    pub fn h(&self) -> &RatMatrix {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// An open Markov process S →i (X, H) ←o T with injective legs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenMarkov {
    i: FinMap,
    o: FinMap,
    process: MarkovProcess,
}

impl OpenMarkov {
    pub fn new(i: FinMap, o: FinMap, process: MarkovProcess) -> Result<Self> {
        if i.cod() != process.states() || o.cod() != process.states() {
            return Err(Error::ShapeMismatch(format!(
                "legs land in {} and {}, process states are {}",
                i.cod(),
                o.cod(),
                process.states()
            )));
        }
        if !is_injective(&i) {
            return Err(Error::NonInjectiveLeg(format!("input leg {i}")));
        }
        if !is_injective(&o) {
            return Err(Error::NonInjectiveLeg(format!("output leg {o}")));
        }
        Ok(OpenMarkov { i, o, process })
    }

    pub fn inputs(&self) -> &FinSet {
        self.i.dom()
    }

    pub fn outputs(&self) -> &FinSet {
        self.o.dom()
    }

    pub fn i(&self) -> &FinMap {
        &self.i
    }

    pub fn o(&self) -> &FinMap {
        &self.o
    }

    pub fn process(&self) -> &MarkovProcess {
        &self.process
    }

    pub fn states(&self) -> &FinSet {
        self.process.states()
    }

    pub fn h(&self) -> &RatMatrix {
        self.process.h()
    }

    /// Renames the output boundary without touching anything else; the
    /// composition preconditions want literal label equality, so mismatched
    /// names are adapted explicitly rather than unified silently.
    pub fn rename_outputs(&self, new: FinSet) -> Result<OpenMarkov> {
        if new.len() != self.outputs().len() {
            return Err(Error::BoundaryMismatch(format!(
                "cannot rename {} outputs to {} labels",
                self.outputs().len(),
                new.len()
            )));
        }
        let o = FinMap::from_indices(new, self.states().clone(), self.o.table().to_vec());
        OpenMarkov::new(self.i.clone(), o, self.process.clone())
    }

    pub fn rename_inputs(&self, new: FinSet) -> Result<OpenMarkov> {
        if new.len() != self.inputs().len() {
            return Err(Error::BoundaryMismatch(format!(
                "cannot rename {} inputs to {} labels",
                self.inputs().len(),
                new.len()
            )));
        }
        let i = FinMap::from_indices(new, self.states().clone(), self.i.table().to_vec());
        OpenMarkov::new(i, self.o.clone(), self.process.clone())
    }
}

/// Matrix of f_*: ℝ^dom → ℝ^cod, with (f_*)[b][a] = 1 iff f(a) = b.
pub fn pushforward_matrix(f: &FinMap) -> RatMatrix {
    let mut m = RatMatrix::zeros(f.cod().len(), f.dom().len());
    for (a, &b) in f.table().iter().enumerate() {
        m.set(b, a, Rational::one());
    }
    m
}

/// Matrix of f^* (precomposition with f), the transpose of f_*.
pub fn pullback_matrix(f: &FinMap) -> RatMatrix {
    pushforward_matrix(f).transpose()
}

/// The identity open process S → (S, 0) ← S.
pub fn identity_open(s: &FinSet) -> OpenMarkov {
    let process = MarkovProcess::new(s.clone(), RatMatrix::zeros(s.len(), s.len()))
        .expect("zero generator is infinitesimal stochastic");
    OpenMarkov { i: FinMap::identity(s), o: FinMap::identity(s), process }
}

fn require_composable(m: &OpenMarkov, n: &OpenMarkov) -> Result<()> {
    if m.outputs() != n.inputs() {
        return Err(Error::BoundaryMismatch(format!(
            "outputs {} != inputs {}",
            m.outputs(),
            n.inputs()
        )));
    }
    Ok(())
}

/// Composite M ⊙ N: glue the shared boundary by pushout and push both
/// generators forward into the glued state space.
pub fn compose_open(m: &OpenMarkov, n: &OpenMarkov) -> Result<OpenMarkov> {
    require_composable(m, n)?;
    let po = pushout(m.o(), n.i())?;
    let j_push = pushforward_matrix(&po.left_leg);
    let k_push = pushforward_matrix(&po.right_leg);
    let h = j_push
        .mul(m.h())?
        .mul(&j_push.transpose())?
        .add(&k_push.mul(n.h())?.mul(&k_push.transpose())?)?;
    debug_assert!(validate_infinitesimal_stochastic(&h).unwrap());
    let process = MarkovProcess::new(po.apex.clone(), h)?;
    let i = compose_maps(&po.left_leg, m.i())?;
    let o = compose_maps(&po.right_leg, n.o())?;
    OpenMarkov::new(i, o, process)
}

/// Same composite computed through the copairing ℓ: X + Y → X +_T Y, as a
/// single conjugation ℓ_* (H ⊕ G) ℓ^*. Kept as an independent route so the
/// two can be cross-checked.
pub fn compose_open_alt(m: &OpenMarkov, n: &OpenMarkov) -> Result<OpenMarkov> {
    require_composable(m, n)?;
    let po = pushout(m.o(), n.i())?;
    let (xy, _, _) = coproduct(m.states(), n.states());
    let ell = copair(&xy, &po.left_leg, &po.right_leg)?;
    let ell_push = pushforward_matrix(&ell);
    let h = ell_push
        .mul(&direct_sum_matrix(m.h(), n.h()))?
        .mul(&ell_push.transpose())?;
    debug_assert!(validate_infinitesimal_stochastic(&h).unwrap());
    let process = MarkovProcess::new(po.apex.clone(), h)?;
    let i = compose_maps(&po.left_leg, m.i())?;
    let o = compose_maps(&po.right_leg, n.o())?;
    OpenMarkov::new(i, o, process)
}

/// Side-by-side composite M ⊗ N: coproduct of states, block-sum of
/// generators, coproduct of boundaries. Unit: the empty open process.
pub fn tensor_open(m: &OpenMarkov, n: &OpenMarkov) -> Result<OpenMarkov> {
    let (states, inl, inr) = coproduct(m.states(), n.states());
    let h = direct_sum_matrix(m.h(), n.h());
    let (inputs, _, _) = coproduct(m.inputs(), n.inputs());
    let (outputs, _, _) = coproduct(m.outputs(), n.outputs());
    let i = copair(&inputs, &compose_maps(&inl, m.i())?, &compose_maps(&inr, n.i())?)?;
    let o = copair(&outputs, &compose_maps(&inl, m.o())?, &compose_maps(&inr, n.o())?)?;
    OpenMarkov::new(i, o, MarkovProcess::new(states, h)?)
}

/// The canonical bijection
/// (X₁ +_{T₁} Y₁) + (X₂ +_{T₂} Y₂) → (X₁ + X₂) +_{T₁+T₂} (Y₁ + Y₂):
/// both sides quotient the same disjoint union X₁+X₂+Y₁+Y₂, so matching the
/// two quotient maps induces it.
pub fn chi_iso(
    m1: &OpenMarkov,
    n1: &OpenMarkov,
    m2: &OpenMarkov,
    n2: &OpenMarkov,
) -> Result<FinMap> {
    for (m, n) in [(m1, n1), (m2, n2)] {
        if m.outputs() != n.inputs() {
            return Err(Error::ShapeMismatch(format!(
                "outputs {} != inputs {}",
                m.outputs(),
                n.inputs()
            )));
        }
    }
    let (xc, xl, xr) = coproduct(m1.states(), m2.states());
    let (yc, yl, yr) = coproduct(n1.states(), n2.states());
    let (dom, _, _) = coproduct(&xc, &yc);

    let p1 = pushout(m1.o(), n1.i())?;
    let p2 = pushout(m2.o(), n2.i())?;
    let (_, kl, kr) = coproduct(&p1.apex, &p2.apex);
    let from_x = copair(&xc, &compose_maps(&kl, &p1.left_leg)?, &compose_maps(&kr, &p2.left_leg)?)?;
    let from_y =
        copair(&yc, &compose_maps(&kl, &p1.right_leg)?, &compose_maps(&kr, &p2.right_leg)?)?;
    let q_from = copair(&dom, &from_x, &from_y)?;

    let mt = tensor_open(m1, m2)?;
    let nt = tensor_open(n1, n2)?;
    let q = pushout(mt.o(), nt.i())?;
    let to_x = copair(&xc, &compose_maps(&q.left_leg, &xl)?, &compose_maps(&q.left_leg, &xr)?)?;
    let to_y = copair(&yc, &compose_maps(&q.right_leg, &yl)?, &compose_maps(&q.right_leg, &yr)?)?;
    let q_to = copair(&dom, &to_x, &to_y)?;

    induced_bijection(&q_from, &q_to)
}

/// The canonical bijection (X +_T Y) +_U Z → X +_T (Y +_U Z) relating the two
/// ways of composing three processes.
pub fn associator(m: &OpenMarkov, n: &OpenMarkov, p: &OpenMarkov) -> Result<FinMap> {
    require_composable(m, n)?;
    require_composable(n, p)?;
    let (xy, _, _) = coproduct(m.states(), n.states());
    let (dom, _, _) = coproduct(&xy, p.states());

    let po1 = pushout(m.o(), n.i())?;
    let mn = compose_open(m, n)?;
    let po2 = pushout(mn.o(), p.i())?;
    let from_xy = copair(
        &xy,
        &compose_maps(&po2.left_leg, &po1.left_leg)?,
        &compose_maps(&po2.left_leg, &po1.right_leg)?,
    )?;
    let q_from = copair(&dom, &from_xy, &po2.right_leg)?;

    let po3 = pushout(n.o(), p.i())?;
    let np = compose_open(n, p)?;
    let po4 = pushout(m.o(), np.i())?;
    let to_xy = copair(
        &xy,
        &po4.left_leg,
        &compose_maps(&po4.right_leg, &po3.left_leg)?,
    )?;
    let q_to = copair(&dom, &to_xy, &compose_maps(&po4.right_leg, &po3.right_leg)?)?;

    induced_bijection(&q_from, &q_to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::rat;

    fn fs(labels: &[&str]) -> FinSet {
        FinSet::from_strs(labels)
    }

    fn edges(list: &[(&str, &str, i64, i64)]) -> Vec<(String, String, Rational)> {
        list.iter()
            .map(|(f, t, n, d)| (f.to_string(), t.to_string(), rat(*n, *d)))
            .collect()
    }

    /// 4-state process: inputs s1↦a, s2↦b, output t1↦d.
    fn four_state() -> OpenMarkov {
        let x = fs(&["a", "b", "c", "d"]);
        let proc = MarkovProcess::from_edges(
            x.clone(),
            &edges(&[
                ("a", "c", 1, 2),
                ("b", "c", 2, 1),
                ("c", "b", 1, 1),
                ("c", "d", 4, 1),
                ("d", "c", 2, 1),
            ]),
        )
        .unwrap();
        let i = FinMap::from_pairs(fs(&["s1", "s2"]), x.clone(), &[("s1", "a"), ("s2", "b")])
            .unwrap();
        let o = FinMap::from_pairs(fs(&["t1"]), x, &[("t1", "d")]).unwrap();
        OpenMarkov::new(i, o, proc).unwrap()
    }

    /// 3-state process: input t1↦d, output u1↦f.
    fn three_state() -> OpenMarkov {
        let y = fs(&["d", "e", "f"]);
        let proc = MarkovProcess::from_edges(
            y.clone(),
            &edges(&[
                ("d", "e", 2, 1),
                ("d", "f", 12, 1),
                ("e", "d", 1, 1),
                ("f", "e", 1, 1),
            ]),
        )
        .unwrap();
        let i = FinMap::from_pairs(fs(&["t1"]), y.clone(), &[("t1", "d")]).unwrap();
        let o = FinMap::from_pairs(fs(&["u1"]), y, &[("u1", "f")]).unwrap();
        OpenMarkov::new(i, o, proc).unwrap()
    }

    #[test]
    fn validate_examples() {
        let h = RatMatrix::from_rows(vec![
            vec![rat(-1, 2), rat(0, 1), rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(-2, 1), rat(1, 1), rat(0, 1)],
            vec![rat(1, 2), rat(2, 1), rat(-5, 1), rat(2, 1)],
            vec![rat(0, 1), rat(0, 1), rat(4, 1), rat(-2, 1)],
        ]);
        assert!(validate_infinitesimal_stochastic(&h).unwrap());
        assert!(validate_infinitesimal_stochastic(&RatMatrix::zeros(3, 3)).unwrap());
        assert!(validate_infinitesimal_stochastic(&RatMatrix::from_i64(&[&[0, 1], &[0, -1]]))
            .unwrap());
        assert!(!validate_infinitesimal_stochastic(&RatMatrix::from_i64(&[&[1, 0], &[-1, 0]]))
            .unwrap());
        assert!(matches!(
            validate_infinitesimal_stochastic(&RatMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn edge_list_conversion_matches_displayed_matrix() {
        let h = four_state().h().clone();
        let expected = RatMatrix::from_rows(vec![
            vec![rat(-1, 2), rat(0, 1), rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(-2, 1), rat(1, 1), rat(0, 1)],
            vec![rat(1, 2), rat(2, 1), rat(-5, 1), rat(2, 1)],
            vec![rat(0, 1), rat(0, 1), rat(4, 1), rat(-2, 1)],
        ]);
        assert_eq!(h, expected);
    }

    #[test]
    fn edge_list_rejects_self_loops_and_negative_rates() {
        let x = fs(&["a", "b"]);
        assert!(matches!(
            MarkovProcess::from_edges(x.clone(), &edges(&[("a", "a", 1, 1)])),
            Err(Error::Semantic(_))
        ));
        assert!(matches!(
            MarkovProcess::from_edges(x.clone(), &edges(&[("a", "b", -1, 1)])),
            Err(Error::Semantic(_))
        ));
        // parallel edges add, zero rates vanish
        let p = MarkovProcess::from_edges(
            x,
            &edges(&[("a", "b", 1, 2), ("a", "b", 1, 2), ("b", "a", 0, 1)]),
        )
        .unwrap();
        assert_eq!(p.h(), &RatMatrix::from_i64(&[&[-1, 0], &[1, 0]]));
    }

    #[test]
    fn pushforward_pullback_matrices() {
        let s = fs(&["p", "q"]);
        let id = FinMap::identity(&s);
        assert_eq!(pushforward_matrix(&id), RatMatrix::identity(2));
        assert_eq!(pullback_matrix(&id), RatMatrix::identity(2));

        let x = fs(&["a", "b1", "b2", "c"]);
        let xp = fs(&["a", "b", "c"]);
        let p = FinMap::from_pairs(
            x,
            xp,
            &[("a", "a"), ("b1", "b"), ("b2", "b"), ("c", "c")],
        )
        .unwrap();
        assert_eq!(
            pushforward_matrix(&p),
            RatMatrix::from_i64(&[&[1, 0, 0, 0], &[0, 1, 1, 0], &[0, 0, 0, 1]])
        );
        assert_eq!(pullback_matrix(&p), pushforward_matrix(&p).transpose());

        let two = fs(&["1", "2"]);
        let f = FinMap::from_indices(two, fs(&["x"]), vec![0, 0]);
        assert_eq!(pushforward_matrix(&f), RatMatrix::from_i64(&[&[1, 1]]));
    }

    #[test]
    fn compose_with_identities() {
        let m = four_state();
        let right = compose_open(&m, &identity_open(m.outputs())).unwrap();
        assert_eq!(right, m);

        // left unit composes up to the canonical relabeling
        let u = identity_open(m.inputs());
        let left = compose_open(&u, &m).unwrap();
        assert_eq!(left.h().rows(), m.h().rows());
        let (su, _, _) = coproduct(u.states(), m.states());
        let po = pushout(u.o(), m.i()).unwrap();
        let q_from = copair(&su, &po.left_leg, &po.right_leg).unwrap();
        let q_to = copair(&su, m.i(), &FinMap::identity(m.states())).unwrap();
        let lambda = induced_bijection(&q_from, &q_to).unwrap();
        let l = pushforward_matrix(&lambda);
        assert_eq!(l.mul(left.h()).unwrap().mul(&l.transpose()).unwrap(), *m.h());
        assert_eq!(compose_maps(&lambda, left.i()).unwrap(), *m.i());
        assert_eq!(compose_maps(&lambda, left.o()).unwrap(), *m.o());
    }

    #[test]
    fn composite_is_union_of_edge_sets() {
        let glued = compose_open(&four_state(), &three_state()).unwrap();
        assert_eq!(glued.states(), &fs(&["a", "b", "c", "d", "e", "f"]));
        let expected = MarkovProcess::from_edges(
            fs(&["a", "b", "c", "d", "e", "f"]),
            &edges(&[
                ("a", "c", 1, 2),
                ("b", "c", 2, 1),
                ("c", "b", 1, 1),
                ("c", "d", 4, 1),
                ("d", "c", 2, 1),
                ("d", "e", 2, 1),
                ("d", "f", 12, 1),
                ("e", "d", 1, 1),
                ("f", "e", 1, 1),
            ]),
        )
        .unwrap();
        assert_eq!(glued.h(), expected.h());
        assert_eq!(glued.inputs(), &fs(&["s1", "s2"]));
        assert_eq!(glued.outputs(), &fs(&["u1"]));
        assert_eq!(glued.o().apply_label("u1"), Some("f"));
    }

    #[test]
    fn compose_over_empty_boundary_is_block_sum() {
        let m = four_state();
        let m_closed = OpenMarkov::new(
            m.i().clone(),
            FinMap::from_indices(FinSet::empty(), m.states().clone(), vec![]),
            m.process().clone(),
        )
        .unwrap();
        let n = three_state();
        let n_closed = OpenMarkov::new(
            FinMap::from_indices(FinSet::empty(), n.states().clone(), vec![]),
            n.o().clone(),
            n.process().clone(),
        )
        .unwrap();
        let composite = compose_open(&m_closed, &n_closed).unwrap();
        assert_eq!(composite.h(), &direct_sum_matrix(m.h(), n.h()));
        assert_eq!(composite.states().len(), 7);
    }

    #[test]
    fn alt_composition_agrees() {
        let m = four_state();
        let n = three_state();
        assert_eq!(compose_open(&m, &n).unwrap(), compose_open_alt(&m, &n).unwrap());

        let m_closed = OpenMarkov::new(
            m.i().clone(),
            FinMap::from_indices(FinSet::empty(), m.states().clone(), vec![]),
            m.process().clone(),
        )
        .unwrap();
        let n_closed = OpenMarkov::new(
            FinMap::from_indices(FinSet::empty(), n.states().clone(), vec![]),
            n.o().clone(),
            n.process().clone(),
        )
        .unwrap();
        assert_eq!(
            compose_open(&m_closed, &n_closed).unwrap(),
            compose_open_alt(&m_closed, &n_closed).unwrap()
        );
    }

    #[test]
    fn compose_requires_matching_boundaries() {
        let m = four_state();
        let n = three_state().rename_inputs(fs(&["w"])).unwrap();
        assert!(matches!(compose_open(&m, &n), Err(Error::BoundaryMismatch(_))));
        // the relabeling helper repairs it
        let n_fixed = n.rename_inputs(m.outputs().clone()).unwrap();
        assert!(compose_open(&m, &n_fixed).is_ok());
    }

    #[test]
    fn tensor_unit_and_side_by_side() {
        let m = four_state();
        let empty = identity_open(&FinSet::empty());
        assert_eq!(tensor_open(&m, &empty).unwrap(), m);
        assert_eq!(tensor_open(&empty, &m).unwrap(), m);

        let n = three_state().rename_inputs(fs(&["s3"])).unwrap();
        let t = tensor_open(&m, &n).unwrap();
        assert_eq!(t.states().len(), 7);
        assert_eq!(t.inputs(), &fs(&["s1", "s2", "s3"]));
        assert_eq!(t.outputs(), &fs(&["t1", "u1"]));
        assert_eq!(t.h(), &direct_sum_matrix(m.h(), n.h()));
        assert!(validate_infinitesimal_stochastic(t.h()).unwrap());
    }

    #[test]
    fn identity_open_shape() {
        let u = identity_open(&fs(&["s"]));
        assert_eq!(u.h(), &RatMatrix::zeros(1, 1));
        let nothing = identity_open(&FinSet::empty());
        assert_eq!(nothing.states().len(), 0);
    }

    #[test]
    fn chi_iso_on_empty_boundaries_is_coproduct_shuffle() {
        let closed = |labels: &[&str], e: &[(&str, &str, i64, i64)]| {
            let x = fs(labels);
            let proc = MarkovProcess::from_edges(x.clone(), &edges(e)).unwrap();
            OpenMarkov::new(
                FinMap::from_indices(FinSet::empty(), x.clone(), vec![]),
                FinMap::from_indices(FinSet::empty(), x, vec![]),
                proc,
            )
            .unwrap()
        };
        let m1 = closed(&["a"], &[]);
        let n1 = closed(&["b"], &[]);
        let m2 = closed(&["c"], &[]);
        let n2 = closed(&["d"], &[]);
        let chi = chi_iso(&m1, &n1, &m2, &n2).unwrap();
        // (a+b)+(c+d) → (a+c)+(b+d), elementwise by label
        assert_eq!(chi.dom(), &fs(&["a", "b", "c", "d"]));
        assert_eq!(chi.cod(), &fs(&["a", "c", "b", "d"]));
        for l in ["a", "b", "c", "d"] {
            assert_eq!(chi.apply_label(l), Some(l));
        }
    }

    #[test]
    fn chi_conjugation_identity_on_singleton_gluings() {
        let m1 = four_state();
        let n1 = three_state();
        let m2 = four_state().rename_outputs(fs(&["t9"])).unwrap();
        let n2 = three_state().rename_inputs(fs(&["t9"])).unwrap();
        let chi = chi_iso(&m1, &n1, &m2, &n2).unwrap();
        let chi_push = pushforward_matrix(&chi);

        let lhs = compose_open(&tensor_open(&m1, &m2).unwrap(), &tensor_open(&n1, &n2).unwrap())
            .unwrap();
        let rhs = direct_sum_matrix(
            compose_open(&m1, &n1).unwrap().h(),
            compose_open(&m2, &n2).unwrap().h(),
        );
        assert_eq!(lhs.h().mul(&chi_push).unwrap(), chi_push.mul(&rhs).unwrap());
    }

    #[test]
    fn associativity_up_to_transport() {
        let m = four_state();
        let n = three_state();
        let p = {
            let z = fs(&["f", "g"]);
            let proc = MarkovProcess::from_edges(z.clone(), &edges(&[("f", "g", 3, 1)])).unwrap();
            let i = FinMap::from_pairs(fs(&["u1"]), z.clone(), &[("u1", "f")]).unwrap();
            let o = FinMap::from_pairs(fs(&["v1"]), z, &[("v1", "g")]).unwrap();
            OpenMarkov::new(i, o, proc).unwrap()
        };
        let left = compose_open(&compose_open(&m, &n).unwrap(), &p).unwrap();
        let right = compose_open(&m, &compose_open(&n, &p).unwrap()).unwrap();
        let alpha = associator(&m, &n, &p).unwrap();
        let a = pushforward_matrix(&alpha);
        assert_eq!(a.mul(left.h()).unwrap().mul(&a.transpose()).unwrap(), *right.h());
        assert_eq!(compose_maps(&alpha, left.i()).unwrap(), *right.i());
        assert_eq!(compose_maps(&alpha, left.o()).unwrap(), *right.o());
    }
}
