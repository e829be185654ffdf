//! Coarse-graining: stochastic sections, lumpability, and morphisms between
//! open Markov processes with their vertical and horizontal composition.
//!
//! A surjection p: X → X′ induces a smaller process H′ = p_* H s for any
//! stochastic section s of p. When H is lumpable over p (the columns of p_*H
//! agree within each fiber), H′ is independent of the section and intertwines
//! exactly: p_* H = H′ p_*. Morphisms carry that intertwining plus pullback
//! conditions on both boundaries; they stack vertically and glue horizontally,
//! and the two ways around a 2×2 grid agree.

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exactlin::{RatMatrix, Rational};
use crate::finset::{check_pullback_square, compose_maps, is_surjective, pushout, FinMap};
use crate::markov::{pushforward_matrix, validate_infinitesimal_stochastic, OpenMarkov};

/// A stochastic section s of a surjection p: each column of s is a
/// probability distribution supported on the corresponding fiber of p,
/// so p_* s = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticSection {
    p: FinMap,
    s: RatMatrix,
}

impl StochasticSection {
    pub fn new(p: FinMap, s: RatMatrix) -> Result<Self> {
        if !is_surjective(&p) {
            return Err(Error::NotSurjective(format!("{p}")));
        }
        let n = p.dom().len();
        let m = p.cod().len();
        if (s.rows(), s.cols()) != (n, m) {
            return Err(Error::DimensionMismatch(format!(
                "section is {}x{}, expected {}x{}",
                s.rows(),
                s.cols(),
                n,
                m
            )));
        }
        for col in 0..m {
            let mut sum = Rational::zero();
            for row in 0..n {
                let v = s.get(row, col);
                if v.is_negative() {
                    return Err(Error::NotSection(format!("negative mass at ({row},{col})")));
                }
                if p.apply_idx(row) != col && !v.is_zero() {
                    return Err(Error::NotSection(format!(
                        "mass off the fiber at ({row},{col})"
                    )));
                }
                sum += v;
            }
            if !sum.is_one() {
                return Err(Error::NotSection(format!("column {col} sums to {sum}")));
            }
        }
        debug_assert_eq!(
            pushforward_matrix(&p).mul(&s).unwrap(),
            RatMatrix::identity(m)
        );
        Ok(StochasticSection { p, s })
    }

    pub fn p(&self) -> &FinMap {
        &self.p
    }

    pub fn s(&self) -> &RatMatrix {
        &self.s
    }
}

/// The section spreading mass evenly over each fiber.
pub fn uniform_section(p: &FinMap) -> Result<StochasticSection> {
    if !is_surjective(p) {
        return Err(Error::NotSurjective(format!("{p}")));
    }
    let n = p.dom().len();
    let m = p.cod().len();
    let mut fiber_size = vec![0i64; m];
    for x in 0..n {
        fiber_size[p.apply_idx(x)] += 1;
    }
    let mut s = RatMatrix::zeros(n, m);
    for x in 0..n {
        let col = p.apply_idx(x);
        s.set(x, col, Rational::new(1.into(), fiber_size[col].into()));
    }
    StochasticSection::new(p.clone(), s)
}

/// A seeded random section: weights are drawn as small integers and
/// normalized per fiber, keeping every denominator at or below 64 for
/// fibers of up to eight states. Bit-identical for equal seeds.
pub fn random_section(p: &FinMap, seed: u64) -> Result<StochasticSection> {
    if !is_surjective(p) {
        return Err(Error::NotSurjective(format!("{p}")));
    }
    let n = p.dom().len();
    let m = p.cod().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = RatMatrix::zeros(n, m);
    for col in 0..m {
        let fiber: Vec<usize> = (0..n).filter(|&x| p.apply_idx(x) == col).collect();
        let hi = (64 / fiber.len() as i64).max(1).min(8);
        let weights: Vec<i64> = fiber.iter().map(|_| rng.gen_range(1..=hi)).collect();
        let total: i64 = weights.iter().sum();
        for (x, w) in fiber.iter().zip(&weights) {
            s.set(*x, col, Rational::new((*w).into(), total.into()));
        }
    }
    StochasticSection::new(p.clone(), s)
}

/// H′ = p_* H s.
pub fn coarse_grain(h: &RatMatrix, sec: &StochasticSection) -> Result<RatMatrix> {
    let n = sec.p.dom().len();
    if (h.rows(), h.cols()) != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "generator is {}x{} over {} states",
            h.rows(),
            h.cols(),
            n
        )));
    }
    let coarse = pushforward_matrix(&sec.p).mul(h)?.mul(&sec.s)?;
    debug_assert!(validate_infinitesimal_stochastic(&coarse).unwrap());
    Ok(coarse)
}

/// True iff the columns of p_*H agree within every fiber of p; this is the
/// exact criterion, with section sampling relegated to cross-checks.
pub fn is_lumpable(h: &RatMatrix, p: &FinMap) -> Result<bool> {
    if !is_surjective(p) {
        return Err(Error::NotSurjective(format!("{p}")));
    }
    let n = p.dom().len();
    if (h.rows(), h.cols()) != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "generator is {}x{} over {} states",
            h.rows(),
            h.cols(),
            n
        )));
    }
    let ph = pushforward_matrix(p).mul(h)?;
    for fiber in 0..p.cod().len() {
        let mut first: Option<usize> = None;
        for j in 0..n {
            if p.apply_idx(j) != fiber {
                continue;
            }
            match first {
                None => first = Some(j),
                Some(j0) => {
                    if (0..ph.rows()).any(|r| ph.get(r, j) != ph.get(r, j0)) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// The unique H′ with p_* H = H′ p_*, column i taken as p_*He_j for any j
/// in the fiber over i.
pub fn lumped_generator(h: &RatMatrix, p: &FinMap) -> Result<RatMatrix> {
    if !is_lumpable(h, p)? {
        return Err(Error::NotLumpable(format!("over {p}")));
    }
    let ph = pushforward_matrix(p).mul(h)?;
    let m = p.cod().len();
    let mut coarse = RatMatrix::zeros(m, m);
    for i in 0..m {
        let j = (0..p.dom().len())
            .find(|&j| p.apply_idx(j) == i)
            .expect("p is surjective");
        for r in 0..m {
            coarse.set(r, i, ph.get(r, j).clone());
        }
    }
    debug_assert_eq!(coarse.mul(&pushforward_matrix(p)).unwrap(), ph);
    Ok(coarse)
}

/// A morphism of open Markov processes: maps on inputs, states, and outputs
/// making both boundary squares pullbacks and intertwining the generators.
///
/// Construction checks only arities; `validate_morphism` decides the real
/// conditions, so invalid candidates can be built and rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenMarkovMorphism {
    source: OpenMarkov,
    target: OpenMarkov,
    f: FinMap,
    p: FinMap,
    g: FinMap,
}

impl OpenMarkovMorphism {
    pub fn new(
        source: OpenMarkov,
        target: OpenMarkov,
        f: FinMap,
        p: FinMap,
        g: FinMap,
    ) -> Result<Self> {
        if f.dom() != source.inputs() || f.cod() != target.inputs() {
            return Err(Error::ShapeMismatch(format!(
                "f: {} → {} does not match inputs {} → {}",
                f.dom(),
                f.cod(),
                source.inputs(),
                target.inputs()
            )));
        }
        if p.dom() != source.states() || p.cod() != target.states() {
            return Err(Error::ShapeMismatch(format!(
                "p: {} → {} does not match states {} → {}",
                p.dom(),
                p.cod(),
                source.states(),
                target.states()
            )));
        }
        if g.dom() != source.outputs() || g.cod() != target.outputs() {
            return Err(Error::ShapeMismatch(format!(
                "g: {} → {} does not match outputs {} → {}",
                g.dom(),
                g.cod(),
                source.outputs(),
                target.outputs()
            )));
        }
        Ok(OpenMarkovMorphism { source, target, f, p, g })
    }

    pub fn identity(m: &OpenMarkov) -> Self {
        OpenMarkovMorphism {
            source: m.clone(),
            target: m.clone(),
            f: FinMap::identity(m.inputs()),
            p: FinMap::identity(m.states()),
            g: FinMap::identity(m.outputs()),
        }
    }

    pub fn source(&self) -> &OpenMarkov {
        &self.source
    }

    pub fn target(&self) -> &OpenMarkov {
        &self.target
    }

    pub fn f(&self) -> &FinMap {
        &self.f
    }

    pub fn p(&self) -> &FinMap {
        &self.p
    }

    pub fn g(&self) -> &FinMap {
        &self.g
    }
}

/// Both boundary squares are pullbacks and p_* H = H′ p_* exactly.
/// Surjectivity of p is not required.
pub fn validate_morphism(m: &OpenMarkovMorphism) -> Result<bool> {
    let input_square = check_pullback_square(&m.f, m.source.i(), &m.p, m.target.i())?;
    let output_square = check_pullback_square(&m.g, m.source.o(), &m.p, m.target.o())?;
    if !input_square || !output_square {
        return Ok(false);
    }
    let push = pushforward_matrix(&m.p);
    Ok(push.mul(m.source.h())? == m.target.h().mul(&push)?)
}

/// Vertical composite m₂ ∘ m₁, defined when m₁'s target is literally m₂'s
/// source. The composite of valid morphisms validates (pasting); an invalid
/// ingredient surfaces as InvalidMorphism.
pub fn vcompose(m2: &OpenMarkovMorphism, m1: &OpenMarkovMorphism) -> Result<OpenMarkovMorphism> {
    if m1.target != m2.source {
        return Err(Error::ShapeMismatch(
            "vertical composition needs m1.target = m2.source".into(),
        ));
    }
    let composite = OpenMarkovMorphism::new(
        m1.source.clone(),
        m2.target.clone(),
        compose_maps(&m2.f, &m1.f)?,
        compose_maps(&m2.p, &m1.p)?,
        compose_maps(&m2.g, &m1.g)?,
    )?;
    if validate_morphism(m1)? && validate_morphism(m2)? && !validate_morphism(&composite)? {
        return Err(Error::InvalidMorphism("pasting failed to validate".into()));
    }
    Ok(composite)
}

/// The map p +_g q between pushout apexes, sending the class of x to the
/// class of p(x) and the class of y to the class of q(y). Ill-definedness
/// (possible only for invalid inputs) is an error, not a wrong answer.
pub fn middle_map(ml: &OpenMarkovMorphism, mr: &OpenMarkovMorphism) -> Result<FinMap> {
    let po_src = pushout(ml.source.o(), mr.source.i())?;
    let po_tgt = pushout(ml.target.o(), mr.target.i())?;
    let mut table = vec![None; po_src.apex.len()];
    let mut put = |from: usize, to: usize| -> Result<()> {
        if let Some(prev) = table[from].replace(to) {
            if prev != to {
                return Err(Error::InvalidMorphism(
                    "p +_g q is not well-defined on the glued states".into(),
                ));
            }
        }
        Ok(())
    };
    for x in 0..ml.source.states().len() {
        put(
            po_src.left_leg.apply_idx(x),
            po_tgt.left_leg.apply_idx(ml.p.apply_idx(x)),
        )?;
    }
    for y in 0..mr.source.states().len() {
        put(
            po_src.right_leg.apply_idx(y),
            po_tgt.right_leg.apply_idx(mr.p.apply_idx(y)),
        )?;
    }
    let table: Vec<usize> = table
        .into_iter()
        .map(|t| t.expect("pushout legs are jointly surjective"))
        .collect();
    Ok(FinMap::from_indices(po_src.apex.clone(), po_tgt.apex.clone(), table))
}

/// Horizontal composite of 2-morphisms along a shared boundary morphism:
/// sources compose, targets compose, and the state map is p +_g q.
pub fn hcompose(ml: &OpenMarkovMorphism, mr: &OpenMarkovMorphism) -> Result<OpenMarkovMorphism> {
    if ml.source.outputs() != mr.source.inputs() || ml.target.outputs() != mr.target.inputs() {
        return Err(Error::ShapeMismatch(
            "horizontal composition needs composable sources and targets".into(),
        ));
    }
    if ml.g != mr.f {
        return Err(Error::SharedBoundaryMismatch(format!("{} vs {}", ml.g, mr.f)));
    }
    let source = crate::markov::compose_open(&ml.source, &mr.source)?;
    let target = crate::markov::compose_open(&ml.target, &mr.target)?;
    let p = middle_map(ml, mr)?;
    let composite =
        OpenMarkovMorphism::new(source, target, ml.f.clone(), p, mr.g.clone())?;
    if validate_morphism(ml)? && validate_morphism(mr)? && !validate_morphism(&composite)? {
        return Err(Error::InvalidMorphism(
            "horizontal composite failed to validate".into(),
        ));
    }
    Ok(composite)
}

/// Fixtures for the merge cell used by tests here and in neighboring modules.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use crate::exactlin::rat;
    use crate::finset::FinSet;
    use crate::markov::MarkovProcess;

    pub(crate) fn fs(labels: &[&str]) -> FinSet {
        FinSet::from_strs(labels)
    }

    pub(crate) fn merge_map() -> FinMap {
        FinMap::from_pairs(
            fs(&["a", "b1", "b2", "c"]),
            fs(&["a", "b", "c"]),
            &[("a", "a"), ("b1", "b"), ("b2", "b"), ("c", "c")],
        )
        .unwrap()
    }

    pub(crate) fn fine_h() -> RatMatrix {
        RatMatrix::from_i64(&[
            &[-15, 0, 0, 0],
            &[8, -10, 0, 0],
            &[7, 4, -6, 0],
            &[0, 6, 6, 0],
        ])
    }

    pub(crate) fn coarse_h() -> RatMatrix {
        RatMatrix::from_i64(&[&[-15, 0, 0], &[15, -6, 0], &[0, 6, 0]])
    }

    pub(crate) fn lopsided_section() -> StochasticSection {
        let s = RatMatrix::from_rows(vec![
            vec![rat(1, 1), rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 3), rat(0, 1)],
            vec![rat(0, 1), rat(2, 3), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        ]);
        StochasticSection::new(merge_map(), s).unwrap()
    }

    /// Merge cell: 4-state source, 3-state target, both open with input at a
    /// and output at c, p collapsing the middle pair.
    pub(crate) fn merge_morphism() -> OpenMarkovMorphism {
        let x = fs(&["a", "b1", "b2", "c"]);
        let xp = fs(&["a", "b", "c"]);
        let source = OpenMarkov::new(
            FinMap::from_pairs(fs(&["s"]), x.clone(), &[("s", "a")]).unwrap(),
            FinMap::from_pairs(fs(&["t"]), x.clone(), &[("t", "c")]).unwrap(),
            MarkovProcess::new(x, fine_h()).unwrap(),
        )
        .unwrap();
        let target = OpenMarkov::new(
            FinMap::from_pairs(fs(&["s"]), xp.clone(), &[("s", "a")]).unwrap(),
            FinMap::from_pairs(fs(&["t"]), xp.clone(), &[("t", "c")]).unwrap(),
            MarkovProcess::new(xp, coarse_h()).unwrap(),
        )
        .unwrap();
        OpenMarkovMorphism::new(
            source.clone(),
            target,
            FinMap::identity(source.inputs()),
            merge_map(),
            FinMap::identity(source.outputs()),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::*;
    use super::*;
    use crate::exactlin::rat;
    use crate::finset::FinSet;
    use crate::markov::MarkovProcess;

    #[test]
    fn uniform_sections() {
        let id = FinMap::identity(&fs(&["a", "b"]));
        assert_eq!(uniform_section(&id).unwrap().s(), &RatMatrix::identity(2));

        let sec = uniform_section(&merge_map()).unwrap();
        assert_eq!(sec.s().get(1, 1), &rat(1, 2));
        assert_eq!(sec.s().get(2, 1), &rat(1, 2));
        assert_eq!(sec.s().get(0, 1), &rat(0, 1));

        let collapse = FinMap::from_indices(fs(&["1", "2", "3"]), fs(&["x"]), vec![0, 0, 0]);
        let sec = uniform_section(&collapse).unwrap();
        for i in 0..3 {
            assert_eq!(sec.s().get(i, 0), &rat(1, 3));
        }

        let not_onto = FinMap::from_indices(fs(&["1"]), fs(&["x", "y"]), vec![0]);
        assert!(matches!(uniform_section(&not_onto), Err(Error::NotSurjective(_))));
    }

    #[test]
    fn random_sections_are_seeded_and_fiber_supported() {
        let id = FinMap::identity(&fs(&["a", "b", "c"]));
        assert_eq!(random_section(&id, 7).unwrap().s(), &RatMatrix::identity(3));

        let p = merge_map();
        let s1 = random_section(&p, 42).unwrap();
        let s2 = random_section(&p, 42).unwrap();
        assert_eq!(s1, s2);
        let different: Vec<_> = (0..10).map(|seed| random_section(&p, seed).unwrap()).collect();
        assert!(different.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn lopsided_section_validates_and_rejections_fire() {
        let _ = lopsided_section();

        let p = merge_map();
        let mut off_fiber = uniform_section(&p).unwrap().s().clone();
        off_fiber.set(0, 1, rat(1, 2));
        off_fiber.set(1, 1, rat(1, 4));
        off_fiber.set(2, 1, rat(1, 4));
        assert!(matches!(
            StochasticSection::new(p.clone(), off_fiber),
            Err(Error::NotSection(_))
        ));

        let mut short = uniform_section(&p).unwrap().s().clone();
        short.set(1, 1, rat(1, 4));
        assert!(matches!(StochasticSection::new(p, short), Err(Error::NotSection(_))));
    }

    #[test]
    fn coarse_grain_matches_displayed_generator() {
        assert_eq!(coarse_grain(&fine_h(), &lopsided_section()).unwrap(), coarse_h());
        // lumpable, so the uniform section gives the same answer
        let uniform = uniform_section(&merge_map()).unwrap();
        assert_eq!(coarse_grain(&fine_h(), &uniform).unwrap(), coarse_h());

        let id = FinMap::identity(&fs(&["a", "b", "c", "d"]));
        let sec = uniform_section(&id).unwrap();
        assert_eq!(coarse_grain(&fine_h(), &sec).unwrap(), fine_h());
    }

    #[test]
    fn lumpability_criterion() {
        let p = merge_map();
        assert!(is_lumpable(&fine_h(), &p).unwrap());
        let ph = pushforward_matrix(&p).mul(&fine_h()).unwrap();
        assert_eq!(
            ph,
            RatMatrix::from_i64(&[&[-15, 0, 0, 0], &[15, -6, -6, 0], &[0, 6, 6, 0]])
        );

        let id = FinMap::identity(&fs(&["a", "b1", "b2", "c"]));
        assert!(is_lumpable(&fine_h(), &id).unwrap());

        // dropping the b1→c rate to 3 makes the b1 and b2 columns of p_*H differ
        let broken = MarkovProcess::from_edges(
            fs(&["a", "b1", "b2", "c"]),
            &[
                ("a".into(), "b1".into(), rat(8, 1)),
                ("a".into(), "b2".into(), rat(7, 1)),
                ("b1".into(), "b2".into(), rat(4, 1)),
                ("b1".into(), "c".into(), rat(3, 1)),
                ("b2".into(), "c".into(), rat(6, 1)),
            ],
        )
        .unwrap();
        assert!(!is_lumpable(broken.h(), &p).unwrap());

        let not_onto = FinMap::from_indices(fs(&["x"]), fs(&["u", "v"]), vec![0]);
        assert!(matches!(
            is_lumpable(&RatMatrix::zeros(1, 1), &not_onto),
            Err(Error::NotSurjective(_))
        ));
    }

    #[test]
    fn lumped_generator_is_section_independent() {
        let p = merge_map();
        let lumped = lumped_generator(&fine_h(), &p).unwrap();
        assert_eq!(lumped, coarse_h());
        for seed in 0..10 {
            let sec = random_section(&p, seed).unwrap();
            assert_eq!(coarse_grain(&fine_h(), &sec).unwrap(), lumped);
        }

        let id = FinMap::identity(&fs(&["a", "b1", "b2", "c"]));
        assert_eq!(lumped_generator(&fine_h(), &id).unwrap(), fine_h());

        let broken = {
            let mut h = fine_h();
            h.set(3, 1, rat(3, 1));
            h.set(1, 1, rat(-7, 1));
            h
        };
        assert!(matches!(lumped_generator(&broken, &p), Err(Error::NotLumpable(_))));
    }

    #[test]
    fn morphism_validation() {
        let m = merge_morphism();
        assert!(validate_morphism(&OpenMarkovMorphism::identity(&m.source)).unwrap());
        assert!(validate_morphism(&m).unwrap());

        // perturbing one target edge rate (a→b from 15 to 14) keeps the
        // target a Markov process but breaks the intertwining
        let perturbed_target = OpenMarkov::new(
            m.target.i().clone(),
            m.target.o().clone(),
            MarkovProcess::new(
                m.target.states().clone(),
                RatMatrix::from_i64(&[&[-14, 0, 0], &[14, -6, 0], &[0, 6, 0]]),
            )
            .unwrap(),
        )
        .unwrap();
        let bad = OpenMarkovMorphism::new(
            m.source.clone(),
            perturbed_target,
            m.f.clone(),
            m.p.clone(),
            m.g.clone(),
        )
        .unwrap();
        assert!(!validate_morphism(&bad).unwrap());
    }

    #[test]
    fn morphism_shape_mismatch() {
        let m = merge_morphism();
        let err = OpenMarkovMorphism::new(
            m.source.clone(),
            m.target.clone(),
            FinMap::identity(&fs(&["wrong"])),
            m.p.clone(),
            m.g.clone(),
        );
        assert!(matches!(err, Err(Error::ShapeMismatch(_))));
    }

    /// Stacked merges 4 → 3 → 2: the chain a→b→c collapses onto a→m with
    /// b, c lumped. Inputs at a throughout; outputs also at a to exercise
    /// overlapping input/output ranges.
    fn stacked_pair() -> (OpenMarkovMorphism, OpenMarkovMorphism) {
        let boundary = |x: &FinSet| {
            (
                FinMap::from_pairs(fs(&["s"]), x.clone(), &[("s", "a")]).unwrap(),
                FinMap::from_pairs(fs(&["t"]), x.clone(), &[("t", "a")]).unwrap(),
            )
        };
        let x = fs(&["a", "b1", "b2", "c"]);
        let (i0, o0) = boundary(&x);
        let top = OpenMarkov::new(i0, o0, MarkovProcess::new(x, fine_h()).unwrap()).unwrap();

        let xp = fs(&["a", "b", "c"]);
        let (i1, o1) = boundary(&xp);
        let mid = OpenMarkov::new(i1, o1, MarkovProcess::new(xp, coarse_h()).unwrap()).unwrap();

        let xs = fs(&["a", "m"]);
        let (i2, o2) = boundary(&xs);
        let bottom = OpenMarkov::new(
            i2,
            o2,
            MarkovProcess::new(xs, RatMatrix::from_i64(&[&[-15, 0], &[15, 0]])).unwrap(),
        )
        .unwrap();

        let m1 = OpenMarkovMorphism::new(
            top.clone(),
            mid.clone(),
            FinMap::identity(top.inputs()),
            merge_map(),
            FinMap::identity(top.outputs()),
        )
        .unwrap();
        let p2 = FinMap::from_pairs(
            fs(&["a", "b", "c"]),
            fs(&["a", "m"]),
            &[("a", "a"), ("b", "m"), ("c", "m")],
        )
        .unwrap();
        let m2 = OpenMarkovMorphism::new(
            mid,
            bottom,
            FinMap::identity(&fs(&["s"])),
            p2,
            FinMap::identity(&fs(&["t"])),
        )
        .unwrap();
        (m1, m2)
    }

    #[test]
    fn vertical_composition() {
        let m = merge_morphism();
        let id_src = OpenMarkovMorphism::identity(&m.source);
        let id_tgt = OpenMarkovMorphism::identity(&m.target);
        assert_eq!(vcompose(&m, &id_src).unwrap(), m);
        assert_eq!(vcompose(&id_tgt, &m).unwrap(), m);

        let (m1, m2) = stacked_pair();
        assert!(validate_morphism(&m1).unwrap());
        assert!(validate_morphism(&m2).unwrap());
        let stacked = vcompose(&m2, &m1).unwrap();
        assert!(validate_morphism(&stacked).unwrap());
        assert_eq!(stacked.p.apply_label("b1"), Some("m"));
        assert_eq!(stacked.p.apply_label("b2"), Some("m"));
        assert_eq!(stacked.p.apply_label("c"), Some("m"));
        assert_eq!(stacked.p.apply_label("a"), Some("a"));

        let mismatched = vcompose(&m2, &merge_morphism());
        assert!(matches!(mismatched, Err(Error::ShapeMismatch(_))));
    }

    /// Two composable merge morphisms sharing the boundary {t}↦c.
    fn gluable_merges() -> (OpenMarkovMorphism, OpenMarkovMorphism) {
        let left = merge_morphism();

        let y = fs(&["c", "d1", "d2"]);
        let yp = fs(&["c", "d"]);
        let src = OpenMarkov::new(
            FinMap::from_pairs(fs(&["t"]), y.clone(), &[("t", "c")]).unwrap(),
            FinMap::from_pairs(fs(&["u"]), y.clone(), &[("u", "c")]).unwrap(),
            MarkovProcess::from_edges(
                y.clone(),
                &[
                    ("c".into(), "d1".into(), rat(1, 1)),
                    ("c".into(), "d2".into(), rat(1, 1)),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let tgt = OpenMarkov::new(
            FinMap::from_pairs(fs(&["t"]), yp.clone(), &[("t", "c")]).unwrap(),
            FinMap::from_pairs(fs(&["u"]), yp.clone(), &[("u", "c")]).unwrap(),
            MarkovProcess::from_edges(
                yp.clone(),
                &[("c".into(), "d".into(), rat(2, 1))],
            )
            .unwrap(),
        )
        .unwrap();
        let q = FinMap::from_pairs(y, yp, &[("c", "c"), ("d1", "d"), ("d2", "d")]).unwrap();
        let right = OpenMarkovMorphism::new(
            src.clone(),
            tgt,
            FinMap::identity(src.inputs()),
            q,
            FinMap::identity(src.outputs()),
        )
        .unwrap();
        (left, right)
    }

    #[test]
    fn horizontal_composition() {
        let m = merge_morphism();
        let n = {
            // a second merge cell whose input boundary is m's output
            let (_, right) = gluable_merges();
            right
        };
        assert!(validate_morphism(&n).unwrap());
        let glued = hcompose(&m, &n).unwrap();
        assert!(validate_morphism(&glued).unwrap());
        assert_eq!(glued.source.states().len(), 6);
        assert_eq!(glued.target.states().len(), 4);
        for (from, to) in [("a", "a"), ("b1", "b"), ("b2", "b"), ("c", "c"), ("d1", "d"), ("d2", "d")]
        {
            assert_eq!(glued.p.apply_label(from), Some(to));
        }

        // identities compose to the identity on the composite
        let idl = OpenMarkovMorphism::identity(&m.source);
        let (_, right) = gluable_merges();
        let idr = OpenMarkovMorphism::identity(&right.source);
        let idc = hcompose(&idl, &idr).unwrap();
        let composite = crate::markov::compose_open(&m.source, &right.source).unwrap();
        assert_eq!(idc, OpenMarkovMorphism::identity(&composite));
    }

    #[test]
    fn horizontal_composition_requires_shared_boundary_map() {
        let (left, right) = gluable_merges();
        // break the shared map: swap in a renamed source boundary for the right cell
        let renamed_src = right.source.rename_inputs(fs(&["w"])).unwrap();
        let renamed_tgt = right.target.rename_inputs(fs(&["w"])).unwrap();
        let bad = OpenMarkovMorphism::new(
            renamed_src.clone(),
            renamed_tgt,
            FinMap::identity(&fs(&["w"])),
            right.p.clone(),
            right.g.clone(),
        )
        .unwrap();
        assert!(matches!(hcompose(&left, &bad), Err(Error::ShapeMismatch(_))));
    }
}
