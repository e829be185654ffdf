//! The acceptance gate: eleven numbered criteria, each a test that prints
//! one pass or fail line with its measured runtime. Exact claims use
//! rational equality; numeric claims use the tolerances from the dynamics
//! module.

use std::time::{Duration, Instant};

use open_markov::blackbox::{
    black_box, check_blackbox_2morphism, check_functoriality, check_tensor_preservation,
};
use open_markov::cli::{parse_process, to_open_markov};
use open_markov::coarse::{
    coarse_grain, hcompose, is_lumpable, random_section, vcompose, StochasticSection,
};
use open_markov::dynamics::{
    boundary_tuple, coarse_grain_commutes_numeric, distance_to_subspace, expm, integrate_master,
    steady_residual, FlowSpec, COLSUM_TOL, ENTRY_TOL, ODE_TOL, SEMIGROUP_TOL,
};
use open_markov::exactlin::{direct_sum_matrix, rat, RatMatrix};
use open_markov::finset::{FinMap, FinSet};
use open_markov::laws::{
    gen_composable_pair, gen_infinitesimal_stochastic, gen_lumpable_lift, gen_morphism_grid,
    gen_open_markov, gen_pullback_square, puncture_square,
};
use open_markov::markov::{
    chi_iso, compose_open, pullback_matrix, pushforward_matrix, tensor_open, MarkovProcess,
    OpenMarkov,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pump() -> OpenMarkov {
    to_open_markov(
        &parse_process(
            "process pump {\n  states: a, b, c, d;\n  edges:\n    a -> c @ 1/2;\n    b -> c @ 2;\n    c -> b @ 1;\n    c -> d @ 4;\n    d -> c @ 2;\n  inputs: s1 -> a, s2 -> b;\n  outputs: t1 -> d;\n}",
        )
        .unwrap(),
    )
    .unwrap()
}

fn relay() -> OpenMarkov {
    to_open_markov(
        &parse_process(
            "process relay {\n  states: d, e, f;\n  edges:\n    d -> e @ 2;\n    d -> f @ 12;\n    e -> d @ 1;\n    f -> e @ 1;\n  inputs: t1 -> d;\n  outputs: u1 -> f;\n}",
        )
        .unwrap(),
    )
    .unwrap()
}

fn fine_text() -> &'static str {
    "process fine {\n  states: a, b1, b2, c;\n  edges:\n    a -> b1 @ 8;\n    a -> b2 @ 7;\n    b1 -> b2 @ 4;\n    b1 -> c @ 6;\n    b2 -> c @ 6;\n  inputs: s1 -> a;\n  outputs: t1 -> c;\n}"
}

fn fine() -> OpenMarkov {
    to_open_markov(&parse_process(fine_text()).unwrap()).unwrap()
}

fn merge_p(m: &OpenMarkov) -> FinMap {
    FinMap::from_pairs(
        m.states().clone(),
        FinSet::from_strs(&["a", "b", "c"]),
        &[("a", "a"), ("b1", "b"), ("b2", "b"), ("c", "c")],
    )
    .unwrap()
}

fn ints(rows: &[&[i64]]) -> RatMatrix {
    RatMatrix::from_rows(
        rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect(),
    )
}

fn stamp(n: usize, pass: bool, what: &str, start: Instant) -> bool {
    let verdict = if pass { "pass" } else { "FAIL" };
    println!("criterion {n:02} {verdict}  {what}  ({:.1?})", start.elapsed());
    pass
}

#[test]
fn criterion_01_merge_cell_exact() {
    let m = fine();
    let p = merge_p(&m);
    let section = RatMatrix::from_rows(vec![
        vec![rat(1, 1), rat(0, 1), rat(0, 1)],
        vec![rat(0, 1), rat(1, 3), rat(0, 1)],
        vec![rat(0, 1), rat(2, 3), rat(0, 1)],
        vec![rat(0, 1), rat(0, 1), rat(1, 1)],
    ]);
    let sec = StochasticSection::new(p.clone(), section).unwrap();

    let start = Instant::now();
    let coarse = coarse_grain(m.h(), &sec).unwrap();
    let pushed = pushforward_matrix(&p).mul(m.h()).unwrap();
    let pass = coarse == ints(&[&[-15, 0, 0], &[15, -6, 0], &[0, 6, 0]])
        && pushed == ints(&[&[-15, 0, 0, 0], &[15, -6, -6, 0], &[0, 6, 6, 0]]);
    let fast = start.elapsed() < Duration::from_millis(1);

    assert!(stamp(1, pass && fast, "merge cell coarse-grains to the exact matrices", start));
}

#[test]
fn criterion_02_lumpability_trichotomy() {
    let start = Instant::now();
    let good = fine();
    let broken =
        to_open_markov(&parse_process(&fine_text().replace("b1 -> c @ 6", "b1 -> c @ 3")).unwrap())
            .unwrap();
    let p = merge_p(&good);
    let lumped = ints(&[&[-15, 0, 0], &[15, -6, 0], &[0, 6, 0]]);

    let mut pass = is_lumpable(good.h(), &p).unwrap();
    pass &= !is_lumpable(broken.h(), &p).unwrap();

    for seed in 0..10u64 {
        let sec = random_section(&p, seed).unwrap();
        pass &= coarse_grain(good.h(), &sec).unwrap() == lumped;
    }

    let mut grains: Vec<RatMatrix> = Vec::new();
    for seed in 0..10u64 {
        let sec = random_section(&p, seed).unwrap();
        let g = coarse_grain(broken.h(), &sec).unwrap();
        if !grains.contains(&g) {
            grains.push(g);
        }
    }
    pass &= grains.len() >= 2;
    pass &= start.elapsed() < Duration::from_millis(100);

    assert!(stamp(2, pass, "lumpability holds, breaks, and sections expose the break", start));
}

#[test]
fn criterion_03_blackbox_functoriality() {
    let start = Instant::now();
    let rng = &mut ChaCha8Rng::seed_from_u64(31);
    let mut good = 0;
    for _ in 0..100 {
        let (m, n) = gen_composable_pair(rng, 5, 2, 8);
        if check_functoriality(&m, &n).unwrap() {
            good += 1;
        }
    }
    let pass = good == 100 && start.elapsed() < Duration::from_secs(10);
    assert!(stamp(3, pass, &format!("black-boxing composes, {good}/100"), start));
}

#[test]
fn criterion_04_tensor_preservation() {
    let start = Instant::now();
    let rng = &mut ChaCha8Rng::seed_from_u64(41);
    let mut good = 0;
    for _ in 0..100 {
        let (m, n) = gen_composable_pair(rng, 5, 2, 8);
        if check_tensor_preservation(&m, &n).unwrap() {
            good += 1;
        }
    }
    assert!(stamp(4, good == 100, &format!("black-boxing sums, {good}/100"), start));
}

#[test]
fn criterion_05_two_morphism_preservation() {
    let start = Instant::now();
    let rng = &mut ChaCha8Rng::seed_from_u64(51);
    let mut good = 0;
    for _ in 0..100 {
        let target = gen_open_markov(rng, ("w", "s", "t"), 4, 2, 8);
        let morphism = gen_lumpable_lift(rng, &target, 3, 8);
        if check_blackbox_2morphism(&morphism).unwrap() {
            good += 1;
        }
    }
    assert!(stamp(5, good == 100, &format!("morphisms land inside the relation, {good}/100"), start));
}

#[test]
fn criterion_06_pullback_square_operators() {
    let start = Instant::now();
    let rng = &mut ChaCha8Rng::seed_from_u64(61);
    let mut commuted = 0;
    for _ in 0..200 {
        let (f, g, h, k) = gen_pullback_square(rng, 6);
        let lhs = pushforward_matrix(&g).mul(&pullback_matrix(&f)).unwrap();
        let rhs = pullback_matrix(&k).mul(&pushforward_matrix(&h)).unwrap();
        if lhs == rhs {
            commuted += 1;
        }
    }
    let mut counterexamples = 0;
    for _ in 0..20 {
        let (f, g, h, k) = gen_pullback_square(rng, 6);
        let rhs = pullback_matrix(&k).mul(&pushforward_matrix(&h)).unwrap();
        let (f2, g2) = puncture_square(rng, &f, &g);
        if pushforward_matrix(&g2).mul(&pullback_matrix(&f2)).unwrap() != rhs {
            counterexamples += 1;
        }
    }
    let pass = commuted == 200 && counterexamples >= 1;
    assert!(stamp(
        6,
        pass,
        &format!("operator squares commute {commuted}/200, punctures caught {counterexamples}/20"),
        start
    ));
}

#[test]
fn criterion_07_interchange() {
    let start = Instant::now();
    let rng = &mut ChaCha8Rng::seed_from_u64(71);
    let mut good = 0;
    for _ in 0..50 {
        let ((m1l, m1r), (m2l, m2r)) = gen_morphism_grid(rng, 3, 1, 2, 8);
        let rows_first =
            vcompose(&hcompose(&m2l, &m2r).unwrap(), &hcompose(&m1l, &m1r).unwrap()).unwrap();
        let columns_first =
            hcompose(&vcompose(&m2l, &m1l).unwrap(), &vcompose(&m2r, &m1r).unwrap()).unwrap();
        if rows_first.p() == columns_first.p() && rows_first == columns_first {
            good += 1;
        }
    }
    assert!(stamp(7, good == 50, &format!("grid composition orders agree, {good}/50"), start));
}

#[test]
fn criterion_08_interchanger_compatibility() {
    let start = Instant::now();
    let rng = &mut ChaCha8Rng::seed_from_u64(81);
    let mut good = 0;
    for _ in 0..50 {
        let (m1, n1) = gen_composable_pair(rng, 4, 2, 8);
        let (m2, n2) = gen_composable_pair(rng, 4, 2, 8);
        let chi = chi_iso(&m1, &n1, &m2, &n2).unwrap();
        let chi_push = pushforward_matrix(&chi);
        let lhs = compose_open(&tensor_open(&m1, &m2).unwrap(), &tensor_open(&n1, &n2).unwrap())
            .unwrap();
        let rhs = direct_sum_matrix(
            compose_open(&m1, &n1).unwrap().h(),
            compose_open(&m2, &n2).unwrap().h(),
        );
        if lhs.h().mul(&chi_push).unwrap() == chi_push.mul(&rhs).unwrap() {
            good += 1;
        }
    }
    assert!(stamp(8, good == 50, &format!("sum and gluing interchange, {good}/50"), start));
}

#[test]
fn criterion_09_semigroup_numerics() {
    let start = Instant::now();
    let rng = &mut ChaCha8Rng::seed_from_u64(91);
    let mut pass = true;

    for _ in 0..50 {
        let n = rand::Rng::gen_range(rng, 1..=6);
        let h = gen_infinitesimal_stochastic(rng, n, 8).to_f64();
        for t in [0.01, 0.1, 1.0] {
            let u = expm(&h, t).unwrap();
            for j in 0..n {
                let col_sum: f64 = (0..n).map(|i| u[i][j]).sum();
                pass &= (col_sum - 1.0).abs() <= COLSUM_TOL;
                pass &= (0..n).all(|i| u[i][j] >= -ENTRY_TOL);
            }
        }
    }

    for _ in 0..20 {
        let target = gen_open_markov(rng, ("w", "s", "t"), 3, 2, 8);
        let morphism = gen_lumpable_lift(rng, &target, 3, 8);
        for t in [0.01, 0.1, 1.0] {
            let gap = coarse_grain_commutes_numeric(
                morphism.source().h(),
                morphism.target().h(),
                morphism.p(),
                t,
            )
            .unwrap();
            pass &= gap <= SEMIGROUP_TOL;
        }
    }

    pass &= start.elapsed() < Duration::from_secs(5);
    assert!(stamp(9, pass, "semigroups stay stochastic and intertwine", start));
}

#[test]
fn criterion_10_dynamics_consistency() {
    let start = Instant::now();
    let open = pump();

    // closed run against the exact semigroup
    let states = open.states().clone();
    let closed = OpenMarkov::new(
        FinMap::from_indices(FinSet::empty(), states.clone(), vec![]),
        FinMap::from_indices(FinSet::empty(), states.clone(), vec![]),
        MarkovProcess::new(states, open.h().clone()).unwrap(),
    )
    .unwrap();
    let v0 = [1.0, 0.0, 0.0, 0.0];
    let traj = integrate_master(&closed, &FlowSpec::zero(0, 0), &v0, 1.0, 1e-4).unwrap();
    let u = expm(&open.h().to_f64(), 1.0).unwrap();
    let oracle: Vec<f64> =
        (0..4).map(|i| (0..4).map(|j| u[i][j] * v0[j]).sum()).collect();
    let rk4_err: f64 = traj
        .last_state()
        .iter()
        .zip(&oracle)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut pass = rk4_err <= ODE_TOL;

    // open run into a steady state with balanced constant flows
    let inflow = vec![0.3, 0.2];
    let outflow = vec![0.5];
    let v0 = vec![0.25; 4];
    let flows = FlowSpec::constant(inflow.clone(), outflow.clone());
    let traj = integrate_master(&open, &flows, &v0, 80.0, 0.005).unwrap();
    let v_end = traj.last_state();
    let residual = steady_residual(&open, v_end, &inflow, &outflow).unwrap();
    pass &= residual < 1e-8;
    let tuple = boundary_tuple(&open, v_end, &inflow, &outflow).unwrap();
    let dist = distance_to_subspace(&tuple, black_box(&open).graph()).unwrap();
    pass &= dist < 1e-8;

    assert!(stamp(
        10,
        pass,
        &format!("integrator error {rk4_err:.2e}, steady residual {residual:.2e}, relation distance {dist:.2e}"),
        start
    ));
}

#[test]
fn criterion_11_composite_golden() {
    let start = Instant::now();
    let glued = compose_open(&pump(), &relay()).unwrap();
    let expected = to_open_markov(
        &parse_process(
            "process union {\n  states: a, b, c, d, e, f;\n  edges:\n    a -> c @ 1/2;\n    b -> c @ 2;\n    c -> b @ 1;\n    c -> d @ 4;\n    d -> c @ 2;\n    d -> e @ 2;\n    d -> f @ 12;\n    e -> d @ 1;\n    f -> e @ 1;\n  inputs: s1 -> a, s2 -> b;\n  outputs: u1 -> f;\n}",
        )
        .unwrap(),
    )
    .unwrap();
    let pass = glued.states() == expected.states()
        && glued.h() == expected.h()
        && glued.i() == expected.i()
        && glued.o() == expected.o();
    assert!(stamp(11, pass, "composite carries the union of both edge sets", start));
}
