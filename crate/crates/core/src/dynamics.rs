//! Floating-point semantics: the matrix exponential, master-equation
//! integration, and numerical steady states.
//!
//! Everything upstream of this module is exact. Here generators are lowered
//! to f64 so that simulated behavior can be cross-checked against the exact
//! layer: exp(tH) of an infinitesimal stochastic H must be stochastic,
//! p_* H = H′ p_* must transfer to the semigroups, and integrated
//! trajectories must agree with the exponential and settle onto the
//! steady-state relation. Flows are restricted to piecewise-constant
//! schedules, which cover the steady-state theory and keep runs reproducible.

use crate::error::{Error, Result};
use crate::exactlin::{kernel, rat_to_f64, solve, RatMatrix, Rational, Subspace};
use crate::finset::FinMap;
use crate::markov::{pushforward_matrix, OpenMarkov};

/// Dense real matrix as rows, the working type on this side of the bridge.
pub type RealMatrix = Vec<Vec<f64>>;

/// Column sums of a stochastic matrix may drift this far from 1.
pub const COLSUM_TOL: f64 = 1e-10;
/// Entries of a stochastic matrix may undershoot 0 by this much.
pub const ENTRY_TOL: f64 = 1e-12;
/// Max-abs tolerance for semigroup-level identities (intertwining,
/// exp(s+t) = exp(s)exp(t)).
pub const SEMIGROUP_TOL: f64 = 1e-9;
/// Max-abs tolerance for integration against the exponential oracle.
pub const ODE_TOL: f64 = 1e-8;

fn real_identity(n: usize) -> RealMatrix {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

fn mat_mul(a: &RealMatrix, b: &RealMatrix) -> RealMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn mat_vec(a: &RealMatrix, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn mat_scale(a: &RealMatrix, c: f64) -> RealMatrix {
    a.iter().map(|row| row.iter().map(|x| x * c).collect()).collect()
}

fn all_finite(a: &RealMatrix) -> bool {
    a.iter().all(|row| row.iter().all(|x| x.is_finite()))
}

/// Largest absolute entry, 0 for an empty matrix.
pub fn max_abs(a: &RealMatrix) -> f64 {
    a.iter().flatten().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Largest absolute entrywise difference; panics on shape mismatch.
pub fn max_abs_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| {
            assert_eq!(ra.len(), rb.len());
            ra.iter().zip(rb).map(|(x, y)| (x - y).abs())
        })
        .fold(0.0, f64::max)
}

/// exp(tH) by scaling and squaring around a truncated series.
///
/// The scaled matrix has 1-norm at most 1/2, so the series hits machine
/// precision in well under 30 terms.
pub fn expm(h: &RealMatrix, t: f64) -> Result<RealMatrix> {
    let n = h.len();
    if h.iter().any(|row| row.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: h.iter().map(Vec::len).max().unwrap_or(0),
        });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Semantic(format!("exp(tH) needs finite t >= 0, got {t}")));
    }
    let a = mat_scale(h, t);
    let one_norm = (0..n)
        .map(|j| (0..n).map(|i| a[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if !one_norm.is_finite() {
        return Err(Error::NonFinite("exp(tH) input".into()));
    }
    let mut squarings = 0;
    while one_norm / f64::powi(2.0, squarings) > 0.5 && squarings < 64 {
        squarings += 1;
    }
    let b = mat_scale(&a, f64::powi(2.0, -squarings));

    let mut result = real_identity(n);
    let mut term = real_identity(n);
    for k in 1..=40u32 {
        term = mat_scale(&mat_mul(&term, &b), 1.0 / f64::from(k));
        for (acc, row) in result.iter_mut().zip(&term) {
            for (x, y) in acc.iter_mut().zip(row) {
                *x += y;
            }
        }
        if max_abs(&term) < 1e-19 {
            break;
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result);
    }
    if !all_finite(&result) {
        return Err(Error::NonFinite("exp(tH) overflowed".into()));
    }
    Ok(result)
}

/// True when every column sums to 1 within COLSUM_TOL and no entry is below
/// -ENTRY_TOL.
pub fn is_stochastic_float(u: &RealMatrix) -> bool {
    let n = u.len();
    if u.iter().any(|row| row.len() != n) {
        return false;
    }
    (0..n).all(|j| {
        let sum: f64 = (0..n).map(|i| u[i][j]).sum();
        (sum - 1.0).abs() <= COLSUM_TOL && (0..n).all(|i| u[i][j] >= -ENTRY_TOL)
    })
}

/// A piecewise-constant driving signal. Value k applies on
/// [breakpoints[k-1], breakpoints[k]), so the signal is right-continuous.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant(Vec<f64>),
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<Vec<f64>> },
}

impl Schedule {
    pub fn constant(value: Vec<f64>) -> Schedule {
        Schedule::Constant(value)
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Schedule> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::BadSchedule(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::BadSchedule("non-finite breakpoint".into()));
        }
        if !breakpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::BadSchedule("breakpoints must be strictly increasing".into()));
        }
        let dim = values[0].len();
        if values.iter().any(|v| v.len() != dim) {
            return Err(Error::BadSchedule("schedule values have mixed lengths".into()));
        }
        Ok(Schedule::PiecewiseConstant { breakpoints, values })
    }

    pub fn dim(&self) -> usize {
        match self {
            Schedule::Constant(v) => v.len(),
            Schedule::PiecewiseConstant { values, .. } => values[0].len(),
        }
    }

    pub fn at(&self, t: f64) -> &[f64] {
        match self {
            Schedule::Constant(v) => v,
            Schedule::PiecewiseConstant { breakpoints, values } => {
                let idx = breakpoints.iter().take_while(|&&b| b <= t).count();
                &values[idx]
            }
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            Schedule::Constant(_) => &[],
            Schedule::PiecewiseConstant { breakpoints, .. } => breakpoints,
        }
    }
}

/// Inflows over the inputs and outflows over the outputs of an open process.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub inflow: Schedule,
    pub outflow: Schedule,
}

impl FlowSpec {
    pub fn constant(inflow: Vec<f64>, outflow: Vec<f64>) -> FlowSpec {
        FlowSpec { inflow: Schedule::constant(inflow), outflow: Schedule::constant(outflow) }
    }

    pub fn zero(inputs: usize, outputs: usize) -> FlowSpec {
        FlowSpec::constant(vec![0.0; inputs], vec![0.0; outputs])
    }
}

/// A sampled solution of the master equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Integrates dv/dt = Hv + i_*(I(t)) - o_*(O(t)) by classical fixed-step RK4.
///
/// Steps are split at schedule breakpoints and flows are sampled at substep
/// midpoints, so a piecewise-constant signal never straddles a stage and the
/// integrator keeps its full order.
pub fn integrate_master(
    m: &OpenMarkov,
    flows: &FlowSpec,
    v0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Semantic(format!(
            "integration needs dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if v0.len() != m.states().len() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} entries over {} states",
            v0.len(),
            m.states().len()
        )));
    }
    if flows.inflow.dim() != m.inputs().len() || flows.outflow.dim() != m.outputs().len() {
        return Err(Error::DimensionMismatch(format!(
            "flows are {}/{} over boundary {}/{}",
            flows.inflow.dim(),
            flows.outflow.dim(),
            m.inputs().len(),
            m.outputs().len()
        )));
    }

    let h = m.h().to_f64();
    let i_push = pushforward_matrix(m.i()).to_f64();
    let o_push = pushforward_matrix(m.o()).to_f64();

    let mut stops: Vec<f64> = Vec::new();
    let full_steps = (t_end / dt).floor() as usize;
    stops.extend((1..=full_steps).map(|k| k as f64 * dt));
    if t_end - full_steps as f64 * dt > 1e-9 * dt {
        stops.push(t_end);
    }
    for schedule in [&flows.inflow, &flows.outflow] {
        stops.extend(
            schedule.breakpoints().iter().copied().filter(|&b| 0.0 < b && b < t_end),
        );
    }
    stops.sort_by(|a, b| a.partial_cmp(b).expect("stops are finite"));
    stops.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * dt);

    let mut v = v0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![v.clone()];
    let mut t = 0.0;
    for stop in stops {
        let step = stop - t;
        let mid = 0.5 * (t + stop);
        let inflow = mat_vec(&i_push, flows.inflow.at(mid));
        let outflow = mat_vec(&o_push, flows.outflow.at(mid));
        let deriv = |state: &[f64]| -> Vec<f64> {
            let mut dv = mat_vec(&h, state);
            for ((d, i), o) in dv.iter_mut().zip(&inflow).zip(&outflow) {
                *d += i - o;
            }
            dv
        };
        let shifted = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> {
            base.iter().zip(k).map(|(b, k)| b + c * k).collect()
        };
        let k1 = deriv(&v);
        let k2 = deriv(&shifted(&v, &k1, step / 2.0));
        let k3 = deriv(&shifted(&v, &k2, step / 2.0));
        let k4 = deriv(&shifted(&v, &k3, step));
        for (i, x) in v.iter_mut().enumerate() {
            *x += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("state blew up at t = {stop}")));
        }
        t = stop;
        times.push(t);
        states.push(v.clone());
    }
    Ok(Trajectory { times, states })
}

/// The steady states of an open process under constant flows I and O:
/// solutions of Hv + i_*(I) - o_*(O) = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum SteadyStates {
    /// The affine system has no solution (possible only with nonzero flows).
    Infeasible,
    /// particular + span(kernel_basis), the full affine family.
    Family { particular: Vec<f64>, kernel_basis: Vec<Vec<f64>> },
}

/// Solves for steady states exactly on rationalized flows, then floats the
/// result. Infeasibility is an answer, not an error.
pub fn steady_states(m: &OpenMarkov, inflow: &[f64], outflow: &[f64]) -> Result<SteadyStates> {
    if inflow.len() != m.inputs().len() || outflow.len() != m.outputs().len() {
        return Err(Error::DimensionMismatch(format!(
            "flows are {}/{} over boundary {}/{}",
            inflow.len(),
            outflow.len(),
            m.inputs().len(),
            m.outputs().len()
        )));
    }
    let rationalize = |xs: &[f64]| -> Result<Vec<Rational>> {
        xs.iter()
            .map(|&x| {
                Rational::from_float(x)
                    .ok_or_else(|| Error::NonFinite(format!("flow entry {x}")))
            })
            .collect()
    };
    let i_rat = rationalize(inflow)?;
    let o_rat = rationalize(outflow)?;
    let i_push = pushforward_matrix(m.i());
    let o_push = pushforward_matrix(m.o());
    let rhs: Vec<Rational> = o_push
        .mul_vec(&o_rat)?
        .into_iter()
        .zip(i_push.mul_vec(&i_rat)?)
        .map(|(o, i)| o - i)
        .collect();
    match solve(m.h(), &rhs)? {
        None => Ok(SteadyStates::Infeasible),
        Some(particular) => {
            let ker = kernel(m.h());
            let kernel_basis = (0..ker.dim())
                .map(|r| ker.basis().row(r).iter().map(rat_to_f64).collect())
                .collect();
            Ok(SteadyStates::Family {
                particular: particular.iter().map(rat_to_f64).collect(),
                kernel_basis,
            })
        }
    }
}

/// ‖Hv + i_*(I) - o_*(O)‖_∞, the defect of v as a steady state.
pub fn steady_residual(
    m: &OpenMarkov,
    v: &[f64],
    inflow: &[f64],
    outflow: &[f64],
) -> Result<f64> {
    if v.len() != m.states().len()
        || inflow.len() != m.inputs().len()
        || outflow.len() != m.outputs().len()
    {
        return Err(Error::DimensionMismatch(format!(
            "residual over {} states with {}/{} flows",
            v.len(),
            inflow.len(),
            outflow.len()
        )));
    }
    let hv = mat_vec(&m.h().to_f64(), v);
    let i_flow = mat_vec(&pushforward_matrix(m.i()).to_f64(), inflow);
    let o_flow = mat_vec(&pushforward_matrix(m.o()).to_f64(), outflow);
    Ok(hv
        .iter()
        .zip(&i_flow)
        .zip(&o_flow)
        .map(|((h, i), o)| (h + i - o).abs())
        .fold(0.0, f64::max))
}

/// The boundary reading (i^*v, I, o^*v, O) of a state and its flows, in the
/// coordinate order used by black-boxing.
pub fn boundary_tuple(
    m: &OpenMarkov,
    v: &[f64],
    inflow: &[f64],
    outflow: &[f64],
) -> Result<Vec<f64>> {
    if v.len() != m.states().len()
        || inflow.len() != m.inputs().len()
        || outflow.len() != m.outputs().len()
    {
        return Err(Error::DimensionMismatch(format!(
            "boundary tuple over {} states with {}/{} flows",
            v.len(),
            inflow.len(),
            outflow.len()
        )));
    }
    let mut tuple = Vec::with_capacity(2 * inflow.len() + 2 * outflow.len());
    tuple.extend(m.i().table().iter().map(|&x| v[x]));
    tuple.extend_from_slice(inflow);
    tuple.extend(m.o().table().iter().map(|&x| v[x]));
    tuple.extend_from_slice(outflow);
    Ok(tuple)
}

/// Euclidean distance from a point to an exact subspace, computed in floats
/// by Gram-Schmidt projection.
pub fn distance_to_subspace(point: &[f64], space: &Subspace) -> Result<f64> {
    if point.len() != space.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "point of length {} against ambient dim {}",
            point.len(),
            space.ambient_dim()
        )));
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for r in 0..space.dim() {
        let mut q: Vec<f64> = space.basis().row(r).iter().map(rat_to_f64).collect();
        for prev in &ortho {
            let c = dot(&q, prev);
            for (x, p) in q.iter_mut().zip(prev) {
                *x -= c * p;
            }
        }
        let norm = dot(&q, &q).sqrt();
        // exact canonical bases have no dependent rows; tiny norms are pure roundoff
        if norm > 1e-12 {
            for x in &mut q {
                *x /= norm;
            }
            ortho.push(q);
        }
    }
    let mut residual = point.to_vec();
    for q in &ortho {
        let c = dot(&residual, q);
        for (x, p) in residual.iter_mut().zip(q) {
            *x -= c * p;
        }
    }
    Ok(dot(&residual, &residual).sqrt())
}

/// ‖p_* exp(tH) - exp(tH′) p_*‖_maxabs, after checking the exact
/// intertwining p_* H = H′ p_* that makes the answer meaningful.
pub fn coarse_grain_commutes_numeric(
    h: &RatMatrix,
    h_prime: &RatMatrix,
    p: &FinMap,
    t: f64,
) -> Result<f64> {
    let push = pushforward_matrix(p);
    if push.mul(h)? != h_prime.mul(&push)? {
        return Err(Error::NotLumpable(format!("generators do not intertwine over {p}")));
    }
    let u = expm(&h.to_f64(), t)?;
    let u_prime = expm(&h_prime.to_f64(), t)?;
    let p_float = push.to_f64();
    Ok(max_abs_diff(&mat_mul(&p_float, &u), &mat_mul(&u_prime, &p_float)))
}
