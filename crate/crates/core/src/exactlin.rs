//! Exact rational matrices and canonical subspaces.
//!
//! Every categorical law in this crate is decided here with zero tolerance:
//! subspace equality is structural equality of reduced row-echelon bases,
//! which is not robust under rounding, so floats are banished to `dynamics`.
//! Matrices are dense; everything in sight is a few hundred entries at most.

use std::fmt;

use num::{BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational. Always in lowest terms, denominator > 0.
pub type Rational = BigRational;

/// Shorthand for small rational constants.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// Canonical display: `p` when the denominator is 1, `p/q` otherwise.
pub fn rat_str(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// f64 division of the float images of numerator and denominator; exact for
/// all rates that show up at this scale.
pub fn rat_to_f64(r: &Rational) -> f64 {
    num::ToPrimitive::to_f64(r.numer()).unwrap() / num::ToPrimitive::to_f64(r.denom()).unwrap()
}

/// Dense row-major matrix of rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, entries }
    }

    /// Builds from explicit rows; all rows must share a length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RatMatrix { rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    /// Integer literal rows, for tests and fixtures.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col_vec(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> RatMatrix {
        RatMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(RatMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()
        }))
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect())
    }

    pub fn add(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(RatMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) + other.get(i, j)))
    }

    pub fn sub(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "cannot subtract {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(RatMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j)))
    }

    pub fn scale(&self, c: &Rational) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) * c)
    }

    /// Horizontal concatenation [A | B].
    pub fn hcat(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot hcat {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        Ok(RatMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(rat_to_f64)
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for RatMatrix {
    /// Compact `[[a,b],[c,d]]` form with canonical rational entries.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", rat_str(self.get(i, j)))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Permutation matrix reordering consecutive blocks of the given sizes so
/// that block `order[k]` of the input lands at position k of the output.
pub fn block_permutation(sizes: &[usize], order: &[usize]) -> RatMatrix {
    assert_eq!(sizes.len(), order.len());
    let total: usize = sizes.iter().sum();
    let offsets: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let here = *acc;
            *acc += s;
            Some(here)
        })
        .collect();
    let mut m = RatMatrix::zeros(total, total);
    let mut row = 0;
    for &b in order {
        for k in 0..sizes[b] {
            m.set(row, offsets[b] + k, Rational::one());
            row += 1;
        }
    }
    m
}

/// Block-diagonal [[A,0],[0,B]].
pub fn direct_sum_matrix(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    RatMatrix::from_fn(a.rows + b.rows, a.cols + b.cols, |i, j| {
        if i < a.rows && j < a.cols {
            a.get(i, j).clone()
        } else if i >= a.rows && j >= a.cols {
            b.get(i - a.rows, j - a.cols).clone()
        } else {
            Rational::zero()
        }
    })
}

/// Reduced row-echelon form: pivots are 1, pivot columns strictly increase,
/// zero rows are dropped.
pub fn rref(m: &RatMatrix) -> RatMatrix {
    let mut rows: Vec<Vec<Rational>> = (0..m.rows).map(|i| m.row(i).to_vec()).collect();
    let cols = m.cols;
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(src) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, src);
        let inv = rows[pivot_row][col].recip();
        for x in rows[pivot_row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in 0..cols {
                    let delta = &factor * &rows[pivot_row][c];
                    rows[r][c] -= delta;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.truncate(pivot_row);
    if rows.is_empty() {
        RatMatrix::zeros(0, cols)
    } else {
        RatMatrix::from_rows(rows)
    }
}

/// A linear subspace of Q^n in canonical form: the basis is the unique RREF
/// of its row space, so equality of subspaces is plain structural equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: RatMatrix,
}

impl Subspace {
    /// Span of the given row vectors.
    pub fn span(ambient_dim: usize, rows: &RatMatrix) -> Self {
        assert_eq!(rows.cols(), ambient_dim, "generator length != ambient dim");
        Subspace { ambient_dim, basis: rref(rows) }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: RatMatrix::zeros(0, ambient_dim) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: RatMatrix::identity(ambient_dim) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Canonical RREF basis, one vector per row.
    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn contains_vector(&self, v: &[Rational]) -> Result<bool> {
        if v.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} in ambient dim {}",
                v.len(),
                self.ambient_dim
            )));
        }
        let mut v = v.to_vec();
        for i in 0..self.basis.rows() {
            let pivot = (0..self.ambient_dim)
                .find(|&j| self.basis.get(i, j).is_one())
                .expect("RREF row has a pivot");
            if !v[pivot].is_zero() {
                let factor = v[pivot].clone();
                for j in 0..self.ambient_dim {
                    let delta = &factor * self.basis.get(i, j);
                    v[j] -= delta;
                }
            }
        }
        Ok(v.iter().all(Zero::is_zero))
    }

    pub fn contains(&self, other: &Subspace) -> Result<bool> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "ambient dims {} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        for i in 0..other.basis.rows() {
            if !self.contains_vector(other.basis.row(i))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equal(&self, other: &Subspace) -> Result<bool> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "ambient dims {} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        Ok(self == other)
    }

    /// Intersection via the coordinate method: solve x·A = y·B by taking the
    /// kernel of [Aᵀ | −Bᵀ] and reading off x·A.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "ambient dims {} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        let a = &self.basis;
        let b = &other.basis;
        let stacked = a.transpose().hcat(&b.transpose().scale(&-Rational::one()))?;
        let coeffs = kernel(&stacked);
        let mut gens = Vec::new();
        for i in 0..coeffs.basis.rows() {
            let xy = coeffs.basis.row(i);
            let v: Vec<Rational> = (0..self.ambient_dim)
                .map(|j| (0..a.rows()).map(|k| &xy[k] * a.get(k, j)).sum())
                .collect();
            gens.push(v);
        }
        let result = if gens.is_empty() {
            Subspace::zero(self.ambient_dim)
        } else {
            Subspace::span(self.ambient_dim, &RatMatrix::from_rows(gens))
        };
        debug_assert!(self.contains(&result).unwrap() && other.contains(&result).unwrap());
        Ok(result)
    }
}

/// Kernel {v : Mv = 0} in canonical form.
pub fn kernel(m: &RatMatrix) -> Subspace {
    let r = rref(m);
    let n = m.cols();
    let pivots: Vec<usize> = (0..r.rows())
        .map(|i| (0..n).find(|&j| r.get(i, j).is_one()).expect("RREF row has a pivot"))
        .collect();
    let free: Vec<usize> = (0..n).filter(|j| !pivots.contains(j)).collect();
    let mut gens = Vec::new();
    for &f in &free {
        let mut v = vec![Rational::zero(); n];
        v[f] = Rational::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r.get(i, f).clone();
        }
        gens.push(v);
    }
    let ker = if gens.is_empty() {
        Subspace::zero(n)
    } else {
        Subspace::span(n, &RatMatrix::from_rows(gens))
    };
    debug_assert!((0..ker.basis.rows()).all(|i| {
        m.mul_vec(ker.basis.row(i)).unwrap().iter().all(Zero::is_zero)
    }));
    ker
}

/// Column span of M.
pub fn image(m: &RatMatrix) -> Subspace {
    Subspace::span(m.rows(), &m.transpose())
}

/// Solves Mx = b exactly. Returns None when the system is inconsistent;
/// otherwise one solution, with every free coordinate set to zero.
pub fn solve(m: &RatMatrix, b: &[Rational]) -> Result<Option<Vec<Rational>>> {
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "solving {}x{} against rhs of length {}",
            m.rows(),
            m.cols(),
            b.len()
        )));
    }
    let mut aug = RatMatrix::zeros(m.rows(), m.cols() + 1);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, m.cols(), b[i].clone());
    }
    let r = rref(&aug);
    let mut x = vec![Rational::zero(); m.cols()];
    for i in 0..r.rows() {
        let pivot = (0..=m.cols())
            .find(|&j| !r.get(i, j).is_zero())
            .expect("RREF row has a pivot");
        if pivot == m.cols() {
            return Ok(None);
        }
        x[pivot] = r.get(i, m.cols()).clone();
    }
    debug_assert_eq!(m.mul_vec(&x).unwrap(), b);
    Ok(Some(x))
}

/// Image of a subspace under M.
pub fn apply(m: &RatMatrix, s: &Subspace) -> Result<Subspace> {
    if s.ambient_dim() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "apply {}x{} to subspace of ambient dim {}",
            m.rows(),
            m.cols(),
            s.ambient_dim()
        )));
    }
    let mapped = s.basis().mul(&m.transpose())?;
    Ok(Subspace::span(m.rows(), &mapped))
}

/// True when every entry of v is nonnegative and the whole thing sums to 1.
pub fn is_distribution(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative()) && v.iter().sum::<Rational>().is_one()
}
