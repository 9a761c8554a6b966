//! Exact rational sparse linear algebra.
//!
//! Matrices are stored row-major with sorted, duplicate-free, nonzero
//! entries. All elimination is done over arbitrary-precision rationals, so
//! ranks, kernels and solutions are exact. Reduced row echelon form is
//! unique for a given row space, which makes every result deterministic
//! independently of scheduling or insertion order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Exact scalar: arbitrary-precision rational, always in lowest terms with
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// Integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Rational from a numerator/denominator pair.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Canonical `num/den` rendering, e.g. `3/1`, `-2/5`.
pub fn format_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse `num/den` (or a bare integer) into a rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: num_bigint::BigInt = num
        .parse()
        .map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
    let d: num_bigint::BigInt = den
        .parse()
        .map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Sparse vector: sorted by index, nonzero entries only.
pub(crate) type SVec = Vec<(usize, Rational)>;

/// a + coeff * b, merging sorted entry lists.
pub(crate) fn svec_add_scaled(a: &SVec, coeff: &Rational, b: &SVec) -> SVec {
    if coeff.is_zero() {
        return a.clone();
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                let v = va + coeff * vb;
                if !v.is_zero() {
                    out.push((*ca, v));
                }
                i += 1;
                j += 1;
            }
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                out.push((*ca, va.clone()));
                i += 1;
            }
            (Some(_), Some((cb, vb))) => {
                out.push((*cb, coeff * vb));
                j += 1;
            }
            (Some((ca, va)), None) => {
                out.push((*ca, va.clone()));
                i += 1;
            }
            (None, Some((cb, vb))) => {
                out.push((*cb, coeff * vb));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

pub(crate) fn svec_scale(a: &SVec, coeff: &Rational) -> SVec {
    if coeff.is_zero() {
        return Vec::new();
    }
    a.iter().map(|(c, v)| (*c, v * coeff)).collect()
}

pub(crate) fn svec_dot(a: &SVec, b: &SVec) -> Rational {
    let mut acc = Rational::zero();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ca, va) = &a[i];
        let (cb, vb) = &b[j];
        if ca == cb {
            acc += va * vb;
            i += 1;
            j += 1;
        } else if ca < cb {
            i += 1;
        } else {
            j += 1;
        }
    }
    acc
}

pub(crate) fn svec_get(a: &SVec, c: usize) -> Option<&Rational> {
    a.binary_search_by_key(&c, |(col, _)| *col)
        .ok()
        .map(|idx| &a[idx].1)
}

fn svec_from_entries(entries: impl IntoIterator<Item = (usize, Rational)>) -> SVec {
    let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
    for (c, v) in entries {
        let slot = acc.entry(c).or_insert_with(Rational::zero);
        *slot += v;
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// Sparse matrix over exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<SVec>,
}

/// JSON shape for matrices: entries carry `num/den` strings.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, String)>,
}

impl Serialize for SparseMatrix {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = MatrixRepr {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self
                .iter_entries()
                .map(|(r, c, v)| (r, c, format_rational(v)))
                .collect(),
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SparseMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(de)?;
        let mut triplets = Vec::with_capacity(repr.entries.len());
        for (r, c, s) in repr.entries {
            if r >= repr.nrows || c >= repr.ncols {
                return Err(serde::de::Error::custom("matrix entry out of range"));
            }
            let v = parse_rational(&s).map_err(serde::de::Error::custom)?;
            triplets.push((r, c, v));
        }
        Ok(SparseMatrix::from_triplets(
            repr.nrows, repr.ncols, triplets,
        ))
    }
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| vec![(i, Rational::one())]).collect();
        SparseMatrix {
            nrows: n,
            ncols: n,
            rows,
        }
    }

    /// Build from (row, col, value) triplets; duplicate positions are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Self {
        let mut per_row: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet index out of range");
            per_row[r].push((c, v));
        }
        let rows = per_row.into_iter().map(svec_from_entries).collect();
        SparseMatrix { nrows, ncols, rows }
    }

    /// Dense test helper; every `i64` entry becomes an exact rational.
    pub fn from_dense(rows: &[&[i64]]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let triplets = rows.iter().enumerate().flat_map(|(r, row)| {
            assert_eq!(row.len(), ncols, "ragged dense input");
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0)
                .map(move |(c, v)| (r, c, rat(*v)))
        });
        Self::from_triplets(nrows, ncols, triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn entry(&self, r: usize, c: usize) -> Rational {
        svec_get(&self.rows[r], c).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    pub(crate) fn row(&self, r: usize) -> &SVec {
        &self.rows[r]
    }

    pub(crate) fn rows_vec(&self) -> &[SVec] {
        &self.rows
    }

    pub(crate) fn from_rows(nrows: usize, ncols: usize, rows: Vec<SVec>) -> Self {
        debug_assert_eq!(rows.len(), nrows);
        SparseMatrix { nrows, ncols, rows }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut per_row: Vec<SVec> = vec![Vec::new(); self.ncols];
        for (r, c, v) in self.iter_entries() {
            per_row[c].push((r, v.clone()));
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            rows: per_row,
        }
    }

    pub fn scale(&self, coeff: &Rational) -> SparseMatrix {
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows: self.rows.iter().map(|r| svec_scale(r, coeff)).collect(),
        }
    }

    pub fn add(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let one = Rational::one();
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| svec_add_scaled(a, &one, b))
            .collect();
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            rows,
        }
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows, "inner dimension mismatch");
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
                for (k, v) in row {
                    for (c, w) in &other.rows[*k] {
                        let slot = acc.entry(*c).or_insert_with(Rational::zero);
                        *slot += v * w;
                    }
                }
                acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
            })
            .collect();
        SparseMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            rows,
        }
    }

    /// Matrix-vector product with a sparse vector.
    pub(crate) fn matvec(&self, v: &SVec) -> SVec {
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let d = svec_dot(row, v);
            if !d.is_zero() {
                out.push((r, d));
            }
        }
        out
    }

    /// Commutator `self*other - other*self`.
    pub fn commutator(&self, other: &SparseMatrix) -> SparseMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> Rational {
        let mut acc = Rational::zero();
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(v) = svec_get(row, r) {
                acc += v;
            }
        }
        acc
    }

    /// Stack matrices vertically (all must share a column count).
    pub fn stack(blocks: &[SparseMatrix]) -> SparseMatrix {
        let ncols = blocks.first().map_or(0, |b| b.ncols);
        let mut rows = Vec::new();
        for b in blocks {
            assert_eq!(b.ncols, ncols, "stacking width mismatch");
            rows.extend(b.rows.iter().cloned());
        }
        SparseMatrix {
            nrows: rows.len(),
            ncols,
            rows,
        }
    }
}

/// Incremental reduced-row-echelon builder.
///
/// Rows are fed in one at a time; the internal state is always the unique
/// RREF of the row space seen so far. Pivot policy follows from reduction:
/// each stored row leads with a `1` in its pivot column and pivot columns
/// strictly increase.
pub(crate) struct RowReducer {
    ncols: usize,
    rows: Vec<SVec>,
    pivots: Vec<usize>,
}

impl RowReducer {
    pub fn new(ncols: usize) -> Self {
        RowReducer {
            ncols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Fully reduce `v` against the current rows.
    pub fn reduce(&self, v: &mut SVec) {
        let mut cursor = 0;
        while cursor < v.len() {
            let col = v[cursor].0;
            match self.pivots.binary_search(&col) {
                Ok(idx) => {
                    let coeff = -v[cursor].1.clone();
                    *v = svec_add_scaled(v, &coeff, &self.rows[idx]);
                    // entries before `cursor` are untouched (pivot row leads at `col`)
                }
                Err(_) => cursor += 1,
            }
        }
    }

    /// Insert a row; returns true if it enlarged the row space.
    pub fn add_row(&mut self, mut v: SVec) -> bool {
        self.reduce(&mut v);
        let Some((pivot, lead)) = v.first().cloned() else {
            return false;
        };
        debug_assert!(pivot < self.ncols);
        let inv = lead.recip();
        let v = svec_scale(&v, &inv);
        // clear the new pivot column from existing rows
        for row in self.rows.iter_mut() {
            if let Some(c) = svec_get(row, pivot).cloned() {
                *row = svec_add_scaled(row, &-c, &v);
            }
        }
        let at = self.pivots.binary_search(&pivot).unwrap_err();
        self.pivots.insert(at, pivot);
        self.rows.insert(at, v);
        true
    }

    pub fn into_matrix(self) -> SparseMatrix {
        SparseMatrix {
            nrows: self.rows.len(),
            ncols: self.ncols,
            rows: self.rows,
        }
    }
}

/// Reduced row echelon form and rank.
pub fn rref(m: &SparseMatrix) -> (SparseMatrix, usize) {
    let mut red = RowReducer::new(m.ncols());
    for row in &m.rows {
        red.add_row(row.clone());
    }
    let rank = red.rank();
    (red.into_matrix(), rank)
}

/// Rank only.
pub fn rank(m: &SparseMatrix) -> usize {
    rref(m).1
}

/// A linear subspace of `Q^ambient`, stored as an RREF basis (rows).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: SparseMatrix,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: SparseMatrix::zero(0, ambient),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: SparseMatrix::identity(ambient),
        }
    }

    /// Span of the given rows.
    pub fn from_matrix_rows(m: &SparseMatrix) -> Self {
        let (basis, _) = rref(m);
        Subspace {
            ambient: m.ncols(),
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// RREF basis, one vector per row.
    pub fn basis(&self) -> &SparseMatrix {
        &self.basis
    }

    pub(crate) fn basis_rows(&self) -> &[SVec] {
        self.basis.rows_vec()
    }

    pub fn contains_vec(&self, v: &SparseMatrix) -> bool {
        assert_eq!(v.nrows(), 1, "expected a row vector");
        assert_eq!(v.ncols(), self.ambient);
        self.contains_svec(v.row(0))
    }

    pub(crate) fn contains_svec(&self, v: &SVec) -> bool {
        let mut red = RowReducer {
            ncols: self.ambient,
            rows: self.basis.rows.clone(),
            pivots: self.pivot_cols(),
        };
        let added = red.add_row(v.clone());
        !added
    }

    fn pivot_cols(&self) -> Vec<usize> {
        self.basis
            .rows
            .iter()
            .map(|r| r.first().expect("basis rows are nonzero").0)
            .collect()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis_rows().iter().all(|r| self.contains_svec(r))
    }

    /// Intersection via the Zassenhaus double-block reduction.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch {
                left: self.ambient,
                right: other.ambient,
            });
        }
        let n = self.ambient;
        let mut red = RowReducer::new(2 * n);
        for row in self.basis_rows() {
            let mut doubled = row.clone();
            doubled.extend(row.iter().map(|(c, v)| (c + n, v.clone())));
            red.add_row(doubled);
        }
        for row in other.basis_rows() {
            red.add_row(row.clone());
        }
        let mut inter = RowReducer::new(n);
        for row in &red.rows {
            if row.first().is_some_and(|(c, _)| *c >= n) {
                let shifted: SVec = row.iter().map(|(c, v)| (c - n, v.clone())).collect();
                inter.add_row(shifted);
            }
        }
        Ok(Subspace {
            ambient: n,
            basis: inter.into_matrix(),
        })
    }
}

/// Right kernel of `m` as a subspace of `Q^{ncols}`.
pub fn nullspace(m: &SparseMatrix) -> Subspace {
    let (r, _) = rref(m);
    nullspace_of_rref(&r)
}

pub(crate) fn nullspace_of_rref(r: &SparseMatrix) -> Subspace {
    let ncols = r.ncols();
    let pivots: Vec<usize> = r
        .rows
        .iter()
        .map(|row| row.first().expect("RREF rows are nonzero").0)
        .collect();
    let mut kernel = RowReducer::new(ncols);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    for free in (0..ncols).filter(|c| !pivot_set.contains(c)) {
        let mut v: SVec = Vec::new();
        for (idx, row) in r.rows.iter().enumerate() {
            if let Some(a) = svec_get(row, free) {
                v.push((pivots[idx], -a.clone()));
            }
        }
        v.push((free, Rational::one()));
        v.sort_by_key(|(c, _)| *c);
        kernel.add_row(v);
    }
    Subspace {
        ambient: ncols,
        basis: kernel.into_matrix(),
    }
}

/// One exact solution of `m x = rhs` (free variables set to zero), or `None`
/// if the system is inconsistent.
pub fn solve(m: &SparseMatrix, rhs: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(rhs.len(), m.nrows(), "rhs length must equal nrows");
    let n = m.ncols();
    let mut red = RowReducer::new(n + 1);
    for (row, b) in m.rows.iter().zip(rhs) {
        let mut aug = row.clone();
        if !b.is_zero() {
            aug.push((n, b.clone()));
        }
        red.add_row(aug);
    }
    let mut x = vec![Rational::zero(); n];
    for row in &red.rows {
        let (pivot, _) = row[0].clone();
        if pivot == n {
            return None;
        }
        if let Some(b) = svec_get(row, n) {
            x[pivot] = b.clone();
        }
    }
    Some(x)
}

/// Serialize in the line-oriented text format: a `rows cols` header, then
/// one `row col num/den` line per nonzero entry (0-based indices).
pub fn write_matrix_text(m: &SparseMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for (r, c, v) in m.iter_entries() {
        let _ = writeln!(out, "{} {} {}", r, c, format_rational(v));
    }
    out
}

/// Parse the text format produced by [`write_matrix_text`].
pub fn read_matrix_text(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::parse("empty input"))?;
    let mut hp = header.split_whitespace();
    let nrows: usize = hp
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse("bad header row count"))?;
    let ncols: usize = hp
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::parse("bad header column count"))?;
    let mut triplets = Vec::new();
    for line in lines {
        let mut parts = line.split_whitespace();
        let r: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(format!("bad row index in {line:?}")))?;
        let c: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(format!("bad col index in {line:?}")))?;
        let v = parse_rational(
            parts
                .next()
                .ok_or_else(|| Error::parse(format!("missing value in {line:?}")))?,
        )?;
        if r >= nrows || c >= ncols {
            return Err(Error::parse(format!("entry out of range in {line:?}")));
        }
        triplets.push((r, c, v));
    }
    Ok(SparseMatrix::from_triplets(nrows, ncols, triplets))
}

/// Signed magnitude helper used by a few callers to pick test scalars.
pub fn abs_num(x: &Rational) -> Rational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense fraction-free (Bareiss) elimination over integers; returns the
    /// rank. Independent of the sparse RREF path above.
    fn bareiss_rank(rows: &[Vec<i64>]) -> usize {
        let mut a: Vec<Vec<num_bigint::BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|x| num_bigint::BigInt::from(*x)).collect())
            .collect();
        let nrows = a.len();
        let ncols = a.first().map_or(0, |r| r.len());
        let mut prev = num_bigint::BigInt::from(1);
        let mut pivot_row = 0;
        let mut rank = 0;
        for col in 0..ncols {
            if pivot_row >= nrows {
                break;
            }
            let Some(found) = (pivot_row..nrows).find(|r| !a[*r][col].is_zero()) else {
                continue;
            };
            a.swap(pivot_row, found);
            for r in pivot_row + 1..nrows {
                for c in col + 1..ncols {
                    let num = &a[pivot_row][col] * &a[r][c] - &a[r][col] * &a[pivot_row][c];
                    a[r][c] = num / &prev;
                }
                a[r][col] = num_bigint::BigInt::from(0);
            }
            prev = a[pivot_row][col].clone();
            pivot_row += 1;
            rank += 1;
        }
        rank
    }

    #[test]
    fn rref_proportional_rows() {
        let m = SparseMatrix::from_dense(&[&[1, 2], &[2, 4]]);
        let (r, rank) = rref(&m);
        assert_eq!(rank, 1);
        assert_eq!(r, SparseMatrix::from_dense(&[&[1, 2]]));
    }

    #[test]
    fn rref_identity_fixed_point() {
        let m = SparseMatrix::identity(3);
        let (r, rank) = rref(&m);
        assert_eq!(rank, 3);
        assert_eq!(r, m);
    }

    #[test]
    fn rref_permutation() {
        let m = SparseMatrix::from_dense(&[&[0, 1], &[1, 0]]);
        let (r, rank) = rref(&m);
        assert_eq!(rank, 2);
        assert_eq!(r, SparseMatrix::identity(2));
    }

    #[test]
    fn nullspace_examples() {
        let m = SparseMatrix::from_dense(&[&[1, 0], &[0, 0]]);
        let k = nullspace(&m);
        assert_eq!(k.dim(), 1);
        assert!(k.contains_vec(&SparseMatrix::from_dense(&[&[0, 1]])));

        let z = SparseMatrix::zero(2, 2);
        assert_eq!(nullspace(&z).dim(), 2);

        let m = SparseMatrix::from_dense(&[&[1, 1]]);
        let k = nullspace(&m);
        assert_eq!(k.dim(), 1);
        assert!(k.contains_vec(&SparseMatrix::from_dense(&[&[1, -1]])));
    }

    #[test]
    fn intersect_examples() {
        let e12 = Subspace::from_matrix_rows(&SparseMatrix::from_dense(&[&[1, 0, 0], &[0, 1, 0]]));
        let e23 = Subspace::from_matrix_rows(&SparseMatrix::from_dense(&[&[0, 1, 0], &[0, 0, 1]]));
        let inter = e12.intersect(&e23).unwrap();
        assert_eq!(inter.dim(), 1);
        assert!(inter.contains_vec(&SparseMatrix::from_dense(&[&[0, 1, 0]])));

        assert_eq!(e12.intersect(&e12).unwrap(), e12);

        let e1 = Subspace::from_matrix_rows(&SparseMatrix::from_dense(&[&[1, 0]]));
        let e2 = Subspace::from_matrix_rows(&SparseMatrix::from_dense(&[&[0, 1]]));
        assert_eq!(e1.intersect(&e2).unwrap().dim(), 0);

        let bad = e1.intersect(&e12);
        assert!(bad.is_err());
    }

    #[test]
    fn solve_examples() {
        let id = SparseMatrix::identity(2);
        assert_eq!(solve(&id, &[rat(1), rat(2)]), Some(vec![rat(1), rat(2)]));

        // underdetermined: the pivot solution puts weight on the pivot column
        let m = SparseMatrix::from_dense(&[&[1, 1]]);
        assert_eq!(solve(&m, &[rat(3)]), Some(vec![rat(3), rat(0)]));

        let m = SparseMatrix::from_dense(&[&[1], &[1]]);
        assert_eq!(solve(&m, &[rat(1), rat(2)]), None);
    }

    #[test]
    fn text_format_round_trip() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 0, ratio(1, 2)), (1, 2, rat(-3))]);
        let text = write_matrix_text(&m);
        assert!(text.starts_with("2 3\n"));
        assert!(text.contains("0 0 1/2"));
        assert!(text.contains("1 2 -3/1"));
        let back = read_matrix_text(&text).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn rank_nullity_and_bareiss_agree(
            rows in prop::collection::vec(
                prop::collection::vec(-5i64..=5, 4),
                1..6,
            )
        ) {
            let dense: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            let m = SparseMatrix::from_dense(&dense);
            let r = rank(&m);
            prop_assert_eq!(r, bareiss_rank(&rows));
            prop_assert_eq!(r + nullspace(&m).dim(), m.ncols());
        }

        #[test]
        fn rref_is_idempotent(
            rows in prop::collection::vec(
                prop::collection::vec(-4i64..=4, 3),
                1..5,
            )
        ) {
            let dense: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            let m = SparseMatrix::from_dense(&dense);
            let (r1, _) = rref(&m);
            let (r2, _) = rref(&r1);
            prop_assert_eq!(r1, r2);
        }

        #[test]
        fn intersect_commutes_and_associates(
            rows_a in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..4),
            rows_b in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..4),
            rows_c in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..4),
        ) {
            let da: Vec<&[i64]> = rows_a.iter().map(|r| r.as_slice()).collect();
            let db: Vec<&[i64]> = rows_b.iter().map(|r| r.as_slice()).collect();
            let dc: Vec<&[i64]> = rows_c.iter().map(|r| r.as_slice()).collect();
            let a = Subspace::from_matrix_rows(&SparseMatrix::from_dense(&da));
            let b = Subspace::from_matrix_rows(&SparseMatrix::from_dense(&db));
            let c = Subspace::from_matrix_rows(&SparseMatrix::from_dense(&dc));
            let ab = a.intersect(&b).unwrap();
            let ba = b.intersect(&a).unwrap();
            prop_assert_eq!(&ab, &ba);
            prop_assert!(ab.dim() <= a.dim().min(b.dim()));
            let left = ab.intersect(&c).unwrap();
            let right = a.intersect(&b.intersect(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }

    #[test]
    fn solutions_satisfy_the_system() {
        let m = SparseMatrix::from_dense(&[&[2, 1, 0], &[0, 1, -1]]);
        let rhs = vec![rat(5), rat(1)];
        let x = solve(&m, &rhs).unwrap();
        for (r, want) in rhs.iter().enumerate() {
            let got: Rational = (0..m.ncols()).map(|c| m.entry(r, c) * &x[c]).sum();
            assert_eq!(&got, want);
        }
    }
}
