//! Young diagram combinatorics.
//!
//! Partitions are weakly decreasing sequences of positive integers. On top
//! of enumeration this module provides the Weyl dimension formula for
//! rational representations of `gl(N)` (polynomial and mixed), exact
//! Littlewood-Richardson coefficients by skew tableau enumeration, and the
//! layer multiplicity predictor used to cross-check brute-force tensor
//! decompositions.

use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exactlin::Rational;
use crate::Result;

/// A partition: weakly decreasing positive parts; empty means the empty
/// partition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::invalid("partition parts must be positive"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("partition parts must weakly decrease"));
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree `|λ|`.
    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Containment of Young diagrams: `other ⊆ self` row by row.
    pub fn contains(&self, other: &Partition) -> bool {
        (0..other.len()).all(|i| other.part(i) <= self.part(i))
    }

    /// Parse the bracket syntax `[3,1,1]`; `[]` is the empty partition.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::parse(format!("partition syntax is [a,b,...]: {text:?}")))?;
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(Partition::empty());
        }
        let parts = inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(format!("bad partition part {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// All partitions of `k` in descending lexicographic order; `p(0) = 1`
/// (the empty partition).
pub fn enumerate_partitions(k: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(current.clone()));
            return;
        }
        let top = remaining.min(max_part);
        for part in (1..=top).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    rec(k, k.max(1), &mut current, &mut out);
    out
}

/// Weyl dimension formula for the irreducible `gl(N)` module whose highest
/// weight has `λ` on the leading coordinates and `-reverse(μ)` on the
/// trailing ones. Returns 0 when the weight does not fit in rank `N`.
pub fn gl_dimension_mixed(lambda: &Partition, mu: &Partition, n: usize) -> u64 {
    if lambda.len() + mu.len() > n {
        return 0;
    }
    let weight: Vec<i64> = (0..n)
        .map(|i| {
            if i < lambda.len() {
                lambda.part(i) as i64
            } else if i >= n - mu.len() {
                -(mu.part(n - 1 - i) as i64)
            } else {
                0
            }
        })
        .collect();
    let mut dim = Rational::one();
    for i in 0..n {
        for j in i + 1..n {
            let num = weight[i] - weight[j] + (j as i64 - i as i64);
            let den = j as i64 - i as i64;
            dim *= Rational::new(num.into(), den.into());
        }
    }
    debug_assert!(dim.is_integer() && !dim.is_negative());
    let v = dim.to_integer();
    u64::try_from(v).expect("dimension fits in u64 for tested ranks")
}

/// Dimension of the Schur module `V_λ` for `gl(N)`; zero when `λ` has more
/// than `N` parts.
pub fn gl_dimension(lambda: &Partition, n: usize) -> u64 {
    gl_dimension_mixed(lambda, &Partition::empty(), n)
}

/// Number of standard Young tableaux of shape `λ` (hook length formula).
pub fn standard_tableaux(lambda: &Partition) -> u64 {
    let m = lambda.degree();
    if m == 0 {
        return 1;
    }
    // column lengths (conjugate partition, padded lookup)
    let col_len = |c: usize| lambda.parts().iter().filter(|&&w| w > c).count();
    let mut dim = Rational::new(factorial(m).into(), 1.into());
    for (r, &w) in lambda.parts().iter().enumerate() {
        for c in 0..w {
            let hook = (w - c) + (col_len(c) - r) - 1;
            dim /= Rational::from_integer((hook as i64).into());
        }
    }
    debug_assert!(dim.is_integer());
    u64::try_from(dim.to_integer()).expect("tableau count fits in u64")
}

/// `n!` as a `u64` (plenty for the degrees handled here).
pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// A Littlewood-Richardson expansion `λ = Σ c^λ_{λ'γ}` row: the pair
/// `(λ', γ)` together with the coefficient `c^λ_{λ'γ} > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LRTable {
    pub lambda: Partition,
    pub rows: Vec<(Partition, Partition, u64)>,
}

/// Littlewood-Richardson coefficient `c^ν_{λμ}` by direct enumeration of
/// semistandard skew tableaux of shape `ν/λ`, content `μ`, whose reverse
/// reading word is a lattice word.
pub fn lr_coefficient(lambda: &Partition, mu: &Partition, nu: &Partition) -> u64 {
    if nu.degree() != lambda.degree() + mu.degree() {
        return 0;
    }
    if !nu.contains(lambda) {
        return 0;
    }
    if mu.is_empty() {
        return 1; // shapes match exactly here
    }
    // cells of ν/λ in row-major order
    let nrows = nu.len();
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for r in 0..nrows {
        for c in lambda.part(r)..nu.part(r) {
            cells.push((r, c));
        }
    }
    let nvals = mu.len();
    let mut filling: Vec<usize> = vec![0; cells.len()]; // 1-based values once set
    let mut counts = vec![0usize; nvals + 1];
    let mut total = 0u64;

    // grid lookup for the value currently at (r, c); 0 when not in the skew
    // shape or not yet filled
    let width = nu.part(0);
    let mut grid = vec![0usize; nrows * width.max(1)];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        idx: usize,
        cells: &[(usize, usize)],
        mu: &Partition,
        nvals: usize,
        width: usize,
        lambda: &Partition,
        filling: &mut Vec<usize>,
        counts: &mut Vec<usize>,
        grid: &mut Vec<usize>,
        total: &mut u64,
    ) {
        if idx == cells.len() {
            *total += 1;
            return;
        }
        let (r, c) = cells[idx];
        // row constraint: weakly increasing left to right
        let left_min = if c > lambda.part(r) && c > 0 {
            grid[r * width + (c - 1)]
        } else {
            1
        };
        // column constraint: strictly increasing top to bottom; the cell
        // above is filled already (row-major fill) unless it belongs to λ
        let above = if r > 0 && c >= lambda.part(r - 1) {
            grid[(r - 1) * width + c]
        } else {
            0
        };
        let lo = left_min.max(above + 1);
        for v in lo..=nvals {
            if counts[v] >= mu.part(v - 1) {
                continue;
            }
            if !lattice_ok_after(cells, filling, idx, v, counts) {
                continue;
            }
            counts[v] += 1;
            filling[idx] = v;
            grid[r * width + c] = v;
            rec(
                idx + 1,
                cells,
                mu,
                nvals,
                width,
                lambda,
                filling,
                counts,
                grid,
                total,
            );
            grid[r * width + c] = 0;
            filling[idx] = 0;
            counts[v] -= 1;
        }
    }

    /// Exact lattice check: place `v` at position `idx` and verify the
    /// reverse reading word property on the filled prefix (all cells with
    /// index ≤ idx are determined because we fill row-major).
    fn lattice_ok_after(
        cells: &[(usize, usize)],
        filling: &[usize],
        idx: usize,
        v: usize,
        _counts: &[usize],
    ) -> bool {
        // replay the reverse reading word: rows top to bottom, each row right
        // to left, over cells 0..=idx (unfilled later cells are ignored —
        // they can only come later in the word within the same row, which is
        // to the LEFT in reading order, or in later rows).
        let mut seen = vec![0usize; 64];
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for (k, (r, _)) in cells.iter().enumerate().take(idx + 1) {
            let val = if k == idx { v } else { filling[k] };
            if rows.len() <= *r {
                rows.resize(*r + 1, Vec::new());
            }
            rows[*r].push(val);
        }
        for row in rows {
            for &val in row.iter().rev() {
                seen[val] += 1;
                if val > 1 && seen[val] > seen[val - 1] {
                    return false;
                }
            }
        }
        true
    }

    rec(
        0,
        &cells,
        mu,
        nvals,
        width.max(1),
        lambda,
        &mut filling,
        &mut counts,
        &mut grid,
        &mut total,
    );
    total
}

/// All ways to peel `γ` of degree `k` off `λ`: rows `(λ', γ, c^λ_{λ'γ})`
/// with `|λ'| = |λ| - k`.
pub fn lr_table(lambda: &Partition, k: usize) -> LRTable {
    let mut rows = Vec::new();
    if k <= lambda.degree() {
        for gamma in enumerate_partitions(k) {
            for lp in partitions_inside(lambda, lambda.degree() - k) {
                let c = lr_coefficient(&lp, &gamma, lambda);
                if c > 0 {
                    rows.push((lp.clone(), gamma.clone(), c));
                }
            }
        }
    }
    LRTable {
        lambda: lambda.clone(),
        rows,
    }
}

/// Partitions of `deg` whose diagram fits inside `bound`.
fn partitions_inside(bound: &Partition, deg: usize) -> Vec<Partition> {
    enumerate_partitions(deg)
        .into_iter()
        .filter(|p| bound.contains(p))
        .collect()
}

/// Predicted multiplicity of the labelled constituent `(λ', μ')` in the
/// `k`-th layer of the filtration of `V_λ ⊗ W_μ`:
/// `Σ_{|γ|=k-1} c^λ_{λ'γ} · c^μ_{μ'γ}`.
///
/// This closed form is a prediction; the brute-force decomposition in the
/// `socle` module is the ground truth it is tested against.
pub fn stable_layer_multiplicity(
    lambda: &Partition,
    mu: &Partition,
    lambda_p: &Partition,
    mu_p: &Partition,
    k: usize,
) -> u64 {
    assert!(k >= 1, "layers are 1-indexed");
    let removed = k - 1;
    if lambda_p.degree() + removed != lambda.degree() || mu_p.degree() + removed != mu.degree() {
        return 0;
    }
    enumerate_partitions(removed)
        .iter()
        .map(|gamma| lr_coefficient(lambda_p, gamma, lambda) * lr_coefficient(mu_p, gamma, mu))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent partition counter (no construction), used as the oracle
    /// for enumeration counts.
    fn count_partitions(k: usize, max: usize) -> u64 {
        if k == 0 {
            return 1;
        }
        (1..=k.min(max)).map(|p| count_partitions(k - p, p)).sum()
    }

    /// Count semistandard tableaux of shape λ with entries ≤ n by direct
    /// backtracking — the oracle for the Weyl dimension formula.
    fn ssyt_count(lambda: &Partition, n: usize) -> u64 {
        let rows = lambda.len();
        if rows == 0 {
            return 1;
        }
        let mut grid: Vec<Vec<usize>> = lambda.parts().iter().map(|&w| vec![0; w]).collect();
        fn rec(grid: &mut Vec<Vec<usize>>, r: usize, c: usize, n: usize) -> u64 {
            if r == grid.len() {
                return 1;
            }
            let (nr, nc) = if c + 1 < grid[r].len() {
                (r, c + 1)
            } else {
                (r + 1, 0)
            };
            let left = if c > 0 { grid[r][c - 1] } else { 1 };
            let above = if r > 0 && grid[r - 1].len() > c {
                grid[r - 1][c]
            } else {
                0
            };
            let lo = left.max(above + 1);
            let mut acc = 0;
            for v in lo..=n {
                grid[r][c] = v;
                acc += rec(grid, nr, nc, n);
            }
            grid[r][c] = 0;
            acc
        }
        rec(&mut grid, 0, 0, n)
    }

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_basics() {
        assert_eq!(enumerate_partitions(0), vec![Partition::empty()]);
        assert_eq!(
            enumerate_partitions(3),
            vec![p(&[3]), p(&[2, 1]), p(&[1, 1, 1])]
        );
        // count frozen from the recursive oracle
        assert_eq!(count_partitions(5, 5), 7);
        assert_eq!(enumerate_partitions(5).len(), 7);
        for k in 0..=8 {
            assert_eq!(
                enumerate_partitions(k).len() as u64,
                count_partitions(k, k.max(1))
            );
        }
    }

    #[test]
    fn weyl_dimensions() {
        for n in 1..=6 {
            assert_eq!(gl_dimension(&p(&[1]), n), n as u64);
        }
        assert_eq!(gl_dimension(&p(&[1, 1]), 4), 6);
        // frozen from the SSYT oracle below
        assert_eq!(gl_dimension(&p(&[2, 1]), 3), 8);
        assert_eq!(ssyt_count(&p(&[2, 1]), 3), 8);
    }

    #[test]
    fn weyl_matches_ssyt_enumeration() {
        for deg in 0..=4 {
            for lambda in enumerate_partitions(deg) {
                for n in 1..=5 {
                    assert_eq!(
                        gl_dimension(&lambda, n),
                        ssyt_count(&lambda, n),
                        "λ={lambda} N={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn weyl_weakly_increasing_in_rank() {
        for deg in 0..=4 {
            for lambda in enumerate_partitions(deg) {
                for n in 1..5 {
                    assert!(gl_dimension(&lambda, n) <= gl_dimension(&lambda, n + 1));
                }
            }
        }
    }

    #[test]
    fn mixed_dimension_adjoint() {
        for n in 2..=5 {
            assert_eq!(
                gl_dimension_mixed(&p(&[1]), &p(&[1]), n),
                (n * n - 1) as u64
            );
        }
    }

    #[test]
    fn lr_pieri_cases() {
        assert_eq!(lr_coefficient(&p(&[1]), &p(&[1]), &p(&[2])), 1);
        assert_eq!(lr_coefficient(&p(&[1, 1]), &p(&[1]), &p(&[2, 1])), 1);
        // frozen from the tableau enumeration itself; the classical first
        // example with a coefficient of 2
        assert_eq!(lr_coefficient(&p(&[2, 1]), &p(&[2, 1]), &p(&[3, 2, 1])), 2);
        // degree mismatch short-circuits
        assert_eq!(lr_coefficient(&p(&[1]), &p(&[1]), &p(&[3])), 0);
    }

    /// Independent Pieri-rule oracle: c^ν_{λ,(k)} is 1 exactly when ν/λ is a
    /// horizontal strip (no two added boxes in the same column).
    fn pieri(lambda: &Partition, k: usize, nu: &Partition) -> u64 {
        if nu.degree() != lambda.degree() + k || !nu.contains(lambda) {
            return 0;
        }
        let strip = (1..nu.len()).all(|r| nu.part(r) <= lambda.part(r - 1));
        u64::from(strip)
    }

    #[test]
    fn lr_matches_pieri_for_row_shapes() {
        for dl in 0..=3 {
            for lambda in enumerate_partitions(dl) {
                for k in 1..=3usize {
                    for nu in enumerate_partitions(dl + k) {
                        let expect = pieri(&lambda, k, &nu);
                        assert_eq!(
                            lr_coefficient(&lambda, &p(&[k]), &nu),
                            expect,
                            "λ={lambda} k={k} ν={nu}"
                        );
                    }
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lr_symmetric_in_lambda_mu(da in 0usize..=3, db in 0usize..=3, seed in 0usize..100) {
            let la = enumerate_partitions(da);
            let lb = enumerate_partitions(db);
            let lambda = &la[seed % la.len()];
            let mu = &lb[(seed / 7) % lb.len()];
            for nu in enumerate_partitions(da + db) {
                prop_assert_eq!(
                    lr_coefficient(lambda, mu, &nu),
                    lr_coefficient(mu, lambda, &nu)
                );
            }
        }
    }

    #[test]
    fn lr_tensor_dimension_identity() {
        // Σ_ν c^ν_{λμ} dim(ν, N) = dim(λ, N)·dim(μ, N) for N ≥ |λ|+|μ|
        for dl in 0..=2 {
            for dm in 0..=2 {
                for lambda in enumerate_partitions(dl) {
                    for mu in enumerate_partitions(dm) {
                        for n in (dl + dm).max(1)..=(dl + dm + 2) {
                            let lhs: u64 = enumerate_partitions(dl + dm)
                                .iter()
                                .map(|nu| lr_coefficient(&lambda, &mu, nu) * gl_dimension(nu, n))
                                .sum();
                            assert_eq!(
                                lhs,
                                gl_dimension(&lambda, n) * gl_dimension(&mu, n),
                                "λ={lambda} μ={mu} N={n}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn layer_multiplicity_examples() {
        // k=1 layer always carries the label itself exactly once
        assert_eq!(
            stable_layer_multiplicity(&p(&[2]), &p(&[1]), &p(&[2]), &p(&[1]), 1),
            1
        );
        for dl in 0..=3 {
            for dm in 0..=2 {
                for lambda in enumerate_partitions(dl) {
                    for mu in enumerate_partitions(dm) {
                        assert_eq!(stable_layer_multiplicity(&lambda, &mu, &lambda, &mu, 1), 1);
                    }
                }
            }
        }
        // single-box removals
        assert_eq!(
            stable_layer_multiplicity(&p(&[2]), &p(&[1]), &p(&[1]), &Partition::empty(), 2),
            1
        );
        assert_eq!(
            stable_layer_multiplicity(
                &p(&[1]),
                &p(&[1]),
                &Partition::empty(),
                &Partition::empty(),
                2
            ),
            1
        );
        // degree bookkeeping must match
        assert_eq!(
            stable_layer_multiplicity(&p(&[2]), &p(&[1]), &p(&[2]), &p(&[1]), 2),
            0
        );
    }

    #[test]
    fn lr_table_rows_consistent() {
        let t = lr_table(&p(&[3, 2, 1]), 2);
        assert!(!t.rows.is_empty());
        for (lp, gamma, c) in &t.rows {
            assert_eq!(lp.degree() + gamma.degree(), 6);
            assert_eq!(*c, lr_coefficient(lp, gamma, &p(&[3, 2, 1])));
        }
    }

    #[test]
    fn hook_length_counts() {
        assert_eq!(standard_tableaux(&Partition::empty()), 1);
        assert_eq!(standard_tableaux(&p(&[1])), 1);
        assert_eq!(standard_tableaux(&p(&[2, 1])), 2);
        assert_eq!(standard_tableaux(&p(&[2, 2])), 2);
        assert_eq!(standard_tableaux(&p(&[3, 1])), 3);
        // Σ_λ (f^λ)² = m!
        for m in 0..=5 {
            let total: u64 = enumerate_partitions(m)
                .iter()
                .map(|l| standard_tableaux(l).pow(2))
                .sum();
            assert_eq!(total, factorial(m));
        }
    }

    #[test]
    fn partition_text_syntax() {
        assert_eq!(Partition::parse("[3,1,1]").unwrap(), p(&[3, 1, 1]));
        assert_eq!(Partition::parse("[]").unwrap(), Partition::empty());
        assert_eq!(p(&[3, 1, 1]).to_string(), "[3,1,1]");
        assert_eq!(Partition::empty().to_string(), "[]");
        assert!(Partition::parse("[1,2]").is_err());
        assert!(Partition::parse("3,1").is_err());
        assert!(Partition::parse("[0]").is_err());
    }
}
