//! Concrete finite-rank tensor spaces with Lie algebra actions.
//!
//! A [`TensorTypeSpec`] fixes a flavor and a rank:
//!
//! * `gl`: `V = Q^N` with dual `W`; the space is `T^{m,n} = V^{⊗m} ⊗ W^{⊗n}`
//!   and all elementary matrices `E_{ij}` act by derivations, with `W`-slots
//!   transforming by `x·f = -f∘x`.
//! * `o` / `sp`: `V = Q^{2N}` carries the split symmetric (resp.
//!   antisymmetric) form on the hyperbolic basis `v_1..v_N, w_1..w_N` with
//!   `(v_i, w_i) = 1`; the space is `T^m = V^{⊗m}` and the acting algebra is
//!   spanned by wedge (resp. symmetrized) products of basis vectors via
//!   `(v∧w)·x = (v,x)w - (x,w)v`.
//!
//! Basis tensors are enumerated in lexicographic order with `V`-slots before
//! `W`-slots, i.e. as radix-`d` numerals.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exactlin::{
    format_rational, parse_rational, rat, Rational, RowReducer, SparseMatrix, Subspace,
};
use crate::exactlin::{svec_add_scaled, SVec};
use crate::par;
use crate::partitions::Partition;
use crate::Result;

/// Which classical family acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "gl")]
    Gl,
    #[serde(rename = "o")]
    O,
    #[serde(rename = "sp")]
    Sp,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Gl => write!(f, "gl"),
            Flavor::O => write!(f, "o"),
            Flavor::Sp => write!(f, "sp"),
        }
    }
}

/// A concrete finite-rank tensor space `T^{m,n}` (or `T^m` for `o`/`sp`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorTypeSpec {
    #[serde(rename = "N")]
    pub rank: usize,
    pub m: usize,
    pub n: usize,
    pub flavor: Flavor,
}

impl TensorTypeSpec {
    pub fn new(flavor: Flavor, rank: usize, m: usize, n: usize) -> Result<Self> {
        if flavor != Flavor::Gl && n != 0 {
            return Err(Error::invalid(
                "orthogonal/symplectic flavors have no dual slots (n must be 0)",
            ));
        }
        Ok(TensorTypeSpec { rank, m, n, flavor })
    }

    pub fn gl(rank: usize, m: usize, n: usize) -> Self {
        TensorTypeSpec {
            rank,
            m,
            n,
            flavor: Flavor::Gl,
        }
    }

    pub fn orthogonal(rank: usize, m: usize) -> Self {
        TensorTypeSpec {
            rank,
            m,
            n: 0,
            flavor: Flavor::O,
        }
    }

    pub fn symplectic(rank: usize, m: usize) -> Self {
        TensorTypeSpec {
            rank,
            m,
            n: 0,
            flavor: Flavor::Sp,
        }
    }

    /// Dimension of the underlying vector space: `N` for `gl`, `2N` otherwise.
    pub fn vector_dim(&self) -> usize {
        match self.flavor {
            Flavor::Gl => self.rank,
            Flavor::O | Flavor::Sp => 2 * self.rank,
        }
    }

    pub fn slots(&self) -> usize {
        self.m + self.n
    }

    /// Dimension of the whole tensor space, `d^{m+n}`.
    pub fn tensor_dim(&self) -> usize {
        self.vector_dim().pow(self.slots() as u32)
    }

    /// Same flavor and rank with different degrees.
    pub fn with_degrees(&self, m: usize, n: usize) -> Result<Self> {
        TensorTypeSpec::new(self.flavor, self.rank, m, n)
    }
}

impl fmt::Display for TensorTypeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.flavor {
            Flavor::Gl => write!(f, "gl(N={}) T^({},{})", self.rank, self.m, self.n),
            _ => write!(f, "{}(d={}) T^{}", self.flavor, self.vector_dim(), self.m),
        }
    }
}

/// Multi-index of a basis tensor: `V`-slot digits then `W`-slot digits,
/// each in `0..d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MixedIndex {
    pub v_slots: Vec<usize>,
    pub w_slots: Vec<usize>,
}

/// Decode a basis id into its slot digits (`V` first).
pub(crate) fn decode_digits(d: usize, slots: usize, mut id: usize) -> Vec<usize> {
    let mut digits = vec![0; slots];
    for k in (0..slots).rev() {
        digits[k] = id % d;
        id /= d;
    }
    debug_assert_eq!(id, 0);
    digits
}

/// Encode slot digits back to the basis id.
pub(crate) fn encode_digits(d: usize, digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, dig| {
        debug_assert!(*dig < d);
        acc * d + dig
    })
}

impl MixedIndex {
    pub fn decode(spec: &TensorTypeSpec, id: usize) -> Self {
        let digits = decode_digits(spec.vector_dim(), spec.slots(), id);
        let (v, w) = digits.split_at(spec.m);
        MixedIndex {
            v_slots: v.to_vec(),
            w_slots: w.to_vec(),
        }
    }

    pub fn encode(&self, spec: &TensorTypeSpec) -> usize {
        let digits: Vec<usize> = self
            .v_slots
            .iter()
            .chain(self.w_slots.iter())
            .copied()
            .collect();
        encode_digits(spec.vector_dim(), &digits)
    }
}

/// Gram data for the split `o`/`sp` forms: `(v_i, w_i) = 1`, the spans of
/// the `v`s and of the `w`s are isotropic, and the `w`-against-`v` sign
/// distinguishes the two flavors.
#[derive(Clone, Copy, Debug)]
pub struct FormSpec {
    pub flavor: Flavor,
    pub rank: usize,
}

impl FormSpec {
    pub fn new(flavor: Flavor, rank: usize) -> Result<Self> {
        if flavor == Flavor::Gl {
            return Err(Error::invalid("gl has a pairing, not a form"));
        }
        Ok(FormSpec { flavor, rank })
    }

    /// `(e_a, e_b)` on the basis `v_1..v_N, w_1..w_N` (0-based ids).
    pub fn value(&self, a: usize, b: usize) -> Rational {
        let n = self.rank;
        if a < n && b == a + n {
            rat(1)
        } else if a >= n && b + n == a {
            match self.flavor {
                Flavor::O => rat(1),
                Flavor::Sp => rat(-1),
                Flavor::Gl => unreachable!(),
            }
        } else {
            rat(0)
        }
    }

    /// The full `2N × 2N` Gram matrix.
    pub fn gram(&self) -> SparseMatrix {
        let d = 2 * self.rank;
        SparseMatrix::from_triplets(
            d,
            d,
            (0..d).flat_map(|a| {
                (0..d).filter_map(move |b| {
                    let v = self.value(a, b);
                    (!v.is_zero()).then_some((a, b, v))
                })
            }),
        )
    }
}

pub(crate) fn form_value(spec: &TensorTypeSpec, a: usize, b: usize) -> Rational {
    FormSpec {
        flavor: spec.flavor,
        rank: spec.rank,
    }
    .value(a, b)
}

/// Label of a spanning-set generator of the acting Lie algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorLabel {
    /// Elementary matrix `E_{ij}` (0-based), `gl` flavor.
    E { row: usize, col: usize },
    /// Wedge (`o`) or symmetrized (`sp`) product of basis vectors `a, b`
    /// (0-based ids into `v_1..v_N, w_1..w_N`).
    Wedge { a: usize, b: usize },
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorLabel::E { row, col } => write!(f, "E({},{})", row + 1, col + 1),
            GeneratorLabel::Wedge { a, b } => write!(f, "X({},{})", a + 1, b + 1),
        }
    }
}

/// The spanning set of the acting algebra: all `E_{ij}` for `gl`, all wedge
/// products of pairs of basis vectors for `o` (`a < b`), all symmetrized
/// products for `sp` (`a ≤ b`).
pub fn generator_set(spec: &TensorTypeSpec) -> Vec<GeneratorLabel> {
    let mut out = Vec::new();
    match spec.flavor {
        Flavor::Gl => {
            for row in 0..spec.rank {
                for col in 0..spec.rank {
                    out.push(GeneratorLabel::E { row, col });
                }
            }
        }
        Flavor::O => {
            let d = spec.vector_dim();
            for a in 0..d {
                for b in a + 1..d {
                    out.push(GeneratorLabel::Wedge { a, b });
                }
            }
        }
        Flavor::Sp => {
            let d = spec.vector_dim();
            for a in 0..d {
                for b in a..d {
                    out.push(GeneratorLabel::Wedge { a, b });
                }
            }
        }
    }
    out
}

/// Cartan part of [`generator_set`]: the diagonal `E_{ii}`, or the
/// `v_i`-with-`w_i` products for `o`/`sp`; these act diagonally on basis
/// tensors.
pub(crate) fn cartan_labels(spec: &TensorTypeSpec) -> Vec<GeneratorLabel> {
    match spec.flavor {
        Flavor::Gl => (0..spec.rank)
            .map(|i| GeneratorLabel::E { row: i, col: i })
            .collect(),
        Flavor::O | Flavor::Sp => (0..spec.rank)
            .map(|i| GeneratorLabel::Wedge {
                a: i,
                b: i + spec.rank,
            })
            .collect(),
    }
}

/// Everything in [`generator_set`] except the Cartan part.
pub(crate) fn non_cartan_labels(spec: &TensorTypeSpec) -> Vec<GeneratorLabel> {
    let cartan: std::collections::HashSet<GeneratorLabel> =
        cartan_labels(spec).into_iter().collect();
    generator_set(spec)
        .into_iter()
        .filter(|l| !cartan.contains(l))
        .collect()
}

/// Raising operators `E_{ij}`, `i < j` (`gl` only).
pub(crate) fn raising_labels(rank: usize) -> Vec<GeneratorLabel> {
    let mut out = Vec::new();
    for i in 0..rank {
        for j in i + 1..rank {
            out.push(GeneratorLabel::E { row: i, col: j });
        }
    }
    out
}

fn validate_label(spec: &TensorTypeSpec, label: &GeneratorLabel) -> Result<()> {
    let ok = match (spec.flavor, label) {
        (Flavor::Gl, GeneratorLabel::E { row, col }) => *row < spec.rank && *col < spec.rank,
        (Flavor::O, GeneratorLabel::Wedge { a, b }) => a < b && *b < spec.vector_dim(),
        (Flavor::Sp, GeneratorLabel::Wedge { a, b }) => a <= b && *b < spec.vector_dim(),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::UnknownGenerator {
            detail: format!("{label} for {spec}"),
        })
    }
}

/// Image of a single slot digit under a generator, as `(new_digit, coeff)`
/// terms.
fn slot_action(
    spec: &TensorTypeSpec,
    label: &GeneratorLabel,
    digit: usize,
    is_w_slot: bool,
) -> Vec<(usize, Rational)> {
    match (spec.flavor, label) {
        (Flavor::Gl, GeneratorLabel::E { row, col }) => {
            if is_w_slot {
                // dual action: E_{ij}·f_k = -δ_{ki} f_j
                if digit == *row {
                    vec![(*col, rat(-1))]
                } else {
                    vec![]
                }
            } else if digit == *col {
                vec![(*row, rat(1))]
            } else {
                vec![]
            }
        }
        (_, GeneratorLabel::Wedge { a, b }) => {
            // (e_a ∧ e_b)·x = (e_a, x) e_b - (x, e_b) e_a
            let mut terms = Vec::new();
            let fa = form_value(spec, *a, digit);
            if !fa.is_zero() {
                terms.push((*b, fa));
            }
            let fb = form_value(spec, digit, *b);
            if !fb.is_zero() {
                terms.push((*a, -fb));
            }
            terms
        }
        _ => unreachable!("label validated against flavor"),
    }
}

fn merge_terms(mut terms: Vec<(usize, Rational)>) -> SVec {
    terms.sort_by_key(|(id, _)| *id);
    let mut out: SVec = Vec::with_capacity(terms.len());
    for (id, coeff) in terms {
        match out.last_mut() {
            Some((last_id, last)) if *last_id == id => *last += coeff,
            _ => out.push((id, coeff)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

/// Derivation action of a generator on one basis tensor: the sum of the
/// single-slot actions.
pub(crate) fn apply_to_basis(
    spec: &TensorTypeSpec,
    label: &GeneratorLabel,
    basis_id: usize,
) -> SVec {
    let d = spec.vector_dim();
    let digits = decode_digits(d, spec.slots(), basis_id);
    let mut terms: Vec<(usize, Rational)> = Vec::new();
    for (k, dig) in digits.iter().enumerate() {
        let is_w = k >= spec.m;
        for (new_digit, coeff) in slot_action(spec, label, *dig, is_w) {
            let mut nd = digits.clone();
            nd[k] = new_digit;
            terms.push((encode_digits(d, &nd), coeff));
        }
    }
    merge_terms(terms)
}

/// Linear extension of the generator action to sparse vectors.
pub(crate) fn apply_to_svec(spec: &TensorTypeSpec, label: &GeneratorLabel, v: &SVec) -> SVec {
    let mut acc: SVec = Vec::new();
    for (id, coeff) in v {
        let image = apply_to_basis(spec, label, *id);
        acc = svec_add_scaled(&acc, coeff, &image);
    }
    acc
}

/// Dual action `x·f = -f∘x` on a sparse functional, i.e. `-ρ(x)ᵀ f`.
pub(crate) fn dual_apply(spec: &TensorTypeSpec, label: &GeneratorLabel, f: &SVec) -> SVec {
    let mut acc: SVec = Vec::new();
    for (s, fs) in f {
        let pre = reverse_images(spec, label, *s);
        acc = svec_add_scaled(&acc, &-fs.clone(), &pre);
    }
    acc
}

/// The `s`-th row of the action matrix: all `(t, coeff)` with
/// `ρ(x)·e_t ∋ coeff·e_s`, recovered slot by slot.
pub(crate) fn reverse_images(spec: &TensorTypeSpec, label: &GeneratorLabel, s: usize) -> SVec {
    let d = spec.vector_dim();
    let digits = decode_digits(d, spec.slots(), s);
    let mut terms: Vec<(usize, Rational)> = Vec::new();
    for (k, dig) in digits.iter().enumerate() {
        let is_w = k >= spec.m;
        for c in 0..d {
            for (nd, coeff) in slot_action(spec, label, c, is_w) {
                if nd == *dig {
                    let mut src = digits.clone();
                    src[k] = c;
                    terms.push((encode_digits(d, &src), coeff));
                }
            }
        }
    }
    merge_terms(terms)
}

/// Public generator action on dense coefficient vectors.
pub fn generator_action(
    spec: &TensorTypeSpec,
    label: &GeneratorLabel,
    u: &[Rational],
) -> Result<Vec<Rational>> {
    validate_label(spec, label)?;
    if u.len() != spec.tensor_dim() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: spec.tensor_dim(),
        });
    }
    let sv: SVec = u
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect();
    let image = apply_to_svec(spec, label, &sv);
    let mut out = vec![Rational::zero(); u.len()];
    for (i, x) in image {
        out[i] = x;
    }
    Ok(out)
}

/// Full matrix of a generator on the tensor space.
pub fn generator_matrix(spec: &TensorTypeSpec, label: &GeneratorLabel) -> Result<SparseMatrix> {
    validate_label(spec, label)?;
    let dim = spec.tensor_dim();
    let label = *label;
    let spec = *spec;
    let cols = par::map_range(dim, |id| apply_to_basis(&spec, &label, id));
    let triplets = cols
        .into_iter()
        .enumerate()
        .flat_map(|(c, col)| col.into_iter().map(move |(r, v)| (r, c, v)));
    Ok(SparseMatrix::from_triplets(dim, dim, triplets))
}

/// Weight of a basis tensor under the Cartan labels, one coordinate per
/// `i < rank`: for `gl`, (#V-slots = i) − (#W-slots = i); for `o`/`sp`, the
/// eigenvalue of the i-th hyperbolic Cartan generator (`v_i ↦ -1`,
/// `w_i ↦ +1`).
pub(crate) fn basis_weight(spec: &TensorTypeSpec, basis_id: usize) -> Vec<i64> {
    let d = spec.vector_dim();
    let digits = decode_digits(d, spec.slots(), basis_id);
    let mut wt = vec![0i64; spec.rank];
    match spec.flavor {
        Flavor::Gl => {
            for (k, dig) in digits.iter().enumerate() {
                if k < spec.m {
                    wt[*dig] += 1;
                } else {
                    wt[*dig] -= 1;
                }
            }
        }
        Flavor::O | Flavor::Sp => {
            for dig in digits {
                if dig < spec.rank {
                    wt[dig] -= 1;
                } else {
                    wt[dig - spec.rank] += 1;
                }
            }
        }
    }
    wt
}

/// Contract a basis tensor along disjoint slot pairs (1-based original
/// slots). Returns the target basis id in the smaller space and the scalar
/// picked up, or `None` when the pairing annihilates the tensor.
pub(crate) fn contract_basis(
    spec: &TensorTypeSpec,
    pairs: &[(usize, usize)],
    basis_id: usize,
) -> Option<(usize, Rational)> {
    let d = spec.vector_dim();
    let digits = decode_digits(d, spec.slots(), basis_id);
    let mut coeff = Rational::one();
    let mut dead = vec![false; spec.slots()];
    match spec.flavor {
        Flavor::Gl => {
            for (i, j) in pairs {
                let vd = digits[i - 1];
                let wd = digits[spec.m + (j - 1)];
                if vd != wd {
                    return None;
                }
                dead[i - 1] = true;
                dead[spec.m + (j - 1)] = true;
            }
        }
        Flavor::O | Flavor::Sp => {
            for (i, j) in pairs {
                let val = form_value(spec, digits[i - 1], digits[j - 1]);
                if val.is_zero() {
                    return None;
                }
                coeff *= val;
                dead[i - 1] = true;
                dead[j - 1] = true;
            }
        }
    }
    let remaining: Vec<usize> = digits
        .iter()
        .zip(&dead)
        .filter(|(_, dead)| !**dead)
        .map(|(dig, _)| *dig)
        .collect();
    Some((encode_digits(d, &remaining), coeff))
}

fn validate_pairs(spec: &TensorTypeSpec, pairs: &[(usize, usize)]) -> Result<()> {
    let mut seen_v = std::collections::HashSet::new();
    let mut seen_w = std::collections::HashSet::new();
    for (i, j) in pairs {
        match spec.flavor {
            Flavor::Gl => {
                if *i < 1 || *i > spec.m || *j < 1 || *j > spec.n {
                    return Err(Error::SlotOutOfRange {
                        detail: format!("pair ({i},{j}) on {spec}"),
                    });
                }
                if !seen_v.insert(*i) || !seen_w.insert(*j) {
                    return Err(Error::RepeatedSlot {
                        detail: format!("pair ({i},{j})"),
                    });
                }
            }
            Flavor::O | Flavor::Sp => {
                if *i < 1 || *j <= *i || *j > spec.m {
                    return Err(Error::SlotOutOfRange {
                        detail: format!("pair ({i},{j}) on {spec}"),
                    });
                }
                if !seen_v.insert(*i) || !seen_v.insert(*j) {
                    return Err(Error::RepeatedSlot {
                        detail: format!("pair ({i},{j})"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Target space after contracting `k` pairs.
pub(crate) fn contraction_target(spec: &TensorTypeSpec, k: usize) -> TensorTypeSpec {
    match spec.flavor {
        Flavor::Gl => TensorTypeSpec::gl(spec.rank, spec.m - k, spec.n - k),
        _ => TensorTypeSpec {
            m: spec.m - 2 * k,
            ..*spec
        },
    }
}

/// Matrix of the single contraction `φ_{i,j}` (1-based slots; for `gl` the
/// pair is (V-slot, W-slot), for `o`/`sp` two V-slots with `i < j`).
pub fn contraction(spec: &TensorTypeSpec, i: usize, j: usize) -> Result<SparseMatrix> {
    compose_contractions(spec, &[(i, j)])
}

/// Matrix of the composition of contractions over a set of disjoint slot
/// pairs (1-based, referring to the original slots; the slot bookkeeping
/// after each step is delete-and-shift-left). The empty set yields the
/// identity.
pub fn compose_contractions(
    spec: &TensorTypeSpec,
    pairs: &[(usize, usize)],
) -> Result<SparseMatrix> {
    validate_pairs(spec, pairs)?;
    let k = pairs.len();
    let target = contraction_target(spec, k);
    let dim_src = spec.tensor_dim();
    let dim_tgt = target.tensor_dim();
    let spec = *spec;
    let pairs = pairs.to_vec();
    let cols = par::map_range(dim_src, |id| contract_basis(&spec, &pairs, id));
    let triplets = cols
        .into_iter()
        .enumerate()
        .filter_map(|(c, t)| t.map(|(r, v)| (r, c, v)));
    Ok(SparseMatrix::from_triplets(dim_tgt, dim_src, triplets))
}

/// A permutation of `0..degree` given by images.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::invalid("not a permutation"));
            }
            seen[i] = true;
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree());
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn sign(&self) -> i64 {
        let mut seen = vec![false; self.0.len()];
        let mut sign = 1i64;
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut at = start;
            while !seen[at] {
                seen[at] = true;
                at = self.0[at];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        sign
    }

    /// All of `S_n` in lexicographic order of image vectors.
    pub fn all(n: usize) -> Vec<Permutation> {
        use itertools::Itertools;
        if n == 0 {
            return vec![Permutation(Vec::new())];
        }
        (0..n).permutations(n).map(Permutation).collect()
    }
}

/// Place-permutation action on the tensor space: the factor in slot `k`
/// moves to slot `π(k)` (`V`-slots under `π`, `W`-slots under `σ`).
pub fn permutation_action(
    spec: &TensorTypeSpec,
    pi: &Permutation,
    sigma: &Permutation,
) -> Result<SparseMatrix> {
    if pi.degree() != spec.m || sigma.degree() != spec.n {
        return Err(Error::DegreeMismatch {
            detail: format!(
                "permutation degrees ({},{}) on {spec}",
                pi.degree(),
                sigma.degree()
            ),
        });
    }
    let d = spec.vector_dim();
    let dim = spec.tensor_dim();
    let triplets = (0..dim).map(|id| {
        let digits = decode_digits(d, spec.slots(), id);
        let mut out = vec![0usize; digits.len()];
        for (k, dig) in digits.iter().enumerate() {
            if k < spec.m {
                out[pi.apply(k)] = *dig;
            } else {
                out[spec.m + sigma.apply(k - spec.m)] = *dig;
            }
        }
        (encode_digits(d, &out), id, Rational::one())
    });
    Ok(SparseMatrix::from_triplets(dim, dim, triplets))
}

/// Row and (signed) column subgroup of the canonical standard tableau of
/// shape `λ` (row-reading filling), embedded in `S_m`.
fn tableau_groups(lambda: &Partition) -> (Vec<Permutation>, Vec<(Permutation, i64)>) {
    use itertools::Itertools;
    let m = lambda.degree();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    for &w in lambda.parts() {
        rows.push((next..next + w).collect());
        next += w;
    }
    let ncols = lambda.part(0);
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    for row in &rows {
        for (c, &entry) in row.iter().enumerate() {
            cols[c].push(entry);
        }
    }
    let subgroup = |blocks: &[Vec<usize>]| -> Vec<Permutation> {
        let mut elements = vec![Permutation::identity(m)];
        for block in blocks {
            let block_perms: Vec<Vec<usize>> =
                block.iter().copied().permutations(block.len()).collect();
            let mut grown = Vec::with_capacity(elements.len() * block_perms.len());
            for e in &elements {
                for bp in &block_perms {
                    let mut images = e.0.clone();
                    for (slot, &target) in block.iter().zip(bp.iter()) {
                        images[*slot] = target;
                    }
                    grown.push(Permutation(images));
                }
            }
            elements = grown;
        }
        elements
    };
    let row_group = subgroup(&rows);
    let col_group = subgroup(&cols)
        .into_iter()
        .map(|p| {
            let s = p.sign();
            (p, s)
        })
        .collect();
    (row_group, col_group)
}

/// Image of the Young symmetrizer of shape `λ` (canonical tableau, row
/// symmetrizer times column antisymmetrizer) acting on `T^{m,0}`; its
/// dimension equals the Weyl dimension of `V_λ`.
pub fn schur_projector_image(spec: &TensorTypeSpec, lambda: &Partition) -> Result<Subspace> {
    if spec.flavor != Flavor::Gl || spec.n != 0 {
        return Err(Error::invalid(
            "Schur projectors are computed on gl-flavor T^{m,0}",
        ));
    }
    if lambda.degree() != spec.m {
        return Err(Error::DegreeMismatch {
            detail: format!("|λ|={} but m={}", lambda.degree(), spec.m),
        });
    }
    let (row_group, col_group) = tableau_groups(lambda);
    let sigma_id = Permutation::identity(0);
    let mut row_sym = SparseMatrix::zero(spec.tensor_dim(), spec.tensor_dim());
    for p in &row_group {
        row_sym = row_sym.add(&permutation_action(spec, p, &sigma_id)?);
    }
    let mut col_antisym = SparseMatrix::zero(spec.tensor_dim(), spec.tensor_dim());
    for (q, sign) in &col_group {
        let term = permutation_action(spec, q, &sigma_id)?.scale(&rat(*sign));
        col_antisym = col_antisym.add(&term);
    }
    let symmetrizer = row_sym.mul(&col_antisym);
    Ok(Subspace::from_matrix_rows(&symmetrizer.transpose()))
}

/// Multiplicity of the irreducible `gl(N)` constituent labelled `(λ, μ)`
/// (polynomial weight on the `V`-slots, dual-polynomial on the `W`-slots)
/// inside a generator-stable subspace `s ⊆ T^{m,n}`.
///
/// Computed as the dimension of the joint highest-weight space: vectors in
/// `s` of weight `(λ, 0, …, 0, -reverse(μ))` killed by every raising
/// operator.
pub fn isotypic_multiplicity(
    spec: &TensorTypeSpec,
    s: &Subspace,
    lambda: &Partition,
    mu: &Partition,
) -> Result<u64> {
    if spec.flavor != Flavor::Gl {
        return Err(Error::invalid("isotypic decomposition is gl-flavor only"));
    }
    if s.ambient_dim() != spec.tensor_dim() {
        return Err(Error::DimensionMismatch {
            left: s.ambient_dim(),
            right: spec.tensor_dim(),
        });
    }
    for label in generator_set(spec) {
        for row in s.basis_rows() {
            let image = apply_to_svec(spec, &label, row);
            if !s.contains_svec(&image) {
                return Err(Error::NotStable {
                    generator: label.to_string(),
                });
            }
        }
    }
    Ok(highest_weight_multiplicity_in_rows(
        spec,
        s.basis_rows(),
        lambda,
        mu,
        false,
    ))
}

/// Highest-weight-space dimension over a list of basis rows spanning a
/// generator-stable subspace. `dual` selects the dual action `-ρ(x)ᵀ`
/// (for subspaces of the dual tensor space).
pub(crate) fn highest_weight_multiplicity_in_rows(
    spec: &TensorTypeSpec,
    rows: &[SVec],
    lambda: &Partition,
    mu: &Partition,
    dual: bool,
) -> u64 {
    if lambda.len() + mu.len() > spec.rank {
        return 0;
    }
    let target = mixed_weight(spec.rank, lambda, mu);
    highest_weight_space_dim(spec, rows, &raising_labels(spec.rank), &target, dual)
}

/// Dimension of `{v ∈ span(rows) : weight(v) = target, raising·v = 0}` for
/// an arbitrary raising set (e.g. that of a parabolic block subalgebra).
pub(crate) fn highest_weight_space_dim(
    spec: &TensorTypeSpec,
    rows: &[SVec],
    raising: &[GeneratorLabel],
    target: &[i64],
    dual: bool,
) -> u64 {
    let candidates: Vec<&SVec> = rows
        .iter()
        .filter(|row| {
            let (first, _) = row.first().expect("basis rows are nonzero");
            let wt = row_weight(spec, *first, dual);
            debug_assert!(
                row.iter().all(|(id, _)| row_weight(spec, *id, dual) == wt),
                "stable subspace bases are weight-homogeneous"
            );
            wt == target
        })
        .collect();
    if candidates.is_empty() {
        return 0;
    }
    let mut triplets: Vec<(usize, usize, Rational)> = Vec::new();
    let mut row_ids: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();
    for (block, label) in raising.iter().enumerate() {
        for (t, row) in candidates.iter().enumerate() {
            let image = if dual {
                dual_apply(spec, label, row)
            } else {
                apply_to_svec(spec, label, row)
            };
            for (id, coeff) in image {
                let next = row_ids.len();
                let r = *row_ids.entry((block, id)).or_insert(next);
                triplets.push((r, t, coeff));
            }
        }
    }
    let nrows = row_ids.len();
    let constraint = SparseMatrix::from_triplets(nrows, candidates.len(), triplets);
    crate::exactlin::nullspace(&constraint).dim() as u64
}

pub(crate) fn row_weight_of(spec: &TensorTypeSpec, row: &SVec, dual: bool) -> Vec<i64> {
    let (first, _) = row.first().expect("basis rows are nonzero");
    row_weight(spec, *first, dual)
}

fn row_weight(spec: &TensorTypeSpec, id: usize, dual: bool) -> Vec<i64> {
    let mut wt = basis_weight(spec, id);
    if dual {
        wt.iter_mut().for_each(|x| *x = -*x);
    }
    wt
}

/// The `gl(N)` weight `(λ, 0, …, 0, -reverse(μ))`.
pub(crate) fn mixed_weight(rank: usize, lambda: &Partition, mu: &Partition) -> Vec<i64> {
    (0..rank)
        .map(|i| {
            let poly = lambda.part(i) as i64;
            let anti = if i >= rank - mu.len() {
                mu.part(rank - 1 - i) as i64
            } else {
                0
            };
            poly - anti
        })
        .collect()
}

/// Smallest `d` such that every generator supported entirely on basis
/// indices `> d` annihilates `u`.
pub fn large_annihilator_corank(spec: &TensorTypeSpec, u: &[Rational]) -> usize {
    let sv: SVec = u
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect();
    if sv.is_empty() {
        return 0;
    }
    let pair_index = |digit: usize| -> usize {
        match spec.flavor {
            Flavor::Gl => digit,
            _ => digit % spec.rank,
        }
    };
    'outer: for d in 0..=spec.rank {
        for label in generator_set(spec) {
            let beyond = match label {
                GeneratorLabel::E { row, col } => row >= d && col >= d,
                GeneratorLabel::Wedge { a, b } => pair_index(a) >= d && pair_index(b) >= d,
            };
            if beyond && !apply_to_svec(spec, &label, &sv).is_empty() {
                continue 'outer;
            }
        }
        return d;
    }
    spec.rank
}

/// Re-express a vector on a lower-rank space inside a higher-rank space of
/// the same flavor and degrees (basis indices are preserved; only the radix
/// changes, and for `o`/`sp` the `w`-block shifts).
pub fn embed_vector(
    small: &TensorTypeSpec,
    big: &TensorTypeSpec,
    u: &[Rational],
) -> Result<Vec<Rational>> {
    if small.flavor != big.flavor || small.m != big.m || small.n != big.n {
        return Err(Error::invalid(
            "embedding requires equal flavor and degrees",
        ));
    }
    if small.rank > big.rank {
        return Err(Error::invalid("embedding must not shrink the rank"));
    }
    if u.len() != small.tensor_dim() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: small.tensor_dim(),
        });
    }
    let mut out = vec![Rational::zero(); big.tensor_dim()];
    let ds = small.vector_dim();
    let db = big.vector_dim();
    for (id, x) in u.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let digits = decode_digits(ds, small.slots(), id);
        let mapped: Vec<usize> = digits
            .iter()
            .map(|&dig| match small.flavor {
                Flavor::Gl => dig,
                _ => {
                    if dig < small.rank {
                        dig
                    } else {
                        dig - small.rank + big.rank
                    }
                }
            })
            .collect();
        out[encode_digits(db, &mapped)] = x.clone();
    }
    Ok(out)
}

/// Serialize a coefficient vector as a JSON array of `num/den` strings in
/// basis order.
pub fn vector_to_json(u: &[Rational]) -> serde_json::Value {
    serde_json::Value::Array(
        u.iter()
            .map(|x| serde_json::Value::String(format_rational(x)))
            .collect(),
    )
}

/// Parse a JSON array of `num/den` strings.
pub fn vector_from_json(v: &serde_json::Value) -> Result<Vec<Rational>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::parse("expected a JSON array of num/den strings"))?;
    arr.iter()
        .map(|x| {
            x.as_str()
                .ok_or_else(|| Error::parse("expected a num/den string"))
                .and_then(parse_rational)
        })
        .collect()
}

/// Joint kernel of a family of generators acting on the tensor space (or on
/// its dual when `dual` is set). Diagonal (Cartan) members of the family
/// cut the problem to a coordinate subspace before any elimination happens;
/// the result is identical to the naive stacked kernel.
pub(crate) fn joint_invariants(
    spec: &TensorTypeSpec,
    labels: &[GeneratorLabel],
    dual: bool,
) -> Subspace {
    let dim = spec.tensor_dim();
    let cartan: Vec<GeneratorLabel> = cartan_labels(spec)
        .into_iter()
        .filter(|c| labels.contains(c))
        .collect();
    let rest: Vec<GeneratorLabel> = labels
        .iter()
        .filter(|l| !cartan.contains(l))
        .copied()
        .collect();
    let allowed: Vec<usize> = (0..dim)
        .filter(|id| {
            cartan
                .iter()
                .all(|c| apply_to_basis(spec, c, *id).is_empty())
        })
        .collect();
    if allowed.is_empty() {
        return Subspace::zero(dim);
    }

    let spec_copy = *spec;
    let allowed_ref = &allowed;
    let blocks: Vec<Vec<(usize, SVec)>> = par::map_collect(rest, move |label| {
        let mut rows: std::collections::BTreeMap<usize, Vec<(usize, Rational)>> =
            std::collections::BTreeMap::new();
        if !dual {
            // u invariant ⇔ every generator kills it: constraint per image id
            for (pos, id) in allowed_ref.iter().enumerate() {
                for (target, coeff) in apply_to_basis(&spec_copy, &label, *id) {
                    rows.entry(target).or_default().push((pos, coeff));
                }
            }
        } else {
            // f invariant ⇔ f(x·e_src) = 0 for every source basis vector:
            // one constraint per src, with entries found through the rows of
            // the action matrix at the allowed coordinates
            for (pos, id) in allowed_ref.iter().enumerate() {
                for (src, coeff) in reverse_images(&spec_copy, &label, *id) {
                    rows.entry(src).or_default().push((pos, coeff));
                }
            }
        }
        rows.into_iter().map(|(r, e)| (r, merge_terms(e))).collect()
    });

    let mut red = RowReducer::new(allowed.len());
    for block in blocks {
        for (_, row) in block {
            red.add_row(row);
        }
    }
    let kernel = crate::exactlin::nullspace_of_rref(&red.into_matrix());
    let rows: Vec<SVec> = kernel
        .basis_rows()
        .iter()
        .map(|row| row.iter().map(|(c, v)| (allowed[*c], v.clone())).collect())
        .collect();
    let nrows = rows.len();
    Subspace::from_matrix_rows(&SparseMatrix::from_rows(nrows, dim, rows))
}

#[cfg(test)]
pub(crate) mod test_support {
    /// Deterministic small RNG for randomized property tests.
    pub struct SplitMix(pub u64);

    impl SplitMix {
        pub fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^ (z >> 31)
        }

        pub fn below(&mut self, n: usize) -> usize {
            (self.next() % n.max(1) as u64) as usize
        }

        pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
            lo + (self.next() % ((hi - lo + 1) as u64)) as i64
        }
    }
}
