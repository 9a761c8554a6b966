//! Walled Brauer and Brauer diagram algebras with a loop parameter.
//!
//! Diagrams are perfect matchings on the source and target slots. Walled
//! diagrams (for the `gl` flavor) pair V with V and W with W across the
//! wall, and V with W on the same side (cups on the source, caps on the
//! target). Brauer diagrams (for `o`/`sp`) are unrestricted matchings.
//! Composition glues two diagrams along the middle row; every closed loop
//! contributes one factor of the formal parameter `δ`.
//!
//! `to_endomorphism` represents a diagram on a concrete tensor space:
//! cups contract (pairing or form), caps insert the invariant element,
//! through strands copy slots. For `gl` and `o` this intertwines diagram
//! composition with `δ` specialized to the space dimension; the symplectic
//! side is validated through matrices directly, where compositions agree
//! up to a sign that depends on the composition pattern.

use std::collections::HashMap;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exactlin::{rat, Rational, RowReducer, SVec, SparseMatrix};
use crate::par;
use crate::tensorspace::{decode_digits, encode_digits, form_value, Flavor, TensorTypeSpec};
use crate::Result;

/// Formal loop parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopParameter {
    pub delta: Rational,
}

impl LoopParameter {
    pub fn new(delta: Rational) -> Self {
        LoopParameter { delta }
    }

    pub fn integer(d: i64) -> Self {
        LoopParameter { delta: rat(d) }
    }
}

/// Side of the wall a point sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointKind {
    SourceV(usize),
    SourceW(usize),
    TargetV(usize),
    TargetW(usize),
}

/// A walled Brauer diagram `(m, n) → (mt, nt)` with `m - mt = n - nt ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WalledDiagram {
    pub m: usize,
    pub n: usize,
    pub mt: usize,
    pub nt: usize,
    /// Sorted canonical list of matched point pairs (each pair sorted).
    pairs: Vec<(PointKind, PointKind)>,
}

/// A Brauer diagram `m → mt` with `m - mt` even and non-negative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BrauerDiagram {
    pub m: usize,
    pub mt: usize,
    pairs: Vec<(PointKind, PointKind)>,
}

fn canonical(mut pairs: Vec<(PointKind, PointKind)>) -> Vec<(PointKind, PointKind)> {
    for p in pairs.iter_mut() {
        if p.1 < p.0 {
            std::mem::swap(&mut p.0, &mut p.1);
        }
    }
    pairs.sort();
    pairs
}

impl WalledDiagram {
    /// Construct and validate a walled diagram from its matched pairs.
    pub fn new(
        m: usize,
        n: usize,
        mt: usize,
        nt: usize,
        pairs: Vec<(PointKind, PointKind)>,
    ) -> Result<Self> {
        if m < mt || n < nt || m - mt != n - nt {
            return Err(Error::DegreeMismatch {
                detail: format!("walled type ({m},{n})→({mt},{nt})"),
            });
        }
        let pairs = canonical(pairs);
        // every point matched exactly once, and the wall is respected
        let mut seen = std::collections::BTreeSet::new();
        for (a, b) in &pairs {
            let ok = matches!(
                (a, b),
                (PointKind::SourceV(_), PointKind::TargetV(_))
                    | (PointKind::SourceV(_), PointKind::SourceW(_))
                    | (PointKind::SourceW(_), PointKind::TargetW(_))
                    | (PointKind::TargetV(_), PointKind::TargetW(_))
            );
            if !ok {
                return Err(Error::invalid(format!("pair {a:?}–{b:?} crosses the wall")));
            }
            for p in [a, b] {
                let in_range = match p {
                    PointKind::SourceV(i) => *i < m,
                    PointKind::SourceW(i) => *i < n,
                    PointKind::TargetV(i) => *i < mt,
                    PointKind::TargetW(i) => *i < nt,
                };
                if !in_range || !seen.insert(*p) {
                    return Err(Error::invalid(format!("bad or repeated endpoint {p:?}")));
                }
            }
        }
        if seen.len() != m + n + mt + nt {
            return Err(Error::invalid("matching does not cover all endpoints"));
        }
        Ok(WalledDiagram {
            m,
            n,
            mt,
            nt,
            pairs,
        })
    }

    /// Degree drop `q = m - mt` (equals the number of source cups minus
    /// target caps).
    pub fn q(&self) -> usize {
        self.m - self.mt
    }

    pub fn pairs(&self) -> &[(PointKind, PointKind)] {
        &self.pairs
    }

    /// The identity endomorphism diagram of `(m, n)`.
    pub fn identity(m: usize, n: usize) -> Self {
        let mut pairs = Vec::new();
        for i in 0..m {
            pairs.push((PointKind::SourceV(i), PointKind::TargetV(i)));
        }
        for j in 0..n {
            pairs.push((PointKind::SourceW(j), PointKind::TargetW(j)));
        }
        WalledDiagram {
            m,
            n,
            mt: m,
            nt: n,
            pairs: canonical(pairs),
        }
    }

    /// Compose `self ∘ other` (apply `other` first); `other`'s target type
    /// must equal `self`'s source type. Closed loops each contribute `δ`.
    pub fn multiply(
        &self,
        other: &WalledDiagram,
        delta: &LoopParameter,
    ) -> Result<DiagramProduct<WalledDiagram>> {
        if self.m != other.mt || self.n != other.nt {
            return Err(Error::DegreeMismatch {
                detail: format!(
                    "composing ({},{})→({},{}) after ({},{})→({},{})",
                    self.m, self.n, self.mt, self.nt, other.m, other.n, other.mt, other.nt
                ),
            });
        }
        // glued universe: outer points are the composite's endpoints, middle
        // points are the shared (mt, nt) row of `other`
        let glue_other = |p: &PointKind| match p {
            PointKind::TargetV(i) => GluePoint::MidV(*i),
            PointKind::TargetW(i) => GluePoint::MidW(*i),
            other => GluePoint::Outer(*other),
        };
        let glue_self = |p: &PointKind| match p {
            PointKind::SourceV(i) => GluePoint::MidV(*i),
            PointKind::SourceW(i) => GluePoint::MidW(*i),
            PointKind::TargetV(i) => GluePoint::Outer(PointKind::TargetV(*i)),
            PointKind::TargetW(i) => GluePoint::Outer(PointKind::TargetW(*i)),
        };
        let mut adj: HashMap<GluePoint, Vec<GluePoint>> = HashMap::new();
        for (a, b) in &other.pairs {
            adj.entry(glue_other(a)).or_default().push(glue_other(b));
            adj.entry(glue_other(b)).or_default().push(glue_other(a));
        }
        for (a, b) in &self.pairs {
            adj.entry(glue_self(a)).or_default().push(glue_self(b));
            adj.entry(glue_self(b)).or_default().push(glue_self(a));
        }
        let (pairs, loops) = trace_paths(&adj);
        let diagram = WalledDiagram::new(other.m, other.n, self.mt, self.nt, pairs)?;
        let coefficient = power(&delta.delta, loops);
        Ok(DiagramProduct {
            diagram,
            loops,
            coefficient,
        })
    }

    /// JSON list of endpoint pairs with names `s:v:i`, `s:w:j`, `t:v:i`,
    /// `t:w:j` (1-based indices).
    pub fn to_json(&self) -> serde_json::Value {
        pairs_to_json(&self.pairs)
    }

    pub fn from_json(
        m: usize,
        n: usize,
        mt: usize,
        nt: usize,
        v: &serde_json::Value,
    ) -> Result<Self> {
        WalledDiagram::new(m, n, mt, nt, pairs_from_json(v)?)
    }
}

impl BrauerDiagram {
    pub fn new(m: usize, mt: usize, pairs: Vec<(PointKind, PointKind)>) -> Result<Self> {
        if mt > m || !(m - mt).is_multiple_of(2) {
            return Err(Error::DegreeMismatch {
                detail: format!("Brauer type {m}→{mt}"),
            });
        }
        let pairs = canonical(pairs);
        let mut seen = std::collections::BTreeSet::new();
        for (a, b) in &pairs {
            for p in [a, b] {
                let in_range = match p {
                    PointKind::SourceV(i) => *i < m,
                    PointKind::TargetV(i) => *i < mt,
                    _ => false,
                };
                if !in_range || !seen.insert(*p) {
                    return Err(Error::invalid(format!("bad or repeated endpoint {p:?}")));
                }
            }
        }
        if seen.len() != m + mt {
            return Err(Error::invalid("matching does not cover all endpoints"));
        }
        Ok(BrauerDiagram { m, mt, pairs })
    }

    pub fn q(&self) -> usize {
        (self.m - self.mt) / 2
    }

    pub fn pairs(&self) -> &[(PointKind, PointKind)] {
        &self.pairs
    }

    pub fn identity(m: usize) -> Self {
        let pairs = (0..m)
            .map(|i| (PointKind::SourceV(i), PointKind::TargetV(i)))
            .collect();
        BrauerDiagram {
            m,
            mt: m,
            pairs: canonical(pairs),
        }
    }

    pub fn multiply(
        &self,
        other: &BrauerDiagram,
        delta: &LoopParameter,
    ) -> Result<DiagramProduct<BrauerDiagram>> {
        if self.m != other.mt {
            return Err(Error::DegreeMismatch {
                detail: format!(
                    "composing {}→{} after {}→{}",
                    self.m, self.mt, other.m, other.mt
                ),
            });
        }
        let glue_other = |p: &PointKind| match p {
            PointKind::TargetV(i) => GluePoint::MidV(*i),
            other => GluePoint::Outer(*other),
        };
        let glue_self = |p: &PointKind| match p {
            PointKind::SourceV(i) => GluePoint::MidV(*i),
            other => GluePoint::Outer(*other),
        };
        let mut adj: HashMap<GluePoint, Vec<GluePoint>> = HashMap::new();
        for (a, b) in &other.pairs {
            adj.entry(glue_other(a)).or_default().push(glue_other(b));
            adj.entry(glue_other(b)).or_default().push(glue_other(a));
        }
        for (a, b) in &self.pairs {
            adj.entry(glue_self(a)).or_default().push(glue_self(b));
            adj.entry(glue_self(b)).or_default().push(glue_self(a));
        }
        let (pairs, loops) = trace_paths(&adj);
        let diagram = BrauerDiagram::new(other.m, self.mt, pairs)?;
        let coefficient = power(&delta.delta, loops);
        Ok(DiagramProduct {
            diagram,
            loops,
            coefficient,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        pairs_to_json(&self.pairs)
    }

    pub fn from_json(m: usize, mt: usize, v: &serde_json::Value) -> Result<Self> {
        BrauerDiagram::new(m, mt, pairs_from_json(v)?)
    }
}

/// A composed diagram with its loop count and `δ^loops` coefficient.
#[derive(Clone, Debug)]
pub struct DiagramProduct<D> {
    pub diagram: D,
    pub loops: usize,
    pub coefficient: Rational,
}

fn power(x: &Rational, e: usize) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..e {
        acc *= x;
    }
    acc
}

/// Point of the glued composition graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum GluePoint {
    /// Endpoint of the composite diagram.
    Outer(PointKind),
    MidV(usize),
    MidW(usize),
}

impl GluePoint {
    fn outer(&self) -> Option<PointKind> {
        match self {
            GluePoint::Outer(p) => Some(*p),
            _ => None,
        }
    }
}

/// Next point along a path through a middle point. Middle points carry
/// exactly two edges; parallel edges (adjacency `[z, z]`) occur when both
/// diagrams join the same two middle points and are traversed one by one.
fn step(adj: &HashMap<GluePoint, Vec<GluePoint>>, prev: GluePoint, at: GluePoint) -> GluePoint {
    let ns = &adj[&at];
    debug_assert_eq!(ns.len(), 2, "middle points are 2-regular");
    if ns[0] == ns[1] {
        ns[0]
    } else if ns[0] == prev {
        ns[1]
    } else {
        ns[0]
    }
}

/// Walk the glued graph: outer-to-outer paths become the composite
/// matching, pure middle cycles are counted as loops.
fn trace_paths(adj: &HashMap<GluePoint, Vec<GluePoint>>) -> (Vec<(PointKind, PointKind)>, usize) {
    let mut visited: std::collections::HashSet<GluePoint> = Default::default();
    let mut pairs = Vec::new();
    let mut loops = 0;
    for (&start, edges) in adj.iter() {
        if start.outer().is_none() || visited.contains(&start) {
            continue;
        }
        visited.insert(start);
        let mut prev = start;
        let mut at = edges[0];
        while at.outer().is_none() {
            visited.insert(at);
            let next = step(adj, prev, at);
            prev = at;
            at = next;
        }
        visited.insert(at);
        pairs.push((start.outer().unwrap(), at.outer().unwrap()));
    }
    for (&start, edges) in adj.iter() {
        if start.outer().is_some() || visited.contains(&start) {
            continue;
        }
        loops += 1;
        visited.insert(start);
        let mut prev = start;
        let mut at = edges[0];
        while at != start {
            visited.insert(at);
            let next = step(adj, prev, at);
            prev = at;
            at = next;
        }
    }
    (pairs, loops)
}

fn pairs_to_json(pairs: &[(PointKind, PointKind)]) -> serde_json::Value {
    let name = |p: &PointKind| match p {
        PointKind::SourceV(i) => format!("s:v:{}", i + 1),
        PointKind::SourceW(i) => format!("s:w:{}", i + 1),
        PointKind::TargetV(i) => format!("t:v:{}", i + 1),
        PointKind::TargetW(i) => format!("t:w:{}", i + 1),
    };
    serde_json::Value::Array(
        pairs
            .iter()
            .map(|(a, b)| serde_json::json!([name(a), name(b)]))
            .collect(),
    )
}

fn pairs_from_json(v: &serde_json::Value) -> Result<Vec<(PointKind, PointKind)>> {
    let parse_point = |s: &str| -> Result<PointKind> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::parse(format!("bad endpoint {s:?}")));
        }
        let idx: usize = parts[2]
            .parse::<usize>()
            .ok()
            .filter(|i| *i >= 1)
            .ok_or_else(|| Error::parse(format!("bad endpoint index in {s:?}")))?
            - 1;
        match (parts[0], parts[1]) {
            ("s", "v") => Ok(PointKind::SourceV(idx)),
            ("s", "w") => Ok(PointKind::SourceW(idx)),
            ("t", "v") => Ok(PointKind::TargetV(idx)),
            ("t", "w") => Ok(PointKind::TargetW(idx)),
            _ => Err(Error::parse(format!("bad endpoint {s:?}"))),
        }
    };
    let arr = v
        .as_array()
        .ok_or_else(|| Error::parse("expected a JSON array of endpoint pairs"))?;
    arr.iter()
        .map(|pair| {
            let two = pair
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::parse("each pair must be a 2-element array"))?;
            let a = parse_point(
                two[0]
                    .as_str()
                    .ok_or_else(|| Error::parse("endpoint must be a string"))?,
            )?;
            let b = parse_point(
                two[1]
                    .as_str()
                    .ok_or_else(|| Error::parse("endpoint must be a string"))?,
            )?;
            Ok((a, b))
        })
        .collect()
}

/// All walled diagrams `(m, n) → (mt, nt)`.
pub fn enumerate_walled_diagrams(
    m: usize,
    n: usize,
    mt: usize,
    nt: usize,
) -> Result<Vec<WalledDiagram>> {
    if m < mt || n < nt || m - mt != n - nt {
        return Err(Error::DegreeMismatch {
            detail: format!("walled type ({m},{n})→({mt},{nt})"),
        });
    }
    let q = m - mt;
    let mut out = Vec::new();
    // t = number of target caps; q + t source cups
    for t in 0..=mt.min(nt) {
        let cups = q + t;
        if cups > m || cups > n {
            continue;
        }
        for cup_v in (0..m).combinations(cups) {
            for cup_w in (0..n).permutations(cups) {
                for cap_v in (0..mt).combinations(t) {
                    for cap_w in (0..nt).permutations(t) {
                        let through_v: Vec<usize> = (0..m).filter(|i| !cup_v.contains(i)).collect();
                        let through_tv: Vec<usize> =
                            (0..mt).filter(|i| !cap_v.contains(i)).collect();
                        let through_w_src: Vec<usize> =
                            (0..n).filter(|j| !cup_w.contains(j)).collect();
                        let through_tw: Vec<usize> =
                            (0..nt).filter(|j| !cap_w.contains(j)).collect();
                        for tv_perm in through_tv.iter().copied().permutations(through_v.len()) {
                            for tw_perm in
                                through_tw.iter().copied().permutations(through_w_src.len())
                            {
                                let mut pairs = Vec::new();
                                for (a, b) in cup_v.iter().zip(cup_w.iter()) {
                                    pairs.push((PointKind::SourceV(*a), PointKind::SourceW(*b)));
                                }
                                for (a, b) in cap_v.iter().zip(cap_w.iter()) {
                                    pairs.push((PointKind::TargetV(*a), PointKind::TargetW(*b)));
                                }
                                for (a, b) in through_v.iter().zip(tv_perm.iter()) {
                                    pairs.push((PointKind::SourceV(*a), PointKind::TargetV(*b)));
                                }
                                for (a, b) in through_w_src.iter().zip(tw_perm.iter()) {
                                    pairs.push((PointKind::SourceW(*a), PointKind::TargetW(*b)));
                                }
                                out.push(WalledDiagram::new(m, n, mt, nt, pairs)?);
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.pairs.cmp(&b.pairs));
    out.dedup();
    Ok(out)
}

/// All Brauer diagrams `m → mt`: every perfect matching of the `m + mt`
/// points.
pub fn enumerate_brauer_diagrams(m: usize, mt: usize) -> Result<Vec<BrauerDiagram>> {
    if mt > m || !(m - mt).is_multiple_of(2) {
        return Err(Error::DegreeMismatch {
            detail: format!("Brauer type {m}→{mt}"),
        });
    }
    let points: Vec<PointKind> = (0..m)
        .map(PointKind::SourceV)
        .chain((0..mt).map(PointKind::TargetV))
        .collect();
    fn rec(
        free: &[PointKind],
        acc: &mut Vec<(PointKind, PointKind)>,
        out: &mut Vec<Vec<(PointKind, PointKind)>>,
    ) {
        if free.is_empty() {
            out.push(acc.clone());
            return;
        }
        let p = free[0];
        for idx in 1..free.len() {
            let q = free[idx];
            let rest: Vec<PointKind> = free
                .iter()
                .enumerate()
                .filter(|(pos, _)| *pos != 0 && *pos != idx)
                .map(|(_, v)| *v)
                .collect();
            acc.push((p, q));
            rec(&rest, acc, out);
            acc.pop();
        }
    }
    let mut matchings = Vec::new();
    if points.is_empty() {
        matchings.push(Vec::new());
    } else {
        rec(&points, &mut Vec::new(), &mut matchings);
    }
    matchings
        .into_iter()
        .map(|pairs| BrauerDiagram::new(m, mt, pairs))
        .collect()
}

/// Matrix of a walled diagram on `T^{m,n}` at the spec's rank (`gl`).
pub fn walled_to_endomorphism(d: &WalledDiagram, spec: &TensorTypeSpec) -> Result<SparseMatrix> {
    if spec.flavor != Flavor::Gl {
        return Err(Error::invalid("walled diagrams act on the gl flavor"));
    }
    if spec.m != d.m || spec.n != d.n {
        return Err(Error::DegreeMismatch {
            detail: format!("diagram source ({},{}) vs {spec}", d.m, d.n),
        });
    }
    let target = TensorTypeSpec::gl(spec.rank, d.mt, d.nt);
    let dim_src = spec.tensor_dim();
    let dim_tgt = target.tensor_dim();
    let nvec = spec.rank;
    let d = d.clone();
    let spec = *spec;
    let cols: Vec<Vec<(usize, Rational)>> = par::map_range(dim_src, move |id| {
        let digits = decode_digits(nvec, spec.slots(), id);
        let sv = |i: usize| digits[i];
        let sw = |j: usize| digits[spec.m + j];
        // check cups, set through strands, collect caps
        let mut fixed: Vec<Option<usize>> = vec![None; d.mt + d.nt];
        let mut caps: Vec<(usize, usize)> = Vec::new();
        for (a, b) in &d.pairs {
            match (a, b) {
                (PointKind::SourceV(i), PointKind::SourceW(j)) => {
                    if sv(*i) != sw(*j) {
                        return Vec::new();
                    }
                }
                (PointKind::SourceV(i), PointKind::TargetV(p)) => {
                    fixed[*p] = Some(sv(*i));
                }
                (PointKind::SourceW(j), PointKind::TargetW(q)) => {
                    fixed[d.mt + *q] = Some(sw(*j));
                }
                (PointKind::TargetV(p), PointKind::TargetW(q)) => {
                    caps.push((*p, d.mt + *q));
                }
                _ => unreachable!("validated walled pairs"),
            }
        }
        // expand the cap sums
        let mut assignments: Vec<Vec<Option<usize>>> = vec![fixed];
        for (p, q) in &caps {
            let mut grown = Vec::with_capacity(assignments.len() * nvec);
            for asn in &assignments {
                for c in 0..nvec {
                    let mut next = asn.clone();
                    next[*p] = Some(c);
                    next[*q] = Some(c);
                    grown.push(next);
                }
            }
            assignments = grown;
        }
        assignments
            .into_iter()
            .map(|asn| {
                let digits: Vec<usize> =
                    asn.into_iter().map(|x| x.expect("all slots set")).collect();
                (encode_digits(nvec, &digits), Rational::one())
            })
            .collect()
    });
    let triplets = cols
        .into_iter()
        .enumerate()
        .flat_map(|(c, col)| col.into_iter().map(move |(r, v)| (r, c, v)));
    Ok(SparseMatrix::from_triplets(dim_tgt, dim_src, triplets))
}

/// Matrix of a Brauer diagram on `T^m` at the spec's rank (`o`/`sp`):
/// cups contract through the form, caps insert the inverse form element
/// `Σ G_{ab} e_a⊗e_b`, strands copy.
pub fn brauer_to_endomorphism(d: &BrauerDiagram, spec: &TensorTypeSpec) -> Result<SparseMatrix> {
    if spec.flavor == Flavor::Gl {
        return Err(Error::invalid("Brauer diagrams act on the o/sp flavors"));
    }
    if spec.m != d.m {
        return Err(Error::DegreeMismatch {
            detail: format!("diagram source {} vs {spec}", d.m),
        });
    }
    let target = TensorTypeSpec { m: d.mt, ..*spec };
    let dim_src = spec.tensor_dim();
    let dim_tgt = target.tensor_dim();
    let dv = spec.vector_dim();
    let d = d.clone();
    let spec = *spec;
    let cols: Vec<Vec<(usize, Rational)>> = par::map_range(dim_src, move |id| {
        let digits = decode_digits(dv, spec.slots(), id);
        let mut coeff = Rational::one();
        let mut fixed: Vec<Option<usize>> = vec![None; d.mt];
        let mut caps: Vec<(usize, usize)> = Vec::new();
        for (a, b) in &d.pairs {
            match (a, b) {
                (PointKind::SourceV(i), PointKind::SourceV(j)) => {
                    // canonical order has i < j: contract (x_i, x_j)
                    let f = form_value(&spec, digits[*i], digits[*j]);
                    if f.is_zero() {
                        return Vec::new();
                    }
                    coeff *= f;
                }
                (PointKind::SourceV(i), PointKind::TargetV(p)) => {
                    fixed[*p] = Some(digits[*i]);
                }
                (PointKind::TargetV(p), PointKind::TargetV(q)) => {
                    caps.push((*p, *q));
                }
                _ => unreachable!("validated Brauer pairs"),
            }
        }
        let mut assignments: Vec<(Vec<Option<usize>>, Rational)> = vec![(fixed, coeff)];
        for (p, q) in &caps {
            let mut grown = Vec::new();
            for (asn, c0) in &assignments {
                for a in 0..dv {
                    for b in 0..dv {
                        let g = form_value(&spec, a, b);
                        if g.is_zero() {
                            continue;
                        }
                        let mut next = asn.clone();
                        next[*p] = Some(a);
                        next[*q] = Some(b);
                        grown.push((next, c0 * g));
                    }
                }
            }
            assignments = grown;
        }
        assignments
            .into_iter()
            .map(|(asn, c)| {
                let digits: Vec<usize> =
                    asn.into_iter().map(|x| x.expect("all slots set")).collect();
                (encode_digits(dv, &digits), c)
            })
            .collect()
    });
    let triplets = cols
        .into_iter()
        .enumerate()
        .flat_map(|(c, col)| col.into_iter().map(move |(r, v)| (r, c, v)));
    Ok(SparseMatrix::from_triplets(dim_tgt, dim_src, triplets))
}

/// Default ceiling on `dim(source)·dim(target)` for the brute-force
/// equivariant-map computation.
pub const DEFAULT_HOM_BUDGET: usize = 200_000;

/// Dimension of the space of generator-equivariant linear maps
/// `T(source) → T(target)`, by exact elimination on the weight-compatible
/// matrix cells.
pub fn hom_space_dim(
    source: &TensorTypeSpec,
    target: &TensorTypeSpec,
    budget: usize,
) -> Result<usize> {
    if source.flavor != target.flavor || source.rank != target.rank {
        return Err(Error::invalid(
            "hom spaces need matching flavor and rank on both sides",
        ));
    }
    let dim_s = source.tensor_dim();
    let dim_t = target.tensor_dim();
    let cells = dim_s * dim_t;
    if cells > budget {
        return Err(Error::BudgetExceeded { cells, budget });
    }

    // unknowns: matrix cells (r, c) with equal weights (Cartan constraint)
    let wt_s: Vec<Vec<i64>> = (0..dim_s)
        .map(|c| crate::tensorspace::basis_weight(source, c))
        .collect();
    let wt_t: Vec<Vec<i64>> = (0..dim_t)
        .map(|r| crate::tensorspace::basis_weight(target, r))
        .collect();
    let mut cells_by_weight: HashMap<&Vec<i64>, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for (c, w) in wt_s.iter().enumerate() {
        cells_by_weight.entry(w).or_default().0.push(c);
    }
    for (r, w) in wt_t.iter().enumerate() {
        cells_by_weight.entry(w).or_default().1.push(r);
    }
    let mut allowed: Vec<(usize, usize)> = Vec::new();
    for (cs, rs) in cells_by_weight.values() {
        for &c in cs {
            for &r in rs {
                allowed.push((r, c));
            }
        }
    }
    allowed.sort();
    let pos: HashMap<(usize, usize), usize> = allowed
        .iter()
        .enumerate()
        .map(|(p, cell)| (*cell, p))
        .collect();
    let mut rows_by_source: HashMap<usize, Vec<usize>> = HashMap::new();
    for ((r, c), p) in pos.iter() {
        let _ = p;
        rows_by_source.entry(*c).or_default().push(*r);
    }

    let labels = crate::tensorspace::non_cartan_labels(source);
    let source_c = *source;
    let target_c = *target;
    let allowed_ref = &allowed;
    let pos_ref = &pos;
    let rows_by_source_ref = &rows_by_source;
    type ConstraintBlock = Vec<((usize, usize, usize), SVec)>;
    let blocks: Vec<ConstraintBlock> = par::map_collect(
        labels.iter().enumerate().collect::<Vec<_>>(),
        move |(li, label)| {
            let mut constraints: std::collections::BTreeMap<(usize, usize, usize), SVec> =
                Default::default();
            // + ρ_T(x)_{r', r} M_{r, c}
            for (p, (r, c)) in allowed_ref.iter().enumerate() {
                for (r2, v) in crate::tensorspace::apply_to_basis(&target_c, label, *r) {
                    constraints.entry((li, r2, *c)).or_default().push((p, v));
                }
            }
            // − ρ_S(x)_{c, c'} M_{r, c}  (constraint indexed by (r, c'))
            for c_prime in 0..source_c.tensor_dim() {
                for (c, v) in crate::tensorspace::apply_to_basis(&source_c, label, c_prime) {
                    if let Some(rs) = rows_by_source_ref.get(&c) {
                        for &r in rs {
                            let p = pos_ref[&(r, c)];
                            constraints
                                .entry((li, r, c_prime))
                                .or_default()
                                .push((p, -v.clone()));
                        }
                    }
                }
            }
            constraints.into_iter().collect()
        },
    );

    let mut red = RowReducer::new(allowed.len());
    for block in blocks {
        for (_, mut row) in block {
            row.sort_by_key(|(c, _)| *c);
            let mut merged: SVec = Vec::new();
            for (c, v) in row {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|(_, v)| !v.is_zero());
            red.add_row(merged);
        }
    }
    Ok(allowed.len() - red.rank())
}

/// Rank of the span of all diagram matrices `T(source) → T(target)`.
pub fn diagram_span_rank(source: &TensorTypeSpec, target: &TensorTypeSpec) -> Result<usize> {
    if source.flavor != target.flavor || source.rank != target.rank {
        return Err(Error::invalid(
            "diagram spans need matching flavor and rank on both sides",
        ));
    }
    let dim_s = source.tensor_dim();
    let matrices: Vec<SparseMatrix> = match source.flavor {
        Flavor::Gl => {
            let diagrams = enumerate_walled_diagrams(source.m, source.n, target.m, target.n)?;
            let s = *source;
            par::map_collect(diagrams, move |d| {
                walled_to_endomorphism(&d, &s).expect("validated")
            })
        }
        Flavor::O | Flavor::Sp => {
            let diagrams = enumerate_brauer_diagrams(source.m, target.m)?;
            let s = *source;
            par::map_collect(diagrams, move |d| {
                brauer_to_endomorphism(&d, &s).expect("validated")
            })
        }
    };
    let mut red = RowReducer::new(dim_s * matrices.first().map_or(1, |m| m.nrows()));
    for m in &matrices {
        let flat: SVec = m
            .iter_entries()
            .map(|(r, c, v)| (r * dim_s + c, v.clone()))
            .collect();
        let mut flat = flat;
        flat.sort_by_key(|(i, _)| *i);
        red.add_row(flat);
    }
    Ok(red.rank())
}

/// One degree pair of the orthogonal-vs-symplectic comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OoSpEntry {
    pub from_degree: usize,
    pub to_degree: usize,
    pub dim_o: usize,
    pub dim_sp: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OoSpCompareReport {
    pub r: usize,
    #[serde(rename = "N")]
    pub rank: usize,
    pub entries: Vec<OoSpEntry>,
    pub all_equal: bool,
}

/// Compare `Hom(T^a, T^b)` dimensions for `o(2N)` and `sp(2N)` over all
/// degree pairs `a, b ≤ r`; requires the stable range `2N ≥ 2r`.
pub fn oo_sp_dimension_compare(r: usize, rank: usize, budget: usize) -> Result<OoSpCompareReport> {
    if rank < r {
        return Err(Error::OutOfStableRange {
            detail: format!("need 2N ≥ 2r, got N={rank}, r={r}"),
        });
    }
    let mut entries = Vec::new();
    for a in 0..=r {
        for b in 0..=r {
            let dim_o = hom_space_dim(
                &TensorTypeSpec::orthogonal(rank, a),
                &TensorTypeSpec::orthogonal(rank, b),
                budget,
            )?;
            let dim_sp = hom_space_dim(
                &TensorTypeSpec::symplectic(rank, a),
                &TensorTypeSpec::symplectic(rank, b),
                budget,
            )?;
            entries.push(OoSpEntry {
                from_degree: a,
                to_degree: b,
                dim_o,
                dim_sp,
            });
        }
    }
    let all_equal = entries.iter().all(|e| e.dim_o == e.dim_sp);
    Ok(OoSpCompareReport {
        r,
        rank,
        entries,
        all_equal,
    })
}
