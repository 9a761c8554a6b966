//! Contraction filtrations of tensor spaces and their layer structure.
//!
//! `F_k` is the joint kernel of all `k`-fold contraction compositions
//! (`F_0 = 0`, and the chain is capped by the full space). In the
//! infinite-rank limit this chain is the socle filtration; at finite rank
//! the space is semisimple, so what this module verifies is the
//! combinatorial shadow that survives: exact chain inclusions, generator
//! stability, layer dimensions and layer decompositions. Every report
//! emitted here carries that caveat.
//!
//! Layers are analyzed against the orthogonal complement of `F_{k-1}`
//! inside `F_k` (exact over Q; the coordinate dot product works because
//! the generator span is closed under transpose), and observed
//! multiplicities are compared with the Littlewood-Richardson layer
//! predictor from [`crate::partitions`].

use itertools::Itertools;
use serde::Serialize;

use crate::error::Error;
use crate::exactlin::{nullspace, Rational, RowReducer, SVec, SparseMatrix, Subspace};
use crate::par;
use crate::partitions::{
    enumerate_partitions, gl_dimension_mixed, stable_layer_multiplicity, standard_tableaux,
    Partition,
};
use crate::tensorspace::{
    apply_to_basis, apply_to_svec, basis_weight, contract_basis, contraction_target, generator_set,
    mixed_weight, raising_labels, Flavor, TensorTypeSpec,
};
use crate::Result;

/// The chain `F_0 ⊂ F_1 ⊂ … ⊂ F_{kmax+1}` of contraction kernels.
#[derive(Clone, Debug)]
pub struct Filtration {
    pub spec: TensorTypeSpec,
    /// `chain[k]` is `F_k`; `chain[0]` is zero, the last entry the full
    /// space.
    pub chain: Vec<Subspace>,
    /// `pair_sets[k-1]` lists the contraction pair sets of size `k`.
    pair_sets: Vec<Vec<Vec<(usize, usize)>>>,
    /// `stacks[k-1]` is the stacked matrix of all `k`-fold compositions;
    /// its kernel is `F_k`.
    stacks: Vec<SparseMatrix>,
}

/// Maximal nontrivial kernel level: `min(m,n)` for `gl`, `⌊m/2⌋` otherwise.
fn level_count(spec: &TensorTypeSpec) -> usize {
    match spec.flavor {
        Flavor::Gl => spec.m.min(spec.n),
        _ => spec.m / 2,
    }
}

/// All unordered sets of `k` disjoint contraction pairs (1-based slots).
fn contraction_sets(spec: &TensorTypeSpec, k: usize) -> Vec<Vec<(usize, usize)>> {
    match spec.flavor {
        Flavor::Gl => {
            let mut out = Vec::new();
            for v_slots in (1..=spec.m).combinations(k) {
                for w_slots in (1..=spec.n).permutations(k) {
                    out.push(v_slots.iter().copied().zip(w_slots).collect());
                }
            }
            out
        }
        Flavor::O | Flavor::Sp => {
            // k disjoint pairs (i < j) within 1..=m
            fn rec(
                free: &[usize],
                k: usize,
                acc: &mut Vec<(usize, usize)>,
                out: &mut Vec<Vec<(usize, usize)>>,
            ) {
                if k == 0 {
                    out.push(acc.clone());
                    return;
                }
                if free.len() < 2 * k {
                    return;
                }
                let p = free[0];
                // either p stays uncontracted…
                rec(&free[1..], k, acc, out);
                // …or it pairs with a later slot
                for idx in 1..free.len() {
                    let q = free[idx];
                    let rest: Vec<usize> = free
                        .iter()
                        .enumerate()
                        .filter(|(pos, _)| *pos != 0 && *pos != idx)
                        .map(|(_, v)| *v)
                        .collect();
                    acc.push((p, q));
                    rec(&rest, k - 1, acc, out);
                    acc.pop();
                }
            }
            let free: Vec<usize> = (1..=spec.m).collect();
            let mut out = Vec::new();
            rec(&free, k, &mut Vec::new(), &mut out);
            out.sort();
            out.dedup();
            out
        }
    }
}

/// Stacked matrix of all `k`-fold contraction compositions.
fn stacked_contractions(spec: &TensorTypeSpec, sets: &[Vec<(usize, usize)>]) -> SparseMatrix {
    let target_dim = contraction_target(spec, sets[0].len()).tensor_dim();
    let dim = spec.tensor_dim();
    let spec_copy = *spec;
    let blocks: Vec<SparseMatrix> = par::map_collect(sets.to_vec(), move |pairs| {
        let triplets = (0..dim)
            .filter_map(|id| contract_basis(&spec_copy, &pairs, id).map(|(r, v)| (r, id, v)));
        SparseMatrix::from_triplets(target_dim, dim, triplets)
    });
    SparseMatrix::stack(&blocks)
}

fn build_filtration(spec: &TensorTypeSpec) -> Filtration {
    let kmax = level_count(spec);
    let dim = spec.tensor_dim();
    let mut chain = vec![Subspace::zero(dim)];
    let mut pair_sets = Vec::new();
    let mut stacks = Vec::new();
    for k in 1..=kmax {
        let sets = contraction_sets(spec, k);
        let stack = stacked_contractions(spec, &sets);
        chain.push(nullspace(&stack));
        pair_sets.push(sets);
        stacks.push(stack);
    }
    chain.push(Subspace::full(dim));
    Filtration {
        spec: *spec,
        chain,
        pair_sets,
        stacks,
    }
}

/// The contraction filtration of `T^{m,n}` (`gl` flavor).
pub fn filtration(spec: &TensorTypeSpec) -> Result<Filtration> {
    if spec.flavor != Flavor::Gl {
        return Err(Error::invalid(
            "use form_filtration for the o/sp pairing kernels",
        ));
    }
    Ok(build_filtration(spec))
}

/// The pairing-contraction filtration of `T^m` (`o`/`sp` flavors): `F_k` is
/// the joint kernel of all products of `k` disjoint pairing contractions.
pub fn form_filtration(spec: &TensorTypeSpec) -> Result<Filtration> {
    if spec.flavor == Flavor::Gl {
        return Err(Error::invalid("use filtration for the gl flavor"));
    }
    Ok(build_filtration(spec))
}

impl Filtration {
    pub fn levels(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn dims(&self) -> Vec<usize> {
        self.chain.iter().map(|s| s.dim()).collect()
    }

    /// Is `v` in `F_k`? Decided through the kernel description, not the
    /// stored basis.
    fn member_level(&self, k: usize, v: &SVec) -> bool {
        if k == 0 {
            return v.is_empty();
        }
        if k >= self.chain.len() - 1 {
            return true;
        }
        self.stacks[k - 1].matvec(v).is_empty()
    }

    /// Exact chain inclusions `F_{k-1} ⊆ F_k`.
    pub fn verify_chain(&self) -> bool {
        (1..self.chain.len()).all(|k| {
            self.chain[k - 1]
                .basis_rows()
                .iter()
                .all(|row| self.member_level(k, row))
        })
    }

    /// Every `F_k` is stable under every generator; the first violation is
    /// returned as an error naming the generator.
    pub fn verify_stability(&self) -> Result<()> {
        let labels = generator_set(&self.spec);
        for (k, level) in self.chain.iter().enumerate() {
            if k == 0 || k == self.chain.len() - 1 {
                continue;
            }
            for label in &labels {
                for row in level.basis_rows() {
                    let image = apply_to_svec(&self.spec, label, row);
                    if !self.member_level(k, &image) {
                        return Err(Error::NotStable {
                            generator: label.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Dimension bookkeeping of the defining exact sequences: the image of
    /// `F_k` under the stacked `(k-1)`-fold map has dimension
    /// `dim F_k - dim F_{k-1}` and lands inside the direct sum of the
    /// targets' first kernel levels.
    pub fn verify_exactness_bookkeeping(&self) -> bool {
        for k in 2..self.chain.len() {
            let psi = &self.stacks[k - 2];
            let sets = &self.pair_sets[k - 2];
            let target = contraction_target(&self.spec, k - 1);
            let target_dim = target.tensor_dim();
            let target_stack = if level_count(&target) >= 1 {
                Some(stacked_contractions(&target, &contraction_sets(&target, 1)))
            } else {
                None
            };
            let mut red = RowReducer::new(psi.nrows());
            for row in self.chain[k].basis_rows() {
                let image = psi.matvec(row);
                // the image must lie in ⊕_I F_1 of the target, blockwise
                if let Some(ts) = &target_stack {
                    for block in 0..sets.len() {
                        let lo = block * target_dim;
                        let piece: SVec = image
                            .iter()
                            .filter(|(r, _)| *r >= lo && *r < lo + target_dim)
                            .map(|(r, v)| (r - lo, v.clone()))
                            .collect();
                        if !ts.matvec(&piece).is_empty() {
                            return false;
                        }
                    }
                }
                red.add_row(image);
            }
            if red.rank() != self.chain[k].dim() - self.chain[k - 1].dim() {
                return false;
            }
        }
        true
    }

    /// Multiplicity of the labelled constituent `(λ', μ')` in the `k`-th
    /// layer `F_k / F_{k-1}`, by the quotient highest-weight space: vectors
    /// of the right weight in `F_k`, orthogonal to `F_{k-1}`, with every
    /// raising image falling back into `F_{k-1}`.
    fn layer_label_multiplicity(&self, k: usize, lambda: &Partition, mu: &Partition) -> u64 {
        let spec = &self.spec;
        if lambda.len() + mu.len() > spec.rank {
            return 0;
        }
        let target = mixed_weight(spec.rank, lambda, mu);
        let dim = spec.tensor_dim();
        let cols: Vec<usize> = (0..dim)
            .filter(|id| basis_weight(spec, *id) == target)
            .collect();
        if cols.is_empty() {
            return 0;
        }
        let pos: std::collections::HashMap<usize, usize> =
            cols.iter().enumerate().map(|(p, id)| (*id, p)).collect();

        let mut rows: Vec<SVec> = Vec::new();
        let mut push_constraint = |entries: SVec| {
            if !entries.is_empty() {
                rows.push(entries);
            }
        };

        // (1) membership in F_k
        if k <= self.stacks.len() {
            let stack = &self.stacks[k - 1];
            let mut per_target: std::collections::BTreeMap<usize, SVec> = Default::default();
            for (p, id) in cols.iter().enumerate() {
                let col: SVec = vec![(*id, Rational::from_integer(1.into()))];
                for (r, v) in stack.matvec(&col) {
                    per_target.entry(r).or_default().push((p, v));
                }
            }
            for (_, entries) in per_target {
                push_constraint(entries);
            }
        }

        // (2) orthogonality to F_{k-1} (weight-matching basis rows only;
        // other weights are orthogonal by disjoint support)
        for row in self.chain[k - 1].basis_rows() {
            let entries: SVec = row
                .iter()
                .filter_map(|(id, v)| pos.get(id).map(|p| (*p, v.clone())))
                .collect();
            push_constraint(entries);
        }

        // (3) raising operators push into F_{k-1}
        let raisings = raising_labels(spec.rank);
        for label in &raisings {
            let mut per_target: std::collections::BTreeMap<usize, SVec> = Default::default();
            for (p, id) in cols.iter().enumerate() {
                let image = apply_to_basis(spec, label, *id);
                if k == 1 {
                    for (r, v) in image {
                        per_target.entry(r).or_default().push((p, v));
                    }
                } else {
                    for (r, v) in self.stacks[k - 2].matvec(&image) {
                        per_target.entry(r).or_default().push((p, v));
                    }
                }
            }
            for (_, entries) in per_target {
                push_constraint(entries);
            }
        }

        let mut red = RowReducer::new(cols.len());
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            red.add_row(row);
        }
        (cols.len() - red.rank()) as u64
    }
}

/// One labelled constituent of a layer.
#[derive(Clone, Debug, Serialize)]
pub struct LayerEntry {
    pub lambda: Partition,
    pub mu: Partition,
    pub multiplicity: u64,
}

/// Decomposition of the layer `F_k / F_{k-1}`.
#[derive(Clone, Debug, Serialize)]
pub struct LayerDecomposition {
    pub k: usize,
    pub entries: Vec<LayerEntry>,
    pub layer_dim: usize,
}

/// Decompose the `k`-th layer (`1 ≤ k ≤ kmax+1`) into labelled
/// constituents (`gl` flavor).
pub fn layer_decomposition(f: &Filtration, k: usize) -> Result<LayerDecomposition> {
    if f.spec.flavor != Flavor::Gl {
        return Err(Error::invalid("o/sp layers are reported by dimension only"));
    }
    if k < 1 || k >= f.chain.len() {
        return Err(Error::invalid(format!(
            "layer index {k} out of range 1..={}",
            f.chain.len() - 1
        )));
    }
    let removed = k - 1;
    let lambda_deg = f.spec.m - removed;
    let mu_deg = f.spec.n - removed;
    let labels: Vec<(Partition, Partition)> = enumerate_partitions(lambda_deg)
        .into_iter()
        .cartesian_product(enumerate_partitions(mu_deg))
        .collect();
    let fr = &f;
    let mults: Vec<u64> = par::map_collect(labels.clone(), move |(lambda, mu)| {
        fr.layer_label_multiplicity(k, &lambda, &mu)
    });
    let entries: Vec<LayerEntry> = labels
        .into_iter()
        .zip(mults)
        .filter(|(_, m)| *m > 0)
        .map(|((lambda, mu), multiplicity)| LayerEntry {
            lambda,
            mu,
            multiplicity,
        })
        .collect();
    let layer_dim = f.chain[k].dim() - f.chain[k - 1].dim();
    let accounted: u64 = entries
        .iter()
        .map(|e| e.multiplicity * gl_dimension_mixed(&e.lambda, &e.mu, f.spec.rank))
        .sum();
    assert_eq!(
        accounted, layer_dim as u64,
        "layer dimension bookkeeping failed at k={k}"
    );
    Ok(LayerDecomposition {
        k,
        entries,
        layer_dim,
    })
}

/// Observed-vs-predicted entry for one layer label.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonEntry {
    pub lambda: Partition,
    pub mu: Partition,
    pub observed: u64,
    pub predicted: u64,
}

/// Per-layer comparison of brute-force multiplicities against the
/// Littlewood-Richardson layer predictor.
#[derive(Clone, Debug, Serialize)]
pub struct LayerComparison {
    pub k: usize,
    pub layer_dim: usize,
    pub entries: Vec<ComparisonEntry>,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StableComparisonReport {
    pub spec: TensorTypeSpec,
    /// Whether `N ≥ m + n`; outside this range the comparison is still
    /// emitted but flagged.
    pub stable_range: bool,
    pub layers: Vec<LayerComparison>,
    pub all_match: bool,
}

/// Compare every layer of the filtration against the stable prediction
/// `Σ_{λ,μ} f^λ f^μ · Σ_{|γ|=k-1} c^λ_{λ'γ} c^μ_{μ'γ}`.
pub fn compare_with_stable_prediction(f: &Filtration) -> Result<StableComparisonReport> {
    let spec = &f.spec;
    if spec.flavor != Flavor::Gl {
        return Err(Error::invalid("stable predictions are gl flavor"));
    }
    let stable_range = spec.rank >= spec.m + spec.n;
    let big_lambdas = enumerate_partitions(spec.m);
    let big_mus = enumerate_partitions(spec.n);
    let mut layers = Vec::new();
    let mut all_match = true;
    for k in 1..f.chain.len() {
        let decomp = layer_decomposition(f, k)?;
        let removed = k - 1;
        let mut entries = Vec::new();
        let mut matches = true;
        for lambda_p in enumerate_partitions(spec.m - removed) {
            for mu_p in enumerate_partitions(spec.n - removed) {
                let observed = decomp
                    .entries
                    .iter()
                    .find(|e| e.lambda == lambda_p && e.mu == mu_p)
                    .map(|e| e.multiplicity)
                    .unwrap_or(0);
                let mut predicted: u64 = big_lambdas
                    .iter()
                    .cartesian_product(big_mus.iter())
                    .map(|(lambda, mu)| {
                        standard_tableaux(lambda)
                            * standard_tableaux(mu)
                            * stable_layer_multiplicity(lambda, mu, &lambda_p, &mu_p, k)
                    })
                    .sum();
                // labels too tall for the rank never appear at finite rank
                if lambda_p.len() + mu_p.len() > spec.rank {
                    predicted = 0;
                }
                if observed != predicted {
                    matches = false;
                }
                entries.push(ComparisonEntry {
                    lambda: lambda_p.clone(),
                    mu: mu_p.clone(),
                    observed,
                    predicted,
                });
            }
        }
        all_match &= matches;
        layers.push(LayerComparison {
            k,
            layer_dim: decomp.layer_dim,
            entries,
            matches,
        });
    }
    Ok(StableComparisonReport {
        spec: *spec,
        stable_range,
        layers,
        all_match,
    })
}

/// Report JSON for a filtration (and optional comparison): chain dims and
/// per-layer content. The `note` field records the finite-rank semantics.
pub fn filtration_report_json(
    f: &Filtration,
    comparison: Option<&StableComparisonReport>,
) -> serde_json::Value {
    let layers: Vec<serde_json::Value> = (1..f.chain.len())
        .map(|k| {
            let dim = f.chain[k].dim() - f.chain[k - 1].dim();
            let (entries, stable_match) = match comparison {
                Some(c) => {
                    let layer = &c.layers[k - 1];
                    let entries: Vec<serde_json::Value> = layer
                        .entries
                        .iter()
                        .filter(|e| e.observed > 0)
                        .map(|e| {
                            serde_json::json!({
                                "lambda": e.lambda.to_string(),
                                "mu": e.mu.to_string(),
                                "mult": e.observed,
                            })
                        })
                        .collect();
                    (entries, serde_json::json!(layer.matches))
                }
                None => (Vec::new(), serde_json::Value::Null),
            };
            serde_json::json!({
                "k": k,
                "dim": dim,
                "entries": entries,
                "stable_match": stable_match,
            })
        })
        .collect();
    serde_json::json!({
        "note": "kernel chain of contraction compositions; at finite rank the space is semisimple, so chain dimensions, stability and layer content are what is verified",
        "spec": f.spec,
        "chain_dims": f.dims(),
        "layers": layers,
    })
}
