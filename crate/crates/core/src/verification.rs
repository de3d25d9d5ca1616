//! Certification of the UEBk properties of a family: member count,
//! orthonormality, per-member Schmidt rank, and unextendibility of the span.
//!
//! Unextendibility is checked two ways. The randomized probe samples generic
//! vectors of the orthocomplement; since the maximum rank over a matrix
//! subspace is attained on a dense open set, a seeded sample finds it with
//! probability one. The structural bound reads off the row/column support of
//! the complement basis and is a proof whenever it is below `k`.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{FamilyId, FamilyParams, ParamError, UebkFamily};
use crate::tensor::{
    gram, identity_deviation, random_unit_with, schmidt_coefficients, schmidt_rank,
    BipartiteVector, SubspaceBasis, TensorError, DEFAULT_TOL_RANK,
};

pub const DEFAULT_TOL_ORTH: f64 = 1e-10;
pub const DEFAULT_TRIALS: usize = 32;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("family is not orthonormal: max Gram deviation {deviation:e} > {tol:e}")]
    NotOrthonormal { deviation: f64, tol: f64 },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub tol_orth: f64,
    pub tol_rank: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tol_orth: DEFAULT_TOL_ORTH,
            tol_rank: DEFAULT_TOL_RANK,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
        }
    }
}

/// Orthonormal basis of the orthocomplement of the family's span.
///
/// Coordinate vectors are projected with `I - sum |phi><phi|` and then
/// orthonormalized by Gram-Schmidt with column pivoting, stopping once every
/// remaining residual norm is at most `tol`.
pub fn complement_basis(family: &UebkFamily, tol: f64) -> Result<SubspaceBasis, VerifyError> {
    let deviation = identity_deviation(&gram(family.vectors())?);
    if deviation > tol {
        return Err(VerifyError::NotOrthonormal { deviation, tol });
    }
    let (d, dprime) = (family.params().d(), family.params().dprime());
    let n = d * dprime;

    let mut columns: Vec<Vec<C64>> = (0..n)
        .map(|c| {
            let mut col = vec![C64::new(0.0, 0.0); n];
            col[c] = C64::new(1.0, 0.0);
            for v in family.vectors() {
                let coeff = v.amps()[c].conj();
                for (slot, a) in col.iter_mut().zip(v.amps()) {
                    *slot -= a * coeff;
                }
            }
            col
        })
        .collect();

    let mut chosen: Vec<Vec<C64>> = Vec::new();
    let norm = |x: &[C64]| x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    while let Some((best, best_norm)) = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (i, norm(c)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        if best_norm <= tol {
            break;
        }
        let mut q = columns.swap_remove(best);
        // second pass against the accepted directions for stability
        for u in &chosen {
            let overlap: C64 = u.iter().zip(&q).map(|(a, b)| a.conj() * b).sum();
            for (slot, a) in q.iter_mut().zip(u) {
                *slot -= a * overlap;
            }
        }
        let qn = norm(&q);
        if qn <= tol {
            continue;
        }
        q.iter_mut().for_each(|a| *a /= qn);
        for c in columns.iter_mut() {
            let overlap: C64 = q.iter().zip(c.iter()).map(|(a, b)| a.conj() * b).sum();
            for (slot, a) in c.iter_mut().zip(&q) {
                *slot -= a * overlap;
            }
        }
        chosen.push(q);
    }

    let vectors = chosen
        .into_iter()
        .map(|amps| BipartiteVector::new(d, dprime, amps))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubspaceBasis::new(d, dprime, vectors, tol)?)
}

/// Largest Schmidt rank seen over `trials` seeded random unit vectors of the
/// subspace. Trial `i` is the `i`-th draw of one ChaCha stream, so the result
/// is nondecreasing in `trials` for a fixed seed.
pub fn generic_max_schmidt_rank(
    basis: &SubspaceBasis,
    trials: usize,
    seed: u64,
    tol_rank: f64,
) -> Result<usize, VerifyError> {
    if trials == 0 {
        return Err(VerifyError::NoTrials);
    }
    if basis.is_empty() {
        return Ok(0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..trials {
        let v = random_unit_with(basis, &mut rng)?;
        best = best.max(schmidt_rank(&v, tol_rank)?);
    }
    Ok(best)
}

/// A set of rows whose entries are confined to a set of columns.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SupportBlock {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Where the vectors of a subspace can be nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplementSupport {
    pub row_support: Vec<usize>,
    pub col_support: Vec<usize>,
    /// Supported rows grouped by identical column signature, ordered by first row.
    pub row_groups: Vec<SupportBlock>,
}

impl ComplementSupport {
    /// Entries with modulus above `tol` in any basis vector count as support.
    pub fn from_basis(basis: &SubspaceBasis, tol: f64) -> Self {
        let mut signatures: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for v in basis.vectors() {
            for i in 0..v.d() {
                for j in 0..v.dprime() {
                    if v.amp(i, j).norm() > tol {
                        signatures.entry(i).or_default().insert(j);
                    }
                }
            }
        }
        let row_support: Vec<usize> = signatures.keys().copied().collect();
        let col_support: Vec<usize> = signatures
            .values()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (row, cols) in &signatures {
            groups
                .entry(cols.iter().copied().collect())
                .or_default()
                .push(*row);
        }
        let mut row_groups: Vec<SupportBlock> = groups
            .into_iter()
            .map(|(cols, rows)| SupportBlock { rows, cols })
            .collect();
        row_groups.sort_by_key(|g| g.rows[0]);
        Self {
            row_support,
            col_support,
            row_groups,
        }
    }
}

/// Upper bound on the Schmidt rank of every vector of the subspace:
/// `rank(M) <= sum_g rank(M restricted to the rows of g)`, and each block has
/// at most `min(|rows|, |cols|)` rank.
pub fn structural_rank_bound(support: &ComplementSupport, basis: &SubspaceBasis) -> usize {
    if basis.is_empty() {
        return 0;
    }
    let grouped: usize = support
        .row_groups
        .iter()
        .map(|g| g.rows.len().min(g.cols.len()))
        .sum();
    grouped
        .min(support.row_support.len())
        .min(support.col_support.len())
}

/// Closed-form member count and complement dimension.
pub fn expected_counts(params: &FamilyParams) -> Result<(usize, usize), ParamError> {
    params.validate()?;
    let members = params.expected_count();
    Ok((members, params.ambient_dim() - members))
}

fn range(lo: usize, hi: usize) -> Vec<usize> {
    (lo..hi).collect()
}

/// The complement support as written in the printed unextendibility
/// arguments, for the families that have one.
pub fn printed_complement_form(params: &FamilyParams) -> Option<Vec<SupportBlock>> {
    let (d, dprime, k) = (params.d(), params.dprime(), params.k());
    let tk = params.t() * k;
    let block = |rows, cols| SupportBlock { rows, cols };
    match params.family() {
        FamilyId::Prop1 => Some(vec![block(range(0, d), range(tk, dprime))]),
        FamilyId::Prop2 => {
            let q = params.q()?;
            Some(vec![
                block(range(0, d - q), range(tk, dprime)),
                block(range(d - q, d), range(0, dprime)),
            ])
        }
        FamilyId::Prop3 => Some(vec![block(range(0, params.r_d()), range(0, dprime))]),
        FamilyId::Prop5 => Some(vec![block(range(0, d), range(0, params.q()?))]),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrintedFormComparison {
    pub printed: Vec<SupportBlock>,
    pub observed: Vec<SupportBlock>,
    pub matches: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Count,
    Orthonormality,
    SchmidtRank,
    Unextendibility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountCheck {
    pub ok: bool,
    pub expected: usize,
    pub actual: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalityCheck {
    pub ok: bool,
    pub max_gram_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtCheck {
    pub ok: bool,
    /// Per member; 0 for a member too small to have a rank.
    pub ranks: Vec<usize>,
    /// Largest `|sigma_i - k^{-1/2}|` over the leading `k` Schmidt coefficients.
    pub max_coefficient_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericRank {
    pub max_rank: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: FamilyParams,
    pub count: CountCheck,
    pub orthonormality: OrthonormalityCheck,
    pub schmidt: SchmidtCheck,
    /// Absent when the family is not orthonormal.
    pub complement_dim: Option<usize>,
    pub generic_rank: Option<GenericRank>,
    pub structural_bound: Option<usize>,
    /// The structural bound, attached only when it proves unextendibility.
    pub certificate_bound: Option<usize>,
    pub complement_support: Option<ComplementSupport>,
    pub printed_form: Option<PrintedFormComparison>,
    pub unextendible_ok: bool,
    pub tolerances: VerifyConfig,
    pub failed: Vec<Check>,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn check_schmidt(family: &UebkFamily, config: &VerifyConfig) -> SchmidtCheck {
    let k = family.params().k();
    let target = 1.0 / (k as f64).sqrt();
    let mut ok = true;
    let mut ranks = Vec::with_capacity(family.len());
    let mut worst = 0.0f64;
    for v in family.vectors() {
        let rank = schmidt_rank(v, config.tol_rank).unwrap_or(0);
        let coefficients = schmidt_coefficients(v);
        let deviation = coefficients
            .iter()
            .take(k)
            .map(|s| (s - target).abs())
            .fold(0.0, f64::max);
        worst = worst.max(deviation);
        ok &= rank == k && deviation <= config.tol_orth;
        ranks.push(rank);
    }
    SchmidtCheck {
        ok,
        ranks,
        max_coefficient_deviation: worst,
    }
}

/// Run every check and collect the evidence. Failures are recorded in the
/// report, never returned as errors.
pub fn verify_family(family: &UebkFamily, config: &VerifyConfig) -> VerificationReport {
    let params = family.params().clone();
    let k = params.k();
    let mut failed = Vec::new();

    let count = CountCheck {
        ok: family.len() == params.expected_count(),
        expected: params.expected_count(),
        actual: family.len(),
    };
    if !count.ok {
        failed.push(Check::Count);
    }

    let max_gram_deviation = gram(family.vectors())
        .map(|g| identity_deviation(&g))
        .unwrap_or(f64::INFINITY);
    let orthonormality = OrthonormalityCheck {
        ok: max_gram_deviation <= config.tol_orth,
        max_gram_deviation,
    };
    if !orthonormality.ok {
        failed.push(Check::Orthonormality);
    }

    let schmidt = check_schmidt(family, config);
    if !schmidt.ok {
        failed.push(Check::SchmidtRank);
    }

    let mut complement_dim = None;
    let mut generic_rank = None;
    let mut structural_bound = None;
    let mut certificate_bound = None;
    let mut complement_support = None;
    let mut printed_form = None;
    let mut unextendible_ok = false;
    let trials = config.trials.max(1);

    if orthonormality.ok {
        if let Ok(basis) = complement_basis(family, config.tol_orth) {
            complement_dim = Some(basis.dim());
            if let Ok(max_rank) =
                generic_max_schmidt_rank(&basis, trials, config.seed, config.tol_rank)
            {
                generic_rank = Some(GenericRank {
                    max_rank,
                    trials,
                    seed: config.seed,
                });
                unextendible_ok = max_rank < k;
            }
            let support = ComplementSupport::from_basis(&basis, config.tol_orth);
            let bound = structural_rank_bound(&support, &basis);
            structural_bound = Some(bound);
            certificate_bound = (bound < k).then_some(bound);
            printed_form = printed_complement_form(&params).map(|printed| PrintedFormComparison {
                matches: printed == support.row_groups,
                printed,
                observed: support.row_groups.clone(),
            });
            complement_support = Some(support);
        }
    }
    if !unextendible_ok {
        failed.push(Check::Unextendibility);
    }

    let verdict = if failed.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    VerificationReport {
        params,
        count,
        orthonormality,
        schmidt,
        complement_dim,
        generic_rank,
        structural_bound,
        certificate_bound,
        complement_support,
        printed_form,
        unextendible_ok,
        tolerances: *config,
        failed,
        verdict,
    }
}

/// Projector onto the span of a family, for subspace comparisons.
pub fn span_projector(family: &UebkFamily) -> DMatrix<C64> {
    crate::tensor::projector_onto(family.params().ambient_dim(), family.vectors())
}
