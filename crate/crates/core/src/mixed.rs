//! The normalized projector onto the orthocomplement of a family, and a
//! certificate that its range holds no vector of Schmidt rank `k` or more.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{FamilyParams, UebkFamily};
use crate::tensor::{
    gram, hermitian_eigen, identity_deviation, BipartiteVector, SubspaceBasis, TensorError,
};
use crate::verification::{generic_max_schmidt_rank, VerifyError};

/// Tolerance for the density-matrix invariants.
pub const STATE_TOL: f64 = 1e-12;
/// Eigenvalues above this count toward the range.
pub const RANGE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixedError {
    #[error("family spans the whole {dim}-dimensional space; the complement is empty")]
    EmptyComplement { dim: usize },
    #[error("family is not orthonormal: max Gram deviation {0:e}")]
    NotOrthonormal(f64),
    #[error("matrix is {rows}x{cols}, expected {dim}x{dim}")]
    Shape {
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("not Hermitian: max |rho - rho^dagger| = {0:e}")]
    NotHermitian(f64),
    #[error("trace {0} differs from 1")]
    Trace(f64),
    #[error("negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("state has an empty range")]
    ZeroState,
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    d: usize,
    dprime: usize,
    entries: DMatrix<C64>,
    origin: Option<FamilyParams>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within [`STATE_TOL`].
    pub fn new(
        d: usize,
        dprime: usize,
        entries: DMatrix<C64>,
        origin: Option<FamilyParams>,
    ) -> Result<Self, MixedError> {
        let dim = d * dprime;
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(MixedError::Shape {
                rows: entries.nrows(),
                cols: entries.ncols(),
                dim,
            });
        }
        let asym = (&entries - entries.adjoint())
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.norm()));
        if asym > STATE_TOL {
            return Err(MixedError::NotHermitian(asym));
        }
        let rho = Self {
            d,
            dprime,
            entries,
            origin,
        };
        let trace = rho.trace();
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(MixedError::Trace(trace));
        }
        let min = rho.eigenvalues()[0];
        if min < -STATE_TOL {
            return Err(MixedError::NotPositive(min));
        }
        Ok(rho)
    }

    /// `I / (d d')`.
    pub fn maximally_mixed(d: usize, dprime: usize) -> Result<Self, MixedError> {
        let dim = d * dprime;
        Self::new(
            d,
            dprime,
            DMatrix::identity(dim, dim) * C64::new(1.0 / dim as f64, 0.0),
            None,
        )
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dprime(&self) -> usize {
        self.dprime
    }

    pub fn dim(&self) -> usize {
        self.d * self.dprime
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn origin(&self) -> Option<&FamilyParams> {
        self.origin.as_ref()
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.entries).0
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&e| e > tol).count()
    }

    /// Orthonormal eigenvectors with eigenvalue above `tol`.
    pub fn range_basis(&self, tol: f64) -> Result<SubspaceBasis, MixedError> {
        let (values, vectors) = hermitian_eigen(&self.entries);
        let mut basis = Vec::new();
        for (c, &value) in values.iter().enumerate() {
            if value > tol {
                let amps = vectors.column(c).iter().copied().collect();
                basis.push(BipartiteVector::new(self.d, self.dprime, amps)?);
            }
        }
        if basis.is_empty() {
            return Err(MixedError::ZeroState);
        }
        Ok(SubspaceBasis::new(self.d, self.dprime, basis, RANGE_TOL)?)
    }
}

/// `(I - sum_i |phi_i><phi_i|) / (d d' - m)`.
pub fn rho_perp(family: &UebkFamily) -> Result<DensityMatrix, MixedError> {
    let params = family.params();
    let dim = params.ambient_dim();
    let m = family.len();
    if m >= dim {
        return Err(MixedError::EmptyComplement { dim });
    }
    let deviation = identity_deviation(&gram(family.vectors())?);
    if deviation > RANGE_TOL {
        return Err(MixedError::NotOrthonormal(deviation));
    }
    let mut entries = DMatrix::<C64>::identity(dim, dim);
    for v in family.vectors() {
        let col = nalgebra::DVector::from_column_slice(v.amps());
        entries -= &col * col.adjoint();
    }
    entries /= C64::new((dim - m) as f64, 0.0);
    DensityMatrix::new(params.d(), params.dprime(), entries, Some(params.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeSchmidtBound {
    pub max_rank_observed: usize,
    pub below_k: bool,
}

/// Generic Schmidt rank of the range of `rho`, compared against `k`.
pub fn range_schmidt_bound(
    rho: &DensityMatrix,
    k: usize,
    trials: usize,
    seed: u64,
    tol_rank: f64,
) -> Result<RangeSchmidtBound, MixedError> {
    let basis = rho.range_basis(RANGE_TOL)?;
    let max_rank_observed = generic_max_schmidt_rank(&basis, trials, seed, tol_rank)?;
    Ok(RangeSchmidtBound {
        max_rank_observed,
        below_k: max_rank_observed < k,
    })
}

/// Everything checked about a complementary state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoPerpCertificate {
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub rank: usize,
    pub expected_rank: usize,
    /// Largest `|lambda - 1/(dd'-m)|` over the eigenvalues in the range.
    pub max_eigenvalue_deviation: f64,
    /// Largest entry of `P^2 - P` for `P = (dd'-m) rho`.
    pub idempotence_deviation: f64,
    pub range: RangeSchmidtBound,
    pub ok: bool,
}

pub fn certify_rho_perp(
    rho: &DensityMatrix,
    members: usize,
    k: usize,
    trials: usize,
    seed: u64,
    tol_rank: f64,
) -> Result<RhoPerpCertificate, MixedError> {
    let expected_rank = rho.dim() - members;
    let level = 1.0 / expected_rank as f64;
    let values = rho.eigenvalues();
    let rank = values.iter().filter(|&&e| e > RANGE_TOL).count();
    let max_eigenvalue_deviation = values
        .iter()
        .filter(|&&e| e > RANGE_TOL)
        .map(|e| (e - level).abs())
        .fold(0.0, f64::max);
    let p = rho.entries() * C64::new(expected_rank as f64, 0.0);
    let idempotence_deviation = (&p * &p - &p)
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.norm()));
    let range = range_schmidt_bound(rho, k, trials, seed, tol_rank)?;
    let trace = rho.trace();
    let min_eigenvalue = values[0];
    let ok = (trace - 1.0).abs() <= STATE_TOL
        && min_eigenvalue >= -STATE_TOL
        && rank == expected_rank
        && max_eigenvalue_deviation <= STATE_TOL
        && idempotence_deviation <= RANGE_TOL
        && range.below_k;
    Ok(RhoPerpCertificate {
        trace,
        min_eigenvalue,
        rank,
        expected_rank,
        max_eigenvalue_deviation,
        idempotence_deviation,
        range,
        ok,
    })
}
