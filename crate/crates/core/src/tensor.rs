//! Complex vectors on a bipartite product basis and the matrix operations
//! needed to reason about their Schmidt decomposition.
//!
//! A vector in `C^d ⊗ C^d'` is stored as a flat amplitude list where flat
//! index `i * d' + j` holds the amplitude of `|i>|j'>`. Reshaping that list
//! row-major gives the `d x d'` coefficient matrix whose singular values are
//! the Schmidt coefficients of the state.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Default relative threshold for counting a singular value as nonzero.
pub const DEFAULT_TOL_RANK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("dimensions must be positive, got {d}x{dprime}")]
    EmptyDimension { d: usize, dprime: usize },
    #[error("expected {expected} amplitudes for a {d}x{dprime} system, got {actual}")]
    LengthMismatch {
        d: usize,
        dprime: usize,
        expected: usize,
        actual: usize,
    },
    #[error("vectors live in different spaces: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("vector norm {norm:e} is below the rank tolerance {tol:e}")]
    NearZero { norm: f64, tol: f64 },
    #[error("subspace basis is empty")]
    EmptyBasis,
    #[error("basis vectors are not orthonormal: max Gram deviation {deviation:e} > {tol:e}")]
    NotOrthonormal { deviation: f64, tol: f64 },
}

/// Amplitudes of a pure state in `C^d ⊗ C^d'` over the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteVector {
    d: usize,
    dprime: usize,
    amps: Vec<C64>,
}

impl BipartiteVector {
    pub fn new(d: usize, dprime: usize, amps: Vec<C64>) -> Result<Self, TensorError> {
        if d == 0 || dprime == 0 {
            return Err(TensorError::EmptyDimension { d, dprime });
        }
        if amps.len() != d * dprime {
            return Err(TensorError::LengthMismatch {
                d,
                dprime,
                expected: d * dprime,
                actual: amps.len(),
            });
        }
        Ok(Self { d, dprime, amps })
    }

    pub fn zeros(d: usize, dprime: usize) -> Result<Self, TensorError> {
        Self::new(d, dprime, vec![C64::new(0.0, 0.0); d * dprime])
    }

    /// The product state `|i>|j'>`.
    pub fn basis(d: usize, dprime: usize, i: usize, j: usize) -> Result<Self, TensorError> {
        let mut v = Self::zeros(d, dprime)?;
        v.amps[i * dprime + j] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dprime(&self) -> usize {
        self.dprime
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d, self.dprime)
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    /// Amplitude of `|i>|j'>`.
    pub fn amp(&self, i: usize, j: usize) -> C64 {
        self.amps[i * self.dprime + j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64, TensorError> {
        if self.dims() != other.dims() {
            return Err(TensorError::DimensionMismatch(self.dims(), other.dims()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            d: self.d,
            dprime: self.dprime,
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: C64, other: &Self) -> Result<Self, TensorError> {
        if self.dims() != other.dims() {
            return Err(TensorError::DimensionMismatch(self.dims(), other.dims()));
        }
        Ok(Self {
            d: self.d,
            dprime: self.dprime,
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + c * b)
                .collect(),
        })
    }

    pub fn normalized(&self) -> Result<Self, TensorError> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(TensorError::NearZero { norm, tol: 0.0 });
        }
        Ok(self.scaled(C64::new(1.0 / norm, 0.0)))
    }

    /// Reshape into the `d x d'` coefficient matrix.
    pub fn matricize(&self) -> CoefficientMatrix {
        CoefficientMatrix {
            inner: DMatrix::from_row_slice(self.d, self.dprime, &self.amps),
        }
    }

    /// Column vector view, for use with dense linear algebra.
    pub(crate) fn to_column(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_column_slice(&self.amps)
    }
}

/// The `d x d'` grid of amplitudes; entry `(i, j)` is the amplitude of `|i>|j'>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    inner: DMatrix<C64>,
}

impl CoefficientMatrix {
    /// Build from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self, TensorError> {
        if rows == 0 || cols == 0 {
            return Err(TensorError::EmptyDimension {
                d: rows,
                dprime: cols,
            });
        }
        if entries.len() != rows * cols {
            return Err(TensorError::LengthMismatch {
                d: rows,
                dprime: cols,
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, entries),
        })
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    /// Flatten back to a [`BipartiteVector`] in row-major order.
    pub fn vectorize(&self) -> BipartiteVector {
        let (d, dprime) = (self.rows(), self.cols());
        let mut amps = Vec::with_capacity(d * dprime);
        for i in 0..d {
            for j in 0..dprime {
                amps.push(self.inner[(i, j)]);
            }
        }
        BipartiteVector { d, dprime, amps }
    }
}

/// Singular values of `m`, sorted descending, `min(rows, cols)` of them.
pub fn singular_values(m: &CoefficientMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.inner.clone().singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Schmidt coefficients of `v`, i.e. the singular values of its coefficient matrix.
pub fn schmidt_coefficients(v: &BipartiteVector) -> Vec<f64> {
    singular_values(&v.matricize())
}

/// Number of Schmidt coefficients above `tol_rank` times the largest one.
pub fn schmidt_rank(v: &BipartiteVector, tol_rank: f64) -> Result<usize, TensorError> {
    let norm = v.norm();
    if norm < tol_rank {
        return Err(TensorError::NearZero {
            norm,
            tol: tol_rank,
        });
    }
    Ok(rank_from_singular_values(
        &schmidt_coefficients(v),
        tol_rank,
    ))
}

pub(crate) fn rank_from_singular_values(values: &[f64], tol_rank: f64) -> usize {
    let largest = values.first().copied().unwrap_or(0.0);
    values.iter().filter(|&&s| s > tol_rank * largest).count()
}

/// Gram matrix with entry `(a, b) = <vs[a]|vs[b]>`.
pub fn gram(vs: &[BipartiteVector]) -> Result<DMatrix<C64>, TensorError> {
    if let Some(first) = vs.first() {
        if let Some(bad) = vs.iter().find(|v| v.dims() != first.dims()) {
            return Err(TensorError::DimensionMismatch(first.dims(), bad.dims()));
        }
    }
    let n = vs.len();
    let mut g = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            g[(a, b)] = vs[a].inner(&vs[b])?;
        }
    }
    Ok(g)
}

/// Largest entrywise modulus of `g - I`.
pub fn identity_deviation(g: &DMatrix<C64>) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..g.nrows() {
        for b in 0..g.ncols() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g[(a, b)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// An orthonormal list of vectors spanning a subspace of `C^d ⊗ C^d'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    d: usize,
    dprime: usize,
    vectors: Vec<BipartiteVector>,
}

impl SubspaceBasis {
    /// Checks that `vectors` are orthonormal within `tol_orth`.
    pub fn new(
        d: usize,
        dprime: usize,
        vectors: Vec<BipartiteVector>,
        tol_orth: f64,
    ) -> Result<Self, TensorError> {
        if d == 0 || dprime == 0 {
            return Err(TensorError::EmptyDimension { d, dprime });
        }
        if let Some(bad) = vectors.iter().find(|v| v.dims() != (d, dprime)) {
            return Err(TensorError::DimensionMismatch((d, dprime), bad.dims()));
        }
        let deviation = identity_deviation(&gram(&vectors)?);
        if deviation > tol_orth {
            return Err(TensorError::NotOrthonormal {
                deviation,
                tol: tol_orth,
            });
        }
        Ok(Self { d, dprime, vectors })
    }

    /// The whole space, spanned by the product basis.
    pub fn full(d: usize, dprime: usize) -> Result<Self, TensorError> {
        let mut vectors = Vec::with_capacity(d * dprime);
        for i in 0..d {
            for j in 0..dprime {
                vectors.push(BipartiteVector::basis(d, dprime, i, j)?);
            }
        }
        Self::new(d, dprime, vectors, 0.0)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dprime(&self) -> usize {
        self.dprime
    }

    pub fn ambient_dim(&self) -> usize {
        self.d * self.dprime
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[BipartiteVector] {
        &self.vectors
    }

    /// Orthogonal projector onto the span, as a dense `dd' x dd'` matrix.
    pub fn projector(&self) -> DMatrix<C64> {
        projector_onto(self.ambient_dim(), &self.vectors)
    }
}

pub(crate) fn projector_onto(n: usize, vectors: &[BipartiteVector]) -> DMatrix<C64> {
    let mut p = DMatrix::zeros(n, n);
    for v in vectors {
        let col = v.to_column();
        p += &col * col.adjoint();
    }
    p
}

/// Spectral norm of the difference of two projectors; 0 for equal subspaces,
/// 1 whenever the dimensions differ.
pub fn projector_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let diff = a - b;
    // diff is Hermitian, so its spectral norm is the largest |eigenvalue|.
    SymmetricEigen::new(diff)
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, e| acc.max(e.abs()))
}

/// Seeded random unit vector in the span of `basis`.
pub fn random_unit_in_span(
    basis: &SubspaceBasis,
    seed: u64,
) -> Result<BipartiteVector, TensorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unit_with(basis, &mut rng)
}

/// Draws complex Gaussian coefficients for each basis vector and normalizes
/// the combination.
pub(crate) fn random_unit_with<R: Rng>(
    basis: &SubspaceBasis,
    rng: &mut R,
) -> Result<BipartiteVector, TensorError> {
    if basis.is_empty() {
        return Err(TensorError::EmptyBasis);
    }
    let mut acc = vec![C64::new(0.0, 0.0); basis.ambient_dim()];
    for v in basis.vectors() {
        let c = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        for (slot, a) in acc.iter_mut().zip(v.amps()) {
            *slot += c * a;
        }
    }
    BipartiteVector::new(basis.d, basis.dprime, acc)?.normalized()
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}
