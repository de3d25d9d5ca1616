//! Builders for every unextendible entangled basis family, plus enumeration
//! of the families admissible at a given `(d, d', k)`.
//!
//! Every member has the shape
//!
//! ```text
//! k^{-1/2} * sum_{p=0}^{k-1} zeta_k^{n p} |row(p)>|col(p)'>
//! ```
//!
//! where `row` and `col` are injective index maps fixed by the family and the
//! member's label. Members are generated in lexicographic label order and
//! excluded labels are skipped during generation.

mod params;

pub use params::{
    allowed_m_values, enumerate_families, sweep_params, Convention, FamilyId, FamilyParams,
    ParamError,
};

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::tensor::{BipartiteVector, TensorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("{vectors} vectors but {labels} labels")]
    LabelCount { vectors: usize, labels: usize },
    #[error("vector {index} is {got:?}, expected {expected:?}")]
    VectorShape {
        index: usize,
        got: (usize, usize),
        expected: (usize, usize),
    },
}

/// `zeta_k^e = exp(2 pi i e / k)`.
pub fn phase(k: usize, e: i64) -> C64 {
    assert!(k >= 1, "phase needs k >= 1");
    let e = e.rem_euclid(k as i64);
    match (4 * e).checked_rem(k as i64) {
        // exact values on the axes
        Some(0) => match 4 * e / k as i64 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        },
        _ => C64::from_polar(1.0, std::f64::consts::TAU * e as f64 / k as f64),
    }
}

/// An ordered family of bipartite vectors together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct UebkFamily {
    params: FamilyParams,
    vectors: Vec<BipartiteVector>,
    labels: Vec<Vec<usize>>,
}

impl UebkFamily {
    /// Assemble a family without checking its mathematical properties; only
    /// parameters and shapes are validated. Used by file loading and by tests
    /// that need tampered families.
    pub fn from_parts(
        params: FamilyParams,
        vectors: Vec<BipartiteVector>,
        labels: Vec<Vec<usize>>,
    ) -> Result<Self, FamilyError> {
        params.validate()?;
        if vectors.len() != labels.len() {
            return Err(FamilyError::LabelCount {
                vectors: vectors.len(),
                labels: labels.len(),
            });
        }
        let expected = (params.d(), params.dprime());
        if let Some((index, v)) = vectors
            .iter()
            .enumerate()
            .find(|(_, v)| v.dims() != expected)
        {
            return Err(FamilyError::VectorShape {
                index,
                got: v.dims(),
                expected,
            });
        }
        Ok(Self {
            params,
            vectors,
            labels,
        })
    }

    pub fn params(&self) -> &FamilyParams {
        &self.params
    }

    pub fn vectors(&self) -> &[BipartiteVector] {
        &self.vectors
    }

    /// Index tuples in the construction's own convention: `(m, n, l)` for
    /// PROP1/PROP2, `(i, j, m, n)` for PROP3-6, `(i, j, n)` for EQ8, with
    /// `l`, `i` and `j` counted from 1 (EQ8's `j` from 0).
    pub fn labels(&self) -> &[Vec<usize>] {
        &self.labels
    }

    pub fn expected_count(&self) -> usize {
        self.params.expected_count()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn into_parts(self) -> (FamilyParams, Vec<BipartiteVector>, Vec<Vec<usize>>) {
        (self.params, self.vectors, self.labels)
    }
}

struct Builder {
    d: usize,
    dprime: usize,
    k: usize,
    vectors: Vec<BipartiteVector>,
    labels: Vec<Vec<usize>>,
}

impl Builder {
    fn new(p: &FamilyParams) -> Self {
        Self {
            d: p.d(),
            dprime: p.dprime(),
            k: p.k(),
            vectors: Vec::with_capacity(p.expected_count()),
            labels: Vec::with_capacity(p.expected_count()),
        }
    }

    /// Push `k^{-1/2} sum_p zeta^{np} |row(p)>|col(p)'>`.
    fn push(&mut self, label: Vec<usize>, n: usize, index: impl Fn(usize) -> (usize, usize)) {
        let scale = 1.0 / (self.k as f64).sqrt();
        let mut amps = vec![C64::new(0.0, 0.0); self.d * self.dprime];
        for p in 0..self.k {
            let (row, col) = index(p);
            amps[row * self.dprime + col] += phase(self.k, (n * p) as i64) * scale;
        }
        self.vectors.push(
            BipartiteVector::new(self.d, self.dprime, amps).expect("builder shape is consistent"),
        );
        self.labels.push(label);
    }

    fn finish(self, params: FamilyParams) -> UebkFamily {
        UebkFamily {
            params,
            vectors: self.vectors,
            labels: self.labels,
        }
    }
}

/// Build the family selected by `params`.
pub fn construct(params: &FamilyParams) -> Result<UebkFamily, FamilyError> {
    params.validate()?;
    Ok(build_unchecked(params))
}

/// Evaluate the construction formulas without the admissibility checks on
/// `q`. Shape-level preconditions (`k <= d <= d'` and the divisibility pattern
/// of the family) must still hold.
pub(crate) fn build_unchecked(params: &FamilyParams) -> UebkFamily {
    let mut b = Builder::new(params);
    let (d, dprime, k) = (params.d(), params.dprime(), params.k());
    let (s, t) = (params.s(), params.t());
    match params.family() {
        FamilyId::Prop1 | FamilyId::Prop2 => {
            let (rows, modulus) = match (params.family(), params.convention()) {
                (FamilyId::Prop1, _) => (d, d),
                (_, Some(Convention::Literal)) => {
                    let q = params.q().unwrap();
                    (d - q, d - k + q)
                }
                _ => {
                    let q = params.q().unwrap();
                    (d - q, d - q)
                }
            };
            for m in 0..rows {
                for n in 0..k {
                    for l in 1..=t {
                        b.push(vec![m, n, l], n, |p| ((p + m) % modulus, (l - 1) * k + p));
                    }
                }
            }
        }
        FamilyId::Prop3 | FamilyId::Prop4 | FamilyId::Prop5 => {
            // (modulus on columns, number of shifts m kept in the last column block)
            let (modulus, last_block_shifts) = match (params.family(), params.convention()) {
                (FamilyId::Prop3, _) => (dprime, k),
                (FamilyId::Prop4, Some(Convention::Repaired)) => {
                    let q = params.q().unwrap();
                    (dprime - q, k - q)
                }
                _ => {
                    let q = params.q().unwrap();
                    (dprime - k + q, q)
                }
            };
            for i in 1..=s {
                for j in 1..=t {
                    let shifts = if j == t { last_block_shifts } else { k };
                    for m in 0..shifts {
                        for n in 0..k {
                            b.push(vec![i, j, m, n], n, |p| {
                                ((i - 1) * k + p, ((j - 1) * k + p + m) % modulus)
                            });
                        }
                    }
                }
            }
        }
        FamilyId::Prop6 => {
            let q = params.q().unwrap();
            let modulus = d - k + q;
            for i in 1..=s {
                for j in 1..=t {
                    let shifts = if i == s { q } else { k };
                    for m in 0..shifts {
                        for n in 0..k {
                            b.push(vec![i, j, m, n], n, |p| {
                                (((i - 1) * k + p + m) % modulus, (j - 1) * k + p)
                            });
                        }
                    }
                }
            }
        }
        FamilyId::Eq8 => {
            let modulus = params.m_offset().unwrap();
            for i in 1..=s {
                for j in 0..modulus {
                    for n in 0..k {
                        b.push(vec![i, j, n], n, |p| {
                            let row = (i - 1) * k + p;
                            (row, (row + j) % modulus)
                        });
                    }
                }
            }
        }
    }
    b.finish(params.clone())
}

pub fn construct_prop1(d: usize, dprime: usize, k: usize) -> Result<UebkFamily, FamilyError> {
    construct(&FamilyParams::prop1(d, dprime, k)?)
}

pub fn construct_prop2(
    d: usize,
    dprime: usize,
    k: usize,
    q: usize,
    convention: Convention,
) -> Result<UebkFamily, FamilyError> {
    construct(&FamilyParams::prop2(d, dprime, k, q, convention)?)
}

pub fn construct_prop3(d: usize, dprime: usize, k: usize) -> Result<UebkFamily, FamilyError> {
    construct(&FamilyParams::prop3(d, dprime, k)?)
}

pub fn construct_prop4(
    d: usize,
    dprime: usize,
    k: usize,
    q: usize,
    convention: Convention,
) -> Result<UebkFamily, FamilyError> {
    construct(&FamilyParams::prop4(d, dprime, k, q, convention)?)
}

pub fn construct_prop5(
    d: usize,
    dprime: usize,
    k: usize,
    q: usize,
) -> Result<UebkFamily, FamilyError> {
    construct(&FamilyParams::prop5(d, dprime, k, q)?)
}

pub fn construct_prop6(
    d: usize,
    dprime: usize,
    k: usize,
    q: usize,
) -> Result<UebkFamily, FamilyError> {
    construct(&FamilyParams::prop6(d, dprime, k, q)?)
}

pub fn construct_eq8(
    d: usize,
    dprime: usize,
    k: usize,
    m_offset: usize,
) -> Result<UebkFamily, FamilyError> {
    construct(&FamilyParams::eq8(d, dprime, k, m_offset)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{
        gram, identity_deviation, schmidt_coefficients, schmidt_rank, DEFAULT_TOL_RANK,
    };

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    /// Rows and columns of the nonzero entries, checking the structural form.
    fn assert_structural_form(v: &BipartiteVector, k: usize) {
        let target = 1.0 / (k as f64).sqrt();
        let mut rows = std::collections::BTreeSet::new();
        let mut cols = std::collections::BTreeSet::new();
        let mut count = 0;
        for i in 0..v.d() {
            for j in 0..v.dprime() {
                let a = v.amp(i, j);
                if a.norm() > 1e-14 {
                    assert!((a.norm() - target).abs() < 1e-14);
                    rows.insert(i);
                    cols.insert(j);
                    count += 1;
                }
            }
        }
        assert_eq!((count, rows.len(), cols.len()), (k, k, k));
    }

    #[test]
    fn phase_examples() {
        assert!(close(phase(2, 1), C64::new(-1.0, 0.0)));
        assert!(close(phase(4, 1), C64::new(0.0, 1.0)));
        assert!(close(phase(3, 3), C64::new(1.0, 0.0)));
        assert!(close(phase(3, -1), phase(3, 2)));
        for e in 0..12 {
            assert!(close(phase(5, e), phase(5, e + 5)));
            let z = phase(7, e);
            assert!(
                (z - C64::from_polar(1.0, std::f64::consts::TAU * e as f64 / 7.0)).norm() < 1e-14
            );
        }
    }

    #[test]
    fn prop1_first_vector_is_bell_like() {
        let f = construct_prop1(3, 3, 2).unwrap();
        assert_eq!(f.len(), 6);
        assert_eq!(f.labels()[0], vec![0, 0, 1]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = &f.vectors()[0];
        assert!(close(v.amp(0, 0), C64::new(h, 0.0)));
        assert!(close(v.amp(1, 1), C64::new(h, 0.0)));
        assert!(v.amps().iter().filter(|a| a.norm() > 0.0).count() == 2);
        let s = schmidt_coefficients(v);
        assert!((s[0] - h).abs() < 1e-14 && (s[1] - h).abs() < 1e-14 && s[2].abs() < 1e-14);
    }

    #[test]
    fn prop1_counts_and_columns() {
        assert_eq!(construct_prop1(4, 5, 3).unwrap().len(), 12);
        let f = construct_prop1(3, 5, 2).unwrap();
        assert_eq!(f.len(), 12);
        for v in f.vectors() {
            for i in 0..3 {
                assert_eq!(v.amp(i, 4), C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn prop1_rejects_multiple_of_k() {
        assert!(matches!(
            construct_prop1(3, 4, 2),
            Err(FamilyError::Params(ParamError::Divisibility { .. }))
        ));
    }

    #[test]
    fn prop2_repaired_is_orthonormal_literal_is_not() {
        let repaired = construct_prop2(5, 7, 3, 1, Convention::Repaired).unwrap();
        assert_eq!(repaired.len(), 24);
        assert!(identity_deviation(&gram(repaired.vectors()).unwrap()) < 1e-12);

        let literal = construct_prop2(5, 7, 3, 1, Convention::Literal).unwrap();
        assert_eq!(literal.len(), 24);
        // (m, n, l) = (0, 0, 1) and (3, 0, 1) coincide: 3 mod 3 == 0.
        let a = literal
            .labels()
            .iter()
            .position(|l| *l == vec![0, 0, 1])
            .unwrap();
        let b = literal
            .labels()
            .iter()
            .position(|l| *l == vec![3, 0, 1])
            .unwrap();
        assert_eq!(literal.vectors()[a], literal.vectors()[b]);
        let g = gram(literal.vectors()).unwrap();
        assert!((g[(a, b)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prop2_rejects_empty_q_range() {
        assert!(matches!(
            construct_prop2(4, 5, 3, 1, Convention::Repaired),
            Err(FamilyError::Params(ParamError::NoAdmissibleQ { .. }))
        ));
    }

    #[test]
    fn prop2_beyond_row_budget_loses_rank() {
        // (5,5,4,q=2) passes the printed range but d - q = 3 < k rows remain.
        let p = FamilyParams::prop2(5, 5, 4, 2, Convention::Literal)
            .unwrap()
            .with_convention_unchecked(Convention::Repaired);
        let f = build_unchecked(&p);
        assert!(f
            .vectors()
            .iter()
            .all(|v| schmidt_rank(v, DEFAULT_TOL_RANK).unwrap() < 4));
    }

    #[test]
    fn prop3_examples() {
        let f = construct_prop3(3, 4, 2).unwrap();
        assert_eq!(f.len(), 8);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = &f.vectors()[0];
        assert_eq!(f.labels()[0], vec![1, 1, 0, 0]);
        assert!(close(v.amp(0, 0), C64::new(h, 0.0)) && close(v.amp(1, 1), C64::new(h, 0.0)));
        assert_eq!(construct_prop3(5, 6, 3).unwrap().len(), 18);
        for v in f.vectors() {
            for j in 0..4 {
                assert_eq!(v.amp(2, j), C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn prop4_examples() {
        assert_eq!(
            construct_prop4(4, 6, 3, 1, Convention::Literal)
                .unwrap()
                .len(),
            12
        );
        assert_eq!(
            construct_prop4(7, 9, 3, 1, Convention::Literal)
                .unwrap()
                .len(),
            42
        );
        assert_eq!(
            construct_prop4(4, 6, 3, 1, Convention::Repaired)
                .unwrap()
                .len(),
            15
        );
        assert!(matches!(
            construct_prop4(5, 6, 3, 1, Convention::Literal),
            Err(FamilyError::Params(ParamError::NoAdmissibleQ { .. }))
        ));
    }

    #[test]
    fn prop5_prop6_counts() {
        assert_eq!(construct_prop5(4, 4, 2, 1).unwrap().len(), 12);
        assert_eq!(construct_prop5(4, 6, 2, 1).unwrap().len(), 20);
        assert_eq!(construct_prop5(6, 6, 3, 2).unwrap().len(), 30);
        assert_eq!(construct_prop6(4, 4, 2, 1).unwrap().len(), 12);
        assert_eq!(construct_prop6(4, 6, 2, 1).unwrap().len(), 18);
        assert_eq!(construct_prop6(6, 6, 3, 1).unwrap().len(), 24);
        // columns beyond d'-k+q stay empty
        let f = construct_prop5(4, 6, 2, 1).unwrap();
        for v in f.vectors() {
            for i in 0..4 {
                assert_eq!(v.amp(i, 5), C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn prop5_exclusion_skips_labels() {
        let f = construct_prop5(4, 4, 2, 1).unwrap();
        assert!(f.labels().iter().all(|l| !(l[1] == 2 && l[2] >= 1)));
        assert!(f.labels().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn eq8_counts() {
        assert_eq!(construct_eq8(4, 8, 2, 7).unwrap().len(), 28);
        assert_eq!(construct_eq8(4, 7, 2, 6).unwrap().len(), 24);
        let f = construct_eq8(6, 13, 3, 12).unwrap();
        assert_eq!(f.len(), 72);
        for v in f.vectors() {
            for i in 0..6 {
                assert_eq!(v.amp(i, 12), C64::new(0.0, 0.0));
            }
        }
        assert!(matches!(
            construct_eq8(4, 8, 2, 6),
            Err(FamilyError::Params(ParamError::MNotAllowed { .. }))
        ));
    }

    #[test]
    fn structural_form_and_rank_across_sweep() {
        for p in sweep_params(9) {
            let f = construct(&p).unwrap();
            assert_eq!(f.len(), p.expected_count(), "{p}");
            for v in f.vectors() {
                assert_structural_form(v, p.k());
                assert_eq!(schmidt_rank(v, DEFAULT_TOL_RANK).unwrap(), p.k());
                for s in schmidt_coefficients(v).iter().take(p.k()) {
                    assert!((s - 1.0 / (p.k() as f64).sqrt()).abs() < 1e-12);
                }
            }
            assert!(
                identity_deviation(&gram(f.vectors()).unwrap()) < 1e-10,
                "{p}"
            );
        }
    }

    #[test]
    fn umeb_members_are_maximally_entangled() {
        for (family, d, dprime, m) in [
            (FamilyId::Prop1, 2, 3, None),
            (FamilyId::Prop1, 3, 4, None),
            (FamilyId::Eq8, 3, 7, Some(6)),
            (FamilyId::Eq8, 2, 3, Some(2)),
        ] {
            let f = construct(&FamilyParams::umeb(family, d, dprime, m).unwrap()).unwrap();
            for v in f.vectors() {
                let s = schmidt_coefficients(v);
                assert_eq!(s.len(), d);
                for x in s {
                    assert!((x - 1.0 / (d as f64).sqrt()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn from_parts_checks_shapes() {
        let f = construct_prop1(3, 3, 2).unwrap();
        let (p, mut vs, labels) = f.into_parts();
        assert!(matches!(
            UebkFamily::from_parts(p.clone(), vs.clone(), labels[1..].to_vec()),
            Err(FamilyError::LabelCount { .. })
        ));
        vs[2] = BipartiteVector::zeros(3, 4).unwrap();
        assert!(matches!(
            UebkFamily::from_parts(p, vs, labels),
            Err(FamilyError::VectorShape { index: 2, .. })
        ));
    }
}
