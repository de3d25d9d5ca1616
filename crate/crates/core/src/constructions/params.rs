use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("need 2 <= k < d <= d', got d={d}, d'={dprime}, k={k}")]
    DimensionOrder { d: usize, dprime: usize, k: usize },
    #[error("k = d is only accepted in UMEB mode for PROP1 and EQ8")]
    UmebNotAllowed,
    #[error("UMEB mode requires k = d, got k={k}, d={d}")]
    UmebRequiresKEqualsD { k: usize, d: usize },
    #[error("{family} requires {condition}")]
    Divisibility {
        family: FamilyId,
        condition: &'static str,
    },
    #[error("{family} requires a q parameter")]
    MissingQ { family: FamilyId },
    #[error("{family} does not take a q parameter")]
    UnexpectedQ { family: FamilyId },
    #[error("{family} needs {lo} <= q <= {hi}, got q={q}")]
    QOutOfRange {
        family: FamilyId,
        q: usize,
        lo: usize,
        hi: usize,
    },
    #[error("{family} admits no q for d={d}, d'={dprime}, k={k}")]
    NoAdmissibleQ {
        family: FamilyId,
        d: usize,
        dprime: usize,
        k: usize,
    },
    #[error("EQ8 requires an m offset")]
    MissingM,
    #[error("{family} does not take an m offset")]
    UnexpectedM { family: FamilyId },
    #[error("m={m} is not admissible; allowed values are {allowed:?}")]
    MNotAllowed { m: usize, allowed: Vec<usize> },
    #[error("{family} does not take a convention")]
    UnexpectedConvention { family: FamilyId },
    #[error("unknown family id {0:?}")]
    UnknownFamily(String),
    #[error("unknown convention {0:?}")]
    UnknownConvention(String),
}

/// Which construction a parameter set selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyId {
    Prop1,
    Prop2,
    Prop3,
    Prop4,
    Prop5,
    Prop6,
    Eq8,
}

impl FamilyId {
    pub const ALL: [FamilyId; 7] = [
        FamilyId::Prop1,
        FamilyId::Prop2,
        FamilyId::Prop3,
        FamilyId::Prop4,
        FamilyId::Prop5,
        FamilyId::Prop6,
        FamilyId::Eq8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyId::Prop1 => "PROP1",
            FamilyId::Prop2 => "PROP2",
            FamilyId::Prop3 => "PROP3",
            FamilyId::Prop4 => "PROP4",
            FamilyId::Prop5 => "PROP5",
            FamilyId::Prop6 => "PROP6",
            FamilyId::Eq8 => "EQ8",
        }
    }

    pub fn takes_q(self) -> bool {
        matches!(
            self,
            FamilyId::Prop2 | FamilyId::Prop4 | FamilyId::Prop5 | FamilyId::Prop6
        )
    }

    pub fn takes_convention(self) -> bool {
        matches!(self, FamilyId::Prop2 | FamilyId::Prop4)
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyId {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FamilyId::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ParamError::UnknownFamily(s.to_string()))
    }
}

/// How to read the shift modulus of PROP2 and PROP4.
///
/// `Literal` follows the printed formulas (`mod d-k+q` for PROP2, `mod d'-k+q`
/// for PROP4). `Repaired` uses `mod d-q` / `mod d'-q`, which for PROP2 is the
/// only reading that is orthonormal with `(d-q)tk` members, and for PROP4 is
/// the only reading whose complement stays below Schmidt rank `k` on the
/// printed range `1 <= q < k-r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Convention {
    Literal,
    #[default]
    Repaired,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Convention::Literal => "literal",
            Convention::Repaired => "repaired",
        })
    }
}

impl FromStr for Convention {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "literal" => Ok(Convention::Literal),
            "repaired" => Ok(Convention::Repaired),
            _ => Err(ParamError::UnknownConvention(s.to_string())),
        }
    }
}

/// The discrete parameters selecting one construction.
///
/// Derived quantities (`s`, `t`, and both remainders) are always recomputed
/// from `(d, d', k)`. All constructors validate; a deserialized value must be
/// passed through [`FamilyParams::validate`] before use.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilyParams {
    family: FamilyId,
    d: usize,
    dprime: usize,
    k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m_offset: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    convention: Option<Convention>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    umeb: bool,
}

impl FamilyParams {
    /// General constructor. `convention` defaults to `Repaired` for PROP2 and
    /// PROP4 and must be absent for the other families.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        family: FamilyId,
        d: usize,
        dprime: usize,
        k: usize,
        q: Option<usize>,
        m_offset: Option<usize>,
        convention: Option<Convention>,
        umeb: bool,
    ) -> Result<Self, ParamError> {
        let convention = if family.takes_convention() {
            Some(convention.unwrap_or_default())
        } else {
            convention
        };
        let p = Self {
            family,
            d,
            dprime,
            k,
            q,
            m_offset,
            convention,
            umeb,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn prop1(d: usize, dprime: usize, k: usize) -> Result<Self, ParamError> {
        Self::from_parts(FamilyId::Prop1, d, dprime, k, None, None, None, false)
    }

    pub fn prop2(
        d: usize,
        dprime: usize,
        k: usize,
        q: usize,
        convention: Convention,
    ) -> Result<Self, ParamError> {
        Self::from_parts(
            FamilyId::Prop2,
            d,
            dprime,
            k,
            Some(q),
            None,
            Some(convention),
            false,
        )
    }

    pub fn prop3(d: usize, dprime: usize, k: usize) -> Result<Self, ParamError> {
        Self::from_parts(FamilyId::Prop3, d, dprime, k, None, None, None, false)
    }

    pub fn prop4(
        d: usize,
        dprime: usize,
        k: usize,
        q: usize,
        convention: Convention,
    ) -> Result<Self, ParamError> {
        Self::from_parts(
            FamilyId::Prop4,
            d,
            dprime,
            k,
            Some(q),
            None,
            Some(convention),
            false,
        )
    }

    pub fn prop5(d: usize, dprime: usize, k: usize, q: usize) -> Result<Self, ParamError> {
        Self::from_parts(FamilyId::Prop5, d, dprime, k, Some(q), None, None, false)
    }

    pub fn prop6(d: usize, dprime: usize, k: usize, q: usize) -> Result<Self, ParamError> {
        Self::from_parts(FamilyId::Prop6, d, dprime, k, Some(q), None, None, false)
    }

    pub fn eq8(d: usize, dprime: usize, k: usize, m_offset: usize) -> Result<Self, ParamError> {
        Self::from_parts(
            FamilyId::Eq8,
            d,
            dprime,
            k,
            None,
            Some(m_offset),
            None,
            false,
        )
    }

    /// PROP1 or EQ8 with `k = d`, producing maximally entangled members.
    pub fn umeb(
        family: FamilyId,
        d: usize,
        dprime: usize,
        m_offset: Option<usize>,
    ) -> Result<Self, ParamError> {
        Self::from_parts(family, d, dprime, d, None, m_offset, None, true)
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dprime(&self) -> usize {
        self.dprime
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> Option<usize> {
        self.q
    }

    pub fn m_offset(&self) -> Option<usize> {
        self.m_offset
    }

    pub fn convention(&self) -> Option<Convention> {
        self.convention
    }

    pub fn is_umeb(&self) -> bool {
        self.umeb
    }

    /// `floor(d / k)`.
    pub fn s(&self) -> usize {
        self.d / self.k
    }

    /// `floor(d' / k)`.
    pub fn t(&self) -> usize {
        self.dprime / self.k
    }

    pub fn r_d(&self) -> usize {
        self.d % self.k
    }

    pub fn r_dp(&self) -> usize {
        self.dprime % self.k
    }

    pub fn ambient_dim(&self) -> usize {
        self.d * self.dprime
    }

    fn q_value(&self) -> usize {
        self.q.expect("validated params carry q")
    }

    fn m_value(&self) -> usize {
        self.m_offset.expect("validated params carry m")
    }

    /// Closed-form member count of the family.
    pub fn expected_count(&self) -> usize {
        let (d, k, s, t) = (self.d, self.k, self.s(), self.t());
        match self.family {
            FamilyId::Prop1 => t * k * d,
            FamilyId::Prop2 => (d - self.q_value()) * t * k,
            FamilyId::Prop3 => s * t * k * k,
            FamilyId::Prop4 => match self.convention.unwrap_or_default() {
                Convention::Literal => s * k * (t * k - k + self.q_value()),
                Convention::Repaired => s * k * (t * k - self.q_value()),
            },
            FamilyId::Prop5 => s * k * (t * k - k + self.q_value()),
            FamilyId::Prop6 => t * k * (s * k - k + self.q_value()),
            FamilyId::Eq8 => s * self.m_value() * k,
        }
    }

    /// Short identifier used for report file names and sweep keys.
    pub fn key(&self) -> String {
        let mut key = format!("{}_d{}_dp{}_k{}", self.family, self.d, self.dprime, self.k);
        if let Some(q) = self.q {
            key.push_str(&format!("_q{q}"));
        }
        if let Some(m) = self.m_offset {
            key.push_str(&format!("_m{m}"));
        }
        if let Some(c) = self.convention {
            key.push_str(&format!("_{c}"));
        }
        if self.umeb {
            key.push_str("_umeb");
        }
        key
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let (family, d, dprime, k) = (self.family, self.d, self.dprime, self.k);
        let order_err = ParamError::DimensionOrder { d, dprime, k };
        if k < 2 || d > dprime || k > d {
            return Err(order_err);
        }
        if k == d {
            if !self.umeb {
                return Err(if matches!(family, FamilyId::Prop1 | FamilyId::Eq8) {
                    order_err
                } else {
                    ParamError::UmebNotAllowed
                });
            }
            if !matches!(family, FamilyId::Prop1 | FamilyId::Eq8) {
                return Err(ParamError::UmebNotAllowed);
            }
        } else if self.umeb {
            return Err(ParamError::UmebRequiresKEqualsD { k, d });
        }

        match (family.takes_q(), self.q) {
            (true, None) => return Err(ParamError::MissingQ { family }),
            (false, Some(_)) => return Err(ParamError::UnexpectedQ { family }),
            _ => {}
        }
        match (family, self.m_offset) {
            (FamilyId::Eq8, None) => return Err(ParamError::MissingM),
            (f, Some(_)) if f != FamilyId::Eq8 => return Err(ParamError::UnexpectedM { family }),
            _ => {}
        }
        if !family.takes_convention() && self.convention.is_some() {
            return Err(ParamError::UnexpectedConvention { family });
        }

        let divisibility = |condition| ParamError::Divisibility { family, condition };
        let (r_d, r_dp) = (self.r_d(), self.r_dp());
        match family {
            FamilyId::Prop1 => {
                if r_dp == 0 {
                    return Err(divisibility("d' = tk + r with 0 < r < k"));
                }
            }
            FamilyId::Prop2 => {
                if r_dp == 0 {
                    return Err(divisibility("d' = tk + r with 0 < r < k"));
                }
                let mut hi = k - r_dp - 1;
                if self.convention == Some(Convention::Repaired) {
                    // d - q rows must host k distinct row indices.
                    hi = hi.min(d - k);
                }
                self.check_q(1, hi)?;
            }
            FamilyId::Prop3 | FamilyId::Prop4 => {
                if r_d == 0 || r_dp != 0 {
                    return Err(divisibility("d = sk + r with 0 < r < k and d' = tk"));
                }
                if family == FamilyId::Prop4 {
                    self.check_q(1, k - r_d - 1)?;
                }
            }
            FamilyId::Prop5 | FamilyId::Prop6 => {
                if r_d != 0 || r_dp != 0 {
                    return Err(divisibility("d = sk and d' = tk"));
                }
                self.check_q(1, k - 1)?;
            }
            FamilyId::Eq8 => {
                if r_d != 0 {
                    return Err(divisibility("d = sk"));
                }
                let allowed = allowed_m_values(d, dprime, k)?;
                let m = self.m_value();
                if !allowed.contains(&m) {
                    return Err(ParamError::MNotAllowed { m, allowed });
                }
            }
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn with_convention_unchecked(mut self, convention: Convention) -> Self {
        self.convention = Some(convention);
        self
    }

    fn check_q(&self, lo: usize, hi: usize) -> Result<(), ParamError> {
        let q = self.q_value();
        if hi < lo {
            return Err(ParamError::NoAdmissibleQ {
                family: self.family,
                d: self.d,
                dprime: self.dprime,
                k: self.k,
            });
        }
        if q < lo || q > hi {
            return Err(ParamError::QOutOfRange {
                family: self.family,
                q,
                lo,
                hi,
            });
        }
        Ok(())
    }
}

impl fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (d={}, d'={}, k={}",
            self.family, self.d, self.dprime, self.k
        )?;
        if let Some(q) = self.q {
            write!(f, ", q={q}")?;
        }
        if let Some(m) = self.m_offset {
            write!(f, ", m={m}")?;
        }
        if let Some(c) = self.convention {
            write!(f, ", {c}")?;
        }
        if self.umeb {
            f.write_str(", umeb")?;
        }
        f.write_str(")")
    }
}

/// Admissible column moduli `m` for the EQ8 construction, largest first.
pub fn allowed_m_values(d: usize, dprime: usize, k: usize) -> Result<Vec<usize>, ParamError> {
    if k == 0 || !d.is_multiple_of(k) {
        return Err(ParamError::Divisibility {
            family: FamilyId::Eq8,
            condition: "d = sk",
        });
    }
    let lowest = if dprime >= 2 * d {
        dprime + 1 - k
    } else if d < dprime {
        dprime - dprime % k
    } else {
        return Ok(Vec::new());
    };
    Ok((lowest..dprime).rev().collect())
}

/// Every admissible parameter set at `(d, d', k)`, PROP2 and PROP4 under the
/// repaired convention.
pub fn enumerate_families(
    d: usize,
    dprime: usize,
    k: usize,
) -> Result<Vec<FamilyParams>, ParamError> {
    if k < 2 || k >= d || d > dprime {
        return Err(ParamError::DimensionOrder { d, dprime, k });
    }
    let (r_d, r_dp) = (d % k, dprime % k);
    let mut out = Vec::new();
    if r_dp != 0 {
        out.push(FamilyParams::prop1(d, dprime, k)?);
        for q in 1..k - r_dp {
            if let Ok(p) = FamilyParams::prop2(d, dprime, k, q, Convention::Repaired) {
                out.push(p);
            }
        }
    } else if r_d != 0 {
        out.push(FamilyParams::prop3(d, dprime, k)?);
        for q in 1..k - r_d {
            out.push(FamilyParams::prop4(d, dprime, k, q, Convention::Repaired)?);
        }
    } else {
        for q in 1..k {
            out.push(FamilyParams::prop5(d, dprime, k, q)?);
        }
        for q in 1..k {
            out.push(FamilyParams::prop6(d, dprime, k, q)?);
        }
    }
    if r_d == 0 {
        for m in allowed_m_values(d, dprime, k)? {
            out.push(FamilyParams::eq8(d, dprime, k, m)?);
        }
    }
    Ok(out)
}

/// Every enumerated family with `2 <= k < d <= d' <= max_dprime`.
pub fn sweep_params(max_dprime: usize) -> Vec<FamilyParams> {
    let mut out = Vec::new();
    for dprime in 3..=max_dprime {
        for d in 3..=dprime {
            for k in 2..d {
                out.extend(enumerate_families(d, dprime, k).expect("sweep bounds are admissible"));
            }
        }
    }
    out
}
