//! Unextendible entangled bases with fixed Schmidt number `k` in
//! `C^d ⊗ C^d'`: explicit constructions, rigorous numerical verification of
//! orthonormality, Schmidt rank and unextendibility, and the complementary
//! mixed state whose range holds only Schmidt rank below `k`.

pub mod cli;
pub mod constructions;
pub mod io;
pub mod mixed;
pub mod tensor;
pub mod verification;

pub use constructions::{construct, Convention, FamilyId, FamilyParams, UebkFamily};
pub use tensor::{BipartiteVector, CoefficientMatrix, SubspaceBasis};
pub use verification::{verify_family, VerificationReport, VerifyConfig};
