//! Exact valuation theory on supercommutative superrings.
//!
//! A superring here is ℤ₂-graded, `R = R₀ ⊕ R₁`, generated over a scalar
//! base (ℚ, 𝔽ₚ, or ℤ) by even variables and finitely many anticommuting odd
//! variables `t1, …, tN` with `tᵢ² = 0`.  On top of that the crate provides:
//!
//! * lexicographically ordered value groups ℤⁿ (n ≤ 3) with an adjoined ∞,
//!   segments, and isolated subgroups ([`ordgroup`]);
//! * canonical-form superalgebra arithmetic, the canonical superideal
//!   `J_R = R·R₁`, superreduction, localization, and bounded integrality
//!   tests ([`superalg`]);
//! * Manis valuations `v : R → 𝔾 ∪ {∞}` given by named rules (lifted places,
//!   monomial orders, composites), their supports, residue data, equivalence,
//!   and locality ([`valuation`]);
//! * valuation pairs `(A, 𝔭)`, convex ideals against segments, dominance and
//!   coarsening, and valuations induced on quotients ([`pairs`]);
//! * extensions of valuations along ring embeddings, integral closure as an
//!   intersection of valuation superrings, approximation theorems, and
//!   ramification data (e, f, n) ([`extension`]);
//! * Zariski-Riemann superspaces with basic opens, the even homeomorphism,
//!   and the structure sheaf of an arithmetically non-singular supercurve
//!   ([`zr`]);
//! * an expression/descriptor parser shared with the CLI ([`parser`]).
//!
//! All arithmetic is exact; nothing in the crate uses floating point.
//! Sampling-based certifications take an explicit seeded RNG and are
//! deterministic for a fixed seed.

pub mod extension;
pub(crate) mod linalg;
pub mod ordgroup;
pub mod pairs;
pub mod parser;
pub mod poly;
pub mod ratfn;
pub mod sample;
pub mod scalar;
pub mod superalg;
pub mod valuation;
pub mod zr;

use thiserror::Error;

/// Crate-wide error type.
///
/// Operations that can fail for a reason the caller may want to branch on
/// return `Result<T>`; internal invariant violations (e.g. mixing scalars
/// from different coefficient fields after the public API already validated
/// them) panic instead.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Two group values from different value groups were combined.
    #[error("value group mismatch: {0}")]
    GroupMismatch(String),
    /// Requested lexicographic rank exceeds the supported bound.
    #[error("rank {0} exceeds the supported lexicographic rank 3")]
    RankTooLarge(usize),
    /// `∞ − ∞` or `α − ∞` was requested; both are undefined.
    #[error("cannot subtract an infinite value")]
    InfinityArithmetic,
    /// Elements of two different superrings were combined.
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    /// Ideal membership is only decided for the structured ideal classes.
    #[error("membership test unsupported for this ideal: {0}")]
    UnsupportedIdeal(String),
    /// Localization target fails the primality check.
    #[error("localization target is not prime: {0}")]
    NotPrime(String),
    /// A denominator whose even theta-free part is zero (hence nilpotent).
    #[error("denominator has no invertible even part: {0}")]
    OddDenominator(String),
    /// Expression or descriptor syntax error, with a byte offset into the input.
    #[error("syntax error at byte {at}: {msg}")]
    Syntax { at: usize, msg: String },
    /// An identifier that is not a variable of the ambient ring.
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    /// The multiplicative set of a localization meets the support.
    #[error("support meets the multiplicative set: {0}")]
    SupportMeetsU(String),
    /// `invertible_outside` was called on an element already in `A_v`.
    #[error("element already lies in the valuation superring")]
    AlreadyInA,
    /// No inverting witness was found within the search bound.
    #[error("no inverting witness found within bound {bound}")]
    NotInvertible { bound: u32 },
    /// Convex-ideal data is empty for the trivial valuation.
    #[error("the trivial valuation has no proper convex-ideal data")]
    TrivialValuation,
    /// The witness-generated order does not embed in ℤ³-lex.
    #[error("witness order does not embed in a lexicographic group of rank <= 3")]
    GroupUnrecognized,
    /// Dominance was required but does not hold.
    #[error("not a dominating pair: {0}")]
    NotDominating(String),
    /// Approximation requires pairwise independent places.
    #[error("places are not pairwise independent: {0}")]
    DependentPlaces(String),
    /// A target value of ∞ cannot be prescribed.
    #[error("cannot prescribe an infinite target value")]
    InfiniteTarget,
    /// A strong-approximation anchor lies in the support of its place.
    #[error("anchor lies in the support of its place")]
    AnchorInSupport,
    /// The ring extension is not integral within the checked bound.
    #[error("extension is not integral within degree bound {bound}")]
    NotIntegral { bound: u32 },
    /// A rank/degree search did not stabilize within its bound.
    #[error("rank search did not stabilize within bound {bound}")]
    InfiniteRank { bound: u32 },
    /// Point enumeration is not supported over this ground field.
    #[error("unsupported ground field for enumeration: {0}")]
    UnsupportedField(String),
    /// The empty open carries only the zero section.
    #[error("the empty open has only the zero section")]
    EmptyOpen,
    /// Irreducibility over ℚ could not be certified either way.
    #[error("irreducibility undecided for `{0}`")]
    IrreducibilityUnknown(String),
    /// Division by zero in exact arithmetic.
    #[error("division by zero")]
    DivisionByZero,
    /// The element does not belong to the stated ring.
    #[error("element is not a member of {0}")]
    NotInRing(String),
    /// Catch-all for operations outside the supported structured families.
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
