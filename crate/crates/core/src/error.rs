//! Error type shared by every module of the engine.

use thiserror::Error;

use crate::set::Label;

/// Every fallible operation in this crate returns this error type.
///
/// Variants carry the offending labels so that reports can point at the
/// first violating object in canonical (sorted) order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("open-set family is not a topology: {reason}")]
    InvalidTopology { reason: String },

    #[error("space has {got} points, more than the supported maximum of {max}")]
    TooManyPoints { got: usize, max: usize },

    #[error("family is not a filter: {reason}")]
    InvalidFilter { reason: String },

    #[error("family is not a filter base: {reason}")]
    InvalidFilterBase { reason: String },

    #[error("target set is empty; neighborhood filters of the empty set are improper")]
    EmptyTarget,

    #[error("label `{label}` does not belong to the space `{space}`")]
    SpaceMismatch { space: String, label: Label },

    #[error("label `{label}` does not belong to the expected set")]
    LabelMismatch { label: Label },

    #[error("correspondence endpoints do not form the requested diagram shape: {reason}")]
    ShapeMismatch { reason: String },

    #[error("operation signatures differ between the two algebras: {reason}")]
    SignatureMismatch { reason: String },

    #[error("algebra operation table is invalid: {reason}")]
    InvalidAlgebra { reason: String },

    #[error("invalid correspondence: {reason}")]
    InvalidCorrespondence { reason: String },

    #[error("invalid bundle: {reason}")]
    InvalidBundle { reason: String },

    #[error("not a subbundle: first violation at `{first_violation}`")]
    NotContained { first_violation: Label },

    #[error("bundles do not share a base (expected `{expected}`, found `{found}`)")]
    BaseMismatch { expected: String, found: String },

    #[error("fiber over `{point}` is empty")]
    EmptyFiber { point: Label },

    #[error("base of fibered correspondence `{name}` is not an injective partial map")]
    NonInjectiveBase { name: String },

    #[error("bundle endpoints of the two fibered correspondences do not match: {reason}")]
    BundleMismatch { reason: String },

    #[error("bundle `{bundle}` carries no trivialization, required here")]
    MissingTrivialization { bundle: String },

    #[error("no chart over base point `{point}`")]
    MissingChart { point: Label },

    #[error("fiber relation over base pair ({x},{y}) is singular: its chart transport differs from the reference fiber")]
    SingularFiber { x: Label, y: Label },

    #[error("image fibers over `{first}` and `{second}` are not identified by the target charts")]
    NonUniformImage { first: Label, second: Label },

    #[error("invalid fibered correspondence: {reason}")]
    InvalidFibered { reason: String },

    #[error("relation is not an endorelation (source and target bundles differ)")]
    NotEndorelation,

    #[error("relation domain omits base point `{missing}`; properties are defined over full domains only")]
    PartialDomain { missing: Label },

    #[error("relation is not a fibered equivalence (missing: {missing})")]
    NotAnEquivalence { missing: String },

    #[error("tuple {tuple:?} has length {got}, expected arity {expected}")]
    ArityMismatch {
        tuple: Vec<Label>,
        got: usize,
        expected: usize,
    },

    #[error("invalid group: {reason}")]
    InvalidGroup { reason: String },

    #[error("invalid group action: {reason}")]
    InvalidAction { reason: String },

    #[error("unknown base point `{point}`")]
    UnknownPoint { point: Label },

    #[error("unknown element `{element}`")]
    UnknownElement { element: Label },

    #[error("section does not match the bundle: {reason}")]
    SectionMismatch { reason: String },

    #[error("tower chain breaks at level {level}: {reason}")]
    BrokenChain { level: usize, reason: String },

    #[error("image of filter member {member:?} is empty; the image family is not a filter base")]
    EmptyImageBase { member: Vec<Label> },

    #[error("enumeration of {what} needs {needed} items, above the limit {limit} (set FIBRA_MAX_ENUM to raise it)")]
    EnumerationLimit {
        what: String,
        needed: u128,
        limit: u64,
    },

    #[error("invalid JSON document: {message}")]
    ParseError { message: String },

    #[error("invariant violation at {pointer}: {message}")]
    InvariantViolation { pointer: String, message: String },

    #[error("unknown object `{name}`")]
    UnknownObject { name: String },

    #[error("object name `{name}` is ambiguous across collections: {collections:?}")]
    AmbiguousName {
        name: String,
        collections: Vec<String>,
    },

    #[error("command cannot be applied to `{name}` ({kind}): {reason}")]
    BadOperand {
        name: String,
        kind: String,
        reason: String,
    },
}

impl Error {
    /// Stable machine-readable code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidTopology { .. } => "InvalidTopology",
            Error::TooManyPoints { .. } => "TooManyPoints",
            Error::InvalidFilter { .. } => "InvalidFilter",
            Error::InvalidFilterBase { .. } => "InvalidFilterBase",
            Error::EmptyTarget => "EmptyTarget",
            Error::SpaceMismatch { .. } => "SpaceMismatch",
            Error::LabelMismatch { .. } => "LabelMismatch",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::SignatureMismatch { .. } => "SignatureMismatch",
            Error::InvalidAlgebra { .. } => "InvalidAlgebra",
            Error::InvalidCorrespondence { .. } => "InvalidCorrespondence",
            Error::InvalidBundle { .. } => "InvalidBundle",
            Error::NotContained { .. } => "NotContained",
            Error::BaseMismatch { .. } => "BaseMismatch",
            Error::EmptyFiber { .. } => "EmptyFiber",
            Error::NonInjectiveBase { .. } => "NonInjectiveBase",
            Error::BundleMismatch { .. } => "BundleMismatch",
            Error::MissingTrivialization { .. } => "MissingTrivialization",
            Error::MissingChart { .. } => "MissingChart",
            Error::SingularFiber { .. } => "SingularFiber",
            Error::NonUniformImage { .. } => "NonUniformImage",
            Error::InvalidFibered { .. } => "InvalidFibered",
            Error::NotEndorelation => "NotEndorelation",
            Error::PartialDomain { .. } => "PartialDomain",
            Error::NotAnEquivalence { .. } => "NotAnEquivalence",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::InvalidGroup { .. } => "InvalidGroup",
            Error::InvalidAction { .. } => "InvalidAction",
            Error::UnknownPoint { .. } => "UnknownPoint",
            Error::UnknownElement { .. } => "UnknownElement",
            Error::SectionMismatch { .. } => "SectionMismatch",
            Error::BrokenChain { .. } => "BrokenChain",
            Error::EmptyImageBase { .. } => "EmptyImageBase",
            Error::EnumerationLimit { .. } => "EnumerationLimit",
            Error::ParseError { .. } => "ParseError",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::UnknownObject { .. } => "UnknownObject",
            Error::AmbiguousName { .. } => "AmbiguousName",
            Error::BadOperand { .. } => "BadOperand",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
