use thiserror::Error;

use crate::tree::SpinalViolation;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("point {point} out of range for degree {degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("empty generator list with unspecified degree")]
    EmptyGenerators,
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("index overflow: index {index} exceeds bound {bound}")]
    IndexOverflow { index: u128, bound: u128 },
    #[error("order bound exceeded: order {order} exceeds bound {bound}")]
    OrderBound { order: u128, bound: u128 },
    #[error("group order overflows 128 bits")]
    OrderOverflow,
    #[error("tau search exhausted")]
    TauSearchExhausted,
    #[error("group is not perfect: {0}")]
    NotPerfect(String),
    #[error("group is trivial: {0}")]
    Trivial(String),
    #[error("not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("component {level} is not surjective (image order {image} < {target})")]
    NotSubdirect { level: usize, image: u128, target: u128 },
    #[error("representation is not infinitary: tail kernel has order {0}")]
    NotInfinitary(u128),
    #[error("representation is not faithful: kernel has order {0}")]
    NotFaithful(u128),
    #[error("spinal data violation: {0}")]
    Spinal(SpinalViolation),
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),
    #[error("invalid vertex {vertex} at level {level}")]
    InvalidVertex { vertex: String, level: usize },
    #[error("element lives in a different tree frame")]
    FrameMismatch,
    #[error("spinal generator used in a frame without spine data")]
    NoSpine,
    #[error("contraction failed: no classification within {bound} levels")]
    ContractionFailed { bound: usize },
    #[error("unknown group reference {0:?}")]
    UnknownGroup(String),
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
