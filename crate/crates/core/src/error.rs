use thiserror::Error;

use crate::curve::BaseCurve;
use crate::spaceform::SpaceFormKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} components for {kind:?}, got {got}")]
    DimensionMismatch {
        kind: SpaceFormKind,
        expected: usize,
        got: usize,
    },

    #[error("spaceform mismatch: {left:?} vs {right:?}")]
    KindMismatch {
        left: SpaceFormKind,
        right: SpaceFormKind,
    },

    #[error("parameter {value} outside domain [{lo}, {hi}]")]
    DomainViolation { value: f64, lo: f64, hi: f64 },

    #[error("point is not on the {kind:?} constraint surface (residual {residual:e})")]
    OffConstraint { kind: SpaceFormKind, residual: f64 },

    #[error("zero speed at u = {u}")]
    ZeroSpeed { u: f64 },

    #[error("curvature vanishes at u = {u}")]
    CurvatureVanishes { u: f64 },

    #[error("support function violates q + q'' > 0 at theta = {theta} (value {value:e})")]
    ConvexityViolation { theta: f64, value: f64 },

    #[error("degenerate arc: {0}")]
    DegenerateArc(String),

    #[error("degenerate metric at u = {u} (sqrt g = {sqrt_g:e})")]
    DegenerateMetric { u: f64, sqrt_g: f64 },

    #[error("base curve radius vanishes at u = {u}")]
    ZeroRadius { u: f64 },

    #[error("|gamma| = {radius} exceeds 1 at u = {u}; no S3 twizzler")]
    OutsideSphere { u: f64, radius: f64 },

    #[error("invalid pitch m = {0}; must be positive")]
    InvalidPitch(f64),

    #[error("treadmill denominator x x' + y y' vanishes near t = {at:?}; {} partial arcs", arcs.len())]
    SingularDenominator { at: Vec<f64>, arcs: Vec<BaseCurve> },

    #[error("recovered arclength is not increasing at t = {t} (s' = {ds:e})")]
    NonMonotoneArclength { t: f64, ds: f64 },

    #[error("level set is empty for H = {h}, M = {m_level}, m = {pitch}")]
    EmptyLevelSet { h: f64, m_level: f64, pitch: f64 },

    #[error("no root for gamma'.i gamma at radius {radius} (|sin beta| would be {ratio})")]
    NoRoot { radius: f64, ratio: f64 },

    #[error("curve reached the rotation axis at s = {s}")]
    AxisTouch { s: f64, partial: Option<BaseCurve> },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable name used by the CLI on standard error.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::KindMismatch { .. } => "KindMismatch",
            Error::DomainViolation { .. } => "DomainViolation",
            Error::OffConstraint { .. } => "OffConstraint",
            Error::ZeroSpeed { .. } => "ZeroSpeed",
            Error::CurvatureVanishes { .. } => "CurvatureVanishes",
            Error::ConvexityViolation { .. } => "ConvexityViolation",
            Error::DegenerateArc(_) => "DegenerateArc",
            Error::DegenerateMetric { .. } => "DegenerateMetric",
            Error::ZeroRadius { .. } => "ZeroRadius",
            Error::OutsideSphere { .. } => "OutsideSphere",
            Error::InvalidPitch(_) => "InvalidPitch",
            Error::SingularDenominator { .. } => "SingularDenominator",
            Error::NonMonotoneArclength { .. } => "NonMonotoneArclength",
            Error::EmptyLevelSet { .. } => "EmptyLevelSet",
            Error::NoRoot { .. } => "NoRoot",
            Error::AxisTouch { .. } => "AxisTouch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse { .. } => "Parse",
            Error::Io(_) => "Io",
        }
    }
}
