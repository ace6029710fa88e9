use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different number fields")]
    FieldMismatch,
    #[error("minimal polynomial is reducible: {0}")]
    Reducible(String),
    #[error("invalid number field: {0}")]
    InvalidField(String),
    #[error("value undecidable at truncation order {order}")]
    UndecidableAtTruncation { order: String },
    #[error("family does not converge: {0}")]
    DivergenceCertificate(String),
    #[error("evaluation map cannot be normalized: `{lower}` forces the scale above `{upper}` allows")]
    NotNormalizable { lower: String, upper: String },
    #[error("missing exponential scalar for curve generator {0}")]
    MissingExponential(String),
    #[error("non-zero constant part on T{index}, whose Hodge class has degree {degree}")]
    NonZeroConstantInWrongDegree { index: usize, degree: i64 },
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: String, found: String },
    #[error("missing correlator {0}")]
    MissingCorrelator(String),
    #[error("frame is not a surface")]
    NotASurface,
    #[error("frame does not declare a nef canonical class")]
    NotNef,
    #[error("supplied value is not a root: {0}")]
    NotARoot(String),
    #[error("root is not simple: derivative vanishes")]
    NotASimpleRoot,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("parameter entry is not polynomial: {0}")]
    NonPolynomialParameter(String),
    #[error("characteristic polynomial does not split; residual factor {residual} of degree {degree}")]
    SplitFailure { residual: String, degree: usize },
    #[error("evaluation map vanishes on the Novikov variables")]
    VanishesOnQ,
    #[error("inconsistent ledger: {0}")]
    InconsistentLedger(String),
    #[error("direct transport obstructed at generator {generator}; a generic one-parameter family is required")]
    ObstructionRequiresGenericity { generator: String },
    #[error("matrix is not invertible: {0}")]
    NotInvertible(String),
    #[error("denominator bound {0} saturated during descent")]
    DescentSaturated(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
