use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unsupported prime {0} (need an odd prime 3 <= p <= 13)")]
    UnsupportedPrime(u32),
    #[error("unsupported extension degree {0} (need 1 <= m <= 4)")]
    UnsupportedDegree(u32),
    #[error("field of degree {degree} does not contain F_p^{needed}")]
    FieldTooSmall { needed: u32, degree: u32 },
    #[error("mismatched fields or primes")]
    FieldMismatch,

    #[error("denominator divisible by p")]
    DenominatorDivisibleByP,
    #[error("insufficient p-adic precision: need {needed} digits, have {available}")]
    InsufficientPadicPrecision { needed: i64, available: i64 },
    #[error("zero argument")]
    ZeroArgument,
    #[error("negative valuation {0} where an integral scalar is required")]
    NotIntegral(i64),
    #[error("scalar is not a unit (valuation {0})")]
    NotUnit(i64),

    #[error("series is not congruent to 1 mod X")]
    NotOneUnit,
    #[error("operation needs a series with finite precision")]
    UnboundedPrecision,
    #[error("series known only mod X^{precision}, coefficient {needed} requested")]
    InsufficientPrecision { needed: i64, precision: i64 },
    #[error("pole of order {order} exceeds the configured bound {bound}")]
    PoleTooDeep { order: i64, bound: i64 },
    #[error("series is zero to its known precision and cannot be inverted")]
    NotInvertible,
    #[error("no solution at the requested precision")]
    NoSolutionAtPrecision,

    #[error("exponent h = {0} has a base-p digit period smaller than n")]
    NonPrimitiveExponent(u64),
    #[error("exponent h = {h} outside 1..={max}")]
    ExponentOutOfRange { h: u64, max: u64 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("operation requires a rho(r, chi) module")]
    NotRhoModule,
    #[error("c^e != omega(a): the Y-action is inconsistent")]
    InconsistentOmegaN,

    #[error("window too short: {missing} more index(es) needed")]
    InsufficientWindow { missing: usize },
    #[error("window entries are not psi-compatible at index {0}")]
    IncompatibleWindow(usize),
    #[error("vector is not in the lattice D#")]
    NotInLattice,
    #[error("diagonal factor is not a unit")]
    NonUnitDiagonal,
    #[error("element is not in B n KZ")]
    NotInBKZ,
    #[error("singular matrix")]
    SingularInput,
    #[error("lambda vector violates the moment condition of order {0}")]
    MomentConditionViolated(u32),
    #[error("value outside the line k.x^r")]
    ValueOutsideLine,
    #[error("representatives must have length p with j_i = i mod p")]
    BadRepresentatives,

    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error: {0}")]
    Parse(String),
}
