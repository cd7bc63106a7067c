use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("term {term} references site {site} but the Hamiltonian has {n} sites")]
    BadSupport { term: usize, site: usize, n: usize },
    #[error("operation requires qubits (d = 2), got d = {0}")]
    NotQubit(usize),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("cutoff {cutoff} lies within {gap:e} of eigenvalue {eigenvalue}")]
    DegenerateCut {
        cutoff: f64,
        eigenvalue: f64,
        gap: f64,
    },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("ancilla state is not supported on the required projector")]
    BadAncilla,
    #[error("encoding has p + q = 0")]
    DegenerateEncoding,
    #[error("gadget block condition violated: {0}")]
    BlockViolation(String),
    #[error("delta search exceeded cap {cap:e}")]
    CapExceeded { cap: f64 },
    #[error("overlapping gadget supports: {0}")]
    OverlapViolation(String),
    #[error("Pauli term has an odd or zero number of Y letters")]
    OddYCount,
    #[error("bad gadget operand: {0}")]
    BadOperand(String),
    #[error("bad K4 pair ({0}, {1})")]
    BadPair(usize, usize),
    #[error("interaction is not of a supported deletion form: {0}")]
    BadForm(String),
    #[error("bad subspace gadget kind: {0}")]
    BadKind(String),
    #[error("bad gadget topology: {0}")]
    BadTopology(String),
    #[error("rank mismatch: low-energy rank {low}, encoded rank {encoded}")]
    RankMismatch { low: usize, encoded: usize },
    #[error("low-energy projector is too far from the encoded subspace (distance {0})")]
    TooFar(f64),
    #[error("low-energy subspace has rank {low}, expected {expected}")]
    SubspaceMismatch { low: usize, expected: usize },
    #[error("encoding carries no locality structure")]
    NotLocalEncoding,
    #[error("strong noise form requires rank(P) = 1, got {0}")]
    RankPNotOne(usize),
    #[error("simulation budget precondition failed: {0}")]
    BudgetViolation(String),
    #[error("interaction set contains only 1-local interactions")]
    Only1Local,
    #[error("unsupported family or input: {0}")]
    UnsupportedFamily(String),
    #[error("routing failure: {0}")]
    RoutingFailure(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
