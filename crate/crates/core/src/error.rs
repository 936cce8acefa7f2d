use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character {0:?}")]
    BadDigit(char),
    #[error("{digits} hex digits cannot hold exactly {bits} bits")]
    HexLength { digits: usize, bits: usize },
    #[error("padding bits of the final hex digit are not zero")]
    NonZeroPadding,
    #[error("erased position carries a non-zero value")]
    ValueUnderErasure,
    #[error("missing field: {0}")]
    MissingField(&'static str),
    #[error("not a number: {0:?}")]
    BadNumber(String),
    #[error("line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("unknown name {0:?}")]
    UnknownName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("no code with k={k}, eps={eps} found up to block length {max_n0}")]
    ConstructionFailed {
        k: usize,
        eps: String,
        max_n0: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("radius {radius} exceeds the decoding radius {max}")]
    RadiusTooLarge { radius: usize, max: usize },
    #[error("received word contains erasures")]
    ErasuresPresent,
    #[error("{erased} erasures exceed the limit {max}")]
    TooManyErasures { erased: usize, max: usize },
    #[error("list of size {size} exceeds the bound {bound}")]
    ListBoundExceeded { size: usize, bound: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("{count} strings cannot be separated by distinct indices of a {k}-bit string")]
    TooManyStrings { count: usize, k: usize },
    #[error("strings are not pairwise distinct")]
    DuplicateString,
    #[error("declared width {width} is smaller than the list size {count}")]
    WidthTooSmall { width: usize, count: usize },
    #[error("a partition needs at least one string")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoinGameError {
    #[error("update size K must be positive")]
    ZeroCapacity,
    #[error("empty coin space")]
    EmptySpace,
    #[error("update list of length {len} exceeds K={cap}")]
    UpdateTooLarge { len: usize, cap: usize },
    #[error("coin {0} appears twice in one update")]
    DuplicateCoin(u64),
    #[error("negative increment {0}")]
    NegativeIncrement(i64),
    #[error("increment {value} exceeds the per-step cap {cap}")]
    IncrementAboveCap { value: i64, cap: i64 },
    #[error("coin {0} is outside the coin space")]
    CoinOutsideSpace(u64),
    #[error("rank {rank} outside 1..={limit}")]
    RankOutOfRange { rank: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("adversary requested {requested} corruptions with {remaining} remaining")]
    BudgetExceeded { requested: usize, remaining: usize },
    #[error("sent string contains an erasure")]
    SentContainsErasure,
    #[error("position {position} outside a message of length {len}")]
    BadPosition { position: usize, len: usize },
    #[error("unknown adversary {0:?}")]
    UnknownAdversary(String),
    #[error("bad adversary parameters: {0}")]
    BadParameters(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("adversary kind does not match the protocol")]
    WrongAdversaryKind,
    #[error("message {x} does not fit in {k} bits")]
    MessageOutOfRange { x: u64, k: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    CoinGame(#[from] CoinGameError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("stop condition never triggered within {n} rounds")]
    DegenerateProtocol { n: usize },
    #[error("invalid attack input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown checker {0:?}")]
    UnknownChecker(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
