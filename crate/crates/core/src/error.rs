use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("graph has {count} vertices, exact treewidth is limited to {limit}")]
    VertexLimit { count: usize, limit: usize },

    #[error("structure has {count} elements, core computation is limited to {limit}")]
    DomainLimit { count: usize, limit: usize },

    #[error("symbol {0} is not part of the target vocabulary")]
    SymbolMismatch(String),

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("anchor mapping is not a homomorphism: {0}")]
    InvalidAnchor(String),

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("cap exceeded: {count} items, cap is {cap}")]
    CapExceeded { count: usize, cap: usize },

    #[error("the root node has no parent")]
    RootHasNoParent,

    #[error("pattern tree is not well-designed (variable {0} occurs in a disconnected node set)")]
    NotWellDesigned(String),

    #[error("interface component has {width} inherited variables, cap is {cap}")]
    WidthCapExceeded { width: usize, cap: usize },

    #[error("arity mismatch for {symbol}: expected {expected}, found {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
