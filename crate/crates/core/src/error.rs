use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A function and a state (or two states) of different orders were combined.
    #[error("order mismatch: expected {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },

    /// Malformed function spec, sequence literal or state literal.
    #[error("syntax error: {0}")]
    Syntax(String),

    /// An ANF term references a variable index outside `0..order`.
    #[error("variable x{index} out of range for order {order}")]
    VariableOutOfRange { index: usize, order: usize },

    /// The requested order is outside the supported range.
    #[error("order {order} out of range (1..={max})")]
    OrderOutOfRange { order: usize, max: usize },

    /// A sequence must contain at least one bit.
    #[error("empty sequence")]
    EmptySequence,

    /// Invalid parameters for a built-in function family.
    #[error("invalid family parameter: {0}")]
    FamilyParameter(String),

    /// The component id does not exist in the state graph.
    #[error("no component with id {0}")]
    BadComponent(usize),

    /// The GPO run would be ultimately periodic: the initial state has no
    /// predecessor, so it can never be revisited.
    #[error("initial state {state} is a leaf in the state graph")]
    LeafInitialState { state: String },

    /// The feedback function depends on its first variable.
    #[error("feedback function is not in standard form (depends on x0)")]
    NonStandardFunction,

    /// Reverse engineering needs nonlinear complexity of at least two.
    #[error("nonlinear complexity {nlc} is too low (need at least 2)")]
    ComplexityTooLow { nlc: usize },

    /// The GJPO initial state must lie on the cycle of the root component.
    #[error("initial state {state} is not on the cycle of root component {root}")]
    InitialStateOffRootCycle { state: String, root: usize },

    /// The supplied edge set is not a rooted spanning tree of the PAG.
    #[error("invalid joining tree: {0}")]
    InvalidTree(String),

    /// The preference adjacency graph admits no rooted spanning tree, so no
    /// de Bruijn sequence can be produced from this function.
    #[error("no rooted spanning tree exists for this function")]
    NoRootedTrees,

    /// The operation requires a nonsingular feedback function.
    #[error("feedback function is not nonsingular")]
    NonsingularRequired,
}

pub type Result<T> = std::result::Result<T, Error>;
