use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("negation of a compound formula at {line}:{col}; only atoms may be negated")]
    NegatedCompound { line: usize, col: usize },
    #[error("unknown atom '{name}' at {line}:{col}")]
    UnknownAtom { name: String, line: usize, col: usize },
    #[error("automaton exceeds the state cap of {limit}")]
    StateLimit { limit: usize },
    #[error("unknown automaton state {0}")]
    UnknownState(usize),
    #[error("no enabling symbol for transition {from} -> {to}")]
    NoEnablingSymbol { from: usize, to: usize },
    #[error("invalid automaton: {0}")]
    InvalidDfa(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid polygon: {0}")]
    Polygon(String),
    #[error("grid resolution must be positive, got {0}")]
    Resolution(f64),
    #[error("workspace bounds are empty")]
    Bounds,
    #[error("obstacle {0} is not inside the workspace bounds")]
    ObstacleOutOfBounds(usize),
    #[error("goal cell is blocked or outside the workspace")]
    GoalBlocked,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("singular innovation covariance")]
    SingularInnovation,
    #[error("range sensor linearized at the robot position")]
    ZeroDistanceLinearization,
    #[error("class index {0} is outside the class set")]
    UnknownClass(usize),
    #[error("invalid confusion matrix: {0}")]
    Confusion(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("expected {expected} controls, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredicateError {
    #[error("predicate '{predicate}' refers to unknown robot {robot}")]
    UnknownRobot { predicate: String, robot: usize },
    #[error("predicate '{predicate}' refers to unknown landmark {landmark}")]
    UnknownLandmark { predicate: String, landmark: usize },
    #[error("predicate '{predicate}' refers to unknown class {class}")]
    UnknownClass { predicate: String, class: usize },
    #[error("predicate '{predicate}': {message}")]
    Parameter { predicate: String, message: String },
    #[error("predicate '{0}' evaluated with the wrong evaluator")]
    WrongKind(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid planner parameter: {0}")]
    Params(String),
    #[error("team has {got} robots but the context expects {expected}")]
    TeamSize { expected: usize, got: usize },
    #[error("robot {0} starts outside the free workspace")]
    InitialPoseBlocked(usize),
    #[error("the initial label already violates the task")]
    InitialViolation,
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}
