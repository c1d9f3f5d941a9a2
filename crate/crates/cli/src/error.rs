use stpoisson::covariate::CovError;
use stpoisson::crossval::CvError;
use stpoisson::noreg::NoRegError;
use stpoisson::optimizer::OptimizerError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

fn optimizer(e: OptimizerError) -> CliError {
    match e {
        OptimizerError::LineSearchOverflow { .. } | OptimizerError::NonFiniteStart => CliError::Numerical(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

impl From<NoRegError> for CliError {
    fn from(e: NoRegError) -> Self {
        match e {
            NoRegError::Optimizer(o) => optimizer(o),
            NoRegError::NonPositiveIntensity(_) => CliError::Numerical(e.to_string()),
            NoRegError::InvalidSpec(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<CovError> for CliError {
    fn from(e: CovError) -> Self {
        match e {
            CovError::Optimizer(o) => optimizer(o),
            CovError::InfeasibleBeta { .. } => CliError::Numerical(e.to_string()),
            CovError::InvalidSpec(_) | CovError::InfeasibleSet(_) => CliError::Input(e.to_string()),
        }
    }
}

impl From<CvError> for CliError {
    fn from(e: CvError) -> Self {
        match e {
            CvError::Model(m) => m.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}
