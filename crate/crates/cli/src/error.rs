use extsource::biortho::BiorthoError;
use extsource::equilibrium::EqError;
use extsource::kernel::KernelError;
use extsource::MpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<MpError> for CliError {
    fn from(e: MpError) -> Self {
        match e {
            MpError::InvalidPrecision(_) | MpError::InvalidInterval | MpError::InvalidArgument(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<EqError> for CliError {
    fn from(e: EqError) -> Self {
        match e {
            EqError::Mp(e) => e.into(),
            EqError::NonConvex(_) | EqError::InvalidParameter(_) => CliError::Validation(e.to_string()),
            EqError::Cache(_) => CliError::Io(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<BiorthoError> for CliError {
    fn from(e: BiorthoError) -> Self {
        match e {
            BiorthoError::Mp(e) => e.into(),
            BiorthoError::Equilibrium(e) => e.into(),
            BiorthoError::InvalidParameter(_) => CliError::Validation(e.to_string()),
            BiorthoError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::Biortho(e) => e.into(),
            KernelError::Equilibrium(e) => e.into(),
            KernelError::Mp(e) => e.into(),
            KernelError::OutsideBulk { .. } | KernelError::InvalidParameter(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
