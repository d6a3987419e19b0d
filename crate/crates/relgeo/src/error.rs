use std::path::PathBuf;

use relgeo_core::GeomError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The scenario is malformed or asks for something outside the model.
    #[error("schema error: {0}")]
    Schema(String),
    /// A numerical guard tripped while evaluating a valid scenario.
    #[error("guard failure: {0}")]
    Guard(GeomError),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Descriptor and argument errors belong to the input; the rest are guards.
    pub fn from_geom(e: GeomError) -> Self {
        match e {
            GeomError::InvalidDescriptor(_) | GeomError::InvalidArgument(_) => {
                CliError::Schema(e.to_string())
            }
            other => CliError::Guard(other),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) | CliError::Io { .. } => 2,
            CliError::Guard(_) => 3,
        }
    }
}
