//! Error surface shared by the CLI and the HTTP service: a machine-readable
//! `{code, message, stage}` body plus the process exit code / HTTP status it
//! maps to.

use polyvox::synth::SynthError;
use polyvox::PipelineError;
use serde::Serialize;

pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_ENGINE_FAILURE: i32 = 2;

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub stage: String,
}

#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub body: ErrorBody,
}

impl CliError {
    pub fn input(code: &str, message: impl Into<String>) -> Self {
        CliError {
            exit_code: EXIT_INPUT_ERROR,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
                stage: "input".to_string(),
            },
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            exit_code: EXIT_INPUT_ERROR,
            body: ErrorBody {
                code: "config".to_string(),
                message: message.into(),
                stage: "config".to_string(),
            },
        }
    }

    /// Engine failures exit 2; everything else is an input-class error.
    pub fn from_pipeline(err: PipelineError) -> Self {
        let stage = err.stage().to_string();
        let (code, exit_code) = match &err {
            PipelineError::EmptyInput => ("empty_input", EXIT_INPUT_ERROR),
            PipelineError::LanguageId(_) => ("language_id", EXIT_INPUT_ERROR),
            PipelineError::Planning(_) => ("planning", EXIT_INPUT_ERROR),
            PipelineError::Synthesis(SynthError::Engine { .. }) => {
                ("engine_failure", EXIT_ENGINE_FAILURE)
            }
            PipelineError::Synthesis(_) => ("synthesis", EXIT_INPUT_ERROR),
        };
        CliError {
            exit_code,
            body: ErrorBody {
                code: code.to_string(),
                message: err.to_string(),
                stage,
            },
        }
    }
}
