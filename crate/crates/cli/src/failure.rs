use std::fmt;
use std::path::Path;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Error message plus process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn exit_code(e: &dbgnn_core::Error) -> i32 {
    use dbgnn_core::Error::*;
    match e {
        InvalidArgument(_) => EXIT_USAGE,
        Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

/// Tags an error with the pipeline stage it came from.
pub trait Stage<T> {
    fn stage(self, name: &str) -> Result<T, Failure>;
}

impl<T> Stage<T> for dbgnn_core::Result<T> {
    fn stage(self, name: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: exit_code(&e), message: format!("{name}: {e}") })
    }
}

impl<T> Stage<T> for serde_json::Result<T> {
    fn stage(self, name: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure::data(format!("{name}: {e}")))
    }
}

pub fn read_file(path: &Path, stage: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::data(format!("{stage}: cannot read {}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str, stage: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| Failure::data(format!("{stage}: cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Failure::data(format!("{stage}: cannot write {}: {e}", path.display())))
}
