use gammadict_core::Error;

pub const USAGE: i32 = 1;
pub const IO: i32 = 2;
pub const NUMERIC: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: IO, message: message.into() }
    }
}

// Bad parameters are usage errors; unreadable or malformed input files are
// I/O errors; NaN/Inf during computation is a numeric failure.
impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Config(_) | Error::Domain { .. } | Error::Dimension { .. } => USAGE,
            Error::Io { .. }
            | Error::Wav(_)
            | Error::Parse { .. }
            | Error::Schema { .. }
            | Error::Version { .. }
            | Error::Negative { .. } => IO,
            Error::NonFinite(_) | Error::Convergence(_) => NUMERIC,
        };
        Self { code, message: err.to_string() }
    }
}
