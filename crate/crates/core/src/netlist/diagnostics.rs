use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based source position. Line 0 means "no source text" (a circuit built in code).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(line: usize, col: usize) -> Self {
        Self { line, col }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiagCode {
    UnknownKeyword,
    Arity,
    BadValue,
    UnknownKey,
    MissingKey,
    DuplicateId,
    ReflectivityRange,
    ParamRange,
    DuplicateDriver,
    DuplicateReader,
    UndrivenWire,
    Cycle,
    UnreachableDetect,
    DetectNotSink,
    MissingSource,
    MultipleSource,
    NoDetect,
}

impl DiagCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagCode::UnknownKeyword => "UNKNOWN_KEYWORD",
            DiagCode::Arity => "ARITY",
            DiagCode::BadValue => "BAD_VALUE",
            DiagCode::UnknownKey => "UNKNOWN_KEY",
            DiagCode::MissingKey => "MISSING_KEY",
            DiagCode::DuplicateId => "DUPLICATE_ID",
            DiagCode::ReflectivityRange => "REFLECTIVITY_RANGE",
            DiagCode::ParamRange => "PARAM_RANGE",
            DiagCode::DuplicateDriver => "DUPLICATE_DRIVER",
            DiagCode::DuplicateReader => "DUPLICATE_READER",
            DiagCode::UndrivenWire => "UNDRIVEN_WIRE",
            DiagCode::Cycle => "CYCLE",
            DiagCode::UnreachableDetect => "UNREACHABLE_DETECT",
            DiagCode::DetectNotSink => "DETECT_NOT_SINK",
            DiagCode::MissingSource => "MISSING_SOURCE",
            DiagCode::MultipleSource => "MULTIPLE_SOURCE",
            DiagCode::NoDetect => "NO_DETECT",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagCode,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: DiagCode, span: Span, message: impl Into<String>) -> Self {
        Self { code, span, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.span.line, self.span.col, self.code, self.message)
    }
}
