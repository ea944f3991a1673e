//! Report envelope and the machine-readable error object every failure is
//! reduced to before the process exits.

use serde_json::{json, Value};
use treestar::automaton::WordParseError;
use treestar::{
    AutomatonError, ExprError, ExpectError, KernelError, LevelError, SpectrumError, TensorError,
    TraceError, Violation, WedderburnError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Plain,
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Plain => "plain",
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// One finished command: the structured results plus pre-rendered text
/// forms. The JSON envelope repeats the full request so a report is
/// reproducible on its own.
pub struct Report {
    pub request: Value,
    pub results: Value,
    pub warnings: Vec<String>,
    pub plain: String,
    pub csv: Option<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Plain => self.plain.clone(),
            Format::Csv => self
                .csv
                .clone()
                .expect("csv availability is checked before dispatch"),
            Format::Json => {
                let envelope = json!({
                    "request": self.request,
                    "results": self.results,
                    "warnings": self.warnings,
                });
                let mut text =
                    serde_json::to_string_pretty(&envelope).expect("envelope serializes");
                text.push('\n');
                text
            }
        }
    }
}

/// Domain failure carried to the exit path: a stable kind tag, a human
/// message, and optional structured details.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub details: Value,
}

impl CliError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.to_owned(),
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn to_json(&self) -> String {
        let mut error = json!({
            "kind": self.kind,
            "message": self.message,
        });
        if !self.details.is_null() {
            error["details"] = self.details.clone();
        }
        let mut text =
            serde_json::to_string_pretty(&json!({ "error": error })).expect("error serializes");
        text.push('\n');
        text
    }
}

fn violation_kind(v: &Violation) -> &'static str {
    match v {
        Violation::EmptyAlphabet { .. } => "EmptyAlphabet",
        Violation::NoStates => "NoStates",
        Violation::DuplicateState { .. } => "DuplicateState",
        Violation::MalformedPermutation { .. } => "MalformedPermutation",
        Violation::MalformedSections { .. } => "MalformedSections",
        Violation::UnknownStateInSection { .. } => "UnknownStateInSection",
    }
}

impl From<AutomatonError> for CliError {
    fn from(e: AutomatonError) -> Self {
        match e {
            AutomatonError::Format(message) => CliError::new("Format", message),
            AutomatonError::Invalid(invalid) => {
                let violations: Vec<Value> = invalid
                    .violations
                    .iter()
                    .map(|v| json!({ "kind": violation_kind(v), "message": v.to_string() }))
                    .collect();
                let kind = invalid
                    .violations
                    .first()
                    .map(violation_kind)
                    .unwrap_or("Invalid");
                CliError::new(kind, invalid.to_string())
                    .with_details(json!({ "violations": violations }))
            }
        }
    }
}

impl From<WordParseError> for CliError {
    fn from(e: WordParseError) -> Self {
        let kind = match e {
            WordParseError::UnknownState { .. } => "UnknownState",
            WordParseError::Malformed { .. } => "MalformedWord",
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        match &e {
            ExprError::Syntax {
                position,
                line,
                column,
                ..
            } => CliError::new("SyntaxError", e.to_string()).with_details(json!({
                "position": position,
                "line": line,
                "column": column,
            })),
            ExprError::UnknownGenerator { position, name } => {
                CliError::new("UnknownGenerator", e.to_string())
                    .with_details(json!({ "position": position, "name": name }))
            }
        }
    }
}

impl From<LevelError> for CliError {
    fn from(e: LevelError) -> Self {
        CliError::new("LevelTooLarge", e.to_string())
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::InconsistentSystem => CliError::new("InconsistentSystem", e.to_string()),
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::DenseCapExceeded { .. } => {
                CliError::new("DenseCapExceeded", e.to_string())
            }
            SpectrumError::NotSelfAdjoint => CliError::new("NotSelfAdjoint", e.to_string()),
            SpectrumError::NotNormal { .. } => CliError::new("NotNormal", e.to_string()),
            SpectrumError::Level(inner) => inner.into(),
        }
    }
}

impl From<ExpectError> for CliError {
    fn from(e: ExpectError) -> Self {
        match &e {
            ExpectError::NonUniqueLift {
                i,
                j,
                first,
                second,
            } => CliError::new("NonUniqueLift", e.to_string()).with_details(json!({
                "i": i,
                "j": j,
                "first": first,
                "second": second,
            })),
            ExpectError::Level(inner) => inner.clone().into(),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        let kind = match e {
            KernelError::NonCommutingInputs { .. } => "NonCommutingInputs",
            KernelError::SearchExhausted { .. } => "SearchExhausted",
            KernelError::UnsupportedAlphabet { .. } => "UnsupportedAlphabet",
        };
        CliError::new(kind, e.to_string())
    }
}

impl From<WedderburnError> for CliError {
    fn from(e: WedderburnError) -> Self {
        match e {
            WedderburnError::DenseCapExceeded { .. } => {
                CliError::new("DenseCapExceeded", e.to_string())
            }
            WedderburnError::TruncatedClosure { .. } => {
                CliError::new("TruncatedClosure", e.to_string())
            }
            WedderburnError::DegenerateSplit { .. } => {
                CliError::new("DegenerateSplit", e.to_string())
            }
            WedderburnError::Level(inner) => inner.into(),
        }
    }
}

impl From<TensorError> for CliError {
    fn from(e: TensorError) -> Self {
        match e {
            TensorError::UnsupportedAlphabet { .. } => {
                CliError::new("UnsupportedAlphabet", e.to_string())
            }
        }
    }
}
