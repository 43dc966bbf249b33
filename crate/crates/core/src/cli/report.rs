use serde::Serialize;
use serde_json::Value;

pub const EXIT_EQUAL: i32 = 0;
pub const EXIT_NOT_EQUAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// A command failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
    pub detail: Option<Value>,
}

impl Failure {
    pub fn input(kind: &str, message: impl Into<String>) -> Failure {
        Failure {
            exit_code: EXIT_INPUT,
            kind: kind.into(),
            message: message.into(),
            detail: None,
        }
    }

    pub fn numeric(kind: &str, message: impl Into<String>) -> Failure {
        Failure {
            exit_code: EXIT_NUMERIC,
            kind: kind.into(),
            message: message.into(),
            detail: None,
        }
    }
}

#[derive(Debug, Serialize)]
struct ErrorDoc {
    kind: String,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<Value>,
}

/// The JSON document printed by every non-generating command.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Vec<String>,
    pub inputs_digest: String,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorDoc>,
    pub tolerances: Value,
    pub timing_ms: Option<f64>,
}

impl RunReport {
    pub fn success(
        command: Vec<String>,
        inputs_digest: String,
        result: Value,
        tolerances: Value,
        timing_ms: Option<f64>,
    ) -> RunReport {
        RunReport {
            tool: "mixv",
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs_digest,
            exit_code: EXIT_EQUAL,
            result: Some(result),
            error: None,
            tolerances,
            timing_ms,
        }
    }

    pub fn failure(command: Vec<String>, inputs_digest: String, f: &Failure) -> RunReport {
        RunReport {
            tool: "mixv",
            version: env!("CARGO_PKG_VERSION"),
            command,
            inputs_digest,
            exit_code: f.exit_code,
            result: None,
            error: Some(ErrorDoc {
                kind: f.kind.clone(),
                message: f.message.clone(),
                detail: f.detail.clone(),
            }),
            tolerances: Value::Null,
            timing_ms: None,
        }
    }

    pub fn with_exit_code(mut self, code: i32) -> RunReport {
        self.exit_code = code;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
