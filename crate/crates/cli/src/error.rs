use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_NUMERIC: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Machine-readable failure, printed as JSON on standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub context: Value,
    #[serde(skip)]
    pub exit: u8,
    /// Help and version requests are reported by clap as errors.
    #[serde(skip)]
    pub display_only: Option<String>,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: "usage".into(), message: message.into(), context: Value::Null, exit: EXIT_USAGE, display_only: None }
    }

    /// Parameter validation failures count as usage errors.
    pub fn usage_from(e: lane_emden::Error) -> Self {
        Self { context: json!({ "kind": e.code() }), ..Self::usage(e.to_string()) }
    }

    pub fn from_clap(e: clap::Error) -> Self {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                Self { exit: 0, display_only: Some(e.render().to_string()), ..Self::usage("") }
            }
            kind => Self {
                context: json!({ "kind": format!("{kind:?}") }),
                ..Self::usage(e.render().to_string().trim_end().to_string())
            },
        }
    }

    pub fn numeric(e: lane_emden::Error, command: &str) -> Self {
        let mut context = json!({ "command": command });
        if let lane_emden::Error::Divergence { t, norm, guard, last_state } = &e {
            context["t"] = json!(t);
            context["norm"] = json!(norm);
            context["guard"] = json!(guard);
            context["last_state"] = json!(last_state);
        }
        Self { code: e.code().into(), message: e.to_string(), context, exit: EXIT_NUMERIC, display_only: None }
    }

    pub fn io(e: std::io::Error, path: &std::path::Path) -> Self {
        Self {
            code: "io".into(),
            message: e.to_string(),
            context: json!({ "path": path.display().to_string() }),
            exit: EXIT_NUMERIC,
            display_only: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}
