//! JSON-lines results files. The first record echoes the configuration, so a
//! results file can be passed back as `--config` to rerun the experiment.

use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiments::Outcome;

/// Renders a complete results document. Contains no timestamps and no output
/// path, so equal configurations give byte-identical output.
pub fn render(cfg: &ExperimentConfig, outcome: &Outcome) -> String {
    let echo = ExperimentConfig {
        output: None,
        ..cfg.clone()
    };
    let mut out = String::new();
    let mut push = |v: Value| {
        out.push_str(&v.to_string());
        out.push('\n');
    };
    push(json!({
        "record": "config",
        "kind": cfg.kind.name(),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "config_toml": echo.to_toml(),
    }));
    for (i, t) in outcome.trials.iter().enumerate() {
        let mut rec = json!({ "record": "trial", "trial": i });
        if let (Value::Object(dst), Value::Object(src)) = (&mut rec, t) {
            dst.extend(src.clone());
        }
        push(rec);
    }
    push(json!({ "record": "aggregate", "result": outcome.aggregate }));
    out.push_str(&footer(outcome));
    out
}

/// Human-readable summary lines, each prefixed with `# `.
pub fn footer(outcome: &Outcome) -> String {
    outcome.summary.iter().map(|l| format!("# {l}\n")).collect()
}

/// Accepts a TOML config or a results file produced by [`render`].
pub fn load_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.trim_start().starts_with('{') {
        let rec: Value =
            serde_json::from_str(first).map_err(|e| CliError::Config(format!("results file header: {e}")))?;
        let toml = rec
            .get("config_toml")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::Config("results file has no configuration echo".into()))?;
        return ExperimentConfig::from_toml(toml);
    }
    ExperimentConfig::from_toml(text)
}
