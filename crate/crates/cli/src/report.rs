//! Key/value run reports with a fixed section and field order.

use std::fmt::Write as _;
use std::time::Duration;

/// `command`, then `[inputs]`, `[outputs]` and `[timing]` sections, each in
/// insertion order. Timing goes last so reruns differ only in that section.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    command: String,
    inputs: Vec<(String, String)>,
    outputs: Vec<(String, String)>,
    timing: Vec<(String, u128)>,
}

/// Reals use the shortest round-trip form; infinities are spelled out.
pub fn real(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:?}")
    }
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.push((key.into(), value.to_string()));
        self
    }

    pub fn input_real(&mut self, key: &str, value: f64) -> &mut Self {
        self.input(key, real(value))
    }

    pub fn output(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.outputs.push((key.into(), value.to_string()));
        self
    }

    pub fn output_real(&mut self, key: &str, value: f64) -> &mut Self {
        self.output(key, real(value))
    }

    pub fn time(&mut self, phase: &str, elapsed: Duration) -> &mut Self {
        self.timing.push((format!("{phase}_ms"), elapsed.as_millis()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = format!("command = {}\n", self.command);
        let mut section = |name: &str, rows: &mut dyn Iterator<Item = (&str, String)>| {
            writeln!(out, "[{name}]").unwrap();
            for (k, v) in rows {
                writeln!(out, "{k} = {v}").unwrap();
            }
        };
        section("inputs", &mut self.inputs.iter().map(|(k, v)| (k.as_str(), v.clone())));
        section("outputs", &mut self.outputs.iter().map(|(k, v)| (k.as_str(), v.clone())));
        section("timing", &mut self.timing.iter().map(|(k, v)| (k.as_str(), v.to_string())));
        out
    }
}
