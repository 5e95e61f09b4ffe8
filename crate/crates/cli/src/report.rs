use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::Failure;

/// One JSON report per invocation, see `schema/report.schema.json`.
#[derive(Serialize, Debug)]
pub struct Report {
    pub metric: String,
    pub value: Value,
    pub params: Map<String, Value>,
    pub grids: Vec<String>,
    pub elapsed_s: f64,
    #[serde(skip)]
    pub destination: Option<PathBuf>,
}

impl Report {
    pub fn new(metric: impl Into<String>, started: Instant) -> Self {
        Self {
            metric: metric.into(),
            value: Value::Null,
            params: Map::new(),
            grids: Vec::new(),
            elapsed_s: started.elapsed().as_secs_f64(),
            destination: None,
        }
    }

    pub fn value(mut self, value: impl Into<Value>) -> Self {
        self.value = value.into();
        self
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("plain data"),
        );
        self
    }

    /// Merges the fields of a serialisable struct into `params`.
    pub fn params_from(mut self, value: impl Serialize) -> Self {
        if let Value::Object(map) = serde_json::to_value(value).expect("plain data") {
            self.params.extend(map);
        }
        self
    }

    pub fn grid(mut self, path: Option<&Path>) -> Self {
        if let Some(p) = path {
            self.grids.push(p.display().to_string());
        }
        self
    }

    pub fn to(mut self, destination: Option<&Path>) -> Self {
        self.destination = destination.map(Path::to_path_buf);
        self
    }

    pub fn emit(&self) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(self).expect("report serialises");
        match &self.destination {
            Some(p) => std::fs::write(p, text + "\n")
                .map_err(|e| Failure::Output(format!("{}: {e}", p.display()))),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

/// A float, or `null` when it is not finite.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}
