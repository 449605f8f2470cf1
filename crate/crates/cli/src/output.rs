//! Deterministic CSV/JSON emission: 17 significant digits and a provenance header.

use std::io::{self, Write};

use lane_emden::Regime;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every float printed as `d.dddddddddddddddde±x`.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

struct Fixed17;

impl Formatter for Fixed17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }
}

/// Compact JSON with fixed float formatting.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fixed17);
    value.serialize(&mut ser).expect("serializable");
    String::from_utf8(buf).expect("utf-8")
}

/// SHA-256 of the resolved command, in its compact JSON form.
pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(to_json(&config.command).as_bytes()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub regime: Regime,
    pub config: Value,
}

pub fn header(config: &RunConfig) -> Header {
    Header {
        tool: "lane-emden",
        version: VERSION,
        config_hash: config_hash(config),
        regime: config.params().regime(),
        config: serde_json::to_value(&config.command).expect("serializable"),
    }
}

/// `{"header": ..., "result": ...}` followed by a newline.
pub fn json_document<T: Serialize>(config: &RunConfig, result: &T) -> Vec<u8> {
    let doc = json!({ "header": header(config), "result": result });
    let mut s = to_json(&doc);
    s.push('\n');
    s.into_bytes()
}

/// Header line, then one JSON object per line.
pub fn json_lines<T: Serialize>(config: &RunConfig, rows: &[T]) -> Vec<u8> {
    let mut s = to_json(&json!({ "header": header(config) }));
    s.push('\n');
    for row in rows {
        s.push_str(&to_json(row));
        s.push('\n');
    }
    s.into_bytes()
}

/// CSV with a `# {header}` comment line, a column row and fixed-format values.
pub struct Csv {
    buf: String,
    width: usize,
}

impl Csv {
    pub fn new(config: &RunConfig, columns: &[String]) -> Self {
        let mut buf = format!("# {}\n", to_json(&header(config)));
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Self { buf, width: columns.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.width);
        let cells: Vec<String> = values.iter().map(|v| fmt17(*v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}
