use std::time::Duration;

use serde_json::{json, Value};
use shm_core::{Configuration, Error, ParseError, Rational, Weight};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECT: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_NOT_DETERMINISTIC: u8 = 3;
pub const EXIT_FUEL: u8 = 4;
pub const EXIT_WEIGHT: u8 = 5;
pub const EXIT_BUDGET: u8 = 6;
pub const EXIT_RANGE: u8 = 7;
pub const EXIT_UNDETERMINED: u8 = 8;
pub const EXIT_PARAMS: u8 = 9;

pub const SCHEMA_VERSION: &str = "1";

/// Everything a command prints, in every format.
pub struct Report {
    pub command: &'static str,
    pub parameters: Value,
    pub result: Value,
    pub text: String,
    pub graph: Option<String>,
    pub exit: u8,
}

impl Report {
    pub fn to_json(&self, elapsed: Option<Duration>) -> String {
        let timing = match elapsed {
            Some(d) => json!({ "wall_ms": d.as_secs_f64() * 1000.0 }),
            None => Value::Null,
        };
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "parameters": self.parameters,
            "result": self.result,
            "timing": timing,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn parse(file: &str, e: &ParseError) -> Self {
        Self::new(EXIT_PARSE, format!("{file}:{e}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotDeterministic { .. } => EXIT_NOT_DETERMINISTIC,
            Error::Weight { .. } => EXIT_WEIGHT,
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            Error::EpsilonOutOfRange(_) | Error::EtaOutOfRange(_) => EXIT_RANGE,
            Error::InvalidParams(_) => EXIT_PARAMS,
            _ => EXIT_PARSE,
        };
        Self::new(code, e.to_string())
    }
}

/// `{"exact": "a/b", "approx": x}`; the fraction always has a denominator.
pub fn fraction(q: &Rational) -> Value {
    json!({
        "exact": format!("{}/{}", q.numer(), q.denom()),
        "approx": Weight::to_f64(q),
    })
}

pub fn fraction_text(q: &Rational) -> String {
    format!("{}/{} (~{:.6})", q.numer(), q.denom(), Weight::to_f64(q))
}

pub fn configuration(config: &Configuration) -> Value {
    let registers: serde_json::Map<String, Value> = config
        .registers()
        .iter()
        .map(|(r, v)| (r.to_string(), json!(v)))
        .collect();
    json!({ "counter": config.counter(), "registers": registers })
}
