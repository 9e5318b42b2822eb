//! JSON reports (schema `report-v1`) and their validator.
//!
//! Every number is written as a string: exact rationals as `p/q`, floats in
//! plain decimal notation. Output for identical inputs is byte-identical
//! except for `timing`.

use serde_json::{json, Map, Value};

use crate::symexpr::render::plain;
use crate::symexpr::{Expr, Rational};

pub const SCHEMA: &str = "report-v1";

/// Top-level statuses a report may carry.
pub const STATUSES: [&str; 7] = ["ConditionalSymmetry", "LieSymmetry", "NotASymmetry", "Pass", "Fail", "Ok", "Error"];

#[derive(Clone, Debug)]
pub struct Report {
    pub command: Vec<String>,
    pub status: String,
    pub exit_code: i32,
    pub payload: Value,
    pub assumptions: Vec<String>,
    pub seed: u64,
    pub elapsed_s: f64,
    pub error: Option<(String, String)>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), json!(SCHEMA));
        m.insert("tool".into(), json!({"name": "condsym", "version": env!("CARGO_PKG_VERSION")}));
        m.insert("command".into(), json!(self.command));
        m.insert("status".into(), json!(self.status));
        m.insert("exit_code".into(), json!(self.exit_code.to_string()));
        m.insert("payload".into(), self.payload.clone());
        m.insert("assumptions".into(), json!(self.assumptions));
        m.insert("seed".into(), json!(self.seed.to_string()));
        m.insert("timing".into(), json!({"elapsed_s": format!("{:.3}", self.elapsed_s)}));
        if let Some((kind, message)) = &self.error {
            m.insert("error".into(), json!({"kind": kind, "message": message}));
        }
        Value::Object(m)
    }
}

pub fn rational(q: &Rational) -> Value {
    Value::String(plain(&Expr::Const(q.clone())))
}

/// Plain decimal notation; `inf`, `-inf` and `NaN` for non-finite values.
pub fn float(f: f64) -> Value {
    Value::String(if f.is_nan() {
        "NaN".into()
    } else if f.is_infinite() {
        if f > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{f}")
    })
}

pub fn count(n: usize) -> Value {
    Value::String(n.to_string())
}

pub fn expr(e: &Expr) -> Value {
    Value::String(plain(e))
}

/// A number string as written by this module.
fn is_number(s: &str) -> bool {
    if matches!(s, "inf" | "-inf" | "NaN") {
        return true;
    }
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let s = s.strip_prefix('-').unwrap_or(s);
    if let Some((p, q)) = s.split_once('/') {
        return digits(p) && digits(q);
    }
    match s.split_once('.') {
        Some((a, b)) => digits(a) && digits(b),
        None => digits(s),
    }
}

fn no_json_numbers(v: &Value, path: &str, errs: &mut Vec<String>) {
    match v {
        Value::Number(_) => errs.push(format!("{path}: numbers must be strings")),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| no_json_numbers(x, &format!("{path}[{i}]"), errs)),
        Value::Object(o) => o.iter().for_each(|(k, x)| no_json_numbers(x, &format!("{path}.{k}"), errs)),
        _ => {}
    }
}

/// Check a value against report-v1; returns every violation found.
pub fn validate(v: &Value) -> Result<(), Vec<String>> {
    let mut errs = Vec::new();
    let Some(o) = v.as_object() else {
        return Err(vec!["report must be an object".into()]);
    };
    let allowed =
        ["schema", "tool", "command", "status", "exit_code", "payload", "assumptions", "seed", "timing", "error"];
    for k in o.keys() {
        if !allowed.contains(&k.as_str()) {
            errs.push(format!("unknown field `{k}`"));
        }
    }
    for k in &allowed[..9] {
        if !o.contains_key(*k) {
            errs.push(format!("missing field `{k}`"));
        }
    }
    let string = |k: &str| o.get(k).and_then(Value::as_str);
    if o.contains_key("schema") && string("schema") != Some(SCHEMA) {
        errs.push(format!("schema must be `{SCHEMA}`"));
    }
    if let Some(t) = o.get("tool") {
        let ok = t.get("name").is_some_and(Value::is_string) && t.get("version").is_some_and(Value::is_string);
        if !ok || t.as_object().map_or(0, Map::len) != 2 {
            errs.push("tool must be {name, version} strings".into());
        }
    }
    if let Some(c) = o.get("command") {
        if !c.as_array().is_some_and(|a| a.iter().all(Value::is_string)) {
            errs.push("command must be an array of strings".into());
        }
    }
    if let Some(s) = o.get("status") {
        if !s.as_str().is_some_and(|s| STATUSES.contains(&s)) {
            errs.push(format!("status must be one of {STATUSES:?}"));
        }
    }
    if o.contains_key("exit_code") && !matches!(string("exit_code"), Some("0" | "1" | "2" | "3")) {
        errs.push("exit_code must be \"0\" to \"3\"".into());
    }
    if o.get("payload").is_some_and(|p| !p.is_object()) {
        errs.push("payload must be an object".into());
    }
    if let Some(a) = o.get("assumptions") {
        if !a.as_array().is_some_and(|a| a.iter().all(Value::is_string)) {
            errs.push("assumptions must be an array of strings".into());
        }
    }
    if o.contains_key("seed")
        && !string("seed").is_some_and(|s| !s.starts_with('-') && is_number(s) && !s.contains(['.', '/']))
    {
        errs.push("seed must be a non-negative integer string".into());
    }
    if let Some(t) = o.get("timing") {
        let ok = t.get("elapsed_s").and_then(Value::as_str).is_some_and(is_number);
        if !ok || t.as_object().map_or(0, Map::len) != 1 {
            errs.push("timing must be {elapsed_s} with a number string".into());
        }
    }
    if let Some(e) = o.get("error") {
        let ok = e.get("kind").is_some_and(Value::is_string) && e.get("message").is_some_and(Value::is_string);
        if !ok {
            errs.push("error must be {kind, message} strings".into());
        }
    }
    let code_is_error = matches!(string("exit_code"), Some("2" | "3"));
    if code_is_error != o.contains_key("error") {
        errs.push("error is present exactly when exit_code is 2 or 3".into());
    }
    no_json_numbers(v, "$", &mut errs);
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}
