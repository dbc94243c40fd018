//! Validation of JSON documents against the shipped experiment schema.
//!
//! Supports the subset of JSON Schema the schema uses: `type`, `enum`,
//! `const`, numeric bounds, `minLength`, `items`, `minItems`, `maxItems`,
//! `properties`, `required`, `additionalProperties`, `minProperties`,
//! `allOf`, `anyOf`, `oneOf`, `if`/`then`/`else` and local `$ref`.
//! Annotation keywords are ignored.

use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};

/// The experiment configuration schema.
pub const EXPERIMENT_SCHEMA: &str = include_str!("../schema/experiment_config.schema.json");

/// One failed constraint, located by a JSON pointer into the instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub pointer: String,
    pub message: String,
}

impl Violation {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

/// Parsed experiment schema.
pub fn experiment_schema() -> Value {
    serde_json::from_str(EXPERIMENT_SCHEMA).expect("bundled schema is valid JSON")
}

/// All violations of `instance` against `schema`, sorted by pointer and
/// without duplicates.
pub fn validate(schema: &Value, instance: &Value) -> Vec<Violation> {
    let mut out = Vec::new();
    Validator { root: schema }.check(schema, instance, "", &mut out);
    out.sort_by(|a, b| a.pointer.cmp(&b.pointer));
    out.dedup();
    out
}

/// Appends `key` to a JSON pointer with `~` and `/` escaped.
pub fn push_pointer(base: &str, key: &str) -> String {
    format!("{base}/{}", key.replace('~', "~0").replace('/', "~1"))
}

struct Validator<'a> {
    root: &'a Value,
}

impl<'a> Validator<'a> {
    fn resolve(&self, reference: &str) -> Option<&'a Value> {
        reference.strip_prefix('#').and_then(|p| self.root.pointer(p))
    }

    fn matches(&self, schema: &Value, inst: &Value, ptr: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        self.check(schema, inst, ptr, &mut out);
        out
    }

    fn check(&self, schema: &Value, inst: &Value, ptr: &str, out: &mut Vec<Violation>) {
        let Some(s) = schema.as_object() else {
            if schema == &Value::Bool(false) {
                out.push(Violation::new(ptr, "no value is allowed here"));
            }
            return;
        };

        if let Some(r) = s.get("$ref").and_then(Value::as_str) {
            match self.resolve(r) {
                Some(target) => self.check(target, inst, ptr, out),
                None => out.push(Violation::new(ptr, format!("unresolvable schema reference {r}"))),
            }
        }

        if let Some(t) = s.get("type") {
            if !type_matches(t, inst) {
                out.push(Violation::new(
                    ptr,
                    format!("expected {}, found {}", type_name(t), json_kind(inst)),
                ));
                // Further keywords would only repeat the type error.
                return;
            }
        }
        if let Some(allowed) = s.get("enum").and_then(Value::as_array) {
            if !allowed.iter().any(|a| json_eq(a, inst)) {
                let list: Vec<String> = allowed.iter().map(Value::to_string).collect();
                out.push(Violation::new(
                    ptr,
                    format!("{inst} is not one of {}", list.join(", ")),
                ));
            }
        }
        if let Some(c) = s.get("const") {
            if !json_eq(c, inst) {
                out.push(Violation::new(ptr, format!("expected {c}, found {inst}")));
            }
        }
        if let Some(x) = inst.as_f64() {
            self.check_number(s, x, ptr, out);
        }
        if let Some(text) = inst.as_str() {
            if let Some(min) = s.get("minLength").and_then(Value::as_u64) {
                if (text.chars().count() as u64) < min {
                    out.push(Violation::new(ptr, format!("shorter than {min} characters")));
                }
            }
        }
        if let Some(items) = inst.as_array() {
            self.check_array(s, items, ptr, out);
        }
        if let Some(obj) = inst.as_object() {
            self.check_object(s, obj, ptr, out);
        }

        if let Some(all) = s.get("allOf").and_then(Value::as_array) {
            for sub in all {
                self.check(sub, inst, ptr, out);
            }
        }
        if let Some(any) = s.get("anyOf").and_then(Value::as_array) {
            self.check_alternatives(any, inst, ptr, out, false);
        }
        if let Some(one) = s.get("oneOf").and_then(Value::as_array) {
            self.check_alternatives(one, inst, ptr, out, true);
        }
        if let Some(cond) = s.get("if") {
            let branch = if self.matches(cond, inst, ptr).is_empty() {
                s.get("then")
            } else {
                s.get("else")
            };
            if let Some(b) = branch {
                self.check(b, inst, ptr, out);
            }
        }
    }

    fn check_number(&self, s: &Map<String, Value>, x: f64, ptr: &str, out: &mut Vec<Violation>) {
        let bound = |k: &str| s.get(k).and_then(Value::as_f64);
        if let Some(m) = bound("minimum") {
            if x < m {
                out.push(Violation::new(ptr, format!("{x} is below the minimum {m}")));
            }
        }
        if let Some(m) = bound("maximum") {
            if x > m {
                out.push(Violation::new(ptr, format!("{x} is above the maximum {m}")));
            }
        }
        if let Some(m) = bound("exclusiveMinimum") {
            if x <= m {
                out.push(Violation::new(ptr, format!("{x} must be greater than {m}")));
            }
        }
        if let Some(m) = bound("exclusiveMaximum") {
            if x >= m {
                out.push(Violation::new(ptr, format!("{x} must be less than {m}")));
            }
        }
    }

    fn check_array(&self, s: &Map<String, Value>, items: &[Value], ptr: &str, out: &mut Vec<Violation>) {
        if let Some(min) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                out.push(Violation::new(ptr, format!("needs at least {min} items, found {}", items.len())));
            }
        }
        if let Some(max) = s.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > max {
                out.push(Violation::new(ptr, format!("allows at most {max} items, found {}", items.len())));
            }
        }
        if let Some(item_schema) = s.get("items") {
            for (i, item) in items.iter().enumerate() {
                self.check(item_schema, item, &format!("{ptr}/{i}"), out);
            }
        }
    }

    fn check_object(
        &self,
        s: &Map<String, Value>,
        obj: &Map<String, Value>,
        ptr: &str,
        out: &mut Vec<Violation>,
    ) {
        if let Some(req) = s.get("required").and_then(Value::as_array) {
            for key in req.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    out.push(Violation::new(
                        push_pointer(ptr, key),
                        "required property is missing",
                    ));
                }
            }
        }
        if let Some(min) = s.get("minProperties").and_then(Value::as_u64) {
            if (obj.len() as u64) < min {
                out.push(Violation::new(ptr, format!("needs at least {min} properties")));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (key, value) in obj {
            let child = push_pointer(ptr, key);
            match props.and_then(|p| p.get(key)) {
                Some(sub) => self.check(sub, value, &child, out),
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => {
                        out.push(Violation::new(child, "unknown property"));
                    }
                    Some(extra @ Value::Object(_)) => self.check(extra, value, &child, out),
                    _ => {}
                },
            }
        }
    }

    fn check_alternatives(
        &self,
        alternatives: &[Value],
        inst: &Value,
        ptr: &str,
        out: &mut Vec<Violation>,
        exclusive: bool,
    ) {
        let results: Vec<(bool, Vec<Violation>)> = alternatives
            .iter()
            .map(|alt| {
                let typed = alt
                    .get("type")
                    .map_or(true, |t| type_matches(t, inst));
                (typed, self.matches(alt, inst, ptr))
            })
            .collect();
        let passing = results.iter().filter(|r| r.1.is_empty()).count();
        if passing == 0 {
            // Report the closest alternative of the right type so the message
            // names a field.
            let closest = results
                .into_iter()
                .min_by_key(|(typed, v)| (!typed, v.len()))
                .map(|r| r.1)
                .unwrap_or_default();
            if closest.is_empty() {
                out.push(Violation::new(ptr, "matches none of the allowed forms"));
            }
            out.extend(closest);
        } else if exclusive && passing > 1 {
            out.push(Violation::new(ptr, "matches more than one allowed form"));
        }
    }
}

fn type_matches(t: &Value, inst: &Value) -> bool {
    match t {
        Value::String(name) => single_type_matches(name, inst),
        Value::Array(names) => names
            .iter()
            .filter_map(Value::as_str)
            .any(|n| single_type_matches(n, inst)),
        _ => true,
    }
}

fn single_type_matches(name: &str, inst: &Value) -> bool {
    match name {
        "object" => inst.is_object(),
        "array" => inst.is_array(),
        "string" => inst.is_string(),
        "boolean" => inst.is_boolean(),
        "null" => inst.is_null(),
        "number" => inst.is_number(),
        "integer" => {
            inst.is_u64() || inst.is_i64() || inst.as_f64().is_some_and(|x| x.fract() == 0.0)
        }
        _ => false,
    }
}

fn type_name(t: &Value) -> String {
    match t {
        Value::String(s) => s.clone(),
        Value::Array(v) => v
            .iter()
            .filter_map(Value::as_str)
            .collect::<Vec<_>>()
            .join(" or "),
        other => other.to_string(),
    }
}

fn json_kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_f64() => "number",
        Value::Number(_) => "integer",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// JSON equality with numbers compared by value, so `1` equals `1.0`.
fn json_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        _ => a == b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn errors(instance: Value) -> Vec<Violation> {
        validate(&experiment_schema(), &instance)
    }

    #[test]
    fn minimal_two_state_config_is_valid() {
        let v = json!({"kind": "two_state_sweep", "params": {"p": [0.5], "theta": [1.0]}});
        assert_eq!(errors(v), vec![]);
    }

    #[test]
    fn missing_seed_with_trials_is_reported_at_seed() {
        let v = json!({
            "kind": "gu_sweep",
            "trials": 10,
            "params": {"n": [3], "eta0": [0.5]}
        });
        let e = errors(v);
        assert_eq!(e, vec![Violation::new("/seed", "required property is missing")]);
    }

    #[test]
    fn nested_pointers_locate_bad_values() {
        let v = json!({
            "kind": "gu_sweep",
            "params": {"n": [3, 2], "eta0": [0.5, 1.5], "colour": 1}
        });
        let e = errors(v);
        let ptrs: Vec<&str> = e.iter().map(|v| v.pointer.as_str()).collect();
        assert_eq!(ptrs, vec!["/params/colour", "/params/eta0/1", "/params/n/1"]);
    }

    #[test]
    fn grid_alternatives() {
        let ok = json!({"kind": "two_state_sweep",
            "params": {"p": {"start": 0.1, "stop": 1.0, "count": 3}, "theta": [0.2]}});
        assert!(errors(ok).is_empty());
        let bad = json!({"kind": "two_state_sweep",
            "params": {"p": {"start": 0.1, "count": 3}, "theta": [0.2]}});
        let e = errors(bad);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].pointer, "/params/p/stop");
    }

    #[test]
    fn type_errors_do_not_cascade() {
        let e = errors(json!({"kind": "bounds", "params": "none"}));
        assert_eq!(e, vec![Violation::new("/params", "expected object, found string")]);
    }

    #[test]
    fn unknown_kind_and_missing_params() {
        let e = errors(json!({"kind": "other"}));
        let ptrs: Vec<&str> = e.iter().map(|v| v.pointer.as_str()).collect();
        assert_eq!(ptrs, vec!["/kind", "/params"]);
    }

    #[test]
    fn ensemble_family_requirements() {
        let v = json!({"kind": "sequential_run", "params": {
            "ensemble": {"family": "two_state", "p": 0.5},
            "parties": 2,
            "policy": {"kind": "eta0", "values": [0.9]}
        }});
        let e = errors(v);
        assert_eq!(e, vec![Violation::new("/params/ensemble/theta", "required property is missing")]);
    }

    #[test]
    fn pointer_escaping() {
        assert_eq!(push_pointer("/a", "b/c~d"), "/a/b~1c~0d");
    }

    #[test]
    fn integer_type_accepts_integral_floats_only() {
        assert!(single_type_matches("integer", &json!(3)));
        assert!(single_type_matches("integer", &json!(3.0)));
        assert!(!single_type_matches("integer", &json!(3.5)));
    }
}
