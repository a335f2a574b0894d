//! Just enough JSON Schema (draft-07 subset) to validate the CLI's output
//! documents against the schemas shipped in `docs/schemas/`: `type`
//! (including type arrays), `required`, `properties`,
//! `additionalProperties`-as-schema, `items`, `enum`, and numeric
//! `minimum`/`maximum`.

use serde_json::Value;

pub fn validate(value: &Value, schema: &Value) -> Result<(), Vec<String>> {
    let mut errors = Vec::new();
    check(value, schema, "$", &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn type_name(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                "integer"
            } else {
                "number"
            }
        }
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn type_matches(value: &Value, ty: &str) -> bool {
    match ty {
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        other => type_name(value) == other,
    }
}

fn check(value: &Value, schema: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(obj) = schema.as_object() else {
        return;
    };
    if let Some(expected) = obj.get("type") {
        let allowed: Vec<&str> = match expected {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        if !allowed.iter().any(|t| type_matches(value, t)) {
            errors.push(format!(
                "{path}: expected type {allowed:?}, found {}",
                type_name(value)
            ));
            return;
        }
    }
    if let Some(options) = obj.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            errors.push(format!("{path}: {value} not in enum {options:?}"));
        }
    }
    if let Some(min) = obj.get("minimum").and_then(Value::as_f64) {
        if let Some(v) = value.as_f64() {
            if v < min {
                errors.push(format!("{path}: {v} below minimum {min}"));
            }
        }
    }
    if let Some(max) = obj.get("maximum").and_then(Value::as_f64) {
        if let Some(v) = value.as_f64() {
            if v > max {
                errors.push(format!("{path}: {v} above maximum {max}"));
            }
        }
    }
    if let Some(object) = value.as_object() {
        if let Some(required) = obj.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !object.contains_key(key) {
                    errors.push(format!("{path}: missing required key `{key}`"));
                }
            }
        }
        let properties = obj.get("properties").and_then(Value::as_object);
        for (key, item) in object {
            if let Some(sub) = properties.and_then(|p| p.get(key)) {
                check(item, sub, &format!("{path}.{key}"), errors);
            } else if let Some(additional) = obj.get("additionalProperties") {
                if additional.is_object() {
                    check(item, additional, &format!("{path}.{key}"), errors);
                }
            }
        }
    }
    if let (Some(items), Some(array)) = (obj.get("items"), value.as_array()) {
        for (i, item) in array.iter().enumerate() {
            check(item, items, &format!("{path}[{i}]"), errors);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn catches_missing_required_and_bad_types() {
        let schema = json!({
            "type": "object",
            "required": ["a", "b"],
            "properties": {
                "a": {"type": "integer"},
                "b": {"type": ["string", "null"]},
                "c": {"enum": ["x", "y"]}
            }
        });
        assert!(validate(&json!({"a": 1, "b": null}), &schema).is_ok());
        assert!(validate(&json!({"a": 1, "b": "s", "c": "x"}), &schema).is_ok());
        let errs = validate(&json!({"a": "oops"}), &schema).unwrap_err();
        assert_eq!(errs.len(), 2); // bad type + missing b
        assert!(validate(&json!({"a": 1, "b": 2}), &schema).is_err());
        assert!(validate(&json!({"a": 1, "b": null, "c": "z"}), &schema).is_err());
    }
}
