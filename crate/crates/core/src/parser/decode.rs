//! Maps a parsed key-value object onto a [`SignDecomposition`].

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::schema::{AttrValue, FsuEntry, FunctionType, Schema, SignDecomposition, TopLevelKey};
use crate::text::normalize_text;

struct PendingEntry {
    declared_index: Option<u32>,
    order: usize,
    entry: FsuEntry,
}

impl Schema {
    /// Builds a decomposition from a dictionary object. Never fails: anything
    /// that does not fit the model is kept as an extra or reported in the
    /// returned diagnostics.
    pub fn decode(&self, object: &Map<String, Value>) -> (SignDecomposition, Vec<String>) {
        let mut d = SignDecomposition::new();
        let mut diags = Vec::new();
        let mut pending: BTreeMap<FunctionType, Vec<PendingEntry>> = BTreeMap::new();

        for (order, (raw_key, value)) in object.iter().enumerate() {
            if value.is_null() {
                diags.push(format!("`{raw_key}` is null; treated as absent"));
                continue;
            }
            match self.resolve_top_level(raw_key) {
                Some(TopLevelKey::Binary(b)) => {
                    if d.globals.get(b).is_some() {
                        diags.push(format!("`{raw_key}` repeats {}; first value kept", b.key()));
                    } else {
                        d.globals.set(b, &value_text(value));
                    }
                }
                Some(TopLevelKey::OtherGlobal) => {
                    if d.globals.other_global_info().is_none() {
                        d.globals.set_other_global_info(Some(attr_value(value)));
                    }
                }
                Some(TopLevelKey::FunctionType) => {
                    let labels = match attr_value(value) {
                        AttrValue::List(items) => items,
                        AttrValue::Scalar(s) => s
                            .split(',')
                            .map(normalize_text)
                            .filter(|s| !s.is_empty())
                            .collect(),
                    };
                    for label in labels {
                        match self.parse_function(&label) {
                            Ok(f) => {
                                d.group_or_insert(f);
                            }
                            Err(e) => {
                                diags.push(e.to_string());
                                if !d.unknown_functions.contains(&e.0) {
                                    d.unknown_functions.push(e.0);
                                }
                            }
                        }
                    }
                }
                Some(TopLevelKey::Count(f)) => match value_text(value).parse::<u32>() {
                    Ok(n) => d.group_or_insert(f).declared_count = Some(n),
                    Err(_) => {
                        diags.push(format!("`{raw_key}` is not a nonnegative integer"));
                        d.extras.push((normalize_text(raw_key), attr_value(value)));
                    }
                },
                Some(TopLevelKey::Entry(f, declared_index)) => match value {
                    Value::Object(attrs) => {
                        d.group_or_insert(f);
                        let entry = self.decode_entry(f, attrs, &mut diags);
                        pending.entry(f).or_default().push(PendingEntry {
                            declared_index,
                            order,
                            entry,
                        });
                    }
                    _ => {
                        diags.push(format!("`{raw_key}` should hold a key-value object"));
                        d.extras.push((normalize_text(raw_key), attr_value(value)));
                    }
                },
                None => d.extras.push((normalize_text(raw_key), attr_value(value))),
            }
        }

        for (f, mut entries) in pending {
            // Entries without an explicit index keep their textual position
            // after the indexed ones.
            entries.sort_by_key(|p| (p.declared_index.unwrap_or(u32::MAX), p.order));
            let renumbered = entries
                .iter()
                .enumerate()
                .any(|(i, p)| p.declared_index != Some(i as u32 + 1));
            if renumbered {
                diags.push(format!("{f} entries renumbered 1..={}", entries.len()));
            }
            let group = d.group_or_insert(f);
            for p in entries {
                group.push(p.entry);
            }
        }

        if d.groups.is_empty() && d.unknown_functions.is_empty() {
            diags.push("MissingFunctionType: no function type declared".into());
        }
        (d, diags)
    }

    fn decode_entry(
        &self,
        function: FunctionType,
        attrs: &Map<String, Value>,
        diags: &mut Vec<String>,
    ) -> FsuEntry {
        let mut entry = FsuEntry::new(function, 0);
        for (raw_key, value) in attrs {
            if value.is_null() {
                continue;
            }
            let key = self
                .resolve_attr_key(function, raw_key)
                .unwrap_or_else(|| normalize_text(raw_key));
            if entry.attrs.contains_key(&key) {
                diags.push(format!("{function} entry repeats `{key}`; first value kept"));
                continue;
            }
            entry.attrs.insert(key, attr_value(value));
        }
        entry
    }
}

/// Scalar text of a JSON value; booleans read as Yes/No.
fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => normalize_text(s),
        Value::Bool(true) => "Yes".into(),
        Value::Bool(false) => "No".into(),
        Value::Null => String::new(),
        Value::Number(n) => n.to_string(),
        Value::Array(_) | Value::Object(_) => normalize_text(&v.to_string()),
    }
}

fn attr_value(v: &Value) -> AttrValue {
    match v {
        Value::String(s) => AttrValue::parse(s),
        Value::Array(items) => AttrValue::list(items.iter().map(value_text)),
        other => AttrValue::Scalar(value_text(other)),
    }
}
