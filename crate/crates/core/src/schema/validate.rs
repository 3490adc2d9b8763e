use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AttrValue, BinaryGlobal, Schema, SignDecomposition, NO, YES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    MissingGlobal,
    NonBinaryValue,
    MissingFunctionType,
    UnknownFunction,
    DuplicateGroup,
    EntryFunctionMismatch,
    CountMismatch,
    UnknownKey,
    UnknownTopLevelKey,
    NotInEnumeration,
    EmptyList,
    EmptyValue,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Dotted location in the dictionary form, e.g. `Direction Information 2.Turn`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at `{}`: {}", self.code, self.path, self.message)
    }
}

/// Checks `d` against the built-in schema.
pub fn validate(d: &SignDecomposition) -> Vec<Violation> {
    Schema::builtin().validate(d)
}

impl Schema {
    /// Lists every schema violation in `d`. Empty iff `d` conforms.
    pub fn validate(&self, d: &SignDecomposition) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |code, path: String, message: String| {
            out.push(Violation {
                code,
                path,
                message,
            })
        };

        for key in BinaryGlobal::ALL {
            match d.globals.get(key) {
                None => push(
                    ViolationCode::MissingGlobal,
                    key.key().into(),
                    "global attribute is absent".into(),
                ),
                Some(v) if v != YES && v != NO => push(
                    ViolationCode::NonBinaryValue,
                    key.key().into(),
                    format!("expected Yes or No, got `{v}`"),
                ),
                Some(_) => {}
            }
        }
        if let Some(v) = d.globals.other_global_info() {
            check_value(v, super::OTHER_GLOBAL_KEY.into(), &mut push);
        }

        if d.groups.is_empty() && d.unknown_functions.is_empty() {
            push(
                ViolationCode::MissingFunctionType,
                super::FUNCTION_TYPE_KEY.into(),
                "no function type declared".into(),
            );
        }
        for label in &d.unknown_functions {
            push(
                ViolationCode::UnknownFunction,
                super::FUNCTION_TYPE_KEY.into(),
                format!("`{label}` is not one of Direction, Notice, Lane, Construction"),
            );
        }

        for (i, group) in d.groups.iter().enumerate() {
            let f = group.function;
            if d.groups[..i].iter().any(|g| g.function == f) {
                push(
                    ViolationCode::DuplicateGroup,
                    f.info_label(),
                    format!("more than one {f} group"),
                );
            }
            if let Some(n) = group.declared_count {
                if n as usize != group.entries.len() {
                    push(
                        ViolationCode::CountMismatch,
                        f.count_label(),
                        format!("declared {n}, found {}", group.entries.len()),
                    );
                }
            }
            for (i, entry) in group.entries.iter().enumerate() {
                let base = format!("{} {}", f.info_label(), i + 1);
                if entry.function != f {
                    push(
                        ViolationCode::EntryFunctionMismatch,
                        base.clone(),
                        format!("{} entry inside the {f} group", entry.function),
                    );
                }
                for (key, value) in &entry.attrs {
                    let path = format!("{base}.{key}");
                    if !self.registry(f).contains(key) {
                        push(
                            ViolationCode::UnknownKey,
                            path,
                            format!("`{key}` is not a {f} key"),
                        );
                        continue;
                    }
                    check_value(value, path.clone(), &mut push);
                    if let Some(allowed) = self.enumeration(f, key) {
                        let text = value.canonical_text();
                        if value.is_list() || !allowed.contains(&text) {
                            push(
                                ViolationCode::NotInEnumeration,
                                path,
                                format!("`{text}` is not an allowed {f}.{key} value"),
                            );
                        }
                    }
                }
            }
        }

        for (key, _) in &d.extras {
            push(
                ViolationCode::UnknownTopLevelKey,
                key.clone(),
                "unrecognized top-level key".into(),
            );
        }
        out
    }
}

fn check_value(v: &AttrValue, path: String, push: &mut impl FnMut(ViolationCode, String, String)) {
    match v {
        AttrValue::List(items) if items.is_empty() => {
            push(ViolationCode::EmptyList, path, "list value has no items".into())
        }
        AttrValue::Scalar(s) if s.is_empty() => {
            push(ViolationCode::EmptyValue, path, "value is empty".into())
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FsuEntry, FsuGroup, FunctionType, GlobalAttributes};

    fn clean_globals() -> GlobalAttributes {
        BinaryGlobal::ALL
            .into_iter()
            .fold(GlobalAttributes::new(), |g, k| g.with(k, "No"))
    }

    fn direction_sign(count: Option<u32>) -> SignDecomposition {
        let mut group = FsuGroup::new(FunctionType::Direction);
        group.push(
            FsuEntry::new(FunctionType::Direction, 0)
                .with("Direction", AttrValue::scalar("Go Straight"))
                .with("Destination", AttrValue::scalar("Fulong Rd")),
        );
        group.push(
            FsuEntry::new(FunctionType::Direction, 0)
                .with("Direction", AttrValue::scalar("Turn Left")),
        );
        group.declared_count = count;
        SignDecomposition {
            globals: clean_globals(),
            groups: vec![group],
            ..Default::default()
        }
    }

    fn codes(v: &[Violation]) -> Vec<ViolationCode> {
        v.iter().map(|v| v.code).collect()
    }

    #[test]
    fn conforming_sign_has_no_violations() {
        assert!(validate(&direction_sign(Some(2))).is_empty());
        assert!(validate(&direction_sign(None)).is_empty());
    }

    #[test]
    fn count_mismatch() {
        let v = validate(&direction_sign(Some(3)));
        assert_eq!(codes(&v), vec![ViolationCode::CountMismatch]);
        assert_eq!(v[0].path, "Number of Direction Information");
    }

    #[test]
    fn destination_is_not_a_lane_key() {
        let mut group = FsuGroup::new(FunctionType::Lane);
        group.push(
            FsuEntry::new(FunctionType::Lane, 0)
                .with("Turn", AttrValue::scalar("Turn Left"))
                .with("Destination", AttrValue::scalar("Airport")),
        );
        let d = SignDecomposition {
            globals: clean_globals(),
            groups: vec![group.with_matching_count()],
            ..Default::default()
        };
        let v = validate(&d);
        assert_eq!(codes(&v), vec![ViolationCode::UnknownKey]);
        assert_eq!(v[0].path, "Lane Information 1.Destination");
    }

    #[test]
    fn closed_set_and_binary_checks() {
        let mut d = direction_sign(Some(2));
        d.globals.set(BinaryGlobal::Blur, "Maybe");
        d.groups[0].entries[1]
            .attrs
            .insert("Direction".into(), AttrValue::scalar("Sideways"));
        let v = validate(&d);
        assert_eq!(
            codes(&v),
            vec![ViolationCode::NonBinaryValue, ViolationCode::NotInEnumeration]
        );
    }

    #[test]
    fn empty_decomposition() {
        let v = validate(&SignDecomposition::new());
        let c = codes(&v);
        assert_eq!(c.iter().filter(|c| **c == ViolationCode::MissingGlobal).count(), 5);
        assert!(c.contains(&ViolationCode::MissingFunctionType));
    }

    #[test]
    fn empty_list_is_a_violation_not_a_crash() {
        let mut d = direction_sign(Some(2));
        d.groups[0].entries[0]
            .attrs
            .insert("Destination".into(), AttrValue::parse("[]"));
        assert_eq!(codes(&validate(&d)), vec![ViolationCode::EmptyList]);
    }

    #[test]
    fn validate_is_pure() {
        let mut d = direction_sign(Some(5));
        d.unknown_functions.push("Parking".into());
        d.extras.push(("Colour".into(), AttrValue::scalar("blue")));
        assert_eq!(validate(&d), validate(&d));
        assert_eq!(
            codes(&validate(&d)),
            vec![
                ViolationCode::UnknownFunction,
                ViolationCode::CountMismatch,
                ViolationCode::UnknownTopLevelKey
            ]
        );
    }
}
