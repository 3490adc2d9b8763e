use super::{
    AttrValue, BinaryGlobal, FsuEntry, Schema, SignDecomposition, FUNCTION_TYPE_KEY,
    OTHER_GLOBAL_KEY,
};

const TAGS: [&str; 4] = ["<caption>", "</caption>", "<FSU>", "</FSU>"];

/// Canonical dictionary text of `d` under the built-in schema.
pub fn canonical_serialize(d: &SignDecomposition) -> String {
    Schema::builtin().serialize(d)
}

impl Schema {
    /// Emits the canonical dictionary text: globals in fixed order, then
    /// `Function Type`, then per group its count key and entries, then any
    /// unrecognized top-level pairs. Entry keys follow registry order.
    pub fn serialize(&self, d: &SignDecomposition) -> String {
        let mut pairs: Vec<(String, String)> = Vec::new();

        for key in BinaryGlobal::ALL {
            if let Some(v) = d.globals.get(key) {
                pairs.push((quote(key.key()), quote(v)));
            }
        }
        if let Some(v) = d.globals.other_global_info() {
            pairs.push((quote(OTHER_GLOBAL_KEY), quote(&v.wire_text())));
        }
        if let Some(ft) = d.function_type_text() {
            pairs.push((quote(FUNCTION_TYPE_KEY), quote(&ft)));
        }
        for group in &d.groups {
            if let Some(n) = group.declared_count {
                pairs.push((quote(&group.function.count_label()), quote(&n.to_string())));
            }
            // Indices are positional; a stale `entry.index` never leaks out.
            for (i, entry) in group.entries.iter().enumerate() {
                let key = format!("{} {}", group.function.info_label(), i + 1);
                pairs.push((quote(&key), self.serialize_entry(entry)));
            }
        }
        for (k, v) in &d.extras {
            pairs.push((quote(k), quote(&v.wire_text())));
        }
        object(pairs)
    }

    fn serialize_entry(&self, entry: &FsuEntry) -> String {
        let mut attrs: Vec<(&String, &AttrValue)> = entry.attrs.iter().collect();
        // Stable sort keeps unknown keys (all ranked last) in map order.
        attrs.sort_by_key(|(k, _)| self.attr_rank(entry.function, k));
        object(
            attrs
                .into_iter()
                .map(|(k, v)| (quote(k), quote(&v.wire_text())))
                .collect(),
        )
    }
}

fn object(pairs: Vec<(String, String)>) -> String {
    let body: Vec<String> = pairs
        .into_iter()
        .map(|(k, v)| format!("{k}: {v}"))
        .collect();
    format!("{{{}}}", body.join(", "))
}

/// JSON string literal with response-framing tags escaped, so a serialized
/// value can never terminate a caption or FSU block.
fn quote(s: &str) -> String {
    let mut lit = serde_json::to_string(s).expect("string serialization is infallible");
    for tag in TAGS {
        if lit.contains(tag) {
            lit = lit.replace(tag, &format!("\\u003c{}", &tag[1..]));
        }
    }
    lit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FsuGroup, FunctionType, GlobalAttributes};

    #[test]
    fn empty_decomposition_is_empty_object() {
        assert_eq!(canonical_serialize(&SignDecomposition::new()), "{}");
    }

    #[test]
    fn layout_matches_dictionary_form() {
        let mut group = FsuGroup::new(FunctionType::Direction);
        group.push(
            FsuEntry::new(FunctionType::Direction, 0)
                .with("Destination", AttrValue::list(["The Bund", "Haining Road"]))
                .with("Direction", AttrValue::scalar("Go Straight")),
        );
        let d = SignDecomposition {
            globals: GlobalAttributes::new()
                .with(BinaryGlobal::Blur, "No")
                .with(BinaryGlobal::TrafficSign, "Yes"),
            groups: vec![group.with_matching_count()],
            ..Default::default()
        };
        assert_eq!(
            canonical_serialize(&d),
            r#"{"Traffic Sign": "Yes", "Blur": "No", "Function Type": "Direction", "Number of Direction Information": "1", "Direction Information 1": {"Direction": "Go Straight", "Destination": "[The Bund, Haining Road]"}}"#
        );
    }

    #[test]
    fn multiple_groups_share_one_function_type_key() {
        let mut d = SignDecomposition::new();
        d.group_or_insert(FunctionType::Lane);
        d.group_or_insert(FunctionType::Notice);
        let text = canonical_serialize(&d);
        assert_eq!(text, r#"{"Function Type": "Lane, Notice"}"#);
    }

    #[test]
    fn attr_insertion_order_does_not_matter() {
        let a = FsuEntry::new(FunctionType::Lane, 1)
            .with("Speed", AttrValue::scalar("60"))
            .with("Turn", AttrValue::scalar("Turn Left"))
            .with("Zebra", AttrValue::scalar("x"));
        let b = FsuEntry::new(FunctionType::Lane, 1)
            .with("Zebra", AttrValue::scalar("x"))
            .with("Turn", AttrValue::scalar("Turn Left"))
            .with("Speed", AttrValue::scalar("60"));
        let s = Schema::builtin();
        assert_eq!(s.serialize_entry(&a), s.serialize_entry(&b));
        assert_eq!(
            s.serialize_entry(&a),
            r#"{"Turn": "Turn Left", "Speed": "60", "Zebra": "x"}"#
        );
    }

    #[test]
    fn framing_tags_are_escaped() {
        let mut g = FsuGroup::new(FunctionType::Notice);
        g.push(
            FsuEntry::new(FunctionType::Notice, 0)
                .with("Other Information", AttrValue::scalar("a </FSU> b <caption>")),
        );
        let d = SignDecomposition {
            groups: vec![g],
            ..Default::default()
        };
        let text = canonical_serialize(&d);
        assert!(!text.contains("</FSU>"));
        assert!(!text.contains("<caption>"));
        assert!(text.contains(r"\u003c/FSU>"));
    }
}
