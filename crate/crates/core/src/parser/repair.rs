//! Tolerance passes for dirty dictionary text, applied in a fixed order.

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pass {
    StripCodeFences,
    StraightenQuotes,
    HalfWidthPunctuation,
    RemoveTrailingCommas,
    QuoteBareKeys,
}

impl Pass {
    pub const ORDER: [Pass; 5] = [
        Pass::StripCodeFences,
        Pass::StraightenQuotes,
        Pass::HalfWidthPunctuation,
        Pass::RemoveTrailingCommas,
        Pass::QuoteBareKeys,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pass::StripCodeFences => "strip-code-fences",
            Pass::StraightenQuotes => "straighten-quotes",
            Pass::HalfWidthPunctuation => "half-width-punctuation",
            Pass::RemoveTrailingCommas => "remove-trailing-commas",
            Pass::QuoteBareKeys => "quote-bare-keys",
        }
    }

    pub fn apply(self, s: &str) -> String {
        match self {
            Pass::StripCodeFences => strip_code_fences(s),
            Pass::StraightenQuotes => s.chars().map(straighten_quote).collect(),
            Pass::HalfWidthPunctuation => s.chars().map(half_width_punct).collect(),
            Pass::RemoveTrailingCommas => remove_trailing_commas(s),
            Pass::QuoteBareKeys => quote_bare_keys(s),
        }
    }
}

/// Result of a tolerant object parse.
#[derive(Debug)]
pub struct Repaired {
    pub object: Map<String, Value>,
    /// Passes that were needed, in application order.
    pub passes: Vec<Pass>,
}

/// Parses `text` as a key-value object, first verbatim, then after each
/// cumulative tolerance pass.
pub fn parse_object(text: &str) -> Result<Repaired, String> {
    let mut current = text.to_string();
    let mut last_err = match try_object(&current) {
        Ok(object) => {
            return Ok(Repaired {
                object,
                passes: Vec::new(),
            })
        }
        Err(e) => e,
    };
    let mut applied = Vec::new();
    for pass in Pass::ORDER {
        let next = pass.apply(&current);
        if next == current {
            continue;
        }
        current = next;
        applied.push(pass);
        match try_object(&current) {
            Ok(object) => {
                return Ok(Repaired {
                    object,
                    passes: applied,
                })
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

fn try_object(text: &str) -> Result<Map<String, Value>, String> {
    match serde_json::from_str::<Value>(text.trim()) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(other) => Err(format!("expected a key-value object, found {}", kind(&other))),
        Err(e) => Err(e.to_string()),
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn strip_code_fences(s: &str) -> String {
    let mut t = s.trim();
    if let Some(rest) = t.strip_prefix("```") {
        // Drop an optional language tag on the opening fence line.
        t = match rest.find('\n') {
            Some(nl) if rest[..nl].chars().all(|c| c.is_ascii_alphanumeric() || c == ' ') => {
                &rest[nl + 1..]
            }
            _ => rest.trim_start_matches(|c: char| c.is_ascii_alphabetic()),
        };
    }
    let t = t.trim_end();
    t.strip_suffix("```").unwrap_or(t).trim().to_string()
}

fn straighten_quote(c: char) -> char {
    match c {
        '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' => '"',
        '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' => '\'',
        _ => c,
    }
}

fn half_width_punct(c: char) -> char {
    match c {
        '：' => ':',
        '，' => ',',
        '｛' => '{',
        '｝' => '}',
        '［' => '[',
        '］' => ']',
        '＂' => '"',
        _ => c,
    }
}

/// Walks `s` calling `f` for every character outside string literals.
/// Characters inside literals (and their quotes) are copied unchanged.
fn rewrite_outside_strings(s: &str, mut f: impl FnMut(&[char], usize, &mut String) -> usize) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut i = 0;
    let mut in_string = false;
    let mut escaped = false;
    while i < chars.len() {
        let c = chars[i];
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            i += 1;
            continue;
        }
        if c == '"' {
            in_string = true;
            out.push(c);
            i += 1;
            continue;
        }
        i = f(&chars, i, &mut out);
    }
    out
}

fn remove_trailing_commas(s: &str) -> String {
    rewrite_outside_strings(s, |chars, i, out| {
        if chars[i] == ',' {
            let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
            if matches!(next, Some('}') | Some(']')) {
                return i + 1;
            }
        }
        out.push(chars[i]);
        i + 1
    })
}

fn quote_bare_keys(s: &str) -> String {
    let mut stack: Vec<char> = Vec::new();
    let mut expect_key = false;
    rewrite_outside_strings(s, |chars, i, out| {
        let c = chars[i];
        match c {
            '{' => {
                stack.push('{');
                expect_key = true;
            }
            '[' => {
                stack.push('[');
                expect_key = false;
            }
            '}' | ']' => {
                stack.pop();
                expect_key = false;
            }
            ',' => expect_key = stack.last() == Some(&'{'),
            ':' => expect_key = false,
            c if c.is_whitespace() => {}
            _ if expect_key => {
                expect_key = false;
                // Read up to ':' without crossing structure characters.
                let mut j = i;
                while j < chars.len() && !matches!(chars[j], ':' | ',' | '{' | '}' | '[' | ']' | '"') {
                    j += 1;
                }
                if j < chars.len() && chars[j] == ':' {
                    let key: String = chars[i..j].iter().collect();
                    let key = key.trim();
                    out.push_str(&serde_json::to_string(key).expect("string serialization"));
                    return j;
                }
            }
            _ => {}
        }
        out.push(c);
        i + 1
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verbatim_json_needs_no_pass() {
        let r = parse_object(r#"{"a": "b"}"#).unwrap();
        assert!(r.passes.is_empty());
    }

    #[test]
    fn trailing_comma_is_removed() {
        let r = parse_object(r#"{"a": "b", "c": ["x", "y",],}"#).unwrap();
        assert_eq!(r.passes, vec![Pass::RemoveTrailingCommas]);
        assert_eq!(r.object["c"], serde_json::json!(["x", "y"]));
    }

    #[test]
    fn commas_inside_strings_survive() {
        assert_eq!(remove_trailing_commas(r#"{"a": "x,}"}"#), r#"{"a": "x,}"}"#);
    }

    #[test]
    fn code_fences() {
        let r = parse_object("```json\n{\"a\": 1}\n```").unwrap();
        assert_eq!(r.passes, vec![Pass::StripCodeFences]);
        assert_eq!(strip_code_fences("```{\"a\": 1}```"), "{\"a\": 1}");
    }

    #[test]
    fn smart_quotes_and_full_width() {
        let r = parse_object("｛“Traffic Sign”： “Yes”， “Blur”：“No”｝").unwrap();
        assert_eq!(r.object["Traffic Sign"], "Yes");
        assert_eq!(
            r.passes,
            vec![Pass::StraightenQuotes, Pass::HalfWidthPunctuation]
        );
    }

    #[test]
    fn bare_keys_are_quoted() {
        let out = quote_bare_keys(r#"{Traffic Sign: "Yes", Lane Information 1: {Turn: "Turn Left"}, "x": [a, b]}"#);
        assert_eq!(
            out,
            r#"{"Traffic Sign": "Yes", "Lane Information 1": {"Turn": "Turn Left"}, "x": [a, b]}"#
        );
    }

    #[test]
    fn non_objects_are_rejected() {
        assert!(parse_object("hello").is_err());
        assert!(parse_object("[1, 2]").is_err());
        assert!(parse_object("{broken").is_err());
        assert!(parse_object("").is_err());
    }
}
