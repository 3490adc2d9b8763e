//! Caption-FSU response parsing and the two binary format rewards.

mod decode;
mod repair;

use serde::{Deserialize, Serialize};

use crate::schema::{Schema, SignDecomposition};

pub use repair::Pass;

pub const CAPTION_OPEN: &str = "<caption>";
pub const CAPTION_CLOSE: &str = "</caption>";
pub const FSU_OPEN: &str = "<FSU>";
pub const FSU_CLOSE: &str = "</FSU>";

pub(crate) const TAGS: [&str; 4] = [CAPTION_OPEN, CAPTION_CLOSE, FSU_OPEN, FSU_CLOSE];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParseOptions {
    /// Accept tag-free prose before the caption block and after the FSU block.
    pub lenient_format: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub raw: String,
    pub caption: Option<String>,
    pub fsu_text: Option<String>,
    pub decomposition: Option<SignDecomposition>,
    pub format_ok: bool,
    pub parse_ok: bool,
    pub parse_diagnostics: Vec<String>,
}

pub fn parse_response(raw: &str) -> ModelResponse {
    parse_response_with(raw, ParseOptions::default(), Schema::builtin())
}

pub fn parse_response_with(raw: &str, opts: ParseOptions, schema: &Schema) -> ModelResponse {
    let caption = block(raw, CAPTION_OPEN, CAPTION_CLOSE).map(str::to_string);
    let fsu_text = block(raw, FSU_OPEN, FSU_CLOSE).map(str::to_string);
    let format_ok = format_matches(raw, opts);

    let mut parse_diagnostics = Vec::new();
    let decomposition = match &fsu_text {
        None => {
            parse_diagnostics.push("no FSU block".to_string());
            None
        }
        Some(text) => match parse_dictionary_with(text, schema) {
            Ok((d, diags)) => {
                parse_diagnostics.extend(diags);
                parse_diagnostics.extend(schema.validate(&d).iter().map(|v| v.to_string()));
                Some(d)
            }
            Err(e) => {
                parse_diagnostics.push(format!("FSU block is not a key-value object: {e}"));
                None
            }
        },
    };
    ModelResponse {
        raw: raw.to_string(),
        caption,
        fsu_text,
        parse_ok: decomposition.is_some(),
        decomposition,
        format_ok,
        parse_diagnostics,
    }
}

/// Tolerantly parses dictionary text into a decomposition. The diagnostics
/// name every tolerance pass that was needed and every decoding note.
pub fn parse_dictionary(text: &str) -> Result<(SignDecomposition, Vec<String>), String> {
    parse_dictionary_with(text, Schema::builtin())
}

pub fn parse_dictionary_with(
    text: &str,
    schema: &Schema,
) -> Result<(SignDecomposition, Vec<String>), String> {
    let repaired = repair::parse_object(text)?;
    let mut diags: Vec<String> = repaired
        .passes
        .iter()
        .map(|p| format!("tolerance pass applied: {}", p.name()))
        .collect();
    let (d, decode_diags) = schema.decode(&repaired.object);
    diags.extend(decode_diags);
    Ok((d, diags))
}

/// 1 iff `raw` has the Caption-FSU shape.
pub fn reward_caption_fsu_format(raw: &str) -> u8 {
    format_matches(raw, ParseOptions::default()) as u8
}

/// 1 iff an FSU block exists and its body parses to a key-value object.
/// Schema violations do not affect this reward.
pub fn reward_fsu_parsable(raw: &str) -> u8 {
    block(raw, FSU_OPEN, FSU_CLOSE)
        .map(|t| repair::parse_object(t).is_ok())
        .unwrap_or(false) as u8
}

/// Inner text of the first `open` block. A block left open at the end of the
/// input runs to the end.
fn block<'a>(raw: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = raw.find(open)? + open.len();
    let rest = &raw[start..];
    Some(match rest.find(close) {
        Some(end) => &rest[..end],
        None => rest,
    })
}

fn has_tag(s: &str) -> bool {
    TAGS.iter().any(|t| s.contains(t))
}

/// Grammar: `ws <caption> C </caption> ws <FSU> A (</FSU> | end) ws`, where
/// neither C nor A contains a framing tag. Lenient mode also admits
/// tag-free text before the caption and after the FSU block.
fn format_matches(raw: &str, opts: ParseOptions) -> bool {
    let s = raw.trim();
    let rest = if opts.lenient_format {
        match s.find(CAPTION_OPEN) {
            Some(i) if !has_tag(&s[..i]) => &s[i..],
            _ => return false,
        }
    } else {
        s
    };
    let Some(rest) = rest.strip_prefix(CAPTION_OPEN) else {
        return false;
    };
    let Some(end) = rest.find(CAPTION_CLOSE) else {
        return false;
    };
    if has_tag(&rest[..end]) {
        return false;
    }
    let rest = rest[end + CAPTION_CLOSE.len()..].trim_start();
    let Some(rest) = rest.strip_prefix(FSU_OPEN) else {
        return false;
    };
    match rest.find(FSU_CLOSE) {
        None => !has_tag(rest),
        Some(end) => {
            let tail = &rest[end + FSU_CLOSE.len()..];
            !has_tag(&rest[..end])
                && if opts.lenient_format {
                    !has_tag(tail)
                } else {
                    tail.trim().is_empty()
                }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_fsu_block_parses_without_format() {
        let r = parse_response("<FSU>{}</FSU>");
        assert!(!r.format_ok);
        assert!(r.parse_ok);
        assert!(r.decomposition.unwrap().groups.is_empty());
        assert!(r.parse_diagnostics.iter().any(|d| d.contains("MissingFunctionType")));
    }

    #[test]
    fn unterminated_fsu_block() {
        let r = parse_response("<caption>x</caption><FSU>{broken");
        assert!(r.format_ok);
        assert!(!r.parse_ok);
        assert_eq!(r.caption.as_deref(), Some("x"));
        assert_eq!(r.fsu_text.as_deref(), Some("{broken"));
    }

    #[test]
    fn format_reward_cases() {
        assert_eq!(reward_caption_fsu_format("<caption>a</caption>"), 0);
        assert_eq!(
            reward_caption_fsu_format("<caption>a</caption><caption>b</caption><FSU>{}</FSU>"),
            0
        );
        assert_eq!(reward_caption_fsu_format("  <caption>a</caption>\n<FSU>{}</FSU>\n"), 1);
        assert_eq!(reward_caption_fsu_format("hi <caption>a</caption><FSU>{}</FSU>"), 0);
        assert_eq!(reward_caption_fsu_format("<caption>a</caption><FSU>{}</FSU> bye"), 0);
        assert_eq!(
            reward_caption_fsu_format("<caption>a <FSU> b</caption><FSU>{}</FSU>"),
            0
        );
    }

    #[test]
    fn lenient_admits_surrounding_prose() {
        let s = Schema::builtin();
        let lenient = ParseOptions { lenient_format: true };
        let raw = "Sure! <caption>a</caption><FSU>{}</FSU> Done.";
        assert!(parse_response_with(raw, lenient, s).format_ok);
        assert!(!parse_response_with(raw, ParseOptions::default(), s).format_ok);
        let nested = "<FSU> <caption>a</caption><FSU>{}</FSU>";
        assert!(!parse_response_with(nested, lenient, s).format_ok);
    }

    #[test]
    fn parsable_reward_cases() {
        assert_eq!(reward_fsu_parsable("<caption>c</caption><FSU>hello</FSU>"), 0);
        assert_eq!(reward_fsu_parsable("<caption>c</caption>"), 0);
        assert_eq!(
            reward_fsu_parsable(r#"<FSU>{"Traffic Sign": "Yes", "Blur": "No",}</FSU>"#),
            1
        );
    }

    #[test]
    fn tolerance_passes_reported() {
        let (_, diags) = parse_dictionary("```json\n{\"Traffic Sign\": \"Yes\",}\n```").unwrap();
        assert!(diags.iter().any(|d| d.ends_with("strip-code-fences")));
        assert!(diags.iter().any(|d| d.ends_with("remove-trailing-commas")));
    }
}
