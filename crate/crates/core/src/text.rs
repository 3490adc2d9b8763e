//! Text normalization applied to every key and value before comparison.

use unicode_normalization::UnicodeNormalization;

const FULLWIDTH_FIRST: u32 = 0xFF01;
const FULLWIDTH_LAST: u32 = 0xFF5E;
const FULLWIDTH_OFFSET: u32 = 0xFEE0;
const IDEOGRAPHIC_SPACE: char = '\u{3000}';

/// Maps a full-width ASCII variant (U+FF01..=U+FF5E) or the ideographic
/// space to its half-width counterpart. Other characters pass through.
pub fn fold_width(c: char) -> char {
    let cp = c as u32;
    if (FULLWIDTH_FIRST..=FULLWIDTH_LAST).contains(&cp) {
        char::from_u32(cp - FULLWIDTH_OFFSET).unwrap_or(c)
    } else if c == IDEOGRAPHIC_SPACE {
        ' '
    } else {
        c
    }
}

/// NFC-normalizes `raw`, folds full-width Latin letters, digits and
/// punctuation to half-width, trims, and collapses internal whitespace runs
/// to a single space.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.nfc().map(fold_width) {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(c);
    }
    out
}

/// Case-folded lookup form of a normalized label.
pub(crate) fn lookup_key(raw: &str) -> String {
    normalize_text(raw).to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_and_collapses() {
        assert_eq!(normalize_text("  Go   Straight "), "Go Straight");
        assert_eq!(normalize_text("a\t\n b"), "a b");
    }

    #[test]
    fn empty_is_fixed_point() {
        assert_eq!(normalize_text(""), "");
        assert_eq!(normalize_text("   "), "");
    }

    #[test]
    fn folds_full_width() {
        assert_eq!(normalize_text("ＦＵＬＯＮＧ　Ｒｄ"), "FULONG Rd");
        assert_eq!(normalize_text("６０ｋｍ／ｈ"), "60km/h");
    }

    #[test]
    fn width_folding_matches_character_table() {
        // Independent oracle: half-width ASCII '!'..='~' sit exactly 0xFEE0
        // below their full-width forms.
        for (i, half) in ('!'..='~').enumerate() {
            let full = char::from_u32(0xFF01 + i as u32).unwrap();
            assert_eq!(fold_width(full), half, "U+{:04X}", full as u32);
        }
        let input = "ＦＵＬＯＮＧ　Ｒｄ";
        let expected: Vec<char> = "FULONG Rd".chars().collect();
        let folded: Vec<char> = input.chars().map(fold_width).collect();
        assert_eq!(folded, expected);
    }

    #[test]
    fn composes_to_nfc() {
        // "e" + combining acute becomes the precomposed form.
        assert_eq!(normalize_text("Caf\u{0065}\u{0301}"), "Caf\u{00E9}");
    }

    #[test]
    fn keeps_cjk_text() {
        assert_eq!(normalize_text("  福龙路  "), "福龙路");
    }
}
