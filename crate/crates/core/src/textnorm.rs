//! Unicode normalization helpers used for header matching and free-text
//! preprocessing.

use std::collections::HashMap;
use std::sync::OnceLock;

use unicode_normalization::UnicodeNormalization;

pub fn nfkc(s: &str) -> String {
    s.nfkc().collect()
}

/// Full-width katakana (and the prolonged-sound / middle-dot marks) to their
/// half-width forms. Voiced kana expand to base + voicing mark, which is the
/// exact inverse of what NFKC composes.
pub fn katakana_to_half_width(s: &str) -> String {
    let table = half_width_table();
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match table.get(&c) {
            Some(h) => out.push_str(h),
            None => out.push(c),
        }
    }
    out
}

fn half_width_table() -> &'static HashMap<char, String> {
    static TABLE: OnceLock<HashMap<char, String>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let is_kana = |c: char| ('\u{30A1}'..='\u{30FC}').contains(&c);
        let mut map = HashMap::new();
        let halves: Vec<char> = ('\u{FF66}'..='\u{FF9D}').chain(['\u{FF70}']).collect();
        for h in &halves {
            let full: Vec<char> = h.to_string().nfkc().collect();
            if let [f] = full[..] {
                if is_kana(f) {
                    map.entry(f).or_insert_with(|| h.to_string());
                }
            }
            for mark in ['\u{FF9E}', '\u{FF9F}'] {
                let seq: String = [*h, mark].iter().collect();
                let composed: Vec<char> = seq.nfkc().collect();
                if let [f] = composed[..] {
                    if is_kana(f) {
                        map.entry(f).or_insert(seq);
                    }
                }
            }
        }
        // Middle dot has its own half-width code point.
        map.insert('\u{30FB}', '\u{FF65}'.to_string());
        map
    })
}

/// Strip a leading UTF-8 byte-order mark.
pub fn strip_bom(s: &str) -> &str {
    s.strip_prefix('\u{FEFF}').unwrap_or(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nfkc_folds_full_width_latin_and_parentheses() {
        assert_eq!(nfkc("ＡＢＣ"), "ABC");
        assert_eq!(nfkc("満足度（旅行全体）"), "満足度(旅行全体)");
    }

    #[test]
    fn half_width_katakana_round_trips_through_nfkc() {
        let s = "ガイドブックのパンフレット・コーヒー";
        let half = katakana_to_half_width(s);
        assert_ne!(half, s);
        assert_eq!(nfkc(&half), s);
    }

    #[test]
    fn hiragana_and_kanji_untouched() {
        assert_eq!(katakana_to_half_width("寂しかった"), "寂しかった");
    }
}
