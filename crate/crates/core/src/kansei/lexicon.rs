use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::preprocess_fields;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    Atmosphere,
    Density,
    Commerce,
    Experience,
    Decline,
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "atmosphere" => Category::Atmosphere,
            "density" => Category::Density,
            "commerce" => Category::Commerce,
            "experience" => Category::Experience,
            "decline" => Category::Decline,
            other => return Err(Error::invalid(format!("unknown lexicon category `{other}`"))),
        })
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub keyword: String,
    pub romanization: String,
    pub category: Category,
    pub gloss: String,
}

/// Ordered keyword list. Keywords are matched after the same preprocessing
/// applied to response text.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    normalized: Vec<String>,
}

const DEFAULT_ENTRIES: [(&str, &str, Category, &str); 21] = [
    ("静か", "shizuka", Category::Atmosphere, "Quiet / Silent"),
    ("寂し", "sabishi", Category::Atmosphere, "Lonely / Desolate"),
    ("さびし", "sabishi", Category::Atmosphere, "Lonely (hiragana)"),
    ("さみし", "samishi", Category::Atmosphere, "Lonely (phonetic variant)"),
    ("人が少な", "hito ga suku-na", Category::Density, "Few people around"),
    ("人がいな", "hito ga i-na", Category::Density, "Nobody around"),
    ("活気", "kakki", Category::Atmosphere, "Vitality (absence of)"),
    ("賑わ", "nigiwai", Category::Atmosphere, "Lively (absence of)"),
    ("にぎわ", "nigiwai", Category::Atmosphere, "Lively (hiragana)"),
    ("閑散", "kansan", Category::Atmosphere, "Deserted / Sparse"),
    ("寂れ", "sabie", Category::Decline, "Run-down"),
    ("さびれ", "sabie", Category::Decline, "Run-down (hiragana)"),
    ("閉まっ", "shimatte", Category::Commerce, "Closed facilities"),
    ("店がな", "mise ga na", Category::Commerce, "No shops present"),
    ("営業し", "eigyō shi", Category::Commerce, "Operating (negative constructions)"),
    ("何もな", "nani mo na", Category::Experience, "Nothing to do"),
    ("つまらな", "tsumarana", Category::Experience, "Boring / Dull"),
    ("退屈", "taikutsu", Category::Experience, "Boredom"),
    ("物足りな", "monotari-na", Category::Experience, "Unsatisfying"),
    ("盛り上が", "moriagari", Category::Atmosphere, "Excitement (absence of)"),
    ("人通り", "hitodori", Category::Density, "Foot traffic"),
];

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::new(
            DEFAULT_ENTRIES
                .iter()
                .map(|(k, r, c, g)| LexiconEntry {
                    keyword: k.to_string(),
                    romanization: r.to_string(),
                    category: *c,
                    gloss: g.to_string(),
                })
                .collect(),
        )
        .expect("default lexicon is valid")
    }
}

impl Lexicon {
    pub fn new(entries: Vec<LexiconEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("lexicon is empty"));
        }
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(entries.len());
        for e in &entries {
            let k = preprocess_fields(&[&e.keyword]);
            if k.is_empty() {
                return Err(Error::invalid("lexicon keyword is blank"));
            }
            if !seen.insert(k.clone()) {
                return Err(Error::invalid(format!("duplicate lexicon keyword `{}`", e.keyword)));
            }
            normalized.push(k);
        }
        Ok(Lexicon { entries, normalized })
    }

    /// Tab-separated `keyword, romanization, category, gloss`. An optional
    /// first line starting with `keyword` is a header; `#` starts a comment.
    /// A leading `#`-column index (as in printed tables) is tolerated.
    pub fn from_tsv(r: impl Read) -> Result<Self> {
        let text = crate::ingest::read_text(r)?;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim_end_matches('\r');
            if t.trim().is_empty() || t.starts_with('#') || t.to_ascii_lowercase().starts_with("keyword") {
                continue;
            }
            let mut cols: Vec<&str> = t.split('\t').map(str::trim).collect();
            if cols.len() == 5 && cols[0].parse::<u32>().is_ok() {
                cols.remove(0);
            }
            if cols.len() != 4 {
                return Err(Error::Row {
                    line: i as u64 + 1,
                    message: format!("expected 4 tab-separated fields, got {}", cols.len()),
                });
            }
            entries.push(LexiconEntry {
                keyword: cols[0].to_string(),
                romanization: cols[1].to_string(),
                category: cols[2].parse().map_err(|e: Error| Error::Row {
                    line: i as u64 + 1,
                    message: e.to_string(),
                })?,
                gloss: cols[3].to_string(),
            });
        }
        Lexicon::new(entries)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub(crate) fn normalized_keywords(&self) -> &[String] {
        &self.normalized
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, keyword: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.keyword == keyword)
    }
}
