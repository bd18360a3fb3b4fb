//! Language identification for script segments.
//!
//! Non-Latin scripts map directly to a canonical language code. Latin and
//! script-neutral segments are scored against per-language stopword lexicons;
//! a segment mixing several Latin-script languages is split at word
//! boundaries by iterative lexicon masking: score the dominant language, mask
//! its tokens, re-score the residue, and repeat while some other language
//! still wins a contiguous window of at least `min_span` words.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::script::{RawSegment, ScriptClass, Span};

const BUNDLED_LEXICONS_JSON: &str = include_str!("../data/lexicons.json");
const CANONICAL_LANGS_JSON: &str = include_str!("../data/canonical_langs.json");

/// Registered ISO 639-1 codes, sorted for binary search.
const ISO_639_1: &[&str] = &[
    "aa", "ab", "ae", "af", "ak", "am", "an", "ar", "as", "av", "ay", "az", "ba", "be", "bg",
    "bh", "bi", "bm", "bn", "bo", "br", "bs", "ca", "ce", "ch", "co", "cr", "cs", "cu", "cv",
    "cy", "da", "de", "dv", "dz", "ee", "el", "en", "eo", "es", "et", "eu", "fa", "ff", "fi",
    "fj", "fo", "fr", "fy", "ga", "gd", "gl", "gn", "gu", "gv", "ha", "he", "hi", "ho", "hr",
    "ht", "hu", "hy", "hz", "ia", "id", "ie", "ig", "ii", "ik", "io", "is", "it", "iu", "ja",
    "jv", "ka", "kg", "ki", "kj", "kk", "kl", "km", "kn", "ko", "kr", "ks", "ku", "kv", "kw",
    "ky", "la", "lb", "lg", "li", "ln", "lo", "lt", "lu", "lv", "mg", "mh", "mi", "mk", "ml",
    "mn", "mr", "ms", "mt", "my", "na", "nb", "nd", "ne", "ng", "nl", "nn", "no", "nr", "nv",
    "ny", "oc", "oj", "om", "or", "os", "pa", "pi", "pl", "ps", "pt", "qu", "rm", "rn", "ro",
    "ru", "rw", "sa", "sc", "sd", "se", "sg", "si", "sk", "sl", "sm", "sn", "so", "sq", "sr",
    "ss", "st", "su", "sv", "sw", "ta", "te", "tg", "th", "ti", "tk", "tl", "tn", "to", "tr",
    "ts", "tt", "tw", "ty", "ug", "uk", "ur", "uz", "ve", "vi", "vo", "wa", "wo", "xh", "yi",
    "yo", "za", "zh", "zu",
];

#[derive(Debug, Error)]
pub enum LangIdError {
    #[error("invalid ISO 639-1 language code: {0:?}")]
    InvalidLangCode(String),
    #[error("no canonical language for script '{0}' and no hint given")]
    UnknownScript(ScriptClass),
    #[error("lexicon masking produced no split")]
    DegenerateSplit,
    #[error("invalid lexicon data: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Two-letter ISO 639-1 language code, lowercase.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LangCode([u8; 2]);

impl LangCode {
    pub fn new(code: &str) -> Result<Self, LangIdError> {
        let lower = code.to_ascii_lowercase();
        if ISO_639_1.binary_search(&lower.as_str()).is_err() {
            return Err(LangIdError::InvalidLangCode(code.to_string()));
        }
        let bytes = lower.as_bytes();
        Ok(LangCode([bytes[0], bytes[1]]))
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("code is ASCII")
    }
}

impl fmt::Debug for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LangCode({})", self.as_str())
    }
}

impl fmt::Display for LangCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LangCode {
    type Err = LangIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LangCode::new(s)
    }
}

impl Serialize for LangCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LangCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        LangCode::new(&s).map_err(D::Error::custom)
    }
}

/// How a detection was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    ScriptDirect,
    Lexicon,
    Hint,
    Fallback,
}

/// Detection result for one segment.
///
/// Lexicon confidence is `(top - second) / top` over stopword vote counts,
/// so it grows with the vote margin and reaches 1.0 for an uncontested win.
/// Script-direct and hint detections are always 1.0; fallback is 0.0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub lang: LangCode,
    pub confidence: f64,
    pub method: DetectionMethod,
}

/// Per-language stopword/function-word sets.
#[derive(Debug, Clone, Default)]
pub struct LexiconSet {
    words: HashMap<LangCode, HashSet<String>>,
}

static BUNDLED_LEXICONS: Lazy<LexiconSet> = Lazy::new(|| {
    LexiconSet::from_json(BUNDLED_LEXICONS_JSON).expect("bundled lexicons are valid")
});

impl LexiconSet {
    /// Bundled lexicons for en, es, fr, de.
    pub fn bundled() -> LexiconSet {
        BUNDLED_LEXICONS.clone()
    }

    /// Parses `{"en": ["the", ...], ...}`.
    pub fn from_json(json: &str) -> Result<Self, LangIdError> {
        let raw: HashMap<String, Vec<String>> = serde_json::from_str(json)?;
        let mut words = HashMap::new();
        for (code, list) in raw {
            let lang = LangCode::new(&code)?;
            let set: HashSet<String> = list.into_iter().map(|w| w.to_lowercase()).collect();
            words.entry(lang).or_insert_with(HashSet::new).extend(set);
        }
        Ok(LexiconSet { words })
    }

    /// Merges `other` over `self`; word sets union per language.
    pub fn merge(&mut self, other: LexiconSet) {
        for (lang, set) in other.words {
            self.words.entry(lang).or_default().extend(set);
        }
    }

    /// Languages present, sorted for deterministic iteration.
    pub fn languages(&self) -> Vec<LangCode> {
        let mut langs: Vec<LangCode> = self.words.keys().copied().collect();
        langs.sort();
        langs
    }

    pub fn contains(&self, lang: LangCode, word: &str) -> bool {
        self.words.get(&lang).is_some_and(|set| set.contains(word))
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Token pins from a loanword database: word (lowercase) -> language.
pub type LoanwordPins = HashMap<String, LangCode>;

#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pub default_lang: LangCode,
    /// Minimum width, in words, of the window another language must win
    /// before a segment counts as multilingual.
    pub min_span: usize,
    /// Masking pass bound for `split_by_language_boundary`.
    pub max_iterations: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            default_lang: LangCode::new("en").unwrap(),
            min_span: 3,
            max_iterations: 4,
        }
    }
}

static CANONICAL_LANGS: Lazy<HashMap<ScriptClass, LangCode>> = Lazy::new(|| {
    serde_json::from_str(CANONICAL_LANGS_JSON).expect("bundled canonical map is valid")
});

/// Returns the bundled script -> language map.
pub fn bundled_canonical_langs() -> HashMap<ScriptClass, LangCode> {
    CANONICAL_LANGS.clone()
}

/// Deterministic stopword-vote language identifier.
///
/// State is immutable after construction; all methods are pure.
#[derive(Debug, Clone)]
pub struct LanguageDetector {
    lexicons: LexiconSet,
    langs: Vec<LangCode>,
    canonical: HashMap<ScriptClass, LangCode>,
    config: DetectorConfig,
}

impl Default for LanguageDetector {
    fn default() -> Self {
        Self::new(
            LexiconSet::bundled(),
            bundled_canonical_langs(),
            DetectorConfig::default(),
        )
    }
}

impl LanguageDetector {
    pub fn new(
        lexicons: LexiconSet,
        canonical: HashMap<ScriptClass, LangCode>,
        config: DetectorConfig,
    ) -> Self {
        let langs = lexicons.languages();
        LanguageDetector {
            lexicons,
            langs,
            canonical,
            config,
        }
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn canonical_language(&self, script: ScriptClass) -> Option<LangCode> {
        self.canonical.get(&script).copied()
    }

    /// Assigns a language to a segment.
    pub fn detect(
        &self,
        segment: &RawSegment,
        hint: Option<LangCode>,
        pins: &LoanwordPins,
    ) -> Result<Detection, LangIdError> {
        if !matches!(segment.script, ScriptClass::Latin | ScriptClass::Common) {
            if let Some(lang) = self.canonical_language(segment.script) {
                return Ok(Detection {
                    lang,
                    confidence: 1.0,
                    method: DetectionMethod::ScriptDirect,
                });
            }
            if let Some(lang) = hint {
                return Ok(Detection {
                    lang,
                    confidence: 1.0,
                    method: DetectionMethod::Hint,
                });
            }
            return Err(LangIdError::UnknownScript(segment.script));
        }

        if let Some(lang) = hint {
            return Ok(Detection {
                lang,
                confidence: 1.0,
                method: DetectionMethod::Hint,
            });
        }

        let words = tokenize(&segment.text);
        let votes = self.word_votes(&words, pins);
        let mut counts: Vec<(LangCode, usize)> = Vec::new();
        for lang in self.vote_langs(pins) {
            let count = votes.iter().filter(|v| v.contains(&lang)).count();
            if count > 0 {
                counts.push((lang, count));
            }
        }
        counts.sort_by_key(|&(_, count)| std::cmp::Reverse(count));
        match counts.as_slice() {
            [] => Ok(self.fallback()),
            [(lang, _)] => Ok(Detection {
                lang: *lang,
                confidence: 1.0,
                method: DetectionMethod::Lexicon,
            }),
            [(lang, top), (_, second), ..] => {
                if top == second {
                    Ok(self.fallback())
                } else {
                    Ok(Detection {
                        lang: *lang,
                        confidence: (top - second) as f64 / *top as f64,
                        method: DetectionMethod::Lexicon,
                    })
                }
            }
        }
    }

    /// True when some other language wins a contiguous window of at least
    /// `min_span` words against the dominant language.
    pub fn contains_multiple_languages(
        &self,
        segment: &RawSegment,
        hint: Option<LangCode>,
        pins: &LoanwordPins,
    ) -> bool {
        let words = tokenize(&segment.text);
        if words.len() < self.config.min_span {
            return false;
        }
        let votes = self.word_votes(&words, pins);
        let Some(dominant) = hint.or_else(|| self.dominant_language(&votes, pins)) else {
            return false;
        };
        self.vote_langs(pins)
            .into_iter()
            .filter(|&l| l != dominant)
            .any(|lang| self.wins_window(&votes, lang, dominant))
    }

    /// Splits a mixed segment into language-tagged sub-segments.
    ///
    /// Sub-segment texts concatenate to the parent text; spans stay relative
    /// to the original input.
    pub fn split_by_language_boundary(
        &self,
        segment: &RawSegment,
        hint: Option<LangCode>,
        pins: &LoanwordPins,
    ) -> Result<Vec<(RawSegment, LangCode)>, LangIdError> {
        let words = tokenize(&segment.text);
        if words.is_empty() {
            return Err(LangIdError::DegenerateSplit);
        }
        let votes = self.word_votes(&words, pins);
        let Some(dominant) = hint.or_else(|| self.dominant_language(&votes, pins)) else {
            return Err(LangIdError::DegenerateSplit);
        };

        let mut labels: Vec<Option<LangCode>> = vec![None; words.len()];
        for (i, v) in votes.iter().enumerate() {
            if v.contains(&dominant) {
                labels[i] = Some(dominant);
            }
        }

        let mut passes = 1;
        while passes < self.config.max_iterations {
            let residue_counts = self.residue_counts(&votes, &labels, pins);
            let Some(next) = residue_counts
                .into_iter()
                .find(|&(lang, _)| self.wins_window(&votes, lang, dominant))
            else {
                break;
            };
            let lang = next.0;
            for (i, v) in votes.iter().enumerate() {
                if labels[i].is_none() && v.contains(&lang) {
                    labels[i] = Some(lang);
                }
            }
            passes += 1;
        }

        if !labels.iter().any(Option::is_some) {
            return Err(LangIdError::DegenerateSplit);
        }

        // Unlabeled words join the preceding labeled word; leading ones join
        // the first labeled word, mirroring neutral attachment in the
        // segmenter.
        let mut filled: Vec<LangCode> = Vec::with_capacity(words.len());
        let mut last: Option<LangCode> = None;
        for label in &labels {
            if let Some(lang) = label {
                last = Some(*lang);
            }
            filled.push(last.unwrap_or(dominant));
        }
        if let Some(first_idx) = labels.iter().position(Option::is_some) {
            let first_lang = labels[first_idx].unwrap();
            for slot in filled.iter_mut().take(first_idx) {
                *slot = first_lang;
            }
        }

        let chars: Vec<char> = segment.text.chars().collect();
        let mut subs: Vec<(RawSegment, LangCode)> = Vec::new();
        let mut group_start = 0;
        for i in 1..=words.len() {
            if i == words.len() || filled[i] != filled[group_start] {
                let start = words[group_start].start;
                let end = words[i - 1].end;
                let text: String = chars[start..end].iter().collect();
                subs.push((
                    RawSegment {
                        text,
                        script: segment.script,
                        span: Span::new(segment.span.start + start, segment.span.start + end),
                    },
                    filled[group_start],
                ));
                group_start = i;
            }
        }

        if subs.len() < 2 {
            return Err(LangIdError::DegenerateSplit);
        }
        Ok(subs)
    }

    fn fallback(&self) -> Detection {
        Detection {
            lang: self.config.default_lang,
            confidence: 0.0,
            method: DetectionMethod::Fallback,
        }
    }

    /// Languages that can receive votes: lexicon languages plus pinned ones.
    fn vote_langs(&self, pins: &LoanwordPins) -> Vec<LangCode> {
        let mut langs = self.langs.clone();
        let mut extra: Vec<LangCode> = pins
            .values()
            .copied()
            .filter(|l| !langs.contains(l))
            .collect();
        extra.sort();
        extra.dedup();
        langs.extend(extra);
        langs
    }

    fn word_votes(&self, words: &[Word], pins: &LoanwordPins) -> Vec<Vec<LangCode>> {
        words
            .iter()
            .map(|w| {
                if let Some(&pinned) = pins.get(&w.norm) {
                    return vec![pinned];
                }
                self.langs
                    .iter()
                    .copied()
                    .filter(|&l| self.lexicons.contains(l, &w.norm))
                    .collect()
            })
            .collect()
    }

    /// Highest total vote count; ties break toward the earliest first hit.
    fn dominant_language(&self, votes: &[Vec<LangCode>], pins: &LoanwordPins) -> Option<LangCode> {
        let mut best: Option<(LangCode, usize, usize)> = None;
        for lang in self.vote_langs(pins) {
            let count = votes.iter().filter(|v| v.contains(&lang)).count();
            if count == 0 {
                continue;
            }
            let first = votes.iter().position(|v| v.contains(&lang)).unwrap();
            let better = match best {
                None => true,
                Some((_, c, f)) => count > c || (count == c && first < f),
            };
            if better {
                best = Some((lang, count, first));
            }
        }
        best.map(|(lang, _, _)| lang)
    }

    /// True when `lang` outscores `dominant` on some window of >= min_span words.
    fn wins_window(&self, votes: &[Vec<LangCode>], lang: LangCode, dominant: LangCode) -> bool {
        let n = votes.len();
        let min_span = self.config.min_span;
        if min_span == 0 || n < min_span {
            return false;
        }
        for i in 0..=(n - min_span) {
            let mut lang_score = 0i64;
            let mut dom_score = 0i64;
            for (offset, v) in votes[i..].iter().enumerate() {
                if v.contains(&lang) {
                    lang_score += 1;
                }
                if v.contains(&dominant) {
                    dom_score += 1;
                }
                if offset + 1 >= min_span && lang_score > dom_score {
                    return true;
                }
            }
        }
        false
    }

    /// Vote counts over unlabeled words, ordered (count desc, first pos asc).
    fn residue_counts(
        &self,
        votes: &[Vec<LangCode>],
        labels: &[Option<LangCode>],
        pins: &LoanwordPins,
    ) -> Vec<(LangCode, usize)> {
        let mut counts: Vec<(LangCode, usize, usize)> = Vec::new();
        for lang in self.vote_langs(pins) {
            let mut count = 0;
            let mut first = usize::MAX;
            for (i, v) in votes.iter().enumerate() {
                if labels[i].is_none() && v.contains(&lang) {
                    count += 1;
                    if first == usize::MAX {
                        first = i;
                    }
                }
            }
            if count > 0 {
                counts.push((lang, count, first));
            }
        }
        counts.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        counts.into_iter().map(|(l, c, _)| (l, c)).collect()
    }
}

/// A whitespace-delimited word with its trailing whitespace, over char indices.
#[derive(Debug, Clone)]
struct Word {
    /// Lowercased core with trailing punctuation stripped, for lexicon lookup.
    norm: String,
    start: usize,
    end: usize,
}

/// Splits on Unicode whitespace. Each word keeps its trailing whitespace so
/// word spans concatenate back to the input; leading whitespace joins the
/// first word.
fn tokenize(text: &str) -> Vec<Word> {
    let chars: Vec<char> = text.chars().collect();
    let mut words = Vec::new();
    let mut i = 0;
    let mut pending_start: Option<usize> = None;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            if pending_start.is_none() {
                pending_start = Some(i);
            }
            i += 1;
            continue;
        }
        let core_start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let core_end = i;
        while i < chars.len() && chars[i].is_whitespace() {
            i += 1;
        }
        let start = match words.len() {
            0 => pending_start.take().unwrap_or(core_start),
            _ => core_start,
        };
        words.push(Word {
            norm: normalize_word(&chars[core_start..core_end]),
            start,
            end: i,
        });
    }
    words
}

/// Lowercases and strips trailing non-alphanumeric characters.
fn normalize_word(core: &[char]) -> String {
    let mut end = core.len();
    while end > 0 && !core[end - 1].is_alphanumeric() {
        end -= 1;
    }
    if end == 0 {
        // Pure punctuation token: keep it as-is (lowercased) so it can still
        // be pinned by a loanword entry.
        return core.iter().collect::<String>().to_lowercase();
    }
    core[..end].iter().collect::<String>().to_lowercase()
}
