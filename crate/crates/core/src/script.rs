//! Unicode script segmentation.
//!
//! Splits text into maximal same-script runs using a range-lookup table over
//! code points. Script-neutral characters (whitespace, punctuation, digits,
//! symbols, combining marks) attach to the preceding run, or to the following
//! run when nothing precedes them, so the segment list always round-trips to
//! the original input.

use std::fmt;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_RANGES_JSON: &str = include_str!("../data/script_ranges.json");

/// Writing-script classes recognized by the segmenter.
///
/// `Common` covers whitespace, punctuation, digits, and general symbols;
/// `Unknown` covers code points outside every table range. Both are treated
/// as script-neutral during segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScriptClass {
    Latin,
    Devanagari,
    Kannada,
    Telugu,
    Bengali,
    Gujarati,
    Han,
    Hiragana,
    Katakana,
    Arabic,
    Cyrillic,
    Greek,
    Hangul,
    Thai,
    Hebrew,
    Common,
    Unknown,
}

impl ScriptClass {
    /// Neutral classes never form segments of their own.
    pub fn is_neutral(self) -> bool {
        matches!(self, ScriptClass::Common | ScriptClass::Unknown)
    }

    fn in_kana_group(self) -> bool {
        matches!(
            self,
            ScriptClass::Hiragana | ScriptClass::Katakana | ScriptClass::Han
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScriptClass::Latin => "latin",
            ScriptClass::Devanagari => "devanagari",
            ScriptClass::Kannada => "kannada",
            ScriptClass::Telugu => "telugu",
            ScriptClass::Bengali => "bengali",
            ScriptClass::Gujarati => "gujarati",
            ScriptClass::Han => "han",
            ScriptClass::Hiragana => "hiragana",
            ScriptClass::Katakana => "katakana",
            ScriptClass::Arabic => "arabic",
            ScriptClass::Cyrillic => "cyrillic",
            ScriptClass::Greek => "greek",
            ScriptClass::Hangul => "hangul",
            ScriptClass::Thai => "thai",
            ScriptClass::Hebrew => "hebrew",
            ScriptClass::Common => "common",
            ScriptClass::Unknown => "unknown",
        }
    }
}

impl fmt::Display for ScriptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum ScriptTableError {
    #[error("invalid script range table: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("script range starting at U+{start:04X} overlaps the previous range")]
    Overlap { start: u32 },
    #[error("script range start U+{start:04X} exceeds end U+{end:04X}")]
    Inverted { start: u32, end: u32 },
}

/// One inclusive code-point range mapped to a script.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptRange {
    pub start_codepoint: u32,
    pub end_codepoint: u32,
    pub script_name: ScriptClass,
}

/// Sorted, non-overlapping code-point ranges for script lookup.
#[derive(Debug, Clone)]
pub struct ScriptTable {
    ranges: Vec<ScriptRange>,
}

static BUILTIN_TABLE: Lazy<ScriptTable> = Lazy::new(|| {
    ScriptTable::from_json(BUILTIN_RANGES_JSON).expect("bundled script table is valid")
});

impl ScriptTable {
    /// The bundled default table, identical to `data/script_ranges.json`.
    pub fn builtin() -> &'static ScriptTable {
        &BUILTIN_TABLE
    }

    /// Loads a table from a JSON array of `{start_codepoint, end_codepoint, script_name}`.
    pub fn from_json(json: &str) -> Result<Self, ScriptTableError> {
        let ranges: Vec<ScriptRange> = serde_json::from_str(json)?;
        Self::from_ranges(ranges)
    }

    pub fn from_ranges(mut ranges: Vec<ScriptRange>) -> Result<Self, ScriptTableError> {
        ranges.sort_by_key(|r| r.start_codepoint);
        let mut prev_end: Option<u32> = None;
        for r in &ranges {
            if r.start_codepoint > r.end_codepoint {
                return Err(ScriptTableError::Inverted {
                    start: r.start_codepoint,
                    end: r.end_codepoint,
                });
            }
            if let Some(end) = prev_end {
                if r.start_codepoint <= end {
                    return Err(ScriptTableError::Overlap {
                        start: r.start_codepoint,
                    });
                }
            }
            prev_end = Some(r.end_codepoint);
        }
        Ok(ScriptTable { ranges })
    }

    /// Classifies one scalar value. Total: unmapped code points are `Unknown`.
    pub fn classify(&self, ch: char) -> ScriptClass {
        let cp = ch as u32;
        let idx = self.ranges.partition_point(|r| r.start_codepoint <= cp);
        if idx == 0 {
            return ScriptClass::Unknown;
        }
        let range = &self.ranges[idx - 1];
        if cp <= range.end_codepoint {
            range.script_name
        } else {
            ScriptClass::Unknown
        }
    }
}

/// Classifies one scalar value against the bundled table.
pub fn classify_char(ch: char) -> ScriptClass {
    ScriptTable::builtin().classify(ch)
}

/// Half-open character-index interval into the original input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// A maximal same-script run of the input, with neutral characters attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawSegment {
    pub text: String,
    pub script: ScriptClass,
    pub span: Span,
}

/// Segmentation knobs.
#[derive(Debug, Clone)]
pub struct SegmenterOptions {
    /// Merge adjacent Hiragana/Katakana/Han runs into one Japanese segment
    /// whenever a Kana run is involved. A Han run with no Kana neighbor is
    /// left alone so Chinese text keeps its own segment.
    pub coalesce_kana_han: bool,
}

impl Default for SegmenterOptions {
    fn default() -> Self {
        SegmenterOptions {
            coalesce_kana_han: true,
        }
    }
}

/// Splits text into script segments with the bundled table and default options.
pub fn split_by_script(text: &str) -> Vec<RawSegment> {
    split_by_script_with(text, ScriptTable::builtin(), &SegmenterOptions::default())
}

/// Splits text into script segments.
///
/// Neutral characters merge into the preceding run; leading neutrals merge
/// into the following run. An input with no non-neutral character yields one
/// `Common` segment. Concatenating segment texts reproduces the input.
pub fn split_by_script_with(
    text: &str,
    table: &ScriptTable,
    opts: &SegmenterOptions,
) -> Vec<RawSegment> {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return Vec::new();
    }

    // (script, start, end) over char indices
    let mut runs: Vec<(ScriptClass, usize, usize)> = Vec::new();
    let mut leading_start: Option<usize> = None;

    for (i, &ch) in chars.iter().enumerate() {
        let class = table.classify(ch);
        if class.is_neutral() {
            match runs.last_mut() {
                Some(last) => last.2 = i + 1,
                None => {
                    if leading_start.is_none() {
                        leading_start = Some(i);
                    }
                }
            }
        } else {
            match runs.last_mut() {
                Some(last) if last.0 == class => last.2 = i + 1,
                _ => {
                    let start = leading_start.take().unwrap_or(i);
                    runs.push((class, start, i + 1));
                }
            }
        }
    }

    if runs.is_empty() {
        // Degenerate all-neutral input.
        runs.push((ScriptClass::Common, 0, chars.len()));
    }

    if opts.coalesce_kana_han {
        let mut merged: Vec<(ScriptClass, usize, usize)> = Vec::new();
        for run in runs {
            match merged.last_mut() {
                Some(last)
                    if last.0.in_kana_group()
                        && run.0.in_kana_group()
                        && last.0 != ScriptClass::Common =>
                {
                    last.2 = run.2;
                    // The merged segment takes the first Kana class seen.
                    if last.0 == ScriptClass::Han && run.0 != ScriptClass::Han {
                        last.0 = run.0;
                    }
                }
                _ => merged.push(run),
            }
        }
        runs = merged;
    }

    runs.into_iter()
        .map(|(script, start, end)| RawSegment {
            text: chars[start..end].iter().collect(),
            script,
            span: Span::new(start, end),
        })
        .collect()
}
