//! SSML rendering and validation.
//!
//! A prosody-annotated voice plan renders to one `<speak>` document. Adjacent
//! entries sharing a voice merge under a single `<voice>` span; entries marked
//! `lang_span` render as `<lang xml:lang="...">` inside the carrying voice;
//! non-zero prosody wraps content in `<prosody>`; boundary pauses render as
//! `<break>` tags. The root carries the anchor locale so engines that honor
//! `xml:lang` do not switch voices on their own.

use std::fmt;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::{VoicePlan, VoicePlanEntry};

const DIALECTS_JSON: &str = include_str!("../data/dialects.json");

#[derive(Debug, Error)]
pub enum SsmlError {
    #[error("SSML document is {byte_len} bytes, over the {max_bytes}-byte dialect cap")]
    SizeLimitExceeded { byte_len: usize, max_bytes: usize },
    #[error("cannot render an empty plan")]
    EmptyPlan,
    #[error("dialect '{0}' supports neither voice nor lang spans")]
    NoSpanSupport(String),
    #[error("invalid dialect data: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown dialect name: {0:?}")]
    UnknownDialect(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DialectName {
    Generic,
    Google,
    Polly,
    Azure,
}

impl DialectName {
    pub fn as_str(self) -> &'static str {
        match self {
            DialectName::Generic => "generic",
            DialectName::Google => "google",
            DialectName::Polly => "polly",
            DialectName::Azure => "azure",
        }
    }
}

impl fmt::Display for DialectName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Engine-dialect capabilities and payload cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsmlDialect {
    pub name: DialectName,
    pub max_bytes: usize,
    pub supports_voice_tag: bool,
    pub supports_lang_tag: bool,
    /// Break-tag template; `{ms}` is replaced by the pause duration.
    pub break_tag_form: String,
}

static BUNDLED_DIALECTS: Lazy<Vec<SsmlDialect>> = Lazy::new(|| {
    serde_json::from_str(DIALECTS_JSON).expect("bundled dialect descriptors are valid")
});

impl SsmlDialect {
    pub fn bundled() -> &'static [SsmlDialect] {
        &BUNDLED_DIALECTS
    }

    pub fn generic() -> SsmlDialect {
        Self::by_name("generic").expect("generic dialect is bundled")
    }

    /// Looks a bundled dialect up by name.
    pub fn by_name(name: &str) -> Result<SsmlDialect, SsmlError> {
        Self::bundled()
            .iter()
            .find(|d| d.name.as_str() == name.to_ascii_lowercase())
            .cloned()
            .ok_or_else(|| SsmlError::UnknownDialect(name.to_string()))
    }

    /// Parses a JSON array of dialect descriptors.
    pub fn from_json(json: &str) -> Result<Vec<SsmlDialect>, SsmlError> {
        Ok(serde_json::from_str(json)?)
    }

    fn break_tag(&self, ms: u32) -> String {
        self.break_tag_form.replace("{ms}", &ms.to_string())
    }
}

/// A rendered SSML document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsmlDocument {
    pub dialect: SsmlDialect,
    pub body: String,
    pub byte_len: usize,
}

/// Machine-readable validation findings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingCode {
    UnclosedElement,
    NotWellFormed,
    MissingSpeakRoot,
    TextOutsideSpan,
    NegativeBreakTime,
    InvalidBreakTime,
    SizeLimitExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub code: FindingCode,
    pub message: String,
}

impl Finding {
    fn new(code: FindingCode, message: impl Into<String>) -> Self {
        Finding {
            code,
            message: message.into(),
        }
    }
}

/// Replaces `& < > " '` with XML character entities. Applied exactly once per
/// segment text; it is not idempotent on already-escaped input.
pub fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Renders a plan as SSML for the given dialect.
pub fn build_ssml(plan: &VoicePlan, dialect: &SsmlDialect) -> Result<SsmlDocument, SsmlError> {
    if plan.entries.is_empty() {
        return Err(SsmlError::EmptyPlan);
    }
    if !dialect.supports_voice_tag && !dialect.supports_lang_tag {
        return Err(SsmlError::NoSpanSupport(dialect.name.to_string()));
    }

    let mut body = String::new();
    body.push_str(&format!(
        "<speak xml:lang=\"{}\">",
        escape_text(plan.primary_locale.as_str())
    ));

    if dialect.supports_voice_tag {
        let entries = &plan.entries;
        let mut i = 0;
        while i < entries.len() {
            let mut j = i + 1;
            while j < entries.len() && entries[j].voice.id == entries[i].voice.id {
                j += 1;
            }
            if entries[i].pause_before_ms > 0 {
                body.push_str(&dialect.break_tag(entries[i].pause_before_ms));
            }
            body.push_str(&format!(
                "<voice name=\"{}\">",
                escape_text(&entries[i].voice.id)
            ));
            for (k, entry) in entries[i..j].iter().enumerate() {
                if k > 0 && entry.pause_before_ms > 0 {
                    body.push_str(&dialect.break_tag(entry.pause_before_ms));
                }
                body.push_str(&render_content(entry, dialect));
            }
            body.push_str("</voice>");
            i = j;
        }
    } else {
        for entry in &plan.entries {
            if entry.pause_before_ms > 0 {
                body.push_str(&dialect.break_tag(entry.pause_before_ms));
            }
            body.push_str(&render_content(entry, dialect));
        }
    }

    body.push_str("</speak>");
    let byte_len = body.len();
    if byte_len > dialect.max_bytes {
        return Err(SsmlError::SizeLimitExceeded {
            byte_len,
            max_bytes: dialect.max_bytes,
        });
    }
    Ok(SsmlDocument {
        dialect: dialect.clone(),
        body,
        byte_len,
    })
}

/// Entry text with prosody/emphasis wrapping and, when requested or when the
/// dialect has no voice tags, a `<lang>` span.
fn render_content(entry: &VoicePlanEntry, dialect: &SsmlDialect) -> String {
    let mut content = escape_text(entry.text());
    if entry.prosody.emphasis != crate::prosody::Emphasis::None {
        content = format!(
            "<emphasis level=\"{}\">{}</emphasis>",
            entry.prosody.emphasis.as_str(),
            content
        );
    }
    if entry.prosody.rate_pct != 0 || entry.prosody.pitch_pct != 0 {
        content = format!(
            "<prosody rate=\"{:+}%\" pitch=\"{:+}%\">{}</prosody>",
            entry.prosody.rate_pct, entry.prosody.pitch_pct, content
        );
    }
    let needs_lang = (entry.lang_span && dialect.supports_lang_tag) || !dialect.supports_voice_tag;
    if needs_lang && dialect.supports_lang_tag {
        content = format!(
            "<lang xml:lang=\"{}\">{}</lang>",
            escape_text(entry.locale.as_str()),
            content
        );
    }
    content
}

/// Checks a document for well-formedness, span coverage, break validity, and
/// the byte cap. Empty result means valid.
pub fn validate(doc: &SsmlDocument) -> Vec<Finding> {
    let mut findings = Vec::new();
    if doc.byte_len > doc.dialect.max_bytes {
        findings.push(Finding::new(
            FindingCode::SizeLimitExceeded,
            format!(
                "document is {} bytes, cap is {}",
                doc.byte_len, doc.dialect.max_bytes
            ),
        ));
    }

    let parsed = match roxmltree::Document::parse(&doc.body) {
        Ok(p) => p,
        Err(err) => {
            let code = match err {
                roxmltree::Error::UnclosedRootNode
                | roxmltree::Error::UnexpectedEndOfStream
                | roxmltree::Error::NoRootNode => FindingCode::UnclosedElement,
                _ => FindingCode::NotWellFormed,
            };
            findings.push(Finding::new(code, err.to_string()));
            return findings;
        }
    };

    let root = parsed.root_element();
    if root.tag_name().name() != "speak" {
        findings.push(Finding::new(
            FindingCode::MissingSpeakRoot,
            format!("root element is <{}>", root.tag_name().name()),
        ));
    }

    for node in parsed.descendants() {
        if node.is_text() {
            let text = node.text().unwrap_or_default();
            if !text.trim().is_empty() {
                let covered = node.ancestors().any(|a| {
                    a.is_element() && matches!(a.tag_name().name(), "voice" | "lang")
                });
                if !covered {
                    findings.push(Finding::new(
                        FindingCode::TextOutsideSpan,
                        format!("text {:?} is outside any voice/lang span", text.trim()),
                    ));
                }
            }
        } else if node.is_element() && node.tag_name().name() == "break" {
            match node.attribute("time") {
                None => findings.push(Finding::new(
                    FindingCode::InvalidBreakTime,
                    "break tag has no time attribute",
                )),
                Some(value) => match parse_break_time(value) {
                    Some(t) if t >= 0.0 => {}
                    Some(_) => findings.push(Finding::new(
                        FindingCode::NegativeBreakTime,
                        format!("break time {value:?} is negative"),
                    )),
                    None => findings.push(Finding::new(
                        FindingCode::InvalidBreakTime,
                        format!("break time {value:?} is not a duration"),
                    )),
                },
            }
        }
    }
    findings
}

/// Parses `"123ms"` / `"0.5s"` into seconds.
fn parse_break_time(value: &str) -> Option<f64> {
    let (number, scale) = if let Some(stripped) = value.strip_suffix("ms") {
        (stripped, 0.001)
    } else {
        (value.strip_suffix('s')?, 1.0)
    };
    number.trim().parse::<f64>().ok().map(|n| n * scale)
}
