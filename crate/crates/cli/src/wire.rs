//! Stable JSON shapes for `plan` and `segments` output, shared by the CLI and
//! the HTTP service.

use polyvox::planner::{TaggedSegment, VoicePlan};
use polyvox::prosody::Prosody;
use serde::{Deserialize, Serialize};

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct PlanJson {
    pub schema_version: u32,
    pub entries: Vec<PlanEntryJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PlanEntryJson {
    pub text: String,
    pub lang: String,
    pub locale: String,
    pub voice_id: String,
    pub lang_span: bool,
    pub pause_before_ms: u32,
    pub prosody: ProsodyJson,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProsodyJson {
    pub rate_pct: i32,
    pub pitch_pct: i32,
    pub emphasis: String,
}

impl From<&Prosody> for ProsodyJson {
    fn from(p: &Prosody) -> Self {
        ProsodyJson {
            rate_pct: p.rate_pct,
            pitch_pct: p.pitch_pct,
            emphasis: p.emphasis.as_str().to_string(),
        }
    }
}

impl From<&VoicePlan> for PlanJson {
    fn from(plan: &VoicePlan) -> Self {
        PlanJson {
            schema_version: PLAN_SCHEMA_VERSION,
            entries: plan
                .entries
                .iter()
                .map(|e| PlanEntryJson {
                    text: e.text().to_string(),
                    lang: e.lang().to_string(),
                    locale: e.locale.to_string(),
                    voice_id: e.voice.id.clone(),
                    lang_span: e.lang_span,
                    pause_before_ms: e.pause_before_ms,
                    prosody: ProsodyJson::from(&e.prosody),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SegmentJson {
    pub text: String,
    pub script: String,
    pub lang: String,
    pub span: SpanJson,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SpanJson {
    pub start: usize,
    pub end: usize,
}

pub fn segments_json(segments: &[TaggedSegment]) -> Vec<SegmentJson> {
    segments
        .iter()
        .map(|s| SegmentJson {
            text: s.segment.text.clone(),
            script: s.segment.script.to_string(),
            lang: s.lang.to_string(),
            span: SpanJson {
                start: s.segment.span.start,
                end: s.segment.span.end,
            },
        })
        .collect()
}
