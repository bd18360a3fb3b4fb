//! Sentiment analysis and prosody normalization.
//!
//! Sentiment is rule-based: terminal punctuation decides exclamatory or
//! interrogative tone, otherwise small polarity word lists decide positive or
//! negative. Per-segment prosody inherits the overall sentiment when the
//! segment itself is neutral, which keeps expressive style continuous across
//! switches.
//!
//! The sentiment-to-prosody mapping is a data table (`data/prosody_rules.json`):
//! `offset = round(coeff * intensity)`, clamped to [-50, +50] percent.

use std::collections::{HashMap, HashSet};
use std::fmt;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::VoicePlan;

const PROSODY_RULES_JSON: &str = include_str!("../data/prosody_rules.json");
const SENTIMENT_WORDS_JSON: &str = include_str!("../data/sentiment_words.json");

const CLAMP_PCT: i32 = 50;
const BANGS: [char; 2] = ['!', '！'];
const QUESTION_MARKS: [char; 3] = ['?', '？', '؟'];

#[derive(Debug, Error)]
pub enum ProsodyError {
    #[error("invalid prosody rule table: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("rule table is missing category '{0}'")]
    MissingCategory(SentimentCategory),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentCategory {
    Exclamatory,
    Interrogative,
    Positive,
    Negative,
    Neutral,
}

impl SentimentCategory {
    pub const ALL: [SentimentCategory; 5] = [
        SentimentCategory::Exclamatory,
        SentimentCategory::Interrogative,
        SentimentCategory::Positive,
        SentimentCategory::Negative,
        SentimentCategory::Neutral,
    ];
}

impl fmt::Display for SentimentCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SentimentCategory::Exclamatory => "exclamatory",
            SentimentCategory::Interrogative => "interrogative",
            SentimentCategory::Positive => "positive",
            SentimentCategory::Negative => "negative",
            SentimentCategory::Neutral => "neutral",
        };
        f.write_str(s)
    }
}

/// Categorical tone with intensity in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sentiment {
    pub category: SentimentCategory,
    pub intensity: f64,
}

impl Sentiment {
    pub const NEUTRAL: Sentiment = Sentiment {
        category: SentimentCategory::Neutral,
        intensity: 0.0,
    };

    pub fn new(category: SentimentCategory, intensity: f64) -> Self {
        Sentiment {
            category,
            intensity: intensity.clamp(0.0, 1.0),
        }
    }

    pub fn is_neutral(&self) -> bool {
        self.category == SentimentCategory::Neutral
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emphasis {
    None,
    Moderate,
    Strong,
}

impl Emphasis {
    pub fn as_str(self) -> &'static str {
        match self {
            Emphasis::None => "none",
            Emphasis::Moderate => "moderate",
            Emphasis::Strong => "strong",
        }
    }
}

/// Signed percent offsets from the engine default, clamped to [-50, +50].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prosody {
    pub rate_pct: i32,
    pub pitch_pct: i32,
    pub emphasis: Emphasis,
}

impl Prosody {
    pub const ZERO: Prosody = Prosody {
        rate_pct: 0,
        pitch_pct: 0,
        emphasis: Emphasis::None,
    };

    pub fn is_zero(&self) -> bool {
        *self == Prosody::ZERO
    }
}

impl Default for Prosody {
    fn default() -> Self {
        Prosody::ZERO
    }
}

/// One row of the sentiment-to-prosody table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProsodyRule {
    pub rate_coeff: f64,
    pub pitch_coeff: f64,
    pub emphasis: Emphasis,
}

/// Sentiment-to-prosody mapping table.
#[derive(Debug, Clone)]
pub struct ProsodyRules {
    rules: HashMap<SentimentCategory, ProsodyRule>,
}

static BUILTIN_RULES: Lazy<ProsodyRules> = Lazy::new(|| {
    ProsodyRules::from_json(PROSODY_RULES_JSON).expect("bundled prosody rules are valid")
});

impl ProsodyRules {
    pub fn builtin() -> &'static ProsodyRules {
        &BUILTIN_RULES
    }

    /// Parses `{"exclamatory": {"rate_coeff": .., "pitch_coeff": .., "emphasis": ..}, ...}`.
    /// All five categories must be present.
    pub fn from_json(json: &str) -> Result<Self, ProsodyError> {
        let rules: HashMap<SentimentCategory, ProsodyRule> = serde_json::from_str(json)?;
        for cat in SentimentCategory::ALL {
            if !rules.contains_key(&cat) {
                return Err(ProsodyError::MissingCategory(cat));
            }
        }
        Ok(ProsodyRules { rules })
    }

    pub fn rule(&self, category: SentimentCategory) -> ProsodyRule {
        self.rules[&category]
    }
}

/// English polarity word lists; other languages rely on punctuation cues.
#[derive(Debug, Clone)]
pub struct SentimentLexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

static BUILTIN_SENTIMENT: Lazy<SentimentLexicon> = Lazy::new(|| {
    SentimentLexicon::from_json(SENTIMENT_WORDS_JSON).expect("bundled sentiment words are valid")
});

impl SentimentLexicon {
    pub fn builtin() -> &'static SentimentLexicon {
        &BUILTIN_SENTIMENT
    }

    /// Parses `{"positive": [...], "negative": [...]}`.
    pub fn from_json(json: &str) -> Result<Self, ProsodyError> {
        #[derive(Deserialize)]
        struct Raw {
            positive: Vec<String>,
            negative: Vec<String>,
        }
        let raw: Raw = serde_json::from_str(json)?;
        Ok(SentimentLexicon {
            positive: raw.positive.into_iter().map(|w| w.to_lowercase()).collect(),
            negative: raw.negative.into_iter().map(|w| w.to_lowercase()).collect(),
        })
    }
}

/// Estimates sentiment with the bundled polarity lists.
pub fn analyze_sentiment(text: &str) -> Sentiment {
    analyze_sentiment_with(text, SentimentLexicon::builtin())
}

/// Estimates sentiment.
///
/// Terminal `!` gives exclamatory with intensity `min(1, 0.5 + 0.25 * extra
/// bangs)`; terminal `?` (also `？`, `؟`) gives interrogative at 0.5; else the
/// winning polarity list gives positive/negative with intensity `hits /
/// words`; ties and no cues are neutral at 0.
pub fn analyze_sentiment_with(text: &str, lexicon: &SentimentLexicon) -> Sentiment {
    let trimmed = text.trim_end();
    if trimmed.is_empty() {
        return Sentiment::NEUTRAL;
    }

    let last = trimmed.chars().next_back().unwrap();
    if BANGS.contains(&last) {
        let extra = trimmed
            .chars()
            .rev()
            .take_while(|c| BANGS.contains(c))
            .count()
            .saturating_sub(1);
        return Sentiment::new(
            SentimentCategory::Exclamatory,
            (0.5 + 0.25 * extra as f64).min(1.0),
        );
    }
    if QUESTION_MARKS.contains(&last) {
        return Sentiment::new(SentimentCategory::Interrogative, 0.5);
    }

    let mut words = 0usize;
    let mut positive = 0usize;
    let mut negative = 0usize;
    for token in trimmed.split_whitespace() {
        words += 1;
        let norm: String = token
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        if lexicon.positive.contains(&norm) {
            positive += 1;
        }
        if lexicon.negative.contains(&norm) {
            negative += 1;
        }
    }
    if positive > negative {
        Sentiment::new(SentimentCategory::Positive, positive as f64 / words as f64)
    } else if negative > positive {
        Sentiment::new(SentimentCategory::Negative, negative as f64 / words as f64)
    } else {
        Sentiment::NEUTRAL
    }
}

/// Maps sentiment to prosody offsets with the bundled rule table.
pub fn adjust_prosody(segment: Sentiment, overall: Sentiment) -> Prosody {
    adjust_prosody_with(segment, overall, ProsodyRules::builtin())
}

/// Maps sentiment to prosody offsets.
///
/// A neutral segment inherits the overall sentiment; the effective category's
/// coefficients scale by intensity, round to integer percent, and clamp.
pub fn adjust_prosody_with(segment: Sentiment, overall: Sentiment, rules: &ProsodyRules) -> Prosody {
    let effective = if segment.is_neutral() { overall } else { segment };
    let rule = rules.rule(effective.category);
    let rate = (rule.rate_coeff * effective.intensity).round() as i32;
    let pitch = (rule.pitch_coeff * effective.intensity).round() as i32;
    Prosody {
        rate_pct: rate.clamp(-CLAMP_PCT, CLAMP_PCT),
        pitch_pct: pitch.clamp(-CLAMP_PCT, CLAMP_PCT),
        emphasis: if effective.is_neutral() {
            Emphasis::None
        } else {
            rule.emphasis
        },
    }
}

/// Fills every plan entry's prosody from its own sentiment against the
/// overall input sentiment. The plan is otherwise unchanged.
pub fn attach_prosody(plan: &mut VoicePlan, input_text: &str) {
    attach_prosody_with(
        plan,
        input_text,
        SentimentLexicon::builtin(),
        ProsodyRules::builtin(),
    )
}

pub fn attach_prosody_with(
    plan: &mut VoicePlan,
    input_text: &str,
    lexicon: &SentimentLexicon,
    rules: &ProsodyRules,
) {
    let overall = analyze_sentiment_with(input_text, lexicon);
    for entry in &mut plan.entries {
        let seg = analyze_sentiment_with(&entry.segment.segment.text, lexicon);
        entry.prosody = adjust_prosody_with(seg, overall, rules);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terminal_bang_is_exclamatory() {
        let s = analyze_sentiment("What a great day!");
        assert_eq!(s.category, SentimentCategory::Exclamatory);
        assert_eq!(s.intensity, 0.5);
    }

    #[test]
    fn extra_bangs_raise_intensity() {
        assert_eq!(analyze_sentiment("wow!!").intensity, 0.75);
        assert_eq!(analyze_sentiment("wow!!!").intensity, 1.0);
        assert_eq!(analyze_sentiment("wow!!!!!!").intensity, 1.0);
    }

    #[test]
    fn empty_text_is_neutral() {
        assert_eq!(analyze_sentiment(""), Sentiment::NEUTRAL);
        assert_eq!(analyze_sentiment("   "), Sentiment::NEUTRAL);
    }

    #[test]
    fn terminal_question_marks_are_interrogative() {
        for text in ["¿Puedes come here?", "你来吗？", "هل تأتي؟"] {
            let s = analyze_sentiment(text);
            assert_eq!(s.category, SentimentCategory::Interrogative, "{text}");
            assert_eq!(s.intensity, 0.5);
        }
    }

    #[test]
    fn punctuation_wins_over_lexical_polarity() {
        let s = analyze_sentiment("This is terrible, awful, horrible!");
        assert_eq!(s.category, SentimentCategory::Exclamatory);
    }

    #[test]
    fn lexical_polarity() {
        let s = analyze_sentiment("what a wonderful day");
        assert_eq!(s.category, SentimentCategory::Positive);
        assert_eq!(s.intensity, 0.25);

        let s = analyze_sentiment("this is a terrible awful day");
        assert_eq!(s.category, SentimentCategory::Negative);
        assert_eq!(s.intensity, 2.0 / 6.0);

        assert!(analyze_sentiment("a good bad day").is_neutral());
    }

    #[test]
    fn neutral_pair_maps_to_zero_prosody() {
        assert_eq!(
            adjust_prosody(Sentiment::NEUTRAL, Sentiment::NEUTRAL),
            Prosody::ZERO
        );
    }

    #[test]
    fn neutral_segment_inherits_overall() {
        let overall = Sentiment::new(SentimentCategory::Exclamatory, 0.5);
        let p = adjust_prosody(Sentiment::NEUTRAL, overall);
        assert_eq!(p.rate_pct, 5);
        assert_eq!(p.pitch_pct, 4);
        assert_eq!(p.emphasis, Emphasis::Moderate);
    }

    #[test]
    fn segment_sentiment_overrides_overall() {
        let seg = Sentiment::new(SentimentCategory::Negative, 1.0);
        let overall = Sentiment::new(SentimentCategory::Positive, 0.5);
        let p = adjust_prosody(seg, overall);
        assert_eq!(p.rate_pct, -5);
        assert_eq!(p.pitch_pct, -4);
        assert_eq!(p.emphasis, Emphasis::None);
    }

    #[test]
    fn matches_rule_table_for_all_categories_and_intensities() {
        // Independent oracle: recompute from the raw coefficient table.
        let table = [
            (SentimentCategory::Exclamatory, 10.0, 8.0, Emphasis::Moderate),
            (SentimentCategory::Interrogative, 0.0, 6.0, Emphasis::None),
            (SentimentCategory::Positive, 5.0, 4.0, Emphasis::None),
            (SentimentCategory::Negative, -5.0, -4.0, Emphasis::None),
            (SentimentCategory::Neutral, 0.0, 0.0, Emphasis::None),
        ];
        for (cat, rate_c, pitch_c, emphasis) in table {
            for intensity in [0.0, 0.5, 1.0] {
                let got = adjust_prosody(Sentiment { category: cat, intensity }, Sentiment::NEUTRAL);
                let want_rate = (rate_c * intensity).round() as i32;
                let want_pitch = (pitch_c * intensity).round() as i32;
                assert_eq!(got.rate_pct, want_rate.clamp(-50, 50), "{cat} rate @{intensity}");
                assert_eq!(got.pitch_pct, want_pitch.clamp(-50, 50), "{cat} pitch @{intensity}");
                let want_emphasis = if cat == SentimentCategory::Neutral {
                    Emphasis::None
                } else {
                    emphasis
                };
                assert_eq!(got.emphasis, want_emphasis, "{cat} emphasis @{intensity}");
            }
        }
    }

    #[test]
    fn magnitude_is_monotone_in_intensity() {
        for cat in SentimentCategory::ALL {
            let mut prev = 0;
            for step in 0..=10 {
                let s = Sentiment::new(cat, step as f64 / 10.0);
                let p = adjust_prosody(s, Sentiment::NEUTRAL);
                let magnitude = p.rate_pct.abs() + p.pitch_pct.abs();
                assert!(magnitude >= prev, "{cat} at step {step}");
                prev = magnitude;
            }
        }
    }

    #[test]
    fn outputs_stay_in_clamp_range() {
        let rules = ProsodyRules::from_json(
            r#"{
                "exclamatory": {"rate_coeff": 500, "pitch_coeff": -500, "emphasis": "strong"},
                "interrogative": {"rate_coeff": 0, "pitch_coeff": 6, "emphasis": "none"},
                "positive": {"rate_coeff": 5, "pitch_coeff": 4, "emphasis": "none"},
                "negative": {"rate_coeff": -5, "pitch_coeff": -4, "emphasis": "none"},
                "neutral": {"rate_coeff": 0, "pitch_coeff": 0, "emphasis": "none"}
            }"#,
        )
        .unwrap();
        let p = adjust_prosody_with(
            Sentiment::new(SentimentCategory::Exclamatory, 1.0),
            Sentiment::NEUTRAL,
            &rules,
        );
        assert_eq!(p.rate_pct, 50);
        assert_eq!(p.pitch_pct, -50);
    }

    #[test]
    fn rule_table_requires_all_categories() {
        let err = ProsodyRules::from_json(r#"{"neutral": {"rate_coeff": 0, "pitch_coeff": 0, "emphasis": "none"}}"#);
        assert!(matches!(err, Err(ProsodyError::MissingCategory(_))));
    }

    #[test]
    fn attach_prosody_fills_entries_from_segment_and_overall_sentiment() {
        use crate::langid::LangCode;
        use crate::planner::{
            build_voice_plan, Gender, Locale, RegionMap, TaggedSegment, UserPrefs, Voice,
            VoiceCatalog,
        };
        use crate::script::{RawSegment, ScriptClass, Span};

        fn plan_for(texts: &[&str]) -> crate::planner::VoicePlan {
            let catalog = VoiceCatalog::new(vec![Voice {
                id: "A".to_string(),
                locale: Locale::new("en-US").unwrap(),
                gender: Gender::Male,
                family: "wavenet".to_string(),
                engine: "mock".to_string(),
            }]);
            let segments: Vec<TaggedSegment> = texts
                .iter()
                .map(|t| TaggedSegment {
                    segment: RawSegment {
                        text: t.to_string(),
                        script: ScriptClass::Latin,
                        span: Span::new(0, t.chars().count()),
                    },
                    lang: LangCode::new("en").unwrap(),
                })
                .collect();
            build_voice_plan(&segments, &catalog, &UserPrefs::default(), &RegionMap::bundled())
                .unwrap()
        }

        // All-neutral plan stays at the zero fixed point.
        let mut plan = plan_for(&["plain text here. ", "more plain text."]);
        let before = plan.clone();
        attach_prosody(&mut plan, "plain text here. more plain text.");
        for entry in &plan.entries {
            assert_eq!(entry.prosody, Prosody::ZERO);
        }
        // Everything except prosody is untouched.
        for (a, b) in before.entries.iter().zip(&plan.entries) {
            assert_eq!(a.segment, b.segment);
            assert_eq!(a.voice, b.voice);
            assert_eq!(a.pause_before_ms, b.pause_before_ms);
        }

        // Neutral segments inherit an exclamatory overall input, and the
        // shared overall sentiment gives both entries identical prosody.
        let mut plan = plan_for(&["first neutral clause ", "second neutral clause"]);
        attach_prosody(&mut plan, "first neutral clause second neutral clause!");
        let expected = adjust_prosody(
            Sentiment::new(SentimentCategory::Exclamatory, 0.5),
            Sentiment::NEUTRAL,
        );
        assert_eq!(plan.entries[0].prosody, expected);
        assert_eq!(plan.entries[1].prosody, plan.entries[0].prosody);
        assert_eq!(plan.entries[0].prosody.rate_pct, 5);
        assert_eq!(plan.entries[0].prosody.pitch_pct, 4);
        assert_eq!(plan.entries[0].prosody.emphasis, Emphasis::Moderate);

        // A segment with its own cue overrides the overall tone.
        let mut plan = plan_for(&["are you there? ", "a terrible awful ending."]);
        attach_prosody(&mut plan, "are you there? a terrible awful ending.");
        assert_eq!(
            plan.entries[0].prosody,
            adjust_prosody(
                Sentiment::new(SentimentCategory::Interrogative, 0.5),
                Sentiment::NEUTRAL
            )
        );
        assert!(plan.entries[1].prosody.rate_pct < 0);
    }

    #[test]
    fn inheritance_equals_direct_overall_mapping() {
        for cat in SentimentCategory::ALL {
            for intensity in [0.0, 0.3, 1.0] {
                let overall = Sentiment::new(cat, intensity);
                assert_eq!(
                    adjust_prosody(Sentiment::NEUTRAL, overall),
                    adjust_prosody(overall, overall)
                );
            }
        }
    }
}
