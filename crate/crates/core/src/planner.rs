//! Locale resolution and adaptive voice planning.
//!
//! Each language-tagged segment is resolved to a locale (user overrides win,
//! then the primary locale, then a canonical region map) and a voice from the
//! catalog. Planning is anchored on the matrix language — the language
//! covering the most input characters — whose voice carries short foreign
//! spans as `<lang>` renderings instead of a full voice switch.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use once_cell::sync::Lazy;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::langid::LangCode;
use crate::prosody::Prosody;
use crate::script::RawSegment;

const CANONICAL_REGIONS_JSON: &str = include_str!("../data/canonical_regions.json");
const DEMO_CATALOG_JSON: &str = include_str!("../data/demo_catalog.json");

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("no locale rule for language '{0}'")]
    NoLocaleRule(LangCode),
    #[error("no voice in catalog for language '{0}'")]
    NoVoiceForLanguage(String),
    #[error("invalid locale tag: {0:?}")]
    InvalidLocale(String),
    #[error("invalid catalog or prefs data: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot plan an empty segment list")]
    NoSegments,
}

/// Language-region tag in BCP-47 shape, e.g. `en-US`, `hi-IN`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Locale {
    tag: String,
}

impl Locale {
    pub fn new(tag: &str) -> Result<Self, PlanError> {
        let mut parts = tag.split('-');
        let lang = parts.next().unwrap_or_default();
        if lang.len() != 2 || !lang.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(PlanError::InvalidLocale(tag.to_string()));
        }
        let mut normalized = lang.to_ascii_lowercase();
        if let Some(region) = parts.next() {
            let ok = (region.len() == 2 && region.chars().all(|c| c.is_ascii_alphabetic()))
                || (region.len() == 3 && region.chars().all(|c| c.is_ascii_digit()));
            if !ok || parts.next().is_some() {
                return Err(PlanError::InvalidLocale(tag.to_string()));
            }
            normalized.push('-');
            normalized.push_str(&region.to_ascii_uppercase());
        }
        Ok(Locale { tag: normalized })
    }

    pub fn from_parts(lang: LangCode, region: &str) -> Result<Self, PlanError> {
        Locale::new(&format!("{}-{}", lang.as_str(), region))
    }

    pub fn language(&self) -> &str {
        self.tag.split('-').next().unwrap_or(&self.tag)
    }

    pub fn region(&self) -> Option<&str> {
        self.tag.split('-').nth(1)
    }

    pub fn as_str(&self) -> &str {
        &self.tag
    }
}

impl fmt::Debug for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Locale({})", self.tag)
    }
}

impl fmt::Display for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag)
    }
}

impl FromStr for Locale {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Locale::new(s)
    }
}

impl Serialize for Locale {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.tag)
    }
}

impl<'de> Deserialize<'de> for Locale {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Locale::new(&s).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
    Neutral,
}

/// One engine voice, annotated for similarity matching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Voice {
    pub id: String,
    pub locale: Locale,
    pub gender: Gender,
    pub family: String,
    pub engine: String,
}

/// Ordered voice inventory, indexable by locale or language subtag.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VoiceCatalog {
    voices: Vec<Voice>,
}

static DEMO_CATALOG: Lazy<VoiceCatalog> = Lazy::new(|| {
    VoiceCatalog::from_json(DEMO_CATALOG_JSON).expect("bundled catalog is valid")
});

impl VoiceCatalog {
    pub fn new(voices: Vec<Voice>) -> Self {
        VoiceCatalog { voices }
    }

    /// The bundled demonstration catalog (Google-style voice names).
    pub fn demo() -> VoiceCatalog {
        DEMO_CATALOG.clone()
    }

    /// Parses a JSON array of `{id, locale, gender, family, engine}`.
    pub fn from_json(json: &str) -> Result<Self, PlanError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn voices(&self) -> &[Voice] {
        &self.voices
    }

    pub fn is_empty(&self) -> bool {
        self.voices.is_empty()
    }

    fn exact_locale(&self, locale: &Locale) -> Vec<&Voice> {
        self.voices.iter().filter(|v| &v.locale == locale).collect()
    }

    fn same_language(&self, language: &str) -> Vec<&Voice> {
        self.voices
            .iter()
            .filter(|v| v.locale.language() == language)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoiceMode {
    SingleVoice,
    MultiVoice,
}

/// Per-request user preferences.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct UserPrefs {
    pub latin_lang_hint: Option<LangCode>,
    pub mode: VoiceMode,
    pub default_lang: LangCode,
    pub primary_locale: Locale,
    pub switch_threshold_words: usize,
    pub region_overrides: HashMap<LangCode, String>,
    pub loanwords: HashMap<String, LangCode>,
    pub boundary_pause_ms: u32,
    /// Soft cap on distinct voices per utterance; extra languages render as
    /// lang spans under the anchor voice.
    pub max_voices: usize,
}

impl Default for UserPrefs {
    fn default() -> Self {
        UserPrefs {
            latin_lang_hint: None,
            mode: VoiceMode::MultiVoice,
            default_lang: LangCode::new("en").unwrap(),
            primary_locale: Locale::new("en-US").unwrap(),
            switch_threshold_words: 3,
            region_overrides: HashMap::new(),
            loanwords: HashMap::new(),
            boundary_pause_ms: 50,
            max_voices: 2,
        }
    }
}

/// Canonical language -> region map, loadable from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionMap {
    regions: HashMap<LangCode, String>,
}

static BUNDLED_REGIONS: Lazy<RegionMap> = Lazy::new(|| {
    RegionMap::from_json(CANONICAL_REGIONS_JSON).expect("bundled region map is valid")
});

impl RegionMap {
    pub fn bundled() -> RegionMap {
        BUNDLED_REGIONS.clone()
    }

    pub fn from_json(json: &str) -> Result<Self, PlanError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn get(&self, lang: LangCode) -> Option<&str> {
        self.regions.get(&lang).map(String::as_str)
    }
}

/// A script segment with its resolved language.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaggedSegment {
    pub segment: RawSegment,
    pub lang: LangCode,
}

/// One planned utterance span: segment, locale, voice, prosody, pause.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoicePlanEntry {
    pub segment: TaggedSegment,
    pub locale: Locale,
    pub voice: Voice,
    /// Render as a `<lang>` span under the carrying voice instead of a voice
    /// switch.
    pub lang_span: bool,
    pub prosody: Prosody,
    pub pause_before_ms: u32,
}

impl VoicePlanEntry {
    pub fn text(&self) -> &str {
        &self.segment.segment.text
    }

    pub fn lang(&self) -> LangCode {
        self.segment.lang
    }

    pub fn word_count(&self) -> usize {
        self.text().split_whitespace().count()
    }
}

/// Ordered voice assignments for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoicePlan {
    pub entries: Vec<VoicePlanEntry>,
    pub primary_locale: Locale,
    pub primary_voice: Voice,
    pub mode: VoiceMode,
}

impl VoicePlan {
    pub fn anchor_language(&self) -> &str {
        self.primary_locale.language()
    }

    pub fn distinct_voice_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for entry in &self.entries {
            if !ids.contains(&entry.voice.id.as_str()) {
                ids.push(&entry.voice.id);
            }
        }
        ids
    }
}

/// Resolves a language to a locale.
///
/// Precedence: `prefs.region_overrides`, then the primary locale when the
/// language matches it, then the canonical region map.
pub fn determine_locale(
    lang: LangCode,
    _context: &str,
    prefs: &UserPrefs,
    regions: &RegionMap,
) -> Result<Locale, PlanError> {
    if let Some(region) = prefs.region_overrides.get(&lang) {
        return Locale::from_parts(lang, region);
    }
    if prefs.primary_locale.language() == lang.as_str() {
        return Ok(prefs.primary_locale.clone());
    }
    if let Some(region) = regions.get(lang) {
        return Locale::from_parts(lang, region);
    }
    Err(PlanError::NoLocaleRule(lang))
}

/// Picks a voice for a locale.
///
/// Exact-locale candidates are preferred over same-language ones; among
/// candidates, an anchor's gender match wins, then its family match, then
/// catalog order.
pub fn select_voice(
    locale: &Locale,
    catalog: &VoiceCatalog,
    anchor: Option<&Voice>,
) -> Result<Voice, PlanError> {
    let mut candidates = catalog.exact_locale(locale);
    if candidates.is_empty() {
        candidates = catalog.same_language(locale.language());
    }
    if candidates.is_empty() {
        return Err(PlanError::NoVoiceForLanguage(locale.language().to_string()));
    }
    let best = candidates
        .into_iter()
        .enumerate()
        .min_by_key(|(idx, v)| match anchor {
            Some(a) => (v.gender != a.gender, v.family != a.family, *idx),
            None => (false, false, *idx),
        })
        .map(|(_, v)| v.clone())
        .expect("candidate list is non-empty");
    Ok(best)
}

/// Case-insensitive loanword lookup; a hit pins the token's language before
/// boundary splitting runs.
pub fn loanword_check(token: &str, prefs: &UserPrefs) -> Option<LangCode> {
    let norm = token.to_lowercase();
    prefs
        .loanwords
        .iter()
        .find(|(word, _)| word.to_lowercase() == norm)
        .map(|(_, lang)| *lang)
}

/// Builds the voice plan for language-tagged segments.
pub fn build_voice_plan(
    segments: &[TaggedSegment],
    catalog: &VoiceCatalog,
    prefs: &UserPrefs,
    regions: &RegionMap,
) -> Result<VoicePlan, PlanError> {
    if segments.is_empty() {
        return Err(PlanError::NoSegments);
    }
    let context: String = segments.iter().map(|s| s.segment.text.as_str()).collect();

    let anchor_lang = anchor_language(segments);
    let primary_locale = determine_locale(anchor_lang, &context, prefs, regions)?;
    let primary_voice = select_voice(&primary_locale, catalog, None)?;

    let mut entries = Vec::with_capacity(segments.len());
    for tagged in segments {
        let locale = determine_locale(tagged.lang, &context, prefs, regions)?;
        let (voice, lang_span) = match prefs.mode {
            VoiceMode::SingleVoice => (primary_voice.clone(), tagged.lang != anchor_lang),
            VoiceMode::MultiVoice => (
                select_voice(&locale, catalog, Some(&primary_voice))?,
                false,
            ),
        };
        entries.push(VoicePlanEntry {
            segment: tagged.clone(),
            locale,
            voice,
            lang_span,
            prosody: Prosody::ZERO,
            pause_before_ms: 0,
        });
    }

    let mut plan = VoicePlan {
        entries,
        primary_locale,
        primary_voice,
        mode: prefs.mode,
    };
    if prefs.mode == VoiceMode::MultiVoice {
        plan = apply_switch_threshold(plan, prefs);
        cap_distinct_voices(&mut plan, prefs.max_voices);
    }
    assign_pauses(&mut plan, prefs);
    Ok(plan)
}

/// Re-assigns short foreign spans to the anchor voice.
///
/// A foreign entry of at most `switch_threshold_words` words keeps the anchor
/// voice with `lang_span = true`; longer entries keep their native voice.
pub fn apply_switch_threshold(mut plan: VoicePlan, prefs: &UserPrefs) -> VoicePlan {
    let anchor_lang = plan.primary_locale.language().to_string();
    let primary_voice = plan.primary_voice.clone();
    for entry in &mut plan.entries {
        if entry.lang().as_str() != anchor_lang
            && entry.word_count() <= prefs.switch_threshold_words
        {
            entry.voice = primary_voice.clone();
            entry.lang_span = true;
        }
    }
    assign_pauses(&mut plan, prefs);
    plan
}

/// Soft cap: entries that would introduce a voice beyond `max_voices` render
/// as lang spans under the anchor voice instead. The anchor voice always
/// counts as the first slot.
fn cap_distinct_voices(plan: &mut VoicePlan, max_voices: usize) {
    if max_voices == 0 {
        return;
    }
    let primary_voice = plan.primary_voice.clone();
    let mut seen: Vec<String> = vec![primary_voice.id.clone()];
    for entry in &mut plan.entries {
        if seen.contains(&entry.voice.id) {
            continue;
        }
        if seen.len() < max_voices {
            seen.push(entry.voice.id.clone());
        } else {
            entry.voice = primary_voice.clone();
            entry.lang_span = true;
        }
    }
}

/// First entry rests at zero; afterwards every voice or language change
/// carries the boundary pause.
fn assign_pauses(plan: &mut VoicePlan, prefs: &UserPrefs) {
    for i in 0..plan.entries.len() {
        plan.entries[i].pause_before_ms = if i == 0 {
            0
        } else {
            let prev = &plan.entries[i - 1];
            let cur = &plan.entries[i];
            if cur.lang() != prev.lang() || cur.voice.id != prev.voice.id {
                prefs.boundary_pause_ms
            } else {
                0
            }
        };
    }
}

/// The language covering the most input characters; ties break toward the
/// earliest segment.
fn anchor_language(segments: &[TaggedSegment]) -> LangCode {
    let mut totals: Vec<(LangCode, usize)> = Vec::new();
    for tagged in segments {
        let chars = tagged.segment.text.chars().count();
        match totals.iter_mut().find(|(l, _)| *l == tagged.lang) {
            Some((_, n)) => *n += chars,
            None => totals.push((tagged.lang, chars)),
        }
    }
    let mut best = totals[0];
    for &(l, n) in &totals[1..] {
        if n > best.1 {
            best = (l, n);
        }
    }
    best.0
}
