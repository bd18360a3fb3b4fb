//! End-to-end orchestration: segment, identify, plan, normalize prosody,
//! render SSML, synthesize, assemble.
//!
//! The pipeline itself is stateless; a `Pipeline` value only bundles the
//! immutable resources (detector, catalog, region map) so concurrent runs can
//! share them along with an external clip cache.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::audio::AudioClip;
use crate::engine::{RetryPolicy, SynthesisEngine};
use crate::langid::{LangIdError, LanguageDetector, LoanwordPins};
use crate::planner::{
    build_voice_plan, PlanError, RegionMap, TaggedSegment, UserPrefs, VoiceCatalog, VoicePlan,
};
use crate::prosody::attach_prosody;
use crate::script::{split_by_script, ScriptClass};
use crate::ssml::SsmlDocument;
use crate::synth::{synthesize_plan_with, SynthCache, SynthError};
use crate::ssml::SsmlDialect;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("input is empty")]
    EmptyInput,
    #[error("language identification failed: {0}")]
    LanguageId(#[from] LangIdError),
    #[error("voice planning failed: {0}")]
    Planning(#[from] PlanError),
    #[error("synthesis failed: {0}")]
    Synthesis(#[from] SynthError),
}

impl PipelineError {
    /// Stable stage identifier for error reporting surfaces.
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::EmptyInput => "input",
            PipelineError::LanguageId(_) => "language_id",
            PipelineError::Planning(_) => "planning",
            PipelineError::Synthesis(_) => "synthesis",
        }
    }
}

/// Wall-clock cost of each stage of the latest run.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub segmentation: Duration,
    pub language_id: Duration,
    pub planning: Duration,
    pub prosody: Duration,
    pub synthesis: Duration,
}

/// Everything a run produced, stage by stage.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub segments: Vec<TaggedSegment>,
    pub plan: VoicePlan,
    /// Present when the unified single-request path rendered the utterance.
    pub ssml: Option<SsmlDocument>,
    pub audio: AudioClip,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    /// Render the whole plan as one SSML document and one engine call when
    /// every voice lives on the same engine.
    pub single_request: bool,
    pub retry: RetryPolicy,
}

/// Immutable pipeline resources; safe to share across concurrent runs.
#[derive(Debug, Clone)]
pub struct Pipeline {
    detector: LanguageDetector,
    catalog: VoiceCatalog,
    regions: RegionMap,
}

impl Pipeline {
    pub fn new(detector: LanguageDetector, catalog: VoiceCatalog, regions: RegionMap) -> Self {
        Pipeline {
            detector,
            catalog,
            regions,
        }
    }

    /// Bundled detector, demo catalog, and canonical regions.
    pub fn with_defaults() -> Self {
        Pipeline::new(
            LanguageDetector::default(),
            VoiceCatalog::demo(),
            RegionMap::bundled(),
        )
    }

    pub fn catalog(&self) -> &VoiceCatalog {
        &self.catalog
    }

    pub fn detector(&self) -> &LanguageDetector {
        &self.detector
    }

    /// Splits by script and assigns a language per segment, splitting Latin
    /// segments that mix languages.
    pub fn tag_segments(
        &self,
        text: &str,
        prefs: &UserPrefs,
    ) -> Result<Vec<TaggedSegment>, PipelineError> {
        if text.trim().is_empty() {
            return Err(PipelineError::EmptyInput);
        }
        let pins: LoanwordPins = prefs
            .loanwords
            .iter()
            .map(|(word, lang)| (word.to_lowercase(), *lang))
            .collect();

        let mut tagged = Vec::new();
        for segment in split_by_script(text) {
            let hint = prefs.latin_lang_hint;
            let detection = self.detector.detect(&segment, hint, &pins)?;
            let is_latin = segment.script == ScriptClass::Latin;
            if is_latin && self.detector.contains_multiple_languages(&segment, hint, &pins) {
                match self.detector.split_by_language_boundary(&segment, hint, &pins) {
                    Ok(subs) => {
                        tagged.extend(
                            subs.into_iter()
                                .map(|(segment, lang)| TaggedSegment { segment, lang }),
                        );
                        continue;
                    }
                    Err(LangIdError::DegenerateSplit) => {}
                    Err(other) => return Err(other.into()),
                }
            }
            tagged.push(TaggedSegment {
                segment,
                lang: detection.lang,
            });
        }
        Ok(tagged)
    }

    /// Runs segmentation through prosody attachment; no synthesis.
    pub fn plan(
        &self,
        text: &str,
        prefs: &UserPrefs,
    ) -> Result<(Vec<TaggedSegment>, VoicePlan), PipelineError> {
        let segments = self.tag_segments(text, prefs)?;
        let mut plan = build_voice_plan(&segments, &self.catalog, prefs, &self.regions)?;
        attach_prosody(&mut plan, text);
        Ok((segments, plan))
    }

    /// Full run: text to normalized canonical audio.
    #[allow(clippy::too_many_arguments)]
    pub fn run(
        &self,
        text: &str,
        prefs: &UserPrefs,
        dialect: &SsmlDialect,
        engine: &dyn SynthesisEngine,
        cache: &SynthCache,
        opts: &PipelineOptions,
    ) -> Result<PipelineResult, PipelineError> {
        let mut timings = StageTimings::default();

        let started = Instant::now();
        if text.trim().is_empty() {
            return Err(PipelineError::EmptyInput);
        }
        let raw_count = split_by_script(text).len();
        timings.segmentation = started.elapsed();

        let started = Instant::now();
        let segments = self.tag_segments(text, prefs)?;
        debug_assert!(segments.len() >= raw_count.min(1));
        timings.language_id = started.elapsed();

        let started = Instant::now();
        let mut plan = build_voice_plan(&segments, &self.catalog, prefs, &self.regions)?;
        timings.planning = started.elapsed();

        let started = Instant::now();
        attach_prosody(&mut plan, text);
        timings.prosody = started.elapsed();

        let started = Instant::now();
        let output = synthesize_plan_with(
            &plan,
            engine,
            cache,
            dialect,
            opts.single_request,
            &opts.retry,
        )?;
        timings.synthesis = started.elapsed();

        Ok(PipelineResult {
            segments,
            plan,
            ssml: output.ssml,
            audio: output.audio,
            timings,
        })
    }
}
