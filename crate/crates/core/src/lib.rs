//! Engine-agnostic code-switching text-to-speech orchestration.
//!
//! The crate splits multilingual text into same-script segments, resolves a
//! language, locale, and voice per segment, normalizes prosody from sentiment
//! cues, renders SSML for several engine dialects, and assembles unified
//! 16 kHz mono PCM through a pluggable synthesis-engine boundary. A
//! deterministic mock engine lets the whole pipeline run and be measured
//! offline.
//!
//! ```
//! use polyvox::engine::MockEngine;
//! use polyvox::pipeline::{Pipeline, PipelineOptions};
//! use polyvox::planner::UserPrefs;
//! use polyvox::ssml::SsmlDialect;
//! use polyvox::synth::SynthCache;
//!
//! let pipeline = Pipeline::with_defaults();
//! let result = pipeline
//!     .run(
//!         "I'm from the United States. 我来自美国。",
//!         &UserPrefs::default(),
//!         &SsmlDialect::generic(),
//!         &MockEngine::new(),
//!         &SynthCache::new(),
//!         &PipelineOptions::default(),
//!     )
//!     .unwrap();
//! assert_eq!(result.plan.entries.len(), 2);
//! assert!(result.audio.is_canonical());
//! ```

pub mod audio;
pub mod engine;
pub mod langid;
pub mod pipeline;
pub mod planner;
pub mod prosody;
pub mod script;
pub mod ssml;
pub mod synth;

pub use pipeline::{Pipeline, PipelineError, PipelineOptions, PipelineResult};
