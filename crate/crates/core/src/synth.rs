//! Plan synthesis: dispatch, caching, assembly, normalization.
//!
//! Entries either render through one unified SSML request (when requested and
//! every voice lives on the same engine) or per entry, with a shared
//! content-addressed cache consulted first. Per-entry renders run on scoped
//! threads; assembly order always equals plan order.

use std::collections::HashMap;
use std::sync::RwLock;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audio::{concat_with_pauses, normalize_audio, resample_to_canonical, AudioClip, AudioError};
use crate::engine::{render_with_retry, EngineFailure, EngineRequest, Payload, RetryPolicy, SynthesisEngine};
use crate::planner::VoicePlan;
use crate::prosody::Prosody;
use crate::ssml::{build_ssml, SsmlDialect, SsmlDocument, SsmlError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("engine failure at plan entry {index}: {source}")]
    Engine {
        index: usize,
        source: EngineFailure,
    },
    #[error(transparent)]
    Ssml(#[from] SsmlError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("plan has no entries")]
    EmptyPlan,
}

/// Digest of (text, voice id, prosody, dialect name). Equal inputs collide;
/// any field change separates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Builds a cache key. Fields are length-prefixed before hashing so no
/// concatenation of different fields can produce the same digest input.
pub fn cache_key(text: &str, voice_id: &str, prosody: &Prosody, dialect_name: &str) -> CacheKey {
    let mut hasher = Sha256::new();
    for field in [
        text,
        voice_id,
        &prosody.rate_pct.to_string(),
        &prosody.pitch_pct.to_string(),
        prosody.emphasis.as_str(),
        dialect_name,
    ] {
        hasher.update((field.len() as u64).to_le_bytes());
        hasher.update(field.as_bytes());
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    CacheKey(hex)
}

/// Shared clip cache: concurrent reads, last-writer-wins writes of identical
/// values.
#[derive(Debug, Default)]
pub struct SynthCache {
    map: RwLock<HashMap<CacheKey, AudioClip>>,
}

impl SynthCache {
    pub fn new() -> Self {
        SynthCache::default()
    }

    pub fn get(&self, key: &CacheKey) -> Option<AudioClip> {
        self.map.read().expect("cache lock poisoned").get(key).cloned()
    }

    pub fn insert(&self, key: CacheKey, clip: AudioClip) {
        self.map.write().expect("cache lock poisoned").insert(key, clip);
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.write().expect("cache lock poisoned").clear();
    }
}

/// Synthesis result; `ssml` is present when the unified-request path ran.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub audio: AudioClip,
    pub ssml: Option<SsmlDocument>,
}

/// Synthesizes a prosody-annotated plan with the default retry policy.
pub fn synthesize_plan(
    plan: &VoicePlan,
    engine: &dyn SynthesisEngine,
    cache: &SynthCache,
    dialect: &SsmlDialect,
    single_request: bool,
) -> Result<SynthOutput, SynthError> {
    synthesize_plan_with(plan, engine, cache, dialect, single_request, &RetryPolicy::default())
}

pub fn synthesize_plan_with(
    plan: &VoicePlan,
    engine: &dyn SynthesisEngine,
    cache: &SynthCache,
    dialect: &SsmlDialect,
    single_request: bool,
    retry: &RetryPolicy,
) -> Result<SynthOutput, SynthError> {
    if plan.entries.is_empty() {
        return Err(SynthError::EmptyPlan);
    }

    let same_engine = plan
        .entries
        .iter()
        .all(|e| e.voice.engine == plan.entries[0].voice.engine);
    if single_request && same_engine {
        return synthesize_unified(plan, engine, cache, dialect, retry);
    }
    synthesize_per_entry(plan, engine, cache, dialect, retry)
}

/// One SSML document, one engine call; break tags carry the pauses.
fn synthesize_unified(
    plan: &VoicePlan,
    engine: &dyn SynthesisEngine,
    cache: &SynthCache,
    dialect: &SsmlDialect,
    retry: &RetryPolicy,
) -> Result<SynthOutput, SynthError> {
    let doc = build_ssml(plan, dialect)?;
    let key = cache_key(
        &doc.body,
        &plan.primary_voice.id,
        &Prosody::ZERO,
        dialect.name.as_str(),
    );
    let clip = match cache.get(&key) {
        Some(hit) => hit,
        None => {
            let req = EngineRequest {
                payload: Payload::Ssml(doc.body.clone()),
                voice: plan.primary_voice.clone(),
                prosody: Prosody::ZERO,
                dialect: dialect.clone(),
            };
            let rendered = render_with_retry(engine, &req, retry)
                .map_err(|source| SynthError::Engine { index: 0, source })?;
            let canonical = resample_to_canonical(&rendered)?;
            cache.insert(key, canonical.clone());
            canonical
        }
    };
    Ok(SynthOutput {
        audio: normalize_audio(&clip),
        ssml: Some(doc),
    })
}

/// Per-entry requests: cache first, misses rendered concurrently, assembly in
/// plan order, then pauses and normalization.
fn synthesize_per_entry(
    plan: &VoicePlan,
    engine: &dyn SynthesisEngine,
    cache: &SynthCache,
    dialect: &SsmlDialect,
    retry: &RetryPolicy,
) -> Result<SynthOutput, SynthError> {
    let keys: Vec<CacheKey> = plan
        .entries
        .iter()
        .map(|e| cache_key(e.text(), &e.voice.id, &e.prosody, dialect.name.as_str()))
        .collect();

    let mut clips: Vec<Option<AudioClip>> = keys.iter().map(|k| cache.get(k)).collect();

    let misses: Vec<usize> = clips
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.is_none().then_some(i))
        .collect();

    if !misses.is_empty() {
        let mut rendered: Vec<(usize, Result<AudioClip, EngineFailure>)> =
            Vec::with_capacity(misses.len());
        std::thread::scope(|scope| {
            let handles: Vec<_> = misses
                .iter()
                .map(|&i| {
                    let entry = &plan.entries[i];
                    scope.spawn(move || {
                        let req = EngineRequest {
                            payload: Payload::Text(entry.text().to_string()),
                            voice: entry.voice.clone(),
                            prosody: entry.prosody,
                            dialect: dialect.clone(),
                        };
                        (i, render_with_retry(engine, &req, retry))
                    })
                })
                .collect();
            for handle in handles {
                rendered.push(handle.join().expect("render thread panicked"));
            }
        });
        rendered.sort_by_key(|(i, _)| *i);
        for (i, result) in rendered {
            let clip = result.map_err(|source| SynthError::Engine { index: i, source })?;
            let canonical = resample_to_canonical(&clip)?;
            cache.insert(keys[i].clone(), canonical.clone());
            clips[i] = Some(canonical);
        }
    }

    let ordered: Vec<AudioClip> = clips.into_iter().map(|c| c.expect("clip filled")).collect();
    let pauses: Vec<u32> = plan.entries.iter().map(|e| e.pause_before_ms).collect();
    let joined = concat_with_pauses(&ordered, &pauses)?;
    Ok(SynthOutput {
        audio: normalize_audio(&joined),
        ssml: None,
    })
}
