//! Run configuration: a JSON config file merged with command-line overrides,
//! resolved into the shared pipeline runtime.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use polyvox::engine::{HttpEngine, MockEngine, SynthesisEngine};
use polyvox::langid::{bundled_canonical_langs, DetectorConfig, LangCode, LanguageDetector, LexiconSet};
use polyvox::pipeline::Pipeline;
use polyvox::planner::{RegionMap, UserPrefs, VoiceCatalog, VoiceMode};
use polyvox::ssml::SsmlDialect;
use polyvox::synth::SynthCache;
use serde::Deserialize;

use crate::error::CliError;

/// JSON config file shape; every field is optional.
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub prefs: UserPrefs,
    pub catalog_path: Option<PathBuf>,
    pub lexicon_paths: Vec<PathBuf>,
    pub dialect: String,
    pub engine: String,
    pub http_endpoint: Option<String>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            prefs: UserPrefs::default(),
            catalog_path: None,
            lexicon_paths: Vec::new(),
            dialect: "generic".to_string(),
            engine: "mock".to_string(),
            http_endpoint: None,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&raw)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub hint: Option<String>,
    pub mode: Option<String>,
    pub dialect: Option<String>,
    pub engine: Option<String>,
    pub endpoint: Option<String>,
    pub pause_ms: Option<u32>,
    pub catalog: Option<PathBuf>,
    pub lexicons: Vec<PathBuf>,
    pub single_request: bool,
}

/// Everything a request handler needs; shared state is immutable or
/// internally synchronized.
#[derive(Clone)]
pub struct Runtime {
    pub pipeline: Arc<Pipeline>,
    pub prefs: UserPrefs,
    pub dialect: SsmlDialect,
    pub engine: Arc<dyn SynthesisEngine>,
    pub cache: Arc<SynthCache>,
    pub single_request: bool,
    pub out: Option<PathBuf>,
}

pub fn parse_mode(mode: &str) -> Result<VoiceMode, CliError> {
    match mode {
        "single_voice" => Ok(VoiceMode::SingleVoice),
        "multi_voice" => Ok(VoiceMode::MultiVoice),
        other => Err(CliError::input(
            "bad_mode",
            format!("unknown mode {other:?}; expected single_voice or multi_voice"),
        )),
    }
}

/// Builds the runtime from config plus overrides and validates referenced
/// files.
pub fn build_runtime(mut config: RunConfig, overrides: &Overrides) -> Result<Runtime, CliError> {
    if let Some(path) = &overrides.catalog {
        config.catalog_path = Some(path.clone());
    }
    config.lexicon_paths.extend(overrides.lexicons.clone());
    if let Some(dialect) = &overrides.dialect {
        config.dialect = dialect.clone();
    }
    if let Some(engine) = &overrides.engine {
        config.engine = engine.clone();
    }
    if let Some(endpoint) = &overrides.endpoint {
        config.http_endpoint = Some(endpoint.clone());
    }

    let mut prefs = config.prefs.clone();
    if let Some(hint) = &overrides.hint {
        let lang = LangCode::new(hint)
            .map_err(|e| CliError::input("bad_hint", e.to_string()))?;
        prefs.latin_lang_hint = Some(lang);
    }
    if let Some(mode) = &overrides.mode {
        prefs.mode = parse_mode(mode)?;
    }
    if let Some(pause) = overrides.pause_ms {
        prefs.boundary_pause_ms = pause;
    }

    let catalog = match &config.catalog_path {
        Some(path) => {
            let raw = fs::read_to_string(path).map_err(|e| {
                CliError::config(format!("cannot read catalog {}: {e}", path.display()))
            })?;
            VoiceCatalog::from_json(&raw)
                .map_err(|e| CliError::config(format!("invalid catalog: {e}")))?
        }
        None => VoiceCatalog::demo(),
    };

    let mut lexicons = LexiconSet::bundled();
    for path in &config.lexicon_paths {
        let raw = fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read lexicon {}: {e}", path.display()))
        })?;
        let user = LexiconSet::from_json(&raw)
            .map_err(|e| CliError::config(format!("invalid lexicon {}: {e}", path.display())))?;
        lexicons.merge(user);
    }

    let detector = LanguageDetector::new(
        lexicons,
        bundled_canonical_langs(),
        DetectorConfig {
            default_lang: prefs.default_lang,
            ..DetectorConfig::default()
        },
    );

    let dialect = SsmlDialect::by_name(&config.dialect)
        .map_err(|e| CliError::input("bad_dialect", e.to_string()))?;

    let engine: Arc<dyn SynthesisEngine> = match config.engine.as_str() {
        "mock" => Arc::new(MockEngine::new()),
        "http" => {
            let endpoint = config.http_endpoint.clone().ok_or_else(|| {
                CliError::config("engine \"http\" requires an http_endpoint")
            })?;
            Arc::new(HttpEngine::new(endpoint))
        }
        other => {
            return Err(CliError::config(format!(
                "unknown engine {other:?}; expected mock or http"
            )))
        }
    };

    Ok(Runtime {
        pipeline: Arc::new(Pipeline::new(detector, catalog, RegionMap::bundled())),
        prefs,
        dialect,
        engine,
        cache: Arc::new(SynthCache::new()),
        single_request: overrides.single_request,
        out: config.out,
    })
}
