//! Acceptance suite: every release-gating behavior in one place, one test per
//! criterion, each printing a PASS line (run with `-- --nocapture` to see
//! them).
//!
//! The segmentation checks compare against an independent brute-force oracle
//! written here; expected numbers elsewhere come from closed-form arithmetic
//! on the documented formulas, not from the implementation under test.

use std::time::Instant;

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyvox::audio::{
    concat_with_pauses, encode_wav, estimate_f0, measure_pauses, sine_clip, AudioClip,
};
use polyvox::engine::{voice_base_frequency, MockEngine};
use polyvox::langid::LangCode;
use polyvox::pipeline::{Pipeline, PipelineOptions};
use polyvox::planner::{
    build_voice_plan, Gender, Locale, RegionMap, TaggedSegment, UserPrefs, Voice, VoiceCatalog,
    VoicePlan, VoicePlanEntry,
};
use polyvox::prosody::{adjust_prosody, Emphasis, Prosody, Sentiment, SentimentCategory};
use polyvox::script::{classify_char, split_by_script, RawSegment, ScriptClass, Span};
use polyvox::ssml::{build_ssml, validate, SsmlDialect};
use polyvox::synth::SynthCache;

const SAMPLE_S: f64 = 1.0 / 16_000.0;

fn pass(line: &str) {
    println!("acceptance {line}: PASS");
}

fn run_defaults(
    pipeline: &Pipeline,
    text: &str,
    prefs: &UserPrefs,
    engine: &MockEngine,
    cache: &SynthCache,
) -> polyvox::PipelineResult {
    pipeline
        .run(
            text,
            prefs,
            &SsmlDialect::generic(),
            engine,
            cache,
            &PipelineOptions::default(),
        )
        .unwrap()
}

// --- 1. case-study plans -------------------------------------------------

#[test]
fn acceptance_01_case_study_plans() {
    let pipeline = Pipeline::with_defaults();
    let prefs = UserPrefs::default();
    let cases = [
        (
            "I'm from the United States. Soy de los Estados Unidos.",
            ["en", "es"],
        ),
        ("I'm from the United States. 我来自美国。", ["en", "zh"]),
        (
            "Je viens des États-Unis. أنا من الولايات المتحدة.",
            ["fr", "ar"],
        ),
    ];
    // Warm the bundled tables so the timed runs measure planning, not lazy
    // initialization.
    pipeline.plan(cases[0].0, &prefs).unwrap();

    for (text, expected) in cases {
        let started = Instant::now();
        let (_, plan) = pipeline.plan(text, &prefs).unwrap();
        let elapsed = started.elapsed();
        let langs: Vec<&str> = plan.entries.iter().map(|e| e.segment.lang.as_str()).collect();
        assert_eq!(plan.entries.len(), 2, "{text}");
        assert_eq!(langs, expected, "{text}");
        assert!(
            elapsed.as_millis() < 50,
            "plan for {text:?} took {elapsed:?}"
        );
    }
    pass("1 (case-study plans are exact language pairs in <50ms)");
}

// --- 2. pause reproduction ------------------------------------------------

#[test]
fn acceptance_02_pause_reproduction() {
    let pipeline = Pipeline::with_defaults();
    let text = "I'm from the United States. Soy de los Estados Unidos.";
    for pause_ms in [189u32, 703] {
        let prefs = UserPrefs {
            boundary_pause_ms: pause_ms,
            ..UserPrefs::default()
        };
        let result = run_defaults(
            &pipeline,
            text,
            &prefs,
            &MockEngine::new(),
            &SynthCache::new(),
        );
        let pauses = measure_pauses(&result.audio, 0.002, 100);
        assert_eq!(pauses.len(), 1, "{pause_ms}ms run");
        let expected = pause_ms as f64 / 1000.0;
        assert!(
            (pauses[0].duration_s - expected).abs() <= SAMPLE_S + 1e-12,
            "{pause_ms}ms: measured {}s",
            pauses[0].duration_s
        );
    }

    // Sample-exact construction for the same schedule.
    let clips = [
        sine_clip(250.0, 0.5, 0.5),
        sine_clip(322.0, 0.6, 0.5),
        sine_clip(410.0, 0.7, 0.5),
    ];
    let joined = concat_with_pauses(&clips, &[0, 189, 703]).unwrap();
    let measured = measure_pauses(&joined, 0.002, 100);
    assert_eq!(measured.len(), 2);
    assert!((measured[0].duration_s - 0.189).abs() <= SAMPLE_S + 1e-12);
    assert!((measured[1].duration_s - 0.703).abs() <= SAMPLE_S + 1e-12);
    pass("2 (189 ms and 703 ms pause overrides measured within one sample)");
}

// --- 3. F0 instrumentation -------------------------------------------------

#[test]
fn acceptance_03_f0_instrumentation() {
    let tone = sine_clip(262.0, 1.0, 0.5);
    let f0 = estimate_f0(&tone, 0.0, 1.0).unwrap();
    assert!((f0 - 262.0).abs() <= 2.0, "estimated {f0} Hz");
    pass("3 (262 Hz tone estimated within 2 Hz)");
}

// --- 4. default pause -------------------------------------------------------

#[test]
fn acceptance_04_default_pause() {
    let pipeline = Pipeline::with_defaults();
    let inputs = [
        "I'm from the United States. Soy de los Estados Unidos.",
        "I'm from the United States. 我来自美国。",
        "Je viens des États-Unis. أنا من الولايات المتحدة.",
    ];
    for text in inputs {
        let result = run_defaults(
            &pipeline,
            text,
            &UserPrefs::default(),
            &MockEngine::new(),
            &SynthCache::new(),
        );
        let pauses = measure_pauses(&result.audio, 0.002, 30);
        assert_eq!(pauses.len(), 1, "{text}");
        assert!(
            (pauses[0].duration_s - 0.050).abs() <= SAMPLE_S + 1e-12,
            "{text}: measured {}s",
            pauses[0].duration_s
        );
    }
    pass("4 (two-language inputs yield exactly one 50 ms gap)");
}

// --- 5 & 6. segmentation oracle equivalence and lossless round-trip ---------

fn is_neutral(class: ScriptClass) -> bool {
    matches!(class, ScriptClass::Common | ScriptClass::Unknown)
}

fn in_kana_group(class: ScriptClass) -> bool {
    matches!(
        class,
        ScriptClass::Hiragana | ScriptClass::Katakana | ScriptClass::Han
    )
}

/// Brute-force reference segmenter: per-character classification, label
/// propagation for neutral attachment, run grouping, then a fixpoint
/// coalescing loop for Kana/Han adjacency.
fn oracle_segments(text: &str) -> Vec<(String, ScriptClass)> {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return Vec::new();
    }
    let mut labels: Vec<ScriptClass> = chars.iter().map(|&c| classify_char(c)).collect();

    // Attach neutrals to the class on their left, cascading.
    for i in 1..labels.len() {
        if is_neutral(labels[i]) && !is_neutral(labels[i - 1]) {
            labels[i] = labels[i - 1];
        }
    }
    // Leading neutrals attach forward.
    match labels.iter().position(|&c| !is_neutral(c)) {
        Some(first) => {
            for i in 0..first {
                labels[i] = labels[first];
            }
        }
        None => return vec![(text.to_string(), ScriptClass::Common)],
    }

    // Group runs of equal labels.
    let mut groups: Vec<(usize, usize, ScriptClass)> = Vec::new();
    let mut start = 0;
    for i in 1..=labels.len() {
        if i == labels.len() || labels[i] != labels[start] {
            groups.push((start, i, labels[start]));
            start = i;
        }
    }

    // Coalesce Kana/Han neighborhoods until stable.
    loop {
        let mut changed = false;
        let mut merged: Vec<(usize, usize, ScriptClass)> = Vec::new();
        for group in groups {
            match merged.last_mut() {
                Some(last) if in_kana_group(last.2) && in_kana_group(group.2) => {
                    last.1 = group.1;
                    if last.2 == ScriptClass::Han && group.2 != ScriptClass::Han {
                        last.2 = group.2;
                    }
                    changed = true;
                }
                _ => merged.push(group),
            }
        }
        groups = merged;
        if !changed {
            break;
        }
    }

    groups
        .into_iter()
        .map(|(s, e, class)| (chars[s..e].iter().collect(), class))
        .collect()
}

fn random_corpus(count: usize) -> Vec<String> {
    let pools: Vec<Vec<char>> = vec![
        ('a'..='z').collect(),
        ('\u{0905}'..='\u{0939}').collect(),          // Devanagari
        ('\u{0C85}'..='\u{0CB0}').collect(),          // Kannada
        ('\u{0C05}'..='\u{0C39}').collect(),          // Telugu
        ('\u{0985}'..='\u{09A8}').collect(),          // Bengali
        ('\u{0A85}'..='\u{0AB0}').collect(),          // Gujarati
        ('\u{4E00}'..='\u{4E80}').collect(),          // Han
        ('\u{3041}'..='\u{3090}').collect(),          // Hiragana
        ('\u{30A1}'..='\u{30E0}').collect(),          // Katakana
        ('\u{0627}'..='\u{064A}').collect(),          // Arabic
        ('\u{0410}'..='\u{044F}').collect(),          // Cyrillic
        ('\u{0391}'..='\u{03C9}').collect(),          // Greek
        ('\u{AC00}'..='\u{AC60}').collect(),          // Hangul
        ('\u{0E01}'..='\u{0E2E}').collect(),          // Thai
        ('\u{05D0}'..='\u{05EA}').collect(),          // Hebrew
    ];
    let neutrals: Vec<char> = vec![
        ' ', ' ', '.', ',', '!', '?', ':', ';', '0', '7', '(', ')', '"', '\'', '\u{0964}',
        '\u{3002}', '\u{0301}', '\u{200D}', '\u{2014}', '·',
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut corpus = Vec::with_capacity(count);
    for _ in 0..count {
        let script_count = rng.random_range(3..=6);
        let mut text = String::new();
        let run_count = rng.random_range(script_count..script_count + 6);
        for _ in 0..run_count {
            let pool = pools[..script_count].choose(&mut rng).unwrap();
            let run_len = rng.random_range(1..=8);
            for _ in 0..run_len {
                text.push(*pool.choose(&mut rng).unwrap());
            }
            let neutral_len = rng.random_range(0..=3);
            for _ in 0..neutral_len {
                text.push(*neutrals.choose(&mut rng).unwrap());
            }
        }
        corpus.push(text);
    }
    corpus
}

#[test]
fn acceptance_05_segmentation_oracle_equivalence() {
    let corpus = random_corpus(10_000);
    let started = Instant::now();
    for text in &corpus {
        let got: Vec<(String, ScriptClass)> = split_by_script(text)
            .into_iter()
            .map(|s| (s.text, s.script))
            .collect();
        let want = oracle_segments(text);
        assert_eq!(got, want, "input {text:?}");
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "10k comparisons took {elapsed:?}"
    );
    pass("5 (10,000 mixed-script strings agree with the brute-force oracle)");
}

#[test]
fn acceptance_06_lossless_round_trip() {
    for text in random_corpus(10_000) {
        let joined: String = split_by_script(&text)
            .into_iter()
            .map(|s| s.text)
            .collect();
        assert_eq!(joined, text);
    }
    pass("6 (join(segments) == input on the same corpus)");
}

// --- 7. SSML validity on randomized plans -----------------------------------

fn random_plans(count: usize) -> Vec<VoicePlan> {
    let locales = ["en-US", "es-ES", "fr-FR", "de-DE", "hi-IN", "zh-CN", "ja-JP"];
    let langs = ["en", "es", "fr", "de", "hi", "zh", "ja"];
    let text_pool: Vec<char> = "abcdefghijklmnopqrstuvwxyz \
                                ABCDEFGHIJKLMNOPQRSTUVWXYZ \
                                0123456789 &<>\"'.,!?()- \
                                äöüéàñç 我来自美国 こんにちは नमस्ते"
        .chars()
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);

    (0..count)
        .map(|_| {
            let entry_count = rng.random_range(1..=6);
            let entries: Vec<VoicePlanEntry> = (0..entry_count)
                .map(|i| {
                    let which = rng.random_range(0..langs.len());
                    let text_len = rng.random_range(1..=80);
                    let text: String = (0..text_len)
                        .map(|_| *text_pool.choose(&mut rng).unwrap())
                        .collect();
                    let voice_n = rng.random_range(0..4);
                    VoicePlanEntry {
                        segment: TaggedSegment {
                            segment: RawSegment {
                                text,
                                script: ScriptClass::Latin,
                                span: Span::new(0, text_len),
                            },
                            lang: LangCode::new(langs[which]).unwrap(),
                        },
                        locale: Locale::new(locales[which]).unwrap(),
                        voice: Voice {
                            id: format!("voice-{voice_n}"),
                            locale: Locale::new(locales[which]).unwrap(),
                            gender: Gender::Neutral,
                            family: "test".to_string(),
                            engine: "mock".to_string(),
                        },
                        lang_span: rng.random_bool(0.3),
                        prosody: Prosody {
                            rate_pct: rng.random_range(-50..=50),
                            pitch_pct: rng.random_range(-50..=50),
                            emphasis: *[Emphasis::None, Emphasis::Moderate, Emphasis::Strong]
                                .choose(&mut rng)
                                .unwrap(),
                        },
                        pause_before_ms: if i == 0 {
                            0
                        } else {
                            *[0u32, 50, 189, 703].choose(&mut rng).unwrap()
                        },
                    }
                })
                .collect();
            VoicePlan {
                entries,
                primary_locale: Locale::new("en-US").unwrap(),
                primary_voice: Voice {
                    id: "voice-0".to_string(),
                    locale: Locale::new("en-US").unwrap(),
                    gender: Gender::Neutral,
                    family: "test".to_string(),
                    engine: "mock".to_string(),
                },
                mode: polyvox::planner::VoiceMode::MultiVoice,
            }
        })
        .collect()
}

#[test]
fn acceptance_07_ssml_validity_on_random_plans() {
    let dialect = SsmlDialect::by_name("azure").unwrap();
    for plan in random_plans(1_000) {
        let doc = build_ssml(&plan, &dialect).unwrap();
        let findings = validate(&doc);
        assert!(findings.is_empty(), "findings {findings:?} for {}", doc.body);
        let expected: String = plan.entries.iter().map(|e| e.text()).collect();
        assert_eq!(roxmltree_strip(&doc.body), expected, "body {}", doc.body);
    }
    pass("7 (1,000 randomized plans validate clean and round-trip their text)");
}

/// Tag-strip oracle through an independent XML parser (unescapes entities).
fn roxmltree_strip(body: &str) -> String {
    let doc = roxmltree::Document::parse(body).expect("validated body parses");
    doc.descendants()
        .filter_map(|n| if n.is_text() { n.text() } else { None })
        .collect()
}

// --- 8. duration law ---------------------------------------------------------

#[test]
fn acceptance_08_duration_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    for _ in 0..500 {
        let clip_count = rng.random_range(1..=8);
        let clips: Vec<AudioClip> = (0..clip_count)
            .map(|_| AudioClip::canonical(vec![999; rng.random_range(0..40_000)]))
            .collect();
        let mut pauses: Vec<u32> = (0..clip_count).map(|_| rng.random_range(0..1000)).collect();
        pauses[0] = 0;
        let joined = concat_with_pauses(&clips, &pauses).unwrap();
        let expected: usize = clips.iter().map(|c| c.samples.len()).sum::<usize>()
            + pauses.iter().map(|&p| p as usize * 16).sum::<usize>();
        assert_eq!(joined.samples.len(), expected);
    }
    pass("8 (output samples == clip samples + pause samples, exactly)");
}

// --- 9. threshold rule ---------------------------------------------------------

#[test]
fn acceptance_09_threshold_rule() {
    let catalog = VoiceCatalog::demo();
    let regions = RegionMap::bundled();
    let foreign_langs = ["es", "fr", "de", "hi", "zh"];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);

    for threshold in [0usize, 1, 3, 5] {
        let prefs = UserPrefs {
            switch_threshold_words: threshold,
            max_voices: 99,
            ..UserPrefs::default()
        };
        for _ in 0..250 {
            // A long English anchor plus 1..4 foreign spans of 1..8 words.
            // Long enough to out-weigh any combination of foreign spans, so
            // English always anchors the plan.
            let mut segments = vec![TaggedSegment {
                segment: RawSegment {
                    text: "an english anchor segment that is very long and clearly dominant "
                        .repeat(8),
                    script: ScriptClass::Latin,
                    span: Span::new(0, 1),
                },
                lang: LangCode::new("en").unwrap(),
            }];
            for _ in 0..rng.random_range(1..=4) {
                let lang = *foreign_langs.choose(&mut rng).unwrap();
                let words = rng.random_range(1..=8);
                let text = vec!["palabra"; words].join(" ");
                segments.push(TaggedSegment {
                    segment: RawSegment {
                        text,
                        script: ScriptClass::Latin,
                        span: Span::new(0, 1),
                    },
                    lang: LangCode::new(lang).unwrap(),
                });
            }
            let plan = build_voice_plan(&segments, &catalog, &prefs, &regions).unwrap();
            let anchor_id = plan.primary_voice.id.clone();
            for entry in plan.entries.iter().skip(1) {
                let words = entry.word_count();
                if words <= threshold {
                    assert_eq!(
                        entry.voice.id, anchor_id,
                        "span of {words} words must stay on the anchor at threshold {threshold}"
                    );
                    assert!(entry.lang_span);
                } else {
                    assert_ne!(
                        entry.voice.id, anchor_id,
                        "span of {words} words must switch voices at threshold {threshold}"
                    );
                }
            }
        }
    }
    pass("9 (spans <= threshold never switch voice; longer spans always do)");
}

// --- 10. cache ---------------------------------------------------------

#[test]
fn acceptance_10_cache_short_circuits_reruns() {
    let pipeline = Pipeline::with_defaults();
    let engine = MockEngine::new();
    let cache = SynthCache::new();
    let text = "I'm from the United States. 我来自美国。";
    let prefs = UserPrefs::default();

    let first = run_defaults(&pipeline, text, &prefs, &engine, &cache);
    let calls_after_first = engine.call_count();
    assert!(calls_after_first > 0);

    let second = run_defaults(&pipeline, text, &prefs, &engine, &cache);
    assert_eq!(
        engine.call_count(),
        calls_after_first,
        "second run must perform zero engine calls"
    );
    assert_eq!(first.audio, second.audio);
    assert_eq!(encode_wav(&first.audio), encode_wav(&second.audio));
    pass("10 (identical request re-runs with zero engine calls, bit-identical)");
}

// --- 11. prosody mapping ---------------------------------------------------------

#[test]
fn acceptance_11_prosody_mapping_matches_rule_table() {
    let oracle = |category: SentimentCategory, intensity: f64| -> (i32, i32, Emphasis) {
        let (rate_c, pitch_c, emphasis) = match category {
            SentimentCategory::Exclamatory => (10.0, 8.0, Emphasis::Moderate),
            SentimentCategory::Interrogative => (0.0, 6.0, Emphasis::None),
            SentimentCategory::Positive => (5.0, 4.0, Emphasis::None),
            SentimentCategory::Negative => (-5.0, -4.0, Emphasis::None),
            SentimentCategory::Neutral => (0.0, 0.0, Emphasis::None),
        };
        (
            ((rate_c * intensity).round() as i32).clamp(-50, 50),
            ((pitch_c * intensity).round() as i32).clamp(-50, 50),
            emphasis,
        )
    };

    for category in SentimentCategory::ALL {
        for intensity in [0.0, 0.5, 1.0] {
            let got = adjust_prosody(
                Sentiment {
                    category,
                    intensity,
                },
                Sentiment::NEUTRAL,
            );
            let (rate, pitch, emphasis) = oracle(category, intensity);
            assert_eq!(got.rate_pct, rate, "{category} rate at {intensity}");
            assert_eq!(got.pitch_pct, pitch, "{category} pitch at {intensity}");
            assert_eq!(got.emphasis, emphasis, "{category} emphasis at {intensity}");
        }
    }
    pass("11 (adjust_prosody equals the rule-table oracle, 5 categories x 3 intensities)");
}

// --- 12. mock pitch plumbing ---------------------------------------------------------

#[test]
fn acceptance_12_mock_pitch_plumbing() {
    let catalog = VoiceCatalog::demo();
    let regions = RegionMap::bundled();
    let prefs = UserPrefs::default();
    let segments = vec![TaggedSegment {
        segment: RawSegment {
            text: "a twenty five character x".to_string(), // 2.0 s tone
            script: ScriptClass::Latin,
            span: Span::new(0, 25),
        },
        lang: LangCode::new("en").unwrap(),
    }];
    let base_plan = build_voice_plan(&segments, &catalog, &prefs, &regions).unwrap();
    let voice_id = base_plan.entries[0].voice.id.clone();
    let base_hz = voice_base_frequency(&voice_id);

    for pitch_pct in [-20i32, 0, 20] {
        let mut plan = base_plan.clone();
        plan.entries[0].prosody = Prosody {
            rate_pct: 0,
            pitch_pct,
            emphasis: Emphasis::None,
        };
        let engine = MockEngine::new();
        let out = polyvox::synth::synthesize_plan(
            &plan,
            &engine,
            &SynthCache::new(),
            &SsmlDialect::generic(),
            false,
        )
        .unwrap();
        let measured = estimate_f0(&out.audio, 0.0, out.audio.duration_s()).unwrap();
        let expected = base_hz * (1.0 + pitch_pct as f64 / 100.0);
        assert!(
            (measured - expected).abs() <= 2.0,
            "pitch {pitch_pct}%: measured {measured} Hz, expected {expected} Hz"
        );
    }
    pass("12 (pitch offsets of -20/0/+20% shift the mock fundamental within 2 Hz)");
}
