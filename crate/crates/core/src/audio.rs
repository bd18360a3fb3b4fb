//! PCM audio clips, canonical-form conversion, assembly, and offline metrics.
//!
//! Canonical form is 16 kHz mono signed 16-bit PCM. Resampling is linear
//! interpolation; normalization is peak normalization to -1 dBFS (0.891 of
//! full scale). Pause measurement and zero-crossing F0 estimation support the
//! objective checks that run without any external engine.

use std::io::Cursor;

use thiserror::Error;

/// Canonical sample rate in Hz.
pub const CANONICAL_SAMPLE_RATE: u32 = 16_000;
/// Peak-normalization target as a fraction of full scale (-1 dBFS).
pub const NORMALIZE_TARGET_FS: f64 = 0.891;
/// Amplitude floor, as a fraction of full scale, below which a whole analysis
/// window counts as silent.
const SILENCE_EPSILON_FS: f64 = 0.001;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("invalid audio: {0}")]
    InvalidAudio(String),
    #[error("clip {index} is not canonical 16 kHz mono")]
    NonCanonicalInput { index: usize },
    #[error("pause schedule has {pauses} entries for {clips} clips")]
    ScheduleMismatch { clips: usize, pauses: usize },
    #[error("analysis window contains only silence")]
    SilentWindow,
    #[error("analysis window lies outside the clip")]
    WindowOutOfBounds,
    #[error("WAV decode failed: {0}")]
    WavDecode(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedWav(String),
}

/// Interleaved signed 16-bit PCM samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioClip {
    pub sample_rate: u32,
    pub channels: u16,
    pub samples: Vec<i16>,
}

impl AudioClip {
    pub fn new(sample_rate: u32, channels: u16, samples: Vec<i16>) -> Self {
        AudioClip {
            sample_rate,
            channels,
            samples,
        }
    }

    /// A canonical 16 kHz mono clip.
    pub fn canonical(samples: Vec<i16>) -> Self {
        AudioClip::new(CANONICAL_SAMPLE_RATE, 1, samples)
    }

    /// Canonical silence of the given duration.
    pub fn silence_ms(ms: u32) -> Self {
        let n = ms as usize * CANONICAL_SAMPLE_RATE as usize / 1000;
        AudioClip::canonical(vec![0; n])
    }

    pub fn is_canonical(&self) -> bool {
        self.sample_rate == CANONICAL_SAMPLE_RATE && self.channels == 1
    }

    /// Duration in seconds: frame count over sample rate.
    pub fn duration_s(&self) -> f64 {
        if self.sample_rate == 0 || self.channels == 0 {
            return 0.0;
        }
        (self.samples.len() / self.channels as usize) as f64 / self.sample_rate as f64
    }
}

/// A detected silent gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pause {
    pub start_s: f64,
    pub duration_s: f64,
}

/// Converts any PCM clip to canonical 16 kHz mono.
///
/// Channels average into mono; rate conversion is linear interpolation, so
/// duration is preserved within one output sample period. Canonical input is
/// returned sample-exact.
pub fn resample_to_canonical(clip: &AudioClip) -> Result<AudioClip, AudioError> {
    if clip.samples.is_empty() {
        return Err(AudioError::InvalidAudio("empty clip".to_string()));
    }
    if clip.sample_rate == 0 {
        return Err(AudioError::InvalidAudio("zero sample rate".to_string()));
    }
    if clip.channels == 0 {
        return Err(AudioError::InvalidAudio("zero channels".to_string()));
    }
    if !clip.samples.len().is_multiple_of(clip.channels as usize) {
        return Err(AudioError::InvalidAudio(
            "sample count is not a multiple of the channel count".to_string(),
        ));
    }
    if clip.is_canonical() {
        return Ok(clip.clone());
    }

    let channels = clip.channels as usize;
    let mono: Vec<i16> = if channels == 1 {
        clip.samples.clone()
    } else {
        clip.samples
            .chunks_exact(channels)
            .map(|frame| {
                let sum: i64 = frame.iter().map(|&s| s as i64).sum();
                (sum as f64 / channels as f64).round() as i16
            })
            .collect()
    };

    if clip.sample_rate == CANONICAL_SAMPLE_RATE {
        return Ok(AudioClip::canonical(mono));
    }

    let n_in = mono.len() as u64;
    let n_out = ((n_in * CANONICAL_SAMPLE_RATE as u64 + clip.sample_rate as u64 / 2)
        / clip.sample_rate as u64) as usize;
    let ratio = clip.sample_rate as f64 / CANONICAL_SAMPLE_RATE as f64;
    let mut out = Vec::with_capacity(n_out);
    for i in 0..n_out {
        let pos = i as f64 * ratio;
        let i0 = pos.floor() as usize;
        let i0 = i0.min(mono.len() - 1);
        let i1 = (i0 + 1).min(mono.len() - 1);
        let frac = pos - i0 as f64;
        let value = mono[i0] as f64 * (1.0 - frac) + mono[i1] as f64 * frac;
        out.push(value.round() as i16);
    }
    Ok(AudioClip::canonical(out))
}

/// Joins canonical clips with silence before each one.
///
/// `pauses_ms[i]` precedes clip `i`; the schedule is expected to start at 0.
/// Output length is exactly the sample sum plus pause samples.
pub fn concat_with_pauses(clips: &[AudioClip], pauses_ms: &[u32]) -> Result<AudioClip, AudioError> {
    if clips.len() != pauses_ms.len() {
        return Err(AudioError::ScheduleMismatch {
            clips: clips.len(),
            pauses: pauses_ms.len(),
        });
    }
    for (index, clip) in clips.iter().enumerate() {
        if !clip.is_canonical() {
            return Err(AudioError::NonCanonicalInput { index });
        }
    }
    let pause_samples: usize = pauses_ms
        .iter()
        .map(|&ms| ms as usize * CANONICAL_SAMPLE_RATE as usize / 1000)
        .sum();
    let total: usize = clips.iter().map(|c| c.samples.len()).sum::<usize>() + pause_samples;
    let mut samples = Vec::with_capacity(total);
    for (clip, &pause) in clips.iter().zip(pauses_ms) {
        let n = pause as usize * CANONICAL_SAMPLE_RATE as usize / 1000;
        samples.extend(std::iter::repeat_n(0i16, n));
        samples.extend_from_slice(&clip.samples);
    }
    Ok(AudioClip::canonical(samples))
}

/// Peak-normalizes to -1 dBFS. Silence passes through unchanged; scaling is
/// linear so no clipping is introduced.
pub fn normalize_audio(clip: &AudioClip) -> AudioClip {
    let peak = clip
        .samples
        .iter()
        .map(|&s| (s as i32).abs())
        .max()
        .unwrap_or(0);
    if peak == 0 {
        return clip.clone();
    }
    let target = NORMALIZE_TARGET_FS * i16::MAX as f64;
    let scale = target / peak as f64;
    let samples = clip
        .samples
        .iter()
        .map(|&s| {
            (s as f64 * scale)
                .round()
                .clamp(i16::MIN as f64, i16::MAX as f64) as i16
        })
        .collect();
    AudioClip {
        sample_rate: clip.sample_rate,
        channels: clip.channels,
        samples,
    }
}

/// Zero-crossing F0 estimate over `[start_s, end_s)`: crossings / (2 * window
/// seconds). Accurate to about 2 Hz on pure tones with windows near a second.
pub fn estimate_f0(clip: &AudioClip, start_s: f64, end_s: f64) -> Result<f64, AudioError> {
    if clip.channels != 1 {
        return Err(AudioError::InvalidAudio("expected mono input".to_string()));
    }
    let rate = clip.sample_rate as f64;
    let i0 = (start_s * rate).round() as i64;
    let i1 = (end_s * rate).round() as i64;
    if i0 < 0 || i1 <= i0 || i1 as usize > clip.samples.len() {
        return Err(AudioError::WindowOutOfBounds);
    }
    let window = &clip.samples[i0 as usize..i1 as usize];
    let eps = (SILENCE_EPSILON_FS * i16::MAX as f64) as i32;
    if window.iter().all(|&s| (s as i32).abs() < eps) {
        return Err(AudioError::SilentWindow);
    }

    let mut crossings = 0u64;
    let mut last_positive: Option<bool> = None;
    for &s in window {
        if s == 0 {
            continue;
        }
        let positive = s > 0;
        if let Some(last) = last_positive {
            if last != positive {
                crossings += 1;
            }
        }
        last_positive = Some(positive);
    }
    let window_s = window.len() as f64 / rate;
    Ok(crossings as f64 / (2.0 * window_s))
}

/// Finds maximal interior silent runs of at least `min_pause_ms`.
///
/// A sample is silent when |s| is below `amplitude_epsilon` (fraction of full
/// scale). Leading and trailing silence is excluded; results are sorted by
/// start time.
pub fn measure_pauses(
    clip: &AudioClip,
    amplitude_epsilon: f64,
    min_pause_ms: u32,
) -> Vec<Pause> {
    let rate = clip.sample_rate as f64;
    let threshold = amplitude_epsilon * i16::MAX as f64;
    let min_len = (min_pause_ms as f64 / 1000.0 * rate).round() as usize;
    let silent: Vec<bool> = clip
        .samples
        .iter()
        .map(|&s| (s as f64).abs() < threshold)
        .collect();

    let mut pauses = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..=silent.len() {
        let is_silent = i < silent.len() && silent[i];
        match (run_start, is_silent) {
            (None, true) => run_start = Some(i),
            (Some(start), false) => {
                let len = i - start;
                let interior = start > 0 && i < silent.len();
                if interior && len >= min_len.max(1) {
                    pauses.push(Pause {
                        start_s: start as f64 / rate,
                        duration_s: len as f64 / rate,
                    });
                }
                run_start = None;
            }
            _ => {}
        }
    }
    pauses
}

/// Encodes a clip as RIFF/WAVE, PCM format 1, 16-bit little-endian.
///
/// For canonical clips the header fields are fixed: fmt chunk size 16, block
/// align 2, byte rate 32000.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let spec = hound::WavSpec {
        channels: clip.channels,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer =
            hound::WavWriter::new(&mut cursor, spec).expect("in-memory WAV writer cannot fail");
        for &s in &clip.samples {
            writer.write_sample(s).expect("in-memory write cannot fail");
        }
        writer.finalize().expect("in-memory finalize cannot fail");
    }
    cursor.into_inner()
}

/// Decodes a 16-bit integer PCM WAV of any rate/channel layout.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip, AudioError> {
    let reader = hound::WavReader::new(Cursor::new(bytes))
        .map_err(|e| AudioError::WavDecode(e.to_string()))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(AudioError::UnsupportedWav(format!(
            "{}-bit {:?}",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples: Result<Vec<i16>, _> = reader.into_samples::<i16>().collect();
    let samples = samples.map_err(|e| AudioError::WavDecode(e.to_string()))?;
    Ok(AudioClip::new(spec.sample_rate, spec.channels, samples))
}

/// Deterministic test tone at the canonical rate, amplitude as a fraction of
/// full scale.
pub fn sine_clip(frequency_hz: f64, duration_s: f64, amplitude_fs: f64) -> AudioClip {
    let n = (duration_s * CANONICAL_SAMPLE_RATE as f64).round() as usize;
    let amp = amplitude_fs * i16::MAX as f64;
    let samples = (0..n)
        .map(|i| {
            let phase =
                2.0 * std::f64::consts::PI * frequency_hz * i as f64 / CANONICAL_SAMPLE_RATE as f64;
            (amp * phase.sin()).round() as i16
        })
        .collect();
    AudioClip::canonical(samples)
}
