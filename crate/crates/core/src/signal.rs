//! Waveform container and 16-bit PCM WAV I/O.

use std::io::ErrorKind;
use std::path::Path;

use crate::error::{Error, Result};

pub const MIN_SAMPLE_RATE: u32 = 8000;

/// Scale applied to 16-bit integer samples.
const PCM16_SCALE: f64 = 1.0 / 32768.0;

/// A mono signal with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate < MIN_SAMPLE_RATE {
            return Err(Error::InvalidParameter(format!(
                "sample rate {sample_rate} Hz is below {MIN_SAMPLE_RATE} Hz"
            )));
        }
        if samples.is_empty() {
            return Err(Error::TooShort("waveform has no samples".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Removes `head_s` seconds from the start and `tail_s` from the end.
    ///
    /// The number of dropped samples is `round((head_s + tail_s) * fs)`, with
    /// the head part rounded on its own.
    pub fn trim_edges(&self, head_s: f64, tail_s: f64) -> Result<Waveform> {
        if !(head_s >= 0.0 && tail_s >= 0.0) || !head_s.is_finite() || !tail_s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "trim amounts must be non-negative, got head {head_s} s, tail {tail_s} s"
            )));
        }
        let fs = self.sample_rate as f64;
        let total = ((head_s + tail_s) * fs).round() as usize;
        let head = ((head_s * fs).round() as usize).min(total);
        if total >= self.samples.len() {
            return Err(Error::TooShort(format!(
                "trimming {:.3} s from a {:.3} s recording leaves nothing",
                head_s + tail_s,
                self.duration_s()
            )));
        }
        let keep = self.samples.len() - total;
        Ok(Waveform {
            samples: self.samples[head..head + keep].to_vec(),
            sample_rate: self.sample_rate,
        })
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f64) -> Waveform {
        Waveform {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Reads a RIFF/WAVE file holding 16-bit integer PCM. Multi-channel input is
/// averaged down to mono.
pub fn load_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let reader = match hound::WavReader::open(path) {
        Ok(r) => r,
        Err(e) => return Err(map_hound_error(path, e)),
    };
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::UnsupportedEncoding(
            "floating-point samples; expected 16-bit integer PCM".into(),
        ));
    }
    if spec.bits_per_sample != 16 {
        return Err(Error::UnsupportedEncoding(format!(
            "{} bits per sample; expected 16",
            spec.bits_per_sample
        )));
    }
    if spec.channels == 0 {
        return Err(Error::CorruptWav("zero channels".into()));
    }
    let channels = spec.channels as usize;
    let declared = reader.len() as usize;
    let mut raw = Vec::with_capacity(declared);
    for s in reader.into_samples::<i16>() {
        raw.push(s.map_err(|e| map_hound_error(path, e))?);
    }
    if raw.len() < declared || raw.len() % channels != 0 {
        return Err(Error::CorruptWav(format!(
            "data chunk holds {} samples, header declares {declared}",
            raw.len()
        )));
    }
    let samples: Vec<f64> = if channels == 1 {
        raw.iter().map(|&s| s as f64 * PCM16_SCALE).collect()
    } else {
        raw.chunks_exact(channels)
            .map(|frame| {
                let sum: f64 = frame.iter().map(|&s| s as f64).sum();
                sum / channels as f64 * PCM16_SCALE
            })
            .collect()
    };
    Waveform::new(samples, spec.sample_rate)
}

/// Writes a mono 16-bit PCM WAV. Samples are clipped to the integer range.
pub fn write_wav(path: impl AsRef<Path>, w: &Waveform) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: w.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path.as_ref(), spec)
        .map_err(|e| map_hound_error(path.as_ref(), e))?;
    for &s in &w.samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer
            .write_sample(v)
            .map_err(|e| map_hound_error(path.as_ref(), e))?;
    }
    writer
        .finalize()
        .map_err(|e| map_hound_error(path.as_ref(), e))
}

fn map_hound_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) if io.kind() == ErrorKind::NotFound => {
            Error::FileNotFound(path.to_path_buf())
        }
        // hound reports short reads as `Other` ("Failed to read enough bytes")
        hound::Error::IoError(io)
            if matches!(io.kind(), ErrorKind::UnexpectedEof | ErrorKind::Other) =>
        {
            Error::CorruptWav(format!("unexpected end of file ({io})"))
        }
        hound::Error::IoError(io) => Error::Io(io),
        hound::Error::Unsupported => {
            Error::UnsupportedEncoding("non-PCM or unsupported format tag".into())
        }
        hound::Error::FormatError(msg) => Error::CorruptWav(msg.to_string()),
        hound::Error::TooWide => Error::UnsupportedEncoding("sample width too large".into()),
        hound::Error::UnfinishedSample => Error::CorruptWav("unfinished sample".into()),
        hound::Error::InvalidSampleFormat => {
            Error::UnsupportedEncoding("sample format does not match 16-bit PCM".into())
        }
    }
}
