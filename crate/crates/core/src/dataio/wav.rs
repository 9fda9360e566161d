use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

const FULL_SCALE: f64 = 32768.0;

fn wav_error(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::io(path, e),
        other => Error::Wav(format!("{}: {other}", path.display())),
    }
}

/// Reads a mono 16-bit PCM WAV file; samples are scaled by 1/32768.
pub fn read_wav(path: impl AsRef<Path>) -> Result<(Vec<f64>, u32)> {
    let path = path.as_ref();
    let reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::Wav(format!(
            "{}: expected 16-bit integer PCM, found {:?} with {} bits per sample",
            path.display(),
            spec.sample_format,
            spec.bits_per_sample
        )));
    }
    if spec.channels != 1 {
        return Err(Error::Wav(format!(
            "{}: expected mono, found {} channels",
            path.display(),
            spec.channels
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / FULL_SCALE))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| wav_error(path, e))?;
    Ok((samples, spec.sample_rate))
}

/// Quantizes to PCM16 with rounding and saturation.
pub fn quantize(sample: f64) -> i16 {
    (sample * FULL_SCALE).round().clamp(-FULL_SCALE, FULL_SCALE - 1.0) as i16
}

pub fn write_wav(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for &s in samples {
        writer.write_sample(quantize(s)).map_err(|e| wav_error(path, e))?;
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_file_reads_as_zeros() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.wav");
        write_wav(&path, &[0.0; 64], 8000).unwrap();
        let (samples, rate) = read_wav(&path).unwrap();
        assert_eq!(rate, 8000);
        assert_eq!(samples, vec![0.0; 64]);
    }

    #[test]
    fn full_scale_square_wave() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sq.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 16000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        for k in 0..10 {
            w.write_sample(if k % 2 == 0 { i16::MAX } else { i16::MIN }).unwrap();
        }
        w.finalize().unwrap();
        let (samples, _) = read_wav(&path).unwrap();
        assert_eq!(samples[0], 32767.0 / 32768.0);
        assert_eq!(samples[1], -1.0);
    }

    #[test]
    fn write_saturates() {
        assert_eq!(quantize(2.0), i16::MAX);
        assert_eq!(quantize(-2.0), i16::MIN);
        assert_eq!(quantize(1.0), i16::MAX);
    }

    #[test]
    fn round_trip_keeps_data_chunk_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.wav");
        let b = dir.path().join("b.wav");
        let samples: Vec<f64> = (0..5000).map(|i| ((i as f64) * 0.013).sin() * 0.9).collect();
        write_wav(&a, &samples, 16000).unwrap();
        let (read, rate) = read_wav(&a).unwrap();
        write_wav(&b, &read, rate).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn rejects_stereo_and_float() {
        let dir = tempfile::tempdir().unwrap();
        let stereo = dir.path().join("s.wav");
        let spec = WavSpec {
            channels: 2,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        };
        let mut w = WavWriter::create(&stereo, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        let err = read_wav(&stereo).unwrap_err().to_string();
        assert!(err.contains("mono"), "{err}");

        let float = dir.path().join("f.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        };
        let mut w = WavWriter::create(&float, spec).unwrap();
        w.write_sample(0.5f32).unwrap();
        w.finalize().unwrap();
        assert!(read_wav(&float).unwrap_err().to_string().contains("16-bit"));
        assert!(read_wav(dir.path().join("nope.wav")).unwrap_err().is_io());
    }
}
