//! Bit-stable sample serialization: CSV point lists, JSON records with
//! provenance metadata, and deterministic SVG scatter plots.
//!
//! Floats are written in the shortest decimal form that round-trips, so
//! writing and re-reading a file recovers every coordinate bit for bit and
//! identical runs produce byte-identical files.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{GinibreSample, SampleMeta, SamplerMode};

/// Renders points as CSV with a `re,im` header, one point per line.
pub fn points_to_csv(points: &[Complex64]) -> String {
    let mut out = String::with_capacity(16 + 32 * points.len());
    out.push_str("re,im\n");
    for z in points {
        out.push_str(&format!("{},{}\n", z.re, z.im));
    }
    out
}

fn parse_finite(field: &str, line: usize) -> Result<f64> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: not a number: {field:?}")))?;
    if !value.is_finite() {
        return Err(Error::Parse(format!(
            "line {line}: non-finite coordinate {value}"
        )));
    }
    Ok(value)
}

/// Parses CSV produced by [`points_to_csv`]; strict about the header.
pub fn points_from_csv(text: &str) -> Result<Vec<Complex64>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == "re,im" => {}
        Some((_, header)) => {
            return Err(Error::Parse(format!(
                "expected header \"re,im\", found {header:?}"
            )))
        }
        None => return Err(Error::Parse("empty CSV input".into())),
    }
    let mut points = Vec::new();
    for (index, line) in lines {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let (re, im) = line.split_once(',').ok_or_else(|| {
            Error::Parse(format!("line {}: expected two comma-separated fields", index + 1))
        })?;
        points.push(Complex64::new(
            parse_finite(re, index + 1)?,
            parse_finite(im, index + 1)?,
        ));
    }
    Ok(points)
}

/// Variant flags recorded alongside a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub palm: bool,
    pub thinning: f64,
    pub dilation: f64,
}

/// Self-describing JSON form of one sample: provenance plus points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub radius: f64,
    pub margin: f64,
    pub seed: u64,
    pub stream: u64,
    pub mode: String,
    pub n_points: usize,
    pub tool_version: String,
    pub variant: VariantRecord,
    pub points: Vec<[f64; 2]>,
}

impl SampleRecord {
    pub fn from_sample(sample: &GinibreSample) -> Self {
        let meta = &sample.meta;
        SampleRecord {
            radius: meta.radius,
            margin: meta.margin,
            seed: meta.seed,
            stream: meta.stream,
            mode: meta.mode.as_str().to_string(),
            n_points: meta.n_points,
            tool_version: meta.tool_version.clone(),
            variant: VariantRecord {
                palm: meta.palm,
                thinning: meta.thinning,
                dilation: meta.dilation,
            },
            points: sample.points.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn points(&self) -> Result<Vec<Complex64>> {
        let points: Vec<Complex64> = self
            .points
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        for (i, z) in points.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Parse(format!("point {i} is non-finite")));
            }
        }
        Ok(points)
    }

    pub fn meta(&self) -> Result<SampleMeta> {
        Ok(SampleMeta {
            radius: self.radius,
            margin: self.margin,
            seed: self.seed,
            stream: self.stream,
            mode: self.mode.parse::<SamplerMode>()?,
            n_points: self.n_points,
            tool_version: self.tool_version.clone(),
            palm: self.variant.palm,
            thinning: self.variant.thinning,
            dilation: self.variant.dilation,
        })
    }
}

/// Renders one sample as pretty-printed JSON with a trailing newline.
pub fn sample_to_json(sample: &GinibreSample) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&SampleRecord::from_sample(sample))?;
    text.push('\n');
    Ok(text)
}

pub fn record_from_json(text: &str) -> Result<SampleRecord> {
    let record: SampleRecord = serde_json::from_str(text)?;
    if record.n_points != record.points.len() {
        return Err(Error::Parse(format!(
            "n_points says {} but the record holds {} points",
            record.n_points,
            record.points.len()
        )));
    }
    Ok(record)
}

/// Side length of the emitted SVG viewport in user units.
const SVG_SIZE: f64 = 640.0;

/// Renders a deterministic SVG scatter: disc outline plus one dot per
/// point, in input order, mathematical orientation (y up).
pub fn svg_scatter(points: &[Complex64], radius: f64) -> Result<String> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "plot radius must be positive and finite, got {radius}"
        )));
    }
    let pad = 1.06 * radius;
    let dot = radius / 120.0;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\" \
         viewBox=\"{} {} {} {}\">\n",
        -pad,
        -pad,
        2.0 * pad,
        2.0 * pad
    ));
    out.push_str(&format!(
        "  <circle cx=\"0\" cy=\"0\" r=\"{radius}\" fill=\"none\" stroke=\"#555555\" \
         stroke-width=\"{}\"/>\n",
        radius / 240.0
    ));
    for z in points {
        out.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"{dot}\" fill=\"#1f6feb\"/>\n",
            z.re, -z.im
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{RingBasis, SpectrumParams};
    use crate::rng::SampleStream;
    use crate::sampler::{sample_with_basis, SamplerOptions};

    #[test]
    fn csv_round_trip_is_exact() {
        let tricky = [
            Complex64::new(0.1, 1.0 / 3.0),
            Complex64::new(-0.0, 1e-300),
            Complex64::new(5e-324, -1.7976931348623157e308),
            Complex64::new(2.0f64.powi(-52), -2.5),
        ];
        let text = points_to_csv(&tricky);
        let back = points_from_csv(&text).unwrap();
        assert_eq!(back.len(), tricky.len());
        for (a, b) in tricky.iter().zip(&back) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(matches!(points_from_csv(""), Err(Error::Parse(_))));
        assert!(matches!(points_from_csv("x,y\n1,2\n"), Err(Error::Parse(_))));
        assert!(matches!(
            points_from_csv("re,im\n1.0\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            points_from_csv("re,im\n1.0,abc\n"),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            points_from_csv("re,im\nNaN,0\n"),
            Err(Error::Parse(_))
        ));
        // Blank trailing lines are tolerated.
        assert_eq!(points_from_csv("re,im\n1,2\n\n").unwrap().len(), 1);
    }

    fn small_sample() -> GinibreSample {
        let spectrum = crate::kernel::GinibreSpectrum::build(SpectrumParams::new(2.0)).unwrap();
        let basis = RingBasis::build(spectrum).unwrap();
        let mut stream = SampleStream::substream(7, 0);
        sample_with_basis(&basis, &SamplerOptions::ring(), &mut stream).unwrap()
    }

    #[test]
    fn json_round_trip_preserves_points_and_meta() {
        let sample = small_sample();
        let text = sample_to_json(&sample).unwrap();
        let record = record_from_json(&text).unwrap();
        let points = record.points().unwrap();
        assert_eq!(points.len(), sample.points.len());
        for (a, b) in sample.points.iter().zip(&points) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        let meta = record.meta().unwrap();
        assert_eq!(meta, sample.meta);
    }

    #[test]
    fn json_rejects_inconsistent_counts() {
        let sample = small_sample();
        let mut record = SampleRecord::from_sample(&sample);
        record.n_points += 1;
        let text = serde_json::to_string(&record).unwrap();
        assert!(matches!(record_from_json(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn svg_output_is_deterministic_and_complete() {
        let points = vec![
            Complex64::new(0.25, -0.5),
            Complex64::new(-1.0, 0.125),
            Complex64::new(0.0, 0.0),
        ];
        let first = svg_scatter(&points, 2.0).unwrap();
        let second = svg_scatter(&points, 2.0).unwrap();
        assert_eq!(first, second);
        // Disc outline plus one circle per point.
        assert_eq!(first.matches("<circle").count(), 1 + points.len());
        assert!(first.starts_with("<svg "));
        assert!(first.ends_with("</svg>\n"));
        // Mathematical orientation: positive imaginary part plots upward.
        assert!(first.contains("cy=\"0.5\""));
        assert!(svg_scatter(&points, 0.0).is_err());
    }
}
