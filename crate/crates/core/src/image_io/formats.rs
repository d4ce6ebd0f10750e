use std::fs;
use std::path::Path;

use super::{neighbor, pnm, AffinityMap, EdgeProbMap, LabelMap, RgbImage};
use crate::{Error, Result};

const AFF8_MAGIC: &[u8; 4] = b"AFF8";
const EDG1_MAGIC: &[u8; 4] = b"EDG1";

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn u32_at(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format("truncated header"))
}

fn f32s(bytes: &[u8], count: usize) -> Result<Vec<f32>> {
    let need = count
        .checked_mul(4)
        .ok_or_else(|| Error::format("payload size overflows"))?;
    if bytes.len() < need {
        return Err(Error::format(format!(
            "payload holds {} values, expected {count}",
            bytes.len() / 4
        )));
    }
    Ok(bytes[..need]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect())
}

fn frame(h: u32, w: u32, channels: usize) -> Result<(usize, usize, usize)> {
    let (h, w) = (h as usize, w as usize);
    let count = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(channels))
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or_else(|| Error::format(format!("dimensions {h}x{w} overflow")))?;
    Ok((h, w, count))
}

/// Loads an 8-bit RGB PNG or binary PPM, scaling bytes into `[0, 1]`.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    let (height, width, rgb) = if bytes.starts_with(b"\x89PNG") {
        let img = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
            .map_err(|e| Error::format(format!("{}: {e}", path.display())))?
            .to_rgb8();
        (img.height() as usize, img.width() as usize, img.into_raw())
    } else if bytes.starts_with(b"P6") {
        pnm::decode_ppm(&bytes)?
    } else {
        return Err(Error::format(format!(
            "{}: unsupported image format (expected PNG or P6 PPM)",
            path.display()
        )));
    };
    let data = rgb
        .chunks_exact(3)
        .map(|p| [p[0], p[1], p[2]].map(|b| b as f64 / 255.0))
        .collect();
    RgbImage::new(height, width, data)
}

pub fn read_affinity(path: impl AsRef<Path>) -> Result<AffinityMap> {
    let bytes = read_bytes(path.as_ref())?;
    if bytes.len() < 4 || &bytes[..4] != AFF8_MAGIC {
        return Err(Error::format("bad magic, expected AFF8"));
    }
    let (h, w, count) = frame(u32_at(&bytes, 4)?, u32_at(&bytes, 8)?, 8)?;
    u32_at(&bytes, 12)?;
    let data = f32s(&bytes[16..], count)?;
    AffinityMap::new(h, w, data)
}

pub fn write_affinity(map: &AffinityMap, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::with_capacity(16 + 4 * map.as_slice().len());
    out.extend_from_slice(AFF8_MAGIC);
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in map.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(path.as_ref(), &out)
}

pub fn read_edge_probs(path: impl AsRef<Path>) -> Result<EdgeProbMap> {
    let bytes = read_bytes(path.as_ref())?;
    if bytes.len() < 4 || &bytes[..4] != EDG1_MAGIC {
        return Err(Error::format("bad magic, expected EDG1"));
    }
    let (h, w, count) = frame(u32_at(&bytes, 4)?, u32_at(&bytes, 8)?, 1)?;
    let data = f32s(&bytes[12..], count)?;
    EdgeProbMap::new(h, w, data)
}

pub fn write_edge_probs(map: &EdgeProbMap, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::with_capacity(12 + 4 * map.as_slice().len());
    out.extend_from_slice(EDG1_MAGIC);
    out.extend_from_slice(&(map.height() as u32).to_le_bytes());
    out.extend_from_slice(&(map.width() as u32).to_le_bytes());
    for v in map.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(path.as_ref(), &out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelFormat {
    Pgm,
    Csv,
}

impl LabelFormat {
    /// `.csv` selects CSV; anything else is PGM.
    pub fn from_path(path: &Path) -> LabelFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => LabelFormat::Csv,
            _ => LabelFormat::Pgm,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            LabelFormat::Pgm => "pgm",
            LabelFormat::Csv => "csv",
        }
    }
}

/// Reads a label map, detecting PGM by its `P5` magic and treating anything
/// else as CSV.
pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let bytes = read_bytes(path.as_ref())?;
    let format = if bytes.starts_with(b"P5") {
        LabelFormat::Pgm
    } else {
        LabelFormat::Csv
    };
    parse_labels(&bytes, format)
}

pub fn read_labels_as(path: impl AsRef<Path>, format: LabelFormat) -> Result<LabelMap> {
    parse_labels(&read_bytes(path.as_ref())?, format)
}

fn parse_labels(bytes: &[u8], format: LabelFormat) -> Result<LabelMap> {
    match format {
        LabelFormat::Pgm => {
            let (h, w, values) = pnm::decode_pgm16(bytes)?;
            LabelMap::from_raw(h, w, &values)
        }
        LabelFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .trim(csv::Trim::All)
                .from_reader(bytes);
            let mut values: Vec<i64> = Vec::new();
            let mut width = None;
            let mut height = 0;
            for record in reader.records() {
                let record = record.map_err(|e| Error::format(format!("label CSV: {e}")))?;
                if width.is_some_and(|w| w != record.len()) {
                    return Err(Error::format(format!(
                        "ragged label CSV: row {} has {} columns",
                        height + 1,
                        record.len()
                    )));
                }
                width = Some(record.len());
                for field in &record {
                    let v = field.parse::<i64>().map_err(|_| {
                        Error::format(format!("label CSV: '{field}' is not an integer"))
                    })?;
                    values.push(v);
                }
                height += 1;
            }
            LabelMap::from_raw(height, width.unwrap_or(0), &values)
        }
    }
}

/// Writes labels in the format implied by the file extension.
pub fn write_labels(map: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_labels_as(map, path, LabelFormat::from_path(path))
}

pub fn write_labels_as(map: &LabelMap, path: impl AsRef<Path>, format: LabelFormat) -> Result<()> {
    let bytes = match format {
        LabelFormat::Pgm => {
            if map.k() > 65535 {
                return Err(Error::format(format!(
                    "{} labels do not fit a 16-bit PGM",
                    map.k()
                )));
            }
            let values: Vec<u16> = map.labels().iter().map(|&l| l as u16).collect();
            pnm::encode_pgm16(map.height(), map.width(), &values)
        }
        LabelFormat::Csv => {
            let mut out = String::with_capacity(map.labels().len() * 4);
            for row in map.labels().chunks(map.width()) {
                for (i, l) in row.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&l.to_string());
                }
                out.push('\n');
            }
            out.into_bytes()
        }
    };
    write_bytes(path.as_ref(), &bytes)
}

/// Saves `image` as PNG with the 4-neighbor boundaries of `labels` painted red.
pub fn save_overlay(image: &RgbImage, labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if (image.height(), image.width()) != labels.dims() {
        return Err(Error::DimensionMismatch {
            expected: (image.height(), image.width()),
            found: labels.dims(),
        });
    }
    let (h, w) = labels.dims();
    let mut buf = image::RgbImage::new(w as u32, h as u32);
    for r in 0..h {
        for c in 0..w {
            let here = labels.get(r, c);
            let edge = [super::Direction::N, super::Direction::W, super::Direction::E, super::Direction::S]
                .into_iter()
                .filter_map(|d| neighbor(h, w, r, c, d))
                .any(|(nr, nc)| labels.get(nr, nc) != here);
            let px = if edge {
                [255, 0, 0]
            } else {
                image.pixel(r, c).map(|v| (v * 255.0).round() as u8)
            };
            buf.put_pixel(c as u32, r as u32, image::Rgb(px));
        }
    }
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::format(other.to_string()),
        })
}
