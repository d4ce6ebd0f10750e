//! Minimal binary PNM codec: 8-bit `P6` images and 16-bit `P5` label maps.

use crate::{Error, Result};

pub(crate) struct Header {
    pub magic: [u8; 2],
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    /// Offset of the first payload byte.
    pub data_start: usize,
}

pub(crate) fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::format("missing PNM magic"));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in &mut fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::format("truncated PNM header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format("malformed PNM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|&v| v <= u32::MAX as u64)
            .ok_or_else(|| Error::format("PNM header value out of range"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format("truncated PNM header")),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::format("zero-sized PNM image"));
    }
    Ok(Header {
        magic,
        width: width as usize,
        height: height as usize,
        maxval: maxval as u32,
        data_start: pos,
    })
}

pub(crate) fn payload<'a>(bytes: &'a [u8], header: &Header, len: usize) -> Result<&'a [u8]> {
    let end = header
        .data_start
        .checked_add(len)
        .ok_or_else(|| Error::format("PNM payload size overflows"))?;
    bytes
        .get(header.data_start..end)
        .ok_or_else(|| Error::format("truncated PNM payload"))
}

/// Decodes a `P6` image with maxval 255 into `(height, width, rgb bytes)`.
pub(crate) fn decode_ppm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let header = parse_header(bytes)?;
    if &header.magic != b"P6" {
        return Err(Error::format("not a binary PPM (P6)"));
    }
    if header.maxval != 255 {
        return Err(Error::format(format!(
            "unsupported PPM maxval {}, expected 255",
            header.maxval
        )));
    }
    let len = header
        .width
        .checked_mul(header.height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::format("PPM dimensions overflow"))?;
    let data = payload(bytes, &header, len)?;
    Ok((header.height, header.width, data.to_vec()))
}

/// Decodes a 16-bit `P5` map into `(height, width, values)`.
pub(crate) fn decode_pgm16(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>)> {
    let header = parse_header(bytes)?;
    if &header.magic != b"P5" {
        return Err(Error::format("not a binary PGM (P5)"));
    }
    if header.maxval != 65535 {
        return Err(Error::format(format!(
            "label PGM maxval must be 65535, found {}",
            header.maxval
        )));
    }
    let len = header
        .width
        .checked_mul(header.height)
        .and_then(|n| n.checked_mul(2))
        .ok_or_else(|| Error::format("PGM dimensions overflow"))?;
    let data = payload(bytes, &header, len)?;
    let values = data
        .chunks_exact(2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]))
        .collect();
    Ok((header.height, header.width, values))
}

pub(crate) fn encode_pgm16(height: usize, width: usize, values: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(values.len() * 2);
    for v in values {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}
