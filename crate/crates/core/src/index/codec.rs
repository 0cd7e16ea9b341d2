//! Posting-list compression: delta gaps on doc ordinals, then variable-byte
//! coding of gaps and impacts.
//!
//! Each posting is encoded as two varints: the gap from the previous ordinal
//! (the first posting stores its ordinal directly) followed by the impact.
//! Varints are LEB128-style: low seven bits per byte, high bit set when more
//! bytes follow.

use crate::error::{Error, Result};

use super::Posting;

pub(crate) fn write_vint32(out: &mut Vec<u8>, mut v: u32) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

pub(crate) fn read_vint32(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    let start = *pos;
    let mut value: u32 = 0;
    let mut shift = 0u32;
    loop {
        let byte = *bytes
            .get(*pos)
            .ok_or(Error::TruncatedPostings { offset: start })?;
        *pos += 1;
        let payload = u32::from(byte & 0x7f);
        if shift == 28 && payload > 0x0f {
            return Err(Error::CorruptPostings {
                offset: start,
                msg: "varint overflows u32".into(),
            });
        }
        if shift > 28 {
            return Err(Error::CorruptPostings {
                offset: start,
                msg: "varint too long".into(),
            });
        }
        value |= payload << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

pub(crate) fn write_vint64(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

pub(crate) fn read_vint64(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    let start = *pos;
    let mut value: u64 = 0;
    let mut shift = 0u32;
    loop {
        let byte = *bytes
            .get(*pos)
            .ok_or(Error::TruncatedPostings { offset: start })?;
        *pos += 1;
        if shift >= 63 && (byte & 0x7f) > 1 {
            return Err(Error::CorruptPostings {
                offset: start,
                msg: "varint overflows u64".into(),
            });
        }
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

/// Encodes a docid-ordered posting list. Ordinals must be strictly
/// increasing; this is a contract violation, not an input error, so it
/// panics.
pub fn encode_postings(postings: &[Posting]) -> Vec<u8> {
    let mut out = Vec::with_capacity(postings.len() * 2);
    let mut prev: u32 = 0;
    for (i, p) in postings.iter().enumerate() {
        let gap = if i == 0 {
            p.ordinal
        } else {
            assert!(
                p.ordinal > prev,
                "posting ordinals must be strictly increasing ({} after {})",
                p.ordinal,
                prev
            );
            p.ordinal - prev
        };
        prev = p.ordinal;
        write_vint32(&mut out, gap);
        write_vint32(&mut out, p.impact);
    }
    out
}

/// Decodes a byte slice produced by [`encode_postings`]. Truncated or
/// non-increasing data yields an error.
pub fn decode_postings(bytes: &[u8]) -> Result<Vec<Posting>> {
    let mut postings = Vec::new();
    let mut pos = 0usize;
    let mut prev: u32 = 0;
    while pos < bytes.len() {
        let at = pos;
        let gap = read_vint32(bytes, &mut pos)?;
        let impact = read_vint32(bytes, &mut pos)?;
        let ordinal = if postings.is_empty() {
            gap
        } else {
            if gap == 0 {
                return Err(Error::CorruptPostings {
                    offset: at,
                    msg: "zero gap: ordinals not strictly increasing".into(),
                });
            }
            prev.checked_add(gap)
                .ok_or_else(|| Error::CorruptPostings {
                    offset: at,
                    msg: "ordinal overflows u32".into(),
                })?
        };
        prev = ordinal;
        postings.push(Posting { ordinal, impact });
    }
    Ok(postings)
}
