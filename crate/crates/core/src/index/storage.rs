//! Single-file index container.
//!
//! Layout (all integers little-endian, see docs/INDEX_FORMAT.md for the
//! byte-exact table):
//!
//! ```text
//! magic            8  b"IMPACTIX"
//! version          4  u32, currently 1
//! mode             1  0 = frequency, 1 = impact
//! bits             1  quantization bits (0 in frequency mode)
//! max_weight       8  f64 (0.0 in frequency mode)
//! doc_count        8  u64
//! total_doc_len    8  u64
//! avgdl            8  f64, derived = total_doc_len / doc_count (informational)
//! lexicon block    8-byte length prefix + entries
//! postings block   8-byte length prefix + concatenated posting lists
//! docmap block     8-byte length prefix + docids and document lengths
//! checksum         4  crc32 of everything above
//! ```
//!
//! Lexicon entries are `vint64 term_len, term bytes, vint32 df, vint32
//! max_impact, vint64 offset, vint64 byte_len` in sorted term order. Docmap
//! entries are `vint64 docid_len, docid bytes, vint32 dl` in ordinal order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{from_f64, Scalar};

use super::codec::{read_vint32, read_vint64, write_vint32, write_vint64};
use super::{IndexMode, InvertedIndex, TermEntry};

const MAGIC: &[u8; 8] = b"IMPACTIX";
const VERSION: u32 = 1;

const MODE_FREQUENCY: u8 = 0;
const MODE_IMPACT: u8 = 1;

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptIndex { msg: msg.into() }
}

impl<F: Scalar> InvertedIndex<F> {
    /// Serializes the index. The file is written atomically enough for a
    /// single writer: errors leave no partial reads because load verifies
    /// the trailing checksum.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let (mode_byte, bits, max_weight) = match self.mode {
            IndexMode::Frequency => (MODE_FREQUENCY, 0u8, 0.0f64),
            IndexMode::Impact { bits, max_weight } => (
                MODE_IMPACT,
                bits,
                max_weight.to_f64().expect("max weight fits f64"),
            ),
        };
        let n = self.docids.len() as u64;
        let avgdl = if n == 0 {
            0.0
        } else {
            self.total_doc_len as f64 / n as f64
        };

        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(mode_byte);
        out.push(bits);
        out.extend_from_slice(&max_weight.to_le_bytes());
        out.extend_from_slice(&n.to_le_bytes());
        out.extend_from_slice(&self.total_doc_len.to_le_bytes());
        out.extend_from_slice(&avgdl.to_le_bytes());

        let mut lexicon = Vec::new();
        write_vint64(&mut lexicon, self.lexicon.len() as u64);
        for (term, entry) in &self.lexicon {
            write_vint64(&mut lexicon, term.len() as u64);
            lexicon.extend_from_slice(term.as_bytes());
            write_vint32(&mut lexicon, entry.doc_count);
            write_vint32(&mut lexicon, entry.max_impact);
            write_vint64(&mut lexicon, entry.offset as u64);
            write_vint64(&mut lexicon, entry.byte_len as u64);
        }
        out.extend_from_slice(&(lexicon.len() as u64).to_le_bytes());
        out.extend_from_slice(&lexicon);

        out.extend_from_slice(&(self.postings_blob.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.postings_blob);

        let mut docmap = Vec::new();
        for (docid, &dl) in self.docids.iter().zip(&self.doc_lengths) {
            write_vint64(&mut docmap, docid.len() as u64);
            docmap.extend_from_slice(docid.as_bytes());
            write_vint32(&mut docmap, dl);
        }
        out.extend_from_slice(&(docmap.len() as u64).to_le_bytes());
        out.extend_from_slice(&docmap);

        let checksum = crc32fast::hash(&out);
        out.extend_from_slice(&checksum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::NotAnIndex);
        }
        if bytes.len() < 46 + 4 {
            return Err(corrupt("file too short"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        if crc32fast::hash(body) != stored {
            return Err(Error::ChecksumMismatch);
        }

        let mut pos = MAGIC.len();
        let version = read_u32(body, &mut pos)?;
        if version != VERSION {
            return Err(Error::UnsupportedVersion {
                found: version,
                expected: VERSION,
            });
        }
        let mode_byte = read_u8(body, &mut pos)?;
        let bits = read_u8(body, &mut pos)?;
        let max_weight = f64::from_le_bytes(read_array(body, &mut pos)?);
        let doc_count = read_u64(body, &mut pos)?;
        let total_doc_len = read_u64(body, &mut pos)?;
        let _avgdl = f64::from_le_bytes(read_array(body, &mut pos)?);

        let mode = match mode_byte {
            MODE_FREQUENCY => IndexMode::Frequency,
            MODE_IMPACT => IndexMode::Impact {
                bits,
                max_weight: from_f64::<F>(max_weight),
            },
            other => return Err(corrupt(format!("unknown mode byte {other}"))),
        };

        let lexicon_block = read_block(body, &mut pos)?;
        let postings_block = read_block(body, &mut pos)?;
        let docmap_block = read_block(body, &mut pos)?;
        if pos != body.len() {
            return Err(corrupt("trailing bytes after docmap block"));
        }

        let mut lexicon = BTreeMap::new();
        {
            let mut p = 0usize;
            let term_count = read_vint64(lexicon_block, &mut p)?;
            for _ in 0..term_count {
                let term = read_string(lexicon_block, &mut p)?;
                let doc_count = read_vint32(lexicon_block, &mut p)?;
                let max_impact = read_vint32(lexicon_block, &mut p)?;
                let offset = read_vint64(lexicon_block, &mut p)? as usize;
                let byte_len = read_vint64(lexicon_block, &mut p)? as usize;
                if offset
                    .checked_add(byte_len)
                    .is_none_or(|end| end > postings_block.len())
                {
                    return Err(corrupt(format!(
                        "posting locator for {term:?} out of range"
                    )));
                }
                lexicon.insert(
                    term,
                    TermEntry {
                        doc_count,
                        max_impact,
                        offset,
                        byte_len,
                    },
                );
            }
            if p != lexicon_block.len() {
                return Err(corrupt("lexicon block has trailing bytes"));
            }
        }

        let mut docids = Vec::with_capacity(doc_count as usize);
        let mut doc_lengths = Vec::with_capacity(doc_count as usize);
        {
            let mut p = 0usize;
            while p < docmap_block.len() {
                docids.push(read_string(docmap_block, &mut p)?);
                doc_lengths.push(read_vint32(docmap_block, &mut p)?);
            }
        }
        if docids.len() as u64 != doc_count {
            return Err(corrupt(format!(
                "docmap holds {} documents, header says {doc_count}",
                docids.len()
            )));
        }
        if doc_lengths.iter().map(|&d| u64::from(d)).sum::<u64>() != total_doc_len {
            return Err(corrupt("document lengths do not sum to header total"));
        }

        Ok(InvertedIndex::from_parts(
            mode,
            lexicon,
            postings_block.to_vec(),
            docids,
            doc_lengths,
            total_doc_len,
        ))
    }
}

fn read_u8(bytes: &[u8], pos: &mut usize) -> Result<u8> {
    let b = *bytes
        .get(*pos)
        .ok_or_else(|| corrupt("unexpected end of header"))?;
    *pos += 1;
    Ok(b)
}

fn read_array<const N: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; N]> {
    let end = *pos + N;
    if end > bytes.len() {
        return Err(corrupt("unexpected end of header"));
    }
    let arr = bytes[*pos..end].try_into().unwrap();
    *pos = end;
    Ok(arr)
}

fn read_u32(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(bytes, pos)?))
}

fn read_u64(bytes: &[u8], pos: &mut usize) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(bytes, pos)?))
}

fn read_block<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    let len = read_u64(bytes, pos)? as usize;
    let end = pos
        .checked_add(len)
        .ok_or_else(|| corrupt("block length overflows"))?;
    if end > bytes.len() {
        return Err(corrupt("block extends past end of file"));
    }
    let block = &bytes[*pos..end];
    *pos = end;
    Ok(block)
}

fn read_string(bytes: &[u8], pos: &mut usize) -> Result<String> {
    let len = read_vint64(bytes, pos)? as usize;
    let end = pos
        .checked_add(len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| corrupt("string extends past end of block"))?;
    let s = std::str::from_utf8(&bytes[*pos..end])
        .map_err(|_| corrupt("string is not valid UTF-8"))?
        .to_owned();
    *pos = end;
    Ok(s)
}
