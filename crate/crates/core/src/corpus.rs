//! Sequence corpus exchange formats.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! "DPRB" | u32 version = 1 | u32 M | u32 n | u64 count | count × n × u16 token
//! ```
//!
//! JSONL alternative: one `{"tokens": [..]}` object per line.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::markov::{Token, TokenSequence};

pub const MAGIC: &[u8; 4] = b"DPRB";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Dprb,
    Jsonl,
}

impl CorpusFormat {
    /// `.dprb`/`.bin` → binary, anything else → JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("dprb") | Some("bin") => CorpusFormat::Dprb,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl std::str::FromStr for CorpusFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dprb" => Ok(CorpusFormat::Dprb),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::param("format", format!("unknown corpus format `{other}`"))),
        }
    }
}

/// Sequences with an optional declared vocabulary size (JSONL carries none).
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub m: Option<usize>,
    pub sequences: Vec<TokenSequence>,
}

impl Corpus {
    /// Declared vocabulary, or one past the largest token.
    pub fn vocab_size(&self) -> usize {
        self.m.unwrap_or_else(|| {
            self.sequences
                .iter()
                .flat_map(|s| s.tokens())
                .max()
                .map_or(0, |&t| t as usize + 1)
        })
    }
}

pub fn write_dprb<W: Write>(mut w: W, m: usize, sequences: &[TokenSequence]) -> Result<()> {
    let m32 = u32::try_from(m).ok().filter(|&m| m <= u16::MAX as u32 + 1).ok_or_else(|| {
        Error::param("m", format!("{m} tokens do not fit the 16-bit binary format"))
    })?;
    let n = sequences.first().map_or(0, TokenSequence::len);
    if let Some(bad) = sequences.iter().position(|s| s.len() != n) {
        return Err(Error::param(
            "sequences",
            format!("binary corpus needs equal lengths; sequence {bad} has {} tokens, expected {n}", sequences[bad].len()),
        ));
    }
    for s in sequences {
        s.check_vocab(m)?;
    }
    let n32 = u32::try_from(n).map_err(|_| Error::param("n", "sequence too long"))?;
    let io = |e| Error::io("<dprb>", e);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&m32.to_le_bytes()).map_err(io)?;
    w.write_all(&n32.to_le_bytes()).map_err(io)?;
    w.write_all(&(sequences.len() as u64).to_le_bytes()).map_err(io)?;
    let mut buf = Vec::with_capacity(n * 2);
    for s in sequences {
        buf.clear();
        for &t in s.tokens() {
            buf.extend_from_slice(&(t as u16).to_le_bytes());
        }
        w.write_all(&buf).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_dprb<R: Read>(mut r: R) -> Result<Corpus> {
    let bad = |reason: String| Error::format("DPRB corpus", reason);
    let mut header = [0u8; 24];
    r.read_exact(&mut header)
        .map_err(|e| bad(format!("truncated header: {e}")))?;
    if &header[..4] != MAGIC {
        return Err(bad("missing DPRB magic".into()));
    }
    let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let m = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let count = u64::from_le_bytes(header[16..24].try_into().unwrap());
    if n == 0 && count > 0 {
        return Err(bad("zero-length sequences".into()));
    }
    let mut sequences = Vec::with_capacity(count.min(1 << 20) as usize);
    let mut buf = vec![0u8; n * 2];
    for i in 0..count {
        r.read_exact(&mut buf)
            .map_err(|e| bad(format!("sequence {i} truncated: {e}")))?;
        let tokens: Vec<Token> = buf
            .chunks_exact(2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]) as Token)
            .collect();
        let seq = TokenSequence::new(tokens)?;
        seq.check_vocab(m).map_err(|e| bad(e.to_string()))?;
        sequences.push(seq);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| Error::io("<dprb>", e))? != 0 {
        return Err(bad("trailing bytes after last sequence".into()));
    }
    Ok(Corpus {
        m: Some(m),
        sequences,
    })
}

#[derive(Serialize, Deserialize)]
struct JsonlLine {
    tokens: Vec<Token>,
}

pub fn write_jsonl<W: Write>(mut w: W, sequences: &[TokenSequence]) -> Result<()> {
    for s in sequences {
        serde_json::to_writer(&mut w, &JsonlLine {
            tokens: s.tokens().to_vec(),
        })?;
        w.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
    }
    w.flush().map_err(|e| Error::io("<jsonl>", e))
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Corpus> {
    let mut sequences = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<jsonl>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: JsonlLine = serde_json::from_str(&line)
            .map_err(|e| Error::format("JSONL corpus", format!("line {}: {e}", i + 1)))?;
        sequences.push(
            TokenSequence::new(parsed.tokens)
                .map_err(|e| Error::format("JSONL corpus", format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok(Corpus { m: None, sequences })
}

/// Reads either format, sniffing the DPRB magic.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        read_dprb(bytes.as_slice())
    } else {
        read_jsonl(bytes.as_slice())
    }
}

pub fn save_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    m: usize,
    sequences: &[TokenSequence],
) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let w = std::io::BufWriter::new(file);
    match format {
        CorpusFormat::Dprb => write_dprb(w, m, sequences),
        CorpusFormat::Jsonl => write_jsonl(w, sequences),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs() -> Vec<TokenSequence> {
        vec![
            TokenSequence::new(vec![0, 1, 127]).unwrap(),
            TokenSequence::new(vec![5, 5, 5]).unwrap(),
        ]
    }

    #[test]
    fn dprb_layout_is_exact() {
        let mut buf = Vec::new();
        write_dprb(&mut buf, 128, &seqs()).unwrap();
        let mut expected = b"DPRB".to_vec();
        expected.extend([1, 0, 0, 0, 128, 0, 0, 0, 3, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0]);
        expected.extend([0, 0, 1, 0, 127, 0, 5, 0, 5, 0, 5, 0]);
        assert_eq!(buf, expected);
        let back = read_dprb(buf.as_slice()).unwrap();
        assert_eq!(back.m, Some(128));
        assert_eq!(back.sequences, seqs());
    }

    #[test]
    fn dprb_rejects_malformed() {
        let mut buf = Vec::new();
        write_dprb(&mut buf, 128, &seqs()).unwrap();
        assert!(read_dprb(&buf[..buf.len() - 1]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_dprb(extra.as_slice()).is_err());
        let mut magic = buf.clone();
        magic[0] = b'X';
        assert!(read_dprb(magic.as_slice()).is_err());
        let mut version = buf.clone();
        version[4] = 2;
        assert!(read_dprb(version.as_slice()).is_err());
        let mut vocab = buf;
        vocab[8] = 100; // M = 100 but a token is 127
        assert!(read_dprb(vocab.as_slice()).is_err());
    }

    #[test]
    fn dprb_needs_equal_lengths_and_small_vocab() {
        let ragged = vec![
            TokenSequence::new(vec![0, 1]).unwrap(),
            TokenSequence::new(vec![0]).unwrap(),
        ];
        assert!(write_dprb(Vec::new(), 4, &ragged).is_err());
        assert!(write_dprb(Vec::new(), 70_000, &seqs()).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &seqs()).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"tokens\":[0,1,127]}\n{\"tokens\":[5,5,5]}\n"
        );
        let back = read_jsonl(buf.as_slice()).unwrap();
        assert_eq!(back.sequences, seqs());
        assert_eq!(back.vocab_size(), 128);
        assert!(read_jsonl("{\"tokens\":[]}\n".as_bytes()).is_err());
        assert!(read_jsonl("{\"tok\":[1]}\n".as_bytes()).is_err());
    }
}
