//! On-disk problem sets: `problems.bin` holds one length-prefixed frame per
//! problem and `problems.json` describes them.
//!
//! ```text
//! magic      [u8; 4]  "PMFP"
//! version    u16      1
//! flags      u16      0
//! body_len   u32
//! body:
//!   image u32, seed u32, width u32, height u32
//!   unary_base, unary_slope, sink_base   [i64; n] each
//!   pairwise                             [i64; 4n], L R U D per pixel
//!   fg_count u32, fg [u32; fg_count]
//!   bg_count u32, bg [u32; bg_count]
//! ```
//!
//! All integers little-endian.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::BenchConfig;
use super::generate::SyntheticProblem;
use crate::parametric::SeedProblem;

pub const PROBLEM_MAGIC: [u8; 4] = *b"PMFP";
pub const PROBLEM_VERSION: u16 = 1;
pub const BIN_NAME: &str = "problems.bin";
pub const JSON_NAME: &str = "problems.json";
const HEADER: usize = 12;

#[derive(Debug, Error)]
pub enum ProblemFileError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic at byte {0}")]
    BadMagic(usize),
    #[error("unsupported version {0}")]
    Version(u16),
    #[error("truncated frame at byte {0}")]
    Truncated(usize),
    #[error("frame at byte {0}: {1}")]
    Malformed(usize, &'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemEntry {
    pub index: usize,
    pub image: usize,
    pub seed_x: usize,
    pub seed_y: usize,
    pub offset: u64,
    pub length: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub format: String,
    pub version: u16,
    pub width: usize,
    pub height: usize,
    pub config: BenchConfig,
    pub problems: Vec<ProblemEntry>,
}

pub fn encode_problem(p: &SyntheticProblem) -> Vec<u8> {
    let q = &p.problem;
    let mut body = Vec::new();
    for v in [p.image, p.seed, q.width, q.height] {
        body.extend_from_slice(&(v as u32).to_le_bytes());
    }
    for field in [&q.unary_base, &q.unary_slope, &q.sink_base] {
        field.iter().for_each(|x| body.extend_from_slice(&x.to_le_bytes()));
    }
    q.pairwise.iter().flatten().for_each(|x| body.extend_from_slice(&x.to_le_bytes()));
    for seeds in [&q.fg_seeds, &q.bg_seeds] {
        body.extend_from_slice(&(seeds.len() as u32).to_le_bytes());
        seeds.iter().for_each(|&s| body.extend_from_slice(&(s as u32).to_le_bytes()));
    }
    let mut out = Vec::with_capacity(HEADER + body.len());
    out.extend_from_slice(&PROBLEM_MAGIC);
    out.extend_from_slice(&PROBLEM_VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    frame: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], ProblemFileError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or(ProblemFileError::Truncated(self.frame))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, ProblemFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn i64s(&mut self, n: usize) -> Result<Vec<i64>, ProblemFileError> {
        let bytes = self.take(n.checked_mul(8).ok_or(ProblemFileError::Truncated(self.frame))?)?;
        Ok(bytes.chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

/// Decodes every frame of a `problems.bin` buffer.
pub fn decode_problems(buf: &[u8]) -> Result<Vec<SyntheticProblem>, ProblemFileError> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < buf.len() {
        let frame = pos;
        let header = buf.get(pos..pos + HEADER).ok_or(ProblemFileError::Truncated(frame))?;
        if header[..4] != PROBLEM_MAGIC {
            return Err(ProblemFileError::BadMagic(frame));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != PROBLEM_VERSION {
            return Err(ProblemFileError::Version(version));
        }
        let len = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let body = buf
            .get(pos + HEADER..pos + HEADER + len)
            .ok_or(ProblemFileError::Truncated(frame))?;
        let mut r = Reader { buf: body, pos: 0, frame };
        let (image, seed, width, height) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        let n = width
            .checked_mul(height)
            .ok_or(ProblemFileError::Malformed(frame, "grid size overflows"))?;
        let mut problem = SeedProblem::zeros(0, 0);
        problem.width = width;
        problem.height = height;
        problem.unary_base = r.i64s(n)?;
        problem.unary_slope = r.i64s(n)?;
        problem.sink_base = r.i64s(n)?;
        problem.pairwise = r.i64s(4 * n)?.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
        for seeds in [&mut problem.fg_seeds, &mut problem.bg_seeds] {
            let count = r.u32()?;
            for _ in 0..count {
                seeds.insert(r.u32()?);
            }
        }
        if r.pos != body.len() {
            return Err(ProblemFileError::Malformed(frame, "trailing bytes"));
        }
        problem
            .validate()
            .map_err(|_| ProblemFileError::Malformed(frame, "invalid problem"))?;
        out.push(SyntheticProblem { image, seed, problem });
        pos += HEADER + len;
    }
    Ok(out)
}

/// Writes `problems.bin` and `problems.json` into `dir`.
pub fn write_problem_set(dir: &Path, cfg: &BenchConfig, problems: &[SyntheticProblem]) -> Result<(), ProblemFileError> {
    fs::create_dir_all(dir)?;
    let mut bin = Vec::new();
    let mut entries = Vec::with_capacity(problems.len());
    for (index, p) in problems.iter().enumerate() {
        let frame = encode_problem(p);
        entries.push(ProblemEntry {
            index,
            image: p.image,
            seed_x: p.seed % cfg.width,
            seed_y: p.seed / cfg.width,
            offset: bin.len() as u64,
            length: frame.len() as u64,
        });
        bin.extend_from_slice(&frame);
    }
    let desc = ProblemDescriptor {
        format: "superflow-problems".into(),
        version: PROBLEM_VERSION,
        width: cfg.width,
        height: cfg.height,
        config: cfg.clone(),
        problems: entries,
    };
    fs::write(dir.join(BIN_NAME), bin)?;
    let mut json = serde_json::to_string_pretty(&desc).expect("descriptor serializes");
    json.push('\n');
    fs::write(dir.join(JSON_NAME), json)?;
    Ok(())
}

pub fn read_problem_set(dir: &Path) -> Result<Vec<SyntheticProblem>, ProblemFileError> {
    decode_problems(&fs::read(dir.join(BIN_NAME))?)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::super::generate::generate;
    use super::*;

    fn small() -> (BenchConfig, Vec<SyntheticProblem>) {
        let cfg = BenchConfig {
            width: 9,
            height: 7,
            seeds: 4,
            ..BenchConfig::default()
        };
        let set = generate(&cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        (cfg, set.problems)
    }

    #[test]
    fn round_trip() {
        let (_, ps) = small();
        let buf: Vec<u8> = ps.iter().flat_map(encode_problem).collect();
        assert_eq!(decode_problems(&buf).unwrap(), ps);
    }

    #[test]
    fn rejects_damage() {
        let (_, ps) = small();
        let frame = encode_problem(&ps[0]);
        let mut bad = frame.clone();
        bad[0] = b'X';
        assert!(matches!(decode_problems(&bad), Err(ProblemFileError::BadMagic(0))));
        assert!(matches!(
            decode_problems(&frame[..frame.len() - 1]),
            Err(ProblemFileError::Truncated(0))
        ));
        let mut ver = frame.clone();
        ver[4] = 9;
        assert!(matches!(decode_problems(&ver), Err(ProblemFileError::Version(9))));
    }

    #[test]
    fn files_are_byte_identical_across_writes() {
        let (cfg, ps) = small();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_problem_set(a.path(), &cfg, &ps).unwrap();
        write_problem_set(b.path(), &cfg, &ps).unwrap();
        for name in [BIN_NAME, JSON_NAME] {
            assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
        }
        assert_eq!(read_problem_set(a.path()).unwrap(), ps);
        let desc: ProblemDescriptor = serde_json::from_slice(&fs::read(a.path().join(JSON_NAME)).unwrap()).unwrap();
        assert_eq!(desc.problems.len(), 4);
        assert_eq!(desc.config, cfg);
    }
}
