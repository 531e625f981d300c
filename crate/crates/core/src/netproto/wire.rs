//! Length-prefixed binary frames for supergraph cut requests and responses.
//!
//! All integers are little-endian. Every frame starts with a `u32` byte count
//! of the body that follows.
//!
//! Request body:
//!
//! ```text
//! magic      [u8; 4]   "PMFX"
//! version    u16       1
//! flags      u16       reserved, 0
//! task_id    u64
//! width      u32
//! height     u32
//! swap_len   u32       ceil(segments / 8)
//! swap_bits  [u8; swap_len]   bit i (LSB first) = segment i swapped
//! seg_count  u32
//! segments   seg_count x (offset u32, width u32, swapped u8)
//! caps       6 x width*height x i32   src, snk, left, right, up, down
//! ```
//!
//! Response body:
//!
//! ```text
//! task_id    u64
//! status     u16       0 = ok
//! flow       u64
//! labels     [u8; ceil(width*height / 8)]   row-major, bit 1 = foreground
//! ```

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Cap, Dir, GridGraph, CAP_MAX};
use crate::supergraph::SupergraphLayout;

pub const MAGIC: [u8; 4] = *b"PMFX";
pub const VERSION: u16 = 1;
/// Largest body a decoder will accept.
pub const MAX_FRAME_LEN: u32 = 1 << 30;

const FIXED_REQUEST_HEADER: usize = 4 + 2 + 2 + 8 + 4 + 4;
const SEGMENT_RECORD: usize = 4 + 4 + 1;
const RESPONSE_HEADER: usize = 8 + 2 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorClass {
    BadMagic,
    UnsupportedVersion,
    LengthMismatch,
    CapacityOutOfRange,
    Malformed,
    Io,
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u16),
    #[error("frame truncated: declared {declared} bytes, {available} available")]
    Truncated { declared: usize, available: usize },
    #[error("declared length {declared} does not match encoded length {expected}")]
    LengthMismatch { declared: usize, expected: usize },
    #[error("frame of {0} bytes exceeds the maximum frame size")]
    FrameTooLarge(u64),
    #[error("capacity {value} at pixel {pixel} is outside [0, CAP_MAX]")]
    CapacityOutOfRange { task_id: u64, pixel: usize, value: Cap },
    #[error("malformed frame: {0}")]
    Malformed(&'static str),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl WireError {
    pub fn class(&self) -> ErrorClass {
        match self {
            WireError::BadMagic(_) => ErrorClass::BadMagic,
            WireError::UnsupportedVersion(_) => ErrorClass::UnsupportedVersion,
            WireError::Truncated { .. } | WireError::LengthMismatch { .. } | WireError::FrameTooLarge(_) => {
                ErrorClass::LengthMismatch
            }
            WireError::CapacityOutOfRange { .. } => ErrorClass::CapacityOutOfRange,
            WireError::Malformed(_) => ErrorClass::Malformed,
            WireError::Io(_) => ErrorClass::Io,
        }
    }
}

/// Response status codes.
pub mod status {
    pub const OK: u16 = 0;
    pub const BAD_MAGIC: u16 = 1;
    pub const UNSUPPORTED_VERSION: u16 = 2;
    pub const LENGTH_MISMATCH: u16 = 3;
    pub const CAPACITY_OUT_OF_RANGE: u16 = 4;
    pub const MALFORMED: u16 = 5;
    pub const ADMISSION: u16 = 6;
    pub const SOLVER_FAILURE: u16 = 7;
}

impl ErrorClass {
    pub fn status(self) -> u16 {
        match self {
            ErrorClass::BadMagic => status::BAD_MAGIC,
            ErrorClass::UnsupportedVersion => status::UNSUPPORTED_VERSION,
            ErrorClass::LengthMismatch | ErrorClass::Io => status::LENGTH_MISMATCH,
            ErrorClass::CapacityOutOfRange => status::CAPACITY_OUT_OF_RANGE,
            ErrorClass::Malformed => status::MALFORMED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WireSegment {
    pub offset: u32,
    pub width: u32,
    pub swapped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireRequest {
    pub task_id: u64,
    pub flags: u16,
    pub graph: GridGraph,
    pub segments: Vec<WireSegment>,
}

impl WireRequest {
    pub fn new(task_id: u64, graph: GridGraph, layout: &SupergraphLayout) -> Self {
        let segments = layout
            .segments
            .iter()
            .map(|s| WireSegment {
                offset: s.offset as u32,
                width: s.width as u32,
                swapped: s.swapped,
            })
            .collect();
        WireRequest {
            task_id,
            flags: 0,
            graph,
            segments,
        }
    }

    /// Per-pixel mask of the columns covered by swapped segments.
    pub fn orientation(&self) -> Vec<bool> {
        let mut row = vec![false; self.graph.width];
        for seg in self.segments.iter().filter(|s| s.swapped) {
            let start = (seg.offset as usize).min(row.len());
            let end = (seg.offset as usize + seg.width as usize).min(row.len());
            row[start..end].fill(true);
        }
        row.repeat(self.graph.height)
    }

    /// A request carrying a single unswapped segment spanning the graph.
    pub fn plain(task_id: u64, graph: GridGraph) -> Self {
        let segments = vec![WireSegment {
            offset: 0,
            width: graph.width as u32,
            swapped: false,
        }];
        WireRequest {
            task_id,
            flags: 0,
            graph,
            segments,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireResponse {
    pub task_id: u64,
    pub status: u16,
    pub flow: u64,
    pub bitmap: Vec<u8>,
}

impl WireResponse {
    pub fn ok(task_id: u64, flow: u64, labels: &[bool]) -> Self {
        WireResponse {
            task_id,
            status: status::OK,
            flow,
            bitmap: pack_bits(labels),
        }
    }

    pub fn error(task_id: u64, status: u16) -> Self {
        WireResponse {
            task_id,
            status,
            flow: 0,
            bitmap: Vec::new(),
        }
    }
}

/// Packs booleans LSB-first into bytes.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            out[i / 8] |= 1 << (i % 8);
        }
    }
    out
}

/// Inverse of [`pack_bits`]; the byte count must match `n` exactly and
/// trailing pad bits must be zero.
pub fn unpack_bits(bytes: &[u8], n: usize) -> Result<Vec<bool>, WireError> {
    if bytes.len() != n.div_ceil(8) {
        return Err(WireError::Malformed("bitmap length does not match pixel count"));
    }
    if !n.is_multiple_of(8) && bytes[n / 8] >> (n % 8) != 0 {
        return Err(WireError::Malformed("nonzero bitmap padding"));
    }
    Ok((0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
}

/// Total frame size (prefix included) of a request with these dimensions.
pub fn request_frame_len(width: usize, height: usize, segments: usize) -> usize {
    4 + FIXED_REQUEST_HEADER
        + 4
        + segments.div_ceil(8)
        + 4
        + segments * SEGMENT_RECORD
        + 6 * width * height * 4
}

pub fn encode_request(req: &WireRequest) -> Vec<u8> {
    let g = &req.graph;
    let total = request_frame_len(g.width, g.height, req.segments.len());
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(&((total - 4) as u32).to_le_bytes());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&req.flags.to_le_bytes());
    out.extend_from_slice(&req.task_id.to_le_bytes());
    out.extend_from_slice(&(g.width as u32).to_le_bytes());
    out.extend_from_slice(&(g.height as u32).to_le_bytes());

    let swaps: Vec<bool> = req.segments.iter().map(|s| s.swapped).collect();
    let bitmap = pack_bits(&swaps);
    out.extend_from_slice(&(bitmap.len() as u32).to_le_bytes());
    out.extend_from_slice(&bitmap);
    out.extend_from_slice(&(req.segments.len() as u32).to_le_bytes());
    for s in &req.segments {
        out.extend_from_slice(&s.offset.to_le_bytes());
        out.extend_from_slice(&s.width.to_le_bytes());
        out.push(s.swapped as u8);
    }

    for c in &g.src_cap {
        out.extend_from_slice(&c.to_le_bytes());
    }
    for c in &g.snk_cap {
        out.extend_from_slice(&c.to_le_bytes());
    }
    for dir in Dir::ALL {
        for a in &g.nbr_cap {
            out.extend_from_slice(&a[dir.index()].to_le_bytes());
        }
    }
    debug_assert_eq!(out.len(), total);
    out
}

pub fn encode_response(resp: &WireResponse) -> Vec<u8> {
    let body = RESPONSE_HEADER + resp.bitmap.len();
    let mut out = Vec::with_capacity(4 + body);
    out.extend_from_slice(&(body as u32).to_le_bytes());
    out.extend_from_slice(&resp.task_id.to_le_bytes());
    out.extend_from_slice(&resp.status.to_le_bytes());
    out.extend_from_slice(&resp.flow.to_le_bytes());
    out.extend_from_slice(&resp.bitmap);
    out
}

/// Splits a complete frame into its body, never looking past the declared
/// length. Bytes after the frame are left untouched.
pub fn frame_body(buf: &[u8]) -> Result<&[u8], WireError> {
    if buf.len() < 4 {
        return Err(WireError::Truncated {
            declared: 4,
            available: buf.len(),
        });
    }
    let declared = u32::from_le_bytes(buf[..4].try_into().unwrap());
    if declared > MAX_FRAME_LEN {
        return Err(WireError::FrameTooLarge(declared as u64));
    }
    let declared = declared as usize;
    let available = buf.len() - 4;
    if available < declared {
        return Err(WireError::Truncated { declared, available });
    }
    Ok(&buf[4..4 + declared])
}

/// Reads one frame body from a stream. Returns `None` on a clean EOF before
/// the length prefix.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, WireError> {
    let mut prefix = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut prefix[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => {
                return Err(WireError::Truncated {
                    declared: 4,
                    available: got,
                })
            }
            Ok(k) => got += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let declared = u32::from_le_bytes(prefix);
    if declared > MAX_FRAME_LEN {
        return Err(WireError::FrameTooLarge(declared as u64));
    }
    let mut body = vec![0u8; declared as usize];
    r.read_exact(&mut body).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => WireError::Truncated {
            declared: declared as usize,
            available: 0,
        },
        _ => WireError::Io(e),
    })?;
    Ok(Some(body))
}

pub fn write_frame<W: Write>(w: &mut W, frame: &[u8]) -> io::Result<()> {
    w.write_all(frame)?;
    w.flush()
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() - self.pos < n {
            return Err(WireError::LengthMismatch {
                declared: self.buf.len(),
                expected: self.pos + n,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Decodes a complete request frame (length prefix included).
pub fn decode_request(frame: &[u8]) -> Result<WireRequest, WireError> {
    decode_request_body(frame_body(frame)?)
}

/// Decodes a request body, i.e. a frame without its length prefix.
pub fn decode_request_body(body: &[u8]) -> Result<WireRequest, WireError> {
    let declared = body.len();
    let mut c = Cursor { buf: body, pos: 0 };
    let magic: [u8; 4] = c.take(4)?.try_into().unwrap();
    if magic != MAGIC {
        return Err(WireError::BadMagic(magic));
    }
    let version = c.u16()?;
    if version != VERSION {
        return Err(WireError::UnsupportedVersion(version));
    }
    let flags = c.u16()?;
    let task_id = c.u64()?;
    let width = c.u32()? as usize;
    let height = c.u32()? as usize;
    if width == 0 || height == 0 {
        return Err(WireError::Malformed("empty grid"));
    }
    let swap_len = c.u32()? as usize;
    let bitmap = c.take(swap_len)?.to_vec();
    let seg_count = c.u32()? as usize;

    let pixels = width
        .checked_mul(height)
        .filter(|&n| n <= MAX_FRAME_LEN as usize)
        .ok_or(WireError::FrameTooLarge(u64::MAX))?;
    let expected = FIXED_REQUEST_HEADER + 4 + swap_len + 4 + seg_count.saturating_mul(SEGMENT_RECORD) + 24 * pixels;
    if expected != declared {
        return Err(WireError::LengthMismatch { declared, expected });
    }

    let mut segments = Vec::with_capacity(seg_count);
    for _ in 0..seg_count {
        let offset = c.u32()?;
        let seg_width = c.u32()?;
        let swapped = match c.u8()? {
            0 => false,
            1 => true,
            _ => return Err(WireError::Malformed("swapped flag must be 0 or 1")),
        };
        if offset as usize + seg_width as usize > width {
            return Err(WireError::Malformed("segment exceeds composite width"));
        }
        segments.push(WireSegment {
            offset,
            width: seg_width,
            swapped,
        });
    }
    let swaps: Vec<bool> = segments.iter().map(|s| s.swapped).collect();
    if unpack_bits(&bitmap, seg_count).ok() != Some(swaps) {
        return Err(WireError::Malformed("swap bitmap disagrees with segment flags"));
    }

    let read_array = |c: &mut Cursor<'_>| -> Result<Vec<Cap>, WireError> {
        let raw = c.take(4 * pixels)?;
        let mut out = Vec::with_capacity(pixels);
        for (pixel, chunk) in raw.chunks_exact(4).enumerate() {
            let value = Cap::from_le_bytes(chunk.try_into().unwrap());
            if !(0..=CAP_MAX).contains(&value) {
                return Err(WireError::CapacityOutOfRange { task_id, pixel, value });
            }
            out.push(value);
        }
        Ok(out)
    };
    let src_cap = read_array(&mut c)?;
    let snk_cap = read_array(&mut c)?;
    let mut nbr_cap = vec![[0 as Cap; 4]; pixels];
    for dir in Dir::ALL {
        for (v, value) in read_array(&mut c)?.into_iter().enumerate() {
            nbr_cap[v][dir.index()] = value;
        }
    }

    Ok(WireRequest {
        task_id,
        flags,
        graph: GridGraph {
            width,
            height,
            src_cap,
            snk_cap,
            nbr_cap,
        },
        segments,
    })
}

/// Decodes a complete response frame (length prefix included).
pub fn decode_response(frame: &[u8]) -> Result<WireResponse, WireError> {
    decode_response_body(frame_body(frame)?)
}

pub fn decode_response_body(body: &[u8]) -> Result<WireResponse, WireError> {
    if body.len() < RESPONSE_HEADER {
        return Err(WireError::LengthMismatch {
            declared: body.len(),
            expected: RESPONSE_HEADER,
        });
    }
    let mut c = Cursor { buf: body, pos: 0 };
    let task_id = c.u64()?;
    let status = c.u16()?;
    let flow = c.u64()?;
    Ok(WireResponse {
        task_id,
        status,
        flow,
        bitmap: body[RESPONSE_HEADER..].to_vec(),
    })
}
