//! Tunnel wire format.
//!
//! Every datagram exchanged between tunnel endpoints is a [`TunnelFrame`]: a
//! fixed 24-byte header followed by an opaque payload. The frame is the unit
//! that gets duplicated across links; the receiver keeps the first copy of
//! each `(flow_id, seq)` and discards the rest.
//!
//! Header layout, big-endian, no padding:
//!
//! ```text
//! offset  size  field
//! 0       2     magic 0x4D43
//! 2       1     version (0x01)
//! 3       1     kind (0 = probe-request, 1 = probe-reply, 2 = load)
//! 4       4     flow_id
//! 8       8     seq
//! 16      6     send_ts_ns (low 48 bits of the sender's monotonic clock)
//! 22      2     payload_len
//! ```
//!
//! `send_ts_ns` is 48 bits on the wire, which covers ~78 hours of session
//! time; frames with larger timestamps are rejected at encode time rather
//! than silently truncated.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// First two bytes of every tunnel datagram.
pub const MAGIC: u16 = 0x4D43;
/// Current wire protocol version.
pub const VERSION: u8 = 0x01;
/// Fixed header length in bytes.
pub const HEADER_LEN: usize = 24;
/// Largest payload that keeps the datagram within the 65,507-byte UDP limit.
pub const MAX_PAYLOAD: usize = 65_507 - HEADER_LEN;
/// Largest timestamp encodable in the 48-bit wire field.
pub const MAX_SEND_TS_NS: u64 = (1 << 48) - 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("payload of {len} bytes exceeds the {MAX_PAYLOAD}-byte maximum")]
    PayloadTooLarge { len: usize },
    #[error("send_ts_ns {ts_ns} exceeds the 48-bit wire field")]
    TimestampOverflow { ts_ns: u64 },
    #[error("buffer of {len} bytes is shorter than the {HEADER_LEN}-byte header")]
    ShortBuffer { len: usize },
    #[error("bad magic 0x{found:04X}, expected 0x{MAGIC:04X}")]
    BadMagic { found: u16 },
    #[error("unknown version 0x{found:02X}")]
    UnknownVersion { found: u8 },
    #[error("unknown frame kind {found}")]
    UnknownKind { found: u8 },
    #[error("header claims {claimed} payload bytes but {actual} follow")]
    LengthMismatch { claimed: usize, actual: usize },
}

/// Frame kind tag carried in the header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[repr(u8)]
pub enum FrameKind {
    ProbeRequest = 0,
    ProbeReply = 1,
    Load = 2,
}

impl FrameKind {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(FrameKind::ProbeRequest),
            1 => Some(FrameKind::ProbeReply),
            2 => Some(FrameKind::Load),
            _ => None,
        }
    }
}

/// Sequence-numbered, timestamped datagram envelope.
///
/// `seq` increases strictly per flow at the sender and `send_ts_ns` is taken
/// from the sender's monotonic clock. Replies echo the request's `seq` and
/// `send_ts_ns`, so round-trip times never mix clocks across hosts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TunnelFrame {
    pub flow_id: u32,
    pub seq: u64,
    pub send_ts_ns: u64,
    pub kind: FrameKind,
    pub payload: Vec<u8>,
}

impl TunnelFrame {
    pub fn new(kind: FrameKind, flow_id: u32, seq: u64, send_ts_ns: u64, payload: Vec<u8>) -> Self {
        Self { flow_id, seq, send_ts_ns, kind, payload }
    }

    pub fn probe_request(flow_id: u32, seq: u64, send_ts_ns: u64, payload_len: usize) -> Self {
        Self::new(FrameKind::ProbeRequest, flow_id, seq, send_ts_ns, vec![0; payload_len])
    }

    /// Reply frame echoing this request's identity and timestamp.
    pub fn reply(&self) -> Self {
        Self::new(FrameKind::ProbeReply, self.flow_id, self.seq, self.send_ts_ns, self.payload.clone())
    }

    /// Total encoded size: header plus payload.
    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn encode(&self) -> Result<Vec<u8>, FrameError> {
        let mut buf = Vec::with_capacity(self.encoded_len());
        self.encode_into(&mut buf)?;
        Ok(buf)
    }

    /// Append the encoded frame to `buf`. Lets hot paths reuse a buffer.
    pub fn encode_into(&self, buf: &mut Vec<u8>) -> Result<(), FrameError> {
        if self.payload.len() > MAX_PAYLOAD {
            return Err(FrameError::PayloadTooLarge { len: self.payload.len() });
        }
        if self.send_ts_ns > MAX_SEND_TS_NS {
            return Err(FrameError::TimestampOverflow { ts_ns: self.send_ts_ns });
        }
        buf.extend_from_slice(&MAGIC.to_be_bytes());
        buf.push(VERSION);
        buf.push(self.kind as u8);
        buf.extend_from_slice(&self.flow_id.to_be_bytes());
        buf.extend_from_slice(&self.seq.to_be_bytes());
        buf.extend_from_slice(&self.send_ts_ns.to_be_bytes()[2..]);
        buf.extend_from_slice(&(self.payload.len() as u16).to_be_bytes());
        buf.extend_from_slice(&self.payload);
        Ok(())
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        if bytes.len() < HEADER_LEN {
            return Err(FrameError::ShortBuffer { len: bytes.len() });
        }
        let magic = u16::from_be_bytes([bytes[0], bytes[1]]);
        if magic != MAGIC {
            return Err(FrameError::BadMagic { found: magic });
        }
        if bytes[2] != VERSION {
            return Err(FrameError::UnknownVersion { found: bytes[2] });
        }
        let kind = FrameKind::from_u8(bytes[3]).ok_or(FrameError::UnknownKind { found: bytes[3] })?;
        let flow_id = u32::from_be_bytes(bytes[4..8].try_into().unwrap());
        let seq = u64::from_be_bytes(bytes[8..16].try_into().unwrap());
        let mut ts = [0u8; 8];
        ts[2..].copy_from_slice(&bytes[16..22]);
        let send_ts_ns = u64::from_be_bytes(ts);
        let claimed = u16::from_be_bytes([bytes[22], bytes[23]]) as usize;
        let actual = bytes.len() - HEADER_LEN;
        if claimed != actual {
            return Err(FrameError::LengthMismatch { claimed, actual });
        }
        Ok(Self { flow_id, seq, send_ts_ns, kind, payload: bytes[HEADER_LEN..].to_vec() })
    }
}
