use std::time::Duration;

use crossbeam_channel::{Receiver, Sender};

use crate::error::{ProtoError, Result};

/// Frame layout: u32 little-endian payload length, u8 message-type tag,
/// payload bytes. Byte-exact across transports so transcripts are
/// transport-independent.
pub const FRAME_HEADER_BYTES: u64 = 5;

pub fn encode_frame(tag: u8, payload: &[u8]) -> Vec<u8> {
    let mut f = Vec::with_capacity(5 + payload.len());
    f.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    f.push(tag);
    f.extend_from_slice(payload);
    f
}

pub fn decode_frame(frame: &[u8]) -> Result<(u8, &[u8])> {
    if frame.len() < 5 {
        return Err(ProtoError::Malformed(format!(
            "frame of {} bytes, need at least 5",
            frame.len()
        )));
    }
    let len = u32::from_le_bytes(frame[..4].try_into().unwrap()) as usize;
    if frame.len() != 5 + len {
        return Err(ProtoError::Malformed(format!(
            "frame length field {len} but {} payload bytes present",
            frame.len() - 5
        )));
    }
    Ok((frame[4], &frame[5..]))
}

/// A bidirectional point-to-point link carrying complete frames.
pub trait Transport: Send {
    fn send_frame(&mut self, frame: Vec<u8>) -> Result<()>;
    fn recv_frame(&mut self, timeout: Duration) -> Result<Vec<u8>>;
}

/// In-process transport over crossbeam channels; the sending side never
/// blocks, mirroring a buffered socket.
pub struct InProcTransport {
    pub tx: Sender<Vec<u8>>,
    pub rx: Receiver<Vec<u8>>,
    pub peer: String,
}

impl Transport for InProcTransport {
    fn send_frame(&mut self, frame: Vec<u8>) -> Result<()> {
        self.tx.send(frame).map_err(|_| ProtoError::Channel {
            channel: self.peer.clone(),
            msg: "peer hung up".into(),
        })
    }

    fn recv_frame(&mut self, timeout: Duration) -> Result<Vec<u8>> {
        self.rx
            .recv_timeout(timeout)
            .map_err(|_| ProtoError::Timeout(self.peer.clone()))
    }
}

pub fn in_proc_pair(a_name: &str, b_name: &str) -> (InProcTransport, InProcTransport) {
    let (tx_ab, rx_ab) = crossbeam_channel::unbounded();
    let (tx_ba, rx_ba) = crossbeam_channel::unbounded();
    (
        InProcTransport {
            tx: tx_ab,
            rx: rx_ba,
            peer: b_name.to_string(),
        },
        InProcTransport {
            tx: tx_ba,
            rx: rx_ab,
            peer: a_name.to_string(),
        },
    )
}
