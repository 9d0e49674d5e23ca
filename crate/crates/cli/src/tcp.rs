//! TCP transport with u32-length-prefixed frames. The frame bytes on the
//! wire are exactly the in-process frames, so payload streams are
//! byte-identical across transports under a fixed seed.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{channel, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use sha2::{Digest, Sha256};
use threepc::channel::Transport;
use threepc::{ProtoError, Result};

/// One end of a TCP link. Sends are handed to a writer thread so the
/// protocol thread never blocks on a full socket buffer, mirroring the
/// non-blocking in-process channel.
pub struct TcpTransport {
    tx: Option<Sender<Vec<u8>>>,
    reader: TcpStream,
    writer: Option<JoinHandle<()>>,
    peer: String,
}

impl TcpTransport {
    pub fn new(stream: TcpStream, peer: &str) -> std::io::Result<Self> {
        stream.set_nodelay(true)?;
        let mut write_half = stream.try_clone()?;
        let (tx, rx) = channel::<Vec<u8>>();
        let writer = std::thread::spawn(move || {
            while let Ok(frame) = rx.recv() {
                let mut buf = Vec::with_capacity(4 + frame.len());
                buf.extend_from_slice(&(frame.len() as u32).to_le_bytes());
                buf.extend_from_slice(&frame);
                if write_half.write_all(&buf).is_err() {
                    break;
                }
            }
        });
        Ok(TcpTransport {
            tx: Some(tx),
            reader: stream,
            writer: Some(writer),
            peer: peer.to_string(),
        })
    }

    fn read_exact_timeout(&mut self, buf: &mut [u8]) -> Result<()> {
        self.reader.read_exact(buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut => {
                ProtoError::Timeout(self.peer.clone())
            }
            _ => ProtoError::Channel {
                channel: self.peer.clone(),
                msg: e.to_string(),
            },
        })
    }
}

impl Transport for TcpTransport {
    fn send_frame(&mut self, frame: Vec<u8>) -> Result<()> {
        self.tx
            .as_ref()
            .expect("writer alive until drop")
            .send(frame)
            .map_err(|_| ProtoError::Channel {
                channel: self.peer.clone(),
                msg: "writer thread exited".into(),
            })
    }

    fn recv_frame(&mut self, timeout: Duration) -> Result<Vec<u8>> {
        self.reader
            .set_read_timeout(Some(timeout))
            .map_err(|e| ProtoError::Channel {
                channel: self.peer.clone(),
                msg: e.to_string(),
            })?;
        let mut len = [0u8; 4];
        self.read_exact_timeout(&mut len)?;
        let n = u32::from_le_bytes(len) as usize;
        let mut frame = vec![0u8; n];
        self.read_exact_timeout(&mut frame)?;
        Ok(frame)
    }
}

impl Drop for TcpTransport {
    fn drop(&mut self) {
        drop(self.tx.take());
        if let Some(h) = self.writer.take() {
            let _ = h.join();
        }
    }
}

/// A connected localhost pair, named after the parties at each end.
pub fn tcp_pair(a_name: &str, b_name: &str) -> std::io::Result<(TcpTransport, TcpTransport)> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let connector = std::thread::spawn(move || TcpStream::connect(addr));
    let (accepted, _) = listener.accept()?;
    let connected = connector.join().expect("connector thread panicked")?;
    Ok((
        TcpTransport::new(connected, b_name)?,
        TcpTransport::new(accepted, a_name)?,
    ))
}

/// Running digest of every frame sent through a transport; used to check
/// that different transports carry byte-identical streams.
pub struct DigestingTransport {
    inner: Box<dyn Transport>,
    hash: Arc<Mutex<Sha256>>,
}

impl DigestingTransport {
    pub fn new(inner: Box<dyn Transport>) -> (Self, Arc<Mutex<Sha256>>) {
        let hash = Arc::new(Mutex::new(Sha256::new()));
        (
            DigestingTransport {
                inner,
                hash: hash.clone(),
            },
            hash,
        )
    }
}

impl Transport for DigestingTransport {
    fn send_frame(&mut self, frame: Vec<u8>) -> Result<()> {
        self.hash.lock().unwrap().update(&frame);
        self.inner.send_frame(frame)
    }

    fn recv_frame(&mut self, timeout: Duration) -> Result<Vec<u8>> {
        self.inner.recv_frame(timeout)
    }
}

pub fn finish_digest(hash: &Arc<Mutex<Sha256>>) -> [u8; 32] {
    hash.lock().unwrap().clone().finalize().into()
}
