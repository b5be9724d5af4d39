use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, Sender};

use super::codec::{encode, DecodeError, FrameDecoder};
use super::messages::Message;
use super::E2Error;

/// A bidirectional, ordered message pipe. `recv` returns `None` once the peer has
/// closed and all buffered frames are drained.
pub trait Transport: Send {
    fn send(&mut self, message: &Message) -> Result<(), E2Error>;
    fn recv(&mut self) -> Result<Option<Message>, E2Error>;
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&mut self, message: &Message) -> Result<(), E2Error> {
        (**self).send(message)
    }

    fn recv(&mut self) -> Result<Option<Message>, E2Error> {
        (**self).recv()
    }
}

/// Pull the next valid frame out of `decoder`, skipping bad ones.
fn drain_one(decoder: &mut FrameDecoder) -> Result<Option<Message>, E2Error> {
    while let Some(r) = decoder.next_frame() {
        match r {
            Ok(m) => return Ok(Some(m)),
            Err(e @ DecodeError::TooLarge(_)) => return Err(E2Error::Decode(e)),
            Err(e) => log::warn!("dropping frame: {e}"),
        }
    }
    Ok(None)
}

/// In-process transport carrying encoded frames over a channel, so both transports
/// exercise the same codec.
pub struct MemoryTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    decoder: FrameDecoder,
}

/// Two connected in-memory endpoints.
pub fn memory_pair() -> (MemoryTransport, MemoryTransport) {
    let (a_tx, b_rx) = channel();
    let (b_tx, a_rx) = channel();
    (
        MemoryTransport {
            tx: a_tx,
            rx: a_rx,
            decoder: FrameDecoder::new(),
        },
        MemoryTransport {
            tx: b_tx,
            rx: b_rx,
            decoder: FrameDecoder::new(),
        },
    )
}

impl MemoryTransport {
    /// Push raw bytes to the peer, bypassing the encoder.
    pub fn send_raw(&mut self, bytes: Vec<u8>) -> Result<(), E2Error> {
        self.tx.send(bytes).map_err(|_| E2Error::Disconnected)
    }
}

impl Transport for MemoryTransport {
    fn send(&mut self, message: &Message) -> Result<(), E2Error> {
        self.send_raw(encode(message))
    }

    fn recv(&mut self) -> Result<Option<Message>, E2Error> {
        loop {
            if let Some(m) = drain_one(&mut self.decoder)? {
                return Ok(Some(m));
            }
            match self.rx.recv() {
                Ok(bytes) => self.decoder.push(&bytes),
                Err(_) => return Ok(None),
            }
        }
    }
}

pub struct TcpTransport {
    stream: TcpStream,
    decoder: FrameDecoder,
    buf: Box<[u8]>,
}

impl TcpTransport {
    pub fn new(stream: TcpStream) -> Result<Self, E2Error> {
        stream.set_nodelay(true)?;
        Ok(TcpTransport {
            stream,
            decoder: FrameDecoder::new(),
            buf: vec![0u8; 64 * 1024].into_boxed_slice(),
        })
    }

    pub fn connect<A: ToSocketAddrs>(addr: A) -> Result<Self, E2Error> {
        Self::new(TcpStream::connect(addr)?)
    }

    pub fn accept(listener: &TcpListener) -> Result<Self, E2Error> {
        let (stream, peer) = listener.accept()?;
        log::debug!("accepted connection from {peer}");
        Self::new(stream)
    }

    /// Write raw bytes, bypassing the encoder.
    pub fn send_raw(&mut self, bytes: &[u8]) -> Result<(), E2Error> {
        self.stream.write_all(bytes)?;
        Ok(())
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, message: &Message) -> Result<(), E2Error> {
        self.send_raw(&encode(message))
    }

    fn recv(&mut self) -> Result<Option<Message>, E2Error> {
        loop {
            if let Some(m) = drain_one(&mut self.decoder)? {
                return Ok(Some(m));
            }
            let n = match self.stream.read(&mut self.buf) {
                Ok(n) => n,
                Err(e) if e.kind() == std::io::ErrorKind::Interrupted => continue,
                Err(e) if e.kind() == std::io::ErrorKind::ConnectionReset => 0,
                Err(e) => return Err(e.into()),
            };
            if n == 0 {
                if self.decoder.buffered() > 0 {
                    log::warn!("peer closed with {} undecoded bytes", self.decoder.buffered());
                }
                return Ok(None);
            }
            self.decoder.push(&self.buf[..n]);
        }
    }
}
