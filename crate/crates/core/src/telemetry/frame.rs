//! Binary wire format of the 200 Hz sensor stream and its push parser.
//!
//! One frame is 48 bytes, little-endian:
//!
//! ```text
//! 0..2    magic 0xA7 0x51
//! 2..4    sequence u16 (wraps)
//! 4..32   7 x i32 pressure, milli-Pa
//! 32..46  7 x i16 temperature, centi-degC
//! 46..48  CRC-16/CCITT-FALSE over bytes 0..46
//! ```
//!
//! The parser accepts arbitrary byte streams: it scans forward to the next
//! magic, drops frames with bad CRCs (counted, never fatal), survives
//! truncation by buffering, and reports sequence gaps.

use std::sync::mpsc::Receiver;

use thiserror::Error;

use crate::checksum::crc16_ccitt;
use crate::error::Result;
use crate::model::CHANNEL_COUNT;

pub const FRAME_MAGIC: [u8; 2] = [0xA7, 0x51];
pub const FRAME_LEN: usize = 48;

/// Sensor sample rate, Hz.
pub const SAMPLE_RATE_HZ: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WireFrame {
    pub seq: u16,
    /// milli-Pa.
    pub pressure_mpa: [i32; CHANNEL_COUNT],
    /// centi-degC.
    pub temp_cc: [i16; CHANNEL_COUNT],
}

impl WireFrame {
    pub fn from_physical(seq: u16, pressures_pa: [f64; 7], temps_c: [f64; 7]) -> WireFrame {
        let mut pressure_mpa = [0i32; 7];
        let mut temp_cc = [0i16; 7];
        for i in 0..7 {
            pressure_mpa[i] = (pressures_pa[i] * 1e3).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32;
            temp_cc[i] = (temps_c[i] * 1e2).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        }
        WireFrame {
            seq,
            pressure_mpa,
            temp_cc,
        }
    }

    pub fn pressures_pa(&self) -> [f64; 7] {
        let mut out = [0.0; 7];
        for i in 0..7 {
            out[i] = self.pressure_mpa[i] as f64 * 1e-3;
        }
        out
    }

    pub fn temps_c(&self) -> [f64; 7] {
        let mut out = [0.0; 7];
        for i in 0..7 {
            out[i] = self.temp_cc[i] as f64 * 1e-2;
        }
        out
    }
}

pub fn encode_frame(frame: &WireFrame) -> [u8; FRAME_LEN] {
    let mut buf = [0u8; FRAME_LEN];
    buf[0..2].copy_from_slice(&FRAME_MAGIC);
    buf[2..4].copy_from_slice(&frame.seq.to_le_bytes());
    for (i, p) in frame.pressure_mpa.iter().enumerate() {
        buf[4 + 4 * i..8 + 4 * i].copy_from_slice(&p.to_le_bytes());
    }
    for (i, t) in frame.temp_cc.iter().enumerate() {
        buf[32 + 2 * i..34 + 2 * i].copy_from_slice(&t.to_le_bytes());
    }
    let crc = crc16_ccitt(&buf[..FRAME_LEN - 2]);
    buf[FRAME_LEN - 2..].copy_from_slice(&crc.to_le_bytes());
    buf
}

/// Why a frame could not be decoded at the start of a slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("need more bytes: have {have} of {FRAME_LEN}")]
    NeedMoreBytes { have: usize },
    #[error("bad magic")]
    BadMagic,
    #[error("crc mismatch: stored {stored:04x}, computed {computed:04x}")]
    BadCrc { stored: u16, computed: u16 },
}

/// Decode one frame from the *start* of `bytes`.
pub fn decode_frame(bytes: &[u8]) -> std::result::Result<WireFrame, FrameError> {
    if bytes.len() >= 2 && bytes[0..2] != FRAME_MAGIC {
        return Err(FrameError::BadMagic);
    }
    if bytes.len() < FRAME_LEN {
        return Err(FrameError::NeedMoreBytes { have: bytes.len() });
    }
    let stored = u16::from_le_bytes([bytes[46], bytes[47]]);
    let computed = crc16_ccitt(&bytes[..FRAME_LEN - 2]);
    if stored != computed {
        return Err(FrameError::BadCrc { stored, computed });
    }
    let seq = u16::from_le_bytes([bytes[2], bytes[3]]);
    let mut pressure_mpa = [0i32; 7];
    for (i, chunk) in bytes[4..32].chunks_exact(4).enumerate() {
        pressure_mpa[i] = i32::from_le_bytes(chunk.try_into().unwrap());
    }
    let mut temp_cc = [0i16; 7];
    for (i, chunk) in bytes[32..46].chunks_exact(2).enumerate() {
        temp_cc[i] = i16::from_le_bytes(chunk.try_into().unwrap());
    }
    Ok(WireFrame {
        seq,
        pressure_mpa,
        temp_cc,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParserStats {
    pub frames: u64,
    pub crc_errors: u64,
    /// Contiguous runs of discarded bytes.
    pub resyncs: u64,
    pub bytes_fed: u64,
    pub bytes_skipped: u64,
    /// Frames lost according to sequence-number gaps.
    pub missing_frames: u64,
}

/// Stateful push parser; owned by a single consumer.
#[derive(Debug, Default)]
pub struct FrameParser {
    buf: Vec<u8>,
    stats: ParserStats,
    last_seq: Option<u16>,
    in_skip_run: bool,
}

impl FrameParser {
    pub fn new() -> FrameParser {
        FrameParser::default()
    }

    pub fn stats(&self) -> ParserStats {
        self.stats
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    fn note_skip(&mut self, n: usize) {
        if n == 0 {
            return;
        }
        if !self.in_skip_run {
            self.stats.resyncs += 1;
            self.in_skip_run = true;
        }
        self.stats.bytes_skipped += n as u64;
    }

    /// Feed bytes; returns every frame completed by them.
    pub fn push(&mut self, bytes: &[u8]) -> Vec<WireFrame> {
        self.stats.bytes_fed += bytes.len() as u64;
        self.buf.extend_from_slice(bytes);
        let mut frames = Vec::new();

        loop {
            // Align the buffer on a magic pair.
            match find_magic(&self.buf) {
                MagicScan::At(0) => {}
                MagicScan::At(pos) => {
                    self.note_skip(pos);
                    self.buf.drain(..pos);
                }
                MagicScan::TrailingFirstByte => {
                    let keep = self.buf.len() - 1;
                    self.note_skip(keep);
                    self.buf.drain(..keep);
                    break;
                }
                MagicScan::None => {
                    self.note_skip(self.buf.len());
                    self.buf.clear();
                    break;
                }
            }
            if self.buf.len() < FRAME_LEN {
                break;
            }
            match decode_frame(&self.buf[..FRAME_LEN]) {
                Ok(frame) => {
                    if let Some(last) = self.last_seq {
                        self.stats.missing_frames +=
                            frame.seq.wrapping_sub(last).wrapping_sub(1) as u64;
                    }
                    self.last_seq = Some(frame.seq);
                    self.stats.frames += 1;
                    self.in_skip_run = false;
                    self.buf.drain(..FRAME_LEN);
                    frames.push(frame);
                }
                Err(FrameError::BadCrc { .. }) => {
                    // Drop the false start and rescan inside its bytes.
                    self.stats.crc_errors += 1;
                    self.note_skip(1);
                    self.buf.drain(..1);
                }
                Err(FrameError::NeedMoreBytes { .. }) | Err(FrameError::BadMagic) => break,
            }
        }
        frames
    }

    /// Bytes in == bytes consumed + bytes still buffered.
    pub fn accounting_balanced(&self) -> bool {
        self.stats.bytes_fed
            == self.stats.frames * FRAME_LEN as u64
                + self.stats.bytes_skipped
                + self.buf.len() as u64
    }
}

enum MagicScan {
    At(usize),
    /// Buffer ends with a lone first magic byte; wait for its partner.
    TrailingFirstByte,
    None,
}

fn find_magic(buf: &[u8]) -> MagicScan {
    if buf.is_empty() {
        return MagicScan::None;
    }
    let mut i = 0;
    while i + 1 < buf.len() {
        if buf[i] == FRAME_MAGIC[0] && buf[i + 1] == FRAME_MAGIC[1] {
            return MagicScan::At(i);
        }
        i += 1;
    }
    if buf[buf.len() - 1] == FRAME_MAGIC[0] {
        MagicScan::TrailingFirstByte
    } else {
        MagicScan::None
    }
}

/// Drain a bounded producer/consumer byte handoff into a parser. Producers
/// send chunks through a `std::sync::mpsc::sync_channel` (bounded, blocking
/// on full, FIFO); the call returns once every sender is dropped.
pub fn parse_from_channel(rx: Receiver<Vec<u8>>) -> (Vec<WireFrame>, ParserStats) {
    let mut parser = FrameParser::new();
    let mut frames = Vec::new();
    while let Ok(chunk) = rx.recv() {
        frames.extend(parser.push(&chunk));
    }
    (frames, parser.stats())
}

/// Serialize frames back-to-back (the replay file format).
pub fn write_replay_bytes(frames: &[WireFrame]) -> Vec<u8> {
    let mut out = Vec::with_capacity(frames.len() * FRAME_LEN);
    for f in frames {
        out.extend_from_slice(&encode_frame(f));
    }
    out
}

/// Parse a whole replay byte blob.
pub fn read_replay_bytes(bytes: &[u8]) -> (Vec<WireFrame>, ParserStats) {
    let mut parser = FrameParser::new();
    let mut frames = Vec::new();
    for chunk in bytes.chunks(4096) {
        frames.extend(parser.push(chunk));
    }
    (frames, parser.stats())
}

pub fn write_replay_file(frames: &[WireFrame], path: &std::path::Path) -> Result<()> {
    std::fs::write(path, write_replay_bytes(frames))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_frame(seq: u16) -> WireFrame {
        WireFrame::from_physical(
            seq,
            [101.25, -3.5, 0.0, 7.125, -0.001, 55.0, 2.25],
            [21.5, 21.5, 21.75, 22.0, 21.0, 20.5, 23.25],
        )
    }

    #[test]
    fn frame_is_48_bytes_and_round_trips() {
        let f = sample_frame(777);
        let bytes = encode_frame(&f);
        assert_eq!(bytes.len(), FRAME_LEN);
        assert_eq!(decode_frame(&bytes).unwrap(), f);
        assert_eq!(f.pressures_pa()[0], 101.25);
        assert_eq!(f.temps_c()[3], 22.0);
    }

    #[test]
    fn truncated_and_garbage_inputs_signal_properly() {
        let bytes = encode_frame(&sample_frame(1));
        assert!(matches!(
            decode_frame(&bytes[..10]),
            Err(FrameError::NeedMoreBytes { have: 10 })
        ));
        assert!(matches!(decode_frame(&[0u8; 48]), Err(FrameError::BadMagic)));
    }

    #[test]
    fn single_byte_flips_never_decode() {
        let bytes = encode_frame(&sample_frame(42));
        for pos in 0..FRAME_LEN {
            for flip in [0xFFu8, 0x01, 0x80] {
                let mut bad = bytes;
                bad[pos] ^= flip;
                assert!(
                    decode_frame(&bad).is_err(),
                    "flip {flip:02x} at byte {pos} decoded"
                );
            }
        }
    }

    #[test]
    fn parser_recovers_frames_around_garbage() {
        let mut stream = Vec::new();
        stream.extend_from_slice(&encode_frame(&sample_frame(10)));
        stream.extend_from_slice(&[0u8, 1, 2, 3, 4]);
        stream.extend_from_slice(&encode_frame(&sample_frame(11)));
        stream.extend_from_slice(&encode_frame(&sample_frame(12)));

        let mut parser = FrameParser::new();
        let frames = parser.push(&stream);
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[0].seq, 10);
        assert_eq!(frames[2].seq, 12);
        let stats = parser.stats();
        assert_eq!(stats.resyncs, 1);
        assert_eq!(stats.bytes_skipped, 5);
        assert_eq!(stats.missing_frames, 0);
        assert!(parser.accounting_balanced());
    }

    #[test]
    fn parser_handles_split_pushes() {
        let bytes = encode_frame(&sample_frame(3));
        let mut parser = FrameParser::new();
        for b in &bytes[..47] {
            assert!(parser.push(std::slice::from_ref(b)).is_empty());
        }
        let frames = parser.push(&bytes[47..]);
        assert_eq!(frames.len(), 1);
        assert!(parser.accounting_balanced());
    }

    #[test]
    fn sequence_gaps_are_counted_exactly() {
        let mut parser = FrameParser::new();
        let mut stream = Vec::new();
        for seq in [0u16, 1, 2, 6, 7] {
            stream.extend_from_slice(&encode_frame(&sample_frame(seq)));
        }
        parser.push(&stream);
        assert_eq!(parser.stats().missing_frames, 3);

        // Wraparound gap.
        let mut parser = FrameParser::new();
        let mut stream = Vec::new();
        for seq in [65534u16, 65535, 2] {
            stream.extend_from_slice(&encode_frame(&sample_frame(seq)));
        }
        parser.push(&stream);
        assert_eq!(parser.stats().missing_frames, 2);
    }

    #[test]
    fn corrupted_frame_dropped_then_resyncs() {
        let mut stream = Vec::new();
        let mut bad = encode_frame(&sample_frame(5));
        bad[20] ^= 0xFF;
        stream.extend_from_slice(&bad);
        stream.extend_from_slice(&encode_frame(&sample_frame(6)));
        let mut parser = FrameParser::new();
        let frames = parser.push(&stream);
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].seq, 6);
        assert_eq!(parser.stats().crc_errors, 1);
        assert!(parser.accounting_balanced());
    }

    #[test]
    fn random_fuzz_never_panics_and_balances() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut parser = FrameParser::new();
        for _ in 0..200 {
            let len = rng.random_range(0..512);
            let chunk: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            let _ = parser.push(&chunk);
            assert!(parser.accounting_balanced());
        }
    }

    #[test]
    fn bounded_channel_feed_preserves_order() {
        let frames: Vec<WireFrame> = (0..50).map(sample_frame).collect();
        let bytes = write_replay_bytes(&frames);
        let (tx, rx) = std::sync::mpsc::sync_channel::<Vec<u8>>(4);
        let producer = std::thread::spawn(move || {
            for chunk in bytes.chunks(17) {
                tx.send(chunk.to_vec()).unwrap();
            }
        });
        let (decoded, stats) = parse_from_channel(rx);
        producer.join().unwrap();
        assert_eq!(decoded, frames);
        assert_eq!(stats.frames, 50);
        assert_eq!(stats.missing_frames, 0);
    }

    #[test]
    fn replay_round_trip() {
        let frames: Vec<WireFrame> = (100..110).map(sample_frame).collect();
        let bytes = write_replay_bytes(&frames);
        let (back, stats) = read_replay_bytes(&bytes);
        assert_eq!(back, frames);
        assert_eq!(stats.resyncs, 0);
    }
}
