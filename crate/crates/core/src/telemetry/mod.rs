//! Binary telemetry stream: wire frames, robust parsing, compensation,
//! replay, and fatigue-log analysis.

pub mod compensate;
pub mod fatigue;
pub mod frame;

pub use compensate::{compensate, CompensateConfig};
pub use fatigue::{
    analyze_fatigue, rows_from_csv, rows_to_csv, synth_fatigue_log, FatigueCycle,
    FatigueReport, FatigueRow, DISCARDED_INITIAL_CYCLES, FATIGUE_CSV_HEADER,
};
pub use frame::{
    decode_frame, encode_frame, parse_from_channel, read_replay_bytes, write_replay_bytes,
    write_replay_file, FrameError, FrameParser, ParserStats, WireFrame, FRAME_LEN,
    FRAME_MAGIC, SAMPLE_RATE_HZ,
};
