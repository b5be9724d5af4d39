//! Wire-level conformance against `tests/data/frames.bin`, written by
//! `tests/data/golden_frames.py`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risoran::e2::*;

const FRAMES: &[u8] = include_bytes!("data/frames.bin");

fn golden_messages() -> Vec<Message> {
    vec![
        Message::hello(),
        Message::Kpi(KpiReport::attached(17921, -87.25, 150, 3)),
        Message::Kpi(KpiReport::detached(200, 4)),
        Message::Command(BeamCommand {
            target: Target::Ris,
            beam_index: 7,
            seq: 1,
        }),
        Message::Command(BeamCommand {
            target: Target::Ue,
            beam_index: 2,
            seq: 9,
        }),
        Message::Ack(BeamAck {
            target: Target::Ris,
            applied_index: 7,
            seq: 1,
            timestamp_ms: 50,
            error: None,
        }),
        Message::Ack(BeamAck {
            target: Target::Gnb,
            applied_index: 0,
            seq: 10,
            timestamp_ms: 500,
            error: Some("beam 99 outside codebook".into()),
        }),
    ]
}

#[test]
fn golden_stream_bytes() {
    let bytes: Vec<u8> = golden_messages().iter().flat_map(encode).collect();
    assert_eq!(bytes, FRAMES);
}

#[test]
fn golden_stream_decodes() {
    let mut rest = FRAMES;
    let mut out = Vec::new();
    while !rest.is_empty() {
        let (m, used) = decode(rest).unwrap();
        out.push(m);
        rest = &rest[used..];
    }
    assert_eq!(out, golden_messages());
}

#[test]
fn golden_stream_byte_by_byte() {
    let mut dec = FrameDecoder::new();
    let mut out = Vec::new();
    for b in FRAMES {
        dec.push(std::slice::from_ref(b));
        while let Some(r) = dec.next_frame() {
            out.push(r.unwrap());
        }
    }
    assert_eq!(out, golden_messages());
    assert_eq!(dec.buffered(), 0);
}

fn random_message(rng: &mut ChaCha8Rng) -> Message {
    let target = [Target::Ris, Target::Ue, Target::Gnb][rng.random_range(0..3)];
    match rng.random_range(0..5) {
        0 => Message::hello(),
        1 => Message::Kpi(KpiReport::attached(
            rng.random(),
            rng.random_range(-160.0..-20.0),
            rng.random_range(0..1u64 << 40),
            rng.random(),
        )),
        2 => Message::Kpi(KpiReport::detached(rng.random_range(0..1u64 << 40), rng.random())),
        3 => Message::Command(BeamCommand {
            target,
            beam_index: rng.random(),
            seq: rng.random(),
        }),
        _ => Message::Ack(BeamAck {
            target,
            applied_index: rng.random(),
            seq: rng.random(),
            timestamp_ms: rng.random_range(0..1u64 << 40),
            error: rng.random_bool(0.3).then(|| format!("err \"{}\" \u{e9}", rng.random::<u16>())),
        }),
    }
}

#[test]
fn ten_thousand_message_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let msgs: Vec<Message> = (0..10_000).map(|_| random_message(&mut rng)).collect();
    let stream: Vec<u8> = msgs.iter().flat_map(encode).collect();
    let mut dec = FrameDecoder::new();
    let mut out = Vec::with_capacity(msgs.len());
    for chunk in stream.chunks(977) {
        dec.push(chunk);
        while let Some(r) = dec.next_frame() {
            out.push(r.unwrap());
        }
    }
    assert_eq!(out, msgs);
}

#[test]
fn mutated_frames_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5_000 {
        let mut bytes = FRAMES.to_vec();
        for _ in 0..rng.random_range(1..6) {
            let i = rng.random_range(0..bytes.len());
            match rng.random_range(0..3) {
                0 => bytes[i] = rng.random(),
                1 => {
                    bytes.remove(i);
                }
                _ => bytes.insert(i, rng.random()),
            }
        }
        let mut dec = FrameDecoder::new();
        dec.push(&bytes);
        let mut guard = 0;
        while let Some(r) = dec.next_frame() {
            guard += 1;
            assert!(guard <= bytes.len(), "decoder did not make progress");
            if matches!(r, Err(DecodeError::TooLarge(_))) {
                break;
            }
        }
    }
}

#[test]
fn garbage_between_frames_is_skipped_by_transport() {
    let (mut a, mut b) = memory_pair();
    a.send_raw(vec![0, 0, 0, 2, 9, b'{', b'}']).unwrap();
    a.send(&Message::hello()).unwrap();
    assert_eq!(b.recv().unwrap(), Some(Message::hello()));
}

#[test]
fn tcp_carries_the_golden_stream() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let sender = std::thread::spawn(move || {
        let mut t = TcpTransport::connect(addr).unwrap();
        for m in golden_messages() {
            t.send(&m).unwrap();
        }
    });
    let mut rx = TcpTransport::accept(&listener).unwrap();
    let mut out = Vec::new();
    while let Some(m) = rx.recv().unwrap() {
        out.push(m);
    }
    sender.join().unwrap();
    assert_eq!(out, golden_messages());
}
