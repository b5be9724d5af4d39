//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; the process fails if any criterion does.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risoran::e2::{decode, encode, BeamCommand, Connectivity, FrameDecoder, Message, RanEmulator, RanOptions, Target};
use risoran::harness::*;
use risoran::link::*;
use risoran::phy::*;
use risoran::scenario::{Scenario, ScenarioConfig, Waypoint};
use risoran::xapp::{classify, Algorithm, Trend};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mobility(cfg: &ScenarioConfig, opts: MobilityOptions) -> Result<(Scenario, MobilityRun), String> {
    let sc = cfg.build().map_err(|e| e.to_string())?;
    let run = run_mobility(&sc, opts).map_err(|e| e.to_string())?;
    match &run.error {
        Some(e) => Err(format!("endpoint failed: {e}")),
        None => Ok((sc, run)),
    }
}

fn preset(name: &str, alg: Algorithm) -> ScenarioConfig {
    let mut c = ScenarioConfig::preset(name).unwrap();
    c.xapp.algorithm = alg;
    c
}

fn summary(run: &MobilityRun) -> TraceSummary {
    summarize_trace(&run.trace).unwrap()
}

fn c1_area_scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let radio = RadioConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let gnb = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(0.5..10.0));
        let ue = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(0.5..10.0));
        let g = LinkGeometry::canonical(gnb, ue);
        let (area, lambda) = (rng.random_range(1e-4..1.0), rng.random_range(1e-3..1e-1));
        let (ti, td) = (rng.random_range(0.0..80.0), rng.random_range(0.0..80.0));
        let p1 = received_power(&radio, &g, bistatic_rcs(area, lambda, 1.0, ti, td)).map_err(|e| e.to_string())?;
        let p10 = received_power(&radio, &g, bistatic_rcs(10.0 * area, lambda, 1.0, ti, td)).map_err(|e| e.to_string())?;
        worst = worst.max((p10 - p1 - 20.0).abs());
    }
    check(worst <= 1e-9, format!("max |delta - 20 dB| = {worst:.2e} over 500 geometries"))
}

fn c2_rcs_consistency() -> Outcome {
    let (a, l) = (0.0304, 0.011);
    let exact = bistatic_rcs(a, l, 1.0, 0.0, 0.0) == monostatic_rcs(a, l, 1.0);
    let mut sym = true;
    for ti in [0.0, 10.0, 35.0, 60.0, 80.0] {
        for td in [0.0, 20.0, 45.0, 70.0] {
            sym &= bistatic_rcs(a, l, 0.9, ti, td) == bistatic_rcs(a, l, 0.9, td, ti);
        }
    }
    let drop = linear_to_db(bistatic_rcs(a, l, 1.0, 0.0, 60.0) / monostatic_rcs(a, l, 1.0));
    check(
        exact && sym && (drop + 3.0103).abs() < 1e-4 && (drop - 10.0 * 0.5f64.log10()).abs() < 1e-6,
        format!("bistatic(0,0)==monostatic {exact}, symmetric {sym}, theta_d=60 -> {drop:.6} dB"),
    )
}

fn lobe_suppression(ap: &RisAperture, angle: f64) -> Result<f64, String> {
    let s = SteeringPair::new(Direction::BROADSIDE, Direction::azimuth(angle)).map_err(|e| e.to_string())?;
    let cw = quantize(&continuous_phase(ap, &s));
    let p = array_factor_from_phase(ap, &codeword_phase_deg(&cw), Direction::BROADSIDE, &default_cut())
        .map_err(|e| e.to_string())?;
    beam_metrics(&p, s.reflected).map(|m| m.quantization_lobe_db).map_err(|e| e.to_string())
}

fn c3_quantization_lobe() -> Outcome {
    let params = ApertureParams::half_wavelength(32, 27.2e9);
    let angles = [20.0, 30.0, 40.0, 50.0, 60.0];
    let zero = RisAperture::without_pre_phase(params).map_err(|e| e.to_string())?;
    let before: Vec<f64> = angles.iter().map(|&a| lobe_suppression(&zero, a)).collect::<Result<_, _>>()?;
    let set: Vec<SteeringPair> = angles
        .iter()
        .map(|&a| SteeringPair::new(Direction::BROADSIDE, Direction::azimuth(a)).unwrap())
        .collect();
    let choice = optimize_pre_phase(&params, 50, &set, 1).map_err(|e| e.to_string())?;
    let opt = RisAperture::seeded(params, choice.seed).map_err(|e| e.to_string())?;
    let after: Vec<f64> = angles.iter().map(|&a| lobe_suppression(&opt, a)).collect::<Result<_, _>>()?;
    check(
        before.iter().all(|&x| x < 3.0) && after.iter().all(|&x| x > 10.0),
        format!("mirror lobe below peak, zero pre-phase {before:.2?} dB, optimized {after:.2?} dB"),
    )
}

fn c4_beamwidth() -> Outcome {
    let sc = ScenarioConfig::preset("outdoor").unwrap().build().map_err(|e| e.to_string())?;
    let cb = &sc.codebook;
    let mut hp = Vec::new();
    for cw in cb.codewords() {
        let p = array_factor(cb.aperture(), cw, cb.incident(), &default_cut()).map_err(|e| e.to_string())?;
        hp.push(beam_metrics(&p, cw.steering.reflected).map_err(|e| e.to_string())?.hpbw_deg);
    }
    let (lo, hi) = hp.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let ratio = hp[hp.len() - 1] / hp[0];
    check(
        lo >= 2.8 && hi <= 7.5 && (1.7..=2.3).contains(&ratio),
        format!("HPBW in [{lo:.2}, {hi:.2}] deg over 20-60 deg, HPBW(60)/HPBW(20) = {ratio:.3}"),
    )
}

fn c5_joint_search() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let radio = RadioConfig::default();
    let ap = RisAperture::seeded(ApertureParams::half_wavelength(8, 27.2e9), 3).map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    for k in 0..200 {
        let ue = Vec3::new(rng.random_range(0.5..4.0), rng.random_range(-1.0..1.0), rng.random_range(1.0..5.0));
        let g = LinkGeometry::canonical(Vec3::new(0.0, 0.0, 5.0), ue);
        let eval = LinkEvaluator::new(&ap, &g, &radio).map_err(|e| e.to_string())?;
        let link = eval.at(ue, None).map_err(|e| e.to_string())?;
        let (nr, nu) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let psis: Vec<_> = (0..nr).map(|i| random_interaction_vector(64, 1000 * k + i)).collect();
        let ws: Vec<_> = (0..nu).map(|_| link.ue_beam(rng.random_range(-60.0..60.0))).collect();
        let got = joint_beam_search(&psis, &ws, |w, p| link.rsrp_dbm(w, p)).map_err(|e| e.to_string())?;
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (j, w) in ws.iter().enumerate() {
            for (i, p) in psis.iter().enumerate() {
                let v = link.rsrp_dbm(w, p);
                if v > best.0 {
                    best = (v, j, i);
                }
            }
        }
        if (got.rsrp_dbm.to_bits(), got.ue_index, got.ris_index) != (best.0.to_bits(), best.1, best.2) {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("{mismatches} mismatches against brute force over 200 instances"))
}

fn c6_protocol() -> Outcome {
    let golden = include_bytes!("data/frames.bin");
    let cmd = encode(&Message::Command(BeamCommand {
        target: Target::Ris,
        beam_index: 7,
        seq: 1,
    }));
    let golden_ok = golden.windows(cmd.len()).any(|w| w == cmd.as_slice());

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let msgs: Vec<Message> = (0..10_000)
        .map(|i| {
            Message::Command(BeamCommand {
                target: [Target::Ris, Target::Ue, Target::Gnb][i % 3],
                beam_index: rng.random(),
                seq: rng.random(),
            })
        })
        .collect();
    let roundtrip = msgs.iter().all(|m| decode(&encode(m)).map(|(d, _)| &d == m).unwrap_or(false));

    let mut fuzz_frames = 0;
    for _ in 0..20_000 {
        let len = rng.random_range(0..64);
        let mut bytes: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        if rng.random_bool(0.5) && bytes.len() >= 5 {
            bytes[..4].copy_from_slice(&((len - 5) as u32).to_be_bytes());
            bytes[4] = rng.random_range(0..5);
        }
        let mut dec = FrameDecoder::new();
        dec.push(&bytes);
        while let Some(r) = dec.next_frame() {
            fuzz_frames += 1;
            if r.is_err() && dec.buffered() == 0 {
                break;
            }
        }
    }

    let mut identical = 0;
    for seed in 1..=5 {
        let mut c = preset("indoor", Algorithm::TrendTriggered);
        c.seed = seed;
        c.xapp.ue_adapt_period = 20;
        let (_, mem) = mobility(&c, MobilityOptions::default())?;
        let tcp_opts = MobilityOptions {
            transport: TransportKind::Tcp,
            ..Default::default()
        };
        let (_, tcp) = mobility(&c, tcp_opts)?;
        if mem.trace.to_csv_bytes().unwrap() == tcp.trace.to_csv_bytes().unwrap() {
            identical += 1;
        }
    }
    check(
        golden_ok && roundtrip && identical == 5,
        format!(
            "golden frame {golden_ok}, 10^4 roundtrip {roundtrip}, fuzz survived ({fuzz_frames} frames), memory==tcp traces {identical}/5"
        ),
    )
}

/// Largest |tracked center - oracle best beam| over attached ticks after the first
/// entry into tracking. The center is the latest RIS probe-cycle winner.
fn max_tracking_lag(sc: &Scenario, run: &MobilityRun) -> Result<usize, String> {
    let ran = RanEmulator::new(sc, RanOptions::default()).map_err(|e| e.to_string())?;
    let mut center: Option<usize> = None;
    let mut tracking = false;
    let mut worst = 0;
    for row in &run.trace.rows {
        for e in row.events() {
            tracking |= e.ends_with(">TRACKING");
            if let Some(rest) = e.strip_prefix("probe_done:ris:") {
                center = rest.split('>').nth(1).and_then(|w| w.parse().ok());
            }
        }
        let (Some(c), true, true) = (center, tracking, row.is_attached()) else {
            continue;
        };
        let prof = ran.true_rsrp_profile(row.timestamp_ms, row.ue_index).map_err(|e| e.to_string())?;
        let best = (0..prof.len()).max_by(|&a, &b| prof[a].total_cmp(&prof[b])).unwrap();
        worst = worst.max(best.abs_diff(c));
    }
    Ok(worst)
}

fn c7_mobility() -> Outcome {
    let (_, off) = mobility(&preset("outdoor", Algorithm::Disabled), MobilityOptions::default())?;
    let off_s = summary(&off);
    let mut one_way = preset("outdoor", Algorithm::Disabled);
    let wp: Vec<Waypoint> = one_way.trajectory.waypoints[..3].to_vec();
    one_way.trajectory.waypoints = wp;
    let (_, off_one_way) = mobility(&one_way, MobilityOptions::default())?;
    let one_way_end = off_one_way.trace.rows.last().unwrap().connectivity;

    let (sc, on) = mobility(&preset("outdoor", Algorithm::NeighborScan), MobilityOptions::default())?;
    let first = on.trace.rows.iter().position(|r| r.is_attached()).ok_or("never attached")?;
    let stays = on.trace.rows[first..].iter().all(|r| r.is_attached());
    let lag = max_tracking_lag(&sc, &on)?;
    check(
        off_s.detach_count >= 1 && one_way_end == Connectivity::Detached && stays && lag <= 1,
        format!(
            "(a) no tracking: {} detaches, 60->20 leg ends {}; (b) neighbor scan stays attached {stays}, max lag {lag} step(s)",
            off_s.detach_count,
            one_way_end.as_str()
        ),
    )
}

fn c8_resolution() -> Outcome {
    let run = |step: f64| -> Result<f64, String> {
        let mut c = preset("indoor", Algorithm::NeighborScan);
        c.xapp.ris_step_deg = step;
        let (_, r) = mobility(&c, MobilityOptions::default())?;
        summary(&r).tracked_rsrp_variance_db2.ok_or_else(|| "never tracked".to_string())
    };
    let (v1, v2) = (run(1.0)?, run(2.0)?);
    check(v1 < v2, format!("tracked RSRP variance 1 deg {v1:.2} dB^2 vs 2 deg {v2:.2} dB^2"))
}

fn c9_overhead() -> Outcome {
    let mut stable = ScenarioConfig::preset("outdoor").unwrap();
    stable.ran.noise_sigma_db = 0.0;
    stable.trajectory.duration_s = Some(30.0);
    let opts = MobilityOptions {
        ran: RanOptions { static_ue: true },
        ..Default::default()
    };
    let on_segment = |alg| -> Result<(u64, usize), String> {
        let mut c = stable.clone();
        c.xapp.algorithm = alg;
        let (_, r) = mobility(&c, opts)?;
        let seg = tracked_segment(&r.trace);
        let start = seg.first().ok_or("never tracked")?.timestamp_ms;
        let rows: Vec<TraceRow> = r.trace.window(start + 1, u64::MAX).cloned().collect();
        let n = rows.len();
        Ok((summarize_trace(&ExperimentTrace { rows }).unwrap().ris_command_count, n))
    };
    let (trend_stable, _) = on_segment(Algorithm::TrendTriggered)?;
    let (neighbor_stable, reports) = on_segment(Algorithm::NeighborScan)?;
    // A neighbour cycle spans one tracking report plus three probes.
    let periods = reports / 4;

    let (_, n) = mobility(&preset("outdoor", Algorithm::NeighborScan), MobilityOptions::default())?;
    let (_, t) = mobility(&preset("outdoor", Algorithm::TrendTriggered), MobilityOptions::default())?;
    let (cn, ct) = (summary(&n).ris_command_count, summary(&t).ris_command_count);
    check(
        trend_stable == 0 && neighbor_stable >= periods as u64 && ct < cn,
        format!(
            "stable segment: trend {trend_stable}, neighbor {neighbor_stable} over {periods} probe periods; full run: trend {ct} < neighbor {cn}"
        ),
    )
}

fn c10_ue_adaptation() -> Outcome {
    let run = |period: usize| -> Result<TraceSummary, String> {
        let mut c = preset("indoor", Algorithm::NeighborScan);
        c.xapp.ue_adapt_period = period;
        Ok(summary(&mobility(&c, MobilityOptions::default())?.1))
    };
    let (adapt, fixed) = (run(20)?, run(0)?);
    check(
        adapt.mean_rsrp_dbm >= fixed.mean_rsrp_dbm && adapt.detach_count < fixed.detach_count,
        format!(
            "adaptive UE beam mean {:.2} dBm / {} detaches vs fixed {:.2} dBm / {} detaches",
            adapt.mean_rsrp_dbm, adapt.detach_count, fixed.mean_rsrp_dbm, fixed.detach_count
        ),
    )
}

fn c11_trend() -> Outcome {
    let falling: Vec<f64> = (0..8).map(|k| -70.0 - k as f64).collect();
    let f = classify(&falling, 0.05);
    let constant = classify(&[-80.0; 8], 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut invariant = true;
    for _ in 0..1000 {
        let w: Vec<f64> = (0..8).map(|_| rng.random_range(-100.0..-60.0)).collect();
        let off = rng.random_range(-40.0..40.0);
        let shifted: Vec<f64> = w.iter().map(|x| x + off).collect();
        invariant &= classify(&w, 0.05).trend == classify(&shifted, 0.05).trend;
    }
    check(
        f.s == -28 && f.trend == Trend::Falling && constant.trend == Trend::Stable && invariant,
        format!(
            "decreasing S={} {:?}, constant {:?}, offset invariant {invariant}",
            f.s, f.trend, constant.trend
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 area scaling", c1_area_scaling),
        ("2 RCS consistency", c2_rcs_consistency),
        ("3 quantization-lobe suppression", c3_quantization_lobe),
        ("4 beamwidth envelope", c4_beamwidth),
        ("5 joint-search oracle", c5_joint_search),
        ("6 protocol conformance", c6_protocol),
        ("7 mobility reproduction", c7_mobility),
        ("8 resolution effect", c8_resolution),
        ("9 overhead ordering", c9_overhead),
        ("10 joint UE adaptation", c10_ue_adaptation),
        ("11 trend detector", c11_trend),
    ];
    let results: Vec<(&str, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(name, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
                    (name, r, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (name, r, secs) in &results {
        match r {
            Ok(d) => println!("PASS criterion {name}: {d} ({secs:.1}s)"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
