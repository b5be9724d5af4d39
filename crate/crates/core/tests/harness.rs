use risoran::e2::{Connectivity, RanOptions};
use risoran::harness::*;
use risoran::scenario::{Scenario, ScenarioConfig};
use risoran::xapp::Algorithm;

fn scenario(name: &str, alg: Algorithm) -> Scenario {
    let mut c = ScenarioConfig::preset(name).unwrap();
    c.xapp.algorithm = alg;
    c.build().unwrap()
}

#[test]
fn coverage_gain_is_positive_and_mostly_double_digit() {
    let sc = scenario("outdoor", Algorithm::NeighborScan);
    let grid = run_coverage(&sc).unwrap();
    assert!(!grid.cells.is_empty());
    for c in &grid.cells {
        assert!(c.gain_db > 0.0, "{c:?}");
        assert_eq!(c.gain_db, c.rsrp_with_ris_dbm - c.rsrp_without_ris_dbm);
        assert!(c.throughput_proxy_bps > 0.0);
    }
    let s = summarize_grid(&grid).unwrap();
    assert!(s.fraction_gain_at_least_10db > 0.5, "{}", s.fraction_gain_at_least_10db);
    let back = CoverageGrid::read_csv(&grid.to_csv_bytes().unwrap()[..]).unwrap();
    assert_eq!(back, grid);
}

#[test]
fn best_beam_follows_the_arc() {
    let sc = scenario("outdoor", Algorithm::NeighborScan);
    let grid = run_coverage(&sc).unwrap();
    for range in &sc.config.coverage.ranges_m {
        let arc = grid.arc(*range);
        assert!(arc.len() > 2);
        assert!(arc.windows(2).all(|w| w[0].azimuth_deg < w[1].azimuth_deg));
        assert!(arc.windows(2).all(|w| w[0].best_ris_index <= w[1].best_ris_index), "range {range}");
        assert!(arc[0].best_ris_index < arc[arc.len() - 1].best_ris_index);
    }
}

#[test]
fn gain_cdf_is_monotone() {
    let sc = scenario("indoor", Algorithm::NeighborScan);
    let s = summarize_grid(&run_coverage(&sc).unwrap()).unwrap();
    assert!(s.gain_cdf.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    assert!(s.gain_cdf[0].1 > 0.0);
    assert_eq!(s.gain_cdf.last().unwrap().1, 1.0);
}

#[test]
fn trace_invariants_and_reproducibility() {
    let sc = scenario("indoor", Algorithm::TrendTriggered);
    let a = run_mobility(&sc, MobilityOptions::default()).unwrap();
    assert!(a.error.is_none());
    assert_eq!(a.trace.len() as u64, sc.report_count());
    assert!(a.trace.rows.windows(2).all(|w| w[0].timestamp_ms <= w[1].timestamp_ms));
    for r in &a.trace.rows {
        assert_eq!(r.ris_angle_deg, sc.codebook.angle_of(r.ris_index));
    }
    let b = run_mobility(&sc, MobilityOptions::default()).unwrap();
    assert_eq!(a.trace.to_csv_bytes().unwrap(), b.trace.to_csv_bytes().unwrap());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    a.trace.save(&path).unwrap();
    assert_eq!(ExperimentTrace::load(&path).unwrap(), a.trace);
}

#[test]
fn static_ue_needs_no_trend_commands() {
    let mut c = ScenarioConfig::preset("outdoor").unwrap();
    c.ran.noise_sigma_db = 0.0;
    c.trajectory.duration_s = Some(30.0);
    let opts = MobilityOptions {
        ran: RanOptions { static_ue: true },
        ..Default::default()
    };
    let count = |alg| {
        let mut c = c.clone();
        c.xapp.algorithm = alg;
        let run = run_mobility(&c.build().unwrap(), opts).unwrap();
        let tracked = tracked_segment(&run.trace);
        assert!(!tracked.is_empty());
        let start = tracked[0].timestamp_ms;
        let after = ExperimentTrace {
            rows: run.trace.window(start + 1, u64::MAX).cloned().collect(),
        };
        summarize_trace(&after).unwrap().ris_command_count
    };
    assert_eq!(count(Algorithm::TrendTriggered), 0);
    assert!(count(Algorithm::NeighborScan) > 0);
}

#[test]
fn summary_serializes() {
    let sc = scenario("indoor", Algorithm::NeighborScan);
    let run = run_mobility(&sc, MobilityOptions::default()).unwrap();
    let s = Summary::Trace(summarize_trace(&run.trace).unwrap());
    let text = serde_json::to_string_pretty(&s).unwrap();
    assert!(text.contains("\"kind\": \"trace\""));
    assert_eq!(serde_json::from_str::<Summary>(&text).unwrap(), s);
    if let Summary::Trace(t) = s {
        assert_eq!(t.rows, run.trace.len());
        assert!(t.attach_count >= 1);
        assert!(t.mean_tracking_lag_deg.is_some());
        assert_eq!(
            t.final_connectivity == Connectivity::Attached,
            run.trace.rows.last().unwrap().is_attached()
        );
    }
}

#[test]
fn event_log_merge_rebuilds_the_trace() {
    let sc = scenario("indoor", Algorithm::NeighborScan);
    let run = run_mobility(&sc, MobilityOptions::default()).unwrap();
    let mut bare = run.trace.clone();
    for r in &mut bare.rows {
        r.algorithm_event.clear();
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.csv");
    EventRecord::save_all(&EventRecord::from_logged(&run.events), &path).unwrap();
    bare.merge_events(&EventRecord::load_all(&path).unwrap());
    assert_eq!(bare, run.trace);
}
