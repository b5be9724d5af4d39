//! Golden values come from `tests/data/golden_phy.py`, a numpy evaluation that
//! shares no code with the crate.

use risoran::phy::*;
use serde_json::Value;

const GOLDEN: &str = include_str!("data/golden_phy.json");
const CODEBOOK_N8: &[u8] = include_bytes!("data/codebook_n8.risc");

fn golden() -> Value {
    serde_json::from_str(GOLDEN).unwrap()
}

fn params(n: usize) -> ApertureParams {
    ApertureParams::half_wavelength(n, golden()["carrier_frequency_hz"].as_f64().unwrap())
}

fn n8_codebook() -> Codebook {
    let ap = RisAperture::without_pre_phase(params(8)).unwrap();
    build_codebook(&ap, Direction::BROADSIDE, 20.0, 60.0, 10.0).unwrap()
}

#[test]
fn continuous_phase_n2_matches_golden() {
    let ap = RisAperture::without_pre_phase(params(2)).unwrap();
    let s = SteeringPair::new(Direction::BROADSIDE, Direction::azimuth(30.0)).unwrap();
    let phase = continuous_phase(&ap, &s);
    let g = &golden()["phase_n2_theta30_deg"];
    for m in 0..2 {
        for n in 0..2 {
            let want = g[m][n].as_f64().unwrap();
            assert!((phase[[m, n]] - want).abs() < 1e-9, "{m},{n}: {} vs {want}", phase[[m, n]]);
        }
    }
}

#[test]
fn codebook_states_match_golden() {
    let cb = n8_codebook();
    let g = golden()["codebook_n8_states"].as_array().unwrap().clone();
    assert_eq!(cb.len(), g.len());
    for (cw, want) in cb.codewords().iter().zip(&g) {
        for ((m, n), &s) in cw.states.indexed_iter() {
            assert_eq!(s as u64, want[m][n].as_u64().unwrap(), "codeword {} ({m},{n})", cw.index);
        }
    }
}

#[test]
fn codebook_file_is_byte_exact() {
    let cb = n8_codebook();
    assert_eq!(cb.to_bytes().unwrap(), CODEBOOK_N8);
    assert_eq!(Codebook::from_bytes(CODEBOOK_N8).unwrap(), cb);
}

#[test]
fn corrupted_codebook_files_rejected() {
    let mut bad = CODEBOOK_N8.to_vec();
    bad[0] = b'X';
    assert!(matches!(Codebook::from_bytes(&bad), Err(PhyError::Format(_))));
    assert!(Codebook::from_bytes(&CODEBOOK_N8[..HEADER_LEN - 1]).is_err());
    assert!(Codebook::from_bytes(&CODEBOOK_N8[..CODEBOOK_N8.len() - 1]).is_err());
    let mut version = CODEBOOK_N8.to_vec();
    version[5] = 9;
    assert!(Codebook::from_bytes(&version).is_err());
}

#[test]
fn array_factor_matches_golden() {
    let cb = n8_codebook();
    let g = golden();
    let grid: Vec<Direction> = g["af_grid_deg"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| Direction::azimuth(a.as_f64().unwrap()))
        .collect();
    let p = array_factor(cb.aperture(), &cb.codewords()[2], Direction::BROADSIDE, &grid).unwrap();
    let peak_db = 20.0 * p.peak_linear.log10();
    for (k, want) in g["af_n8_codeword2_db"].as_array().unwrap().iter().enumerate() {
        let got = p.magnitude_db[k] + peak_db;
        let want = want.as_f64().unwrap();
        assert!((got - want).abs() < 1e-9, "{}: {got} vs {want}", grid[k].cut_angle_deg());
    }
}

#[test]
fn seeded_codebook_roundtrips_through_a_file() {
    let ap = RisAperture::seeded(ApertureParams::half_wavelength(16, 27.2e9), 5).unwrap();
    let cb = build_codebook(&ap, Direction::BROADSIDE, 20.0, 60.0, 2.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cb.risc");
    cb.write_to(std::fs::File::create(&path).unwrap()).unwrap();
    let back = Codebook::read_from(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, cb);
    assert_eq!(back.aperture().pre_phase(), ap.pre_phase());
}
