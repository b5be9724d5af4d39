use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    array_factor_from_phase, beam_metrics, codeword_phase_deg, default_cut, quantize, ApertureParams,
    RisAperture, SteeringPair,
};
use super::{continuous_phase, PhyError};

/// `n x n` pre-phase matrix with entries i.i.d. uniform on `[0, 180)` degrees.
///
/// Deterministic in `(n, seed)`.
pub fn generate_pre_phase(n: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, n), |_| rng.random::<f64>() * 180.0)
}

/// Outcome of a pre-phase search.
#[derive(Debug, Clone)]
pub struct PrePhaseChoice {
    pub pre_phase: Array2<f64>,
    /// Seed that regenerates `pre_phase` through [`generate_pre_phase`].
    pub seed: u64,
    /// Smallest mirror-lobe suppression (dB below the main beam) over the
    /// steering set for the winning candidate.
    pub worst_suppression_db: f64,
    /// Score of every evaluated candidate, in seed order.
    pub candidate_scores: Vec<f64>,
}

/// Worst-case (smallest) mirror-lobe suppression across `steering_set` after
/// 1-bit quantization. Failed syntheses score `-inf`.
pub fn worst_case_suppression(aperture: &RisAperture, steering_set: &[SteeringPair]) -> f64 {
    let grid = default_cut();
    steering_set
        .iter()
        .map(|s| {
            let states = quantize(&continuous_phase(aperture, s));
            let pattern = array_factor_from_phase(aperture, &codeword_phase_deg(&states), s.incident, &grid);
            match pattern.and_then(|p| beam_metrics(&p, s.reflected)) {
                Ok(m) => m.quantization_lobe_db,
                Err(_) => f64::NEG_INFINITY,
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Random search over `candidate_count` seeded matrices (`seed`, `seed + 1`,
/// ...), keeping the one whose worst mirror lobe over `steering_set` is
/// lowest. Ties go to the earlier seed.
pub fn optimize_pre_phase(
    params: &ApertureParams,
    candidate_count: usize,
    steering_set: &[SteeringPair],
    seed: u64,
) -> Result<PrePhaseChoice, PhyError> {
    if candidate_count == 0 {
        return Err(PhyError::Argument("candidate_count must be >= 1".into()));
    }
    if steering_set.is_empty() {
        return Err(PhyError::Argument("steering_set must not be empty".into()));
    }
    params.validate()?;

    let mut best: Option<(u64, f64, Array2<f64>)> = None;
    let mut scores = Vec::with_capacity(candidate_count);
    for i in 0..candidate_count as u64 {
        let cand_seed = seed.wrapping_add(i);
        let aperture = RisAperture::seeded(*params, cand_seed)?;
        let score = worst_case_suppression(&aperture, steering_set);
        scores.push(score);
        let better = match &best {
            None => true,
            Some((_, s, _)) => score > *s,
        };
        if better {
            best = Some((cand_seed, score, aperture.pre_phase().clone()));
        }
    }
    let (seed, worst_suppression_db, pre_phase) = best.expect("at least one candidate");
    Ok(PrePhaseChoice {
        pre_phase,
        seed,
        worst_suppression_db,
        candidate_scores: scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_in_range() {
        for seed in 0..20 {
            let m = generate_pre_phase(1, seed);
            assert!((0.0..180.0).contains(&m[[0, 0]]));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate_pre_phase(16, 42), generate_pre_phase(16, 42));
        assert_ne!(generate_pre_phase(16, 42), generate_pre_phase(16, 43));
    }

    #[test]
    fn uniform_statistics() {
        // 10 seeds x 32 x 32 pooled; one-sample KS distance against U[0, 180).
        let mut samples: Vec<f64> = (0..10u64)
            .flat_map(|s| generate_pre_phase(32, 1000 + s).into_iter())
            .collect();
        assert!(samples.len() >= 10_000);
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        assert!((mean - 90.0).abs() < 5.0, "mean {mean}");
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = samples.len() as f64;
        let ks = samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = x / 180.0;
                (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "ks {ks}");
    }

    #[test]
    fn single_candidate_is_generator_output() {
        let p = ApertureParams::half_wavelength(8, 28e9);
        let set = [SteeringPair::normal_to_azimuth(30.0).unwrap()];
        let c = optimize_pre_phase(&p, 1, &set, 99).unwrap();
        assert_eq!(c.pre_phase, generate_pre_phase(8, 99));
        assert_eq!(c.seed, 99);
    }

    #[test]
    fn winner_is_never_worse_than_any_candidate() {
        let p = ApertureParams::half_wavelength(12, 28e9);
        let set: Vec<_> = [20.0, 40.0]
            .iter()
            .map(|&a| SteeringPair::normal_to_azimuth(a).unwrap())
            .collect();
        let c = optimize_pre_phase(&p, 6, &set, 5).unwrap();
        assert_eq!(c.candidate_scores.len(), 6);
        for s in &c.candidate_scores {
            assert!(c.worst_suppression_db >= *s);
        }
        let regen = RisAperture::seeded(p, c.seed).unwrap();
        assert_eq!(regen.pre_phase(), &c.pre_phase);
    }

    #[test]
    fn rejects_empty_inputs() {
        let p = ApertureParams::half_wavelength(4, 28e9);
        assert!(optimize_pre_phase(&p, 0, &[SteeringPair::normal_to_azimuth(30.0).unwrap()], 0).is_err());
        assert!(optimize_pre_phase(&p, 3, &[], 0).is_err());
    }
}
