use std::collections::VecDeque;

use statrs::distribution::{ContinuousCDF, Normal};

/// Below this window length the exact null distribution of S is used.
const EXACT_BELOW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trend {
    Falling,
    Stable,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Falling => "FALLING",
            Trend::Stable => "STABLE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendResult {
    /// Mann-Kendall S of the smoothed window.
    pub s: i64,
    /// Tie-corrected variance of S under no trend.
    pub variance: f64,
    /// One-sided p-value for a falling trend.
    pub p_value: f64,
    pub trend: Trend,
}

/// Centered 3-point moving average; the two ends average over the available pair.
pub fn moving_average3(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            x[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}

/// S = sum over i < j of sign(x_j - x_i).
pub fn mann_kendall_s(x: &[f64]) -> i64 {
    let mut s = 0i64;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            s += match x[j].partial_cmp(&x[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    s
}

/// Var(S) with the standard correction for tied groups.
pub fn mann_kendall_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        ties += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    (n * (n - 1.0) * (2.0 * n + 5.0) - ties) / 18.0
}

/// P(S <= s) for n untied values, from the inversion-count distribution.
fn exact_lower_tail(n: usize, s: i64) -> f64 {
    let pairs = n * (n - 1) / 2;
    // counts[k] = permutations of n with k inversions.
    let mut counts = vec![0f64; pairs + 1];
    counts[0] = 1.0;
    for m in 2..=n {
        let mut next = vec![0f64; pairs + 1];
        for (k, &c) in counts.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for extra in 0..m {
                if k + extra <= pairs {
                    next[k + extra] += c;
                }
            }
        }
        counts = next;
    }
    let total: f64 = counts.iter().sum();
    // S = pairs - 2 * inversions.
    let tail: f64 = counts
        .iter()
        .enumerate()
        .filter(|(k, _)| pairs as i64 - 2 * *k as i64 <= s)
        .map(|(_, c)| c)
        .sum();
    tail / total
}

/// Smooth `window` and test it for a falling trend at level `alpha`.
pub fn classify(window: &[f64], alpha: f64) -> TrendResult {
    let smoothed = moving_average3(window);
    let s = mann_kendall_s(&smoothed);
    let variance = mann_kendall_variance(&smoothed);
    let p_value = if s >= 0 || variance <= 0.0 {
        1.0
    } else if smoothed.len() < EXACT_BELOW {
        exact_lower_tail(smoothed.len(), s)
    } else {
        // Continuity-corrected normal approximation.
        let z = (s as f64 + 1.0) / variance.sqrt();
        Normal::standard().cdf(z)
    };
    TrendResult {
        s,
        variance,
        p_value,
        trend: if p_value <= alpha {
            Trend::Falling
        } else {
            Trend::Stable
        },
    }
}

/// Sliding window of the most recent RSRP samples.
#[derive(Debug, Clone)]
pub struct TrendDetector {
    window: VecDeque<f64>,
    size: usize,
    alpha: f64,
}

impl TrendDetector {
    pub fn new(size: usize, alpha: f64) -> Self {
        TrendDetector {
            window: VecDeque::with_capacity(size),
            size,
            alpha,
        }
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    pub fn clear(&mut self) {
        self.window.clear();
    }

    /// Add a sample; returns a verdict once the window is full.
    pub fn push(&mut self, rsrp_dbm: f64) -> Option<TrendResult> {
        if self.window.len() == self.size {
            self.window.pop_front();
        }
        self.window.push_back(rsrp_dbm);
        (self.window.len() == self.size).then(|| classify(self.window.make_contiguous(), self.alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FALL: [f64; 8] = [-80.0, -81.0, -82.0, -83.0, -84.0, -85.0, -86.0, -87.0];

    #[test]
    fn strictly_decreasing_window() {
        let r = classify(&FALL, 0.05);
        assert_eq!(r.s, -28);
        assert_eq!(r.trend, Trend::Falling);
        // No ties: n(n-1)(2n+5)/18.
        assert!((r.variance - 8.0 * 7.0 * 21.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn constant_and_rising_are_stable() {
        let r = classify(&[-80.0; 8], 0.05);
        assert_eq!((r.s, r.trend), (0, Trend::Stable));
        let rising: Vec<f64> = FALL.iter().rev().copied().collect();
        let r = classify(&rising, 0.05);
        assert!(r.s > 0);
        assert_eq!(r.trend, Trend::Stable);
    }

    #[test]
    fn smoothing_keeps_length() {
        let y = moving_average3(&[0.0, 3.0, 6.0, 0.0]);
        assert_eq!(y, vec![1.5, 3.0, 3.0, 3.0]);
        assert_eq!(moving_average3(&[2.0]), vec![2.0]);
    }

    #[test]
    fn tie_correction() {
        // Groups {1,1} and {2,2,2}: ties = 2*1*9 + 3*2*11 = 84.
        let x = [1.0, 1.0, 2.0, 2.0, 2.0];
        assert!((mann_kendall_variance(&x) - (5.0 * 4.0 * 15.0 - 84.0) / 18.0).abs() < 1e-12);
    }

    #[test]
    fn exact_tail_small_n() {
        // n = 3: S in {3, 1, 1, -1, -1, -3} with counts 1, 2, 2, 1.
        assert!((exact_lower_tail(3, -3) - 1.0 / 6.0).abs() < 1e-15);
        assert!((exact_lower_tail(3, -1) - 3.0 / 6.0).abs() < 1e-15);
        assert!((exact_lower_tail(4, -6) - 1.0 / 24.0).abs() < 1e-15);
        // Three points can never reach 5 %.
        assert_eq!(classify(&[3.0, 2.0, 1.0], 0.05).trend, Trend::Stable);
        assert_eq!(classify(&[5.0, 4.0, 3.0, 2.0, 1.0], 0.05).trend, Trend::Falling);
    }

    #[test]
    fn detector_fills_then_slides() {
        let mut d = TrendDetector::new(8, 0.05);
        for x in &FALL[..7] {
            assert!(d.push(*x).is_none());
        }
        assert_eq!(d.push(FALL[7]).unwrap().s, -28);
        assert_eq!(d.len(), 8);
        d.clear();
        assert!(d.push(-80.0).is_none());
    }

    proptest! {
        #[test]
        fn offset_invariant(
            xs in proptest::collection::vec((-110i32..-60).prop_map(f64::from), 3..16),
            c in (-40i32..40).prop_map(f64::from),
        ) {
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let (a, b) = (classify(&xs, 0.05), classify(&shifted, 0.05));
            prop_assert_eq!(a.s, b.s);
            prop_assert_eq!(a.trend, b.trend);
        }

        #[test]
        fn s_is_antisymmetric(xs in proptest::collection::vec(-100.0f64..-60.0, 2..16)) {
            let rev: Vec<f64> = xs.iter().rev().copied().collect();
            prop_assert_eq!(mann_kendall_s(&xs), -mann_kendall_s(&rev));
        }
    }
}
