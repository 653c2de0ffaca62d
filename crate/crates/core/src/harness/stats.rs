//! Summary statistics used by the sweep runner and its acceptance checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::SwitchTrace;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Ranks starting at 1, ties sharing their average rank.
fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman rank correlation. NaN when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::EmptyInput("spearman needs at least two points"));
    }
    Ok(pearson(&ranks(xs), &ranks(ys)))
}

/// Fraction of bootstrap resamples whose mean is strictly positive.
pub fn bootstrap_positive_fraction(xs: &[f64], resamples: usize, seed: u64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("bootstrap sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = xs.len();
    let mut positive = 0usize;
    for _ in 0..resamples {
        let s: f64 = (0..n).map(|_| xs[rng.random_range(0..n)]).sum();
        if s > 0.0 {
            positive += 1;
        }
    }
    Ok(positive as f64 / resamples as f64)
}

/// Mean relative shortfall `(os - cg) / os` over paired points.
pub fn average_deviation(os_values: &[f64], cg_values: &[f64]) -> Result<f64> {
    if os_values.len() != cg_values.len() {
        return Err(Error::LengthMismatch {
            left: os_values.len(),
            right: cg_values.len(),
        });
    }
    if os_values.is_empty() {
        return Err(Error::EmptyInput("average deviation"));
    }
    let mut acc = 0.0;
    for (i, (os, cg)) in os_values.iter().zip(cg_values).enumerate() {
        if os.is_nan() || *os <= 0.0 {
            return Err(Error::NonPositiveReference(i));
        }
        acc += (os - cg) / os;
    }
    Ok(acc / os_values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStats {
    pub mean: f64,
    pub std: f64,
    pub max: usize,
}

pub fn convergence_stats(traces: &[SwitchTrace]) -> Result<ConvergenceStats> {
    if traces.is_empty() {
        return Err(Error::EmptyInput("convergence traces"));
    }
    let counts: Vec<f64> = traces.iter().map(|t| t.total_switch_count as f64).collect();
    Ok(ConvergenceStats {
        mean: mean(&counts),
        std: sample_std(&counts),
        max: traces.iter().map(|t| t.total_switch_count).max().unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::SwitchRecord;
    use crate::rate::Partition;

    #[test]
    fn deviation_examples() {
        assert_eq!(average_deviation(&[5.0, 7.0], &[5.0, 7.0]).unwrap(), 0.0);
        let d = average_deviation(&[100.0, 100.0], &[99.0, 98.0]).unwrap();
        assert!((d - 0.015).abs() < 1e-15);
        assert!(matches!(
            average_deviation(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            average_deviation(&[1.0, 0.0], &[1.0, 0.0]),
            Err(Error::NonPositiveReference(1))
        ));
        assert!(average_deviation(&[], &[]).is_err());
    }

    fn trace(n: usize) -> SwitchTrace {
        let p = Partition::new(0, vec![]).unwrap();
        SwitchTrace {
            switches: (0..n)
                .map(|i| SwitchRecord {
                    iteration: i as u64,
                    pair: 0,
                    from: 1,
                    to: 2,
                    gain: 1.0,
                })
                .collect(),
            total_switch_count: n,
            iterations: n as u64,
            coalition_evaluations: 0,
            initial_partition: p.clone(),
            final_partition: p,
        }
    }

    #[test]
    fn convergence_summary() {
        let s = convergence_stats(&[trace(5)]).unwrap();
        assert_eq!((s.mean, s.std, s.max), (5.0, 0.0, 5));
        let z = convergence_stats(&[trace(0), trace(0)]).unwrap();
        assert_eq!(z.mean, 0.0);
        assert!(convergence_stats(&[]).is_err());
    }

    #[test]
    fn spearman_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[10.0, 20.0, 25.0, 100.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(ranks(&[3.0, 1.0, 3.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn std_and_bootstrap() {
        assert!((sample_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]) - 2.138089935299395).abs() < 1e-12);
        assert_eq!(bootstrap_positive_fraction(&[1.0, 2.0], 100, 0).unwrap(), 1.0);
        assert_eq!(bootstrap_positive_fraction(&[0.0, 0.0], 100, 0).unwrap(), 0.0);
    }
}
