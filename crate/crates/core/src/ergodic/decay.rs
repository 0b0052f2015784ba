//! Finite-horizon decision rule for "this Cesàro quantity tends to zero".
//!
//! Values are sampled over the last half of a trail, replaced by their tail
//! supremum (so oscillating sequences are judged by their envelope), and
//! `log value` is fitted against `log n` by least squares.

use serde::Serialize;

/// Residual/slope thresholds for declaring convergence to zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRule {
    /// Final value must be below `max_residual · scale`.
    pub max_residual: f64,
    /// Fitted log-log slope must be at most this.
    pub max_slope: f64,
    /// Tails entirely below `zero_floor · scale` count as identically zero.
    pub zero_floor: f64,
}

impl Default for ConvergenceRule {
    fn default() -> Self {
        ConvergenceRule {
            max_residual: 1e-2,
            max_slope: -0.9,
            zero_floor: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub final_value: f64,
    pub tail_max: f64,
}

impl ConvergenceRule {
    pub fn converged(&self, fit: &DecayFit, scale: f64) -> bool {
        if fit.tail_max <= self.zero_floor * scale {
            return true;
        }
        fit.final_value < self.max_residual * scale && fit.slope <= self.max_slope
    }
}

/// Sample points `n` over the last half of a horizon, ending at `n_max`.
pub fn tail_samples(n_max: usize) -> Vec<usize> {
    const POINTS: usize = 32;
    let start = (n_max + 1) / 2;
    let start = start.max(1);
    let span = n_max - start;
    let mut out: Vec<usize> = (0..=POINTS)
        .map(|j| start + span * j / POINTS)
        .collect();
    out.dedup();
    out
}

/// Fits the envelope decay of `(n, value)` pairs given in increasing `n`.
pub fn fit_decay(points: &[(usize, f64)]) -> DecayFit {
    let Some(&(_, final_value)) = points.last() else {
        return DecayFit {
            slope: f64::NAN,
            final_value: f64::NAN,
            tail_max: f64::NAN,
        };
    };
    let mut envelope = vec![0.0; points.len()];
    let mut running = 0.0f64;
    for (k, &(_, v)) in points.iter().enumerate().rev() {
        running = running.max(v.abs());
        envelope[k] = running;
    }
    let tail_max = envelope[0];
    let (mut sx, mut sy, mut sxx, mut sxy, mut cnt) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&(n, _), &e) in points.iter().zip(&envelope) {
        if e <= 0.0 {
            continue;
        }
        let x = (n as f64).ln();
        let y = e.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        cnt += 1.0;
    }
    let denom = cnt * sxx - sx * sx;
    let slope = if cnt >= 2.0 && denom > 0.0 {
        (cnt * sxy - sx * sy) / denom
    } else if final_value == 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    DecayFit {
        slope,
        final_value: final_value.abs(),
        tail_max,
    }
}

/// Restricts a full trail `values[n-1]` to the tail samples and fits it.
pub fn fit_trail(values: &[f64]) -> DecayFit {
    let pts: Vec<(usize, f64)> = tail_samples(values.len())
        .into_iter()
        .map(|n| (n, values[n - 1]))
        .collect();
    fit_decay(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_n_has_slope_minus_one() {
        let values: Vec<f64> = (1..=1000).map(|n| 3.0 / n as f64).collect();
        let fit = fit_trail(&values);
        assert!((fit.slope + 1.0).abs() < 1e-10);
        assert!((fit.final_value - 3e-3).abs() < 1e-15);
        assert!(ConvergenceRule::default().converged(&fit, 1.0));
    }

    #[test]
    fn constant_does_not_converge() {
        let values = vec![0.5; 500];
        let fit = fit_trail(&values);
        assert!(fit.slope.abs() < 1e-12);
        assert!(!ConvergenceRule::default().converged(&fit, 1.0));
    }

    #[test]
    fn oscillating_envelope_is_judged_by_its_sup() {
        // |ω^n − 1|/n with ω a cube root of unity vanishes every third n.
        let w = num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let values: Vec<f64> = (1..=3000)
            .map(|n| (w.powu(n as u32) - 1.0).norm() / n as f64)
            .collect();
        let fit = fit_trail(&values);
        assert!(fit.slope < -0.9, "slope {}", fit.slope);
        assert!(ConvergenceRule::default().converged(&fit, 1.0));
    }

    #[test]
    fn zero_tail_counts_as_converged() {
        let values = vec![0.0; 100];
        assert!(ConvergenceRule::default().converged(&fit_trail(&values), 1.0));
    }

    #[test]
    fn samples_cover_last_half() {
        let s = tail_samples(10_000);
        assert_eq!(*s.first().unwrap(), 5000);
        assert_eq!(*s.last().unwrap(), 10_000);
        assert_eq!(tail_samples(2), vec![1, 2]);
        assert_eq!(tail_samples(1), vec![1]);
    }
}
