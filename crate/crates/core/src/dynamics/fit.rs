use serde::{Deserialize, Serialize};

use super::trials::{TrialField, TrialLog};
use crate::Error;

/// Piecewise quadratic `y = a x² + b x + c` over equal-width knot spans,
/// continuous at the knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseQuadratic {
    pub knots: Vec<f64>,
    /// `[a, b, c]` per segment, in the raw input coordinate.
    pub coefficients: Vec<[f64; 3]>,
    /// Root-mean-square residual over the fitted samples.
    pub rms_residual: f64,
}

impl PiecewiseQuadratic {
    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Evaluates at `x`, clamped to the fitted domain.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let seg = self.knots[1..self.knots.len() - 1].iter().take_while(|k| x >= **k).count();
        let [a, b, c] = self.coefficients[seg];
        (a * x + b) * x + c
    }

    /// Largest jump between neighbouring segments at the interior knots.
    pub fn max_knot_jump(&self) -> f64 {
        (1..self.coefficients.len())
            .map(|i| {
                let k = self.knots[i];
                let eval = |[a, b, c]: [f64; 3]| (a * k + b) * k + c;
                (eval(self.coefficients[i - 1]) - eval(self.coefficients[i])).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Least-squares piecewise quadratic through `(x, y)` samples, continuous at
/// the knots.
///
/// The fit is solved jointly in the basis `1, t, t², (t−κ)₊, (t−κ)₊²` over
/// the interior knots `κ` of the scaled input `t ∈ [0, 1]`, so neighbouring
/// segments agree in value but may differ in slope.
pub fn fit_samples(samples: &[(f64, f64)], segments: usize) -> Result<PiecewiseQuadratic, Error> {
    if segments == 0 || samples.len() < 3 * segments {
        return Err(Error::Fit(format!("need at least {} samples for {segments} segments, got {}", 3 * segments, samples.len())));
    }
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-12) {
        return Err(Error::Fit("input range is degenerate".into()));
    }
    let width = (hi - lo) / segments as f64;
    let knots: Vec<f64> = (0..=segments).map(|i| if i == segments { hi } else { lo + width * i as f64 }).collect();
    for s in 0..segments {
        let mut xs: Vec<f64> = samples.iter().map(|p| p.0).filter(|x| *x > knots[s] && *x <= knots[s + 1]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 2 {
            return Err(Error::Fit(format!("segment {s} has too few distinct samples")));
        }
    }

    let span = hi - lo;
    let inner: Vec<f64> = (1..segments).map(|i| i as f64 / segments as f64).collect();
    let n = 3 + 2 * inner.len();
    let basis = |t: f64| {
        let mut b = vec![1.0, t, t * t];
        for &k in &inner {
            let d = (t - k).max(0.0);
            b.push(d);
            b.push(d * d);
        }
        b
    };
    let mut m = vec![vec![0.0; n + 1]; n];
    for &(x, y) in samples {
        let b = basis((x - lo) / span);
        for r in 0..n {
            for c in 0..n {
                m[r][c] += b[r] * b[c];
            }
            m[r][n] += b[r] * y;
        }
    }
    let w = solve(m).ok_or_else(|| Error::Fit("normal equations are singular".into()))?;

    // Collect the active basis terms of each segment into `A t² + B t + C`,
    // then map back to the raw input.
    let coefficients: Vec<[f64; 3]> = (0..segments)
        .map(|s| {
            let (mut qa, mut qb, mut qc) = (w[2], w[1], w[0]);
            for (i, &k) in inner.iter().enumerate().take(s) {
                let (d, e) = (w[3 + 2 * i], w[4 + 2 * i]);
                qa += e;
                qb += d - 2.0 * e * k;
                qc += -d * k + e * k * k;
            }
            let s2 = span * span;
            [qa / s2, qb / span - 2.0 * qa * lo / s2, qa * lo * lo / s2 - qb * lo / span + qc]
        })
        .collect();
    let fit = PiecewiseQuadratic { knots, coefficients, rms_residual: 0.0 };
    let sq_sum: f64 = samples.iter().map(|&(x, y)| (fit.eval(x) - y).powi(2)).sum();
    Ok(PiecewiseQuadratic { rms_residual: (sq_sum / samples.len() as f64).sqrt(), ..fit })
}

/// Fits a trial log column against another.
pub fn fit_piecewise_quadratic(
    log: &TrialLog,
    x: TrialField,
    y: TrialField,
    segments: usize,
) -> Result<PiecewiseQuadratic, Error> {
    let pts: Vec<(f64, f64)> = log.samples.iter().map(|s| (s.get(x), s.get(y))).collect();
    fit_samples(&pts, segments)
}

/// Gauss-Jordan elimination with partial pivoting on an augmented matrix.
fn solve(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_quadratic_recovered() {
        let pts: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = -3.0 + 0.13 * i as f64;
                (x, 2.0 * x * x - x + 1.0)
            })
            .collect();
        let f = fit_samples(&pts, 1).unwrap();
        let [a, b, c] = f.coefficients[0];
        assert!((a - 2.0).abs() < 1e-9 && (b + 1.0).abs() < 1e-9 && (c - 1.0).abs() < 1e-9);
        assert!(f.rms_residual < 1e-9);
    }

    #[test]
    fn absolute_value_two_segments() {
        let pts: Vec<(f64, f64)> = (0..=40).map(|i| -1.0 + 0.05 * i as f64).map(|x| (x, x.abs())).collect();
        let f = fit_samples(&pts, 2).unwrap();
        assert_eq!(f.knots[1], 0.0);
        assert!(f.rms_residual < 1e-12);
        let [a0, b0, c0] = f.coefficients[0];
        let [a1, b1, c1] = f.coefficients[1];
        assert!(a0.abs() < 1e-9 && (b0 + 1.0).abs() < 1e-9 && c0.abs() < 1e-9);
        assert!(a1.abs() < 1e-9 && (b1 - 1.0).abs() < 1e-9 && c1.abs() < 1e-9);
    }

    #[test]
    fn noisy_quadratic_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<(f64, f64)> = (0..400)
            .map(|i| {
                let x = i as f64 / 100.0;
                // Box-Muller, σ = 0.01.
                let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-12), rng.gen());
                let n = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                (x, 0.5 * x * x + 0.3 + 0.01 * n)
            })
            .collect();
        let f = fit_samples(&pts, 4).unwrap();
        assert!(f.rms_residual <= 0.02, "rms {}", f.rms_residual);
    }

    #[test]
    fn insufficient_samples_rejected() {
        let pts = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 4.0)];
        assert!(fit_samples(&pts, 4).is_err());
        let flat = vec![(1.0, 0.0); 20];
        assert!(fit_samples(&flat, 1).is_err());
    }
}
