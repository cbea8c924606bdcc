//! Four-parameter logistic mapping from metric scores to MOS,
//! `β1·(½ − 1/(1 + exp(β2·(s − β3)))) + β4`, fitted by Levenberg–Marquardt.

use nalgebra::{Matrix4, Vector4};

use crate::{Error, Result};

const MAX_ITERATIONS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Logistic4 {
    pub beta: [f64; 4],
}

/// `1 / (1 + exp(z))` without overflow.
fn inv_one_plus_exp(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

impl Logistic4 {
    pub fn eval(&self, s: f64) -> f64 {
        let [b1, b2, b3, b4] = self.beta;
        b1 * (0.5 - inv_one_plus_exp(b2 * (s - b3))) + b4
    }

    fn gradient(&self, s: f64) -> Vector4<f64> {
        let [b1, b2, b3, _] = self.beta;
        let g = inv_one_plus_exp(b2 * (s - b3));
        let slope = b1 * g * (1.0 - g);
        Vector4::new(0.5 - g, slope * (s - b3), -slope * b2, 1.0)
    }

    /// Starting point: `β1 = range(mos)`, `β2 = 1/std(scores)`,
    /// `β3 = mean(scores)`, `β4 = mean(mos)`.
    pub fn initial(scores: &[f64], mos: &[f64]) -> Result<Self> {
        let n = scores.len() as f64;
        let mean_s = scores.iter().sum::<f64>() / n;
        let std_s = (scores.iter().map(|s| (s - mean_s).powi(2)).sum::<f64>() / n).sqrt();
        if !(std_s > 0.0) {
            return Err(Error::Fit("scores have zero variance".into()));
        }
        let (lo, hi) = mos
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(*m), hi.max(*m)));
        let mean_m = mos.iter().sum::<f64>() / n;
        Ok(Self {
            beta: [hi - lo, 1.0 / std_s, mean_s, mean_m],
        })
    }

    fn sse(&self, scores: &[f64], mos: &[f64]) -> f64 {
        scores
            .iter()
            .zip(mos)
            .map(|(s, m)| (m - self.eval(*s)).powi(2))
            .sum()
    }

    /// Least-squares fit of the logistic to `(scores, mos)`.
    pub fn fit(scores: &[f64], mos: &[f64]) -> Result<Self> {
        if scores.len() != mos.len() {
            return Err(Error::Shape(format!("length {} vs {}", scores.len(), mos.len())));
        }
        if scores.len() < 5 {
            return Err(Error::Fit(format!(
                "need at least 5 samples, got {}",
                scores.len()
            )));
        }
        if scores.iter().chain(mos).any(|v| !v.is_finite()) {
            return Err(Error::Fit("non-finite input".into()));
        }
        let mut model = Self::initial(scores, mos)?;
        let mut sse = model.sse(scores, mos);
        let mut damping = 1e-3;

        for _ in 0..MAX_ITERATIONS {
            let mut jtj = Matrix4::<f64>::zeros();
            let mut jtr = Vector4::<f64>::zeros();
            for (s, m) in scores.iter().zip(mos) {
                let g = model.gradient(*s);
                jtj += g * g.transpose();
                jtr += g * (m - model.eval(*s));
            }
            if sse <= f64::EPSILON * f64::EPSILON || jtr.norm() <= 1e-300 {
                return Ok(model);
            }
            loop {
                let mut lhs = jtj;
                for i in 0..4 {
                    lhs[(i, i)] += damping * jtj[(i, i)].max(1e-12);
                }
                let Some(step) = lhs.lu().solve(&jtr) else {
                    damping *= 10.0;
                    if damping > 1e20 {
                        return Err(Error::Fit("singular normal equations".into()));
                    }
                    continue;
                };
                let mut beta = model.beta;
                for (b, d) in beta.iter_mut().zip(step.iter()) {
                    *b += d;
                }
                let candidate = Self { beta };
                let candidate_sse = candidate.sse(scores, mos);
                if candidate_sse.is_finite() && candidate_sse < sse {
                    let improvement = (sse - candidate_sse) / sse.max(f64::MIN_POSITIVE);
                    let small_step = step.norm() <= 1e-14 * (1.0 + Vector4::from(beta).norm());
                    model = candidate;
                    sse = candidate_sse;
                    damping = (damping / 10.0).max(1e-15);
                    if improvement < 1e-15 || small_step {
                        return Ok(model);
                    }
                    break;
                }
                damping *= 10.0;
                if damping > 1e16 {
                    // no descent direction left: a (local) minimum
                    return Ok(model);
                }
            }
        }
        Err(Error::Fit(format!(
            "no convergence after {MAX_ITERATIONS} iterations"
        )))
    }
}

/// Fits the logistic and returns the mapped scores.
pub fn fit_logistic4(scores: &[f64], mos: &[f64]) -> Result<Vec<f64>> {
    let model = Logistic4::fit(scores, mos)?;
    Ok(scores.iter().map(|s| model.eval(*s)).collect())
}
