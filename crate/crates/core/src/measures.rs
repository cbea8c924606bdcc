//! Distance and distribution measures between activation tensors.
//!
//! `l2` and `cos` compare the flattened tensors directly. The distribution
//! measures (SKLD, JSD, WSD) treat every channel of a feature map as one
//! distribution: for `(C, h, w)` maps each channel's spatial map, for
//! `(tokens, dim)` token sequences each embedding dimension's values across
//! tokens. The per-channel divergences are averaged and a weighted RMS
//! Euclidean term is added on top.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Tensor};

pub const DEFAULT_EPSILON: f64 = 1e-10;
pub const DEFAULT_EUCLID_WEIGHT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "l2")]
    L2,
    #[serde(rename = "cos", alias = "cosine")]
    Cosine,
    #[serde(rename = "skld")]
    Skld,
    #[serde(rename = "jsd")]
    Jsd,
    #[serde(rename = "wsd")]
    Wsd,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 5] = [
        MeasureKind::L2,
        MeasureKind::Cosine,
        MeasureKind::Skld,
        MeasureKind::Jsd,
        MeasureKind::Wsd,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureKind::L2 => "l2",
            MeasureKind::Cosine => "cos",
            MeasureKind::Skld => "skld",
            MeasureKind::Jsd => "jsd",
            MeasureKind::Wsd => "wsd",
        }
    }

    /// Whether this is one of the per-channel distribution measures.
    pub fn is_distributional(&self) -> bool {
        matches!(self, MeasureKind::Skld | MeasureKind::Jsd | MeasureKind::Wsd)
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(MeasureKind::L2),
            "cos" | "cosine" => Ok(MeasureKind::Cosine),
            "skld" => Ok(MeasureKind::Skld),
            "jsd" => Ok(MeasureKind::Jsd),
            "wsd" => Ok(MeasureKind::Wsd),
            other => Err(Error::Config(format!(
                "unknown measure `{other}` (expected l2, cos, skld, jsd or wsd)"
            ))),
        }
    }
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_euclid_weight() -> f64 {
    DEFAULT_EUCLID_WEIGHT
}

/// Selected measure with its numeric parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    #[serde(alias = "measure")]
    pub kind: MeasureKind,
    /// Smoothing constant of the distribution measures.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Weight of the RMS Euclidean term added to SKLD/JSD/WSD.
    #[serde(default = "default_euclid_weight")]
    pub euclid_weight: f64,
}

impl MeasureConfig {
    pub fn new(kind: MeasureKind) -> Self {
        Self {
            kind,
            epsilon: DEFAULT_EPSILON,
            euclid_weight: DEFAULT_EUCLID_WEIGHT,
        }
    }

    pub fn with_euclid_weight(mut self, weight: f64) -> Self {
        self.euclid_weight = weight;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.euclid_weight >= 0.0) || !self.euclid_weight.is_finite() {
            return Err(Error::Config(format!(
                "euclid_weight must be nonnegative, got {}",
                self.euclid_weight
            )));
        }
        Ok(())
    }
}

/// A probability vector: nonnegative weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelDistribution {
    weights: Vec<f64>,
}

impl ChannelDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Config("distribution needs at least one weight".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Config("distribution weights must be nonnegative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("distribution sums to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Adds `epsilon` to every weight and renormalizes, so logarithms stay
    /// finite while the result is still a distribution.
    fn smoothed(&self, epsilon: f64) -> Vec<f64> {
        let total = 1.0 + epsilon * self.weights.len() as f64;
        self.weights.iter().map(|w| (w + epsilon) / total).collect()
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("length {a} vs {b}")));
    }
    Ok(())
}

fn rms_slices(x: &[f32], y: &[f32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let sum: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let d = *a as f64 - *b as f64;
            d * d
        })
        .sum();
    (sum / x.len() as f64).sqrt()
}

fn cosine_slices(x: &[f32], y: &[f32]) -> Result<f64> {
    let (mut dot, mut nx, mut ny) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in x.iter().zip(y) {
        let (a, b) = (*a as f64, *b as f64);
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::DegenerateInput(
            "cosine distance of a zero vector".into(),
        ));
    }
    Ok((1.0 - dot / (nx * ny).sqrt()).clamp(0.0, 2.0))
}

/// RMS-scaled Euclidean distance `‖x − y‖₂ / √N`.
pub fn l2_distance(x: &Tensor, y: &Tensor) -> Result<f64> {
    x.ensure_same_shape(y)?;
    Ok(rms_slices(x.data(), y.data()))
}

/// `1 − ⟨x, y⟩ / (‖x‖ ‖y‖)`, in `[0, 2]`.
pub fn cosine_distance(x: &Tensor, y: &Tensor) -> Result<f64> {
    x.ensure_same_shape(y)?;
    cosine_slices(x.data(), y.data())
}

/// Shift-normalizes a vector into a distribution:
/// `w = v − min(v) + epsilon`, divided by its sum.
pub fn to_distribution(v: &[f32], epsilon: f64) -> Result<ChannelDistribution> {
    if v.is_empty() {
        return Err(Error::Config("cannot build a distribution from an empty vector".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    let min = v.iter().fold(f64::INFINITY, |m, x| m.min(*x as f64));
    let shifted: Vec<f64> = v.iter().map(|x| *x as f64 - min + epsilon).collect();
    let sum: f64 = shifted.iter().sum();
    Ok(ChannelDistribution {
        weights: shifted.into_iter().map(|w| w / sum).collect(),
    })
}

/// Symmetric Kullback–Leibler divergence `KL(p‖q) + KL(q‖p)` in nats.
pub fn skld(p: &ChannelDistribution, q: &ChannelDistribution, epsilon: f64) -> Result<f64> {
    check_lengths(p.len(), q.len())?;
    let (ps, qs) = (p.smoothed(epsilon), q.smoothed(epsilon));
    // KL(p‖q) + KL(q‖p) = Σ (p − q)(ln p − ln q), symmetric term by term
    let total: f64 = ps
        .iter()
        .zip(&qs)
        .map(|(a, b)| (a - b) * (a.ln() - b.ln()))
        .sum();
    Ok(total.max(0.0))
}

/// Jensen–Shannon divergence in nats, within `[0, ln 2]`.
pub fn jsd(p: &ChannelDistribution, q: &ChannelDistribution, epsilon: f64) -> Result<f64> {
    check_lengths(p.len(), q.len())?;
    let (ps, qs) = (p.smoothed(epsilon), q.smoothed(epsilon));
    let (mut kl_p, mut kl_q) = (0.0f64, 0.0f64);
    for (a, b) in ps.iter().zip(&qs) {
        let m = (a + b) / 2.0;
        kl_p += a * (a / m).ln();
        kl_q += b * (b / m).ln();
    }
    Ok((0.5 * kl_p + 0.5 * kl_q).clamp(0.0, std::f64::consts::LN_2))
}

/// 1-Wasserstein distance between two equal-size, equal-weight empirical
/// distributions: the mean absolute difference of the sorted samples.
pub fn wsd_1d(u: &[f32], v: &[f32]) -> Result<f64> {
    check_lengths(u.len(), v.len())?;
    if u.is_empty() {
        return Err(Error::Shape("wasserstein distance of empty samples".into()));
    }
    let mut su: Vec<f64> = u.iter().map(|x| *x as f64).collect();
    let mut sv: Vec<f64> = v.iter().map(|x| *x as f64).collect();
    su.sort_unstable_by(f64::total_cmp);
    sv.sort_unstable_by(f64::total_cmp);
    let total: f64 = su.iter().zip(&sv).map(|(a, b)| (a - b).abs()).sum();
    Ok(total / su.len() as f64)
}

/// Splits a feature tensor into the per-channel sample vectors the
/// distribution measures operate on.
pub fn channels(t: &Tensor) -> Vec<Vec<f32>> {
    let data = t.data();
    match t.shape() {
        [] => vec![data.to_vec()],
        [_] => vec![data.to_vec()],
        &[tokens, dim] => (0..dim)
            .map(|d| (0..tokens).map(|i| data[i * dim + d]).collect())
            .collect(),
        shape => {
            let per = data.len() / shape[0].max(1);
            data.chunks(per.max(1)).map(|c| c.to_vec()).collect()
        }
    }
}

/// Distance between two activation tensors of one layer under `cfg`.
pub fn layer_distance(x: &Tensor, y: &Tensor, cfg: &MeasureConfig) -> Result<f64> {
    x.ensure_same_shape(y)?;
    cfg.validate()?;
    match cfg.kind {
        MeasureKind::L2 => l2_distance(x, y),
        MeasureKind::Cosine => cosine_distance(x, y),
        kind => {
            let (cx, cy) = (channels(x), channels(y));
            let mut total = 0.0;
            for (a, b) in cx.iter().zip(&cy) {
                total += match kind {
                    MeasureKind::Skld => skld(
                        &to_distribution(a, cfg.epsilon)?,
                        &to_distribution(b, cfg.epsilon)?,
                        cfg.epsilon,
                    )?,
                    MeasureKind::Jsd => jsd(
                        &to_distribution(a, cfg.epsilon)?,
                        &to_distribution(b, cfg.epsilon)?,
                        cfg.epsilon,
                    )?,
                    _ => wsd_1d(a, b)?,
                };
            }
            let divergence = total / cx.len() as f64;
            if cfg.euclid_weight == 0.0 {
                return Ok(divergence);
            }
            Ok(divergence + cfg.euclid_weight * l2_distance(x, y)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(w: &[f64]) -> ChannelDistribution {
        ChannelDistribution::new(w.to_vec()).unwrap()
    }

    fn t(v: &[f32]) -> Tensor {
        Tensor::from_vec(v.to_vec()).unwrap()
    }

    // Direct evaluation of the textbook sums, used as the oracle.
    fn kl_naive(p: &[f64], q: &[f64]) -> f64 {
        p.iter()
            .zip(q)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| a * (a / b).ln())
            .sum()
    }

    #[test]
    fn l2_examples() {
        assert_eq!(l2_distance(&t(&[1.0, 2.0]), &t(&[1.0, 2.0])).unwrap(), 0.0);
        let d = l2_distance(&t(&[0.0, 0.0]), &t(&[3.0, 4.0])).unwrap();
        assert!((d - 5.0 / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(d, l2_distance(&t(&[3.0, 4.0]), &t(&[0.0, 0.0])).unwrap());
        assert!(matches!(
            l2_distance(&t(&[1.0]), &t(&[1.0, 2.0])),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn cosine_examples() {
        assert!(cosine_distance(&t(&[1.0, 2.0]), &t(&[1.0, 2.0])).unwrap() < 1e-12);
        assert_eq!(cosine_distance(&t(&[1.0, 0.0]), &t(&[0.0, 3.0])).unwrap(), 1.0);
        assert_eq!(cosine_distance(&t(&[1.0, -2.0]), &t(&[-1.0, 2.0])).unwrap(), 2.0);
        assert!(matches!(
            cosine_distance(&t(&[0.0, 0.0]), &t(&[1.0, 2.0])),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn to_distribution_examples() {
        let d = to_distribution(&[2.5, 2.5, 2.5], DEFAULT_EPSILON).unwrap();
        for w in d.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        let d = to_distribution(&[0.0, 1.0], 1e-14).unwrap();
        assert!(d.weights()[0] < 1e-13);
        assert!((d.weights()[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn skld_examples() {
        let p = dist(&[0.5, 0.5]);
        let q = dist(&[0.25, 0.75]);
        assert_eq!(skld(&p, &p, DEFAULT_EPSILON).unwrap(), 0.0);
        let expected = kl_naive(&[0.5, 0.5], &[0.25, 0.75]) + kl_naive(&[0.25, 0.75], &[0.5, 0.5]);
        assert!((expected - 0.274653).abs() < 1e-6);
        let got = skld(&p, &q, DEFAULT_EPSILON).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        assert_eq!(got, skld(&q, &p, DEFAULT_EPSILON).unwrap());
        assert!(matches!(
            skld(&p, &dist(&[1.0]), DEFAULT_EPSILON),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn jsd_examples() {
        let p = dist(&[0.5, 0.5]);
        let q = dist(&[0.25, 0.75]);
        assert_eq!(jsd(&p, &p, DEFAULT_EPSILON).unwrap(), 0.0);
        let disjoint = jsd(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0]), DEFAULT_EPSILON).unwrap();
        assert!((disjoint - std::f64::consts::LN_2).abs() < 1e-6);
        let m = [0.375, 0.625];
        let expected = 0.5 * kl_naive(&[0.5, 0.5], &m) + 0.5 * kl_naive(&[0.25, 0.75], &m);
        assert!((expected - 0.033823).abs() < 1e-6);
        assert!((jsd(&p, &q, DEFAULT_EPSILON).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn wsd_examples() {
        assert_eq!(wsd_1d(&[0.0, 1.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(wsd_1d(&[0.0, 1.0], &[0.0, 3.0]).unwrap(), 1.0);
        assert_eq!(wsd_1d(&[1.0, 0.0], &[3.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(wsd_1d(&[0.0], &[0.0, 1.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn channel_split() {
        let conv = Tensor::new(vec![2, 1, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(channels(&conv), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let tokens = Tensor::new(vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(
            channels(&tokens),
            vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]]
        );
    }

    #[test]
    fn wsd_single_channel_reduces_to_wsd_1d() {
        let x = Tensor::new(vec![1, 2, 2], vec![0.1, 0.7, -0.3, 2.0]).unwrap();
        let y = Tensor::new(vec![1, 2, 2], vec![0.4, 0.2, 0.9, -1.0]).unwrap();
        let cfg = MeasureConfig::new(MeasureKind::Wsd).with_euclid_weight(0.0);
        assert_eq!(
            layer_distance(&x, &y, &cfg).unwrap(),
            wsd_1d(x.data(), y.data()).unwrap()
        );
    }

    #[test]
    fn skld_layer_recomposes() {
        let x = Tensor::new(vec![2, 3], vec![0.1, 0.7, -0.3, 2.0, 0.5, 0.2]).unwrap();
        let y = Tensor::new(vec![2, 3], vec![0.4, 0.2, 0.9, -1.0, 0.0, 0.3]).unwrap();
        let cfg = MeasureConfig::new(MeasureKind::Skld);
        // three columns of two tokens each, divergences recomputed by hand
        let cols = [([0.1f32, 2.0], [0.4f32, -1.0]), ([0.7, 0.5], [0.2, 0.0]), ([-0.3, 0.2], [0.9, 0.3])];
        let mut div = 0.0;
        for (a, b) in cols {
            let shift = |v: [f32; 2]| {
                let m = v[0].min(v[1]) as f64;
                let w = [v[0] as f64 - m + 1e-10, v[1] as f64 - m + 1e-10];
                let s = w[0] + w[1];
                let n = 1.0 + 2.0 * 1e-10;
                [(w[0] / s + 1e-10) / n, (w[1] / s + 1e-10) / n]
            };
            let (p, q) = (shift(a), shift(b));
            div += kl_naive(&p, &q) + kl_naive(&q, &p);
        }
        div /= 3.0;
        let rms = {
            let s: f64 = x.data().iter().zip(y.data()).map(|(a, b)| (*a as f64 - *b as f64).powi(2)).sum();
            (s / 6.0).sqrt()
        };
        let got = layer_distance(&x, &y, &cfg).unwrap();
        assert!((got - (div + rms)).abs() < 1e-9, "{got} vs {}", div + rms);
    }

    #[test]
    fn config_validation() {
        assert!(MeasureConfig::new(MeasureKind::Jsd).with_epsilon(0.0).validate().is_err());
        assert!(MeasureConfig::new(MeasureKind::Jsd).with_euclid_weight(-1.0).validate().is_err());
        assert_eq!("COS".parse::<MeasureKind>().unwrap(), MeasureKind::Cosine);
        assert!("manhattan".parse::<MeasureKind>().is_err());
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f32>> {
        proptest::collection::vec(-5.0f32..5.0, n)
    }

    proptest! {
        #[test]
        fn jsd_is_bounded(a in vec_strategy(16), b in vec_strategy(16)) {
            let (p, q) = (to_distribution(&a, 1e-10).unwrap(), to_distribution(&b, 1e-10).unwrap());
            let v = jsd(&p, &q, 1e-10).unwrap();
            prop_assert!(v >= 0.0 && v <= std::f64::consts::LN_2 + 1e-9);
        }

        #[test]
        fn wsd_is_translation_covariant(a in vec_strategy(20), b in vec_strategy(20), c in -3.0f64..3.0) {
            let base = wsd_1d(&a, &b).unwrap();
            // shifts applied in f64 so the comparison is not polluted by f32 rounding
            let mut sa: Vec<f64> = a.iter().map(|x| *x as f64 + c).collect();
            let mut sb: Vec<f64> = b.iter().map(|x| *x as f64 + c).collect();
            sa.sort_by(f64::total_cmp);
            sb.sort_by(f64::total_cmp);
            let shifted: f64 = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum::<f64>() / 20.0;
            prop_assert!((base - shifted).abs() <= 1e-12);
        }

        #[test]
        fn to_distribution_is_shift_invariant(
            a in proptest::collection::vec((-320i32..320).prop_map(|k| k as f32 / 64.0), 12),
            c in (-16i32..16).prop_map(|k| k as f32 / 4.0),
        ) {
            // dyadic values keep the shifted input exact in f32
            let shifted: Vec<f32> = a.iter().map(|x| x + c).collect();
            let (p, q) = (to_distribution(&a, 1e-10).unwrap(), to_distribution(&shifted, 1e-10).unwrap());
            for (x, y) in p.weights().iter().zip(q.weights()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
            prop_assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn scaling_laws(a in vec_strategy(10), b in vec_strategy(10), s in 0.1f32..8.0) {
            let (x, y) = (t(&a), t(&b));
            let (sx, sy) = (
                t(&a.iter().map(|v| v * s).collect::<Vec<_>>()),
                t(&b.iter().map(|v| v * s).collect::<Vec<_>>()),
            );
            let base = l2_distance(&x, &y).unwrap();
            prop_assert!((l2_distance(&sx, &sy).unwrap() - s as f64 * base).abs() <= 1e-5 * (1.0 + base));
            if let (Ok(c1), Ok(c2)) = (cosine_distance(&x, &y), cosine_distance(&sx, &y)) {
                prop_assert!((c1 - c2).abs() <= 1e-6);
            }
        }

        #[test]
        fn all_measures_symmetric_and_zero_on_identity(a in vec_strategy(24), b in vec_strategy(24)) {
            let x = Tensor::new(vec![4, 6], a).unwrap();
            let y = Tensor::new(vec![4, 6], b).unwrap();
            for kind in MeasureKind::ALL {
                let cfg = MeasureConfig::new(kind);
                let (xy, yx) = (layer_distance(&x, &y, &cfg), layer_distance(&y, &x, &cfg));
                if let (Ok(xy), Ok(yx)) = (xy, yx) {
                    prop_assert!(xy >= 0.0);
                    prop_assert_eq!(xy, yx);
                }
                if let Ok(xx) = layer_distance(&x, &x, &cfg) {
                    prop_assert!(xx <= 1e-12);
                }
            }
        }
    }
}
