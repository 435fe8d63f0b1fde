//! Finite-precision truncation of real targets and the rescaling of
//! finite-precision networks to integer ones.
//!
//! Truncation keeps logarithmically many decimal digits and comes with an
//! exact rational error certificate: the certified uniform bound is the sum
//! of per-layer Frobenius truncation errors, which telescopes through the
//! 1-Lipschitz ReLU layers as long as every layer norm is at most 1. The
//! certificate is computed from the actual truncation errors rather than the
//! worst-case uniform split, so it is usually much tighter than eps.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{IntegerNetwork, TargetNetwork};
use crate::ratio::{format_rat, pow10, pow10_inv, sqrt_upper_bound, truncate_decimal, Rat};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Digit budget for a truncation run.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionSpec {
    digits: u32,
    epsilon: Rat,
    /// True when `digits` was derived as the smallest p with
    /// 10^-p <= eps / (d^2 l).
    derived: bool,
}

impl PrecisionSpec {
    pub fn manual(digits: u32, epsilon: Rat) -> Self {
        PrecisionSpec {
            digits,
            epsilon,
            derived: false,
        }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn epsilon(&self) -> &Rat {
        &self.epsilon
    }

    pub fn is_derived(&self) -> bool {
        self.derived
    }
}

/// Per-layer truncation error ledger. The per-layer entries are sound
/// rational upper bounds on the Frobenius norms of W_i - What_i; the
/// certified bound is their sum.
#[derive(Debug, Clone)]
pub struct TruncationReport {
    pub per_layer_error: Vec<Rat>,
    pub certified_bound: Rat,
    pub digits: u32,
}

#[derive(Serialize)]
struct TruncationReportRepr {
    digits: u32,
    per_layer_error: Vec<String>,
    certified_bound: String,
}

impl TruncationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TruncationReportRepr {
            digits: self.digits,
            per_layer_error: self.per_layer_error.iter().map(format_rat).collect(),
            certified_bound: format_rat(&self.certified_bound),
        })?)
    }
}

/// Truncation toward zero to `digits` decimal places:
/// what = sign(w) * floor(|w| * 10^p) / 10^p, so |w - what| <= 10^-p and
/// |what| <= |w|.
pub fn truncate_scalar(w: &Rat, digits: u32) -> Result<Rat> {
    if w.abs() > Rat::one() {
        return Err(Error::Domain(format!(
            "|w| <= 1 required for truncation, got {}",
            format_rat(w)
        )));
    }
    Ok(truncate_decimal(w, digits))
}

/// Smallest digit count p with 10^-p <= eps / (d^2 l).
pub fn required_precision(d: usize, l: usize, eps: &Rat) -> Result<PrecisionSpec> {
    if d == 0 || l == 0 {
        return Err(Error::Domain("width and depth must be >= 1".into()));
    }
    if !eps.is_positive() {
        return Err(Error::Domain("eps must be positive".into()));
    }
    let threshold = eps / Rat::from_integer((d * d * l).into());
    let mut digits = 0u32;
    while pow10_inv(digits) > threshold {
        digits += 1;
    }
    Ok(PrecisionSpec {
        digits,
        epsilon: eps.clone(),
        derived: true,
    })
}

/// Entrywise truncation of every layer, with the certified uniform error
/// bound. Requires ||W_i||_F <= 1 for every layer (checked exactly).
pub fn truncate_network(
    f: &TargetNetwork,
    spec: &PrecisionSpec,
) -> Result<(TargetNetwork, TruncationReport)> {
    f.check_unit_norms()?;
    let mut truncated = Vec::with_capacity(f.depth());
    let mut per_layer_error = Vec::with_capacity(f.depth());
    for i in 0..f.depth() {
        let layer = f.layer(i);
        let mut err_sq = Rat::zero();
        let new = Matrix::from_fn(layer.rows(), layer.cols(), |r, c| {
            let w = layer.get(r, c);
            let t = truncate_decimal(w, spec.digits);
            let d = w - &t;
            err_sq += &d * &d;
            t
        });
        truncated.push(new);
        per_layer_error.push(sqrt_upper_bound(&err_sq)?);
    }
    let certified_bound: Rat = per_layer_error.iter().sum();
    Ok((
        TargetNetwork::new(truncated)?,
        TruncationReport {
            per_layer_error,
            certified_bound,
            digits: spec.digits,
        },
    ))
}

/// Rewrites a p-digit finite-precision network as an integer network times a
/// single output scale 10^{-p*l}, using positive homogeneity of ReLU. The
/// rational forward values are identical, exactly.
pub fn scale_to_integer(g_p: &TargetNetwork, digits: u32) -> Result<IntegerNetwork> {
    let scale = pow10(digits);
    let mut layers = Vec::with_capacity(g_p.depth());
    for i in 0..g_p.depth() {
        let layer = g_p.layer(i);
        let mut bad = None;
        let ints = Matrix::from_fn(layer.rows(), layer.cols(), |r, c| {
            let w = layer.get(r, c);
            let scaled = w * Rat::from_integer(scale.clone());
            if !scaled.denom().is_one() && bad.is_none() {
                bad = Some(format_rat(w));
            }
            scaled.numer() / scaled.denom()
        });
        if let Some(weight) = bad {
            return Err(Error::NotRepresentable { weight, digits });
        }
        layers.push(ints);
    }
    let output_scale = pow10_inv(digits * g_p.depth() as u32);
    IntegerNetwork::new(layers, output_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::EvalPoint;
    use crate::ratio::{parse_rat, rat_from_f64, rat_to_f64};
    use crate::rng::Stream;

    fn rat(s: &str) -> Rat {
        parse_rat(s).unwrap()
    }

    #[test]
    fn truncate_scalar_examples() {
        assert_eq!(
            truncate_scalar(&rat("0.123456"), 3).unwrap(),
            rat("0.123")
        );
        assert_eq!(truncate_scalar(&rat("-0.9999"), 2).unwrap(), rat("-0.99"));
        let half = truncate_scalar(&rat("0.5"), 4).unwrap();
        assert_eq!(half, rat("0.5"));
        assert!(truncate_scalar(&rat("1.5"), 2).is_err());
    }

    #[test]
    fn required_precision_examples() {
        assert_eq!(required_precision(2, 1, &rat("0.01")).unwrap().digits(), 3);
        assert_eq!(required_precision(1, 1, &rat("0.1")).unwrap().digits(), 1);
        assert_eq!(
            required_precision(10, 10, &rat("1/1000")).unwrap().digits(),
            6
        );
    }

    #[test]
    fn truncate_single_weight_certificate() {
        let f = TargetNetwork::from_f64_layers(&[(1, 1, vec![0.123456])]).unwrap();
        let spec = required_precision(1, 1, &rat("1/1000")).unwrap();
        assert_eq!(spec.digits(), 3);
        let (g, report) = truncate_network(&f, &spec).unwrap();
        assert_eq!(g.layer(0).get(0, 0), &rat("0.123"));
        // The only error source is the truncated tail of the dyadic 0.123456.
        let expected = rat_from_f64(0.123456).unwrap() - rat("0.123");
        assert_eq!(report.certified_bound, expected);
        assert!(report.certified_bound <= rat("1/1000"));
    }

    #[test]
    fn already_representable_network_has_zero_error() {
        let f = TargetNetwork::new(vec![
            Matrix::from_vec(1, 2, vec![rat("0.5"), rat("-0.25")]).unwrap()
        ])
        .unwrap();
        let (_, report) = truncate_network(&f, &PrecisionSpec::manual(2, rat("0.1"))).unwrap();
        assert_eq!(report.certified_bound, Rat::zero());
    }

    #[test]
    fn norm_precondition_is_enforced() {
        let f = TargetNetwork::from_f64_layers(&[(1, 2, vec![0.9, 0.9])]).unwrap();
        let spec = PrecisionSpec::manual(2, rat("0.1"));
        assert!(truncate_network(&f, &spec).is_err());
    }

    /// Random unit-norm network of the given widths, weights snapped to
    /// dyadic f64 values.
    fn random_unit_net(widths: &[usize], seed: u64) -> TargetNetwork {
        let mut stream = Stream::new(seed);
        let mut layers = Vec::new();
        for i in 0..widths.len() - 1 {
            let (rows, cols) = (widths[i + 1], widths[i]);
            let mut data: Vec<f64> = (0..rows * cols)
                .map(|_| stream.next_range(-1.0, 1.0))
                .collect();
            let norm = data.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for x in &mut data {
                    *x *= 0.95 / norm;
                }
            }
            layers.push((rows, cols, data));
        }
        TargetNetwork::from_f64_layers(&layers).unwrap()
    }

    fn sampled_max_error(f: &TargetNetwork, g: &TargetNetwork, points: usize, seed: u64) -> f64 {
        let mut stream = Stream::new(seed);
        let d = f.input_dim();
        let mut worst = 0.0f64;
        for _ in 0..points {
            let mut x: Vec<f64> = (0..d).map(|_| stream.next_normal()).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            let radius = stream.next_f64().powf(1.0 / d as f64);
            for v in &mut x {
                *v *= radius / norm;
            }
            let fy = f.eval_f64(&x).unwrap();
            let gy = g.eval_f64(&x).unwrap();
            for (a, b) in fy.iter().zip(&gy) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    #[test]
    fn certified_bound_dominates_sampled_error() {
        let f = random_unit_net(&[2, 2, 1], 7);
        let spec = required_precision(2, 2, &rat("0.01")).unwrap();
        let (g, report) = truncate_network(&f, &spec).unwrap();
        assert!(report.certified_bound <= rat("0.01"));
        let sampled = sampled_max_error(&f, &g, 10_000, 8);
        assert!(
            sampled <= rat_to_f64(&report.certified_bound) + 1e-15,
            "sampled {sampled} exceeds certificate {}",
            rat_to_f64(&report.certified_bound)
        );
    }

    #[test]
    fn scale_to_integer_examples() {
        let f = TargetNetwork::new(vec![Matrix::from_vec(1, 1, vec![rat("0.13")]).unwrap()])
            .unwrap();
        let g = scale_to_integer(&f, 2).unwrap();
        assert_eq!(g.layer(0).get(0, 0), &num_bigint::BigInt::from(13));
        assert_eq!(g.output_scale(), &rat("1/100"));

        let f2 = TargetNetwork::new(vec![
            Matrix::from_vec(1, 1, vec![rat("0.5")]).unwrap(),
            Matrix::from_vec(1, 1, vec![rat("0.5")]).unwrap(),
        ])
        .unwrap();
        let g2 = scale_to_integer(&f2, 1).unwrap();
        assert_eq!(g2.layer(0).get(0, 0), &num_bigint::BigInt::from(5));
        assert_eq!(g2.output_scale(), &rat("1/100"));

        let bad = TargetNetwork::new(vec![Matrix::from_vec(1, 1, vec![rat("1/3")]).unwrap()])
            .unwrap();
        assert!(scale_to_integer(&bad, 3).is_err());
    }

    #[test]
    fn scaled_network_evaluates_identically() {
        let f = random_unit_net(&[3, 3, 2, 1], 21);
        let spec = PrecisionSpec::manual(2, rat("1"));
        let (g_p, _) = truncate_network(&f, &spec).unwrap();
        let scaled = scale_to_integer(&g_p, 2).unwrap();
        let mut stream = Stream::new(4);
        for _ in 0..100 {
            let x = EvalPoint::from_f64(&[
                stream.next_range(-1.0, 1.0),
                stream.next_range(-1.0, 1.0),
                stream.next_range(-1.0, 1.0),
            ])
            .unwrap();
            assert_eq!(
                scaled.eval_rational(&x).unwrap(),
                g_p.eval_rational(&x).unwrap()
            );
        }
    }

    #[test]
    fn single_neuron_and_single_layer_specializations() {
        // One neuron, p = ceil(log10(d/eps)) digits suffices for error <= eps.
        let d = 4;
        let eps = rat("0.05");
        let f = random_unit_net(&[d, 1], 11);
        let mut digits = 0;
        while pow10_inv(digits) > &eps / Rat::from_integer(d.into()) {
            digits += 1;
        }
        let (_, report) = truncate_network(&f, &PrecisionSpec::manual(digits, eps.clone())).unwrap();
        assert!(report.certified_bound <= eps);

        // One layer, p = ceil(log10(d^2/eps)).
        let eps2 = rat("0.02");
        let f2 = random_unit_net(&[3, 4], 12);
        let dmax = 4u32;
        let mut digits2 = 0;
        while pow10_inv(digits2) > &eps2 / Rat::from_integer((dmax * dmax).into()) {
            digits2 += 1;
        }
        let (_, report2) =
            truncate_network(&f2, &PrecisionSpec::manual(digits2, eps2.clone())).unwrap();
        assert!(report2.certified_bound <= eps2);
    }
}
