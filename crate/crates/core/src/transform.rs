//! Label transforms applied at ingestion.
//!
//! Raw binding affinities `Kd` are mapped to the dimensionless working scale
//! `y = -log10(Kd / 1e9)`. A Box–Cox transform is available as an optional,
//! explicitly ordered preprocessing step; its exponent can be fitted by
//! maximum likelihood on training labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    /// `y = -log10(kd / 1e9)`
    NegLog10OverGiga,
    /// `y = (kd^λ - 1) / λ`, with the `λ = 0` limit `ln(kd)`.
    BoxCox,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub kind: TransformKind,
    /// Box–Cox exponent; required (and finite) when `kind` is `BoxCox`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl TransformSpec {
    pub fn neg_log10_over_giga() -> Self {
        TransformSpec {
            kind: TransformKind::NegLog10OverGiga,
            lambda: None,
        }
    }

    pub fn box_cox(lambda: f64) -> Self {
        TransformSpec {
            kind: TransformKind::BoxCox,
            lambda: Some(lambda),
        }
    }

    pub fn identity() -> Self {
        TransformSpec {
            kind: TransformKind::Identity,
            lambda: None,
        }
    }
}

/// Transforms one positive affinity value according to `spec`.
pub fn transform_affinity(kd: f64, spec: &TransformSpec) -> Result<f64> {
    if !kd.is_finite() || kd <= 0.0 {
        return Err(Error::Domain(format!(
            "affinity must be a positive finite number, got {kd}"
        )));
    }
    match spec.kind {
        TransformKind::NegLog10OverGiga => Ok(-(kd / 1.0e9).log10()),
        TransformKind::Identity => Ok(kd),
        TransformKind::BoxCox => {
            let lambda = spec
                .lambda
                .ok_or_else(|| Error::Config("Box-Cox transform requires lambda".into()))?;
            if !lambda.is_finite() {
                return Err(Error::Config(format!("non-finite Box-Cox lambda {lambda}")));
            }
            if lambda == 0.0 {
                Ok(kd.ln())
            } else {
                Ok((kd.powf(lambda) - 1.0) / lambda)
            }
        }
    }
}

/// Box–Cox profile log-likelihood of `values` at exponent `lambda`.
///
/// `LL(λ) = -(n/2) ln σ̂²(λ) + (λ - 1) Σ ln yᵢ` with σ̂² the biased variance
/// of the transformed sample.
fn boxcox_log_likelihood(values: &[f64], lambda: f64) -> f64 {
    let n = values.len() as f64;
    let spec = TransformSpec::box_cox(lambda);
    let transformed: Vec<f64> = values
        .iter()
        .map(|&v| transform_affinity(v, &spec).expect("positive values"))
        .collect();
    let mean = transformed.iter().sum::<f64>() / n;
    let var = transformed.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / n;
    let log_sum = values.iter().map(|v| v.ln()).sum::<f64>();
    -(n / 2.0) * var.ln() + (lambda - 1.0) * log_sum
}

const BOXCOX_LAMBDA_LO: f64 = -5.0;
const BOXCOX_LAMBDA_HI: f64 = 5.0;
const BOXCOX_TOL: f64 = 1e-4;

/// Fits the Box–Cox exponent by golden-section search of the profile
/// log-likelihood over λ ∈ [-5, 5] to a width of 1e-4.
///
/// Requires at least two distinct positive values; with fewer the likelihood
/// degenerates (zero variance at every λ).
pub fn fit_boxcox_lambda(values: &[f64]) -> Result<f64> {
    for &v in values {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!(
                "Box-Cox fitting requires positive finite values, got {v}"
            )));
        }
    }
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateInput(
            "Box-Cox fitting requires at least 2 distinct values".into(),
        ));
    }

    // Golden-section search for the maximum.
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = BOXCOX_LAMBDA_LO;
    let mut b = BOXCOX_LAMBDA_HI;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = boxcox_log_likelihood(values, c);
    let mut fd = boxcox_log_likelihood(values, d);
    while (b - a) > BOXCOX_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = boxcox_log_likelihood(values, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = boxcox_log_likelihood(values, d);
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::rngutil::standard_normal;

    use super::*;

    #[test]
    fn neg_log10_reference_points() {
        let spec = TransformSpec::neg_log10_over_giga();
        assert_eq!(transform_affinity(1.0e9, &spec).unwrap(), 0.0);
        assert_eq!(transform_affinity(1.0, &spec).unwrap(), 9.0);
    }

    #[test]
    fn boxcox_lambda_zero_is_log() {
        let spec = TransformSpec::box_cox(0.0);
        let y = transform_affinity(std::f64::consts::E, &spec).unwrap();
        assert!((y - 1.0).abs() < 1e-15, "{y}");
    }

    #[test]
    fn boxcox_lambda_one_is_shift() {
        let spec = TransformSpec::box_cox(1.0);
        for &x in &[0.1, 1.0, 2.5, 1234.5678, 9.9e8] {
            assert_eq!(transform_affinity(x, &spec).unwrap(), x - 1.0);
        }
    }

    #[test]
    fn boxcox_small_lambda_matches_log_limit() {
        let spec = TransformSpec::box_cox(1e-8);
        for &x in &[0.01, 0.5, 1.0, 3.0, 1000.0] {
            let y = transform_affinity(x, &spec).unwrap();
            assert!((y - x.ln()).abs() < 1e-6, "x={x}: {y} vs {}", x.ln());
        }
    }

    #[test]
    fn non_positive_affinity_is_domain_error() {
        let spec = TransformSpec::neg_log10_over_giga();
        assert!(matches!(
            transform_affinity(0.0, &spec),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            transform_affinity(-1.0, &spec),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn missing_or_bad_lambda_is_config_error() {
        let spec = TransformSpec {
            kind: TransformKind::BoxCox,
            lambda: None,
        };
        assert!(matches!(
            transform_affinity(1.0, &spec),
            Err(Error::Config(_))
        ));
        let spec = TransformSpec::box_cox(f64::NAN);
        assert!(matches!(
            transform_affinity(1.0, &spec),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn constant_values_are_degenerate() {
        assert!(matches!(
            fit_boxcox_lambda(&[1.0, 1.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    /// Independent profile-likelihood implementation used as the grid oracle.
    fn oracle_ll(values: &[f64], lambda: f64) -> f64 {
        let n = values.len() as f64;
        let z: Vec<f64> = values
            .iter()
            .map(|&v| {
                if lambda == 0.0 {
                    v.ln()
                } else {
                    (v.powf(lambda) - 1.0) / lambda
                }
            })
            .collect();
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        -(n / 2.0) * var.ln() + (lambda - 1.0) * values.iter().map(|v| v.ln()).sum::<f64>()
    }

    fn oracle_grid_argmax(values: &[f64]) -> f64 {
        // Integer-indexed grid: lambda = 0 is hit exactly, so the log branch
        // applies there instead of a catastrophically cancelled power.
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in -5000..=5000i64 {
            let lambda = i as f64 * 1e-3;
            let ll = oracle_ll(values, lambda);
            if ll > best.0 {
                best = (ll, lambda);
            }
        }
        best.1
    }

    #[test]
    fn lognormal_sample_fits_lambda_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..400)
            .map(|_| (0.25 * standard_normal(&mut rng)).exp())
            .collect();
        let fitted = fit_boxcox_lambda(&values).unwrap();
        let oracle = oracle_grid_argmax(&values);
        assert!((fitted - oracle).abs() <= 2e-3, "fitted {fitted} vs grid {oracle}");
        assert!(fitted.abs() < 0.3, "lognormal data should fit near 0, got {fitted}");
    }

    #[test]
    fn symmetric_linear_sample_fits_lambda_near_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        // Symmetric perturbation around a constant: already on a linear scale.
        let values: Vec<f64> = (0..1000)
            .map(|i| {
                let u: f64 = rng.random();
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                5.0 + sign * u
            })
            .collect();
        let fitted = fit_boxcox_lambda(&values).unwrap();
        let oracle = oracle_grid_argmax(&values);
        assert!((fitted - oracle).abs() <= 2e-3, "fitted {fitted} vs grid {oracle}");
        assert!((fitted - 1.0).abs() < 0.6, "symmetric data should fit near 1, got {fitted}");
    }

    #[test]
    fn neg_log10_strictly_decreasing() {
        let spec = TransformSpec::neg_log10_over_giga();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let a: f64 = rng.random::<f64>() * 1e6 + 1e-6;
            let b = a * (1.0 + rng.random::<f64>() + 1e-9);
            let ya = transform_affinity(a, &spec).unwrap();
            let yb = transform_affinity(b, &spec).unwrap();
            assert!(yb < ya, "transform must decrease: {a}->{ya}, {b}->{yb}");
        }
    }
}
