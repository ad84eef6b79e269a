//! Evaluation metrics and the unpaired two-tailed t-test.
//!
//! R² here is the coefficient of determination, `1 − SS_res/SS_tot`, which
//! can be negative and is not the square of the Pearson correlation in
//! general. The t-test defaults to the Welch (unequal-variance) form; the
//! pooled Student form is available behind [`TTestKind::Pooled`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-evaluation metric bundle. `percent_error`, `r`, and `r2` may be NaN
/// when the truth is degenerate (constant targets, zero targets); callers
/// record a diagnostic in that case instead of failing the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    /// Tons per acre.
    pub mae: f64,
    /// Mean absolute percentage error, in percent.
    pub percent_error: f64,
    /// Pearson correlation of truth and prediction.
    pub r: f64,
    /// Coefficient of determination.
    pub r2: f64,
}

impl MetricSet {
    /// Computes all four metrics, mapping degenerate cases to NaN.
    pub fn compute(y: &[f64], yhat: &[f64]) -> Result<MetricSet> {
        Ok(MetricSet {
            mae: mae(y, yhat)?,
            percent_error: percent_error(y, yhat).unwrap_or(f64::NAN),
            r: pearson_r(y, yhat).unwrap_or(f64::NAN),
            r2: r2(y, yhat).unwrap_or(f64::NAN),
        })
    }
}

fn check_lengths(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    let s: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum();
    Ok(s / y.len() as f64)
}

/// Mean absolute percentage error (×100). Every truth value must be nonzero.
pub fn percent_error(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    if let Some(index) = y.iter().position(|v| *v == 0.0) {
        return Err(Error::ZeroTruth { index });
    }
    let s: f64 = y
        .iter()
        .zip(yhat)
        .map(|(a, b)| ((a - b) / a).abs())
        .sum();
    Ok(100.0 * s / y.len() as f64)
}

/// Sample Pearson correlation.
pub fn pearson_r(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    if y.len() < 2 {
        return Err(Error::TooFewSamples { n: y.len() });
    }
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mh = yhat.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in y.iter().zip(yhat) {
        let da = a - my;
        let db = b - mh;
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateVariance { what: "truth" });
    }
    if syy == 0.0 {
        return Err(Error::DegenerateVariance { what: "prediction" });
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Coefficient of determination, `1 − SS_res/SS_tot`.
pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|a| (a - my) * (a - my)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateVariance { what: "truth" });
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TTestKind {
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    Welch,
    /// Classic pooled-variance Student form.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    /// Two-tailed p-value in [0, 1].
    pub p: f64,
}

/// Unpaired two-tailed t-test.
///
/// Zero-variance edge cases: equal means give `t = 0, p = 1`; unequal means
/// with both variances zero give an infinite statistic and `p = 0`.
pub fn ttest_unpaired(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTestResult> {
    if a.len() < 2 {
        return Err(Error::TooFewSamples { n: a.len() });
    }
    if b.len() < 2 {
        return Err(Error::TooFewSamples { n: b.len() });
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ma = a.iter().sum::<f64>() / na;
    let mb = b.iter().sum::<f64>() / nb;
    let va = a.iter().map(|x| (x - ma) * (x - ma)).sum::<f64>() / (na - 1.0);
    let vb = b.iter().map(|x| (x - mb) * (x - mb)).sum::<f64>() / (nb - 1.0);

    if va == 0.0 && vb == 0.0 {
        return Ok(if ma == mb {
            TTestResult {
                t: 0.0,
                df: na + nb - 2.0,
                p: 1.0,
            }
        } else {
            TTestResult {
                t: if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY },
                df: na + nb - 2.0,
                p: 0.0,
            }
        });
    }

    let (t, df) = match kind {
        TTestKind::Welch => {
            let se2 = va / na + vb / nb;
            let t = (ma - mb) / se2.sqrt();
            let df = se2 * se2
                / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
            (t, df)
        }
        TTestKind::Pooled => {
            let df = na + nb - 2.0;
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            let t = (ma - mb) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt();
            (t, df)
        }
    };
    Ok(TTestResult {
        t,
        df,
        p: students_t_two_tailed(t, df),
    })
}

/// Two-tailed p-value of Student's t with `df` degrees of freedom.
pub fn students_t_two_tailed(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    regularized_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// ln Γ(z) for z > 0, Lanczos approximation.
pub fn ln_gamma(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    const C: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut sum = 1.000000000190015;
    for (i, c) in C.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * sum / z).ln()
}

/// Regularized incomplete beta Iₓ(a, b) via Lentz's continued fraction.
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // The continued fraction converges fastest for x below the mean;
    // use the symmetry relation otherwise.
    if x > (a + 1.0) / (a + b + 2.0) {
        return 1.0 - regularized_beta(b, a, 1.0 - x);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    ln_front.exp() * beta_cf(a, b, x) / a
}

/// ln B(a, b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 400;
    const EPS: f64 = 1e-15;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            mae(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0]).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(mae(&[0.0], &[5.0]).unwrap(), 5.0);
        assert!(matches!(mae(&[], &[]), Err(Error::Empty)));
        assert!(matches!(
            mae(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mae_is_symmetric_and_translation_invariant() {
        let y = [1.0, 4.0, 2.5];
        let p = [0.5, 5.0, 2.0];
        assert_eq!(mae(&y, &p).unwrap(), mae(&p, &y).unwrap());
        let y2: Vec<f64> = y.iter().map(|v| v + 3.0).collect();
        let p2: Vec<f64> = p.iter().map(|v| v + 3.0).collect();
        assert_abs_diff_eq!(mae(&y, &p).unwrap(), mae(&y2, &p2).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn percent_error_examples() {
        assert_eq!(percent_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(percent_error(&[2.0], &[1.0]).unwrap(), 50.0);
        assert_eq!(percent_error(&[4.0, 2.0], &[2.0, 1.0]).unwrap(), 50.0);
        assert!(matches!(
            percent_error(&[0.0, 1.0], &[1.0, 1.0]),
            Err(Error::ZeroTruth { index: 0 })
        ));
    }

    #[test]
    fn correlation_examples() {
        let y = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(pearson_r(&y, &y).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2(&y, &y).unwrap(), 1.0, epsilon = 1e-12);

        // Anti-correlated predictions: SS_res = 8, SS_tot = 2.
        let rev = [3.0, 2.0, 1.0];
        assert_abs_diff_eq!(pearson_r(&y, &rev).unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2(&y, &rev).unwrap(), -3.0, epsilon = 1e-12);

        let p = [1.0, 2.0, 2.0];
        assert_abs_diff_eq!(pearson_r(&y, &p).unwrap(), 3f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r2(&y, &p).unwrap(), 0.5, epsilon = 1e-12);

        assert!(matches!(
            pearson_r(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::DegenerateVariance { .. })
        ));
        assert!(matches!(
            r2(&[2.0, 2.0], &[1.0, 2.0]),
            Err(Error::DegenerateVariance { .. })
        ));
    }

    #[test]
    fn r2_of_mean_prediction_is_zero() {
        let y = [1.0, 2.0, 3.0, 7.0];
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let p = vec![mean; y.len()];
        assert_abs_diff_eq!(r2(&y, &p).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_is_invariant_under_positive_affine_maps() {
        let y = [1.0, 2.0, 4.0, 3.0];
        let p = [0.5, 1.5, 3.0, 2.0];
        let base = pearson_r(&y, &p).unwrap();
        let p2: Vec<f64> = p.iter().map(|v| 2.5 * v + 7.0).collect();
        assert_abs_diff_eq!(pearson_r(&y, &p2).unwrap(), base, epsilon = 1e-12);
        let y2: Vec<f64> = y.iter().map(|v| 0.1 * v - 3.0).collect();
        assert_abs_diff_eq!(pearson_r(&y2, &p).unwrap(), base, epsilon = 1e-12);
    }

    #[test]
    fn ttest_examples() {
        let same = [0.9, 0.92, 0.94];
        let r = ttest_unpaired(&same, &same, TTestKind::Welch).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);

        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0];
        let r = ttest_unpaired(&a, &b, TTestKind::Welch).unwrap();
        assert_abs_diff_eq!(r.t, -1.224744871391589, epsilon = 1e-9);
        assert_abs_diff_eq!(r.df, 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p, 0.2879, epsilon = 1e-4);

        let flat_a = [1.0, 1.0, 1.0];
        let flat_b = [1.0, 1.0];
        let r = ttest_unpaired(&flat_a, &flat_b, TTestKind::Welch).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);

        assert!(matches!(
            ttest_unpaired(&[1.0], &b, TTestKind::Welch),
            Err(Error::TooFewSamples { n: 1 })
        ));
    }

    #[test]
    fn ttest_swap_negates_t_and_preserves_p() {
        let a = [0.90, 0.93, 0.91, 0.96];
        let b = [0.80, 0.85, 0.79];
        for kind in [TTestKind::Welch, TTestKind::Pooled] {
            let ab = ttest_unpaired(&a, &b, kind).unwrap();
            let ba = ttest_unpaired(&b, &a, kind).unwrap();
            assert_abs_diff_eq!(ab.t, -ba.t, epsilon = 1e-12);
            assert_abs_diff_eq!(ab.p, ba.p, epsilon = 1e-12);
        }
    }

    #[test]
    fn pooled_matches_welch_for_balanced_equal_variance() {
        // Equal sizes and equal sample variances make the two statistics equal.
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 3.0, 4.0];
        let w = ttest_unpaired(&a, &b, TTestKind::Welch).unwrap();
        let p = ttest_unpaired(&a, &b, TTestKind::Pooled).unwrap();
        assert_abs_diff_eq!(w.t, p.t, epsilon = 1e-12);
        assert_abs_diff_eq!(p.df, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_variance_unequal_means_gives_zero_p() {
        let a = [1.0, 1.0];
        let b = [2.0, 2.0, 2.0];
        let r = ttest_unpaired(&a, &b, TTestKind::Welch).unwrap();
        assert_eq!(r.p, 0.0);
        assert!(r.t.is_infinite());
    }

    #[test]
    fn regularized_beta_reference_points() {
        // I_x(1, 1) = x.
        assert_abs_diff_eq!(regularized_beta(1.0, 1.0, 0.3), 0.3, epsilon = 1e-12);
        // I_x(2, 2) = x²(3 − 2x).
        let x: f64 = 0.4;
        assert_abs_diff_eq!(
            regularized_beta(2.0, 2.0, x),
            x * x * (3.0 - 2.0 * x),
            epsilon = 1e-12
        );
        // Symmetry: I_x(a,b) = 1 − I_{1−x}(b,a).
        assert_abs_diff_eq!(
            regularized_beta(3.5, 1.25, 0.7),
            1.0 - regularized_beta(1.25, 3.5, 0.3),
            epsilon = 1e-12
        );
    }

    #[test]
    fn t_distribution_known_quantiles() {
        // t = 2.776 at df = 4 is the 97.5% quantile: two-tailed p ≈ 0.05.
        assert_abs_diff_eq!(students_t_two_tailed(2.776, 4.0), 0.05, epsilon = 2e-4);
        // Large df approaches the normal: t = 1.96 → p ≈ 0.05.
        assert_abs_diff_eq!(students_t_two_tailed(1.96, 1e6), 0.05, epsilon = 1e-3);
    }
}
