use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::beta::beta_reg;

use super::{mean, sample_variance, MetricsError};

/// Outcome of a two-sided t-test. `t_statistic` is infinite when every
/// difference is the same nonzero value and NaN when there is no
/// difference at all; JSON carries those as strings. `no_difference`
/// marks identical paired samples or, for Welch, exactly equal means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    #[serde(serialize_with = "ser_float", deserialize_with = "de_float")]
    pub t_statistic: f64,
    /// n - 1 for the paired test; the Welch-Satterthwaite value otherwise.
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    pub stars: String,
    pub no_difference: bool,
}

fn ser_float<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn de_float<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Str(s) => match s.as_str() {
            "nan" => Ok(f64::NAN),
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(serde::de::Error::custom(format!("bad float `{other}`"))),
        },
    }
}

/// `***` for p <= 0.001, `**` for p <= 0.05, `*` for p <= 0.1.
pub fn stars(p: f64) -> &'static str {
    if p <= 0.001 {
        "***"
    } else if p <= 0.05 {
        "**"
    } else if p <= 0.1 {
        "*"
    } else {
        ""
    }
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
fn two_sided_p(t: f64, df: f64) -> f64 {
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

fn result(t: f64, df: f64, zero_spread: bool, zero_effect: bool) -> SignificanceResult {
    if zero_spread && zero_effect {
        return SignificanceResult {
            t_statistic: f64::NAN,
            degrees_of_freedom: df,
            p_value: 1.0,
            stars: String::new(),
            no_difference: true,
        };
    }
    let p = if t.is_infinite() {
        0.0
    } else {
        two_sided_p(t, df)
    };
    SignificanceResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        stars: stars(p).to_string(),
        no_difference: false,
    }
}

/// Paired Student t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<SignificanceResult, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(MetricsError::TooFew {
            needed: 2,
            got: a.len(),
        });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if let Some(i) = d.iter().position(|x| !x.is_finite()) {
        return Err(MetricsError::NonFinite(i));
    }
    let n = d.len() as f64;
    let m = mean(&d);
    let var = sample_variance(&d);
    let df = n - 1.0;
    // Differences that are all equal leave only rounding noise in var.
    let zero_spread = var.sqrt() <= 4.0 * f64::EPSILON * m.abs();
    let zero_effect = m == 0.0;
    let t = if zero_spread {
        m.signum() * f64::INFINITY
    } else {
        m / (var / n).sqrt()
    };
    Ok(result(t, df, zero_spread, zero_effect))
}

/// Welch's unequal-variance two-sample t-test of `a` against `b`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<SignificanceResult, MetricsError> {
    for xs in [a, b] {
        if xs.len() < 2 {
            return Err(MetricsError::TooFew {
                needed: 2,
                got: xs.len(),
            });
        }
        if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
            return Err(MetricsError::NonFinite(i));
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (sa, sb) = (sample_variance(a) / na, sample_variance(b) / nb);
    let se2 = sa + sb;
    let diff = ma - mb;
    if se2 == 0.0 {
        let df = na + nb - 2.0;
        let t = if diff == 0.0 {
            f64::NAN
        } else {
            diff.signum() * f64::INFINITY
        };
        return Ok(result(t, df, true, diff == 0.0));
    }
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let mut r = result(diff / se2.sqrt(), df, false, false);
    // Equal means: t is exactly zero and p is one.
    r.no_difference = diff == 0.0;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent p-value: integrate the unnormalized Student-t kernel
    /// after substituting x = tan(theta), so both tail and total mass are
    /// finite integrals over [0, pi/2]. No beta or gamma functions involved.
    pub(crate) fn integrated_p(t: f64, df: f64) -> f64 {
        let g = |th: f64| {
            let x = th.tan();
            let c = th.cos();
            (1.0 + x * x / df).powf(-(df + 1.0) / 2.0) / (c * c)
        };
        let simpson = |a: f64, b: f64, n: usize| {
            let h = (b - a) / n as f64;
            let end = |x: f64| {
                if (x - std::f64::consts::FRAC_PI_2).abs() < 1e-15 {
                    0.0
                } else {
                    g(x)
                }
            };
            let mut s = end(a) + end(b);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                s += w * g(a + h * i as f64);
            }
            s * h / 3.0
        };
        let half = std::f64::consts::FRAC_PI_2;
        let total = simpson(0.0, half, 200_000);
        let tail = simpson(t.abs().atan(), half, 200_000);
        tail / total
    }

    #[test]
    fn differences_one_two_three() {
        let r = paired_t_test(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert!((r.t_statistic - 3.46410).abs() < 1e-5);
        assert_eq!(r.degrees_of_freedom, 2.0);
        // df = 2 has the closed form p = 1 - t / sqrt(2 + t^2).
        let closed = 1.0 - r.t_statistic / (2.0 + r.t_statistic.powi(2)).sqrt();
        assert!((r.p_value - closed).abs() < 1e-12);
        assert!((r.p_value - 0.07418).abs() < 1e-5);
        assert_eq!(r.stars, "*");
    }

    #[test]
    fn matches_integration_oracle() {
        for df in [5.0, 30.0] {
            for t in [0.3, 1.0, 2.1, 3.7] {
                let p = two_sided_p(t, df);
                assert!((p - integrated_p(t, df)).abs() <= 1e-6, "df {df} t {t}");
            }
        }
    }

    #[test]
    fn identical_samples() {
        let a = [1.0, 4.0, 2.5];
        let r = paired_t_test(&a, &a).unwrap();
        assert!(r.no_difference);
        assert_eq!((r.p_value, r.stars.as_str()), (1.0, ""));
    }

    #[test]
    fn constant_nonzero_difference() {
        let r = paired_t_test(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.t_statistic, f64::INFINITY);
        assert_eq!((r.p_value, r.stars.as_str()), (0.0, "***"));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"inf\""));
        let back: SignificanceResult = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn swap_and_shift() {
        let a = [1.0, 5.0, 2.0, 8.0];
        let b = [0.5, 4.0, 2.5, 6.0];
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        assert_eq!(ab.t_statistic, -ba.t_statistic);
        assert_eq!(ab.p_value, ba.p_value);
        let a2: Vec<f64> = a.iter().map(|x| x + 4.0).collect();
        let b2: Vec<f64> = b.iter().map(|x| x + 4.0).collect();
        let shifted = paired_t_test(&a2, &b2).unwrap();
        assert!((shifted.t_statistic - ab.t_statistic).abs() < 1e-9);
    }

    #[test]
    fn star_boundaries() {
        assert_eq!(stars(0.001), "***");
        assert_eq!(stars(0.0010001), "**");
        assert_eq!(stars(0.05), "**");
        assert_eq!(stars(0.0500001), "*");
        assert_eq!(stars(0.1), "*");
        assert_eq!(stars(0.1000001), "");
    }

    #[test]
    fn welch_sign_and_identity() {
        let low = [0.1, 0.2, 0.15, 0.12, 0.18];
        let high = [0.5, 0.55, 0.6, 0.52, 0.58];
        let r = welch_t_test(&low, &high).unwrap();
        assert!(r.t_statistic < 0.0);
        assert!(r.p_value < 0.001);
        let same = welch_t_test(&low, &low).unwrap();
        assert_eq!(same.t_statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        assert!(same.no_difference && same.stars.is_empty());
        assert!(!r.no_difference);
    }

    #[test]
    fn welch_equal_sizes_reduces_to_pooled_df() {
        // With equal n and equal variances Welch's df is 2(n - 1).
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 3.0, 4.0, 5.0];
        let r = welch_t_test(&a, &b).unwrap();
        assert!((r.degrees_of_freedom - 6.0).abs() < 1e-12);
    }
}
