//! Concentration bounds and the finite-sample tests used by the
//! exchangeability and extremality diagnostics.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Half-width `sqrt(ln(2/α) / (2N))` of the two-sided Hoeffding interval for
/// the mean of `N` observations in `[0, 1]`.
pub fn hoeffding_halfwidth(samples: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * samples as f64)).sqrt()
}

/// Sub-Gaussian scale `1 / (2 sqrt(N))` of a mean of `N` observations in
/// `[0, 1]`; "k Hoeffding standard errors" means `k` times this.
pub fn hoeffding_sigma(samples: u64) -> f64 {
    0.5 / (samples as f64).sqrt()
}

/// Upper tail `P(X >= x)` for chi-square with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let d = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    (1.0 - d.cdf(x)).clamp(0.0, 1.0)
}

/// Two-sided normal p-value of a z statistic.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return 1.0;
    }
    let n = Normal::standard();
    (2.0 * (1.0 - n.cdf(z.abs()))).clamp(0.0, 1.0)
}

/// Chi-square goodness of fit of `counts` against equal cell probabilities.
/// Returns `(statistic, p_value)`; an empty or single-cell row is never
/// evidence against uniformity.
pub fn uniformity_chi_square(counts: &[u64]) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    if counts.len() < 2 || total == 0 {
        return (0.0, 1.0);
    }
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    (stat, chi_square_sf(stat, counts.len() - 1))
}

/// Joint counts for the product identity `P(A ∧ B) = P(A) P(B)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub samples: u64,
    pub a: u64,
    pub b: u64,
    pub both: u64,
}

impl PairCounts {
    pub fn record(&mut self, a: bool, b: bool) {
        self.samples += 1;
        self.a += a as u64;
        self.b += b as u64;
        self.both += (a && b) as u64;
    }

    pub fn merge(self, o: PairCounts) -> PairCounts {
        PairCounts {
            samples: self.samples + o.samples,
            a: self.a + o.a,
            b: self.b + o.b,
            both: self.both + o.both,
        }
    }
}

/// Result of the delta-method z-test of `P(A ∧ B) - P(A) P(B) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductTest {
    pub p_a: f64,
    pub p_b: f64,
    pub p_both: f64,
    pub diff: f64,
    pub std_err: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Delta-method z-test of the product identity.
///
/// With per-sample indicators `(A, B, AB)` and `D = p_ab - p_a p_b`, the
/// gradient is `(-p_b, -p_a, 1)` and
/// `Var(D̂) = g' Σ g / N` with `Σ` the indicator covariance.
pub fn product_identity_test(c: &PairCounts) -> ProductTest {
    let n = c.samples.max(1) as f64;
    let (pa, pb, pab) = (c.a as f64 / n, c.b as f64 / n, c.both as f64 / n);
    let diff = pab - pa * pb;
    let var_a = pa * (1.0 - pa);
    let var_b = pb * (1.0 - pb);
    let var_ab = pab * (1.0 - pab);
    let cov_a_b = pab - pa * pb;
    let cov_a_ab = pab * (1.0 - pa);
    let cov_b_ab = pab * (1.0 - pb);
    let (ga, gb, gab) = (-pb, -pa, 1.0);
    let var = ga * ga * var_a
        + gb * gb * var_b
        + gab * gab * var_ab
        + 2.0 * ga * gb * cov_a_b
        + 2.0 * ga * gab * cov_a_ab
        + 2.0 * gb * gab * cov_b_ab;
    let std_err = (var.max(0.0) / n).sqrt();
    let (z, p_value) = if std_err > 0.0 {
        let z = diff / std_err;
        (z, two_sided_p(z))
    } else if diff.abs() < 1e-15 {
        (0.0, 1.0)
    } else {
        (f64::INFINITY.copysign(diff), 0.0)
    };
    ProductTest { p_a: pa, p_b: pb, p_both: pab, diff, std_err, z, p_value }
}
