use super::normal::{std_normal_cdf, std_normal_sf, SQRT_2PI};
use crate::error::{Error, Result};

// Supplies f64 math without std; redundant when std is linked in.
#[allow(unused_imports)]
use num_traits::Float;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

// Gauss-Legendre (weight, abscissa) pairs on [-1, 1]; only the negative half
// of each symmetric rule is stored.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197),
];
const GL12: [(f64, f64); 6] = [
    (0.047_175_336_386_511_77, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.017_614_007_139_152_12, -0.993_128_599_185_094_9),
    (0.040_601_429_800_386_94, -0.963_971_927_277_913_8),
    (0.062_672_048_334_109_06, -0.912_234_428_251_325_9),
    (0.083_276_741_576_704_75, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.076_526_521_133_497_33),
];

fn rule(abs_rho: f64) -> &'static [(f64, f64)] {
    if abs_rho < 0.3 {
        &GL6
    } else if abs_rho < 0.75 {
        &GL12
    } else {
        &GL20
    }
}

/// `P(U ≤ a, V ≤ b)` for a standard bivariate normal with correlation `rho`.
///
/// Gauss-Legendre quadrature of the single-integral representation over the
/// correlation (Drezner & Wesolowsky, with Genz's treatment of `|ρ| > 0.925`).
pub fn bvn_cdf(a: f64, b: f64, rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::InvalidCorrelation(rho));
    }
    Ok(bvn_cdf_unchecked(a, b, rho))
}

#[inline]
pub(crate) fn bvn_cdf_unchecked(a: f64, b: f64, rho: f64) -> f64 {
    // Fixed argument order makes the result exactly symmetric in (a, b).
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    upper_orthant(-a, -b, rho).clamp(0.0, 1.0)
}

/// `P(U > h, V > k)` with correlation `r`.
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    if r.abs() <= 0.925 {
        let mut sum = 0.0;
        if r != 0.0 {
            let hk = h * k;
            let hs = 0.5 * (h * h + k * k);
            let half_asr = 0.5 * r.asin();
            for &(w, x) in rule(r.abs()) {
                for s in [-1.0, 1.0] {
                    let sn = (half_asr * (s * x + 1.0)).sin();
                    sum += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            sum *= half_asr / TWO_PI;
        }
        return sum + std_normal_sf(h) * std_normal_sf(k);
    }
    if r < 0.0 {
        // P(U > h, V > k; r) = P(U > h) − P(U > h, −V > −k; −r)
        return (std_normal_sf(h) - upper_orthant(h, -k, -r)).max(0.0);
    }
    high_correlation(h, k, r)
}

/// Genz's expansion for `0.925 < r < 1`.
fn high_correlation(h: f64, k: f64, r: f64) -> f64 {
    let hk = h * k;
    let as_ = (1.0 - r) * (1.0 + r);
    let mut a = as_.sqrt();
    let bs = (h - k) * (h - k);
    let c = (4.0 - hk) / 8.0;
    let d = (12.0 - hk) / 16.0;
    let mut sum = 0.0;
    let e0 = -0.5 * (bs / as_ + hk);
    if e0 > -100.0 {
        sum = a
            * e0.exp()
            * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
    }
    if -hk < 100.0 {
        let bb = bs.sqrt();
        sum -= (-0.5 * hk).exp()
            * SQRT_2PI
            * std_normal_cdf(-bb / a)
            * bb
            * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for &(w, x) in rule(r) {
        for s in [-1.0, 1.0] {
            let xs = (a * (s * x + 1.0)).powi(2);
            let rs = (1.0 - xs).sqrt();
            let e = -0.5 * (bs / xs + hk);
            if e > -100.0 {
                sum += a
                    * w
                    * e.exp()
                    * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                        - (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
    }
    -sum / TWO_PI + std_normal_sf(h.max(k))
}

/// Probability of one observed outcome pair for two units sharing a column.
///
/// Unit `a` has `x_a = 1` iff `ε_a > t_a` (same for `b`), with
/// `(ε_a, ε_b)` standard bivariate normal with correlation `rho`.
pub fn quadrant_prob(pair: (u8, u8), thresholds: (f64, f64), rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::InvalidCorrelation(rho));
    }
    Ok(quadrant_prob_unchecked(pair, thresholds, rho))
}

#[inline]
pub(crate) fn quadrant_prob_unchecked(pair: (u8, u8), (ta, tb): (f64, f64), rho: f64) -> f64 {
    match pair {
        (0, 0) => bvn_cdf_unchecked(ta, tb, rho),
        (1, 1) => bvn_cdf_unchecked(-ta, -tb, rho),
        (1, 0) => bvn_cdf_unchecked(-ta, tb, -rho),
        _ => bvn_cdf_unchecked(ta, -tb, -rho),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    /// `Φ₂(a,b,ρ) = ∫_{-∞}^{a} φ(x) Φ((b − ρx)/√(1−ρ²)) dx` by composite Simpson.
    fn simpson_oracle(a: f64, b: f64, rho: f64) -> f64 {
        let lo = -12.0f64;
        let hi = a.min(12.0);
        if hi <= lo {
            return 0.0;
        }
        let n = 40_000;
        let h = (hi - lo) / n as f64;
        let s = (1.0 - rho * rho).sqrt();
        let f = |x: f64| {
            (-0.5 * x * x).exp() / SQRT_2PI * std_normal_cdf((b - rho * x) / s)
        };
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        acc * h / 3.0
    }

    #[test]
    fn median_orthant_closed_form() {
        for i in -9..=9 {
            let rho = i as f64 / 10.0;
            let exact = 0.25 + rho.asin() / TWO_PI;
            assert!((bvn_cdf(0.0, 0.0, rho).unwrap() - exact).abs() < 1e-12, "rho={rho}");
        }
        assert!((bvn_cdf(0.0, 0.0, 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn independence_and_saturation() {
        for &(a, b) in &[(0.3, -1.2), (2.0, 0.5), (-3.0, -0.1)] {
            let v = bvn_cdf(a, b, 0.0).unwrap();
            assert!((v - std_normal_cdf(a) * std_normal_cdf(b)).abs() < 1e-15);
        }
        assert!((bvn_cdf(8.0, 8.0, 0.3).unwrap() - 1.0).abs() < 1e-10);
        assert!(bvn_cdf(-9.0, 2.0, 0.99).unwrap() < 1e-15);
    }

    #[test]
    fn matches_quadrature_oracle() {
        let pts = [-2.5, -1.0, -0.2, 0.0, 0.7, 1.8];
        let rhos = [-0.99, -0.95, -0.93, -0.8, -0.5, -0.1, 0.2, 0.6, 0.9, 0.93, 0.96, 0.995];
        for &a in &pts {
            for &b in &pts {
                for &r in &rhos {
                    let got = bvn_cdf(a, b, r).unwrap();
                    let want = simpson_oracle(a, b, r);
                    assert!((got - want).abs() < 1e-9, "a={a} b={b} r={r} got={got} want={want}");
                }
            }
        }
    }

    #[test]
    fn rejects_degenerate_correlation() {
        assert!(bvn_cdf(0.0, 0.0, 1.0).is_err());
        assert!(bvn_cdf(0.0, 0.0, -1.0).is_err());
        assert!(quadrant_prob((1, 1), (0.0, 0.0), 1.2).is_err());
    }

    #[test]
    fn symmetry_and_reflection() {
        let grid: Vec<f64> = (-6..=6).map(|i| i as f64 * 0.45).collect();
        for &a in &grid {
            for &b in &grid {
                for r in [-0.97, -0.6, 0.0, 0.35, 0.94] {
                    let v = bvn_cdf(a, b, r).unwrap();
                    assert_eq!(v, bvn_cdf(b, a, r).unwrap());
                    let refl = 1.0 - std_normal_cdf(a) - std_normal_cdf(b) + v;
                    assert!((bvn_cdf(-a, -b, r).unwrap() - refl).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn quadrant_examples() {
        assert!((quadrant_prob((0, 0), (0.0, 0.0), 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((quadrant_prob((1, 1), (0.0, 0.0), 0.5).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let total: f64 = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&pr| quadrant_prob(pr, (0.3, -1.2), 0.6).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monotone_in_limits() {
        for r in [-0.96, -0.4, 0.3, 0.97] {
            let mut prev = 0.0;
            for i in -40..=40 {
                let v = bvn_cdf(i as f64 * 0.1, 0.4, r).unwrap();
                assert!(v + 1e-15 >= prev);
                prev = v;
            }
        }
    }
}
