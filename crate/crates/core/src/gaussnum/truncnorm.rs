use rand::Rng;

// Supplies f64 math without std; redundant when std is linked in.
#[allow(unused_imports)]
use num_traits::Float;

use super::normal::{std_normal_sf, upper_quantile_unchecked};

/// Which side of the threshold a truncated draw lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    /// `(threshold, ∞)`, observed `x = 1`.
    Greater,
    /// `(−∞, threshold]`, observed `x = 0`.
    LessEq,
}

impl Side {
    #[inline]
    pub fn from_bit(x: u8) -> Self {
        if x != 0 {
            Side::Greater
        } else {
            Side::LessEq
        }
    }
}

/// Standardized lower bound beyond which the exponential-proposal rejection
/// sampler replaces inversion.
const TAIL_SWITCH: f64 = 5.0;

/// Draw from `N(mean, sd²)` restricted to one side of `threshold`.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mean: f64,
    sd: f64,
    side: Side,
    threshold: f64,
    rng: &mut R,
) -> f64 {
    debug_assert!(sd > 0.0);
    let c = (threshold - mean) / sd;
    match side {
        Side::Greater => mean + sd * lower_truncated_std(c, rng),
        Side::LessEq => mean - sd * lower_truncated_std(-c, rng),
    }
}

/// Standard normal conditioned on `x > a`.
pub(crate) fn lower_truncated_std<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a < TAIL_SWITCH {
        // Invert the upper tail: x = Φ⁻¹(1 − U·(1 − Φ(a))).
        let tail = std_normal_sf(a);
        loop {
            let u = open_unit(rng) * tail;
            if u > 0.0 {
                let x = upper_quantile_unchecked(u);
                return x.max(a);
            }
        }
    }
    // Robert (1995): translated exponential proposal with the optimal rate.
    let lambda = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let x = a - open_unit(rng).ln() / lambda;
        let accept = (-0.5 * (x - lambda) * (x - lambda)).exp();
        if open_unit(rng) <= accept {
            return x;
        }
    }
}

/// Uniform on `(0, 1)`.
#[inline]
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
