//! Reproducible random streams and the Poisson variate generator.
//!
//! Streams are ChaCha8 keyed by a 64-bit seed, with the ChaCha stream word
//! selecting an independent keystream. All transcendental functions on the
//! sampling path go through `libm`, so a given `(seed, stream_id)` produces the
//! same variates on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What a stream is used for. Occupies the top byte of the stream id so
/// streams drawn for different purposes never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum StreamPurpose {
    Lambdas = 1,
    Calibration = 2,
    Power = 3,
    Simulate = 4,
    NullCdfEstimate = 5,
    Validation = 6,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Stream id layout: `purpose (8 bits) | cell (24 bits) | replicate (32 bits)`.
    pub fn derived(seed: u64, purpose: StreamPurpose, cell: u32, replicate: u32) -> Self {
        assert!(cell < (1 << 24), "cell index {cell} does not fit in 24 bits");
        let stream_id = ((purpose as u64) << 56) | ((cell as u64) << 32) | replicate as u64;
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Below this mean the sampler inverts the CDF by sequential search.
pub const INVERSION_CUTOFF: f64 = 10.0;

/// Draws one Poisson variate. `lambda = 0` yields 0.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    debug_assert!(lambda >= 0.0 && lambda.is_finite());
    if lambda == 0.0 {
        0
    } else if lambda < INVERSION_CUTOFF {
        poisson_inversion(rng, lambda)
    } else {
        poisson_ptrs(rng, lambda)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let p0 = libm::exp(-lambda);
    loop {
        let u: f64 = rng.random();
        let mut k = 0_u64;
        let mut p = p0;
        let mut cdf = p0;
        while u > cdf {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
            if k > 200 {
                break;
            }
        }
        // u beyond the representable cdf: redraw
        if k <= 200 {
            return k;
        }
    }
}

/// Transformed rejection with squeeze (Hormann's PTRS), valid for `lambda >= 10`.
fn poisson_ptrs<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let slam = lambda.sqrt();
    let loglam = libm::log(lambda);
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let ln_inv_alpha = libm::log(inv_alpha);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = libm::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = libm::log(v) + ln_inv_alpha - libm::log(a / (us * us) + b);
        let rhs = -lambda + k * loglam - libm::lgamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}
