//! Expected angle between a majority bundle and one of its members.
//!
//! Bundling `2k + 1` independent random binary vectors leaves each member's
//! coordinate unflipped with probability `p_k = (1 + C(2k,k)/4^k) / 2`, so the
//! cosine to any member is `2 p_k - 1 = C(2k,k)/4^k`.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::vsa::{BinaryBundler, BinaryHypervector};
use rand::Rng;

const EXACT_BINOMIAL_LIMIT: u64 = 30;
pub const MIN_EMPIRICAL_DIM: usize = 1000;

fn check_k(k: i64) -> Result<u64> {
    u64::try_from(k)
        .map_err(|_| Error::invalid(format!("bundle half-size k must be nonnegative, got {k}")))
}

/// `C(2k, k)` exactly.
fn central_binomial_exact(k: u64) -> u128 {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        // C(2k, i+1) = C(2k, i) * (2k - i) / (i + 1), exact at every step.
        c = c * (2 * k as u128 - i) / (i + 1);
    }
    c
}

/// `C(2k, k) / 4^k`: exact integers up to `k = 30`, log-gamma beyond.
pub fn central_binomial_ratio(k: u64) -> f64 {
    if k <= EXACT_BINOMIAL_LIMIT {
        central_binomial_exact(k) as f64 / 4f64.powi(k as i32)
    } else {
        let kf = k as f64;
        (ln_gamma(2.0 * kf + 1.0) - 2.0 * ln_gamma(kf + 1.0) - 2.0 * kf * std::f64::consts::LN_2)
            .exp()
    }
}

/// `arccos(C(2k,k) / 4^k)` in degrees.
pub fn bundling_angle_theory(k: i64) -> Result<f64> {
    let k = check_k(k)?;
    Ok(central_binomial_ratio(k)
        .clamp(-1.0, 1.0)
        .acos()
        .to_degrees())
}

/// Probability that bundling `2k + 1` random vectors keeps a member's coordinate.
pub fn pk(k: i64) -> Result<f64> {
    let k = check_k(k)?;
    Ok((1.0 + central_binomial_ratio(k)) / 2.0)
}

/// `p_{k+1} < p_k` for every `k < kmax`.
pub fn pk_monotone_check(kmax: i64) -> Result<bool> {
    check_k(kmax)?;
    let mut prev = pk(0)?;
    for k in 1..=kmax {
        let cur = pk(k)?;
        if cur >= prev {
            return Ok(false);
        }
        prev = cur;
    }
    Ok(true)
}

/// Monte-Carlo mean angle (degrees) between a bundle of `2k + 1` random
/// vectors and a uniformly chosen member; trial `t` uses stream `t`.
pub fn bundling_angle_empirical(
    k: i64,
    dim: usize,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<f64> {
    let k = check_k(k)?;
    if dim < MIN_EMPIRICAL_DIM {
        return Err(Error::invalid(format!(
            "empirical angle needs D >= {MIN_EMPIRICAL_DIM}, got {dim}"
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let count = 2 * k as usize + 1;
    let family = rng.fork();
    let angles = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = family.stream(t as u64);
            let mut acc = BinaryBundler::new(dim);
            let members: Vec<BinaryHypervector> = (0..count)
                .map(|_| BinaryHypervector::random(dim, 0.5, &mut r))
                .collect::<Result<_>>()?;
            for m in &members {
                acc.add(m)?;
            }
            let bundle = acc.finish(&mut r)?;
            let pick = r.random_range(0..count);
            let s = bundle.similarity(&members[pick])?;
            Ok(s.clamp(-1.0, 1.0).acos().to_degrees())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(angles.iter().sum::<f64>() / trials as f64)
}
