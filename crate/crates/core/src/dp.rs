//! Laplace mechanism calibrated by the static global sensitivity.
//!
//! Noise is drawn in double precision by inverse-CDF sampling. This is the
//! textbook floating-point mechanism and is known to leak through the low
//! bits of the output; it is not hardened.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::value::{self, Ext, Rational};

pub const RNG_NAME: &str = "ChaCha20 (rand_chacha), seeded from a u64";
pub const MECHANISM_NOTE: &str = "floating-point Laplace mechanism, not hardened against precision attacks";

#[derive(Clone, Debug)]
pub struct DpAnswer {
    pub exact: Rational,
    pub noisy: f64,
    /// Laplace scale `GS / ε`.
    pub scale: f64,
    pub epsilon: f64,
    pub gs: Ext,
    pub seed: u64,
    pub warnings: Vec<String>,
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Uniform on the open interval (0, 1): the midpoints of a 2^-53 grid.
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    let k = rng.gen::<u64>() >> 11;
    (k as f64 + 0.5) / (1u64 << 53) as f64
}

/// One draw from Laplace(0, b).
pub fn laplace_sample<R: Rng>(rng: &mut R, b: f64) -> f64 {
    let u = open_unit(rng) - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn scale(gs: &Ext, epsilon: f64) -> Result<Option<f64>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Param(format!("epsilon must be a positive finite number, got {epsilon}")));
    }
    match gs {
        Ext::Fin(g) if g.numer() == &0.into() => Ok(None),
        Ext::Fin(g) if g > &Rational::from_integer(0.into()) => Ok(Some(value::to_f64(g) / epsilon)),
        Ext::Fin(g) => Err(Error::Param(format!("negative sensitivity {g}"))),
        _ => Err(Error::Unbounded("global sensitivity is infinite; refusing to release".into())),
    }
}

/// Releases `exact + Laplace(GS/ε)`. A zero sensitivity releases the exact
/// answer, an infinite one is refused.
pub fn dp_answer(exact: &Rational, gs: &Ext, epsilon: f64, seed: u64) -> Result<DpAnswer> {
    let b = scale(gs, epsilon)?;
    let mut warnings = Vec::new();
    let (noisy, scale) = match b {
        None => {
            warnings.push("global sensitivity is 0; the exact answer is released without noise".into());
            (value::to_f64(exact), 0.0)
        }
        Some(b) => (value::to_f64(exact) + laplace_sample(&mut rng(seed), b), b),
    };
    Ok(DpAnswer { exact: exact.clone(), noisy, scale, epsilon, gs: gs.clone(), seed, warnings })
}

/// `n` independent releases from one seeded stream.
pub fn dp_samples(exact: &Rational, gs: &Ext, epsilon: f64, seed: u64, n: usize) -> Result<Vec<f64>> {
    let x = value::to_f64(exact);
    Ok(match scale(gs, epsilon)? {
        None => vec![x; n],
        Some(b) => {
            let mut r = rng(seed);
            (0..n).map(|_| x + laplace_sample(&mut r, b)).collect()
        }
    })
}
