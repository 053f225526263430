//! Seeded random instances for audits and property tests: faithful bases
//! as exponentials of bounded Hermitians, perturbations scaled to a target
//! conjugation norm, and certified nearby pairs.

use crate::expansional::{perturbed_state, Perturbation};
use crate::norms::araki_norm;
use crate::operator::HermitianOperator;
use crate::spectral::matfun;
use crate::weight::{DensityState, FiniteWeight};
use crate::{C64, CMat, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Generator for one instance: `seed` selects the run, `stream` the
/// instance, so a draw is independent of how many instances precede it.
pub fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Gaussian Hermitian, every matrix entry of the given scale.
pub fn random_hermitian(
    rng: &mut ChaCha8Rng,
    dim: usize,
    scale: f64,
) -> Result<HermitianOperator> {
    let off_scale = scale / 2f64.sqrt();
    let mut m = CMat::zeros(dim, dim);
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        m[(i, i)] = C64::new(d * scale, 0.0);
        for j in (i + 1)..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = C64::new(re * off_scale, im * off_scale);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m)
}

/// Faithful state `exp(-G)/Z` for a unit-scale Gaussian Hermitian `G`; the
/// eigenvalue spread stays within `exp` of `G`'s spectral width, far above
/// the faithfulness gate, unlike uniform eigenvalue sampling.
pub fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> Result<DensityState> {
    let g = random_hermitian(rng, dim, 1.0)?;
    let weight = FiniteWeight::new(matfun(&g, |l| (-l).exp())?)?;
    Ok(weight.normalized())
}

/// Hermitian direction rescaled so its conjugation norm relative to `base`
/// equals `target`; the zero draw (measure zero) is returned unscaled.
pub fn random_perturbation(
    rng: &mut ChaCha8Rng,
    base: &FiniteWeight,
    target: f64,
) -> Result<HermitianOperator> {
    let raw = random_hermitian(rng, base.dim(), 1.0)?;
    let m = araki_norm(&raw, base)?;
    if m == 0.0 {
        return Ok(raw);
    }
    Ok(raw.scale(target / m))
}

/// A certified nearby pair: `sigma` perturbs `rho` by an `X` of conjugation
/// norm `m` in `[m_max/20, m_max]`, which certifies the constant `exp(2m)`
/// (the two-sided weight comparison, squared by the normalization of the
/// trace). Returns `(rho, sigma, exp(2m))`.
pub fn random_nearby_pair(
    rng: &mut ChaCha8Rng,
    dim: usize,
    m_max: f64,
) -> Result<(DensityState, DensityState, f64)> {
    let rho = random_state(rng, dim)?;
    let m = m_max * (0.05 + 0.95 * rng.random::<f64>());
    let x = random_perturbation(rng, rho.weight(), m)?;
    let pert = Perturbation::new(rho.weight().clone(), x)?;
    let (sigma, _) = perturbed_state(&pert)?;
    Ok((rho, sigma, (2.0 * m).exp()))
}
