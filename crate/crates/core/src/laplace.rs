//! n-dimensional Laplace noise.
//!
//! The density `D(x)(z) ∝ exp(-eps * |z - x|)` is spherically symmetric, so a
//! draw factors into a radius `R ~ Gamma(n, 1/eps)` and an independent
//! direction uniform on the unit sphere. Directions come from normalising a
//! vector of independent standard normals.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::embedding::{check_dim, euclidean, WordVector};
use crate::{Error, Result};

/// Gaussian vectors shorter than this are redrawn instead of normalised.
const MIN_GAUSSIAN_NORM: f64 = 1e-12;

/// Privacy parameter, per unit of Euclidean distance in embedding space.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidEpsilon(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Gamma scale parameter `1/eps`.
    pub fn scale(self) -> f64 {
        1.0 / self.0
    }
}

impl std::fmt::Display for Epsilon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// One noise draw: `offset = radius * direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSample {
    pub direction: WordVector,
    pub radius: f64,
}

impl NoiseSample {
    /// Draws radius then direction, in that order.
    pub fn draw<R: Rng + ?Sized>(n: usize, eps: Epsilon, rng: &mut R) -> Result<Self> {
        let radius = sample_radius(n, eps, rng)?;
        let direction = sample_unit_sphere(n, rng)?;
        Ok(Self { direction, radius })
    }

    pub fn offset(&self) -> Vec<f64> {
        self.direction
            .as_slice()
            .iter()
            .map(|u| self.radius * u)
            .collect()
    }

    /// `x + offset`, written into `out`.
    pub fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            x.iter()
                .zip(self.direction.as_slice())
                .map(|(xi, ui)| xi + self.radius * ui),
        );
    }
}

/// Uniform point on the unit sphere in `n` dimensions.
pub fn sample_unit_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<WordVector> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut v = vec![0.0; n];
    loop {
        for c in v.iter_mut() {
            *c = StandardNormal.sample(rng);
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm >= MIN_GAUSSIAN_NORM {
            for c in v.iter_mut() {
                *c /= norm;
            }
            return WordVector::new(v);
        }
    }
}

/// Radius drawn from `Gamma(n, 1/eps)`.
pub fn sample_radius<R: Rng + ?Sized>(n: usize, eps: Epsilon, rng: &mut R) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let gamma = Gamma::new(n as f64, eps.scale()).expect("shape >= 1 and positive scale");
    Ok(gamma.sample(rng))
}

/// `x` plus n-dimensional Laplace noise, `n = x.len()`.
pub fn sample_noise<R: Rng + ?Sized>(
    x: &WordVector,
    eps: Epsilon,
    rng: &mut R,
) -> Result<WordVector> {
    let noise = NoiseSample::draw(x.dim(), eps, rng)?;
    let mut z = Vec::with_capacity(x.dim());
    noise.apply_into(x.as_slice(), &mut z);
    WordVector::new(z)
}

/// `-eps * |x - z|`, the log-density up to its normalising constant.
pub fn log_density_unnormalized(x: &[f64], z: &[f64], eps: Epsilon) -> Result<f64> {
    check_dim(x.len(), z.len())?;
    Ok(-eps.value() * euclidean(x, z))
}
