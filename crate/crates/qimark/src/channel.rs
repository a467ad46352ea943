//! Noise attacks on watermarked content.
//!
//! Attacks apply either to pixel planes (output clamped to `[0, 255]`) or
//! directly to carrier coefficient vectors (the transmission model
//! `y = s_w + n`). Every channel is deterministic given its seed: elements
//! are visited in order and consume one RNG draw each.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::plane::ImagePlane;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    /// Additive white Gaussian noise with standard deviation `sigma`.
    Awgn { sigma: f64 },
    /// Each element becomes 255 with probability `p`.
    Salt { p: f64 },
    /// Each element becomes 0 with probability `p`.
    Pepper { p: f64 },
    /// Each element becomes 0 or 255, each with probability `p/2`.
    SaltPepper { p: f64 },
    /// Multiplicative noise `x + x·n` with `n ~ N(0, sigma²)`.
    Speckle { sigma: f64 },
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Awgn { .. } => "gaussian",
            NoiseKind::Salt { .. } => "salt",
            NoiseKind::Pepper { .. } => "pepper",
            NoiseKind::SaltPepper { .. } => "salt-pepper",
            NoiseKind::Speckle { .. } => "speckle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannel {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, seed: u64) -> Self {
        Self { kind, seed }
    }

    fn rng(&self) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(self.seed)
    }

    /// Applies the attack to a pixel plane; output pixels clamp to `[0, 255]`.
    pub fn apply_to_plane(&self, plane: &ImagePlane) -> ImagePlane {
        let mut rng = self.rng();
        let pixels = match self.kind {
            NoiseKind::Awgn { sigma } => {
                let normal = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
                plane
                    .pixels()
                    .iter()
                    .map(|&p| clamp_u8(p as f64 + normal.sample(&mut rng)))
                    .collect()
            }
            NoiseKind::Salt { p } => plane
                .pixels()
                .iter()
                .map(|&v| if rng.random::<f64>() < p { 255 } else { v })
                .collect(),
            NoiseKind::Pepper { p } => plane
                .pixels()
                .iter()
                .map(|&v| if rng.random::<f64>() < p { 0 } else { v })
                .collect(),
            NoiseKind::SaltPepper { p } => plane
                .pixels()
                .iter()
                .map(|&v| {
                    let u = rng.random::<f64>();
                    if u < p / 2.0 {
                        0
                    } else if u < p {
                        255
                    } else {
                        v
                    }
                })
                .collect(),
            NoiseKind::Speckle { sigma } => {
                let normal = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
                plane
                    .pixels()
                    .iter()
                    .map(|&v| {
                        let x = v as f64;
                        clamp_u8(x + x * normal.sample(&mut rng))
                    })
                    .collect()
            }
        };
        ImagePlane::new(plane.width(), plane.height(), pixels).expect("same dimensions")
    }

    /// Applies the attack directly to carrier vectors (no clamping).
    pub fn apply_to_carriers<T: Real>(&self, carriers: &[Vec<T>]) -> Vec<Vec<T>> {
        let mut rng = self.rng();
        carriers
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&v| self.perturb_element(v, &mut rng))
                    .collect()
            })
            .collect()
    }

    fn perturb_element<T: Real>(&self, v: T, rng: &mut ChaCha12Rng) -> T {
        match self.kind {
            NoiseKind::Awgn { sigma } => {
                let normal = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
                v + T::of(normal.sample(rng))
            }
            NoiseKind::Salt { p } => {
                if rng.random::<f64>() < p {
                    T::of(255.0)
                } else {
                    v
                }
            }
            NoiseKind::Pepper { p } => {
                if rng.random::<f64>() < p {
                    T::zero()
                } else {
                    v
                }
            }
            NoiseKind::SaltPepper { p } => {
                let u = rng.random::<f64>();
                if u < p / 2.0 {
                    T::zero()
                } else if u < p {
                    T::of(255.0)
                } else {
                    v
                }
            }
            NoiseKind::Speckle { sigma } => {
                let normal = Normal::new(0.0, sigma).expect("sigma must be finite and >= 0");
                v + v * T::of(normal.sample(rng))
            }
        }
    }
}

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
