//! Quality metrics, symbol error rate, the AWGN union bound, and
//! Monte-Carlo evaluation of the analytical distortion expressions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::lattice::{nearest_point, quantize_coarse, second_moment_mc, LatticeSpec};
use crate::message::Message;
use crate::plane::ImagePlane;
use crate::qim::SchemeKind;
use crate::real::{norm_sq, Real};

/// Peak value for 8-bit content.
const MAX_VALUE: f64 = 255.0;

/// Mean squared error per element.
pub fn mse<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("mse over empty slices"));
    }
    let sum: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    Ok(sum / T::of_usize(a.len()))
}

/// `10·log10(255²/mse)`; +∞ when `mse` is zero.
pub fn psnr<T: Real>(mse: T) -> T {
    if mse == T::zero() {
        return T::infinity();
    }
    T::of(10.0) * (T::of(MAX_VALUE * MAX_VALUE) / mse).log10()
}

/// Percentage residual difference `sqrt(Σ|a−b|² / Σ|a|²)`.
pub fn prd<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    let num: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    let den: T = a.iter().map(|&x| x * x).sum();
    if den == T::zero() {
        return Ok(if num == T::zero() { T::zero() } else { T::infinity() });
    }
    Ok((num / den).sqrt())
}

/// Global SSIM with `c1 = (0.01·255)²`, `c2 = (0.03·255)²`, computed over
/// the whole signal rather than windowed.
pub fn ssim<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("ssim over empty slices"));
    }
    let n = T::of_usize(a.len());
    let mean_a: T = a.iter().copied().sum::<T>() / n;
    let mean_b: T = b.iter().copied().sum::<T>() / n;
    let mut var_a = T::zero();
    let mut var_b = T::zero();
    let mut cov = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        var_a += dx * dx;
        var_b += dy * dy;
        cov += dx * dy;
    }
    var_a = var_a / n;
    var_b = var_b / n;
    cov = cov / n;
    let c1 = T::of((0.01 * MAX_VALUE) * (0.01 * MAX_VALUE));
    let c2 = T::of((0.03 * MAX_VALUE) * (0.03 * MAX_VALUE));
    let two = T::of(2.0);
    Ok(((two * mean_a * mean_b + c1) * (two * cov + c2))
        / ((mean_a * mean_a + mean_b * mean_b + c1) * (var_a + var_b + c2)))
}

/// Fraction of message vectors decoded incorrectly.
pub fn ser(sent: &[Message], received: &[Message]) -> Result<f64> {
    if sent.len() != received.len() {
        return Err(Error::LengthMismatch { left: sent.len(), right: received.len() });
    }
    if sent.is_empty() {
        return Err(Error::EmptyInput("ser over empty lists"));
    }
    let wrong = sent.iter().zip(received).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / sent.len() as f64)
}

/// AWGN union bound `(τ/2)·erfc((d_min/2)/√(2·N0))`, clipped to `[0, 1]`.
pub fn ser_union_bound<T: Real>(spec: &LatticeSpec<T>, n0: f64) -> f64 {
    assert!(n0 > 0.0, "noise power must be positive");
    let arg = spec.d_min().as_f64() / 2.0 / (2.0 * n0).sqrt();
    let bound = spec.kissing() as f64 / 2.0 * statrs::function::erf::erfc(arg);
    bound.clamp(0.0, 1.0)
}

/// Which domain a report was measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Frequency,
    Spatial,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Frequency => "frequency",
            Domain::Spatial => "spatial",
        }
    }
}

/// A bundle of quality metrics for one comparison.
#[derive(Debug, Clone, Copy)]
pub struct MetricsReport<T> {
    pub domain: Domain,
    pub mse: T,
    pub psnr: T,
    pub prd: T,
    pub ssim: T,
}

impl<T: Real> MetricsReport<T> {
    pub fn compute(domain: Domain, original: &[T], modified: &[T]) -> Result<Self> {
        let m = mse(original, modified)?;
        Ok(Self {
            domain,
            mse: m,
            psnr: psnr(m),
            prd: prd(original, modified)?,
            ssim: ssim(original, modified)?,
        })
    }

    /// One line of `key=value` pairs, the crate's text report format.
    pub fn to_line(&self) -> String {
        format!(
            "domain={} mse={:.6} psnr={:.4} prd={:.6} ssim={:.6}",
            self.domain.name(),
            self.mse.as_f64(),
            self.psnr.as_f64(),
            self.prd.as_f64(),
            self.ssim.as_f64()
        )
    }
}

/// Converts a pixel plane to scalars for metric computation.
pub fn plane_values<T: Real>(plane: &ImagePlane) -> Vec<T> {
    plane.pixels().iter().map(|&p| T::of(p as f64)).collect()
}

/// One row of the evaluation sweep table.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub scheme: SchemeKind,
    pub lattice: &'static str,
    pub band: &'static str,
    pub k: usize,
    pub mse_freq: f64,
    pub mse_spatial: f64,
    pub psnr: f64,
    pub prd: f64,
    pub ssim: f64,
    pub ser: f64,
}

pub const EVAL_CSV_HEADER: &str = "scheme,lattice,band,k,mse_freq,mse_spatial,psnr,prd,ssim,ser";

impl EvalRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.4},{:.6},{:.6},{:.6}",
            self.scheme.name(),
            self.lattice,
            self.band,
            self.k,
            self.mse_freq,
            self.mse_spatial,
            self.psnr,
            self.prd,
            self.ssim,
            self.ser
        )
    }
}

/// Result of the analytical-MSE Monte-Carlo evaluator.
#[derive(Debug, Clone, Copy)]
pub struct TheoreticalMse {
    /// Expected per-dimension MSE of the scheme at the given `P1`.
    pub mse: f64,
    /// Closed-form Cauchy-Schwarz upper bound for the MD quantizer
    /// (meaningful for MD/CAMD).
    pub camd_upper_bound: f64,
}

/// Monte-Carlo evaluation of the expected embedding MSE as a function of the
/// stay-in-place probability `P1`.
///
/// The quantization error is uniform over the fine Voronoi cell with
/// probability `P1` and uniform over the coarse-minus-fine region with
/// probability `P2 = 1−P1`; both region moments are estimated by folding
/// uniform samples with the exact decoders. For the MD quantizer the error
/// in the second region is the radial shortfall `‖x‖ − (r_pack − ε)`.
pub fn theoretical_mse_mc<T: Real>(
    spec: &LatticeSpec<T>,
    p1: f64,
    scheme: SchemeKind,
    epsilon: Option<f64>,
    samples: usize,
    seed: u64,
) -> TheoreticalMse {
    assert!((0.0..=1.0).contains(&p1), "P1 must be a probability");
    assert!(samples >= 10_000, "need at least 1e4 samples");
    let p2 = 1.0 - p1;
    let n = spec.dimension() as f64;
    let eps = epsilon.unwrap_or(1e-3 * spec.d_min().as_f64());
    let r_eff = spec.r_pack().as_f64() - eps;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let alpha = T::of(spec.alpha() as f64);

    // moment of the fine cell, sampled directly
    let mut sum2_fine = 0.0;
    for _ in 0..samples {
        let x = fold_into_fine_cell(spec, &mut rng);
        sum2_fine += norm_sq(&x).as_f64();
    }
    let mu2_fine = sum2_fine / samples as f64;

    // moments of the coarse-minus-fine region, by rejection
    let mut sum2_out = 0.0;
    let mut sum2_shell = 0.0;
    let mut count_out = 0usize;
    for _ in 0..samples {
        let x = fold_into_coarse_cell(spec, alpha, &mut rng);
        let fine = nearest_point(spec, &x).expect("dimensions consistent");
        if fine.coords.iter().all(|&z| z == 0) {
            continue; // inside the fine cell
        }
        let r2 = norm_sq(&x).as_f64();
        let r = r2.sqrt();
        sum2_out += r2;
        let shell = r - r_eff;
        sum2_shell += shell * shell;
        count_out += 1;
    }
    let (mu2_out, mu_shell) = if count_out > 0 {
        (sum2_out / count_out as f64, sum2_shell / count_out as f64)
    } else {
        (0.0, 0.0)
    };

    let mse = match scheme {
        SchemeKind::Qim | SchemeKind::CaQim => (p1 * mu2_fine + p2 * mu2_out) / n,
        SchemeKind::MdQim | SchemeKind::CamdQim => p2 * mu_shell / n,
    };

    // closed-form bound from the second moments and cell volumes
    let g = second_moment_mc(spec, samples.max(10_000), seed ^ 0x5eed).as_f64();
    let vol_f = spec.fine_volume();
    let vol_c = spec.coarse_volume();
    let e = 2.0 / n;
    let int2 = n * g * vol_c.powf(e + 1.0) - n * g * vol_f.powf(e + 1.0);
    let root = (n * g * vol_c.powf(e + 2.0) - n * g * vol_f.powf(e + 2.0)).sqrt();
    let camd_upper_bound = p2 / n * (int2 - 2.0 * r_eff * root + (vol_c - vol_f));

    TheoreticalMse { mse, camd_upper_bound }
}

/// Uniform sample over the fine Voronoi cell.
fn fold_into_fine_cell<T: Real>(spec: &LatticeSpec<T>, rng: &mut ChaCha12Rng) -> Vec<T> {
    let dim = spec.dimension();
    let coords: Vec<T> = (0..dim).map(|_| T::of(rng.random::<f64>())).collect();
    let mut x = spec.point_from_unit_cube(&coords);
    let q = nearest_point(spec, &x).expect("dimensions consistent");
    for (xk, pk) in x.iter_mut().zip(&q.point) {
        *xk -= *pk;
    }
    x
}

/// Uniform sample over the coarse Voronoi cell.
fn fold_into_coarse_cell<T: Real>(spec: &LatticeSpec<T>, alpha: T, rng: &mut ChaCha12Rng) -> Vec<T> {
    let dim = spec.dimension();
    let coords: Vec<T> = (0..dim).map(|_| T::of(rng.random::<f64>())).collect();
    let mut x: Vec<T> = spec
        .point_from_unit_cube(&coords)
        .into_iter()
        .map(|v| v * alpha)
        .collect();
    let q = quantize_coarse(spec, &x).expect("dimensions consistent");
    for (xk, pk) in x.iter_mut().zip(&q.point) {
        *xk -= *pk;
    }
    x
}
