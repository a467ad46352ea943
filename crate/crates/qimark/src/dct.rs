//! 8×8 block DCT, zig-zag band addressing, and carrier packing.
//!
//! The transform matrix is the orthonormal DCT-II: entries
//! `cos(kπ/16)/2` arranged so that `T'·T'ᵀ = I` holds exactly to machine
//! precision, which makes frequency-domain and spatial-domain distortion
//! identical before pixel rounding. Pixels are level-shifted by −128 before
//! the forward transform and +128 after the inverse.

use crate::error::{Error, Result};
use crate::plane::ImagePlane;
use crate::real::Real;

pub const BLOCK: usize = 8;
const BLOCK_AREA: usize = 64;

/// The orthonormal 8×8 DCT matrix `T'`.
pub fn dct_matrix<T: Real>() -> [[T; 8]; 8] {
    // gamma(k) = cos(k*pi/16); rows follow the standard even/odd sign layout
    let g = |k: i32| (k as f64 * std::f64::consts::PI / 16.0).cos() / 2.0;
    let pattern: [[i32; 8]; 8] = [
        [4, 4, 4, 4, 4, 4, 4, 4],
        [1, 3, 5, 7, -7, -5, -3, -1],
        [2, 6, -6, -2, -2, -6, 6, 2],
        [3, -7, -1, -5, 5, 1, 7, -3],
        [4, -4, -4, 4, 4, -4, -4, 4],
        [5, -1, 7, 3, -3, -7, 1, -5],
        [6, -2, 2, -6, -6, 2, -2, 6],
        [7, -5, 3, -1, 1, -3, 5, -7],
    ];
    let mut t = [[T::zero(); 8]; 8];
    for r in 0..8 {
        for c in 0..8 {
            let k = pattern[r][c];
            let v = if k < 0 { -g(-k) } else { g(k) };
            t[r][c] = T::of(v);
        }
    }
    t
}

/// Forward transform `Y = T'·X·T'ᵀ`.
pub fn forward_dct8<T: Real>(block: &[[T; 8]; 8]) -> [[T; 8]; 8] {
    let t = dct_matrix::<T>();
    let tx = mat_mul(&t, block);
    mat_mul_bt(&tx, &t)
}

/// Inverse transform `X = T'ᵀ·Y·T'`.
pub fn inverse_dct8<T: Real>(coeffs: &[[T; 8]; 8]) -> [[T; 8]; 8] {
    let t = dct_matrix::<T>();
    let ty = mat_t_mul(&t, coeffs);
    mat_mul(&ty, &t)
}

fn mat_mul<T: Real>(a: &[[T; 8]; 8], b: &[[T; 8]; 8]) -> [[T; 8]; 8] {
    let mut out = [[T::zero(); 8]; 8];
    for r in 0..8 {
        for c in 0..8 {
            out[r][c] = (0..8).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

/// `a · bᵀ`
fn mat_mul_bt<T: Real>(a: &[[T; 8]; 8], b: &[[T; 8]; 8]) -> [[T; 8]; 8] {
    let mut out = [[T::zero(); 8]; 8];
    for r in 0..8 {
        for c in 0..8 {
            out[r][c] = (0..8).map(|k| a[r][k] * b[c][k]).sum();
        }
    }
    out
}

/// `aᵀ · b`
fn mat_t_mul<T: Real>(a: &[[T; 8]; 8], b: &[[T; 8]; 8]) -> [[T; 8]; 8] {
    let mut out = [[T::zero(); 8]; 8];
    for r in 0..8 {
        for c in 0..8 {
            out[r][c] = (0..8).map(|k| a[k][r] * b[k][c]).sum();
        }
    }
    out
}

/// Standard JPEG zig-zag scan: position 0 is DC, positions 1..=63 the AC
/// coefficients from low to high frequency.
pub fn zigzag_order() -> [(usize, usize); 64] {
    let mut order = [(0usize, 0usize); 64];
    let mut idx = 0;
    for s in 0..15usize {
        if s % 2 == 1 {
            // odd diagonals walk down-left from the top row
            let r0 = s.saturating_sub(7);
            let r1 = s.min(7);
            for r in r0..=r1 {
                order[idx] = (r, s - r);
                idx += 1;
            }
        } else {
            let r0 = s.saturating_sub(7);
            let r1 = s.min(7);
            for r in (r0..=r1).rev() {
                order[idx] = (r, s - r);
                idx += 1;
            }
        }
    }
    order
}

/// Zig-zag frequency bands over the 63 AC positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Low,
    Mid,
    High,
    Full,
}

impl Band {
    pub fn name(self) -> &'static str {
        match self {
            Band::Low => "low",
            Band::Mid => "mid",
            Band::High => "high",
            Band::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "low" => Some(Band::Low),
            "mid" => Some(Band::Mid),
            "high" => Some(Band::High),
            "full" => Some(Band::Full),
            _ => None,
        }
    }

    /// First zig-zag position of the band.
    pub fn start(self) -> usize {
        match self {
            Band::Low | Band::Full => 1,
            Band::Mid => 22,
            Band::High => 43,
        }
    }

    /// Number of AC positions in the band.
    pub fn capacity(self) -> usize {
        match self {
            Band::Low | Band::Mid | Band::High => 21,
            Band::Full => 63,
        }
    }

    pub fn all() -> [Band; 4] {
        [Band::Low, Band::Mid, Band::High, Band::Full]
    }
}

/// Which band to embed into and how many messages per block.
#[derive(Debug, Clone, Copy)]
pub struct BandSelector {
    pub band: Band,
    /// Messages per block (`k`); each message occupies `N` consecutive
    /// coefficients from the band start.
    pub k: usize,
}

impl BandSelector {
    pub fn new(band: Band, k: usize) -> Self {
        Self { band, k }
    }

    /// Checks `k·N` against the band capacity.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let needed = self.k * dim;
        if self.k == 0 || needed > self.band.capacity() {
            return Err(Error::CapacityExceeded { needed, available: self.band.capacity() });
        }
        Ok(())
    }
}

/// Level-shifted, forward-transformed coefficients of every block,
/// zig-zag order, blocks in row-major order.
pub fn plane_coefficients<T: Real>(plane: &ImagePlane) -> Result<Vec<Vec<T>>> {
    plane.require_block_aligned()?;
    let order = zigzag_order();
    let bw = plane.width() / BLOCK;
    let bh = plane.height() / BLOCK;
    let shift = T::of(128.0);
    let mut out = Vec::with_capacity(bw * bh);
    for by in 0..bh {
        for bx in 0..bw {
            let mut block = [[T::zero(); 8]; 8];
            for (r, row) in block.iter_mut().enumerate() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v = T::of(plane.get(bx * BLOCK + c, by * BLOCK + r) as f64) - shift;
                }
            }
            let y = forward_dct8(&block);
            let mut zz = vec![T::zero(); BLOCK_AREA];
            for (i, &(r, c)) in order.iter().enumerate() {
                zz[i] = y[r][c];
            }
            out.push(zz);
        }
    }
    Ok(out)
}

/// Rebuilds the plane from zig-zag coefficient blocks: inverse transform,
/// +128 level shift, round half away from zero, clamp to `[0, 255]`.
pub fn plane_from_coefficients<T: Real>(
    coeffs: &[Vec<T>],
    width: usize,
    height: usize,
) -> Result<ImagePlane> {
    if !width.is_multiple_of(8) || !height.is_multiple_of(8) {
        return Err(Error::NotBlockAligned { width, height });
    }
    let bw = width / BLOCK;
    let bh = height / BLOCK;
    if coeffs.len() != bw * bh {
        return Err(Error::LengthMismatch { left: coeffs.len(), right: bw * bh });
    }
    let order = zigzag_order();
    let mut pixels = vec![0u8; width * height];
    for by in 0..bh {
        for bx in 0..bw {
            let zz = &coeffs[by * bw + bx];
            if zz.len() != BLOCK_AREA {
                return Err(Error::LengthMismatch { left: zz.len(), right: BLOCK_AREA });
            }
            let mut y = [[T::zero(); 8]; 8];
            for (i, &(r, c)) in order.iter().enumerate() {
                y[r][c] = zz[i];
            }
            let x = inverse_dct8(&y);
            for r in 0..8 {
                for c in 0..8 {
                    let v = (x[r][c] + T::of(128.0)).round().as_f64();
                    let clamped = v.clamp(0.0, 255.0) as u8;
                    pixels[(by * BLOCK + r) * width + bx * BLOCK + c] = clamped;
                }
            }
        }
    }
    ImagePlane::new(width, height, pixels)
}

/// Slices `k` carriers of dimension `dim` per block out of the selected band.
pub fn extract_carriers<T: Real>(
    plane: &ImagePlane,
    selector: &BandSelector,
    dim: usize,
) -> Result<Vec<Vec<T>>> {
    selector.validate(dim)?;
    let coeffs = plane_coefficients::<T>(plane)?;
    Ok(carriers_from_coefficients(&coeffs, selector, dim))
}

/// Carrier slicing over an existing coefficient grid.
pub fn carriers_from_coefficients<T: Real>(
    coeffs: &[Vec<T>],
    selector: &BandSelector,
    dim: usize,
) -> Vec<Vec<T>> {
    let start = selector.band.start();
    let mut out = Vec::with_capacity(coeffs.len() * selector.k);
    for zz in coeffs {
        for g in 0..selector.k {
            let at = start + g * dim;
            out.push(zz[at..at + dim].to_vec());
        }
    }
    out
}

/// Writes carriers back into their band positions and rebuilds the plane.
pub fn inject_carriers<T: Real>(
    plane: &ImagePlane,
    selector: &BandSelector,
    dim: usize,
    carriers: &[Vec<T>],
) -> Result<ImagePlane> {
    selector.validate(dim)?;
    let mut coeffs = plane_coefficients::<T>(plane)?;
    let expected = coeffs.len() * selector.k;
    if carriers.len() != expected {
        return Err(Error::LengthMismatch { left: carriers.len(), right: expected });
    }
    write_carriers_into_coefficients(&mut coeffs, selector, dim, carriers)?;
    plane_from_coefficients(&coeffs, plane.width(), plane.height())
}

/// In-place carrier write into a coefficient grid.
pub fn write_carriers_into_coefficients<T: Real>(
    coeffs: &mut [Vec<T>],
    selector: &BandSelector,
    dim: usize,
    carriers: &[Vec<T>],
) -> Result<()> {
    let start = selector.band.start();
    for (b, zz) in coeffs.iter_mut().enumerate() {
        for g in 0..selector.k {
            let carrier = &carriers[b * selector.k + g];
            if carrier.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: carrier.len() });
            }
            let at = start + g * dim;
            zz[at..at + dim].copy_from_slice(carrier);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn matrix_row_zero_and_entry_values() {
        let t = dct_matrix::<f64>();
        let expect = 1.0 / (2.0 * 2f64.sqrt());
        for c in 0..8 {
            assert!((t[0][c] - expect).abs() < 1e-15);
        }
        assert!((t[1][0] - (std::f64::consts::PI / 16.0).cos() / 2.0).abs() < 1e-15);
        assert!((t[1][0] - 0.4904).abs() < 1e-4);
    }

    #[test]
    fn matrix_is_orthonormal() {
        let t = dct_matrix::<f64>();
        for i in 0..8 {
            for j in 0..8 {
                let dot: f64 = (0..8).map(|k| t[i][k] * t[j][k]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_block_concentrates_in_dc() {
        let block = [[128.0f64; 8]; 8];
        let y = forward_dct8(&block);
        assert!((y[0][0] - 1024.0).abs() < 1e-9);
        for r in 0..8 {
            for c in 0..8 {
                if (r, c) != (0, 0) {
                    assert!(y[r][c].abs() < 1e-9);
                }
            }
        }
        let zeros = forward_dct8(&[[0.0f64; 8]; 8]);
        assert!(zeros.iter().flatten().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn forward_inverse_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..50 {
            let mut block = [[0.0f64; 8]; 8];
            for row in &mut block {
                for v in row.iter_mut() {
                    *v = rng.random::<f64>() * 255.0;
                }
            }
            let back = inverse_dct8(&forward_dct8(&block));
            for r in 0..8 {
                for c in 0..8 {
                    assert!((back[r][c] - block[r][c]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn zigzag_prefix_is_standard() {
        let order = zigzag_order();
        assert_eq!(order[0], (0, 0));
        assert_eq!(order[1], (0, 1));
        assert_eq!(order[2], (1, 0));
        assert_eq!(order[3], (2, 0));
        assert_eq!(order[4], (1, 1));
        assert_eq!(order[5], (0, 2));
        assert_eq!(order[63], (7, 7));
        // a permutation of all 64 positions
        let mut seen = [[false; 8]; 8];
        for &(r, c) in &order {
            assert!(!seen[r][c]);
            seen[r][c] = true;
        }
    }

    #[test]
    fn bands_disjointly_cover_ac_positions() {
        let mut covered = vec![0usize; 64];
        for band in [Band::Low, Band::Mid, Band::High] {
            for p in band.start()..band.start() + band.capacity() {
                covered[p] += 1;
            }
        }
        assert_eq!(covered[0], 0);
        assert!(covered[1..].iter().all(|&c| c == 1));
        assert_eq!(Band::Full.start(), 1);
        assert_eq!(Band::Full.capacity(), 63);
    }

    #[test]
    fn selector_capacity_enforced() {
        assert!(BandSelector::new(Band::Low, 10).validate(2).is_ok());
        assert!(BandSelector::new(Band::Low, 11).validate(2).is_err());
        assert!(BandSelector::new(Band::Full, 31).validate(2).is_ok());
        assert!(BandSelector::new(Band::High, 2).validate(8).is_ok());
        assert!(BandSelector::new(Band::High, 3).validate(8).is_err());
        assert!(BandSelector::new(Band::Low, 0).validate(2).is_err());
    }

    #[test]
    fn carrier_positions_follow_band_start() {
        let mut pixels = vec![0u8; 64];
        pixels[1] = 200; // (0,1) feeds zig-zag position 1
        let plane = ImagePlane::new(8, 8, pixels).unwrap();
        let sel = BandSelector::new(Band::Low, 1);
        let carriers = extract_carriers::<f64>(&plane, &sel, 2).unwrap();
        assert_eq!(carriers.len(), 1);
        let coeffs = plane_coefficients::<f64>(&plane).unwrap();
        assert_eq!(carriers[0], coeffs[0][1..3].to_vec());
    }

    #[test]
    fn inject_extract_unmodified_recovers_pixels() {
        let mut rng = ChaCha12Rng::seed_from_u64(90);
        let pixels: Vec<u8> = (0..24 * 16).map(|_| rng.random_range(0..=255)).collect();
        let plane = ImagePlane::new(24, 16, pixels).unwrap();
        let sel = BandSelector::new(Band::Mid, 3);
        let carriers = extract_carriers::<f64>(&plane, &sel, 2).unwrap();
        let back = inject_carriers(&plane, &sel, 2, &carriers).unwrap();
        assert_eq!(back, plane);
    }

    #[test]
    fn misaligned_plane_rejected() {
        let plane = ImagePlane::new(12, 8, vec![0; 96]).unwrap();
        assert!(plane_coefficients::<f64>(&plane).is_err());
    }
}
