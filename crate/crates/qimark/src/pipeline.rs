//! Image-level plumbing: carriers in and out of planes, bit embedding and
//! blind extraction, and codebook learning over carrier streams.

use crate::codebook::{learn_assignment, CodebookAssignment, Permutation};
use crate::dct::{
    carriers_from_coefficients, plane_coefficients, plane_from_coefficients,
    write_carriers_into_coefficients, BandSelector,
};
use crate::error::{Error, Result};
use crate::lattice::{CosetTable, LatticeSpec};
use crate::message::{bits_from_messages, bits_per_component, messages_from_bits, Message};
use crate::metrics::{plane_values, Domain, MetricsReport};
use crate::plane::ImagePlane;
use crate::qim::{detect, embed, Scheme};
use crate::real::Real;

/// Everything needed to run one embedding configuration.
#[derive(Debug, Clone, Copy)]
pub struct EmbedSetup<'a, T> {
    pub spec: &'a LatticeSpec<T>,
    pub table: &'a CosetTable<T>,
    pub scheme: Scheme<T>,
    pub gamma: Option<&'a Permutation>,
    pub selector: BandSelector,
}

impl<'a, T: Real> EmbedSetup<'a, T> {
    /// Messages the plane can hold under this configuration.
    pub fn message_capacity(&self, plane: &ImagePlane) -> Result<usize> {
        plane.require_block_aligned()?;
        self.selector.validate(self.spec.dimension())?;
        Ok(plane.width() / 8 * (plane.height() / 8) * self.selector.k)
    }

    /// Bits the plane can hold under this configuration.
    pub fn bit_capacity(&self, plane: &ImagePlane) -> Result<usize> {
        let bpc = bits_per_component(self.spec.alpha())?;
        Ok(self.message_capacity(plane)? * self.spec.dimension() * bpc)
    }
}

/// Output of [`embed_bits_into_plane`]: the watermarked plane plus metric
/// reports for both domains. Frequency metrics compare the full coefficient
/// grids before pixel rounding; spatial metrics compare the pixel planes.
#[derive(Debug, Clone)]
pub struct EmbedOutcome<T> {
    pub plane: ImagePlane,
    pub frequency: MetricsReport<T>,
    pub spatial: MetricsReport<T>,
}

/// Embeds a bit stream into the plane's selected band.
pub fn embed_bits_into_plane<T: Real>(
    setup: &EmbedSetup<T>,
    plane: &ImagePlane,
    bits: &[u8],
) -> Result<EmbedOutcome<T>> {
    let dim = setup.spec.dimension();
    let count = setup.message_capacity(plane)?;
    let messages = messages_from_bits(bits, setup.spec.alpha(), dim, count)?;

    let mut coeffs = plane_coefficients::<T>(plane)?;
    let original_flat: Vec<T> = coeffs.iter().flatten().copied().collect();
    let carriers = carriers_from_coefficients(&coeffs, &setup.selector, dim);
    let embedded = embed_carriers(setup, &carriers, &messages)?;
    write_carriers_into_coefficients(&mut coeffs, &setup.selector, dim, &embedded)?;
    let modified_flat: Vec<T> = coeffs.iter().flatten().copied().collect();

    let new_plane = plane_from_coefficients(&coeffs, plane.width(), plane.height())?;
    let frequency = MetricsReport::compute(Domain::Frequency, &original_flat, &modified_flat)?;
    let spatial = MetricsReport::compute(
        Domain::Spatial,
        &plane_values::<T>(plane),
        &plane_values::<T>(&new_plane),
    )?;
    Ok(EmbedOutcome { plane: new_plane, frequency, spatial })
}

/// Blind extraction: reads the watermark bits back from a plane using only
/// the configuration (and key), never the original image.
pub fn extract_bits_from_plane<T: Real>(
    setup: &EmbedSetup<T>,
    plane: &ImagePlane,
) -> Result<Vec<u8>> {
    let messages = extract_messages_from_plane(setup, plane)?;
    bits_from_messages(&messages, setup.spec.alpha())
}

/// Blind extraction at message granularity.
pub fn extract_messages_from_plane<T: Real>(
    setup: &EmbedSetup<T>,
    plane: &ImagePlane,
) -> Result<Vec<Message>> {
    let dim = setup.spec.dimension();
    setup.selector.validate(dim)?;
    let coeffs = plane_coefficients::<T>(plane)?;
    let carriers = carriers_from_coefficients(&coeffs, &setup.selector, dim);
    detect_carriers(setup, &carriers)
}

/// Embeds message-per-carrier over a carrier list.
pub fn embed_carriers<T: Real>(
    setup: &EmbedSetup<T>,
    carriers: &[Vec<T>],
    messages: &[Message],
) -> Result<Vec<Vec<T>>> {
    if carriers.len() != messages.len() {
        return Err(Error::LengthMismatch { left: carriers.len(), right: messages.len() });
    }
    carriers
        .iter()
        .zip(messages)
        .map(|(s, m)| embed(setup.spec, setup.table, &setup.scheme, setup.gamma, s, m))
        .collect()
}

/// Detects one message per carrier.
pub fn detect_carriers<T: Real>(
    setup: &EmbedSetup<T>,
    carriers: &[Vec<T>],
) -> Result<Vec<Message>> {
    let gamma = if setup.scheme.kind.uses_key() {
        Some(setup.gamma.ok_or(Error::MissingKey)?)
    } else {
        None
    };
    carriers
        .iter()
        .map(|y| detect(setup.spec, setup.table, gamma, y))
        .collect()
}

/// Learns a codebook over an image corpus: extracts every carrier, pairs it
/// with the provided message stream, and solves the matching.
pub fn learn_from_planes<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    selector: &BandSelector,
    planes: &[ImagePlane],
    messages: &[Message],
) -> Result<CodebookAssignment> {
    if planes.is_empty() {
        return Err(Error::EmptyInput("image corpus"));
    }
    let dim = spec.dimension();
    let mut carriers = Vec::new();
    for plane in planes {
        let coeffs = plane_coefficients::<T>(plane)?;
        carriers.extend(carriers_from_coefficients(&coeffs, selector, dim));
    }
    if carriers.len() != messages.len() {
        return Err(Error::LengthMismatch { left: carriers.len(), right: messages.len() });
    }
    learn_assignment(spec, table, &carriers, messages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dct::Band;
    use crate::lattice::LatticeKind;
    use crate::message::random_biased_bits;
    use crate::qim::SchemeKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn smooth_plane(w: usize, h: usize, seed: u64) -> ImagePlane {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut pixels = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let base = 110.0
                    + 60.0 * ((x as f64) * 0.043).sin()
                    + 45.0 * ((y as f64) * 0.031).cos()
                    + 20.0 * (((x + y) as f64) * 0.017).sin();
                let noise = rng.random::<f64>() * 8.0 - 4.0;
                pixels.push((base + noise).clamp(0.0, 255.0) as u8);
            }
        }
        ImagePlane::new(w, h, pixels).unwrap()
    }

    #[test]
    fn image_round_trip_qim_recovers_bits() {
        let spec = LatticeSpec::<f64>::new(LatticeKind::A2, 2, 4, 8.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let setup = EmbedSetup {
            spec: &spec,
            table: &table,
            scheme: Scheme::new(SchemeKind::Qim),
            gamma: None,
            selector: BandSelector::new(Band::Mid, 2),
        };
        let plane = smooth_plane(64, 64, 1);
        let nbits = setup.bit_capacity(&plane).unwrap();
        assert_eq!(nbits, 8 * 8 * 2 * 2 * 2);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let bits = random_biased_bits(nbits, 0.9, &mut rng);
        let out = embed_bits_into_plane(&setup, &plane, &bits).unwrap();
        let got = extract_bits_from_plane(&setup, &out.plane).unwrap();
        assert_eq!(got, bits);
        assert!(out.frequency.mse > 0.0);
        assert!(out.spatial.psnr > 30.0);
    }

    #[test]
    fn image_round_trip_camd_with_wide_margin() {
        // MD variants survive pixel rounding only when epsilon leaves a
        // real noise margin
        let spec = LatticeSpec::<f64>::new(LatticeKind::A2, 2, 4, 16.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let gamma = Permutation::identity(table.len());
        let setup = EmbedSetup {
            spec: &spec,
            table: &table,
            scheme: Scheme::with_epsilon(SchemeKind::CamdQim, 0.45 * spec.r_pack()),
            gamma: Some(&gamma),
            selector: BandSelector::new(Band::High, 1),
        };
        let plane = smooth_plane(64, 64, 3);
        let nbits = setup.bit_capacity(&plane).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let bits = random_biased_bits(nbits, 0.9, &mut rng);
        let out = embed_bits_into_plane(&setup, &plane, &bits).unwrap();
        let got = extract_bits_from_plane(&setup, &out.plane).unwrap();
        assert_eq!(got, bits);
    }

    #[test]
    fn insufficient_bits_errors() {
        let spec = LatticeSpec::<f64>::zn(2, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let setup = EmbedSetup {
            spec: &spec,
            table: &table,
            scheme: Scheme::new(SchemeKind::Qim),
            gamma: None,
            selector: BandSelector::new(Band::Low, 1),
        };
        let plane = smooth_plane(16, 16, 5);
        let err = embed_bits_into_plane(&setup, &plane, &[0, 1, 0]).unwrap_err();
        assert!(matches!(err, Error::InsufficientBits { .. }));
    }

    #[test]
    fn capacity_violation_errors() {
        let spec = LatticeSpec::<f64>::new(LatticeKind::E8, 8, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let setup = EmbedSetup {
            spec: &spec,
            table: &table,
            scheme: Scheme::new(SchemeKind::Qim),
            gamma: None,
            selector: BandSelector::new(Band::Low, 3), // 24 > 21
        };
        let plane = smooth_plane(16, 16, 6);
        assert!(matches!(
            setup.message_capacity(&plane),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn learning_over_planes_beats_identity_p1() {
        let spec = LatticeSpec::<f64>::new(LatticeKind::A2, 2, 4, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let selector = BandSelector::new(Band::High, 2);
        let planes = vec![smooth_plane(64, 64, 7), smooth_plane(64, 64, 8)];
        let per_plane = 64 * 64 / 64 * selector.k;
        let total = per_plane * planes.len();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let bits = random_biased_bits(total * 2 * 2, 0.9, &mut rng);
        let messages = messages_from_bits(&bits, 4, 2, total).unwrap();
        let learned = learn_from_planes(&spec, &table, &selector, &planes, &messages).unwrap();
        let p1 = crate::codebook::empirical_p1(&learned.source, &learned.gamma).unwrap();
        let p1_id = crate::codebook::empirical_p1(
            &learned.source,
            &Permutation::identity(table.len()),
        )
        .unwrap();
        assert!(p1 >= p1_id);
    }
}
