//! Watermark messages and their bit-level packing.
//!
//! A message is one symbol vector in `Z_alpha^N` per carrier. When `alpha`
//! is a power of two each component packs `log2(alpha)` bits, most
//! significant bit first.

use rand::Rng;

use crate::error::{Error, Result};

/// A message vector `m` with every component in `[0, alpha)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message(Vec<u8>);

impl Message {
    pub fn new(components: Vec<u8>, alpha: u32) -> Result<Self> {
        for &v in &components {
            if u32::from(v) >= alpha {
                return Err(Error::SymbolOutOfRange { value: v, alpha });
            }
        }
        Ok(Self(components))
    }

    /// Constructs without range validation; used by trusted internal paths.
    pub(crate) fn from_raw(components: Vec<u8>) -> Self {
        Self(components)
    }

    pub fn components(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Number of bits carried by one symbol component.
///
/// Defined only for power-of-two `alpha`.
pub fn bits_per_component(alpha: u32) -> Result<usize> {
    if alpha < 2 || !alpha.is_power_of_two() {
        return Err(Error::AlphaNotPowerOfTwo(alpha));
    }
    Ok(alpha.trailing_zeros() as usize)
}

/// Packs a bit stream (values 0/1) into `count` messages of `dim` symbols.
///
/// Bits map to symbols most significant bit first; symbols fill each message
/// in order.
pub fn messages_from_bits(bits: &[u8], alpha: u32, dim: usize, count: usize) -> Result<Vec<Message>> {
    let bpc = bits_per_component(alpha)?;
    let needed = count * dim * bpc;
    if bits.len() < needed {
        return Err(Error::InsufficientBits { needed, got: bits.len() });
    }
    let mut out = Vec::with_capacity(count);
    let mut pos = 0;
    for _ in 0..count {
        let mut comps = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut v = 0u8;
            for _ in 0..bpc {
                v = (v << 1) | (bits[pos] & 1);
                pos += 1;
            }
            comps.push(v);
        }
        out.push(Message::from_raw(comps));
    }
    Ok(out)
}

/// Unpacks messages back into a bit stream; inverse of [`messages_from_bits`].
pub fn bits_from_messages(messages: &[Message], alpha: u32) -> Result<Vec<u8>> {
    let bpc = bits_per_component(alpha)?;
    let mut bits = Vec::new();
    for m in messages {
        for &c in m.components() {
            for b in (0..bpc).rev() {
                bits.push((c >> b) & 1);
            }
        }
    }
    Ok(bits)
}

/// Draws `count` bits with `P(bit = 0) = p0`.
pub fn random_biased_bits<R: Rng>(count: usize, p0: f64, rng: &mut R) -> Vec<u8> {
    (0..count)
        .map(|_| if rng.random::<f64>() < p0 { 0 } else { 1 })
        .collect()
}

/// Draws `count` messages with uniformly distributed symbols.
pub fn random_messages<R: Rng>(count: usize, alpha: u32, dim: usize, rng: &mut R) -> Vec<Message> {
    (0..count)
        .map(|_| Message::from_raw((0..dim).map(|_| rng.random_range(0..alpha) as u8).collect()))
        .collect()
}
