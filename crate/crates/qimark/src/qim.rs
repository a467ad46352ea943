//! The four embedding schemes and the common coset-distance detector.
//!
//! Plain QIM quantizes the carrier all the way onto a coset point. The
//! content-aware variants first remap message indices through a learned
//! permutation; the minimum-distortion variants stop `r_pack − ε` short of
//! the coset point when the carrier is already outside the target's Voronoi
//! cell, and leave it untouched when it is inside.

use crate::codebook::Permutation;
use crate::error::{Error, Result};
use crate::lattice::{nearest_point, neighbor, quantize_coarse, CosetTable, LatticeSpec};
use crate::message::Message;
use crate::real::{norm, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Qim,
    CaQim,
    MdQim,
    CamdQim,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Qim => "qim",
            SchemeKind::CaQim => "ca",
            SchemeKind::MdQim => "md",
            SchemeKind::CamdQim => "camd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "qim" => Some(SchemeKind::Qim),
            "ca" | "ca-qim" => Some(SchemeKind::CaQim),
            "md" | "md-qim" => Some(SchemeKind::MdQim),
            "camd" | "camd-qim" => Some(SchemeKind::CamdQim),
            _ => None,
        }
    }

    /// Content-aware schemes need the learned permutation as side
    /// information.
    pub fn uses_key(self) -> bool {
        matches!(self, SchemeKind::CaQim | SchemeKind::CamdQim)
    }

    /// Minimum-distortion schemes take the boundary offset `ε`.
    pub fn uses_epsilon(self) -> bool {
        matches!(self, SchemeKind::MdQim | SchemeKind::CamdQim)
    }

    pub fn all() -> [SchemeKind; 4] {
        [SchemeKind::Qim, SchemeKind::CaQim, SchemeKind::MdQim, SchemeKind::CamdQim]
    }
}

/// Scheme selection plus the optional `ε` override.
#[derive(Debug, Clone, Copy)]
pub struct Scheme<T> {
    pub kind: SchemeKind,
    /// Boundary offset for MD/CAMD. `None` selects the default
    /// `10⁻³·d_min`; must satisfy `0 < ε < r_pack`.
    pub epsilon: Option<T>,
}

impl<T: Real> Scheme<T> {
    pub fn new(kind: SchemeKind) -> Self {
        Self { kind, epsilon: None }
    }

    pub fn with_epsilon(kind: SchemeKind, epsilon: T) -> Self {
        Self { kind, epsilon: Some(epsilon) }
    }

    pub fn effective_epsilon(&self, spec: &LatticeSpec<T>) -> T {
        self.epsilon.unwrap_or_else(|| T::of(1e-3) * spec.d_min())
    }
}

/// Quantizes `s` onto coset `i`: `Q_{Λc}(s − d_i) + d_i`.
pub fn embed_to_coset<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    coset: usize,
    s: &[T],
) -> Result<Vec<T>> {
    if coset >= table.len() {
        return Err(Error::CosetIndexOutOfRange { index: coset, count: table.len() });
    }
    let d = table.rep(coset);
    let shifted: Vec<T> = s.iter().zip(d).map(|(&a, &b)| a - b).collect();
    let q = quantize_coarse(spec, &shifted)?;
    Ok(q.point.iter().zip(d).map(|(&a, &b)| a + b).collect())
}

/// Plain QIM embedding.
pub fn embed_qim<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    s: &[T],
    m: &Message,
) -> Result<Vec<T>> {
    embed_to_coset(spec, table, table.index_of(m)?, s)
}

/// Content-aware QIM: QIM through the learned coset permutation.
pub fn embed_ca<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    gamma: &Permutation,
    s: &[T],
    m: &Message,
) -> Result<Vec<T>> {
    if gamma.len() != table.len() {
        return Err(Error::LengthMismatch { left: gamma.len(), right: table.len() });
    }
    embed_to_coset(spec, table, gamma.map(table.index_of(m)?), s)
}

fn embed_md_to_coset<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    coset: usize,
    s: &[T],
    epsilon: T,
) -> Result<Vec<T>> {
    let r_pack = spec.r_pack();
    assert!(
        epsilon > T::zero() && epsilon < r_pack,
        "epsilon must lie in (0, r_pack)"
    );
    if coset >= table.len() {
        return Err(Error::CosetIndexOutOfRange { index: coset, count: table.len() });
    }
    let d = table.rep(coset);
    let shifted: Vec<T> = s.iter().zip(d).map(|(&a, &b)| a - b).collect();
    let coarse = quantize_coarse(spec, &shifted)?;
    // target fine point of the coset and its integer coordinates
    let target: Vec<T> = coarse.point.iter().zip(d).map(|(&a, &b)| a + b).collect();
    let msg = table.message_of(coset);
    let target_coords: Vec<i64> = coarse
        .coords
        .iter()
        .zip(msg.components())
        .map(|(&z, &c)| z + c as i64)
        .collect();
    // carrier already inside the target's fine Voronoi cell: leave it alone
    let fine = nearest_point(spec, s)?;
    if fine.coords == target_coords {
        return Ok(s.to_vec());
    }
    let p: Vec<T> = target.iter().zip(s).map(|(&q, &v)| q - v).collect();
    let pn = norm(&p);
    assert!(pn > T::zero(), "p cannot vanish outside the Voronoi cell");
    let step = (r_pack - epsilon) / pn;
    Ok(target.iter().zip(&p).map(|(&q, &pk)| q - pk * step).collect())
}

/// Minimum-distortion QIM with identity labeling.
pub fn embed_md<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    s: &[T],
    m: &Message,
    epsilon: T,
) -> Result<Vec<T>> {
    embed_md_to_coset(spec, table, table.index_of(m)?, s, epsilon)
}

/// Content-aware minimum-distortion QIM.
pub fn embed_camd<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    gamma: &Permutation,
    s: &[T],
    m: &Message,
    epsilon: T,
) -> Result<Vec<T>> {
    if gamma.len() != table.len() {
        return Err(Error::LengthMismatch { left: gamma.len(), right: table.len() });
    }
    embed_md_to_coset(spec, table, gamma.map(table.index_of(m)?), s, epsilon)
}

/// Scheme dispatch; CA/CAMD require `gamma`.
pub fn embed<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    scheme: &Scheme<T>,
    gamma: Option<&Permutation>,
    s: &[T],
    m: &Message,
) -> Result<Vec<T>> {
    match scheme.kind {
        SchemeKind::Qim => embed_qim(spec, table, s, m),
        SchemeKind::MdQim => embed_md(spec, table, s, m, scheme.effective_epsilon(spec)),
        SchemeKind::CaQim => {
            let g = gamma.ok_or(Error::MissingKey)?;
            embed_ca(spec, table, g, s, m)
        }
        SchemeKind::CamdQim => {
            let g = gamma.ok_or(Error::MissingKey)?;
            embed_camd(spec, table, g, s, m, scheme.effective_epsilon(spec))
        }
    }
}

/// Blind detector shared by all schemes: nearest coset, then the permutation
/// inverse (identity when `gamma` is `None`), then delabeling.
pub fn detect<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    gamma: Option<&Permutation>,
    y: &[T],
) -> Result<Message> {
    let j = neighbor(spec, table, y)?;
    let index = match gamma {
        Some(g) => {
            if g.len() != table.len() {
                return Err(Error::LengthMismatch { left: g.len(), right: table.len() });
            }
            g.position_of(j)
        }
        None => j,
    };
    Ok(table.message_of(index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dist_to_coset, LatticeKind};
    use crate::real::dist;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn zn1(alpha: u32) -> (LatticeSpec<f64>, CosetTable<f64>) {
        let spec = LatticeSpec::zn(1, alpha, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        (spec, table)
    }

    fn msg(components: &[u8], alpha: u32) -> Message {
        Message::new(components.to_vec(), alpha).unwrap()
    }

    #[test]
    fn embed_qim_scalar_examples() {
        let (spec, table) = zn1(2);
        assert_eq!(embed_qim(&spec, &table, &[3.7], &msg(&[0], 2)).unwrap(), vec![4.0]);
        assert_eq!(embed_qim(&spec, &table, &[3.7], &msg(&[1], 2)).unwrap(), vec![3.0]);
    }

    #[test]
    fn embed_qim_carrier_already_on_coset() {
        let spec = LatticeSpec::new(LatticeKind::D2Example, 2, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let m = table.message_of(2);
        let out = embed_qim(&spec, &table, &[127.0, 111.0], &m).unwrap();
        assert_eq!(out, vec![127.0, 111.0]);
        // output is a point of coset 2
        assert_eq!(dist_to_coset(&spec, &table, &out, 2).unwrap(), 0.0);
    }

    #[test]
    fn embed_ca_remaps_through_gamma() {
        // the 1-D worked setting: matching on W=[[1,3],[5,0]] gives gamma=[1,0]
        let (spec, table) = zn1(2);
        let gamma = Permutation::new(vec![1, 0]).unwrap();
        let out = embed_ca(&spec, &table, &gamma, &[3.7], &msg(&[0], 2)).unwrap();
        assert_eq!(out, vec![3.0]);
    }

    #[test]
    fn embed_ca_identity_equals_qim_bitwise() {
        let spec = LatticeSpec::new(LatticeKind::A2, 2, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let id = Permutation::identity(table.len());
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = [(rng.random::<f64>() - 0.5) * 9.0, (rng.random::<f64>() - 0.5) * 9.0];
            let m = table.message_of(rng.random_range(0..table.len()));
            let a = embed_ca(&spec, &table, &id, &s, &m).unwrap();
            let b = embed_qim(&spec, &table, &s, &m).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn embed_camd_identity_equals_md_bitwise() {
        let spec = LatticeSpec::new(LatticeKind::D4, 4, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let id = Permutation::identity(table.len());
        let eps = 1e-3 * spec.d_min();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..200 {
            let s: Vec<f64> = (0..4).map(|_| (rng.random::<f64>() - 0.5) * 9.0).collect();
            let m = table.message_of(rng.random_range(0..table.len()));
            let a = embed_camd(&spec, &table, &id, &s, &m, eps).unwrap();
            let b = embed_md(&spec, &table, &s, &m, eps).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn embed_md_scalar_examples() {
        let (spec, table) = zn1(2);
        // carrier already in the correct region stays put
        assert_eq!(embed_md(&spec, &table, &[3.7], &msg(&[0], 2), 0.01).unwrap(), vec![3.7]);
        // otherwise it lands r_pack - eps short of the target point
        let out = embed_md(&spec, &table, &[3.7], &msg(&[1], 2), 0.01).unwrap();
        assert!((out[0] - 3.49).abs() < 1e-12);
        // detector reads the odd coset back
        let got = detect(&spec, &table, None, &out).unwrap();
        assert_eq!(got.components(), &[1]);
    }

    #[test]
    fn embed_md_keeps_in_region_carriers_on_a2() {
        let spec = LatticeSpec::new(LatticeKind::A2, 2, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let eps = 1e-3;
        let mut hits = 0;
        for _ in 0..500 {
            let s = [(rng.random::<f64>() - 0.5) * 9.0, (rng.random::<f64>() - 0.5) * 9.0];
            let j = neighbor(&spec, &table, &s).unwrap();
            let m = table.message_of(j);
            let out = embed_md(&spec, &table, &s, &m, eps).unwrap();
            assert_eq!(out, s.to_vec());
            hits += 1;
        }
        assert_eq!(hits, 500);
    }

    #[test]
    fn round_trip_all_schemes_all_lattices() {
        let kinds = [
            (LatticeKind::Zn, 2),
            (LatticeKind::A2, 2),
            (LatticeKind::D4, 4),
            (LatticeKind::E8, 8),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for (kind, dim) in kinds {
            let spec = LatticeSpec::<f64>::new(kind, dim, 2, 1.0).unwrap();
            let table = CosetTable::build(&spec).unwrap();
            // an arbitrary non-identity permutation for the CA variants
            let mut g: Vec<usize> = (0..table.len()).collect();
            g.rotate_left(1);
            let gamma = Permutation::new(g).unwrap();
            for kind in SchemeKind::all() {
                let scheme = Scheme::<f64>::new(kind);
                for _ in 0..250 {
                    let s: Vec<f64> =
                        (0..dim).map(|_| (rng.random::<f64>() - 0.5) * 11.0).collect();
                    let m = table.message_of(rng.random_range(0..table.len()));
                    let y = embed(&spec, &table, &scheme, Some(&gamma), &s, &m).unwrap();
                    let got = detect(
                        &spec,
                        &table,
                        if kind.uses_key() { Some(&gamma) } else { None },
                        &y,
                    )
                    .unwrap();
                    assert_eq!(got, m, "{:?} on {:?}", kind, spec.kind());
                }
            }
        }
    }

    #[test]
    fn md_never_moves_farther_than_full_quantization() {
        let spec = LatticeSpec::new(LatticeKind::A2, 2, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let mut g: Vec<usize> = (0..table.len()).collect();
        g.rotate_left(1);
        let gamma = Permutation::new(g).unwrap();
        let eps = 1e-3;
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        for _ in 0..1000 {
            let s = [(rng.random::<f64>() - 0.5) * 9.0, (rng.random::<f64>() - 0.5) * 9.0];
            let m = table.message_of(rng.random_range(0..table.len()));
            let dq = dist(&s, &embed_qim(&spec, &table, &s, &m).unwrap());
            let dm = dist(&s, &embed_md(&spec, &table, &s, &m, eps).unwrap());
            assert!(dm <= dq + 1e-12);
            let dca = dist(&s, &embed_ca(&spec, &table, &gamma, &s, &m).unwrap());
            let dcamd = dist(&s, &embed_camd(&spec, &table, &gamma, &s, &m, eps).unwrap());
            assert!(dcamd <= dca + 1e-12);
        }
    }

    #[test]
    fn camd_output_inside_packing_sphere_or_unchanged() {
        let spec = LatticeSpec::new(LatticeKind::D4, 4, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let gamma = Permutation::identity(table.len());
        let eps = 0.05;
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        for _ in 0..500 {
            let s: Vec<f64> = (0..4).map(|_| (rng.random::<f64>() - 0.5) * 9.0).collect();
            let m = table.message_of(rng.random_range(0..table.len()));
            let y = embed_camd(&spec, &table, &gamma, &s, &m, eps).unwrap();
            if y != s {
                let target = embed_qim(&spec, &table, &s, &m).unwrap();
                let d = dist(&y, &target);
                assert!(d <= spec.r_pack() - eps + 1e-12);
            }
        }
    }

    #[test]
    fn detect_with_inverse_permutation_example() {
        let (spec, table) = zn1(2);
        let gamma = Permutation::new(vec![1, 0]).unwrap();
        // 3.49 decodes into coset 1, which gamma maps message 0 onto
        let got = detect(&spec, &table, Some(&gamma), &[3.49]).unwrap();
        assert_eq!(got.components(), &[0]);
    }

    #[test]
    fn camd_tolerates_noise_below_epsilon() {
        let spec = LatticeSpec::new(LatticeKind::A2, 2, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        let gamma = Permutation::identity(table.len());
        let eps = 0.05;
        let mut rng = ChaCha12Rng::seed_from_u64(51);
        let mut moved = 0;
        for _ in 0..500 {
            let s = [(rng.random::<f64>() - 0.5) * 9.0, (rng.random::<f64>() - 0.5) * 9.0];
            let m = table.message_of(rng.random_range(0..table.len()));
            let y = embed_camd(&spec, &table, &gamma, &s, &m, eps).unwrap();
            if y == s.to_vec() {
                continue; // unchanged branch has no guaranteed margin
            }
            moved += 1;
            let mut n = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
            let scale = 0.9 * eps / crate::real::norm(&n);
            n.iter_mut().for_each(|v| *v *= scale);
            let noisy = [y[0] + n[0], y[1] + n[1]];
            assert_eq!(detect(&spec, &table, Some(&gamma), &noisy).unwrap(), m);
        }
        assert!(moved > 100);
    }

    #[test]
    fn missing_key_is_an_error() {
        let (spec, table) = zn1(2);
        let scheme = Scheme::<f64>::new(SchemeKind::CaQim);
        let err = embed(&spec, &table, &scheme, None, &[0.3], &msg(&[0], 2)).unwrap_err();
        assert!(matches!(err, Error::MissingKey));
    }
}
