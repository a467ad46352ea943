//! Lattice arithmetic: generators, closest-point decoders, nested coset
//! tables, and geometric constants.
//!
//! The fine lattice is `Λ_f = {Δ·Gz : z ∈ Z^N}` with the basis vectors as
//! matrix columns; the coarse lattice is the self-nested `Λ_c = α·Λ_f`. Coset
//! representatives are `d_i = Δ·G·φ(m_i)` over all messages `m ∈ Z_α^N`,
//! indexed mixed-radix with the first symbol most significant.

use std::collections::HashSet;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::message::Message;
use crate::real::{dist, dist_sq, norm_sq, Real};

/// The named lattices this crate ships constants and decoders for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    /// Integer lattice `Z^N`, any dimension 1..=8.
    Zn,
    /// Hexagonal lattice, dimension 2.
    A2,
    /// Two-dimensional checkerboard lattice with the generator rows
    /// `(1,0),(1,2)`; a small worked fixture, decoded by the exact oracle.
    D2Example,
    /// Checkerboard lattice, dimension 4.
    D4,
    /// Gosset lattice, dimension 8.
    E8,
}

impl LatticeKind {
    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Zn => "z",
            LatticeKind::A2 => "a2",
            LatticeKind::D2Example => "d2example",
            LatticeKind::D4 => "d4",
            LatticeKind::E8 => "e8",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "z" | "zn" => Some(LatticeKind::Zn),
            "a2" => Some(LatticeKind::A2),
            "d2example" => Some(LatticeKind::D2Example),
            "d4" => Some(LatticeKind::D4),
            "e8" => Some(LatticeKind::E8),
            _ => None,
        }
    }

    /// Dimension imposed by the lattice itself; `None` for `Z^N`.
    pub fn fixed_dimension(self) -> Option<usize> {
        match self {
            LatticeKind::Zn => None,
            LatticeKind::A2 | LatticeKind::D2Example => Some(2),
            LatticeKind::D4 => Some(4),
            LatticeKind::E8 => Some(8),
        }
    }
}

fn unit_basis_rows(kind: LatticeKind, dim: usize) -> Vec<Vec<f64>> {
    let s3h = 3f64.sqrt() / 2.0;
    match kind {
        LatticeKind::Zn => (0..dim)
            .map(|r| (0..dim).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
            .collect(),
        LatticeKind::A2 => vec![vec![1.0, 0.5], vec![0.0, s3h]],
        LatticeKind::D2Example => vec![vec![1.0, 0.0], vec![1.0, 2.0]],
        LatticeKind::D4 => vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![-1.0, 1.0, 0.0, 0.0],
            vec![0.0, -1.0, 1.0, 1.0],
            vec![0.0, 0.0, -1.0, 1.0],
        ],
        LatticeKind::E8 => vec![
            vec![2.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
            vec![0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0, 0.5],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.5],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
        ],
    }
}

/// Unit-scale minimum distance and kissing number.
fn unit_constants(kind: LatticeKind, dim: usize) -> (f64, u32) {
    match kind {
        LatticeKind::Zn => (1.0, 2 * dim as u32),
        LatticeKind::A2 => (1.0, 6),
        LatticeKind::D2Example => (2f64.sqrt(), 4),
        LatticeKind::D4 => (2f64.sqrt(), 24),
        LatticeKind::E8 => (2f64.sqrt(), 240),
    }
}

/// A fine/coarse nested lattice pair with its derived constants.
#[derive(Debug, Clone)]
pub struct LatticeSpec<T> {
    kind: LatticeKind,
    dim: usize,
    alpha: u32,
    delta: T,
    basis: SquareMatrix<T>,
    basis_inv: SquareMatrix<T>,
    det_abs: f64,
    d_min: T,
    kissing: u32,
}

impl<T: Real> LatticeSpec<T> {
    /// Builds a spec for `kind` with nesting ratio `alpha` and scale `delta`.
    ///
    /// `dim` must match the lattice's fixed dimension; for `Z^N` it selects
    /// the dimension (1..=8).
    pub fn new(kind: LatticeKind, dim: usize, alpha: u32, delta: T) -> Result<Self> {
        if alpha < 2 {
            return Err(Error::InvalidLattice(format!("alpha must be >= 2, got {alpha}")));
        }
        if delta.is_nan() || delta <= T::zero() {
            return Err(Error::InvalidLattice("delta must be positive".into()));
        }
        match kind.fixed_dimension() {
            Some(d) if d != dim => {
                return Err(Error::InvalidLattice(format!(
                    "lattice {} has dimension {d}, got {dim}",
                    kind.name()
                )))
            }
            None if !(1..=8).contains(&dim) => {
                return Err(Error::InvalidLattice(format!("z lattice dimension must be 1..=8, got {dim}")))
            }
            _ => {}
        }
        let rows = unit_basis_rows(kind, dim);
        let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let basis = SquareMatrix::<T>::from_rows(&row_refs);
        let basis_inv = basis.inverse();
        let det_abs = {
            let b64 = SquareMatrix::<f64>::from_rows(&row_refs);
            b64.determinant().abs()
        };
        let (unit_d_min, kissing) = unit_constants(kind, dim);
        verify_constants(kind, dim);
        Ok(Self {
            kind,
            dim,
            alpha,
            delta,
            basis,
            basis_inv,
            det_abs,
            d_min: delta * T::of(unit_d_min),
            kissing,
        })
    }

    /// `Z^N` spec, the most common test fixture.
    pub fn zn(dim: usize, alpha: u32, delta: T) -> Result<Self> {
        Self::new(LatticeKind::Zn, dim, alpha, delta)
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Minimum distance of the fine lattice (includes the scale).
    pub fn d_min(&self) -> T {
        self.d_min
    }

    /// Packing radius `d_min / 2`.
    pub fn r_pack(&self) -> T {
        self.d_min / T::of(2.0)
    }

    /// Kissing number of the fine lattice.
    pub fn kissing(&self) -> u32 {
        self.kissing
    }

    /// The scaled generator `Δ·G` (columns are basis vectors).
    pub fn generator(&self) -> SquareMatrix<T> {
        let mut g = self.basis.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                g.set(r, c, g.get(r, c) * self.delta);
            }
        }
        g
    }

    /// Volume of the fine Voronoi cell, `|det(Δ·G)|`.
    pub fn fine_volume(&self) -> f64 {
        self.det_abs * self.delta.as_f64().powi(self.dim as i32)
    }

    /// Volume of the coarse Voronoi cell, `α^N` times the fine volume.
    pub fn coarse_volume(&self) -> f64 {
        (self.alpha as f64).powi(self.dim as i32) * self.fine_volume()
    }

    /// Number of cosets `α^N`, guarded against overflow.
    pub fn coset_count(&self) -> Result<usize> {
        let mut count: usize = 1;
        for _ in 0..self.dim {
            count = count
                .checked_mul(self.alpha as usize)
                .ok_or(Error::CodebookTooLarge { size: usize::MAX, max: CosetTable::<T>::MAX_COSETS })?;
        }
        Ok(count)
    }

    /// Maps integer coordinates to the ambient-space lattice point.
    pub fn point_from_coords(&self, z: &[i64]) -> Vec<T> {
        self.basis
            .mul_int_vec(z)
            .into_iter()
            .map(|v| v * self.delta)
            .collect()
    }

    /// Maps `u ∈ [0,1)^N` into the fundamental parallelepiped `Δ·G·u`.
    pub fn point_from_unit_cube(&self, u: &[T]) -> Vec<T> {
        self.basis
            .mul_vec(u)
            .into_iter()
            .map(|v| v * self.delta)
            .collect()
    }

    fn unscale(&self, x: &[T]) -> Vec<T> {
        x.iter().map(|&v| v / self.delta).collect()
    }

    fn coords_from_unit_point(&self, p: &[T]) -> Vec<i64> {
        self.basis_inv
            .mul_vec(p)
            .into_iter()
            .map(|v| v.round().as_f64() as i64)
            .collect()
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got: x.len() })
        }
    }
}

/// A decoded lattice point: integer coordinates plus the ambient point.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPoint<T> {
    /// Coordinates `z` such that `point = Δ·G·z`.
    pub coords: Vec<i64>,
    pub point: Vec<T>,
}

/// Exact nearest-point decoder by bounded sphere enumeration.
///
/// Works for every [`LatticeKind`]. On exact distance ties the candidate with
/// the lexicographically smallest integer coordinate vector wins.
pub fn nearest_point_oracle<T: Real>(spec: &LatticeSpec<T>, x: &[T]) -> Result<DecodedPoint<T>> {
    spec.check_dim(x)?;
    let xs = spec.unscale(x);
    let z = sphere_decode(&spec.basis, &xs);
    let point = spec.point_from_coords(&z);
    Ok(DecodedPoint { coords: z, point })
}

/// Specialized closest-point decoders for the named lattices.
///
/// `Z^N` rounds componentwise; `D_4` rounds and repairs an odd coordinate
/// sum; `E_8` takes the better of its two `D_8` cosets; `A_2` scans the 16
/// integer coordinate candidates around the real-valued basis coordinates.
/// The returned point is always at true minimum distance.
pub fn nearest_point_fast<T: Real>(spec: &LatticeSpec<T>, x: &[T]) -> Result<DecodedPoint<T>> {
    spec.check_dim(x)?;
    let xs = spec.unscale(x);
    let (coords, unit_point) = match spec.kind {
        LatticeKind::Zn => {
            let z: Vec<i64> = xs.iter().map(|&v| v.round().as_f64() as i64).collect();
            let p = z.iter().map(|&v| T::of(v as f64)).collect();
            (z, p)
        }
        LatticeKind::D4 => {
            let zi = decode_dn(&xs);
            let p: Vec<T> = zi.iter().map(|&v| T::of(v as f64)).collect();
            let coords = spec.coords_from_unit_point(&p);
            (coords, p)
        }
        LatticeKind::E8 => {
            let p = decode_e8_point(&xs);
            let coords = spec.coords_from_unit_point(&p);
            (coords, p)
        }
        LatticeKind::A2 => {
            let u = spec.basis_inv.mul_vec(&xs);
            let lo0 = u[0].floor().as_f64() as i64;
            let lo1 = u[1].floor().as_f64() as i64;
            let mut best: Option<(T, [i64; 2])> = None;
            for z0 in lo0 - 1..=lo0 + 2 {
                for z1 in lo1 - 1..=lo1 + 2 {
                    let p = spec.basis.mul_int_vec(&[z0, z1]);
                    let d2 = dist_sq(&xs, &p);
                    if best.is_none_or(|(bd, _)| d2 < bd) {
                        best = Some((d2, [z0, z1]));
                    }
                }
            }
            let (_, z) = best.expect("candidate set nonempty");
            let z = z.to_vec();
            let p = spec.basis.mul_int_vec(&z);
            (z, p)
        }
        LatticeKind::D2Example => return Err(Error::UnsupportedLattice("d2example")),
    };
    let point = unit_point.into_iter().map(|v| v * spec.delta).collect();
    Ok(DecodedPoint { coords, point })
}

/// Closest-point decoder: the specialized routine where one exists, the
/// sphere-enumeration oracle otherwise.
pub fn nearest_point<T: Real>(spec: &LatticeSpec<T>, x: &[T]) -> Result<DecodedPoint<T>> {
    match spec.kind {
        LatticeKind::D2Example => nearest_point_oracle(spec, x),
        _ => nearest_point_fast(spec, x),
    }
}

/// Coarse-lattice quantizer `Q_{αΛ_f}(x) = α·Q_{Λ_f}(x/α)`.
pub fn quantize_coarse<T: Real>(spec: &LatticeSpec<T>, x: &[T]) -> Result<DecodedPoint<T>> {
    spec.check_dim(x)?;
    let a = T::of(spec.alpha as f64);
    let scaled: Vec<T> = x.iter().map(|&v| v / a).collect();
    let inner = nearest_point(spec, &scaled)?;
    Ok(DecodedPoint {
        coords: inner.coords.iter().map(|&z| z * spec.alpha as i64).collect(),
        point: inner.point.into_iter().map(|v| v * a).collect(),
    })
}

/// Rounds componentwise and repairs the even-coordinate-sum constraint by
/// flipping the coordinate with the largest rounding error.
fn decode_dn<T: Real>(x: &[T]) -> Vec<i64> {
    let mut z: Vec<i64> = x.iter().map(|&v| v.round().as_f64() as i64).collect();
    let sum: i64 = z.iter().sum();
    if sum.rem_euclid(2) == 1 {
        let mut worst = 0usize;
        let mut worst_err = T::neg_infinity();
        for (i, (&v, &r)) in x.iter().zip(&z).enumerate() {
            let err = (v - T::of(r as f64)).abs();
            if err > worst_err {
                worst_err = err;
                worst = i;
            }
        }
        if x[worst] > T::of(z[worst] as f64) {
            z[worst] += 1;
        } else {
            z[worst] -= 1;
        }
    }
    z
}

/// Decodes `E_8 = D_8 ∪ (D_8 + ½)`, keeping the closer coset candidate.
fn decode_e8_point<T: Real>(x: &[T]) -> Vec<T> {
    let half = T::of(0.5);
    let zi = decode_dn(x);
    let shifted: Vec<T> = x.iter().map(|&v| v - half).collect();
    let zh = decode_dn(&shifted);
    let cand_int: Vec<T> = zi.iter().map(|&v| T::of(v as f64)).collect();
    let cand_half: Vec<T> = zh.iter().map(|&v| T::of(v as f64) + half).collect();
    if dist_sq(x, &cand_int) <= dist_sq(x, &cand_half) {
        cand_int
    } else {
        cand_half
    }
}

fn lex_less(a: &[i64], b: &[i64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Schnorr-Euchner style depth-first sphere search over the generator.
///
/// Candidate distances are compared in the original coordinate frame so that
/// exactly representable ties stay exact; the rotated frame is only used for
/// pruning (with a small relative slack so true ties are never pruned away).
fn sphere_decode<T: Real>(basis: &SquareMatrix<T>, target: &[T]) -> Vec<i64> {
    let n = basis.n();
    let (q, r) = basis.qr();
    let y = q.transpose().mul_vec(target);

    struct Search<'a, T: Real> {
        basis: &'a SquareMatrix<T>,
        r: SquareMatrix<T>,
        y: Vec<T>,
        target: &'a [T],
        n: usize,
        z: Vec<i64>,
        best_z: Vec<i64>,
        best_d2: T,
        found: bool,
    }

    impl<'a, T: Real> Search<'a, T> {
        fn bound(&self) -> T {
            if self.found {
                self.best_d2 + T::of(1e-9) * (T::one() + self.best_d2)
            } else {
                T::infinity()
            }
        }

        fn descend(&mut self, level: isize, partial: T) {
            if level < 0 {
                let p = self.basis.mul_int_vec(&self.z);
                let d2 = dist_sq(self.target, &p);
                if !self.found || d2 < self.best_d2 {
                    self.found = true;
                    self.best_d2 = d2;
                    self.best_z.copy_from_slice(&self.z);
                } else if d2 == self.best_d2 && lex_less(&self.z, &self.best_z) {
                    self.best_z.copy_from_slice(&self.z);
                }
                return;
            }
            let k = level as usize;
            let mut acc = self.y[k];
            for j in k + 1..self.n {
                acc -= self.r.get(k, j) * T::of(self.z[j] as f64);
            }
            let rkk = self.r.get(k, k);
            let center = acc / rkk;
            let z0 = center.round().as_f64() as i64;
            let dir: i64 = if center >= T::of(z0 as f64) { 1 } else { -1 };
            let mut m: i64 = 0;
            loop {
                let cand = if m == 0 {
                    z0
                } else if m % 2 == 1 {
                    z0 + dir * ((m + 1) / 2)
                } else {
                    z0 - dir * (m / 2)
                };
                let t = acc - rkk * T::of(cand as f64);
                let next = partial + t * t;
                // zigzag order is nondecreasing in |cand - center|, so the
                // first overshoot ends the level
                if next > self.bound() {
                    return;
                }
                self.z[k] = cand;
                self.descend(level - 1, next);
                m += 1;
            }
        }
    }

    let mut search = Search {
        basis,
        r,
        y,
        target,
        n,
        z: vec![0; n],
        best_z: vec![0; n],
        best_d2: T::infinity(),
        found: false,
    };
    search.descend(n as isize - 1, T::zero());
    search.best_z
}

/// Enumerates all nonzero lattice vectors with norm at most `radius`
/// (unit-scale basis). Used to cross-check `d_min` and the kissing number.
fn enumerate_within(basis: &SquareMatrix<f64>, radius: f64) -> Vec<(Vec<i64>, f64)> {
    let n = basis.n();
    let (q, r) = basis.qr();
    let origin = vec![0.0; n];
    let y = q.transpose().mul_vec(&origin);
    let budget = radius * radius * (1.0 + 1e-9) + 1e-12;

    let mut out = Vec::new();
    let mut z = vec![0i64; n];
    descend_radius(basis, &r, &y, &mut z, n as isize - 1, 0.0, budget, &mut out);
    out.retain(|(zv, _)| zv.iter().any(|&c| c != 0));
    out
}

#[allow(clippy::too_many_arguments)]
fn descend_radius(
    basis: &SquareMatrix<f64>,
    r: &SquareMatrix<f64>,
    y: &[f64],
    z: &mut Vec<i64>,
    level: isize,
    partial: f64,
    budget: f64,
    out: &mut Vec<(Vec<i64>, f64)>,
) {
    let n = y.len();
    if level < 0 {
        let p = basis.mul_int_vec(z);
        let d2 = norm_sq(&p);
        if d2 <= budget {
            out.push((z.clone(), d2));
        }
        return;
    }
    let k = level as usize;
    let mut acc = y[k];
    for j in k + 1..n {
        acc -= r.get(k, j) * z[j] as f64;
    }
    let rkk = r.get(k, k);
    let center = acc / rkk;
    let z0 = center.round() as i64;
    let dir: i64 = if center >= z0 as f64 { 1 } else { -1 };
    let mut m: i64 = 0;
    loop {
        let cand = if m == 0 {
            z0
        } else if m % 2 == 1 {
            z0 + dir * ((m + 1) / 2)
        } else {
            z0 - dir * (m / 2)
        };
        let t = acc - rkk * cand as f64;
        let next = partial + t * t;
        if next > budget {
            return;
        }
        z[k] = cand;
        descend_radius(basis, r, y, z, level - 1, next, budget, out);
        z[k] = 0;
        m += 1;
    }
}

/// Verifies the stored `d_min`/kissing constants for a lattice kind by
/// short-vector enumeration within `1.5·d_min`. Runs once per kind per
/// process.
fn verify_constants(kind: LatticeKind, dim: usize) {
    static REGISTRY: OnceLock<Mutex<HashSet<(LatticeKind, usize)>>> = OnceLock::new();
    let registry = REGISTRY.get_or_init(|| Mutex::new(HashSet::new()));
    let mut seen = registry.lock().expect("constants registry poisoned");
    if !seen.insert((kind, dim)) {
        return;
    }
    let rows = unit_basis_rows(kind, dim);
    let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let basis = SquareMatrix::<f64>::from_rows(&row_refs);
    let (d_min, kissing) = unit_constants(kind, dim);
    let shell = enumerate_within(&basis, 1.5 * d_min);
    let d2 = d_min * d_min;
    let min_found = shell.iter().map(|&(_, d)| d).fold(f64::INFINITY, f64::min);
    assert!(
        (min_found - d2).abs() < 1e-9,
        "lattice {} d_min constant mismatch: enumerated {min_found}, stored {d2}",
        kind.name()
    );
    let count = shell.iter().filter(|&&(_, d)| (d - d2).abs() < 1e-9).count();
    assert_eq!(
        count as u32,
        kissing,
        "lattice {} kissing constant mismatch",
        kind.name()
    );
}

/// The `α^N` coset representatives and the message/index bijection.
#[derive(Debug, Clone)]
pub struct CosetTable<T> {
    alpha: u32,
    dim: usize,
    reps: Vec<Vec<T>>,
}

impl<T: Real> CosetTable<T> {
    /// Hard cap on table size; beyond this the representative list itself is
    /// impractical.
    pub const MAX_COSETS: usize = 1 << 20;

    pub fn build(spec: &LatticeSpec<T>) -> Result<Self> {
        let count = spec.coset_count()?;
        if count > Self::MAX_COSETS {
            return Err(Error::CodebookTooLarge { size: count, max: Self::MAX_COSETS });
        }
        let alpha = spec.alpha();
        let dim = spec.dimension();
        let mut reps = Vec::with_capacity(count);
        let mut z = vec![0i64; dim];
        for index in 0..count {
            let mut rem = index;
            for k in (0..dim).rev() {
                z[k] = (rem % alpha as usize) as i64;
                rem /= alpha as usize;
            }
            reps.push(spec.point_from_coords(&z));
        }
        Ok(Self { alpha, dim, reps })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Representative `d_i` of coset `i`.
    pub fn rep(&self, i: usize) -> &[T] {
        &self.reps[i]
    }

    /// Index of message `m` (mixed radix, first symbol most significant).
    pub fn index_of(&self, m: &Message) -> Result<usize> {
        if m.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.len() });
        }
        let mut index = 0usize;
        for &c in m.components() {
            if u32::from(c) >= self.alpha {
                return Err(Error::SymbolOutOfRange { value: c, alpha: self.alpha });
            }
            index = index * self.alpha as usize + c as usize;
        }
        Ok(index)
    }

    /// Message for coset index `i`; inverse of [`CosetTable::index_of`].
    pub fn message_of(&self, i: usize) -> Message {
        debug_assert!(i < self.len());
        let mut comps = vec![0u8; self.dim];
        let mut rem = i;
        for k in (0..self.dim).rev() {
            comps[k] = (rem % self.alpha as usize) as u8;
            rem /= self.alpha as usize;
        }
        Message::from_raw(comps)
    }

    /// Coset index of the lattice point with integer coordinates `coords`.
    pub fn index_of_coords(&self, coords: &[i64]) -> usize {
        let mut index = 0usize;
        for &c in coords {
            index = index * self.alpha as usize + c.rem_euclid(self.alpha as i64) as usize;
        }
        index
    }
}

/// Above this coset count, `neighbor` switches from the exhaustive per-coset
/// scan (which realizes the smallest-index tie-break) to the equivalent
/// fine-decode shortcut.
pub const COSET_SCAN_LIMIT: usize = 64;

/// Distance from `y` to coset `i`: `‖y − d_i − Q_{Λc}(y − d_i)‖`.
pub fn dist_to_coset<T: Real>(
    spec: &LatticeSpec<T>,
    table: &CosetTable<T>,
    y: &[T],
    i: usize,
) -> Result<T> {
    if i >= table.len() {
        return Err(Error::CosetIndexOutOfRange { index: i, count: table.len() });
    }
    spec.check_dim(y)?;
    let d = table.rep(i);
    let shifted: Vec<T> = y.iter().zip(d).map(|(&a, &b)| a - b).collect();
    let q = quantize_coarse(spec, &shifted)?;
    Ok(dist(&shifted, &q.point))
}

/// Index of the coset closest to `s`; ties go to the smallest index.
pub fn neighbor<T: Real>(spec: &LatticeSpec<T>, table: &CosetTable<T>, s: &[T]) -> Result<usize> {
    spec.check_dim(s)?;
    if table.len() <= COSET_SCAN_LIMIT {
        let mut best = 0usize;
        let mut best_d = dist_to_coset(spec, table, s, 0)?;
        for i in 1..table.len() {
            let d = dist_to_coset(spec, table, s, i)?;
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        Ok(best)
    } else {
        let fine = nearest_point(spec, s)?;
        Ok(table.index_of_coords(&fine.coords))
    }
}

/// Monte-Carlo estimate of the normalized second moment `G(Λ)`.
///
/// Draws uniform points in the fundamental parallelepiped, folds them into
/// the Voronoi cell by subtracting the nearest lattice point, and averages
/// `‖x‖² / (N·Vol^{2/N})`.
pub fn second_moment_mc<T: Real>(spec: &LatticeSpec<T>, samples: usize, seed: u64) -> T {
    assert!(samples >= 10_000, "need at least 1e4 samples");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = spec.dimension();
    let mut acc = 0f64;
    for _ in 0..samples {
        let u: Vec<T> = (0..n).map(|_| T::of(rng.random::<f64>())).collect();
        let mut x = spec.point_from_unit_cube(&u);
        let q = nearest_point(spec, &x).expect("dimension is consistent");
        for (xk, pk) in x.iter_mut().zip(&q.point) {
            *xk -= *pk;
        }
        acc += norm_sq(&x).as_f64();
    }
    let vol = spec.fine_volume();
    T::of(acc / samples as f64 / (n as f64 * vol.powf(2.0 / n as f64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::dist;

    fn zn1(alpha: u32) -> (LatticeSpec<f64>, CosetTable<f64>) {
        let spec = LatticeSpec::zn(1, alpha, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        (spec, table)
    }

    fn d2example() -> (LatticeSpec<f64>, CosetTable<f64>) {
        let spec = LatticeSpec::new(LatticeKind::D2Example, 2, 2, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        (spec, table)
    }

    #[test]
    fn builtin_dimension_checks() {
        assert!(LatticeSpec::<f64>::new(LatticeKind::A2, 3, 2, 1.0).is_err());
        assert!(LatticeSpec::<f64>::new(LatticeKind::E8, 8, 2, 1.0).is_ok());
        assert!(LatticeSpec::<f64>::zn(9, 2, 1.0).is_err());
        assert!(LatticeSpec::<f64>::zn(2, 1, 1.0).is_err());
    }

    #[test]
    fn oracle_identity_on_lattice_points() {
        let spec = LatticeSpec::<f64>::zn(4, 2, 1.0).unwrap();
        let p = nearest_point_oracle(&spec, &[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.point, vec![0.0; 4]);
    }

    #[test]
    fn oracle_d4_example_matches_exhaustive_search() {
        let spec = LatticeSpec::<f64>::new(LatticeKind::D4, 4, 2, 1.0).unwrap();
        let x = [1.2, 0.9, -0.3, 0.1];
        let got = nearest_point_oracle(&spec, &x).unwrap();
        // independent oracle: exhaustive search over ||z||_inf <= 3
        let mut best = f64::INFINITY;
        let mut best_p = vec![];
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                for c in -3i64..=3 {
                    for d in -3i64..=3 {
                        let p = spec.point_from_coords(&[a, b, c, d]);
                        let d2 = dist_sq(&x, &p);
                        if d2 < best {
                            best = d2;
                            best_p = p;
                        }
                    }
                }
            }
        }
        assert_eq!(got.point, best_p);
        assert_eq!(got.point, vec![1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn oracle_d2example_carrier_decodes_in_place() {
        let (spec, table) = d2example();
        let got = nearest_point_oracle(&spec, &[127.0, 111.0]).unwrap();
        assert_eq!(got.point, vec![127.0, 111.0]);
        // carrier sits in coset 2 at distance 0
        assert_eq!(table.index_of_coords(&got.coords), 2);
        let diff = [127.0 - 1.0, 111.0 - 1.0];
        let q = quantize_coarse(&spec, &diff).unwrap();
        assert_eq!(q.point, vec![126.0, 110.0]);
    }

    #[test]
    fn fast_zn_rounds() {
        let spec = LatticeSpec::<f64>::zn(2, 2, 1.0).unwrap();
        let p = nearest_point_fast(&spec, &[0.4, -1.6]).unwrap();
        assert_eq!(p.point, vec![0.0, -2.0]);
    }

    #[test]
    fn fast_d4_even_sum() {
        let spec = LatticeSpec::<f64>::new(LatticeKind::D4, 4, 2, 1.0).unwrap();
        let x = [0.6, 0.6, 0.6, 0.6];
        let p = nearest_point_fast(&spec, &x).unwrap();
        assert_eq!(p.point, vec![1.0, 1.0, 1.0, 1.0]);
        let o = nearest_point_oracle(&spec, &x).unwrap();
        assert_eq!(dist(&x, &p.point), dist(&x, &o.point));
    }

    #[test]
    fn fast_e8_all_halves_is_lattice_point() {
        let spec = LatticeSpec::<f64>::new(LatticeKind::E8, 8, 2, 1.0).unwrap();
        let x = [0.5; 8];
        let p = nearest_point_fast(&spec, &x).unwrap();
        assert_eq!(p.point, vec![0.5; 8]);
        let o = nearest_point_oracle(&spec, &x).unwrap();
        assert_eq!(dist(&x, &o.point), 0.0);
    }

    #[test]
    fn fast_rejects_d2example() {
        let (spec, _) = d2example();
        assert!(matches!(
            nearest_point_fast(&spec, &[0.0, 0.0]),
            Err(Error::UnsupportedLattice(_))
        ));
    }

    #[test]
    fn fast_matches_oracle_distance_randomized() {
        let kinds = [
            (LatticeKind::Zn, 2),
            (LatticeKind::A2, 2),
            (LatticeKind::D4, 4),
            (LatticeKind::E8, 8),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for (kind, dim) in kinds {
            let spec = LatticeSpec::<f64>::new(kind, dim, 2, 1.0).unwrap();
            for _ in 0..500 {
                let x: Vec<f64> = (0..dim).map(|_| (rng.random::<f64>() - 0.5) * 10.0).collect();
                let f = nearest_point_fast(&spec, &x).unwrap();
                let o = nearest_point_oracle(&spec, &x).unwrap();
                let df = dist(&x, &f.point);
                let do_ = dist(&x, &o.point);
                assert!(
                    (df - do_).abs() < 1e-9,
                    "{}: fast {df} vs oracle {do_} at {x:?}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn packing_sphere_correctness() {
        let kinds = [
            (LatticeKind::Zn, 2),
            (LatticeKind::A2, 2),
            (LatticeKind::D4, 4),
            (LatticeKind::E8, 8),
            (LatticeKind::D2Example, 2),
        ];
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for (kind, dim) in kinds {
            let spec = LatticeSpec::<f64>::new(kind, dim, 2, 1.0).unwrap();
            let r_pack = spec.r_pack();
            for _ in 0..200 {
                let z: Vec<i64> = (0..dim).map(|_| rng.random_range(-5..=5)).collect();
                let lambda = spec.point_from_coords(&z);
                // random error strictly inside the packing sphere
                let mut e: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
                let scale = (rng.random::<f64>() * 0.99) * r_pack / crate::real::norm(&e).max(1e-12);
                for v in &mut e {
                    *v *= scale;
                }
                let x: Vec<f64> = lambda.iter().zip(&e).map(|(&a, &b)| a + b).collect();
                let dec = nearest_point(&spec, &x).unwrap();
                assert_eq!(dec.coords, z, "{}", kind.name());
            }
        }
    }

    #[test]
    fn scaling_equivariance_power_of_two() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for delta in [0.5, 2.0, 8.0] {
            let unit = LatticeSpec::<f64>::new(LatticeKind::A2, 2, 2, 1.0).unwrap();
            let scaled = LatticeSpec::<f64>::new(LatticeKind::A2, 2, 2, delta).unwrap();
            for _ in 0..200 {
                let x = [(rng.random::<f64>() - 0.5) * 8.0, (rng.random::<f64>() - 0.5) * 8.0];
                let xs = [x[0] * delta, x[1] * delta];
                let a = nearest_point(&unit, &x).unwrap();
                let b = nearest_point(&scaled, &xs).unwrap();
                assert_eq!(a.coords, b.coords);
                assert_eq!(b.point, vec![a.point[0] * delta, a.point[1] * delta]);
            }
        }
    }

    #[test]
    fn quantize_coarse_examples() {
        let (spec, _) = zn1(2);
        assert_eq!(quantize_coarse(&spec, &[3.7]).unwrap().point, vec![4.0]);
        let (spec4, _) = zn1(4);
        assert_eq!(quantize_coarse(&spec4, &[5.9]).unwrap().point, vec![4.0]);
        let (d2, _) = d2example();
        assert_eq!(quantize_coarse(&d2, &[126.0, 110.0]).unwrap().point, vec![126.0, 110.0]);
    }

    #[test]
    fn coset_table_matches_printed_representatives() {
        let (_, table) = d2example();
        assert_eq!(table.rep(0), &[0.0, 0.0]);
        assert_eq!(table.rep(1), &[0.0, 2.0]);
        assert_eq!(table.rep(2), &[1.0, 1.0]);
        assert_eq!(table.rep(3), &[1.0, 3.0]);
    }

    #[test]
    fn label_delabel_round_trip() {
        for (alpha, dim) in [(2u32, 2usize), (2, 4), (2, 8), (4, 2), (4, 4), (4, 8)] {
            let spec = LatticeSpec::<f64>::zn(dim, alpha, 1.0).unwrap();
            let table = CosetTable::build(&spec).unwrap();
            for i in 0..table.len() {
                let m = table.message_of(i);
                assert_eq!(table.index_of(&m).unwrap(), i);
            }
        }
    }

    #[test]
    fn dist_to_coset_examples() {
        let (spec, table) = d2example();
        // y on a representative
        assert_eq!(dist_to_coset(&spec, &table, &[1.0, 1.0], 2).unwrap(), 0.0);
        // deep-hole carrier: distance 1.0 to both coset 3 and coset 0
        assert_eq!(dist_to_coset(&spec, &table, &[35.0, 120.0], 3).unwrap(), 1.0);
        assert_eq!(dist_to_coset(&spec, &table, &[35.0, 120.0], 0).unwrap(), 1.0);
        assert!(dist_to_coset(&spec, &table, &[0.0, 0.0], 4).is_err());
    }

    #[test]
    fn neighbor_examples() {
        let (spec, table) = d2example();
        assert_eq!(neighbor(&spec, &table, table.rep(2)).unwrap(), 2);
        // tie-free entries of the worked example
        assert_eq!(neighbor(&spec, &table, &[127.0, 111.0]).unwrap(), 2);
        assert_eq!(neighbor(&spec, &table, &[34.0, 118.0]).unwrap(), 0);
        // four-way deep-hole tie resolves to the smallest index
        assert_eq!(neighbor(&spec, &table, &[35.0, 120.0]).unwrap(), 0);
    }

    #[test]
    fn coset_partition_property() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for (kind, dim) in [(LatticeKind::A2, 2), (LatticeKind::D2Example, 2), (LatticeKind::Zn, 2)] {
            let spec = LatticeSpec::<f64>::new(kind, dim, 2, 1.0).unwrap();
            let table = CosetTable::build(&spec).unwrap();
            for _ in 0..200 {
                let y: Vec<f64> = (0..dim).map(|_| (rng.random::<f64>() - 0.5) * 12.0).collect();
                let fine = nearest_point(&spec, &y).unwrap();
                let fine_dist = dist(&y, &fine.point);
                let dists: Vec<f64> = (0..table.len())
                    .map(|i| dist_to_coset(&spec, &table, &y, i).unwrap())
                    .collect();
                let min = dists.iter().cloned().fold(f64::INFINITY, f64::min);
                assert!((min - fine_dist).abs() < 1e-9);
                let hits = dists.iter().filter(|&&d| (d - fine_dist).abs() < 1e-9).count();
                assert!(hits >= 1);
            }
        }
    }

    #[test]
    fn neighbor_shortcut_agrees_with_scan() {
        // force both paths on the same table size by comparing against a
        // manual scan for a lattice above the scan limit
        let spec = LatticeSpec::<f64>::new(LatticeKind::D4, 4, 4, 1.0).unwrap();
        let table = CosetTable::build(&spec).unwrap();
        assert!(table.len() > COSET_SCAN_LIMIT);
        let mut rng = ChaCha12Rng::seed_from_u64(19);
        for _ in 0..50 {
            let y: Vec<f64> = (0..4).map(|_| (rng.random::<f64>() - 0.5) * 16.0).collect();
            let fast = neighbor(&spec, &table, &y).unwrap();
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for i in 0..table.len() {
                let d = dist_to_coset(&spec, &table, &y, i).unwrap();
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            assert_eq!(fast, best);
        }
    }

    #[test]
    fn second_moment_zn_close_to_one_twelfth() {
        let spec = LatticeSpec::<f64>::zn(2, 2, 1.0).unwrap();
        let g = second_moment_mc(&spec, 200_000, 5);
        assert!((g - 1.0 / 12.0).abs() / (1.0 / 12.0) < 0.02, "got {g}");
    }

    #[test]
    fn f32_decoding_smoke() {
        let spec = LatticeSpec::<f32>::new(LatticeKind::A2, 2, 2, 1.0).unwrap();
        let p = nearest_point(&spec, &[0.9f32, 0.1]).unwrap();
        let o = nearest_point_oracle(&spec, &[0.9f32, 0.1]).unwrap();
        assert!((dist(&[0.9f32, 0.1], &p.point) - dist(&[0.9f32, 0.1], &o.point)).abs() < 1e-6);
    }
}
