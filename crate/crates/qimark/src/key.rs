//! The codebook key sidecar: the learned permutation plus the lattice
//! parameters the detector needs.
//!
//! Line-oriented UTF-8 text with a fixed key set:
//!
//! ```text
//! lattice=<name>
//! alpha=<int>
//! dim=<int>
//! delta=<float>
//! epsilon=<float>
//! gamma=<comma-separated ints>
//! ```
//!
//! Unknown keys are rejected; `save` then `load` round-trips byte-exactly.

use std::fs;
use std::path::Path;

use crate::codebook::Permutation;
use crate::error::{Error, Result};
use crate::lattice::{CosetTable, LatticeKind, LatticeSpec};
use crate::plane::write_atomic;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyFile {
    pub lattice: LatticeKind,
    pub alpha: u32,
    pub dim: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub gamma: Permutation,
}

impl KeyFile {
    pub fn new(
        lattice: LatticeKind,
        alpha: u32,
        dim: usize,
        delta: f64,
        epsilon: f64,
        gamma: Permutation,
    ) -> Result<Self> {
        let key = Self { lattice, alpha, dim, delta, epsilon, gamma };
        key.validate()?;
        Ok(key)
    }

    fn validate(&self) -> Result<()> {
        if let Some(d) = self.lattice.fixed_dimension() {
            if d != self.dim {
                return Err(Error::InvalidKey(format!(
                    "lattice {} has dimension {d}, key says {}",
                    self.lattice.name(),
                    self.dim
                )));
            }
        }
        if self.alpha < 2 {
            return Err(Error::InvalidKey(format!("alpha must be >= 2, got {}", self.alpha)));
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            return Err(Error::InvalidKey("delta must be positive".into()));
        }
        let expected = (self.alpha as usize)
            .checked_pow(self.dim as u32)
            .ok_or_else(|| Error::InvalidKey("alpha^dim overflows".into()))?;
        if self.gamma.len() != expected {
            return Err(Error::InvalidKey(format!(
                "gamma has {} entries, expected alpha^dim = {expected}",
                self.gamma.len()
            )));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let gamma = self
            .gamma
            .as_slice()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "lattice={}\nalpha={}\ndim={}\ndelta={}\nepsilon={}\ngamma={}\n",
            self.lattice.name(),
            self.alpha,
            self.dim,
            self.delta,
            self.epsilon,
            gamma
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lattice = None;
        let mut alpha = None;
        let mut dim = None;
        let mut delta = None;
        let mut epsilon = None;
        let mut gamma = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidKey(format!("line {}: missing '='", lineno + 1)))?;
            let dup = |name: &str| Error::InvalidKey(format!("duplicate key {name}"));
            match k {
                "lattice" => {
                    if lattice.is_some() {
                        return Err(dup(k));
                    }
                    lattice = Some(
                        LatticeKind::parse(v)
                            .ok_or_else(|| Error::InvalidKey(format!("unknown lattice {v:?}")))?,
                    );
                }
                "alpha" => {
                    if alpha.is_some() {
                        return Err(dup(k));
                    }
                    alpha = Some(parse_num::<u32>(k, v)?);
                }
                "dim" => {
                    if dim.is_some() {
                        return Err(dup(k));
                    }
                    dim = Some(parse_num::<usize>(k, v)?);
                }
                "delta" => {
                    if delta.is_some() {
                        return Err(dup(k));
                    }
                    delta = Some(parse_num::<f64>(k, v)?);
                }
                "epsilon" => {
                    if epsilon.is_some() {
                        return Err(dup(k));
                    }
                    epsilon = Some(parse_num::<f64>(k, v)?);
                }
                "gamma" => {
                    if gamma.is_some() {
                        return Err(dup(k));
                    }
                    let entries: Result<Vec<usize>> = v
                        .split(',')
                        .map(|t| parse_num::<usize>("gamma entry", t.trim()))
                        .collect();
                    gamma = Some(
                        Permutation::new(entries?)
                            .map_err(|e| Error::InvalidKey(e.to_string()))?,
                    );
                }
                other => return Err(Error::InvalidKey(format!("unknown key {other:?}"))),
            }
        }
        let missing = |name: &str| Error::InvalidKey(format!("missing key {name}"));
        let key = Self {
            lattice: lattice.ok_or_else(|| missing("lattice"))?,
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            dim: dim.ok_or_else(|| missing("dim"))?,
            delta: delta.ok_or_else(|| missing("delta"))?,
            epsilon: epsilon.ok_or_else(|| missing("epsilon"))?,
            gamma: gamma.ok_or_else(|| missing("gamma"))?,
        };
        key.validate()?;
        Ok(key)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        write_atomic(path.as_ref(), self.to_text().as_bytes())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Reconstructs the lattice spec the key was learned for.
    pub fn lattice_spec<T: Real>(&self) -> Result<LatticeSpec<T>> {
        LatticeSpec::new(self.lattice, self.dim, self.alpha, T::of(self.delta))
    }

    pub fn coset_table<T: Real>(&self) -> Result<CosetTable<T>> {
        CosetTable::build(&self.lattice_spec::<T>()?)
    }
}

fn parse_num<N: std::str::FromStr>(name: &str, v: &str) -> Result<N> {
    v.parse()
        .map_err(|_| Error::InvalidKey(format!("bad value for {name}: {v:?}")))
}
