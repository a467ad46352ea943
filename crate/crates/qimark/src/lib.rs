//! Lattice-coset QIM image watermarking with content-aware codebook
//! learning.
//!
//! The crate embeds message symbols by quantizing block-DCT carrier vectors
//! onto cosets of a nested lattice pair (`Λ_c = α·Λ_f`). Four schemes share
//! one blind detector:
//!
//! * `qim` — quantize all the way onto the coset point;
//! * `ca` — QIM after learning a message-to-coset permutation from the
//!   carrier/message statistics (adjacency counting + maximum-weight
//!   matching);
//! * `md` — stop `r_pack − ε` short of the coset point, and leave carriers
//!   that already decode correctly untouched;
//! * `camd` — the learned permutation combined with the minimum-distortion
//!   quantizer.
//!
//! All numeric code is generic over the scalar type via [`real::Real`]
//! (`f32` or `f64`); the aliases below pin the common `f64` instantiation.

pub mod channel;
pub mod codebook;
pub mod dct;
pub mod error;
pub mod key;
pub mod lattice;
pub mod matrix;
pub mod message;
pub mod metrics;
pub mod pipeline;
pub mod plane;
pub mod qim;
pub mod real;

pub use channel::{NoiseChannel, NoiseKind};
pub use codebook::{
    brute_force_matching, build_adjacency, empirical_p1, learn_assignment, max_weight_matching,
    AdjacencyMatrix, CodebookAssignment, Permutation,
};
pub use dct::{Band, BandSelector};
pub use error::{Error, Result};
pub use key::KeyFile;
pub use lattice::{
    dist_to_coset, neighbor, nearest_point, nearest_point_fast, nearest_point_oracle,
    quantize_coarse, second_moment_mc, CosetTable, DecodedPoint, LatticeKind, LatticeSpec,
};
pub use message::Message;
pub use metrics::{
    mse, prd, psnr, ser, ser_union_bound, ssim, theoretical_mse_mc, Domain, EvalRecord,
    MetricsReport, TheoreticalMse, EVAL_CSV_HEADER,
};
pub use pipeline::{
    detect_carriers, embed_bits_into_plane, embed_carriers, extract_bits_from_plane,
    extract_messages_from_plane, learn_from_planes, EmbedOutcome, EmbedSetup,
};
pub use plane::ImagePlane;
pub use qim::{
    detect, embed, embed_ca, embed_camd, embed_md, embed_qim, embed_to_coset, Scheme, SchemeKind,
};

/// `f64` instantiations, the defaults used by the CLI.
pub type LatticeSpec64 = lattice::LatticeSpec<f64>;
pub type CosetTable64 = lattice::CosetTable<f64>;
pub type Scheme64 = qim::Scheme<f64>;
pub type DecodedPoint64 = lattice::DecodedPoint<f64>;
pub type MetricsReport64 = metrics::MetricsReport<f64>;

/// `f32` instantiations.
pub type LatticeSpec32 = lattice::LatticeSpec<f32>;
pub type CosetTable32 = lattice::CosetTable<f32>;
pub type Scheme32 = qim::Scheme<f32>;
