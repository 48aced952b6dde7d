//! Optical orthogonal signature pattern codes (OOSPCs) and the translation-invariant
//! combinatorial designs behind them.
//!
//! An `(m, n, w, λ)`-OOSPC is a family of `m×n` binary matrices of constant weight `w`
//! whose 2-D cyclic auto- and cross-correlations never exceed `λ`. Such a code is the
//! same thing as a `(λ+1)-(mn, w, 1)` packing design over `Z_m × Z_n` on which the
//! translation group acts point-regularly with trivial block stabilizers, so everything
//! here is built from that picture:
//!
//! * [`group`] - arithmetic of the translation group acting on points and blocks
//!   (orbits, stabilizers, canonical representatives, development of base blocks);
//! * [`model`] - the shared design data model and the JSON design-file format;
//! * [`bounds`] - the nested-floor Johnson bound and its parity improvements, plus
//!   exact expected block counts for group-divisible constructions;
//! * [`verifier`] - exhaustive certification of packings, G/H/G*-designs, fan designs
//!   and OOSPC correlation properties; leave computation;
//! * [`constructions`] - the recursive constructions (filling, cyclic-SQS products,
//!   G* column/row inflation, fan-design products, rotational-SQS transforms);
//! * [`galois`] - GF(p²) arithmetic, PGL(2, p²) enumeration and the inversive-plane
//!   route to optimal `(p, p, p+1, 2)`-OOSPCs;
//! * [`searcher`] - complete backtracking search over canonical orbit representatives
//!   for small optimal ingredients;
//! * [`data`] - bundled example designs shipped with their expected verdicts.
//!
//! Every construction output is certifiable: the verifier re-derives validity by
//! exhaustive subset enumeration, never by trusting the construction.

pub mod bounds;
pub mod constructions;
pub mod data;
pub mod error;
pub mod galois;
pub mod group;
pub mod model;
pub mod searcher;
pub mod verifier;

pub use error::Error;
pub use group::{Action, Ambient, Block, Orbit, Point};
pub use model::{
    DesignFile, DesignInstance, DesignKind, FanDesign, GroupPartition, Invariance, Oospc,
};
pub use verifier::VerificationReport;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
