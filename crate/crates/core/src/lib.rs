//! Sandpile dynamics on the square lattice with a C-net set of sinks.
//!
//! A sink set `S ⊂ ℤ²` is a *C-net* when every cell is within graph distance
//! `C` of a sink. On such lattices every bounded sandpile state relaxes, the
//! recurrent states form an abelian group, and order-`k` group elements
//! correspond to `ℤ_k`-valued discrete harmonic functions. This crate holds
//! the computational side of that story:
//!
//! * [`sink`] — sink-set descriptions, graph distances, the superharmonic
//!   bound `h`,
//! * [`relax`] — stabilization engines with odometer tracking,
//! * [`group`] — the sandpile group realized operationally (identity,
//!   addition, inversion, recurrence and burning tests, spanning-tree counts),
//! * [`harmonic`] — mod-k sequences on the ray, Laplacian kernels mod p,
//!   the cylinder transfer construction and the no-torsion interval graph,
//! * [`poisson`] — the monotone fixed-point solver for `Δφ = ψ`.
//!
//! The crate is `no_std`-compatible (it needs `alloc`); file formats, the
//! CLI and figure rendering live in the companion `sandpile-cli` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod coord;
pub mod error;
pub mod group;
pub mod harmonic;
pub mod linalg;
pub mod poisson;
pub mod relax;
pub mod sink;
pub mod state;

pub use coord::{Coord, Rect};
pub use error::Error;
pub use group::{GroupElement, SandpileGroup, TorusSandpile};
pub use relax::{RelaxConfig, RelaxReport, Strategy};
pub use sink::SinkSpec;
pub use state::SandState;
