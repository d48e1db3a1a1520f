//! Discrete capillary-surface toolkit.
//!
//! A sessile drop inside a container (half-space, wedge of planes, or the
//! unit ball) is modelled as a triangulated surface whose boundary slides on
//! the container walls. The crate provides
//!
//! * mesh geometry: areas, enclosed volume, wetted areas, cotangent
//!   Laplacian, per-vertex curvatures and contact-line frames ([`mesh`],
//!   [`geometry`]),
//! * exact spherical-cap and flat-disk reference solutions with closed-form
//!   quantities and field samplers ([`caps`]),
//! * volume-constrained gradient descent of the free energy
//!   `area - Σ βᵢ · wetted_areaᵢ` ([`energy`]),
//! * discrete residuals of the integral identities satisfied by stationary
//!   surfaces ([`identities`], [`pointwise`]),
//! * the second-variation index form and its smallest mean-zero eigenvalue
//!   ([`stability`], [`eigen`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); disable the default
//! `std` feature for embedded or sandboxed use. All geometry is `f64` at
//! unit scale.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod boundary;
pub mod capmesh;
pub mod caps;
pub mod container;
pub mod eigen;
pub mod energy;
pub mod fields;
pub mod geometry;
pub mod identities;
pub mod mesh;
pub mod perturb;
pub mod pointwise;
pub mod spherefit;
pub mod stability;

pub use container::{Container, ContainerError};
pub use mesh::{MeshError, TriMesh};

/// 3-vector used throughout for points, normals and gradients.
pub type Vec3 = nalgebra::Vector3<f64>;
