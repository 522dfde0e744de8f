//! Nielsen transformations of generating multisets of finite groups into
//! simultaneous left-right transversals of a finite-index subgroup.

pub mod corpus;
pub mod configurations;
pub mod coset_geometry;
pub mod error;
pub mod families;
pub mod group_core;
pub mod inverse_dual;
pub mod nielsen_engine;
pub mod perm;
pub mod solvers;

pub use error::{Error, Result};
