//! Desk-scale laboratory for studying how systematic data structures turn into
//! network-coding instances.
//!
//! The crate is organized around a pipeline: finite-field polynomial machinery
//! ([`field`]), oracle-tape data structures with counted reads ([`ds`]),
//! a reduction that compiles a non-adaptive data structure into a layered
//! communication network ([`reduction`]), executable coding schemes and their
//! audits ([`coding`]), a multicommodity-flow LP solver ([`flow`]), and a
//! circuit-to-data-structure pipeline ([`circuits`]). The `ncclab` binary
//! exposes the same pipeline as subcommands ([`cli`]).

pub mod bits;
pub mod circuits;
pub mod cli;
pub mod coding;
pub mod ds;
pub mod field;
pub mod flow;
pub mod reduction;
