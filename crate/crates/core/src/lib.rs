//! Exact computation with almost-torsion sets, Zariski closures and
//! Kronecker-type orbit constructions in countable abelian groups.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, reports and
//! the command-line front end live in the companion `zariski` crate.
//!
//! Module map:
//!
//! * [`group`] — group descriptors, elements, torsion subgroups, Smith normal form.
//! * [`setexpr`] — symbolic countable subsets and the almost-`n`-torsion classifier.
//! * [`zariski`] — closed sets in normal form, closure, density, the prefix oracle.
//! * [`equidist`] — Weyl sums, star discrepancy, uniform-distribution tables and
//!   exact rational independence.
//! * [`orbit`] — nested dyadic refinement, dense homomorphisms, flows and nets.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arith;
pub mod equidist;
mod error;
pub mod group;
pub mod orbit;
pub mod setexpr;
pub mod zariski;

pub use error::{Error, Result};
pub use group::{Coord, Element, GroupDescriptor};
pub use setexpr::{SetExpr, TorsionClass};
pub use zariski::ClosedSet;
