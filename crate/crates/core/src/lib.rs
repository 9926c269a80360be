//! Visibility of lattice points along type-A random walks on `Z^k`.
//!
//! A walk starts at the origin and, at every step, picks one step law
//! `alpha_t` out of a finite set and moves one unit along axis `j` with
//! probability `alpha_{t,j}`. A point is visible when the gcd of its
//! coordinates is 1. This crate provides:
//!
//! * [`numtheory`]: Möbius/divisor functions, `zeta(k)`, the product
//!   `prod_p (1 - 2/p^k)`, and the closed-form limits of the visible and
//!   consecutive-visible proportions, total and per residue class.
//! * [`walk`]: validated walk configurations and a reproducible step generator.
//! * [`stats`]: exact integer accumulators forming a merge monoid, and reports.
//! * [`mc`]: the parallel Monte Carlo driver.
//! * [`oracle`]: exact rational laws of small walks and the congruence mass
//!   computed by dynamic programming and by an additive character sum.
//! * [`cli`]: the `lattice-vis` command line.

pub mod cli;
pub mod error;
pub mod mc;
pub mod numtheory;
pub mod oracle;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
