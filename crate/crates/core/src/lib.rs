//! Exact arithmetic for the circle method applied to diagonal cubic forms
//! `F(x) = F_1 x_1^3 + ... + F_n x_n^3` over `F_q(t)`.
//!
//! The crate is `no_std` (with `alloc`). Everything here is deterministic and
//! single-threaded; the engines that are expensive expose partitioned entry
//! points so a caller can fan the work out and merge by exact addition.
//!
//! Layout:
//!
//! * [`fields`]: `F_q` with a chosen modulus, trace, cube and square structure.
//! * [`cyclotomic`]: exact elements of `Q(zeta_p)`, the value type of `psi`.
//! * [`poly`]: the ring `O = F_q[t]`: gcd, CRT, factorization, cube roots.
//! * [`laurent`]: truncated elements of `K_inf = F_q((1/t))`, `psi`, Haar
//!   integration, the Farey dissection and parabola measures.
//! * [`expsums`]: complete exponential sums `S_r(c)`, Ramanujan sums, Weyl sums.
//! * [`dualform`]: evaluation and zero tests of the dual form `F*`.
//! * [`counting`]: point counters with meet-in-the-middle engines.
//! * [`delta`]: oscillatory integrals and the delta-method identity.
//! * [`waring`]: arcs, singular series and singular integrals.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod counting;
pub mod cyclotomic;
pub mod delta;
pub mod dualform;
mod error;
pub mod expsums;
pub mod fields;
pub mod laurent;
mod multipoly;
pub mod poly;
pub mod waring;

pub use cyclotomic::{cyc_abs_sq, AbsSq, CycInt, CycNum};
pub use error::{Error, Result};
pub use fields::{FieldCtx, Fq};
pub use laurent::Laurent;
pub use poly::{Poly, PolyRing};

/// Exact rational numbers used for measures and magnitudes.
pub type Rational = num_rational::BigRational;
