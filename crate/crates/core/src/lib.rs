//! Numerics for short-interval averages of weighted representation counts
//!
//! `R(n) = Σ Λ(n_1)…Λ(n_j)` over ordered tuples of prime powers with
//! `φ(n_1) + … + φ(n_j) = n`, together with the exponential sums, arc
//! integrals and bounds that control their average over `[N+1, N+H]`.
//!
//! Module map:
//!
//! - [`polyring`]: integer polynomials `φ` with `φ(0) = 0`.
//! - [`mangoldt`]: sieved von Mangoldt tables and their on-disk cache.
//! - [`repcount`]: exact `R_{φ,j}(n)` by enumeration and by truncated convolution.
//! - [`arcsum`]: damped exponential sums, `U(α, H)`, Γ constants and main terms.
//! - [`arcintegral`]: panel Gauss–Legendre and bandwidth-exact circle integrals.
//! - [`labcli`]: experiment configuration, sweeps, CSV/SVG output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arcintegral;
pub mod arcsum;
pub mod error;
pub mod labcli;
pub mod mangoldt;
pub mod polyring;
pub mod repcount;

pub use error::{CacheError, Error, Result};
pub use mangoldt::MangoldtTable;
pub use polyring::IntPolynomial;
pub use repcount::RepSeries;
