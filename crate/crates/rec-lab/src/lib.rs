//! # rec-lab — an exact-arithmetic laboratory for local reciprocity
//!
//! This crate computes generalized Hilbert symbols for the formal
//! multiplicative group over towers `ℚ_p ⊂ L = ℚ_p(ζ_p) ⊂ M`, where `M/L` is
//! unramified of degree `p^m`. Everything is carried out in exact modular
//! arithmetic with explicit precision accounting — no floats, no hidden
//! rounding.
//!
//! The headline computation evaluates the symbol `(Π, x)` — the torsion point
//! measuring the Frobenius action on a `[p]`-division point of `x` — by four
//! independent routes and cross-checks them:
//!
//! 1. **direct**: divide the isogeny `[p]` in the big tower and apply the
//!    Frobenius oracle (`gamma_direct`);
//! 2. **Artin–Hasse**: the trace formula `γ = (1/p)·Tr(Π⁻¹·η·λ(x))`
//!    (`gamma_artin_hasse`);
//! 3. **trace equation**: the same trace against the trace of the generator
//!    relation, avoiding the division by `p` (`gamma_trace_equation`);
//! 4. **decomposition**: expand `λ(x)` over the generator system and read
//!    `γ` off the coefficient sums (`gamma_from_decomposition`).
//!
//! Routes 2–4 run entirely inside the generator system built by
//! [`generators`]: a norm-compatible pre-image `ξ` of the distinguished
//! torsion point, auxiliary units `θ_i`, and the cocycle solution `ω`.
//!
//! Module map:
//! - [`padic`] — fixed-precision `ℤ/p^N` scalars with valuation tracking;
//! - [`residue`] — the residue fields `𝔽_{p^d}`, Frobenius/trace/norm, the
//!   self-dual normal basis, and the Frobenius-affine digit solver;
//! - [`tower`] — exact elements of `M`, the Frobenius lift `σ`, traces, and
//!   the text/JSON element codecs;
//! - [`fgl`] — the formal multiplicative group (logarithm, exponential,
//!   isogeny) and a Lubin–Tate generic-law engine for cross-validation;
//! - [`generators`] — the generator system `ξ, θ_i, ω`, the cocycle-trace
//!   identities, and the decomposition solver;
//! - [`symbol`] — the four symbol routes, the comparison harness, and
//!   engineered valid/invalid input generators;
//! - [`cli`] — the `rec-lab` command-line front end.

// Indexed loops are kept where they mirror the summation formulas they
// implement; iterator rewrites would obscure the index arithmetic.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod fgl;
pub mod generators;
pub mod padic;
pub mod residue;
pub mod symbol;
pub mod tower;

mod arith;

pub use error::{Error, Result};
