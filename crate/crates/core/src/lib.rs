//! Fractal function graphs driven by expanding maps, and their dimensions.
//!
//! The crate covers Weierstrass and Takagi type series, fractal interpolation
//! functions (plain and Markovian), and the generalized Takagi functions built
//! on the symmetric tent map. For each family it provides the graph itself,
//! the theoretical box dimension (Moran equation or spectral radius of the
//! weighted transition matrix), the equilibrium Markov measure with its
//! entropy and Lyapunov exponents, and an empirical box counter used to
//! check the theory numerically.
//!
//! Module map:
//!
//! - [`symbolic`]: words, subshifts of finite type, n-Bernoulli approximants.
//! - [`graphs`]: series, fractal interpolation systems, natural projection.
//! - [`dimension`]: Moran and spectral dimension formulas and hypothesis checks.
//! - [`measures`]: equilibrium Markov measure, entropy, Lyapunov exponents.
//! - [`tentmap`]: tent map dynamics, cylinder trees, Markov parameters.
//! - [`boxcount`]: grid counting and log-log regression.
//! - [`cli`]: configuration files and the `fracdim` subcommands.

pub mod boxcount;
pub mod cli;
pub mod dimension;
pub mod error;
pub mod exact;
pub mod graphs;
pub mod measures;
pub mod symbolic;
pub mod tentmap;

pub use error::{Error, Result};
