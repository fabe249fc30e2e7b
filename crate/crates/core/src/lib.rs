//! Shanks transformation, Wynn's ε-algorithm and its multistep extension,
//! with an exact determinant oracle to check them against.
//!
//! Every computation runs either over exact rationals or over binary
//! floating point of a chosen precision, see [`Scalar`] and [`Mode`].
//!
//! ```
//! use shanks::{alternating_harmonic, multistep_epsilon, Scalar};
//!
//! let s = alternating_harmonic(9);
//! let table = multistep_epsilon(&s, 1);
//! assert_eq!(table.value(8, 0), Some(&Scalar::ratio(14161, 20430)));
//! ```
//!
//! Modules:
//!
//! * [`numerics`]: scalars, sequence prefixes and forward differences.
//! * [`sequences`]: builtin series, kernel sequences, CSV/JSON input.
//! * [`determinant`]: Hankel and extended determinants.
//! * [`transform`]: transformations as determinant ratios.
//! * [`epsilon`]: recursive tables, streaming, table dumps.
//! * [`identities`]: residual checks of determinantal and bilinear identities.
//! * [`lotka_volterra`]: the lattice attached to the multistep table.

pub mod determinant;
pub mod epsilon;
pub mod error;
pub mod identities;
pub mod lotka_volterra;
pub mod numerics;
pub mod sequences;
pub mod transform;

pub use determinant::{DetFamily, DetOracle, DetSpec};
pub use epsilon::{
    cross_rule_table, determinant_table, linear_table, multistep_epsilon, multistep_epsilon_with,
    progressive_append, wynn_epsilon, CellState, EpsilonStream, EpsilonTable, TableDump,
};
pub use error::{Error, Result};
pub use identities::{sweep, IdentityCase, IdentityId, IdentityLab, SweepSummary};
pub use lotka_volterra::{closed_form_lattice, lv_closed_form, lv_m1_u_check, lv_residuals, miura_from_epsilon, LVLattice, LvEntry};
pub use numerics::{Mode, Scalar, SequencePrefix, ZeroPolicy};
pub use sequences::{alternating_harmonic, generate, generate_kernel, random_rational_sequence, KernelSpec, SeriesSpec};
pub use transform::{epsilon_entry_det, multistep_shanks, multistep_shanks_linear, quasilinearity_check, shanks};
