// SPDX-License-Identifier: Apache-2.0

//! Exact few-mode realization of the many-body and excitation apparatus:
//! truncated Fock spaces, second-quantized operators, the excitation map,
//! Bogoliubov dynamics and reduced density matrices.

pub mod bogoliubov;
pub mod evolve;
pub mod excitation;
pub mod modes;
pub mod operator;
pub mod report;
pub mod space;

pub use bogoliubov::{build_bogoliubov, build_error_terms, build_generator, build_hamiltonian};
pub use excitation::ExcitationMap;
pub use modes::ModeBasis;
pub use operator::{build_annihilation, build_creation, number_operator, Monomial, OperatorMatrix};
pub use report::{
    comparison_report, reduced_density, trace_norm, ComparisonRow, ComparisonSetup, IdentitySuite,
};
pub use space::{FockSpace, FockVector};
