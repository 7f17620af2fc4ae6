//! Exact, finite-window models of determinant lines, Clifford–Fock modules,
//! central extensions, group cohomology and gerbal actions.
//!
//! Everything is computed over `Q` (or finite cyclic groups for cohomology
//! coefficients); no floating point is used anywhere.

pub mod exact_linalg;
pub mod tate_window;
pub mod gl_tower;
pub mod clifford_fock;
pub mod group_cohomology;
pub mod gerbal_core;
pub mod double_loop;
pub mod acceptance;
