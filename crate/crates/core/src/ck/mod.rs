//! The Connes–Kreimer Hopf algebra of rooted trees and the Butcher group.

pub mod bseries;
pub mod butcher;
pub mod instance;
pub mod tree;

pub use bseries::{bseries_eval, ElementaryDifferentials, FieldError, PolyField, Polynomial};
pub use butcher::{
    compose, exact_flow_character, leaf_delta, order_of, rk_character, tableaux, ButcherTableau,
    CkFunctional, OrderReport, TableauError,
};
pub use instance::{ck_truncation, CkHopf};
pub use tree::{gen_trees, Forest, RootedTree};
