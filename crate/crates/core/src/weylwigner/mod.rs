//! Weyl-Wigner-Moyal calculus on a one-dimensional position lattice.

pub mod io;
mod operator;
mod pairing;
mod quantize;
mod star;
mod transform;

pub use operator::{OperatorMatrix, PositionBasis};
pub use pairing::{trace_pairing, TracePairing};
pub use quantize::{weyl_quantize, DEFAULT_MAX_DEGREE};
pub use star::{
    bidifferential_power, moyal_bracket, moyal_bracket_poly, star_product, star_product_poly, BidiffTerm, StarProduct, DEFAULT_ORDER, MAX_GRID_ORDER,
};
pub use transform::{symbol_grid, weyl_operator, wigner_symb, SymbolKind, WignerSymbol};
