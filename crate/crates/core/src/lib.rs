pub mod analysis;
pub mod entropy;
pub mod expr;
pub mod models;
pub mod pfaffian;
pub mod quadrature;
pub mod tolerances;
