pub mod error;
pub mod family;
pub mod matrix;
pub mod numeric;
pub mod orderstat;
pub mod report;
pub mod lemmas;
pub mod orlicz;
pub mod interpolation;
pub mod quadrature;
pub mod config;
pub mod corpus;
pub mod campaign;
