pub mod bench;
pub mod codes;
pub mod error;
pub mod matrix;
pub mod lattice;
pub mod quantize;
pub mod shaping;
pub mod simulate;
