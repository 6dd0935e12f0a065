pub mod braid;
pub mod trigpoly;
pub mod parametrize;
pub mod genericity;
pub mod assemble;
pub mod json;
pub mod verifier;
pub mod pipeline;
