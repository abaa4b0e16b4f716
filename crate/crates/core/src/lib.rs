pub mod chain;
pub mod qp;
pub mod tree;
