pub mod geometry;
pub mod lagrangian;
pub mod linalg;
pub mod numcheck;
pub mod random;
pub mod symcore;
pub mod symmetry;
