pub mod cli;
pub mod cost;
pub mod ctransform;
pub mod error;
pub mod lab;
pub mod measure;
pub mod rng;
pub mod settings;
pub mod solver;
pub mod stats;
pub mod verify;
