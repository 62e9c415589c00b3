pub mod accuracy;
pub mod audit;
pub mod backend;
pub mod cli;
pub mod credence;
pub mod logic;
