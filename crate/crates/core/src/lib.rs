pub mod automaton;
pub mod explore;
pub mod grid;
pub mod oracles;
pub mod poly;
pub mod scheduler;
pub mod stack;
pub mod unoriented;
