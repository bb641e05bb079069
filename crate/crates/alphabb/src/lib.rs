pub mod adhess;
pub mod expr;
pub mod interval;
pub mod problem;
pub mod relax;
pub mod enclosure;
pub mod symdiff;
