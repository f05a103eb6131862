pub mod arbitrage;
pub mod emh;
pub mod fuzz;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod market;
pub mod order;
pub mod polytope;
pub mod rational;
pub mod superhedge;
pub mod support;
