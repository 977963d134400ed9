//! Number-theory workbench around weak forms of the twin prime problem:
//! twin-prime counts against the Hardy-Littlewood prediction, admissible
//! k-tuple machinery, the Maynard-Tao variational sieve bound, and
//! Liouville-function interval statistics.

pub mod cli;
pub mod error;
pub mod liouville_lab;
pub mod numeric;
pub mod primes;
pub mod sieve_opt;
pub mod tuples;
pub mod twin_stats;

pub use error::{Error, Result};
