//! Multiplicative functions: the Liouville sieve, evaluation and tabulation,
//! Dirichlet characters and the pretentious distance.

mod character;
mod function;
mod pretentious;
mod sieve;

pub use character::{characters_mod, characters_mod_bounded, DirichletCharacter, DEFAULT_MODULUS_BOUND};
pub use function::{factorize, Family, FunctionTable, MultiplicativeFunction};
pub use pretentious::{classify, distance_series, pretentious_distance, Pretentiousness, PretentiousReport, CAVEAT};
pub use sieve::{
    liouville_sieve, liouville_sieve_with_budget, memory_budget, primes_up_to, SieveTable, CACHE_MAGIC,
    DEFAULT_MEMORY_BUDGET, DEFAULT_SEGMENT, MEMORY_BUDGET_ENV,
};
