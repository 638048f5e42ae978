mod counter;
mod partition;
mod sequence;

pub use counter::{counter_trig_decomposition, multiplicity_counter, MultiplicityCounter, MAX_PERIOD};
pub use partition::{
    partition_irrational_pair, partition_rational_pair, BeattyPartition, BeattyPiece, PartitionKind,
    PartitionReport, DEFAULT_WINDOW,
};
pub use sequence::{beatty_eval, shifted_bohr_sets, BeattySequence, FracCondition};
