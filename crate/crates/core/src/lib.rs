pub mod mc_sim;
pub mod numerics;
pub mod oracle;
pub mod recurrence;
pub mod schedule;
