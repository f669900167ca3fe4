pub mod calibrate;
pub mod oracle;
pub mod simulate;
pub mod solve;
pub mod sweep;
