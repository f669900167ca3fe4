use std::io::{self, Write};

use super::StateVector;
use crate::schedule::Category;

pub const TRAJECTORY_HEADER: &str = "k,p,r,b,w,w00,w01,w10,w11,w02,w20,w12,w21,w03,w30,err_p";

/// Receives the states selected by [`super::solve`].
pub trait TrajectorySink {
    fn record(&mut self, state: &StateVector) -> io::Result<()>;
}

/// Discards everything.
pub struct NullSink;

impl TrajectorySink for NullSink {
    fn record(&mut self, _: &StateVector) -> io::Result<()> {
        Ok(())
    }
}

impl TrajectorySink for Vec<StateVector> {
    fn record(&mut self, state: &StateVector) -> io::Result<()> {
        self.push(state.clone());
        Ok(())
    }
}

/// Adapts a closure.
pub struct FnSink<F>(pub F);

impl<F: FnMut(&StateVector) -> io::Result<()>> TrajectorySink for FnSink<F> {
    fn record(&mut self, state: &StateVector) -> io::Result<()> {
        (self.0)(state)
    }
}

/// Writes trajectory rows as CSV, header first.
pub struct CsvTrajectory<W: Write> {
    out: W,
    digits: usize,
    header_written: bool,
}

impl<W: Write> CsvTrajectory<W> {
    pub const DEFAULT_DIGITS: usize = 20;

    pub fn new(out: W) -> Self {
        Self::with_digits(out, Self::DEFAULT_DIGITS)
    }

    pub fn with_digits(out: W, digits: usize) -> Self {
        Self {
            out,
            digits,
            header_written: false,
        }
    }

    pub fn row(&self, st: &StateVector) -> String {
        let mut cols = vec![st.k.to_string()];
        for x in [&st.p, &st.r, &st.b, &st.w] {
            cols.push(x.to_string_digits(self.digits));
        }
        for c in Category::ALL {
            cols.push(st.wcond(c).to_string_digits(self.digits));
        }
        cols.push(format!("{:e}", st.p.err()));
        cols.join(",")
    }

    pub fn finish(mut self) -> io::Result<W> {
        if !self.header_written {
            writeln!(self.out, "{TRAJECTORY_HEADER}")?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TrajectorySink for CsvTrajectory<W> {
    fn record(&mut self, state: &StateVector) -> io::Result<()> {
        if !self.header_written {
            writeln!(self.out, "{TRAJECTORY_HEADER}")?;
            self.header_written = true;
        }
        let row = self.row(state);
        writeln!(self.out, "{row}")
    }
}
