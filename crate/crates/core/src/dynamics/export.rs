//! CSV export of trajectories.

use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{Level, StateVector, DIM};

use super::Trajectory;

impl<T: Real> Trajectory<T> {
    /// Writes one row per sample: `t`, real and imaginary parts of all 16
    /// entries, one population column per named projection ⟨ψ|ρ|ψ⟩, then
    /// `signal_integral`. Numbers carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W, projections: &[(&str, &StateVector<T>)]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for row in Level::ALL {
            for col in Level::ALL {
                header.push(format!("rho_{}{}_re", row.label(), col.label()));
                header.push(format!("rho_{}{}_im", row.label(), col.label()));
            }
        }
        header.extend(projections.iter().map(|(name, _)| name.to_string()));
        header.push("signal_integral".into());
        w.write_record(&header).map_err(io_err)?;

        let mut record = Vec::with_capacity(header.len());
        for (k, state) in self.states.iter().enumerate() {
            record.clear();
            record.push(fmt(self.times[k]));
            for z in state.rho().entries().iter().take(DIM * DIM) {
                record.push(fmt(z.re));
                record.push(fmt(z.im));
            }
            for (_, psi) in projections {
                record.push(fmt(state.overlap(psi)));
            }
            record.push(fmt(self.signal[k]));
            w.write_record(&record).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))?;
        Ok(())
    }
}

pub(crate) fn fmt<T: Real>(x: T) -> String {
    format!("{x:.16e}")
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}
