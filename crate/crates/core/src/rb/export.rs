use std::io::Write;

use super::ratio::RelativeBeliefResult;
use crate::error::Result;

/// Writes the curve as CSV: `bin_midpoint,prior_mass,posterior_mass,rb,in_plausible_region`.
/// Undefined ratios are written as empty fields.
pub fn write_rb_csv<W: Write>(result: &RelativeBeliefResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_midpoint", "prior_mass", "posterior_mass", "rb", "in_plausible_region"])?;
    for i in 0..result.grid.n_bins() {
        let rb = result.rb[i].map(|r| r.to_string()).unwrap_or_default();
        w.write_record([
            result.grid.midpoint(i).to_string(),
            result.prior_mass[i].to_string(),
            result.posterior_mass[i].to_string(),
            rb,
            (result.plausible[i] as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn rb_csv_string(result: &RelativeBeliefResult) -> Result<String> {
    let mut buf = Vec::new();
    write_rb_csv(result, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
