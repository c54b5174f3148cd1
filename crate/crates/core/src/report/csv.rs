//! Time-series CSV, one row per logged step with the columns
//! `t, rho_in, rho_mid, rho_out, phi_in, phi_mid, phi_out, dU, s, eps,
//! err_v, err_w, err_X`. Floats are written in shortest round-trip form.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::simulate::closed_loop::COLUMNS;
use crate::simulate::{TimeSeries, TimeSeriesRow};

pub fn write_timeseries<W: Write>(out: W, series: &TimeSeries) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(out);
    if series.rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for row in &series.rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_timeseries`]. The header must match the
/// documented layout exactly.
pub fn read_timeseries<R: Read>(input: R) -> Result<TimeSeries> {
    let mut r = ::csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "unexpected CSV header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let rows = r
        .deserialize::<TimeSeriesRow>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(TimeSeries { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> TimeSeriesRow {
        TimeSeriesRow {
            t,
            rho_in: 46.0,
            rho_mid: 44.218_227_379_145_6,
            rho_out: 42.361_585_1,
            phi_in: 289.0,
            phi_mid: 289.1,
            phi_out: 1.0 / 3.0,
            d_u: -1e-300,
            s: 27.598,
            eps: 0.0,
            err_v: 5e-324,
            err_w: f64::MAX,
            err_x: 0.1 + 0.2,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let series = TimeSeries { rows: vec![row(0.0), row(0.297_619_047_619_047_6)] };
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), COLUMNS.join(","));
        assert_eq!(read_timeseries(buf.as_slice()).unwrap(), series);
    }

    #[test]
    fn empty_series_still_has_a_header() {
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &TimeSeries::default()).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().trim(), COLUMNS.join(","));
        assert!(read_timeseries(buf.as_slice()).unwrap().is_empty());
    }

    #[test]
    fn wrong_header_and_bad_cells_are_rejected() {
        assert!(read_timeseries("a,b\n1,2\n".as_bytes()).is_err());
        let bad = format!("{}\n0,1,2,3,4,5,6,7,8,9,10,11,x\n", COLUMNS.join(","));
        assert!(matches!(read_timeseries(bad.as_bytes()), Err(Error::Csv(_))));
        let short = format!("{}\n0,1,2\n", COLUMNS.join(","));
        assert!(read_timeseries(short.as_bytes()).is_err());
    }
}
