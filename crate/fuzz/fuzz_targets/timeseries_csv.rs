#![no_main]

use libfuzzer_sys::fuzz_target;
use pipeflow::report::{read_timeseries, write_timeseries};

fuzz_target!(|data: &[u8]| {
    if let Ok(series) = read_timeseries(data) {
        let mut buf = Vec::new();
        write_timeseries(&mut buf, &series).expect("write to memory");
        let again = read_timeseries(buf.as_slice()).expect("written CSV reparses");
        assert_eq!(again.len(), series.len());
        for (a, b) in again.rows.iter().zip(&series.rows) {
            for (x, y) in [(a.t, b.t), (a.rho_out, b.rho_out), (a.err_x, b.err_x)] {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }
});
