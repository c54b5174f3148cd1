//! Output artefacts: the time-series CSV, the JSON summary and SVG charts.

pub mod csv;
pub mod summary;
pub mod svg;

pub use self::csv::{read_timeseries, write_timeseries};
pub use summary::{settling_time, steady_residual, Summary};
pub use svg::{line_chart, standard_charts, Curve};
