//! Time steppers for the plants, the observers and the control law, and
//! the closed-loop driver.

pub mod canonical;
pub mod closed_loop;
pub mod control;
pub mod observer;
pub mod plant;

pub use canonical::{step_canonical, CanonicalPlant, CanonicalState, CFL_LIMIT};
pub use closed_loop::{run_closed_loop, RunOutput, TimeSeries, TimeSeriesRow};
pub use control::{control_known, control_uncertain, ControlLaw};
pub use observer::{Observer, ObserverState};
pub use plant::{step_plant, NonlinearPlant, PlantAdvance, PlantState};

