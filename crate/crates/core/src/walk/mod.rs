//! Walk parameters, memory schedules, the one-step law and path simulation.

mod memory;
mod params;
mod path;
mod schedule;
mod step;

pub use memory::{memory_view, MemoryView, PathHistory, Prefix, PrefixHistory, StepStore};
pub use params::{WalkParams, SUM_TOLERANCE};
pub use path::{simulate_path, Checkpoint, Trajectory, Walker};
pub(crate) use path::validate_grid;
pub use schedule::{BlockSize, Growth, IndexRange, MemorySchedule};
pub use step::{
    binary_plus_probability, draw_first_step, first_step_law, step_distribution, StepLaw,
};
