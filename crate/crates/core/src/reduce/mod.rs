//! Stack reduction: rigid alignment, averaging, perpendicular profile
//! extraction and weighted exponential fitting.

mod align;
mod fit;
mod pipeline;
mod profile;

pub use align::{align_stack, align_stack_owned, Alignment};
pub use fit::{default_window, fit_exponential, DecayFit, FitWindow, MAX_ITERATIONS};
pub use pipeline::{dose_independence_check, reduce_stack, DoseReport, ReduceParams, Reduction};
pub use profile::{average_stack, default_row_range, extract_profile, LineProfile, MeanFrame};
