pub mod analytic;
pub mod error;
pub mod levy;
pub mod numerics;
pub mod sim;

pub use analytic::{Branch, StationarySolution, TransformGrid};
pub use error::{Error, Result};
pub use levy::{CollapseLaw, JumpDist, LevyModel, PathComponents};
pub use numerics::incomplete_beta;
pub use sim::{PoolSpec, SamplePool};
