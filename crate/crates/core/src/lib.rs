//! Sphere-uniform motion compensation for cube-map 360-degree video.
//!
//! The crate maps pixels of an unfolded 4x3 cube map onto the sphere, derives
//! per-pixel reference positions from a single block MV, warps reference
//! pictures with a 64-phase DCT interpolation filter and runs a TZS-style
//! motion search with merge/AMVP predictor transport. [`eval`] compares the
//! resulting prediction quality against plain translational motion.

pub mod error;
pub mod eval;
pub mod frame;
pub mod geom;
pub mod interp;
pub mod motion;
pub mod search;

pub use error::{Error, Result};
pub use geom::{CubeLayout, CubePoint, FaceId, SpherePoint, UnfoldPoint};
pub use interp::{FilterBank, Plane};
pub use motion::{Block, CorrespondenceField, MotionVector};
pub use eval::{run_eval, EvalConfig, EvalReport};
pub use frame::{Frame, SyntheticSpec};
pub use search::{Mode, Policy, SearchConfig};
