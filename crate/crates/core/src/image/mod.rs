//! Image containers, windowed statistics and file I/O.

mod compensated;
mod integral;
mod io;
mod plane;
mod stats;

pub use integral::IntegralTable;
pub use io::{load_image, save_image, ImageIoError};
pub use plane::{ImagePlane, ImageRgb};
pub(crate) use stats::clip_window;
pub use stats::{box_mean, local_stats, to_luminance, LocalStats};
