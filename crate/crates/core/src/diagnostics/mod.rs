//! Synthetic camera and the analysis that turns images into recoil numbers.

pub mod ccd;
pub mod centroid;
pub mod fit;
pub mod pipeline;

pub use ccd::{encode_pgm, frame_file_name, render_frame, CcdSpec, Emitter, Frame, FrameStack, Image};
pub use centroid::{centroid, Centroid, Region};
pub use fit::{
    fit_trajectory, systematics_correction, LineFit, SelectionModel, SystematicsUncertainty,
    TrackPoint, TrajectoryFit,
};
pub use pipeline::{run_pipeline, FrameReport, FrameUse, PipelineResult, PipelineSetup};
