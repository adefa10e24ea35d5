//! Visibility-graph image encoding for photoplethysmography.
//!
//! A PPG record is cut into pulses or fixed windows, each segment is turned
//! into natural visibility graphs, and the adjacency matrices are packed
//! into an RGB image ready for an image model:
//!
//! * red: visibility graph of the segment
//! * green: visibility graph of the inverted segment
//! * blue: slope-weighted visibility graph of the inverted segment
//!
//! ```
//! use ppgraph::{build_channel_stack, stack_to_image, TimeSeries};
//!
//! let series = TimeSeries::new(vec![0.0, 2.0, 1.0, 3.0], 50.0).unwrap();
//! let img = stack_to_image(&build_channel_stack(&series).unwrap(), None).unwrap();
//! assert_eq!((img.width(), img.channels()), (4, 3));
//! ```

pub mod adjacency;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod image;
pub mod manifest;
pub mod metrics;
pub mod peaks;
pub mod records;
pub mod segment;
pub mod series;
pub mod synth;
pub mod tensor;
pub mod visibility;

pub use adjacency::{AdjacencyMatrix, MatrixKind};
pub use bench::{bench_segment, BenchConfig, BenchPipeline, BenchReport};
pub use dataset::{
    build_dataset, segment_record, verify_dataset, DatasetConfig, DatasetSummary, SegmentMode,
    SplitBy,
};
pub use error::{Error, Result};
pub use image::{
    build_channel_stack, matrix_to_image, segment_to_image, stack_to_image, ChannelStack,
    ImageTensor,
};
pub use manifest::{AgeGroup, ManifestRow, RecordManifest, Split};
pub use metrics::{
    extract_sbp_dbp, grade_bhs, mean_absolute_error, BhsReport, Grade, MetricsReport,
};
pub use peaks::{detect_peaks, PeakList, PeakParams};
pub use records::Record;
pub use segment::{has_plateau, segment_pulses, segment_windows, Provenance, PulseSegment};
pub use series::{invert_series, TimeSeries};
pub use tensor::{read_tensor, write_tensor};
pub use visibility::{build_vg_fast, build_vg_oracle, build_vg_slope_weighted, visible_edges};
