//! Visual page segmentation.
//!
//! A rendered page snapshot is reduced to visual objects (visible text,
//! images and form controls), each object gets a small feature vector
//! (box geometry plus foreground/background color), objects are linked to
//! the neighbors they can "see", and a clustering whose thresholds are
//! derived from the page itself groups them into segments.
//!
//! ```no_run
//! use pageseg_core::{load_snapshot, segment_page};
//!
//! let snapshot = load_snapshot("out/example")?;
//! for segment in segment_page(&snapshot).segments {
//!     println!("{:?} {}", segment.bbox, segment.xpaths.len());
//! }
//! # Ok::<(), pageseg_core::snapshot::SnapshotError>(())
//! ```

pub mod abstraction;
pub mod adjacency;
pub mod clustering;
pub mod evaluation;
pub mod features;
pub mod geometry;
pub mod snapshot;

pub use abstraction::{abstract_page, ObjectKind, VisualObject};
pub use clustering::{segment_page, Segment, Segmentation, SegmentsFile};
pub use evaluation::{evaluate, EvalReport, GroundTruth};
pub use geometry::Rect;
pub use snapshot::{load_snapshot, save_snapshot, PageSnapshot, RawNode};
