//! Acoustic feature extraction for sustained-vowel recordings.

pub mod articulation;
pub mod audio;
pub mod bispectrum;
pub mod cohort;
pub mod dsp;
pub mod emd;
pub mod error;
pub mod features;
pub mod nonlinear;
pub mod phonation;
pub mod pitch;
pub mod quality;
pub mod synth;
pub mod table;

pub use audio::{Recording, RecordingMeta, Task, Vowel};
pub use cohort::{ClinicalScale, CohortManifest, Group};
pub use error::{Error, Result};
pub use pitch::{CycleMarks, F0Contour};
pub use table::{FeatureMatrix, Scope};
