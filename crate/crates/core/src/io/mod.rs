//! Persistence and data plumbing: PGM images, parameter checkpoints, dataset
//! manifests, the pseudo-real degradation pipeline and seeded dataset
//! generation.

mod checkpoint;
mod dataset;
mod degrade;
mod manifest;
mod pgm;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, MAGIC, VERSION};
pub use dataset::{
    plan_dataset, render_dataset, render_record, render_records, rerender_manifest, sample_record, scene_seed,
};
pub use degrade::{anisotropic_blur, degrade, degrade_unclamped, DegradeConfig};
pub use manifest::{Manifest, ManifestRecord, Role, MANIFEST_FILE};
pub use pgm::{decode_pgm, encode_pgm, list_pgm, read_pgm, read_pgm_dir, write_pgm, BitDepth};
