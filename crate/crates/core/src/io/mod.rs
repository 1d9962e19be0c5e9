//! Run configuration, snapshot and energy-log writers, and run manifests.

mod config;
mod output;

pub use config::{parse_config, render_config, RunConfig};
pub use output::{
    append_energy_log, render_csv, render_vtk, sha256_file, write_manifest, write_snapshot, ENERGY_HEADER,
    MANIFEST_NAME,
};
