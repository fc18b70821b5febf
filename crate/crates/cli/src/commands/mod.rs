pub mod indices;
pub mod plotdata;
pub mod predict;
pub mod price;
pub mod synth;

use std::path::PathBuf;

use climidx_core::Execution;

use crate::config::Loaded;

/// Everything a subcommand needs besides its own flags.
pub struct Context {
    pub loaded: Loaded,
    /// Output root; each command writes under `<root>/<command>/`.
    pub out_root: PathBuf,
    pub out_dir: PathBuf,
    pub execution: Execution,
    pub jobs: Option<usize>,
    /// Explicit predict `reports.json` for `plotdata`.
    pub predict_reports: Option<PathBuf>,
}
