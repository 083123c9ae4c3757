//! Filesystem, process and command-line layer over `oppforge-core`.

pub mod cli;
pub mod discover;
pub mod fsio;
pub mod project;

pub use discover::{discover, DiscoverError, ROOT_ENV};
pub use project::{import_manifest, read_nedfolders, Project, ProjectError};
