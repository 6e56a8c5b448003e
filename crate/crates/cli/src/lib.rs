//! Family-description files, task reports, and the bundled example
//! families for the `vfold` command-line interface.

pub mod bundled;
pub mod familyspec;
pub mod report;
