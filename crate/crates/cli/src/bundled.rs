//! Family files shipped with the binary.

pub const BRIANCON_SPEDER: &str = include_str!("../specs/briancon-speder.vfold");
pub const COALESCING: &str = include_str!("../specs/coalescing.vfold");

pub const NAMES: &[&str] = &["briancon-speder", "coalescing"];

pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "briancon-speder" => Some(BRIANCON_SPEDER),
        "coalescing" => Some(COALESCING),
        _ => None,
    }
}
