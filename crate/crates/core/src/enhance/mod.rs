//! Weight and gain maps, tuning profiles, and the luma/chroma fusion that
//! turns a Lite exposure pair into the final tone-mapped frame.

mod fuse;
mod heuristic;
mod maps;
mod metadata;
mod oracle;
mod profile;
mod tmaps;

pub use fuse::{fuse_tone, fuse_tone_ycc, modulate, ycc_to_display, Modulated};
pub use heuristic::{HeuristicConfig, HeuristicModel};
pub use maps::{GainBounds, MapKind, ToneMaps};
pub use metadata::{
    normalize_exposure, normalize_iso, CaptureMetadata, MetadataFeatures, MetadataRegistry, ISO_BASE,
};
pub use oracle::{non_degenerate, solve_oracle_maps, DEGENERACY_EPS, FALLBACK_WEIGHT};
pub use profile::{ProfileSpec, Strength, TuningProfile, DEFAULT_STRENGTH};
pub use tmaps::{decode_tmaps, encode_tmaps, read_tmaps, write_tmaps};
