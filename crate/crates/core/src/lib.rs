//! Multi-band MIMO operation across the upper mid-band (7-24 GHz).
//!
//! * [`model`]: subbands, frontend sets, architectures, size ladders, masks
//! * [`table`]: spectral-efficiency tables, their CSV form, builtin tables
//! * [`channel`]: synthetic clustered channels and channel files
//! * [`capacity`]: log-det spectral efficiency and table building
//! * [`allocator`]: exact budgeted subband allocation and sweeps
//! * [`architectures`]: four-architecture comparison and radar output

pub mod allocator;
pub mod architectures;
pub mod capacity;
pub mod channel;
pub mod model;
pub mod table;

pub use allocator::{
    brute_force, optimize, repurpose, sweep, AllocError, AllocationProblem, AllocationResult,
};
pub use architectures::{comparison_specs, evaluate, radar_coordinates, ArchitectureMetrics};
pub use capacity::{build_se_table, mimo_se, subarray_se, SnrConfig};
pub use channel::{fspl_db, synth_generate, ChannelRecord, ChannelSet, ScenarioConfig};
pub use model::{
    validate_frontend_set, ArchitectureClass, ArchitectureSpec, AvailabilityMask, FrontendSet,
    SizeLadder, Subband, SubbandPlan,
};
pub use table::{builtin_indoor, builtin_outdoor, builtin_tables, SeTable};
