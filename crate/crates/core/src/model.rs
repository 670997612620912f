//! Domain types shared across the crate: subbands and plans, frontend sets,
//! architecture descriptions, size ladders, availability masks and the
//! design-time validation of frontend sets against the fractional-bandwidth
//! limit of their power amplifiers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type SubbandId = u32;

/// Lower edge of the upper mid-band, GHz.
pub const FR3_MIN_GHZ: f64 = 7.0;
/// Upper edge of the upper mid-band, GHz.
pub const FR3_MAX_GHZ: f64 = 24.0;
/// Default fractional-bandwidth limit of one frontend set.
pub const DEFAULT_MAX_FBW: f64 = 0.29;
/// Centers of the five evaluated frequencies, GHz.
pub const DEFAULT_CENTERS_GHZ: [f64; 5] = [7.0, 10.0, 14.0, 20.0, 24.0];
pub const DEFAULT_HALF_WIDTH_GHZ: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("subband {id}: invalid frequency range [{f_low}, {f_high}] GHz with center {f_center}")]
    InvalidSubband {
        id: SubbandId,
        f_low: f64,
        f_high: f64,
        f_center: f64,
    },
    #[error("subband plan is empty")]
    EmptyPlan,
    #[error("subband {id} center {f_center} GHz lies outside plan limits [{min}, {max}] GHz")]
    OutOfRange {
        id: SubbandId,
        f_center: f64,
        min: f64,
        max: f64,
    },
    #[error("subbands {first} and {second} are unsorted or overlap")]
    Overlap { first: SubbandId, second: SubbandId },
    #[error("duplicate subband id {0}")]
    DuplicateSubband(SubbandId),
    #[error("unknown subband id {0}")]
    UnknownSubband(SubbandId),
    #[error("frontend set {0} must have at least one antenna")]
    NoAntennas(u32),
    #[error("frontend set {0} covers no subband")]
    EmptyCoverage(u32),
    #[error("duplicate frontend set id {0}")]
    DuplicateFrontendSet(u32),
    #[error("invalid size ladder: {0}")]
    InvalidLadder(String),
    #[error("invalid spectral-efficiency table: {0}")]
    InvalidTable(String),
    #[error("invalid availability mask: {0}")]
    InvalidMask(String),
    #[error("invalid {class} architecture: {reason}")]
    InvalidArchitecture {
        class: ArchitectureClass,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subband {
    pub id: SubbandId,
    pub f_low: f64,
    pub f_high: f64,
    pub f_center: f64,
}

impl Subband {
    /// Subband centered at the midpoint of its edges.
    pub fn new(id: SubbandId, f_low: f64, f_high: f64) -> Result<Self, ModelError> {
        Self::with_center(id, f_low, f_high, 0.5 * (f_low + f_high))
    }

    /// A zero-width subband (`f_low == f_high`) is accepted; it models a
    /// single carrier.
    pub fn with_center(
        id: SubbandId,
        f_low: f64,
        f_high: f64,
        f_center: f64,
    ) -> Result<Self, ModelError> {
        let ok = f_low.is_finite()
            && f_high.is_finite()
            && f_center.is_finite()
            && f_low > 0.0
            && f_low <= f_high
            && f_low <= f_center
            && f_center <= f_high;
        if !ok {
            return Err(ModelError::InvalidSubband {
                id,
                f_low,
                f_high,
                f_center,
            });
        }
        Ok(Self {
            id,
            f_low,
            f_high,
            f_center,
        })
    }

    pub fn width(&self) -> f64 {
        self.f_high - self.f_low
    }
}

/// Ordered, non-overlapping set of subbands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubbandPlan {
    subbands: Vec<Subband>,
    min_ghz: f64,
    max_ghz: f64,
}

impl SubbandPlan {
    pub fn new(subbands: Vec<Subband>) -> Result<Self, ModelError> {
        Self::with_limits(subbands, FR3_MIN_GHZ, FR3_MAX_GHZ)
    }

    /// Range limits apply to subband centers, so that bands centered on the
    /// edges of the range keep their full width.
    pub fn with_limits(
        subbands: Vec<Subband>,
        min_ghz: f64,
        max_ghz: f64,
    ) -> Result<Self, ModelError> {
        if subbands.is_empty() {
            return Err(ModelError::EmptyPlan);
        }
        let mut seen = BTreeSet::new();
        for s in &subbands {
            if !seen.insert(s.id) {
                return Err(ModelError::DuplicateSubband(s.id));
            }
            if s.f_center < min_ghz || s.f_center > max_ghz {
                return Err(ModelError::OutOfRange {
                    id: s.id,
                    f_center: s.f_center,
                    min: min_ghz,
                    max: max_ghz,
                });
            }
        }
        for pair in subbands.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let touching_points = a.f_high == b.f_low && (a.width() == 0.0 || b.width() == 0.0);
            if a.f_low > b.f_low || a.f_high > b.f_low || touching_points {
                return Err(ModelError::Overlap {
                    first: a.id,
                    second: b.id,
                });
            }
        }
        Ok(Self {
            subbands,
            min_ghz,
            max_ghz,
        })
    }

    /// Plan with ids `0..centers.len()`, each band `center ± half_width`.
    pub fn from_centers(centers: &[f64], half_width: f64) -> Result<Self, ModelError> {
        let subbands = centers
            .iter()
            .enumerate()
            .map(|(i, &c)| Subband::with_center(i as SubbandId, c - half_width, c + half_width, c))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(subbands)
    }

    /// The five evaluated FR3 frequencies, ±0.5 GHz each.
    pub fn fr3_default() -> Self {
        Self::from_centers(&DEFAULT_CENTERS_GHZ, DEFAULT_HALF_WIDTH_GHZ)
            .expect("default plan is valid")
    }

    pub fn subbands(&self) -> &[Subband] {
        &self.subbands
    }

    pub fn len(&self) -> usize {
        self.subbands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subbands.is_empty()
    }

    pub fn limits(&self) -> (f64, f64) {
        (self.min_ghz, self.max_ghz)
    }

    pub fn position(&self, id: SubbandId) -> Option<usize> {
        self.subbands.iter().position(|s| s.id == id)
    }

    pub fn get(&self, id: SubbandId) -> Option<&Subband> {
        self.subbands.iter().find(|s| s.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = SubbandId> + '_ {
        self.subbands.iter().map(|s| s.id)
    }

    pub fn centers(&self) -> Vec<f64> {
        self.subbands.iter().map(|s| s.f_center).collect()
    }
}

/// A group of identical RF frontends and antennas covering one or more
/// contiguous subbands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontendSet {
    pub id: u32,
    pub antenna_count: u32,
    pub covered_subband_ids: BTreeSet<SubbandId>,
    pub max_fbw: f64,
}

impl FrontendSet {
    pub fn new(
        id: u32,
        antenna_count: u32,
        covered: impl IntoIterator<Item = SubbandId>,
    ) -> Result<Self, ModelError> {
        let covered_subband_ids: BTreeSet<_> = covered.into_iter().collect();
        if antenna_count == 0 {
            return Err(ModelError::NoAntennas(id));
        }
        if covered_subband_ids.is_empty() {
            return Err(ModelError::EmptyCoverage(id));
        }
        Ok(Self {
            id,
            antenna_count,
            covered_subband_ids,
            max_fbw: DEFAULT_MAX_FBW,
        })
    }

    pub fn with_max_fbw(mut self, max_fbw: f64) -> Self {
        self.max_fbw = max_fbw;
        self
    }

    pub fn covers(&self, id: SubbandId) -> bool {
        self.covered_subband_ids.contains(&id)
    }
}

/// `(f_max - f_min) / f_mid` with `f_mid` the midpoint of the two edges.
pub fn fractional_bandwidth(f_min: f64, f_max: f64) -> f64 {
    let f_mid = 0.5 * (f_max + f_min);
    (f_max - f_min) / f_mid
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonContiguous {
        set: u32,
        covered: Vec<SubbandId>,
    },
    FractionalBandwidth {
        set: u32,
        fbw: f64,
        limit: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonContiguous { set, covered } => {
                write!(f, "frontend set {set}: covered subbands {covered:?} are not contiguous")
            }
            Violation::FractionalBandwidth { set, fbw, limit } => write!(
                f,
                "frontend set {set}: fractional bandwidth {fbw:.4} exceeds limit {limit:.4}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontendValidation {
    /// Fractional bandwidth spanned by the union of covered subbands.
    pub fbw: f64,
    pub violations: Vec<Violation>,
}

impl FrontendValidation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks contiguity and the fractional-bandwidth limit of a frontend set.
///
/// An id absent from the plan is a configuration defect and reported as an
/// error rather than as a violation.
pub fn validate_frontend_set(
    set: &FrontendSet,
    plan: &SubbandPlan,
) -> Result<FrontendValidation, ModelError> {
    let mut positions = Vec::with_capacity(set.covered_subband_ids.len());
    for &id in &set.covered_subband_ids {
        positions.push(plan.position(id).ok_or(ModelError::UnknownSubband(id))?);
    }
    positions.sort_unstable();

    let mut violations = Vec::new();
    if positions.windows(2).any(|w| w[1] != w[0] + 1) {
        violations.push(Violation::NonContiguous {
            set: set.id,
            covered: set.covered_subband_ids.iter().copied().collect(),
        });
    }

    let bands = positions.iter().map(|&p| &plan.subbands()[p]);
    let f_min = bands.clone().map(|s| s.f_low).fold(f64::INFINITY, f64::min);
    let f_max = bands.map(|s| s.f_high).fold(f64::NEG_INFINITY, f64::max);
    let fbw = fractional_bandwidth(f_min, f_max);
    if !(fbw <= set.max_fbw) {
        violations.push(Violation::FractionalBandwidth {
            set: set.id,
            fbw,
            limit: set.max_fbw,
        });
    }
    Ok(FrontendValidation { fbw, violations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArchitectureClass {
    FrequencyPartitioned,
    FrequencyIntegrated,
    FrequencyAdaptive,
    AllAntennas,
}

impl ArchitectureClass {
    pub const ALL: [ArchitectureClass; 4] = [
        ArchitectureClass::FrequencyPartitioned,
        ArchitectureClass::FrequencyIntegrated,
        ArchitectureClass::FrequencyAdaptive,
        ArchitectureClass::AllAntennas,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            ArchitectureClass::FrequencyPartitioned => "frequency-partitioned",
            ArchitectureClass::FrequencyIntegrated => "frequency-integrated",
            ArchitectureClass::FrequencyAdaptive => "frequency-adaptive",
            ArchitectureClass::AllAntennas => "all-antennas",
        }
    }
}

impl fmt::Display for ArchitectureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

/// Which frontend sets each converter can be switched onto.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Switching {
    FullCrossbar,
    /// Entry `i` lists the frontend-set ids reachable from converter `i`.
    Explicit(Vec<BTreeSet<u32>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub class: ArchitectureClass,
    pub frontend_sets: Vec<FrontendSet>,
    pub converter_budget: u32,
    pub per_subband_converters: Option<BTreeMap<SubbandId, u32>>,
    pub switching: Switching,
}

impl ArchitectureSpec {
    /// Builds a spec and checks the class-specific converter accounting
    /// against `plan`.
    pub fn new(
        class: ArchitectureClass,
        frontend_sets: Vec<FrontendSet>,
        converter_budget: u32,
        per_subband_converters: Option<BTreeMap<SubbandId, u32>>,
        switching: Switching,
        plan: &SubbandPlan,
    ) -> Result<Self, ModelError> {
        let spec = Self {
            class,
            frontend_sets,
            converter_budget,
            per_subband_converters,
            switching,
        };
        spec.check(plan)?;
        Ok(spec)
    }

    fn invalid(&self, reason: impl Into<String>) -> ModelError {
        ModelError::InvalidArchitecture {
            class: self.class,
            reason: reason.into(),
        }
    }

    pub fn check(&self, plan: &SubbandPlan) -> Result<(), ModelError> {
        let mut ids = BTreeSet::new();
        for set in &self.frontend_sets {
            if !ids.insert(set.id) {
                return Err(ModelError::DuplicateFrontendSet(set.id));
            }
            for &s in &set.covered_subband_ids {
                if plan.position(s).is_none() {
                    return Err(ModelError::UnknownSubband(s));
                }
            }
        }
        if let Switching::Explicit(map) = &self.switching {
            if map.len() != self.converter_budget as usize {
                return Err(self.invalid(format!(
                    "switching lists {} converters but the budget is {}",
                    map.len(),
                    self.converter_budget
                )));
            }
            if let Some(bad) = map.iter().flatten().find(|id| !ids.contains(id)) {
                return Err(self.invalid(format!("switching references unknown frontend set {bad}")));
            }
        }
        match self.class {
            ArchitectureClass::FrequencyIntegrated => {
                let per = self
                    .per_subband_converters
                    .as_ref()
                    .ok_or_else(|| self.invalid("per-subband converter counts are required"))?;
                if let Some(s) = per.keys().find(|s| plan.position(**s).is_none()) {
                    return Err(ModelError::UnknownSubband(*s));
                }
                let total: u64 = per.values().map(|&c| c as u64).sum();
                if total != self.converter_budget as u64 {
                    return Err(self.invalid(format!(
                        "converter budget {} differs from per-subband total {total}",
                        self.converter_budget
                    )));
                }
            }
            ArchitectureClass::FrequencyPartitioned => {
                let widest = plan
                    .ids()
                    .map(|s| self.antennas_covering(s))
                    .max()
                    .unwrap_or(0);
                if self.converter_budget > widest {
                    return Err(self.invalid(format!(
                        "converter budget {} exceeds the {widest} antennas of the largest subband",
                        self.converter_budget
                    )));
                }
            }
            ArchitectureClass::AllAntennas => {
                let total = self.total_antennas();
                if self.converter_budget != total {
                    return Err(self.invalid(format!(
                        "converter budget {} differs from antenna total {total}",
                        self.converter_budget
                    )));
                }
            }
            ArchitectureClass::FrequencyAdaptive => {}
        }
        Ok(())
    }

    pub fn total_antennas(&self) -> u32 {
        self.frontend_sets.iter().map(|s| s.antenna_count).sum()
    }

    /// Antennas of all frontend sets operating in `subband`.
    pub fn antennas_covering(&self, subband: SubbandId) -> u32 {
        self.frontend_sets
            .iter()
            .filter(|s| s.covers(subband))
            .map(|s| s.antenna_count)
            .sum()
    }

    /// Antennas in `subband` that converters can be switched onto, limited by
    /// the number of converters that reach them.
    pub fn reachable_antennas(&self, subband: SubbandId) -> u32 {
        match &self.switching {
            Switching::FullCrossbar => self.antennas_covering(subband).min(self.converter_budget),
            Switching::Explicit(map) => {
                let covering: BTreeSet<u32> = self
                    .frontend_sets
                    .iter()
                    .filter(|s| s.covers(subband))
                    .map(|s| s.id)
                    .collect();
                let reached: BTreeSet<u32> = map
                    .iter()
                    .flat_map(|r| r.intersection(&covering).copied())
                    .collect();
                let converters = map.iter().filter(|r| !r.is_disjoint(&covering)).count() as u32;
                let antennas: u32 = self
                    .frontend_sets
                    .iter()
                    .filter(|s| reached.contains(&s.id))
                    .map(|s| s.antenna_count)
                    .sum();
                antennas.min(converters)
            }
        }
    }

    pub fn converters_for(&self, subband: SubbandId) -> u32 {
        self.per_subband_converters
            .as_ref()
            .and_then(|m| m.get(&subband).copied())
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderOption {
    pub cost: u32,
    pub label: String,
}

/// Ordered MIMO size options with their antenna cost at the variable end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeLadder {
    options: Vec<LadderOption>,
}

impl SizeLadder {
    pub fn new(options: Vec<LadderOption>) -> Result<Self, ModelError> {
        match options.first() {
            Some(o) if o.cost == 0 => {}
            _ => return Err(ModelError::InvalidLadder("first option must cost 0".into())),
        }
        if options.windows(2).any(|w| w[0].cost >= w[1].cost) {
            return Err(ModelError::InvalidLadder(
                "costs must be strictly increasing".into(),
            ));
        }
        Ok(Self { options })
    }

    /// Ladder from costs alone; each label is the cost itself.
    pub fn from_costs(costs: &[u32]) -> Result<Self, ModelError> {
        Self::new(
            costs
                .iter()
                .map(|&cost| LadderOption {
                    cost,
                    label: cost.to_string(),
                })
                .collect(),
        )
    }

    /// `n x n` options for `n = 0..=max`, cost `n`.
    pub fn linear(max: u32) -> Self {
        Self {
            options: (0..=max)
                .map(|n| LadderOption {
                    cost: n,
                    label: size_label(n),
                })
                .collect(),
        }
    }

    /// Square `k x k` arrays for `k = 0..=max_side`, cost `k^2`.
    pub fn square(max_side: u32) -> Self {
        Self {
            options: (0..=max_side)
                .map(|k| LadderOption {
                    cost: k * k,
                    label: size_label(k),
                })
                .collect(),
        }
    }

    pub fn options(&self) -> &[LadderOption] {
        &self.options
    }

    pub fn len(&self) -> usize {
        self.options.len()
    }

    pub fn is_empty(&self) -> bool {
        self.options.is_empty()
    }

    pub fn cost(&self, option: usize) -> u32 {
        self.options[option].cost
    }

    pub fn label(&self, option: usize) -> &str {
        &self.options[option].label
    }

    pub fn max_cost(&self) -> u32 {
        self.options.last().map_or(0, |o| o.cost)
    }

    /// Largest option whose cost does not exceed `limit`.
    pub fn option_within(&self, limit: u32) -> usize {
        self.options.partition_point(|o| o.cost <= limit) - 1
    }

    pub fn position_of_cost(&self, cost: u32) -> Option<usize> {
        self.options.binary_search_by_key(&cost, |o| o.cost).ok()
    }

    /// `(n_rx, n_tx) = (cost, cost)` for every option.
    pub fn symmetric_sizes(&self) -> Vec<(usize, usize)> {
        self.options
            .iter()
            .map(|o| (o.cost as usize, o.cost as usize))
            .collect()
    }

    /// `(n_rx, n_tx) = (cost, tx)`: receive end varies, transmit end fixed.
    pub fn fixed_tx_sizes(&self, tx: usize) -> Vec<(usize, usize)> {
        self.options
            .iter()
            .map(|o| (o.cost as usize, if o.cost == 0 { 0 } else { tx }))
            .collect()
    }
}

fn size_label(n: u32) -> String {
    if n == 0 {
        "off".to_string()
    } else {
        format!("{n}x{n}")
    }
}

/// Per-subband availability. Keys are subband ids; for tables without an
/// explicit plan, ids are column indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilityMask {
    pub available: BTreeMap<SubbandId, bool>,
}

impl AvailabilityMask {
    pub fn all_available(ids: impl IntoIterator<Item = SubbandId>) -> Self {
        Self {
            available: ids.into_iter().map(|id| (id, true)).collect(),
        }
    }

    /// All of `0..n` available.
    pub fn full(n: usize) -> Self {
        Self::all_available(0..n as SubbandId)
    }

    pub fn from_flags(flags: &[bool]) -> Self {
        Self {
            available: flags
                .iter()
                .enumerate()
                .map(|(i, &b)| (i as SubbandId, b))
                .collect(),
        }
    }

    /// Ids `0..n` with only `enabled` available.
    pub fn only(n: usize, enabled: &[SubbandId]) -> Self {
        Self {
            available: (0..n as SubbandId)
                .map(|id| (id, enabled.contains(&id)))
                .collect(),
        }
    }

    pub fn is_available(&self, id: SubbandId) -> bool {
        self.available.get(&id).copied().unwrap_or(false)
    }

    pub fn available_count(&self) -> usize {
        self.available.values().filter(|&&b| b).count()
    }

    /// Errors unless the mask covers exactly `ids`.
    pub fn check_covers(
        &self,
        ids: impl IntoIterator<Item = SubbandId>,
    ) -> Result<(), ModelError> {
        let expected: BTreeSet<SubbandId> = ids.into_iter().collect();
        let actual: BTreeSet<SubbandId> = self.available.keys().copied().collect();
        if expected != actual {
            return Err(ModelError::InvalidMask(format!(
                "mask covers {actual:?}, expected {expected:?}"
            )));
        }
        Ok(())
    }

    /// Availability flags in the order of `ids`.
    pub fn flags(&self, ids: impl IntoIterator<Item = SubbandId>) -> Vec<bool> {
        ids.into_iter().map(|id| self.is_available(id)).collect()
    }
}
