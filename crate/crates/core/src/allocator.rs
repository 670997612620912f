//! Budgeted allocation of MIMO sizes to subbands.
//!
//! Each available subband contributes one option from the table's size
//! ladder; the sum of option costs may not exceed the antenna budget and the
//! objective is the sum of the chosen spectral efficiencies. This is a
//! multiple-choice knapsack, solved exactly by dynamic programming over
//! `(subband, antennas used)`. Table rows need not be concave, so no greedy
//! shortcut is taken.
//!
//! Among allocations with equal sum SE the preferred one uses fewer antennas,
//! then has the lexicographically larger option vector in ascending subband
//! order. Sums are always accumulated left to right over subbands, so the
//! solver and the enumerating oracle compare bit-identical values.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::model::{
    ArchitectureClass, ArchitectureSpec, AvailabilityMask, ModelError, SubbandId, SubbandPlan,
};
use crate::table::{format_se, SeTable};

/// Default bound on the number of allocations [`brute_force`] enumerates.
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AllocError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("instance has {size} candidate allocations, above the enumeration cap {cap}")]
    TooLarge { size: u128, cap: u128 },
    #[error("infeasible {class} architecture: {reason}")]
    Infeasible {
        class: ArchitectureClass,
        reason: String,
    },
    #[error("budgets must be ascending")]
    BudgetsNotAscending,
    #[error("subband plan does not match table: {0}")]
    PlanMismatch(String),
}

/// One allocation instance over the columns of `table`. Mask keys and cap
/// keys are column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem<'a> {
    pub table: &'a SeTable,
    pub budget: u32,
    pub mask: AvailabilityMask,
    /// Largest ladder option allowed per subband.
    pub per_subband_cap: Option<BTreeMap<SubbandId, usize>>,
}

impl<'a> AllocationProblem<'a> {
    pub fn new(table: &'a SeTable, budget: u32, mask: AvailabilityMask) -> Result<Self, AllocError> {
        mask.check_covers(0..table.num_subbands() as SubbandId)?;
        Ok(Self {
            table,
            budget,
            mask,
            per_subband_cap: None,
        })
    }

    /// All subbands available.
    pub fn unmasked(table: &'a SeTable, budget: u32) -> Self {
        Self {
            table,
            budget,
            mask: AvailabilityMask::full(table.num_subbands()),
            per_subband_cap: None,
        }
    }

    pub fn with_caps(mut self, caps: BTreeMap<SubbandId, usize>) -> Self {
        self.per_subband_cap = Some(caps);
        self
    }

    /// Highest option index selectable in column `s`.
    fn max_option(&self, s: usize) -> usize {
        if !self.mask.is_available(s as SubbandId) {
            return 0;
        }
        let top = self.table.ladder().len() - 1;
        self.per_subband_cap
            .as_ref()
            .and_then(|c| c.get(&(s as SubbandId)).copied())
            .map_or(top, |cap| cap.min(top))
    }

    fn sum_of(&self, choice: &[usize]) -> f64 {
        choice
            .iter()
            .enumerate()
            .fold(0.0, |acc, (s, &o)| acc + self.table.value(o, s))
    }

    fn cost_of(&self, choice: &[usize]) -> u32 {
        choice.iter().map(|&o| self.table.ladder().cost(o)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Ladder option per subband column; 0 means unused.
    pub choice: Vec<usize>,
    pub sum_se: f64,
    pub antennas_used: u32,
}

impl AllocationResult {
    pub fn zero(subbands: usize) -> Self {
        Self {
            choice: vec![0; subbands],
            sum_se: 0.0,
            antennas_used: 0,
        }
    }

    /// Spectral efficiency contributed by each subband.
    pub fn per_subband_se(&self, table: &SeTable) -> Vec<f64> {
        self.choice
            .iter()
            .enumerate()
            .map(|(s, &o)| table.value(o, s))
            .collect()
    }

    pub fn labels<'t>(&self, table: &'t SeTable) -> Vec<&'t str> {
        self.choice.iter().map(|&o| table.ladder().label(o)).collect()
    }

    /// JSON document with budget, mask, chosen sizes, antennas and sum SE;
    /// keys are frequencies in ascending column order.
    pub fn to_json(&self, table: &SeTable, budget: u32, mask: &AvailabilityMask) -> Value {
        let mut mask_obj = Map::new();
        let mut choice_obj = Map::new();
        for (s, &f) in table.subband_centers().iter().enumerate() {
            let key = format!("{f}");
            mask_obj.insert(key.clone(), json!(mask.is_available(s as SubbandId)));
            choice_obj.insert(key, json!(table.ladder().label(self.choice[s])));
        }
        json!({
            "budget": budget,
            "mask": mask_obj,
            "choice": choice_obj,
            "antennas_used": self.antennas_used,
            "sum_se": self.sum_se,
        })
    }
}

/// Total order used for tie-breaking: `Greater` means `a` is preferred.
fn preference(a_sum: f64, a_used: u32, a_choice: &[usize], b_sum: f64, b_used: u32, b_choice: &[usize]) -> Ordering {
    a_sum
        .total_cmp(&b_sum)
        .then(b_used.cmp(&a_used))
        .then_with(|| a_choice.cmp(b_choice))
}

pub fn is_preferred(a: &AllocationResult, b: &AllocationResult) -> bool {
    preference(a.sum_se, a.antennas_used, &a.choice, b.sum_se, b.antennas_used, &b.choice)
        == Ordering::Greater
}

#[derive(Clone)]
struct State {
    sum: f64,
    choice: Vec<usize>,
}

/// Best prefix allocation for every exact antenna count `0..=budget`.
fn exact_usage_frontier(problem: &AllocationProblem) -> Vec<Option<State>> {
    let table = problem.table;
    let ladder = table.ladder();
    let reachable: u64 = (0..table.num_subbands())
        .map(|s| ladder.cost(problem.max_option(s)) as u64)
        .sum();
    let limit = (problem.budget as u64).min(reachable) as usize;

    let mut states: Vec<Option<State>> = vec![None; limit + 1];
    states[0] = Some(State {
        sum: 0.0,
        choice: Vec::with_capacity(table.num_subbands()),
    });
    for s in 0..table.num_subbands() {
        let mut next: Vec<Option<State>> = vec![None; limit + 1];
        for (used, st) in states.iter().enumerate() {
            let Some(st) = st else { continue };
            for opt in 0..=problem.max_option(s) {
                let at = used + ladder.cost(opt) as usize;
                if at > limit {
                    break;
                }
                let sum = st.sum + table.value(opt, s);
                let wins = match &next[at] {
                    None => true,
                    Some(cur) => match sum.total_cmp(&cur.sum) {
                        Ordering::Greater => true,
                        Ordering::Less => false,
                        Ordering::Equal => {
                            (st.choice.as_slice(), opt) > (&cur.choice[..s], cur.choice[s])
                        }
                    },
                };
                if wins {
                    let mut choice = st.choice.clone();
                    choice.push(opt);
                    next[at] = Some(State { sum, choice });
                }
            }
        }
        states = next;
    }
    states
}

fn best_within(frontier: &[Option<State>], budget: u32) -> AllocationResult {
    let upto = (budget as usize).min(frontier.len() - 1);
    let mut best: Option<AllocationResult> = None;
    for (used, st) in frontier[..=upto].iter().enumerate() {
        let Some(st) = st else { continue };
        let cand = AllocationResult {
            choice: st.choice.clone(),
            sum_se: st.sum,
            antennas_used: used as u32,
        };
        if best.as_ref().is_none_or(|b| is_preferred(&cand, b)) {
            best = Some(cand);
        }
    }
    best.expect("zero allocation is always feasible")
}

/// Globally optimal allocation by dynamic programming; `O(budget x sum of
/// ladder lengths)`.
pub fn optimize(problem: &AllocationProblem) -> AllocationResult {
    best_within(&exact_usage_frontier(problem), problem.budget)
}

/// Exhaustive enumeration of every allocation; refuses instances with more
/// than `cap` candidates.
pub fn brute_force(problem: &AllocationProblem, cap: u128) -> Result<AllocationResult, AllocError> {
    let n = problem.table.num_subbands();
    let limits: Vec<usize> = (0..n).map(|s| problem.max_option(s)).collect();
    let size = limits
        .iter()
        .fold(1u128, |acc, &m| acc.saturating_mul(m as u128 + 1));
    if size > cap {
        return Err(AllocError::TooLarge { size, cap });
    }

    let mut choice = vec![0usize; n];
    let mut best = AllocationResult::zero(n);
    loop {
        let used = problem.cost_of(&choice);
        if used <= problem.budget {
            let sum = problem.sum_of(&choice);
            if preference(sum, used, &choice, best.sum_se, best.antennas_used, &best.choice)
                == Ordering::Greater
            {
                best = AllocationResult {
                    choice: choice.clone(),
                    sum_se: sum,
                    antennas_used: used,
                };
            }
        }
        // odometer, last subband fastest
        let mut s = n;
        loop {
            if s == 0 {
                return Ok(best);
            }
            s -= 1;
            if choice[s] < limits[s] {
                choice[s] += 1;
                break;
            }
            choice[s] = 0;
        }
    }
}

/// One optimal allocation per budget. A single frontier is built for the
/// largest budget; each entry equals `optimize` at that budget.
pub fn sweep(
    table: &SeTable,
    budgets: &[u32],
    mask: &AvailabilityMask,
) -> Result<Vec<AllocationResult>, AllocError> {
    if budgets.windows(2).any(|w| w[0] > w[1]) {
        return Err(AllocError::BudgetsNotAscending);
    }
    let Some(&max_budget) = budgets.last() else {
        return Ok(Vec::new());
    };
    let problem = AllocationProblem::new(table, max_budget, mask.clone())?;
    let frontier = exact_usage_frontier(&problem);
    Ok(budgets.iter().map(|&b| best_within(&frontier, b)).collect())
}

/// `budget,<f1>_se,...,<fK>_se,sum_se` rows for stacked-area plots.
pub fn sweep_csv(table: &SeTable, budgets: &[u32], results: &[AllocationResult]) -> String {
    let mut out = String::from("budget");
    for f in table.subband_centers() {
        out.push_str(&format!(",{f}_se"));
    }
    out.push_str(",sum_se\n");
    for (b, r) in budgets.iter().zip(results) {
        out.push_str(&b.to_string());
        for v in r.per_subband_se(table) {
            out.push(',');
            out.push_str(&format_se(v));
        }
        out.push(',');
        out.push_str(&format_se(r.sum_se));
        out.push('\n');
    }
    out
}

fn check_plan(plan: &SubbandPlan, table: &SeTable) -> Result<(), AllocError> {
    if plan.len() != table.num_subbands() {
        return Err(AllocError::PlanMismatch(format!(
            "{} subbands in plan, {} in table",
            plan.len(),
            table.num_subbands()
        )));
    }
    for (s, (band, &f)) in plan.subbands().iter().zip(table.subband_centers()).enumerate() {
        if (band.f_center - f).abs() > 1e-6 {
            return Err(AllocError::PlanMismatch(format!(
                "column {s}: plan center {} GHz vs table {f} GHz",
                band.f_center
            )));
        }
    }
    Ok(())
}

/// Optimal allocation under an architecture's hardware constraints.
///
/// Table columns correspond to `plan` subbands in order; `mask` is keyed by
/// plan subband id.
///
/// * partitioned: a single available subband, up to `min(converters,
///   antennas there)`;
/// * integrated: per-subband converter counts, no reuse across subbands,
///   converters of masked subbands idle;
/// * adaptive: shared converter budget, each subband limited to the antennas
///   the switching network reaches;
/// * all-antennas: every available subband runs its full array.
pub fn repurpose(
    spec: &ArchitectureSpec,
    plan: &SubbandPlan,
    table: &SeTable,
    mask: &AvailabilityMask,
) -> Result<AllocationResult, AllocError> {
    check_plan(plan, table)?;
    spec.check(plan)?;
    let ids: Vec<SubbandId> = plan.ids().collect();
    mask.check_covers(ids.iter().copied())?;
    let flags = mask.flags(ids.iter().copied());
    let col_mask = AvailabilityMask::from_flags(&flags);
    let ladder = table.ladder();
    let n = ids.len();

    let available: Vec<usize> = (0..n).filter(|&s| flags[s]).collect();
    if available.is_empty() {
        return Ok(AllocationResult::zero(n));
    }
    let served = |s: usize| {
        spec.antennas_covering(ids[s]) > 0
            && (spec.class != ArchitectureClass::FrequencyAdaptive || switch_reaches(spec, ids[s]))
    };
    if !available.iter().any(|&s| served(s)) {
        return Err(AllocError::Infeasible {
            class: spec.class,
            reason: "no frontend reachable in any available subband".into(),
        });
    }

    let caps_from = |limit: &dyn Fn(SubbandId) -> u32| -> BTreeMap<SubbandId, usize> {
        (0..n)
            .map(|s| (s as SubbandId, ladder.option_within(limit(ids[s]))))
            .collect()
    };

    let result = match spec.class {
        ArchitectureClass::FrequencyPartitioned => {
            let mut best = AllocationResult::zero(n);
            for &s in &available {
                let reach = spec.converter_budget.min(spec.antennas_covering(ids[s]));
                let only = AvailabilityMask::only(n, &[s as SubbandId]);
                let cand = optimize(&AllocationProblem::new(table, reach, only)?);
                if is_preferred(&cand, &best) {
                    best = cand;
                }
            }
            best
        }
        ArchitectureClass::FrequencyIntegrated => {
            let caps = caps_from(&|id| spec.converters_for(id).min(spec.antennas_covering(id)));
            optimize(&AllocationProblem::new(table, spec.converter_budget, col_mask)?.with_caps(caps))
        }
        ArchitectureClass::FrequencyAdaptive => {
            let caps = caps_from(&|id| spec.reachable_antennas(id));
            optimize(&AllocationProblem::new(table, spec.converter_budget, col_mask)?.with_caps(caps))
        }
        ArchitectureClass::AllAntennas => {
            let problem = AllocationProblem::new(table, spec.converter_budget, col_mask)?;
            let choice: Vec<usize> = (0..n)
                .map(|s| {
                    if flags[s] {
                        ladder.option_within(spec.antennas_covering(ids[s]))
                    } else {
                        0
                    }
                })
                .collect();
            AllocationResult {
                sum_se: problem.sum_of(&choice),
                antennas_used: problem.cost_of(&choice),
                choice,
            }
        }
    };
    Ok(result)
}

fn switch_reaches(spec: &ArchitectureSpec, id: SubbandId) -> bool {
    use crate::model::Switching;
    match &spec.switching {
        Switching::FullCrossbar => spec.antennas_covering(id) > 0,
        Switching::Explicit(map) => spec
            .frontend_sets
            .iter()
            .filter(|f| f.covers(id))
            .any(|f| map.iter().any(|r| r.contains(&f.id))),
    }
}
