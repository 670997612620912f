//! Comparison of the four multi-band architectures on bandwidth, spectral
//! efficiency and hardware counts, with radar-chart normalization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::allocator::{repurpose, AllocError, AllocationResult};
use crate::model::{
    ArchitectureClass, ArchitectureSpec, AvailabilityMask, FrontendSet, ModelError, SubbandPlan,
    Switching,
};
use crate::table::{format_se, SeTable};

/// Antennas per subband in the large-array comparison (a 14x14 array).
pub const ARRAY_ANTENNAS: u32 = 196;
/// Antennas and dedicated converters per subband of the integrated design
/// (a 6x6 array).
pub const INTEGRATED_ANTENNAS: u32 = 36;

/// Radar-chart coordinates reported for the comparison under 7 and 24 GHz
/// availability, axes as in [`ArchitectureMetrics::axes`]. The `#ADCs/DACs`
/// axis does not follow a single linear normalization; kept as reference
/// data only.
pub const REFERENCE_RADAR: [(ArchitectureClass, [f64; 5]); 4] = [
    (
        ArchitectureClass::FrequencyPartitioned,
        [2.5, 2.518213, 2.5, 2.5, 5.0],
    ),
    (
        ArchitectureClass::FrequencyIntegrated,
        [5.0, 3.68886, 0.918367, 5.0, 0.918367],
    ),
    (
        ArchitectureClass::FrequencyAdaptive,
        [5.0, 4.36629, 2.29592, 5.0, 5.0],
    ),
    (ArchitectureClass::AllAntennas, [5.0, 5.0, 5.0, 5.0, 5.0]),
];

pub const AXIS_NAMES: [&str; 5] = ["bandwidth", "se", "adc_dac", "subbands", "frontends"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArchError {
    #[error("comparison needs a 5-subband plan, got {0}")]
    PlanSize(usize),
    #[error("radar normalization needs at least two architectures, got {0}")]
    TooFew(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchitectureMetrics {
    pub class: ArchitectureClass,
    /// GHz of available spectrum used concurrently.
    pub total_bandwidth: f64,
    pub sum_se: f64,
    pub adc_dac_count: u32,
    pub subbands_accessible: u32,
    pub rf_frontend_count: u32,
}

impl ArchitectureMetrics {
    /// `[bandwidth, se, adc_dac, subbands, frontends]`.
    pub fn axes(&self) -> [f64; 5] {
        [
            self.total_bandwidth,
            self.sum_se,
            self.adc_dac_count as f64,
            self.subbands_accessible as f64,
            self.rf_frontend_count as f64,
        ]
    }
}

fn one_set_per_subband(plan: &SubbandPlan, antennas: u32) -> Result<Vec<FrontendSet>, ModelError> {
    plan.ids()
        .enumerate()
        .map(|(i, id)| FrontendSet::new(i as u32, antennas, [id]))
        .collect()
}

/// The four comparison designs over a five-subband plan, in the order
/// partitioned, integrated, adaptive, all-antennas:
///
/// * partitioned: 5x196 antennas/frontends, 196 converters, one subband at
///   a time;
/// * integrated: a 6x6 array per subband with 36 dedicated converters each
///   (180 total);
/// * adaptive: 5x196 antennas/frontends, 196 converters on a full crossbar;
/// * all-antennas: 5x196 antennas/frontends with 980 dedicated converters.
pub fn comparison_specs(plan: &SubbandPlan) -> Result<Vec<ArchitectureSpec>, ArchError> {
    if plan.len() != 5 {
        return Err(ArchError::PlanSize(plan.len()));
    }
    let big = one_set_per_subband(plan, ARRAY_ANTENNAS)?;
    let small = one_set_per_subband(plan, INTEGRATED_ANTENNAS)?;
    let per_subband: BTreeMap<_, _> = plan.ids().map(|id| (id, INTEGRATED_ANTENNAS)).collect();
    let total_big = ARRAY_ANTENNAS * plan.len() as u32;

    Ok(vec![
        ArchitectureSpec::new(
            ArchitectureClass::FrequencyPartitioned,
            big.clone(),
            ARRAY_ANTENNAS,
            None,
            Switching::FullCrossbar,
            plan,
        )?,
        ArchitectureSpec::new(
            ArchitectureClass::FrequencyIntegrated,
            small,
            INTEGRATED_ANTENNAS * plan.len() as u32,
            Some(per_subband),
            Switching::FullCrossbar,
            plan,
        )?,
        ArchitectureSpec::new(
            ArchitectureClass::FrequencyAdaptive,
            big.clone(),
            ARRAY_ANTENNAS,
            None,
            Switching::FullCrossbar,
            plan,
        )?,
        ArchitectureSpec::new(
            ArchitectureClass::AllAntennas,
            big,
            total_big,
            None,
            Switching::FullCrossbar,
            plan,
        )?,
    ])
}

/// Evaluates one architecture. Partitioned designs access only the subband
/// their allocation uses; the others access every available subband they
/// have hardware for.
pub fn evaluate(
    spec: &ArchitectureSpec,
    plan: &SubbandPlan,
    table: &SeTable,
    mask: &AvailabilityMask,
) -> Result<ArchitectureMetrics, ArchError> {
    let alloc: AllocationResult = repurpose(spec, plan, table, mask)?;
    let accessible: Vec<usize> = plan
        .subbands()
        .iter()
        .enumerate()
        .filter(|(s, band)| {
            if !mask.is_available(band.id) {
                return false;
            }
            match spec.class {
                ArchitectureClass::FrequencyPartitioned => alloc.choice[*s] > 0,
                ArchitectureClass::FrequencyIntegrated => {
                    spec.converters_for(band.id).min(spec.antennas_covering(band.id)) > 0
                }
                ArchitectureClass::FrequencyAdaptive => spec.reachable_antennas(band.id) > 0,
                ArchitectureClass::AllAntennas => spec.antennas_covering(band.id) > 0,
            }
        })
        .map(|(s, _)| s)
        .collect();

    Ok(ArchitectureMetrics {
        class: spec.class,
        total_bandwidth: accessible.iter().map(|&s| plan.subbands()[s].width()).sum(),
        sum_se: alloc.sum_se,
        adc_dac_count: spec.converter_budget,
        subbands_accessible: accessible.len() as u32,
        rf_frontend_count: spec.total_antennas(),
    })
}

/// Per axis, `5 * value / max(value)`; an all-zero axis maps to 0.
pub fn radar_coordinates(metrics: &[ArchitectureMetrics]) -> Result<Vec<[f64; 5]>, ArchError> {
    if metrics.len() < 2 {
        return Err(ArchError::TooFew(metrics.len()));
    }
    let rows: Vec<[f64; 5]> = metrics.iter().map(ArchitectureMetrics::axes).collect();
    let mut max = [0.0f64; 5];
    for row in &rows {
        for (m, v) in max.iter_mut().zip(row) {
            *m = m.max(*v);
        }
    }
    Ok(rows
        .iter()
        .map(|row| {
            let mut out = [0.0; 5];
            for k in 0..5 {
                out[k] = if max[k] > 0.0 { 5.0 * row[k] / max[k] } else { 0.0 };
            }
            out
        })
        .collect())
}

fn rows_csv<'a>(rows: impl Iterator<Item = (ArchitectureClass, [f64; 5])> + 'a) -> String {
    let mut out = String::from("architecture,");
    out.push_str(&AXIS_NAMES.join(","));
    out.push('\n');
    for (class, row) in rows {
        out.push_str(class.slug());
        for v in row {
            write!(out, ",{}", format_se(v)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Raw metric values, one row per architecture.
pub fn metrics_csv(metrics: &[ArchitectureMetrics]) -> String {
    rows_csv(metrics.iter().map(|m| (m.class, m.axes())))
}

/// Normalized radar coordinates in `[0, 5]`.
pub fn radar_csv(metrics: &[ArchitectureMetrics]) -> Result<String, ArchError> {
    let coords = radar_coordinates(metrics)?;
    Ok(rows_csv(
        metrics.iter().map(|m| m.class).zip(coords),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::builtin_indoor;

    fn metrics(class: ArchitectureClass, axes: [f64; 5]) -> ArchitectureMetrics {
        ArchitectureMetrics {
            class,
            total_bandwidth: axes[0],
            sum_se: axes[1],
            adc_dac_count: axes[2] as u32,
            subbands_accessible: axes[3] as u32,
            rf_frontend_count: axes[4] as u32,
        }
    }

    #[test]
    fn hardware_counts() {
        let plan = SubbandPlan::fr3_default();
        let specs = comparison_specs(&plan).unwrap();
        assert_eq!(specs[0].total_antennas(), 980);
        assert_eq!(specs[0].converter_budget, 196);
        assert_eq!(specs[1].converter_budget, 180);
        assert_eq!(specs[1].total_antennas(), 180);
        assert_eq!(specs[2].converter_budget, 196);
        assert_eq!(specs[3].converter_budget, 980);
        assert_eq!(specs[3].converter_budget, specs[3].total_antennas());
    }

    #[test]
    fn plan_must_have_five_subbands() {
        let plan = SubbandPlan::from_centers(&[7.0, 10.0], 0.5).unwrap();
        assert_eq!(comparison_specs(&plan), Err(ArchError::PlanSize(2)));
    }

    #[test]
    fn radar_normalizes_to_axis_max() {
        let m = [
            metrics(ArchitectureClass::FrequencyPartitioned, [1.0, 2.0, 196.0, 1.0, 980.0]),
            metrics(ArchitectureClass::AllAntennas, [2.0, 4.0, 980.0, 2.0, 980.0]),
        ];
        let r = radar_coordinates(&m).unwrap();
        assert_eq!(r[1], [5.0; 5]);
        assert_eq!(r[0], [2.5, 2.5, 1.0, 2.5, 5.0]);
    }

    #[test]
    fn radar_zero_axis_and_symmetry() {
        let a = metrics(ArchitectureClass::FrequencyAdaptive, [0.0, 3.0, 10.0, 0.0, 5.0]);
        let r = radar_coordinates(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(r[0], r[1]);
        assert_eq!(r[0][0], 0.0);
        assert_eq!(r[0][3], 0.0);
        assert_eq!(radar_coordinates(&[a]), Err(ArchError::TooFew(1)));
    }

    #[test]
    fn truncated_ladder_comparison_on_builtin_table() {
        let plan = SubbandPlan::fr3_default();
        let t = builtin_indoor();
        let mask = AvailabilityMask::only(5, &[0, 4]);
        let specs = comparison_specs(&plan).unwrap();
        let m: Vec<_> = specs
            .iter()
            .map(|s| evaluate(s, &plan, &t, &mask).unwrap())
            .collect();
        assert_eq!(m[0].subbands_accessible, 1);
        assert_eq!(m[0].total_bandwidth, 1.0);
        assert!((m[0].sum_se - 28.083).abs() < 1e-12);
        assert_eq!(m[1].subbands_accessible, 2);
        assert_eq!(m[2].subbands_accessible, 2);
        assert_eq!(m[3].subbands_accessible, 2);
        assert!((m[1].sum_se - (28.083 + 25.630)).abs() < 1e-9);
        assert!(m[2].sum_se >= m[1].sum_se && m[2].sum_se >= m[0].sum_se);
    }

    #[test]
    fn csv_outputs() {
        let m = [
            metrics(ArchitectureClass::FrequencyPartitioned, [1.0, 2.0, 196.0, 1.0, 980.0]),
            metrics(ArchitectureClass::AllAntennas, [2.0, 4.0, 980.0, 2.0, 980.0]),
        ];
        let raw = metrics_csv(&m);
        assert_eq!(
            raw.lines().next().unwrap(),
            "architecture,bandwidth,se,adc_dac,subbands,frontends"
        );
        assert_eq!(
            raw.lines().nth(1).unwrap(),
            "frequency-partitioned,1.000,2.000,196.000,1.000,980.000"
        );
        let radar = radar_csv(&m).unwrap();
        assert_eq!(radar.lines().nth(2).unwrap(), "all-antennas,5.000,5.000,5.000,5.000,5.000");
    }
}
