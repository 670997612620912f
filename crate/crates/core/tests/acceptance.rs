//! Exit criteria. Every criterion runs, prints one PASS/FAIL line, and the
//! suite fails if any criterion fails.

use std::collections::BTreeMap;

use mband_core::allocator::{brute_force, optimize, sweep, AllocationProblem, DEFAULT_ENUMERATION_CAP};
use mband_core::architectures::{comparison_specs, evaluate, REFERENCE_RADAR};
use mband_core::capacity::{build_se_table, mimo_se, SnrConfig};
use mband_core::channel::{fspl_db, parse_channels, synth_generate, write_channels, CMatrix, ScenarioConfig};
use mband_core::model::{
    validate_frontend_set, ArchitectureClass, AvailabilityMask, FrontendSet, SizeLadder, Subband,
    SubbandPlan,
};
use mband_core::table::{builtin_indoor, builtin_outdoor, SeTable};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ac1_indoor_optimum() -> Outcome {
    let t = builtin_indoor();
    let r = optimize(&AllocationProblem::unmasked(&t, 9));
    check((r.sum_se - 44.401).abs() <= 1e-3, format!("sum_se {}", r.sum_se))?;
    check(r.choice == [4, 2, 1, 1, 1], format!("choice {:?}", r.labels(&t)))?;
    Ok(format!("sum_se {:.3}, choice {:?}", r.sum_se, r.labels(&t)))
}

fn ac2_outdoor_optimum() -> Outcome {
    let t = builtin_outdoor();
    let r = optimize(&AllocationProblem::unmasked(&t, 9));
    check((r.sum_se - 41.628).abs() <= 1e-3, format!("sum_se {}", r.sum_se))?;
    check(r.choice == [2, 2, 2, 2, 1], format!("choice {:?}", r.labels(&t)))?;
    Ok(format!("sum_se {:.3}, choice {:?}", r.sum_se, r.labels(&t)))
}

fn ac3_restricted_mask() -> Outcome {
    let t = builtin_indoor();
    // independent enumeration over (n7, n24), n7 + n24 <= 9
    let (mut best, mut arg) = (f64::NEG_INFINITY, (0, 0));
    for a in 0..=9usize {
        for b in 0..=9 - a {
            let v = t.value(a, 0) + t.value(b, 4);
            if v > best {
                best = v;
                arg = (a, b);
            }
        }
    }
    check(arg == (5, 4), format!("enumeration picked {arg:?}"))?;
    check((best - 33.127).abs() <= 1e-3, format!("enumerated {best}"))?;
    let p = AllocationProblem::new(&t, 9, AvailabilityMask::only(5, &[0, 4]))
        .map_err(|e| e.to_string())?;
    let r = optimize(&p);
    check((r.sum_se - 33.127).abs() <= 1e-3, format!("sum_se {}", r.sum_se))?;
    check(r.choice == [5, 0, 0, 0, 4], format!("choice {:?}", r.choice))?;
    Ok(format!("sum_se {:.3}, 7 GHz 5x5 + 24 GHz 4x4", r.sum_se))
}

fn ac4_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let ladder = SizeLadder::linear(5);
    let start = std::time::Instant::now();
    for i in 0..200 {
        let values = (0..ladder.len())
            .map(|r| {
                (0..5)
                    .map(|_| if r == 0 { 0.0 } else { rng.random_range(0.0..30.0) })
                    .collect()
            })
            .collect();
        let t = SeTable::new(vec![7.0, 10.0, 14.0, 20.0, 24.0], ladder.clone(), values, "rand")
            .map_err(|e| e.to_string())?;
        let budget = rng.random_range(0..=12u32);
        let p = AllocationProblem::unmasked(&t, budget);
        let dp = optimize(&p);
        let bf = brute_force(&p, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
        check(dp.sum_se == bf.sum_se, format!("instance {i}: {} vs {}", dp.sum_se, bf.sum_se))?;
        check(dp.choice == bf.choice, format!("instance {i}: choices {:?} vs {:?}", dp.choice, bf.choice))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, format!("took {secs:.2} s"))?;
    Ok(format!("200/200 instances identical in {secs:.3} s"))
}

fn ac5_capacity_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut worst_unitary: f64 = 0.0;
    let random = |rng: &mut ChaCha8Rng, r: usize, c: usize| -> CMatrix {
        DMatrix::from_fn(r, c, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 2.0
        })
    };
    for _ in 0..100 {
        let (r, c) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let h = random(&mut rng, r, c);
        let rho = 10f64.powf(rng.random_range(-1.0..3.0));
        let snr = SnrConfig::new(rho).map_err(|e| e.to_string())?;
        let se = mimo_se(&h, snr).map_err(|e| e.to_string())?;
        let oracle: f64 = h
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .map(|s| (1.0 + rho * s * s).log2())
            .sum();
        worst = worst.max((se - oracle).abs() / oracle);
        let u = random(&mut rng, r, r).qr().q();
        let v = random(&mut rng, c, c).qr().q();
        let rotated = mimo_se(&(&u * &h * &v), snr).map_err(|e| e.to_string())?;
        worst_unitary = worst_unitary.max((rotated - se).abs() / se);
    }
    check(worst <= 1e-9, format!("singular-value mismatch {worst:e}"))?;
    check(worst_unitary <= 1e-9, format!("unitary mismatch {worst_unitary:e}"))?;
    Ok(format!("max rel err {worst:.1e} (svd), {worst_unitary:.1e} (unitary)"))
}

fn ac6_monotonicity() -> Outcome {
    let budgets: Vec<u32> = (0..=45).collect();
    for t in [builtin_indoor(), builtin_outdoor()] {
        let r = sweep(&t, &budgets, &AvailabilityMask::full(5)).map_err(|e| e.to_string())?;
        if let Some(w) = r.windows(2).position(|w| w[0].sum_se > w[1].sum_se) {
            return Err(format!("{}: sum_se decreases after budget {w}", t.provenance()));
        }
        let opt: Vec<f64> = (0u32..32)
            .map(|bits| {
                let flags: Vec<bool> = (0..5).map(|s| bits >> s & 1 == 1).collect();
                let p = AllocationProblem::new(&t, 9, AvailabilityMask::from_flags(&flags)).unwrap();
                optimize(&p).sum_se
            })
            .collect();
        for small in 0u32..32 {
            for big in 0u32..32 {
                if small & big == small && opt[small as usize] > opt[big as usize] {
                    return Err(format!(
                        "{}: mask {small:05b} beats superset {big:05b}",
                        t.provenance()
                    ));
                }
            }
        }
    }
    Ok("budgets 0..45 and 32 masks on both tables".into())
}

fn ac7_architecture_dominance() -> Outcome {
    let mut cfg = ScenarioConfig::outdoor();
    cfg.rx_antennas = 196;
    cfg.tx_antennas = 9;
    let channels = synth_generate(&cfg, 7).map_err(|e| e.to_string())?;
    let ladder = SizeLadder::square(14);
    let snr = SnrConfig::from_db(114.0).map_err(|e| e.to_string())?;
    let table = build_se_table(&channels, &ladder, &ladder.fixed_tx_sizes(9), snr)
        .map_err(|e| e.to_string())?;
    let plan = SubbandPlan::fr3_default();
    let mask = AvailabilityMask::only(5, &[0, 4]);
    let specs = comparison_specs(&plan).map_err(|e| e.to_string())?;
    let m: Vec<_> = specs
        .iter()
        .map(|s| evaluate(s, &plan, &table, &mask))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (part, integ, adapt) = (m[0].sum_se, m[1].sum_se, m[2].sum_se);
    check(adapt >= integ, format!("adaptive {adapt} < integrated {integ}"))?;
    check(adapt >= part, format!("adaptive {adapt} < partitioned {part}"))?;
    check(m[1].subbands_accessible == 2 && m[2].subbands_accessible == 2, "adaptive/integrated must use both subbands")?;
    check(m[0].subbands_accessible == 1, "partitioned uses one subband")?;

    let se_axis = |class| {
        REFERENCE_RADAR
            .iter()
            .find(|(c, _)| *c == class)
            .map(|(_, axes)| axes[1])
            .unwrap()
    };
    let ratio = se_axis(ArchitectureClass::FrequencyAdaptive)
        / se_axis(ArchitectureClass::FrequencyIntegrated);
    check(ratio > 1.18, format!("reference ratio {ratio}"))?;
    Ok(format!(
        "synthetic SE partitioned {part:.2}, integrated {integ:.2}, adaptive {adapt:.2}; reference ratio {ratio:.4}"
    ))
}

fn ac8_fractional_bandwidth() -> Outcome {
    let plan = SubbandPlan::new(vec![
        Subband::new(0, 7.0, 9.0).map_err(|e| e.to_string())?,
        Subband::new(1, 9.0, 10.0).map_err(|e| e.to_string())?,
    ])
    .map_err(|e| e.to_string())?;
    let narrow = FrontendSet::new(0, 8, [0]).map_err(|e| e.to_string())?;
    let wide = FrontendSet::new(1, 8, [0, 1]).map_err(|e| e.to_string())?;
    let a = validate_frontend_set(&narrow, &plan).map_err(|e| e.to_string())?;
    let b = validate_frontend_set(&wide, &plan).map_err(|e| e.to_string())?;
    check(a.is_ok() && a.fbw == 0.25, format!("7-9 GHz: {a:?}"))?;
    check(!b.is_ok() && (b.fbw - 3.0 / 8.5).abs() < 1e-12, format!("7-10 GHz: {b:?}"))?;
    Ok(format!("7-9 GHz fbw {:.3} accepted, 7-10 GHz fbw {:.3} rejected", a.fbw, b.fbw))
}

fn ac9_physics_sanity() -> Outcome {
    let six = 20.0 * 2f64.log10();
    for &(d, f) in &[(1.0, 7.0), (10.0, 10.0), (123.4, 14.0), (500.0, 24.0)] {
        let diff = fspl_db(d, 2.0 * f).unwrap() - fspl_db(d, f).unwrap();
        check((diff - six).abs() <= 1e-9, format!("octave law off by {}", diff - six))?;
    }
    let cfg = ScenarioConfig::indoor();
    let write = |seed| {
        let mut buf = Vec::new();
        write_channels(&synth_generate(&cfg, seed).unwrap(), &mut buf).unwrap();
        buf
    };
    check(write(17) == write(17), "generator output differs between runs")?;
    Ok("octave law +6.0206 dB, generator bit-identical".into())
}

/// Reference spectral-efficiency rows as typeset, one line per MIMO size.
const INDOOR_TEXT: &str = "\
1x1 & 6.525 & 6.553 & 6.527 & 6.520 & 6.451
2x2 & 9.145 & 9.286 & 8.969 & 9.202 & 9.126
3x3 & 12.252 & 11.917 & 11.427 & 11.962 & 11.733
4x4 & 15.617 & 15.299 & 15.045 & 15.348 & 15.141
5x5 & 17.986 & 17.460 & 17.126 & 17.359 & 17.208
6x6 & 20.486 & 19.604 & 19.278 & 19.406 & 19.182
7x7 & 23.606 & 22.576 & 22.247 & 22.579 & 21.980
8x8 & 25.738 & 24.568 & 24.125 & 24.459 & 23.813
9x9 & 28.083 & 26.606 & 26.150 & 26.394 & 25.630";

const OUTDOOR_TEXT: &str = "\
1x1 & 6.302 & 6.720 & 6.258 & 6.514 & 6.553
2x2 & 8.737 & 9.152 & 8.537 & 8.649 & 8.677
3x3 & 10.405 & 10.882 & 10.250 & 10.184 & 10.302
4x4 & 12.377 & 13.339 & 13.004 & 13.279 & 12.769
5x5 & 13.587 & 14.635 & 14.438 & 14.815 & 14.170
6x6 & 14.743 & 15.934 & 15.723 & 16.036 & 15.340
7x7 & 16.354 & 17.956 & 17.696 & 18.056 & 17.434
8x8 & 17.373 & 19.070 & 18.878 & 19.336 & 18.645
9x9 & 18.422 & 20.200 & 19.983 & 20.446 & 19.690";

fn ac10_round_trips() -> Outcome {
    let mut checked = 0;
    for (t, text) in [(builtin_indoor(), INDOOR_TEXT), (builtin_outdoor(), OUTDOOR_TEXT)] {
        for (n, line) in text.lines().enumerate() {
            let cells: Vec<f64> = line.split('&').skip(1).map(|c| c.trim().parse().unwrap()).collect();
            for (s, v) in cells.iter().enumerate() {
                check(t.value(n + 1, s) == *v, format!("{} {}x{} col {s}", t.provenance(), n + 1, n + 1))?;
                checked += 1;
            }
        }
        let back = SeTable::from_csv(&t.to_csv(), "csv").map_err(|e| e.to_string())?;
        check(back.values() == t.values() && back.subband_centers() == t.subband_centers(), "table CSV round trip")?;
        check(back.to_csv() == t.to_csv(), "table CSV not byte-stable")?;
    }
    check(checked == 90, format!("{checked} values checked"))?;

    let fixture = include_str!("fixtures/three_users.chan");
    let set = parse_channels(fixture).map_err(|e| e.to_string())?;
    let mut buf = Vec::new();
    write_channels(&set, &mut buf).map_err(|e| e.to_string())?;
    check(buf == fixture.as_bytes(), "channel fixture not reproduced")?;
    Ok("90 table values exact; CSV and channel files round-trip".into())
}

#[test]
fn acceptance_suite() {
    let criteria: BTreeMap<u32, Criterion> = BTreeMap::from([
        (1, ("indoor optimum 44.401", ac1_indoor_optimum as fn() -> Outcome)),
        (2, ("outdoor optimum 41.628", ac2_outdoor_optimum)),
        (3, ("restricted-mask optimum 33.127", ac3_restricted_mask)),
        (4, ("DP equals brute force", ac4_oracle_equivalence)),
        (5, ("capacity identities", ac5_capacity_identity)),
        (6, ("monotonicity", ac6_monotonicity)),
        (7, ("architecture dominance", ac7_architecture_dominance)),
        (8, ("fractional bandwidth", ac8_fractional_bandwidth)),
        (9, ("physics sanity", ac9_physics_sanity)),
        (10, ("round trips", ac10_round_trips)),
    ]);
    let mut failures = Vec::new();
    for (id, (name, run)) in &criteria {
        match run() {
            Ok(detail) => println!("PASS AC{id:<2} {name}: {detail}"),
            Err(why) => {
                println!("FAIL AC{id:<2} {name}: {why}");
                failures.push(*id);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
