use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{fspl_db, CMatrix, ChannelError, ChannelRecord, ChannelSet, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Indoor,
    Outdoor,
    Custom,
}

/// Scene parameters for the clustered multipath generator. Both link ends
/// are half-wavelength uniform linear arrays at every frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub num_users: u32,
    pub rx_antennas: usize,
    pub tx_antennas: usize,
    pub frequencies_ghz: Vec<f64>,
    pub cluster_count: u32,
    #[serde(default = "default_rays")]
    pub rays_per_cluster: u32,
    /// LOS-to-scattered power ratio in dB; `inf` is pure LOS, `-inf` pure NLOS.
    pub rician_k_db: f64,
    pub distance_range_m: (f64, f64),
    /// Standard deviation of ray angles around their cluster center.
    pub angular_spread_deg: f64,
}

fn default_rays() -> u32 {
    10
}

impl ScenarioConfig {
    /// Rich scattering, weak LOS, short links.
    pub fn indoor() -> Self {
        Self {
            kind: ScenarioKind::Indoor,
            num_users: 100,
            rx_antennas: 9,
            tx_antennas: 9,
            frequencies_ghz: vec![7.0, 10.0, 14.0, 20.0, 24.0],
            cluster_count: 8,
            rays_per_cluster: default_rays(),
            rician_k_db: -3.0,
            distance_range_m: (3.0, 25.0),
            angular_spread_deg: 10.0,
        }
    }

    /// Few clusters, strong LOS, long links.
    pub fn outdoor() -> Self {
        Self {
            kind: ScenarioKind::Outdoor,
            num_users: 20,
            rx_antennas: 9,
            tx_antennas: 9,
            frequencies_ghz: vec![7.0, 10.0, 14.0, 20.0, 24.0],
            cluster_count: 3,
            rays_per_cluster: default_rays(),
            rician_k_db: 6.0,
            distance_range_m: (50.0, 300.0),
            angular_spread_deg: 4.0,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let fail = |field, reason: &str| {
            Err(ChannelError::Config {
                field,
                reason: reason.to_string(),
            })
        };
        if self.num_users == 0 {
            return fail("num_users", "must be positive");
        }
        if self.rx_antennas == 0 {
            return fail("rx_antennas", "must be positive");
        }
        if self.tx_antennas == 0 {
            return fail("tx_antennas", "must be positive");
        }
        if self.frequencies_ghz.is_empty() {
            return fail("frequencies_ghz", "must not be empty");
        }
        if self
            .frequencies_ghz
            .iter()
            .any(|f| !(f.is_finite() && *f > 0.0))
        {
            return fail("frequencies_ghz", "must be positive and finite");
        }
        let mut sorted = self.frequencies_ghz.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return fail("frequencies_ghz", "must be distinct");
        }
        if self.cluster_count == 0 {
            return fail("cluster_count", "must be at least 1");
        }
        if self.rays_per_cluster == 0 {
            return fail("rays_per_cluster", "must be at least 1");
        }
        if self.rician_k_db.is_nan() {
            return fail("rician_k_db", "must not be NaN");
        }
        let (lo, hi) = self.distance_range_m;
        if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
            return fail("distance_range_m", "need 0 < min <= max");
        }
        if !(self.angular_spread_deg >= 0.0 && self.angular_spread_deg.is_finite()) {
            return fail("angular_spread_deg", "must be non-negative and finite");
        }
        Ok(())
    }

    /// `(los, nlos)` amplitude weights with `los^2 + nlos^2 = 1`.
    fn rician_weights(&self) -> (f64, f64) {
        let k = 10f64.powf(self.rician_k_db / 10.0);
        if k.is_infinite() {
            (1.0, 0.0)
        } else {
            ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
        }
    }
}

/// Per-user seed: SplitMix64 finalizer applied to `seed` mixed with the
/// finalized user id. Users are generated independently from their own
/// streams, so any evaluation order yields the same set.
pub fn sub_seed(seed: u64, user_id: u32) -> u64 {
    splitmix64(seed ^ splitmix64(user_id as u64))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Ray {
    aoa: f64,
    aod: f64,
    power: f64,
}

struct UserGeometry {
    distance_m: f64,
    los_aoa: f64,
    los_aod: f64,
    rays: Vec<Ray>,
}

fn draw_geometry(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> UserGeometry {
    let (lo, hi) = cfg.distance_range_m;
    let distance_m = lo + (hi - lo) * rng.random::<f64>();
    let los_aoa = rng.random_range(-PI / 3.0..PI / 3.0);
    let los_aod = rng.random_range(-PI / 3.0..PI / 3.0);

    let spread = cfg.angular_spread_deg.to_radians();
    let mut powers: Vec<f64> = (0..cfg.cluster_count)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = powers.iter().sum();
    powers.iter_mut().for_each(|p| *p /= total);

    let per_ray = 1.0 / cfg.rays_per_cluster as f64;
    let mut rays = Vec::with_capacity((cfg.cluster_count * cfg.rays_per_cluster) as usize);
    for p in powers {
        let aoa_c = rng.random_range(-PI / 2.0..PI / 2.0);
        let aod_c = rng.random_range(-PI / 2.0..PI / 2.0);
        for _ in 0..cfg.rays_per_cluster {
            let da: f64 = rng.sample(StandardNormal);
            let dd: f64 = rng.sample(StandardNormal);
            rays.push(Ray {
                aoa: aoa_c + spread * da,
                aod: aod_c + spread * dd,
                power: p * per_ray,
            });
        }
    }
    UserGeometry {
        distance_m,
        los_aoa,
        los_aod,
        rays,
    }
}

/// Half-wavelength ULA response `exp(j pi n sin(theta))`.
fn steering(n: usize, theta: f64) -> Vec<Complex64> {
    let k = PI * theta.sin();
    (0..n).map(|i| Complex64::from_polar(1.0, k * i as f64)).collect()
}

fn add_outer(h: &mut CMatrix, gain: Complex64, rx: &[Complex64], tx: &[Complex64]) {
    for (i, a) in rx.iter().enumerate() {
        let ga = gain * a;
        for (j, b) in tx.iter().enumerate() {
            h[(i, j)] += ga * b.conj();
        }
    }
}

fn user_channel(
    cfg: &ScenarioConfig,
    geo: &UserGeometry,
    f_ghz: f64,
    rng: &mut ChaCha8Rng,
) -> CMatrix {
    let (rx, tx) = (cfg.rx_antennas, cfg.tx_antennas);
    let (los_w, nlos_w) = cfg.rician_weights();
    let amplitude = 10f64.powf(-fspl_db(geo.distance_m, f_ghz).expect("validated") / 20.0);

    let mut nlos = CMatrix::zeros(rx, tx);
    for ray in &geo.rays {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let g = Complex64::new(re, im) * (ray.power / 2.0).sqrt();
        add_outer(&mut nlos, g, &steering(rx, ray.aoa), &steering(tx, ray.aod));
    }

    let mut h = CMatrix::zeros(rx, tx);
    if los_w > 0.0 {
        // carrier phase of the direct path, reduced before scaling by 2 pi
        let cycles = geo.distance_m * f_ghz * 1e9 / SPEED_OF_LIGHT;
        let phase = -2.0 * PI * cycles.fract();
        add_outer(
            &mut h,
            Complex64::from_polar(los_w, phase),
            &steering(rx, geo.los_aoa),
            &steering(tx, geo.los_aod),
        );
    }
    if nlos_w > 0.0 {
        h += nlos * Complex64::from(nlos_w);
    }
    h * Complex64::from(amplitude)
}

/// Generates one record per (user, frequency), user-major in config
/// frequency order. Output depends only on `(cfg, seed)`.
pub fn synth_generate(cfg: &ScenarioConfig, seed: u64) -> Result<ChannelSet, ChannelError> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.num_users as usize * cfg.frequencies_ghz.len());
    for user in 0..cfg.num_users {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, user));
        let geo = draw_geometry(cfg, &mut rng);
        for &f in &cfg.frequencies_ghz {
            let h = user_channel(cfg, &geo, f, &mut rng);
            records.push(ChannelRecord::new(user, f, h)?);
        }
    }
    let label = match cfg.kind {
        ScenarioKind::Indoor => "synthetic:indoor",
        ScenarioKind::Outdoor => "synthetic:outdoor",
        ScenarioKind::Custom => "synthetic:custom",
    };
    ChannelSet::new(records, label, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn siso(k_db: f64, users: u32, d: f64) -> ScenarioConfig {
        ScenarioConfig {
            kind: ScenarioKind::Custom,
            num_users: users,
            rx_antennas: 1,
            tx_antennas: 1,
            frequencies_ghz: vec![7.0],
            cluster_count: 1,
            rays_per_cluster: 10,
            rician_k_db: k_db,
            distance_range_m: (d, d),
            angular_spread_deg: 5.0,
        }
    }

    #[test]
    fn pure_los_magnitude_is_free_space() {
        let cfg = siso(f64::INFINITY, 4, 12.0);
        let set = synth_generate(&cfg, 9).unwrap();
        let expected = 10f64.powf(-fspl_db(12.0, 7.0).unwrap() / 20.0);
        for r in set.records() {
            let got = r.matrix[(0, 0)].norm();
            assert!((got - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn nlos_power_matches_configured_moment() {
        let cfg = siso(f64::NEG_INFINITY, 10_000, 20.0);
        let set = synth_generate(&cfg, 2024).unwrap();
        let mean: f64 = set
            .records()
            .iter()
            .map(|r| r.matrix[(0, 0)].norm_sqr())
            .sum::<f64>()
            / set.len() as f64;
        let configured = 10f64.powf(-fspl_db(20.0, 7.0).unwrap() / 10.0);
        assert!(
            ((mean - configured) / configured).abs() < 0.02,
            "mean {mean:e} vs {configured:e}"
        );
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = ScenarioConfig::indoor();
        let a = synth_generate(&cfg, 5).unwrap();
        let b = synth_generate(&cfg, 5).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(&cfg, 6).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.len(), 500);
    }

    #[test]
    fn user_stream_is_independent_of_user_count() {
        let mut cfg = ScenarioConfig::outdoor();
        let all = synth_generate(&cfg, 77).unwrap();
        cfg.num_users = 3;
        let few = synth_generate(&cfg, 77).unwrap();
        assert_eq!(&all.records()[..few.len()], few.records());
    }

    #[test]
    fn presets_differ_as_documented() {
        let (i, o) = (ScenarioConfig::indoor(), ScenarioConfig::outdoor());
        assert!(i.cluster_count > o.cluster_count);
        assert!(i.rician_k_db < o.rician_k_db);
        assert!(i.validate().is_ok() && o.validate().is_ok());
    }

    #[test]
    fn invalid_config_names_field() {
        let mut cfg = ScenarioConfig::indoor();
        cfg.distance_range_m = (0.0, 5.0);
        match synth_generate(&cfg, 1) {
            Err(ChannelError::Config { field, .. }) => assert_eq!(field, "distance_range_m"),
            other => panic!("{other:?}"),
        }
        let mut cfg = ScenarioConfig::indoor();
        cfg.cluster_count = 0;
        assert!(matches!(
            cfg.validate(),
            Err(ChannelError::Config {
                field: "cluster_count",
                ..
            })
        ));
    }

    #[test]
    fn sub_seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<_> = (0..1000).map(|u| sub_seed(42, u)).collect();
        assert_eq!(seeds.len(), 1000);
    }
}
