//! Scenario configuration, seeded channel generation and the bounded
//! CSI-error model for the ST→PR links.

use crate::error::{config_err, domain_err, Result};
use crate::linalg::{CVec, Cx};
use crate::rng::{complex_normal, complex_normal_vec, substream};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Converts a power in dBm to milliwatts. Noise variances are expressed in
/// the same unit (1.0 = 1 mW).
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Per-receiver AWGN variances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseVariances {
    /// One per primary receiver.
    pub pr: Vec<f64>,
    /// One per eavesdropper of the primary system.
    pub primary_eve: Vec<f64>,
    /// `sr[g][m]` for secondary receiver `m` of group `g`.
    pub sr: Vec<Vec<f64>>,
    /// `secondary_eve[g][k]` for eavesdropper `k` of group `g`.
    pub secondary_eve: Vec<Vec<f64>>,
}

impl NoiseVariances {
    pub fn uniform(cfg_shape: &Shape, value: f64) -> Self {
        Self {
            pr: vec![value; cfg_shape.n_prs],
            primary_eve: vec![value; cfg_shape.n_primary_eves],
            sr: cfg_shape.srs_per_group.iter().map(|&m| vec![value; m]).collect(),
            secondary_eve: cfg_shape.eves_per_group.iter().map(|&k| vec![value; k]).collect(),
        }
    }

    /// Smallest noise variance among the primary eavesdroppers (the least
    /// noisy Eve is the binding one in the outage bounds).
    pub fn primary_eve_min(&self) -> f64 {
        self.primary_eve.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn secondary_eve_min(&self, g: usize) -> f64 {
        self.secondary_eve[g].iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Dimensions only; used to size the per-receiver vectors.
#[derive(Clone, Debug)]
pub struct Shape {
    pub n_prs: usize,
    pub n_primary_eves: usize,
    pub srs_per_group: Vec<usize>,
    pub eves_per_group: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutageTargets {
    /// ε_g, one per group.
    pub groups: Vec<f64>,
    /// ε̃ for the primary eavesdroppers.
    pub primary: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaSettings {
    pub max_iterations: usize,
    pub convergence_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    /// Eavesdropper channel draws per outage estimate.
    pub outage_samples: usize,
    /// Error-ball samples per worst-case primary SINR evaluation.
    pub worst_case_samples: usize,
}

/// Everything that defines one scenario. Powers are linear (mW).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_antennas: usize,
    pub n_groups: usize,
    pub srs_per_group: Vec<usize>,
    pub n_prs: usize,
    pub eves_per_group: Vec<usize>,
    pub n_primary_eves: usize,
    pub pt_power: f64,
    pub st_power_budget: f64,
    pub noise_variances: NoiseVariances,
    /// Minimum primary secrecy rate per PR, bits/s/Hz.
    pub min_primary_secrecy: Vec<f64>,
    /// δ̄²_l = δ²_l / ‖f_l‖² per PR.
    pub normalized_error: Vec<f64>,
    pub outage_targets: OutageTargets,
    pub sca: ScaSettings,
    pub mc: McSettings,
    pub seed: u64,
}

impl SystemConfig {
    /// The evaluation setup: N = 8, G = 2, M_g = 2, L = 2, K_p = K_g = 2,
    /// P_p = 20 dBm, unit noise, δ̄² = 5 %, ε = 0.99, R̄_p = 1 bps/Hz and
    /// P_s = 20 dBm.
    pub fn paper_defaults() -> Self {
        let shape = Shape {
            n_prs: 2,
            n_primary_eves: 2,
            srs_per_group: vec![2, 2],
            eves_per_group: vec![2, 2],
        };
        Self {
            n_antennas: 8,
            n_groups: 2,
            srs_per_group: shape.srs_per_group.clone(),
            n_prs: shape.n_prs,
            eves_per_group: shape.eves_per_group.clone(),
            n_primary_eves: shape.n_primary_eves,
            pt_power: dbm_to_mw(20.0),
            st_power_budget: dbm_to_mw(20.0),
            noise_variances: NoiseVariances::uniform(&shape, 1.0),
            min_primary_secrecy: vec![1.0; 2],
            normalized_error: vec![0.05; 2],
            outage_targets: OutageTargets { groups: vec![0.99; 2], primary: 0.99 },
            sca: ScaSettings { max_iterations: 50, convergence_tolerance: 1e-4 },
            mc: McSettings { outage_samples: 100_000, worst_case_samples: 2_000 },
            seed: 1,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        validate_config(cfg)
    }

    pub fn with_antennas(mut self, n: usize) -> Self {
        self.n_antennas = n;
        self
    }

    pub fn with_st_power_dbm(mut self, dbm: f64) -> Self {
        self.st_power_budget = dbm_to_mw(dbm);
        self
    }

    /// Sets the same R̄_p for every PR.
    pub fn with_min_primary_secrecy(mut self, rate: f64) -> Self {
        self.min_primary_secrecy = vec![rate; self.n_prs];
        self
    }

    /// Sets the same δ̄² for every PR.
    pub fn with_normalized_error(mut self, d2: f64) -> Self {
        self.normalized_error = vec![d2; self.n_prs];
        self
    }

    pub fn with_outage_targets(mut self, eps_groups: f64, eps_primary: f64) -> Self {
        self.outage_targets = OutageTargets { groups: vec![eps_groups; self.n_groups], primary: eps_primary };
        self
    }

    /// Resizes the PR set to `l`, replicating the first PR's settings.
    pub fn with_prs(mut self, l: usize) -> Self {
        let first = |v: &[f64], d: f64| v.first().copied().unwrap_or(d);
        self.n_prs = l;
        self.noise_variances.pr = vec![first(&self.noise_variances.pr, 1.0); l];
        self.min_primary_secrecy = vec![first(&self.min_primary_secrecy, 1.0); l];
        self.normalized_error = vec![first(&self.normalized_error, 0.05); l];
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_srs(&self) -> usize {
        self.srs_per_group.iter().sum()
    }

    /// Iterates over `(group, sr)` pairs.
    pub fn srs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.srs_per_group.iter().enumerate().flat_map(|(g, &m)| (0..m).map(move |i| (g, i)))
    }
}

fn in_open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Returns `cfg` unchanged when every invariant holds; otherwise reports the
/// first violation.
pub fn validate_config(cfg: SystemConfig) -> Result<SystemConfig> {
    if cfg.n_antennas == 0 {
        return config_err("n_antennas must be positive");
    }
    if cfg.n_groups == 0 {
        return config_err("n_groups must be positive");
    }
    if cfg.n_prs == 0 {
        return config_err("n_prs must be positive");
    }
    if cfg.n_primary_eves == 0 {
        return config_err("n_primary_eves must be positive");
    }
    if cfg.srs_per_group.len() != cfg.n_groups {
        return config_err("srs_per_group length must equal n_groups");
    }
    if cfg.srs_per_group.iter().any(|&m| m == 0) {
        return config_err("srs_per_group entries must be positive");
    }
    if cfg.eves_per_group.len() != cfg.n_groups {
        return config_err("eves_per_group length must equal n_groups");
    }
    if cfg.eves_per_group.iter().any(|&k| k == 0) {
        return config_err("eves_per_group entries must be positive");
    }
    if !(cfg.pt_power > 0.0 && cfg.pt_power.is_finite()) {
        return config_err("pt_power must be positive");
    }
    if !(cfg.st_power_budget > 0.0 && cfg.st_power_budget.is_finite()) {
        return config_err("st_power_budget must be positive");
    }
    let nv = &cfg.noise_variances;
    if nv.pr.len() != cfg.n_prs || nv.primary_eve.len() != cfg.n_primary_eves {
        return config_err("noise_variances shape does not match the primary system");
    }
    if nv.sr.len() != cfg.n_groups
        || nv.sr.iter().zip(&cfg.srs_per_group).any(|(v, &m)| v.len() != m)
        || nv.secondary_eve.len() != cfg.n_groups
        || nv.secondary_eve.iter().zip(&cfg.eves_per_group).any(|(v, &k)| v.len() != k)
    {
        return config_err("noise_variances shape does not match the secondary system");
    }
    let all_noise = nv
        .pr
        .iter()
        .chain(&nv.primary_eve)
        .chain(nv.sr.iter().flatten())
        .chain(nv.secondary_eve.iter().flatten());
    for &s in all_noise {
        if !(s > 0.0 && s.is_finite()) {
            return config_err("noise variances must be positive");
        }
    }
    if cfg.min_primary_secrecy.len() != cfg.n_prs {
        return config_err("min_primary_secrecy length must equal n_prs");
    }
    if cfg.min_primary_secrecy.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return config_err("min_primary_secrecy must be positive");
    }
    if cfg.normalized_error.len() != cfg.n_prs {
        return config_err("normalized_error length must equal n_prs");
    }
    if cfg.normalized_error.iter().any(|&d| !(0.0..1.0).contains(&d)) {
        return config_err("normalized_error out of [0,1)");
    }
    if cfg.outage_targets.groups.len() != cfg.n_groups {
        return config_err("outage_targets.groups length must equal n_groups");
    }
    if cfg.outage_targets.groups.iter().any(|&e| !in_open_unit(e)) {
        return config_err("epsilon_g out of (0,1)");
    }
    if !in_open_unit(cfg.outage_targets.primary) {
        return config_err("epsilon_tilde out of (0,1)");
    }
    if cfg.sca.max_iterations == 0 {
        return config_err("sca.max_iterations must be positive");
    }
    if !(cfg.sca.convergence_tolerance > 0.0) {
        return config_err("sca.convergence_tolerance must be positive");
    }
    if cfg.mc.outage_samples == 0 || cfg.mc.worst_case_samples == 0 {
        return config_err("mc sample counts must be positive");
    }
    Ok(cfg)
}

/// One realization of every channel in the system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    /// PT → PR l.
    pub h_pr: Vec<Cx>,
    /// PT → primary Eve k.
    pub g_eve_p: Vec<Cx>,
    /// ST → PR l, true channel.
    pub f_st_pr_true: Vec<CVec>,
    /// ST → PR l, estimate available at the ST.
    pub f_st_pr_est: Vec<CVec>,
    /// δ_l, radius of the estimation-error ball.
    pub f_err_radius: Vec<f64>,
    /// ST → primary Eve k.
    pub f_st_evep: Vec<CVec>,
    /// ST → SR m of group g, `[g][m]`.
    pub h_sr: Vec<Vec<CVec>>,
    /// ST → Eve k of group g, `[g][k]`.
    pub g_eve_s: Vec<Vec<CVec>>,
    /// PT → SR m of group g.
    pub f_pt_sr: Vec<Vec<Cx>>,
    /// PT → Eve k of group g.
    pub f_pt_eves: Vec<Vec<Cx>>,
}

impl ChannelSet {
    /// A copy in which the estimated PR channels are taken as exact
    /// (δ_l = 0, f_l = f̂_l). The non-robust baseline designs against this.
    pub fn presumed_exact(&self) -> Self {
        let mut out = self.clone();
        out.f_st_pr_true = self.f_st_pr_est.clone();
        out.f_err_radius = vec![0.0; self.f_err_radius.len()];
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorSample {
    pub delta: CVec,
}

fn pair_index(a: usize, b: usize) -> u64 {
    ((a as u64) << 32) | b as u64
}

/// Scales `v` down onto the closed ball of `radius` if rounding pushed it out.
pub(crate) fn clamp_to_ball(mut v: CVec, radius: f64) -> CVec {
    for _ in 0..4 {
        let n = v.norm();
        if n <= radius {
            return v;
        }
        v *= Cx::from(radius / n * (1.0 - 4.0 * f64::EPSILON));
    }
    v
}

/// A point drawn uniformly from the complex ball of `radius` in C^dim.
fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> CVec {
    let dir = unit_direction(rng, dim);
    let u: f64 = rng.random::<f64>();
    let rho = radius * u.powf(1.0 / (2.0 * dim as f64));
    clamp_to_ball(dir * Cx::from(rho), radius)
}

fn unit_direction<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Cx::new(re, im)
        });
        let n = v.norm();
        if n > 1e-300 {
            return v / Cx::from(n);
        }
    }
}

/// Draws a full channel realization.
///
/// Every channel vector is read entry by entry from its own substream, so
/// the first N antennas of a draw with more antennas match a draw with N
/// antennas. The PR estimation error is drawn after the true channel and the
/// estimate is defined as f̂_l = f_l − Δf_l.
pub fn draw_channels(cfg: &SystemConfig, seed: u64) -> Result<ChannelSet> {
    let n = cfg.n_antennas;
    let scalar = |label: &str, idx: u64| complex_normal(&mut substream(seed, label, idx));
    let vector = |label: &str, idx: u64| complex_normal_vec(&mut substream(seed, label, idx), n);

    let h_pr = (0..cfg.n_prs).map(|l| scalar("h_pr", l as u64)).collect();
    let g_eve_p = (0..cfg.n_primary_eves).map(|k| scalar("g_eve_p", k as u64)).collect();
    let f_st_pr_true: Vec<CVec> = (0..cfg.n_prs).map(|l| vector("f_st_pr", l as u64)).collect();

    let mut f_st_pr_est = Vec::with_capacity(cfg.n_prs);
    let mut f_err_radius = Vec::with_capacity(cfg.n_prs);
    for (l, f) in f_st_pr_true.iter().enumerate() {
        let d2 = cfg.normalized_error[l];
        if d2 == 0.0 {
            f_st_pr_est.push(f.clone());
            f_err_radius.push(0.0);
            continue;
        }
        let radius = (d2 * f.norm_squared()).sqrt();
        let mut rng = substream(seed, "f_err", l as u64);
        let mut delta = uniform_in_ball(&mut rng, n, radius);
        // f − (f − Δ) can differ from Δ by rounding; shrink until membership
        // holds for the stored pair.
        let mut est = f - &delta;
        while (f - &est).norm() > radius {
            delta *= Cx::from(1.0 - 1e-12);
            est = f - &delta;
        }
        f_st_pr_est.push(est);
        f_err_radius.push(radius);
    }

    let f_st_evep = (0..cfg.n_primary_eves).map(|k| vector("f_st_evep", k as u64)).collect();
    let per_group_vec = |label: &str, counts: &[usize]| -> Vec<Vec<CVec>> {
        counts
            .iter()
            .enumerate()
            .map(|(g, &m)| (0..m).map(|i| vector(label, pair_index(g, i))).collect())
            .collect()
    };
    let per_group_scalar = |label: &str, counts: &[usize]| -> Vec<Vec<Cx>> {
        counts
            .iter()
            .enumerate()
            .map(|(g, &m)| (0..m).map(|i| scalar(label, pair_index(g, i))).collect())
            .collect()
    };

    Ok(ChannelSet {
        h_pr,
        g_eve_p,
        f_st_pr_true,
        f_st_pr_est,
        f_err_radius,
        f_st_evep,
        h_sr: per_group_vec("h_sr", &cfg.srs_per_group),
        g_eve_s: per_group_vec("g_eve_s", &cfg.eves_per_group),
        f_pt_sr: per_group_scalar("f_pt_sr", &cfg.srs_per_group),
        f_pt_eves: per_group_scalar("f_pt_eves", &cfg.eves_per_group),
    })
}

/// Samples `count` error vectors from the ball of `radius` in C^dim.
///
/// Samples come in antithetic pairs (Δ, −Δ). Every other pair lies exactly
/// on the sphere, since the worst case of a convex quadratic over the ball is
/// attained there; the remaining pairs are uniform inside.
pub fn sample_error_ball(dim: usize, radius: f64, count: usize, seed: u64) -> Result<Vec<ErrorSample>> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return domain_err("radius must be a finite nonnegative number");
    }
    if count == 0 {
        return domain_err("count must be positive");
    }
    if dim == 0 {
        return domain_err("dimension must be positive");
    }
    let mut out = Vec::with_capacity(count);
    let mut pair = 0u64;
    while out.len() < count {
        let mut rng = substream(seed, "error_ball", pair);
        let dir = unit_direction(&mut rng, dim);
        let rho = if pair % 2 == 0 {
            radius
        } else {
            radius * rng.random::<f64>().powf(1.0 / (2.0 * dim as f64))
        };
        let v = clamp_to_ball(dir * Cx::from(rho), radius);
        out.push(ErrorSample { delta: -v.clone() });
        if out.len() < count {
            out.push(ErrorSample { delta: v });
        }
        pair += 1;
    }
    // Keep the (Δ, −Δ) order stable: first element of each pair is −Δ.
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_defaults_are_valid() {
        let cfg = SystemConfig::paper_defaults();
        assert_eq!(cfg.n_antennas, 8);
        assert!((cfg.pt_power - 100.0).abs() < 1e-9);
        assert!(validate_config(cfg).is_ok());
    }

    #[test]
    fn rejects_epsilon_tilde_one() {
        let mut cfg = SystemConfig::paper_defaults();
        cfg.outage_targets.primary = 1.0;
        let err = validate_config(cfg).unwrap_err();
        assert_eq!(err.to_string(), "epsilon_tilde out of (0,1)");
    }

    #[test]
    fn rejects_zero_antennas() {
        let cfg = SystemConfig::paper_defaults().with_antennas(0);
        let err = validate_config(cfg).unwrap_err();
        assert_eq!(err.to_string(), "n_antennas must be positive");
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        let mut cfg = SystemConfig::paper_defaults();
        cfg.noise_variances.pr[0] = 0.0;
        assert!(validate_config(cfg).is_err());
        let mut cfg = SystemConfig::paper_defaults();
        cfg.normalized_error[1] = 1.0;
        assert!(validate_config(cfg).is_err());
        let mut cfg = SystemConfig::paper_defaults();
        cfg.min_primary_secrecy[0] = 0.0;
        assert!(validate_config(cfg).is_err());
    }

    #[test]
    fn draws_are_deterministic() {
        let cfg = SystemConfig::paper_defaults();
        let a = draw_channels(&cfg, 42).unwrap();
        let b = draw_channels(&cfg, 42).unwrap();
        assert_eq!(a, b);
        let c = draw_channels(&cfg, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn perfect_csi_gives_exact_estimate() {
        let cfg = SystemConfig::paper_defaults().with_normalized_error(0.0);
        let ch = draw_channels(&cfg, 5).unwrap();
        for l in 0..cfg.n_prs {
            assert_eq!(ch.f_st_pr_est[l], ch.f_st_pr_true[l]);
            assert_eq!(ch.f_err_radius[l], 0.0);
        }
    }

    #[test]
    fn error_radius_follows_normalized_error() {
        let cfg = SystemConfig::paper_defaults();
        let mut acc = 0.0;
        let draws = 10_000;
        for s in 0..draws {
            let ch = draw_channels(&cfg, s).unwrap();
            for l in 0..cfg.n_prs {
                let f = &ch.f_st_pr_true[l];
                let d = ch.f_err_radius[l];
                assert!((f - &ch.f_st_pr_est[l]).norm() <= d);
                acc += d * d / f.norm_squared();
            }
        }
        let mean = acc / (draws as f64 * cfg.n_prs as f64);
        assert!((mean - 0.05).abs() < 1e-12, "{mean}");
    }

    #[test]
    fn antenna_prefix_is_stable() {
        let small = draw_channels(&SystemConfig::paper_defaults().with_antennas(4), 9).unwrap();
        let large = draw_channels(&SystemConfig::paper_defaults().with_antennas(8), 9).unwrap();
        for l in 0..2 {
            for i in 0..4 {
                assert_eq!(small.f_st_pr_true[l][i], large.f_st_pr_true[l][i]);
            }
        }
        assert_eq!(small.h_sr[1][1][3], large.h_sr[1][1][3]);
    }

    #[test]
    fn zero_radius_ball_is_origin() {
        let s = sample_error_ball(8, 0.0, 10, 1).unwrap();
        assert!(s.iter().all(|e| e.delta.norm() == 0.0));
    }

    #[test]
    fn ball_samples_respect_radius_and_reach_it() {
        let s = sample_error_ball(8, 0.3, 1000, 7).unwrap();
        assert_eq!(s.len(), 1000);
        let max = s.iter().map(|e| e.delta.norm()).fold(0.0, f64::max);
        assert!(s.iter().all(|e| e.delta.norm() <= 0.3));
        assert!((max - 0.3).abs() < 1e-12);
        assert_eq!(s, sample_error_ball(8, 0.3, 1000, 7).unwrap());
    }

    #[test]
    fn negative_radius_rejected() {
        assert!(sample_error_ball(4, -0.1, 3, 0).is_err());
    }
}
