//! SINRs, secrecy rates, worst-case primary SINR over the CSI-error ball and
//! Monte Carlo eavesdropper outage.
//!
//! Rates are carried in nats internally and converted to bits/s/Hz only in
//! the reported structures.

use crate::error::{domain_err, Error, Result};
use crate::linalg::{hermitian_defect, inner, lambda_min, quad_form, sum_outer, CMat, CVec, Cx};
use crate::par;
use crate::rng::{complex_normal, complex_normal_vec, substream};
use crate::scenario::{clamp_to_ball, sample_error_ball, ChannelSet, SystemConfig};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Information beamformers and jamming covariance Ũ = UU^H.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamDesign {
    pub w: Vec<CVec>,
    pub u_cov: CMat,
}

impl BeamDesign {
    pub fn zeros(n_antennas: usize, n_groups: usize) -> Self {
        Self { w: vec![CVec::zeros(n_antennas); n_groups], u_cov: CMat::zeros(n_antennas, n_antennas) }
    }

    pub fn n_antennas(&self) -> usize {
        self.u_cov.nrows()
    }

    /// Σ_g ‖w_g‖² + tr(Ũ).
    pub fn power(&self) -> f64 {
        self.w.iter().map(|w| w.norm_squared()).sum::<f64>() + self.u_cov.trace().re
    }

    /// Σ_g w_g w_g^H + Ũ, the quadratic form every receiver's interference
    /// plus jamming term is built from.
    pub fn interference_matrix(&self) -> CMat {
        sum_outer(&self.w, self.n_antennas()) + &self.u_cov
    }

    /// Checks Hermitian symmetry, PSD-ness and the power budget.
    pub fn check(&self, power_budget: f64) -> Result<()> {
        if hermitian_defect(&self.u_cov) > 1e-10 {
            return domain_err("jamming covariance is not Hermitian");
        }
        if lambda_min(&self.u_cov) < -1e-9 {
            return domain_err("jamming covariance is not positive semidefinite");
        }
        if self.power() > power_budget * (1.0 + 1e-8) {
            return domain_err("design exceeds the power budget");
        }
        Ok(())
    }
}

fn check_dims(design: &BeamDesign, ch: &ChannelSet, cfg: &SystemConfig) -> Result<()> {
    let n = cfg.n_antennas;
    let bad = design.w.len() != cfg.n_groups
        || design.w.iter().any(|w| w.len() != n)
        || design.u_cov.shape() != (n, n)
        || ch.h_pr.len() != cfg.n_prs
        || ch.f_st_pr_true.iter().any(|f| f.len() != n)
        || ch.h_sr.len() != cfg.n_groups
        || ch.h_sr.iter().zip(&cfg.srs_per_group).any(|(v, &m)| v.len() != m || v.iter().any(|h| h.len() != n))
        || ch.g_eve_s.iter().zip(&cfg.eves_per_group).any(|(v, &k)| v.len() != k)
        || ch.g_eve_p.len() != cfg.n_primary_eves;
    if bad {
        return Err(Error::Dimension("design/channels do not match the configuration".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SinrTable {
    pub primary: Vec<f64>,
    pub primary_eve: Vec<f64>,
    pub secondary: Vec<Vec<f64>>,
    pub secondary_eve: Vec<Vec<f64>>,
}

/// SINR of a receiver hearing the primary transmitter as its desired signal.
fn primary_side_sinr(pp: f64, h: Cx, f: &CVec, q: &CMat, noise: f64) -> f64 {
    pp * h.norm_sqr() / (quad_form(q, f) + noise)
}

/// SINR of a receiver of group `g`'s stream: desired |h^H w_g|² over the
/// other groups' leakage, jamming, primary interference and noise.
fn secondary_side_sinr(design: &BeamDesign, g: usize, h: &CVec, pp: f64, f_pt: Cx, noise: f64) -> f64 {
    let desired = inner(h, &design.w[g]).norm_sqr();
    let mut denom = quad_form(&design.u_cov, h) + pp * f_pt.norm_sqr() + noise;
    for (i, w) in design.w.iter().enumerate() {
        if i != g {
            denom += inner(h, w).norm_sqr();
        }
    }
    desired / denom
}

/// χ_{s,m_g}(w, Ũ): everything in the SR's denominator.
pub fn chi_secondary(design: &BeamDesign, ch: &ChannelSet, cfg: &SystemConfig, g: usize, m: usize) -> f64 {
    let h = &ch.h_sr[g][m];
    let others: f64 = design.w.iter().enumerate().filter(|(i, _)| *i != g).map(|(_, w)| inner(h, w).norm_sqr()).sum();
    others + quad_form(&design.u_cov, h) + cfg.pt_power * ch.f_pt_sr[g][m].norm_sqr() + cfg.noise_variances.sr[g][m]
}

/// Γ_{s,m_g} written as |h^H w_g|² / χ.
pub fn secondary_sinr_ratio_form(design: &BeamDesign, ch: &ChannelSet, cfg: &SystemConfig, g: usize, m: usize) -> f64 {
    inner(&ch.h_sr[g][m], &design.w[g]).norm_sqr() / chi_secondary(design, ch, cfg, g, m)
}

/// Every SINR in the system, evaluated on the true channels in `ch`.
pub fn sinr_all(design: &BeamDesign, ch: &ChannelSet, cfg: &SystemConfig) -> Result<SinrTable> {
    check_dims(design, ch, cfg)?;
    let pp = cfg.pt_power;
    let q = design.interference_matrix();
    let nv = &cfg.noise_variances;
    let primary = (0..cfg.n_prs).map(|l| primary_side_sinr(pp, ch.h_pr[l], &ch.f_st_pr_true[l], &q, nv.pr[l])).collect();
    let primary_eve = (0..cfg.n_primary_eves)
        .map(|k| primary_side_sinr(pp, ch.g_eve_p[k], &ch.f_st_evep[k], &q, nv.primary_eve[k]))
        .collect();
    let secondary = (0..cfg.n_groups)
        .map(|g| {
            (0..cfg.srs_per_group[g])
                .map(|m| secondary_side_sinr(design, g, &ch.h_sr[g][m], pp, ch.f_pt_sr[g][m], nv.sr[g][m]))
                .collect()
        })
        .collect();
    let secondary_eve = (0..cfg.n_groups)
        .map(|g| {
            (0..cfg.eves_per_group[g])
                .map(|k| secondary_side_sinr(design, g, &ch.g_eve_s[g][k], pp, ch.f_pt_eves[g][k], nv.secondary_eve[g][k]))
                .collect()
        })
        .collect();
    Ok(SinrTable { primary, primary_eve, secondary, secondary_eve })
}

/// ln(1 + x).
pub fn rate_nats(sinr: f64) -> f64 {
    sinr.ln_1p()
}

pub fn nats_to_bits(x: f64) -> f64 {
    x / LN_2
}

/// [log₂(1+Γ_legit) − max_k log₂(1+Γ_eve,k)]⁺.
pub fn secrecy_bits(legit: f64, eves: &[f64]) -> f64 {
    let worst_eve = eves.iter().copied().fold(0.0, f64::max);
    nats_to_bits(rate_nats(legit) - rate_nats(worst_eve)).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecrecyReport {
    pub primary_rates: Vec<f64>,
    pub secondary_rates: Vec<Vec<f64>>,
    pub min_secondary: f64,
}

pub fn secrecy_from_table(t: &SinrTable) -> SecrecyReport {
    let primary_rates = t.primary.iter().map(|&p| secrecy_bits(p, &t.primary_eve)).collect();
    let secondary_rates: Vec<Vec<f64>> = t
        .secondary
        .iter()
        .zip(&t.secondary_eve)
        .map(|(srs, eves)| srs.iter().map(|&s| secrecy_bits(s, eves)).collect())
        .collect();
    let min_secondary = secondary_rates.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    SecrecyReport { primary_rates, secondary_rates, min_secondary }
}

/// Secrecy rates against the eavesdropper channels contained in `ch`.
pub fn secrecy_report(design: &BeamDesign, ch: &ChannelSet, cfg: &SystemConfig) -> Result<SecrecyReport> {
    Ok(secrecy_from_table(&sinr_all(design, ch, cfg)?))
}

/// Projected gradient steps taken from the best error sample.
const ASCENT_STEPS: usize = 50;

/// Largest value of (f̂+Δ)^H Q (f̂+Δ) found over the ball ‖Δ‖ ≤ δ, from
/// scaled unit-ball samples followed by projected gradient ascent. Δ = 0 is
/// always a candidate.
pub fn worst_case_quadratic(q: &CMat, f_hat: &CVec, radius: f64, unit_samples: &[CVec]) -> f64 {
    let eval = |d: &CVec| quad_form(q, &(f_hat + d));
    let zero = CVec::zeros(f_hat.len());
    let mut best = zero.clone();
    let mut best_val = eval(&zero);
    if radius == 0.0 {
        return best_val;
    }
    for s in unit_samples {
        let d = s * Cx::from(radius);
        let v = eval(&d);
        if v > best_val {
            best_val = v;
            best = d;
        }
    }
    // Projected gradient ascent with an unbounded step: the projection of
    // Δ + t∇ onto the ball tends to δ∇/‖∇‖, which maximizes the linearization
    // over the ball. For a convex quadratic that never decreases the value.
    for _ in 0..ASCENT_STEPS {
        let grad = q * (f_hat + &best);
        let gnorm = grad.norm();
        if gnorm == 0.0 {
            break;
        }
        let cand = project_ball(grad * Cx::from(radius / gnorm), radius);
        let v = eval(&cand);
        if v > best_val {
            best_val = v;
            best = cand;
        } else {
            break;
        }
    }
    best_val
}

fn project_ball(v: CVec, radius: f64) -> CVec {
    let n = v.norm();
    if n <= radius {
        v
    } else {
        clamp_to_ball(v * Cx::from(radius / n), radius)
    }
}

/// Unit-ball samples shared by every PR so that results are comparable
/// across radii (matched sample sets).
pub fn unit_ball_samples(dim: usize, count: usize, seed: u64) -> Result<Vec<CVec>> {
    Ok(sample_error_ball(dim, 1.0, count, seed)?.into_iter().map(|e| e.delta).collect())
}

/// Worst-case primary SINR per PR over the uncertainty ball around f̂_l.
pub fn worst_case_primary(
    design: &BeamDesign,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return domain_err("n_samples must be positive");
    }
    let samples = unit_ball_samples(cfg.n_antennas, n_samples, seed)?;
    worst_case_primary_with(design, ch, cfg, &samples)
}

/// As [`worst_case_primary`] with caller-provided unit-ball samples.
pub fn worst_case_primary_with(
    design: &BeamDesign,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    unit_samples: &[CVec],
) -> Result<Vec<f64>> {
    check_dims(design, ch, cfg)?;
    let q = design.interference_matrix();
    Ok((0..cfg.n_prs)
        .map(|l| {
            let denom = worst_case_quadratic(&q, &ch.f_st_pr_est[l], ch.f_err_radius[l], unit_samples);
            cfg.pt_power * ch.h_pr[l].norm_sqr() / (denom + cfg.noise_variances.pr[l])
        })
        .collect())
}

/// Which eavesdropper set an outage estimate refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EveSide {
    Primary,
    Group(usize),
}

const MC_CHUNK: usize = 4096;

/// Empirical Pr(max over the Eve set of the Eve SINR ≤ threshold), with every
/// Eve channel entry redrawn from CN(0, 1) per sample.
pub fn eve_outage_mc(
    design: &BeamDesign,
    cfg: &SystemConfig,
    threshold: f64,
    side: EveSide,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(threshold > 0.0) {
        return domain_err("threshold must be positive");
    }
    if n_samples == 0 {
        return domain_err("n_samples must be positive");
    }
    let n = cfg.n_antennas;
    let pp = cfg.pt_power;
    let q = design.interference_matrix();
    let (label, n_eves) = match side {
        EveSide::Primary => ("eve_mc_primary".to_string(), cfg.n_primary_eves),
        EveSide::Group(g) => {
            if g >= cfg.n_groups {
                return Err(Error::Dimension(format!("group {g} out of range")));
            }
            (format!("eve_mc_group_{g}"), cfg.eves_per_group[g])
        }
    };
    let chunks = n_samples.div_ceil(MC_CHUNK);
    let hits = par::sum_indexed(chunks, |c| {
        let mut rng = substream(seed, &label, c as u64);
        let len = MC_CHUNK.min(n_samples - c * MC_CHUNK);
        let mut hits = 0u64;
        for _ in 0..len {
            let mut worst: f64 = 0.0;
            for k in 0..n_eves {
                let pt = complex_normal(&mut rng);
                let st = complex_normal_vec(&mut rng, n);
                let sinr = match side {
                    EveSide::Primary => primary_side_sinr(pp, pt, &st, &q, cfg.noise_variances.primary_eve[k]),
                    EveSide::Group(g) => {
                        secondary_side_sinr(design, g, &st, pp, pt, cfg.noise_variances.secondary_eve[g][k])
                    }
                };
                worst = worst.max(sinr);
            }
            if worst <= threshold {
                hits += 1;
            }
        }
        hits
    });
    Ok(hits as f64 / n_samples as f64)
}

/// min over SRs of [log₂(1+Γ_s) − log₂(1+φ_g)]⁺: the secrecy rate certified
/// against the optimized eavesdropper SINR caps φ_g.
pub fn objective_value(design: &BeamDesign, ch: &ChannelSet, cfg: &SystemConfig, phi: &[f64]) -> Result<f64> {
    if phi.len() != cfg.n_groups {
        return Err(Error::Dimension("one cap per group expected".into()));
    }
    if phi.iter().any(|&p| !(p >= 0.0)) {
        return domain_err("caps must be nonnegative");
    }
    let table = sinr_all(design, ch, cfg)?;
    Ok(certified_from_sinr(&table.secondary, phi))
}

pub(crate) fn certified_from_sinr(secondary: &[Vec<f64>], phi: &[f64]) -> f64 {
    secondary
        .iter()
        .zip(phi)
        .flat_map(|(srs, &p)| srs.iter().map(move |&s| nats_to_bits(rate_nats(s) - rate_nats(p)).max(0.0)))
        .fold(f64::INFINITY, f64::min)
}
