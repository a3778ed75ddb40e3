//! Convex surrogates and robust-constraint objects used by each convex
//! subproblem: the concave lower bound on the SR log-rate, the tangent of
//! 1/α, the two Schur-complement LMIs of the S-procedure, the outage
//! thresholds for passive eavesdroppers, and the inner approximations of
//! the log-epigraph and bilinear constraints.

use crate::error::{domain_err, Error, Result};
use crate::linalg::{inner, is_hermitian, quad_form, CMat, CVec, Cx};
use crate::rates::{chi_secondary, BeamDesign};
use crate::scenario::{ChannelSet, SystemConfig};
use serde::{Deserialize, Serialize};

/// Auxiliary values of the most recent subproblem solution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuxValues {
    pub t: Vec<f64>,
    pub z: f64,
    pub varphi: f64,
    /// `mu[l][g]`.
    pub mu: Vec<Vec<f64>>,
    pub mu_tilde: Vec<f64>,
    /// `omega[l][g]`.
    pub omega: Vec<Vec<f64>>,
    pub omega_tilde: Vec<f64>,
    pub theta: f64,
    pub eta: f64,
    pub vartheta: f64,
    /// Epigraph value s ≥ η².
    pub s: f64,
}

/// Expansion point of one SCA step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub design: BeamDesign,
    /// Primary SINR targets α_l.
    pub alpha: Vec<f64>,
    /// Per-group eavesdropper SINR caps φ_g.
    pub phi: Vec<f64>,
    /// Primary eavesdropper SINR cap β.
    pub beta: f64,
    /// Expansion point of the r² lower bound in the βθ constraint.
    pub r: f64,
    pub aux: AuxValues,
}

impl IterateState {
    pub fn check(&self) -> Result<()> {
        if self.alpha.iter().any(|&a| !(a > 0.0)) {
            return domain_err("alpha expansion values must be positive");
        }
        if self.phi.iter().any(|&p| !(p > 0.0)) {
            return domain_err("phi expansion values must be positive");
        }
        if !(self.beta > 0.0) {
            return domain_err("beta expansion value must be positive");
        }
        if !(self.r > 0.0) {
            return domain_err("r expansion value must be positive");
        }
        Ok(())
    }
}

/// x ↦ intercept + slope·x.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineScalar {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineScalar {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// A concave function of (w, Ũ):
/// `constant + Σ_i Re{linear_w[i]^H w_i} + quad_scale·(Σ_i |h^H w_i|² + h^H Ũ h + chi_offset)`.
///
/// The bracket equals χ_{s,m_g}(w, Ũ) + |h^H w_g|².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcaveQuadratic {
    pub constant: f64,
    pub linear_w: Vec<CVec>,
    pub quad_scale: f64,
    pub h: CVec,
    /// P_p|f_{m_g}|² + σ²_{m_g}.
    pub chi_offset: f64,
}

impl ConcaveQuadratic {
    pub fn eval(&self, w: &[CVec], u_cov: &CMat) -> f64 {
        let lin: f64 = self.linear_w.iter().zip(w).map(|(a, x)| inner(a, x).re).sum();
        let bracket: f64 =
            w.iter().map(|x| inner(&self.h, x).norm_sqr()).sum::<f64>() + quad_form(u_cov, &self.h) + self.chi_offset;
        self.constant + lin + self.quad_scale * bracket
    }
}

/// Concave minorant of ln(1 + Γ_{s,m_g}(w, Ũ)) tangent at the state's design.
pub fn build_f_surrogate(
    state: &IterateState,
    g: usize,
    m: usize,
    ch: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<ConcaveQuadratic> {
    if g >= cfg.n_groups || m >= cfg.srs_per_group[g] {
        return Err(Error::Dimension(format!("no SR ({g}, {m})")));
    }
    let d = &state.design;
    let h = ch.h_sr[g][m].clone();
    let chi_n = chi_secondary(d, ch, cfg, g, m);
    if !(chi_n > 0.0) {
        return domain_err("denominator at the expansion point is not positive");
    }
    let hw = inner(&h, &d.w[g]);
    let gamma_n = hw.norm_sqr() / chi_n;
    let mut linear_w = vec![CVec::zeros(cfg.n_antennas); cfg.n_groups];
    // Re{(w^(n))^H h h^H w} = Re{(h h^H w^(n))^H w}
    linear_w[g] = &h * (hw * Cx::from(2.0 / chi_n));
    Ok(ConcaveQuadratic {
        constant: gamma_n.ln_1p() - gamma_n,
        linear_w,
        quad_scale: -gamma_n / (chi_n + hw.norm_sqr()),
        chi_offset: cfg.pt_power * ch.f_pt_sr[g][m].norm_sqr() + cfg.noise_variances.sr[g][m],
        h,
    })
}

/// Tangent of α ↦ gain/α at α^(n): α ↦ 2·gain/α^(n) − gain·α/(α^(n))².
pub fn linearize_inverse_alpha(alpha_n: f64, gain: f64) -> Result<AffineScalar> {
    if !(alpha_n > 0.0) {
        return domain_err("alpha expansion value must be positive");
    }
    if !(gain > 0.0) {
        return domain_err("gain must be positive");
    }
    Ok(AffineScalar { intercept: 2.0 * gain / alpha_n, slope: -gain / (alpha_n * alpha_n) })
}

/// Scalars an LMI entry can be built from: plain complex numbers, or
/// complex affine expressions of optimization variables.
pub trait LmiScalar: Clone {
    fn constant(c: Cx) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, c: Cx) -> Self;
    fn conj(&self) -> Self;

    fn zero() -> Self {
        Self::constant(Cx::new(0.0, 0.0))
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Cx::new(-1.0, 0.0)))
    }
}

impl LmiScalar for Cx {
    fn constant(c: Cx) -> Self {
        c
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, c: Cx) -> Self {
        self * c
    }
    fn conj(&self) -> Self {
        Cx::conj(self)
    }
}

fn dot_const<T: LmiScalar>(coeffs: impl Iterator<Item = Cx>, xs: &[T]) -> T {
    coeffs.zip(xs).fold(T::zero(), |acc, (c, x)| acc.add(&x.scale(c)))
}

/// Entries of
/// ```text
/// [ 1            w^H      −w^H f̂     ]
/// [ w            ω I_N    0          ]
/// [ −f̂^H w       0        μ − ω δ²   ]
/// ```
/// whose PSD-ness with ω ≥ 0 certifies max_{‖Δ‖≤δ} |(f̂+Δ)^H w|² ≤ μ.
pub fn schur_beam_entries<T: LmiScalar>(w: &[T], f_hat: &CVec, delta: f64, mu: &T, omega: &T) -> Vec<Vec<T>> {
    let n = w.len();
    let size = n + 2;
    let mut m = vec![vec![T::zero(); size]; size];
    m[0][0] = T::constant(Cx::new(1.0, 0.0));
    for k in 0..n {
        m[0][1 + k] = w[k].conj();
        m[1 + k][0] = w[k].clone();
        m[1 + k][1 + k] = omega.clone();
    }
    // w^H f̂ = Σ conj(w_k) f̂_k
    let wf = w.iter().zip(f_hat.iter()).fold(T::zero(), |acc, (x, &f)| acc.add(&x.conj().scale(f)));
    m[0][n + 1] = wf.scale(Cx::new(-1.0, 0.0));
    m[n + 1][0] = wf.conj().scale(Cx::new(-1.0, 0.0));
    m[n + 1][n + 1] = mu.sub(&omega.scale(Cx::new(delta * delta, 0.0)));
    m
}

/// Entries of
/// ```text
/// [ ω̃ I_N − Ũ      −Ũ f̂                  ]
/// [ −f̂^H Ũ         −f̂^H Ũ f̂ − ω̃ δ² + μ̃  ]
/// ```
/// whose PSD-ness with ω̃ ≥ 0 certifies max_{‖Δ‖≤δ} (f̂+Δ)^H Ũ (f̂+Δ) ≤ μ̃.
/// `u[j][k]` must be Hermitian-consistent.
pub fn schur_jn_entries<T: LmiScalar>(u: &[Vec<T>], f_hat: &CVec, delta: f64, mu_tilde: &T, omega_tilde: &T) -> Vec<Vec<T>> {
    let n = u.len();
    let mut m = vec![vec![T::zero(); n + 1]; n + 1];
    for j in 0..n {
        for k in 0..n {
            let mut e = u[j][k].scale(Cx::new(-1.0, 0.0));
            if j == k {
                e = e.add(omega_tilde);
            }
            m[j][k] = e;
        }
    }
    let uf: Vec<T> = (0..n).map(|j| dot_const(f_hat.iter().copied(), &u[j])).collect();
    for j in 0..n {
        m[j][n] = uf[j].scale(Cx::new(-1.0, 0.0));
        m[n][j] = uf[j].conj().scale(Cx::new(-1.0, 0.0));
    }
    let fuf = dot_const(f_hat.iter().map(|f| f.conj()), &uf);
    m[n][n] = mu_tilde.sub(&fuf).sub(&omega_tilde.scale(Cx::new(delta * delta, 0.0)));
    m
}

fn to_cmat(entries: Vec<Vec<Cx>>) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| entries[i][j])
}

/// Numeric (N+2)×(N+2) beamformer LMI matrix.
pub fn build_schur_lmi_beam(w_g: &CVec, f_hat: &CVec, delta: f64, mu: f64, omega: f64) -> Result<CMat> {
    if w_g.len() != f_hat.len() {
        return Err(Error::Dimension("beamformer and channel lengths differ".into()));
    }
    if !(delta >= 0.0) {
        return domain_err("error radius must be nonnegative");
    }
    let w: Vec<Cx> = w_g.iter().copied().collect();
    Ok(to_cmat(schur_beam_entries(&w, f_hat, delta, &Cx::from(mu), &Cx::from(omega))))
}

/// Numeric (N+1)×(N+1) jamming LMI matrix.
pub fn build_schur_lmi_jn(u_cov: &CMat, f_hat: &CVec, delta: f64, mu_tilde: f64, omega_tilde: f64) -> Result<CMat> {
    if u_cov.nrows() != f_hat.len() || !u_cov.is_square() {
        return Err(Error::Dimension("covariance and channel sizes differ".into()));
    }
    if !is_hermitian(u_cov, 1e-10) {
        return domain_err("jamming covariance is not Hermitian");
    }
    let n = u_cov.nrows();
    let u: Vec<Vec<Cx>> = (0..n).map(|j| (0..n).map(|k| u_cov[(j, k)]).collect()).collect();
    Ok(to_cmat(schur_jn_entries(&u, f_hat, delta, &Cx::from(mu_tilde), &Cx::from(omega_tilde))))
}

/// (1 − ε̃^{1/K_p})^{1/N}.
pub fn primary_outage_kappa(cfg: &SystemConfig) -> f64 {
    let eps = cfg.outage_targets.primary;
    (1.0 - eps.powf(1.0 / cfg.n_primary_eves as f64)).powf(1.0 / cfg.n_antennas as f64)
}

/// Threshold ξ̃(β) that λmin(Σ w_g w_g^H + Ũ) must reach for the primary
/// eavesdroppers' SINR to stay below β with probability ε̃.
pub fn xi_tilde(beta: f64, cfg: &SystemConfig) -> Result<f64> {
    if !(beta > 0.0) {
        return domain_err("beta must be positive");
    }
    let n = cfg.n_antennas as f64;
    let pp = cfg.pt_power;
    let sigma2 = cfg.noise_variances.primary_eve_min();
    let kappa = primary_outage_kappa(cfg);
    Ok(((-beta * sigma2 / (n * pp)).exp() / kappa - 1.0) * pp / beta)
}

/// ξ_g = [exp(σ²/(N P_p))·ε_g^{−1/(N K_g)} − 1]·P_p.
pub fn xi_secondary(cfg: &SystemConfig, g: usize) -> f64 {
    let n = cfg.n_antennas as f64;
    let pp = cfg.pt_power;
    let sigma2 = cfg.noise_variances.secondary_eve_min(g);
    let eps = cfg.outage_targets.groups[g];
    let k = cfg.eves_per_group[g] as f64;
    ((sigma2 / (n * pp)).exp() * eps.powf(-1.0 / (n * k)) - 1.0) * pp
}

/// Tangent of ln(1+x) at x_n; an over-estimator, so `tangent ≤ c` is an
/// inner approximation of `ln(1+x) ≤ c`.
pub fn tangent_log_overestimator(x_n: f64) -> Result<AffineScalar> {
    if !(x_n > -1.0) {
        return domain_err("expansion point must exceed -1");
    }
    let d = 1.0 + x_n;
    Ok(AffineScalar { intercept: x_n.ln_1p() - x_n / d, slope: 1.0 / d })
}

/// Inner approximation of `lhs ≤ βθ`: require `r² ≤ βθ` (rotated cone,
/// β, θ ≥ 0) and `lhs ≤ 2 r^(n) r − (r^(n))²`, the tangent minorant of r².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearBound {
    pub lower: AffineScalar,
}

impl BilinearBound {
    pub fn in_rotated_cone(r: f64, beta: f64, theta: f64, tol: f64) -> bool {
        beta >= -tol && theta >= -tol && r * r <= beta * theta + tol
    }
}

pub fn bilinear_inner_bound(r_n: f64) -> Result<BilinearBound> {
    if !(r_n > 0.0) {
        return domain_err("r expansion value must be positive");
    }
    Ok(BilinearBound { lower: AffineScalar { intercept: -r_n * r_n, slope: 2.0 * r_n } })
}

/// Right side of the secondary outage constraint with the cross-group power
/// linearized at w^(n):
/// `constant + Σ_i Re{linear_w[i]^H w_i} + ϑ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Rhs {
    pub constant: f64,
    pub linear_w: Vec<CVec>,
}

impl Lemma3Rhs {
    pub fn eval(&self, w: &[CVec], vartheta: f64) -> f64 {
        self.constant + self.linear_w.iter().zip(w).map(|(a, x)| inner(a, x).re).sum::<f64>() + vartheta
    }
}

pub fn lemma3_linear_rhs(state: &IterateState, g: usize, cfg: &SystemConfig) -> Lemma3Rhs {
    let mut constant = xi_secondary(cfg, g);
    let mut linear_w = vec![CVec::zeros(cfg.n_antennas); cfg.n_groups];
    for (i, wn) in state.design.w.iter().enumerate() {
        if i != g {
            constant -= wn.norm_squared();
            linear_w[i] = wn * Cx::from(2.0);
        }
    }
    Lemma3Rhs { constant, linear_w }
}
