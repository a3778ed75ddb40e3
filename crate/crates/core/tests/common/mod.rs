#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as Cx;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use secbeam::rates::BeamDesign;
use secbeam::scenario::{ChannelSet, SystemConfig};

pub type CVec = DVector<Cx>;
pub type CMat = DMatrix<Cx>;

/// Loose outage targets and a small primary rate: most draws are feasible.
pub fn relaxed_config() -> SystemConfig {
    SystemConfig::paper_defaults().with_outage_targets(0.05, 0.01).with_min_primary_secrecy(0.1)
}

/// `relaxed_config` at N = 4 with lighter Monte Carlo, for pipeline tests.
pub fn small_config() -> SystemConfig {
    let mut cfg = relaxed_config().with_antennas(4);
    cfg.mc.outage_samples = 20_000;
    cfg.mc.worst_case_samples = 500;
    cfg
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn<R: Rng>(rng: &mut R) -> Cx {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Cx::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_cvec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CVec {
    CVec::from_fn(n, |_, _| cn(rng) * scale)
}

/// A A^H scaled to trace ≈ `scale`·n, rank `rank`.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, rank: usize, scale: f64) -> CMat {
    let a = CMat::from_fn(n, rank, |_, _| cn(rng));
    (&a * a.adjoint()) * Cx::from(scale / rank as f64)
}

pub fn random_design<R: Rng>(rng: &mut R, n: usize, groups: usize, w_scale: f64, u_scale: f64) -> BeamDesign {
    BeamDesign {
        w: (0..groups).map(|_| random_cvec(rng, n, w_scale)).collect(),
        u_cov: random_psd(rng, n, n.min(3), u_scale),
    }
}

fn dot(a: &CVec, b: &CVec) -> Cx {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn quad(u: &CMat, f: &CVec) -> f64 {
    dot(f, &(u * f)).re
}

/// SR SINR written out from the signal model.
pub fn secondary_sinr(d: &BeamDesign, ch: &ChannelSet, cfg: &SystemConfig, g: usize, m: usize) -> f64 {
    let h = &ch.h_sr[g][m];
    let signal = dot(h, &d.w[g]).norm_sqr();
    let mut interf = quad(&d.u_cov, h) + cfg.pt_power * ch.f_pt_sr[g][m].norm_sqr() + cfg.noise_variances.sr[g][m];
    for (i, w) in d.w.iter().enumerate() {
        if i != g {
            interf += dot(h, w).norm_sqr();
        }
    }
    signal / interf
}

/// Smallest eigenvalue of a Hermitian matrix through its real symmetric
/// embedding [[Re, −Im], [Im, Re]].
pub fn lambda_min_embedded(m: &CMat) -> f64 {
    let n = m.nrows();
    let h = (m + m.adjoint()) * Cx::from(0.5);
    let r = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (a, b) = (h[(i % n, j % n)], i / n * 2 + j / n);
        match b {
            0 | 3 => a.re,
            1 => -a.im,
            _ => a.im,
        }
    });
    r.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// max over ω ∈ [0, hi] of a concave function, golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iters: usize) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        }
    }
    fc.max(fd).max(f(lo)).max(f(hi))
}

/// Smallest μ for which some ω ≥ 0 makes `lmi(μ, ω)` PSD: bisection on μ,
/// with λmin maximized over ω ∈ [0, μ/δ²] at each step. At δ = 0 the
/// infimum is only approached as ω grows, so ω is capped at 1e8·(1 + μ).
pub fn min_certified_mu(lmi: impl Fn(f64, f64) -> CMat, delta: f64, mu_hi: f64) -> f64 {
    let feasible = |mu: f64| {
        let top = if delta > 0.0 { mu / (delta * delta) } else { 1e8 * (1.0 + mu) };
        golden_max(|om| lambda_min_embedded(&lmi(mu, om)), 0.0, top, 90) >= -1e-12 * (1.0 + mu)
    };
    let (mut lo, mut hi) = (0.0, mu_hi);
    assert!(feasible(hi), "upper bracket is not feasible");
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// max over ‖e‖ ≤ δ of (f + e)^H U (f + e) for PSD U, from the secular
/// equation in the eigenbasis of U.
pub fn trust_region_max(u: &CMat, f: &CVec, delta: f64) -> f64 {
    let eig = ((u + u.adjoint()) * Cx::from(0.5)).symmetric_eigen();
    let lam: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    let b = eig.eigenvectors.adjoint() * f;
    let lmax = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if delta == 0.0 || lmax <= 0.0 {
        return quad(u, f);
    }
    // ‖c(ν)‖² with c_i = λ_i b_i / (ν − λ_i), decreasing in ν > λmax
    let norm2 = |nu: f64| -> f64 {
        lam.iter().zip(b.iter()).map(|(&l, bi)| (l * bi.norm() / (nu - l)).powi(2)).sum()
    };
    let mut lo = lmax * (1.0 + 1e-12);
    assert!(norm2(lo) > delta * delta, "hard case: f has no weight on the top eigenvector");
    let mut hi = 2.0 * lmax;
    while norm2(hi) > delta * delta {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm2(mid) > delta * delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    lam.iter().zip(b.iter()).map(|(&l, bi)| l * (bi.norm() * nu / (nu - l)).powi(2)).sum()
}

/// Uniform draws from the complex ball of radius `delta` in C^n.
pub fn ball_samples<R: Rng>(rng: &mut R, n: usize, delta: f64, count: usize) -> Vec<CVec> {
    (0..count)
        .map(|_| {
            let v = random_cvec(rng, n, 1.0);
            let r: f64 = rng.random::<f64>().powf(1.0 / (2 * n) as f64);
            &v * Cx::from(delta * r / v.norm())
        })
        .collect()
}

pub fn abs_dot(a: &CVec, b: &CVec) -> f64 {
    dot(a, b).norm()
}

pub fn quad_form(u: &CMat, f: &CVec) -> f64 {
    quad(u, f)
}
