//! Feasibility initialization, per-iteration subproblem assembly and the
//! SCA loop, for the proposed scheme and the two baselines.

use crate::conic::{
    census, check_solution, solve, CExpr, Census, Cone, ConicProgram, LinExpr, ProgramBuilder, SolveOutcome,
    SolveStatus, SolverSettings,
};
use crate::error::Result;
use crate::linalg::{hermitian_eigenvalues, inner, lambda_min, psd_projection, CMat, CVec, Cx};
use crate::rates::{worst_case_primary, BeamDesign};
use crate::scenario::{ChannelSet, SystemConfig};
use crate::surrogate::{
    bilinear_inner_bound, build_f_surrogate, lemma3_linear_rhs, linearize_inverse_alpha, primary_outage_kappa,
    schur_beam_entries, schur_jn_entries, tangent_log_overestimator, xi_secondary, xi_tilde, AuxValues,
    IterateState, LmiScalar,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Floor applied to every positive expansion value.
pub const EXPANSION_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Proposed,
    NoJn,
    NonRobust,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::NoJn, Scheme::NonRobust];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::NoJn => "no_jn",
            Scheme::NonRobust => "non_robust",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|k| k.as_str() == s)
    }

    fn radius(&self, ch: &ChannelSet, l: usize) -> f64 {
        match self {
            Scheme::NonRobust => 0.0,
            _ => ch.f_err_radius[l],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmStatus {
    Converged,
    MaxIters,
    InfeasibleScenario,
    NumericalFailure,
}

impl AlgorithmStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlgorithmStatus::Converged => "converged",
            AlgorithmStatus::MaxIters => "max_iters",
            AlgorithmStatus::InfeasibleScenario => "infeasible_scenario",
            AlgorithmStatus::NumericalFailure => "numerical_failure",
        }
    }

    /// True when the run produced a design satisfying every constraint.
    pub fn has_design(&self) -> bool {
        matches!(self, AlgorithmStatus::Converged | AlgorithmStatus::MaxIters)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmReport {
    pub scheme: Scheme,
    pub status: AlgorithmStatus,
    /// Certified objective (bits/s/Hz) after each main iteration.
    pub trace: Vec<f64>,
    pub iterations_used: usize,
    pub init_passes: usize,
    /// Best initialization objective reached (≥ 0 when feasible).
    pub init_margin: f64,
    /// Violation of each main subproblem at the previous iteration's optimum.
    pub carry_forward_residuals: Vec<f64>,
    /// State entering the first main iteration.
    pub initial_state: Option<IterateState>,
    pub final_state: Option<IterateState>,
    pub subproblem_dimensions: Option<Census>,
}

impl AlgorithmReport {
    pub fn final_design(&self) -> Option<&BeamDesign> {
        self.final_state.as_ref().map(|s| &s.design)
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.trace.last().copied()
    }
}

/// Positions of the named variable blocks inside a program.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    n: usize,
    groups: usize,
    prs: usize,
    w: usize,
    u: usize,
    t: Option<usize>,
    z: usize,
    varphi: Option<usize>,
    phi: Option<usize>,
    alpha: usize,
    beta: usize,
    mu: usize,
    mu_t: usize,
    omega: usize,
    omega_t: usize,
    theta: usize,
    nu: usize,
    s: usize,
    r: usize,
    vartheta: Option<usize>,
    margin: Option<usize>,
    n_vars: usize,
}

impl Layout {
    fn new(b: &mut ProgramBuilder, cfg: &SystemConfig, main: bool) -> Result<Self> {
        let (n, g, l) = (cfg.n_antennas, cfg.n_groups, cfg.n_prs);
        let w = b.add_block("w", 2 * n * g)?.start;
        let u = b.add_block("u_cov", n * n)?.start;
        let t = if main { Some(b.add_block("t", g)?.start) } else { None };
        let z = b.add_block("z", 1)?.start;
        let varphi = if main { Some(b.add_block("varphi", 1)?.start) } else { None };
        let phi = if main { Some(b.add_block("phi", g)?.start) } else { None };
        let alpha = b.add_block("alpha", l)?.start;
        let beta = b.add_block("beta", 1)?.start;
        let mu = b.add_block("mu", l * g)?.start;
        let mu_t = b.add_block("mu_tilde", l)?.start;
        let omega = b.add_block("omega", l * g)?.start;
        let omega_t = b.add_block("omega_tilde", l)?.start;
        let theta = b.add_block("theta", 1)?.start;
        let nu = b.add_block("nu", 1)?.start;
        let s = b.add_block("s", 1)?.start;
        let r = b.add_block("r", 1)?.start;
        let vartheta = if main { Some(b.add_block("vartheta", 1)?.start) } else { None };
        let margin = if main { None } else { Some(b.add_block("margin", 1)?.start) };
        let n_vars = b.n_vars();
        Ok(Self {
            n,
            groups: g,
            prs: l,
            w,
            u,
            t,
            z,
            varphi,
            phi,
            alpha,
            beta,
            mu,
            mu_t,
            omega,
            omega_t,
            theta,
            nu,
            s,
            r,
            vartheta,
            margin,
            n_vars,
        })
    }

    fn w_re(&self, g: usize, k: usize) -> usize {
        self.w + g * 2 * self.n + k
    }

    fn w_im(&self, g: usize, k: usize) -> usize {
        self.w_re(g, k) + self.n
    }

    fn w_expr(&self, g: usize, k: usize) -> CExpr {
        CExpr::new(LinExpr::var(self.w_re(g, k)), LinExpr::var(self.w_im(g, k)))
    }

    fn w_reals(&self, g: usize) -> Vec<LinExpr> {
        (0..2 * self.n).map(|k| LinExpr::var(self.w + g * 2 * self.n + k)).collect()
    }

    /// Index of the real part of Ũ_jk for j < k; the imaginary part follows it.
    fn u_off(&self, j: usize, k: usize) -> usize {
        let n = self.n;
        let before: usize = (0..j).map(|a| n - 1 - a).sum();
        self.u + n + 2 * (before + (k - j - 1))
    }

    fn u_expr(&self, j: usize, k: usize) -> CExpr {
        use std::cmp::Ordering::*;
        match j.cmp(&k) {
            Equal => CExpr::real(LinExpr::var(self.u + j)),
            Less => {
                let i = self.u_off(j, k);
                CExpr::new(LinExpr::var(i), LinExpr::var(i + 1))
            }
            Greater => self.u_expr(k, j).conj(),
        }
    }

    fn u_entries(&self) -> Vec<Vec<CExpr>> {
        (0..self.n).map(|j| (0..self.n).map(|k| self.u_expr(j, k)).collect()).collect()
    }

    fn u_vars(&self) -> std::ops::Range<usize> {
        self.u..self.u + self.n * self.n
    }

    fn trace_u(&self) -> LinExpr {
        (0..self.n).fold(LinExpr::default(), |acc, j| acc.plus_term(self.u + j, 1.0))
    }

    /// Re and Im of h^H w_g.
    fn hw(&self, h: &CVec, g: usize) -> (LinExpr, LinExpr) {
        let mut re = LinExpr::default();
        let mut im = LinExpr::default();
        for k in 0..self.n {
            let (a, b) = (h[k].re, h[k].im);
            re.terms.push((self.w_re(g, k), a));
            re.terms.push((self.w_im(g, k), b));
            im.terms.push((self.w_im(g, k), a));
            im.terms.push((self.w_re(g, k), -b));
        }
        (re.compact(), im.compact())
    }

    /// Re{a^H w_g}.
    fn re_inner(&self, a: &CVec, g: usize) -> LinExpr {
        self.hw(a, g).0
    }

    /// h^H Ũ h.
    fn quad_u(&self, h: &CVec) -> LinExpr {
        let mut e = LinExpr::default();
        for j in 0..self.n {
            e.terms.push((self.u + j, h[j].norm_sqr()));
            for k in j + 1..self.n {
                let c = h[j].conj() * h[k];
                let i = self.u_off(j, k);
                e.terms.push((i, 2.0 * c.re));
                e.terms.push((i + 1, -2.0 * c.im));
            }
        }
        e.compact()
    }

    fn mu_idx(&self, l: usize, g: usize) -> usize {
        l * self.groups + g
    }

    pub fn design(&self, x: &[f64]) -> BeamDesign {
        let n = self.n;
        let w = (0..self.groups)
            .map(|g| CVec::from_fn(n, |k, _| Cx::new(x[self.w_re(g, k)], x[self.w_im(g, k)])))
            .collect();
        let u_cov = CMat::from_fn(n, n, |j, k| {
            let e = self.u_expr(j, k);
            Cx::new(e.re.eval(x), e.im.eval(x))
        });
        BeamDesign { w, u_cov }
    }

    /// Inverse of [`Layout::design`] plus auxiliaries, for re-checking a
    /// state against a program.
    fn encode(&self, st: &IterateState) -> Vec<f64> {
        let mut x = vec![0.0; self.n_vars];
        let d = &st.design;
        for g in 0..self.groups {
            for k in 0..self.n {
                x[self.w_re(g, k)] = d.w[g][k].re;
                x[self.w_im(g, k)] = d.w[g][k].im;
            }
        }
        for j in 0..self.n {
            x[self.u + j] = d.u_cov[(j, j)].re;
            for k in j + 1..self.n {
                let i = self.u_off(j, k);
                x[i] = d.u_cov[(j, k)].re;
                x[i + 1] = d.u_cov[(j, k)].im;
            }
        }
        let a = &st.aux;
        if let Some(t) = self.t {
            x[t..t + self.groups].copy_from_slice(&a.t);
        }
        x[self.z] = a.z;
        if let Some(v) = self.varphi {
            x[v] = a.varphi;
        }
        if let Some(p) = self.phi {
            x[p..p + self.groups].copy_from_slice(&st.phi);
        }
        x[self.alpha..self.alpha + self.prs].copy_from_slice(&st.alpha);
        x[self.beta] = st.beta;
        for l in 0..self.prs {
            for g in 0..self.groups {
                x[self.mu + self.mu_idx(l, g)] = a.mu[l][g];
                x[self.omega + self.mu_idx(l, g)] = a.omega[l][g];
            }
            x[self.mu_t + l] = a.mu_tilde[l];
            x[self.omega_t + l] = a.omega_tilde[l];
        }
        x[self.theta] = a.theta;
        x[self.nu] = a.eta.ln();
        x[self.s] = a.s;
        x[self.r] = st.r;
        if let Some(v) = self.vartheta {
            x[v] = a.vartheta;
        }
        x
    }

    fn aux(&self, x: &[f64]) -> AuxValues {
        let grid = |start: usize| -> Vec<Vec<f64>> {
            (0..self.prs).map(|l| (0..self.groups).map(|g| x[start + self.mu_idx(l, g)]).collect()).collect()
        };
        AuxValues {
            t: self.t.map(|t| x[t..t + self.groups].to_vec()).unwrap_or_default(),
            z: x[self.z],
            varphi: self.varphi.map(|v| x[v]).unwrap_or(0.0),
            mu: grid(self.mu),
            mu_tilde: x[self.mu_t..self.mu_t + self.prs].to_vec(),
            omega: grid(self.omega),
            omega_tilde: x[self.omega_t..self.omega_t + self.prs].to_vec(),
            theta: x[self.theta],
            eta: x[self.nu].exp(),
            vartheta: self.vartheta.map(|v| x[v]).unwrap_or(0.0),
            s: x[self.s],
        }
    }
}

/// Removes solver round-off from an extracted design: Ũ is made exactly
/// Hermitian and PSD, and the total power is pulled inside the budget.
fn clean_design(mut d: BeamDesign, budget: f64) -> BeamDesign {
    let herm = (&d.u_cov + d.u_cov.adjoint()) * Cx::from(0.5);
    d.u_cov = if hermitian_eigenvalues(&herm)[0] < 0.0 { psd_projection(&herm) } else { herm };
    let p = d.power();
    if p > budget {
        let c = budget / p;
        d.u_cov *= Cx::from(c);
        let s = Cx::from(c.sqrt());
        for w in &mut d.w {
            *w *= s;
        }
    }
    d
}

struct Common<'a> {
    st: &'a IterateState,
    ch: &'a ChannelSet,
    cfg: &'a SystemConfig,
    scheme: Scheme,
}

/// Constraints shared by the initialization and the main subproblem.
fn add_primary_side(b: &mut ProgramBuilder, lay: &Layout, c: &Common, margin: Option<usize>) -> Result<()> {
    let (cfg, ch, st) = (c.cfg, c.ch, c.st);
    let (n, groups) = (cfg.n_antennas, cfg.n_groups);
    for l in 0..cfg.n_prs {
        // log2(1 + α_l) − z ≥ R̄_l (+ margin)
        let mut q = LinExpr::term(lay.z, LN_2).plus_const(cfg.min_primary_secrecy[l] * LN_2);
        if let Some(m) = margin {
            q = q.plus_term(m, LN_2);
        }
        b.add(
            format!("primary_rate_l{l}"),
            Cone::Exp,
            vec![q, LinExpr::constant(1.0), LinExpr::var(lay.alpha + l).plus_const(1.0)],
        )?;

        let gain = cfg.pt_power * ch.h_pr[l].norm_sqr();
        let lin = linearize_inverse_alpha(st.alpha[l], gain)?;
        let mut lhs = LinExpr::var(lay.mu_t + l).plus_const(cfg.noise_variances.pr[l]);
        for g in 0..groups {
            lhs = lhs.plus_term(lay.mu + lay.mu_idx(l, g), 1.0);
        }
        let rhs = LinExpr::term(lay.alpha + l, lin.slope).plus_const(lin.intercept);
        // scaled by α^(n)/gain so the row stays O(1) when α^(n) is small
        let row = rhs.sub(&lhs).scale(st.alpha[l] / gain);
        b.add(format!("pr_interference_l{l}"), Cone::NonNeg, vec![row])?;

        let f_hat = &ch.f_st_pr_est[l];
        let delta = c.scheme.radius(ch, l);
        for g in 0..groups {
            let w: Vec<CExpr> = (0..n).map(|k| lay.w_expr(g, k)).collect();
            let idx = lay.mu_idx(l, g);
            let mu = CExpr::real(LinExpr::var(lay.mu + idx));
            let om = CExpr::real(LinExpr::var(lay.omega + idx));
            b.add_hermitian_psd(format!("lmi_beam_l{l}_g{g}"), &schur_beam_entries(&w, f_hat, delta, &mu, &om))?;
        }
        if c.scheme == Scheme::NoJn {
            // with Ũ = 0 the LMI is diag(ω̃ I, μ̃ − ω̃δ²) ⪰ 0
            let row = LinExpr::var(lay.mu_t + l).plus_term(lay.omega_t + l, -delta * delta);
            b.add(format!("lmi_jn_l{l}"), Cone::NonNeg, vec![row])?;
        } else {
            let mu_t = CExpr::real(LinExpr::var(lay.mu_t + l));
            let om_t = CExpr::real(LinExpr::var(lay.omega_t + l));
            b.add_hermitian_psd(format!("lmi_jn_l{l}"), &schur_jn_entries(&lay.u_entries(), f_hat, delta, &mu_t, &om_t))?;
        }
    }
    let omegas: Vec<LinExpr> = (0..cfg.n_prs * groups)
        .map(|i| LinExpr::var(lay.omega + i))
        .chain((0..cfg.n_prs).map(|l| LinExpr::var(lay.omega_t + l)))
        .collect();
    b.add("multipliers_nonneg", Cone::NonNeg, omegas)?;

    // log2(1 + β) ≤ z, tangent at β^(n)
    let tb = tangent_log_overestimator(st.beta)?;
    b.add(
        "primary_eve_cap",
        Cone::NonNeg,
        vec![LinExpr::term(lay.z, LN_2).sub(&LinExpr::term(lay.beta, tb.slope).plus_const(tb.intercept))],
    )?;

    // λmin(Σ w w^H + Ũ) ≥ ξ̃(β) through ν = ln η, s ≥ η², r² ≤ βθ
    let sigma2 = cfg.noise_variances.primary_eve_min();
    let np = cfg.n_antennas as f64 * cfg.pt_power;
    b.add(
        "outage_primary_log",
        Cone::NonNeg,
        vec![LinExpr::term(lay.nu, 2.0).plus_term(lay.beta, sigma2 / np)],
    )?;
    b.add(
        "outage_primary_exp",
        Cone::Exp,
        vec![LinExpr::term(lay.nu, 2.0), LinExpr::constant(1.0), LinExpr::var(lay.s)],
    )?;
    let bb = bilinear_inner_bound(st.r)?;
    let kappa = primary_outage_kappa(cfg);
    let lhs = LinExpr::term(lay.s, cfg.pt_power / kappa).plus_const(-cfg.pt_power);
    let rhs = LinExpr::term(lay.r, bb.lower.slope).plus_const(bb.lower.intercept);
    b.add("outage_primary_bilinear", Cone::NonNeg, vec![rhs.sub(&lhs)])?;
    if c.scheme == Scheme::NoJn {
        // θ = r = 0, leaving β ≥ 0
        b.add("outage_primary_cone", Cone::NonNeg, vec![LinExpr::var(lay.beta)])?;
    } else {
        b.add(
            "outage_primary_cone",
            Cone::RotatedSecondOrder,
            vec![LinExpr::term(lay.beta, 0.5), LinExpr::var(lay.theta), LinExpr::var(lay.r)],
        )?;
        add_u_lower_bound(b, lay, "u_above_theta", lay.theta)?;
    }

    // Σ‖w_g‖² + tr Ũ ≤ P_s
    let mut rows = vec![LinExpr::constant(0.5), LinExpr::constant(cfg.st_power_budget).sub(&lay.trace_u())];
    for g in 0..groups {
        rows.extend(lay.w_reals(g));
    }
    b.add("power", Cone::RotatedSecondOrder, rows)?;

    let mut eig = vec![LinExpr::var(lay.theta)];
    if let Some(v) = lay.vartheta {
        eig.push(LinExpr::var(v));
    }
    if c.scheme == Scheme::NoJn {
        let mut rows: Vec<LinExpr> = lay.u_vars().map(LinExpr::var).collect();
        rows.push(LinExpr::var(lay.r));
        rows.extend(eig);
        b.add("jamming_off", Cone::Zero, rows)?;
    } else {
        b.add("eigen_bounds_nonneg", Cone::NonNeg, eig)?;
    }
    Ok(())
}

/// Ũ − x·I ⪰ 0.
fn add_u_lower_bound(b: &mut ProgramBuilder, lay: &Layout, label: &str, x: usize) -> Result<()> {
    let mut e = lay.u_entries();
    for (j, row) in e.iter_mut().enumerate() {
        row[j] = row[j].sub(&CExpr::real(LinExpr::var(x)));
    }
    b.add_hermitian_psd(label, &e)
}

fn assemble(main: bool, c: &Common) -> Result<(ConicProgram, Layout)> {
    c.st.check()?;
    let cfg = c.cfg;
    let mut b = ProgramBuilder::new();
    let lay = Layout::new(&mut b, cfg, main)?;
    if !main {
        let m = lay.margin.unwrap();
        add_primary_side(&mut b, &lay, c, Some(m))?;
        b.maximize(LinExpr::var(m))?;
        return Ok((b.finish(), lay));
    }
    add_primary_side(&mut b, &lay, c, None)?;
    let (t, varphi, phi, vartheta) = (lay.t.unwrap(), lay.varphi.unwrap(), lay.phi.unwrap(), lay.vartheta.unwrap());
    for g in 0..cfg.n_groups {
        for m in 0..cfg.srs_per_group[g] {
            let f = build_f_surrogate(c.st, g, m, c.ch, cfg)?;
            // τ = everything in F except −c·Σ_i |h^H w_i|², minus (φ + t_g)·ln2
            let mut tau = LinExpr::constant(f.constant + f.quad_scale * f.chi_offset)
                .add(&lay.quad_u(&f.h).scale(f.quad_scale))
                .sub(&LinExpr::term(varphi, LN_2))
                .sub(&LinExpr::term(t + g, LN_2));
            for (i, a) in f.linear_w.iter().enumerate() {
                if a.iter().any(|v| v.norm() > 0.0) {
                    tau = tau.add(&lay.re_inner(a, i));
                }
            }
            let label = format!("sr_rate_g{g}_m{m}");
            let cq = -f.quad_scale;
            if cq > 0.0 {
                let sc = cq.sqrt();
                let mut rows = vec![tau.scale(0.5), LinExpr::constant(1.0)];
                for i in 0..cfg.n_groups {
                    let (re, im) = lay.hw(&f.h, i);
                    rows.push(re.scale(sc));
                    rows.push(im.scale(sc));
                }
                b.add(label, Cone::RotatedSecondOrder, rows)?;
            } else {
                b.add(label, Cone::NonNeg, vec![tau])?;
            }
        }
        // log2(1 + φ_g) ≤ t_g, tangent at φ_g^(n)
        let tp = tangent_log_overestimator(c.st.phi[g])?;
        b.add(
            format!("eve_rate_cap_g{g}"),
            Cone::NonNeg,
            vec![LinExpr::term(t + g, LN_2).sub(&LinExpr::term(phi + g, tp.slope).plus_const(tp.intercept))],
        )?;
        // ‖w_g‖² ≤ φ_g · (linearized right side)
        let rhs3 = lemma3_linear_rhs(c.st, g, cfg);
        let mut rhs = LinExpr::var(vartheta).plus_const(rhs3.constant);
        for (i, a) in rhs3.linear_w.iter().enumerate() {
            if a.iter().any(|v| v.norm() > 0.0) {
                rhs = rhs.add(&lay.re_inner(a, i));
            }
        }
        let mut rows = vec![LinExpr::term(phi + g, 0.5), rhs];
        rows.extend(lay.w_reals(g));
        b.add(format!("outage_secondary_g{g}"), Cone::RotatedSecondOrder, rows)?;
    }
    if c.scheme != Scheme::NoJn {
        add_u_lower_bound(&mut b, &lay, "u_above_vartheta", vartheta)?;
    }
    b.maximize(LinExpr::var(varphi))?;
    Ok((b.finish(), lay))
}

/// Problem solved at each main iteration of the proposed scheme.
pub fn build_subproblem(state: &IterateState, ch: &ChannelSet, cfg: &SystemConfig) -> Result<ConicProgram> {
    build_subproblem_for(Scheme::Proposed, state, ch, cfg)
}

pub fn build_subproblem_for(
    scheme: Scheme,
    state: &IterateState,
    ch: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<ConicProgram> {
    Ok(assemble(true, &Common { st: state, ch, cfg, scheme })?.0)
}

/// Feasibility problem that maximizes the smallest primary secrecy margin.
pub fn build_initialization_program(
    scheme: Scheme,
    state: &IterateState,
    ch: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<ConicProgram> {
    Ok(assemble(false, &Common { st: state, ch, cfg, scheme })?.0)
}

/// Root of ξ̃(β) = θ on [1e-6, 1e6] by bisection, clamped to the bracket.
pub fn beta_for_theta(theta: f64, cfg: &SystemConfig) -> Result<f64> {
    let (mut lo, mut hi) = (1e-6, 1e6);
    if xi_tilde(lo, cfg)? <= theta {
        return Ok(lo);
    }
    if xi_tilde(hi, cfg)? >= theta {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if xi_tilde(mid, cfg)? > theta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn phi_from_lemma2(design: &BeamDesign, cfg: &SystemConfig, lambda: f64) -> Vec<f64> {
    let norms: Vec<f64> = design.w.iter().map(|w| w.norm_squared()).collect();
    let total: f64 = norms.iter().sum();
    (0..cfg.n_groups)
        .map(|g| {
            let denom = xi_secondary(cfg, g) + (total - norms[g]) + lambda.max(0.0);
            (norms[g] / denom).max(EXPANSION_FLOOR)
        })
        .collect()
}

/// Expansion point for the first initialization pass: no information
/// beams and isotropic jamming at half the budget.
pub fn heuristic_start(ch: &ChannelSet, cfg: &SystemConfig) -> Result<IterateState> {
    heuristic_start_for(Scheme::Proposed, ch, cfg)
}

pub fn heuristic_start_for(scheme: Scheme, ch: &ChannelSet, cfg: &SystemConfig) -> Result<IterateState> {
    let n = cfg.n_antennas;
    let mut design = BeamDesign::zeros(n, cfg.n_groups);
    let theta = if scheme == Scheme::NoJn { 0.0 } else { cfg.st_power_budget / (2.0 * n as f64) };
    design.u_cov = CMat::identity(n, n) * Cx::from(theta);
    let eval_ch = if scheme == Scheme::NonRobust {
        let mut c = ch.clone();
        c.f_err_radius.iter_mut().for_each(|r| *r = 0.0);
        c
    } else {
        ch.clone()
    };
    let alpha = worst_case_primary(&design, &eval_ch, cfg, cfg.mc.worst_case_samples.max(1), cfg.seed)?;
    let beta = beta_for_theta(theta, cfg)?;
    let r = (beta * theta).sqrt().max(EXPANSION_FLOOR);
    let phi = phi_from_lemma2(&design, cfg, theta);
    Ok(IterateState { design, alpha, phi, beta, r, aux: AuxValues::default() })
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitOutcome {
    Feasible { state: IterateState, passes: usize, margin: f64 },
    Infeasible { passes: usize, best_margin: f64 },
    NumericalFailure { passes: usize },
}

fn solve_with_retry(p: &ConicProgram, settings: &SolverSettings) -> Result<Option<SolveOutcome>> {
    let first = solve(p, settings)?;
    if first.status == SolveStatus::Optimal {
        return Ok(Some(first));
    }
    let second = solve(p, &settings.relaxed(10.0).cautious())?;
    Ok((second.status == SolveStatus::Optimal).then_some(second))
}

fn next_state(scheme: Scheme, lay: &Layout, x: &[f64], cfg: &SystemConfig, keep_phi: &[f64]) -> IterateState {
    let mut design = clean_design(lay.design(x), cfg.st_power_budget);
    let mut aux = lay.aux(x);
    if scheme == Scheme::NoJn {
        // pinned by equality rows; drop the solver's round-off
        design.u_cov.fill(Cx::from(0.0));
        aux.theta = 0.0;
        aux.vartheta = 0.0;
    }
    let alpha = (0..cfg.n_prs).map(|l| x[lay.alpha + l].max(EXPANSION_FLOOR)).collect();
    let phi = match lay.phi {
        Some(p) => (0..cfg.n_groups).map(|g| x[p + g].max(EXPANSION_FLOOR)).collect(),
        None => keep_phi.to_vec(),
    };
    IterateState {
        design,
        alpha,
        phi,
        beta: x[lay.beta].max(EXPANSION_FLOOR),
        r: x[lay.r].max(EXPANSION_FLOOR),
        aux,
    }
}

/// Repeats the initialization problem until its objective reaches zero.
pub fn solve_initialization(ch: &ChannelSet, cfg: &SystemConfig, start: &IterateState) -> Result<InitOutcome> {
    solve_initialization_for(Scheme::Proposed, ch, cfg, start, &SolverSettings::default())
}

pub fn solve_initialization_for(
    scheme: Scheme,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    start: &IterateState,
    settings: &SolverSettings,
) -> Result<InitOutcome> {
    let mut state = start.clone();
    let mut best = f64::NEG_INFINITY;
    let max_passes = cfg.sca.max_iterations.max(1);
    for pass in 1..=max_passes {
        let (prog, lay) = assemble(false, &Common { st: &state, ch, cfg, scheme })?;
        let Some(sol) = solve_with_retry(&prog, settings)? else {
            return Ok(InitOutcome::NumericalFailure { passes: pass });
        };
        let margin = sol.x[lay.margin.unwrap()];
        state = next_state(scheme, &lay, &sol.x, cfg, &state.phi);
        if margin >= 0.0 {
            return Ok(InitOutcome::Feasible { state, passes: pass, margin });
        }
        if margin - best < cfg.sca.convergence_tolerance {
            return Ok(InitOutcome::Infeasible { passes: pass, best_margin: best.max(margin) });
        }
        best = margin;
    }
    Ok(InitOutcome::Infeasible { passes: max_passes, best_margin: best })
}

/// Adds information beams to a primary-feasible point whose beams are
/// zero. Each group's direction is the sum of its SR channels projected
/// off the estimated primary channels; the scale uses half of the remaining
/// interference and power slack so the primary constraints keep holding.
pub fn inject_information_beams(
    state: &IterateState,
    scheme: Scheme,
    ch: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<IterateState> {
    let n = cfg.n_antennas;
    let aux = &state.aux;
    let basis = orthonormal_basis(&ch.f_st_pr_est);
    let dirs: Vec<CVec> = (0..cfg.n_groups)
        .map(|g| {
            let sum = ch.h_sr[g].iter().fold(CVec::zeros(n), |acc, h| acc + h);
            let proj = basis.iter().fold(sum.clone(), |acc, q| {
                let c = inner(q, &sum);
                acc - q * c
            });
            if proj.norm() > 1e-9 * sum.norm() {
                proj
            } else {
                sum
            }
        })
        .map(|d| {
            let nn = d.norm();
            if nn > 0.0 {
                d / Cx::from(nn)
            } else {
                d
            }
        })
        .collect();

    let mut scale2 = f64::INFINITY;
    let z_req: Vec<f64> = (0..cfg.n_prs).map(|l| (2f64).powf(aux.z + cfg.min_primary_secrecy[l]) - 1.0).collect();
    for l in 0..cfg.n_prs {
        let gain = cfg.pt_power * ch.h_pr[l].norm_sqr();
        let budget = gain / z_req[l] - cfg.noise_variances.pr[l] - aux.mu_tilde[l];
        let delta = scheme.radius(ch, l);
        let per_unit: f64 =
            dirs.iter().map(|d| (inner(&ch.f_st_pr_est[l], d).norm() + delta * d.norm()).powi(2)).sum();
        if per_unit > 0.0 {
            scale2 = scale2.min(0.5 * budget.max(0.0) / per_unit);
        }
    }
    let slack = cfg.st_power_budget - state.design.power();
    let unit_power: f64 = dirs.iter().map(|d| d.norm_squared()).sum();
    if unit_power > 0.0 {
        scale2 = scale2.min(0.5 * slack.max(0.0) / unit_power);
    }
    if !scale2.is_finite() || scale2 <= 0.0 {
        return Ok(state.clone());
    }
    let tau = scale2.sqrt();
    let mut design = state.design.clone();
    design.w = dirs.iter().map(|d| d * Cx::from(tau)).collect();

    let mut out = state.clone();
    let mut new_aux = aux.clone();
    for l in 0..cfg.n_prs {
        let delta = scheme.radius(ch, l);
        let mut total = new_aux.mu_tilde[l] + cfg.noise_variances.pr[l];
        for g in 0..cfg.n_groups {
            let w = &design.w[g];
            let a = inner(&ch.f_st_pr_est[l], w).norm();
            let wn = w.norm();
            let mu = (a + delta * wn).powi(2);
            new_aux.mu[l][g] = mu;
            // S-procedure multiplier that makes the beam LMI tight
            new_aux.omega[l][g] = if wn > 0.0 { wn * (a + delta * wn) / delta.max(1e-300) } else { 0.0 };
            if delta == 0.0 {
                new_aux.omega[l][g] = wn * wn;
            }
            total += mu;
        }
        out.alpha[l] = cfg.pt_power * ch.h_pr[l].norm_sqr() / total;
    }
    let lambda = if scheme == Scheme::NoJn { 0.0 } else { lambda_min(&design.u_cov) };
    out.phi = phi_from_lemma2(&design, cfg, lambda);
    new_aux.vartheta = lambda.max(0.0);
    out.design = design;
    out.aux = new_aux;
    Ok(out)
}

fn orthonormal_basis(vs: &[CVec]) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in vs {
        let mut u = v.clone();
        for q in &basis {
            let c = inner(q, &u);
            u -= q * c;
        }
        let nn = u.norm();
        if nn > 1e-9 * v.norm().max(1e-300) {
            basis.push(u / Cx::from(nn));
        }
    }
    basis
}

/// Options for a full run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub solver: SolverSettings,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { solver: SolverSettings::default() }
    }
}

pub fn run_algorithm1(ch: &ChannelSet, cfg: &SystemConfig) -> Result<AlgorithmReport> {
    run_scheme(Scheme::Proposed, ch, cfg, &RunOptions::default())
}

pub fn run_no_jn(ch: &ChannelSet, cfg: &SystemConfig) -> Result<AlgorithmReport> {
    run_scheme(Scheme::NoJn, ch, cfg, &RunOptions::default())
}

pub fn run_non_robust(ch: &ChannelSet, cfg: &SystemConfig) -> Result<AlgorithmReport> {
    run_scheme(Scheme::NonRobust, ch, cfg, &RunOptions::default())
}

pub fn run_scheme(scheme: Scheme, ch: &ChannelSet, cfg: &SystemConfig, opts: &RunOptions) -> Result<AlgorithmReport> {
    let mut report = AlgorithmReport {
        scheme,
        status: AlgorithmStatus::InfeasibleScenario,
        trace: Vec::new(),
        iterations_used: 0,
        init_passes: 0,
        init_margin: f64::NEG_INFINITY,
        carry_forward_residuals: Vec::new(),
        initial_state: None,
        final_state: None,
        subproblem_dimensions: None,
    };
    let start = heuristic_start_for(scheme, ch, cfg)?;
    let state = match solve_initialization_for(scheme, ch, cfg, &start, &opts.solver)? {
        InitOutcome::Feasible { state, passes, margin } => {
            report.init_passes = passes;
            report.init_margin = margin;
            state
        }
        InitOutcome::Infeasible { passes, best_margin } => {
            report.init_passes = passes;
            report.init_margin = best_margin;
            return Ok(report);
        }
        InitOutcome::NumericalFailure { passes } => {
            report.init_passes = passes;
            report.status = AlgorithmStatus::NumericalFailure;
            return Ok(report);
        }
    };
    let mut state = inject_information_beams(&state, scheme, ch, cfg)?;
    report.initial_state = Some(state.clone());

    let mut prev_x: Option<Vec<f64>> = None;
    report.status = AlgorithmStatus::MaxIters;
    for it in 0..cfg.sca.max_iterations {
        let (prog, lay) = assemble(true, &Common { st: &state, ch, cfg, scheme })?;
        if report.subproblem_dimensions.is_none() {
            report.subproblem_dimensions = Some(census(&prog));
        }
        if let Some(x) = &prev_x {
            report.carry_forward_residuals.push(check_solution(&prog, x)?.max);
        }
        let Some(sol) = solve_with_retry(&prog, &opts.solver)? else {
            report.status = AlgorithmStatus::NumericalFailure;
            break;
        };
        let value = sol.x[lay.varphi.unwrap()];
        state = next_state(scheme, &lay, &sol.x, cfg, &state.phi);
        report.trace.push(value);
        report.iterations_used = it + 1;
        report.final_state = Some(state.clone());
        prev_x = Some(sol.x);
        let n = report.trace.len();
        if n >= 2 && (report.trace[n - 1] - report.trace[n - 2]).abs() <= cfg.sca.convergence_tolerance {
            report.status = AlgorithmStatus::Converged;
            break;
        }
    }
    if report.final_state.is_none() && report.status == AlgorithmStatus::MaxIters {
        report.status = AlgorithmStatus::NumericalFailure;
    }
    Ok(report)
}

/// Violation of `state` (design plus auxiliaries) in the main subproblem
/// built at `expansion`.
pub fn state_residual(
    scheme: Scheme,
    expansion: &IterateState,
    state: &IterateState,
    ch: &ChannelSet,
    cfg: &SystemConfig,
) -> Result<f64> {
    let (prog, lay) = assemble(true, &Common { st: expansion, ch, cfg, scheme })?;
    let x = lay.encode(state);
    Ok(check_solution(&prog, &x)?.max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// G(L+3) + N(N+G) + 2L + 6.
    pub n_vars_formula: usize,
    /// The operand of the interior-point complexity bound.
    pub operand: f64,
    pub census: Census,
}

pub fn complexity_report(cfg: &SystemConfig) -> Result<ComplexityReport> {
    let (n, g, l) = (cfg.n_antennas as f64, cfg.n_groups as f64, cfg.n_prs as f64);
    let nv = cfg.n_groups * (cfg.n_prs + 3) + cfg.n_antennas * (cfg.n_antennas + cfg.n_groups) + 2 * cfg.n_prs + 6;
    let m = nv as f64;
    let operand = m
        * (g * l * (n + 2.0) + l * (n + 1.0) + 2.0 * n).sqrt()
        * (g * l * (n + 2.0).powi(3)
            + l * (n + 1.0).powi(3)
            + 2.0 * n.powi(3)
            + m * g * l * (n + 2.0).powi(2)
            + m * l * (n + 1.0).powi(2)
            + 2.0 * m * n * n
            + m * m);
    let ch = crate::scenario::draw_channels(cfg, cfg.seed)?;
    let st = heuristic_start(&ch, cfg)?;
    let prog = build_subproblem(&st, &ch, cfg)?;
    Ok(ComplexityReport { n_vars_formula: nv, operand, census: census(&prog) })
}
