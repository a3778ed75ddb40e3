//! A small conic-program model: named variable blocks, affine rows, and
//! cone memberships. Programs are solved through Clarabel and can be
//! re-checked against any candidate point.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, Cx};
use crate::surrogate::LmiScalar;
use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::ops::Range;

/// Sparse affine expression `constant + Σ coeff·x[var]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn var(i: usize) -> Self {
        Self { terms: vec![(i, 1.0)], constant: 0.0 }
    }
    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }
    pub fn term(i: usize, c: f64) -> Self {
        Self { terms: vec![(i, c)], constant: 0.0 }
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&o.terms);
        Self { terms, constant: self.constant + o.constant }.compact()
    }
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }
    pub fn scale(&self, c: f64) -> Self {
        Self { terms: self.terms.iter().map(|&(i, a)| (i, a * c)).collect(), constant: self.constant * c }
    }
    pub fn plus_const(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }
    pub fn plus_term(mut self, i: usize, c: f64) -> Self {
        self.terms.push((i, c));
        self.compact()
    }
    /// Merges repeated variables and drops zero coefficients.
    pub fn compact(self) -> Self {
        let mut m: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, a) in self.terms {
            *m.entry(i).or_insert(0.0) += a;
        }
        Self { terms: m.into_iter().filter(|&(_, a)| a != 0.0).collect(), constant: self.constant }
    }
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, a)| a * x[i]).sum::<f64>()
    }
    pub fn max_var(&self) -> Option<usize> {
        self.terms.iter().map(|t| t.0).max()
    }
}

/// Complex affine expression with real and imaginary parts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CExpr {
    pub re: LinExpr,
    pub im: LinExpr,
}

impl CExpr {
    pub fn real(re: LinExpr) -> Self {
        Self { re, im: LinExpr::default() }
    }
    pub fn new(re: LinExpr, im: LinExpr) -> Self {
        Self { re, im }
    }
}

impl LmiScalar for CExpr {
    fn constant(c: Cx) -> Self {
        Self { re: LinExpr::constant(c.re), im: LinExpr::constant(c.im) }
    }
    fn add(&self, o: &Self) -> Self {
        Self { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }
    fn scale(&self, c: Cx) -> Self {
        Self {
            re: self.re.scale(c.re).sub(&self.im.scale(c.im)),
            im: self.re.scale(c.im).add(&self.im.scale(c.re)),
        }
    }
    fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: self.im.scale(-1.0) }
    }
}

/// Row-major real embedding `[[Re, −Im], [Im, Re]]` of a Hermitian matrix
/// of complex expressions.
pub fn embed_hermitian(entries: &[Vec<CExpr>]) -> Vec<LinExpr> {
    let n = entries.len();
    let mut out = Vec::with_capacity(4 * n * n);
    for i in 0..2 * n {
        for j in 0..2 * n {
            let e = match (i < n, j < n) {
                (true, true) => entries[i][j].re.clone(),
                (true, false) => entries[i][j - n].im.scale(-1.0),
                (false, true) => entries[i - n][j].im.clone(),
                (false, false) => entries[i - n][j - n].re.clone(),
            };
            out.push(e);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cone {
    /// Every row equals zero.
    Zero,
    /// Every row is nonnegative.
    NonNeg,
    /// `rows[0] ≥ ‖rows[1..]‖`.
    SecondOrder,
    /// `2·rows[0]·rows[1] ≥ ‖rows[2..]‖²`, `rows[0], rows[1] ≥ 0`.
    RotatedSecondOrder,
    /// `n×n` symmetric matrix given row-major in `n²` rows, PSD.
    Psd { n: usize },
    /// `(x, y, z)` with `y·exp(x/y) ≤ z`, `y > 0` (closure).
    Exp,
}

impl Cone {
    fn check_rows(&self, len: usize) -> std::result::Result<(), String> {
        let ok = match *self {
            Cone::Zero | Cone::NonNeg => len >= 1,
            Cone::SecondOrder => len >= 1,
            Cone::RotatedSecondOrder => len >= 2,
            Cone::Psd { n } => n >= 1 && len == n * n,
            Cone::Exp => len == 3,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{self:?} cannot hold {len} rows"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub label: String,
    pub cone: Cone,
    pub rows: Vec<LinExpr>,
    /// Size of the complex Hermitian matrix a PSD block embeds, if any.
    pub hermitian_size: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarBlock {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

/// `maximize objective(x)` subject to every constraint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub n_vars: usize,
    pub blocks: Vec<VarBlock>,
    pub objective: LinExpr,
    pub constraints: Vec<Constraint>,
}

impl ConicProgram {
    pub fn block(&self, name: &str) -> Option<Range<usize>> {
        self.blocks.iter().find(|b| b.name == name).map(|b| b.start..b.start + b.len)
    }

    pub fn n_rows(&self) -> usize {
        self.constraints.iter().map(|c| c.rows.len()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Default)]
pub struct ProgramBuilder {
    program: ConicProgram,
    labels: HashSet<String>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, name: &str, len: usize) -> Result<Range<usize>> {
        if name.is_empty() {
            return Err(Error::Program("empty block name".into()));
        }
        if self.program.blocks.iter().any(|b| b.name == name) {
            return Err(Error::Program(format!("duplicate block {name}")));
        }
        let start = self.program.n_vars;
        self.program.blocks.push(VarBlock { name: name.to_string(), start, len });
        self.program.n_vars += len;
        Ok(start..start + len)
    }

    pub fn n_vars(&self) -> usize {
        self.program.n_vars
    }

    pub fn add(&mut self, label: impl Into<String>, cone: Cone, rows: Vec<LinExpr>) -> Result<()> {
        self.add_with_size(label, cone, rows, None)
    }

    pub fn add_hermitian_psd(&mut self, label: impl Into<String>, entries: &[Vec<CExpr>]) -> Result<()> {
        let n = entries.len();
        self.add_with_size(label, Cone::Psd { n: 2 * n }, embed_hermitian(entries), Some(n))
    }

    fn add_with_size(
        &mut self,
        label: impl Into<String>,
        cone: Cone,
        rows: Vec<LinExpr>,
        hermitian_size: Option<usize>,
    ) -> Result<()> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::Program("empty constraint label".into()));
        }
        if !self.labels.insert(label.clone()) {
            return Err(Error::Program(format!("duplicate constraint {label}")));
        }
        cone.check_rows(rows.len()).map_err(|e| Error::Program(format!("{label}: {e}")))?;
        if let Some(v) = rows.iter().filter_map(LinExpr::max_var).max() {
            if v >= self.program.n_vars {
                return Err(Error::Program(format!("{label}: variable {v} out of range")));
            }
        }
        if rows.iter().any(|r| !r.constant.is_finite() || r.terms.iter().any(|t| !t.1.is_finite())) {
            return Err(Error::Program(format!("{label}: non-finite coefficient")));
        }
        self.program.constraints.push(Constraint { label, cone, rows, hermitian_size });
        Ok(())
    }

    pub fn maximize(&mut self, objective: LinExpr) -> Result<()> {
        if let Some(v) = objective.max_var() {
            if v >= self.program.n_vars {
                return Err(Error::Program(format!("objective variable {v} out of range")));
            }
        }
        self.program.objective = objective;
        Ok(())
    }

    pub fn finish(self) -> ConicProgram {
        self.program
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub tol_feas: f64,
    pub max_iter: u32,
    /// Fraction of the distance to the cone boundary taken per step.
    pub max_step_fraction: f64,
    /// Diagonal rescaling of the constraint matrix before solving.
    pub equilibrate: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_gap_abs: 1e-8,
            tol_gap_rel: 1e-8,
            tol_feas: 1e-8,
            max_iter: 200,
            max_step_fraction: 0.99,
            equilibrate: true,
        }
    }
}

impl SolverSettings {
    pub fn relaxed(&self, factor: f64) -> Self {
        Self {
            tol_gap_abs: self.tol_gap_abs * factor,
            tol_gap_rel: self.tol_gap_rel * factor,
            tol_feas: self.tol_feas * factor,
            ..*self
        }
    }

    /// Shorter steps on the unscaled problem. Slower, but it gets through
    /// iterates where one block has collapsed toward zero.
    pub fn cautious(&self) -> Self {
        Self { max_step_fraction: 0.9, equilibrate: false, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Value of the maximized objective at `x`.
    pub objective: f64,
    pub iterations: u32,
}

fn map_status(s: SolverStatus) -> SolveStatus {
    match s {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::IterationLimit,
        _ => SolveStatus::NumericalFailure,
    }
}

/// Rows in Clarabel's orientation (`s = b − A x ∈ K`).
fn lower_constraint(c: &Constraint) -> (Vec<LinExpr>, SupportedConeT<f64>) {
    let s2 = std::f64::consts::SQRT_2;
    match c.cone {
        Cone::Zero => (c.rows.clone(), SupportedConeT::ZeroConeT(c.rows.len())),
        Cone::NonNeg => (c.rows.clone(), SupportedConeT::NonnegativeConeT(c.rows.len())),
        Cone::SecondOrder => (c.rows.clone(), SupportedConeT::SecondOrderConeT(c.rows.len())),
        Cone::RotatedSecondOrder => {
            let (u, v) = (&c.rows[0], &c.rows[1]);
            let mut rows = vec![u.add(v).scale(1.0 / s2), u.sub(v).scale(1.0 / s2)];
            rows.extend_from_slice(&c.rows[2..]);
            let n = rows.len();
            (rows, SupportedConeT::SecondOrderConeT(n))
        }
        Cone::Psd { n } => {
            let mut rows = Vec::with_capacity(n * (n + 1) / 2);
            for j in 0..n {
                for i in 0..=j {
                    if i == j {
                        rows.push(c.rows[i * n + j].clone());
                    } else {
                        rows.push(c.rows[i * n + j].add(&c.rows[j * n + i]).scale(s2 / 2.0));
                    }
                }
            }
            (rows, SupportedConeT::PSDTriangleConeT(n))
        }
        Cone::Exp => (c.rows.clone(), SupportedConeT::ExponentialConeT()),
    }
}

pub fn solve(program: &ConicProgram, settings: &SolverSettings) -> Result<SolveOutcome> {
    let n = program.n_vars;
    let mut cones = Vec::new();
    let mut trip: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut b = Vec::new();
    for c in &program.constraints {
        let (rows, cone) = lower_constraint(c);
        for r in rows {
            let row = b.len();
            for &(j, a) in &r.terms {
                *trip.entry((j, row)).or_insert(0.0) -= a;
            }
            b.push(r.constant);
        }
        cones.push(cone);
    }
    let m = b.len();
    let (mut ii, mut jj, mut vv) = (Vec::new(), Vec::new(), Vec::new());
    for ((col, row), v) in trip {
        if v != 0.0 {
            ii.push(row);
            jj.push(col);
            vv.push(v);
        }
    }
    let a = CscMatrix::new_from_triplets(m, n, ii, jj, vv);
    let p = CscMatrix::<f64>::zeros((n, n));
    let mut q = vec![0.0; n];
    for &(j, c) in &program.objective.terms {
        q[j] -= c;
    }
    let clarabel_settings = DefaultSettingsBuilder::default()
        .tol_gap_abs(settings.tol_gap_abs)
        .tol_gap_rel(settings.tol_gap_rel)
        .tol_feas(settings.tol_feas)
        .max_iter(settings.max_iter)
        .verbose(false)
        // clique splitting of the sparse embedded LMIs stalls the interior point method
        .chordal_decomposition_enable(false)
        .max_step_fraction(settings.max_step_fraction)
        .equilibrate_enable(settings.equilibrate)
        .build()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, clarabel_settings)
        .map_err(|e| Error::Solver(e.to_string()))?;
    solver.solve();
    let sol = &solver.solution;
    let x = sol.x.clone();
    let objective = program.objective.eval(&x);
    Ok(SolveOutcome { status: map_status(sol.status), x, objective, iterations: sol.iterations })
}

/// Largest violation of one constraint at `x` (0 when satisfied).
pub fn constraint_violation(c: &Constraint, x: &[f64]) -> f64 {
    let v: Vec<f64> = c.rows.iter().map(|r| r.eval(x)).collect();
    let viol = match c.cone {
        Cone::Zero => v.iter().fold(0.0f64, |a, e| a.max(e.abs())),
        Cone::NonNeg => v.iter().fold(0.0f64, |a, e| a.max(-e)),
        Cone::SecondOrder => v[1..].iter().map(|e| e * e).sum::<f64>().sqrt() - v[0],
        Cone::RotatedSecondOrder => {
            let s2 = std::f64::consts::SQRT_2;
            let (t, r) = ((v[0] + v[1]) / s2, (v[0] - v[1]) / s2);
            (r * r + v[2..].iter().map(|e| e * e).sum::<f64>()).sqrt() - t
        }
        Cone::Psd { n } => {
            let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (v[i * n + j] + v[j * n + i]));
            -symmetric_eigenvalues(&m)[0]
        }
        Cone::Exp => {
            let (a, y, z) = (v[0], v[1], v[2]);
            if y > 1e-300 {
                let e = y * (a / y).exp() - z;
                if e.is_finite() {
                    e
                } else {
                    f64::INFINITY
                }
            } else {
                a.max(-z).max(-y)
            }
        }
    };
    viol.max(0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    pub per_constraint: Vec<(String, f64)>,
    pub max: f64,
}

pub fn check_solution(program: &ConicProgram, x: &[f64]) -> Result<Residuals> {
    if x.len() != program.n_vars {
        return Err(Error::Dimension(format!("point has {} entries, program has {}", x.len(), program.n_vars)));
    }
    let per_constraint: Vec<(String, f64)> =
        program.constraints.iter().map(|c| (c.label.clone(), constraint_violation(c, x))).collect();
    let max = per_constraint.iter().fold(0.0f64, |a, (_, v)| a.max(*v));
    Ok(Residuals { per_constraint, max })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub n_vars: usize,
    pub n_rows: usize,
    pub zero_rows: usize,
    pub nonneg_rows: usize,
    pub soc: usize,
    pub rotated_soc: usize,
    pub exp: usize,
    /// Real sizes of PSD blocks.
    pub psd_real_sizes: Vec<usize>,
    /// Complex sizes of PSD blocks that embed a Hermitian matrix.
    pub psd_hermitian_sizes: Vec<usize>,
}

pub fn census(program: &ConicProgram) -> Census {
    let mut c = Census { n_vars: program.n_vars, n_rows: program.n_rows(), ..Default::default() };
    for k in &program.constraints {
        match k.cone {
            Cone::Zero => c.zero_rows += k.rows.len(),
            Cone::NonNeg => c.nonneg_rows += k.rows.len(),
            Cone::SecondOrder => c.soc += 1,
            Cone::RotatedSecondOrder => c.rotated_soc += 1,
            Cone::Exp => c.exp += 1,
            Cone::Psd { n } => {
                c.psd_real_sizes.push(n);
                if let Some(h) = k.hermitian_size {
                    c.psd_hermitian_sizes.push(h);
                }
            }
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(p: &ConicProgram) -> SolveOutcome {
        let s = solve(p, &SolverSettings::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        s
    }

    #[test]
    fn psd_max_eigen_bound() {
        // max t s.t. diag(1, 2) − tI ⪰ 0
        let mut b = ProgramBuilder::new();
        let t = b.add_block("t", 1).unwrap().start;
        let rows = vec![
            LinExpr::constant(1.0).plus_term(t, -1.0),
            LinExpr::constant(0.0),
            LinExpr::constant(0.0),
            LinExpr::constant(2.0).plus_term(t, -1.0),
        ];
        b.add("psd", Cone::Psd { n: 2 }, rows).unwrap();
        b.maximize(LinExpr::var(t)).unwrap();
        let p = b.finish();
        let s = opt(&p);
        assert!((s.x[0] - 1.0).abs() < 1e-6);
        assert!(check_solution(&p, &s.x).unwrap().max < 1e-7);
    }

    #[test]
    fn rotated_cone_and_exp_cone() {
        // max x s.t. 2·(1/2)·4 ≥ x²  →  x = 2
        let mut b = ProgramBuilder::new();
        let x = b.add_block("x", 1).unwrap().start;
        b.add("rsoc", Cone::RotatedSecondOrder, vec![LinExpr::constant(0.5), LinExpr::constant(4.0), LinExpr::var(x)])
            .unwrap();
        b.maximize(LinExpr::var(x)).unwrap();
        let s = opt(&b.finish());
        assert!((s.x[0] - 2.0).abs() < 1e-6);

        // max q s.t. exp(q) ≤ 3
        let mut b = ProgramBuilder::new();
        let q = b.add_block("q", 1).unwrap().start;
        b.add("exp", Cone::Exp, vec![LinExpr::var(q), LinExpr::constant(1.0), LinExpr::constant(3.0)]).unwrap();
        b.maximize(LinExpr::var(q)).unwrap();
        let s = opt(&b.finish());
        assert!((s.x[0] - 3f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn hermitian_embedding_matches_complex_eigenvalues() {
        // max t s.t. [[2, i],[−i, 2]] − tI ⪰ 0  →  t = 1
        let mut b = ProgramBuilder::new();
        let t = b.add_block("t", 1).unwrap().start;
        let tt = LinExpr::var(t);
        let e = vec![
            vec![CExpr::real(LinExpr::constant(2.0).sub(&tt)), CExpr::new(LinExpr::default(), LinExpr::constant(1.0))],
            vec![CExpr::new(LinExpr::default(), LinExpr::constant(-1.0)), CExpr::real(LinExpr::constant(2.0).sub(&tt))],
        ];
        b.add_hermitian_psd("lmi", &e).unwrap();
        b.maximize(tt).unwrap();
        let p = b.finish();
        assert_eq!(census(&p).psd_hermitian_sizes, vec![2]);
        assert_eq!(census(&p).psd_real_sizes, vec![4]);
        let s = opt(&p);
        assert!((s.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut b = ProgramBuilder::new();
        let x = b.add_block("x", 1).unwrap().start;
        b.add("lo", Cone::NonNeg, vec![LinExpr::var(x).plus_const(-2.0)]).unwrap();
        b.add("hi", Cone::NonNeg, vec![LinExpr::term(x, -1.0).plus_const(1.0)]).unwrap();
        b.maximize(LinExpr::var(x)).unwrap();
        assert_eq!(solve(&b.finish(), &SolverSettings::default()).unwrap().status, SolveStatus::Infeasible);

        let mut b = ProgramBuilder::new();
        let x = b.add_block("x", 1).unwrap().start;
        b.add("lo", Cone::NonNeg, vec![LinExpr::var(x)]).unwrap();
        b.maximize(LinExpr::var(x)).unwrap();
        assert_eq!(solve(&b.finish(), &SolverSettings::default()).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn builder_rejects_bad_input() {
        let mut b = ProgramBuilder::new();
        b.add_block("x", 2).unwrap();
        assert!(b.add_block("x", 1).is_err());
        assert!(b.add("", Cone::NonNeg, vec![LinExpr::var(0)]).is_err());
        assert!(b.add("e", Cone::Exp, vec![LinExpr::var(0)]).is_err());
        assert!(b.add("p", Cone::Psd { n: 2 }, vec![LinExpr::var(0); 3]).is_err());
        assert!(b.add("r", Cone::NonNeg, vec![LinExpr::var(5)]).is_err());
        b.add("ok", Cone::NonNeg, vec![LinExpr::var(1)]).unwrap();
        assert!(b.add("ok", Cone::NonNeg, vec![LinExpr::var(1)]).is_err());
    }

    #[test]
    fn violation_examples() {
        let c = Constraint {
            label: "s".into(),
            cone: Cone::SecondOrder,
            rows: vec![LinExpr::var(0), LinExpr::var(1), LinExpr::var(2)],
            hermitian_size: None,
        };
        assert_eq!(constraint_violation(&c, &[5.0, 3.0, 4.0]), 0.0);
        assert!((constraint_violation(&c, &[4.0, 3.0, 4.0]) - 1.0).abs() < 1e-12);
        let e = Constraint { cone: Cone::Exp, ..c.clone() };
        assert_eq!(constraint_violation(&e, &[0.0, 1.0, 1.0]), 0.0);
        assert!(constraint_violation(&e, &[1.0, 1.0, 1.0]) > 1.7);
        assert_eq!(constraint_violation(&e, &[-1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn linexpr_compacts() {
        let e = LinExpr::var(0).add(&LinExpr::term(0, -1.0)).plus_term(2, 3.0);
        assert_eq!(e.terms, vec![(2, 3.0)]);
        assert_eq!(e.eval(&[1.0, 1.0, 2.0]), 6.0);
    }
}

