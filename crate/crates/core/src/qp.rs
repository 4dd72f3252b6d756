//! Box-constrained convex quadratic programming.
//!
//! Minimizes `½ xᵀHx + cᵀx` subject to `lower ≤ x ≤ upper`, where `H` is
//! symmetric positive semidefinite. The SVM-family duals have no equality
//! constraints (features carry an appended bias coordinate), so a box is
//! all the solver has to handle.
//!
//! Each outer iteration runs a projected-path search along the negative
//! gradient, a cyclic coordinate-descent sweep, and a Newton-type step on
//! the variables strictly inside the box. The first two identify the
//! active bounds; the last gives fast convergence once they are found. No
//! step increases the objective.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{axpy, dot, factor_psd, Matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("objective is unbounded below along coordinate {0}")]
    Unbounded(usize),
    #[error(
        "no convergence after {} iterations (KKT residual {:e})",
        .0.iterations,
        .0.kkt_residual
    )]
    NotConverged(Box<QpSolution>),
}

/// Quadratic term of a [`QpProblem`].
#[derive(Debug, Clone, PartialEq)]
pub enum Hessian {
    /// Explicit symmetric matrix.
    Dense(Matrix),
    /// `H[i][j] = ⟨fᵢ, fⱼ⟩` for the rows `fᵢ` of the factor (N × k). Linear
    /// kernel duals have this form with `k` equal to the feature dimension.
    Gram(Matrix),
}

impl Hessian {
    pub fn dim(&self) -> usize {
        match self {
            Hessian::Dense(h) => h.rows(),
            Hessian::Gram(f) => f.rows(),
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        match self {
            Hessian::Dense(h) => h.diag(),
            Hessian::Gram(f) => (0..f.rows()).map(|i| dot(f.row(i), f.row(i))).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Hessian::Dense(h) => h.mul_vec(x).expect("dimension checked at construction"),
            Hessian::Gram(f) => {
                let v = f.tr_mul_vec(x).expect("dimension checked at construction");
                f.mul_vec(&v).expect("dimension checked at construction")
            }
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Hessian::Dense(h) => h.clone(),
            Hessian::Gram(f) => Matrix::from_fn(f.rows(), f.rows(), |i, j| dot(f.row(i), f.row(j))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    hessian: Hessian,
    linear: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl QpProblem {
    /// Problem with an explicit Hessian. `h` must be symmetric within 1e-12
    /// (relative to its largest entry).
    pub fn new(h: Matrix, linear: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, QpError> {
        if !h.is_square() {
            return Err(QpError::InvalidProblem(format!(
                "hessian is {}x{}, expected square",
                h.rows(),
                h.cols()
            )));
        }
        let scale = h.as_slice().iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if h.max_asymmetry() > 1e-12 * scale {
            return Err(QpError::InvalidProblem(format!(
                "hessian is not symmetric (max asymmetry {:e})",
                h.max_asymmetry()
            )));
        }
        Self::checked(Hessian::Dense(h), linear, lower, upper)
    }

    /// Problem whose Hessian is the Gram matrix of the rows of `factor`.
    pub fn gram(factor: Matrix, linear: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, QpError> {
        Self::checked(Hessian::Gram(factor), linear, lower, upper)
    }

    fn checked(hessian: Hessian, linear: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, QpError> {
        let n = hessian.dim();
        for (name, len) in [("linear", linear.len()), ("lower", lower.len()), ("upper", upper.len())] {
            if len != n {
                return Err(QpError::InvalidProblem(format!(
                    "{name} term has length {len}, expected {n}"
                )));
            }
        }
        let finite = match &hessian {
            Hessian::Dense(h) => h.is_finite(),
            Hessian::Gram(f) => f.is_finite(),
        };
        if !finite || linear.iter().any(|v| !v.is_finite()) {
            return Err(QpError::InvalidProblem("non-finite problem data".into()));
        }
        for i in 0..n {
            if lower[i].is_nan() || upper[i].is_nan() || lower[i] > upper[i] {
                return Err(QpError::InvalidProblem(format!(
                    "box is empty at coordinate {i}: [{}, {}]",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Self {
            hessian,
            linear,
            lower,
            upper,
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn hessian(&self) -> &Hessian {
        &self.hessian
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let hx = self.hessian.mul_vec(x);
        0.5 * dot(x, &hx) + dot(&self.linear, x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.hessian.mul_vec(x);
        axpy(1.0, &self.linear, &mut g);
        g
    }

    /// Largest violation of the box KKT conditions at `x`, given its
    /// gradient `g`.
    pub fn kkt_residual_with(&self, x: &[f64], g: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            let v = if self.lower[i] == self.upper[i] {
                0.0
            } else if x[i] <= self.lower[i] {
                (-g[i]).max(0.0)
            } else if x[i] >= self.upper[i] {
                g[i].max(0.0)
            } else {
                g[i].abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn kkt_residual(&self, x: &[f64]) -> f64 {
        self.kkt_residual_with(x, &self.gradient(x))
    }

    /// Deterministic feasible start: 0 where the lower bound is 0, the box
    /// midpoint where both bounds are finite, otherwise 0 clipped into the box.
    pub fn default_start(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let (lo, hi) = (self.lower[i], self.upper[i]);
                if lo == 0.0 {
                    0.0
                } else if lo.is_finite() && hi.is_finite() {
                    0.5 * (lo + hi)
                } else {
                    0.0f64.clamp(lo, hi)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    /// Outer iteration cap; `None` means `200·N`.
    pub max_iters: Option<usize>,
    /// Feasible starting point; `None` uses [`QpProblem::default_start`].
    pub start: Option<Vec<f64>>,
    /// Record the objective after every outer iteration.
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: None,
            start: None,
            record_history: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// Objective after each outer iteration when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

/// Iterate plus whatever is needed to read gradient entries cheaply.
struct State<'a> {
    problem: &'a QpProblem,
    x: Vec<f64>,
    /// Dense: the full gradient `Hx + c`. Gram: `Fᵀx`.
    aux: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(problem: &'a QpProblem, x: Vec<f64>) -> Self {
        let aux = match &problem.hessian {
            Hessian::Dense(_) => problem.gradient(&x),
            Hessian::Gram(f) => f.tr_mul_vec(&x).expect("dimension checked"),
        };
        Self { problem, x, aux }
    }

    fn refresh(&mut self) {
        *self = Self::new(self.problem, std::mem::take(&mut self.x));
    }

    #[inline]
    fn grad_at(&self, i: usize) -> f64 {
        match &self.problem.hessian {
            Hessian::Dense(_) => self.aux[i],
            Hessian::Gram(f) => dot(f.row(i), &self.aux) + self.problem.linear[i],
        }
    }

    fn gradient(&self) -> Vec<f64> {
        match &self.problem.hessian {
            Hessian::Dense(_) => self.aux.clone(),
            Hessian::Gram(f) => {
                let mut g = f.mul_vec(&self.aux).expect("dimension checked");
                axpy(1.0, &self.problem.linear, &mut g);
                g
            }
        }
    }

    #[inline]
    fn move_coordinate(&mut self, i: usize, delta: f64) {
        self.x[i] += delta;
        match &self.problem.hessian {
            Hessian::Dense(h) => axpy(delta, h.row(i), &mut self.aux),
            Hessian::Gram(f) => axpy(delta, f.row(i), &mut self.aux),
        }
    }

    fn objective(&self) -> f64 {
        match &self.problem.hessian {
            Hessian::Dense(_) => {
                // ½xᵀHx + cᵀx = ½xᵀ(g + c)
                0.5 * self
                    .x
                    .iter()
                    .zip(&self.aux)
                    .zip(&self.problem.linear)
                    .map(|((x, g), c)| x * (g + c))
                    .sum::<f64>()
            }
            Hessian::Gram(_) => 0.5 * dot(&self.aux, &self.aux) + dot(&self.problem.linear, &self.x),
        }
    }

    /// One exact-minimization sweep over all coordinates.
    fn coordinate_sweep(&mut self, diag: &[f64]) -> Result<(), QpError> {
        let p = self.problem;
        for i in 0..p.dim() {
            let (lo, hi) = (p.lower[i], p.upper[i]);
            if lo == hi {
                continue;
            }
            let g = self.grad_at(i);
            let target = if diag[i] > 0.0 {
                (self.x[i] - g / diag[i]).clamp(lo, hi)
            } else if g > 0.0 {
                lo
            } else if g < 0.0 {
                hi
            } else {
                self.x[i]
            };
            if !target.is_finite() {
                return Err(QpError::Unbounded(i));
            }
            let delta = target - self.x[i];
            if delta != 0.0 {
                self.move_coordinate(i, delta);
                self.x[i] = target;
            }
        }
        Ok(())
    }

    /// Projected-gradient step: a [`Self::projected_search`] along `−g`
    /// over the coordinates not held at a bound.
    fn projected_gradient_step(&mut self, g: &[f64], diag: &[f64]) -> Result<(), QpError> {
        let p = self.problem;
        let d: Vec<f64> = (0..p.dim())
            .map(|i| {
                let blocked = (self.x[i] <= p.lower[i] && g[i] > 0.0) || (self.x[i] >= p.upper[i] && g[i] < 0.0);
                if blocked || p.lower[i] == p.upper[i] {
                    0.0
                } else {
                    -g[i]
                }
            })
            .collect();
        self.projected_search(g, d, diag)
    }

    /// Moves to the first local minimizer of the objective along the
    /// projected path `P(x + t·d)`, `t ≥ 0`, visiting the breakpoints where
    /// coordinates reach their bounds in order. `d` must not point out of
    /// the box at coordinates already on a bound.
    fn projected_search(&mut self, g: &[f64], mut d: Vec<f64>, diag: &[f64]) -> Result<(), QpError> {
        let p = self.problem;
        let n = p.dim();
        let d0 = d.clone();
        let x0 = self.x.clone();
        let mut breaks = Vec::new();
        for i in 0..n {
            if d[i] > 0.0 {
                breaks.push(((p.upper[i] - x0[i]) / d[i], i));
            } else if d[i] < 0.0 {
                breaks.push(((p.lower[i] - x0[i]) / d[i], i));
            }
        }
        let mut slope = dot(g, &d);
        if breaks.is_empty() || slope >= 0.0 {
            return Ok(());
        }
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let hd = p.hessian.mul_vec(&d);
        let mut curvature = dot(&d, &hd);
        // Gram factor images of the direction and of the displacement
        let (mut fd, mut fz) = match &p.hessian {
            Hessian::Gram(f) => (f.tr_mul_vec(&d).expect("dimension checked"), vec![0.0; f.cols()]),
            Hessian::Dense(_) => (Vec::new(), Vec::new()),
        };
        let mut t_cur = 0.0;
        let mut t_final = None;
        for &(t_b, b) in &breaks {
            if slope >= 0.0 {
                t_final = Some(t_cur);
                break;
            }
            if curvature > 0.0 && t_cur - slope / curvature <= t_b {
                t_final = Some(t_cur - slope / curvature);
                break;
            }
            if t_b.is_infinite() {
                return Err(QpError::Unbounded(b));
            }
            let step = t_b - t_cur;
            slope += step * curvature;
            if let Hessian::Gram(_) = p.hessian {
                axpy(step, &fd, &mut fz);
            }
            t_cur = t_b;
            // freeze coordinate b at its bound
            let (hz_b, hd_b) = match &p.hessian {
                Hessian::Gram(f) => (dot(f.row(b), &fz), dot(f.row(b), &fd)),
                Hessian::Dense(h) => {
                    let z: Vec<f64> = (0..n)
                        .map(|i| (x0[i] + t_cur * d0[i]).clamp(p.lower[i], p.upper[i]) - x0[i])
                        .collect();
                    (dot(h.row(b), &z), dot(h.row(b), &d))
                }
            };
            let db = d[b];
            slope -= (g[b] + hz_b) * db;
            curvature = (curvature - 2.0 * db * hd_b + db * db * diag[b]).max(0.0);
            if let Hessian::Gram(f) = &p.hessian {
                axpy(-db, f.row(b), &mut fd);
            }
            d[b] = 0.0;
        }
        // past the last breakpoint every coordinate sits on a bound
        let t = t_final.unwrap_or(t_cur);
        if !(t > 0.0) {
            return Ok(());
        }
        if !t.is_finite() {
            return Err(QpError::Unbounded(breaks[0].1));
        }
        let f0 = self.objective();
        let candidate: Vec<f64> = (0..n)
            .map(|i| (x0[i] + t * d0[i]).clamp(p.lower[i], p.upper[i]))
            .collect();
        let trial = State::new(p, candidate);
        if trial.objective() <= f0 {
            *self = trial;
        }
        Ok(())
    }

    /// Newton-type step on the face of coordinates strictly inside their
    /// bounds, followed by a [`Self::projected_search`].
    ///
    /// With a Gram factor, `G` = the free rows of `F`: if `−g_F` has a
    /// component `u` in the null space of `Gᵀ`, the objective decreases
    /// linearly along `u` and that ray is searched. Otherwise the step is the
    /// minimum-norm minimizer `−G(GᵀG)⁻²Gᵀg_F` of the face quadratic, or
    /// `−(GGᵀ)⁻¹g_F` when the face has at most as many coordinates as `F`
    /// has columns. Dense Hessians use conjugate gradients instead.
    fn subspace_step(&mut self, g: &[f64], diag: &[f64], cg_tol: f64) -> Result<(), QpError> {
        let p = self.problem;
        let n = p.dim();
        let mut g = g.to_vec();
        // Rays shrink the face by at least one coordinate each. Following
        // several in a row stops the projected-gradient step from reopening
        // the face in between; on large faces one ray per call is cheaper.
        let rank_bound = match &p.hessian {
            Hessian::Gram(f) => f.cols(),
            Hessian::Dense(_) => n,
        };
        for _ in 0..=n {
            let free: Vec<usize> = (0..n).filter(|&i| p.lower[i] < self.x[i] && self.x[i] < p.upper[i]).collect();
            if free.is_empty() {
                return Ok(());
            }
            let g_free: Vec<f64> = free.iter().map(|&i| g[i]).collect();
            if norm_inf(&g_free) <= cg_tol {
                return Ok(());
            }
            let step = match &p.hessian {
                Hessian::Gram(f) => gram_face_step(f, &free, &g_free),
                Hessian::Dense(h) => dense_face_step(h, &free, &g_free, diag, cg_tol),
            };
            let Some(FaceStep { direction, ray }) = step else {
                return Ok(());
            };
            let mut d = vec![0.0; n];
            for (&i, v) in free.iter().zip(direction) {
                d[i] = v;
            }
            let before = self.x.clone();
            self.projected_search(&g, d, diag)?;
            if !ray || self.x == before || free.len() > 2 * rank_bound {
                return Ok(());
            }
            g = self.gradient();
        }
        Ok(())
    }
}

struct FaceStep {
    direction: Vec<f64>,
    /// Zero-curvature descent direction rather than a Newton step.
    ray: bool,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn gram_face_step(f: &Matrix, free: &[usize], g_free: &[f64]) -> Option<FaceStep> {
    let k = f.cols();
    let rows: Vec<&[f64]> = free.iter().map(|&i| f.row(i)).collect();
    if rows.len() <= k {
        // GGᵀ d = −g_F; a singular GGᵀ gets a small ridge, which turns its
        // null directions into long descent steps for the search to cut
        let m = Matrix::from_fn(rows.len(), rows.len(), |a, b| dot(rows[a], rows[b]));
        let ridge = 1e-12 * (m.trace() / rows.len() as f64).max(f64::MIN_POSITIVE);
        let (chol, _) = factor_psd(&m, ridge).ok()?;
        let neg: Vec<f64> = g_free.iter().map(|v| -v).collect();
        return chol.solve(&neg).ok().map(|direction| FaceStep { direction, ray: false });
    }
    let mut m = Matrix::zeros(k, k);
    for r in &rows {
        for a in 0..k {
            if r[a] == 0.0 {
                continue;
            }
            for b in 0..=a {
                m[(a, b)] += r[a] * r[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            m[(b, a)] = m[(a, b)];
        }
    }
    let ridge = 1e-12 * (m.trace() / k as f64).max(f64::MIN_POSITIVE);
    let (chol, _) = factor_psd(&m, ridge).ok()?;
    // v = (GᵀG)⁻¹Gᵀg_F
    let mut gt_g = vec![0.0; k];
    for (r, gi) in rows.iter().zip(g_free) {
        axpy(*gi, r, &mut gt_g);
    }
    let v = chol.solve(&gt_g).ok()?;
    // u = −g_F + Gv, the null-space part of −g_F
    let u: Vec<f64> = rows.iter().zip(g_free).map(|(r, gi)| dot(r, &v) - gi).collect();
    if dot(&u, &u) > 1e-12 * dot(g_free, g_free) {
        return Some(FaceStep { direction: u, ray: true });
    }
    let w = chol.solve(&v).ok()?;
    Some(FaceStep {
        direction: rows.iter().map(|r| -dot(r, &w)).collect(),
        ray: false,
    })
}

fn dense_face_step(h: &Matrix, free: &[usize], g_free: &[f64], diag: &[f64], cg_tol: f64) -> Option<FaceStep> {
    let nf = free.len();
    let scale = free.iter().map(|&i| diag[i]).fold(0.0, f64::max);
    let h_ff = |v: &[f64]| -> Vec<f64> {
        free.iter()
            .map(|&i| {
                let row = h.row(i);
                free.iter().zip(v).map(|(&j, vj)| row[j] * vj).sum()
            })
            .collect()
    };
    let mut r: Vec<f64> = g_free.iter().map(|v| -v).collect();
    let mut rr = dot(&r, &r);
    let mut d = vec![0.0; nf];
    let mut dir = r.clone();
    for _ in 0..nf.min(500) {
        let hp = h_ff(&dir);
        let curvature = dot(&dir, &hp);
        if !(curvature > 1e-10 * scale * dot(&dir, &dir)) {
            // zero-curvature descent direction
            return Some(if dot(&dir, g_free) < 0.0 {
                FaceStep { direction: dir, ray: true }
            } else {
                FaceStep { direction: d, ray: false }
            });
        }
        let a = rr / curvature;
        axpy(a, &dir, &mut d);
        axpy(-a, &hp, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= cg_tol {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (di, ri) in dir.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
    }
    Some(FaceStep { direction: d, ray: false })
}

/// Solves a box-constrained convex QP to projected-gradient KKT residual
/// `tol`.
pub fn solve_box_qp(problem: &QpProblem, opts: &SolverOptions) -> Result<QpSolution, QpError> {
    if !(opts.tol > 0.0) {
        return Err(QpError::InvalidProblem(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let n = problem.dim();
    let start = match &opts.start {
        Some(s) => {
            if s.len() != n {
                return Err(QpError::InvalidProblem(format!(
                    "start has length {}, expected {n}",
                    s.len()
                )));
            }
            s.iter()
                .enumerate()
                .map(|(i, v)| v.clamp(problem.lower[i], problem.upper[i]))
                .collect()
        }
        None => problem.default_start(),
    };
    let max_iters = opts.max_iters.unwrap_or(200 * n.max(1));
    let diag = problem.hessian.diag();
    let mut state = State::new(problem, start);
    let mut history = Vec::new();

    let mut g = state.gradient();
    let mut residual = problem.kkt_residual_with(&state.x, &g);
    let mut iterations = 0;
    while residual > opts.tol && iterations < max_iters {
        iterations += 1;
        state.projected_gradient_step(&g, &diag)?;
        state.coordinate_sweep(&diag)?;
        if iterations % 64 == 0 {
            state.refresh();
        }
        g = state.gradient();
        state.subspace_step(&g, &diag, 0.1 * opts.tol)?;
        g = state.gradient();
        residual = problem.kkt_residual_with(&state.x, &g);
        if opts.record_history {
            history.push(state.objective());
        }
    }

    // final residual from an exact gradient
    state.refresh();
    let g = state.gradient();
    let residual = problem.kkt_residual_with(&state.x, &g);
    let solution = QpSolution {
        objective: state.objective(),
        x: state.x,
        iterations,
        kkt_residual: residual,
        history,
    };
    if residual <= opts.tol {
        Ok(solution)
    } else {
        Err(QpError::NotConverged(Box::new(solution)))
    }
}
