//! Dense convex QP solver for box-bounded, equality-constrained problems.
//!
//! Minimizes `0.5 z'Qz + c'z` subject to `Az = b` and `lower <= z <= upper`
//! with a primal-dual interior-point method (Mehrotra predictor-corrector,
//! fraction-to-boundary steps, merit-safeguarded updates). Newton systems
//! are solved by dense symmetric factorization of the regularized reduced
//! KKT matrix.
//!
//! The quadratic term can be given either as an explicit dense matrix or in
//! the paired-difference form `0.5 (z1 - z2)' K (z1 - z2)` over a split
//! `z = (z1, z2)`. The paired form is singular by construction; the solver
//! factors only the `m x m` coupling matrix per iteration, which is what
//! makes slab-SVM training at a few thousand samples practical.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("quadratic term is not symmetric (relative deviation {deviation:.3e})")]
    AsymmetricQ { deviation: f64 },
    #[error("lower bound exceeds upper bound at index {index}")]
    InvalidBounds { index: usize },
    #[error("bounds must be finite and boxes must have positive width at index {index}")]
    DegenerateBox { index: usize },
    #[error("no feasible point: box-projected equality residual {residual:.3e}")]
    Infeasible { residual: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Quadratic term of a QP.
#[derive(Debug, Clone)]
pub enum QuadTerm {
    /// Explicit dense symmetric positive-semidefinite matrix.
    Dense(DMatrix<f64>),
    /// `Q = [[K, -K], [-K, K]]` over `z = (z1, z2)`, i.e. the quadratic form
    /// `0.5 (z1 - z2)' K (z1 - z2)`. `K` must be symmetric PSD.
    PairedDifference { coupling: DMatrix<f64> },
}

impl QuadTerm {
    pub fn dim(&self) -> usize {
        match self {
            QuadTerm::Dense(q) => q.nrows(),
            QuadTerm::PairedDifference { coupling } => 2 * coupling.nrows(),
        }
    }

    pub fn mul_vec(&self, z: &DVector<f64>) -> DVector<f64> {
        match self {
            QuadTerm::Dense(q) => q * z,
            QuadTerm::PairedDifference { coupling } => {
                let m = coupling.nrows();
                let diff = DVector::from_fn(m, |i, _| z[i] - z[m + i]);
                let w = coupling * diff;
                let mut out = DVector::zeros(2 * m);
                for i in 0..m {
                    out[i] = w[i];
                    out[m + i] = -w[i];
                }
                out
            }
        }
    }

    fn mean_diagonal(&self) -> f64 {
        match self {
            QuadTerm::Dense(q) => q.diagonal().mean(),
            QuadTerm::PairedDifference { coupling } => coupling.diagonal().mean(),
        }
    }
}

/// Convex QP with box bounds and linear equality constraints.
#[derive(Debug, Clone)]
pub struct QpProblem {
    q: QuadTerm,
    c: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl QpProblem {
    /// Validates dimensions and bounds; a dense quadratic term is checked
    /// for symmetry within 1e-12 relative tolerance and symmetrized.
    pub fn new(
        q: QuadTerm,
        c: DVector<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        lower: DVector<f64>,
        upper: DVector<f64>,
    ) -> Result<Self, QpError> {
        let n = q.dim();
        if c.len() != n || lower.len() != n || upper.len() != n {
            return Err(QpError::Dimension(format!(
                "n = {n} but c/lower/upper have lengths {}/{}/{}",
                c.len(),
                lower.len(),
                upper.len()
            )));
        }
        if a.nrows() != b.len() || (a.nrows() > 0 && a.ncols() != n) {
            return Err(QpError::Dimension(format!(
                "equality block is {}x{} with rhs length {}",
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        let q = match q {
            QuadTerm::Dense(m) => QuadTerm::Dense(symmetrize(m)?),
            QuadTerm::PairedDifference { coupling } => QuadTerm::PairedDifference {
                coupling: symmetrize(coupling)?,
            },
        };
        for i in 0..n {
            if !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(QpError::DegenerateBox { index: i });
            }
            if lower[i] > upper[i] {
                return Err(QpError::InvalidBounds { index: i });
            }
            if upper[i] - lower[i] <= 0.0 {
                return Err(QpError::DegenerateBox { index: i });
            }
        }
        Ok(Self {
            q,
            c,
            a,
            b,
            lower,
            upper,
        })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn p(&self) -> usize {
        self.b.len()
    }

    pub fn quad(&self) -> &QuadTerm {
        &self.q
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&self.q.mul_vec(z)) + self.c.dot(z)
    }
}

fn symmetrize(m: DMatrix<f64>) -> Result<DMatrix<f64>, QpError> {
    if m.nrows() != m.ncols() {
        return Err(QpError::Dimension(format!(
            "quadratic term is {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.amax().max(1e-300);
    let mut max_dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            max_dev = max_dev.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if max_dev / scale > 1e-12 {
        return Err(QpError::AsymmetricQ {
            deviation: max_dev / scale,
        });
    }
    let mt = m.transpose();
    Ok((m + mt) * 0.5)
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Max-norm target for all KKT residuals.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Diagonal regularization added to Q during factorization.
    /// `None` selects `1e-10 x mean diagonal of Q`.
    pub ridge: Option<f64>,
    /// Fraction-to-boundary step scaling in (0, 1).
    pub step_fraction: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100,
            ridge: None,
            step_fraction: 0.995,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), QpError> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(QpError::InvalidConfig(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(QpError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if let Some(r) = self.ridge {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(QpError::InvalidConfig(format!(
                    "ridge {r} must be nonnegative"
                )));
            }
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(QpError::InvalidConfig(format!(
                "step_fraction {} must lie in (0, 1)",
                self.step_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub equality_multipliers: DVector<f64>,
    pub bound_multipliers_lower: DVector<f64>,
    pub bound_multipliers_upper: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Running best of the duality-gap surrogate after each iteration,
    /// including the starting point; non-increasing by construction.
    pub merit_history: Vec<f64>,
}

/// Max-norm KKT residuals of a candidate solution.
#[derive(Debug, Clone, Copy)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal_equality: f64,
    pub bound_violation: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal_equality)
            .max(self.bound_violation)
            .max(self.complementarity)
    }
}

/// Evaluates the KKT residuals of `solution` against `problem`.
pub fn kkt_residuals(problem: &QpProblem, solution: &QpSolution) -> Result<KktResiduals, QpError> {
    let n = problem.n();
    let p = problem.p();
    if solution.z.len() != n
        || solution.bound_multipliers_lower.len() != n
        || solution.bound_multipliers_upper.len() != n
        || solution.equality_multipliers.len() != p
    {
        return Err(QpError::Dimension(
            "solution dimensions do not match problem".into(),
        ));
    }
    let z = &solution.z;
    let lam_l = &solution.bound_multipliers_lower;
    let lam_u = &solution.bound_multipliers_upper;
    let mut stat = problem.q.mul_vec(z) + &problem.c - lam_l + lam_u;
    if p > 0 {
        stat += problem.a.transpose() * &solution.equality_multipliers;
    }
    let primal_equality = if p > 0 {
        (&problem.a * z - &problem.b).amax()
    } else {
        0.0
    };
    let mut bound_violation: f64 = 0.0;
    let mut complementarity: f64 = 0.0;
    for i in 0..n {
        bound_violation = bound_violation
            .max(problem.lower[i] - z[i])
            .max(z[i] - problem.upper[i])
            .max(-lam_l[i])
            .max(-lam_u[i]);
        complementarity = complementarity
            .max((lam_l[i] * (z[i] - problem.lower[i])).abs())
            .max((lam_u[i] * (problem.upper[i] - z[i])).abs());
    }
    Ok(KktResiduals {
        stationarity: stat.amax(),
        primal_equality,
        bound_violation: bound_violation.max(0.0),
        complementarity,
    })
}

/// Cholesky with escalating jitter; PSD inputs plus a positive diagonal
/// shift occasionally fail by rounding alone.
fn robust_cholesky(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, QpError> {
    let scale = m.diagonal().amax().max(1e-300);
    let mut jitter = 0.0;
    for _ in 0..8 {
        let mut shifted = m.clone();
        if jitter > 0.0 {
            for i in 0..shifted.nrows() {
                shifted[(i, i)] += jitter;
            }
        }
        match Cholesky::new(shifted) {
            Some(c) => return Ok(c),
            None => {
                jitter = if jitter == 0.0 {
                    scale * 1e-12
                } else {
                    jitter * 100.0
                };
            }
        }
    }
    Err(QpError::Numerical("cholesky failed after jitter".into()))
}

/// One factorization of `H = Q + diag(d) + ridge I`, reused by the
/// predictor and corrector solves of a single iteration.
enum HFactor {
    Dense(Cholesky<f64, Dyn>),
    Paired {
        chol: Cholesky<f64, Dyn>,
        d1: DVector<f64>,
        d2: DVector<f64>,
    },
}

impl HFactor {
    fn new(q: &QuadTerm, d: &DVector<f64>, ridge: f64) -> Result<Self, QpError> {
        match q {
            QuadTerm::Dense(qm) => {
                let mut h = qm.clone();
                for i in 0..h.nrows() {
                    h[(i, i)] += d[i] + ridge;
                }
                Ok(HFactor::Dense(robust_cholesky(h)?))
            }
            QuadTerm::PairedDifference { coupling } => {
                let m = coupling.nrows();
                let d1 = DVector::from_fn(m, |i, _| d[i] + ridge);
                let d2 = DVector::from_fn(m, |i, _| d[m + i] + ridge);
                // Block elimination of H = [[K+D1, -K], [-K, K+D2]] reduces
                // to K + F with F = D1 D2 / (D1 + D2), computed in harmonic
                // form: the product overflows once the barrier terms blow up
                // near convergence.
                let mut kf = coupling.clone();
                for i in 0..m {
                    kf[(i, i)] += 1.0 / (1.0 / d1[i] + 1.0 / d2[i]);
                }
                Ok(HFactor::Paired {
                    chol: robust_cholesky(kf)?,
                    d1,
                    d2,
                })
            }
        }
    }

    fn solve(&self, r: &DVector<f64>) -> DVector<f64> {
        match self {
            HFactor::Dense(chol) => chol.solve(r),
            HFactor::Paired { chol, d1, d2 } => {
                let m = d1.len();
                let r1 = r.rows(0, m);
                let r2 = r.rows(m, m);
                // g = (r1 + r2) / D2, then solve (K + F) u = r1 - F g,
                // x1 = (u + g) D2 / (D1 + D2), x2 = x1 - u.
                let mut rhs = DVector::zeros(m);
                let mut g = DVector::zeros(m);
                for i in 0..m {
                    g[i] = (r1[i] + r2[i]) / d2[i];
                    let f = 1.0 / (1.0 / d1[i] + 1.0 / d2[i]);
                    rhs[i] = r1[i] - f * g[i];
                }
                let u = chol.solve(&rhs);
                let mut out = DVector::zeros(2 * m);
                for i in 0..m {
                    // d2 / (d1 + d2) written to stay finite when either
                    // barrier term is huge.
                    let x1 = (u[i] + g[i]) / (1.0 + d1[i] / d2[i]);
                    out[i] = x1;
                    out[m + i] = x1 - u[i];
                }
                out
            }
        }
    }
}

/// Factorization of the reduced KKT system `[H A'; A 0]` via the Schur
/// complement over the (small) equality block.
struct KktFactor<'a> {
    h: HFactor,
    a: &'a DMatrix<f64>,
    /// `H^{-1} A'`, one column per equality row.
    h_inv_at: Vec<DVector<f64>>,
    schur_lu: Option<nalgebra::LU<f64, Dyn, Dyn>>,
}

impl<'a> KktFactor<'a> {
    fn new(q: &QuadTerm, d: &DVector<f64>, ridge: f64, a: &'a DMatrix<f64>) -> Result<Self, QpError> {
        let h = HFactor::new(q, d, ridge)?;
        let p = a.nrows();
        let mut h_inv_at = Vec::with_capacity(p);
        for k in 0..p {
            let col = DVector::from_fn(a.ncols(), |i, _| a[(k, i)]);
            h_inv_at.push(h.solve(&col));
        }
        let schur_lu = if p > 0 {
            let mut s = DMatrix::zeros(p, p);
            for k in 0..p {
                for l in 0..p {
                    let row = a.row(k).transpose();
                    s[(k, l)] = row.dot(&h_inv_at[l]);
                }
            }
            Some(s.lu())
        } else {
            None
        };
        Ok(Self {
            h,
            a,
            h_inv_at,
            schur_lu,
        })
    }

    /// Solves `H dz + A' dy = r_top`, `A dz = r_eq`.
    fn solve(&self, r_top: &DVector<f64>, r_eq: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>), QpError> {
        let p = self.a.nrows();
        let hinv_r = self.h.solve(r_top);
        if p == 0 {
            return Ok((hinv_r, DVector::zeros(0)));
        }
        let rhs = DVector::from_fn(p, |k, _| self.a.row(k).transpose().dot(&hinv_r) - r_eq[k]);
        let dy = self
            .schur_lu
            .as_ref()
            .expect("schur factor present when p > 0")
            .solve(&rhs)
            .ok_or_else(|| QpError::Numerical("singular equality Schur complement".into()))?;
        let mut dz = hinv_r;
        for k in 0..p {
            dz -= &self.h_inv_at[k] * dy[k];
        }
        Ok((dz, dy))
    }
}

/// Largest step in `[0, 1]` keeping `x + alpha dx >= 0` componentwise.
fn max_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    let mut alpha: f64 = 1.0;
    for i in 0..x.len() {
        if dx[i] < 0.0 {
            alpha = alpha.min(-x[i] / dx[i]);
        }
    }
    alpha
}

struct Iterate {
    z: DVector<f64>,
    y: DVector<f64>,
    lam_l: DVector<f64>,
    lam_u: DVector<f64>,
}

impl Iterate {
    fn slacks(&self, problem: &QpProblem) -> (DVector<f64>, DVector<f64>) {
        (&self.z - &problem.lower, &problem.upper - &self.z)
    }

    fn residuals(&self, problem: &QpProblem) -> (DVector<f64>, DVector<f64>) {
        let mut r_d = problem.q.mul_vec(&self.z) + &problem.c - &self.lam_l + &self.lam_u;
        if problem.p() > 0 {
            r_d += problem.a.transpose() * &self.y;
        }
        let r_p = if problem.p() > 0 {
            &problem.a * &self.z - &problem.b
        } else {
            DVector::zeros(0)
        };
        (r_d, r_p)
    }

    /// Duality-gap surrogate. Residual norms stay out of the merit: the
    /// predictor-corrector direction is not a descent direction for them,
    /// and with a feasible start they contract on their own.
    fn merit(&self, problem: &QpProblem) -> f64 {
        let (s_l, s_u) = self.slacks(problem);
        (s_l.dot(&self.lam_l) + s_u.dot(&self.lam_u)) / (2 * problem.n()) as f64
    }

    /// Largest KKT residual, with the stationarity part scaled relative to
    /// the gradient magnitude: an absolute test never fires on problems
    /// whose quadratic term carries a large constant offset.
    fn kkt_max(&self, problem: &QpProblem) -> f64 {
        let (s_l, s_u) = self.slacks(problem);
        let (r_d, r_p) = self.residuals(problem);
        let grad_scale = 1.0 + (problem.q.mul_vec(&self.z) + &problem.c).amax();
        let rp_norm = if r_p.is_empty() {
            0.0
        } else {
            r_p.amax() / (1.0 + problem.b.amax())
        };
        let mut comp: f64 = 0.0;
        for i in 0..problem.n() {
            comp = comp
                .max((s_l[i] * self.lam_l[i]).abs())
                .max((s_u[i] * self.lam_u[i]).abs());
        }
        (r_d.amax() / grad_scale).max(rp_norm).max(comp)
    }
}

/// Feasible strictly-interior starting point: box midpoint projected onto
/// `Az = b` by least squares, clamped, then pushed off the bounds.
fn initial_point(problem: &QpProblem, tol: f64) -> Result<DVector<f64>, QpError> {
    let n = problem.n();
    let p = problem.p();
    let mid = DVector::from_fn(n, |i, _| 0.5 * (problem.lower[i] + problem.upper[i]));
    let mut z = mid;
    if p > 0 {
        // Alternating projections between the affine set and the box; one
        // least-squares step rarely lands inside the box on skewed
        // constraints, but the composition converges whenever the
        // intersection is nonempty.
        let aat = (&problem.a * problem.a.transpose()).lu();
        let feas_tol = tol.max(1e-10) * (1.0 + problem.b.amax());
        let mut resid = f64::INFINITY;
        for _ in 0..200 {
            let rhs = &problem.b - &problem.a * &z;
            let w = aat
                .solve(&rhs)
                .ok_or_else(|| QpError::Numerical("rank-deficient equality constraints".into()))?;
            z += problem.a.transpose() * w;
            for i in 0..n {
                z[i] = z[i].clamp(problem.lower[i], problem.upper[i]);
            }
            resid = (&problem.a * &z - &problem.b).amax();
            if resid <= feas_tol {
                break;
            }
        }
        if resid > tol.max(1e-8) * (1.0 + problem.b.amax()) {
            return Err(QpError::Infeasible { residual: resid });
        }
    } else {
        for i in 0..n {
            z[i] = z[i].clamp(problem.lower[i], problem.upper[i]);
        }
    }
    for i in 0..n {
        let push = 1e-3 * (problem.upper[i] - problem.lower[i]);
        z[i] = z[i].clamp(problem.lower[i] + push, problem.upper[i] - push);
    }
    Ok(z)
}

/// Solves the QP. Returns `Err(QpError::Infeasible)` when no feasible point
/// exists; hitting the iteration budget returns the best iterate with
/// `SolveStatus::MaxIterations`, never a silent success.
pub fn solve(problem: &QpProblem, config: &SolverConfig) -> Result<QpSolution, QpError> {
    config.validate()?;
    let n = problem.n();
    let p = problem.p();
    let ridge = config
        .ridge
        .unwrap_or_else(|| 1e-10 * problem.q.mean_diagonal().abs().max(1e-300));
    let tau = config.step_fraction;

    let z0 = initial_point(problem, config.tolerance)?;
    // Least-squares equality multipliers shrink the initial stationarity
    // residual, which otherwise dwarfs the gap when Q has a large mean.
    let y0 = if p > 0 {
        let grad = problem.q.mul_vec(&z0) + &problem.c;
        let aat = &problem.a * problem.a.transpose();
        aat.lu()
            .solve(&(-(&problem.a * grad)))
            .unwrap_or_else(|| DVector::zeros(p))
    } else {
        DVector::zeros(0)
    };
    let mut it = Iterate {
        z: z0,
        y: y0,
        lam_l: DVector::from_element(n, 1.0),
        lam_u: DVector::from_element(n, 1.0),
    };
    let mut merit_history = vec![it.merit(problem)];
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIterations;

    for iter in 0..config.max_iterations {
        iterations = iter;
        if it.kkt_max(problem) <= config.tolerance {
            status = SolveStatus::Converged;
            break;
        }

        let (s_l, s_u) = it.slacks(problem);
        let (r_d, r_p) = it.residuals(problem);
        let mu = (s_l.dot(&it.lam_l) + s_u.dot(&it.lam_u)) / (2 * n) as f64;

        let d = DVector::from_fn(n, |i, _| it.lam_l[i] / s_l[i] + it.lam_u[i] / s_u[i]);
        let factor = KktFactor::new(&problem.q, &d, ridge, &problem.a)?;
        let neg_rp = -&r_p;

        // Predictor: pure Newton step toward complementarity zero.
        let r_top_aff = -&r_d - &it.lam_l + &it.lam_u;
        let (dz_aff, _dy_aff) = factor.solve(&r_top_aff, &neg_rp)?;
        let dlam_l_aff =
            DVector::from_fn(n, |i, _| (-s_l[i] * it.lam_l[i] - it.lam_l[i] * dz_aff[i]) / s_l[i]);
        let dlam_u_aff =
            DVector::from_fn(n, |i, _| (-s_u[i] * it.lam_u[i] + it.lam_u[i] * dz_aff[i]) / s_u[i]);

        let alpha_p_aff = max_step(&s_l, &dz_aff).min(max_step(&s_u, &(-&dz_aff)));
        let alpha_d_aff = max_step(&it.lam_l, &dlam_l_aff).min(max_step(&it.lam_u, &dlam_u_aff));
        let mut mu_aff = 0.0;
        for i in 0..n {
            mu_aff += (s_l[i] + alpha_p_aff * dz_aff[i]) * (it.lam_l[i] + alpha_d_aff * dlam_l_aff[i]);
            mu_aff += (s_u[i] - alpha_p_aff * dz_aff[i]) * (it.lam_u[i] + alpha_d_aff * dlam_u_aff[i]);
        }
        mu_aff /= (2 * n) as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector with centering and second-order term.
        let target = sigma * mu;
        let rhs_l = DVector::from_fn(n, |i, _| {
            target - s_l[i] * it.lam_l[i] - dz_aff[i] * dlam_l_aff[i]
        });
        let rhs_u = DVector::from_fn(n, |i, _| {
            target - s_u[i] * it.lam_u[i] + dz_aff[i] * dlam_u_aff[i]
        });
        let r_top = DVector::from_fn(n, |i, _| -r_d[i] + rhs_l[i] / s_l[i] - rhs_u[i] / s_u[i]);
        let (dz, dy) = factor.solve(&r_top, &neg_rp)?;
        let dlam_l = DVector::from_fn(n, |i, _| (rhs_l[i] - it.lam_l[i] * dz[i]) / s_l[i]);
        let dlam_u = DVector::from_fn(n, |i, _| (rhs_u[i] + it.lam_u[i] * dz[i]) / s_u[i]);

        let alpha_p = (tau * max_step(&s_l, &dz).min(max_step(&s_u, &(-&dz)))).min(1.0);
        let alpha_d =
            (tau * max_step(&it.lam_l, &dlam_l).min(max_step(&it.lam_u, &dlam_u))).min(1.0);

        let cand = Iterate {
            z: &it.z + &dz * alpha_p,
            y: &it.y + &dy * alpha_d,
            lam_l: &it.lam_l + &dlam_l * alpha_d,
            lam_u: &it.lam_u + &dlam_u * alpha_d,
        };
        if !cand.z.iter().all(|v| v.is_finite()) || !cand.y.iter().all(|v| v.is_finite()) {
            // Keep the last finite iterate instead of stepping into NaNs.
            break;
        }
        // The predictor-corrector step is taken at the fraction-to-boundary
        // length without a line search; the gap can rise transiently while
        // the dual residual is being repaired, so the history records the
        // running best.
        let merit_old = *merit_history.last().expect("merit history is non-empty");
        let m = cand.merit(problem);
        it = cand;
        merit_history.push(m.min(merit_old));
    }

    if status != SolveStatus::Converged && it.kkt_max(problem) <= config.tolerance {
        status = SolveStatus::Converged;
        iterations = config.max_iterations;
    }
    if !it.z.iter().all(|v| v.is_finite()) {
        return Err(QpError::Numerical("iterate diverged".into()));
    }

    Ok(QpSolution {
        objective: problem.objective(&it.z),
        z: it.z,
        equality_multipliers: it.y,
        bound_multipliers_lower: it.lam_l,
        bound_multipliers_upper: it.lam_u,
        iterations,
        status,
        merit_history,
    })
}
