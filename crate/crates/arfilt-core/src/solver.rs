//! Inverse problem: reconstruct the filter polynomial from prescribed
//! covariances.
//!
//! Given the zeroth covariance `a = c(0)`, the first covariance `b = c(e1)`
//! and the dimension `d`, the reconstruction runs in four steps:
//!
//! 1. **feasibility** — a stable filter matching `(a, b)` exists iff
//!    `|b| < (1 - 1/gamma_d) a`, where `gamma_d` is the boundary value of
//!    the normalized zeroth covariance (infinite for `d <= 3`, so the
//!    condition degenerates to `|b| < a` there);
//! 2. **the equation for `c`** — the cross covariance `c = c(e1 - e2)` is
//!    the root of a scalar nonlinear equation balancing the moment identity
//!    against an integral of the spectral density over `d - 2` angles;
//! 3. **moment matrix** — `(a, b, c)` assemble into a structured Hermitian
//!    `(d+1) x (d+1)` matrix which must be positive definite;
//! 4. **recovery** — the filter coefficients follow in closed form from
//!    `(a, b, c)`.
//!
//! For `d = 2` the root is available in closed form (`c = |b|^2 / a`) and
//! step 2 is skipped. Every solve ends with an independent verification:
//! the recovered filter is pushed through the forward series map and the
//! reproduced covariances are compared against the prescribed ones.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::rhs_maineq;
use crate::quadrature::TorusGrid;
use crate::series::{forward_abc, gamma_d, SeriesParams, MAX_DIM};
use crate::specfun::{hyp2f1, hyp2f1_unit_log};

/// Relative accuracy requested from `gamma_d` for feasibility thresholds.
const GAMMA_TOL: f64 = 1e-8;

/// Hypergeometric series tolerance for the `d = 3` closed-form right side.
const HYP_TOL: f64 = 1e-15;

/// Above this argument the direct `d = 3` hypergeometric series is too
/// slow and the right side switches to the expansion around `z = 1`.
const Z_SWITCH: f64 = 0.999;

/// Brent iteration budget for the root of the `c` equation.
const MAX_BRENT_ITER: usize = 200;

/// Scan exponents: candidate offsets `a * 2^k` above the domain edge. The
/// lower end is deep because for `d <= 3` the right side diverges only
/// logarithmically at the edge, so the root approaches it exponentially
/// fast as `|b| / a` grows and can sit within a few ulps of it.
const SCAN_LO: i32 = -50;
const SCAN_HI: i32 = 20;

/// Prescribed covariance data of the inverse problem.
#[derive(Debug, Clone, Copy)]
pub struct CovarianceData {
    /// Number of torus variables, `2..=MAX_DIM`.
    pub dim: usize,
    /// Zeroth covariance `c(0)`; must be positive.
    pub a: f64,
    /// First covariance `c(e1)`; may be complex.
    pub b: Complex64,
}

impl CovarianceData {
    pub fn new(dim: usize, a: f64, b: Complex64) -> Result<Self> {
        if dim < 2 || dim > MAX_DIM {
            return Err(Error::InvalidInput {
                what: format!("dim must be in 2..={MAX_DIM}, got {dim}"),
            });
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidInput { what: format!("a must be positive and finite, got {a}") });
        }
        if !b.re.is_finite() || !b.im.is_finite() {
            return Err(Error::NonFinite { what: "covariance b" });
        }
        Ok(CovarianceData { dim, a, b })
    }

    /// Lower edge of the admissible range for `c`: the root domain is
    /// `c > max(0, (d|b| - a)/(d-1))`, where the mean slope modulus
    /// `|b| / (a + (d-1)c)` stays below `1/d`.
    pub fn c_domain_edge(&self) -> f64 {
        let d = self.dim as f64;
        ((d * self.b.norm() - self.a) / (d - 1.0)).max(0.0)
    }
}

/// Outcome of the feasibility test for prescribed `(a, b)`.
#[derive(Debug, Clone, Copy)]
pub struct Feasibility {
    /// Whether `|b|` lies strictly below the threshold.
    pub feasible: bool,
    /// Largest admissible `|b|` for this `a`: `(1 - 1/gamma_d) a`.
    pub threshold: f64,
    /// `threshold - |b|` (negative when infeasible).
    pub margin: f64,
    /// The constant `gamma_d` (infinite for `d <= 3`).
    pub gamma: f64,
}

/// Decide whether prescribed data admits a stable reconstruction.
pub fn feasibility(data: &CovarianceData) -> Result<Feasibility> {
    let gamma = gamma_d(data.dim, GAMMA_TOL)?.value;
    let threshold = if gamma.is_finite() { (1.0 - 1.0 / gamma) * data.a } else { data.a };
    let margin = threshold - data.b.norm();
    Ok(Feasibility { feasible: margin > 0.0, threshold, margin, gamma })
}

// ---------------------------------------------------------------------------
// The moment matrix.
// ---------------------------------------------------------------------------

/// The structured Hermitian `(d+1) x (d+1)` moment matrix built from
/// `(a, b, c)`: constant diagonal `a`, first row / column `b`, and `c`
/// everywhere else.
#[derive(Debug, Clone, Copy)]
pub struct MomentMatrix {
    pub dim: usize,
    pub a: f64,
    pub b: Complex64,
    pub c: f64,
}

impl MomentMatrix {
    /// Side length, `dim + 1`.
    pub fn size(&self) -> usize {
        self.dim + 1
    }

    /// Matrix entry; row/column indices run over `0..size()`.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < self.size() && j < self.size(), "index out of range");
        if i == j {
            Complex64::new(self.a, 0.0)
        } else if i == 0 {
            self.b.conj()
        } else if j == 0 {
            self.b
        } else {
            Complex64::new(self.c, 0.0)
        }
    }

    /// Dense row-major copy of the matrix.
    pub fn dense(&self) -> Vec<Complex64> {
        let n = self.size();
        (0..n * n).map(|k| self.entry(k / n, k % n)).collect()
    }

    /// Lower-triangular Cholesky factor `L` with `A = L L^H`, or
    /// [`Error::NotPositiveDefinite`] when a pivot fails.
    pub fn cholesky(&self) -> Result<Vec<Complex64>> {
        let n = self.size();
        let a = self.dense();
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut diag = a[j * n + j].re;
            for k in 0..j {
                diag -= l[j * n + k].norm_sqr();
            }
            if !(diag > 0.0) {
                return Err(Error::NotPositiveDefinite { margin: self.min_eigenvalue() });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(l)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// Smallest eigenvalue, exactly: the spectrum is `a - c` with
    /// multiplicity `d - 1` together with the two eigenvalues of the
    /// Hermitian 2x2 block `[[a, sqrt(d) |b|], [sqrt(d) |b|, a + (d-1)c]]`.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim as f64;
        let q = (d - 1.0) * self.c;
        let disc = (q * q + 4.0 * d * self.b.norm_sqr()).sqrt();
        let small = self.a + 0.5 * (q - disc);
        small.min(self.a - self.c)
    }
}

// ---------------------------------------------------------------------------
// The scalar equation for c.
// ---------------------------------------------------------------------------

/// How the right side of the `c` equation was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsMethod {
    /// `d = 2`: algebraic closed form.
    ClosedForm,
    /// `d = 3` with a moderate argument: Gauss hypergeometric series.
    Hypergeometric,
    /// Torus quadrature over `d - 2` angles.
    Quadrature,
}

impl std::fmt::Display for RhsMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RhsMethod::ClosedForm => "closed-form",
            RhsMethod::Hypergeometric => "hypergeometric",
            RhsMethod::Quadrature => "quadrature",
        };
        f.write_str(s)
    }
}

/// Per-dimension quadrature resolution for the right side: starting points
/// per axis and the doubling cap (the grid has `d - 2` axes).
fn quad_range(dim: usize) -> (usize, usize) {
    match dim {
        3 => (256, 16384),
        4 => (128, 2048),
        5 => (32, 256),
        _ => (16, 64),
    }
}

struct RhsValue {
    value: f64,
    method: RhsMethod,
    /// False when the quadrature hit its cap before two grids agreed; the
    /// value is still sign-accurate (it only occurs near the domain edge,
    /// where the right side blows up).
    converged: bool,
}

/// Right side of the `c` equation: the mean over `d - 2` angles of the
/// reciprocal square root attached to the two-variable slice, at mean
/// slope modulus `sigma = |b| / (a + (d-1)c)`.
fn rhs_value(data: &CovarianceData, c: f64, tol: f64) -> Result<RhsValue> {
    let d = data.dim as f64;
    let u = data.a + (d - 1.0) * c;
    let sigma = data.b.norm() / u;
    if data.dim == 2 {
        let r2 = 1.0 - 4.0 * sigma * sigma;
        if r2 <= 0.0 {
            return Err(Error::Domain {
                what: "rhs_value",
                detail: format!("sigma = {sigma} must be below 1/2"),
            });
        }
        return Ok(RhsValue { value: r2.powf(-0.5), method: RhsMethod::ClosedForm, converged: true });
    }
    if data.dim == 3 {
        // eps = 1 - 3 sigma, computed without cancellation: the numerator
        // u - 3|b| = 2 (c - (3|b| - a)/2) is an exact subtraction when c
        // hugs the domain edge (Sterbenz), which is where accuracy matters.
        let edge_raw = (3.0 * data.b.norm() - data.a) / 2.0;
        let eps = 2.0 * (c - edge_raw) / u;
        if eps <= 0.0 {
            return Err(Error::Domain {
                what: "rhs_value",
                detail: format!("sigma = {sigma} must be below 1/3"),
            });
        }
        let s2 = sigma * sigma;
        let one_minus_3s2 = 1.0 - 3.0 * s2;
        // 1 - z factors exactly: 1 - z = (1 - 9 sigma^2) / (1 - 3 sigma^2)^3
        // with 1 - 9 sigma^2 = eps (2 - eps), so the hypergeometric argument
        // keeps full precision all the way to the edge.
        let omz = eps * (2.0 - eps) / one_minus_3s2.powi(3);
        let h = if 1.0 - omz <= Z_SWITCH {
            hyp2f1(1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0 - omz, HYP_TOL)?
        } else {
            hyp2f1_unit_log(1.0 / 3.0, omz, HYP_TOL)?
        };
        return Ok(RhsValue {
            value: h / one_minus_3s2,
            method: RhsMethod::Hypergeometric,
            converged: true,
        });
    }
    // Quadrature with doubling until two successive grids agree.
    let (n0, cap) = quad_range(data.dim);
    let mut n = n0;
    let mut grid = TorusGrid::new(data.dim - 2, n)?;
    let mut prev = rhs_maineq(data.dim, data.a, data.b.norm(), c, &grid)?;
    loop {
        if n >= cap {
            return Ok(RhsValue { value: prev, method: RhsMethod::Quadrature, converged: false });
        }
        n *= 2;
        grid = TorusGrid::new(data.dim - 2, n)?;
        let cur = rhs_maineq(data.dim, data.a, data.b.norm(), c, &grid)?;
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(RhsValue { value: cur, method: RhsMethod::Quadrature, converged: true });
        }
        prev = cur;
    }
}

/// Left side of the `c` equation, `a u / D` with `u = a + (d-1)c` and
/// `D = a u - d |b|^2`.
fn lhs_value(data: &CovarianceData, c: f64) -> Result<f64> {
    let d = data.dim as f64;
    let u = data.a + (d - 1.0) * c;
    let det = data.a * u - d * data.b.norm_sqr();
    if det <= 0.0 {
        return Err(Error::Domain {
            what: "lhs_value",
            detail: format!("block determinant D = {det} must be positive at c = {c}"),
        });
    }
    Ok(data.a * u / det)
}

/// Defining residual `F(c) = lhs(c) - rhs(c)` of the equation for the
/// cross covariance; the solution is its root in `(c_domain_edge, inf)`.
pub fn maineq_residual(data: &CovarianceData, c: f64, tol: f64) -> Result<f64> {
    Ok(lhs_value(data, c)? - rhs_value(data, c, tol)?.value)
}

/// Diagnostics from the root solve for `c`.
#[derive(Debug, Clone, Copy)]
pub struct RootDiagnostics {
    /// Bracket the root was isolated in.
    pub bracket: (f64, f64),
    /// Brent iterations used.
    pub iterations: usize,
    /// Total residual evaluations (scan + refinement).
    pub evaluations: usize,
    /// Additional sign changes seen past the first bracket; analytically
    /// the root is unique, so a nonzero count signals noisy evaluations.
    pub extra_sign_changes: usize,
    /// How the right side was evaluated at the accepted root.
    pub method: RhsMethod,
    /// Residual `|F(c)|` at the accepted root.
    pub residual: f64,
}

/// Brent root refinement on `f` over `[xa, xb]` with `f(xa) = fa`,
/// `f(xb) = fb` of opposite sign. Returns the root, the residual there and
/// the iteration count.
fn brent<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut xa: f64,
    mut xb: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
) -> Result<(f64, f64, usize)> {
    if fa * fb > 0.0 {
        return Err(Error::Internal { what: "brent called without a sign change".into() });
    }
    let mut xc = xb;
    let mut fc = fb;
    let (mut d, mut e) = (xb - xa, xb - xa);
    for iter in 0..MAX_BRENT_ITER {
        if fb * fc > 0.0 {
            xc = xa;
            fc = fa;
            d = xb - xa;
            e = d;
        }
        if fc.abs() < fb.abs() {
            xa = xb;
            xb = xc;
            xc = xa;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * xb.abs() + 0.5 * xtol;
        let xm = 0.5 * (xc - xb);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok((xb, fb, iter));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt inverse quadratic (or secant) interpolation.
            let s = fb / fa;
            let (mut p, mut q) = if xa == xc {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q * (q - r) - (xb - xa) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        xa = xb;
        fa = fb;
        if d.abs() > tol1 {
            xb += d;
        } else {
            xb += if xm >= 0.0 { tol1 } else { -tol1 };
        }
        fb = f(xb)?;
    }
    Err(Error::NonConvergent { what: "brent", iterations: MAX_BRENT_ITER })
}

/// Solve the scalar equation for the cross covariance `c` (for `d >= 3`
/// with `b != 0`): scan a geometric grid above the domain edge for a sign
/// change of the residual, then refine by Brent's method.
pub fn solve_c(data: &CovarianceData, tol: f64) -> Result<(f64, RootDiagnostics)> {
    let edge = data.c_domain_edge();
    let rhs_tol = (tol / 10.0).max(1e-13);
    let mut evaluations = 0usize;

    let mut eval = |c: f64| -> Result<f64> {
        evaluations += 1;
        let rhs = rhs_value(data, c, rhs_tol)?;
        Ok(lhs_value(data, c)? - rhs.value)
    };

    // Candidate points: the edge shifted by a * 2^k; include c = 0 itself
    // when it lies strictly inside the domain, and the first representable
    // point above a positive edge, where boundary-hugging roots live.
    let mut candidates = Vec::with_capacity((SCAN_HI - SCAN_LO + 3) as usize);
    if edge == 0.0 && data.dim as f64 * data.b.norm() < data.a * (1.0 - 1e-14) {
        candidates.push(0.0);
    }
    if edge > 0.0 {
        candidates.push(edge.next_up());
    }
    for k in SCAN_LO..=SCAN_HI {
        candidates.push(edge + data.a * (k as f64).exp2());
    }
    // Guard against offsets that round back onto (or below) the edge, where
    // the residual is undefined; c = 0 on a zero edge is the one valid
    // boundary point.
    candidates.retain(|&c| c > edge || (c == 0.0 && edge == 0.0));
    candidates.dedup();

    let mut bracket = None;
    let mut extra_sign_changes = 0usize;
    let mut prev: Option<(f64, f64)> = None;
    for &c in &candidates {
        let fc = eval(c)?;
        if let Some((cp, fp)) = prev {
            if fp * fc <= 0.0 {
                if bracket.is_none() {
                    bracket = Some((cp, fp, c, fc));
                } else {
                    extra_sign_changes += 1;
                }
            }
        }
        prev = Some((c, fc));
    }
    let (xa, fa, xb, fb) = bracket.ok_or(Error::NoBracket { scanned: candidates.len() })?;

    // Refine to ulp level: Brent is superlinear, so the extra accuracy past
    // the user tolerance costs a handful of evaluations, and boundary-
    // hugging roots (where the residual slope is enormous) need it for the
    // reported residual to be meaningful.
    let xtol = 4.0 * f64::EPSILON * xa.abs().max(xb.abs()).max(f64::MIN_POSITIVE);
    let mut iterations = 0usize;
    let (root, fres, iters) = brent(&mut eval, xa, xb, fa, fb, xtol)?;
    iterations += iters;

    // Report the evaluation route actually used at the root, and insist it
    // converged there (a capped quadrature is tolerable only while
    // scanning, far from the root).
    let at_root = rhs_value(data, root, rhs_tol)?;
    evaluations += 1;
    if !at_root.converged {
        return Err(Error::NonConvergent {
            what: "rhs quadrature at root",
            iterations: quad_range(data.dim).1,
        });
    }
    Ok((
        root,
        RootDiagnostics {
            bracket: (xa, xb),
            iterations,
            evaluations,
            extra_sign_changes,
            method: at_root.method,
            residual: fres.abs(),
        },
    ))
}

// ---------------------------------------------------------------------------
// Recovery and the full solve.
// ---------------------------------------------------------------------------

/// Filter recovered from `(a, b, c)`: `p(z) = p0 + p1 (z1 + ... + zd)`,
/// normalized so that `p0 > 0`.
#[derive(Debug, Clone, Copy)]
pub struct Recovered {
    pub p0: f64,
    pub p1: Complex64,
    /// Normalized slope `s = -p1/p0 = b / (a + (d-1)c)`.
    pub slope: Complex64,
}

/// Closed-form recovery of the filter from the data and the solved cross
/// covariance: the slope is `s = b / (a + (d-1)c)` (invariant under
/// rescaling of the data) and `p0 = sqrt((a + (d-1)c) / D)` restores the
/// overall scale.
pub fn recover_polynomial(data: &CovarianceData, c: f64) -> Result<Recovered> {
    let d = data.dim as f64;
    let u = data.a + (d - 1.0) * c;
    let det = data.a * u - d * data.b.norm_sqr();
    if u <= 0.0 || det <= 0.0 {
        return Err(Error::Domain {
            what: "recover_polynomial",
            detail: format!("requires u = {u} and D = {det} positive"),
        });
    }
    let slope = data.b / u;
    if d * slope.norm() >= 1.0 {
        return Err(Error::UnstableInput { dim: data.dim, modulus: slope.norm() });
    }
    let p0 = (u / det).sqrt();
    Ok(Recovered { p0, p1: -slope * p0, slope })
}

/// Full reconstruction output.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub data: CovarianceData,
    pub feasibility: Feasibility,
    /// Cross covariance solving the scalar equation.
    pub c: f64,
    pub recovered: Recovered,
    pub matrix: MomentMatrix,
    /// Exact smallest eigenvalue of the moment matrix.
    pub min_eigenvalue: f64,
    /// `|F(c)|` at the accepted root (0 for the closed-form paths).
    pub residual_maineq: f64,
    /// Largest relative mismatch between the prescribed covariances and
    /// those reproduced by pushing the recovered filter through the
    /// forward series map. `None` when the recovered slope sits so close
    /// to the stability boundary that the series cannot reach verification
    /// accuracy within its shell budget (the series tail shrinks like
    /// `(d|s|)^(2n)`, so the cost diverges as `d|s|` approaches 1).
    pub residual_forward: Option<f64>,
    /// Root-solve diagnostics; absent on the closed-form paths.
    pub root: Option<RootDiagnostics>,
    /// Human-readable route taken for `c`.
    pub method: &'static str,
}

/// Verify a recovery by the forward map: reproduce `(a, b, c)` from the
/// recovered filter via the series and return the largest relative
/// mismatch. Returns `None` (verification skipped) when the geometric tail
/// ratio `(d|s|)^2` is so close to 1 that the series would need more
/// shells than its budget allows.
fn forward_residual(data: &CovarianceData, c: f64, rec: &Recovered) -> Result<Option<f64>> {
    let params = SeriesParams::new(data.dim, rec.slope)?;
    let q = (data.dim as f64 * rec.slope.norm()).powi(2);
    if q > 0.0 {
        let shells = (params.tol * (1.0 - q)).ln() / q.ln();
        if !shells.is_finite() || shells > params.max_shell as f64 {
            return Ok(None);
        }
    }
    let f = forward_abc(&params)?;
    let scale = 1.0 / (rec.p0 * rec.p0);
    let ra = (f.a * scale - data.a).abs() / data.a;
    let rb = (f.b * scale - data.b).norm() / data.b.norm().max(data.a);
    let rc = (f.c * scale - c).abs() / c.abs().max(data.a);
    Ok(Some(ra.max(rb).max(rc)))
}

/// Reconstruct the filter from prescribed `(dim, a, b)`.
///
/// `tol` controls the root solve and the quadrature of the right side;
/// `1e-12` is a sound default. Errors: [`Error::Infeasible`] when `(a, b)`
/// violates the feasibility condition, [`Error::NoBracket`] /
/// [`Error::NonConvergent`] from the root solve, and
/// [`Error::NotPositiveDefinite`] if the assembled moment matrix fails its
/// definiteness check.
pub fn solve(data: &CovarianceData, tol: f64) -> Result<SolveResult> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput { what: format!("tol must be positive, got {tol}") });
    }
    // Reject out-of-range fields even if the struct was built by hand.
    let data = CovarianceData::new(data.dim, data.a, data.b)?;
    let feas = feasibility(&data)?;
    if !feas.feasible {
        return Err(Error::Infeasible { modulus: data.b.norm(), threshold: feas.threshold });
    }

    let (c, root, residual_maineq, method) = if data.b.norm() == 0.0 {
        // Zero slope: all cross covariances vanish.
        (0.0, None, 0.0, "zero-slope")
    } else if data.dim == 2 {
        // Closed form: the 2x2 corner [[a, b], [conj(b), c]] is singular.
        let c = data.b.norm_sqr() / data.a;
        let res = maineq_residual(&data, c, tol)?.abs();
        (c, None, res, "closed-form")
    } else {
        let (c, diag) = solve_c(&data, tol)?;
        let method = match diag.method {
            RhsMethod::Hypergeometric => "hypergeometric",
            RhsMethod::Quadrature => "quadrature",
            RhsMethod::ClosedForm => "closed-form",
        };
        (c, Some(diag), diag.residual, method)
    };

    let matrix = MomentMatrix { dim: data.dim, a: data.a, b: data.b, c };
    let min_eigenvalue = matrix.min_eigenvalue();
    matrix.cholesky()?;

    let recovered = recover_polynomial(&data, c)?;
    let residual_forward = forward_residual(&data, c, &recovered)?;

    Ok(SolveResult {
        data,
        feasibility: feas,
        c,
        recovered,
        matrix,
        min_eigenvalue,
        residual_maineq,
        residual_forward,
        root,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::fourier_coeff_series;

    fn data_from_slope(dim: usize, slope: Complex64) -> (CovarianceData, f64, f64) {
        let params = SeriesParams::new(dim, slope).unwrap();
        let f = forward_abc(&params).unwrap();
        (CovarianceData::new(dim, f.a, f.b).unwrap(), f.c, slope.norm())
    }

    #[test]
    fn round_trip_d3_real_slopes() {
        for &s in &[0.05, 0.15, 0.3] {
            let slope = Complex64::new(s, 0.0);
            let (data, c_true, _) = data_from_slope(3, slope);
            let out = solve(&data, 1e-12).unwrap();
            let c_err = (out.c - c_true).abs() / c_true.abs().max(1e-30);
            assert!(c_err <= 1e-9, "c mismatch at s={s}: {c_err:e}");
            let s_err = (out.recovered.slope - slope).norm() / s;
            assert!(s_err <= 1e-9, "slope mismatch at s={s}: {s_err:e}");
            assert!(out.min_eigenvalue > 0.0, "matrix PD at s={s}");
            let rf = out.residual_forward.expect("verification ran");
            assert!(rf <= 1e-9, "forward residual at s={s}: {rf:e}");
        }
    }

    #[test]
    fn round_trip_d3_complex_slope() {
        let slope = Complex64::from_polar(0.2, std::f64::consts::PI / 5.0);
        let (data, c_true, _) = data_from_slope(3, slope);
        let out = solve(&data, 1e-12).unwrap();
        assert!((out.c - c_true).abs() <= 1e-10 * c_true.abs(), "c from complex data");
        assert!((out.recovered.slope - slope).norm() <= 1e-10, "complex slope recovered");
        // p0 * (1 - s sum z) reproduces b with the right phase.
        assert!((out.recovered.p1 / out.recovered.p0 + slope).norm() <= 1e-12, "p1 = -s p0");
    }

    #[test]
    fn round_trip_d2_closed_form() {
        for &s in &[0.05, 0.25, 0.45] {
            let slope = Complex64::new(s, 0.0);
            let (data, c_true, _) = data_from_slope(2, slope);
            let out = solve(&data, 1e-12).unwrap();
            assert_eq!(out.method, "closed-form", "d=2 uses the closed form");
            assert!((out.c - c_true).abs() <= 1e-10 * c_true.max(1e-30), "c at s={s}");
            assert!((out.recovered.slope - slope).norm() <= 1e-10, "slope at s={s}");
            assert!(out.residual_maineq <= 1e-12, "identity residual at s={s}");
            // The defining property: the corner 2x2 block is singular.
            let det = data.a * out.c - data.b.norm_sqr();
            assert!(det.abs() <= 1e-14 * data.a * data.a, "rank-one corner block");
        }
    }

    #[test]
    fn round_trip_d4_quadrature() {
        let slope = Complex64::new(0.2, 0.0);
        let (data, c_true, _) = data_from_slope(4, slope);
        let out = solve(&data, 1e-10).unwrap();
        assert_eq!(out.method, "quadrature", "d=4 right side is quadrature");
        assert!((out.c - c_true).abs() <= 1e-7 * c_true.abs(), "c at d=4");
        assert!((out.recovered.slope - slope).norm() <= 1e-7, "slope at d=4");
        let rf = out.residual_forward.expect("verification ran");
        assert!(rf <= 1e-7, "forward residual {rf:e}");
    }

    #[test]
    fn solution_scales_with_the_data() {
        let slope = Complex64::new(0.22, 0.0);
        let (data, _, _) = data_from_slope(3, slope);
        let out1 = solve(&data, 1e-12).unwrap();
        let scaled = CovarianceData::new(3, 7.5 * data.a, 7.5 * data.b).unwrap();
        let out2 = solve(&scaled, 1e-12).unwrap();
        assert!((out2.c - 7.5 * out1.c).abs() <= 1e-8 * out1.c, "c scales linearly");
        assert!(
            (out2.recovered.slope - out1.recovered.slope).norm() <= 1e-9,
            "slope is scale invariant"
        );
        let ratio = out2.recovered.p0 / out1.recovered.p0;
        assert!((ratio - 7.5f64.powf(-0.5)).abs() <= 1e-9, "p0 scales like 1/sqrt");
    }

    #[test]
    fn zero_slope_data_recovers_constant_filter() {
        let data = CovarianceData::new(3, 2.0, Complex64::new(0.0, 0.0)).unwrap();
        let out = solve(&data, 1e-12).unwrap();
        assert_eq!(out.method, "zero-slope");
        assert_eq!(out.c, 0.0, "cross covariance vanishes");
        assert!((out.recovered.p0 - 0.5f64.sqrt()).abs() <= 1e-15, "p0 = a^{{-1/2}}");
        assert_eq!(out.recovered.p1, Complex64::new(0.0, 0.0), "p1 = 0");
        assert!(out.residual_forward.expect("verification ran") <= 1e-14, "trivial forward check");
    }

    #[test]
    fn feasibility_thresholds() {
        let d2 = CovarianceData::new(2, 1.0, Complex64::new(0.5, 0.0)).unwrap();
        let f2 = feasibility(&d2).unwrap();
        assert!(f2.gamma.is_infinite() && f2.threshold == 1.0, "d=2 threshold is a");
        let d3 = CovarianceData::new(3, 2.0, Complex64::new(0.5, 0.0)).unwrap();
        let f3 = feasibility(&d3).unwrap();
        assert!(f3.gamma.is_infinite() && f3.threshold == 2.0, "d=3 threshold is a");
        let d4 = CovarianceData::new(4, 1.0, Complex64::new(0.1, 0.0)).unwrap();
        let f4 = feasibility(&d4).unwrap();
        assert!(
            (f4.threshold - 0.44223867738392864).abs() <= 1e-6,
            "d=4 threshold: got {}",
            f4.threshold
        );
        assert!(f4.feasible && f4.margin > 0.0, "well inside the region");
    }

    #[test]
    fn infeasible_data_is_rejected() {
        // d=2: |b| above a.
        let bad2 = CovarianceData::new(2, 1.0, Complex64::new(1.05, 0.0)).unwrap();
        assert!(matches!(solve(&bad2, 1e-12), Err(Error::Infeasible { .. })));
        // d=4: |b| above the strict (gamma-dependent) threshold but below a.
        let bad4 = CovarianceData::new(4, 1.0, Complex64::new(0.6, 0.0)).unwrap();
        assert!(matches!(solve(&bad4, 1e-12), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn moment_matrix_structure_and_definiteness() {
        let m = MomentMatrix { dim: 3, a: 2.0, b: Complex64::new(0.3, 0.4), c: 0.2 };
        assert_eq!(m.entry(0, 2), Complex64::new(0.3, -0.4), "first row carries conj(b)");
        assert_eq!(m.entry(2, 0), Complex64::new(0.3, 0.4), "first column carries b");
        assert_eq!(m.entry(1, 3), Complex64::new(0.2, 0.0), "off-diagonal carries c");
        assert_eq!(m.entry(2, 2), Complex64::new(2.0, 0.0), "diagonal carries a");
        assert!(m.is_positive_definite(), "comfortably PD matrix accepted");
        assert!(m.min_eigenvalue() > 0.0, "closed-form eigenvalue agrees");
        // Push c above a: the eigenvalue a - c goes negative.
        let bad = MomentMatrix { dim: 3, a: 1.0, b: Complex64::new(0.1, 0.0), c: 1.5 };
        assert!(!bad.is_positive_definite(), "indefinite matrix rejected");
        assert!(bad.min_eigenvalue() < 0.0, "min eigenvalue flags it");
        assert!(matches!(bad.cholesky(), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn cholesky_factor_reproduces_the_matrix() {
        let m = MomentMatrix { dim: 4, a: 1.5, b: Complex64::new(0.2, -0.1), c: 0.12 };
        let l = m.cholesky().unwrap();
        let n = m.size();
        for i in 0..n {
            for j in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    s += l[i * n + k] * l[j * n + k].conj();
                }
                let err = (s - m.entry(i, j)).norm();
                assert!(err <= 1e-14, "L L^H entry ({i},{j}) off by {err:e}");
            }
        }
    }

    #[test]
    fn moment_identity_holds_on_the_solution() {
        // A x = e1 for x = p0^2 * (1, -s, ..., -s).
        let slope = Complex64::from_polar(0.21, -1.3);
        let (data, _, _) = data_from_slope(3, slope);
        let out = solve(&data, 1e-12).unwrap();
        let n = out.matrix.size();
        let p02 = out.recovered.p0 * out.recovered.p0;
        let mut x = vec![-out.recovered.slope * p02; n];
        x[0] = Complex64::new(p02, 0.0);
        for i in 0..n {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += out.matrix.entry(i, j) * x[j];
            }
            let want = if i == 0 { 1.0 } else { 0.0 };
            assert!(
                (row - want).norm() <= 1e-9,
                "moment identity row {i}: got {row}, want {want}"
            );
        }
    }

    #[test]
    fn residual_has_opposite_signs_across_the_root() {
        let (data, c_true, _) = data_from_slope(3, Complex64::new(0.25, 0.0));
        let lo = maineq_residual(&data, 0.5 * c_true, 1e-12).unwrap();
        let hi = maineq_residual(&data, 2.0 * c_true, 1e-12).unwrap();
        assert!(lo < 0.0 && hi > 0.0, "F straddles: F(lo) = {lo:e}, F(hi) = {hi:e}");
        let at = maineq_residual(&data, c_true, 1e-12).unwrap();
        assert!(at.abs() <= 1e-10, "F vanishes at the true c: {at:e}");
    }

    #[test]
    fn d3_rhs_routes_agree() {
        // Same (a, b, c) evaluated through the hypergeometric series and
        // through the slice quadrature. Pick c small enough that sigma is
        // sizeable but z stays below the switch.
        let data = CovarianceData::new(3, 1.3, Complex64::new(0.31, 0.0)).unwrap();
        let c = 0.05;
        let hyp = rhs_value(&data, c, 1e-13).unwrap();
        assert_eq!(hyp.method, RhsMethod::Hypergeometric);
        let grid = TorusGrid::new(1, 4096).unwrap();
        let quad = rhs_maineq(3, data.a, data.b.norm(), c, &grid).unwrap();
        assert!(
            (hyp.value - quad).abs() <= 1e-10 * quad,
            "routes disagree: {} vs {}",
            hyp.value,
            quad
        );
    }

    #[test]
    fn recovered_filter_reproduces_far_coefficients() {
        // Beyond (a, b, c): check a couple of higher-order covariances.
        let slope = Complex64::new(0.28, 0.0);
        let (data, _, _) = data_from_slope(3, slope);
        let out = solve(&data, 1e-12).unwrap();
        let params = SeriesParams::new(3, out.recovered.slope).unwrap();
        let scale = 1.0 / (out.recovered.p0 * out.recovered.p0);
        let truth = SeriesParams::new(3, slope).unwrap();
        for k in [[1i64, 1, 0], [2, 0, 0], [1, 1, 1]] {
            let got = fourier_coeff_series(&params, &k).unwrap() * scale;
            let want = fourier_coeff_series(&truth, &k).unwrap();
            assert!(
                (got - want).norm() <= 1e-9 * want.norm(),
                "coefficient {k:?}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn near_boundary_data_solves_but_skips_series_verification() {
        // |b|/a = 0.9 puts the d=3 root about 1e-10 above the domain edge
        // (the right side diverges only logarithmically there, so the root
        // collapses onto the edge exponentially fast in |b|/a). The solve
        // must still succeed, but the verification series cannot converge
        // for a slope this close to the stability boundary, so it reports
        // that it was skipped.
        let data = CovarianceData::new(3, 1.0, Complex64::new(0.9, 0.0)).unwrap();
        let out = solve(&data, 1e-11).unwrap();
        assert!(out.residual_forward.is_none(), "series verification skipped");
        let ds = 3.0 * out.recovered.slope.norm();
        assert!(ds < 1.0 && ds > 1.0 - 1e-8, "slope hugs the boundary from inside: d|s| = {ds}");
        assert!(out.min_eigenvalue > 0.0, "matrix still positive definite");
        assert!(
            out.residual_maineq.abs() <= 1e-5 * lhs_value(&data, out.c).unwrap(),
            "root residual small relative to the diverging sides: {}",
            out.residual_maineq
        );
    }

    #[test]
    fn sub_resolution_roots_are_reported_not_faked() {
        // At |b|/a = 0.97 the root sits closer to the domain edge than one
        // ulp of the edge itself (the left side is ~33 at the edge, and the
        // right side only reaches that at 1 - 3 sigma ~ 1e-33). No double
        // precision bracket exists; the solver must say so rather than
        // return a point with an O(1) residual.
        let data = CovarianceData::new(3, 1.0, Complex64::new(0.97, 0.0)).unwrap();
        let err = solve(&data, 1e-11).unwrap_err();
        assert!(
            matches!(err, Error::NoBracket { .. }),
            "expected a bracket failure, got {err:?}"
        );
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(CovarianceData::new(1, 1.0, Complex64::new(0.0, 0.0)).is_err());
        assert!(CovarianceData::new(3, 0.0, Complex64::new(0.0, 0.0)).is_err());
        assert!(CovarianceData::new(3, -1.0, Complex64::new(0.0, 0.0)).is_err());
        assert!(CovarianceData::new(3, 1.0, Complex64::new(f64::NAN, 0.0)).is_err());
        let data = CovarianceData::new(3, 1.0, Complex64::new(0.2, 0.0)).unwrap();
        assert!(solve(&data, 0.0).is_err(), "nonpositive tol rejected");
    }
}
