//! Deterministic trapezoidal quadrature on the torus, and the closed
//! two-variable slice formulas it integrates.
//!
//! Fixing all torus variables but two turns `1/|p|^2` into a two-variable
//! spectral density whose low-order Fourier coefficients have closed forms:
//! with `w` the sum of the frozen variables and `q = |1 - s w|^2`, the
//! zeroth coefficient of the slice is `1 / sqrt(q (q - 4 |s|^2))`, and the
//! 3x3 / 4x4 matrices of neighbouring coefficients have explicit inverses
//! built from `q`, `s` and `v = (q + sqrt(q^2 - 4 |s|^2 q)) / 2`. Averaging
//! the slice over the frozen variables recovers full-torus coefficients.
//!
//! All integrals here are means against normalized Haar measure on
//! `[0, 2pi)^m`, evaluated on equispaced product grids: for smooth periodic
//! integrands the trapezoidal rule converges spectrally, and summation is
//! compensated and performed in a fixed lexicographic order so results are
//! bit-for-bit reproducible.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of simultaneously integrated angles.
pub const MAX_GRID_DIMS: usize = 4;
/// Cap on points per axis.
pub const MAX_POINTS_PER_DIM: usize = 1 << 14;
/// Cap on total grid points.
pub const MAX_TOTAL_POINTS: usize = 1 << 26;

/// Equispaced product grid on `[0, 2pi)^dims`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    dims: usize,
    points_per_dim: usize,
}

impl TorusGrid {
    /// A grid with `points_per_dim` equispaced angles per axis.
    /// `dims = 0` is allowed and denotes a single evaluation point (the
    /// empty product); otherwise `points_per_dim` must be even and >= 4.
    pub fn new(dims: usize, points_per_dim: usize) -> Result<Self> {
        if dims > MAX_GRID_DIMS {
            return Err(Error::ResourceLimit {
                what: "torus grid dimensions",
                requested: dims,
                limit: MAX_GRID_DIMS,
            });
        }
        if dims > 0 {
            if points_per_dim < 4 || points_per_dim % 2 != 0 {
                return Err(Error::InvalidInput {
                    what: format!(
                        "points_per_dim must be even and >= 4, got {points_per_dim}"
                    ),
                });
            }
            if points_per_dim > MAX_POINTS_PER_DIM {
                return Err(Error::ResourceLimit {
                    what: "points per grid dimension",
                    requested: points_per_dim,
                    limit: MAX_POINTS_PER_DIM,
                });
            }
            let total = points_per_dim.checked_pow(dims as u32).unwrap_or(usize::MAX);
            if total > MAX_TOTAL_POINTS {
                return Err(Error::ResourceLimit {
                    what: "total grid points",
                    requested: total,
                    limit: MAX_TOTAL_POINTS,
                });
            }
        }
        Ok(TorusGrid { dims, points_per_dim })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn points_per_dim(&self) -> usize {
        self.points_per_dim
    }

    /// Same axes, twice the resolution.
    pub fn doubled(&self) -> Result<Self> {
        TorusGrid::new(self.dims, if self.dims == 0 { 0 } else { self.points_per_dim * 2 })
    }
}

/// Mean of `f` over the grid — the normalized integral
/// `(2 pi)^(-m) * integral of f` for smooth periodic `f`.
///
/// Evaluation order is lexicographic in the grid indices and the
/// accumulation is Kahan-compensated, so the result is deterministic.
/// Returns [`Error::NonFinite`] if any sample is NaN or infinite.
pub fn torus_integral<F: FnMut(&[f64]) -> f64>(mut f: F, grid: &TorusGrid) -> Result<f64> {
    if grid.dims == 0 {
        let v = f(&[]);
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "torus_integral sample" });
        }
        return Ok(v);
    }
    let n = grid.points_per_dim;
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut idx = vec![0usize; grid.dims];
    let mut angles = vec![0.0f64; grid.dims];
    let mut sum = 0.0;
    let mut comp = 0.0;
    let total = n.pow(grid.dims as u32);
    for _ in 0..total {
        for (a, &i) in angles.iter_mut().zip(idx.iter()) {
            *a = step * i as f64;
        }
        let v = f(&angles);
        if !v.is_finite() {
            return Err(Error::NonFinite { what: "torus_integral sample" });
        }
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        // Odometer increment, last axis fastest.
        for ax in (0..grid.dims).rev() {
            idx[ax] += 1;
            if idx[ax] < n {
                break;
            }
            idx[ax] = 0;
        }
    }
    Ok(sum / total as f64)
}

/// Result of a grid-doubling run: the converged value and the resolution
/// that achieved it.
#[derive(Debug, Clone, Copy)]
pub struct Converged {
    pub value: f64,
    pub points_per_dim: usize,
}

/// Evaluate the mean of `f` on grids of doubling resolution until two
/// successive values agree to `tol` (relative to `max(1, |value|)`),
/// starting at `n0` points per axis and capped at `n_cap`.
pub fn torus_integral_converged<F: Fn(&[f64]) -> f64>(
    f: F,
    dims: usize,
    n0: usize,
    tol: f64,
    n_cap: usize,
) -> Result<Converged> {
    if dims == 0 {
        let value = torus_integral(|t| f(t), &TorusGrid::new(0, 0)?)?;
        return Ok(Converged { value, points_per_dim: 0 });
    }
    let mut grid = TorusGrid::new(dims, n0)?;
    let mut prev = torus_integral(|t| f(t), &grid)?;
    loop {
        if grid.points_per_dim * 2 > n_cap {
            return Err(Error::NonConvergent {
                what: "torus_integral_converged",
                iterations: grid.points_per_dim,
            });
        }
        grid = grid.doubled()?;
        let cur = torus_integral(|t| f(t), &grid)?;
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(Converged { value: cur, points_per_dim: grid.points_per_dim });
        }
        prev = cur;
    }
}

// ---------------------------------------------------------------------------
// Two-variable slice formulas.
// ---------------------------------------------------------------------------

/// A two-variable slice of the `d`-variable density: the remaining `d - 2`
/// torus variables are frozen and enter only through their sum `w`.
#[derive(Debug, Clone, Copy)]
pub struct SliceParams {
    /// Normalized slope `s` of the polynomial.
    pub slope: Complex64,
    /// Sum of the frozen unimodular variables; `|w| <= d - 2`.
    pub w: Complex64,
}

impl SliceParams {
    /// `q = |1 - s w|^2`.
    fn q(&self) -> f64 {
        (Complex64::new(1.0, 0.0) - self.slope * self.w).norm_sqr()
    }

    /// Checks `q (q - 4 |s|^2) > 0`, the condition for the slice density to
    /// be integrable, and returns `(q, q - 4 |s|^2)`.
    fn checked_q_rad(&self) -> Result<(f64, f64)> {
        let q = self.q();
        let rad = q - 4.0 * self.slope.norm_sqr();
        if !(q > 0.0 && rad > 0.0) {
            return Err(Error::Domain {
                what: "slice formulas",
                detail: format!(
                    "require |1 - s w|^2 > 4 |s|^2; got q = {q}, q - 4|s|^2 = {rad}"
                ),
            });
        }
        Ok((q, rad))
    }
}

/// Zeroth Fourier coefficient of the two-variable slice:
/// `c00(w) = 1 / sqrt(q (q - 4 |s|^2))` with `q = |1 - s w|^2`.
pub fn c00_slice(p: &SliceParams) -> Result<f64> {
    let (q, rad) = p.checked_q_rad()?;
    Ok(1.0 / (q * rad).sqrt())
}

/// The explicit inverse of the 3x3 coefficient matrix
/// `[[c00, c0"-1", c"-1"0], [c01, c00, c"-1"1], [c10, c1"-1", c00]]`
/// of the slice, built from
/// `v = (q + sqrt(q^2 - 4 |s|^2 q)) / 2`:
///
/// ```text
/// [  q                -conj(s)(1-sw)  -conj(s)(1-sw) ]
/// [ -s conj(1-sw)      v               0             ]
/// [ -s conj(1-sw)      0               v             ]
/// ```
pub fn slice_inverse_3(p: &SliceParams) -> Result<[[Complex64; 3]; 3]> {
    let (q, rad) = p.checked_q_rad()?;
    let v = 0.5 * (q + (q * rad).sqrt());
    let one = Complex64::new(1.0, 0.0);
    let u = one - p.slope * p.w;
    let top = -p.slope.conj() * u;
    let left = -p.slope * u.conj();
    let zero = Complex64::ZERO;
    let qc = Complex64::new(q, 0.0);
    let vc = Complex64::new(v, 0.0);
    Ok([[qc, top, top], [left, vc, zero], [left, zero, vc]])
}

/// The explicit inverse of the 4x4 coefficient matrix of the slice
/// (indices `(0,0) .. (1,1)` in the two free variables); the corner entries
/// `(1,4)` and `(4,1)` vanish identically:
///
/// ```text
/// [  q               -conj(s)(1-sw)   -conj(s)(1-sw)    0              ]
/// [ -s conj(1-sw)    |s|^2 + v        |s|^2            -conj(s)(1-sw)  ]
/// [ -s conj(1-sw)    |s|^2            |s|^2 + v        -conj(s)(1-sw)  ]
/// [  0               -s conj(1-sw)    -s conj(1-sw)     q              ]
/// ```
pub fn slice_inverse_4(p: &SliceParams) -> Result<[[Complex64; 4]; 4]> {
    let (q, rad) = p.checked_q_rad()?;
    let v = 0.5 * (q + (q * rad).sqrt());
    let one = Complex64::new(1.0, 0.0);
    let u = one - p.slope * p.w;
    let top = -p.slope.conj() * u;
    let left = -p.slope * u.conj();
    let zero = Complex64::ZERO;
    let qc = Complex64::new(q, 0.0);
    let s2 = Complex64::new(p.slope.norm_sqr(), 0.0);
    let s2v = s2 + v;
    Ok([
        [qc, top, top, zero],
        [left, s2v, s2, top],
        [left, s2, s2v, top],
        [zero, left, left, qc],
    ])
}

/// 3x3 matrix of slice coefficients, obtained by numerically inverting
/// [`slice_inverse_3`]. Row/column layout as documented there: the `(1,1)`
/// entry is `c00(w)`, matching [`c00_slice`].
pub fn coeff_matrix_slice_3(p: &SliceParams) -> Result<[[Complex64; 3]; 3]> {
    gauss_inverse::<3>(slice_inverse_3(p)?)
}

/// 4x4 matrix of slice coefficients (inverse of [`slice_inverse_4`]).
pub fn coeff_matrix_slice_4(p: &SliceParams) -> Result<[[Complex64; 4]; 4]> {
    gauss_inverse::<4>(slice_inverse_4(p)?)
}

/// Zeroth Fourier coefficient for `d = grid.dims() + 2` variables at slope
/// `s`: the average of [`c00_slice`] over the frozen angles,
/// `w(t) = e^(i t1) + ... + e^(i t_(d-2))`. For `d = 2` the grid is
/// zero-dimensional and this reduces to `c00_slice` at `w = 0`.
pub fn c0_general_d(dim: usize, slope: Complex64, grid: &TorusGrid) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidInput {
            what: format!("c0_general_d requires dim >= 2, got {dim}"),
        });
    }
    if grid.dims() != dim - 2 {
        return Err(Error::InvalidInput {
            what: format!("grid has {} dims, need dim - 2 = {}", grid.dims(), dim - 2),
        });
    }
    let modulus = slope.norm();
    if dim as f64 * modulus >= 1.0 {
        return Err(Error::UnstableInput { dim, modulus });
    }
    let mut failure: Option<Error> = None;
    let out = torus_integral(
        |t: &[f64]| {
            let w: Complex64 = t.iter().map(|&x| Complex64::from_polar(1.0, x)).sum();
            match c00_slice(&SliceParams { slope, w }) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        grid,
    );
    match failure {
        Some(e) => Err(e),
        None => out,
    }
}

/// Right-hand side of the defining equation for the mixed coefficient `c`:
/// the average over the frozen angles of `1 / sqrt(g)` with
/// `g = |1 - sigma w|^2 (|1 - sigma w|^2 - 4 sigma^2)` and
/// `sigma = |b| / (a + (d-1) c)`.
///
/// This is exactly [`c0_general_d`] at the real slope `sigma`; the solver
/// matches it against `a (a + (d-1) c) / (a^2 + (d-1) a c - d |b|^2)`.
pub fn rhs_maineq(dim: usize, a: f64, b_modulus: f64, c: f64, grid: &TorusGrid) -> Result<f64> {
    if !(a > 0.0) || !(b_modulus >= 0.0) || !(c >= 0.0) {
        return Err(Error::InvalidInput {
            what: format!("need a > 0, |b| >= 0, c >= 0; got a = {a}, |b| = {b_modulus}, c = {c}"),
        });
    }
    let sigma = b_modulus / (a + (dim as f64 - 1.0) * c);
    if dim as f64 * sigma >= 1.0 {
        return Err(Error::Domain {
            what: "rhs_maineq",
            detail: format!(
                "sigma = |b| / (a + (d-1)c) = {sigma} must be below 1/d = {}",
                1.0 / dim as f64
            ),
        });
    }
    c0_general_d(dim, Complex64::new(sigma, 0.0), grid)
}

// ---------------------------------------------------------------------------
// Small dense complex inversion (Gauss-Jordan with partial pivoting).
// ---------------------------------------------------------------------------

fn gauss_inverse<const N: usize>(m: [[Complex64; N]; N]) -> Result<[[Complex64; N]; N]> {
    let mut a = m;
    let mut inv = [[Complex64::ZERO; N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for col in 0..N {
        let (pivot_row, pivot_norm) = (col..N)
            .map(|r| (r, a[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty range");
        if pivot_norm <= 1e-14 * scale {
            return Err(Error::SingularMatrix { what: "slice coefficient matrix" });
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let p = a[col][col];
        for j in 0..N {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..N {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f == Complex64::ZERO {
                continue;
            }
            for j in 0..N {
                let acj = a[col][j];
                let icj = inv[col][j];
                a[r][j] -= f * acj;
                inv[r][j] -= f * icj;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{fourier_coeff_series, SeriesParams};

    fn assert_close(got: f64, want: f64, rel: f64, what: &str) {
        let err = (got - want).abs() / want.abs().max(1.0);
        assert!(err <= rel, "{what}: got {got}, want {want}, rel err {err:e}");
    }

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trapezoid_exact_on_low_modes() {
        let g = TorusGrid::new(1, 16).unwrap();
        assert_close(torus_integral(|_| 1.0, &g).unwrap(), 1.0, 1e-15, "mean of 1");
        let m = torus_integral(|t| t[0].cos(), &g).unwrap();
        assert!(m.abs() < 1e-15, "mean of cos: {m}");
        // mean of |1 + a e^(it)|^2 = 1 + a^2
        let m = torus_integral(
            |t| (cplx(1.0, 0.0) + 0.5 * Complex64::from_polar(1.0, t[0])).norm_sqr(),
            &g,
        )
        .unwrap();
        assert_close(m, 1.25, 1e-15, "autocorrelation identity");
    }

    #[test]
    fn trapezoid_spectral_accuracy() {
        // mean of 1/(1 - a cos t) = 1/sqrt(1-a^2); already exact to machine
        // precision at modest N for a = 1/2.
        let g = TorusGrid::new(1, 64).unwrap();
        let m = torus_integral(|t| 1.0 / (1.0 - 0.5 * t[0].cos()), &g).unwrap();
        assert_close(m, 2.0 / 3.0_f64.sqrt(), 1e-14, "Poisson-kernel mean");
    }

    #[test]
    fn trapezoid_two_dims_factorizes() {
        let g = TorusGrid::new(2, 32).unwrap();
        let m = torus_integral(
            |t| 1.0 / ((1.0 - 0.3 * t[0].cos()) * (1.0 - 0.5 * t[1].cos())),
            &g,
        )
        .unwrap();
        let want = 1.0 / (1.0 - 0.09f64).sqrt() / (1.0 - 0.25f64).sqrt();
        assert_close(m, want, 1e-13, "product integrand");
    }

    #[test]
    fn torus_integral_flags_nonfinite() {
        let g = TorusGrid::new(1, 8).unwrap();
        let r = torus_integral(|t| 1.0 / t[0], &g); // 1/0 at the first node
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(TorusGrid::new(5, 8), Err(Error::ResourceLimit { .. })));
        assert!(matches!(TorusGrid::new(1, 7), Err(Error::InvalidInput { .. })));
        assert!(matches!(TorusGrid::new(1, 2), Err(Error::InvalidInput { .. })));
        assert!(matches!(TorusGrid::new(4, 512), Err(Error::ResourceLimit { .. })));
        assert!(TorusGrid::new(0, 0).is_ok());
    }

    #[test]
    fn doubling_converges() {
        let c = torus_integral_converged(
            |t: &[f64]| 1.0 / (1.0 - 0.9 * t[0].cos()),
            1,
            8,
            1e-12,
            1 << 14,
        )
        .unwrap();
        assert_close(c.value, 1.0 / (1.0 - 0.81f64).sqrt(), 1e-11, "doubling limit");
        assert!(c.points_per_dim >= 16);
    }

    #[test]
    fn c00_slice_matches_two_variable_density() {
        // At w = 0 the slice is the d = 2 density: c00 = (1 - 4 s^2)^(-1/2).
        let p = SliceParams { slope: cplx(0.25, 0.0), w: Complex64::ZERO };
        assert_close(c00_slice(&p).unwrap(), 2.0 / 3.0_f64.sqrt(), 1e-15, "c00 at w=0");
        // And against the d = 2 series at a complex slope.
        let s = Complex64::from_polar(0.2, 0.6);
        let p = SliceParams { slope: s, w: Complex64::ZERO };
        let sp = SeriesParams::new(2, s).unwrap();
        let want = fourier_coeff_series(&sp, &[0, 0]).unwrap().re;
        assert_close(c00_slice(&p).unwrap(), want, 1e-12, "c00 vs series");
    }

    #[test]
    fn c00_slice_domain_error() {
        // |s| = 0.45, w = 1: q = (1 - 0.45)^2 = 0.3025 < 4 s^2 = 0.81.
        let p = SliceParams { slope: cplx(0.45, 0.0), w: cplx(1.0, 0.0) };
        assert!(matches!(c00_slice(&p), Err(Error::Domain { .. })));
    }

    #[test]
    fn slice_inverse_corner_is_exactly_zero() {
        let p = SliceParams { slope: cplx(0.3, 0.0), w: Complex64::from_polar(1.0, 2.1) };
        let b4 = slice_inverse_4(&p).unwrap();
        assert_eq!(b4[3][0], Complex64::ZERO, "(4,1) entry");
        assert_eq!(b4[0][3], Complex64::ZERO, "(1,4) entry");
    }

    #[test]
    fn coeff_matrix_diagonal_is_c00() {
        for &theta in &[0.0, 0.7, 2.9, 4.4] {
            let p = SliceParams { slope: cplx(0.3, 0.0), w: Complex64::from_polar(1.0, theta) };
            let c00 = c00_slice(&p).unwrap();
            let m3 = coeff_matrix_slice_3(&p).unwrap();
            let m4 = coeff_matrix_slice_4(&p).unwrap();
            for i in 0..3 {
                assert!((m3[i][i].re - c00).abs() <= 1e-12 * c00, "M3 diagonal");
            }
            for i in 0..4 {
                assert!((m4[i][i].re - c00).abs() <= 1e-12 * c00, "M4 diagonal");
            }
        }
    }

    #[test]
    fn coeff_matrix_is_hermitian_and_positive() {
        let p = SliceParams { slope: cplx(0.25, 0.0), w: Complex64::from_polar(1.0, 1.234) };
        let m = coeff_matrix_slice_4(&p).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (m[i][j] - m[j][i].conj()).norm() <= 1e-12,
                    "hermitian at ({i},{j})"
                );
            }
        }
        // Positive definiteness probed with fixed vectors.
        let probes: [[Complex64; 4]; 3] = [
            [cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0)],
            [cplx(1.0, 0.5), cplx(-1.0, 0.25), cplx(0.5, -0.5), cplx(0.0, 1.0)],
            [cplx(0.1, 0.0), cplx(0.2, -0.3), cplx(-0.7, 0.1), cplx(0.4, 0.4)],
        ];
        for z in probes {
            let mut quad = Complex64::ZERO;
            for i in 0..4 {
                for j in 0..4 {
                    quad += z[i].conj() * m[i][j] * z[j];
                }
            }
            assert!(quad.re > 0.0, "quadratic form positive: {quad}");
            assert!(quad.im.abs() <= 1e-12 * quad.re, "quadratic form real: {quad}");
        }
    }

    #[test]
    fn c0_general_matches_series() {
        // d = 3, s = 1/4.
        let g1 = TorusGrid::new(1, 256).unwrap();
        let got = c0_general_d(3, cplx(0.25, 0.0), &g1).unwrap();
        assert_close(got, 1.2871181968439127, 1e-12, "c0 d=3");
        // d = 4, s = 0.2.
        let g2 = TorusGrid::new(2, 64).unwrap();
        let got = c0_general_d(4, cplx(0.2, 0.0), &g2).unwrap();
        assert_close(got, 1.2347073437196596, 1e-12, "c0 d=4");
        // d = 2: zero-dimensional grid.
        let g0 = TorusGrid::new(0, 0).unwrap();
        let got = c0_general_d(2, cplx(0.3, 0.0), &g0).unwrap();
        assert_close(got, 1.25, 1e-15, "c0 d=2");
    }

    #[test]
    fn rhs_matches_lhs_on_consistent_data() {
        // Forward data at d = 3, s = 1/4 satisfies the defining equation:
        // a (a + 2c) / (a^2 + 2ac - 3 b^2) equals the averaged slice value.
        let (a, b, c) = (1.2871181968439127, 0.3828242624585508, 0.1220894264951451);
        let g = TorusGrid::new(1, 512).unwrap();
        let rhs = rhs_maineq(3, a, b, c, &g).unwrap();
        let lhs = a * (a + 2.0 * c) / (a * a + 2.0 * a * c - 3.0 * b * b);
        assert_close(rhs, lhs, 1e-11, "defining equation at the solution");
    }

    #[test]
    fn rhs_domain_error_when_sigma_too_large() {
        let g = TorusGrid::new(1, 64).unwrap();
        // sigma = 0.9 / 1.0, far beyond 1/d: g < 0 somewhere on the circle.
        assert!(matches!(rhs_maineq(3, 1.0, 0.9, 0.0, &g), Err(Error::Domain { .. })));
    }

    #[test]
    fn gauss_inverse_round_trip() {
        let m = [
            [cplx(2.0, 0.0), cplx(0.5, 0.25), cplx(0.0, -1.0)],
            [cplx(0.5, -0.25), cplx(3.0, 0.0), cplx(1.0, 0.5)],
            [cplx(0.0, 1.0), cplx(1.0, -0.5), cplx(4.0, 0.0)],
        ];
        let inv = gauss_inverse::<3>(m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut e = Complex64::ZERO;
                for k in 0..3 {
                    e += m[i][k] * inv[k][j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e - want).norm() <= 1e-13, "product at ({i},{j}): {e}");
            }
        }
        let singular = [
            [cplx(1.0, 0.0), cplx(2.0, 0.0), cplx(3.0, 0.0)],
            [cplx(2.0, 0.0), cplx(4.0, 0.0), cplx(6.0, 0.0)],
            [cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)],
        ];
        assert!(matches!(gauss_inverse::<3>(singular), Err(Error::SingularMatrix { .. })));
    }
}
