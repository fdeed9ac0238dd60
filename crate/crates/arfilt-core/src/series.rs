//! Power-series evaluation of the Fourier coefficients of `1 / |p|^2`,
//! and the exact combinatorial sequences that control feasibility.
//!
//! For a stable `p(z) = p0 (1 - s (z1 + ... + zd))` with `d |s| < 1`, expand
//! `1/p` as a multinomial power series and autocorrelate. The coefficient at
//! a lattice index `k` becomes
//!
//! ```text
//! c(k) = sum_n  |s|^(2n) s^(K+) conj(s)^(K-)
//!        * sum_{n1+...+nd = n} M(n+K+; ni+ki+) * M(n+K-; ni+ki-)
//! ```
//!
//! where `ki+ = max(ki, 0)`, `ki- = max(-ki, 0)`, `K± = sum ki±` and
//! `M(n; ...)` is the multinomial coefficient. All terms share one phase, so
//! the inner double sum is a positive series; truncation is controlled by
//! the envelope `M <= d^(2n + K+ + K-)`, giving a geometric tail with ratio
//! `(d |s|)^2`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest supported number of variables. The cost of one series term grows
/// like `n^(d-1)`, and nothing in this crate has closed forms past `d = 6`.
pub const MAX_DIM: usize = 6;

/// Parameters for the series evaluator.
#[derive(Debug, Clone, Copy)]
pub struct SeriesParams {
    /// Number of torus variables `d >= 1`.
    pub dim: usize,
    /// Normalized slope `s = -p1/p0`; stability requires `dim * |s| < 1`.
    pub slope: Complex64,
    /// Relative truncation tolerance for the envelope tail bound.
    pub tol: f64,
    /// Cap on the outer summation index `n`.
    pub max_shell: usize,
}

impl SeriesParams {
    /// Standard parameters: relative tolerance `1e-12`, shell cap 600.
    pub fn new(dim: usize, slope: Complex64) -> Result<Self> {
        let p = SeriesParams { dim, slope, tol: 1e-12, max_shell: 600 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidInput {
                what: format!("dim must be in 1..={MAX_DIM}, got {}", self.dim),
            });
        }
        if !self.slope.re.is_finite() || !self.slope.im.is_finite() {
            return Err(Error::NonFinite { what: "slope" });
        }
        let modulus = self.slope.norm();
        if self.dim as f64 * modulus >= 1.0 {
            return Err(Error::UnstableInput { dim: self.dim, modulus });
        }
        if !(self.tol > 0.0) || self.max_shell == 0 {
            return Err(Error::InvalidInput {
                what: format!("tol must be positive and max_shell nonzero, got {} / {}", self.tol, self.max_shell),
            });
        }
        Ok(())
    }
}

/// The three prescribed covariances of the inverse problem, as produced by
/// the forward map at a given slope: `a = c(0)`, `b = c(e1)`,
/// `c = c(e1 - e2)`.
#[derive(Debug, Clone, Copy)]
pub struct ForwardData {
    pub a: f64,
    pub b: Complex64,
    pub c: f64,
}

/// Iterator over all compositions of `n` into `d` nonnegative parts.
struct Compositions {
    parts: Vec<usize>,
    total: usize,
    started: bool,
    done: bool,
}

impl Compositions {
    fn new(total: usize, d: usize) -> Self {
        let mut parts = vec![0; d];
        parts[0] = total;
        Compositions { parts, total, started: false, done: false }
    }

    /// Advance to the next composition; returns `false` when exhausted.
    fn next(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.parts);
        }
        let d = self.parts.len();
        if d == 1 || self.parts[d - 1] == self.total {
            self.done = true;
            return None;
        }
        // Move one unit from the leftmost nonzero part to its right
        // neighbour, dumping the remainder back into the first slot.
        let i = self.parts.iter().position(|&p| p > 0).expect("nonzero part exists");
        let t = self.parts[i];
        self.parts[i] = 0;
        self.parts[0] = t - 1;
        self.parts[i + 1] += 1;
        Some(&self.parts)
    }
}

/// Exact multinomial coefficient `n! / (parts[0]! * ... )`, `sum parts = n`.
fn multinomial_exact(n: usize, parts: &[usize]) -> BigUint {
    debug_assert_eq!(parts.iter().sum::<usize>(), n);
    let mut acc = BigUint::one();
    let mut remaining = n;
    for &p in parts {
        acc *= binomial_exact(remaining, p);
        remaining -= p;
    }
    acc
}

/// Exact binomial coefficient via a running product.
fn binomial_exact(n: usize, k: usize) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `T_n(d) = sum over compositions (n1..nd) of n of multinomial(n; ni)^2`,
/// computed exactly. This is the central moment sequence of the
/// `d`-dimensional lattice walk: `T_n(d) d^(-2n)` sums to `gamma_d`.
pub fn multinomial_square_sum(dim: usize, n: usize) -> BigUint {
    assert!(dim >= 1, "dim must be at least 1");
    let mut total = BigUint::zero();
    let mut comps = Compositions::new(n, dim);
    while let Some(parts) = comps.next() {
        let m = multinomial_exact(n, parts);
        total += &m * &m;
    }
    total
}

/// Natural-log factorial table `lnf[i] = ln(i!)`, built by accumulation.
/// Relative error stays below `~n * eps` in the log, i.e. ulp-level in the
/// exponentiated values for the sizes used here.
fn ln_factorial_table(n_max: usize) -> Vec<f64> {
    let mut t = vec![0.0; n_max + 1];
    for i in 1..=n_max {
        t[i] = t[i - 1] + (i as f64).ln();
    }
    t
}

/// Fourier coefficient `c(k)` of `1/|1 - s(z1+...+zd)|^2` by direct series
/// summation. `k` must have length `params.dim`; entries may be any sign.
///
/// The result carries the phase `exp(i arg(s) (K+ - K-))`; for real `s` all
/// coefficients are real. Errors: [`Error::UnstableInput`] when
/// `d |s| >= 1`, [`Error::NonConvergent`] if the envelope tail bound fails
/// to reach `params.tol` within `params.max_shell` terms.
pub fn fourier_coeff_series(params: &SeriesParams, k: &[i64]) -> Result<Complex64> {
    params.validate()?;
    let d = params.dim;
    if k.len() != d {
        return Err(Error::InvalidInput {
            what: format!("index length {} does not match dim {}", k.len(), d),
        });
    }
    let kp: Vec<usize> = k.iter().map(|&x| x.max(0) as usize).collect();
    let km: Vec<usize> = k.iter().map(|&x| (-x).max(0) as usize).collect();
    let kp_sum: usize = kp.iter().sum();
    let km_sum: usize = km.iter().sum();

    let modulus = params.slope.norm();
    if modulus == 0.0 {
        // p = p0 constant: c(0) = 1, everything else 0.
        let is_zero = k.iter().all(|&x| x == 0);
        return Ok(if is_zero { Complex64::new(1.0, 0.0) } else { Complex64::ZERO });
    }
    let ln_s = modulus.ln();
    let q = (d as f64 * modulus).powi(2); // envelope ratio, < 1 by validation
    let ln_d = (d as f64).ln();

    let lnf = ln_factorial_table(params.max_shell + kp_sum.max(km_sum) + 1);

    // Positive-term sum of exp(ln M+ + ln M- + (2n + K+ + K-) ln|s|),
    // Kahan-compensated; the common phase is attached at the end.
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;

    for n in 0..=params.max_shell {
        let ln_pow = (2 * n + kp_sum + km_sum) as f64 * ln_s;
        let mut comps = Compositions::new(n, d);
        while let Some(parts) = comps.next() {
            let mut ln_m = lnf[n + kp_sum] + lnf[n + km_sum];
            for i in 0..d {
                ln_m -= lnf[parts[i] + kp[i]] + lnf[parts[i] + km[i]];
            }
            let x = (ln_m + ln_pow).exp();
            let y = x - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        // Envelope tail: sum_{m > n} M_m |s|^(2m + K) <= (d|s|)^K q^(n+1)/(1-q).
        let ln_tail =
            (kp_sum + km_sum) as f64 * (ln_d + ln_s) + (n + 1) as f64 * q.ln() - (1.0 - q).ln();
        if ln_tail.exp() <= params.tol * sum {
            let phase = params.slope.arg() * (kp_sum as f64 - km_sum as f64);
            return Ok(Complex64::from_polar(sum, phase));
        }
    }
    Err(Error::NonConvergent { what: "fourier_coeff_series", iterations: params.max_shell })
}

/// Forward map: the covariances `(a, b, c)` of the inverse problem at the
/// given slope, i.e. the coefficients at `0`, `e1` and `e1 - e2`. Requires
/// `dim >= 2` (the mixed index needs two variables).
pub fn forward_abc(params: &SeriesParams) -> Result<ForwardData> {
    if params.dim < 2 {
        return Err(Error::InvalidInput {
            what: format!("forward_abc requires dim >= 2, got {}", params.dim),
        });
    }
    let d = params.dim;
    let zero = vec![0i64; d];
    let mut e1 = vec![0i64; d];
    e1[0] = 1;
    let mut e1m2 = vec![0i64; d];
    e1m2[0] = 1;
    e1m2[1] = -1;

    // c(0) and c(e1 - e2) carry no phase (K+ = K- there), so both are real
    // by construction.
    let a = fourier_coeff_series(params, &zero)?.re;
    let b = fourier_coeff_series(params, &e1)?;
    let c = fourier_coeff_series(params, &e1m2)?.re;
    Ok(ForwardData { a, b, c })
}

// ---------------------------------------------------------------------------
// gamma_d: the lattice-walk constant controlling feasibility.
// ---------------------------------------------------------------------------

/// Estimate of `gamma_d = sum_n T_n(d) d^(-2n)` with an inflated residual
/// bound. `value` is `+inf` for `d <= 3` (the sum diverges there).
#[derive(Debug, Clone, Copy)]
pub struct GammaEstimate {
    pub value: f64,
    /// Inflated bound on the residual error of `value` (0 when exact).
    pub bound: f64,
    /// Number of exactly summed terms.
    pub terms: usize,
}

const GAMMA_SAFETY: f64 = 4.0;
const GAMMA_MAX_TERMS: usize = 1 << 16;

/// Scaled term sequence `t_n = T_n(d) / d^(2n)` for `n = 0..=n_max`,
/// computed by splitting the composition sum at `d1 = floor(d/2)`:
/// `T_n(d) = sum_j C(n,j)^2 T_j(d1) T_{n-j}(d2)`. All work happens in log
/// space on positive terms, so there is no cancellation.
fn scaled_walk_terms(dim: usize, n_max: usize) -> Vec<f64> {
    assert!(dim >= 1);
    if dim == 1 {
        return vec![1.0; n_max + 1]; // T_n(1) = 1
    }
    let d1 = dim / 2;
    let d2 = dim - d1;
    let t1 = scaled_walk_terms(d1, n_max);
    let t2 = scaled_walk_terms(d2, n_max);
    let lnf = ln_factorial_table(n_max);
    let (ld1, ld2, ld) = ((d1 as f64).ln(), (d2 as f64).ln(), (dim as f64).ln());
    let mut out = vec![0.0; n_max + 1];
    for (n, slot) in out.iter_mut().enumerate() {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for j in 0..=n {
            let ln_c = lnf[n] - lnf[j] - lnf[n - j];
            let ln_term = 2.0 * ln_c + t1[j].ln() + t2[n - j].ln()
                + 2.0 * (j as f64) * ld1
                + 2.0 * ((n - j) as f64) * ld2
                - 2.0 * (n as f64) * ld;
            let x = ln_term.exp();
            let y = x - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        *slot = sum;
    }
    out
}

/// Tail `sum_{m > n0} m^(-sigma)` by Euler-Maclaurin (three terms; the
/// truncation error is `O(n0^(-sigma-3))`).
fn zeta_tail(sigma: f64, n0: usize) -> f64 {
    let x = (n0 + 1) as f64;
    x.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * x.powf(-sigma)
        + sigma / 12.0 * x.powf(-sigma - 1.0)
}

/// The constant `gamma_d = sum_{n>=0} T_n(d) / d^(2n)`.
///
/// Diverges for `d <= 3` (returned as `+inf` with zero bound). For
/// `d >= 4` the terms behave like `d^(d/2) (4 pi n)^((1-d)/2) (1 + alpha/n)`;
/// the partial sum is corrected by an Euler-Maclaurin tail with the `1/n`
/// coefficient fitted from the computed terms, and doubling continues until
/// the inflated residual bound drops below `tol` (absolute).
pub fn gamma_d(dim: usize, tol: f64) -> Result<GammaEstimate> {
    if dim < 2 || dim > MAX_DIM {
        return Err(Error::InvalidInput {
            what: format!("gamma_d requires 2 <= dim <= {MAX_DIM}, got {dim}"),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput { what: format!("tol must be positive, got {tol}") });
    }
    if dim <= 3 {
        return Ok(GammaEstimate { value: f64::INFINITY, bound: 0.0, terms: 0 });
    }
    let beta = (dim as f64 - 1.0) / 2.0;
    let coef = (dim as f64).powf(dim as f64 / 2.0)
        * (4.0 * std::f64::consts::PI).powf(-beta);

    let mut n = 512;
    while n <= GAMMA_MAX_TERMS {
        let t = scaled_walk_terms(dim, n);
        let mut partial = 0.0;
        let mut comp = 0.0;
        for &x in &t {
            let y = x - comp;
            let s = partial + y;
            comp = (s - partial) - y;
            partial = s;
        }
        // Fit the 1/n correction near n and near n/2; their drift bounds the
        // neglected higher-order terms.
        let alpha_at = |m: usize| -> f64 {
            let a = coef * (m as f64).powf(-beta);
            (t[m] / a - 1.0) * m as f64
        };
        let window = |center: usize| -> f64 {
            let mut s = 0.0;
            for m in center - 4..=center {
                s += alpha_at(m);
            }
            s / 5.0
        };
        let alpha_hi = window(n);
        let alpha_lo = window(n / 2);
        let tail = coef * (zeta_tail(beta, n) + alpha_hi * zeta_tail(beta + 1.0, n));
        let bound = GAMMA_SAFETY
            * coef
            * ((alpha_hi - alpha_lo).abs() * zeta_tail(beta + 1.0, n)
                + alpha_hi.abs() * zeta_tail(beta + 2.0, n));
        if bound <= tol {
            return Ok(GammaEstimate { value: partial + tail, bound, terms: n + 1 });
        }
        n *= 2;
    }
    Err(Error::NonConvergent { what: "gamma_d", iterations: GAMMA_MAX_TERMS })
}

// ---------------------------------------------------------------------------
// The d = 3 walk sequence and its asymptotic ratio.
// ---------------------------------------------------------------------------

/// Exact values `g_0..=g_{n_max}` of the integer sequence defined by
/// `g_0 = 1`, `g_1 = 3` and
///
/// ```text
/// n^2 g_n = (10 n^2 - 10 n + 3) g_{n-1} - 9 (n-1)^2 g_{n-2} .
/// ```
///
/// Every division is checked to be exact; `g_n` equals
/// [`multinomial_square_sum`]`(3, n)`.
pub fn heun_g(n_max: usize) -> Result<Vec<BigUint>> {
    let mut g = Vec::with_capacity(n_max + 1);
    g.push(BigUint::one());
    if n_max >= 1 {
        g.push(BigUint::from(3u32));
    }
    for n in 2..=n_max {
        let nf = n as u64;
        let a = BigUint::from(10 * nf * nf - 10 * nf + 3) * &g[n - 1];
        let b = BigUint::from(9 * (nf - 1) * (nf - 1)) * &g[n - 2];
        if a < b {
            return Err(Error::Internal {
                what: format!("walk recurrence produced a negative value at n = {n}"),
            });
        }
        let num = a - b;
        let den = BigUint::from(nf * nf);
        let (quot, rem) = (&num / &den, &num % &den);
        if !rem.is_zero() {
            return Err(Error::Internal {
                what: format!("walk recurrence division not exact at n = {n}"),
            });
        }
        g.push(quot);
    }
    Ok(g)
}

/// The limit of `n g_n / 9^n`: `3 sqrt(3) / (4 pi)`.
pub fn heun_asymptotic_constant() -> f64 {
    3.0 * 3.0_f64.sqrt() / (4.0 * std::f64::consts::PI)
}

/// Scaled sequence `h_n = g_n / 9^n` by the forward recurrence
/// `n^2 h_n = ((10 n^2 - 10 n + 3) h_{n-1} - (n-1)^2 h_{n-2}) / 9`,
/// which is stable (characteristic roots 1 and 1/9).
fn heun_scaled(n_max: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n_max + 1);
    h.push(1.0);
    if n_max >= 1 {
        h.push(3.0 / 9.0);
    }
    for n in 2..=n_max {
        let nf = n as f64;
        let v = ((10.0 * nf * nf - 10.0 * nf + 3.0) * h[n - 1] - (nf - 1.0) * (nf - 1.0) * h[n - 2])
            / (9.0 * nf * nf);
        h.push(v);
    }
    h
}

/// Raw ratio `f(n) = n g_n / 9^n`, which converges to
/// [`heun_asymptotic_constant`] with an `O(1/n)` error.
pub fn heun_scaled_ratio(n: usize) -> f64 {
    let h = heun_scaled(n);
    n as f64 * h[n]
}

/// Richardson-extrapolated estimate of the limit of `n g_n / 9^n`:
/// `E(n) = n f(n) - (n-1) f(n-1)` cancels the `1/n` error term, leaving
/// `O(1/n^2)`. Requires `n >= 100` for the asymptotic regime.
pub fn heun_asymptotic_estimate(n: usize) -> Result<f64> {
    if n < 100 {
        return Err(Error::InvalidInput {
            what: format!("asymptotic estimate needs n >= 100, got {n}"),
        });
    }
    let h = heun_scaled(n);
    let f_n = n as f64 * h[n];
    let f_p = (n - 1) as f64 * h[n - 1];
    Ok(n as f64 * f_n - (n - 1) as f64 * f_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn assert_close(got: f64, want: f64, rel: f64, what: &str) {
        let err = (got - want).abs() / want.abs().max(1.0);
        assert!(err <= rel, "{what}: got {got}, want {want}, rel err {err:e}");
    }

    fn cplx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn compositions_enumerate_all() {
        let mut c = Compositions::new(4, 3);
        let mut n = 0;
        let mut seen = std::collections::HashSet::new();
        while let Some(p) = c.next() {
            assert_eq!(p.iter().sum::<usize>(), 4);
            seen.insert(p.to_vec());
            n += 1;
        }
        assert_eq!(n, 15, "C(6,2) compositions of 4 into 3 parts");
        assert_eq!(seen.len(), 15, "no duplicates");
    }

    #[test]
    fn multinomial_square_sum_small_values() {
        // d = 1: single composition, multinomial 1.
        assert_eq!(multinomial_square_sum(1, 7), BigUint::from(1u32));
        // d = 2: central binomial, sum_j C(n,j)^2 = C(2n, n).
        assert_eq!(multinomial_square_sum(2, 5), BigUint::from(252u32));
        assert_eq!(multinomial_square_sum(2, 10), binomial_exact(20, 10));
        // d = 3 first values: 1, 3, 15, 93, 639, 4653.
        let want = [1u32, 3, 15, 93, 639, 4653];
        for (n, &w) in want.iter().enumerate() {
            assert_eq!(multinomial_square_sum(3, n), BigUint::from(w), "T_{n}(3)");
        }
    }

    #[test]
    fn series_d1_geometric() {
        // d = 1: c(k) = s^|k| / (1 - s^2) for real s.
        let p = SeriesParams::new(1, cplx(0.4, 0.0)).unwrap();
        let want = 1.0 / (1.0 - 0.16);
        assert_close(fourier_coeff_series(&p, &[0]).unwrap().re, want, 1e-12, "c(0), d=1");
        assert_close(
            fourier_coeff_series(&p, &[3]).unwrap().re,
            0.4f64.powi(3) * want,
            1e-12,
            "c(3), d=1",
        );
    }

    #[test]
    fn series_d3_reference_values() {
        // Frozen values, cross-checked against FFT sampling of 1/|p|^2 and
        // against the closed elliptic form of c(0).
        let p = SeriesParams::new(3, cplx(0.25, 0.0)).unwrap();
        assert_close(
            fourier_coeff_series(&p, &[0, 0, 0]).unwrap().re,
            1.2871181968439127,
            1e-12,
            "c(000)",
        );
        assert_close(
            fourier_coeff_series(&p, &[1, 0, 0]).unwrap().re,
            0.3828242624585508,
            1e-12,
            "c(100)",
        );
        assert_close(
            fourier_coeff_series(&p, &[1, -1, 0]).unwrap().re,
            0.1220894264951451,
            1e-12,
            "c(1,-1,0)",
        );
        assert_close(
            fourier_coeff_series(&p, &[0, 1, 1]).unwrap().re,
            0.2080045514646843,
            1e-12,
            "c(011)",
        );
        assert_close(
            fourier_coeff_series(&p, &[1, 1, -1]).unwrap().re,
            0.0663696809416355,
            1e-12,
            "c(1,1,-1)",
        );
    }

    #[test]
    fn series_d2_closed_form_values() {
        // d = 2, s = 1/4: c(0) = (1 - 4 s^2)^(-1/2) = 2/sqrt(3) * ... and
        // opposite-sign indices decay geometrically with ratio
        // rho = r/2 - sqrt(r^2/4 - 1) at r = 1/s.
        let p = SeriesParams::new(2, cplx(0.25, 0.0)).unwrap();
        let pref = 1.0 / (1.0 - 0.25_f64).sqrt();
        assert_close(fourier_coeff_series(&p, &[0, 0]).unwrap().re, pref, 1e-12, "c(00), d=2");
        let rho = 2.0 - 3.0_f64.sqrt();
        assert_close(
            fourier_coeff_series(&p, &[1, -1]).unwrap().re,
            pref * rho * rho,
            1e-12,
            "c(1,-1), d=2",
        );
    }

    #[test]
    fn series_symmetries() {
        let s = Complex64::from_polar(0.21, 0.7);
        let p = SeriesParams::new(3, s).unwrap();
        let c1 = fourier_coeff_series(&p, &[2, -1, 0]).unwrap();
        // Permutation invariance.
        let c2 = fourier_coeff_series(&p, &[0, 2, -1]).unwrap();
        assert!((c1 - c2).norm() <= 1e-13 * c1.norm(), "permutation symmetry");
        // Negation conjugates.
        let c3 = fourier_coeff_series(&p, &[-2, 1, 0]).unwrap();
        assert!((c1.conj() - c3).norm() <= 1e-13 * c1.norm(), "negation symmetry");
    }

    #[test]
    fn series_zeroth_depends_only_on_modulus_and_grows() {
        let a1 = fourier_coeff_series(&SeriesParams::new(3, cplx(0.2, 0.0)).unwrap(), &[0, 0, 0])
            .unwrap()
            .re;
        let a2 = fourier_coeff_series(
            &SeriesParams::new(3, Complex64::from_polar(0.2, 1.1)).unwrap(),
            &[0, 0, 0],
        )
        .unwrap()
        .re;
        assert_close(a1, a2, 1e-14, "c(0) is a function of |s|");
        let a3 = fourier_coeff_series(&SeriesParams::new(3, cplx(0.3, 0.0)).unwrap(), &[0, 0, 0])
            .unwrap()
            .re;
        assert!(a3 > a1, "c(0) increases with |s|: {a3} <= {a1}");
        assert!(a1 > 1.0, "c(0) > 1 for nonzero slope");
    }

    #[test]
    fn series_moment_equation_rows() {
        // The moment matrix applied to (1, -s, ..., -s) gives e1, i.e.
        //   a - d s conj(b) = 1   and   b - s a - (d-1) s c = 0,
        // for any admissible complex slope.
        for &(dim, modulus, phase) in
            &[(2usize, 0.3, 0.0), (3, 0.25, 0.9), (3, 0.31, -1.3), (4, 0.2, 2.2)]
        {
            let s = Complex64::from_polar(modulus, phase);
            let p = SeriesParams::new(dim, s).unwrap();
            let fd = forward_abc(&p).unwrap();
            let d = dim as f64;
            let row1 = fd.a - d * (s * fd.b.conj()).re;
            assert_close(row1, 1.0, 1e-11, "first moment row");
            let row2 = fd.b - s * fd.a - (d - 1.0) * s * fd.c;
            assert!(row2.norm() <= 1e-11, "second moment row: |{row2}|");
        }
    }

    #[test]
    fn series_rejects_unstable_and_malformed_input() {
        assert!(matches!(
            SeriesParams::new(3, cplx(0.34, 0.0)),
            Err(Error::UnstableInput { .. })
        ));
        let p = SeriesParams::new(3, cplx(0.2, 0.0)).unwrap();
        assert!(matches!(
            fourier_coeff_series(&p, &[0, 0]),
            Err(Error::InvalidInput { .. })
        ));
        assert!(matches!(
            forward_abc(&SeriesParams::new(1, cplx(0.2, 0.0)).unwrap()),
            Err(Error::InvalidInput { .. })
        ));
    }

    #[test]
    fn series_zero_slope() {
        let p = SeriesParams::new(3, cplx(0.0, 0.0)).unwrap();
        assert_eq!(fourier_coeff_series(&p, &[0, 0, 0]).unwrap().re, 1.0);
        assert_eq!(fourier_coeff_series(&p, &[1, 0, 0]).unwrap().norm(), 0.0);
    }

    #[test]
    fn gamma_diverges_below_four() {
        assert!(gamma_d(2, 1e-8).unwrap().value.is_infinite());
        assert!(gamma_d(3, 1e-8).unwrap().value.is_infinite());
    }

    #[test]
    fn gamma_four_reference_value() {
        // Frozen from an independent high-resolution evaluation of the same
        // sum (partial terms to N = 4096 plus Euler-Maclaurin tail).
        let g = gamma_d(4, 1e-8).unwrap();
        assert_close(g.value, 1.792881577571, 5e-9, "gamma_4");
        assert!(g.bound <= 1e-8, "requested bound honoured: {}", g.bound);
    }

    #[test]
    fn gamma_decreases_with_dimension() {
        let g4 = gamma_d(4, 1e-7).unwrap().value;
        let g5 = gamma_d(5, 1e-7).unwrap().value;
        let g6 = gamma_d(6, 1e-7).unwrap().value;
        assert_close(g5, 1.4018456880, 1e-7, "gamma_5");
        assert!(g4 > g5 && g5 > g6 && g6 > 1.0, "gamma_d decreasing toward 1: {g4}, {g5}, {g6}");
    }

    #[test]
    fn scaled_walk_terms_match_exact_sum() {
        for dim in 2..=5usize {
            let t = scaled_walk_terms(dim, 12);
            for n in 0..=12usize {
                let exact = multinomial_square_sum(dim, n).to_f64().unwrap()
                    / (dim as f64).powi(2 * n as i32);
                assert_close(t[n], exact, 1e-12, &format!("t_{n}({dim})"));
            }
        }
    }

    #[test]
    fn heun_matches_exact_walk_sequence() {
        let g = heun_g(30).unwrap();
        for (n, gn) in g.iter().enumerate() {
            assert_eq!(*gn, multinomial_square_sum(3, n), "g_{n} vs T_n(3)");
        }
    }

    #[test]
    fn heun_asymptotics() {
        let c = heun_asymptotic_constant();
        assert_close(c, 0.4134966715663440, 1e-15, "3 sqrt(3) / 4 pi");
        // Raw ratio converges with an O(1/n) error: the scaled error n|f(n)-c|
        // sits near 0.103 and is certainly within (0.01, 1).
        for &n in &[500usize, 1000, 2000] {
            let raw = heun_scaled_ratio(n);
            let scaled_err = (raw - c).abs() * n as f64;
            assert!(
                (0.01..1.0).contains(&scaled_err),
                "raw ratio error at n={n} not O(1/n): {scaled_err}"
            );
        }
        // Richardson extrapolation removes that term.
        let est = heun_asymptotic_estimate(2000).unwrap();
        assert!((est - c).abs() < 1e-7, "extrapolated estimate: {est} vs {c}");
        assert!(matches!(heun_asymptotic_estimate(10), Err(Error::InvalidInput { .. })));
    }

    #[test]
    fn heun_scaled_consistent_with_exact() {
        let g = heun_g(40).unwrap();
        let h = heun_scaled(40);
        for n in (0..=40).step_by(10) {
            let exact = g[n].to_f64().unwrap() / 9.0_f64.powi(n as i32);
            assert_close(h[n], exact, 1e-12, &format!("h_{n}"));
        }
    }
}
