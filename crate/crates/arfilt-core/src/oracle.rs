//! Independent verification oracles.
//!
//! Two additional routes to the same Fourier coefficients, sharing no code
//! with the series, quadrature or closed-form evaluators:
//!
//! * [`fft_coeffs`] samples the spectral density `1/|p|^2` on a uniform
//!   `n^d` grid and takes a discrete Fourier transform — accurate up to an
//!   aliasing error that decays geometrically in `n`;
//! * [`autocorr_coeffs`] expands `1/p` into its absolutely convergent
//!   power series and autocorrelates the coefficients — a direct
//!   convolution with explicit multinomial weights.
//!
//! They exist to cross-check the production evaluators in tests; both are
//! deliberately simple and favor transparency over speed.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::series::MAX_DIM;

/// Hard budget on FFT grid elements (`n^dim`).
pub const MAX_FFT_POINTS: usize = 1 << 26;

/// Hard budget on autocorrelation lattice points per factor.
const MAX_AUTOCORR_TERMS: usize = 1 << 26;

/// All Fourier coefficients of the sampled density on an `n^dim` index
/// grid, with wraparound indexing (index `k` and `k + n` coincide).
#[derive(Debug, Clone)]
pub struct CoeffGrid {
    dim: usize,
    n: usize,
    /// Row-major, last index fastest; entry `m` holds the coefficient with
    /// frequency `m` in DFT ordering.
    values: Vec<Complex64>,
}

impl CoeffGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid points per axis.
    pub fn points_per_dim(&self) -> usize {
        self.n
    }

    /// Coefficient at integer index `k` (any sign; reduced mod `n`).
    /// Meaningful for `|k_i|` well below `n/2`; beyond that the DFT bin
    /// wraps around. Panics if `k.len() != dim`.
    pub fn get(&self, k: &[i64]) -> Complex64 {
        assert_eq!(k.len(), self.dim, "index length must equal dim");
        let n = self.n as i64;
        let mut flat = 0usize;
        for &ki in k {
            flat = flat * self.n + ki.rem_euclid(n) as usize;
        }
        self.values[flat]
    }
}

/// Fourier coefficients of `1/|1 - s (z_1 + ... + z_d)|^2` by sampling on
/// an `n^d` uniform grid and applying a normalized forward DFT along each
/// axis. The result at index `k` approximates the true coefficient with an
/// aliasing error of order `(d |s|)^(n - |k|)`.
pub fn fft_coeffs(dim: usize, slope: Complex64, n: usize) -> Result<CoeffGrid> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidInput { what: format!("dim must be in 1..={MAX_DIM}, got {dim}") });
    }
    if n < 2 {
        return Err(Error::InvalidInput { what: format!("need at least 2 points per axis, got {n}") });
    }
    let modulus = slope.norm();
    if !modulus.is_finite() {
        return Err(Error::NonFinite { what: "slope" });
    }
    if dim as f64 * modulus >= 1.0 {
        return Err(Error::UnstableInput { dim, modulus });
    }
    let mut total = 1usize;
    for _ in 0..dim {
        total = total
            .checked_mul(n)
            .filter(|&t| t <= MAX_FFT_POINTS)
            .ok_or(Error::ResourceLimit {
                what: "fft grid elements",
                requested: usize::MAX,
                limit: MAX_FFT_POINTS,
            })?;
    }

    // Sample the density. Precompute the per-axis phase factors once.
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let phases: Vec<Complex64> =
        (0..n).map(|j| Complex64::from_polar(1.0, step * j as f64)).collect();
    let mut values = vec![Complex64::new(0.0, 0.0); total];
    let mut idx = vec![0usize; dim];
    for v in values.iter_mut() {
        let mut zsum = Complex64::new(0.0, 0.0);
        for &i in &idx {
            zsum += phases[i];
        }
        let p = Complex64::new(1.0, 0.0) - slope * zsum;
        *v = Complex64::new(1.0 / p.norm_sqr(), 0.0);
        // Odometer increment, last axis fastest.
        for t in (0..dim).rev() {
            idx[t] += 1;
            if idx[t] < n {
                break;
            }
            idx[t] = 0;
        }
    }

    // Forward DFT along each axis, then normalize by n^dim so the bins are
    // Fourier coefficients rather than raw DFT sums.
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut lane = vec![Complex64::new(0.0, 0.0); n];
    for t in 0..dim {
        let stride = n.pow((dim - 1 - t) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for i in 0..n {
                    lane[i] = values[base + i * stride];
                }
                fft.process(&mut lane);
                for i in 0..n {
                    values[base + i * stride] = lane[i];
                }
            }
        }
    }
    let norm = 1.0 / total as f64;
    for v in values.iter_mut() {
        *v *= norm;
    }
    Ok(CoeffGrid { dim, n, values })
}

/// Binomial coefficient as a running product.
fn binomial_f64(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Multinomial coefficient `(sum parts)! / prod(parts!)` as a product of
/// binomials.
fn multinomial_f64(parts: &[usize]) -> f64 {
    let mut acc = 1.0f64;
    let mut partial = 0u64;
    for &p in parts {
        partial += p as u64;
        acc *= binomial_f64(partial, p as u64);
    }
    acc
}

/// Fourier coefficient at index `k` by autocorrelating the power-series
/// coefficients of the inverse filter:
///
/// ```text
/// 1 / (1 - s w) = sum_n (s w)^n ,  w = z_1 + ... + z_d ,
/// phi_m = multinomial(|m|; m) s^{|m|} ,
/// c_k = sum_m phi_{k+m} conj(phi_m) ,
/// ```
///
/// with both lattice sums truncated at total degree `degree`. The
/// truncation error decays like `(d|s|)^(2 degree)`.
pub fn autocorr_coeff(dim: usize, slope: Complex64, degree: usize, k: &[i64]) -> Result<Complex64> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::InvalidInput { what: format!("dim must be in 1..={MAX_DIM}, got {dim}") });
    }
    if k.len() != dim {
        return Err(Error::InvalidInput {
            what: format!("index length {} does not match dim {dim}", k.len()),
        });
    }
    let modulus = slope.norm();
    if !modulus.is_finite() {
        return Err(Error::NonFinite { what: "slope" });
    }
    if dim as f64 * modulus >= 1.0 {
        return Err(Error::UnstableInput { dim, modulus });
    }
    // Lattice size check: compositions of degree <= D into d parts.
    let mut lattice = 1usize;
    for i in 1..=dim {
        lattice = lattice
            .checked_mul(degree + i)
            .and_then(|v| v.checked_div(i))
            .filter(|&t| t <= MAX_AUTOCORR_TERMS)
            .ok_or(Error::ResourceLimit {
                what: "autocorrelation lattice points",
                requested: usize::MAX,
                limit: MAX_AUTOCORR_TERMS,
            })?;
    }

    let sbar = slope.conj();
    let mut total = Complex64::new(0.0, 0.0);
    let mut m = vec![0usize; dim];
    loop {
        let deg_m: usize = m.iter().sum();
        if deg_m <= degree {
            // Shifted index k + m must be a valid lattice point of degree
            // at most `degree` as well.
            let mut shifted = Vec::with_capacity(dim);
            let mut ok = true;
            for i in 0..dim {
                let s = k[i] + m[i] as i64;
                if s < 0 {
                    ok = false;
                    break;
                }
                shifted.push(s as usize);
            }
            if ok {
                let deg_s: usize = shifted.iter().sum();
                if deg_s <= degree {
                    let w = multinomial_f64(&shifted) * multinomial_f64(&m);
                    total += w * slope.powu(deg_s as u32) * sbar.powu(deg_m as u32);
                }
            }
        }
        // Odometer over the box [0, degree]^dim; degree filtering above.
        let mut t = dim;
        loop {
            if t == 0 {
                return Ok(total);
            }
            t -= 1;
            m[t] += 1;
            if m[t] <= degree {
                break;
            }
            m[t] = 0;
        }
    }
}

/// Map of [`autocorr_coeff`] values over the full index box
/// `max_i |k_i| <= kmax`, keyed by index in lexicographic order.
pub fn autocorr_coeffs(
    dim: usize,
    slope: Complex64,
    degree: usize,
    kmax: usize,
) -> Result<std::collections::BTreeMap<Vec<i64>, Complex64>> {
    let side = 2 * kmax + 1;
    let mut boxes = 1usize;
    for _ in 0..dim {
        boxes = boxes.checked_mul(side).filter(|&t| t <= MAX_AUTOCORR_TERMS).ok_or(
            Error::ResourceLimit {
                what: "autocorrelation index box",
                requested: usize::MAX,
                limit: MAX_AUTOCORR_TERMS,
            },
        )?;
    }
    let mut out = std::collections::BTreeMap::new();
    let mut k = vec![-(kmax as i64); dim];
    loop {
        out.insert(k.clone(), autocorr_coeff(dim, slope, degree, &k)?);
        let mut t = dim;
        loop {
            if t == 0 {
                return Ok(out);
            }
            t -= 1;
            k[t] += 1;
            if k[t] <= kmax as i64 {
                break;
            }
            k[t] = -(kmax as i64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{fourier_coeff_series, SeriesParams};

    #[test]
    fn fft_matches_one_dimensional_closed_form() {
        // d = 1: coefficients of 1/|1 - s z|^2 are s^|k| / (1 - s^2).
        let s = 0.4;
        let grid = fft_coeffs(1, Complex64::new(s, 0.0), 256).unwrap();
        for k in -5i64..=5 {
            let want = s.powi(k.unsigned_abs() as i32) / (1.0 - s * s);
            let got = grid.get(&[k]);
            assert!(
                (got.re - want).abs() <= 1e-12 && got.im.abs() <= 1e-12,
                "k={k}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn fft_matches_series_in_two_dimensions() {
        let slope = Complex64::new(0.3, 0.0);
        let grid = fft_coeffs(2, slope, 128).unwrap();
        let params = SeriesParams::new(2, slope).unwrap();
        for k in [[0i64, 0], [1, 0], [1, -1], [2, 1], [3, -2]] {
            let want = fourier_coeff_series(&params, &k).unwrap();
            let got = grid.get(&k);
            assert!((got - want).norm() <= 1e-10, "k={k:?}: got {got}, want {want}");
        }
    }

    #[test]
    fn fft_matches_series_in_three_dimensions_with_complex_slope() {
        let slope = Complex64::from_polar(0.2, 0.7);
        let grid = fft_coeffs(3, slope, 64).unwrap();
        let params = SeriesParams::new(3, slope).unwrap();
        for k in [[0i64, 0, 0], [1, 0, 0], [1, 1, 0], [1, -1, 0], [2, 1, -1]] {
            let want = fourier_coeff_series(&params, &k).unwrap();
            let got = grid.get(&k);
            assert!((got - want).norm() <= 1e-9, "k={k:?}: got {got}, want {want}");
        }
        // Hermitian symmetry of a real density.
        let kp = grid.get(&[1, 2, 0]);
        let km = grid.get(&[-1, -2, 0]);
        assert!((kp - km.conj()).norm() <= 1e-12, "c(-k) = conj(c(k))");
    }

    #[test]
    fn wraparound_indexing() {
        let grid = fft_coeffs(2, Complex64::new(0.2, 0.0), 32).unwrap();
        assert_eq!(grid.get(&[-1, 0]), grid.get(&[31, 0]), "negative index wraps");
        assert_eq!(grid.get(&[5, -3]), grid.get(&[5 - 32, 29 - 32]), "full wrap both axes");
    }

    #[test]
    fn autocorr_matches_series() {
        let slope = Complex64::from_polar(0.2, std::f64::consts::PI / 7.0);
        let params = SeriesParams::new(3, slope).unwrap();
        for k in [[0i64, 0, 0], [1, 0, 0], [1, -1, 0], [2, 1, 0]] {
            let want = fourier_coeff_series(&params, &k).unwrap();
            let got = autocorr_coeff(3, slope, 70, &k).unwrap();
            assert!((got - want).norm() <= 1e-10, "k={k:?}: got {got}, want {want}");
        }
    }

    #[test]
    fn autocorr_matches_fft_in_two_dimensions() {
        let slope = Complex64::new(0.35, 0.0);
        let grid = fft_coeffs(2, slope, 256).unwrap();
        for k in [[0i64, 0], [2, -1], [1, 1]] {
            let got = autocorr_coeff(2, slope, 90, &k).unwrap();
            let want = grid.get(&k);
            assert!((got - want).norm() <= 1e-10, "k={k:?}: got {got}, want {want}");
        }
    }

    #[test]
    fn autocorr_map_covers_the_box() {
        let slope = Complex64::new(0.25, 0.0);
        let map = autocorr_coeffs(2, slope, 60, 2).unwrap();
        assert_eq!(map.len(), 25, "full 5x5 box");
        let single = autocorr_coeff(2, slope, 60, &[1, -2]).unwrap();
        assert_eq!(map[&vec![1i64, -2]], single, "map agrees with per-index calls");
    }

    #[test]
    fn fft_zeroth_coefficient_closed_form_d2() {
        // At s = 0.3 the zeroth coefficient is (1 - 4 s^2)^(-1/2) = 1.25.
        let grid = fft_coeffs(2, Complex64::new(0.3, 0.0), 1024).unwrap();
        let got = grid.get(&[0, 0]);
        assert!((got.re - 1.25).abs() <= 1e-10 && got.im.abs() <= 1e-12, "got {got}");
    }

    #[test]
    fn zero_slope_gives_a_delta() {
        let grid = fft_coeffs(2, Complex64::new(0.0, 0.0), 32).unwrap();
        assert!((grid.get(&[0, 0]).re - 1.0).abs() <= 1e-14, "unit mass at the origin");
        assert!(grid.get(&[1, 0]).norm() <= 1e-14, "vanishes off the origin");
        let c = autocorr_coeff(3, Complex64::new(0.0, 0.0), 10, &[0, 1, 0]).unwrap();
        assert_eq!(c, Complex64::new(0.0, 0.0), "autocorrelation off-origin term");
    }

    #[test]
    fn budgets_and_validation() {
        let s = Complex64::new(0.1, 0.0);
        assert!(matches!(fft_coeffs(3, s, 4096), Err(Error::ResourceLimit { .. })));
        assert!(matches!(fft_coeffs(0, s, 16), Err(Error::InvalidInput { .. })));
        assert!(matches!(fft_coeffs(1, s, 1), Err(Error::InvalidInput { .. })));
        let unstable = Complex64::new(0.5, 0.0);
        assert!(matches!(fft_coeffs(3, unstable, 16), Err(Error::UnstableInput { .. })));
        assert!(matches!(
            autocorr_coeff(3, s, 10, &[0, 0]),
            Err(Error::InvalidInput { .. })
        ));
        assert!(matches!(
            autocorr_coeff(6, s, 100_000, &[0; 6]),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
