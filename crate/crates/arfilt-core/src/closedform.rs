//! Closed-form Fourier coefficients at reciprocal slope `s = 1/r`.
//!
//! For `d = 3` variables and `r > 3` the coefficients on the unit cube of
//! indices have complete elliptic / hypergeometric expressions; a linear
//! recurrence then extends them outward (to the extent it determines them,
//! which is genuinely partial). For `d = 2` and `r > 2` every coefficient
//! is available in closed form.
//!
//! Everything here is cross-checkable: the zeroth coefficient has two
//! independent closed forms whose difference ([`cor34_residual`]) must
//! vanish, the unit-cube values satisfy exact linear relations, and
//! single-angle integral representations of the same quantities are
//! provided for quadrature-based verification.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::quadrature::{torus_integral, TorusGrid};
use crate::specfun::{ellip_e, ellip_k, ellip_pi, hyp2f1, hyp2f1_unit_log, hyp3f2};

/// Series tolerance used for the hypergeometric evaluations.
const HYP_TOL: f64 = 1e-15;

/// Below `1 - z` of this size the direct hypergeometric series gives way
/// to the expansion around `z = 1`.
const Z_SWITCH: f64 = 0.999;

/// Largest supported extension shell (box half-width) for the recurrence.
pub const MAX_SHELL: i64 = 16;

fn check_r_d3(r: f64, what: &'static str) -> Result<()> {
    if !(r > 3.0) || !r.is_finite() {
        return Err(Error::Domain {
            what,
            detail: format!("requires r > 3, got r = {r}"),
        });
    }
    Ok(())
}

/// Elliptic modulus parameter `m(r) = 16 r / ((r+3) (r-1)^3)`, in `(0, 1)`
/// for `r > 3`.
fn modulus_m(r: f64) -> f64 {
    16.0 * r / ((r + 3.0) * (r - 1.0).powi(3))
}

/// Zeroth coefficient for `d = 3`, `s = 1/r`, via the complete elliptic
/// integral of the first kind:
///
/// ```text
/// c000(r) = 2 r^2 / (pi (r-1)^(3/2) sqrt(r+3)) * K(m(r)) .
/// ```
pub fn c000_elliptic(r: f64) -> Result<f64> {
    check_r_d3(r, "c000_elliptic")?;
    let k = ellip_k(modulus_m(r))?;
    Ok(2.0 * r * r / (std::f64::consts::PI * (r - 1.0).powf(1.5) * (r + 3.0).sqrt()) * k)
}

/// Zeroth coefficient for `d = 3`, `s = 1/r`, via the Gauss hypergeometric
/// function:
///
/// ```text
/// c000(r) = r^2 / (r^2 - 3) * 2F1(1/3, 2/3; 1; 27 (r^2-1) / (r^2-3)^3) .
/// ```
pub fn c000_hypergeom(r: f64) -> Result<f64> {
    check_r_d3(r, "c000_hypergeom")?;
    // 1 - z factors exactly as (r^2 - 9) r^4 / (r^2 - 3)^3, which avoids
    // the cancellation in forming z directly as r drops toward 3 and lets
    // the expansion around z = 1 take over there.
    let omz = (r - 3.0) * (r + 3.0) * r.powi(4) / (r * r - 3.0).powi(3);
    let h = if omz >= 1.0 - Z_SWITCH {
        hyp2f1(1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0 - omz, HYP_TOL)?
    } else {
        hyp2f1_unit_log(1.0 / 3.0, omz, HYP_TOL)?
    };
    Ok(r * r / (r * r - 3.0) * h)
}

/// Residual of the identity equating [`c000_elliptic`] and
/// [`c000_hypergeom`]; analytically zero for every `r > 3`.
pub fn cor34_residual(r: f64) -> Result<f64> {
    Ok(c000_elliptic(r)? - c000_hypergeom(r)?)
}

/// Zeroth coefficient for `d = 3` as a single-angle integral,
///
/// ```text
/// c000(r) = r^2 * mean_t [ ((r^2+1-2r cos t)(r^2-3-2r cos t))^(-1/2) ] ,
/// ```
///
/// evaluated on the supplied one-dimensional grid.
pub fn c000_integral(r: f64, grid: &TorusGrid) -> Result<f64> {
    check_r_d3(r, "c000_integral")?;
    check_grid_1d(grid)?;
    let v = torus_integral(
        |t: &[f64]| {
            let x = r * r - 2.0 * r * t[0].cos();
            1.0 / ((x + 1.0) * (x - 3.0)).sqrt()
        },
        grid,
    )?;
    Ok(r * r * v)
}

/// First coefficient `c(1,0,0)` for `d = 3` as a single-angle integral:
///
/// ```text
/// c100(r) = -r/2 + (r^2/2) * mean_t [ (r - cos t) /
///           sqrt((r^2+1-2r cos t)(r^2-3-2r cos t)) ] .
/// ```
pub fn c100_integral(r: f64, grid: &TorusGrid) -> Result<f64> {
    check_r_d3(r, "c100_integral")?;
    check_grid_1d(grid)?;
    let v = torus_integral(
        |t: &[f64]| {
            let x = r * r - 2.0 * r * t[0].cos();
            (r - t[0].cos()) / ((x + 1.0) * (x - 3.0)).sqrt()
        },
        grid,
    )?;
    Ok(-r / 2.0 + r * r / 2.0 * v)
}

/// Mixed coefficient `c(-1,1,0)` for `d = 3` as a single-angle integral:
///
/// ```text
/// cm110(r) = (r^2/4) * mean_t [ sqrt(Y/X) - 2 + sqrt(X/Y) ] ,
/// X = r^2+1-2r cos t ,  Y = r^2-3-2r cos t .
/// ```
pub fn cm110_integral(r: f64, grid: &TorusGrid) -> Result<f64> {
    check_r_d3(r, "cm110_integral")?;
    check_grid_1d(grid)?;
    let v = torus_integral(
        |t: &[f64]| {
            let x = r * r + 1.0 - 2.0 * r * t[0].cos();
            let y = r * r - 3.0 - 2.0 * r * t[0].cos();
            (y / x).sqrt() - 2.0 + (x / y).sqrt()
        },
        grid,
    )?;
    Ok(r * r / 4.0 * v)
}

/// Adjacent-pair coefficient `c(0,1,1)` for `d = 3` as a single-angle
/// integral:
///
/// ```text
/// c011(r) = -1/2 + (r^2/2) * mean_t [ (r cos t - cos 2t) /
///           sqrt((r^2+1-2r cos t)(r^2-3-2r cos t)) ] .
/// ```
pub fn c011_integral(r: f64, grid: &TorusGrid) -> Result<f64> {
    check_r_d3(r, "c011_integral")?;
    check_grid_1d(grid)?;
    let v = torus_integral(
        |t: &[f64]| {
            let x = r * r - 2.0 * r * t[0].cos();
            (r * t[0].cos() - (2.0 * t[0]).cos()) / ((x + 1.0) * (x - 3.0)).sqrt()
        },
        grid,
    )?;
    Ok(-0.5 + r * r / 2.0 * v)
}

fn check_grid_1d(grid: &TorusGrid) -> Result<()> {
    if grid.dims() != 1 {
        return Err(Error::InvalidInput {
            what: format!("single-angle integral needs a 1-d grid, got {} dims", grid.dims()),
        });
    }
    Ok(())
}

/// `c(0,1,1)` in closed form through `K`, `E` and `Pi` with characteristic
/// `n = 4/(r-1)^2`:
///
/// ```text
/// c011 = (c000 - 1)/3 - 1/2
///      + [ (r+3)(r-1)^3 (K(m) - E(m)) + 4 (r-3)(r+1) Pi(n, m) ]
///        / (4 pi (r-1) sqrt((r+3)(r-1))) .
/// ```
pub fn c011_elliptic(r: f64) -> Result<f64> {
    check_r_d3(r, "c011_elliptic")?;
    let m = modulus_m(r);
    let n = 4.0 / ((r - 1.0) * (r - 1.0));
    let k = ellip_k(m)?;
    let e = ellip_e(m)?;
    let pi3 = ellip_pi(n, m)?;
    let w = (r + 3.0) * (r - 1.0).powi(3);
    let denom = 4.0 * std::f64::consts::PI * (r - 1.0) * ((r + 3.0) * (r - 1.0)).sqrt();
    Ok((c000_elliptic(r)? - 1.0) / 3.0 - 0.5 + (w * (k - e) + 4.0 * (r - 3.0) * (r + 1.0) * pi3) / denom)
}

/// Equivalent closed form of `c(0,1,1)` with characteristic
/// `n = 4r/((r+3)(r-1))`; kept as an independent cross-check of
/// [`c011_elliptic`]:
///
/// ```text
/// c011 = (c000 - 1)/3
///      + [ (r^4 - 2r^2 - 15) K(m) - (r+3)(r-1)^3 E(m)
///          - 4 (r-3)(r+1) Pi(n, m) ]
///        / (4 pi (r-1) sqrt((r+3)(r-1))) .
/// ```
pub fn c011_elliptic_alt(r: f64) -> Result<f64> {
    check_r_d3(r, "c011_elliptic_alt")?;
    let m = modulus_m(r);
    let n = 4.0 * r / ((r + 3.0) * (r - 1.0));
    let k = ellip_k(m)?;
    let e = ellip_e(m)?;
    let pi3 = ellip_pi(n, m)?;
    let denom = 4.0 * std::f64::consts::PI * (r - 1.0) * ((r + 3.0) * (r - 1.0)).sqrt();
    let num = (r.powi(4) - 2.0 * r * r - 15.0) * k
        - (r + 3.0) * (r - 1.0).powi(3) * e
        - 4.0 * (r - 3.0) * (r + 1.0) * pi3;
    Ok((c000_elliptic(r)? - 1.0) / 3.0 + num / denom)
}

// ---------------------------------------------------------------------------
// The unit-cube table for d = 3 and its recurrence extension.
// ---------------------------------------------------------------------------

/// Fourier coefficients of the `d = 3` density on the unit cube of indices
/// `{-1, 0, 1}^3`, stored symmetry-closed (all 27 entries present).
#[derive(Debug, Clone)]
pub struct CoeffTable3 {
    values: BTreeMap<[i64; 3], f64>,
}

impl CoeffTable3 {
    pub fn get(&self, idx: [i64; 3]) -> Option<f64> {
        self.values.get(&idx).copied()
    }

    /// Entries in lexicographic index order.
    pub fn iter(&self) -> impl Iterator<Item = ([i64; 3], f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Number of strictly positive / strictly negative entries, after the
/// normalization that makes positives dominate; this pair classifies an
/// index of the unit cube up to permutation and global negation.
fn cube_class(idx: [i64; 3]) -> (usize, usize) {
    let p = idx.iter().filter(|&&x| x > 0).count();
    let m = idx.iter().filter(|&&x| x < 0).count();
    if p >= m {
        (p, m)
    } else {
        (m, p)
    }
}

/// Complete table of the 27 unit-cube coefficients for `d = 3`, `s = 1/r`,
/// from the closed forms: six values fill the six symmetry classes:
///
/// * `c000` from [`c000_elliptic`];
/// * `c100 = (r/3)(c000 - 1)`;
/// * `c011` from [`c011_elliptic`];
/// * `c(0,1,-1) = (r c100 - c000) / 2`;
/// * `c(1,1,-1) = r c011 - 2 c100`;
/// * `c111 = (3/r) c011`.
pub fn coeffs_d3_unitcube(r: f64) -> Result<CoeffTable3> {
    check_r_d3(r, "coeffs_d3_unitcube")?;
    let c000 = c000_elliptic(r)?;
    let c100 = r / 3.0 * (c000 - 1.0);
    let c011 = c011_elliptic(r)?;
    let c01m1 = (r * c100 - c000) / 2.0;
    let c11m1 = r * c011 - 2.0 * c100;
    let c111 = 3.0 / r * c011;

    let mut values = BTreeMap::new();
    for i in -1..=1i64 {
        for j in -1..=1i64 {
            for k in -1..=1i64 {
                let idx = [i, j, k];
                let v = match cube_class(idx) {
                    (0, 0) => c000,
                    (1, 0) => c100,
                    (2, 0) => c011,
                    (1, 1) => c01m1,
                    (3, 0) => c111,
                    (2, 1) => c11m1,
                    other => {
                        return Err(Error::Internal {
                            what: format!("unclassified cube index {idx:?}: {other:?}"),
                        })
                    }
                };
                values.insert(idx, v);
            }
        }
    }
    Ok(CoeffTable3 { values })
}

/// Result of extending a unit-cube table outward by the linear recurrence.
/// Indices the recurrence cannot determine are listed rather than guessed.
#[derive(Debug, Clone)]
pub struct ExtendedTable {
    values: BTreeMap<[i64; 3], f64>,
    unresolved: BTreeSet<[i64; 3]>,
    shell: i64,
}

impl ExtendedTable {
    pub fn get(&self, idx: [i64; 3]) -> Option<f64> {
        self.values.get(&idx).copied()
    }

    /// Value at `idx`, or [`Error::Underdetermined`] when the recurrence
    /// does not reach it (or the index lies outside the extension box).
    pub fn require(&self, idx: [i64; 3]) -> Result<f64> {
        self.get(idx).ok_or(Error::Underdetermined { index: idx })
    }

    /// Resolved entries in lexicographic index order.
    pub fn iter(&self) -> impl Iterator<Item = ([i64; 3], f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    /// Indices inside the box that remain undetermined.
    pub fn unresolved(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        self.unresolved.iter().copied()
    }

    pub fn shell(&self) -> i64 {
        self.shell
    }
}

/// All distinct images of `idx` under coordinate permutations and global
/// negation (the symmetries of the coefficient array).
fn symmetry_orbit(idx: [i64; 3]) -> Vec<[i64; 3]> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(12);
    for sign in [1i64, -1] {
        let base = [sign * idx[0], sign * idx[1], sign * idx[2]];
        for p in perms {
            let im = [base[p[0]], base[p[1]], base[p[2]]];
            if !out.contains(&im) {
                out.push(im);
            }
        }
    }
    out
}

/// Canonical representative of the symmetry orbit (lexicographic maximum).
fn canonical(idx: [i64; 3]) -> [i64; 3] {
    symmetry_orbit(idx).into_iter().max().unwrap()
}

/// Extend a unit-cube table to the box `max|k_i| <= shell` using the
/// three-term recurrence
///
/// ```text
/// c(k) = ( c(k - e1) + c(k - e2) + c(k - e3) ) / r      for k outside -N0^3,
/// ```
///
/// together with closure under permutations and global negation.
///
/// Each pass scans every valid recurrence instance whose four indices lie
/// inside the box; an instance resolves a value when, after identifying
/// symmetric indices, exactly one orbit in it is still unknown. Passes
/// repeat to a fixed point. The recurrence genuinely underdetermines some
/// indices (it gives only a partial picture); those stay listed in
/// [`ExtendedTable::unresolved`] and querying them errors rather than
/// returning an approximation.
pub fn recurrence_extend(table: &CoeffTable3, r: f64, shell: i64) -> Result<ExtendedTable> {
    check_r_d3(r, "recurrence_extend")?;
    if shell < 1 {
        return Err(Error::InvalidInput { what: format!("shell must be >= 1, got {shell}") });
    }
    if shell > MAX_SHELL {
        return Err(Error::ResourceLimit {
            what: "recurrence extension shell",
            requested: shell as usize,
            limit: MAX_SHELL as usize,
        });
    }
    let mut known: BTreeMap<[i64; 3], f64> = table.iter().collect();
    let s = shell;

    let in_box = |idx: [i64; 3]| idx.iter().all(|&x| -s <= x && x <= s);
    let resolve = |known: &mut BTreeMap<[i64; 3], f64>| -> usize {
        let mut resolved = 0;
        for i in -s..=s {
            for j in -s..=s {
                for k in -s..=s {
                    let at = [i, j, k];
                    // The recurrence holds only outside -N0^3.
                    if at.iter().all(|&x| x <= 0) {
                        continue;
                    }
                    let preds = [[i - 1, j, k], [i, j - 1, k], [i, j, k - 1]];
                    if preds.iter().any(|&p| !in_box(p)) {
                        continue;
                    }
                    // r * c(at) - sum_preds c(pred) = 0; group the unknown
                    // positions by symmetry orbit.
                    let mut coeff = 0.0_f64; // coefficient of the unknown orbit
                    let mut rhs = 0.0_f64; // known part, moved right
                    let mut unknown: Option<[i64; 3]> = None;
                    let mut bad = false;
                    let mut account = |idx: [i64; 3], weight: f64| {
                        if let Some(v) = known.get(&idx) {
                            rhs -= weight * v;
                        } else {
                            let orb = canonical(idx);
                            match unknown {
                                None => {
                                    unknown = Some(orb);
                                    coeff += weight;
                                }
                                Some(u) if u == orb => coeff += weight,
                                Some(_) => bad = true,
                            }
                        }
                    };
                    account(at, r);
                    for p in preds {
                        account(p, -1.0);
                    }
                    if bad {
                        continue; // more than one unknown orbit
                    }
                    if let Some(_u) = unknown {
                        if coeff.abs() <= 1e-12 {
                            continue;
                        }
                        let val = rhs / coeff;
                        // Close under symmetry; all images stay in the box.
                        for im in symmetry_orbit(_u) {
                            known.insert(im, val);
                        }
                        resolved += 1;
                    }
                }
            }
        }
        resolved
    };

    loop {
        if resolve(&mut known) == 0 {
            break;
        }
    }

    let mut unresolved = BTreeSet::new();
    for i in -s..=s {
        for j in -s..=s {
            for k in -s..=s {
                if !known.contains_key(&[i, j, k]) {
                    unresolved.insert([i, j, k]);
                }
            }
        }
    }
    Ok(ExtendedTable { values: known, unresolved, shell })
}

// ---------------------------------------------------------------------------
// d = 2 closed forms.
// ---------------------------------------------------------------------------

/// Binomial coefficient as f64 via a running product (exact for small
/// arguments, ulp-accurate for the sizes used here).
fn binomial_f64(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Fourier coefficient `c(k1, k2)` of the `d = 2` density at `s = 1/r`,
/// `r > 2`, in closed form:
///
/// * opposite-sign or axis indices (`k1 k2 <= 0`):
///   `c = (1 - 4/r^2)^(-1/2) rho^(|k1|+|k2|)` with
///   `rho = r/2 - sqrt(r^2/4 - 1)`;
/// * same-sign indices (`k1 k2 > 0`): with `k = |k1|`, `l = |k2|`,
///   `c = C(k+l, k) r^-(k+l) 3F2(1, (k+l)/2 + 1, (k+l+1)/2; k+1, l+1; 4/r^2)`.
pub fn coeff_d2(r: f64, k1: i64, k2: i64) -> Result<f64> {
    if !(r > 2.0) || !r.is_finite() {
        return Err(Error::Domain {
            what: "coeff_d2",
            detail: format!("requires r > 2, got r = {r}"),
        });
    }
    let (k, l) = (k1.unsigned_abs(), k2.unsigned_abs());
    let total = (k + l) as f64;
    if k1 * k2 <= 0 {
        let rho = r / 2.0 - (r * r / 4.0 - 1.0).sqrt();
        Ok((1.0 - 4.0 / (r * r)).powf(-0.5) * rho.powf(total))
    } else {
        let h = hyp3f2(
            1.0,
            total / 2.0 + 1.0,
            (total + 1.0) / 2.0,
            k as f64 + 1.0,
            l as f64 + 1.0,
            4.0 / (r * r),
            HYP_TOL,
        )?;
        Ok(binomial_f64(k + l, k) * r.powf(-total) * h)
    }
}
