//! Half-shift scaling/wavelet filter pairs.
//!
//! A pair consists of two orthonormal scaling filters `h_s`, `g_s` whose
//! transforms have equal magnitude and satisfy `h_s(k) ~ e^{ik/2} g_s(k)`,
//! together with their conjugate-mirror wavelet filters. The pairs are built
//! from a common factor `F(z) = (1 + z)^K Q(z)` and a maximally flat delay
//! polynomial `D(z)`: `h_s = F D` and `g_s = F z^L D(1/z)`.

pub mod store;

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::laurent::{lp_mul, spectral_factor, LaurentPoly};
use crate::seq::ModeSeq;

/// Largest delay order whose coefficients are still reliable in double precision.
pub const MAX_DELAY_ORDER: usize = 12;
/// Grid used when a design records its half-shift error.
pub const DESIGN_GRID: usize = 4096;
/// Cascade depth used when a design records its scaling-function bound.
pub const DESIGN_CASCADE_DEPTH: u32 = 12;

const DIVERGENCE_LIMIT: f64 = 1e6;
const POLISH_ITERATIONS: usize = 12;
/// Singular values below this fraction of the largest are treated as zero.
const SINGULAR_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPair {
    pub k: usize,
    pub l: usize,
    /// Filter length.
    pub m: usize,
    pub h_s: ModeSeq,
    pub h_w: ModeSeq,
    pub g_s: ModeSeq,
    pub g_w: ModeSeq,
    /// Half-shift error `sup_k |h_s(k) - e^{ik/2} g_s(k)|`.
    pub epsilon: f64,
    /// Sup-norm bound on both scaling functions, at least 1.
    pub b: f64,
}

impl FilterPair {
    /// Assembles a pair from two scaling filters, deriving the wavelet
    /// filters, the half-shift error and the scaling-function bound.
    pub fn from_scaling(k: usize, l: usize, h_s: ModeSeq, g_s: ModeSeq) -> Result<Self> {
        // Negligible edge taps may have been trimmed; the nominal length is even.
        let m = h_s
            .len()
            .max(g_s.len())
            .next_multiple_of(2)
            .max(2 * (k + l));
        let h_w = conjugate_mirror(&h_s);
        let g_w = conjugate_mirror(&g_s);
        let (_, b_h) = scaling_function(&h_s, DESIGN_CASCADE_DEPTH)?;
        let (_, b_g) = scaling_function(&g_s, DESIGN_CASCADE_DEPTH)?;
        let mut pair = Self {
            k,
            l,
            m,
            h_s,
            h_w,
            g_s,
            g_w,
            epsilon: 0.0,
            b: b_h.max(b_g),
        };
        half_shift_error(&mut pair, DESIGN_GRID);
        Ok(pair)
    }

    /// The pair with the roles of the two filter families exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            h_s: self.g_s.clone(),
            h_w: self.g_w.clone(),
            g_s: self.h_s.clone(),
            g_w: self.h_w.clone(),
            ..self.clone()
        }
    }
}

/// Maximally flat all-pass delay polynomial of degree `l`.
///
/// The ratio `z^l D(1/z) / D(z)` has phase `-k/2` up to an error of order
/// `k^{2l+1}` at `k = 0`. Coefficients are those of the Thiran all-pass for a
/// fractional delay `l - 1/2`, normalized so the constant term is 1.
pub fn design_flat_delay(l: usize) -> Result<LaurentPoly> {
    if l > MAX_DELAY_ORDER {
        return Err(Error::InvalidParameter(format!(
            "delay order {l} exceeds the supported maximum {MAX_DELAY_ORDER}"
        )));
    }
    let tau = 0.5;
    let lf = l as f64;
    let mut coeffs = Vec::with_capacity(l + 1);
    let mut binom = 1.0;
    for n in 0..=l {
        if n > 0 {
            binom *= (l - n + 1) as f64 / n as f64;
        }
        let prod: f64 = (0..n)
            .map(|k| (tau - lf + k as f64) / (tau + 1.0 + k as f64))
            .product();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(sign * binom * prod);
    }
    Ok(LaurentPoly::from_real(0, &coeffs))
}

/// Phase error `arg(z^l D(1/z) / D(z)) + k/2` of the delay all-pass at `k`.
pub fn allpass_phase_error(d: &LaurentPoly, k: f64) -> f64 {
    let l = d.max_degree();
    let dk = crate::laurent::lp_eval(d, k);
    let ratio = Complex64::from_polar(1.0, -k * l as f64) * dk.conj() / dk;
    (ratio * Complex64::from_polar(1.0, k / 2.0)).arg()
}

/// Designs the `(K, L)` half-shift pair of length `2(K + L)`.
///
/// The common factor comes from the symmetric polynomial `R` solving the
/// halfband condition `P(z) + P(-z) = 2` for `P = (2 + z + 1/z)^K D(z) D(1/z) R(z)`,
/// followed by minimum-phase spectral factorization `R = Q Q~`.
pub fn design_pair(k: usize, l: usize) -> Result<FilterPair> {
    let (h, g) = design_extended(k, l)?;
    let h_s = ModeSeq::from_real(0, &round(&h));
    let g_s = ModeSeq::from_real(0, &round(&g));
    FilterPair::from_scaling(k, l, h_s, g_s)
}

/// Scaling filters of the `(K, L)` pair on `[0, 2(K + L))` in double-double
/// precision, orthonormal to far below double-precision rounding.
pub(crate) fn design_extended(k: usize, l: usize) -> Result<(Vec<TwoFloat>, Vec<TwoFloat>)> {
    if k < 1 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let d = design_flat_delay(l)?;
    let binomial = LaurentPoly::from_real(-1, &[1.0, 2.0, 1.0]);
    let mut s = lp_mul(&d, &d.reversed_conj());
    for _ in 0..k {
        s = lp_mul(&s, &binomial);
    }

    let n = k + l;
    let system = DMatrix::from_fn(n, n, |row, col| {
        let m = 2 * row as i64;
        if col == 0 {
            s.coeff(m).re
        } else {
            s.coeff(m - col as i64).re + s.coeff(m + col as i64).re
        }
    });
    let mut rhs = DVector::zeros(n);
    rhs[0] = 1.0;
    let r = system.lu().solve(&rhs).ok_or_else(|| {
        Error::NotFactorizable(format!("singular halfband system for K={k}, L={l}"))
    })?;
    // R spans many orders of magnitude for large L; factor a rescaled copy so
    // that its outer coefficients survive trimming.
    let scale = r[0];
    if scale <= 0.0 {
        return Err(Error::Infeasible { min: scale });
    }
    let mut r_coeffs = vec![0.0; 2 * n - 1];
    for j in 0..n {
        r_coeffs[n - 1 + j] = r[j] / scale;
        r_coeffs[n - 1 - j] = r[j] / scale;
    }
    let q = spectral_factor(&LaurentPoly::from_real(-(n as i64 - 1), &r_coeffs))
        .map_err(|e| match e {
            Error::Infeasible { min } => Error::Infeasible { min: min * scale },
            other => other,
        })?
        .scale(Complex64::new(scale.sqrt(), 0.0));

    let flat = LaurentPoly::one_plus_z_pow(k);
    let dense = |p: &LaurentPoly, len: usize| -> Vec<f64> {
        (0..len as i64).map(|j| p.coeff(j).re).collect()
    };
    let h_base = dense(&lp_mul(&flat, &d), n + 1);
    let g_base = dense(&lp_mul(&flat, &d.reversed_conj().shift(l as i64)), n + 1);
    let q = polish_common_factor(&dense(&q, n), &h_base);
    let h = convolve(&h_base, &q);
    let g = convolve(&g_base, &q);
    let total: f64 = h.iter().map(TwoFloat::hi).sum();
    if total < 0.0 {
        Ok((
            h.into_iter().map(|v| -v).collect(),
            g.into_iter().map(|v| -v).collect(),
        ))
    } else {
        Ok((h, g))
    }
}

fn convolve(a: &[f64], b: &[TwoFloat]) -> Vec<TwoFloat> {
    let mut out = vec![TwoFloat::from(0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += y * x;
        }
    }
    out
}

fn round(v: &[TwoFloat]) -> Vec<f64> {
    v.iter().map(TwoFloat::hi).collect()
}

/// Newton refinement of the common factor `q` so that `h = base * q` is
/// orthonormal to its even translates.
///
/// The halfband system and the root finder both lose accuracy as `K + L`
/// grows; the equations `sum_i h_i h_{i+2m} = delta_m` have as many unknowns
/// as equations and an isolated solution at every spectral factor, so a few
/// steps with residuals in double-double arithmetic restore orthonormality
/// to rounding level.
fn polish_common_factor(q: &[f64], base: &[f64]) -> Vec<TwoFloat> {
    let n = q.len();
    let mut q: Vec<TwoFloat> = q.iter().map(|&v| TwoFloat::from(v)).collect();
    let residual_of = |q: &[TwoFloat]| -> Vec<TwoFloat> {
        let h = convolve(base, q);
        (0..n)
            .map(|m| {
                let dot = h
                    .iter()
                    .zip(h.iter().skip(2 * m))
                    .fold(TwoFloat::from(0.0), |acc, (a, b)| acc + *a * *b);
                if m == 0 {
                    dot - 1.0
                } else {
                    dot
                }
            })
            .collect()
    };
    let size = |r: &[TwoFloat]| r.iter().map(|v| v.hi().abs()).fold(0.0, f64::max);
    let mut residual = residual_of(&q);
    for _ in 0..POLISH_ITERATIONS {
        if size(&residual) < 1e-30 {
            break;
        }
        let h = round(&convolve(base, &q));
        let len = h.len() as i64;
        let at = |v: &[f64], i: i64| {
            if (0..v.len() as i64).contains(&i) {
                v[i as usize]
            } else {
                0.0
            }
        };
        let jacobian = DMatrix::from_fn(n, n, |m, j| {
            let (m, j) = (2 * m as i64, j as i64);
            (0..len)
                .map(|i| at(base, i - j) * (at(&h, i + m) + at(&h, i - m)))
                .sum::<f64>()
        });
        let rhs = DVector::from_iterator(n, residual.iter().map(TwoFloat::hi));
        // Long designs make the system numerically singular; the
        // pseudo-inverse leaves the unresolved directions alone.
        let svd = jacobian.svd(true, true);
        let cutoff = svd.singular_values.max() * SINGULAR_CUTOFF;
        let Ok(step) = svd.solve(&rhs, cutoff) else {
            break;
        };
        let trial: Vec<TwoFloat> = q.iter().zip(step.iter()).map(|(a, d)| *a - *d).collect();
        let trial_residual = residual_of(&trial);
        if size(&trial_residual) >= size(&residual) {
            break;
        }
        q = trial;
        residual = trial_residual;
    }
    q
}

/// `h_w[m] = (-1)^{m+1} conj(h_s[-1-m])`, so that
/// `h_w(k) = e^{ik} conj(h_s(k + pi))`.
pub fn conjugate_mirror(h_s: &ModeSeq) -> ModeSeq {
    if h_s.is_empty() {
        return ModeSeq::zero();
    }
    let lo = -1 - h_s.last();
    let values = (lo..lo + h_s.len() as i64)
        .map(|m| {
            let v = h_s.get(-1 - m).conj();
            if (m + 1).rem_euclid(2) == 0 {
                v
            } else {
                -v
            }
        })
        .collect();
    ModeSeq::new(lo, values)
}

/// Midpoints of `n` equal cells of `(-pi, pi)`.
pub fn midpoint_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| -PI + (j as f64 + 0.5) * 2.0 * PI / n as f64)
        .collect()
}

/// Supremum of `f` over `(-pi, pi)`: the grid maximum refined by golden-section
/// search on the two cells adjacent to the grid maximizer.
pub fn refined_sup(f: impl Fn(f64) -> f64, grid_size: usize) -> f64 {
    let grid = midpoint_grid(grid_size);
    let (best_idx, best) =
        grid.iter()
            .map(|&k| f(k))
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );
    let step = 2.0 * PI / grid_size as f64;
    let center = grid[best_idx];
    let mut a = (center - step).max(-PI);
    let mut b = (center + step).min(PI);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}

/// `sup_k |h(k) - e^{ik/2} g(k)|` for arbitrary transforms `h`, `g`.
pub fn half_shift_error_of(
    h: impl Fn(f64) -> Complex64,
    g: impl Fn(f64) -> Complex64,
    grid_size: usize,
) -> f64 {
    refined_sup(
        |k| (h(k) - Complex64::from_polar(1.0, k / 2.0) * g(k)).norm(),
        grid_size,
    )
}

/// Computes the half-shift error of `pair` on a grid of `grid_size` points
/// (at least 1024), stores it in `pair.epsilon` and returns it.
pub fn half_shift_error(pair: &mut FilterPair, grid_size: usize) -> f64 {
    let grid_size = grid_size.max(1024);
    let eps = half_shift_error_of(|k| pair.h_s.dtft(k), |k| pair.g_s.dtft(k), grid_size);
    pair.epsilon = eps;
    eps
}

/// Cascade approximation of the scaling function of `h_s` sampled with
/// spacing `2^{-depth}` on `[0, M - 1]`, and its sup norm floored at 1.
///
/// Sample `i` of the returned sequence is the value at `x = i 2^{-depth}`
/// (relative to the first filter tap).
pub fn scaling_function(h_s: &ModeSeq, depth: u32) -> Result<(ModeSeq, f64)> {
    if depth < 1 {
        return Err(Error::InvalidParameter(
            "cascade depth must be at least 1".into(),
        ));
    }
    let taps: Vec<f64> = h_s.values().iter().map(|c| c.re).collect();
    let span = taps.len().saturating_sub(1);
    let mut samples = vec![1.0];
    for j in 0..depth {
        let stride = 1usize << j;
        let next_len = span * (stride << 1) + 1;
        let mut next = vec![0.0; next_len];
        for (i, out) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (n, &h) in taps.iter().enumerate() {
                if let Some(src) = i.checked_sub(n * stride) {
                    if let Some(v) = samples.get(src) {
                        acc += h * v;
                    }
                }
            }
            *out = SQRT_2 * acc;
        }
        samples = next;
        let max = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max > DIVERGENCE_LIMIT {
            return Err(Error::NonRegular { max });
        }
    }
    let b = samples.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok((ModeSeq::from_real(0, &samples), b))
}

/// `max_m |sum_n h[n] conj(h[n - 2m]) - delta_{m0}|` together with the
/// deviation of `sum_n h[n]` from `sqrt 2`, whichever is larger.
pub fn orthonormality_residual(h: &ModeSeq) -> f64 {
    let span = h.len() as i64;
    let shifts = (-span / 2 - 1)..=(span / 2 + 1);
    let gram = shifts
        .map(|m| {
            let target = if m == 0 { 1.0 } else { 0.0 };
            (h.inner_shifted(h, 2 * m) - target).norm()
        })
        .fold(0.0, f64::max);
    let dc = (h.dtft(0.0) - Complex64::new(SQRT_2, 0.0)).norm();
    gram.max(dc)
}

/// Largest of `|d^j/dk^j h_w(k)|` at `k = 0` for `j < count`.
pub fn moment_residual(h_w: &ModeSeq, count: usize) -> f64 {
    (0..count)
        .map(|j| {
            h_w.iter()
                .map(|(n, v)| v * Complex64::new(0.0, -(n as f64)).powi(j as i32))
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

/// `max_k ||h_s(k)| - |g_s(k)||` on a midpoint grid.
pub fn equal_magnitude_residual(pair: &FilterPair, grid_size: usize) -> f64 {
    midpoint_grid(grid_size)
        .into_iter()
        .map(|k| (pair.h_s.dtft(k).norm() - pair.g_s.dtft(k).norm()).abs())
        .fold(0.0, f64::max)
}

/// The Haar scaling filter `[1, 1] / sqrt 2`.
pub fn haar() -> ModeSeq {
    ModeSeq::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn daubechies4() -> ModeSeq {
        let s3 = 3f64.sqrt();
        let c = 1.0 / (4.0 * SQRT_2);
        ModeSeq::from_real(
            0,
            &[
                (1.0 + s3) * c,
                (3.0 + s3) * c,
                (3.0 - s3) * c,
                (1.0 - s3) * c,
            ],
        )
    }

    #[test]
    fn flat_delay_low_orders() {
        assert_eq!(design_flat_delay(0).unwrap(), LaurentPoly::constant(1.0));
        let d1 = design_flat_delay(1).unwrap();
        assert!((d1.coeff(1).re - 1.0 / 3.0).abs() < 1e-15);
        assert!(allpass_phase_error(&d1, 0.1).abs() < 1e-4);
        let d2 = design_flat_delay(2).unwrap();
        assert!((d2.coeff(1).re - 2.0).abs() < 1e-14 && (d2.coeff(2).re - 0.2).abs() < 1e-14);
        assert!(design_flat_delay(MAX_DELAY_ORDER + 1).is_err());
    }

    #[test]
    fn flat_delay_order_of_contact() {
        // Error ~ c k^{2L+1}: halving k divides it by about 2^{2L+1}.
        for l in 1..=4 {
            let d = design_flat_delay(l).unwrap();
            let ratio = allpass_phase_error(&d, 0.2) / allpass_phase_error(&d, 0.1);
            let expected = 2f64.powi(2 * l as i32 + 1);
            assert!((ratio / expected - 1.0).abs() < 0.1, "L={l}: ratio {ratio}");
        }
    }

    #[test]
    fn higher_delay_order_is_flatter() {
        let d1 = design_flat_delay(1).unwrap();
        let d4 = design_flat_delay(4).unwrap();
        for k in midpoint_grid(512)
            .into_iter()
            .filter(|k| k.abs() <= PI / 2.0)
        {
            assert!(allpass_phase_error(&d4, k).abs() <= allpass_phase_error(&d1, k).abs());
        }
    }

    #[test]
    fn haar_pair() {
        let pair = design_pair(1, 0).unwrap();
        assert_eq!(pair.m, 2);
        assert!(pair.h_s.max_abs_diff(&haar()) < 1e-14);
        assert!(pair.g_s.max_abs_diff(&haar()) < 1e-14);
        assert!((pair.b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_mirror() {
        let w = conjugate_mirror(&haar());
        assert_eq!(w.offset(), -2);
        assert!(w.max_abs_diff(&ModeSeq::from_real(-2, &[-FRAC_1_SQRT_2, FRAC_1_SQRT_2])) < 1e-15);
        for k in midpoint_grid(64) {
            assert!((w.dtft(k).norm() - haar().dtft(k + PI).norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn mirror_of_delta_is_allpass() {
        let w = conjugate_mirror(&ModeSeq::delta(0));
        for k in midpoint_grid(64) {
            assert!((w.dtft(k).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mirror_identity_and_orthogonality_for_d4() {
        let h = daubechies4();
        let w = conjugate_mirror(&h);
        for k in midpoint_grid(256) {
            let expected = Complex64::from_polar(1.0, k) * h.dtft(k + PI).conj();
            assert!((w.dtft(k) - expected).norm() < 1e-12);
        }
        for m in -4..=4 {
            assert!(h.inner_shifted(&w, 2 * m).norm() < 1e-12);
        }
    }

    #[test]
    fn haar_half_shift_error_matches_closed_form() {
        let mut pair = design_pair(1, 0).unwrap();
        let eps = half_shift_error(&mut pair, 4096);
        let closed = midpoint_grid(1 << 16)
            .into_iter()
            .map(|k| 2.0 * (k / 4.0).sin().abs() * haar().dtft(k).norm())
            .fold(0.0, f64::max);
        assert!((eps - closed).abs() < 1e-8);
        assert!(eps >= 0.5);
        assert_eq!(pair.epsilon, eps);
    }

    #[test]
    fn exact_fourier_half_shift_has_zero_error() {
        let h = daubechies4();
        let eps = half_shift_error_of(
            |k| h.dtft(k),
            |k| Complex64::from_polar(1.0, -k / 2.0) * h.dtft(k),
            1024,
        );
        assert!(eps < 1e-14);
    }

    #[test]
    fn scaling_function_bounds() {
        let (samples, b) = scaling_function(&haar(), 6).unwrap();
        assert!((b - 1.0).abs() < 1e-14);
        assert!(samples.values().iter().all(|v| (v.re - 1.0).abs() < 1e-14));
        assert_eq!(samples.len(), 64);

        let (_, b10) = scaling_function(&daubechies4(), 10).unwrap();
        let (_, b12) = scaling_function(&daubechies4(), 12).unwrap();
        assert!((b10 - b12).abs() / b12 < 0.02);
    }

    #[test]
    fn divergent_cascade_is_flagged() {
        let bad = ModeSeq::from_real(0, &[2.0, -0.6]);
        assert!(matches!(
            scaling_function(&bad, 30),
            Err(Error::NonRegular { .. })
        ));
    }

    #[test]
    fn small_designs_pass_invariants() {
        for (k, l) in [(1, 1), (2, 0), (2, 2), (3, 3)] {
            let pair = design_pair(k, l).unwrap();
            assert_eq!(pair.h_s.len(), 2 * (k + l));
            assert!(orthonormality_residual(&pair.h_s) < 1e-10);
            assert!(orthonormality_residual(&pair.g_s) < 1e-10);
            assert!(moment_residual(&pair.h_w, k) < 1e-7);
            assert!(equal_magnitude_residual(&pair, 1024) < 1e-8);
            assert!(pair.epsilon < 1.0);
        }
    }

    #[test]
    fn k2_l0_is_time_reversed_daubechies4() {
        // Zeros of Q inside the unit disk in the variable z = e^{-ik} is the
        // time reverse of the textbook minimum-phase D4.
        let pair = design_pair(2, 0).unwrap();
        let reversed = daubechies4().conj_reverse().shift(3);
        assert!(pair.h_s.max_abs_diff(&reversed) < 1e-9);
        for k in midpoint_grid(256) {
            assert!((pair.h_s.dtft(k).norm() - daubechies4().dtft(k).norm()).abs() < 1e-9);
        }
    }
}
