//! Exact-degree Laurent polynomials over `Complex64`.
//!
//! A polynomial `p(z) = sum_j c_j z^(d + j)` is stored as its lowest exponent
//! `d` and the dense coefficient list. Evaluation on the unit circle uses
//! `z = e^{-ik}`, so a filter `h[n]` stored as `sum_n h[n] z^n` evaluates to
//! its DTFT `h(k) = sum_n h[n] e^{-ikn}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this magnitude are trimmed from both ends.
pub const TRIM_EPS: f64 = 1e-14;

const ABERTH_MAX_ITER: usize = 200;
const ABERTH_TOL: f64 = 1e-13;
const RECONSTRUCTION_TOL: f64 = 1e-9;
const NONNEG_GRID: usize = 4096;
const POLISH_ITERATIONS: usize = 8;
const NONNEG_TOL: f64 = 1e-10;
/// Width of the band around |z| = 1 in which roots are treated as lying on the
/// unit circle. Double roots on the circle come out of the root finder split by
/// roughly sqrt(machine epsilon), so the band must be wider than that.
const UNIT_CIRCLE_BAND: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentPoly {
    min_degree: i64,
    coeffs: Vec<Complex64>,
}

/// A root together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl LaurentPoly {
    /// Builds a polynomial and trims negligible coefficients from both ends.
    pub fn new(min_degree: i64, coeffs: Vec<Complex64>) -> Self {
        let mut p = Self { min_degree, coeffs };
        p.trim();
        p
    }

    pub fn from_real(min_degree: i64, coeffs: &[f64]) -> Self {
        Self::new(
            min_degree,
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    pub fn zero() -> Self {
        Self {
            min_degree: 0,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_real(0, &[c])
    }

    pub fn monomial(degree: i64, c: Complex64) -> Self {
        Self::new(degree, vec![c])
    }

    /// `(1 + z)^k`.
    pub fn one_plus_z_pow(k: usize) -> Self {
        let base = Self::from_real(0, &[1.0, 1.0]);
        (0..k).fold(Self::constant(1.0), |acc, _| lp_mul(&acc, &base))
    }

    fn trim(&mut self) {
        let first = self.coeffs.iter().position(|c| c.norm() > TRIM_EPS);
        match first {
            None => {
                self.coeffs.clear();
                self.min_degree = 0;
            }
            Some(first) => {
                let last = self
                    .coeffs
                    .iter()
                    .rposition(|c| c.norm() > TRIM_EPS)
                    .unwrap();
                self.coeffs.truncate(last + 1);
                self.coeffs.drain(..first);
                self.min_degree += first as i64;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_degree(&self) -> i64 {
        self.min_degree
    }

    pub fn max_degree(&self) -> i64 {
        self.min_degree + self.coeffs.len() as i64 - 1
    }

    /// Difference between the highest and lowest exponent.
    pub fn degree_span(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^degree` (zero outside the stored range).
    pub fn coeff(&self, degree: i64) -> Complex64 {
        let idx = degree - self.min_degree;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Multiplies by `z^shift`.
    pub fn shift(&self, shift: i64) -> Self {
        Self {
            min_degree: self.min_degree + shift,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.min_degree, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let lo = self.min_degree.min(other.min_degree);
        let hi = self.max_degree().max(other.max_degree());
        let coeffs = (lo..=hi).map(|d| self.coeff(d) + other.coeff(d)).collect();
        Self::new(lo, coeffs)
    }

    /// `p~(z) = conj(p)(1/z)`: conjugated coefficients with reversed exponents.
    pub fn reversed_conj(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|c| c.conj()).collect();
        Self {
            min_degree: -self.max_degree(),
            coeffs,
        }
    }

    /// `p(-z)`.
    pub fn alternate(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if (self.min_degree + j as i64).rem_euclid(2) == 1 {
                    -c
                } else {
                    c
                }
            })
            .collect();
        Self {
            min_degree: self.min_degree,
            coeffs,
        }
    }

    /// Evaluates at an arbitrary complex `z`.
    pub fn eval_z(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.min_degree as i32)
    }

    /// Largest imaginary part among the coefficients.
    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Real coefficients, failing when any imaginary part exceeds `tol`
    /// relative to the largest coefficient.
    pub fn real_coeffs(&self, tol: f64) -> Result<Vec<f64>> {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        let max_imag = self.max_imag();
        if max_imag > tol * scale {
            return Err(Error::NotReal { max_imag });
        }
        Ok(self.coeffs.iter().map(|c| c.re).collect())
    }

    /// Drops imaginary parts.
    pub fn real_part(&self) -> Self {
        Self::new(
            self.min_degree,
            self.coeffs
                .iter()
                .map(|c| Complex64::new(c.re, 0.0))
                .collect(),
        )
    }

    fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Product of two Laurent polynomials.
pub fn lp_mul(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    if a.is_zero() || b.is_zero() {
        return LaurentPoly::zero();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.coeffs.len() + b.coeffs.len() - 1];
    for (i, x) in a.coeffs.iter().enumerate() {
        for (j, y) in b.coeffs.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    LaurentPoly::new(a.min_degree + b.min_degree, out)
}

/// Evaluates `sum_j c_j e^{-ik(d + j)}`.
pub fn lp_eval(p: &LaurentPoly, k: f64) -> Complex64 {
    p.eval_z(Complex64::from_polar(1.0, -k))
}

/// Horner ratio `p(z) / p'(z)` for an ordinary polynomial in ascending order.
/// Outside the unit disk the reversed polynomial is evaluated at `1/z`, which
/// keeps the recurrence from overflowing for large roots.
fn newton_ratio(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let n = coeffs.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = coeffs[n];
        let mut dp = Complex64::new(0.0, 0.0);
        for c in coeffs[..n].iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        p / dp
    } else {
        let w = z.inv();
        let mut q = coeffs[0];
        let mut dq = Complex64::new(0.0, 0.0);
        for c in coeffs[1..].iter() {
            dq = dq * w + q;
            q = q * w + c;
        }
        z * q / (q * n as f64 - w * dq)
    }
}

/// `|p(z)|` and the rounding-error bound `sum_j |c_j| |z|^j` for Horner evaluation.
fn eval_with_bound(coeffs: &[Complex64], z: Complex64) -> (f64, f64) {
    let r = z.norm();
    let mut p = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    for c in coeffs.iter().rev() {
        p = p * z + c;
        bound = bound * r + c.norm();
    }
    (p.norm(), bound)
}

/// Simultaneous Aberth-Ehrlich iteration. A root stops moving once its step
/// is negligible or its residual is at the level of rounding noise. Returns
/// the root estimates and whether every root stopped within the iteration cap.
fn aberth(coeffs: &[Complex64]) -> (Vec<Complex64>, bool) {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].norm();
    let radius = (coeffs[0].norm() / lead).powf(1.0 / n as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    let noise = 4.0 * n as f64 * f64::EPSILON;

    for _ in 0..ABERTH_MAX_ITER {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (value, bound) = eval_with_bound(coeffs, z[i]);
            if value <= noise * bound {
                done[i] = true;
                continue;
            }
            let ratio = newton_ratio(coeffs, z[i]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= ABERTH_TOL * z[i].norm().max(1.0) {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return (z, true);
        }
    }
    (z, false)
}

/// Coefficients of the `order`-th derivative.
fn derivative(coeffs: &[Complex64], order: usize) -> Vec<Complex64> {
    (order..coeffs.len())
        .map(|i| {
            let falling: f64 = ((i - order + 1)..=i).map(|f| f as f64).product();
            coeffs[i] * falling
        })
        .collect()
}

/// Newton iteration on `p^{(m-1)}`, for which a root of multiplicity `m` of
/// `p` is simple.
fn polish_multiple_root(coeffs: &[Complex64], start: Complex64, multiplicity: usize) -> Complex64 {
    let f = derivative(coeffs, multiplicity - 1);
    if f.len() < 2 {
        return start;
    }
    let mut z = start;
    for _ in 0..50 {
        let step = newton_ratio(&f, z);
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= ABERTH_TOL * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Expands `lead * prod (z - r_i)` into ascending coefficients.
fn expand_roots(lead: Complex64, roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![lead];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); out.len() + 1];
        for (i, c) in out.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        out = next;
    }
    out
}

fn reconstruction_residual(coeffs: &[Complex64], roots: &[Complex64]) -> f64 {
    let rebuilt = expand_roots(coeffs[coeffs.len() - 1], roots);
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    rebuilt
        .iter()
        .zip(coeffs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Groups numerically coincident roots. A cluster is only merged when
/// replacing it by its polished centroid does not degrade the reconstruction,
/// so nearby but genuinely distinct roots stay separate.
fn cluster_roots(coeffs: &[Complex64], roots: Vec<Complex64>) -> Vec<Root> {
    const MERGE_RADIUS: f64 = 1e-2;
    const MERGE_RESIDUAL: f64 = 1e-10;

    let n = roots.len();
    let mut cluster_of: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while c[i] != i {
            c[i] = c[c[i]];
            i = c[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() < MERGE_RADIUS * scale {
                let (a, b) = (find(&mut cluster_of, i), find(&mut cluster_of, j));
                cluster_of[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut cluster_of, i);
        match label[r] {
            Some(g) => groups[g].push(i),
            None => {
                label[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }

    let mut current = roots.clone();
    let mut out = Vec::new();
    for group in groups {
        if group.len() == 1 {
            out.push(Root {
                value: roots[group[0]],
                multiplicity: 1,
            });
            continue;
        }
        let centroid: Complex64 =
            group.iter().map(|&i| roots[i]).sum::<Complex64>() / group.len() as f64;
        let centroid = polish_multiple_root(coeffs, centroid, group.len());
        let mut trial = current.clone();
        for &i in &group {
            trial[i] = centroid;
        }
        let baseline = reconstruction_residual(coeffs, &current);
        if reconstruction_residual(coeffs, &trial) <= MERGE_RESIDUAL.max(2.0 * baseline) {
            current = trial;
            out.push(Root {
                value: centroid,
                multiplicity: group.len(),
            });
        } else {
            out.extend(group.iter().map(|&i| Root {
                value: roots[i],
                multiplicity: 1,
            }));
        }
    }
    out
}

/// All roots of the ordinary polynomial `z^{-d} p(z)`, with multiplicities.
pub fn lp_roots(p: &LaurentPoly) -> Result<Vec<Root>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree_span() == 0 {
        return Ok(Vec::new());
    }
    let coeffs = p.coeffs();
    let (roots, converged) = aberth(coeffs);
    let residual = reconstruction_residual(coeffs, &roots);
    if !converged && residual > RECONSTRUCTION_TOL {
        return Err(Error::RootsNotConverged { residual });
    }
    Ok(cluster_roots(coeffs, roots))
}

/// Flattens a root list into individual roots.
pub fn expand_multiplicities(roots: &[Root]) -> Vec<Complex64> {
    roots
        .iter()
        .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
        .collect()
}

/// Picks one representative from each double root on the unit circle.
///
/// Roots are ordered by angle starting after the widest angular gap, so each
/// numerically split pair is adjacent; each pair is replaced by its mean
/// projected onto the circle. The returned set is closed under conjugation.
fn halve_unit_circle_roots(mut roots: Vec<Complex64>) -> Result<Vec<Complex64>> {
    if roots.is_empty() {
        return Ok(roots);
    }
    if !roots.len().is_multiple_of(2) {
        return Err(Error::NotFactorizable(format!(
            "odd number ({}) of roots on the unit circle",
            roots.len()
        )));
    }
    roots.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let n = roots.len();
    let gap = |i: usize| {
        let next = roots[(i + 1) % n].arg() + if i + 1 == n { 2.0 * PI } else { 0.0 };
        next - roots[i].arg()
    };
    let widest = (0..n).max_by(|&a, &b| gap(a).total_cmp(&gap(b))).unwrap();
    roots.rotate_left((widest + 1) % n);

    const REAL_TOL: f64 = 1e-7;
    let mut upper = Vec::new();
    let mut real = Vec::new();
    for pair in roots.chunks(2) {
        let mean = (pair[0] + pair[1]) / 2.0;
        let rep = mean / mean.norm();
        if rep.im.abs() <= REAL_TOL {
            real.push(Complex64::new(rep.re.signum(), 0.0));
        } else if rep.im > 0.0 {
            upper.push(rep);
        }
    }
    let mut out = real;
    for r in upper {
        out.push(r);
        out.push(r.conj());
    }
    Ok(out)
}

/// Minimum-phase spectral factor: returns `f` with `f * f~ = r`.
///
/// `r` must be symmetric with real coefficients and nonnegative on the unit
/// circle. Roots strictly inside the unit disk go to `f`; double roots on the
/// circle contribute one copy each. The result has lowest exponent zero and a
/// positive leading coefficient.
pub fn spectral_factor(r: &LaurentPoly) -> Result<LaurentPoly> {
    if r.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let scale = r.max_abs_coeff();
    if r.max_imag() > 1e-12 * scale {
        return Err(Error::NotFactorizable("coefficients are not real".into()));
    }
    if r.min_degree() != -r.max_degree() {
        return Err(Error::NotFactorizable(
            "exponent range is not symmetric".into(),
        ));
    }
    let n = r.max_degree();
    let asym = (1..=n)
        .map(|d| (r.coeff(d) - r.coeff(-d)).norm())
        .fold(0.0, f64::max);
    if asym > 1e-12 * scale {
        return Err(Error::NotFactorizable(format!(
            "r(z) != r(1/z) (asymmetry {asym:.3e})"
        )));
    }
    let min = (0..NONNEG_GRID)
        .map(|j| lp_eval(r, -PI + 2.0 * PI * j as f64 / NONNEG_GRID as f64).re)
        .fold(f64::INFINITY, f64::min);
    if min < -NONNEG_TOL {
        return Err(Error::Infeasible { min });
    }
    if n == 0 {
        return Ok(LaurentPoly::constant(r.coeff(0).re.sqrt()));
    }

    let roots = expand_multiplicities(&lp_roots(r)?);
    let mut chosen = Vec::with_capacity(n as usize);
    let mut on_circle = Vec::new();
    for z in roots {
        let m = z.norm();
        if m < 1.0 - UNIT_CIRCLE_BAND {
            chosen.push(z);
        } else if m <= 1.0 + UNIT_CIRCLE_BAND {
            on_circle.push(z);
        }
    }
    chosen.extend(halve_unit_circle_roots(on_circle)?);
    if chosen.len() != n as usize {
        return Err(Error::NotFactorizable(format!(
            "selected {} roots for a factor of degree {n}",
            chosen.len()
        )));
    }

    let monic = LaurentPoly::new(0, expand_roots(Complex64::new(1.0, 0.0), &chosen)).real_part();
    // The z^0 coefficient of f f~ is the squared norm of f's coefficients.
    let norm_sq: f64 = monic.coeffs().iter().map(|c| c.norm_sqr()).sum();
    let gain = (r.coeff(0).re / norm_sq).sqrt();
    let factor: Vec<f64> = monic.coeffs().iter().map(|c| c.re * gain).collect();
    let target: Vec<f64> = (0..=n).map(|j| r.coeff(j).re).collect();
    Ok(LaurentPoly::from_real(0, &polish_factor(factor, &target)))
}

/// `sum_i f_i f_{i+j} - r_j` for `j = 0..=n`.
fn autocorrelation_residual(f: &[f64], r: &[f64]) -> Vec<f64> {
    (0..r.len())
        .map(|j| {
            f.iter()
                .zip(&f[j.min(f.len())..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                - r[j]
        })
        .collect()
}

/// Newton iteration on the quadratic system `f f~ = r`, started from the
/// root-based factor. Root finding loses accuracy on clustered roots; the
/// iteration restores the autocorrelation to rounding level whenever the
/// factor has no roots on the unit circle, and otherwise leaves it as is.
fn polish_factor(mut f: Vec<f64>, r: &[f64]) -> Vec<f64> {
    let n = f.len();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut residual = autocorrelation_residual(&f, r);
    for _ in 0..POLISH_ITERATIONS {
        let jacobian = nalgebra::DMatrix::from_fn(n, n, |j, i| {
            let ahead = if i + j < n { f[i + j] } else { 0.0 };
            let behind = if i >= j { f[i - j] } else { 0.0 };
            ahead + behind
        });
        let rhs = nalgebra::DVector::from_column_slice(&residual);
        let Some(step) = jacobian.lu().solve(&rhs) else {
            break;
        };
        let trial: Vec<f64> = f.iter().zip(step.iter()).map(|(a, d)| a - d).collect();
        let trial_residual = autocorrelation_residual(&trial, r);
        if norm(&trial_residual) >= norm(&residual) {
            break;
        }
        f = trial;
        residual = trial_residual;
    }
    f
}
