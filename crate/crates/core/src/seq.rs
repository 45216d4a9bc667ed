//! Finitely supported complex sequences on the integer lattice.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::laurent::{LaurentPoly, TRIM_EPS};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A sequence `x[n]` that vanishes outside `offset .. offset + values.len()`.
///
/// Leading and trailing entries below [`TRIM_EPS`] are dropped on
/// construction, so the stored window is the true support (up to interior
/// zeros). The all-zero sequence has no entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSeq {
    offset: i64,
    values: Vec<Complex64>,
}

impl Default for ModeSeq {
    fn default() -> Self {
        Self::zero()
    }
}

impl ModeSeq {
    pub fn new(offset: i64, values: Vec<Complex64>) -> Self {
        let mut s = Self { offset, values };
        s.trim();
        s
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Self {
        Self::new(
            offset,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn zero() -> Self {
        Self {
            offset: 0,
            values: Vec::new(),
        }
    }

    /// The unit vector at lattice site `n`.
    pub fn delta(n: i64) -> Self {
        Self {
            offset: n,
            values: vec![Complex64::new(1.0, 0.0)],
        }
    }

    fn trim(&mut self) {
        match self.values.iter().position(|v| v.norm() > TRIM_EPS) {
            None => {
                self.values.clear();
                self.offset = 0;
            }
            Some(first) => {
                let last = self
                    .values
                    .iter()
                    .rposition(|v| v.norm() > TRIM_EPS)
                    .unwrap();
                self.values.truncate(last + 1);
                self.values.drain(..first);
                self.offset += first as i64;
            }
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One past the last stored index.
    pub fn end(&self) -> i64 {
        self.offset + self.values.len() as i64
    }

    /// Last stored index; meaningless for the zero sequence.
    pub fn last(&self) -> i64 {
        self.end() - 1
    }

    pub fn get(&self, n: i64) -> Complex64 {
        let i = n - self.offset;
        if i < 0 || i >= self.values.len() as i64 {
            ZERO
        } else {
            self.values[i as usize]
        }
    }

    /// Iterates over `(index, value)` pairs of the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other> = sum_n conj(self[n]) other[n]`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let lo = self.offset.max(other.offset);
        let hi = self.end().min(other.end());
        (lo..hi).map(|n| self.get(n).conj() * other.get(n)).sum()
    }

    /// `<self| T^shift other>` where `(T^s x)[n] = x[n - s]`, without
    /// materializing the translate.
    pub fn inner_shifted(&self, other: &Self, shift: i64) -> Complex64 {
        let lo = self.offset.max(other.offset + shift);
        let hi = self.end().min(other.end() + shift);
        (lo..hi)
            .map(|n| self.get(n).conj() * other.get(n - shift))
            .sum()
    }

    /// Translates so that `out[n] = self[n - shift]`.
    pub fn shift(&self, shift: i64) -> Self {
        if self.is_empty() {
            return Self::zero();
        }
        Self {
            offset: self.offset + shift,
            values: self.values.clone(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.offset, self.values.iter().map(|v| v * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn conj(&self) -> Self {
        Self {
            offset: self.offset,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// `out[n] = conj(self[-n])`.
    pub fn conj_reverse(&self) -> Self {
        if self.is_empty() {
            return Self::zero();
        }
        Self {
            offset: -self.last(),
            values: self.values.iter().rev().map(|v| v.conj()).collect(),
        }
    }

    /// Multiplies entry `n` by `f(n)`.
    pub fn modulate(&self, f: impl Fn(i64) -> Complex64) -> Self {
        Self::new(self.offset, self.iter().map(|(n, v)| v * f(n)).collect())
    }

    pub fn convolve(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::zero();
        }
        let mut out = vec![ZERO; self.len() + other.len() - 1];
        for (i, a) in self.values.iter().enumerate() {
            for (j, b) in other.values.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(self.offset + other.offset, out)
    }

    /// `delta_n -> delta_{2n}`.
    pub fn upsample(&self) -> Self {
        if self.is_empty() {
            return Self::zero();
        }
        let mut out = vec![ZERO; 2 * self.len() - 1];
        for (i, v) in self.values.iter().enumerate() {
            out[2 * i] = *v;
        }
        Self {
            offset: 2 * self.offset,
            values: out,
        }
    }

    /// `sum_n x[n] e^{-ikn}`.
    pub fn dtft(&self, k: f64) -> Complex64 {
        let step = Complex64::from_polar(1.0, -k);
        let mut acc = ZERO;
        for v in self.values.iter().rev() {
            acc = acc * step + v;
        }
        acc * Complex64::from_polar(1.0, -k * self.offset as f64)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.is_empty() && other.is_empty() {
            return 0.0;
        }
        let lo = match (self.is_empty(), other.is_empty()) {
            (false, false) => self.offset.min(other.offset),
            (true, _) => other.offset,
            (_, true) => self.offset,
        };
        let hi = self.end().max(other.end());
        (lo..hi)
            .map(|n| (self.get(n) - other.get(n)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn to_poly(&self) -> LaurentPoly {
        LaurentPoly::new(self.offset, self.values.clone())
    }

    pub fn from_poly(p: &LaurentPoly) -> Self {
        Self::new(p.min_degree(), p.coeffs().to_vec())
    }
}

impl Add for &ModeSeq {
    type Output = ModeSeq;

    fn add(self, rhs: &ModeSeq) -> ModeSeq {
        if self.is_empty() {
            return rhs.clone();
        }
        if rhs.is_empty() {
            return self.clone();
        }
        let lo = self.offset.min(rhs.offset);
        let hi = self.end().max(rhs.end());
        ModeSeq::new(lo, (lo..hi).map(|n| self.get(n) + rhs.get(n)).collect())
    }
}

impl Neg for &ModeSeq {
    type Output = ModeSeq;

    fn neg(self) -> ModeSeq {
        self.scale_real(-1.0)
    }
}

impl Sub for &ModeSeq {
    type Output = ModeSeq;

    fn sub(self, rhs: &ModeSeq) -> ModeSeq {
        self + &(-rhs)
    }
}

impl Mul<f64> for &ModeSeq {
    type Output = ModeSeq;

    fn mul(self, rhs: f64) -> ModeSeq {
        self.scale_real(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trimming_moves_offset() {
        let s = ModeSeq::from_real(-2, &[0.0, 0.0, 1.0, 2.0, 0.0]);
        assert_eq!(s.offset(), 0);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(1), Complex64::new(2.0, 0.0));
        assert_eq!(s.get(5), ZERO);
    }

    #[test]
    fn upsample_places_entries_on_even_sites() {
        assert_eq!(ModeSeq::delta(0).upsample(), ModeSeq::delta(0));
        assert_eq!(ModeSeq::delta(1).upsample(), ModeSeq::delta(2));
        let ab = ModeSeq::from_real(0, &[1.0, 2.0]).upsample();
        assert_eq!(ab, ModeSeq::from_real(0, &[1.0, 0.0, 2.0]));
    }

    #[test]
    fn dtft_of_deltas() {
        for &k in &[-2.0, 0.3, PI - 0.1] {
            assert!((ModeSeq::delta(0).dtft(k) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            assert!((ModeSeq::delta(1).dtft(k) - Complex64::from_polar(1.0, -k)).norm() < 1e-15);
        }
    }

    #[test]
    fn shifted_inner_matches_explicit_translate() {
        let a = ModeSeq::new(
            -1,
            vec![
                Complex64::new(1.0, 2.0),
                Complex64::new(0.5, -1.0),
                Complex64::new(3.0, 0.0),
            ],
        );
        let b = ModeSeq::from_real(2, &[1.0, -2.0, 4.0, 1.0]);
        for s in -8..8 {
            let direct = a.inner(&b.shift(s));
            assert!((a.inner_shifted(&b, s) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn convolution_matches_dtft_product() {
        let a = ModeSeq::from_real(-1, &[1.0, 2.0, -1.0]);
        let b = ModeSeq::from_real(3, &[0.5, 0.25]);
        let c = a.convolve(&b);
        for j in 0..32 {
            let k = -PI + (j as f64 + 0.5) * 2.0 * PI / 32.0;
            assert!((c.dtft(k) - a.dtft(k) * b.dtft(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn conj_reverse_conjugates_the_transform() {
        let a = ModeSeq::new(2, vec![Complex64::new(1.0, 1.0), Complex64::new(-2.0, 0.5)]);
        let r = a.conj_reverse();
        assert_eq!(r.offset(), -3);
        for &k in &[0.1, 1.7, -2.9] {
            assert!((r.dtft(k) - a.dtft(k).conj()).norm() < 1e-14);
        }
    }
}
