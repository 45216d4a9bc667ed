//! Momentum-space diagnostics of filter pairs and their modes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dwt::{scaling_mode_dtft, wavelet_mode_dtft};
use crate::fermion1d::{assemble_empty_mode, assemble_filled_mode};
use crate::filters::{midpoint_grid, FilterPair};
use crate::seq::ModeSeq;

/// Default number of momenta in a sampled curve.
pub const DEFAULT_GRID: usize = 1024;
/// Transforms smaller than this have no meaningful phase.
pub const PHASE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledCurve {
    pub kgrid: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SampledCurve {
    pub fn from_fn(kgrid: &[f64], f: impl Fn(f64) -> Complex64 + Sync) -> Self {
        Self {
            kgrid: kgrid.to_vec(),
            values: kgrid.par_iter().map(|&k| f(k)).collect(),
        }
    }

    pub fn from_real_fn(kgrid: &[f64], f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self::from_fn(kgrid, |k| Complex64::new(f(k), 0.0))
    }

    pub fn len(&self) -> usize {
        self.kgrid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kgrid.is_empty()
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise transformation of the samples.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        Self {
            kgrid: self.kgrid.clone(),
            values: self
                .kgrid
                .iter()
                .zip(&self.values)
                .map(|(&k, &v)| f(k, v))
                .collect(),
        }
    }
}

/// Midpoints of `n` equal cells of `(-pi, pi)`; avoids `k = 0` and `k = +-pi`
/// for even `n`.
pub fn default_kgrid(n: usize) -> Vec<f64> {
    midpoint_grid(n)
}

/// `sum_n f[n] e^{-ikn}` on each grid point.
pub fn dtft(f: &ModeSeq, kgrid: &[f64]) -> SampledCurve {
    SampledCurve::from_fn(kgrid, |k| f.dtft(k))
}

/// Folds `k` into `(-pi, pi]`.
pub fn wrap_momentum(k: f64) -> f64 {
    let w = k.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// `theta_w(k) = -i sign(k) e^{ik/2}` for `k` folded into `(-pi, pi]`.
pub fn theta_w(k: f64) -> Complex64 {
    let k = wrap_momentum(k);
    let sign = if k > 0.0 {
        1.0
    } else if k < 0.0 {
        -1.0
    } else {
        0.0
    };
    Complex64::new(0.0, -sign) * Complex64::from_polar(1.0, k / 2.0)
}

/// `theta_s(k) = e^{-ik/2}` for `k` folded into `(-pi, pi]`.
pub fn theta_s(k: f64) -> Complex64 {
    Complex64::from_polar(1.0, -wrap_momentum(k) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDifference {
    /// `arg(v_hat / u_hat)` for the level-`l` wavelet modes of the g and h families.
    pub phase: SampledCurve,
    /// `arg theta_w(k)`.
    pub target: SampledCurve,
    /// `|u_hat|` at each sample.
    pub magnitude: Vec<f64>,
    /// Samples where `|u_hat| < PHASE_FLOOR`.
    pub flagged: Vec<bool>,
}

impl PhaseDifference {
    /// Largest `|phase - target|` (mod 2 pi) over unflagged samples where
    /// `|u_hat|` reaches at least `min_weight` times its peak.
    pub fn max_deviation(&self, min_weight: f64) -> f64 {
        let cut = min_weight * self.magnitude.iter().copied().fold(0.0, f64::max);
        (0..self.magnitude.len())
            .filter(|&i| !self.flagged[i] && self.magnitude[i] >= cut)
            .map(|i| wrap_momentum(self.phase.values[i].re - self.target.values[i].re).abs())
            .fold(0.0, f64::max)
    }
}

/// Relative phase of two transforms against the `theta_w` target.
pub fn phase_difference_of(
    h: impl Fn(f64) -> Complex64 + Sync,
    g: impl Fn(f64) -> Complex64 + Sync,
    kgrid: &[f64],
) -> PhaseDifference {
    let samples: Vec<(Complex64, Complex64)> = kgrid.par_iter().map(|&k| (h(k), g(k))).collect();
    let flagged = samples
        .iter()
        .map(|(hk, _)| hk.norm() < PHASE_FLOOR)
        .collect();
    let values = samples
        .iter()
        .map(|(hk, gk)| Complex64::new((gk / hk).arg(), 0.0))
        .collect();
    PhaseDifference {
        phase: SampledCurve {
            kgrid: kgrid.to_vec(),
            values,
        },
        target: SampledCurve::from_real_fn(kgrid, |k| theta_w(k).arg()),
        magnitude: samples.iter().map(|(hk, _)| hk.norm()).collect(),
        flagged,
    }
}

/// Relative phase of the level-`level` wavelet modes of the two filter families.
pub fn phase_difference(pair: &FilterPair, level: usize, kgrid: &[f64]) -> PhaseDifference {
    phase_difference_of(
        |k| wavelet_mode_dtft(&pair.h_s, &pair.h_w, level, k),
        |k| wavelet_mode_dtft(&pair.g_s, &pair.g_w, level, k),
        kgrid,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Filled,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FermiSupport {
    /// `|phi_hat|` on `|k| < pi/2`.
    pub inside: SampledCurve,
    /// `|phi_hat|` on `|k| >= pi/2`.
    pub outside: SampledCurve,
    /// Largest `|phi_hat|` on the side of the Fermi surface where the mode should vanish.
    pub side_lobe: f64,
    /// Largest `|phi_hat|` overall.
    pub peak: f64,
}

/// Splits `|transform|` at the Fermi points `+-pi/2`.
pub fn fermi_support_of(
    transform: impl Fn(f64) -> Complex64 + Sync,
    kgrid: &[f64],
    kind: ModeKind,
) -> FermiSupport {
    let (inside_k, outside_k): (Vec<f64>, Vec<f64>) =
        kgrid.iter().partition(|k| k.abs() < PI / 2.0);
    let inside = SampledCurve::from_real_fn(&inside_k, |k| transform(k).norm());
    let outside = SampledCurve::from_real_fn(&outside_k, |k| transform(k).norm());
    let wrong = match kind {
        ModeKind::Filled => &outside,
        ModeKind::Empty => &inside,
    };
    FermiSupport {
        side_lobe: wrong.sup_abs(),
        peak: inside.sup_abs().max(outside.sup_abs()),
        inside,
        outside,
    }
}

/// Momentum support of the level-`level` filled or empty mode on the original lattice.
pub fn fermi_support(
    pair: &FilterPair,
    level: usize,
    kgrid: &[f64],
    kind: ModeKind,
) -> FermiSupport {
    let mode = match kind {
        ModeKind::Filled => assemble_filled_mode(pair, level),
        ModeKind::Empty => assemble_empty_mode(pair, level),
    };
    fermi_support_of(|k| mode.dtft(k), kgrid, kind)
}

/// Off-diagonal element of the level-`level` effective Hamiltonian,
/// `2^{-l} sum_t conj(F_1(kappa_t)) (e^{-i kappa_t} - 1) F_2(kappa_t)` with
/// `kappa_t = (k + 2 pi t) / 2^l`.
pub fn alias_sum(
    f1: impl Fn(f64) -> Complex64,
    f2: impl Fn(f64) -> Complex64,
    level: usize,
    k: f64,
) -> Complex64 {
    let n = 1usize << level;
    let sum: Complex64 = (0..n)
        .map(|t| {
            let kappa = (k + 2.0 * PI * t as f64) / n as f64;
            let hop = Complex64::from_polar(1.0, -kappa) - 1.0;
            f1(kappa).conj() * hop * f2(kappa)
        })
        .sum();
    sum / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dispersion {
    pub level: usize,
    /// Positive scaling-block eigenvalue `e_l(k)`.
    pub e_curve: SampledCurve,
    /// Positive wavelet-block eigenvalue `epsilon_l(k)`.
    pub eps_curve: SampledCurve,
    /// Off-diagonal element of the scaling block.
    pub scaling_coupling: SampledCurve,
    /// Off-diagonal element of the wavelet block.
    pub wavelet_coupling: SampledCurve,
}

impl Dispersion {
    /// Deviation of the scaling block from the `-i e^{-ik/2}` phase structure,
    /// relative to its size.
    pub fn scaling_phase_residual(&self) -> f64 {
        let sup = self.scaling_coupling.sup_abs();
        self.scaling_coupling
            .kgrid
            .iter()
            .zip(&self.scaling_coupling.values)
            .map(|(&k, x)| {
                (x * (Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -k / 2.0)).conj())
                    .im
                    .abs()
            })
            .fold(0.0, f64::max)
            / sup
    }

    /// Size of the wavelet block's coupling beyond the Hadamard-diagonal
    /// form `-epsilon_l`, relative to its size.
    pub fn wavelet_interaction_residual(&self) -> f64 {
        let sup = self.wavelet_coupling.sup_abs();
        self.wavelet_coupling
            .values
            .iter()
            .map(|x| (x + x.norm()).norm())
            .fold(0.0, f64::max)
            / sup
    }
}

/// Scaling and wavelet dispersions of the level-`level` renormalized Hamiltonian.
pub fn renormalized_dispersion(pair: &FilterPair, level: usize, kgrid: &[f64]) -> Dispersion {
    let scaling = SampledCurve::from_fn(kgrid, |k| {
        alias_sum(
            |q| scaling_mode_dtft(&pair.h_s, level, q),
            |q| scaling_mode_dtft(&pair.g_s, level, q),
            level,
            k,
        )
    });
    let wavelet = SampledCurve::from_fn(kgrid, |k| {
        alias_sum(
            |q| wavelet_mode_dtft(&pair.h_s, &pair.h_w, level, q),
            |q| wavelet_mode_dtft(&pair.g_s, &pair.g_w, level, q),
            level,
            k,
        )
    });
    Dispersion {
        level,
        e_curve: scaling.map(|_, x| Complex64::new(x.norm(), 0.0)),
        eps_curve: wavelet.map(|_, x| Complex64::new(x.norm(), 0.0)),
        scaling_coupling: scaling,
        wavelet_coupling: wavelet,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::design_pair;

    #[test]
    fn deltas() {
        let grid = default_kgrid(64);
        assert!(dtft(&ModeSeq::delta(0), &grid)
            .values
            .iter()
            .all(|v| (v - 1.0).norm() < 1e-15));
        let shifted = dtft(&ModeSeq::delta(1), &grid);
        for (k, v) in grid.iter().zip(&shifted.values) {
            assert!((v - Complex64::from_polar(1.0, -k)).norm() < 1e-15);
        }
    }

    #[test]
    fn wavelets_vanish_at_zero_momentum() {
        let pair = design_pair(4, 4).unwrap();
        let w = crate::dwt::wavelet_mode(&pair.h_s, &pair.h_w, 1);
        let at_zero = dtft(&w, &[0.0]);
        assert!(at_zero.values[0].norm() < 1e-7);
    }

    #[test]
    fn exact_half_shift_has_exact_phase() {
        let pair = design_pair(2, 1).unwrap();
        let grid = default_kgrid(512);
        let h = |k: f64| wavelet_mode_dtft(&pair.h_s, &pair.h_w, 2, k);
        let diff = phase_difference_of(h, |k| theta_w(k) * h(k), &grid);
        assert!(diff.max_deviation(0.0) < 1e-10);
    }

    #[test]
    fn phase_improves_with_order() {
        let grid = default_kgrid(1024);
        let coarse = phase_difference(&design_pair(1, 1).unwrap(), 2, &grid).max_deviation(0.1);
        let fine = phase_difference(&design_pair(3, 3).unwrap(), 2, &grid).max_deviation(0.1);
        assert!(fine < coarse, "{fine} vs {coarse}");
    }

    #[test]
    fn exact_mode_has_no_side_lobes() {
        let grid = default_kgrid(1024);
        let ideal = |k: f64| {
            if k.abs() < PI / 2.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let support = fermi_support_of(ideal, &grid, ModeKind::Filled);
        assert_eq!(support.side_lobe, 0.0);
        assert_eq!(support.peak, 1.0);
    }

    #[test]
    fn level_zero_is_the_bare_blocked_band() {
        let grid = default_kgrid(128);
        for k in &grid {
            let x = alias_sum(
                |_| Complex64::new(1.0, 0.0),
                |_| Complex64::new(1.0, 0.0),
                0,
                *k,
            );
            assert!((x.norm() - 2.0 * (k / 2.0).sin().abs()).abs() < 1e-14);
        }
    }

    #[test]
    fn haar_scaling_block_is_exact() {
        // Both sublattices carry (delta_0 + delta_1)/sqrt2 at level 1.
        let haar = crate::filters::haar();
        let grid = default_kgrid(64);
        for &k in &grid {
            let x = alias_sum(
                |q| scaling_mode_dtft(&haar, 1, q),
                |q| scaling_mode_dtft(&haar, 1, q),
                1,
                k,
            );
            let by_hand: Complex64 = (0..2)
                .map(|t| {
                    let kappa = (k + 2.0 * PI * t as f64) / 2.0;
                    let s = Complex64::from_polar(1.0, -kappa);
                    (1.0 + s).norm_sqr() / 2.0 * (s - 1.0)
                })
                .sum::<Complex64>()
                / 2.0;
            assert!((x - by_hand).norm() < 1e-14);
        }
    }

    #[test]
    fn wavelet_block_is_gapped() {
        let pair = design_pair(3, 3).unwrap();
        let grid = default_kgrid(256);
        let d = renormalized_dispersion(&pair, 2, &grid);
        let min = d.eps_curve.real().into_iter().fold(f64::INFINITY, f64::min);
        assert!(min > 0.05, "{min}");
        assert!(d.wavelet_interaction_residual() < 0.1);
        assert!(d.scaling_phase_residual() < 0.1);
    }
}
