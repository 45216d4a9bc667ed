//! Truncated discrete wavelet transforms on the infinite line and the
//! single-particle modes produced by their inverse cascades.

pub mod circuit;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::seq::ModeSeq;

pub use circuit::{
    factor_circuit, factor_filters, orthogonality_residual, recompose_circuit, CircuitSpec,
    FilterFamily, GateLayer, Parity,
};

/// Output of an `levels`-level analysis: wavelet outputs for levels
/// `1..=levels` (index 0 holds level 1) and the final scaling output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletCoeffs {
    pub levels: usize,
    pub wavelet: Vec<ModeSeq>,
    pub scaling: ModeSeq,
}

impl WaveletCoeffs {
    pub fn norm(&self) -> f64 {
        (self.wavelet.iter().map(ModeSeq::norm_sqr).sum::<f64>() + self.scaling.norm_sqr()).sqrt()
    }

    /// All-zero coefficients for `levels` levels.
    pub fn zeros(levels: usize) -> Self {
        Self {
            levels,
            wavelet: vec![ModeSeq::zero(); levels],
            scaling: ModeSeq::zero(),
        }
    }
}

/// One convolve-conjugate-downsample step: `y[n] = sum_m conj(h[m - 2n]) x[m]`.
pub fn analysis_step(x: &ModeSeq, h: &ModeSeq) -> ModeSeq {
    if x.is_empty() || h.is_empty() {
        return ModeSeq::zero();
    }
    let lo = -(h.last() - x.offset()).div_euclid(2);
    let hi = (x.last() - h.offset()).div_euclid(2);
    let values = (lo..=hi)
        .map(|n| {
            let a = x.offset().max(h.offset() + 2 * n);
            let b = x.last().min(h.last() + 2 * n);
            (a..=b)
                .map(|m| h.get(m - 2 * n).conj() * x.get(m))
                .sum::<Complex64>()
        })
        .collect();
    ModeSeq::new(lo, values)
}

/// Adjoint of [`analysis_step`]: `x = h * upsample(y)`.
pub fn synthesis_step(y: &ModeSeq, h: &ModeSeq) -> ModeSeq {
    h.convolve(&y.upsample())
}

/// `levels`-level analysis, feeding each scaling output into the next level.
pub fn analyze(signal: &ModeSeq, h_s: &ModeSeq, h_w: &ModeSeq, levels: usize) -> WaveletCoeffs {
    let mut scaling = signal.clone();
    let mut wavelet = Vec::with_capacity(levels);
    for _ in 0..levels {
        wavelet.push(analysis_step(&scaling, h_w));
        scaling = analysis_step(&scaling, h_s);
    }
    WaveletCoeffs {
        levels,
        wavelet,
        scaling,
    }
}

/// Inverse of [`analyze`] for orthonormal filters.
pub fn synthesize(coeffs: &WaveletCoeffs, h_s: &ModeSeq, h_w: &ModeSeq) -> ModeSeq {
    coeffs
        .wavelet
        .iter()
        .rev()
        .fold(coeffs.scaling.clone(), |s, w| {
            &synthesis_step(&s, h_s) + &synthesis_step(w, h_w)
        })
}

/// `delta_n -> delta_{2n}`.
pub fn upsample(f: &ModeSeq) -> ModeSeq {
    f.upsample()
}

/// The level-`level` wavelet mode `[m(h_s) up]^{level-1} m(h_w) up delta_0`,
/// i.e. the synthesis of a unit wavelet coefficient at level `level`.
pub fn wavelet_mode(h_s: &ModeSeq, h_w: &ModeSeq, level: usize) -> ModeSeq {
    assert!(level >= 1, "wavelet levels start at 1");
    (1..level).fold(h_w.clone(), |mode, _| synthesis_step(&mode, h_s))
}

/// The level-`level` scaling mode `[m(h_s) up]^{level} delta_0`.
pub fn scaling_mode(h_s: &ModeSeq, level: usize) -> ModeSeq {
    (0..level).fold(ModeSeq::delta(0), |mode, _| synthesis_step(&mode, h_s))
}

/// Transform of the level-`level` wavelet mode,
/// `h_w(2^{level-1} k) prod_{j < level-1} h_s(2^j k)`, without building it.
pub fn wavelet_mode_dtft(h_s: &ModeSeq, h_w: &ModeSeq, level: usize, k: f64) -> Complex64 {
    let top = (1u64 << (level - 1)) as f64;
    (0..level - 1).fold(h_w.dtft(top * k), |acc, j| {
        acc * h_s.dtft((1u64 << j) as f64 * k)
    })
}

/// Transform of the level-`level` scaling mode, `prod_{j < level} h_s(2^j k)`.
pub fn scaling_mode_dtft(h_s: &ModeSeq, level: usize, k: f64) -> Complex64 {
    (0..level).fold(Complex64::new(1.0, 0.0), |acc, j| {
        acc * h_s.dtft((1u64 << j) as f64 * k)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{conjugate_mirror, design_pair, haar, midpoint_grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> ModeSeq {
        let s = ModeSeq::new(
            rng.random_range(-20..20),
            (0..len)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        );
        s.scale_real(1.0 / s.norm())
    }

    #[test]
    fn haar_average_and_difference() {
        let h = haar();
        let w = conjugate_mirror(&h);
        let avg = analyze(
            &ModeSeq::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]),
            &h,
            &w,
            1,
        );
        assert_eq!(avg.scaling.len(), 1);
        assert!((avg.scaling.values()[0].norm() - 1.0).abs() < 1e-15);
        assert!(avg.wavelet[0].norm() < 1e-15);

        let diff = analyze(
            &ModeSeq::from_real(0, &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
            &h,
            &w,
            1,
        );
        assert!(diff.scaling.norm() < 1e-15);
        assert!((diff.wavelet[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn analysis_matches_literal_formula() {
        let pair = design_pair(2, 1).unwrap();
        let x = ModeSeq::from_real(-3, &[0.3, -1.0, 2.0, 0.5, 0.0, 1.5, -0.7]);
        let y = analysis_step(&x, &pair.h_s);
        for n in -12..12 {
            let direct: Complex64 = (-40..40)
                .map(|m| pair.h_s.get(m - 2 * n).conj() * x.get(m))
                .sum();
            assert!((y.get(n) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn isometry_for_d4() {
        let pair = design_pair(2, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_signal(&mut rng, 64);
        let c = analyze(&x, &pair.h_s, &pair.h_w, 4);
        assert!((c.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn roundtrips() {
        let h = haar();
        let w = conjugate_mirror(&h);
        let back = synthesize(&analyze(&ModeSeq::delta(0), &h, &w, 3), &h, &w);
        assert!(back.max_abs_diff(&ModeSeq::delta(0)) < 1e-15);

        let pair = design_pair(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_signal(&mut rng, 128);
        let back = synthesize(&analyze(&x, &pair.h_s, &pair.h_w, 5), &pair.h_s, &pair.h_w);
        assert!(back.max_abs_diff(&x) < 1e-12);

        assert!(synthesize(&WaveletCoeffs::zeros(4), &h, &w).is_empty());
    }

    #[test]
    fn wavelet_modes() {
        let h = haar();
        let w = conjugate_mirror(&h);
        assert_eq!(wavelet_mode(&h, &w, 1), w);
        let level2 = wavelet_mode(&h, &w, 2);
        assert!(level2.max_abs_diff(&ModeSeq::from_real(-4, &[-0.5, -0.5, 0.5, 0.5])) < 1e-15);

        let pair = design_pair(2, 2).unwrap();
        for level in 1..=5 {
            let mode = wavelet_mode(&pair.h_s, &pair.h_w, level);
            assert!((mode.norm() - 1.0).abs() < 1e-12);
            assert_eq!(mode.len(), ((1 << level) - 1) * (pair.m - 1) + 1);
        }
        let mode = wavelet_mode(&pair.h_s, &pair.h_w, 5);
        for m in 1..6 {
            assert!(mode.inner_shifted(&mode, 32 * m).norm() < 1e-10);
        }
    }

    #[test]
    fn product_formula_matches_cascade() {
        let pair = design_pair(3, 2).unwrap();
        for level in 1..=4 {
            let mode = wavelet_mode(&pair.h_s, &pair.h_w, level);
            let scaling = scaling_mode(&pair.h_s, level);
            for k in midpoint_grid(37) {
                let direct = mode.dtft(k);
                let product = wavelet_mode_dtft(&pair.h_s, &pair.h_w, level, k);
                assert!((direct - product).norm() < 1e-12);
                assert!((scaling.dtft(k) - scaling_mode_dtft(&pair.h_s, level, k)).norm() < 1e-12);
            }
        }
    }
}
