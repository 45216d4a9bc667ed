//! The half-filled nearest-neighbor hopping chain `H = -sum_n (a_n^dag a_{n+1} + h.c.)`.
//!
//! The chain is blocked into cells `b1[n] = (-1)^n a[2n]`, `b2[n] = (-1)^n a[2n+1]`.
//! At level `l` the circuit fills the modes `(u_l, v_l) / sqrt 2`, where `u_l`
//! and `v_l` are the level-`l` wavelet modes of the two filter families,
//! together with their translates by `2^l` cells (`2^{l+1}` sites).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use log::info;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dwt::wavelet_mode;
use crate::error::{Error, Result};
use crate::filters::FilterPair;
use crate::linalg::hermitian_eigenvalues;
use crate::seq::ModeSeq;

/// Exact ground-state energy per site, `-2 / pi`.
pub const EXACT_ENERGY_DENSITY: f64 = -2.0 / PI;

/// `<a_x^dag a_{x+r}>` in the exact ground state.
pub fn exact_two_point(r: i64) -> f64 {
    if r == 0 {
        0.5
    } else {
        let r = r as f64;
        (PI * r / 2.0).sin() / (PI * r)
    }
}

/// `Re <u | F v>` with `(F v)[n] = v[n-1] - v[n]`: the energy of the blocked
/// mode `(u, v) / sqrt 2` (or twice that of `(u, v)` when both have unit norm).
pub fn blocked_overlap(u: &ModeSeq, v: &ModeSeq) -> f64 {
    (u.inner_shifted(v, 1) - u.inner(v)).re
}

/// Places a blocked mode `(u, sign * v) / sqrt 2` on the original chain.
pub fn embed_blocked(u: &ModeSeq, v: &ModeSeq, sign: f64) -> ModeSeq {
    if u.is_empty() && v.is_empty() {
        return ModeSeq::zero();
    }
    let (lo, hi) = match (u.is_empty(), v.is_empty()) {
        (false, false) => (u.offset().min(v.offset()), u.last().max(v.last())),
        (true, _) => (v.offset(), v.last()),
        (_, true) => (u.offset(), u.last()),
    };
    let mut values = Vec::with_capacity(2 * (hi - lo + 1) as usize);
    for n in lo..=hi {
        let stagger = if n.rem_euclid(2) == 0 {
            FRAC_1_SQRT_2
        } else {
            -FRAC_1_SQRT_2
        };
        values.push(u.get(n) * stagger);
        values.push(v.get(n) * (sign * stagger));
    }
    ModeSeq::new(2 * lo, values)
}

/// `-2 Re sum_n phi[n] conj(phi[n+1])`.
pub fn mode_energy(phi: &ModeSeq) -> f64 {
    -2.0 * phi.inner_shifted(phi, -1).re
}

/// Sign of the `v` component in the filled combination. The filled mode is
/// the negative-energy member of the Hadamard pair, decided once per filter
/// pair from level 1.
pub fn hadamard_sign(pair: &FilterPair) -> f64 {
    let a = blocked_overlap(&pair.h_w, &pair.g_w);
    if a < 0.0 {
        1.0
    } else {
        info!(
            "K={} L={}: (u + v) has energy {a:.3e} >= 0, filling (u - v) instead",
            pair.k, pair.l
        );
        -1.0
    }
}

/// Level-`level` wavelet modes `(u, v)` of the two filter families, on the blocked lattice.
pub fn blocked_modes(pair: &FilterPair, level: usize) -> (ModeSeq, ModeSeq) {
    (
        wavelet_mode(&pair.h_s, &pair.h_w, level),
        wavelet_mode(&pair.g_s, &pair.g_w, level),
    )
}

/// The level-`level` filled mode on the original lattice.
pub fn assemble_filled_mode(pair: &FilterPair, level: usize) -> ModeSeq {
    let (u, v) = blocked_modes(pair, level);
    embed_blocked(&u, &v, hadamard_sign(pair))
}

/// The level-`level` empty (positive-energy) partner of the filled mode.
pub fn assemble_empty_mode(pair: &FilterPair, level: usize) -> ModeSeq {
    let (u, v) = blocked_modes(pair, level);
    embed_blocked(&u, &v, -hadamard_sign(pair))
}

/// Generators of the filled single-particle space of a depth-`layers`
/// circuit, one per level; level `l` is translated with stride `2^{l+1}`.
#[derive(Debug, Clone)]
pub struct FilledModeSet {
    pub layers: usize,
    pub modes: Vec<ModeSeq>,
}

impl FilledModeSet {
    pub fn new(pair: &FilterPair, layers: usize) -> Self {
        let sign = hadamard_sign(pair);
        let modes = (1..=layers)
            .into_par_iter()
            .map(|level| {
                let (u, v) = blocked_modes(pair, level);
                embed_blocked(&u, &v, sign)
            })
            .collect();
        Self { layers, modes }
    }

    /// Translation stride of the level-`level` generator on the original lattice.
    pub fn stride(level: usize) -> i64 {
        1i64 << (level + 1)
    }

    /// `C(x, y) = sum_l sum_z phi_l[x - 2^{l+1} z] conj(phi_l[y - 2^{l+1} z])`.
    pub fn two_point(&self, x: i64, y: i64) -> Complex64 {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, phi)| !phi.is_empty())
            .map(|(i, phi)| {
                let s = Self::stride(i + 1);
                let z_lo = -(phi.last() - x.max(y)).div_euclid(s);
                let z_hi = (x.min(y) - phi.offset()).div_euclid(s);
                (z_lo..=z_hi)
                    .map(|z| phi.get(x - s * z) * phi.get(y - s * z).conj())
                    .sum::<Complex64>()
            })
            .sum()
    }

    /// `sum_l 2^{-(l+1)} e_l`.
    pub fn energy_density(&self) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(i, phi)| mode_energy(phi) / Self::stride(i + 1) as f64)
            .sum()
    }

    pub fn restricted_symbol(&self, sites: &[i64]) -> Result<SymbolBlock> {
        check_distinct(sites)?;
        let n = sites.len();
        let rows: Vec<Vec<Complex64>> = sites
            .par_iter()
            .map(|&x| sites.iter().map(|&y| self.two_point(x, y)).collect())
            .collect();
        Ok(SymbolBlock {
            sites: sites.to_vec(),
            matrix: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        })
    }
}

/// `sum_{l <= layers} 2^{-(l+1)} e_l` for the filled modes of `pair`.
pub fn energy_density(pair: &FilterPair, layers: usize) -> f64 {
    FilledModeSet::new(pair, layers).energy_density()
}

/// Two-point function of the depth-`layers` circuit state.
pub fn mera_two_point(pair: &FilterPair, layers: usize, x: i64, y: i64) -> Complex64 {
    FilledModeSet::new(pair, layers).two_point(x, y)
}

/// A Hermitian correlation matrix `<delta_x | psi | delta_y>` on listed sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock<S = i64> {
    pub sites: Vec<S>,
    pub matrix: DMatrix<Complex64>,
}

impl<S> SymbolBlock<S> {
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum SymbolSource<'a> {
    Exact,
    Mera { pair: &'a FilterPair, layers: usize },
}

fn check_distinct<S: PartialEq>(sites: &[S]) -> Result<()> {
    for (i, a) in sites.iter().enumerate() {
        if sites[i + 1..].contains(a) {
            return Err(Error::InvalidParameter(
                "site list contains duplicates".into(),
            ));
        }
    }
    Ok(())
}

/// The symbol restricted to `sites`.
pub fn restricted_symbol(source: SymbolSource<'_>, sites: &[i64]) -> Result<SymbolBlock> {
    match source {
        SymbolSource::Exact => {
            check_distinct(sites)?;
            let n = sites.len();
            let matrix = DMatrix::from_fn(n, n, |i, j| {
                Complex64::new(exact_two_point(sites[j] - sites[i]), 0.0)
            });
            Ok(SymbolBlock {
                sites: sites.to_vec(),
                matrix,
            })
        }
        SymbolSource::Mera { pair, layers } => {
            FilledModeSet::new(pair, layers).restricted_symbol(sites)
        }
    }
}

/// `sum_i [-nu_i ln nu_i - (1 - nu_i) ln(1 - nu_i)]` over the symbol's
/// eigenvalues clamped to `[0, 1]`, in nats.
pub fn entanglement_entropy<S>(block: &SymbolBlock<S>) -> f64 {
    fn h(p: f64) -> f64 {
        if p <= 0.0 {
            0.0
        } else {
            -p * p.ln()
        }
    }
    block
        .eigenvalues()
        .into_iter()
        .map(|nu| nu.clamp(0.0, 1.0))
        .map(|nu| h(nu) + h(1.0 - nu))
        .sum()
}

/// `det[<f_i | psi | f_{2N+1-j}>]_{i,j = 1..N}` for `2N` observables given as
/// coefficient vectors over the block's sites.
pub fn wick_determinant(
    matrix: &DMatrix<Complex64>,
    f_list: &[Vec<Complex64>],
) -> Result<Complex64> {
    if !f_list.len().is_multiple_of(2) {
        return Err(Error::OddObservableCount(f_list.len()));
    }
    let n = f_list.len() / 2;
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    for f in f_list {
        if f.len() != matrix.nrows() {
            return Err(Error::MismatchedSites);
        }
        let norm: f64 = f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "observable norm {norm} exceeds 1"
            )));
        }
    }
    let sandwich = |f: &[Complex64], g: &[Complex64]| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, fi) in f.iter().enumerate() {
            if fi.norm_sqr() == 0.0 {
                continue;
            }
            let row: Complex64 = g
                .iter()
                .enumerate()
                .map(|(j, gj)| matrix[(i, j)] * gj)
                .sum();
            acc += fi.conj() * row;
        }
        acc
    };
    let g = DMatrix::from_fn(n, n, |i, j| sandwich(&f_list[i], &f_list[2 * n - 1 - j]));
    Ok(g.determinant())
}

/// Wick correlation of observables given as sequences on the chain. Every
/// observable must vanish outside `block.sites`.
pub fn wick_correlation(block: &SymbolBlock, f_list: &[ModeSeq]) -> Result<Complex64> {
    if !f_list.len().is_multiple_of(2) {
        return Err(Error::OddObservableCount(f_list.len()));
    }
    let coords: Vec<Vec<Complex64>> = f_list
        .iter()
        .map(|f| {
            let outside = f
                .iter()
                .any(|(n, v)| v.norm() > 0.0 && !block.sites.contains(&n));
            if outside {
                Err(Error::InvalidParameter(
                    "observable supported outside the block".into(),
                ))
            } else {
                Ok(block.sites.iter().map(|&x| f.get(x)).collect())
            }
        })
        .collect::<Result<_>>()?;
    wick_determinant(&block.matrix, &coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::{design_pair, midpoint_grid};

    #[test]
    fn exact_values() {
        assert_eq!(exact_two_point(0), 0.5);
        assert!((exact_two_point(1) - 1.0 / PI).abs() < 1e-15);
        assert!(exact_two_point(2).abs() < 1e-16);
        assert!((exact_two_point(-3) - exact_two_point(3)).abs() < 1e-16);
    }

    #[test]
    fn energies_of_simple_modes() {
        assert_eq!(mode_energy(&ModeSeq::delta(0)), 0.0);
        let pair = ModeSeq::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert!((mode_energy(&pair) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn band_limited_mode_energy_matches_quadrature() {
        // Unit mode with transform supported on pi/4 < |k| < pi/2.
        let half = 1i64 << 11;
        let coeff = |n: i64| {
            if n == 0 {
                0.5
            } else {
                let n = n as f64;
                2.0 * ((PI * n / 2.0).sin() - (PI * n / 4.0).sin()) / (PI * n)
            }
        };
        let values: Vec<f64> = (-half..half).map(coeff).collect();
        let phi = ModeSeq::from_real(-half, &values);
        let band: Vec<f64> = midpoint_grid(1 << 16)
            .into_iter()
            .filter(|k| (PI / 4.0..PI / 2.0).contains(&k.abs()))
            .collect();
        let quadrature = band.iter().map(|k| -2.0 * k.cos()).sum::<f64>() / band.len() as f64;
        let e = mode_energy(&phi) / phi.norm_sqr();
        assert!(
            ((e - quadrature) / quadrature).abs() < 0.05,
            "{e} vs {quadrature}"
        );
    }

    #[test]
    fn haar_single_layer() {
        let pair = design_pair(1, 0).unwrap();
        let phi = assemble_filled_mode(&pair, 1);
        assert_eq!(phi.len(), 4);
        assert!(phi.values().iter().all(|v| (v.re + 0.5).abs() < 1e-15));
        let manual = -2.0 * 3.0 * 0.25;
        assert!((mode_energy(&phi) - manual).abs() < 1e-14);
        assert!((energy_density(&pair, 1) - manual / 4.0).abs() < 1e-14);
    }

    #[test]
    fn filled_modes_are_unit_and_negative() {
        let pair = design_pair(3, 3).unwrap();
        for level in 1..=5 {
            let phi = assemble_filled_mode(&pair, level);
            assert!((phi.norm() - 1.0).abs() < 1e-12);
            // Outermost entries are products of small end taps and may fall
            // below the trimming threshold at deeper levels.
            let blocked_len = ((1i64 << level) - 1) * (pair.m as i64 - 1) + 1;
            let blocked_offset = -(pair.m as i64) << (level - 1);
            assert!(phi.offset() >= 2 * blocked_offset);
            assert!(phi.last() < 2 * (blocked_offset + blocked_len));
            if level <= 2 {
                assert_eq!(phi.len() as i64, 2 * blocked_len);
            }
            assert!(mode_energy(&phi) < 0.0);
            assert!(mode_energy(&assemble_empty_mode(&pair, level)) > 0.0);
        }
    }

    #[test]
    fn blocked_overlap_is_filled_energy() {
        let pair = design_pair(2, 2).unwrap();
        let (u, v) = blocked_modes(&pair, 2);
        let phi = embed_blocked(&u, &v, 1.0);
        assert!((mode_energy(&phi) - blocked_overlap(&u, &v)).abs() < 1e-13);
    }

    #[test]
    fn mera_correlations() {
        let pair = design_pair(3, 3).unwrap();
        let set = FilledModeSet::new(&pair, 12);
        assert!((set.two_point(5, 5).re - 0.5).abs() < 0.02);
        assert!(set.two_point(4, 6).norm() < 0.02);
        assert!((set.two_point(3, 8) - set.two_point(8, 3).conj()).norm() < 1e-12);
        let small = FilledModeSet::new(&pair, 3);
        let reach = (1i64 << 3) * 2 * pair.m as i64;
        assert_eq!(small.two_point(0, reach + 1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exact_blocks() {
        let one = restricted_symbol(SymbolSource::Exact, &[0]).unwrap();
        assert_eq!(one.matrix[(0, 0)], Complex64::new(0.5, 0.0));
        let two = restricted_symbol(SymbolSource::Exact, &[0, 1]).unwrap();
        let eig = two.eigenvalues();
        assert!((eig[0] - (0.5 - 1.0 / PI)).abs() < 1e-14);
        assert!((eig[1] - (0.5 + 1.0 / PI)).abs() < 1e-14);
        assert!(restricted_symbol(SymbolSource::Exact, &[0, 0]).is_err());
    }

    #[test]
    fn entropy_of_diagonal_blocks() {
        let z = Complex64::new(0.0, 0.0);
        let pure = SymbolBlock {
            sites: vec![0, 1],
            matrix: DMatrix::from_row_slice(2, 2, &[z, z, z, Complex64::new(1.0, 0.0)]),
        };
        assert!(entanglement_entropy(&pure).abs() < 1e-15);
        let mixed = SymbolBlock {
            sites: vec![0],
            matrix: DMatrix::from_element(1, 1, Complex64::new(0.5, 0.0)),
        };
        assert!((entanglement_entropy(&mixed) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn wick_examples() {
        let block = restricted_symbol(SymbolSource::Exact, &[0, 1]).unwrap();
        let d0 = ModeSeq::delta(0);
        let d1 = ModeSeq::delta(1);
        let two = wick_correlation(&block, &[d0.clone(), d0.clone()]).unwrap();
        assert!((two.re - 0.5).abs() < 1e-15);

        let four =
            wick_correlation(&block, &[d0.clone(), d1.clone(), d0.clone(), d1.clone()]).unwrap();
        let c0 = exact_two_point(0);
        let c1 = exact_two_point(1);
        assert!((four.re - (c1 * c1 - c0 * c0)).abs() < 1e-15);

        let zero = ModeSeq::zero();
        assert_eq!(
            wick_correlation(&block, &[zero.clone(), zero]).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(matches!(
            wick_correlation(&block, std::slice::from_ref(&d0)),
            Err(Error::OddObservableCount(1))
        ));
        assert!(wick_correlation(&block, &[d0.scale_real(2.0), d0.clone()]).is_err());
        assert!(wick_correlation(&block, &[ModeSeq::delta(7), d0]).is_err());
    }
}
