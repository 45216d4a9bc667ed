//! The half-filled square-lattice hopping model in blocked, 45-degree rotated
//! coordinates.
//!
//! Cell `(x, y)` holds `b1(x, y) = (-1)^{x+y} a(x+y, x-y)` and
//! `b2(x, y) = (-1)^{x+y} a(x+y+1, x-y)`. In these variables the Hamiltonian
//! couples only `b1` to `b2`, through the kernel `-(1 - T_x)(1 - T_y)`, so
//! tensor products of one-dimensional wavelet modes decouple it up to the
//! per-branch Hadamard combination.

use std::f64::consts::FRAC_1_SQRT_2;

use log::info;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion1d::{blocked_modes, SymbolBlock};
use crate::filters::FilterPair;
use crate::seq::ModeSeq;

/// Exact ground-state energy per site, `-8 / pi^2`.
pub const EXACT_ENERGY_DENSITY_2D: f64 = -8.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// Largest box side accepted by [`restricted_symbol_2d`].
pub const MAX_BOX: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    B1,
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockedSite {
    pub sublattice: Sublattice,
    pub x: i64,
    pub y: i64,
}

impl BlockedSite {
    /// Position `(X, Y)` of this site on the original square lattice.
    pub fn original(&self) -> (i64, i64) {
        let shift = match self.sublattice {
            Sublattice::B1 => 0,
            Sublattice::B2 => 1,
        };
        (self.x + self.y + shift, self.x - self.y)
    }

    /// Sign relating the blocked variable to the original one.
    pub fn stagger(&self) -> f64 {
        if (self.x + self.y).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Inverse of [`BlockedSite::original`].
    pub fn from_original(big_x: i64, big_y: i64) -> Self {
        let (sublattice, sum) = if (big_x + big_y).rem_euclid(2) == 0 {
            (Sublattice::B1, big_x)
        } else {
            (Sublattice::B2, big_x - 1)
        };
        let x = (sum + big_y) / 2;
        Self {
            sublattice,
            x,
            y: sum - x,
        }
    }
}

/// The two cells of an `R x R` box starting at the origin, sublattice-major.
pub fn box_sites(r: usize) -> Vec<BlockedSite> {
    [Sublattice::B1, Sublattice::B2]
        .into_iter()
        .flat_map(|sublattice| {
            (0..r as i64)
                .flat_map(move |x| (0..r as i64).map(move |y| BlockedSite { sublattice, x, y }))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combination {
    Plus,
    Minus,
}

impl Combination {
    pub fn sign(self) -> f64 {
        match self {
            Combination::Plus => 1.0,
            Combination::Minus => -1.0,
        }
    }
}

/// Branch generator `(u_x (x) u_y, s v_x (x) v_y) / sqrt 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode2D {
    pub level_x: usize,
    pub level_y: usize,
    /// h- and g-family wavelet modes at `level_x`.
    pub x_modes: (ModeSeq, ModeSeq),
    pub y_modes: (ModeSeq, ModeSeq),
    pub combination: Combination,
}

/// `<u | F v>` with `(F v)[n] = v[n-1] - v[n]`.
fn cross_overlap(u: &ModeSeq, v: &ModeSeq) -> Complex64 {
    u.inner_shifted(v, 1) - u.inner(v)
}

fn filled_combination(cx: Complex64, cy: Complex64) -> Combination {
    if (cx * cy).re >= 0.0 {
        Combination::Plus
    } else {
        Combination::Minus
    }
}

impl Mode2D {
    /// Amplitude on a blocked site.
    pub fn amplitude(&self, site: BlockedSite) -> Complex64 {
        let (fx, fy, weight) = match site.sublattice {
            Sublattice::B1 => (&self.x_modes.0, &self.y_modes.0, FRAC_1_SQRT_2),
            Sublattice::B2 => (
                &self.x_modes.1,
                &self.y_modes.1,
                self.combination.sign() * FRAC_1_SQRT_2,
            ),
        };
        fx.get(site.x) * fy.get(site.y) * weight
    }

    /// All nonzero amplitudes.
    pub fn support(&self) -> Vec<(BlockedSite, Complex64)> {
        let mut out = Vec::new();
        for (sublattice, fx, fy) in [
            (Sublattice::B1, &self.x_modes.0, &self.y_modes.0),
            (Sublattice::B2, &self.x_modes.1, &self.y_modes.1),
        ] {
            for (x, _) in fx.iter() {
                for (y, _) in fy.iter() {
                    let site = BlockedSite { sublattice, x, y };
                    out.push((site, self.amplitude(site)));
                }
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        ((self.x_modes.0.norm_sqr() * self.y_modes.0.norm_sqr()
            + self.x_modes.1.norm_sqr() * self.y_modes.1.norm_sqr())
            / 2.0)
            .sqrt()
    }

    /// `(h_x(k_x) h_y(k_y), g_x(k_x) g_y(k_y))`.
    pub fn dtft(&self, kx: f64, ky: f64) -> (Complex64, Complex64) {
        (
            self.x_modes.0.dtft(kx) * self.y_modes.0.dtft(ky),
            self.x_modes.1.dtft(kx) * self.y_modes.1.dtft(ky),
        )
    }
}

/// Generator of branch `(lx, ly)` with an explicit Hadamard sign.
pub fn mode2d_with(pair: &FilterPair, lx: usize, ly: usize, combination: Combination) -> Mode2D {
    Mode2D {
        level_x: lx,
        level_y: ly,
        x_modes: blocked_modes(pair, lx),
        y_modes: blocked_modes(pair, ly),
        combination,
    }
}

/// Filled generator of branch `(lx, ly)`: the Hadamard sign of lower energy.
pub fn mode2d(pair: &FilterPair, lx: usize, ly: usize) -> Mode2D {
    let mut m = mode2d_with(pair, lx, ly, Combination::Plus);
    let cx = cross_overlap(&m.x_modes.0, &m.x_modes.1);
    let cy = cross_overlap(&m.y_modes.0, &m.y_modes.1);
    m.combination = filled_combination(cx, cy);
    if m.combination == Combination::Minus {
        info!(
            "branch ({lx}, {ly}): filling the minus combination, the plus one has energy {:.3e}",
            (cx * cy).re
        );
    }
    m
}

/// `<mode| h |mode>` for the blocked kernel `-(1 - T_x)(1 - T_y)`, from the
/// one-dimensional cross overlaps in each direction.
pub fn mode2d_energy(m: &Mode2D) -> f64 {
    let cx = cross_overlap(&m.x_modes.0, &m.x_modes.1);
    let cy = cross_overlap(&m.y_modes.0, &m.y_modes.1);
    -m.combination.sign() * (cx * cy).re
}

/// Per-level cross overlaps `<u_l | F v_l>` for levels `1..=layers`.
fn level_overlaps(pair: &FilterPair, layers: usize) -> Vec<Complex64> {
    (1..=layers)
        .into_par_iter()
        .map(|l| {
            let (u, v) = blocked_modes(pair, l);
            cross_overlap(&u, &v)
        })
        .collect()
}

/// `sum_{lx <= Lx, ly <= Ly} 2^{-(lx+ly+1)} e_(lx,ly)` per original site.
pub fn energy_density_2d(pair: &FilterPair, lx_max: usize, ly_max: usize) -> f64 {
    let overlaps = level_overlaps(pair, lx_max.max(ly_max));
    let mut total = 0.0;
    for lx in 1..=lx_max {
        for ly in 1..=ly_max {
            let product = overlaps[lx - 1] * overlaps[ly - 1];
            let energy =
                -filled_combination(overlaps[lx - 1], overlaps[ly - 1]).sign() * product.re;
            total += energy / f64::powi(2.0, (lx + ly + 1) as i32);
        }
    }
    total
}

/// `P_l(x1, x2) = sum_z f[x1 - 2^l z] conj(g[x2 - 2^l z])` on `0..r` squared.
fn translate_sum(f: &ModeSeq, g: &ModeSeq, level: usize, r: usize) -> DMatrix<Complex64> {
    let stride = 1i64 << level;
    DMatrix::from_fn(r, r, |i, j| {
        let (x1, x2) = (i as i64, j as i64);
        if f.is_empty() || g.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let z_lo = (x1 - f.last()).max(x2 - g.last()).div_euclid(stride) - 1;
        let z_hi = (x1 - f.offset()).min(x2 - g.offset()).div_euclid(stride) + 1;
        (z_lo..=z_hi)
            .map(|z| f.get(x1 - stride * z) * g.get(x2 - stride * z).conj())
            .sum()
    })
}

/// Correlation matrix `<b_s^dag b_t>` of the depth-`(Lx, Ly)` state on an
/// `R x R` box of cells, both sublattices, ordered as [`box_sites`].
pub fn restricted_symbol_2d(
    pair: &FilterPair,
    lx_max: usize,
    ly_max: usize,
    r: usize,
) -> Result<SymbolBlock<BlockedSite>> {
    if r > MAX_BOX {
        return Err(Error::BoxTooLarge {
            size: r,
            max: MAX_BOX,
        });
    }
    if r == 0 || lx_max == 0 || ly_max == 0 {
        return Err(Error::InvalidParameter(
            "box side and depths must be positive".into(),
        ));
    }
    let depth = lx_max.max(ly_max);
    let modes: Vec<(ModeSeq, ModeSeq)> = (1..=depth)
        .into_par_iter()
        .map(|l| blocked_modes(pair, l))
        .collect();
    let overlaps: Vec<Complex64> = modes.iter().map(|(u, v)| cross_overlap(u, v)).collect();
    let family = |l: usize, a: usize| {
        if a == 0 {
            &modes[l - 1].0
        } else {
            &modes[l - 1].1
        }
    };
    // factors[l-1][a][b] = P^{ab}_l
    let factors: Vec<[[DMatrix<Complex64>; 2]; 2]> = (1..=depth)
        .into_par_iter()
        .map(|l| {
            let p = |a: usize, b: usize| translate_sum(family(l, a), family(l, b), l, r);
            [[p(0, 0), p(0, 1)], [p(1, 0), p(1, 1)]]
        })
        .collect();
    let branches: Vec<(usize, usize, f64)> = (1..=lx_max)
        .flat_map(|lx| (1..=ly_max).map(move |ly| (lx, ly)))
        .map(|(lx, ly)| {
            (
                lx,
                ly,
                filled_combination(overlaps[lx - 1], overlaps[ly - 1]).sign(),
            )
        })
        .collect();

    let sites = box_sites(r);
    let n = sites.len();
    let cells = r * r;
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = sites[i];
            let a = i / cells;
            (0..n)
                .map(|j| {
                    let t = sites[j];
                    let b = j / cells;
                    let (x1, y1, x2, y2) = (s.x as usize, s.y as usize, t.x as usize, t.y as usize);
                    branches
                        .iter()
                        .map(|&(lx, ly, sign)| {
                            let weight = match (a, b) {
                                (0, 0) | (1, 1) => 0.5,
                                _ => 0.5 * sign,
                            };
                            factors[lx - 1][a][b][(x1, x2)]
                                * factors[ly - 1][a][b][(y1, y2)]
                                * weight
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(SymbolBlock {
        sites,
        matrix: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
    })
}
