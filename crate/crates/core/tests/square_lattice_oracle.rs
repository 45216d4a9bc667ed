//! Branch energies against the quadratic form of the hopping Hamiltonian on
//! the original (unrotated) square lattice.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavemera::fermion2d::{mode2d, mode2d_energy, mode2d_with, Combination, Mode2D, Sublattice};
use wavemera::filters::design_pair;

fn on_square_lattice(m: &Mode2D) -> HashMap<(i64, i64), Complex64> {
    let mut amplitudes = HashMap::new();
    for (site, v) in m.support() {
        let shift = if site.sublattice == Sublattice::B1 {
            0
        } else {
            1
        };
        let sign = if (site.x + site.y).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
        *amplitudes
            .entry((site.x + site.y + shift, site.x - site.y))
            .or_insert(Complex64::new(0.0, 0.0)) += v * sign;
    }
    amplitudes
}

/// `<phi| H |phi>` with hopping amplitude -1 between nearest neighbours.
fn hopping_energy(phi: &HashMap<(i64, i64), Complex64>) -> Complex64 {
    let at = |p: (i64, i64)| phi.get(&p).copied().unwrap_or_default();
    phi.iter()
        .map(|(&(x, y), v)| {
            let neighbours = at((x + 1, y)) + at((x - 1, y)) + at((x, y + 1)) + at((x, y - 1));
            -v.conj() * neighbours
        })
        .sum()
}

#[test]
fn separable_energies_match_the_square_lattice() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..8 {
        let (k, l) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let (lx, ly) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let pair = design_pair(k, l).unwrap();
        for m in [
            mode2d(&pair, lx, ly),
            mode2d_with(&pair, lx, ly, Combination::Minus),
        ] {
            let phi = on_square_lattice(&m);
            let norm: f64 = phi.values().map(|v| v.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            let brute = hopping_energy(&phi);
            assert!(brute.im.abs() < 1e-10);
            let separable = mode2d_energy(&m);
            assert!(
                (brute.re - separable).abs() < 1e-8,
                "K={k} L={l} ({lx},{ly}): {} vs {separable}",
                brute.re
            );
        }
    }
}
