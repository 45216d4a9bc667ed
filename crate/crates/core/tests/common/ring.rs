//! Direct construction of renormalized bands on a finite ring of the original
//! hopping chain, shared by the integration tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use wavemera::ModeSeq;

pub const CELLS: usize = 256;

/// Places a blocked-lattice mode on one sublattice of a ring of `2 * blocked`
/// original sites, with the `(-1)^n` staggering of cell `n`.
fn on_ring(mode: &ModeSeq, sublattice: usize, blocked: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * blocked];
    for (n, v) in mode.iter() {
        let cell = n.rem_euclid(blocked as i64) as usize;
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        out[2 * cell + sublattice] += v * sign;
    }
    out
}

/// `H psi` for nearest-neighbour hopping of amplitude -1 on a ring.
fn hop(psi: &[Complex64]) -> Vec<Complex64> {
    let n = psi.len();
    (0..n)
        .map(|x| -(psi[(x + 1) % n] + psi[(x + n - 1) % n]))
        .collect()
}

/// Eigenvalues of the effective 2x2 Bloch Hamiltonian of the translates of
/// `modes` by whole level cells, sampled at `k = 2 pi j / CELLS`.
pub fn ring_band(modes: [&ModeSeq; 2], level: usize) -> Vec<(f64, f64, f64)> {
    let blocked = CELLS << level;
    let period = 2usize << level;
    let states: Vec<Vec<Complex64>> = (0..2).map(|a| on_ring(modes[a], a, blocked)).collect();
    let images: Vec<Vec<Complex64>> = states.iter().map(|s| hop(s)).collect();
    let size = 2 * blocked;
    // couplings[a][b][z] = <psi_{a,0}| H |psi_{b,z}>
    let couplings: Vec<Vec<Vec<Complex64>>> = (0..2)
        .map(|a| {
            (0..2)
                .map(|b| {
                    (0..CELLS)
                        .map(|z| {
                            (0..size)
                                .map(|x| {
                                    images[a][x].conj() * states[b][(x + size - z * period) % size]
                                })
                                .sum::<Complex64>()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    (0..CELLS)
        .map(|j| {
            let k = 2.0 * PI * j as f64 / CELLS as f64;
            let bloch = |a: usize, b: usize| -> Complex64 {
                couplings[a][b]
                    .iter()
                    .enumerate()
                    .map(|(z, c)| c * Complex64::from_polar(1.0, -k * z as f64))
                    .sum()
            };
            let (h11, h12, h22) = (bloch(0, 0), bloch(0, 1), bloch(1, 1));
            let top = h12.norm();
            (k, top, h11.norm().max(h22.norm()))
        })
        .collect()
}
