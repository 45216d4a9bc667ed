//! Lattice factorization of a two-channel orthonormal filter bank into layers
//! of identical nearest-neighbor 2x2 rotations.
//!
//! The polyphase matrix `E(z)` has rows `(H_even, H_odd)` for the scaling
//! filter and for its conjugate-mirror wavelet filter, each read on a window
//! of `M` taps. It factors as
//! `E = R_{J-1} Lambda R_{J-2} ... Lambda R_0` with `Lambda = diag(1, z)` and
//! `J = M / 2`. Layer `j` of the circuit applies `R_j` to every pair of sites
//! of its parity.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::filters::FilterPair;
use crate::seq::ModeSeq;

type Mat2 = [[f64; 2]; 2];

const RESIDUAL_TOL: f64 = 1e-10;
const ORTHONORMALIZE_ITERATIONS: usize = 16;
/// Singular values below this fraction of the largest are treated as zero.
const SINGULAR_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateLayer {
    pub parity: Parity,
    pub gate: Mat2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub depth: usize,
    /// Even site of the first scaling tap; the wavelet filter then ends at
    /// `-1 - offset`.
    #[serde(default)]
    pub offset: i64,
    pub layers: Vec<GateLayer>,
    pub phase_stage: String,
}

/// Describes the staggering and sublattice routing that precede the rotation
/// layers in the full one-dimensional circuit.
pub const PHASE_STAGE: &str = "Block sites 2n, 2n+1 into one cell and multiply both by (-1)^n; \
the even sublattice b1[n] = (-1)^n a[2n] enters the h-filter circuit and the odd sublattice \
b2[n] = (-1)^n a[2n+1] the g-filter circuit; each level's pair of wavelet outputs is then \
combined by the Hadamard map (w_h + w_g)/sqrt2 (filled), (w_h - w_g)/sqrt2 (empty).";

/// Polynomial 2x2 matrix, coefficient of `z^d` at index `d`.
#[derive(Debug, Clone)]
struct PolyMat(Vec<Mat2>);

impl PolyMat {
    fn left_mul(&self, r: &Mat2) -> Self {
        Self(self.0.iter().map(|c| mat_mul(r, c)).collect())
    }

    /// Multiplies the second row by `z`.
    fn delay_second_row(&self) -> Self {
        let mut out = vec![[[0.0; 2]; 2]; self.0.len() + 1];
        for (d, c) in self.0.iter().enumerate() {
            out[d][0] = c[0];
            out[d + 1][1] = c[1];
        }
        Self(out)
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Which of the two filter families a circuit implements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterFamily {
    H,
    G,
}

fn polyphase(h: &ModeSeq, w: &ModeSeq, h_start: i64, w_start: i64, taps: usize) -> PolyMat {
    let mut out = vec![[[0.0; 2]; 2]; taps / 2];
    for (row, filter, start) in [(0, h, h_start), (1, w, w_start)] {
        for (n, v) in filter.iter() {
            let n = (n - start) as usize;
            out[n / 2][row][n % 2] = v.re;
        }
    }
    PolyMat(out)
}

/// Factors an orthonormal scaling/wavelet filter pair of even length into
/// `M / 2` rotation layers. The scaling filter is read from its first tap and
/// the wavelet filter is expected in conjugate-mirror position.
pub fn factor_filters(h_s: &ModeSeq, h_w: &ModeSeq) -> Result<CircuitSpec> {
    let taps = h_s.len();
    if taps == 0 || !taps.is_multiple_of(2) || h_w.len() != taps {
        return Err(Error::InvalidParameter(format!(
            "filters of lengths {} and {} do not form an even-length pair",
            taps,
            h_w.len()
        )));
    }
    factor_positioned(h_s, h_w, h_s.offset(), h_w.offset(), taps)
}

/// Factors the filters occupying `[h_start, h_start + taps)` and
/// `[w_start, w_start + taps)`; coefficients that were trimmed as negligible
/// count as zeros.
fn factor_positioned(
    h_s: &ModeSeq,
    h_w: &ModeSeq,
    h_start: i64,
    w_start: i64,
    taps: usize,
) -> Result<CircuitSpec> {
    let inside = |f: &ModeSeq, start: i64| {
        f.is_empty() || (f.offset() >= start && f.last() < start + taps as i64)
    };
    if taps == 0 || !taps.is_multiple_of(2) || !inside(h_s, h_start) || !inside(h_w, w_start) {
        return Err(Error::InvalidParameter(format!(
            "filters do not fit in {taps} even-aligned taps"
        )));
    }
    if h_s.max_imag().max(h_w.max_imag()) > 1e-12 {
        return Err(Error::InvalidParameter(
            "lattice factorization needs real filters".into(),
        ));
    }
    let depth = taps / 2;
    let target = polyphase(h_s, h_w, h_start, w_start, taps);
    let local = (0..taps as i64)
        .map(|n| TwoFloat::from(h_s.get(h_start + n).re))
        .collect();
    let gates = peel(local);
    let residual = compose(&gates)
        .0
        .iter()
        .zip(&target.0)
        .flat_map(|(a, b)| (0..4).map(move |i| (a[i / 2][i % 2] - b[i / 2][i % 2]).abs()))
        .fold(0.0, f64::max);
    if residual.is_nan() || residual > RESIDUAL_TOL {
        return Err(Error::FactorizationFailed { residual });
    }
    let layers = gates
        .into_iter()
        .enumerate()
        .map(|(j, gate)| GateLayer {
            parity: if j % 2 == 0 {
                Parity::Even
            } else {
                Parity::Odd
            },
            gate,
        })
        .collect();
    Ok(CircuitSpec {
        depth,
        offset: h_start,
        layers,
        phase_stage: PHASE_STAGE.to_string(),
    })
}

/// `sum_i h[i] h[i + 2m] - delta_m` for every even lag, in extended precision.
fn shift_orthonormality(h: &[TwoFloat]) -> Vec<TwoFloat> {
    (0..h.len().div_ceil(2))
        .map(|m| {
            let dot = h
                .iter()
                .zip(&h[2 * m..])
                .fold(TwoFloat::from(0.0), |acc, (a, b)| acc + *a * *b);
            if m == 0 {
                dot - 1.0
            } else {
                dot
            }
        })
        .collect()
}

/// Moves `h` onto the filters orthonormal to their even translates.
///
/// Peeling divides by the leading coefficients of each stage, which can be
/// many orders of magnitude below the filter's peak, so any departure from
/// orthonormality is amplified. Minimum-norm Newton steps with residuals in
/// double-double arithmetic push that departure far below double-precision
/// rounding.
fn orthonormalize(mut h: Vec<TwoFloat>) -> Vec<TwoFloat> {
    let size = |r: &[TwoFloat]| r.iter().map(|v| v.hi().abs()).fold(0.0, f64::max);
    let mut residual = shift_orthonormality(&h);
    for _ in 0..ORTHONORMALIZE_ITERATIONS {
        if size(&residual) < 1e-30 {
            break;
        }
        let coarse: Vec<f64> = h.iter().map(TwoFloat::hi).collect();
        let n = coarse.len();
        let jacobian = DMatrix::from_fn(residual.len(), n, |m, i| {
            let ahead = coarse.get(i + 2 * m).copied().unwrap_or(0.0);
            let behind = if i >= 2 * m { coarse[i - 2 * m] } else { 0.0 };
            ahead + behind
        });
        let rhs = DVector::from_iterator(residual.len(), residual.iter().map(TwoFloat::hi));
        let svd = jacobian.svd(true, true);
        let cutoff = svd.singular_values.max() * SINGULAR_CUTOFF;
        let Ok(step) = svd.solve(&rhs, cutoff) else {
            break;
        };
        let trial: Vec<TwoFloat> = h.iter().zip(step.iter()).map(|(a, d)| *a - *d).collect();
        let trial_residual = shift_orthonormality(&trial);
        if size(&trial_residual) >= size(&residual) {
            break;
        }
        h = trial;
        residual = trial_residual;
    }
    h
}

/// Polyphase coefficients of `h` with its conjugate mirror as second row.
fn mirrored_polyphase(h: &[TwoFloat]) -> Vec<[[TwoFloat; 2]; 2]> {
    let taps = h.len();
    let mirror = |j: usize| {
        if j.is_multiple_of(2) {
            -h[taps - 1 - j]
        } else {
            h[taps - 1 - j]
        }
    };
    (0..taps / 2)
        .map(|d| [[h[2 * d], h[2 * d + 1]], [mirror(2 * d), mirror(2 * d + 1)]])
        .collect()
}

/// Lattice gates of the paraunitary matrix whose first row is the polyphase
/// of `h` and whose second row is its conjugate mirror, in composition order.
///
/// Each stage takes the rotation that clears the top coefficient of the first
/// row and the constant coefficient of the second, then removes one delay;
/// the rotation angle lies in `(-pi/2, pi/2]`. The remaining first row is
/// projected back onto orthonormal filters and the second row rebuilt as its
/// mirror, so rounding errors do not compound from stage to stage.
fn peel(h: Vec<TwoFloat>) -> Vec<Mat2> {
    let zero = TwoFloat::from(0.0);
    let one = TwoFloat::from(1.0);
    let mut e = mirrored_polyphase(&orthonormalize(h));
    let mut gates = Vec::with_capacity(e.len());
    while e.len() > 1 {
        let top = e[e.len() - 1];
        let bottom = e[0];
        let constraint = [
            [top[0][0], top[1][0]],
            [top[0][1], top[1][1]],
            [bottom[1][0], -bottom[0][0]],
            [bottom[1][1], -bottom[0][1]],
        ]
        .into_iter()
        .max_by(|a, b| {
            (a[0] * a[0] + a[1] * a[1])
                .hi()
                .total_cmp(&(b[0] * b[0] + b[1] * b[1]).hi())
        })
        .expect("four constraints");
        let length = (constraint[0] * constraint[0] + constraint[1] * constraint[1]).sqrt();
        // (c, -s) is orthogonal to the constraint row.
        let (mut c, mut s) = if length.hi() > 0.0 {
            (-constraint[1] / length, -constraint[0] / length)
        } else {
            (one, zero)
        };
        if c.hi() < 0.0 || (c.hi() == 0.0 && s.hi() < 0.0) {
            c = -c;
            s = -s;
        }
        let rotated: Vec<[[TwoFloat; 2]; 2]> = e
            .iter()
            .map(|m| {
                let row0 = [c * m[0][0] - s * m[1][0], c * m[0][1] - s * m[1][1]];
                let row1 = [s * m[0][0] + c * m[1][0], s * m[0][1] + c * m[1][1]];
                [row0, row1]
            })
            .collect();
        let reduced: Vec<[[TwoFloat; 2]; 2]> = (0..rotated.len() - 1)
            .map(|d| [rotated[d][0], rotated[d + 1][1]])
            .collect();
        let first_row: Vec<TwoFloat> = reduced.iter().flat_map(|m| m[0]).collect();
        let candidate = mirrored_polyphase(&orthonormalize(first_row));
        let agreement: f64 = candidate
            .iter()
            .zip(&reduced)
            .map(|(a, b)| (a[1][0] * b[1][0] + a[1][1] * b[1][1]).hi())
            .sum();
        e = if agreement < 0.0 {
            candidate
                .into_iter()
                .map(|m| [m[0], [-m[1][0], -m[1][1]]])
                .collect()
        } else {
            candidate
        };
        gates.push([[c.hi(), s.hi()], [-s.hi(), c.hi()]]);
    }
    let last = e[0];
    gates.push([
        [last[0][0].hi(), last[0][1].hi()],
        [last[1][0].hi(), last[1][1].hi()],
    ]);
    gates.reverse();
    gates
}

fn compose(gates: &[Mat2]) -> PolyMat {
    let mut layers = gates.iter();
    let first = layers.next().copied().unwrap_or([[1.0, 0.0], [0.0, 1.0]]);
    layers.fold(PolyMat(vec![first]), |e, g| {
        e.delay_second_row().left_mul(g)
    })
}

/// Circuit of one filter family of `pair`, with the scaling filter on
/// `[0, M)` and the wavelet filter on `[-M, -1]`.
pub fn factor_circuit(pair: &FilterPair, family: FilterFamily) -> Result<CircuitSpec> {
    let (s, w) = match family {
        FilterFamily::H => (&pair.h_s, &pair.h_w),
        FilterFamily::G => (&pair.g_s, &pair.g_w),
    };
    let start = s.offset() - s.offset().rem_euclid(2);
    let span = (s.last() + 1 - start) as usize;
    let taps = (span + span % 2).max(pair.m);
    factor_positioned(s, w, start, -start - taps as i64, taps)
}

/// Multiplies the layers back into filters: the scaling filter starting at
/// `offset` and the wavelet filter in the mirrored position.
pub fn recompose_circuit(c: &CircuitSpec) -> (ModeSeq, ModeSeq) {
    let gates: Vec<Mat2> = c.layers.iter().map(|l| l.gate).collect();
    let e = compose(&gates);
    let taps = 2 * e.0.len();
    let row = |r: usize| -> Vec<f64> { (0..taps).map(|n| e.0[n / 2][r][n % 2]).collect() };
    (
        ModeSeq::from_real(c.offset, &row(0)),
        ModeSeq::from_real(-c.offset - taps as i64, &row(1)),
    )
}

/// Largest deviation of `g^T g` from the identity over all layers.
pub fn orthogonality_residual(c: &CircuitSpec) -> f64 {
    c.layers
        .iter()
        .map(|l| {
            let p = mat_mul(&transpose(&l.gate), &l.gate);
            (p[0][0] - 1.0)
                .abs()
                .max((p[1][1] - 1.0).abs())
                .max(p[0][1].abs())
        })
        .fold(0.0, f64::max)
}
