//! A-priori error bounds for correlation functions of the circuit states and
//! their empirical verification against the exact ground state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion1d::{
    restricted_symbol, wick_determinant, FilledModeSet, SymbolBlock, SymbolSource,
};
use crate::filters::FilterPair;
use crate::linalg::hermitian_norm;
use crate::seq::ModeSeq;

/// Added to a pair's recorded half-shift error before it enters a bound.
pub const EPSILON_MARGIN: f64 = 1e-6;
/// The trace-norm envelope is only meaningful below this value.
pub const ENVELOPE_VALIDITY: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "M")]
    pub m: usize,
    /// Size of the union of observable supports.
    #[serde(rename = "D")]
    pub d: usize,
    /// Half the number of observables.
    #[serde(rename = "N")]
    pub n: usize,
    /// Circuit depth; `None` drops the depth term.
    pub layers: Option<usize>,
    #[serde(rename = "C")]
    pub c: f64,
    pub delta: f64,
    pub bound: f64,
    pub measured: Option<f64>,
    pub satisfied: Option<bool>,
}

impl BoundReport {
    fn with_measurement(mut self, measured: f64) -> Self {
        self.measured = Some(measured);
        self.satisfied = Some(measured <= self.bound);
        self
    }
}

/// `C = 2^{3/2} sqrt(D) B M`, `delta = C 2^{-L/2} + 6 eps log2(C/eps)^2` and
/// `bound = 24 sqrt(N delta)`.
pub fn theorem_bound(
    epsilon: f64,
    b: f64,
    m: usize,
    d: usize,
    n: usize,
    layers: Option<usize>,
) -> Result<BoundReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if b < 1.0 || m < 2 || d < 1 || n < 1 {
        return Err(Error::InvalidParameter(format!(
            "need B >= 1, M >= 2, D >= 1, N >= 1 (got {b}, {m}, {d}, {n})"
        )));
    }
    if layers == Some(0) {
        return Err(Error::InvalidParameter(
            "the circuit needs at least one layer".into(),
        ));
    }
    let c = 2f64.powf(1.5) * (d as f64).sqrt() * b * m as f64;
    let depth_term = layers.map_or(0.0, |l| c * 2f64.powf(-(l as f64) / 2.0));
    let delta = depth_term + 6.0 * epsilon * (c / epsilon).log2().powi(2);
    Ok(BoundReport {
        epsilon,
        b,
        m,
        d,
        n,
        layers,
        c,
        delta,
        bound: 24.0 * (n as f64).sqrt() * delta.sqrt(),
        measured: None,
        satisfied: None,
    })
}

/// [`theorem_bound`] with the constants of `pair`.
pub fn pair_bound(pair: &FilterPair, d: usize, n: usize, layers: usize) -> Result<BoundReport> {
    theorem_bound(
        pair.epsilon + EPSILON_MARGIN,
        pair.b.max(1.0),
        pair.m,
        d,
        n,
        Some(layers),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    /// `|| omega|_F - omega_MERA|_F ||`.
    pub gap: f64,
    pub two_delta: f64,
    pub ok: bool,
}

/// Operator-norm distance between the exact and circuit symbols on `sites`,
/// compared against `2 delta` with `D = |sites|`.
pub fn single_particle_gap(pair: &FilterPair, layers: usize, sites: &[i64]) -> Result<GapReport> {
    if sites.is_empty() || sites.len() > 256 {
        return Err(Error::InvalidParameter(format!(
            "need 1 to 256 sites, got {}",
            sites.len()
        )));
    }
    let exact = restricted_symbol(SymbolSource::Exact, sites)?;
    let mera = restricted_symbol(SymbolSource::Mera { pair, layers }, sites)?;
    let gap = hermitian_norm(&(&exact.matrix - &mera.matrix));
    let two_delta = 2.0 * pair_bound(pair, sites.len(), 1, layers)?.delta;
    Ok(GapReport {
        gap,
        two_delta,
        ok: gap <= two_delta,
    })
}

fn union_support(f_list: &[ModeSeq]) -> Vec<i64> {
    let mut sites: Vec<i64> = f_list
        .iter()
        .flat_map(|f| f.iter().filter(|(_, v)| v.norm() > 0.0).map(|(n, _)| n))
        .collect();
    sites.sort_unstable();
    sites.dedup();
    sites
}

/// `|G_exact - G_MERA|` for one observable list, using an already built
/// set of filled modes.
fn correlation_discrepancy(modes: &FilledModeSet, f_list: &[ModeSeq]) -> Result<(f64, usize)> {
    if !f_list.len().is_multiple_of(2) {
        return Err(Error::OddObservableCount(f_list.len()));
    }
    let sites = union_support(f_list);
    if sites.is_empty() {
        return Ok((0.0, 0));
    }
    let coords: Vec<Vec<Complex64>> = f_list
        .iter()
        .map(|f| sites.iter().map(|&x| f.get(x)).collect())
        .collect();
    let exact = restricted_symbol(SymbolSource::Exact, &sites)?;
    let mera = modes.restricted_symbol(&sites)?;
    let g_exact = wick_determinant(&exact.matrix, &coords)?;
    let g_mera = wick_determinant(&mera.matrix, &coords)?;
    Ok(((g_exact - g_mera).norm(), sites.len()))
}

/// Compares the Wick correlation of `f_list` in the exact and the circuit
/// state against the bound for the list's support size.
pub fn verify_correlation_bound(
    pair: &FilterPair,
    layers: usize,
    f_list: &[ModeSeq],
) -> Result<BoundReport> {
    let modes = FilledModeSet::new(pair, layers);
    let (measured, d) = correlation_discrepancy(&modes, f_list)?;
    let n = (f_list.len() / 2).max(1);
    Ok(pair_bound(pair, d.max(1), n, layers)?.with_measurement(measured))
}

/// Parameters of a randomized verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialConfig {
    pub trials: usize,
    pub seed: u64,
    /// Largest `N`; each trial draws `2N` observables with `N` in `1..=max_n`.
    pub max_n: usize,
    /// Largest union support.
    pub max_support: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            seed: 0,
            max_n: 2,
            max_support: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub index: usize,
    /// Union of the observables' supports.
    pub sites: Vec<i64>,
    pub report: BoundReport,
    pub gap: GapReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialSummary {
    pub config: TrialConfig,
    /// Trials where the correlation discrepancy exceeded its bound.
    pub violations: usize,
    /// Trials where the symbol gap exceeded `2 delta`.
    pub gap_violations: usize,
    /// The trial with the largest ratio of measured discrepancy to bound.
    pub worst: BoundReport,
    pub worst_gap: GapReport,
    pub outcomes: Vec<TrialOutcome>,
}

impl TrialSummary {
    pub fn satisfied(&self) -> bool {
        self.violations == 0 && self.gap_violations == 0
    }
}

/// Random observables for trial `index`: `2N` vectors of norm at most 1 on
/// a common set of at most `max_support` sites near a random origin.
pub fn random_observables(config: &TrialConfig, index: usize) -> Vec<ModeSeq> {
    let mut rng = ChaCha8Rng::seed_from_u64(
        config
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index as u64),
    );
    let n = rng.random_range(1..=config.max_n.max(1));
    let support = rng.random_range(1..=config.max_support.max(1));
    let origin: i64 = rng.random_range(-64..64);
    let mut sites: Vec<i64> = Vec::with_capacity(support);
    while sites.len() < support {
        let s = origin + rng.random_range(0..(2 * support as i64 + 2));
        if !sites.contains(&s) {
            sites.push(s);
        }
    }
    (0..2 * n)
        .map(|_| {
            let mut values: Vec<(i64, Complex64)> = Vec::with_capacity(sites.len());
            for &s in &sites {
                if rng.random_bool(0.7) {
                    values.push((
                        s,
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    ));
                }
            }
            if values.is_empty() {
                values.push((sites[0], Complex64::new(1.0, 0.0)));
            }
            let norm: f64 = values.iter().map(|(_, v)| v.norm_sqr()).sum::<f64>().sqrt();
            let radius: f64 = rng.random_range(0.05..=1.0);
            let lo = values.iter().map(|(s, _)| *s).min().unwrap_or(0);
            let hi = values.iter().map(|(s, _)| *s).max().unwrap_or(0);
            let mut dense = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
            for (s, v) in values {
                dense[(s - lo) as usize] = v * (radius / norm);
            }
            ModeSeq::new(lo, dense)
        })
        .collect()
}

/// Runs `config.trials` independent randomized checks of the correlation
/// bound and of the single-particle gap on each trial's support.
pub fn run_trials(pair: &FilterPair, layers: usize, config: &TrialConfig) -> Result<TrialSummary> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let modes = FilledModeSet::new(pair, layers);
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|index| {
            let f_list = random_observables(config, index);
            let (measured, d) = correlation_discrepancy(&modes, &f_list)?;
            let report =
                pair_bound(pair, d.max(1), f_list.len() / 2, layers)?.with_measurement(measured);
            let sites = union_support(&f_list);
            let exact = restricted_symbol(SymbolSource::Exact, &sites)?;
            let mera = modes.restricted_symbol(&sites)?;
            let gap = hermitian_norm(&(&exact.matrix - &mera.matrix));
            let two_delta = 2.0 * pair_bound(pair, sites.len(), 1, layers)?.delta;
            Ok(TrialOutcome {
                index,
                sites,
                report,
                gap: GapReport {
                    gap,
                    two_delta,
                    ok: gap <= two_delta,
                },
            })
        })
        .collect::<Result<_>>()?;
    let violations = outcomes
        .iter()
        .filter(|o| o.report.satisfied != Some(true))
        .count();
    let gap_violations = outcomes.iter().filter(|o| !o.gap.ok).count();
    let ratio = |r: &BoundReport| r.measured.unwrap_or(0.0) / r.bound;
    let worst = outcomes
        .iter()
        .map(|o| &o.report)
        .max_by(|a, b| ratio(a).total_cmp(&ratio(b)))
        .cloned();
    let worst_gap = outcomes
        .iter()
        .map(|o| o.gap)
        .max_by(|a, b| (a.gap / a.two_delta).total_cmp(&(b.gap / b.two_delta)));
    Ok(TrialSummary {
        config: *config,
        violations,
        gap_violations,
        worst: worst.expect("at least one trial"),
        worst_gap: worst_gap.expect("at least one trial"),
        outcomes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub value: f64,
    /// Whether `value` is below the threshold where the estimate applies.
    pub valid: bool,
}

/// `24 sqrt(N ||omega_exact - omega_MERA||)` on a common block.
pub fn powers_stormer_envelope<S: PartialEq>(
    block_exact: &SymbolBlock<S>,
    block_mera: &SymbolBlock<S>,
    n: usize,
) -> Result<Envelope> {
    if block_exact.sites != block_mera.sites {
        return Err(Error::MismatchedSites);
    }
    let distance = hermitian_norm(&(&block_exact.matrix - &block_mera.matrix));
    Ok(envelope_from_distance(distance, n))
}

/// The envelope for a known symbol distance.
pub fn envelope_from_distance(distance: f64, n: usize) -> Envelope {
    let value = 24.0 * (n as f64 * distance).sqrt();
    Envelope {
        value,
        valid: value < ENVELOPE_VALIDITY,
    }
}
