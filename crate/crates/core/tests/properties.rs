use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use wavemera::bounds::{envelope_from_distance, powers_stormer_envelope};
use wavemera::dwt::{analyze, synthesize};
use wavemera::fermion1d::{restricted_symbol, FilledModeSet, SymbolSource};
use wavemera::filters::design_pair;
use wavemera::laurent::{expand_multiplicities, lp_eval, lp_mul, lp_roots, spectral_factor};
use wavemera::{FilterPair, LaurentPoly, ModeSeq};

const LAYERS: usize = 6;

fn pairs() -> &'static [(FilterPair, FilledModeSet)] {
    static PAIRS: OnceLock<Vec<(FilterPair, FilledModeSet)>> = OnceLock::new();
    PAIRS.get_or_init(|| {
        [(1, 1), (2, 2), (3, 1)]
            .into_iter()
            .map(|(k, l)| {
                let pair = design_pair(k, l).unwrap();
                let modes = FilledModeSet::new(&pair, LAYERS);
                (pair, modes)
            })
            .collect()
    })
}

fn complex_coeffs(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..max_len).prop_map(|v| {
        v.into_iter()
            .map(|(re, im)| Complex64::new(re, im))
            .collect()
    })
}

fn scale(p: &LaurentPoly) -> f64 {
    p.coeffs().iter().map(|c| c.norm()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_multiplicative(
        a in complex_coeffs(8), b in complex_coeffs(8),
        da in -4i64..4, db in -4i64..4, k in -PI..PI,
    ) {
        let (p, q) = (LaurentPoly::new(da, a), LaurentPoly::new(db, b));
        let lhs = lp_eval(&lp_mul(&p, &q), k);
        let rhs = lp_eval(&p, k) * lp_eval(&q, k);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + scale(&p) * scale(&q)));
    }

    #[test]
    fn roots_rebuild_the_polynomial(a in complex_coeffs(9), d in -3i64..3) {
        let mut a = a;
        if a.last().unwrap().norm() < 0.1 {
            *a.last_mut().unwrap() = Complex64::new(1.0, 0.0);
        }
        let p = LaurentPoly::new(d, a);
        let roots = expand_multiplicities(&lp_roots(&p).unwrap());
        prop_assert_eq!(roots.len(), p.degree_span());
        let lead = *p.coeffs().last().unwrap();
        let rebuilt = roots.iter().fold(LaurentPoly::new(p.min_degree(), vec![lead]), |acc, &r| {
            lp_mul(&acc, &LaurentPoly::new(0, vec![-r, Complex64::new(1.0, 0.0)]))
        });
        let err = (p.min_degree()..=p.max_degree())
            .map(|n| (p.coeff(n) - rebuilt.coeff(n)).norm())
            .fold(0.0, f64::max);
        prop_assert!(err < 1e-8 * scale(&p), "reconstruction error {err}");
    }

    #[test]
    fn spectral_factor_matches_the_symbol(f in prop::collection::vec(-1.0..1.0f64, 2..8)) {
        prop_assume!(f.iter().map(|c| c.abs()).sum::<f64>() > 0.1);
        let f = LaurentPoly::from_real(0, &f);
        let r = lp_mul(&f, &f.reversed_conj());
        let g = spectral_factor(&r).unwrap();
        prop_assert!(g.max_imag() < 1e-12);
        for i in 0..16 {
            let k = -PI + (i as f64 + 0.5) * PI / 8.0;
            let err = (lp_eval(&g, k).norm_sqr() - lp_eval(&r, k).re).abs();
            prop_assert!(err < 1e-8 * scale(&r), "|g|^2 - r = {err} at k = {k}");
        }
    }

    #[test]
    fn wavelet_transform_is_an_orthogonal_change_of_basis(
        which in 0usize..3, offset in -20i64..20, levels in 1usize..5,
        x in prop::collection::vec(-1.0..1.0f64, 1..40),
    ) {
        let pair = &pairs()[which].0;
        let signal = ModeSeq::from_real(offset, &x);
        let coeffs = analyze(&signal, &pair.h_s, &pair.h_w, levels);
        prop_assert!((coeffs.norm() - signal.norm()).abs() < 1e-10 * (1.0 + signal.norm()));
        let back = synthesize(&coeffs, &pair.h_s, &pair.h_w);
        prop_assert!(back.max_abs_diff(&signal) < 1e-10);
    }

    #[test]
    fn filled_modes_are_orthonormal(
        which in 0usize..3, a in 1usize..=LAYERS, b in 1usize..=LAYERS, za in -3i64..3, zb in -3i64..3,
    ) {
        let modes = &pairs()[which].1.modes;
        let shift = FilledModeSet::stride(b) * zb - FilledModeSet::stride(a) * za;
        let overlap = modes[a - 1].inner_shifted(&modes[b - 1], shift);
        let expected = if a == b && za == zb { 1.0 } else { 0.0 };
        prop_assert!((overlap - expected).norm() < 1e-10, "overlap {overlap}");
    }

    #[test]
    fn two_point_function_is_hermitian(which in 0usize..3, x in -40i64..40, y in -40i64..40) {
        let modes = &pairs()[which].1;
        let (cxy, cyx) = (modes.two_point(x, y), modes.two_point(y, x));
        prop_assert!((cxy - cyx.conj()).norm() < 1e-12);
        prop_assert!(modes.two_point(x, x).im.abs() < 1e-12);
    }

    #[test]
    fn envelope_dominates_the_two_point_discrepancy(
        which in 0usize..3, start in -30i64..30, len in 1usize..8, n in 1usize..4,
    ) {
        let (pair, modes) = &pairs()[which];
        let sites: Vec<i64> = (start..start + len as i64).collect();
        let exact = restricted_symbol(SymbolSource::Exact, &sites).unwrap();
        let mera = restricted_symbol(SymbolSource::Mera { pair, layers: LAYERS }, &sites).unwrap();
        let envelope = powers_stormer_envelope(&exact, &mera, n).unwrap();
        for (i, &x) in sites.iter().enumerate() {
            for (j, &y) in sites.iter().enumerate() {
                let discrepancy = (exact.matrix[(i, j)] - modes.two_point(x, y)).norm();
                prop_assert!(envelope.value >= discrepancy);
                prop_assert!(envelope.value >= envelope_from_distance(discrepancy, n).value - 1e-12);
            }
        }
    }
}
