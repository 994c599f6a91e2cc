use oam_ionize_core::angular::{
    clebsch_gordan, derive_selection_rules, expand_sin_power_phase, hi_angular_coupling,
    hi_emission_coupling, hii_angular_coupling, product_expansion, AngularFactor, HamiltonianPart,
    HarmonicIndex, Polarization,
};
use oam_ionize_core::quadrature::{integrate_harmonic_triple, SphereQuadrature, ZERO_THRESHOLD};
use oam_ionize_core::scalar::{cis, cplx, Cplx};
use proptest::prelude::*;

fn idx(l: i32, m: i32) -> HarmonicIndex {
    HarmonicIndex::new(l, m).unwrap()
}

fn generic_pol() -> Polarization<f64> {
    Polarization::new(cplx(1.0, 0.0), cplx(0.3, 0.2)).unwrap()
}

fn all_pols() -> Vec<Polarization<f64>> {
    vec![
        Polarization::linear_x(),
        Polarization::linear_y(),
        Polarization::circular_left(),
        Polarization::circular_right(),
        generic_pol(),
    ]
}

prop_compose! {
    fn cg_args()(l1 in 0i64..=8, l2 in 0i64..=8)
        (m1 in -l1..=l1, m2 in -l2..=l2, l in (l1 - l2).abs()..=(l1 + l2), l1 in Just(l1), l2 in Just(l2))
        -> (i64, i64, i64, i64, i64)
    {
        (l1, l2, m1, m2, l)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cg_reflection_symmetry((l1, l2, m1, m2, l) in cg_args()) {
        let m = m1 + m2;
        prop_assume!(m.abs() <= l);
        let a = clebsch_gordan(l1, l2, m1, m2, l, m).unwrap();
        let b = clebsch_gordan(l1, l2, -m1, -m2, l, -m).unwrap();
        let sign = if (l1 + l2 - l) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - sign * b).abs() < 1e-13);
    }

    #[test]
    fn cg_orthogonality(l1 in 0i64..=6, l2 in 0i64..=6, pick in 0usize..1000) {
        let ls: Vec<i64> = ((l1 - l2).abs()..=(l1 + l2)).collect();
        let l = ls[pick % ls.len()];
        let lp = ls[(pick / 7) % ls.len()];
        for m in -l.min(lp)..=l.min(lp) {
            let mut s = 0.0;
            for m1 in -l1..=l1 {
                let m2 = m - m1;
                if m2.abs() > l2 {
                    continue;
                }
                s += clebsch_gordan(l1, l2, m1, m2, l, m).unwrap()
                    * clebsch_gordan(l1, l2, m1, m2, lp, m).unwrap();
            }
            let want = if l == lp { 1.0 } else { 0.0 };
            prop_assert!((s - want).abs() < 1e-12, "l={l} lp={lp} m={m} s={s}");
        }
    }

    #[test]
    fn product_conserves_projection_and_matches_quadrature(
        l1 in 0i32..=4, l2 in 0i32..=4, s1 in 0i32..100, s2 in 0i32..100
    ) {
        let a = idx(l1, s1 % (2 * l1 + 1) - l1);
        let b = idx(l2, s2 % (2 * l2 + 1) - l2);
        let prod = product_expansion::<f64>(a, b);
        prop_assert!(prod.iter().all(|(k, _)| k.m() == a.m() + b.m()));
        let q = SphereQuadrature::for_degree(12, 12);
        for c in HarmonicIndex::all_upto(l1 + l2) {
            let oracle = integrate_harmonic_triple::<f64>(c, a, b, &q).unwrap();
            prop_assert!((oracle - prod.coefficient(c)).norm() < 1e-10, "{a}·{b} at {c}");
        }
    }
}

#[test]
fn sin_power_expansions_match_pointwise() {
    let (nt, np) = (50, 100);
    for n in 0u32..=8 {
        for m in -8i32..=8 {
            let f = AngularFactor::new(n, m);
            if !f.is_band_limited() {
                assert!(expand_sin_power_phase::<f64>(f).is_err());
                continue;
            }
            let e = expand_sin_power_phase::<f64>(f).unwrap();
            assert!(e.max_l().unwrap() <= n as i32);
            for i in 0..nt {
                let theta = std::f64::consts::PI * (i as f64 + 0.5) / nt as f64;
                for j in 0..np {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / np as f64;
                    let d = (e.evaluate(theta, phi) - f.evaluate(theta, phi)).norm();
                    assert!(d < 1e-12, "n={n} m={m} θ={theta} φ={phi} err={d}");
                }
            }
        }
    }
}

#[test]
fn linear_coupling_vanishes_exactly_off_rule() {
    let states = HarmonicIndex::all_upto(8);
    for ell in -3..=3 {
        for pol in all_pols() {
            let rules = derive_selection_rules(ell, &pol, HamiltonianPart::HI);
            for &i in &states {
                for &f in &states {
                    if !rules.allows(i, f) {
                        let c = hi_angular_coupling(ell, &pol, i, f);
                        assert_eq!(c.norm(), 0.0, "ℓ={ell} {pol} {i}→{f}");
                    }
                }
            }
        }
    }
}

/// Direct quadrature of the linear-term angular integral, written out from the
/// field rather than through any expansion.
fn oracle_hi(ell: i32, pol: &Polarization<f64>, i: HarmonicIndex, f: HarmonicIndex, conj: bool) -> Cplx<f64> {
    let q = SphereQuadrature::for_degree(24, 24).grid::<f64>();
    q.integrate(|t, p| {
        let (a, b, w) = if conj {
            (pol.alpha().conj(), pol.beta().conj(), cis(-(ell as f64) * p))
        } else {
            (pol.alpha(), pol.beta(), cis(ell as f64 * p))
        };
        let yf = oam_ionize_core::angular::spherical_harmonic::<f64>(f.l() as i64, f.m() as i64, t, p);
        let yi = oam_ionize_core::angular::spherical_harmonic::<f64>(i.l() as i64, i.m() as i64, t, p);
        yf.conj() * (a * p.cos() + b * p.sin()) * w * t.sin().powi(ell.abs() + 1) * yi
    })
}

#[test]
fn rule_allowed_zeros_are_oracle_zeros() {
    let s = idx(0, 0);
    for ell in -3..=3 {
        for pol in all_pols() {
            let rules = derive_selection_rules(ell, &pol, HamiltonianPart::HI);
            for f in HarmonicIndex::all_upto(8) {
                if !rules.allows(s, f) {
                    continue;
                }
                let c = hi_angular_coupling(ell, &pol, s, f);
                let o = oracle_hi(ell, &pol, s, f, false);
                assert!((c - o).norm() < 1e-10, "ℓ={ell} {pol} →{f}: {c} vs {o}");
                if c.norm() == 0.0 {
                    assert!(o.norm() < ZERO_THRESHOLD);
                }
            }
            let hii = derive_selection_rules(ell, &pol, HamiltonianPart::HII);
            for f in HarmonicIndex::all_upto(8) {
                let c = hii_angular_coupling(ell, &pol, s, f);
                if !hii.allows(s, f) {
                    assert_eq!(c.norm(), 0.0);
                }
            }
        }
    }
}

#[test]
fn emission_partner_matches_conjugate_field_term() {
    for ell in [-2, 1, 3] {
        let pol = generic_pol();
        for i in HarmonicIndex::all_upto(3) {
            for f in HarmonicIndex::all_upto(5) {
                let c = hi_emission_coupling(ell, &pol, i, f);
                let o = oracle_hi(ell, &pol, i, f, true);
                assert!((c - o).norm() < 1e-10, "ℓ={ell} {i}→{f}");
            }
        }
    }
}
