use oam_ionize_core::analysis::{
    canonical_oam, compliance, position_expectation, radial_histogram, rule_closure,
    spherical_spectrum, split_excited, xy_projection, AnalysisError, SpectrumOptions,
};
use oam_ionize_core::angular::{HarmonicIndex, Polarization};
use oam_ionize_core::scalar::{cplx, Cplx};
use oam_ionize_core::tdse::{init_ground_state, AbsorberConfig, GridSpec, Propagator, PropagatorConfig, Wavefunction};

fn grid() -> GridSpec<f64> {
    GridSpec::cube(48, 0.4).unwrap()
}

/// `(x ± iy)^|m| e^{−r²/2s²}`, proportional to `r^|m| e^{…} Y_|m|^{±|m|}`.
fn extremal(grid: GridSpec<f64>, m: i32, s: f64) -> Wavefunction<f64> {
    Wavefunction::from_fn(grid, move |x, y, z| {
        let r2 = x * x + y * y + z * z;
        let sign = if m < 0 { -1.0 } else { 1.0 };
        cplx(x, sign * y).powu(m.unsigned_abs()) * (-r2 / (2.0 * s * s)).exp()
    })
}

fn opts() -> SpectrumOptions<f64> {
    let mut o = SpectrumOptions::new(6, 48);
    o.r_max = Some(8.0);
    o
}

#[test]
fn split_of_ground_and_of_orthogonal_states() {
    let g = grid();
    let mut cfg = PropagatorConfig::new(0.01, &g);
    cfg.absorber = AbsorberConfig::none();
    let gs = init_ground_state(g, &cfg).unwrap().psi;
    let (a, d) = split_excited(&gs, &gs).unwrap();
    assert!((a - cplx(1.0, 0.0)).norm() < 1e-12);
    assert!(d.norm() < 1e-12);

    let p = Wavefunction::from_fn(g, |x, _, z| cplx(x * (-(x * x + z * z).sqrt()).exp(), 0.0));
    let (a, d) = split_excited(&p, &gs).unwrap();
    assert!(a.norm() < 1e-12);
    assert!((d.norm() - p.norm()).abs() < 1e-12);

    let mut mix = gs.clone();
    mix.scale(cplx(0.3, 0.4));
    mix.axpy(cplx(1.0, 0.0), &p).unwrap();
    let (a, d) = split_excited(&mix, &gs).unwrap();
    assert!((a - cplx(0.3, 0.4)).norm() < 1e-12);
    assert!(gs.inner(&d).unwrap().norm() < 1e-12);

    let other = Wavefunction::<f64>::zeros(GridSpec::cube(32, 0.4).unwrap());
    assert!(matches!(split_excited(&other, &gs), Err(AnalysisError::GridMismatch)));
}

#[test]
fn single_channel_state_has_a_single_channel_spectrum() {
    let psi = extremal(grid(), 2, 1.8);
    let spec = spherical_spectrum(&psi, &opts()).unwrap();
    let main = spec.get(2, 2);
    let leak = spec.total() - main;
    assert!(leak < 1e-6 * main, "leakage {leak:e} of {main:e}");
    assert!(spec.entries.iter().all(|(_, p)| *p >= 0.0));
    assert!(spec.total() <= spec.shell_norm * (1.0 + 1e-9));
    assert_eq!(spec.ranking()[0].0, HarmonicIndex::new(2, 2).unwrap());
}

#[test]
fn spectrum_converges_to_the_shell_norm() {
    // A displaced packet spreads over many channels.
    let psi = Wavefunction::from_fn(grid(), |x, y, z| {
        let (dx, dy, dz) = (x - 1.2, y + 0.7, z - 0.4);
        cplx((-(dx * dx + dy * dy + dz * dz) / 3.0).exp(), 0.2 * x)
    });
    let mut last = 0.0;
    for l_max in [2, 4, 8, 12] {
        // A fixed mesh makes the partial sums nested.
        let mut o = opts();
        o.l_max = l_max;
        o.n_theta = Some(26);
        o.n_phi = Some(52);
        let s = spherical_spectrum(&psi, &o).unwrap();
        assert!(s.total() >= last - 1e-12);
        last = s.total();
        if l_max >= 8 {
            assert!(1.0 - s.total() / s.shell_norm < 1e-2);
        }
    }
}

#[test]
fn mirror_image_swaps_projections() {
    let g = grid();
    let psi = Wavefunction::from_fn(g, |x, y, z| {
        let r2 = x * x + y * y + z * z;
        (cplx(x, y) * 0.7 + cplx(x, -y).powu(2) * cplx(0.1, 0.2) + cplx(z * x, 0.0)) * (-r2 / 5.0).exp()
    });
    let ny = g.n[1];
    let mut mirrored = psi.clone();
    for i in 0..g.n[0] {
        for j in 0..ny {
            for k in 0..g.n[2] {
                mirrored.data[g.index(i, j, k)] = psi.data[g.index(i, ny - 1 - j, k)];
            }
        }
    }
    let a = spherical_spectrum(&psi, &opts()).unwrap();
    let b = spherical_spectrum(&mirrored, &opts()).unwrap();
    for (k, p) in &a.entries {
        let q = b.get(k.l(), -k.m());
        assert!((p - q).abs() < 1e-9 * a.total(), "{k}: {p} vs {q}");
    }
}

#[test]
fn angular_resolution_is_checked() {
    let psi = extremal(grid(), 1, 2.0);
    let mut o = opts();
    o.n_theta = Some(3);
    assert!(matches!(spherical_spectrum(&psi, &o), Err(AnalysisError::Resolution(_))));
    o.n_theta = None;
    o.n_phi = Some(8);
    assert!(matches!(spherical_spectrum(&psi, &o), Err(AnalysisError::Resolution(_))));
}

#[test]
fn closures_contain_the_reported_channels() {
    let h = |l, m| HarmonicIndex::new(l, m).unwrap();
    let lin = rule_closure(1, &Polarization::<f64>::linear_x(), 2, 8);
    for c in [h(2, 0), h(2, 2), h(4, 4)] {
        assert!(lin.contains(&c), "{c}");
    }
    assert!(!lin.contains(&h(1, 1)));
    let circ = rule_closure(1, &Polarization::<f64>::circular_left(), 2, 8);
    for c in [h(0, 0), h(2, 0)] {
        assert!(circ.contains(&c));
    }
    let gauss = rule_closure(0, &Polarization::<f64>::linear_x(), 1, 8);
    assert!(gauss.contains(&h(1, 1)) && gauss.contains(&h(1, -1)));
    assert!(!gauss.contains(&h(2, 0)));
}

#[test]
fn order_zero_closure_forbids_everything_but_the_seed_channel() {
    let psi = Wavefunction::from_fn(grid(), |x, y, z| {
        let r2 = x * x + y * y + z * z;
        cplx(1.0 + x + z * y, 0.0) * (-r2 / 4.0).exp()
    });
    let s = spherical_spectrum(&psi, &opts()).unwrap();
    let r = compliance(&s, 1, &Polarization::linear_x(), 0);
    assert!((r.allowed_weight - s.get(0, 0)).abs() < 1e-15);
    assert!((r.allowed_weight + r.forbidden_weight - s.total()).abs() < 1e-12 * s.total());
    assert!(r.forbidden_weight > 0.0);
}

#[test]
fn projection_integrates_to_the_norm() {
    let psi = extremal(grid(), 2, 2.0);
    let p = xy_projection(&psi);
    assert!((p.integral() - psi.norm_sqr()).abs() < 1e-10 * psi.norm_sqr());
    // |Y₂²|² has no azimuthal dependence: the projection is a ring.
    let n = p.x.len();
    let (a, b) = (p.at(n / 2 + 6, n / 2 - 1), p.at(n / 2 - 1, n / 2 - 7));
    assert!((a / b - 1.0).abs() < 1e-12);
    let mut csv = Vec::new();
    p.write_csv(&mut csv, "test").unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2 + n);
}

#[test]
fn oam_of_eigenstates() {
    let g = grid();
    let mut cfg = PropagatorConfig::new(0.01, &g);
    cfg.absorber = AbsorberConfig::none();
    let prop = Propagator::new(g, cfg, None).unwrap();
    for m in [-2, 1, 3] {
        let psi = extremal(g, m, 1.8);
        let l = canonical_oam(&prop, &psi).unwrap();
        assert!(l[0].abs() < 1e-10 && l[1].abs() < 1e-10, "{l:?}");
        assert!((l[2] - m as f64).abs() < 1e-8, "m={m}: {}", l[2]);
    }
    let s = Wavefunction::from_fn(g, |x, y, z| cplx((-(x * x + y * y + z * z)).exp(), 0.0));
    let l = canonical_oam(&prop, &s).unwrap();
    assert!(l.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn positions_of_symmetric_and_empty_states() {
    let psi = extremal(grid(), 1, 2.0);
    let r = position_expectation(&psi).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");
    let zero = Wavefunction::<f64>::zeros(grid());
    assert!(matches!(position_expectation(&zero), Err(AnalysisError::ZeroNorm)));
    let hist = radial_histogram(&psi, 1.0, 40);
    let total: f64 = hist.iter().sum();
    assert!((total - psi.norm_sqr()).abs() < 1e-6 * total);
}

#[test]
fn spectrum_serializes_as_l_m_p() {
    let psi: Wavefunction<f64> = extremal(grid(), 1, 2.0);
    let s = spherical_spectrum(&psi, &opts()).unwrap();
    let j = s.to_json();
    let first = &j["channels"][0];
    assert!(first.get("L").is_some() && first.get("M").is_some() && first.get("P").is_some());
    let mut csv = Vec::new();
    s.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("L,M,P\n"));
    let _: Cplx<f64> = cplx(0.0, 0.0);
}
