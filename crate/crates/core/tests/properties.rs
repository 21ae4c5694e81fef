#![allow(clippy::needless_range_loop)]

use approx::assert_relative_eq;
use proptest::prelude::*;

use vidlab::config::ScenarioConfig;
use vidlab::decay::{fit_decay, pm_for, poly_bound, DecayModel, PolyBoundParams};
use vidlab::io::format_f64;
use vidlab::kernels::{KernelSpec, PolynomialKernel, PronyKernel, PronyTerm};
use vidlab::solver::{run, InitialData, MaterialField1D, Mesh1D, SimConfig};
use vidlab::tensor::{convexity_bounds, VoigtTensor};

fn symmetric(size: usize, entries: &[f64]) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; size]; size];
    let mut k = 0;
    for i in 0..size {
        for j in i..size {
            m[i][j] = entries[k];
            m[j][i] = entries[k];
            k += 1;
        }
    }
    m
}

fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= a[c][c];
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_match_3x3_invariants(e in prop::collection::vec(-5.0f64..5.0, 6)) {
        let m = symmetric(3, &e);
        let t = VoigtTensor::new(2, m.clone()).unwrap();
        let l = t.eigenvalues();
        let trace = m[0][0] + m[1][1] + m[2][2];
        let c2 = m[0][0] * m[1][1] + m[1][1] * m[2][2] + m[0][0] * m[2][2]
            - m[0][1] * m[0][1] - m[1][2] * m[1][2] - m[0][2] * m[0][2];
        let scale = 1.0 + e.iter().map(|v| v.abs()).fold(0.0, f64::max);
        prop_assert!((l.iter().sum::<f64>() - trace).abs() < 1e-10 * scale);
        prop_assert!((l[0] * l[1] + l[1] * l[2] + l[0] * l[2] - c2).abs() < 1e-9 * scale * scale);
        prop_assert!((l.iter().product::<f64>() - det(m)).abs() < 1e-8 * scale.powi(3));
    }

    #[test]
    fn eigenvalues_are_roots_in_6x6(e in prop::collection::vec(-3.0f64..3.0, 21)) {
        let m = symmetric(6, &e);
        let t = VoigtTensor::new(3, m.clone()).unwrap();
        let scale = 1.0 + t.spectral_norm();
        for lam in t.eigenvalues() {
            let mut shifted = m.clone();
            for (i, row) in shifted.iter_mut().enumerate() {
                row[i] -= lam;
            }
            prop_assert!(det(shifted).abs() < 1e-8 * scale.powi(6));
        }
    }

    #[test]
    fn convexity_bounds_quadratic_form(e in prop::collection::vec(-5.0f64..5.0, 6),
                                       w in prop::collection::vec(-1.0f64..1.0, 3)) {
        let m = symmetric(3, &e);
        let t = VoigtTensor::new(2, m.clone()).unwrap();
        let r = convexity_bounds(&t).unwrap();
        let n2: f64 = w.iter().map(|v| v * v).sum();
        let q: f64 = (0..3).map(|i| (0..3).map(|j| w[i] * m[i][j] * w[j]).sum::<f64>()).sum();
        prop_assert!(q >= r.alpha0 * n2 - 1e-9 && q <= r.beta0 * n2 + 1e-9);
    }

    #[test]
    fn prony_kernel_stays_psd(terms in prop::collection::vec((0.0f64..5.0, 0.1f64..5.0), 1..5), t in 0.0f64..20.0) {
        let k = KernelSpec::Prony(PronyKernel::new(
            terms.iter().map(|&(g, r)| PronyTerm::new(VoigtTensor::isotropic(2, g, g).unwrap(), r).unwrap()).collect(),
        ).unwrap());
        let g = k.eval(t, vidlab::kernels::Order::Value).unwrap();
        let r = convexity_bounds(&g).unwrap();
        prop_assert!(r.alpha0 >= -1e-12 * (1.0 + r.beta0));
    }

    #[test]
    fn polynomial_kernel_stays_psd(g in 0.01f64..5.0, a in 0.1f64..5.0, p in 2.1f64..8.0, t in 0.0f64..50.0) {
        let k = KernelSpec::Polynomial(PolynomialKernel::new(VoigtTensor::identity(2).unwrap(), g, a, p).unwrap());
        let v = k.eval(t, vidlab::kernels::Order::Value).unwrap();
        prop_assert!(convexity_bounds(&v).unwrap().alpha0 > 0.0);
    }

    #[test]
    fn pm_for_monotone(p in 2.0001f64..200.0, dp in 0.0f64..50.0) {
        let (m1, pm1) = pm_for(p).unwrap();
        let (m2, pm2) = pm_for(p + dp).unwrap();
        prop_assert!(m1 <= m2 && pm1 <= pm2);
        prop_assert!(pm1 < p - 1.0);
        prop_assert!(((pm1 + 1.0) as u64).is_power_of_two());
    }

    #[test]
    fn poly_bound_monotonicity(y0 in 0.0f64..10.0, m2 in 0.1f64..10.0, m3 in 0.1f64..10.0,
                             q in 2.1f64..8.0, t in 0.0f64..100.0, dt in 0.01f64..10.0, dm in 0.01f64..5.0) {
        let p = PolyBoundParams::new(y0, m2, m3, q).unwrap();
        prop_assert!(poly_bound(&p, t + dt) < poly_bound(&p, t));
        prop_assert!(poly_bound(&p, 0.0) >= y0);
        // the closed form grows with M2 at every t (≈ q^q (2M2)^q M3 t^{-q} for large t)
        let stiffer = PolyBoundParams::new(y0, m2 + dm, m3, q).unwrap();
        prop_assert!(poly_bound(&stiffer, t + dt) > poly_bound(&p, t + dt));
    }

    #[test]
    fn fits_recover_exact_models(a in 0.1f64..10.0, k in 0.1f64..4.0) {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let pw: Vec<f64> = t.iter().map(|t| a * (1.0 + t).powf(-k)).collect();
        let ex: Vec<f64> = t.iter().map(|t| a * (-k * t).exp()).collect();
        let f = fit_decay(&t, &pw, DecayModel::Power, None).unwrap();
        prop_assert!((f.parameter + k).abs() < 1e-6 && (f.r_squared - 1.0).abs() < 1e-9);
        let f = fit_decay(&t, &ex, DecayModel::Exponential, None).unwrap();
        prop_assert!((f.parameter - k).abs() < 1e-6 && (f.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn solution_scales_linearly(lambda in -4.0f64..4.0, amp in 0.1f64..2.0, vel in -1.0f64..1.0) {
        let mesh = Mesh1D::new(1.0, 20).unwrap();
        let material = MaterialField1D::uniform(&mesh, 1.0, 3.0, KernelSpec::Prony(PronyKernel::scalar(&[(4.0, 2.0)]).unwrap())).unwrap();
        let sim = SimConfig { t_end: 0.5, stride: 5, ..SimConfig::default() };
        let init = InitialData::from_fn(&mesh, |x| amp * x * (2.0 - x), |x| vel * x);
        let a = run(&mesh, &material, &sim, &init).unwrap();
        let b = run(&mesh, &material, &sim, &init.scaled(lambda)).unwrap();
        let scale = a.final_u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.final_u.iter().zip(&b.final_u) {
            prop_assert!((lambda * x - y).abs() <= 1e-12 * lambda.abs() * scale + 1e-300);
        }
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            let e = sa.energy();
            prop_assert!((lambda * lambda * e - sb.energy()).abs() <= 1e-12 * lambda * lambda * e + 1e-300);
        }
    }
}

#[test]
fn dirichlet_node_stays_pinned() {
    let mesh = Mesh1D::new(1.0, 16).unwrap();
    let material = MaterialField1D::uniform(&mesh, 1.0, 2.0, KernelSpec::Prony(PronyKernel::scalar(&[(1.0, 1.0)]).unwrap())).unwrap();
    let sim = SimConfig { t_end: 1.0, snapshot_stride: Some(1), ..SimConfig::default() };
    let init = InitialData::from_fn(&mesh, |x| x * x, |x| x);
    let out = run(&mesh, &material, &sim, &init).unwrap();
    assert!(out.snapshots.iter().all(|s| s.u[0] == 0.0));
}

#[test]
fn bundled_configs_round_trip() {
    for (name, _) in vidlab::config::BUNDLED {
        let cfg = ScenarioConfig::bundled(name).unwrap();
        let norm = cfg.normalized();
        let again = ScenarioConfig::from_json(&norm).unwrap();
        assert_eq!(again, cfg, "{name}");
        assert_eq!(again.normalized(), norm, "{name}");
    }
}

#[test]
fn per_cell_material_round_trips() {
    let text = r#"{"schema":1,"mesh":{"L":2,"N":4},
        "material":{"rho":[1,1,2,2],"C":[1,2,3,4],"kernel":{"prony":[{"g":0.5,"r":1}]},"kernel_scale":[1,0,1,0]},
        "sim":{"dt":0.01,"t_end":0.1,"probes":[2]},
        "monitor":{"c5":0.5},
        "initial":{"u0":{"profile":"nodal","values":[0,0.1,0.2,0.3,0.4]}}}"#;
    let cfg = ScenarioConfig::from_json(text).unwrap();
    assert_eq!(ScenarioConfig::from_json(&cfg.normalized()).unwrap(), cfg);
    let s = cfg.build().unwrap();
    assert_eq!(s.material.c(), &[1.0, 2.0, 3.0, 4.0]);
    assert_relative_eq!(s.monitor_params().unwrap().omega, 1.0 / 2.0, epsilon = 1e-15);
    let res = s.run().unwrap();
    assert_eq!(res.trace.column("u_p2").unwrap().len(), res.trace.samples.len());
}
