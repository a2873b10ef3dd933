use fraclap::greenop::{coercivity_from_gamma, green_integral, operator_norm_b};
use fraclap::*;
use proptest::prelude::*;

fn op(alpha: f64, n: usize) -> GreenOperator {
    GreenOperator::assemble(make_grid(n).unwrap(), KernelParams::for_solver(alpha).unwrap()).unwrap()
}

// G(a, 0) / G(0, 0) and γ^p 2∫_0^a G(0,y) dy at a = 1/2, 40-digit reference
const GAMMA_U: [(f64, f64, f64, f64); 3] = [
    (1.2, 0.2062021551297102, 0.02877011725811692, 0.005932460181958177),
    (1.5, 0.3785051151187635, 0.08006009757304720, 0.03030315644830567),
    (1.8, 0.4666878592103765, 0.09691196993396208, 0.04522763978034113),
];

const TORSION_B: [(f64, f64); 3] = [(1.2, 0.9076036842152803), (1.5, 0.7522527780636750), (1.8, 0.5964840411282413)];

#[test]
fn gamma_u_and_coercivity_golden() {
    for (alpha, gamma, a2, a3) in GAMMA_U {
        let kp = KernelParams::for_solver(alpha).unwrap();
        let g = gamma_u(0.5, &kp, &GammaUConfig::default()).unwrap();
        assert!((g - gamma).abs() < 1e-12, "alpha {alpha}: {g} vs {gamma}");
        let c2 = coercivity_from_gamma(g, 0.5, 2.0, &kp).unwrap();
        let c3 = coercivity_from_gamma(g, 0.5, 3.0, &kp).unwrap();
        assert!((c2 - a2).abs() < 1e-12 * a2 + 1e-15, "{c2} vs {a2}");
        assert!((c3 - a3).abs() < 1e-12 * a3 + 1e-15, "{c3} vs {a3}");
        assert!((coercivity_a(0.5, 2.0, &kp).unwrap() - c2).abs() < 1e-15);
    }
}

#[test]
fn growth_constant_two_routes() {
    for (alpha, b) in TORSION_B {
        let o = op(alpha, 65);
        let direct = green_integral(0.0, -1.0, 1.0, o.kernel());
        assert!((operator_norm_b(&o) - b).abs() < 1e-10, "{} vs {b}", operator_norm_b(&o));
        assert!((direct - b).abs() < 1e-10, "{direct} vs {b}");
    }
}

#[test]
fn growth_constant_attained_and_never_exceeded() {
    let o = op(1.5, 65);
    let b = operator_norm_b(&o);
    let ones = GridFunction::from_fn(o.grid().clone(), |_| 1.0).unwrap();
    assert!((o.apply(&ones).unwrap().sup_norm() - b).abs() < 1e-12);
    let spec = ConeSpec::new(0.5, 0.3, 1e-9).unwrap();
    for p in [1.5, 2.0, 3.0] {
        for u in sample_cone(o.grid(), &spec, 1.5, 1.0, 200, 11).unwrap() {
            let image = o.apply_power(u.values(), p);
            let s = image.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(s <= b + 1e-9, "{s} > {b}");
        }
    }
}

#[test]
fn gamma_u_shrinks_with_the_window() {
    let kp = KernelParams::for_solver(1.5).unwrap();
    let cfg = GammaUConfig::default();
    let g: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&a| gamma_u(a, &kp, &cfg).unwrap()).collect();
    assert!(g[0] >= g[1] && g[1] >= g[2], "{g:?}");
    assert!(g.iter().all(|&v| v > 0.0 && v <= 1.0));
}

#[test]
fn coercivity_below_growth() {
    for alpha in [1.2, 1.5, 1.8] {
        let kp = KernelParams::for_solver(alpha).unwrap();
        let b = green_integral(0.0, -1.0, 1.0, &kp);
        for a_half in [0.25, 0.5, 0.75] {
            for p in [1.5, 2.0, 3.0] {
                let a = coercivity_a(a_half, p, &kp).unwrap();
                assert!(a > 0.0 && a <= b, "alpha {alpha} a_half {a_half} p {p}: a = {a}, b = {b}");
            }
        }
    }
}

#[test]
fn output_vanishes_at_the_ends_and_is_positive_inside() {
    let o = op(1.5, 65);
    let f = GridFunction::from_fn(o.grid().clone(), |x| (3.0 * x).cos().abs()).unwrap();
    let u = o.apply(&f).unwrap();
    let v = u.values();
    assert_eq!(v[0], 0.0);
    assert_eq!(v[v.len() - 1], 0.0);
    assert!(v[1..v.len() - 1].iter().all(|&x| x > 0.0));
}

#[test]
fn commutes_with_reflection() {
    let o = op(1.8, 65);
    let g = o.grid().clone();
    let f = GridFunction::from_fn(g.clone(), |x| (2.0 * x + 0.3).sin() + 1.5).unwrap();
    let fr = GridFunction::from_fn(g.clone(), |x| (-2.0 * x + 0.3).sin() + 1.5).unwrap();
    let u = o.apply(&f).unwrap();
    let ur = o.apply(&fr).unwrap();
    let n = g.len();
    for i in 0..n {
        assert!((u.values()[i] - ur.values()[n - 1 - i]).abs() < 1e-13);
    }
}

#[test]
fn converges_under_refinement() {
    for alpha in [1.2, 1.5, 1.8] {
        let coarse = op(alpha, 65);
        let fine = op(alpha, 129);
        let f = |x: f64| (1.0 - x * x) * (2.0 + x.sin());
        let uc = coarse.apply(&GridFunction::from_fn(coarse.grid().clone(), f).unwrap()).unwrap();
        let uf = fine.apply(&GridFunction::from_fn(fine.grid().clone(), f).unwrap()).unwrap();
        // nested grids: coarse node i is fine node 2i
        let worst = (0..65).map(|i| (uc.values()[i] - uf.values()[2 * i]).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-6, "alpha {alpha}: {worst:e}");
    }
}

#[test]
fn principal_value_inverts_the_green_operator() {
    let pts = [-0.6, -0.3, 0.0, 0.3, 0.6];
    let pv = PVConfig::default();
    let err = |n: usize| {
        let o = op(1.5, n);
        let ones = GridFunction::from_fn(o.grid().clone(), |_| 1.0).unwrap();
        let u = o.apply(&ones).unwrap();
        pts.iter().map(|&x| (frac_laplacian_pv(&u, x, o.kernel(), &pv).unwrap() - 1.0).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(65), err(129));
    assert!(e1 < 5e-3, "{e1:e}");
    assert!(e2 * 3.0 <= e1, "{e1:e} -> {e2:e}");
}

#[test]
fn sequential_and_parallel_assembly_agree_bitwise() {
    let g = make_grid(65).unwrap();
    let kp = KernelParams::for_solver(1.5).unwrap();
    let cfg = fraclap::greenop::AssemblyConfig::default();
    let a = GreenOperator::assemble_with(g.clone(), kp, Execution::Sequential, &cfg).unwrap();
    let b = GreenOperator::assemble_with(g, kp, Execution::default(), &cfg).unwrap();
    let bits = |m: &GreenOperator| m.matrix().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn preserves_symmetry_and_unimodality(seed in 0u64..10_000, alpha in 1.1f64..1.9) {
        let o = op(alpha, 33);
        let shapes = ConeSpec::new(0.5, 1e-6, 1e-9).unwrap();
        let f = sample_cone(o.grid(), &shapes, alpha, 1.0, 1, seed).unwrap().remove(0);
        let u = o.apply(&f).unwrap();
        let m = check_membership(&u, &shapes).unwrap();
        prop_assert!(m.symmetric && m.unimodal && m.nonneg, "{:?}", m);
    }

    #[test]
    fn linear(s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let o = op(1.5, 33);
        let g = o.grid().clone();
        let f1 = GridFunction::from_fn(g.clone(), |x| x.cos()).unwrap();
        let f2 = GridFunction::from_fn(g.clone(), |x| x * x * x).unwrap();
        let mix = GridFunction::from_fn(g, |x| s * x.cos() + t * x * x * x).unwrap();
        let lhs = o.apply(&mix).unwrap();
        let (u1, u2) = (o.apply(&f1).unwrap(), o.apply(&f2).unwrap());
        for i in 0..lhs.len() {
            let rhs = s * u1.values()[i] + t * u2.values()[i];
            prop_assert!((lhs.values()[i] - rhs).abs() <= 1e-13 * (1.0 + s.abs() + t.abs()));
        }
    }
}
