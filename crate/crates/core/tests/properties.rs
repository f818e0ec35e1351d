//! Property tests for the structural invariants: conservation along flows,
//! the boundary transnormal law, curvature-family/ODE consistency, and the
//! jet conservation shadow, quantified over randomized inputs.

use proptest::prelude::*;

use obata_core::flow::{normalized_gradient_flow, FlowDirection, FlowOptions};
use obata_core::geometry::{
    make_model_domain, robin_residual, transnormal_residual, DomainSide, ObataFunction, SpherePoint,
};
use obata_core::jets::{self, ExactModel, JetScalar};
use obata_core::ode::{
    curvature_ode_residual, flow_value, metric_warp, CurvatureFamily, CurvatureInput,
};

fn unit_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n + 1).prop_filter_map("degenerate direction", |v| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 0.1 {
            return None;
        }
        Some(v.into_iter().map(|x| x / norm).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conservation_holds_for_random_flows(
        start in unit_vector(3),
        coeffs in unit_vector(3),
        scale in 0.5f64..3.0,
        forward in any::<bool>(),
    ) {
        let f = ObataFunction::new(coeffs.iter().map(|c| c * scale).collect()).unwrap();
        let p = SpherePoint::new(start).unwrap();
        let grad_norm = f.gradient(&p).iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(grad_norm > 0.2 * scale);
        let dir = if forward { FlowDirection::Forward } else { FlowDirection::Backward };
        let opts = FlowOptions::new(1e-3, 0.5, dir);
        let trace = normalized_gradient_flow(&f, &p, None, opts).unwrap();
        prop_assert!(trace.defects.conservation <= 1e-10,
            "conservation defect {}", trace.defects.conservation);
        prop_assert!(trace.defects.geodesic <= 1e-6,
            "geodesic defect {}", trace.defects.geodesic);
        prop_assert!(trace.validate(1e-3));
    }

    #[test]
    fn flow_value_law_from_any_phase(alpha in -1.5f64..1.5, t in 0.0f64..2.0, l in 0.5f64..4.0) {
        // d²/dt² of L sin(α+t) equals −f by construction; check the
        // energy form (f′)² + f² = L² instead, which the flows measure
        let f = flow_value(alpha, t, l);
        let fp = l * (alpha + t).cos();
        prop_assert!((fp * fp + f * f - l * l).abs() <= 1e-12 * l * l);
    }

    #[test]
    fn boundary_laws_on_random_samples(
        seed in 0u64..1u64 << 48,
        m in 0usize..3,
        theta in 0.3f64..1.2,
    ) {
        use rand::SeedableRng;
        let n = 3;
        let domain = make_model_domain(n, m, theta, DomainSide::Complement).unwrap();
        let f = ObataFunction::height(n, 1.0);
        let a = 1.0 / theta.tan();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = domain.sample_boundary(&mut rng);
        prop_assert!(robin_residual(&domain, &f, a, &p).unwrap().abs() <= 1e-10);
        prop_assert!(transnormal_residual(&domain, &f, a, &p).unwrap().abs() <= 1e-10);
        // flipping the side flips the normal, pairing with −a
        let core = make_model_domain(n, m, theta, DomainSide::Core).unwrap();
        prop_assert!(robin_residual(&core, &f, -a, &p).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn metric_warp_solves_its_ode(alpha in -1.2f64..1.2, t in 0.0f64..0.3) {
        // ½ f′ w′ + f w = 0 with analytic derivative of the closed form
        let w = metric_warp(alpha, t).unwrap();
        let wp = -2.0 * (alpha + t).sin() * (alpha + t).cos() / alpha.cos().powi(2);
        let res = 0.5 * (alpha + t).cos() * wp + (alpha + t).sin() * w;
        prop_assert!(res.abs() <= 1e-12);
    }

    #[test]
    fn curvature_families_satisfy_their_ode(
        a in 0.4f64..2.5,
        mu_frac in -0.9f64..0.9,
    ) {
        let fam = CurvatureFamily::mobius(a, mu_frac * a);
        let omega = (1.0 + a * a).sqrt();
        let grid: Vec<f64> = (1..60).map(|k| k as f64 / 64.0 * std::f64::consts::FRAC_PI_2 / omega).collect();
        let r = curvature_ode_residual(CurvatureInput::Family(&fam), a, &grid).unwrap();
        prop_assert!(r <= 1e-9, "family residual {r}");
    }

    #[test]
    fn jet_shadow_vanishes_for_random_model_data(
        theta in 0.2f64..1.3,
        l in 0.5f64..3.0,
    ) {
        // the collar coefficients of any model datum keep (f′)² + f² − L²
        // flat through the truncation order
        let k = 6;
        let data = jets::model_data(
            ExactModel::CapComplement,
            &theta.sin(),
            &theta.cos(),
            &l,
            k,
            jets::ReferenceMetric::RoundSphere { dim: 2 },
        );
        let jet = jets::homogeneous_recursion(&data.g0, &data.f0, &data.f1, &data.phi.derivs, k).unwrap();
        let shadow = jets::conservation_shadow(&jet.f, &l, k - 1);
        for (ord, v) in shadow.iter().enumerate() {
            prop_assert!(v.abs() <= 1e-12 * l * l, "order {ord}: {v}");
        }
        // and the float recursion stays on the analytic expansion
        let err = jets::jet_vs_exact(ExactModel::CapComplement, theta, l, k).unwrap();
        prop_assert!(err <= 1e-12, "collar expansion error {err}");
    }

    #[test]
    fn exact_scalar_field_axioms(
        p in -6i64..6, q in 1i64..5, r in -6i64..6, s in 1i64..5,
    ) {
        use obata_core::jets::ExactScalar;
        // (x + y)·z = x·z + y·z and x·x⁻¹ = 1 over the quadratic pair field
        let x = ExactScalar::from_ratio(p, q).mul(&ExactScalar::sin_theta());
        let y = ExactScalar::from_ratio(r, s).mul(&ExactScalar::cos_theta());
        let z = x.add(&y).add(&ExactScalar::one());
        let lhs = x.add(&y).mul(&z);
        let rhs = x.mul(&z).add(&y.mul(&z));
        prop_assert!(lhs == rhs);
        prop_assert!(x.mul(&y).mul(&z) == x.mul(&y.mul(&z)));
        if !z.is_zero() {
            prop_assert!(z.div(&z) == ExactScalar::one());
        }
    }
}
