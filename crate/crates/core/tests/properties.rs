use finsler_core::curvature::{berwald_closed, landsberg_closed};
use finsler_core::dsl::{eval_f64, parse, ParameterEnv};
use finsler_core::jets::{Jet, JetSpace};
use finsler_core::metric::{MetricSpec, SamplePoint};
use finsler_core::psi::psi;
use finsler_core::spray::spray;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn metric() -> MetricSpec {
    MetricSpec::parse("p", 3, "sqrt(z^2+1+0.2*s^2+0.1*r^2)*exp(0.1*x0)+0.05*r*z", ParameterEnv::new()).unwrap()
}

fn point() -> impl Strategy<Value = SamplePoint> {
    (-1.0..1.0f64, prop::collection::vec(-1.0..1.0f64, 3), 0.2..2.0f64, prop::collection::vec(-1.0..1.0f64, 3))
        .prop_filter_map("non-degenerate", |(x0, xbar, y0, ybar)| {
            let r2: f64 = xbar.iter().map(|v| v * v).sum();
            let u2: f64 = ybar.iter().map(|v| v * v).sum();
            let dot: f64 = xbar.iter().zip(&ybar).map(|(a, b)| a * b).sum();
            let ok = r2 > 0.04 && u2 > 0.04 && dot * dot < 0.8 * r2 * u2;
            if ok {
                SamplePoint::new(x0, xbar, y0, ybar).ok()
            } else {
                None
            }
        })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn jet_of(space: &std::sync::Arc<JetSpace>, c: &[f64]) -> Jet {
    let x = Jet::variable(space, "a", 0.0).unwrap();
    let y = Jet::variable(space, "b", 0.0).unwrap();
    &(&(&x * &Jet::constant(space, c[0])) + &(&y * &y)) + &Jet::constant(space, c[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jet_ring_axioms(p in prop::collection::vec(-2.0..2.0f64, 6)) {
        let space = JetSpace::new(&["a", "b"], 4).unwrap();
        let (a, b, c) = (jet_of(&space, &p[0..2]), jet_of(&space, &p[2..4]), jet_of(&space, &p[4..6]));
        let lhs = &(&a + &b) * &c;
        let rhs = &(&a * &c) + &(&b * &c);
        for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
        let ab = &a * &b;
        let ba = &b * &a;
        prop_assert_eq!(ab.coeffs(), ba.coeffs());
        let assoc_l = &(&a * &b) * &c;
        let assoc_r = &a * &(&b * &c);
        for (x, y) in assoc_l.coeffs().iter().zip(assoc_r.coeffs()) {
            prop_assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn spray_is_two_homogeneous(p in point(), lambda in 0.3..3.0f64) {
        let spec = metric();
        let g = spray(&spec, &p).unwrap();
        let gl = spray(&spec, &p.with_y_scaled(lambda)).unwrap();
        for (a, b) in g.g.iter().zip(&gl.g) {
            prop_assert!(close(lambda * lambda * a, *b, 1e-10));
        }
    }

    #[test]
    fn curvature_homogeneity(p in point(), lambda in 0.3..3.0f64) {
        let spec = metric();
        let q = p.with_y_scaled(lambda);
        let (b, bl) = (berwald_closed(&spec, &p).unwrap(), berwald_closed(&spec, &q).unwrap());
        for (x, y) in b.data.iter().zip(&bl.data) {
            prop_assert!(close(x / lambda, *y, 1e-9));
        }
        let (l, ll) = (landsberg_closed(&spec, &p).unwrap(), landsberg_closed(&spec, &q).unwrap());
        for (x, y) in l.data.iter().zip(&ll.data) {
            prop_assert!(close(*x, *y, 1e-9));
        }
    }

    #[test]
    fn spray_is_rotation_equivariant(p in point(), m in prop::collection::vec(-1.0..1.0f64, 9)) {
        let q = DMatrix::from_row_slice(3, 3, &m).qr().q();
        prop_assume!(q.determinant().abs() > 0.5);
        let spec = metric();
        let g = spray(&spec, &p).unwrap();
        let gr = spray(&spec, &p.rotated(&q)).unwrap();
        prop_assert!(close(g.g[0], gr.g[0], 1e-10));
        for i in 0..3 {
            let expected: f64 = (0..3).map(|j| q[(i, j)] * g.g[j + 1]).sum();
            prop_assert!(close(expected, gr.g[i + 1], 1e-10));
        }
    }

    #[test]
    fn psi_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, s in -0.9..0.9f64, z in 0.1..2.0f64) {
        let env = ParameterEnv::new();
        let (t1, t2) = ("exp(s*z)", "s^3/z + sin(z)");
        let combo = parse(&format!("({a})*({t1}) + ({b})*({t2})")).unwrap();
        let lhs = psi(&combo, &env, s, z).unwrap();
        let rhs = a * psi(&parse(t1).unwrap(), &env, s, z).unwrap() + b * psi(&parse(t2).unwrap(), &env, s, z).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn expression_display_round_trips(
        c in prop::collection::vec(0.1..2.0f64, 4),
        pt in (-1.0..1.0f64, 0.2..1.0f64, -0.5..0.5f64, 0.1..2.0f64),
    ) {
        let text = format!(
            "sqrt({}*z^2+1)*exp(-{}*x0*s) + arctan({}*r)/({}+cos(z)) - log(1+r^2)",
            c[0], c[1], c[2], c[3] + 1.5
        );
        let e = parse(&text).unwrap();
        let again = parse(&e.to_string()).unwrap();
        let env = ParameterEnv::new();
        let point = [pt.0, pt.1, pt.2, pt.3];
        prop_assert_eq!(eval_f64(&e, point, &env).unwrap(), eval_f64(&again, point, &env).unwrap());
    }
}
