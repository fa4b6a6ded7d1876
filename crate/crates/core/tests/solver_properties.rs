use std::f64::consts::{PI, TAU};

use helicoidal::conservation::{closed_form_profile, max_deviation, median};
use helicoidal::curve::C64;
use helicoidal::solver::{solve_h3, solve_r3, solve_s3, trace_level_set, SolverConfig};
use helicoidal::spaceform::{SpaceForm, SpaceFormKind};
use helicoidal::treadmill::equivalence_check;
use helicoidal::twizzler::Twizzler;
use helicoidal::Error;
use proptest::prelude::*;

fn nonzero_h() -> impl Strategy<Value = f64> {
    prop_oneof![-1.5f64..-0.2, 0.2f64..1.5]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn r3_outputs_are_cmc(h in nonzero_h(), ml in -0.5f64..1.5, m in 0.5f64..2.0) {
        let sol = match solve_r3(h, ml, m, &SolverConfig::default()) {
            Ok(s) => s,
            Err(Error::EmptyLevelSet { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        let t = Twizzler::new(SpaceForm::EUCLIDEAN, sol.curve.clone(), m).unwrap();
        let u = sol.curve.grid(80);
        for &ui in &u {
            prop_assert!((t.mean_curvature(ui).unwrap() - h).abs() <= 1e-6);
        }
        let cs = closed_form_profile(&t, h, &u).unwrap();
        prop_assert!(max_deviation(&cs, median(&cs)) <= 1e-7);
        let eq = equivalence_check(&sol.curve, m, h, 80).unwrap();
        prop_assert!(eq.link_residual.unwrap() <= 1e-7);
        prop_assert!((eq.c + PI * ml).abs() <= 1e-7);
    }

    #[test]
    fn curved_outputs_are_cmc(
        sphere in any::<bool>(),
        h in -1.5f64..1.5,
        r0 in 0.2f64..0.8,
        twist in -0.9f64..0.9,
        m in 0.5f64..2.0,
        branch in prop_oneof![Just(1.0), Just(-1.0)],
    ) {
        let kind = if sphere { SpaceFormKind::Sphere3 } else { SpaceFormKind::Hyperbolic3 };
        let eps = if sphere { -1.0 } else { 1.0 };
        let f2 = 1.0 + eps * r0 * r0;
        let a0 = twist * r0;
        let c = TAU * m * f2 * a0 / (r0 * r0 + m * m * f2 - a0 * a0).sqrt() + eps * h * PI * r0 * r0;
        let cfg = SolverConfig { length: Some(1.5), branch, ..SolverConfig::default() };
        let start = C64::new(r0, 0.0);
        let res = if sphere { solve_s3(h, c, m, start, &cfg) } else { solve_h3(h, c, m, start, &cfg) };
        let curve = match res {
            Ok(s) => s.curve,
            // the axis is a genuine end of some solutions; check what was traced
            Err(Error::AxisTouch { partial: Some(p), .. }) => p,
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        let (lo, hi) = curve.domain();
        prop_assume!(hi - lo > 0.05);
        let t = Twizzler::new(SpaceForm::new(kind), curve.clone(), m).unwrap();
        // stay clear of the axis (and in S^3 of the dual circle rho = 1),
        // where h itself degenerates
        let clear = |u: f64| {
            let r = curve.eval(u).unwrap().pos.norm();
            r > 0.05 && (1.0 + eps * r * r).sqrt() > 0.05
        };
        let u: Vec<f64> = curve.grid(60).into_iter().filter(|&u| clear(u)).collect();
        for &ui in &u {
            prop_assert!((t.mean_curvature(ui).unwrap() - h).abs() <= 1e-5);
        }
        let cs = closed_form_profile(&t, h, &u).unwrap();
        prop_assert!(max_deviation(&cs, c) <= 1e-7);
    }

    #[test]
    fn level_set_trace_is_reversible(h in nonzero_h(), ml in 0.0f64..1.0, len in 0.5f64..3.0) {
        let cfg = SolverConfig::default();
        let disc = 1.0 + h * ml;
        prop_assume!(disc >= 0.0);
        let p0 = C64::new(0.0, (1.0 + disc.sqrt()) / h);
        let fwd = trace_level_set(h, ml, 1.0, p0, 0.0, 1.0, Some(len), &cfg).unwrap();
        let n = fwd.s.len() - 1;
        let back = trace_level_set(h, ml, 1.0, C64::new(fwd.x[n], fwd.y[n]), fwd.phi[n], -1.0, Some(len), &cfg).unwrap();
        let k = back.s.len() - 1;
        prop_assert!((C64::new(back.x[k], back.y[k]) - p0).norm() <= cfg.step * cfg.step * len);
    }
}
