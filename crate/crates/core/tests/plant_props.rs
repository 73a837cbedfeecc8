use darboux_assist::controller::BlendedCommand;
use darboux_assist::sim::route::MAX_SPACING;
use darboux_assist::sim::{make_route, step, unicycle_derivative, wheel_decompose, wheel_mix, RouteKind, VehicleParams, VehiclePose};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn wheel_mix_round_trip_1000_commands() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let p = VehicleParams { l: rng.random_range(0.1..2.0), ..VehicleParams::default() };
        let (v, w) = (rng.random_range(-3.0..3.0), rng.random_range(-10.0..10.0));
        let (v2, w2) = wheel_mix(&wheel_decompose(v, w, &p), &p);
        assert!((v - v2).abs() <= 1e-12 * (1.0 + v.abs()));
        assert!((w - w2).abs() <= 1e-12 * (1.0 + w.abs()));
    }
}

proptest! {
    #[test]
    fn step_moves_at_commanded_speed(
        x in -10.0..10.0f64, y in -10.0..10.0f64, psi in -7.0..7.0f64,
        v in 0.0..3.0f64, w in -5.0..5.0f64, dt in 0.001..0.1f64,
    ) {
        let pose = VehiclePose::new(x, y, psi);
        let cmd = BlendedCommand { u_v: v, u_omega: w };
        let next = step(&pose, &cmd, dt);
        prop_assert!((next.psi - (psi + w * dt)).abs() < 1e-12);
        // Chord of an arc of length v dt is no longer than the arc.
        let chord = (next.x - x).hypot(next.y - y);
        prop_assert!(chord <= v * dt * (1.0 + 1e-12) + 1e-15);
        // First-order agreement with the derivative.
        let d = unicycle_derivative(&pose, &cmd);
        let err = (next.x - (x + d.x_dot * dt)).hypot(next.y - (y + d.y_dot * dt));
        prop_assert!(err <= 0.5 * v * w.abs() * dt * dt + 1e-12);
    }

    #[test]
    fn straight_step_is_exact_line(psi in -3.0..3.0f64, v in 0.0..3.0f64) {
        let next = step(&VehiclePose::new(0.0, 0.0, psi), &BlendedCommand { u_v: v, u_omega: 0.0 }, 0.02);
        prop_assert!((next.x - v * 0.02 * psi.cos()).abs() < 1e-15);
        prop_assert!((next.y - v * 0.02 * psi.sin()).abs() < 1e-15);
    }

    #[test]
    fn route_spacing_bounded(scale in 0.5..20.0f64, spiral in any::<bool>()) {
        let kind = if spiral { RouteKind::Spiral } else { RouteKind::FigureEight };
        let r = make_route(kind, scale).unwrap();
        for w in r.points.windows(2) {
            prop_assert!(w[0].dist(w[1]) <= MAX_SPACING);
        }
        if r.closed {
            prop_assert!(r.points[r.len() - 1].dist(r.points[0]) <= MAX_SPACING);
        }
    }
}
