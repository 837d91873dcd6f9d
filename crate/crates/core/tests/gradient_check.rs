mod common;

use common::{analytic, finite_difference, rel_err, tiny_model};

#[test]
fn bptt_matches_central_differences() {
    for seed in 100..140 {
        let (m, x, y, rng) = tiny_model(seed);
        let a = analytic(&m, &x, y, rng.as_ref());
        let n = finite_difference(&m, &x, y, rng.as_ref(), 1e-5);
        for (k, (ga, gn)) in a.iter().zip(&n).enumerate() {
            assert!(rel_err(*ga, *gn) < 1e-4, "seed {seed} param {k}: analytic {ga} vs numeric {gn}");
        }
    }
}

#[test]
fn gradient_is_linear_in_upstream_signal() {
    use loadband::lstm::Window;
    let (m, x, _, rng) = tiny_model(7);
    let mut r1 = rng.clone();
    let mut r2 = rng.clone();
    let c1 = m.forward_window(Window::from(&x), r1.as_mut()).unwrap();
    let c2 = m.forward_window(Window::from(&x), r2.as_mut()).unwrap();
    let g1 = m.backward_window(&c1, 1.0).unwrap();
    let g3 = m.backward_window(&c2, -3.0).unwrap();
    for (a, b) in g1.slices().concat().iter().zip(g3.slices().concat()) {
        assert!((b + 3.0 * a).abs() <= 1e-12 * a.abs().max(1.0));
    }
}
