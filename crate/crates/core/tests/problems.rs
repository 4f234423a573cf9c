use approx::assert_relative_eq;
use heavyclip::noise::{NoiseFamily, NoiseSpec};
use heavyclip::problems::{
    chain_gradient, chain_oracle_with, chain_value, lowerbound_oracle, nonconvex_problem, phi, project, prog, psi,
    quadratic_problem, ChainInstance, Domain, LowerBoundInstance, StochasticProblem,
};
use heavyclip::{QuadraticProblem32, Seed};
use proptest::prelude::*;
use rand::Rng;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Central differences of `f` at `x`.
fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = f(&y);
            y[i] = x[i] - h;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[test]
fn quadratic_examples() {
    let q = quadratic_problem(1.0f64, 2, vec![0.0, 0.0], NoiseSpec::zero(2)).unwrap();
    assert_eq!(q.value(&[3.0, 4.0]), 12.5);
    assert_eq!(q.exact_gradient(&[3.0, 4.0]), vec![3.0, 4.0]);
    assert_eq!(q.value(&[0.0, 0.0]), 0.0);
    let mut rng = Seed::new(1).rng();
    assert_eq!(q.noisy_gradient(&[1.5, -2.0], &mut rng), vec![1.5, -2.0]);
    assert!(quadratic_problem(1.0f64, 3, vec![0.0; 2], NoiseSpec::zero(3)).is_err());
    assert!(quadratic_problem(0.0f64, 1, vec![0.0], NoiseSpec::zero(1)).is_err());
}

#[test]
fn single_precision_matches_double() {
    let q32: QuadraticProblem32 = quadratic_problem(2.0f32, 3, vec![1.0, -1.0, 0.5], NoiseSpec::zero(3)).unwrap();
    let q64 = quadratic_problem(2.0f64, 3, vec![1.0, -1.0, 0.5], NoiseSpec::zero(3)).unwrap();
    let x32 = [0.25f32, 2.0, -3.0];
    let x64 = [0.25f64, 2.0, -3.0];
    assert_relative_eq!(q32.value(&x32) as f64, q64.value(&x64), max_relative = 1e-6);
    for (a, b) in q32.exact_gradient(&x32).iter().zip(q64.exact_gradient(&x64)) {
        assert_relative_eq!(*a as f64, b, max_relative = 1e-6);
    }
}

#[test]
fn quadratic_oracle_is_unbiased() {
    // Pareto a=2.5 has finite variance, so the standard error is meaningful.
    let q = quadratic_problem(1.5f64, 3, vec![1.0, 2.0, 3.0], NoiseSpec::pareto(2.5, 1.0, 3)).unwrap();
    let x = [0.0, -1.0, 4.0];
    let exact = q.exact_gradient(&x);
    let n = 1_000_000;
    let mut rng = Seed::new(2).rng();
    let (mut s, mut s2) = (vec![0.0; 3], vec![0.0; 3]);
    let mut g = vec![0.0; 3];
    for _ in 0..n {
        q.noisy_gradient_into(&x, &mut rng, &mut g);
        for i in 0..3 {
            let e = g[i] - exact[i];
            s[i] += e;
            s2[i] += e * e;
        }
    }
    for i in 0..3 {
        let mean = s[i] / n as f64;
        let se = ((s2[i] / n as f64 - mean * mean) / (n as f64 - 1.0)).sqrt();
        assert!(mean.abs() <= 4.0 * se, "coordinate {i}: {mean} vs se {se}");
    }
}

#[test]
fn heavy_tailed_oracle_is_unbiased_by_batch_medians() {
    // Stable noise at a = 1.55 has no variance, so the mean's standard error is
    // meaningless. The median of 20 batch means is judged against the spread
    // of those batch means instead.
    let noise = NoiseSpec::for_moment(NoiseFamily::SymmetricAlphaStable, 1.5, 1.0, 2);
    assert_eq!(noise.tail_index, 1.55);
    let q = quadratic_problem(1.0f64, 2, vec![0.5, -2.0], noise).unwrap();
    let x = [3.0, 1.0];
    let exact = q.exact_gradient(&x);
    let (batches, per) = (20, 50_000);
    let mut rng = Seed::new(3).rng();
    let mut means = vec![vec![0.0; batches]; 2];
    let mut g = vec![0.0; 2];
    for b in 0..batches {
        for _ in 0..per {
            q.noisy_gradient_into(&x, &mut rng, &mut g);
            for i in 0..2 {
                means[i][b] += g[i] - exact[i];
            }
        }
    }
    for (i, m) in means.iter_mut().enumerate() {
        m.iter_mut().for_each(|v| *v /= per as f64);
        m.sort_by(f64::total_cmp);
        let median = 0.5 * (m[9] + m[10]);
        let iqr = m[14] - m[5];
        let se = 1.2533 * (iqr / 1.349) / (batches as f64).sqrt();
        assert!(median.abs() <= 4.0 * se, "coordinate {i}: median {median} vs robust se {se}");
    }
}

#[test]
fn nonconvex_examples_and_finite_differences() {
    let p = nonconvex_problem::<f64>(1, NoiseSpec::zero(1)).unwrap();
    assert_eq!(p.value(&[0.0]), 0.0);
    assert_eq!(p.exact_gradient(&[0.0]), vec![0.0]);
    assert_eq!(p.value(&[1.0]), 0.5);
    assert_eq!(p.exact_gradient(&[1.0]), vec![0.5]);

    let p = nonconvex_problem::<f64>(6, NoiseSpec::zero(6)).unwrap();
    let mut rng = Seed::new(3).rng();
    for _ in 0..100 {
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
        let g = p.exact_gradient(&x);
        let fd = fd_gradient(|y| p.value(y), &x, 1e-5);
        let err = norm(&sub(&g, &fd)) / norm(&g).max(1e-8);
        assert!(err < 1e-4, "relative error {err} at {x:?}");
    }
}

#[test]
fn nonconvex_oracle_is_unbiased() {
    let p = nonconvex_problem::<f64>(2, NoiseSpec::gaussian(0.5, 2)).unwrap();
    let x = [0.7, -1.2];
    let exact = p.exact_gradient(&x);
    let n = 200_000;
    let mut rng = Seed::new(4).rng();
    let mut s = [0.0; 2];
    for _ in 0..n {
        let g = p.noisy_gradient(&x, &mut rng);
        s[0] += g[0] - exact[0];
        s[1] += g[1] - exact[1];
    }
    let se = 0.5 / (n as f64).sqrt();
    assert!(s.iter().all(|v| (v / n as f64).abs() < 4.0 * se));
}

#[test]
fn lowerbound_examples() {
    let inst = LowerBoundInstance::new(0.125f64, 2.0, 0).unwrap();
    assert_relative_eq!(inst.gamma(), 0.5, epsilon = 1e-15);
    assert_relative_eq!(inst.p(), 0.25, epsilon = 1e-15);
    assert_relative_eq!(inst.b(), 0.25, epsilon = 1e-15);
    assert_relative_eq!(inst.gradient(0.3), 0.05, epsilon = 1e-15);
    let inst = LowerBoundInstance::new(0.125f64, 2.0, 1).unwrap();
    assert_relative_eq!(inst.p(), 0.125, epsilon = 1e-15);
    assert_relative_eq!(inst.b(), 0.125, epsilon = 1e-15);
    let mut rng = Seed::new(5).rng();
    assert!(lowerbound_oracle(&inst, 0.7, &mut rng).is_err());
    assert!(lowerbound_oracle(&inst, -0.1, &mut rng).is_err());
}

#[test]
fn lowerbound_oracle_at_point_three() {
    for (alpha, nu) in [(1.5, 0u8), (1.5, 1), (2.0, 0), (2.0, 1)] {
        let inst = LowerBoundInstance::new(0.125f64, alpha, nu).unwrap();
        let x = 0.3;
        let n = 1_000_000;
        let mut rng = Seed::fan_out(6, u64::from(nu)).rng();
        let (mut s, mut s2, mut m, mut m2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let g = lowerbound_oracle(&inst, x, &mut rng).unwrap();
            s += g;
            s2 += g * g;
            let a = g.abs().powf(alpha);
            m += a;
            m2 += a * a;
        }
        let nf = n as f64;
        let mean = s / nf;
        let se = ((s2 / nf - mean * mean) / (nf - 1.0)).sqrt();
        assert!((mean - (x - inst.b())).abs() <= 4.0 * se);
        let mom = m / nf;
        let mom_se = ((m2 / nf - mom * mom) / (nf - 1.0)).sqrt();
        assert!(mom <= 1.0 + 3.0 * mom_se, "alpha-moment {mom}");
    }
}

#[test]
fn chain_components() {
    assert_eq!(psi(1.0), 1.0);
    assert_eq!(psi(0.5), 0.0);
    assert_relative_eq!(phi(0.0), 0.5f64.exp() * std::f64::consts::FRAC_PI_2.sqrt(), max_relative = 1e-12);
    assert_eq!(prog(&[0.0, 1.0, 0.0, 2.0], 0.0), 4);
    assert_eq!(prog(&[0.4, 0.6, 0.1], 0.5), 2);
    assert_eq!(prog(&[0.0; 3], 0.7), 0);
}

#[test]
fn chain_gradient_matches_finite_differences() {
    let d = 20;
    let inst = ChainInstance::new(d, 0.5f64).unwrap();
    let mut rng = Seed::new(7).rng();
    for _ in 0..100 {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = chain_gradient(&inst, &x);
        let fd = fd_gradient(|y| chain_value(&inst, y), &x, 1e-5);
        let err = norm(&sub(&g, &fd)) / norm(&g).max(1.0);
        assert!(err <= 1e-4, "relative error {err}");
    }
}

#[test]
fn chain_oracle_forced_outcomes() {
    let x = [1.0, 0.9, 0.1, 0.0];
    let sure = ChainInstance::new(4, 1.0f64).unwrap();
    assert_eq!(chain_oracle_with(&sure, &x, true), chain_gradient(&sure, &x));
    let inst = ChainInstance::new(4, 0.3f64).unwrap();
    let g = chain_gradient(&inst, &x);
    let o = chain_oracle_with(&inst, &x, false);
    let j = prog(&x, 0.25);
    assert_eq!(j, 2);
    for i in 0..4 {
        if i == j {
            assert_eq!(o[i], 0.0);
        } else {
            assert_eq!(o[i], g[i]);
        }
    }
}

#[test]
fn projection_examples() {
    let ball = Domain::Ball { center: vec![0.0f64, 0.0], radius: 1.0 };
    let p = project(&ball, &[3.0, 4.0]);
    assert_relative_eq!(p[0], 0.6, epsilon = 1e-15);
    assert_relative_eq!(p[1], 0.8, epsilon = 1e-15);
    assert_eq!(project(&ball, &[0.1, 0.2]), vec![0.1, 0.2]);
    let interval = Domain::Interval { lo: 0.0f64, hi: 0.5 };
    assert_eq!(project(&interval, &[0.7]), vec![0.5]);
}

/// Cutkosky–Mehta normalized-direction inequality, checked against the
/// gradients of the nonconvex test problem.
#[test]
fn normalized_direction_inequality() {
    let d = 5;
    let p = nonconvex_problem::<f64>(d, NoiseSpec::zero(d)).unwrap();
    let mut rng = Seed::new(8).rng();
    let stable = NoiseSpec::stable(1.5, 1.0, d);
    for i in 0..100_000 {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
        let u = p.exact_gradient(&x);
        let noise: Vec<f64> = stable.sample(&mut rng).unwrap();
        // Mix tiny and huge perturbations.
        let scale = 10f64.powi(i % 7 - 4);
        let v: Vec<f64> = u.iter().zip(&noise).map(|(a, b)| a + scale * b).collect();
        let nv = norm(&v);
        if nv == 0.0 {
            continue;
        }
        let lhs = dot(&v, &u) / nv;
        let rhs = norm(&u) / 3.0 - 8.0 / 3.0 * norm(&sub(&v, &u));
        assert!(lhs >= rhs - 1e-12, "violated at {x:?}: {lhs} < {rhs}");
    }
}

fn domain_strategy() -> impl Strategy<Value = Domain<f64>> {
    prop_oneof![
        (prop::collection::vec(-5.0..5.0f64, 3), 0.1..10.0f64).prop_map(|(c, r)| Domain::Ball { center: c, radius: r }),
        (prop::collection::vec(-5.0..5.0f64, 3), prop::collection::vec(0.0..5.0f64, 3)).prop_map(|(lo, w)| {
            let upper = lo.iter().zip(&w).map(|(a, b)| a + b).collect();
            Domain::Box { lower: lo, upper }
        }),
    ]
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_nonexpansive(
        dom in domain_strategy(),
        y in prop::collection::vec(-20.0..20.0f64, 3),
        z in prop::collection::vec(-20.0..20.0f64, 3),
    ) {
        let py = project(&dom, &y);
        let pz = project(&dom, &z);
        prop_assert!(dom.contains(&py, 1e-9));
        let again = project(&dom, &py);
        prop_assert!(norm(&sub(&again, &py)) <= 1e-12 * (1.0 + norm(&py)));
        prop_assert!(norm(&sub(&py, &pz)) <= norm(&sub(&y, &z)) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn interval_projection(lo in -5.0..5.0f64, w in 0.0..5.0f64, y in -20.0..20.0f64, z in -20.0..20.0f64) {
        let dom = Domain::Interval { lo, hi: lo + w };
        let py = project(&dom, &[y])[0];
        let pz = project(&dom, &[z])[0];
        prop_assert!(py >= lo && py <= lo + w);
        prop_assert_eq!(project(&dom, &[py])[0], py);
        prop_assert!((py - pz).abs() <= (y - z).abs());
    }
}
