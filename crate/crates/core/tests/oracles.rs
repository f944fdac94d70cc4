//! Independent oracles for the frozen example values: rational arithmetic,
//! composite Simpson quadrature, and exhaustive enumeration.

use num_rational::Ratio;
use ssc_lab::cone::ConePoint;
use ssc_lab::experiments::{perturbation_sweep, OutputFormat, SweepConfig};
use ssc_lab::grid::{l2_inner, l2_norm_sq, GridFunction, Mesh};
use ssc_lab::objective::{value, Perturbation};
use ssc_lab::operators::{apply_sstar_s, gram_matrix, norm_s_sq, op_norm_sstar_s};
use ssc_lab::solvers::{solve_bangbang, solve_bruteforce, SolveMethod, SolverOptions};

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn gf(values: &[f64]) -> GridFunction {
    GridFunction::new(Mesh::new(values.len()).unwrap(), values.to_vec()).unwrap()
}

/// Δ·Σ u_i v_i in exact rationals.
fn rational_inner(u: &[i64], v: &[i64]) -> Q {
    let n = u.len() as i64;
    u.iter().zip(v).map(|(a, b)| q(a * b, 1)).sum::<Q>() / q(n, 1)
}

/// Piecewise-constant `u` evaluated at `x`.
fn eval_pc(u: &[f64], x: f64) -> f64 {
    let n = u.len();
    let i = ((x * n as f64) as usize).min(n - 1);
    u[i]
}

/// (Su)(x) by direct accumulation of full cells plus the partial one.
fn eval_su(u: &[f64], x: f64) -> f64 {
    let n = u.len();
    let d = 1.0 / n as f64;
    let mut acc = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        let lo = i as f64 * d;
        if x <= lo {
            break;
        }
        acc += ui * (x.min(lo + d) - lo);
    }
    acc
}

/// Composite Simpson on `[a, b]` with `m` panels; exact for piecewise
/// cubics whose breakpoints fall on panel edges.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    (0..m)
        .map(|k| {
            let x0 = a + k as f64 * h;
            h / 6.0 * (f(x0) + 4.0 * f(x0 + h / 2.0) + f(x0 + h))
        })
        .sum()
}

#[test]
fn inner_products_against_rationals() {
    let got = l2_inner(&gf(&[1.0, 2.0, 3.0, 4.0]), &gf(&[1.0; 4])).unwrap();
    assert_eq!(got, to_f64(rational_inner(&[1, 2, 3, 4], &[1, 1, 1, 1])));
    assert_eq!(rational_inner(&[1, 2, 3, 4], &[1, 1, 1, 1]), q(5, 2));

    let got = l2_norm_sq(&gf(&[3.0, 0.0, 0.0]));
    assert_eq!(rational_inner(&[3, 0, 0], &[3, 0, 0]), q(3, 1));
    assert_eq!(got, 3.0);
}

#[test]
fn gram_n2_against_quadrature() {
    let g = gram_matrix(Mesh::new(2).unwrap());
    let basis = [[1.0, 0.0], [0.0, 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            let entry = simpson(|x| eval_su(&basis[i], x) * eval_su(&basis[j], x), 0.0, 1.0, 64);
            assert!((g.get(i, j) - entry).abs() < 1e-12, "({i},{j})");
        }
    }
    assert!((g.get(0, 0) - to_f64(q(1, 6))).abs() < 1e-15);
    assert!((g.get(0, 1) - to_f64(q(1, 16))).abs() < 1e-15);
    assert!((g.get(1, 1) - to_f64(q(1, 24))).abs() < 1e-15);
}

#[test]
fn gram_quadratic_form_matches_norm_s_sq() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for n in [1usize, 2, 5, 16, 40] {
        let mesh = Mesh::new(n).unwrap();
        let g = gram_matrix(mesh);
        for _ in 0..100 {
            let u = GridFunction::from_fn(mesh, |_| rng.gen_range(-3.0..3.0));
            let a = g.quadratic_form(&u).unwrap();
            let b = norm_s_sq(&u);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn norm_s_sq_against_quadrature() {
    for u in [vec![1.0, -1.0], vec![1.0, -1.0, 1.0, -1.0], vec![0.3, 2.0, -1.1, 0.0, 0.7]] {
        let n = u.len();
        let oracle = simpson(|x| eval_su(&u, x).powi(2), 0.0, 1.0, 8 * n);
        assert!((norm_s_sq(&gf(&u)) - oracle).abs() < 1e-14);
    }
    // 1/(3n²) for alternating signs.
    for n in [2usize, 4, 10, 64] {
        let alt = GridFunction::alternating(Mesh::new(n).unwrap());
        assert!((norm_s_sq(&alt) - 1.0 / (3.0 * (n * n) as f64)).abs() < 1e-15);
    }
}

#[test]
fn sstar_s_cell_averages_against_quadrature() {
    // Cell average of x ↦ ∫ₓ¹ (Su)(ξ) dξ, with the inner integral by Simpson too.
    for u in [vec![1.0], vec![1.0, 1.0], vec![2.0, -1.0, 0.5, 0.25, -3.0]] {
        let n = u.len();
        let d = 1.0 / n as f64;
        // Split at mesh nodes so each Simpson panel sees a single polynomial piece.
        let adjoint = |x: f64| {
            let first = ((x * n as f64).floor() as usize + 1).min(n);
            let mut acc = simpson(|xi| eval_su(&u, xi), x, (first as f64 * d).max(x), 1);
            for k in first..n {
                acc += simpson(|xi| eval_su(&u, xi), k as f64 * d, (k + 1) as f64 * d, 1);
            }
            acc
        };
        let w = apply_sstar_s(&gf(&u));
        for i in 0..n {
            let avg = simpson(adjoint, i as f64 * d, (i + 1) as f64 * d, 64) / d;
            assert!((w.values()[i] - avg).abs() < 1e-9, "u={u:?} cell {i}");
        }
    }
    let w = apply_sstar_s(&gf(&[1.0]));
    assert!((w.values()[0] - to_f64(q(1, 3))).abs() < 1e-15);
    // (Gu)/Δ for n = 2, u = (1,1): 2·(1/6 + 1/16) = 11/24, 2·(1/16 + 1/24) = 5/24.
    let w = apply_sstar_s(&gf(&[1.0, 1.0]));
    assert!((w.values()[0] - to_f64(q(11, 24))).abs() < 1e-15);
    assert!((w.values()[1] - to_f64(q(5, 24))).abs() < 1e-15);
}

#[test]
fn piecewise_constant_eval_agrees_with_grid() {
    let u = [0.5, -2.0, 1.5];
    assert_eq!(eval_pc(&u, 0.1), 0.5);
    assert_eq!(eval_pc(&u, 0.5), -2.0);
    assert_eq!(eval_pc(&u, 1.0), 1.5);
}

#[test]
fn spectral_norm_increases_toward_continuum() {
    let limit = 4.0 / std::f64::consts::PI.powi(2);
    let mut prev = 0.0;
    let mut values = Vec::new();
    for n in [4usize, 8, 16, 32, 64, 128, 256] {
        let l = op_norm_sstar_s(Mesh::new(n).unwrap()).unwrap();
        assert!(l > prev && l < limit, "n={n}: {l}");
        prev = l;
        values.push(l);
    }
    // Richardson extrapolation of the last two (second-order convergence).
    let k = values.len();
    let extrapolated = (4.0 * values[k - 1] - values[k - 2]) / 3.0;
    assert!((extrapolated - limit).abs() < 1e-7, "{extrapolated} vs {limit}");
}

/// Enumerate every vertex directly through `value` on the grid functions.
fn enumerate_min(h: f64, n: usize) -> (f64, f64) {
    let mesh = Mesh::new(n).unwrap();
    let hp = Perturbation::new(h).unwrap();
    let mut best = (0.0, 0.0);
    for bits in 0u32..(1 << n) {
        let sigma: Vec<f64> = (0..n).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let m = norm_s_sq(&GridFunction::new(mesh, sigma.clone()).unwrap());
        // Scan t on a fine grid rather than using the closed form.
        let mut t_best = (f64::INFINITY, 0.0);
        for k in 0..=20_000 {
            let t = h * k as f64 / 10_000.0;
            let f = t * t * (0.5 + m) - h * t;
            if f < t_best.0 {
                t_best = (f, t);
            }
        }
        if t_best.0 < best.0 {
            let p = ConePoint::new(t_best.1, GridFunction::new(mesh, sigma.iter().map(|s| s * t_best.1).collect()).unwrap());
            best = (value(hp, &p), t_best.1);
        }
    }
    best
}

#[test]
fn brute_force_examples_against_enumeration() {
    let (f, t) = enumerate_min(1.0, 2);
    assert!((f + 3.0 / 7.0).abs() < 1e-7 && (t - 6.0 / 7.0).abs() < 1e-4);
    let rep = solve_bruteforce(Perturbation::new(1.0).unwrap(), Mesh::new(2).unwrap()).unwrap();
    assert!((rep.objective - f).abs() < 1e-7);

    let (f, t) = enumerate_min(1.0, 4);
    assert!((f + 12.0 / 25.0).abs() < 1e-7 && (t - 24.0 / 25.0).abs() < 1e-4);

    let (f, _) = enumerate_min(2.0, 1);
    assert!((f + 1.2).abs() < 1e-7);
}

#[test]
fn alternating_pattern_minimizes_at_small_n() {
    for n in 1..=12usize {
        let mesh = Mesh::new(n).unwrap();
        let min_m = (0u32..(1 << n))
            .map(|bits| {
                let s: Vec<f64> = (0..n).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
                norm_s_sq(&GridFunction::new(mesh, s).unwrap())
            })
            .fold(f64::INFINITY, f64::min);
        assert!((min_m - 1.0 / (3.0 * (n * n) as f64)).abs() < 1e-15);
        let rep = solve_bruteforce(Perturbation::new(0.5).unwrap(), mesh).unwrap();
        assert_eq!(rep.sign_changes, n - 1);
        assert!(rep.tied_optima >= 2);
    }
}

#[test]
fn bangbang_matches_brute_and_escape_bound() {
    let opts = SolverOptions::default();
    for n in 1..=12usize {
        let mesh = Mesh::new(n).unwrap();
        for h in [0.1, 0.5, 1.0] {
            let hp = Perturbation::new(h).unwrap();
            let b = solve_bruteforce(hp, mesh).unwrap();
            let g = solve_bangbang(hp, mesh, &vec![1; n], &opts).unwrap();
            assert!((b.objective - g.objective).abs() < 1e-10);
            assert!(g.pontryagin_residual <= 10.0 * opts.tolerance);
            assert!(g.converged && b.converged);
            let bound = h * h / (3.0 * (n * n) as f64);
            assert!((b.objective + h * h / 2.0).abs() <= bound);
        }
    }
}

#[test]
fn sweep_trends_are_monotone() {
    let cfg = SweepConfig {
        h_list: vec![0.1],
        n_list: vec![8, 16, 32, 64, 128, 256],
        method: SolveMethod::Bangbang,
        opts: SolverOptions::default(),
        output_path: "unused".into(),
        format: OutputFormat::Csv,
    };
    let rows = perturbation_sweep(&cfg).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].t_star > w[0].t_star && w[1].t_star < 0.1);
        assert!(w[1].f_star < w[0].f_star && w[1].f_star > -0.005);
        assert!(w[1].norm_Su_sq < w[0].norm_Su_sq);
    }
}
