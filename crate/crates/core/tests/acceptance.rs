//! Acceptance criteria, one line per criterion. Reference values come from
//! brute-force or closed-form oracles written here, never from the code
//! under test.

use std::process::ExitCode;

use nqs_uat::ansatz::{tabulate, Activation, NpsParams};
use nqs_uat::constructors::{
    build_fnn_exact, build_nnbf_exact, build_nps_general, build_nps_saturating, build_sign_factor, regularize_zeros,
    separating_vector, GeneralNpsOptions,
};
use nqs_uat::fockspace::{SpinConvention, WavefunctionTable};
use nqs_uat::fourier::{neuron_fourier, wht_forward, wht_inverse, ScalarFunction};
use nqs_uat::verify::{demo_necessity, fourier_residual, random_sector_target, random_target, scaled_to_max_abs};
use nqs_uat::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const EXEC: Execution = Execution::Parallel;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn bit(k: usize, orbital: usize) -> usize {
    1 << (k - 1 - orbital)
}

fn spins(k: usize, index: usize) -> Vec<f64> {
    (0..k).map(|p| if index & bit(k, p) != 0 { -1.0 } else { 1.0 }).collect()
}

fn direct_wht(phi: &[f64]) -> Vec<f64> {
    let d = phi.len();
    (0..d)
        .map(|x| {
            let s: f64 = phi
                .iter()
                .enumerate()
                .map(|(n, v)| if (n & x).count_ones() % 2 == 0 { *v } else { -*v })
                .sum();
            s / d as f64
        })
        .collect()
}

fn c01_wht_round_trip() -> Outcome {
    let mut worst_round = 0.0f64;
    let mut worst_direct = 0.0f64;
    for i in 0..50u64 {
        let k = 1 + (i as usize % 12);
        let psi = random_target(k, 1000 + i).map_err(|e| e.to_string())?;
        let fhat = wht_forward(&psi, SpinConvention::Appendix);
        worst_round = worst_round.max(max_dev(wht_inverse(&fhat).amplitudes(), psi.amplitudes()));
        if k <= 8 {
            worst_direct = worst_direct.max(max_dev(fhat.coeffs(), &direct_wht(psi.amplitudes())));
        }
    }
    ensure(worst_round < 1e-12 && worst_direct < 1e-12, || {
        format!("round trip {worst_round:.2e}, direct {worst_direct:.2e}")
    })?;
    Ok(format!("50 tables K=1..12, round trip {worst_round:.1e}, direct-sum oracle K<=8 {worst_direct:.1e} (tol 1e-12)"))
}

fn c02_neuron_fourier_examples() -> Outcome {
    let pool = [Activation::Sigmoid, Activation::Tanh, Activation::Cos, Activation::Exp, Activation::ExpPoly { degree: 3 }];
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let f = pool[r.random_range(0..pool.len())];
        let b: f64 = r.random_range(-1.0..1.0);
        let (w1, w2): (f64, f64) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let v = |x: f64| f.eval(x);
        let (pp, mp, pm, mm) = (v(b + w1 + w2), v(b - w1 + w2), v(b + w1 - w2), v(b - w1 - w2));
        // Patterns x1x2 as two-bit masks with orbital 1 most significant.
        let expected = [
            (0b00, (pp + mp + pm + mm) / 4.0),
            (0b10, (pp - mp + pm - mm) / 4.0),
            (0b01, (pp + mp - pm - mm) / 4.0),
            (0b11, (pp - mp - pm + mm) / 4.0),
        ];
        let t2 = neuron_fourier(&f, 2, b, &[0, 1], &[w1, w2]).map_err(|e| e.to_string())?;
        for (x, e) in expected {
            worst = worst.max((t2.get(x) - e).abs());
        }
        let t1 = neuron_fourier(&f, 1, b, &[0], &[w1]).map_err(|e| e.to_string())?;
        worst = worst.max((t1.get(0) - (v(b + w1) + v(b - w1)) / 2.0).abs());
        worst = worst.max((t1.get(1) - (v(b + w1) - v(b - w1)) / 2.0).abs());
    }
    ensure(worst < 1e-12, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("10 random (f,b,w), K=2 formulas and corrected K=1, max dev {worst:.1e} (tol 1e-12)"))
}

fn c03_parity() -> Outcome {
    let pool = [Activation::Sigmoid, Activation::Tanh, Activation::Cos, Activation::Exp];
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let k = r.random_range(1..=5);
        let f = pool[r.random_range(0..pool.len())];
        let b: f64 = r.random_range(-1.0..1.0);
        let omega: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
        let support: Vec<usize> = (0..k).collect();
        let flip = r.random_range(0..k);
        let base = neuron_fourier(&f, k, b, &support, &omega).map_err(|e| e.to_string())?;
        let mut flipped_omega = omega.clone();
        flipped_omega[flip] = -flipped_omega[flip];
        let flipped = neuron_fourier(&f, k, b, &support, &flipped_omega).map_err(|e| e.to_string())?;
        for x in 0..(1usize << k) {
            let sign = if x & bit(k, flip) != 0 { -1.0 } else { 1.0 };
            worst = worst.max((flipped.get(x) - sign * base.get(x)).abs());
        }
    }
    ensure(worst < 1e-12, || format!("max deviation {worst:.2e}"))?;
    Ok(format!("20 random neurons, max dev {worst:.1e} (tol 1e-12)"))
}

fn c04_asymptotics() -> Outcome {
    struct LnCos;
    impl ScalarFunction for LnCos {
        fn name(&self) -> String {
            "ln cos".into()
        }
        fn value(&self, x: f64) -> f64 {
            x.cos().ln()
        }
        fn derivative(&self, _: usize, _: f64) -> Option<f64> {
            None
        }
    }
    let b = 0.3f64;
    let u = [0.6, 0.8];
    let sec2 = 1.0 / (b.cos() * b.cos());
    // (function, pattern, closed-form f^{(|x|)}(b))
    let cases: Vec<(&dyn ScalarFunction, usize, f64, &str)> = vec![
        (&Activation::Exp, 0b10, b.exp(), "exp x=10"),
        (&Activation::Exp, 0b11, b.exp(), "exp x=11"),
        (&LnCos, 0b10, -b.tan(), "ln cos x=10"),
        (&LnCos, 0b11, -sec2, "ln cos x=11"),
    ];
    let mut notes = Vec::new();
    for (f, x, a, label) in cases {
        let mut errs = Vec::new();
        for eps in [1e-1, 1e-2, 1e-3] {
            let omega = [eps * u[0], eps * u[1]];
            let t = neuron_fourier(f, 2, b, &[0, 1], &omega).map_err(|e| e.to_string())?;
            let prod: f64 = (0..2).filter(|&p| x & bit(2, p) != 0).map(|p| omega[p]).product();
            errs.push((t.get(x) / (a * prod) - 1.0).abs());
        }
        for w in errs.windows(2) {
            let step = w[1] / w[0];
            ensure((0.5e-2..=2e-2).contains(&step), || format!("{label}: error ratio {step:.3e} per decade, errors {errs:?}"))?;
        }
        notes.push(format!("{label} {:.1e}->{:.1e}", errs[0], errs[2]));
    }
    Ok(format!("ratio error shrinks x1e-2 per decade of eps: {}", notes.join(", ")))
}

fn c05_fnn() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for k in 3..=6 {
        for seed in 0..20u64 {
            let psi = random_target(k, seed).map_err(|e| e.to_string())?;
            let mut prev = f64::INFINITY;
            for theta in [10.0, 20.0, 40.0, 80.0] {
                let p = build_fnn_exact(&psi, Activation::Sigmoid, theta).map_err(|e| e.to_string())?;
                let err = max_dev(tabulate(&p, EXEC).map_err(|e| e.to_string())?.amplitudes(), psi.amplitudes());
                ensure(err <= prev, || format!("K={k} seed={seed}: error rose to {err:.2e} at theta={theta}"))?;
                prev = err;
                if theta == 40.0 {
                    worst = worst.max(err);
                }
            }
            count += 1;
        }
    }
    ensure(worst < 1e-10, || format!("max error {worst:.2e} at theta=40"))?;
    Ok(format!("{count} targets K=3..6, theta=40 max err {worst:.1e} (tol 1e-10), nonincreasing over theta 10..80"))
}

fn c06_nnbf() -> Outcome {
    let (k, electrons) = (4, 2);
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let psi = random_sector_target(k, electrons, seed).map_err(|e| e.to_string())?;
        let p = build_nnbf_exact(&psi, electrons, Activation::Sigmoid, 40.0).map_err(|e| e.to_string())?;
        let table = tabulate(&p, EXEC).map_err(|e| e.to_string())?;
        worst = worst.max(max_dev(table.amplitudes(), psi.amplitudes()));
        let mut swapped = p.clone();
        for rows in &mut swapped.orbital_coefficients {
            rows.swap(0, 1);
        }
        let swapped_table = tabulate(&swapped, EXEC).map_err(|e| e.to_string())?;
        for (i, (a, s)) in table.amplitudes().iter().zip(swapped_table.amplitudes()).enumerate() {
            ensure(*a == -*s, || format!("seed {seed}: column swap gives {s} vs {a} at index {i}"))?;
        }
    }
    ensure(worst < 1e-8, || format!("sector max error {worst:.2e}"))?;
    Ok(format!("20 targets K=4 N=2 theta=40, sector max err {worst:.1e} (tol 1e-8), column swap negates exactly"))
}

fn c07_saturating() -> Outcome {
    let mut worst = 0.0f64;
    for k in 3..=5 {
        for seed in 0..20u64 {
            let psi = scaled_to_max_abs(&random_target(k, seed).map_err(|e| e.to_string())?, 0.9).map_err(|e| e.to_string())?;
            let p = build_nps_saturating(&psi, Activation::Tanh, 60.0).map_err(|e| e.to_string())?;
            worst = worst.max(max_dev(tabulate(&p, EXEC).map_err(|e| e.to_string())?.amplitudes(), psi.amplitudes()));
        }
    }
    ensure(worst < 1e-6, || format!("max error {worst:.2e}"))?;
    let mut min_margin = f64::INFINITY;
    for k in 1..=10 {
        for i in 0..(1usize << k) {
            let u = separating_vector(i, k).map_err(|e| e.to_string())?;
            for j in (0..(1usize << k)).filter(|&j| j != i) {
                let m: f64 = (0..k)
                    .map(|p| {
                        let nj = f64::from(u8::from(j & bit(k, p) != 0));
                        let ni = f64::from(u8::from(i & bit(k, p) != 0));
                        u[p] * (nj - ni)
                    })
                    .sum();
                min_margin = min_margin.min(m);
            }
        }
    }
    ensure(min_margin >= 1.0, || format!("separating margin {min_margin}"))?;
    Ok(format!("60 targets K=3..5 tanh theta=60, max err {worst:.1e} (tol 1e-6); min margin {min_margin} over K<=10"))
}

fn c08_regularize() -> Outcome {
    let mut r = rng(8);
    let mut worst_dev = 0.0f64;
    let mut worst_norm = 0.0f64;
    for seed in 0..20u64 {
        let k = 3 + (seed as usize % 4);
        let base = random_target(k, 800 + seed).map_err(|e| e.to_string())?;
        let mut amps = base.amplitudes().to_vec();
        // At least two zeros: a single zero lands exactly on ε.
        let zeros = r.random_range(2..=amps.len() / 2);
        for i in rand::seq::index::sample(&mut r, amps.len(), zeros) {
            amps[i] = 0.0;
        }
        let psi = WavefunctionTable::new(k, amps).and_then(|t| t.normalized()).map_err(|e| e.to_string())?;
        for eps in [1e-1, 1e-2] {
            let t = regularize_zeros(&psi, eps).map_err(|e| e.to_string())?;
            let dev = max_dev(t.amplitudes(), psi.amplitudes());
            ensure(dev < eps, || format!("seed {seed} eps {eps}: deviation {dev}"))?;
            worst_dev = worst_dev.max(dev / eps);
            let norm = t.amplitudes().iter().map(|a| a * a).sum::<f64>().sqrt();
            worst_norm = worst_norm.max((norm - 1.0).abs());
        }
    }
    ensure(worst_norm <= 1e-12, || format!("norm deviation {worst_norm:.2e}"))?;
    Ok(format!("20 tables with planted zeros, max dev/eps {worst_dev:.3}, norm dev {worst_norm:.1e} (tol 1e-12)"))
}

fn c09_sign_factor() -> Outcome {
    let mut checked = 0;
    for k in 3..=5 {
        for seed in 0..20u64 {
            let psi = random_target(k, 900 + seed).map_err(|e| e.to_string())?;
            let tilde = regularize_zeros(&psi, 1e-3).map_err(|e| e.to_string())?;
            let s = build_sign_factor(&tilde, Activation::Cos, 0.5).map_err(|e| e.to_string())?;
            let table = tabulate(&s.as_nps(), EXEC).map_err(|e| e.to_string())?;
            for (i, (v, t)) in table.amplitudes().iter().zip(tilde.amplitudes()).enumerate() {
                ensure(v.is_sign_negative() == t.is_sign_negative() && *v != 0.0, || {
                    format!("K={k} seed={seed} index {i}: s={v}, target={t}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("60 signed targets K=3..5, cos: signs match on all {checked} configurations"))
}

fn c10_general() -> Outcome {
    let deltas = [1e-2, 1e-3, 1e-4];
    let mut worst_err = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for k in [3, 4] {
        for seed in 0..5u64 {
            let psi = random_target(k, 100 + seed).map_err(|e| e.to_string())?;
            let mut prev = f64::INFINITY;
            for delta in deltas {
                let g = build_nps_general(&psi, Activation::Cos, &GeneralNpsOptions::with_delta(delta))
                    .map_err(|e| e.to_string())?;
                let err = max_dev(tabulate(&g.params, EXEC).map_err(|e| e.to_string())?.amplitudes(), psi.amplitudes());
                ensure(err < prev, || format!("K={k} seed={seed}: error {err:.2e} not below {prev:.2e} at delta={delta}"))?;
                prev = err;
                if delta == 1e-4 {
                    let res = fourier_residual(&g.positive_part, &g.positive_target).map_err(|e| e.to_string())?;
                    let top = res.coeffs()[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
                    ensure(top <= delta / 2.0 + 1e-10, || format!("K={k} seed={seed}: residual coefficient {top:.3e}"))?;
                    worst_ratio = worst_ratio.max(top / delta);
                    worst_err = worst_err.max(err);
                }
            }
        }
    }
    ensure(worst_err < 1e-2, || format!("table error {worst_err:.2e}"))?;
    Ok(format!(
        "10 targets K=3,4, cos, delta=1e-4: max residual {worst_ratio:.3}*delta (bound 0.5), table err {worst_err:.1e} (tol 1e-2), strictly decreasing over delta"
    ))
}

fn c11_necessity() -> Outcome {
    let demo = demo_necessity(3, 1.0, 1e-4, EXEC).map_err(|e| e.to_string())?;
    // Oracle: top coefficient of ln ψ₊ = z1 z2 z3 - ln norm by direct sum.
    let log_target: Vec<f64> = (0..8).map(|n| spins(3, n).iter().product::<f64>()).collect();
    let oracle = direct_wht(&log_target)[7];
    ensure((oracle - 1.0).abs() < 1e-15, || format!("oracle top coefficient {oracle}"))?;
    ensure((demo.forbidden_top_residual - 1.0).abs() <= 1e-12, || {
        format!("exp-poly:2 top residual {}", demo.forbidden_top_residual)
    })?;
    ensure((demo.obstruction.residual - 1.0).abs() <= 1e-12, || format!("obstruction {}", demo.obstruction.residual))?;
    ensure(demo.cos_error.max_abs < 1e-2, || format!("cos table error {:.2e}", demo.cos_error.max_abs))?;
    Ok(format!(
        "exp(z1z2z3): exp-poly:2 top residual {:.15} (tol 1e-12), cos table err {:.1e} (tol 1e-2)",
        demo.forbidden_top_residual, demo.cos_error.max_abs
    ))
}

fn c12_log_direct() -> Outcome {
    let mut r = rng(12);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let k = r.random_range(2..=6);
        let act = [Activation::Sigmoid, Activation::Exp, Activation::Cos, Activation::ExpPoly { degree: 2 }][r.random_range(0..4)];
        let hidden = r.random_range(1..=8);
        let spread = if act == Activation::Cos { 0.2 } else { 1.0 };
        let mut p = NpsParams::empty(k, act, r.random_range(-1.0..1.0));
        for _ in 0..hidden {
            let w: Vec<f64> = (0..k).map(|_| r.random_range(-spread..spread)).collect();
            p.push_neuron(w, r.random_range(-spread..spread), r.random_range(1..=5));
        }
        for n in 0..(1usize << k) {
            let occ: Vec<f64> = (0..k).map(|q| f64::from(u8::from(n & bit(k, q) != 0))).collect();
            let mut log_form = p.log_scale;
            for ((w, b), m) in p.weights.iter().zip(&p.biases).zip(&p.multiplicities) {
                let x = b + w.iter().zip(&occ).map(|(a, o)| a * o).sum::<f64>();
                let phi = match act {
                    Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
                    Activation::Exp => x.exp(),
                    Activation::Cos => x.cos(),
                    _ => (x + x * x / 2.0).exp(),
                };
                log_form += *m as f64 * phi.ln();
            }
            let oracle = log_form.exp();
            let config = nqs_uat::fockspace::OccupationVector::new(k, n).map_err(|e| e.to_string())?;
            let direct = p.eval(&config).map_err(|e| e.to_string())?;
            let via_log = p.eval_log(&config).map_err(|e| e.to_string())?.value();
            worst = worst.max(((direct - oracle) / oracle).abs()).max(((via_log - direct) / direct).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("relative deviation {worst:.2e}"))?;
    Ok(format!("50 random positive NPS, direct vs log form max rel dev {worst:.1e} (tol 1e-10)"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("wht round trip", c01_wht_round_trip),
        ("neuron fourier examples", c02_neuron_fourier_examples),
        ("parity", c03_parity),
        ("small-omega asymptotics", c04_asymptotics),
        ("fnn construction", c05_fnn),
        ("nnbf construction", c06_nnbf),
        ("saturating nps", c07_saturating),
        ("zero regularization", c08_regularize),
        ("sign factor", c09_sign_factor),
        ("general nps", c10_general),
        ("necessity", c11_necessity),
        ("log/direct nps", c12_log_direct),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
