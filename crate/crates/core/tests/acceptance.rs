//! Acceptance suite: one test per criterion, each printing a single
//! `[acceptance] N: PASS/FAIL` line (visible with `--nocapture`, and always
//! visible in the failure report of a red criterion).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsmc::cost;
use tsmc::engine::{run_two_stage, EngineConfig, FloorPolicy};
use tsmc::harness::{run_bench, DimensionSpec, ExperimentConfig, Problem};
use tsmc::problems::{hump_exact_moments, hump_random_instance, option_exact_price, OptionParams};
use tsmc::sampler::{uniform_open01, SeededSampler};
use tsmc::sizes::{self, KurtosisCapQuery, SizeQuery};
use tsmc::stats::{std_normal_cdf, MomentAccumulator};

fn verdict(criterion: u32, name: &str, pass: bool) {
    println!(
        "[acceptance] {criterion}: {} - {name}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {criterion} failed: {name}");
}

// 1. Kurtosis-cap relation: exact pilot sizes for the three target caps, and
// the cap values at the standard / heavy-duty pilot sizes.
#[test]
fn criterion_1_kurtosis_cap_relation() {
    let alpha_tilde = 1.0 - 0.99f64.sqrt();
    let mut pass = true;
    for (target, expect) in [(2.0, 6593), (10.0, 59311), (100.0, 652417)] {
        pass &= sizes::min_n_sigma(target, alpha_tilde, 1.1) == expect;
    }
    let cap = |n_sigma| {
        sizes::kappa_max(&KurtosisCapQuery { alpha: alpha_tilde, n_sigma, inflation: 1.1 })
    };
    pass &= (cap(1 << 13) - 2.24).abs() <= 0.01;
    // the cap formula that reproduces every other anchor above yields 40.78
    // at 2^18, so this published 40.1 reference cannot also hold; kept as
    // stated and allowed to fail
    pass &= (cap(1 << 18) - 40.1).abs() <= 0.1;
    verdict(1, "kurtosis cap relation", pass);
}

// 2. Berry-Esseen search: bisection equals exhaustive linear scan on the
// 18-point grid, and the tail predicate is strictly decreasing in n.
#[test]
fn criterion_2_be_oracle_equivalence() {
    let mut pass = true;
    for &soe in &[0.1, 1.0, 10.0] {
        for &alpha in &[0.01, 0.1] {
            for &m3 in &[1.0, 2.0, 10.0] {
                let q = SizeQuery { epsilon: 1.0, sigma: soe, alpha, m3 };
                let fast = sizes::n_be(&q);
                // brute force from n = 1
                let tail = |n: u64| {
                    let x = (n as f64).sqrt() / soe;
                    std_normal_cdf(-x) + sizes::be_delta(n, x, m3)
                };
                let mut slow = 1u64;
                while tail(slow) > alpha / 2.0 {
                    slow += 1;
                }
                pass &= fast == slow;
                let mut prev = tail(1);
                for n in 2..=1_000_000u64 {
                    let cur = tail(n);
                    if cur >= prev {
                        pass = false;
                        break;
                    }
                    prev = cur;
                }
            }
        }
    }
    verdict(2, "n_be bisection vs linear scan, monotone predicate", pass);
}

// 3. Coverage guarantee, checked empirically on two distributions with known
// kurtosis well under the cap.
#[test]
fn criterion_3_coverage_guarantee() {
    let alpha = 0.05;
    let alpha_tilde = 1.0 - (1.0f64 - alpha).sqrt();
    let n_sigma = sizes::min_n_sigma(2.0, alpha_tilde, 1.1);
    let cfg = EngineConfig {
        n_sigma,
        inflation: 1.1,
        alpha,
        epsilon: f64::NAN, // set per distribution below
        n_max: 1_000_000_000,
        floor_policy: FloorPolicy::One,
    };
    let reps = 2000u64;
    let slack = 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt();
    let mut pass = true;

    // shifted Bernoulli on {-1, +1}: mean 0, modified kurtosis 1
    let mut failures = 0u64;
    for rep in 0..reps {
        let sampler = SeededSampler::new(rep, |rng: &mut ChaCha8Rng| {
            if uniform_open01(rng) < 0.5 {
                -1.0
            } else {
                1.0
            }
        });
        let cfg = EngineConfig { epsilon: 0.05, ..cfg };
        let report = run_two_stage(&sampler, &cfg).unwrap();
        assert!(!report.budget_truncated);
        if report.mu_hat.abs() > cfg.epsilon {
            failures += 1;
        }
    }
    let rate = failures as f64 / reps as f64;
    println!("[acceptance] 3: bernoulli failure rate {rate}");
    pass &= rate <= alpha + slack;

    // uniform(0,1): mean 1/2, modified kurtosis 1.8
    let mut failures = 0u64;
    for rep in 0..reps {
        let sampler = SeededSampler::new(rep, |rng: &mut ChaCha8Rng| uniform_open01(rng));
        let cfg = EngineConfig { epsilon: 0.015, ..cfg };
        let report = run_two_stage(&sampler, &cfg).unwrap();
        assert!(!report.budget_truncated);
        if (report.mu_hat - 0.5).abs() > cfg.epsilon {
            failures += 1;
        }
    }
    let rate = failures as f64 / reps as f64;
    println!("[acceptance] 3: uniform failure rate {rate}");
    pass &= rate <= alpha + slack;

    verdict(3, "two-stage coverage within binomial slack", pass);
}

// 4. One-sided variance envelopes: both bounds hold with frequency at least
// 1 - alpha minus three-sigma binomial slack.
#[test]
fn criterion_4_variance_envelopes() {
    let alpha = 0.05;
    let reps = 10_000u64;
    let slack = 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt();
    let mut pass = true;
    // (label, modified kurtosis, true variance, draw)
    let distributions: [(&str, f64, f64, fn(&mut ChaCha8Rng) -> f64); 3] = [
        ("uniform", 1.8, 1.0 / 12.0, |rng| uniform_open01(rng)),
        ("bernoulli", 1.0, 1.0, |rng| {
            if uniform_open01(rng) < 0.5 {
                -1.0
            } else {
                1.0
            }
        }),
        ("exponential", 9.0, 1.0, |rng| -uniform_open01(rng).ln()),
    ];
    for (label, kappa_tilde, sigma2, draw) in distributions {
        for n in [30u64, 300] {
            let nf = n as f64;
            let envelope = ((kappa_tilde - (nf - 3.0) / (nf - 1.0))
                * ((1.0 - alpha) / (alpha * nf)))
                .sqrt();
            let (mut upper_holds, mut lower_holds) = (0u64, 0u64);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..reps {
                let mut acc = MomentAccumulator::new();
                for _ in 0..n {
                    acc.accumulate(draw(&mut rng)).unwrap();
                }
                let s2 = acc.sample_variance().unwrap();
                if s2 < sigma2 * (1.0 + envelope) {
                    upper_holds += 1;
                }
                if s2 > sigma2 * (1.0 - envelope) {
                    lower_holds += 1;
                }
            }
            let (up, lo) = (
                upper_holds as f64 / reps as f64,
                lower_holds as f64 / reps as f64,
            );
            println!("[acceptance] 4: {label} n={n} upper {up} lower {lo}");
            pass &= up >= 1.0 - alpha - slack && lo >= 1.0 - alpha - slack;
        }
    }
    verdict(4, "variance envelope frequencies", pass);
}

// 5. Hump experiment at desk scale: every non-truncated replication whose
// exact kurtosis is under the cap lands within the tolerance.
#[test]
fn criterion_5_hump_experiment() {
    let cfg = ExperimentConfig {
        problem: Problem::Hump,
        replications: 100,
        epsilon: 1e-3,
        alpha: 0.01,
        inflation: 1.1,
        n_sigma: 1 << 13,
        n_max: 10_000_000,
        d_spec: DimensionSpec::Fixed(1),
        master_seed: 1,
        floor_policy: FloorPolicy::NSigma,
    };
    let records = run_bench(&cfg).unwrap();
    let guaranteed: Vec<_> = records
        .iter()
        .filter(|r| r.guaranteed && !r.budget_truncated)
        .collect();
    let overall = records.iter().filter(|r| r.success).count() as f64 / records.len() as f64;
    println!(
        "[acceptance] 5: overall success rate {overall}, guaranteed untruncated rows {}",
        guaranteed.len()
    );
    let pass = !guaranteed.is_empty() && guaranteed.iter().all(|r| r.success);
    verdict(5, "guaranteed hump rows all succeed", pass);
}

// 6. Option experiment at desk scale, plus the two price oracles frozen from
// a pre-build run: a 1e8-path sequential Monte Carlo and a quadrature over
// the lognormal law of the log geometric mean.
#[test]
fn criterion_6_option_experiment() {
    let mut pass = true;

    // analytic prices over the benchmark parameter grid
    let base = OptionParams {
        s0: 100.0,
        strike: 100.0,
        maturity: 1.0,
        rate: 0.03,
        volatility: 0.0,
        d: 0,
    };
    for v10 in 1..=7 {
        for d in [1usize, 2, 4, 8, 16, 32] {
            let price = option_exact_price(&OptionParams {
                volatility: v10 as f64 / 10.0,
                d,
                ..base
            });
            pass &= (2.5..=14.5).contains(&price);
        }
    }

    // frozen oracle 1: 1e8 sequential-path Monte Carlo (seeded, run once
    // before the build), mean 8.9849549712 with standard error 1.506e-3
    let reference = option_exact_price(&OptionParams { volatility: 0.4, d: 8, ..base });
    pass &= (reference - 8.984_954_971_2f64).abs() <= 4.0 * 1.506e-3;

    // oracle 2: adaptive quadrature of E[(e^X - K)^+] for the Gaussian X
    pass &= (reference - lognormal_quadrature_price(0.4, 8)).abs() <= 1e-8;

    // the batch experiment itself
    let cfg = ExperimentConfig::new(Problem::Option, false);
    assert_eq!(cfg.replications, 50);
    let records = run_bench(&cfg).unwrap();
    let successes = records.iter().filter(|r| r.success).count();
    println!("[acceptance] 6: option successes {successes}/{}", records.len());
    pass &= successes as f64 / records.len() as f64 >= 0.98;

    verdict(6, "option prices, oracles, and success rate", pass);
}

/// Price via 1-D quadrature over the Gaussian log geometric mean; shares only
/// the distribution parameters (not the pricing formula) with the library.
fn lognormal_quadrature_price(volatility: f64, d: usize) -> f64 {
    let (s0, strike, maturity, rate) = (100.0f64, 100.0f64, 1.0f64, 0.03f64);
    let dt = maturity / d as f64;
    let mut weights = vec![1.0 / d as f64; d];
    weights[d - 1] = 0.5 / d as f64;
    let mut var_w = 0.0;
    for j in 0..d {
        for k in 0..d {
            let t_min = dt * (1 + j.min(k)) as f64;
            var_w += weights[j] * weights[k] * t_min;
        }
    }
    let m = s0.ln() + (rate - 0.5 * volatility * volatility) * maturity * 0.5;
    let s = volatility * var_w.sqrt();
    // composite Simpson over [ln K, m + 12 s]
    let (lo, hi) = (strike.ln(), m + 12.0 * s);
    let steps = 40_000usize;
    let h = (hi - lo) / steps as f64;
    let integrand = |x: f64| {
        let z = (x - m) / s;
        (x.exp() - strike) * (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
    };
    let mut sum = integrand(lo) + integrand(hi);
    for i in 1..steps {
        sum += integrand(lo + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (-rate * maturity).exp() * sum * h / 3.0
}

// 7. Cost curves: regime kinks near their published locations, heuristic
// ratio under 2, optimized ratio under 1.4, all at/near N_CLT = 1e8.
#[test]
fn criterion_7_cost_curves() {
    let (alpha, beta, kappa) = (0.01, 0.01, 100.0);
    let grid = cost::log_grid(1.0, 2e4, 400);
    let profiles = cost::cost_curve(alpha, beta, kappa, 4000.0, &grid);
    let mut pass = true;

    // kink locations from the regime transitions along the curve
    let mut kinks = Vec::new();
    for pair in profiles.windows(2) {
        if pair[0].regime != pair[1].regime {
            kinks.push((pair[1].n_clt as f64, pair[1].regime));
        }
    }
    println!("[acceptance] 7: kinks {kinks:?}");
    let near = |n_clt: f64, target: f64| n_clt / target <= 3.0 && target / n_clt <= 3.0;
    pass &= kinks
        .iter()
        .any(|&(n, r)| r == cost::Regime::BeNonuniform && near(n, 3.5e4));
    pass &= kinks
        .iter()
        .any(|&(n, r)| r == cost::Regime::BeUniform && near(n, 6e6));

    // sigma/eps with N_CLT = 1e8
    let soe = 1e4 / 2.575_829_303_548_9;
    let heuristic = cost::cost_curve(alpha, beta, kappa, 4000.0, &[soe])[0];
    println!("[acceptance] 7: heuristic ratio {}", heuristic.ratio);
    pass &= heuristic.ratio < 2.0;

    let (n_sigma, inflation, _) = cost::optimize_params(soe, alpha, beta, kappa);
    let optimized = cost::n_up(&cost::CostQuery {
        epsilon: 1.0,
        alpha,
        beta,
        kappa_max: kappa,
        sigma_max: soe,
        n_sigma,
        inflation,
        floor_policy: FloorPolicy::NSigma,
    });
    println!("[acceptance] 7: optimized ratio {}", optimized.ratio);
    // the formulas put the true optimum near 1.50 here (the ratio falls
    // below 1.4 only past N_CLT of roughly 3e8); kept as stated and allowed
    // to fail
    pass &= optimized.ratio < 1.4;

    verdict(7, "cost curve kinks and ratios", pass);
}

// 8. Exact hump moments against an independent per-coordinate quadrature.
#[test]
fn criterion_8_hump_moment_oracle() {
    let mut pass = true;
    for i in 0..100u64 {
        let d = [1usize, 3, 8][(i % 3) as usize];
        let params = hump_random_instance(1000 + i, d, (1e-2, 1e2));
        let exact = hump_exact_moments(&params);

        // power means of each coordinate factor by adaptive quadrature
        let mut pk = [1.0f64; 5];
        for j in 0..d {
            let (b, c, h) = (params.b[j], params.c[j], params.h[j]);
            let g = move |x: f64| {
                let t = (x - h) / c;
                1.0 + b * (-t * t).exp()
            };
            for (k, pkk) in pk.iter_mut().enumerate().skip(1) {
                *pkk *= adaptive_quadrature(&|x| g(x).powi(k as i32), c, h);
            }
        }
        let p1 = params.a0 + params.b0 * pk[1];
        let m2 = pk[2] - pk[1] * pk[1];
        let m4 = pk[4] - 4.0 * pk[1] * pk[3] + 6.0 * pk[1] * pk[1] * pk[2]
            - 3.0 * pk[1].powi(4);
        let sigma2 = params.b0 * params.b0 * m2;
        let kappa_tilde = m4 / (m2 * m2);

        let spike = params.c.iter().any(|&c| c < 1e-4);
        let tol = if spike { 1e-6 } else { 1e-8 };
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
        let ok = rel(exact.mu, p1) <= tol
            && rel(exact.sigma2, sigma2) <= tol
            && rel(exact.kappa_tilde, kappa_tilde) <= tol;
        if !ok {
            println!(
                "[acceptance] 8: instance {i} d={d} mu {} vs {} sigma2 {} vs {} kappa {} vs {}",
                exact.mu, p1, exact.sigma2, sigma2, exact.kappa_tilde, kappa_tilde
            );
        }
        pass &= ok;
    }
    verdict(8, "hump moments vs quadrature", pass);
}

/// Adaptive Simpson on [0, 1] with subdivision forced around the bump at `h`
/// so that width-1e-6 spikes are never stepped over.
fn adaptive_quadrature(f: &dyn Fn(f64) -> f64, c: f64, h: f64) -> f64 {
    let mut cuts = vec![0.0, 1.0];
    for k in [-20.0, -6.0, -2.0, -0.5, 0.0, 0.5, 2.0, 6.0, 20.0] {
        let x = h + k * c;
        if x > 0.0 && x < 1.0 {
            cuts.push(x);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        total += simpson_recursive(f, pair[0], pair[1], 1e-15, 48);
    }
    total
}

fn simpson_rule(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn simpson_recursive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let whole = simpson_rule(f, a, b);
    let mid = 0.5 * (a + b);
    let halves = simpson_rule(f, a, mid) + simpson_rule(f, mid, b);
    if depth == 0 || (halves - whole).abs() <= 15.0 * tol {
        halves + (halves - whole) / 15.0
    } else {
        simpson_recursive(f, a, mid, tol / 2.0, depth - 1)
            + simpson_recursive(f, mid, b, tol / 2.0, depth - 1)
    }
}

// 9. End-to-end determinism of the bench subcommand.
#[test]
fn criterion_9_bench_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_tsmc"))
            .args([
                "bench",
                "--problem",
                "hump",
                "--replications",
                "6",
                "--n-sigma",
                "512",
                "--n-max",
                "2000000",
                "--seed",
                "7",
                "--out",
            ])
            .arg(path)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let strip = |path: &std::path::Path| {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# time_"))
            .map(|l| {
                if l.starts_with('#') || l.starts_with("id,") {
                    l.to_string()
                } else {
                    // drop the trailing wall_time_s column
                    l.rsplit_once(',').unwrap().0.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let pass = strip(&a) == strip(&b);
    verdict(9, "bench CSV byte-identical modulo wall time", pass);
}
