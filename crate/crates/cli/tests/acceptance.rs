//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hybridcs::concentration::{alpha_beta, estimate_moment, run_smin_trials, tail_probability, TailBoundSpec};
use hybridcs::dictionary::{analyze, build_mub, build_random_dictionary, build_two_onb, DictionaryStats};
use hybridcs::matrix::ComplexMatrix;
use hybridcs::model::{choose_support_a, sample_instance, CoefficientSpec, HybridSupportSpec, SupportStrategy};
use hybridcs::recovery::{brute_force_l0, solve_bp, BpSolverConfig, RecoveryOutcome};
use hybridcs::rng::trial_rng;
use hybridcs::threshold::{default_gamma_grid, max_sparsity_search, SearchLimits};
use hybridcs::Dictionary;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn gram(d: &Dictionary) -> DMatrix<Complex64> {
    let m = d.matrix().as_dmatrix();
    m.adjoint() * m
}

fn spectral_norm_sq(m: &DMatrix<Complex64>) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    s.iter().fold(0.0f64, |a, &b| a.max(b)).powi(2)
}

fn criterion_1() -> Verdict {
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in [3usize, 5, 7, 11] {
        let d = build_mub::<f64>(p).unwrap();
        let stats = analyze(&d);
        let target = 1.0 / (p as f64).sqrt();
        worst.0 = worst.0.max((stats.mu - target).abs());
        worst.1 = worst.1.max(stats.mu_a.abs());
        worst.2 = worst.2.max((spectral_norm_sq(d.matrix().as_dmatrix()) - (p + 1) as f64).abs());
        let g = gram(&d);
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                if i != j {
                    let v = g[(i, j)].norm();
                    worst.3 = worst.3.max(v.min((v - target).abs()));
                }
            }
        }
    }
    verdict(
        worst.0 <= 1e-12 && worst.1 <= 1e-12 && worst.2 <= 1e-9 && worst.3 <= 1e-10,
        format!(
            "max |mu - 1/sqrt p| = {:.1e}, max mu_A = {:.1e}, max | ||D||^2 - (p+1) | = {:.1e}, max Gram deviation = {:.1e}",
            worst.0, worst.1, worst.2, worst.3
        ),
    )
}

fn criterion_2() -> Verdict {
    let mut rng = trial_rng(2, 0);
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let m = rng.random_range(4..=32usize);
        let n = rng.random_range(m..=4 * m);
        let d = build_random_dictionary::<f64>(m, n, 1000 + i).unwrap();
        let mu = analyze(&d).mu;
        let welch = ((n - m) as f64 / (m as f64 * (n - 1) as f64)).sqrt();
        worst = worst.min(mu - welch);
    }
    verdict(worst >= -1e-12, format!("min (mu - welch) over 100 dictionaries = {worst:.3e}"))
}

fn criterion_3() -> Verdict {
    let d = build_mub::<f64>(7).unwrap();
    let mu = 1.0 / 7f64.sqrt();
    let (mu_a, norm_a, norm_b) = (0.0, 1.0, 7f64.sqrt());
    let slack = 1e-9;
    let mut trials = 0;
    let mut violations = 0;
    for na in 1..=4usize {
        for nb in 1..=4usize {
            let run = run_smin_trials(
                &d,
                &SupportStrategy::RandomBaseline { seed: None },
                na,
                nb,
                625,
                1.0,
                30 + 10 * na as u64 + nb as u64,
            )
            .unwrap();
            for t in &run.trials {
                let r = &t.record;
                let max_bound = r.xi_a.max(r.xi_b) + r.xi_x;
                let sum_bound = r.xi_a + r.xi_b + r.xi_x;
                let ok = [
                    r.sigma_min * r.sigma_min >= 1.0 - r.xi_s - slack,
                    r.xi_s <= max_bound + slack,
                    r.xi_s <= sum_bound + slack,
                    r.xi_a <= (na - 1) as f64 * mu_a + slack,
                    r.row_norm_ab <= (mu * mu * na as f64).sqrt() + slack,
                    r.xi_x <= norm_a * norm_b + slack,
                ];
                violations += ok.iter().filter(|ok| !**ok).count();
                trials += 1;
            }
        }
    }
    verdict(violations == 0, format!("{trials} sub-dictionaries, {violations} violations"))
}

/// Random stats profile with conditions that bind inside `0..=50`.
fn random_profile(rng: &mut impl Rng) -> DictionaryStats<f64> {
    let m = rng.random_range(2_000..60_000usize);
    let na = rng.random_range(50..4 * m);
    let nb = rng.random_range(m.max(50)..8 * m);
    let mu = 10f64.powf(rng.random_range(-3.5..-1.8));
    let spec_a = rng.random_range(1.0..((na as f64 / m as f64).sqrt().max(1.0) + 0.5));
    let spec_b = (nb as f64 / m as f64).sqrt() * rng.random_range(1.0..1.3);
    DictionaryStats {
        m,
        n: na + nb,
        na,
        nb,
        mu,
        mu_a: mu * rng.random_range(0.0..1.0),
        mu_b: mu * rng.random_range(0.2..1.0),
        mu_a_defined: true,
        mu_b_defined: true,
        spec_a,
        spec_b,
        spec_d: (spec_a * spec_a + spec_b * spec_b).sqrt(),
        welch: 0.0,
        tight_dev_a: 0.0,
        tight_dev_b: 0.0,
    }
}

/// Direct transcription of the four block conditions.
fn feasible(st: &DictionaryStats<f64>, s: f64, gamma: f64, na: usize, nb: usize) -> bool {
    let ln_n = (st.n as f64).ln();
    let e = (-0.25f64).exp();
    let (naf, nbf, nbt) = (na as f64, nb as f64, st.nb as f64);
    let a = if na == 0 {
        0.0
    } else {
        6.0 * 2f64.sqrt() * (naf * st.mu * st.mu * s * ln_n).sqrt() + 2.0 * (naf - 1.0) * st.mu_a
    };
    let b = if nb == 0 {
        0.0
    } else {
        24.0 * (nbf * st.mu_b * st.mu_b * s * ln_n).sqrt()
            + 4.0 * nbf * st.spec_b * st.spec_b / nbt
            + 2.0 * (nbf / nbt).sqrt() * st.spec_a * st.spec_b
    };
    let total = naf + nbf;
    a <= (1.0 - gamma) * e
        && b <= gamma * e
        && total < 1.0 / (2.0 * st.mu * st.mu)
        && total <= 1.0 / (st.mu * st.mu * 8.0 * (s + 1.0) * ln_n)
}

fn criterion_4() -> Verdict {
    let mut worst_rel = 0.0f64;
    for s in [1.0f64, 2.0] {
        for n in [10usize, 100, 4160] {
            let u = (4.0 * s * (n as f64).ln()).sqrt();
            let spec = TailBoundSpec { alpha: 1.0, beta: 0.0, q1: 4.0, u, degenerate: false };
            let bound = tail_probability(u, &spec).unwrap().bound;
            let exact = (n as f64).powf(-s);
            worst_rel = worst_rel.max((bound - exact).abs() / exact);
        }
    }
    let mut rng = trial_rng(4, 0);
    let mut checked = 0;
    let mut worst_threshold = f64::NEG_INFINITY;
    for _ in 0..40 {
        let st = random_profile(&mut rng);
        let s = rng.random_range(1.0..3.0);
        for gamma in default_gamma_grid::<f64>() {
            for na in (0..=40).step_by(4) {
                for nb in (0..=40).step_by(4) {
                    let p = hybridcs::threshold::TheoremParams { s, gamma, na, nb };
                    let a = hybridcs::threshold::check_cond_a(st.mu, st.mu_a, st.n, &p);
                    let b = hybridcs::threshold::check_cond_b(st.mu_b, st.spec_a, st.spec_b, st.nb, st.n, &p);
                    if a.satisfied && b.satisfied {
                        let tb = alpha_beta(&st, na, nb, s).unwrap();
                        let u = (4.0 * s * (st.n as f64).ln()).sqrt();
                        let threshold = 0.25f64.exp() * (tb.alpha * u + tb.beta);
                        worst_threshold = worst_threshold.max(threshold);
                        checked += 1;
                    }
                }
            }
        }
    }
    verdict(
        worst_rel < 1e-14 && checked > 0 && worst_threshold <= 0.5 + 1e-12,
        format!(
            "max relative error of N^-s = {worst_rel:.2e}; {checked} passing configurations, max e^(1/4)(alpha u + beta) = {worst_threshold:.6}"
        ),
    )
}

/// `normalize(e_j + eps g_j)` with complex Gaussian `g_j`; `N = m`, the first `na` columns form A.
fn near_identity(m: usize, na: usize, eps: f64, seed: u64) -> Dictionary {
    let mut rng = trial_rng(seed, 0);
    let mut raw = DMatrix::<Complex64>::from_fn(m, m, |r, c| {
        let g = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * (eps / 2f64.sqrt());
        if r == c {
            g + 1.0
        } else {
            g
        }
    });
    for mut col in raw.column_iter_mut() {
        let n = col.norm();
        col.unscale_mut(n);
    }
    Dictionary::new(ComplexMatrix::from_dmatrix(raw).unwrap(), na).unwrap()
}

fn criterion_5() -> Verdict {
    // mu is about 2.4e-3: the block conditions admit a mixed optimum with nB > 0.
    let d = near_identity(256, 16, 5e-4, 5);
    let stats = analyze(&d);
    let s = 1.0;
    let search = max_sparsity_search(&stats, s, &default_gamma_grid(), None).unwrap();
    let (na, nb) = (search.best_na, search.best_nb);
    if na + nb == 0 {
        return verdict(false, format!("no admissible (nA, nB) for mu = {:.3e}", stats.mu));
    }
    let run = run_smin_trials(&d, &SupportStrategy::RandomBaseline { seed: None }, na, nb, 10_000, s, 55).unwrap();
    let sm = &run.summary;
    let bound = (stats.n as f64).powf(-s);
    verdict(
        sm.conditions_hold && sm.empirical_failure_rate <= bound,
        format!(
            "mu = {:.3e}, (nA, nB, gamma) = ({na}, {nb}, {}), failures {}/{} (rate {}) vs N^-s = {bound:.3e}, min sigma_min = {:.4}",
            stats.mu, search.best_gamma, sm.failures, sm.trials, sm.empirical_failure_rate, sm.min_sigma_min
        ),
    )
}

fn criterion_6() -> Verdict {
    let d = build_mub::<f64>(7).unwrap();
    let (na, nb) = (2usize, 3usize);
    // B is a union of seven orthonormal bases of C^7: mu_B = 1/sqrt 7, ||B||^2 = 7, Nb = 49.
    let (mu_b, b_sq, nb_total) = (1.0 / 7f64.sqrt(), 7.0, 49.0);
    let mut pass = true;
    let mut detail = Vec::new();
    for q in [4.0f64, 8.0] {
        let est = estimate_moment(&d, na, nb, q, 10_000, 6).unwrap();
        let bound = 6.0 * (mu_b * mu_b * nb as f64).sqrt() * q.sqrt() + 2.0 * nb as f64 * b_sq / nb_total;
        pass &= est.xi_b.ci_high <= bound && (est.xi_b.bound - bound).abs() < 1e-12;
        detail.push(format!("q = {q}: upper edge {:.4} <= bound {:.4}", est.xi_b.ci_high, bound));
    }
    verdict(pass, detail.join("; "))
}

fn criterion_7() -> Verdict {
    let mut rng = trial_rng(7, 0);
    let grid = default_gamma_grid::<f64>();
    let limits = SearchLimits { na_max: 50, nb_max: 50 };
    let (mut mismatches, mut nontrivial) = (0, 0);
    for _ in 0..20 {
        let st = random_profile(&mut rng);
        let s = rng.random_range(1.0..3.0);
        let search = max_sparsity_search(&st, s, &grid, Some(limits)).unwrap();
        let mut overall: Option<(usize, usize, f64)> = None;
        for (k, &gamma) in grid.iter().enumerate() {
            let mut best = (0usize, 0usize);
            for na in 0..=50 {
                for nb in 0..=50 {
                    if feasible(&st, s, gamma, na, nb) && (na + nb, na) > (best.0 + best.1, best.0) {
                        best = (na, nb);
                    }
                }
            }
            let got = search.per_gamma[k];
            if (got.na, got.nb) != best {
                mismatches += 1;
            }
            if overall.is_none_or(|(a, b, _)| (best.0 + best.1, best.0) > (a + b, a)) {
                overall = Some((best.0, best.1, gamma));
            }
        }
        let (a, b, g) = overall.unwrap();
        if (search.best_na, search.best_nb, search.best_gamma) != (a, b, g) {
            mismatches += 1;
        }
        if a + b > 0 {
            nontrivial += 1;
        }
    }
    verdict(
        mismatches == 0 && nontrivial >= 10,
        format!(
            "20 profiles x {} gamma values, {mismatches} mismatches, {nontrivial} profiles with a non-zero optimum",
            grid.len()
        ),
    )
}

fn criterion_8() -> Verdict {
    let d = build_two_onb::<f64>(8).unwrap();
    let cfg = BpSolverConfig::default();
    let coeff = CoefficientSpec::default();
    let mut rng = trial_rng(8, 0);
    let (mut sound, mut certified, mut agree) = (0, 0, 0);
    for t in 0..200u64 {
        let k = rng.random_range(1..=2usize);
        let na = rng.random_range(0..=k);
        let support_a = choose_support_a(&SupportStrategy::RandomBaseline { seed: None }, 8, na, &mut rng).unwrap();
        let spec = HybridSupportSpec { support_a, nb: k - na, seed: t };
        let inst = sample_instance(&d, &spec, &coeff, &mut rng).unwrap();
        let sol = solve_bp(d.matrix(), &inst.y, &cfg).unwrap();
        let l1_true: f64 = inst.x.iter().map(|z| z.norm()).sum();
        if sol.converged && sol.feasibility_residual <= 1e-8 && sol.l1_value <= l1_true + 1e-6 {
            sound += 1;
        }
        let outcome = RecoveryOutcome::evaluate(sol, &inst.x);
        let l0 = brute_force_l0(d.matrix(), &inst.y, 2, None).unwrap();
        if l0.is_unique() && l0.k_star == Some(k) && outcome.support_match {
            certified += 1;
            if l0.supports[0] == inst.support {
                agree += 1;
            }
        }
    }
    verdict(
        sound == 200 && certified > 0 && agree == certified,
        format!("sound {sound}/200; supports agree in {agree}/{certified} certified trials"),
    )
}

fn run_cli(args: &[&str]) -> bool {
    let status = Command::new(env!("CARGO_BIN_EXE_hybridcs"))
        .args(args)
        .stdout(std::process::Stdio::null())
        .status()
        .expect("spawn hybridcs");
    status.success()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let dict = tmp.path().join("d.dict.json");
    let dict_s = dict.to_str().unwrap();
    if !run_cli(&["build-dict", "--mub", "5", "-o", dict_s]) {
        return verdict(false, "build-dict failed");
    }
    let config = tmp.path().join("exp.json");
    std::fs::write(
        &config,
        r#"{"dictionary": {"kind": "file", "path": "d.dict.json"}, "masterSeed": 77, "s": 1.0, "strategies": ["first-n", "random"]}"#,
    )
    .unwrap();
    let cfg = config.to_str().unwrap();
    let experiments: [&[&str]; 7] = [
        &["smin", "--na", "2", "--nb", "2", "--trials", "500"],
        &["moments", "--na", "1", "--nb", "2", "--trials", "1000", "--q", "4", "--q", "6"],
        &["recover", "--na", "1", "--nb", "1", "--trials", "20"],
        &["recover", "--sweep", "--na-range", "0:2", "--nb-range", "0:2", "--trials", "4"],
        &["check", "--maximize"],
        &["report"],
        &["analyze"],
    ];
    let mut compared = 0;
    for (i, exp) in experiments.iter().enumerate() {
        let mut outputs = Vec::new();
        for (run, threads) in [(0, "1"), (1, "4")] {
            let out = tmp.path().join(format!("e{i}_{run}"));
            let mut args: Vec<&str> = exp.to_vec();
            let out_s = out.to_str().unwrap().to_owned();
            args.extend(["--config", cfg, "--threads", threads, "--out"]);
            args.push(&out_s);
            if !run_cli(&args) {
                return verdict(false, format!("{} failed", exp[0]));
            }
            outputs.push(dir_contents(&out));
        }
        if outputs[0] != outputs[1] || outputs[0].is_empty() {
            return verdict(false, format!("{} outputs differ between reruns", exp.join(" ")));
        }
        compared += outputs[0].len();
    }
    verdict(
        true,
        format!("{} experiments rerun with 1 and 4 threads, {compared} output files byte-identical", experiments.len()),
    )
}

/// Name, runtime limit in seconds, and the check itself.
type Criterion = (&'static str, u64, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 dictionary exactness", 5, criterion_1),
        ("2 Welch bound audit", 10, criterion_2),
        ("3 bound-chain inequalities", 120, criterion_3),
        ("4 tail-bound identity", 1, criterion_4),
        ("5 singular-value concentration", 120, criterion_5),
        ("6 moment bound", 120, criterion_6),
        ("7 condition-checker oracle", 30, criterion_7),
        ("8 solver soundness and l0 agreement", 120, criterion_8),
        ("9 determinism", 600, criterion_9),
    ];
    let only: Option<Vec<String>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').map(|t| t.trim().to_owned()).collect());
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let id = name.split(' ').next().unwrap_or_default();
        if only.as_ref().is_some_and(|ids| !ids.iter().any(|i| i == id)) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.2}s / {limit}s) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            v.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria passed");
}
