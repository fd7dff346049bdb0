use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use hybridcs::concentration::{moment_from_samples, run_smin_trials, sample_block_norms, MomentEstimate};
use hybridcs::dictionary::analyze as analyze_dictionary;
use hybridcs::io::save_dictionary;
use hybridcs::model::{CoefficientSpec, MagnitudeLaw};
use hybridcs::recovery::{run_recovery_sweep, run_recovery_trials, trials_to_csv, SweepSpec, SUCCESS_TOLERANCE};
use hybridcs::summary::{wilson_interval, Histogram};
use hybridcs::threshold::{
    check_theorem1, check_theorem2, classical_threshold, default_gamma_grid, max_sparsity_search, scaling_report,
    SearchLimits, SparsityThreshold, TheoremParams,
};
use hybridcs::{ConditionReport, Dictionary, DictionaryStats};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{DictionarySource, ExperimentConfig};
use crate::svg;
use crate::{AnalyzeArgs, BuildDictArgs, CheckArgs, Common, MomentsArgs, RecoverArgs, ReportArgs, SminArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONDITION_FAILED: u8 = 3;

const DEFAULT_OUT: &str = "results";

pub struct Ctx {
    pub cfg: ExperimentConfig,
    pub json: bool,
}

impl Ctx {
    fn dictionary(&self, common: &Common) -> anyhow::Result<(Dictionary, DictionarySource)> {
        let source = self.cfg.dictionary_source(common.dict.as_deref())?;
        let d = source.load().with_context(|| describe(&source))?;
        let d = match common.split.or(self.cfg.split) {
            Some(split) => d.with_split(split)?,
            None => d,
        };
        Ok((d, source))
    }

    fn seed(&self, common: &Common) -> u64 {
        common.seed.or(self.cfg.master_seed).unwrap_or(0)
    }

    fn trials(&self, common: &Common, default: usize) -> anyhow::Result<usize> {
        let trials = common.trials.or(self.cfg.trials).unwrap_or(default);
        if trials == 0 {
            bail!("trials must be >= 1");
        }
        Ok(trials)
    }

    fn out_dir(&self, common: &Common) -> anyhow::Result<PathBuf> {
        let dir =
            common.out.clone().or_else(|| self.cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    fn magnitude(&self, flag: Option<&str>) -> anyhow::Result<MagnitudeLaw> {
        match flag {
            Some(text) => Ok(text.parse()?),
            None => Ok(self.cfg.magnitude.unwrap_or_default()),
        }
    }
}

fn describe(source: &DictionarySource) -> String {
    match source {
        DictionarySource::File { path, .. } => format!("loading dictionary {}", path.display()),
        DictionarySource::Mub { p } => format!("building mub dictionary (p = {p})"),
        DictionarySource::TwoOnb { m } => format!("building two-ONB dictionary (m = {m})"),
        DictionarySource::Random { m, n, .. } => format!("building random dictionary ({m} x {n})"),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn pretty<S: Serialize>(value: &S) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn stats_table(stats: &DictionaryStats) -> String {
    let mut out = String::new();
    let mu_or_undefined = |defined: bool, v: f64| if defined { format!("{v:.8}") } else { "undefined".into() };
    let _ = writeln!(out, "m        {}", stats.m);
    let _ = writeln!(out, "N        {}", stats.n);
    let _ = writeln!(out, "Na       {}", stats.na);
    let _ = writeln!(out, "Nb       {}", stats.nb);
    let _ = writeln!(out, "mu       {:.8}", stats.mu);
    let _ = writeln!(out, "mu_A     {}", mu_or_undefined(stats.mu_a_defined, stats.mu_a));
    let _ = writeln!(out, "mu_B     {}", mu_or_undefined(stats.mu_b_defined, stats.mu_b));
    let _ = writeln!(out, "welch    {:.8}", stats.welch);
    let _ = writeln!(out, "||A||    {:.8}", stats.spec_a);
    let _ = writeln!(out, "||B||    {:.8}", stats.spec_b);
    let _ = writeln!(out, "||D||    {:.8}", stats.spec_d);
    out
}

fn threshold_value(t: SparsityThreshold<f64>) -> Value {
    match t {
        SparsityThreshold::Finite(v) => json!(v),
        SparsityThreshold::Unbounded => json!("unbounded"),
    }
}

pub fn build_dict(ctx: &Ctx, args: BuildDictArgs) -> anyhow::Result<u8> {
    let source = if let Some(p) = args.mub {
        DictionarySource::Mub { p }
    } else if let Some(m) = args.two_onb {
        DictionarySource::TwoOnb { m }
    } else if let Some(dims) = &args.random {
        DictionarySource::Random { m: dims[0], n: dims[1], seed: args.seed.or(ctx.cfg.master_seed).unwrap_or(0) }
    } else {
        match &ctx.cfg.dictionary {
            Some(src) => src.clone(),
            None => bail!("choose one of --mub, --two-onb or --random"),
        }
    };
    let d = source.load()?;
    let d = match args.split.or(ctx.cfg.split) {
        Some(split) => d.with_split(split)?,
        None => d,
    };
    if let Some(path) = &args.output {
        save_dictionary(&d, path).with_context(|| format!("writing {}", path.display()))?;
    }
    let stats = analyze_dictionary(&d);
    if ctx.json {
        print!("{}", pretty(&stats)?);
    } else {
        print!("{}", stats_table(&stats));
        if let Some(path) = &args.output {
            println!("wrote {}", path.display());
        }
    }
    Ok(EXIT_OK)
}

fn analysis_json(d: &Dictionary) -> Value {
    let stats = analyze_dictionary(d);
    json!({
        "stats": stats,
        "classicalThreshold": threshold_value(classical_threshold(stats.mu)),
        "scaling": scaling_report(&stats).ok(),
    })
}

pub fn analyze_cmd_text(d: &Dictionary) -> String {
    let stats = analyze_dictionary(d);
    let mut out = stats_table(&stats);
    match classical_threshold(stats.mu) {
        SparsityThreshold::Finite(v) => {
            let _ = writeln!(out, "classical threshold (1 + 1/mu)/2 = {v:.8}");
        }
        SparsityThreshold::Unbounded => {
            let _ = writeln!(out, "classical threshold: unbounded (mu = 0)");
        }
    }
    if let Ok(r) = scaling_report(&stats) {
        let _ = writeln!(
            out,
            "scaling  r1 = {:.6}  r2 = {:.6}  r3 = {:.6}  r4 = {:.6}  r5 = {:.6}",
            r.r1, r.r2, r.r3, r.r4, r.r5
        );
    }
    out
}

pub fn analyze(ctx: &Ctx, args: AnalyzeArgs) -> anyhow::Result<u8> {
    let (d, _) = ctx.dictionary(&args.common)?;
    let value = analysis_json(&d);
    if let Some(dir) = args.common.out.clone().or_else(|| ctx.cfg.output_dir.clone()) {
        std::fs::create_dir_all(&dir)?;
        write_file(&dir, "analyze.json", &pretty(&value)?)?;
    }
    if ctx.json {
        print!("{}", pretty(&value)?);
    } else {
        print!("{}", analyze_cmd_text(&d));
    }
    Ok(EXIT_OK)
}

fn all_satisfied(report: &ConditionReport) -> bool {
    report.conditions.iter().all(|c| c.satisfied)
}

pub fn check(ctx: &Ctx, args: CheckArgs) -> anyhow::Result<u8> {
    let (d, _) = ctx.dictionary(&args.common)?;
    let stats = analyze_dictionary(&d);
    let s = args.s.or(ctx.cfg.s).unwrap_or(1.0);
    let continuous = ctx.magnitude(args.magnitude.as_deref())?.is_continuous();

    if args.maximize {
        if args.theorem != 2 {
            bail!("--maximize searches the block conditions and needs --theorem 2");
        }
        let grid = ctx.cfg.gamma_grid.clone().unwrap_or_else(default_gamma_grid);
        let limits = SearchLimits { na_max: args.na_max.unwrap_or(stats.na), nb_max: args.nb_max.unwrap_or(stats.nb) };
        let mut search = max_sparsity_search(&stats, s, &grid, Some(limits))?;
        search.report.note_magnitude_law(continuous);
        let code = if all_satisfied(&search.report) { EXIT_OK } else { EXIT_CONDITION_FAILED };
        if let Some(dir) = args.common.out.clone().or_else(|| ctx.cfg.output_dir.clone()) {
            std::fs::create_dir_all(&dir)?;
            write_file(&dir, "check.json", &pretty(&search)?)?;
        }
        if ctx.json {
            print!("{}", pretty(&search)?);
        } else {
            println!("best: nA = {}, nB = {}, gamma = {} (s = {s})", search.best_na, search.best_nb, search.best_gamma);
            println!("{:>6} {:>6} {:>6}", "gamma", "nA", "nB");
            for g in &search.per_gamma {
                println!("{:>6.2} {:>6} {:>6}", g.gamma, g.na, g.nb);
            }
            print!("{}", search.report.table());
            for note in &search.report.notes {
                println!("note: {note}");
            }
        }
        return Ok(code);
    }

    let params = TheoremParams::new(
        s,
        args.gamma.or(ctx.cfg.gamma).unwrap_or(0.5),
        args.na.or(ctx.cfg.na).unwrap_or(0),
        args.nb.or(ctx.cfg.nb).unwrap_or(0),
    )?;
    let mut report =
        if args.theorem == 1 { check_theorem1(stats.mu, stats.n, &params) } else { check_theorem2(&stats, &params) }
            .context("refusing to evaluate the conditions")?;
    report.note_magnitude_law(continuous);
    let code = if all_satisfied(&report) { EXIT_OK } else { EXIT_CONDITION_FAILED };
    if let Some(dir) = args.common.out.clone().or_else(|| ctx.cfg.output_dir.clone()) {
        std::fs::create_dir_all(&dir)?;
        write_file(&dir, "check.json", &pretty(&report)?)?;
    }
    if ctx.json {
        print!("{}", pretty(&report)?);
    } else {
        print!("{}", report.table());
        for note in &report.notes {
            println!("note: {note}");
        }
        println!("{}", if code == EXIT_OK { "all conditions hold" } else { "some conditions fail" });
    }
    Ok(code)
}

pub fn smin(ctx: &Ctx, args: SminArgs) -> anyhow::Result<u8> {
    let (d, source) = ctx.dictionary(&args.common)?;
    let strategy = ctx.cfg.strategy(args.strategy.as_deref())?;
    let na = args.na.or(ctx.cfg.na).unwrap_or(1);
    let nb = args.nb.or(ctx.cfg.nb).unwrap_or(1);
    let s = args.s.or(ctx.cfg.s).unwrap_or(1.0);
    let trials = ctx.trials(&args.common, 1000)?;
    let seed = ctx.seed(&args.common);
    let dir = ctx.out_dir(&args.common)?;

    let result = run_smin_trials(&d, &strategy, na, nb, trials, s, seed)?;
    let mut flat = serde_json::to_value(&result.summary)?;
    if let Value::Object(map) = &mut flat {
        map.insert("dictionary".into(), serde_json::to_value(&source)?);
    }
    write_file(&dir, "smin.csv", &result.to_csv())?;
    write_file(&dir, "smin.json", &pretty(&flat)?)?;
    let h: &Histogram = &result.summary.histogram;
    let plot = svg::histogram(
        &format!("smallest singular value, nA = {na}, nB = {nb}, {trials} trials"),
        "sigma_min",
        &h.bin_edges(),
        &h.counts,
        Some((std::f64::consts::FRAC_1_SQRT_2, "1/sqrt(2)")),
    );
    write_file(&dir, "smin.svg", &plot)?;

    let sm = &result.summary;
    if ctx.json {
        print!("{}", pretty(&flat)?);
    } else {
        println!("trials                 {}", sm.trials);
        println!("failures (<= 1/sqrt2)  {} ({:.6})", sm.failures, sm.empirical_failure_rate);
        println!("lemma bound N^-s       {:.6e}", sm.lemma1_bound);
        println!("conditions hold        {}", sm.conditions_hold);
        println!("min sigma_min          {:.6}", sm.min_sigma_min);
        println!("chain violations       {}", sm.chain_violations);
        println!("wrote {}", dir.display());
    }
    Ok(EXIT_OK)
}

pub fn moments(ctx: &Ctx, args: MomentsArgs) -> anyhow::Result<u8> {
    let (d, source) = ctx.dictionary(&args.common)?;
    let na = args.na.or(ctx.cfg.na).unwrap_or(1);
    let nb = args.nb.or(ctx.cfg.nb).unwrap_or(1);
    let trials = ctx.trials(&args.common, 10_000)?;
    let seed = ctx.seed(&args.common);
    let qs: Vec<f64> =
        if !args.q.is_empty() { args.q.clone() } else { ctx.cfg.q.clone().unwrap_or_else(|| vec![4.0, 8.0]) };
    let stats = analyze_dictionary(&d);
    let samples = sample_block_norms(&d, na, nb, trials, seed)?;
    let estimates: Vec<MomentEstimate> =
        qs.iter().map(|&q| moment_from_samples(&stats, &samples, na, nb, q, seed)).collect::<hybridcs::Result<_>>()?;
    let dir = ctx.out_dir(&args.common)?;

    let mut csv = String::from("trialIndex,xiB,xiX\n");
    for s in &samples {
        let _ = writeln!(csv, "{},{},{}", s.trial, s.xi_b, s.xi_x);
    }
    let summary = json!({ "dictionary": source, "stats": stats, "estimates": estimates });
    write_file(&dir, "moments.csv", &csv)?;
    write_file(&dir, "moments.json", &pretty(&summary)?)?;
    let groups: Vec<svg::BarGroup> = estimates
        .iter()
        .flat_map(|e| {
            [("xi_B", e.xi_b), ("xi_X", e.xi_x)].map(|(name, side)| svg::BarGroup {
                label: format!("{name} q={}", e.q),
                values: vec![side.estimate, side.ci_high, side.bound],
            })
        })
        .collect();
    let plot = svg::grouped_bars(
        &format!("moment estimates vs bounds, nA = {na}, nB = {nb}"),
        "[E xi^q]^(1/q)",
        &["estimate".into(), "upper 95% edge".into(), "bound".into()],
        &groups,
    );
    write_file(&dir, "moments.svg", &plot)?;

    if ctx.json {
        print!("{}", pretty(&summary)?);
    } else {
        println!("{:>6} {:>6} {:>14} {:>14} {:>14}", "q", "block", "estimate", "upper edge", "bound");
        for e in &estimates {
            for (name, side) in [("xi_B", e.xi_b), ("xi_X", e.xi_x)] {
                println!("{:>6} {:>6} {:>14.6} {:>14.6} {:>14.6}", e.q, name, side.estimate, side.ci_high, side.bound);
            }
        }
        println!("wrote {}", dir.display());
    }
    Ok(EXIT_OK)
}

pub fn recover(ctx: &Ctx, args: RecoverArgs) -> anyhow::Result<u8> {
    let (d, source) = ctx.dictionary(&args.common)?;
    let coeff = CoefficientSpec { magnitude: ctx.magnitude(args.magnitude.as_deref())? };
    let mut solver = ctx.cfg.solver.unwrap_or_default();
    if let Some(it) = args.max_iterations {
        solver.max_iterations = Some(it);
    }
    if let Some(tol) = args.tolerance {
        solver.primal_tolerance = Some(tol);
        solver.dual_tolerance = Some(tol);
    }
    let cfg = solver.resolve();
    let seed = ctx.seed(&args.common);
    let strategies = ctx.cfg.strategies(&args.strategy)?;

    if args.sweep {
        return recover_sweep(ctx, &args, &d, source, strategies, coeff, cfg, seed);
    }

    let strategy = match args.strategy.first() {
        Some(text) => text.parse()?,
        None => ctx.cfg.strategy(None)?,
    };
    let na = args.na.or(ctx.cfg.na).unwrap_or(1);
    let nb = args.nb.or(ctx.cfg.nb).unwrap_or(1);
    let trials = ctx.trials(&args.common, 100)?;
    let dir = ctx.out_dir(&args.common)?;
    let results = run_recovery_trials(&d, &strategy, na, nb, trials, &coeff, &cfg, seed)?;

    let successes = results.iter().filter(|t| t.outcome.success).count();
    let converged = results.iter().filter(|t| t.outcome.converged).count();
    let support_matches = results.iter().filter(|t| t.outcome.support_match).count();
    let (ci_low, ci_high) = wilson_interval(successes, trials);
    let summary = json!({
        "dictionary": source,
        "na": na,
        "nb": nb,
        "strategy": strategy.label(),
        "magnitude": coeff.magnitude,
        "solver": cfg,
        "trials": trials,
        "masterSeed": seed,
        "successTolerance": SUCCESS_TOLERANCE,
        "successes": successes,
        "rate": successes as f64 / trials as f64,
        "ciLow": ci_low,
        "ciHigh": ci_high,
        "converged": converged,
        "supportMatches": support_matches,
    });
    write_file(&dir, "recover.csv", &trials_to_csv(&results))?;
    write_file(&dir, "recover.json", &pretty(&summary)?)?;
    let log_errors = results.iter().map(|t| t.outcome.relative_l2_error.max(1e-16).log10());
    let hist = Histogram::new(log_errors, -16.0, 1.0, 17);
    let plot = svg::histogram(
        &format!("relative error, nA = {na}, nB = {nb}, {trials} trials"),
        "log10 relative l2 error",
        &hist.bin_edges(),
        &hist.counts,
        Some((SUCCESS_TOLERANCE.log10(), "success threshold")),
    );
    write_file(&dir, "recover.svg", &plot)?;

    if ctx.json {
        print!("{}", pretty(&summary)?);
    } else {
        println!(
            "success {successes}/{trials} (rate {:.4}, 95% CI [{ci_low:.4}, {ci_high:.4}]), converged {converged}",
            successes as f64 / trials as f64
        );
        println!("wrote {}", dir.display());
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn recover_sweep(
    ctx: &Ctx,
    args: &RecoverArgs,
    d: &Dictionary,
    source: DictionarySource,
    strategies: Vec<hybridcs::model::SupportStrategy>,
    coeff: CoefficientSpec,
    cfg: hybridcs::BpSolverConfig,
    seed: u64,
) -> anyhow::Result<u8> {
    let [na_lo, na_hi] = args.na_range.or(ctx.cfg.na_range).unwrap_or([0, d.na().min(4)]);
    let [nb_lo, nb_hi] = args.nb_range.or(ctx.cfg.nb_range).unwrap_or([0, d.nb().min(4)]);
    let spec = SweepSpec {
        na_range: na_lo..=na_hi,
        nb_range: nb_lo..=nb_hi,
        trials_per_cell: ctx.trials(&args.common, 20)?,
        strategies,
        master_seed: seed,
    };
    let dir = ctx.out_dir(&args.common)?;
    let grid = run_recovery_sweep(d, &spec, &coeff, &cfg)?;
    let labels = grid.strategies();
    let totals: Vec<Value> =
        labels.iter().map(|l| json!({ "strategy": l, "byTotal": grid.rate_by_total(l) })).collect();
    let summary = json!({
        "dictionary": source,
        "magnitude": coeff.magnitude,
        "solver": cfg,
        "sweep": spec,
        "successTolerance": SUCCESS_TOLERANCE,
        "grid": grid,
        "totals": totals,
    });
    write_file(&dir, "sweep.csv", &grid.to_csv())?;
    write_file(&dir, "sweep.json", &pretty(&summary)?)?;

    let series: Vec<svg::Series> = labels
        .iter()
        .map(|l| svg::Series {
            name: l.clone(),
            points: grid.rate_by_total(l).iter().map(|t| (t.total as f64, t.rate)).collect(),
        })
        .collect();
    let curves = svg::rate_curves("recovery success rate", "nA + nB", "success rate", &series, 1.0);
    write_file(&dir, "sweep.svg", &curves)?;
    let xs: Vec<usize> = (na_lo..=na_hi).collect();
    let ys: Vec<usize> = (nb_lo..=nb_hi).collect();
    for (i, label) in labels.iter().enumerate() {
        let values: Vec<Vec<f64>> = xs
            .iter()
            .map(|&na| ys.iter().map(|&nb| grid.cell(label, na, nb).map_or(0.0, |c| c.rate)).collect())
            .collect();
        let map = svg::heatmap(&format!("success rate ({label})"), "nA", "nB", &xs, &ys, &values);
        write_file(&dir, &format!("sweep_heatmap_{i}.svg"), &map)?;
    }

    if ctx.json {
        print!("{}", pretty(&summary)?);
    } else {
        for l in &labels {
            println!("{l}");
            for t in grid.rate_by_total(l) {
                println!("  nA + nB = {:>3}  rate {:.4}  [{:.4}, {:.4}]", t.total, t.rate, t.ci_low, t.ci_high);
            }
        }
        println!("wrote {}", dir.display());
    }
    Ok(EXIT_OK)
}

/// Largest `nA + nB` passing the single-block conditions, scanning upward.
fn theorem1_max_total(stats: &DictionaryStats, s: f64) -> anyhow::Result<usize> {
    let mut best = 0;
    for t in 1..=stats.n {
        let params = TheoremParams::new(s, 0.5, t, 0)?;
        if !all_satisfied(&check_theorem1(stats.mu, stats.n, &params)?) {
            break;
        }
        best = t;
    }
    Ok(best)
}

pub fn report(ctx: &Ctx, args: ReportArgs) -> anyhow::Result<u8> {
    let (d, source) = ctx.dictionary(&args.common)?;
    let s = args.s.or(ctx.cfg.s).unwrap_or(1.0);
    let stats = analyze_dictionary(&d);
    let dir = ctx.out_dir(&args.common)?;
    let grid = ctx.cfg.gamma_grid.clone().unwrap_or_else(default_gamma_grid);
    let search = max_sparsity_search(&stats, s, &grid, None)?;
    let t1 = theorem1_max_total(&stats, s)?;
    let value = json!({
        "dictionary": source,
        "s": s,
        "analysis": analysis_json(&d),
        "theorem1MaxTotal": t1,
        "theorem2Search": search,
    });
    write_file(&dir, "report.json", &pretty(&value)?)?;

    let mut md = String::from("# Dictionary report\n\n```\n");
    md.push_str(&analyze_cmd_text(&d));
    md.push_str("```\n\n");
    let _ = writeln!(md, "Sparsity level s = {s}.\n");
    let _ = writeln!(md, "Largest total sparsity under the single-block conditions: {t1}.\n");
    let _ = writeln!(
        md,
        "Largest (nA, nB) under the block conditions: ({}, {}) at gamma = {}.\n",
        search.best_na, search.best_nb, search.best_gamma
    );
    md.push_str("| gamma | nA | nB |\n|---:|---:|---:|\n");
    for g in &search.per_gamma {
        let _ = writeln!(md, "| {:.2} | {} | {} |", g.gamma, g.na, g.nb);
    }
    md.push_str("\n```\n");
    md.push_str(&search.report.table());
    md.push_str("```\n");
    write_file(&dir, "report.md", &md)?;

    let top = search.per_gamma.iter().map(|g| (g.na + g.nb) as f64).fold(1.0, f64::max);
    let series = vec![
        svg::Series { name: "nA".into(), points: search.per_gamma.iter().map(|g| (g.gamma, g.na as f64)).collect() },
        svg::Series { name: "nB".into(), points: search.per_gamma.iter().map(|g| (g.gamma, g.nb as f64)).collect() },
        svg::Series {
            name: "nA + nB".into(),
            points: search.per_gamma.iter().map(|g| (g.gamma, (g.na + g.nb) as f64)).collect(),
        },
    ];
    let plot = svg::rate_curves("admissible sparsity vs gamma", "gamma", "sparsity", &series, top);
    write_file(&dir, "report.svg", &plot)?;

    if ctx.json {
        print!("{}", pretty(&value)?);
    } else {
        print!("{md}");
        println!("wrote {}", dir.display());
    }
    Ok(EXIT_OK)
}
