use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use weakkam_core::rate::conjugate_by_search;
use weakkam_core::sim::{self, simulate_tilted_indexed, simulate_walk_indexed, McEstimate};
use weakkam_core::weak_kam::{default_velocity_bound, lax_oleinik_fixed_point_with, DEFAULT_VELOCITY_SAMPLES};
use weakkam_core::{
    cumulant_h, deviation_function, empirical_ldp, entropy, feynman_kac, feynman_kac_exact, lax_oleinik_apply,
    legendre_l, momentum_profile, optimal_tilt, perron_solve, restrict_potential, stationary_measure,
    weak_kam_minus, weak_kam_plus, Direction, FineGrid, Potential, TiltSchedule, DEFAULT_MAX_ITERS,
};

use crate::config::{self, default_tolerances, load_config, parse_k_list, RunConfig};
use crate::convergence::{run_convergence, strictly_decreasing};
use crate::error::{CliError, CliResult};
use crate::output::{real, write_csv, write_json, Csv};

pub const THREADS_ENV: &str = "WEAKKAM_THREADS";
/// Largest `|L − H*|` accepted by `duality-check`.
pub const DUALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "weakkam", version, about = "Speed-k random walks on the circle, their Gibbs measures and weak KAM limits")]
pub struct Cli {
    /// `key = value` run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed (overrides `seed`)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to WEAKKAM_THREADS, then to all cores
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Add wall-clock columns to the convergence table (outputs are then no
    /// longer reproducible byte for byte)
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Perron eigen-data, Gibbs stationary measure and entropy for each k
    Perron(PerronArgs),
    /// Closed-form weak KAM solutions and the deviation function
    Weakkam(WeakKamArgs),
    /// Tabulate L(v), the optimal tilt and H at that tilt
    Rate(RateArgs),
    /// Check L = H* on v in [-5, 5] against a numerical conjugate
    DualityCheck,
    /// Simulate free or tilted walks and write their jump paths
    Simulate(SimulateArgs),
    /// Feynman-Kac Monte Carlo against the dense oracle and value iteration
    FkCheck(FkArgs),
    /// Empirical LDP on an interval against -min I^V
    LdpCheck(LdpArgs),
    /// Relative entropy of the Gibbs chain for each k
    Entropy(KListArgs),
    /// Full convergence table over k_list
    Convergence,
}

#[derive(Debug, Args)]
pub struct PotentialArg {
    /// Potential, e.g. `cos(1)`, `bump(0.3,0.1,2)`, `const(0.5)`, `zero`, `table:<file>`
    #[arg(long)]
    pub potential: Option<String>,
}

#[derive(Debug, Args)]
pub struct PerronArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    /// Lattice size (defaults to every k in k_list)
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct WeakKamArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    /// Grid resolution (defaults to n_grid)
    #[arg(long)]
    pub n: Option<usize>,
    /// Also run Lax-Oleinik value iteration and report its distance to u+
    #[arg(long)]
    pub fixed_point: bool,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub v_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub v_max: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// Horizon (defaults to T)
    #[arg(long = "T", alias = "horizon")]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Number of paths
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// `const:<λ>`, `slope:<v>` (the optimal tilt of a line) or
    /// `poly:<t>:<λ>,<t>:<λ>,...` (piecewise linear, from t = 0 to T)
    #[arg(long, allow_hyphen_values = true)]
    pub tilt: Option<String>,
}

#[derive(Debug, Args)]
pub struct FkArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long = "T", alias = "horizon")]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Sample count (defaults to n_samples)
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KListArgs {
    #[command(flatten)]
    pub potential: PotentialArg,
    /// Comma-separated increasing lattice sizes (defaults to k_list)
    #[arg(long)]
    pub k_list: Option<String>,
}

#[derive(Debug, Args)]
pub struct LdpArgs {
    #[command(flatten)]
    pub list: KListArgs,
    /// `a,b` with 0 <= a < b < 1
    #[arg(long, default_value = "0.4,0.6")]
    pub interval: String,
}

/// Global options merged with the optional config file.
struct Context {
    cfg: Option<RunConfig>,
    out: PathBuf,
    seed: Option<u64>,
    timings: bool,
}

impl Context {
    fn potential(&self, arg: &PotentialArg) -> CliResult<Potential<f64>> {
        let spec = arg
            .potential
            .clone()
            .or_else(|| self.cfg.as_ref().map(|c| c.potential.clone()))
            .ok_or_else(|| CliError::Usage("no potential given (use --potential or a config file)".into()))?;
        Potential::parse(&spec).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Usage("a seed is required (use --seed or a config file)".into()))
    }

    fn k_list(&self, flag: Option<&str>) -> CliResult<Vec<usize>> {
        match flag {
            Some(s) => parse_k_list(s).map_err(CliError::Usage),
            None => self
                .cfg
                .as_ref()
                .map(|c| c.k_list.clone())
                .ok_or_else(|| CliError::Usage("no k list given (use --k-list or a config file)".into())),
        }
    }

    fn single_k(&self, flag: Option<usize>) -> CliResult<usize> {
        flag.or_else(|| self.cfg.as_ref().map(|c| c.k_list[0]))
            .ok_or_else(|| CliError::Usage("no k given (use --k or a config file)".into()))
    }

    fn horizon(&self, flag: Option<f64>) -> f64 {
        flag.or_else(|| self.cfg.as_ref().map(|c| c.horizon))
            .unwrap_or(config::DEFAULT_HORIZON)
    }

    fn n_grid(&self) -> usize {
        self.cfg.as_ref().map_or(config::DEFAULT_N_GRID, |c| c.n_grid)
    }

    fn n_samples(&self) -> usize {
        self.cfg.as_ref().map_or(config::DEFAULT_N_SAMPLES, |c| c.n_samples)
    }

    fn tolerance(&self, name: &str) -> f64 {
        self.cfg
            .as_ref()
            .map_or_else(|| default_tolerances()[name], |c| c.tolerance(name))
    }
}

fn configure_threads(flag: Option<usize>) -> CliResult<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be an integer, got `{s}`")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs one invocation; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    let cfg = cli.config.as_deref().map(load_config).transpose()?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().map(|c| c.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(config::DEFAULT_OUT_DIR));
    let seed = cli.seed.or_else(|| cfg.as_ref().map(|c| c.seed));
    let ctx = Context {
        cfg,
        out,
        seed,
        timings: cli.timings,
    };
    match &cli.command {
        Command::Perron(a) => perron(&ctx, a),
        Command::Weakkam(a) => weakkam(&ctx, a),
        Command::Rate(a) => rate(&ctx, a),
        Command::DualityCheck => duality_check(&ctx),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::FkCheck(a) => fk_check(&ctx, a),
        Command::LdpCheck(a) => ldp_check(&ctx, a),
        Command::Entropy(a) => entropy_table(&ctx, a),
        Command::Convergence => convergence(&ctx),
    }
}

fn perron(ctx: &Context, args: &PerronArgs) -> CliResult<()> {
    let v = ctx.potential(&args.potential)?;
    let ks = match args.k {
        Some(k) => vec![k],
        None => ctx.k_list(None)?,
    };
    let tol = ctx.tolerance("perron");
    let mut summary = Vec::new();
    for k in ks {
        let pd = perron_solve(k, &v, tol, DEFAULT_MAX_ITERS)?;
        let sm = stationary_measure(&pd)?;
        let h = entropy(&pd, &sm, k, &v)?;
        let vk = restrict_potential(&v, k)?;
        let mut csv = Csv::new(&["site", "x", "V", "u", "mu", "pi"]);
        for j in 0..k {
            csv.row(&[
                j.to_string(),
                real(j as f64 / k as f64),
                real(vk[j]),
                real(pd.u()[j]),
                real(pd.mu()[j]),
                real(sm.pi()[j]),
            ]);
        }
        write_csv(&ctx.out, &format!("perron_k{k}.csv"), &csv)?;
        println!("k = {k}: lambda/k = {:.12}, residual = {:.3e}", pd.lambda() / k as f64, pd.residual());
        summary.push(json!({
            "k": k,
            "lambda": pd.lambda(),
            "lambda_over_k": pd.lambda() / k as f64,
            "residual": pd.residual(),
            "iterations": pd.iterations(),
            "stationarity_residual": sm.stationarity_residual(),
            "entropy": h,
        }));
    }
    write_json(&ctx.out, "perron.json", &json!({ "potential": v.id(), "results": summary }))?;
    Ok(())
}

fn weakkam(ctx: &Context, args: &WeakKamArgs) -> CliResult<()> {
    let v = ctx.potential(&args.potential)?;
    let n = args.n.unwrap_or_else(|| ctx.n_grid());
    let g = momentum_profile(&v, n)?;
    let minus = weak_kam_minus(&v, n)?;
    let plus = weak_kam_plus(&v, n)?;
    let dev = deviation_function(&v, n)?;
    let fixed = if args.fixed_point {
        Some(lax_oleinik_fixed_point_with(
            &v,
            n,
            ctx.tolerance("lax_oleinik"),
            default_velocity_bound(&v),
            DEFAULT_VELOCITY_SAMPLES,
            weakkam_core::weak_kam::DEFAULT_MAX_SWEEPS,
        )?)
    } else {
        None
    };
    let mut header = vec!["x", "g", "u_minus", "u_plus", "deviation"];
    if fixed.is_some() {
        header.push("u_plus_value_iteration");
    }
    // −(forward fixed point), re-centred to min 0, is comparable with u_plus
    let dp = fixed.as_ref().map(|fp| {
        let neg: Vec<f64> = fp.values.values().iter().map(|x| -x).collect();
        let floor = neg.iter().copied().fold(f64::INFINITY, f64::min);
        neg.into_iter().map(|x| x - floor).collect::<Vec<_>>()
    });
    let mut csv = Csv::new(&header);
    for i in 0..n {
        let mut row = vec![
            real(i as f64 / n as f64),
            real(g.values()[i]),
            real(minus.values().values()[i]),
            real(plus.values().values()[i]),
            real(dev.values().values()[i]),
        ];
        if let Some(dp) = &dp {
            row.push(real(dp[i]));
        }
        csv.row(&row);
    }
    write_csv(&ctx.out, "weakkam.csv", &csv)?;
    let hj = minus.hj_residual(&v, 5)?;
    let mut summary = json!({
        "potential": v.id(),
        "n": n,
        "critical_value": minus.critical_value(),
        "static_point": minus.static_point(),
        "kinks": minus.kink_locations(),
        "hj_residual": hj,
    });
    if let (Some(fp), Some(dp)) = (&fixed, &dp) {
        let plus_min = plus.values().min();
        let gap = dp
            .iter()
            .zip(plus.values().values())
            .fold(0.0f64, |m, (a, b)| m.max((a - (b - plus_min)).abs()));
        summary["value_iteration"] = json!({
            "c_estimate": fp.c_estimate,
            "sweeps": fp.sweeps,
            "sup_gap_to_u_plus": gap,
            "clipped": fp.clipped,
        });
    }
    write_json(&ctx.out, "weakkam.json", &summary)?;
    println!("c = {}, HJ residual = {hj:.3e}", minus.critical_value());
    Ok(())
}

fn rate(ctx: &Context, args: &RateArgs) -> CliResult<()> {
    if args.steps == 0 || !(args.v_max > args.v_min) {
        return Err(CliError::Usage("rate needs v_min < v_max and steps >= 1".into()));
    }
    let mut csv = Csv::new(&["v", "legendre_L", "optimal_tilt", "H_at_tilt"]);
    for i in 0..=args.steps {
        let v = args.v_min + (args.v_max - args.v_min) * i as f64 / args.steps as f64;
        let tilt = optimal_tilt(v);
        csv.row(&[real(v), real(legendre_l(v)), real(tilt), real(cumulant_h(tilt)?)]);
    }
    write_csv(&ctx.out, "rate.csv", &csv)?;
    Ok(())
}

/// `sup_λ (λ v − H(λ))` by grid scan plus golden section.
pub fn numerical_conjugate_of_h(v: f64) -> f64 {
    conjugate_by_search(v, -10.0, 10.0, 2001, |l| cumulant_h(l).unwrap_or(f64::INFINITY))
}

fn duality_check(ctx: &Context) -> CliResult<()> {
    let mut csv = Csv::new(&["v", "legendre_L", "conjugate_of_H", "gap"]);
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let v = -5.0 + 0.1 * i as f64;
        let l = legendre_l(v);
        let dual = numerical_conjugate_of_h(v);
        let gap = (l - dual).abs();
        worst = worst.max(gap);
        csv.row(&[real(v), real(l), real(dual), real(gap)]);
    }
    write_csv(&ctx.out, "duality.csv", &csv)?;
    let passed = worst <= DUALITY_TOLERANCE;
    write_json(
        &ctx.out,
        "duality.json",
        &json!({ "max_gap": worst, "tolerance": DUALITY_TOLERANCE, "passed": passed }),
    )?;
    println!("max |L - H*| = {worst:.3e}");
    if passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("duality gap {worst:e} exceeds {DUALITY_TOLERANCE:e}")))
    }
}

/// Parses the `--tilt` grammar of `simulate`.
pub fn parse_tilt(spec: &str, horizon: f64) -> CliResult<TiltSchedule<f64>> {
    let bad = |m: &str| CliError::Usage(format!("bad tilt `{spec}`: {m}"));
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("expected `<kind>:<args>`"))?;
    let schedule = match kind.trim() {
        "const" => TiltSchedule::constant(number(rest)?, horizon),
        "slope" => TiltSchedule::constant(optimal_tilt(number(rest)?), horizon),
        "poly" => {
            let mut times = Vec::new();
            let mut values = Vec::new();
            for pair in rest.split(',') {
                let (t, l) = pair.split_once(':').ok_or_else(|| bad("expected `<t>:<λ>` pairs"))?;
                times.push(number(t)?);
                values.push(number(l)?);
            }
            TiltSchedule::polygonal(times, values)
        }
        other => return Err(bad(&format!("unknown kind `{other}`"))),
    };
    schedule.map_err(|e| bad(&e.to_string()))
}

fn simulate(ctx: &Context, args: &SimulateArgs) -> CliResult<()> {
    let k = ctx.single_k(args.k)?;
    let horizon = ctx.horizon(args.horizon);
    let seed = ctx.seed()?;
    let tilt = args.tilt.as_deref().map(|s| parse_tilt(s, horizon)).transpose()?;
    let mut csv = Csv::new(&["path", "time", "state"]);
    #[derive(Serialize)]
    struct PathSummary {
        path: usize,
        jumps: usize,
        net_steps: i64,
        terminal_state: usize,
    }
    let mut paths = Vec::with_capacity(args.n);
    for i in 0..args.n {
        let p = match &tilt {
            Some(l) => simulate_tilted_indexed(k, horizon, args.x0, l, seed, i as u64)?,
            None => simulate_walk_indexed(k, horizon, args.x0, seed, i as u64)?,
        };
        csv.row(&[i.to_string(), real(0.0), p.start_state().to_string()]);
        for (t, s) in p.jump_times().iter().zip(&p.states()[1..]) {
            csv.row(&[i.to_string(), real(*t), s.to_string()]);
        }
        paths.push(PathSummary {
            path: i,
            jumps: p.n_jumps(),
            net_steps: p.net_steps(),
            terminal_state: p.terminal_state(),
        });
    }
    write_csv(&ctx.out, "paths.csv", &csv)?;
    write_json(
        &ctx.out,
        "simulate.json",
        &json!({
            "k": k, "T": horizon, "x0": args.x0, "seed": seed, "tilt": args.tilt, "paths": paths,
        }),
    )?;
    Ok(())
}

fn fk_check(ctx: &Context, args: &FkArgs) -> CliResult<()> {
    let v = ctx.potential(&args.potential)?;
    let k = ctx.single_k(args.k)?;
    let horizon = ctx.horizon(args.horizon);
    let n = args.n.unwrap_or_else(|| ctx.n_samples());
    let seed = ctx.seed()?;
    let n_grid = ctx.n_grid();
    let zero = FineGrid::constant(n_grid, 0.0)?;
    let mc: McEstimate = feynman_kac(k, horizon, args.x0, &v, &zero, n, seed)?;
    let exact = if k <= sim::EXACT_ORACLE_MAX_K {
        Some(feynman_kac_exact(k, horizon, args.x0, &v, &zero)?)
    } else {
        None
    };
    let lo = lax_oleinik_apply(&zero, horizon, Direction::Plus, &v, default_velocity_bound(&v), DEFAULT_VELOCITY_SAMPLES)?;
    let lo_value = lo.values.eval(args.x0);
    let mut csv = Csv::new(&["method", "value", "std_error"]);
    csv.row(&["monte_carlo".into(), real(mc.value), real(mc.std_error)]);
    if let Some(e) = exact {
        csv.row(&["matrix_exponential".into(), real(e), real(0.0)]);
    }
    csv.row(&["lax_oleinik".into(), real(lo_value), real(0.0)]);
    write_csv(&ctx.out, "fk.csv", &csv)?;
    let z = exact.map(|e| if mc.std_error > 0.0 { (mc.value - e) / mc.std_error } else if mc.value == e { 0.0 } else { f64::INFINITY });
    let passed = z.is_none_or(|z| z.abs() <= 3.0);
    write_json(
        &ctx.out,
        "fk.json",
        &json!({
            "potential": v.id(), "k": k, "T": horizon, "x0": args.x0, "n_samples": n, "seed": seed,
            "monte_carlo": mc.value, "std_error": mc.std_error, "matrix_exponential": exact,
            "lax_oleinik": lo_value, "z_score": z, "passed": passed,
        }),
    )?;
    println!("Monte Carlo {:.6} ± {:.2e}, exact {exact:?}, Lax-Oleinik {lo_value:.6}", mc.value, mc.std_error);
    if passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed(format!("Monte Carlo is {:.2} standard errors from the exact value", z.unwrap_or(0.0))))
    }
}

fn parse_interval(s: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("bad interval `{s}`, expected `a,b`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn ldp_check(ctx: &Context, args: &LdpArgs) -> CliResult<()> {
    let v = ctx.potential(&args.list.potential)?;
    let ks = ctx.k_list(args.list.k_list.as_deref())?;
    let (a, b) = parse_interval(&args.interval)?;
    let dev = deviation_function(&v, ctx.n_grid())?;
    let limit = -dev.min_over(a, b);
    let mut csv = Csv::new(&["k", "empirical", "limit", "gap"]);
    let mut gaps = Vec::new();
    for k in &ks {
        let emp = empirical_ldp(*k, &v, a, b)?;
        let gap = (emp - limit).abs();
        gaps.push(gap);
        csv.row(&[k.to_string(), real(emp), real(limit), real(gap)]);
    }
    write_csv(&ctx.out, "ldp.csv", &csv)?;
    let passed = strictly_decreasing(&gaps);
    write_json(
        &ctx.out,
        "ldp.json",
        &json!({ "potential": v.id(), "interval": [a, b], "k": ks, "gap": gaps, "limit": limit, "monotone": passed }),
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::CheckFailed("LDP gap does not shrink monotonically".into()))
    }
}

fn entropy_table(ctx: &Context, args: &KListArgs) -> CliResult<()> {
    let v = ctx.potential(&args.potential)?;
    let ks = ctx.k_list(args.k_list.as_deref())?;
    let tol = ctx.tolerance("perron");
    let mut csv = Csv::new(&["k", "entropy", "entropy_over_k"]);
    let mut rows = Vec::new();
    for k in ks {
        let pd = perron_solve(k, &v, tol, DEFAULT_MAX_ITERS)?;
        let sm = stationary_measure(&pd)?;
        let h = entropy(&pd, &sm, k, &v)?;
        csv.row(&[k.to_string(), real(h), real(h / k as f64)]);
        rows.push(json!({ "k": k, "entropy": h, "entropy_over_k": h / k as f64 }));
    }
    write_csv(&ctx.out, "entropy.csv", &csv)?;
    write_json(&ctx.out, "entropy.json", &json!({ "potential": v.id(), "rows": rows }))?;
    Ok(())
}

fn convergence(ctx: &Context) -> CliResult<()> {
    let mut cfg = ctx
        .cfg
        .clone()
        .ok_or_else(|| CliError::Usage("convergence needs --config".into()))?;
    cfg.out_dir = ctx.out.clone();
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    let report = run_convergence(&cfg, ctx.timings)?;
    for row in &report.rows {
        println!(
            "k = {:>5}  lambda/k = {:.10}  max V gap = {:.3e}  entropy/k = {:.3e}  LDP gap = {:.3e}",
            row.k, row.lambda_over_k, row.max_v_gap, row.entropy_over_k, row.ldp_sup_gap
        );
    }
    if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.column).collect();
        Err(CliError::CheckFailed(format!("not monotone: {}", failed.join(", "))))
    }
}
