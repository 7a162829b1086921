//! Executes one [`ExperimentConfig`] into in-memory outputs.
//!
//! Nothing here touches the filesystem or the clock, so a config always maps
//! to the same bytes.

use josephus_core::analysis::{
    clt_experiment, decay_bound_check, moment_report, unbiased_decay_check, CltReport,
};
use josephus_core::deterministic::{
    generating_series_coefficients, survivor_binary_rotation, survivor_closed_form,
    survivor_recurrence,
};
use josephus_core::montecarlo::empirical_counts;
use josephus_core::oracle::{as_fractions, oracle_exact};
use josephus_core::rule::Rule;
use josephus_core::survival_dp::distribution;
use josephus_core::SurvivalDistribution;

use crate::config::{
    CltArgs, Command, DecayArgs, DetArgs, ExactArgs, ExperimentConfig, FigureArgs, FigureKind,
    MomentsArgs, OracleArgs, SimulateArgs, SweepArgs,
};
use crate::figures::{
    default_pq_grid, figure_r1, figure_r2, figure_r3, r2_argmax_near_limit, sweep_limit_parameter,
    FigureSeries, Sampling, R1_P_GRID, R2_P_GRID,
};
use crate::format::{g17, json_object, Cell, Format, Table};
use crate::CliError;

/// Files to write (name, contents), what to print when no output directory
/// is given, and the assertions that failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub stdout: String,
    pub failures: Vec<String>,
}

impl RunOutput {
    fn table(name: &str, table: &Table, format: Format) -> Self {
        let body = table.render(format);
        RunOutput {
            files: vec![(format!("{name}.{}", format.extension()), body.clone())],
            stdout: body,
            failures: Vec::new(),
        }
    }
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let fmt = config.format;
    match &config.command {
        Command::Det(a) => det(a, fmt),
        Command::Exact(a) => exact(a, fmt),
        Command::Simulate(a) => simulate(a, config.seed, fmt),
        Command::Oracle(a) => oracle(a, fmt),
        Command::Moments(a) => moments(a, fmt),
        Command::Decay(a) => decay(a, fmt),
        Command::Clt(a) => clt(a, config.seed, fmt),
        Command::Figure(a) => figure(a, config.seed, fmt),
        Command::Sweep(a) => sweep(a, fmt),
        Command::Run(_) => Err(CliError::Usage("`run` is resolved before execution".into())),
    }
}

fn det(a: &DetArgs, fmt: Format) -> Result<RunOutput, CliError> {
    let mut failures = Vec::new();
    let survivor = |n: u64, failures: &mut Vec<String>| -> Result<u64, CliError> {
        let r = survivor_recurrence(n)?;
        let c = survivor_closed_form(n)?;
        let b = survivor_binary_rotation(n)?;
        if r != c || r != b {
            failures.push(format!("N = {n}: recurrence {r:?}, closed form {c:?}, rotation {b:?}"));
        }
        Ok(r.survivor_one_based)
    };

    if let Some(d) = a.series_check {
        let coeffs = generating_series_coefficients(d)?;
        let mut t = Table::new(&["n", "coefficient", "b_n", "match"]);
        for (n, c) in coeffs.iter().enumerate().skip(1) {
            let b = survivor(n as u64, &mut failures)?;
            let ok = *c == b.into();
            if !ok {
                failures.push(format!("series coefficient {n} is {c}, b_N = {b}"));
            }
            t.push(vec![n.into(), Cell::Raw(c.to_string()), b.into(), ok.into()]);
        }
        let mut out = RunOutput::table("det_series", &t, fmt);
        out.failures = failures;
        return Ok(out);
    }

    match (a.n, a.n_min, a.n_max) {
        (Some(n), None, None) => {
            let b = survivor(n, &mut failures)?;
            let mut t = Table::new(&["N", "b_N"]);
            t.push(vec![n.into(), b.into()]);
            let mut out = RunOutput::table("det", &t, fmt);
            out.stdout = format!("{b}\n");
            out.failures = failures;
            Ok(out)
        }
        (None, Some(lo), Some(hi)) => {
            if lo == 0 || lo > hi {
                return Err(josephus_core::Error::Domain(format!("bad range {lo}..={hi}")).into());
            }
            let mut t = Table::new(&["N", "b_N"]);
            for n in lo..=hi {
                t.push(vec![n.into(), survivor(n, &mut failures)?.into()]);
            }
            let mut out = RunOutput::table("det", &t, fmt);
            out.failures = failures;
            Ok(out)
        }
        _ => Err(CliError::Usage("det needs --n, --n-min/--n-max, or --series-check".into())),
    }
}

fn probs_table(dist: &SurvivalDistribution) -> Table {
    let mut t = Table::new(&["n", "prob"]);
    for (n, &p) in dist.probs.iter().enumerate() {
        t.push(vec![n.into(), p.into()]);
    }
    t
}

fn exact(a: &ExactArgs, fmt: Format) -> Result<RunOutput, CliError> {
    let rule = a.rule.rule()?;
    if a.paper_literal {
        let msg = match rule {
            Rule::R2 { .. } => {
                "the literal R2 recursion sets f_N(0) from f_N(1), a value of the row being \
                 computed; it is not a recursion. The implemented branch reads f_{N-1}(1), \
                 which matches exhaustive enumeration"
            }
            _ => "--paper-literal only concerns the R2 recursion",
        };
        return Err(josephus_core::Error::Domain(msg.into()).into());
    }
    let dist = distribution(&rule, a.n)?;
    Ok(RunOutput::table("exact", &probs_table(&dist), fmt))
}

fn simulate(a: &SimulateArgs, seed: u64, fmt: Format) -> Result<RunOutput, CliError> {
    let rule = a.rule.rule()?;
    let counts = empirical_counts(&rule, a.n, a.samples, seed)?;
    let total = a.samples as f64;
    let mut t = Table::new(&["n", "count", "freq"]);
    for (n, &c) in counts.iter().enumerate() {
        t.push(vec![n.into(), c.into(), (c as f64 / total).into()]);
    }
    Ok(RunOutput::table("simulate", &t, fmt))
}

fn oracle(a: &OracleArgs, fmt: Format) -> Result<RunOutput, CliError> {
    let rule = a.rule()?;
    let probs = oracle_exact(&rule, a.n)?;
    let fracs: Vec<(String, String)> = as_fractions(&probs)
        .into_iter()
        .map(|(num, den)| (num.to_string(), den.to_string()))
        .collect();
    let mut t = Table::new(&["n", "num", "den"]);
    for (n, (num, den)) in fracs.into_iter().enumerate() {
        t.push(vec![n.into(), Cell::Raw(num), Cell::Raw(den)]);
    }
    Ok(RunOutput::table("oracle", &t, fmt))
}

fn moments(a: &MomentsArgs, fmt: Format) -> Result<RunOutput, CliError> {
    let rule = a.rule.rule()?;
    let report = moment_report(&rule, a.n_min, a.n_max)?;
    let mut t = Table::new(&[
        "n", "mean", "phi1", "phi2", "abs_phi3", "variance", "third_central", "eta", "g0",
    ]);
    let mut failures = Vec::new();
    for r in &report.per_n {
        let gap = (r.variance - (r.phi2 - r.phi1 * r.phi1)).abs();
        if gap > 1e-12 {
            failures.push(format!("N = {}: variance identity off by {gap:e}", r.n));
        }
        t.push(vec![
            r.n.into(),
            r.mean.into(),
            r.phi1.into(),
            r.phi2.into(),
            r.abs_phi3.into(),
            r.variance.into(),
            r.third_central.into(),
            r.eta.into(),
            r.g0.into(),
        ]);
    }
    let mut out = RunOutput::table("moments", &t, fmt);
    out.failures = failures;
    Ok(out)
}

fn decay(a: &DecayArgs, fmt: Format) -> Result<RunOutput, CliError> {
    let mut failures = Vec::new();
    let t = if a.unbiased {
        let fit = unbiased_decay_check(a.n_max, a.epsilon, a.alpha)?;
        if !fit.stabilized {
            failures.push(format!("K = {} did not stabilize (K over N <= n_max/2: {})", fit.k, fit.k_half));
        }
        if !fit.holds() {
            failures.push(format!("bound violated by {}", fit.max_violation));
        }
        let mut t = Table::new(&[
            "epsilon", "alpha", "lhs_first", "lhs_second", "k", "k_half", "stabilized", "max_violation", "n_max",
        ]);
        t.push(vec![
            fit.epsilon.into(),
            fit.alpha.into(),
            fit.inequality_lhs[0].into(),
            fit.inequality_lhs[1].into(),
            fit.k.into(),
            fit.k_half.into(),
            fit.stabilized.into(),
            fit.max_violation.into(),
            fit.n_max.into(),
        ]);
        t
    } else {
        let p = a.p.ok_or_else(|| CliError::Usage("decay needs --p or --unbiased".into()))?;
        let fit = decay_bound_check(p, a.n_max)?;
        if !fit.stabilized {
            failures.push(format!("K = {} did not stabilize (K over N <= n_max/2: {})", fit.k, fit.k_half));
        }
        if !fit.holds() {
            failures.push(format!("bound violated by {}", fit.max_violation));
        }
        let mut t = Table::new(&["p", "beta", "gamma", "k", "k_half", "stabilized", "max_violation", "n_max"]);
        t.push(vec![
            fit.p.into(),
            fit.beta.into(),
            fit.gamma.into(),
            fit.k.into(),
            fit.k_half.into(),
            fit.stabilized.into(),
            fit.max_violation.into(),
            fit.n_max.into(),
        ]);
        t
    };
    let mut out = RunOutput::table("decay", &t, fmt);
    out.failures = failures;
    Ok(out)
}

fn clt_failures(r: &CltReport) -> Vec<String> {
    let mut failures = Vec::new();
    if r.ks_distance > r.ks_critical_1pct {
        failures.push(format!(
            "KS distance {} exceeds the 1% critical value {}",
            r.ks_distance, r.ks_critical_1pct
        ));
    }
    let first = r.lyapunov_ratio[0];
    let last = *r.lyapunov_ratio.last().expect("non-empty");
    if last >= first {
        failures.push(format!("Lyapunov ratio did not decrease: {first} -> {last}"));
    }
    failures
}

fn clt(a: &CltArgs, seed: u64, fmt: Format) -> Result<RunOutput, CliError> {
    let r = clt_experiment(a.l_max, a.trials, seed, a.sampling.into())?;
    let failures = clt_failures(&r);
    let summary_keys: Vec<String> = [
        "record", "l_max", "trials", "seed", "b_l", "ks_distance", "ks_critical_1pct",
        "ks_distance_half_centered", "centering_offset",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let summary = vec![
        Cell::from("ensemble"),
        r.l_max.into(),
        r.trials.into(),
        r.seed.into(),
        r.b_at(r.l_max).into(),
        r.ks_distance.into(),
        r.ks_critical_1pct.into(),
        r.ks_distance_half_centered.into(),
        r.centering_offset.into(),
    ];
    let stdout = format!(
        "B_L = {}  KS = {} (1% critical {})  KS centred at 1/2 = {}  Lyapunov {} -> {}\n",
        g17(r.b_at(r.l_max)),
        g17(r.ks_distance),
        g17(r.ks_critical_1pct),
        g17(r.ks_distance_half_centered),
        g17(r.lyapunov_ratio[0]),
        g17(*r.lyapunov_ratio.last().expect("non-empty")),
    );
    let files = match fmt {
        Format::Jsonl => {
            let keys: Vec<String> = ["record", "l", "b_l", "lyapunov_ratio"].iter().map(|s| s.to_string()).collect();
            let mut body = String::new();
            for (i, (&b, &ly)) in r.b_l.iter().zip(&r.lyapunov_ratio).enumerate() {
                body.push_str(&json_object(&keys, &[Cell::from("l"), (r.l_min + i).into(), b.into(), ly.into()]));
                body.push('\n');
            }
            let mut keys = summary_keys;
            keys.push("normalized_sums".into());
            let sums: Vec<String> = r.normalized_sums.iter().map(|&x| g17(x)).collect();
            let mut values = summary;
            values.push(Cell::Raw(format!("[{}]", sums.join(","))));
            body.push_str(&json_object(&keys, &values));
            body.push('\n');
            vec![("clt.jsonl".to_string(), body)]
        }
        Format::Csv => {
            let mut per_l = Table::new(&["l", "b_l", "lyapunov_ratio"]);
            for (i, (&b, &ly)) in r.b_l.iter().zip(&r.lyapunov_ratio).enumerate() {
                per_l.push(vec![(r.l_min + i).into(), b.into(), ly.into()]);
            }
            let mut sums = Table::new(&["trial", "normalized_sum"]);
            for (i, &x) in r.normalized_sums.iter().enumerate() {
                sums.push(vec![i.into(), x.into()]);
            }
            let mut ens = Table {
                header: summary_keys,
                rows: Vec::new(),
            };
            ens.push(summary);
            vec![
                ("clt.csv".to_string(), per_l.render(fmt)),
                ("clt_sums.csv".to_string(), sums.render(fmt)),
                ("clt_summary.csv".to_string(), ens.render(fmt)),
            ]
        }
    };
    Ok(RunOutput {
        files,
        stdout,
        failures,
    })
}

fn gnuplot_script(series: &[FigureSeries], fmt_ext: &str, title: &str) -> String {
    let mut s = format!(
        "set datafile separator ','\nset key outside\nset xlabel 'n / N'\nset ylabel 'survival probability'\nset title '{title}'\nplot \\\n"
    );
    let lines: Vec<String> = series
        .iter()
        .map(|f| {
            format!(
                "  '{}.{}' using ($1/{}):2 every ::1 with lines title '{}'",
                f.label,
                fmt_ext,
                f.dist.len(),
                f.label
            )
        })
        .collect();
    s.push_str(&lines.join(", \\\n"));
    s.push('\n');
    s
}

fn figure(a: &FigureArgs, seed: u64, fmt: Format) -> Result<RunOutput, CliError> {
    let sampling = a.montecarlo.then_some(Sampling {
        samples: a.samples,
        seed,
    });
    let series = match a.which {
        FigureKind::R1 => {
            let grid = if a.p_grid.is_empty() { R1_P_GRID.to_vec() } else { a.p_grid.clone() };
            figure_r1(a.n, &grid, sampling)?
        }
        FigureKind::R2 => {
            let grid = if a.p_grid.is_empty() { R2_P_GRID.to_vec() } else { a.p_grid.clone() };
            figure_r2(a.n, &grid, sampling)?
        }
        FigureKind::R3 => {
            let grid = if a.pq_grid.is_empty() { default_pq_grid() } else { a.pq_grid.clone() };
            figure_r3(a.n, &grid, sampling)?
        }
    };
    let mut out = RunOutput::default();
    for f in &series {
        out.files.push((format!("{}.{}", f.label, fmt.extension()), probs_table(&f.dist).render(fmt)));
        let near_limit = r2_argmax_near_limit(&f.dist);
        if near_limit == Some(false) {
            out.failures.push(format!("{}: argmax {} is not within 0.03 N of (3p - 1) N", f.label, f.dist.argmax()));
        }
        out.stdout.push_str(&format!(
            "{}.{}  argmax {}  mass in [0.45, 0.55] {}\n",
            f.label,
            fmt.extension(),
            f.dist.argmax(),
            g17(f.dist.mass_between(0.45, 0.55))
        ));
    }
    if a.gnuplot && fmt == Format::Csv {
        let name = format!("figure_{:?}", a.which).to_lowercase();
        out.files.push((format!("{name}.gp"), gnuplot_script(&series, fmt.extension(), &name)));
    }
    Ok(out)
}

fn sweep(a: &SweepArgs, fmt: Format) -> Result<RunOutput, CliError> {
    let recs = sweep_limit_parameter(&a.p_grid, &a.n_values, a.delta)?;
    let mut t = Table::new(&["p", "n", "delta", "mass_near_zero", "mass_near_half"]);
    for r in recs {
        t.push(vec![r.p.into(), r.n.into(), r.delta.into(), r.mass_near_zero.into(), r.mass_near_half.into()]);
    }
    Ok(RunOutput::table("sweep", &t, fmt))
}
