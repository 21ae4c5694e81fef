//! Command surface behind the `vidlab` binary.
//!
//! Every command writes its report to `out`, diagnostics to `err`, and
//! returns the process exit code: 0 ok, 1 certification failure, 2
//! configuration error, 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{Scenario, ScenarioConfig, ScenarioResult, BUNDLED};
use crate::decay::{fit_decay, verify_lemma_2_1, DecayModel, PolyBoundParams};
use crate::error::{Error, Result};
use crate::io::{self, format_f64};
use crate::kernels::{derive, validate, AssumptionReport, KernelSpec, PolynomialKernel, PronyKernel, SpringDashpotSpec};
use crate::tensor::VoigtTensor;

#[derive(Debug, Parser)]
#[command(name = "vidlab", version, about = "1D viscoelastic memory-kernel laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file and write its energy trace.
    Simulate {
        config: PathBuf,
        /// Overrides `outputs.trace`.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Overrides `outputs.snapshots`.
        #[arg(long)]
        snapshots: Option<PathBuf>,
    },
    /// Reduce a spring-dashpot model to its Prony kernel.
    ///
    /// Variants: spring C | maxwell Cs eta | sls C1 C2 eta2 |
    /// burgers c1 c2 eta2 eta3 | json '<spec>'.
    DeriveKernel {
        variant: String,
        #[arg(allow_hyphen_values = true)]
        params: Vec<String>,
    },
    /// Check the kernel assumptions for a scenario's material.
    ValidateKernel { config: PathBuf },
    /// Fit a power or exponential decay law to one trace column.
    FitDecay {
        trace: PathBuf,
        column: String,
        model: DecayModel,
        #[arg(long, num_args = 2, value_names = ["T0", "T1"])]
        window: Option<Vec<f64>>,
    },
    /// Compare the comparison-ODE solution with its closed-form bound.
    CheckLemma {
        y0: f64,
        m2: f64,
        m3: f64,
        q: f64,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run the bundled scenarios in parallel.
    Scenarios {
        /// Directory for the trace files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Subset of scenario names; all when empty.
        names: Vec<String>,
    },
}

pub fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Simulate { config, trace, snapshots } => simulate(&config, trace, snapshots, out, err),
        Command::DeriveKernel { variant, params } => derive_kernel(&variant, &params, out, err),
        Command::ValidateKernel { config } => validate_kernel(&config, out, err),
        Command::FitDecay { trace, column, model, window } => {
            fit_decay_cmd(&trace, &column, model, window.map(|w| (w[0], w[1])), out, err)
        }
        Command::CheckLemma { y0, m2, m3, q, t_end, dt } => check_lemma(y0, m2, m3, q, t_end, dt, out, err),
        Command::Scenarios { out_dir, names } => run_bundled(&out_dir, &names, out, err),
    }
}

fn fail(err: &mut dyn Write, context: &str, e: &Error) -> i32 {
    let _ = writeln!(err, "error: {context}: {e}");
    e.exit_code()
}

fn summarize(name: &str, res: &ScenarioResult, fit: Option<DecayModel>, out: &mut dyn Write) -> Result<()> {
    let last = res.trace.samples.last().expect("trace has a sample");
    let first = &res.trace.samples[0];
    let w = |e: std::io::Error| Error::Io { path: PathBuf::from("<stdout>"), source: e };
    writeln!(
        out,
        "{name}: steps={} dt={} samples={} E(0)={} E(T)={} t_end={}",
        res.run.steps,
        format_f64(res.run.dt),
        res.trace.samples.len(),
        format_f64(first.e),
        format_f64(last.e),
        format_f64(last.t)
    )
    .map_err(w)?;
    if let Some(model) = fit {
        let f = fit_decay(&res.trace.times(), &res.trace.column("E").expect("E column"), model, None)?;
        writeln!(out, "{}", io::FIT_HEADER).map_err(w)?;
        writeln!(out, "{}", io::fit_row("E", &f)).map_err(w)?;
    }
    for warning in &res.trace.meta.warnings {
        writeln!(out, "warning: {warning}").map_err(w)?;
    }
    Ok(())
}

fn write_outputs(
    scenario: &Scenario,
    res: &ScenarioResult,
    trace: Option<&Path>,
    snapshots: Option<&Path>,
) -> Result<()> {
    if let Some(p) = trace {
        io::save_trace(p, &res.trace)?;
    }
    if let Some(p) = snapshots {
        io::save_snapshots(p, &scenario.mesh, &res.run.snapshots)?;
    }
    Ok(())
}

pub fn simulate(
    path: &Path,
    trace: Option<PathBuf>,
    snapshots: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let ctx = path.display().to_string();
    let result = (|| {
        let mut cfg = ScenarioConfig::load(path)?;
        if trace.is_some() {
            cfg.outputs.trace = trace;
        }
        if snapshots.is_some() {
            cfg.outputs.snapshots = snapshots;
        }
        let scenario = cfg.build()?;
        let res = scenario.run()?;
        write_outputs(&scenario, &res, cfg.outputs.trace.as_deref(), cfg.outputs.snapshots.as_deref())?;
        summarize(&scenario.name, &res, cfg.outputs.fit, out)
    })();
    match result {
        Ok(()) => 0,
        Err(e) => fail(err, &ctx, &e),
    }
}

fn parse_spec(variant: &str, params: &[String]) -> Result<SpringDashpotSpec> {
    if variant == "json" {
        let text = params
            .first()
            .ok_or_else(|| Error::Config("json variant needs a spec argument".into()))?;
        return serde_json::from_str(text).map_err(|e| Error::Config(format!("spring-dashpot spec: {e}")));
    }
    let v = params
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| Error::Config(format!("parameter '{p}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let need = |n: usize| {
        if v.len() == n {
            Ok(())
        } else {
            Err(Error::Config(format!("{variant} takes {n} parameters, got {}", v.len())))
        }
    };
    Ok(match variant {
        "spring" => {
            need(1)?;
            SpringDashpotSpec::Spring { c: v[0] }
        }
        "maxwell" => {
            need(2)?;
            SpringDashpotSpec::Maxwell { cs: v[0], eta: v[1] }
        }
        "sls" => {
            need(3)?;
            SpringDashpotSpec::Sls { c1: v[0], c2: v[1], eta2: v[2] }
        }
        "burgers" => {
            need(4)?;
            SpringDashpotSpec::Burgers { c1: v[0], c2: v[1], eta2: v[2], eta3: v[3] }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown variant '{other}' (spring, maxwell, sls, burgers, json)"
            )))
        }
    })
}

pub fn derive_kernel(variant: &str, params: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = (|| -> Result<String> {
        let model = derive(&parse_spec(variant, params)?)?;
        let mut s = String::new();
        let c = model.instantaneous.as_scalar().unwrap_or(f64::NAN);
        s += &format!("# instantaneous = {}\n", format_f64(c));
        s += &format!("# equilibrium = {}\n", format_f64(model.equilibrium_modulus()));
        for (i, b) in model.burgers.iter().enumerate() {
            let tag = if model.burgers.len() > 1 { format!("[{i}] ") } else { String::new() };
            for (k, v) in [("r1", b.r1), ("r2", b.r2), ("b1", b.b1), ("b2", b.b2)] {
                s += &format!("# {tag}{k} = {}\n", format_f64(v));
            }
        }
        s += "amplitude,rate\n";
        for t in model.kernel.terms() {
            let g = t.amplitude.as_scalar().unwrap_or(f64::NAN);
            s += &format!("{},{}\n", format_f64(g), format_f64(t.rate));
        }
        Ok(s)
    })();
    match result {
        Ok(s) => {
            let _ = out.write_all(s.as_bytes());
            0
        }
        Err(e) => fail(err, &format!("derive-kernel {variant}"), &e),
    }
}

fn scaled_kernel(kernel: &KernelSpec, factor: f64) -> Result<Option<KernelSpec>> {
    if factor == 0.0 || kernel.is_empty() {
        return Ok(None);
    }
    Ok(Some(match kernel {
        KernelSpec::Prony(k) => KernelSpec::Prony(k.scaled(factor)),
        KernelSpec::Polynomial(k) => KernelSpec::Polynomial(PolynomialKernel::new(
            k.amplitude.clone(),
            k.scale * factor,
            k.a,
            k.p,
        )?),
    }))
}

/// Assumption reports for each distinct `(C, kernel scale)` cell pair.
pub fn kernel_reports(scenario: &Scenario) -> Result<Vec<AssumptionReport>> {
    let m = &scenario.material;
    let mut seen: Vec<(u64, u64)> = Vec::new();
    let mut reports = Vec::new();
    for (&c, &s) in m.c().iter().zip(m.kernel_scale()) {
        let key = (c.to_bits(), s.to_bits());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let kernel = match scaled_kernel(m.kernel(), s)? {
            Some(k) => k,
            None if s == 0.0 => KernelSpec::Prony(PronyKernel::empty(1)?),
            None => m.kernel().clone(),
        };
        reports.push(validate(&VoigtTensor::scalar(c), &kernel)?);
    }
    Ok(reports)
}

pub fn validate_kernel(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let ctx = path.display().to_string();
    let result = (|| -> Result<bool> {
        let scenario = ScenarioConfig::load(path)?.build()?;
        let reports = kernel_reports(&scenario)?;
        let text = serde_json::to_string_pretty(&reports).expect("report serializes");
        let _ = writeln!(out, "{text}");
        Ok(reports.iter().all(|r| r.satisfied))
    })();
    match result {
        Ok(true) => {
            let _ = writeln!(out, "satisfied");
            0
        }
        Ok(false) => {
            let _ = writeln!(err, "error: {ctx}: kernel assumptions not satisfied");
            1
        }
        Err(e) => fail(err, &ctx, &e),
    }
}

pub fn fit_decay_cmd(
    trace: &Path,
    column: &str,
    model: DecayModel,
    window: Option<(f64, f64)>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let result = (|| -> Result<String> {
        let table = io::load_table(trace)?;
        let t = table
            .column("t")
            .ok_or_else(|| Error::Config(format!("{}: no 't' column", trace.display())))?;
        let y = table
            .column(column)
            .ok_or_else(|| Error::Config(format!("{}: no column '{column}'", trace.display())))?;
        let fit = fit_decay(&t, &y, model, window)?;
        Ok(format!("{}\n{}\n", io::FIT_HEADER, io::fit_row(column, &fit)))
    })();
    match result {
        Ok(s) => {
            let _ = out.write_all(s.as_bytes());
            0
        }
        Err(e) => fail(err, &trace.display().to_string(), &e),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn check_lemma(
    y0: f64,
    m2: f64,
    m3: f64,
    q: f64,
    t_end: f64,
    dt: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let result = (|| {
        let p = PolyBoundParams::new(y0, m2, m3, q)?;
        if let Some(w) = p.warning() {
            let _ = writeln!(err, "warning: {w}");
        }
        let dt = dt.unwrap_or(1e-3 * f64::max(1.0, 1.0 / m2));
        verify_lemma_2_1(&p, t_end, dt)
    })();
    match result {
        Ok(c) => {
            let _ = writeln!(
                out,
                "y0={} M2={} M3={} q={}\nworst_margin={} at t={}\n{}",
                format_f64(y0),
                format_f64(m2),
                format_f64(m3),
                format_f64(q),
                format_f64(c.worst_margin),
                format_f64(c.worst_t),
                if c.passed { "PASS" } else { "FAIL" }
            );
            if c.passed {
                0
            } else {
                1
            }
        }
        Err(e) => fail(err, "check-lemma", &e),
    }
}

/// Runs configurations concurrently, one thread each.
pub fn run_parallel(configs: &[ScenarioConfig]) -> Vec<Result<(Scenario, ScenarioResult)>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| {
                scope.spawn(move || {
                    let s = cfg.build()?;
                    let r = s.run()?;
                    Ok((s, r))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Validation("scenario thread panicked".into()))))
            .collect()
    })
}

pub fn run_bundled(out_dir: &Path, names: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut configs = Vec::new();
    for (name, _) in BUNDLED {
        if names.is_empty() || names.iter().any(|n| n == name) {
            configs.push(ScenarioConfig::bundled(name).expect("bundled scenarios parse"));
        }
    }
    if let Some(n) = names.iter().find(|n| !BUNDLED.iter().any(|(b, _)| b == n)) {
        return fail(err, "scenarios", &Error::Config(format!("no bundled scenario named '{n}'")));
    }
    if let Err(source) = std::fs::create_dir_all(out_dir) {
        return fail(err, "scenarios", &Error::Io { path: out_dir.into(), source });
    }
    let mut code = 0;
    for (cfg, res) in configs.iter().zip(run_parallel(&configs)) {
        let name = cfg.name.clone().unwrap_or_default();
        let done = res.and_then(|(s, r)| {
            let trace = out_dir.join(format!("{name}.trace.csv"));
            write_outputs(&s, &r, Some(&trace), None)?;
            summarize(&name, &r, cfg.outputs.fit, out)
        });
        if let Err(e) = done {
            code = code.max(fail(err, &name, &e));
        }
    }
    code
}
