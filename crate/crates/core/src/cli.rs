//! Command-line front end: `solve`, `sweep`, `spectrum`, `efficiency`.
//!
//! Each command loads a [`RunConfig`], runs the library and writes CSV/JSON
//! files into the output directory. Errors map onto exit codes through
//! [`Error::exit_code`]; a sweep or study with some failed points exits
//! with [`EXIT_PARTIAL`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::contacts::{BiasPoint, ContactModel};
use crate::device::Device;
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_json, write_rates_csv, write_state_csv, write_table, Metadata};
use crate::observables::ObservableSet;
use crate::spectra::{anticrossing_map, compute_spectrum, omega_grid, q_grid_for, SpectralMode, SpectrumResult};
use crate::steady::{solve_at, voltage_sweep, SteadyState};
use crate::study::{efficiency_study, EfficiencyReport, StudySpec};
use crate::units::HBAR;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "isbel", version, about = "Intersubband microcavity electroluminescence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Emit solver diagnostics as JSON lines on stderr.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Worker threads for independent study points.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Scale every spectrum to unit peak (overrides [spectrum] normalize).
    #[arg(long, global = true)]
    pub normalize_spectrum: bool,
    /// Override a config key, e.g. `--set physics.T=300`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Steady state at one bias: state CSV and observables JSON.
    Solve {
        /// qV in meV; defaults to E12.
        #[arg(long, allow_negative_numbers = true)]
        voltage: Option<f64>,
        /// Also export the contact rate table.
        #[arg(long)]
        rates: bool,
    },
    /// Continuation sweep over [sweep]: observables per bias.
    Sweep,
    /// Emission spectrum and anticrossing map at one bias.
    Spectrum {
        /// qV in meV; defaults to [spectrum] v or E12/2.
        #[arg(long, allow_negative_numbers = true)]
        voltage: Option<f64>,
    },
    /// Efficiency versus Rabi frequency for the [efficiency] scalings.
    Efficiency {
        /// qV in meV; defaults to [efficiency] v or E12.
        #[arg(long)]
        voltage: Option<f64>,
    },
}

/// Loaded configuration plus run-level settings.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: RunConfig,
    pub hash: String,
    pub out_dir: PathBuf,
    pub trace: bool,
    pub jobs: usize,
}

impl Context {
    pub fn new(opts: &GlobalOpts) -> Result<Self> {
        let mut config = match &opts.config {
            Some(p) => RunConfig::load(p, &opts.overrides)?,
            None => {
                let text = RunConfig::default().to_toml_string()?;
                RunConfig::from_toml_with_overrides(&text, &opts.overrides)?
            }
        };
        if let Some(o) = &opts.out {
            config.output.dir = o.to_string_lossy().into_owned();
        }
        if opts.normalize_spectrum {
            config.spectrum.normalize = true;
        }
        if opts.jobs == Some(0) {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        Ok(Self::from_config(config, opts.trace, opts.jobs.unwrap_or(1)))
    }

    pub fn from_config(config: RunConfig, trace: bool, jobs: usize) -> Self {
        Self {
            hash: config.hash(),
            out_dir: PathBuf::from(&config.output.dir),
            config,
            trace,
            jobs: jobs.max(1),
        }
    }

    fn meta(&self) -> Metadata {
        Metadata::new(&self.hash)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn prepare(&self) -> Result<(Device, ContactModel)> {
        std::fs::create_dir_all(&self.out_dir)?;
        Ok((self.config.device()?, self.config.contact_model()?))
    }

    fn wants(&self, f: Format) -> bool {
        self.config.output.wants(f)
    }

    fn trace_solve(&self, v: f64, r: &Result<SteadyState>) {
        if !self.trace {
            return;
        }
        match r {
            Ok(s) => {
                for h in &s.diagnostics.history {
                    eprintln!(
                        "{}",
                        json!({"event": "newton", "V": v, "iteration": h.iteration, "residual": h.residual,
                               "step": h.step, "pseudo_transient": h.pseudo_transient})
                    );
                }
                eprintln!(
                    "{}",
                    json!({"event": "converged", "V": v, "iterations": s.diagnostics.iterations,
                           "residual": s.diagnostics.residual, "eps_F": s.eps_f,
                           "near_degenerate": s.diagnostics.near_degenerate, "stagnated": s.diagnostics.stagnated})
                );
            }
            Err(e) => eprintln!("{}", json!({"event": "failed", "V": v, "error": e.to_string()})),
        }
    }
}

fn v_tag(v: f64) -> String {
    format!("V{v}")
}

/// Files written by a command, in order.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
}

impl Written {
    fn push(&mut self, p: PathBuf) -> &Path {
        self.files.push(p);
        self.files.last().unwrap()
    }
}

#[derive(Debug)]
pub struct SolveOutput {
    pub state: SteadyState,
    pub observables: ObservableSet,
    pub written: Written,
}

pub fn cmd_solve(ctx: &Context, voltage: Option<f64>, export_rates: bool) -> Result<SolveOutput> {
    let (device, contacts) = ctx.prepare()?;
    let v = voltage.unwrap_or(ctx.config.physics.e12);
    let res = solve_at(BiasPoint::new(v), &contacts, &device, &ctx.config.solver);
    ctx.trace_solve(v, &res);
    let state = res?;
    let obs = ObservableSet::compute(&state, &device);
    let mut w = Written::default();
    let tag = v_tag(v);
    if ctx.wants(Format::Csv) {
        write_state_csv(w.push(ctx.path(&format!("state_{tag}.csv"))), &ctx.meta(), &state, &device.grids)?;
    }
    if ctx.wants(Format::Json) {
        let data = json!({"observables": obs, "iterations": state.diagnostics.iterations,
                          "residual": state.diagnostics.residual});
        write_json(w.push(ctx.path(&format!("observables_{tag}.json"))), &ctx.meta().with("V", v), &data)?;
    }
    if export_rates {
        let meta = ctx.meta().with("V", v).with("rates", "sum of both reservoirs, 1/ps");
        write_rates_csv(w.push(ctx.path(&format!("rates_{tag}.csv"))), &meta, &state.rates.total, &device.grids)?;
    }
    Ok(SolveOutput {
        state,
        observables: obs,
        written: w,
    })
}

#[derive(Debug)]
pub struct SweepOutput {
    /// Bias and observables (`None` for failed points).
    pub rows: Vec<(f64, Option<ObservableSet>)>,
    pub written: Written,
}

impl SweepOutput {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.1.is_none()).count()
    }
}

/// File name, header and row extractor of a table derived from the sweep.
type DerivedTable = (&'static str, &'static [&'static str], fn(&ObservableSet) -> Vec<f64>);

pub fn cmd_sweep_voltage(ctx: &Context) -> Result<SweepOutput> {
    let (device, contacts) = ctx.prepare()?;
    let vs = ctx.config.sweep.voltages()?;
    let points = voltage_sweep(&vs, &contacts, &device, &ctx.config.solver);
    let mut rows = Vec::with_capacity(points.len());
    let mut w = Written::default();
    let mut table = Vec::new();
    let mut json_rows = Vec::new();
    for p in &points {
        let v = p.bias.v;
        ctx.trace_solve(v, &p.result);
        match &p.result {
            Ok(s) => {
                let o = ObservableSet::compute(s, &device);
                let mut r = o.csv_row();
                r.extend(["ok".into(), s.diagnostics.iterations.to_string(), fmt_f64(s.diagnostics.residual)]);
                table.push(r);
                json_rows.push(json!({"V": v, "status": "ok", "observables": o,
                                      "iterations": s.diagnostics.iterations}));
                if ctx.config.sweep.dump_states && ctx.wants(Format::Csv) {
                    write_state_csv(w.push(ctx.path(&format!("state_{}.csv", v_tag(v)))), &ctx.meta(), s, &device.grids)?;
                }
                rows.push((v, Some(o)));
            }
            Err(e) => {
                let mut r = vec![fmt_f64(v)];
                r.extend(std::iter::repeat_n(fmt_f64(f64::NAN), ObservableSet::csv_header().len() - 1));
                r.extend(["failed".into(), String::new(), String::new()]);
                table.push(r);
                json_rows.push(json!({"V": v, "status": "failed", "error": e.to_string()}));
                rows.push((v, None));
            }
        }
    }
    let meta = ctx.meta().with("units", "V meV; I,P 1/(ps cm^2); D,D0,densities cm^-2; Omega_R,splitting,eps_F meV");
    if ctx.wants(Format::Csv) {
        let mut header: Vec<&str> = ObservableSet::csv_header().to_vec();
        header.extend(["status", "iterations", "residual"]);
        write_table(w.push(ctx.path("sweep.csv")), &meta, &header, &table)?;
        let ok: Vec<(f64, &ObservableSet)> = rows.iter().filter_map(|(v, o)| o.as_ref().map(|o| (*v, o))).collect();
        let derived: [DerivedTable; 4] = [
            ("iv.csv", &["V", "I"], |o| vec![o.v, o.i]),
            ("p_vs_i.csv", &["I", "P"], |o| vec![o.i, o.p]),
            ("densities.csv", &["V", "n1_density", "n2_density", "D"], |o| {
                vec![o.v, o.n1_density, o.n2_density, o.d]
            }),
            ("splitting.csv", &["V", "splitting", "Omega_R"], |o| vec![o.v, o.splitting, o.omega_r]),
        ];
        for (name, header, f) in derived {
            let body: Vec<Vec<String>> = ok.iter().map(|(_, o)| f(o).into_iter().map(fmt_f64).collect()).collect();
            write_table(w.push(ctx.path(name)), &meta, header, &body)?;
        }
    }
    if ctx.wants(Format::Json) {
        write_json(w.push(ctx.path("sweep.json")), &meta, &json_rows)?;
    }
    Ok(SweepOutput { rows, written: w })
}

#[derive(Debug)]
pub struct SpectrumOutput {
    pub state: SteadyState,
    /// Spectrum of the resonant mode.
    pub resonant: SpectrumResult,
    /// One row per cavity mode of the map.
    pub map: Vec<SpectrumResult>,
    pub written: Written,
}

pub fn cmd_spectrum(ctx: &Context, voltage: Option<f64>) -> Result<SpectrumOutput> {
    let (device, contacts) = ctx.prepare()?;
    let sp = &ctx.config.spectrum;
    let v = voltage.or(sp.v).unwrap_or(0.5 * ctx.config.physics.e12);
    let res = solve_at(BiasPoint::new(v), &contacts, &device, &ctx.config.solver);
    ctx.trace_solve(v, &res);
    let state = res?;
    let w12 = device.omega12();
    let omega = omega_grid(w12, sp.omega_lo, sp.omega_hi, sp.n_omega);
    let q_grid = q_grid_for(&device, sp.mode_lo, sp.mode_hi, sp.n_modes);
    let map = anticrossing_map(&state, &device, &omega, &q_grid, sp.normalize);
    let res_mode = SpectralMode::from_state(&state, &device, device.cavity.q_res);
    let resonant = compute_spectrum(&res_mode, &omega, &device.rates, sp.normalize);

    let mut w = Written::default();
    let meta = ctx
        .meta()
        .with("V", v)
        .with("units", "omega, omega_c in meV (hbar*omega); q in 1/nm; S in ps")
        .with("normalized", sp.normalize);
    if ctx.wants(Format::Csv) {
        let e = |x: f64| fmt_f64(HBAR * x);
        let spec_rows: Vec<Vec<String>> = map
            .iter()
            .flat_map(|r| {
                r.omega.iter().zip(&r.s).map(move |(om, s)| {
                    vec![fmt_f64(r.mode.q), e(r.mode.omega_c), e(*om), fmt_f64(s.re), fmt_f64(s.im)]
                })
            })
            .collect();
        write_table(w.push(ctx.path("spectrum.csv")), &meta, &["q", "omega_c", "omega", "Re_S", "Im_S"], &spec_rows)?;
        let map_rows: Vec<Vec<String>> = map
            .iter()
            .flat_map(|r| {
                r.omega
                    .iter()
                    .zip(&r.intensity)
                    .map(move |(om, i)| vec![e(*om), e(r.mode.omega_c), fmt_f64(*i)])
            })
            .collect();
        write_table(w.push(ctx.path("map.csv")), &meta, &["omega", "omega_c", "intensity"], &map_rows)?;
        let peak_rows: Vec<Vec<String>> = map
            .iter()
            .map(|r| {
                let pk = |i: usize| r.peaks.get(i).map(|&x| e(x)).unwrap_or_default();
                let (a, b) = r.roots;
                vec![
                    fmt_f64(r.mode.q),
                    e(r.mode.omega_c),
                    r.peaks.len().to_string(),
                    pk(0),
                    pk(1),
                    e(a.re),
                    e(b.re),
                    e(-a.im),
                    e(-b.im),
                ]
            })
            .collect();
        write_table(
            w.push(ctx.path("peaks.csv")),
            &meta,
            &["q", "omega_c", "n_peaks", "peak_1", "peak_2", "root_lo", "root_hi", "width_lo", "width_hi"],
            &peak_rows,
        )?;
        let res_rows: Vec<Vec<String>> = resonant
            .omega
            .iter()
            .zip(&resonant.s)
            .zip(&resonant.intensity)
            .map(|((om, s), i)| vec![e(*om), fmt_f64(s.re), fmt_f64(s.im), fmt_f64(*i)])
            .collect();
        write_table(
            w.push(ctx.path("spectrum_resonant.csv")),
            &meta.clone().with("q", resonant.mode.q),
            &["omega", "Re_S", "Im_S", "intensity"],
            &res_rows,
        )?;
    }
    if ctx.wants(Format::Json) {
        let (a, b) = resonant.roots;
        let data = json!({"resonant": {"q": resonant.mode.q, "n_a": resonant.mode.na, "D": resonant.mode.d,
                          "roots_meV": [[HBAR * a.re, HBAR * a.im], [HBAR * b.re, HBAR * b.im]],
                          "peaks_meV": resonant.peaks.iter().map(|x| HBAR * x).collect::<Vec<_>>()}});
        write_json(w.push(ctx.path("spectrum.json")), &meta, &data)?;
    }
    Ok(SpectrumOutput {
        state,
        resonant,
        map,
        written: w,
    })
}

#[derive(Debug)]
pub struct EfficiencyOutput {
    pub report: EfficiencyReport,
    pub written: Written,
}

pub fn cmd_efficiency_study(ctx: &Context, voltage: Option<f64>) -> Result<EfficiencyOutput> {
    std::fs::create_dir_all(&ctx.out_dir)?;
    let c = &ctx.config;
    let contacts = c.contact_model()?;
    let spec = StudySpec {
        bias: voltage.or(c.efficiency.v).unwrap_or(c.physics.e12),
        chi_scales: c.efficiency.scales()?,
        tau_factors: c.efficiency.tau_factors.clone(),
        gamma_xy: c.efficiency.gamma_xy.iter().map(|&g| Some(g)).collect(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let report = pool.install(|| efficiency_study(&c.physics, &c.grids, &contacts, &c.solver, &spec));
    if ctx.trace {
        for p in &report.points {
            eprintln!(
                "{}",
                json!({"event": "study_point", "tau_factor": p.tau_factor, "Gamma_XY": p.gamma_xy,
                       "chi_scale": p.chi_scale, "ok": p.obs.is_some(), "error": p.error})
            );
        }
    }
    let mut w = Written::default();
    let meta = ctx.meta().with("V", spec.bias).with("units", "Omega_R meV; I,P 1/(ps cm^2)");
    if ctx.wants(Format::Csv) {
        let nan = f64::NAN;
        let rows: Vec<Vec<String>> = report
            .points
            .iter()
            .map(|p| {
                let o = p.obs.as_ref();
                let g = |f: fn(&ObservableSet) -> f64| fmt_f64(o.map(f).unwrap_or(nan));
                vec![
                    fmt_f64(p.tau_factor),
                    fmt_f64(c.physics.tau_inv / p.tau_factor),
                    fmt_f64(p.gamma_xy),
                    fmt_f64(p.chi_scale),
                    g(|o| o.omega_r),
                    g(|o| o.eta),
                    g(|o| o.i),
                    g(|o| o.p),
                    g(|o| o.d),
                    g(|o| o.eta_freespace),
                    if o.is_some() { "ok".into() } else { "failed".into() },
                ]
            })
            .collect();
        let header = [
            "tau_factor", "tau_inv", "Gamma_XY", "chi_scale", "Omega_R", "eta", "I", "P", "D", "eta_freespace", "status",
        ];
        write_table(w.push(ctx.path("efficiency.csv")), &meta, &header, &rows)?;
    }
    if ctx.wants(Format::Json) {
        let data = json!({"curves": report.curves, "tau_ratios": report.tau_ratios, "failures": report.failures()});
        write_json(w.push(ctx.path("efficiency_summary.json")), &meta, &data)?;
    }
    Ok(EfficiencyOutput { report, written: w })
}

/// Runs one parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let ctx = match Context::new(&cli.opts) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let outcome: Result<(usize, usize, Written)> = match &cli.command {
        Command::Solve { voltage, rates } => cmd_solve(&ctx, *voltage, *rates).map(|o| (0, 1, o.written)),
        Command::Sweep => cmd_sweep_voltage(&ctx).map(|o| (o.failures(), o.rows.len(), o.written)),
        Command::Spectrum { voltage } => cmd_spectrum(&ctx, *voltage).map(|o| (0, 1, o.written)),
        Command::Efficiency { voltage } => {
            cmd_efficiency_study(&ctx, *voltage).map(|o| (o.report.failures(), o.report.points.len(), o.written))
        }
    };
    match outcome {
        Ok((failed, total, written)) => {
            for f in &written.files {
                println!("{}", f.display());
            }
            if failed == 0 {
                EXIT_OK
            } else if failed < total {
                eprintln!("warning: {failed} of {total} points failed");
                EXIT_PARTIAL
            } else {
                eprintln!("error: all {total} points failed");
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
