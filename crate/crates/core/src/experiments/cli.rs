//! The `lpe` command line.
//!
//! Exit status: 0 on success, 1 when a check fails (or a run aborts), 2 on
//! usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use super::config::{ExperimentSection, GridConfig, InitialData, NormConfig, RunConfig};
use super::report::ExperimentReport;
use super::suites::{run_suite, Suite, SuiteParams};
use super::{bona_smith_experiment, continuity_assembly, lipschitz_lowernorm_experiment};
use crate::calibration;
use crate::error::{Error, Result};
use crate::euler::{solve, SolverConfig};
use crate::field::io::{read_field, write_field, FieldData};
use crate::field::random::{random_vector, SpectrumSpec};
use crate::field::GridField;
use crate::iteration::{cauchy_report, iterate, DEFAULT_MEMBERS};
use crate::lp_bank::{LPFilterBank, Profile};
use crate::norms::{norm_components, Exponent, Flavor, NormSpec};

#[derive(Debug, Parser)]
#[command(name = "lpe", version, about = "Littlewood-Paley analysis and Euler experiments on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Grid points per axis (power of two, at least 8).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    /// Integrability exponent; a number or `inf`.
    #[arg(long)]
    p: Option<String>,
    /// Summability exponent; a number or `inf`.
    #[arg(long)]
    q: Option<String>,
    /// Final time.
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON run configuration; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Norm of a scalar or vector field file.
    Norm {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        homogeneous: bool,
        #[arg(long)]
        besov: bool,
    },
    /// Write the dyadic blocks of a scalar field file.
    Decompose {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a named verification corpus.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
        /// Corpus size (defaults to the suite's calibrated size).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Integrate the Euler equations and write a trajectory.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        record_every: Option<usize>,
    },
    /// Build the successive-approximation ladder.
    Iterate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_MEMBERS)]
        members: usize,
    },
    BonaSmith {
        #[command(flatten)]
        common: Common,
    },
    Lipschitz {
        #[command(flatten)]
        common: Common,
    },
    Continuity {
        #[command(flatten)]
        common: Common,
    },
    /// Re-measure the calibration maxima of every suite.
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_exponent(text: &str) -> Result<Exponent> {
    let v = serde_json::from_str::<Exponent>(text)
        .or_else(|_| serde_json::from_value::<Exponent>(json!(text)))
        .map_err(|_| Error::Argument(format!("invalid exponent '{text}'")))?;
    v.validate("exponent")?;
    Ok(v)
}

impl Common {
    fn run_config(&self, kind: &str) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig {
                grid: GridConfig { n: 64, dim: 2 },
                norm: NormConfig { s: 3.0, p: Exponent::Finite(1.0), q: Exponent::Finite(1.0), homogeneous: false },
                solver: SolverConfig::new(1e-3, 0.1).with_record_every(10),
                experiment: ExperimentSection {
                    kind: kind.to_string(),
                    n_list: vec![3, 4, 5],
                    eps_list: vec![1e-1, 1e-2, 1e-3, 1e-4],
                    seed: 0,
                    initial: InitialData::default(),
                },
            },
        };
        if let Some(n) = self.n {
            cfg.grid.n = n;
        }
        if let Some(d) = self.dim {
            cfg.grid.dim = d;
        }
        if let Some(s) = self.s {
            cfg.norm.s = s;
        }
        if let Some(p) = &self.p {
            cfg.norm.p = parse_exponent(p)?;
        }
        if let Some(q) = &self.q {
            cfg.norm.q = parse_exponent(q)?;
        }
        if let Some(t) = self.t_final {
            cfg.solver.t_final = t;
        }
        if let Some(dt) = self.dt {
            cfg.solver.dt = dt;
        }
        if let Some(seed) = self.seed {
            cfg.experiment.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).unwrap_or_default());
}

fn emit(report: &ExperimentReport, out: Option<&Path>) -> Result<()> {
    if let Some(dir) = out {
        report.write_to(dir)?;
    }
    println!("{}", report.to_json()?);
    Ok(())
}

fn spec_from(common: &Common, homogeneous: bool, besov: bool) -> Result<NormSpec> {
    let s = common.s.unwrap_or(0.0);
    let p = common.p.as_deref().map(parse_exponent).transpose()?.unwrap_or(Exponent::Finite(2.0));
    let q = common.q.as_deref().map(parse_exponent).transpose()?.unwrap_or(Exponent::Finite(2.0));
    let spec = NormSpec { s, p, q, homogeneous, flavor: if besov { Flavor::Besov } else { Flavor::TriebelLizorkin } };
    spec.validate()?;
    Ok(spec)
}

fn perturbation_direction(cfg: &RunConfig) -> Result<crate::field::VectorField> {
    let grid = cfg.grid.grid()?;
    let hi = (grid.dealias_cutoff() / 2).max(1) as f64;
    random_vector(grid, &SpectrumSpec::new(2.0, 1.0, hi, cfg.experiment.seed.wrapping_add(1)))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Norm { file, common, homogeneous, besov } => {
            let data = read_field(&file)?;
            let bank = LPFilterBank::new(data.grid(), Profile::SmoothStep);
            let spec = spec_from(&common, homogeneous, besov)?;
            let comps: Vec<GridField> = match data {
                FieldData::Scalar(f) => vec![f],
                FieldData::Vector(u) => u.into_components(),
            };
            let value = norm_components(&bank, &comps, &spec)?;
            print_json(&json!({ "file": file, "norm_spec": spec, "norm": value }));
            Ok(0)
        }
        Command::Decompose { file, common } => {
            let f = read_field(&file)?.into_scalar()?;
            let bank = LPFilterBank::new(f.grid(), Profile::SmoothStep);
            let dec = bank.decompose(&f)?;
            let out = common.out_dir("decomposition");
            fs::create_dir_all(out.join("fields"))?;
            write_field(out.join("fields/low.lpf"), &FieldData::Scalar(dec.low.clone()))?;
            let mut files = vec!["fields/low.lpf".to_string()];
            let mut l2 = vec![crate::norms::lp_norm(&dec.low, 2.0)];
            for (j, b) in dec.blocks.iter().enumerate() {
                let name = format!("fields/block_{j:02}.lpf");
                write_field(out.join(&name), &FieldData::Scalar(b.clone()))?;
                files.push(name);
                l2.push(crate::norms::lp_norm(b, 2.0));
            }
            let summary = json!({ "j_max": bank.j_max(), "files": files, "l2": l2 });
            fs::write(out.join("report.json"), serde_json::to_string_pretty(&summary)?)?;
            print_json(&summary);
            Ok(0)
        }
        Command::Verify { suite, common, count } => {
            let suite: Suite = suite.parse()?;
            let defaults = suite.default_params();
            let parse_or = |v: &Option<String>, d: f64| -> Result<f64> {
                Ok(v.as_deref().map(parse_exponent).transpose()?.map_or(d, Exponent::value))
            };
            let params = SuiteParams {
                n: common.n.unwrap_or(defaults.n),
                dim: common.dim.unwrap_or(defaults.dim),
                s: common.s.unwrap_or(defaults.s),
                p: parse_or(&common.p, defaults.p)?,
                q: parse_or(&common.q, defaults.q)?,
                seed: common.seed.unwrap_or(defaults.seed),
                count: count.unwrap_or(defaults.count),
            };
            let mut report = run_suite(suite, &params)?;
            let cal = calibration::lookup(suite, &params);
            if let Some(c) = cal {
                report = report.with_calibration(c.max);
            }
            emit(&report, common.out.as_deref())?;
            let ok = cal.is_none_or(|c| c.accepts(&report));
            if !ok {
                eprintln!("{suite}: max ratio {:.6e} outside 2x the calibration bracket", report.max);
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Solve { common, record_every } => {
            let mut cfg = common.run_config("solve")?;
            if let Some(r) = record_every {
                cfg.solver.record_every = r;
            }
            let u0 = cfg.initial_data()?;
            let bank = LPFilterBank::new(u0.grid(), Profile::SmoothStep);
            let spec = cfg.norm.spec()?;
            let traj = solve(&u0, &cfg.solver, Some(&bank), &[spec])?;
            let out = common.out_dir("solve");
            traj.write_to(&out)?;
            print_json(&json!({
                "manifest": out.join("manifest.json"),
                "records": traj.times.len(),
                "final_energy": traj.diagnostics.last().map(|d| d.energy),
            }));
            Ok(0)
        }
        Command::Iterate { common, members } => {
            let cfg = common.run_config("iterate")?;
            let u0 = cfg.initial_data()?;
            let bank = LPFilterBank::new(u0.grid(), Profile::SmoothStep);
            let ladder = iterate(&bank, &u0, members, &cfg.solver, &cfg.norm.spec()?)?;
            let out = common.out_dir("iterate");
            ladder.write_to(&out)?;
            let report = cauchy_report(&ladder)?;
            emit(&report, Some(&out))?;
            Ok(0)
        }
        Command::BonaSmith { common } => {
            let cfg = common.run_config("bona-smith")?;
            let u0 = cfg.initial_data()?;
            let bank = LPFilterBank::new(u0.grid(), Profile::SmoothStep);
            let report = bona_smith_experiment(&bank, &u0, &cfg.dependence()?)?;
            emit(&report, common.out.as_deref())?;
            Ok(0)
        }
        Command::Lipschitz { common } => {
            let cfg = common.run_config("lipschitz")?;
            let u0 = cfg.initial_data()?;
            let bank = LPFilterBank::new(u0.grid(), Profile::SmoothStep);
            let v0 = u0.add(&perturbation_direction(&cfg)?);
            let report = lipschitz_lowernorm_experiment(&bank, &u0, &v0, &cfg.dependence()?)?;
            emit(&report, common.out.as_deref())?;
            Ok(0)
        }
        Command::Continuity { common } => {
            let cfg = common.run_config("continuity")?;
            let u0 = cfg.initial_data()?;
            let bank = LPFilterBank::new(u0.grid(), Profile::SmoothStep);
            let w = perturbation_direction(&cfg)?;
            let psi = u0.axpy(1e-3 / w.max_magnitude(), &w);
            let dep = cfg.dependence()?;
            let level = *dep.n_list.first().ok_or_else(|| Error::Argument("N_list is empty".into()))?;
            let (_, report) = continuity_assembly(&bank, &u0, &psi, level, &dep)?;
            emit(&report, common.out.as_deref())?;
            Ok(0)
        }
        Command::Calibrate { out } => {
            let mut rows = Vec::new();
            for suite in Suite::ALL {
                let report = run_suite(suite, &suite.default_params())?;
                rows.push(json!({ "suite": suite, "min": report.min(), "max": report.max, "meta": report.metadata }));
            }
            let value = json!(rows);
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                fs::write(dir.join("calibration.json"), serde_json::to_string_pretty(&value)?)?;
            }
            print_json(&value);
            Ok(0)
        }
    }
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Argument(_) | Error::Representation { .. } => 2,
                _ => 1,
            }
        }
    }
}
