use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use westplate::assembly::{Assembler, Mode};
use westplate::basis::BasisSet;
use westplate::fields::CoefficientField;
use westplate::report;
use westplate::scenario::Scenario;
use westplate::study;
use westplate::Error;

#[derive(Parser)]
#[command(name = "westplate", version, about = "Spectral-Galerkin Westervelt-plate simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue tables of the basis.
    BasisInfo(Common),
    /// One run: trajectory, energies, audits and the Picard log.
    Simulate(Common),
    /// Temporal and spatial convergence against a manufactured field.
    Mms(Common),
    /// Exponential decay fit of the higher-order energy.
    Decay(Common),
    /// Contraction ratios over a sweep of data scales.
    Picard(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::BasisInfo(_) => "basis-info",
            Command::Simulate(_) => "simulate",
            Command::Mms(_) => "mms",
            Command::Decay(_) => "decay",
            Command::Picard(_) => "picard",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::BasisInfo(c) | Command::Simulate(c) | Command::Mms(c) | Command::Decay(c) | Command::Picard(c) => c,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `solver.mode`: full or paper.
    #[arg(long)]
    mode: Option<Mode>,
    /// Directory for dense CSV dumps of the system blocks at t = 0.
    #[arg(long)]
    dump_system: Option<PathBuf>,
}

/// What a subcommand produced: files written, a summary for the manifest, and
/// whether its thresholds held.
struct Outcome {
    files: Vec<String>,
    summary: Value,
    pass: bool,
    failure: Option<Error>,
}

struct Run<'a> {
    out: &'a Path,
    files: Vec<String>,
}

impl Run<'_> {
    fn write(&mut self, name: &str, body: &str) -> Result<(), Error> {
        fs::write(self.out.join(name), body).map_err(|e| Error::Parse { location: name.into(), message: e.to_string() })?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn dump_system(dir: &Path, sc: &Scenario, basis: &BasisSet) -> Result<(), Error> {
    let io = |e: std::io::Error| Error::Parse { location: dir.display().to_string(), message: e.to_string() };
    fs::create_dir_all(dir).map_err(io)?;
    let asm = Assembler::new(basis, sc.params, sc.mode, CoefficientField::Unit)?;
    let snap = asm.snapshot(0.0)?;
    let mut blocks = vec![];
    for (name, m) in report::system_blocks(&snap) {
        fs::write(dir.join(format!("{name}.csv")), report::matrix_csv(&m)).map_err(io)?;
        blocks.push(json!({ "name": name, "rows": m.nrows(), "cols": m.ncols() }));
    }
    let manifest = json!({ "mode": sc.mode.name(), "t": 0.0, "blocks": blocks });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap() + "\n").map_err(io)
}

fn execute(cmd: &Command, sc: &Scenario, basis: &BasisSet, run: &mut Run<'_>, config_digest: &str) -> Result<Outcome, Error> {
    let outs = &sc.file.outputs;
    let mut failure = None;
    let (summary, pass) = match cmd {
        Command::BasisInfo(_) => {
            run.write("basis.csv", &report::basis_info_csv(basis))?;
            (json!({ "n_acoustic": basis.n_acoustic(), "n_plate": basis.n_plate() }), true)
        }
        Command::Simulate(_) => {
            let r = study::run_simulate(sc, basis)?;
            if let Some(name) = &outs.trajectory {
                run.write(name, &report::trajectory_csv(&r.trajectory))?;
            }
            if let Some(name) = &outs.energy {
                run.write(name, &report::energy_csv(&r.energy))?;
            }
            if let Some(name) = &outs.audit {
                let audits: Vec<Value> = r
                    .audits
                    .iter()
                    .map(|a| {
                        json!({
                            "which": a.which.name(),
                            "C_hat": a.c_hat,
                            "t_argmax": a.t_argmax,
                            "inputs_digest": config_digest,
                        })
                    })
                    .collect();
                run.write(name, &(serde_json::to_string_pretty(&audits).unwrap() + "\n"))?;
            }
            if let (Some(name), Some(log)) = (&outs.picard_log, &r.picard) {
                run.write(name, &report::picard_log_csv(log))?;
            }
            failure = r.failure();
            let last = r.energy.len() - 1;
            let summary = json!({
                "energy_initial": r.energy.total(0),
                "energy_final": r.energy.total(last),
                "picard_iterations": r.picard.as_ref().map(|l| l.iterations()),
                "picard_max_ratio": r.picard.as_ref().and_then(|l| l.max_ratio()),
                "self_consistency": r.picard.as_ref().and_then(|l| l.self_consistency),
            });
            (summary, true)
        }
        Command::Mms(_) => {
            let r = study::run_mms(sc, basis)?;
            let mut body = report::convergence_csv("temporal", &r.temporal);
            let spatial = report::convergence_csv("spatial", &r.spatial);
            body.push_str(spatial.split_once('\n').map_or("", |(_, rest)| rest));
            run.write("mms.csv", &body)?;
            run.write("mms.json", &(serde_json::to_string_pretty(&r).unwrap() + "\n"))?;
            (json!({ "temporal_orders": r.temporal_orders, "spatial_reduction": r.spatial_reduction }), r.pass)
        }
        Command::Decay(_) => {
            let r = study::run_decay(sc, basis)?;
            if let Some(name) = &outs.energy {
                run.write(name, &report::energy_csv(&r.energy))?;
            }
            run.write("decay.json", &(serde_json::to_string_pretty(&r).unwrap() + "\n"))?;
            (json!({ "rate": r.rate, "goodness": r.goodness, "energy_ratio": r.energy_ratio }), r.pass)
        }
        Command::Picard(_) => {
            let r = study::run_picard_study(sc, basis)?;
            run.write("picard_study.csv", &report::picard_study_csv(&r.rows))?;
            run.write("picard_study.json", &(serde_json::to_string_pretty(&r).unwrap() + "\n"))?;
            (json!({ "nondecreasing": r.nondecreasing }), r.pass)
        }
    };
    Ok(Outcome { files: run.files.clone(), summary, pass, failure })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = &cli.command;
    let args = cmd.common();
    let clock = Instant::now();
    if let Err(e) = fs::create_dir_all(&args.out) {
        eprintln!("cannot create {}: {e}", args.out.display());
        return ExitCode::from(2);
    }

    let mut manifest = json!({
        "command": cmd.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": args.scenario.display().to_string(),
    });
    let mut run = Run { out: &args.out, files: vec![] };
    let result = (|| -> Result<Outcome, Error> {
        let bytes = fs::read(&args.scenario)
            .map_err(|e| Error::Parse { location: args.scenario.display().to_string(), message: e.to_string() })?;
        let config_digest = digest(&bytes);
        manifest["config_digest"] = json!(config_digest);
        let text = String::from_utf8(bytes).map_err(|e| Error::Parse { location: "/".into(), message: e.to_string() })?;
        let mut sc = Scenario::parse(&text)?;
        if let Some(m) = args.mode {
            sc = sc.with_mode(m);
        }
        manifest["mode"] = json!(sc.mode.name());
        manifest["params"] = json!(sc.params);
        manifest["n_acoustic"] = json!(sc.basis.n_acoustic);
        manifest["n_plate"] = json!(sc.basis.n_plate);
        manifest["dt"] = json!(sc.dt);
        manifest["steps"] = json!(sc.steps);
        let basis = sc.build_basis()?;
        if let Some(dir) = &args.dump_system {
            dump_system(dir, &sc, &basis)?;
        }
        execute(cmd, &sc, &basis, &mut run, &config_digest)
    })();

    let (code, error) = match &result {
        Ok(o) if o.failure.is_some() => (3, o.failure.clone()),
        Ok(o) if !o.pass => (4, None),
        Ok(_) => (0, None),
        Err(e) if e.is_validation() => (2, Some(e.clone())),
        Err(e) => (3, Some(e.clone())),
    };
    match &result {
        Ok(o) => {
            manifest["outputs"] = json!(o.files);
            manifest["summary"] = o.summary.clone();
            manifest["thresholds_pass"] = json!(o.pass);
        }
        Err(_) => manifest["outputs"] = json!(run.files),
    }
    manifest["status"] = json!(if code == 0 { "ok" } else { "failed" });
    manifest["exit_code"] = json!(code);
    if let Some(e) = &error {
        manifest["error"] = json!({ "class": e.class(), "location": e.location(), "message": e.to_string() });
        eprintln!("{}: {e}", e.class());
    }
    manifest["wall_seconds"] = json!(clock.elapsed().as_secs_f64());
    let body = serde_json::to_string_pretty(&manifest).unwrap() + "\n";
    if let Err(e) = fs::write(args.out.join("manifest.json"), body) {
        eprintln!("cannot write manifest: {e}");
    }
    if let Ok(o) = &result {
        println!("{}", serde_json::to_string(&o.summary).unwrap());
        if !o.pass {
            eprintln!("study thresholds not met");
        }
    }
    ExitCode::from(code)
}
