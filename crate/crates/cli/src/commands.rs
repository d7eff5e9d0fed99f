use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use adiagrover::bounds::{
    adiabatic_constant_c, asymptotic_tmin, gamma_max, infidelity_bracket, measurement_ratio,
    min_infidelity, min_runtime, mt_path_qsl, RateRule,
};
use adiagrover::experiments::{figure_bundle, fmt_num, FigureConfig};
use adiagrover::lindblad_sim::{integrate, integrate_full};
use adiagrover::schedules::{rc_runtime, tau, ScheduleKind};
use adiagrover::{DephasingModel, GroverInstance, Schedule, SimConfig};
use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use crate::config::{DephasingKind, FileConfig, Format, KindArg, MethodArg, Param};
use crate::{BoundsCommand, Cli, Command, ScheduleArgs, SimulateArgs, UsageError};

const DEFAULT_N: u32 = 10;
const DEFAULT_C: f64 = 0.25;

struct Ctx {
    file: FileConfig,
    out_dir: PathBuf,
}

impl Ctx {
    fn instance(&self, flag: Option<u32>) -> Result<GroverInstance> {
        Ok(GroverInstance::new(
            flag.or(self.file.problem.n_qubits).unwrap_or(DEFAULT_N),
        )?)
    }

    fn gamma(&self, flag: Option<Param>) -> Param {
        flag.or_else(|| self.file.dephasing.gamma.clone())
            .unwrap_or(Param::Named {
                scale: 1.0,
                name: "gmin".into(),
            })
    }

    fn kind(&self, flag: Option<KindArg>, method: Option<MethodArg>) -> ScheduleKind {
        let kind = flag.or(self.file.schedule.kind).unwrap_or(KindArg::Optimal);
        kind.resolve(method.or(self.file.schedule.method).unwrap_or_default())
    }

    fn out(&self, sub: &str) -> Result<PathBuf> {
        let dir = if sub.is_empty() {
            self.out_dir.clone()
        } else {
            self.out_dir.join(sub)
        };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| file.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = Ctx { file, out_dir };
    match cli.command {
        Command::Schedule(a) => schedule(&ctx, a),
        Command::Simulate(a) => simulate(&ctx, a),
        Command::Bounds(b) => bounds(&ctx, b),
        Command::Figure(f) => {
            let cfg = ctx.file.figure.clone().unwrap_or_default();
            figure(&ctx, f.name, &cfg)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn schedule(ctx: &Ctx, a: ScheduleArgs) -> Result<()> {
    let inst = ctx.instance(a.n)?;
    let kind = ctx.kind(a.kind, a.method);
    let gamma = match kind {
        ScheduleKind::OptimalClosed | ScheduleKind::OptimalNumeric => {
            let p = a
                .gamma
                .or_else(|| ctx.file.schedule.gamma.clone())
                .unwrap_or_else(|| ctx.gamma(None));
            Some(p.gamma(&inst)?)
        }
        _ => None,
    };
    let sched = Schedule::build(kind, &inst, gamma)?;
    let path = ctx.out("")?.join(format!("schedule_{}.csv", kind.label()));
    let mut w = create(&path)?;
    writeln!(w, "s,q,dq_ds")?;
    for row in sched.sample(a.samples)? {
        writeln!(
            w,
            "{},{},{}",
            fmt_num(row[0]),
            fmt_num(row[1]),
            fmt_num(row[2])
        )?;
    }
    w.flush()?;
    println!("{}", path.display());
    Ok(())
}

fn simulate(ctx: &Ctx, a: SimulateArgs) -> Result<()> {
    let f = &ctx.file;
    let inst = ctx.instance(a.n)?;
    let c = a.c.or(f.schedule.c).unwrap_or(DEFAULT_C);
    let dephasing = a.dephasing.or(f.dephasing.kind).unwrap_or_default();
    let (model, bath_gamma) = match dephasing {
        DephasingKind::Constant => {
            let g = ctx.gamma(a.gamma).gamma(&inst)?;
            (DephasingModel::Constant { gamma: g }, Some(g))
        }
        DephasingKind::GapTracking => {
            if a.gamma.is_some() {
                return Err(UsageError(
                    "--gamma applies to constant dephasing; use --kappa".into(),
                )
                .into());
            }
            let k = a
                .kappa
                .or_else(|| f.dephasing.kappa.clone())
                .unwrap_or(Param::Named {
                    scale: 1.0,
                    name: "max".into(),
                });
            (DephasingModel::GapTracking { kappa: k.kappa()? }, None)
        }
    };
    let kind = ctx.kind(a.schedule, a.method);
    let sched_gamma = match kind {
        ScheduleKind::OptimalClosed | ScheduleKind::OptimalNumeric => {
            let g = match a.schedule_gamma.or_else(|| f.schedule.gamma.clone()) {
                Some(p) => p.gamma(&inst)?,
                None => bath_gamma.filter(|&g| g > 0.0).unwrap_or(inst.g_min()),
            };
            Some(g)
        }
        _ => None,
    };
    let sched = Schedule::build(kind, &inst, sched_gamma)?;
    let t = a
        .total_time
        .or_else(|| f.sim.total_time.clone())
        .unwrap_or(Param::Named {
            scale: 1.0,
            name: "rc".into(),
        })
        .time(&inst, c)?;
    let mut cfg = SimConfig::new(t);
    cfg.rel_tol = a.rel_tol.or(f.sim.rel_tol).unwrap_or(cfg.rel_tol);
    cfg.abs_tol = a.abs_tol.or(f.sim.abs_tol).unwrap_or(cfg.abs_tol);
    cfg.n_samples = a.samples.or(f.sim.n_samples).unwrap_or(cfg.n_samples);
    let full = a.full || f.sim.full.unwrap_or(false);
    let traj = if full {
        integrate_full(&inst, &sched, &model, &cfg)?
    } else {
        integrate(&inst, &sched, &model, &cfg)?
    };

    let dir = ctx.out("")?;
    let format = a.format.or(f.output.format).unwrap_or_default();
    let traj_path = match format {
        Format::Csv => {
            let p = dir.join("trajectory.csv");
            let mut w = create(&p)?;
            traj.write_csv(&mut w)?;
            w.flush()?;
            p
        }
        Format::Json => {
            let p = dir.join("trajectory.json");
            let mut buf = Vec::new();
            traj.write_csv(&mut buf)?;
            let text = String::from_utf8(buf)?;
            let mut lines = text.lines();
            let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
            let rows: Vec<Value> = lines
                .map(|l| {
                    let obj: Map<String, Value> = header
                        .iter()
                        .zip(l.split(','))
                        .map(|(k, v)| (k.to_string(), json!(v.parse::<f64>().unwrap_or(f64::NAN))))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            let mut w = create(&p)?;
            serde_json::to_writer_pretty(&mut w, &rows)?;
            writeln!(w)?;
            w.flush()?;
            p
        }
    };

    let purities: Vec<f64> = traj.samples.iter().map(|x| x.rho.purity()).collect();
    let d = traj.diagnostics;
    let summary = json!({
        "n_qubits": inst.n_qubits(),
        "dephasing": match dephasing { DephasingKind::Constant => "constant", DephasingKind::GapTracking => "gap-tracking" },
        "gamma": bath_gamma,
        "kappa": match model { DephasingModel::GapTracking { kappa } => Some(kappa), _ => None },
        "schedule": kind.label(),
        "schedule_gamma": sched_gamma,
        "total_time": t,
        "full_space": full,
        "final_fidelity": traj.final_fidelity(),
        "tunneling": 1.0 - traj.final_fidelity(),
        "min_purity": purities.iter().cloned().fold(f64::INFINITY, f64::min),
        "max_purity": purities.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        "n_steps": d.n_steps,
        "n_rejected": d.n_rejected,
        "n_evaluations": d.n_evaluations,
        "max_trace_drift": d.max_trace_drift,
        "max_hermiticity_residual": d.max_hermiticity_residual,
        "min_eigenvalue": d.min_eigenvalue,
    });
    let summary_path = dir.join("summary.json");
    let mut w = create(&summary_path)?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;
    println!("{}", traj_path.display());
    println!("{}", summary_path.display());
    Ok(())
}

fn bounds(ctx: &Ctx, b: BoundsCommand) -> Result<()> {
    let report = match b {
        BoundsCommand::Imin {
            n,
            gamma,
            total_time,
        } => {
            let inst = ctx.instance(n)?;
            let g = ctx.gamma(gamma).gamma(&inst)?;
            json!({
                "n_qubits": inst.n_qubits(),
                "gamma": g,
                "total_time": total_time,
                "bracket": infidelity_bracket(&inst, g)?,
                "tau": tau(&inst, g)?.value,
                "min_infidelity": min_infidelity(&inst, g, total_time)?,
            })
        }
        BoundsCommand::Tmin { n, gamma, target } => {
            let inst = ctx.instance(n)?;
            let g = ctx.gamma(gamma).gamma(&inst)?;
            let r = asymptotic_tmin(&inst, g, target, None)?;
            json!({
                "n_qubits": inst.n_qubits(),
                "gamma": g,
                "target_infidelity": target,
                "t_min": min_runtime(&inst, g, target)?,
                "alpha": r.alpha,
                "regime": r.regime,
                "asymptotic_tmin": r.asymptotic_tmin,
                "rel_deviation": r.rel_deviation,
            })
        }
        BoundsCommand::GammaMax { gap, eps } => {
            let x = measurement_ratio(eps)?;
            json!({
                "gap": gap,
                "epsilon": eps,
                "x": x,
                "gamma_max": gamma_max(gap, eps)?,
            })
        }
        BoundsCommand::Cbound {
            n,
            gamma,
            a,
            schedule,
            method,
            norm,
            s_end,
        } => {
            let inst = ctx.instance(n)?;
            let rule = match a {
                Some(a) => RateRule::PowerLaw { gamma0: 1.0, a },
                None => RateRule::Constant {
                    gamma: ctx.gamma(gamma).gamma(&inst)?,
                },
            };
            let g = rule.rate(&inst);
            let kind = ctx.kind(schedule, method);
            let sched = Schedule::build(kind, &inst, Some(g))?;
            let c = adiabatic_constant_c(&inst, &sched, rule, s_end, norm.into())?;
            json!({
                "n_qubits": inst.n_qubits(),
                "gamma": g,
                "schedule": kind.label(),
                "s_end": s_end,
                "c": c.value,
                "boundary_start": c.boundary_start,
                "boundary_end": c.boundary_end,
                "integral": c.integral,
            })
        }
        BoundsCommand::Qsl { n, eps_adiab } => {
            let inst = ctx.instance(n)?;
            let t_qsl = mt_path_qsl(&inst)?;
            let t_rc = rc_runtime(&inst, eps_adiab)?;
            json!({
                "n_qubits": inst.n_qubits(),
                "eps_adiab": eps_adiab,
                "t_qsl": t_qsl,
                "t_rc": t_rc,
                "ratio": t_rc / t_qsl,
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn figure(ctx: &Ctx, name: adiagrover::experiments::FigureName, cfg: &FigureConfig) -> Result<()> {
    let root = ctx.out("")?;
    for p in figure_bundle(name, &root, cfg)? {
        println!("{}", p.display());
    }
    Ok(())
}
