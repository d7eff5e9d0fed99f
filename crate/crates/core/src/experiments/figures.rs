use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    c_scaling_experiment, contour_min_infidelity, find_min_time, fmt_num, logspace,
    tmin_vs_gamma_curve, MinTimeQuery, Protocol, SearchRange,
};
use crate::bounds::{kappa_max, mt_path_qsl, RateRule, SuperNorm};
use crate::error::{config, Error, Result};
use crate::grover_model::GroverInstance;
use crate::lindblad_sim::{integrate, DephasingModel, SimConfig};
use crate::schedules::{rc_runtime, Schedule, ScheduleKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureName {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl FigureName {
    pub const ALL: [FigureName; 7] = [
        Self::Fig1a,
        Self::Fig1b,
        Self::Fig1c,
        Self::Fig2,
        Self::Fig3,
        Self::Fig4,
        Self::Fig5,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fig1a => "fig1a",
            Self::Fig1b => "fig1b",
            Self::Fig1c => "fig1c",
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for FigureName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| config(format!("unknown figure '{s}'")))
    }
}

/// Parameters for every figure bundle. Defaults reproduce the reference
/// figures; rates given as multiples of `g_min` are marked `_gmin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureConfig {
    pub n_qubits: u32,
    pub adiabatic_c: f64,
    pub samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub bloch_rates_gmin: Vec<f64>,
    pub contour_n: Vec<u32>,
    pub contour_gamma_exp: (f64, f64),
    pub contour_points: usize,
    pub contour_time: f64,
    pub tmin_n: u32,
    pub tmin_alpha_exp: (f64, f64),
    pub tmin_points: usize,
    pub target_fidelity: f64,
    pub c_scaling_a: Vec<f64>,
    pub c_scaling_n: Vec<u32>,
    pub min_time_n: Vec<u32>,
    pub min_time_search: SearchRange,
    pub min_time_samples: usize,
}

impl Default for FigureConfig {
    fn default() -> Self {
        Self {
            n_qubits: 10,
            adiabatic_c: 0.25,
            samples: 1025,
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            bloch_rates_gmin: vec![0.1, 1.0, 10.0],
            contour_n: (1..=11).collect(),
            contour_gamma_exp: (-3.0, 1.0),
            contour_points: 81,
            contour_time: 200.0,
            tmin_n: 30,
            tmin_alpha_exp: (-4.0, 4.0),
            tmin_points: 161,
            target_fidelity: 0.9,
            c_scaling_a: vec![0.1, 1.0, 1.5],
            c_scaling_n: (4..=10).collect(),
            min_time_n: (3..=12).collect(),
            min_time_search: SearchRange::default(),
            min_time_samples: 257,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

struct Bundle {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Bundle {
    fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        create(&path)
    }
}

/// Writes the data files for `name` into `out_root/<name>/` plus a
/// `meta.json`, and returns every path written.
pub fn figure_bundle(
    name: FigureName,
    out_root: &Path,
    cfg: &FigureConfig,
) -> Result<Vec<PathBuf>> {
    let start = Instant::now();
    let dir = out_root.join(name.as_str());
    fs::create_dir_all(&dir)?;
    let mut b = Bundle {
        dir,
        files: Vec::new(),
    };
    match name {
        FigureName::Fig1a => fig1a(&mut b, cfg)?,
        FigureName::Fig1b => fig1b(&mut b, cfg)?,
        FigureName::Fig1c => fig1c(&mut b, cfg)?,
        FigureName::Fig2 => {
            let (lo, hi) = cfg.contour_gamma_exp;
            let r = contour_min_infidelity(
                &cfg.contour_n,
                &logspace(lo, hi, cfg.contour_points),
                cfg.contour_time,
            )?;
            r.write_csv(b.file("contour.csv")?)?;
        }
        FigureName::Fig3 => {
            let inst = GroverInstance::new(cfg.tmin_n)?;
            let (lo, hi) = cfg.tmin_alpha_exp;
            let gammas: Vec<f64> = logspace(lo, hi, cfg.tmin_points)
                .into_iter()
                .map(|a| a * inst.g_min())
                .collect();
            tmin_vs_gamma_curve(cfg.tmin_n, cfg.target_fidelity, &gammas)?
                .write_csv(b.file("tmin_vs_gamma.csv")?)?;
        }
        FigureName::Fig4 => {
            let mut fits = Vec::new();
            for kind in [ScheduleKind::Linear, ScheduleKind::OptimalClosed] {
                let r = c_scaling_experiment(
                    &cfg.c_scaling_a,
                    &cfg.c_scaling_n,
                    kind,
                    SuperNorm::Spectral,
                )?;
                r.write_csv(b.file(&format!("c_scaling_{}.csv", kind.label()))?)?;
                fits.extend(r.fits);
            }
            let mut w = b.file("fits.csv")?;
            writeln!(w, "label,slope,intercept,r_squared,accepted")?;
            for f in &fits {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    f.label,
                    fmt_num(f.fit.slope),
                    fmt_num(f.fit.intercept),
                    fmt_num(f.fit.r_squared),
                    f.accepted
                )?;
            }
        }
        FigureName::Fig5 => fig5(&mut b, cfg)?,
    }
    let mut files: Vec<String> = b
        .files
        .iter()
        .filter_map(|p| p.file_name())
        .map(|f| f.to_string_lossy().into_owned())
        .collect();
    files.push("meta.json".into());
    let meta = serde_json::json!({
        "figure": name.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "files": files,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    let meta_path = b.dir.join("meta.json");
    let mut w = create(&meta_path)?;
    serde_json::to_writer_pretty(&mut w, &meta).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    b.files.push(meta_path);
    Ok(b.files)
}

fn fig1a(b: &mut Bundle, cfg: &FigureConfig) -> Result<()> {
    let inst = GroverInstance::new(cfg.n_qubits)?;
    let g = inst.g_min();
    let scheds = [
        Schedule::linear(),
        Schedule::roland_cerf(&inst),
        Schedule::optimal_closed(&inst, g)?,
        Schedule::optimal_numeric(&inst, g)?,
    ];
    let cols: Vec<Vec<[f64; 3]>> = scheds
        .iter()
        .map(|s| s.sample(cfg.samples))
        .collect::<Result<_>>()?;
    let mut w = b.file("schedules.csv")?;
    writeln!(w, "s,q_linear,q_rc,q_optimal_closed,q_optimal_numeric")?;
    for i in 0..cfg.samples {
        let row: Vec<String> = std::iter::once(cols[0][i][0])
            .chain(cols.iter().map(|c| c[i][1]))
            .map(fmt_num)
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn sim_cfg(cfg: &FigureConfig, t: f64) -> SimConfig {
    SimConfig::new(t)
        .with_tolerances(cfg.rel_tol, cfg.abs_tol)
        .with_samples(cfg.samples)
}

fn fig1b(b: &mut Bundle, cfg: &FigureConfig) -> Result<()> {
    let inst = GroverInstance::new(cfg.n_qubits)?;
    let g = inst.g_min();
    let t = rc_runtime(&inst, cfg.adiabatic_c)?;
    let model = DephasingModel::Constant { gamma: g };
    let sc = sim_cfg(cfg, t);
    let scheds = [
        Schedule::linear(),
        Schedule::roland_cerf(&inst),
        Schedule::optimal_closed(&inst, g)?,
    ];
    let trajs = scheds
        .iter()
        .map(|s| integrate(&inst, s, &model, &sc))
        .collect::<Result<Vec<_>>>()?;
    let mut w = b.file("fidelity.csv")?;
    writeln!(w, "s,fidelity_lz,fidelity_rc,fidelity_opt")?;
    for i in 0..trajs[0].samples.len() {
        let row: Vec<String> = std::iter::once(trajs[0].samples[i].s)
            .chain(trajs.iter().map(|tr| tr.samples[i].fidelity))
            .map(fmt_num)
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn fig1c(b: &mut Bundle, cfg: &FigureConfig) -> Result<()> {
    let inst = GroverInstance::new(cfg.n_qubits)?;
    let g = inst.g_min();
    let sc = sim_cfg(cfg, rc_runtime(&inst, cfg.adiabatic_c)?);
    let unitary = DephasingModel::Constant { gamma: 0.0 };
    integrate(&inst, &Schedule::linear(), &unitary, &sc)?
        .write_bloch_csv(b.file("bloch_unitary_lz.csv")?)?;
    integrate(&inst, &Schedule::roland_cerf(&inst), &unitary, &sc)?
        .write_bloch_csv(b.file("bloch_unitary_rc.csv")?)?;
    for &m in &cfg.bloch_rates_gmin {
        let gamma = m * g;
        let traj = integrate(
            &inst,
            &Schedule::optimal_closed(&inst, gamma)?,
            &DephasingModel::Constant { gamma },
            &sc,
        )?;
        traj.write_bloch_csv(b.file(&format!("bloch_optimal_{}gmin.csv", fmt_num(m)))?)?;
    }
    Ok(())
}

fn fig5(b: &mut Bundle, cfg: &FigureConfig) -> Result<()> {
    let protocols = [
        Protocol::DephasingConstant {
            rule: RateRule::PowerLaw {
                gamma0: 1.0,
                a: 1.0,
            },
        },
        Protocol::DephasingGapTracking { kappa: kappa_max() },
        Protocol::UnitaryRc,
    ];
    let mut w = b.file("min_time.csv")?;
    writeln!(
        w,
        "n,t_dephasing_constant,t_gap_tracking,t_unitary_rc,t_mt_qsl"
    )?;
    for &n in &cfg.min_time_n {
        let mut row = vec![n.to_string()];
        for p in protocols {
            let mut q = MinTimeQuery::new(p, cfg.target_fidelity, n);
            q.search = cfg.min_time_search;
            q.rel_tol = cfg.rel_tol;
            q.abs_tol = cfg.abs_tol;
            q.n_samples = cfg.min_time_samples;
            row.push(fmt_num(find_min_time(&q)?.t_min));
        }
        row.push(fmt_num(mt_path_qsl(&GroverInstance::new(n)?)?));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
