//! Subcommands behind the command-line driver and the files they persist.
//!
//! Each command writes into one output directory holding a `manifest.json`
//! that echoes the resolved configuration and lists every data file.
//! CSV files use `,` separators, one header line and `{:.16e}` numbers so
//! values round-trip exactly and reruns are byte-identical.

use crate::config::Config;
use crate::diagnostics::{
    exponent_fit, flattening_from_series, regime_classify, tail_fit_on, LevelSeries, LineFit, TailFits,
};
use crate::error::{Error, Result};
use crate::evolution::{run_with, RunSpec, RunStatus};
use crate::operator::symbol_error_with;
use crate::grid::{ExteriorDatum, GridState};
use crate::subsolution::{certify, certify_barrier, threshold_search, CertificationReport, Zone};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST: &str = "manifest.json";
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifestStatus {
    Completed,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Resolved configuration in the config file format.
    pub config: String,
    pub version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub status: ManifestStatus,
    pub abort_time: Option<f64>,
    pub abort_reason: Option<String>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            reason: e.to_string(),
        })
    }

    pub fn resolved_config(&self) -> Result<Config> {
        self.config.parse()
    }
}

/// What a command ended with, beyond hard errors.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed,
    Aborted { time: f64, reason: String },
    CertificationFailed,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Completed => EXIT_OK,
            Outcome::Aborted { .. } => EXIT_NUMERICAL,
            Outcome::CertificationFailed => EXIT_CERTIFICATION,
        }
    }
}

/// Exit code for a command that failed with `e`.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::Parse { .. } | Error::Io { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Clone)]
pub struct CommandReport {
    pub outcome: Outcome,
    pub manifest: RunManifest,
    /// Human-readable lines for the terminal.
    pub lines: Vec<String>,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Output directory that remembers what was written into it.
struct OutDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutDir {
    /// Creates `root`, clearing the outputs of an earlier command. A
    /// non-empty directory without a manifest is refused.
    fn prepare(root: &Path) -> Result<Self> {
        if root.exists() {
            let mut entries = fs::read_dir(root).map_err(|e| Error::io(root, e))?.peekable();
            if entries.peek().is_some() {
                let old = RunManifest::load(root).map_err(|_| Error::Io {
                    path: root.display().to_string(),
                    source: std::io::Error::new(
                        std::io::ErrorKind::AlreadyExists,
                        "directory is not empty and holds no manifest",
                    ),
                })?;
                for f in &old.files {
                    let p = root.join(&f.path);
                    if p.is_file() {
                        fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
                    }
                }
                let snaps = root.join("snapshots");
                if snaps.is_dir() && fs::read_dir(&snaps).map(|mut d| d.next().is_none()).unwrap_or(false) {
                    fs::remove_dir(&snaps).map_err(|e| Error::io(&snaps, e))?;
                }
                let m = root.join(MANIFEST);
                fs::remove_file(&m).map_err(|e| Error::io(&m, e))?;
            }
        }
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, rel: &str, contents: &str) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(rel.to_string());
        Ok(())
    }

    fn finish(
        self,
        command: &str,
        cfg: &Config,
        started: f64,
        outcome: &Outcome,
    ) -> Result<RunManifest> {
        let mut files = Vec::with_capacity(self.files.len());
        for rel in &self.files {
            let p = self.root.join(rel);
            let bytes = fs::metadata(&p).map_err(|e| Error::io(&p, e))?.len();
            files.push(FileEntry { path: rel.clone(), bytes });
        }
        let (status, abort_time, abort_reason) = match outcome {
            Outcome::Aborted { time, reason } => (ManifestStatus::Aborted, Some(*time), Some(reason.clone())),
            _ => (ManifestStatus::Completed, None, None),
        };
        let manifest = RunManifest {
            command: command.to_string(),
            config: cfg.to_text(),
            version: VERSION.to_string(),
            started_unix: started,
            finished_unix: unix_now(),
            status,
            abort_time,
            abort_reason,
            files,
        };
        let path = self.root.join(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn note(e: &Error) -> String {
    e.to_string().replace([',', '\n'], ";")
}

fn snapshot_csv(g: &GridState) -> String {
    let mut out = String::with_capacity(48 * g.len() + 8);
    out.push_str("x,u\n");
    for (j, &u) in g.values.iter().enumerate() {
        let _ = writeln!(out, "{},{}", num(g.x(j)), num(u));
    }
    out
}

const SNAPSHOT_INDEX_HEADER: &str = "index,t,left_x,dx,n,exterior_left,exterior_right,file";

fn snapshot_file(k: usize) -> String {
    format!("snapshots/u_{k:04}.csv")
}

fn snapshot_index_row(k: usize, g: &GridState) -> String {
    format!(
        "{k},{},{},{},{},{},{},{}\n",
        num(g.time),
        num(g.left_x),
        num(g.dx),
        g.len(),
        num(g.exterior.left),
        num(g.exterior.right),
        snapshot_file(k)
    )
}

fn levels_csv(levels: &[LevelSeries]) -> String {
    let mut out = String::from("t");
    for l in levels {
        let _ = write!(out, ",level_{:?}", l.lambda);
    }
    out.push('\n');
    let rows = levels.first().map_or(0, |l| l.samples.len());
    for i in 0..rows {
        out.push_str(&num(levels[0].samples[i].0));
        for l in levels {
            out.push(',');
            out.push_str(&num(l.samples[i].1));
        }
        out.push('\n');
    }
    out
}

/// Tail fits of one snapshot, or the reason there are none.
type TailRow = (f64, std::result::Result<TailFits, String>);

fn tail_row(cfg: &Config, g: &GridState) -> TailRow {
    let fits = tail_fit_on(&g.values, g.left_x, g.dx, cfg.kernel.s, cfg.diagnostics.tail_window).map_err(|e| note(&e));
    (g.time, fits)
}

/// Diagnostics derived from level series and per-snapshot tail fits.
/// `simulate` and `analyze` both render through here.
fn diagnostic_files(cfg: &Config, levels: &[LevelSeries], tails: &[TailRow]) -> Result<Vec<(&'static str, String)>> {
    let d = &cfg.diagnostics;
    let mut files = Vec::new();

    let mut exps = String::from("lambda,t_lo,t_hi,slope,intercept,rms,slope_stderr,samples,status\n");
    let mut fits: Vec<(f64, Option<LineFit>)> = Vec::new();
    for l in levels {
        let (lo, hi) = d.exponent_window;
        match exponent_fit(l, d.exponent_window) {
            Ok(f) => {
                let _ = writeln!(
                    exps,
                    "{},{},{},{},{},{},{},{},ok",
                    num(l.lambda),
                    num(lo),
                    num(hi),
                    num(f.slope),
                    num(f.intercept),
                    num(f.rms),
                    num(f.slope_stderr),
                    f.samples
                );
                fits.push((l.lambda, Some(f)));
            }
            Err(e) => {
                let nan = num(f64::NAN);
                let _ = writeln!(
                    exps,
                    "{},{},{},{nan},{nan},{nan},{nan},0,{}",
                    num(l.lambda),
                    num(lo),
                    num(hi),
                    note(&e)
                );
                fits.push((l.lambda, None));
            }
        }
    }
    files.push(("exponents.csv", exps));

    let report = regime_classify(cfg.kernel.s, cfg.reaction.beta)?;
    let mut regime = report.to_text();
    let _ = writeln!(regime, "summary = {}", report.summary());
    for (lambda, fit) in &fits {
        match fit {
            Some(f) => {
                let _ = writeln!(regime, "measured_slope_{lambda:?} = {}", num(f.slope));
            }
            None => {
                let _ = writeln!(regime, "measured_slope_{lambda:?} = unavailable");
            }
        }
    }
    files.push(("regime.txt", regime));

    if d.tail_fits {
        let mut out = String::from("t,c_fixed,exponent_fixed,residual_fixed,c_free,exponent_free,residual_free,points,status\n");
        for (t, row) in tails {
            match row {
                Ok(f) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},ok",
                        num(*t),
                        num(f.fixed.c),
                        num(f.fixed.exponent),
                        num(f.fixed.residual),
                        num(f.free.c),
                        num(f.free.exponent),
                        num(f.free.residual),
                        f.fixed.points
                    );
                }
                Err(reason) => {
                    let nan = num(f64::NAN);
                    let _ = writeln!(out, "{},{nan},{nan},{nan},{nan},{nan},{nan},0,{reason}", num(*t));
                }
            }
        }
        files.push(("tail_fits.csv", out));
    }

    if d.flattening {
        let series: Vec<(f64, f64)> = tails
            .iter()
            .filter_map(|(t, r)| r.as_ref().ok().map(|f| (*t, f.fixed.c)))
            .collect();
        let mut out = String::from("t,c\n");
        for &(t, c) in &series {
            let _ = writeln!(out, "{},{}", num(t), num(c));
        }
        files.push(("flattening.csv", out));
        let (lo, hi) = d.flattening_window;
        let mut fit = String::from("late_lo,late_hi,slope,intercept,max_rel_deviation,increasing_after_late_lo,status\n");
        match flattening_from_series(series, d.flattening_window) {
            Ok(f) => {
                let _ = writeln!(
                    fit,
                    "{},{},{},{},{},{},ok",
                    num(lo),
                    num(hi),
                    num(f.late_fit.slope),
                    num(f.late_fit.intercept),
                    num(f.max_rel_deviation),
                    f.strictly_increasing_after(lo)
                );
            }
            Err(e) => {
                let nan = num(f64::NAN);
                let _ = writeln!(fit, "{},{},{nan},{nan},{nan},false,{}", num(lo), num(hi), note(&e));
            }
        }
        files.push(("flattening_fit.csv", fit));
    }
    Ok(files)
}

/// Runs the evolution and writes snapshots, level series, diagnostics and
/// the manifest into `out`.
pub fn simulate(cfg: &Config, out: &Path) -> Result<CommandReport> {
    let started = unix_now();
    let spec = cfg.run_spec()?;
    let mut dir = OutDir::prepare(out)?;
    let mut index = String::from(SNAPSHOT_INDEX_HEADER);
    index.push('\n');
    let mut tails: Vec<TailRow> = Vec::new();
    let mut k = 0usize;
    let traj = run_with(&spec, |g| {
        dir.write(&snapshot_file(k), &snapshot_csv(g))?;
        index.push_str(&snapshot_index_row(k, g));
        if cfg.diagnostics.tail_fits || cfg.diagnostics.flattening {
            tails.push(tail_row(cfg, g));
        }
        k += 1;
        Ok(())
    })?;
    dir.write("snapshots.csv", &index)?;
    dir.write("levels.csv", &levels_csv(&traj.levels))?;
    for (name, text) in diagnostic_files(cfg, &traj.levels, &tails)? {
        dir.write(name, &text)?;
    }
    let m = &traj.monitors;
    let monitors = format!(
        "min_value,max_value,max_rise,monotone_violations,bound_flags,checked_profiles,steps,assemblies,max_len\n{},{},{},{},{},{},{},{},{}\n",
        num(m.min_value),
        num(m.max_value),
        num(m.max_rise),
        m.monotone_violations,
        m.bound_flags,
        m.checked_profiles,
        m.steps,
        m.assemblies,
        m.max_len
    );
    dir.write("monitors.csv", &monitors)?;

    let outcome = match &traj.status {
        RunStatus::Completed => Outcome::Completed,
        RunStatus::Aborted { time, reason } => Outcome::Aborted {
            time: *time,
            reason: reason.clone(),
        },
    };
    let manifest = dir.finish("simulate", cfg, started, &outcome)?;
    let mut lines = vec![format!(
        "simulate: {} snapshots, final t = {}, {} nodes",
        k,
        traj.final_state.time,
        traj.final_state.len()
    )];
    if let Outcome::Aborted { time, reason } = &outcome {
        lines.push(format!("aborted at t = {time}: {reason}"));
    }
    lines.extend(spectral_warning(&spec));
    Ok(CommandReport {
        outcome,
        manifest,
        lines,
    })
}

/// Symbol error on `cos x` for the configured operator; a line when it
/// exceeds 10%.
fn spectral_warning(spec: &RunSpec) -> Option<String> {
    let err = symbol_error_with(&spec.kernel, spec.split_gamma, 1.0, spec.dx, 50.0, spec.diagonal_tail).ok()?;
    (err > 0.1).then(|| {
        format!(
            "warning: {} diagonal tail gives relative symbol error {err:.3} on cos(x) at dx = {}",
            spec.diagonal_tail.label(),
            spec.dx
        )
    })
}

/// Reads a CSV with the given header into rows of fields.
fn read_csv(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |line: usize, reason: String| Error::Parse {
        path: path.display().to_string(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == header => {}
        Some((_, h)) => return Err(bad(1, format!("expected header `{header}`, got `{h}`"))),
        None => return Err(bad(1, "file is empty".into())),
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let fields: Vec<String> = line.split(',').map(str::to_string).collect();
        if fields.len() != width {
            return Err(bad(i + 1, format!("expected {width} fields, got {}", fields.len())));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line,
        reason: format!("cannot parse {name} `{v}`"),
    })
}

/// Level series stored by `simulate` (or written by hand).
pub fn read_levels(path: &Path) -> Result<Vec<LevelSeries>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = text.lines().next().unwrap_or("");
    let mut cols = header.split(',');
    if cols.next() != Some("t") {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            reason: "header must start with `t`".into(),
        });
    }
    let mut levels = Vec::new();
    for c in cols {
        let lambda = c
            .strip_prefix("level_")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: 1,
                reason: format!("bad column `{c}`, expected `level_<lambda>`"),
            })?;
        levels.push(LevelSeries::new(lambda));
    }
    for (line, row) in read_csv(path, header)? {
        let t: f64 = field(path, line, "t", &row[0])?;
        for (series, v) in levels.iter_mut().zip(&row[1..]) {
            series.push(t, field(path, line, "position", v)?);
        }
    }
    Ok(levels)
}

/// Snapshots listed in `snapshots.csv` under `run_dir`.
pub fn read_snapshots(run_dir: &Path) -> Result<Vec<GridState>> {
    let index = run_dir.join("snapshots.csv");
    let mut out = Vec::new();
    for (line, row) in read_csv(&index, SNAPSHOT_INDEX_HEADER)? {
        let t: f64 = field(&index, line, "t", &row[1])?;
        let left_x: f64 = field(&index, line, "left_x", &row[2])?;
        let dx: f64 = field(&index, line, "dx", &row[3])?;
        let n: usize = field(&index, line, "n", &row[4])?;
        let ext = ExteriorDatum::new(
            field(&index, line, "exterior_left", &row[5])?,
            field(&index, line, "exterior_right", &row[6])?,
        );
        let path = run_dir.join(&row[7]);
        let rows = read_csv(&path, "x,u")?;
        if rows.len() != n {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: rows.last().map_or(1, |r| r.0),
                reason: format!("expected {n} rows, found {}", rows.len()),
            });
        }
        let values = rows
            .iter()
            .map(|(l, r)| {
                let _: f64 = field(&path, *l, "x", &r[0])?;
                field(&path, *l, "u", &r[1])
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut g = GridState::new(left_x, dx, values, ext);
        g.time = t;
        out.push(g);
    }
    Ok(out)
}

/// Recomputes the diagnostics of a stored run into `out`.
///
/// Needs `levels.csv`, plus the snapshots when tail fits or flattening are
/// enabled.
pub fn analyze(cfg: &Config, run_dir: &Path, out: &Path) -> Result<CommandReport> {
    let started = unix_now();
    let levels = read_levels(&run_dir.join("levels.csv"))?;
    let tails: Vec<TailRow> = if cfg.diagnostics.tail_fits || cfg.diagnostics.flattening {
        read_snapshots(run_dir)?.iter().map(|g| tail_row(cfg, g)).collect()
    } else {
        Vec::new()
    };
    let files = diagnostic_files(cfg, &levels, &tails)?;
    let mut dir = OutDir::prepare(out)?;
    for (name, text) in &files {
        dir.write(name, text)?;
    }
    let manifest = dir.finish("analyze", cfg, started, &Outcome::Completed)?;
    let lines = files
        .iter()
        .find(|(n, _)| *n == "regime.txt")
        .map(|(_, t)| t.lines().map(str::to_string).collect())
        .unwrap_or_default();
    Ok(CommandReport {
        outcome: Outcome::Completed,
        manifest,
        lines,
    })
}

fn report_header(cfg: &Config) -> String {
    let s = &cfg.subsolution;
    let mut out = String::new();
    let _ = writeln!(out, "kernel = {} s={:?} J0={:?} R0={:?}", cfg.kernel.kind.label(), cfg.kernel.s, cfg.kernel.j0, cfg.kernel.r0);
    let _ = writeln!(out, "beta = {:?}", cfg.reaction.beta);
    if s.preset {
        let _ = writeln!(out, "mode = preset eps={:?} sigma={:?} D={:?}", s.eps, s.sigma, s.d_amp);
    } else {
        let _ = writeln!(out, "mode = free eps={:?} kappa={:?} gamma={:?}", s.eps, s.kappa, s.gamma);
    }
    let _ = writeln!(out, "barrier = nu={:?} kappa={:?}", s.barrier_nu, s.barrier_kappa);
    let _ = writeln!(out, "samples = {} t x {} x, tolerance {:e}", s.t_samples, s.x_samples, s.tolerance);
    out
}

/// Certifies every configured zone. Writes `certify_report.txt`,
/// `residuals.csv` and, when a ladder is configured, `threshold.csv`.
pub fn certify_cmd(cfg: &Config, out: &Path) -> Result<CommandReport> {
    let started = unix_now();
    let kernel = cfg.kernel_spec()?;
    let opts = cfg.certify_options()?;
    let zones = &cfg.subsolution.zones;
    let needs_params = zones.iter().any(|&z| z != Zone::Barrier) || !cfg.subsolution.ladder.is_empty();
    let params = if needs_params { Some(cfg.subsolution_params()?) } else { None };
    let mut dir = OutDir::prepare(out)?;

    let mut report = report_header(cfg);
    let mut residuals = String::from("t,x,residual,zone\n");
    let mut results: Vec<CertificationReport> = Vec::new();
    let mut failure: Option<Error> = None;
    for &zone in zones {
        let r = match (zone, params.as_ref()) {
            (Zone::Barrier, _) => certify_barrier(&kernel, &cfg.barrier()?, &opts),
            (_, Some(p)) => certify(&kernel, p, zone, &opts),
            (_, None) => unreachable!("parameters resolved for subsolution zones"),
        };
        match r {
            Ok(r) => {
                for smp in &r.samples {
                    let _ = writeln!(residuals, "{},{},{},{}", num(smp.t), num(smp.x), num(smp.residual), zone.label());
                }
                let _ = writeln!(report, "{}", r.summary());
                let _ = writeln!(report, "  inequality: {}", zone.inequality());
                results.push(r);
            }
            Err(e) => {
                let _ = writeln!(report, "{:<8} ERROR {e}", zone.label());
                failure = Some(e);
                break;
            }
        }
    }

    let mut threshold_pass = true;
    if failure.is_none() && !cfg.subsolution.ladder.is_empty() {
        let p = params.as_ref().expect("parameters resolved for the ladder");
        match threshold_search(&kernel, p, zones, &cfg.subsolution.ladder, &opts) {
            Ok(search) => {
                let mut csv = String::from("t,zone,worst_residual,worst_x,pass\n");
                for rung in &search.rungs {
                    for r in &rung.reports {
                        let _ = writeln!(csv, "{},{},{},{},{}", num(rung.t), r.zone.label(), num(r.worst_residual), num(r.worst_x), r.pass);
                    }
                }
                dir.write("threshold.csv", &csv)?;
                match search.first_pass {
                    Some(t) => {
                        let _ = writeln!(
                            report,
                            "threshold: first passing rung t = {t:?} ({}); this is a measured time on the sampled ladder, not a proven threshold",
                            if search.stable { "all later rungs pass" } else { "some later rung fails" }
                        );
                    }
                    None => {
                        threshold_pass = false;
                        let _ = writeln!(report, "threshold: no rung of the ladder passes");
                    }
                }
            }
            Err(e) => {
                let _ = writeln!(report, "threshold: ERROR {e}");
                failure = Some(e);
            }
        }
    }

    let all_pass = failure.is_none() && results.iter().all(|r| r.pass) && threshold_pass;
    let _ = writeln!(report, "overall = {}", if all_pass { "PASS" } else { "FAIL" });
    dir.write("certify_report.txt", &report)?;
    dir.write("residuals.csv", &residuals)?;

    let outcome = match &failure {
        Some(e) => Outcome::Aborted {
            time: match e {
                Error::AtPoint { t, .. } => *t,
                _ => f64::NAN,
            },
            reason: e.to_string(),
        },
        None if all_pass => Outcome::Completed,
        None => Outcome::CertificationFailed,
    };
    let manifest = dir.finish("certify", cfg, started, &outcome)?;
    Ok(CommandReport {
        outcome,
        manifest,
        lines: report.lines().map(str::to_string).collect(),
    })
}
