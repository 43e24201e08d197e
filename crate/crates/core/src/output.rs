//! CSV emission for Monte Carlo results and the summary report built from it.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::SimConfig;
use crate::sim::{stream_seed, MonteCarlo};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {msg}")]
    Malformed { path: PathBuf, msg: String },
}

pub const ACTIONS_CSV: &str = "actions.csv";
pub const REGRET_CSV: &str = "regret.csv";
pub const TRACKING_CSV: &str = "tracking.csv";
pub const TRACKS_CSV: &str = "tracks.csv";
pub const MANIFEST: &str = "manifest.txt";
pub const CONFIG_COPY: &str = "config.cfg";
pub const SUMMARY_CSV: &str = "summary.csv";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv { path: path.to_path_buf(), source }
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, OutputError> {
    let f = File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), OutputError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes every artifact of one configuration into `dir`, creating it.
pub fn write_results(dir: &Path, cfg: &SimConfig, mc: &MonteCarlo) -> Result<(), OutputError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let p = dir.join(REGRET_CSV);
    let rows = mc.regret.mean.iter().zip(&mc.regret.stderr).enumerate();
    write_rows(&p, &["pri", "mean_avg_cum_regret", "stderr"], rows.map(|(t, (m, s))| [(t + 1).to_string(), m.to_string(), s.to_string()]))?;

    let p = dir.join(TRACKING_CSV);
    let rows = mc.tracking.mean.iter().zip(&mc.tracking.stderr).enumerate();
    write_rows(&p, &["cpi", "mean_rmse", "stderr"], rows.map(|(c, (m, s))| [(c + 1).to_string(), m.to_string(), s.to_string()]))?;

    let p = dir.join(TRACKS_CSV);
    let rows = mc.runs.iter().flat_map(|log| {
        log.tracks.iter().map(move |c| {
            [
                log.run_index.to_string(),
                c.cpi.to_string(),
                c.fused[0].to_string(),
                c.fused[1].to_string(),
                c.truth[0].to_string(),
                c.truth[1].to_string(),
                c.error.to_string(),
                c.contributing_nodes.to_string(),
            ]
        })
    });
    write_rows(&p, &["run", "cpi", "fused_x", "fused_y", "true_x", "true_y", "rmse", "nodes"], rows)?;

    if cfg.record_actions {
        let p = dir.join(ACTIONS_CSV);
        let rows = mc.runs.iter().flat_map(|log| {
            log.actions.iter().map(move |a| {
                [
                    log.run_index.to_string(),
                    a.pri.to_string(),
                    a.node.to_string(),
                    a.band.to_string(),
                    a.waveform.to_string(),
                    u8::from(a.collided).to_string(),
                    a.reward.to_string(),
                    a.realized_sinr.map(|s| s.to_string()).unwrap_or_default(),
                ]
            })
        });
        write_rows(&p, &["run", "pri", "node", "band", "waveform", "collided", "reward", "realized_sinr"], rows)?;
    }

    let p = dir.join(CONFIG_COPY);
    fs::write(&p, cfg.canonical()).map_err(io_err(&p))?;
    let p = dir.join(MANIFEST);
    fs::write(&p, manifest(cfg, mc)).map_err(io_err(&p))
}

/// Plain `key=value` record of what produced a result directory.
pub fn manifest(cfg: &SimConfig, mc: &MonteCarlo) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        s.push_str(k);
        s.push('=');
        s.push_str(&v);
        s.push('\n');
    };
    kv("crate_version", env!("CARGO_PKG_VERSION").to_string());
    kv("config_hash", format!("{:016x}", cfg.hash()));
    kv("master_seed", cfg.seed.to_string());
    kv("environment_seed", cfg.env.seed.to_string());
    kv("runs", cfg.runs.to_string());
    kv("nodes", cfg.nodes.to_string());
    kv("total_pris", cfg.total_pris().to_string());
    kv("total_cpis", cfg.total_cpis.to_string());
    kv("band_policy", cfg.policy.band.to_string());
    kv("waveform_policy", cfg.policy.waveform.to_string());
    kv("u_star", mc.u_star.to_string());
    kv("final_avg_regret", mc.regret.mean.last().copied().unwrap_or(f64::NAN).to_string());
    kv("final_rmse", mc.tracking.mean.last().copied().unwrap_or(f64::NAN).to_string());
    kv("stream_seed_rule", "splitmix64(splitmix64(master ^ splitmix64(run)) ^ fnv1a(name))".to_string());
    for log in &mc.runs {
        kv(&format!("run.{}.placement_seed", log.run_index), format!("{:016x}", stream_seed(cfg.seed, log.run_index, "placement")));
    }
    s
}

/// Final-PRI and final-CPI figures of one result directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub pris: usize,
    pub final_avg_regret: f64,
    pub final_regret_stderr: f64,
    pub peak_avg_regret: f64,
    pub peak_pri: usize,
    pub cpis: usize,
    pub final_rmse: f64,
    pub final_rmse_stderr: f64,
    pub mean_rmse: f64,
    pub config_hash: Option<String>,
}

fn read_series(path: &Path) -> Result<Vec<(f64, f64)>, OutputError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let bad = |msg: String| OutputError::Malformed { path: path.to_path_buf(), msg };
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        if rec.len() != 3 {
            return Err(bad(format!("row {} has {} fields", i + 2, rec.len())));
        }
        let num = |j: usize| rec[j].parse::<f64>().map_err(|e| bad(format!("row {}: {e}", i + 2)));
        out.push((num(1)?, num(2)?));
    }
    if out.is_empty() {
        return Err(bad("no rows".into()));
    }
    Ok(out)
}

fn manifest_value(dir: &Path, key: &str) -> Option<String> {
    let text = fs::read_to_string(dir.join(MANIFEST)).ok()?;
    text.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix('=').map(str::to_string))
}

/// Summarizes the regret and tracking series found in `dir`.
pub fn summarize(dir: &Path, name: &str) -> Result<Summary, OutputError> {
    let regret = read_series(&dir.join(REGRET_CSV))?;
    let tracking = read_series(&dir.join(TRACKING_CSV))?;
    let (peak_i, peak) = regret.iter().enumerate().fold((0, f64::MIN), |a, (i, &(m, _))| if m > a.1 { (i, m) } else { a });
    let (last_r, last_t) = (regret[regret.len() - 1], tracking[tracking.len() - 1]);
    Ok(Summary {
        name: name.to_string(),
        pris: regret.len(),
        final_avg_regret: last_r.0,
        final_regret_stderr: last_r.1,
        peak_avg_regret: peak,
        peak_pri: peak_i + 1,
        cpis: tracking.len(),
        final_rmse: last_t.0,
        final_rmse_stderr: last_t.1,
        mean_rmse: tracking.iter().map(|t| t.0).sum::<f64>() / tracking.len() as f64,
        config_hash: manifest_value(dir, "config_hash"),
    })
}

/// Result directories under `root`: `root` itself if it holds a run, then
/// every immediate subdirectory that does, in name order.
pub fn result_dirs(root: &Path) -> Result<Vec<(String, PathBuf)>, OutputError> {
    let mut found = Vec::new();
    if root.join(REGRET_CSV).is_file() {
        found.push((".".to_string(), root.to_path_buf()));
    }
    let mut subs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(io_err(root))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join(REGRET_CSV).is_file())
        .collect();
    subs.sort();
    found.extend(subs.into_iter().map(|p| (p.file_name().unwrap_or_default().to_string_lossy().into_owned(), p)));
    Ok(found)
}

/// Reads every result directory under `input` and writes `summary.csv` to
/// `out`. Returns the rows written.
pub fn report(input: &Path, out: &Path) -> Result<Vec<Summary>, OutputError> {
    let dirs = result_dirs(input)?;
    if dirs.is_empty() {
        return Err(OutputError::Malformed { path: input.to_path_buf(), msg: format!("no {REGRET_CSV} found here or one level below") });
    }
    let rows = dirs.iter().map(|(n, d)| summarize(d, n)).collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let p = out.join(SUMMARY_CSV);
    let header = [
        "variant",
        "pris",
        "final_avg_regret",
        "final_regret_stderr",
        "peak_avg_regret",
        "peak_pri",
        "cpis",
        "final_rmse",
        "final_rmse_stderr",
        "mean_rmse",
        "config_hash",
    ];
    write_rows(
        &p,
        &header,
        rows.iter().map(|s| {
            [
                s.name.clone(),
                s.pris.to_string(),
                s.final_avg_regret.to_string(),
                s.final_regret_stderr.to_string(),
                s.peak_avg_regret.to_string(),
                s.peak_pri.to_string(),
                s.cpis.to_string(),
                s.final_rmse.to_string(),
                s.final_rmse_stderr.to_string(),
                s.mean_rmse.to_string(),
                s.config_hash.clone().unwrap_or_default(),
            ]
        }),
    )?;
    Ok(rows)
}

/// Human-readable table for terminal output.
pub fn render_summary(rows: &[Summary]) -> String {
    let w = rows.iter().map(|r| r.name.len()).max().unwrap_or(7).max(7);
    let mut s = format!("{:<w$}  {:>14}  {:>10}  {:>10}\n", "variant", "final R/t", "final err", "PRIs");
    for r in rows {
        s += &format!("{:<w$}  {:>14.6}  {:>10.3}  {:>10}\n", r.name, r.final_avg_regret, r.final_rmse, r.pris);
    }
    s
}
