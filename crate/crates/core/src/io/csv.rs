//! CSV emitters. Floats are written with 17 significant digits so every
//! `f64` survives a write/read cycle; lines end in `\n`.

use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::Path;

use crate::analysis::EnsembleResult;
use crate::bench::TimingTable;
use crate::sync::Trajectory;

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `k,i,u`: one row per recorded step and grid point.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "k,i,u")?;
    for (k, snap) in traj.iter() {
        for (i, u) in snap.values().iter().enumerate() {
            writeln!(w, "{k},{i},{}", format_f64(*u))?;
        }
    }
    w.flush()
}

pub fn emit_trajectory_csv(traj: &Trajectory, path: &Path) -> io::Result<()> {
    write_trajectory_csv(traj, BufWriter::new(File::create(path)?))
}

fn bad(line: usize, msg: impl std::fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, format!("line {line}: {msg}"))
}

/// Parses `k,i,u` rows back into `(k, values)` snapshots.
pub fn read_trajectory_csv<R: BufRead>(r: R) -> io::Result<Vec<(usize, Vec<f64>)>> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?;
    if header.as_deref().map(str::trim_end) != Some("k,i,u") {
        return Err(bad(1, "expected header `k,i,u`"));
    }
    let mut out: Vec<(usize, Vec<f64>)> = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let lineno = n + 2;
        let mut cols = line.split(',');
        let (Some(k), Some(i), Some(u), None) = (cols.next(), cols.next(), cols.next(), cols.next())
        else {
            return Err(bad(lineno, "expected three columns"));
        };
        let k: usize = k.parse().map_err(|e| bad(lineno, e))?;
        let i: usize = i.parse().map_err(|e| bad(lineno, e))?;
        let u: f64 = u.parse().map_err(|e| bad(lineno, e))?;
        if out.last().is_none_or(|(last, _)| *last != k) {
            out.push((k, Vec::new()));
        }
        let values = &mut out.last_mut().unwrap().1;
        if values.len() != i {
            return Err(bad(lineno, format!("point index {i} out of order")));
        }
        values.push(u);
    }
    Ok(out)
}

/// `k,run,norm2` into `runs`, and `k,mean,std` into `stats`.
pub fn write_ensemble_csv<W: Write, V: Write>(
    res: &EnsembleResult,
    mut runs: W,
    mut stats: V,
) -> io::Result<()> {
    writeln!(runs, "k,run,norm2")?;
    for (t, k) in res.steps.iter().enumerate() {
        for (j, run) in res.runs.iter().enumerate() {
            writeln!(runs, "{k},{j},{}", format_f64(run.norms[t]))?;
        }
    }
    writeln!(stats, "k,mean,std")?;
    for (t, k) in res.steps.iter().enumerate() {
        writeln!(stats, "{k},{},{}", format_f64(res.mean[t]), format_f64(res.spread[t]))?;
    }
    runs.flush()?;
    stats.flush()
}

pub fn emit_ensemble_csv(res: &EnsembleResult, runs_path: &Path, stats_path: &Path) -> io::Result<()> {
    write_ensemble_csv(
        res,
        BufWriter::new(File::create(runs_path)?),
        BufWriter::new(File::create(stats_path)?),
    )
}

/// `N,mode,reps,median_ns,min_ns`.
pub fn write_bench_csv<W: Write>(table: &TimingTable, mut w: W) -> io::Result<()> {
    writeln!(w, "N,mode,reps,median_ns,min_ns")?;
    for row in &table.rows {
        writeln!(w, "{},{},{},{},{}", row.n_points, row.mode, row.reps, row.median_ns, row.min_ns)?;
    }
    w.flush()
}

pub fn emit_bench_csv(table: &TimingTable, path: &Path) -> io::Result<()> {
    write_bench_csv(table, BufWriter::new(File::create(path)?))
}
