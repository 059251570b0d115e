//! Columnar complex files (`k,u,row,col,re,im` and friends) and the design
//! result directory.

use std::path::Path;

use dfrc_core::channel::ChannelSet;
use dfrc_core::metrics::{HybridCombiner, MetricReport};
use dfrc_core::solvers::{DesignResult, Status};
use dfrc_core::CMat;

use crate::error::{Error, Result};
use crate::table::{Cell, Table};

/// One row per matrix entry; `index` carries the leading coordinates.
fn push_matrix(t: &mut Table, index: &[usize], m: &CMat) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            let mut row: Vec<Cell> = index.iter().map(|&i| i.into()).collect();
            row.extend([r.into(), c.into(), Cell::Num(z.re), Cell::Num(z.im)]);
            t.push(row);
        }
    }
}

pub fn channel_table(ch: &ChannelSet) -> Table {
    let mut t = Table::new(&["k", "u", "row", "col", "re", "im"]);
    for (k, users) in ch.h.iter().enumerate() {
        for (u, h) in users.iter().enumerate() {
            push_matrix(&mut t, &[k, u], h);
        }
    }
    t
}

pub fn write_channel(path: &Path, ch: &ChannelSet) -> Result<()> {
    channel_table(ch).write(path)
}

/// Reads a channel written by [`write_channel`]. Noise variance and seed are
/// not part of the file and are supplied by the caller.
pub fn read_channel(path: &Path, noise_variance: f64, seed: u64) -> Result<ChannelSet> {
    let mut rdr = csv::Reader::from_path(path)?;
    let bad = |line: usize, reason: &str| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.to_string(),
    };
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["k", "u", "row", "col", "re", "im"] {
        return Err(bad(1, "expected header k,u,row,col,re,im"));
    }
    let mut entries = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let idx: Vec<usize> = (0..4)
            .map(|j| rec[j].parse().map_err(|_| bad(line, "index is not an integer")))
            .collect::<Result<_>>()?;
        let re: f64 = rec[4].parse().map_err(|_| bad(line, "re is not a number"))?;
        let im: f64 = rec[5].parse().map_err(|_| bad(line, "im is not a number"))?;
        entries.push((idx, dfrc_core::C64::new(re, im)));
    }
    let dim = |j: usize| entries.iter().map(|(idx, _)| idx[j] + 1).max().unwrap_or(0);
    let (n_k, n_u, n_r, n_c) = (dim(0), dim(1), dim(2), dim(3));
    if n_k * n_u * n_r * n_c != entries.len() {
        return Err(bad(0, "entries do not fill a dense K x U x N_r x N_t array"));
    }
    let mut h = vec![vec![CMat::zeros(n_r, n_c); n_u]; n_k];
    let mut seen = vec![false; entries.len()];
    for (idx, z) in entries {
        let flat = ((idx[0] * n_u + idx[1]) * n_r + idx[2]) * n_c + idx[3];
        if std::mem::replace(&mut seen[flat], true) {
            return Err(bad(0, "duplicate entry"));
        }
        h[idx[0]][idx[1]][(idx[2], idx[3])] = z;
    }
    Ok(ChannelSet { h, noise_variance, seed })
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIter => "max_iter",
        Status::Infeasible => "infeasible",
    }
}

fn combiner_tables(c: &HybridCombiner) -> (Table, Table) {
    let mut analog = Table::new(&["u", "row", "col", "re", "im"]);
    for (u, m) in c.analog.iter().enumerate() {
        push_matrix(&mut analog, &[u], m);
    }
    let mut digital = Table::new(&["k", "u", "row", "col", "re", "im"]);
    for (k, users) in c.digital.iter().enumerate() {
        for (u, m) in users.iter().enumerate() {
            push_matrix(&mut digital, &[k, u], m);
        }
    }
    (analog, digital)
}

pub fn trace_table(r: &DesignResult) -> Table {
    let mut t = Table::new(&["iter", "primal", "dual", "objective"]);
    let n = r.objective_trace.len().max(r.primal_trace.len()).max(r.dual_trace.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(f64::NAN);
    for i in 0..n {
        t.push(vec![
            i.into(),
            at(&r.primal_trace, i).into(),
            at(&r.dual_trace, i).into(),
            at(&r.objective_trace, i).into(),
        ]);
    }
    t
}

pub fn metrics_table(report: &MetricReport, r: &DesignResult) -> Table {
    let mut header = vec!["method", "seed", "status"];
    header.extend(MetricReport::COLUMNS);
    header.push("se_regularized");
    let mut t = Table::new(&header);
    let mut row: Vec<Cell> = vec![r.method.name().into(), r.seed.into(), status_name(r.status).into()];
    row.extend(report.values().iter().map(|&x| Cell::Num(x)));
    row.push(Cell::Int(report.se_regularized as i64));
    t.push(row);
    t
}

/// Tables of a design result directory: `analog.csv`, `digital.csv`,
/// `combiner_analog.csv`, `combiner_digital.csv`, `traces.csv` and
/// `metrics.csv`.
pub fn design_tables(r: &DesignResult, report: &MetricReport) -> Vec<(String, Table)> {
    let mut analog = Table::new(&["row", "col", "re", "im"]);
    push_matrix(&mut analog, &[], r.precoder.analog().matrix());
    let mut digital = Table::new(&["k", "row", "col", "re", "im"]);
    for (k, d) in r.precoder.digital().iter().enumerate() {
        push_matrix(&mut digital, &[k], d);
    }
    let (c_analog, c_digital) = combiner_tables(&r.combiners);
    vec![
        ("analog.csv".into(), analog),
        ("digital.csv".into(), digital),
        ("combiner_analog.csv".into(), c_analog),
        ("combiner_digital.csv".into(), c_digital),
        ("traces.csv".into(), trace_table(r)),
        ("metrics.csv".into(), metrics_table(report, r)),
    ]
}

pub fn write_design(dir: &Path, r: &DesignResult, report: &MetricReport) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    for (name, table) in design_tables(r, report) {
        table.write(&dir.join(name))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dfrc_core::channel::{gen_channel, ClusterParams, SystemDims};

    #[test]
    fn channel_round_trip_is_exact_to_nine_digits() {
        let dims = SystemDims {
            n_tx_antennas: 4,
            n_rx_antennas: 2,
            n_tx_rf: 2,
            n_rx_rf: 2,
            n_streams: 2,
            n_users: 2,
            n_subcarriers: 3,
            n_radar_rx_rf: 2,
        };
        let ch = gen_channel(&dims, &ClusterParams::default(), 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        write_channel(&path, &ch).unwrap();
        let back = read_channel(&path, ch.noise_variance, ch.seed).unwrap();
        assert_eq!(back.n_subcarriers(), 3);
        assert_eq!(back.n_users(), 2);
        for k in 0..3 {
            for u in 0..2 {
                let diff = (back.get(k, u) - ch.get(k, u)).norm();
                assert!(diff <= 1e-8 * ch.get(k, u).norm());
            }
        }
        // a second write of the parsed channel is byte-identical
        let again = dir.path().join("h2.csv");
        write_channel(&again, &back).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn read_channel_rejects_holes_and_junk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        std::fs::write(&path, "k,u,row,col,re,im\n0,0,0,0,1,0\n0,0,1,1,1,0\n").unwrap();
        assert!(read_channel(&path, 1.0, 0).is_err());
        std::fs::write(&path, "k,u,row,col,re,im\n0,0,0,0,x,0\n").unwrap();
        assert!(matches!(read_channel(&path, 1.0, 0), Err(Error::Parse { line: 2, .. })));
    }
}
