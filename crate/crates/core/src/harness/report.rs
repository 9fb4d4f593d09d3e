use std::fmt;
use std::path::{Path, PathBuf};

use super::fmt_float;
use crate::error::{Result, RsrError};

/// Where the recovery rate of a sweep line crosses 1/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Crossing {
    /// Already at least 1/2 at the smallest SNR.
    BelowGrid(f64),
    /// Never reaches 1/2.
    AboveGrid(f64),
    At(f64),
}

impl fmt::Display for Crossing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Crossing::BelowGrid(v) => write!(f, "< {}", fmt_float(*v)),
            Crossing::AboveGrid(v) => write!(f, "> {}", fmt_float(*v)),
            Crossing::At(v) => f.write_str(&fmt_float(*v)),
        }
    }
}

/// Cells sharing estimator, D, d and noise level, ordered by SNR.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseLine {
    pub estimator: String,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub noise_eps: f64,
    /// `(snr, recovery_rate)`.
    pub points: Vec<(f64, f64)>,
    /// Mean of the finite threshold-column values over the line.
    pub threshold: f64,
    pub crossing: Crossing,
    /// False when the rate decreases somewhere along the grid.
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseReport {
    pub threshold_column: String,
    pub lines: Vec<PhaseLine>,
}

impl PhaseReport {
    /// One line per sweep line, plus a warning line for each non-monotone one.
    pub fn text(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(&format!(
                "estimator={} ambient_dim={} subspace_dim={} noise_eps={} crossing={} {}={} monotone={}\n",
                l.estimator,
                l.ambient_dim,
                l.subspace_dim,
                fmt_float(l.noise_eps),
                l.crossing,
                self.threshold_column,
                fmt_float(l.threshold),
                l.monotone
            ));
            if !l.monotone {
                s.push_str(&format!(
                    "warning: non-monotone recovery rate for estimator={} ambient_dim={} subspace_dim={}\n",
                    l.estimator, l.ambient_dim, l.subspace_dim
                ));
            }
        }
        s
    }
}

pub fn crossing(points: &[(f64, f64)]) -> Crossing {
    let first = points.first().expect("nonempty line");
    if first.1 >= 0.5 {
        return Crossing::BelowGrid(first.0);
    }
    for w in points.windows(2) {
        let ((s0, r0), (s1, r1)) = (w[0], w[1]);
        if r0 < 0.5 && r1 >= 0.5 {
            return Crossing::At(s0 + (0.5 - r0) / (r1 - r0) * (s1 - s0));
        }
    }
    Crossing::AboveGrid(points.last().expect("nonempty line").0)
}

fn parse_f64(field: &str, value: &str, line: usize) -> Result<f64> {
    value.trim().parse::<f64>().map_err(|_| RsrError::Parse {
        line,
        message: format!("column `{field}`: `{value}` is not a number"),
    })
}

/// Reads a summary CSV and locates the 0.5 recovery crossing of every sweep line.
pub fn report_phase_transition(summary_csv: &Path, threshold_column: &str) -> Result<PhaseReport> {
    let mut reader = csv::Reader::from_path(summary_csv)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| RsrError::config(name, "column not found in summary"))
    };
    let (ie, idd, id, ieps, isnr, irate) = (
        col("estimator")?,
        col("ambient_dim")?,
        col("subspace_dim")?,
        col("noise_eps")?,
        col("snr")?,
        col("recovery_rate")?,
    );
    let ith = col(threshold_column)?;
    type Key = (String, usize, usize, u64);
    let mut keys: Vec<Key> = Vec::new();
    let mut data: Vec<Vec<(f64, f64, f64)>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let get = |k: usize| rec.get(k).unwrap_or("");
        let usize_at = |k: usize| {
            get(k).parse::<usize>().map_err(|_| RsrError::Parse {
                line,
                message: format!("column {k}: `{}` is not an integer", get(k)),
            })
        };
        let eps = parse_f64("noise_eps", get(ieps), line)?;
        let key = (get(ie).to_string(), usize_at(idd)?, usize_at(id)?, eps.to_bits());
        let point = (
            parse_f64("snr", get(isnr), line)?,
            parse_f64("recovery_rate", get(irate), line)?,
            parse_f64(threshold_column, get(ith), line)?,
        );
        match keys.iter().position(|k| *k == key) {
            Some(p) => data[p].push(point),
            None => {
                keys.push(key);
                data.push(vec![point]);
            }
        }
    }
    let lines = keys
        .into_iter()
        .zip(data)
        .map(|((estimator, ambient_dim, subspace_dim, eps), mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let points: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
            let finite: Vec<f64> = pts.iter().map(|p| p.2).filter(|v| v.is_finite()).collect();
            let threshold = if finite.is_empty() {
                f64::NAN
            } else {
                finite.iter().sum::<f64>() / finite.len() as f64
            };
            PhaseLine {
                estimator,
                ambient_dim,
                subspace_dim,
                noise_eps: f64::from_bits(eps),
                monotone: points.windows(2).all(|w| w[1].1 >= w[0].1),
                crossing: crossing(&points),
                points,
                threshold,
            }
        })
        .collect();
    Ok(PhaseReport {
        threshold_column: threshold_column.to_string(),
        lines,
    })
}

/// Writes one `snr,recovery_rate` CSV per sweep line into `dir`, named
/// `curve_<estimator>_<line index>.csv`.
pub fn write_curves(report: &PhaseReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (i, line) in report.lines.iter().enumerate() {
        let path = dir.join(format!("curve_{}_{i}.csv", line.estimator));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["snr", "recovery_rate"])?;
        for (s, r) in &line.points {
            w.write_record([fmt_float(*s), fmt_float(*r)])?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates() {
        let c = crossing(&[(1.0, 0.0), (2.0, 0.25), (4.0, 0.75), (8.0, 1.0)]);
        assert_eq!(c, Crossing::At(3.0));
        assert_eq!(crossing(&[(1.0, 0.9), (2.0, 1.0)]), Crossing::BelowGrid(1.0));
        assert_eq!(crossing(&[(1.0, 0.0), (2.0, 0.1)]), Crossing::AboveGrid(2.0));
        assert_eq!(Crossing::BelowGrid(1.0).to_string(), format!("< {}", fmt_float(1.0)));
    }

    #[test]
    fn reads_summary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        std::fs::write(
            &path,
            "estimator,ambient_dim,subspace_dim,noise_eps,snr,recovery_rate,sggd_bound\n\
             sggd,10,2,0,4,1,3.5\n\
             sggd,10,2,0,1,0,3.5\n\
             sggd,10,2,0,2,0.6,3.5\n\
             ransac,10,2,0,1,0.2,nan\n\
             ransac,10,2,0,2,0.1,nan\n",
        )
        .unwrap();
        let rep = report_phase_transition(&path, "sggd_bound").unwrap();
        assert_eq!(rep.lines.len(), 2);
        let sggd = &rep.lines[0];
        assert_eq!(sggd.points[0], (1.0, 0.0));
        assert!(matches!(sggd.crossing, Crossing::At(x) if (x - (1.0 + 0.5 / 0.6)).abs() < 1e-12));
        assert!(sggd.monotone);
        assert_eq!(sggd.threshold, 3.5);
        assert!(!rep.lines[1].monotone);
        assert!(rep.text().contains("warning: non-monotone"));
        let curves = write_curves(&rep, dir.path()).unwrap();
        let text = std::fs::read_to_string(&curves[0]).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(matches!(
            report_phase_transition(&path, "missing"),
            Err(RsrError::Config { .. })
        ));
    }
}
