//! File and stream helpers shared by the command line tool.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::experiments::{plot_series, records_to_csv, ExperimentRecord};
use crate::poly::PolyMap;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            _ => Err(Error::InvalidParameter(format!("unknown format `{s}`"))),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

/// Reads a file, or standard input for `None` and `-`.
pub fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => fs::read_to_string(p).map_err(|e| io_err(p, e)),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| io_err(Path::new("<stdin>"), e))?;
            Ok(s)
        }
    }
}

fn with_path<T>(path: Option<&Path>, r: Result<T>) -> Result<T> {
    r.map_err(|e| match (e, path) {
        (Error::Parse { line, msg }, Some(p)) => Error::Parse {
            line,
            msg: format!("{}: {msg}", p.display()),
        },
        (e, _) => e,
    })
}

pub fn read_tensor(path: Option<&Path>) -> Result<Tensor> {
    with_path(path, Tensor::from_text(&read_input(path)?))
}

pub fn read_poly(path: Option<&Path>) -> Result<PolyMap> {
    with_path(path, PolyMap::from_text(&read_input(path)?))
}

/// Writes to a file, or to standard output for `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

/// Human-readable listing of the main record fields.
pub fn record_table(r: &ExperimentRecord) -> String {
    let mut s = format!(
        "experiment        {}\nholds             {}\ntrials            {}\nsuccess_count     {}\nempirical_prob    {}\nstderr            {}\ntheoretical_bound {}\n",
        r.experiment, r.holds, r.trials, r.success_count, r.empirical_prob, r.stderr, r.theoretical_bound
    );
    let width = r.params.keys().map(|k| k.len()).max().unwrap_or(0) + 2;
    for (k, v) in &r.params {
        s.push_str(&format!("  {k:<width$}{v}\n"));
    }
    for n in &r.notes {
        s.push_str(&format!("  note: {n}\n"));
    }
    s
}

/// Renders records: one JSON object (or an array for several), CSV with a
/// header, or tables.
pub fn render_records(records: &[ExperimentRecord], format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => {
            if let [one] = records {
                one.to_json() + "\n"
            } else {
                let vals: Vec<serde_json::Value> = records
                    .iter()
                    .map(|r| serde_json::to_value(r).expect("record serializes"))
                    .collect();
                serde_json::to_string_pretty(&vals).expect("value serializes") + "\n"
            }
        }
        Format::Csv => records_to_csv(records)?,
        Format::Table => records.iter().map(record_table).collect::<Vec<_>>().join("\n"),
    })
}

/// Writes records to `path` (standard output for `None`). CSV output is
/// appended when the file already starts with the same header.
pub fn write_records(records: &[ExperimentRecord], format: Format, path: Option<&Path>) -> Result<()> {
    let text = render_records(records, format)?;
    if let (Format::Csv, Some(p)) = (format, path) {
        if let Ok(existing) = fs::read_to_string(p) {
            if !existing.is_empty() {
                let header = text.lines().next().unwrap_or_default();
                if existing.lines().next() != Some(header) {
                    return Err(Error::Io {
                        path: p.display().to_string(),
                        msg: "existing CSV has a different header".into(),
                    });
                }
                let body: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
                let mut f = fs::OpenOptions::new().append(true).open(p).map_err(|e| io_err(p, e))?;
                return f.write_all(body.as_bytes()).map_err(|e| io_err(p, e));
            }
        }
    }
    write_output(&text, path)
}

/// Two-column `σ empirical_prob` series for plotting.
pub fn write_plot(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    fs::write(path, plot_series(records)).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::matrix_restriction_experiment;
    use crate::field::PrimeField;
    use crate::linalg::Matrix;

    fn sweep() -> Vec<ExperimentRecord> {
        let id = Matrix::identity(PrimeField::gf2(), 8);
        (1..=9)
            .rev()
            .map(|i| matrix_restriction_experiment(&id, i as f64 / 10.0, 50, 3).unwrap())
            .collect()
    }

    #[test]
    fn csv_append_and_header_check() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        let recs = sweep();
        write_records(&recs[..4], Format::Csv, Some(&p)).unwrap();
        write_records(&recs[4..], Format::Csv, Some(&p)).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 10);
        fs::write(&p, "other,header\n").unwrap();
        assert!(matches!(write_records(&recs, Format::Csv, Some(&p)), Err(Error::Io { .. })));
    }

    #[test]
    fn plot_is_sorted_by_sigma() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plot.dat");
        write_plot(&sweep(), &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let xs: Vec<f64> = text.lines().map(|l| l.split(' ').next().unwrap().parse().unwrap()).collect();
        assert_eq!(xs.len(), 9);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn json_array_round_trips() {
        let recs = sweep();
        let text = render_records(&recs, Format::Json).unwrap();
        let back: Vec<ExperimentRecord> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn parse_errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.tensor");
        fs::write(&p, "tensor v1\nq=2 d=2 dims=2,2\n0 1\n").unwrap();
        match read_tensor(Some(&p)) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("bad.tensor")),
            other => panic!("{other:?}"),
        }
    }
}
