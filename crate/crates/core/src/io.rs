//! CSV persistence for datasets and estimate traces.
//!
//! Numbers are written with 12 significant digits in a `%g`-style format, so
//! files are byte-identical across runs and platforms. Angles are radians.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::DualEstimate;
use crate::kinematics::PlanarPose;
use crate::simulator::{Dataset, DatasetRow};

pub const DATASET_HEADER: [&str; 9] = [
    "k",
    "t_true",
    "y_px",
    "y_pz",
    "y_theta",
    "truth_px",
    "truth_pz",
    "truth_theta",
    "u",
];

pub const ESTIMATES_HEADER: [&str; 16] = [
    "k",
    "x_hat",
    "w_l",
    "w_a1",
    "w_a2",
    "w_b1",
    "w_b2",
    "Px",
    "Pw_diag_1",
    "Pw_diag_2",
    "Pw_diag_3",
    "Pw_diag_4",
    "Pw_diag_5",
    "innov_px",
    "innov_pz",
    "innov_theta",
];

const SIG_DIGITS: usize = 12;

/// Format with 12 significant digits: fixed notation for decimal exponents
/// in `[-5, 12)`, scientific otherwise, trailing zeros trimmed.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_error(e: csv::Error, row: usize) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!("checked io kind"),
        }
    } else {
        Error::Schema {
            row,
            message: e.to_string(),
        }
    }
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let found = rdr.headers().map_err(|e| csv_error(e, 0))?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Schema {
            row: 0,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(())
}

/// Records with their 1-based data row numbers, field count already checked.
fn records<R: Read>(
    rdr: &mut csv::Reader<R>,
    width: usize,
) -> impl Iterator<Item = Result<(usize, csv::StringRecord)>> + '_ {
    rdr.records().enumerate().map(move |(i, rec)| {
        let row = i + 1;
        let rec = rec.map_err(|e| csv_error(e, row))?;
        if rec.len() != width {
            return Err(Error::Schema {
                row,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        Ok((row, rec))
    })
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: usize,
    name: &str,
    row: usize,
) -> Result<T> {
    let raw = rec[idx].trim();
    raw.parse().map_err(|_| Error::Schema {
        row,
        message: format!("column `{name}`: cannot parse `{raw}`"),
    })
}

fn finite(rec: &csv::StringRecord, idx: usize, name: &str, row: usize) -> Result<f64> {
    let v: f64 = field(rec, idx, name, row)?;
    if !v.is_finite() {
        return Err(Error::Schema {
            row,
            message: format!("column `{name}`: non-finite value"),
        });
    }
    Ok(v)
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_dataset<W: Write>(out: W, dataset: &Dataset) -> Result<()> {
    let mut wtr = writer(out);
    wtr.write_record(DATASET_HEADER)
        .map_err(|e| csv_error(e, 0))?;
    for (i, r) in dataset.rows.iter().enumerate() {
        let fields = [
            r.k.to_string(),
            fmt_num(r.t_true),
            fmt_num(r.y.px),
            fmt_num(r.y.pz),
            fmt_num(r.y.theta),
            fmt_num(r.truth.px),
            fmt_num(r.truth.pz),
            fmt_num(r.truth.theta),
            fmt_num(r.u),
        ];
        wtr.write_record(&fields).map_err(|e| csv_error(e, i + 1))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Parse a dataset, requiring the exact header and strictly increasing `k`.
pub fn read_dataset<R: Read>(input: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    check_header(&mut rdr, &DATASET_HEADER)?;
    let mut rows: Vec<DatasetRow> = Vec::new();
    for rec in records(&mut rdr, DATASET_HEADER.len()) {
        let (row, rec) = rec?;
        let f = |i: usize| finite(&rec, i, DATASET_HEADER[i], row);
        let k: u64 = field(&rec, 0, "k", row)?;
        if let Some(prev) = rows.last() {
            if k <= prev.k {
                return Err(Error::Schema {
                    row,
                    message: format!("k = {k} does not follow {}", prev.k),
                });
            }
        }
        rows.push(DatasetRow {
            k,
            t_true: f(1)?,
            y: PlanarPose::new(f(2)?, f(3)?, f(4)?),
            truth: PlanarPose::new(f(5)?, f(6)?, f(7)?),
            u: f(8)?,
        });
    }
    if rows.len() < 2 {
        return Err(Error::Schema {
            row: rows.len(),
            message: "a dataset needs at least two rows".into(),
        });
    }
    Ok(Dataset { rows })
}

/// One line of an estimates file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRow {
    pub k: u64,
    pub x_hat: f64,
    pub w: [f64; 5],
    pub px: f64,
    pub pw_diag: [f64; 5],
    /// State-filter innovation.
    pub innovation: [f64; 3],
}

impl From<&DualEstimate> for EstimateRow {
    fn from(e: &DualEstimate) -> Self {
        Self {
            k: e.k,
            x_hat: e.state.mean[0],
            w: e.params.mean.into(),
            px: e.state.cov[(0, 0)],
            pw_diag: e.params.cov.diagonal().into(),
            innovation: e.state_innovation.into(),
        }
    }
}

pub fn write_estimates<W: Write>(out: W, estimates: &[DualEstimate]) -> Result<()> {
    let mut wtr = writer(out);
    wtr.write_record(ESTIMATES_HEADER)
        .map_err(|e| csv_error(e, 0))?;
    for (i, e) in estimates.iter().enumerate() {
        let r = EstimateRow::from(e);
        let mut fields = vec![r.k.to_string(), fmt_num(r.x_hat)];
        fields.extend(r.w.iter().map(|v| fmt_num(*v)));
        fields.push(fmt_num(r.px));
        fields.extend(r.pw_diag.iter().map(|v| fmt_num(*v)));
        fields.extend(r.innovation.iter().map(|v| fmt_num(*v)));
        wtr.write_record(&fields).map_err(|e| csv_error(e, i + 1))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_estimates<R: Read>(input: R) -> Result<Vec<EstimateRow>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    check_header(&mut rdr, &ESTIMATES_HEADER)?;
    let mut out = Vec::new();
    for rec in records(&mut rdr, ESTIMATES_HEADER.len()) {
        let (row, rec) = rec?;
        let f = |i: usize| finite(&rec, i, ESTIMATES_HEADER[i], row);
        out.push(EstimateRow {
            k: field(&rec, 0, "k", row)?,
            x_hat: f(1)?,
            w: [f(2)?, f(3)?, f(4)?, f(5)?, f(6)?],
            px: f(7)?,
            pw_diag: [f(8)?, f(9)?, f(10)?, f(11)?, f(12)?],
            innovation: [f(13)?, f(14)?, f(15)?],
        });
    }
    Ok(out)
}

pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    write_dataset(BufWriter::new(File::create(path)?), dataset)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset(BufReader::new(File::open(path)?))
}

pub fn save_estimates(path: &Path, estimates: &[DualEstimate]) -> Result<()> {
    write_estimates(BufWriter::new(File::create(path)?), estimates)
}

pub fn load_estimates(path: &Path) -> Result<Vec<EstimateRow>> {
    read_estimates(BufReader::new(File::open(path)?))
}
