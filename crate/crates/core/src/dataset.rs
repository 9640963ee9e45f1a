//! The scan dataset on disk: a CSV file with `#` header and footer lines and a
//! JSON sidecar.
//!
//! ```text
//! # charsum dataset v1
//! # config: {...}
//! # code: charsum-core 0.1.0
//! d,parity,M,N,m,a,b,b0,u0,L_b0,delta,E,xi_conductor,distance_sq,lhs_eq7,residual_eq8
//! -3,odd,1,1,1.01837485434,...
//! # checksum: sha256:<hex of the row bytes>
//! ```
//!
//! Reals carry 12 significant digits. The checksum covers the data rows
//! (each including its newline) and nothing else.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::Parity;
use crate::error::{Error, Result};
use crate::rational::ExponentU;
use crate::verify::{Config, DiscriminantRecord, Structure};

pub const FORMAT_VERSION: u32 = 1;
pub const COLUMNS: [&str; 16] = [
    "d",
    "parity",
    "M",
    "N",
    "m",
    "a",
    "b",
    "b0",
    "u0",
    "L_b0",
    "delta",
    "E",
    "xi_conductor",
    "distance_sq",
    "lhs_eq7",
    "residual_eq8",
];

pub fn code_version() -> String {
    format!("charsum-core {}", env!("CARGO_PKG_VERSION"))
}

/// `v` with 12 significant digits, in the shortest of fixed or exponent form.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, v);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn parse_real(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Format(format!("bad real {s:?}")))
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse::<T>()
        .map_err(|_| Error::Format(format!("bad integer {s:?}")))
}

fn row(r: &DiscriminantRecord) -> String {
    let f = format_real;
    [
        r.d.to_string(),
        r.parity.as_str().to_string(),
        r.max_sum.to_string(),
        r.argmax.to_string(),
        f(r.m),
        r.a.to_string(),
        r.b.to_string(),
        r.b0.to_string(),
        f(r.u0.as_f64()),
        f(r.l_b0),
        f(r.delta),
        f(r.e_term),
        r.xi_conductor.to_string(),
        f(r.distance_sq),
        f(r.lhs_eq7),
        f(r.residual_eq8),
    ]
    .join(",")
}

fn parse_row(line: &str) -> Result<DiscriminantRecord> {
    let c: Vec<&str> = line.split(',').collect();
    if c.len() != COLUMNS.len() {
        return Err(Error::Format(format!(
            "expected {} columns, got {}",
            COLUMNS.len(),
            c.len()
        )));
    }
    let parity: Parity = c[1].parse()?;
    let u0 = parse_real(c[8])?;
    Ok(DiscriminantRecord {
        d: parse_int(c[0])?,
        parity,
        max_sum: parse_int(c[2])?,
        argmax: parse_int(c[3])?,
        m: parse_real(c[4])?,
        a: parse_int(c[5])?,
        b: parse_int(c[6])?,
        b0: parse_int(c[7])?,
        u0: if u0.is_infinite() {
            ExponentU::Infinite
        } else {
            ExponentU::Finite(u0)
        },
        l_b0: parse_real(c[9])?,
        delta: parse_real(c[10])?,
        e_term: parse_real(c[11])?,
        xi_conductor: parse_int(c[12])?,
        distance_sq: parse_real(c[13])?,
        lhs_eq7: parse_real(c[14])?,
        residual_eq8: parse_real(c[15])?,
        structure: Structure::default(),
    })
}

fn checksum_of(rows: &str) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(rows.as_bytes())))
}

/// A dataset held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub config: Config,
    pub code_version: String,
    pub records: Vec<DiscriminantRecord>,
    pub checksum: String,
}

/// Sidecar written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub code_version: String,
    pub config: Config,
    pub rows: usize,
    pub checksum: String,
}

impl DatasetFile {
    pub fn new(config: Config, records: Vec<DiscriminantRecord>) -> Self {
        let checksum = checksum_of(&Self::rows_text(&records));
        DatasetFile {
            config,
            code_version: code_version(),
            records,
            checksum,
        }
    }

    fn rows_text(records: &[DiscriminantRecord]) -> String {
        let mut s = String::new();
        for r in records {
            s.push_str(&row(r));
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut s = format!("# charsum dataset v{FORMAT_VERSION}\n");
        s.push_str(&format!(
            "# config: {}\n",
            serde_json::to_string(&self.config)?
        ));
        s.push_str(&format!("# code: {}\n", self.code_version));
        s.push_str(&COLUMNS.join(","));
        s.push('\n');
        s.push_str(&Self::rows_text(&self.records));
        s.push_str(&format!("# checksum: {}\n", self.checksum));
        Ok(s)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let fmt = |msg: &str| Error::Format(msg.to_string());
        let version = lines.next().ok_or_else(|| fmt("empty file"))?;
        if version != format!("# charsum dataset v{FORMAT_VERSION}") {
            return Err(fmt("unsupported header line"));
        }
        let config_line = lines.next().ok_or_else(|| fmt("missing config line"))?;
        let json = config_line
            .strip_prefix("# config: ")
            .ok_or_else(|| fmt("missing config line"))?;
        let config: Config = serde_json::from_str(json)?;
        let code = lines
            .next()
            .and_then(|l| l.strip_prefix("# code: "))
            .ok_or_else(|| fmt("missing code line"))?
            .to_string();
        if lines.next() != Some(COLUMNS.join(",").as_str()) {
            return Err(fmt("unexpected column header"));
        }
        let mut records = Vec::new();
        let mut rows = String::new();
        let mut stored = None;
        for line in lines {
            if let Some(c) = line.strip_prefix("# checksum: ") {
                stored = Some(c.to_string());
                break;
            }
            records.push(parse_row(line)?);
            rows.push_str(line);
            rows.push('\n');
        }
        let stored = stored.ok_or_else(|| fmt("missing checksum footer"))?;
        let actual = checksum_of(&rows);
        if stored != actual {
            return Err(Error::Format(format!(
                "checksum mismatch: stored {stored}, rows give {actual}"
            )));
        }
        Ok(DatasetFile {
            config,
            code_version: code,
            records,
            checksum: actual,
        })
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            format_version: FORMAT_VERSION,
            code_version: self.code_version.clone(),
            config: self.config.clone(),
            rows: self.records.len(),
            checksum: self.checksum.clone(),
        }
    }

    /// Writes the CSV to `path` and the sidecar to `path` + `.json`.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        fs::write(path, self.to_csv()?)?;
        let side = sidecar_path(path);
        fs::write(&side, serde_json::to_string_pretty(&self.sidecar())? + "\n")?;
        Ok(side)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv(&fs::read_to_string(path)?)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}
