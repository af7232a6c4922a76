//! Plain-text tables: two-column ingestion, CSV emission and atomic writes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Parses `x y` rows separated by whitespace or commas. Blank lines and lines
/// starting with `#` are skipped; a single non-numeric header row is allowed.
pub fn parse_two_columns(text: &str, path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parse_err = |msg: String| Error::Parse {
            path: path.to_owned(),
            line: lineno + 1,
            msg,
        };
        if fields.len() < 2 {
            return Err(parse_err(format!("expected two columns, found {}", fields.len())));
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                if !(x.is_finite() && y.is_finite()) {
                    return Err(parse_err("non-finite value".into()));
                }
                rows.push((x, y));
            }
            _ if rows.is_empty() && !header_seen => header_seen = true,
            _ => return Err(parse_err(format!("cannot parse `{line}` as two numbers"))),
        }
    }
    Ok(rows)
}

/// Full-precision float for CSV output (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..=15).contains(&e) {
        let decimals = (16 - e).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(s)
    } else {
        let s = format!("{x:.16e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A CSV table assembled in memory.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    body: String,
    rows: usize,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            body: String::new(),
            rows: 0,
        }
    }

    pub fn push(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.header.len());
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.body.push(',');
            }
            match c {
                Cell::F(x) => self.body.push_str(&fmt_f64(*x)),
                Cell::I(n) => {
                    let _ = write!(self.body, "{n}");
                }
                Cell::S(s) => self.body.push_str(s),
            }
        }
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s
    }

    pub fn write_atomic(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv_string().as_bytes())
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

/// Reads a CSV with a header line into named float columns.
pub fn read_csv_columns(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::Parse {
            path: path.to_owned(),
            line: 1,
            msg: "empty file".into(),
        });
    };
    let header: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: lineno + 1,
                msg: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
        }
        for (c, f) in cols.iter_mut().zip(fields) {
            c.push(f.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: lineno + 1,
                msg: format!("`{f}`: {e}"),
            })?);
        }
    }
    Ok((header, cols))
}

/// Writes via a sibling temporary file and a rename, so readers never see a
/// truncated file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_at_full_precision() {
        for x in [0.1, 1.0 / 3.0, -2.5e-9, 6.02214076e23, 4.493409457909064, 1e-300, -0.0, 123456.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x} -> {s}");
        }
        assert_eq!(fmt_f64(2.0), "2");
        assert_eq!(fmt_f64(0.25), "0.25");
    }

    #[test]
    fn two_columns_with_comments_and_header() {
        let text = "# comment\nr,alpha\n0, 1\n0.5\t2\n\n1 3 # trailing ignored\n";
        let rows = parse_two_columns(text, Path::new("t")).unwrap();
        assert_eq!(rows, vec![(0.0, 1.0), (0.5, 2.0), (1.0, 3.0)]);
        assert!(parse_two_columns("1 2\nx y\n", Path::new("t")).is_err());
        assert!(parse_two_columns("1\n", Path::new("t")).is_err());
    }

    #[test]
    fn atomic_write_and_read_back() {
        let dir = std::env::temp_dir().join(format!("alphadyn-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(&[Cell::F(0.1), Cell::I(3)]);
        t.write_atomic(&path).unwrap();
        let (h, cols) = read_csv_columns(&path).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(cols, vec![vec![0.1], vec![3.0]]);
        fs::remove_dir_all(&dir).unwrap();
    }
}
