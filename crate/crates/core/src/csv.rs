//! Diagnostics and trajectory CSV files.
//!
//! Diagnostics columns are the fixed scalar columns of
//! [`DiagnosticsRecord::COLUMNS`] followed by `ineq_<name>_lhs` and
//! `ineq_<name>_rhs` for every monitored inequality, in monitor order.
//! Values use 17 significant digits, which round-trips binary64.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use std::io::Write;

const NSCALAR: usize = DiagnosticsRecord::COLUMNS.len();

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn diagnostics_header(ineq_names: &[&str]) -> String {
    let mut cols: Vec<String> = DiagnosticsRecord::COLUMNS.iter().map(|s| s.to_string()).collect();
    for n in ineq_names {
        cols.push(format!("ineq_{n}_lhs"));
        cols.push(format!("ineq_{n}_rhs"));
    }
    cols.join(",")
}

pub fn diagnostics_row(r: &DiagnosticsRecord) -> String {
    let mut cols: Vec<String> = r.scalars().iter().map(|&v| fmt(v)).collect();
    for (_, l, h) in &r.ineq_margins {
        cols.push(fmt(*l));
        cols.push(fmt(*h));
    }
    cols.join(",")
}

/// Streams records; the header is written with the first record.
pub struct DiagnosticsWriter<W: Write> {
    out: W,
    names: Option<Vec<String>>,
}

impl<W: Write> DiagnosticsWriter<W> {
    pub fn new(out: W) -> Self {
        DiagnosticsWriter { out, names: None }
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        let names: Vec<String> = r.ineq_margins.iter().map(|m| m.0.clone()).collect();
        match &self.names {
            None => {
                let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                writeln!(self.out, "{}", diagnostics_header(&refs))?;
                self.names = Some(names);
            }
            Some(prev) if *prev != names => {
                return Err(Error::Csv("inequality set changed between records".into()));
            }
            Some(_) => {}
        }
        writeln!(self.out, "{}", diagnostics_row(r))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn write_diagnostics(records: &[DiagnosticsRecord]) -> Result<String> {
    let mut w = DiagnosticsWriter::new(Vec::new());
    for r in records {
        w.write(r)?;
    }
    String::from_utf8(w.into_inner()).map_err(|e| Error::Csv(e.to_string()))
}

fn parse_value(s: &str, line: usize, col: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Csv(format!("line {line}, column {}: bad number '{s}'", col + 1)))
}

/// Parses a diagnostics CSV written by [`DiagnosticsWriter`].
pub fn parse_diagnostics(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < NSCALAR || cols[..NSCALAR] != DiagnosticsRecord::COLUMNS {
        return Err(Error::Csv("line 1: header does not start with the diagnostics columns".into()));
    }
    let extra = &cols[NSCALAR..];
    if !extra.len().is_multiple_of(2) {
        return Err(Error::Csv("line 1: unpaired inequality column".into()));
    }
    let mut names = Vec::with_capacity(extra.len() / 2);
    for pair in extra.chunks_exact(2) {
        let name = pair[0]
            .strip_prefix("ineq_")
            .and_then(|s| s.strip_suffix("_lhs"))
            .filter(|n| !n.is_empty() && pair[1] == format!("ineq_{n}_rhs"))
            .ok_or_else(|| Error::Csv(format!("line 1: bad inequality columns '{}', '{}'", pair[0], pair[1])))?;
        names.push(name.to_string());
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Csv(format!("line {lineno}: {} fields, header has {}", fields.len(), cols.len())));
        }
        let mut scalars = [0.0; NSCALAR];
        for (k, s) in fields[..NSCALAR].iter().enumerate() {
            scalars[k] = parse_value(s, lineno, k)?;
        }
        let mut ineq = Vec::with_capacity(names.len());
        for (k, name) in names.iter().enumerate() {
            let c = NSCALAR + 2 * k;
            ineq.push((name.clone(), parse_value(fields[c], lineno, c)?, parse_value(fields[c + 1], lineno, c + 1)?));
        }
        out.push(DiagnosticsRecord::from_scalars(&scalars, ineq));
    }
    Ok(out)
}

pub const TRAJECTORY_COLUMNS: [&str; 7] = ["t", "x", "y", "z", "rho", "a", "F"];

pub fn write_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.iter().map(|&v| fmt(v)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

/// Parses a numeric CSV with the given header.
pub fn parse_rows(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, h) = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
    let cols: Vec<&str> = h.split(',').map(str::trim).collect();
    if cols != header {
        return Err(Error::Csv(format!("line 1: expected header {}", header.join(","))));
    }
    lines
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != header.len() {
                return Err(Error::Csv(format!("line {}: {} fields, expected {}", i + 1, f.len(), header.len())));
            }
            f.iter().enumerate().map(|(k, s)| parse_value(s, i + 1, k)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64) -> DiagnosticsRecord {
        let mut v = [0.0; NSCALAR];
        for (i, x) in v.iter_mut().enumerate() {
            *x = (i as f64 + 1.0) * t.sin() / 3.0;
        }
        v[0] = t;
        v[NSCALAR - 1] = f64::NAN;
        DiagnosticsRecord::from_scalars(&v, vec![("l3interp_R2_p2".into(), 0.1, 1.0 / 3.0), ("x".into(), -0.0, 1e-300)])
    }

    #[test]
    fn round_trip_preserves_bits() {
        let rs = vec![rec(0.0), rec(0.1), rec(1.0 / 7.0)];
        let text = write_diagnostics(&rs).unwrap();
        let back = parse_diagnostics(&text).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in rs.iter().zip(&back) {
            for (x, y) in a.scalars().iter().zip(b.scalars()) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
            assert_eq!(a.ineq_margins, b.ineq_margins);
        }
        assert!(text.lines().next().unwrap().ends_with("ineq_x_lhs,ineq_x_rhs"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = write_diagnostics(&[rec(0.5)]).unwrap();
        let broken = text.replacen("e-1,", "e-1,,", 1);
        let e = parse_diagnostics(&broken).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        assert!(parse_diagnostics("t,mass\n1,2\n").is_err());
        assert!(parse_diagnostics("").is_err());
    }

    #[test]
    fn generic_rows() {
        let s = write_rows(&TRAJECTORY_COLUMNS, vec![vec![0.0, 0.5, 0.5, 0.5, 1.0, 0.0, 0.0]]);
        assert_eq!(parse_rows(&s, &TRAJECTORY_COLUMNS).unwrap()[0][1], 0.5);
        assert!(parse_rows(&s, &["t"]).is_err());
    }
}
