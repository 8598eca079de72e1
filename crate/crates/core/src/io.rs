//! Plain-text formats: numeric CSV tables, solitary-wave files, key=value
//! run configs and the small value grammars used on the command line.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::diagnostics::peak_value;
use crate::semidisc::{BoundaryCondition, MixedSpaces, MixedState};
use crate::waves::TravellingWave;
use crate::{Error, Result};

/// Floats with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A header plus rows of numbers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::usage(format!(
                "row has {} values, table has {} columns",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Writes `table` as CSV. Missing values (NaN) are written as empty fields.
pub fn write_table(table: &Table, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(
            row.iter()
                .map(|v| if v.is_nan() { String::new() } else { format_float(*v) }),
        )
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table`]; empty fields read as NaN.
pub fn read_table(input: impl Read) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().any(|h| h.is_empty()) {
        return Err(Error::Parse {
            line: 1,
            message: "missing or empty column name".into(),
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .iter()
            .map(|f| {
                let f = f.trim();
                if f.is_empty() {
                    Ok(f64::NAN)
                } else {
                    f.parse::<f64>().map_err(|e| Error::Parse {
                        line,
                        message: format!("'{f}': {e}"),
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// `[table]` headings followed by `column: description` lines.
pub fn write_schema(tables: &[(&str, &[(&str, &str)])], mut out: impl Write) -> Result<()> {
    for (name, cols) in tables {
        writeln!(out, "[{name}]")?;
        for (c, d) in cols.iter() {
            writeln!(out, "{c}: {d}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

const WAVE_COLUMNS: [&str; 6] = ["node", "x", "eta", "eta_x", "u", "u_x"];

/// Writes a wave: `#key=value` metadata, then one CSV row per Lagrange node
/// (constrained values as zero).
pub fn write_wave(wave: &TravellingWave, mut out: impl Write) -> Result<()> {
    let sp = &wave.spaces;
    let m = sp.mesh();
    writeln!(out, "#degree={}", sp.degree())?;
    writeln!(out, "#bc={}", sp.bc())?;
    writeln!(out, "#a={}", format_float(m.a()))?;
    writeln!(out, "#b={}", format_float(m.b()))?;
    writeln!(out, "#n_cells={}", m.n_cells())?;
    writeln!(out, "#c_s={}", format_float(wave.c_s))?;
    writeln!(out, "#center={}", format_float(wave.center))?;
    let mut t = Table::new(&WAVE_COLUMNS);
    let n = sp.h.global_node_count() - usize::from(sp.h.is_periodic());
    let f = &wave.fields;
    let node = |s: &crate::fem::FemSpace, v: &[f64], g: usize| s.dof_of_node(g).map_or(0.0, |i| v[i]);
    for g in 0..n {
        t.rows.push(vec![
            g as f64,
            m.a() + g as f64 * m.dx() / sp.degree() as f64,
            node(&sp.h, &f.h, g),
            node(&sp.w, &f.w, g),
            node(&sp.u, &f.u, g),
            node(&sp.v, &f.v, g),
        ]);
    }
    write_table(&t, out)
}

fn meta<'a>(m: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    m.get(key).map(String::as_str).ok_or_else(|| Error::Parse {
        line: 0,
        message: format!("wave file lacks '#{key}='"),
    })
}

fn meta_num<T: std::str::FromStr>(m: &BTreeMap<String, String>, key: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    meta(m, key)?.trim().parse().map_err(|e: T::Err| Error::Parse {
        line: 0,
        message: format!("'#{key}': {e}"),
    })
}

/// Reads a wave file. The residual history is not stored and comes back
/// empty; the amplitude is recomputed.
pub fn read_wave(text: &str) -> Result<TravellingWave> {
    let mut m = BTreeMap::new();
    let mut body = String::new();
    let mut header_lines = 0;
    for (i, line) in text.lines().enumerate() {
        if let Some(kv) = line.strip_prefix('#') {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "metadata needs '#key=value'".into(),
            })?;
            m.insert(k.trim().to_string(), v.trim().to_string());
            header_lines += 1;
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let degree: usize = meta_num(&m, "degree")?;
    let bc: BoundaryCondition = meta(&m, "bc")?.parse()?;
    let (a, b): (f64, f64) = (meta_num(&m, "a")?, meta_num(&m, "b")?);
    let n_cells: usize = meta_num(&m, "n_cells")?;
    let c_s: f64 = meta_num(&m, "c_s")?;
    let center: f64 = meta_num(&m, "center")?;
    if !(1..=crate::fem::MAX_DEGREE).contains(&degree) || n_cells == 0 || n_cells > 10_000_000 {
        return Err(Error::Parse {
            line: 0,
            message: format!("unsupported degree {degree} or cell count {n_cells}"),
        });
    }
    let n = n_cells * degree + usize::from(bc == BoundaryCondition::Reflective);
    let rows = body.lines().filter(|l| !l.trim().is_empty()).count().saturating_sub(1);
    if rows != n {
        return Err(Error::Parse {
            line: header_lines + 1,
            message: format!("expected {n} node rows, found {rows}"),
        });
    }
    let spaces = MixedSpaces::build(a, b, n_cells, degree, bc)?;
    let t = read_table(body.as_bytes()).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line: line + header_lines,
            message,
        },
        other => other,
    })?;
    if t.header != WAVE_COLUMNS {
        return Err(Error::Parse {
            line: header_lines + 1,
            message: format!("expected columns {}", WAVE_COLUMNS.join(",")),
        });
    }
    if t.rows.len() != n {
        return Err(Error::Parse {
            line: header_lines + 1,
            message: format!("expected {n} node rows, found {}", t.rows.len()),
        });
    }
    for (g, row) in t.rows.iter().enumerate() {
        if row.len() != 6 || row[0] != g as f64 || row[2..].iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: header_lines + 2 + g,
                message: "bad node row".into(),
            });
        }
    }
    let gather = |s: &crate::fem::FemSpace, col: usize| -> Vec<f64> {
        (0..s.dof_count()).map(|i| t.rows[s.node_of_dof(i)][col]).collect()
    };
    let fields = MixedState {
        h: gather(&spaces.h, 2),
        w: gather(&spaces.w, 3),
        u: gather(&spaces.u, 4),
        v: gather(&spaces.v, 5),
        t: 0.0,
    };
    let amplitude = peak_value(&spaces.h, &fields.h)?;
    Ok(TravellingWave {
        c_s,
        center,
        amplitude,
        spaces,
        fields,
        residual_history: Vec::new(),
    })
}

/// `key = value` lines; `#` starts a comment. Later keys override earlier.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected key=value, got '{line}'"),
        })?;
        let k = k.trim();
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("bad key '{k}'"),
            });
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn finite(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|e| Error::config(format!("'{s}' is not a number: {e}")))?;
    if !v.is_finite() {
        return Err(Error::config(format!("'{s}' is not finite")));
    }
    Ok(v)
}

/// A number, `sqrtX` or `sqrt(X)`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    match s.strip_prefix("sqrt") {
        Some(rest) => {
            let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rest);
            let v = finite(inner)?;
            if v < 0.0 {
                return Err(Error::config(format!("square root of negative '{inner}'")));
            }
            Ok(v.sqrt())
        }
        None => finite(s),
    }
}

/// A positive number.
pub fn parse_positive(s: &str) -> Result<f64> {
    let v = parse_number(s)?;
    if v <= 0.0 {
        return Err(Error::config(format!("'{s}' must be positive")));
    }
    Ok(v)
}

/// Time step as an absolute value or a multiple of `Δx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtSpec {
    Value(f64),
    Ratio(f64),
}

impl DtSpec {
    pub fn resolve(&self, dx: f64) -> f64 {
        match *self {
            Self::Value(v) => v,
            Self::Ratio(r) => r * dx,
        }
    }
}

/// `0.1` or `ratio:0.1`.
pub fn parse_dt(s: &str) -> Result<DtSpec> {
    match s.trim().strip_prefix("ratio:") {
        Some(r) => Ok(DtSpec::Ratio(parse_positive(r)?)),
        None => Ok(DtSpec::Value(parse_positive(s)?)),
    }
}

/// `a:b` with `a < b`.
pub fn parse_domain(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .trim()
        .split_once(':')
        .ok_or_else(|| Error::config(format!("domain '{s}' must look like a:b")))?;
    let (a, b) = (parse_number(a)?, parse_number(b)?);
    if !(a < b) {
        return Err(Error::config(format!("domain '{s}' is empty")));
    }
    Ok((a, b))
}

/// Comma-separated positive numbers, e.g. `0.1,0.05`.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let v = s.split(',').map(parse_positive).collect::<Result<Vec<f64>>>()?;
    if v.is_empty() {
        return Err(Error::config("empty list"));
    }
    Ok(v)
}

/// `speed@centre` pairs, e.g. `1.6@-25,1.2@0`.
pub fn parse_waves(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|w| {
            let (c, x) = w
                .split_once('@')
                .ok_or_else(|| Error::config(format!("wave '{w}' must look like speed@centre")))?;
            Ok((parse_positive(c)?, parse_number(x)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::waves::{petviashvili_solve, PetviashviliConfig};

    #[test]
    fn table_round_trip_is_exact() {
        let mut t = Table::new(&["t", "mass"]);
        t.push(vec![0.1, 1.0 / 3.0]).unwrap();
        t.push(vec![f64::MIN_POSITIVE, -2.5e300]).unwrap();
        t.push(vec![f64::NAN, 0.0]).unwrap();
        assert!(t.push(vec![1.0]).is_err());
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        let back = read_table(buf.as_slice()).unwrap();
        assert_eq!(back.header, t.header);
        assert_eq!(back.rows[..2], t.rows[..2]);
        assert!(back.rows[2][0].is_nan());
        assert_eq!(back.column("mass").unwrap()[0], 1.0 / 3.0);
    }

    #[test]
    fn header_only_table() {
        let t = Table::new(&["dx", "E0_H"]);
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "dx,E0_H\n");
        assert!(read_table(buf.as_slice()).unwrap().rows.is_empty());
    }

    #[test]
    fn bad_tables() {
        assert!(matches!(
            read_table("a,b\n1,x\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(read_table("a,b\n1\n".as_bytes()).is_err());
        assert!(read_table("a,\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn config_lines() {
        let c = parse_config("# run\nbc = periodic\nr=3 # cubic\n\nr = 1\n").unwrap();
        assert_eq!(c["bc"], "periodic");
        assert_eq!(c["r"], "1");
        assert!(matches!(
            parse_config("ok=1\nnope\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_config("a b=1").is_err());
    }

    #[test]
    fn values() {
        assert_eq!(parse_number("sqrt1.6").unwrap(), 1.6f64.sqrt());
        assert_eq!(parse_number("sqrt(1.6)").unwrap(), 1.6f64.sqrt());
        assert_eq!(parse_number("1.4").unwrap(), 1.4);
        assert!(parse_number("sqrt-1").is_err());
        assert!(parse_number("inf").is_err());
        assert_eq!(parse_dt("ratio:0.1").unwrap().resolve(0.5), 0.05);
        assert_eq!(parse_dt("0.2").unwrap(), DtSpec::Value(0.2));
        assert!(parse_dt("ratio:-1").is_err());
        assert_eq!(parse_domain("-40:40").unwrap(), (-40.0, 40.0));
        assert!(parse_domain("3:1").is_err());
        assert!(parse_domain("3").is_err());
        assert_eq!(parse_list("0.1,0.05").unwrap(), vec![0.1, 0.05]);
        assert!(parse_list("0.1,,0.05").is_err());
        assert_eq!(parse_waves("1.6@-25,1.2@0").unwrap(), vec![(1.6, -25.0), (1.2, 0.0)]);
        assert!(parse_waves("1.6").is_err());
        assert!(parse_waves("-1@0").is_err());
    }

    #[test]
    fn wave_file_round_trip() {
        for bc in [BoundaryCondition::Reflective, BoundaryCondition::Periodic] {
            let sp = MixedSpaces::build(-20.0, 20.0, 100, 2, bc).unwrap();
            let w = petviashvili_solve(&sp, &PetviashviliConfig::new(1.3)).unwrap();
            let mut buf = Vec::new();
            write_wave(&w, &mut buf).unwrap();
            let back = read_wave(std::str::from_utf8(&buf).unwrap()).unwrap();
            assert_eq!(back.fields, w.fields);
            assert_eq!(back.c_s, w.c_s);
            assert_eq!(back.amplitude, w.amplitude);
            assert_eq!(back.spaces.bc(), bc);
        }
    }

    #[test]
    fn wave_file_errors() {
        assert!(read_wave("").is_err());
        let head = "#degree=1\n#bc=periodic\n#a=0\n#b=1\n#n_cells=2\n#c_s=1.2\n#center=0\n";
        let ok = format!("{head}node,x,eta,eta_x,u,u_x\n0,0,1,0,1,0\n1,0.5,0,0,0,0\n");
        assert!(read_wave(&ok).is_ok());
        let short = format!("{head}node,x,eta,eta_x,u,u_x\n0,0,1,0,1,0\n");
        assert!(read_wave(&short).is_err());
        let bad_cols = format!("{head}node,x,eta\n0,0,1\n1,0.5,0\n");
        assert!(read_wave(&bad_cols).is_err());
        assert!(read_wave(&ok.replace("#degree=1", "#degree=9")).is_err());
    }

    proptest! {
        #[test]
        fn floats_survive_formatting(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }

        #[test]
        fn readers_never_panic(s in "\\PC{0,200}") {
            let _ = read_table(s.as_bytes());
            let _ = read_wave(&s);
            let _ = parse_config(&s);
            let _ = parse_dt(&s);
            let _ = parse_domain(&s);
            let _ = parse_list(&s);
            let _ = parse_waves(&s);
        }
    }
}
