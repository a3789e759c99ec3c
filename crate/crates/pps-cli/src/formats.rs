//! Stream and histogram file formats.
//!
//! Streams: binary is the canonical format (magic `PPS1`, little-endian
//! u64 count, f64 duration, timestamps, then a length-prefixed UTF-8 JSON
//! metadata blob) and round-trips bit-exactly. The text form is a
//! `# pps-stream v1 duration=<T>` header plus one decimal timestamp per
//! line, for eyeballing and interop.
//!
//! Histograms, waiting densities and analytic curves share one CSV layout:
//! a `# pps-hist v1 kind=<g2|waiting|analytic> params=<k=v;...>` comment
//! header, a column header, then `bin_lo,bin_hi,count,value,stderr` rows
//! (curves are point-sampled: bin_lo = bin_hi = τ, count = stderr = 0).
//! All floats print in shortest round-trip form.
//!
//! Every write goes through a same-directory temp file and an atomic rename.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use pps_core::analytics::AnalyticCurve;
use pps_core::estimators::{CorrelationHistogram, WaitingHistogram};
use pps_core::EventStream;
use thiserror::Error;

pub const STREAM_MAGIC: &[u8; 4] = b"PPS1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {what}")]
    Malformed { path: PathBuf, what: String },
    #[error("{path}: stream violates {violations} invariant(s)")]
    InvalidStream { path: PathBuf, violations: usize },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(path: &Path, what: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        path: path.to_path_buf(),
        what: what.into(),
    }
}

/// Write bytes to a sibling temp file, then rename into place.
pub fn atomic_write(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), FormatError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into()),
        std::process::id()
    ));
    {
        let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        let mut buf = BufWriter::with_capacity(1 << 20, file);
        write(&mut buf).map_err(io_err(&tmp))?;
        buf.flush().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_stream_binary(path: &Path, stream: &EventStream) -> Result<(), FormatError> {
    atomic_write(path, |w| {
        w.write_all(STREAM_MAGIC)?;
        w.write_all(&(stream.len() as u64).to_le_bytes())?;
        w.write_all(&stream.duration().to_le_bytes())?;
        for &t in stream.times() {
            w.write_all(&t.to_le_bytes())?;
        }
        let meta = stream.meta().as_bytes();
        w.write_all(&(meta.len() as u64).to_le_bytes())?;
        w.write_all(meta)?;
        Ok(())
    })
}

pub fn write_stream_text(path: &Path, stream: &EventStream) -> Result<(), FormatError> {
    atomic_write(path, |w| {
        writeln!(w, "# pps-stream v1 duration={}", stream.duration())?;
        for &t in stream.times() {
            writeln!(w, "{t}")?;
        }
        Ok(())
    })
}

fn read_u64(r: &mut impl Read, path: &Path) -> Result<u64, FormatError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(io_err(path))?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64, FormatError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(io_err(path))?;
    Ok(f64::from_le_bytes(buf))
}

/// Read either stream format, sniffing the binary magic.
pub fn read_stream(path: &Path) -> Result<EventStream, FormatError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut reader = BufReader::with_capacity(1 << 20, file);
    let head = reader.fill_buf().map_err(io_err(path))?;
    if head.starts_with(STREAM_MAGIC) {
        read_stream_binary_from(&mut reader, path)
    } else {
        read_stream_text_from(&mut reader, path)
    }
}

fn read_stream_binary_from(
    reader: &mut impl BufRead,
    path: &Path,
) -> Result<EventStream, FormatError> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(io_err(path))?;
    if &magic != STREAM_MAGIC {
        return Err(malformed(path, "bad magic, expected PPS1"));
    }
    let count = read_u64(reader, path)?;
    let duration = read_f64(reader, path)?;
    let mut times = Vec::with_capacity(count.min(1 << 32) as usize);
    for _ in 0..count {
        times.push(read_f64(reader, path)?);
    }
    let meta_len = read_u64(reader, path)?;
    let mut meta = vec![0u8; meta_len as usize];
    reader.read_exact(&mut meta).map_err(io_err(path))?;
    let meta = String::from_utf8(meta).map_err(|_| malformed(path, "metadata is not UTF-8"))?;
    finish_stream(times, duration, meta, path)
}

fn read_stream_text_from(
    reader: &mut impl BufRead,
    path: &Path,
) -> Result<EventStream, FormatError> {
    let mut header = String::new();
    reader.read_line(&mut header).map_err(io_err(path))?;
    let header = header.trim_end();
    let duration = header
        .strip_prefix("# pps-stream v1 duration=")
        .and_then(|d| d.parse::<f64>().ok())
        .ok_or_else(|| malformed(path, "expected '# pps-stream v1 duration=<T>' header"))?;
    let mut times = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: f64 = line
            .parse()
            .map_err(|_| malformed(path, format!("bad timestamp on line {}", lineno + 2)))?;
        times.push(t);
    }
    finish_stream(times, duration, String::new(), path)
}

fn finish_stream(
    times: Vec<f64>,
    duration: f64,
    meta: String,
    path: &Path,
) -> Result<EventStream, FormatError> {
    let violations = pps_core::stream::validate_times(&times, duration);
    if violations.is_empty() {
        Ok(EventStream::from_parts_unchecked(times, duration, meta))
    } else {
        Err(FormatError::InvalidStream {
            path: path.to_path_buf(),
            violations: violations.len(),
        })
    }
}

/// One row of the shared CSV table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone)]
pub struct TableFile {
    pub kind: String,
    pub params: Vec<(String, String)>,
    pub rows: Vec<TableRow>,
}

impl TableFile {
    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn params_string(params: &[(String, String)]) -> String {
    params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_table(
    path: &Path,
    kind: &str,
    params: &[(String, String)],
    rows: impl Iterator<Item = TableRow> + Clone,
) -> Result<(), FormatError> {
    atomic_write(path, |w| {
        writeln!(w, "# pps-hist v1 kind={kind} params={}", params_string(params))?;
        writeln!(w, "bin_lo,bin_hi,count,value,stderr")?;
        for r in rows.clone() {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.bin_lo, r.bin_hi, r.count, r.value, r.stderr
            )?;
        }
        Ok(())
    })
}

pub fn g2_params(h: &CorrelationHistogram, extra: &[(String, String)]) -> Vec<(String, String)> {
    let mut p = vec![
        ("bin_width".into(), format!("{}", h.bin_width())),
        ("n_bins".into(), format!("{}", h.n_bins())),
        ("rate_hat".into(), format!("{}", h.rate_hat())),
        ("duration".into(), format!("{}", h.duration())),
    ];
    p.extend_from_slice(extra);
    p
}

pub fn write_g2_histogram(
    path: &Path,
    h: &CorrelationHistogram,
    extra: &[(String, String)],
) -> Result<(), FormatError> {
    let rows = (0..h.n_bins()).map(|b| TableRow {
        bin_lo: h.bin_edges()[b],
        bin_hi: h.bin_edges()[b + 1],
        count: h.pair_counts()[b],
        value: h.g2()[b],
        stderr: h.stderr()[b],
    });
    write_table(path, "g2", &g2_params(h, extra), rows)
}

pub fn write_waiting_histogram(
    path: &Path,
    h: &WaitingHistogram,
    extra: &[(String, String)],
) -> Result<(), FormatError> {
    let mut params = vec![
        ("order".into(), format!("{}", h.order())),
        ("bin_width".into(), format!("{}", h.bin_width())),
        ("n_samples".into(), format!("{}", h.n_samples())),
        ("duration".into(), format!("{}", h.duration())),
    ];
    params.extend_from_slice(extra);
    let rows = (0..h.counts().len()).map(|b| TableRow {
        bin_lo: h.bin_edges()[b],
        bin_hi: h.bin_edges()[b + 1],
        count: h.counts()[b],
        value: h.density()[b],
        stderr: h.stderr()[b],
    });
    write_table(path, "waiting", &params, rows)
}

pub fn write_curve(
    path: &Path,
    curve: &AnalyticCurve,
    extra: &[(String, String)],
) -> Result<(), FormatError> {
    let mut params = vec![(
        "formula_id".to_string(),
        curve.formula_id().as_str().to_string(),
    )];
    params.extend(curve.params().iter().cloned());
    params.extend_from_slice(extra);
    let rows = curve.tau_grid().iter().zip(curve.values()).map(|(&t, &v)| TableRow {
        bin_lo: t,
        bin_hi: t,
        count: 0,
        value: v,
        stderr: 0.0,
    });
    write_table(path, "analytic", &params, rows)
}

pub fn read_table(path: &Path) -> Result<TableFile, FormatError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let reader = BufReader::with_capacity(1 << 20, file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| malformed(path, "empty file"))?
        .map_err(io_err(path))?;
    let rest = header
        .strip_prefix("# pps-hist v1 kind=")
        .ok_or_else(|| malformed(path, "expected '# pps-hist v1 kind=...' header"))?;
    let (kind, params_str) = rest
        .split_once(" params=")
        .ok_or_else(|| malformed(path, "header missing params="))?;
    let params: Vec<(String, String)> = params_str
        .split(';')
        .filter(|s| !s.is_empty())
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => (kv.to_string(), String::new()),
        })
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(io_err(path))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("bin_lo") {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = |what: &str| -> Result<&str, FormatError> {
            cols.next()
                .ok_or_else(|| malformed(path, format!("missing {what} on line {}", lineno + 3)))
        };
        let parse_f64 = |what: &str, s: &str| -> Result<f64, FormatError> {
            s.parse()
                .map_err(|_| malformed(path, format!("bad {what} on line {}", lineno + 3)))
        };
        let bin_lo = parse_f64("bin_lo", next("bin_lo")?)?;
        let bin_hi = parse_f64("bin_hi", next("bin_hi")?)?;
        let count = next("count")?
            .parse::<u64>()
            .map_err(|_| malformed(path, format!("bad count on line {}", lineno + 3)))?;
        let value = parse_f64("value", next("value")?)?;
        let stderr = parse_f64("stderr", next("stderr")?)?;
        rows.push(TableRow {
            bin_lo,
            bin_hi,
            count,
            value,
            stderr,
        });
    }
    Ok(TableFile {
        kind: kind.to_string(),
        params,
        rows,
    })
}

/// SHA-256 of a file, hex-encoded; used to pin comparison inputs in reports.
pub fn file_sha256(path: &Path) -> Result<String, FormatError> {
    use sha2::{Digest, Sha256};
    let bytes = fs::read(path).map_err(io_err(path))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use pps_core::generate::gen_poisson;
    use pps_core::{Rate, Seed};

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let s = gen_poisson(Rate::new(100.0).unwrap(), 50.0, Seed(1)).unwrap();
        let p1 = dir.path().join("a.pps");
        let p2 = dir.path().join("b.pps");
        write_stream_binary(&p1, &s).unwrap();
        let back = read_stream(&p1).unwrap();
        assert_eq!(back.times(), s.times());
        assert_eq!(back.duration().to_bits(), s.duration().to_bits());
        assert_eq!(back.meta(), s.meta());
        write_stream_binary(&p2, &back).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn text_round_trip_preserves_times() {
        let dir = tempfile::tempdir().unwrap();
        let s = gen_poisson(Rate::new(50.0).unwrap(), 20.0, Seed(2)).unwrap();
        let p = dir.path().join("s.txt");
        write_stream_text(&p, &s).unwrap();
        let back = read_stream(&p).unwrap();
        assert_eq!(back.times(), s.times());
        assert_eq!(back.duration(), s.duration());
    }

    #[test]
    fn malformed_stream_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.pps");
        fs::write(&p, b"# pps-stream v1 duration=1.0\n0.5\n0.2\n").unwrap();
        assert!(matches!(
            read_stream(&p),
            Err(FormatError::InvalidStream { .. })
        ));
        fs::write(&p, b"garbage").unwrap();
        assert!(read_stream(&p).is_err());
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.csv");
        let rows = vec![
            TableRow {
                bin_lo: 0.0,
                bin_hi: 0.03,
                count: 41,
                value: 1.253e-3,
                stderr: 0.1,
            },
            TableRow {
                bin_lo: 0.03,
                bin_hi: 0.06,
                count: 0,
                value: 0.0,
                stderr: 0.0,
            },
        ];
        write_table(
            &p,
            "g2",
            &[("bin_width".into(), "0.03".into())],
            rows.iter().copied(),
        )
        .unwrap();
        let t = read_table(&p).unwrap();
        assert_eq!(t.kind, "g2");
        assert_eq!(t.param("bin_width"), Some("0.03"));
        assert_eq!(t.rows, rows);
    }
}
