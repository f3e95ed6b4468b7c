//! Point-cloud readers: CSV with an `x,y[,intensity]` header, and ASCII PLY
//! (x and y used, everything else ignored).

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::cloud::PointCloud2D;
use crate::error::{Error, Result};
use crate::geometry::Point2;

fn parse_err(source_name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

/// Reads a cloud, picking the format from the extension (`.ply` or CSV).
pub fn read_cloud(path: &Path) -> Result<PointCloud2D<f64>> {
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| std::io::Error::new(e.kind(), format!("{name}: {e}")))?;
    let is_ply = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("ply"));
    if is_ply {
        read_ply(file, &name)
    } else {
        read_csv(file, &name)
    }
}

pub fn read_csv<R: Read>(reader: R, source_name: &str) -> Result<PointCloud2D<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(source_name, 1, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(xi), Some(yi)) = (column("x"), column("y")) else {
        return Err(parse_err(source_name, 1, "header must name columns x and y"));
    };
    let ii = column("intensity");

    let mut points = Vec::new();
    let mut intensity = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(source_name, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record
                .get(i)
                .ok_or_else(|| parse_err(source_name, line, format!("missing {name}")))?;
            let v: f64 = raw
                .parse()
                .map_err(|_| parse_err(source_name, line, format!("{name} {raw:?} is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(source_name, line, format!("{name} is not finite")));
            }
            Ok(v)
        };
        points.push(Point2::new(field(xi, "x")?, field(yi, "y")?));
        if let Some(ii) = ii {
            intensity.push(field(ii, "intensity")?);
        }
    }
    if ii.is_some() {
        PointCloud2D::with_intensity(points, intensity)
    } else {
        Ok(PointCloud2D::new(points))
    }
}

pub fn read_ply<R: Read>(reader: R, source_name: &str) -> Result<PointCloud2D<f64>> {
    let mut lines = BufReader::new(reader).lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |expect: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((n, Err(e))) => Err(parse_err(source_name, n, e.to_string())),
            None => Err(parse_err(
                source_name,
                0,
                format!("unexpected end of file, expected {expect}"),
            )),
        }
    };
    let (n, magic) = next("ply header")?;
    if magic.trim() != "ply" {
        return Err(parse_err(source_name, n, "missing ply magic"));
    }
    let mut vertex_count: Option<usize> = None;
    let mut in_vertex = false;
    let mut props: Vec<String> = Vec::new();
    loop {
        let (n, line) = next("end_header")?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["format", fmt, ..] => {
                if *fmt != "ascii" {
                    return Err(parse_err(source_name, n, format!("unsupported ply format {fmt}")));
                }
            }
            ["element", "vertex", count] => {
                vertex_count = Some(
                    count
                        .parse()
                        .map_err(|_| parse_err(source_name, n, "bad vertex count"))?,
                );
                in_vertex = true;
            }
            ["element", ..] => in_vertex = false,
            ["property", "list", ..] if in_vertex => {
                return Err(parse_err(
                    source_name,
                    n,
                    "list properties on vertices are not supported",
                ));
            }
            ["property", _ty, name] if in_vertex => props.push(name.to_string()),
            ["end_header"] => break,
            _ => {}
        }
    }
    let count = vertex_count.ok_or_else(|| parse_err(source_name, 0, "no vertex element"))?;
    let xi = props.iter().position(|p| p == "x");
    let yi = props.iter().position(|p| p == "y");
    let (Some(xi), Some(yi)) = (xi, yi) else {
        return Err(parse_err(source_name, 0, "vertex element lacks x or y"));
    };
    let ii = props.iter().position(|p| p == "intensity");
    let mut points = Vec::with_capacity(count);
    let mut intensity = Vec::new();
    for _ in 0..count {
        let (n, line) = next("vertex")?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() < props.len() {
            return Err(parse_err(
                source_name,
                n,
                format!("expected {} values, got {}", props.len(), vals.len()),
            ));
        }
        let get = |i: usize| -> Result<f64> {
            vals[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(source_name, n, format!("{:?} is not a finite number", vals[i])))
        };
        points.push(Point2::new(get(xi)?, get(yi)?));
        if let Some(ii) = ii {
            intensity.push(get(ii)?);
        }
    }
    if ii.is_some() {
        PointCloud2D::with_intensity(points, intensity)
    } else {
        Ok(PointCloud2D::new(points))
    }
}

pub fn write_csv<W: Write>(cloud: &PointCloud2D<f64>, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    match &cloud.intensity {
        Some(inten) => {
            w.write_record(["x", "y", "intensity"]).map_err(io)?;
            for (p, i) in cloud.points.iter().zip(inten) {
                w.write_record([p.x.to_string(), p.y.to_string(), i.to_string()])
                    .map_err(io)?;
            }
        }
        None => {
            w.write_record(["x", "y"]).map_err(io)?;
            for p in &cloud.points {
                w.write_record([p.x.to_string(), p.y.to_string()]).map_err(io)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_basic_and_intensity() {
        let c = read_csv("x,y\n0,1\n2.5,-3\n".as_bytes(), "a.csv").unwrap();
        assert_eq!(c.points, vec![Point2::new(0.0, 1.0), Point2::new(2.5, -3.0)]);
        assert!(c.intensity.is_none());
        let c = read_csv("intensity, y ,x\n7,1,0\n".as_bytes(), "a.csv").unwrap();
        assert_eq!(c.points, vec![Point2::new(0.0, 1.0)]);
        assert_eq!(c.intensity, Some(vec![7.0]));
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match read_csv("x,y\n0,1\n0,abc\n".as_bytes(), "a.csv") {
            Err(Error::Parse { line, source_name, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(source_name, "a.csv");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            read_csv("a,b\n0,1\n".as_bytes(), "a.csv"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_csv("x,y\n0,1\n4\n".as_bytes(), "a.csv"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            read_csv("x,y\nnan,1\n".as_bytes(), "a.csv"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let c = PointCloud2D::new(vec![Point2::new(0.1, 0.2), Point2::new(1.0 / 3.0, -7.25)]);
        let mut buf = Vec::new();
        write_csv(&c, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice(), "b").unwrap(), c);
    }

    #[test]
    fn ply_ascii() {
        let text = "ply\nformat ascii 1.0\ncomment x\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nelement face 0\nproperty list uchar int vertex_indices\nend_header\n1 2 3\n4 5 6\n";
        let c = read_ply(text.as_bytes(), "a.ply").unwrap();
        assert_eq!(c.points, vec![Point2::new(1.0, 2.0), Point2::new(4.0, 5.0)]);
    }

    #[test]
    fn ply_errors() {
        let bad = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nend_header\n1 2\n4\n";
        assert!(matches!(
            read_ply(bad.as_bytes(), "a.ply"),
            Err(Error::Parse { line: 8, .. })
        ));
        let bin = "ply\nformat binary_little_endian 1.0\nend_header\n";
        assert!(matches!(
            read_ply(bin.as_bytes(), "a.ply"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_ply("plx\n".as_bytes(), "a.ply"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
