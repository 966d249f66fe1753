//! XYZ and ASCII PLY readers and writers.
//!
//! XYZ holds one point per line, `x y z` or `x y z nx ny nz`; lines starting
//! with `#` are comments. PLY must be `format ascii 1.0`; the `vertex` element
//! supplies `x y z` and optionally `nx ny nz`, everything else is skipped.
//! Normals are renormalized on load. Values are written with 9 significant
//! digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    PlyAscii,
}

impl CloudFormat {
    /// Guess from the file extension; anything other than `.ply` is XYZ.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ply") => CloudFormat::PlyAscii,
            _ => CloudFormat::Xyz,
        }
    }
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xyz" => Ok(CloudFormat::Xyz),
            "ply" | "ply-ascii" => Ok(CloudFormat::PlyAscii),
            other => Err(Error::InvalidParameter(format!(
                "unknown format '{other}' (expected xyz|ply-ascii)"
            ))),
        }
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_error(line, format!("invalid number '{token}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_error(line, format!("non-finite value '{token}'")))
    }
}

fn assemble(points: Vec<Vec3>, raw_normals: Option<Vec<Vec3>>) -> Result<PointCloud> {
    let Some(raw) = raw_normals else {
        return PointCloud::new(points);
    };
    let normals = raw
        .into_iter()
        .enumerate()
        .map(|(index, n)| n.try_normalize().ok_or(Error::ZeroNormal { index }))
        .collect::<Result<Vec<_>>>()?;
    PointCloud::with_normals(points, normals)
}

pub fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut width: Option<usize> = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 3 && fields.len() != 6 {
            return Err(parse_error(
                line_no,
                format!("expected 3 or 6 fields, found {}", fields.len()),
            ));
        }
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(parse_error(
                    line_no,
                    format!("mixed field counts: {} after {w}", fields.len()),
                ))
            }
            Some(_) => {}
        }
        let v = fields
            .iter()
            .map(|f| parse_f64(f, line_no))
            .collect::<Result<Vec<f64>>>()?;
        points.push(Vec3::new(v[0], v[1], v[2]));
        if v.len() == 6 {
            normals.push(Vec3::new(v[3], v[4], v[5]));
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    assemble(points, (width == Some(6)).then_some(normals))
}

#[derive(Debug)]
enum Property {
    Scalar(String),
    List,
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

pub fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_error(1, "missing 'ply' magic")),
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut ascii = false;
    loop {
        let (line_no, line) = lines.next().ok_or_else(|| parse_error(0, "unterminated PLY header"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            ["end_header"] => break,
            ["format", "ascii", _] => ascii = true,
            ["format", other, ..] => return Err(parse_error(line_no, format!("unsupported PLY format '{other}'"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| parse_error(line_no, format!("bad element count '{count}'")))?,
                properties: Vec::new(),
            }),
            ["property", "list", _, _, _] => elements
                .last_mut()
                .ok_or_else(|| parse_error(line_no, "property before element"))?
                .properties
                .push(Property::List),
            ["property", _, name] => elements
                .last_mut()
                .ok_or_else(|| parse_error(line_no, "property before element"))?
                .properties
                .push(Property::Scalar(name.to_string())),
            _ => return Err(parse_error(line_no, format!("unrecognized header line '{line}'"))),
        }
    }
    if !ascii {
        return Err(parse_error(2, "missing 'format ascii 1.0'"));
    }

    let mut points = Vec::new();
    let mut normals = Vec::new();
    let mut has_normals = false;
    let mut found_vertex = false;
    for element in &elements {
        let is_vertex = element.name == "vertex";
        let slot = |name: &str| {
            element
                .properties
                .iter()
                .position(|p| matches!(p, Property::Scalar(n) if n == name))
        };
        let position_slots = [slot("x"), slot("y"), slot("z")];
        let normal_slots = [slot("nx"), slot("ny"), slot("nz")];
        if is_vertex {
            found_vertex = true;
            if position_slots.iter().any(Option::is_none) {
                return Err(parse_error(0, "vertex element lacks x, y or z"));
            }
            has_normals = normal_slots.iter().all(Option::is_some);
        }
        for _ in 0..element.count {
            let (line_no, line) = loop {
                let (n, l) = lines
                    .next()
                    .ok_or_else(|| parse_error(0, format!("truncated '{}' data", element.name)))?;
                if !l.is_empty() {
                    break (n, l);
                }
            };
            if !is_vertex {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let mut values = Vec::with_capacity(element.properties.len());
            for prop in &element.properties {
                match prop {
                    Property::Scalar(_) => {
                        let t = tokens.next().ok_or_else(|| parse_error(line_no, "too few values"))?;
                        values.push(parse_f64(t, line_no)?);
                    }
                    Property::List => {
                        let t = tokens.next().ok_or_else(|| parse_error(line_no, "too few values"))?;
                        let n: usize = t
                            .parse()
                            .map_err(|_| parse_error(line_no, format!("bad list length '{t}'")))?;
                        for _ in 0..n {
                            tokens.next().ok_or_else(|| parse_error(line_no, "short list"))?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            let get = |s: Option<usize>| values[s.expect("checked slot")];
            points.push(Vec3::new(
                get(position_slots[0]),
                get(position_slots[1]),
                get(position_slots[2]),
            ));
            if has_normals {
                normals.push(Vec3::new(
                    get(normal_slots[0]),
                    get(normal_slots[1]),
                    get(normal_slots[2]),
                ));
            }
        }
    }
    if !found_vertex || points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    assemble(points, has_normals.then_some(normals))
}

pub fn read_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        CloudFormat::Xyz => parse_xyz(&text),
        CloudFormat::PlyAscii => parse_ply(&text),
    }
}

/// `v` with 9 significant digits, shortest of fixed or exponent notation.
pub fn format_significant(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
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

fn write_vertex_fields(out: &mut String, p: Vec3, n: Option<Vec3>) {
    let mut fields = vec![p.x, p.y, p.z];
    if let Some(n) = n {
        fields.extend([n.x, n.y, n.z]);
    }
    let line: Vec<String> = fields.into_iter().map(format_significant).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

/// Render a cloud; `comments` become `#` lines (XYZ) or `comment` lines (PLY).
pub fn format_cloud(cloud: &PointCloud, format: CloudFormat, comments: &[String]) -> Result<String> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut out = String::new();
    let normals = cloud.normals();
    match format {
        CloudFormat::Xyz => {
            for c in comments {
                let _ = writeln!(out, "# {c}");
            }
        }
        CloudFormat::PlyAscii => {
            out.push_str("ply\nformat ascii 1.0\n");
            for c in comments {
                let _ = writeln!(out, "comment {c}");
            }
            let _ = writeln!(out, "element vertex {}", cloud.len());
            out.push_str("property double x\nproperty double y\nproperty double z\n");
            if normals.is_some() {
                out.push_str("property double nx\nproperty double ny\nproperty double nz\n");
            }
            out.push_str("end_header\n");
        }
    }
    for (i, &p) in cloud.points().iter().enumerate() {
        write_vertex_fields(&mut out, p, normals.map(|n| n[i]));
    }
    Ok(out)
}

pub fn write_cloud(cloud: &PointCloud, path: &Path, format: CloudFormat) -> Result<()> {
    write_cloud_with_comments(cloud, path, format, &[])
}

pub fn write_cloud_with_comments(
    cloud: &PointCloud,
    path: &Path,
    format: CloudFormat,
    comments: &[String],
) -> Result<()> {
    let text = format_cloud(cloud, format, comments)?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
