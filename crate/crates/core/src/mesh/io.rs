//! Mesh file format.
//!
//! A mesh file is a JSON document:
//!
//! ```json
//! {
//!   "format": "meshcert-mesh",
//!   "version": 1,
//!   "dim": 2,
//!   "points": [[0, 0], [1, 0], [0, 1]],
//!   "simplices": [[0, 1, 2]]
//! }
//! ```
//!
//! `format` and `version` may be omitted on input. `simplices` may be
//! omitted for point-set files. Ids are 0-based. Writers emit every real
//! with 17 significant digits, so a write/read round trip is lossless.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{Mesh, MeshError};
use crate::geometry::{Point, Simplex};

pub const FORMAT_NAME: &str = "meshcert-mesh";
pub const FORMAT_VERSION: u32 = 1;

/// Formats `x` like C's `%.17g`: 17 significant digits, trailing zeros
/// trimmed, exponent notation below `1e-4` and from `1e17` up.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if (-4..17).contains(&exp) {
        if exp >= 0 {
            let split = exp as usize + 1;
            out.push_str(&digits[..split]);
            let frac = digits[split..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        } else {
            out.push_str("0.");
            out.push_str(&"0".repeat((-exp - 1) as usize));
            out.push_str(digits.trim_end_matches('0'));
        }
    } else {
        out.push_str(&digits[..1]);
        let frac = digits[1..].trim_end_matches('0');
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        let _ = write!(out, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    #[serde(default)]
    format: Option<String>,
    #[serde(default)]
    version: Option<u32>,
    dim: usize,
    points: Vec<Vec<f64>>,
    #[serde(default)]
    simplices: Vec<Vec<usize>>,
}

/// Serializes a mesh in the documented text format.
pub fn write_mesh_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{{");
    let _ = writeln!(s, "  \"format\": \"{FORMAT_NAME}\",");
    let _ = writeln!(s, "  \"version\": {FORMAT_VERSION},");
    let _ = writeln!(s, "  \"dim\": {},", mesh.dim());
    s.push_str("  \"points\": [");
    for (i, p) in mesh.points().iter().enumerate() {
        s.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
        let coords: Vec<String> = p.iter().map(|&c| fmt17(c)).collect();
        s.push_str(&coords.join(", "));
        s.push(']');
    }
    s.push_str(if mesh.num_points() == 0 { "],\n" } else { "\n  ],\n" });
    s.push_str("  \"simplices\": [");
    for (i, simplex) in mesh.simplices().iter().enumerate() {
        s.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
        let ids: Vec<String> = simplex.vertices().iter().map(usize::to_string).collect();
        s.push_str(&ids.join(", "));
        s.push(']');
    }
    s.push_str(if mesh.num_simplices() == 0 { "]\n" } else { "\n  ]\n" });
    s.push_str("}\n");
    s
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

/// Parses a mesh document. Errors name the offending line/column for
/// syntax problems and the offending field entry for semantic ones.
pub fn read_mesh_str(text: &str) -> Result<Mesh, MeshError> {
    let raw: RawMesh = serde_json::from_str(text).map_err(|e| {
        MeshError::Format(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if let Some(f) = &raw.format {
        if f != FORMAT_NAME {
            return Err(MeshError::Format(format!(
                "field `format`: expected \"{FORMAT_NAME}\", found \"{f}\""
            )));
        }
    }
    if let Some(v) = raw.version {
        if v != FORMAT_VERSION {
            return Err(MeshError::Format(format!(
                "field `version`: unsupported version {v} (this reader handles {FORMAT_VERSION})"
            )));
        }
    }
    let mut points = Vec::with_capacity(raw.points.len());
    for (index, coords) in raw.points.into_iter().enumerate() {
        if coords.len() != raw.dim {
            return Err(MeshError::PointDimension {
                index,
                expected: raw.dim,
                found: coords.len(),
            });
        }
        points.push(
            Point::new(coords)
                .map_err(|e| MeshError::Format(format!("points[{index}]: {e}")))?,
        );
    }
    let simplices = raw.simplices.into_iter().map(Simplex::new).collect();
    Mesh::new(raw.dim, points, simplices)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    read_mesh_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_matches_printf() {
        assert_eq!(fmt17(0.5), "0.5");
        assert_eq!(fmt17(0.1), "0.10000000000000001");
        assert_eq!(fmt17(1.0), "1");
        assert_eq!(fmt17(-2.25), "-2.25");
        assert_eq!(fmt17(1e20), "1e+20");
        assert_eq!(fmt17(1.5e-7), "1.4999999999999999e-07");
        assert_eq!(fmt17(123456.0), "123456");
        assert_eq!(fmt17(0.0001), "0.0001");
        assert_eq!(fmt17(0.00001), "1.0000000000000001e-05");
    }

    #[test]
    fn fmt17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, std::f64::consts::PI, 6.02e23, -1e-300, 0.75] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn round_trip() {
        let mesh = Mesh::new(
            2,
            vec![
                Point::from([0.0, 0.0]),
                Point::from([1.0 / 3.0, 0.1]),
                Point::from([0.0, 1.0]),
            ],
            vec![Simplex::new(vec![0, 1, 2])],
        )
        .unwrap();
        let text = write_mesh_string(&mesh);
        let back = read_mesh_str(&text).unwrap();
        assert_eq!(back.points(), mesh.points());
        assert_eq!(back.simplices(), mesh.simplices());
        assert_eq!(write_mesh_string(&back), text);
    }

    #[test]
    fn diagnostics() {
        let bad_dim = r#"{"dim": 2, "points": [[0,0],[1,0,0]], "simplices": []}"#;
        let e = read_mesh_str(bad_dim).unwrap_err().to_string();
        assert!(e.contains("points[1]"), "{e}");

        let syntax = "{\n  \"dim\": 2,\n  \"points\": [[0,0],\n  oops\n}";
        let e = read_mesh_str(syntax).unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");

        let range = r#"{"dim": 1, "points": [[0],[1]], "simplices": [[0,5]]}"#;
        let e = read_mesh_str(range).unwrap_err().to_string();
        assert!(e.contains("simplices[0]"), "{e}");

        let fmt = r#"{"format": "other", "dim": 1, "points": []}"#;
        assert!(read_mesh_str(fmt).unwrap_err().to_string().contains("format"));
    }
}
