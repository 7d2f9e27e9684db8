//! ASCII OFF (read) and ASCII PLY (read/write).
//!
//! Coordinates are held as f64 internally and carried as 32-bit floats in
//! files; PLY floats are written with 9 significant digits, which is full
//! round-trip precision for f32.

use crate::cloud::{Point3, PointCloud, TriMesh};
use crate::error::{Error, Result};

fn tokens(content: &str) -> impl Iterator<Item = &str> {
    content
        .lines()
        .map(|l| match l.find('#') {
            Some(i) => &l[..i],
            None => l,
        })
        .flat_map(|l| l.split_whitespace())
}

/// Parse an ASCII OFF mesh. Quad and larger faces are fan-triangulated.
/// Tolerates the known malformation where the magic and the counts share a
/// line ("OFF490 448 0").
pub fn parse_off(bytes: &[u8]) -> Result<TriMesh> {
    let content = std::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedHeader("OFF is not valid UTF-8".into()))?;
    let mut toks = tokens(content);
    let magic = toks
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty OFF file".into()))?;
    let mut pending: Option<&str> = None;
    if magic != "OFF" {
        // Glued header: "OFF490" carries the vertex count.
        let rest = magic
            .strip_prefix("OFF")
            .ok_or_else(|| Error::MalformedHeader(format!("expected OFF magic, got '{magic}'")))?;
        if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
            return Err(Error::MalformedHeader(format!("expected OFF magic, got '{magic}'")));
        }
        pending = Some(rest);
    }
    let mut next_usize = |what: &str, toks: &mut dyn Iterator<Item = &str>| -> Result<usize> {
        let t = match pending.take() {
            Some(t) => t,
            None => toks
                .next()
                .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?,
        };
        t.parse::<usize>()
            .map_err(|_| Error::MalformedHeader(format!("bad {what} '{t}'")))
    };
    let nverts = next_usize("vertex count", &mut toks)?;
    let nfaces = next_usize("face count", &mut toks)?;
    let _nedges = next_usize("edge count", &mut toks)?;

    let next_f64 = |what: &str, toks: &mut dyn Iterator<Item = &str>| -> Result<f64> {
        let t = toks
            .next()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        t.parse::<f64>()
            .map_err(|_| Error::MalformedHeader(format!("bad {what} '{t}'")))
    };
    let mut vertices = Vec::with_capacity(nverts);
    for i in 0..nverts {
        let x = next_f64(&format!("vertex {i} x"), &mut toks)?;
        let y = next_f64(&format!("vertex {i} y"), &mut toks)?;
        let z = next_f64(&format!("vertex {i} z"), &mut toks)?;
        vertices.push(Point3::new(x, y, z));
    }

    let mut faces = Vec::with_capacity(nfaces);
    for f in 0..nfaces {
        let count = {
            let t = toks
                .next()
                .ok_or_else(|| Error::MalformedHeader(format!("missing face {f}")))?;
            t.parse::<usize>()
                .map_err(|_| Error::MalformedHeader(format!("bad face size '{t}'")))?
        };
        if count < 3 {
            return Err(Error::NonTriangleFace(count));
        }
        let mut idx = Vec::with_capacity(count);
        for k in 0..count {
            let t = toks
                .next()
                .ok_or_else(|| Error::MalformedHeader(format!("missing face {f} index {k}")))?;
            let i = t
                .parse::<usize>()
                .map_err(|_| Error::MalformedHeader(format!("bad face index '{t}'")))?;
            if i >= nverts {
                return Err(Error::IndexOutOfRange { index: i, nverts });
            }
            idx.push(i);
        }
        for k in 1..count - 1 {
            faces.push([idx[0], idx[k], idx[k + 1]]);
        }
    }
    TriMesh::new(vertices, faces)
}

/// Parse an ASCII PLY vertex list into a point cloud. Faces and extra
/// properties are ignored; x, y, z float properties are required.
pub fn parse_ply(bytes: &[u8]) -> Result<PointCloud> {
    let content = std::str::from_utf8(bytes)
        .map_err(|_| Error::MalformedHeader("PLY is not valid UTF-8".into()))?;
    let mut lines = content.lines();
    match lines.next() {
        Some(l) if l.trim() == "ply" => {}
        other => {
            return Err(Error::MalformedHeader(format!(
                "expected 'ply' magic, got '{}'",
                other.unwrap_or("")
            )))
        }
    }
    let mut vertex_count: Option<usize> = None;
    let mut in_vertex_element = false;
    let mut vertex_props: Vec<String> = Vec::new();
    let mut saw_end = false;
    let mut ascii = false;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("comment") {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("format") => {
                ascii = parts.next() == Some("ascii");
            }
            Some("element") => {
                let name = parts.next().unwrap_or("");
                in_vertex_element = name == "vertex";
                if in_vertex_element {
                    let n = parts
                        .next()
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| Error::MalformedHeader("bad vertex count".into()))?;
                    vertex_count = Some(n);
                }
            }
            Some("property") => {
                if in_vertex_element {
                    let _ty = parts.next();
                    if let Some(name) = parts.last() {
                        vertex_props.push(name.to_string());
                    }
                }
            }
            Some("end_header") => {
                saw_end = true;
                break;
            }
            _ => {}
        }
    }
    if !saw_end {
        return Err(Error::MalformedHeader("missing end_header".into()));
    }
    if !ascii {
        return Err(Error::MalformedHeader("only ascii PLY is supported".into()));
    }
    let n = vertex_count.ok_or_else(|| Error::MalformedHeader("no vertex element".into()))?;
    let coord_idx = |name: &str| -> Result<usize> {
        vertex_props
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::MissingCoordinateProperty(name.to_string()))
    };
    let (xi, yi, zi) = (coord_idx("x")?, coord_idx("y")?, coord_idx("z")?);

    let mut points = Vec::with_capacity(n);
    for (row, line) in lines.by_ref().take(n).enumerate() {
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() < vertex_props.len() {
            return Err(Error::MalformedHeader(format!("vertex row {row} too short")));
        }
        let parse = |t: &str| -> Result<f64> {
            t.parse::<f32>()
                .map(f64::from)
                .map_err(|_| Error::MalformedHeader(format!("bad coordinate '{t}'")))
        };
        points.push(Point3::new(parse(vals[xi])?, parse(vals[yi])?, parse(vals[zi])?));
    }
    if points.len() != n {
        return Err(Error::MalformedHeader(format!(
            "expected {n} vertices, file has {}",
            points.len()
        )));
    }
    Ok(PointCloud::new(points))
}

/// Serialize a point cloud as ASCII PLY with x, y, z float properties.
pub fn write_ply(cloud: &PointCloud) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", cloud.len()));
    out.push_str("property float x\nproperty float y\nproperty float z\nend_header\n");
    for p in &cloud.points {
        out.push_str(&format!(
            "{:.8e} {:.8e} {:.8e}\n",
            p.x as f32, p.y as f32, p.z as f32
        ));
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    const CUBE_OFF: &str = "OFF\n8 6 12\n\
        -1 -1 -1\n1 -1 -1\n1 1 -1\n-1 1 -1\n-1 -1 1\n1 -1 1\n1 1 1\n-1 1 1\n\
        4 0 1 2 3\n4 4 5 6 7\n4 0 1 5 4\n4 2 3 7 6\n4 0 3 7 4\n4 1 2 6 5\n";

    #[test]
    fn cube_off_fan_splits_quads() {
        let mesh = parse_off(CUBE_OFF.as_bytes()).unwrap();
        assert_eq!(mesh.vertices.len(), 8);
        assert_eq!(mesh.faces.len(), 12);
    }

    #[test]
    fn glued_header_is_tolerated() {
        // Build a valid mesh with 490 vertices / 448 triangles, then glue the
        // header keyword onto the vertex count.
        let nv = 490;
        let nf = 448;
        let mut body = String::new();
        for i in 0..nv {
            body.push_str(&format!("{} {} {}\n", i as f64 * 0.1, (i % 7) as f64, 0.0));
        }
        for i in 0..nf {
            body.push_str(&format!("3 {} {} {}\n", i % nv, (i + 1) % nv, (i + 2) % nv));
        }
        let glued = format!("OFF{nv} {nf} 0\n{body}");
        let mesh = parse_off(glued.as_bytes()).unwrap();
        assert_eq!(mesh.vertices.len(), nv);
        assert_eq!(mesh.faces.len(), nf);
    }

    #[test]
    fn bad_magic_rejected() {
        assert!(matches!(
            parse_off(b"OFZ\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn off_index_out_of_range() {
        let bad = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n";
        assert!(matches!(
            parse_off(bad.as_bytes()),
            Err(Error::IndexOutOfRange { index: 9, nverts: 3 })
        ));
    }

    #[test]
    fn ply_three_vertices() {
        let ply = "ply\nformat ascii 1.0\nelement vertex 3\n\
            property float x\nproperty float y\nproperty float z\nend_header\n\
            0 0 0\n1 0 0\n0 1 0\n";
        let cloud = parse_ply(ply.as_bytes()).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.points[1], Point3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn ply_round_trip_is_identity_at_f32() {
        let mut rng = crate::seed::rng_for(11, "io", &[]);
        let points: Vec<Point3> = (0..100)
            .map(|_| {
                // f32-representable coordinates: the declared file precision.
                Point3::new(
                    f64::from(rng.gen::<f32>() * 4.0 - 2.0),
                    f64::from(rng.gen::<f32>() * 4.0 - 2.0),
                    f64::from(rng.gen::<f32>() * 4.0 - 2.0),
                )
            })
            .collect();
        let cloud = PointCloud::new(points);
        let back = parse_ply(&write_ply(&cloud)).unwrap();
        assert_eq!(cloud.points, back.points);
    }

    #[test]
    fn ply_missing_z_property() {
        let ply = "ply\nformat ascii 1.0\nelement vertex 1\n\
            property float x\nproperty float y\nend_header\n0 0\n";
        assert!(matches!(
            parse_ply(ply.as_bytes()),
            Err(Error::MissingCoordinateProperty(p)) if p == "z"
        ));
    }
}
