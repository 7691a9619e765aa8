//! Wavefront OBJ (embedded meshes) and a plain-text intrinsic format.
//!
//! Intrinsic format, whitespace separated, 0-based indices:
//!
//! ```text
//! intrinsic
//! <V> <F>
//! <i> <j> <k>          F face lines, counterclockwise
//! <i> <j> <length>     one line per edge, i < j
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{MeshError, TriangleMesh};

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn as_text(bytes: &[u8]) -> Result<&str, MeshError> {
    std::str::from_utf8(bytes).map_err(|e| parse_err(0, format!("not UTF-8: {e}")))
}

pub fn save_obj(mesh: &TriangleMesh) -> Result<Vec<u8>, MeshError> {
    let positions = mesh.positions().ok_or(MeshError::MissingPositions)?;
    let mut out = String::new();
    let _ = writeln!(out, "# {}", mesh.tag());
    for p in positions {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    Ok(out.into_bytes())
}

pub fn load_obj(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    let text = as_text(bytes)?;
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(|t| t.parse::<f64>().map_err(|e| parse_err(line_no, format!("bad coordinate {t:?}: {e}"))))
                    .collect::<Result<_, _>>()?;
                if coords.len() != 3 {
                    return Err(parse_err(line_no, "vertex needs three coordinates"));
                }
                positions.push([coords[0], coords[1], coords[2]]);
            }
            Some("f") => {
                let corners: Vec<&str> = tokens.collect();
                if corners.len() != 3 {
                    return Err(MeshError::NonTriangleFace {
                        line: line_no,
                        corners: corners.len(),
                    });
                }
                let mut tri = [0usize; 3];
                for (k, c) in corners.iter().enumerate() {
                    let index = c.split('/').next().unwrap_or("");
                    let i: i64 = index
                        .parse()
                        .map_err(|e| parse_err(line_no, format!("bad face index {c:?}: {e}")))?;
                    let resolved = match i {
                        i if i > 0 => i - 1,
                        i if i < 0 => positions.len() as i64 + i,
                        _ => return Err(parse_err(line_no, "face index 0 is invalid in OBJ")),
                    };
                    if resolved < 0 || resolved as usize >= positions.len() {
                        return Err(parse_err(line_no, format!("face index {i} refers to a missing vertex")));
                    }
                    tri[k] = resolved as usize;
                }
                faces.push(tri);
            }
            _ => {}
        }
    }
    TriangleMesh::from_positions(positions, faces, "obj")
}

pub fn save_intrinsic(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = String::from("intrinsic\n");
    let _ = writeln!(out, "{} {}", mesh.vertex_count(), mesh.face_count());
    for f in mesh.faces() {
        let _ = writeln!(out, "{} {} {}", f[0], f[1], f[2]);
    }
    let mut order: Vec<usize> = (0..mesh.edge_count()).collect();
    order.sort_by_key(|&e| mesh.edges()[e]);
    for e in order {
        let [i, j] = mesh.edges()[e];
        let _ = writeln!(out, "{i} {j} {:.16e}", mesh.edge_lengths()[e]);
    }
    out.into_bytes()
}

pub fn load_intrinsic(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    let text = as_text(bytes)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, "intrinsic")) => {}
        Some((n, other)) => return Err(parse_err(n, format!("expected header `intrinsic`, found {other:?}"))),
        None => return Err(parse_err(1, "empty input")),
    }
    let (n, counts) = lines.next().ok_or_else(|| parse_err(2, "missing `V F` line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| parse_err(n, format!("bad count {t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    let [v, f] = counts[..] else {
        return Err(parse_err(n, "expected two counts `V F`"));
    };
    let mut faces = Vec::with_capacity(f);
    for _ in 0..f {
        let (n, l) = lines.next().ok_or_else(|| parse_err(0, "fewer face lines than declared"))?;
        let idx: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| parse_err(n, format!("bad face index {t:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        match idx[..] {
            [a, b, c] => faces.push([a, b, c]),
            _ => {
                return Err(MeshError::NonTriangleFace {
                    line: n,
                    corners: idx.len(),
                })
            }
        }
    }
    let mut lengths = HashMap::new();
    for (n, l) in lines {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let [a, b, len] = tokens[..] else {
            return Err(parse_err(n, "edge line needs `i j length`"));
        };
        let a: usize = a.parse().map_err(|e| parse_err(n, format!("bad index: {e}")))?;
        let b: usize = b.parse().map_err(|e| parse_err(n, format!("bad index: {e}")))?;
        let len: f64 = len.parse().map_err(|e| parse_err(n, format!("bad length: {e}")))?;
        lengths.insert(super::sorted_pair(a, b), len);
    }
    TriangleMesh::from_edge_lengths(v, faces, |e| lengths.get(&e).copied(), "intrinsic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, validate, SurfaceFamily, SurfaceSpec};

    #[test]
    fn icosahedron_obj_round_trip() {
        let m = generate(&SurfaceSpec::new(SurfaceFamily::UnitSphereIcosa, 0)).unwrap();
        let back = load_obj(&save_obj(&m).unwrap()).unwrap();
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.positions().unwrap(), m.positions().unwrap());
        assert_eq!(validate(&back).unwrap(), validate(&m).unwrap());
    }

    #[test]
    fn quad_face_is_rejected() {
        let obj = b"v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert_eq!(
            load_obj(obj).unwrap_err(),
            MeshError::NonTriangleFace { line: 5, corners: 4 }
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let obj = b"# header\nv 0 0 0\nv 1 zero 0\n";
        assert!(matches!(load_obj(obj), Err(MeshError::Parse { line: 3, .. })));
        let obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
        assert!(matches!(load_obj(obj), Err(MeshError::Parse { line: 4, .. })));
    }

    #[test]
    fn obj_with_texture_indices_and_negative_refs() {
        let obj = b"v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1/1 3/2 2/3\nf -4 -3 -1\nf 1 4 3\nf 2 3 4\n";
        let m = load_obj(obj).unwrap();
        assert_eq!(m.faces()[1], [0, 1, 3]);
        assert_eq!(validate(&m).unwrap().euler_characteristic, 2);
    }

    #[test]
    fn save_obj_requires_positions() {
        let m = generate(&SurfaceSpec::new(SurfaceFamily::FlatTorus { a: 1.0, b: 1.0 }, 0)).unwrap();
        assert_eq!(save_obj(&m).unwrap_err(), MeshError::MissingPositions);
    }

    #[test]
    fn intrinsic_round_trip() {
        let m = generate(&SurfaceSpec::new(SurfaceFamily::FlatTorus { a: 1.0, b: 1.5 }, 0)).unwrap();
        let back = load_intrinsic(&save_intrinsic(&m)).unwrap();
        assert_eq!(back.faces(), m.faces());
        for (e, &[i, j]) in m.edges().iter().enumerate() {
            assert_eq!(back.edge_length(i, j), Some(m.edge_lengths()[e]));
        }
        assert_eq!(validate(&back).unwrap().euler_characteristic, 0);
    }

    #[test]
    fn intrinsic_missing_edge_is_reported() {
        let text = b"intrinsic\n3 1\n0 1 2\n0 1 1.0\n1 2 1.0\n";
        assert_eq!(
            load_intrinsic(text).unwrap_err(),
            MeshError::MissingEdgeLength { edge: [0, 2] }
        );
    }
}
