use serde::{Deserialize, Serialize};

use super::{distance, triangle_area, MeshError, TriangleMesh};
use crate::ddg::corner_angles;

/// Relative tolerance between stored lengths and position distances.
const LENGTH_CONSISTENCY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshInvariants {
    pub euler_characteristic: i64,
    pub genus: i64,
    pub total_area: f64,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
    /// Smallest corner angle, radians.
    pub min_angle: f64,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Checks every mesh invariant and returns the topological summary.
pub fn validate(mesh: &TriangleMesh) -> Result<MeshInvariants, MeshError> {
    let ne = mesh.edge_count();
    let mut uses = vec![0usize; ne];
    let mut orientation = vec![0i32; ne];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let fe = mesh.face_edges(f);
        for k in 0..3 {
            let e = fe[k];
            uses[e] += 1;
            orientation[e] += if tri[k] < tri[(k + 1) % 3] { 1 } else { -1 };
        }
    }
    for e in 0..ne {
        let edge = mesh.edges()[e];
        match uses[e] {
            2 => {}
            n if n < 2 => return Err(MeshError::NotClosed { edge, faces: n }),
            n => return Err(MeshError::NonManifoldEdge { edge, faces: n }),
        }
        if orientation[e] != 0 {
            return Err(MeshError::NotOrientable { edge });
        }
    }

    let mut total_area = 0.0;
    let mut min_angle = f64::INFINITY;
    for f in 0..mesh.face_count() {
        let l = mesh.face_side_lengths(f);
        let strict = l.iter().all(|x| x.is_finite() && *x > 0.0)
            && l[0] < l[1] + l[2]
            && l[1] < l[0] + l[2]
            && l[2] < l[0] + l[1];
        let area = triangle_area(l);
        if !strict || area <= 0.0 {
            return Err(MeshError::DegenerateTriangle { face: f, lengths: l });
        }
        total_area += area;
        for a in corner_angles(l) {
            min_angle = min_angle.min(a);
        }
    }

    if let Some(positions) = mesh.positions() {
        for (e, &[i, j]) in mesh.edges().iter().enumerate() {
            let stored = mesh.edge_lengths()[e];
            let measured = distance(&positions[i], &positions[j]);
            if (stored - measured).abs() > LENGTH_CONSISTENCY * measured.max(stored) {
                return Err(MeshError::InconsistentLength {
                    edge: [i, j],
                    stored,
                    measured,
                });
            }
        }
    }

    let v = mesh.vertex_count();
    let mut parent: Vec<usize> = (0..v).collect();
    for &[i, j] in mesh.edges() {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
        }
    }
    if v == 0 {
        return Err(MeshError::ResolutionTooLow { vertices: 0 });
    }
    let root = find(&mut parent, 0);
    if let Some(vertex) = (1..v).find(|&x| find(&mut parent, x) != root) {
        return Err(MeshError::Disconnected { vertex });
    }

    let chi = v as i64 - ne as i64 + mesh.face_count() as i64;
    Ok(MeshInvariants {
        euler_characteristic: chi,
        genus: (2 - chi) / 2,
        total_area,
        vertex_count: v,
        edge_count: ne,
        face_count: mesh.face_count(),
        min_angle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, SurfaceFamily, SurfaceSpec};

    fn icosahedron() -> TriangleMesh {
        generate(&SurfaceSpec::new(SurfaceFamily::UnitSphereIcosa, 0)).unwrap()
    }

    #[test]
    fn deleted_face_is_not_closed() {
        let m = icosahedron().without_faces(&[0]).unwrap();
        match validate(&m) {
            Err(MeshError::NotClosed { edge, faces: 1 }) => {
                let [a, b, c] = icosahedron().faces()[0];
                let boundary = [[a.min(b), a.max(b)], [b.min(c), b.max(c)], [a.min(c), a.max(c)]];
                assert!(boundary.contains(&edge));
            }
            other => panic!("expected not-closed, got {other:?}"),
        }
    }

    #[test]
    fn flipped_face_is_not_orientable() {
        let m = icosahedron();
        let mut faces = m.faces().to_vec();
        faces[3].swap(0, 1);
        let flipped = TriangleMesh::from_positions(m.positions().unwrap().to_vec(), faces, "flip").unwrap();
        assert!(matches!(validate(&flipped), Err(MeshError::NotOrientable { .. })));
    }

    #[test]
    fn two_components_are_disconnected() {
        let m = icosahedron();
        let mut positions = m.positions().unwrap().to_vec();
        positions.extend(m.positions().unwrap().iter().map(|p| [p[0] + 5.0, p[1], p[2]]));
        let mut faces = m.faces().to_vec();
        faces.extend(m.faces().iter().map(|f| [f[0] + 12, f[1] + 12, f[2] + 12]));
        let two = TriangleMesh::from_positions(positions, faces, "two").unwrap();
        assert!(matches!(validate(&two), Err(MeshError::Disconnected { vertex: 12 })));
    }

    #[test]
    fn flat_triangle_is_degenerate() {
        let m = icosahedron().into_intrinsic();
        let bad_edge = m.edges()[0];
        let squashed = TriangleMesh::from_edge_lengths(
            m.vertex_count(),
            m.faces().to_vec(),
            |e| {
                if e == bad_edge {
                    Some(10.0)
                } else {
                    m.edge_length(e[0], e[1])
                }
            },
            "squashed",
        )
        .unwrap();
        assert!(matches!(validate(&squashed), Err(MeshError::DegenerateTriangle { .. })));
    }

    #[test]
    fn icosahedron_area_and_angles() {
        let inv = validate(&icosahedron()).unwrap();
        // regular icosahedron inscribed in the unit sphere: edge = 4/sqrt(10 + 2 sqrt 5)
        let edge = 4.0 / (10.0 + 2.0 * 5f64.sqrt()).sqrt();
        let area = 5.0 * 3f64.sqrt() * edge * edge;
        assert!((inv.total_area - area).abs() < 1e-12);
        assert!((inv.min_angle - std::f64::consts::FRAC_PI_3).abs() < 1e-12);
    }
}
