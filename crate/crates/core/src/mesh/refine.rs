use super::generate::project_to_surface;
use super::{SurfaceSpec, TriangleMesh};

/// 1→4 midpoint subdivision.
///
/// The vertex inserted on edge `e` gets index `V + e`. Embedded meshes whose
/// spec names an embedded family have new vertices projected onto the exact
/// surface; intrinsic meshes are refined exactly (half-edges and midlines).
pub fn refine(mesh: &TriangleMesh, spec: Option<&SurfaceSpec>) -> TriangleMesh {
    let v = mesh.vertex_count();
    let mut faces = Vec::with_capacity(4 * mesh.face_count());
    for (f, &[a, b, c]) in mesh.faces().iter().enumerate() {
        let [eab, ebc, eca] = mesh.face_edges(f);
        let (m0, m1, m2) = (v + eab, v + ebc, v + eca);
        faces.push([a, m0, m2]);
        faces.push([m0, b, m1]);
        faces.push([m2, m1, c]);
        faces.push([m0, m1, m2]);
    }
    let tag = format!("{} +refine", mesh.tag());

    if let Some(positions) = mesh.positions() {
        let projector = spec.filter(|s| s.family.is_embedded());
        let mut out = positions.to_vec();
        out.reserve(mesh.edge_count());
        for &[i, j] in mesh.edges() {
            let (p, q) = (positions[i], positions[j]);
            let mid = [
                0.5 * (p[0] + q[0]),
                0.5 * (p[1] + q[1]),
                0.5 * (p[2] + q[2]),
            ];
            out.push(match projector {
                Some(s) => {
                    let unit = [mid[0] / s.scale, mid[1] / s.scale, mid[2] / s.scale];
                    let on = project_to_surface(&s.family, unit);
                    [on[0] * s.scale, on[1] * s.scale, on[2] * s.scale]
                }
                None => mid,
            });
        }
        return TriangleMesh::from_positions(out, faces, tag)
            .expect("subdivision of a valid mesh is valid");
    }

    // Intrinsic: children of edge e are halves; the midline opposite corner k
    // is half of the side opposite k.
    let mut lengths = std::collections::HashMap::with_capacity(2 * mesh.edge_count() + 3 * mesh.face_count());
    for (e, &[i, j]) in mesh.edges().iter().enumerate() {
        let half = 0.5 * mesh.edge_lengths()[e];
        lengths.insert(super::sorted_pair(i, v + e), half);
        lengths.insert(super::sorted_pair(j, v + e), half);
    }
    for f in 0..mesh.face_count() {
        let [eab, ebc, eca] = mesh.face_edges(f);
        let l = mesh.edge_lengths();
        lengths.insert(super::sorted_pair(v + eab, v + eca), 0.5 * l[ebc]);
        lengths.insert(super::sorted_pair(v + eab, v + ebc), 0.5 * l[eca]);
        lengths.insert(super::sorted_pair(v + ebc, v + eca), 0.5 * l[eab]);
    }
    TriangleMesh::from_edge_lengths(v + mesh.edge_count(), faces, |e| lengths.get(&e).copied(), tag)
        .expect("subdivision of a valid mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, validate, SurfaceFamily};

    #[test]
    fn icosahedron_subdivision_counts() {
        let spec = SurfaceSpec::new(SurfaceFamily::UnitSphereIcosa, 0);
        let m = refine(&generate(&spec).unwrap(), Some(&spec));
        assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (42, 120, 80));
        assert_eq!(validate(&m).unwrap().euler_characteristic, 2);
    }

    #[test]
    fn flat_torus_refines_to_doubled_grid() {
        let spec = SurfaceSpec::new(SurfaceFamily::FlatTorus { a: 1.0, b: 1.0 }, 0);
        let m = refine(&generate(&spec).unwrap(), Some(&spec));
        let direct = generate(&SurfaceSpec::new(SurfaceFamily::FlatTorus { a: 1.0, b: 1.0 }, 1)).unwrap();
        assert_eq!(m.vertex_count(), 256);
        assert_eq!(validate(&m).unwrap().euler_characteristic, 0);
        let mut a = m.edge_lengths().to_vec();
        let mut b = direct.edge_lengths().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
    }

    #[test]
    fn sphere_refinement_reprojects() {
        let spec = SurfaceSpec::new(SurfaceFamily::UnitSphereIcosa, 3);
        let m = refine(&generate(&spec).unwrap(), Some(&spec));
        assert_eq!(m.vertex_count(), 2562);
        for p in m.positions().unwrap() {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_sphere_refinement_stays_on_scaled_sphere() {
        let spec = SurfaceSpec::new(SurfaceFamily::UnitSphereIcosa, 1).with_scale(2.5);
        let m = refine(&generate(&spec).unwrap(), Some(&spec));
        for p in m.positions().unwrap() {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((r - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn unprojected_refinement_keeps_area() {
        let spec = SurfaceSpec::new(SurfaceFamily::UnitSphereIcosa, 1);
        let m = generate(&spec).unwrap();
        let r = refine(&m, None);
        let a0 = validate(&m).unwrap().total_area;
        let a1 = validate(&r).unwrap().total_area;
        assert!((a0 - a1).abs() < 1e-12 * a0);
    }
}
