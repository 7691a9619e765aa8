use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{refine, MeshError, Point3, SurfaceFamily, SurfaceSpec, TriangleMesh};

const ICOSAHEDRON_FACES: [[usize; 3]; 20] = [
    [0, 11, 5],
    [0, 5, 1],
    [0, 1, 7],
    [0, 7, 10],
    [0, 10, 11],
    [1, 5, 9],
    [5, 11, 4],
    [11, 10, 2],
    [10, 7, 6],
    [7, 1, 8],
    [3, 9, 4],
    [3, 4, 2],
    [3, 2, 6],
    [3, 6, 8],
    [3, 8, 9],
    [4, 9, 5],
    [2, 4, 11],
    [6, 2, 10],
    [8, 6, 7],
    [9, 8, 1],
];

/// Grid cells per side of the coarsest (resolution 0) flat or revolved torus.
const BASE_GRID: usize = 8;

fn normalize(p: Point3) -> Point3 {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

fn icosahedron() -> TriangleMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let positions = raw.iter().map(|p| normalize(*p)).collect();
    TriangleMesh::from_positions(positions, ICOSAHEDRON_FACES.to_vec(), "icosahedron")
        .expect("icosahedron connectivity is valid")
}

/// Moves every vertex by a uniform random offset of at most `amplitude`
/// times its shortest incident edge in each coordinate. Connectivity is kept.
pub fn jitter(mesh: &TriangleMesh, amplitude: f64, seed: u64) -> Result<TriangleMesh, MeshError> {
    let positions = mesh.positions().ok_or(MeshError::MissingPositions)?;
    let mut shortest = vec![f64::INFINITY; mesh.vertex_count()];
    for (&[a, b], &l) in mesh.edges().iter().zip(mesh.edge_lengths()) {
        shortest[a] = shortest[a].min(l);
        shortest[b] = shortest[b].min(l);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moved = positions
        .iter()
        .zip(&shortest)
        .map(|(p, &h)| std::array::from_fn(|k| p[k] + amplitude * h * rng.random_range(-1.0..1.0)))
        .collect();
    TriangleMesh::from_positions(moved, mesh.faces().to_vec(), format!("{} jitter({amplitude},{seed})", mesh.tag()))
}

/// Radius of the perturbed sphere in the direction of the unit vector `u`.
fn perturbed_radius(amplitude: f64, frequency: u32, u: &Point3) -> f64 {
    let theta = u[2].clamp(-1.0, 1.0).acos();
    1.0 + amplitude * (f64::from(frequency) * theta).cos()
}

/// Moves `p` (in unit-scale coordinates) onto the family's exact surface.
/// The flat torus has no embedding, so points are returned unchanged.
pub(crate) fn project_to_surface(family: &SurfaceFamily, p: Point3) -> Point3 {
    match *family {
        SurfaceFamily::UnitSphereIcosa => normalize(p),
        SurfaceFamily::Ellipsoid { a, b, c } => {
            // pull back to the unit sphere, normalize, push forward
            let u = normalize([p[0] / a, p[1] / b, p[2] / c]);
            [a * u[0], b * u[1], c * u[2]]
        }
        SurfaceFamily::PerturbedSphere {
            amplitude,
            frequency,
        } => {
            let u = normalize(p);
            let r = perturbed_radius(amplitude, frequency, &u);
            [r * u[0], r * u[1], r * u[2]]
        }
        SurfaceFamily::TorusOfRevolution { major, minor } => {
            let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let (cx, cy) = if rho > 0.0 {
                (major * p[0] / rho, major * p[1] / rho)
            } else {
                (major, 0.0)
            };
            let d = [p[0] - cx, p[1] - cy, p[2]];
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            [cx + minor * d[0] / n, cy + minor * d[1] / n, minor * d[2] / n]
        }
        SurfaceFamily::FlatTorus { .. } => p,
    }
}

fn grid_faces(nu: usize, nv: usize) -> Vec<[usize; 3]> {
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let v00 = idx(i, j);
            let v10 = idx(i + 1, j);
            let v11 = idx(i + 1, j + 1);
            let v01 = idx(i, j + 1);
            faces.push([v00, v10, v11]);
            faces.push([v00, v11, v01]);
        }
    }
    faces
}

fn flat_torus(a: f64, b: f64, resolution: u32) -> Result<TriangleMesh, MeshError> {
    let refine_factor = 1usize << resolution;
    // the shorter period gets BASE_GRID cells; the other side keeps cells near-square
    let (base_x, base_y) = if a <= b {
        (BASE_GRID, ((BASE_GRID as f64) * b / a).round().max(BASE_GRID as f64) as usize)
    } else {
        (((BASE_GRID as f64) * a / b).round().max(BASE_GRID as f64) as usize, BASE_GRID)
    };
    let (nx, ny) = (base_x * refine_factor, base_y * refine_factor);
    let hx = a / nx as f64;
    let hy = b / ny as f64;
    let diag = hx.hypot(hy);
    let faces = grid_faces(nx, ny);
    // every edge is axis-aligned or a (+1, +1) diagonal in the unwrapped grid
    let mut lengths = HashMap::with_capacity(3 * nx * ny);
    let idx = |i: usize, j: usize| (i % nx) * ny + (j % ny);
    for i in 0..nx {
        for j in 0..ny {
            let v = idx(i, j);
            for (w, l) in [(idx(i + 1, j), hx), (idx(i, j + 1), hy), (idx(i + 1, j + 1), diag)] {
                lengths.insert(super::sorted_pair(v, w), l);
            }
        }
    }
    TriangleMesh::from_edge_lengths(
        nx * ny,
        faces,
        |e| lengths.get(&e).copied(),
        format!("flat_torus(a={a},b={b},grid={nx}x{ny})"),
    )
}

fn torus_of_revolution(major: f64, minor: f64, resolution: u32) -> Result<TriangleMesh, MeshError> {
    let refine_factor = 1usize << resolution;
    let nv = BASE_GRID * refine_factor;
    let nu = ((BASE_GRID as f64) * major / minor).round().max(BASE_GRID as f64) as usize * refine_factor;
    let tau = std::f64::consts::TAU;
    let mut positions = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = tau * i as f64 / nu as f64;
        for j in 0..nv {
            let v = tau * j as f64 / nv as f64;
            let rho = major + minor * v.cos();
            positions.push([rho * u.cos(), rho * u.sin(), minor * v.sin()]);
        }
    }
    TriangleMesh::from_positions(
        positions,
        grid_faces(nu, nv),
        format!("torus(R={major},r={minor},grid={nu}x{nv})"),
    )
}

fn sphere_like(spec: &SurfaceSpec) -> Result<TriangleMesh, MeshError> {
    let unit = SurfaceSpec::new(SurfaceFamily::UnitSphereIcosa, spec.resolution);
    let mut mesh = icosahedron();
    for _ in 0..spec.resolution {
        mesh = refine(&mesh, Some(&unit));
    }
    let positions = mesh
        .positions()
        .expect("icosphere is embedded")
        .iter()
        .map(|u| match spec.family {
            SurfaceFamily::Ellipsoid { a, b, c } => [a * u[0], b * u[1], c * u[2]],
            SurfaceFamily::PerturbedSphere {
                amplitude,
                frequency,
            } => {
                let r = perturbed_radius(amplitude, frequency, u);
                [r * u[0], r * u[1], r * u[2]]
            }
            _ => *u,
        })
        .collect();
    TriangleMesh::from_positions(positions, mesh.faces().to_vec(), "")
}

/// Builds a test surface from its spec.
pub fn generate(spec: &SurfaceSpec) -> Result<TriangleMesh, MeshError> {
    spec.check()?;
    let mesh = match spec.family {
        SurfaceFamily::UnitSphereIcosa
        | SurfaceFamily::Ellipsoid { .. }
        | SurfaceFamily::PerturbedSphere { .. } => sphere_like(spec)?,
        SurfaceFamily::TorusOfRevolution { major, minor } => {
            torus_of_revolution(major, minor, spec.resolution)?
        }
        SurfaceFamily::FlatTorus { a, b } => flat_torus(a, b, spec.resolution)?,
    };
    if mesh.vertex_count() < 4 {
        return Err(MeshError::ResolutionTooLow {
            vertices: mesh.vertex_count(),
        });
    }
    let tag = format!(
        "{}(res={},scale={}) {}",
        spec.family.name(),
        spec.resolution,
        spec.scale,
        mesh.tag()
    );
    let mesh = if spec.scale == 1.0 {
        mesh
    } else {
        mesh.scaled(spec.scale)
    };
    Ok(mesh.with_tag(tag.trim_end().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate;

    #[test]
    fn icosahedron_counts() {
        let m = generate(&SurfaceSpec::new(SurfaceFamily::UnitSphereIcosa, 0)).unwrap();
        assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (12, 30, 20));
        let inv = validate(&m).unwrap();
        assert_eq!(inv.euler_characteristic, 2);
        assert_eq!(inv.genus, 0);
    }

    #[test]
    fn flat_torus_grid_counts() {
        let m = generate(&SurfaceSpec::new(SurfaceFamily::FlatTorus { a: 1.0, b: 1.0 }, 0)).unwrap();
        assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (64, 192, 128));
        assert!(m.positions().is_none());
        assert_eq!(validate(&m).unwrap().euler_characteristic, 0);
    }

    #[test]
    fn rectangular_flat_torus_keeps_cells_square() {
        let m = generate(&SurfaceSpec::new(SurfaceFamily::FlatTorus { a: 1.0, b: 2.0 }, 0)).unwrap();
        assert_eq!(m.vertex_count(), 8 * 16);
        let inv = validate(&m).unwrap();
        assert!((inv.total_area - 2.0).abs() < 1e-12);
    }

    #[test]
    fn revolved_torus_is_genus_one() {
        let m = generate(&SurfaceSpec::new(
            SurfaceFamily::TorusOfRevolution {
                major: 2.0,
                minor: 0.5,
            },
            0,
        ))
        .unwrap();
        let inv = validate(&m).unwrap();
        assert_eq!(inv.euler_characteristic, 0);
        assert_eq!(inv.genus, 1);
    }

    #[test]
    fn projections_land_on_surface() {
        let p = [0.3, -0.7, 0.2];
        let q = project_to_surface(&SurfaceFamily::Ellipsoid { a: 1.0, b: 2.0, c: 3.0 }, p);
        let level = (q[0] / 1.0).powi(2) + (q[1] / 2.0).powi(2) + (q[2] / 3.0).powi(2);
        assert!((level - 1.0).abs() < 1e-14);

        let fam = SurfaceFamily::TorusOfRevolution {
            major: 2.0,
            minor: 0.5,
        };
        let q = project_to_surface(&fam, [1.2, 0.9, 0.1]);
        let rho = q[0].hypot(q[1]);
        assert!(((rho - 2.0).powi(2) + q[2] * q[2] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn perturbed_sphere_radius_range() {
        let fam = SurfaceFamily::PerturbedSphere {
            amplitude: 0.3,
            frequency: 3,
        };
        let m = generate(&SurfaceSpec::new(fam, 2)).unwrap();
        for p in m.positions().unwrap() {
            let r = crate::mesh::distance(p, &[0.0; 3]);
            assert!((0.7 - 1e-12..=1.3 + 1e-12).contains(&r));
        }
        assert_eq!(validate(&m).unwrap().euler_characteristic, 2);
    }
}
