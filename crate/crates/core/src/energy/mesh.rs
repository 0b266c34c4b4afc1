//! Triangulations of the disc `U` conforming to a three-segment jump set.
//!
//! Each of the three regions bounded by the segments from the junction `ξ`
//! to the fixed endpoints `r·τ_1, r·τ_2, r·e^x` is meshed as the image of a
//! polar grid under `ρR(θ) ↦ ξ(1 − ρ) + ρR(θ)`, so boundary nodes never move
//! with `ξ`.

use crate::error::{CalibError, Result};
use crate::geometry::{SectorGeometry, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub radius: f64,
    /// Radial layers.
    pub n_radial: usize,
    /// Angular intervals per region.
    pub n_angular: usize,
}

impl MeshSpec {
    /// Mesh with size about `radius / n` in both directions at the boundary.
    pub fn with_size(radius: f64, n: usize) -> Self {
        let n_angular = ((2.0 * std::f64::consts::PI / 3.0) * n as f64).ceil() as usize;
        Self { radius, n_radial: n, n_angular }
    }
}

/// A jump-set segment with the regions on its two sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpSegment {
    pub a: Vec2,
    pub b: Vec2,
    pub regions: (usize, usize),
}

impl JumpSegment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

#[derive(Debug, Clone)]
pub struct StarMesh {
    pub spec: MeshSpec,
    pub junction: Vec2,
    pub nodes: Vec<Vec2>,
    /// Position of each node in the unshifted mesh (`ξ = 0`).
    pub reference: Vec<Vec2>,
    /// Region (sector index) of each node; merged nodes keep the first owner.
    pub node_region: Vec<usize>,
    pub on_boundary: Vec<bool>,
    pub triangles: Vec<[usize; 3]>,
    pub triangle_region: Vec<usize>,
    pub jumps: Vec<JumpSegment>,
}

/// Start angle of region `i` (counter-clockwise sweep of `2π/3`).
pub fn region_start_angle(i: usize) -> f64 {
    SectorGeometry::bisector_angle(i) - std::f64::consts::PI / 3.0
}

impl StarMesh {
    pub fn new(spec: MeshSpec, junction: Vec2) -> Result<Self> {
        Self::build(spec, junction, None)
    }

    /// Mesh in which the first `cut` radial nodes of the interface between
    /// regions `a` and `b` are shared, erasing that part of the jump.
    pub fn with_erased(spec: MeshSpec, junction: Vec2, a: usize, b: usize, cut: usize) -> Result<Self> {
        if a == b || a > 2 || b > 2 || cut == 0 || cut > spec.n_radial {
            return Err(CalibError::NonConformingMesh(format!("cannot erase {cut} layers between {a} and {b}")));
        }
        Self::build(spec, junction, Some((a, b, cut)))
    }

    fn build(spec: MeshSpec, junction: Vec2, erase: Option<(usize, usize, usize)>) -> Result<Self> {
        let r = spec.radius;
        let (nr, na) = (spec.n_radial, spec.n_angular);
        if nr < 1 || na < 1 || junction.norm() >= r {
            return Err(CalibError::NonConformingMesh(format!(
                "invalid mesh: {nr} x {na}, junction at distance {} from the centre",
                junction.norm()
            )));
        }
        let mut m = StarMesh {
            spec,
            junction,
            nodes: Vec::new(),
            reference: Vec::new(),
            node_region: Vec::new(),
            on_boundary: Vec::new(),
            triangles: Vec::new(),
            triangle_region: Vec::new(),
            jumps: Vec::new(),
        };
        let dtheta = 2.0 * std::f64::consts::PI / 3.0 / na as f64;
        // index[i][j][k]: region i, radial layer j (0 = junction), angular node k.
        let mut index = vec![vec![vec![usize::MAX; na + 1]; nr + 1]; 3];
        let g = SectorGeometry::new();
        for i in 0..3 {
            let t0 = region_start_angle(i);
            let (e0, e1) = g.sector_edges(i);
            let dir = |k: usize| -> Vec2 {
                if k == 0 {
                    g.ray(e0)
                } else if k == na {
                    g.ray(e1)
                } else {
                    let th = t0 + k as f64 * dtheta;
                    Vec2::new(th.cos(), th.sin())
                }
            };
            for j in 0..=nr {
                let rho = j as f64 / nr as f64;
                let ks = if j == 0 { 1 } else { na + 1 };
                for k in 0..ks {
                    let refp = rho * r * dir(k);
                    let p = if j == nr { refp } else { (1.0 - rho) * junction + refp };
                    index[i][j][k] = m.nodes.len();
                    m.nodes.push(p);
                    m.reference.push(refp);
                    m.node_region.push(i);
                    m.on_boundary.push(j == nr);
                }
                if j == 0 {
                    for k in 1..=na {
                        index[i][0][k] = index[i][0][0];
                    }
                }
            }
        }
        if let Some((a, b, cut)) = erase {
            // Region a's last edge or first edge coincides with region b's other edge.
            let (ka, kb) = shared_edge(a, b, na)?;
            for j in 0..=cut {
                let keep = index[a][j][ka];
                if j == 0 {
                    for k in 0..=na {
                        index[b][0][k] = keep;
                    }
                } else {
                    index[b][j][kb] = keep;
                }
            }
        }
        for i in 0..3 {
            for k in 0..na {
                m.push_triangle([index[i][0][0], index[i][1][k], index[i][1][k + 1]], i);
                for j in 1..nr {
                    let (p00, p01) = (index[i][j][k], index[i][j][k + 1]);
                    let (p10, p11) = (index[i][j + 1][k], index[i][j + 1][k + 1]);
                    m.push_triangle([p00, p10, p11], i);
                    m.push_triangle([p00, p11, p01], i);
                }
            }
        }
        m.compact();
        for i in 0..3 {
            let other = (i + 1) % 3;
            let end = r * g.ray(g.sector_edges(i).0);
            let mut start = junction;
            if let Some((a, b, cut)) = erase {
                if (a == i && b == other) || (a == other && b == i) {
                    let rho = cut as f64 / nr as f64;
                    start = (1.0 - rho) * junction + rho * end;
                }
            }
            if (end - start).norm() > 0.0 {
                m.jumps.push(JumpSegment { a: start, b: end, regions: (other, i) });
            }
        }
        m.check_orientation()?;
        Ok(m)
    }

    fn push_triangle(&mut self, t: [usize; 3], region: usize) {
        if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
            self.triangles.push(t);
            self.triangle_region.push(region);
        }
    }

    /// Removes nodes no longer referenced after merging.
    fn compact(&mut self) {
        let mut used = vec![false; self.nodes.len()];
        for t in &self.triangles {
            for &v in t {
                used[v] = true;
            }
        }
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut n = 0;
        for (v, &u) in used.iter().enumerate() {
            if u {
                map[v] = n;
                self.nodes[n] = self.nodes[v];
                self.reference[n] = self.reference[v];
                self.node_region[n] = self.node_region[v];
                self.on_boundary[n] = self.on_boundary[v];
                n += 1;
            }
        }
        self.nodes.truncate(n);
        self.reference.truncate(n);
        self.node_region.truncate(n);
        self.on_boundary.truncate(n);
        for t in &mut self.triangles {
            for v in t.iter_mut() {
                *v = map[*v];
            }
        }
    }

    fn check_orientation(&self) -> Result<()> {
        for (n, t) in self.triangles.iter().enumerate() {
            if self.signed_area(n) <= 0.0 {
                return Err(CalibError::NonConformingMesh(format!("triangle {n} {t:?} is degenerate or inverted")));
            }
        }
        Ok(())
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|v| self.nodes[v]);
        0.5 * crate::geometry::cross(&(b - a), &(c - a))
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area(t)).sum()
    }

    pub fn jump_length(&self) -> f64 {
        self.jumps.iter().map(JumpSegment::length).sum()
    }

    /// Gradients of the three barycentric coordinates and the area.
    pub fn shape_gradients(&self, t: usize) -> ([Vec2; 3], f64) {
        let [a, b, c] = self.triangles[t].map(|v| self.nodes[v]);
        let area = self.signed_area(t);
        let rot = |e: Vec2| Vec2::new(-e.y, e.x) / (2.0 * area);
        ([rot(c - b), rot(a - c), rot(b - a)], area)
    }
}

/// Angular node indices of the common edge of regions `a` and `b`.
fn shared_edge(a: usize, b: usize, na: usize) -> Result<(usize, usize)> {
    // Region i starts on the edge it shares with region (i + 1) % 3.
    if b == (a + 1) % 3 {
        Ok((0, na))
    } else if a == (b + 1) % 3 {
        Ok((na, 0))
    } else {
        Err(CalibError::NonConformingMesh(format!("regions {a} and {b} are not adjacent")))
    }
}
