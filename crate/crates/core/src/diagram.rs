//! Combinatorial diagrams (F°(Z), α, β) as oriented cell complexes.
//!
//! Every face is stored as its boundary word read counterclockwise, so the
//! face lies to the left of each side. Boundary edges are directed along the
//! boundary orientation and appear in exactly one face; α and β edges appear
//! in two faces with opposite directions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arc_algebra::{
    valid_id, Algebra, ArcDiagram, ArcDiagramSpec, Chord, CircleSpec, PairSpec,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Crossing,
    Rho,
    Sigma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Alpha,
    Beta,
    Rho,
    Sigma,
}

impl EdgeKind {
    pub fn is_boundary(self) -> bool {
        matches!(self, EdgeKind::Rho | EdgeKind::Sigma)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    pub kind: VertexKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub kind: EdgeKind,
    pub label: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideSpec {
    pub edge: String,
    pub dir: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub id: String,
    pub sides: Vec<SideSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArcDiagramRef {
    Inline(ArcDiagramSpec),
    Path(String),
}

/// On-disk form of a diagram. Arc paths list vertex ids from one endpoint
/// to the other.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramSpec {
    pub arc_diagram: ArcDiagramRef,
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
    pub faces: Vec<FaceSpec>,
    pub alpha_arcs: BTreeMap<String, Vec<String>>,
    pub beta_arcs: BTreeMap<String, Vec<String>>,
}

/// A directed traversal of an edge: forward runs `from -> to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Side {
    pub edge: u32,
    pub fwd: bool,
}

impl Side {
    pub fn rev(self) -> Side {
        Side {
            edge: self.edge,
            fwd: !self.fwd,
        }
    }
}

/// A half-edge: an edge seen from one of its endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfEdge {
    pub edge: u32,
    pub at_start: bool,
}

/// Which piece of a boundary circle a boundary edge covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    /// From position `start` to `start + 1` on `circle`.
    Short { circle: usize, start: usize },
    /// The gap containing the basepoint.
    Base { circle: usize },
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub id: String,
    pub kind: VertexKind,
    /// Position on the ρ or σ arc diagram for boundary vertices.
    pub point: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub id: String,
    pub kind: EdgeKind,
    pub label: String,
    pub from: usize,
    pub to: usize,
    /// Matched pair index for α (in Z) and β (in Z') edges.
    pub arc: Option<usize>,
    pub segment: Option<Segment>,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub id: String,
    pub sides: Vec<Side>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Generator {
    pub id: String,
    #[serde(skip)]
    pub vertex: usize,
    /// Matched pair of Z' (the β arc): the left idempotent.
    #[serde(skip)]
    pub left: usize,
    /// Matched pair of Z (the α arc): the right idempotent.
    #[serde(skip)]
    pub right: usize,
    pub left_idem: String,
    pub right_idem: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub check: &'static str,
    pub cell: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<Failure>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn has(&self, check: &str) -> bool {
        self.failures.iter().any(|f| f.check == check)
    }

    fn fail(&mut self, check: &'static str, cell: impl Into<String>, detail: impl Into<String>) {
        self.failures.push(Failure {
            check,
            cell: cell.into(),
            detail: detail.into(),
        });
    }
}

#[derive(Clone, Debug)]
pub struct Diagram {
    spec: DiagramSpec,
    rho: Algebra,
    sigma: Algebra,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
    /// face and position of each side, indexed by `2 * edge + (fwd ? 0 : 1)`
    side_face: Vec<Option<(u32, u32)>>,
    next_ccw: HashMap<HalfEdge, HalfEdge>,
    half_edges_at: Vec<Vec<HalfEdge>>,
    vertex_index: BTreeMap<String, usize>,
    alpha_paths: BTreeMap<usize, Vec<usize>>,
    beta_paths: BTreeMap<usize, Vec<usize>>,
    parse_problems: ValidationReport,
}

fn side_slot(s: Side) -> usize {
    2 * s.edge as usize + usize::from(!s.fwd)
}

impl Diagram {
    pub fn load(path: &Path) -> Result<Diagram> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut spec: DiagramSpec = serde_json::from_str(&text)?;
        if let ArcDiagramRef::Path(p) = &spec.arc_diagram {
            let ap = path.parent().unwrap_or(Path::new(".")).join(p);
            let atext = std::fs::read_to_string(&ap).map_err(|source| Error::Io {
                path: ap.clone(),
                source,
            })?;
            spec.arc_diagram = ArcDiagramRef::Inline(serde_json::from_str(&atext)?);
        }
        Diagram::from_spec(spec)
    }

    /// Loads and insists that every validation check passes.
    pub fn load_valid(path: &Path) -> Result<Diagram> {
        let d = Diagram::load(path)?;
        d.ensure_valid()?;
        Ok(d)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        match report.failures.first() {
            None => Ok(()),
            Some(f) => Err(Error::Invalid(format!(
                "{} failure(s), first {} at {}: {}",
                report.failures.len(),
                f.check,
                f.cell,
                f.detail
            ))),
        }
    }

    pub fn from_spec(spec: DiagramSpec) -> Result<Diagram> {
        let z = match &spec.arc_diagram {
            ArcDiagramRef::Inline(a) => ArcDiagram::new(a.clone())?,
            ArcDiagramRef::Path(p) => {
                return Err(Error::Malformed(format!("unresolved arc diagram path {p}")))
            }
        };
        let dual = dual_diagram(&z)?;
        Diagram::assemble(spec, z, dual)
    }

    fn assemble(spec: DiagramSpec, z: ArcDiagram, dual: ArcDiagram) -> Result<Diagram> {
        let rho = Algebra::new(z.clone(), 'I');
        let sigma = Algebra::new(dual.clone(), 'J');
        let mut problems = ValidationReport::default();

        let mut vertex_index = BTreeMap::new();
        let mut vertices = Vec::new();
        for v in &spec.vertices {
            if !valid_id(&v.id) {
                return Err(Error::Malformed(format!("bad vertex id {:?}", v.id)));
            }
            if vertex_index.insert(v.id.clone(), vertices.len()).is_some() {
                return Err(Error::Malformed(format!("vertex {} listed twice", v.id)));
            }
            let point = match v.kind {
                VertexKind::Crossing => None,
                VertexKind::Rho => z.location(&v.id),
                VertexKind::Sigma => dual.location(&v.id),
            };
            if v.kind != VertexKind::Crossing && point.is_none() {
                problems.fail(
                    "boundary-point",
                    &v.id,
                    "boundary vertex is not a marked point of its arc diagram",
                );
            }
            vertices.push(Vertex {
                id: v.id.clone(),
                kind: v.kind,
                point,
            });
        }

        let mut edge_index = BTreeMap::new();
        let mut edges = Vec::new();
        for e in &spec.edges {
            if edge_index.insert(e.id.clone(), edges.len()).is_some() {
                return Err(Error::Malformed(format!("edge {} listed twice", e.id)));
            }
            let from = *vertex_index.get(&e.from).ok_or_else(|| {
                Error::Malformed(format!("edge {} starts at unknown {}", e.id, e.from))
            })?;
            let to = *vertex_index.get(&e.to).ok_or_else(|| {
                Error::Malformed(format!("edge {} ends at unknown {}", e.id, e.to))
            })?;
            let (arc, segment) = match e.kind {
                EdgeKind::Alpha => (z.arc_index(&e.label), None),
                EdgeKind::Beta => (dual.arc_index(&e.label), None),
                EdgeKind::Rho => (
                    None,
                    parse_segment(&rho, &e.label, &vertices[from], &vertices[to]),
                ),
                EdgeKind::Sigma => (
                    None,
                    parse_segment(&sigma, &e.label, &vertices[from], &vertices[to]),
                ),
            };
            if matches!(e.kind, EdgeKind::Alpha | EdgeKind::Beta) && arc.is_none() {
                problems.fail(
                    "arc-label",
                    &e.id,
                    format!("no matched pair named {}", e.label),
                );
            }
            if e.kind.is_boundary() && segment.is_none() {
                problems.fail(
                    "boundary-label",
                    &e.id,
                    format!("label {} does not match the endpoints", e.label),
                );
            }
            edges.push(Edge {
                id: e.id.clone(),
                kind: e.kind,
                label: e.label.clone(),
                from,
                to,
                arc,
                segment,
            });
        }

        let mut faces = Vec::new();
        let mut face_ids = BTreeSet::new();
        let mut side_face = vec![None; 2 * edges.len()];
        for (fi, f) in spec.faces.iter().enumerate() {
            if !face_ids.insert(f.id.clone()) {
                return Err(Error::Malformed(format!("face {} listed twice", f.id)));
            }
            let mut sides = Vec::new();
            for (k, s) in f.sides.iter().enumerate() {
                let e = *edge_index.get(&s.edge).ok_or_else(|| {
                    Error::Malformed(format!("face {} uses unknown edge {}", f.id, s.edge))
                })?;
                let side = match s.dir {
                    1 => Side {
                        edge: e as u32,
                        fwd: true,
                    },
                    -1 => Side {
                        edge: e as u32,
                        fwd: false,
                    },
                    d => return Err(Error::Malformed(format!("face {} has direction {d}", f.id))),
                };
                let slot = &mut side_face[side_slot(side)];
                if slot.is_some() {
                    problems.fail(
                        "edge-sides",
                        &s.edge,
                        "the same edge side is used by two face corners",
                    );
                }
                *slot = Some((fi as u32, k as u32));
                sides.push(side);
            }
            faces.push(Face {
                id: f.id.clone(),
                sides,
            });
        }

        let mut d = Diagram {
            spec,
            rho,
            sigma,
            vertices,
            edges,
            faces,
            side_face,
            next_ccw: HashMap::new(),
            half_edges_at: Vec::new(),
            vertex_index,
            alpha_paths: BTreeMap::new(),
            beta_paths: BTreeMap::new(),
            parse_problems: problems,
        };
        d.build_rotation();
        d.alpha_paths = d.resolve_arcs(EdgeKind::Alpha)?;
        d.beta_paths = d.resolve_arcs(EdgeKind::Beta)?;
        if let ArcDiagramRef::Path(_) = d.spec.arc_diagram {
            unreachable!()
        }
        Ok(d)
    }

    fn build_rotation(&mut self) {
        let mut half_edges_at = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            half_edges_at[e.from].push(HalfEdge {
                edge: i as u32,
                at_start: true,
            });
            half_edges_at[e.to].push(HalfEdge {
                edge: i as u32,
                at_start: false,
            });
        }
        let mut next = HashMap::new();
        for f in &self.faces {
            let n = f.sides.len();
            for k in 0..n {
                let arriving = f.sides[k];
                let leaving = f.sides[(k + 1) % n];
                next.insert(self.out_half_edge(leaving), self.back_half_edge(arriving));
            }
        }
        self.half_edges_at = half_edges_at;
        self.next_ccw = next;
    }

    fn resolve_arcs(&self, kind: EdgeKind) -> Result<BTreeMap<usize, Vec<usize>>> {
        let (table, z) = match kind {
            EdgeKind::Alpha => (&self.spec.alpha_arcs, self.rho.diagram()),
            _ => (&self.spec.beta_arcs, self.sigma.diagram()),
        };
        let mut out = BTreeMap::new();
        for (arc, path) in table {
            let Some(ai) = z.arc_index(arc) else {
                continue;
            };
            let mut vs = Vec::new();
            for v in path {
                vs.push(*self.vertex_index.get(v).ok_or_else(|| {
                    Error::Malformed(format!("arc {arc} passes unknown vertex {v}"))
                })?);
            }
            out.insert(ai, vs);
        }
        Ok(out)
    }

    pub fn spec(&self) -> &DiagramSpec {
        &self.spec
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("diagram specs serialize")
    }

    /// B(Z), acting on the right.
    pub fn rho_algebra(&self) -> &Algebra {
        &self.rho
    }

    /// B(Z'), acting on the left.
    pub fn sigma_algebra(&self) -> &Algebra {
        &self.sigma
    }

    pub fn vertex_by_id(&self, id: &str) -> Option<usize> {
        self.vertex_index.get(id).copied()
    }

    pub fn side_start(&self, s: Side) -> usize {
        let e = &self.edges[s.edge as usize];
        if s.fwd {
            e.from
        } else {
            e.to
        }
    }

    pub fn side_end(&self, s: Side) -> usize {
        self.side_start(s.rev())
    }

    pub fn side_kind(&self, s: Side) -> EdgeKind {
        self.edges[s.edge as usize].kind
    }

    /// The half-edge along which `s` leaves its start vertex.
    pub fn out_half_edge(&self, s: Side) -> HalfEdge {
        HalfEdge {
            edge: s.edge,
            at_start: s.fwd,
        }
    }

    /// The half-edge at the end vertex of `s` pointing back along `s`.
    pub fn back_half_edge(&self, s: Side) -> HalfEdge {
        HalfEdge {
            edge: s.edge,
            at_start: !s.fwd,
        }
    }

    pub fn half_edge_vertex(&self, h: HalfEdge) -> usize {
        let e = &self.edges[h.edge as usize];
        if h.at_start {
            e.from
        } else {
            e.to
        }
    }

    /// The face having `s` in its counterclockwise boundary, with its position.
    pub fn face_of_side(&self, s: Side) -> Option<(usize, usize)> {
        self.side_face[side_slot(s)].map(|(f, k)| (f as usize, k as usize))
    }

    pub fn next_ccw(&self, h: HalfEdge) -> Option<HalfEdge> {
        self.next_ccw.get(&h).copied()
    }

    /// Number of face corners at the vertex.
    pub fn corners_at(&self, v: usize) -> usize {
        let hs = &self.half_edges_at[v];
        hs.iter().filter(|h| self.next_ccw.contains_key(h)).count()
    }

    pub fn is_interior_vertex(&self, v: usize) -> bool {
        self.vertices[v].kind == VertexKind::Crossing
    }

    /// Number of face corners swept turning counterclockwise from `from` to
    /// `to`, both at the same vertex. `None` if the sweep leaves the surface
    /// or does not reach `to` within one turn.
    pub fn ccw_distance(&self, from: HalfEdge, to: HalfEdge) -> Option<u32> {
        let limit = self.half_edges_at[self.half_edge_vertex(from)].len();
        let mut h = from;
        for k in 1..=limit {
            h = self.next_ccw(h)?;
            if h == to {
                return Some(k as u32);
            }
        }
        None
    }

    /// The corner count of a walk arriving along `arriving` and leaving
    /// along `leaving`, measured inside the region on the walk's left.
    pub fn turn_angle(&self, arriving: Side, leaving: Side) -> Option<u32> {
        self.ccw_distance(self.out_half_edge(leaving), self.back_half_edge(arriving))
    }

    pub fn alpha_path(&self, arc: usize) -> Option<&[usize]> {
        self.alpha_paths.get(&arc).map(|v| v.as_slice())
    }

    pub fn beta_path(&self, arc: usize) -> Option<&[usize]> {
        self.beta_paths.get(&arc).map(|v| v.as_slice())
    }

    /// The edge of the given kind and arc joining two vertices.
    pub fn arc_side(&self, kind: EdgeKind, arc: usize, a: usize, b: usize) -> Option<Side> {
        self.half_edges_at[a].iter().find_map(|h| {
            let e = &self.edges[h.edge as usize];
            if e.kind != kind || e.arc != Some(arc) {
                return None;
            }
            let s = Side {
                edge: h.edge,
                fwd: h.at_start,
            };
            (self.side_end(s) == b).then_some(s)
        })
    }

    /// Boundary edge covering the gap after position `start` on a circle.
    pub fn boundary_side(&self, kind: EdgeKind, circle: usize, start: usize) -> Option<Side> {
        self.edges.iter().enumerate().find_map(|(i, e)| {
            (e.kind == kind && e.segment == Some(Segment::Short { circle, start })).then_some(
                Side {
                    edge: i as u32,
                    fwd: true,
                },
            )
        })
    }

    /// Sides covering a chord, in boundary order.
    pub fn chord_sides(&self, kind: EdgeKind, c: Chord) -> Option<Vec<Side>> {
        (c.start..c.end)
            .map(|s| self.boundary_side(kind, c.circle as usize, s as usize))
            .collect()
    }

    pub fn rho_vertex(&self, circle: usize, pos: usize) -> Option<usize> {
        self.vertex_by_id(self.rho.diagram().point(circle, pos))
    }

    pub fn sigma_vertex(&self, circle: usize, pos: usize) -> Option<usize> {
        self.vertex_by_id(self.sigma.diagram().point(circle, pos))
    }

    /// Faces whose boundary runs along a basepoint segment; no polygon may
    /// cover them.
    pub fn basepoint_faces(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for (i, e) in self.edges.iter().enumerate() {
            if matches!(e.segment, Some(Segment::Base { .. })) {
                if let Some((f, _)) = self.face_of_side(Side {
                    edge: i as u32,
                    fwd: true,
                }) {
                    out.insert(f);
                }
            }
        }
        out
    }

    /// Intersection points of α and β, sorted by id.
    pub fn generators(&self) -> Vec<Generator> {
        let mut out = Vec::new();
        for (vi, v) in self.vertices.iter().enumerate() {
            if v.kind != VertexKind::Crossing {
                continue;
            }
            let mut alpha = None;
            let mut beta = None;
            for h in &self.half_edges_at[vi] {
                let e = &self.edges[h.edge as usize];
                match e.kind {
                    EdgeKind::Alpha => alpha = alpha.or(e.arc),
                    EdgeKind::Beta => beta = beta.or(e.arc),
                    _ => {}
                }
            }
            if let (Some(a), Some(b)) = (alpha, beta) {
                out.push(Generator {
                    id: v.id.clone(),
                    vertex: vi,
                    left: b,
                    right: a,
                    left_idem: self.sigma.idem_name(b),
                    right_idem: self.rho.idem_name(a),
                });
            }
        }
        out.sort();
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Runs every structural check and lists all failures.
    pub fn validate(&self) -> ValidationReport {
        let mut r = self.parse_problems.clone();
        self.check_faces(&mut r);
        self.check_edge_sides(&mut r);
        self.check_links(&mut r);
        self.check_arcs(EdgeKind::Alpha, &mut r);
        self.check_arcs(EdgeKind::Beta, &mut r);
        self.check_boundary(EdgeKind::Rho, &mut r);
        self.check_boundary(EdgeKind::Sigma, &mut r);
        self.check_topology(&mut r);
        if r.ok() {
            self.check_alpha_regions(&mut r);
        }
        r
    }

    fn check_faces(&self, r: &mut ValidationReport) {
        for f in &self.faces {
            if f.sides.is_empty() {
                r.fail("face-cycle", &f.id, "empty boundary word");
                continue;
            }
            let n = f.sides.len();
            for k in 0..n {
                if self.side_end(f.sides[k]) != self.side_start(f.sides[(k + 1) % n]) {
                    r.fail(
                        "face-cycle",
                        &f.id,
                        format!("side {} does not lead into side {}", k, (k + 1) % n),
                    );
                }
            }
        }
    }

    fn check_edge_sides(&self, r: &mut ValidationReport) {
        for (i, e) in self.edges.iter().enumerate() {
            let f = self.side_face[2 * i].is_some();
            let b = self.side_face[2 * i + 1].is_some();
            let ok = if e.kind.is_boundary() {
                f && !b
            } else {
                f && b
            };
            if !ok {
                let detail = if e.kind.is_boundary() {
                    "boundary edges need exactly one face, on their left"
                } else {
                    "interior edges need a face on each side"
                };
                r.fail("edge-sides", &e.id, detail);
            }
        }
    }

    fn check_links(&self, r: &mut ValidationReport) {
        for (vi, v) in self.vertices.iter().enumerate() {
            let hs = &self.half_edges_at[vi];
            let boundary_count = hs
                .iter()
                .filter(|h| self.edges[h.edge as usize].kind.is_boundary())
                .count();
            let expect_boundary = v.kind != VertexKind::Crossing;
            if expect_boundary != (boundary_count > 0) {
                r.fail(
                    "vertex-kind",
                    &v.id,
                    "boundary edges must meet exactly the boundary vertices",
                );
                continue;
            }
            if hs.is_empty() {
                r.fail("vertex-link", &v.id, "isolated vertex");
                continue;
            }
            // Corners around a vertex must form one cycle (interior) or one
            // chain (boundary).
            let starts: Vec<&HalfEdge> = if expect_boundary {
                hs.iter()
                    .filter(|h| !self.next_ccw.values().any(|n| n == *h))
                    .collect()
            } else {
                vec![&hs[0]]
            };
            if starts.len() != 1 {
                r.fail("vertex-link", &v.id, "the corners do not form a single fan");
                continue;
            }
            let mut seen = BTreeSet::new();
            let mut h = *starts[0];
            seen.insert(h);
            while let Some(n) = self.next_ccw(h) {
                if !seen.insert(n) {
                    break;
                }
                h = n;
            }
            if seen.len() != hs.len() {
                r.fail("vertex-link", &v.id, "the corners do not form a single fan");
                continue;
            }
            if v.kind == VertexKind::Crossing {
                let mut kinds = Vec::new();
                let mut h = hs[0];
                for _ in 0..hs.len() {
                    kinds.push(self.edges[h.edge as usize].kind);
                    h = self.next_ccw(h).unwrap_or(h);
                }
                let alternating = kinds.len() == 4
                    && (0..4).all(|k| kinds[k] != kinds[(k + 1) % 4])
                    && kinds
                        .iter()
                        .all(|k| matches!(k, EdgeKind::Alpha | EdgeKind::Beta));
                if !alternating {
                    r.fail("transversality", &v.id, format!("link reads {kinds:?}"));
                }
            } else {
                let interior: Vec<EdgeKind> = hs
                    .iter()
                    .map(|h| self.edges[h.edge as usize].kind)
                    .filter(|k| !k.is_boundary())
                    .collect();
                let want = if v.kind == VertexKind::Rho {
                    EdgeKind::Alpha
                } else {
                    EdgeKind::Beta
                };
                if interior.len() != 1 || boundary_count != 2 {
                    if v.kind == VertexKind::Rho && interior.contains(&EdgeKind::Beta) {
                        r.fail(
                            "beta-endpoint-side",
                            &v.id,
                            "a β arc ends on the ρ boundary",
                        );
                    } else {
                        r.fail("vertex-link", &v.id, "marked points meet exactly one arc");
                    }
                } else if interior[0] != want {
                    let check = if want == EdgeKind::Alpha {
                        "beta-endpoint-side"
                    } else {
                        "alpha-endpoint-side"
                    };
                    r.fail(check, &v.id, "arc ends on the wrong boundary");
                }
            }
        }
    }

    fn check_arcs(&self, kind: EdgeKind, r: &mut ValidationReport) {
        let (paths, table, z, check, end_kind) = match kind {
            EdgeKind::Alpha => (
                &self.alpha_paths,
                &self.spec.alpha_arcs,
                self.rho.diagram(),
                "alpha-arc",
                VertexKind::Rho,
            ),
            _ => (
                &self.beta_paths,
                &self.spec.beta_arcs,
                self.sigma.diagram(),
                "beta-arc",
                VertexKind::Sigma,
            ),
        };
        if table.len() != z.pairs().len() || paths.len() != z.pairs().len() {
            r.fail(
                "arc-count",
                format!("{kind:?}"),
                format!("{} arcs for {} matched pairs", table.len(), z.pairs().len()),
            );
        }
        let mut used = BTreeSet::new();
        for (&ai, path) in paths {
            let name = &z.pairs()[ai].arc;
            if path.len() < 2 {
                r.fail(check, name, "arc needs two endpoints");
                continue;
            }
            let ends = [path[0], path[path.len() - 1]];
            for &e in &ends {
                if self.vertices[e].kind != end_kind {
                    let c = if kind == EdgeKind::Beta && self.vertices[e].kind == VertexKind::Rho {
                        "beta-endpoint-side"
                    } else {
                        check
                    };
                    r.fail(
                        c,
                        name,
                        format!(
                            "endpoint {} is not on the expected boundary",
                            self.vertices[e].id
                        ),
                    );
                }
            }
            let mut end_ids = [
                self.vertices[ends[0]].id.clone(),
                self.vertices[ends[1]].id.clone(),
            ];
            end_ids.sort();
            let mut want = z.pairs()[ai].points.clone();
            want.sort();
            if end_ids != want {
                r.fail(
                    check,
                    name,
                    format!("endpoints {end_ids:?} differ from matched pair {want:?}"),
                );
            }
            for v in &path[1..path.len() - 1] {
                if self.vertices[*v].kind != VertexKind::Crossing {
                    r.fail(
                        check,
                        name,
                        format!(
                            "interior vertex {} is on the boundary",
                            self.vertices[*v].id
                        ),
                    );
                }
            }
            for w in path.windows(2) {
                match self.arc_side(kind, ai, w[0], w[1]) {
                    Some(s) => {
                        if !used.insert(s.edge) {
                            r.fail(check, name, "arc reuses an edge");
                        }
                    }
                    None => r.fail(
                        check,
                        name,
                        format!(
                            "no edge from {} to {}",
                            self.vertices[w[0]].id, self.vertices[w[1]].id
                        ),
                    ),
                }
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.kind == kind && !used.contains(&(i as u32)) {
                r.fail(check, &e.id, "edge is not on any listed arc");
            }
        }
    }

    fn check_boundary(&self, kind: EdgeKind, r: &mut ValidationReport) {
        let (z, vkind, check) = match kind {
            EdgeKind::Rho => (self.rho.diagram(), VertexKind::Rho, "rho-side"),
            _ => (self.sigma.diagram(), VertexKind::Sigma, "sigma-side"),
        };
        for (ci, c) in z.circles().iter().enumerate() {
            for p in &c.points {
                match self.vertex_by_id(p) {
                    Some(v) if self.vertices[v].kind == vkind => {}
                    _ => r.fail(check, p, "marked point has no boundary vertex"),
                }
            }
            let n = c.points.len();
            for s in 0..n {
                let seg = if s + 1 < n {
                    Segment::Short {
                        circle: ci,
                        start: s,
                    }
                } else {
                    Segment::Base { circle: ci }
                };
                let count = self
                    .edges
                    .iter()
                    .filter(|e| e.kind == kind && e.segment == Some(seg))
                    .count();
                if count != 1 {
                    r.fail(
                        check,
                        &c.id,
                        format!("segment after position {s} appears {count} times"),
                    );
                }
            }
        }
        for v in &self.vertices {
            if v.kind == vkind && v.point.is_none() {
                r.fail(check, &v.id, "boundary vertex is not a marked point");
            }
        }
    }

    fn check_topology(&self, r: &mut ValidationReport) {
        let z = self.rho.diagram();
        let want = 2 - 2 * z.genus() as i64 - 2 * z.circles().len() as i64;
        let chi = self.euler_characteristic();
        if chi != want {
            r.fail(
                "euler",
                "diagram",
                format!("Euler characteristic {chi}, expected {want}"),
            );
        }
        let mut uf = UnionFind::new(self.vertices.len());
        for e in &self.edges {
            uf.union(e.from, e.to);
        }
        let roots: BTreeSet<usize> = (0..self.vertices.len()).map(|v| uf.find(v)).collect();
        if roots.len() > 1 {
            r.fail(
                "connected",
                "diagram",
                format!("{} components", roots.len()),
            );
        }
    }

    /// Each region of the surface cut along the α arcs and the basepoint
    /// strips must be a disk meeting exactly one σ boundary circle.
    fn check_alpha_regions(&self, r: &mut ValidationReport) {
        let nf = self.faces.len();
        // Node f is the face, node nf + f is the second half of a face split
        // by a basepoint strip.
        let mut uf = UnionFind::new(2 * nf);
        let mut half_of_side: HashMap<Side, usize> = HashMap::new();
        let mut touches: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); 2 * nf];
        for (fi, f) in self.faces.iter().enumerate() {
            let rho_base = f.sides.iter().position(|s| {
                self.side_kind(*s) == EdgeKind::Rho
                    && matches!(
                        self.edges[s.edge as usize].segment,
                        Some(Segment::Base { .. })
                    )
            });
            let sigma_base = f.sides.iter().position(|s| {
                self.side_kind(*s) == EdgeKind::Sigma
                    && matches!(
                        self.edges[s.edge as usize].segment,
                        Some(Segment::Base { .. })
                    )
            });
            let split = match (rho_base, sigma_base) {
                (Some(a), Some(b)) => Some((a, b)),
                (None, None) => None,
                _ => {
                    r.fail(
                        "basepoint-strip",
                        &f.id,
                        "basepoint segments of ρ and σ must share a face",
                    );
                    return;
                }
            };
            for (k, s) in f.sides.iter().enumerate() {
                let node = match split {
                    Some((a, b)) if in_cyclic_open(a, b, k) => nf + fi,
                    _ => fi,
                };
                half_of_side.insert(*s, node);
                if let Some(Segment::Short { circle, .. } | Segment::Base { circle }) =
                    self.edges[s.edge as usize].segment
                {
                    if self.side_kind(*s) == EdgeKind::Sigma {
                        touches[node].insert(circle);
                        if let Some((a, b)) = split {
                            if k == a || k == b {
                                touches[fi].insert(circle);
                                touches[nf + fi].insert(circle);
                            }
                        }
                    }
                }
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.kind == EdgeKind::Beta {
                let a = half_of_side[&Side {
                    edge: i as u32,
                    fwd: true,
                }];
                let b = half_of_side[&Side {
                    edge: i as u32,
                    fwd: false,
                }];
                uf.union(a, b);
            }
        }
        let mut regions: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for node in half_of_side.values() {
            regions.entry(uf.find(*node)).or_default();
        }
        for (node, t) in touches.iter().enumerate() {
            if half_of_side.values().any(|n| *n == node) {
                regions
                    .entry(uf.find(node))
                    .or_default()
                    .extend(t.iter().copied());
            }
        }
        let circles = self.sigma.diagram().circles().len();
        if regions.len() != circles {
            r.fail(
                "alpha-regions",
                "diagram",
                format!(
                    "{} regions off the α arcs for {} boundary circles",
                    regions.len(),
                    circles
                ),
            );
        }
        let mut covered = BTreeSet::new();
        for t in regions.values() {
            if t.len() != 1 {
                r.fail(
                    "alpha-regions",
                    "diagram",
                    format!("a region meets {} σ circles", t.len()),
                );
            }
            covered.extend(t.iter().copied());
        }
        if covered.len() != circles {
            r.fail("alpha-regions", "diagram", "some σ circle meets no region");
        }
    }
}

/// Is `k` strictly between `a` and `b` going forward cyclically?
fn in_cyclic_open(a: usize, b: usize, k: usize) -> bool {
    if a < b {
        a < k && k < b
    } else {
        k > a || k < b
    }
}

fn parse_segment(alg: &Algebra, label: &str, from: &Vertex, to: &Vertex) -> Option<Segment> {
    let (fc, fp) = from.point?;
    let (tc, tp) = to.point?;
    if fc != tc {
        return None;
    }
    let n = alg.diagram().circles()[fc].points.len();
    if label == "z" {
        return (fp == n - 1 && tp == 0).then_some(Segment::Base { circle: fc });
    }
    let c = alg.parse_chord(label).ok()?;
    (c.is_short() && c.circle as usize == fc && c.start as usize == fp && c.end as usize == tp)
        .then_some(Segment::Short {
            circle: fc,
            start: fp,
        })
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Identity diagram construction.
///
/// For each matched pair h = {a, b} there is one crossing `x_h`, the α arc
/// a → x_h → b, and a β arc through x_h joining the two σ points that sit
/// on either side of the handle. For each gap (u, v) of consecutive points
/// there is one hexagonal face.
struct IdentityBuild {
    spec: DiagramSpec,
    dual: ArcDiagram,
}

fn identity_build(z: &ArcDiagram) -> Result<IdentityBuild> {
    let clash = |pre: &str| {
        z.circles().iter().flat_map(|c| c.points.iter()).any(|p| {
            p.strip_prefix(pre)
                .is_some_and(|r| !r.is_empty() && r.chars().all(|c| c.is_ascii_digit()))
        })
    };
    if clash("x") {
        return Err(Error::Malformed(
            "point ids of the form x<n> collide with generator names".into(),
        ));
    }
    let qpre = ["q", "s", "t", "u", "w"]
        .into_iter()
        .find(|p| !clash(p))
        .expect("some prefix is free");
    let pairs = z.pairs();
    let circles = z.circles();
    let pair_of = |p: &str| z.pair_of(p).expect("validated");
    let partner = |p: &str| -> String {
        let pr = &pairs[pair_of(p)];
        if pr.points[0] == p {
            pr.points[1].clone()
        } else {
            pr.points[0].clone()
        }
    };
    let prev = |p: &str| -> String {
        let (c, i) = z.location(p).unwrap();
        let n = circles[c].points.len();
        circles[c].points[(i + n - 1) % n].clone()
    };
    let is_first = |p: &str| z.location(p).unwrap().1 == 0;
    // σ point s_{w+} is keyed by w; s_{w-} is s_{partner(w)+}.
    let succ = |w: &str| -> String { prev(&partner(w)) };

    // Cycles of the successor map are the σ circles. Each is cut at the
    // unique step that crosses a basepoint gap, i.e. at w whose partner is
    // the first point of its circle.
    let mut seen = BTreeSet::new();
    let mut sigma_circles: Vec<Vec<String>> = Vec::new();
    let all: Vec<String> = circles.iter().flat_map(|c| c.points.clone()).collect();
    for w0 in &all {
        if seen.contains(w0) {
            continue;
        }
        let mut cyc = vec![w0.clone()];
        seen.insert(w0.clone());
        let mut w = succ(w0);
        while &w != w0 {
            seen.insert(w.clone());
            cyc.push(w.clone());
            w = succ(&w);
        }
        let cuts: Vec<usize> = (0..cyc.len())
            .filter(|&k| is_first(&partner(&cyc[k])))
            .collect();
        if cuts.len() != 1 {
            return Err(Error::Invalid(format!(
                "dual boundary cycle through {} crosses {} basepoints",
                cyc[0],
                cuts.len()
            )));
        }
        let start = (cuts[0] + 1) % cyc.len();
        cyc.rotate_left(start);
        sigma_circles.push(cyc);
    }
    // Order dual circles by the Z circle whose basepoint gap they contain.
    let circle_of_cut = |cyc: &Vec<String>| {
        let last = cyc.last().unwrap();
        z.location(&partner(last)).unwrap().0
    };
    sigma_circles.sort_by_key(circle_of_cut);

    let mut q_name: BTreeMap<String, String> = BTreeMap::new();
    let mut dual_circles = Vec::new();
    let mut counter = 0;
    for (ci, cyc) in sigma_circles.iter().enumerate() {
        let mut pts = Vec::new();
        for w in cyc {
            counter += 1;
            let q = format!("{qpre}{counter}");
            q_name.insert(w.clone(), q.clone());
            pts.push(q);
        }
        dual_circles.push(CircleSpec {
            id: format!("d{}", ci + 1),
            points: pts,
        });
    }
    let splus = |w: &str| q_name[w].clone();
    let sminus = |w: &str| q_name[&partner(w)].clone();
    let dual_pairs: Vec<PairSpec> = pairs
        .iter()
        .map(|p| PairSpec {
            arc: p.arc.clone(),
            points: [splus(&p.points[0]), sminus(&p.points[0])],
        })
        .collect();
    let dual = ArcDiagram::new(ArcDiagramSpec {
        genus: z.genus(),
        circles: dual_circles.clone(),
        matched_pairs: dual_pairs,
    })?;

    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut alpha_arcs = BTreeMap::new();
    let mut beta_arcs = BTreeMap::new();
    for c in circles {
        for p in &c.points {
            vertices.push(VertexSpec {
                id: p.clone(),
                kind: VertexKind::Rho,
            });
        }
    }
    for c in &dual_circles {
        for q in &c.points {
            vertices.push(VertexSpec {
                id: q.clone(),
                kind: VertexKind::Sigma,
            });
        }
    }
    let xname = |h: usize| format!("x{}", h + 1);
    for (h, p) in pairs.iter().enumerate() {
        let x = xname(h);
        vertices.push(VertexSpec {
            id: x.clone(),
            kind: VertexKind::Crossing,
        });
        let (a, b) = (&p.points[0], &p.points[1]);
        edges.push(EdgeSpec {
            id: format!("a{}_1", p.arc),
            kind: EdgeKind::Alpha,
            label: p.arc.clone(),
            from: a.clone(),
            to: x.clone(),
        });
        edges.push(EdgeSpec {
            id: format!("a{}_2", p.arc),
            kind: EdgeKind::Alpha,
            label: p.arc.clone(),
            from: x.clone(),
            to: b.clone(),
        });
        edges.push(EdgeSpec {
            id: format!("b{}_1", p.arc),
            kind: EdgeKind::Beta,
            label: p.arc.clone(),
            from: splus(a),
            to: x.clone(),
        });
        edges.push(EdgeSpec {
            id: format!("b{}_2", p.arc),
            kind: EdgeKind::Beta,
            label: p.arc.clone(),
            from: x.clone(),
            to: sminus(a),
        });
        alpha_arcs.insert(p.arc.clone(), vec![a.clone(), x.clone(), b.clone()]);
        beta_arcs.insert(p.arc.clone(), vec![splus(a), x.clone(), sminus(a)]);
    }
    let rho_alg = Algebra::new(z.clone(), 'I');
    let sigma_alg = Algebra::new(dual.clone(), 'J');
    // σ edges run s_{v-} -> s_{u+} for each gap (u, v).
    let mut faces = Vec::new();
    let mut gap_count = 0;
    for (ci, c) in circles.iter().enumerate() {
        let n = c.points.len();
        for k in 0..n {
            let u = &c.points[k];
            let v = &c.points[(k + 1) % n];
            let base = k + 1 == n;
            let rho_id = if base {
                format!("rz{}", ci + 1)
            } else {
                format!("r_{u}_{v}")
            };
            let rho_label = if base {
                "z".to_string()
            } else {
                rho_alg.chord_name(Chord {
                    circle: ci as u16,
                    start: k as u16,
                    end: k as u16 + 1,
                })
            };
            edges.push(EdgeSpec {
                id: rho_id.clone(),
                kind: EdgeKind::Rho,
                label: rho_label,
                from: u.clone(),
                to: v.clone(),
            });
            let (s_from, s_to) = (sminus(v), splus(u));
            let (dc, dp) = dual.location(&s_from).unwrap();
            let (_, dq) = dual.location(&s_to).unwrap();
            let sigma_base = dp + 1 != dq;
            let sigma_id = if sigma_base {
                format!("sz{}", dc + 1)
            } else {
                format!("s_{s_from}_{s_to}")
            };
            let sigma_label = if sigma_base {
                "z".to_string()
            } else {
                sigma_alg.chord_name(Chord {
                    circle: dc as u16,
                    start: dp as u16,
                    end: dq as u16,
                })
            };
            edges.push(EdgeSpec {
                id: sigma_id.clone(),
                kind: EdgeKind::Sigma,
                label: sigma_label,
                from: s_from,
                to: s_to,
            });
            let hv = pair_of(v);
            let hu = pair_of(u);
            let v_is_a = pairs[hv].points[0] == *v;
            let u_is_a = pairs[hu].points[0] == *u;
            let side = |edge: String, dir: i8| SideSpec { edge, dir };
            let av = &pairs[hv].arc;
            let au = &pairs[hu].arc;
            let sides = vec![
                side(rho_id, 1),
                if v_is_a {
                    side(format!("a{av}_1"), 1)
                } else {
                    side(format!("a{av}_2"), -1)
                },
                if v_is_a {
                    side(format!("b{av}_2"), 1)
                } else {
                    side(format!("b{av}_1"), -1)
                },
                side(sigma_id, 1),
                if u_is_a {
                    side(format!("b{au}_1"), 1)
                } else {
                    side(format!("b{au}_2"), -1)
                },
                if u_is_a {
                    side(format!("a{au}_1"), -1)
                } else {
                    side(format!("a{au}_2"), 1)
                },
            ];
            let fid = if base {
                format!("Z{}", ci + 1)
            } else {
                gap_count += 1;
                format!("R{gap_count}")
            };
            faces.push(FaceSpec { id: fid, sides });
        }
    }
    Ok(IdentityBuild {
        spec: DiagramSpec {
            arc_diagram: ArcDiagramRef::Inline(z.spec().clone()),
            vertices,
            edges,
            faces,
            alpha_arcs,
            beta_arcs,
        },
        dual,
    })
}

/// The identity diagram D(I) over `z`.
pub fn identity_diagram(z: &ArcDiagram) -> Result<Diagram> {
    let b = identity_build(z)?;
    Diagram::assemble(b.spec, z.clone(), b.dual)
}

/// The dual arc diagram Z', read off the σ boundary of D(I).
pub fn dual_diagram(z: &ArcDiagram) -> Result<ArcDiagram> {
    Ok(identity_build(z)?.dual)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn zt() -> ArcDiagram {
        ArcDiagram::from_json(
            r#"{"genus":1,"circles":[{"id":"c","points":["p1","p2","p3","p4"]}],
                "matched_pairs":[{"arc":"1","points":["p1","p3"]},{"arc":"2","points":["p2","p4"]}]}"#,
        )
        .unwrap()
    }

    fn two_circles() -> ArcDiagram {
        ArcDiagram::from_json(
            r#"{"genus":0,"circles":[{"id":"A","points":["a1","a2"]},{"id":"B","points":["b1","b2"]}],
                "matched_pairs":[{"arc":"1","points":["a1","b1"]},{"arc":"2","points":["a2","b2"]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn torus_identity_diagram_is_valid() {
        let d = identity_diagram(&zt()).unwrap();
        let report = d.validate();
        assert!(report.ok(), "{report:?}");
        assert_eq!(d.euler_characteristic(), -2);
        let gens: Vec<(String, String, String)> = d
            .generators()
            .into_iter()
            .map(|g| (g.id, g.left_idem, g.right_idem))
            .collect();
        assert_eq!(
            gens,
            [
                ("x1".to_string(), "J1".to_string(), "I1".to_string()),
                ("x2".to_string(), "J2".to_string(), "I2".to_string())
            ]
        );
    }

    #[test]
    fn torus_dual_matches_hand_computation() {
        let dual = dual_diagram(&zt()).unwrap();
        assert_eq!(dual.circles()[0].points, ["q1", "q2", "q3", "q4"]);
        let pairs: BTreeSet<[String; 2]> = dual
            .pairs()
            .iter()
            .map(|p| {
                let mut q = p.points.clone();
                q.sort();
                q
            })
            .collect();
        let want: BTreeSet<[String; 2]> = [["q1", "q3"], ["q2", "q4"]]
            .iter()
            .map(|p| [p[0].to_string(), p[1].to_string()])
            .collect();
        assert_eq!(pairs, want);
        assert_eq!(dual.num_points(), zt().num_points());
        let back = dual_diagram(&dual).unwrap();
        assert!(back.is_isomorphic(&zt()));
    }

    #[test]
    fn hexagon_per_short_chord_pair() {
        let d = identity_diagram(&zt()).unwrap();
        let base = d.basepoint_faces();
        let rho = d.rho_algebra();
        let sigma = d.sigma_algebra();
        let mut found = Vec::new();
        for (fi, f) in d.faces.iter().enumerate() {
            assert_eq!(f.sides.len(), 6);
            if base.contains(&fi) {
                continue;
            }
            let mut r = None;
            let mut s = None;
            for side in &f.sides {
                let e = &d.edges[side.edge as usize];
                if let Some(Segment::Short { circle, start }) = e.segment {
                    let c = Chord {
                        circle: circle as u16,
                        start: start as u16,
                        end: start as u16 + 1,
                    };
                    match e.kind {
                        EdgeKind::Rho => r = Some(rho.chord_name(c)),
                        _ => s = Some(sigma.chord_name(c)),
                    }
                }
            }
            found.push((r.unwrap(), s.unwrap()));
        }
        found.sort();
        assert_eq!(
            found,
            [
                ("p1-p2".to_string(), "q1-q2".to_string()),
                ("p2-p3".to_string(), "q2-q3".to_string()),
                ("p3-p4".to_string(), "q3-q4".to_string())
            ]
        );
    }

    #[test]
    fn alpha_meets_only_its_dual_beta() {
        for z in [zt(), two_circles()] {
            let d = identity_diagram(&z).unwrap();
            assert!(d.validate().ok(), "{:?}", d.validate());
            let gens = d.generators();
            assert_eq!(gens.len(), z.pairs().len());
            for g in gens {
                assert_eq!(g.left, g.right);
            }
        }
    }

    #[test]
    fn round_trip_through_json() {
        let d = identity_diagram(&zt()).unwrap();
        let spec: DiagramSpec = serde_json::from_str(&d.to_json()).unwrap();
        let again = Diagram::from_spec(spec).unwrap();
        assert!(again.validate().ok());
        assert_eq!(again.generators(), d.generators());
    }

    fn mutate(f: impl FnOnce(&mut DiagramSpec)) -> ValidationReport {
        let d = identity_diagram(&zt()).unwrap();
        let mut spec = d.spec().clone();
        f(&mut spec);
        Diagram::from_spec(spec).unwrap().validate()
    }

    #[test]
    fn beta_endpoint_on_rho_side_is_reported() {
        let r = mutate(|s| {
            for e in s.edges.iter_mut() {
                if e.id == "b1_1" {
                    e.from = "p2".into();
                }
            }
            s.beta_arcs
                .insert("1".into(), vec!["p2".into(), "x1".into(), "q4".into()]);
        });
        assert!(r.has("beta-endpoint-side"), "{r:?}");
    }

    #[test]
    fn non_alternating_crossing_is_reported() {
        // Relabel one β edge at x1 as α: the link no longer alternates.
        let r = mutate(|s| {
            for e in s.edges.iter_mut() {
                if e.id == "b1_1" {
                    e.kind = EdgeKind::Alpha;
                }
            }
        });
        assert!(r.has("transversality"), "{r:?}");
    }

    #[test]
    fn broken_face_cycle_is_reported() {
        let r = mutate(|s| {
            s.faces[0].sides.swap(1, 2);
        });
        assert!(r.has("face-cycle"), "{r:?}");
    }

    #[test]
    fn disjoint_arcs_give_no_generators() {
        let d = identity_diagram(&zt()).unwrap();
        let mut spec = d.spec().clone();
        spec.vertices.retain(|v| v.kind != VertexKind::Crossing);
        spec.edges
            .retain(|e| matches!(e.kind, EdgeKind::Rho | EdgeKind::Sigma));
        spec.faces.clear();
        spec.alpha_arcs.clear();
        spec.beta_arcs.clear();
        let bare = Diagram::from_spec(spec).unwrap();
        assert!(bare.generators().is_empty());
    }
}
