//! Polygon counting.
//!
//! A query (x, y, σ's, ρ's) fixes the boundary of a polygon as a closed walk
//! in the diagram. The primary counter finds its unique domain and counts
//! immersed disks with that boundary by peeling one face at a time. The
//! oracle assembles disks tile by tile from scratch and reads the boundary
//! off the result; it shares nothing with the primary counter beyond the
//! diagram itself.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use crate::arc_algebra::Chord;
use crate::diagram::{Diagram, EdgeKind, Segment, Side};
use crate::error::{Error, Result};

/// One side of a closed walk and the corner count at its end vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub side: Side,
    pub angle: u32,
}

/// Boundary data of a polygon. `sigmas` are in polygon order σ1..σm, with
/// σ1 the chord closest to x.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolygonQuery {
    pub x: usize,
    pub y: usize,
    pub sigmas: Vec<Chord>,
    pub rhos: Vec<Chord>,
}

impl PolygonQuery {
    pub fn total_length(&self) -> usize {
        self.sigmas.iter().chain(&self.rhos).map(|c| c.len()).sum()
    }
}

/// How a disk was taken apart: the face removed first and the disks left.
#[derive(Debug, PartialEq, Eq)]
pub struct Certificate {
    pub face: usize,
    pub pieces: Vec<Arc<Certificate>>,
}

impl Certificate {
    pub fn area(&self) -> usize {
        1 + self.pieces.iter().map(|p| p.area()).sum::<usize>()
    }
}

#[derive(Clone, Debug)]
pub struct Polygon {
    /// Boundary walk starting with the side leaving x.
    pub walk: Vec<Step>,
    /// Multiplicity of each face, keyed by face id.
    pub domain: BTreeMap<String, u32>,
    pub certificate: Arc<Certificate>,
}

/// Rotates a cyclic walk to its lexicographically least rotation.
pub fn canonical_rotation(walk: &[Step]) -> Vec<Step> {
    (0..walk.len())
        .map(|r| {
            let mut w = walk.to_vec();
            w.rotate_left(r);
            w
        })
        .min()
        .unwrap_or_default()
}

/// Sides along an arc from vertex `a` to vertex `b`; empty if `a == b`.
fn arc_run(d: &Diagram, kind: EdgeKind, arc: usize, a: usize, b: usize) -> Option<Vec<Side>> {
    let path = match kind {
        EdgeKind::Alpha => d.alpha_path(arc)?,
        _ => d.beta_path(arc)?,
    };
    let ia = path.iter().position(|v| *v == a)?;
    let ib = path.iter().position(|v| *v == b)?;
    let idx: Vec<usize> = if ia <= ib {
        (ia..=ib).collect()
    } else {
        (ib..=ia).rev().collect()
    };
    idx.windows(2)
        .map(|w| d.arc_side(kind, arc, path[w[0]], path[w[1]]))
        .collect()
}

fn vertex_arc(d: &Diagram, v: usize, kind: EdgeKind) -> Option<usize> {
    d.edges
        .iter()
        .find(|e| e.kind == kind && (e.from == v || e.to == v))
        .and_then(|e| e.arc)
}

/// The closed walk bounding any polygon of the query, or `None` when the
/// query cannot be the boundary of a polygon.
pub fn query_walk(d: &Diagram, q: &PolygonQuery) -> Option<Vec<Step>> {
    use EdgeKind::*;
    let mut sides: Vec<Side> = Vec::new();
    let x_alpha = vertex_arc(d, q.x, Alpha)?;
    let y_alpha = vertex_arc(d, q.y, Alpha)?;
    let y_beta = vertex_arc(d, q.y, Beta)?;
    let x_beta = vertex_arc(d, q.x, Beta)?;
    if q.x == q.y && (q.rhos.is_empty() || q.sigmas.is_empty()) {
        return None;
    }

    // right side: x, α, ρ1, α, ..., ρn, α, y
    let mut cur = q.x;
    let mut cur_arc = x_alpha;
    for c in &q.rhos {
        let start = d.rho_vertex(c.circle as usize, c.start as usize)?;
        if cur == start {
            return None;
        }
        sides.extend(arc_run(d, Alpha, cur_arc, cur, start)?);
        sides.extend(d.chord_sides(Rho, *c)?);
        cur = d.rho_vertex(c.circle as usize, c.end as usize)?;
        cur_arc = vertex_arc(d, cur, Alpha)?;
    }
    if cur_arc != y_alpha {
        return None;
    }
    sides.extend(arc_run(d, Alpha, cur_arc, cur, q.y)?);

    // left side: y, β, σm, β, ..., σ1, β, x
    let mut cur = q.y;
    let mut cur_arc = y_beta;
    for c in q.sigmas.iter().rev() {
        let start = d.sigma_vertex(c.circle as usize, c.start as usize)?;
        if cur == start {
            return None;
        }
        sides.extend(arc_run(d, Beta, cur_arc, cur, start)?);
        sides.extend(d.chord_sides(Sigma, *c)?);
        cur = d.sigma_vertex(c.circle as usize, c.end as usize)?;
        cur_arc = vertex_arc(d, cur, Beta)?;
    }
    if cur_arc != x_beta {
        return None;
    }
    sides.extend(arc_run(d, Beta, cur_arc, cur, q.x)?);

    let n = sides.len();
    if n == 0 {
        return None;
    }
    let mut walk = Vec::with_capacity(n);
    for k in 0..n {
        let angle = d.turn_angle(sides[k], sides[(k + 1) % n])?;
        walk.push(Step {
            side: sides[k],
            angle,
        });
    }
    // The corners at x and y are acute.
    if walk[n - 1].angle != 1 {
        return None;
    }
    let y_at = (0..n)
        .find(|&k| d.side_kind(sides[k]) == Alpha && d.side_kind(sides[(k + 1) % n]) == Beta)?;
    if walk[y_at].angle != 1 {
        return None;
    }
    Some(walk)
}

/// Face multiplicities of the 2-chain bounded by the walk, if one exists.
pub fn domain_of(d: &Diagram, walk: &[Step]) -> Option<Vec<i64>> {
    let mut coef = vec![0i64; d.edges.len()];
    for s in walk {
        coef[s.side.edge as usize] += if s.side.fwd { 1 } else { -1 };
    }
    let nf = d.faces.len();
    let mut mult: Vec<Option<i64>> = vec![None; nf];
    let mut queue = VecDeque::new();
    for (i, e) in d.edges.iter().enumerate() {
        if e.kind.is_boundary() {
            let (f, _) = d.face_of_side(Side {
                edge: i as u32,
                fwd: true,
            })?;
            match mult[f] {
                None => {
                    mult[f] = Some(coef[i]);
                    queue.push_back(f);
                }
                Some(m) if m != coef[i] => return None,
                _ => {}
            }
        }
    }
    while let Some(f) = queue.pop_front() {
        let nf_val = mult[f].unwrap();
        for s in &d.faces[f].sides {
            let e = s.edge as usize;
            if d.edges[e].kind.is_boundary() {
                continue;
            }
            let (g, _) = d.face_of_side(s.rev())?;
            // sides with the face on the left: n(left of fwd) - n(left of back) = coef
            let val = if s.fwd {
                nf_val - coef[e]
            } else {
                nf_val + coef[e]
            };
            match mult[g] {
                None => {
                    mult[g] = Some(val);
                    queue.push_back(g);
                }
                Some(m) if m != val => return None,
                _ => {}
            }
        }
    }
    mult.into_iter().collect()
}

type Certs = Arc<Vec<Arc<Certificate>>>;

/// Counts immersed disks with a prescribed boundary by face peeling.
pub struct PeelCounter<'a> {
    d: &'a Diagram,
    max_area: u32,
    banned: BTreeSet<usize>,
    memo: Mutex<HashMap<Vec<Step>, Certs>>,
}

#[derive(Clone, Copy, Debug)]
enum Touch {
    None,
    /// Position in the walk: steps are `2p`, the vertex after step p is `2p+1`.
    At(usize),
}

impl<'a> PeelCounter<'a> {
    pub fn new(d: &'a Diagram, max_area: u32) -> Self {
        PeelCounter {
            d,
            max_area,
            banned: d.basepoint_faces(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn diagram(&self) -> &Diagram {
        self.d
    }

    /// All polygons for the query, in deterministic order.
    pub fn enumerate(&self, q: &PolygonQuery) -> Result<Vec<Polygon>> {
        let Some(walk) = query_walk(self.d, q) else {
            return Ok(Vec::new());
        };
        let certs = self.disks(&walk)?;
        if certs.is_empty() {
            return Ok(Vec::new());
        }
        let dom = domain_of(self.d, &walk).expect("a counted walk has a domain");
        let domain: BTreeMap<String, u32> = dom
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0)
            .map(|(f, m)| (self.d.faces[f].id.clone(), *m as u32))
            .collect();
        Ok(certs
            .iter()
            .map(|c| Polygon {
                walk: walk.clone(),
                domain: domain.clone(),
                certificate: c.clone(),
            })
            .collect())
    }

    pub fn count(&self, q: &PolygonQuery) -> Result<u64> {
        let Some(walk) = query_walk(self.d, q) else {
            return Ok(0);
        };
        Ok(self.disks(&walk)?.len() as u64)
    }

    /// Area of the domain bounded by the query, if it is a nonnegative chain.
    pub fn area(&self, q: &PolygonQuery) -> Option<u32> {
        let walk = query_walk(self.d, q)?;
        let dom = domain_of(self.d, &walk)?;
        if dom.iter().any(|m| *m < 0) {
            return None;
        }
        Some(dom.iter().sum::<i64>() as u32)
    }

    fn disks(&self, walk: &[Step]) -> Result<Certs> {
        let key = canonical_rotation(walk);
        if let Some(hit) = self.memo.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let result = Arc::new(self.disks_uncached(&key)?);
        self.memo.lock().unwrap().insert(key, result.clone());
        Ok(result)
    }

    fn disks_uncached(&self, w: &[Step]) -> Result<Vec<Arc<Certificate>>> {
        let d = self.d;
        let Some(dom) = domain_of(d, w) else {
            return Ok(Vec::new());
        };
        if dom.iter().any(|m| *m < 0) {
            return Ok(Vec::new());
        }
        if self.banned.iter().any(|f| dom[*f] != 0) {
            return Ok(Vec::new());
        }
        let area: i64 = dom.iter().sum();
        if area == 0 {
            return Ok(Vec::new());
        }
        if area > self.max_area as i64 {
            return Err(Error::Truncated(format!(
                "domain of area {area} exceeds the area cap {}",
                self.max_area
            )));
        }
        let (tf, k0) = d.face_of_side(w[0].side).expect("validated diagram");
        if dom[tf] < 1 {
            return Ok(Vec::new());
        }
        let face = &d.faces[tf];
        let k = face.sides.len();
        let t: Vec<Side> = (0..k).map(|j| face.sides[(k0 + j) % k]).collect();
        if !self.corners_separated(tf) {
            return Err(Error::Invalid(format!(
                "face {} can touch itself at a corner; peeling does not cover it",
                face.id
            )));
        }

        let mut out = Vec::new();
        let mut edge_touch = vec![Touch::None; k];
        let mut vert_touch = vec![Touch::None; k];
        edge_touch[0] = Touch::At(0);
        self.match_sides(w, &t, 1, 0, &mut edge_touch, &mut vert_touch, tf, &mut out)?;
        Ok(out)
    }

    /// Two corners of a face at the same vertex could meet inside a disk
    /// only if the loop between them, read backwards, bounds a nonnegative
    /// domain away from the basepoints. Repeated edges are not supported.
    fn corners_separated(&self, f: usize) -> bool {
        let d = self.d;
        let sides = &d.faces[f].sides;
        let k = sides.len();
        let edges: BTreeSet<u32> = sides.iter().map(|s| s.edge).collect();
        if edges.len() != k {
            return false;
        }
        for i in 0..k {
            for j in i + 1..k {
                if d.side_end(sides[i]) != d.side_end(sides[j]) {
                    continue;
                }
                let inner: Vec<Side> = (i + 1..=j).map(|m| sides[m]).collect();
                let outer: Vec<Side> = (j + 1..i + 1 + k).map(|m| sides[m % k]).collect();
                if self.loop_can_bound(&inner) || self.loop_can_bound(&outer) {
                    return false;
                }
            }
        }
        true
    }

    fn loop_can_bound(&self, sides: &[Side]) -> bool {
        let d = self.d;
        if sides.iter().any(|s| d.side_kind(*s).is_boundary()) {
            return false;
        }
        let walk: Vec<Step> = sides
            .iter()
            .rev()
            .map(|s| Step {
                side: s.rev(),
                angle: 0,
            })
            .collect();
        match domain_of(d, &walk) {
            Some(dom) => {
                dom.iter().all(|m| *m >= 0)
                    && dom.iter().any(|m| *m > 0)
                    && self.banned.iter().all(|f| dom[*f] == 0)
            }
            None => false,
        }
    }

    /// Chooses, for T's sides j.. in order, whether each side and the vertex
    /// before it lie on the walk, keeping walk positions increasing.
    #[allow(clippy::too_many_arguments)]
    fn match_sides(
        &self,
        w: &[Step],
        t: &[Side],
        j: usize,
        last: usize,
        edge_touch: &mut Vec<Touch>,
        vert_touch: &mut Vec<Touch>,
        tf: usize,
        out: &mut Vec<Arc<Certificate>>,
    ) -> Result<()> {
        let d = self.d;
        let k = t.len();
        let n = w.len();
        if j == k {
            return self.close_matching(w, t, edge_touch, vert_touch, tf, out);
        }
        // vertex u_{j-1} sits between t_{j-1} and t_j
        let prev_edge = edge_touch[j - 1];
        // option A: t_j lies on the walk at step p
        for p in (last / 2 + 1)..n {
            if w[p].side != t[j] {
                continue;
            }
            let vpos = 2 * (p - 1) + 1;
            let ok = match prev_edge {
                Touch::At(pp) => pp / 2 + 1 == p && w[p - 1].angle == 1,
                Touch::None => vpos > last && w[p - 1].angle >= 2,
            };
            if !ok {
                continue;
            }
            vert_touch[j - 1] = Touch::At(vpos);
            edge_touch[j] = Touch::At(2 * p);
            self.match_sides(w, t, j + 1, 2 * p, edge_touch, vert_touch, tf, out)?;
            edge_touch[j] = Touch::None;
            vert_touch[j - 1] = Touch::None;
        }
        // option B: t_j is interior to the disk
        match prev_edge {
            Touch::At(pp) => {
                let p = pp / 2;
                if w[p].angle >= 2 {
                    vert_touch[j - 1] = Touch::At(2 * p + 1);
                    self.match_sides(w, t, j + 1, 2 * p + 1, edge_touch, vert_touch, tf, out)?;
                    vert_touch[j - 1] = Touch::None;
                }
            }
            Touch::None => {
                // u_{j-1} interior, or touching the walk at a vertex alone
                let v = d.side_start(t[j]);
                if d.is_interior_vertex(v) {
                    self.match_sides(w, t, j + 1, last, edge_touch, vert_touch, tf, out)?;
                }
                for q in 0..n {
                    let vpos = 2 * q + 1;
                    if vpos <= last || d.side_end(w[q].side) != v || w[q].angle < 3 {
                        continue;
                    }
                    vert_touch[j - 1] = Touch::At(vpos);
                    self.match_sides(w, t, j + 1, vpos, edge_touch, vert_touch, tf, out)?;
                    vert_touch[j - 1] = Touch::None;
                }
            }
        }
        Ok(())
    }

    fn close_matching(
        &self,
        w: &[Step],
        t: &[Side],
        edge_touch: &[Touch],
        vert_touch: &[Touch],
        tf: usize,
        out: &mut Vec<Arc<Certificate>>,
    ) -> Result<()> {
        let d = self.d;
        let k = t.len();
        let n = w.len();
        let mut vt = vert_touch.to_vec();
        // u_{k-1} is the start of t_0, i.e. the end of the last walk step.
        match edge_touch[k - 1] {
            Touch::At(pp) => {
                if pp / 2 != n - 1 || w[n - 1].angle != 1 {
                    return Ok(());
                }
            }
            Touch::None => {
                if w[n - 1].angle < 2 {
                    return Ok(());
                }
            }
        }
        vt[k - 1] = Touch::At(2 * (n - 1) + 1);
        // u_0 is the end of t_0.
        vt[0] = match edge_touch[1 % k] {
            Touch::At(_) if k > 1 => vt[0],
            _ => {
                if k > 1 && w[0].angle < 2 {
                    return Ok(());
                }
                Touch::At(1)
            }
        };
        if k == 1 {
            return Ok(());
        }

        // Junction angles at vertex-only touches must split the walk's fan.
        let mut split: HashMap<usize, (u32, u32)> = HashMap::new();
        for j in 0..k {
            let both_free = matches!(edge_touch[j], Touch::None)
                && matches!(edge_touch[(j + 1) % k], Touch::None);
            if let (true, Touch::At(vpos)) = (both_free, vt[j]) {
                let q = vpos / 2;
                let a = w[q].angle;
                let after = d.turn_angle(t[(j + 1) % k].rev(), w[(q + 1) % n].side);
                let before = d.turn_angle(w[q].side, t[j].rev());
                match (after, before) {
                    (Some(b), Some(c)) if b >= 1 && c >= 1 && b + 1 + c == a => {
                        split.insert(j, (b, c));
                    }
                    _ => return Ok(()),
                }
            }
        }

        // Gaps between consecutive touched vertices with free sides between.
        let mut pieces: Vec<Vec<Step>> = Vec::new();
        for i in 0..k {
            let Touch::At(vi) = vt[i] else { continue };
            if !matches!(edge_touch[(i + 1) % k], Touch::None) {
                continue;
            }
            let mut l = (i + 1) % k;
            while !matches!(vt[l], Touch::At(_)) {
                l = (l + 1) % k;
            }
            let Touch::At(vl) = vt[l] else { unreachable!() };
            let q1 = vi / 2;
            let q2 = vl / 2;
            let mut piece = Vec::new();
            let mut p = (q1 + 1) % n;
            loop {
                let mut angle = w[p].angle;
                if p == q2 {
                    angle = match split.get(&l) {
                        Some((_, c)) => *c,
                        None => angle - 1,
                    };
                }
                piece.push(Step {
                    side: w[p].side,
                    angle,
                });
                if p == q2 {
                    break;
                }
                p = (p + 1) % n;
            }
            // reversed T chain t_l, t_{l-1}, ..., t_{i+1}
            let mut m = l;
            loop {
                let side = t[m].rev();
                let end_vertex_index = (m + k - 1) % k;
                let angle = if end_vertex_index == i {
                    match split.get(&i) {
                        Some((b, _)) => *b,
                        None => w[q1].angle - 1,
                    }
                } else {
                    let v = d.side_start(t[m]);
                    if !d.is_interior_vertex(v) {
                        return Ok(());
                    }
                    d.corners_at(v) as u32 - 1
                };
                piece.push(Step { side, angle });
                if m == (i + 1) % k {
                    break;
                }
                m = (m + k - 1) % k;
            }
            pieces.push(piece);
        }

        let mut combos: Vec<Vec<Arc<Certificate>>> = vec![Vec::new()];
        for piece in &pieces {
            let certs = self.disks(piece)?;
            if certs.is_empty() {
                return Ok(());
            }
            let mut next = Vec::new();
            for c in &combos {
                for p in certs.iter() {
                    let mut v = c.clone();
                    v.push(p.clone());
                    next.push(v);
                }
            }
            combos = next;
        }
        for pieces in combos {
            out.push(Arc::new(Certificate { face: tf, pieces }));
        }
        Ok(())
    }
}

/// Every query with total chord length at most `max_chords` whose boundary
/// walk exists. σ sequences are listed in polygon order.
pub fn all_queries(d: &Diagram, max_chords: usize) -> Vec<PolygonQuery> {
    let rho_seqs = d.rho_algebra().composable_sequences(max_chords);
    let sigma_seqs = d.sigma_algebra().composable_sequences(max_chords);
    let gens = d.generators();
    let mut out = Vec::new();
    for x in &gens {
        for y in &gens {
            for rhos in &rho_seqs {
                let used: usize = rhos.iter().map(|c| c.len()).sum();
                for sig in &sigma_seqs {
                    if used + sig.iter().map(|c| c.len()).sum::<usize>() > max_chords {
                        continue;
                    }
                    let q = PolygonQuery {
                        x: x.vertex,
                        y: y.vertex,
                        sigmas: sig.iter().rev().copied().collect(),
                        rhos: rhos.clone(),
                    };
                    if query_walk(d, &q).is_some() {
                        out.push(q);
                    }
                }
            }
        }
    }
    out
}

/// Polygons found by the oracle, keyed by query, with multiplicities.
#[derive(Clone, Debug, Default)]
pub struct Census {
    pub counts: BTreeMap<PolygonQuery, u64>,
    pub areas: BTreeMap<PolygonQuery, u32>,
    /// Some branch was cut by the area bound.
    pub truncated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Open,
    Boundary,
    Glued(usize, usize),
}

struct Tile {
    face: usize,
    slots: Vec<Slot>,
}

struct Oracle<'a> {
    d: &'a Diagram,
    max_area: usize,
    max_chords: usize,
    banned: BTreeSet<usize>,
    tiles: Vec<Tile>,
    root: (usize, usize),
    census: Census,
}

/// Exhaustive search over disks assembled from faces, rooted at every
/// generator corner, up to `max_area` faces and `max_chords` boundary
/// segments.
pub fn oracle_census(d: &Diagram, max_area: u32, max_chords: usize) -> Census {
    oracle_census_from(d, None, max_area, max_chords)
}

/// The same search restricted to polygons starting at generator vertex `x`.
pub fn oracle_census_from(
    d: &Diagram,
    x: Option<usize>,
    max_area: u32,
    max_chords: usize,
) -> Census {
    let mut o = Oracle {
        d,
        max_area: max_area as usize,
        max_chords,
        banned: d.basepoint_faces(),
        tiles: Vec::new(),
        root: (0, 0),
        census: Census::default(),
    };
    for g in d.generators() {
        if x.is_some_and(|v| v != g.vertex) {
            continue;
        }
        for (fi, f) in d.faces.iter().enumerate() {
            if o.banned.contains(&fi) {
                continue;
            }
            let k = f.sides.len();
            for j in 0..k {
                let arr = f.sides[j];
                let lea = f.sides[(j + 1) % k];
                if d.side_end(arr) == g.vertex
                    && d.side_kind(arr) == EdgeKind::Beta
                    && d.side_kind(lea) == EdgeKind::Alpha
                {
                    o.tiles = vec![Tile {
                        face: fi,
                        slots: vec![Slot::Open; k],
                    }];
                    o.tiles[0].slots[j] = Slot::Boundary;
                    o.tiles[0].slots[(j + 1) % k] = Slot::Boundary;
                    o.root = (0, j);
                    if max_area >= 1 && o.force_boundary_sides(0) && o.vertices_ok(0) {
                        o.search();
                    }
                }
            }
        }
    }
    o.census
}

/// Number of polygons for one query according to the oracle.
pub fn oracle_count(d: &Diagram, q: &PolygonQuery, max_area: u32) -> Result<u64> {
    let census = oracle_census_from(d, Some(q.x), max_area, q.total_length());
    match census.counts.get(q) {
        Some(c) => Ok(*c),
        None if census.truncated => Err(Error::Truncated(format!(
            "oracle search cut at area {max_area}"
        ))),
        None => Ok(0),
    }
}

impl Oracle<'_> {
    fn side(&self, t: usize, j: usize) -> Side {
        self.d.faces[self.tiles[t].face].sides[j]
    }

    fn chord_slots(&self) -> usize {
        self.tiles
            .iter()
            .enumerate()
            .map(|(ti, tile)| {
                (0..tile.slots.len())
                    .filter(|&j| {
                        tile.slots[j] == Slot::Boundary
                            && self.d.side_kind(self.side(ti, j)).is_boundary()
                    })
                    .count()
            })
            .sum()
    }

    /// ρ and σ sides of a new tile are always on the polygon boundary.
    fn force_boundary_sides(&mut self, t: usize) -> bool {
        let k = self.tiles[t].slots.len();
        for j in 0..k {
            if self.d.side_kind(self.side(t, j)).is_boundary() {
                self.tiles[t].slots[j] = Slot::Boundary;
            }
        }
        self.chord_slots() <= self.max_chords
    }

    /// Corner (t, j) sits between slot j (arriving) and slot j+1 (leaving).
    /// Walks the fan of corners around that vertex; returns the corners in
    /// counterclockwise order and whether the fan closes up.
    fn fan(&self, t: usize, j: usize) -> (Vec<(usize, usize)>, bool) {
        let k = |t: usize| self.tiles[t].slots.len();
        // ccw: across the arriving slot
        let mut ccw = Vec::new();
        let (mut ct, mut cj) = (t, j);
        while let Slot::Glued(t2, j2) = self.tiles[ct].slots[cj] {
            let nj = (j2 + k(t2) - 1) % k(t2);
            if (t2, nj) == (t, j) {
                let mut all = vec![(t, j)];
                all.extend(ccw);
                return (all, true);
            }
            ccw.push((t2, nj));
            ct = t2;
            cj = nj;
            if ccw.len() > 64 {
                return (ccw, true);
            }
        }
        // cw: across the leaving slot
        let mut cw = Vec::new();
        let (mut ct, mut cj) = (t, j);
        while let Slot::Glued(t2, j2) = self.tiles[ct].slots[(cj + 1) % k(ct)] {
            cw.push((t2, j2));
            ct = t2;
            cj = j2;
            if cw.len() > 64 {
                break;
            }
        }
        cw.reverse();
        cw.push((t, j));
        cw.extend(ccw);
        (cw, false)
    }

    /// Checks the vertex fans at every corner of tile `t`.
    fn vertices_ok(&mut self, t: usize) -> bool {
        let k = self.tiles[t].slots.len();
        (0..k).all(|j| self.corner_ok(t, j))
    }

    fn corner_ok(&self, t: usize, j: usize) -> bool {
        let d = self.d;
        let v = d.side_end(self.side(t, j));
        let deg = d.corners_at(v);
        let (fan, closed) = self.fan(t, j);
        if closed {
            return fan.len() == deg && d.is_interior_vertex(v);
        }
        if fan.len() > deg {
            return false;
        }
        let (ft, fj) = fan[0];
        let (lt, lj) = *fan.last().unwrap();
        let kf = self.tiles[ft].slots.len();
        let leaving = self.tiles[ft].slots[(fj + 1) % kf];
        let arriving = self.tiles[lt].slots[lj];
        if leaving != Slot::Boundary || arriving != Slot::Boundary {
            return true;
        }
        let s_out = d.side_kind(self.side(ft, (fj + 1) % kf));
        let s_in = d.side_kind(self.side(lt, lj));
        let a = fan.len();
        use EdgeKind::*;
        match (s_in, s_out) {
            (Beta, Alpha) => a == 1 && (lt, lj) == self.root,
            (Alpha, Beta) => a == 1,
            (Alpha, Alpha) | (Beta, Beta) | (Rho, Rho) | (Sigma, Sigma) => a == 2,
            (Alpha, Rho) | (Rho, Alpha) | (Beta, Sigma) | (Sigma, Beta) => a == 1,
            _ => false,
        }
    }

    fn first_open(&self) -> Option<(usize, usize)> {
        for (ti, tile) in self.tiles.iter().enumerate() {
            for (j, s) in tile.slots.iter().enumerate() {
                if *s == Slot::Open {
                    return Some((ti, j));
                }
            }
        }
        None
    }

    fn endpoints_ok(&self, t: usize, j: usize) -> bool {
        let k = self.tiles[t].slots.len();
        self.corner_ok(t, j) && self.corner_ok(t, (j + k - 1) % k)
    }

    fn search(&mut self) {
        let Some((t, j)) = self.first_open() else {
            self.record();
            return;
        };
        let side = self.side(t, j);
        // boundary
        self.tiles[t].slots[j] = Slot::Boundary;
        if self.endpoints_ok(t, j) {
            self.search();
        }
        self.tiles[t].slots[j] = Slot::Open;
        // glue to an open slot of an existing tile
        for t2 in 0..self.tiles.len() {
            if t2 == t {
                continue;
            }
            for j2 in 0..self.tiles[t2].slots.len() {
                if self.tiles[t2].slots[j2] == Slot::Open && self.side(t2, j2) == side.rev() {
                    self.tiles[t].slots[j] = Slot::Glued(t2, j2);
                    self.tiles[t2].slots[j2] = Slot::Glued(t, j);
                    if self.endpoints_ok(t, j) {
                        self.search();
                    }
                    self.tiles[t].slots[j] = Slot::Open;
                    self.tiles[t2].slots[j2] = Slot::Open;
                }
            }
        }
        // glue to a new tile
        let Some((g, j2)) = self.d.face_of_side(side.rev()) else {
            return;
        };
        if self.banned.contains(&g) {
            return;
        }
        if self.tiles.len() >= self.max_area {
            self.census.truncated = true;
            return;
        }
        let k2 = self.d.faces[g].sides.len();
        let t2 = self.tiles.len();
        self.tiles.push(Tile {
            face: g,
            slots: vec![Slot::Open; k2],
        });
        self.tiles[t].slots[j] = Slot::Glued(t2, j2);
        self.tiles[t2].slots[j2] = Slot::Glued(t, j);
        if self.force_boundary_sides(t2) && self.vertices_ok(t2) && self.endpoints_ok(t, j) {
            self.search();
        }
        self.tiles.pop();
        self.tiles[t].slots[j] = Slot::Open;
    }

    /// Accepts a finished tiling if it is a disk and reads off its query.
    fn record(&mut self) {
        let d = self.d;
        // Euler characteristic: corners grouped into vertices.
        let mut seen = BTreeSet::new();
        let mut vertices = 0;
        let mut interior_edges = 0;
        let mut boundary_edges = 0;
        for (ti, tile) in self.tiles.iter().enumerate() {
            for (j, s) in tile.slots.iter().enumerate() {
                match s {
                    Slot::Boundary => boundary_edges += 1,
                    Slot::Glued(..) => interior_edges += 1,
                    Slot::Open => return,
                }
                if seen.insert((ti, j)) {
                    vertices += 1;
                    let (fan, _) = self.fan(ti, j);
                    seen.extend(fan);
                }
            }
        }
        let edges = interior_edges / 2 + boundary_edges;
        let chi = vertices as i64 - edges as i64 + self.tiles.len() as i64;
        if chi != 1 {
            return;
        }
        // Walk the boundary from the side leaving x.
        let (rt, rj) = self.root;
        let k0 = self.tiles[rt].slots.len();
        let start = (rt, (rj + 1) % k0);
        let mut word = Vec::new();
        let mut cur = start;
        loop {
            word.push(self.side(cur.0, cur.1));
            let (mut t, mut j) = cur;
            loop {
                let k = self.tiles[t].slots.len();
                let nj = (j + 1) % k;
                match self.tiles[t].slots[nj] {
                    Slot::Glued(t2, j2) => {
                        t = t2;
                        j = j2;
                    }
                    _ => {
                        cur = (t, nj);
                        break;
                    }
                }
            }
            if cur == start || word.len() > boundary_edges {
                break;
            }
        }
        if word.len() != boundary_edges {
            return;
        }
        let Some(q) = read_query(d, &word) else {
            return;
        };
        if q.total_length() > self.max_chords {
            return;
        }
        *self.census.counts.entry(q.clone()).or_insert(0) += 1;
        self.census.areas.insert(q, self.tiles.len() as u32);
    }
}

/// Parses a boundary word starting at x into a query.
fn read_query(d: &Diagram, word: &[Side]) -> Option<PolygonQuery> {
    use EdgeKind::*;
    let x = d.side_start(word[0]);
    let n = word.len();
    let y_at = (0..n)
        .find(|&k| d.side_kind(word[k]) == Alpha && d.side_kind(word[(k + 1) % n]) == Beta)?;
    let y = d.side_end(word[y_at]);
    let chords = |range: &[Side], kind: EdgeKind| -> Option<Vec<Chord>> {
        let mut out = Vec::new();
        let mut k = 0;
        while k < range.len() {
            if d.side_kind(range[k]) != kind {
                k += 1;
                continue;
            }
            let first = k;
            while k < range.len() && d.side_kind(range[k]) == kind {
                k += 1;
            }
            let seg = |s: Side| match d.edges[s.edge as usize].segment {
                Some(Segment::Short { circle, start }) => Some((circle, start)),
                _ => None,
            };
            let (c, s0) = seg(range[first])?;
            let (c1, s1) = seg(range[k - 1])?;
            if c != c1 || !range[first..k].iter().all(|s| s.fwd) {
                return None;
            }
            out.push(Chord {
                circle: c as u16,
                start: s0 as u16,
                end: s1 as u16 + 1,
            });
        }
        Some(out)
    };
    let rhos = chords(&word[..=y_at], Rho)?;
    let mut sigmas = chords(&word[y_at + 1..], Sigma)?;
    sigmas.reverse();
    Some(PolygonQuery { x, y, sigmas, rhos })
}
