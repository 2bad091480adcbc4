//! Finite-area type-preserving Fuchsian representations presented by an ideal
//! polygon with side pairings.
//!
//! A representation is stored as the 2k side-pairing maps g_s together with
//! the 2k boundary arcs I_s cut out by the ideal vertices; g_s maps I_s onto
//! the closure of the complement of I_{s'}. Labels are small integers with
//! the involution s ↔ s^1 (generator i is label 2i, its inverse 2i+1).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp::{self, Arc, FixedPoints, IsometryClass, MobiusMap};
use crate::num;

pub type Label = u8;

#[inline]
pub fn partner(s: Label) -> Label {
    s ^ 1
}

pub fn label_name(s: Label) -> String {
    if s % 2 == 0 {
        format!("{}", s / 2 + 1)
    } else {
        format!("{}'", s / 2 + 1)
    }
}

/// Endpoint matching tolerance for pairing axioms (spec-level 1e-9).
const PAIR_TOL: f64 = 1e-9;

/// Side-pairing data: maps and boundary arcs indexed by label.
#[derive(Debug, Clone)]
pub struct SidePairing {
    pub k: usize,
    /// maps[s] = g_s, with maps[s^1] = g_s^{-1}.
    pub maps: Vec<MobiusMap>,
    /// arcs[s] = I_s.
    pub arcs: Vec<Arc>,
}

impl SidePairing {
    pub fn n_labels(&self) -> usize {
        2 * self.k
    }

    /// Product g_{w_0} g_{w_1} ... g_{w_{n-1}} (applies the last label first).
    pub fn compose_word(&self, word: &[Label]) -> MobiusMap {
        let mut m = MobiusMap::identity();
        for &s in word {
            m = m.compose(&self.maps[s as usize]);
        }
        m
    }

    /// g_{s_l} ... g_{s_1} for a cycle word (s_1, ..., s_l).
    pub fn cycle_product(&self, word: &[Label]) -> MobiusMap {
        let mut m = MobiusMap::identity();
        for &s in word.iter().rev() {
            m = m.compose(&self.maps[s as usize]);
        }
        m
    }

    /// Checks the involution, the partition of the circle, and the
    /// interval-pairing axiom g_s(I_s) = closure(complement(I_{s'})).
    pub fn validate(&self) -> Result<()> {
        let n = self.n_labels();
        if self.maps.len() != n || self.arcs.len() != n {
            return Err(Error::InvalidPairing(format!(
                "expected {n} maps and arcs, got {} and {}",
                self.maps.len(),
                self.arcs.len()
            )));
        }
        for i in 0..self.k {
            let s = 2 * i as Label;
            if !self.maps[s as usize]
                .inverse()
                .approx_eq(&self.maps[partner(s) as usize], 1e-10)
            {
                return Err(Error::InvalidPairing(format!(
                    "map for {} is not the inverse of the map for {}",
                    label_name(partner(s)),
                    label_name(s)
                )));
            }
        }
        // arcs partition the circle: sorted starts, shared endpoints, total 2π
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.arcs[a].start.total_cmp(&self.arcs[b].start));
        let mut total = 0.0;
        for idx in 0..n {
            let cur = &self.arcs[order[idx]];
            let next = &self.arcs[order[(idx + 1) % n]];
            let gap = (cur.end_point() - next.start_point()).norm();
            if gap > PAIR_TOL {
                return Err(Error::InvalidPairing(format!(
                    "arcs {} and {} do not share an endpoint (gap {gap:.3e})",
                    label_name(order[idx] as Label),
                    label_name(order[(idx + 1) % n] as Label)
                )));
            }
            total += cur.width;
        }
        if (total - std::f64::consts::TAU).abs() > 1e-7 {
            return Err(Error::InvalidPairing(format!(
                "arc widths sum to {total}, not 2π: overlapping intervals"
            )));
        }
        // pairing axiom on endpoints: g_s(start I_s) = end I_{s'}, g_s(end I_s) = start I_{s'}
        for s in 0..n {
            let g = &self.maps[s];
            let src = &self.arcs[s];
            let dst = &self.arcs[partner(s as Label) as usize];
            let e1 = (g.apply_disk(src.start_point()) - dst.end_point()).norm();
            let e2 = (g.apply_disk(src.end_point()) - dst.start_point()).norm();
            if e1 > PAIR_TOL || e2 > PAIR_TOL {
                return Err(Error::InvalidPairing(format!(
                    "g_{} does not map I_{} onto the complement of I_{} (endpoint errors {e1:.3e}, {e2:.3e})",
                    label_name(s as Label),
                    label_name(s as Label),
                    label_name(partner(s as Label))
                )));
            }
            // interior of I_s must land outside I_{s'}
            if dst.contains(g.apply_disk(src.midpoint())) {
                return Err(Error::InvalidPairing(format!(
                    "g_{} maps the interior of I_{} into I_{}",
                    label_name(s as Label),
                    label_name(s as Label),
                    label_name(partner(s as Label))
                )));
            }
        }
        // origin interior to the polygon: every arc shorter than a half-circle
        for s in 0..n {
            if self.arcs[s].width >= std::f64::consts::PI - 1e-9 {
                return Err(Error::InvalidPairing(format!(
                    "arc I_{} spans {} ≥ π: the origin is not interior to the fundamental polygon",
                    label_name(s as Label),
                    self.arcs[s].width
                )));
            }
        }
        Ok(())
    }
}

/// Cyclic word of side-pairing labels around an ideal vertex; the product
/// g_{s_l}...g_{s_1} is parabolic and fixes the vertex.
#[derive(Debug, Clone)]
pub struct VertexCycle {
    pub vertex: Complex64,
    pub word: Vec<Label>,
}

impl VertexCycle {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// A finite-area type-preserving Fuchsian representation with its ideal
/// polygon combinatorics.
#[derive(Debug, Clone)]
pub struct FuchsianRep {
    pub genus: usize,
    pub punctures: usize,
    pub pairing: SidePairing,
    /// Polygon vertices in counterclockwise order.
    pub vertices: Vec<Complex64>,
    /// label_at[j] labels the arc that starts at vertices[j].
    pub label_at: Vec<Label>,
    /// Forward cycle of each vertex (indexed like `vertices`).
    pub cycles_by_vertex: Vec<VertexCycle>,
    /// Cusp orbits as sets of vertex indices.
    pub orbits: Vec<Vec<usize>>,
    /// 𝔠: all vertex cycles (forward and reversed), deduplicated, sorted.
    pub cycle_set: Vec<Vec<Label>>,
    /// N(𝔠): least common multiple of cycle lengths.
    pub n_of_c: usize,
    /// Human-readable parameter record, echoed into outputs.
    pub params: serde_json::Value,
}

impl FuchsianRep {
    pub fn k(&self) -> usize {
        self.pairing.k
    }

    pub fn map(&self, s: Label) -> &MobiusMap {
        &self.pairing.maps[s as usize]
    }

    pub fn generators(&self) -> Vec<MobiusMap> {
        (0..self.k()).map(|i| self.pairing.maps[2 * i]).collect()
    }

    /// One cycle per cusp orbit (the representative is the lowest-index
    /// vertex of the orbit) together with N(𝔠).
    pub fn vertex_cycles(&self) -> (Vec<&VertexCycle>, usize) {
        let reps: Vec<&VertexCycle> = self
            .orbits
            .iter()
            .map(|orbit| &self.cycles_by_vertex[orbit[0]])
            .collect();
        (reps, self.n_of_c)
    }

    /// Shared marked generating set / cusp combinatorics check used by the
    /// type-preserving pairing of potentials.
    pub fn combinatorially_compatible(&self, other: &FuchsianRep) -> bool {
        self.k() == other.k() && self.cycle_set == other.cycle_set
    }

    /// Conjugated representation g ρ g^{-1} with intervals mapped by g.
    pub fn conjugate(&self, g: &MobiusMap) -> Result<FuchsianRep> {
        let maps: Vec<MobiusMap> = self
            .pairing
            .maps
            .iter()
            .map(|m| g.compose(m).compose(&g.inverse()))
            .collect();
        let vertices: Vec<Complex64> = self.vertices.iter().map(|&v| g.apply_disk(v)).collect();
        let pairing = SidePairing {
            k: self.k(),
            maps,
            arcs: self.pairing.arcs.iter().map(|a| a.apply(g)).collect(),
        };
        let params = serde_json::json!({
            "conjugated": self.params,
            "by": [g.a, g.b, g.c, g.d],
        });
        assemble(
            self.genus,
            self.punctures,
            pairing,
            vertices,
            params,
            ValidationLevel::SkipOriginCheck,
        )
    }

    fn validate_sanity_words(&self) -> Result<()> {
        // all reduced words up to length 6 non-elliptic
        let n = self.pairing.n_labels();
        let mut stack: Vec<(MobiusMap, Label, usize)> = Vec::new();
        for s in 0..n as Label {
            stack.push((self.pairing.maps[s as usize], s, 1));
        }
        while let Some((m, last, len)) = stack.pop() {
            if m.abs_trace() < 2.0 - PAIR_TOL {
                return Err(Error::InvalidParameter(format!(
                    "elliptic element found among reduced words of length {len}: |tr| = {}",
                    m.abs_trace()
                )));
            }
            if len < 6 {
                for s in 0..n as Label {
                    if s != partner(last) {
                        stack.push((m.compose(&self.pairing.maps[s as usize]), s, len + 1));
                    }
                }
            }
        }
        Ok(())
    }
}

enum ValidationLevel {
    Full,
    /// Conjugated reps keep the basepoint at the origin even when the moved
    /// polygon no longer surrounds it; everything downstream is
    /// basepoint-independent.
    SkipOriginCheck,
}

/// Walks the polygon vertex cycles, classifies cusp orbits, and packages a
/// validated representation.
fn assemble(
    genus: usize,
    punctures: usize,
    pairing: SidePairing,
    vertices: Vec<Complex64>,
    params: serde_json::Value,
    level: ValidationLevel,
) -> Result<FuchsianRep> {
    let k = pairing.k;
    if k != 2 * genus + punctures - 1 {
        return Err(Error::InvalidParameter(format!(
            "k = {k} does not match 2g+n-1 = {}",
            2 * genus + punctures - 1
        )));
    }
    match level {
        ValidationLevel::Full => pairing.validate()?,
        ValidationLevel::SkipOriginCheck => {
            // same checks minus the arc-width (origin interior) condition
            pairing.validate().or_else(|e| match e {
                Error::InvalidPairing(ref msg) if msg.contains("origin") => Ok(()),
                other => Err(other),
            })?;
        }
    }

    let n = 2 * k;
    if vertices.len() != n {
        return Err(Error::InvalidPairing(format!(
            "expected {n} ideal vertices, got {}",
            vertices.len()
        )));
    }
    // sort vertices counterclockwise
    let mut verts = vertices;
    verts.sort_by(|a, b| a.arg().total_cmp(&b.arg()));

    // match each arc to the vertex it starts at
    let mut label_at = vec![u8::MAX; n];
    for s in 0..n {
        let start = pairing.arcs[s].start_point();
        let (j, dist) = nearest(&verts, start);
        if dist > PAIR_TOL * 10.0 {
            return Err(Error::InvalidPairing(format!(
                "arc I_{} does not start at an ideal vertex (distance {dist:.3e})",
                label_name(s as Label)
            )));
        }
        if label_at[j] != u8::MAX {
            return Err(Error::InvalidPairing("two arcs start at the same vertex".into()));
        }
        label_at[j] = s as Label;
    }

    // forward cycle of each vertex by walking the side pairings
    let max_steps = 4 * k;
    let mut cycles_by_vertex = Vec::with_capacity(n);
    let mut orbit_of = vec![usize::MAX; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for j0 in 0..n {
        let mut word = Vec::new();
        let mut visited = vec![j0];
        let mut j = j0;
        loop {
            // label of the arc ending at vertex j = arc starting at vertex j-1
            let s = label_at[(j + n - 1) % n];
            word.push(s);
            let img = pairing.maps[s as usize].apply_disk(verts[j]);
            let (jn, dist) = nearest(&verts, img);
            if dist > 1e-7 {
                return Err(Error::InvalidPairing(format!(
                    "vertex walk left the vertex set at step {} (distance {dist:.3e})",
                    word.len()
                )));
            }
            j = jn;
            if j == j0 {
                break;
            }
            visited.push(j);
            if word.len() >= max_steps {
                return Err(Error::InvalidPairing(format!(
                    "vertex cycle failed to close within {max_steps} steps"
                )));
            }
        }
        // cycle product must be parabolic and fix the vertex
        let prod = pairing.cycle_product(&word);
        if prod.classify() != IsometryClass::Parabolic {
            return Err(Error::InvalidPairing(format!(
                "vertex cycle product has |tr| = {}: not parabolic, so the representation is not type-preserving/finite-area",
                prod.abs_trace()
            )));
        }
        if (prod.apply_disk(verts[j0]) - verts[j0]).norm() > PAIR_TOL * 10.0 {
            return Err(Error::InvalidPairing(
                "vertex cycle product does not fix its vertex".into(),
            ));
        }
        if orbit_of[j0] == usize::MAX {
            let id = orbits.len();
            for &v in &visited {
                orbit_of[v] = id;
            }
            orbits.push(visited.clone());
        }
        cycles_by_vertex.push(VertexCycle {
            vertex: verts[j0],
            word,
        });
    }

    // 𝔠: forward and reversed cycles of every vertex, deduplicated
    let mut cycle_set: Vec<Vec<Label>> = Vec::new();
    for vc in &cycles_by_vertex {
        let fwd = vc.word.clone();
        let rev: Vec<Label> = vc.word.iter().rev().map(|&s| partner(s)).collect();
        for w in [fwd, rev] {
            if !cycle_set.contains(&w) {
                cycle_set.push(w);
            }
        }
    }
    cycle_set.sort();
    let n_of_c = cycle_set.iter().fold(1usize, |acc, w| num::lcm(acc, w.len()));

    // every rotation of a cycle is some vertex's cycle; the coding templates
    // rely on this closure
    for w in cycle_set.clone() {
        for r in 1..w.len() {
            let rot: Vec<Label> = w[r..].iter().chain(w[..r].iter()).copied().collect();
            if !cycle_set.contains(&rot) {
                return Err(Error::InvalidPairing(
                    "vertex cycle set is not closed under rotation".into(),
                ));
            }
        }
    }

    let rep = FuchsianRep {
        genus,
        punctures,
        pairing,
        vertices: verts,
        label_at,
        cycles_by_vertex,
        orbits,
        cycle_set,
        n_of_c,
        params,
    };
    rep.validate_sanity_words()?;
    Ok(rep)
}

fn nearest(verts: &[Complex64], p: Complex64) -> (usize, f64) {
    let mut best = (0usize, f64::INFINITY);
    for (j, &v) in verts.iter().enumerate() {
        let d = (v - p).norm();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Assigns boundary arcs to labels given the maps and the ideal vertices:
/// I_s is the arc whose endpoints g_s carries (crosswise) onto the endpoints
/// of I_{s'}.
fn derive_arcs(maps: &[MobiusMap], vertices: &[Complex64]) -> Result<Vec<Arc>> {
    let n = maps.len();
    let mut verts = vertices.to_vec();
    verts.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let arcs: Vec<Arc> = (0..n)
        .map(|j| Arc::from_endpoints(verts[j], verts[(j + 1) % n]))
        .collect::<Result<_>>()?;
    let mut assignment = vec![usize::MAX; n];
    for s in 0..n {
        let g = &maps[s];
        let mut found = None;
        for (j, arc) in arcs.iter().enumerate() {
            let img_start = g.apply_disk(arc.start_point());
            let img_end = g.apply_disk(arc.end_point());
            for tgt in arcs.iter() {
                if (img_start - tgt.end_point()).norm() < 1e-7
                    && (img_end - tgt.start_point()).norm() < 1e-7
                {
                    if found.is_some() {
                        return Err(Error::InvalidPairing(format!(
                            "ambiguous interval assignment for g_{}",
                            label_name(s as Label)
                        )));
                    }
                    found = Some(j);
                }
            }
        }
        assignment[s] = found.ok_or_else(|| {
            Error::InvalidPairing(format!(
                "no boundary interval is carried crosswise by g_{}",
                label_name(s as Label)
            ))
        })?;
    }
    Ok(assignment.into_iter().map(|j| arcs[j]).collect())
}

fn solve_markov_z_branch(x: f64, y: f64, upper: bool) -> Result<f64> {
    let disc = x * x * y * y - 4.0 * (x * x + y * y);
    if disc < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "no real Markov solution for x = {x}, y = {y}"
        )));
    }
    let z = if upper {
        (x * y + disc.sqrt()) / 2.0
    } else {
        (x * y - disc.sqrt()) / 2.0
    };
    Ok(z)
}

/// z with x² + y² + z² = xyz on the branch containing (3,3,3)
/// (the smaller root).
pub fn markov_z(x: f64, y: f64) -> Result<f64> {
    solve_markov_z_branch(x, y, false)
}

/// The larger Markov root, handy for building clearly non-conjugate pairs.
pub fn markov_z_upper(x: f64, y: f64) -> Result<f64> {
    solve_markov_z_branch(x, y, true)
}

/// Once-punctured torus from Fricke trace coordinates (tr A, tr B, tr AB) on
/// the Markov surface x² + y² + z² = xyz. The lift is deterministic: A is
/// diagonalized, B is solved from the traces, and the ideal quadrilateral is
/// centered so that the diagonals cross at the origin with the commutator
/// fixed point rotated to +i.
pub fn punctured_torus_from_markov(x: f64, y: f64, z: f64) -> Result<FuchsianRep> {
    let rel = x * x + y * y + z * z - x * y * z;
    if rel.abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "Markov relation violated: x²+y²+z²−xyz = {rel:.3e}"
        )));
    }
    // traces below 2 leave the Fricke domain; the component through (3,3,3)
    // never reaches 2
    if x <= 2.0 || y <= 2.0 || z <= 2.0 {
        return Err(Error::InvalidParameter(format!(
            "traces must exceed 2, got ({x}, {y}, {z})"
        )));
    }
    let lambda = (x + (x * x - 4.0).sqrt()) / 2.0;
    let a = MobiusMap::new(lambda, 0.0, 0.0, 1.0 / lambda)?;
    let p = (z - y / lambda) / (lambda - 1.0 / lambda);
    let s = y - p;
    let q = p * s - 1.0;
    if q.abs() < 1e-12 {
        return Err(Error::InvalidParameter(
            "degenerate lift: B would share a fixed point with A".into(),
        ));
    }
    let b = MobiusMap::new(p, q, 1.0, s)?;

    build_torus(a, b, serde_json::json!({"family": "punctured_torus", "markov": [x, y, z]}))
}

fn build_torus(a: MobiusMap, b: MobiusMap, params: serde_json::Value) -> Result<FuchsianRep> {
    let commutator = a
        .compose(&b)
        .compose(&a.inverse())
        .compose(&b.inverse());
    if commutator.classify() != IsometryClass::Parabolic {
        return Err(Error::InvalidParameter(format!(
            "commutator is not parabolic: tr = {}",
            commutator.trace()
        )));
    }
    let v1 = match commutator.fixed_points()? {
        FixedPoints::Parabolic(p) => p,
        _ => unreachable!(),
    };
    let v2 = b.inverse().apply_disk(v1);
    let v3 = a.inverse().apply_disk(v2);
    let v4 = b.apply_disk(v3);
    if (a.apply_disk(v4) - v1).norm() > 1e-8 {
        return Err(Error::InvalidParameter(
            "commutator vertex orbit does not close".into(),
        ));
    }
    let raw = [v1, v2, v3, v4];
    for i in 0..4 {
        for j in i + 1..4 {
            if (raw[i] - raw[j]).norm() < 1e-6 {
                return Err(Error::InvalidParameter(
                    "degenerate ideal quadrilateral: coincident vertices".into(),
                ));
            }
        }
    }

    // center: diagonals of the sorted quadrilateral cross at the new origin,
    // then rotate the commutator fixed point to +i
    let mut sorted = raw;
    sorted.sort_by(|p, q| p.arg().total_cmp(&q.arg()));
    let center = hyp::geodesic_intersection(sorted[0], sorted[2], sorted[1], sorted[3])?;
    let t0 = hyp::centering_map(center, 0.0)?;
    let phi = std::f64::consts::FRAC_PI_2 - t0.apply_disk(v1).arg();
    let g = hyp::centering_map(center, phi)?;

    let a = g.compose(&a).compose(&g.inverse());
    let b = g.compose(&b).compose(&g.inverse());
    let vertices: Vec<Complex64> = raw.iter().map(|&v| g.apply_disk(v)).collect();

    let maps = vec![a, a.inverse(), b, b.inverse()];
    let arcs = derive_arcs(&maps, &vertices)?;
    let pairing = SidePairing { k: 2, maps, arcs };
    assemble(1, 1, pairing, vertices, params, ValidationLevel::Full)
}

/// The thrice-punctured sphere: the level-2 principal congruence group
/// generated by z ↦ z+2 and z ↦ z/(2z+1), taken to the disk model. Its ideal
/// quadrilateral has vertices at the Cayley images of ∞, −1, 0, 1 and already
/// surrounds the origin.
pub fn thrice_punctured_sphere() -> Result<FuchsianRep> {
    let a = MobiusMap::new(1.0, 2.0, 0.0, 1.0)?;
    let b = MobiusMap::new(1.0, 0.0, 2.0, 1.0)?;
    let vertices = vec![
        Complex64::new(1.0, 0.0),  // ∞
        Complex64::new(0.0, 1.0),  // −1
        Complex64::new(-1.0, 0.0), // 0
        Complex64::new(0.0, -1.0), // 1
    ];
    let maps = vec![a, a.inverse(), b, b.inverse()];
    let arcs = derive_arcs(&maps, &vertices)?;
    let pairing = SidePairing { k: 2, maps, arcs };
    assemble(
        0,
        3,
        pairing,
        vertices,
        serde_json::json!({"family": "s03"}),
        ValidationLevel::Full,
    )
}

/// Interval datum for user-supplied pairings: disk-model angles in radians,
/// counterclockwise from `start` to `end`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub label: u8,
    pub start: f64,
    pub end: f64,
}

/// Builds and fully validates a representation from user-supplied generator
/// matrices (half-plane form, row major) and labeled boundary intervals.
pub fn from_side_pairing(
    genus: usize,
    punctures: usize,
    matrices: &[[f64; 4]],
    intervals: &[IntervalSpec],
) -> Result<FuchsianRep> {
    let k = matrices.len();
    if k == 0 {
        return Err(Error::InvalidParameter("no generator matrices supplied".into()));
    }
    let mut maps = Vec::with_capacity(2 * k);
    for m in matrices {
        let g = MobiusMap::new(m[0], m[1], m[2], m[3])?;
        maps.push(g);
        maps.push(g.inverse());
    }
    let mut arcs: Vec<Option<Arc>> = vec![None; 2 * k];
    if intervals.len() != 2 * k {
        return Err(Error::InvalidParameter(format!(
            "expected {} intervals, got {}",
            2 * k,
            intervals.len()
        )));
    }
    for iv in intervals {
        let s = iv.label as usize;
        if s >= 2 * k || arcs[s].is_some() {
            return Err(Error::InvalidParameter(format!(
                "bad or repeated interval label {}",
                iv.label
            )));
        }
        let width = {
            let mut w = (iv.end - iv.start) % std::f64::consts::TAU;
            if w <= 0.0 {
                w += std::f64::consts::TAU;
            }
            w
        };
        arcs[s] = Some(Arc::new(iv.start, width)?);
    }
    let arcs: Vec<Arc> = arcs.into_iter().map(|a| a.unwrap()).collect();
    let vertices: Vec<Complex64> = arcs.iter().map(|a| a.start_point()).collect();
    let pairing = SidePairing { k, maps, arcs };
    assemble(genus, punctures, pairing, vertices, serde_json::json!({"family": "custom"}), ValidationLevel::Full)
}

/// Structured construction request, the JSON config surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RepConfig {
    PuncturedTorus { markov: [f64; 3] },
    S03,
    Custom {
        genus: usize,
        punctures: usize,
        matrices: Vec<[f64; 4]>,
        pairing: Vec<IntervalSpec>,
    },
}

impl RepConfig {
    pub fn build(&self) -> Result<FuchsianRep> {
        match self {
            RepConfig::PuncturedTorus { markov } => {
                punctured_torus_from_markov(markov[0], markov[1], markov[2])
            }
            RepConfig::S03 => thrice_punctured_sphere(),
            RepConfig::Custom {
                genus,
                punctures,
                matrices,
                pairing,
            } => from_side_pairing(*genus, *punctures, matrices, pairing),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn torus333() -> FuchsianRep {
        punctured_torus_from_markov(3.0, 3.0, 3.0).unwrap()
    }

    #[test]
    fn markov_torus_traces_and_commutator() {
        let rep = torus333();
        let a = rep.map(0);
        let b = rep.map(2);
        assert_abs_diff_eq!(a.abs_trace(), 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b.abs_trace(), 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.compose(b).abs_trace(), 3.0, epsilon = 1e-9);
        let comm = a
            .compose(b)
            .compose(&a.inverse())
            .compose(&b.inverse());
        assert_abs_diff_eq!(comm.abs_trace(), 2.0, epsilon = 1e-9);
        assert_eq!(rep.k(), 2); // 2g+n-1
    }

    #[test]
    fn markov_relation_is_enforced() {
        assert!(punctured_torus_from_markov(3.0, 3.0, 4.0).is_err());
        assert!(punctured_torus_from_markov(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn perturbed_markov_triple_has_parabolic_cycles() {
        let z = markov_z_upper(3.2, 3.0).unwrap();
        let rep = punctured_torus_from_markov(3.2, 3.0, z).unwrap();
        for vc in &rep.cycles_by_vertex {
            let prod = rep.pairing.cycle_product(&vc.word);
            assert_abs_diff_eq!(prod.abs_trace(), 2.0, epsilon = 1e-9);
        }
        // smooth branch through (3,3,3) also builds (z slightly below 3)
        let z = markov_z(3.05, 3.0).unwrap();
        assert!(z < 3.0);
        punctured_torus_from_markov(3.05, 3.0, z).unwrap();
    }

    #[test]
    fn torus_has_single_cusp_with_cycle_length_4() {
        let rep = torus333();
        let (cycles, n_of_c) = rep.vertex_cycles();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 4);
        assert_eq!(n_of_c, 4);
        // walk oracle: the product fixes the vertex and is parabolic
        let prod = rep.pairing.cycle_product(&cycles[0].word);
        assert_abs_diff_eq!(prod.abs_trace(), 2.0, epsilon = 1e-9);
        assert!((prod.apply_disk(cycles[0].vertex) - cycles[0].vertex).norm() < 1e-9);
    }

    #[test]
    fn s03_structure() {
        let rep = thrice_punctured_sphere().unwrap();
        assert_eq!(rep.k(), 2); // 2·0+3−1
        let a = rep.map(0);
        let b = rep.map(2);
        assert_abs_diff_eq!(a.abs_trace(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.abs_trace(), 2.0, epsilon = 1e-12);
        // commutator is hyperbolic: oracle by explicit trace
        let comm = a.compose(b).compose(&a.inverse()).compose(&b.inverse());
        assert!(comm.abs_trace() > 2.0 + 1e-6);
        let (cycles, n_of_c) = rep.vertex_cycles();
        assert_eq!(cycles.len(), 3);
        assert_eq!(n_of_c, 2);
        let mut lens: Vec<usize> = cycles.iter().map(|c| c.len()).collect();
        lens.sort();
        assert_eq!(lens, vec![1, 1, 2]);
    }

    #[test]
    fn cycle_set_is_rotation_closed_and_sized() {
        let rep = torus333();
        assert_eq!(rep.cycle_set.len(), 8); // 4 rotations each way
        let s03 = thrice_punctured_sphere().unwrap();
        assert_eq!(
            s03.cycle_set.iter().filter(|w| w.len() == 1).count(),
            4
        );
        assert_eq!(
            s03.cycle_set.iter().filter(|w| w.len() == 2).count(),
            4
        );
    }

    #[test]
    fn round_trip_through_side_pairing_config() {
        let rep = torus333();
        let matrices: Vec<[f64; 4]> = (0..rep.k())
            .map(|i| {
                let m = rep.pairing.maps[2 * i];
                [m.a, m.b, m.c, m.d]
            })
            .collect();
        let intervals: Vec<IntervalSpec> = (0..rep.pairing.n_labels())
            .map(|s| IntervalSpec {
                label: s as u8,
                start: rep.pairing.arcs[s].start,
                end: rep.pairing.arcs[s].end(),
            })
            .collect();
        let again = from_side_pairing(1, 1, &matrices, &intervals).unwrap();
        assert_eq!(again.cycle_set, rep.cycle_set);
        assert_eq!(again.n_of_c, rep.n_of_c);
    }

    #[test]
    fn bad_pairings_are_rejected() {
        let rep = torus333();
        let matrices: Vec<[f64; 4]> = (0..rep.k())
            .map(|i| {
                let m = rep.pairing.maps[2 * i];
                [m.a, m.b, m.c, m.d]
            })
            .collect();
        // overlapping intervals
        let mut intervals: Vec<IntervalSpec> = (0..rep.pairing.n_labels())
            .map(|s| IntervalSpec {
                label: s as u8,
                start: rep.pairing.arcs[s].start,
                end: rep.pairing.arcs[s].end(),
            })
            .collect();
        intervals[0].end += 0.3;
        assert!(from_side_pairing(1, 1, &matrices, &intervals).is_err());
        // hyperbolic cycle product: generators of a free group with no
        // parabolic commutator (Schottky-like traces off the Markov surface)
        let m1 = [2.0, 0.0, 0.0, 0.5];
        let m2 = [2.0, 1.0, 1.0, 1.0];
        let iv: Vec<IntervalSpec> = (0..4)
            .map(|s| IntervalSpec {
                label: s as u8,
                start: s as f64 * std::f64::consts::FRAC_PI_2,
                end: (s as f64 + 1.0) * std::f64::consts::FRAC_PI_2,
            })
            .collect();
        assert!(from_side_pairing(1, 1, &[m1, m2], &iv).is_err());
    }

    #[test]
    fn conjugation_preserves_traces_and_lengths() {
        let rep = torus333();
        let g = MobiusMap::new(1.3, 0.2, 0.1, (1.0 + 0.02) / 1.3).unwrap();
        let conj = rep.conjugate(&g).unwrap();
        for s in 0..4u8 {
            assert_abs_diff_eq!(
                rep.map(s).abs_trace(),
                conj.map(s).abs_trace(),
                epsilon = 1e-9
            );
        }
        // identity conjugation returns an equal rep
        let same = rep.conjugate(&MobiusMap::identity()).unwrap();
        assert!(same.map(0).approx_eq(rep.map(0), 1e-12));

        // marked length invariance on random words
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let len = rng.gen_range(1..=6);
            let mut word = Vec::new();
            let mut last: Option<Label> = None;
            for _ in 0..len {
                loop {
                    let s: Label = rng.gen_range(0..4);
                    if last.map_or(true, |l| s != partner(l)) {
                        word.push(s);
                        last = Some(s);
                        break;
                    }
                }
            }
            let m0 = rep.pairing.compose_word(&word);
            let m1 = conj.pairing.compose_word(&word);
            if m0.classify() == IsometryClass::Hyperbolic {
                let (l0, _) = m0.translation_length().unwrap();
                let (l1, _) = m1.translation_length().unwrap();
                assert_abs_diff_eq!(l0, l1, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn every_cycle_product_fixes_its_vertex() {
        for rep in [torus333(), thrice_punctured_sphere().unwrap()] {
            for vc in &rep.cycles_by_vertex {
                let prod = rep.pairing.cycle_product(&vc.word);
                assert!((prod.apply_disk(vc.vertex) - vc.vertex).norm() < 1e-9);
            }
        }
    }
}
