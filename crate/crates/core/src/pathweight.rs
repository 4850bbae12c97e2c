//! Mixed moments as weighted sums over vacuum-to-vacuum paths.
//!
//! The vertices of a [`LiftDigraph`] are word types: the tensor graph has
//! the four subspaces `Ω⊗Ω`, `Ĥ⊗Ω`, `Ω⊗Ĝ`, `Ĥ⊗Ĝ`; a free graph has one
//! vertex per alternating word over `{1, 2}` up to a length bound. Each edge
//! carries one weight slot per lift tag, in the order `(λ^{γ₁}, λ^{γ₂},
//! ρ^{δ₁}, ρ^{δ₂})` (or the free analogues); an empty slot marks an edge that
//! is irrelevant for that lift. A slot also records which block of the
//! operator matrix is applied to which tensor leg.
//!
//! A moment is obtained by walking the word's letters from right to left:
//! every letter has exactly two relevant edges out of each vertex. The path
//! contributions multiply the total parameter weight with the leg-wise
//! block applications. This evaluation never touches the lifted operators
//! and therefore serves as an independent oracle for
//! [`crate::products::mixed_moment`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{CircleParam, PointedSpace, C64, ONE};
use crate::products::{FaceSide, MomentWord, Monoidal, ProductSpec};

/// Number of lift tags of a two-faced spec.
pub const TAGS: usize = 4;

/// A lift parameter of a two-faced spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Param {
    /// `γ_f`, the parameter of the left lift of face `f`.
    Gamma(u8),
    /// `δ_f`, the parameter of the right lift of face `f`.
    Delta(u8),
}

impl Param {
    /// The parameter of a lift tag.
    pub fn of_tag(tag: usize) -> Param {
        let face = (tag % 2) as u8 + 1;
        if tag < 2 {
            Param::Gamma(face)
        } else {
            Param::Delta(face)
        }
    }

    /// Numerical value in a spec.
    pub fn value(&self, spec: &ProductSpec) -> CircleParam {
        let face = |f: u8| spec.faces()[f as usize - 1];
        match *self {
            Param::Gamma(f) => face(f).gamma,
            Param::Delta(f) => face(f).delta,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Gamma(i) => write!(f, "γ{i}"),
            Param::Delta(i) => write!(f, "δ{i}"),
        }
    }
}

/// A symbolic edge weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Atom {
    /// The weight 1.
    One,
    /// `|p|`.
    Abs(Param),
    /// `p`.
    Value(Param),
    /// `p̄`.
    Conj(Param),
}

impl Atom {
    /// Numerical value in a spec.
    pub fn value(&self, spec: &ProductSpec) -> C64 {
        match self {
            Atom::One => ONE,
            Atom::Abs(p) => C64::new(p.value(spec).modulus(), 0.0),
            Atom::Value(p) => p.value(spec).value(),
            Atom::Conj(p) => p.value(spec).value().conj(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::One => f.write_str("1"),
            Atom::Abs(p) => write!(f, "|{p}|"),
            Atom::Value(p) => write!(f, "{p}"),
            Atom::Conj(p) => write!(f, "conj({p})"),
        }
    }
}

/// The block of an operator matrix applied along an edge, and the tensor
/// leg (position in the vertex's word type) it is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LegAction {
    /// `τ = ⟨Ω, TΩ⟩`; no leg changes.
    Scalar,
    /// `t = P_Ω⊥ TΩ` becomes a new leg at this position.
    Create(usize),
    /// `⟨t′, ·⟩` consumes the leg at this position.
    Annihilate(usize),
    /// `T̂` acts on the leg at this position.
    Interior(usize),
}

/// One relevant (edge, tag) combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeSlot {
    /// Symbolic weight.
    pub atom: Atom,
    /// Numerical weight in the graph's spec.
    #[serde(serialize_with = "crate::products::serialize_scalar")]
    pub weight: C64,
    /// The block application.
    pub action: LegAction,
}

/// A directed edge with one weight slot per tag (`None` = irrelevant).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    /// Source vertex index.
    pub from: usize,
    /// Target vertex index.
    pub to: usize,
    /// Slots in tag order `(λ^{γ₁}, λ^{γ₂}, ρ^{δ₁}, ρ^{δ₂})`.
    pub slots: [Option<EdgeSlot>; TAGS],
}

/// Which parameter monomials the cycle weights of a graph factor into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GraphKind {
    /// Tensor lifts.
    Tensor,
    /// Free lifts, both faces acting from the same side.
    FreeSameSide,
    /// Free lifts acting from opposite sides.
    FreeMixedSide,
}

/// The weighted digraph of a two-faced spec.
#[derive(Debug, Clone, Serialize)]
pub struct LiftDigraph {
    kind: GraphKind,
    spec: ProductSpec,
    max_len: usize,
    vertices: Vec<Vec<u8>>,
    edges: Vec<Edge>,
    #[serde(skip)]
    index: HashMap<Vec<u8>, usize>,
    #[serde(skip)]
    out: Vec<Vec<usize>>,
    #[serde(skip)]
    by_pair: HashMap<(usize, usize), usize>,
}

impl LiftDigraph {
    /// Kind of graph.
    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    /// The spec the weights were taken from.
    pub fn spec(&self) -> &ProductSpec {
        &self.spec
    }

    /// Longest word type (2 for the tensor graph).
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Word types, indexed by vertex number; vertex 0 is the vacuum.
    pub fn vertices(&self) -> &[Vec<u8>] {
        &self.vertices
    }

    /// All edges.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Vertex number of a word type.
    pub fn vertex(&self, word_type: &[u8]) -> Option<usize> {
        self.index.get(word_type).copied()
    }

    /// The edge between two vertices, if any.
    pub fn edge(&self, from: usize, to: usize) -> Option<&Edge> {
        self.by_pair.get(&(from, to)).map(|&e| &self.edges[e])
    }

    /// The relevant edges out of `from` for `tag`, as `(target, slot)`.
    pub fn relevant(&self, from: usize, tag: usize) -> impl Iterator<Item = (usize, EdgeSlot)> + '_ {
        self.out[from].iter().filter_map(move |&e| {
            let edge = &self.edges[e];
            edge.slots[tag].map(|s| (edge.to, s))
        })
    }

    /// Human-readable vertex label such as `"Ĥ⊗Ĝ"` or `"CΩ"`.
    pub fn label(&self, v: usize) -> String {
        let t = &self.vertices[v];
        let hat = |a: u8| if a == 1 { "Ĥ" } else { "Ĝ" };
        match self.kind {
            GraphKind::Tensor => {
                let left = if t.contains(&1) { "Ĥ" } else { "Ω" };
                let right = if t.contains(&2) { "Ĝ" } else { "Ω" };
                format!("{left}⊗{right}")
            }
            _ if t.is_empty() => "CΩ".into(),
            _ => t.iter().map(|&a| hat(a)).collect::<Vec<_>>().join("⊗"),
        }
    }

    /// DOT rendering: vertex labels are word types, edge labels the weight
    /// tuples with `×` for irrelevant slots.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph lifts {\n  rankdir=LR;\n");
        for v in 0..self.vertices.len() {
            let _ = writeln!(s, "  v{v} [label=\"{}\"];", self.label(v));
        }
        for e in &self.edges {
            let label = e
                .slots
                .iter()
                .map(|slot| slot.map_or_else(|| "×".to_string(), |x| x.atom.to_string()))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(s, "  v{} -> v{} [label=\"{label}\"];", e.from, e.to);
        }
        s.push_str("}\n");
        s
    }

    fn add(&mut self, from: usize, to: usize, tag: usize, atom: Atom, action: LegAction) {
        let weight = atom.value(&self.spec);
        let e = match self.by_pair.get(&(from, to)) {
            Some(&e) => e,
            None => {
                self.edges.push(Edge {
                    from,
                    to,
                    slots: [None; TAGS],
                });
                self.out[from].push(self.edges.len() - 1);
                self.by_pair.insert((from, to), self.edges.len() - 1);
                self.edges.len() - 1
            }
        };
        debug_assert!(self.edges[e].slots[tag].is_none(), "two slots for one tag on one edge");
        self.edges[e].slots[tag] = Some(EdgeSlot { atom, weight, action });
    }
}

/// The weight atom of a deformed block: 1 if the rest of the word is the
/// vacuum, otherwise `p` (creation), `p̄` (annihilation) or `|p|`.
fn deformed(p: Param, rest_is_vacuum: bool, action: LegAction) -> Atom {
    if rest_is_vacuum {
        return Atom::One;
    }
    match action {
        LegAction::Create(_) => Atom::Value(p),
        LegAction::Annihilate(_) => Atom::Conj(p),
        _ => Atom::Abs(p),
    }
}

fn alternating_types(max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for len in 1..=max_len {
        for first in [1u8, 2] {
            out.push((0..len).map(|i| if i % 2 == 0 { first } else { 3 - first }).collect());
        }
    }
    out
}

/// Builds the lift digraph of a two-faced admissible spec. `max_len` bounds
/// the word types of free graphs and is ignored for the tensor graph.
pub fn build_graph(spec: &ProductSpec, max_len: usize) -> Result<LiftDigraph> {
    if !spec.is_admissible() {
        return Err(ProductSpec::new(spec.monoidal(), spec.faces().to_vec()).unwrap_err());
    }
    spec.params()?;
    let (kind, vertices) = match spec.monoidal() {
        Monoidal::Tensor => (GraphKind::Tensor, vec![vec![], vec![1], vec![2], vec![1, 2]]),
        Monoidal::Free => {
            let acting = |s: FaceSide| s == FaceSide::Right;
            let mixed = acting(spec.faces()[0].side) != acting(spec.faces()[1].side);
            let kind = if mixed {
                GraphKind::FreeMixedSide
            } else {
                GraphKind::FreeSameSide
            };
            (kind, alternating_types(max_len))
        }
    };
    let index = vertices.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let out = vec![Vec::new(); vertices.len()];
    let mut g = LiftDigraph {
        kind,
        spec: spec.clone(),
        max_len: if kind == GraphKind::Tensor { 2 } else { max_len },
        vertices,
        edges: Vec::new(),
        index,
        out,
        by_pair: HashMap::new(),
    };
    for v in 0..g.vertices.len() {
        for tag in 0..TAGS {
            let moves = match kind {
                GraphKind::Tensor => tensor_moves(&g.vertices[v], tag),
                _ => {
                    let face = spec.faces()[tag % 2];
                    free_moves(&g.vertices[v], tag, face.side == FaceSide::Right)
                }
            };
            for (target, atom, action) in moves {
                // Creations beyond the length bound are truncated.
                if let Some(&to) = g.index.get(&target) {
                    g.add(v, to, tag, atom, action);
                }
            }
        }
    }
    Ok(g)
}

type Move = (Vec<u8>, Atom, LegAction);

/// Moves of the tensor graph: `λ` acts on the `H`-leg, `ρ` on the `G`-leg;
/// the weight is 1 while the other leg is the vacuum.
fn tensor_moves(t: &[u8], tag: usize) -> Vec<Move> {
    let p = Param::of_tag(tag);
    let own: u8 = if tag < 2 { 1 } else { 2 };
    let other_is_vacuum = !t.contains(&(3 - own));
    let pos = if own == 1 { 0 } else { usize::from(t.contains(&1)) };
    let with = |present: bool| -> Vec<u8> {
        let mut w: Vec<u8> = t.iter().copied().filter(|&a| a != own).collect();
        if present {
            w.push(own);
            w.sort_unstable();
        }
        w
    };
    let moves = if t.contains(&own) {
        [
            (with(true), LegAction::Interior(pos)),
            (with(false), LegAction::Annihilate(pos)),
        ]
    } else {
        [(with(false), LegAction::Scalar), (with(true), LegAction::Create(pos))]
    };
    moves
        .into_iter()
        .map(|(w, a)| (w, deformed(p, other_is_vacuum, a), a))
        .collect()
}

/// Moves of a free graph: a left-acting lift acts on the first letter, a
/// right-acting one on the last; the weight is 1 while the rest of the word
/// is empty.
fn free_moves(t: &[u8], tag: usize, from_right: bool) -> Vec<Move> {
    let p = Param::of_tag(tag);
    let own: u8 = if tag < 2 { 1 } else { 2 };
    let end = if from_right { t.last() } else { t.first() };
    let pos = if from_right { t.len().saturating_sub(1) } else { 0 };
    if end == Some(&own) {
        let rest: Vec<u8> = if from_right {
            t[..t.len() - 1].to_vec()
        } else {
            t[1..].to_vec()
        };
        let vac = rest.is_empty();
        vec![
            (
                t.to_vec(),
                deformed(p, vac, LegAction::Interior(pos)),
                LegAction::Interior(pos),
            ),
            (
                rest,
                deformed(p, vac, LegAction::Annihilate(pos)),
                LegAction::Annihilate(pos),
            ),
        ]
    } else {
        let vac = t.is_empty();
        let (grown, at) = if from_right {
            (t.iter().copied().chain([own]).collect::<Vec<_>>(), t.len())
        } else {
            ([own].into_iter().chain(t.iter().copied()).collect(), 0)
        };
        vec![
            (t.to_vec(), deformed(p, vac, LegAction::Scalar), LegAction::Scalar),
            (grown, deformed(p, vac, LegAction::Create(at)), LegAction::Create(at)),
        ]
    }
}

/// The state of a partial path: current vertex, accumulated parameter
/// weight, accumulated scalar from the applied blocks and the leg vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    /// Current vertex.
    pub vertex: usize,
    /// Product of the parameter weights so far.
    pub weight: C64,
    /// Product of the scalar blocks (`τ`, `⟨t′, x⟩`) applied so far.
    pub amplitude: C64,
    /// One vector per letter of the vertex's word type (full coordinates,
    /// vacuum component zero).
    pub legs: Vec<DVector<C64>>,
}

fn tag_of(algebra: u8, face: usize) -> usize {
    (algebra as usize - 1) * 2 + (face - 1)
}

fn step(state: &PathState, to: usize, slot: &EdgeSlot, op: &nalgebra::DMatrix<C64>) -> PathState {
    let mut next = state.clone();
    next.vertex = to;
    next.weight *= slot.weight;
    let complement = |mut v: DVector<C64>| {
        v[0] = C64::new(0.0, 0.0);
        v
    };
    match slot.action {
        LegAction::Scalar => next.amplitude *= op[(0, 0)],
        LegAction::Create(pos) => next.legs.insert(pos, complement(op.column(0).into_owned())),
        LegAction::Annihilate(pos) => {
            let leg = next.legs.remove(pos);
            next.amplitude *= (op.row(0) * leg)[0];
        }
        LegAction::Interior(pos) => next.legs[pos] = complement(op * &next.legs[pos]),
    }
    next
}

fn walk(graph: &LiftDigraph, state: PathState, ops: &[(usize, &nalgebra::DMatrix<C64>)]) -> C64 {
    let Some(((tag, op), rest)) = ops.split_last() else {
        return if state.vertex == 0 {
            state.weight * state.amplitude
        } else {
            C64::new(0.0, 0.0)
        };
    };
    let mut sum = C64::new(0.0, 0.0);
    for (to, slot) in graph.relevant(state.vertex, *tag) {
        // A path must be able to return to the vacuum in the remaining steps.
        if graph.vertices[to].len() > rest.len() || slot.weight == C64::new(0.0, 0.0) {
            continue;
        }
        sum += walk(graph, step(&state, to, &slot, op), rest);
    }
    sum
}

/// `⟨Ω, κ(T₁)⋯κ(T_n)Ω⟩` as a sum over the relevant paths of the graph.
pub fn moment_by_paths(graph: &LiftDigraph, word: &MomentWord, h1: PointedSpace, h2: PointedSpace) -> Result<C64> {
    if word.is_empty() {
        return Err(Error::InvalidInput("empty moment word".into()));
    }
    if graph.kind != GraphKind::Tensor && 2 * graph.max_len < word.len() {
        return Err(Error::Truncation { max_len: graph.max_len });
    }
    let mut ops = Vec::with_capacity(word.len());
    for (p, l) in word.letters.iter().enumerate() {
        let space = match l.algebra {
            1 => h1,
            2 => h2,
            a => {
                return Err(Error::InvalidInput(format!(
                    "letter {}: algebra {a} does not exist",
                    p + 1
                )))
            }
        };
        if !(1..=2).contains(&l.face) {
            return Err(Error::InvalidInput(format!(
                "letter {}: face {} does not exist",
                p + 1,
                l.face
            )));
        }
        if l.op.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: l.op.dim(),
            });
        }
        ops.push((tag_of(l.algebra, l.face), l.op.matrix()));
    }
    let start = PathState {
        vertex: 0,
        weight: ONE,
        amplitude: ONE,
        legs: Vec::new(),
    };
    let Some(((tag, op), rest)) = ops.split_last() else {
        unreachable!()
    };
    // Branches of the first step run in parallel; summation order is fixed.
    let branches: Vec<(usize, EdgeSlot)> = graph.relevant(0, *tag).collect();
    let parts: Vec<C64> = branches
        .par_iter()
        .map(|(to, slot)| {
            if graph.vertices[*to].len() > rest.len() {
                return C64::new(0.0, 0.0);
            }
            walk(graph, step(&start, *to, slot, op), rest)
        })
        .collect();
    Ok(parts.into_iter().sum())
}

/// A walk in the graph: `vertices[p] → vertices[p+1]` using lift `tags[p]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Path {
    /// Visited vertices, `tags.len() + 1` of them.
    pub vertices: Vec<usize>,
    /// Tag used on each edge.
    pub tags: Vec<usize>,
}

/// A generating monomial of cycle weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Generator {
    /// `|p|`.
    Abs(Param),
    /// `p·q̄` with `p ≠ q`.
    Pair(Param, Param),
}

impl Generator {
    /// Numerical value in a spec.
    pub fn value(&self, spec: &ProductSpec) -> C64 {
        match self {
            Generator::Abs(p) => C64::new(p.value(spec).modulus(), 0.0),
            Generator::Pair(p, q) => p.value(spec).value() * q.value(spec).value().conj(),
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Abs(p) => write!(f, "|{p}|"),
            Generator::Pair(p, q) => write!(f, "{p}·conj({q})"),
        }
    }
}

/// Whether `p·q̄` is one of the generators allowed for this graph kind:
/// every pair for tensor lifts; `γ₁γ̄₂`, `δ₁δ̄₂` and their conjugates for
/// same-side free lifts; `γ₁δ̄₂`, `γ₂δ̄₁` and their conjugates for
/// mixed-side free lifts.
pub fn allowed_pair(kind: GraphKind, p: Param, q: Param) -> bool {
    let class = |x: Param| match (kind, x) {
        (GraphKind::Tensor, _) => 0,
        (GraphKind::FreeSameSide, Param::Gamma(_)) => 0,
        (GraphKind::FreeSameSide, Param::Delta(_)) => 1,
        (GraphKind::FreeMixedSide, Param::Gamma(1) | Param::Delta(2)) => 0,
        (GraphKind::FreeMixedSide, _) => 1,
    };
    p != q && class(p) == class(q)
}

/// Factors a multiset of atoms into generators: `|p|` stays, `p·p̄` becomes
/// `|p|` (as `|p|² = |p|` on `T ∪ {0}`), remaining `p`s are paired with
/// `q̄`s into allowed pairs. Fails if no such pairing exists.
pub fn factor_atoms(kind: GraphKind, atoms: &[Atom]) -> Result<Vec<Generator>> {
    let mut gens = Vec::new();
    let mut values: BTreeMap<Param, usize> = BTreeMap::new();
    let mut conjs: BTreeMap<Param, usize> = BTreeMap::new();
    for a in atoms {
        match *a {
            Atom::One => {}
            Atom::Abs(p) => gens.push(Generator::Abs(p)),
            Atom::Value(p) => *values.entry(p).or_default() += 1,
            Atom::Conj(p) => *conjs.entry(p).or_default() += 1,
        }
    }
    for (p, n) in values.iter_mut() {
        if let Some(m) = conjs.get_mut(p) {
            let k = (*n).min(*m);
            *n -= k;
            *m -= k;
            gens.extend(std::iter::repeat_n(Generator::Abs(*p), k));
        }
    }
    let mut rest_conj: Vec<Param> = conjs.iter().flat_map(|(q, &m)| std::iter::repeat_n(*q, m)).collect();
    for (p, &n) in &values {
        for _ in 0..n {
            let Some(i) = rest_conj.iter().position(|&q| allowed_pair(kind, *p, q)) else {
                return Err(Error::InvalidInput(format!("{p} has no admissible conjugate partner")));
            };
            gens.push(Generator::Pair(*p, rest_conj.remove(i)));
        }
    }
    if let Some(q) = rest_conj.first() {
        return Err(Error::InvalidInput(format!("conj({q}) has no admissible partner")));
    }
    gens.sort();
    Ok(gens)
}

/// The atoms along a path.
pub fn path_atoms(graph: &LiftDigraph, path: &Path) -> Result<Vec<Atom>> {
    if path.vertices.len() != path.tags.len() + 1 {
        return Err(Error::InvalidInput("a path needs one more vertex than tags".into()));
    }
    path.tags
        .iter()
        .enumerate()
        .map(|(p, &tag)| {
            let (a, b) = (path.vertices[p], path.vertices[p + 1]);
            graph
                .edge(a, b)
                .and_then(|e| e.slots.get(tag).copied().flatten())
                .map(|s| s.atom)
                .ok_or_else(|| Error::InvalidInput(format!("step {}: no relevant edge for tag {tag}", p + 1)))
        })
        .collect()
}

/// Factors the total weight of a closed path into generating monomials.
pub fn monomial_signature(graph: &LiftDigraph, path: &Path) -> Result<Vec<Generator>> {
    if path.vertices.first() != path.vertices.last() {
        return Err(Error::InvalidInput(
            "monomial signatures are defined for closed paths only".into(),
        ));
    }
    factor_atoms(graph.kind, &path_atoms(graph, path)?)
}

/// Total numerical weight of a path.
pub fn total_weight(graph: &LiftDigraph, path: &Path) -> Result<C64> {
    Ok(path_atoms(graph, path)?.iter().map(|a| a.value(&graph.spec)).product())
}

/// A distinct total weight of closed walks, with one representative walk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedWalk {
    /// A walk realizing the weight.
    pub path: Path,
    /// Its atoms, sorted.
    pub atoms: Vec<Atom>,
}

/// All closed walks of length `1..=max_steps` from every vertex, up to
/// equal start vertex and equal atom multiset (absolute values counted at
/// most once, since `|p|ᵏ = |p|` on `T ∪ {0}`).
pub fn closed_walks(graph: &LiftDigraph, max_steps: usize) -> Vec<ClosedWalk> {
    let normalize = |atoms: &mut Vec<Atom>| {
        atoms.retain(|a| *a != Atom::One);
        atoms.sort();
        let mut seen = HashSet::new();
        atoms.retain(|a| !matches!(a, Atom::Abs(_)) || seen.insert(*a));
    };
    (0..graph.vertices.len())
        .into_par_iter()
        .flat_map_iter(|start| {
            let mut found = Vec::new();
            let mut frontier: HashMap<(usize, Vec<Atom>), Path> = HashMap::new();
            frontier.insert(
                (start, Vec::new()),
                Path {
                    vertices: vec![start],
                    tags: vec![],
                },
            );
            let mut closed: HashSet<Vec<Atom>> = HashSet::new();
            for _ in 0..max_steps {
                let mut next: HashMap<(usize, Vec<Atom>), Path> = HashMap::new();
                let mut keys: Vec<_> = frontier.into_iter().collect();
                keys.sort_by(|a, b| a.0.cmp(&b.0));
                for ((v, atoms), path) in keys {
                    for tag in 0..TAGS {
                        for (to, slot) in graph.relevant(v, tag) {
                            let mut a = atoms.clone();
                            a.push(slot.atom);
                            normalize(&mut a);
                            let key = (to, a);
                            if next.contains_key(&key) {
                                continue;
                            }
                            let mut p = path.clone();
                            p.vertices.push(to);
                            p.tags.push(tag);
                            next.insert(key, p);
                        }
                    }
                }
                let mut hits: Vec<_> = next.iter().filter(|((v, _), _)| *v == start).collect();
                hits.sort_by(|a, b| a.0.cmp(b.0));
                for ((_, atoms), path) in hits {
                    if closed.insert(atoms.clone()) {
                        found.push(ClosedWalk {
                            path: path.clone(),
                            atoms: atoms.clone(),
                        });
                    }
                }
                frontier = next;
            }
            found
        })
        .collect()
}
