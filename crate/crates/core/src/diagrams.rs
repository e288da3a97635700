//! Jacobi diagrams with colored and parity-labeled legs: gluing, coloring,
//! the wheel series, splitting, and weight-system evaluation into the
//! polynomial and enveloping algebras.
//!
//! A diagram is a fixed-point-free involution on half-edges. Internal vertex
//! `v` owns half-edges `3v, 3v+1, 3v+2` in cyclic order and leg `i` owns
//! half-edge `3V + i`. Leg order carries the ordering of odd legs (their
//! product is graded-commutative) and, on based diagrams, the order of every
//! leg along the line. AS, IHX and STU are not quotiented: equality in the
//! diagram spaces is tested through evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::algebra::{FreeSuper, Letter, Monomial, SuperAlgebra, Terms};
use crate::duflo::{self, DufloError, Quantizer};
use crate::gdiff::{self, CheckRecord, Space};
use crate::liealg::QuadraticLieAlgebra;
use crate::ncweil::{self, NcAlgebra, NcKind};
use crate::rational::{factorial, perm_sign, q, qf, Q};
use crate::weil::{PolyKind, SuperPolynomial, WeilError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagramError {
    #[error("wheels need an even number of spokes (at least 2), got {spokes}")]
    OddWheel { spokes: usize },
    #[error("the left argument of a gluing contains a strut")]
    StrutInLeftArgument,
    #[error("inconsistent labels: {0}")]
    InconsistentLabels(String),
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("diagram evaluation needs an orthonormal metric")]
    NonOrthonormal,
    #[error("diagram of degree {degree} exceeds the requested degree {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("evaluation is not basic")]
    NotBasic,
    #[error(transparent)]
    Duflo(#[from] DufloError),
    #[error(transparent)]
    Weil(#[from] WeilError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
    Super,
}

impl Parity {
    pub fn parse(s: &str) -> Option<Parity> {
        match s {
            "even" => Some(Parity::Even),
            "odd" => Some(Parity::Odd),
            "super" => Some(Parity::Super),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Super => "super",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Leg {
    pub color: Option<char>,
    pub parity: Parity,
}

impl Leg {
    pub const EVEN: Leg = Leg { color: None, parity: Parity::Even };
    pub const ODD: Leg = Leg { color: None, parity: Parity::Odd };
    pub const SUPER: Leg = Leg { color: None, parity: Parity::Super };

    pub fn colored(self, c: char) -> Leg {
        Leg { color: Some(c), ..self }
    }

    /// Gluing compatibility: parities must match (super matches both) and
    /// colors must agree unless one side is uncolored.
    fn glues_to(self, other: Leg) -> bool {
        let parity = self.parity == other.parity || self.parity == Parity::Super || other.parity == Parity::Super;
        let color = self.color.is_none() || other.color.is_none() || self.color == other.color;
        parity && color
    }

    fn token(self) -> u64 {
        let color = self.color.map_or(0, |c| c as u64 + 1);
        ((self.parity as u64) << 21) | color
    }
}

/// One endpoint of an edge while a diagram is being assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    Slot(usize, usize),
    Leg(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiDiagram {
    vertices: usize,
    legs: Vec<Leg>,
    pair: Vec<usize>,
    circles: usize,
    based: bool,
}

const TAG_VERTEX: u64 = 1 << 48;
const TAG_LEG: u64 = 2 << 48;
const TAG_STRUT: u64 = 3 << 48;
const TAG_COMP: u64 = 4 << 48;
const TAG_HEAD: u64 = 5 << 48;

type Key = Vec<u64>;

struct Component {
    vertices: Vec<usize>,
    legs: Vec<usize>,
}

impl JacobiDiagram {
    pub fn empty() -> Self {
        JacobiDiagram { vertices: 0, legs: Vec::new(), pair: Vec::new(), circles: 0, based: false }
    }

    pub fn empty_based() -> Self {
        JacobiDiagram { based: true, ..Self::empty() }
    }

    /// Builds a diagram from an explicit edge list covering every slot of
    /// every vertex and every leg exactly once.
    pub fn from_edges(vertices: usize, legs: Vec<Leg>, edges: &[(End, End)], based: bool) -> Result<Self, DiagramError> {
        let total = 3 * vertices + legs.len();
        let idx = |e: End| -> Result<usize, DiagramError> {
            match e {
                End::Slot(v, s) if v < vertices && s < 3 => Ok(3 * v + s),
                End::Leg(i) if i < legs.len() => Ok(3 * vertices + i),
                other => Err(DiagramError::Malformed(format!("endpoint {other:?} out of range"))),
            }
        };
        let mut pair = vec![usize::MAX; total];
        for &(a, b) in edges {
            let (x, y) = (idx(a)?, idx(b)?);
            if x == y || pair[x] != usize::MAX || pair[y] != usize::MAX {
                return Err(DiagramError::Malformed(format!("endpoint reused in edge {a:?}-{b:?}")));
            }
            pair[x] = y;
            pair[y] = x;
        }
        if let Some(h) = pair.iter().position(|&p| p == usize::MAX) {
            return Err(DiagramError::Malformed(format!("half-edge {h} is not attached")));
        }
        Ok(JacobiDiagram { vertices, legs, pair, circles: 0, based })
    }

    pub fn strut(a: Leg, b: Leg) -> Self {
        JacobiDiagram { vertices: 0, legs: vec![a, b], pair: vec![1, 0], circles: 0, based: false }
    }

    /// The tripod: one vertex carrying three legs in cyclic order.
    pub fn fork() -> Self {
        JacobiDiagram { vertices: 1, legs: vec![Leg::EVEN; 3], pair: vec![3, 4, 5, 0, 1, 2], circles: 0, based: false }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices
    }

    pub fn n_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn circles(&self) -> usize {
        self.circles
    }

    pub fn is_based(&self) -> bool {
        self.based
    }

    /// Half the number of (internal and univalent) vertices.
    pub fn degree(&self) -> usize {
        (self.vertices + self.legs.len()) / 2
    }

    pub fn partner(&self, h: usize) -> usize {
        self.pair[h]
    }

    fn leg_half(&self, i: usize) -> usize {
        3 * self.vertices + i
    }

    fn leg_of(&self, h: usize) -> Option<usize> {
        h.checked_sub(3 * self.vertices)
    }

    pub fn has_struts(&self) -> bool {
        (0..self.legs.len()).any(|i| self.leg_of(self.pair[self.leg_half(i)]).is_some())
    }

    pub fn has_odd_or_super(&self) -> bool {
        self.legs.iter().any(|l| l.parity != Parity::Even)
    }

    pub fn map_legs(mut self, f: impl Fn(Leg) -> Leg) -> Self {
        for l in &mut self.legs {
            *l = f(*l);
        }
        self
    }

    /// Places the legs on an oriented line in their current order.
    pub fn into_based(mut self) -> Self {
        self.based = true;
        self
    }

    /// Same diagram with the cyclic order at `v` reversed.
    pub fn reversed_at(&self, v: usize) -> Self {
        let map = |h: usize| {
            if h == 3 * v + 1 {
                3 * v + 2
            } else if h == 3 * v + 2 {
                3 * v + 1
            } else {
                h
            }
        };
        let mut pair = vec![0; self.pair.len()];
        for (h, &p) in self.pair.iter().enumerate() {
            pair[map(h)] = map(p);
        }
        JacobiDiagram { pair, ..self.clone() }
    }

    fn components(&self) -> Vec<Component> {
        let v = self.vertices;
        let nodes = v + self.legs.len();
        let node = |h: usize| if h < 3 * v { h / 3 } else { h - 2 * v };
        let mut parent: Vec<usize> = (0..nodes).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (h, &p) in self.pair.iter().enumerate() {
            let (a, b) = (find(&mut parent, node(h)), find(&mut parent, node(p)));
            parent[a] = b;
        }
        let mut groups: BTreeMap<usize, Component> = BTreeMap::new();
        for x in 0..nodes {
            let r = find(&mut parent, x);
            let c = groups.entry(r).or_insert(Component { vertices: Vec::new(), legs: Vec::new() });
            if x < v {
                c.vertices.push(x);
            } else {
                c.legs.push(x - v);
            }
        }
        groups.into_values().collect()
    }

    /// Breadth-first relabeling from vertex `start` entered at slot `rot`.
    /// Gives up (returns `None`) once the code exceeds `bound`.
    fn traverse(&self, start: usize, rot: usize, leg_token: &dyn Fn(usize) -> u64, bound: Option<&Key>) -> Option<(Key, Vec<(usize, usize)>, Vec<usize>)> {
        let mut tied = bound.is_some();
        let bound = bound.map_or(&[][..], |b| b.as_slice());
        let mut label = vec![usize::MAX; self.vertices];
        let mut rot_of = vec![0; self.vertices];
        let mut order = vec![(start, rot)];
        label[start] = 0;
        rot_of[start] = rot;
        let mut code = Vec::new();
        let mut legs = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (v, r) = order[i];
            for k in 0..3 {
                let p = self.pair[3 * v + (r + k) % 3];
                let token = if let Some(l) = self.leg_of(p) {
                    legs.push(l);
                    TAG_LEG | leg_token(l)
                } else {
                    let (w, s) = (p / 3, p % 3);
                    if label[w] == usize::MAX {
                        label[w] = order.len();
                        rot_of[w] = s;
                        order.push((w, s));
                    }
                    TAG_VERTEX | (3 * label[w] + (s + 3 - rot_of[w]) % 3) as u64
                };
                if tied {
                    match token.cmp(&bound[code.len()]) {
                        std::cmp::Ordering::Greater => return None,
                        std::cmp::Ordering::Less => tied = false,
                        std::cmp::Ordering::Equal => {}
                    }
                }
                code.push(token);
            }
            i += 1;
        }
        Some((code, order, legs))
    }

    /// Isomorphism-invariant key, the diagram rewritten in canonical form,
    /// and whether the rewrite reordered odd legs by an odd permutation.
    /// `None` when an automorphism acts on odd legs by an odd permutation,
    /// so the diagram equals its own negative.
    pub fn canonical(&self) -> Option<(Key, JacobiDiagram, bool)> {
        let leg_token = |l: usize| {
            let pos = if self.based { (l as u64 + 1) << 24 } else { 0 };
            pos | self.legs[l].token()
        };
        let odd_sign = |legs: &[usize]| {
            let odd: Vec<usize> = legs.iter().copied().filter(|&l| self.legs[l].parity == Parity::Odd).collect();
            perm_sign(&odd) < 0
        };
        struct Canon {
            code: Key,
            order: Vec<(usize, usize)>,
            legs: Vec<usize>,
        }
        let mut comps = Vec::new();
        for c in self.components() {
            let mut minimal: Vec<(Key, Vec<(usize, usize)>, Vec<usize>)> = Vec::new();
            type Cand = (Key, Vec<(usize, usize)>, Vec<usize>);
            fn offer(minimal: &mut Vec<Cand>, cand: Cand) {
                match minimal.first().map(|m| cand.0.cmp(&m.0)) {
                    Some(std::cmp::Ordering::Greater) => {}
                    Some(std::cmp::Ordering::Equal) => minimal.push(cand),
                    _ => *minimal = vec![cand],
                }
            }
            if c.vertices.is_empty() {
                let (a, b) = (c.legs[0], c.legs[1]);
                for (x, y) in [(a, b), (b, a)] {
                    offer(&mut minimal, (vec![TAG_STRUT, leg_token(x), leg_token(y)], Vec::new(), vec![x, y]));
                }
            } else {
                for &v in &c.vertices {
                    for r in 0..3 {
                        let bound = minimal.first().map(|m| m.0.clone());
                        if let Some(cand) = self.traverse(v, r, &leg_token, bound.as_ref()) {
                            offer(&mut minimal, cand);
                        }
                    }
                }
            }
            if !self.based {
                let s0 = odd_sign(&minimal[0].2);
                if minimal.iter().any(|m| odd_sign(&m.2) != s0) {
                    return None;
                }
            }
            let (code, order, legs) = minimal.into_iter().next().expect("nonempty");
            comps.push(Canon { code, order, legs });
        }
        comps.sort_by(|a, b| a.code.cmp(&b.code));
        if !self.based {
            for w in comps.windows(2) {
                let odd = w[0].legs.iter().filter(|&&l| self.legs[l].parity == Parity::Odd).count();
                if w[0].code == w[1].code && odd % 2 == 1 {
                    return None;
                }
            }
        }
        let mut key = vec![TAG_HEAD | self.based as u64, self.circles as u64];
        for c in &comps {
            key.push(TAG_COMP | c.code.len() as u64);
            key.extend_from_slice(&c.code);
        }
        let mut new_vertex = vec![(0, 0); self.vertices];
        let mut next = 0;
        let mut leg_order = Vec::with_capacity(self.legs.len());
        for c in &comps {
            for &(v, r) in &c.order {
                new_vertex[v] = (next, r);
                next += 1;
            }
            leg_order.extend_from_slice(&c.legs);
        }
        if self.based {
            leg_order = (0..self.legs.len()).collect();
        }
        let neg = !self.based && odd_sign(&leg_order);
        let mut new_leg = vec![0; self.legs.len()];
        for (pos, &l) in leg_order.iter().enumerate() {
            new_leg[l] = pos;
        }
        let v = self.vertices;
        let map = |h: usize| {
            if h < 3 * v {
                let (nv, r) = new_vertex[h / 3];
                3 * nv + (h % 3 + 3 - r) % 3
            } else {
                3 * v + new_leg[h - 3 * v]
            }
        };
        let mut pair = vec![0; self.pair.len()];
        for (h, &p) in self.pair.iter().enumerate() {
            pair[map(h)] = map(p);
        }
        let legs = leg_order.iter().map(|&l| self.legs[l]).collect();
        Some((key, JacobiDiagram { vertices: v, legs, pair, circles: self.circles, based: self.based }, neg))
    }

    /// Leg permutations induced by automorphisms of a connected unbased
    /// diagram (`perm[l]` is the image of leg `l`); `None` otherwise.
    fn leg_automorphisms(&self) -> Option<Vec<Vec<usize>>> {
        if self.based || self.vertices == 0 || self.components().len() != 1 {
            return None;
        }
        let token = |l: usize| self.legs[l].token();
        let mut best: Option<Key> = None;
        let mut orders: Vec<Vec<usize>> = Vec::new();
        for v in 0..self.vertices {
            for r in 0..3 {
                if let Some((code, _, legs)) = self.traverse(v, r, &token, best.as_ref()) {
                    if best.as_ref() != Some(&code) {
                        best = Some(code);
                        orders.clear();
                    }
                    orders.push(legs);
                }
            }
        }
        let base = &orders[0];
        Some(
            orders
                .iter()
                .map(|o| {
                    let mut perm = vec![0; self.legs.len()];
                    for (i, &l) in base.iter().enumerate() {
                        perm[l] = o[i];
                    }
                    perm
                })
                .collect(),
        )
    }

    /// Every way of replacing each super leg by an even or an odd one.
    pub fn expand_super(&self) -> Vec<JacobiDiagram> {
        let supers: Vec<usize> = (0..self.legs.len()).filter(|&i| self.legs[i].parity == Parity::Super).collect();
        (0..1usize << supers.len())
            .map(|mask| {
                let mut d = self.clone();
                for (bit, &i) in supers.iter().enumerate() {
                    d.legs[i].parity = if mask >> bit & 1 == 1 { Parity::Odd } else { Parity::Even };
                }
                d
            })
            .collect()
    }

    /// Parses the diagram file format:
    ///
    /// ```text
    /// base_order = ["l1", "l2"]   # optional; makes the diagram based
    /// edges = [["l3", "l4"]]      # optional leg-to-leg struts
    /// [[vertices]]
    /// id = "a"
    /// neighbors = ["l1", "b.3", "b.2"]   # cyclic; "b.3" names slot 3 of b
    /// [[legs]]
    /// id = "l1"
    /// color = "x"        # optional
    /// label = "even"     # optional: even | odd | super
    /// ```
    ///
    /// Top-level keys must precede the tables; unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self, DiagramError> {
        let bad = |m: String| DiagramError::Malformed(m);
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| bad(e.to_string()))?;
        let list = |key: &str| -> Result<Vec<toml::Table>, DiagramError> {
            match table.get(key) {
                None => Ok(Vec::new()),
                Some(toml::Value::Array(a)) => a
                    .iter()
                    .map(|x| x.as_table().cloned().ok_or_else(|| bad(format!("`{key}` entries must be tables"))))
                    .collect(),
                Some(_) => Err(bad(format!("`{key}` must be an array of tables"))),
            }
        };
        let id_of = |t: &toml::Table, what: &str| -> Result<String, DiagramError> {
            t.get("id").and_then(|v| v.as_str()).map(str::to_owned).ok_or_else(|| bad(format!("{what} without a string `id`")))
        };
        let known = |t: &toml::Table, keys: &[&str], what: &str| -> Result<(), DiagramError> {
            match t.keys().find(|k| !keys.contains(&k.as_str())) {
                Some(k) => Err(bad(format!("unknown key `{k}` in {what}"))),
                None => Ok(()),
            }
        };
        known(&table, &["vertices", "legs", "edges", "base_order", "based"], "the diagram")?;
        let vtables = list("vertices")?;
        let ltables = list("legs")?;
        for t in &vtables {
            known(t, &["id", "neighbors"], "a vertex")?;
        }
        for t in &ltables {
            known(t, &["id", "color", "label"], "a leg")?;
        }
        let mut vid = BTreeMap::new();
        for (i, t) in vtables.iter().enumerate() {
            if vid.insert(id_of(t, "vertex")?, i).is_some() {
                return Err(bad("duplicate vertex id".into()));
            }
        }
        let mut lid = BTreeMap::new();
        let mut legs = Vec::new();
        for (i, t) in ltables.iter().enumerate() {
            let id = id_of(t, "leg")?;
            if vid.contains_key(&id) || lid.insert(id.clone(), i).is_some() {
                return Err(bad(format!("duplicate id `{id}`")));
            }
            let color = match t.get("color") {
                None => None,
                Some(v) => {
                    let s = v.as_str().ok_or_else(|| bad("`color` must be a string".into()))?;
                    let mut cs = s.chars();
                    match (cs.next(), cs.next()) {
                        (Some(c), None) => Some(c),
                        _ => return Err(bad(format!("color `{s}` must be a single character"))),
                    }
                }
            };
            let parity = match t.get("label") {
                None => Parity::Even,
                Some(v) => v.as_str().and_then(Parity::parse).ok_or_else(|| bad(format!("leg `{id}`: label must be even, odd or super")))?,
            };
            legs.push(Leg { color, parity });
        }

        enum Target {
            Leg(usize),
            Vertex(usize, Option<usize>),
        }
        let mut targets: Vec<[Target; 3]> = Vec::new();
        for t in &vtables {
            let id = id_of(t, "vertex")?;
            let ns = t
                .get("neighbors")
                .and_then(|v| v.as_array())
                .filter(|a| a.len() == 3)
                .ok_or_else(|| bad(format!("vertex `{id}` needs exactly three neighbors")))?;
            let mut out = Vec::new();
            for n in ns {
                let s = n.as_str().ok_or_else(|| bad("neighbors must be strings".into()))?;
                let (name, slot) = match s.rsplit_once('.') {
                    Some((a, b)) if vid.contains_key(a) => {
                        let k: usize = b.parse().map_err(|_| bad(format!("bad slot in `{s}`")))?;
                        if !(1..=3).contains(&k) {
                            return Err(bad(format!("slot in `{s}` must be 1, 2 or 3")));
                        }
                        (a, Some(k - 1))
                    }
                    _ => (s, None),
                };
                if let Some(&w) = vid.get(name) {
                    out.push(Target::Vertex(w, slot));
                } else if let Some(&l) = lid.get(name) {
                    out.push(Target::Leg(l));
                } else {
                    return Err(bad(format!("unknown neighbor `{s}` of `{id}`")));
                }
            }
            let mut it = out.into_iter();
            targets.push([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]);
        }

        let nv = vtables.len();
        let mut used = vec![false; 3 * nv];
        let mut edges = Vec::new();
        let points_back = |w: usize, k: usize, v: usize, s: usize| match targets[w][k] {
            Target::Vertex(x, None) => x == v,
            Target::Vertex(x, Some(t)) => x == v && t == s,
            Target::Leg(_) => false,
        };
        for pass in 0..2 {
            for v in 0..nv {
                for s in 0..3 {
                    if used[3 * v + s] {
                        continue;
                    }
                    match targets[v][s] {
                        Target::Leg(l) if pass == 0 => {
                            used[3 * v + s] = true;
                            edges.push((End::Slot(v, s), End::Leg(l)));
                        }
                        Target::Vertex(w, Some(k)) if pass == 0 => {
                            if used[3 * w + k] || (w, k) == (v, s) || !points_back(w, k, v, s) {
                                return Err(bad(format!("slot {} of vertex {} does not point back", k + 1, w + 1)));
                            }
                            used[3 * v + s] = true;
                            used[3 * w + k] = true;
                            edges.push((End::Slot(v, s), End::Slot(w, k)));
                        }
                        Target::Vertex(w, None) if pass == 1 => {
                            let k = (0..3)
                                .find(|&k| !used[3 * w + k] && (w, k) != (v, s) && points_back(w, k, v, s))
                                .ok_or_else(|| bad(format!("vertex {} has no free slot pointing back at vertex {}", w + 1, v + 1)))?;
                            used[3 * v + s] = true;
                            used[3 * w + k] = true;
                            edges.push((End::Slot(v, s), End::Slot(w, k)));
                        }
                        _ => {}
                    }
                }
            }
        }
        if let Some(toml::Value::Array(es)) = table.get("edges") {
            for e in es {
                let pair = e
                    .as_array()
                    .filter(|a| a.len() == 2)
                    .ok_or_else(|| bad("`edges` entries are [leg, leg] pairs".into()))?;
                let mut ends = [0; 2];
                for (k, x) in pair.iter().enumerate() {
                    let s = x.as_str().unwrap_or_default();
                    ends[k] = *lid.get(s).ok_or_else(|| bad(format!("strut endpoint `{s}` is not a leg")))?;
                }
                edges.push((End::Leg(ends[0]), End::Leg(ends[1])));
            }
        }
        let mut d = Self::from_edges(nv, legs, &edges, false)?;
        if let Some(order) = table.get("base_order") {
            let order = order.as_array().ok_or_else(|| bad("`base_order` must be a list".into()))?;
            let mut perm = Vec::new();
            for x in order {
                let s = x.as_str().unwrap_or_default();
                perm.push(*lid.get(s).ok_or_else(|| bad(format!("`base_order` entry `{s}` is not a leg")))?);
            }
            let mut sorted = perm.clone();
            sorted.sort();
            if sorted != (0..d.legs.len()).collect::<Vec<_>>() {
                return Err(bad("`base_order` must list every leg once".into()));
            }
            d = d.with_leg_order(&perm).into_based();
        } else if table.get("based").and_then(|v| v.as_bool()) == Some(true) {
            d.based = true;
        }
        if (d.vertices + d.legs.len()) % 2 == 1 {
            return Err(bad("total vertex count must be even".into()));
        }
        Ok(d)
    }

    pub fn from_file(path: &Path) -> Result<Self, DiagramError> {
        let text = std::fs::read_to_string(path).map_err(|e| DiagramError::Malformed(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Reorders legs so that new leg `t` is old leg `perm[t]`.
    fn with_leg_order(&self, perm: &[usize]) -> Self {
        let v = self.vertices;
        let mut new_leg = vec![0; perm.len()];
        for (t, &l) in perm.iter().enumerate() {
            new_leg[l] = t;
        }
        let map = |h: usize| if h < 3 * v { h } else { 3 * v + new_leg[h - 3 * v] };
        let mut pair = vec![0; self.pair.len()];
        for (h, &p) in self.pair.iter().enumerate() {
            pair[map(h)] = map(p);
        }
        JacobiDiagram { pair, legs: perm.iter().map(|&l| self.legs[l]).collect(), ..self.clone() }
    }

    /// Removes the vertex carrying leg `leg` together with that leg and puts
    /// two new legs in its place along the leg order. With the vertex read
    /// as `(leg, p, q)` cyclically, the first new leg takes over the `p`
    /// half-edge and the second the `q` half-edge; `swap` exchanges them.
    fn excise(&self, leg: usize, first: Leg, second: Leg, swap: bool) -> Option<Self> {
        let w = self.pair[self.leg_half(leg)];
        if w >= 3 * self.vertices {
            return None;
        }
        let (vx, s) = (w / 3, w % 3);
        let (hp, hq) = (3 * vx + (s + 1) % 3, 3 * vx + (s + 2) % 3);
        let nv = self.vertices - 1;
        let mut legs = Vec::with_capacity(self.legs.len() + 1);
        let mut new_leg = vec![usize::MAX; self.legs.len()];
        let mut slot_p = 0;
        for (i, &l) in self.legs.iter().enumerate() {
            if i == leg {
                slot_p = legs.len();
                legs.push(if swap { second } else { first });
                legs.push(if swap { first } else { second });
            } else {
                new_leg[i] = legs.len();
                legs.push(l);
            }
        }
        let (lp, lq) = if swap { (slot_p + 1, slot_p) } else { (slot_p, slot_p + 1) };
        let map = |h: usize| -> Option<usize> {
            if h < 3 * self.vertices {
                let u = h / 3;
                if u == vx {
                    if h == hp {
                        Some(3 * nv + lp)
                    } else if h == hq {
                        Some(3 * nv + lq)
                    } else {
                        None
                    }
                } else {
                    let u2 = if u > vx { u - 1 } else { u };
                    Some(3 * u2 + h % 3)
                }
            } else {
                let i = h - 3 * self.vertices;
                (i != leg).then(|| 3 * nv + new_leg[i])
            }
        };
        let mut pair = vec![usize::MAX; 3 * nv + legs.len()];
        for (h, &p) in self.pair.iter().enumerate() {
            if let (Some(a), Some(b)) = (map(h), map(p)) {
                pair[a] = b;
            }
        }
        Some(JacobiDiagram { vertices: nv, legs, pair, circles: self.circles, based: self.based })
    }

    /// Whether the connected diagram is a wheel: a single cycle of vertices,
    /// each carrying one leg.
    fn is_wheel_component(&self, c: &Component) -> bool {
        !c.vertices.is_empty()
            && c.legs.len() == c.vertices.len()
            && c.vertices.iter().all(|&v| (0..3).filter(|&s| self.leg_of(self.pair[3 * v + s]).is_some()).count() == 1)
    }
}

impl fmt::Display for JacobiDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |h: usize| match self.leg_of(h) {
            Some(l) => format!("l{}", l + 1),
            None => format!("v{}.{}", h / 3 + 1, h % 3 + 1),
        };
        if self.based {
            f.write_str("based ")?;
        }
        f.write_str("{")?;
        let mut first = true;
        for v in 0..self.vertices {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "v{}({} {} {})", v + 1, name(self.pair[3 * v]), name(self.pair[3 * v + 1]), name(self.pair[3 * v + 2]))?;
        }
        for (i, l) in self.legs.iter().enumerate() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "l{}[{}", i + 1, l.parity.name())?;
            if let Some(c) = l.color {
                write!(f, ",{c}")?;
            }
            write!(f, "]-{}", name(self.pair[self.leg_half(i)]))?;
        }
        if self.circles > 0 {
            write!(f, " circles={}", self.circles)?;
        }
        f.write_str("}")
    }
}

/// Formal rational combination of canonicalized diagrams.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagramCombo {
    terms: BTreeMap<Key, (JacobiDiagram, Q)>,
}

impl DiagramCombo {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_diagram(JacobiDiagram::empty())
    }

    pub fn one_based() -> Self {
        Self::from_diagram(JacobiDiagram::empty_based())
    }

    pub fn from_diagram(d: JacobiDiagram) -> Self {
        let mut c = Self::zero();
        c.add_diagram(d, &Q::one());
        c
    }

    pub fn add_diagram(&mut self, d: JacobiDiagram, c: &Q) {
        if c.is_zero() {
            return;
        }
        let Some((key, canon, neg)) = d.canonical() else {
            return;
        };
        let signed = if neg { -c.clone() } else { c.clone() };
        let entry = self.terms.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert((canon, signed));
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().1 += signed;
                if e.get().1.is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &DiagramCombo, c: &Q) {
        for (d, x) in other.iter() {
            self.add_diagram(d.clone(), &(x * c));
        }
    }

    pub fn scaled(&self, c: &Q) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn sub(&self, other: &DiagramCombo) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &q(-1));
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (&JacobiDiagram, &Q)> {
        self.terms.values().map(|(d, c)| (d, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of (the canonical form of) `d`.
    pub fn coeff(&self, d: &JacobiDiagram) -> Q {
        match d.canonical() {
            None => Q::zero(),
            Some((key, _, neg)) => {
                let c = self.terms.get(&key).map_or(Q::zero(), |t| t.1.clone());
                if neg {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn coefficient_sum(&self) -> Q {
        self.iter().map(|(_, c)| c.clone()).sum()
    }

    pub fn max_legs(&self) -> usize {
        self.iter().map(|(d, _)| d.n_legs()).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.iter().map(|(d, _)| d.degree()).max().unwrap_or(0)
    }

    pub fn truncated(&self, max_degree: usize) -> Self {
        DiagramCombo { terms: self.terms.iter().filter(|(_, (d, _))| d.degree() <= max_degree).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    /// Linear extension of a diagram-level map.
    pub fn map_linear<E>(&self, f: impl Fn(&JacobiDiagram) -> Result<DiagramCombo, E>) -> Result<DiagramCombo, E> {
        let mut out = Self::zero();
        for (d, c) in self.iter() {
            out.add_scaled(&f(d)?, c);
        }
        Ok(out)
    }

    /// Bilinear disjoint union (legs of `other` after those of `self`).
    pub fn union(&self, other: &DiagramCombo) -> Self {
        let mut out = Self::zero();
        for (a, x) in self.iter() {
            for (b, y) in other.iter() {
                out.add_diagram(juxtapose(a, b, a.based || b.based), &(x * y));
            }
        }
        out
    }

    /// Bilinear based product: the lines of `self` and `other` joined.
    pub fn connect(&self, other: &DiagramCombo) -> Self {
        let mut out = Self::zero();
        for (a, x) in self.iter() {
            for (b, y) in other.iter() {
                out.add_diagram(juxtapose(a, b, true), &(x * y));
            }
        }
        out
    }

    fn any_based(&self) -> Option<bool> {
        let mut it = self.iter().map(|(d, _)| d.based);
        let first = it.next()?;
        Some(first)
    }
}

impl fmt::Display for DiagramCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (d, c)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({}) {d}", crate::rational::fmt_q(c))?;
        }
        Ok(())
    }
}

fn juxtapose(a: &JacobiDiagram, b: &JacobiDiagram, based: bool) -> JacobiDiagram {
    let (va, vb) = (a.vertices, b.vertices);
    let (la, lb) = (a.legs.len(), b.legs.len());
    let v = va + vb;
    let map_a = |h: usize| if h < 3 * va { h } else { 3 * v + (h - 3 * va) };
    let map_b = |h: usize| if h < 3 * vb { 3 * va + h } else { 3 * v + la + (h - 3 * vb) };
    let mut pair = vec![0; 3 * v + la + lb];
    for (h, &p) in a.pair.iter().enumerate() {
        pair[map_a(h)] = map_a(p);
    }
    for (h, &p) in b.pair.iter().enumerate() {
        pair[map_b(h)] = map_b(p);
    }
    let mut legs = a.legs.clone();
    legs.extend_from_slice(&b.legs);
    JacobiDiagram { vertices: v, legs, pair, circles: a.circles + b.circles, based }
}

/// The wheel with `spokes` legs; vertex `j` reads `(leg, next, previous)`.
pub fn make_wheel(spokes: usize) -> Result<JacobiDiagram, DiagramError> {
    if spokes < 2 || spokes % 2 == 1 {
        return Err(DiagramError::OddWheel { spokes });
    }
    Ok(wheel_unchecked(spokes))
}

fn wheel_unchecked(k: usize) -> JacobiDiagram {
    let mut edges = Vec::new();
    for j in 0..k {
        edges.push((End::Slot(j, 0), End::Leg(j)));
        edges.push((End::Slot(j, 1), End::Slot((j + 1) % k, 2)));
    }
    JacobiDiagram::from_edges(k, vec![Leg::EVEN; k], &edges, false).expect("wheel is well formed")
}

/// A wheel with one spoke removed: `m` even legs on a path whose two
/// loose ends are odd legs `a` (listed first) and `b`. It evaluates to
/// `(ad_v^m)_{ab} θ^a θ^b`.
pub fn split_chain(m: usize) -> JacobiDiagram {
    if m == 0 {
        return JacobiDiagram::strut(Leg::ODD, Leg::ODD);
    }
    let mut legs = vec![Leg::EVEN; m];
    legs.push(Leg::ODD);
    legs.push(Leg::ODD);
    let mut edges = Vec::new();
    for j in 0..m {
        edges.push((End::Slot(j, 0), End::Leg(j)));
        if j + 1 < m {
            edges.push((End::Slot(j, 1), End::Slot(j + 1, 2)));
        }
    }
    edges.push((End::Slot(0, 2), End::Leg(m)));
    edges.push((End::Slot(m - 1, 1), End::Leg(m + 1)));
    JacobiDiagram::from_edges(m, legs, &edges, false).expect("chain is well formed")
}

pub fn disjoint_union(a: &JacobiDiagram, b: &JacobiDiagram) -> DiagramCombo {
    DiagramCombo::from_diagram(juxtapose(a, b, a.based || b.based))
}

pub fn connect_sum_based(a: &JacobiDiagram, b: &JacobiDiagram) -> DiagramCombo {
    DiagramCombo::from_diagram(juxtapose(a, b, true))
}

/// Glues leg `c_leg` of `c` to leg `d_leg` of `d` for every listed pair.
/// Unglued legs keep their order, those of `c` first. The returned flag is
/// the sign of contracting the odd legs of `d`: the odd legs of `c` act
/// last-listed first, each picking up `(-1)^position` among the remaining
/// odd legs of `d`.
fn glue(c: &JacobiDiagram, d: &JacobiDiagram, pairs: &[(usize, usize)]) -> (JacobiDiagram, bool) {
    let (vc, vd) = (c.vertices, d.vertices);
    let hc = c.pair.len();
    let total = hc + d.pair.len();
    let comb_pair = |h: usize| if h < hc { c.pair[h] } else { hc + d.pair[h - hc] };
    let mut glued = vec![usize::MAX; total];
    for &(x, y) in pairs {
        let (a, b) = (c.leg_half(x), hc + d.leg_half(y));
        glued[a] = b;
        glued[b] = a;
    }
    let mut c_glued = vec![false; c.legs.len()];
    let mut d_glued = vec![false; d.legs.len()];
    for &(x, y) in pairs {
        c_glued[x] = true;
        d_glued[y] = true;
    }
    let v = vc + vd;
    let mut legs = Vec::new();
    let mut new_leg_c = vec![usize::MAX; c.legs.len()];
    let mut new_leg_d = vec![usize::MAX; d.legs.len()];
    for (i, &l) in c.legs.iter().enumerate() {
        if !c_glued[i] {
            new_leg_c[i] = legs.len();
            legs.push(l);
        }
    }
    for (i, &l) in d.legs.iter().enumerate() {
        if !d_glued[i] {
            new_leg_d[i] = legs.len();
            legs.push(l);
        }
    }
    let map = |h: usize| -> usize {
        if h < hc {
            if h < 3 * vc {
                h
            } else {
                3 * v + new_leg_c[h - 3 * vc]
            }
        } else {
            let h = h - hc;
            if h < 3 * vd {
                3 * vc + h
            } else {
                3 * v + new_leg_d[h - 3 * vd]
            }
        }
    };
    let mut pair = vec![0; 3 * v + legs.len()];
    let mut visited = vec![false; total];
    for h in 0..total {
        if glued[h] != usize::MAX {
            continue;
        }
        let mut p = comb_pair(h);
        while glued[p] != usize::MAX {
            visited[p] = true;
            visited[glued[p]] = true;
            p = comb_pair(glued[p]);
        }
        pair[map(h)] = map(p);
    }
    let mut circles = c.circles + d.circles;
    for r in 0..total {
        if glued[r] == usize::MAX || visited[r] {
            continue;
        }
        let mut x = r;
        loop {
            visited[x] = true;
            visited[glued[x]] = true;
            x = comb_pair(glued[x]);
            if x == r {
                break;
            }
        }
        circles += 1;
    }

    let mut odd_d: Vec<usize> = (0..d.legs.len()).filter(|&i| d.legs[i].parity == Parity::Odd).collect();
    let mut order: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(x, _)| c.legs[x].parity == Parity::Odd).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0));
    let mut neg = false;
    for (_, y) in order {
        if let Some(pos) = odd_d.iter().position(|&i| i == y) {
            neg ^= pos % 2 == 1;
            odd_d.remove(pos);
        }
    }
    (JacobiDiagram { vertices: v, legs, pair, circles, based: d.based }, neg)
}

/// All injective, gluing-compatible assignments of the legs of `c` to legs
/// of `d`; with `bijective` every leg of `d` must be used.
fn gluings(c: &JacobiDiagram, d: &JacobiDiagram, bijective: bool) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    if c.legs.len() > d.legs.len() || (bijective && c.legs.len() != d.legs.len()) {
        return out;
    }
    fn rec(c: &JacobiDiagram, d: &JacobiDiagram, i: usize, used: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if i == c.legs.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..d.legs.len() {
            if !used[j] && c.legs[i].glues_to(d.legs[j]) {
                used[j] = true;
                cur.push((i, j));
                rec(c, d, i + 1, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(c, d, 0, &mut vec![false; d.legs.len()], &mut Vec::new(), &mut out);
    out
}

fn glue_combos(c: &DiagramCombo, d: &DiagramCombo, bijective: bool) -> Result<DiagramCombo, DiagramError> {
    glue_combos_with(c, d, bijective, true)
}

/// With `reduce`, gluings of a connected even-legged `C` are taken one per
/// orbit of its automorphism group and weighted by the group order.
fn glue_combos_with(c: &DiagramCombo, d: &DiagramCombo, bijective: bool, reduce: bool) -> Result<DiagramCombo, DiagramError> {
    let mut out = DiagramCombo::zero();
    for (cd, cc) in c.iter() {
        if cd.has_struts() {
            return Err(DiagramError::StrutInLeftArgument);
        }
        if cd.n_legs() == 0 && !bijective {
            out.add_scaled(&DiagramCombo::from_diagram(juxtapose(cd, &JacobiDiagram::empty(), false)).union(d), cc);
            continue;
        }
        let c_odd = cd.legs.iter().any(|l| l.parity != Parity::Even);
        let auts = if reduce && !c_odd { cd.leg_automorphisms().filter(|a| a.len() > 1) } else { None };
        let weight = q(auts.as_ref().map_or(1, |a| a.len() as i64));
        for ce in cd.expand_super() {
            let has_odd = ce.legs.iter().any(|l| l.parity == Parity::Odd);
            for (dd, dc) in d.iter() {
                let targets = if has_odd || (bijective && c_odd) { dd.expand_super() } else { vec![dd.clone()] };
                for de in targets {
                    for g in gluings(&ce, &de, bijective) {
                        if let Some(auts) = &auts {
                            let image: Vec<usize> = g.iter().map(|p| p.1).collect();
                            let moved = |perm: &Vec<usize>| perm.iter().map(|&i| image[i]).collect::<Vec<_>>();
                            if auts.iter().any(|perm| moved(perm) < image) {
                                continue;
                            }
                        }
                        let (res, neg) = glue(&ce, &de, &g);
                        let coeff = cc * dc * &weight;
                        out.add_diagram(res, &if neg { -coeff } else { coeff });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `⟨C, D⟩`: the sum over all ways of gluing all legs of `C` to all legs
/// of `D`.
pub fn inner_product(c: &DiagramCombo, d: &DiagramCombo) -> Result<DiagramCombo, DiagramError> {
    glue_combos(c, d, true)
}

/// `∂_C(D)`: the sum over all ways of gluing all legs of `C` to some legs
/// of `D`.
pub fn apply_partial(c: &DiagramCombo, d: &DiagramCombo) -> Result<DiagramCombo, DiagramError> {
    glue_combos(c, d, false)
}

/// `Δ_xy`: every coloring of the colorable legs by `x` and `y`. Odd legs
/// stand for contractions rather than `x`-variables and keep their color.
pub fn delta_coloring(c: &DiagramCombo, x: char, y: char) -> DiagramCombo {
    c.map_linear(|d| -> Result<_, DiagramError> {
        let idx: Vec<usize> = (0..d.legs.len()).filter(|&i| d.legs[i].parity != Parity::Odd).collect();
        let mut out = DiagramCombo::zero();
        for mask in 0..1usize << idx.len() {
            let mut e = d.clone();
            for (bit, &i) in idx.iter().enumerate() {
                e.legs[i].color = Some(if mask >> bit & 1 == 1 { y } else { x });
            }
            out.add_diagram(e, &Q::one());
        }
        Ok(out)
    })
    .expect("infallible")
}

/// `(C)_x`: every colorable leg painted `x`.
pub fn recolor_all(c: &DiagramCombo, x: char) -> DiagramCombo {
    c.map_linear(|d| -> Result<_, DiagramError> { Ok(DiagramCombo::from_diagram(d.clone().map_legs(|l| if l.parity == Parity::Odd { l } else { l.colored(x) }))) })
        .expect("infallible")
}

/// `exp(x)` under disjoint union, keeping degrees `≤ max_degree`.
pub fn exp_truncated(x: &DiagramCombo, max_degree: usize) -> DiagramCombo {
    let mut out = DiagramCombo::one();
    let mut term = DiagramCombo::one();
    for m in 1.. {
        term = term.union(x).truncated(max_degree).scaled(&qf(1, m));
        if term.is_zero() {
            break;
        }
        out.add_scaled(&term, &Q::one());
    }
    out
}

/// `∂_{exp X}(D) = Σ_m ∂_X^m(D) / m!`, one gluing of `X` at a time; each
/// step uses up legs of `D`, so the sum is finite.
pub fn apply_exp_partial(x: &DiagramCombo, d: &DiagramCombo) -> Result<DiagramCombo, DiagramError> {
    let mut out = d.clone();
    let mut term = d.clone();
    for m in 1.. {
        term = apply_partial(x, &term)?.scaled(&qf(1, m));
        if term.is_zero() {
            break;
        }
        out.add_scaled(&term, &Q::one());
    }
    Ok(out)
}

fn omega_log(max_legs: usize) -> DiagramCombo {
    let mut x = DiagramCombo::zero();
    for k in 1..=max_legs / 2 {
        x.add_diagram(wheel_unchecked(2 * k), &duflo::b2k(k));
    }
    x
}

fn psi_log(max_legs: usize) -> DiagramCombo {
    let mut x = DiagramCombo::zero();
    for k in 1..=max_legs / 2 {
        x.add_diagram(split_chain(2 * k - 1), &(duflo::t_coeff(k) * qf(1, 2)));
    }
    x
}

/// `∂_Ω(D)`, computed as `exp(∂_{log Ω})`.
pub fn apply_omega(d: &DiagramCombo) -> Result<DiagramCombo, DiagramError> {
    apply_exp_partial(&omega_log(d.max_legs()), d)
}

/// `∂_Ψ(D)`, computed as `exp(∂_{log Ψ})`.
pub fn apply_psi(d: &DiagramCombo) -> Result<DiagramCombo, DiagramError> {
    apply_exp_partial(&psi_log(d.max_legs()), d)
}

/// `Ω = exp(Σ b_{2k} w_{2k})` through degree `max_degree`.
pub fn omega(max_degree: usize) -> DiagramCombo {
    exp_truncated(&omega_log(max_degree), max_degree)
}

/// `Ψ = exp(Σ ½ t_k · chain_{2k-1})`, the diagram of `exp(½ T_ab ι_a ι_b)`,
/// through degree `max_degree`.
pub fn psi(max_degree: usize) -> DiagramCombo {
    exp_truncated(&psi_log(max_degree), max_degree)
}

/// `∂_Γ`: every ordering of the legs along a line, weighted `1/k!` and
/// signed by the induced permutation of odd legs.
pub fn gamma_apply(d: &DiagramCombo) -> Result<DiagramCombo, DiagramError> {
    d.map_linear(|dd| {
        if dd.based {
            return Err(DiagramError::InconsistentLabels("∂_Γ takes unbased diagrams".into()));
        }
        let mut out = DiagramCombo::zero();
        for e in dd.expand_super() {
            let k = e.legs.len();
            let w = Q::one() / factorial(k);
            let mut perm: Vec<usize> = (0..k).collect();
            loop {
                let odd: Vec<usize> = perm.iter().copied().filter(|&l| e.legs[l].parity == Parity::Odd).collect();
                let c = if perm_sign(&odd) < 0 { -w.clone() } else { w.clone() };
                out.add_diagram(e.with_leg_order(&perm).into_based(), &c);
                if !next_permutation(&mut perm) {
                    break;
                }
            }
        }
        Ok(out)
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The splitting derivative `P`: each connected component must be a wheel
/// and is split at one of its legs (summed over legs); any other component
/// kills the diagram. The split removes the spoke's vertex; its two rim
/// half-edges become uncolored odd legs, listed where the spoke was.
pub fn split_p(c: &DiagramCombo) -> DiagramCombo {
    split_p_filtered(c, None)
}

/// `P` restricted to splitting legs of color `color`.
pub fn split_p_colored(c: &DiagramCombo, color: Option<char>) -> DiagramCombo {
    split_p_filtered(c, Some(color))
}

fn split_p_filtered(c: &DiagramCombo, only: Option<Option<char>>) -> DiagramCombo {
    let mut out = DiagramCombo::zero();
    for (d, coeff) in c.iter() {
        let comps = d.components();
        if d.circles > 0 || !comps.iter().all(|k| d.is_wheel_component(k)) {
            continue;
        }
        let choices: Vec<Vec<usize>> = comps
            .iter()
            .map(|k| k.legs.iter().copied().filter(|&l| d.legs[l].parity != Parity::Odd && only.is_none_or(|c| d.legs[l].color == c)).collect())
            .collect();
        let mut pick = vec![0; choices.len()];
        if choices.iter().any(|ch| ch.is_empty()) {
            continue;
        }
        loop {
            let mut legs: Vec<usize> = pick.iter().zip(&choices).map(|(&i, ch)| ch[i]).collect();
            // excise from the back so earlier leg indices stay valid
            legs.sort_by(|a, b| b.cmp(a));
            let mut e = d.clone();
            for l in legs {
                e = e.excise(l, Leg::ODD, Leg::ODD, false).expect("wheel legs sit on vertices");
            }
            out.add_diagram(e, coeff);
            let mut k = 0;
            while k < pick.len() {
                pick[k] += 1;
                if pick[k] < choices[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
            if k == pick.len() {
                break;
            }
        }
    }
    out
}

/// Which algebra the weight system lands in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Picture {
    /// Even legs only: `S(g)` for unbased, `U(g)` for based diagrams.
    Classical,
    /// Even legs to `v`/`u`, odd legs to `θ`/`ξ`: `W` or `W̃`.
    Weil,
}

impl Picture {
    pub fn of(c: &DiagramCombo) -> Picture {
        if c.iter().any(|(d, _)| d.has_odd_or_super()) {
            Picture::Weil
        } else {
            Picture::Classical
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evaluation {
    Poly(SuperPolynomial),
    Nc(ncweil::NormalOrderedElement),
}

impl Evaluation {
    pub fn terms(&self) -> &Terms {
        match self {
            Evaluation::Poly(p) => p.terms(),
            Evaluation::Nc(x) => x.terms(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms().is_zero()
    }
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evaluation::Poly(p) => write!(f, "{p}"),
            Evaluation::Nc(x) => write!(f, "{x}"),
        }
    }
}

/// Forks become `f_abc`, edges the identity metric, legs generators.
pub struct WeightSystem {
    g: QuadraticLieAlgebra,
    picture: Picture,
    based_alg: NcAlgebra,
}

impl WeightSystem {
    pub fn new(g: &QuadraticLieAlgebra, picture: Picture) -> Result<Self, DiagramError> {
        if !g.is_orthonormal() {
            return Err(DiagramError::NonOrthonormal);
        }
        let kind = match picture {
            Picture::Classical => NcKind::Ug,
            Picture::Weil => NcKind::NW,
        };
        Ok(WeightSystem { g: g.clone(), picture, based_alg: NcAlgebra::new(kind, g)? })
    }

    pub fn picture(&self) -> Picture {
        self.picture
    }

    pub fn poly_kind(&self) -> PolyKind {
        match self.picture {
            Picture::Classical => PolyKind::Sym,
            Picture::Weil => PolyKind::W,
        }
    }

    pub fn nc(&self) -> &NcAlgebra {
        &self.based_alg
    }

    fn free(&self) -> FreeSuper {
        let n = self.g.dim();
        FreeSuper { n_even: n, n_odd: if self.picture == Picture::Weil { n } else { 0 } }
    }

    /// Product in the target algebra of the given basing.
    pub fn multiply(&self, based: bool, a: &Terms, b: &Terms) -> Terms {
        if based {
            self.based_alg.mul(a, b)
        } else {
            self.free().mul(a, b)
        }
    }

    pub fn eval(&self, c: &DiagramCombo) -> Result<Evaluation, DiagramError> {
        let based = c.any_based().unwrap_or(false);
        let mut words = BTreeMap::new();
        for (d, x) in c.iter() {
            if d.based != based {
                return Err(DiagramError::InconsistentLabels("mixed based and unbased diagrams".into()));
            }
            self.collect_words(d, x, &mut words)?;
        }
        let out = self.words_to_terms(based, words);
        let n = self.g.dim();
        Ok(if based { Evaluation::Nc(self.based_alg.element(out)) } else { Evaluation::Poly(SuperPolynomial::new(self.poly_kind(), n, out)) })
    }

    #[cfg(test)]
    fn eval_diagram(&self, d: &JacobiDiagram) -> Result<Terms, DiagramError> {
        let mut words = BTreeMap::new();
        self.collect_words(d, &Q::one(), &mut words)?;
        Ok(self.words_to_terms(d.based, words))
    }

    /// Adds `scale` times the tensor of `d` as words in the leg order.
    fn collect_words(&self, d: &JacobiDiagram, scale: &Q, words: &mut BTreeMap<Vec<Letter>, Q>) -> Result<(), DiagramError> {
        if self.picture == Picture::Classical && d.has_odd_or_super() {
            return Err(DiagramError::InconsistentLabels(format!("odd or super legs in a classical evaluation: {d}")));
        }
        let n = self.g.dim();
        for e in d.expand_super() {
            for (idx, c) in self.leg_tensor(&e) {
                let letters: Vec<Letter> =
                    idx.iter().zip(&e.legs).map(|(&a, l)| if l.parity == Parity::Odd { (n + a) as Letter } else { a as Letter }).collect();
                *words.entry(letters).or_insert_with(Q::zero) += c * scale;
            }
        }
        Ok(())
    }

    /// Multiplies out words: in the enveloping algebra for based diagrams
    /// (sharing normal-ordered prefixes), graded-commutatively otherwise.
    fn words_to_terms(&self, based: bool, words: BTreeMap<Vec<Letter>, Q>) -> Terms {
        let n = self.g.dim();
        let mut out = Terms::zero();
        // words arrive sorted, so every needed prefix sits on the stack
        let mut stack: Vec<(Vec<Letter>, Terms)> = vec![(Vec::new(), Terms::one())];
        for (w, c) in words {
            if c.is_zero() {
                continue;
            }
            if based {
                while !w.starts_with(&stack.last().expect("root stays").0) {
                    stack.pop();
                }
                while stack.last().expect("root stays").0.len() < w.len() {
                    let (p, t) = stack.last().expect("root stays");
                    let mut p2 = p.clone();
                    let x = w[p.len()];
                    p2.push(x);
                    let t2 = self.based_alg.mul(t, &Terms::letter(x));
                    stack.push((p2, t2));
                }
                out.add_scaled(&stack.last().expect("root stays").1, &c);
            } else {
                let odd: Vec<Letter> = w.iter().copied().filter(|&l| l as usize >= n).collect();
                let mut sorted_odd = odd.clone();
                sorted_odd.sort();
                if sorted_odd.windows(2).any(|p| p[0] == p[1]) {
                    continue;
                }
                let mut m = w;
                m.sort();
                let s = if perm_sign(&odd) < 0 { -c } else { c };
                out.add_term(Monomial(m), s);
            }
        }
        out
    }

    /// The tensor of a diagram with definite leg parities, as (index per
    /// leg in leg order, coefficient) entries.
    fn leg_tensor(&self, d: &JacobiDiagram) -> Vec<(Vec<usize>, Q)> {
        let n = self.g.dim();
        let circle = q(n as i64).pow(d.circles as i32);
        let mut acc: Vec<(Vec<usize>, Q)> = vec![(vec![usize::MAX; d.legs.len()], circle)];
        for comp in d.components() {
            let entries = self.component_tensor(d, &comp);
            let mut next = Vec::new();
            for (idx, c) in &acc {
                for (assign, x) in &entries {
                    let mut i2 = idx.clone();
                    for (&l, &a) in comp.legs.iter().zip(assign) {
                        i2[l] = a;
                    }
                    next.push((i2, c * x));
                }
            }
            acc = next;
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// Entries of one connected component: indices for `comp.legs`.
    fn component_tensor(&self, d: &JacobiDiagram, comp: &Component) -> Vec<(Vec<usize>, Q)> {
        let n = self.g.dim();
        if comp.vertices.is_empty() {
            return (0..n).map(|a| (vec![a, a], Q::one())).collect();
        }
        let edge = |h: usize| h.min(d.pair[h]);
        // breadth-first vertex order so that constraints propagate
        let mut order = vec![comp.vertices[0]];
        let mut seen = vec![false; d.vertices];
        seen[comp.vertices[0]] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            for s in 0..3 {
                let p = d.pair[3 * v + s];
                if p < 3 * d.vertices && !seen[p / 3] {
                    seen[p / 3] = true;
                    order.push(p / 3);
                }
            }
            i += 1;
        }
        let mut assign = vec![usize::MAX; d.pair.len()];
        let mut out = Vec::new();
        self.assign_rec(d, &order, 0, &edge, &mut assign, Q::one(), comp, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_rec(&self, d: &JacobiDiagram, order: &[usize], i: usize, edge: &dyn Fn(usize) -> usize, assign: &mut Vec<usize>, coeff: Q, comp: &Component, out: &mut Vec<(Vec<usize>, Q)>) {
        if i == order.len() {
            let idx = comp.legs.iter().map(|&l| assign[edge(d.leg_half(l))]).collect();
            out.push((idx, coeff));
            return;
        }
        let v = order[i];
        let es = [edge(3 * v), edge(3 * v + 1), edge(3 * v + 2)];
        let n = self.g.dim();
        let cands = |e: usize, assign: &Vec<usize>| if assign[e] == usize::MAX { (0..n).collect::<Vec<_>>() } else { vec![assign[e]] };
        for a in cands(es[0], assign) {
            let set0 = assign[es[0]] == usize::MAX;
            assign[es[0]] = a;
            for b in cands(es[1], assign) {
                let set1 = assign[es[1]] == usize::MAX;
                assign[es[1]] = b;
                for (c, val) in self.g.bracket(a, b) {
                    let cur = assign[es[2]];
                    if cur != usize::MAX && cur != *c {
                        continue;
                    }
                    assign[es[2]] = *c;
                    self.assign_rec(d, order, i + 1, edge, assign, &coeff * val, comp, out);
                    assign[es[2]] = cur;
                }
                if set1 {
                    assign[es[1]] = usize::MAX;
                }
            }
            if set0 {
                assign[es[0]] = usize::MAX;
            }
        }
    }
}

/// Evaluates in the picture the labels call for.
pub fn evaluate(c: &DiagramCombo, g: &QuadraticLieAlgebra) -> Result<Evaluation, DiagramError> {
    WeightSystem::new(g, Picture::of(c))?.eval(c)
}

fn require_unbased(c: &DiagramCombo) -> Result<(), DiagramError> {
    if c.iter().any(|(d, _)| d.based) {
        return Err(DiagramError::InconsistentLabels("expected unbased diagrams".into()));
    }
    Ok(())
}

fn poly_of(ws: &WeightSystem, c: &DiagramCombo) -> Result<SuperPolynomial, DiagramError> {
    match ws.eval(c)? {
        Evaluation::Poly(p) => Ok(p),
        Evaluation::Nc(_) => Err(DiagramError::InconsistentLabels("expected unbased diagrams".into())),
    }
}

fn compare(space: &str, relation: &str, lhs: &Terms, rhs: &Terms, show: impl Fn(&Terms) -> String) -> CheckRecord {
    let r = if lhs == rhs { Ok(()) } else { Err(format!("lhs - rhs = {}", show(&(lhs - rhs)))) };
    CheckRecord::from_result(space, relation, r)
}

fn shower(ws: &WeightSystem, based: bool) -> impl Fn(&Terms) -> String + '_ {
    move |t: &Terms| {
        let n = ws.g.dim();
        if based {
            t.render(|l| ws.based_alg.kind().letter_name(n, l))
        } else {
            t.render(|l| ws.poly_kind().letter_name(n, l))
        }
    }
}

/// `evaluate(∂_Ω D) = j^{1/2}(∂) evaluate(D)`.
pub fn check_omega_jhalf(g: &QuadraticLieAlgebra, d: &DiagramCombo) -> Result<CheckRecord, DiagramError> {
    require_unbased(d)?;
    let ws = WeightSystem::new(g, Picture::of(d))?;
    let n = d.max_legs();
    let lhs = poly_of(&ws, &apply_partial(&omega(n), d)?)?;
    let rhs = duflo::apply_jhalf(&duflo::jhalf_operator(g, n), &poly_of(&ws, d)?)?;
    Ok(compare("diagram", "omega_is_jhalf", lhs.terms(), rhs.terms(), shower(&ws, false)))
}

/// `evaluate(∂_Ψ D) = exp(½ T_ab(∂) ι_a ι_b) evaluate(D)` in `W`.
pub fn check_psi_t(g: &QuadraticLieAlgebra, d: &DiagramCombo) -> Result<CheckRecord, DiagramError> {
    require_unbased(d)?;
    let ws = WeightSystem::new(g, Picture::Weil)?;
    let n = d.max_legs();
    let lhs = poly_of(&ws, &apply_partial(&psi(n), d)?)?;
    let rhs = duflo::apply_T(g, &duflo::T_operator(g, n), &poly_of(&ws, d)?)?;
    Ok(compare("diagram", "psi_is_T", lhs.terms(), rhs.terms(), shower(&ws, false)))
}

/// `evaluate(∂_Γ D)` equals the (super-)symmetrization of `evaluate(D)`.
pub fn check_gamma_chi(g: &QuadraticLieAlgebra, d: &DiagramCombo) -> Result<CheckRecord, DiagramError> {
    require_unbased(d)?;
    let ws = WeightSystem::new(g, Picture::of(d))?;
    let lhs = ws.eval(&gamma_apply(d)?)?;
    let p = poly_of(&ws, d)?;
    let rhs = match ws.picture {
        Picture::Classical => ncweil::pbw_chi(ws.nc(), &p)?,
        Picture::Weil => ncweil::chi_q(ws.nc(), &p)?,
    };
    Ok(compare("diagram", "gamma_is_chi", lhs.terms(), rhs.terms(), shower(&ws, true)))
}

/// `Φ = ∂_Γ ∘ ∂_Ω` with `Ω` truncated at `trunc`.
pub fn phi(d: &DiagramCombo, trunc: usize) -> Result<DiagramCombo, DiagramError> {
    gamma_apply(&apply_exp_partial(&omega_log(trunc), d)?)
}

/// `Φ̃ = ∂_Γ ∘ ∂_Ω ∘ ∂_Ψ` with both series truncated at `trunc`.
pub fn phi_tilde(d: &DiagramCombo, trunc: usize) -> Result<DiagramCombo, DiagramError> {
    gamma_apply(&apply_exp_partial(&omega_log(trunc), &apply_exp_partial(&psi_log(trunc), d)?)?)
}

/// `evaluate(Φ̃ D) = Q(evaluate D)` for unbased `D`.
pub fn check_phi_tilde_is_q(g: &QuadraticLieAlgebra, d: &DiagramCombo) -> Result<CheckRecord, DiagramError> {
    require_unbased(d)?;
    let ws = WeightSystem::new(g, Picture::Weil)?;
    let n = d.max_legs();
    let lhs = ws.eval(&phi_tilde(d, n)?)?;
    let rhs = Quantizer::new(g)?.quantize(&poly_of(&ws, d)?, n)?;
    Ok(compare("diagram", "phi_tilde_is_Q", lhs.terms(), rhs.terms(), shower(&ws, true)))
}

fn wheeling_pre(d1: &DiagramCombo, d2: &DiagramCombo, max_degree: usize) -> Result<usize, DiagramError> {
    for d in [d1, d2] {
        require_unbased(d)?;
        if d.iter().any(|(x, _)| x.has_struts()) {
            return Err(DiagramError::StrutInLeftArgument);
        }
        if d.max_degree() > max_degree {
            return Err(DiagramError::DegreeTooLarge { degree: d.max_degree(), max: max_degree });
        }
    }
    Ok(d1.max_legs() + d2.max_legs())
}

/// `evaluate(Φ(D₁ ⊔ D₂)) = evaluate(Φ(D₁)) · evaluate(Φ(D₂))` in `U(g)`.
pub fn wheeling_check(g: &QuadraticLieAlgebra, d1: &DiagramCombo, d2: &DiagramCombo, max_degree: usize) -> Result<CheckRecord, DiagramError> {
    let trunc = wheeling_pre(d1, d2, max_degree)?;
    let ws = WeightSystem::new(g, Picture::Classical)?;
    let lhs = ws.eval(&phi(&d1.union(d2), trunc)?)?;
    let a = ws.eval(&phi(d1, trunc)?)?;
    let b = ws.eval(&phi(d2, trunc)?)?;
    let rhs = ws.multiply(true, a.terms(), b.terms());
    Ok(compare("diagram", "wheeling", lhs.terms(), &rhs, shower(&ws, true)))
}

/// The `Φ̃` analogue over `W̃`: multiplicativity on diagrams whose
/// evaluations are basic, plus `Φ̃ = Q` through the weight system.
pub fn wheeling_tilde_check(g: &QuadraticLieAlgebra, d1: &DiagramCombo, d2: &DiagramCombo, max_degree: usize) -> Result<Vec<CheckRecord>, DiagramError> {
    let trunc = wheeling_pre(d1, d2, max_degree)?;
    let ws = WeightSystem::new(g, Picture::Weil)?;
    for d in [d1, d2] {
        let p = poly_of(&ws, d)?;
        let c = gdiff::classify(g, Space::W, p.terms()).map_err(|e| DiagramError::Malformed(e.to_string()))?;
        if !c.basic {
            return Err(DiagramError::NotBasic);
        }
    }
    let u = d1.union(d2);
    let lhs = ws.eval(&phi_tilde(&u, trunc)?)?;
    let a = ws.eval(&phi_tilde(d1, trunc)?)?;
    let b = ws.eval(&phi_tilde(d2, trunc)?)?;
    let rhs = ws.multiply(true, a.terms(), b.terms());
    let mut out = vec![compare("diagram", "wheeling_tilde", lhs.terms(), &rhs, shower(&ws, true))];
    let qz = Quantizer::new(g)?;
    let qu = qz.quantize(&poly_of(&ws, &u)?, trunc)?;
    out.push(compare("diagram", "wheeling_tilde_is_Q", lhs.terms(), qu.terms(), shower(&ws, true)));
    Ok(out)
}

/// `⟨C, D₁ ⊔ D₂⟩ = ⟨Δ_xy C, (D₁)_x ⊔ (D₂)_y⟩`, compared combinatorially.
pub fn duality_check(c: &DiagramCombo, d1: &DiagramCombo, d2: &DiagramCombo) -> Result<CheckRecord, DiagramError> {
    let plain = |x: &DiagramCombo| x.map_linear(|d| -> Result<_, DiagramError> { Ok(DiagramCombo::from_diagram(d.clone().map_legs(|l| Leg { color: None, ..l }))) });
    let (c0, d10, d20) = (plain(c)?, plain(d1)?, plain(d2)?);
    let lhs = inner_product(&c0, &d10.union(&d20))?;
    let rhs = inner_product(&delta_coloring(&c0, 'x', 'y'), &recolor_all(&d10, 'x').union(&recolor_all(&d20, 'y')))?;
    let r = if lhs == rhs { Ok(()) } else { Err(format!("lhs={lhs} rhs={rhs}")) };
    Ok(CheckRecord::from_result("diagram", "duality", r))
}

/// `Δ_xy ∘ P = P_x ∘ Δ_xy`: splitting commutes with recoloring once the
/// split is taken at a leg of one fixed color.
pub fn check_split_delta(c: &DiagramCombo) -> CheckRecord {
    let lhs = delta_coloring(&split_p(c), 'x', 'y');
    let rhs = split_p_colored(&delta_coloring(c, 'x', 'y'), Some('x'));
    let r = if lhs == rhs { Ok(()) } else { Err(format!("lhs={lhs} rhs={rhs}")) };
    CheckRecord::from_result("diagram", "split_delta", r)
}

/// `D` plus `D` with the cyclic order at `v` reversed.
pub fn as_relation(d: &JacobiDiagram, v: usize) -> DiagramCombo {
    let mut c = DiagramCombo::from_diagram(d.clone());
    c.add_diagram(d.reversed_at(v), &Q::one());
    c
}

/// The three-term IHX combination at the edge through half-edge `h`, when
/// that edge joins two distinct vertices whose four outer half-edges lead
/// outside the pair.
pub fn ihx_relation(d: &JacobiDiagram, h: usize) -> Option<DiagramCombo> {
    let nv = d.vertices;
    let hp = d.pair[h];
    if h >= 3 * nv || hp >= 3 * nv || h / 3 == hp / 3 {
        return None;
    }
    let (u, v) = (h / 3, hp / 3);
    let (ur, vr) = (h % 3, hp % 3);
    let a = 3 * u + (ur + 1) % 3;
    let b = 3 * u + (ur + 2) % 3;
    let c = 3 * v + (vr + 1) % 3;
    let dd = 3 * v + (vr + 2) % 3;
    let outer: Vec<usize> = [a, b, c, dd].iter().map(|&x| d.pair[x]).collect();
    if outer.iter().any(|&p| p < 3 * nv && (p / 3 == u || p / 3 == v)) {
        return None;
    }
    let (pa, pb, pc) = (outer[0], outer[1], outer[2]);
    let mut out = DiagramCombo::zero();
    for (xa, xb, xc) in [(pa, pb, pc), (pb, pc, pa), (pc, pa, pb)] {
        let mut e = d.clone();
        for (slot, target) in [(a, xa), (b, xb), (c, xc)] {
            e.pair[slot] = target;
            e.pair[target] = slot;
        }
        out.add_diagram(e, &Q::one());
    }
    Some(out)
}

/// `T − U − S` at based leg `leg` whose vertex reads `(p, q, leg)`.
pub fn stu_relation(d: &JacobiDiagram, leg: usize) -> Option<DiagramCombo> {
    if !d.based {
        return None;
    }
    let l = d.legs[leg];
    let w = d.pair[d.leg_half(leg)];
    if w >= 3 * d.vertices {
        return None;
    }
    // excise reads the vertex as (leg, p, q); the rotation (p, q, leg) is the same cyclic order
    let t = d.excise(leg, l, l, false)?;
    let u = d.excise(leg, l, l, true)?;
    let mut out = DiagramCombo::from_diagram(t);
    out.add_diagram(u, &q(-1));
    out.add_diagram(d.clone(), &q(-1));
    Some(out)
}

/// Evaluates every AS, IHX and (for based diagrams) STU combination built
/// from `d`; each must vanish.
pub fn check_relations(g: &QuadraticLieAlgebra, d: &JacobiDiagram) -> Result<Vec<CheckRecord>, DiagramError> {
    let picture = if d.has_odd_or_super() { Picture::Weil } else { Picture::Classical };
    let ws = WeightSystem::new(g, picture)?;
    let mut out = Vec::new();
    let mut run = |name: &str, combos: Vec<(String, DiagramCombo)>| -> Result<(), DiagramError> {
        let mut r = Ok(());
        for (site, c) in combos {
            let e = ws.eval(&c)?;
            if !e.is_zero() {
                r = Err(format!("{site} of {d}: {e}"));
                break;
            }
        }
        out.push(CheckRecord::from_result("relation", name, r));
        Ok(())
    };
    run("AS", (0..d.vertices).map(|v| (format!("vertex {}", v + 1), as_relation(d, v))).collect())?;
    run("IHX", (0..3 * d.vertices).filter_map(|h| ihx_relation(d, h).map(|c| (format!("half-edge {}", h + 1), c))).collect())?;
    if d.based && d.legs.iter().all(|l| l.parity == Parity::Even) {
        run("STU", (0..d.legs.len()).filter_map(|i| stu_relation(d, i).map(|c| (format!("leg {}", i + 1), c))).collect())?;
    }
    Ok(out)
}

/// A random connected even-labeled diagram: a strut grown by inserting
/// `legs - 2` spoke vertices and `loops` rungs at random edges, with random
/// cyclic orders.
pub fn random_diagram(rng: &mut impl Rng, legs: usize, loops: usize) -> JacobiDiagram {
    assert!(legs >= 2, "a random diagram needs at least two legs");
    let mut edges = vec![(End::Leg(0), End::Leg(1))];
    let mut nv = 0;
    let mut nl = 2;
    let subdivide = |edges: &mut Vec<(End, End)>, nv: &mut usize, rng: &mut dyn rand::RngCore| -> End {
        let i = rng.random_range(0..edges.len());
        let (x, y) = edges.swap_remove(i);
        let w = *nv;
        *nv += 1;
        let mut slots = [0, 1, 2];
        let r = rng.random_range(0..6);
        slots.rotate_left(r % 3);
        if r >= 3 {
            slots.swap(1, 2);
        }
        edges.push((x, End::Slot(w, slots[0])));
        edges.push((End::Slot(w, slots[1]), y));
        End::Slot(w, slots[2])
    };
    for _ in 2..legs {
        let free = subdivide(&mut edges, &mut nv, rng);
        edges.push((free, End::Leg(nl)));
        nl += 1;
    }
    for _ in 0..loops {
        let a = subdivide(&mut edges, &mut nv, rng);
        let b = subdivide(&mut edges, &mut nv, rng);
        edges.push((a, b));
    }
    JacobiDiagram::from_edges(nv, vec![Leg::EVEN; nl], &edges, false).expect("growth keeps the diagram well formed")
}
