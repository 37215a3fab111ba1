use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::One;
use ordered_float::OrderedFloat;

use super::{Domain, GeometryError, GridFraction, GridVertex, TrisectError};
use crate::bounding::Characteristic;
use crate::problems::{EvalError, Problem};

/// Objective value and gradient stored for one trial point.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexRecord {
    pub f: f64,
    pub grad: Vec<f64>,
    /// 1-based order of first evaluation.
    pub trial_index: usize,
}

/// Append-only store of trial results keyed by exact grid vertex.
#[derive(Clone, Debug, Default)]
pub struct VertexDb {
    records: HashMap<GridVertex, VertexRecord>,
    order: Vec<GridVertex>,
}

impl VertexDb {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn get(&self, v: &GridVertex) -> Option<&VertexRecord> {
        self.records.get(v)
    }

    /// Records in trial order.
    pub fn iter(&self) -> impl Iterator<Item = (&GridVertex, &VertexRecord)> {
        self.order.iter().map(|v| (v, &self.records[v]))
    }

    fn insert(&mut self, v: GridVertex, f: f64, grad: Vec<f64>) -> &VertexRecord {
        let trial_index = self.order.len() + 1;
        self.order.push(v.clone());
        self.records.entry(v).or_insert(VertexRecord { f, grad, trial_index })
    }
}

/// One box `[a, b]` of the partition; `a` is always its trial vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperinterval {
    pub id: usize,
    pub a: GridVertex,
    pub b: GridVertex,
    /// Number of trisections separating the box from the whole domain.
    pub s: u32,
    pub ch: Characteristic,
}

/// Ids produced by one trisection; `middle` reuses the parent's id.
#[derive(Clone, Debug, PartialEq)]
pub struct Trisection {
    pub middle: usize,
    pub low: usize,
    pub high: usize,
    pub axis: usize,
    /// Set when the new vertex `u` had not been evaluated before.
    pub new_trial: Option<VertexRecord>,
}

#[derive(Clone, Debug)]
pub struct Partition {
    domain: Domain,
    boxes: Vec<Hyperinterval>,
    groups: BTreeMap<u32, BTreeSet<(OrderedFloat<f64>, usize)>>,
    by_vertex: HashMap<GridVertex, Vec<usize>>,
    db: VertexDb,
    evaluations: usize,
    log: Vec<usize>,
}

impl Partition {
    /// The single box `[a, b]` of `problem`'s domain, with `a` evaluated.
    /// With `reflect` the grid origin is the upper corner of the domain.
    pub fn new(problem: &Problem, reflect: bool) -> Result<Self, EvalError> {
        Self::with_database(problem, reflect, VertexDb::default())
    }

    /// Like [`Partition::new`] but reading through an existing database, so a
    /// replayed subdivision sequence costs no new evaluations.
    pub fn with_database(problem: &Problem, reflect: bool, db: VertexDb) -> Result<Self, EvalError> {
        let domain = Domain::new(problem.lower().to_vec(), problem.upper().to_vec(), reflect);
        let n = domain.dim();
        let mut p = Partition {
            domain,
            boxes: Vec::new(),
            groups: BTreeMap::new(),
            by_vertex: HashMap::new(),
            db,
            evaluations: 0,
            log: Vec::new(),
        };
        let a = GridVertex::origin(n);
        let b = GridVertex::far_corner(n);
        let (rec, _) = p.get_or_eval(&a, problem)?;
        let ch = Characteristic::new(&a, &b, &p.domain, &rec);
        let root = Hyperinterval { id: 0, a, b, s: 0, ch };
        p.boxes.push(root.clone());
        p.insert(root);
        Ok(p)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Number of boxes `m`.
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&Hyperinterval> {
        self.boxes.get(id)
    }

    /// Boxes by id.
    pub fn boxes(&self) -> &[Hyperinterval] {
        &self.boxes
    }

    pub fn database(&self) -> &VertexDb {
        &self.db
    }

    pub fn into_database(self) -> VertexDb {
        self.db
    }

    /// Number of distinct trial points.
    pub fn eval_counter(&self) -> usize {
        self.db.len()
    }

    /// Objective evaluations performed by this partition itself.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Ids passed to [`Partition::trisect`], in order.
    pub fn subdivision_log(&self) -> &[usize] {
        &self.log
    }

    /// Smallest group index present.
    pub fn q_inf(&self) -> u32 {
        *self.groups.keys().next().expect("partition is never empty")
    }

    /// Largest group index present.
    pub fn q_0(&self) -> u32 {
        *self.groups.keys().next_back().expect("partition is never empty")
    }

    /// Nonempty group indices with their boxes sorted by `(F, id)`.
    pub fn groups(&self) -> impl Iterator<Item = (u32, impl Iterator<Item = (f64, usize)> + '_)> + '_ {
        self.groups.iter().map(|(&s, set)| (s, set.iter().map(|&(f, id)| (f.0, id))))
    }

    /// Boxes of group `s` sorted by `(F, id)`.
    pub fn group(&self, s: u32) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.groups.get(&s).into_iter().flat_map(|set| set.iter().map(|&(f, id)| (f.0, id)))
    }

    /// Ids of the boxes whose trial vertex is `v`.
    pub fn boxes_at(&self, v: &GridVertex) -> &[usize] {
        self.by_vertex.get(v).map_or(&[], Vec::as_slice)
    }

    /// Axis of a longest side in real space; the smallest index wins ties.
    pub fn longest_side(&self, id: usize) -> usize {
        let bx = &self.boxes[id];
        let mut best = 0;
        let mut len = f64::NEG_INFINITY;
        for j in 0..self.dim() {
            let l = self.domain.side(j, bx.a.0[j], bx.b.0[j]);
            if l > len {
                best = j;
                len = l;
            }
        }
        best
    }

    /// Volume relative to the domain, exact.
    pub fn volume(&self, id: usize) -> BigRational {
        let bx = &self.boxes[id];
        bx.a.0
            .iter()
            .zip(&bx.b.0)
            .fold(BigRational::one(), |acc, (a, b)| acc * a.abs_diff(b).to_rational())
    }

    /// Squared length of the main diagonal in real space.
    pub fn diagonal_sq(&self, id: usize) -> f64 {
        let bx = &self.boxes[id];
        (0..self.dim())
            .map(|j| self.domain.side(j, bx.a.0[j], bx.b.0[j]).powi(2))
            .sum()
    }

    /// Largest squared diagonal. Every box of a group has the same shape, so
    /// any member of group `q_inf` attains it.
    pub fn max_diagonal_sq(&self) -> f64 {
        let (_, id) = self.groups[&self.q_inf()].first().copied().expect("groups are nonempty");
        self.diagonal_sq(id)
    }

    /// Real coordinates of a grid vertex.
    pub fn to_real(&self, v: &GridVertex) -> Vec<f64> {
        self.domain.to_real(v)
    }

    /// Stored record at `v`, evaluating the problem there first if needed.
    /// The flag reports whether an evaluation took place.
    pub fn get_or_eval(&mut self, v: &GridVertex, problem: &Problem) -> Result<(VertexRecord, bool), EvalError> {
        if let Some(rec) = self.db.get(v) {
            return Ok((rec.clone(), false));
        }
        let x = self.domain.to_real(v);
        let (f, grad) = problem.value_and_gradient(&x)?;
        self.evaluations += 1;
        Ok((self.db.insert(v.clone(), f, grad).clone(), true))
    }

    /// Record stored at a vertex, if it was ever evaluated.
    pub fn record(&self, v: &GridVertex) -> Option<&VertexRecord> {
        self.db.get(v)
    }

    /// Splits box `t` into three equal boxes across its longest side.
    ///
    /// With `u = a + 2/3 (b - a)` and `v = a + 1/3 (b - a)` along that side,
    /// `t` becomes `[u, v]`, and `[a, v]`, `[u, b]` are appended. Only `u` is
    /// new; it is evaluated unless the database already holds it. On error
    /// the partition is left untouched.
    pub fn trisect(&mut self, t: usize, problem: &Problem) -> Result<Trisection, TrisectError> {
        let parent = self.boxes.get(t).ok_or(GeometryError::UnknownBox(t))?.clone();
        let i = self.longest_side(t);
        let (ai, bi) = (parent.a.0[i], parent.b.0[i]);
        let ui = GridFraction::third_combination(ai, 1, bi, 2)?;
        let vi = GridFraction::third_combination(ai, 2, bi, 1)?;
        let mut u = parent.a.clone();
        u.0[i] = ui;
        let mut v = parent.b.clone();
        v.0[i] = vi;

        let (u_rec, fresh) = self.get_or_eval(&u, problem)?;
        let a_rec = self.db.get(&parent.a).expect("trial vertex is stored").clone();

        self.remove(t);
        let s = parent.s + 1;
        let low = self.boxes.len();
        let high = low + 1;
        let middle = Hyperinterval {
            id: t,
            ch: Characteristic::new(&u, &v, &self.domain, &u_rec),
            a: u.clone(),
            b: v.clone(),
            s,
        };
        let low_box = Hyperinterval {
            id: low,
            ch: Characteristic::new(&parent.a, &v, &self.domain, &a_rec),
            a: parent.a,
            b: v,
            s,
        };
        let high_box = Hyperinterval {
            id: high,
            ch: Characteristic::new(&u, &parent.b, &self.domain, &u_rec),
            a: u,
            b: parent.b,
            s,
        };
        self.boxes[t] = middle.clone();
        self.insert(middle);
        self.boxes.push(low_box.clone());
        self.insert(low_box);
        self.boxes.push(high_box.clone());
        self.insert(high_box);
        self.log.push(t);

        Ok(Trisection {
            middle: t,
            low,
            high,
            axis: i,
            new_trial: fresh.then_some(u_rec),
        })
    }

    fn insert(&mut self, bx: Hyperinterval) {
        self.groups.entry(bx.s).or_default().insert((OrderedFloat(bx.ch.f_lin), bx.id));
        self.by_vertex.entry(bx.a).or_default().push(bx.id);
    }

    fn remove(&mut self, id: usize) {
        let bx = &self.boxes[id];
        let group = self.groups.get_mut(&bx.s).expect("box is grouped");
        group.remove(&(OrderedFloat(bx.ch.f_lin), id));
        if group.is_empty() {
            self.groups.remove(&bx.s);
        }
        let owners = self.by_vertex.get_mut(&bx.a).expect("box is indexed by vertex");
        owners.retain(|&o| o != id);
        if owners.is_empty() {
            self.by_vertex.remove(&bx.a);
        }
    }
}
