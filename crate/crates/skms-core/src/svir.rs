//! Truncated Fock-space verification of the super-Virasoro relations and the
//! deformed central charge, in exact rational arithmetic.
//!
//! Convention note. Modes live on the half-integer grid: bosons a_n with
//! [a_m, a_n] = m delta_{m+n,0} (a_0 absent), Neveu-Schwarz fermions b_r,
//! r in Z + 1/2, {b_r, b_s} = delta_{r+s,0}, and the two species commute.
//! The quadratic generators are
//!   L_n = (1/2) sum_m :a_{-m} a_{m+n}: + (1/2) sum_r (r + n/2) :b_{-r} b_{r+n}:
//!   G_r = sum_m a_{-m} b_{m+r}
//! with normal ordering moving annihilators right. The central term produced
//! by this mode algebra is (c/12)(m^3 - m), the circle-vacuum convention;
//! the linear -m piece reflects that choice and is not asserted in any
//! smeared form. Fermion indices are carried doubled (r2 = 2r) so that all
//! bookkeeping is integral.
//!
//! Basis states are unnormalized monomials in the creation modes; the Gram
//! matrix is diagonal with entry prod_n n^{alpha_n} alpha_n! over the boson
//! occupations, which keeps every matrix element rational.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec::Vec;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub type Q = Ratio<i128>;

/// Rational complex scalar.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct QC {
    pub re: Q,
    pub im: Q,
}

impl QC {
    pub fn zero() -> Self {
        QC {
            re: Q::zero(),
            im: Q::zero(),
        }
    }

    pub fn one() -> Self {
        QC {
            re: Q::one(),
            im: Q::zero(),
        }
    }

    pub fn real(q: Q) -> Self {
        QC {
            re: q,
            im: Q::zero(),
        }
    }

    pub fn imaginary(q: Q) -> Self {
        QC {
            re: Q::zero(),
            im: q,
        }
    }

    pub fn from_int(n: i128) -> Self {
        QC::real(Q::from_integer(n))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        QC {
            re: self.re,
            im: -self.im,
        }
    }
}

impl core::ops::Add for QC {
    type Output = QC;
    fn add(self, o: QC) -> QC {
        QC {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl core::ops::Sub for QC {
    type Output = QC;
    fn sub(self, o: QC) -> QC {
        QC {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl core::ops::Neg for QC {
    type Output = QC;
    fn neg(self) -> QC {
        QC {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl core::ops::Mul for QC {
    type Output = QC;
    fn mul(self, o: QC) -> QC {
        if self.im.is_zero() && o.im.is_zero() {
            return QC::real(self.re * o.re);
        }
        QC {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Occupation state: boson (mode, count) pairs and doubled fermion indices,
/// both sorted ascending. Fermion factors act in ascending order on the
/// vacuum and each occurs at most once.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct State {
    pub bosons: Vec<(u32, u32)>,
    pub fermions: Vec<u32>,
}

impl State {
    pub fn vacuum() -> Self {
        State {
            bosons: Vec::new(),
            fermions: Vec::new(),
        }
    }

    /// Twice the L0 eigenvalue.
    pub fn energy2(&self) -> i64 {
        let b: i64 = self
            .bosons
            .iter()
            .map(|&(n, c)| 2 * n as i64 * c as i64)
            .sum();
        let f: i64 = self.fermions.iter().map(|&r2| r2 as i64).sum();
        b + f
    }

    /// Diagonal Gram entry: prod n^count count!.
    pub fn gram(&self) -> Q {
        let mut g = Q::one();
        for &(n, c) in &self.bosons {
            for k in 1..=c {
                g *= Q::from_integer(n as i128 * k as i128);
            }
        }
        g
    }
}

/// Basis of all states with energy2 <= cutoff2, sorted by (energy2, state).
pub struct FockTruncation {
    pub cutoff2: i64,
    pub states: Vec<State>,
    index: BTreeMap<State, usize>,
}

/// Enumerate the truncated basis. The cutoff is twice the maximal L0
/// eigenvalue; the cap matches the config limit.
pub fn build_truncation(cutoff2: i64) -> Result<FockTruncation, String> {
    if cutoff2 < 0 {
        return Err(String::from("cutoff must be nonnegative"));
    }
    if cutoff2 > 28 {
        return Err(format!("cutoff {}/2 exceeds the cap 14", cutoff2));
    }
    let mut states = Vec::new();
    let mut fermions: Vec<u32> = Vec::new();
    // fermions over odd r2 ascending, then bosons over modes descending
    fn boson_fill(
        budget2: i64,
        max_mode: u32,
        partial: &mut Vec<(u32, u32)>,
        fermions: &[u32],
        out: &mut Vec<State>,
    ) {
        let mut bosons: Vec<(u32, u32)> = partial.clone();
        bosons.reverse();
        out.push(State {
            bosons,
            fermions: fermions.to_vec(),
        });
        for n in (1..=max_mode).rev() {
            if 2 * n as i64 > budget2 {
                continue;
            }
            if let Some(&(last, _)) = partial.last() {
                if n > last {
                    continue;
                }
            }
            let mut count = 0;
            let mut used = 0i64;
            loop {
                count += 1;
                used += 2 * n as i64;
                if used > budget2 {
                    break;
                }
                partial.push((n, count));
                boson_fill(budget2 - used, n - 1, partial, fermions, out);
                partial.pop();
            }
        }
    }
    fn fermion_fill(budget2: i64, min_r2: u32, fermions: &mut Vec<u32>, out: &mut Vec<State>) {
        let max_mode = (budget2 / 2) as u32;
        let mut partial = Vec::new();
        boson_fill(budget2, max_mode, &mut partial, fermions, out);
        let mut r2 = min_r2;
        while (r2 as i64) <= budget2 {
            fermions.push(r2);
            fermion_fill(budget2 - r2 as i64, r2 + 2, fermions, out);
            fermions.pop();
            r2 += 2;
        }
    }
    fermion_fill(cutoff2, 1, &mut fermions, &mut states);
    states.sort_by(|a, b| (a.energy2(), a).cmp(&(b.energy2(), b)));
    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(FockTruncation {
        cutoff2,
        states,
        index,
    })
}

impl FockTruncation {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn vacuum(&self) -> usize {
        0
    }

    pub fn find(&self, s: &State) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Basis states per half-integer energy level 0, 1/2, ..., cutoff.
    pub fn level_dims(&self) -> Vec<usize> {
        let mut out = alloc::vec![0usize; self.cutoff2 as usize + 1];
        for s in &self.states {
            out[s.energy2() as usize] += 1;
        }
        out
    }

    /// Boson mode action; None when the image is annihilated or leaves the
    /// truncation. a_0 is absent.
    pub fn apply_a(&self, n: i64, j: usize) -> Option<(usize, Q)> {
        if n == 0 {
            return None;
        }
        let s = &self.states[j];
        if n > 0 {
            let mode = n as u32;
            let pos = s.bosons.iter().position(|&(m, _)| m == mode)?;
            let count = s.bosons[pos].1;
            let mut t = s.clone();
            if count == 1 {
                t.bosons.remove(pos);
            } else {
                t.bosons[pos].1 -= 1;
            }
            let i = self.find(&t).expect("annihilation stays in basis");
            Some((i, Q::from_integer(n as i128 * count as i128)))
        } else {
            let mode = (-n) as u32;
            if s.energy2() + 2 * (-n) > self.cutoff2 {
                return None;
            }
            let mut t = s.clone();
            match t.bosons.iter().position(|&(m, _)| m >= mode) {
                Some(pos) if t.bosons[pos].0 == mode => t.bosons[pos].1 += 1,
                Some(pos) => t.bosons.insert(pos, (mode, 1)),
                None => t.bosons.push((mode, 1)),
            }
            let i = self.find(&t)?;
            Some((i, Q::one()))
        }
    }

    /// Fermion mode action with the position sign; indices doubled and odd.
    pub fn apply_b(&self, r2: i64, j: usize) -> Option<(usize, Q)> {
        assert!(r2 % 2 != 0, "fermion indices live on the half-integer grid");
        let s = &self.states[j];
        if r2 > 0 {
            let target = r2 as u32;
            let pos = s.fermions.iter().position(|&x| x == target)?;
            let mut t = s.clone();
            t.fermions.remove(pos);
            let i = self.find(&t).expect("annihilation stays in basis");
            let sign = if pos % 2 == 0 { Q::one() } else { -Q::one() };
            Some((i, sign))
        } else {
            let target = (-r2) as u32;
            if s.fermions.contains(&target) {
                return None;
            }
            if s.energy2() + (-r2) > self.cutoff2 {
                return None;
            }
            let pos = s
                .fermions
                .iter()
                .position(|&x| x > target)
                .unwrap_or(s.fermions.len());
            let mut t = s.clone();
            t.fermions.insert(pos, target);
            let i = self.find(&t)?;
            let sign = if pos % 2 == 0 { Q::one() } else { -Q::one() };
            Some((i, sign))
        }
    }

    /// Columns with enough headroom for a relation of the given energy2
    /// budget.
    pub fn safe_columns(&self, budget2: i64) -> Vec<usize> {
        (0..self.dim())
            .filter(|&j| self.states[j].energy2() <= self.cutoff2 - budget2)
            .collect()
    }
}

/// Column-sparse operator on a truncation.
#[derive(Clone, Debug)]
pub struct SpOp {
    pub dim: usize,
    pub cols: Vec<Vec<(usize, QC)>>,
}

impl SpOp {
    pub fn zero(dim: usize) -> Self {
        SpOp {
            dim,
            cols: alloc::vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        SpOp {
            dim,
            cols: (0..dim).map(|j| alloc::vec![(j, QC::one())]).collect(),
        }
    }

    pub fn column_map(&self, j: usize) -> BTreeMap<usize, QC> {
        self.cols[j].iter().copied().collect()
    }

    pub fn apply_map(&self, v: &BTreeMap<usize, QC>) -> BTreeMap<usize, QC> {
        let mut out: BTreeMap<usize, QC> = BTreeMap::new();
        for (&j, &c) in v {
            for &(i, a) in &self.cols[j] {
                let e = out.entry(i).or_insert_with(QC::zero);
                *e = *e + a * c;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn add(&self, other: &SpOp) -> SpOp {
        let cols = (0..self.dim)
            .map(|j| {
                let mut m = self.column_map(j);
                for &(i, c) in &other.cols[j] {
                    let e = m.entry(i).or_insert_with(QC::zero);
                    *e = *e + c;
                }
                m.retain(|_, c| !c.is_zero());
                m.into_iter().collect()
            })
            .collect();
        SpOp {
            dim: self.dim,
            cols,
        }
    }

    pub fn scale(&self, c: QC) -> SpOp {
        if c.is_zero() {
            return SpOp::zero(self.dim);
        }
        SpOp {
            dim: self.dim,
            cols: self
                .cols
                .iter()
                .map(|col| col.iter().map(|&(i, a)| (i, a * c)).collect())
                .collect(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> QC {
        self.cols[j]
            .iter()
            .find(|&&(r, _)| r == i)
            .map(|&(_, c)| c)
            .unwrap_or_else(QC::zero)
    }

    /// Gram-weighted adjoint: [A*]_ij = (G_j / G_i) conj([A]_ji).
    pub fn adjoint(&self, tr: &FockTruncation) -> SpOp {
        let gram: Vec<Q> = tr.states.iter().map(|s| s.gram()).collect();
        let mut cols: Vec<Vec<(usize, QC)>> = alloc::vec![Vec::new(); self.dim];
        for j in 0..self.dim {
            for &(i, c) in &self.cols[j] {
                let w = QC::real(gram[i] / gram[j]);
                cols[i].push((j, c.conj() * w));
            }
        }
        for col in &mut cols {
            col.sort_by_key(|&(i, _)| i);
        }
        SpOp {
            dim: self.dim,
            cols,
        }
    }
}

/// Exact equality of two operator columns restricted to the listed columns.
pub fn equal_on_columns(a: &SpOp, b: &SpOp, cols: &[usize]) -> bool {
    cols.iter().all(|&j| {
        let ma = a.column_map(j);
        let mb = b.column_map(j);
        let keys: Vec<usize> = ma.keys().chain(mb.keys()).copied().collect();
        keys.into_iter().all(|k| {
            let va = ma.get(&k).copied().unwrap_or_else(QC::zero);
            let vb = mb.get(&k).copied().unwrap_or_else(QC::zero);
            va == vb
        })
    })
}

pub fn a_op(tr: &FockTruncation, n: i64) -> SpOp {
    let mut op = SpOp::zero(tr.dim());
    for j in 0..tr.dim() {
        if let Some((i, q)) = tr.apply_a(n, j) {
            op.cols[j].push((i, QC::real(q)));
        }
    }
    op
}

pub fn b_op(tr: &FockTruncation, r2: i64) -> SpOp {
    let mut op = SpOp::zero(tr.dim());
    for j in 0..tr.dim() {
        if let Some((i, q)) = tr.apply_b(r2, j) {
            op.cols[j].push((i, QC::real(q)));
        }
    }
    op
}

enum Mode {
    A(i64),
    B(i64),
}

impl Mode {
    fn is_annihilator(&self) -> bool {
        match *self {
            Mode::A(n) => n > 0,
            Mode::B(r2) => r2 > 0,
        }
    }

    fn apply(&self, tr: &FockTruncation, j: usize) -> Option<(usize, Q)> {
        match *self {
            Mode::A(n) => tr.apply_a(n, j),
            Mode::B(r2) => tr.apply_b(r2, j),
        }
    }
}

/// Accumulate coeff * first∘second applied annihilator-first into a column.
///
/// `first` and `second` are the factors in normal-ordered (creator-left)
/// writing; when the written order has an annihilator on the left and a
/// creator on the right the two are swapped with a fermionic sign handled by
/// the caller.
fn quad_term(
    tr: &FockTruncation,
    first: &Mode,
    second: &Mode,
    coeff: Q,
    j: usize,
    acc: &mut BTreeMap<usize, Q>,
) {
    if let Some((k, q1)) = second.apply(tr, j) {
        if let Some((i, q2)) = first.apply(tr, k) {
            let e = acc.entry(i).or_insert_with(Q::zero);
            *e += coeff * q1 * q2;
        }
    }
}

/// Quadratic generator L_n.
pub fn l_op(tr: &FockTruncation, n: i64) -> SpOp {
    let half = tr.cutoff2 / 2 + 1;
    let mut op = SpOp::zero(tr.dim());
    for j in 0..tr.dim() {
        let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
        if n == 0 {
            for m in 1..=half {
                quad_term(
                    tr,
                    &Mode::A(-m),
                    &Mode::A(m),
                    Q::one(),
                    j,
                    &mut acc,
                );
            }
            let mut r2 = 1;
            while r2 <= tr.cutoff2 {
                quad_term(
                    tr,
                    &Mode::B(-r2),
                    &Mode::B(r2),
                    Q::new(r2 as i128, 2),
                    j,
                    &mut acc,
                );
                r2 += 2;
            }
        } else {
            for m in -half..=half {
                let p = -m;
                let q = m + n;
                if p == 0 || q == 0 || p.abs() > half || q.abs() > half {
                    continue;
                }
                let (x, y) = if p > 0 && q < 0 { (q, p) } else { (p, q) };
                quad_term(
                    tr,
                    &Mode::A(x),
                    &Mode::A(y),
                    Q::new(1, 2),
                    j,
                    &mut acc,
                );
            }
            let mut r2 = -(tr.cutoff2 | 1);
            while r2 <= (tr.cutoff2 | 1) {
                let x2 = -r2;
                let y2 = r2 + 2 * n;
                if y2.abs() <= tr.cutoff2 + 1 {
                    // (1/2)(r + n/2) b_{-r} b_{r+n}
                    let w = Q::new((r2 + n) as i128, 4);
                    if !w.is_zero() {
                        let fx = Mode::B(x2);
                        let fy = Mode::B(y2);
                        if fx.is_annihilator() && !fy.is_annihilator() {
                            quad_term(tr, &fy, &fx, -w, j, &mut acc);
                        } else {
                            quad_term(tr, &fx, &fy, w, j, &mut acc);
                        }
                    }
                }
                r2 += 2;
            }
        }
        op.cols[j] = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, QC::real(c)))
            .collect();
    }
    op
}

/// Supercurrent mode G_r (doubled index).
pub fn g_op(tr: &FockTruncation, r2: i64) -> SpOp {
    assert!(r2 % 2 != 0, "supercurrent indices live on the half-integer grid");
    let half = tr.cutoff2 / 2 + 1;
    let mut op = SpOp::zero(tr.dim());
    for j in 0..tr.dim() {
        let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
        for p in -half..=half {
            if p == 0 {
                continue;
            }
            let y2 = r2 - 2 * p;
            if y2.abs() > tr.cutoff2 + 1 {
                continue;
            }
            let a = Mode::A(p);
            let b = Mode::B(y2);
            // species commute; apply whichever annihilates first
            if a.is_annihilator() && !b.is_annihilator() {
                quad_term(tr, &b, &a, Q::one(), j, &mut acc);
            } else {
                quad_term(tr, &a, &b, Q::one(), j, &mut acc);
            }
        }
        op.cols[j] = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, QC::real(c)))
            .collect();
    }
    op
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeKind {
    A,
    B,
    L,
    G,
}

pub struct ModeOperator {
    pub kind: ModeKind,
    /// Doubled index for B and G, plain for A and L.
    pub index: i64,
    pub op: SpOp,
}

pub fn mode_operator(tr: &FockTruncation, kind: ModeKind, index: i64) -> ModeOperator {
    let op = match kind {
        ModeKind::A => a_op(tr, index),
        ModeKind::B => b_op(tr, index),
        ModeKind::L => l_op(tr, index),
        ModeKind::G => g_op(tr, index),
    };
    ModeOperator { kind, index, op }
}

/// Shared operator cache keyed by kind and index.
pub struct OpCache<'a> {
    tr: &'a FockTruncation,
    map: BTreeMap<(u8, i64), Rc<SpOp>>,
}

impl<'a> OpCache<'a> {
    pub fn new(tr: &'a FockTruncation) -> Self {
        OpCache {
            tr,
            map: BTreeMap::new(),
        }
    }

    pub fn trunc(&self) -> &FockTruncation {
        self.tr
    }

    fn get(&mut self, tag: u8, idx: i64) -> Rc<SpOp> {
        if let Some(op) = self.map.get(&(tag, idx)) {
            return Rc::clone(op);
        }
        let op = Rc::new(match tag {
            0 => a_op(self.tr, idx),
            1 => b_op(self.tr, idx),
            2 => l_op(self.tr, idx),
            _ => g_op(self.tr, idx),
        });
        self.map.insert((tag, idx), Rc::clone(&op));
        op
    }

    pub fn a(&mut self, n: i64) -> Rc<SpOp> {
        self.get(0, n)
    }

    pub fn b(&mut self, r2: i64) -> Rc<SpOp> {
        self.get(1, r2)
    }

    pub fn l(&mut self, n: i64) -> Rc<SpOp> {
        self.get(2, n)
    }

    pub fn g(&mut self, r2: i64) -> Rc<SpOp> {
        self.get(3, r2)
    }
}

/// The relation families; fermionic indices doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    /// [a_m, a_n] = m delta_{m+n}
    AA { m: i64, n: i64 },
    /// {b_r, b_s} = delta_{r+s}
    BB { r2: i64, s2: i64 },
    /// [L_m, L_n] = (m-n) L_{m+n} + (c/12)(m^3-m) delta_{m+n}
    LL { m: i64, n: i64 },
    /// {G_r, G_s} = 2 L_{r+s} + (c/3)(r^2-1/4) delta_{r+s}
    GG { r2: i64, s2: i64 },
    /// [L_m, G_r] = (m/2 - r) G_{m+r}
    LG { m: i64, r2: i64 },
    /// [L_m, a_n] = -n a_{m+n}
    LA { m: i64, n: i64 },
    /// [L_m, b_r] = -(m/2 + r) b_{m+r}
    LB { m: i64, r2: i64 },
    /// {b_r, G_s} = a_{r+s}
    BG { r2: i64, s2: i64 },
    /// [a_m, G_r] = m b_{m+r}
    AG { m: i64, r2: i64 },
}

impl Relation {
    /// Energy2 headroom the relation consumes.
    pub fn budget2(&self) -> i64 {
        match *self {
            Relation::AA { m, n } | Relation::LL { m, n } | Relation::LA { m, n } => {
                2 * (m.abs() + n.abs())
            }
            Relation::BB { r2, s2 } | Relation::GG { r2, s2 } | Relation::BG { r2, s2 } => {
                r2.abs() + s2.abs()
            }
            Relation::LG { m, r2 } | Relation::LB { m, r2 } | Relation::AG { m, r2 } => {
                2 * m.abs() + r2.abs()
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Relation::AA { m, n } => format!("aa[{m},{n}]"),
            Relation::BB { r2, s2 } => format!("bb[{r2}/2,{s2}/2]"),
            Relation::LL { m, n } => format!("ll[{m},{n}]"),
            Relation::GG { r2, s2 } => format!("gg[{r2}/2,{s2}/2]"),
            Relation::LG { m, r2 } => format!("lg[{m},{r2}/2]"),
            Relation::LA { m, n } => format!("la[{m},{n}]"),
            Relation::LB { m, r2 } => format!("lb[{m},{r2}/2]"),
            Relation::BG { r2, s2 } => format!("bg[{r2}/2,{s2}/2]"),
            Relation::AG { m, r2 } => format!("ag[{m},{r2}/2]"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationReport {
    pub relation: String,
    pub safe_dim: usize,
    pub exact: bool,
}

fn bracket_column(
    x: &SpOp,
    y: &SpOp,
    j: usize,
    anti: bool,
) -> BTreeMap<usize, QC> {
    let xy = x.apply_map(&y.column_map(j));
    let yx = y.apply_map(&x.column_map(j));
    let mut out = xy;
    for (i, c) in yx {
        let e = out.entry(i).or_insert_with(QC::zero);
        *e = if anti { *e + c } else { *e - c };
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn rhs_column(
    rhs: &[(QC, Rc<SpOp>)],
    central: Q,
    j: usize,
) -> BTreeMap<usize, QC> {
    let mut out: BTreeMap<usize, QC> = BTreeMap::new();
    for (w, op) in rhs {
        for (i, c) in op.column_map(j) {
            let e = out.entry(i).or_insert_with(QC::zero);
            *e = *e + c * *w;
        }
    }
    if !central.is_zero() {
        let e = out.entry(j).or_insert_with(QC::zero);
        *e = *e + QC::real(central);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Check one relation on its safe subspace; exact rational comparison.
pub fn commutator_check(cache: &mut OpCache, rel: Relation) -> RelationReport {
    let c12 = Q::new(1, 8); // c/12 with c = 3/2
    let (x, y, anti, rhs, central): (Rc<SpOp>, Rc<SpOp>, bool, Vec<(QC, Rc<SpOp>)>, Q) = match rel
    {
        Relation::AA { m, n } => {
            let central = if m + n == 0 {
                Q::from_integer(m as i128)
            } else {
                Q::zero()
            };
            (cache.a(m), cache.a(n), false, Vec::new(), central)
        }
        Relation::BB { r2, s2 } => {
            let central = if r2 + s2 == 0 { Q::one() } else { Q::zero() };
            (cache.b(r2), cache.b(s2), true, Vec::new(), central)
        }
        Relation::LL { m, n } => {
            let mut rhs = Vec::new();
            if m != n {
                rhs.push((QC::from_int((m - n) as i128), cache.l(m + n)));
            }
            let central = if m + n == 0 {
                c12 * Q::from_integer((m * m * m - m) as i128)
            } else {
                Q::zero()
            };
            (cache.l(m), cache.l(n), false, rhs, central)
        }
        Relation::GG { r2, s2 } => {
            let rhs = alloc::vec![(QC::from_int(2), cache.l((r2 + s2) / 2))];
            let central = if r2 + s2 == 0 {
                // (c/3)(r^2 - 1/4) with c = 3/2
                Q::new((r2 * r2 - 1) as i128, 8)
            } else {
                Q::zero()
            };
            (cache.g(r2), cache.g(s2), true, rhs, central)
        }
        Relation::LG { m, r2 } => {
            let w = QC::real(Q::new((m - r2) as i128, 2));
            let rhs = alloc::vec![(w, cache.g(2 * m + r2))];
            (cache.l(m), cache.g(r2), false, rhs, Q::zero())
        }
        Relation::LA { m, n } => {
            let rhs = alloc::vec![(QC::from_int(-n as i128), cache.a(m + n))];
            (cache.l(m), cache.a(n), false, rhs, Q::zero())
        }
        Relation::LB { m, r2 } => {
            let w = QC::real(-Q::new((m + r2) as i128, 2));
            let rhs = alloc::vec![(w, cache.b(2 * m + r2))];
            (cache.l(m), cache.b(r2), false, rhs, Q::zero())
        }
        Relation::BG { r2, s2 } => {
            let rhs = alloc::vec![(QC::one(), cache.a((r2 + s2) / 2))];
            (cache.b(r2), cache.g(s2), true, rhs, Q::zero())
        }
        Relation::AG { m, r2 } => {
            let rhs = alloc::vec![(QC::from_int(m as i128), cache.b(2 * m + r2))];
            (cache.a(m), cache.g(r2), false, rhs, Q::zero())
        }
    };
    let cols = cache.trunc().safe_columns(rel.budget2());
    let mut exact = true;
    for &j in &cols {
        let lhs = bracket_column(&x, &y, j, anti);
        let want = rhs_column(&rhs, central, j);
        if lhs != want {
            exact = false;
            break;
        }
    }
    RelationReport {
        relation: rel.name(),
        safe_dim: cols.len(),
        exact,
    }
}

/// Deformed family at rational parameter s:
/// L^s_n = L_n + i s n a_n + (s^2/2) delta_{n,0},
/// G^s_r = G_r + 2 i s r b_r.
pub fn deformed_l(cache: &mut OpCache, s: Q, n: i64) -> SpOp {
    let base = cache.l(n);
    if n == 0 {
        let shift = SpOp::identity(base.dim).scale(QC::real(s * s / Q::from_integer(2)));
        base.add(&shift)
    } else {
        let extra = cache
            .a(n)
            .scale(QC::imaginary(s * Q::from_integer(n as i128)));
        base.add(&extra)
    }
}

pub fn deformed_g(cache: &mut OpCache, s: Q, r2: i64) -> SpOp {
    let base = cache.g(r2);
    let extra = cache.b(r2).scale(QC::imaginary(s * Q::new(r2 as i128, 1)));
    base.add(&extra)
}

/// Extract the deformed central charge from the vacuum expectation of
/// [L^s_m, L^s_{-m}] at m = 2 and m = 3, after gating the mode convention
/// on exact closure of the deformed algebra.
pub fn deformed_central_charge(cache: &mut OpCache, s: Q) -> Result<Q, String> {
    let tr = cache.trunc();
    let vac = tr.vacuum();
    if tr.cutoff2 < 12 {
        return Err(String::from("cutoff too small for the m = 3 extraction"));
    }

    // convention gate: [L^s_1, L^s_{-1}] = 2 L^s_0 and
    // [L^s_2, G^s_{1/2}] = (1/2) G^s_{5/2}, exactly on their safe columns
    let l1 = deformed_l(cache, s, 1);
    let lm1 = deformed_l(cache, s, -1);
    let l0 = deformed_l(cache, s, 0);
    let cols = cache.trunc().safe_columns(4);
    for &j in &cols {
        let lhs = bracket_column(&l1, &lm1, j, false);
        let want = rhs_column(&[(QC::from_int(2), Rc::new(l0.clone()))], Q::zero(), j);
        if lhs != want {
            return Err(String::from("convention gate failed: deformed sl(2) does not close"));
        }
    }
    let l2 = deformed_l(cache, s, 2);
    let g12 = deformed_g(cache, s, 1);
    let g52 = deformed_g(cache, s, 5);
    let cols = cache.trunc().safe_columns(9);
    for &j in &cols {
        let lhs = bracket_column(&l2, &g12, j, false);
        let want = rhs_column(
            &[(QC::real(Q::new(1, 2)), Rc::new(g52.clone()))],
            Q::zero(),
            j,
        );
        if lhs != want {
            return Err(String::from(
                "convention gate failed: deformed current relation does not close",
            ));
        }
    }

    let vac_l0 = l0.entry(vac, vac);
    if !vac_l0.im.is_zero() {
        return Err(String::from("vacuum energy must be real"));
    }
    let mut charges = Vec::new();
    for m in [2i64, 3] {
        let lp = deformed_l(cache, s, m);
        let lm = deformed_l(cache, s, -m);
        let col = bracket_column(&lp, &lm, vac, false);
        let raw = col.get(&vac).copied().unwrap_or_else(QC::zero);
        if !raw.im.is_zero() {
            return Err(String::from("central term must be real"));
        }
        let mq = Q::from_integer(m as i128);
        let numer = raw.re - Q::from_integer(2) * mq * vac_l0.re;
        let c = Q::from_integer(12) * numer / (mq * mq * mq - mq);
        charges.push(c);
    }
    if charges[0] != charges[1] {
        return Err(format!(
            "extractions disagree: m=2 gives {}, m=3 gives {}",
            charges[0], charges[1]
        ));
    }
    Ok(charges[0])
}

/// Coefficients of the character product
/// prod (1-q^n)^{-1} prod (1+q^r) up to the cutoff, on the half-integer grid.
pub fn character_coefficients(cutoff2: i64) -> Vec<u64> {
    let len = cutoff2 as usize + 1;
    let mut coeffs = alloc::vec![0u64; len];
    coeffs[0] = 1;
    // fermionic factors (1 + q^{r}), r2 odd
    let mut r2 = 1usize;
    while r2 < len {
        for k in (r2..len).rev() {
            coeffs[k] += coeffs[k - r2];
        }
        r2 += 2;
    }
    // bosonic factors (1 - q^n)^{-1}
    let mut n2 = 2usize;
    while n2 < len {
        for k in n2..len {
            coeffs[k] += coeffs[k - n2];
        }
        n2 += 2;
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_level_content() {
        let tr = build_truncation(1).unwrap();
        assert_eq!(tr.dim(), 2);
        assert_eq!(tr.states[0], State::vacuum());
        assert_eq!(tr.states[1].fermions, alloc::vec![1]);
        assert!(build_truncation(30).is_err());
    }

    #[test]
    fn annihilators_kill_vacuum() {
        let tr = build_truncation(8).unwrap();
        assert!(tr.apply_a(1, tr.vacuum()).is_none());
        assert!(tr.apply_b(1, tr.vacuum()).is_none());
    }

    #[test]
    fn ccr_on_safe_subspace() {
        let tr = build_truncation(12).unwrap();
        let mut cache = OpCache::new(&tr);
        let rep = commutator_check(&mut cache, Relation::AA { m: 1, n: -1 });
        assert!(rep.exact && rep.safe_dim > 0);
        let rep = commutator_check(&mut cache, Relation::BB { r2: 1, s2: -1 });
        assert!(rep.exact);
    }

    #[test]
    fn level_dims_match_character_and_count() {
        let tr = build_truncation(24).unwrap();
        let dims = tr.level_dims();
        let coeffs = character_coefficients(24);
        let expect: Vec<u64> = alloc::vec![
            1, 1, 1, 2, 3, 4, 5, 7, 10, 13, 16, 21, 28, 35, 43, 55, 70, 86, 105, 130, 161, 196,
            236, 287, 350,
        ];
        assert_eq!(coeffs, expect);
        assert_eq!(dims.iter().map(|&d| d as u64).collect::<Vec<_>>(), expect);
        assert_eq!(tr.dim(), 1866);
    }

    #[test]
    fn l0_is_the_energy() {
        let tr = build_truncation(8).unwrap();
        let l0 = l_op(&tr, 0);
        for j in 0..tr.dim() {
            let want_e = Q::new(tr.states[j].energy2() as i128, 2);
            let col = l0.column_map(j);
            if want_e.is_zero() {
                assert!(col.is_empty());
            } else {
                assert_eq!(col.len(), 1);
                assert_eq!(col[&j], QC::real(want_e));
            }
        }
    }

    #[test]
    fn supercurrent_vacuum_actions() {
        let tr = build_truncation(8).unwrap();
        // G_{-1/2}|0> vanishes (the vacuum is superconformal); any nonzero
        // entry would sit at energy 1/2
        let g = g_op(&tr, -1);
        for &(i, _) in &g.cols[tr.vacuum()] {
            assert_eq!(tr.states[i].energy2(), 1);
        }
        assert!(g.cols[tr.vacuum()].is_empty());
        // G_{-3/2}|0> = a_{-1} b_{-1/2}|0>, energy 3/2
        let g3 = g_op(&tr, -3);
        let col = g3.column_map(tr.vacuum());
        assert_eq!(col.len(), 1);
        let (&i, &c) = col.iter().next().unwrap();
        assert_eq!(tr.states[i].energy2(), 3);
        assert_eq!(tr.states[i].bosons, alloc::vec![(1, 1)]);
        assert_eq!(tr.states[i].fermions, alloc::vec![1]);
        assert_eq!(c, QC::one());
    }

    #[test]
    fn central_charge_values() {
        let tr = build_truncation(12).unwrap();
        let mut cache = OpCache::new(&tr);
        // <0|[L_2, L_{-2}]|0> = c/2 = 3/4
        let l2 = cache.l(2);
        let lm2 = cache.l(-2);
        let col = bracket_column(&l2, &lm2, tr.vacuum(), false);
        assert_eq!(col.get(&tr.vacuum()), Some(&QC::real(Q::new(3, 4))));
        // <0|[L_3, L_{-3}]|0> = 2c = 3
        let l3 = cache.l(3);
        let lm3 = cache.l(-3);
        let col = bracket_column(&l3, &lm3, tr.vacuum(), false);
        assert_eq!(col.get(&tr.vacuum()), Some(&QC::real(Q::from_integer(3))));
    }

    #[test]
    fn gg_at_one_half_has_no_central_term() {
        let tr = build_truncation(12).unwrap();
        let mut cache = OpCache::new(&tr);
        let rep = commutator_check(&mut cache, Relation::GG { r2: 1, s2: -1 });
        assert!(rep.exact);
    }

    #[test]
    fn relation_battery() {
        let tr = build_truncation(24).unwrap();
        let mut cache = OpCache::new(&tr);
        let mut rels = Vec::new();
        for m in [-3i64, -2, -1, 1, 2, 3] {
            for n in [-3i64, -2, -1, 1, 2, 3] {
                rels.push(Relation::AA { m, n });
                rels.push(Relation::LL { m, n });
                rels.push(Relation::LA { m, n });
            }
        }
        for r2 in [-5i64, -3, -1, 1, 3, 5] {
            for s2 in [-5i64, -3, -1, 1, 3, 5] {
                rels.push(Relation::BB { r2, s2 });
                rels.push(Relation::GG { r2, s2 });
                rels.push(Relation::BG { r2, s2 });
            }
        }
        for m in [-3i64, -2, -1, 0, 1, 2, 3] {
            for r2 in [-5i64, -3, -1, 1, 3, 5] {
                rels.push(Relation::LG { m, r2 });
                rels.push(Relation::LB { m, r2 });
                rels.push(Relation::AG { m, r2 });
            }
        }
        for rel in rels {
            let rep = commutator_check(&mut cache, rel);
            assert!(rep.exact, "relation {} violated", rep.relation);
            assert!(rep.safe_dim > 0);
        }
    }

    #[test]
    fn hermiticity_via_gram_adjoint() {
        let tr = build_truncation(24).unwrap();
        let all: Vec<usize> = (0..tr.dim()).collect();
        for n in [1i64, 2, 3] {
            let a = l_op(&tr, n).adjoint(&tr);
            let b = l_op(&tr, -n);
            assert!(equal_on_columns(&a, &b, &all), "L_{n} adjoint mismatch");
        }
        for r2 in [1i64, 3, 5] {
            let a = g_op(&tr, r2).adjoint(&tr);
            let b = g_op(&tr, -r2);
            assert!(equal_on_columns(&a, &b, &all), "G_{r2}/2 adjoint mismatch");
        }
    }

    #[test]
    fn deformed_charges() {
        let tr = build_truncation(16).unwrap();
        let mut cache = OpCache::new(&tr);
        assert_eq!(
            deformed_central_charge(&mut cache, Q::zero()).unwrap(),
            Q::new(3, 2)
        );
        assert_eq!(
            deformed_central_charge(&mut cache, Q::new(1, 2)).unwrap(),
            Q::new(9, 2)
        );
        assert_eq!(
            deformed_central_charge(&mut cache, Q::one()).unwrap(),
            Q::new(27, 2)
        );
    }
}
