//! Dense complex operators on labeled tensor-product spaces.
//!
//! Every space is an ordered list of factors. Basis vectors of a product
//! space are tuples of factor labels enumerated with the first factor
//! varying slowest, so `tensor` is the ordinary Kronecker product.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    /// +1 for `Up`, -1 for `Down`.
    pub fn sign(self) -> i64 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Level(i64),
    Spin(Spin),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Level(j) => write!(f, "{j}"),
            Atom::Spin(Spin::Up) => f.write_str("+"),
            Atom::Spin(Spin::Down) => f.write_str("-"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorKind {
    /// Consecutive levels `jmin..=jmax`. An edge is open when the window cuts
    /// an infinite module there; raising/lowering across an open edge is
    /// truncated to zero, so identities are only exact away from it.
    Oscillator {
        open_below: bool,
        open_above: bool,
    },
    Spin,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    kind: FactorKind,
    labels: Vec<Atom>,
}

impl Factor {
    /// A window of levels with both edges open.
    pub fn window(jmin: i64, jmax: i64) -> Result<Self> {
        Self::levels(jmin, jmax, true, true)
    }

    pub fn levels(jmin: i64, jmax: i64, open_below: bool, open_above: bool) -> Result<Self> {
        if jmax < jmin {
            return Err(Error::EmptyWindow);
        }
        Ok(Factor {
            kind: FactorKind::Oscillator { open_below, open_above },
            labels: (jmin..=jmax).map(Atom::Level).collect(),
        })
    }

    pub fn spin() -> Self {
        Factor {
            kind: FactorKind::Spin,
            labels: vec![Atom::Spin(Spin::Up), Atom::Spin(Spin::Down)],
        }
    }

    pub fn kind(&self) -> &FactorKind {
        &self.kind
    }

    pub fn labels(&self) -> &[Atom] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn position(&self, atom: Atom) -> Option<usize> {
        self.labels.iter().position(|&a| a == atom)
    }

    /// Levels `(jmin, jmax)` of an oscillator factor.
    pub fn level_range(&self) -> Option<(i64, i64)> {
        match (self.labels.first(), self.labels.last()) {
            (Some(Atom::Level(lo)), Some(Atom::Level(hi))) => Some((*lo, *hi)),
            _ => None,
        }
    }

    fn interior(&self, margin: usize) -> Vec<usize> {
        let n = self.dim();
        match self.kind {
            FactorKind::Spin => (0..n).collect(),
            FactorKind::Oscillator { open_below, open_above } => {
                let lo = if open_below { margin } else { 0 };
                let hi = if open_above { margin } else { 0 };
                (0..n).filter(|&k| k >= lo && k + hi < n).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSpace {
    factors: Vec<Factor>,
}

impl LabeledSpace {
    pub fn new(factors: Vec<Factor>) -> Self {
        assert!(!factors.is_empty(), "a space needs at least one factor");
        LabeledSpace { factors }
    }

    pub fn single(factor: Factor) -> Self {
        LabeledSpace::new(vec![factor])
    }

    pub fn spin() -> Self {
        LabeledSpace::single(Factor::spin())
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> Result<&Factor> {
        self.factors.get(index).ok_or(Error::FactorOutOfRange {
            index,
            count: self.factors.len(),
        })
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(Factor::dim).product()
    }

    pub fn tensor(&self, other: &LabeledSpace) -> LabeledSpace {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        LabeledSpace { factors }
    }

    /// Multi-index of a flat basis index (first factor slowest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (k, f) in self.factors.iter().enumerate().rev() {
            out[k] = flat % f.dim();
            flat /= f.dim();
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&i, f)| acc * f.dim() + i)
    }

    pub fn label(&self, flat: usize) -> Vec<Atom> {
        self.multi_index(flat)
            .iter()
            .zip(&self.factors)
            .map(|(&i, f)| f.labels[i])
            .collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = Vec<Atom>> + '_ {
        (0..self.dim()).map(move |i| self.label(i))
    }

    pub fn index_of(&self, label: &[Atom]) -> Option<usize> {
        if label.len() != self.factors.len() {
            return None;
        }
        let multi: Option<Vec<usize>> = self.factors.iter().zip(label).map(|(f, &a)| f.position(a)).collect();
        multi.map(|m| self.flat_index(&m))
    }

    /// Flat indices whose oscillator labels sit at least `margin` away from
    /// every open window edge.
    pub fn interior_indices(&self, margin: usize) -> Vec<usize> {
        let keep: Vec<Vec<bool>> = self
            .factors
            .iter()
            .map(|f| {
                let mut mask = vec![false; f.dim()];
                for k in f.interior(margin) {
                    mask[k] = true;
                }
                mask
            })
            .collect();
        (0..self.dim())
            .filter(|&i| self.multi_index(i).iter().zip(&keep).all(|(&k, mask)| mask[k]))
            .collect()
    }

    fn without(&self, index: usize) -> LabeledSpace {
        let mut factors = self.factors.clone();
        factors.remove(index);
        LabeledSpace { factors }
    }

    /// Rebuilds a product space from an explicit label list, as read from
    /// JSON. Level factors come back as windows with open edges.
    pub fn from_labels(labels: &[Vec<Atom>]) -> Result<Self> {
        let width = labels
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Format("empty label list".into()))?;
        if width == 0 || labels.iter().any(|l| l.len() != width) {
            return Err(Error::Format("labels must be tuples of equal length".into()));
        }
        let mut factors = Vec::with_capacity(width);
        for k in 0..width {
            let mut seen: Vec<Atom> = Vec::new();
            for l in labels {
                if !seen.contains(&l[k]) {
                    seen.push(l[k]);
                }
            }
            let factor = match seen[0] {
                Atom::Spin(_) => {
                    if seen != Factor::spin().labels {
                        return Err(Error::Format(format!("factor {k} is not a spin doublet")));
                    }
                    Factor::spin()
                }
                Atom::Level(lo) => {
                    let hi = lo + seen.len() as i64 - 1;
                    let f = Factor::window(lo, hi)?;
                    if f.labels != seen {
                        return Err(Error::Format(format!(
                            "factor {k} levels are not consecutive and ascending"
                        )));
                    }
                    f
                }
            };
            factors.push(factor);
        }
        let space = LabeledSpace { factors };
        if space.dim() != labels.len() || space.labels().zip(labels).any(|(a, b)| &a != b) {
            return Err(Error::Format("labels do not enumerate a product basis".into()));
        }
        Ok(space)
    }
}

/// A dense matrix with row = codomain label and column = domain label.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    domain: LabeledSpace,
    codomain: LabeledSpace,
    entries: Matrix,
}

impl LinearOperator {
    pub fn new(domain: LabeledSpace, codomain: LabeledSpace, entries: Matrix) -> Result<Self> {
        if entries.shape() != (codomain.dim(), domain.dim()) {
            return Err(Error::Shape(format!(
                "entries are {:?}, spaces need ({}, {})",
                entries.shape(),
                codomain.dim(),
                domain.dim()
            )));
        }
        Ok(LinearOperator {
            domain,
            codomain,
            entries,
        })
    }

    /// Square operator on one space.
    pub fn on(space: LabeledSpace, entries: Matrix) -> Result<Self> {
        Self::new(space.clone(), space, entries)
    }

    pub fn from_fn(domain: LabeledSpace, codomain: LabeledSpace, f: impl FnMut(usize, usize) -> C64) -> Self {
        let entries = Matrix::from_fn(codomain.dim(), domain.dim(), f);
        LinearOperator {
            domain,
            codomain,
            entries,
        }
    }

    pub fn zeros(domain: LabeledSpace, codomain: LabeledSpace) -> Self {
        let entries = Matrix::zeros(codomain.dim(), domain.dim());
        LinearOperator {
            domain,
            codomain,
            entries,
        }
    }

    pub fn identity(space: &LabeledSpace) -> Self {
        let n = space.dim();
        LinearOperator {
            domain: space.clone(),
            codomain: space.clone(),
            entries: Matrix::identity(n, n),
        }
    }

    /// Diagonal operator whose entry on each basis vector is `f(label)`.
    pub fn diagonal(space: &LabeledSpace, mut f: impl FnMut(&[Atom]) -> C64) -> Self {
        let n = space.dim();
        let mut entries = Matrix::zeros(n, n);
        for i in 0..n {
            entries[(i, i)] = f(&space.label(i));
        }
        LinearOperator {
            domain: space.clone(),
            codomain: space.clone(),
            entries,
        }
    }

    /// Operator `first ⊗ second → second ⊗ first`, `u⊗v ↦ v⊗u`.
    pub fn swap(first: &LabeledSpace, second: &LabeledSpace) -> Self {
        let (da, db) = (first.dim(), second.dim());
        let mut entries = Matrix::zeros(da * db, da * db);
        for ia in 0..da {
            for ib in 0..db {
                entries[(ib * da + ia, ia * db + ib)] = ONE;
            }
        }
        LinearOperator {
            domain: first.tensor(second),
            codomain: second.tensor(first),
            entries,
        }
    }

    pub fn domain(&self) -> &LabeledSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &LabeledSpace {
        &self.codomain
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_entries(self) -> Matrix {
        self.entries
    }

    pub fn is_square(&self) -> bool {
        self.domain == self.codomain
    }

    /// Matrix element `<row| A |col>` by label.
    pub fn element(&self, row: &[Atom], col: &[Atom]) -> Option<C64> {
        let r = self.codomain.index_of(row)?;
        let c = self.domain.index_of(col)?;
        Some(self.entries[(r, c)])
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &LinearOperator) -> Result<LinearOperator> {
        if self.domain != rhs.codomain {
            return Err(Error::Shape(
                "composition needs domain of the left factor to match codomain of the right".into(),
            ));
        }
        Ok(LinearOperator {
            domain: rhs.domain.clone(),
            codomain: self.codomain.clone(),
            entries: matmul(&self.entries, &rhs.entries),
        })
    }

    pub fn scale(&self, c: C64) -> LinearOperator {
        LinearOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: &self.entries * c,
        }
    }

    pub fn adjoint_spaces_transpose(&self) -> LinearOperator {
        LinearOperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            entries: self.entries.transpose(),
        }
    }

    pub fn tensor(&self, other: &LinearOperator) -> LinearOperator {
        LinearOperator {
            domain: self.domain.tensor(&other.domain),
            codomain: self.codomain.tensor(&other.codomain),
            entries: self.entries.kronecker(&other.entries),
        }
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.entries)
    }

    pub fn inverse(&self) -> Result<LinearOperator> {
        let inv = self
            .entries
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("operator inverse"))?;
        Ok(LinearOperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            entries: inv,
        })
    }

    /// `A⁻¹ B` via LU, without forming the inverse.
    pub fn solve(&self, rhs: &LinearOperator) -> Result<LinearOperator> {
        if self.codomain != rhs.codomain {
            return Err(Error::Shape("solve needs matching codomains".into()));
        }
        let x = self
            .entries
            .clone()
            .lu()
            .solve(&rhs.entries)
            .ok_or(Error::Singular("linear solve"))?;
        Ok(LinearOperator {
            domain: rhs.domain.clone(),
            codomain: self.domain.clone(),
            entries: x,
        })
    }

    pub fn commutator(&self, other: &LinearOperator) -> Result<LinearOperator> {
        Ok(&self.compose(other)? - &other.compose(self)?)
    }

    fn check_local(&self, full: &LabeledSpace, positions: &[usize]) -> Result<()> {
        if !self.is_square() || self.domain.num_factors() != positions.len() {
            return Err(Error::Shape(
                "a local operator must be square with one factor per position".into(),
            ));
        }
        for (k, &p) in positions.iter().enumerate() {
            if full.factor(p)? != &self.domain.factors[k] {
                return Err(Error::Shape(format!(
                    "local factor {k} does not match factor {p} of the full space"
                )));
            }
            if positions[..k].contains(&p) {
                return Err(Error::Shape(format!("factor {p} named twice")));
            }
        }
        Ok(())
    }

    /// Acts with `self` on the factors of `full` listed in `positions`
    /// (in that order) and with the identity on the rest.
    pub fn embed(&self, full: &LabeledSpace, positions: &[usize]) -> Result<LinearOperator> {
        self.check_local(full, positions)?;
        let n = full.dim();
        let dloc = self.domain.dim();
        let mut entries = Matrix::zeros(n, n);
        for col in 0..n {
            let multi = full.multi_index(col);
            let local: Vec<usize> = positions.iter().map(|&p| multi[p]).collect();
            let lc = self.domain.flat_index(&local);
            let mut target = multi.clone();
            for lr in 0..dloc {
                let v = self.entries[(lr, lc)];
                if v == ZERO {
                    continue;
                }
                for (k, &p) in positions.iter().zip(self.domain.multi_index(lr).iter()) {
                    target[*k] = p;
                }
                entries[(full.flat_index(&target), col)] = v;
            }
        }
        Ok(LinearOperator {
            domain: full.clone(),
            codomain: full.clone(),
            entries,
        })
    }

    /// `self ∘ embed(local)` without materializing the embedding.
    pub fn compose_local(&self, local: &LinearOperator, positions: &[usize]) -> Result<LinearOperator> {
        local.check_local(&self.domain, positions)?;
        let full = &self.domain;
        let n = full.dim();
        let dloc = local.domain.dim();
        let local_multi: Vec<Vec<usize>> = (0..dloc).map(|i| local.domain.multi_index(i)).collect();
        let mut out = Matrix::zeros(self.codomain.dim(), n);
        for col in 0..n {
            let multi = full.multi_index(col);
            let lc = local
                .domain
                .flat_index(&positions.iter().map(|&p| multi[p]).collect::<Vec<_>>());
            let mut target = multi.clone();
            for (lr, lm) in local_multi.iter().enumerate() {
                let v = local.entries[(lr, lc)];
                if v == ZERO {
                    continue;
                }
                for (&p, &i) in positions.iter().zip(lm) {
                    target[p] = i;
                }
                let src = full.flat_index(&target);
                let mut dst = out.column_mut(col);
                dst.axpy(v, &self.entries.column(src), ONE);
            }
        }
        Ok(LinearOperator {
            domain: full.clone(),
            codomain: self.codomain.clone(),
            entries: out,
        })
    }

    /// Transposes the indices of one factor only. Needs a square operator.
    pub fn partial_transpose(&self, factor: usize) -> Result<LinearOperator> {
        self.domain.factor(factor)?;
        if !self.is_square() {
            return Err(Error::Shape("partial transpose needs a square operator".into()));
        }
        let space = &self.domain;
        let n = space.dim();
        let mut entries = Matrix::zeros(n, n);
        for r in 0..n {
            let rm = space.multi_index(r);
            for c in 0..n {
                let mut rm2 = rm.clone();
                let mut cm2 = space.multi_index(c);
                std::mem::swap(&mut rm2[factor], &mut cm2[factor]);
                entries[(space.flat_index(&rm2), space.flat_index(&cm2))] = self.entries[(r, c)];
            }
        }
        Ok(LinearOperator {
            domain: space.clone(),
            codomain: space.clone(),
            entries,
        })
    }

    /// Contracts one factor. Needs a square operator with at least two factors.
    pub fn partial_trace(&self, factor: usize) -> Result<LinearOperator> {
        self.domain.factor(factor)?;
        if !self.is_square() || self.domain.num_factors() < 2 {
            return Err(Error::Shape(
                "partial trace needs a square operator on a product space".into(),
            ));
        }
        let space = &self.domain;
        let reduced = space.without(factor);
        let m = reduced.dim();
        let d = space.factors[factor].dim();
        let mut entries = Matrix::zeros(m, m);
        let lift = |i: usize, a: usize| {
            let mut multi = reduced.multi_index(i);
            multi.insert(factor, a);
            space.flat_index(&multi)
        };
        for r in 0..m {
            for c in 0..m {
                let mut acc = ZERO;
                for a in 0..d {
                    acc += self.entries[(lift(r, a), lift(c, a))];
                }
                entries[(r, c)] = acc;
            }
        }
        Ok(LinearOperator {
            domain: reduced.clone(),
            codomain: reduced,
            entries,
        })
    }

    /// Interior block: rows and columns restricted by `interior_indices(margin)`
    /// of the codomain and domain respectively.
    pub fn interior(&self, margin: usize) -> Result<Matrix> {
        let rows = self.codomain.interior_indices(margin);
        let cols = self.domain.interior_indices(margin);
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::EmptyInterior { margin });
        }
        Ok(Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.entries[(rows[i], cols[j])]
        }))
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Vec<[f64; 2]>> = self
            .entries
            .row_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        serde_json::to_value(MatrixJson {
            domain: self.domain.labels().map(|l| label_to_json(&l)).collect(),
            codomain: self.codomain.labels().map(|l| label_to_json(&l)).collect(),
            entries,
        })
        .expect("matrix JSON is always serializable")
    }

    pub fn from_json(value: &Value) -> Result<LinearOperator> {
        let raw: MatrixJson = serde_json::from_value(value.clone())?;
        let parse = |labels: &[Value]| -> Result<Vec<Vec<Atom>>> { labels.iter().map(label_from_json).collect() };
        let domain = LabeledSpace::from_labels(&parse(&raw.domain)?)?;
        let codomain = LabeledSpace::from_labels(&parse(&raw.codomain)?)?;
        if raw.entries.len() != codomain.dim() || raw.entries.iter().any(|row| row.len() != domain.dim()) {
            return Err(Error::Format("entry array does not match the label lists".into()));
        }
        let entries = Matrix::from_fn(codomain.dim(), domain.dim(), |r, c| {
            let [re, im] = raw.entries[r][c];
            C64::new(re, im)
        });
        LinearOperator::new(domain, codomain, entries)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    domain: Vec<Value>,
    codomain: Vec<Value>,
    entries: Vec<Vec<[f64; 2]>>,
}

fn atom_to_json(a: &Atom) -> Value {
    match a {
        Atom::Level(j) => Value::from(*j),
        Atom::Spin(_) => Value::from(a.to_string()),
    }
}

fn label_to_json(label: &[Atom]) -> Value {
    match label {
        [single] => atom_to_json(single),
        many => Value::Array(many.iter().map(atom_to_json).collect()),
    }
}

fn atom_from_json(v: &Value) -> Result<Atom> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(Atom::Level)
            .ok_or_else(|| Error::Format(format!("level {n} is not an integer"))),
        Value::String(s) if s == "+" => Ok(Atom::Spin(Spin::Up)),
        Value::String(s) if s == "-" => Ok(Atom::Spin(Spin::Down)),
        other => Err(Error::Format(format!("unrecognized label {other}"))),
    }
}

fn label_from_json(v: &Value) -> Result<Vec<Atom>> {
    match v {
        Value::Array(items) => items.iter().map(atom_from_json).collect(),
        atom => Ok(vec![atom_from_json(atom)?]),
    }
}

fn assert_same_spaces(a: &LinearOperator, b: &LinearOperator) {
    assert!(
        a.domain == b.domain && a.codomain == b.codomain,
        "operators act between different spaces"
    );
}

impl Add for &LinearOperator {
    type Output = LinearOperator;

    fn add(self, rhs: &LinearOperator) -> LinearOperator {
        assert_same_spaces(self, rhs);
        LinearOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &LinearOperator {
    type Output = LinearOperator;

    fn sub(self, rhs: &LinearOperator) -> LinearOperator {
        assert_same_spaces(self, rhs);
        LinearOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Neg for &LinearOperator {
    type Output = LinearOperator;

    fn neg(self) -> LinearOperator {
        self.scale(-ONE)
    }
}

/// Composition. Panics when the spaces do not chain; use
/// [`LinearOperator::compose`] for a fallible version.
impl Mul for &LinearOperator {
    type Output = LinearOperator;

    fn mul(self, rhs: &LinearOperator) -> LinearOperator {
        self.compose(rhs).expect("operator spaces do not chain")
    }
}

impl Mul<C64> for &LinearOperator {
    type Output = LinearOperator;

    fn mul(self, rhs: C64) -> LinearOperator {
        self.scale(rhs)
    }
}

fn nnz(m: &Matrix) -> usize {
    m.iter().filter(|z| **z != ZERO).count()
}

/// Matrix product that exploits sparsity of either factor (embedded local
/// operators have a few nonzeros per column) and otherwise splits into real
/// products, which nalgebra hands to an optimized kernel.
pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(k, b.nrows(), "inner dimensions differ");
    let mut out = Matrix::zeros(n, m);
    if n * k * m < 32 * 32 * 32 {
        a.mul_to(b, &mut out);
        return out;
    }
    if nnz(b) * 4 < k * m {
        for c in 0..m {
            for (i, z) in b.column(c).iter().enumerate() {
                if *z != ZERO {
                    out.column_mut(c).axpy(*z, &a.column(i), ONE);
                }
            }
        }
        return out;
    }
    if nnz(a) * 4 < n * k {
        for i in 0..k {
            for (r, z) in a.column(i).iter().enumerate() {
                if *z != ZERO {
                    for c in 0..m {
                        out[(r, c)] += *z * b[(i, c)];
                    }
                }
            }
        }
        return out;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    Matrix::from_fn(n, m, |r, c| C64::new(re[(r, c)], im[(r, c)]))
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    #[serde(rename = "abs")]
    pub absolute: f64,
    #[serde(rename = "rel")]
    pub relative: f64,
    pub margin: usize,
}

impl Residual {
    pub fn from_matrices(lhs: &Matrix, rhs: &Matrix, margin: usize) -> Residual {
        let absolute = frobenius(&(lhs - rhs));
        Residual {
            absolute,
            relative: absolute / frobenius(lhs).max(1.0),
            margin,
        }
    }

    /// Combines residuals of several pieces of one identity, as if their
    /// blocks had been stacked into a single matrix.
    pub fn stacked(parts: &[(Residual, f64)]) -> Residual {
        let abs2: f64 = parts.iter().map(|(r, _)| r.absolute.powi(2)).sum();
        let lhs2: f64 = parts.iter().map(|(_, n)| n.powi(2)).sum();
        let margin = parts.iter().map(|(r, _)| r.margin).max().unwrap_or(0);
        Residual {
            absolute: abs2.sqrt(),
            relative: abs2.sqrt() / lhs2.sqrt().max(1.0),
            margin,
        }
    }

    pub fn worst(self, other: Residual) -> Residual {
        if other.relative > self.relative {
            other
        } else {
            self
        }
    }
}

/// Frobenius residual of `lhs - rhs` restricted to the interior at `margin`.
pub fn interior_residual(lhs: &LinearOperator, rhs: &LinearOperator, margin: usize) -> Result<Residual> {
    if lhs.domain != rhs.domain || lhs.codomain != rhs.codomain {
        return Err(Error::Shape("residual needs operators on the same spaces".into()));
    }
    let l = lhs.interior(margin)?;
    let r = rhs.interior(margin)?;
    Ok(Residual::from_matrices(&l, &r, margin))
}

/// Residual with the interior Frobenius norm of the left side reported too,
/// for use with [`Residual::stacked`].
pub fn interior_residual_with_norm(
    lhs: &LinearOperator,
    rhs: &LinearOperator,
    margin: usize,
) -> Result<(Residual, f64)> {
    let res = interior_residual(lhs, rhs, margin)?;
    Ok((res, frobenius(&lhs.interior(margin)?)))
}

/// Least-squares scalar `c` minimizing `|a - c b|_F`, and the relative misfit.
pub fn fit_scalar(a: &Matrix, b: &Matrix) -> (C64, f64) {
    let bb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    if bb == 0.0 {
        return (ZERO, if frobenius(a) == 0.0 { 0.0 } else { 1.0 });
    }
    let ab: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let c = ab / bb;
    let misfit = frobenius(&(a - b * c)) / frobenius(a).max(f64::MIN_POSITIVE);
    (c, misfit)
}

/// Numerical rank from singular values above `rel_tol * σ_max`.
pub fn rank(m: &Matrix, rel_tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spin_op(m: [[f64; 2]; 2]) -> LinearOperator {
        LinearOperator::on(LabeledSpace::spin(), Matrix::from_fn(2, 2, |r, k| c(m[r][k], 0.0))).unwrap()
    }

    fn random_on(space: &LabeledSpace, rng: &mut ChaCha8Rng) -> LinearOperator {
        let n = space.dim();
        LinearOperator::on(
            space.clone(),
            Matrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
        )
        .unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let i2 = LinearOperator::identity(&LabeledSpace::spin());
        let i4 = i2.tensor(&i2);
        assert_eq!(i4.entries(), &Matrix::identity(4, 4));
        assert_eq!(i4.domain().num_factors(), 2);
    }

    #[test]
    fn swap_is_the_permutation_matrix() {
        let s = LabeledSpace::spin();
        let p = LinearOperator::swap(&s, &s);
        let up = Atom::Spin(Spin::Up);
        let dn = Atom::Spin(Spin::Down);
        let ones = [
            ([up, up], [up, up]),
            ([up, dn], [dn, up]),
            ([dn, up], [up, dn]),
            ([dn, dn], [dn, dn]),
        ];
        for (row, col) in ones {
            assert_eq!(p.element(&row, &col), Some(ONE));
        }
        assert_eq!(p.entries().iter().filter(|z| **z != ZERO).count(), 4);
    }

    #[test]
    fn mixed_product() {
        let sx = spin_op([[0.0, 1.0], [1.0, 0.0]]);
        let i2 = LinearOperator::identity(&LabeledSpace::spin());
        let lhs = &sx.tensor(&i2) * &i2.tensor(&sx);
        assert_eq!(lhs, sx.tensor(&sx));
    }

    #[test]
    fn tensor_label_order_first_slowest() {
        let space = LabeledSpace::new(vec![Factor::window(-1, 1).unwrap(), Factor::spin()]);
        assert_eq!(space.label(0), vec![Atom::Level(-1), Atom::Spin(Spin::Up)]);
        assert_eq!(space.label(1), vec![Atom::Level(-1), Atom::Spin(Spin::Down)]);
        assert_eq!(space.label(2), vec![Atom::Level(0), Atom::Spin(Spin::Up)]);
    }

    #[test]
    fn partial_transpose_factorized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_on(&LabeledSpace::single(Factor::window(0, 2).unwrap()), &mut rng);
        let b = random_on(&LabeledSpace::spin(), &mut rng);
        let ab = a.tensor(&b);
        assert_eq!(
            ab.partial_transpose(1).unwrap(),
            a.tensor(&b.adjoint_spaces_transpose())
        );
        assert_eq!(ab.partial_transpose(1).unwrap().partial_transpose(1).unwrap(), ab);
    }

    #[test]
    fn full_transpose_is_both_partial_transposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let space = LabeledSpace::spin().tensor(&LabeledSpace::spin());
        let m = random_on(&space, &mut rng);
        let both = m.partial_transpose(0).unwrap().partial_transpose(1).unwrap();
        assert_eq!(both.entries(), &m.entries().transpose());
    }

    #[test]
    fn partial_transpose_rejects_bad_factor() {
        let i = LinearOperator::identity(&LabeledSpace::spin());
        assert!(matches!(
            i.partial_transpose(1),
            Err(Error::FactorOutOfRange { index: 1, count: 1 })
        ));
        assert!(i.partial_trace(3).is_err());
    }

    #[test]
    fn partial_trace_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_on(&LabeledSpace::single(Factor::window(0, 2).unwrap()), &mut rng);
        let b = random_on(&LabeledSpace::spin(), &mut rng);
        let reduced = a.tensor(&b).partial_trace(1).unwrap();
        let expect = a.scale(b.trace());
        assert!(frobenius(&(reduced.entries() - expect.entries())) < 1e-14);

        let i4 = LinearOperator::identity(&LabeledSpace::spin().tensor(&LabeledSpace::spin()));
        assert_eq!(
            i4.partial_trace(1).unwrap().entries(),
            &(Matrix::identity(2, 2) * c(2.0, 0.0))
        );

        let space = LabeledSpace::new(vec![Factor::spin(), Factor::window(-1, 1).unwrap(), Factor::spin()]);
        let m = random_on(&space, &mut rng);
        for k in 0..3 {
            assert!((m.partial_trace(k).unwrap().trace() - m.trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn embed_matches_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = LabeledSpace::single(Factor::window(0, 3).unwrap());
        let s = LabeledSpace::spin();
        let full = w.tensor(&s).tensor(&s);
        let local = random_on(&w.tensor(&s), &mut rng);
        let on12 = local.embed(&full, &[0, 1]).unwrap();
        assert_eq!(on12, local.tensor(&LinearOperator::identity(&s)));

        // Acting on (0, 2) equals conjugating the (0, 1) embedding by the swap of 1 and 2.
        let swap12 = LinearOperator::identity(&w).tensor(&LinearOperator::swap(&s, &s));
        let on13 = local.embed(&full, &[0, 2]).unwrap();
        assert_eq!(on13, &(&swap12 * &on12) * &swap12);

        let m = random_on(&full, &mut rng);
        let fast = m.compose_local(&local, &[0, 2]).unwrap();
        assert!(frobenius(&(fast.entries() - (&m * &on13).entries())) < 1e-13);
    }

    #[test]
    fn interior_residual_cases() {
        let w = LabeledSpace::single(Factor::window(-3, 3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_on(&w, &mut rng);
        assert_eq!(interior_residual(&a, &a, 2).unwrap().relative, 0.0);

        let b = &a + &LinearOperator::identity(&w);
        let plain = Residual::from_matrices(a.entries(), b.entries(), 0);
        assert_eq!(interior_residual(&a, &b, 0).unwrap(), plain);

        // Violated only in the top row: passes at margin >= 1, fails at 0.
        let mut top = a.entries().clone();
        top[(6, 3)] += c(0.5, 0.0);
        let broken = LinearOperator::on(w.clone(), top).unwrap();
        assert!(interior_residual(&a, &broken, 0).unwrap().relative > 1e-3);
        assert_eq!(interior_residual(&a, &broken, 1).unwrap().absolute, 0.0);

        assert!(matches!(
            interior_residual(&a, &a, 4),
            Err(Error::EmptyInterior { margin: 4 })
        ));
    }

    #[test]
    fn closed_edges_are_never_trimmed() {
        let f = Factor::levels(0, 3, false, false).unwrap();
        let space = LabeledSpace::single(f);
        assert_eq!(space.interior_indices(3), vec![0, 1, 2, 3]);
        let hw = LabeledSpace::single(Factor::levels(-5, 2, true, false).unwrap());
        assert_eq!(hw.interior_indices(2), vec![2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn json_round_trip_and_rejects_garbage() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let space = LabeledSpace::new(vec![Factor::window(-2, 1).unwrap(), Factor::spin()]);
        let m = random_on(&space, &mut rng);
        let back = LinearOperator::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);

        let bad = serde_json::json!({"domain": [0, 2], "codomain": [0, 2], "entries": [[[0,0],[0,0]],[[0,0],[0,0]]]});
        assert!(LinearOperator::from_json(&bad).is_err());
    }

    #[test]
    fn matmul_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 48;
        let dense = Matrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let sparse = Matrix::from_fn(n, n, |r, k| if (r + 2 * k) % 7 == 0 { c(0.5, -1.0) } else { ZERO });
        for (a, b) in [(&dense, &dense), (&dense, &sparse), (&sparse, &dense)] {
            let fast = matmul(a, b);
            assert!(frobenius(&(fast - a * b)) < 1e-12);
        }
    }

    #[test]
    fn inverse_of_random_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let space = LabeledSpace::spin().tensor(&LabeledSpace::single(Factor::window(0, 4).unwrap()));
        let mut a = random_on(&space, &mut rng);
        a = &a + &LinearOperator::identity(&space).scale(c(3.0, 0.0));
        let prod = &a * &a.inverse().unwrap();
        let id = LinearOperator::identity(&space);
        assert!((&prod - &id).frobenius_norm() <= 1e-12);
    }
}
