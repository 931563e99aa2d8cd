//! Oscillator modules, the Borel action on W, evaluation modules and the
//! coproduct.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    fit_scalar, interior_residual, Factor, LabeledSpace, LinearOperator, Matrix, Residual, C64, ONE, ZERO,
};
use crate::report::{Check, VerificationReport};
use crate::{nonzero, qint};

pub const RELATION_TOL: f64 = 1e-11;
pub const V_RELATION_TOL: f64 = 1e-14;
pub const ISOMORPHISM_TOL: f64 = 1e-10;
pub const SERRE_MARGIN: usize = 4;

/// Which part of an oscillator module is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationSpec {
    /// Levels `jmin..=jmax` cut out of the infinite module.
    Window { jmin: i64, jmax: i64 },
    /// `floor..=n` where `a*|n> = 0`. Only the floor is an artificial edge.
    HighestWeight { n: i64, floor: i64 },
    /// The `n+1` levels `0..=n`, closed at both ends.
    FiniteSpin { n: u32 },
}

impl TruncationSpec {
    pub const MIN_WINDOW_WIDTH: i64 = 6;

    pub fn window(jmin: i64, jmax: i64) -> Result<Self> {
        let t = TruncationSpec::Window { jmin, jmax };
        t.validate()?;
        Ok(t)
    }

    pub fn highest_weight(n: i64) -> Self {
        TruncationSpec::HighestWeight { n, floor: n - 12 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TruncationSpec::Window { jmin, jmax } if jmax - jmin < Self::MIN_WINDOW_WIDTH => {
                Err(Error::InvalidTruncation(format!(
                    "window [{jmin},{jmax}] is narrower than {}",
                    Self::MIN_WINDOW_WIDTH
                )))
            }
            TruncationSpec::HighestWeight { n, floor } if floor >= n => Err(Error::InvalidTruncation(format!(
                "floor {floor} must lie below n = {n}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn range(&self) -> (i64, i64) {
        match *self {
            TruncationSpec::Window { jmin, jmax } => (jmin, jmax),
            TruncationSpec::HighestWeight { n, floor } => (floor, n),
            TruncationSpec::FiniteSpin { n } => (0, n as i64),
        }
    }

    pub fn levels(&self) -> Vec<i64> {
        let (lo, hi) = self.range();
        (lo..=hi).collect()
    }

    pub fn dim(&self) -> usize {
        let (lo, hi) = self.range();
        (hi - lo + 1) as usize
    }

    pub fn factor(&self) -> Result<Factor> {
        let (lo, hi) = self.range();
        match self {
            TruncationSpec::Window { .. } => Factor::levels(lo, hi, true, true),
            TruncationSpec::HighestWeight { .. } => Factor::levels(lo, hi, true, false),
            TruncationSpec::FiniteSpin { .. } => Factor::levels(lo, hi, false, false),
        }
    }

    pub fn space(&self) -> Result<LabeledSpace> {
        Ok(LabeledSpace::single(self.factor()?))
    }
}

impl fmt::Display for TruncationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationSpec::Window { jmin, jmax } => write!(f, "window:{jmin}:{jmax}"),
            TruncationSpec::HighestWeight { n, floor } => write!(f, "hw:{n}:{floor}"),
            TruncationSpec::FiniteSpin { n } => write!(f, "spin:{n}"),
        }
    }
}

impl FromStr for TruncationSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidTruncation(format!("cannot parse `{s}` (window:A:B | hw:N[:FLOOR] | spin:N)"));
        let parts: Vec<&str> = s.split(':').collect();
        let int = |p: &str| p.trim().parse::<i64>().map_err(|_| bad());
        let spec = match parts.as_slice() {
            ["window", a, b] => TruncationSpec::Window {
                jmin: int(a)?,
                jmax: int(b)?,
            },
            ["hw", n] => TruncationSpec::highest_weight(int(n)?),
            ["hw", n, floor] => TruncationSpec::HighestWeight {
                n: int(n)?,
                floor: int(floor)?,
            },
            ["spin", n] => TruncationSpec::FiniteSpin {
                n: u32::try_from(int(n)?).map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for TruncationSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReprParams {
    pub q: C64,
    pub zeta: C64,
    pub r: [C64; 3],
    pub trunc: TruncationSpec,
}

impl ReprParams {
    pub fn new(q: C64, zeta: C64, r: [C64; 3], trunc: TruncationSpec) -> Result<Self> {
        let p = ReprParams { q, zeta, r, trunc };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        nonzero("q = 0", self.q)?;
        nonzero("q^2 = 1", ONE - self.q * self.q)?;
        nonzero("r0 = 0", self.r[0])?;
        self.trunc.validate()?;
        let coeff = |j: i64| a_star_coefficient(self.q, self.r[1], self.r[2], j);
        let closes = |j: i64| {
            let scale = self
                .q
                .powi(-2 * j as i32)
                .norm()
                .max(self.q.powi(2 * j as i32).norm())
                .max(1.0);
            coeff(j).norm() <= 1e-9 * scale * scale
        };
        match self.trunc {
            TruncationSpec::HighestWeight { n, .. } if !closes(n) => Err(Error::InvalidTruncation(format!(
                "hw:{n} needs r1 = -q^(-2n) or r2 = -q^(2n)"
            ))),
            TruncationSpec::FiniteSpin { n } if !(closes(n as i64) && closes(-1)) => Err(Error::InvalidTruncation(
                format!("spin:{n} needs r = (q^n, -q^(-2n), -q^(-2)) or (q^n, -q^2, -q^(2n))"),
            )),
            _ => Ok(()),
        }
    }

    pub fn with_zeta(&self, zeta: C64) -> Self {
        ReprParams { zeta, ..self.clone() }
    }

    pub fn with_r(&self, r: [C64; 3]) -> Result<Self> {
        ReprParams::new(self.q, self.zeta, r, self.trunc)
    }

    pub fn space(&self) -> Result<LabeledSpace> {
        self.trunc.space()
    }
}

/// `(r1 + q^-2j)(r2 + q^2j)`, the coefficient in `a*|j> = coeff |j+1>`.
pub fn a_star_coefficient(q: C64, r1: C64, r2: C64, j: i64) -> C64 {
    let j = j as i32;
    (r1 + q.powi(-2 * j)) * (r2 + q.powi(2 * j))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiniteSpinSign {
    /// `r = (q^n, -q^-2n, -q^-2)`, isomorphic to `V^(n)` at `zeta q^-(n+1)/2`.
    Minus,
    /// `r = (q^n, -q^2, -q^2n)`, isomorphic to `V^(n)` at `zeta q^(n+1)/2`.
    Plus,
}

impl FiniteSpinSign {
    pub const BOTH: [FiniteSpinSign; 2] = [FiniteSpinSign::Minus, FiniteSpinSign::Plus];

    pub fn r(self, n: u32, q: C64) -> [C64; 3] {
        let n = n as i32;
        match self {
            FiniteSpinSign::Minus => [q.powi(n), -q.powi(-2 * n), -q.powi(-2)],
            FiniteSpinSign::Plus => [q.powi(n), -q.powi(2), -q.powi(2 * n)],
        }
    }

    /// Factor multiplying zeta on the `V^(n)` side (principal branch).
    pub fn zeta_shift(self, n: u32, q: C64) -> C64 {
        let e = (n as f64 + 1.0) / 2.0;
        match self {
            FiniteSpinSign::Minus => q.powf(-e),
            FiniteSpinSign::Plus => q.powf(e),
        }
    }
}

impl fmt::Display for FiniteSpinSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FiniteSpinSign::Minus => "-",
            FiniteSpinSign::Plus => "+",
        })
    }
}

/// `a`, `a*` and `q^(±D)` on a truncated oscillator module.
#[derive(Clone, Debug)]
pub struct OscillatorOps {
    pub q: C64,
    pub r1: C64,
    pub r2: C64,
    pub levels: Vec<i64>,
    pub space: LabeledSpace,
    pub a: LinearOperator,
    pub a_star: LinearOperator,
    pub q_d: LinearOperator,
    pub q_d_inv: LinearOperator,
}

impl OscillatorOps {
    pub fn new(q: C64, r1: C64, r2: C64, trunc: &TruncationSpec) -> Result<Self> {
        let space = trunc.space()?;
        let levels = trunc.levels();
        let n = levels.len();
        let a = LinearOperator::from_fn(
            space.clone(),
            space.clone(),
            |row, col| {
                if row + 1 == col {
                    ONE
                } else {
                    ZERO
                }
            },
        );
        let a_star = LinearOperator::from_fn(space.clone(), space.clone(), |row, col| {
            if row == col + 1 && row < n {
                a_star_coefficient(q, r1, r2, levels[col])
            } else {
                ZERO
            }
        });
        let mut ops = OscillatorOps {
            q,
            r1,
            r2,
            levels,
            a,
            a_star,
            q_d: LinearOperator::identity(&space),
            q_d_inv: LinearOperator::identity(&space),
            space,
        };
        ops.q_d = ops.q_pow_d(1);
        ops.q_d_inv = ops.q_pow_d(-1);
        Ok(ops)
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Diagonal operator `f(D)`.
    pub fn diag(&self, f: impl Fn(i64) -> C64) -> LinearOperator {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for (k, &j) in self.levels.iter().enumerate() {
            m[(k, k)] = f(j);
        }
        LinearOperator::on(self.space.clone(), m).expect("diagonal has the module's shape")
    }

    /// `q^(kD)`.
    pub fn q_pow_d(&self, k: i32) -> LinearOperator {
        let q = self.q;
        self.diag(|j| q.powi(k * j as i32))
    }

    pub fn identity(&self) -> LinearOperator {
        LinearOperator::identity(&self.space)
    }

    pub fn zeros(&self) -> LinearOperator {
        LinearOperator::zeros(self.space.clone(), self.space.clone())
    }
}

pub fn build_oscillator_ops(params: &ReprParams) -> Result<OscillatorOps> {
    OscillatorOps::new(params.q, params.r[1], params.r[2], &params.trunc)
}

fn residual(lhs: &LinearOperator, rhs: &LinearOperator, margin: usize) -> Result<Residual> {
    interior_residual(lhs, rhs, margin)
}

pub fn check_oscillator_relations(ops: &OscillatorOps) -> Result<VerificationReport> {
    let q = ops.q;
    let (r1, r2) = (ops.r1, ops.r2);
    let mut report = VerificationReport::new();
    let conj = |x: &LinearOperator| &(&ops.q_d * x) * &ops.q_d_inv;
    report.push(Check::new(
        "oscillator.qD_astar",
        "q^D a* q^-D = q a*",
        residual(&conj(&ops.a_star), &ops.a_star.scale(q), 1)?,
        RELATION_TOL,
    ));
    report.push(Check::new(
        "oscillator.qD_a",
        "q^D a q^-D = q^-1 a",
        residual(&conj(&ops.a), &ops.a.scale(q.inv()), 1)?,
        RELATION_TOL,
    ));
    let aa = ops.diag(|j| (r1 + q.powi(-2 * j as i32)) * (r2 + q.powi(2 * j as i32)));
    report.push(Check::new(
        "oscillator.a_astar",
        "a a* = (r1 + q^-2D)(r2 + q^2D)",
        residual(&(&ops.a * &ops.a_star), &aa, 1)?,
        RELATION_TOL,
    ));
    let aa = ops.diag(|j| (r1 + q.powi(2 - 2 * j as i32)) * (r2 + q.powi(2 * j as i32 - 2)));
    report.push(Check::new(
        "oscillator.astar_a",
        "a* a = (r1 + q^(2-2D))(r2 + q^(2D-2))",
        residual(&(&ops.a_star * &ops.a), &aa, 1)?,
        RELATION_TOL,
    ));
    Ok(report)
}

/// The conventional q-oscillator relations reached at `r1 = 0` or `r2 = 0`.
pub fn check_q_oscillator_limit(ops: &OscillatorOps) -> Result<VerificationReport> {
    let q2 = ops.q * ops.q;
    let one = ops.identity().scale(ONE - q2);
    let aas = &ops.a * &ops.a_star;
    let asa = &ops.a_star * &ops.a;
    let mut report = VerificationReport::new();
    if ops.r1 == ZERO {
        report.push(Check::new(
            "oscillator.limit_r1",
            "a* a = q^2 a a* + 1 - q^2",
            residual(&asa, &(&aas.scale(q2) + &one), 1)?,
            RELATION_TOL,
        ));
    }
    if ops.r2 == ZERO {
        report.push(Check::new(
            "oscillator.limit_r2",
            "a a* = q^2 a* a + 1 - q^2",
            residual(&aas, &(&asa.scale(q2) + &one), 1)?,
            RELATION_TOL,
        ));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    E0,
    E1,
    F0,
    F1,
    T0,
    T1,
}

impl Generator {
    pub const ALL: [Generator; 6] = [
        Generator::E0,
        Generator::E1,
        Generator::F0,
        Generator::F1,
        Generator::T0,
        Generator::T1,
    ];
    pub const BOREL: [Generator; 4] = [Generator::E0, Generator::E1, Generator::T0, Generator::T1];

    pub fn index(self) -> usize {
        match self {
            Generator::E0 | Generator::F0 | Generator::T0 => 0,
            Generator::E1 | Generator::F1 | Generator::T1 => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::E0 => "e0",
            Generator::E1 => "e1",
            Generator::F0 => "f0",
            Generator::F1 => "f1",
            Generator::T0 => "t0",
            Generator::T1 => "t1",
        }
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::UnknownGenerator(s.to_string()))
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Images of the Chevalley generators on one module.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub q: C64,
    pub space: LabeledSpace,
    pub e: [LinearOperator; 2],
    pub t: [LinearOperator; 2],
    pub f: Option<[LinearOperator; 2]>,
}

impl GeneratorSet {
    pub fn get(&self, g: Generator) -> Result<&LinearOperator> {
        let i = g.index();
        match g {
            Generator::E0 | Generator::E1 => Ok(&self.e[i]),
            Generator::T0 | Generator::T1 => Ok(&self.t[i]),
            Generator::F0 | Generator::F1 => self.f.as_ref().map(|f| &f[i]).ok_or(Error::MissingGenerator(g.name())),
        }
    }

    /// `t_i^-1`; the t's are invertible diagonals.
    pub fn t_inv(&self, i: usize) -> LinearOperator {
        let t = &self.t[i];
        let m = Matrix::from_fn(t.entries().nrows(), t.entries().ncols(), |r, k| {
            if r == k {
                t.entries()[(r, r)].inv()
            } else {
                ZERO
            }
        });
        LinearOperator::on(self.space.clone(), m).expect("same shape")
    }

    pub fn identity(&self) -> LinearOperator {
        LinearOperator::identity(&self.space)
    }
}

/// The Borel module `W^(r)_zeta`.
pub fn build_borel_w(params: &ReprParams) -> Result<GeneratorSet> {
    let ops = build_oscillator_ops(params)?;
    let q = params.q;
    let s = params.zeta / (q - q.inv());
    let r0 = params.r[0];
    Ok(GeneratorSet {
        q,
        space: ops.space.clone(),
        e: [ops.a_star.scale(s), ops.a.scale(s)],
        t: [ops.q_pow_d(2).scale(r0.inv()), ops.q_pow_d(-2).scale(r0)],
        f: None,
    })
}

fn two_by_two(m: [[C64; 2]; 2]) -> LinearOperator {
    LinearOperator::on(LabeledSpace::spin(), Matrix::from_fn(2, 2, |r, k| m[r][k])).expect("2x2")
}

/// The principal evaluation module `V_zeta`, basis `(v+, v-)`.
pub fn build_evaluation_v(zeta: C64, q: C64) -> Result<GeneratorSet> {
    let zi = nonzero("zeta = 0 in f_i", zeta)?.inv();
    let o = ZERO;
    Ok(GeneratorSet {
        q,
        space: LabeledSpace::spin(),
        e: [two_by_two([[o, o], [zeta, o]]), two_by_two([[o, zeta], [o, o]])],
        t: [two_by_two([[q.inv(), o], [o, q]]), two_by_two([[q, o], [o, q.inv()]])],
        f: Some([two_by_two([[o, zi], [o, o]]), two_by_two([[o, o], [zi, o]])]),
    })
}

/// Spin-n/2 evaluation module on `u_0..u_n`, Borel part only:
/// `e1 u_k = zeta [k] u_(k-1)`, `e0 u_k = zeta [n-k] u_(k+1)`, `t1 u_k = q^(n-2k) u_k`.
pub fn build_spin_module(n: u32, zeta: C64, q: C64) -> Result<GeneratorSet> {
    let space = LabeledSpace::single(Factor::levels(0, n as i64, false, false)?);
    let d = n as usize + 1;
    let ni = n as i32;
    let e1 = Matrix::from_fn(d, d, |r, k| if r + 1 == k { zeta * qint(k as i32, q) } else { ZERO });
    let e0 = Matrix::from_fn(d, d, |r, k| {
        if r == k + 1 {
            zeta * qint(ni - k as i32, q)
        } else {
            ZERO
        }
    });
    let t1 = Matrix::from_fn(d, d, |r, k| if r == k { q.powi(ni - 2 * k as i32) } else { ZERO });
    let t0 = Matrix::from_fn(d, d, |r, k| if r == k { q.powi(2 * k as i32 - ni) } else { ZERO });
    Ok(GeneratorSet {
        q,
        e: [
            LinearOperator::on(space.clone(), e0)?,
            LinearOperator::on(space.clone(), e1)?,
        ],
        t: [
            LinearOperator::on(space.clone(), t0)?,
            LinearOperator::on(space.clone(), t1)?,
        ],
        f: None,
        space,
    })
}

fn cartan(i: usize, j: usize) -> i32 {
    if i == j {
        2
    } else {
        -2
    }
}

/// `t_i x_j t_i^-1 = q^(±a_ij) x_j` for every e (and f, when present), and
/// `t0 t1 = t1 t0`.
fn check_t_conjugations(gens: &GeneratorSet, tol: f64) -> Result<VerificationReport> {
    let q = gens.q;
    let mut report = VerificationReport::new();
    for i in 0..2 {
        let ti = &gens.t[i];
        let ti_inv = gens.t_inv(i);
        for j in 0..2 {
            let a = cartan(i, j);
            let lhs = &(ti * &gens.e[j]) * &ti_inv;
            report.push(Check::new(
                format!("relations.t{i}e{j}"),
                format!("t{i} e{j} t{i}^-1 = q^{a} e{j}"),
                residual(&lhs, &gens.e[j].scale(q.powi(a)), 1)?,
                tol,
            ));
            if let Some(f) = &gens.f {
                let lhs = &(ti * &f[j]) * &ti_inv;
                report.push(Check::new(
                    format!("relations.t{i}f{j}"),
                    format!("t{i} f{j} t{i}^-1 = q^{} f{j}", -a),
                    residual(&lhs, &f[j].scale(q.powi(-a)), 1)?,
                    tol,
                ));
            }
        }
    }
    report.push(Check::new(
        "relations.t0t1",
        "t0 t1 = t1 t0",
        residual(&(&gens.t[0] * &gens.t[1]), &(&gens.t[1] * &gens.t[0]), 0)?,
        tol,
    ));
    Ok(report)
}

/// Both Serre relations for the e's. The positive and negative terms are
/// compared against each other so the relative residual is meaningful.
pub fn check_serre(gens: &GeneratorSet) -> Result<VerificationReport> {
    serre_for(gens, &gens.e, "e", RELATION_TOL)
}

fn serre_for(gens: &GeneratorSet, x: &[LinearOperator; 2], name: &str, tol: f64) -> Result<VerificationReport> {
    let q3 = qint(3, gens.q);
    let mut report = VerificationReport::new();
    for (i, j) in [(0, 1), (1, 0)] {
        let (xi, xj) = (&x[i], &x[j]);
        let xj2 = xj * xj;
        let xj3 = &xj2 * xj;
        let pos = &(xi * &xj3) + &(&(&xj2 * xi) * xj).scale(q3);
        let neg = &(&(xj * xi) * &xj2).scale(q3) + &(&xj3 * xi);
        report.push(Check::new(
            format!("serre.{name}{i}{name}{j}"),
            format!("{name}{i} {name}{j}^3 - [3] {name}{j} {name}{i} {name}{j}^2 + [3] {name}{j}^2 {name}{i} {name}{j} - {name}{j}^3 {name}{i} = 0"),
            residual(&pos, &neg, SERRE_MARGIN)?,
            tol,
        ));
    }
    Ok(report)
}

/// t-conjugations and Serre relations of the Borel subalgebra.
pub fn check_borel_relations(gens: &GeneratorSet) -> Result<VerificationReport> {
    let mut report = check_t_conjugations(gens, RELATION_TOL)?;
    report.extend(check_serre(gens)?);
    Ok(report)
}

/// Full relation set on a module carrying f's, including
/// `[e_i, f_j] = delta_ij (t_i - t_i^-1)/(q - q^-1)` and the f Serre relations.
pub fn check_uq_relations(gens: &GeneratorSet) -> Result<VerificationReport> {
    let f = gens.f.as_ref().ok_or(Error::MissingGenerator("f0"))?;
    let q = gens.q;
    let mut report = check_t_conjugations(gens, V_RELATION_TOL)?;
    for i in 0..2 {
        for (j, fj) in f.iter().enumerate() {
            let comm = gens.e[i].commutator(fj)?;
            let rhs = if i == j {
                (&gens.t[i] - &gens.t_inv(i)).scale((q - q.inv()).inv())
            } else {
                LinearOperator::zeros(gens.space.clone(), gens.space.clone())
            };
            report.push(Check::new(
                format!("relations.e{i}f{j}"),
                format!("[e{i}, f{j}] = delta (t{i} - t{i}^-1)/(q - q^-1)"),
                residual(&comm, &rhs, 1)?,
                V_RELATION_TOL,
            ));
        }
    }
    report.extend(serre_for(gens, &gens.e, "e", V_RELATION_TOL)?);
    report.extend(serre_for(gens, f, "f", V_RELATION_TOL)?);
    Ok(report)
}

/// `(Delta(x), Delta'(x))` on `left ⊗ right`, with
/// `Delta(e) = e⊗1 + t⊗e`, `Delta(f) = f⊗t^-1 + 1⊗f`, `Delta(t) = t⊗t`, and
/// `Delta'` the flipped coproduct.
pub fn build_coproduct(
    x: Generator,
    left: &GeneratorSet,
    right: &GeneratorSet,
) -> Result<(LinearOperator, LinearOperator)> {
    let i = x.index();
    let (il, ir) = (left.identity(), right.identity());
    let pair =
        |a: &LinearOperator, b: &LinearOperator, c: &LinearOperator, d: &LinearOperator| &a.tensor(b) + &c.tensor(d);
    Ok(match x {
        Generator::E0 | Generator::E1 => {
            let (el, er) = (left.get(x)?, right.get(x)?);
            (pair(el, &ir, &left.t[i], er), pair(el, &right.t[i], &il, er))
        }
        Generator::F0 | Generator::F1 => {
            let (fl, fr) = (left.get(x)?, right.get(x)?);
            (pair(fl, &right.t_inv(i), &il, fr), pair(&left.t_inv(i), fr, fl, &ir))
        }
        Generator::T0 | Generator::T1 => {
            let d = left.t[i].tensor(&right.t[i]);
            (d.clone(), d)
        }
    })
}

/// Solution of `Phi x_W = x_V Phi` for all Borel generators at once.
#[derive(Clone, Debug)]
pub struct Isomorphism {
    pub phi: LinearOperator,
    /// Number of singular values below `1e-8` of the largest.
    pub nullity: usize,
    pub smallest_singular_values: Vec<f64>,
    pub residual: Residual,
}

pub fn solve_isomorphism(w: &GeneratorSet, v: &GeneratorSet) -> Result<Isomorphism> {
    let (dw, dv) = (w.space.dim(), v.space.dim());
    let id_w = Matrix::identity(dw, dw);
    let id_v = Matrix::identity(dv, dv);
    let mut stacked = Matrix::zeros(4 * dw * dv, dw * dv);
    for (k, g) in Generator::BOREL.into_iter().enumerate() {
        let x = w.get(g)?.entries();
        let y = v.get(g)?.entries();
        let block = x.transpose().kronecker(&id_v) - id_w.kronecker(y);
        stacked.view_mut((k * dw * dv, 0), (dw * dv, dw * dv)).copy_from(&block);
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::Singular("isomorphism SVD"))?;
    let mut sv: Vec<(f64, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    sv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let largest = sv.last().map(|s| s.0).unwrap_or(0.0);
    let (smallest, row) = sv[0];
    if smallest > 1e-6 * largest.max(1.0) {
        return Err(Error::NoIntertwiner { smallest });
    }
    let nullity = sv.iter().filter(|s| s.0 <= 1e-8 * largest.max(1.0)).count();
    let vec: Vec<C64> = v_t.row(row).iter().map(|z| z.conj()).collect();
    let mut phi = Matrix::from_column_slice(dv, dw, &vec);
    let (_, pivot) = phi.iter().fold(
        (0.0, ONE),
        |(m, p), z| if z.norm() > m { (z.norm(), *z) } else { (m, p) },
    );
    phi /= pivot;
    let phi = LinearOperator::new(w.space.clone(), v.space.clone(), phi)?;
    let mut parts = Vec::new();
    for g in Generator::BOREL {
        let lhs = &phi * w.get(g)?;
        let rhs = v.get(g)? * &phi;
        let res = Residual::from_matrices(lhs.entries(), rhs.entries(), 0);
        parts.push((res, lhs.frobenius_norm()));
    }
    Ok(Isomorphism {
        phi,
        nullity,
        smallest_singular_values: sv.iter().take(3).map(|s| s.0).collect(),
        residual: Residual::stacked(&parts),
    })
}

/// The finite truncation `spin:n` of `W^(r)_zeta` for the chosen sign.
pub fn finite_spin_params(n: u32, sign: FiniteSpinSign, q: C64, zeta: C64) -> Result<ReprParams> {
    ReprParams::new(q, zeta, sign.r(n, q), TruncationSpec::FiniteSpin { n })
}

/// Solves for the map from the `spin:n` truncation of W onto `V^(n)` at the
/// shifted spectral parameter and checks it is unique and invertible.
pub fn check_finite_truncation_isomorphism(
    n: u32,
    sign: FiniteSpinSign,
    q: C64,
    zeta: C64,
) -> Result<(Isomorphism, VerificationReport)> {
    let params = finite_spin_params(n, sign, q, zeta)?;
    let w = build_borel_w(&params)?;
    let v = build_spin_module(n, zeta * sign.zeta_shift(n, q), q)?;
    let iso = solve_isomorphism(&w, &v)?;
    let mut report = VerificationReport::new();
    let tag = format!("isomorphism.n{n}{sign}");
    report.push(Check::new(
        tag.clone(),
        format!(
            "Phi x_W = x_V Phi on spin:{n} truncation, V^({n}) at zeta q^({}(n+1)/2)",
            if sign == FiniteSpinSign::Minus { "-" } else { "" }
        ),
        iso.residual,
        ISOMORPHISM_TOL,
    ));
    // Uniqueness reported as a pass/fail residual: 0 when the null space is one-dimensional.
    let unique = if iso.nullity == 1 { 0.0 } else { 1.0 };
    report.push(Check::new(
        format!("{tag}.nullity"),
        "dim of intertwiner space = 1",
        Residual {
            absolute: (iso.nullity as f64 - 1.0).abs(),
            relative: unique,
            margin: 0,
        },
        ISOMORPHISM_TOL,
    ));
    Ok((iso, report))
}

/// On a wider window, `{j <= -1}` is a submodule and nothing above `n` is
/// reached from `{j <= n}`, so `0..=n` is a quotient module.
pub fn check_finite_spin_closure(n: u32, sign: FiniteSpinSign, q: C64, zeta: C64) -> Result<Check> {
    let trunc = TruncationSpec::Window {
        jmin: -3,
        jmax: n as i64 + 3,
    };
    let params = ReprParams {
        q,
        zeta,
        r: sign.r(n, q),
        trunc,
    };
    let w = build_borel_w(&params)?;
    let levels = trunc.levels();
    let mut leak = 0.0;
    let mut scale: f64 = 0.0;
    for e in &w.e {
        let m = e.entries();
        for (col, &jc) in levels.iter().enumerate() {
            for (row, &jr) in levels.iter().enumerate() {
                let z = m[(row, col)].norm_sqr();
                scale = scale.max(z.sqrt());
                let escapes_top = jc <= n as i64 && jr > n as i64;
                let escapes_sub = jc <= -1 && jr >= 0;
                if escapes_top || escapes_sub {
                    leak += z;
                }
            }
        }
    }
    let leak = leak.sqrt();
    Ok(Check::new(
        format!("isomorphism.n{n}{sign}.closure"),
        "a*|n> = 0 and a*|-1> = 0",
        Residual {
            absolute: leak,
            relative: leak / scale.max(1.0),
            margin: 0,
        },
        ISOMORPHISM_TOL,
    ))
}

/// Scalar `c` with `a ≈ c b` and the relative misfit, on full operators.
pub fn proportionality(a: &LinearOperator, b: &LinearOperator) -> (C64, f64) {
    fit_scalar(a.entries(), b.entries())
}
