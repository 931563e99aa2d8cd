//! The series `h(zeta, v)` and the defect–defect intertwiners on `W⊗W`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::intertwiners::build_l;
use crate::linalg::{fit_scalar, interior_residual, Atom, LabeledSpace, LinearOperator, Residual, C64, ONE, ZERO};
use crate::nonzero;
use crate::report::{Check, VerificationReport};
use crate::repr::{OscillatorOps, ReprParams, TruncationSpec};

pub const H_SCALAR_TOL: f64 = 1e-12;
pub const DEFECT_TOL: f64 = 1e-9;
pub const DEFECT_MARGIN: usize = 3;

const MAX_TERMS: usize = 20_000;

/// `c_n = (-q^-1)^n prod_{m=1..n} (zeta^-1 q^(m-1) - zeta q^(1-m)) / (q^m - q^-m)`, `c_0 = 1`.
pub fn h_coefficients(zeta: C64, q: C64, n_max: usize) -> Result<Vec<C64>> {
    let zi = nonzero("zeta = 0", zeta)?.inv();
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(ONE);
    for m in 1..=n_max as i32 {
        let den = nonzero("q^m = q^-m", q.powi(m) - q.powi(-m))?;
        let next = c[c.len() - 1] * (-q.inv()) * (zi * q.powi(m - 1) - zeta * q.powi(1 - m)) / den;
        c.push(next);
    }
    Ok(c)
}

/// `sum_n c_n v^n`, summed until the terms drop below roundoff.
pub fn h_series(zeta: C64, v: C64, q: C64) -> Result<C64> {
    if v == ZERO {
        return Ok(ONE);
    }
    let zi = nonzero("zeta = 0", zeta)?.inv();
    let mut coeff = ONE;
    let mut vp = ONE;
    let mut sum = ONE;
    let mut small = 0;
    let mut last = 1.0;
    // Ratio of consecutive coefficients, scaled by q^(+-m) so that no power
    // of q overflows on long runs.
    let small_q = q.norm() <= 1.0;
    for m in 1..MAX_TERMS as i32 {
        let ratio = if small_q {
            let q2m = q.powi(2 * m);
            -q.inv() * (zi * q2m * q.inv() - zeta * q) / nonzero("q^2m = 1", q2m - ONE)?
        } else {
            let qi2m = q.powi(-2 * m);
            -q.inv() * (zi * q.inv() - zeta * qi2m * q) / nonzero("q^2m = 1", ONE - qi2m)?
        };
        coeff *= ratio;
        vp *= v;
        let term = coeff * vp;
        sum += term;
        last = term.norm();
        if !last.is_finite() {
            break;
        }
        if last <= 1e-17 * sum.norm().max(1.0) {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Convergence { terms: MAX_TERMS, last })
}

/// `(a; b)_inf`, truncated once `|a b^k| < 1e-16`.
pub fn q_pochhammer(a: C64, b: C64) -> Result<C64> {
    if b.norm() >= 1.0 {
        return Err(Error::InvalidParams("(a; b)_inf needs |b| < 1".into()));
    }
    let mut p = ONE;
    let mut ab = a;
    for _ in 0..MAX_TERMS {
        if ab.norm() < 1e-16 {
            return Ok(p);
        }
        p *= ONE - ab;
        ab *= b;
    }
    Err(Error::Convergence {
        terms: MAX_TERMS,
        last: ab.norm(),
    })
}

/// `(-v/zeta; q^2)_inf / (-v zeta; q^2)_inf`, valid for `|q| < 1`, `|v zeta| < 1`.
pub fn h_product(zeta: C64, v: C64, q: C64) -> Result<C64> {
    if q.norm() >= 1.0 {
        return Err(Error::InvalidParams("the product form of h needs |q| < 1".into()));
    }
    if (v * zeta).norm() >= 1.0 {
        return Err(Error::InvalidParams("the product form of h needs |v zeta| < 1".into()));
    }
    let q2 = q * q;
    let num = q_pochhammer(-v / nonzero("zeta = 0", zeta)?, q2)?;
    let den = nonzero("(-v zeta; q^2) = 0", q_pochhammer(-v * zeta, q2)?)?;
    Ok(num / den)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HValue {
    pub series: C64,
    /// `None` outside the region where the product form applies.
    pub product: Option<C64>,
}

pub fn eval_h_scalar(zeta: C64, v: C64, q: C64) -> Result<HValue> {
    let series = h_series(zeta, v, q)?;
    let product = if q.norm() < 1.0 && (v * zeta).norm() < 1.0 {
        Some(h_product(zeta, v, q)?)
    } else {
        None
    };
    Ok(HValue { series, product })
}

fn scalar_residual(a: C64, b: C64) -> Residual {
    let absolute = (a - b).norm();
    Residual {
        absolute,
        relative: absolute / a.norm().max(1.0),
        margin: 0,
    }
}

/// Series against product on a 5×5 grid of `(zeta, v)` with `|v zeta| < 1`.
pub fn check_h_series_vs_product(q: C64) -> Result<Check> {
    let mut worst = scalar_residual(ONE, ONE);
    for a in 0..5 {
        let zeta = C64::from_polar(0.35 + 0.15 * a as f64, 0.4 * a as f64);
        for b in 0..5 {
            let v = C64::from_polar(0.1 + 0.17 * b as f64, -0.7 * b as f64 + 0.2);
            let h = eval_h_scalar(zeta, v, q)?;
            let p = h
                .product
                .ok_or(Error::InvalidParams("grid point outside the product region".into()))?;
            worst = worst.worst(scalar_residual(h.series, p));
        }
    }
    Ok(Check::new(
        "defect.h_series_product",
        "sum c_n v^n = (-v/zeta; q^2)_inf / (-v zeta; q^2)_inf",
        worst,
        H_SCALAR_TOL,
    ))
}

/// `h(zeta, v)(1 + zeta v) = h(zeta, q^2 v)(1 + v/zeta)`.
pub fn check_functional_equation_scalar(zeta: C64, v: C64, q: C64) -> Result<Check> {
    let lhs = h_series(zeta, v, q)? * (ONE + zeta * v);
    let rhs = h_series(zeta, q * q * v, q)? * (ONE + v / zeta);
    Ok(Check::new(
        "defect.functional_equation_scalar",
        "h(zeta, v)(1 + zeta v) = h(zeta, q^2 v)(1 + zeta^-1 v)",
        scalar_residual(lhs, rhs),
        H_SCALAR_TOL,
    ))
}

/// `sum_{n <= n_max} c_n w^n`.
pub fn h_operator(zeta: C64, w: &LinearOperator, q: C64, n_max: usize) -> Result<LinearOperator> {
    let c = h_coefficients(zeta, q, n_max)?;
    let id = LinearOperator::identity(w.domain());
    // Horner: (((c_n w + c_{n-1}) w + ...) w + c_0)
    let mut acc = id.scale(c[n_max]);
    for k in (0..n_max).rev() {
        acc = &(&acc * w) + &id.scale(c[k]);
    }
    Ok(acc)
}

/// Which of `r1`, `r2` vanishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DefectCase {
    /// `r1 = 0`: `R = P h(zeta, u'/r0) zeta^-(D1+D2)` with `u' = a1 q^2D1 a2*`.
    R1Zero,
    /// `r2 = 0`: `R = P h(zeta, r0 u) zeta^(D1+D2)` with `u = a1* q^-2D1 a2`.
    R2Zero,
}

impl DefectCase {
    pub const BOTH: [DefectCase; 2] = [DefectCase::R1Zero, DefectCase::R2Zero];

    fn zero_index(self) -> usize {
        match self {
            DefectCase::R1Zero => 1,
            DefectCase::R2Zero => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DefectCase::R1Zero => "r1zero",
            DefectCase::R2Zero => "r2zero",
        }
    }
}

impl fmt::Display for DefectCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DefectCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r1zero" => Ok(DefectCase::R1Zero),
            "r2zero" => Ok(DefectCase::R2Zero),
            other => Err(Error::InvalidParams(format!(
                "unknown defect case `{other}` (r1zero | r2zero)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DefectIntertwiner {
    pub case: DefectCase,
    pub zeta: C64,
    /// The nilpotent shift operator `u` or `u'` on `W⊗W`.
    pub shift: LinearOperator,
    pub op: LinearOperator,
}

/// `u = a1* q^-2D1 a2` (case r2 = 0) or `u' = a1 q^2D1 a2*` (case r1 = 0).
pub fn shift_operator(case: DefectCase, ops: &OscillatorOps) -> LinearOperator {
    match case {
        DefectCase::R2Zero => (&ops.a_star * &ops.q_pow_d(-2)).tensor(&ops.a),
        DefectCase::R1Zero => (&ops.a * &ops.q_pow_d(2)).tensor(&ops.a_star),
    }
}

/// Builds the intertwiner for `L^(r)(zeta1)` and `L^(r)(zeta2)`, `zeta = zeta1/zeta2`.
pub fn build_defect_intertwiner(
    case: DefectCase,
    params1: &ReprParams,
    params2: &ReprParams,
) -> Result<DefectIntertwiner> {
    if params1.q != params2.q || params1.r != params2.r || params1.trunc != params2.trunc {
        return Err(Error::InvalidParams(
            "both defects must share q, r and the truncation".into(),
        ));
    }
    if params1.r[case.zero_index()] != ZERO {
        return Err(Error::CaseMismatch {
            case: case.name(),
            needs: match case {
                DefectCase::R1Zero => "r1 = 0",
                DefectCase::R2Zero => "r2 = 0",
            },
        });
    }
    let q = params1.q;
    let r0 = params1.r[0];
    let zeta = params1.zeta / nonzero("zeta2 = 0", params2.zeta)?;
    nonzero("zeta = 0", zeta)?;
    let ops = OscillatorOps::new(q, params1.r[1], params1.r[2], &params1.trunc)?;
    let u = shift_operator(case, &ops);
    let (w, sign) = match case {
        DefectCase::R2Zero => (u.scale(r0), 1),
        DefectCase::R1Zero => (u.scale(r0.inv()), -1),
    };
    let h = h_operator(zeta, &w, q, ops.dim())?;
    let space = ops.space.tensor(&ops.space);
    let zpow = LinearOperator::diagonal(&space, |label| match label {
        [Atom::Level(j1), Atom::Level(j2)] => zeta.powi(sign * (j1 + j2) as i32),
        _ => unreachable!("W⊗W labels are level pairs"),
    });
    let p = LinearOperator::swap(&ops.space, &ops.space);
    Ok(DefectIntertwiner {
        case,
        zeta,
        shift: u,
        op: &(&p * &h) * &zpow,
    })
}

/// `R12 L13(zeta1) L23(zeta2)` and `L23(zeta2) L13(zeta1) R12` on `W⊗W⊗C^2`.
pub fn defect_rll_sides(
    r12: &LinearOperator,
    params1: &ReprParams,
    params2: &ReprParams,
) -> Result<(LinearOperator, LinearOperator)> {
    let w = params1.space()?;
    let full = w.tensor(&w).tensor(&LabeledSpace::spin());
    let l13 = build_l(params1)?.op.embed(&full, &[0, 2])?;
    let l23 = build_l(params2)?.op.embed(&full, &[1, 2])?;
    let r = r12.embed(&full, &[0, 1])?;
    Ok((&(&r * &l13) * &l23, &(&l23 * &l13) * &r))
}

pub fn check_rll_defect(case: DefectCase, params1: &ReprParams, params2: &ReprParams) -> Result<Check> {
    let r = build_defect_intertwiner(case, params1, params2)?;
    let (lhs, rhs) = defect_rll_sides(&r.op, params1, params2)?;
    Ok(Check::new(
        format!("defect.rll.{case}"),
        "R12(z1/z2) L1(z1) L2(z2) = L2(z2) L1(z1) R12(z1/z2)",
        interior_residual(&lhs, &rhs, DEFECT_MARGIN)?,
        DEFECT_TOL,
    ))
}

/// The (+,+) entry of the auxiliary product `L1(z1) L2(z2)`:
/// `(q^D1 + r2 z1^2 q^(2-D1))(q^D2 + r2 z2^2 q^(2-D2)) + z1 z2 r0 a1* q^-D1 a2 q^D2`.
pub fn check_ll_sample_entry(params1: &ReprParams, params2: &ReprParams) -> Result<Check> {
    let w = params1.space()?;
    let full = w.tensor(&w).tensor(&LabeledSpace::spin());
    let l13 = build_l(params1)?.op.embed(&full, &[0, 2])?;
    let l23 = build_l(params2)?.op.embed(&full, &[1, 2])?;
    let prod = &l13 * &l23;
    let ww = w.tensor(&w);
    let n = ww.dim();
    let block = LinearOperator::on(
        ww.clone(),
        crate::linalg::Matrix::from_fn(n, n, |a, b| prod.entries()[(2 * a, 2 * b)]),
    )?;
    let ops = OscillatorOps::new(params1.q, params1.r[1], params1.r[2], &params1.trunc)?;
    let (q, r0, r2) = (params1.q, params1.r[0], params1.r[2]);
    let (z1, z2) = (params1.zeta, params2.zeta);
    let diag = |z: C64| &ops.q_d + &ops.diag(|j| q.powi(2 - j as i32)).scale(r2 * z * z);
    let expect = &diag(z1).tensor(&diag(z2))
        + &(&ops.a_star * &ops.q_d_inv)
            .tensor(&(&ops.a * &ops.q_d))
            .scale(z1 * z2 * r0);
    Ok(Check::new(
        "defect.ll_sample_entry",
        "(L1 L2)_{++} = (q^D1 + r2 z1^2 q^(2-D1))(q^D2 + r2 z2^2 q^(2-D2)) + z1 z2 r0 a1* q^-D1 a2 q^D2",
        interior_residual(&block, &expect, 0)?,
        DEFECT_TOL,
    ))
}

/// Norm of the entries that change `j1 + j2`.
pub fn check_block_diagonal(r: &DefectIntertwiner) -> Check {
    let space = r.op.domain();
    let total = |i: usize| -> i64 {
        space
            .label(i)
            .iter()
            .map(|a| match a {
                Atom::Level(j) => *j,
                Atom::Spin(_) => 0,
            })
            .sum()
    };
    let totals: Vec<i64> = (0..space.dim()).map(total).collect();
    let mut bad = 0.0;
    for (row, &tr) in totals.iter().enumerate() {
        for (col, &tc) in totals.iter().enumerate() {
            if tr != tc {
                bad += r.op.entries()[(row, col)].norm_sqr();
            }
        }
    }
    let bad = f64::sqrt(bad);
    Check::new(
        format!("defect.block_diagonal.{}", r.case),
        "R preserves j1 + j2",
        Residual {
            absolute: bad,
            relative: bad / r.op.frobenius_norm().max(1.0),
            margin: 0,
        },
        0.0,
    )
}

/// `h(zeta, w)(1 + zeta w) = h(zeta, q^2 w)(1 + zeta^-1 w)` for the nilpotent
/// operator argument used by the intertwiner.
pub fn check_functional_equation_operator(case: DefectCase, params: &ReprParams, zeta: C64) -> Result<Check> {
    let ops = OscillatorOps::new(params.q, params.r[1], params.r[2], &params.trunc)?;
    let q = params.q;
    let u = shift_operator(case, &ops);
    let w = match case {
        DefectCase::R2Zero => u.scale(params.r[0]),
        DefectCase::R1Zero => u.scale(params.r[0].inv()),
    };
    let w = balance_partial_permutation(&w)?;
    let n = ops.dim() + 1;
    let id = LinearOperator::identity(w.domain());
    let lhs = &h_operator(zeta, &w, q, n)? * &(&id + &w.scale(zeta));
    let rhs = &h_operator(zeta, &w.scale(q * q), q, n)? * &(&id + &w.scale(zeta.inv()));
    Ok(Check::new(
        format!("defect.functional_equation_operator.{case}"),
        "h(zeta, w)(1 + zeta w) = h(zeta, q^2 w)(1 + zeta^-1 w)",
        interior_residual(&lhs, &rhs, 0)?,
        DEFECT_TOL,
    ))
}

/// `D w D^-1` with `D` diagonal and every nonzero entry of the result of
/// modulus one. `w` must have at most one nonzero entry per row and column.
/// The functional equation is invariant under the similarity, and the
/// balanced form avoids comparing entries that span tens of decades.
fn balance_partial_permutation(w: &LinearOperator) -> Result<LinearOperator> {
    let m = w.entries();
    let dim = m.nrows();
    let mut target = vec![None; dim];
    let mut has_source = vec![false; dim];
    for c in 0..dim {
        for r in 0..dim {
            if m[(r, c)] != ZERO {
                if target[c].is_some() || has_source[r] {
                    return Err(Error::InvalidParams("operator is not a partial permutation".into()));
                }
                target[c] = Some(r);
                has_source[r] = true;
            }
        }
    }
    let mut d = vec![1.0; dim];
    for start in (0..dim).filter(|&k| !has_source[k]) {
        let mut c = start;
        while let Some(r) = target[c] {
            d[r] = d[c] / m[(r, c)].norm();
            c = r;
        }
    }
    let mut balanced = m.clone();
    for c in 0..dim {
        if let Some(r) = target[c] {
            balanced[(r, c)] *= d[r] / d[c];
        }
    }
    LinearOperator::new(w.domain().clone(), w.codomain().clone(), balanced)
}

/// On the highest-weight special case the shift operator never leaves the
/// closed top edge (`a*|n> = 0`), so its series terminates. Checked on a
/// window that extends past `n`.
pub fn check_nilpotency(case: DefectCase, q: C64, n: i64) -> Result<Check> {
    let r = match case {
        DefectCase::R2Zero => [ONE, -q.powi(-2 * n as i32), ZERO],
        DefectCase::R1Zero => [ONE, ZERO, -q.powi(2 * n as i32)],
    };
    let trunc = TruncationSpec::Window {
        jmin: n - 6,
        jmax: n + 3,
    };
    let ops = OscillatorOps::new(q, r[1], r[2], &trunc)?;
    let u = shift_operator(case, &ops);
    // The factor carrying a* is 1 for u and 2 for u'.
    let raised = match case {
        DefectCase::R2Zero => 0,
        DefectCase::R1Zero => 1,
    };
    let space = u.domain();
    let mut leak = 0.0;
    let mut scale: f64 = 0.0;
    for col in 0..space.dim() {
        let lc = space.label(col);
        for row in 0..space.dim() {
            let z = u.entries()[(row, col)];
            scale = scale.max(z.norm());
            let lr = space.label(row);
            if let (Atom::Level(jc), Atom::Level(jr)) = (lc[raised], lr[raised]) {
                if jc <= n && jr > n {
                    leak += z.norm_sqr();
                }
            }
        }
    }
    let leak = leak.sqrt();
    Ok(Check::new(
        format!("defect.nilpotent.{case}"),
        "u, u' terminate on the highest-weight truncation",
        Residual {
            absolute: leak,
            relative: leak / scale.max(1.0),
            margin: 0,
        },
        DEFECT_TOL,
    ))
}

/// At `r1 = r2 = 0` both constructions solve the relation; they are not
/// proportional.
pub fn check_both_candidates(params1: &ReprParams, params2: &ReprParams) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    for case in DefectCase::BOTH {
        let mut c = check_rll_defect(case, params1, params2)?;
        c.identity = format!("defect.candidate.{case}");
        report.push(c);
    }
    report.push(check_candidates_independent(params1, params2)?);
    Ok(report)
}

/// Relative misfit of the best scalar fit `R1 ≈ c R2` on the interior;
/// passes when the misfit exceeds 0.1.
pub fn check_candidates_independent(params1: &ReprParams, params2: &ReprParams) -> Result<Check> {
    let a = build_defect_intertwiner(DefectCase::R1Zero, params1, params2)?.op;
    let b = build_defect_intertwiner(DefectCase::R2Zero, params1, params2)?.op;
    let (_, misfit) = fit_scalar(&a.interior(DEFECT_MARGIN)?, &b.interior(DEFECT_MARGIN)?);
    Ok(independence_check("defect.candidates_independent", misfit))
}

/// Encodes "misfit > 0.1" as a residual that passes at tolerance 0.1.
pub(crate) fn independence_check(identity: &str, misfit: f64) -> Check {
    let score = 0.1 / misfit.max(f64::MIN_POSITIVE) * 0.1;
    Check::new(
        identity,
        "min_c |R1 - c R2| / |R1| > 0.1",
        Residual {
            absolute: misfit,
            relative: score,
            margin: DEFECT_MARGIN,
        },
        0.1,
    )
    .pinned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn balancing_is_a_unimodular_similarity() {
        let t = TruncationSpec::window(-6, 6).unwrap();
        let ops = OscillatorOps::new(cx(0.25, 0.1), ZERO, cx(0.4, -0.3), &t).unwrap();
        let w = shift_operator(DefectCase::R1Zero, &ops);
        let b = balance_partial_permutation(&w).unwrap();
        let nonzero = |m: &crate::linalg::Matrix| m.iter().map(|z| *z != ZERO).collect::<Vec<_>>();
        assert_eq!(nonzero(w.entries()), nonzero(b.entries()));
        assert!(b.entries().iter().all(|z| *z == ZERO || (z.norm() - 1.0).abs() < 1e-12));
        let dense = &LinearOperator::identity(w.domain()) + &w;
        assert!(balance_partial_permutation(&dense).is_err());
    }

    fn pair(r: [C64; 3], z1: C64, z2: C64) -> (ReprParams, ReprParams) {
        let t = TruncationSpec::window(-6, 6).unwrap();
        let q = cx(0.5, 0.0);
        (
            ReprParams::new(q, z1, r, t).unwrap(),
            ReprParams::new(q, z2, r, t).unwrap(),
        )
    }

    #[test]
    fn h_head_and_first_order() {
        let (z, q) = (cx(0.8, 0.1), cx(0.5, 0.2));
        assert_eq!(h_series(z, ZERO, q).unwrap(), ONE);
        let c = h_coefficients(z, q, 1).unwrap();
        let expect = -(z.inv() - z) / (q * (q - q.inv()));
        assert!((c[1] - expect).norm() < 1e-15);
        let v = cx(1e-4, 0.0);
        let h = h_series(z, v, q).unwrap();
        assert!((h - (ONE + expect * v)).norm() < 1e-7);
        assert!((h_product(ONE, cx(0.3, 0.1), q).unwrap() - ONE).norm() < 1e-15);
    }

    #[test]
    fn series_matches_product_on_grid() {
        for q in [cx(0.5, 0.0), cx(0.3, 0.4), cx(-0.6, 0.1)] {
            let c = check_h_series_vs_product(q).unwrap();
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn functional_equation_scalar_example() {
        let c = check_functional_equation_scalar(cx(0.8, 0.0), cx(0.3, 0.0), cx(0.5, 0.0)).unwrap();
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn divergent_region_is_reported() {
        let q = cx(0.5, 0.0);
        assert!(matches!(
            h_series(cx(2.0, 0.0), cx(0.9, 0.0), q),
            Err(Error::Convergence { .. })
        ));
        assert!(h_product(cx(2.0, 0.0), cx(0.9, 0.0), q).is_err());
        assert!(eval_h_scalar(cx(0.5, 0.0), cx(0.5, 0.0), q).unwrap().product.is_some());
    }

    #[test]
    fn rll_both_cases() {
        let (z1, z2) = (cx(0.9, 0.0), cx(0.6, 0.0));
        let (p1, p2) = pair([cx(1.3, 0.0), cx(0.4, 0.0), ZERO], z1, z2);
        assert!(check_rll_defect(DefectCase::R2Zero, &p1, &p2).unwrap().passed());
        let (p1, p2) = pair([cx(1.3, 0.0), ZERO, cx(0.4, 0.0)], z1, z2);
        assert!(check_rll_defect(DefectCase::R1Zero, &p1, &p2).unwrap().passed());
        assert!(matches!(
            check_rll_defect(DefectCase::R2Zero, &p1, &p2),
            Err(Error::CaseMismatch { .. })
        ));
    }

    #[test]
    fn wrong_zeta_power_fails() {
        let (p1, p2) = pair([cx(1.3, 0.0), cx(0.4, 0.0), ZERO], cx(0.9, 0.0), cx(0.6, 0.0));
        let r = build_defect_intertwiner(DefectCase::R2Zero, &p1, &p2).unwrap();
        let space = r.op.domain().clone();
        let z = r.zeta;
        let flip = LinearOperator::diagonal(&space, |l| match l {
            [Atom::Level(a), Atom::Level(b)] => z.powi(-2 * (a + b) as i32),
            _ => ONE,
        });
        let (lhs, rhs) = defect_rll_sides(&(&r.op * &flip), &p1, &p2).unwrap();
        assert!(interior_residual(&lhs, &rhs, DEFECT_MARGIN).unwrap().relative > 1e-3);
    }

    #[test]
    fn structure_and_sample_entry() {
        let (p1, p2) = pair([cx(1.3, 0.0), cx(0.4, 0.0), ZERO], cx(0.9, 0.0), cx(0.6, 0.0));
        let r = build_defect_intertwiner(DefectCase::R2Zero, &p1, &p2).unwrap();
        assert_eq!(check_block_diagonal(&r).residual.absolute, 0.0);
        // At the corner |jmin>⊗|jmax>, u annihilates and R acts as P zeta^(D1+D2).
        let col = [Atom::Level(6), Atom::Level(-6)];
        let got = r.op.element(&[Atom::Level(-6), Atom::Level(6)], &col).unwrap();
        assert!((got - ONE).norm() < 1e-12);
        let (p1, p2) = pair([cx(1.3, 0.0), cx(0.4, 0.0), cx(0.2, 0.0)], cx(0.9, 0.0), cx(0.6, 0.0));
        assert!(check_ll_sample_entry(&p1, &p2).unwrap().passed());
    }

    #[test]
    fn operator_functional_equation_and_nilpotency() {
        let (p1, _) = pair([cx(1.3, 0.0), cx(0.4, 0.0), ZERO], cx(0.9, 0.0), cx(0.6, 0.0));
        for case in DefectCase::BOTH {
            let c = check_functional_equation_operator(case, &p1, cx(1.5, 0.0)).unwrap();
            assert!(c.passed(), "{c:?}");
            let c = check_nilpotency(case, cx(0.5, 0.1), 2).unwrap();
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn both_candidates_at_r_zero() {
        let (p1, p2) = pair([cx(1.3, 0.0), ZERO, ZERO], cx(0.9, 0.0), cx(0.6, 0.0));
        let rep = check_both_candidates(&p1, &p2).unwrap();
        assert_eq!(rep.len(), 3);
        assert!(rep.passed(), "{:?}", rep.checks);
    }
}
