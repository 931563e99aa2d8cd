//! The R-matrix on V⊗V and the L-operator on W⊗V.

use crate::error::{Error, Result};
use crate::linalg::{
    fit_scalar, interior_residual, Atom, LabeledSpace, LinearOperator, Matrix, Residual, Spin, C64, ONE, ZERO,
};
use crate::nonzero;
use crate::report::{Check, VerificationReport};
use crate::repr::{
    build_borel_w, build_coproduct, build_evaluation_v, build_oscillator_ops, build_spin_module, finite_spin_params,
    solve_isomorphism, FiniteSpinSign, Generator, OscillatorOps, ReprParams,
};

pub const RBAR_TOL: f64 = 1e-12;
pub const L_TOL: f64 = 1e-10;
pub const YB_MARGIN: usize = 2;

/// `Rbar(zeta)` on `V⊗V` in the basis `++, +-, -+, --`.
#[derive(Clone, Debug)]
pub struct RMatrix {
    pub zeta: C64,
    pub q: C64,
    pub op: LinearOperator,
}

fn spin2() -> LabeledSpace {
    LabeledSpace::spin().tensor(&LabeledSpace::spin())
}

fn four_by_four(m: [[C64; 4]; 4]) -> LinearOperator {
    LinearOperator::on(spin2(), Matrix::from_fn(4, 4, |r, k| m[r][k])).expect("4x4")
}

/// Middle-block weights `(b, c)` of `Rbar`.
pub fn rbar_weights(zeta: C64, q: C64) -> Result<(C64, C64)> {
    let d = nonzero("q^2 zeta^2 = 1", ONE - q * q * zeta * zeta)?;
    Ok(((ONE - zeta * zeta) * q / d, (ONE - q * q) * zeta / d))
}

pub fn build_rbar(zeta: C64, q: C64) -> Result<RMatrix> {
    let (b, c) = rbar_weights(zeta, q)?;
    let (o, i) = (ZERO, ONE);
    let op = four_by_four([[i, o, o, o], [o, b, c, o], [o, c, b, o], [o, o, o, i]]);
    Ok(RMatrix { zeta, q, op })
}

/// `dRbar/dzeta`.
pub fn rbar_derivative(zeta: C64, q: C64) -> Result<LinearOperator> {
    let d = nonzero("q^2 zeta^2 = 1", ONE - q * q * zeta * zeta)?;
    let q2 = q * q;
    let b = 2.0 * q * zeta * (q2 - ONE) / (d * d);
    let c = (ONE - q2) * (ONE + q2 * zeta * zeta) / (d * d);
    let o = ZERO;
    Ok(four_by_four([[o, o, o, o], [o, b, c, o], [o, c, b, o], [o, o, o, o]]))
}

/// The flip `P(u⊗v) = v⊗u` on `V⊗V`.
pub fn permutation() -> LinearOperator {
    LinearOperator::swap(&LabeledSpace::spin(), &LabeledSpace::spin())
}

pub fn sigma_x() -> LinearOperator {
    LinearOperator::on(
        LabeledSpace::spin(),
        Matrix::from_fn(2, 2, |r, k| if r != k { ONE } else { ZERO }),
    )
    .expect("2x2")
}

fn sigma_z_of(a: Atom) -> i64 {
    match a {
        Atom::Spin(s) => s.sign(),
        Atom::Level(j) => -2 * j,
    }
}

/// Total charge `sum sigma^z - 2 sum D` of a basis label.
pub fn charge(label: &[Atom]) -> i64 {
    label.iter().copied().map(sigma_z_of).sum()
}

/// Entries that change the total charge `sum sigma^z - 2D`; their norm
/// is zero for R and L (spin conservation / the selection rule).
pub fn check_ice_rule(identity: &str, op: &LinearOperator) -> Check {
    let dom = op.domain();
    let cod = op.codomain();
    let mut bad = 0.0;
    for r in 0..cod.dim() {
        let qr = charge(&cod.label(r));
        for k in 0..dom.dim() {
            if charge(&dom.label(k)) != qr {
                bad += op.entries()[(r, k)].norm_sqr();
            }
        }
    }
    let bad = bad.sqrt();
    Check::new(
        identity,
        "entries vanish unless charge is conserved",
        Residual {
            absolute: bad,
            relative: bad / op.frobenius_norm().max(1.0),
            margin: 0,
        },
        0.0,
    )
}

/// `Rbar(z1/z2) Delta(x) = Delta'(x) Rbar(z1/z2)` on `V_z1 ⊗ V_z2` for all
/// six generators.
pub fn check_rbar_intertwining(zeta1: C64, zeta2: C64, q: C64) -> Result<VerificationReport> {
    let r = build_rbar(zeta1 / nonzero("zeta2 = 0", zeta2)?, q)?.op;
    let v1 = build_evaluation_v(zeta1, q)?;
    let v2 = build_evaluation_v(zeta2, q)?;
    let mut report = VerificationReport::new();
    for x in Generator::ALL {
        let (d, dp) = build_coproduct(x, &v1, &v2)?;
        report.push(Check::new(
            format!("rbar_intertwining.{x}"),
            "Rbar Delta(x) = Delta'(x) Rbar",
            interior_residual(&(&r * &d), &(&dp * &r), 0)?,
            RBAR_TOL,
        ));
    }
    Ok(report)
}

/// L-operator on `W⊗C^2`, with its parameters.
#[derive(Clone, Debug)]
pub struct LOperator {
    pub params: ReprParams,
    pub op: LinearOperator,
}

fn spin_unit(row: usize, col: usize) -> LinearOperator {
    LinearOperator::on(
        LabeledSpace::spin(),
        Matrix::from_fn(2, 2, |r, k| if (r, k) == (row, col) { ONE } else { ZERO }),
    )
    .expect("2x2")
}

/// Assembles `[[pp, pm], [mp, mm]]` on `W⊗C^2`, where the block row is the
/// outgoing spin.
pub fn spin_blocks(
    pp: &LinearOperator,
    pm: &LinearOperator,
    mp: &LinearOperator,
    mm: &LinearOperator,
) -> LinearOperator {
    let mut out = pp.tensor(&spin_unit(0, 0));
    for (m, (r, k)) in [(pm, (0, 1)), (mp, (1, 0)), (mm, (1, 1))] {
        out = &out + &m.tensor(&spin_unit(r, k));
    }
    out
}

/// Block `(row, col)` of an operator on `W⊗C^2`, as an operator on W.
pub fn spin_block(op: &LinearOperator, row: Spin, col: Spin) -> Result<LinearOperator> {
    let w = LabeledSpace::single(op.domain().factor(0)?.clone());
    let n = w.dim();
    let m = Matrix::from_fn(n, n, |a, b| op.entries()[(2 * a + row.index(), 2 * b + col.index())]);
    LinearOperator::on(w, m)
}

fn l_from_ops(ops: &OscillatorOps, zeta: C64, r: [C64; 3]) -> LinearOperator {
    let q = ops.q;
    let z2 = zeta * zeta;
    let id = ops.identity();
    let pp = &(&id + &ops.q_pow_d(-2).scale(r[2] * z2 * q * q)) * &ops.q_d;
    let pm = (&ops.a_star * &ops.q_d_inv).scale(-zeta * r[0]);
    let mp = (&ops.a * &ops.q_d).scale(-zeta);
    let mm = (&(&id + &ops.q_pow_d(2).scale(r[1] * z2)) * &ops.q_d_inv).scale(r[0]);
    spin_blocks(&pp, &pm, &mp, &mm)
}

/// `L(zeta) = [[1 + r2 zeta^2 q^(2-2D), -zeta a*], [-zeta a, 1 + r1 zeta^2 q^2D]] diag(q^D, r0 q^-D)`.
pub fn build_l(params: &ReprParams) -> Result<LOperator> {
    let ops = build_oscillator_ops(params)?;
    Ok(LOperator {
        params: params.clone(),
        op: l_from_ops(&ops, params.zeta, params.r),
    })
}

/// The closed-form inverse of `L(zeta)`.
pub fn build_l_inverse(params: &ReprParams) -> Result<LOperator> {
    let ops = build_oscillator_ops(params)?;
    let (zeta, r) = (params.zeta, params.r);
    let z2 = zeta * zeta;
    let pre = ONE / nonzero("zeta^2 = 1", ONE - z2)? / nonzero("zeta^2 r1 r2 = 1", ONE - z2 * r[1] * r[2])?;
    let id = ops.identity();
    let q2 = ops.q * ops.q;
    let pp = &ops.q_d_inv * &(&id + &ops.q_pow_d(2).scale(r[1] * z2 / q2));
    let pm = (&ops.q_d_inv * &ops.a_star).scale(zeta);
    let mp = (&ops.q_d * &ops.a).scale(zeta / r[0]);
    let mm = (&ops.q_d * &(&id + &ops.q_pow_d(-2).scale(r[2] * z2))).scale(r[0].inv());
    Ok(LOperator {
        params: params.clone(),
        op: spin_blocks(&pp, &pm, &mp, &mm).scale(pre),
    })
}

/// `L(z1/z2) Delta(x) = Delta'(x) L(z1/z2)` on `W^(r)_z1 ⊗ V_z2` for the
/// Borel generators. `params.zeta` is `z1`.
pub fn check_l_intertwining(params: &ReprParams, zeta2: C64) -> Result<VerificationReport> {
    let zeta1 = params.zeta;
    let l = build_l(&params.with_zeta(zeta1 / nonzero("zeta2 = 0", zeta2)?))?.op;
    let w = build_borel_w(params)?;
    let v = build_evaluation_v(zeta2, params.q)?;
    let mut report = VerificationReport::new();
    for x in Generator::BOREL {
        let (d, dp) = build_coproduct(x, &w, &v)?;
        report.push(Check::new(
            format!("l_intertwining.{x}"),
            "L Delta(x) = Delta'(x) L",
            interior_residual(&(&l * &d), &(&dp * &l), YB_MARGIN)?,
            L_TOL,
        ));
    }
    Ok(report)
}

pub fn check_l_inverse(params: &ReprParams) -> Result<VerificationReport> {
    let l = build_l(params)?.op;
    let li = build_l_inverse(params)?.op;
    let id = LinearOperator::identity(l.domain());
    let mut report = VerificationReport::new();
    report.push(Check::new(
        "l_inverse.left",
        "L^-1 L = 1",
        interior_residual(&(&li * &l), &id, 1)?,
        L_TOL,
    ));
    report.push(Check::new(
        "l_inverse.right",
        "L L^-1 = 1",
        interior_residual(&(&l * &li), &id, 1)?,
        L_TOL,
    ));
    Ok(report)
}

/// `X(M) = (sigma^x M sigma^x)^t2` on `W⊗C^2`. X is an involution.
pub fn crossing_map(op: &LinearOperator) -> Result<LinearOperator> {
    let w = LabeledSpace::single(op.domain().factor(0)?.clone());
    let sx = LinearOperator::identity(&w).tensor(&sigma_x());
    (&(&sx * op) * &sx).partial_transpose(1)
}

/// `1/(r0 (1 - zeta^2 q^2)(1 - zeta^2 q^2 r1 r2))`.
pub fn crossing_prefactor(params: &ReprParams) -> Result<C64> {
    let (q, z, r) = (params.q, params.zeta, params.r);
    let zq2 = z * z * q * q;
    Ok(
        ONE / (r[0]
            * nonzero("zeta^2 q^2 = 1", ONE - zq2)?
            * nonzero("zeta^2 q^2 r1 r2 = 1", ONE - zq2 * r[1] * r[2])?),
    )
}

/// `L^-1(-zeta q) = X(L(zeta)) / (r0 (1 - zeta^2 q^2)(1 - zeta^2 q^2 r1 r2))`
/// and its inverted form `L(zeta) = X(L^-1(-zeta q)) r0 (1 - ...)(1 - ...)`.
pub fn check_crossing(params: &ReprParams) -> Result<VerificationReport> {
    let k = crossing_prefactor(params)?;
    let l = build_l(params)?.op;
    let lhs = build_l_inverse(&params.with_zeta(-params.zeta * params.q))?.op;
    let rhs = crossing_map(&l)?.scale(k);
    let mut report = VerificationReport::new();
    report.push(Check::new(
        "crossing",
        "L^-1(-zeta q) = (sigma^x L(zeta) sigma^x)^t2 / (r0 (1 - zeta^2 q^2)(1 - zeta^2 q^2 r1 r2))",
        interior_residual(&lhs, &rhs, YB_MARGIN)?,
        L_TOL,
    ));
    report.push(Check::new(
        "crossing.involution",
        "(sigma^x L^-1(-zeta q) sigma^x)^t2 r0 (1 - zeta^2 q^2)(1 - zeta^2 q^2 r1 r2) = L(zeta)",
        interior_residual(&crossing_map(&lhs)?.scale(k.inv()), &l, YB_MARGIN)?,
        L_TOL,
    ));
    Ok(report)
}

/// Operators for `R23(z2/z3) L13(z1/z3) L12(z1/z2) = L12 L13 R23` on `W⊗V⊗V`.
/// `params.zeta` is `z1`.
pub fn yang_baxter_sides(params: &ReprParams, zeta2: C64, zeta3: C64) -> Result<(LinearOperator, LinearOperator)> {
    let z1 = params.zeta;
    nonzero("zeta2 = 0", zeta2)?;
    nonzero("zeta3 = 0", zeta3)?;
    let l12 = build_l(&params.with_zeta(z1 / zeta2))?.op;
    let l13 = build_l(&params.with_zeta(z1 / zeta3))?.op;
    let r23 = build_rbar(zeta2 / zeta3, params.q)?.op;
    yang_baxter_from(&l12, &l13, &r23)
}

fn yang_baxter_from(
    l12: &LinearOperator,
    l13: &LinearOperator,
    r23: &LinearOperator,
) -> Result<(LinearOperator, LinearOperator)> {
    let full = l12.domain().tensor(&LabeledSpace::spin());
    let l12 = l12.embed(&full, &[0, 1])?;
    let l13 = l13.embed(&full, &[0, 2])?;
    let r23 = r23.embed(&full, &[1, 2])?;
    let lhs = &(&r23 * &l13) * &l12;
    let rhs = &(&l12 * &l13) * &r23;
    Ok((lhs, rhs))
}

pub fn check_yang_baxter(params: &ReprParams, zeta2: C64, zeta3: C64) -> Result<Check> {
    let (lhs, rhs) = yang_baxter_sides(params, zeta2, zeta3)?;
    Ok(Check::new(
        "yang_baxter",
        "R23(z2/z3) L13(z1/z3) L12(z1/z2) = L12(z1/z2) L13(z1/z3) R23(z2/z3)",
        interior_residual(&lhs, &rhs, YB_MARGIN)?,
        L_TOL,
    ))
}

/// At `z2 = z3` the relation is `P23 L13 L12 = L12 L13 P23`, which holds by
/// relabeling once `Rbar(1) = P`.
pub fn check_yang_baxter_degenerate(params: &ReprParams, zeta2: C64) -> Result<VerificationReport> {
    let q = params.q;
    let r1 = build_rbar(ONE, q)?.op;
    let mut report = VerificationReport::new();
    report.push(Check::new(
        "yang_baxter.rbar_at_one",
        "Rbar(1) = P",
        interior_residual(&r1, &permutation(), 0)?,
        1e-15,
    ));
    let mut yb = check_yang_baxter(params, zeta2, zeta2)?;
    yb.identity = "yang_baxter.degenerate".into();
    report.push(yb);
    Ok(report)
}

/// `Phi L(zeta) Phi^-1` on the spin doublet for the `spin:1` truncation,
/// together with `Rbar(zeta q^∓1)` it should be proportional to.
pub fn finite_spin_l_conjugate(sign: FiniteSpinSign, q: C64, zeta: C64) -> Result<(LinearOperator, LinearOperator)> {
    let params = finite_spin_params(1, sign, q, zeta)?;
    let w = build_borel_w(&params)?;
    let v = build_spin_module(1, zeta * sign.zeta_shift(1, q), q)?;
    let phi = solve_isomorphism(&w, &v)?.phi;
    // Relabel V^(1) as the spin doublet: u0 = v+, u1 = v-.
    let phi = LinearOperator::new(phi.domain().clone(), LabeledSpace::spin(), phi.into_entries())?;
    let phi2 = phi.tensor(&LinearOperator::identity(&LabeledSpace::spin()));
    let l = build_l(&params)?.op;
    let conj = &(&phi2 * &l) * &phi2.inverse()?;
    let shift = match sign {
        FiniteSpinSign::Minus => q.inv(),
        FiniteSpinSign::Plus => q,
    };
    Ok((conj, build_rbar(zeta * shift, q)?.op))
}

/// For the `spin:1` truncation, conjugating L by the solved isomorphism
/// gives a multiple of `Rbar(zeta q^∓1)`, and the Yang–Baxter relation
/// becomes the Rbar Rbar Rbar relation.
pub fn check_finite_spin_reduction(
    sign: FiniteSpinSign,
    q: C64,
    zeta1: C64,
    zeta2: C64,
    zeta3: C64,
) -> Result<VerificationReport> {
    let reduce = |zeta: C64| finite_spin_l_conjugate(sign, q, zeta);
    let mut report = VerificationReport::new();
    let (conj, rbar) = reduce(zeta1 / zeta2)?;
    let (scale, misfit) = fit_scalar(conj.entries(), rbar.entries());
    if scale.norm() < 1e-12 {
        return Err(Error::Matching { residual: misfit });
    }
    report.push(Check::new(
        format!("finite_spin.l_to_rbar{sign}"),
        "Phi L(zeta) Phi^-1 = c Rbar(zeta q^-+1) on the spin:1 truncation",
        Residual {
            absolute: misfit,
            relative: misfit,
            margin: 0,
        },
        L_TOL,
    ));
    let (c13, _) = reduce(zeta1 / zeta3)?;
    let r23 = build_rbar(zeta2 / zeta3, q)?.op;
    let (lhs, rhs) = yang_baxter_from(&conj, &c13, &r23)?;
    report.push(Check::new(
        format!("finite_spin.yang_baxter{sign}"),
        "Rbar23 Rbar13 Rbar12 = Rbar12 Rbar13 Rbar23 after the spin:1 isomorphism",
        interior_residual(&lhs, &rhs, 0)?,
        L_TOL,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::TruncationSpec;
    use proptest::prelude::*;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn crossing_params() -> ReprParams {
        ReprParams::new(
            cx(0.4, 0.1),
            cx(0.7, 0.0),
            [cx(1.3, 0.0), cx(0.25, 0.0), cx(-0.15, 0.0)],
            TruncationSpec::window(-8, 8).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rbar_at_one_is_permutation_and_corners_are_one() {
        let q = cx(0.3, 0.4);
        assert!((&build_rbar(ONE, q).unwrap().op - &permutation()).frobenius_norm() < 1e-15);
        let up = [Atom::Spin(Spin::Up), Atom::Spin(Spin::Up)];
        let dn = [Atom::Spin(Spin::Down), Atom::Spin(Spin::Down)];
        for z in [cx(0.2, 0.1), cx(1.7, -0.4)] {
            let r = build_rbar(z, q).unwrap().op;
            assert_eq!(r.element(&up, &up), Some(ONE));
            assert_eq!(r.element(&dn, &dn), Some(ONE));
            assert_eq!(check_ice_rule("ice", &r).residual.absolute, 0.0);
        }
        assert!(matches!(build_rbar(q.inv(), q), Err(Error::Pole { .. })));
    }

    #[test]
    fn rbar_intertwines() {
        let rep = check_rbar_intertwining(cx(0.7, 0.2), cx(1.1, -0.3), cx(0.4, 0.1)).unwrap();
        assert_eq!(rep.len(), 6);
        assert!(rep.passed(), "{:?}", rep.worst());
    }

    #[test]
    fn rbar_derivative_matches_finite_difference() {
        let q = cx(0.45, 0.2);
        let h = 1e-6;
        let fd = (&build_rbar(cx(1.0 + h, 0.0), q).unwrap().op - &build_rbar(cx(1.0 - h, 0.0), q).unwrap().op)
            .scale(cx(0.5 / h, 0.0));
        let exact = rbar_derivative(ONE, q).unwrap();
        assert!((&fd - &exact).frobenius_norm() < 1e-8);
    }

    #[test]
    fn l_at_zero_and_top_right_block() {
        let p = crossing_params();
        let ops = build_oscillator_ops(&p).unwrap();
        let l0 = build_l(&p.with_zeta(ZERO)).unwrap().op;
        let expect = spin_blocks(&ops.q_d, &ops.zeros(), &ops.zeros(), &ops.q_d_inv.scale(p.r[0]));
        assert!((&l0 - &expect).frobenius_norm() < 1e-14);
        let l = build_l(&p).unwrap().op;
        let pm = spin_block(&l, Spin::Up, Spin::Down).unwrap();
        let expect = (&ops.a_star * &ops.q_d_inv).scale(-p.zeta * p.r[0]);
        assert!((&pm - &expect).frobenius_norm() < 1e-12 * expect.frobenius_norm());
        assert_eq!(check_ice_rule("ice", &l).residual.absolute, 0.0);

        let li0 = build_l_inverse(&p.with_zeta(ZERO)).unwrap().op;
        let expect = spin_blocks(&ops.q_d_inv, &ops.zeros(), &ops.zeros(), &ops.q_d.scale(p.r[0].inv()));
        assert!((&li0 - &expect).frobenius_norm() < 1e-14);
    }

    #[test]
    fn l_is_quadratic_in_zeta() {
        let p = crossing_params();
        let h = cx(0.25, 0.0);
        let second = |z: C64| {
            let f = |z: C64| build_l(&p.with_zeta(z)).unwrap().op;
            &(&f(z + h) - &f(z).scale(cx(2.0, 0.0))) + &f(z - h)
        };
        let a = second(cx(0.3, 0.1));
        let b = second(cx(-0.6, 0.4));
        assert!((&a - &b).frobenius_norm() <= 1e-9 * a.frobenius_norm());
    }

    #[test]
    fn crossing_generic_and_r_zero() {
        let p = crossing_params();
        let rep = check_crossing(&p).unwrap();
        assert!(rep.passed(), "{:?}", rep.worst());
        let p0 = p.with_r([p.r[0], ZERO, ZERO]).unwrap();
        let k = crossing_prefactor(&p0).unwrap();
        let zq = p.zeta * p.q;
        assert!((k - ONE / (p.r[0] * (ONE - zq * zq))).norm() < 1e-14);
        assert!(check_crossing(&p0).unwrap().passed());
    }

    #[test]
    fn crossing_map_is_an_involution() {
        let l = build_l(&crossing_params()).unwrap().op;
        assert_eq!(crossing_map(&crossing_map(&l).unwrap()).unwrap(), l);
    }

    #[test]
    fn inverse_and_intertwining() {
        let p = ReprParams::new(
            cx(0.45, 0.1),
            cx(0.7, 0.2),
            [cx(1.3, 0.0), cx(0.25, 0.1), cx(-0.15, 0.0)],
            TruncationSpec::window(-5, 5).unwrap(),
        )
        .unwrap();
        assert!(check_l_inverse(&p).unwrap().passed());
        let rep = check_l_intertwining(&p, cx(1.1, -0.3)).unwrap();
        assert!(rep.passed(), "{:?}", rep.worst());
        assert!(matches!(build_l_inverse(&p.with_zeta(ONE)), Err(Error::Pole { .. })));
    }

    #[test]
    fn yang_baxter_generic_and_degenerate() {
        let p = crossing_params().with_zeta(cx(0.7, 0.2));
        let yb = check_yang_baxter(&p, cx(1.1, -0.3), cx(0.5, 0.4)).unwrap();
        assert!(yb.passed(), "{yb:?}");
        assert!(check_yang_baxter_degenerate(&p, cx(0.9, 0.1)).unwrap().passed());
    }

    #[test]
    fn yang_baxter_detects_wrong_spectral_ratio() {
        let p = crossing_params().with_zeta(cx(0.7, 0.2));
        let (z2, z3) = (cx(1.1, -0.3), cx(0.5, 0.4));
        let full = build_l(&p).unwrap().op.domain().tensor(&LabeledSpace::spin());
        let l12 = build_l(&p.with_zeta(p.zeta / z2))
            .unwrap()
            .op
            .embed(&full, &[0, 1])
            .unwrap();
        let l13 = build_l(&p.with_zeta(p.zeta / z3))
            .unwrap()
            .op
            .embed(&full, &[0, 2])
            .unwrap();
        let r23 = build_rbar(z3 / z2, p.q).unwrap().op.embed(&full, &[1, 2]).unwrap();
        let res = interior_residual(&(&(&r23 * &l13) * &l12), &(&(&l12 * &l13) * &r23), 2).unwrap();
        assert!(res.relative > 1e-3);
    }

    #[test]
    fn finite_spin_reduction_both_signs() {
        for sign in FiniteSpinSign::BOTH {
            let rep =
                check_finite_spin_reduction(sign, cx(0.5, 0.2), cx(0.8, 0.1), cx(1.2, -0.2), cx(0.6, 0.3)).unwrap();
            assert!(rep.passed(), "{sign}: {:?}", rep.worst());
        }
    }

    fn annulus(m: f64, a: f64) -> C64 {
        C64::from_polar(m, a)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn yang_baxter_random(
            qm in 0.2f64..0.9, qa in 0.0f64..std::f64::consts::TAU,
            zs in proptest::array::uniform6(0.0f64..1.0),
            r in proptest::array::uniform6(-1.0f64..1.0),
        ) {
            let q = annulus(qm, qa);
            let z: Vec<C64> = (0..3).map(|k| annulus(0.2 + 0.7 * zs[2 * k], std::f64::consts::TAU * zs[2 * k + 1])).collect();
            let r0 = cx(r[0], r[1]);
            prop_assume!(r0.norm() > 0.1);
            prop_assume!((ONE - q * q * (z[1] / z[2]).powi(2)).norm() > 0.05);
            let p = ReprParams::new(q, z[0], [r0, cx(r[2], r[3]), cx(r[4], r[5])], TruncationSpec::window(-6, 6).unwrap()).unwrap();
            let yb = check_yang_baxter(&p, z[1], z[2]).unwrap();
            prop_assert!(yb.passed(), "{:?}", yb);
        }
    }
}
