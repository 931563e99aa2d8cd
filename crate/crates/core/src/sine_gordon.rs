//! Soliton S-matrix and type I / type II defect transmission matrices of
//! the sine-Gordon model, as gauge transforms of Rbar and L.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::defect::{build_defect_intertwiner, defect_rll_sides, independence_check, DefectCase};
use crate::error::{Error, Result};
use crate::intertwiners::{build_l, build_rbar, check_ice_rule, finite_spin_l_conjugate, permutation, spin_blocks};
use crate::linalg::{fit_scalar, interior_residual, LabeledSpace, LinearOperator, Matrix, Residual, C64, ONE, ZERO};
use crate::nonzero;
use crate::report::{Check, VerificationReport};
use crate::repr::{build_oscillator_ops, FiniteSpinSign, OscillatorOps, ReprParams, TruncationSpec};

pub const S_TOL: f64 = 1e-13;
pub const STT_TOL: f64 = 1e-9;
pub const SG_MARGIN: usize = 2;

fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `q = -exp(-i pi gamma)`.
pub fn sg_q(gamma: f64) -> C64 {
    -C64::from_polar(1.0, -std::f64::consts::PI * gamma)
}

/// `x = exp(gamma theta)`.
pub fn sg_x(gamma: f64, theta: f64) -> C64 {
    cx((gamma * theta).exp(), 0.0)
}

/// `S = (q x - q^-1 x^-1) P Rbar(x)` at `x = exp(gamma theta)`.
pub fn build_s(theta: f64, gamma: f64) -> Result<LinearOperator> {
    let (q, x) = (sg_q(gamma), sg_x(gamma, theta));
    let pre = nonzero("q x = q^-1 x^-1", q * x - (q * x).inv())?;
    Ok((&permutation() * &build_rbar(x, q)?.op).scale(pre))
}

/// `S` written entry by entry: `q x - q^-1 x^-1` in both corners and
/// `[[q - q^-1, x - x^-1], [x - x^-1, q - q^-1]]` in the middle.
pub fn build_s_display(theta: f64, gamma: f64) -> Result<LinearOperator> {
    let (q, x) = (sg_q(gamma), sg_x(gamma, theta));
    let a = q * x - (q * x).inv();
    let b = q - q.inv();
    let c = x - x.inv();
    let o = ZERO;
    let m = [[a, o, o, o], [o, b, c, o], [o, c, b, o], [o, o, o, a]];
    LinearOperator::on(
        LabeledSpace::spin().tensor(&LabeledSpace::spin()),
        Matrix::from_fn(4, 4, |r, k| m[r][k]),
    )
}

pub fn check_s_identification(theta: f64, gamma: f64) -> Result<VerificationReport> {
    let s = build_s(theta, gamma)?;
    let mut report = VerificationReport::new();
    report.push(Check::new(
        "sine_gordon.s_matrix",
        "S = (q x - q^-1 x^-1) P Rbar(x) entrywise",
        interior_residual(&build_s_display(theta, gamma)?, &s, 0)?,
        S_TOL,
    ));
    let mut ice = check_ice_rule("sine_gordon.s_charge", &s).with_tol(1e-10);
    ice.anchor = "S conserves sum sigma^z".into();
    report.push(ice);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DefectType {
    I,
    II,
}

impl fmt::Display for DefectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefectType::I => "I",
            DefectType::II => "II",
        })
    }
}

impl FromStr for DefectType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(DefectType::I),
            "II" | "ii" | "2" => Ok(DefectType::II),
            other => Err(Error::InvalidParams(format!("unknown defect type `{other}` (I | II)"))),
        }
    }
}

/// Type I defect: one continuous parameter `eta` and the gauge parameter `nu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypeI {
    pub eta: f64,
    pub nu: C64,
}

/// Type II defect parameters. `b_bar` overrides the complex conjugates of
/// `(b_plus, b_minus)` with independent values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypeII {
    pub b_plus: C64,
    pub b_minus: C64,
    pub b_bar: Option<[C64; 2]>,
}

impl TypeII {
    pub fn new(b_plus: C64, b_minus: C64) -> Self {
        TypeII {
            b_plus,
            b_minus,
            b_bar: None,
        }
    }

    pub fn bars(&self) -> [C64; 2] {
        self.b_bar.unwrap_or([self.b_plus.conj(), self.b_minus.conj()])
    }

    /// `(1, bbar- q^2 / bbar+, b- / (q^2 b+))`.
    pub fn r(&self, q: C64) -> Result<[C64; 3]> {
        let [bp_bar, bm_bar] = self.bars();
        let bp = nonzero("b+ = 0", self.b_plus)?;
        let bp_bar = nonzero("conj(b+) = 0", bp_bar)?;
        Ok([ONE, bm_bar * q * q / bp_bar, self.b_minus / (q * q * bp)])
    }
}

/// A transmission matrix `G L G^-1` on `W⊗C^2` together with its pieces.
#[derive(Clone, Debug)]
pub struct TransmissionMatrix {
    pub kind: DefectType,
    pub params: ReprParams,
    /// The ungauged L-operator.
    pub l: LinearOperator,
    /// `diag(1, g(D))` on `W⊗C^2`.
    pub gauge: LinearOperator,
    pub op: LinearOperator,
}

impl TransmissionMatrix {
    /// Entries with the opposite index convention `O|a> = sum_b O^a_b |b>`.
    pub fn transposed(&self) -> LinearOperator {
        self.op.adjoint_spaces_transpose()
    }
}

fn spin_gauge(ops: &OscillatorOps, g: impl Fn(i64) -> C64) -> LinearOperator {
    let zero = ops.zeros();
    spin_blocks(&ops.identity(), &zero, &zero, &ops.diag(g))
}

fn gauge_from(
    kind: DefectType,
    params: ReprParams,
    g: impl Fn(i64) -> C64 + Copy,
    scale: C64,
) -> Result<TransmissionMatrix> {
    let ops = build_oscillator_ops(&params)?;
    let l = build_l(&params)?.op;
    let gauge = spin_gauge(&ops, g);
    let inv = spin_gauge(&ops, |j| g(j).inv());
    let op = (&(&gauge * &l) * &inv).scale(scale);
    Ok(TransmissionMatrix {
        kind,
        params,
        l,
        gauge,
        op,
    })
}

/// Diagonal entry `-nu^(1/2) q^(-j-1/2)` of the type I gauge.
pub fn type_i_gauge_entry(q: C64, nu: C64, j: i64) -> C64 {
    -nu.sqrt() * q.powi(-j as i32) / q.sqrt()
}

/// Diagonal entry `(i/|b+|)(b+ + b- q^(-2j-2))` of the type II gauge.
pub fn type_ii_gauge_entry(q: C64, b: &TypeII, j: i64) -> C64 {
    cx(0.0, 1.0 / b.b_plus.norm()) * (b.b_plus + b.b_minus * q.powi(-2 * j as i32 - 2))
}

/// `T_I = nu^(-1/2) U_I L^(nu,0,0)(arg) U_I^-1` at an explicit L argument.
pub fn build_t_i_at(arg: C64, gamma: f64, d: &TypeI, trunc: TruncationSpec) -> Result<TransmissionMatrix> {
    let q = sg_q(gamma);
    let nu = nonzero("nu = 0", d.nu)?;
    let params = ReprParams::new(q, arg, [nu, ZERO, ZERO], trunc)?;
    gauge_from(DefectType::I, params, |j| type_i_gauge_entry(q, nu, j), nu.sqrt().inv())
}

/// Type I transmission matrix at `L` argument `i exp(gamma (theta - eta))`.
pub fn build_t_i(theta: f64, gamma: f64, d: &TypeI, trunc: TruncationSpec) -> Result<TransmissionMatrix> {
    let arg = cx(0.0, (gamma * (theta - d.eta)).exp());
    build_t_i_at(arg, gamma, d, trunc)
}

/// Type II transmission matrix at `L` argument `i exp(gamma theta) |b+|`.
pub fn build_t_ii(theta: f64, gamma: f64, d: &TypeII, trunc: TruncationSpec) -> Result<TransmissionMatrix> {
    let q = sg_q(gamma);
    let r = d.r(q)?;
    for j in trunc.levels() {
        if type_ii_gauge_entry(q, d, j).norm() < 1e-12 {
            return Err(Error::SingularGauge { j });
        }
    }
    let arg = cx(0.0, (gamma * theta).exp() * d.b_plus.norm());
    let params = ReprParams::new(q, arg, r, trunc)?;
    gauge_from(DefectType::II, params, |j| type_ii_gauge_entry(q, d, j), ONE)
}

/// `S23(x) T13(theta3) T12(theta2) = T13(theta2) T12(theta3) S23(x)` on
/// `W⊗V⊗V` with `x = exp(gamma (theta3 - theta2))`.
pub fn stt_sides(
    t: impl Fn(f64) -> Result<LinearOperator>,
    gamma: f64,
    theta2: f64,
    theta3: f64,
) -> Result<(LinearOperator, LinearOperator)> {
    let (t2, t3) = (t(theta2)?, t(theta3)?);
    let full = t2.domain().tensor(&LabeledSpace::spin());
    let s = build_s(theta3 - theta2, gamma)?.embed(&full, &[1, 2])?;
    let t12 = |m: &LinearOperator| m.embed(&full, &[0, 1]);
    let t13 = |m: &LinearOperator| m.embed(&full, &[0, 2]);
    let lhs = &(&s * &t13(&t3)?) * &t12(&t2)?;
    let rhs = &(&t13(&t2)? * &t12(&t3)?) * &s;
    Ok((lhs, rhs))
}

fn stt_check(
    identity: String,
    t: impl Fn(f64) -> Result<LinearOperator>,
    gamma: f64,
    theta2: f64,
    theta3: f64,
) -> Result<Check> {
    let (lhs, rhs) = stt_sides(t, gamma, theta2, theta3)?;
    Ok(Check::new(
        identity,
        "S23 T13(theta3) T12(theta2) = T13(theta2) T12(theta3) S23",
        interior_residual(&lhs, &rhs, SG_MARGIN)?,
        STT_TOL,
    ))
}

/// STT for the ungauged L and both transmission matrices, and charge
/// conservation of each transmission matrix.
pub fn check_stt(
    gamma: f64,
    theta2: f64,
    theta3: f64,
    t1: &TypeI,
    t2: &TypeII,
    trunc: TruncationSpec,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    report.push(stt_check(
        "sine_gordon.stt.type_i".into(),
        |th| Ok(build_t_i(th, gamma, t1, trunc)?.op),
        gamma,
        theta2,
        theta3,
    )?);
    report.push(stt_check(
        "sine_gordon.stt.type_ii".into(),
        |th| Ok(build_t_ii(th, gamma, t2, trunc)?.op),
        gamma,
        theta2,
        theta3,
    )?);
    report.push(stt_check(
        "sine_gordon.stt.ungauged".into(),
        |th| Ok(build_t_ii(th, gamma, t2, trunc)?.l),
        gamma,
        theta2,
        theta3,
    )?);
    for (name, t) in [
        ("type_i", build_t_i(theta2, gamma, t1, trunc)?),
        ("type_ii", build_t_ii(theta2, gamma, t2, trunc)?),
    ] {
        let mut ice = check_ice_rule(&format!("sine_gordon.charge.{name}"), &t.op).with_tol(1e-10);
        ice.anchor = "T conserves sigma^z - 2D (alpha = -2j)".into();
        report.push(ice);
    }
    Ok(report)
}

/// Gauge `F` on W with `diag(1, g(D)) = (F⊗1) phi(charge)`: `F = 1/psi`,
/// `psi(k+1) = psi(k) g(k)`.
pub fn oscillator_gauge(ops: &OscillatorOps, g: impl Fn(i64) -> C64) -> Result<LinearOperator> {
    let mut psi = Vec::with_capacity(ops.levels.len());
    let mut acc = ONE;
    for &j in &ops.levels {
        psi.push(acc);
        let gj = g(j);
        if gj.norm() < 1e-300 {
            return Err(Error::SingularGauge { j });
        }
        acc *= gj;
    }
    let lo = ops.levels[0];
    Ok(ops.diag(|j| psi[(j - lo) as usize].inv()))
}

/// Defect/defect matrix `U = (F⊗F) R (F⊗F)^-1` for two type I defects, with
/// `R` the intertwiner of `L(i e^(gamma(theta - eta1)))` and `L(i e^(gamma(theta - eta2)))`.
pub fn build_u(
    case: DefectCase,
    gamma: f64,
    theta: f64,
    d1: &TypeI,
    d2: &TypeI,
    trunc: TruncationSpec,
) -> Result<LinearOperator> {
    let (p1, p2, f) = utt_setting(gamma, theta, d1, d2, trunc)?;
    let r = build_defect_intertwiner(case, &p1, &p2)?.op;
    let ff = f.tensor(&f);
    Ok(&(&ff * &r) * &ff.inverse()?)
}

fn utt_setting(
    gamma: f64,
    theta: f64,
    d1: &TypeI,
    d2: &TypeI,
    trunc: TruncationSpec,
) -> Result<(ReprParams, ReprParams, LinearOperator)> {
    if d1.nu != d2.nu {
        return Err(Error::InvalidParams("both type I defects must share nu".into()));
    }
    let t1 = build_t_i(theta, gamma, d1, trunc)?;
    let t2 = build_t_i(theta, gamma, d2, trunc)?;
    let ops = build_oscillator_ops(&t1.params)?;
    let q = t1.params.q;
    let f = oscillator_gauge(&ops, |j| type_i_gauge_entry(q, d1.nu, j))?;
    Ok((t1.params, t2.params, f))
}

/// `U12 T13 T23 = T23 T13 U12` for both type I candidates, the gauge
/// identity `T = c F L F^-1`, and non-proportionality of the candidates.
pub fn check_utt(gamma: f64, theta: f64, d1: &TypeI, d2: &TypeI, trunc: TruncationSpec) -> Result<VerificationReport> {
    let (p1, p2, f) = utt_setting(gamma, theta, d1, d2, trunc)?;
    let t1 = build_t_i(theta, gamma, d1, trunc)?;
    let t2 = build_t_i(theta, gamma, d2, trunc)?;
    let mut report = VerificationReport::new();
    let f2 = f.tensor(&LinearOperator::identity(&LabeledSpace::spin()));
    let fl = (&(&f2 * &t1.l) * &f2.inverse()?).scale(d1.nu.sqrt().inv());
    report.push(Check::new(
        "sine_gordon.gauge_split",
        "nu^(-1/2) diag(1, g(D)) L diag(1, g(D))^-1 = (F⊗1) L (F⊗1)^-1",
        interior_residual(&t1.op, &fl, 0)?,
        1e-12,
    ));
    let mut us = Vec::new();
    for case in DefectCase::BOTH {
        let u = build_u(case, gamma, theta, d1, d2, trunc)?;
        let w = p1.space()?;
        let full = w.tensor(&w).tensor(&LabeledSpace::spin());
        let t13 = t1.op.embed(&full, &[0, 2])?;
        let t23 = t2.op.embed(&full, &[1, 2])?;
        let u12 = u.embed(&full, &[0, 1])?;
        report.push(Check::new(
            format!("sine_gordon.utt.{case}"),
            "U12 T13 T23 = T23 T13 U12",
            interior_residual(
                &(&(&u12 * &t13) * &t23),
                &(&(&t23 * &t13) * &u12),
                crate::defect::DEFECT_MARGIN,
            )?,
            STT_TOL,
        ));
        // The ungauged relation, for reference.
        let (lhs, rhs) = defect_rll_sides(&build_defect_intertwiner(case, &p1, &p2)?.op, &p1, &p2)?;
        report.push(Check::new(
            format!("sine_gordon.rll.{case}"),
            "R12 L13 L23 = L23 L13 R12 before gauging",
            interior_residual(&lhs, &rhs, crate::defect::DEFECT_MARGIN)?,
            STT_TOL,
        ));
        us.push(u);
    }
    let (_, misfit) = fit_scalar(
        &us[0].interior(crate::defect::DEFECT_MARGIN)?,
        &us[1].interior(crate::defect::DEFECT_MARGIN)?,
    );
    report.push(independence_check("sine_gordon.utt.candidates_independent", misfit));
    Ok(report)
}

/// At `eta1 = eta2` both candidates reduce to `P`, which commutes with `P`.
pub fn check_utt_degenerate(gamma: f64, theta: f64, d: &TypeI, trunc: TruncationSpec) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    for case in DefectCase::BOTH {
        let u = build_u(case, gamma, theta, d, d, trunc)?;
        let w = LabeledSpace::single(trunc.factor()?);
        let p = LinearOperator::swap(&w, &w);
        report.push(Check::new(
            format!("sine_gordon.utt_degenerate.{case}"),
            "U P = P U at zeta1 = zeta2",
            interior_residual(&(&u * &p), &(&p * &u), 0)?,
            1e-12,
        ));
    }
    Ok(report)
}

/// With `r = (q, -q^±2, -q^±2)` the W factor truncates to two levels and,
/// after the solved isomorphism, L at `i e^(gamma theta)` is a multiple of
/// `Rbar(i e^(gamma theta) q^∓1)`, i.e. of the normalized S block up to P.
pub fn check_finite_truncation(sign: FiniteSpinSign, gamma: f64, theta: f64) -> Result<Check> {
    let q = sg_q(gamma);
    let arg = cx(0.0, (gamma * theta).exp());
    let (conj, rbar) = finite_spin_l_conjugate(sign, q, arg)?;
    let (c, misfit) = fit_scalar(conj.entries(), rbar.entries());
    if c.norm() < 1e-12 {
        return Err(Error::Matching { residual: misfit });
    }
    Ok(Check::new(
        format!("sine_gordon.finite_truncation{sign}"),
        "Phi L^(q,-q^±2,-q^±2) Phi^-1 = c Rbar(arg q^-+1)",
        Residual {
            absolute: misfit,
            relative: misfit,
            margin: 0,
        },
        STT_TOL,
    ))
}

/// At `b- = 0` the type II matrix has `r1 = r2 = 0` and is a spin-diagonal
/// regauging of the type I matrix with `nu = 1`, `exp(-gamma eta) = |b+|`.
pub fn check_b_minus_zero(gamma: f64, theta: f64, b_plus: C64, trunc: TruncationSpec) -> Result<Check> {
    let d2 = TypeII::new(b_plus, ZERO);
    let t2 = build_t_ii(theta, gamma, &d2, trunc)?;
    let eta = -b_plus.norm().ln() / gamma;
    let d1 = TypeI { eta, nu: ONE };
    let t1 = build_t_i(theta, gamma, &d1, trunc)?;
    let regauge = &t2.gauge * &t1.gauge.inverse()?;
    let mapped = &(&regauge * &t1.op) * &regauge.inverse()?;
    let r_zero = t2.params.r[1].norm() + t2.params.r[2].norm();
    let mut res = Residual::from_matrices(t2.op.entries(), mapped.entries(), 0);
    res.absolute += r_zero;
    res.relative += r_zero;
    Ok(Check::new(
        "sine_gordon.b_minus_zero",
        "b- = 0: r1 = r2 = 0 and T_II = G T_I G^-1",
        res,
        1e-12,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intertwiners::charge;

    fn trunc() -> TruncationSpec {
        TruncationSpec::window(-4, 4).unwrap()
    }

    const GAMMA: f64 = 0.3;

    #[test]
    fn s_matrix_entries() {
        let (theta, gamma) = (0.7, GAMMA);
        let s = build_s(theta, gamma).unwrap();
        let (q, x) = (sg_q(gamma), sg_x(gamma, theta));
        assert!((s.entries()[(0, 0)] - (q * x - (q * x).inv())).norm() < 1e-14);
        assert!((s.entries()[(1, 2)] - (x - x.inv())).norm() < 1e-14);
        assert!((s.entries()[(1, 1)] - (q - q.inv())).norm() < 1e-14);
        assert!(check_s_identification(theta, gamma).unwrap().passed());
    }

    #[test]
    fn q_is_unimodular() {
        assert!((sg_q(0.37).norm() - 1.0).abs() < 1e-15);
        assert!((sg_q(0.0) + ONE).norm() < 1e-15);
    }

    #[test]
    fn stt_for_both_types() {
        let t1 = TypeI {
            eta: 0.4,
            nu: cx(1.3, 0.2),
        };
        let t2 = TypeII::new(cx(1.1, 0.0), cx(0.4, 0.0));
        let report = check_stt(GAMMA, 0.3, -0.5, &t1, &t2, trunc()).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn stt_detects_unswapped_rapidities() {
        let d = TypeI {
            eta: 0.4,
            nu: cx(1.3, 0.2),
        };
        let t = |th: f64| Ok(build_t_i(th, GAMMA, &d, trunc()).unwrap().op);
        let (lhs, _) = stt_sides(t, GAMMA, 0.3, -0.5).unwrap();
        let full = lhs.domain().clone();
        let (t2, t3) = (t(0.3).unwrap(), t(-0.5).unwrap());
        let s = build_s(-0.8, GAMMA).unwrap().embed(&full, &[1, 2]).unwrap();
        let wrong = &(&t3.embed(&full, &[0, 2]).unwrap() * &t2.embed(&full, &[0, 1]).unwrap()) * &s;
        assert!(interior_residual(&lhs, &wrong, SG_MARGIN).unwrap().relative > 1e-3);
    }

    #[test]
    fn stt_with_independent_bars() {
        let t1 = TypeI {
            eta: -0.2,
            nu: cx(0.8, 0.0),
        };
        let mut t2 = TypeII::new(cx(0.9, 0.3), cx(0.2, -0.5));
        t2.b_bar = Some([cx(1.4, 0.1), cx(-0.3, 0.2)]);
        let report = check_stt(0.45, 0.6, 0.1, &t1, &t2, trunc()).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn transmission_blocks_respect_charge() {
        let t = build_t_i(0.2, GAMMA, &TypeI { eta: 0.1, nu: ONE }, trunc()).unwrap();
        let sp = t.op.domain().clone();
        for r in 0..sp.dim() {
            for c in 0..sp.dim() {
                if t.op.entries()[(r, c)] != ZERO {
                    assert_eq!(charge(&sp.label(r)), charge(&sp.label(c)));
                }
            }
        }
    }

    #[test]
    fn type_i_at_zero_argument_is_gauged_diagonal() {
        let d = TypeI {
            eta: 0.0,
            nu: cx(1.7, -0.3),
        };
        let t = build_t_i_at(ZERO, GAMMA, &d, trunc()).unwrap();
        let ops = build_oscillator_ops(&t.params).unwrap();
        let zero = ops.zeros();
        let diag = spin_blocks(&ops.q_d, &zero, &zero, &ops.q_d_inv.scale(d.nu)).scale(d.nu.sqrt().inv());
        assert!((&t.op - &diag).frobenius_norm() < 1e-13);
    }

    #[test]
    fn singular_type_ii_gauge_is_flagged() {
        let q = sg_q(GAMMA);
        // b+ + b- q^-2 = 0 at j = 0.
        let d = TypeII::new(ONE, -q * q);
        assert!(matches!(
            build_t_ii(0.1, GAMMA, &d, trunc()),
            Err(Error::SingularGauge { j: 0 })
        ));
    }

    #[test]
    fn utt_for_both_candidates() {
        let d1 = TypeI {
            eta: 0.3,
            nu: cx(1.2, 0.0),
        };
        let d2 = TypeI {
            eta: -0.4,
            nu: cx(1.2, 0.0),
        };
        let report = check_utt(GAMMA, 0.2, &d1, &d2, trunc()).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(check_utt_degenerate(GAMMA, 0.2, &d1, trunc()).unwrap().passed());
    }

    #[test]
    fn finite_truncation_gives_spin_half_block() {
        for sign in FiniteSpinSign::BOTH {
            let check = check_finite_truncation(sign, GAMMA, 0.4).unwrap();
            assert!(check.passed(), "{check:?}");
        }
    }

    #[test]
    fn b_minus_zero_degenerates_to_type_i() {
        let check = check_b_minus_zero(GAMMA, 0.5, cx(1.1, 0.3), trunc()).unwrap();
        assert!(check.passed(), "{check:?}");
    }

    #[test]
    fn defect_type_parses() {
        assert_eq!("II".parse::<DefectType>().unwrap(), DefectType::II);
        assert!("III".parse::<DefectType>().is_err());
    }
}
