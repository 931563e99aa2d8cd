//! The short exact sequence `0 → W' → W⊗V → W'' → 0` and the fused
//! L-operator relations.
//!
//! With `r = (r0, r1, r2)`, `W' = W^(q r0, q^-2 r1, r2)` at spectral
//! parameter `zeta q` and `W'' = W^(r0/q, q^2 r1, r2)` at `zeta/q`; both maps
//! are module maps into and out of `W_zeta ⊗ V_zeta`.

use crate::error::{Error, Result};
use crate::intertwiners::{build_l, build_rbar, L_TOL};
use crate::linalg::{interior_residual, rank, LabeledSpace, LinearOperator, Matrix, Residual, C64, ONE, ZERO};
use crate::nonzero;
use crate::report::{Check, VerificationReport};
use crate::repr::{build_borel_w, build_coproduct, build_evaluation_v, Generator, ReprParams, TruncationSpec};

pub const FUSED_L_TOL: f64 = 1e-9;
pub const FUSED_L_MARGIN: usize = 3;

#[derive(Clone, Debug)]
pub struct FusionMaps {
    pub params: ReprParams,
    /// `W^(q r0, q^-2 r1, r2)_(zeta q)`.
    pub sub: ReprParams,
    /// `W^(r0/q, q^2 r1, r2)_(zeta/q)`.
    pub quotient: ReprParams,
    pub iota: LinearOperator,
    pub pi: LinearOperator,
    /// `r0 (q^(j-1) r1 + q^(1-j))`, the v+ coefficient of `iota|j>`.
    pub a_coeffs: Vec<(i64, C64)>,
}

pub fn shifted_params(params: &ReprParams) -> Result<(ReprParams, ReprParams)> {
    if !matches!(params.trunc, TruncationSpec::Window { .. }) {
        return Err(Error::InvalidTruncation(
            "fusion needs a generic window; shifted parameters do not close the same edges".into(),
        ));
    }
    let (q, r) = (params.q, params.r);
    let sub = ReprParams::new(q, params.zeta * q, [q * r[0], r[1] / (q * q), r[2]], params.trunc)?;
    let quotient = ReprParams::new(q, params.zeta / q, [r[0] / q, q * q * r[1], r[2]], params.trunc)?;
    Ok((sub, quotient))
}

/// `iota|j> = r0 (q^(j-1) r1 + q^(1-j)) |j>⊗v+ + q^j |j-1>⊗v-`,
/// `pi(|j>⊗v+) = q^j |j-1>`, `pi(|j>⊗v-) = -r0 (q^j r1 + q^-j) |j>`.
pub fn build_fusion_maps(params: &ReprParams) -> Result<FusionMaps> {
    let (sub, quotient) = shifted_params(params)?;
    let (q, r0, r1) = (params.q, params.r[0], params.r[1]);
    let w = params.space()?;
    let wv = w.tensor(&LabeledSpace::spin());
    let levels = params.trunc.levels();
    let n = levels.len();
    let mut a_coeffs = Vec::with_capacity(n);
    let mut iota = Matrix::zeros(2 * n, n);
    let mut pi = Matrix::zeros(n, 2 * n);
    for (k, &j) in levels.iter().enumerate() {
        let ji = j as i32;
        let inner = q.powi(ji - 1) * r1 + q.powi(1 - ji);
        if inner.norm() < crate::POLE_EPS {
            return Err(Error::DegenerateFusion { j });
        }
        a_coeffs.push((j, r0 * inner));
        iota[(2 * k, k)] = r0 * inner;
        pi[(k, 2 * k + 1)] = -r0 * (q.powi(ji) * r1 + q.powi(-ji));
        if k > 0 {
            iota[(2 * (k - 1) + 1, k)] = q.powi(ji);
            pi[(k - 1, 2 * k)] = q.powi(ji);
        }
    }
    Ok(FusionMaps {
        params: params.clone(),
        sub,
        quotient,
        iota: LinearOperator::new(w.clone(), wv.clone(), iota)?,
        pi: LinearOperator::new(wv, w, pi)?,
        a_coeffs,
    })
}

fn spin_projector(maps: &FusionMaps, up: bool) -> LinearOperator {
    let wv = maps.iota.codomain().clone();
    let keep = if up { 0 } else { 1 };
    let n = wv.dim();
    let m = Matrix::from_fn(n, n, |r, k| if r == k && r % 2 == keep { ONE } else { ZERO });
    LinearOperator::on(wv, m).expect("projector")
}

/// `pi∘iota = 0`, checked as `pi P+ iota = -pi P- iota` so that the relative
/// metric compares the two cancelling paths; injectivity of iota; and the
/// rank count `rank(iota) + rank(pi) = dim(W⊗V)` on interior blocks.
pub fn check_exactness(maps: &FusionMaps) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let plus = &(&maps.pi * &spin_projector(maps, true)) * &maps.iota;
    let minus = (&(&maps.pi * &spin_projector(maps, false)) * &maps.iota).scale(-ONE);
    report.push(Check::new(
        "fusion.pi_iota",
        "pi iota = 0",
        interior_residual(&plus, &minus, 1)?,
        L_TOL,
    ));

    let margin = 1;
    let iota_block = maps.iota.interior(margin)?;
    let pi_block = maps.pi.interior(margin)?;
    let interior_dim = maps.iota.codomain().interior_indices(margin).len();
    let sv = iota_block.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let injective = if smin > 1e-12 * smax { 0.0 } else { 1.0 };
    report.push(Check::new(
        "fusion.iota_injective",
        "0 -> W' -> W (x) V: iota injective",
        Residual {
            absolute: smin,
            relative: injective,
            margin,
        },
        L_TOL,
    ));
    let total = rank(&iota_block, 1e-12) + rank(&pi_block, 1e-12);
    let gap = (total as f64 - interior_dim as f64).abs();
    report.push(Check::new(
        "fusion.rank",
        "rank(iota) + rank(pi) = dim(W (x) V)",
        Residual {
            absolute: gap,
            relative: gap,
            margin,
        },
        L_TOL,
    ));
    Ok(report)
}

/// iota and pi intertwine the Borel actions.
pub fn check_module_maps(maps: &FusionMaps) -> Result<VerificationReport> {
    let p = &maps.params;
    let w = build_borel_w(p)?;
    let v = build_evaluation_v(nonzero("zeta = 0", p.zeta)?, p.q)?;
    let ws = build_borel_w(&maps.sub)?;
    let wq = build_borel_w(&maps.quotient)?;
    let mut report = VerificationReport::new();
    for x in Generator::BOREL {
        let (d, _) = build_coproduct(x, &w, &v)?;
        report.push(Check::new(
            format!("fusion.iota_module.{x}"),
            "iota x = Delta(x) iota",
            interior_residual(&(&maps.iota * ws.get(x)?), &(&d * &maps.iota), 1)?,
            L_TOL,
        ));
        report.push(Check::new(
            format!("fusion.pi_module.{x}"),
            "pi Delta(x) = x pi",
            interior_residual(&(&maps.pi * &d), &(wq.get(x)? * &maps.pi), 1)?,
            L_TOL,
        ));
    }
    Ok(report)
}

/// Operators of both fused relations with `zeta = z1/z2`:
/// `(iota⊗1) L'(zeta q) = ((1 - q^2 zeta^2)/(1 - zeta^2)) L13(zeta) Rbar23(zeta) (iota⊗1)` and
/// `L''(zeta/q) (pi⊗1) = q^-1 (pi⊗1) L13(zeta) Rbar23(zeta)`.
pub struct FusedSides {
    pub iota_lhs: LinearOperator,
    pub iota_rhs: LinearOperator,
    pub pi_lhs: LinearOperator,
    pub pi_rhs: LinearOperator,
}

pub fn fused_l_sides(params: &ReprParams, zeta2: C64) -> Result<FusedSides> {
    let q = params.q;
    let zeta = params.zeta / nonzero("zeta2 = 0", zeta2)?;
    let base = params.with_zeta(zeta);
    let maps = build_fusion_maps(&base)?;
    let spin = LabeledSpace::spin();
    let id_v = LinearOperator::identity(&spin);
    let iota1 = maps.iota.tensor(&id_v);
    let pi1 = maps.pi.tensor(&id_v);

    let full = maps.iota.codomain().tensor(&spin);
    let l13 = build_l(&base)?.op.embed(&full, &[0, 2])?;
    let r23 = build_rbar(zeta, q)?.op.embed(&full, &[1, 2])?;
    let lr = &l13 * &r23;

    let pre = (ONE - q * q * zeta * zeta) / nonzero("zeta^2 = 1", ONE - zeta * zeta)?;
    let l_sub = build_l(&maps.sub.with_zeta(zeta * q))?.op;
    let l_quo = build_l(&maps.quotient.with_zeta(zeta / q))?.op;
    Ok(FusedSides {
        iota_lhs: &iota1 * &l_sub,
        iota_rhs: (&lr * &iota1).scale(pre),
        pi_lhs: &l_quo * &pi1,
        pi_rhs: (&pi1 * &lr).scale(q.inv()),
    })
}

pub fn check_fused_l(params: &ReprParams, zeta2: C64) -> Result<VerificationReport> {
    let s = fused_l_sides(params, zeta2)?;
    let mut report = VerificationReport::new();
    report.push(Check::new(
        "fusion.fused_l_iota",
        "(iota (x) 1) L'(zeta q) = ((1 - q^2 zeta^2)/(1 - zeta^2)) L13(zeta) Rbar23(zeta) (iota (x) 1)",
        interior_residual(&s.iota_lhs, &s.iota_rhs, FUSED_L_MARGIN)?,
        FUSED_L_TOL,
    ));
    report.push(Check::new(
        "fusion.fused_l_pi",
        "L''(zeta/q) (pi (x) 1) = q^-1 (pi (x) 1) L13(zeta) Rbar23(zeta)",
        interior_residual(&s.pi_lhs, &s.pi_rhs, FUSED_L_MARGIN)?,
        FUSED_L_TOL,
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Atom;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn example() -> ReprParams {
        ReprParams::new(
            cx(0.45, 0.0),
            cx(0.8, 0.0),
            [cx(1.2, 0.0), cx(0.3, 0.0), cx(0.15, 0.0)],
            TruncationSpec::window(-6, 6).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn exactness_and_module_maps() {
        let maps = build_fusion_maps(&example()).unwrap();
        let rep = check_exactness(&maps).unwrap();
        assert!(rep.passed(), "{:?}", rep.worst());
        let rep = check_module_maps(&maps).unwrap();
        assert!(rep.passed(), "{:?}", rep.worst());
    }

    #[test]
    fn pi_on_v_minus_kills_a_j() {
        let p = example();
        let maps = build_fusion_maps(&p).unwrap();
        let (q, r0, r1) = (p.q, p.r[0], p.r[1]);
        for j in -4..=4i64 {
            let col = [Atom::Level(j), Atom::Spin(crate::Spin::Down)];
            let got = maps.pi.element(&[Atom::Level(j)], &col).unwrap();
            let ji = j as i32;
            assert!((got + r0 * (q.powi(ji) * r1 + q.powi(-ji))).norm() < 1e-12);
        }
    }

    #[test]
    fn fused_l_example() {
        let p = example();
        let rep = check_fused_l(&p, cx(1.1, 0.0)).unwrap();
        assert!(rep.passed(), "{:?}", rep.worst());
    }

    #[test]
    fn fused_l_single_column() {
        let p = example();
        let s = fused_l_sides(&p, cx(1.1, 0.0)).unwrap();
        let col = s
            .iota_lhs
            .domain()
            .index_of(&[Atom::Level(0), Atom::Spin(crate::Spin::Up)])
            .unwrap();
        let rows = s.iota_lhs.codomain().interior_indices(FUSED_L_MARGIN);
        for r in rows {
            let (a, b) = (s.iota_lhs.entries()[(r, col)], s.iota_rhs.entries()[(r, col)]);
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }

    #[test]
    fn fused_l_at_r1_zero() {
        let p = example().with_r([cx(1.2, 0.0), ZERO, cx(0.15, 0.0)]).unwrap();
        let maps = build_fusion_maps(&p).unwrap();
        assert_eq!(maps.sub.r[1], ZERO);
        assert!((maps.sub.r[0] - p.q * p.r[0]).norm() < 1e-15);
        assert!(check_fused_l(&p, cx(1.1, 0.0)).unwrap().passed());
    }

    #[test]
    fn degenerate_coefficient_is_flagged() {
        let q = cx(0.5, 0.0);
        // q^(j-1) r1 + q^(1-j) = 0 at j = 2.
        let p = ReprParams::new(q, ONE, [ONE, -q.powi(-2), ZERO], TruncationSpec::window(-4, 4).unwrap()).unwrap();
        assert!(matches!(build_fusion_maps(&p), Err(Error::DegenerateFusion { j: 2 })));
    }
}
