//! Named verification groups and their composition into `verify all`.

use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::defect::{
    check_both_candidates, check_functional_equation_operator, check_functional_equation_scalar,
    check_h_series_vs_product, check_rll_defect, DefectCase,
};
use crate::error::{Error, Result};
use crate::fusion::{build_fusion_maps, check_exactness, check_fused_l, check_module_maps};
use crate::intertwiners::{
    check_crossing, check_finite_spin_reduction, check_l_intertwining, check_l_inverse, check_rbar_intertwining,
    check_yang_baxter, check_yang_baxter_degenerate,
};
use crate::lattice::{
    check_charge_blocks, check_commuting_family, check_hamiltonian_params, check_hamiltonian_vs_log_derivative,
    ChainSpec, DefectArgument, LATTICE_MARGIN,
};
use crate::linalg::{Residual, C64, ZERO};
use crate::report::{Check, ReportLine, VerificationReport};
use crate::repr::{
    build_borel_w, build_evaluation_v, build_oscillator_ops, check_borel_relations,
    check_finite_truncation_isomorphism, check_oscillator_relations, check_q_oscillator_limit, check_uq_relations,
    FiniteSpinSign, ReprParams, TruncationSpec,
};
use crate::sampling::{Fixed, Sample, Sampler};
use crate::sine_gordon::{
    check_b_minus_zero, check_finite_truncation, check_s_identification, check_stt, check_utt, check_utt_degenerate,
    TypeI, TypeII,
};

/// Every verification group, in report order.
pub const GROUPS: [&str; 15] = [
    "relations",
    "rbar",
    "intertwining",
    "yb",
    "inverse",
    "crossing",
    "fusion",
    "ddrll",
    "isomorphism",
    "commute",
    "hvslogt",
    "smatrix",
    "stt",
    "utt",
    "sgfinite",
];

/// Sine-Gordon parameters shared by the `smatrix`, `stt`, `utt` and
/// `sgfinite` groups.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SgConfig {
    pub gamma: f64,
    pub theta: f64,
    pub eta: f64,
    pub nu: C64,
    pub b_plus: C64,
    pub b_minus: C64,
    pub b_bar: Option<[C64; 2]>,
}

impl Default for SgConfig {
    fn default() -> Self {
        SgConfig {
            gamma: 0.3,
            theta: 0.4,
            eta: 0.3,
            nu: C64::new(1.2, 0.0),
            b_plus: C64::new(1.1, 0.0),
            b_minus: C64::new(0.4, 0.0),
            b_bar: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub fixed: Fixed,
    pub trunc: TruncationSpec,
    /// Window for the sine-Gordon groups. At `|q| = 1` the defect series
    /// has poles at `q^(2m) = 1`, so this stays narrow by default.
    pub sg_trunc: TruncationSpec,
    pub sg: SgConfig,
    pub samples: usize,
    pub seed: u64,
    /// Overrides every per-identity tolerance when set.
    pub tol: Option<f64>,
    /// Overrides the interior margin of the lattice groups when set.
    pub margin: Option<usize>,
    pub chain_len: usize,
    pub defect_pos: usize,
    pub timings: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            fixed: Fixed::default(),
            trunc: TruncationSpec::Window { jmin: -6, jmax: 6 },
            sg_trunc: TruncationSpec::Window { jmin: -4, jmax: 4 },
            sg: SgConfig::default(),
            samples: 1,
            seed: 0,
            tol: None,
            margin: None,
            chain_len: 4,
            defect_pos: 1,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOutput {
    pub lines: Vec<ReportLine>,
    pub warnings: Vec<String>,
}

impl SuiteOutput {
    pub fn passed(&self) -> bool {
        !self.lines.is_empty() && self.lines.iter().all(|l| l.pass)
    }

    pub fn to_json_lines(&self) -> String {
        self.lines.iter().map(|l| l.to_json_line() + "\n").collect()
    }
}

fn c(v: C64) -> Value {
    json!([v.re, v.im])
}

/// Window `trunc ∩ [-4, 4]`, used where the closed-form inverse is involved:
/// its entries grow like `|q|^(-2|j|)`.
fn inverse_window(trunc: TruncationSpec) -> TruncationSpec {
    match trunc {
        TruncationSpec::Window { jmin, jmax } => {
            let (lo, hi) = (jmin.max(-4), jmax.min(4));
            if hi - lo >= TruncationSpec::MIN_WINDOW_WIDTH {
                TruncationSpec::Window { jmin: lo, jmax: hi }
            } else {
                trunc
            }
        }
        other => other,
    }
}

fn params_at(s: &Sample, zeta: C64, r: [C64; 3], trunc: TruncationSpec) -> Result<ReprParams> {
    ReprParams::new(s.q, zeta, r, trunc)
}

fn algebraic_params(s: &Sample, trunc: TruncationSpec, index: usize) -> Value {
    json!({
        "sample": index,
        "q": c(s.q),
        "zeta": s.zeta.iter().copied().map(c).collect::<Vec<_>>(),
        "r": s.r.iter().copied().map(c).collect::<Vec<_>>(),
        "trunc": trunc.to_string(),
    })
}

struct SgSample {
    theta2: f64,
    theta3: f64,
    eta2: f64,
}

fn sg_params(cfg: &SuiteConfig, sg: &SgSample, index: usize) -> Value {
    let g = &cfg.sg;
    json!({
        "sample": index,
        "gamma": g.gamma,
        "theta": [sg.theta2, sg.theta3],
        "eta": [g.eta, sg.eta2],
        "nu": c(g.nu),
        "b_plus": c(g.b_plus),
        "b_minus": c(g.b_minus),
        "trunc": cfg.sg_trunc.to_string(),
    })
}

fn run_algebraic(group: &str, cfg: &SuiteConfig, s: &Sample, sampler: &mut Sampler) -> Result<VerificationReport> {
    let [z1, z2, z3] = s.zeta;
    let trunc = cfg.trunc;
    let p = params_at(s, z1, s.r, trunc)?;
    let mut report = VerificationReport::new();
    match group {
        "relations" => {
            let ops = build_oscillator_ops(&p)?;
            report.extend(check_oscillator_relations(&ops)?);
            for r12 in [[s.r[0], ZERO, s.r[2]], [s.r[0], s.r[1], ZERO]] {
                report.extend(check_q_oscillator_limit(&build_oscillator_ops(&p.with_r(r12)?)?)?);
            }
            report.extend(check_borel_relations(&build_borel_w(&p)?)?);
            report.extend(check_uq_relations(&build_evaluation_v(z2, s.q)?)?);
        }
        "rbar" => report.extend(check_rbar_intertwining(z1, z2, s.q)?),
        "intertwining" => report.extend(check_l_intertwining(&p, z2)?),
        "yb" => {
            report.push(check_yang_baxter(&p, z2, z3)?);
            report.extend(check_yang_baxter_degenerate(&p, z2)?);
            for sign in FiniteSpinSign::BOTH {
                report.extend(check_finite_spin_reduction(sign, s.q, z1, z2, z3)?);
            }
        }
        "inverse" => report.extend(check_l_inverse(&params_at(s, z1 / z2, s.r, inverse_window(trunc))?)?),
        "crossing" => report.extend(check_crossing(&params_at(s, z1 / z2, s.r, inverse_window(trunc))?)?),
        "fusion" => {
            let maps = build_fusion_maps(&p)?;
            report.extend(check_exactness(&maps)?);
            report.extend(check_module_maps(&maps)?);
            report.extend(check_fused_l(&p, z2)?);
        }
        "ddrll" => {
            report.push(check_h_series_vs_product(s.q)?);
            // The series converges for |v zeta| < 1.
            let zeta = z1 / z2;
            let v = sampler.complex() / zeta.norm().max(1.0);
            report.push(check_functional_equation_scalar(zeta, v, s.q)?.with_tol(1e-9));
            for case in DefectCase::BOTH {
                let r = match case {
                    DefectCase::R1Zero => [s.r[0], ZERO, s.r[2]],
                    DefectCase::R2Zero => [s.r[0], s.r[1], ZERO],
                };
                let p1 = params_at(s, z1, r, trunc)?;
                report.push(check_functional_equation_operator(case, &p1, z1 / z2)?);
                report.push(check_rll_defect(case, &p1, &p1.with_zeta(z2))?);
            }
            let p0 = params_at(s, z1, [s.r[0], ZERO, ZERO], trunc)?;
            report.extend(check_both_candidates(&p0, &p0.with_zeta(z2))?);
        }
        "isomorphism" => {
            for n in 0..=2 {
                for sign in FiniteSpinSign::BOTH {
                    report.extend(check_finite_truncation_isomorphism(n, sign, s.q, z1)?.1);
                }
            }
        }
        "commute" => {
            let margin = cfg.margin.unwrap_or(LATTICE_MARGIN);
            let chain = ChainSpec::new(cfg.chain_len, cfg.defect_pos, p, DefectArgument::Scaled(z3))?;
            report.extend(check_commuting_family(&chain, &[(z1, z2)], margin)?);
            report.push(check_charge_blocks(&chain, z1)?);
        }
        "hvslogt" => {
            let margin = cfg.margin.unwrap_or(LATTICE_MARGIN);
            report.extend(check_hamiltonian_params(s.q)?.1);
            let chain = ChainSpec::new(cfg.chain_len, cfg.defect_pos, p, DefectArgument::Shifted)?;
            report.push(check_hamiltonian_vs_log_derivative(&chain, margin)?);
            report.push(check_hamiltonian_vs_log_derivative(&chain.without_defect(), 0)?);
        }
        other => return Err(Error::InvalidParams(format!("unknown group `{other}`"))),
    }
    Ok(report)
}

fn run_sine_gordon(group: &str, cfg: &SuiteConfig, sg: &SgSample) -> Result<VerificationReport> {
    let g = &cfg.sg;
    let t1 = TypeI { eta: g.eta, nu: g.nu };
    let t2 = TypeII {
        b_plus: g.b_plus,
        b_minus: g.b_minus,
        b_bar: g.b_bar,
    };
    let mut report = VerificationReport::new();
    match group {
        "smatrix" => report.extend(check_s_identification(sg.theta2, g.gamma)?),
        "stt" => report.extend(check_stt(g.gamma, sg.theta2, sg.theta3, &t1, &t2, cfg.sg_trunc)?),
        "utt" => {
            let t1b = TypeI { eta: sg.eta2, ..t1 };
            report.extend(check_utt(g.gamma, sg.theta2, &t1, &t1b, cfg.sg_trunc)?);
            report.extend(check_utt_degenerate(g.gamma, sg.theta2, &t1, cfg.sg_trunc)?);
        }
        "sgfinite" => {
            for sign in FiniteSpinSign::BOTH {
                report.push(check_finite_truncation(sign, g.gamma, sg.theta2)?);
            }
            report.push(check_b_minus_zero(g.gamma, sg.theta2, g.b_plus, cfg.sg_trunc)?);
        }
        other => return Err(Error::InvalidParams(format!("unknown group `{other}`"))),
    }
    Ok(report)
}

fn is_sine_gordon(group: &str) -> bool {
    matches!(group, "smatrix" | "stt" | "utt" | "sgfinite")
}

struct GroupRun {
    lines: Vec<ReportLine>,
    warnings: Vec<String>,
}

fn error_line(group: &str, err: &Error, params: Value) -> ReportLine {
    let nan = Residual {
        absolute: f64::NAN,
        relative: f64::NAN,
        margin: 0,
    };
    ReportLine::from_check(
        &Check::new(format!("{group}.error"), err.to_string(), nan, 0.0),
        params,
        None,
    )
}

fn run_one(group: &str, stream: u64, index: usize, cfg: &SuiteConfig) -> GroupRun {
    let mut sampler = Sampler::new(cfg.seed, stream);
    let start = Instant::now();
    let (result, params) = if is_sine_gordon(group) {
        // The first sample uses the configured rapidity; later ones draw it.
        let theta2 = if index == 0 {
            cfg.sg.theta
        } else {
            sampler.real(-1.0, 1.0)
        };
        let sg = SgSample {
            theta2,
            theta3: theta2 - sampler.real(0.2, 1.2),
            eta2: cfg.sg.eta - sampler.real(0.2, 1.0),
        };
        (run_sine_gordon(group, cfg, &sg), sg_params(cfg, &sg, index))
    } else {
        let s = sampler.sample(&cfg.fixed);
        (
            run_algebraic(group, cfg, &s, &mut sampler),
            algebraic_params(&s, cfg.trunc, index),
        )
    };
    let ms = cfg.timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    let lines = match result {
        Ok(report) => report
            .checks
            .iter()
            .map(|chk| {
                let chk = match cfg.tol {
                    Some(t) if !chk.pinned => chk.clone().with_tol(t),
                    _ => chk.clone(),
                };
                ReportLine::from_check(&chk, params.clone(), ms)
            })
            .collect(),
        Err(e) => vec![error_line(group, &e, params)],
    };
    GroupRun {
        lines,
        warnings: sampler.warnings,
    }
}

/// Runs the named groups (`"all"` for every group) with `cfg.samples`
/// samples each. Lines are sorted by identity, then sample index.
pub fn run_groups(groups: &[&str], cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut selected = Vec::new();
    for &g in groups {
        if g == "all" {
            selected.extend(GROUPS.iter().copied());
        } else if let Some(k) = GROUPS.iter().position(|&x| x == g) {
            selected.push(GROUPS[k]);
        } else {
            return Err(Error::InvalidParams(format!("unknown verification group `{g}`")));
        }
    }
    let mut jobs = Vec::new();
    for g in selected {
        let k = GROUPS.iter().position(|&x| x == g).expect("selected from GROUPS") as u64;
        for i in 0..cfg.samples {
            jobs.push((g, (k << 32) | i as u64, i));
        }
    }
    let runs: Vec<GroupRun> = jobs
        .par_iter()
        .map(|&(g, stream, i)| run_one(g, stream, i, cfg))
        .collect();
    let mut lines = Vec::new();
    let mut warnings = BTreeSet::new();
    for run in runs {
        lines.extend(run.lines);
        warnings.extend(run.warnings);
    }
    lines.sort_by(|a, b| a.identity.cmp(&b.identity));
    Ok(SuiteOutput {
        lines,
        warnings: warnings.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_group_is_rejected() {
        assert!(run_groups(&["nope"], &SuiteConfig::default()).is_err());
    }

    #[test]
    fn lines_are_sorted_and_reproducible() {
        let cfg = SuiteConfig {
            samples: 2,
            seed: 11,
            ..SuiteConfig::default()
        };
        let a = run_groups(&["rbar", "smatrix"], &cfg).unwrap();
        let b = run_groups(&["rbar", "smatrix"], &cfg).unwrap();
        assert_eq!(a.to_json_lines(), b.to_json_lines());
        assert!(a.lines.windows(2).all(|w| w[0].identity <= w[1].identity));
        assert!(a.passed(), "{}", a.to_json_lines());
    }

    #[test]
    fn tolerance_override_applies_to_residuals() {
        let cfg = SuiteConfig {
            tol: Some(1e-30),
            ..SuiteConfig::default()
        };
        let out = run_groups(&["intertwining"], &cfg).unwrap();
        assert!(out.lines.iter().all(|l| l.tol == 1e-30));
    }

    #[test]
    fn tolerance_override_leaves_independence_thresholds() {
        let cfg = SuiteConfig {
            tol: Some(1e-8),
            ..SuiteConfig::default()
        };
        let out = run_groups(&["ddrll"], &cfg).unwrap();
        let ind = out
            .lines
            .iter()
            .find(|l| l.identity == "defect.candidates_independent")
            .unwrap();
        assert_eq!(ind.tol, 0.1);
        assert!(out.passed(), "{}", out.to_json_lines());
    }

    #[test]
    fn numerical_errors_become_failing_lines() {
        let cfg = SuiteConfig {
            trunc: TruncationSpec::FiniteSpin { n: 1 },
            ..SuiteConfig::default()
        };
        let out = run_groups(&["fusion"], &cfg).unwrap();
        assert_eq!(out.lines.len(), 1);
        assert!(!out.lines[0].pass);
        assert_eq!(out.lines[0].identity, "fusion.error");
    }
}
