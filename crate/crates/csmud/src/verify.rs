//! Self-verification suite: the invariants that tie the three detectors
//! together, runnable from the CLI. Each check reports a pass/fail verdict
//! and the largest measured deviation.

use serde::Serialize;

use crate::complexity::{reconcile, Algorithm};
use crate::config::{Modulation, SystemConfig};
use crate::constellation::Constellation;
use crate::error::Result;
use crate::linalg::{frob_norm, rel_frob_diff};
use crate::model::FrameInstance;
use crate::rng::{derive_seed, RandomStream};
use crate::solvers::{
    detect, objective, run_bcd_probed, run_cr_ebcd_with, run_ebcd, CrEbcdOptions, SolverKind,
    SolverParams, WStep,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Largest deviation observed, in the check's own units.
    pub deviation: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Restrict to small instances (K <= 10) so the suite stays under a few
    /// seconds.
    pub small_only: bool,
    /// Fault-injection hook: disable the interference cache refresh so the
    /// equivalence checks must fail.
    pub inject_w_fault: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            small_only: false,
            inject_w_fault: false,
            seed: 0x51_0e_71,
        }
    }
}

fn small_cfg(seed: u64) -> SystemConfig {
    SystemConfig {
        k: 10,
        n: 6,
        j: 3,
        sparsity_range: (1, 3),
        modulation: Modulation::Qpsk,
        snr_db: 10.0,
        beta: 0.0,
        seed,
        sigma2_override: None,
    }
}

fn small_params() -> SolverParams {
    SolverParams {
        lambda0: 0.7,
        t: 8,
        t_b: 2,
        psi_schedule: vec![3, 3],
        v_th: 0.4,
    }
}

fn brute_force_w(
    g: &crate::linalg::CMat,
    x_hat: &crate::linalg::CMat,
    omega: &[usize],
    user: usize,
) -> crate::linalg::CMat {
    let (n, _) = g.dim();
    let j = x_hat.ncols();
    let mut w = crate::linalg::CMat::zeros((n, j));
    for &l in omega {
        if l == user {
            continue;
        }
        for col in 0..j {
            for row in 0..n {
                w[[row, col]] += g[[row, l]] * x_hat[[l, col]];
            }
        }
    }
    w
}

/// Cached interference vs. its defining sum at every sweep position.
pub fn check_w_recursion(instances: usize, opts: &VerifyOptions) -> Result<CheckResult> {
    let cfg = small_cfg(opts.seed);
    let params = small_params();
    let mut worst: f64 = 0.0;
    let mut positions = 0usize;
    for inst in 0..instances {
        let mut rng = RandomStream::new(derive_seed(opts.seed, 1, inst as u64));
        let frame = FrameInstance::generate(&cfg, &mut rng)?;
        let mut probe = |step: WStep| {
            let brute = brute_force_w(&frame.equivalent, &step.x_hat, &step.omega, step.user);
            let denom = frob_norm(&brute).max(1e-9);
            let diff = frob_norm(&(&step.w - &brute)) / denom;
            worst = worst.max(diff);
            positions += 1;
        };
        run_cr_ebcd_with(
            &frame.received,
            &frame.equivalent,
            &params,
            CrEbcdOptions {
                probe: Some(&mut probe),
                freeze_cache_after_pruning: opts.inject_w_fault,
            },
        )?;
    }
    Ok(CheckResult {
        name: "w-recursion",
        passed: worst < 1e-9,
        deviation: worst,
        detail: format!("{positions} positions over {instances} instances, max relative gap {worst:.3e}"),
    })
}

/// Rebuilt and cached sweeps must make identical pruning decisions, detect
/// the same support, and agree on the raw estimate to 1e-9 relative.
pub fn check_equivalence(instances: usize, opts: &VerifyOptions) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut sequence_breaks = 0usize;
    let mut support_breaks = 0usize;
    let scales: &[(SystemConfig, SolverParams)] = &if opts.small_only {
        vec![(small_cfg(opts.seed), small_params())]
    } else {
        vec![
            (small_cfg(opts.seed), small_params()),
            (
                SystemConfig::reference(4.0, opts.seed),
                SolverParams::reference(0.86),
            ),
        ]
    };
    for (cfg, params) in scales {
        let per_scale = if cfg.k > 50 { instances.min(3) } else { instances };
        for inst in 0..per_scale {
            let mut rng = RandomStream::new(derive_seed(opts.seed, 2, inst as u64));
            let frame = FrameInstance::generate(cfg, &mut rng)?;
            let a = run_ebcd(&frame.received, &frame.equivalent, params)?;
            let b = run_cr_ebcd_with(
                &frame.received,
                &frame.equivalent,
                params,
                CrEbcdOptions {
                    probe: None,
                    freeze_cache_after_pruning: opts.inject_w_fault,
                },
            )?;
            if a.omega_history != b.omega_history {
                sequence_breaks += 1;
            }
            let ga = crate::solvers::threshold_support(&a.x_hat, params.v_th);
            let gb = crate::solvers::threshold_support(&b.x_hat, params.v_th);
            if ga != gb {
                support_breaks += 1;
            }
            worst = worst.max(rel_frob_diff(&b.x_hat, &a.x_hat));
        }
    }
    let passed = worst < 1e-9 && sequence_breaks == 0 && support_breaks == 0;
    Ok(CheckResult {
        name: "ebcd-cr-ebcd-equivalence",
        passed,
        deviation: worst,
        detail: format!(
            "max relative estimate gap {worst:.3e}, {sequence_breaks} pruning-sequence breaks, {support_breaks} support breaks"
        ),
    })
}

/// The sweep objective must never increase along coordinate updates.
pub fn check_monotonicity(instances: usize, opts: &VerifyOptions) -> Result<CheckResult> {
    let cfg = small_cfg(opts.seed);
    let params = SolverParams::plain(0.7, 6, 0.4);
    let mut worst_rise: f64 = 0.0;
    for inst in 0..instances {
        let mut rng = RandomStream::new(derive_seed(opts.seed, 3, inst as u64));
        let frame = FrameInstance::generate(&cfg, &mut rng)?;
        let mut last = objective(
            &frame.received,
            &frame.equivalent,
            &crate::linalg::CMat::zeros((cfg.k, cfg.j)),
            params.lambda0,
        );
        run_bcd_probed(&frame.received, &frame.equivalent, &params, &mut |step| {
            let now = objective(&frame.received, &frame.equivalent, &step.x_hat, params.lambda0);
            let rise = (now - last) / last.abs().max(1e-12);
            worst_rise = worst_rise.max(rise);
            last = now;
        })?;
    }
    Ok(CheckResult {
        name: "objective-monotonicity",
        passed: worst_rise <= 1e-12,
        deviation: worst_rise.max(0.0),
        detail: format!("max relative objective rise {worst_rise:.3e}"),
    })
}

/// Counted complex multiplications vs. the closed-form budgets.
pub fn check_reconciliation(opts: &VerifyOptions) -> Result<CheckResult> {
    let (cfg, params) = if opts.small_only {
        (small_cfg(opts.seed), small_params())
    } else {
        (
            SystemConfig::reference(4.0, opts.seed),
            SolverParams::reference(0.86),
        )
    };
    let mut rng = RandomStream::new(derive_seed(opts.seed, 4, 0));
    let frame = FrameInstance::generate(&cfg, &mut rng)?;
    let constellation = Constellation::new(cfg.modulation);
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for kind in [SolverKind::Bcd, SolverKind::Ebcd, SolverKind::CrEbcd] {
        let result = detect(
            &frame.received,
            &frame.equivalent,
            kind,
            &params,
            &constellation,
            Some(&frame.gamma_true),
        )?;
        let report = reconcile(&result.ledger)?;
        worst = worst.max(report.total_rel_deviation);
        lines.push(format!(
            "{}: counted {} vs analytic {} ({:+.2}%)",
            kind,
            report.counted_total,
            report.analytic_total,
            100.0 * (report.counted_total as f64 / report.analytic_total as f64 - 1.0)
        ));
        debug_assert_eq!(result.ledger.algorithm, algorithm_of(kind));
    }
    Ok(CheckResult {
        name: "counter-reconciliation",
        passed: worst <= 0.05,
        deviation: worst,
        detail: lines.join("; "),
    })
}

fn algorithm_of(kind: SolverKind) -> Algorithm {
    match kind {
        SolverKind::Bcd | SolverKind::OracleBcd => Algorithm::Bcd,
        SolverKind::Ebcd => Algorithm::Ebcd,
        SolverKind::CrEbcd | SolverKind::OracleCrEbcd => Algorithm::CrEbcd,
        SolverKind::OracleLs => Algorithm::OracleLs,
    }
}

/// Runs the full verification suite.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let instances = if opts.small_only { 10 } else { 25 };
    let checks = vec![
        check_w_recursion(instances, opts)?,
        check_equivalence(instances, opts)?,
        check_monotonicity(instances.min(10), opts)?,
        check_reconciliation(opts)?,
    ];
    Ok(VerifyReport { checks })
}
