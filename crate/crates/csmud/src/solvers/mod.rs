//! The block-coordinate detector family.
//!
//! Three iteration schemes share the closed-form row update: the plain
//! scheme sweeps every user each iteration; the pruning scheme discards
//! low-energy users during the first `t_b` sweeps; the cached scheme is the
//! pruning scheme with the per-user interference matrix maintained
//! incrementally instead of being rebuilt, which removes the redundant
//! products without changing the mathematics.

mod bcd;
mod cr_ebcd;
mod ebcd;
mod refine;
mod soa;
mod support;

pub use bcd::{closed_form_update, objective, residual_for_user, run_bcd, run_bcd_probed, BcdStep};
pub use cr_ebcd::{
    run_cr_ebcd, run_cr_ebcd_with, w_first_full, w_first_incremental, w_step, CrEbcdOptions, WStep,
};
pub use ebcd::{prune, run_ebcd};
pub use refine::{ls_refine, LsRefined};
pub use support::{demap, oracle_support, row_energies, select_top_energies, threshold_support};

use serde::{Deserialize, Serialize};

use crate::complexity::{Algorithm, ComplexityLedger, ComplexityParams, PhaseTally};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Iteration and support-decision parameters shared by the detector family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Row regularization weight (twice the penalty weight of the objective).
    pub lambda0: f64,
    /// Total sweeps.
    pub t: usize,
    /// Sweeps that end with a pruning step.
    pub t_b: usize,
    /// Users discarded after each of the first `t_b` sweeps.
    pub psi_schedule: Vec<usize>,
    /// Row-energy threshold for declaring a user active.
    pub v_th: f64,
}

impl SolverParams {
    /// Reference settings: lambda0 = 0.7, 12 sweeps, 8 pruning sweeps
    /// discarding 20 users each.
    pub fn reference(v_th: f64) -> Self {
        SolverParams {
            lambda0: 0.7,
            t: 12,
            t_b: 8,
            psi_schedule: vec![20; 8],
            v_th,
        }
    }

    /// Plain-sweep settings (no pruning).
    pub fn plain(lambda0: f64, t: usize, v_th: f64) -> Self {
        SolverParams {
            lambda0,
            t,
            t_b: 0,
            psi_schedule: vec![],
            v_th,
        }
    }

    /// Final candidate-set size after the full schedule.
    pub fn ka_final(&self, k: usize) -> usize {
        k.saturating_sub(self.psi_schedule.iter().sum())
    }

    /// Hard validity: the schedule must be executable for `k` users.
    pub fn validate_for(&self, k: usize) -> Result<()> {
        if !(self.lambda0 > 0.0) || !self.lambda0.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "lambda0 ({}) must be positive and finite",
                self.lambda0
            )));
        }
        if self.t_b > self.t {
            return Err(Error::InvalidSchedule(format!(
                "t_b ({}) exceeds t ({})",
                self.t_b, self.t
            )));
        }
        if self.psi_schedule.len() != self.t_b {
            return Err(Error::InvalidSchedule(format!(
                "schedule length {} != t_b {}",
                self.psi_schedule.len(),
                self.t_b
            )));
        }
        let mut ka = k;
        for (i, &psi) in self.psi_schedule.iter().enumerate() {
            if psi > ka {
                return Err(Error::InvalidSchedule(format!(
                    "psi^({}) = {psi} exceeds remaining candidate set {ka}",
                    i + 1
                )));
            }
            ka -= psi;
        }
        Ok(())
    }

    /// Recommended operating envelope on top of `validate_for`: keep at
    /// least 20% of the users in the final candidate set so sporadically
    /// active users are not pruned away.
    pub fn validate_recommended(&self, k: usize) -> Result<()> {
        self.validate_for(k)?;
        let ka = self.ka_final(k);
        if 5 * ka < k {
            return Err(Error::InvalidSchedule(format!(
                "final candidate set {ka} is below 20% of {k} users"
            )));
        }
        Ok(())
    }

    /// Even schedule reaching `ka_final` in `t_b` pruning sweeps, the
    /// remainder spread over the earliest sweeps.
    pub fn uniform_schedule(k: usize, ka_final: usize, t_b: usize) -> Result<Vec<usize>> {
        if ka_final > k {
            return Err(Error::InvalidSchedule(format!(
                "ka_final ({ka_final}) exceeds k ({k})"
            )));
        }
        let drop = k - ka_final;
        if t_b == 0 {
            return if drop == 0 {
                Ok(vec![])
            } else {
                Err(Error::InvalidSchedule(
                    "cannot discard users with t_b = 0".into(),
                ))
            };
        }
        let base = drop / t_b;
        let extra = drop % t_b;
        Ok((0..t_b)
            .map(|i| base + usize::from(i < extra))
            .collect())
    }

    fn complexity_params(&self, k: usize, n: usize, j: usize, pruned: bool) -> ComplexityParams {
        ComplexityParams {
            k,
            n,
            j,
            t: self.t,
            t_b: if pruned { self.t_b } else { 0 },
            psi_schedule: if pruned {
                self.psi_schedule.clone()
            } else {
                vec![]
            },
            s: 0,
        }
    }
}

/// Candidate set plus the running estimate, as carried between sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateState {
    /// Surviving user indices, ascending.
    pub omega: Vec<usize>,
    /// K x J estimate; rows outside `omega` are exactly zero.
    pub x_hat: CMat,
}

impl CandidateState {
    pub fn k_a(&self) -> usize {
        self.omega.len()
    }
}

/// Raw sweep output of one detector run, before support selection.
#[derive(Debug, Clone)]
pub struct RawEstimate {
    pub x_hat: CMat,
    /// Final candidate set (all users for the plain scheme).
    pub final_omega: Vec<usize>,
    /// Candidate set in effect at the start of each sweep.
    pub omega_history: Vec<Vec<usize>>,
    /// Sweep and pruning tallies; the pipeline adds the remaining phases.
    pub tally: PhaseTally,
}

/// Detector selection for a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Bcd,
    Ebcd,
    CrEbcd,
    OracleBcd,
    OracleCrEbcd,
    OracleLs,
}

impl SolverKind {
    pub const ALL: [SolverKind; 6] = [
        SolverKind::Bcd,
        SolverKind::Ebcd,
        SolverKind::CrEbcd,
        SolverKind::OracleBcd,
        SolverKind::OracleCrEbcd,
        SolverKind::OracleLs,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Bcd => "bcd",
            SolverKind::Ebcd => "ebcd",
            SolverKind::CrEbcd => "cr-ebcd",
            SolverKind::OracleBcd => "oracle-bcd",
            SolverKind::OracleCrEbcd => "oracle-cr-ebcd",
            SolverKind::OracleLs => "oracle-ls",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown solver `{s}`")))
    }

    /// True when the detector is given the exact number of active users.
    pub fn is_oracle(&self) -> bool {
        matches!(
            self,
            SolverKind::OracleBcd | SolverKind::OracleCrEbcd | SolverKind::OracleLs
        )
    }

    fn algorithm(&self) -> Algorithm {
        match self {
            SolverKind::Bcd | SolverKind::OracleBcd => Algorithm::Bcd,
            SolverKind::Ebcd => Algorithm::Ebcd,
            SolverKind::CrEbcd | SolverKind::OracleCrEbcd => Algorithm::CrEbcd,
            SolverKind::OracleLs => Algorithm::OracleLs,
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full detection output for one frame.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    /// Estimated active set, ascending.
    pub gamma_hat: Vec<usize>,
    /// K x J LS-refined estimate, zero outside `gamma_hat`.
    pub x_refined: CMat,
    /// K x J hard decisions over the augmented alphabet (0 for silent rows).
    pub decisions: CMat,
    pub ledger: ComplexityLedger,
    /// Set when the LS refinement hit numerical rank deficiency.
    pub ls_rank_deficient: bool,
}

/// Runs the full pipeline for one frame: sweeps, support selection, LS
/// refinement, and hard decisions.
///
/// `gamma_true` supplies the oracle side information: the oracle sweep
/// variants take the exact support size from it, and `oracle-ls` uses the
/// set itself.
pub fn detect(
    y: &CMat,
    g: &CMat,
    kind: SolverKind,
    params: &SolverParams,
    constellation: &Constellation,
    gamma_true: Option<&[usize]>,
) -> Result<DetectionResult> {
    let (n, j) = y.dim();
    let k = g.ncols();
    if g.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "received is {n}x{j} but equivalent channel has {} rows",
            g.nrows()
        )));
    }
    let truth = || {
        gamma_true.ok_or_else(|| {
            Error::InvalidConfig(format!("solver {kind} needs the true support"))
        })
    };

    // Sweep phase.
    let (raw, pruned) = match kind {
        SolverKind::Bcd | SolverKind::OracleBcd => (run_bcd(y, g, params)?, false),
        SolverKind::Ebcd => (run_ebcd(y, g, params)?, true),
        SolverKind::CrEbcd | SolverKind::OracleCrEbcd => (run_cr_ebcd(y, g, params)?, true),
        SolverKind::OracleLs => (
            RawEstimate {
                x_hat: CMat::zeros((k, j)),
                final_omega: vec![],
                omega_history: vec![],
                tally: PhaseTally::default(),
            },
            false,
        ),
    };

    // Support selection.
    let mut tally = raw.tally;
    let gamma_hat = match kind {
        SolverKind::OracleLs => truth()?.to_vec(),
        SolverKind::OracleBcd | SolverKind::OracleCrEbcd => {
            tally.thresholding += 2 * raw.final_omega.len() as u64;
            oracle_support(&raw.x_hat, truth()?.len())
        }
        _ => {
            tally.thresholding += 2 * raw.final_omega.len() as u64;
            threshold_support(&raw.x_hat, params.v_th)
        }
    };

    // LS refinement over the detected support, then per-entry decisions.
    let refined = ls_refine(y, g, &gamma_hat)?;
    let s = gamma_hat.len() as u64;
    tally.least_squares += j as u64 * (2 * n as u64 * s * s + s * s * s);
    let decisions = demap(&refined.x_refined, &gamma_hat, constellation);

    let mut cparams = params.complexity_params(k, n, j, pruned);
    if kind == SolverKind::OracleLs {
        cparams.t = 0;
    }
    cparams.s = gamma_hat.len();
    let mut ledger = ComplexityLedger::new(kind.algorithm(), cparams);
    ledger.counted = tally;

    Ok(DetectionResult {
        gamma_hat,
        x_refined: refined.x_refined,
        decisions,
        ledger,
        ls_rank_deficient: refined.rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_roundtrip() {
        for kind in SolverKind::ALL {
            assert_eq!(SolverKind::parse(kind.name()).unwrap(), kind);
        }
        assert!(SolverKind::parse("newton").is_err());
        assert_eq!(
            SolverKind::parse("ORACLE_LS").unwrap(),
            SolverKind::OracleLs
        );
    }

    #[test]
    fn schedule_validation_rules() {
        let p = SolverParams::reference(0.7);
        p.validate_for(200).unwrap();
        p.validate_recommended(200).unwrap();
        assert_eq!(p.ka_final(200), 40);

        let mut bad = p.clone();
        bad.t_b = 13;
        bad.psi_schedule = vec![10; 13];
        assert!(bad.validate_for(200).is_err());

        let mut deep = p.clone();
        deep.psi_schedule = vec![24; 8]; // ka_final = 8 < 40 = 0.2K
        assert!(deep.validate_for(200).is_ok());
        assert!(deep.validate_recommended(200).is_err());
    }

    #[test]
    fn uniform_schedule_spreads_remainder() {
        let s = SolverParams::uniform_schedule(200, 40, 8).unwrap();
        assert_eq!(s, vec![20; 8]);
        let s = SolverParams::uniform_schedule(200, 40, 3).unwrap();
        assert_eq!(s.iter().sum::<usize>(), 160);
        assert_eq!(s, vec![54, 53, 53]);
        assert!(SolverParams::uniform_schedule(10, 20, 2).is_err());
        assert_eq!(
            SolverParams::uniform_schedule(10, 10, 0).unwrap(),
            Vec::<usize>::new()
        );
        assert!(SolverParams::uniform_schedule(10, 5, 0).is_err());
    }
}
