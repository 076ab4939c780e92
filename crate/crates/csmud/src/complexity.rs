//! Complex-multiplication accounting.
//!
//! The detectors tally the scalar complex products they execute, phase by
//! phase, and this module evaluates the closed-form per-algorithm budgets so
//! the two can be reconciled. Counting convention: one unit per scalar
//! complex product; additions, comparisons and divisions by an already
//! computed scalar are free. Support-selection energies are charged at the
//! conventional 2 per candidate, and the LS refinement is charged by the
//! formula `J (2 N s^2 + s^3)` with `s` the detected support size, not by
//! the factorization actually used.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The three instrumented iteration schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Bcd,
    Ebcd,
    CrEbcd,
    /// Support known a priori; only the LS refinement is charged.
    OracleLs,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Bcd => "bcd",
            Algorithm::Ebcd => "ebcd",
            Algorithm::CrEbcd => "cr-ebcd",
            Algorithm::OracleLs => "oracle-ls",
        }
    }
}

/// Parameter snapshot the analytic formulas are evaluated over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub k: usize,
    pub n: usize,
    pub j: usize,
    pub t: usize,
    pub t_b: usize,
    pub psi_schedule: Vec<usize>,
    /// Detected support size used in the LS term.
    pub s: usize,
}

impl ComplexityParams {
    /// Candidate-set sizes `K_a^(1..=T_b)` plus the final size, i.e. the
    /// sequence produced by applying the pruning schedule to `k`.
    pub fn candidate_sizes(&self) -> Result<(Vec<usize>, usize)> {
        if self.psi_schedule.len() != self.t_b {
            return Err(Error::InvalidSchedule(format!(
                "schedule length {} != t_b {}",
                self.psi_schedule.len(),
                self.t_b
            )));
        }
        if self.t_b > self.t {
            return Err(Error::InvalidSchedule(format!(
                "t_b ({}) exceeds t ({})",
                self.t_b, self.t
            )));
        }
        let mut sizes = Vec::with_capacity(self.t_b);
        let mut ka = self.k;
        for (i, &psi) in self.psi_schedule.iter().enumerate() {
            sizes.push(ka);
            if psi > ka {
                return Err(Error::InvalidSchedule(format!(
                    "psi^({}) = {psi} exceeds remaining candidate set {ka}",
                    i + 1
                )));
            }
            ka -= psi;
        }
        Ok((sizes, ka))
    }

    fn ls_term(&self) -> u64 {
        let (n, j, s) = (self.n as u64, self.j as u64, self.s as u64);
        j * (2 * n * s * s + s * s * s)
    }
}

/// Total budget of the plain block-coordinate scheme:
/// `T K (K N J + N) + 2 K + J (2 N s^2 + s^3)`.
pub fn analytic_bcd(p: &ComplexityParams) -> u64 {
    let (k, n, j, t) = (p.k as u64, p.n as u64, p.j as u64, p.t as u64);
    t * k * (k * n * j + n) + 2 * k + p.ls_term()
}

/// Total budget of the pruning scheme, summed over the shrinking candidate
/// sets and the constant tail.
pub fn analytic_ebcd(p: &ComplexityParams) -> Result<u64> {
    let (sizes, ka_final) = p.candidate_sizes()?;
    let (n, j) = (p.n as u64, p.j as u64);
    let mut total = 0u64;
    for &ka in &sizes {
        let ka = ka as u64;
        total += ka * (ka * n * j + n) + 2 * ka;
    }
    let kaf = ka_final as u64;
    total += (p.t - p.t_b) as u64 * kaf * (kaf * n * j + n);
    total += 2 * kaf;
    Ok(total + p.ls_term())
}

/// Total budget of the cached-interference scheme:
/// first sweep `2NJK + NK - NJ + 2K`, rebuild sweeps
/// `3 K_a N J + K_a N - 2 N J + 2 K_a`, then `(2NJ + N)` per user per sweep.
pub fn analytic_cr_ebcd(p: &ComplexityParams) -> Result<u64> {
    let (sizes, ka_final) = p.candidate_sizes()?;
    let (k, n, j) = (p.k as u64, p.n as u64, p.j as u64);
    let mut total = 2 * n * j * k + n * k - n * j + 2 * k;
    for &ka in sizes.iter().skip(1) {
        let ka = ka as u64;
        total += 3 * ka * n * j + ka * n - 2 * n * j + 2 * ka;
    }
    let kaf = ka_final as u64;
    total += (p.t - p.t_b) as u64 * (2 * n * j + n) * kaf;
    total += 2 * kaf;
    Ok(total + p.ls_term())
}

/// Per-phase complex-multiplication tally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTally {
    pub sweeps: u64,
    pub pruning: u64,
    pub thresholding: u64,
    pub least_squares: u64,
}

impl PhaseTally {
    pub fn total(&self) -> u64 {
        self.sweeps + self.pruning + self.thresholding + self.least_squares
    }
}

/// Counted complex multiplications of one detector run alongside the
/// parameters needed to evaluate the matching analytic budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityLedger {
    pub algorithm: Algorithm,
    pub counted: PhaseTally,
    pub params: ComplexityParams,
}

impl ComplexityLedger {
    pub fn new(algorithm: Algorithm, params: ComplexityParams) -> Self {
        ComplexityLedger {
            algorithm,
            counted: PhaseTally::default(),
            params,
        }
    }

    pub fn total(&self) -> u64 {
        self.counted.total()
    }

    /// Analytic per-phase budget for the snapshot parameters, split with the
    /// same phase boundaries the counter uses.
    pub fn analytic_phases(&self) -> Result<PhaseTally> {
        let p = &self.params;
        let (n, j) = (p.n as u64, p.j as u64);
        match self.algorithm {
            Algorithm::Bcd => {
                let (k, t) = (p.k as u64, p.t as u64);
                Ok(PhaseTally {
                    sweeps: t * k * (k * n * j + n),
                    pruning: 0,
                    thresholding: 2 * k,
                    least_squares: p.ls_term(),
                })
            }
            Algorithm::Ebcd => {
                let (sizes, ka_final) = p.candidate_sizes()?;
                let mut sweeps = 0u64;
                let mut pruning = 0u64;
                for &ka in &sizes {
                    let ka = ka as u64;
                    sweeps += ka * (ka * n * j + n);
                    pruning += 2 * ka;
                }
                let kaf = ka_final as u64;
                sweeps += (p.t - p.t_b) as u64 * kaf * (kaf * n * j + n);
                Ok(PhaseTally {
                    sweeps,
                    pruning,
                    thresholding: 2 * kaf,
                    least_squares: p.ls_term(),
                })
            }
            Algorithm::CrEbcd => {
                let (sizes, ka_final) = p.candidate_sizes()?;
                let k = p.k as u64;
                let mut sweeps = 2 * n * j * k + n * k - n * j;
                let mut pruning = if p.t_b >= 1 { 2 * k } else { 0 };
                for &ka in sizes.iter().skip(1) {
                    let ka = ka as u64;
                    sweeps += 3 * ka * n * j + ka * n - 2 * n * j;
                    pruning += 2 * ka;
                }
                let kaf = ka_final as u64;
                sweeps += (p.t - p.t_b) as u64 * (2 * n * j + n) * kaf;
                Ok(PhaseTally {
                    sweeps,
                    pruning,
                    thresholding: 2 * kaf,
                    least_squares: p.ls_term(),
                })
            }
            Algorithm::OracleLs => Ok(PhaseTally {
                sweeps: 0,
                pruning: 0,
                thresholding: 0,
                least_squares: p.ls_term(),
            }),
        }
    }

    pub fn analytic_total(&self) -> Result<u64> {
        Ok(self.analytic_phases()?.total())
    }
}

/// One phase line of a reconciliation report.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseDeviation {
    pub phase: &'static str,
    pub counted: u64,
    pub analytic: u64,
    /// |counted - analytic| / analytic; zero when both sides are zero.
    pub rel_deviation: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconcileReport {
    pub algorithm: Algorithm,
    pub phases: Vec<PhaseDeviation>,
    pub counted_total: u64,
    pub analytic_total: u64,
    pub total_rel_deviation: f64,
    /// Any phase (or the total) off by more than 5%.
    pub flagged: bool,
}

fn rel_dev(counted: u64, analytic: u64) -> f64 {
    if analytic == 0 {
        if counted == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (counted as f64 - analytic as f64).abs() / analytic as f64
    }
}

/// Compares the counted tallies of a finished run against the analytic
/// budget for the same parameters; deviations above 5% are flagged.
pub fn reconcile(ledger: &ComplexityLedger) -> Result<ReconcileReport> {
    let analytic = ledger.analytic_phases()?;
    let pairs = [
        ("sweeps", ledger.counted.sweeps, analytic.sweeps),
        ("pruning", ledger.counted.pruning, analytic.pruning),
        (
            "thresholding",
            ledger.counted.thresholding,
            analytic.thresholding,
        ),
        (
            "least_squares",
            ledger.counted.least_squares,
            analytic.least_squares,
        ),
    ];
    let phases: Vec<PhaseDeviation> = pairs
        .iter()
        .map(|&(phase, counted, analytic)| {
            let rd = rel_dev(counted, analytic);
            PhaseDeviation {
                phase,
                counted,
                analytic,
                rel_deviation: rd,
                flagged: rd > 0.05,
            }
        })
        .collect();
    let counted_total = ledger.total();
    let analytic_total = analytic.total();
    let total_rel = rel_dev(counted_total, analytic_total);
    let flagged = total_rel > 0.05 || phases.iter().any(|p| p.flagged);
    Ok(ReconcileReport {
        algorithm: ledger.algorithm,
        phases,
        counted_total,
        analytic_total,
        total_rel_deviation: total_rel,
        flagged,
    })
}

/// The reference parameter point used across the experiments: T=12, T_b=8,
/// psi=20 per pruning sweep, s defaulting to 20.
pub fn reference_params(s: usize) -> ComplexityParams {
    ComplexityParams {
        k: 200,
        n: 100,
        j: 7,
        t: 12,
        t_b: 8,
        psi_schedule: vec![20; 8],
        s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bcd_minimal_point() {
        let p = ComplexityParams {
            k: 1,
            n: 1,
            j: 1,
            t: 1,
            t_b: 0,
            psi_schedule: vec![],
            s: 0,
        };
        assert_eq!(analytic_bcd(&p), 4);
    }

    #[test]
    fn ls_term_vanishes_for_zero_sparsity() {
        let with_s = analytic_bcd(&reference_params(20));
        let without = analytic_bcd(&reference_params(0));
        assert_eq!(with_s - without, 7 * (2 * 100 * 400 + 8000));
    }

    #[test]
    fn reference_point_totals() {
        let p = reference_params(20);
        assert_eq!(analytic_bcd(&p), 336_856_400);
        assert_eq!(analytic_ebcd(&p).unwrap(), 111_618_160);
        assert_eq!(analytic_cr_ebcd(&p).unwrap(), 2_995_660);
        let ratio = analytic_ebcd(&p).unwrap() as f64 / analytic_cr_ebcd(&p).unwrap() as f64;
        assert!((ratio - 37.26).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn ebcd_degenerates_to_bcd() {
        let p = ComplexityParams {
            k: 37,
            n: 11,
            j: 3,
            t: 9,
            t_b: 9,
            psi_schedule: vec![0; 9],
            s: 4,
        };
        // zero schedule with t_b = t charges the same sweeps plus the
        // per-sweep (free) pruning bookkeeping of 2K each
        let eb = analytic_ebcd(&p).unwrap();
        let bcd = analytic_bcd(&p);
        assert_eq!(eb, bcd + 2 * 37 * 9);
        let p0 = ComplexityParams {
            t_b: 0,
            psi_schedule: vec![],
            ..p
        };
        assert_eq!(analytic_ebcd(&p0).unwrap(), analytic_bcd(&p0));
    }

    #[test]
    fn cr_ebcd_minimal_point() {
        let p = ComplexityParams {
            k: 1,
            n: 1,
            j: 1,
            t: 1,
            t_b: 1,
            psi_schedule: vec![0],
            s: 0,
        };
        assert_eq!(analytic_cr_ebcd(&p).unwrap(), 6);
    }

    #[test]
    fn strict_ordering_on_randomized_params() {
        let mut state = 0x1234_5678_u64;
        let mut next = move |m: usize| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as usize) % m
        };
        for _ in 0..200 {
            let k = 20 + next(180);
            let n = 4 + next(k.saturating_sub(5).max(1));
            let j = 2 + next(6);
            let t_b = 1 + next(6);
            let t = t_b + 1 + next(6);
            // even pruning that keeps at least 20% of users
            let psi = (k / (2 * t_b)).max(1);
            let p = ComplexityParams {
                k,
                n,
                j,
                t,
                t_b,
                psi_schedule: vec![psi; t_b],
                s: next(n.min(k) + 1),
            };
            let bcd = analytic_bcd(&p);
            let ebcd = analytic_ebcd(&p).unwrap();
            let cr = analytic_cr_ebcd(&p).unwrap();
            assert!(cr < ebcd, "{p:?}: cr {cr} !< ebcd {ebcd}");
            assert!(ebcd < bcd, "{p:?}: ebcd {ebcd} !< bcd {bcd}");
        }
    }

    #[test]
    fn schedule_validation() {
        let mut p = reference_params(20);
        p.psi_schedule = vec![30; 8]; // would drive the candidate set negative
        assert!(analytic_ebcd(&p).is_err());
        p.psi_schedule = vec![20; 7];
        assert!(analytic_ebcd(&p).is_err()); // length mismatch
    }

    #[test]
    fn reconcile_flags_only_large_gaps() {
        let p = reference_params(20);
        let mut ledger = ComplexityLedger::new(Algorithm::Bcd, p);
        ledger.counted = ledger.analytic_phases().unwrap();
        let report = reconcile(&ledger).unwrap();
        assert!(!report.flagged);
        assert_eq!(report.total_rel_deviation, 0.0);

        ledger.counted.sweeps = (ledger.counted.sweeps as f64 * 1.2) as u64;
        let report = reconcile(&ledger).unwrap();
        assert!(report.flagged);
    }
}
