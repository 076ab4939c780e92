//! Scenario settings: defaults, flat key=value config files, `--set`
//! overrides, and flag overrides, applied in that order.

use std::path::PathBuf;

use csmud::{Modulation, SerDenominator, SolverKind, SolverParams, SystemConfig, VthPolicy};

#[derive(Debug, Clone)]
pub enum VthSetting {
    /// Anchors at known SNRs, pilot calibration elsewhere.
    Auto,
    /// One threshold for every point.
    Fixed(f64),
    /// One threshold per sweep point.
    List(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub k: usize,
    pub n: usize,
    pub j: usize,
    pub sparsity_min: usize,
    pub sparsity_max: usize,
    pub modulation: Modulation,
    pub snr: Vec<f64>,
    pub beta: f64,
    pub seed: u64,
    pub sigma2: Option<f64>,
    pub lambda0: f64,
    pub t: usize,
    /// Defaults to `min(8, t)` when unset.
    pub t_b: Option<usize>,
    /// Defaults to an even schedule down to `max(1, k/5)` survivors.
    pub psi: Option<Vec<usize>>,
    pub vth: VthSetting,
    pub pilot_frames: usize,
    pub frames: usize,
    pub solvers: Vec<SolverKind>,
    pub threads: usize,
    pub out: PathBuf,
    pub ser_denominator: SerDenominator,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            k: 200,
            n: 100,
            j: 7,
            sparsity_min: 18,
            sparsity_max: 20,
            modulation: Modulation::Qpsk,
            snr: vec![-2.0, 0.0, 2.0, 4.0, 6.0],
            beta: 0.0,
            seed: 1,
            sigma2: None,
            lambda0: 0.7,
            t: 12,
            t_b: None,
            psi: None,
            vth: VthSetting::Auto,
            pilot_frames: 500,
            frames: 100,
            solvers: vec![
                SolverKind::Bcd,
                SolverKind::CrEbcd,
                SolverKind::OracleCrEbcd,
                SolverKind::OracleLs,
            ],
            threads: 0,
            out: PathBuf::from("."),
            ser_denominator: SerDenominator::UnionRows,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .trim()
        .parse()
        .map_err(|_| format!("invalid value `{value}` for key `{key}`"))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl Settings {
    /// Applies one `key = value` pair; unknown keys are hard errors.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "k" => self.k = parse(key, value)?,
            "n" => self.n = parse(key, value)?,
            "j" => self.j = parse(key, value)?,
            "sparsity_min" => self.sparsity_min = parse(key, value)?,
            "sparsity_max" => self.sparsity_max = parse(key, value)?,
            "sparsity" => {
                let v: Vec<usize> = parse_list(key, value)?;
                match v.as_slice() {
                    [one] => {
                        self.sparsity_min = *one;
                        self.sparsity_max = *one;
                    }
                    [lo, hi] => {
                        self.sparsity_min = *lo;
                        self.sparsity_max = *hi;
                    }
                    _ => return Err(format!("key `{key}` takes one or two values")),
                }
            }
            "modulation" => {
                self.modulation =
                    Modulation::parse(value).map_err(|e| format!("key `{key}`: {e}"))?
            }
            "snr" => self.snr = parse_list(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "sigma2" => self.sigma2 = Some(parse(key, value)?),
            "lambda0" => self.lambda0 = parse(key, value)?,
            "t" => self.t = parse(key, value)?,
            "tb" => self.t_b = Some(parse(key, value)?),
            "psi" => self.psi = Some(parse_list(key, value)?),
            "vth" => {
                self.vth = if value.trim() == "auto" {
                    VthSetting::Auto
                } else {
                    let v: Vec<f64> = parse_list(key, value)?;
                    match v.as_slice() {
                        [one] => VthSetting::Fixed(*one),
                        _ => VthSetting::List(v),
                    }
                }
            }
            "pilot_frames" => self.pilot_frames = parse(key, value)?,
            "frames" => self.frames = parse(key, value)?,
            "solvers" => {
                self.solvers = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| SolverKind::parse(s).map_err(|e| format!("key `{key}`: {e}")))
                    .collect::<Result<_, _>>()?
            }
            "threads" => self.threads = parse(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "ser_denominator" => {
                self.ser_denominator = match value.trim() {
                    "union" => SerDenominator::UnionRows,
                    "all" => SerDenominator::AllRows,
                    other => {
                        return Err(format!(
                            "invalid value `{other}` for key `{key}` (expected union or all)"
                        ))
                    }
                }
            }
            _ => return Err(format!("unknown config key `{key}`")),
        }
        Ok(())
    }

    /// Loads a flat `key = value` file (# starts a comment).
    pub fn apply_file(&mut self, path: &std::path::Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!(
                    "{}:{}: expected `key = value`, got `{line}`",
                    path.display(),
                    lineno + 1
                )
            })?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| format!("{}:{}: {e}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    pub fn system_config(&self, snr_db: f64) -> SystemConfig {
        SystemConfig {
            k: self.k,
            n: self.n,
            j: self.j,
            sparsity_range: (self.sparsity_min, self.sparsity_max),
            modulation: self.modulation,
            snr_db,
            beta: self.beta,
            seed: self.seed,
            sigma2_override: self.sigma2,
        }
    }

    pub fn solver_params(&self) -> Result<SolverParams, String> {
        let v_th = match &self.vth {
            VthSetting::Fixed(v) => *v,
            VthSetting::List(v) => v.first().copied().unwrap_or(1.0),
            VthSetting::Auto => 1.0, // replaced by the policy per point
        };
        let t_b = self.t_b.unwrap_or_else(|| self.t.min(8));
        let psi_schedule = match &self.psi {
            Some(psi) => psi.clone(),
            None => {
                let ka_final = (self.k / 5).max(1).min(self.k);
                SolverParams::uniform_schedule(self.k, ka_final, t_b)
                    .map_err(|e| e.to_string())?
            }
        };
        Ok(SolverParams {
            lambda0: self.lambda0,
            t: self.t,
            t_b,
            psi_schedule,
            v_th,
        })
    }

    pub fn vth_policy(&self) -> VthPolicy {
        match &self.vth {
            VthSetting::Auto => VthPolicy::Auto {
                pilot_frames: self.pilot_frames,
            },
            VthSetting::Fixed(_) => VthPolicy::Fixed,
            VthSetting::List(v) => VthPolicy::PerPoint { values: v.clone() },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_rejected() {
        let mut s = Settings::default();
        let err = s.apply("frobnicate", "1").unwrap_err();
        assert!(err.contains("frobnicate"));
    }

    #[test]
    fn list_and_scalar_keys() {
        let mut s = Settings::default();
        s.apply("snr", "-2, 0, 2").unwrap();
        assert_eq!(s.snr, vec![-2.0, 0.0, 2.0]);
        s.apply("psi", "40,40,40,40").unwrap();
        assert_eq!(s.psi, Some(vec![40; 4]));
        s.apply("solvers", "bcd,oracle-ls").unwrap();
        assert_eq!(s.solvers, vec![SolverKind::Bcd, SolverKind::OracleLs]);
        s.apply("vth", "auto").unwrap();
        assert!(matches!(s.vth, VthSetting::Auto));
        s.apply("vth", "0.9").unwrap();
        assert!(matches!(s.vth, VthSetting::Fixed(_)));
        s.apply("sparsity", "19").unwrap();
        assert_eq!((s.sparsity_min, s.sparsity_max), (19, 19));
        assert!(s.apply("seed", "abc").is_err());
    }

    #[test]
    fn schedule_defaults_track_k() {
        let s = Settings::default();
        let p = s.solver_params().unwrap();
        assert_eq!(p.t_b, 8);
        assert_eq!(p.psi_schedule, vec![20; 8]);

        let mut small = Settings::default();
        small.apply("k", "16").unwrap();
        small.apply("n", "10").unwrap();
        let p = small.solver_params().unwrap();
        assert_eq!(p.psi_schedule.iter().sum::<usize>(), 13); // down to 3 survivors
        assert_eq!(p.psi_schedule.len(), 8);
        p.validate_for(16).unwrap();
    }
}
