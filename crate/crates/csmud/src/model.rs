//! Scenario synthesis for the uplink: spreading sequences, Rayleigh channels
//! (static or slowly drifting), frame-wise joint-sparse symbol matrices, and
//! the noisy received frame.
//!
//! Conventions, fixed here and relied on everywhere else:
//! - spreading columns are normalized to unit l2 norm, so each user's
//!   equivalent channel column has unit expected energy;
//! - noise variance per complex entry is `10^(-snr_db/10)` unless the config
//!   overrides it explicitly;
//! - when the channel drifts (`beta > 0`), the receiver-side equivalent
//!   channel stays frozen at slot 1 while the per-slot truth evolves.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::rng::RandomStream;

/// One synthesized frame: everything the receiver sees plus the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameInstance {
    /// Spreading sequences, N x K, unit-norm columns.
    pub spreading: CMat,
    /// Per-slot true channels, N x K each. Length 1 when the channel is
    /// static over the frame, otherwise length J.
    pub channel: Vec<CMat>,
    /// Equivalent channel used by the detector: slot-1 channel Hadamard the
    /// spreading, entrywise `g[n,k] = h[n,k] * s[n,k]`.
    pub equivalent: CMat,
    /// Active user indices, ascending.
    pub gamma_true: Vec<usize>,
    /// Transmitted symbols, K x J; rows of inactive users are exactly zero.
    pub symbols: CMat,
    /// Received frame, N x J.
    pub received: CMat,
    /// Noise variance per complex entry actually used.
    pub sigma2: f64,
}

/// I.i.d. complex Gaussian spreading with unit-norm columns; deterministic
/// given the stream state.
pub fn generate_spreading(cfg: &SystemConfig, rng: &mut RandomStream) -> CMat {
    let mut s = rng.complex_gaussian_matrix(cfg.n, cfg.k);
    for mut col in s.columns_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|z| z / norm);
        }
    }
    s
}

/// I.i.d. CN(0, 1) channel matrix, N x K.
pub fn generate_channel(cfg: &SystemConfig, rng: &mut RandomStream) -> CMat {
    rng.complex_gaussian_matrix(cfg.n, cfg.k)
}

/// One drift step: `(1 - beta) * h_prev + beta * innovation` with CN(0, 1)
/// innovations drawn in row-major order.
pub fn evolve_channel(h_prev: &CMat, beta: f64, rng: &mut RandomStream) -> Result<CMat> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidConfig(format!(
            "drift coefficient beta ({beta}) must lie in [0, 1]"
        )));
    }
    let (n, k) = h_prev.dim();
    let innovation = rng.complex_gaussian_matrix(n, k);
    Ok(h_prev.mapv(|z| z * (1.0 - beta)) + innovation.mapv(|z| z * beta))
}

/// Entrywise equivalent channel `g = h .* s`.
pub fn equivalent_channel(h: &CMat, s: &CMat) -> CMat {
    let mut g = h.clone();
    g.zip_mut_with(s, |gz, &sz| *gz *= sz);
    g
}

/// Builds a frame from pre-generated spreading and slot-1 channel.
///
/// Draw order from `rng`: active-set size, active set, symbols (row-major
/// over active rows), drift innovations for slots 2..J (if `beta > 0`),
/// noise (row-major).
pub fn generate_frame(
    cfg: &SystemConfig,
    spreading: CMat,
    channel1: CMat,
    rng: &mut RandomStream,
) -> Result<FrameInstance> {
    let (lo, hi) = cfg.sparsity_range;
    if hi > cfg.k || lo > hi {
        return Err(Error::InvalidConfig(format!(
            "sparsity_range ({lo}, {hi}) exceeds user count {}",
            cfg.k
        )));
    }
    if spreading.dim() != (cfg.n, cfg.k) || channel1.dim() != (cfg.n, cfg.k) {
        return Err(Error::ShapeMismatch(format!(
            "expected {}x{} spreading/channel, got {:?}/{:?}",
            cfg.n,
            cfg.k,
            spreading.dim(),
            channel1.dim()
        )));
    }

    let constellation = Constellation::new(cfg.modulation);
    let size = rng.usize_inclusive(lo, hi);
    let gamma_true = rng.distinct_sorted(cfg.k, size);

    let mut symbols = CMat::zeros((cfg.k, cfg.j));
    for &k in &gamma_true {
        for j in 0..cfg.j {
            symbols[[k, j]] = rng.symbol(&constellation);
        }
    }

    // Per-slot truth; a static channel stores one matrix.
    let mut channel = vec![channel1];
    if cfg.beta > 0.0 {
        for _ in 1..cfg.j {
            let next = evolve_channel(channel.last().unwrap(), cfg.beta, rng)?;
            channel.push(next);
        }
    }

    let equivalent = equivalent_channel(&channel[0], &spreading);
    let sigma2 = cfg.sigma2();
    let noise_amp = sigma2.sqrt();

    let mut received = CMat::zeros((cfg.n, cfg.j));
    for j in 0..cfg.j {
        let g_slot = if channel.len() == 1 {
            equivalent.clone()
        } else {
            equivalent_channel(&channel[j], &spreading)
        };
        for &k in &gamma_true {
            let x = symbols[[k, j]];
            for n in 0..cfg.n {
                received[[n, j]] += g_slot[[n, k]] * x;
            }
        }
    }
    if noise_amp > 0.0 {
        for v in received.iter_mut() {
            *v += rng.complex_gaussian() * noise_amp;
        }
    }

    Ok(FrameInstance {
        spreading,
        channel,
        equivalent,
        gamma_true,
        symbols,
        received,
        sigma2,
    })
}

impl FrameInstance {
    /// Spreading + channel + frame in one call; the usual entry point.
    pub fn generate(cfg: &SystemConfig, rng: &mut RandomStream) -> Result<Self> {
        cfg.validate()?;
        let s = generate_spreading(cfg, rng);
        let h = generate_channel(cfg, rng);
        generate_frame(cfg, s, h, rng)
    }

    pub fn n(&self) -> usize {
        self.received.nrows()
    }

    pub fn k(&self) -> usize {
        self.symbols.nrows()
    }

    pub fn j(&self) -> usize {
        self.received.ncols()
    }

    /// Row support of the symbol matrix (indices of nonzero rows).
    pub fn support_of_symbols(&self) -> Vec<usize> {
        (0..self.k())
            .filter(|&k| self.symbols.row(k).iter().any(|z| z.norm_sqr() > 0.0))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&FrameJson::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FrameJson = serde_json::from_str(text)?;
        raw.into_frame()
    }
}

// --- JSON fixture schema ---------------------------------------------------
//
// Matrices serialize as { "rows": r, "cols": c, "data": [[re, im], ...] }
// with row-major data, so fixtures are portable across implementations.

#[derive(Serialize, Deserialize)]
struct MatJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl MatJson {
    fn from_mat(m: &CMat) -> Self {
        MatJson {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    fn into_mat(self) -> Result<CMat> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::ShapeMismatch(format!(
                "matrix payload holds {} entries for a {}x{} shape",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        let data = self
            .data
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Array2::from_shape_vec((self.rows, self.cols), data)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct FrameJson {
    spreading: MatJson,
    channel: Vec<MatJson>,
    equivalent: MatJson,
    gamma_true: Vec<usize>,
    symbols: MatJson,
    received: MatJson,
    sigma2: f64,
}

impl From<&FrameInstance> for FrameJson {
    fn from(f: &FrameInstance) -> Self {
        FrameJson {
            spreading: MatJson::from_mat(&f.spreading),
            channel: f.channel.iter().map(MatJson::from_mat).collect(),
            equivalent: MatJson::from_mat(&f.equivalent),
            gamma_true: f.gamma_true.clone(),
            symbols: MatJson::from_mat(&f.symbols),
            received: MatJson::from_mat(&f.received),
            sigma2: f.sigma2,
        }
    }
}

impl FrameJson {
    fn into_frame(self) -> Result<FrameInstance> {
        Ok(FrameInstance {
            spreading: self.spreading.into_mat()?,
            channel: self
                .channel
                .into_iter()
                .map(MatJson::into_mat)
                .collect::<Result<_>>()?,
            equivalent: self.equivalent.into_mat()?,
            gamma_true: self.gamma_true,
            symbols: self.symbols.into_mat()?,
            received: self.received.into_mat()?,
            sigma2: self.sigma2,
        })
    }
}
