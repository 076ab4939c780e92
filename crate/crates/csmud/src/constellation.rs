use num_complex::Complex64;

use crate::config::Modulation;

/// A unit-average-energy symbol alphabet.
///
/// `symbols` holds the constellation in lexicographic `(re, im)` order; the
/// augmented alphabet additionally contains 0 for silent users, but 0 is
/// never a demapping candidate — silence is decided by support estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    symbols: Vec<Complex64>,
    name: &'static str,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        match modulation {
            Modulation::Qpsk => Self::qpsk(),
            Modulation::Bpsk => Self::bpsk(),
        }
    }

    pub fn qpsk() -> Self {
        let v = std::f64::consts::FRAC_1_SQRT_2;
        Constellation {
            symbols: vec![
                Complex64::new(-v, -v),
                Complex64::new(-v, v),
                Complex64::new(v, -v),
                Complex64::new(v, v),
            ],
            name: "qpsk",
        }
    }

    pub fn bpsk() -> Self {
        Constellation {
            symbols: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            name: "bpsk",
        }
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    /// Modulation cardinality M.
    pub fn cardinality(&self) -> usize {
        self.symbols.len()
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Nearest constellation point in Euclidean distance. Ties resolve to the
    /// lexicographically smallest `(re, im)` pair; `symbols` is kept sorted in
    /// that order so the first strict improvement wins.
    pub fn decide(&self, z: Complex64) -> Complex64 {
        let mut best = self.symbols[0];
        let mut best_d = (z - best).norm_sqr();
        for &s in &self.symbols[1..] {
            let d = (z - s).norm_sqr();
            if d < best_d {
                best_d = d;
                best = s;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_average_energy() {
        for c in [Constellation::qpsk(), Constellation::bpsk()] {
            let mean: f64 =
                c.symbols().iter().map(|s| s.norm_sqr()).sum::<f64>() / c.cardinality() as f64;
            assert!((mean - 1.0).abs() < 1e-15, "{}: {}", c.name(), mean);
        }
    }

    #[test]
    fn decide_is_identity_on_constellation_points() {
        let c = Constellation::qpsk();
        for &s in c.symbols() {
            assert_eq!(c.decide(s), s);
        }
    }

    #[test]
    fn decide_snaps_scaled_point() {
        let c = Constellation::qpsk();
        let v = std::f64::consts::FRAC_1_SQRT_2;
        let target = Complex64::new(v, v);
        assert_eq!(c.decide(target * 0.9), target);
    }

    #[test]
    fn ties_prefer_lexicographically_smaller() {
        let c = Constellation::qpsk();
        let v = std::f64::consts::FRAC_1_SQRT_2;
        // The origin is equidistant to all four points.
        assert_eq!(c.decide(Complex64::new(0.0, 0.0)), Complex64::new(-v, -v));
        // On the imaginary axis the two negative-re points tie.
        assert_eq!(c.decide(Complex64::new(-v, 0.0)), Complex64::new(-v, -v));
        // On the real axis, ties between (v,-v) and (v,v) go to im < 0.
        assert_eq!(c.decide(Complex64::new(v, 0.0)), Complex64::new(v, -v));
    }
}
