use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::NUM_QUBITS;

pub const DIM: usize = 1 << NUM_QUBITS;
const NORM_TOLERANCE: f64 = 1e-9;

/// Seven-qubit state vector. Basis index bit `q` is qubit `q`.
#[derive(Debug, Clone)]
pub struct QuantumDevice {
    amps: Vec<Complex64>,
    rng: ChaCha8Rng,
}

impl QuantumDevice {
    /// All qubits in |0>. Shot `stream` of `seed` gets an independent
    /// ChaCha8 stream.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); DIM];
        amps[0] = Complex64::new(1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { amps, rng }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn apply_single(&mut self, q: u8, m: &[[Complex64; 2]; 2]) {
        let bit = 1usize << q;
        for i in (0..DIM).filter(|i| i & bit == 0) {
            let (a0, a1) = (self.amps[i], self.amps[i | bit]);
            self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Applies `m` to |source target>, source as the high bit.
    pub fn apply_two(&mut self, source: u8, target: u8, m: &[[Complex64; 4]; 4]) {
        assert_ne!(source, target, "two-qubit gate on a single qubit");
        let (sb, tb) = (1usize << source, 1usize << target);
        for base in (0..DIM).filter(|i| i & (sb | tb) == 0) {
            let idx = [base, base | tb, base | sb, base | sb | tb];
            let v = idx.map(|i| self.amps[i]);
            for (r, &i) in idx.iter().enumerate() {
                self.amps[i] = (0..4).map(|c| m[r][c] * v[c]).sum();
            }
        }
    }

    /// Probability that measuring `q` yields 1.
    pub fn prob_one(&self, q: u8) -> f64 {
        let bit = 1usize << q;
        (0..DIM).filter(|i| i & bit != 0).map(|i| self.amps[i].norm_sqr()).sum()
    }

    /// Projective Z measurement; the state collapses and is renormalised.
    pub fn measure(&mut self, q: u8) -> u8 {
        let p1 = self.prob_one(q).clamp(0.0, 1.0);
        let r: f64 = self.rng.gen();
        let result = u8::from(r < p1);
        self.project(q, result, if result == 1 { p1 } else { 1.0 - p1 });
        result
    }

    fn project(&mut self, q: u8, value: u8, prob: f64) {
        let bit = 1usize << q;
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if ((i & bit != 0) as u8) == value {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Resets `q` to |0> by measuring and flipping a 1.
    pub fn prepare(&mut self, q: u8) {
        if self.measure(q) == 1 {
            let one = Complex64::new(1.0, 0.0);
            let zero = Complex64::new(0.0, 0.0);
            self.apply_single(q, &[[zero, one], [one, zero]]);
        }
    }
}
