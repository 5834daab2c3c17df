//! Depolarizing noise: a CNOT fails with probability 15g, drawing one of the
//! 15 nontrivial two-qubit Paulis uniformly; a rest applies X, Y or Z with
//! probability 4g each (the one-qubit marginal of CNOT noise); preparations
//! and measurements fail with probability 4g in the only sector they can.
//! The conventional strength is p = 15g, the CNOT failure probability.

use crate::ft::LocKind;
use rand::Rng;

#[derive(Clone, Copy, Debug)]
pub struct NoiseModel {
    pub gamma: f64,
    /// Scale on rest failures; 0 disables rest noise for ablation studies.
    pub rest_scale: f64,
}

impl NoiseModel {
    pub fn from_p(p: f64) -> NoiseModel {
        NoiseModel { gamma: p / 15.0, rest_scale: 1.0 }
    }

    pub fn p(&self) -> f64 {
        15.0 * self.gamma
    }

    pub fn without_rest_noise(mut self) -> NoiseModel {
        self.rest_scale = 0.0;
        self
    }

    /// Draws a two-qubit CNOT fault: ((x_ctl, x_tgt), (z_ctl, z_tgt)) bits,
    /// or None with probability 1 - 15g.
    #[inline]
    pub fn sample_cnot<R: Rng>(&self, rng: &mut R) -> Option<(u8, u8)> {
        if rng.gen::<f64>() >= 15.0 * self.gamma {
            return None;
        }
        // The 15 nontrivial pairs are the nonzero 4-bit (x2|z2) patterns.
        let pauli = rng.gen_range(1..16u8);
        Some((pauli & 3, pauli >> 2))
    }

    /// Draws a one-qubit fault for a rest: (x, z) bits.
    #[inline]
    pub fn sample_rest<R: Rng>(&self, rng: &mut R) -> Option<(u8, u8)> {
        if rng.gen::<f64>() >= 12.0 * self.gamma * self.rest_scale {
            return None;
        }
        let pauli = rng.gen_range(1..4u8); // X=1, Z=2, Y=3
        Some((pauli & 1, pauli >> 1))
    }

    /// Draws a preparation or measurement fault (single sector).
    #[inline]
    pub fn sample_prep_meas<R: Rng>(&self, rng: &mut R) -> bool {
        rng.gen::<f64>() < 4.0 * self.gamma
    }

    /// Sector-marginal failure weight in units of g: the count polynomial
    /// machinery uses these as per-location multipliers. Returns the weight
    /// and the number of equiprobable error choices, or None when the
    /// location cannot fail in the sector.
    pub fn marginal_weight(kind: LocKind, z_sector: bool) -> Option<(u32, u32)> {
        match kind {
            LocKind::Cnot => Some((12, 3)),
            LocKind::Rest => Some((8, 1)),
            // The sector is fixed by the basis at atom-enumeration time;
            // a prep or meas atom present in a sector fails at 4g.
            LocKind::Prep | LocKind::Meas => {
                let _ = z_sector;
                Some((4, 1))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn zero_gamma_never_fails() {
        let n = NoiseModel::from_p(0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!(n.sample_cnot(&mut rng).is_none());
            assert!(n.sample_rest(&mut rng).is_none());
            assert!(!n.sample_prep_meas(&mut rng));
        }
    }

    #[test]
    fn cnot_pauli_frequencies_uniform() {
        let n = NoiseModel::from_p(0.15);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let mut counts = [0u32; 16];
        let trials = 2_000_000;
        for _ in 0..trials {
            if let Some((x, z)) = n.sample_cnot(&mut rng) {
                counts[(x | z << 2) as usize] += 1;
            }
        }
        let expect = trials as f64 * n.gamma;
        for &c in &counts[1..] {
            assert!((c as f64 - expect).abs() < 5.0 * expect.sqrt(), "{c} vs {expect}");
        }
        // X marginal: Pr[x != 0] = 12g.
        let x_marginal: u32 = (1..16).filter(|i| i & 3 != 0).map(|i| counts[i]).sum();
        let expect_x = trials as f64 * 12.0 * n.gamma;
        assert!((x_marginal as f64 - expect_x).abs() < 5.0 * expect_x.sqrt());
    }

    #[test]
    fn rest_is_one_qubit_marginal() {
        // Pr[X] = Pr[Y] = Pr[Z] = 4g, total 12g.
        let n = NoiseModel::from_p(0.3);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut counts = [0u32; 4];
        let trials = 1_000_000;
        for _ in 0..trials {
            if let Some((x, z)) = n.sample_rest(&mut rng) {
                counts[(x | z << 1) as usize] += 1;
            }
        }
        let expect = trials as f64 * 4.0 * n.gamma;
        for &c in &counts[1..] {
            assert!((c as f64 - expect).abs() < 5.0 * expect.sqrt());
        }
    }
}
