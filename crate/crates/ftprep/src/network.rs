//! Multi-block verification networks built from preparation circuits and
//! transversal stages, with per-sector fault-atom enumeration.
//!
//! A network runs its preparation blocks in parallel, then applies the
//! staged transversal operations in order. Measured blocks yield accept
//! predicates (the recorded error must lie in the trivial class); exactly
//! one block survives as the output ancilla.

use crate::circuit::{Census, Circuit};
use crate::code::CssCode;
use crate::ft::{x_atoms, z_atoms, LocKind};
use anyhow::{ensure, Result};

#[derive(Clone, Debug)]
pub enum Stage {
    /// Transversal rest on the listed blocks (one slot).
    Rest(Vec<usize>),
    /// Transversal CNOT between two blocks.
    Cnot { control: usize, target: usize },
    /// Transversal Z-basis measurement; the block leaves the network.
    MeasZ(usize),
    /// Transversal X-basis measurement.
    MeasX(usize),
}

#[derive(Clone, Debug)]
pub struct VerificationNetwork {
    pub n: usize,
    pub blocks: Vec<Circuit>,
    pub stages: Vec<Stage>,
}

/// Propagated signature of a fault configuration: 12-bit error-class fields,
/// field 0 for the output block, fields 1.. for measured blocks in
/// measurement order. XOR-composable because propagation is linear.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sig(pub [u64; 3]);

impl Sig {
    const FIELD: u64 = 0xfff;

    fn set(&mut self, field: usize, cls: u16) {
        let bit = field * 12;
        self.0[bit / 64] ^= (cls as u64) << (bit % 64);
        if bit % 64 > 52 {
            self.0[bit / 64 + 1] ^= (cls as u64) >> (64 - bit % 64);
        }
    }

    pub fn xor(self, rhs: Sig) -> Sig {
        Sig([self.0[0] ^ rhs.0[0], self.0[1] ^ rhs.0[1], self.0[2] ^ rhs.0[2]])
    }

    pub fn out_class(self) -> u16 {
        (self.0[0] & Self::FIELD) as u16
    }

    /// True when every measured-block field is trivial.
    pub fn accepted(self) -> bool {
        (self.0[0] & !Self::FIELD) == 0 && self.0[1] == 0 && self.0[2] == 0
    }
}

/// One fault atom of a network sector: a location index, the location kind,
/// and the propagated signature.
#[derive(Clone, Copy, Debug)]
pub struct NetAtom {
    pub loc: u32,
    pub kind: LocKind,
    pub sig: Sig,
}

impl VerificationNetwork {
    pub fn new(blocks: Vec<Circuit>, stages: Vec<Stage>) -> Result<VerificationNetwork> {
        ensure!(!blocks.is_empty());
        let n = blocks[0].n;
        ensure!(blocks.iter().all(|b| b.n == n), "mixed block sizes");
        let mut alive = vec![true; blocks.len()];
        for s in &stages {
            for &b in s.touches().iter() {
                ensure!(b < blocks.len() && alive[b], "stage on dead or missing block");
            }
            if let Stage::MeasZ(b) | Stage::MeasX(b) = *s {
                alive[b] = false;
            }
        }
        ensure!(alive.iter().filter(|a| **a).count() == 1, "exactly one block must survive");
        Ok(VerificationNetwork { n, blocks, stages })
    }

    pub fn output_block(&self) -> usize {
        let mut alive = vec![true; self.blocks.len()];
        for s in &self.stages {
            if let Stage::MeasZ(b) | Stage::MeasX(b) = *s {
                alive[b] = false;
            }
        }
        alive.iter().position(|a| *a).unwrap()
    }

    pub fn num_tests(&self) -> usize {
        self.stages.iter().filter(|s| matches!(s, Stage::MeasZ(_) | Stage::MeasX(_))).count()
    }

    pub fn census(&self) -> Census {
        let mut c = Census::default();
        for b in &self.blocks {
            let bc = b.census();
            c.cnot += bc.cnot;
            c.rest += bc.rest;
            c.prep_zero += bc.prep_zero;
            c.prep_plus += bc.prep_plus;
        }
        for s in &self.stages {
            match s {
                Stage::Rest(blocks) => c.rest += self.n * blocks.len(),
                Stage::Cnot { .. } => c.cnot += self.n,
                Stage::MeasZ(_) => c.meas_z += self.n,
                Stage::MeasX(_) => c.meas_x += self.n,
            }
        }
        c
    }

    /// Sinks reached by an error mask sitting on `block` just before stage
    /// `from`: bit 0 = output block, bit 1 + i = i-th measurement record.
    /// `z_sector` flips the CNOT copying direction and the recording basis.
    fn reach(&self, block: usize, from: usize, z_sector: bool) -> u32 {
        let mut present = vec![false; self.blocks.len()];
        present[block] = true;
        let mut sinks = 0u32;
        let mut meas = 0;
        for s in &self.stages[from..] {
            match *s {
                Stage::Rest(_) => {}
                Stage::Cnot { control, target } => {
                    if z_sector {
                        present[control] ^= present[target];
                    } else {
                        present[target] ^= present[control];
                    }
                }
                Stage::MeasZ(b) => {
                    if present[b] && !z_sector {
                        sinks ^= 2 << meas;
                    }
                    present[b] = false;
                    meas += 1;
                }
                Stage::MeasX(b) => {
                    if present[b] && z_sector {
                        sinks ^= 2 << meas;
                    }
                    present[b] = false;
                    meas += 1;
                }
            }
        }
        if present[self.output_block()] {
            sinks ^= 1;
        }
        sinks
    }

    /// X-sector fault atoms over the whole network.
    pub fn x_net_atoms(&self, code: &CssCode) -> Vec<NetAtom> {
        self.net_atoms(code, false)
    }

    /// Z-sector fault atoms over the whole network.
    pub fn z_net_atoms(&self, code: &CssCode) -> Vec<NetAtom> {
        self.net_atoms(code, true)
    }

    fn net_atoms(&self, code: &CssCode, z_sector: bool) -> Vec<NetAtom> {
        let mut out = Vec::new();
        let mut loc = 0u32;
        let sig_from = |mask: u32, sinks: u32| {
            // Z errors act on encoded |0>: the logical component is neither
            // an error nor observable, so only the syndrome is tracked.
            let cls = if z_sector { code.class_of(mask) & !1 } else { code.class_of(mask) };
            let mut sig = Sig::default();
            let mut s = sinks;
            while s != 0 {
                let f = s.trailing_zeros() as usize;
                sig.set(f, cls);
                s &= s - 1;
            }
            sig
        };
        for (b, prep) in self.blocks.iter().enumerate() {
            let sinks = self.reach(b, 0, z_sector);
            let atoms = if z_sector { z_atoms(prep) } else { x_atoms(prep) };
            let mut last = u16::MAX;
            for a in atoms {
                if a.loc != last {
                    loc += 1;
                    last = a.loc;
                }
                out.push(NetAtom { loc: loc - 1, kind: a.kind, sig: sig_from(a.out, sinks) });
            }
        }
        for (i, stage) in self.stages.iter().enumerate() {
            match *stage {
                Stage::Rest(ref blocks) => {
                    for &b in blocks {
                        let sinks = self.reach(b, i + 1, z_sector);
                        for q in 0..self.n {
                            out.push(NetAtom {
                                loc: loc + q as u32,
                                kind: LocKind::Rest,
                                sig: sig_from(1 << q, sinks),
                            });
                        }
                        loc += self.n as u32;
                    }
                }
                Stage::Cnot { control, target } => {
                    let sc = self.reach(control, i + 1, z_sector);
                    let st = self.reach(target, i + 1, z_sector);
                    for q in 0..self.n {
                        for sinks in [sc, st, sc ^ st] {
                            out.push(NetAtom {
                                loc: loc + q as u32,
                                kind: LocKind::Cnot,
                                sig: sig_from(1 << q, sinks),
                            });
                        }
                    }
                    loc += self.n as u32;
                }
                Stage::MeasZ(b) | Stage::MeasX(b) => {
                    // A measurement fault flips its own record only; in the
                    // sector the basis is insensitive to there is no atom.
                    let records = matches!(stage, Stage::MeasZ(_)) != z_sector;
                    if records {
                        let sinks = self.reach(b, i, z_sector)
                            ^ self.reach(b, i + 1, z_sector);
                        for q in 0..self.n {
                            out.push(NetAtom {
                                loc: loc + q as u32,
                                kind: LocKind::Meas,
                                sig: sig_from(1 << q, sinks),
                            });
                        }
                    }
                    loc += self.n as u32;
                }
            }
        }
        out
    }
}

impl Stage {
    fn touches(&self) -> Vec<usize> {
        match self {
            Stage::Rest(blocks) => blocks.clone(),
            Stage::Cnot { control, target } => vec![*control, *target],
            Stage::MeasZ(b) | Stage::MeasX(b) => vec![*b],
        }
    }
}

/// The four-ancilla verification network: two pairs, each X-checked, then
/// one survivor Z-checked against the other. Output is block 0.
pub fn four_ancilla_network(preps: [Circuit; 4]) -> Result<VerificationNetwork> {
    VerificationNetwork::new(
        preps.into(),
        vec![
            Stage::Cnot { control: 0, target: 1 },
            Stage::Cnot { control: 2, target: 3 },
            Stage::MeasZ(1),
            Stage::MeasZ(3),
            Stage::Rest(vec![0, 2]),
            Stage::Cnot { control: 2, target: 0 },
            Stage::MeasX(2),
        ],
    )
}

/// The standard recursive twelve-ancilla network: three four-block groups
/// each producing an X- and Z-verified survivor, then the output survivor is
/// re-checked in both sectors against the other two. Eleven tests total.
/// Standard recursive verification: twelve identical blocks, eleven tests,
/// of which six depend on earlier test results. Blocks 0-3 and 4-7 each form
/// an X/X/Z-checked group; the survivor of 4-7 re-checks block 0 in X. The
/// final Z-checker (block 8) is X-checked three times against fresh blocks,
/// since its own Z errors can only cause false rejection.
pub fn twelve_ancilla_network(prep: &Circuit) -> Result<VerificationNetwork> {
    let mut stages = Vec::new();
    for g in [0usize, 4] {
        stages.extend([
            Stage::Cnot { control: g, target: g + 1 },
            Stage::Cnot { control: g + 2, target: g + 3 },
            Stage::MeasZ(g + 1),
            Stage::MeasZ(g + 3),
            Stage::Rest(vec![g, g + 2]),
            Stage::Cnot { control: g + 2, target: g },
            Stage::MeasX(g + 2),
        ]);
    }
    for b in [9usize, 10, 11] {
        if b > 9 {
            stages.push(Stage::Rest(vec![8]));
        }
        stages.push(Stage::Cnot { control: 8, target: b });
        stages.push(Stage::MeasZ(b));
    }
    stages.extend([
        Stage::Cnot { control: 0, target: 4 },
        Stage::MeasZ(4),
        Stage::Rest(vec![0, 8]),
        Stage::Cnot { control: 8, target: 0 },
        Stage::MeasX(8),
    ]);
    VerificationNetwork::new(vec![prep.clone(); 12], stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{golay_latin_schedules, latin_rectangle_prep};

    fn latin_prep() -> Circuit {
        let code = CssCode::golay();
        latin_rectangle_prep(&code, &golay_latin_schedules()[0]).unwrap()
    }

    #[test]
    fn four_ancilla_shape() {
        let p = latin_prep();
        let net = four_ancilla_network([p.clone(), p.clone(), p.clone(), p]).unwrap();
        assert_eq!(net.output_block(), 0);
        assert_eq!(net.num_tests(), 3);
        let c = net.census();
        // Latin preps: 4*77 CNOTs; three transversal CNOTs of 23.
        assert_eq!(c.cnot, 4 * 77 + 3 * 23);
        assert_eq!(c.meas_z, 2 * 23);
        assert_eq!(c.meas_x, 23);
    }

    #[test]
    fn twelve_ancilla_min_cnots() {
        let net = twelve_ancilla_network(&latin_prep()).unwrap();
        assert_eq!(net.census().cnot, 1177); // 12*77 + 11*23
        assert_eq!(net.num_tests(), 11);
        assert_eq!(net.output_block(), 0);
    }

    #[test]
    fn fault_free_run_accepts() {
        let p = latin_prep();
        let net = four_ancilla_network([p.clone(), p.clone(), p.clone(), p]).unwrap();
        assert!(Sig::default().accepted());
        assert_eq!(Sig::default().out_class(), 0);
        let _ = net; // the zero configuration has the zero signature by linearity
    }

    #[test]
    fn signature_linearity() {
        let code = CssCode::golay();
        let p = latin_prep();
        let net = four_ancilla_network([p.clone(), p.clone(), p.clone(), p]).unwrap();
        let atoms = net.x_net_atoms(&code);
        // XOR of two atom signatures equals the signature of the pair.
        let s = atoms[0].sig.xor(atoms[1].sig);
        assert_eq!(s, atoms[1].sig.xor(atoms[0].sig));
        assert_eq!(s.xor(atoms[1].sig), atoms[0].sig);
    }

    #[test]
    fn duplicate_preps_fail_order_two() {
        // Four copies of one circuit: identical correlated errors cancel in
        // the checks, so a pair of faults slips a weight-3 error through.
        let code = CssCode::golay();
        let p = latin_prep();
        let net = four_ancilla_network([p.clone(), p.clone(), p.clone(), p]).unwrap();
        let r = crate::ft::strict_ft_check(&code, &net, 2);
        assert!(!r.pass);
        assert!(r
            .witnesses
            .iter()
            .any(|w| w.order == 2 && w.weight == 3), "expected an order-2 weight-3 witness");
    }

    #[test]
    fn single_control_fault_detected() {
        // An X fault on a |+> control line of block 0 spreading to weight >= 2
        // flips the X-check record of block 1 and is rejected.
        let code = CssCode::golay();
        let p = latin_prep();
        let net = four_ancilla_network([p.clone(), p.clone(), p.clone(), p]).unwrap();
        for a in net.x_net_atoms(&code) {
            if a.sig.out_class() != 0 && code.class_min_weight(a.sig.out_class()) >= 2 {
                assert!(!a.sig.accepted(), "weight-2 single fault accepted");
            }
        }
    }
}
