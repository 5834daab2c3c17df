//! Fault atoms and correlated-error analysis for preparation circuits.
//!
//! A fault atom is one nontrivial Pauli choice at one circuit location in one
//! error sector, together with the propagated effect on the final block.
//! Under the depolarizing model the X marginal of a CNOT has three choices
//! (control, target, both), a rest and a |0> preparation one each; |+>
//! preparations and X-basis measurements cannot fail in X. The Z sector is
//! dual. Propagation is linear, so any fault configuration is the XOR of its
//! atoms' effects.

use crate::circuit::Circuit;
use crate::code::CssCode;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocKind {
    Cnot,
    Rest,
    Prep,
    Meas,
}

/// One nontrivial fault choice at one location of a single-block circuit.
#[derive(Clone, Copy, Debug)]
pub struct Atom {
    /// Location index; atoms sharing a location are mutually exclusive.
    pub loc: u16,
    pub kind: LocKind,
    /// Propagated effect on the output block.
    pub out: u32,
}

/// Enumerates X-sector fault atoms of a preparation circuit.
pub fn x_atoms(c: &Circuit) -> Vec<Atom> {
    atoms(c, false)
}

/// Enumerates Z-sector fault atoms of a preparation circuit.
pub fn z_atoms(c: &Circuit) -> Vec<Atom> {
    atoms(c, true)
}

fn atoms(c: &Circuit, z_sector: bool) -> Vec<Atom> {
    let prop = |round: usize, mask: u32| {
        if z_sector {
            c.propagate_z(round, mask)
        } else {
            c.propagate_x(round, mask)
        }
    };
    let mut out = Vec::new();
    let mut loc = 0u16;
    for (i, round) in c.rounds.iter().enumerate() {
        for &(ctl, tgt) in round {
            for mask in [1u32 << ctl, 1 << tgt, (1 << ctl) | (1 << tgt)] {
                out.push(Atom { loc, kind: LocKind::Cnot, out: prop(i + 1, mask) });
            }
            loc += 1;
        }
    }
    for q in 0..c.n as u8 {
        // Preparations fail only in the sector they do not stabilize.
        let plus = c.prep_plus >> q & 1 == 1;
        if plus == z_sector {
            out.push(Atom { loc, kind: LocKind::Prep, out: prop(c.prep_slot(q), 1 << q) });
            loc += 1;
        }
        for slot in c.rest_slots(q) {
            out.push(Atom { loc, kind: LocKind::Rest, out: prop(slot, 1 << q) });
            loc += 1;
        }
    }
    out
}

/// Distinct error classes reachable with exactly 1..=max_order faults,
/// each order excluding classes already reachable at lower orders.
/// Only orders 1 and 2 are supported (enough for the published tables).
pub fn correlated_classes(
    code: &CssCode,
    atoms: &[Atom],
    max_order: usize,
) -> Vec<BTreeSet<u16>> {
    let mut seen: BTreeSet<u16> = [0u16].into();
    let mut orders = Vec::new();
    let classes: Vec<u16> = atoms.iter().map(|a| code.class_of(a.out)).collect();
    let mut first: BTreeSet<u16> = classes.iter().copied().collect();
    first.retain(|c| !seen.contains(c));
    seen.extend(first.iter().copied());
    orders.push(first);
    if max_order >= 2 {
        let mut second = BTreeSet::new();
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if atoms[i].loc == atoms[j].loc {
                    continue;
                }
                let cls = classes[i] ^ classes[j];
                if !seen.contains(&cls) {
                    second.insert(cls);
                }
            }
        }
        seen.extend(second.iter().copied());
        orders.push(second);
    }
    assert!(max_order <= 2, "orders above 2 are not needed here");
    orders.truncate(max_order);
    orders
}

/// Histogram of reduced weights over a set of classes, keyed by weight.
pub fn weight_histogram(code: &CssCode, classes: &BTreeSet<u16>) -> BTreeMap<u8, usize> {
    let mut hist = BTreeMap::new();
    for &cls in classes {
        *hist.entry(code.class_min_weight(cls)).or_insert(0) += 1;
    }
    hist
}

/// Correlated-error fingerprint of a preparation circuit: per order, the
/// histogram of reduced weights of newly reachable classes, restricted to
/// weights exceeding the order.
pub fn correlated_fingerprint(
    code: &CssCode,
    circuit: &Circuit,
    max_order: usize,
) -> Vec<BTreeMap<u8, usize>> {
    let atoms = x_atoms(circuit);
    correlated_classes(code, &atoms, max_order)
        .iter()
        .enumerate()
        .map(|(i, classes)| {
            let mut h = weight_histogram(code, classes);
            h.retain(|&w, _| w as usize > i + 1);
            h
        })
        .collect()
}

/// One violation of strict fault tolerance: an accepted fault configuration
/// whose reduced output weight exceeds its order.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FtWitness {
    pub sector: char,
    pub locations: Vec<u32>,
    pub out_class: u16,
    pub weight: u8,
    pub order: u8,
}

/// Result of the strict fault-tolerance check (Definition 1): every accepted
/// configuration of k <= max_order faults must leave a reduced output weight
/// of at most k, in each error sector separately.
#[derive(Clone, Debug, serde::Serialize)]
pub struct FtReport {
    pub max_order: usize,
    pub pass: bool,
    pub witnesses: Vec<FtWitness>,
    /// Per order 1..=max_order, the largest reduced weight over accepted
    /// configurations in either sector (255 = none accepted).
    pub max_accepted_weight: Vec<u8>,
}

const MAX_WITNESSES: usize = 64;

/// Checks a verification network for strict fault tolerance up to
/// `max_order` simultaneous faulty locations per sector.
pub fn strict_ft_check(
    code: &CssCode,
    net: &crate::network::VerificationNetwork,
    max_order: usize,
) -> FtReport {
    assert!((1..=3).contains(&max_order));
    let mut report = FtReport {
        max_order,
        pass: true,
        witnesses: Vec::new(),
        max_accepted_weight: vec![0; max_order],
    };
    for (sector, atoms) in
        [('X', net.x_net_atoms(code)), ('Z', net.z_net_atoms(code))]
    {
        check_sector(code, sector, &atoms, max_order, &mut report);
    }
    report.pass = report.witnesses.is_empty();
    report
}

fn check_sector(
    code: &CssCode,
    sector: char,
    atoms: &[crate::network::NetAtom],
    max_order: usize,
    report: &mut FtReport,
) {
    use crate::network::Sig;
    // Group atom signatures by location; choices at one location are
    // mutually exclusive.
    let mut groups: Vec<(u32, Vec<Sig>)> = Vec::new();
    for a in atoms {
        match groups.last_mut() {
            Some((loc, sigs)) if *loc == a.loc => sigs.push(a.sig),
            _ => groups.push((a.loc, vec![a.sig])),
        }
    }
    let g = groups.len();
    let record = |sig: Sig, locs: &[u32], order: usize, report: &mut FtReport| {
        if !sig.accepted() {
            return;
        }
        let w = if sector == 'Z' {
            code.syndrome_min_weight(sig.out_class() >> 1)
        } else {
            code.class_min_weight(sig.out_class())
        };
        if w > report.max_accepted_weight[order - 1] {
            report.max_accepted_weight[order - 1] = w;
        }
        if w as usize > order && report.witnesses.len() < MAX_WITNESSES {
            report.witnesses.push(FtWitness {
                sector,
                locations: locs.to_vec(),
                out_class: sig.out_class(),
                weight: w,
                order: order as u8,
            });
        }
    };
    for i in 0..g {
        let (li, ref si) = groups[i];
        for &a in si {
            record(a, &[li], 1, report);
        }
    }
    if max_order < 2 {
        return;
    }
    for i in 0..g {
        let (li, ref si) = groups[i];
        for j in i + 1..g {
            let (lj, ref sj) = groups[j];
            for &a in si {
                for &b in sj {
                    record(a.xor(b), &[li, lj], 2, report);
                }
            }
        }
    }
    if max_order < 3 {
        return;
    }
    for i in 0..g {
        let (li, ref si) = groups[i];
        for j in i + 1..g {
            let (lj, ref sj) = groups[j];
            let mut pair = Vec::with_capacity(si.len() * sj.len());
            for &a in si {
                for &b in sj {
                    pair.push(a.xor(b));
                }
            }
            for k in j + 1..g {
                let (lk, ref sk) = groups[k];
                for &ab in &pair {
                    for &c in sk {
                        record(ab.xor(c), &[li, lj, lk], 3, report);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{golay_latin_schedules, latin_rectangle_prep};

    #[test]
    fn latin_atom_count() {
        let code = CssCode::golay();
        let c = latin_rectangle_prep(&code, &golay_latin_schedules()[0]).unwrap();
        // X sector: 3 per CNOT, 1 per rest, 1 per |0> prep.
        assert_eq!(x_atoms(&c).len(), 3 * 77 + 6 + 12);
        // Z sector: 3 per CNOT, 1 per rest, 1 per |+> prep.
        assert_eq!(z_atoms(&c).len(), 3 * 77 + 6 + 11);
    }

    #[test]
    fn latin_first_order_weight_two_bound() {
        // Up to 22 weight-two classes from single faults in a Latin circuit.
        let code = CssCode::golay();
        for s in golay_latin_schedules() {
            let c = latin_rectangle_prep(&code, &s).unwrap();
            let fp = correlated_fingerprint(&code, &c, 1);
            assert!(fp[0].get(&2).copied().unwrap_or(0) <= 22);
        }
    }
}
