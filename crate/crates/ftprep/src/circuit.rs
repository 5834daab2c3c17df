//! Single-block preparation circuits and deterministic Pauli propagation.
//!
//! A preparation circuit is a sequence of CNOT rounds acting on one code
//! block. Timeline convention: CNOT round `i` occupies time slot `i + 1`;
//! every qubit is initialized in the latest slot that still precedes its
//! first gate (slot `first round index` in CNOT-round numbering, so a qubit
//! first used in round 0 is prepared in slot 0). A qubit rests in every slot
//! after its preparation, up to the final slot, in which it is not acted on.
//! This convention reproduces the published location censuses.

use crate::code::{self, CssCode};
use anyhow::{ensure, Context, Result};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub n: usize,
    /// Qubits prepared as |+>; all others start as |0>.
    pub prep_plus: u32,
    /// CNOT rounds; entries are (control, target).
    pub rounds: Vec<Vec<(u8, u8)>>,
}

/// Location census of a circuit or network stage:
/// CNOTs, rests, |0> preps, |+> preps, Z measurements, X measurements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub cnot: usize,
    pub rest: usize,
    pub prep_zero: usize,
    pub prep_plus: usize,
    pub meas_z: usize,
    pub meas_x: usize,
}

impl Census {
    pub fn total(&self) -> usize {
        self.cnot + self.rest + self.prep_zero + self.prep_plus + self.meas_z + self.meas_x
    }
}

impl Circuit {
    pub fn new(n: usize, prep_plus: u32, rounds: Vec<Vec<(u8, u8)>>) -> Result<Circuit> {
        ensure!(n <= 32);
        let c = Circuit { n, prep_plus, rounds };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        for (i, round) in self.rounds.iter().enumerate() {
            let mut busy = 0u32;
            for &(c, t) in round {
                ensure!((c as usize) < self.n && (t as usize) < self.n && c != t);
                let m = (1 << c) | (1 << t);
                ensure!(busy & m == 0, "qubit used twice in round {i}");
                busy |= m;
            }
        }
        Ok(())
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// CNOT-round index of the first gate touching `q`, or None if idle.
    pub fn first_use(&self, q: u8) -> Option<usize> {
        self.rounds
            .iter()
            .position(|r| r.iter().any(|&(c, t)| c == q || t == q))
    }

    /// Time slot holding the preparation of `q` (slot 0 = before round 0).
    pub fn prep_slot(&self, q: u8) -> usize {
        self.first_use(q).unwrap_or(self.rounds.len())
    }

    /// Rest slots of `q`: slots after preparation in which it is idle.
    pub fn rest_slots(&self, q: u8) -> Vec<usize> {
        let prep = self.prep_slot(q);
        (prep + 1..=self.rounds.len())
            .filter(|&s| {
                !self.rounds[s - 1].iter().any(|&(c, t)| c == q || t == q)
            })
            .collect()
    }

    pub fn census(&self) -> Census {
        let mut census = Census {
            cnot: self.rounds.iter().map(Vec::len).sum(),
            prep_plus: self.prep_plus.count_ones() as usize,
            prep_zero: self.n - self.prep_plus.count_ones() as usize,
            ..Census::default()
        };
        census.rest = (0..self.n).map(|q| self.rest_slots(q as u8).len()).sum();
        census
    }

    /// Pushes an X mask forward through CNOT rounds `from..end`.
    /// X on a control copies onto the target.
    #[inline]
    pub fn propagate_x(&self, from_round: usize, mut x: u32) -> u32 {
        for round in &self.rounds[from_round..] {
            for &(c, t) in round {
                x ^= ((x >> c) & 1) << t;
            }
        }
        x
    }

    /// Pushes a Z mask forward through CNOT rounds `from..end`.
    /// Z on a target copies onto the control.
    #[inline]
    pub fn propagate_z(&self, from_round: usize, mut z: u32) -> u32 {
        for round in &self.rounds[from_round..] {
            for &(c, t) in round {
                z ^= ((z >> t) & 1) << c;
            }
        }
        z
    }

    /// Stabilizer generators of the output state: X type from |+> lines,
    /// Z type from |0> lines.
    pub fn output_stabilizers(&self) -> (Vec<u32>, Vec<u32>) {
        let mut xs = Vec::new();
        let mut zs = Vec::new();
        for q in 0..self.n as u8 {
            if self.prep_plus >> q & 1 == 1 {
                xs.push(self.propagate_x(0, 1 << q));
            } else {
                // Heisenberg evolution of the initial Z_q stabilizer:
                // CNOT maps Z_t -> Z_c Z_t, same rule as error propagation.
                zs.push(self.propagate_z(0, 1 << q));
            }
        }
        (xs, zs)
    }

    /// True when the fault-free output is the encoded |0> of `code`.
    pub fn prepares_zero(&self, code: &CssCode) -> bool {
        if self.n != code.n {
            return false;
        }
        let (xs, zs) = self.output_stabilizers();
        // X stabilizers of |0>_L are exactly the code's X generators;
        // Z stabilizers are the code's Z generators plus logical Z.
        let mut code_z = code.stabs.clone();
        code_z.push(code.logical);
        same_span(&xs, &code.stabs) && same_span(&zs, &code_z)
    }

    pub fn permuted(&self, perm: &[usize]) -> Circuit {
        Circuit {
            n: self.n,
            prep_plus: code::apply_perm(perm, self.prep_plus),
            rounds: self
                .rounds
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|&(c, t)| (perm[c as usize] as u8, perm[t as usize] as u8))
                        .collect()
                })
                .collect(),
        }
    }

    /// Plain-text format: header lines `n:` and `plus:`, then one line per
    /// CNOT round with entries `c>t`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n: {}", self.n);
        let plus: Vec<String> =
            (0..self.n as u8).filter(|q| self.prep_plus >> q & 1 == 1).map(|q| q.to_string()).collect();
        let _ = writeln!(out, "plus: {}", plus.join(" "));
        for round in &self.rounds {
            let gates: Vec<String> = round.iter().map(|(c, t)| format!("{c}>{t}")).collect();
            let _ = writeln!(out, "{}", gates.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut n = None;
        let mut plus = 0u32;
        let mut rounds = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("n:") {
                n = Some(rest.trim().parse::<usize>().context("bad n header")?);
            } else if let Some(rest) = line.strip_prefix("plus:") {
                for tok in rest.split_whitespace() {
                    plus |= 1 << tok.parse::<u8>().context("bad plus header")?;
                }
            } else {
                let mut round = Vec::new();
                for tok in line.split_whitespace() {
                    let (c, t) = tok.split_once('>').context("gate must look like c>t")?;
                    round.push((c.parse::<u8>()?, t.parse::<u8>()?));
                }
                rounds.push(round);
            }
        }
        let n = n.context("missing n header")?;
        Circuit::new(n, plus, rounds)
    }
}

fn reduce(basis: &mut Vec<u32>, mut v: u32) -> u32 {
    for &b in basis.iter() {
        v = v.min(v ^ b);
    }
    if v != 0 {
        basis.push(v);
        basis.sort_unstable_by(|a, b| b.cmp(a));
    }
    v
}

fn same_span(a: &[u32], b: &[u32]) -> bool {
    let mut basis = Vec::new();
    for &r in a {
        reduce(&mut basis, r);
    }
    let rank_a = basis.len();
    let mut basis_b = Vec::new();
    for &r in b {
        reduce(&mut basis_b, r);
    }
    if basis_b.len() != rank_a {
        return false;
    }
    for &r in b {
        let mut check = basis.clone();
        if reduce(&mut check, r) != 0 {
            return false;
        }
    }
    true
}

/// Latin-rectangle schedule: per control qubit, one optional target per round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub rows: Vec<(u8, Vec<Option<u8>>)>,
}

impl Schedule {
    pub fn num_rounds(&self) -> usize {
        self.rows.first().map_or(0, |(_, t)| t.len())
    }

    /// Parses the tabular layout: first column = control, remaining columns =
    /// target per round, `-` for an idle round.
    pub fn from_text(text: &str) -> Result<Schedule> {
        let mut rows = Vec::new();
        let mut width = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut toks = line.split_whitespace();
            let control = toks.next().context("empty schedule row")?.parse::<u8>()?;
            let targets: Vec<Option<u8>> = toks
                .map(|t| if t == "-" { Ok(None) } else { t.parse::<u8>().map(Some) })
                .collect::<Result<_, _>>()?;
            if let Some(w) = width {
                ensure!(targets.len() == w, "ragged schedule");
            }
            width = Some(targets.len());
            rows.push((control, targets));
        }
        ensure!(!rows.is_empty(), "empty schedule");
        Ok(Schedule { rows })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, targets) in &self.rows {
            let cols: Vec<String> = targets
                .iter()
                .map(|t| t.map_or("-".to_string(), |q| q.to_string()))
                .collect();
            let _ = writeln!(out, "{c:>2} {}", cols.join(" "));
        }
        out
    }
}

/// Builds the Latin-rectangle preparation circuit for `code` from `schedule`.
///
/// Controls are prepared |+>, targets |0>. Checks the Latin property and that
/// each implied stabilizer row (control plus its targets) lies in the code.
pub fn latin_rectangle_prep(code: &CssCode, schedule: &Schedule) -> Result<Circuit> {
    let num_rounds = schedule.num_rounds();
    let mut prep_plus = 0u32;
    for (c, targets) in &schedule.rows {
        ensure!((*c as usize) < code.n, "control {c} out of range");
        prep_plus |= 1 << c;
        let mut row = 1u32 << c;
        for t in targets.iter().flatten() {
            ensure!((*t as usize) < code.n, "target {t} out of range");
            row |= 1 << t;
        }
        ensure!(
            row.count_ones() as usize == 1 + targets.iter().flatten().count(),
            "duplicate target in row for control {c}"
        );
        let mut ext = code.stabs.clone();
        ext.push(row);
        ensure!(
            code::rref(&ext, code.n).0.iter().filter(|&&r| r != 0).count() == code.num_stabs(),
            "row for control {c} is not a stabilizer"
        );
    }
    let mut rounds = Vec::with_capacity(num_rounds);
    for j in 0..num_rounds {
        let mut round = Vec::new();
        for (c, targets) in &schedule.rows {
            if let Some(t) = targets[j] {
                ensure!(prep_plus >> t & 1 == 0, "target {t} is also a control");
                round.push((*c, t));
            }
        }
        rounds.push(round);
    }
    let circuit = Circuit::new(code.n, prep_plus, rounds)?;
    ensure!(circuit.prepares_zero(code), "schedule does not prepare encoded |0>");
    Ok(circuit)
}

/// The four published seven-round Golay schedules whose verified combination
/// is fully fault tolerant.
pub fn golay_latin_schedules() -> Vec<Schedule> {
    [
        include_str!("../data/latin_schedule_a.txt"),
        include_str!("../data/latin_schedule_b.txt"),
        include_str!("../data/latin_schedule_c.txt"),
        include_str!("../data/latin_schedule_d.txt"),
    ]
    .iter()
    .map(|t| Schedule::from_text(t).expect("bundled schedules are well formed"))
    .collect()
}

/// Steane-code three-round Latin-rectangle schedule (nine CNOTs).
pub fn steane_latin_schedule() -> Schedule {
    Schedule::from_text("0 2 6 4\n1 6 5 2\n3 5 4 6\n").expect("static schedule")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golay_latin_census() {
        let code = CssCode::golay();
        for s in golay_latin_schedules() {
            let c = latin_rectangle_prep(&code, &s).unwrap();
            let census = c.census();
            assert_eq!(
                (census.cnot, census.rest, census.prep_zero + census.prep_plus, census.total()),
                (77, 6, 23, 106)
            );
            assert!(c.prepares_zero(&code));
        }
    }

    #[test]
    fn steane_latin_census() {
        let code = CssCode::steane();
        let c = latin_rectangle_prep(&code, &steane_latin_schedule()).unwrap();
        assert_eq!(c.census().cnot, 9);
        assert!(c.prepares_zero(&code));
    }

    #[test]
    fn control_fault_propagation_matches_row_structure() {
        // X on a |+> line before all CNOTs spreads to the full stabilizer row
        // (trivial), while a fault after the fourth of its seven CNOTs leaves
        // half the row: a reduced-weight-4 error, one per control.
        let code = CssCode::golay();
        let c = latin_rectangle_prep(&code, &golay_latin_schedules()[0]).unwrap();
        let mut weight4 = 0;
        for q in 0..23u8 {
            if c.prep_plus >> q & 1 == 1 {
                let full = c.propagate_x(0, 1 << q);
                assert_eq!(full.count_ones(), 8);
                assert_eq!(code.reduced_weight(full), 0);
                let half = c.propagate_x(4, 1 << q);
                assert_eq!(half.count_ones(), 4);
                if code.reduced_weight(half) == 4 {
                    weight4 += 1;
                }
            }
        }
        assert_eq!(weight4, 11);
    }

    #[test]
    fn permuted_circuit_keeps_census_and_encoding() {
        let code = CssCode::golay();
        let c = latin_rectangle_prep(&code, &golay_latin_schedules()[0]).unwrap();
        let perm = code::m23_generators().remove(1);
        let p = c.permuted(&perm);
        assert_eq!(p.census(), c.census());
        assert!(p.prepares_zero(&code));
    }

    #[test]
    fn circuit_text_roundtrip() {
        let code = CssCode::golay();
        let c = latin_rectangle_prep(&code, &golay_latin_schedules()[1]).unwrap();
        let back = Circuit::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn propagation_is_linear() {
        let code = CssCode::golay();
        let c = latin_rectangle_prep(&code, &golay_latin_schedules()[0]).unwrap();
        let (a, b) = (1u32 << 3, 1u32 << 15);
        assert_eq!(c.propagate_x(0, a) ^ c.propagate_x(0, b), c.propagate_x(0, a ^ b));
        assert_eq!(c.propagate_z(2, a) ^ c.propagate_z(2, b), c.propagate_z(2, a ^ b));
    }
}
