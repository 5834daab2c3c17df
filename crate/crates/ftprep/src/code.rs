//! CSS code machinery: stabilizer tables, syndrome decoding and error classes.
//!
//! Every code used here is self-dual CSS (the X and Z stabilizer generators
//! are given by the same binary matrix), so a single bit-matrix describes the
//! whole code.  Qubits are indexed left to right from 0, and error patterns on
//! one block are packed into a `u32` with bit `q` set when qubit `q` carries
//! the error.
//!
//! Error classes: an X error pattern `e` is classified by its syndrome
//! together with the parity of its overlap with a fixed logical
//! representative.  Both coordinates are linear in `e`, so class indices XOR
//! when error patterns are combined.  For errors on an eigenstate of the
//! logical operator (Z errors on |0>), the logical coordinate is quotiented
//! away and only the syndrome survives.

use anyhow::{bail, ensure, Result};

/// Self-dual CSS code on up to 32 qubits.
#[derive(Clone)]
pub struct CssCode {
    pub n: usize,
    /// Stabilizer generator rows, one `u32` bitmask per generator.
    pub stabs: Vec<u32>,
    /// Transversal logical operator representative (all ones).
    pub logical: u32,
    /// Syndrome of a single-qubit error, indexed by qubit.
    col: Vec<u16>,
    /// Minimum-weight pattern per syndrome.
    leaders: Vec<u32>,
    /// Minimum weight over each full class (syndrome, logical parity).
    class_weight: Vec<u8>,
    /// Minimum weight per syndrome ignoring the logical coordinate.
    coset_weight: Vec<u8>,
}

impl CssCode {
    /// Builds the code from stabilizer rows. Validates self-duality
    /// (rows pairwise orthogonal, even row weight) and full rank.
    pub fn from_rows(n: usize, stabs: Vec<u32>) -> Result<Self> {
        ensure!(n <= 32, "block size {n} exceeds 32");
        let mask = if n == 32 { !0u32 } else { (1u32 << n) - 1 };
        for (i, &r) in stabs.iter().enumerate() {
            ensure!(r & !mask == 0, "row {i} has bits outside the block");
            ensure!((r.count_ones() & 1) == 0, "row {i} has odd weight");
            for &s in &stabs[i..] {
                ensure!((r & s).count_ones() & 1 == 0, "rows not orthogonal");
            }
        }
        ensure!(rank(&stabs) == stabs.len(), "stabilizer rows are dependent");
        let ns = stabs.len();
        let logical = mask;
        ensure!(
            stabs.iter().all(|&r| (r & logical).count_ones() & 1 == 0)
                && (logical.count_ones() & 1) == 1,
            "all-ones vector is not a valid logical representative"
        );
        let col: Vec<u16> = (0..n)
            .map(|q| {
                let mut s = 0u16;
                for (i, &r) in stabs.iter().enumerate() {
                    if r >> q & 1 == 1 {
                        s |= 1 << i;
                    }
                }
                s
            })
            .collect();

        // Single sweep over all 2^n patterns fills the leader table and both
        // minimum-weight tables.
        let mut syn = vec![0u16; 1usize << n];
        let mut leaders = vec![u32::MAX; 1usize << ns];
        let mut class_weight = vec![u8::MAX; 1usize << (ns + 1)];
        let mut coset_weight = vec![u8::MAX; 1usize << ns];
        for e in 0..(1u32 << n) {
            let s = if e == 0 {
                0
            } else {
                let low = e.trailing_zeros() as usize;
                syn[(e & (e - 1)) as usize] ^ col[low]
            };
            syn[e as usize] = s;
            let w = e.count_ones() as u8;
            let par = (e.count_ones() & 1) as usize; // logical = all ones
            if leaders[s as usize] == u32::MAX || w < leaders[s as usize].count_ones() as u8 {
                leaders[s as usize] = e;
            }
            let cls = ((s as usize) << 1) | par;
            if w < class_weight[cls] {
                class_weight[cls] = w;
            }
            if w < coset_weight[s as usize] {
                coset_weight[s as usize] = w;
            }
        }
        Ok(CssCode { n, stabs, logical, col, leaders, class_weight, coset_weight })
    }

    /// The [[23,1,7]] Golay code.
    pub fn golay() -> CssCode {
        let text = include_str!("../data/golay_stabilizers.txt");
        let (n, rows) = parse_matrix(text).expect("bundled matrix is well formed");
        assert_eq!((n, rows.len()), (23, 11));
        CssCode::from_rows(n, rows).expect("bundled matrix is a valid code")
    }

    /// The [[7,1,3]] Steane code.
    pub fn steane() -> CssCode {
        let rows = vec![0b1111000, 0b1100110, 0b1010101];
        CssCode::from_rows(7, rows).expect("static matrix is a valid code")
    }

    pub fn num_stabs(&self) -> usize {
        self.stabs.len()
    }

    /// Number of distinct (syndrome, logical parity) classes.
    pub fn num_classes(&self) -> usize {
        1 << (self.stabs.len() + 1)
    }

    pub fn num_syndromes(&self) -> usize {
        1 << self.stabs.len()
    }

    #[inline]
    pub fn syndrome(&self, e: u32) -> u16 {
        let mut s = 0;
        let mut rest = e;
        while rest != 0 {
            let q = rest.trailing_zeros();
            s ^= self.col[q as usize];
            rest &= rest - 1;
        }
        s
    }

    #[inline]
    pub fn logical_parity(&self, e: u32) -> u8 {
        ((e & self.logical).count_ones() & 1) as u8
    }

    /// Class index: syndrome bits shifted left once, logical parity in bit 0.
    /// Linear: `class_of(a ^ b) == class_of(a) ^ class_of(b)`.
    #[inline]
    pub fn class_of(&self, e: u32) -> u16 {
        (self.syndrome(e) << 1) | self.logical_parity(e) as u16
    }

    /// Minimum-weight pattern with the given syndrome.
    #[inline]
    pub fn leader(&self, syndrome: u16) -> u32 {
        self.leaders[syndrome as usize]
    }

    /// Applies the coset-leader decoder to an error pattern.
    #[inline]
    pub fn decode(&self, e: u32) -> u32 {
        e ^ self.leader(self.syndrome(e))
    }

    /// True when decoding `e` leaves a logical fault.
    #[inline]
    pub fn is_uncorrectable(&self, e: u32) -> bool {
        self.logical_parity(self.decode(e)) == 1
    }

    /// Same as [`is_uncorrectable`](Self::is_uncorrectable) on the class index.
    #[inline]
    pub fn class_uncorrectable(&self, cls: u16) -> bool {
        let s = cls >> 1;
        (cls ^ self.logical_parity(self.leaders[s as usize]) as u16) & 1 == 1
    }

    /// Minimum weight of any pattern equivalent to `e` modulo stabilizers.
    #[inline]
    pub fn reduced_weight(&self, e: u32) -> u8 {
        self.class_weight[self.class_of(e) as usize]
    }

    #[inline]
    pub fn class_min_weight(&self, cls: u16) -> u8 {
        self.class_weight[cls as usize]
    }

    /// Minimum weight modulo stabilizers and the logical operator
    /// (Z errors acting on |0>, or X errors acting on |+>).
    #[inline]
    pub fn syndrome_min_weight(&self, syndrome: u16) -> u8 {
        self.coset_weight[syndrome as usize]
    }

    /// Reduced row echelon form of the stabilizer matrix with pivot columns.
    pub fn rref(&self) -> (Vec<u32>, Vec<usize>) {
        rref(&self.stabs, self.n)
    }

    /// True when permuting qubits by `p` maps the stabilizer group to itself.
    pub fn is_automorphism(&self, p: &[usize]) -> bool {
        let mut extended = self.stabs.clone();
        extended.extend(self.stabs.iter().map(|&r| apply_perm(p, r)));
        rank(&extended) == self.stabs.len()
    }

    pub fn to_text(&self) -> String {
        format_matrix(self.n, &self.stabs)
    }
}

/// Applies a qubit permutation to a bit pattern; bit `q` moves to `p[q]`.
#[inline]
pub fn apply_perm(p: &[usize], e: u32) -> u32 {
    let mut out = 0;
    let mut rest = e;
    while rest != 0 {
        let q = rest.trailing_zeros() as usize;
        out |= 1 << p[q];
        rest &= rest - 1;
    }
    out
}

pub fn compose_perm(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&q| outer[q]).collect()
}

pub fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (q, &t) in p.iter().enumerate() {
        inv[t] = q;
    }
    inv
}

/// Generators of the Mathieu group M23 acting on the Golay code qubits:
/// the cyclic shift q -> q+1 (mod 23) and a product of four 5-cycles.
pub fn m23_generators() -> Vec<Vec<usize>> {
    let shift: Vec<usize> = (0..23).map(|q| (q + 1) % 23).collect();
    let mut five: Vec<usize> = (0..23).collect();
    for cyc in [
        [2usize, 16, 9, 6, 8],
        [3, 12, 13, 18, 4],
        [7, 17, 10, 11, 22],
        [14, 19, 21, 20, 15],
    ] {
        for i in 0..5 {
            five[cyc[i]] = cyc[(i + 1) % 5];
        }
    }
    vec![shift, five]
}

fn rank(rows: &[u32]) -> usize {
    let mut basis: Vec<u32> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}


/// Reduced row echelon form over F2. Rows are bitmasks with bit 0 = column 0;
/// pivots are chosen left to right. Returns (rows, pivot columns).
pub fn rref(rows: &[u32], n: usize) -> (Vec<u32>, Vec<usize>) {
    let mut work: Vec<u32> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for colq in 0..n {
        let Some(pick) = (row..work.len()).find(|&i| work[i] >> colq & 1 == 1) else {
            continue;
        };
        work.swap(row, pick);
        let pr = work[row];
        for (i, w) in work.iter_mut().enumerate() {
            if i != row && *w >> colq & 1 == 1 {
                *w ^= pr;
            }
        }
        pivots.push(colq);
        row += 1;
        if row == work.len() {
            break;
        }
    }
    (work, pivots)
}

/// Parses a plain-text binary matrix: one row per line, characters `.`/`0`
/// for zero and `1` for one, leftmost character = qubit 0. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_matrix(text: &str) -> Result<(usize, Vec<u32>)> {
    let mut rows = Vec::new();
    let mut n = 0usize;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if n == 0 {
            n = line.len();
            ensure!(n <= 32, "row length {n} exceeds 32");
        } else if line.len() != n {
            bail!("ragged row: expected {n} columns, found {}", line.len());
        }
        let mut r = 0u32;
        for (q, c) in line.chars().enumerate() {
            match c {
                '1' => r |= 1 << q,
                '.' | '0' => {}
                other => bail!("unexpected character {other:?} in matrix row"),
            }
        }
        rows.push(r);
    }
    ensure!(!rows.is_empty(), "empty matrix");
    Ok((n, rows))
}

pub fn format_matrix(n: usize, rows: &[u32]) -> String {
    let mut out = String::new();
    for &r in rows {
        for q in 0..n {
            out.push(if r >> q & 1 == 1 { '1' } else { '.' });
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golay_shape() {
        let c = CssCode::golay();
        assert_eq!(c.n, 23);
        assert_eq!(c.num_stabs(), 11);
        assert!(c.stabs.iter().all(|r| r.count_ones() == 8));
    }

    #[test]
    fn golay_class_weight_histogram() {
        let c = CssCode::golay();
        let mut hist = [0usize; 8];
        for cls in 0..c.num_classes() {
            hist[c.class_min_weight(cls as u16) as usize] += 1;
        }
        assert_eq!(hist, [1, 23, 253, 1771, 1771, 253, 23, 1]);
    }

    #[test]
    fn golay_coset_weight_histogram() {
        let c = CssCode::golay();
        let mut hist = [0usize; 4];
        for s in 0..c.num_syndromes() {
            hist[c.syndrome_min_weight(s as u16) as usize] += 1;
        }
        assert_eq!(hist, [1, 23, 253, 1771]);
    }

    #[test]
    fn golay_leaders_cover_all_syndromes_with_weight_three() {
        let c = CssCode::golay();
        for s in 0..c.num_syndromes() as u16 {
            let l = c.leader(s);
            assert_eq!(c.syndrome(l), s);
            assert!(l.count_ones() <= 3);
        }
    }

    #[test]
    fn golay_matrix_is_systematic() {
        // The bundled presentation is [I | A]: pivots on qubits 0..10.
        let c = CssCode::golay();
        for q in 0..11 {
            assert_eq!(c.syndrome(1 << q), 1 << q);
        }
        let (_, pivots) = c.rref();
        assert_eq!(pivots, (0..11).collect::<Vec<_>>());
        // Column for qubit 11 read off the bundled matrix.
        assert_eq!(c.syndrome(1 << 11), 0b10001110101);
    }

    #[test]
    fn m23_generators_preserve_code() {
        let c = CssCode::golay();
        for g in m23_generators() {
            assert!(c.is_automorphism(&g));
        }
    }

    #[test]
    fn steane_tables() {
        let c = CssCode::steane();
        assert_eq!(c.num_classes(), 16);
        let mut hist = [0usize; 4];
        for cls in 0..16 {
            hist[c.class_min_weight(cls) as usize] += 1;
        }
        assert_eq!(hist, [1, 7, 7, 1]);
        for s in 0..8u16 {
            assert!(c.leader(s).count_ones() <= 1);
        }
    }

    #[test]
    fn matrix_roundtrip() {
        let c = CssCode::golay();
        let (n, rows) = parse_matrix(&c.to_text()).unwrap();
        assert_eq!(n, 23);
        assert_eq!(rows, c.stabs);
    }

    #[test]
    fn classes_are_linear() {
        let c = CssCode::golay();
        let a = 0b1011000000000000010u32;
        let b = 0b0000110000100000001u32;
        assert_eq!(c.class_of(a ^ b), c.class_of(a) ^ c.class_of(b));
    }
}
