//! Weighted fault-configuration counting for the component hierarchy.
//!
//! Every counted quantity is a table of exact integers indexed by an error
//! class and a fault order k. A table entry is the weighted number of ways
//! the component can produce that error class with exactly k failing
//! locations, where a configuration of k failures contributes 4^k·2^(k_r)
//! under the single-sector marginal noise model. Probabilities are recovered
//! by multiplying with A(γ)·t^k, t = γ/(1−12γ); see the polynomials module.
//!
//! Error classes form a group under XOR (syndromes and logical parities are
//! linear), so composing sub-components is an XOR-convolution over the class
//! group. All convolutions here go through an exact integer Walsh-Hadamard
//! transform, which turns the published syndrome-enumeration workloads into
//! pointwise products of order-truncated polynomials.

pub mod ec;
pub mod exrec;
pub mod prep;
pub mod verify;

pub use ec::{ec_component, EcCounts};
pub use exrec::{exrec_count, gate_exrecs, ExrecBounds, GateKind, MalEvent};
pub use prep::{count_prep, count_prep_joint, JointCounts};
pub use verify::{verify_x, verify_z, ComponentResult};

use crate::polynomials::{BoundExpr, CountPoly, PolyCensus};
use anyhow::{ensure, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Which Pauli sector a table tracks. X errors on a |0>-type block carry a
/// syndrome and a logical bit; Z errors on such a block are only defined up
/// to the logical operator (Z_L stabilizes the state), so their class is the
/// syndrome alone. Dual blocks swap the two roles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sector {
    X,
    Z,
}

impl Sector {
    pub fn other(self) -> Sector {
        match self {
            Sector::X => Sector::Z,
            Sector::Z => Sector::X,
        }
    }
}

/// Good-event fault-order budgets for each component of the hierarchy.
/// Faults of larger order are absorbed into the component's bad bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct KGoodConfig {
    /// Single preparation circuit.
    pub prep_sub: u32,
    /// First-stage verification component, total over its three parts.
    pub verify_x_total: u32,
    /// Order up to which X and Z errors are counted jointly for corrections.
    pub k_best: u32,
    /// Second-stage verification component total.
    pub verify_z_total: u32,
    /// Any transversal stage inside a verification or correction component.
    pub transversal_sub: u32,
    /// Error-correction component total.
    pub ec_total: u32,
    /// Transversal CNOT between the two blocks of the full gate gadget.
    pub cnot_stage: u32,
    /// Full gadget total.
    pub exrec_total: u32,
    /// The restriction set drops stage faults of order > 1 when both leading
    /// corrections have at least this many failures.
    pub g_lec_trigger: u32,
}

impl KGoodConfig {
    /// The budgets used for the published full run.
    pub fn paper() -> KGoodConfig {
        KGoodConfig {
            prep_sub: 4,
            verify_x_total: 6,
            k_best: 3,
            verify_z_total: 7,
            transversal_sub: 4,
            ec_total: 11,
            cnot_stage: 2,
            exrec_total: 25,
            g_lec_trigger: 4,
        }
    }

    /// Reduced budgets for single-machine runs. Bounds degrade (more mass
    /// lands in the tails) but remain valid.
    pub fn desk() -> KGoodConfig {
        KGoodConfig { ec_total: 6, exrec_total: 10, ..KGoodConfig::paper() }
    }
}

/// Per-location failure choices for one sector. Each choice carries the
/// integer weight that replaces its probability: weight·t^1 bounds the
/// choice's probability. At level one the weights are 4 (CNOT and
/// prep/measure choices) and 8 (rest); at level two they are the rounded
/// malignant-event weights of the transformed noise model.
#[derive(Clone, Debug)]
pub struct WeightModel {
    /// CNOT patterns as 2-bit masks, bit 0 = control leg, bit 1 = target leg.
    pub cnot: Vec<(u8, BigInt)>,
    /// Rest location with an error on the resting qubit.
    pub rest: BigInt,
    /// Preparation in the basis this sector disturbs (|0> for X errors).
    pub prep_hit: BigInt,
    /// Preparation in the other basis: the failure is counted but the error
    /// is trivial in this sector.
    pub prep_miss: BigInt,
    /// Measurement whose outcome this sector flips (Z-basis for X errors).
    pub meas_hit: BigInt,
    /// Measurement in the other basis.
    pub meas_miss: BigInt,
}

impl WeightModel {
    /// Marginal of the depolarizing model for one sector (level one).
    pub fn level_one() -> WeightModel {
        let four = BigInt::from(4);
        WeightModel {
            cnot: vec![(0b01, four.clone()), (0b10, four.clone()), (0b11, four.clone())],
            rest: BigInt::from(8),
            prep_hit: four.clone(),
            prep_miss: four.clone(),
            meas_hit: four.clone(),
            meas_miss: four,
        }
    }

    /// Largest per-type total failure weight, for tail bounds.
    pub fn tail_weights(&self) -> (BigInt, BigInt, BigInt) {
        let wc: BigInt = self.cnot.iter().map(|(_, w)| w).sum();
        let wpm = [&self.prep_hit, &self.prep_miss, &self.meas_hit, &self.meas_miss]
            .into_iter()
            .max()
            .unwrap()
            .clone();
        (wc, self.rest.clone(), wpm)
    }
}

/// Dense class-indexed table of order-truncated coefficient vectors.
/// `entries[cls][k]` is the weighted count of order-k fault configurations
/// producing error class `cls`. Orders above `kmax` are discarded; the
/// caller accounts for them in a tail bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorCounts {
    pub sector: Sector,
    /// log2 of table length: stabilizer count + 1 when the logical bit is
    /// physical, stabilizer count when it is modded out.
    pub bits: u32,
    pub kmax: u32,
    pub entries: Vec<Vec<BigInt>>,
}

impl ErrorCounts {
    pub fn zeroed(sector: Sector, bits: u32, kmax: u32) -> ErrorCounts {
        let len = 1usize << bits;
        ErrorCounts {
            sector,
            bits,
            kmax,
            entries: vec![vec![BigInt::zero(); kmax as usize + 1]; len],
        }
    }

    /// The no-fault table: weight 1 on the trivial class at order 0.
    pub fn delta(sector: Sector, bits: u32, kmax: u32) -> ErrorCounts {
        let mut t = ErrorCounts::zeroed(sector, bits, kmax);
        t.entries[0][0] = BigInt::one();
        t
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: u32, cls: u16) -> &BigInt {
        &self.entries[cls as usize][k as usize]
    }

    pub fn add_weight(&mut self, k: u32, cls: u16, w: &BigInt) {
        self.entries[cls as usize][k as usize] += w;
    }

    /// Classes with a nonzero count at order k.
    pub fn support(&self, k: u32) -> usize {
        self.entries.iter().filter(|e| !e[k as usize].is_zero()).count()
    }

    /// Drops orders above `kmax` (tightening the good event).
    pub fn truncated(&self, kmax: u32) -> ErrorCounts {
        let mut out = ErrorCounts::zeroed(self.sector, self.bits, kmax);
        for (cls, e) in self.entries.iter().enumerate() {
            for k in 0..=kmax.min(self.kmax) {
                out.entries[cls][k as usize] = e[k as usize].clone();
            }
        }
        out
    }

    /// Keeps only classes selected by the predicate.
    pub fn masked(&self, keep: impl Fn(u16) -> bool) -> ErrorCounts {
        let mut out = self.clone();
        for (cls, e) in out.entries.iter_mut().enumerate() {
            if !keep(cls as u16) {
                e.iter_mut().for_each(|c| *c = BigInt::zero());
            }
        }
        out
    }

    /// Re-keys classes through `f`, accumulating collisions.
    pub fn mapped(&self, bits: u32, f: impl Fn(u16) -> u16) -> ErrorCounts {
        let mut out = ErrorCounts::zeroed(self.sector, bits, self.kmax);
        for (cls, e) in self.entries.iter().enumerate() {
            let to = f(cls as u16) as usize;
            assert!(to < out.len());
            for (k, c) in e.iter().enumerate() {
                if !c.is_zero() {
                    out.entries[to][k] += c;
                }
            }
        }
        out
    }

    /// Coefficient-wise sum over all classes: the component's total good
    /// mass by order.
    pub fn total_counts(&self) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); self.kmax as usize + 1];
        for e in &self.entries {
            for (k, c) in e.iter().enumerate() {
                acc[k] += c;
            }
        }
        acc
    }

    /// Entries as a CountPoly for one class; the census is supplied by the
    /// caller (it belongs to the component, not the table).
    pub fn class_poly(&self, census: PolyCensus, cls: u16) -> CountPoly {
        let coeffs: BTreeMap<u32, BigInt> = self.entries[cls as usize]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u32, c.clone()))
            .collect();
        CountPoly::new(census, coeffs)
    }

    pub fn total_poly(&self, census: PolyCensus) -> CountPoly {
        let coeffs: BTreeMap<u32, BigInt> = self
            .total_counts()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as u32, c))
            .collect();
        CountPoly::new(census, coeffs)
    }

    pub fn add_assign(&mut self, other: &ErrorCounts) {
        assert_eq!(self.bits, other.bits);
        assert_eq!(self.kmax, other.kmax);
        for (e, o) in self.entries.iter_mut().zip(&other.entries) {
            for (c, v) in e.iter_mut().zip(o) {
                *c += v;
            }
        }
    }

    pub fn sub_assign(&mut self, other: &ErrorCounts) {
        assert_eq!(self.bits, other.bits);
        assert_eq!(self.kmax, other.kmax);
        for (e, o) in self.entries.iter_mut().zip(&other.entries) {
            for (c, v) in e.iter_mut().zip(o) {
                *c -= v;
            }
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|e| e.iter().all(|c| !c.is_negative()))
    }

    /// Stable text form: header, then `k cls weight` triples.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "counts {} {} {}\n",
            match self.sector {
                Sector::X => "x",
                Sector::Z => "z",
            },
            self.bits,
            self.kmax
        );
        for (cls, e) in self.entries.iter().enumerate() {
            for (k, c) in e.iter().enumerate() {
                if !c.is_zero() {
                    let _ = writeln!(s, "{} {} {}", k, cls, c);
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<ErrorCounts> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head: Vec<&str> =
            lines.next().map(|l| l.split_whitespace().collect()).unwrap_or_default();
        ensure!(head.len() == 4 && head[0] == "counts", "bad counts header");
        let sector = match head[1] {
            "x" => Sector::X,
            "z" => Sector::Z,
            s => anyhow::bail!("unknown sector {s:?}"),
        };
        let bits: u32 = head[2].parse()?;
        let kmax: u32 = head[3].parse()?;
        let mut out = ErrorCounts::zeroed(sector, bits, kmax);
        for line in lines {
            let mut it = line.split_whitespace();
            let k: u32 = it.next().unwrap_or("").parse()?;
            let cls: usize = it.next().unwrap_or("").parse()?;
            let w: BigInt = it.next().unwrap_or("").parse()?;
            ensure!(k <= kmax && cls < out.len(), "entry out of range: {line}");
            out.entries[cls][k as usize] = w;
        }
        Ok(out)
    }
}

/// In-place Walsh-Hadamard butterflies over polynomial-valued entries.
/// Self-inverse up to the factor `len`.
fn wht(entries: &mut [Vec<BigInt>]) {
    let n = entries.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(h * 2) {
            for i in block..block + h {
                let (lo, hi) = entries.split_at_mut(i + h);
                let a = &mut lo[i];
                let b = &mut hi[0];
                for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                    let sum = &*x + &*y;
                    let diff = &*x - &*y;
                    *x = sum;
                    *y = diff;
                }
            }
        }
        h *= 2;
    }
}

fn poly_mul_trunc(a: &[BigInt], b: &[BigInt], kmax: u32) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); kmax as usize + 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() || i > kmax as usize {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if i + j > kmax as usize {
                break;
            }
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// XOR-convolution over the class group with order-truncated coefficients:
/// out[c][k] = Σ_{a⊕b=c, i+j=k} lhs[a][i]·rhs[b][j]. Exact.
pub fn xor_convolve(a: &ErrorCounts, b: &ErrorCounts, kmax: u32) -> ErrorCounts {
    assert_eq!(a.bits, b.bits, "convolving tables over different class groups");
    let mut fa = a.entries.clone();
    let mut fb = b.entries.clone();
    wht(&mut fa);
    wht(&mut fb);
    let mut out = ErrorCounts::zeroed(a.sector, a.bits, kmax);
    for (o, (x, y)) in out.entries.iter_mut().zip(fa.iter().zip(&fb)) {
        *o = poly_mul_trunc(x, y, kmax);
    }
    wht(&mut out.entries);
    let n = BigInt::from(out.len() as u64);
    for e in &mut out.entries {
        for c in e.iter_mut() {
            let (q, r) = num_integer::Integer::div_rem(&*c, &n);
            debug_assert!(r.is_zero(), "inexact inverse transform");
            *c = q;
        }
    }
    out
}

/// Pointwise product of two tables (used between transform passes when a
/// computation chains several convolutions; also plain Hadamard products).
pub fn pointwise_mul(a: &ErrorCounts, b: &ErrorCounts, kmax: u32) -> ErrorCounts {
    assert_eq!(a.bits, b.bits);
    let mut out = ErrorCounts::zeroed(a.sector, a.bits, kmax);
    for (o, (x, y)) in out.entries.iter_mut().zip(a.entries.iter().zip(&b.entries)) {
        *o = poly_mul_trunc(x, y, kmax);
    }
    out
}

/// Multinomial coefficient sum for the tail bounds:
/// Σ_{kc+kr+kpm = k} C(nc,kc)·C(nr,kr)·C(npm,kpm)·wc^kc·wr^kr·wpm^kpm.
fn weighted_multinomial(
    census: PolyCensus,
    weights: (&BigInt, &BigInt, &BigInt),
    k: u32,
) -> BigInt {
    let mut acc = BigInt::zero();
    for kc in 0..=k.min(census.nc as u32) {
        for kr in 0..=(k - kc).min(census.nr as u32) {
            let kpm = k - kc - kr;
            if kpm as u64 > census.npm {
                continue;
            }
            acc += binomial(census.nc, kc as u64)
                * binomial(census.nr, kr as u64)
                * binomial(census.npm, kpm as u64)
                * weights.0.pow(kc)
                * weights.1.pow(kr)
                * weights.2.pow(kpm);
        }
    }
    acc
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Pr[k_good < K ≤ k_max] for a component with the given census under the
/// level-one marginal model: A(γ)·Σ_k c(k)·t^k with
/// c(k) = Σ_{|k̄|=k} C(nc,kc)C(nr,kr)C(npm,kpm)·12^kc·8^kr·4^kpm.
pub fn bad_bound(census: PolyCensus, k_good: u32, k_max: u32) -> CountPoly {
    let w12 = BigInt::from(12);
    let w8 = BigInt::from(8);
    let w4 = BigInt::from(4);
    let mut coeffs = BTreeMap::new();
    let top = k_max.min(census.locations() as u32);
    for k in k_good + 1..=top {
        let c = weighted_multinomial(census, (&w12, &w8, &w4), k);
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
    }
    CountPoly::new(census, coeffs)
}

/// Union-bound tail Pr[K > k]: one term of order k+1 with no survival
/// prefactor. Carried with an empty census so evaluation applies no A(γ);
/// the t ≥ γ substitution only loosens it upward.
pub fn simple_tail(census: PolyCensus, k: u32) -> CountPoly {
    simple_tail_weighted(
        census,
        (&BigInt::from(12), &BigInt::from(8), &BigInt::from(4)),
        k,
    )
}

pub fn simple_tail_weighted(
    census: PolyCensus,
    weights: (&BigInt, &BigInt, &BigInt),
    k: u32,
) -> CountPoly {
    if k as u64 >= census.locations() {
        return CountPoly::zero();
    }
    let c = weighted_multinomial(census, weights, k + 1);
    CountPoly::new(PolyCensus::EMPTY, BTreeMap::from([(k + 1, c)]))
}

/// Pr[K > k_good] as a two-piece bound: the exact multinomial mass up to
/// k_max plus the union-bound tail beyond it.
pub fn bad_bound_expr(census: PolyCensus, k_good: u32, k_max: u32) -> BoundExpr {
    BoundExpr::Sum(vec![
        BoundExpr::Poly(bad_bound(census, k_good, k_max)),
        BoundExpr::Poly(simple_tail(census, k_max)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn xor_convolve_matches_naive() {
        // Small random-ish tables over 3 bits, orders to 4.
        let mut a = ErrorCounts::zeroed(Sector::X, 3, 2);
        let mut b = ErrorCounts::zeroed(Sector::X, 3, 2);
        for cls in 0..8u16 {
            for k in 0..=2u32 {
                a.entries[cls as usize][k as usize] = BigInt::from((cls as i64 + 1) * (k as i64 + 2));
                b.entries[cls as usize][k as usize] = BigInt::from((3 * cls as i64 + 7) % 5 + k as i64);
            }
        }
        let fast = xor_convolve(&a, &b, 4);
        let mut naive = ErrorCounts::zeroed(Sector::X, 3, 4);
        for x in 0..8u16 {
            for y in 0..8u16 {
                for i in 0..=2u32 {
                    for j in 0..=2u32 {
                        if i + j <= 4 {
                            let w = a.get(i, x) * b.get(j, y);
                            naive.add_weight(i + j, x ^ y, &w);
                        }
                    }
                }
            }
        }
        assert_eq!(fast, naive);
    }

    #[test]
    fn delta_is_convolution_identity() {
        let mut a = ErrorCounts::zeroed(Sector::Z, 4, 3);
        for cls in 0..16usize {
            a.entries[cls][1] = BigInt::from(cls as i64 * 5 + 1);
            a.entries[cls][3] = BigInt::from(-(cls as i64));
        }
        a.entries[0][0] = BigInt::one();
        let d = ErrorCounts::delta(Sector::Z, 4, 3);
        assert_eq!(xor_convolve(&a, &d, 3), a);
    }

    #[test]
    fn single_cnot_bad_bound_is_twelve_gamma() {
        // One CNOT, k_good = 0: the tail is exactly the 12γ failure mass.
        let p = bad_bound(PolyCensus { nc: 1, nr: 0, npm: 0 }, 0, 1);
        assert_eq!(p.coeffs, BTreeMap::from([(1, BigInt::from(12))]));
        // k_good = total locations leaves nothing.
        assert!(bad_bound(PolyCensus { nc: 1, nr: 0, npm: 0 }, 1, 5).coeffs.is_empty());
    }

    #[test]
    fn tail_dominates_exact_binomial() {
        // Pure-CNOT census: the exact tail is binomial in 12γ; the bound
        // replaces per-location survival with A·t^k and must sit just above.
        let census = PolyCensus { nc: 10, nr: 0, npm: 0 };
        let p = bad_bound(census, 2, 10);
        let g = rat(1, 1000);
        let q = BigRational::one() - rat(12, 1) * &g;
        let exact: BigRational = (3..=10u64)
            .map(|k| {
                BigRational::from_integer(binomial(10, k))
                    * (rat(12, 1) * &g).pow(k as i32)
                    * q.pow((10 - k) as i32)
            })
            .sum();
        let bound = p.eval_exact(&g);
        assert!(bound >= exact);
        assert!(&bound - &exact < rat(1, 100_000_000));
    }

    #[test]
    fn exrec_scale_tail_near_published_magnitude() {
        // For an exRec's worth of locations failing at p = 10^-3, the mass
        // above order 10 is a couple of percent.
        let n = 5439u64;
        let p = rat(1, 1000);
        let q = BigRational::one() - &p;
        let mut tail = BigRational::zero();
        for k in 11..=40u64 {
            tail += BigRational::from_integer(binomial(n, k))
                * p.pow(k as i32)
                * q.pow((n - k) as i32);
        }
        assert!(tail > rat(23, 1000) && tail < rat(24, 1000), "tail {}", tail);
    }

    #[test]
    fn counts_text_roundtrip() {
        let mut t = ErrorCounts::zeroed(Sector::X, 5, 2);
        t.entries[0][0] = BigInt::one();
        t.entries[17][2] = BigInt::from(987654321012345678i64);
        t.entries[3][1] = BigInt::from(-4);
        let back = ErrorCounts::from_text(&t.to_text()).unwrap();
        assert_eq!(t, back);
    }
}
