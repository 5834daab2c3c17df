//! Counting for the two verification components.
//!
//! The first component checks a pair of prepared blocks for X errors: a
//! transversal CNOT from the surviving block onto its partner, which is then
//! measured qubit-wise in the Z basis; acceptance means the measured error
//! class is trivial. The second checks two X-verified blocks for Z errors
//! with the surviving block as the CNOT target and an X-basis measurement;
//! acceptance means the measured syndrome is trivial.
//!
//! Each component exposes two registers: the error left on the surviving
//! block and the class read out by the measurement. Every fault atom
//! contributes an XOR pair (out, meas), so good-event counts are sums of
//! pair-table entries against the sub-component tables with the measured
//! register pinned to zero. Counts here are joint with acceptance, never
//! conditioned; conditioning happens once in the assembled bound
//! expressions, so the integer tables compose exactly.

use super::prep::{count_atoms, count_prep, count_prep_joint, FaultAtom, JointCounts};
use super::{bad_bound_expr, xor_convolve, ErrorCounts, KGoodConfig, Sector, WeightModel};
use crate::circuit::Circuit;
use crate::code::CssCode;
use crate::polynomials::{BoundExpr, CountPoly, PolyCensus};
use anyhow::{ensure, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// How far past a component's good budget the exact multinomial tail is
/// carried before switching to the one-term union bound.
const BAD_TAIL_ORDERS: u32 = 8;

/// Weight models and correction settings for one counting pass.
#[derive(Clone, Debug)]
pub struct CountModel {
    pub x: WeightModel,
    pub z: WeightModel,
    /// Joint X/Z low-order corrections (level one only).
    pub corrections: bool,
    /// The γ at which the joint-to-marginal scaling is fixed.
    pub gamma_max: BigRational,
}

impl CountModel {
    pub fn level_one() -> CountModel {
        CountModel {
            x: WeightModel::level_one(),
            z: WeightModel::level_one(),
            corrections: true,
            gamma_max: crate::polynomials::gamma_max_default(),
        }
    }
}

/// Leaf tables for one preparation circuit.
#[derive(Clone, Debug)]
pub struct PrepCounts {
    pub census: PolyCensus,
    pub x: ErrorCounts,
    pub z: ErrorCounts,
    pub joint: Option<JointCounts>,
    pub bad: BoundExpr,
}

pub fn census_of(c: &crate::circuit::Census) -> PolyCensus {
    PolyCensus {
        nc: c.cnot as u64,
        nr: c.rest as u64,
        npm: (c.prep_zero + c.prep_plus + c.meas_z + c.meas_x) as u64,
    }
}

pub fn prep_component(
    circuit: &Circuit,
    code: &CssCode,
    cfg: &KGoodConfig,
    model: &CountModel,
) -> PrepCounts {
    let census = census_of(&circuit.census());
    PrepCounts {
        census,
        x: count_prep(circuit, code, Sector::X, cfg.prep_sub, &model.x),
        z: count_prep(circuit, code, Sector::Z, cfg.prep_sub, &model.z),
        joint: model
            .corrections
            .then(|| count_prep_joint(circuit, code, cfg.k_best)),
        bad: bad_bound_expr(census, cfg.prep_sub, cfg.prep_sub + BAD_TAIL_ORDERS),
    }
}

/// Verified-component tables. `good_x`/`good_z` bound Pr[error class, order,
/// good, all internal tests pass] after division by nothing: multiply by
/// A(γ)·t^k to evaluate. `accept_lb` lower-bounds the probability that all
/// internal tests pass; `bad_x`/`bad_z` upper-bound the bad events
/// conditioned on those accepts.
#[derive(Clone, Debug)]
pub struct ComponentResult {
    pub census: PolyCensus,
    pub kmax: u32,
    pub good_x: ErrorCounts,
    pub good_z: ErrorCounts,
    pub accept_lb: BoundExpr,
    pub bad_x: BoundExpr,
    pub bad_z: BoundExpr,
    /// Accepted single-fault joint effects (x class, z syndrome, weight)
    /// under the full model, for the next component's corrections.
    pub joint_k1: Vec<(u16, u16, i64)>,
    pub cfg: KGoodConfig,
}

impl ComponentResult {
    /// The same network preparing the dual basis state: every CNOT reverses
    /// and preparations/measurements swap basis, so the X tables of one are
    /// the Z tables of the other. Valid because the code is self-dual.
    pub fn dual(&self) -> ComponentResult {
        let mut d = self.clone();
        std::mem::swap(&mut d.good_x, &mut d.good_z);
        d.good_x.sector = Sector::X;
        d.good_z.sector = Sector::Z;
        std::mem::swap(&mut d.bad_x, &mut d.bad_z);
        d.joint_k1 = self.joint_k1.iter().map(|&(x, z, w)| (z, x, w)).collect();
        d
    }
}

/// One transversal-stage fault choice with its (out, meas) register pair.
#[derive(Clone, Copy, Debug)]
pub struct StageAtom {
    pub loc: u32,
    pub out: u16,
    pub meas: u16,
    pub weight: u64,
}

/// Exact pair tables by order: subset enumeration over distinct locations.
pub fn stage_pair_table(
    atoms: &[StageAtom],
    kmax: u32,
) -> Vec<BTreeMap<(u16, u16), BigInt>> {
    let mut next_of = vec![atoms.len(); atoms.len()];
    for i in 0..atoms.len() {
        let mut j = i;
        while j < atoms.len() && atoms[j].loc == atoms[i].loc {
            j += 1;
        }
        next_of[i] = j;
    }
    let mut tables: Vec<BTreeMap<(u16, u16), BigInt>> = vec![BTreeMap::new(); kmax as usize + 1];
    tables[0].insert((0, 0), BigInt::one());
    fn go(
        atoms: &[StageAtom],
        next_of: &[usize],
        start: usize,
        k_left: u32,
        out: u16,
        meas: u16,
        w: u128,
        depth: usize,
        tables: &mut [BTreeMap<(u16, u16), BigInt>],
    ) {
        if k_left == 0 {
            return;
        }
        for i in start..atoms.len() {
            let a = &atoms[i];
            let (o, m) = (out ^ a.out, meas ^ a.meas);
            let w2 = w.checked_mul(a.weight as u128).expect("stage weight overflow");
            *tables[depth + 1].entry((o, m)).or_insert_with(BigInt::zero) +=
                BigInt::from(w2);
            go(atoms, next_of, next_of[i], k_left - 1, o, m, w2, depth + 1, tables);
        }
    }
    go(atoms, &next_of, 0, kmax, 0, 0, 1, 0, &mut tables);
    tables
}

/// out[x][k] = Σ_{k1+k2+k3=k} Σ_{(a,b)} stage[k3][(a,b)]·p1[k1][c1]·p2[k2][c1^b]
/// with x = c1^a and, when `accept` is set, the measured register pinned to
/// zero (c2 is then forced); otherwise the measured register is summed out.
pub fn combine_two_register(
    p1: &ErrorCounts,
    p2: &ErrorCounts,
    stage: &[BTreeMap<(u16, u16), BigInt>],
    kmax: u32,
    accept: bool,
) -> ErrorCounts {
    assert_eq!(p1.bits, p2.bits);
    let mut out = ErrorCounts::zeroed(p1.sector, p1.bits, kmax);
    // Marginalize p2 once for the unconstrained variant.
    let p2_total = p2.total_counts();
    // Sparse supports of p1 by order.
    let supports: Vec<Vec<u16>> = (0..=p1.kmax)
        .map(|k| {
            (0..p1.len() as u16)
                .filter(|&c| !p1.get(k, c).is_zero())
                .collect()
        })
        .collect();
    for (k3, table) in stage.iter().enumerate().take(kmax as usize + 1) {
        for ((a, b), w3) in table {
            for k1 in 0..=p1.kmax.min(kmax - k3 as u32) {
                for &c1 in &supports[k1 as usize] {
                    let w1 = p1.get(k1, c1);
                    let x = (c1 ^ a) as usize;
                    let base = k1 as usize + k3;
                    if accept {
                        let c2 = c1 ^ b;
                        let e2 = &p2.entries[c2 as usize];
                        let w13 = w1 * w3;
                        for (k2, w2) in e2.iter().enumerate() {
                            if base + k2 > kmax as usize {
                                break;
                            }
                            if !w2.is_zero() {
                                out.entries[x][base + k2] += &w13 * w2;
                            }
                        }
                    } else {
                        let w13 = w1 * w3;
                        for (k2, w2) in p2_total.iter().enumerate() {
                            if base + k2 > kmax as usize {
                                break;
                            }
                            if !w2.is_zero() {
                                out.entries[x][base + k2] += &w13 * w2;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn total_poly_diff(all: &ErrorCounts, accepted: &ErrorCounts, census: PolyCensus) -> CountPoly {
    let a = all.total_counts();
    let b = accepted.total_counts();
    let coeffs: BTreeMap<u32, BigInt> = a
        .into_iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| (k as u32, x - y))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    CountPoly::new(census, coeffs)
}

fn one_minus(terms: Vec<BoundExpr>) -> BoundExpr {
    let mut v = vec![BoundExpr::Const(BigRational::one())];
    for t in terms {
        v.push(BoundExpr::Product(vec![
            BoundExpr::Const(-BigRational::one()),
            t,
        ]));
    }
    BoundExpr::Sum(v)
}

/// Joint-to-marginal scaling at order k: the exact rational
/// ((1−12g)/(1−8g))^nr · ((1−15g)/(1−12g))^nc · ((1−12g)/(1−4g))^k at
/// g = γ_max. Multiplying full-model counts by this (and flooring the
/// product) lower-bounds their probability in the marginal normalization.
pub fn joint_scale(census: PolyCensus, k: u32, gamma_max: &BigRational) -> BigRational {
    let g = gamma_max;
    let one = BigRational::one();
    let f = |w: i64| &one - BigRational::from_integer(BigInt::from(w)) * g;
    let pow = |b: BigRational, e: u64| -> BigRational {
        let mut acc = BigRational::one();
        for _ in 0..e {
            acc *= &b;
        }
        acc
    };
    pow(f(12) / f(8), census.nr) * pow(f(15) / f(12), census.nc) * pow(f(12) / f(4), k as u64)
}

fn floor_scaled(count: i64, scale: &BigRational) -> BigInt {
    let v = BigRational::from_integer(BigInt::from(count)) * scale;
    v.floor().to_integer()
}

/// One full-model stage fault choice: surviving-block X class, the class
/// visible on the measured register, surviving-block Z syndrome, and the
/// joint-model weight (grouped pattern multiplicity).
#[derive(Clone, Copy, Debug)]
pub struct StageJointAtom {
    pub loc: u32,
    pub out_x: u16,
    pub meas: u16,
    pub out_z: u16,
    pub weight: u32,
}

/// Stage atoms of the X-error verification, per use.
struct XVerifyStage {
    x_pairs: Vec<StageAtom>,
    z_out: Vec<FaultAtom>,
    joint_singles: Vec<StageJointAtom>,
    census: PolyCensus,
}

fn x_verify_stage(code: &CssCode, model: &CountModel) -> XVerifyStage {
    let n = code.n as u8;
    let w = |b: &BigInt| b.to_u64().expect("weight exceeds u64");
    let mut x_pairs = Vec::new();
    let mut z_out = Vec::new();
    let mut joint_singles = Vec::new();
    let mut loc = 0u32;
    for q in 0..n {
        let cls = code.class_of(1 << q);
        let syn = cls >> 1;
        // Transversal CNOT, surviving block as control.
        for (pat, weight) in &model.x.cnot {
            let out = if pat & 1 != 0 { cls } else { 0 };
            let meas = if pat & 2 != 0 { cls } else { 0 };
            x_pairs.push(StageAtom { loc, out, meas, weight: w(weight) });
        }
        for (pat, weight) in &model.z.cnot {
            // Z on the control stays on the survivor; Z on the (measured)
            // target is discarded with the block.
            let out = if pat & 1 != 0 { syn } else { 0 };
            z_out.push(FaultAtom { loc, cls: out, weight: w(weight) });
        }
        // All fifteen two-qubit Paulis, grouped by (X control leg, X target
        // leg, Z control leg); the target's Z leg is discarded with the
        // measured block, so each group holds two patterns except the one
        // whose only member is that pure Z.
        for bits in 0u8..8 {
            let (xc, xt, zc) = (bits & 1 != 0, bits & 2 != 0, bits & 4 != 0);
            let mult = if bits == 0 { 1 } else { 2 };
            joint_singles.push(StageJointAtom {
                loc,
                out_x: if xc { cls } else { 0 },
                meas: if xt { cls } else { 0 },
                out_z: if zc { syn } else { 0 },
                weight: mult,
            });
        }
        loc += 1;
    }
    for q in 0..n {
        let cls = code.class_of(1 << q);
        // Z-basis measurement of the partner: a flip looks like X just
        // before readout; Z errors there are invisible.
        x_pairs.push(StageAtom { loc, out: 0, meas: cls, weight: w(&model.x.meas_hit) });
        z_out.push(FaultAtom { loc, cls: 0, weight: w(&model.z.meas_miss) });
        joint_singles.push(StageJointAtom { loc, out_x: 0, meas: cls, out_z: 0, weight: 4 });
        loc += 1;
    }
    XVerifyStage {
        x_pairs,
        z_out,
        joint_singles,
        census: PolyCensus { nc: n as u64, nr: 0, npm: n as u64 },
    }
}

/// The X-error verification component (Appendix A.2 algebra).
pub fn verify_x(
    prep1: &PrepCounts,
    prep2: &PrepCounts,
    code: &CssCode,
    cfg: &KGoodConfig,
    model: &CountModel,
) -> Result<ComponentResult> {
    ensure!(
        !model.corrections || (prep1.joint.is_some() && prep2.joint.is_some()),
        "correction pass requires joint prep tables"
    );
    let kmax = cfg.verify_x_total;
    let stage = x_verify_stage(code, model);
    let census = prep1.census.add(prep2.census).add(stage.census);
    let stage_cap = cfg.transversal_sub.min(kmax);

    // X sector: survivor register constrained by the measured class.
    let x_pairs = stage_pair_table(&stage.x_pairs, stage_cap);
    let gx_acc = combine_two_register(&prep1.x, &prep2.x, &x_pairs, kmax, true);
    let gx_all = combine_two_register(&prep1.x, &prep2.x, &x_pairs, kmax, false);
    let reject = total_poly_diff(&gx_all, &gx_acc, census);

    // Z sector: both blocks' Z errors land on the survivor, unconstrained.
    let stage_z = count_atoms(&stage.z_out, Sector::Z, prep1.z.bits, stage_cap);
    let gz_raw = xor_convolve(&xor_convolve(&prep1.z, &prep2.z, kmax), &stage_z, kmax);

    // Low-order joint correction: full-model configurations that fail the
    // X test remove Z mass that the marginal count retains.
    let mut gz = gz_raw.clone();
    let mut joint_k1 = Vec::new();
    if model.corrections {
        let j1 = prep1.joint.as_ref().unwrap();
        let j2 = prep2.joint.as_ref().unwrap();
        let pair = verify_pair_joint(j1, j2, &stage.joint_singles, cfg.k_best);
        // Rejected slice by (k, z): everything minus the accepted column.
        for k in 1..=cfg.k_best.min(kmax) {
            let scale = joint_scale(census, k, &model.gamma_max);
            for z in 0..gz.len() as u16 {
                let mut rejected = 0i64;
                for a in 0..1u32 << pair.xbits {
                    if a != 0 {
                        rejected += pair.get(k, a as u16, z);
                    }
                }
                if rejected > 0 {
                    let sub = floor_scaled(rejected, &scale);
                    gz.entries[z as usize][k as usize] -= sub;
                }
            }
        }
        // Accepted single faults keyed by (surviving X class, Z syndrome):
        // a prep fault passes only if its X class is trivial (it is both the
        // measured and surviving class), stage faults pass when the X part
        // misses the measured block.
        let mut acc: BTreeMap<(u16, u16), i64> = BTreeMap::new();
        for j in [j1, j2] {
            for z in 0..1u16 << j.zbits {
                let wgt = j.get(1, 0, z);
                if wgt != 0 {
                    *acc.entry((0, z)).or_insert(0) += wgt;
                }
            }
        }
        for a in &stage.joint_singles {
            if a.meas == 0 {
                *acc.entry((a.out_x, a.out_z)).or_insert(0) += a.weight as i64;
            }
        }
        joint_k1 = acc.into_iter().map(|((x, z), w)| (x, z, w)).collect();
    }

    let bad_budget = |c: PolyCensus, k: u32| bad_bound_expr(c, k, k + BAD_TAIL_ORDERS);
    let bad_each_sector = BoundExpr::Sum(vec![
        prep1.bad.clone(),
        prep2.bad.clone(),
        bad_budget(stage.census, cfg.transversal_sub),
        bad_budget(census, kmax),
    ]);
    let accept_lb = one_minus(vec![BoundExpr::Poly(reject), bad_each_sector.clone()]);
    let conditioned = |b: BoundExpr| {
        BoundExpr::min_with_one(BoundExpr::ratio(b, accept_lb.clone()))
    };
    Ok(ComponentResult {
        census,
        kmax,
        good_x: gx_acc,
        good_z: gz,
        accept_lb: accept_lb.clone(),
        bad_x: conditioned(bad_each_sector.clone()),
        bad_z: conditioned(bad_each_sector),
        joint_k1,
        cfg: *cfg,
    })
}

/// Pair table (measured X class, survivor Z syndrome) for the whole X
/// verification under the full model, orders ≤ k_best, by flat transform
/// over the product group.
fn verify_pair_joint(
    j1: &JointCounts,
    j2: &JointCounts,
    stage_singles: &[StageJointAtom],
    k_best: u32,
) -> JointCounts {
    let (xbits, zbits) = (j1.xbits, j1.zbits);
    // Both preps enter the measured register with their X class and the
    // survivor register with their Z syndrome; re-key is the identity. The
    // stage contributes (measured class, surviving syndrome), enumerated
    // exactly over distinct locations.
    let mut stage = JointCounts::zeroed(xbits, zbits, k_best);
    stage.data[0] = 1;
    let stride = k_best as usize + 1;
    fn add(
        stage: &mut JointCounts,
        atoms: &[StageJointAtom],
        start: usize,
        k_left: u32,
        x: u16,
        z: u16,
        w: i64,
        depth: usize,
        stride: usize,
    ) {
        if k_left == 0 {
            return;
        }
        let mut i = start;
        while i < atoms.len() {
            let a = atoms[i];
            let (x2, z2) = (x ^ a.meas, z ^ a.out_z);
            let w2 = w * a.weight as i64;
            let key = stage.key(x2, z2) * stride + depth + 1;
            stage.data[key] += w2;
            let mut next = i + 1;
            while next < atoms.len() && atoms[next].loc == a.loc {
                next += 1;
            }
            add(stage, atoms, next, k_left - 1, x2, z2, w2, depth + 1, stride);
            i += 1;
        }
    }
    add(&mut stage, stage_singles, 0, k_best, 0, 0, 1, 0, stride);
    let a = joint_convolve(j1, j2, k_best);
    joint_convolve(&a, &stage, k_best)
}

/// XOR-convolution of two flat joint tables via in-place integer transforms.
pub fn joint_convolve(a: &JointCounts, b: &JointCounts, kmax: u32) -> JointCounts {
    assert_eq!((a.xbits, a.zbits), (b.xbits, b.zbits));
    let pairs = a.pairs();
    let sa = a.stride();
    let sb = b.stride();
    let mut fa: Vec<i64> = vec![0; pairs * (kmax as usize + 1)];
    let mut fb: Vec<i64> = vec![0; pairs * (kmax as usize + 1)];
    let so = kmax as usize + 1;
    for p in 0..pairs {
        for k in 0..sa.min(so) {
            fa[p * so + k] = a.data[p * sa + k];
        }
        for k in 0..sb.min(so) {
            fb[p * so + k] = b.data[p * sb + k];
        }
    }
    flat_wht(&mut fa, pairs, so);
    flat_wht(&mut fb, pairs, so);
    let mut out = JointCounts::zeroed(a.xbits, a.zbits, kmax);
    for p in 0..pairs {
        let base = p * so;
        for i in 0..so {
            let ai = fa[base + i];
            if ai == 0 {
                continue;
            }
            for j in 0..so - i {
                let bj = fb[base + j];
                if bj != 0 {
                    out.data[base + i + j] += ai.checked_mul(bj).expect("joint overflow");
                }
            }
        }
    }
    // Reuse fa as scratch output of the product before inverting: out.data
    // already holds the pointwise product; invert in place.
    flat_wht(&mut out.data, pairs, so);
    let n = pairs as i64;
    for v in &mut out.data {
        debug_assert!(*v % n == 0);
        *v /= n;
    }
    out
}

fn flat_wht(data: &mut [i64], pairs: usize, stride: usize) {
    let mut h = 1usize;
    while h < pairs {
        for block in (0..pairs).step_by(h * 2) {
            for i in block..block + h {
                let (a, b) = (i * stride, (i + h) * stride);
                for k in 0..stride {
                    let x = data[a + k];
                    let y = data[b + k];
                    data[a + k] = x + y;
                    data[b + k] = x - y;
                }
            }
        }
        h *= 2;
    }
}

/// Stage atoms of the Z-error verification: one transversal rest on each
/// block, a transversal CNOT with the survivor as target, and an X-basis
/// measurement of the partner.
struct ZVerifyStage {
    z_pairs: Vec<StageAtom>,
    x_out: Vec<FaultAtom>,
    joint_singles: Vec<StageJointAtom>,
    census: PolyCensus,
}

fn z_verify_stage(code: &CssCode, model: &CountModel) -> ZVerifyStage {
    let n = code.n as u8;
    let w = |b: &BigInt| b.to_u64().expect("weight exceeds u64");
    let mut z_pairs = Vec::new();
    let mut x_out = Vec::new();
    let mut joint_singles = Vec::new();
    let mut loc = 0u32;
    for q in 0..n {
        let cls = code.class_of(1 << q);
        let syn = cls >> 1;
        // Rest on the survivor.
        z_pairs.push(StageAtom { loc, out: syn, meas: 0, weight: w(&model.z.rest) });
        x_out.push(FaultAtom { loc, cls, weight: w(&model.x.rest) });
        for (x, z) in [(cls, 0), (0, syn), (cls, syn)] {
            joint_singles.push(StageJointAtom { loc, out_x: x, meas: 0, out_z: z, weight: 4 });
        }
        loc += 1;
    }
    for q in 0..n {
        let cls = code.class_of(1 << q);
        let syn = cls >> 1;
        // Rest on the measured partner: its Z errors flip the readout; X
        // errors are invisible to the X-basis measurement.
        z_pairs.push(StageAtom { loc, out: 0, meas: syn, weight: w(&model.z.rest) });
        x_out.push(FaultAtom { loc, cls: 0, weight: w(&model.x.rest) });
        for m in [0, syn, syn] {
            joint_singles.push(StageJointAtom { loc, out_x: 0, meas: m, out_z: 0, weight: 4 });
        }
        loc += 1;
    }
    for q in 0..n {
        let cls = code.class_of(1 << q);
        let syn = cls >> 1;
        // CNOT with the partner as control: target-leg Z stays on the
        // survivor, control-leg Z flips the readout; target-leg X lands on
        // the survivor, control-leg X dies with the partner.
        for (pat, weight) in &model.z.cnot {
            let out = if pat & 2 != 0 { syn } else { 0 };
            let meas = if pat & 1 != 0 { syn } else { 0 };
            z_pairs.push(StageAtom { loc, out, meas, weight: w(weight) });
        }
        for (pat, weight) in &model.x.cnot {
            let out = if pat & 2 != 0 { cls } else { 0 };
            x_out.push(FaultAtom { loc, cls: out, weight: w(weight) });
        }
        for (zc, zt, xt, mult) in joint_cnot_groups() {
            joint_singles.push(StageJointAtom {
                loc,
                out_x: if xt { cls } else { 0 },
                meas: if zc { syn } else { 0 },
                out_z: if zt { syn } else { 0 },
                weight: mult,
            });
        }
        loc += 1;
    }
    for q in 0..n {
        let syn = code.class_of(1 << q) >> 1;
        // X-basis measurement of the partner: a flip looks like Z.
        z_pairs.push(StageAtom { loc, out: 0, meas: syn, weight: w(&model.z.meas_hit) });
        x_out.push(FaultAtom { loc, cls: 0, weight: w(&model.x.meas_miss) });
        joint_singles.push(StageJointAtom { loc, out_x: 0, meas: syn, out_z: 0, weight: 4 });
        loc += 1;
    }
    ZVerifyStage {
        z_pairs,
        x_out,
        joint_singles,
        census: PolyCensus { nc: n as u64, nr: 2 * n as u64, npm: n as u64 },
    }
}

/// 15 CNOT patterns grouped by (Z control leg, Z target leg, X target leg);
/// the X control leg never matters here.
fn joint_cnot_groups() -> [(bool, bool, bool, u32); 8] {
    let mut groups = [(false, false, false, 0u32); 8];
    for pat in 1u8..16 {
        let xt = pat & 2 != 0;
        let zc = pat & 4 != 0;
        let zt = pat & 8 != 0;
        let idx = (zc as usize) << 2 | (zt as usize) << 1 | xt as usize;
        groups[idx] = (zc, zt, xt, groups[idx].3 + 1);
    }
    groups
}

/// The Z-error verification component (Appendix A.3 algebra). The inputs
/// are X-verified components; their tables are joint with their own accepts.
/// For the joint_singles of the stage in this component the meas register of
/// the tuples holds the measured Z syndrome and the z-slot the survivor's.
pub fn verify_z(
    vx1: &ComponentResult,
    vx2: &ComponentResult,
    code: &CssCode,
    cfg: &KGoodConfig,
    model: &CountModel,
) -> Result<ComponentResult> {
    let kmax = cfg.verify_z_total;
    let stage = z_verify_stage(code, model);
    let census = vx1.census.add(vx2.census).add(stage.census);
    let stage_cap = cfg.transversal_sub.min(kmax);

    // Z sector: survivor register constrained by the measured syndrome.
    let z_pairs = stage_pair_table(&stage.z_pairs, stage_cap);
    let gz_acc = combine_two_register(&vx1.good_z, &vx2.good_z, &z_pairs, kmax, true);
    let gz_all = combine_two_register(&vx1.good_z, &vx2.good_z, &z_pairs, kmax, false);
    let reject = total_poly_diff(&gz_all, &gz_acc, census);

    // X sector: unconstrained; the partner's X errors copy onto the target.
    let stage_x = count_atoms(&stage.x_out, Sector::X, vx1.good_x.bits, stage_cap);
    let gx_raw = xor_convolve(&xor_convolve(&vx1.good_x, &vx2.good_x, kmax), &stage_x, kmax);

    // Low-order correction of the X counts: single full-model faults whose
    // Z part fails this test. Restricted to |k| ≤ 1 as published.
    let mut gx = gx_raw.clone();
    let mut joint_k1: BTreeMap<(u16, u16), i64> = BTreeMap::new();
    if model.corrections {
        let scale = joint_scale(census, 1, &model.gamma_max);
        let mut singles: Vec<(u16, u16, u16, i64)> = Vec::new();
        for &(x, z, wgt) in &vx1.joint_k1 {
            // The survivor is the CNOT target: its Z errors stay put and
            // also copy onto the measured control.
            singles.push((x, z, z, wgt));
        }
        for &(x, z, wgt) in &vx2.joint_k1 {
            // The partner is the control: its Z errors flip the readout but
            // never reach the survivor; its X errors copy onto the target.
            singles.push((x, z, 0, wgt));
        }
        for a in &stage.joint_singles {
            singles.push((a.out_x, a.meas, a.out_z, a.weight as i64));
        }
        for &(x, zm, zo, wgt) in &singles {
            if zm != 0 {
                // Fails the Z test: remove from the X table at order 1.
                let sub = floor_scaled(wgt, &scale);
                if !sub.is_zero() {
                    gx.entries[x as usize][1] -= sub;
                }
            } else {
                *joint_k1.entry((x, zo)).or_insert(0) += wgt;
            }
        }
    }

    let bad_budget = |c: PolyCensus, k: u32| bad_bound_expr(c, k, k + BAD_TAIL_ORDERS);
    let sub_accepts =
        BoundExpr::Product(vec![vx1.accept_lb.clone(), vx2.accept_lb.clone()]);
    let own_bad = BoundExpr::Sum(vec![
        bad_budget(stage.census, cfg.transversal_sub),
        bad_budget(census, kmax),
    ]);
    // Conditioned on the X verifications accepting.
    let bad_cond = BoundExpr::Sum(vec![
        vx1.bad_x.clone(),
        vx2.bad_x.clone(),
        BoundExpr::ratio(own_bad.clone(), sub_accepts.clone()),
    ]);
    let accept_here = one_minus(vec![
        BoundExpr::ratio(BoundExpr::Poly(reject), sub_accepts.clone()),
        bad_cond.clone(),
    ]);
    let accept_lb = BoundExpr::Product(vec![sub_accepts, accept_here]);
    let conditioned = |b: BoundExpr| {
        BoundExpr::min_with_one(BoundExpr::ratio(b, accept_lb.clone()))
    };
    let bad_raw = BoundExpr::Sum(vec![
        BoundExpr::Product(vec![
            vx1.bad_x.clone(),
            vx1.accept_lb.clone(),
        ]),
        BoundExpr::Product(vec![
            vx2.bad_x.clone(),
            vx2.accept_lb.clone(),
        ]),
        own_bad,
    ]);
    Ok(ComponentResult {
        census,
        kmax,
        good_x: gx,
        good_z: gz_acc,
        accept_lb: accept_lb.clone(),
        bad_x: conditioned(bad_raw.clone()),
        bad_z: conditioned(bad_raw),
        joint_k1: joint_k1.into_iter().map(|((x, z), w)| (x, z, w)).collect(),
        cfg: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{latin_rectangle_prep, steane_latin_schedule};

    fn steane_setup() -> (CssCode, Circuit) {
        let code = CssCode::steane();
        let c = latin_rectangle_prep(&code, &steane_latin_schedule()).unwrap();
        (code, c)
    }

    /// Brute-force oracle for the X sector of a two-block verification:
    /// independent bitmask simulation over every fault configuration.
    fn brute_verify_x(
        circuit: &Circuit,
        code: &CssCode,
        kmax: u32,
    ) -> (ErrorCounts, ErrorCounts) {
        // Choice lists per location over the whole component; each choice is
        // (x mask on survivor, x mask on partner, weight).
        let mut locs: Vec<Vec<(u32, u32, u64)>> = Vec::new();
        let mut block = |which: usize| {
            for (i, round) in circuit.rounds.iter().enumerate() {
                for &(c, t) in round {
                    locs.push(
                        [1u32 << c, 1 << t, (1 << c) | (1 << t)]
                            .iter()
                            .map(|m| {
                                let e = circuit.propagate_x(i + 1, *m);
                                if which == 0 {
                                    (e, 0, 4)
                                } else {
                                    (0, e, 4)
                                }
                            })
                            .collect(),
                    );
                }
            }
            for q in 0..circuit.n as u8 {
                let plus = circuit.prep_plus >> q & 1 == 1;
                let e = if plus { 0 } else { circuit.propagate_x(circuit.prep_slot(q), 1 << q) };
                locs.push(vec![if which == 0 { (e, 0, 4) } else { (0, e, 4) }]);
                for slot in circuit.rest_slots(q) {
                    let e = circuit.propagate_x(slot, 1 << q);
                    locs.push(vec![if which == 0 { (e, 0, 8) } else { (0, e, 8) }]);
                }
            }
        };
        block(0);
        block(1);
        for q in 0..circuit.n as u8 {
            // Stage CNOT: control on survivor.
            locs.push(vec![(1 << q, 0, 4), (0, 1 << q, 4), (1 << q, 1 << q, 4)]);
        }
        for q in 0..circuit.n as u8 {
            // Z-basis measurement flip on the partner.
            locs.push(vec![(0, 1 << q, 4)]);
        }
        let bits = code.num_stabs() as u32 + 1;
        let mut acc = ErrorCounts::zeroed(Sector::X, bits, kmax);
        let mut all = ErrorCounts::zeroed(Sector::X, bits, kmax);
        acc.entries[0][0] = BigInt::one();
        all.entries[0][0] = BigInt::one();
        fn go(
            locs: &[Vec<(u32, u32, u64)>],
            code: &CssCode,
            start: usize,
            k_left: u32,
            e1: u32,
            e2: u32,
            w: u128,
            depth: usize,
            acc: &mut ErrorCounts,
            all: &mut ErrorCounts,
        ) {
            if k_left == 0 {
                return;
            }
            for i in start..locs.len() {
                for &(m1, m2, cw) in &locs[i] {
                    let (f1, f2) = (e1 ^ m1, e2 ^ m2);
                    let w2 = w * cw as u128;
                    // Survivor's X errors copy onto the measured partner.
                    let measured = code.class_of(f1 ^ f2);
                    let out = code.class_of(f1);
                    all.entries[out as usize][depth + 1] += BigInt::from(w2);
                    if measured == 0 {
                        acc.entries[out as usize][depth + 1] += BigInt::from(w2);
                    }
                    go(locs, code, i + 1, k_left - 1, f1, f2, w2, depth + 1, acc, all);
                }
            }
        }
        go(&locs, code, 0, kmax, 0, 0, 1, 0, &mut acc, &mut all);
        (acc, all)
    }

    #[test]
    fn steane_verify_x_matches_brute_force() {
        let (code, c) = steane_setup();
        let cfg = KGoodConfig { prep_sub: 2, verify_x_total: 2, transversal_sub: 2, ..KGoodConfig::paper() };
        let mut model = CountModel::level_one();
        model.corrections = false;
        let p1 = prep_component(&c, &code, &cfg, &model);
        let p2 = prep_component(&c, &code, &cfg, &model);
        let got = verify_x(&p1, &p2, &code, &cfg, &model).unwrap();
        let (acc, all) = brute_verify_x(&c, &code, 2);
        assert_eq!(got.good_x, acc);
        // Cross-check the reject mass through the totals.
        let gx_all = combine_two_register(
            &p1.x,
            &p2.x,
            &stage_pair_table(&x_verify_stage(&code, &model).x_pairs, 2),
            2,
            false,
        );
        assert_eq!(gx_all.total_counts(), all.total_counts());
    }

    #[test]
    fn gamma_zero_accepts_certainly() {
        let (code, c) = steane_setup();
        let cfg = KGoodConfig { prep_sub: 2, verify_x_total: 3, transversal_sub: 2, ..KGoodConfig::paper() };
        let model = CountModel::level_one();
        let p = prep_component(&c, &code, &cfg, &model);
        let got = verify_x(&p, &p, &code, &cfg, &model).unwrap();
        let zero = BigRational::zero();
        assert_eq!(got.accept_lb.eval_exact(&zero).unwrap(), BigRational::one());
        assert_eq!(*got.good_x.get(0, 0), BigInt::one());
        assert_eq!(got.good_x.support(0), 1);
    }

    #[test]
    fn steane_verify_z_accept_behaves() {
        let (code, c) = steane_setup();
        let cfg = KGoodConfig {
            prep_sub: 2,
            verify_x_total: 3,
            verify_z_total: 3,
            transversal_sub: 2,
            ..KGoodConfig::paper()
        };
        let model = CountModel::level_one();
        let p = prep_component(&c, &code, &cfg, &model);
        let vx = verify_x(&p, &p, &code, &cfg, &model).unwrap();
        let vz = verify_z(&vx, &vx, &code, &cfg, &model).unwrap();
        let zero = BigRational::zero();
        assert_eq!(vz.accept_lb.eval_exact(&zero).unwrap(), BigRational::one());
        // At a small noise rate the accept bound is strictly inside (0,1)
        // and below the X-verification accept bound.
        let g = BigRational::new(BigInt::from(1), BigInt::from(150_000));
        let az = vz.accept_lb.eval_exact(&g).unwrap();
        let ax = vx.accept_lb.eval_exact(&g).unwrap();
        assert!(az > BigRational::zero() && az < ax && ax < BigRational::one());
        // Corrections strictly remove mass (individual cells may go signed:
        // a pure-Z joint fault is subtracted at its joint order even though
        // the X marginal logged it at a lower one, which only strengthens
        // the assembled bound). Totals must stay positive at small γ.
        let model_raw = CountModel { corrections: false, ..CountModel::level_one() };
        let p_raw = prep_component(&c, &code, &cfg, &model_raw);
        let vx_raw = verify_x(&p_raw, &p_raw, &code, &cfg, &model_raw).unwrap();
        let vz_raw = verify_z(&vx_raw, &vx_raw, &code, &cfg, &model_raw).unwrap();
        let eval = |t: &crate::counting::ErrorCounts| {
            t.total_poly(vz.census).eval_exact(&g)
        };
        assert!(eval(&vz.good_x) < eval(&vz_raw.good_x));
        assert!(eval(&vx.good_z) < eval(&vx_raw.good_z));
        assert!(eval(&vz.good_x) > BigRational::zero());
        assert!(eval(&vx.good_z) > BigRational::zero());
    }
}
