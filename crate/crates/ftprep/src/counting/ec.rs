//! Counting for the error-correction component: a Z correction using a
//! verified |0>-type ancilla (ancilla as CNOT control, measured in the X
//! basis) followed by an X correction using a verified |+>-type ancilla
//! (ancilla as CNOT target, measured in the Z basis), each preceded by a
//! rest on the ancilla while the previous postselection completes.
//!
//! Every fault register is one of three species relative to a sector's
//! syndrome extraction: on the data path before the coupling (enters both
//! the output and the decoded correction), measured-only, or output-only.
//! Because the decoded correction is the minimum-weight class of the
//! measured syndrome, and syndromes biject with correction leaders, all
//! four component quantities collapse to XOR-convolutions:
//!
//!   leading,  X: out = Co ⊛ (CmL · (K ⊛ 1_W))
//!   trailing, X: V_d = (CmL · (Co ⊛ 1_{D=d})) ⊛ (K ⊛ 1_W)
//!
//! with K the shared species, Cm the measured-only species collapsed to
//! syndromes, Co the output-only species, W the set of correction leader
//! classes, and D the uncorrectable-class indicator. The Z sector is the
//! same with no shared species beyond the incoming error.

use super::prep::{count_atoms, FaultAtom};
use super::verify::{CountModel, ComponentResult};
use super::{bad_bound_expr, pointwise_mul, xor_convolve, ErrorCounts, KGoodConfig, Sector};
use crate::code::CssCode;
use crate::polynomials::{BoundExpr, PolyCensus};
use anyhow::Result;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

const BAD_TAIL_ORDERS: u32 = 8;

/// Error-correction tables, joint with both ancilla verifications. The
/// leading tables give output-class counts for trivial input; the trailing
/// tables are indexed by the incoming class and split by whether the output
/// is correctable (`tec_*[0]`) or uncorrectable (`tec_*[1]`).
#[derive(Clone, Debug)]
pub struct EcCounts {
    pub census: PolyCensus,
    pub kmax: u32,
    pub lec_x: ErrorCounts,
    pub lec_z: ErrorCounts,
    pub tec_x: [ErrorCounts; 2],
    pub tec_z: [ErrorCounts; 2],
    pub accept_lb: BoundExpr,
    pub bad_x: BoundExpr,
    pub bad_z: BoundExpr,
    pub cfg: KGoodConfig,
}

struct Species {
    shared: Vec<FaultAtom>,
    meas: Vec<FaultAtom>,
    out: Vec<FaultAtom>,
    /// CNOT picks hitting both the data and measured registers with the
    /// same class; enters the shared register of the X sector only.
    both: Vec<FaultAtom>,
}

/// Stage atoms for the coupling sub-components, by sector. `loc` ids are
/// shared across species of one sub-component, but the species are
/// enumerated independently; configurations picking the same location twice
/// across species are overcounted, which only loosens the upper bounds.
fn stage_species(code: &CssCode, model: &CountModel) -> (Species, Species, Species, Species) {
    let n = code.n as u8;
    let w = |b: &BigInt| b.to_u64().expect("weight exceeds u64");
    let mut s3x = Species { shared: vec![], meas: vec![], out: vec![], both: vec![] };
    let mut s3z = Species { shared: vec![], meas: vec![], out: vec![], both: vec![] };
    let mut s4x = Species { shared: vec![], meas: vec![], out: vec![], both: vec![] };
    let mut s4z = Species { shared: vec![], meas: vec![], out: vec![], both: vec![] };
    for q in 0..n {
        let cls = code.class_of(1 << q);
        let syn = cls >> 1;
        let loc = q as u32;
        let (lc, lm) = (loc + 23, loc + 46);

        // Z correction: rest on the |0> ancilla, CNOT ancilla -> data,
        // X-basis measurement of the ancilla.
        // X: ancilla rest errors copy onto the data and ride into the later
        // X syndrome extraction; CNOT data-leg errors do too. Ancilla-leg X
        // after the gate is invisible to the X-basis readout.
        s3x.shared.push(FaultAtom { loc, cls, weight: w(&model.x.rest) });
        for (pat, weight) in &model.x.cnot {
            let c = if pat & 2 != 0 { cls } else { 0 };
            s3x.shared.push(FaultAtom { loc: lc, cls: c, weight: w(weight) });
        }
        s3x.shared.push(FaultAtom { loc: lm, cls: 0, weight: w(&model.x.meas_miss) });
        // Z: ancilla rest and CNOT ancilla-leg errors are read out; CNOT
        // data-leg errors stay on the data; readout flips look like Z.
        s3z.meas.push(FaultAtom { loc, cls: syn, weight: w(&model.z.rest) });
        for (pat, weight) in &model.z.cnot {
            match pat {
                0b01 => s3z.meas.push(FaultAtom { loc: lc, cls: syn, weight: w(weight) }),
                0b10 => s3z.out.push(FaultAtom { loc: lc, cls, weight: w(weight) }),
                _ => {
                    // Both legs: approximate as independent meas and out
                    // picks is unsound for a *single* choice, so keep it as
                    // one out-register atom and one meas atom at the same
                    // location in the meas species; see below.
                    s3z.both.push(FaultAtom { loc: lc, cls, weight: w(weight) });
                }
            }
        }
        s3z.meas.push(FaultAtom { loc: lm, cls: syn, weight: w(&model.z.meas_hit) });

        // X correction: rest on the |+> ancilla, CNOT data -> ancilla,
        // Z-basis measurement of the ancilla.
        // X: ancilla rest and CNOT ancilla-leg errors are read out; CNOT
        // data-leg errors stay on the data past the extraction.
        s4x.meas.push(FaultAtom { loc, cls, weight: w(&model.x.rest) });
        for (pat, weight) in &model.x.cnot {
            match pat {
                0b01 => s4x.out.push(FaultAtom { loc: lc, cls, weight: w(weight) }),
                0b10 => s4x.meas.push(FaultAtom { loc: lc, cls, weight: w(weight) }),
                _ => s4x.both.push(FaultAtom { loc: lc, cls, weight: w(weight) }),
            }
        }
        s4x.meas.push(FaultAtom { loc: lm, cls: 0, weight: w(&model.x.meas_hit) });
        // Z: ancilla rest errors copy onto the data; CNOT data-leg errors
        // stay on the data; ancilla-leg Z is invisible to Z-basis readout.
        s4z.out.push(FaultAtom { loc, cls, weight: w(&model.z.rest) });
        for (pat, weight) in &model.z.cnot {
            let c = if pat & 1 != 0 { cls } else { 0 };
            s4z.out.push(FaultAtom { loc: lc, cls: c, weight: w(weight) });
        }
        s4z.out.push(FaultAtom { loc: lm, cls: 0, weight: w(&model.z.meas_miss) });
    }
    for s in [&mut s3x, &mut s3z, &mut s4x, &mut s4z] {
        for v in [&mut s.shared, &mut s.meas, &mut s.out, &mut s.both] {
            v.sort_by_key(|a| a.loc);
        }
    }
    (s3x, s3z, s4x, s4z)
}

/// Indicator table of the correction leader classes (order zero).
fn leader_indicator(code: &CssCode, bits: u32) -> ErrorCounts {
    let mut w = ErrorCounts::zeroed(Sector::X, bits, 0);
    for syn in 0..1u32 << (bits - 1) {
        let cls = code.class_of(code.leader(syn as u16));
        w.entries[cls as usize][0] += BigInt::one();
    }
    w
}

/// Indicator of classes whose minimum-weight representative is
/// uncorrectable (d = 1) or correctable (d = 0).
fn uncorrectable_indicator(code: &CssCode, bits: u32, d: usize) -> ErrorCounts {
    let mut t = ErrorCounts::zeroed(Sector::X, bits, 0);
    for cls in 0..1u32 << bits {
        if code.class_uncorrectable(cls as u16) == (d == 1) {
            t.entries[cls as usize][0] += BigInt::one();
        }
    }
    t
}

/// Lift a syndrome-keyed table to class space (logical bit zero ignored:
/// the value depends on the syndrome only).
fn lift_to_classes(t: &ErrorCounts) -> ErrorCounts {
    let mut out = ErrorCounts::zeroed(Sector::X, t.bits + 1, t.kmax);
    for cls in 0..out.len() {
        out.entries[cls] = t.entries[cls >> 1].clone();
    }
    out
}

/// Collapse a class-keyed table to syndromes.
fn collapse_to_syndromes(t: &ErrorCounts) -> ErrorCounts {
    let mut out = ErrorCounts::zeroed(Sector::Z, t.bits - 1, t.kmax);
    for cls in 0..t.len() {
        let dst = cls >> 1;
        for k in 0..=t.kmax as usize {
            let v = t.entries[cls][k].clone();
            out.entries[dst][k] += v;
        }
    }
    out
}

pub fn ec_component(
    anc0: &ComponentResult,
    code: &CssCode,
    cfg: &KGoodConfig,
    model: &CountModel,
) -> Result<EcCounts> {
    let ancp = anc0.dual();
    let kmax = cfg.ec_total;
    let stage_cap = cfg.transversal_sub.min(kmax);
    let n = code.n as u64;
    let stage_census = PolyCensus { nc: n, nr: n, npm: n };
    let census = anc0.census.add(ancp.census).add(stage_census).add(stage_census);
    let (s3x, s3z, s4x, s4z) = stage_species(code, model);

    let xbits = anc0.good_x.bits; // class space
    let zbits = xbits - 1; // syndrome space
    let conv = |a: &ErrorCounts, b: &ErrorCounts| xor_convolve(a, b, kmax);
    let w_ind = leader_indicator(code, xbits);

    // X sector. Shared species: ancilla-1 X output plus the stage-3 data
    // path; the CNOT both-leg picks of stage 4 cancel out of the syndrome
    // argument and act only on the shared register.
    let k_shared = {
        let st3 = count_atoms(&s3x.shared, Sector::X, xbits, stage_cap);
        let st4b = count_atoms(&s4x.both, Sector::X, xbits, stage_cap);
        conv(&conv(&anc0.good_x, &st3), &st4b)
    };
    let kw = conv(&k_shared, &w_ind);
    // Measured-only species: ancilla-2 X (syndrome-resolved: its logical
    // part never leaves the measured block) plus stage-4 measured legs.
    let cm = {
        // The |+>-type ancilla's X table is already syndrome-keyed: an X
        // logical acts trivially on |+> and never leaves the block.
        let st4m = collapse_to_syndromes(&count_atoms(&s4x.meas, Sector::X, xbits, stage_cap));
        lift_to_classes(&xor_convolve(&ancp.good_x, &st4m, kmax))
    };
    let co = count_atoms(&s4x.out, Sector::X, xbits, stage_cap);
    let lec_x = conv(&co, &pointwise_mul(&cm, &kw, kmax));
    let tec_x = [0usize, 1].map(|d| {
        let cod = conv(&co, &uncorrectable_indicator(code, xbits, d));
        conv(&pointwise_mul(&cm, &cod, kmax), &kw)
    });

    // Z sector. No shared species: the Z syndrome is extracted before the
    // X-correction couples anything onto the data. Measured-only: ancilla-1
    // Z plus stage-3 measured legs, in syndrome space. Output-only:
    // ancilla-2 Z, stage-3 data legs, stage-4. The stage-3 both-leg pick is
    // kept exact by pairing its meas and out effects below.
    let mz = {
        let st3m = count_atoms(&s3z.meas, Sector::Z, zbits, stage_cap);
        xor_convolve(&anc0.good_z, &st3m, kmax)
    };
    let oz = {
        let st3o = count_atoms(&s3z.out, Sector::X, xbits, stage_cap);
        let st4o = count_atoms(&s4z.out, Sector::X, xbits, stage_cap);
        conv(&conv(&ancp.good_z, &st3o), &st4o)
    };
    // Stage-3 both-leg picks land the class on the data and its syndrome on
    // the readout: in class space that is a shared-species atom, so fold it
    // through the same leader trick as the X sector.
    let zb = count_atoms(&s3z.both, Sector::X, xbits, stage_cap);
    let mz_lift = lift_to_classes(&mz);
    let zbw = conv(&zb, &w_ind);
    let lec_z = conv(&oz, &pointwise_mul(&mz_lift, &zbw, kmax));
    let tec_z = [0usize, 1].map(|d| {
        let od = conv(&oz, &uncorrectable_indicator(code, xbits, d));
        conv(&pointwise_mul(&mz_lift, &od, kmax), &zbw)
    });

    let accept_lb = BoundExpr::Product(vec![anc0.accept_lb.clone(), ancp.accept_lb.clone()]);
    let stage_bad = || bad_bound_expr(stage_census, cfg.transversal_sub,
                                      cfg.transversal_sub + BAD_TAIL_ORDERS);
    let bad = |a1: &BoundExpr, a2: &BoundExpr| {
        BoundExpr::Sum(vec![
            a1.clone(),
            a2.clone(),
            stage_bad(),
            stage_bad(),
            bad_bound_expr(census, kmax, kmax + BAD_TAIL_ORDERS),
        ])
    };
    Ok(EcCounts {
        census,
        kmax,
        lec_x,
        lec_z,
        tec_x,
        tec_z,
        accept_lb,
        bad_x: bad(&anc0.bad_x, &ancp.bad_x),
        bad_z: bad(&anc0.bad_z, &ancp.bad_z),
        cfg: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{latin_rectangle_prep, steane_latin_schedule};
    use crate::counting::verify::{prep_component, verify_x, verify_z};
    use num_rational::BigRational;

    fn trivial_component(code: &CssCode, cfg: &KGoodConfig) -> ComponentResult {
        let bits = code.num_stabs() as u32 + 1;
        let mut gx = ErrorCounts::zeroed(Sector::X, bits, 0);
        gx.entries[0][0] = BigInt::one();
        let mut gz = ErrorCounts::zeroed(Sector::Z, bits - 1, 0);
        gz.entries[0][0] = BigInt::one();
        ComponentResult {
            census: PolyCensus::EMPTY,
            kmax: 0,
            good_x: gx,
            good_z: gz,
            accept_lb: BoundExpr::Const(BigRational::one()),
            bad_x: BoundExpr::Const(BigRational::zero()),
            bad_z: BoundExpr::Const(BigRational::zero()),
            joint_k1: vec![],
            cfg: *cfg,
        }
    }

    #[test]
    fn trailing_order_zero_is_the_input_decoder() {
        let code = CssCode::steane();
        let cfg = KGoodConfig { ec_total: 2, transversal_sub: 2, ..KGoodConfig::paper() };
        let model = CountModel { corrections: false, ..CountModel::level_one() };
        let anc = trivial_component(&code, &cfg);
        let ec = ec_component(&anc, &code, &cfg, &model).unwrap();
        for cls in 0..ec.tec_x[0].len() as u16 {
            let bad = code.class_uncorrectable(cls);
            assert_eq!(*ec.tec_x[bad as usize].get(0, cls), BigInt::one());
            assert_eq!(*ec.tec_x[!bad as usize].get(0, cls), BigInt::zero());
            assert_eq!(*ec.tec_z[bad as usize].get(0, cls), BigInt::one());
        }
        assert_eq!(*ec.lec_x.get(0, 0), BigInt::one());
        assert_eq!(ec.lec_x.support(0), 1);
        assert_eq!(*ec.lec_z.get(0, 0), BigInt::one());
        assert_eq!(ec.lec_z.support(0), 1);
    }

    #[test]
    fn totals_factor_over_species() {
        // Marginalizing the output must reproduce the product of the
        // species' total masses: every configuration lands somewhere.
        let code = CssCode::steane();
        let cfg = KGoodConfig { ec_total: 3, transversal_sub: 3, ..KGoodConfig::paper() };
        let model = CountModel { corrections: false, ..CountModel::level_one() };
        let anc = trivial_component(&code, &cfg);
        let ec = ec_component(&anc, &code, &cfg, &model).unwrap();
        let (s3x, _, s4x, _) = stage_species(&code, &model);
        let bits = code.num_stabs() as u32 + 1;
        let mut expect = vec![BigInt::zero(); 4];
        let parts = [
            count_atoms(&s3x.shared, Sector::X, bits, 3).total_counts(),
            count_atoms(&s4x.both, Sector::X, bits, 3).total_counts(),
            count_atoms(&s4x.meas, Sector::X, bits, 3).total_counts(),
            count_atoms(&s4x.out, Sector::X, bits, 3).total_counts(),
        ];
        expect[0] = BigInt::one();
        for p in &parts {
            let mut next = vec![BigInt::zero(); 4];
            for i in 0..4 {
                for j in 0..4 - i {
                    let v = &expect[i] * &p[j];
                    next[i + j] += v;
                }
            }
            expect = next;
        }
        // The leader indicator fans each class across all syndromes exactly
        // once, so marginalizing the output recovers the species product.
        let got = ec.lec_x.total_counts();
        for k in 0..=3usize {
            assert_eq!(got[k], expect[k], "order {k}");
        }
    }

    #[test]
    fn steane_ec_pipeline_runs() {
        let code = CssCode::steane();
        let cfg = KGoodConfig {
            prep_sub: 2,
            verify_x_total: 2,
            verify_z_total: 3,
            transversal_sub: 2,
            ec_total: 4,
            ..KGoodConfig::paper()
        };
        let model = CountModel::level_one();
        let c = latin_rectangle_prep(&code, &steane_latin_schedule()).unwrap();
        let p = prep_component(&c, &code, &cfg, &model);
        let vx = verify_x(&p, &p, &code, &cfg, &model).unwrap();
        let vz = verify_z(&vx, &vx, &code, &cfg, &model).unwrap();
        let ec = ec_component(&vz, &code, &cfg, &model).unwrap();
        let g = BigRational::new(BigInt::from(1), BigInt::from(150_000));
        let acc = ec.accept_lb.eval_exact(&g).unwrap();
        assert!(acc > BigRational::zero() && acc < BigRational::one());
        // A single fault cannot leave an uncorrectable error at the output
        // of the leading EC.
        let lec_mal: BigInt = (0..ec.lec_x.len() as u16)
            .filter(|&cls| code.class_uncorrectable(cls))
            .map(|cls| ec.lec_x.get(1, cls).clone())
            .sum();
        assert_eq!(lec_mal, BigInt::zero());
    }
}
