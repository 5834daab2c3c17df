//! Counting for extended rectangles: leading corrections, the gate itself,
//! and trailing corrections, scored by which uncorrectable logical error
//! the rectangle commits.

use super::ec::EcCounts;
use super::verify::CountModel;
use super::KGoodConfig;
use crate::code::CssCode;
use crate::polynomials::BoundExpr;
use anyhow::Result;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GateKind {
    Cnot,
    PrepZero,
    PrepPlus,
    MeasZ,
    MeasX,
    Rest,
}

/// Malignant logical outcomes of a CNOT rectangle, by (control, target)
/// error type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MalEvent {
    IX,
    XI,
    XX,
    IZ,
    ZI,
    ZZ,
}

#[derive(Clone, Debug)]
pub struct ExrecBounds {
    pub malignant: BTreeMap<MalEvent, BoundExpr>,
    pub bad: BoundExpr,
    pub accept_lb: BoundExpr,
}

pub fn exrec_count(
    _ec: &EcCounts,
    _code: &CssCode,
    _cfg: &KGoodConfig,
    _model: &CountModel,
) -> Result<ExrecBounds> {
    anyhow::bail!("rectangle counting not implemented yet")
}

/// Bounds for the non-CNOT rectangles (preparation, measurement, rest).
pub fn gate_exrecs(
    _ec: &EcCounts,
    _kind: GateKind,
    _code: &CssCode,
    _cfg: &KGoodConfig,
    _model: &CountModel,
) -> Result<ExrecBounds> {
    anyhow::bail!("rectangle counting not implemented yet")
}
