//! Exact integer-coefficient count polynomials and certified monotonicity.
//!
//! A counted quantity has the form A(γ)·Σ_k c(k)·t^k with t = γ/(1−12γ)
//! and prefactor A(γ) = (1−12γ)^nc (1−8γ)^nr (1−4γ)^npm determined by the
//! component's location census. The integer coefficients c(k) are weighted
//! fault-configuration counts and do not depend on γ, so long counting runs
//! can be checkpointed and composed exactly.

use anyhow::{ensure, Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PolyCensus {
    pub nc: u64,
    pub nr: u64,
    pub npm: u64,
}

impl PolyCensus {
    pub const EMPTY: PolyCensus = PolyCensus { nc: 0, nr: 0, npm: 0 };

    pub fn add(self, other: PolyCensus) -> PolyCensus {
        PolyCensus {
            nc: self.nc + other.nc,
            nr: self.nr + other.nr,
            npm: self.npm + other.npm,
        }
    }

    pub fn locations(&self) -> u64 {
        self.nc + self.nr + self.npm
    }

    /// A(γ), exactly.
    pub fn prefactor(&self, gamma: &BigRational) -> BigRational {
        let one = BigRational::one();
        pow_u64(&(&one - &(int(12) * gamma)), self.nc)
            * pow_u64(&(&one - &(int(8) * gamma)), self.nr)
            * pow_u64(&(&one - &(int(4) * gamma)), self.npm)
    }

    /// d/dγ log A(γ) = −12nc/(1−12γ) − 8nr/(1−8γ) − 4npm/(1−4γ).
    fn dlog_prefactor(&self, gamma: &BigRational) -> BigRational {
        let one = BigRational::one();
        let term = |w: u64, n: u64| -> BigRational {
            -int(w as i64 * n as i64) / (&one - &(int(w as i64) * gamma))
        };
        term(12, self.nc) + term(8, self.nr) + term(4, self.npm)
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn pow_u64(base: &BigRational, mut e: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountPoly {
    pub census: PolyCensus,
    pub coeffs: BTreeMap<u32, BigInt>,
}

impl CountPoly {
    pub fn new(census: PolyCensus, coeffs: BTreeMap<u32, BigInt>) -> CountPoly {
        let mut p = CountPoly { census, coeffs };
        p.coeffs.retain(|_, c| !c.is_zero());
        p
    }

    /// Multiplicative identity: empty census, coefficient 1 at order 0.
    pub fn unit() -> CountPoly {
        CountPoly::new(PolyCensus::EMPTY, BTreeMap::from([(0, BigInt::one())]))
    }

    pub fn zero() -> CountPoly {
        CountPoly::new(PolyCensus::EMPTY, BTreeMap::new())
    }

    pub fn min_order(&self) -> Option<u32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.values().all(|c| !c.is_negative())
    }

    /// Adds coefficients; censuses must agree (same underlying component).
    pub fn add_counts(&self, other: &CountPoly) -> Result<CountPoly> {
        ensure!(self.census == other.census || other.coeffs.is_empty() || self.coeffs.is_empty(),
            "cannot add counts with mismatched censuses");
        let census = if self.coeffs.is_empty() { other.census } else { self.census };
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            *coeffs.entry(*k).or_insert_with(BigInt::zero) += c;
        }
        Ok(CountPoly::new(census, coeffs))
    }

    pub fn scale(&self, factor: &BigInt) -> CountPoly {
        CountPoly::new(
            self.census,
            self.coeffs.iter().map(|(k, c)| (*k, c * factor)).collect(),
        )
    }

    /// Drops coefficients above `order` (tail mass is accounted separately).
    pub fn truncate(&self, order: u32) -> CountPoly {
        CountPoly::new(
            self.census,
            self.coeffs.iter().filter(|(k, _)| **k <= order).map(|(k, c)| (*k, c.clone())).collect(),
        )
    }

    /// Σ_k c(k)·t^k, exactly.
    pub fn eval_counts(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (k, c) in &self.coeffs {
            acc += BigRational::from_integer(c.clone()) * pow_u64(t, *k as u64);
        }
        acc
    }

    pub fn eval_exact(&self, gamma: &BigRational) -> BigRational {
        self.census.prefactor(gamma) * self.eval_counts(&t_of_gamma(gamma))
    }

    /// d/dγ of the full quantity, exactly, at a rational point.
    pub fn derivative_exact(&self, gamma: &BigRational) -> BigRational {
        let t = t_of_gamma(gamma);
        let a = self.census.prefactor(gamma);
        // dt/dγ = 1/(1−12γ)².
        let dt = pow_u64(&(BigRational::one() - int(12) * gamma), 2).recip();
        let mut dsum = BigRational::zero();
        for (k, c) in &self.coeffs {
            if *k > 0 {
                dsum += int(*k as i64)
                    * BigRational::from_integer(c.clone())
                    * pow_u64(&t, *k as u64 - 1);
            }
        }
        self.census.dlog_prefactor(gamma) * self.eval_exact(gamma) + a * dsum * dt
    }

    /// Stable text format: census line, then sorted `order coefficient` pairs.
    pub fn to_text(&self) -> String {
        let mut s = format!("census {} {} {}\n", self.census.nc, self.census.nr, self.census.npm);
        for (k, c) in &self.coeffs {
            let _ = writeln!(s, "{} {}", k, c);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<CountPoly> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().context("empty polynomial text")?;
        let mut it = head.split_whitespace();
        ensure!(it.next() == Some("census"), "expected census line");
        let mut field = || -> Result<u64> { Ok(it.next().context("short census")?.parse()?) };
        let census = PolyCensus { nc: field()?, nr: field()?, npm: field()? };
        let mut coeffs = BTreeMap::new();
        for line in lines {
            let (k, c) = line
                .trim()
                .split_once(' ')
                .with_context(|| format!("bad coefficient line {line:?}"))?;
            coeffs.insert(k.parse::<u32>()?, c.parse::<BigInt>()?);
        }
        Ok(CountPoly::new(census, coeffs))
    }
}

pub fn t_of_gamma(gamma: &BigRational) -> BigRational {
    gamma / (BigRational::one() - int(12) * gamma)
}

/// Censuses add, coefficients take the Cauchy product.
pub fn convolve(a: &CountPoly, b: &CountPoly) -> CountPoly {
    let mut coeffs: BTreeMap<u32, BigInt> = BTreeMap::new();
    for (ka, ca) in &a.coeffs {
        for (kb, cb) in &b.coeffs {
            *coeffs.entry(ka + kb).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    CountPoly::new(a.census.add(b.census), coeffs)
}

#[derive(Clone, Debug)]
pub enum BoundExpr {
    Poly(CountPoly),
    Const(BigRational),
    Sum(Vec<BoundExpr>),
    Product(Vec<BoundExpr>),
    /// Numerator over denominator; denominator must be positive at the
    /// evaluation point or evaluation is refused.
    Ratio(Box<BoundExpr>, Box<BoundExpr>),
    /// Clamp of a conditional probability bound at one.
    MinWithOne(Box<BoundExpr>),
}

impl BoundExpr {
    pub fn ratio(num: BoundExpr, den: BoundExpr) -> BoundExpr {
        BoundExpr::Ratio(Box::new(num), Box::new(den))
    }

    pub fn min_with_one(inner: BoundExpr) -> BoundExpr {
        BoundExpr::MinWithOne(Box::new(inner))
    }

    pub fn eval_exact(&self, gamma: &BigRational) -> Result<BigRational> {
        Ok(match self {
            BoundExpr::Poly(p) => p.eval_exact(gamma),
            BoundExpr::Const(c) => c.clone(),
            BoundExpr::Sum(terms) => {
                let mut acc = BigRational::zero();
                for t in terms {
                    acc += t.eval_exact(gamma)?;
                }
                acc
            }
            BoundExpr::Product(factors) => {
                let mut acc = BigRational::one();
                for f in factors {
                    acc *= f.eval_exact(gamma)?;
                }
                acc
            }
            BoundExpr::Ratio(num, den) => {
                let d = den.eval_exact(gamma)?;
                ensure!(d.is_positive(), "ratio denominator nonpositive at gamma = {gamma}");
                num.eval_exact(gamma)? / d
            }
            BoundExpr::MinWithOne(inner) => {
                let v = inner.eval_exact(gamma)?;
                if v > BigRational::one() {
                    BigRational::one()
                } else {
                    v
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
}

#[derive(Clone, Debug)]
pub enum Method {
    /// The k_min/γ_max ≥ 12nc + 8nr + 4npm condition for nonnegative counts.
    ClosedForm,
    /// Interval subdivision with a Markov-inequality derivative bound.
    MarkovSubdivision,
}

/// One replayable subdivision step: on [lo, hi] the extremal value of the
/// first derivative was bounded by `derivative_bound` (≤ 0 certifies
/// nonincreasing; the stored bound is on the side that must not cross zero).
#[derive(Clone, Debug)]
pub struct SubdivisionStep {
    pub lo: BigRational,
    pub hi: BigRational,
    pub derivative_bound: BigRational,
}

#[derive(Clone, Debug)]
pub struct MonotonicityCertificate {
    pub interval: (BigRational, BigRational),
    pub direction: Direction,
    pub method: Method,
    pub subdivisions: Vec<SubdivisionStep>,
}

#[derive(Clone, Debug)]
pub enum CertifyOutcome {
    Certified(MonotonicityCertificate),
    /// Bounds were inconclusive at the subdivision limit; the caller may
    /// retry on sub-intervals.
    Inconclusive { at: (BigRational, BigRational) },
}

const MAX_SUBDIVISIONS: usize = 4096;

/// Certifies that a counted quantity is monotone on [interval.0, interval.1].
pub fn certify_monotone(
    poly: &CountPoly,
    interval: (BigRational, BigRational),
    direction: Direction,
) -> Result<CertifyOutcome> {
    let (lo, hi) = interval.clone();
    ensure!(!lo.is_negative() && lo < hi, "need 0 <= lo < hi");
    if poly.coeffs.len() <= 1 && poly.census == PolyCensus::EMPTY {
        // constants (and single monomials with trivial prefactor)
        let trivially = match (poly.min_order(), direction) {
            (None | Some(0), _) => poly.coeffs.len() <= usize::from(poly.min_order() == Some(0)),
            (Some(_), Direction::NonDecreasing) => poly.is_nonnegative(),
            (Some(_), Direction::NonIncreasing) => !poly
                .coeffs
                .values()
                .any(|c| c.is_positive()),
        };
        if trivially {
            return Ok(CertifyOutcome::Certified(MonotonicityCertificate {
                interval,
                direction,
                method: Method::ClosedForm,
                subdivisions: vec![],
            }));
        }
    }
    if direction == Direction::NonDecreasing && poly.is_nonnegative() {
        if let Some(kmin) = poly.min_order() {
            // d/dγ ≥ (kmin/γmax − 12nc − 8nr − 4npm) · Q/(1−12γ)
            let c = &self::int(kmin as i64) / &hi;
            let weight = int(12 * poly.census.nc as i64
                + 8 * poly.census.nr as i64
                + 4 * poly.census.npm as i64);
            if c >= weight {
                return Ok(CertifyOutcome::Certified(MonotonicityCertificate {
                    interval,
                    direction,
                    method: Method::ClosedForm,
                    subdivisions: vec![],
                }));
            }
        }
    }
    markov_subdivide(poly, interval, direction)
}

/// Exact integer polynomial whose sign on [0, 1/12) equals the sign of the
/// derivative of the counted quantity. With u = 1−12γ, v = 1−8γ, w = 1−4γ
/// and C(t) = Σ c_k t^k, Q' = A·[C·dlogA + C'/u²]; multiplying by the
/// positive factor u^(kmax+1)·v·w/A keeps the sign and clears denominators,
/// leaving a polynomial of degree kmax+2 instead of the location count. The
/// Markov-style derivative bound applied to this small polynomial converges,
/// whereas the location-count degree bound is numerically vacuous for our
/// component sizes.
fn derivative_sign_poly(poly: &CountPoly) -> Vec<BigInt> {
    let kmax = poly.max_order().unwrap_or(0) as usize;
    // Cpoly = Σ c_k γ^k u^(kmax−k), Dpoly = Σ k·c_k γ^(k−1) u^(kmax−k)
    let u = vec![BigInt::one(), BigInt::from(-12)];
    let v = vec![BigInt::one(), BigInt::from(-8)];
    let w = vec![BigInt::one(), BigInt::from(-4)];
    let mut cpoly = vec![BigInt::zero(); kmax + 1];
    let mut dpoly = vec![BigInt::zero(); kmax.max(1)];
    for (k, c) in &poly.coeffs {
        let k = *k as usize;
        let up = ipoly_pow(&u, kmax - k);
        for (i, ui) in up.iter().enumerate() {
            cpoly[k + i] += c * ui;
            if k > 0 {
                dpoly[k - 1 + i] += c * ui * BigInt::from(k);
            }
        }
    }
    let vw = ipoly_mul(&v, &w);
    let uw = ipoly_mul(&u, &w);
    let uv = ipoly_mul(&u, &v);
    let mut f = ipoly_scale(&ipoly_mul(&vw, &cpoly), &BigInt::from(-12 * poly.census.nc as i64));
    f = ipoly_add(&f, &ipoly_scale(&ipoly_mul(&uw, &cpoly), &BigInt::from(-8 * poly.census.nr as i64)));
    f = ipoly_add(&f, &ipoly_scale(&ipoly_mul(&uv, &cpoly), &BigInt::from(-4 * poly.census.npm as i64)));
    f = ipoly_add(&f, &ipoly_mul(&vw, &dpoly));
    f
}

fn ipoly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn ipoly_pow(base: &[BigInt], e: usize) -> Vec<BigInt> {
    let mut acc = vec![BigInt::one()];
    for _ in 0..e {
        acc = ipoly_mul(&acc, base);
    }
    acc
}

fn ipoly_add(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, ai) in a.iter().enumerate() {
        out[i] += ai;
    }
    for (i, bi) in b.iter().enumerate() {
        out[i] += bi;
    }
    out
}

fn ipoly_scale(a: &[BigInt], s: &BigInt) -> Vec<BigInt> {
    a.iter().map(|c| c * s).collect()
}

fn ipoly_neg(a: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|c| -c).collect()
}

fn ipoly_eval(a: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in a.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

/// Certifies P ≥ 0 on [lo, hi] (0 ≤ lo < hi < 1) by interval subdivision.
/// The lowest-order monomial is factored out first so vanishing low orders
/// near zero (the strict-fault-tolerance case) do not force unbounded
/// refinement. On each piece the derivative is bounded by Δ = Σ|k·p_k|·hi^(k−1)
/// and the piece is accepted when P(a) − Δ·(b−a) ≥ 0.
fn certify_ipoly_nonnegative(
    p: &[BigInt],
    interval: (BigRational, BigRational),
    direction: Direction,
) -> Result<CertifyOutcome> {
    let mut p = p.to_vec();
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    if p.is_empty() {
        return Ok(CertifyOutcome::Certified(MonotonicityCertificate {
            interval,
            direction,
            method: Method::MarkovSubdivision,
            subdivisions: vec![],
        }));
    }
    // strip γ^m; nonnegative on the domain
    let m = p.iter().position(|c| !c.is_zero()).unwrap();
    let p = &p[m..];
    let (lo0, hi0) = interval.clone();
    let dmax: BigRational = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| BigRational::from_integer(c.abs() * BigInt::from(k)) * pow_u64(&hi0, k as u64 - 1))
        .sum();
    let mut stack = vec![(lo0, hi0)];
    let mut steps = Vec::new();
    let two = int(2);
    while let Some((lo, hi)) = stack.pop() {
        if steps.len() + stack.len() >= MAX_SUBDIVISIONS {
            return Ok(CertifyOutcome::Inconclusive { at: (lo, hi) });
        }
        let at_lo = ipoly_eval(p, &lo);
        if at_lo.is_negative() {
            return Ok(CertifyOutcome::Inconclusive { at: (lo, hi) });
        }
        let bound = &at_lo - &dmax * (&hi - &lo);
        if !bound.is_negative() {
            steps.push(SubdivisionStep { lo, hi, derivative_bound: bound });
        } else if ipoly_eval(p, &hi).is_negative() {
            return Ok(CertifyOutcome::Inconclusive { at: (lo, hi) });
        } else {
            let mid = (&lo + &hi) / &two;
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
    }
    steps.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(CertifyOutcome::Certified(MonotonicityCertificate {
        interval,
        direction,
        method: Method::MarkovSubdivision,
        subdivisions: steps,
    }))
}

fn markov_subdivide(
    poly: &CountPoly,
    interval: (BigRational, BigRational),
    direction: Direction,
) -> Result<CertifyOutcome> {
    ensure!(
        interval.1 < BigRational::new(BigInt::one(), BigInt::from(12)),
        "interval must stay below gamma = 1/12"
    );
    let f = derivative_sign_poly(poly);
    let f = match direction {
        Direction::NonDecreasing => f,
        Direction::NonIncreasing => ipoly_neg(&f),
    };
    certify_ipoly_nonnegative(&f, interval, direction)
}

impl MonotonicityCertificate {
    /// Re-checks the recorded evidence: the sub-intervals must tile the
    /// interval and each recorded derivative bound must still hold.
    pub fn replay(&self, poly: &CountPoly) -> Result<()> {
        match self.method {
            Method::ClosedForm => {
                ensure!(poly.is_nonnegative(), "closed form requires nonnegative counts");
                let kmin = poly.min_order().unwrap_or(0);
                let lhs = int(kmin as i64) / &self.interval.1;
                let weight = int(12 * poly.census.nc as i64
                    + 8 * poly.census.nr as i64
                    + 4 * poly.census.npm as i64);
                if !(poly.coeffs.len() <= 1 && poly.census == PolyCensus::EMPTY) {
                    ensure!(lhs >= weight, "closed-form condition no longer holds");
                }
            }
            Method::MarkovSubdivision => {
                let f = derivative_sign_poly(poly);
                let f = match self.direction {
                    Direction::NonDecreasing => f,
                    Direction::NonIncreasing => ipoly_neg(&f),
                };
                self.replay_subdivision(&f)?;
            }
        }
        Ok(())
    }

    /// Re-derives the per-piece margins for a sign polynomial and checks
    /// they match the recorded evidence and still certify nonnegativity.
    fn replay_subdivision(&self, p: &[BigInt]) -> Result<()> {
        let mut p = p.to_vec();
        while p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
        if p.is_empty() {
            ensure!(self.subdivisions.is_empty(), "nonempty record for zero polynomial");
            return Ok(());
        }
        let m = p.iter().position(|c| !c.is_zero()).unwrap();
        let p = &p[m..];
        let dmax: BigRational = p
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| {
                BigRational::from_integer(c.abs() * BigInt::from(k))
                    * pow_u64(&self.interval.1, k as u64 - 1)
            })
            .sum();
        let mut cursor = self.interval.0.clone();
        for step in &self.subdivisions {
            ensure!(step.lo == cursor, "subdivision gap at {}", step.lo);
            let bound = ipoly_eval(p, &step.lo) - &dmax * (&step.hi - &step.lo);
            ensure!(bound == step.derivative_bound, "bound mismatch at {}", step.lo);
            ensure!(!bound.is_negative(), "recorded piece no longer certifies");
            cursor = step.hi.clone();
        }
        ensure!(cursor == self.interval.1, "subdivisions do not reach interval end");
        Ok(())
    }
}

/// Certifies sign(W) ≥ 0 on [0, t_of_gamma(γmax)] for the t-space polynomial
/// W = N'·D − N·D', which makes the ratio N/D nondecreasing when N and D
/// share a census and D > 0. Near t = 0 the low orders of W vanish when N
/// is strictly fault-tolerant (c(k) = 0 for k ≤ 3); working in t makes that
/// case uniform with the rest of the interval.
pub fn certify_ratio_nondecreasing(
    num: &CountPoly,
    den: &CountPoly,
    gamma_max: &BigRational,
) -> Result<CertifyOutcome> {
    ensure!(num.census == den.census, "ratio census mismatch");
    let w = t_poly_sub(&t_poly_mul(&t_derivative(num), &den.coeffs), &t_poly_mul(&t_derivative(den), &num.coeffs));
    let tmax = t_of_gamma(gamma_max);
    certify_t_poly_nonnegative(&w, &tmax)
}

type TPoly = BTreeMap<u32, BigInt>;

fn t_derivative(p: &CountPoly) -> TPoly {
    p.coeffs
        .iter()
        .filter(|(k, _)| **k > 0)
        .map(|(k, c)| (k - 1, c * BigInt::from(*k)))
        .collect()
}

fn t_poly_mul(a: &TPoly, b: &TPoly) -> TPoly {
    let mut out = TPoly::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            *out.entry(ka + kb).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn t_poly_sub(a: &TPoly, b: &TPoly) -> TPoly {
    let mut out = a.clone();
    for (k, c) in b {
        *out.entry(*k).or_insert_with(BigInt::zero) -= c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}


fn certify_t_poly_nonnegative(w: &TPoly, tmax: &BigRational) -> Result<CertifyOutcome> {
    let deg = w.keys().next_back().map_or(0, |k| *k as usize);
    let mut coeffs = vec![BigInt::zero(); deg + 1];
    for (k, c) in w {
        coeffs[*k as usize] = c.clone();
    }
    certify_ipoly_nonnegative(
        &coeffs,
        (BigRational::zero(), tmax.clone()),
        Direction::NonDecreasing,
    )
}

/// Default certification limit: γ = (2×10⁻³)/15.
pub fn gamma_max_default() -> BigRational {
    BigRational::new(BigInt::from(2), BigInt::from(15_000))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(census: (u64, u64, u64), coeffs: &[(u32, i64)]) -> CountPoly {
        CountPoly::new(
            PolyCensus { nc: census.0, nr: census.1, npm: census.2 },
            coeffs.iter().map(|(k, c)| (*k, BigInt::from(*c))).collect(),
        )
    }

    fn gam(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn convolve_identity_and_commutativity() {
        let a = poly((3, 1, 2), &[(1, 5), (2, 7)]);
        assert_eq!(convolve(&a, &CountPoly::unit()), a);
        let b = poly((1, 0, 0), &[(0, 1), (1, 12)]);
        assert_eq!(convolve(&a, &b), convolve(&b, &a));
    }

    #[test]
    fn convolve_two_single_cnot_marginals() {
        // hand expansion of (1 + 12t)^2
        let a = poly((1, 0, 0), &[(0, 1), (1, 12)]);
        let p = convolve(&a, &a);
        assert_eq!(p.census, PolyCensus { nc: 2, nr: 0, npm: 0 });
        assert_eq!(p, poly((2, 0, 0), &[(0, 1), (1, 24), (2, 144)]));
    }

    #[test]
    fn eval_exact_basic() {
        let a = poly((5, 2, 4), &[(0, 3), (2, 7)]);
        assert_eq!(a.eval_exact(&BigRational::zero()), int(3));
        assert_eq!(CountPoly::unit().eval_exact(&gam(1, 9000)), BigRational::one());
        // single CNOT X marginal sums to total probability one
        let m = poly((1, 0, 0), &[(0, 1), (1, 12)]);
        assert_eq!(m.eval_exact(&gam(1, 15000)), BigRational::one());
    }

    #[test]
    fn eval_multiplicativity_of_convolution() {
        let a = poly((4, 1, 0), &[(0, 2), (1, 9), (3, 4)]);
        let b = poly((2, 0, 3), &[(1, 6), (2, 1)]);
        let g = gam(1, 12345);
        assert_eq!(
            convolve(&a, &b).eval_exact(&g),
            a.eval_exact(&g) * b.eval_exact(&g)
        );
    }

    #[test]
    fn poly_text_roundtrip() {
        let a = poly((58, 12, 46), &[(1, 696), (2, -40271), (5, 1)]);
        assert_eq!(CountPoly::from_text(&a.to_text()).unwrap(), a);
    }

    #[test]
    fn certify_constant_and_single_term() {
        let c = poly((0, 0, 0), &[(0, 42)]);
        let iv = (BigRational::zero(), gamma_max_default());
        for dir in [Direction::NonDecreasing, Direction::NonIncreasing] {
            match certify_monotone(&c, iv.clone(), dir).unwrap() {
                CertifyOutcome::Certified(_) => {}
                other => panic!("constant not certified: {other:?}"),
            }
        }
        let m = poly((0, 0, 0), &[(4, 17)]);
        assert!(matches!(
            certify_monotone(&m, iv, Direction::NonDecreasing).unwrap(),
            CertifyOutcome::Certified(_)
        ));
    }

    #[test]
    fn certify_bad_poly_closed_form() {
        // order >= 5 with a large census: kmin/γmax = 5·7500 = 37500 beats
        // the census weight 12·500 = 6000.
        let bad = poly((500, 0, 0), &[(5, 123456), (6, 999)]);
        let iv = (BigRational::zero(), gamma_max_default());
        match certify_monotone(&bad, iv, Direction::NonDecreasing).unwrap() {
            CertifyOutcome::Certified(cert) => {
                assert!(matches!(cert.method, Method::ClosedForm));
                cert.replay(&bad).unwrap();
            }
            other => panic!("expected closed-form certificate: {other:?}"),
        }
    }

    #[test]
    fn certify_accept_poly_markov() {
        // an acceptance-like quantity: total mass 1 at order 0 plus a count
        // smaller than the census weight, so it decreases in γ
        let accept = poly((100, 0, 0), &[(0, 1), (1, 800)]);
        let iv = (BigRational::zero(), gamma_max_default());
        match certify_monotone(&accept, iv, Direction::NonIncreasing).unwrap() {
            CertifyOutcome::Certified(cert) => {
                assert!(matches!(cert.method, Method::MarkovSubdivision));
                assert!(!cert.subdivisions.is_empty());
                cert.replay(&accept).unwrap();
            }
            other => panic!("expected markov certificate: {other:?}"),
        }
    }

    #[test]
    fn certify_ratio_with_vanishing_low_orders() {
        // strictly fault-tolerant numerator (orders < 4 vanish) against an
        // acceptance-style denominator
        let num = poly((300, 20, 46), &[(4, 5_000_000), (5, -1_200_000), (6, 800)]);
        let den = poly((300, 20, 46), &[(0, 1), (1, 30), (2, 5500)]);
        match certify_ratio_nondecreasing(&num, &den, &gamma_max_default()).unwrap() {
            CertifyOutcome::Certified(cert) => {
                assert_eq!(cert.direction, Direction::NonDecreasing);
            }
            other => panic!("ratio not certified: {other:?}"),
        }
    }

    #[test]
    fn expr_eval_and_clamp() {
        let g = gam(1, 15000);
        let one = BoundExpr::Poly(poly((1, 0, 0), &[(0, 1), (1, 12)]));
        let big = BoundExpr::Sum(vec![one.clone(), one.clone()]);
        assert_eq!(BoundExpr::min_with_one(big).eval_exact(&g).unwrap(), BigRational::one());
        let r = BoundExpr::ratio(one, BoundExpr::Const(int(2)));
        assert_eq!(r.eval_exact(&g).unwrap(), gam(1, 2));
        let zero_den = BoundExpr::ratio(BoundExpr::Const(int(1)), BoundExpr::Const(int(0)));
        assert!(zero_den.eval_exact(&g).is_err());
    }
}
