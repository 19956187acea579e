//! Explicit growth bounds, evaluated exactly where possible and in log2 always.
//!
//! Every bound here has the shape `a * (2^e - 1) * b + c`. When `e` is a
//! modest nonnegative integer the value is materialized as an exact big
//! rational. The base-2 logarithm is always computed, independently of the
//! exact path, in high-precision floating point straight from the
//! parameters, so astronomically large values (whose exponent is itself a
//! 1200-bit number) are still comparable.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::rational::Rational;

/// Working precision of the log2 path, in bits.
pub const PRECISION: usize = 192;
const RM: RoundingMode = RoundingMode::ToEven;
/// Exponents above this are never materialized.
const EXACT_EXPONENT_LIMIT: u64 = 1 << 20;
/// Above this exponent, `2^e - 1` and the additive constant are invisible at
/// working precision.
const DIRECT_EXPONENT_LIMIT: i64 = 256;
/// log2 values beyond this cannot be turned back into a float.
const LOG2_LIMIT: i64 = 1 << 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("bound exceeds the representable range")]
    OutOfRange,
}

/// A bound value: exact when its exponent is integral, log2 always.
#[derive(Debug, Clone)]
pub struct BoundValue {
    pub expression: String,
    pub exact: Option<BigRational>,
    pub log2: BigFloat,
}

impl BoundValue {
    /// Decimal text of the exact value (`p/q` when it is not an integer).
    pub fn exact_string(&self) -> Option<String> {
        self.exact.as_ref().map(|r| {
            if r.is_integer() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        })
    }

    pub fn exact_integer(&self) -> Option<BigInt> {
        self.exact
            .as_ref()
            .filter(|r| r.is_integer())
            .map(|r| r.numer().clone())
    }

    pub fn log2_string(&self) -> String {
        format_float(&self.log2)
    }

    /// The log2 field rounded to `f64` (may be infinite for huge values).
    pub fn log2_f64(&self) -> f64 {
        float_to_f64(&self.log2)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "expression": self.expression,
            "exact": self.exact_string(),
            "log2": self.log2_string(),
        })
    }

    /// The value itself as a float, recovered from the log2 field.
    fn approx(&self, cc: &mut Consts) -> Result<BigFloat, BoundsError> {
        if self.log2 > BigFloat::from_i64(LOG2_LIMIT, PRECISION) {
            return Err(BoundsError::OutOfRange);
        }
        Ok(int(2).pow(&self.log2, PRECISION, RM, cc))
    }
}

pub(crate) fn format_float(x: &BigFloat) -> String {
    let mut cc = consts();
    x.format(Radix::Dec, RM, &mut cc).unwrap_or_else(|_| "nan".to_string())
}

pub(crate) fn float_to_f64(x: &BigFloat) -> f64 {
    format_float(x).parse().unwrap_or(f64::NAN)
}

fn consts() -> Consts {
    Consts::new().expect("constant cache allocation")
}

fn int(v: i64) -> BigFloat {
    BigFloat::from_i64(v, PRECISION)
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn float_of_int(n: &BigInt, cc: &mut Consts) -> BigFloat {
    BigFloat::parse(&n.to_string(), Radix::Dec, PRECISION, RM, cc)
}

fn float_of(r: &BigRational, cc: &mut Consts) -> BigFloat {
    float_of_int(r.numer(), cc).div(&float_of_int(r.denom(), cc), PRECISION, RM)
}

fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, PRECISION, RM)
}

fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, PRECISION, RM)
}

fn log2(x: &BigFloat, cc: &mut Consts) -> BigFloat {
    x.log2(PRECISION, RM, cc)
}

/// `log2(2^a + 2^b)`.
fn log2_add(a: &BigFloat, b: &BigFloat, cc: &mut Consts) -> BigFloat {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    let gap = lo.sub(hi, PRECISION, RM);
    if gap < int(-(PRECISION as i64) - 8) {
        return hi.clone();
    }
    let tail = int(2).pow(&gap, PRECISION, RM, cc);
    add(hi, &log2(&add(&int(1), &tail), cc))
}

/// A quantity known as a float and, sometimes, exactly.
#[derive(Debug, Clone)]
struct Term {
    exact: Option<BigRational>,
    approx: BigFloat,
}

impl Term {
    fn rational(r: &BigRational, cc: &mut Consts) -> Self {
        Term {
            exact: Some(r.clone()),
            approx: float_of(r, cc),
        }
    }

    /// `scale * self + offset`.
    fn affine(&self, scale: i64, offset: &BigRational, cc: &mut Consts) -> Self {
        Term {
            exact: self
                .exact
                .as_ref()
                .map(|x| x * BigRational::from_integer(scale.into()) + offset),
            approx: add(&mul(&self.approx, &int(scale)), &float_of(offset, cc)),
        }
    }
}

/// Evaluates `a * (2^e - 1) * b + c` with `a, b > 0` and `e >= 0`.
fn evaluate(a: &Term, e: &Term, b: &Term, c: &Term, cc: &mut Consts) -> (Option<BigRational>, BigFloat) {
    let exact = match (&a.exact, &e.exact, &b.exact, &c.exact) {
        (Some(a), Some(e), Some(b), Some(c)) if e.is_integer() && !e.is_negative() => {
            e.to_integer().to_u64().filter(|&k| k <= EXACT_EXPONENT_LIMIT).map(|k| {
                let pow = (BigInt::one() << k) - BigInt::one();
                a * BigRational::from_integer(pow) * b + c
            })
        }
        _ => None,
    };

    let ab = add(&log2(&a.approx, cc), &log2(&b.approx, cc));
    let log = if e.approx < int(DIRECT_EXPONENT_LIMIT) {
        let pow = int(2).pow(&e.approx, PRECISION, RM, cc).sub(&int(1), PRECISION, RM);
        let total = add(&mul(&mul(&a.approx, &pow), &b.approx), &c.approx);
        log2(&total, cc)
    } else {
        add(&ab, &e.approx)
    };
    (exact, log)
}

fn bound(expression: String, a: &Term, e: &Term, b: &Term, c: &Term, cc: &mut Consts) -> BoundValue {
    let (exact, log2) = evaluate(a, e, b, c, cc);
    let expression = if exact.is_none() {
        format!("{expression} [log2 only]")
    } else {
        expression
    };
    BoundValue {
        expression,
        exact,
        log2,
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Fellow-travelling length bound for `(1,q)`-quasigeodesics in the band
/// `[K0, K1]`: `(q(K1-K0)+1)(2^(qK1+1)-1)qK1+1`.
pub fn meat_bound(q: i64, k0: i64, k1: i64) -> Result<BoundValue, BoundsError> {
    if q < 3 {
        return Err(BoundsError::Precondition(format!("q >= 3 required, got q = {q}")));
    }
    if !(1 <= k0 && k0 < k1) {
        return Err(BoundsError::Precondition(format!(
            "1 <= K0 < K1 required, got K0 = {k0}, K1 = {k1}"
        )));
    }
    let mut cc = consts();
    let qk1 = q.checked_mul(k1).ok_or(BoundsError::OutOfRange)?;
    let a = q.checked_mul(k1 - k0).ok_or(BoundsError::OutOfRange)? + 1;
    let expression = format!("({q}*({k1}-{k0})+1)*(2^({q}*{k1}+1)-1)*{q}*{k1}+1");
    let a = Term::rational(&rat(a), &mut cc);
    let e = Term::rational(&(rat(qk1) + rat(1)), &mut cc);
    let b = Term::rational(&rat(qk1), &mut cc);
    let c = Term::rational(&rat(1), &mut cc);
    Ok(bound(expression, &a, &e, &b, &c, &mut cc))
}

/// Bound on `r0` with `f_D(r0) <= T` when `q`-bigons are `4(q+eps)`-thin:
/// `(12T+26eps-3D/4+1)(2^(12T+24eps+1)-1)(12T+24eps)+1`.
pub fn thinbigons_bound(t: Rational, eps: Rational, d: Rational) -> Result<BoundValue, BoundsError> {
    let (t, e, dd) = (big(&t), big(&eps), big(&d));
    let mut failed = Vec::new();
    if e.is_negative() {
        failed.push(format!("eps >= 0 required, got eps = {eps}"));
    }
    if dd <= BigRational::new(32.into(), 3.into()) + rat(48) * &e {
        failed.push(format!("D > 32/3 + 48*eps required, got D = {d}"));
    }
    if t <= &dd / rat(4) - rat(8) * &e {
        failed.push(format!("T > D/4 - 8*eps required, got T = {}", t));
    }
    if !failed.is_empty() {
        return Err(BoundsError::Precondition(failed.join("; ")));
    }
    Ok(thinbigons_unchecked(&t, &e, &dd, &mut consts()))
}

fn thinbigons_unchecked(t: &BigRational, e: &BigRational, d: &BigRational, cc: &mut Consts) -> BoundValue {
    let base = rat(12) * t + rat(24) * e;
    let a = &base + rat(2) * e - rat(3) * d / rat(4) + rat(1);
    let expression = format!("(12*T+26*eps-3*D/4+1)*(2^(12*T+24*eps+1)-1)*(12*T+24*eps)+1 with T={t}, eps={e}, D={d}");
    bound(
        expression,
        &Term::rational(&a, cc),
        &Term::rational(&(&base + rat(1)), cc),
        &Term::rational(&base, cc),
        &Term::rational(&rat(1), cc),
        cc,
    )
}

/// The pair of constants used for the hyperbolicity bound at a given `eps`.
#[derive(Debug, Clone)]
pub struct ConstantsBounds {
    pub eps: Rational,
    /// `D = 11 + 48 eps`.
    pub d: BigRational,
    pub n: BoundValue,
    pub u: BoundValue,
}

impl ConstantsBounds {
    pub fn to_json(&self) -> Value {
        json!({
            "eps": crate::rational::to_pq(&self.eps),
            "D": format!("{}/{}", self.d.numer(), self.d.denom()),
            "N": self.n.to_json(),
            "u": self.u.to_json(),
        })
    }
}

fn memo<V>(cell: &'static OnceLock<Mutex<HashMap<Rational, Arc<V>>>>) -> &'static Mutex<HashMap<Rational, Arc<V>>> {
    cell.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `N < (106D+26eps+1)(2^(108D+24eps+1)-1)(108D+24eps)+2+3D` and
/// `u <= (48N+26eps-3D/4+25)(2^(48N+25eps+13)-1)(48N+24eps+24)+1`, with
/// `D = 11 + 48 eps` and `N` set to its bound.
pub fn constants_bounds(eps: Rational) -> Result<Arc<ConstantsBounds>, BoundsError> {
    static CACHE: OnceLock<Mutex<HashMap<Rational, Arc<ConstantsBounds>>>> = OnceLock::new();
    if eps < Rational::zero() {
        return Err(BoundsError::Precondition(format!("eps >= 0 required, got eps = {eps}")));
    }
    if let Some(hit) = memo(&CACHE).lock().unwrap().get(&eps) {
        return Ok(hit.clone());
    }
    let mut cc = consts();
    let e = big(&eps);
    let d = rat(11) + rat(48) * &e;

    let n_base = rat(108) * &d + rat(24) * &e;
    let n = bound(
        format!("(106*D+26*eps+1)*(2^(108*D+24*eps+1)-1)*(108*D+24*eps)+2+3*D with eps={e}, D={d}"),
        &Term::rational(&(rat(106) * &d + rat(26) * &e + rat(1)), &mut cc),
        &Term::rational(&(&n_base + rat(1)), &mut cc),
        &Term::rational(&n_base, &mut cc),
        &Term::rational(&(rat(2) + rat(3) * &d), &mut cc),
        &mut cc,
    );

    let n_term = Term {
        exact: n.exact.clone(),
        approx: n.approx(&mut cc)?,
    };
    let a = n_term.affine(48, &(rat(26) * &e - rat(3) * &d / rat(4) + rat(25)), &mut cc);
    let ex = n_term.affine(48, &(rat(25) * &e + rat(13)), &mut cc);
    let b = n_term.affine(48, &(rat(24) * &e + rat(24)), &mut cc);
    let u = bound(
        format!("(48*N+26*eps-3*D/4+25)*(2^(48*N+25*eps+13)-1)*(48*N+24*eps+24)+1 with eps={e}, D={d}, N=N_bound"),
        &a,
        &ex,
        &b,
        &Term::rational(&rat(1), &mut cc),
        &mut cc,
    );

    let out = Arc::new(ConstantsBounds { eps, d, n, u });
    memo(&CACHE).lock().unwrap().insert(eps, out.clone());
    Ok(out)
}

/// The hyperbolicity constant as a function of `eps`, with the branch of the
/// maximum that attains it and the `k` used in the third branch.
#[derive(Debug, Clone)]
pub struct DeltaBound {
    pub eps: Rational,
    pub value: BoundValue,
    /// 1, 2 or 3.
    pub branch: u8,
    pub branch_log2: [BigFloat; 3],
    /// Least `k` with `(3/2)^k (4N+2) > 2D + 2(u + (k+1)N)`, at working precision.
    pub k: BigFloat,
}

impl DeltaBound {
    pub fn to_json(&self) -> Value {
        let mut v = self.value.to_json();
        v["branch"] = json!(self.branch);
        v["k"] = json!(format_float(&self.k));
        v["branch_log2"] = json!(self.branch_log2.iter().map(format_float).collect::<Vec<_>>());
        v
    }
}

/// `delta(eps) = max{110+484eps, u+N, 11+48eps+2(u+(k+1)N)}`.
pub fn delta_of_eps(eps: Rational) -> Result<Arc<DeltaBound>, BoundsError> {
    static CACHE: OnceLock<Mutex<HashMap<Rational, Arc<DeltaBound>>>> = OnceLock::new();
    if let Some(hit) = memo(&CACHE).lock().unwrap().get(&eps) {
        return Ok(hit.clone());
    }
    let consts_b = constants_bounds(eps)?;
    let mut cc = consts();
    let e = big(&eps);
    let d = &consts_b.d;
    let (ln, lu) = (&consts_b.n.log2, &consts_b.u.log2);

    let first = rat(110) + rat(484) * &e;
    let l1 = log2(&float_of(&first, &mut cc), &mut cc);
    let l2 = log2_add(lu, ln, &mut cc);

    let k = least_k(ln, lu, d, &mut cc);
    let log_d = log2(&float_of(d, &mut cc), &mut cc);
    let kn = add(&log2(&add(&k, &int(1)), &mut cc), ln);
    let l3 = log2_add(&log_d, &add(&int(1), &log2_add(lu, &kn, &mut cc)), &mut cc);

    // Branch 3 exceeds branch 2 by u + (2k+1)N + D, so ties go to the later branch.
    let branch_log2 = [l1, l2, l3];
    let mut branch = 0;
    for i in 1..3 {
        if branch_log2[i] >= branch_log2[branch] {
            branch = i;
        }
    }
    let exact = match branch {
        0 => Some(first),
        1 => match (&consts_b.u.exact, &consts_b.n.exact) {
            (Some(u), Some(n)) => Some(u + n),
            _ => None,
        },
        _ => None,
    };
    let expression = format!(
        "max{{110+484*eps, u+N, D+2*(u+(k+1)*N)}} with eps={e}, D={d}, k=least k with (3/2)^k*(4N+2) > 2D+2(u+(k+1)N) = {}{}",
        format_float(&k),
        if exact.is_none() { " [log2 only]" } else { "" }
    );
    let out = Arc::new(DeltaBound {
        eps,
        value: BoundValue {
            expression,
            exact,
            log2: branch_log2[branch].clone(),
        },
        branch: branch as u8 + 1,
        branch_log2,
        k,
    });
    memo(&CACHE).lock().unwrap().insert(eps, out.clone());
    Ok(out)
}

/// Least integer `k >= 0` with `k log2(3/2) + log2(4N+2) > log2(2D + 2u + 2(k+1)N)`.
fn least_k(ln: &BigFloat, lu: &BigFloat, d: &BigRational, cc: &mut Consts) -> BigFloat {
    let log_d = log2(&float_of(d, cc), cc);
    let step = log2(&int(3).div(&int(2), PRECISION, RM), cc);
    // log2(4N + 2) = 1 + log2(2N + 1)
    let lhs0 = add(&int(1), &log2_add(&add(&int(1), ln), &int(0), cc));
    let holds = |k: &BigFloat, cc: &mut Consts| {
        let lhs = add(&mul(k, &step), &lhs0);
        let kn = add(&log2(&add(k, &int(1)), cc), ln);
        let rhs = add(&int(1), &log2_add(&log_d, &log2_add(lu, &kn, cc), cc));
        lhs > rhs
    };
    let guess = add(&int(1), lu)
        .sub(&lhs0, PRECISION, RM)
        .div(&step, PRECISION, RM)
        .ceil();
    let mut k = guess.max(&int(0));
    for _ in 0..64 {
        if holds(&k, cc) {
            break;
        }
        k = add(&k, &int(1));
    }
    for _ in 0..64 {
        let prev = k.sub(&int(1), PRECISION, RM);
        if prev < int(0) || prev == k || !holds(&prev, cc) {
            break;
        }
        k = prev;
    }
    k
}

/// `eps * delta(1)`, the hyperbolicity constant of a rescaled space.
#[derive(Debug, Clone)]
pub struct LinearBound {
    pub eps: Rational,
    /// `delta(1)`, shared by every `eps`.
    pub unit: Arc<DeltaBound>,
    pub value: BoundValue,
}

impl LinearBound {
    /// `value / eps` in log2, which is `log2 delta(1)` by construction.
    pub fn per_unit_log2(&self) -> &BigFloat {
        &self.unit.value.log2
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.value.to_json();
        v["eps"] = json!(crate::rational::to_pq(&self.eps));
        v["per_unit"] = self.unit.to_json();
        v
    }
}

pub fn delta_linear(eps: Rational) -> Result<LinearBound, BoundsError> {
    if eps <= Rational::zero() {
        return Err(BoundsError::Precondition(format!("eps > 0 required, got eps = {eps}")));
    }
    let unit = delta_of_eps(Rational::one())?;
    let mut cc = consts();
    let scale = big(&eps);
    let log2 = add(&log2(&float_of(&scale, &mut cc), &mut cc), &unit.value.log2);
    let exact = unit.value.exact.as_ref().map(|x| x * &scale);
    let value = BoundValue {
        expression: format!("{} * delta(1)", scale),
        exact,
        log2,
    };
    Ok(LinearBound { eps, unit, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log2_of_int(n: &BigInt) -> f64 {
        let bits = n.bits();
        let shift = bits.saturating_sub(60);
        let top = (n >> shift).to_f64().unwrap();
        top.log2() + shift as f64
    }

    #[test]
    fn meat_small_case() {
        let b = meat_bound(3, 1, 2).unwrap();
        assert_eq!(b.exact_integer(), Some(BigInt::from(3049)));
        assert!((b.log2_f64() - 3049f64.log2()).abs() < 1e-12);
        let c = meat_bound(4, 1, 2).unwrap();
        assert_eq!(c.exact_integer(), Some(BigInt::from(5 * 511 * 8 + 1)));
        assert!(meat_bound(2, 1, 2).is_err());
        assert!(meat_bound(3, 2, 2).is_err());
    }

    #[test]
    fn thinbigons_reference() {
        let b = thinbigons_bound(Rational::from(3), Rational::from(0), Rational::from(11)).unwrap();
        let expect =
            BigRational::new(115.into(), 4.into()) * BigRational::from_integer((BigInt::one() << 37) - 1) * rat(36)
                + rat(1);
        assert_eq!(b.exact.as_ref(), Some(&expect));
        let approx = 37.0 + (28.75f64 * 36.0).log2();
        assert!((b.log2_f64() - approx).abs() < 1e-9);
        let err = thinbigons_bound(Rational::from(2), Rational::from(0), Rational::from(11)).unwrap_err();
        assert!(err.to_string().contains("T > D/4"));
    }

    #[test]
    fn constants_at_zero() {
        let c = constants_bounds(Rational::from(0)).unwrap();
        let expect: BigInt = BigInt::from(1167) * ((BigInt::one() << 1189u32) - 1u32) * 1188u32 + 35u32;
        assert_eq!(c.n.exact_integer(), Some(expect.clone()));
        assert!((c.n.log2_f64() - log2_of_int(&expect)).abs() < 1e-9);
        assert!(c.u.exact.is_none());
        let mut cc = consts();
        let ll = float_to_f64(&log2(&c.u.log2, &mut cc));
        assert!((ll - (48f64.log2() + c.n.log2_f64())).abs() < 1e-9);
    }

    #[test]
    fn delta_prefers_the_third_branch() {
        let d = delta_of_eps(Rational::from(0)).unwrap();
        assert_eq!(d.branch, 3);
        assert!((float_to_f64(&d.branch_log2[0]) - 110f64.log2()).abs() < 1e-12);
        assert!(d.k > int(0));
    }

    #[test]
    fn linear_scaling() {
        let one = delta_linear(Rational::from(1)).unwrap();
        let two = delta_linear(Rational::from(2)).unwrap();
        assert!(Arc::ptr_eq(&one.unit, &two.unit));
        assert_eq!(one.value.log2, one.unit.value.log2);
        assert!(delta_linear(Rational::from(0)).is_err());
    }

    #[test]
    fn log2_add_matches_floats() {
        let mut cc = consts();
        let r = log2_add(&int(3), &int(1), &mut cc);
        assert!((float_to_f64(&r) - 10f64.log2()).abs() < 1e-12);
    }
}
