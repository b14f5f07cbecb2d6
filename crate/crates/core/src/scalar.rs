//! Scalar domains: prime fields GF(p), the rationals, and quaternions with
//! rational or floating-point coordinates.
//!
//! A [`Scalar`] carries its own domain; arithmetic between scalars of
//! different domains is a programming error and panics, while the fallible
//! entry points exposed to callers (inverses, norms, the quaternion
//! constructions) return [`AlgebraError`] values. Exact domains compare
//! exactly; the float quaternion domain compares within its tolerance.

use crate::error::{AlgebraError, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// One of the four supported division-ring domains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarDomain {
    /// GF(p) for a prime p.
    PrimeField(u64),
    /// The field of rational numbers.
    Rational,
    /// Quaternions with rational coordinates.
    QuaternionRational,
    /// Quaternions with f64 coordinates and an absolute comparison tolerance.
    QuaternionFloat(f64),
}

impl ScalarDomain {
    pub fn prime_field(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(ScalarDomain::PrimeField(p))
        } else {
            Err(AlgebraError::DomainMismatch(format!("{p} is not prime")))
        }
    }

    pub fn quaternion_float() -> Self {
        ScalarDomain::QuaternionFloat(DEFAULT_TOLERANCE)
    }

    pub fn is_field(&self) -> bool {
        matches!(self, ScalarDomain::PrimeField(_) | ScalarDomain::Rational)
    }

    pub fn is_quaternion(&self) -> bool {
        matches!(
            self,
            ScalarDomain::QuaternionRational | ScalarDomain::QuaternionFloat(_)
        )
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, ScalarDomain::QuaternionFloat(_))
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            ScalarDomain::QuaternionFloat(t) => *t,
            _ => 0.0,
        }
    }

    /// Number of elements, for the finite domains.
    pub fn cardinality(&self) -> Option<u64> {
        match self {
            ScalarDomain::PrimeField(p) => Some(*p),
            _ => None,
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            ScalarDomain::PrimeField(p) => *p,
            _ => 0,
        }
    }
}

impl fmt::Display for ScalarDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarDomain::PrimeField(p) => write!(f, "gf:{p}"),
            ScalarDomain::Rational => write!(f, "rat"),
            ScalarDomain::QuaternionRational => write!(f, "quat-rat"),
            ScalarDomain::QuaternionFloat(t) => write!(f, "quat-f64:{t}"),
        }
    }
}

impl ScalarDomain {
    pub fn parse(text: &str) -> Result<Self> {
        if let Some(p) = text.strip_prefix("gf:") {
            let p: u64 = p
                .parse()
                .map_err(|_| AlgebraError::DomainMismatch(format!("bad field size {p:?}")))?;
            return ScalarDomain::prime_field(p);
        }
        match text {
            "rat" => Ok(ScalarDomain::Rational),
            "quat-rat" => Ok(ScalarDomain::QuaternionRational),
            "quat-f64" => Ok(ScalarDomain::quaternion_float()),
            _ => {
                if let Some(t) = text.strip_prefix("quat-f64:") {
                    let tol: f64 = t.parse().map_err(|_| {
                        AlgebraError::DomainMismatch(format!("bad tolerance {t:?}"))
                    })?;
                    if tol <= 0.0 {
                        return Err(AlgebraError::DomainMismatch(
                            "tolerance must be positive".into(),
                        ));
                    }
                    Ok(ScalarDomain::QuaternionFloat(tol))
                } else {
                    Err(AlgebraError::DomainMismatch(format!(
                        "unknown domain {text:?}"
                    )))
                }
            }
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.checked_mul(d).is_some_and(|s| s <= p) {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of one of the four scalar domains.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Fp { p: u64, v: u64 },
    Rat(BigRational),
    QuatRat(Box<[BigRational; 4]>),
    QuatF { v: [f64; 4], tol: f64 },
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

impl Scalar {
    pub fn zero(domain: ScalarDomain) -> Scalar {
        Scalar::from_i64(domain, 0)
    }

    pub fn one(domain: ScalarDomain) -> Scalar {
        Scalar::from_i64(domain, 1)
    }

    pub fn from_i64(domain: ScalarDomain, n: i64) -> Scalar {
        match domain {
            ScalarDomain::PrimeField(p) => {
                let v = n.rem_euclid(p as i64) as u64;
                Scalar::Fp { p, v }
            }
            ScalarDomain::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
            ScalarDomain::QuaternionRational => Scalar::quat_rat_coords([
                BigRational::from_integer(BigInt::from(n)),
                BigRational::zero(),
                BigRational::zero(),
                BigRational::zero(),
            ]),
            ScalarDomain::QuaternionFloat(tol) => Scalar::QuatF {
                v: [n as f64, 0.0, 0.0, 0.0],
                tol,
            },
        }
    }

    pub fn rational(num: i64, den: i64) -> Scalar {
        Scalar::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn quat_rat_coords(c: [BigRational; 4]) -> Scalar {
        Scalar::QuatRat(Box::new(c))
    }

    pub fn quat_rat_i64(a: i64, b: i64, c: i64, d: i64) -> Scalar {
        Scalar::quat_rat_coords([
            BigRational::from_integer(BigInt::from(a)),
            BigRational::from_integer(BigInt::from(b)),
            BigRational::from_integer(BigInt::from(c)),
            BigRational::from_integer(BigInt::from(d)),
        ])
    }

    pub fn quat_f64(a: f64, b: f64, c: f64, d: f64) -> Scalar {
        Scalar::QuatF {
            v: [a, b, c, d],
            tol: DEFAULT_TOLERANCE,
        }
    }

    pub fn quat_f64_tol(v: [f64; 4], tol: f64) -> Scalar {
        Scalar::QuatF { v, tol }
    }

    /// The i/j/k basis quaternions, index 1..=3.
    pub fn quat_unit(domain: ScalarDomain, axis: usize) -> Scalar {
        assert!((1..=3).contains(&axis));
        match domain {
            ScalarDomain::QuaternionRational => {
                let mut c = [
                    BigRational::zero(),
                    BigRational::zero(),
                    BigRational::zero(),
                    BigRational::zero(),
                ];
                c[axis] = BigRational::one();
                Scalar::quat_rat_coords(c)
            }
            ScalarDomain::QuaternionFloat(tol) => {
                let mut v = [0.0; 4];
                v[axis] = 1.0;
                Scalar::QuatF { v, tol }
            }
            _ => panic!("quat_unit on non-quaternion domain"),
        }
    }

    pub fn domain(&self) -> ScalarDomain {
        match self {
            Scalar::Fp { p, .. } => ScalarDomain::PrimeField(*p),
            Scalar::Rat(_) => ScalarDomain::Rational,
            Scalar::QuatRat(_) => ScalarDomain::QuaternionRational,
            Scalar::QuatF { tol, .. } => ScalarDomain::QuaternionFloat(*tol),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp { v, .. } => *v == 0,
            Scalar::Rat(r) => r.is_zero(),
            Scalar::QuatRat(c) => c.iter().all(|x| x.is_zero()),
            Scalar::QuatF { v, tol } => v.iter().all(|x| x.abs() <= *tol),
        }
    }

    pub fn is_one(&self) -> bool {
        (self - &Scalar::one(self.domain())).is_zero()
    }

    /// True iff the scalar lies in the center of its domain.
    pub fn is_central(&self) -> bool {
        match self {
            Scalar::Fp { .. } | Scalar::Rat(_) => true,
            Scalar::QuatRat(c) => c[1].is_zero() && c[2].is_zero() && c[3].is_zero(),
            Scalar::QuatF { v, tol } => v[1..].iter().all(|x| x.abs() <= *tol),
        }
    }

    /// Absolute-difference comparison; exact on exact domains.
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        (self - other).is_zero()
    }

    /// A crude magnitude used for float pivoting and residual scaling.
    pub fn magnitude(&self) -> f64 {
        match self {
            Scalar::Fp { v, .. } => {
                if *v == 0 {
                    0.0
                } else {
                    1.0
                }
            }
            Scalar::Rat(r) => rat_to_f64(r).abs(),
            Scalar::QuatRat(c) => c.iter().map(|x| rat_to_f64(x).abs()).sum(),
            Scalar::QuatF { v, .. } => v.iter().map(|x| x.abs()).sum(),
        }
    }

    pub fn inv(&self) -> Result<Scalar> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroInverse);
        }
        Ok(match self {
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: powmod(*v, *p - 2, *p),
            },
            Scalar::Rat(r) => Scalar::Rat(r.recip()),
            Scalar::QuatRat(c) => {
                let n = quat_rat_norm(c);
                let cj = quat_rat_conj(c);
                Scalar::QuatRat(Box::new(cj.map(|x| x / n.clone())))
            }
            Scalar::QuatF { v, tol } => {
                let n: f64 = v.iter().map(|x| x * x).sum();
                Scalar::QuatF {
                    v: [v[0] / n, -v[1] / n, -v[2] / n, -v[3] / n],
                    tol: *tol,
                }
            }
        })
    }

    /// Quaternion conjugate (identity on field domains).
    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::QuatRat(c) => Scalar::QuatRat(Box::new(quat_rat_conj(c))),
            Scalar::QuatF { v, tol } => Scalar::QuatF {
                v: [v[0], -v[1], -v[2], -v[3]],
                tol: *tol,
            },
            other => other.clone(),
        }
    }

    /// N(q) = a^2 + b^2 + c^2 + d^2, as a scalar of the base field
    /// (rational for `QuaternionRational`, real—represented as a real
    /// quaternion—for the float domain).
    pub fn quat_norm(&self) -> Result<Scalar> {
        match self {
            Scalar::QuatRat(c) => Ok(Scalar::Rat(quat_rat_norm(c))),
            Scalar::QuatF { v, tol } => Ok(Scalar::QuatF {
                v: [v.iter().map(|x| x * x).sum(), 0.0, 0.0, 0.0],
                tol: *tol,
            }),
            _ => Err(AlgebraError::DomainMismatch(
                "quat_norm requires a quaternion domain".into(),
            )),
        }
    }

    pub fn norm_f64(&self) -> f64 {
        match self {
            Scalar::QuatF { v, .. } => v.iter().map(|x| x * x).sum(),
            Scalar::QuatRat(c) => rat_to_f64(&quat_rat_norm(c)),
            Scalar::Rat(r) => {
                let f = rat_to_f64(r);
                f * f
            }
            Scalar::Fp { v, .. } => (*v * *v) as f64,
        }
    }

    pub fn coords_f64(&self) -> [f64; 4] {
        match self {
            Scalar::QuatF { v, .. } => *v,
            Scalar::QuatRat(c) => [
                rat_to_f64(&c[0]),
                rat_to_f64(&c[1]),
                rat_to_f64(&c[2]),
                rat_to_f64(&c[3]),
            ],
            Scalar::Rat(r) => [rat_to_f64(r), 0.0, 0.0, 0.0],
            Scalar::Fp { v, .. } => [*v as f64, 0.0, 0.0, 0.0],
        }
    }

    /// Rational quaternion coordinates; field scalars embed as the real part.
    pub fn coords_rat(&self) -> Result<[BigRational; 4]> {
        match self {
            Scalar::QuatRat(c) => Ok((**c).clone()),
            Scalar::Rat(r) => Ok([
                r.clone(),
                BigRational::zero(),
                BigRational::zero(),
                BigRational::zero(),
            ]),
            _ => Err(AlgebraError::DomainMismatch(
                "exact coordinates require a rational domain".into(),
            )),
        }
    }

    /// Real part as a scalar of the same quaternion domain.
    pub fn re_part(&self) -> Scalar {
        match self {
            Scalar::QuatRat(c) => Scalar::quat_rat_coords([
                c[0].clone(),
                BigRational::zero(),
                BigRational::zero(),
                BigRational::zero(),
            ]),
            Scalar::QuatF { v, tol } => Scalar::QuatF {
                v: [v[0], 0.0, 0.0, 0.0],
                tol: *tol,
            },
            other => other.clone(),
        }
    }

    pub fn im_part(&self) -> Scalar {
        self - &self.re_part()
    }

    pub fn is_pure(&self) -> bool {
        self.re_part().is_zero()
    }

    /// Embed a scalar into `target`; identity on the same domain, and
    /// rationals embed into both quaternion domains.
    pub fn embed(&self, target: ScalarDomain) -> Result<Scalar> {
        if self.domain() == target {
            return Ok(self.clone());
        }
        match (self, target) {
            (Scalar::Rat(r), ScalarDomain::QuaternionRational) => {
                Ok(Scalar::quat_rat_coords([
                    r.clone(),
                    BigRational::zero(),
                    BigRational::zero(),
                    BigRational::zero(),
                ]))
            }
            (Scalar::Rat(r), ScalarDomain::QuaternionFloat(tol)) => Ok(Scalar::QuatF {
                v: [rat_to_f64(r), 0.0, 0.0, 0.0],
                tol,
            }),
            (Scalar::QuatRat(c), ScalarDomain::QuaternionFloat(tol)) => Ok(Scalar::QuatF {
                v: [
                    rat_to_f64(&c[0]),
                    rat_to_f64(&c[1]),
                    rat_to_f64(&c[2]),
                    rat_to_f64(&c[3]),
                ],
                tol,
            }),
            _ => Err(AlgebraError::DomainMismatch(format!(
                "cannot embed {} into {}",
                self.domain(),
                target
            ))),
        }
    }

    fn same_domain(&self, other: &Scalar) {
        match (self, other) {
            (Scalar::Fp { p: a, .. }, Scalar::Fp { p: b, .. }) if a == b => {}
            (Scalar::Rat(_), Scalar::Rat(_)) => {}
            (Scalar::QuatRat(_), Scalar::QuatRat(_)) => {}
            (Scalar::QuatF { .. }, Scalar::QuatF { .. }) => {}
            _ => panic!(
                "scalar domain mismatch: {} vs {}",
                self.domain(),
                other.domain()
            ),
        }
    }
}

fn quat_rat_conj(c: &[BigRational; 4]) -> [BigRational; 4] {
    [c[0].clone(), -c[1].clone(), -c[2].clone(), -c[3].clone()]
}

fn quat_rat_norm(c: &[BigRational; 4]) -> BigRational {
    c.iter().map(|x| x * x).sum()
}

pub(crate) fn rat_to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    // Exact when the parts fit in i64 / f64; falls back to string conversion.
    if let (Some(n), Some(d)) = (to_i64(num), to_i64(den)) {
        return n as f64 / d as f64;
    }
    let n: f64 = num.to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = den.to_string().parse().unwrap_or(f64::NAN);
    n / d
}

fn to_i64(b: &BigInt) -> Option<i64> {
    use num_traits::ToPrimitive;
    b.to_i64()
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        self.same_domain(rhs);
        match (self, rhs) {
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                p: *p,
                v: (a + b) % p,
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::QuatRat(a), Scalar::QuatRat(b)) => Scalar::QuatRat(Box::new([
                &a[0] + &b[0],
                &a[1] + &b[1],
                &a[2] + &b[2],
                &a[3] + &b[3],
            ])),
            (Scalar::QuatF { v: a, tol }, Scalar::QuatF { v: b, .. }) => Scalar::QuatF {
                v: [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]],
                tol: *tol,
            },
            _ => unreachable!(),
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Fp { p, v } => Scalar::Fp {
                p: *p,
                v: if *v == 0 { 0 } else { p - v },
            },
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::QuatRat(a) => Scalar::QuatRat(Box::new([
                -a[0].clone(),
                -a[1].clone(),
                -a[2].clone(),
                -a[3].clone(),
            ])),
            Scalar::QuatF { v, tol } => Scalar::QuatF {
                v: [-v[0], -v[1], -v[2], -v[3]],
                tol: *tol,
            },
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        self.same_domain(rhs);
        match (self, rhs) {
            (Scalar::Fp { p, v: a }, Scalar::Fp { v: b, .. }) => Scalar::Fp {
                p: *p,
                v: mulmod(*a, *b, *p),
            },
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::QuatRat(a), Scalar::QuatRat(b)) => {
                // (a0 + a1 i + a2 j + a3 k)(b0 + b1 i + b2 j + b3 k)
                let c0 = &(&(&a[0] * &b[0]) - &(&a[1] * &b[1]))
                    - &(&(&a[2] * &b[2]) + &(&a[3] * &b[3]));
                let c1 = &(&(&a[0] * &b[1]) + &(&a[1] * &b[0]))
                    + &(&(&a[2] * &b[3]) - &(&a[3] * &b[2]));
                let c2 = &(&(&a[0] * &b[2]) - &(&a[1] * &b[3]))
                    + &(&(&a[2] * &b[0]) + &(&a[3] * &b[1]));
                let c3 = &(&(&a[0] * &b[3]) + &(&a[1] * &b[2]))
                    - &(&(&a[2] * &b[1]) - &(&a[3] * &b[0]));
                Scalar::QuatRat(Box::new([c0, c1, c2, c3]))
            }
            (Scalar::QuatF { v: a, tol }, Scalar::QuatF { v: b, .. }) => Scalar::QuatF {
                v: [
                    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                    a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                    a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                    a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
                ],
                tol: *tol,
            },
            _ => unreachable!(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Additive commutator ab - ba.
pub fn bracket(a: &Scalar, b: &Scalar) -> Scalar {
    &(a * b) - &(b * a)
}

// ---- pure-quaternion vector helpers -------------------------------------

/// Inner product of the four coordinates, in the base field (exact domains).
fn dot_rat(a: &[BigRational; 4], b: &[BigRational; 4]) -> BigRational {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Cross product of the imaginary parts, as a pure quaternion.
pub fn cross(a: &Scalar, b: &Scalar) -> Scalar {
    match (a, b) {
        (Scalar::QuatRat(x), Scalar::QuatRat(y)) => Scalar::quat_rat_coords([
            BigRational::zero(),
            &(&x[2] * &y[3]) - &(&x[3] * &y[2]),
            &(&x[3] * &y[1]) - &(&x[1] * &y[3]),
            &(&x[1] * &y[2]) - &(&x[2] * &y[1]),
        ]),
        (Scalar::QuatF { v: x, tol }, Scalar::QuatF { v: y, .. }) => Scalar::QuatF {
            v: [
                0.0,
                x[2] * y[3] - x[3] * y[2],
                x[3] * y[1] - x[1] * y[3],
                x[1] * y[2] - x[2] * y[1],
            ],
            tol: *tol,
        },
        _ => panic!("cross product requires quaternions of one domain"),
    }
}

/// Euclidean inner product of two quaternions of the same domain.
pub fn inner(a: &Scalar, b: &Scalar) -> Scalar {
    match (a, b) {
        (Scalar::QuatRat(x), Scalar::QuatRat(y)) => Scalar::Rat(dot_rat(x, y)),
        (Scalar::QuatF { v: x, tol }, Scalar::QuatF { v: y, .. }) => Scalar::QuatF {
            v: [x.iter().zip(y.iter()).map(|(a, b)| a * b).sum(), 0.0, 0.0, 0.0],
            tol: *tol,
        },
        _ => panic!("inner product requires quaternions of one domain"),
    }
}

/// A deterministic nonzero pure quaternion orthogonal to Im(v): the first of
/// i, j, k with the projection along Im(v) removed that survives. When
/// Im(v) = 0 this is i itself.
pub fn pure_orthogonal_to(v: &Scalar) -> Scalar {
    let domain = v.domain();
    assert!(domain.is_quaternion());
    let im = v.im_part();
    if im.is_zero() {
        return Scalar::quat_unit(domain, 1);
    }
    let n = im.quat_norm().expect("quaternion domain");
    let n = n.embed(domain).expect("base field embeds");
    let n_inv = n.inv().expect("Im(v) != 0");
    for axis in 1..=3 {
        let e = Scalar::quat_unit(domain, axis);
        let proj = inner(&e, &im).embed(domain).expect("embed");
        // e with its component along Im(v) removed
        let cand = &e - &(&im * &(&proj * &n_inv));
        if !cand.is_zero() {
            return cand;
        }
    }
    unreachable!("Im(v) != 0 leaves at least two independent axes")
}

fn normalize_f64(q: &Scalar) -> Scalar {
    match q {
        Scalar::QuatF { v, tol } => {
            let n = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
            Scalar::QuatF {
                v: [v[0] / n, v[1] / n, v[2] / n, v[3] / n],
                tol: *tol,
            }
        }
        _ => panic!("normalize_f64 requires the float domain"),
    }
}

// ---- spec-level scalar operations ----------------------------------------

/// Splits q with ||q|| <= 2 as a difference u - v of two unit-norm
/// quaternions: v = -(||q||/2) e + sqrt(1 - ||q||^2/4) w with e = q/||q||
/// and w a unit quaternion orthogonal to e; u = v + q.
pub fn quat_diff_unit_norms(q: &Scalar) -> Result<(Scalar, Scalar)> {
    let (v, tol) = match q {
        Scalar::QuatF { v, tol } => (*v, *tol),
        _ => {
            return Err(AlgebraError::DomainMismatch(
                "quat_diff_unit_norms runs in the float quaternion domain".into(),
            ))
        }
    };
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 2.0 + tol {
        return Err(AlgebraError::NormTooLarge { norm });
    }
    if norm <= tol {
        let one = Scalar::quat_f64_tol([1.0, 0.0, 0.0, 0.0], tol);
        return Ok((one.clone(), one));
    }
    let e = [v[0] / norm, v[1] / norm, v[2] / norm, v[3] / norm];
    // first basis quaternion with the e-component projected off
    let mut w = [0.0; 4];
    for axis in 0..4 {
        let mut cand = [0.0; 4];
        cand[axis] = 1.0;
        for t in 0..4 {
            cand[t] -= e[axis] * e[t];
        }
        let len = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-6 {
            w = cand.map(|x| x / len);
            break;
        }
    }
    let half = norm / 2.0;
    let lift = (1.0 - half * half).max(0.0).sqrt();
    let vq = Scalar::quat_f64_tol(
        [
            -half * e[0] + lift * w[0],
            -half * e[1] + lift * w[1],
            -half * e[2] + lift * w[2],
            -half * e[3] + lift * w[3],
        ],
        tol,
    );
    let u = &vq + q;
    Ok((u, vq))
}

/// Angle/axis split of a unit quaternion: theta in [0, pi] and the unit
/// imaginary axis (None when the imaginary part vanishes).
fn unit_angle_axis(u: &Scalar) -> Result<(f64, Option<[f64; 4]>, f64)> {
    let (v, tol) = match u {
        Scalar::QuatF { v, tol } => (*v, *tol),
        _ => {
            return Err(AlgebraError::DomainMismatch(
                "unit quaternion constructions run in the float domain".into(),
            ))
        }
    };
    let norm = v.iter().map(|x| x * x).sum::<f64>();
    if (norm - 1.0).abs() > 16.0 * tol.max(1e-12) {
        return Err(AlgebraError::NotUnitNorm { norm });
    }
    let imlen = (v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
    let theta = imlen.atan2(v[0]).clamp(0.0, std::f64::consts::PI);
    if imlen <= tol {
        Ok((theta, None, tol))
    } else {
        Ok((
            theta,
            Some([0.0, v[1] / imlen, v[2] / imlen, v[3] / imlen]),
            tol,
        ))
    }
}

/// Writes a unit quaternion u as a single multiplicative commutator
/// a b a^{-1} b^{-1} = u with a^2 = b^2 = -1.
///
/// With u = cos(theta) + sin(theta) n, pick a right-handed orthonormal pure
/// triple (p, r, n), set phi = pi - theta/2, and take a = p,
/// b = cos(phi) p + sin(phi) r; then (ab)^2 = u.
pub fn unit_quaternion_commutator(u: &Scalar) -> Result<(Scalar, Scalar)> {
    let (theta, axis, tol) = unit_angle_axis(u)?;
    let i = Scalar::quat_f64_tol([0.0, 1.0, 0.0, 0.0], tol);
    let j = Scalar::quat_f64_tol([0.0, 0.0, 1.0, 0.0], tol);
    match axis {
        None => {
            if theta < std::f64::consts::FRAC_PI_2 {
                // u = 1
                Ok((i.clone(), -&i))
            } else {
                // u = -1 = i j i^{-1} j^{-1}
                Ok((i, j))
            }
        }
        Some(n) => {
            let nq = Scalar::quat_f64_tol(n, tol);
            let p = {
                // first basis axis not parallel to n
                let mut best = cross(&i, &nq);
                if best.norm_f64().sqrt() <= 1e-6 {
                    best = cross(&j, &nq);
                }
                normalize_f64(&best)
            };
            let r = cross(&nq, &p);
            let phi = std::f64::consts::PI - theta / 2.0;
            let b = &(&p * &Scalar::quat_f64_tol([phi.cos(), 0.0, 0.0, 0.0], tol))
                + &(&r * &Scalar::quat_f64_tol([phi.sin(), 0.0, 0.0, 0.0], tol));
            Ok((p, b))
        }
    }
}

/// Square root of a unit quaternion: k = cos(theta/2) + sin(theta/2) n;
/// u = -1 returns i.
pub fn quat_sqrt(u: &Scalar) -> Result<Scalar> {
    let (theta, axis, tol) = unit_angle_axis(u)?;
    match axis {
        None => {
            if theta < std::f64::consts::FRAC_PI_2 {
                Ok(Scalar::quat_f64_tol([1.0, 0.0, 0.0, 0.0], tol))
            } else {
                Ok(Scalar::quat_f64_tol([0.0, 1.0, 0.0, 0.0], tol))
            }
        }
        Some(n) => {
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            Ok(Scalar::quat_f64_tol(
                [c, s * n[1], s * n[2], s * n[3]],
                tol,
            ))
        }
    }
}

/// Writes a nonzero pure quaternion v as an additive commutator [a, b] = v
/// with a, b pure: a is a deterministic pure vector orthogonal to v and
/// b = (v x a) / (2 N(a)).
pub fn pure_as_commutator(v: &Scalar) -> Result<(Scalar, Scalar)> {
    if !v.domain().is_quaternion() {
        return Err(AlgebraError::DomainMismatch(
            "pure_as_commutator requires a quaternion domain".into(),
        ));
    }
    if !v.is_pure() {
        return Err(AlgebraError::NotPure);
    }
    if v.is_zero() {
        return Err(AlgebraError::ZeroInput);
    }
    let a = {
        let raw = pure_orthogonal_to(v);
        match &raw {
            Scalar::QuatF { .. } => normalize_f64(&raw),
            _ => raw,
        }
    };
    let na = a.quat_norm()?.embed(v.domain())?;
    let two_na = &na + &na;
    let b = &cross(v, &a) * &two_na.inv()?;
    Ok((a, b))
}

/// Writes a nonzero quaternion h as a product of two noncentral additive
/// commutators: h = [a1,b1] [a2,b2] with both bracket values pure and
/// nonzero. The first bracket is a pure p orthogonal to Im(h), the second is
/// q = p^{-1} h.
pub fn quaternion_scalar_oracle(h: &Scalar) -> Result<(Scalar, Scalar, Scalar, Scalar)> {
    if !h.domain().is_quaternion() {
        return Err(AlgebraError::DomainMismatch(
            "quaternion_scalar_oracle requires a quaternion domain".into(),
        ));
    }
    if h.is_zero() {
        return Err(AlgebraError::ZeroInput);
    }
    let p = {
        let raw = pure_orthogonal_to(h);
        match &raw {
            Scalar::QuatF { .. } => normalize_f64(&raw),
            _ => raw,
        }
    };
    let q = &p.inv()? * h;
    debug_assert!(q.is_pure());
    let (a1, b1) = pure_as_commutator(&p)?;
    let (a2, b2) = pure_as_commutator(&q)?;
    Ok((a1, b1, a2, b2))
}

/// Nonzero field elements x_1..x_n with zero sum: all ones when |F| = 2 and
/// n is even; otherwise x_1 = .. = x_{n-2} = 1, x_{n-1} = a with
/// a not in {0, -(n-2)}, and x_n = -((n-2) + a).
pub fn zero_sum_units(domain: ScalarDomain, n: usize) -> Result<Vec<Scalar>> {
    if !domain.is_field() {
        return Err(AlgebraError::DomainMismatch(
            "zero_sum_units requires a field domain".into(),
        ));
    }
    if n < 2 {
        return Err(AlgebraError::HypothesisViolated("n must exceed 1".into()));
    }
    if domain == ScalarDomain::PrimeField(2) {
        if n % 2 == 1 {
            return Err(AlgebraError::InfeasibleCase);
        }
        return Ok(vec![Scalar::one(domain); n]);
    }
    let m = Scalar::from_i64(domain, (n as i64) - 2);
    let mut a = Scalar::one(domain);
    if (&a + &m).is_zero() {
        a = Scalar::from_i64(domain, 2);
    }
    let last = -&(&m + &a);
    debug_assert!(!a.is_zero() && !last.is_zero());
    let mut out = vec![Scalar::one(domain); n.saturating_sub(2)];
    out.push(a);
    out.push(last);
    Ok(out)
}

/// All p elements of a prime field, 0 first and 1 second.
pub fn enumerate_field(domain: ScalarDomain) -> Result<Vec<Scalar>> {
    match domain {
        ScalarDomain::PrimeField(p) => Ok((0..p)
            .map(|v| Scalar::from_i64(domain, v as i64))
            .collect()),
        _ => Err(AlgebraError::InfiniteDomain),
    }
}

// ---- parsing and printing -------------------------------------------------

fn parse_rat(text: &str, offset: usize) -> Result<BigRational> {
    let text = text.trim();
    let err = |m: &str| AlgebraError::SyntaxError {
        offset,
        message: m.to_string(),
    };
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = text.parse().map_err(|_| err("bad integer"))?;
        Ok(BigRational::from_integer(n))
    }
}

/// Splits "a+bi-cj+dk" into signed terms at top level.
fn quat_terms(text: &str) -> Vec<(usize, String)> {
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut start = 0usize;
    for (idx, ch) in text.char_indices() {
        if (ch == '+' || ch == '-') && !cur.trim().is_empty() && !cur.trim().ends_with('e') {
            terms.push((start, cur.clone()));
            cur = String::new();
            start = idx;
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        terms.push((start, cur));
    }
    terms
}

impl Scalar {
    /// Parses the CLI scalar syntax: integers for prime fields, "a/b" for
    /// rationals, "a+bi+cj+dk" (terms optional) for quaternions.
    pub fn parse(text: &str, domain: ScalarDomain) -> Result<Scalar> {
        let text = text.trim();
        match domain {
            ScalarDomain::PrimeField(p) => {
                let n: i64 = text.parse().map_err(|_| AlgebraError::SyntaxError {
                    offset: 0,
                    message: format!("expected an integer, got {text:?}"),
                })?;
                Ok(Scalar::from_i64(ScalarDomain::PrimeField(p), n))
            }
            ScalarDomain::Rational => Ok(Scalar::Rat(parse_rat(text, 0)?)),
            ScalarDomain::QuaternionRational | ScalarDomain::QuaternionFloat(_) => {
                let mut coords = [
                    BigRational::zero(),
                    BigRational::zero(),
                    BigRational::zero(),
                    BigRational::zero(),
                ];
                let mut fcoords = [0.0f64; 4];
                let float = !domain.is_exact();
                for (off, term) in quat_terms(text) {
                    let t = term.trim();
                    let (axis, body) = match t.chars().last() {
                        Some('i') => (1, &t[..t.len() - 1]),
                        Some('j') => (2, &t[..t.len() - 1]),
                        Some('k') => (3, &t[..t.len() - 1]),
                        _ => (0, t),
                    };
                    let body = body.trim();
                    let body = match body {
                        "" | "+" => "1".to_string(),
                        "-" => "-1".to_string(),
                        other => other.trim_start_matches('+').to_string(),
                    };
                    if float {
                        let val: f64 = body.trim().parse().or_else(|_| {
                            parse_rat(&body, off).map(|r| rat_to_f64(&r))
                        })?;
                        fcoords[axis] += val;
                    } else {
                        coords[axis] = &coords[axis] + &parse_rat(&body, off)?;
                    }
                }
                if float {
                    Ok(Scalar::quat_f64_tol(fcoords, domain.tolerance()))
                } else {
                    Ok(Scalar::quat_rat_coords(coords))
                }
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Fp { v, .. } => write!(f, "{v}"),
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::QuatRat(c) => {
                let parts: Vec<String> = c
                    .iter()
                    .zip(["", "i", "j", "k"])
                    .filter(|(x, _)| !x.is_zero())
                    .map(|(x, unit)| {
                        if unit.is_empty() {
                            format!("{x}")
                        } else if x.is_one() {
                            unit.to_string()
                        } else if (-x).is_one() {
                            format!("-{unit}")
                        } else {
                            format!("{x}{unit}")
                        }
                    })
                    .collect();
                if parts.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", join_signed(&parts))
                }
            }
            Scalar::QuatF { v, .. } => {
                let parts: Vec<String> = v
                    .iter()
                    .zip(["", "i", "j", "k"])
                    .filter(|(x, _)| **x != 0.0)
                    .map(|(x, unit)| format!("{x}{unit}"))
                    .collect();
                if parts.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", join_signed(&parts))
                }
            }
        }
    }
}

fn join_signed(parts: &[String]) -> String {
    let mut out = String::new();
    for (idx, p) in parts.iter().enumerate() {
        if idx > 0 && !p.starts_with('-') {
            out.push('+');
        }
        out.push_str(p);
    }
    out
}
