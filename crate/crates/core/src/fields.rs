//! Exact arithmetic over the supported ground fields.
//!
//! A [`Field`] value is the operation context: elements are plain data and
//! every arithmetic call goes through the field, which validates that the
//! operands structurally belong to it and charges the supplied
//! [`CostLedger`].  Scalar-vs-nonscalar classification is the caller's
//! responsibility (the algorithm knows which operands are constants); the
//! field layer only records.
//!
//! Supported fields: prime fields F_p (least nonnegative residues),
//! extension fields F_{p^m} (coefficient vectors reduced by a fixed monic
//! irreducible), and the rationals (arbitrary precision, eagerly reduced,
//! positive denominators).  Each binary operation has unit cost regardless
//! of operand size.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::ledger::CostLedger;
use crate::meta;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomial is not irreducible over F_{p}")]
    NotIrreducible { p: u64 },
    #[error("no irreducible polynomial found (degree {m} over F_{p})")]
    NoIrreducible { p: u64, m: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("extension degree must be at least 1")]
    BadDegree,
    #[error("element has the wrong shape for this field")]
    MismatchedField,
    #[error("operation requires a finite field")]
    NotFinite,
}

/// Descriptor of a ground field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Prime {
        p: u64,
    },
    Extension {
        p: u64,
        m: u32,
        /// Monic irreducible modulus, little-endian, length m+1.
        modulus: Vec<u64>,
    },
    Rationals,
}

struct FieldInner {
    kind: FieldKind,
    /// Smallest principal root per order, lazily discovered.
    root_cache: Mutex<HashMap<u64, Option<FieldElement>>>,
    zero_cache: OnceLock<FieldElement>,
    one_cache: OnceLock<FieldElement>,
}

/// A ground field.  Cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Field {
    inner: Arc<FieldInner>,
}

/// An element of some [`Field`].  Representations are canonical, so two
/// elements of the same field are equal iff their representations are.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FieldElement {
    Prime(u64),
    /// Coefficient vector of length m, little-endian, entries in [0, p).
    /// Shared so clones stay cheap.
    Ext(Arc<[u64]>),
    /// Fully reduced, denominator positive.  Shared so that the engines'
    /// pervasive element moves stay cheap.
    Rat(Arc<BigRational>),
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.inner.kind == other.inner.kind
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self)
    }
}

impl fmt::Display for Field {
    /// The CLI field-spec syntax: `fp:<p>`, `fq:<p>^<m>`, `q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.kind {
            FieldKind::Prime { p } => write!(f, "fp:{}", p),
            FieldKind::Extension { p, m, .. } => write!(f, "fq:{}^{}", p, m),
            FieldKind::Rationals => write!(f, "q"),
        }
    }
}

impl Field {
    fn from_kind(kind: FieldKind) -> Self {
        Field {
            inner: Arc::new(FieldInner {
                kind,
                root_cache: Mutex::new(HashMap::new()),
                zero_cache: OnceLock::new(),
                one_cache: OnceLock::new(),
            }),
        }
    }

    /// F_p; `p` is checked for primality by trial division.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        if !meta::is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self::from_kind(FieldKind::Prime { p }))
    }

    /// F_{p^m} with the lexicographically least monic irreducible modulus.
    pub fn extension(p: u64, m: u32) -> Result<Self, FieldError> {
        if !meta::is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if m == 0 {
            return Err(FieldError::BadDegree);
        }
        if m == 1 {
            return Self::prime(p);
        }
        let modulus = least_irreducible(p, m).ok_or(FieldError::NoIrreducible { p, m })?;
        Ok(Self::from_kind(FieldKind::Extension { p, m, modulus }))
    }

    /// F_{p^m} with an explicit monic modulus (little-endian, length m+1),
    /// checked for irreducibility.
    pub fn extension_with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self, FieldError> {
        if !meta::is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if modulus.len() < 3 || *modulus.last().unwrap() != 1 {
            return Err(FieldError::BadDegree);
        }
        if !is_irreducible(&modulus, p) {
            return Err(FieldError::NotIrreducible { p });
        }
        let m = (modulus.len() - 1) as u32;
        Ok(Self::from_kind(FieldKind::Extension { p, m, modulus }))
    }

    pub fn rationals() -> Self {
        Self::from_kind(FieldKind::Rationals)
    }

    pub fn kind(&self) -> &FieldKind {
        &self.inner.kind
    }

    /// p for finite fields, 0 for the rationals.
    pub fn characteristic(&self) -> u64 {
        match &self.inner.kind {
            FieldKind::Prime { p } => *p,
            FieldKind::Extension { p, .. } => *p,
            FieldKind::Rationals => 0,
        }
    }

    /// Number of elements for finite fields.
    pub fn order(&self) -> Option<u64> {
        match &self.inner.kind {
            FieldKind::Prime { p } => Some(*p),
            FieldKind::Extension { p, m, .. } => {
                let mut q: u64 = 1;
                for _ in 0..*m {
                    q = q.checked_mul(*p)?;
                }
                Some(q)
            }
            FieldKind::Rationals => None,
        }
    }

    pub fn extension_degree(&self) -> u32 {
        match &self.inner.kind {
            FieldKind::Extension { m, .. } => *m,
            _ => 1,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.inner
            .zero_cache
            .get_or_init(|| match &self.inner.kind {
                FieldKind::Prime { .. } => FieldElement::Prime(0),
                FieldKind::Extension { m, .. } => FieldElement::Ext(vec![0; *m as usize].into()),
                FieldKind::Rationals => FieldElement::Rat(rat_zero()),
            })
            .clone()
    }

    pub fn one(&self) -> FieldElement {
        self.inner
            .one_cache
            .get_or_init(|| match &self.inner.kind {
                FieldKind::Prime { .. } => FieldElement::Prime(1),
                FieldKind::Extension { m, .. } => {
                    let mut v = vec![0; *m as usize];
                    v[0] = 1;
                    FieldElement::Ext(v.into())
                }
                FieldKind::Rationals => FieldElement::Rat(rat_one()),
            })
            .clone()
    }

    /// Embed an integer; negatives are normalized on entry.
    pub fn from_i64(&self, v: i64) -> FieldElement {
        match &self.inner.kind {
            FieldKind::Prime { p } => FieldElement::Prime(v.rem_euclid(*p as i64) as u64),
            FieldKind::Extension { p, m, .. } => {
                let mut coeffs = vec![0; *m as usize];
                coeffs[0] = v.rem_euclid(*p as i64) as u64;
                FieldElement::Ext(coeffs.into())
            }
            FieldKind::Rationals => FieldElement::Rat(wrap_rat(BigRational::from_integer(BigInt::from(v)))),
        }
    }

    pub fn from_u64(&self, v: u64) -> FieldElement {
        match &self.inner.kind {
            FieldKind::Prime { p } => FieldElement::Prime(v % *p),
            FieldKind::Extension { p, m, .. } => {
                let mut coeffs = vec![0; *m as usize];
                coeffs[0] = v % *p;
                FieldElement::Ext(coeffs.into())
            }
            FieldKind::Rationals => FieldElement::Rat(wrap_rat(BigRational::from_integer(BigInt::from(v)))),
        }
    }

    /// A rational `num/den` (rationals only).
    pub fn rational(&self, num: i64, den: i64) -> Result<FieldElement, FieldError> {
        match &self.inner.kind {
            FieldKind::Rationals => {
                if den == 0 {
                    return Err(FieldError::ZeroDenominator);
                }
                Ok(FieldElement::Rat(wrap_rat(BigRational::new(
                    BigInt::from(num),
                    BigInt::from(den),
                ))))
            }
            _ => Err(FieldError::MismatchedField),
        }
    }

    /// An extension-field element from a coefficient vector (little-endian,
    /// length ≤ m, entries reduced mod p).
    pub fn ext_element(&self, coeffs: &[u64]) -> Result<FieldElement, FieldError> {
        match &self.inner.kind {
            FieldKind::Extension { p, m, .. } => {
                if coeffs.len() > *m as usize {
                    return Err(FieldError::MismatchedField);
                }
                let mut v: Vec<u64> = coeffs.iter().map(|c| c % p).collect();
                v.resize(*m as usize, 0);
                Ok(FieldElement::Ext(v.into()))
            }
            _ => Err(FieldError::MismatchedField),
        }
    }

    /// Structural membership check.
    pub fn contains(&self, x: &FieldElement) -> bool {
        match (&self.inner.kind, x) {
            (FieldKind::Prime { p }, FieldElement::Prime(v)) => v < p,
            (FieldKind::Extension { p, m, .. }, FieldElement::Ext(coeffs)) => {
                coeffs.len() == *m as usize && coeffs.iter().all(|c| c < p)
            }
            (FieldKind::Rationals, FieldElement::Rat(_)) => true,
            _ => false,
        }
    }

    fn check(&self, x: &FieldElement) {
        assert!(
            self.contains(x),
            "element {:?} does not belong to field {}",
            x,
            self
        );
    }

    pub fn is_zero(&self, x: &FieldElement) -> bool {
        *x == self.zero()
    }

    // ----- charged operations -------------------------------------------

    /// Exact sum; one additive operation.
    pub fn add(&self, x: &FieldElement, y: &FieldElement, ledger: &mut CostLedger) -> FieldElement {
        ledger.charge_additive();
        self.add_raw(x, y)
    }

    /// Exact difference; one additive operation.
    pub fn sub(&self, x: &FieldElement, y: &FieldElement, ledger: &mut CostLedger) -> FieldElement {
        ledger.charge_additive();
        self.sub_raw(x, y)
    }

    /// Sign change; one additive operation (see the report for the other
    /// convention).
    pub fn neg(&self, x: &FieldElement, ledger: &mut CostLedger) -> FieldElement {
        ledger.charge_negation();
        self.neg_raw(x)
    }

    /// Exact product.  `scalar` is true when at least one operand is an
    /// algorithm constant (root-of-unity power, 1/n, ...): the product then
    /// counts toward L^a instead of L^m.
    pub fn mul(
        &self,
        x: &FieldElement,
        y: &FieldElement,
        ledger: &mut CostLedger,
        scalar: bool,
    ) -> FieldElement {
        if scalar {
            ledger.charge_scalar_mul();
        } else {
            ledger.charge_nonscalar();
        }
        self.mul_raw(x, y)
    }

    // ----- unmetered operations (constants, oracles, setup) --------------

    pub fn add_raw(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        self.check(x);
        self.check(y);
        match (&self.inner.kind, x, y) {
            (FieldKind::Prime { p }, FieldElement::Prime(a), FieldElement::Prime(b)) => {
                FieldElement::Prime(((*a as u128 + *b as u128) % *p as u128) as u64)
            }
            (FieldKind::Extension { p, .. }, FieldElement::Ext(a), FieldElement::Ext(b)) => {
                FieldElement::Ext(
                    a.iter()
                        .zip(b.iter())
                        .map(|(u, v)| ((*u as u128 + *v as u128) % *p as u128) as u64)
                        .collect::<Vec<u64>>()
                        .into(),
                )
            }
            (FieldKind::Rationals, FieldElement::Rat(a), FieldElement::Rat(b)) => {
                FieldElement::Rat(wrap_rat(rat_add(a, b)))
            }
            _ => unreachable!(),
        }
    }

    pub fn sub_raw(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        self.check(x);
        self.check(y);
        match (&self.inner.kind, x, y) {
            (FieldKind::Prime { p }, FieldElement::Prime(a), FieldElement::Prime(b)) => {
                FieldElement::Prime(((*a as u128 + (*p - *b) as u128) % *p as u128) as u64)
            }
            (FieldKind::Extension { p, .. }, FieldElement::Ext(a), FieldElement::Ext(b)) => {
                FieldElement::Ext(
                    a.iter()
                        .zip(b.iter())
                        .map(|(u, v)| ((*u as u128 + (*p - *v) as u128) % *p as u128) as u64)
                        .collect::<Vec<u64>>()
                        .into(),
                )
            }
            (FieldKind::Rationals, FieldElement::Rat(a), FieldElement::Rat(b)) => {
                FieldElement::Rat(wrap_rat(rat_sub(a, b)))
            }
            _ => unreachable!(),
        }
    }

    pub fn neg_raw(&self, x: &FieldElement) -> FieldElement {
        self.check(x);
        match (&self.inner.kind, x) {
            (FieldKind::Prime { p }, FieldElement::Prime(a)) => {
                FieldElement::Prime(if *a == 0 { 0 } else { p - a })
            }
            (FieldKind::Extension { p, .. }, FieldElement::Ext(a)) => FieldElement::Ext(
                a.iter()
                    .map(|&v| if v == 0 { 0 } else { p - v })
                    .collect::<Vec<u64>>()
                    .into(),
            ),
            (FieldKind::Rationals, FieldElement::Rat(a)) => {
                FieldElement::Rat(wrap_rat(BigRational::new_raw(
                    -a.numer().clone(),
                    a.denom().clone(),
                )))
            }
            _ => unreachable!(),
        }
    }

    pub fn mul_raw(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        self.check(x);
        self.check(y);
        match (&self.inner.kind, x, y) {
            (FieldKind::Prime { p }, FieldElement::Prime(a), FieldElement::Prime(b)) => {
                FieldElement::Prime((*a as u128 * *b as u128 % *p as u128) as u64)
            }
            (FieldKind::Extension { p, modulus, .. }, FieldElement::Ext(a), FieldElement::Ext(b)) => {
                FieldElement::Ext(poly_mul_mod(a, b, modulus, *p).into())
            }
            (FieldKind::Rationals, FieldElement::Rat(a), FieldElement::Rat(b)) => {
                FieldElement::Rat(wrap_rat(rat_mul(a, b)))
            }
            _ => unreachable!(),
        }
    }

    /// Multiplicative inverse.  Not charged to any ledger: inverses are
    /// algorithm constants, precomputed outside the straight-line program.
    pub fn inv(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(x);
        if self.is_zero(x) {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match (&self.inner.kind, x) {
            (FieldKind::Prime { p }, FieldElement::Prime(a)) => {
                FieldElement::Prime(mod_inverse(*a, *p))
            }
            (FieldKind::Extension { p, modulus, .. }, FieldElement::Ext(a)) => {
                FieldElement::Ext(poly_mod_inverse(a, modulus, *p).into())
            }
            (FieldKind::Rationals, FieldElement::Rat(a)) => {
                let inv = if a.numer().is_negative() {
                    BigRational::new_raw(-a.denom().clone(), -a.numer().clone())
                } else {
                    BigRational::new_raw(a.denom().clone(), a.numer().clone())
                };
                FieldElement::Rat(wrap_rat(inv))
            }
            _ => unreachable!(),
        })
    }

    /// x^e by repeated squaring, unmetered.
    pub fn pow_u64(&self, x: &FieldElement, mut e: u64) -> FieldElement {
        let mut base = x.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_raw(&base, &base);
            }
        }
        acc
    }

    /// Multiplicative order of x, for finite fields.  `None` for zero.
    pub fn multiplicative_order(&self, x: &FieldElement) -> Option<u64> {
        let q = self.order()?;
        if self.is_zero(x) {
            return None;
        }
        let group = q - 1;
        let mut ord = group;
        for (prime, _) in meta::factorize(group) {
            while ord % prime == 0 && self.pow_u64(x, ord / prime) == self.one() {
                ord /= prime;
            }
        }
        Some(ord)
    }

    /// The smallest element of multiplicative order exactly `n`, or `None`
    /// if the field has none (in a field, principal = primitive).  Requires
    /// char ∤ n.  Results are cached per order.
    pub fn find_principal_root(&self, n: u64) -> Option<FieldElement> {
        assert!(n >= 1);
        let ch = self.characteristic();
        if ch != 0 && n % ch == 0 {
            return None;
        }
        if n == 1 {
            return Some(self.one());
        }
        match &self.inner.kind {
            FieldKind::Rationals => {
                if n == 2 {
                    Some(self.from_i64(-1))
                } else {
                    None
                }
            }
            _ => {
                let q = self.order().expect("finite field");
                if (q - 1) % n != 0 {
                    return None;
                }
                if let Some(hit) = self.inner.root_cache.lock().unwrap().get(&n) {
                    return hit.clone();
                }
                let found = self.search_root(n);
                self.inner
                    .root_cache
                    .lock()
                    .unwrap()
                    .insert(n, found.clone());
                found
            }
        }
    }

    fn search_root(&self, n: u64) -> Option<FieldElement> {
        let prime_divisors: Vec<u64> = meta::factorize(n).into_iter().map(|(p, _)| p).collect();
        for x in self.iter_elements().skip(1) {
            if self.pow_u64(&x, n) != self.one() {
                continue;
            }
            if prime_divisors
                .iter()
                .all(|&d| self.pow_u64(&x, n / d) != self.one())
            {
                return Some(x);
            }
        }
        None
    }

    /// All elements of a finite field, in canonical order (residues
    /// ascending; extension coefficient vectors as base-p numbers).
    pub fn iter_elements(&self) -> Box<dyn Iterator<Item = FieldElement> + '_> {
        match &self.inner.kind {
            FieldKind::Prime { p } => Box::new((0..*p).map(FieldElement::Prime)),
            FieldKind::Extension { p, m, .. } => {
                let p = *p;
                let m = *m as usize;
                let q = self.order().expect("desk-scale field");
                Box::new((0..q).map(move |idx| {
                    let mut v = Vec::with_capacity(m);
                    let mut k = idx;
                    for _ in 0..m {
                        v.push(k % p);
                        k /= p;
                    }
                    FieldElement::Ext(v.into())
                }))
            }
            FieldKind::Rationals => panic!("cannot enumerate the rationals"),
        }
    }

    /// A uniformly random element (rationals: numerator and denominator
    /// uniform in [-99, 99], denominator nonzero).
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        match &self.inner.kind {
            FieldKind::Prime { p } => FieldElement::Prime(rng.gen_range(0..*p)),
            FieldKind::Extension { p, m, .. } => {
                FieldElement::Ext((0..*m).map(|_| rng.gen_range(0..*p)).collect::<Vec<u64>>().into())
            }
            FieldKind::Rationals => {
                let num = rng.gen_range(-99i64..=99);
                let den = loop {
                    let d = rng.gen_range(-99i64..=99);
                    if d != 0 {
                        break d;
                    }
                };
                FieldElement::Rat(wrap_rat(BigRational::new(BigInt::from(num), BigInt::from(den))))
            }
        }
    }

    pub fn format_element(&self, x: &FieldElement) -> String {
        match x {
            FieldElement::Prime(v) => v.to_string(),
            FieldElement::Ext(coeffs) => {
                let terms: Vec<String> = coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0)
                    .map(|(i, c)| match i {
                        0 => c.to_string(),
                        1 if *c == 1 => "y".to_string(),
                        1 => format!("{}y", c),
                        _ if *c == 1 => format!("y^{}", i),
                        _ => format!("{}y^{}", c, i),
                    })
                    .collect();
                if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join("+")
                }
            }
            FieldElement::Rat(r) => {
                if r.denom().is_one() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

// ----- rational arithmetic ----------------------------------------------
//
// Eagerly reduced fractions with positive denominators.  The operations
// keep every gcd on operand-sized integers (never on products), which is
// what makes the exact-arithmetic engines affordable at depth.

static RAT_ZERO: OnceLock<Arc<BigRational>> = OnceLock::new();
static RAT_ONE: OnceLock<Arc<BigRational>> = OnceLock::new();

fn rat_zero() -> Arc<BigRational> {
    RAT_ZERO
        .get_or_init(|| Arc::new(BigRational::zero()))
        .clone()
}

fn rat_one() -> Arc<BigRational> {
    RAT_ONE.get_or_init(|| Arc::new(BigRational::one())).clone()
}

fn wrap_rat(r: BigRational) -> Arc<BigRational> {
    if r.is_zero() {
        rat_zero()
    } else if r.is_one() {
        rat_one()
    } else {
        Arc::new(r)
    }
}

/// Reduced sum of reduced inputs: with g = gcd(d1, d2) and
/// t = n1·(d2/g) + n2·(d1/g), the result is (t/g2) / ((d1/g)·(d2/g2)) for
/// g2 = gcd(t, g).
fn rat_add(a: &BigRational, b: &BigRational) -> BigRational {
    rat_add_signed(a, b, false)
}

fn rat_sub(a: &BigRational, b: &BigRational) -> BigRational {
    rat_add_signed(a, b, true)
}

fn small_parts(r: &BigRational) -> Option<(i128, i128)> {
    Some((r.numer().to_i64()? as i128, r.denom().to_i64()? as i128))
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn big_from_i128(n: i128, d: i128) -> BigRational {
    debug_assert!(d > 0);
    BigRational::new_raw(BigInt::from(n), BigInt::from(d))
}

fn rat_add_signed(a: &BigRational, b: &BigRational, negate_b: bool) -> BigRational {
    // fast path: both operands fit in machine words
    if let (Some((n1, d1)), Some((n2, d2))) = (small_parts(a), small_parts(b)) {
        let n2 = if negate_b { -n2 } else { n2 };
        let g = gcd_i128(d1, d2);
        let (d1g, d2g) = (d1 / g, d2 / g);
        let t = n1 * d2g + n2 * d1g;
        if t == 0 {
            return BigRational::zero();
        }
        let g2 = gcd_i128(t, g);
        return big_from_i128(t / g2, d1g * (d2 / g2));
    }
    let (n1, d1) = (a.numer(), a.denom());
    let (n2s, d2) = (b.numer(), b.denom());
    let n2 = if negate_b { -n2s } else { n2s.clone() };
    let g = d1.gcd(d2);
    if g.is_one() {
        let num = n1 * d2 + &n2 * d1;
        if num.is_zero() {
            return BigRational::zero();
        }
        BigRational::new_raw(num, d1 * d2)
    } else {
        let d1g = d1 / &g;
        let d2g = d2 / &g;
        let t = n1 * &d2g + &n2 * &d1g;
        if t.is_zero() {
            return BigRational::zero();
        }
        let g2 = t.gcd(&g);
        BigRational::new_raw(t / &g2, d1g * (d2 / &g2))
    }
}

/// Reduced product of reduced inputs via the cross gcds
/// gcd(n1, d2) and gcd(n2, d1).
fn rat_mul(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_zero() || b.is_zero() {
        return BigRational::zero();
    }
    if let (Some((n1, d1)), Some((n2, d2))) = (small_parts(a), small_parts(b)) {
        let g1 = gcd_i128(n1, d2).max(1);
        let g2 = gcd_i128(n2, d1).max(1);
        return big_from_i128((n1 / g1) * (n2 / g2), (d1 / g2) * (d2 / g1));
    }
    let g1 = a.numer().gcd(b.denom());
    let g2 = b.numer().gcd(a.denom());
    let num = (a.numer() / &g1) * (b.numer() / &g2);
    let den = (a.denom() / &g2) * (b.denom() / &g1);
    BigRational::new_raw(num, den)
}

// ----- modular and polynomial helpers over F_p -------------------------

fn mod_inverse(a: u64, p: u64) -> u64 {
    // extended Euclid on (a, p); p prime, a != 0
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(p as i128) as u64
}

fn poly_trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn poly_mul_raw(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![0];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ((out[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    out
}

/// Remainder of `a` modulo the monic polynomial `m`, coefficients mod p.
fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let deg_m = m.len() - 1;
    let mut r: Vec<u64> = a.to_vec();
    while r.len() > deg_m {
        let top = *r.last().unwrap();
        let shift = r.len() - 1 - deg_m;
        if top != 0 {
            for (j, &c) in m.iter().enumerate().take(deg_m) {
                let sub = (top as u128 * c as u128 % p as u128) as u64;
                let idx = shift + j;
                r[idx] = ((r[idx] as u128 + (p - sub) as u128) % p as u128) as u64;
            }
        }
        r.pop();
    }
    r.resize(deg_m, 0);
    r
}

/// Product in F_p[y]/(modulus); inputs and output have length deg(modulus).
fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    poly_rem(&poly_mul_raw(a, b, p), modulus, p)
}

/// Inverse in F_p[y]/(modulus) by the extended Euclidean algorithm.
fn poly_mod_inverse(a: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    // invariant: old_s * a = old_r and s * a = r (mod modulus)
    let mut old_r: Vec<u64> = a.to_vec();
    poly_trim(&mut old_r);
    let mut r: Vec<u64> = modulus.to_vec();
    let mut old_s: Vec<u64> = vec![1];
    let mut s: Vec<u64> = vec![0];
    while !(r.len() == 1 && r[0] == 0) {
        let (q, rem) = poly_divmod(&old_r, &r, p);
        let new_s = poly_sub(&old_s, &poly_mul_raw(&q, &s, p), p);
        old_r = std::mem::replace(&mut r, rem);
        old_s = std::mem::replace(&mut s, new_s);
    }
    // old_r is now a nonzero constant gcd; divide its Bezout coefficient out
    debug_assert_eq!(old_r.len(), 1);
    let c_inv = mod_inverse(old_r[0], p);
    let scaled: Vec<u64> = old_s
        .iter()
        .map(|&x| (x as u128 * c_inv as u128 % p as u128) as u64)
        .collect();
    poly_rem(&scaled, modulus, p)
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = ((x as u128 + (p - y) as u128) % p as u128) as u64;
    }
    poly_trim(&mut out);
    out
}

/// Division with remainder by a nonzero polynomial, coefficients mod p.
fn poly_divmod(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let mut r: Vec<u64> = a.to_vec();
    poly_trim(&mut r);
    let mut b = b.to_vec();
    poly_trim(&mut b);
    assert!(!(b.len() == 1 && b[0] == 0), "division by zero polynomial");
    let deg_b = b.len() - 1;
    if (r.len() == 1 && r[0] == 0) || r.len() - 1 < deg_b {
        return (vec![0], r);
    }
    let deg_r = r.len() - 1;
    let lead_inv = mod_inverse(*b.last().unwrap(), p);
    let mut q = vec![0u64; deg_r - deg_b + 1];
    for shift in (0..=(deg_r - deg_b)).rev() {
        let top = r[shift + deg_b];
        if top == 0 {
            continue;
        }
        let coeff = (top as u128 * lead_inv as u128 % p as u128) as u64;
        q[shift] = coeff;
        for (j, &c) in b.iter().enumerate() {
            let sub = (coeff as u128 * c as u128 % p as u128) as u64;
            let idx = shift + j;
            r[idx] = ((r[idx] as u128 + (p - sub) as u128) % p as u128) as u64;
        }
    }
    r.truncate(deg_b.max(1));
    poly_trim(&mut r);
    (q, r)
}

/// Irreducibility over F_p: no factor of degree ≤ deg/2, detected via
/// gcd(f, y^{p^i} − y) for i = 1..deg/2 (i = 1 catches roots).
fn is_irreducible(modulus: &[u64], p: u64) -> bool {
    let deg = modulus.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    // frob = y^{p^i} mod f, maintained by repeated p-th powering
    let y: Vec<u64> = {
        let mut v = vec![0u64; deg];
        v[1] = 1;
        v
    };
    let mut frob = y.clone();
    for _ in 1..=(deg / 2) {
        frob = poly_pow_mod(&frob, p, modulus, p);
        let diff = poly_sub(&frob, &y, p);
        let g = poly_gcd(&diff, modulus, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

fn poly_pow_mod(base: &[u64], mut e: u64, modulus: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(&poly_mul_raw(&acc, &b, p), modulus, p);
        }
        e >>= 1;
        if e > 0 {
            b = poly_rem(&poly_mul_raw(&b, &b, p), modulus, p);
        }
    }
    let mut out = acc;
    poly_trim(&mut out);
    out
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !(y.len() == 1 && y[0] == 0) {
        let (_, r) = poly_divmod(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// The lexicographically least monic irreducible of degree m over F_p
/// (coefficient vectors ordered as base-p numbers, constant digit first).
fn least_irreducible(p: u64, m: u32) -> Option<Vec<u64>> {
    let m = m as usize;
    let total = p.checked_pow(m as u32)?;
    for k in 0..total {
        let mut poly = Vec::with_capacity(m + 1);
        let mut v = k;
        for _ in 0..m {
            poly.push(v % p);
            v /= p;
        }
        poly.push(1);
        if is_irreducible(&poly, p) {
            return Some(poly);
        }
    }
    None
}

#[cfg(test)]
static F4: OnceLock<Field> = OnceLock::new();

/// F_4 = F_2[y]/(y^2+y+1), shared by the tests.
#[cfg(test)]
pub(crate) fn f4() -> Field {
    F4.get_or_init(|| Field::extension(2, 2).unwrap()).clone()
}
