//! The quotient-ring families the fast multiplication engines work in:
//! k[x]/(x^N+1) (negacyclic, characteristic ≠ 2), k[x]/(x^{2N}+x^N+1)
//! (trinomial, characteristic ∤ 3) and k[x]/Φ_{s^ν} (cyclotomic,
//! characteristic ∤ s).  In each family the class of x is a principal root
//! of unity of known order, and multiplying by its powers costs only
//! additive work (plus scalar multiplications when the modulus has
//! coefficients beyond ±1) — never a nonscalar multiplication.
//!
//! Full products of two ring elements are not computed here: they go
//! through [`ring_mul_full`], which hands the coefficient vectors back to
//! a recursive polynomial-multiplication engine and then reduces.

use crate::algos::Poly;
use crate::dft::DftRing;
use crate::fields::{Field, FieldElement};
use crate::ledger::CostLedger;
use crate::meta;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("the negacyclic family x^N+1 needs characteristic ≠ 2")]
    CharTwo,
    #[error("the trinomial family x^{{2N}}+x^N+1 needs characteristic ≠ 3")]
    CharThree,
    #[error("the cyclotomic family needs the characteristic not to divide the base {base}")]
    CharDividesBase { base: u64 },
    #[error("{n} is not a power of {base}")]
    NotAPower { n: u64, base: u64 },
    #[error("base must be at least 2")]
    BadBase,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingFamily {
    /// k[x]/(x^N+1); x has order 2N.
    Fermat { n: u64 },
    /// k[x]/(x^{2N}+x^N+1); x has order 3N.
    Trinomial { n: u64 },
    /// k[x]/Φ_{base^exponent}; x has order base^exponent.
    Cyclotomic { base: u64, exponent: u32 },
}

/// How one reduction step folds the leading coefficient into a lower slot.
#[derive(Debug, Clone)]
enum FoldOp {
    /// modulus coefficient +1: subtract the top coefficient.
    Sub,
    /// modulus coefficient −1: add the top coefficient.
    Add,
    /// any other coefficient c: add top·(−c), c held as a field constant.
    MulAdd(FieldElement),
}

/// One of the three quotient-ring families over a ground field.
#[derive(Debug, Clone)]
pub struct QuotientRing {
    field: Field,
    family: RingFamily,
    dim: usize,
    root_order: u64,
    /// Integer modulus coefficients, little-endian, length dim+1, monic.
    modulus_int: Vec<i64>,
    /// Nonzero sub-leading modulus coefficients as fold operations.
    fold_table: Vec<(usize, FoldOp)>,
}

impl PartialEq for QuotientRing {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.family == other.family
    }
}

/// Element of a quotient ring: a fully reduced coefficient vector of
/// length `ring.dim()`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingElement {
    pub coeffs: Vec<FieldElement>,
}

fn is_power_of(mut n: u64, base: u64) -> bool {
    if n == 0 {
        return false;
    }
    while n % base == 0 {
        n /= base;
    }
    n == 1
}

impl QuotientRing {
    fn build(field: Field, family: RingFamily, modulus_int: Vec<i64>, root_order: u64) -> Self {
        let dim = modulus_int.len() - 1;
        let fold_table = modulus_int[..dim]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| {
                let op = match c {
                    1 => FoldOp::Sub,
                    -1 => FoldOp::Add,
                    c => FoldOp::MulAdd(field.from_i64(-c)),
                };
                (j, op)
            })
            .collect();
        QuotientRing {
            field,
            family,
            dim,
            root_order,
            modulus_int,
            fold_table,
        }
    }

    /// k[x]/(x^n+1) for n a power of two; x is a principal 2n-th root.
    pub fn fermat(field: Field, n: u64) -> Result<Self, RingError> {
        if field.characteristic() == 2 {
            return Err(RingError::CharTwo);
        }
        if !n.is_power_of_two() {
            return Err(RingError::NotAPower { n, base: 2 });
        }
        let mut modulus = vec![0i64; n as usize + 1];
        modulus[0] = 1;
        modulus[n as usize] = 1;
        Ok(Self::build(field, RingFamily::Fermat { n }, modulus, 2 * n))
    }

    /// k[x]/(x^{2n}+x^n+1) for n a power of three; x is a principal
    /// 3n-th root.
    pub fn trinomial(field: Field, n: u64) -> Result<Self, RingError> {
        if field.characteristic() == 3 {
            return Err(RingError::CharThree);
        }
        if !is_power_of(n, 3) {
            return Err(RingError::NotAPower { n, base: 3 });
        }
        let mut modulus = vec![0i64; 2 * n as usize + 1];
        modulus[0] = 1;
        modulus[n as usize] = 1;
        modulus[2 * n as usize] = 1;
        Ok(Self::build(field, RingFamily::Trinomial { n }, modulus, 3 * n))
    }

    /// k[x]/Φ_{base^exponent}; x is a principal base^exponent-th root.
    pub fn cyclotomic(field: Field, base: u64, exponent: u32) -> Result<Self, RingError> {
        if base < 2 {
            return Err(RingError::BadBase);
        }
        let ch = field.characteristic();
        if ch != 0 && base % ch == 0 {
            return Err(RingError::CharDividesBase { base });
        }
        let modulus = meta::cyclotomic(base, exponent);
        let order = base.pow(exponent);
        Ok(Self::build(
            field,
            RingFamily::Cyclotomic { base, exponent },
            modulus,
            order,
        ))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn family(&self) -> &RingFamily {
        &self.family
    }

    /// Dimension over the ground field.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Order of the class of x as a principal root of unity.
    pub fn root_order(&self) -> u64 {
        self.root_order
    }

    /// Integer coefficients of the defining modulus, little-endian.
    pub fn modulus_int(&self) -> &[i64] {
        &self.modulus_int
    }

    fn check(&self, x: &RingElement) {
        assert_eq!(
            x.coeffs.len(),
            self.dim,
            "element does not belong to this ring"
        );
    }

    pub fn zero_elem(&self) -> RingElement {
        RingElement {
            coeffs: vec![self.field.zero(); self.dim],
        }
    }

    pub fn one_elem(&self) -> RingElement {
        let mut coeffs = vec![self.field.zero(); self.dim];
        coeffs[0] = self.field.one();
        RingElement { coeffs }
    }

    /// Build an element from up to `dim` low coefficients (zero padded).
    pub fn from_coeffs(&self, coeffs: &[FieldElement]) -> RingElement {
        assert!(coeffs.len() <= self.dim);
        let mut v = coeffs.to_vec();
        v.resize(self.dim, self.field.zero());
        RingElement { coeffs: v }
    }

    /// Coefficientwise sum; dim additive charges.
    pub fn add_elems(&self, u: &RingElement, v: &RingElement, ledger: &mut CostLedger) -> RingElement {
        self.check(u);
        self.check(v);
        RingElement {
            coeffs: u
                .coeffs
                .iter()
                .zip(&v.coeffs)
                .map(|(a, b)| self.field.add(a, b, ledger))
                .collect(),
        }
    }

    pub fn sub_elems(&self, u: &RingElement, v: &RingElement, ledger: &mut CostLedger) -> RingElement {
        self.check(u);
        self.check(v);
        RingElement {
            coeffs: u
                .coeffs
                .iter()
                .zip(&v.coeffs)
                .map(|(a, b)| self.field.sub(a, b, ledger))
                .collect(),
        }
    }

    pub fn neg_elem(&self, u: &RingElement, ledger: &mut CostLedger) -> RingElement {
        self.check(u);
        RingElement {
            coeffs: u.coeffs.iter().map(|a| self.field.neg(a, ledger)).collect(),
        }
    }

    /// Multiply every coefficient by a ground-field constant; dim scalar
    /// charges.
    pub fn scalar_mul_base(
        &self,
        u: &RingElement,
        c: &FieldElement,
        ledger: &mut CostLedger,
    ) -> RingElement {
        self.check(u);
        RingElement {
            coeffs: u
                .coeffs
                .iter()
                .map(|a| self.field.mul(a, c, ledger, true))
                .collect(),
        }
    }

    /// u·x^e for 0 ≤ e < root_order.  Exponents first rotate freely
    /// (x^{root_order} = 1), then the overflow is folded through the
    /// modulus; never charges a nonscalar multiplication.
    pub fn mul_by_root_power(&self, u: &RingElement, e: u64, ledger: &mut CostLedger) -> RingElement {
        self.check(u);
        assert!(e < self.root_order, "root-power exponent out of range");
        let r = self.root_order as usize;
        let mut vals = vec![self.field.zero(); r.max(self.dim)];
        let mut occ = vec![false; vals.len()];
        for (j, c) in u.coeffs.iter().enumerate() {
            let t = (j + e as usize) % r;
            vals[t] = c.clone();
            occ[t] = true;
        }
        self.reduce_scratch(vals, occ, ledger)
    }

    /// Reduce a plain product coefficient vector (length ≤ 2·dim−1) into
    /// the ring; charged per fold through the modulus tail.
    pub fn reduce_coeffs(&self, coeffs: Vec<FieldElement>, ledger: &mut CostLedger) -> RingElement {
        assert!(coeffs.len() <= 2 * self.dim);
        let occ = vec![true; coeffs.len()];
        let mut vals = coeffs;
        if vals.len() < self.dim {
            vals.resize(self.dim, self.field.zero());
        }
        self.reduce_scratch(vals, occ, ledger)
    }

    /// Top-down monic reduction.  `occ` marks structurally occupied slots;
    /// charging depends only on the occupancy pattern, never on values, so
    /// the cost of a given call shape is deterministic.
    fn reduce_scratch(
        &self,
        mut vals: Vec<FieldElement>,
        mut occ: Vec<bool>,
        ledger: &mut CostLedger,
    ) -> RingElement {
        occ.resize(vals.len(), false);
        for t in (self.dim..vals.len()).rev() {
            if !occ[t] {
                continue;
            }
            let top = std::mem::replace(&mut vals[t], self.field.zero());
            occ[t] = false;
            for (j, op) in &self.fold_table {
                let target = t - self.dim + j;
                match op {
                    FoldOp::Sub => {
                        if occ[target] {
                            vals[target] = self.field.sub(&vals[target], &top, ledger);
                        } else {
                            vals[target] = self.field.neg(&top, ledger);
                            occ[target] = true;
                        }
                    }
                    FoldOp::Add => {
                        if occ[target] {
                            vals[target] = self.field.add(&vals[target], &top, ledger);
                        } else {
                            vals[target] = top.clone();
                            occ[target] = true;
                        }
                    }
                    FoldOp::MulAdd(c) => {
                        let prod = self.field.mul(&top, c, ledger, true);
                        if occ[target] {
                            vals[target] = self.field.add(&vals[target], &prod, ledger);
                        } else {
                            vals[target] = prod;
                            occ[target] = true;
                        }
                    }
                }
            }
        }
        vals.truncate(self.dim);
        RingElement { coeffs: vals }
    }
}

/// The general product of two ring elements: multiply the coefficient
/// vectors with the supplied recursive engine, then reduce modulo the
/// defining polynomial.  All charges land on the child recursion level.
pub fn ring_mul_full(
    ring: &QuotientRing,
    u: &RingElement,
    v: &RingElement,
    recurse: &mut dyn FnMut(&Poly, &Poly, &mut CostLedger) -> Poly,
    ledger: &mut CostLedger,
) -> RingElement {
    let level = ledger.current_level() + 1;
    ledger.enter_level(level);
    let pa = Poly::new(ring.field().clone(), u.coeffs.clone());
    let pb = Poly::new(ring.field().clone(), v.coeffs.clone());
    let prod = recurse(&pa, &pb, ledger);
    let out = ring.reduce_coeffs(prod.into_coeffs(), ledger);
    ledger.exit_level();
    out
}

/// How a coefficient vector is cut into ring-element chunks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChunkScheme {
    /// Chunk i holds coefficients [i·width, (i+1)·width).
    Contiguous { width: usize },
    /// Chunk i holds coefficients i, i+stride, i+2·stride, ...
    Interleaved { stride: usize },
}

/// Lossless encoding of a coefficient vector as `count` ring elements.
/// No arithmetic is performed or charged.
pub fn embed_split(
    coeffs: &[FieldElement],
    ring: &QuotientRing,
    scheme: ChunkScheme,
    count: usize,
) -> Vec<RingElement> {
    match scheme {
        ChunkScheme::Contiguous { width } => {
            assert!(width <= ring.dim());
            assert!(coeffs.len() <= width * count, "input does not fit the split");
            (0..count)
                .map(|i| {
                    let lo = (i * width).min(coeffs.len());
                    let hi = ((i + 1) * width).min(coeffs.len());
                    ring.from_coeffs(&coeffs[lo..hi])
                })
                .collect()
        }
        ChunkScheme::Interleaved { stride } => {
            assert_eq!(stride, count, "interleaved splits use one chunk per residue");
            assert!(coeffs.len() <= stride * ring.dim());
            (0..count)
                .map(|i| {
                    let chunk: Vec<FieldElement> = coeffs
                        .iter()
                        .skip(i)
                        .step_by(stride)
                        .cloned()
                        .collect();
                    ring.from_coeffs(&chunk)
                })
                .collect()
        }
    }
}

/// Decode chunks back to a coefficient vector of length `out_len`.
/// Contiguous chunks overlap-add (adjacent chunks share slots, charged);
/// interleaved chunks are a pure reindexing at no cost.
pub fn unembed(
    chunks: &[RingElement],
    ring: &QuotientRing,
    scheme: ChunkScheme,
    out_len: usize,
    ledger: &mut CostLedger,
) -> Vec<FieldElement> {
    let field = ring.field();
    let mut out = vec![field.zero(); out_len];
    let mut occ = vec![false; out_len];
    match scheme {
        ChunkScheme::Contiguous { width } => {
            for (i, chunk) in chunks.iter().enumerate() {
                for (j, c) in chunk.coeffs.iter().enumerate() {
                    let pos = i * width + j;
                    if pos >= out_len {
                        continue;
                    }
                    if occ[pos] {
                        out[pos] = field.add(&out[pos], c, ledger);
                    } else {
                        out[pos] = c.clone();
                        occ[pos] = true;
                    }
                }
            }
        }
        ChunkScheme::Interleaved { stride } => {
            assert_eq!(chunks.len(), stride);
            for (i, chunk) in chunks.iter().enumerate() {
                for (j, c) in chunk.coeffs.iter().enumerate() {
                    let pos = i + stride * j;
                    if pos >= out_len {
                        continue;
                    }
                    debug_assert!(!occ[pos]);
                    out[pos] = c.clone();
                    occ[pos] = true;
                }
            }
        }
    }
    out
}

/// A power of the distinguished root x, as a DFT root handle.
#[derive(Debug, Clone)]
pub struct MonomialRoot {
    exp: u64,
    order: u64,
}

impl MonomialRoot {
    pub fn exponent(&self) -> u64 {
        self.exp
    }
}

impl DftRing for QuotientRing {
    type Elem = RingElement;
    type Root = MonomialRoot;

    fn zero(&self) -> RingElement {
        self.zero_elem()
    }

    fn one(&self) -> RingElement {
        self.one_elem()
    }

    fn add(&self, x: &RingElement, y: &RingElement, ledger: &mut CostLedger) -> RingElement {
        self.add_elems(x, y, ledger)
    }

    fn sub(&self, x: &RingElement, y: &RingElement, ledger: &mut CostLedger) -> RingElement {
        self.sub_elems(x, y, ledger)
    }

    fn neg(&self, x: &RingElement, ledger: &mut CostLedger) -> RingElement {
        self.neg_elem(x, ledger)
    }

    fn scalar_mul_elem(
        &self,
        x: &RingElement,
        c: &RingElement,
        ledger: &mut CostLedger,
    ) -> RingElement {
        // product with a fixed ring constant: every ground-field
        // multiplication is scalar
        self.check(x);
        self.check(c);
        let field = &self.field;
        let mut raw = vec![field.zero(); 2 * self.dim - 1];
        let mut occ = vec![false; raw.len()];
        for (i, a) in x.coeffs.iter().enumerate() {
            for (j, b) in c.coeffs.iter().enumerate() {
                let prod = field.mul(a, b, ledger, true);
                if occ[i + j] {
                    raw[i + j] = field.add(&raw[i + j], &prod, ledger);
                } else {
                    raw[i + j] = prod;
                    occ[i + j] = true;
                }
            }
        }
        self.reduce_coeffs(raw, ledger)
    }

    fn scale_by_inverse_of(
        &self,
        x: &RingElement,
        n: u64,
        ledger: &mut CostLedger,
    ) -> Option<RingElement> {
        let c = self.field.inv(&self.field.from_u64(n)).ok()?;
        Some(self.scalar_mul_base(x, &c, ledger))
    }

    fn characteristic(&self) -> u64 {
        self.field.characteristic()
    }

    fn root_of_order(&self, n: u64) -> Option<MonomialRoot> {
        if n >= 1 && self.root_order % n == 0 {
            Some(MonomialRoot {
                exp: (self.root_order / n) % self.root_order,
                order: n,
            })
        } else {
            None
        }
    }

    fn root_order(&self, root: &MonomialRoot) -> u64 {
        root.order
    }

    fn root_pow(&self, root: &MonomialRoot, e: u64) -> MonomialRoot {
        let r = self.root_order as u128;
        let exp = (root.exp as u128 * e as u128 % r) as u64;
        let order = self.root_order / gcd(self.root_order, exp);
        MonomialRoot { exp, order }
    }

    fn root_inv(&self, root: &MonomialRoot) -> MonomialRoot {
        MonomialRoot {
            exp: (self.root_order - root.exp) % self.root_order,
            order: root.order,
        }
    }

    fn root_elem(&self, root: &MonomialRoot) -> RingElement {
        self.mul_by_root_power(&self.one_elem(), root.exp, &mut CostLedger::new())
    }

    fn apply_root_power(
        &self,
        x: &RingElement,
        root: &MonomialRoot,
        e: u64,
        ledger: &mut CostLedger,
    ) -> RingElement {
        let r = self.root_order as u128;
        let total = (root.exp as u128 * e as u128 % r) as u64;
        QuotientRing::mul_by_root_power(self, x, total, ledger)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
