//! The multiplication engines and the dispatcher.
//!
//! Every engine computes the plain product of two dense polynomials and
//! charges the ledger for each algebraic operation.  All engines are
//! straight-line: the work done (and hence the ledger) depends only on
//! input sizes, never on coefficient values.  [`mul_naive`] is the
//! correctness oracle for everything else.

use crate::dft::{self, plan_dft, DftError, DftRing};
use crate::fields::{Field, FieldElement};
use crate::ledger::CostLedger;
use crate::meta;
use crate::rings::{
    embed_split, ring_mul_full, unembed, ChunkScheme, QuotientRing, RingElement, RingError,
};
use rand::Rng;

/// Below this degree bound every fast engine delegates to [`mul_naive`].
pub const RECURSION_CUTOFF: u64 = 8;

/// A recursive chunk product goes back through the fast engine only when
/// the child degree is at least this factor smaller than the parent's;
/// otherwise the chunk is multiplied naively.  Keeps the recursion both
/// terminating (the trinomial embedding stalls at degree 18) and cheaper
/// than schoolbook at every step.
pub const CONTRACTION_FACTOR: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgoError {
    #[error("no principal root of order {needed} (base {s}) in {field}")]
    NoSuitableRoot { s: u64, needed: u64, field: String },
    #[error("this engine requires characteristic 2")]
    CharacteristicTwoRequired,
    #[error("this engine does not support characteristic 2")]
    CharacteristicTwoUnsupported,
    #[error("the characteristic divides the base s = {s}")]
    CharacteristicDividesBase { s: u64 },
    #[error(transparent)]
    Dft(#[from] DftError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Dense polynomial: coefficient i is the coefficient of x^i.  Trailing
/// zeros are permitted; padding is always explicit.
#[derive(Debug, Clone)]
pub struct Poly {
    field: Field,
    coeffs: Vec<FieldElement>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}

impl Poly {
    pub fn new(field: Field, coeffs: Vec<FieldElement>) -> Self {
        assert!(!coeffs.is_empty(), "polynomials have at least one slot");
        Poly { field, coeffs }
    }

    pub fn from_i64(field: &Field, values: &[i64]) -> Self {
        Poly::new(
            field.clone(),
            values.iter().map(|&v| field.from_i64(v)).collect(),
        )
    }

    pub fn zero(field: &Field, len: usize) -> Self {
        Poly::new(field.clone(), vec![field.zero(); len.max(1)])
    }

    pub fn random<R: Rng + ?Sized>(field: &Field, len: usize, rng: &mut R) -> Self {
        Poly::new(
            field.clone(),
            (0..len.max(1)).map(|_| field.random_element(rng)).collect(),
        )
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<FieldElement> {
        self.coeffs
    }

    /// Number of coefficient slots (the degree bound n).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the highest nonzero coefficient, if any.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !self.field.is_zero(c))
    }
}

fn check_same_field(a: &Poly, b: &Poly) {
    assert!(
        a.field == b.field,
        "polynomials live in different fields ({} vs {})",
        a.field,
        b.field
    );
}

fn with_level<T>(ledger: &mut CostLedger, f: impl FnOnce(&mut CostLedger) -> T) -> T {
    let level = ledger.current_level() + 1;
    ledger.enter_level(level);
    let out = f(ledger);
    ledger.exit_level();
    out
}

type Recurse<'a> = &'a mut dyn FnMut(&Poly, &Poly, &mut CostLedger) -> Poly;

// ----- naive (the oracle) --------------------------------------------------

/// Schoolbook multiplication: c_l = Σ_{i+j=l} a_i·b_j.  For two inputs of
/// n coefficients each this charges exactly n² nonscalar multiplications
/// and (n−1)² additions.
pub fn mul_naive(a: &Poly, b: &Poly, ledger: &mut CostLedger) -> Poly {
    check_same_field(a, b);
    with_level(ledger, |l| naive_inner(a, b, l))
}

fn naive_inner(a: &Poly, b: &Poly, ledger: &mut CostLedger) -> Poly {
    let field = a.field();
    let (la, lb) = (a.len(), b.len());
    let mut out = vec![field.zero(); la + lb - 1];
    let mut occupied = vec![false; out.len()];
    for (i, x) in a.coeffs().iter().enumerate() {
        for (j, y) in b.coeffs().iter().enumerate() {
            let prod = field.mul(x, y, ledger, false);
            if occupied[i + j] {
                out[i + j] = field.add(&out[i + j], &prod, ledger);
            } else {
                out[i + j] = prod;
                occupied[i + j] = true;
            }
        }
    }
    Poly::new(field.clone(), out)
}

// ----- parameter derivations -------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectDftParams {
    pub s: u64,
    pub nu: u32,
    /// s^ν, the smallest power of s that is ≥ 2n−1.
    pub transform_len: u64,
}

pub fn direct_dft_params(n: u64, s: u64) -> DirectDftParams {
    assert!(n >= 1 && s >= 2);
    let target = 2 * n - 1;
    let mut nu = 0u32;
    let mut len = 1u64;
    while len < target {
        len = len.checked_mul(s).expect("transform length overflow");
        nu += 1;
    }
    DirectDftParams {
        s,
        nu,
        transform_len: len,
    }
}

/// One recursion level of the negacyclic engine: multiplication modulo
/// x^N+1 split into `transform_len` chunks over x^{ring_dim}+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsParams {
    pub nu: u32,
    /// N = 2^ν ≥ 2n−1.
    pub padded_len: u64,
    /// N₁ = 2^⌈ν/2⌉: dimension of the chunk ring, and the child degree.
    pub ring_dim: u64,
    /// N₂ = 2^{⌊ν/2⌋+1}: DFT order; (N₁/2)·N₂ = N.
    pub transform_len: u64,
    /// N₁/2 coefficients per chunk.
    pub chunk_width: u64,
}

pub fn ss_params(n: u64) -> SsParams {
    assert!(n >= 2);
    let nu = meta::ceil_log2(2 * n - 1);
    let ring_dim = 1u64 << nu.div_ceil(2);
    let transform_len = 1u64 << (nu / 2 + 1);
    let padded_len = 1u64 << nu;
    debug_assert_eq!(ring_dim / 2 * transform_len, padded_len);
    SsParams {
        nu,
        padded_len,
        ring_dim,
        transform_len,
        chunk_width: ring_dim / 2,
    }
}

/// The level parameters produced by unrolling the negacyclic recursion
/// until the child degree drops below the cutoff (or stops shrinking).
pub fn ss_chain(n: u64) -> Vec<SsParams> {
    let mut out = Vec::new();
    let mut cur = n;
    while cur >= RECURSION_CUTOFF {
        let p = ss_params(cur);
        out.push(p);
        if p.ring_dim < RECURSION_CUTOFF || CONTRACTION_FACTOR * p.ring_dim >= cur {
            break;
        }
        cur = p.ring_dim;
    }
    out
}

/// Expected ledger depth of the negacyclic engine (its levels plus one
/// level of naive leaf products).
pub fn ss_expected_depth(n: u64) -> usize {
    if n < RECURSION_CUTOFF {
        1
    } else {
        ss_chain(n).len() + 1
    }
}

/// One recursion level of the trinomial (characteristic-2) engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Char2Params {
    pub nu: u32,
    /// N = 3^ν with 2N ≥ 2n−1.
    pub base_len: u64,
    /// N₁ = 3^⌈ν/2⌉: chunk ring is x^{2N₁}+x^{N₁}+1; child degree is 2N₁.
    pub ring_n: u64,
    /// N₂ = 3^⌊ν/2⌋: 2N₂ chunks carry data, the DFT has order 3N₂.
    pub n2: u64,
}

pub fn char2_params(n: u64) -> Char2Params {
    assert!(n >= 1);
    let mut nu = 0u32;
    let mut base = 1u64;
    while base < n {
        base = base.checked_mul(3).expect("transform length overflow");
        nu += 1;
    }
    Char2Params {
        nu,
        base_len: base,
        ring_n: 3u64.pow(nu.div_ceil(2)),
        n2: 3u64.pow(nu / 2),
    }
}

pub fn char2_chain(n: u64) -> Vec<Char2Params> {
    let mut out = Vec::new();
    let mut cur = n;
    while cur >= RECURSION_CUTOFF {
        let p = char2_params(cur);
        out.push(p);
        let child = 2 * p.ring_n;
        if child < RECURSION_CUTOFF || CONTRACTION_FACTOR * child >= cur {
            break;
        }
        cur = child;
    }
    out
}

pub fn char2_expected_depth(n: u64) -> usize {
    if n < RECURSION_CUTOFF {
        1
    } else {
        char2_chain(n).len() + 1
    }
}

/// One recursion level of the cyclotomic engine with base s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CkParams {
    pub s: u64,
    pub nu: u32,
    /// ŝ^ν, the order of the defining cyclotomic polynomial.
    pub modulus_order: u64,
    /// N = φ(s^ν) ≥ 2n−1, the working dimension.
    pub dim: u64,
    /// N₁ = φ(N₃): chunk ring dimension and child degree.
    pub n1: u64,
    /// N₂ = s^{⌈ν/2⌉−1}: chunk count and DFT order.
    pub n2: u64,
    /// N₃ = s^{⌊ν/2⌋+1}: order of the chunk ring's cyclotomic modulus.
    pub n3: u64,
}

pub fn ck_params(n: u64, s: u64) -> CkParams {
    assert!(n >= 1 && s >= 2);
    let phi_s = meta::totient(s);
    // ν = ⌈log_s((4n−2)·log₂ s)⌉, exact for s = 2
    let mut nu: u32 = if s == 2 {
        meta::ceil_log2(4 * n - 2)
    } else {
        let target = (4 * n - 2) as f64 * (s as f64).log2();
        let mut nu = 0u32;
        let mut pow = 1f64;
        while pow < target - 1e-9 {
            pow *= s as f64;
            nu += 1;
        }
        nu
    };
    let spow = |e: u32| -> u64 {
        let mut acc = 1u64;
        for _ in 0..e {
            acc = acc.checked_mul(s).expect("cyclotomic order overflow");
        }
        acc
    };
    // guard against floating-point edges: the dimension must reach 2n−1
    while spow(nu - 1) * phi_s < 2 * n - 1 {
        nu += 1;
    }
    assert!(nu >= 2);
    let n2 = spow(nu.div_ceil(2) - 1);
    let n3 = spow(nu / 2 + 1);
    let n1 = meta::totient(n3);
    let dim = spow(nu - 1) * phi_s;
    debug_assert_eq!(n1 * n2, dim);
    debug_assert_eq!(n3 % (s * n2), 0);
    CkParams {
        s,
        nu,
        modulus_order: spow(nu),
        dim,
        n1,
        n2,
        n3,
    }
}

/// Degree threshold below which the cyclotomic engine goes naive.
pub fn ck_threshold(s: u64) -> u64 {
    RECURSION_CUTOFF.max(s.saturating_mul(s).saturating_mul(s))
}

/// Whether a recursive cyclotomic call at degree m still contracts: its
/// own chunk ring must be at least CONTRACTION_FACTOR times smaller.
/// (For odd exponents ν the ring dimension φ(N₃) can equal m itself.)
pub fn ck_child_recurses(m: u64, s: u64) -> bool {
    m >= ck_threshold(s) && CONTRACTION_FACTOR * ck_params(m, s).n1 < m
}

pub fn ck_chain(n: u64, s: u64) -> Vec<CkParams> {
    let mut out = Vec::new();
    let mut cur = n;
    while cur >= ck_threshold(s) {
        let p = ck_params(cur, s);
        out.push(p);
        if !ck_child_recurses(p.n1, s) {
            break;
        }
        cur = p.n1;
    }
    out
}

// ----- evaluation/interpolation engine -----------------------------------

/// Multiplication by DFT at a primitive s^ν-th root in the ground field:
/// pad, two forward transforms, s^ν pointwise products (the only nonscalar
/// multiplications), one inverse transform.
pub fn mul_direct_dft(a: &Poly, b: &Poly, ledger: &mut CostLedger) -> Result<Poly, AlgoError> {
    check_same_field(a, b);
    let n = a.len().max(b.len()) as u64;
    let field = a.field();
    let s = direct_dft_pick_base(field, n).ok_or_else(|| AlgoError::NoSuitableRoot {
        s: 2,
        needed: direct_dft_params(n, 2).transform_len,
        field: field.to_string(),
    })?;
    mul_direct_dft_with_base(a, b, s, ledger)
}

/// The smallest base s ∈ {2, 3, 5, 7} whose padded transform order has a
/// principal root in the field.
pub fn direct_dft_pick_base(field: &Field, n: u64) -> Option<u64> {
    [2u64, 3, 5, 7].into_iter().find(|&s| {
        let len = direct_dft_params(n, s).transform_len;
        DftRing::root_of_order(field, len).is_some()
    })
}

/// The same engine with the power base fixed by the caller.
pub fn mul_direct_dft_with_base(
    a: &Poly,
    b: &Poly,
    s: u64,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    check_same_field(a, b);
    with_level(ledger, |l| direct_core(a, b, s, l))
}

fn direct_core(a: &Poly, b: &Poly, s: u64, ledger: &mut CostLedger) -> Result<Poly, AlgoError> {
    let field = a.field();
    let n = a.len().max(b.len()) as u64;
    let params = direct_dft_params(n, s);
    let len = params.transform_len;
    // Embed and pad (free)
    let root = DftRing::root_of_order(field, len).ok_or_else(|| AlgoError::NoSuitableRoot {
        s,
        needed: len,
        field: field.to_string(),
    })?;
    let plan = plan_dft(len, field)?;
    let pad = |p: &Poly| {
        let mut v = p.coeffs().to_vec();
        v.resize(len as usize, field.zero());
        v
    };
    // Compute DFTs
    let ta = dft::dft(field, &plan, &root, &pad(a), ledger)?;
    let tb = dft::dft(field, &plan, &root, &pad(b), ledger)?;
    // Multiply pointwise: exactly s^ν nonscalar multiplications
    let tc: Vec<FieldElement> = ta
        .iter()
        .zip(&tb)
        .map(|(x, y)| field.mul(x, y, ledger, false))
        .collect();
    // Inverse DFT and truncate to the 2n−1 meaningful slots
    let c = dft::dft_inverse(field, &plan, &root, &tc, ledger)?;
    let out_len = a.len() + b.len() - 1;
    Ok(Poly::new(field.clone(), c[..out_len].to_vec()))
}

// ----- negacyclic engine (characteristic ≠ 2) ------------------------------

/// Multiplication through k[x]/(x^N+1): split into N₂ chunks over
/// k[y]/(y^{N₁}+1), transform of order N₂ by the monomial root
/// ψ = y^{2N₁/N₂}, N₂ recursive chunk products, inverse transform,
/// overlap-add.
pub fn mul_schonhage_strassen(
    a: &Poly,
    b: &Poly,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    check_same_field(a, b);
    with_level(ledger, |l| ss_inner(a, b, l))
}

fn ss_inner(a: &Poly, b: &Poly, ledger: &mut CostLedger) -> Result<Poly, AlgoError> {
    if a.field().characteristic() == 2 {
        return Err(AlgoError::CharacteristicTwoUnsupported);
    }
    let n = a.len().max(b.len()) as u64;
    if n < RECURSION_CUTOFF {
        return Ok(naive_inner(a, b, ledger));
    }
    let mut recurse = |x: &Poly, y: &Poly, led: &mut CostLedger| -> Poly {
        let m = x.len().max(y.len()) as u64;
        if m < RECURSION_CUTOFF || CONTRACTION_FACTOR * m >= n {
            naive_inner(x, y, led)
        } else {
            ss_inner(x, y, led).expect("recursion preserves the engine preconditions")
        }
    };
    ss_core(a, b, &mut recurse, ledger)
}

fn ss_core(a: &Poly, b: &Poly, recurse: Recurse, ledger: &mut CostLedger) -> Result<Poly, AlgoError> {
    let field = a.field().clone();
    let n = a.len().max(b.len()) as u64;
    let p = ss_params(n);
    let ring = QuotientRing::fermat(field.clone(), p.ring_dim)?;
    let psi = DftRing::root_of_order(&ring, p.transform_len)
        .expect("the transform order divides the ring's root order");
    let plan = plan_dft(p.transform_len, &ring)?;
    let scheme = ChunkScheme::Contiguous {
        width: p.chunk_width as usize,
    };
    // Embed and pad, then extend into chunks (both free)
    let chunks_a = embed_split(a.coeffs(), &ring, scheme, p.transform_len as usize);
    let chunks_b = embed_split(b.coeffs(), &ring, scheme, p.transform_len as usize);
    // Compute DFTs
    let ta = dft::dft(&ring, &plan, &psi, &chunks_a, ledger)?;
    let tb = dft::dft(&ring, &plan, &psi, &chunks_b, ledger)?;
    // Multiply: N₂ recursive products in the chunk ring
    let tc: Vec<RingElement> = ta
        .iter()
        .zip(&tb)
        .map(|(u, v)| ring_mul_full(&ring, u, v, recurse, ledger))
        .collect();
    // Inverse DFT
    let cb = dft::dft_inverse(&ring, &plan, &psi, &tc, ledger)?;
    // Unembed: overlap-add of adjacent chunks
    let out_len = a.len() + b.len() - 1;
    let out = unembed(&cb, &ring, scheme, out_len, ledger);
    Ok(Poly::new(field, out))
}

// ----- trinomial engine (characteristic 2) ---------------------------------

/// Multiplication through k[x]/(x^{2N}+x^N+1) for characteristic 2:
/// 2N₂ chunks over the trinomial ring, a DFT of order 3N₂, recursive
/// products at the 2N₂ indices not divisible by 3, and reconstruction of
/// the two needed chunk differences from those products alone.
pub fn mul_schonhage_char2(
    a: &Poly,
    b: &Poly,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    check_same_field(a, b);
    with_level(ledger, |l| char2_inner(a, b, l))
}

fn char2_inner(a: &Poly, b: &Poly, ledger: &mut CostLedger) -> Result<Poly, AlgoError> {
    if a.field().characteristic() != 2 {
        return Err(AlgoError::CharacteristicTwoRequired);
    }
    let n = a.len().max(b.len()) as u64;
    if n < RECURSION_CUTOFF {
        return Ok(naive_inner(a, b, ledger));
    }
    let mut recurse = |x: &Poly, y: &Poly, led: &mut CostLedger| -> Poly {
        let m = x.len().max(y.len()) as u64;
        if m < RECURSION_CUTOFF || CONTRACTION_FACTOR * m >= n {
            naive_inner(x, y, led)
        } else {
            char2_inner(x, y, led).expect("recursion preserves the engine preconditions")
        }
    };
    char2_core(a, b, &mut recurse, ledger)
}

fn char2_core(
    a: &Poly,
    b: &Poly,
    recurse: Recurse,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    let field = a.field().clone();
    let n = a.len().max(b.len()) as u64;
    let p = char2_params(n);
    let (n1, n2) = (p.ring_n, p.n2);
    let ring = QuotientRing::trinomial(field.clone(), n1)?;
    let order = 3 * n2;
    let psi = DftRing::root_of_order(&ring, order).expect("3N₂ divides 3N₁");
    let plan = plan_dft(order, &ring)?;
    let scheme = ChunkScheme::Contiguous {
        width: n1 as usize,
    };
    // Embed and pad: 2N₂ data chunks plus N₂ zero chunks (free)
    let mut chunks_a = embed_split(a.coeffs(), &ring, scheme, 2 * n2 as usize);
    let mut chunks_b = embed_split(b.coeffs(), &ring, scheme, 2 * n2 as usize);
    chunks_a.resize(order as usize, ring.zero_elem());
    chunks_b.resize(order as usize, ring.zero_elem());
    // Compute DFTs of order 3N₂
    let ta = dft::dft(&ring, &plan, &psi, &chunks_a, ledger)?;
    let tb = dft::dft(&ring, &plan, &psi, &chunks_b, ledger)?;
    // Multiply: only the 2N₂ products at indices ≢ 0 (mod 3)
    let mut prods1 = Vec::with_capacity(n2 as usize);
    let mut prods2 = Vec::with_capacity(n2 as usize);
    for i in 0..n2 as usize {
        let m = 3 * i + 1;
        prods1.push(ring_mul_full(&ring, &ta[m], &tb[m], recurse, ledger));
    }
    for i in 0..n2 as usize {
        let m = 3 * i + 2;
        prods2.push(ring_mul_full(&ring, &ta[m], &tb[m], recurse, ledger));
    }
    // Back-transform: recover the 2N₂ chunk differences
    let chunks = char2_recover(&ring, &prods1, &prods2, &psi, n2, ledger)?;
    // Unembed: overlap-add with stride N₁
    let out_len = a.len() + b.len() - 1;
    let out = unembed(&chunks, &ring, scheme, out_len, ledger);
    Ok(Poly::new(field, out))
}

/// From the products at indices 3i+1 and 3i+2 of the order-3N₂ transform,
/// compute c̄_μ = c̄'_μ − c̄'_{μ+2N₂} and c̄_{μ+N₂} = c̄'_{μ+N₂} − c̄'_{μ+2N₂}
/// — the residues modulo z^{2N₂}+z^{N₂}+1 — without the 3i products.
///
/// Writing ζ = ψ^{N₂}, the order-N₂ inverse transforms of the two product
/// vectors give t_j[μ] = (c̄'_μ + ζ^j c̄'_{μ+N₂} + ζ^{2j} c̄'_{μ+2N₂})·ψ^{jμ};
/// with P = ψ^{−μ}t₁[μ] and Q = ψ^{−2μ}t₂[μ],
///   c̄_μ       = (1/3)·((1−ζ)P + (1−ζ²)Q),
///   c̄_{μ+N₂} = (1/3)·((ζ²−ζ)P + (ζ−ζ²)Q).
fn char2_recover(
    ring: &QuotientRing,
    prods1: &[RingElement],
    prods2: &[RingElement],
    psi: &crate::rings::MonomialRoot,
    n2: u64,
    ledger: &mut CostLedger,
) -> Result<Vec<RingElement>, AlgoError> {
    let psi3 = ring.root_pow(psi, 3); // order N₂
    let plan = plan_dft(n2, ring)?;
    let t1 = dft::dft_inverse(ring, &plan, &psi3, prods1, ledger)?;
    let t2 = dft::dft_inverse(ring, &plan, &psi3, prods2, ledger)?;
    let psi_inv = ring.root_inv(psi);
    let mut out = vec![ring.zero_elem(); 2 * n2 as usize];
    for mu in 0..n2 {
        let p = ring.apply_root_power(&t1[mu as usize], &psi_inv, mu, ledger);
        let q = ring.apply_root_power(&t2[mu as usize], &psi_inv, 2 * mu, ledger);
        let zp = ring.apply_root_power(&p, psi, n2, ledger);
        let z2p = ring.apply_root_power(&p, psi, 2 * n2, ledger);
        let zq = ring.apply_root_power(&q, psi, n2, ledger);
        let z2q = ring.apply_root_power(&q, psi, 2 * n2, ledger);
        let a1 = ring.sub_elems(&p, &zp, ledger);
        let a2 = ring.sub_elems(&q, &z2q, ledger);
        let d1 = ring
            .scale_by_inverse_of(&ring.add_elems(&a1, &a2, ledger), 3, ledger)
            .expect("3 is invertible away from characteristic 3");
        let b1 = ring.sub_elems(&z2p, &zp, ledger);
        let b2 = ring.sub_elems(&zq, &z2q, ledger);
        let d2 = ring
            .scale_by_inverse_of(&ring.add_elems(&b1, &b2, ledger), 3, ledger)
            .expect("3 is invertible away from characteristic 3");
        out[mu as usize] = d1;
        out[(mu + n2) as usize] = d2;
    }
    Ok(out)
}

// ----- cyclotomic engine ----------------------------------------------------

/// Multiplication through k[x]/Φ_{s^ν}: stride-interleaved chunks over
/// k[y]/Φ_{N₃}, two evaluation streams (plain and twisted by the
/// principal sN₂-th root ξ), 2·2 forward DFTs of order N₂, 2N₂ recursive
/// products, two inverse DFTs, and a division-free recombination.
pub fn mul_cantor_kaltofen(
    a: &Poly,
    b: &Poly,
    s: u64,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    check_same_field(a, b);
    with_level(ledger, |l| ck_inner(a, b, s, l))
}

/// The cyclotomic engine with its default base: 3 in characteristic 2,
/// otherwise 2.
pub fn mul_cantor_kaltofen_default(
    a: &Poly,
    b: &Poly,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    let s = if a.field().characteristic() == 2 { 3 } else { 2 };
    mul_cantor_kaltofen(a, b, s, ledger)
}

fn ck_inner(a: &Poly, b: &Poly, s: u64, ledger: &mut CostLedger) -> Result<Poly, AlgoError> {
    assert!(s >= 2);
    let ch = a.field().characteristic();
    if ch != 0 && s % ch == 0 {
        return Err(AlgoError::CharacteristicDividesBase { s });
    }
    let n = a.len().max(b.len()) as u64;
    if n < ck_threshold(s) {
        return Ok(naive_inner(a, b, ledger));
    }
    let mut recurse = |x: &Poly, y: &Poly, led: &mut CostLedger| -> Poly {
        let m = x.len().max(y.len()) as u64;
        if !ck_child_recurses(m, s) {
            naive_inner(x, y, led)
        } else {
            ck_inner(x, y, s, led).expect("recursion preserves the engine preconditions")
        }
    };
    ck_core(a, b, s, &mut recurse, ledger)
}

fn ck_core(
    a: &Poly,
    b: &Poly,
    s: u64,
    recurse: Recurse,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    let field = a.field().clone();
    let n = a.len().max(b.len()) as u64;
    let p = ck_params(n, s);
    let ring = QuotientRing::cyclotomic(field.clone(), s, p.nu / 2 + 1)?;
    debug_assert_eq!(ring.dim() as u64, p.n1);
    debug_assert_eq!(ring.root_order(), p.n3);
    let psi = DftRing::root_of_order(&ring, p.n2).expect("N₂ divides N₃");
    let xi = DftRing::root_of_order(&ring, s * p.n2).expect("sN₂ divides N₃");
    let plan = plan_dft(p.n2, &ring)?;
    let scheme = ChunkScheme::Interleaved {
        stride: p.n2 as usize,
    };
    // Embed: stride-N₂ interleaving (free); the chunks have low degree
    let chunks_a = embed_split(a.coeffs(), &ring, scheme, p.n2 as usize);
    let chunks_b = embed_split(b.coeffs(), &ring, scheme, p.n2 as usize);
    // Twisted streams: coefficient i of a(ξ·x̄) is ā_i·ξ^i
    let twist = |chunks: &[RingElement], ledger: &mut CostLedger| -> Vec<RingElement> {
        chunks
            .iter()
            .enumerate()
            .map(|(i, c)| ring.apply_root_power(c, &xi, i as u64, ledger))
            .collect()
    };
    let chunks_a2 = twist(&chunks_a, ledger);
    let chunks_b2 = twist(&chunks_b, ledger);
    // Compute the four forward DFTs of order N₂
    let ta = dft::dft(&ring, &plan, &psi, &chunks_a, ledger)?;
    let ta2 = dft::dft(&ring, &plan, &psi, &chunks_a2, ledger)?;
    let tb = dft::dft(&ring, &plan, &psi, &chunks_b, ledger)?;
    let tb2 = dft::dft(&ring, &plan, &psi, &chunks_b2, ledger)?;
    // Multiply: 2N₂ recursive products
    let cpp_t: Vec<RingElement> = ta
        .iter()
        .zip(&tb)
        .map(|(u, v)| ring_mul_full(&ring, u, v, recurse, ledger))
        .collect();
    let cp_t: Vec<RingElement> = ta2
        .iter()
        .zip(&tb2)
        .map(|(u, v)| ring_mul_full(&ring, u, v, recurse, ledger))
        .collect();
    // Two inverse DFTs
    let cpp = dft::dft_inverse(&ring, &plan, &psi, &cpp_t, ledger)?;
    let cp = dft::dft_inverse(&ring, &plan, &psi, &cp_t, ledger)?;
    // Back-transform: division-free recovery and fold
    let cbar = ck_recover(&ring, &cpp, &cp, &xi, s, p.n2, ledger);
    // Unembed: substituting y ↦ x^{N₂} interleaves monomials of pairwise
    // different degrees — a pure reindexing
    let out_len = a.len() + b.len() - 1;
    let out = unembed(&cbar, &ring, scheme, out_len, ledger);
    Ok(Poly::new(field, out))
}

/// Recover the plain chunk product ĉ from the cyclic products of the two
/// streams, then fold z^{N₂} ↦ y.
///
/// With η = ξ^{N₂}: c̄''_i = ĉ_i + ĉ_{N₂+i} and ξ^{−i}c̄'_i = ĉ_i + η·ĉ_{N₂+i},
/// so (c̄''_i − ξ^{−i}c̄'_i) = (1−η)·ĉ_{N₂+i}.  The division by 1−η is
/// performed without ring divisions through Φ_s(1) = τ:
/// 1/(1−η) = (1/τ)·Π_{2≤t<s, (t,s)=1}(1−η^t), each factor applied as
/// v ↦ v − η^t·v.
fn ck_recover(
    ring: &QuotientRing,
    cpp: &[RingElement],
    cp: &[RingElement],
    xi: &crate::rings::MonomialRoot,
    s: u64,
    n2: u64,
    ledger: &mut CostLedger,
) -> Vec<RingElement> {
    let tau = {
        let factors = meta::factorize(s);
        if factors.len() == 1 {
            factors[0].0
        } else {
            1
        }
    };
    let coprime: Vec<u64> = (2..s).filter(|&t| gcd_u64(t, s) == 1).collect();
    let xi_inv = ring.root_inv(xi);
    let mut lo = Vec::with_capacity(n2 as usize);
    let mut hi = Vec::with_capacity(n2 as usize);
    for i in 0..n2 as usize {
        let twisted_back = ring.apply_root_power(&cp[i], &xi_inv, i as u64, ledger);
        let mut v = ring.sub_elems(&cpp[i], &twisted_back, ledger);
        for &t in &coprime {
            let shifted = ring.apply_root_power(&v, xi, n2 * t, ledger);
            v = ring.sub_elems(&v, &shifted, ledger);
        }
        if tau > 1 {
            v = ring
                .scale_by_inverse_of(&v, tau, ledger)
                .expect("the characteristic does not divide τ");
        }
        let l = ring.sub_elems(&cpp[i], &v, ledger);
        hi.push(v);
        lo.push(l);
    }
    // c̄_i = ĉ_i + y·ĉ_{i+N₂}; the shifted part has low degree, so no
    // modulus overflow occurs
    let y = DftRing::root_of_order(ring, ring.root_order()).expect("x itself");
    (0..n2 as usize)
        .map(|i| {
            let shifted = ring.apply_root_power(&hi[i], &y, 1, ledger);
            ring.add_elems(&lo[i], &shifted, ledger)
        })
        .collect()
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

// ----- generalized engine ----------------------------------------------------

/// A configuration of the generic embed → transform → multiply →
/// back-transform → unembed pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Transform in the ground field itself (N′ = 1).
    DirectDft { s: u64 },
    /// Negacyclic chunk rings, one DFT pair, N₂ products.
    SchonhageStrassen,
    /// Trinomial chunk rings, order-3N₂ DFTs, 2N₂ products.
    SchonhageChar2,
    /// Cyclotomic chunk rings, two evaluation streams of N₂ products each.
    CantorKaltofen { s: u64 },
}

/// Run the generic pipeline for the chosen strategy.  Each strategy
/// reproduces the corresponding concrete engine operation for operation,
/// including recursion (children run through the generalized engine with
/// the same strategy).
pub fn mul_generalized(
    a: &Poly,
    b: &Poly,
    strategy: Strategy,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    check_same_field(a, b);
    with_level(ledger, |l| gen_inner(a, b, strategy, l))
}

fn gen_inner(
    a: &Poly,
    b: &Poly,
    strategy: Strategy,
    ledger: &mut CostLedger,
) -> Result<Poly, AlgoError> {
    let n = a.len().max(b.len()) as u64;
    match strategy {
        Strategy::DirectDft { s } => direct_core(a, b, s, ledger),
        Strategy::SchonhageStrassen => {
            if a.field().characteristic() == 2 {
                return Err(AlgoError::CharacteristicTwoUnsupported);
            }
            if n < RECURSION_CUTOFF {
                return Ok(naive_inner(a, b, ledger));
            }
            let mut recurse = |x: &Poly, y: &Poly, led: &mut CostLedger| -> Poly {
                let m = x.len().max(y.len()) as u64;
                if m < RECURSION_CUTOFF || CONTRACTION_FACTOR * m >= n {
                    naive_inner(x, y, led)
                } else {
                    gen_inner(x, y, strategy, led).expect("recursion preserves preconditions")
                }
            };
            ss_core(a, b, &mut recurse, ledger)
        }
        Strategy::SchonhageChar2 => {
            if a.field().characteristic() != 2 {
                return Err(AlgoError::CharacteristicTwoRequired);
            }
            if n < RECURSION_CUTOFF {
                return Ok(naive_inner(a, b, ledger));
            }
            let mut recurse = |x: &Poly, y: &Poly, led: &mut CostLedger| -> Poly {
                let m = x.len().max(y.len()) as u64;
                if m < RECURSION_CUTOFF || CONTRACTION_FACTOR * m >= n {
                    naive_inner(x, y, led)
                } else {
                    gen_inner(x, y, strategy, led).expect("recursion preserves preconditions")
                }
            };
            char2_core(a, b, &mut recurse, ledger)
        }
        Strategy::CantorKaltofen { s } => {
            let ch = a.field().characteristic();
            if ch != 0 && s % ch == 0 {
                return Err(AlgoError::CharacteristicDividesBase { s });
            }
            if n < ck_threshold(s) {
                return Ok(naive_inner(a, b, ledger));
            }
            let mut recurse = |x: &Poly, y: &Poly, led: &mut CostLedger| -> Poly {
                let m = x.len().max(y.len()) as u64;
                if !ck_child_recurses(m, s) {
                    naive_inner(x, y, led)
                } else {
                    gen_inner(x, y, strategy, led).expect("recursion preserves preconditions")
                }
            };
            ck_core(a, b, s, &mut recurse, ledger)
        }
    }
}

// ----- dispatch ---------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Naive,
    DirectDft,
    SchonhageStrassen,
    SchonhageChar2,
    CantorKaltofen,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::DirectDft => "dft",
            Algorithm::SchonhageStrassen => "ss",
            Algorithm::SchonhageChar2 => "schonhage2",
            Algorithm::CantorKaltofen => "ck",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DispatchChoice {
    pub algorithm: Algorithm,
    /// Power base for DirectDft / CantorKaltofen (0 otherwise).
    pub s: u64,
    /// Field the transform runs over: the ground field, or a quadratic
    /// extension of a prime field when only that hosts the needed roots.
    pub host: Field,
}

/// Pick an engine for multiplying degree-(n−1) polynomials over the field:
/// naive below the cutoff; evaluation/interpolation when the ground field
/// or a quadratic extension has a certified-cheap root of sufficient
/// order; the trinomial engine in characteristic 2; the negacyclic engine
/// otherwise.  The cyclotomic engine is the universal fallback and is
/// always available explicitly.
pub fn dispatch(field: &Field, n: u64) -> DispatchChoice {
    if n < RECURSION_CUTOFF {
        return DispatchChoice {
            algorithm: Algorithm::Naive,
            s: 0,
            host: field.clone(),
        };
    }
    let mut hosts = vec![field.clone()];
    if let crate::fields::FieldKind::Prime { p } = field.kind() {
        if let Ok(ext) = Field::extension(*p, 2) {
            hosts.push(ext);
        }
    }
    for host in hosts {
        for s in [2u64, 3] {
            let len = direct_dft_params(n, s).transform_len;
            if DftRing::root_of_order(&host, len).is_none() {
                continue;
            }
            // suitability threshold 2s·n·log n, in line with the
            // Cooley-Tukey bound for s-smooth orders
            if let Ok((true, _)) = meta::certify_suitable(&host, len, (2 * s) as f64) {
                return DispatchChoice {
                    algorithm: Algorithm::DirectDft,
                    s,
                    host,
                };
            }
        }
    }
    if field.characteristic() == 2 {
        DispatchChoice {
            algorithm: Algorithm::SchonhageChar2,
            s: 0,
            host: field.clone(),
        }
    } else {
        DispatchChoice {
            algorithm: Algorithm::SchonhageStrassen,
            s: 0,
            host: field.clone(),
        }
    }
}

/// Multiply with the dispatched engine, lifting through a quadratic
/// extension when dispatch chose one.
pub fn mul_auto(a: &Poly, b: &Poly, ledger: &mut CostLedger) -> Result<Poly, AlgoError> {
    check_same_field(a, b);
    let field = a.field();
    let n = a.len().max(b.len()) as u64;
    let choice = dispatch(field, n);
    match choice.algorithm {
        Algorithm::Naive => Ok(mul_naive(a, b, ledger)),
        Algorithm::DirectDft => {
            if choice.host == *field {
                mul_direct_dft_with_base(a, b, choice.s, ledger)
            } else {
                let lift = |p: &Poly| -> Poly {
                    let coeffs = p
                        .coeffs()
                        .iter()
                        .map(|c| match c {
                            FieldElement::Prime(v) => {
                                choice.host.ext_element(&[*v]).expect("prime subfield embeds")
                            }
                            _ => unreachable!("extension hosts are built over prime fields"),
                        })
                        .collect();
                    Poly::new(choice.host.clone(), coeffs)
                };
                let la = lift(a);
                let lb = lift(b);
                let prod = mul_direct_dft_with_base(&la, &lb, choice.s, ledger)?;
                let coeffs = prod
                    .coeffs()
                    .iter()
                    .map(|c| match c {
                        FieldElement::Ext(v) => {
                            assert!(
                                v[1..].iter().all(|&x| x == 0),
                                "product of base-field polynomials stays in the base field"
                            );
                            FieldElement::Prime(v[0])
                        }
                        _ => unreachable!(),
                    })
                    .collect();
                Ok(Poly::new(field.clone(), coeffs))
            }
        }
        Algorithm::SchonhageChar2 => mul_schonhage_char2(a, b, ledger),
        Algorithm::SchonhageStrassen => mul_schonhage_strassen(a, b, ledger),
        Algorithm::CantorKaltofen => mul_cantor_kaltofen_default(a, b, ledger),
    }
}

/// Human-readable description of the decomposition an engine would use.
pub fn explain_plan(field: &Field, n: u64, algorithm: Algorithm, s: u64) -> String {
    let mut out = String::new();
    match algorithm {
        Algorithm::Naive => {
            out.push_str(&format!("naive schoolbook multiplication, n = {}\n", n));
        }
        Algorithm::DirectDft => {
            let p = direct_dft_params(n, s);
            out.push_str(&format!(
                "direct DFT: s = {}, nu = {}, transform length {}\n",
                p.s, p.nu, p.transform_len
            ));
            match plan_dft(p.transform_len, field) {
                Ok(plan) => out.push_str(&plan.render()),
                Err(e) => out.push_str(&format!("  (no plan: {})\n", e)),
            }
        }
        Algorithm::SchonhageStrassen => {
            for (i, lvl) in ss_chain(n).iter().enumerate() {
                out.push_str(&format!(
                    "level {}: N = {}, ring dim N1 = {}, transform N2 = {}, chunk width {}\n",
                    i + 1,
                    lvl.padded_len,
                    lvl.ring_dim,
                    lvl.transform_len,
                    lvl.chunk_width
                ));
            }
            out.push_str("remaining products are naive\n");
        }
        Algorithm::SchonhageChar2 => {
            for (i, lvl) in char2_chain(n).iter().enumerate() {
                out.push_str(&format!(
                    "level {}: N = 3^{} = {}, ring N1 = {}, N2 = {} (2N2 of 3N2 products)\n",
                    i + 1,
                    lvl.nu,
                    lvl.base_len,
                    lvl.ring_n,
                    lvl.n2
                ));
            }
            out.push_str("remaining products are naive\n");
        }
        Algorithm::CantorKaltofen => {
            for (i, lvl) in ck_chain(n, s).iter().enumerate() {
                out.push_str(&format!(
                    "level {}: s^nu = {}^{} (dim {}), N1 = {}, N2 = {}, N3 = {}\n",
                    i + 1,
                    lvl.s,
                    lvl.nu,
                    lvl.dim,
                    lvl.n1,
                    lvl.n2,
                    lvl.n3
                ));
            }
            out.push_str("remaining products are naive\n");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::f4;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    #[test]
    fn naive_examples() {
        let f5 = f(5);
        let mut ledger = CostLedger::new();
        // (1+x)(1+4x) = 1 + 0x + 4x^2
        let a = Poly::from_i64(&f5, &[1, 1]);
        let b = Poly::from_i64(&f5, &[1, 4]);
        assert_eq!(mul_naive(&a, &b, &mut ledger), Poly::from_i64(&f5, &[1, 0, 4]));

        let q = Field::rationals();
        let a = Poly::from_i64(&q, &[1, 1]);
        assert_eq!(
            mul_naive(&a, &a, &mut ledger),
            Poly::from_i64(&q, &[1, 2, 1])
        );

        // zero times anything is the zero polynomial of full length
        let z = Poly::zero(&f5, 3);
        let b = Poly::random(&f5, 3, &mut ChaCha8Rng::seed_from_u64(0));
        let prod = mul_naive(&z, &b, &mut ledger);
        assert_eq!(prod.len(), 5);
        assert!(prod.coeffs().iter().all(|c| f5.is_zero(c)));
    }

    #[test]
    fn naive_charges_exactly_n2_and_n_minus_1_squared() {
        let f17 = f(17);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=64usize {
            let a = Poly::random(&f17, n, &mut rng);
            let b = Poly::random(&f17, n, &mut rng);
            let mut ledger = CostLedger::new();
            mul_naive(&a, &b, &mut ledger);
            assert_eq!(ledger.nonscalar(), (n * n) as u64);
            assert_eq!(ledger.additive_and_scalar(), ((n - 1) * (n - 1)) as u64);
        }
    }

    #[test]
    fn direct_dft_counts_and_oracle() {
        let f17 = f(17);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // F_17, n = 4, N = 8: matches naive, exactly 8 nonscalar products
        for _ in 0..50 {
            let a = Poly::random(&f17, 4, &mut rng);
            let b = Poly::random(&f17, 4, &mut rng);
            let mut oracle_ledger = CostLedger::new();
            let expect = mul_naive(&a, &b, &mut oracle_ledger);
            let mut ledger = CostLedger::new();
            let got = mul_direct_dft_with_base(&a, &b, 2, &mut ledger).unwrap();
            assert_eq!(got, expect);
            assert_eq!(ledger.nonscalar(), 8);
        }
        // F_12289, n = 256
        let f12289 = f(12289);
        let a = Poly::random(&f12289, 256, &mut rng);
        let b = Poly::random(&f12289, 256, &mut rng);
        let mut ledger = CostLedger::new();
        let got = mul_direct_dft_with_base(&a, &b, 2, &mut ledger).unwrap();
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        assert_eq!(got, expect);
        assert_eq!(ledger.nonscalar(), 512);

        // capability error when no root exists
        let q = Field::rationals();
        let a = Poly::random(&q, 4, &mut rng);
        assert!(matches!(
            mul_direct_dft_with_base(&a, &a, 2, &mut CostLedger::new()),
            Err(AlgoError::NoSuitableRoot { .. })
        ));
    }

    #[test]
    fn schonhage_strassen_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = Field::rationals();
        let a = Poly::random(&q, 64, &mut rng);
        let b = Poly::random(&q, 64, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        let mut ledger = CostLedger::new();
        assert_eq!(mul_schonhage_strassen(&a, &b, &mut ledger).unwrap(), expect);

        let f5 = f(5);
        let a = Poly::random(&f5, 100, &mut rng);
        let b = Poly::random(&f5, 100, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        let mut ledger = CostLedger::new();
        assert_eq!(mul_schonhage_strassen(&a, &b, &mut ledger).unwrap(), expect);

        // characteristic 2 is rejected
        let f2 = f(2);
        let a = Poly::random(&f2, 16, &mut rng);
        assert_eq!(
            mul_schonhage_strassen(&a, &a, &mut CostLedger::new()).unwrap_err(),
            AlgoError::CharacteristicTwoUnsupported
        );
    }

    #[test]
    fn schonhage_strassen_depth_at_1024() {
        let f5 = f(5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = Poly::random(&f5, 1024, &mut rng);
        let b = Poly::random(&f5, 1024, &mut rng);
        let mut ledger = CostLedger::new();
        mul_schonhage_strassen(&a, &b, &mut ledger).unwrap();
        assert!(ledger.depth() <= 5);
        assert_eq!(ledger.depth(), ss_expected_depth(1024));
    }

    #[test]
    fn char2_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f2 = f(2);
        let a = Poly::random(&f2, 50, &mut rng);
        let b = Poly::random(&f2, 50, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        let mut ledger = CostLedger::new();
        assert_eq!(mul_schonhage_char2(&a, &b, &mut ledger).unwrap(), expect);

        let f4 = f4();
        let a = Poly::random(&f4, 30, &mut rng);
        let b = Poly::random(&f4, 30, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        let mut ledger = CostLedger::new();
        assert_eq!(mul_schonhage_char2(&a, &b, &mut ledger).unwrap(), expect);

        let f5 = f(5);
        let a = Poly::random(&f5, 16, &mut rng);
        assert_eq!(
            mul_schonhage_char2(&a, &a, &mut CostLedger::new()).unwrap_err(),
            AlgoError::CharacteristicTwoRequired
        );
    }

    #[test]
    fn char2_issues_2n2_products_per_level() {
        let f2 = f(2);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [8u64, 20, 50, 100] {
            let a = Poly::random(&f2, n as usize, &mut rng);
            let b = Poly::random(&f2, n as usize, &mut rng);
            let mut ledger = CostLedger::new();
            mul_schonhage_char2(&a, &b, &mut ledger).unwrap();
            let chain = char2_chain(n);
            let mut instances = 1u64;
            for (idx, lvl) in chain.iter().enumerate() {
                let issued = ledger.level_entries(idx + 2);
                assert_eq!(
                    issued,
                    instances * 2 * lvl.n2,
                    "n = {}, level {}",
                    n,
                    idx + 2
                );
                instances *= 2 * lvl.n2;
            }
        }
    }

    #[test]
    fn cantor_kaltofen_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = Field::rationals();
        let a = Poly::random(&q, 64, &mut rng);
        let b = Poly::random(&q, 64, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        let mut ledger = CostLedger::new();
        assert_eq!(mul_cantor_kaltofen(&a, &b, 2, &mut ledger).unwrap(), expect);

        let f2 = f(2);
        let a = Poly::random(&f2, 64, &mut rng);
        let b = Poly::random(&f2, 64, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        let mut ledger = CostLedger::new();
        assert_eq!(mul_cantor_kaltofen(&a, &b, 3, &mut ledger).unwrap(), expect);

        let f5 = f(5);
        assert_eq!(
            mul_cantor_kaltofen(&a, &b, 2, &mut CostLedger::new()).unwrap_err(),
            AlgoError::CharacteristicDividesBase { s: 2 }
        );
        let a = Poly::random(&f5, 40, &mut rng);
        let b = Poly::random(&f5, 40, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        assert_eq!(
            mul_cantor_kaltofen(&a, &b, 2, &mut CostLedger::new()).unwrap(),
            expect
        );
    }

    #[test]
    fn cantor_kaltofen_large_base() {
        let f7 = f(7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Poly::random(&f7, 1000, &mut rng);
        let b = Poly::random(&f7, 1000, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        let mut ledger = CostLedger::new();
        assert_eq!(mul_cantor_kaltofen(&a, &b, 10, &mut ledger).unwrap(), expect);
    }

    #[test]
    fn engines_commute_and_respect_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f5 = f(5);
        let a = Poly::random(&f5, 20, &mut rng);
        let b = Poly::random(&f5, 20, &mut rng);
        let ab = mul_schonhage_strassen(&a, &b, &mut CostLedger::new()).unwrap();
        let ba = mul_schonhage_strassen(&b, &a, &mut CostLedger::new()).unwrap();
        assert_eq!(ab, ba);

        let one = Poly::from_i64(&f5, &[1]);
        let a1 = mul_naive(&a, &one, &mut CostLedger::new());
        assert_eq!(a1.coeffs(), a.coeffs());
    }

    #[test]
    fn generalized_reproduces_concrete_engines() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        // direct DFT over F_17, n = 4
        let f17 = f(17);
        let a = Poly::random(&f17, 4, &mut rng);
        let b = Poly::random(&f17, 4, &mut rng);
        let mut l1 = CostLedger::new();
        let mut l2 = CostLedger::new();
        let r1 = mul_direct_dft_with_base(&a, &b, 2, &mut l1).unwrap();
        let r2 = mul_generalized(&a, &b, Strategy::DirectDft { s: 2 }, &mut l2).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(l1.total(), l2.total());
        assert_eq!(l1.nonscalar(), l2.nonscalar());

        // negacyclic over the rationals, n = 64
        let q = Field::rationals();
        let a = Poly::random(&q, 64, &mut rng);
        let b = Poly::random(&q, 64, &mut rng);
        let mut l1 = CostLedger::new();
        let mut l2 = CostLedger::new();
        let r1 = mul_schonhage_strassen(&a, &b, &mut l1).unwrap();
        let r2 = mul_generalized(&a, &b, Strategy::SchonhageStrassen, &mut l2).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(l1.total(), l2.total());
        assert_eq!(l1.per_level(), l2.per_level());

        // trinomial strategy over F_2, n = 50
        let f2 = f(2);
        let a = Poly::random(&f2, 50, &mut rng);
        let b = Poly::random(&f2, 50, &mut rng);
        let mut l1 = CostLedger::new();
        let mut l2 = CostLedger::new();
        let r1 = mul_schonhage_char2(&a, &b, &mut l1).unwrap();
        let r2 = mul_generalized(&a, &b, Strategy::SchonhageChar2, &mut l2).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(l1.total(), l2.total());
        assert_eq!(l1.per_level(), l2.per_level());

        // cyclotomic strategy over F_5, s = 2, n = 64
        let f5 = f(5);
        let a = Poly::random(&f5, 64, &mut rng);
        let b = Poly::random(&f5, 64, &mut rng);
        let mut l1 = CostLedger::new();
        let mut l2 = CostLedger::new();
        let r1 = mul_cantor_kaltofen(&a, &b, 2, &mut l1).unwrap();
        let r2 = mul_generalized(&a, &b, Strategy::CantorKaltofen { s: 2 }, &mut l2).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(l1.total(), l2.total());
        assert_eq!(l1.per_level(), l2.per_level());
    }

    #[test]
    fn generalized_degenerate_case_is_one_multiplication() {
        let f17 = f(17);
        let a = Poly::from_i64(&f17, &[3]);
        let b = Poly::from_i64(&f17, &[5]);
        let mut ledger = CostLedger::new();
        let out = mul_generalized(&a, &b, Strategy::DirectDft { s: 2 }, &mut ledger).unwrap();
        assert_eq!(out, Poly::from_i64(&f17, &[15]));
        assert_eq!(ledger.nonscalar(), 1);
    }

    #[test]
    fn dispatch_examples() {
        let f12289 = f(12289);
        assert_eq!(dispatch(&f12289, 1000).algorithm, Algorithm::DirectDft);
        let f2 = f(2);
        assert_eq!(dispatch(&f2, 1000).algorithm, Algorithm::SchonhageChar2);
        let q = Field::rationals();
        assert_eq!(dispatch(&q, 1000).algorithm, Algorithm::SchonhageStrassen);
        assert_eq!(dispatch(&q, 4).algorithm, Algorithm::Naive);
    }

    #[test]
    fn auto_handles_quadratic_extension_hosts() {
        // F_11 has almost no roots, but F_121 hosts order-16 transforms
        let f11 = f(11);
        let choice = dispatch(&f11, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = Poly::random(&f11, 8, &mut rng);
        let b = Poly::random(&f11, 8, &mut rng);
        let expect = mul_naive(&a, &b, &mut CostLedger::new());
        let mut ledger = CostLedger::new();
        let got = mul_auto(&a, &b, &mut ledger).unwrap();
        assert_eq!(got, expect);
        if choice.algorithm == Algorithm::DirectDft {
            assert_eq!(choice.host.extension_degree(), 2);
        }
    }
}
