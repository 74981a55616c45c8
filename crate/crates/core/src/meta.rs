//! Number-theoretic metadata: factorization, Euler's totient, cyclotomic
//! polynomials, extension-degree functions, DFT-order suitability and
//! order-sequence candidates.

use crate::dft::{plan_dft, DftError, DftPlan};
use crate::fields::{Field, FieldKind};
use crate::rings::QuotientRing;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetaError {
    #[error("the characteristic divides {n}; no primitive {n}-th root exists in any extension")]
    CharacteristicDividesOrder { n: u64 },
    #[error("iteration did not reach a fixpoint within {limit} steps")]
    Divergent { limit: u64 },
}

/// Trial division; adequate for desk-scale arguments.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization as (prime, exponent) pairs, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            out.extend(prev.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    out
}

/// Euler's totient via factorization.
pub fn totient(n: u64) -> u64 {
    assert!(n >= 1);
    let mut phi = n;
    for (p, _) in factorize(n) {
        phi = phi / p * (p - 1);
    }
    phi
}

/// ⌈log₂ n⌉ for n ≥ 1.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    64 - (n - 1).leading_zeros()
}

fn int_poly_trim(v: &mut Vec<i64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

/// Exact division of integer polynomials (the divisor must be monic and
/// divide exactly).
fn int_poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut r: Vec<i64> = num.to_vec();
    int_poly_trim(&mut r);
    let mut den = den.to_vec();
    int_poly_trim(&mut den);
    assert_eq!(*den.last().unwrap(), 1, "divisor must be monic");
    let deg_d = den.len() - 1;
    assert!(r.len() > deg_d || (r.len() == 1 && r[0] == 0));
    let mut q = vec![0i64; r.len() - deg_d];
    for shift in (0..q.len()).rev() {
        let c = r[shift + deg_d];
        q[shift] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                r[shift + j] -= c * d;
            }
        }
    }
    assert!(r.iter().all(|&c| c == 0), "division was not exact");
    q
}

/// Φ_d for every divisor d of n, computed ascending from x^d − 1.
fn cyclotomic_table(n: u64) -> std::collections::HashMap<u64, Vec<i64>> {
    let mut table = std::collections::HashMap::new();
    for d in divisors(n) {
        // x^d - 1
        let mut num = vec![0i64; d as usize + 1];
        num[0] = -1;
        num[d as usize] = 1;
        let mut acc = num;
        for e in divisors(d) {
            if e < d {
                let phi_e: &Vec<i64> = &table[&e];
                acc = int_poly_div_exact(&acc, phi_e);
            }
        }
        table.insert(d, acc);
    }
    table
}

/// Φ_n with integer coefficients, little-endian.
pub fn cyclotomic_poly(n: u64) -> Vec<i64> {
    assert!(n >= 1);
    cyclotomic_table(n).remove(&n).unwrap()
}

/// Φ_{s^ν} via the substitution Φ_s(x^{s^{ν−1}}).
pub fn cyclotomic(s: u64, nu: u32) -> Vec<i64> {
    assert!(s >= 2 && nu >= 1);
    let base = cyclotomic_poly(s);
    let step = s.pow(nu - 1) as usize;
    let mut out = vec![0i64; (base.len() - 1) * step + 1];
    for (i, &c) in base.iter().enumerate() {
        out[i * step] = c;
    }
    out
}

/// Degree of the extension adjoining a primitive n-th root of unity:
/// φ(n) over the rationals, the multiplicative order of q = p^m modulo n
/// over F_q.  Errors when the characteristic divides n.
pub fn degree_function(field: &Field, n: u64) -> Result<u64, MetaError> {
    assert!(n >= 1);
    let ch = field.characteristic();
    if ch != 0 && n % ch == 0 {
        return Err(MetaError::CharacteristicDividesOrder { n });
    }
    if n == 1 {
        return Ok(1);
    }
    match field.kind() {
        FieldKind::Rationals => Ok(totient(n)),
        _ => {
            let q = field.order().expect("finite field") % n;
            let mut cur = q as u128;
            let limit = totient(n);
            for d in 1..=limit {
                if cur % n as u128 == 1 {
                    return Ok(d);
                }
                cur = cur * q as u128 % n as u128;
            }
            // the order of q in (Z/n)* always divides φ(n)
            unreachable!("multiplicative order exceeded the totient");
        }
    }
}

/// Minimal f(i) over integers 1 ≤ i ≤ n with i·f(i) ≥ n.
pub fn f_vee<F: Fn(u64) -> u64>(f: F, n: u64) -> u64 {
    assert!(n >= 1);
    let mut best: Option<u64> = None;
    for i in 1..=n {
        let fi = f(i);
        if (i as u128) * (fi as u128) >= n as u128 {
            best = Some(match best {
                Some(b) => b.min(fi),
                None => fi,
            });
        }
    }
    best.unwrap_or(0)
}

/// Iterations of f until a fixpoint: the least i with f^(i)(n) = f^(i+1)(n).
pub fn f_star<F: Fn(u64) -> u64>(f: F, n: u64) -> Result<u64, MetaError> {
    assert!(n >= 1);
    let mut cur = n;
    for i in 0..=n {
        let next = f(cur);
        if next == cur {
            return Ok(i);
        }
        cur = next;
    }
    Err(MetaError::Divergent { limit: n })
}

/// Whether the DFT of order n over the field costs at most c·n·log₂ n
/// ring operations, together with the witnessing plan.
pub fn certify_suitable(field: &Field, n: u64, c: f64) -> Result<(bool, DftPlan), DftError> {
    let plan = plan_dft(n, field)?;
    Ok((suitable(&plan, c), plan))
}

/// The same certification over a quotient ring (op counts in ring
/// operations).
pub fn certify_suitable_over_ring(
    ring: &QuotientRing,
    n: u64,
    c: f64,
) -> Result<(bool, DftPlan), DftError> {
    let plan = plan_dft(n, ring)?;
    Ok((suitable(&plan, c), plan))
}

fn suitable(plan: &DftPlan, c: f64) -> bool {
    let n = plan.order;
    let bound = c * n as f64 * (n as f64).log2();
    plan.predicted_ops as f64 <= bound || plan.predicted_ops == 0
}

/// Implied suitability constant predicted_ops / (n log₂ n), if defined.
pub fn implied_constant(plan: &DftPlan) -> Option<f64> {
    let n = plan.order as f64;
    let denom = n * n.log2();
    if denom > 0.0 {
        Some(plan.predicted_ops as f64 / denom)
    } else {
        None
    }
}

/// Declared sparseness bound of an order-sequence candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparsenessBound {
    /// Enforced by [`OrderSequenceCandidate::verify`].
    Constant(f64),
    /// Nearly s(n) = n (the extension towers overshoot it slightly at
    /// small entries); reported, never asserted.
    Reported,
}

#[derive(Debug, Clone)]
pub struct OrderSequenceEntry {
    /// n_i = ext_degree · dft_order.
    pub n: u64,
    /// Degree of the (ring or field) extension hosting the DFT.
    pub ext_degree: u64,
    /// Order of the DFT available in that extension.
    pub dft_order: u64,
    /// f_k(dft_order) where defined.
    pub f_value: Option<u64>,
    /// Implied suitability constant of the planned DFT, where planned.
    pub suitability_c: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OrderSequenceCandidate {
    pub label: String,
    pub declared_sparseness: SparsenessBound,
    pub entries: Vec<OrderSequenceEntry>,
}

impl OrderSequenceCandidate {
    /// Check the defining inequalities n_i < n_{i+1} ≤ s(n_i)·n_i and the
    /// divisibility chain n_i | n_{i+1}.
    pub fn verify(&self) -> Result<(), String> {
        for w in self.entries.windows(2) {
            let (a, b) = (w[0].n, w[1].n);
            if a >= b {
                return Err(format!("entries not increasing: {} then {}", a, b));
            }
            if b % a != 0 {
                return Err(format!("{} does not divide {}", a, b));
            }
            if let SparsenessBound::Constant(s) = self.declared_sparseness {
                let bound = s * a as f64;
                if (b as f64) > bound {
                    return Err(format!(
                        "sparseness violated: {} > {:.1} after {}",
                        b, bound, a
                    ));
                }
            }
        }
        Ok(())
    }

    /// Largest measured ratio n_{i+1}/n_i.
    pub fn measured_sparseness(&self) -> Option<f64> {
        self.entries
            .windows(2)
            .map(|w| w[1].n as f64 / w[0].n as f64)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

/// Order-sequence candidates for the field, truncated at n_max:
/// the q^{2^i}−1 family for finite fields (sparseness s(n) = n), the 2^i
/// family for characteristic ≠ 2, and the 2·3^i family for characteristic
/// ≠ 3.  Sparseness for finite-field tower entries is reported, never
/// asserted constant.
pub fn propose_order_sequences(field: &Field, n_max: u64) -> Vec<OrderSequenceCandidate> {
    let mut out = Vec::new();
    let ch = field.characteristic();

    if let Some(q) = field.order() {
        let mut entries = Vec::new();
        let base_degree = field.extension_degree() as u64;
        for i in 1..=16u32 {
            let ext = 1u64 << i;
            let Some(qe) = checked_pow_u64(q, ext) else { break };
            let order = qe - 1;
            let Some(n) = ext.checked_mul(order) else { break };
            if n > n_max {
                break;
            }
            let host = Field::extension(ch, (base_degree * ext) as u32).ok();
            let suitability = host.as_ref().and_then(|h| {
                plan_dft(order, h).ok().as_ref().and_then(implied_constant)
            });
            let f_value = degree_function(field, order).ok();
            entries.push(OrderSequenceEntry {
                n,
                ext_degree: ext,
                dft_order: order,
                f_value,
                suitability_c: suitability,
            });
        }
        out.push(OrderSequenceCandidate {
            label: format!("2^i·({}^(2^i)−1) tower", q),
            declared_sparseness: SparsenessBound::Reported,
            entries,
        });
    }

    if ch != 2 {
        let mut entries = Vec::new();
        for i in 1..=40u32 {
            let Some(n) = 1u64.checked_shl(i) else { break };
            if n > n_max {
                break;
            }
            let ext = 1u64 << (i / 2); // ceil((i-1)/2)
            let order = 1u64 << ((i - 1) / 2 + 1);
            debug_assert_eq!(ext * order, n);
            // the smallest negacyclic host whose root order covers `order`
            let suitability = QuotientRing::fermat(field.clone(), order / 2)
                .ok()
                .and_then(|ring| plan_dft(order, &ring).ok())
                .as_ref()
                .and_then(implied_constant);
            entries.push(OrderSequenceEntry {
                n,
                ext_degree: ext,
                dft_order: order,
                f_value: degree_function(field, order).ok(),
                suitability_c: suitability,
            });
        }
        out.push(OrderSequenceCandidate {
            label: "2^i (negacyclic hosts)".to_string(),
            declared_sparseness: SparsenessBound::Constant(2.0),
            entries,
        });
    }

    if ch != 3 {
        let mut entries = Vec::new();
        for i in 1..=25u32 {
            let Some(pow3) = checked_pow_u64(3, i as u64) else { break };
            let Some(n) = pow3.checked_mul(2) else { break };
            if n > n_max {
                break;
            }
            let host_pow = 3u64.pow((i - 1) / 2); // hosts x^{2h}+x^h+1
            let order = 3u64.pow((i - 1) / 2 + 1);
            let ext = 2 * 3u64.pow(i / 2); // ceil((i-1)/2)
            debug_assert_eq!(ext * order, n);
            let suitability = QuotientRing::trinomial(field.clone(), host_pow)
                .ok()
                .and_then(|ring| plan_dft(order, &ring).ok())
                .as_ref()
                .and_then(implied_constant);
            entries.push(OrderSequenceEntry {
                n,
                ext_degree: ext,
                dft_order: order,
                f_value: degree_function(field, order).ok(),
                suitability_c: suitability,
            });
        }
        out.push(OrderSequenceCandidate {
            label: "2·3^i (trinomial hosts)".to_string(),
            declared_sparseness: SparsenessBound::Constant(3.0),
            entries,
        });
    }

    out
}

fn checked_pow_u64(base: u64, exp: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totient_examples() {
        assert_eq!(totient(9), 6);
        for p in [2u64, 3, 5, 17, 12289] {
            assert_eq!(totient(p), p - 1);
        }
        for nu in 1..=12 {
            assert_eq!(totient(1 << nu), 1 << (nu - 1));
        }
    }

    #[test]
    fn totient_matches_brute_force() {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        for n in 1..=10_000u64 {
            let brute = (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
            assert_eq!(totient(n), brute, "phi({})", n);
        }
    }

    #[test]
    fn cyclotomic_closed_forms() {
        assert_eq!(cyclotomic(2, 3), vec![1, 0, 0, 0, 1]); // x^4 + 1
        assert_eq!(cyclotomic(3, 2), vec![1, 0, 0, 1, 0, 0, 1]); // x^6 + x^3 + 1
        assert_eq!(cyclotomic(5, 1), vec![1, 1, 1, 1, 1]);
        // prime-power closed forms up to 2^14
        for nu in 1..=14u32 {
            let phi = cyclotomic(2, nu);
            let half = 1usize << (nu - 1);
            let mut expect = vec![0i64; half + 1];
            expect[0] = 1;
            expect[half] = 1;
            assert_eq!(phi, expect);
        }
        for nu in 1..=8u32 {
            let phi = cyclotomic(3, nu);
            let third = 3usize.pow(nu - 1);
            let mut expect = vec![0i64; 2 * third + 1];
            expect[0] = 1;
            expect[third] = 1;
            expect[2 * third] = 1;
            assert_eq!(phi, expect);
        }
    }

    #[test]
    fn cyclotomic_divides_x_n_minus_1() {
        for (s, max_nu) in [(2u64, 14u32), (3, 8), (5, 6), (6, 5), (10, 4), (12, 3)] {
            for nu in 1..=max_nu {
                let n = checked_pow_u64(s, nu as u64).unwrap();
                if n > 1 << 14 {
                    continue;
                }
                let phi = cyclotomic(s, nu);
                assert_eq!(phi.len() as u64 - 1, totient(n));
                let mut x_n_1 = vec![0i64; n as usize + 1];
                x_n_1[0] = -1;
                x_n_1[n as usize] = 1;
                let q = int_poly_div_exact(&x_n_1, &phi); // panics on non-exact division
                assert_eq!(q.len() as u64 - 1, n - totient(n));
            }
        }
    }

    #[test]
    fn degree_function_examples() {
        let q = Field::rationals();
        assert_eq!(degree_function(&q, 8).unwrap(), 4);
        for n in 1..=512u64 {
            assert_eq!(degree_function(&q, n).unwrap(), totient(n));
        }
        let f2 = Field::prime(2).unwrap();
        assert_eq!(degree_function(&f2, 7).unwrap(), 3); // ord_7(2) = 3
        let f17 = Field::prime(17).unwrap();
        assert_eq!(degree_function(&f17, 16).unwrap(), 1); // root already present
        let f5 = Field::prime(5).unwrap();
        assert_eq!(
            degree_function(&f5, 5),
            Err(MetaError::CharacteristicDividesOrder { n: 5 })
        );
    }

    #[test]
    fn degree_function_is_the_least_exponent() {
        let f2 = Field::prime(2).unwrap();
        for n in (3..200u64).step_by(2) {
            let d = degree_function(&f2, n).unwrap();
            let pow = |e: u64| -> u64 {
                let mut acc = 1u128;
                for _ in 0..e {
                    acc = acc * 2 % n as u128;
                }
                acc as u64
            };
            assert_eq!(pow(d), 1 % n);
            for e in 1..d {
                assert_ne!(pow(e), 1, "n = {}", n);
            }
        }
    }

    #[test]
    fn f_vee_closed_forms() {
        assert_eq!(f_vee(|i| i, 9), 3);
        assert_eq!(f_vee(|i| i, 10), 4);
        assert_eq!(f_vee(|_| 1, 5), 1);
        for n in 1..=4096u64 {
            assert_eq!(f_vee(|i| i, n), (n as f64).sqrt().ceil() as u64);
        }
    }

    #[test]
    fn f_star_closed_forms() {
        let halve = |x: u64| x.div_ceil(2);
        assert_eq!(f_star(halve, 8).unwrap(), 3);
        assert_eq!(f_star(halve, 1).unwrap(), 0);
        for n in 1..=16384u64 {
            assert_eq!(f_star(halve, n).unwrap(), ceil_log2(n) as u64, "n = {}", n);
        }
        let sqrt = |x: u64| (x as f64).sqrt().ceil() as u64;
        assert_eq!(f_star(sqrt, 16).unwrap(), 2); // ceil(log log 16)
    }

    #[test]
    fn f_star_divergence_guard() {
        assert!(matches!(
            f_star(|x| x + 1, 10),
            Err(MetaError::Divergent { .. })
        ));
    }

    #[test]
    fn suitability_certificates() {
        // a 2-smooth order of a well-endowed prime field is 2-suitable
        let f = Field::prime(12289).unwrap();
        let (ok, plan) = certify_suitable(&f, 4096, 2.0).unwrap();
        assert!(ok, "predicted {} ops", plan.predicted_ops);
        assert!(plan.predicted_ops as f64 <= 2.0 * 4096.0 * 12.0);
        // vacuous at order one
        let (ok, plan) = certify_suitable(&f, 1, 2.0).unwrap();
        assert!(ok);
        assert_eq!(plan.predicted_ops, 0);
        // implied constants of smooth orders stay bounded
        for n in [16u64, 64, 256, 1024, 4096] {
            let (ok, plan) = certify_suitable(&f, n, 2.0).unwrap();
            assert!(ok, "n = {}", n);
            assert!(implied_constant(&plan).unwrap() <= 2.0);
        }
        // undefined orders error
        assert!(certify_suitable(&f, 5, 2.0).is_err());
    }

    #[test]
    fn order_sequences_for_f3() {
        let f3 = Field::prime(3).unwrap();
        let candidates = propose_order_sequences(&f3, 100);
        let tower = candidates
            .iter()
            .find(|c| c.label.contains("tower"))
            .unwrap();
        // 2·(3² − 1) = 16 fits below 100; 4·(3⁴ − 1) = 320 does not
        assert_eq!(tower.entries.len(), 1);
        assert_eq!(tower.entries[0].n, 16);
        assert_eq!(tower.entries[0].ext_degree, 2);
        assert_eq!(tower.entries[0].dft_order, 8);
        tower.verify().unwrap();
    }

    #[test]
    fn order_sequences_for_odd_characteristic_and_rationals() {
        let f5 = Field::prime(5).unwrap();
        for cand in propose_order_sequences(&f5, 4096) {
            cand.verify().unwrap();
        }
        let neg = propose_order_sequences(&f5, 4096)
            .into_iter()
            .find(|c| c.label.contains("negacyclic"))
            .unwrap();
        assert!(neg.measured_sparseness().unwrap() <= 2.0);

        // over the rationals f(n'') = phi(n'') = n''/2 exactly
        let q = Field::rationals();
        let neg = propose_order_sequences(&q, 1 << 14)
            .into_iter()
            .find(|c| c.label.contains("negacyclic"))
            .unwrap();
        neg.verify().unwrap();
        for entry in &neg.entries {
            assert_eq!(entry.f_value, Some(entry.dft_order / 2));
        }

        // characteristic ≠ 3 also gets the trinomial-host family
        let tri = propose_order_sequences(&q, 1 << 14)
            .into_iter()
            .find(|c| c.label.contains("trinomial"))
            .unwrap();
        tri.verify().unwrap();
        for entry in &tri.entries {
            assert!(entry.f_value.unwrap() <= 2 * entry.dft_order / 3);
        }
    }
}
