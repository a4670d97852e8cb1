//! Primality testing and integer factorisation helpers.
//!
//! Sizes here are desk scale: sieve primes stay below 10^4 and the numbers
//! that reach `factor_bigint` are form values at small heights, so trial
//! division plus a Pollard-rho fallback is all that is ever needed.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest prime allowed in a sieve configuration.
pub(crate) const SIEVE_PRIME_LIMIT: u64 = 10_000;

/// All primes below `SIEVE_PRIME_LIMIT`, ascending.
pub(crate) fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = SIEVE_PRIME_LIMIT as usize;
        let mut composite = vec![false; n];
        let mut primes = Vec::new();
        for p in 2..n {
            if !composite[p] {
                primes.push(p as u64);
                let mut m = p * p;
                while m < n {
                    composite[m] = true;
                    m += p;
                }
            }
        }
        primes
    })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64 (the 12-witness set covers the range).
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Pollard rho (Brent variant) for an odd composite with no factor < 10^4.
fn pollard_rho(n: u64) -> u64 {
    debug_assert!(!is_prime_u64(n));
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_u64_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_u64_into(d, out);
    factor_u64_into(n / d, out);
}

/// Factor |n| into prime powers with u64 primes, ascending by prime.
///
/// Trial-divides by every prime below 10^4 first; any surviving cofactor
/// must fit in a u64 (after repeated splitting) or the input is rejected.
pub(crate) fn factor_bigint(n: &BigInt) -> Result<Vec<(u64, u32)>> {
    if n.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut rest = n.abs();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for &p in small_primes() {
        if rest == BigInt::from(1) {
            break;
        }
        let big_p = BigInt::from(p);
        let mut e = 0u32;
        loop {
            let (q, r) = num_integer::Integer::div_rem(&rest, &big_p);
            if r.is_zero() {
                rest = q;
                e += 1;
            } else {
                break;
            }
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    if rest != BigInt::from(1) {
        let r64 = rest
            .to_u64()
            .ok_or_else(|| Error::FactorTooLarge(rest.to_string()))?;
        let mut fs = Vec::new();
        factor_u64_into(r64, &mut fs);
        fs.sort_unstable();
        let mut i = 0;
        while i < fs.len() {
            let p = fs[i];
            let mut e = 0u32;
            while i < fs.len() && fs[i] == p {
                e += 1;
                i += 1;
            }
            out.push((p, e));
        }
        out.sort_unstable_by_key(|&(p, _)| p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes_start_correctly() {
        let ps = small_primes();
        assert_eq!(&ps[..6], &[2, 3, 5, 7, 11, 13]);
        assert!(ps.iter().all(|&p| p < SIEVE_PRIME_LIMIT));
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let ps = small_primes();
        let mut idx = 0;
        for n in 0..10_000u64 {
            let in_sieve = idx < ps.len() && ps[idx] == n;
            if in_sieve {
                idx += 1;
            }
            assert_eq!(is_prime_u64(n), in_sieve, "disagree at {n}");
        }
        assert!(is_prime_u64(2_147_483_647)); // 2^31 - 1
        assert!(!is_prime_u64(2_147_483_649));
    }

    #[test]
    fn factors_recompose() {
        for n in [1i64, 2, 12, 97, 1024, 635_318_657, 999_999_937 * 2] {
            let fs = factor_bigint(&BigInt::from(n)).unwrap();
            let mut prod = BigInt::from(1);
            for &(p, e) in &fs {
                prod *= BigInt::from(p).pow(e);
            }
            assert_eq!(prod, BigInt::from(n));
        }
        assert!(factor_bigint(&BigInt::zero()).is_err());
    }
}
