//! Small integer arithmetic: sieves, residue symbols, square-free tests and
//! factorisation of machine-sized integers.

use num_integer::Integer;

/// All primes `p <= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest-prime-factor table for `0..=limit` (entries 0 and 1 are 0).
pub fn smallest_prime_factors(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=limit {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            if p > si || (p as usize) * i > limit {
                break;
            }
            spf[p as usize * i] = p;
        }
    }
    spf
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i128, n: i128) -> i8 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut t: i8 = 1;
    while a != 0 {
        let z = a.trailing_zeros();
        a >>= z;
        if z % 2 == 1 {
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(d/n)`, defined for all integers including `n <= 0`
/// and even `n`.
pub fn kronecker(d: i64, n: i64) -> i8 {
    let mut a = d as i128;
    let mut b = n as i128;
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut k: i8 = 1;
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let v = b.trailing_zeros();
    b >>= v;
    if v % 2 == 1 {
        let r = a.rem_euclid(8);
        if r == 3 || r == 5 {
            k = -k;
        }
    }
    if b == 1 {
        return k;
    }
    a = a.rem_euclid(b);
    k * jacobi(a, b)
}

/// Quadratic character table mod an odd prime `p`: entry `x` is `(x/p)`.
pub fn legendre_table(p: u64, out: &mut Vec<i8>) {
    let p = p as usize;
    out.clear();
    out.resize(p, -1);
    out[0] = 0;
    // i^2 tracked incrementally: (i+1)^2 = i^2 + 2i + 1.
    let mut sq = 0usize;
    for i in 1..=(p - 1) / 2 {
        sq += 2 * i - 1;
        if sq >= p {
            sq %= p;
        }
        out[sq] = 1;
    }
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

pub fn is_square_u128(n: u128) -> bool {
    let r = isqrt_u128(n);
    r * r == n
}

/// Exponent of the prime `p` in `n` (`n != 0`).
pub fn valuation(mut n: i128, p: i128) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorisation of `n >= 1`, ascending by prime.
pub fn factor(n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    let mut n = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = vec![n];
    let mut found: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            found.push(m);
            continue;
        }
        let f = pollard_rho(m);
        stack.push(f);
        stack.push(m / f);
    }
    found.sort_unstable();
    for p in found {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factor(n).iter().all(|&(_, e)| e == 1)
}

/// Writes `n = s * w^2` with `s` square-free (sign kept on `s`); returns `(s, w)`.
pub fn squarefree_decomposition(n: i128) -> (i128, u128) {
    assert!(n != 0);
    let sign = n.signum();
    let mut m = n.unsigned_abs();
    let mut core: u128 = 1;
    let mut w: u128 = 1;
    let mut p: u128 = 2;
    // Trial division up to the cube root; the cofactor then has at most two
    // prime factors, so it is a square exactly when it is a perfect square.
    while p * p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            for _ in 0..e / 2 {
                w *= p;
            }
            if e % 2 == 1 {
                core *= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 && is_square_u128(m) {
        w *= isqrt_u128(m);
    } else {
        core *= m;
    }
    (sign * core as i128, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_naive(a: i64, p: i64) -> i8 {
        let a = a.rem_euclid(p);
        if a == 0 {
            return 0;
        }
        if (1..p).any(|x| (x * x) % p == a) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_matches_euler_criterion_at_odd_primes() {
        for p in primes_up_to(200).into_iter().skip(1) {
            for a in -60i64..60 {
                assert_eq!(kronecker(a, p as i64), legendre_naive(a, p as i64), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn kronecker_small_cases() {
        assert_eq!(kronecker(12, 5), -1);
        assert_eq!(kronecker(-4, 7), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(17, 2), 1);
        assert_eq!(kronecker(-3, -1), -1);
        assert_eq!(kronecker(5, -1), 1);
        assert_eq!(kronecker(7, 1), 1);
        assert_eq!(kronecker(4, 2), 0);
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(3, 0), 0);
    }

    #[test]
    fn kronecker_is_multiplicative_in_n() {
        for d in [-23i64, -15, -4, 5, 8, 12, 13, 21] {
            for m in -20i64..20 {
                for n in -20i64..20 {
                    assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
                }
            }
        }
    }

    #[test]
    fn factor_roundtrip() {
        for n in [1u64, 2, 12, 97, 1001, 477121, 531440999, 8519438341, 600851475143, (1 << 61) - 1] {
            let f = factor(n);
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
            assert!(f.iter().all(|&(p, _)| is_prime(p)));
        }
    }

    #[test]
    fn squarefree_parts() {
        assert_eq!(squarefree_decomposition(7), (7, 1));
        assert_eq!(squarefree_decomposition(-9), (-1, 3));
        assert_eq!(squarefree_decomposition(72), (2, 6));
        assert_eq!(squarefree_decomposition(-14), (-14, 1));
        assert_eq!(squarefree_decomposition(1009 * 1009 * 3), (3, 1009));
    }

    #[test]
    fn spf_table() {
        let spf = smallest_prime_factors(100);
        assert_eq!(spf[97], 97);
        assert_eq!(spf[91], 7);
        assert_eq!(spf[64], 2);
    }

    #[test]
    fn legendre_table_agrees() {
        let mut t = Vec::new();
        for p in [3u64, 5, 7, 13, 101] {
            legendre_table(p, &mut t);
            for x in 0..p as i64 {
                assert_eq!(t[x as usize], legendre_naive(x, p as i64));
            }
        }
    }
}
