//! Brute-force number theory for toy moduli. These routines serve as
//! referees, so they deliberately avoid any shortcut the deciders use.

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Multiplicative order of `g` modulo `p` by repeated multiplication.
pub fn multiplicative_order(g: u64, p: u64) -> Option<u64> {
    if gcd(g % p, p) != 1 {
        return None;
    }
    let mut x = g % p;
    let mut k = 1;
    while x != 1 {
        x = mod_mul(x, g, p);
        k += 1;
        if k > p {
            return None;
        }
    }
    Some(k)
}

pub fn is_generator(g: u64, p: u64) -> bool {
    is_prime(p) && multiplicative_order(g, p) == Some(p - 1)
}

/// Smallest generator of `Z_p^*`.
pub fn find_generator(p: u64) -> Option<u64> {
    (2..p).find(|&g| is_generator(g, p))
}

/// `x ∈ [0, p-1)` with `g^x ≡ y (mod p)`, by exhaustive search.
pub fn discrete_log_brute(g: u64, y: u64, p: u64) -> Option<u64> {
    let y = y % p;
    let mut x = 1 % p;
    for k in 0..p - 1 {
        if x == y {
            return Some(k);
        }
        x = mod_mul(x, g, p);
    }
    None
}

/// Whether some `r` has `r² ≡ x (mod n)`, by exhaustive search.
pub fn is_quadratic_residue_brute(x: u64, n: u64) -> bool {
    (0..n).any(|r| mod_mul(r, r, n) == x % n)
}

/// `(p, q)` with `p < q` distinct odd primes and `pq = n`.
pub fn factor_semiprime(n: u64) -> Option<(u64, u64)> {
    let p = (3..n).step_by(2).take_while(|d| d * d <= n).find(|d| n % d == 0)?;
    let q = n / p;
    (p != q && q % 2 == 1 && is_prime(p) && is_prime(q)).then_some((p, q))
}

/// Units of `Z_n`.
pub fn units(n: u64) -> Vec<u64> {
    (1..n).filter(|&x| gcd(x, n) == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(mod_pow(3, 200, 7), 2);
        assert!(is_prime(251) && is_prime(509) && !is_prime(255) && !is_prime(1));
        assert!(is_generator(6, 251));
        assert!(!is_generator(4, 11));
        assert_eq!(find_generator(11), Some(2));
        assert_eq!(discrete_log_brute(2, 8, 11), Some(3));
        assert_eq!(factor_semiprime(15), Some((3, 5)));
        assert_eq!(factor_semiprime(33), Some((3, 11)));
        assert_eq!(factor_semiprime(9), None);
        assert_eq!(factor_semiprime(14), None);
        assert!(is_quadratic_residue_brute(4, 15) && !is_quadratic_residue_brute(2, 15));
        assert_eq!(units(15).len(), 8);
    }
}
