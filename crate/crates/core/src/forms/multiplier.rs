//! `SL₂(ℤ)` matrices, the η multiplier system and its fourth power.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer matrix `(a b; c d)` with `ad − bc = 1`, acting by
/// `τ ↦ (aτ + b)/(cτ + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub const IDENTITY: Self = Self { a: 1, b: 0, c: 0, d: 1 };
    pub const T: Self = Self { a: 1, b: 1, c: 0, d: 1 };
    pub const S: Self = Self { a: 0, b: -1, c: 1, d: 0 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        if det != 1 {
            return Err(Error::NotUnimodular { a, b, c, d });
        }
        Ok(Self { a, b, c, d })
    }

    pub fn t_pow(k: i64) -> Self {
        Self { a: 1, b: k, c: 0, d: 1 }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn checked_mul(&self, o: &Self) -> Option<Self> {
        Some(Self {
            a: self.a.checked_mul(o.a)?.checked_add(self.b.checked_mul(o.c)?)?,
            b: self.a.checked_mul(o.b)?.checked_add(self.b.checked_mul(o.d)?)?,
            c: self.c.checked_mul(o.a)?.checked_add(self.d.checked_mul(o.c)?)?,
            d: self.c.checked_mul(o.b)?.checked_add(self.d.checked_mul(o.d)?)?,
        })
    }

    pub fn act(&self, tau: Complex64) -> Complex64 {
        (tau * self.a as f64 + self.b as f64) / self.cocycle(tau)
    }

    /// `cτ + d`.
    pub fn cocycle(&self, tau: Complex64) -> Complex64 {
        tau * self.c as f64 + self.d as f64
    }

    /// Word in `S` and `T^{±1}` of length `1..=max_len`, uniformly per letter.
    pub fn random_word<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> (Self, String) {
        let len = rng.gen_range(1..=max_len.max(1));
        let mut g = Self::IDENTITY;
        let mut word = String::new();
        for _ in 0..len {
            let (m, name) = match rng.gen_range(0..3) {
                0 => (Self::S, "S"),
                1 => (Self::T, "T"),
                _ => (Self::t_pow(-1), "t"),
            };
            g = g * m;
            word.push_str(name);
        }
        if word.is_empty() {
            word.push('I');
        }
        (g, word)
    }

    /// Random matrix with `|c|, |d| ≤ bound`, `c ≠ 0`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Self {
        loop {
            let c = rng.gen_range(-bound..=bound);
            let d = rng.gen_range(-bound..=bound);
            if c == 0 || gcd(c, d) != 1 {
                continue;
            }
            // a·d ≡ 1 (mod c)
            let (g, x, _) = ext_gcd(d, c);
            debug_assert_eq!(g.abs(), 1);
            let mut a = (x * g).rem_euclid(c.abs());
            a += c.abs() * rng.gen_range(-2..=2);
            let b = (a * d - 1) / c;
            let m = Self { a, b, c, d };
            debug_assert_eq!(a * d - b * c, 1);
            return m;
        }
    }
}

impl Mul for UnimodularMatrix {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.checked_mul(&o).expect("matrix entries overflow i64")
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, x, y)` with `a·x + b·y = g = ±gcd(a, b)`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0, s0, t0)
}

/// Kronecker symbol `(a/n)` for arbitrary integers.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return i32::from(a == 1 || a == -1);
    }
    let mut sign = 1;
    let mut n = n as i128;
    let a = a as i128;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
        n >>= twos;
    }
    sign * jacobi(a, n)
}

/// Jacobi symbol `(a/n)` for odd `n > 0`.
fn jacobi(a: i128, n: i128) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut result = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// `exp(2πi·k/24)` for `k` taken mod 24.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnitRoot(u8);

impl UnitRoot {
    pub const ONE: Self = Self(0);

    pub fn new(k: i128) -> Self {
        Self(k.rem_euclid(24) as u8)
    }

    /// Exponent `k` in `exp(πi·k/12)`, in `0..24`.
    pub fn exponent(&self) -> u8 {
        self.0
    }

    pub fn pow(&self, m: i64) -> Self {
        Self::new(self.0 as i128 * m as i128)
    }

    pub fn inv(&self) -> Self {
        Self::new(-(self.0 as i128))
    }

    pub fn to_c64(&self) -> Complex64 {
        let k = self.0 as i32;
        // exact values on the axes
        match k {
            0 => Complex64::new(1.0, 0.0),
            6 => Complex64::new(0.0, 1.0),
            12 => Complex64::new(-1.0, 0.0),
            18 => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / 12.0),
        }
    }
}

impl Mul for UnitRoot {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.0 as i128 + o.0 as i128)
    }
}

impl fmt::Display for UnitRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({}πi/12)", self.0)
    }
}

/// `v(γ)` in `η(γτ) = v(γ)·(cτ + d)^(1/2)·η(τ)`, principal square root.
pub fn eta_multiplier(g: &UnimodularMatrix) -> UnitRoot {
    let (a, b, c, d) = (g.a as i128, g.b as i128, g.c as i128, g.d as i128);
    if c == 0 {
        // γ = ±T^b; for d = −1 the root of −1 contributes i
        return if d == 1 { UnitRoot::new(b) } else { UnitRoot::new(-b - 6) };
    }
    let m24 = |x: i128| x.rem_euclid(24);
    let c2 = m24(m24(c) * m24(c) - 1);
    let bd = m24(m24(b) * m24(d));
    let mut k = if c % 2 != 0 {
        m24(m24(a + d - 3) * m24(c) - bd * c2)
    } else {
        let e = m24(m24(a + d) * m24(c) - bd * c2 + 3 * d - 3 - 3 * m24(c) * m24(d));
        if c < 0 && d < 0 {
            e + 12
        } else {
            e
        }
    };
    let sym = if c % 2 != 0 {
        kronecker(g.d, g.c.abs())
    } else {
        kronecker(g.c, g.d.abs())
    };
    if sym == -1 {
        k += 12;
    }
    UnitRoot::new(k)
}

/// `χ(γ) = v(γ)⁴`, the character of `η⁴`; `χ¹² = 1`.
pub fn character_chi(g: &UnimodularMatrix) -> UnitRoot {
    eta_multiplier(g).pow(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn kronecker_values() {
        // quadratic residues mod 7: 1, 2, 4
        let res: Vec<i32> = (1..7).map(|a| kronecker(a, 7)).collect();
        assert_eq!(res, vec![1, 1, -1, 1, -1, -1]);
        assert_eq!(kronecker(0, 1), 1);
        assert_eq!(kronecker(3, 8), -1);
        assert_eq!(kronecker(7, 8), 1);
        assert_eq!(kronecker(5, -1), 1);
        assert_eq!(kronecker(-5, -1), -1);
        assert_eq!(kronecker(2, 4), 0);
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(2, 0), 0);
    }

    /// Jacobi symbol through Euler's criterion on the prime factorization.
    fn jacobi_oracle(a: i64, n: i64) -> i32 {
        let mut n = n;
        let mut p = 3;
        let mut r = 1i32;
        while n > 1 {
            while n % p == 0 {
                let ap = a.rem_euclid(p);
                let e = (0..(p - 1) / 2).fold(1i64, |acc, _| acc * ap % p);
                r *= if ap == 0 { 0 } else if e == 1 { 1 } else { -1 };
                n /= p;
            }
            p += 2;
        }
        r
    }

    #[test]
    fn jacobi_against_euler_criterion() {
        for n in (1..80).step_by(2) {
            for a in -40..40 {
                assert_eq!(kronecker(a, n), jacobi_oracle(a, n), "({a}/{n})");
            }
        }
    }

    #[test]
    fn generators() {
        assert_eq!(eta_multiplier(&UnimodularMatrix::T), UnitRoot::new(1));
        assert_eq!(eta_multiplier(&UnimodularMatrix::IDENTITY), UnitRoot::ONE);
        assert_eq!(character_chi(&UnimodularMatrix::S), UnitRoot::new(12));
        assert_eq!(character_chi(&UnimodularMatrix::T), UnitRoot::new(4));
        assert_eq!(character_chi(&UnimodularMatrix::t_pow(12)), UnitRoot::ONE);
        let minus_one = UnimodularMatrix::new(-1, 0, 0, -1).unwrap();
        assert_eq!(eta_multiplier(&minus_one), UnitRoot::new(-6));
        let c = UnitRoot::new(4).to_c64();
        assert!((c - Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn det_is_checked() {
        assert!(matches!(UnimodularMatrix::new(1, 1, 1, 1), Err(Error::NotUnimodular { .. })));
        let g = UnimodularMatrix::new(2, 1, 1, 1).unwrap();
        assert_eq!(g * g.inverse(), UnimodularMatrix::IDENTITY);
    }

    #[test]
    fn chi_is_a_character() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..300 {
            let (a, _) = UnimodularMatrix::random_word(&mut rng, 6);
            let (b, _) = UnimodularMatrix::random_word(&mut rng, 6);
            assert_eq!(character_chi(&(a * b)), character_chi(&a) * character_chi(&b));
            assert_eq!(character_chi(&a).pow(12), UnitRoot::ONE);
        }
        for _ in 0..300 {
            let a = UnimodularMatrix::random(&mut rng, 15);
            let b = UnimodularMatrix::random(&mut rng, 15);
            assert_eq!(character_chi(&(a * b)), character_chi(&a) * character_chi(&b), "{a} {b}");
        }
    }
}
