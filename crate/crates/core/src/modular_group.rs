//! Exact arithmetic in SL(2, Z_n).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of generator slots in the canonical generating set.
pub const NUM_GENERATORS: usize = 4;

/// Human-readable names of the generator slots, in slot order.
pub const GENERATOR_LABELS: [&str; NUM_GENERATORS] = ["s1", "s2", "s1^-1", "s2^-1"];

/// Slot holding the inverse of the generator in `slot`.
pub const fn inverse_slot(slot: usize) -> usize {
    (slot + 2) % NUM_GENERATORS
}

/// A 2x2 matrix over Z_n with determinant 1, stored row-major as `[[a, b], [c, d]]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModMatrix {
    a: u32,
    b: u32,
    c: u32,
    d: u32,
    n: u32,
}

impl ModMatrix {
    /// Builds a group element, reducing entries mod `n`. Fails unless the
    /// determinant is 1 mod `n`.
    pub fn new(a: i64, b: i64, c: i64, d: i64, n: u32) -> Result<Self> {
        check_modulus(n as u64)?;
        let m = n as i64;
        let r = |x: i64| x.rem_euclid(m) as u32;
        let out = ModMatrix {
            a: r(a),
            b: r(b),
            c: r(c),
            d: r(d),
            n,
        };
        if out.determinant() != 1 % n {
            return Err(Error::NotInGroup {
                a: out.a,
                b: out.b,
                c: out.c,
                d: out.d,
                n,
            });
        }
        Ok(out)
    }

    pub fn identity(n: u32) -> Result<Self> {
        Self::new(1, 0, 0, 1, n)
    }

    pub fn entries(&self) -> [u32; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn modulus(&self) -> u32 {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.a == 1 && self.b == 0 && self.c == 0 && self.d == 1
    }

    fn determinant(&self) -> u32 {
        let n = self.n as u64;
        let ad = self.a as u64 * self.d as u64 % n;
        let bc = self.b as u64 * self.c as u64 % n;
        ((ad + n - bc) % n) as u32
    }

    /// Matrix product `self * other` reduced mod n.
    pub fn compose(&self, other: &ModMatrix) -> Result<ModMatrix> {
        if self.n != other.n {
            return Err(Error::ModulusMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, o: &ModMatrix) -> ModMatrix {
        let n = self.n as u64;
        let (a, b, c, d) = (self.a as u64, self.b as u64, self.c as u64, self.d as u64);
        let (e, f, g, h) = (o.a as u64, o.b as u64, o.c as u64, o.d as u64);
        ModMatrix {
            a: ((a * e + b * g) % n) as u32,
            b: ((a * f + b * h) % n) as u32,
            c: ((c * e + d * g) % n) as u32,
            d: ((c * f + d * h) % n) as u32,
            n: self.n,
        }
    }

    /// Closed-form inverse `[[d, -b], [-c, a]]`, valid because the determinant is 1.
    pub fn inverse(&self) -> ModMatrix {
        let neg = |x: u32| (self.n - x) % self.n;
        ModMatrix {
            a: self.d,
            b: neg(self.b),
            c: neg(self.c),
            d: self.a,
            n: self.n,
        }
    }
}

impl fmt::Debug for ModMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]] mod {}",
            self.a, self.b, self.c, self.d, self.n
        )
    }
}

/// The generating set `[s1, s2, s1^-1, s2^-1]` with `s1 = [[1,1],[0,1]]` and
/// `s2 = [[1,0],[1,1]]`. The slot order is relied on by the Cayley BFS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    elements: [ModMatrix; NUM_GENERATORS],
}

impl GeneratorSet {
    pub fn new(n: u32) -> Result<Self> {
        let s1 = ModMatrix::new(1, 1, 0, 1, n)?;
        let s2 = ModMatrix::new(1, 0, 1, 1, n)?;
        Ok(GeneratorSet {
            elements: [s1, s2, s1.inverse(), s2.inverse()],
        })
    }

    pub fn get(&self, slot: usize) -> &ModMatrix {
        &self.elements[slot]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModMatrix> {
        self.elements.iter()
    }

    pub fn modulus(&self) -> u32 {
        self.elements[0].n
    }
}

fn check_modulus(n: u64) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidModulus(n))
    } else {
        Ok(())
    }
}

/// Distinct prime divisors of `n` by trial division, ascending.
pub fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            primes.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        primes.push(n);
    }
    primes
}

/// `|SL(2, Z_n)| = n^3 * prod_{p | n} (1 - 1/p^2)`, computed exactly.
pub fn group_order(n: u64) -> Result<u64> {
    check_modulus(n)?;
    let mut total = (n as u128).pow(3);
    for p in prime_divisors(n) {
        let p2 = (p as u128) * (p as u128);
        // p^3 divides n^3, so each division is exact.
        total = total / p2 * (p2 - 1);
    }
    u64::try_from(total).map_err(|_| Error::InvalidArgument(format!("group order of {n} overflows u64")))
}

/// Operator norm of `s1` (and of `s2`): the golden ratio `(1 + sqrt 5) / 2`.
pub fn operator_norm_generator() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}
