//! Table-driven arithmetic in GF(2^q), `1 <= q <= 8`.

use rand::Rng;

use crate::error::{invalid, Result};

/// Field elements are stored in the low `q` bits of a byte.
pub type FieldElement = u8;

/// Default field exponent (GF(256)).
pub const DEFAULT_Q: u32 = 8;

// Primitive polynomials, indexed by q.
const PRIMITIVE: [u16; 9] = [
    0, 0b11, 0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011, 0b1000_1001, 0x11D,
];

#[derive(Debug, Clone)]
pub struct GaloisField {
    q: u32,
    order: usize,
    exp: Vec<u8>,
    log: Vec<u16>,
}

impl GaloisField {
    pub fn new(q: u32) -> Result<Self> {
        if !(1..=8).contains(&q) {
            return Err(invalid("q", format!("{q} outside 1..=8")));
        }
        let order = 1usize << q;
        let period = order - 1;
        let mut exp = vec![0u8; 2 * period];
        let mut log = vec![0u16; order];
        let mut x: u16 = 1;
        for i in 0..period {
            exp[i] = x as u8;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (order as u16) != 0 {
                x ^= PRIMITIVE[q as usize];
            }
        }
        for i in period..2 * period {
            exp[i] = exp[i - period];
        }
        Ok(Self { q, order, exp, log })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of field elements, `2^q`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        (a as usize) < self.order
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a ^ b
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a ^ b
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        if a == 0 {
            return None;
        }
        let period = self.order - 1;
        Some(self.exp[(period - self.log[a as usize] as usize) % period])
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Option<FieldElement> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let period = (self.order - 1) as u64;
        let l = (self.log[a as usize] as u64 * (e % period)) % period;
        self.exp[l as usize]
    }

    /// Uniform element, zero included.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        rng.random_range(0..self.order) as u8
    }

    /// `dst += coef * src`, elementwise.
    pub fn axpy(&self, dst: &mut [FieldElement], coef: FieldElement, src: &[FieldElement]) {
        if coef == 0 {
            return;
        }
        for (d, s) in dst.iter_mut().zip(src) {
            *d ^= self.mul(coef, *s);
        }
    }

    pub fn scale(&self, v: &mut [FieldElement], coef: FieldElement) {
        for x in v.iter_mut() {
            *x = self.mul(coef, *x);
        }
    }

    pub fn dot(&self, a: &[FieldElement], b: &[FieldElement]) -> FieldElement {
        a.iter().zip(b).fold(0, |acc, (x, y)| acc ^ self.mul(*x, *y))
    }
}
