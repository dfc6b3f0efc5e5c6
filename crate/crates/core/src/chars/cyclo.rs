//! Exact arithmetic in cyclotomic fields `Q(ζ_e)`.
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(e)−1}` modulo the
//! cyclotomic polynomial `Φ_e`, so structural equality is numeric equality.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

#[derive(Debug)]
pub struct CycloField {
    order: u32,
    degree: usize,
    /// `ζ^k mod Φ_e` for `k = 0..e`.
    powers: Vec<Vec<i64>>,
}

fn poly_divexact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // both monic, coefficients low to high
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![0; num.len() - dn];
    for i in (0..q.len()).rev() {
        let c = rem[i + dn];
        q[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

fn cyclotomic_poly(e: u32, cache: &mut HashMap<u32, Vec<i64>>) -> Vec<i64> {
    if let Some(p) = cache.get(&e) {
        return p.clone();
    }
    let mut p = vec![0i64; e as usize + 1];
    p[0] = -1;
    p[e as usize] = 1;
    for d in 1..e {
        if e.is_multiple_of(d) {
            let phi_d = cyclotomic_poly(d, cache);
            p = poly_divexact(&p, &phi_d);
        }
    }
    cache.insert(e, p.clone());
    p
}

impl CycloField {
    fn build(order: u32) -> Self {
        let mut cache = HashMap::new();
        let phi = cyclotomic_poly(order, &mut cache);
        let degree = phi.len() - 1;
        let mut powers = Vec::with_capacity(order as usize);
        let mut cur = vec![0i64; degree];
        cur[0] = 1;
        for _ in 0..order {
            powers.push(cur.clone());
            // multiply by ζ and reduce with ζ^deg = −Σ phi_i ζ^i
            let top = cur[degree - 1];
            for i in (1..degree).rev() {
                cur[i] = cur[i - 1];
            }
            cur[0] = 0;
            for i in 0..degree {
                cur[i] -= top * phi[i];
            }
        }
        Self { order, degree, powers }
    }

    pub fn get(order: u32) -> Arc<CycloField> {
        static FIELDS: OnceLock<Mutex<HashMap<u32, Arc<CycloField>>>> = OnceLock::new();
        let order = order.max(1);
        let mut map = FIELDS.get_or_init(Default::default).lock().unwrap();
        map.entry(order)
            .or_insert_with(|| Arc::new(CycloField::build(order)))
            .clone()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

#[derive(Clone)]
pub struct Cyclo {
    field: Arc<CycloField>,
    coeffs: Vec<Rational64>,
}

impl Cyclo {
    pub fn zero(order: u32) -> Self {
        let field = CycloField::get(order);
        let coeffs = vec![Rational64::zero(); field.degree];
        Self { field, coeffs }
    }

    pub fn from_int(order: u32, v: i64) -> Self {
        Self::from_rational(order, Rational64::from_integer(v))
    }

    pub fn from_rational(order: u32, v: Rational64) -> Self {
        let mut z = Self::zero(order);
        z.coeffs[0] = v;
        z
    }

    /// `ζ_e^k`
    pub fn root(order: u32, k: i64) -> Self {
        let mut z = Self::zero(order);
        z.add_root(k, Rational64::one());
        z
    }

    /// `Σ_k counts[k]·ζ_e^k`, the form in which snapped character values
    /// arrive (eigenvalue multiplicities).
    pub fn from_exponent_counts(order: u32, counts: &[i64]) -> Self {
        let mut z = Self::zero(order);
        for (k, &c) in counts.iter().enumerate() {
            if c != 0 {
                z.add_root(k as i64, Rational64::from_integer(c));
            }
        }
        z
    }

    fn add_root(&mut self, k: i64, c: Rational64) {
        let e = self.field.order as i64;
        let row = &self.field.powers[k.rem_euclid(e) as usize];
        for (a, &p) in self.coeffs.iter_mut().zip(row) {
            if p != 0 {
                *a += c * Rational64::from_integer(p);
            }
        }
    }

    pub fn order(&self) -> u32 {
        self.field.order
    }

    pub fn coeffs(&self) -> &[Rational64] {
        &self.coeffs
    }

    /// Re-expresses the value in `Q(ζ_m)` for a multiple `m` of the order.
    pub fn lift(&self, order: u32) -> Self {
        let e = self.field.order;
        assert!(order.is_multiple_of(e), "cannot lift Q(ζ_{e}) into Q(ζ_{order})");
        if order == e {
            return self.clone();
        }
        let step = (order / e) as i64;
        let mut z = Self::zero(order);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                z.add_root(i as i64 * step, *c);
            }
        }
        z
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.field.order == b.field.order {
            return (a.clone(), b.clone());
        }
        let m = a.field.order.lcm(&b.field.order);
        (a.lift(m), b.lift(m))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = Self::common(self, other);
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut a = self.clone();
        a.coeffs.iter_mut().for_each(|c| *c = -*c);
        a
    }

    pub fn scale(&self, s: Rational64) -> Self {
        let mut a = self.clone();
        a.coeffs.iter_mut().for_each(|c| *c *= s);
        a
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let mut out = Self::zero(a.field.order);
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    out.add_root((i + j) as i64, x * y);
                }
            }
        }
        out
    }

    /// Complex conjugation `ζ ↦ ζ⁻¹`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.field.order);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.add_root(-(i as i64), *c);
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The value as a rational number, if it is one.
    pub fn as_rational(&self) -> Option<Rational64> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    pub fn to_complex(&self) -> Complex64 {
        let e = self.field.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / e;
                Complex64::from_polar(*c.numer() as f64 / *c.denom() as f64, theta)
            })
            .sum()
    }
}

/// Real and imaginary parts rounded to 12 decimals, with `-0` cleared, so
/// serialized reports are byte-stable.
pub fn stable_pair(z: Complex64) -> [f64; 2] {
    let r = |x: f64| {
        let y = (x * 1e12).round() / 1e12;
        if y == 0.0 {
            0.0
        } else {
            y
        }
    };
    [r(z.re), r(z.im)]
}

impl serde::Serialize for Cyclo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        stable_pair(self.to_complex()).serialize(s)
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = Self::common(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclo {}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (k, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (_, true) => write!(f, "z{}^{k}", self.field.order)?,
                (_, false) => write!(f, "{a}*z{}^{k}", self.field.order)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
