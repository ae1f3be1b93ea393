//! Prime-field arithmetic over Z_p, polynomial sampling and evaluation,
//! and Lagrange interpolation at zero.
//!
//! Everything here is a pure function of its inputs plus an explicitly
//! passed randomness source, so concurrent use is unrestricted. The prime
//! is arbitrary precision: tiny fields (p = 13) keep exhaustive test
//! oracles cheap, large fields (256 bits and beyond) carry the security
//! claims.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// A fully reduced residue: 0 <= value < p for the prime it was built with.
///
/// The element does not carry its modulus; all arithmetic goes through
/// [`Prime`] methods, which keep the closure invariant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(BigUint);

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Minimal lowercase big-endian hex, the canonical emission form.
    pub fn to_hex(&self) -> String {
        self.0.to_str_radix(16)
    }
}

/// Parses lowercase or uppercase hex into an unsigned integer. Leading
/// zeros are accepted on parse; emission is always minimal.
pub fn parse_hex(s: &str) -> Result<BigUint> {
    if s.is_empty() {
        return Err(Error::MalformedDocument("empty hex value".into()));
    }
    if !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::MalformedDocument(format!("invalid hex value `{s}`")));
    }
    BigUint::parse_bytes(s.as_bytes(), 16)
        .ok_or_else(|| Error::MalformedDocument(format!("invalid hex value `{s}`")))
}

/// A validated prime modulus together with its bit length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prime {
    value: BigUint,
    bits: u64,
}

/// Small primes for cheap trial division before Miller-Rabin.
const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Validates a prime candidate with error probability below 2^-64.
///
/// Runs trial division by small primes, then Miller-Rabin with the first
/// twelve prime bases (a deterministic result for candidates below
/// 3.3 * 10^24) plus 40 further bases derived deterministically from the
/// candidate itself, so validation is reproducible across runs.
pub fn validate_prime(candidate: &BigUint) -> Result<Prime> {
    let three = BigUint::from(3u32);
    if candidate < &three {
        return Err(Error::TooSmall);
    }
    for sp in SMALL_PRIMES {
        let spv = BigUint::from(sp);
        if candidate == &spv {
            return Ok(Prime {
                value: candidate.clone(),
                bits: candidate.bits(),
            });
        }
        if (candidate % &spv).is_zero() {
            return Err(Error::NotPrime);
        }
    }

    // candidate - 1 = d * 2^s with d odd
    let one = BigUint::one();
    let n_minus_1 = candidate - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    let witness = |a: &BigUint| -> bool {
        // returns true when `a` witnesses compositeness
        let a = a % candidate;
        if a.is_zero() {
            return false;
        }
        let mut x = a.modpow(&d, candidate);
        if x == one || x == n_minus_1 {
            return false;
        }
        for _ in 1..s {
            x = (&x * &x) % candidate;
            if x == n_minus_1 {
                return false;
            }
        }
        true
    };

    for base in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if witness(&BigUint::from(base)) {
            return Err(Error::NotPrime);
        }
    }
    // Deterministic for candidates below 3.3 * 10^24; above that, add
    // candidate-derived bases for a < 4^-40 residual error.
    if candidate.bits() > 81 {
        let mut seed = [0u8; 32];
        for (idx, byte) in candidate.to_bytes_le().iter().enumerate() {
            seed[idx % 32] ^= *byte;
        }
        let mut rng = ChaCha20Rng::from_seed(seed);
        let two = BigUint::from(2u32);
        let upper = candidate - &two;
        for _ in 0..40 {
            let a = rng.gen_biguint_range(&two, &upper);
            if witness(&a) {
                return Err(Error::NotPrime);
            }
        }
    }

    Ok(Prime {
        value: candidate.clone(),
        bits: candidate.bits(),
    })
}

/// Samples a random prime of exactly `bits` bits. Convenience for tests
/// and tooling; scheme setup takes the prime as input.
pub fn random_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Prime {
    assert!(bits >= 2, "prime needs at least 2 bits");
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if let Ok(p) = validate_prime(&candidate) {
            return p;
        }
    }
}

impl Prime {
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// Bit length of p; also the width L of field elements on the wire.
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Reduces an arbitrary integer into the field.
    pub fn element(&self, v: BigUint) -> FieldElement {
        FieldElement(v % &self.value)
    }

    pub fn element_from_u64(&self, v: u64) -> FieldElement {
        self.element(BigUint::from(v))
    }

    /// Wraps a value that must already lie in the field; `None` otherwise.
    pub fn checked_element(&self, v: BigUint) -> Option<FieldElement> {
        if v < self.value {
            Some(FieldElement(v))
        } else {
            None
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(BigUint::zero())
    }

    pub fn one(&self) -> FieldElement {
        self.element(BigUint::one())
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.element(&a.0 + &b.0)
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        if a.0 >= b.0 {
            FieldElement(&a.0 - &b.0)
        } else {
            FieldElement(&self.value - &b.0 + &a.0)
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.element(&a.0 * &b.0)
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        if a.0.is_zero() {
            self.zero()
        } else {
            FieldElement(&self.value - &a.0)
        }
    }

    pub fn pow(&self, base: &FieldElement, exponent: &BigUint) -> FieldElement {
        FieldElement(base.0.modpow(exponent, &self.value))
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    /// `None` for zero, which has no inverse.
    pub fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if a.0.is_zero() {
            return None;
        }
        let ext = BigInt::from(a.0.clone()).extended_gcd(&BigInt::from(self.value.clone()));
        debug_assert!(ext.gcd.is_one());
        let p = BigInt::from(self.value.clone());
        let x = ext.x.mod_floor(&p);
        Some(FieldElement(x.to_biguint().expect("reduced residue")))
    }

    /// Uniform draw from Z_p.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        FieldElement(rng.gen_biguint_below(&self.value))
    }

    /// Uniform draw from Z_p^* = Z_p \ {0}.
    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let e = self.random_element(rng);
            if !e.is_zero() {
                return e;
            }
        }
    }
}

/// A polynomial over Z_p, coefficients in increasing degree order.
/// The constant term is the secret being shared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coefficients: Vec<FieldElement>,
}

impl Polynomial {
    /// Builds a polynomial from already reduced coefficients.
    pub fn from_coefficients(coefficients: Vec<FieldElement>) -> Self {
        assert!(!coefficients.is_empty(), "polynomial needs a constant term");
        Polynomial { coefficients }
    }

    pub fn coefficients(&self) -> &[FieldElement] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn constant_term(&self) -> &FieldElement {
        &self.coefficients[0]
    }
}

/// Samples a polynomial with the given constant term and `degree` further
/// coefficients drawn uniformly from Z_p. Zero draws are kept, including a
/// zero leading coefficient: reconstruction from degree+1 points is
/// unaffected by a degenerate leading term.
pub fn sample_polynomial<R: Rng + ?Sized>(
    secret: FieldElement,
    degree: usize,
    p: &Prime,
    rng: &mut R,
) -> Result<Polynomial> {
    if degree < 1 {
        return Err(Error::DegreeTooSmall);
    }
    let mut coefficients = Vec::with_capacity(degree + 1);
    coefficients.push(secret);
    for _ in 0..degree {
        coefficients.push(p.random_element(rng));
    }
    Ok(Polynomial { coefficients })
}

/// Evaluates `f(x)` by Horner's rule.
pub fn poly_eval(f: &Polynomial, x: &FieldElement, p: &Prime) -> FieldElement {
    let mut acc = p.zero();
    for c in f.coefficients.iter().rev() {
        acc = p.add(&p.mul(&acc, x), c);
    }
    acc
}

/// Evaluates the unique interpolating polynomial through `points` at zero:
///
/// sum_b y_b * prod_{r != b} (-x_r) / (x_b - x_r)  (mod p)
///
/// All abscissae must be distinct; identifiers are drawn from Z_p^*, so
/// zero abscissae do not occur in protocol use.
pub fn lagrange_at_zero(points: &[(FieldElement, FieldElement)], p: &Prime) -> Result<FieldElement> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints);
    }
    for (idx, (x, _)) in points.iter().enumerate() {
        for (other, _) in &points[idx + 1..] {
            if x == other {
                return Err(Error::DuplicateAbscissa);
            }
        }
    }
    let mut acc = p.zero();
    for (b, (x_b, y_b)) in points.iter().enumerate() {
        let mut num = y_b.clone();
        let mut den = p.one();
        for (r, (x_r, _)) in points.iter().enumerate() {
            if r == b {
                continue;
            }
            num = p.mul(&num, &p.neg(x_r));
            den = p.mul(&den, &p.sub(x_b, x_r));
        }
        let den_inv = p.inv(&den).ok_or(Error::DuplicateAbscissa)?;
        acc = p.add(&acc, &p.mul(&num, &den_inv));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Num;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn p13() -> Prime {
        validate_prime(&BigUint::from(13u32)).unwrap()
    }

    fn fe(p: &Prime, v: u64) -> FieldElement {
        p.element_from_u64(v)
    }

    /// Independent Miller-Rabin oracle on u128 arithmetic, deterministic
    /// for 64-bit inputs with the first twelve prime bases.
    fn oracle_is_prime_u64(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            if n == sp {
                return true;
            }
            if n % sp == 0 {
                return false;
            }
        }
        let mut d = n - 1;
        let mut s = 0;
        while d % 2 == 0 {
            d /= 2;
            s += 1;
        }
        let pow_mod = |mut b: u128, mut e: u64, m: u128| -> u128 {
            let mut acc = 1u128;
            b %= m;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc * b % m;
                }
                b = b * b % m;
                e >>= 1;
            }
            acc
        };
        'base: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            let mut x = pow_mod(a as u128, d, n as u128);
            if x == 1 || x == (n - 1) as u128 {
                continue;
            }
            for _ in 1..s {
                x = x * x % n as u128;
                if x == (n - 1) as u128 {
                    continue 'base;
                }
            }
            return false;
        }
        true
    }

    #[test]
    fn validate_prime_small_known() {
        let p = validate_prime(&BigUint::from(13u32)).unwrap();
        assert_eq!(p.value(), &BigUint::from(13u32));
        assert_eq!(p.bits(), 4);
    }

    #[test]
    fn validate_prime_rejects_composite() {
        assert_eq!(validate_prime(&BigUint::from(15u32)), Err(Error::NotPrime));
        assert_eq!(
            validate_prime(&BigUint::from(341u32)), // 11 * 31, base-2 pseudoprime
            Err(Error::NotPrime)
        );
    }

    #[test]
    fn validate_prime_rejects_too_small() {
        assert_eq!(validate_prime(&BigUint::from(2u32)), Err(Error::TooSmall));
        assert_eq!(validate_prime(&BigUint::from(0u32)), Err(Error::TooSmall));
    }

    #[test]
    fn validate_prime_mersenne_61_matches_oracle() {
        let m61 = 2305843009213693951u64; // 2^61 - 1
        assert!(oracle_is_prime_u64(m61));
        let p = validate_prime(&BigUint::from(m61)).unwrap();
        assert_eq!(p.bits(), 61);
    }

    #[test]
    fn validate_prime_agrees_with_oracle_on_random_u64() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n: u64 = rng.gen_range(3..u64::MAX);
            let ours = validate_prime(&BigUint::from(n)).is_ok();
            assert_eq!(ours, oracle_is_prime_u64(n), "disagreement at {n}");
        }
    }

    #[test]
    fn poly_eval_hand_oracle() {
        let p = p13();
        let f = Polynomial::from_coefficients(vec![fe(&p, 2), fe(&p, 3)]);
        assert_eq!(poly_eval(&f, &fe(&p, 4), &p), fe(&p, 1)); // (2 + 12) mod 13

        let g = Polynomial::from_coefficients(vec![fe(&p, 7), fe(&p, 5), fe(&p, 11)]);
        assert_eq!(poly_eval(&g, &fe(&p, 0), &p), fe(&p, 7)); // constant term at zero

        let identity = Polynomial::from_coefficients(vec![fe(&p, 0), fe(&p, 1)]);
        assert_eq!(poly_eval(&identity, &fe(&p, 9), &p), fe(&p, 9));
    }

    #[test]
    fn poly_eval_matches_power_summation_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let p = random_prime(32, &mut rng);
        for _ in 0..1000 {
            let degree = rng.gen_range(1..=6);
            let f = sample_polynomial(p.random_element(&mut rng), degree, &p, &mut rng).unwrap();
            let x = p.random_element(&mut rng);
            // naive sum of c_t * x^t
            let mut expected = p.zero();
            for (t, c) in f.coefficients().iter().enumerate() {
                let xt = p.pow(&x, &BigUint::from(t));
                expected = p.add(&expected, &p.mul(c, &xt));
            }
            assert_eq!(poly_eval(&f, &x, &p), expected);
        }
    }

    #[test]
    fn sample_polynomial_structure() {
        let p = p13();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let f = sample_polynomial(fe(&p, 2), 1, &p, &mut rng).unwrap();
        assert_eq!(f.constant_term(), &fe(&p, 2));
        assert_eq!(f.coefficients().len(), 2);

        let zero = sample_polynomial(fe(&p, 0), 3, &p, &mut rng).unwrap();
        assert_eq!(zero.constant_term(), &fe(&p, 0));
        assert_eq!(zero.coefficients().len(), 4);

        assert_eq!(
            sample_polynomial(fe(&p, 2), 0, &p, &mut rng),
            Err(Error::DegreeTooSmall)
        );
    }

    #[test]
    fn sample_polynomial_coefficients_uniform() {
        // frequency of each residue among nonconstant coefficients,
        // 10^4 draws over Z_13, expected 1/13 within +-0.01
        let p = p13();
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let mut counts = [0usize; 13];
        let mut total = 0usize;
        for _ in 0..2500 {
            let f = sample_polynomial(fe(&p, 0), 4, &p, &mut rng).unwrap();
            for c in &f.coefficients()[1..] {
                let v: u64 = c.value().try_into().unwrap();
                counts[v as usize] += 1;
                total += 1;
            }
        }
        assert_eq!(total, 10_000);
        for (v, count) in counts.iter().enumerate() {
            let freq = *count as f64 / total as f64;
            assert!(
                (freq - 1.0 / 13.0).abs() <= 0.01,
                "residue {v} frequency {freq}"
            );
        }
    }

    #[test]
    fn lagrange_hand_oracle() {
        // s + d = 5, s + 2d = 8 mod 13 => s = 2, d = 3
        let p = p13();
        let points = vec![(fe(&p, 1), fe(&p, 5)), (fe(&p, 2), fe(&p, 8))];
        assert_eq!(lagrange_at_zero(&points, &p).unwrap(), fe(&p, 2));

        // permutation symmetry
        let swapped = vec![(fe(&p, 2), fe(&p, 8)), (fe(&p, 1), fe(&p, 5))];
        assert_eq!(lagrange_at_zero(&swapped, &p).unwrap(), fe(&p, 2));

        // constant-valued points
        let constant = vec![
            (fe(&p, 1), fe(&p, 4)),
            (fe(&p, 2), fe(&p, 4)),
            (fe(&p, 3), fe(&p, 4)),
        ];
        assert_eq!(lagrange_at_zero(&constant, &p).unwrap(), fe(&p, 4));
    }

    #[test]
    fn lagrange_error_paths() {
        let p = p13();
        let dup = vec![(fe(&p, 1), fe(&p, 5)), (fe(&p, 1), fe(&p, 8))];
        assert_eq!(lagrange_at_zero(&dup, &p), Err(Error::DuplicateAbscissa));
        let single = vec![(fe(&p, 1), fe(&p, 5))];
        assert_eq!(lagrange_at_zero(&single, &p), Err(Error::InsufficientPoints));
    }

    #[test]
    fn share_and_reconstruct_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        for trial in 0..1000 {
            let p = if trial == 1 {
                // realistic scale once: the secp256k1 field prime
                let v = BigUint::from_str_radix(
                    "fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f",
                    16,
                )
                .unwrap();
                validate_prime(&v).unwrap()
            } else {
                random_prime(64, &mut rng)
            };
            let secret = p.random_element(&mut rng);
            let degree = rng.gen_range(1..=6);
            let f = sample_polynomial(secret.clone(), degree, &p, &mut rng).unwrap();
            let mut xs = Vec::new();
            while xs.len() < degree + 1 {
                let x = p.random_nonzero(&mut rng);
                if !xs.contains(&x) {
                    xs.push(x);
                }
            }
            let points: Vec<_> = xs
                .into_iter()
                .map(|x| {
                    let y = poly_eval(&f, &x, &p);
                    (x, y)
                })
                .collect();
            assert_eq!(lagrange_at_zero(&points, &p).unwrap(), secret);
        }
    }

    #[test]
    fn missing_point_leaves_secret_undetermined() {
        // With only d points of a degree-d polynomial, every constant term
        // remains possible. Brute-force all degree-2 polynomials over Z_13
        // through two fixed points and collect their constant terms.
        let p = p13();
        let points = [(fe(&p, 1), fe(&p, 5)), (fe(&p, 2), fe(&p, 8))];
        let mut seen = [0usize; 13];
        for c0 in 0..13u64 {
            for c1 in 0..13u64 {
                for c2 in 0..13u64 {
                    let f = Polynomial::from_coefficients(vec![
                        fe(&p, c0),
                        fe(&p, c1),
                        fe(&p, c2),
                    ]);
                    if points.iter().all(|(x, y)| &poly_eval(&f, x, &p) == y) {
                        seen[c0 as usize] += 1;
                    }
                }
            }
        }
        // one free coefficient => 13 polynomials, one per candidate secret
        assert_eq!(seen.iter().sum::<usize>(), 13);
        assert!(seen.iter().all(|&c| c == 1), "constant terms not uniform: {seen:?}");
    }

    proptest! {
        #[test]
        fn field_ops_stay_reduced(a in 0u64..1_000_000, b in 0u64..1_000_000, seed in 0u64..1000) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let p = random_prime(20, &mut rng);
            let x = p.element_from_u64(a);
            let y = p.element_from_u64(b);
            for r in [p.add(&x, &y), p.sub(&x, &y), p.mul(&x, &y), p.neg(&x)] {
                prop_assert!(r.value() < p.value());
            }
            if !x.is_zero() {
                let inv = p.inv(&x).unwrap();
                prop_assert!(inv.value() < p.value());
                prop_assert_eq!(p.mul(&x, &inv), p.one());
            }
        }

        #[test]
        fn hex_round_trip(v in 0u64..u64::MAX) {
            let mut rng = ChaCha20Rng::seed_from_u64(5);
            let p = random_prime(70, &mut rng);
            let x = p.element_from_u64(v);
            let parsed = p.checked_element(parse_hex(&x.to_hex()).unwrap()).unwrap();
            prop_assert_eq!(parsed, x);
        }
    }
}
