//! Haar signatures `ε ∈ {0,1}^d` and their pointwise products.
//!
//! Bit `i` of a signature selects the one dimensional factor in coordinate
//! `i`: `0` is the oscillating function `h^0`, `1` the normalized indicator
//! `h^1`. The all-ones signature is the only non-cancellative one.

use crate::error::DyadicError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    bits: u32,
    d: u32,
}

impl Signature {
    pub fn new(bits: u32, d: usize) -> Self {
        assert!(d < 32 && bits < (1 << d), "signature bits out of range");
        Signature { bits, d: d as u32 }
    }

    /// The cancellative signatures in index order.
    pub fn cancellative(d: usize) -> impl Iterator<Item = Signature> {
        (0..(1u32 << d) - 1).map(move |b| Signature::new(b, d))
    }

    pub fn ones(d: usize) -> Self {
        Signature::new((1 << d) - 1, d)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn dim(self) -> usize {
        self.d as usize
    }

    pub fn bit(self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn is_cancellative(self) -> bool {
        self.bits != (1 << self.d) - 1
    }

    /// Position among the cancellative signatures (the integer value of the bits).
    pub fn index(self) -> usize {
        self.bits as usize
    }

    /// Sign of `h_I^ε` on child `j` of `I` (bit `i` of `j` set means right half).
    pub fn sign_on_child(self, j: usize) -> f64 {
        let osc = !self.bits & ((1 << self.d) - 1) & j as u32;
        if osc.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Bit string, coordinate 0 first.
    pub fn label(self) -> String {
        (0..self.d as usize).map(|i| if self.bit(i) { '1' } else { '0' }).collect()
    }
}

/// Result of multiplying two Haar functions on the same cube.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignatureProduct {
    pub signature: Signature,
    pub sign: f64,
}

/// `|I|^{1/2} h_I^ε h_I^{ε'} = sign · h_I^ψ`, coordinatewise `ψ_i = XNOR(ε_i, ε'_i)`.
pub fn signature_product(eps: Signature, eps2: Signature) -> Result<SignatureProduct, DyadicError> {
    if eps.d != eps2.d {
        return Err(DyadicError::SignatureDimension(eps.dim(), eps2.dim()));
    }
    let d = eps.dim();
    let mut bits = 0u32;
    let mut sign = 1.0;
    for i in 0..d {
        let (a, b) = (eps.bit(i), eps2.bit(i));
        // One dimensional table: h0*h0 = h1, h0*h1 = h1*h0 = h0, h1*h1 = h1,
        // all with factor |I_i|^{-1/2} and no sign change.
        let (out, s) = match (a, b) {
            (false, false) => (true, 1.0),
            (false, true) | (true, false) => (false, 1.0),
            (true, true) => (true, 1.0),
        };
        if out {
            bits |= 1 << i;
        }
        sign *= s;
    }
    Ok(SignatureProduct { signature: Signature::new(bits, d), sign })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h_on_child(eps: Signature, j: usize) -> f64 {
        eps.sign_on_child(j)
    }

    #[test]
    fn signature_set_has_two_pow_d_minus_one_members() {
        for d in 1..5 {
            let s: Vec<_> = Signature::cancellative(d).collect();
            assert_eq!(s.len(), (1 << d) - 1);
            assert!(s.iter().all(|e| e.is_cancellative()));
        }
    }

    #[test]
    fn cancellative_signatures_sum_to_zero_over_children() {
        for d in 1..4 {
            for eps in Signature::cancellative(d) {
                let total: f64 = (0..1 << d).map(|j| h_on_child(eps, j)).sum();
                assert_eq!(total, 0.0);
            }
            let ones = Signature::ones(d);
            let total: f64 = (0..1 << d).map(|j| h_on_child(ones, j)).sum();
            assert_eq!(total, (1 << d) as f64);
        }
    }

    #[test]
    fn one_dimensional_square_is_indicator() {
        let p = signature_product(Signature::new(0, 1), Signature::new(0, 1)).unwrap();
        assert_eq!(p.signature, Signature::ones(1));
        assert!(!p.signature.is_cancellative());
        assert_eq!(p.sign, 1.0);
    }

    #[test]
    fn equal_signatures_give_all_ones() {
        let e = Signature::new(0b10, 2);
        let p = signature_product(e, e).unwrap();
        assert_eq!(p.signature, Signature::ones(2));
    }

    #[test]
    fn mixed_two_dimensional_product() {
        // coordinate 0 first: (1,0) has bit 0 set, (0,1) has bit 1 set
        let a = Signature::new(0b01, 2);
        let b = Signature::new(0b10, 2);
        let p = signature_product(b, a).unwrap();
        assert_eq!(p.signature, Signature::new(0, 2));
        assert!(p.signature.is_cancellative());
    }

    #[test]
    fn product_matches_pointwise_values_on_children() {
        for d in 1..4 {
            for a in 0..1u32 << d {
                for b in 0..1u32 << d {
                    let (ea, eb) = (Signature::new(a, d), Signature::new(b, d));
                    let p = signature_product(ea, eb).unwrap();
                    for j in 0..1 << d {
                        assert_eq!(h_on_child(ea, j) * h_on_child(eb, j), p.sign * h_on_child(p.signature, j));
                    }
                    assert_eq!(p.signature.is_cancellative(), a != b);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(signature_product(Signature::new(0, 1), Signature::new(0, 2)).is_err());
    }
}
