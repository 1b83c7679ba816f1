//! Pauli-Z polynomials over a qubit register.
//!
//! Every operator here is diagonal in the computational basis, so it is a
//! real linear combination of Z-strings. A Z-string is identified by the
//! bitmask of its support; mask 0 is the identity. The value of a
//! polynomial at basis index `i` is `sum_m c_m * (-1)^popcount(m & i)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Coefficients with magnitude below this are dropped.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Masks are `u64`.
pub const MAX_QUBITS: usize = 63;

/// Diagonal of an operator, `values[i]` at basis index `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSpec {
    pub values: Vec<f64>,
}

impl DiagonalSpec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("diagonal entries must be finite"));
        }
        Ok(DiagonalSpec { values })
    }

    pub fn n_qubits(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZPolynomial {
    n_qubits: usize,
    terms: BTreeMap<u64, f64>,
}

/// Unnormalized in-place Walsh-Hadamard butterfly. Length must be a power of two.
pub fn fwht_in_place(values: &mut [f64]) {
    let n = values.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (values[j], values[j + h]);
                values[j] = a + b;
                values[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

impl ZPolynomial {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Capacity {
                what: "n_qubits",
                requested: n_qubits,
                max: MAX_QUBITS,
            });
        }
        Ok(ZPolynomial {
            n_qubits,
            terms: BTreeMap::new(),
        })
    }

    /// `c * I`
    pub fn constant(n_qubits: usize, c: f64) -> Result<Self> {
        Self::from_terms(n_qubits, [(0, c)])
    }

    /// The single Z-string `Z_mask`.
    pub fn z_string(n_qubits: usize, mask: u64) -> Result<Self> {
        Self::from_terms(n_qubits, [(mask, 1.0)])
    }

    /// Binary variable on qubit `q`: `(I - Z_q) / 2`, which reads 1 when the
    /// qubit is set.
    pub fn bit(n_qubits: usize, q: usize) -> Result<Self> {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
        }
        Self::from_terms(n_qubits, [(0, 0.5), (1u64 << q, -0.5)])
    }

    /// Sum the given `(mask, coefficient)` pairs; repeated masks accumulate.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let mut p = Self::zero(n_qubits)?;
        let limit = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        for (mask, c) in terms {
            if mask & !limit != 0 {
                return Err(Error::QubitOutOfRange {
                    qubit: 63 - mask.leading_zeros() as usize,
                    n_qubits,
                });
            }
            *p.terms.entry(mask).or_insert(0.0) += c;
        }
        p.prune();
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &BTreeMap<u64, f64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u64) -> f64 {
        self.terms.get(&mask).copied().unwrap_or(0.0)
    }

    /// Largest support size over stored terms.
    pub fn max_weight(&self) -> u32 {
        self.terms.keys().map(|m| m.count_ones()).max().unwrap_or(0)
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() >= ZERO_THRESHOLD);
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            *out.terms.entry(m).or_insert(0.0) += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= k);
        out.prune();
        out
    }

    /// Product using `Z_a Z_b = Z_(a xor b)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut terms = BTreeMap::new();
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                *terms.entry(ma ^ mb).or_insert(0.0) += ca * cb;
            }
        }
        let mut out = ZPolynomial {
            n_qubits: self.n_qubits,
            terms,
        };
        out.prune();
        Ok(out)
    }

    /// Place this polynomial on qubits `[offset, offset + n)` of a
    /// `total_qubits` register.
    pub fn embed(&self, offset: usize, total_qubits: usize) -> Result<Self> {
        if offset + self.n_qubits > total_qubits || total_qubits > MAX_QUBITS {
            return Err(Error::invalid("embedded register does not fit"));
        }
        Ok(ZPolynomial {
            n_qubits: total_qubits,
            terms: self.terms.iter().map(|(&m, &c)| (m << offset, c)).collect(),
        })
    }

    /// Split into (terms whose mask meets `mask`, terms that do not).
    pub fn split_by_support(&self, mask: u64) -> (Self, Self) {
        let mut touching = ZPolynomial {
            n_qubits: self.n_qubits,
            terms: BTreeMap::new(),
        };
        let mut rest = touching.clone();
        for (&m, &c) in &self.terms {
            if m & mask != 0 {
                touching.terms.insert(m, c);
            } else {
                rest.terms.insert(m, c);
            }
        }
        (touching, rest)
    }

    pub fn eval_at(&self, basis_index: usize) -> f64 {
        let i = basis_index as u64;
        self.terms
            .iter()
            .map(|(&m, &c)| if (m & i).count_ones() & 1 == 0 { c } else { -c })
            .sum()
    }

    /// Diagonal over all `2^n` basis states, computed with one inverse
    /// transform rather than `2^n` term sums.
    pub fn reconstruct(&self) -> Result<DiagonalSpec> {
        if self.n_qubits > crate::statevec::MAX_QUBITS {
            return Err(Error::Capacity {
                what: "n_qubits",
                requested: self.n_qubits,
                max: crate::statevec::MAX_QUBITS,
            });
        }
        let mut values = alloc::vec![0.0; 1usize << self.n_qubits];
        for (&m, &c) in &self.terms {
            values[m as usize] = c;
        }
        fwht_in_place(&mut values);
        Ok(DiagonalSpec { values })
    }
}

/// Z-string expansion of an arbitrary diagonal: `c = H values / N`.
pub fn fwht_expand(diag: &DiagonalSpec) -> Result<ZPolynomial> {
    let n = diag.values.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut c = diag.values.clone();
    fwht_in_place(&mut c);
    let scale = 1.0 / n as f64;
    ZPolynomial::from_terms(
        n.trailing_zeros() as usize,
        c.into_iter()
            .enumerate()
            .map(|(m, v)| (m as u64, v * scale)),
    )
}

/// Closed-form expansion of the diagonal `xi_s = xi_min + s * dxi` on
/// `n_xi` qubits. Only the identity and the single-qubit Z terms survive.
pub fn arithmetic_expansion(xi_min: f64, xi_max: f64, n_xi: usize) -> Result<ZPolynomial> {
    if !(xi_max > xi_min) || !xi_min.is_finite() || !xi_max.is_finite() {
        return Err(Error::invalid("arithmetic expansion needs xi_max > xi_min"));
    }
    if n_xi == 0 || n_xi > MAX_QUBITS {
        return Err(Error::Capacity {
            what: "n_xi",
            requested: n_xi,
            max: MAX_QUBITS,
        });
    }
    let top = ((1u64 << n_xi) - 1) as f64;
    let dxi = (xi_max - xi_min) / top;
    let mut terms = alloc::vec![(0u64, xi_min + dxi * top / 2.0)];
    for i in 0..n_xi {
        // -dxi * 2^(i-1)
        terms.push((1u64 << i, -dxi * (1u64 << i) as f64 / 2.0));
    }
    ZPolynomial::from_terms(n_xi, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    /// Direct O(N^2) transform, used as the independent check.
    fn brute_coefficients(values: &[f64]) -> Vec<f64> {
        let n = values.len();
        (0..n)
            .map(|j| {
                values
                    .iter()
                    .enumerate()
                    .map(|(s, v)| if (j & s).count_ones() % 2 == 0 { *v } else { -*v })
                    .sum::<f64>()
                    / n as f64
            })
            .collect()
    }

    fn grid(xi_min: f64, xi_max: f64, n: usize) -> Vec<f64> {
        let d = (xi_max - xi_min) / (n - 1) as f64;
        (0..n).map(|s| xi_min + s as f64 * d).collect()
    }

    #[test]
    fn fwht_examples() {
        let p = fwht_expand(&DiagonalSpec::new(vec![5.0; 4]).unwrap()).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert!((p.coefficient(0) - 5.0).abs() < 1e-15);

        let p = fwht_expand(&DiagonalSpec::new(vec![1.0, -1.0]).unwrap()).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert!((p.coefficient(1) - 1.0).abs() < 1e-15);

        let v = [0.0, 1.0, 2.0, 3.0];
        let brute = brute_coefficients(&v);
        assert_eq!(brute, vec![1.5, -0.5, -1.0, 0.0]);
        let p = fwht_expand(&DiagonalSpec::new(v.to_vec()).unwrap()).unwrap();
        assert_eq!(p.len(), 3);
        for (m, c) in brute.iter().enumerate() {
            assert!((p.coefficient(m as u64) - c).abs() < 1e-15);
        }
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert_eq!(DiagonalSpec::new(vec![1.0; 3]), Err(Error::NotPowerOfTwo(3)));
        let bad = DiagonalSpec { values: vec![1.0; 6] };
        assert_eq!(fwht_expand(&bad), Err(Error::NotPowerOfTwo(6)));
    }

    #[test]
    fn arithmetic_examples() {
        let p = arithmetic_expansion(0.0, 3.0, 2).unwrap();
        assert_eq!(p.len(), 3);
        assert!((p.coefficient(0) - 1.5).abs() < 1e-15);
        assert!((p.coefficient(1) + 0.5).abs() < 1e-15);
        assert!((p.coefficient(2) + 1.0).abs() < 1e-15);

        let p = arithmetic_expansion(0.0, 2500.0, 5).unwrap();
        assert!((p.coefficient(0) - 1250.0).abs() < 1e-9);
        let dxi = 2500.0 / 31.0;
        assert!((p.coefficient(1) + dxi / 2.0).abs() < 1e-12);
        assert!((p.coefficient(16) + dxi * 8.0).abs() < 1e-9);

        assert!(arithmetic_expansion(1.0, 1.0, 3).is_err());
        assert!(arithmetic_expansion(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn mul_examples() {
        let z = ZPolynomial::z_string(2, 1).unwrap();
        let sq = z.mul(&z).unwrap();
        assert_eq!(sq, ZPolynomial::constant(2, 1.0).unwrap());

        let a = ZPolynomial::constant(3, 2.5).unwrap();
        let b = ZPolynomial::from_terms(3, [(5, -1.5)]).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.len(), 1);
        assert!((ab.coefficient(5) + 3.75).abs() < 1e-15);

        let proj = ZPolynomial::bit(1, 0).unwrap();
        assert_eq!(proj.mul(&proj).unwrap(), proj);

        let other = ZPolynomial::zero(2).unwrap();
        assert!(proj.mul(&other).is_err());
        assert!(proj.add(&other).is_err());
    }

    #[test]
    fn embed_examples() {
        let p = ZPolynomial::from_terms(2, [(1, 0.7)]).unwrap();
        let e = p.embed(3, 6).unwrap();
        assert!((e.coefficient(8) - 0.7).abs() < 1e-15);
        let c = ZPolynomial::constant(2, 4.0).unwrap().embed(4, 6).unwrap();
        assert!((c.coefficient(0) - 4.0).abs() < 1e-15);
        assert!(p.embed(5, 6).is_err());
    }

    #[test]
    fn embedded_xi_reads_grid_values() {
        let xi = grid(0.0, 2500.0, 32);
        let op = arithmetic_expansion(0.0, 2500.0, 5).unwrap().embed(0, 11).unwrap();
        let mut rng = rng_from_seed(3);
        for s in 0..32usize {
            let upper: usize = rng.random_range(0..64);
            let idx = s | (upper << 5);
            assert!((op.eval_at(idx) - xi[s]).abs() < 1e-9);
        }
    }

    #[test]
    fn eval_examples() {
        let c = ZPolynomial::constant(3, 2.5).unwrap();
        assert!((0..8).all(|i| c.eval_at(i) == 2.5));
        let z = ZPolynomial::z_string(1, 1).unwrap();
        assert_eq!(z.eval_at(0), 1.0);
        assert_eq!(z.eval_at(1), -1.0);
    }

    #[test]
    fn reconstruct_matches_eval_at() {
        let p = ZPolynomial::from_terms(4, [(0, 1.0), (3, -2.0), (12, 0.25), (15, 3.5)]).unwrap();
        let d = p.reconstruct().unwrap();
        for (i, v) in d.values.iter().enumerate() {
            assert!((v - p.eval_at(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn xi_squared_term_bound() {
        for n in 1..=8 {
            let xi = arithmetic_expansion(-3.0, 11.0, n).unwrap();
            let sq = xi.mul(&xi).unwrap();
            assert!(sq.len() <= (n + 1) * (n + 1));
        }
    }

    #[test]
    fn sparsity_for_all_sizes() {
        let mut rng = rng_from_seed(11);
        for n in 1..=10usize {
            for _ in 0..5 {
                let lo: f64 = rng.random_range(-1000.0..1000.0);
                let hi = lo + rng.random_range(0.1..3000.0);
                let full = fwht_expand(&DiagonalSpec::new(grid(lo, hi, 1 << n)).unwrap()).unwrap();
                let closed = arithmetic_expansion(lo, hi, n).unwrap();
                assert_eq!(full.len(), n + 1, "n = {n}");
                for (&m, &c) in closed.terms() {
                    assert!((full.coefficient(m) - c).abs() < 1e-9 * (1.0 + c.abs()));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn fwht_round_trip(values in proptest::collection::vec(-1e3f64..1e3, 16)) {
            let p = fwht_expand(&DiagonalSpec::new(values.clone()).unwrap()).unwrap();
            let back = p.reconstruct().unwrap();
            for (a, b) in back.values.iter().zip(&values) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn fwht_matches_brute(log_n in 0usize..7, seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let v: Vec<f64> = (0..1usize << log_n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let p = fwht_expand(&DiagonalSpec::new(v.clone()).unwrap()).unwrap();
            for (m, c) in brute_coefficients(&v).iter().enumerate() {
                prop_assert!((p.coefficient(m as u64) - c).abs() < 1e-11);
            }
        }

        #[test]
        fn mul_is_pointwise(n in 1usize..=8, seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let dim = 1u64 << n;
            let mut draw = |k: usize| {
                ZPolynomial::from_terms(n, (0..k).map(|_| (rng.random_range(0..dim), rng.random_range(-2.0..2.0)))).unwrap()
            };
            let a = draw(6);
            let b = draw(6);
            let ab = a.mul(&b).unwrap().reconstruct().unwrap();
            let (da, db) = (a.reconstruct().unwrap(), b.reconstruct().unwrap());
            for i in 0..dim as usize {
                prop_assert!((ab.values[i] - da.values[i] * db.values[i]).abs() < 1e-10);
            }
        }
    }
}
