//! Walsh functions in Paley order and their Hadamard (Sylvester) representation.
//!
//! All evaluation on dyadic grids is done with bit arithmetic. On `2^n` equal
//! bins, `PAL_k` takes the value `(-1)^popcount(b & rev(k))` in bin `b`, where
//! `rev(k)` places bit `j` of `k` (1-based) at bit `n - j`. This is also the
//! zero-based Hadamard column index, so `i(k) = 1 + rev(k)`.
//!
//! Functions are right-continuous: at a zero of `sin(2^j pi x)` the Rademacher
//! function takes its right-limit value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `log2` dimension accepted by [`hadamard`] by default (2^16 per side).
pub const DEFAULT_HADAMARD_CAP: u32 = 16;

/// Hadamard matrices up to this `log2` size are stored densely.
const DENSE_LIMIT: u32 = 8;

/// A Paley order `k` together with its binary structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaleyIndex(pub u64);

impl PaleyIndex {
    pub fn new(k: u64) -> Self {
        PaleyIndex(k)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Binary digits `b_1..b_m`, least significant first.
    pub fn bits(self) -> Vec<u8> {
        (0..self.msb()).map(|j| ((self.0 >> j) & 1) as u8).collect()
    }

    /// Index `m` of the most significant set bit (1-based); zero for `k = 0`.
    pub fn msb(self) -> u32 {
        64 - self.0.leading_zeros()
    }

    /// Hamming weight `r(k)`.
    pub fn hamming_weight(self) -> u32 {
        self.0.count_ones()
    }

    /// Bit-reversal of `k` into an `n`-bit word, i.e. the zero-based Hadamard column.
    fn reversed(self, n: u32) -> u64 {
        let mut out = 0u64;
        let mut k = self.0;
        let mut j = 1;
        while k != 0 {
            if k & 1 == 1 {
                out |= 1 << (n - j);
            }
            k >>= 1;
            j += 1;
        }
        out
    }
}

impl From<u64> for PaleyIndex {
    fn from(k: u64) -> Self {
        PaleyIndex(k)
    }
}

fn check_unit(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(())
}

/// Rademacher function `R_j(x) = sgn sin(2^j pi x)` with right-limit values at zeros.
pub fn rademacher(j: u32, x: f64) -> Result<i8> {
    check_unit(x)?;
    if j == 0 {
        return Ok(1);
    }
    if j >= 1023 {
        return Err(Error::Domain(format!("Rademacher order {j} too large")));
    }
    // multiplication by a power of two is exact in binary floating point
    let scaled = (x * 2f64.powi(j as i32)).floor();
    let odd = scaled % 2.0 != 0.0;
    Ok(if odd { -1 } else { 1 })
}

/// Walsh function of Paley order `k` at `x`.
pub fn pal(k: PaleyIndex, x: f64) -> Result<i8> {
    check_unit(x)?;
    let mut v = 1i8;
    for (j, b) in k.bits().iter().enumerate() {
        if *b == 1 {
            v *= rademacher(j as u32 + 1, x)?;
        }
    }
    Ok(v)
}

/// `PAL_k` sampled on `2^n` equal bins. Errors if `m(k) > n`.
pub fn pal_samples(k: PaleyIndex, n: u32) -> Result<Vec<i8>> {
    let col = paley_to_hadamard_index(k, n)? - 1;
    Ok((0..1u64 << n)
        .map(|b| if (b & col).count_ones() % 2 == 0 { 1 } else { -1 })
        .collect())
}

/// 1-based Hadamard column `i(k) = 1 + sum_j b_j 2^(n-j)` holding `PAL_k` sampled on `2^n` bins.
pub fn paley_to_hadamard_index(k: PaleyIndex, n: u32) -> Result<u64> {
    let m = k.msb();
    if m > n {
        return Err(Error::NotRepresentable { k: k.0, m, n });
    }
    Ok(1 + k.reversed(n))
}

/// Whether `PAL_k` is even about `x = 1/2`, decided by reversing its samples on `2^m(k)` bins.
pub fn is_even_parity(k: PaleyIndex) -> bool {
    let samples = pal_samples(k, k.msb()).expect("m(k) bins always suffice");
    samples.iter().eq(samples.iter().rev())
}

/// Sylvester Hadamard matrix `S^(kron n)` with entries in {+1, -1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    n: u32,
    dense: Option<Vec<i8>>,
}

impl HadamardMatrix {
    pub fn log2_dim(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// Entry at zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> i8 {
        match &self.dense {
            Some(d) => d[row * self.dim() + col],
            None => {
                if (row & col).count_ones().is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn row(&self, row: usize) -> Vec<i8> {
        (0..self.dim()).map(|c| self.get(row, c)).collect()
    }

    pub fn column(&self, col: usize) -> Vec<i8> {
        (0..self.dim()).map(|r| self.get(r, col)).collect()
    }

    /// `H * v`, computed with the in-place Sylvester butterfly.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim(), "vector length must match Hadamard dimension");
        let mut out = v.to_vec();
        let mut half = 1;
        while half < out.len() {
            for block in out.chunks_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x + y;
                    *b = x - y;
                }
            }
            half *= 2;
        }
        out
    }

    /// `H * H^T` in exact integer arithmetic.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).map(|k| (self.get(i, k) as i64) * (self.get(j, k) as i64)).sum())
                    .collect()
            })
            .collect()
    }
}

/// Hadamard matrix of dimension `2^n` with the default size cap.
pub fn hadamard(n: u32) -> Result<HadamardMatrix> {
    hadamard_with_cap(n, DEFAULT_HADAMARD_CAP)
}

pub fn hadamard_with_cap(n: u32, cap: u32) -> Result<HadamardMatrix> {
    if n > cap {
        return Err(Error::SizeCap { requested: n, cap });
    }
    let dense = (n <= DENSE_LIMIT).then(|| {
        // Kronecker recursion from H_1 = [1]
        let mut h = vec![1i8];
        let mut d = 1usize;
        for _ in 0..n {
            let nd = 2 * d;
            let mut next = vec![0i8; nd * nd];
            for r in 0..d {
                for c in 0..d {
                    let v = h[r * d + c];
                    next[r * nd + c] = v;
                    next[r * nd + c + d] = v;
                    next[(r + d) * nd + c] = v;
                    next[(r + d) * nd + c + d] = -v;
                }
            }
            h = next;
            d = nd;
        }
        h
    });
    Ok(HadamardMatrix { n, dense })
}

/// Paley-ordered Walsh coefficients `X_k` of a piecewise-constant waveform.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WalshSpectrum {
    coefficients: BTreeMap<PaleyIndex, f64>,
}

impl WalshSpectrum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (u64, f64)>>(pairs: I) -> Self {
        let mut s = Self::new();
        for (k, v) in pairs {
            s.set(k, v);
        }
        s
    }

    pub fn set(&mut self, k: u64, value: f64) -> &mut Self {
        self.coefficients.insert(PaleyIndex(k), value);
        self
    }

    pub fn get(&self, k: u64) -> f64 {
        self.coefficients.get(&PaleyIndex(k)).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.coefficients.iter().map(|(k, v)| (k.0, *v))
    }

    /// Highest Paley order present, `N`.
    pub fn highest_order(&self) -> u64 {
        self.coefficients.keys().next_back().map_or(0, |k| k.0)
    }

    /// `log2` of the minimal segment count.
    pub fn log2_segments(&self) -> u32 {
        PaleyIndex(self.highest_order()).msb()
    }

    /// Minimal segment count `M = 2^m(N)`.
    pub fn segments(&self) -> usize {
        1usize << self.log2_segments()
    }

    /// Reordered amplitude vector with `X~_{i(k)} = X_k` on `2^n` bins.
    pub fn hadamard_vector(&self, n: u32) -> Result<Vec<f64>> {
        let mut out = vec![0.0; 1usize << n];
        for (k, v) in &self.coefficients {
            let i = paley_to_hadamard_index(*k, n)?;
            out[(i - 1) as usize] = *v;
        }
        Ok(out)
    }

    /// Values of `sum_k X_k PAL_k` on the `M` equal subintervals of [0, 1].
    pub fn synthesize(&self) -> Vec<f64> {
        self.synthesize_on(self.log2_segments())
            .expect("minimal resolution always represents the spectrum")
    }

    /// Synthesis on `2^n >= M` bins.
    pub fn synthesize_on(&self, n: u32) -> Result<Vec<f64>> {
        let h = hadamard(n)?;
        Ok(h.mul_vec(&self.hadamard_vector(n)?))
    }

    /// Walsh analysis of a waveform given on `2^n` equal bins. Returns all `2^n` coefficients.
    pub fn analyze(values: &[f64]) -> Result<Self> {
        let len = values.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "waveform length {len} is not a power of two"
            )));
        }
        let n = len.trailing_zeros();
        let h = hadamard(n)?;
        let tilde = h.mul_vec(values);
        let scale = 1.0 / len as f64;
        let mut s = Self::new();
        for k in 0..len as u64 {
            let i = paley_to_hadamard_index(PaleyIndex(k), n)? - 1;
            s.set(k, tilde[i as usize] * scale);
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference Rademacher from the trigonometric definition, away from zeros.
    fn rademacher_trig(j: u32, x: f64) -> i8 {
        let s = (2f64.powi(j as i32) * std::f64::consts::PI * x).sin();
        if s >= 0.0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn rademacher_values() {
        assert_eq!(rademacher(0, 0.0).unwrap(), 1);
        assert_eq!(rademacher(0, 1.0).unwrap(), 1);
        assert_eq!(rademacher(0, 0.77).unwrap(), 1);
        assert_eq!(rademacher(1, 0.25).unwrap(), 1);
        assert_eq!(rademacher(1, 0.75).unwrap(), -1);
        assert_eq!(rademacher(2, 0.3).unwrap(), -1);
        assert!(matches!(rademacher(1, 1.5), Err(Error::Domain(_))));
        assert!(rademacher(1, -0.1).is_err());
    }

    #[test]
    fn rademacher_matches_trig_definition_off_zeros() {
        for j in 0..6 {
            for i in 0..997 {
                let x = (i as f64 + 0.37) / 997.0;
                assert_eq!(rademacher(j, x).unwrap(), rademacher_trig(j, x), "j={j} x={x}");
            }
        }
    }

    #[test]
    fn right_limit_at_zero_crossings() {
        // sin(2 pi x) changes sign at 1/2; right limit is negative
        assert_eq!(rademacher(1, 0.5).unwrap(), -1);
        assert_eq!(rademacher(1, 0.5 + 1e-9).unwrap(), -1);
        assert_eq!(rademacher(2, 0.25).unwrap(), -1);
        assert_eq!(rademacher(2, 0.5).unwrap(), 1);
    }

    #[test]
    fn pal_examples() {
        for i in 0..50 {
            assert_eq!(pal(PaleyIndex(0), i as f64 / 49.0).unwrap(), 1);
        }
        let mids: Vec<i8> = (0..4)
            .map(|b| pal(PaleyIndex(3), (b as f64 + 0.5) / 4.0).unwrap())
            .collect();
        assert_eq!(mids, vec![1, -1, -1, 1]);
    }

    #[test]
    fn pal_inner_products_exact() {
        let a = pal_samples(PaleyIndex(5), 3).unwrap();
        let b = pal_samples(PaleyIndex(6), 3).unwrap();
        let self_ip: i32 = a.iter().map(|&v| (v as i32) * (v as i32)).sum();
        let cross: i32 = a.iter().zip(&b).map(|(&u, &v)| (u as i32) * (v as i32)).sum();
        assert_eq!(self_ip, 8); // integral = 1
        assert_eq!(cross, 0);
    }

    #[test]
    fn pal_samples_match_pointwise_evaluation() {
        for k in 0..64u64 {
            let n = 6;
            let s = pal_samples(PaleyIndex(k), n).unwrap();
            for (b, v) in s.iter().enumerate() {
                let x = (b as f64 + 0.5) / 64.0;
                assert_eq!(*v, pal(PaleyIndex(k), x).unwrap(), "k={k} bin={b}");
            }
        }
    }

    #[test]
    fn hadamard_small_matrices() {
        let h1 = hadamard(1).unwrap();
        assert_eq!(h1.row(0), vec![1, 1]);
        assert_eq!(h1.row(1), vec![1, -1]);
        let h2 = hadamard(2).unwrap();
        let rows: Vec<Vec<i8>> = (0..4).map(|r| h2.row(r)).collect();
        assert_eq!(
            rows,
            vec![vec![1, 1, 1, 1], vec![1, -1, 1, -1], vec![1, 1, -1, -1], vec![1, -1, -1, 1]]
        );
        assert_eq!(hadamard(0).unwrap().row(0), vec![1]);
    }

    #[test]
    fn hadamard_gram_is_scaled_identity() {
        let g = hadamard(3).unwrap().gram();
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(*v, if i == j { 8 } else { 0 });
            }
        }
    }

    #[test]
    fn hadamard_cap_and_on_demand_entries() {
        assert!(matches!(hadamard(17), Err(Error::SizeCap { .. })));
        let big = hadamard(10).unwrap();
        assert!(big.dense.is_none());
        assert_eq!(big.get(0, 1023), 1);
        assert_eq!(big.get(3, 1), -1);
        // dense and on-demand representations agree
        let d = hadamard(8).unwrap();
        for r in (0..256).step_by(7) {
            for c in (0..256).step_by(5) {
                let parity = if (r as u64 & c as u64).count_ones().is_multiple_of(2) { 1 } else { -1 };
                assert_eq!(d.get(r, c), parity);
            }
        }
    }

    #[test]
    fn hadamard_mul_vec_matches_dense_product() {
        let h = hadamard(3).unwrap();
        let v: Vec<f64> = (0..8).map(|i| (i * i) as f64 - 3.0).collect();
        let fast = h.mul_vec(&v);
        for r in 0..8 {
            let slow: f64 = (0..8).map(|c| h.get(r, c) as f64 * v[c]).sum();
            assert_eq!(fast[r], slow);
        }
    }

    #[test]
    fn paley_index_mapping() {
        assert_eq!(paley_to_hadamard_index(PaleyIndex(0), 3).unwrap(), 1);
        assert_eq!(paley_to_hadamard_index(PaleyIndex(3), 2).unwrap(), 4);
        assert_eq!(paley_to_hadamard_index(PaleyIndex(1), 2).unwrap(), 3);
        let h = hadamard(2).unwrap();
        assert_eq!(h.column(2), pal_samples(PaleyIndex(1), 2).unwrap());
        assert!(matches!(
            paley_to_hadamard_index(PaleyIndex(4), 2),
            Err(Error::NotRepresentable { .. })
        ));
    }

    #[test]
    fn paley_index_structure() {
        let k = PaleyIndex(0b1011);
        assert_eq!(k.bits(), vec![1, 1, 0, 1]);
        let rebuilt: u64 = k.bits().iter().enumerate().map(|(j, b)| (*b as u64) << j).sum();
        assert_eq!(rebuilt, 11);
        assert_eq!(k.msb(), 4);
        assert_eq!(k.hamming_weight(), 3);
        assert_eq!(PaleyIndex(0).msb(), 0);
    }

    #[test]
    fn synthesis_examples() {
        let s = WalshSpectrum::from_pairs([(0, 2.5)]);
        assert_eq!(s.synthesize(), vec![2.5]);
        assert_eq!(s.synthesize_on(3).unwrap(), vec![2.5; 8]);
        let (x0, x3) = (1.25, -0.5);
        let w1 = WalshSpectrum::from_pairs([(0, x0), (3, x3)]);
        assert_eq!(w1.segments(), 4);
        assert_eq!(w1.synthesize(), vec![x0 + x3, x0 - x3, x0 - x3, x0 + x3]);
        assert_eq!(w1.hadamard_vector(2).unwrap(), vec![x0, 0.0, 0.0, x3]);
    }

    #[test]
    fn analysis_inverts_synthesis_on_integers() {
        let f = vec![3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, -6.0];
        let s = WalshSpectrum::analyze(&f).unwrap();
        assert_eq!(s.synthesize_on(3).unwrap(), f);
    }

    #[test]
    fn cal_subset_on_eight_bins() {
        let even: Vec<u64> = (0..8).filter(|&k| is_even_parity(PaleyIndex(k))).collect();
        assert_eq!(even, vec![0, 3, 5, 6]);
    }
}
