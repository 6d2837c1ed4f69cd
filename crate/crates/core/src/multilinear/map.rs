use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::MultilinearError;

/// A `k`-linear map `(R^n)^k → R^d`, stored densely.
///
/// Entry `(o, i₁, …, i_k)` lives at `o·n^k + i₁·n^{k-1} + … + i_k`: the first
/// argument slot is the most significant. Arity 0 is a plain vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultilinearMap {
    arity: usize,
    in_dim: usize,
    out_dim: usize,
    entries: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormMode {
    /// Frobenius norm, never below the operator norm.
    Upper,
    /// Best value found by seeded multistart ascent, never above it.
    Sampled,
}

/// Two-sided estimate of the operator norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
}

const SAMPLED_STARTS: usize = 12;
const SAMPLED_SEED: u64 = 0x6d75_6c74_696c_696e;
const MAX_SWEEPS: usize = 200;

fn checked_len(arity: usize, in_dim: usize, out_dim: usize) -> Result<usize, MultilinearError> {
    u32::try_from(arity)
        .ok()
        .and_then(|k| in_dim.checked_pow(k))
        .and_then(|p| p.checked_mul(out_dim))
        .ok_or_else(|| MultilinearError::Dimension(format!("{out_dim}×{in_dim}^{arity} entries overflow")))
}

fn unit(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

impl MultilinearMap {
    pub fn zeros(arity: usize, in_dim: usize, out_dim: usize) -> Self {
        let len = checked_len(arity, in_dim, out_dim).expect("map too large");
        Self { arity, in_dim, out_dim, entries: vec![0.0; len] }
    }

    pub fn from_entries(arity: usize, in_dim: usize, out_dim: usize, entries: Vec<f64>) -> Result<Self, MultilinearError> {
        let len = checked_len(arity, in_dim, out_dim)?;
        if entries.len() != len {
            return Err(MultilinearError::Dimension(format!(
                "{} entries given, shape {out_dim}×{in_dim}^{arity} needs {len}",
                entries.len()
            )));
        }
        Ok(Self { arity, in_dim, out_dim, entries })
    }

    /// Arity-0 map holding `v`; `in_dim` is the dimension of the (absent)
    /// arguments, kept so it can be composed with maps on `R^in_dim`.
    pub fn vector(in_dim: usize, v: Vec<f64>) -> Self {
        let d = v.len();
        Self { arity: 0, in_dim, out_dim: d, entries: v }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(1, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1.0;
        }
        m
    }

    /// Row-major `d × n` matrix as a linear map.
    pub fn linear(rows: &[Vec<f64>]) -> Result<Self, MultilinearError> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(MultilinearError::Dimension("ragged matrix rows".into()));
        }
        Self::from_entries(1, n, rows.len(), rows.concat())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `n^arity`, the number of entries per output component.
    pub fn slot_volume(&self) -> usize {
        self.entries.len().checked_div(self.out_dim).unwrap_or(0)
    }

    fn offset(&self, out: usize, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.arity);
        idx.iter().fold(out, |acc, &i| acc * self.in_dim + i)
    }

    pub fn get(&self, out: usize, idx: &[usize]) -> f64 {
        self.entries[self.offset(out, idx)]
    }

    pub fn set(&mut self, out: usize, idx: &[usize], value: f64) {
        let o = self.offset(out, idx);
        self.entries[o] = value;
    }

    /// `A(h₁, …, h_k)`.
    pub fn apply(&self, args: &[&[f64]]) -> Result<Vec<f64>, MultilinearError> {
        if args.len() != self.arity || args.iter().any(|h| h.len() != self.in_dim) {
            return Err(MultilinearError::Dimension(format!(
                "map of arity {} on R^{} applied to {} arguments",
                self.arity,
                self.in_dim,
                args.len()
            )));
        }
        let mut cur = self.entries.clone();
        // contract the last slot first; the remaining slots stay contiguous
        for h in args.iter().rev() {
            cur = cur.chunks_exact(self.in_dim).map(|c| c.iter().zip(*h).map(|(a, b)| a * b).sum()).collect();
        }
        Ok(cur)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { entries: self.entries.iter().map(|x| x * s).collect(), ..self.clone() }
    }

    fn same_shape(&self, other: &Self) -> Result<(), MultilinearError> {
        if (self.arity, self.in_dim, self.out_dim) != (other.arity, other.in_dim, other.out_dim) {
            return Err(MultilinearError::Dimension(format!(
                "shapes ({}, {}, {}) and ({}, {}, {}) differ",
                self.arity, self.in_dim, self.out_dim, other.arity, other.in_dim, other.out_dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MultilinearError> {
        self.same_shape(other)?;
        Ok(Self {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    /// `max |a - b|` over entries.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, MultilinearError> {
        self.same_shape(other)?;
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// Average over all permutations of the argument slots.
    ///
    /// Permuting slots permutes each index tuple, so averaging over
    /// permutations averages each entry over the tuples with the same
    /// sorted multiset.
    pub fn symmetrize(&self) -> Self {
        use std::collections::HashMap;
        let vol = self.slot_volume();
        let mut out = self.clone();
        let mut idx = vec![0usize; self.arity];
        let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for flat in 0..vol {
            let mut r = flat;
            for slot in (0..self.arity).rev() {
                idx[slot] = r % self.in_dim;
                r /= self.in_dim;
            }
            let mut key = idx.clone();
            key.sort_unstable();
            groups.entry(key).or_default().push(flat);
        }
        for members in groups.values() {
            for o in 0..self.out_dim {
                let base = o * vol;
                let mean = members.iter().map(|&f| self.entries[base + f]).sum::<f64>() / members.len() as f64;
                for &f in members {
                    out.entries[base + f] = mean;
                }
            }
        }
        out
    }

    pub fn operator_norm(&self, mode: NormMode) -> f64 {
        match mode {
            NormMode::Upper => self.entries.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormMode::Sampled => self.sampled_norm(SAMPLED_STARTS, SAMPLED_SEED),
        }
    }

    pub fn norm_bracket(&self) -> NormBracket {
        NormBracket { lower: self.operator_norm(NormMode::Sampled), upper: self.operator_norm(NormMode::Upper) }
    }

    /// `max |A(h₁, …, h_k)|` over unit `hᵢ`, approached from below by
    /// alternating maximization: with all slots but one fixed, `A` is a
    /// matrix and its best unit argument is found by power iteration.
    pub fn sampled_norm(&self, starts: usize, seed: u64) -> f64 {
        if self.entries.iter().all(|&x| x == 0.0) {
            return 0.0;
        }
        if self.arity == 0 {
            return self.entries.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        let n = self.in_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0.0f64;
        for _ in 0..starts.max(1) {
            let mut hs: Vec<Vec<f64>> = (0..self.arity)
                .map(|_| {
                    let mut h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    if unit(&mut h) == 0.0 {
                        h[0] = 1.0;
                    }
                    h
                })
                .collect();
            let mut value = self.value_at(&hs);
            for _ in 0..MAX_SWEEPS {
                for slot in 0..self.arity {
                    let m = self.slot_matrix(&hs, slot);
                    hs[slot] = top_right_singular(&m, self.out_dim, n, &hs[slot]);
                }
                let next = self.value_at(&hs);
                let done = next - value <= 1e-15 * next.max(1e-300);
                value = value.max(next);
                if done {
                    break;
                }
            }
            best = best.max(value);
        }
        best
    }

    fn value_at(&self, hs: &[Vec<f64>]) -> f64 {
        let args: Vec<&[f64]> = hs.iter().map(Vec::as_slice).collect();
        self.apply(&args).expect("shape checked").iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// The `d × n` matrix of `h ↦ A(h₁, …, h, …, h_k)` with `h` in `slot`.
    fn slot_matrix(&self, hs: &[Vec<f64>], slot: usize) -> Vec<f64> {
        let n = self.in_dim;
        let mut m = vec![0.0; self.out_dim * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let args: Vec<&[f64]> =
                (0..self.arity).map(|s| if s == slot { e.as_slice() } else { hs[s].as_slice() }).collect();
            let col = self.apply(&args).expect("shape checked");
            for (o, v) in col.into_iter().enumerate() {
                m[o * n + j] = v;
            }
        }
        m
    }

    /// Kronecker-layout tensor product: arity adds, output index is
    /// `o_b·C.out_dim + o_c`, and `(B⊗C)(h, k) = B(h) ⊗ C(k)`.
    pub fn tensor_product(&self, c: &Self) -> Result<Self, MultilinearError> {
        if self.in_dim != c.in_dim {
            return Err(MultilinearError::Dimension(format!(
                "tensor product of maps on R^{} and R^{}",
                self.in_dim, c.in_dim
            )));
        }
        let (vb, vc) = (self.slot_volume(), c.slot_volume());
        let out_dim = self.out_dim * c.out_dim;
        let mut entries = vec![0.0; out_dim * vb * vc];
        for ob in 0..self.out_dim {
            for oc in 0..c.out_dim {
                let base = (ob * c.out_dim + oc) * vb * vc;
                for i in 0..vb {
                    let b = self.entries[ob * vb + i];
                    for j in 0..vc {
                        entries[base + i * vc + j] = b * c.entries[oc * vc + j];
                    }
                }
            }
        }
        Ok(Self { arity: self.arity + c.arity, in_dim: self.in_dim, out_dim, entries })
    }

    /// `A · (P₁ ⊗ … ⊗ P_j)`: part `s` feeds argument slot `s` of `A`, and the
    /// arguments of the result are those of the parts, in order.
    pub fn compose(&self, parts: &[&Self]) -> Result<Self, MultilinearError> {
        if parts.len() != self.arity {
            return Err(MultilinearError::Dimension(format!(
                "{} parts for a map of arity {}",
                parts.len(),
                self.arity
            )));
        }
        let in_dim = match parts.first() {
            Some(p) => p.in_dim,
            None => return Ok(self.clone()),
        };
        for p in parts {
            if p.out_dim != self.in_dim || p.in_dim != in_dim {
                return Err(MultilinearError::Dimension(format!(
                    "part R^{}→R^{} does not fit a slot of R^{} (common input R^{in_dim})",
                    p.in_dim, p.out_dim, self.in_dim
                )));
            }
        }
        // shape: [out, slot sizes...]; replace one slot at a time
        let mut dims: Vec<usize> = std::iter::once(self.out_dim).chain(std::iter::repeat_n(self.in_dim, self.arity)).collect();
        let mut cur = self.entries.clone();
        for (s, p) in parts.iter().enumerate() {
            let axis = s + 1;
            let pre: usize = dims[..axis].iter().product();
            let post: usize = dims[axis + 1..].iter().product();
            let d = dims[axis];
            let width = p.slot_volume();
            let mut next = vec![0.0; pre * width * post];
            for a in 0..pre {
                for k in 0..d {
                    let src = &cur[(a * d + k) * post..(a * d + k + 1) * post];
                    let row = &p.entries[k * width..(k + 1) * width];
                    for (w, &pv) in row.iter().enumerate() {
                        if pv == 0.0 {
                            continue;
                        }
                        let dst = &mut next[(a * width + w) * post..(a * width + w + 1) * post];
                        dst.iter_mut().zip(src).for_each(|(x, y)| *x += pv * y);
                    }
                }
            }
            dims[axis] = width;
            cur = next;
        }
        let arity = parts.iter().map(|p| p.arity).sum();
        Self::from_entries(arity, in_dim, self.out_dim, cur)
    }

    /// Reads `A` as a linear map on the flattened `(R^n)^{⊗k}` and applies it
    /// to the outputs of `B`: `(A∘B)[o, I] = Σ_J A[o, J]·B[J, I]`.
    pub fn after_flat(&self, b: &Self) -> Result<Self, MultilinearError> {
        let va = self.slot_volume();
        if b.out_dim != va {
            return Err(MultilinearError::Dimension(format!("flat composition {va} vs {}", b.out_dim)));
        }
        let vb = b.slot_volume();
        let mut entries = vec![0.0; self.out_dim * vb];
        for o in 0..self.out_dim {
            for j in 0..va {
                let a = self.entries[o * va + j];
                for i in 0..vb {
                    entries[o * vb + i] += a * b.entries[j * vb + i];
                }
            }
        }
        Self::from_entries(b.arity, b.in_dim, self.out_dim, entries)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain numeric struct serializes")
    }
}

/// Unit vector maximizing `|M h|` for the `d × n` matrix `m`, by power
/// iteration on `MᵀM` warm-started at `h0`.
fn top_right_singular(m: &[f64], d: usize, n: usize, h0: &[f64]) -> Vec<f64> {
    let mut h = h0.to_vec();
    let mut mh = vec![0.0; d];
    for _ in 0..100 {
        for (o, v) in mh.iter_mut().enumerate() {
            *v = (0..n).map(|j| m[o * n + j] * h[j]).sum();
        }
        let mut next: Vec<f64> = (0..n).map(|j| (0..d).map(|o| m[o * n + j] * mh[o]).sum()).collect();
        if unit(&mut next) == 0.0 {
            return h;
        }
        let delta: f64 = next.iter().zip(&h).map(|(a, b)| (a - b).abs()).sum();
        h = next;
        if delta < 1e-14 {
            break;
        }
    }
    h
}
