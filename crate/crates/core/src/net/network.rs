use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use rand::Rng;

use crate::{Error, Result};

/// Layer sizes of a [`QuantileValueNet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetShape {
    /// Raw state vector length.
    pub state_dim: usize,
    /// Feature width `d` shared by the state encoder and the fraction embedding.
    pub hidden: usize,
    /// Number of cosine basis functions `n`.
    pub n_basis: usize,
    pub n_actions: usize,
}

impl NetShape {
    pub fn param_count(&self) -> usize {
        self.hidden * self.state_dim
            + self.hidden
            + self.n_basis * self.hidden
            + self.hidden
            + self.n_actions * self.hidden
            + self.n_actions
    }

    /// Named parameter blocks in storage order, with shapes.
    pub fn blocks(&self) -> [(&'static str, [usize; 2]); 6] {
        [
            ("encoder.weight", [self.hidden, self.state_dim]),
            ("encoder.bias", [self.hidden, 1]),
            ("embedding.weight", [self.n_basis, self.hidden]),
            ("embedding.bias", [self.hidden, 1]),
            ("head.weight", [self.n_actions, self.hidden]),
            ("head.bias", [self.n_actions, 1]),
        ]
    }

    fn ranges(&self) -> [Range<usize>; 6] {
        let mut start = 0;
        self.blocks().map(|(_, [r, c])| {
            let range = start..start + r * c;
            start = range.end;
            range
        })
    }
}

/// `(state, taus, upstream)` for [`QuantileValueNet::backward`].
pub type BackwardItem<'a> = (&'a [f64], &'a [f64], &'a [Vec<f64>]);

/// Cosine embedding of a fraction:
/// `phi_j(tau) = ReLU(sum_{i<n} cos(i pi tau) w_ij + b_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineEmbedding {
    pub n_basis: usize,
    pub dim: usize,
    /// Row-major `n_basis x dim`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl CosineEmbedding {
    pub fn new(n_basis: usize, dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != n_basis * dim {
            return Err(Error::LengthMismatch {
                what: "embedding weights",
                expected: n_basis * dim,
                found: weights.len(),
            });
        }
        if bias.len() != dim {
            return Err(Error::LengthMismatch { what: "embedding bias", expected: dim, found: bias.len() });
        }
        Ok(Self { n_basis, dim, weights, bias })
    }

    pub fn embed_fraction(&self, tau: f64) -> Vec<f64> {
        let basis = cosine_basis(self.n_basis, tau);
        let mut pre = vec![0.0; self.dim];
        embed_pre(&self.weights, &self.bias, &basis, &mut pre);
        pre.iter().map(|&z| relu(z)).collect()
    }
}

/// `cos(i pi tau)` for `i = 0 .. n`, by the Chebyshev recurrence
/// `c_i = 2 c_1 c_{i-1} - c_{i-2}`.
pub fn cosine_basis(n: usize, tau: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let c1 = libm::cos(PI * tau);
    let (mut prev, mut cur) = (c1, 1.0);
    for _ in 0..n {
        out.push(cur);
        (prev, cur) = (cur, 2.0 * c1 * cur - prev);
    }
    out
}

fn embed_pre(weights: &[f64], bias: &[f64], basis: &[f64], out: &mut [f64]) {
    let dim = bias.len();
    out.copy_from_slice(bias);
    for (i, &c) in basis.iter().enumerate() {
        let row = &weights[i * dim..(i + 1) * dim];
        for (o, &w) in out.iter_mut().zip(row) {
            *o += c * w;
        }
    }
}

#[inline]
fn relu(z: f64) -> f64 {
    if z > 0.0 {
        z
    } else {
        0.0
    }
}

/// Quantile value network
/// `F^{-1}(x, tau)[a] = head(psi(x) * phi(tau))[a]` where `psi` is an affine
/// state encoder followed by ReLU, `phi` the [`CosineEmbedding`] and `*` the
/// element-wise product.
///
/// All parameters live in one flat vector laid out as [`NetShape::blocks`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileValueNet {
    shape: NetShape,
    params: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for [`QuantileValueNet::accumulate_gradient`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    state: Vec<f64>,
    taus: Vec<f64>,
    /// ReLU-ed state features, `hidden`.
    psi: Vec<f64>,
    /// Per tau: ReLU-ed embedding, `hidden`.
    phi: Vec<Vec<f64>>,
    /// Per tau: per-action output.
    pub outputs: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn state_features(&self) -> &[f64] {
        &self.psi
    }

    /// Which ReLU units were active, state encoder first, then the embedding
    /// of each fraction in turn.
    pub fn activation_pattern(&self) -> Vec<bool> {
        self.psi.iter().chain(self.phi.iter().flatten()).map(|&v| v > 0.0).collect()
    }
}

impl QuantileValueNet {
    /// Uniform `+-1/sqrt(fan_in)` initialization for weights and biases.
    pub fn new<R: Rng + ?Sized>(shape: NetShape, rng: &mut R) -> Result<Self> {
        if shape.state_dim == 0 || shape.hidden == 0 || shape.n_basis == 0 || shape.n_actions == 0 {
            return Err(Error::InvalidParameter("network dimensions must be positive".into()));
        }
        let fan_in = [shape.state_dim, shape.state_dim, shape.n_basis, shape.n_basis, shape.hidden, shape.hidden];
        let mut params = Vec::with_capacity(shape.param_count());
        for (range, fan) in shape.ranges().into_iter().zip(fan_in) {
            let bound = 1.0 / libm::sqrt(fan as f64);
            params.extend(range.map(|_| rng.random_range(-bound..bound)));
        }
        Ok(Self { shape, params })
    }

    pub fn from_params(shape: NetShape, params: Vec<f64>) -> Result<Self> {
        if params.len() != shape.param_count() {
            return Err(Error::LengthMismatch {
                what: "network parameters",
                expected: shape.param_count(),
                found: params.len(),
            });
        }
        Ok(Self { shape, params })
    }

    pub fn shape(&self) -> NetShape {
        self.shape
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Named views of the parameter blocks.
    pub fn named_params(&self) -> Vec<(&'static str, [usize; 2], &[f64])> {
        self.shape
            .blocks()
            .into_iter()
            .zip(self.shape.ranges())
            .map(|((name, shape), range)| (name, shape, &self.params[range]))
            .collect()
    }

    /// Overwrites one named block.
    pub fn set_block(&mut self, name: &str, values: &[f64]) -> Result<()> {
        let (idx, _) = self
            .shape
            .blocks()
            .into_iter()
            .enumerate()
            .find(|(_, (n, _))| *n == name)
            .ok_or_else(|| Error::UnknownParameter(name.into()))?;
        let range = self.shape.ranges()[idx].clone();
        if values.len() != range.len() {
            return Err(Error::LengthMismatch { what: "parameter block", expected: range.len(), found: values.len() });
        }
        self.params[range].copy_from_slice(values);
        Ok(())
    }

    /// Sets the output head to zero, so every quantile starts at zero.
    pub fn zero_head(&mut self) {
        let [.., hw, hb] = self.shape.ranges();
        self.params[hw].fill(0.0);
        self.params[hb].fill(0.0);
    }

    pub fn embedding(&self) -> CosineEmbedding {
        let r = self.shape.ranges();
        CosineEmbedding {
            n_basis: self.shape.n_basis,
            dim: self.shape.hidden,
            weights: self.params[r[2].clone()].to_vec(),
            bias: self.params[r[3].clone()].to_vec(),
        }
    }

    /// ReLU state features `psi(x)`.
    pub fn encode(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.shape.state_dim {
            return Err(Error::LengthMismatch { what: "state", expected: self.shape.state_dim, found: state.len() });
        }
        let r = self.shape.ranges();
        let w = &self.params[r[0].clone()];
        let b = &self.params[r[1].clone()];
        let sd = self.shape.state_dim;
        Ok((0..self.shape.hidden)
            .map(|j| relu(b[j] + w[j * sd..(j + 1) * sd].iter().zip(state).map(|(a, x)| a * x).sum::<f64>()))
            .collect())
    }

    /// Quantile values for every action at every fraction in `taus`.
    pub fn forward(&self, state: &[f64], taus: &[f64]) -> Result<ForwardCache> {
        let psi = self.encode(state)?;
        self.forward_from_features(state, psi, taus)
    }

    /// Forward pass reusing precomputed state features.
    pub fn forward_from_features(&self, state: &[f64], psi: Vec<f64>, taus: &[f64]) -> Result<ForwardCache> {
        let shape = self.shape;
        if psi.len() != shape.hidden {
            return Err(Error::LengthMismatch { what: "state features", expected: shape.hidden, found: psi.len() });
        }
        let r = shape.ranges();
        let emb_w = &self.params[r[2].clone()];
        let emb_b = &self.params[r[3].clone()];
        let head_w = &self.params[r[4].clone()];
        let head_b = &self.params[r[5].clone()];

        let mut phi = Vec::with_capacity(taus.len());
        let mut outputs = Vec::with_capacity(taus.len());
        let mut pre = vec![0.0; shape.hidden];
        let mut mixed = vec![0.0; shape.hidden];
        for &tau in taus {
            let basis = cosine_basis(shape.n_basis, tau);
            embed_pre(emb_w, emb_b, &basis, &mut pre);
            let p: Vec<f64> = pre.iter().map(|&z| relu(z)).collect();
            for j in 0..shape.hidden {
                mixed[j] = psi[j] * p[j];
            }
            let out: Vec<f64> = (0..shape.n_actions)
                .map(|a| {
                    head_b[a]
                        + head_w[a * shape.hidden..(a + 1) * shape.hidden]
                            .iter()
                            .zip(&mixed)
                            .map(|(w, m)| w * m)
                            .sum::<f64>()
                })
                .collect();
            phi.push(p);
            outputs.push(out);
        }
        Ok(ForwardCache { state: state.to_vec(), taus: taus.to_vec(), psi, phi, outputs })
    }

    /// Quantile values of one action at each fraction.
    pub fn quantiles(&self, state: &[f64], taus: &[f64], action: usize) -> Result<Vec<f64>> {
        if action >= self.shape.n_actions {
            return Err(Error::InvalidParameter(alloc::format!("action {action} out of range")));
        }
        Ok(self.forward(state, taus)?.outputs.into_iter().map(|o| o[action]).collect())
    }

    /// Adds the gradient of a scalar loss to `grad` (same layout as the
    /// parameters), given `upstream[t][a] = dL / d output[t][a]`.
    pub fn accumulate_gradient(&self, cache: &ForwardCache, upstream: &[Vec<f64>], grad: &mut [f64]) -> Result<()> {
        let shape = self.shape;
        if grad.len() != self.params.len() {
            return Err(Error::LengthMismatch {
                what: "gradient buffer",
                expected: self.params.len(),
                found: grad.len(),
            });
        }
        if upstream.len() != cache.taus.len() {
            return Err(Error::LengthMismatch {
                what: "upstream gradient rows",
                expected: cache.taus.len(),
                found: upstream.len(),
            });
        }
        let r = shape.ranges();
        let h = shape.hidden;
        let head_w = &self.params[r[4].clone()];

        let mut d_psi = vec![0.0; h];
        let mut d_mixed = vec![0.0; h];
        for ((up, phi), &tau) in upstream.iter().zip(&cache.phi).zip(&cache.taus) {
            if up.len() != shape.n_actions {
                return Err(Error::LengthMismatch {
                    what: "upstream gradient",
                    expected: shape.n_actions,
                    found: up.len(),
                });
            }
            d_mixed.fill(0.0);
            for (a, &g) in up.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                grad[r[5].start + a] += g;
                let w_row = &head_w[a * h..(a + 1) * h];
                let gw = &mut grad[r[4].start + a * h..r[4].start + (a + 1) * h];
                for j in 0..h {
                    gw[j] += g * cache.psi[j] * phi[j];
                    d_mixed[j] += g * w_row[j];
                }
            }
            let basis = cosine_basis(shape.n_basis, tau);
            for j in 0..h {
                d_psi[j] += d_mixed[j] * phi[j];
                // ReLU: phi_j > 0 exactly when its pre-activation is positive
                if phi[j] > 0.0 {
                    let d_pre = d_mixed[j] * cache.psi[j];
                    grad[r[3].start + j] += d_pre;
                    for (i, &c) in basis.iter().enumerate() {
                        grad[r[2].start + i * h + j] += c * d_pre;
                    }
                }
            }
        }

        let sd = shape.state_dim;
        for j in 0..h {
            if cache.psi[j] > 0.0 {
                let d_pre = d_psi[j];
                grad[r[1].start + j] += d_pre;
                for (k, &x) in cache.state.iter().enumerate() {
                    grad[r[0].start + j * sd + k] += d_pre * x;
                }
            }
        }
        Ok(())
    }

    /// Gradient of `sum_b sum_{t,a} upstream_b[t][a] * output_b[t][a]` over a
    /// batch of `(state, taus, upstream)` triples.
    pub fn backward(&self, batch: &[BackwardItem<'_>]) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.params.len()];
        for &(state, taus, upstream) in batch {
            let cache = self.forward(state, taus)?;
            self.accumulate_gradient(&cache, upstream, &mut grad)?;
        }
        Ok(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> QuantileValueNet {
        let shape = NetShape { state_dim: 3, hidden: 4, n_basis: 5, n_actions: 2 };
        QuantileValueNet::new(shape, &mut ChaCha8Rng::seed_from_u64(7)).unwrap()
    }

    #[test]
    fn embedding_at_zero_sums_rows() {
        let emb = CosineEmbedding::new(3, 2, vec![1.0, -1.0, 0.5, -2.0, 0.25, 0.5], vec![0.0, 0.1]).unwrap();
        // column sums plus bias: (1.75, -2.4)
        let phi = emb.embed_fraction(0.0);
        assert!((phi[0] - 1.75).abs() < 1e-15);
        assert_eq!(phi[1], 0.0);
    }

    #[test]
    fn recurrence_matches_direct_cosines() {
        for tau in [0.0, 0.013, 0.25, 0.5, 0.77, 1.0] {
            for (i, c) in cosine_basis(64, tau).into_iter().enumerate() {
                assert!((c - libm::cos(i as f64 * PI * tau)).abs() < 1e-12, "tau={tau} i={i}");
            }
        }
    }

    #[test]
    fn embedding_at_one_alternates() {
        let b = cosine_basis(4, 1.0);
        for (i, v) in b.iter().enumerate() {
            let expected = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_embedding_parameters() {
        let emb = CosineEmbedding::new(4, 3, vec![0.0; 12], vec![0.0; 3]).unwrap();
        for tau in [0.0, 0.3, 1.0] {
            assert_eq!(emb.embed_fraction(tau), vec![0.0; 3]);
        }
    }

    #[test]
    fn forward_is_head_of_hadamard_product() {
        let net = tiny();
        let state = [0.5, -1.0, 2.0];
        let tau = 0.3;
        let cache = net.forward(&state, &[tau]).unwrap();
        let psi = net.encode(&state).unwrap();
        let phi = net.embedding().embed_fraction(tau);
        let named = net.named_params();
        let (hw, hb) = (named[4].2, named[5].2);
        for a in 0..2 {
            let expect: f64 = hb[a] + (0..4).map(|j| hw[a * 4 + j] * psi[j] * phi[j]).sum::<f64>();
            assert_eq!(cache.outputs[0][a], expect);
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let net = tiny();
        let state = [0.1, 0.2, 0.3];
        let up = vec![vec![0.0, 0.0]; 2];
        let g = net.backward(&[(&state[..], &[0.2, 0.7][..], &up[..])]).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn duplicated_sample_doubles_gradient() {
        let net = tiny();
        let state = [0.1, -0.2, 0.3];
        let taus = [0.2, 0.7];
        let up = [vec![0.3, -1.0], vec![0.5, 0.25]];
        let one = net.backward(&[(&state[..], &taus[..], &up[..])]).unwrap();
        let two = net.backward(&[(&state[..], &taus[..], &up[..]), (&state[..], &taus[..], &up[..])]).unwrap();
        for (a, b) in one.iter().zip(&two) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn shape_errors() {
        let net = tiny();
        assert!(net.forward(&[1.0], &[0.5]).is_err());
        let up = [vec![0.0; 3]];
        assert!(net.backward(&[(&[0.0, 0.0, 0.0][..], &[0.5][..], &up[..])]).is_err());
        let mut net = net;
        assert!(matches!(net.set_block("nope", &[]), Err(Error::UnknownParameter(_))));
        assert!(net.set_block("head.bias", &[1.0]).is_err());
        net.set_block("head.bias", &[1.0, 2.0]).unwrap();
        assert_eq!(net.named_params()[5].2, &[1.0, 2.0]);
    }
}
