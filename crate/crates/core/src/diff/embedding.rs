use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, Stream};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 coefficient; the update uses `grad + l2 * param`.
    pub l2: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2: 1e-4,
        }
    }
}

/// One trainable table with its Adam moments.
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub value: Matrix,
    pub first: Matrix,
    pub second: Matrix,
}

impl Param {
    pub fn new(value: Matrix) -> Self {
        let (r, c) = value.shape();
        Param {
            value,
            first: Matrix::zeros(r, c),
            second: Matrix::zeros(r, c),
        }
    }
}

/// User and item base embeddings, plus an optional item table owned by the
/// interaction encoder when it is not shared with the backbone.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingState {
    pub user: Param,
    pub item: Param,
    pub encoder_item: Option<Param>,
    pub step: u64,
    pub adam: AdamConfig,
}

/// Gradients with the same layout as [`EmbeddingState`].
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub user: Matrix,
    pub item: Matrix,
    pub encoder_item: Option<Matrix>,
}

impl Gradients {
    pub fn zeros_like(state: &EmbeddingState) -> Self {
        Gradients {
            user: Matrix::zeros(state.user.value.rows(), state.dim()),
            item: Matrix::zeros(state.item.value.rows(), state.dim()),
            encoder_item: state
                .encoder_item
                .as_ref()
                .map(|p| Matrix::zeros(p.value.rows(), state.dim())),
        }
    }

    /// Gradient slot of the encoder's item table, which is the backbone item
    /// slot when the table is shared.
    pub fn encoder_items_mut(&mut self) -> &mut Matrix {
        match self.encoder_item.as_mut() {
            Some(g) => g,
            None => &mut self.item,
        }
    }

    pub fn scale(&mut self, alpha: Real) {
        self.user.scale(alpha);
        self.item.scale(alpha);
        if let Some(g) = self.encoder_item.as_mut() {
            g.scale(alpha);
        }
    }
}

impl EmbeddingState {
    /// Uniform initialization in `[-1/sqrt(d), 1/sqrt(d)]`, deterministic in
    /// the seed.
    pub fn init(users: usize, items: usize, dim: usize, separate_encoder: bool, seed: u64) -> Result<Self> {
        if users == 0 || items == 0 || dim == 0 {
            return Err(Error::Config(format!(
                "embedding shapes must be positive (users={users}, items={items}, dim={dim})"
            )));
        }
        let mut rng = rng::stream(seed, Stream::Init);
        let bound = 1.0 / (dim as f64).sqrt();
        let mut table = |rows: usize| {
            let data: Vec<Real> = (0..rows * dim)
                .map(|_| rng.gen_range(-bound..=bound) as Real)
                .collect();
            Matrix::from_vec(rows, dim, data)
        };
        let user = table(users);
        let item = table(items);
        let encoder_item = separate_encoder.then(|| Param::new(table(items)));
        Ok(EmbeddingState {
            user: Param::new(user),
            item: Param::new(item),
            encoder_item,
            step: 0,
            adam: AdamConfig::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.user.value.cols()
    }

    pub fn users(&self) -> &Matrix {
        &self.user.value
    }

    pub fn items(&self) -> &Matrix {
        &self.item.value
    }

    /// Item table consumed by the interaction encoder.
    pub fn encoder_items(&self) -> &Matrix {
        match &self.encoder_item {
            Some(p) => &p.value,
            None => &self.item.value,
        }
    }

    pub fn params(&self) -> Vec<&Param> {
        let mut v = vec![&self.user, &self.item];
        if let Some(p) = &self.encoder_item {
            v.push(p);
        }
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut Param> {
        let mut v = vec![&mut self.user, &mut self.item];
        if let Some(p) = &mut self.encoder_item {
            v.push(p);
        }
        v
    }

    pub fn all_finite(&self) -> bool {
        self.params().iter().all(|p| p.value.all_finite())
    }

    /// One bias-corrected Adam update with L2 folded into the gradient.
    pub fn adam_step(&mut self, grads: &Gradients) -> Result<()> {
        let mut pairs: Vec<(&'static str, &Matrix)> = vec![("user", &grads.user), ("item", &grads.item)];
        match (&self.encoder_item, &grads.encoder_item) {
            (Some(_), Some(g)) => pairs.push(("encoder_item", g)),
            (None, None) => {}
            (Some(p), None) => {
                return Err(Error::ShapeMismatch {
                    what: "encoder_item",
                    expected: p.value.shape(),
                    got: (0, 0),
                })
            }
            (None, Some(g)) => {
                return Err(Error::ShapeMismatch {
                    what: "encoder_item",
                    expected: (0, 0),
                    got: g.shape(),
                })
            }
        }
        for ((what, g), p) in pairs.iter().zip(self.params()) {
            if g.shape() != p.value.shape() {
                return Err(Error::ShapeMismatch {
                    what,
                    expected: p.value.shape(),
                    got: g.shape(),
                });
            }
        }

        self.step += 1;
        let cfg = self.adam;
        let t = self.step as i32;
        let bias1 = 1.0 - cfg.beta1.powi(t);
        let bias2 = 1.0 - cfg.beta2.powi(t);
        let grads: Vec<&Matrix> = pairs.iter().map(|p| p.1).collect();
        for (param, g) in self.params_mut().into_iter().zip(grads) {
            let w = param.value.as_mut_slice();
            let m = param.first.as_mut_slice();
            let v = param.second.as_mut_slice();
            for k in 0..w.len() {
                let gk = g.as_slice()[k] as f64 + cfg.l2 * w[k] as f64;
                let mk = cfg.beta1 * m[k] as f64 + (1.0 - cfg.beta1) * gk;
                let vk = cfg.beta2 * v[k] as f64 + (1.0 - cfg.beta2) * gk * gk;
                m[k] = mk as Real;
                v[k] = vk as Real;
                let m_hat = mk / bias1;
                let v_hat = vk / bias2;
                w[k] -= (cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon)) as Real;
            }
        }
        if !self.all_finite() {
            return Err(Error::NonFinite(format!("embeddings after Adam step {}", self.step)));
        }
        Ok(())
    }
}
