//! Two-layer network `h(x) = W2·σ(W1 x + b1) + b2` with a scalar output.
//!
//! Weights live in one flat vector laid out as `(W1 row-major, b1, W2, b2)`.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Landscape, Sample};
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `(h − y)² / 2`.
    Squared,
    /// `log(1 + exp(−y h))` with labels in `{−1, +1}`.
    Logistic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyNet {
    pub d_in: usize,
    pub hidden: usize,
    pub activation: Activation,
    pub loss: LossKind,
}

impl ToyNet {
    pub fn new(d_in: usize, hidden: usize, activation: Activation, loss: LossKind) -> Self {
        Self {
            d_in,
            hidden,
            activation,
            loss,
        }
    }

    pub fn num_weights(&self) -> usize {
        self.hidden * self.d_in + 2 * self.hidden + 1
    }

    fn check(&self, z: &Sample, w: &[f64]) -> Result<()> {
        if w.len() != self.num_weights() {
            return Err(Error::Dimension {
                expected: self.num_weights(),
                got: w.len(),
                context: "toy-net weight layout",
            });
        }
        if z.x.len() != self.d_in {
            return Err(Error::Dimension {
                expected: self.d_in,
                got: z.x.len(),
                context: "toy-net input",
            });
        }
        Ok(())
    }

    /// Checked loss.
    pub fn toynet_loss(&self, z: &Sample, w: &[f64]) -> Result<f64> {
        self.check(z, w)?;
        Ok(self.loss(z, w))
    }

    /// Checked gradient.
    pub fn toynet_grad(&self, z: &Sample, w: &[f64]) -> Result<Vec<f64>> {
        self.check(z, w)?;
        let mut g = vec![0.0; w.len()];
        self.grad(z, w, &mut g);
        Ok(g)
    }

    fn act(&self, u: f64) -> f64 {
        match self.activation {
            Activation::Tanh => u.tanh(),
            Activation::Relu => u.max(0.0),
        }
    }

    fn act_prime(&self, u: f64, a: f64) -> f64 {
        match self.activation {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if u > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn split<'a>(&self, w: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], f64) {
        let (w1, rest) = w.split_at(self.hidden * self.d_in);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, rest) = rest.split_at(self.hidden);
        (w1, b1, w2, rest[0])
    }

    /// Returns `(h, pre-activations, activations)`.
    fn forward(&self, x: &[f64], w: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let (w1, b1, w2, b2) = self.split(w);
        let mut pre = Vec::with_capacity(self.hidden);
        let mut post = Vec::with_capacity(self.hidden);
        let mut h = b2;
        for j in 0..self.hidden {
            let row = &w1[j * self.d_in..(j + 1) * self.d_in];
            let u = b1[j] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            let a = self.act(u);
            h += w2[j] * a;
            pre.push(u);
            post.push(a);
        }
        (h, pre, post)
    }

    /// Hidden-layer pre-activations `W1 x + b1` (distance to the ReLU kinks).
    pub fn preactivations(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        self.forward(x, w).1
    }

    pub fn output(&self, x: &[f64], w: &[f64]) -> f64 {
        self.forward(x, w).0
    }

    /// `∇_w h(x, w)`: the tangent features of the network at `w`.
    pub fn output_grad(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.num_weights()];
        let (_, pre, post) = self.forward(x, w);
        self.backprop(x, w, 1.0, &pre, &post, &mut g);
        g
    }

    fn backprop(&self, x: &[f64], w: &[f64], dh: f64, pre: &[f64], post: &[f64], g: &mut [f64]) {
        let (_, _, w2, _) = self.split(w);
        let nw1 = self.hidden * self.d_in;
        for j in 0..self.hidden {
            let du = dh * w2[j] * self.act_prime(pre[j], post[j]);
            for (k, xk) in x.iter().enumerate() {
                g[j * self.d_in + k] = du * xk;
            }
            g[nw1 + j] = du;
            g[nw1 + self.hidden + j] = dh * post[j];
        }
        g[nw1 + 2 * self.hidden] = dh;
    }

    fn loss_and_dh(&self, h: f64, y: f64) -> (f64, f64) {
        match self.loss {
            LossKind::Squared => {
                let r = h - y;
                (0.5 * r * r, r)
            }
            LossKind::Logistic => {
                let t = -y * h;
                let loss = if t > 0.0 {
                    t + (-t).exp().ln_1p()
                } else {
                    t.exp().ln_1p()
                };
                // dℓ/dh = −y σ(t)
                let sig = 1.0 / (1.0 + (-t).exp());
                (loss, -y * sig)
            }
        }
    }
}

impl Landscape for ToyNet {
    fn dim(&self) -> usize {
        self.num_weights()
    }

    fn input_dim(&self) -> Option<usize> {
        Some(self.d_in)
    }

    fn loss(&self, z: &Sample, w: &[f64]) -> f64 {
        let h = self.output(&z.x, w);
        self.loss_and_dh(h, z.y).0
    }

    fn grad(&self, z: &Sample, w: &[f64], grad: &mut [f64]) {
        let (h, pre, post) = self.forward(&z.x, w);
        let (_, dh) = self.loss_and_dh(h, z.y);
        self.backprop(&z.x, w, dh, &pre, &post, grad);
    }

    fn zero_one(&self, z: &Sample, w: &[f64]) -> Option<f64> {
        let h = self.output(&z.x, w);
        let wrong = if z.y > 0.0 { h <= 0.0 } else { h > 0.0 };
        Some(if wrong { 1.0 } else { 0.0 })
    }

    fn initial_weights(&self, rng: &mut RngStream) -> Vec<f64> {
        let s1 = Normal::new(0.0, 1.0 / (self.d_in as f64).sqrt()).unwrap();
        let s2 = Normal::new(0.0, 1.0 / (self.hidden as f64).sqrt()).unwrap();
        let mut w = vec![0.0; self.num_weights()];
        let nw1 = self.hidden * self.d_in;
        for v in &mut w[..nw1] {
            *v = s1.sample(rng);
        }
        for v in &mut w[nw1 + self.hidden..nw1 + 2 * self.hidden] {
            *v = s2.sample(rng);
        }
        w
    }
}
