// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::pulse::{ghz_to_per_ps, RATE_NORM_GHZ};
use crate::ratemodel::ActivationModel;
use crate::stream::node_rng;

/// Rate-coded multilayer perceptron mirroring a lowered spiking network.
///
/// Layer 0 holds the inputs. With `normalizers` set, each input first passes
/// through a fixed neuron with unit weight; otherwise inputs drive layer 1
/// directly. `weights[k][i][j]` connects neuron `i` of layer `k` to neuron
/// `j` of layer `k + 1`; `biases[k][j]` feeds neuron `j` of layer `k + 1`.
/// Rates, weights and biases are in units of `rate_norm`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
    /// One transfer curve per layer, in GHz.
    pub activations: Vec<ActivationModel>,
    /// Dead time of the mergers the lowering inserts, ps.
    pub t_dead: f64,
    pub rate_norm: f64,
    pub normalizers: bool,
}

/// One training pattern, normalized rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        for s in &samples {
            if let Some(v) = s.input.iter().chain(&s.target).find(|v| !(0.0..=2.0).contains(*v)) {
                return Err(invalid(format!("dataset value {v} outside [0, 2]")));
            }
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Per-layer quantities kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct ForwardTrace {
    pub rates: Vec<Vec<f64>>,
    pub nets: Vec<Vec<f64>>,
    /// Slope of the excitatory and inhibitory saturation at this input.
    pub slopes: Vec<Vec<(f64, f64)>>,
}

impl MlpSpec {
    /// All-zero network with the given layer sizes.
    pub fn new(sizes: &[usize], activations: Vec<ActivationModel>, t_dead: f64) -> Result<Self> {
        let mlp = Self {
            sizes: sizes.to_vec(),
            weights: sizes.windows(2).map(|w| vec![vec![0.0; w[1]]; w[0]]).collect(),
            biases: sizes[1.min(sizes.len())..].iter().map(|&n| vec![0.0; n]).collect(),
            activations,
            t_dead,
            rate_norm: RATE_NORM_GHZ,
            normalizers: true,
        };
        mlp.validate()?;
        Ok(mlp)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.sizes.len();
        if l == 0 || self.sizes.contains(&0) {
            return Err(invalid("layer sizes must be >= 1"));
        }
        if self.activations.len() != l {
            return Err(Error::Dimension { expected: l, got: self.activations.len() });
        }
        if self.weights.len() != l - 1 || self.biases.len() != l - 1 {
            return Err(Error::Dimension { expected: l - 1, got: self.weights.len().min(self.biases.len()) });
        }
        for k in 0..l - 1 {
            let (a, b) = (self.sizes[k], self.sizes[k + 1]);
            if self.weights[k].len() != a || self.weights[k].iter().any(|r| r.len() != b) {
                return Err(invalid(format!("weight block {k} is not {a}x{b}")));
            }
            if self.biases[k].len() != b {
                return Err(Error::Dimension { expected: b, got: self.biases[k].len() });
            }
        }
        for m in &self.activations {
            m.validate()?;
        }
        let finite = self.params().iter().all(|v| v.is_finite());
        if !finite {
            return Err(invalid("non-finite weight or bias"));
        }
        if self.max_abs_weight() > 1.0 {
            return Err(Error::Contract(format!(
                "|w| = {} exceeds 1; pass probabilities cannot exceed 1",
                self.max_abs_weight()
            )));
        }
        if !(self.t_dead >= 0.0) || !(self.rate_norm > 0.0) {
            return Err(invalid("t_dead must be >= 0 and rate_norm > 0"));
        }
        Ok(())
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.weights
            .iter()
            .flatten()
            .flatten()
            .fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn n_inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_outputs(&self) -> usize {
        *self.sizes.last().expect("non-empty")
    }

    /// Trainable parameters, block by block: weights row-major then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            p.extend(w.iter().flatten());
            p.extend(b);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        let n = self.params().len();
        if p.len() != n {
            return Err(Error::Dimension { expected: n, got: p.len() });
        }
        let mut it = p.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut().flatten().chain(b.iter_mut()) {
                *v = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// Draws fresh parameters from `seed`. Weight magnitudes are uniform in
    /// `[0, 1]`; a weight that is already non-zero keeps its sign, so a wiring
    /// pattern set up front survives, and zero weights get a random sign.
    /// Biases are uniform in `[0, 0.5]`, which keeps rectifying units alive
    /// at the start.
    pub fn randomize(&mut self, seed: u64) {
        let mut rng = node_rng(seed, "mlp-init");
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut().flatten() {
                let draw: f64 = rng.random_range(-1.0..=1.0);
                *v = if *v == 0.0 { draw } else { draw.abs().copysign(*v) };
            }
            for v in b.iter_mut() {
                *v = rng.random_range(0.0..=0.5);
            }
        }
    }

    pub fn clip_weights(&mut self, lo: f64, hi: f64) {
        for v in self.weights.iter_mut().flatten().flatten() {
            *v = v.clamp(lo, hi);
        }
    }

    /// Merger saturation in normalized units, with its slope. Ports with a
    /// single driver are wired directly and pass through unchanged.
    fn saturate(&self, p: f64, drivers: usize) -> (f64, f64) {
        if drivers < 2 {
            return (p, 1.0);
        }
        let d = 1.0 + ghz_to_per_ps(p * self.rate_norm) * self.t_dead;
        (p / d, 1.0 / (d * d))
    }

    fn act(&self, layer: usize, net: f64) -> (f64, f64) {
        let m = &self.activations[layer];
        let g = net * self.rate_norm;
        (m.eval(g) / self.rate_norm, m.deriv(g))
    }

    pub(crate) fn forward_trace(&self, input: &[f64]) -> Result<ForwardTrace> {
        if input.len() != self.n_inputs() {
            return Err(Error::Dimension { expected: self.n_inputs(), got: input.len() });
        }
        let mut tr = ForwardTrace {
            rates: Vec::with_capacity(self.sizes.len()),
            nets: Vec::with_capacity(self.sizes.len()),
            slopes: Vec::with_capacity(self.sizes.len()),
        };
        tr.rates.push(if self.normalizers {
            input.iter().map(|&x| self.act(0, x).0).collect()
        } else {
            input.to_vec()
        });
        tr.nets.push(input.to_vec());
        tr.slopes.push(vec![(1.0, 1.0); input.len()]);
        for k in 0..self.weights.len() {
            let prev = &tr.rates[k];
            let n = self.sizes[k + 1];
            let (mut nets, mut rates, mut slopes) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
            for j in 0..n {
                let (mut pos, mut neg, mut np, mut nn) = (0.0, 0.0, 0, 0);
                for (i, &r) in prev.iter().enumerate() {
                    let w = self.weights[k][i][j];
                    if w > 0.0 {
                        pos += w * r;
                        np += 1;
                    } else if w < 0.0 {
                        neg -= w * r;
                        nn += 1;
                    }
                }
                let b = self.biases[k][j];
                if b > 0.0 {
                    pos += b;
                    np += 1;
                } else if b < 0.0 {
                    neg -= b;
                    nn += 1;
                }
                let (sp, dp) = self.saturate(pos, np);
                let (sn, dn) = self.saturate(neg, nn);
                let net = sp - sn;
                nets.push(net);
                rates.push(self.act(k + 1, net).0);
                slopes.push((dp, dn));
            }
            tr.nets.push(nets);
            tr.rates.push(rates);
            tr.slopes.push(slopes);
        }
        Ok(tr)
    }

    /// Output-layer rates for one normalized input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_trace(input)?.rates.pop().expect("non-empty"))
    }

    /// Mean squared error over all samples and outputs.
    pub fn loss(&self, data: &Dataset) -> Result<f64> {
        Ok(self.loss_and_grad(data)?.0)
    }

    /// Loss and its gradient in [`params`](Self::params) order.
    pub fn loss_and_grad(&self, data: &Dataset) -> Result<(f64, Vec<f64>)> {
        if data.is_empty() {
            return Err(invalid("empty dataset"));
        }
        let n_out = self.n_outputs();
        let scale = 1.0 / (data.len() * n_out) as f64;
        let mut gw: Vec<Vec<Vec<f64>>> = self.weights.iter().map(|w| vec![vec![0.0; w[0].len()]; w.len()]).collect();
        let mut gb: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut loss = 0.0;
        for s in &data.samples {
            if s.target.len() != n_out {
                return Err(Error::Dimension { expected: n_out, got: s.target.len() });
            }
            let tr = self.forward_trace(&s.input)?;
            let out = tr.rates.last().expect("non-empty");
            let mut delta: Vec<f64> = out
                .iter()
                .zip(&s.target)
                .map(|(y, t)| {
                    loss += (y - t) * (y - t) * scale;
                    2.0 * (y - t) * scale
                })
                .collect();
            for k in (0..self.weights.len()).rev() {
                let prev = &tr.rates[k];
                let mut back = vec![0.0; prev.len()];
                for (j, d) in delta.iter().enumerate() {
                    let g_net = d * self.act(k + 1, tr.nets[k + 1][j]).1;
                    let (dp, dn) = tr.slopes[k + 1][j];
                    for (i, &r) in prev.iter().enumerate() {
                        let w = self.weights[k][i][j];
                        let slope = if w >= 0.0 { dp } else { dn };
                        gw[k][i][j] += g_net * slope * r;
                        back[i] += g_net * slope * w;
                    }
                    gb[k][j] += g_net * if self.biases[k][j] >= 0.0 { dp } else { dn };
                }
                // the activation slope is applied when this delta is consumed
                delta = back;
            }
        }
        let mut grad = Vec::new();
        for (w, b) in gw.iter().zip(&gb) {
            grad.extend(w.iter().flatten());
            grad.extend(b);
        }
        Ok((loss, grad))
    }

    /// Text form: header keys, one `activation k:` line per layer and one
    /// `layer k:` line per weight block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let sizes: Vec<String> = self.sizes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "sizes={}", sizes.join(","));
        let _ = writeln!(s, "rate_norm={}", self.rate_norm);
        let _ = writeln!(s, "t_dead={}", self.t_dead);
        let _ = writeln!(s, "normalizers={}", self.normalizers);
        for (k, m) in self.activations.iter().enumerate() {
            let _ = writeln!(
                s,
                "activation {k}: r_sat={} r_thr={} gain={} beta={}",
                m.r_sat, m.r_thr, m.gain, m.beta
            );
        }
        for (k, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let _ = write!(s, "layer {}:", k + 1);
            for (i, row) in w.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let _ = write!(s, " w[{i}][{j}]={v}");
                }
            }
            for (j, v) in b.iter().enumerate() {
                let _ = write!(s, " bias[{j}]={v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, m: &str| Error::Parse(format!("line {line}: {m}"));
        let mut sizes: Option<Vec<usize>> = None;
        let mut rate_norm = RATE_NORM_GHZ;
        let mut t_dead = None;
        let mut normalizers = true;
        let mut acts: Vec<(usize, ActivationModel)> = Vec::new();
        let mut blocks: Vec<(usize, usize, Vec<(String, f64)>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let ln = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("activation ") {
                let (k, kv) = rest.split_once(':').ok_or_else(|| perr(ln, "expected `activation k:`"))?;
                let k: usize = k.trim().parse().map_err(|_| perr(ln, "bad layer index"))?;
                let body = kv.split_whitespace().collect::<Vec<_>>().join("\n");
                acts.push((k, ActivationModel::from_text(&body).map_err(|e| perr(ln, &e.to_string()))?));
            } else if let Some(rest) = line.strip_prefix("layer ") {
                let (k, kv) = rest.split_once(':').ok_or_else(|| perr(ln, "expected `layer k:`"))?;
                let k: usize = k.trim().parse().map_err(|_| perr(ln, "bad layer index"))?;
                let mut items = Vec::new();
                for tok in kv.split_whitespace() {
                    let (key, v) = tok.split_once('=').ok_or_else(|| perr(ln, "expected key=value"))?;
                    let v: f64 = v.parse().map_err(|_| perr(ln, &format!("bad number `{v}`")))?;
                    items.push((key.to_string(), v));
                }
                blocks.push((k, ln, items));
            } else if let Some((key, v)) = line.split_once('=') {
                match key.trim() {
                    "sizes" => {
                        let parsed: std::result::Result<Vec<usize>, _> =
                            v.split(',').map(|x| x.trim().parse()).collect();
                        sizes = Some(parsed.map_err(|_| perr(ln, "bad sizes"))?);
                    }
                    "rate_norm" => rate_norm = v.trim().parse().map_err(|_| perr(ln, "bad rate_norm"))?,
                    "t_dead" => t_dead = Some(v.trim().parse().map_err(|_| perr(ln, "bad t_dead"))?),
                    "normalizers" => normalizers = v.trim().parse().map_err(|_| perr(ln, "bad normalizers"))?,
                    other => return Err(perr(ln, &format!("unknown key `{other}`"))),
                }
            } else {
                return Err(perr(ln, "unrecognised line"));
            }
        }
        let sizes = sizes.ok_or_else(|| Error::Parse("missing `sizes`".into()))?;
        let t_dead = t_dead.ok_or_else(|| Error::Parse("missing `t_dead`".into()))?;
        acts.sort_by_key(|(k, _)| *k);
        if acts.iter().enumerate().any(|(i, (k, _))| i != *k) {
            return Err(Error::Parse("activation layers must be 0..n without gaps".into()));
        }
        let mut mlp = MlpSpec::new(&sizes, acts.into_iter().map(|(_, m)| m).collect(), t_dead)
            .map_err(|e| Error::Parse(e.to_string()))?;
        mlp.rate_norm = rate_norm;
        mlp.normalizers = normalizers;
        for (k, ln, items) in blocks {
            if k == 0 || k >= sizes.len() {
                return Err(perr(ln, &format!("no weight block {k}")));
            }
            for (key, v) in items {
                let slot = parse_slot(&key).ok_or_else(|| perr(ln, &format!("bad key `{key}`")))?;
                let cell = match slot {
                    (Some(i), j) => mlp.weights[k - 1].get_mut(i).and_then(|r| r.get_mut(j)),
                    (None, j) => mlp.biases[k - 1].get_mut(j),
                };
                *cell.ok_or_else(|| perr(ln, &format!("`{key}` out of range")))? = v;
            }
        }
        mlp.validate()?;
        Ok(mlp)
    }
}

/// `w[i][j]` → `(Some(i), j)`, `bias[j]` → `(None, j)`.
fn parse_slot(key: &str) -> Option<(Option<usize>, usize)> {
    let idx = |s: &str| -> Option<Vec<usize>> {
        s.split(']')
            .filter(|p| !p.is_empty())
            .map(|p| p.strip_prefix('[')?.parse().ok())
            .collect()
    };
    if let Some(rest) = key.strip_prefix("bias") {
        match idx(rest)?.as_slice() {
            [j] => Some((None, *j)),
            _ => None,
        }
    } else if let Some(rest) = key.strip_prefix('w') {
        match idx(rest)?.as_slice() {
            [i, j] => Some((Some(*i), *j)),
            _ => None,
        }
    } else {
        None
    }
}
