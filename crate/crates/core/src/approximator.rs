//! Small fully connected network with hand-written backpropagation.
//!
//! Every nuisance model and every second-stage regressor in this crate is an
//! [`Approximator`]. Two losses are supported: a sample-weighted squared error
//! (weights may be negative) and a weighted Bernoulli negative log-likelihood
//! for logistic outputs. Both are averaged over the mini-batch.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Clip applied to logistic predictions.
pub const PREDICT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Logistic,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Logistic,
    Tanh,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    /// Plain mini-batch gradient descent.
    Sgd,
    /// Adam with the usual moment decay rates (0.9, 0.999).
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    WeightedSquared,
    BernoulliLogLikelihood,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxConfig {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub optimizer: Optimizer,
    /// Early-stopping patience in epochs; only used when a validation set is
    /// passed to [`train_with_validation`].
    pub patience: usize,
    pub seed: u64,
}

impl ApproxConfig {
    pub fn new(input_dim: usize, hidden_layers: Vec<usize>, output: OutputActivation) -> Self {
        Self {
            input_dim,
            hidden_layers,
            hidden_activation: HiddenActivation::Logistic,
            output_activation: output,
            epochs: 10,
            batch_size: 64,
            learning_rate: 1e-3,
            dropout_rate: 0.0,
            optimizer: Optimizer::Adam,
            patience: 5,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::config("input_dim", "must be positive"));
        }
        if self.hidden_layers.iter().any(|&w| w == 0) {
            return Err(Error::config("hidden_layers", "widths must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate", "must be positive and finite"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config("dropout_rate", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    /// `fan_in x fan_out`
    w: Array2<f64>,
    b: Array1<f64>,
}

/// Per-epoch training history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean training loss accumulated over the mini-batches of each epoch.
    pub loss_trace: Vec<f64>,
    /// Mean validation loss after each epoch (empty without validation data).
    pub val_trace: Vec<f64>,
    /// Epoch whose parameters were kept (index into the traces).
    pub best_epoch: usize,
}

impl TrainReport {
    pub fn final_train_loss(&self) -> f64 {
        self.loss_trace.get(self.best_epoch).copied().unwrap_or(f64::NAN)
    }

    pub fn final_val_loss(&self) -> f64 {
        self.val_trace.get(self.best_epoch).copied().unwrap_or(f64::NAN)
    }
}

/// Held-out rows scored after every epoch for early stopping.
#[derive(Debug, Clone, Copy)]
pub struct Validation<'a> {
    pub inputs: ArrayView2<'a, f64>,
    pub targets: &'a [f64],
    pub weights: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approximator {
    cfg: ApproxConfig,
    layers: Vec<Layer>,
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// `log(1 + exp(z))` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Gradients {
    w: Vec<Array2<f64>>,
    b: Vec<Array1<f64>>,
}

struct Forward {
    /// Inputs to each layer (post-activation, post-dropout); `acts[0]` is the batch.
    acts: Vec<Array2<f64>>,
    /// Hidden activations before dropout, used for activation derivatives.
    hidden_pre_mask: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
    /// Output pre-activation.
    z_out: Array1<f64>,
}

impl Approximator {
    /// Fresh model with zero biases and uniform weights: Glorot bounds for
    /// tanh units (doubled for logistic units), He bounds for ReLU units,
    /// Glorot for the output layer.
    pub fn new(cfg: ApproxConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_1a7e_0000_0001);
        let mut dims = vec![cfg.input_dim];
        dims.extend(&cfg.hidden_layers);
        dims.push(1);
        let n_layers = dims.len() - 1;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (fan_in, fan_out) = (w[0] as f64, w[1] as f64);
                let glorot = (6.0 / (fan_in + fan_out)).sqrt();
                let bound = if k + 1 == n_layers {
                    glorot
                } else {
                    match cfg.hidden_activation {
                        HiddenActivation::Logistic => 2.0 * glorot,
                        HiddenActivation::Tanh => glorot,
                        HiddenActivation::Relu => (6.0 / fan_in).sqrt(),
                    }
                };
                Layer {
                    w: Array2::from_shape_fn((w[0], w[1]), |_| rng.gen_range(-bound..bound)),
                    b: Array1::zeros(w[1]),
                }
            })
            .collect();
        Ok(Self { cfg, layers })
    }

    pub fn config(&self) -> &ApproxConfig {
        &self.cfg
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Parameters flattened layer by layer (weights row-major, then biases).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: self.n_params(),
                got: params.len(),
            });
        }
        let mut k = 0;
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = params[k];
                k += 1;
            }
        }
        Ok(())
    }

    fn hidden_act(&self, z: f64) -> f64 {
        match self.cfg.hidden_activation {
            HiddenActivation::Logistic => sigmoid(z),
            HiddenActivation::Tanh => z.tanh(),
            HiddenActivation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation value `h`.
    fn hidden_deriv(&self, h: f64) -> f64 {
        match self.cfg.hidden_activation {
            HiddenActivation::Logistic => h * (1.0 - h),
            HiddenActivation::Tanh => 1.0 - h * h,
            HiddenActivation::Relu => {
                if h > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn forward(&self, x: ArrayView2<f64>, mut dropout: Option<&mut ChaCha8Rng>) -> Forward {
        let n_layers = self.layers.len();
        let mut acts = Vec::with_capacity(n_layers);
        let mut hidden_pre_mask = Vec::with_capacity(n_layers - 1);
        let mut masks = Vec::with_capacity(n_layers - 1);
        acts.push(x.to_owned());
        let p = self.cfg.dropout_rate;
        for l in &self.layers[..n_layers - 1] {
            let mut h = acts.last().unwrap().dot(&l.w);
            h += &l.b;
            h.mapv_inplace(|z| self.hidden_act(z));
            let mask = match dropout.as_deref_mut() {
                Some(rng) if p > 0.0 => {
                    let keep = 1.0 / (1.0 - p);
                    Some(h.map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep }))
                }
                _ => None,
            };
            let a = match &mask {
                Some(m) => &h * m,
                None => h.clone(),
            };
            hidden_pre_mask.push(h);
            masks.push(mask);
            acts.push(a);
        }
        let last = &self.layers[n_layers - 1];
        let z = acts.last().unwrap().dot(&last.w);
        let z_out = z.column(0).mapv(|v| v + last.b[0]);
        Forward {
            acts,
            hidden_pre_mask,
            masks,
            z_out,
        }
    }

    fn output(&self, z: f64) -> f64 {
        match self.cfg.output_activation {
            OutputActivation::Logistic => sigmoid(z),
            OutputActivation::Identity => z,
        }
    }

    /// Per-sample loss and its derivative with respect to the output
    /// pre-activation.
    fn loss_and_dz(&self, z: f64, y: f64, w: f64, loss: LossKind) -> (f64, f64) {
        match loss {
            LossKind::WeightedSquared => {
                let yhat = self.output(z);
                let r = yhat - y;
                let dact = match self.cfg.output_activation {
                    OutputActivation::Identity => 1.0,
                    OutputActivation::Logistic => yhat * (1.0 - yhat),
                };
                (w * r * r, 2.0 * w * r * dact)
            }
            LossKind::BernoulliLogLikelihood => {
                // -[y log s(z) + (1-y) log(1-s(z))] = y softplus(-z) + (1-y) softplus(z)
                let l = y * softplus(-z) + (1.0 - y) * softplus(z);
                (w * l, w * (sigmoid(z) - y))
            }
        }
    }

    /// Summed loss and gradients of the batch-mean loss.
    fn batch_gradients(
        &self,
        x: ArrayView2<f64>,
        y: &[f64],
        w: &[f64],
        loss: LossKind,
        dropout: Option<&mut ChaCha8Rng>,
    ) -> (f64, Gradients) {
        let fwd = self.forward(x, dropout);
        let bsz = y.len() as f64;
        let mut loss_sum = 0.0;
        let mut delta = Array2::zeros((y.len(), 1));
        for i in 0..y.len() {
            let (l, dz) = self.loss_and_dz(fwd.z_out[i], y[i], w[i], loss);
            loss_sum += l;
            delta[[i, 0]] = dz / bsz;
        }
        let n_layers = self.layers.len();
        let mut gw = vec![Array2::zeros((0, 0)); n_layers];
        let mut gb = vec![Array1::zeros(0); n_layers];
        for k in (0..n_layers).rev() {
            gw[k] = fwd.acts[k].t().dot(&delta);
            gb[k] = delta.sum_axis(Axis(0));
            if k > 0 {
                let mut d_prev = delta.dot(&self.layers[k].w.t());
                let h = &fwd.hidden_pre_mask[k - 1];
                match &fwd.masks[k - 1] {
                    Some(m) => ndarray::Zip::from(&mut d_prev).and(h).and(m).for_each(|d, &hv, &mv| {
                        *d *= mv * self.hidden_deriv(hv);
                    }),
                    None => ndarray::Zip::from(&mut d_prev).and(h).for_each(|d, &hv| {
                        *d *= self.hidden_deriv(hv);
                    }),
                }
                delta = d_prev;
            }
        }
        (loss_sum, Gradients { w: gw, b: gb })
    }

    fn check_inputs(&self, inputs: ArrayView2<f64>) -> Result<()> {
        if inputs.ncols() != self.cfg.input_dim {
            return Err(Error::DimensionMismatch {
                what: "input columns",
                expected: self.cfg.input_dim,
                got: inputs.ncols(),
            });
        }
        Ok(())
    }

    /// Deterministic predictions; logistic outputs are clipped to
    /// `[PREDICT_EPS, 1 - PREDICT_EPS]`.
    pub fn predict(&self, inputs: ArrayView2<f64>) -> Result<Array1<f64>> {
        self.check_inputs(inputs)?;
        let mut out = Array1::zeros(inputs.nrows());
        const CHUNK: usize = 4096;
        let mut start = 0;
        while start < inputs.nrows() {
            let end = (start + CHUNK).min(inputs.nrows());
            let fwd = self.forward(inputs.slice(ndarray::s![start..end, ..]), None);
            for (i, &z) in fwd.z_out.iter().enumerate() {
                out[start + i] = match self.cfg.output_activation {
                    OutputActivation::Logistic => sigmoid(z).clamp(PREDICT_EPS, 1.0 - PREDICT_EPS),
                    OutputActivation::Identity => z,
                };
            }
            start = end;
        }
        Ok(out)
    }

    /// Mean loss over all rows, without dropout.
    pub fn loss(&self, inputs: ArrayView2<f64>, targets: &[f64], weights: &[f64], loss: LossKind) -> Result<f64> {
        check_data(self, inputs, targets, weights, loss)?;
        if targets.is_empty() {
            return Ok(0.0);
        }
        let fwd = self.forward(inputs, None);
        let total: f64 = (0..targets.len())
            .map(|i| self.loss_and_dz(fwd.z_out[i], targets[i], weights[i], loss).0)
            .sum();
        Ok(total / targets.len() as f64)
    }

    /// Gradient of [`Approximator::loss`], flattened like [`Approximator::params`].
    pub fn gradient(&self, inputs: ArrayView2<f64>, targets: &[f64], weights: &[f64], loss: LossKind) -> Result<Vec<f64>> {
        check_data(self, inputs, targets, weights, loss)?;
        let (_, g) = self.batch_gradients(inputs, targets, weights, loss, None);
        let mut out = Vec::with_capacity(self.n_params());
        for (gw, gb) in g.w.iter().zip(&g.b) {
            out.extend(gw.iter());
            out.extend(gb.iter());
        }
        Ok(out)
    }
}

fn check_data(m: &Approximator, inputs: ArrayView2<f64>, targets: &[f64], weights: &[f64], loss: LossKind) -> Result<()> {
    m.check_inputs(inputs)?;
    if targets.len() != inputs.nrows() {
        return Err(Error::DimensionMismatch {
            what: "targets",
            expected: inputs.nrows(),
            got: targets.len(),
        });
    }
    if weights.len() != inputs.nrows() {
        return Err(Error::DimensionMismatch {
            what: "sample weights",
            expected: inputs.nrows(),
            got: weights.len(),
        });
    }
    if inputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("inputs"));
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("targets"));
    }
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sample weights"));
    }
    if loss == LossKind::BernoulliLogLikelihood {
        if m.cfg.output_activation != OutputActivation::Logistic {
            return Err(Error::config("output_activation", "bernoulli loss needs a logistic output"));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::config("sample_weights", "must be non-negative for bernoulli loss"));
        }
        if targets.iter().any(|&y| !(0.0..=1.0).contains(&y)) {
            return Err(Error::config("targets", "bernoulli labels must lie in [0, 1]"));
        }
    }
    Ok(())
}

struct AdamState {
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

fn apply_update(model: &mut Approximator, grads: &Gradients, lr: f64, adam: Option<&mut AdamState>) {
    match adam {
        None => {
            for (l, (gw, gb)) in model.layers.iter_mut().zip(grads.w.iter().zip(&grads.b)) {
                l.w.scaled_add(-lr, gw);
                l.b.scaled_add(-lr, gb);
            }
        }
        Some(st) => {
            const B1: f64 = 0.9;
            const B2: f64 = 0.999;
            const EPS: f64 = 1e-8;
            st.step += 1;
            let c1 = 1.0 - B1.powi(st.step);
            let c2 = 1.0 - B2.powi(st.step);
            let mut k = 0;
            for (l, (gw, gb)) in model.layers.iter_mut().zip(grads.w.iter().zip(&grads.b)) {
                for (p, &g) in l.w.iter_mut().zip(gw.iter()).chain(l.b.iter_mut().zip(gb.iter())) {
                    st.m[k] = B1 * st.m[k] + (1.0 - B1) * g;
                    st.v[k] = B2 * st.v[k] + (1.0 - B2) * g * g;
                    *p -= lr * (st.m[k] / c1) / ((st.v[k] / c2).sqrt() + EPS);
                    k += 1;
                }
            }
        }
    }
}

/// Fits a fresh model; returns it with its per-epoch training loss.
pub fn train(
    cfg: &ApproxConfig,
    inputs: ArrayView2<f64>,
    targets: &[f64],
    sample_weights: &[f64],
    loss: LossKind,
) -> Result<(Approximator, Vec<f64>)> {
    let (m, report) = train_with_validation(cfg, inputs, targets, sample_weights, loss, None)?;
    Ok((m, report.loss_trace))
}

/// Like [`train`], with optional early stopping on a validation set. When
/// validation data is given the parameters of the best validation epoch are
/// returned.
pub fn train_with_validation(
    cfg: &ApproxConfig,
    inputs: ArrayView2<f64>,
    targets: &[f64],
    sample_weights: &[f64],
    loss: LossKind,
    validation: Option<Validation<'_>>,
) -> Result<(Approximator, TrainReport)> {
    let mut model = Approximator::new(cfg.clone())?;
    check_data(&model, inputs, targets, sample_weights, loss)?;
    if let Some(v) = &validation {
        check_data(&model, v.inputs, v.targets, v.weights, loss)?;
    }
    if targets.is_empty() {
        return Err(Error::Empty("training rows"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = match cfg.optimizer {
        Optimizer::Adam => Some(AdamState {
            step: 0,
            m: vec![0.0; model.n_params()],
            v: vec![0.0; model.n_params()],
        }),
        Optimizer::Sgd => None,
    };
    let n = targets.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut report = TrainReport::default();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut since_best = 0;
    let mut yb = Vec::with_capacity(cfg.batch_size);
    let mut wb = Vec::with_capacity(cfg.batch_size);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let xb = inputs.select(Axis(0), chunk);
            yb.clear();
            wb.clear();
            yb.extend(chunk.iter().map(|&i| targets[i]));
            wb.extend(chunk.iter().map(|&i| sample_weights[i]));
            let drop_rng = if cfg.dropout_rate > 0.0 { Some(&mut rng) } else { None };
            let (batch_loss, grads) = model.batch_gradients(xb.view(), &yb, &wb, loss, drop_rng);
            total += batch_loss;
            apply_update(&mut model, &grads, cfg.learning_rate, adam.as_mut());
        }
        report.loss_trace.push(total / n as f64);
        report.best_epoch = epoch;

        if let Some(v) = &validation {
            let vl = if v.targets.is_empty() {
                0.0
            } else {
                model.loss(v.inputs, v.targets, v.weights, loss)?
            };
            report.val_trace.push(vl);
            let improved = best.as_ref().map_or(true, |(b, _)| vl < *b);
            if improved && vl.is_finite() {
                best = Some((vl, model.params()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= cfg.patience.max(1) {
                    break;
                }
            }
        }
    }

    if let Some((_, params)) = best {
        report.best_epoch = report
            .val_trace
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(report.best_epoch);
        model.set_params(&params)?;
    }
    Ok((model, report))
}

/// Largest elementwise relative error between the analytic gradient and a
/// central finite difference with step `1e-5`.
///
/// Relative error is `|analytic - numeric| / max(|analytic|, |numeric|, 1e-6)`.
pub fn grad_check(
    m: &Approximator,
    inputs: ArrayView2<f64>,
    targets: &[f64],
    weights: &[f64],
    loss: LossKind,
) -> Result<f64> {
    const STEP: f64 = 1e-5;
    const FLOOR: f64 = 1e-6;
    let analytic = m.gradient(inputs, targets, weights, loss)?;
    let base = m.params();
    let mut probe = m.clone();
    let mut params = base.clone();
    let mut worst: f64 = 0.0;
    for k in 0..base.len() {
        params[k] = base[k] + STEP;
        probe.set_params(&params)?;
        let up = probe.loss(inputs, targets, weights, loss)?;
        params[k] = base[k] - STEP;
        probe.set_params(&params)?;
        let down = probe.loss(inputs, targets, weights, loss)?;
        params[k] = base[k];
        let numeric = (up - down) / (2.0 * STEP);
        let a = analytic[k];
        let denom = a.abs().max(numeric.abs()).max(FLOOR);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}
