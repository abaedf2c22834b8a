//! Single-layer peephole LSTM with an exact backward pass.
//!
//! For input `x_t` and previous state `(h, c)`:
//!
//! ```text
//! i_t = σ(W_xi x_t + W_hi h + w_ci ⊙ c   + b_i)
//! f_t = σ(W_xf x_t + W_hf h + w_cf ⊙ c   + b_f)
//! g_t = tanh(W_xc x_t + W_hc h           + b_c)
//! c_t = f_t ⊙ c + i_t ⊙ g_t
//! o_t = σ(W_xo x_t + W_ho h + w_co ⊙ c_t + b_o)
//! h_t = o_t ⊙ tanh(c_t)
//! ```
//!
//! The input projections live in [`InputWeights`] separately from the
//! recurrent part so that one cell can be driven through different input
//! projections (the autoencoder's decoder reads `z` and `y` through two).

use crate::error::{Error, Result};
use crate::linalg::{sigmoid, Matrix};

/// `W_x*` blocks, each `H × I`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputWeights {
    pub w_xi: Matrix,
    pub w_xf: Matrix,
    pub w_xc: Matrix,
    pub w_xo: Matrix,
}

/// Recurrent weights (`H × H`), peepholes and biases (`H`).
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentWeights {
    pub w_hi: Matrix,
    pub w_hf: Matrix,
    pub w_hc: Matrix,
    pub w_ho: Matrix,
    pub w_ci: Vec<f64>,
    pub w_cf: Vec<f64>,
    pub w_co: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub input: InputWeights,
    pub recurrent: RecurrentWeights,
}

impl InputWeights {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        InputWeights {
            w_xi: Matrix::zeros(hidden, input),
            w_xf: Matrix::zeros(hidden, input),
            w_xc: Matrix::zeros(hidden, input),
            w_xo: Matrix::zeros(hidden, input),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_xi.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_xi.rows()
    }

    pub fn named(&self) -> [(&'static str, &Matrix); 4] {
        [
            ("W_xi", &self.w_xi),
            ("W_xf", &self.w_xf),
            ("W_xc", &self.w_xc),
            ("W_xo", &self.w_xo),
        ]
    }

    pub fn named_mut(&mut self) -> [(&'static str, &mut Matrix); 4] {
        [
            ("W_xi", &mut self.w_xi),
            ("W_xf", &mut self.w_xf),
            ("W_xc", &mut self.w_xc),
            ("W_xo", &mut self.w_xo),
        ]
    }

    fn check(&self) -> Result<()> {
        let (h, i) = self.w_xi.shape();
        for (name, m) in self.named() {
            if m.shape() != (h, i) {
                return Err(Error::Invalid(format!(
                    "{name} has shape {:?}, expected {:?}",
                    m.shape(),
                    (h, i)
                )));
            }
        }
        Ok(())
    }
}

impl RecurrentWeights {
    pub fn zeros(hidden: usize) -> Self {
        RecurrentWeights {
            w_hi: Matrix::zeros(hidden, hidden),
            w_hf: Matrix::zeros(hidden, hidden),
            w_hc: Matrix::zeros(hidden, hidden),
            w_ho: Matrix::zeros(hidden, hidden),
            w_ci: vec![0.0; hidden],
            w_cf: vec![0.0; hidden],
            w_co: vec![0.0; hidden],
            b_i: vec![0.0; hidden],
            b_f: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.b_i.len()
    }

    pub fn named_matrices(&self) -> [(&'static str, &Matrix); 4] {
        [
            ("W_hi", &self.w_hi),
            ("W_hf", &self.w_hf),
            ("W_hc", &self.w_hc),
            ("W_ho", &self.w_ho),
        ]
    }

    pub fn named_matrices_mut(&mut self) -> [(&'static str, &mut Matrix); 4] {
        [
            ("W_hi", &mut self.w_hi),
            ("W_hf", &mut self.w_hf),
            ("W_hc", &mut self.w_hc),
            ("W_ho", &mut self.w_ho),
        ]
    }

    pub fn named_vectors(&self) -> [(&'static str, &Vec<f64>); 7] {
        [
            ("w_ci", &self.w_ci),
            ("w_cf", &self.w_cf),
            ("w_co", &self.w_co),
            ("b_i", &self.b_i),
            ("b_f", &self.b_f),
            ("b_c", &self.b_c),
            ("b_o", &self.b_o),
        ]
    }

    pub fn named_vectors_mut(&mut self) -> [(&'static str, &mut Vec<f64>); 7] {
        [
            ("w_ci", &mut self.w_ci),
            ("w_cf", &mut self.w_cf),
            ("w_co", &mut self.w_co),
            ("b_i", &mut self.b_i),
            ("b_f", &mut self.b_f),
            ("b_c", &mut self.b_c),
            ("b_o", &mut self.b_o),
        ]
    }

    /// All recurrent tensors as flat slices: the four matrices, then the vectors.
    pub fn slices_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        let RecurrentWeights {
            w_hi,
            w_hf,
            w_hc,
            w_ho,
            w_ci,
            w_cf,
            w_co,
            b_i,
            b_f,
            b_c,
            b_o,
        } = self;
        vec![
            ("W_hi", w_hi.as_mut_slice()),
            ("W_hf", w_hf.as_mut_slice()),
            ("W_hc", w_hc.as_mut_slice()),
            ("W_ho", w_ho.as_mut_slice()),
            ("w_ci", w_ci.as_mut_slice()),
            ("w_cf", w_cf.as_mut_slice()),
            ("w_co", w_co.as_mut_slice()),
            ("b_i", b_i.as_mut_slice()),
            ("b_f", b_f.as_mut_slice()),
            ("b_c", b_c.as_mut_slice()),
            ("b_o", b_o.as_mut_slice()),
        ]
    }

    fn check(&self) -> Result<()> {
        let h = self.hidden_dim();
        for (name, m) in self.named_matrices() {
            if m.shape() != (h, h) {
                return Err(Error::Invalid(format!(
                    "{name} has shape {:?}, expected ({h}, {h})",
                    m.shape()
                )));
            }
        }
        for (name, v) in self.named_vectors() {
            if v.len() != h {
                return Err(Error::dim(name, h, v.len()));
            }
        }
        Ok(())
    }
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams {
            input: InputWeights::zeros(input, hidden),
            recurrent: RecurrentWeights::zeros(hidden),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.recurrent.hidden_dim()
    }

    /// Verifies that every tensor agrees with `(input_dim, hidden_dim)` and is finite.
    pub fn validate(&self) -> Result<()> {
        self.input.check()?;
        self.recurrent.check()?;
        if self.input.hidden_dim() != self.hidden_dim() {
            return Err(Error::dim("input projection rows", self.hidden_dim(), self.input.hidden_dim()));
        }
        let finite = self.input.named().iter().all(|(_, m)| m.as_slice().iter().all(|v| v.is_finite()))
            && self.recurrent.named_matrices().iter().all(|(_, m)| m.as_slice().iter().all(|v| v.is_finite()))
            && self.recurrent.named_vectors().iter().all(|(_, v)| v.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(Error::Invalid("LSTM parameters contain non-finite values".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Activations cached by one forward step.
#[derive(Debug, Clone)]
pub struct TapeEntry {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub o: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

/// One entry per forward step, in time order.
pub type LstmTape = Vec<TapeEntry>;

/// Gradients flowing out of one backward step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGrads {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
}

/// Forward step through an explicit input projection.
pub fn step_forward(
    input: &InputWeights,
    rec: &RecurrentWeights,
    x: &[f64],
    prev: &LstmState,
) -> Result<(LstmState, TapeEntry)> {
    let hd = rec.hidden_dim();
    if x.len() != input.input_dim() {
        return Err(Error::dim("LSTM input", input.input_dim(), x.len()));
    }
    if input.hidden_dim() != hd {
        return Err(Error::dim("LSTM input projection", hd, input.hidden_dim()));
    }
    if prev.h.len() != hd || prev.c.len() != hd {
        return Err(Error::dim("LSTM state", hd, prev.h.len().max(prev.c.len())));
    }

    let preact = |wx: &Matrix, wh: &Matrix, b: &[f64]| {
        let mut a = b.to_vec();
        wx.mul_vec_add(x, &mut a);
        wh.mul_vec_add(&prev.h, &mut a);
        a
    };
    let mut a_i = preact(&input.w_xi, &rec.w_hi, &rec.b_i);
    let mut a_f = preact(&input.w_xf, &rec.w_hf, &rec.b_f);
    let a_c = preact(&input.w_xc, &rec.w_hc, &rec.b_c);
    let mut a_o = preact(&input.w_xo, &rec.w_ho, &rec.b_o);

    let mut i = vec![0.0; hd];
    let mut f = vec![0.0; hd];
    let mut g = vec![0.0; hd];
    let mut o = vec![0.0; hd];
    let mut c = vec![0.0; hd];
    let mut tanh_c = vec![0.0; hd];
    let mut h = vec![0.0; hd];
    for k in 0..hd {
        a_i[k] += rec.w_ci[k] * prev.c[k];
        a_f[k] += rec.w_cf[k] * prev.c[k];
        i[k] = sigmoid(a_i[k]);
        f[k] = sigmoid(a_f[k]);
        g[k] = a_c[k].tanh();
        c[k] = f[k] * prev.c[k] + i[k] * g[k];
        // output peephole reads the updated cell
        a_o[k] += rec.w_co[k] * c[k];
        o[k] = sigmoid(a_o[k]);
        tanh_c[k] = c[k].tanh();
        h[k] = o[k] * tanh_c[k];
    }

    let next = LstmState { h, c: c.clone() };
    let entry = TapeEntry {
        x: x.to_vec(),
        h_prev: prev.h.clone(),
        c_prev: prev.c.clone(),
        i,
        f,
        g,
        o,
        c,
        tanh_c,
    };
    Ok((next, entry))
}

/// Backward step. Parameter gradients are added into `grad_input` / `grad_rec`.
#[allow(clippy::too_many_arguments)]
pub fn step_backward(
    input: &InputWeights,
    rec: &RecurrentWeights,
    entry: &TapeEntry,
    grad_h: &[f64],
    grad_c: &[f64],
    grad_input: &mut InputWeights,
    grad_rec: &mut RecurrentWeights,
) -> Result<StepGrads> {
    let hd = rec.hidden_dim();
    if grad_h.len() != hd || grad_c.len() != hd {
        return Err(Error::dim("upstream LSTM gradient", hd, grad_h.len().max(grad_c.len())));
    }
    if entry.i.len() != hd || entry.x.len() != input.input_dim() {
        return Err(Error::dim("LSTM tape entry", hd, entry.i.len()));
    }
    if grad_input.w_xi.shape() != input.w_xi.shape() || grad_rec.hidden_dim() != hd {
        return Err(Error::dim("LSTM gradient buffer", hd, grad_rec.hidden_dim()));
    }

    let mut d_ai = vec![0.0; hd];
    let mut d_af = vec![0.0; hd];
    let mut d_ac = vec![0.0; hd];
    let mut d_ao = vec![0.0; hd];
    let mut d_c_prev = vec![0.0; hd];
    for k in 0..hd {
        let (i, f, g, o) = (entry.i[k], entry.f[k], entry.g[k], entry.o[k]);
        let do_ = grad_h[k] * entry.tanh_c[k];
        d_ao[k] = do_ * o * (1.0 - o);
        let mut dc = grad_c[k] + grad_h[k] * o * (1.0 - entry.tanh_c[k] * entry.tanh_c[k]);
        dc += d_ao[k] * rec.w_co[k];
        grad_rec.w_co[k] += d_ao[k] * entry.c[k];

        d_ai[k] = dc * g * i * (1.0 - i);
        d_af[k] = dc * entry.c_prev[k] * f * (1.0 - f);
        d_ac[k] = dc * i * (1.0 - g * g);

        d_c_prev[k] = dc * f + d_ai[k] * rec.w_ci[k] + d_af[k] * rec.w_cf[k];
        grad_rec.w_ci[k] += d_ai[k] * entry.c_prev[k];
        grad_rec.w_cf[k] += d_af[k] * entry.c_prev[k];
    }

    let mut d_x = vec![0.0; entry.x.len()];
    let mut d_h_prev = vec![0.0; hd];
    let gates = [
        (&d_ai, &input.w_xi, &rec.w_hi),
        (&d_af, &input.w_xf, &rec.w_hf),
        (&d_ac, &input.w_xc, &rec.w_hc),
        (&d_ao, &input.w_xo, &rec.w_ho),
    ];
    for (da, wx, wh) in gates {
        wx.tr_mul_vec_add(da, &mut d_x);
        wh.tr_mul_vec_add(da, &mut d_h_prev);
    }

    let grads = [
        (&d_ai, &mut grad_input.w_xi, &mut grad_rec.w_hi, &mut grad_rec.b_i),
        (&d_af, &mut grad_input.w_xf, &mut grad_rec.w_hf, &mut grad_rec.b_f),
        (&d_ac, &mut grad_input.w_xc, &mut grad_rec.w_hc, &mut grad_rec.b_c),
        (&d_ao, &mut grad_input.w_xo, &mut grad_rec.w_ho, &mut grad_rec.b_o),
    ];
    for (da, gx, gh, gb) in grads {
        gx.add_outer(da, &entry.x);
        gh.add_outer(da, &entry.h_prev);
        for (b, d) in gb.iter_mut().zip(da.iter()) {
            *b += d;
        }
    }

    Ok(StepGrads {
        x: d_x,
        h_prev: d_h_prev,
        c_prev: d_c_prev,
    })
}

pub fn cell_forward(params: &LstmParams, x: &[f64], prev: &LstmState) -> Result<(LstmState, TapeEntry)> {
    step_forward(&params.input, &params.recurrent, x, prev)
}

pub fn cell_backward(
    params: &LstmParams,
    entry: &TapeEntry,
    grad_h: &[f64],
    grad_c: &[f64],
    grads: &mut LstmParams,
) -> Result<StepGrads> {
    step_backward(
        &params.input,
        &params.recurrent,
        entry,
        grad_h,
        grad_c,
        &mut grads.input,
        &mut grads.recurrent,
    )
}

/// Runs the cell over a whole sequence from `init`, returning every state and the tape.
pub fn forward_sequence<'a>(
    params: &LstmParams,
    inputs: impl IntoIterator<Item = &'a [f64]>,
    init: LstmState,
) -> Result<(Vec<LstmState>, LstmTape)> {
    let mut state = init;
    let mut states = Vec::new();
    let mut tape = Vec::new();
    for x in inputs {
        let (next, entry) = cell_forward(params, x, &state)?;
        states.push(next.clone());
        tape.push(entry);
        state = next;
    }
    Ok((states, tape))
}

/// BPTT over a tape. `grad_hs[t]` is the loss gradient arriving at `h_t` from
/// outside the recurrence. Returns per-step input gradients and the gradient
/// reaching the initial state.
pub fn backward_sequence(
    params: &LstmParams,
    tape: &[TapeEntry],
    grad_hs: &[Vec<f64>],
    grads: &mut LstmParams,
) -> Result<(Vec<Vec<f64>>, LstmState)> {
    if grad_hs.len() != tape.len() {
        return Err(Error::dim("BPTT upstream gradients", tape.len(), grad_hs.len()));
    }
    let hd = params.hidden_dim();
    let mut carry_h = vec![0.0; hd];
    let mut carry_c = vec![0.0; hd];
    let mut grad_xs = vec![Vec::new(); tape.len()];
    for t in (0..tape.len()).rev() {
        let gh: Vec<f64> = grad_hs[t].iter().zip(&carry_h).map(|(a, b)| a + b).collect();
        let step = cell_backward(params, &tape[t], &gh, &carry_c, grads)?;
        grad_xs[t] = step.x;
        carry_h = step.h_prev;
        carry_c = step.c_prev;
    }
    Ok((grad_xs, LstmState { h: carry_h, c: carry_c }))
}
