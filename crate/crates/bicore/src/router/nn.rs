//! Small fixed-shape classifier: 3 inputs, one sigmoid hidden layer, 3-way
//! softmax output, trained full-batch on cross-entropy. Parameters live in
//! one flat vector so the optimizers stay generic over the shape.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const IN: usize = 3;
pub const OUT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Gd { lr: f64, epochs: u32 },
    Momentum { lr: f64, momentum: f64, epochs: u32 },
    Lbfgs { epochs: u32 },
}

impl Optimizer {
    pub fn name(&self) -> &'static str {
        match self {
            Optimizer::Gd { .. } => "gd",
            Optimizer::Momentum { .. } => "momentum",
            Optimizer::Lbfgs { .. } => "lbfgs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub hidden: u32,
    pub optimizer: Optimizer,
}

/// Flat layout: w1 (H x 3, row-major), b1 (H), w2 (3 x H), b2 (3).
#[derive(Debug, Clone, PartialEq)]
pub struct Net {
    pub hidden: usize,
    pub theta: Vec<f64>,
}

fn param_count(h: usize) -> usize {
    h * IN + h + OUT * h + OUT
}

impl Net {
    /// Uniform init scaled per layer, deterministic in the seed.
    pub fn init(hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut theta = Vec::with_capacity(param_count(hidden));
        let r1 = (6.0 / (IN + hidden) as f64).sqrt();
        for _ in 0..hidden * IN {
            theta.push(rng.gen_range(-r1..r1));
        }
        theta.extend(std::iter::repeat_n(0.0, hidden));
        let r2 = (6.0 / (hidden + OUT) as f64).sqrt();
        for _ in 0..OUT * hidden {
            theta.push(rng.gen_range(-r2..r2));
        }
        theta.extend(std::iter::repeat_n(0.0, OUT));
        Net { hidden, theta }
    }

    pub fn from_theta(hidden: usize, theta: Vec<f64>) -> Self {
        assert_eq!(theta.len(), param_count(hidden));
        Net { hidden, theta }
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let h = self.hidden;
        let (w1, rest) = self.theta.split_at(h * IN);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(OUT * h);
        (w1, b1, w2, b2)
    }

    /// Class probabilities for one input.
    pub fn forward(&self, x: [f64; IN]) -> [f64; OUT] {
        let h = self.hidden;
        let (w1, b1, w2, b2) = self.split();
        let mut hid = vec![0.0; h];
        for j in 0..h {
            let mut z = b1[j];
            for i in 0..IN {
                z += w1[j * IN + i] * x[i];
            }
            hid[j] = sigmoid(z);
        }
        let mut z2 = [0.0; OUT];
        for o in 0..OUT {
            let mut z = b2[o];
            for j in 0..h {
                z += w2[o * h + j] * hid[j];
            }
            z2[o] = z;
        }
        softmax(z2)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softmax(z: [f64; OUT]) -> [f64; OUT] {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut e = [0.0; OUT];
    let mut s = 0.0;
    for i in 0..OUT {
        e[i] = (z[i] - m).exp();
        s += e[i];
    }
    for v in &mut e {
        *v /= s;
    }
    e
}

/// Mean cross-entropy and its gradient over the batch. `ys` holds class
/// indices 0..3.
pub fn loss_and_grad(
    hidden: usize,
    theta: &[f64],
    xs: &[[f64; IN]],
    ys: &[usize],
) -> (f64, Vec<f64>) {
    let h = hidden;
    let n = xs.len();
    let (w1, rest) = theta.split_at(h * IN);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(OUT * h);
    let mut grad = vec![0.0; theta.len()];
    let (gw1, grest) = grad.split_at_mut(h * IN);
    let (gb1, grest) = grest.split_at_mut(h);
    let (gw2, gb2) = grest.split_at_mut(OUT * h);
    let mut loss = 0.0;
    let mut hid = vec![0.0; h];
    for (x, &y) in xs.iter().zip(ys) {
        for j in 0..h {
            let mut z = b1[j];
            for i in 0..IN {
                z += w1[j * IN + i] * x[i];
            }
            hid[j] = sigmoid(z);
        }
        let mut z2 = [0.0; OUT];
        for o in 0..OUT {
            let mut z = b2[o];
            for j in 0..h {
                z += w2[o * h + j] * hid[j];
            }
            z2[o] = z;
        }
        let p = softmax(z2);
        loss -= p[y].max(1e-300).ln();
        let mut dz2 = p;
        dz2[y] -= 1.0;
        for o in 0..OUT {
            gb2[o] += dz2[o];
            for j in 0..h {
                gw2[o * h + j] += dz2[o] * hid[j];
            }
        }
        for j in 0..h {
            let mut dh = 0.0;
            for o in 0..OUT {
                dh += w2[o * h + j] * dz2[o];
            }
            let dz1 = dh * hid[j] * (1.0 - hid[j]);
            gb1[j] += dz1;
            for i in 0..IN {
                gw1[j * IN + i] += dz1 * x[i];
            }
        }
    }
    let scale = 1.0 / n as f64;
    for gv in &mut grad {
        *gv *= scale;
    }
    (loss * scale, grad)
}

/// Fit `net` on the batch. Whatever the optimizer does, the parameters with
/// the lowest loss seen along the way are the ones returned.
pub fn train(mut net: Net, xs: &[[f64; IN]], ys: &[usize], opt: Optimizer) -> Net {
    assert!(!xs.is_empty());
    assert_eq!(xs.len(), ys.len());
    let h = net.hidden;
    let (mut best_loss, _) = loss_and_grad(h, &net.theta, xs, ys);
    let mut best = net.theta.clone();
    match opt {
        Optimizer::Gd { lr, epochs } => {
            for _ in 0..epochs {
                let (loss, grad) = loss_and_grad(h, &net.theta, xs, ys);
                track_best(loss, &net.theta, &mut best_loss, &mut best);
                for (t, g) in net.theta.iter_mut().zip(&grad) {
                    *t -= lr * g;
                }
            }
        }
        Optimizer::Momentum {
            lr,
            momentum,
            epochs,
        } => {
            let mut vel = vec![0.0; net.theta.len()];
            for _ in 0..epochs {
                let (loss, grad) = loss_and_grad(h, &net.theta, xs, ys);
                track_best(loss, &net.theta, &mut best_loss, &mut best);
                for ((t, v), g) in net.theta.iter_mut().zip(&mut vel).zip(&grad) {
                    *v = momentum * *v - lr * g;
                    *t += *v;
                }
            }
        }
        Optimizer::Lbfgs { epochs } => {
            lbfgs(&mut net.theta, h, xs, ys, epochs, &mut best_loss, &mut best);
        }
    }
    let (final_loss, _) = loss_and_grad(h, &net.theta, xs, ys);
    track_best(final_loss, &net.theta, &mut best_loss, &mut best);
    Net::from_theta(h, best)
}

fn track_best(loss: f64, theta: &[f64], best_loss: &mut f64, best: &mut [f64]) {
    if loss < *best_loss {
        *best_loss = loss;
        best.copy_from_slice(theta);
    }
}

const LBFGS_MEMORY: usize = 7;

/// Limited-memory quasi-Newton steps with Armijo backtracking. History pairs
/// are kept only when the curvature condition holds.
fn lbfgs(
    theta: &mut [f64],
    h: usize,
    xs: &[[f64; IN]],
    ys: &[usize],
    epochs: u32,
    best_loss: &mut f64,
    best: &mut [f64],
) {
    let n = theta.len();
    let mut hist: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> =
        std::collections::VecDeque::new();
    let (mut loss, mut grad) = loss_and_grad(h, theta, xs, ys);
    for _ in 0..epochs {
        track_best(loss, theta, best_loss, best);
        let mut d = two_loop(&grad, &hist);
        let mut slope: f64 = d.iter().zip(&grad).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            for (di, gi) in d.iter_mut().zip(&grad) {
                *di = -gi;
            }
            slope = -grad.iter().map(|g| g * g).sum::<f64>();
        }
        if slope.abs() < 1e-14 {
            break;
        }
        let mut step = 1.0;
        let mut accepted = false;
        let mut cand = vec![0.0; n];
        let mut cand_loss = loss;
        for _ in 0..24 {
            for i in 0..n {
                cand[i] = theta[i] + step * d[i];
            }
            let (l, _) = loss_and_grad(h, &cand, xs, ys);
            if l <= loss + 1e-4 * step * slope {
                cand_loss = l;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let (_, new_grad) = loss_and_grad(h, &cand, xs, ys);
        let s: Vec<f64> = cand.iter().zip(theta.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-10 {
            if hist.len() == LBFGS_MEMORY {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        theta.copy_from_slice(&cand);
        loss = cand_loss;
        grad = new_grad;
    }
    track_best(loss, theta, best_loss, best);
}

fn two_loop(
    grad: &[f64],
    hist: &std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)>,
) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * s.iter().zip(&q).map(|(si, qi)| si * qi).sum::<f64>();
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = hist.back() {
        let sy: f64 = s.iter().zip(y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|v| v * v).sum();
        if yy > 0.0 {
            let gamma = sy / yy;
            for qi in &mut q {
                *qi *= gamma;
            }
        }
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
        let b = rho * y.iter().zip(&q).map(|(yi, qi)| yi * qi).sum::<f64>();
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    for qi in &mut q {
        *qi = -*qi;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_batch() -> (Vec<[f64; IN]>, Vec<usize>) {
        // Separable: class 0 iff x2 > 0.5, else class 1.
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..40 {
            let t = i as f64 / 39.0;
            xs.push([0.3, 0.7, t]);
            ys.push(if t > 0.5 { 0 } else { 1 });
        }
        (xs, ys)
    }

    fn accuracy(net: &Net, xs: &[[f64; IN]], ys: &[usize]) -> f64 {
        let mut ok = 0;
        for (x, &y) in xs.iter().zip(ys) {
            let p = net.forward(*x);
            let pred = (0..OUT)
                .max_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap())
                .unwrap();
            if pred == y {
                ok += 1;
            }
        }
        ok as f64 / xs.len() as f64
    }

    #[test]
    fn probabilities_sum_to_one() {
        let net = Net::init(10, 7);
        for x in [[0.0, 0.0, 0.0], [1.0, 0.5, 0.25], [-2.0, 3.0, 0.1]] {
            let p = net.forward(x);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let net = Net::init(4, 3);
        let (xs, ys) = toy_batch();
        let (_, grad) = loss_and_grad(4, &net.theta, &xs, &ys);
        let eps = 1e-6;
        for k in (0..net.theta.len()).step_by(5) {
            let mut plus = net.theta.clone();
            plus[k] += eps;
            let mut minus = net.theta.clone();
            minus[k] -= eps;
            let (lp, _) = loss_and_grad(4, &plus, &xs, &ys);
            let (lm, _) = loss_and_grad(4, &minus, &xs, &ys);
            let fd = (lp - lm) / (2.0 * eps);
            assert!(
                (fd - grad[k]).abs() < 1e-5,
                "param {k}: fd {fd} vs grad {}",
                grad[k]
            );
        }
    }

    #[test]
    fn every_optimizer_fits_separable_data() {
        let (xs, ys) = toy_batch();
        let opts = [
            Optimizer::Gd {
                lr: 0.8,
                epochs: 600,
            },
            Optimizer::Momentum {
                lr: 0.3,
                momentum: 0.9,
                epochs: 400,
            },
            Optimizer::Lbfgs { epochs: 120 },
        ];
        for opt in opts {
            let net = Net::init(10, 42);
            let (initial, _) = loss_and_grad(10, &net.theta, &xs, &ys);
            let fitted = train(net, &xs, &ys, opt);
            let (fin, _) = loss_and_grad(10, &fitted.theta, &xs, &ys);
            assert!(fin < initial, "{}: {fin} !< {initial}", opt.name());
            assert!(
                accuracy(&fitted, &xs, &ys) >= 0.99,
                "{} accuracy too low",
                opt.name()
            );
        }
    }

    #[test]
    fn training_is_deterministic() {
        let (xs, ys) = toy_batch();
        let opt = Optimizer::Lbfgs { epochs: 60 };
        let a = train(Net::init(12, 9), &xs, &ys, opt);
        let b = train(Net::init(12, 9), &xs, &ys, opt);
        assert_eq!(a.theta, b.theta);
    }
}
