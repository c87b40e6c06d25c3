use attnlab_core::simplex::{entmax_bisect, sparsemax, AlphaParam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use std::time::Instant;

fn obj(p: &[f64], z: &[f64], alpha: f64) -> f64 {
    let inner: f64 = p.iter().zip(z).map(|(a, b)| a * b).sum();
    inner + p.iter().map(|&v| v.max(0.0) - v.max(0.0).powf(alpha)).sum::<f64>() / (alpha * (alpha - 1.0))
}

fn pga(z: &[f64], alpha: f64, iters: usize) -> Vec<f64> {
    let m = z.len();
    let mut p = vec![1.0 / m as f64; m];
    let mut best = p.clone();
    let mut bobj = obj(&p, z, alpha);
    let mut arg = vec![0.0; m];
    let n1 = iters / 2;
    for k in 1..=n1 {
        let s = (2.0 / k as f64).min(0.5);
        for i in 0..m {
            let g = z[i] - p[i].max(0.0).powf(alpha - 1.0) / (alpha - 1.0);
            arg[i] = p[i] + s * g;
        }
        p = sparsemax(&arg).unwrap().0.probs;
        let o = obj(&p, z, alpha);
        if o > bobj { bobj = o; best = p.clone(); }
    }
    // multiplicative polish: strictly feasible, no boundary flicker
    let mut q: Vec<f64> = p.iter().map(|&v| v.max(1e-300)).collect();
    let qs: f64 = q.iter().sum();
    for v in q.iter_mut() { *v /= qs; }
    for k in 1..=(iters - n1) {
        let s = 2.0 / (1.0 + (k as f64 / ((iters - n1) as f64 / 4.0)));
        let mut gbar = 0.0;
        for i in 0..m {
            let g = z[i] - q[i].powf(alpha - 1.0) / (alpha - 1.0);
            arg[i] = g;
            gbar += q[i] * g;
        }
        let mut sum = 0.0;
        for i in 0..m {
            q[i] *= (s * (arg[i] - gbar)).clamp(-40.0, 40.0).exp();
            sum += q[i];
        }
        for v in q.iter_mut() { *v /= sum; }
        let o = obj(&q, z, alpha);
        if o > bobj { bobj = o; best = q.clone(); }
    }
    best
}

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let mut cases: Vec<Vec<f64>> = Vec::new();
    for _ in 0..1000 {
        let m = rng.gen_range(2..=64);
        cases.push((0..m).map(|_| rng.sample(StandardNormal)).collect());
    }
    for (alpha, iters) in [(1.25f64, 16000usize), (1.5, 6000), (1.75, 6000), (2.0, 6000)] {
        let t0 = Instant::now();
        let mut worst: f64 = 0.0;
        for z in &cases {
            let p = pga(z, alpha, iters);
            let q = entmax_bisect(z, AlphaParam::new(alpha).unwrap(), 1e-14, 200).unwrap().0.probs;
            for (a, b) in p.iter().zip(&q) { worst = worst.max((a - b).abs()); }
        }
        println!("alpha={alpha} iters={iters} worst={worst:.2e} ({:.1?})", t0.elapsed());
    }
}
