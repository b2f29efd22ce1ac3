//! Seeded test inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rieszlab_core::markov::MarkovOperator;
use rieszlab_core::vecops::{norm2, project_mean_zero};
use rieszlab_core::{Space, Vertex};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rademacher(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
}

pub fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform on `[0, 1)`.
pub fn uniform(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

pub fn mean_zero(mut f: Vec<f64>, m: &[f64]) -> Vec<f64> {
    project_mean_zero(&mut f, m);
    f
}

/// `delta_x / m(x)` with its mean removed.
pub fn vertex_atom(space: &Space, x: Vertex) -> Vec<f64> {
    let m = space.measure();
    let mut f = vec![0.0; m.len()];
    f[x] = 1.0 / m[x];
    mean_zero(f, m)
}

/// Indicator of `B(x, r)` with its mean removed.
pub fn ball_indicator(space: &Space, x: Vertex, r: f64) -> Vec<f64> {
    let m = space.measure();
    let mut f = vec![0.0; m.len()];
    for y in space.ball(x, r).members {
        f[y] = 1.0;
    }
    mean_zero(f, m)
}

/// `(I - P^k) b` with `b` a multiple of `1_{B(x,r)}` normalized to
/// `||b||_2 = V(x,r)^{-1/2}` and `k = ceil(r)`.
pub fn e1_atom(space: &Space, x: Vertex, r: f64) -> Vec<f64> {
    let m = space.measure();
    let ball = space.ball(x, r);
    let mut b = vec![0.0; m.len()];
    for &y in &ball.members {
        b[y] = 1.0;
    }
    let scale = ball.volume.powf(-0.5) / norm2(&b, m);
    b.iter_mut().for_each(|v| *v *= scale);
    let k = r.ceil().max(1.0) as usize;
    let pk = MarkovOperator::new(space.graph()).power_apply(&b, k).expect("length matches");
    b.iter().zip(&pk).map(|(a, c)| a - c).collect()
}

/// Vertex farthest from the boundary, the smallest id on ties.
pub fn central_vertex(space: &Space) -> Vertex {
    (0..space.vertex_count())
        .max_by(|&a, &b| {
            space
                .boundary_distance(a)
                .total_cmp(&space.boundary_distance(b))
                .then(b.cmp(&a))
        })
        .unwrap_or(0)
}
